//! LP model, certificates and exact verification.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::rational::Rational;
use crate::rules::{applicable_rules, t_fixed_value, RuleKey};
use crate::words::{ConfigWord, SlotValue, WordKind};

use super::LpError;

pub const ALPHA: usize = 0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Provenance {
    Word(ConfigWord),
    Face4,
    Vertex4,
    NonNeg(RuleKey),
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Provenance::Word(w) => write!(f, "{w}"),
            Provenance::Face4 => f.write_str("face4"),
            Provenance::Vertex4 => f.write_str("vertex4"),
            Provenance::NonNeg(k) => write!(f, "nonneg:{k}"),
        }
    }
}

impl FromStr for Provenance {
    type Err = LpError;

    fn from_str(s: &str) -> Result<Self, LpError> {
        match s {
            "face4" => Ok(Provenance::Face4),
            "vertex4" => Ok(Provenance::Vertex4),
            _ => {
                if let Some(k) = s.strip_prefix("nonneg:") {
                    return k
                        .parse()
                        .map(Provenance::NonNeg)
                        .map_err(|e| LpError::Parse(format!("{e}")));
                }
                s.parse()
                    .map(Provenance::Word)
                    .map_err(|e| LpError::Parse(format!("{e}")))
            }
        }
    }
}

/// `Σ coeffs · x ≥ rhs`. Coefficients are rule multiplicities, hence integers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearConstraint {
    pub coeffs: Vec<(usize, i64)>,
    pub rhs: Rational,
    pub provenance: Provenance,
}

impl LinearConstraint {
    pub fn slack(&self, x: &[Rational]) -> Rational {
        let mut lhs = Rational::zero();
        for &(v, c) in &self.coeffs {
            lhs += &x[v] * &Rational::from_int(c);
        }
        lhs - &self.rhs
    }

    pub fn slack_f64(&self, x: &[f64]) -> f64 {
        self.coeffs.iter().map(|&(v, c)| x[v] * c as f64).sum::<f64>() - self.rhs.to_f64()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ModelOptions {
    /// Adds `ω ≥ 0` for every rule variable.
    pub nonneg_omega: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LpModel {
    keys: Vec<RuleKey>,
    index: BTreeMap<RuleKey, usize>,
    pub constraints: Vec<LinearConstraint>,
}

/// Variables: `alpha` at index 0, then the 5-face rule keys in sorted order.
fn variable_keys() -> Vec<RuleKey> {
    RuleKey::all_for(SlotValue::F5)
}

impl LpModel {
    pub fn empty() -> LpModel {
        let keys = variable_keys();
        let index = keys.iter().enumerate().map(|(i, k)| (*k, i + 1)).collect();
        LpModel {
            keys,
            index,
            constraints: Vec::new(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.keys.len() + 1
    }

    pub fn keys(&self) -> &[RuleKey] {
        &self.keys
    }

    pub fn var_index(&self, key: &RuleKey) -> Option<usize> {
        self.index.get(key).copied()
    }

    pub fn var_name(&self, v: usize) -> String {
        if v == ALPHA {
            "alpha".to_string()
        } else {
            self.keys[v - 1].to_string()
        }
    }

    fn var_by_name(&self, name: &str) -> Result<usize, LpError> {
        if name == "alpha" {
            return Ok(ALPHA);
        }
        let key: RuleKey = name.parse().map_err(|e| LpError::Parse(format!("{e}")))?;
        self.var_index(&key)
            .ok_or_else(|| LpError::Parse(format!("unknown variable {name}")))
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for c in &self.constraints {
            out.push_str(&format!("row {} :", c.provenance));
            for &(v, k) in &c.coeffs {
                out.push_str(&format!(" {} {}", k, self.var_name(v)));
            }
            out.push_str(&format!(" >= {}\n", c.rhs));
        }
        out
    }

    pub fn parse(text: &str) -> Result<LpModel, LpError> {
        let mut model = LpModel::empty();
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
            let bad = || LpError::Parse(format!("malformed row `{line}`"));
            let rest = line.strip_prefix("row ").ok_or_else(bad)?;
            let (prov, body) = rest.split_once(" :").ok_or_else(bad)?;
            let (terms, rhs) = body.rsplit_once(">=").ok_or_else(bad)?;
            let toks: Vec<&str> = terms.split_whitespace().collect();
            if toks.len() % 2 != 0 {
                return Err(bad());
            }
            let mut coeffs = Vec::new();
            for pair in toks.chunks(2) {
                let k: i64 = pair[0].parse().map_err(|_| bad())?;
                coeffs.push((model.var_by_name(pair[1])?, k));
            }
            model.constraints.push(LinearConstraint {
                coeffs,
                rhs: rhs.trim().parse().map_err(|_| bad())?,
                provenance: prov.trim().parse()?,
            });
        }
        Ok(model)
    }
}

/// One constraint per word, plus `4 − α ≥ 0` for 4-faces and 4-vertices.
pub fn build_model(words: &[ConfigWord], opts: ModelOptions) -> LpModel {
    let mut model = LpModel::empty();
    let mut sorted = words.to_vec();
    sorted.sort();
    sorted.dedup();
    for w in &sorted {
        model.constraints.push(word_constraint(&model, w));
    }
    for p in [Provenance::Face4, Provenance::Vertex4] {
        model.constraints.push(LinearConstraint {
            coeffs: vec![(ALPHA, -1)],
            rhs: Rational::from_int(-4),
            provenance: p,
        });
    }
    if opts.nonneg_omega {
        for (i, k) in model.keys.clone().into_iter().enumerate() {
            model.constraints.push(LinearConstraint {
                coeffs: vec![(i + 1, 1)],
                rhs: Rational::zero(),
                provenance: Provenance::NonNeg(k),
            });
        }
    }
    model
}

fn word_constraint(model: &LpModel, w: &ConfigWord) -> LinearConstraint {
    let mut coeffs: BTreeMap<usize, i64> = BTreeMap::new();
    coeffs.insert(ALPHA, -1);
    let mut constant = Rational::zero();
    let sign = if w.kind() == WordKind::Face5 { -1 } else { 1 };
    for inst in applicable_rules(w) {
        if inst.source() == SlotValue::F6P {
            let t = t_fixed_value(&inst.key).expect("6p key");
            constant += t * Rational::from_int(inst.multiplicity as i64);
        } else {
            let v = model.var_index(&inst.key).expect("declared key");
            *coeffs.entry(v).or_default() += sign * inst.multiplicity as i64;
        }
    }
    let base = Rational::from_int(w.kind().degree() as i64);
    LinearConstraint {
        coeffs: coeffs.into_iter().filter(|&(_, c)| c != 0).collect(),
        rhs: -(base + constant),
        provenance: Provenance::Word(*w),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Certificate {
    pub alpha: Rational,
    pub omega: BTreeMap<RuleKey, Rational>,
}

impl Certificate {
    /// Assignment vector in model variable order.
    pub fn values(&self, model: &LpModel) -> Result<Vec<Rational>, LpError> {
        let mut x = vec![self.alpha.clone()];
        for k in model.keys() {
            x.push(
                self.omega
                    .get(k)
                    .cloned()
                    .ok_or(LpError::MissingVariable(*k))?,
            );
        }
        Ok(x)
    }

    pub fn from_values(model: &LpModel, x: &[Rational]) -> Certificate {
        Certificate {
            alpha: x[ALPHA].clone(),
            omega: model
                .keys()
                .iter()
                .enumerate()
                .map(|(i, k)| (*k, x[i + 1].clone()))
                .collect(),
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("alpha {}\n", self.alpha);
        for (k, v) in &self.omega {
            out.push_str(&format!("omega {k} {v}\n"));
        }
        out
    }

    pub fn parse(text: &str) -> Result<Certificate, LpError> {
        let mut alpha = None;
        let mut omega = BTreeMap::new();
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
            let bad = || LpError::Parse(format!("malformed certificate line `{line}`"));
            let toks: Vec<&str> = line.split_whitespace().collect();
            match toks.as_slice() {
                ["alpha", v] => alpha = Some(v.parse().map_err(|_| bad())?),
                ["omega", k, v] => {
                    let key: RuleKey = k.parse().map_err(|_| bad())?;
                    omega.insert(key, v.parse().map_err(|_| bad())?);
                }
                _ => return Err(bad()),
            }
        }
        Ok(Certificate {
            alpha: alpha.ok_or_else(|| LpError::Parse("missing alpha".into()))?,
            omega,
        })
    }
}

/// Exact substitution of `cert` into every constraint.
pub fn verify(model: &LpModel, cert: &Certificate) -> Result<bool, LpError> {
    let x = cert.values(model)?;
    Ok(model
        .constraints
        .iter()
        .all(|c| !c.slack(&x).is_negative()))
}

/// Provenances of the zero-slack constraints, sorted by their text form.
pub fn tight_rows(model: &LpModel, cert: &Certificate) -> Result<Vec<String>, LpError> {
    let x = cert.values(model)?;
    let mut out: Vec<String> = model
        .constraints
        .iter()
        .filter(|c| c.slack(&x).is_zero())
        .map(|c| c.provenance.to_string())
        .collect();
    out.sort();
    Ok(out)
}

/// For every tight row and every variable in it, moves that variable by
/// `delta` in the direction that decreases the row's left side and checks
/// that verification then fails. Returns the number of such perturbations
/// that did not flip `verify` (zero for a genuine exact certificate).
pub fn perturbation_survivors(
    model: &LpModel,
    cert: &Certificate,
    delta: &Rational,
) -> Result<usize, LpError> {
    let x = cert.values(model)?;
    let mut survivors = 0;
    for c in model.constraints.iter().filter(|c| c.slack(&x).is_zero()) {
        for &(v, k) in &c.coeffs {
            let mut y = x.clone();
            if k > 0 {
                y[v] = &y[v] - delta;
            } else {
                y[v] = &y[v] + delta;
            }
            let cert2 = Certificate::from_values(model, &y);
            if verify(model, &cert2)? {
                survivors += 1;
            }
        }
    }
    Ok(survivors)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> ConfigWord {
        s.parse().unwrap()
    }

    #[test]
    fn empty_model_has_synthetic_rows() {
        let m = build_model(&[], ModelOptions::default());
        assert_eq!(m.constraints.len(), 2);
        assert_eq!(m.num_vars(), 157);
        let cert = Certificate {
            alpha: Rational::from_int(4),
            omega: m.keys().iter().map(|k| (*k, Rational::zero())).collect(),
        };
        assert!(verify(&m, &cert).unwrap());
    }

    #[test]
    fn all_triangles_vertex_row() {
        let m = build_model(&[w("V3:[3/3/3]")], ModelOptions::default());
        let c = &m.constraints[0];
        assert_eq!(c.coeffs, vec![(ALPHA, -1)]);
        assert_eq!(c.rhs, Rational::from_int(-3));
        let cert = Certificate {
            alpha: Rational::from_int(4),
            omega: m.keys().iter().map(|k| (*k, Rational::zero())).collect(),
        };
        assert!(!verify(&m, &cert).unwrap());
    }

    #[test]
    fn big_faces_fold_into_rhs() {
        let m = build_model(&[w("V3:[6p/6p/6p]")], ModelOptions::default());
        let c = &m.constraints[0];
        assert_eq!(c.coeffs, vec![(ALPHA, -1)]);
        assert_eq!(c.rhs, Rational::from_int(-5));
    }

    #[test]
    fn face5_row_signs() {
        let m = build_model(&[w("F5:[v3/4/6p/6p/6p/6p/6p/6p/6p/4]")], ModelOptions::default());
        let c = &m.constraints[0];
        let key = RuleKey::a(SlotValue::F5, SlotValue::F4, SlotValue::F4);
        assert_eq!(c.coeffs, vec![(ALPHA, -1), (m.var_index(&key).unwrap(), -1)]);
        assert_eq!(c.rhs, Rational::from_int(-5));
    }

    #[test]
    fn missing_variable() {
        let m = build_model(&[], ModelOptions::default());
        let cert = Certificate {
            alpha: Rational::from_int(4),
            omega: BTreeMap::new(),
        };
        assert!(matches!(verify(&m, &cert), Err(LpError::MissingVariable(_))));
    }

    #[test]
    fn text_round_trips() {
        let words: Vec<ConfigWord> = crate::words::enumerate_words(WordKind::Face3).take(50).collect();
        let m = build_model(&words, ModelOptions { nonneg_omega: true });
        let again = LpModel::parse(&m.to_text()).unwrap();
        assert_eq!(again, m);
        let cert = Certificate {
            alpha: Rational::new(7, 2),
            omega: m.keys().iter().map(|k| (*k, Rational::new(-1, 6))).collect(),
        };
        let text = cert.to_text();
        assert_eq!(Certificate::parse(&text).unwrap().to_text(), text);
    }
}
