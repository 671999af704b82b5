//! Maximizing α by column generation on the dual.
//!
//! The primal `max α s.t. Ax ≥ b` (free variables) has the dual
//! `min −bᵀy s.t. Aᵀy = −e_α, y ≥ 0`, with one column per distinct row of `A`.
//! Only a working set of columns is kept in the tableau; rows violated by
//! the current primal point are priced in until none remain.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::sync::atomic::{AtomicBool, AtomicU64};

use crate::rational::Rational;

use super::model::{verify, Certificate, LpModel, ALPHA};
use super::simplex::{Basic, Column, Control, Scalar, SimplexError, Tableau};
use super::LpError;

/// Constraints sharing coefficients and right-hand side.
#[derive(Debug, Clone)]
pub struct RowGroup {
    pub coeffs: Vec<(usize, i64)>,
    pub rhs: Rational,
    pub members: Vec<usize>,
}

pub fn group_rows(model: &LpModel) -> Vec<RowGroup> {
    let mut by_row: BTreeMap<(Vec<(usize, i64)>, Rational), usize> = BTreeMap::new();
    let mut groups: Vec<RowGroup> = Vec::new();
    for (i, c) in model.constraints.iter().enumerate() {
        let key = (c.coeffs.clone(), c.rhs.clone());
        match by_row.get(&key) {
            Some(&g) => groups[g].members.push(i),
            None => {
                by_row.insert(key, groups.len());
                groups.push(RowGroup {
                    coeffs: c.coeffs.clone(),
                    rhs: c.rhs.clone(),
                    members: vec![i],
                });
            }
        }
    }
    groups
}

#[derive(Debug, Clone, Default)]
pub struct SolveOptions {
    /// Report only tight rows carrying a strictly positive dual multiplier.
    pub positive_duals_only: bool,
    /// Skip the floating-point warm start and pivot exactly from scratch.
    pub cold_exact: bool,
}

#[derive(Default)]
pub struct SolveControl {
    pub cancel: AtomicBool,
    pub pivots: AtomicU64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Solution {
    pub alpha: Rational,
    pub cert: Certificate,
    pub tight: Vec<String>,
    /// Number of exact pivots performed (zero when the float basis was optimal).
    pub exact_pivots: u64,
}

/// Floating-point result, with the information needed to warm-start.
#[derive(Debug, Clone)]
pub struct FastCandidate {
    pub cert: Certificate,
    pub alpha: f64,
    working: Vec<usize>,
    basis: Vec<Basic>,
}

const BATCH: usize = 256;

fn rhs_vector(n: usize) -> Vec<i64> {
    let mut b = vec![0i64; n];
    b[ALPHA] = -1;
    b
}

fn column(g: &RowGroup) -> Column {
    Column {
        entries: g.coeffs.clone(),
        cost: -g.rhs.clone(),
    }
}

fn map_err(e: SimplexError) -> LpError {
    match e {
        SimplexError::Cancelled => LpError::Cancelled,
        SimplexError::Infeasible => LpError::Unbounded,
        SimplexError::Unbounded => LpError::Internal("dual unbounded".into()),
        SimplexError::Singular => LpError::Internal("singular basis".into()),
    }
}

fn primal<S: Scalar>(t: &Tableau<S>) -> Vec<S> {
    t.duals(true).into_iter().map(|p| S::zero().sub(&p)).collect()
}

fn slack<S: Scalar>(g: &RowGroup, x: &[S], rhs: &S) -> S {
    g.coeffs
        .iter()
        .fold(S::zero(), |acc, &(v, k)| acc.add(&x[v].mul_int(k)))
        .sub(rhs)
}

/// Runs the simplex, pricing in violated groups until the primal point
/// satisfies every group.
fn generate<S: Scalar>(
    groups: &[RowGroup],
    t: &mut Tableau<S>,
    working: &mut Vec<usize>,
    ctl: &Control,
) -> Result<(), LpError> {
    let rhs: Vec<S> = groups.iter().map(|g| S::from_rational(&g.rhs)).collect();
    let mut in_w = vec![false; groups.len()];
    for &g in working.iter() {
        in_w[g] = true;
    }
    loop {
        t.solve(ctl).map_err(map_err)?;
        let x = primal(t);
        let mut violated: Vec<(S, usize)> = groups
            .iter()
            .enumerate()
            .filter(|(g, _)| !in_w[*g])
            .filter_map(|(g, grp)| {
                let s = slack(grp, &x, &rhs[g]);
                (s.sign() == Ordering::Less).then_some((s, g))
            })
            .collect();
        if violated.is_empty() {
            return Ok(());
        }
        violated.sort_by(|a, b| a.0.cmp_tol(&b.0).then(a.1.cmp(&b.1)));
        violated.truncate(BATCH);
        let mut add: Vec<usize> = violated.into_iter().map(|(_, g)| g).collect();
        add.sort();
        for g in add {
            in_w[g] = true;
            working.push(g);
            t.cols.push(column(&groups[g]));
        }
    }
}

fn initial_working(groups: &[RowGroup]) -> Vec<usize> {
    // Rows bounding α alone keep every restricted problem bounded.
    let mut w: Vec<usize> = groups
        .iter()
        .enumerate()
        .filter(|(_, g)| g.coeffs == [(ALPHA, -1)])
        .map(|(i, _)| i)
        .collect();
    if w.is_empty() {
        w = (0..groups.len()).collect();
    }
    w
}

fn control<'a>(c: Option<&'a SolveControl>) -> Control<'a> {
    match c {
        Some(c) => Control {
            cancel: Some(&c.cancel),
            pivots: Some(&c.pivots),
        },
        None => Control::default(),
    }
}

fn float_solve(
    model: &LpModel,
    groups: &[RowGroup],
    ctl: Option<&SolveControl>,
) -> Result<FastCandidate, LpError> {
    let mut working = initial_working(groups);
    let cols = working.iter().map(|&g| column(&groups[g])).collect();
    let mut t: Tableau<f64> = Tableau::new(&rhs_vector(model.num_vars()), cols);
    generate(groups, &mut t, &mut working, &control(ctl))?;
    let x = primal(&t);
    let snapped: Vec<Rational> = x.iter().map(|&v| Rational::snap(v, 64)).collect();
    Ok(FastCandidate {
        cert: Certificate::from_values(model, &snapped),
        alpha: x[ALPHA],
        working,
        basis: t.basis.clone(),
    })
}

/// Floating-point solve; the returned certificate is snapped to denominators
/// at most 64 and is not yet verified.
pub fn solve_fast(model: &LpModel, ctl: Option<&SolveControl>) -> Result<FastCandidate, LpError> {
    float_solve(model, &group_rows(model), ctl)
}

fn exact_from(
    model: &LpModel,
    groups: &[RowGroup],
    warm: Option<&FastCandidate>,
    opts: &SolveOptions,
    ctl: Option<&SolveControl>,
) -> Result<Solution, LpError> {
    let b = rhs_vector(model.num_vars());
    let mut working = match warm {
        Some(f) => f.working.clone(),
        None => initial_working(groups),
    };
    let cols: Vec<Column> = working.iter().map(|&g| column(&groups[g])).collect();
    let mut t: Tableau<Rational> = match warm {
        Some(f) => match Tableau::with_basis(&b, cols.clone(), f.basis.clone()) {
            Ok(t) if t.is_primal_feasible() => t,
            _ => Tableau::new(&b, cols),
        },
        None => Tableau::new(&b, cols),
    };
    let before = t.pivots;
    generate(groups, &mut t, &mut working, &control(ctl))?;
    let x = primal(&t);
    let cert = Certificate::from_values(model, &x);
    let positive: Vec<usize> = t
        .values()
        .into_iter()
        .filter_map(|(v, y)| match v {
            Basic::Col(j) if y.is_positive() => Some(working[j]),
            _ => None,
        })
        .collect();
    let tight = tight_groups(model, groups, &x, opts.positive_duals_only.then_some(&positive[..]));
    Ok(Solution {
        alpha: x[ALPHA].clone(),
        cert,
        tight,
        exact_pivots: t.pivots - before,
    })
}

fn tight_groups(
    model: &LpModel,
    groups: &[RowGroup],
    x: &[Rational],
    only: Option<&[usize]>,
) -> Vec<String> {
    let selected: Vec<usize> = match only {
        Some(list) => list.to_vec(),
        None => (0..groups.len()).collect(),
    };
    let mut out: Vec<String> = selected
        .into_iter()
        .filter(|&g| slack(&groups[g], x, &groups[g].rhs).is_zero())
        .flat_map(|g| groups[g].members.iter().map(|&i| model.constraints[i].provenance.to_string()))
        .collect();
    out.sort();
    out.dedup();
    out
}

/// Exact optimum. Unless `cold_exact` is set, the exact simplex starts from
/// the basis found by the floating-point pass.
pub fn solve_exact(
    model: &LpModel,
    opts: &SolveOptions,
    ctl: Option<&SolveControl>,
) -> Result<Solution, LpError> {
    let groups = group_rows(model);
    if opts.cold_exact {
        return exact_from(model, &groups, None, opts, ctl);
    }
    let fast = float_solve(model, &groups, ctl)?;
    exact_from(model, &groups, Some(&fast), opts, ctl)
}

/// The solving pipeline: float solve, snap, exact verify; accepted directly
/// when the snapped certificate reaches the upper bound 4, otherwise repaired
/// by the exact simplex from the float basis.
pub fn solve(model: &LpModel, opts: &SolveOptions, ctl: Option<&SolveControl>) -> Result<Solution, LpError> {
    let groups = group_rows(model);
    if opts.cold_exact {
        return exact_from(model, &groups, None, opts, ctl);
    }
    let fast = float_solve(model, &groups, ctl)?;
    let four = Rational::from_int(4);
    if !opts.positive_duals_only && fast.cert.alpha == four && verify(model, &fast.cert)? {
        let x = fast.cert.values(model)?;
        return Ok(Solution {
            alpha: four,
            tight: tight_groups(model, &groups, &x, None),
            cert: fast.cert,
            exact_pivots: 0,
        });
    }
    exact_from(model, &groups, Some(&fast), opts, ctl)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::model::{build_model, LinearConstraint, ModelOptions, Provenance};
    use crate::words::{enumerate_words, ConfigWord, WordKind};

    #[test]
    fn empty_model_gives_four() {
        let m = build_model(&[], ModelOptions::default());
        for opts in [SolveOptions::default(), SolveOptions { cold_exact: true, ..Default::default() }] {
            let s = solve_exact(&m, &opts, None).unwrap();
            assert_eq!(s.alpha, Rational::from_int(4));
            assert!(verify(&m, &s.cert).unwrap());
            assert_eq!(s.tight, vec!["face4".to_string(), "vertex4".to_string()]);
        }
        let fast = solve_fast(&m, None).unwrap();
        assert_eq!(fast.cert.alpha, Rational::from_int(4));
    }

    #[test]
    fn all_triangle_vertex_is_tight() {
        let w: ConfigWord = "V3:[3/3/3]".parse().unwrap();
        let m = build_model(&[w], ModelOptions::default());
        let s = solve_exact(&m, &SolveOptions::default(), None).unwrap();
        assert_eq!(s.alpha, Rational::from_int(3));
        assert_eq!(s.tight, vec!["V3:[3/3/3]".to_string()]);
    }

    #[test]
    fn snap_recovers_thirds() {
        // max α s.t. α ≤ 3 + 3ω, α ≤ 5 − 3ω: optimum ω = 1/3, α = 4.
        let mut m = LpModel::empty();
        let key = m.keys()[0];
        let v = m.var_index(&key).unwrap();
        m.constraints.push(LinearConstraint {
            coeffs: vec![(ALPHA, -1), (v, 3)],
            rhs: Rational::from_int(-3),
            provenance: Provenance::Face4,
        });
        m.constraints.push(LinearConstraint {
            coeffs: vec![(ALPHA, -1), (v, -3)],
            rhs: Rational::from_int(-5),
            provenance: Provenance::Vertex4,
        });
        let fast = solve_fast(&m, None).unwrap();
        assert_eq!(fast.cert.omega[&key], Rational::new(1, 3));
        assert!(verify(&m, &fast.cert).unwrap());
        let s = solve(&m, &SolveOptions::default(), None).unwrap();
        assert_eq!(s.alpha, Rational::from_int(4));
    }

    #[test]
    fn pipelines_agree_on_vertex_and_triangle_words() {
        let mut words: Vec<ConfigWord> = enumerate_words(WordKind::Vertex3).collect();
        words.extend(enumerate_words(WordKind::Face3).filter(|w| w.slots().iter().all(|s| s.is_face())));
        let m = build_model(&words, ModelOptions::default());
        let cold = solve_exact(&m, &SolveOptions { cold_exact: true, ..Default::default() }, None).unwrap();
        let warm = solve_exact(&m, &SolveOptions::default(), None).unwrap();
        let piped = solve(&m, &SolveOptions::default(), None).unwrap();
        assert_eq!(cold.alpha, warm.alpha);
        assert_eq!(warm.alpha, piped.alpha);
        assert!(verify(&m, &cold.cert).unwrap());
        assert!(verify(&m, &warm.cert).unwrap());
        assert_eq!(warm, solve_exact(&m, &SolveOptions::default(), None).unwrap());
    }

    #[test]
    fn positive_duals_subset() {
        let words: Vec<ConfigWord> = enumerate_words(WordKind::Vertex3).collect();
        let m = build_model(&words, ModelOptions::default());
        let all = solve_exact(&m, &SolveOptions::default(), None).unwrap();
        let pos = solve_exact(
            &m,
            &SolveOptions {
                positive_duals_only: true,
                ..Default::default()
            },
            None,
        )
        .unwrap();
        assert!(!pos.tight.is_empty());
        assert!(pos.tight.iter().all(|t| all.tight.contains(t)));
    }
}
