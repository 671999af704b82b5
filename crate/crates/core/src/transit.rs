//! Per-edge accounting for 6⁺-faces.
//!
//! Every fixed 6⁺-face rule is restated so that its charge first lands on
//! boundary edges of the giving face `f`. The charge through one edge `uv`
//! then only depends on the 4⁻-faces around `u` and `v`.

use std::fmt;
use std::str::FromStr;

use crate::rational::Rational;
use crate::rules::{boosted_at, t_fixed_value, RuleError, RuleKey};
use crate::words::SlotValue;

/// Local picture around a boundary edge `uv` of a 6⁺-face `f`.
///
/// `fan_u` lists the faces at `u` strictly between `f'` (the face across
/// `uv`) and `f`, in rotation order starting next to `f'`. For a 4-vertex it
/// is `[g, h]` with `g` opposite `f` and `h` across the other edge of `f` at
/// `u`; for a 3-vertex it is `[h]`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LocalEdgeContext {
    pub du: u8,
    pub dv: u8,
    pub fprime: SlotValue,
    pub fan_u: Vec<SlotValue>,
    pub fan_v: Vec<SlotValue>,
}

/// Edge shares of a triangle rule (T2-T4): the common edge, then the edges of
/// `f` at the two common vertices.
pub fn triangle_shares(boost_left: bool, boost_right: bool) -> [Rational; 3] {
    let side = |me: bool, other: bool| match (me, other) {
        (true, true) => Rational::new(1, 6),
        (true, false) => Rational::new(1, 3),
        _ => Rational::zero(),
    };
    [
        Rational::new(1, 3),
        side(boost_left, boost_right),
        side(boost_right, boost_left),
    ]
}

/// Edge shares of T5: both edges of `f` at the common vertex when split,
/// otherwise everything on the edge shared with the 4-face.
pub fn t5_shares(split: bool) -> [Rational; 2] {
    if split {
        [Rational::new(1, 6), Rational::new(1, 6)]
    } else {
        [Rational::new(1, 3), Rational::zero()]
    }
}

pub fn t1_shares() -> [Rational; 2] {
    [Rational::new(1, 3), Rational::new(1, 3)]
}

/// Every way a fixed 6⁺ rule key distributes its charge over edges.
pub fn share_options(key: &RuleKey) -> Result<Vec<Vec<Rational>>, RuleError> {
    if key.source() != SlotValue::F6P {
        return Err(RuleError::NotSixPlus(*key));
    }
    Ok(match *key {
        RuleKey::A { .. } => vec![t1_shares().to_vec()],
        RuleKey::C { l, lp, rp, r, .. } => {
            vec![triangle_shares(boosted_at(lp, l), boosted_at(rp, r)).to_vec()]
        }
        RuleKey::B { l, r, .. } => {
            if l == SlotValue::F4 || r == SlotValue::F4 {
                vec![t5_shares(true).to_vec(), t5_shares(false).to_vec()]
            } else {
                vec![vec![]]
            }
        }
    })
}

impl LocalEdgeContext {
    pub fn new(
        du: u8,
        dv: u8,
        fprime: SlotValue,
        fan_u: Vec<SlotValue>,
        fan_v: Vec<SlotValue>,
    ) -> Result<Self, RuleError> {
        let c = LocalEdgeContext {
            du,
            dv,
            fprime,
            fan_u,
            fan_v,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<(), RuleError> {
        let bad = |m: &str| Err(RuleError::MalformedContext(m.to_string()));
        for (d, fan) in [(self.du, &self.fan_u), (self.dv, &self.fan_v)] {
            if d != 3 && d != 4 {
                return bad("endpoint degree must be 3 or 4");
            }
            if fan.len() != d as usize - 2 {
                return bad("fan length must be degree minus 2");
            }
            if fan.iter().any(|v| !v.is_face()) {
                return bad("fan entries must be faces");
            }
        }
        if !self.fprime.is_face() {
            return bad("f' must be a face");
        }
        Ok(())
    }

    pub fn swapped(&self) -> LocalEdgeContext {
        LocalEdgeContext {
            du: self.dv,
            dv: self.du,
            fprime: self.fprime,
            fan_u: self.fan_v.clone(),
            fan_v: self.fan_u.clone(),
        }
    }

    /// Face opposite `f` at the endpoint, for 4-vertices.
    pub fn opposite(&self, at_u: bool) -> Option<SlotValue> {
        let (d, fan) = self.side(at_u);
        (d == 4).then(|| fan[0])
    }

    /// Face across the other edge of `f` at the endpoint.
    pub fn across(&self, at_u: bool) -> SlotValue {
        *self.side(at_u).1.last().expect("validated fan")
    }

    fn side(&self, at_u: bool) -> (u8, &Vec<SlotValue>) {
        if at_u {
            (self.du, &self.fan_u)
        } else {
            (self.dv, &self.fan_v)
        }
    }
}

impl fmt::Display for LocalEdgeContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let fan = |v: &Vec<SlotValue>| {
            v.iter().map(|x| x.as_str()).collect::<Vec<_>>().join(",")
        };
        write!(
            f,
            "E({},{};{};{};{})",
            self.du,
            self.dv,
            self.fprime,
            fan(&self.fan_u),
            fan(&self.fan_v)
        )
    }
}

impl FromStr for LocalEdgeContext {
    type Err = RuleError;

    fn from_str(s: &str) -> Result<Self, RuleError> {
        let bad = || RuleError::Parse(s.to_string());
        let body = s
            .trim()
            .strip_prefix("E(")
            .and_then(|r| r.strip_suffix(')'))
            .ok_or_else(bad)?;
        let parts: Vec<&str> = body.split(';').collect();
        if parts.len() != 4 {
            return Err(bad());
        }
        let (du, dv) = parts[0].split_once(',').ok_or_else(bad)?;
        let slot = |x: &str| x.trim().parse::<SlotValue>().map_err(|_| bad());
        let fan = |x: &str| x.split(',').map(slot).collect::<Result<Vec<_>, _>>();
        LocalEdgeContext::new(
            du.trim().parse().map_err(|_| bad())?,
            dv.trim().parse().map_err(|_| bad())?,
            slot(parts[1])?,
            fan(parts[2])?,
            fan(parts[3])?,
        )
    }
}

/// One way the charge through `uv` can come about. `far_triangle_*` marks a
/// T5 split at that endpoint, which needs a second 3-face on the far side of
/// the 4-face across the endpoint's other edge of `f`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransitScenario {
    pub transit: Rational,
    pub far_triangle_u: bool,
    pub far_triangle_v: bool,
}

/// Worst-case charge routed through `uv` by the restated rules. Facts beyond
/// the two endpoints (the far end of a neighbouring triangle, a second
/// triangle on a 4-face not containing `uv`) are taken adversarially.
pub fn edge_transit(ctx: &LocalEdgeContext) -> Result<Rational, RuleError> {
    Ok(transit_scenarios(ctx)?
        .into_iter()
        .map(|s| s.transit)
        .max()
        .expect("at least one scenario"))
}

/// Every combination of the per-endpoint options.
pub fn transit_scenarios(ctx: &LocalEdgeContext) -> Result<Vec<TransitScenario>, RuleError> {
    ctx.validate()?;
    let mut base = Rational::zero();
    if ctx.fprime == SlotValue::F3 && ctx.du == 4 && ctx.dv == 4 {
        base += &triangle_shares(false, false)[0];
    }
    let mut out = Vec::new();
    for (tu, fu) in endpoint_options(ctx, true) {
        for (tv, fv) in endpoint_options(ctx, false) {
            out.push(TransitScenario {
                transit: &base + &(&tu + &tv),
                far_triangle_u: fu,
                far_triangle_v: fv,
            });
        }
    }
    Ok(out)
}

fn endpoint_options(ctx: &LocalEdgeContext, at_u: bool) -> Vec<(Rational, bool)> {
    let (d, _) = ctx.side(at_u);
    if d == 3 {
        return vec![(t1_shares()[0].clone(), false)];
    }
    let g = ctx.opposite(at_u).expect("4-vertex");
    let h = ctx.across(at_u);
    let mut sum = Rational::zero();
    if h == SlotValue::F3 && boosted_at(g, ctx.fprime) {
        // Triangle across the other edge at this endpoint; its far corner is
        // unknown and taken unboosted, which puts the whole split here.
        sum += &triangle_shares(true, false)[1];
    }
    if g != SlotValue::F3 {
        return vec![(sum, false)];
    }
    let mut out = vec![(sum.clone(), false)];
    if ctx.fprime == SlotValue::F4 {
        let split = ctx.opposite(!at_u) == Some(SlotValue::F3);
        out.push((&sum + &t5_shares(split)[0], false));
    }
    if h == SlotValue::F4 {
        out.push((&sum + &t5_shares(true)[1], true));
    }
    out
}

/// Representatives of the "big" face class and the 4⁻ classes; the transit
/// only distinguishes 3-faces and 4-faces.
const CLASSES: [SlotValue; 3] = [SlotValue::F3, SlotValue::F4, SlotValue::F6P];

fn fans(d: u8) -> Vec<Vec<SlotValue>> {
    let mut out = vec![vec![]];
    for _ in 0..d - 2 {
        out = out
            .into_iter()
            .flat_map(|p| {
                CLASSES.iter().map(move |&c| {
                    let mut q = p.clone();
                    q.push(c);
                    q
                })
            })
            .collect();
    }
    out
}

/// All contexts routing more than 1/3 through their edge, one per uv-swap orbit.
pub fn enumerate_overloaded_edges() -> Vec<LocalEdgeContext> {
    let limit = Rational::new(1, 3);
    let mut out = Vec::new();
    for du in [3u8, 4] {
        for dv in [3u8, 4] {
            for fprime in CLASSES {
                for fu in fans(du) {
                    for fv in fans(dv) {
                        let ctx = LocalEdgeContext {
                            du,
                            dv,
                            fprime,
                            fan_u: fu.clone(),
                            fan_v: fv,
                        };
                        if ctx > ctx.swapped() {
                            continue;
                        }
                        if edge_transit(&ctx).expect("well-formed") > limit {
                            out.push(ctx);
                        }
                    }
                }
            }
        }
    }
    out.sort();
    out
}

/// Checks that every share option of every fixed key sums to its value.
pub fn check_conservation() -> Result<(), String> {
    for key in RuleKey::all_for(SlotValue::F6P) {
        let value = t_fixed_value(&key).map_err(|e| e.to_string())?;
        for opt in share_options(&key).map_err(|e| e.to_string())? {
            let s: Rational = opt.iter().sum();
            if s != value {
                return Err(format!("{key}: shares sum to {s}, value {value}"));
            }
        }
    }
    Ok(())
}
