//! Discharging-rule templates and their instances on configuration words.
//!
//! Three templates move charge from a 5-face or 6⁺-face `d`:
//! `A` to an incident 3-vertex, `B` to a vertex-adjacent 3-face and `C` to an
//! edge-adjacent 3-face. Keys are stored under their mirror identity.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::rational::Rational;
use crate::words::{ConfigWord, SlotValue, WordKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RuleKey {
    A { d: SlotValue, l: SlotValue, r: SlotValue },
    B { d: SlotValue, l: SlotValue, r: SlotValue },
    C {
        d: SlotValue,
        l: SlotValue,
        lp: SlotValue,
        rp: SlotValue,
        r: SlotValue,
    },
}

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum RuleError {
    #[error("rule key {0} is not sourced from a 6+-face")]
    NotSixPlus(RuleKey),
    #[error("malformed rule key `{0}`")]
    Parse(String),
    #[error("malformed edge context: {0}")]
    MalformedContext(String),
}

fn sort2(a: SlotValue, b: SlotValue) -> (SlotValue, SlotValue) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

impl RuleKey {
    pub fn a(d: SlotValue, l: SlotValue, r: SlotValue) -> RuleKey {
        let (l, r) = sort2(l, r);
        RuleKey::A { d, l, r }
    }

    pub fn b(d: SlotValue, l: SlotValue, r: SlotValue) -> RuleKey {
        let (l, r) = sort2(l, r);
        RuleKey::B { d, l, r }
    }

    pub fn c(d: SlotValue, l: SlotValue, lp: SlotValue, rp: SlotValue, r: SlotValue) -> RuleKey {
        if (l, lp, rp, r) <= (r, rp, lp, l) {
            RuleKey::C { d, l, lp, rp, r }
        } else {
            RuleKey::C {
                d,
                l: r,
                lp: rp,
                rp: lp,
                r: l,
            }
        }
    }

    pub fn source(&self) -> SlotValue {
        match *self {
            RuleKey::A { d, .. } | RuleKey::B { d, .. } | RuleKey::C { d, .. } => d,
        }
    }

    /// Every canonical key sourced from `d`, in sorted order.
    pub fn all_for(d: SlotValue) -> Vec<RuleKey> {
        let f = SlotValue::FACES;
        let mut out = Vec::new();
        for &l in &f {
            for &r in &f {
                if l <= r {
                    out.push(RuleKey::a(d, l, r));
                    out.push(RuleKey::b(d, l, r));
                }
                for &lp in &f {
                    for &rp in &f {
                        out.push(RuleKey::c(d, l, lp, rp, r));
                    }
                }
            }
        }
        out.sort();
        out.dedup();
        out
    }
}

impl fmt::Display for RuleKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            RuleKey::A { d, l, r } => write!(f, "A({d};{l},{r})"),
            RuleKey::B { d, l, r } => write!(f, "B({d};{l},{r})"),
            RuleKey::C { d, l, lp, rp, r } => write!(f, "C({d};{l},{lp}|{rp},{r})"),
        }
    }
}

impl FromStr for RuleKey {
    type Err = RuleError;

    fn from_str(s: &str) -> Result<Self, RuleError> {
        let bad = || RuleError::Parse(s.to_string());
        let s = s.trim();
        let (t, rest) = s.split_at_checked(1).ok_or_else(bad)?;
        let body = rest
            .strip_prefix('(')
            .and_then(|r| r.strip_suffix(')'))
            .ok_or_else(bad)?;
        let (d, params) = body.split_once(';').ok_or_else(bad)?;
        let v = |x: &str| x.parse::<SlotValue>().ok().filter(|v| v.is_face()).ok_or_else(bad);
        let d = v(d)?;
        if d != SlotValue::F5 && d != SlotValue::F6P {
            return Err(bad());
        }
        match t {
            "A" | "B" => {
                let (l, r) = params.split_once(',').ok_or_else(bad)?;
                let (l, r) = (v(l)?, v(r)?);
                Ok(if t == "A" { RuleKey::a(d, l, r) } else { RuleKey::b(d, l, r) })
            }
            "C" => {
                let (left, right) = params.split_once('|').ok_or_else(bad)?;
                let (l, lp) = left.split_once(',').ok_or_else(bad)?;
                let (rp, r) = right.split_once(',').ok_or_else(bad)?;
                Ok(RuleKey::c(d, v(l)?, v(lp)?, v(rp)?, v(r)?))
            }
            _ => Err(bad()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Direction {
    Outgoing,
    Incoming,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RuleInstance {
    pub key: RuleKey,
    pub direction: Direction,
    pub multiplicity: u32,
}

impl RuleInstance {
    pub fn source(&self) -> SlotValue {
        self.key.source()
    }
}

fn gives(v: SlotValue) -> bool {
    v == SlotValue::F5 || v == SlotValue::F6P
}

/// Rule instances touching the centre of `word`, aggregated by key.
pub fn applicable_rules(word: &ConfigWord) -> Vec<RuleInstance> {
    let direction = match word.kind() {
        WordKind::Face5 => Direction::Outgoing,
        _ => Direction::Incoming,
    };
    let mut acc: BTreeMap<RuleKey, u32> = BTreeMap::new();
    for (_, key) in positional_rules(word.kind(), word.slots()) {
        *acc.entry(key).or_default() += 1;
    }
    acc.into_iter()
        .map(|(key, multiplicity)| RuleInstance {
            key,
            direction,
            multiplicity,
        })
        .collect()
}

/// Rule keys of a raw (not necessarily canonical) word, tagged with the slot
/// they are anchored at.
pub fn positional_rules(kind: WordKind, slots: &[SlotValue]) -> Vec<(usize, RuleKey)> {
    let n = slots.len() as isize;
    let s = |i: isize| slots[i.rem_euclid(n) as usize];
    let mut out = Vec::new();
    match kind {
        WordKind::Vertex3 => {
            for i in 0..3 {
                if gives(s(i)) {
                    out.push((i as usize, RuleKey::a(s(i), s(i + 1), s(i + 2))));
                }
            }
        }
        WordKind::Face5 => {
            let d = SlotValue::F5;
            for i in 0..n {
                let key = if i % 2 == 0 {
                    match s(i) {
                        SlotValue::V3 => Some(RuleKey::a(d, s(i - 1), s(i + 1))),
                        SlotValue::F3 => Some(RuleKey::b(d, s(i - 1), s(i + 1))),
                        _ => None,
                    }
                } else if s(i) == SlotValue::F3 && s(i - 1).is_face() && s(i + 1).is_face() {
                    Some(RuleKey::c(d, s(i - 2), s(i - 1), s(i + 1), s(i + 2)))
                } else {
                    None
                };
                out.extend(key.map(|k| (i as usize, k)));
            }
        }
        WordKind::Face3 => {
            for i in 0..n {
                if !gives(s(i)) {
                    continue;
                }
                if i % 2 == 0 {
                    out.push((i as usize, RuleKey::b(s(i), s(i - 1), s(i + 1))));
                } else if s(i - 1).is_face() && s(i + 1).is_face() {
                    // Seen from the triangle, the giver's corner and edge slots
                    // swap: its corner at a shared vertex is our edge slot.
                    out.push((i as usize, RuleKey::c(s(i), s(i - 1), s(i - 2), s(i + 2), s(i + 1))));
                }
            }
        }
    }
    out
}

fn third() -> Rational {
    Rational::new(1, 3)
}

fn two_thirds() -> Rational {
    Rational::new(2, 3)
}

/// Whether the T2 or T3 condition holds at one common vertex of a 6⁺-face and
/// an edge-adjacent triangle, given the vertex-adjacent face `corner` and the
/// face `edge` across the 6⁺-face's other edge at that vertex.
pub fn boosted_at(corner: SlotValue, edge: SlotValue) -> bool {
    corner == SlotValue::F3 || (corner == SlotValue::F4 && edge == SlotValue::F4)
}

/// Fixed charge of a rule sourced from a 6⁺-face.
pub fn t_fixed_value(key: &RuleKey) -> Result<Rational, RuleError> {
    if key.source() != SlotValue::F6P {
        return Err(RuleError::NotSixPlus(*key));
    }
    Ok(match *key {
        RuleKey::A { .. } => two_thirds(),
        RuleKey::C { l, lp, rp, r, .. } => {
            if boosted_at(lp, l) || boosted_at(rp, r) {
                two_thirds()
            } else {
                third()
            }
        }
        RuleKey::B { l, r, .. } => {
            if l == SlotValue::F4 || r == SlotValue::F4 {
                third()
            } else {
                Rational::zero()
            }
        }
    })
}
