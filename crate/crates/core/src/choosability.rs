//! List-size graphs and the inclusion-matrix heuristic for ℓ-choosability.
//!
//! Vertices are visited in insertion order everywhere, which keeps every
//! run deterministic.

use std::collections::HashMap;
use std::fmt;

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum ChoosabilityError {
    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),
    #[error("duplicate vertex `{0}`")]
    DuplicateVertex(String),
    #[error("loop at vertex `{0}`")]
    Loop(String),
    #[error("instance too large for exhaustive search: {0}")]
    TooLarge(String),
    #[error("pair ({0}, {1}) is adjacent in H")]
    PairAdjacent(String, String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub const MAX_VERTICES: usize = 64;

/// A simple graph H with guaranteed list sizes ℓ.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ListSizeGraph {
    names: Vec<String>,
    adj: Vec<u64>,
    ell: Vec<i64>,
}

impl ListSizeGraph {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a graph on vertices `0..ell.len()` named by their index.
    pub fn from_edges(ell: &[i64], edges: &[(usize, usize)]) -> Self {
        let mut g = Self::new();
        for (i, &l) in ell.iter().enumerate() {
            g.add_vertex(&i.to_string(), l).expect("fresh names");
        }
        for &(a, b) in edges {
            g.add_edge_idx(a, b).expect("valid edge");
        }
        g
    }

    pub fn add_vertex(&mut self, name: &str, ell: i64) -> Result<usize, ChoosabilityError> {
        if self.index_of(name).is_some() {
            return Err(ChoosabilityError::DuplicateVertex(name.to_string()));
        }
        if self.names.len() == MAX_VERTICES {
            return Err(ChoosabilityError::TooLarge(format!("more than {MAX_VERTICES} vertices")));
        }
        self.names.push(name.to_string());
        self.adj.push(0);
        self.ell.push(ell);
        Ok(self.names.len() - 1)
    }

    pub fn add_edge(&mut self, a: &str, b: &str) -> Result<(), ChoosabilityError> {
        let i = self.require(a)?;
        let j = self.require(b)?;
        self.add_edge_idx(i, j)
    }

    pub fn add_edge_idx(&mut self, i: usize, j: usize) -> Result<(), ChoosabilityError> {
        if i == j {
            return Err(ChoosabilityError::Loop(self.names[i].clone()));
        }
        self.adj[i] |= 1 << j;
        self.adj[j] |= 1 << i;
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn require(&self, name: &str) -> Result<usize, ChoosabilityError> {
        self.index_of(name)
            .ok_or_else(|| ChoosabilityError::UnknownVertex(name.to_string()))
    }

    pub fn ell(&self, i: usize) -> i64 {
        self.ell[i]
    }

    pub fn ells(&self) -> &[i64] {
        &self.ell
    }

    pub fn set_ell(&mut self, i: usize, ell: i64) {
        self.ell[i] = ell;
    }

    pub fn adjacent(&self, i: usize, j: usize) -> bool {
        self.adj[i] >> j & 1 == 1
    }

    pub fn neighbor_mask(&self, i: usize) -> u64 {
        self.adj[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adj[i].count_ones() as usize
    }

    pub fn full_mask(&self) -> u64 {
        if self.len() == 64 {
            u64::MAX
        } else {
            (1u64 << self.len()) - 1
        }
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.len() {
            for j in i + 1..self.len() {
                if self.adjacent(i, j) {
                    out.push((i, j));
                }
            }
        }
        out
    }

    /// Text form: `v <id> <ell>` and `e <id> <id>` lines.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for i in 0..self.len() {
            s.push_str(&format!("v {} {}\n", self.names[i], self.ell[i]));
        }
        for (i, j) in self.edges() {
            s.push_str(&format!("e {} {}\n", self.names[i], self.names[j]));
        }
        s
    }

    pub fn parse(text: &str) -> Result<Self, ChoosabilityError> {
        let mut g = Self::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: &str| ChoosabilityError::Parse { line: n + 1, msg: msg.to_string() };
            let toks: Vec<&str> = line.split_whitespace().collect();
            match toks.as_slice() {
                ["v", id, ell] => {
                    let ell = ell.parse().map_err(|_| err("bad list size"))?;
                    g.add_vertex(id, ell)?;
                }
                ["e", a, b] => g.add_edge(a, b)?,
                _ => return Err(err("expected `v <id> <ell>` or `e <id> <id>`")),
            }
        }
        Ok(g)
    }
}

impl fmt::Display for ListSizeGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// Row `u` holds the set of `v` with M(u, v) = 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InclusionMatrix {
    rows: Vec<u64>,
}

impl InclusionMatrix {
    pub fn identity(n: usize) -> Self {
        Self { rows: (0..n).map(|i| 1u64 << i).collect() }
    }

    pub fn get(&self, u: usize, v: usize) -> bool {
        self.rows[u] >> v & 1 == 1
    }

    pub fn row(&self, u: usize) -> u64 {
        self.rows[u]
    }

    pub fn size(&self) -> usize {
        self.rows.len()
    }

    /// Off-diagonal true entries.
    pub fn entries(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for u in 0..self.rows.len() {
            for v in 0..self.rows.len() {
                if u != v && self.get(u, v) {
                    out.push((u, v));
                }
            }
        }
        out
    }
}

pub fn is_happy(h: &ListSizeGraph, ell: &[i64], v: usize) -> Result<bool, ChoosabilityError> {
    if v >= h.len() {
        return Err(ChoosabilityError::UnknownVertex(v.to_string()));
    }
    Ok(ell[v] > h.degree(v) as i64)
}

/// Greedy removal of happy vertices; returns the vertices left over.
pub fn happy_core(h: &ListSizeGraph, ell: &[i64]) -> u64 {
    happy_order(h, ell).1
}

/// Happy vertices in removal order (lowest index first), and the rest.
pub fn happy_order(h: &ListSizeGraph, ell: &[i64]) -> (Vec<usize>, u64) {
    let mut mask = h.full_mask();
    let mut order = Vec::new();
    'outer: loop {
        let mut m = mask;
        while m != 0 {
            let v = m.trailing_zeros() as usize;
            m &= m - 1;
            if ell[v] > (h.neighbor_mask(v) & mask).count_ones() as i64 {
                mask &= !(1 << v);
                order.push(v);
                continue 'outer;
            }
        }
        return (order, mask);
    }
}

pub fn is_happy_graph(h: &ListSizeGraph, ell: &[i64]) -> bool {
    happy_core(h, ell) == 0
}

/// What a run of the heuristic established.
#[derive(Debug, Clone)]
pub struct AOutcome {
    pub choosable: bool,
    /// Vertices remaining after the top-level happy-vertex elimination.
    pub core: u64,
    /// Fixed-point matrix of the core when the run failed there.
    pub matrix: Option<InclusionMatrix>,
    /// A vertex with ℓ ≤ 0 that stopped the run.
    pub blocked: Option<usize>,
    /// An entry M(u,v) = 1 with ℓ(u) < ℓ(v) that decided the run.
    pub witness: Option<(usize, usize)>,
}

/// Memoised runner of the heuristic over subsets of one graph.
pub struct Heuristic<'a> {
    adj: &'a [u64],
    memo: HashMap<(u64, Vec<i8>), bool>,
    calls: u64,
}

impl<'a> Heuristic<'a> {
    pub fn new(h: &'a ListSizeGraph) -> Self {
        Self { adj: &h.adj, memo: HashMap::new(), calls: 0 }
    }

    pub fn calls(&self) -> u64 {
        self.calls
    }

    fn deg(&self, v: usize, mask: u64) -> i64 {
        (self.adj[v] & mask).count_ones() as i64
    }

    /// Drops happy vertices; `Err(v)` if some vertex has ℓ(v) ≤ 0.
    fn strip(&self, mut mask: u64, ell: &[i64]) -> Result<u64, usize> {
        'outer: loop {
            let mut m = mask;
            while m != 0 {
                let v = m.trailing_zeros() as usize;
                m &= m - 1;
                if ell[v] <= 0 {
                    return Err(v);
                }
            }
            let mut m = mask;
            while m != 0 {
                let v = m.trailing_zeros() as usize;
                m &= m - 1;
                if ell[v] > self.deg(v, mask) {
                    mask &= !(1 << v);
                    continue 'outer;
                }
            }
            return Ok(mask);
        }
    }

    pub fn run(&mut self, mask: u64, ell: &[i64]) -> bool {
        self.calls += 1;
        let core = match self.strip(mask, ell) {
            Err(_) => return false,
            Ok(c) => c,
        };
        if core == 0 {
            return true;
        }
        let key = self.key(core, ell);
        if let Some(&r) = self.memo.get(&key) {
            return r;
        }
        let (found, _) = self.matrix(core, ell, true);
        self.memo.insert(key, found);
        found
    }

    fn key(&self, mask: u64, ell: &[i64]) -> (u64, Vec<i8>) {
        let mut vals = Vec::with_capacity(mask.count_ones() as usize);
        let mut m = mask;
        while m != 0 {
            let v = m.trailing_zeros() as usize;
            m &= m - 1;
            vals.push(ell[v].min(self.deg(v, mask) + 1) as i8);
        }
        (mask, vals)
    }

    /// Fixed point of the matrix on `mask`; with `early`, stops as soon as a
    /// decisive pair appears. Returns whether such a pair exists.
    pub fn matrix(&mut self, mask: u64, ell: &[i64], early: bool) -> (bool, Vec<u64>) {
        let n = self.adj.len();
        let mut rows: Vec<u64> = (0..n).map(|i| 1u64 << i).collect();
        let verts: Vec<usize> = (0..n).filter(|&v| mask >> v & 1 == 1).collect();
        let decisive = |rows: &[u64]| {
            verts.iter().any(|&u| {
                verts.iter().any(|&v| u != v && rows[u] >> v & 1 == 1 && ell[u] < ell[v])
            })
        };
        let mut scratch = ell.to_vec();
        loop {
            let mut changed = false;
            for &u in &verts {
                for &v in &verts {
                    if u == v || rows[u] >> v & 1 == 1 {
                        continue;
                    }
                    scratch.copy_from_slice(ell);
                    let mut nb = self.adj[v] & mask & !rows[u];
                    while nb != 0 {
                        let w = nb.trailing_zeros() as usize;
                        nb &= nb - 1;
                        scratch[w] -= 1;
                    }
                    let sub = scratch.clone();
                    if self.run(mask & !(1 << v), &sub) {
                        rows[u] |= 1 << v;
                        changed = true;
                        if early && ell[u] < ell[v] {
                            return (true, rows);
                        }
                    }
                }
            }
            if !changed {
                break;
            }
        }
        (decisive(&rows), rows)
    }
}

/// Algorithm A with its structured outcome.
pub fn algorithm_a_outcome(h: &ListSizeGraph) -> AOutcome {
    let mut heur = Heuristic::new(h);
    let ell = h.ells();
    let failed = |core, matrix, blocked| AOutcome {
        choosable: false,
        core,
        matrix,
        blocked,
        witness: None,
    };
    match heur.strip(h.full_mask(), ell) {
        Err(v) => failed(h.full_mask(), None, Some(v)),
        Ok(0) => AOutcome {
            choosable: true,
            core: 0,
            matrix: None,
            blocked: None,
            witness: None,
        },
        Ok(core) => {
            let (found, rows) = heur.matrix(core, ell, true);
            log::debug!("heuristic on {} vertices: {} calls", h.len(), heur.calls());
            if !found {
                return failed(core, Some(InclusionMatrix { rows }), None);
            }
            let witness = (0..h.len())
                .flat_map(|u| (0..h.len()).map(move |v| (u, v)))
                .find(|&(u, v)| {
                    u != v && core >> u & core >> v & 1 == 1 && rows[u] >> v & 1 == 1 && ell[u] < ell[v]
                });
            AOutcome {
                choosable: true,
                core,
                matrix: None,
                blocked: None,
                witness,
            }
        }
    }
}

pub fn algorithm_a(h: &ListSizeGraph) -> bool {
    algorithm_a_outcome(h).choosable
}

/// Fixed-point inclusion matrix of the whole of H.
pub fn compute_inclusion_matrix(h: &ListSizeGraph) -> InclusionMatrix {
    let mut heur = Heuristic::new(h);
    let (_, rows) = heur.matrix(h.full_mask(), h.ells(), false);
    InclusionMatrix { rows }
}

/// Exhaustive list assignments. A list assignment is encoded by the vertex set
/// of each colour; assignments are enumerated once per renaming class.
struct Oracle<'a> {
    h: &'a ListSizeGraph,
    n: usize,
    /// Independent subsets of every subset of V.
    indep_subsets: Vec<Vec<u64>>,
    /// By minimum element, the subsets that contain it.
    groups: Vec<Vec<u64>>,
}

const ORACLE_MAX_VERTICES: usize = 8;
const ORACLE_MAX_SUM: i64 = 40;

impl<'a> Oracle<'a> {
    fn new(h: &'a ListSizeGraph) -> Self {
        let n = h.len();
        let full = 1usize << n;
        let independent: Vec<bool> = (0..full as u64)
            .map(|s| (0..n).all(|v| s >> v & 1 == 0 || h.adj[v] & s == 0))
            .collect();
        let indep_subsets = (0..full as u64)
            .map(|s| {
                let mut subs = Vec::new();
                let mut t = s;
                loop {
                    if independent[t as usize] && t != 0 {
                        subs.push(t);
                    }
                    if t == 0 {
                        break;
                    }
                    t = (t - 1) & s;
                }
                subs
            })
            .collect();
        let groups = (0..n)
            .map(|v| (1..full as u64).filter(|s| s.trailing_zeros() as usize == v).collect())
            .collect();
        Self { h, n, indep_subsets, groups }
    }

    /// Adds one colour class to the reachable covered-set bitmap.
    fn extend(&self, reach: &[u64], class: u64) -> Vec<u64> {
        let mut out = reach.to_vec();
        let size = 1usize << self.n;
        for m in 0..size {
            if reach[m / 64] >> (m % 64) & 1 == 1 {
                for &i in &self.indep_subsets[class as usize] {
                    let t = m | i as usize;
                    out[t / 64] |= 1 << (t % 64);
                }
            }
        }
        out
    }

    fn full_reached(&self, reach: &[u64]) -> bool {
        let f = (1usize << self.n) - 1;
        reach[f / 64] >> (f % 64) & 1 == 1
    }

    /// Searches for an uncolourable assignment whose classes satisfy `witness`
    /// (checked on the finished multiset). Returns true if none exists.
    fn all_colourable(&self, witness: &dyn Fn(&[u64]) -> bool) -> bool {
        let mut rem: Vec<i64> = self.h.ell.clone();
        if rem.iter().any(|&l| l <= 0) {
            return false;
        }
        let words = ((1usize << self.n) + 63) / 64;
        let mut reach = vec![0u64; words];
        reach[0] = 1;
        let mut classes = Vec::new();
        self.search(0, 0, &mut rem, &reach, &mut classes, witness)
    }

    fn search(
        &self,
        v: usize,
        start: usize,
        rem: &mut Vec<i64>,
        reach: &[u64],
        classes: &mut Vec<u64>,
        witness: &dyn Fn(&[u64]) -> bool,
    ) -> bool {
        if self.full_reached(reach) {
            return true;
        }
        if v == self.n {
            return !witness(classes);
        }
        if rem[v] == 0 {
            return self.search(v + 1, 0, rem, reach, classes, witness);
        }
        let group = &self.groups[v];
        for (idx, &s) in group.iter().enumerate().skip(start) {
            if (0..self.n).any(|w| s >> w & 1 == 1 && rem[w] == 0) {
                continue;
            }
            for w in 0..self.n {
                if s >> w & 1 == 1 {
                    rem[w] -= 1;
                }
            }
            classes.push(s);
            let next = self.extend(reach, s);
            let ok = self.search(v, idx, rem, &next, classes, witness);
            classes.pop();
            for w in 0..self.n {
                if s >> w & 1 == 1 {
                    rem[w] += 1;
                }
            }
            if !ok {
                return false;
            }
        }
        true
    }
}

fn oracle_guard(h: &ListSizeGraph) -> Result<(), ChoosabilityError> {
    let sum: i64 = h.ell.iter().map(|&l| l.max(0)).sum();
    if h.len() > ORACLE_MAX_VERTICES || sum > ORACLE_MAX_SUM {
        return Err(ChoosabilityError::TooLarge(format!(
            "{} vertices, list sizes summing to {sum}",
            h.len()
        )));
    }
    Ok(())
}

/// Exact ℓ-choosability by exhausting list assignments up to renaming.
pub fn oracle_choosable(h: &ListSizeGraph) -> Result<bool, ChoosabilityError> {
    oracle_guard(h)?;
    Ok(Oracle::new(h).all_colourable(&|_| true))
}

/// Exact check of M(u, v) = 1: every assignment with L(v) ⊄ L(u) is colourable.
pub fn oracle_inclusion(h: &ListSizeGraph, u: usize, v: usize) -> Result<bool, ChoosabilityError> {
    oracle_guard(h)?;
    if h.ell.iter().any(|&l| l <= 0) {
        // Nothing is colourable; the claim holds only if L(v) ⊄ L(u) is impossible.
        return Ok(h.ell[v] <= 0);
    }
    let (bu, bv) = (1u64 << u, 1u64 << v);
    Ok(Oracle::new(h).all_colourable(&|classes| classes.iter().any(|&s| s & bv != 0 && s & bu == 0)))
}

/// Outcome of the identified-pair extension.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairOutcome {
    pub reducible: bool,
    pub by_heuristic: bool,
    pub pair: Option<(usize, usize)>,
    /// Per-vertex decrement counts applied for the merged pair.
    pub decrements: Vec<(usize, u32)>,
    /// Why the pair route was not taken, when it was not.
    pub note: Option<String>,
}

/// Removes `b` and `c` as if coloured alike: every vertex adjacent to either
/// loses exactly one colour. Returns the remaining graph and the decrements.
pub fn identify_pair(
    h: &ListSizeGraph,
    b: usize,
    c: usize,
) -> Result<(ListSizeGraph, Vec<(usize, u32)>), ChoosabilityError> {
    if h.adjacent(b, c) {
        return Err(ChoosabilityError::PairAdjacent(h.name(b).into(), h.name(c).into()));
    }
    let mut counts = vec![0u32; h.len()];
    let mut sub = ListSizeGraph::new();
    let mut map = vec![usize::MAX; h.len()];
    for x in 0..h.len() {
        if x == b || x == c {
            continue;
        }
        let mut l = h.ell(x);
        if h.adjacent(x, b) || h.adjacent(x, c) {
            l -= 1;
            counts[x] += 1;
        }
        map[x] = sub.add_vertex(h.name(x), l)?;
    }
    for (x, y) in h.edges() {
        if map[x] != usize::MAX && map[y] != usize::MAX {
            sub.add_edge_idx(map[x], map[y])?;
        }
    }
    let decrements = counts
        .iter()
        .enumerate()
        .filter(|(_, &k)| k > 0)
        .map(|(x, &k)| (x, k))
        .collect();
    Ok((sub, decrements))
}

/// Colours a distant pair alike once the heuristic has pinned every list
/// near the pivot inside the pivot's list.
pub fn reduce_with_identified_pair(
    h: &ListSizeGraph,
    pivot: usize,
    pairs: &[(usize, usize)],
) -> Result<PairOutcome, ChoosabilityError> {
    for &(b, c) in pairs {
        if h.adjacent(b, c) {
            return Err(ChoosabilityError::PairAdjacent(h.name(b).into(), h.name(c).into()));
        }
    }
    let outcome = algorithm_a_outcome(h);
    let mut result = PairOutcome {
        reducible: false,
        by_heuristic: false,
        pair: None,
        decrements: Vec::new(),
        note: None,
    };
    if outcome.choosable {
        result.reducible = true;
        result.by_heuristic = true;
        return Ok(result);
    }
    let Some(m) = outcome.matrix else {
        result.note = Some("heuristic stopped before building a matrix".into());
        return Ok(result);
    };
    if outcome.core >> pivot & 1 == 0 {
        result.note = Some(format!("pivot {} left the core", h.name(pivot)));
        return Ok(result);
    }
    let near = h.neighbor_mask(pivot) & outcome.core;
    if m.row(pivot) & near != near {
        result.note = Some(format!("inclusions into {} do not all hold", h.name(pivot)));
        return Ok(result);
    }
    let ell = h.ells();
    for &(b, c) in pairs {
        if near >> b & 1 == 0 || near >> c & 1 == 0 || ell[b] + ell[c] <= ell[pivot] {
            continue;
        }
        let (sub, counts) = identify_pair(h, b, c)?;
        result.pair = Some((b, c));
        result.decrements = counts;
        if is_happy_graph(&sub, sub.ells()) {
            result.reducible = true;
            return Ok(result);
        }
    }
    if result.pair.is_none() {
        result.note = Some("no declared pair has a forced common colour".into());
    } else {
        result.note = Some("remaining graph is not happy".into());
    }
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k2(a: i64, b: i64) -> ListSizeGraph {
        ListSizeGraph::from_edges(&[a, b], &[(0, 1)])
    }

    fn triangle(l: [i64; 3]) -> ListSizeGraph {
        ListSizeGraph::from_edges(&l, &[(0, 1), (1, 2), (0, 2)])
    }

    #[test]
    fn happy_examples() {
        let g = ListSizeGraph::from_edges(&[1], &[]);
        assert!(is_happy(&g, g.ells(), 0).unwrap());
        let g = k2(1, 1);
        assert!(!is_happy(&g, g.ells(), 0).unwrap());
        let t = triangle([1, 2, 3]);
        assert!(is_happy(&t, t.ells(), 2).unwrap());
        assert!(is_happy(&g, g.ells(), 5).is_err());
    }

    #[test]
    fn heuristic_examples() {
        assert!(algorithm_a(&ListSizeGraph::new()));
        assert!(algorithm_a(&triangle([1, 2, 3])));
        assert!(!algorithm_a(&k2(1, 1)));
        assert!(algorithm_a(&k2(1, 2)));
    }

    #[test]
    fn matrix_examples() {
        // Colouring one end off the other's list leaves the other untouched,
        // so both entries are set even though the heuristic still fails.
        let m = compute_inclusion_matrix(&k2(1, 1));
        assert!(m.get(0, 1) && m.get(1, 0));
        assert!(oracle_inclusion(&k2(1, 1), 0, 1).unwrap());
        assert_eq!(compute_inclusion_matrix(&ListSizeGraph::from_edges(&[1, 1], &[])).size(), 2);
        let m = compute_inclusion_matrix(&k2(2, 1));
        assert!(m.get(0, 1));
        assert!(oracle_inclusion(&k2(2, 1), 0, 1).unwrap());
    }

    #[test]
    fn oracle_examples() {
        assert!(!oracle_choosable(&k2(1, 1)).unwrap());
        assert!(oracle_choosable(&k2(1, 2)).unwrap());
        assert!(oracle_choosable(&triangle([1, 2, 3])).unwrap());
        assert!(!oracle_choosable(&triangle([2, 2, 2])).unwrap());
        // Theta(2,2,2) = K_{2,3} is 2-choosable, K_{2,4} is not.
        let k2n = |n: usize| {
            let edges: Vec<(usize, usize)> =
                (2..2 + n).flat_map(|j| [(0, j), (1, j)]).collect();
            ListSizeGraph::from_edges(&vec![2; 2 + n], &edges)
        };
        assert!(oracle_choosable(&k2n(3)).unwrap());
        assert!(!oracle_choosable(&k2n(4)).unwrap());
        let big = ListSizeGraph::from_edges(&[1; 9], &[]);
        assert!(matches!(oracle_choosable(&big), Err(ChoosabilityError::TooLarge(_))));
    }

    #[test]
    fn happy_graph_examples() {
        assert!(is_happy_graph(&ListSizeGraph::new(), &[]));
        let t = triangle([1, 2, 3]);
        assert!(is_happy_graph(&t, t.ells()));
        let g = k2(1, 1);
        assert!(!is_happy_graph(&g, g.ells()));
    }

    #[test]
    fn text_round_trip() {
        let text = "v a 1\nv b 2\nv c 3\ne a b\ne a c\ne b c\n";
        let g = ListSizeGraph::parse(text).unwrap();
        assert_eq!(g.to_text(), text);
        assert!(matches!(
            ListSizeGraph::parse("v a 1\ne a z\n"),
            Err(ChoosabilityError::UnknownVertex(_))
        ));
        assert!(matches!(ListSizeGraph::parse("x\n"), Err(ChoosabilityError::Parse { line: 1, .. })));
    }

    #[test]
    fn pair_rejects_adjacent() {
        let g = triangle([1, 1, 1]);
        assert!(matches!(
            reduce_with_identified_pair(&g, 0, &[(1, 2)]),
            Err(ChoosabilityError::PairAdjacent(..))
        ));
    }

    #[test]
    fn pair_trivial_cases() {
        let t = triangle([1, 2, 3]);
        let out = reduce_with_identified_pair(&t, 0, &[]).unwrap();
        assert!(out.reducible && out.by_heuristic);
        let g = k2(1, 1);
        assert!(!reduce_with_identified_pair(&g, 0, &[]).unwrap().reducible);
    }
}
