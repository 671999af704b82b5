//! Configuration drawings as plane fragments and the reduction problems they
//! induce.
//!
//! Text format, one item per line (`#` starts a comment):
//!
//! ```text
//! v <id> deg=<1|2|3|4|le4> <colored|open> [removed]
//! e <id> <id> [gprime-only]
//! rot <id>: <neighbour ids, counter-clockwise>
//! distant <id> <id> reason=<text>
//! near <id> <id>
//! pivot <id>
//! ```
//!
//! Rotation lines are only required at vertices with three or more depicted
//! neighbours. `pivot` names the vertex whose list must contain its
//! neighbours' lists before a distant pair may be coloured alike.

use std::collections::VecDeque;
use std::fmt;

use crate::choosability::{ChoosabilityError, ListSizeGraph};
use crate::plane::PlaneGraph;

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum FragmentError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("invalid fragment: {0}")]
    Invalid(String),
    #[error(transparent)]
    Graph(#[from] ChoosabilityError),
}

fn invalid(msg: impl Into<String>) -> FragmentError {
    FragmentError::Invalid(msg.into())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DegreeBound {
    Exact(u8),
    AtMost4,
}

impl DegreeBound {
    /// Worst case degree used for list sizes.
    pub fn worst(self) -> usize {
        match self {
            DegreeBound::Exact(d) => d as usize,
            DegreeBound::AtMost4 => 4,
        }
    }

    pub fn as_str(self) -> String {
        match self {
            DegreeBound::Exact(d) => d.to_string(),
            DegreeBound::AtMost4 => "le4".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FragVertex {
    pub id: String,
    pub bound: DegreeBound,
    pub colored: bool,
    pub removed: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FragEdge {
    pub a: usize,
    pub b: usize,
    pub gprime_only: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistantPair {
    pub a: usize,
    pub b: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PlaneFragment {
    pub vertices: Vec<FragVertex>,
    pub edges: Vec<FragEdge>,
    /// Counter-clockwise G-neighbours; `None` where no rotation line was given.
    pub rotation: Vec<Option<Vec<usize>>>,
    pub distant: Vec<DistantPair>,
    pub near: Vec<(usize, usize)>,
    pub pivot: Option<usize>,
}

impl PlaneFragment {
    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.vertices.iter().position(|v| v.id == id)
    }

    pub fn id(&self, i: usize) -> &str {
        &self.vertices[i].id
    }

    /// Neighbours through edges present in G.
    pub fn g_neighbors(&self, v: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .edges
            .iter()
            .filter(|e| !e.gprime_only)
            .filter_map(|e| {
                if e.a == v {
                    Some(e.b)
                } else if e.b == v {
                    Some(e.a)
                } else {
                    None
                }
            })
            .collect();
        out.sort_unstable();
        out
    }

    pub fn depicted_degree(&self, v: usize) -> usize {
        self.g_neighbors(v).len()
    }

    /// Cyclic order at `v`: the rotation line if any, else ascending order.
    pub fn rotation_at(&self, v: usize) -> Vec<usize> {
        self.rotation[v].clone().unwrap_or_else(|| self.g_neighbors(v))
    }

    pub fn plane_graph(&self) -> PlaneGraph {
        PlaneGraph::new((0..self.vertices.len()).map(|v| self.rotation_at(v)).collect())
    }

    /// Faces of the drawing traced from the rotation system.
    pub fn faces(&self) -> Vec<Vec<usize>> {
        self.plane_graph().faces()
    }

    /// Breadth-first G-distances from `v`, capped at `limit`.
    pub fn distances(&self, v: usize, limit: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.vertices.len()];
        dist[v] = Some(0);
        let mut queue = VecDeque::from([v]);
        while let Some(x) = queue.pop_front() {
            let d = dist[x].unwrap();
            if d == limit {
                continue;
            }
            for y in self.g_neighbors(x) {
                if dist[y].is_none() {
                    dist[y] = Some(d + 1);
                    queue.push_back(y);
                }
            }
        }
        dist
    }

    pub fn validate(&self) -> Result<(), FragmentError> {
        let n = self.vertices.len();
        for (i, v) in self.vertices.iter().enumerate() {
            if self.vertices[..i].iter().any(|w| w.id == v.id) {
                return Err(invalid(format!("duplicate vertex {}", v.id)));
            }
            if v.removed && v.colored {
                return Err(invalid(format!("{} is removed from G_C but colored", v.id)));
            }
            if let DegreeBound::Exact(d) = v.bound {
                if !(1..=4).contains(&d) {
                    return Err(invalid(format!("{} has degree bound {d}", v.id)));
                }
            }
        }
        let mut seen = std::collections::HashSet::new();
        for e in &self.edges {
            if e.a == e.b || e.a >= n || e.b >= n {
                return Err(invalid("edge endpoints must be two distinct vertices"));
            }
            if !seen.insert((e.a.min(e.b), e.a.max(e.b))) {
                return Err(invalid(format!("parallel edge {}-{}", self.id(e.a), self.id(e.b))));
            }
        }
        for v in 0..n {
            let nb = self.g_neighbors(v);
            if nb.len() > self.vertices[v].bound.worst() {
                return Err(invalid(format!(
                    "{} has {} depicted neighbours, bound {}",
                    self.id(v),
                    nb.len(),
                    self.vertices[v].bound.as_str()
                )));
            }
            match &self.rotation[v] {
                Some(r) => {
                    let mut sorted = r.clone();
                    sorted.sort_unstable();
                    if sorted != nb {
                        return Err(invalid(format!(
                            "rotation at {} does not list exactly its neighbours",
                            self.id(v)
                        )));
                    }
                }
                None if nb.len() >= 3 => {
                    return Err(invalid(format!("missing rotation at {}", self.id(v))));
                }
                None => {}
            }
        }
        self.check_planar()?;
        for p in &self.distant {
            if p.a == p.b {
                return Err(invalid("distant pair repeats a vertex"));
            }
            if self.distances(p.a, 2)[p.b].is_some() {
                return Err(invalid(format!(
                    "{} and {} are declared distant but depicted within distance 2",
                    self.id(p.a),
                    self.id(p.b)
                )));
            }
        }
        for &(a, b) in &self.near {
            if a == b {
                return Err(invalid("near pair repeats a vertex"));
            }
        }
        Ok(())
    }

    /// Every connected component must have genus zero.
    fn check_planar(&self) -> Result<(), FragmentError> {
        let g = self.plane_graph();
        let n = g.num_vertices();
        let mut comp = vec![usize::MAX; n];
        let mut count = 0;
        for s in 0..n {
            if comp[s] != usize::MAX {
                continue;
            }
            let mut stack = vec![s];
            comp[s] = count;
            while let Some(v) = stack.pop() {
                for &u in &g.rot[v] {
                    if comp[u] == usize::MAX {
                        comp[u] = count;
                        stack.push(u);
                    }
                }
            }
            count += 1;
        }
        let faces = g.faces();
        for c in 0..count {
            let v = comp.iter().filter(|&&x| x == c).count() as i64;
            let e = (0..n).filter(|&x| comp[x] == c).map(|x| g.rot[x].len()).sum::<usize>() as i64 / 2;
            if e == 0 {
                continue;
            }
            let f = faces.iter().filter(|f| comp[f[0]] == c).count() as i64;
            if v - e + f != 2 {
                return Err(invalid("rotation system is not planar"));
            }
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self, FragmentError> {
        let mut frag = PlaneFragment::default();
        let mut edges: Vec<(String, String, bool, usize)> = Vec::new();
        let mut rots: Vec<(String, Vec<String>, usize)> = Vec::new();
        let mut distant: Vec<(String, String, String, usize)> = Vec::new();
        let mut near: Vec<(String, String, usize)> = Vec::new();
        let mut pivot: Option<(String, usize)> = None;
        for (n, raw) in text.lines().enumerate() {
            let line_no = n + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: &str| FragmentError::Parse { line: line_no, msg: msg.to_string() };
            if let Some(rest) = line.strip_prefix("rot ") {
                let (id, list) = rest.split_once(':').ok_or_else(|| err("rotation needs `:`"))?;
                let ids = list.split_whitespace().map(str::to_string).collect();
                rots.push((id.trim().to_string(), ids, line_no));
                continue;
            }
            let toks: Vec<&str> = line.split_whitespace().collect();
            match toks[0] {
                "v" => {
                    if toks.len() < 4 || toks.len() > 5 {
                        return Err(err("expected `v <id> deg=<d> <colored|open> [removed]`"));
                    }
                    let bound = match toks[2] {
                        "deg=le4" => DegreeBound::AtMost4,
                        d => match d.strip_prefix("deg=").and_then(|x| x.parse::<u8>().ok()) {
                            Some(k) => DegreeBound::Exact(k),
                            None => return Err(err("bad degree bound")),
                        },
                    };
                    let colored = match toks[3] {
                        "colored" => true,
                        "open" => false,
                        _ => return Err(err("expected `colored` or `open`")),
                    };
                    let removed = match toks.get(4) {
                        None => false,
                        Some(&"removed") => true,
                        Some(_) => return Err(err("unknown vertex flag")),
                    };
                    frag.vertices.push(FragVertex { id: toks[1].to_string(), bound, colored, removed });
                }
                "e" => {
                    let gprime_only = match toks.len() {
                        3 => false,
                        4 if toks[3] == "gprime-only" => true,
                        _ => return Err(err("expected `e <id> <id> [gprime-only]`")),
                    };
                    edges.push((toks[1].to_string(), toks[2].to_string(), gprime_only, line_no));
                }
                "distant" => {
                    let reason = line
                        .split_once("reason=")
                        .map(|(_, r)| r.trim().to_string())
                        .ok_or_else(|| err("distant pair needs reason="))?;
                    if toks.len() < 4 {
                        return Err(err("expected `distant <id> <id> reason=<text>`"));
                    }
                    distant.push((toks[1].to_string(), toks[2].to_string(), reason, line_no));
                }
                "near" => {
                    if toks.len() != 3 {
                        return Err(err("expected `near <id> <id>`"));
                    }
                    near.push((toks[1].to_string(), toks[2].to_string(), line_no));
                }
                "pivot" => {
                    if toks.len() != 2 {
                        return Err(err("expected `pivot <id>`"));
                    }
                    pivot = Some((toks[1].to_string(), line_no));
                }
                _ => return Err(err("unknown line kind")),
            }
        }
        let lookup = |frag: &PlaneFragment, id: &str, line: usize| {
            frag.index_of(id).ok_or_else(|| FragmentError::Parse {
                line,
                msg: format!("unknown vertex `{id}`"),
            })
        };
        for (a, b, gprime_only, line) in edges {
            let (a, b) = (lookup(&frag, &a, line)?, lookup(&frag, &b, line)?);
            frag.edges.push(FragEdge { a, b, gprime_only });
        }
        frag.rotation = vec![None; frag.vertices.len()];
        for (id, ids, line) in rots {
            let v = lookup(&frag, &id, line)?;
            let order = ids
                .iter()
                .map(|x| lookup(&frag, x, line))
                .collect::<Result<Vec<_>, _>>()?;
            frag.rotation[v] = Some(order);
        }
        for (a, b, reason, line) in distant {
            let (a, b) = (lookup(&frag, &a, line)?, lookup(&frag, &b, line)?);
            frag.distant.push(DistantPair { a, b, reason });
        }
        for (a, b, line) in near {
            frag.near.push((lookup(&frag, &a, line)?, lookup(&frag, &b, line)?));
        }
        if let Some((id, line)) = pivot {
            frag.pivot = Some(lookup(&frag, &id, line)?);
        }
        frag.validate()?;
        Ok(frag)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for v in &self.vertices {
            s.push_str(&format!(
                "v {} deg={} {}{}\n",
                v.id,
                v.bound.as_str(),
                if v.colored { "colored" } else { "open" },
                if v.removed { " removed" } else { "" }
            ));
        }
        for e in &self.edges {
            s.push_str(&format!(
                "e {} {}{}\n",
                self.id(e.a),
                self.id(e.b),
                if e.gprime_only { " gprime-only" } else { "" }
            ));
        }
        for (v, r) in self.rotation.iter().enumerate() {
            if let Some(r) = r {
                let ids: Vec<&str> = r.iter().map(|&u| self.id(u)).collect();
                s.push_str(&format!("rot {}: {}\n", self.id(v), ids.join(" ")));
            }
        }
        for p in &self.distant {
            s.push_str(&format!("distant {} {} reason={}\n", self.id(p.a), self.id(p.b), p.reason));
        }
        for &(a, b) in &self.near {
            s.push_str(&format!("near {} {}\n", self.id(a), self.id(b)));
        }
        if let Some(p) = self.pivot {
            s.push_str(&format!("pivot {}\n", self.id(p)));
        }
        s
    }

    pub fn open_vertices(&self) -> Vec<usize> {
        (0..self.vertices.len()).filter(|&v| !self.vertices[v].colored).collect()
    }
}

impl fmt::Display for PlaneFragment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// H on the open vertices: G-distance at most 2, plus declared near pairs.
pub fn square_graph(frag: &PlaneFragment) -> Result<(ListSizeGraph, Vec<usize>), FragmentError> {
    frag.validate()?;
    let open = frag.open_vertices();
    let mut h = ListSizeGraph::new();
    for &v in &open {
        h.add_vertex(frag.id(v), 0)?;
    }
    for (i, &u) in open.iter().enumerate() {
        let dist = frag.distances(u, 2);
        for (j, &v) in open.iter().enumerate().skip(i + 1) {
            let near = frag.near.iter().any(|&(a, b)| (a, b) == (u, v) || (a, b) == (v, u));
            if dist[v].is_some() || near {
                h.add_edge_idx(i, j)?;
            }
        }
    }
    Ok((h, open))
}

/// Worst-case list sizes of the open vertices, in vertex order.
pub fn derive_list_sizes(frag: &PlaneFragment, k: i64) -> Result<Vec<(usize, i64)>, FragmentError> {
    frag.validate()?;
    let mut out = Vec::new();
    for v in frag.open_vertices() {
        let dist = frag.distances(v, 2);
        let colored_near = (0..frag.vertices.len())
            .filter(|&u| u != v && frag.vertices[u].colored && dist[u].is_some())
            .count();
        let phantom_nbrs: usize = frag
            .g_neighbors(v)
            .into_iter()
            .map(|u| frag.vertices[u].bound.worst() - frag.depicted_degree(u))
            .sum();
        let own = 4 * (frag.vertices[v].bound.worst() - frag.depicted_degree(v));
        let b = (colored_near + phantom_nbrs + own) as i64;
        let mut ell = k - b;
        if ell < 0 {
            log::warn!("list size of {} clamped from {ell} to 0", frag.id(v));
            ell = 0;
        }
        out.push((v, ell));
    }
    Ok(out)
}

/// The list-colouring instance a fragment asks for.
#[derive(Debug, Clone)]
pub struct ReductionProblem {
    pub graph: ListSizeGraph,
    /// H vertex index to fragment vertex index.
    pub back: Vec<usize>,
    pub k: i64,
    /// Distant pairs as H indices.
    pub pairs: Vec<(usize, usize)>,
    pub pivot: Option<usize>,
}

pub fn build_reduction_problem(frag: &PlaneFragment, k: i64) -> Result<ReductionProblem, FragmentError> {
    let (mut graph, back) = square_graph(frag)?;
    for (i, (_, ell)) in derive_list_sizes(frag, k)?.into_iter().enumerate() {
        graph.set_ell(i, ell);
    }
    let h_index = |v: usize| back.iter().position(|&x| x == v);
    let mut pairs = Vec::new();
    for p in &frag.distant {
        if let (Some(a), Some(b)) = (h_index(p.a), h_index(p.b)) {
            pairs.push((a, b));
        }
    }
    let pivot = frag.pivot.and_then(h_index);
    Ok(ReductionProblem { graph, back, k, pairs, pivot })
}

#[cfg(test)]
mod tests {
    use super::*;

    const DEG2: &str = "\
v v deg=2 open removed
v a deg=le4 colored
v b deg=le4 colored
e v a
e v b
e a b gprime-only
";

    const C0: &str = "\
v a deg=le4 open
v b deg=3 open
v c deg=3 open
v d deg=le4 colored
v e deg=le4 colored
e a e
e e d
e a c
e c d
e a b
rot a: b e c
";

    fn ells(frag: &PlaneFragment) -> Vec<(String, i64)> {
        derive_list_sizes(frag, 12)
            .unwrap()
            .into_iter()
            .map(|(v, l)| (frag.id(v).to_string(), l))
            .collect()
    }

    #[test]
    fn degree_two_vertex() {
        let f = PlaneFragment::parse(DEG2).unwrap();
        assert_eq!(ells(&f), vec![("v".to_string(), 4)]);
    }

    #[test]
    fn c0_problem() {
        let f = PlaneFragment::parse(C0).unwrap();
        let l: Vec<i64> = ells(&f).into_iter().map(|(_, l)| l).collect();
        assert_eq!(l, vec![1, 2, 3]);
        let p = build_reduction_problem(&f, 12).unwrap();
        assert_eq!(p.graph.edges().len(), 3);
        assert!(crate::choosability::algorithm_a(&p.graph));
    }

    #[test]
    fn text_round_trip() {
        let f = PlaneFragment::parse(C0).unwrap();
        assert_eq!(PlaneFragment::parse(&f.to_text()).unwrap(), f);
        let g = PlaneFragment::parse(DEG2).unwrap();
        assert_eq!(g.to_text(), DEG2);
    }

    #[test]
    fn validation_errors() {
        let over = "v a deg=3 open\nv b deg=le4 open\nv c deg=le4 open\nv d deg=le4 open\nv e deg=le4 open\ne a b\ne a c\ne a d\ne a e\nrot a: b c d e\n";
        assert!(matches!(PlaneFragment::parse(over), Err(FragmentError::Invalid(_))));
        let norot = "v a deg=le4 open\nv b deg=le4 open\nv c deg=le4 open\nv d deg=le4 open\ne a b\ne a c\ne a d\n";
        assert!(matches!(PlaneFragment::parse(norot), Err(FragmentError::Invalid(_))));
        assert!(matches!(
            PlaneFragment::parse("v a deg=le4 open\ne a z\n"),
            Err(FragmentError::Parse { line: 2, .. })
        ));
        let close = "v a deg=le4 open\nv b deg=le4 open\nv c deg=le4 open\ne a b\ne b c\ndistant a c reason=x\n";
        assert!(matches!(PlaneFragment::parse(close), Err(FragmentError::Invalid(_))));
    }

    #[test]
    fn nonplanar_rotation_rejected() {
        // K4 with a twisted rotation at one vertex has genus one.
        let k4 = "\
v a deg=le4 open
v b deg=le4 open
v c deg=le4 open
v d deg=le4 open
e a b
e a c
e a d
e b c
e b d
e c d
rot a: b c d
rot b: a d c
rot c: a b d
rot d: a c b
";
        let good = PlaneFragment::parse(k4);
        let twisted = k4.replace("rot d: a c b", "rot d: a b c");
        assert_ne!(good.is_ok(), PlaneFragment::parse(&twisted).is_ok());
    }

    #[test]
    fn distance_three_pair_not_adjacent() {
        let f = PlaneFragment::parse(
            "v a deg=le4 open\nv b deg=le4 colored\nv c deg=le4 colored\nv d deg=le4 open\ne a b\ne b c\ne c d\n",
        )
        .unwrap();
        let (h, _) = square_graph(&f).unwrap();
        assert_eq!(h.len(), 2);
        assert!(h.edges().is_empty());
    }
}
