//! Local plane structure implied by a word or an edge context, and fragment
//! embedding into it.
//!
//! A word fixes the faces around a central face (or 3-vertex). Faces of
//! degree 3, 4 and 5 are closed with the right number of extra vertices,
//! 6+-faces are left open. Only the central vertices have a known degree.
//! Distinct structure vertices are assumed to be distinct graph vertices,
//! which holds as long as the faces are cycles and no short separating cycle
//! identifies them; see the ledger.

use crate::fragments::{DegreeBound, PlaneFragment};
use crate::rational::Rational;
use crate::transit::{transit_scenarios, LocalEdgeContext, TransitScenario};
use crate::words::{ConfigWord, Pattern, SlotValue, WordKind};

/// Up to 64 vertices, adjacency as bitsets. `slots[v]` and the edge masks
/// record which word positions the element depends on.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalStructure {
    pub adj: Vec<u64>,
    pub known: Vec<Option<u8>>,
    pub slots: Vec<u16>,
    pub edges: Vec<(usize, usize, u16)>,
}

impl LocalStructure {
    pub fn len(&self) -> usize {
        self.adj.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adj.is_empty()
    }

    pub fn degree(&self, v: usize) -> u32 {
        self.adj[v].count_ones()
    }

    fn edge_slots(&self, a: usize, b: usize) -> u16 {
        let (a, b) = (a.min(b), a.max(b));
        self.edges
            .iter()
            .find(|e| e.0 == a && e.1 == b)
            .map_or(0, |e| e.2)
    }
}

#[derive(Default)]
struct Builder {
    parent: Vec<usize>,
    known: Vec<Option<u8>>,
    slots: Vec<u16>,
    edges: Vec<(usize, usize, u16)>,
}

impl Builder {
    fn vertex(&mut self, known: Option<u8>, slots: u16) -> usize {
        self.parent.push(self.parent.len());
        self.known.push(known);
        self.slots.push(slots);
        self.parent.len() - 1
    }

    fn find(&mut self, v: usize) -> usize {
        let mut r = v;
        while self.parent[r] != r {
            r = self.parent[r];
        }
        let mut v = v;
        while self.parent[v] != r {
            let next = self.parent[v];
            self.parent[v] = r;
            v = next;
        }
        r
    }

    fn edge(&mut self, a: usize, b: usize, slots: u16) {
        self.edges.push((a, b, slots));
    }

    fn merge(&mut self, a: usize, b: usize, slots: u16) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        let (lo, hi) = (ra.min(rb), ra.max(rb));
        self.parent[hi] = lo;
        self.slots[lo] |= self.slots[hi] | slots;
        if self.known[lo].is_none() {
            self.known[lo] = self.known[hi];
        }
    }

    /// Closes a face whose known boundary path runs from `x` to `y` over
    /// `path` edges.
    fn close(&mut self, x: usize, y: usize, face: SlotValue, path: usize, slots: u16) {
        let degree = match face {
            SlotValue::F3 => 3,
            SlotValue::F4 => 4,
            SlotValue::F5 => 5,
            _ => return,
        };
        let missing = degree - path;
        if missing == 0 {
            self.merge(x, y, slots);
            return;
        }
        let mut prev = x;
        for _ in 1..missing {
            let n = self.vertex(None, slots);
            self.edge(prev, n, slots);
            prev = n;
        }
        self.edge(prev, y, slots);
    }

    fn finish(mut self) -> LocalStructure {
        let n = self.parent.len();
        let mut index = vec![usize::MAX; n];
        let mut count = 0;
        for v in 0..n {
            if self.find(v) == v {
                index[v] = count;
                count += 1;
            }
        }
        let mut known = vec![None; count];
        let mut slots = vec![0u16; count];
        for v in 0..n {
            if self.parent[v] == v {
                known[index[v]] = self.known[v];
                slots[index[v]] = self.slots[v];
            }
        }
        assert!(count <= 64, "local structure too large");
        let mut adj = vec![0u64; count];
        let mut edges: Vec<(usize, usize, u16)> = Vec::new();
        let raw = std::mem::take(&mut self.edges);
        for (a, b, s) in raw {
            let (a, b) = (index[self.find(a)], index[self.find(b)]);
            if a == b {
                continue;
            }
            let (a, b) = (a.min(b), a.max(b));
            adj[a] |= 1 << b;
            adj[b] |= 1 << a;
            match edges.iter_mut().find(|e| e.0 == a && e.1 == b) {
                Some(e) => e.2 &= s,
                None => edges.push((a, b, s)),
            }
        }
        edges.sort_unstable();
        LocalStructure {
            adj,
            known,
            slots,
            edges,
        }
    }
}

/// Structure implied by a raw slot sequence of the given kind.
pub fn structure_of_slots(kind: WordKind, s: &[SlotValue]) -> LocalStructure {
    let mut b = Builder::default();
    let bit = |i: usize| 1u16 << i;
    if kind == WordKind::Vertex3 {
        let x = b.vertex(Some(3), 0);
        let y: Vec<usize> = (0..3).map(|_| b.vertex(None, 0)).collect();
        for &yi in &y {
            b.edge(x, yi, 0);
        }
        for i in 0..3 {
            b.close(y[i], y[(i + 1) % 3], s[i], 2, bit(i));
        }
        return b.finish();
    }
    let d = s.len() / 2;
    let v: Vec<usize> = (0..d)
        .map(|i| {
            let deg = if s[2 * i] == SlotValue::V3 { 3 } else { 4 };
            b.vertex(Some(deg), bit(2 * i))
        })
        .collect();
    for i in 0..d {
        b.edge(v[i], v[(i + 1) % d], 0);
    }
    // (spoke on the previous edge's side, spoke on the next edge's side)
    let mut spokes = Vec::with_capacity(d);
    for i in 0..d {
        let c = bit(2 * i);
        if s[2 * i] == SlotValue::V3 {
            let w = b.vertex(None, c);
            b.edge(v[i], w, c);
            spokes.push((w, w));
        } else {
            let wm = b.vertex(None, c);
            let wp = b.vertex(None, c);
            b.edge(v[i], wm, c);
            b.edge(v[i], wp, c);
            b.close(wm, wp, s[2 * i], 2, c);
            spokes.push((wm, wp));
        }
    }
    for i in 0..d {
        let j = (i + 1) % d;
        let (x, y) = (spokes[i].1, spokes[j].0);
        b.close(x, y, s[2 * i + 1], 3, bit(2 * i + 1) | bit(2 * i) | bit(2 * j));
    }
    b.finish()
}

pub fn structure_of_word(w: &ConfigWord) -> LocalStructure {
    structure_of_slots(w.kind(), w.slots())
}

/// Structure around the edge `uv` of a 6+-face `f`, with the extra triangles a
/// transit scenario needs.
pub fn structure_of_context(ctx: &LocalEdgeContext, sc: &TransitScenario) -> LocalStructure {
    let mut b = Builder::default();
    let u = b.vertex(Some(ctx.du), 0);
    let v = b.vertex(Some(ctx.dv), 0);
    b.edge(u, v, 0);
    let side = |b: &mut Builder, c: usize, deg: u8, fan: &[SlotValue], far: bool| -> usize {
        // x next to f', then the remaining neighbours towards f.
        let x = b.vertex(None, 0);
        b.edge(c, x, 0);
        let mut prev = x;
        let last = deg as usize - 3;
        for (i, &face) in fan.iter().enumerate() {
            let n = b.vertex(None, 0);
            b.edge(c, n, 0);
            if far && i == last {
                // the 4-face prev-c-n-w and the triangle n-w-t beyond it
                let w = b.vertex(None, 0);
                let t = b.vertex(None, 0);
                b.edge(prev, w, 0);
                b.edge(w, n, 0);
                b.edge(w, t, 0);
                b.edge(t, n, 0);
            } else {
                b.close(prev, n, face, 2, 0);
            }
            prev = n;
        }
        x
    };
    let xu = side(&mut b, u, ctx.du, &ctx.fan_u, sc.far_triangle_u);
    let xv = side(&mut b, v, ctx.dv, &ctx.fan_v, sc.far_triangle_v);
    b.close(xu, xv, ctx.fprime, 3, 0);
    b.finish()
}

fn admits(bound: DegreeBound, known: Option<u8>) -> bool {
    match bound {
        DegreeBound::Exact(d) => known == Some(d),
        DegreeBound::AtMost4 => true,
    }
}

/// Fragment as a G-edge graph with its search order.
#[derive(Debug, Clone)]
pub struct Template {
    pub name: String,
    bounds: Vec<DegreeBound>,
    adj: Vec<Vec<usize>>,
    order: Vec<usize>,
    /// number of exact 3-vertices
    threes: usize,
}

impl Template {
    pub fn new(name: impl Into<String>, frag: &PlaneFragment) -> Template {
        let n = frag.vertices.len();
        let adj: Vec<Vec<usize>> = (0..n).map(|v| frag.g_neighbors(v)).collect();
        let bounds: Vec<DegreeBound> = frag.vertices.iter().map(|v| v.bound).collect();
        // Constrained, high-degree vertices first, then grow along edges.
        let score = |v: usize| {
            (
                matches!(bounds[v], DegreeBound::Exact(_)),
                adj[v].len(),
                std::cmp::Reverse(v),
            )
        };
        let mut order = Vec::with_capacity(n);
        let mut placed = vec![false; n];
        while order.len() < n {
            let next = (0..n)
                .filter(|&v| !placed[v])
                .max_by_key(|&v| {
                    let linked = order.iter().any(|&p| adj[v].contains(&p));
                    (linked, score(v))
                })
                .expect("vertex left");
            placed[next] = true;
            order.push(next);
        }
        let threes = bounds.iter().filter(|b| **b == DegreeBound::Exact(3)).count();
        Template {
            name: name.into(),
            bounds,
            adj,
            order,
            threes,
        }
    }

    pub fn len(&self) -> usize {
        self.adj.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adj.is_empty()
    }

    /// True when some vertex can never occur in a word structure.
    pub fn impossible(&self) -> bool {
        self.bounds
            .iter()
            .any(|b| matches!(b, DegreeBound::Exact(d) if *d < 3))
    }

    /// An injective map of fragment vertices onto structure vertices keeping
    /// every G-edge and every exact degree, if one exists.
    pub fn embed(&self, s: &LocalStructure) -> Option<Vec<usize>> {
        if self.impossible() || self.len() > s.len() {
            return None;
        }
        let threes = s.known.iter().filter(|k| **k == Some(3)).count();
        if threes < self.threes {
            return None;
        }
        let mut map = vec![usize::MAX; self.len()];
        if self.extend(s, 0, 0, &mut map) {
            Some(map)
        } else {
            None
        }
    }

    fn extend(&self, s: &LocalStructure, k: usize, used: u64, map: &mut [usize]) -> bool {
        if k == self.order.len() {
            return true;
        }
        let f = self.order[k];
        let mut need = u64::MAX;
        for &g in &self.adj[f] {
            if map[g] != usize::MAX {
                need &= s.adj[map[g]];
            }
        }
        let mut cand = need & !used;
        if s.len() < 64 {
            cand &= (1u64 << s.len()) - 1;
        }
        while cand != 0 {
            let t = cand.trailing_zeros() as usize;
            cand &= cand - 1;
            if !admits(self.bounds[f], s.known[t]) || (s.degree(t) as usize) < self.adj[f].len() {
                continue;
            }
            map[f] = t;
            if self.extend(s, k + 1, used | (1 << t), map) {
                return true;
            }
            map[f] = usize::MAX;
        }
        false
    }

    /// Word positions the embedding depends on.
    pub fn support(&self, s: &LocalStructure, map: &[usize]) -> u16 {
        let mut m = 0u16;
        for (f, &t) in map.iter().enumerate() {
            m |= s.slots[t];
            for &g in &self.adj[f] {
                m |= s.edge_slots(t, map[g]);
            }
        }
        m
    }
}

/// First template embedding into the word's structure.
pub fn forbidding_template<'a>(templates: &'a [Template], w: &ConfigWord) -> Option<&'a Template> {
    let s = structure_of_word(w);
    templates.iter().find(|t| t.embed(&s).is_some())
}

fn product(kind: WordKind, atoms: &[Vec<SlotValue>], mut f: impl FnMut(&[SlotValue]) -> bool) -> bool {
    let n = kind.len();
    let mut idx = vec![0usize; n];
    let mut raw: Vec<SlotValue> = atoms.iter().map(|a| a[0]).collect();
    loop {
        if !f(&raw) {
            return false;
        }
        let mut i = 0;
        loop {
            if i == n {
                return true;
            }
            idx[i] += 1;
            if idx[i] < atoms[i].len() {
                raw[i] = atoms[i][idx[i]];
                break;
            }
            idx[i] = 0;
            raw[i] = atoms[i][0];
            i += 1;
        }
    }
}

/// True iff the template embeds into the structure of every raw word the
/// pattern accepts.
pub fn pattern_sound(template: &Template, pattern: &Pattern) -> bool {
    let kind = pattern.kind();
    let atoms: Vec<Vec<SlotValue>> = (0..kind.len()).map(|i| pattern.atom(i)).collect();
    product(kind, &atoms, |raw| template.embed(&structure_of_slots(kind, raw)).is_some())
}

/// Generalises `w` to a sound pattern for the template: positions outside
/// the embedding's support become wildcards, then individual fixed
/// positions are relaxed while soundness holds.
pub fn generalize(template: &Template, w: &ConfigWord, id: &str) -> Option<Pattern> {
    let kind = w.kind();
    let s = structure_of_word(w);
    let map = template.embed(&s)?;
    let support = template.support(&s, &map);
    let legal = |i: usize| kind.legal(i).to_vec();
    let mut atoms: Vec<Vec<SlotValue>> = (0..kind.len())
        .map(|i| {
            if support & (1 << i) != 0 {
                vec![w.slots()[i]]
            } else {
                legal(i)
            }
        })
        .collect();
    let make = |atoms: &[Vec<SlotValue>]| {
        Pattern::new(id, template.name.clone(), kind, atoms.to_vec()).expect("legal atoms")
    };
    if !pattern_sound(template, &make(&atoms)) {
        atoms = w.slots().iter().map(|&v| vec![v]).collect();
    }
    for i in 0..kind.len() {
        if atoms[i].len() > 1 {
            continue;
        }
        let keep = atoms[i].clone();
        atoms[i] = legal(i);
        if !pattern_sound(template, &make(&atoms)) {
            atoms[i] = keep;
        }
    }
    for i in 0..kind.len() {
        for v in legal(i) {
            if atoms[i].contains(&v) {
                continue;
            }
            atoms[i].push(v);
            if !pattern_sound(template, &make(&atoms)) {
                atoms[i].pop();
            }
        }
    }
    Some(make(&atoms))
}

/// Greedy cover of the words the template embeds into by sound patterns.
/// Words are visited in the given order; each uncovered hit is generalised.
pub fn derive_patterns(template: &Template, words: &[ConfigWord], prefix: &str) -> Vec<Pattern> {
    let mut out: Vec<Pattern> = Vec::new();
    for w in words {
        if out.iter().any(|p| p.kind() == w.kind() && crate::words::matches(w, p).unwrap_or(false)) {
            continue;
        }
        let id = format!("{prefix}-{}", out.len() + 1);
        if let Some(p) = generalize(template, w, &id) {
            out.push(p);
        }
    }
    out
}

/// Absorption status of one overloaded context: the library entry matched by
/// each way the context carries more than 1/3.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Absorption {
    pub context: LocalEdgeContext,
    pub scenarios: Vec<(TransitScenario, Option<String>)>,
}

impl Absorption {
    pub fn absorbed(&self) -> bool {
        self.scenarios.iter().all(|s| s.1.is_some())
    }
}

/// Matches every overloaded scenario's structure against the library.
pub fn c6plus_absorption_check(templates: &[Template]) -> Vec<Absorption> {
    let limit = Rational::new(1, 3);
    crate::transit::enumerate_overloaded_edges()
        .into_iter()
        .map(|context| {
            let scenarios = transit_scenarios(&context)
                .expect("enumerated contexts are valid")
                .into_iter()
                .filter(|sc| sc.transit > limit)
                .map(|sc| {
                    let s = structure_of_context(&context, &sc);
                    let hit = templates
                        .iter()
                        .find(|t| t.embed(&s).is_some())
                        .map(|t| t.name.clone());
                    (sc, hit)
                })
                .collect();
            Absorption { context, scenarios }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use SlotValue::*;

    fn frag(text: &str) -> PlaneFragment {
        PlaneFragment::parse(text).unwrap()
    }

    fn adjacent_threes() -> Template {
        Template::new(
            "adjacent 3-vertices",
            &frag("v a deg=3 open\nv b deg=3 open\ne a b\n"),
        )
    }

    fn triangle_at_three() -> Template {
        Template::new(
            "3-vertex on a triangle",
            &frag(
                "v a deg=3 open\nv b deg=le4 open\nv c deg=le4 open\n\
                 e a b\ne b c\ne a c\nrot a: b c\n",
            ),
        )
    }

    #[test]
    fn vertex3_structure_sizes() {
        let s = structure_of_slots(WordKind::Vertex3, &[F3, F4, F6P]);
        // centre, three neighbours, one extra vertex in the 4-face
        assert_eq!(s.len(), 5);
        assert_eq!(s.edges.len(), 3 + 1 + 2);
        let s = structure_of_slots(WordKind::Vertex3, &[F3, F3, F3]);
        assert_eq!(s.len(), 4);
        assert_eq!(s.edges.len(), 6);
    }

    #[test]
    fn face3_triangle_edges_merge_spokes() {
        // all corners 4-vertices with 3-faces opposite, all edge faces triangles
        let s = structure_of_slots(WordKind::Face3, &[F3, F3, F3, F3, F3, F3]);
        // centre triangle plus one merged spoke per corner pair
        assert_eq!(s.len(), 6);
        assert!(s.known.iter().take(3).all(|k| *k == Some(4)));
        assert!(s.adj.iter().all(|a| a.count_ones() == 4));
    }

    #[test]
    fn face5_structure_is_bounded() {
        let s = structure_of_slots(WordKind::Face5, &[F5; 10]);
        assert_eq!(s.len(), 5 + 10 + 10 + 5);
    }

    #[test]
    fn simple_templates_match_expected_words() {
        let t = triangle_at_three();
        assert!(t.embed(&structure_of_slots(WordKind::Vertex3, &[F3, F5, F6P])).is_some());
        assert!(t.embed(&structure_of_slots(WordKind::Vertex3, &[F4, F5, F6P])).is_none());
        let a = adjacent_threes();
        let w = [V3, F4, V3, F5, F4, F6P, F4, F6P, F4, F6P];
        assert!(a.embed(&structure_of_slots(WordKind::Face5, &w)).is_some());
        let w = [V3, F4, F4, F5, V3, F6P, F4, F6P, F4, F6P];
        assert!(a.embed(&structure_of_slots(WordKind::Face5, &w)).is_none());
    }

    #[test]
    fn generalised_patterns_are_sound_and_cover_the_word() {
        let a = adjacent_threes();
        let w = crate::words::canonicalize(WordKind::Face5, &[V3, F4, V3, F5, F4, F6P, F4, F6P, F4, F6P]).unwrap();
        let p = generalize(&a, &w, "p").unwrap();
        assert!(pattern_sound(&a, &p));
        assert!(crate::words::matches(&w, &p).unwrap());
        // only the two corners and the edge between them matter
        let fixed = (0..10).filter(|&i| p.atom(i).len() == 1).count();
        assert!(fixed <= 3, "{p:?}");
        let t = triangle_at_three();
        let w = crate::words::canonicalize(WordKind::Vertex3, &[F3, F5, F6P]).unwrap();
        let p = generalize(&t, &w, "q").unwrap();
        assert_eq!(p.body(), "V3:[{3}/*/*]");
    }

    #[test]
    fn context_structure_shape() {
        let ctx = LocalEdgeContext::new(3, 3, F3, vec![F6P], vec![F6P]).unwrap();
        let sc = transit_scenarios(&ctx).unwrap().remove(0);
        let s = structure_of_context(&ctx, &sc);
        // u, v, one merged apex across f', z_u, z_v
        assert_eq!(s.len(), 5);
        assert!(adjacent_threes().embed(&s).is_some());
    }

    #[test]
    fn empty_library_absorbs_nothing() {
        let report = c6plus_absorption_check(&[]);
        assert!(!report.is_empty());
        assert!(report.iter().all(|a| !a.scenarios.is_empty() && a.scenarios.iter().all(|s| s.1.is_none())));
    }
}
