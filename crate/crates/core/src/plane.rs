//! Rotation systems, face tracing, the Euler charge sum and random plane graphs.

use rand::Rng;

use crate::Rational;

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum PlaneError {
    #[error("rotation system is not symmetric at {0}-{1}")]
    Asymmetric(usize, usize),
    #[error("graph is not connected")]
    NotClosed,
}

/// A plane graph given by the counter-clockwise neighbour order at each vertex.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PlaneGraph {
    pub rot: Vec<Vec<usize>>,
}

impl PlaneGraph {
    pub fn new(rot: Vec<Vec<usize>>) -> Self {
        Self { rot }
    }

    pub fn num_vertices(&self) -> usize {
        self.rot.len()
    }

    pub fn num_edges(&self) -> usize {
        self.rot.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn degree(&self, v: usize) -> usize {
        self.rot[v].len()
    }

    fn pos(&self, v: usize, u: usize) -> Option<usize> {
        self.rot[v].iter().position(|&w| w == u)
    }

    pub fn validate(&self) -> Result<(), PlaneError> {
        for (v, nb) in self.rot.iter().enumerate() {
            for &u in nb {
                if u == v || self.pos(u, v).is_none() {
                    return Err(PlaneError::Asymmetric(v, u));
                }
            }
            let mut sorted = nb.clone();
            sorted.sort_unstable();
            sorted.dedup();
            if sorted.len() != nb.len() {
                return Err(PlaneError::Asymmetric(v, v));
            }
        }
        Ok(())
    }

    /// Dart following `u -> v` around its face.
    pub fn next_dart(&self, u: usize, v: usize) -> (usize, usize) {
        let i = self.pos(v, u).expect("dart exists");
        let nb = &self.rot[v];
        (v, nb[(i + 1) % nb.len()])
    }

    /// Faces as dart cycles; each face is the list of its tail vertices.
    pub fn faces(&self) -> Vec<Vec<usize>> {
        let mut seen: std::collections::HashSet<(usize, usize)> = Default::default();
        let mut faces = Vec::new();
        for v in 0..self.rot.len() {
            for &u in &self.rot[v] {
                if seen.contains(&(v, u)) {
                    continue;
                }
                let mut face = Vec::new();
                let mut d = (v, u);
                while seen.insert(d) {
                    face.push(d.0);
                    d = self.next_dart(d.0, d.1);
                }
                faces.push(face);
            }
        }
        faces
    }

    pub fn is_connected(&self) -> bool {
        let n = self.rot.len();
        if n == 0 {
            return true;
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for &u in &self.rot[v] {
                if !seen[u] {
                    seen[u] = true;
                    stack.push(u);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    /// Euler genus from V - E + F = 2 - 2g (connected graphs).
    pub fn genus(&self) -> i64 {
        let v = self.num_vertices() as i64;
        let e = self.num_edges() as i64;
        let f = self.faces().len() as i64;
        (2 - (v - e + f)) / 2
    }

    /// Inserts a vertex joined to every corner of a triangular face given by
    /// one of its darts.
    pub fn stack_into(&mut self, a: usize, b: usize) -> usize {
        let (_, c) = self.next_dart(a, b);
        let x = self.rot.len();
        // x goes right after the incoming neighbour at each corner.
        for (corner, before) in [(b, a), (c, b), (a, c)] {
            let i = self.pos(corner, before).expect("face corner");
            self.rot[corner].insert(i + 1, x);
        }
        self.rot.push(vec![a, c, b]);
        x
    }

    pub fn remove_edge(&mut self, u: usize, v: usize) {
        self.rot[u].retain(|&w| w != v);
        self.rot[v].retain(|&w| w != u);
    }
}

/// Σ over vertices and faces of (deg − 4); −8 for every connected plane graph.
pub fn euler_check(g: &PlaneGraph) -> Result<Rational, PlaneError> {
    g.validate()?;
    if !g.is_connected() || g.num_vertices() == 0 {
        return Err(PlaneError::NotClosed);
    }
    let vsum: i64 = g.rot.iter().map(|nb| nb.len() as i64 - 4).sum();
    let fsum: i64 = g.faces().iter().map(|f| f.len() as i64 - 4).sum();
    Ok(Rational::from_int(vsum + fsum))
}

pub fn tetrahedron() -> PlaneGraph {
    let mut g = triangle();
    g.stack_into(0, 1);
    g
}

fn triangle() -> PlaneGraph {
    PlaneGraph::new(vec![vec![1, 2], vec![2, 0], vec![0, 1]])
}

pub fn cube() -> PlaneGraph {
    // Outer square 0..4, inner square 4..8, counter-clockwise drawing.
    PlaneGraph::new(vec![
        vec![1, 4, 3],
        vec![2, 5, 0],
        vec![3, 6, 1],
        vec![0, 7, 2],
        vec![5, 7, 0],
        vec![6, 4, 1],
        vec![7, 5, 2],
        vec![4, 6, 3],
    ])
}

/// Stacked triangulation grown by repeated face insertion.
pub fn random_triangulation<R: Rng>(n: usize, rng: &mut R) -> PlaneGraph {
    let mut g = triangle();
    while g.num_vertices() < n.max(3) {
        let faces = g.faces();
        let f = &faces[rng.gen_range(0..faces.len())];
        g.stack_into(f[0], f[1]);
    }
    g
}

/// Random connected plane graph: a triangulation with random non-bridge
/// edges removed.
pub fn random_plane_graph<R: Rng>(n: usize, removals: usize, rng: &mut R) -> PlaneGraph {
    let mut g = random_triangulation(n, rng);
    let mut done = 0;
    let mut attempts = 0;
    while done < removals && attempts < 20 * removals.max(1) {
        attempts += 1;
        let u = rng.gen_range(0..g.num_vertices());
        if g.rot[u].is_empty() {
            continue;
        }
        let v = g.rot[u][rng.gen_range(0..g.rot[u].len())];
        let mut h = g.clone();
        h.remove_edge(u, v);
        if h.is_connected() {
            g = h;
            done += 1;
        }
    }
    g
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn small_solids() {
        let t = tetrahedron();
        assert_eq!(t.faces().len(), 4);
        assert_eq!(euler_check(&t).unwrap(), Rational::from_int(-8));
        let c = cube();
        assert_eq!(c.faces().len(), 6);
        assert!(c.faces().iter().all(|f| f.len() == 4));
        assert_eq!(euler_check(&c).unwrap(), Rational::from_int(-8));
    }

    #[test]
    fn random_triangulations_satisfy_euler() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for i in 0..50 {
            let g = random_triangulation(4 + i, &mut rng);
            assert_eq!(g.genus(), 0);
            assert!(g.faces().iter().all(|f| f.len() == 3));
            assert_eq!(euler_check(&g).unwrap(), Rational::from_int(-8));
        }
    }

    #[test]
    fn random_plane_graphs_satisfy_euler() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for i in 0..50 {
            let g = random_plane_graph(6 + i % 20, i % 15, &mut rng);
            assert_eq!(euler_check(&g).unwrap(), Rational::from_int(-8));
        }
    }

    #[test]
    fn rejects_bad_input() {
        let g = PlaneGraph::new(vec![vec![1], vec![]]);
        assert!(matches!(euler_check(&g), Err(PlaneError::Asymmetric(0, 1))));
        let g = PlaneGraph::new(vec![vec![1], vec![0], vec![3], vec![2]]);
        assert_eq!(euler_check(&g), Err(PlaneError::NotClosed));
    }
}
