use discharge_core::choosability::{
    algorithm_a, compute_inclusion_matrix, is_happy_graph, oracle_choosable, oracle_inclusion,
    ListSizeGraph,
};

/// One representative per isomorphism class of graphs on `n` vertices.
fn graphs(n: usize) -> Vec<Vec<(usize, usize)>> {
    let pairs: Vec<(usize, usize)> =
        (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let perms = permutations(n);
    let mut seen = std::collections::HashSet::new();
    let mut out = Vec::new();
    for bits in 0u32..1 << pairs.len() {
        let edges: Vec<(usize, usize)> = pairs
            .iter()
            .enumerate()
            .filter(|(k, _)| bits >> k & 1 == 1)
            .map(|(_, &e)| e)
            .collect();
        let canon = perms
            .iter()
            .map(|p| {
                let mut e: Vec<(usize, usize)> = edges
                    .iter()
                    .map(|&(a, b)| (p[a].min(p[b]), p[a].max(p[b])))
                    .collect();
                e.sort();
                e
            })
            .min()
            .unwrap();
        if seen.insert(canon) {
            out.push(edges);
        }
    }
    out
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..n {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

fn ell_vectors(n: usize, max: i64) -> Vec<Vec<i64>> {
    let mut out = vec![vec![]];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|v| {
                (0..=max).map(move |x| {
                    let mut w = v.clone();
                    w.push(x);
                    w
                })
            })
            .collect();
    }
    out
}

#[test]
fn graph_classes_counted() {
    let counts: Vec<usize> = (1..=5).map(|n| graphs(n).len()).collect();
    assert_eq!(counts, vec![1, 2, 4, 11, 34]);
}

#[test]
fn heuristic_and_happy_are_sound_on_small_graphs() {
    let mut accepted = 0;
    for n in 1..=5 {
        for edges in graphs(n) {
            for ell in ell_vectors(n, 4) {
                let h = ListSizeGraph::from_edges(&ell, &edges);
                let a = algorithm_a(&h);
                let happy = is_happy_graph(&h, h.ells());
                if a || happy {
                    accepted += 1;
                    assert!(oracle_choosable(&h).unwrap(), "unsound on {edges:?} {ell:?}");
                }
            }
        }
    }
    assert!(accepted > 1000);
}

#[test]
fn matrix_entries_satisfy_contract() {
    let mut checked = 0;
    for n in 2..=4 {
        for edges in graphs(n) {
            for ell in ell_vectors(n, 3) {
                let h = ListSizeGraph::from_edges(&ell, &edges);
                let m = compute_inclusion_matrix(&h);
                for (u, v) in m.entries() {
                    checked += 1;
                    assert!(
                        oracle_inclusion(&h, u, v).unwrap(),
                        "M({u},{v}) wrong on {edges:?} {ell:?}"
                    );
                }
            }
        }
    }
    assert!(checked > 100);
}
