use std::path::Path;

use discharge_core::choosability::{algorithm_a, ListSizeGraph};
use discharge_core::fragments::{build_reduction_problem, PlaneFragment};

fn fixture(name: &str) -> PlaneFragment {
    let p = Path::new(env!("CARGO_MANIFEST_DIR")).join(format!("../../fixtures/{name}.frag"));
    PlaneFragment::parse(&std::fs::read_to_string(p).unwrap()).unwrap()
}

fn colourable(h: &ListSizeGraph, lists: &[Vec<u32>]) -> bool {
    fn go(h: &ListSizeGraph, lists: &[Vec<u32>], col: &mut Vec<u32>) -> bool {
        let v = col.len();
        if v == lists.len() {
            return true;
        }
        for &c in &lists[v] {
            if (0..v).all(|u| !h.adjacent(u, v) || col[u] != c) {
                col.push(c);
                if go(h, lists, col) {
                    return true;
                }
                col.pop();
            }
        }
        false
    }
    go(h, lists, &mut Vec::new())
}

#[test]
fn h24_worst_case_lists_are_not_choosable() {
    let p = build_reduction_problem(&fixture("fragments/h24"), 12).unwrap();
    let h = &p.graph;
    assert!(!algorithm_a(h));
    let idx = |n: &str| (0..h.len()).find(|&i| h.name(i) == n).unwrap();
    // residual lists once c' takes 4 and bc takes 5
    let residual: [(&str, &[u32]); 7] = [
        ("a", &[0, 1, 2, 3]),
        ("b", &[0, 1, 2, 3]),
        ("c", &[0, 2, 3]),
        ("d", &[0, 1, 3]),
        ("e", &[0, 1, 2, 3]),
        ("ab", &[2, 3]),
        ("de", &[1, 2]),
    ];
    let mut lists = vec![Vec::new(); h.len()];
    for (n, l) in residual {
        lists[idx(n)] = l.to_vec();
    }
    let (cp, bc) = (idx("c'"), idx("bc"));
    lists[cp] = vec![4];
    lists[bc] = vec![4, 5];
    for v in 0..h.len() {
        if v != cp && v != bc {
            if h.adjacent(v, cp) {
                lists[v].push(4);
            }
            if h.adjacent(v, bc) {
                lists[v].push(5);
            }
        }
        assert_eq!(lists[v].len() as i64, h.ell(v), "list of {}", h.name(v));
    }
    assert!(!colourable(h, &lists));
}

#[test]
fn pair_demo_needs_the_merge() {
    let p = build_reduction_problem(&fixture("demo/pair-octagon"), 12).unwrap();
    assert_eq!(p.graph.ells(), vec![2, 2, 2, 2]);
    assert!(!algorithm_a(&p.graph));
    assert_eq!(p.pairs.len(), 1);
}
