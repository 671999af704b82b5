//! Shared inputs for the benchmarks.

use std::path::{Path, PathBuf};

use discharge_core::fragments::PlaneFragment;
use discharge_core::prover::{load_entries, CEntry};

pub fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

pub fn fragment(name: &str) -> PlaneFragment {
    let p = fixtures().join(format!("fragments/{name}.frag"));
    PlaneFragment::parse(&std::fs::read_to_string(p).expect("fixture")).expect("fixture parses")
}

pub fn fixture_c() -> Vec<CEntry> {
    load_entries(&fixtures().join("c")).expect("fixture C")
}
