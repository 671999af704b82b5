//! The proof loop: sessions, reduction evidence, proof bundles.

pub mod bundle;
pub mod evidence;
pub mod session;

use sha2::{Digest, Sha256};

use crate::choosability::ChoosabilityError;
use crate::fragments::FragmentError;
use crate::lp::LpError;
use crate::words::WordError;

pub use bundle::{export_proof, replay_bundle, BundleReport};
pub use evidence::{attempt_reduce, replay, Evidence, Method, ReduceFailure, ReduceOptions};
pub use session::{
    batch_reduce, derive_fragment_patterns, generate_d, library_request, load_entries, BatchResult, CEntry, CommitRequest, Justification,
    Outcome, RoundOutcome, RoundRecord, Session, SessionLock, Status,
};

#[derive(Debug, thiserror::Error)]
pub enum ProverError {
    #[error("evidence replay failed: {0}")]
    EvidenceReplayFailed(String),
    #[error("pattern {0} is not implied by the fragment")]
    PatternUnsound(String),
    #[error("not proven: {0}")]
    NotProven(String),
    #[error("invalid request: {0}")]
    Invalid(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("manifest mismatch for {0}")]
    ManifestMismatch(String),
    #[error("session is locked by another writer")]
    Locked,
    #[error(transparent)]
    Fragment(#[from] FragmentError),
    #[error(transparent)]
    Choosability(#[from] ChoosabilityError),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Word(#[from] WordError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}
