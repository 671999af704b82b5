pub mod choosability;
pub mod fragments;
pub mod lp;
pub mod plane;
pub mod prover;
pub mod rational;
pub mod rules;
pub mod structure;
pub mod transit;
pub mod words;

pub use rational::Rational;
pub use words::{ConfigWord, Pattern, SlotValue, WordKind};
