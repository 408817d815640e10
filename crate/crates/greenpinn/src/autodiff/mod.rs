//! Forward-mode second-order jets and a recorded-computation reverse pass.

mod jet;
mod tape;

pub use jet::{jet_binary, jet_seed, jet_unary, Activation, BinaryOp, Jet2, Real, UnaryOp};
pub use tape::{tape_backward, Adjoints, Node, Op, Tape, TapeJet, UnFn};
