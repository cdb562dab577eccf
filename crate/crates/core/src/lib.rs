//! Succession rules for C-finite sequences.
//!
//! A linear recurrence with constant integer coefficients is compiled into
//! a succession rule whose generating tree has `f_n` nodes at level `n`,
//! first with jumps and marked labels, then jump-free, and finally (when a
//! positivity witness exists) as an ordinary rule. The tree engine counts
//! levels exactly with signed multisets.

pub mod cli;
pub mod compiler;
pub mod error;
pub mod numseq;
pub mod parametric;
pub mod rule;
pub(crate) mod serde_big;
pub mod tree;

pub use compiler::{
    compile, compile_generic, eliminate_jumps, positivity_check, qr_for, slack, to_extended_rule,
    to_ordinary_rule, verify, Positivity, PositivityWitness, QrDecomposition, Stage,
};
pub use error::{Error, Result};
pub use numseq::{eval_sequence, generating_function, Inits, RationalGF, Recurrence};
pub use parametric::{expand_parametric, holonomic_to_level_indexed, parse_parametric, ParametricRule};
pub use rule::{parse_rule, print_rule, Branch, Label, Production, RuleKind, SuccessionRule};
pub use tree::{expand, level_totals, production_matrix, LevelProfile};
