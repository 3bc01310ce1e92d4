//! Approximating the minimal lookahead in omega-regular delay games.
//!
//! The winning condition is a deterministic parity automaton ([`Dpa`]) over
//! pairs of input and output letters. [`approx_min_lookahead`] scans the
//! abstract games built from behavior-function layers and reports `2k* - 1`
//! for the least winning `k*`, which is at most twice the optimal lookahead.
//! [`exact_min_lookahead`] solves the explicit queue games for small `k` and
//! serves as the reference oracle.

pub mod arena;
pub mod automaton;
pub mod error;
pub mod lookahead;
pub mod parity_solver;
pub mod tracking;

pub use arena::{build_abstract_game, build_queue_game, export_pg, ParityGame, Player};
pub use automaton::{parse_dpa, serialize_dpa, Dpa, LassoWord, Letter, Symbol};
pub use error::{Error, Result};
pub use lookahead::{
    approx_min_lookahead, compare, exact_min_lookahead, k_max, ApproxOptions, LookaheadReport,
};
pub use parity_solver::{solve_parity, Solution};
pub use tracking::{LayerSequence, TrackedSet, TrackedState};
