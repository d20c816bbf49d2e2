//! The polytope of shift-invariant block-frequency vectors, exact membership
//! tests, vertices as simple cycles, rational targets, and Markov measures.

mod lp;
mod markov;
mod polytope;

pub use lp::feasible_point;
pub use markov::{entropy, parry_measure, MarkovMeasure};
pub use polytope::{
    enumerate_rational_targets, invariant_polytope, is_in_spectrum, letter_frequency_spread,
    polytope_vertices, InvariantPolytope, LetterSpread, LinearConstraint,
    RationalTargetEnumeration, Vertex, CYCLE_CAP, TARGET_CANDIDATE_CAP, VERTEX_DIMENSION_CAP,
};
