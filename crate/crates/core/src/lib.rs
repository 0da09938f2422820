//! Exact and numeric tools for maximal orthogonal exponential frequency sets
//! of self-similar Cantor measures with prime-power contraction base.
//!
//! The measure is determined by a base `N = p^alpha` and a digit set `D` in
//! distinct residue classes modulo `N`. Orthogonality of exponentials in
//! `L^2(mu)` reduces to zeros of the transform of the measure, and for
//! integer frequencies those zeros are decided exactly through cyclotomic
//! divisibility of the digit polynomial ([`polyarith`], [`system`]).
//! Orthogonal sets arrange into digit trees with a universal branching bound
//! ([`orthogonality`]), maximal sets branch fully and correspond to spectral
//! labelings of the `|D|`-homogeneous rooted tree ([`trees`]), and a
//! truncated-product evaluation of the transform with a rigorous tail bound
//! ([`numeric`]) cross-checks the exact predicates.

pub mod expansion;
pub mod numeric;
pub mod orthogonality;
pub mod polyarith;
pub mod system;
pub mod trees;

pub use expansion::{collapse, digit_at, expand, DigitExpansion, FrequencySet, Tail};
pub use orthogonality::{
    are_orthogonal, branching_profile, enumerate_hadamard_label_sets,
    enumerate_hadamard_label_sets_capped, greedy_maximal_completion, is_orthogonal_family,
    max_ratio_closed_subset_size, mu_hat_is_zero, BranchingProfile, HadamardCandidate,
    HadamardCheckMode,
};
pub use polyarith::{cyclotomic, poly_from_digit_set, IntPolynomial};
pub use system::{CantorSystem, SystemError};
pub use trees::{
    canonical_labeling, check_branching_exactness, enumerate_labelings, labeling_at_index,
    lambda_of_labeling, validate_labeling, LabelingBuilder, SpectralLabeling,
};
