//! Exact orthogonality predicates for integer frequencies.
//!
//! Two exponentials are orthogonal in `L^2(mu)` exactly when the transform of
//! the measure vanishes at their frequency difference. For integer
//! frequencies this is decidable in exact arithmetic: the infinite product
//! form of the transform vanishes iff one factor does, and a factor at
//! `k / N^j` vanishes iff `e(k / N^j)` is a root of the digit polynomial,
//! which reduces to a p-adic valuation test against the exponent set `T`.
//!
//! The module also hosts the Hadamard-triple checks (exact and numeric), the
//! enumeration of admissible child-label sets, the ratio-closed root-set
//! brute force behind the branching bound, and a greedy windowed completion
//! that realizes maximal orthogonal sets inside a finite range.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::expansion::{expand, FrequencySet};
use crate::system::{is_prime, CantorSystem};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OrthogonalityError {
    #[error("label set has {got} elements, digit set has {expected}")]
    SizeMismatch { expected: usize, got: usize },
    #[error("label {label} out of range for base {base}")]
    LabelOutOfRange { label: u32, base: u64 },
    #[error("label {0} repeated")]
    DuplicateLabel(u32),
    #[error("seed is not orthogonal: pair ({a}, {b})")]
    SeedNotOrthogonal { a: BigInt, b: BigInt },
    #[error("seed element {element} exceeds the window bound {bound}")]
    SeedOutsideWindow { element: BigInt, bound: u64 },
    #[error("frequency set has base {set_base} but the system has base {system_base}")]
    BaseMismatch { set_base: u64, system_base: u64 },
    #[error("profile depth must be at least 1")]
    ZeroDepth,
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("beta exponents must be distinct and positive")]
    InvalidBetas,
    #[error("instance too large: {detail}")]
    InstanceTooLarge { detail: String },
}

/// p-adic valuation of a nonzero big integer.
fn padic_valuation_big(k: &BigInt, p: u64) -> u64 {
    debug_assert!(!k.is_zero());
    if p == 2 {
        return k.trailing_zeros().expect("nonzero");
    }
    let p = BigInt::from(p);
    let mut v = 0u64;
    let mut current = k.abs();
    loop {
        let (q, r) = num_integer::Integer::div_rem(&current, &p);
        if !r.is_zero() {
            return v;
        }
        current = q;
        v += 1;
    }
}

fn valuation_hits_zero_set(system: &CantorSystem, v: u64) -> bool {
    let alpha = system.alpha() as u64;
    // mu_hat vanishes at k iff some factor does: alpha * j = v + t for some
    // j >= 1 and t in T.
    system
        .t_exponents()
        .iter()
        .any(|&t| (v + t as u64).is_multiple_of(alpha) && v + t as u64 >= alpha)
}

/// Whether the transform of the measure vanishes at the integer `k`.
/// `k = 0` gives the total mass 1, never zero.
pub fn mu_hat_is_zero(system: &CantorSystem, k: &BigInt) -> bool {
    if k.is_zero() {
        return false;
    }
    valuation_hits_zero_set(system, padic_valuation_big(k, system.p()))
}

fn mu_hat_is_zero_i128(system: &CantorSystem, k: i128) -> bool {
    if k == 0 {
        return false;
    }
    let mut x = k.unsigned_abs();
    let p = system.p() as u128;
    let mut v = 0u64;
    while x.is_multiple_of(p) {
        x /= p;
        v += 1;
    }
    valuation_hits_zero_set(system, v)
}

/// Whether `e_a` and `e_b` are orthogonal in `L^2(mu)`.
pub fn are_orthogonal(system: &CantorSystem, a: &BigInt, b: &BigInt) -> bool {
    a != b && mu_hat_is_zero(system, &(a - b))
}

/// The lexicographically first non-orthogonal pair of distinct elements, if any.
pub fn first_non_orthogonal_pair(
    system: &CantorSystem,
    set: &FrequencySet,
) -> Result<Option<(BigInt, BigInt)>, OrthogonalityError> {
    check_base(system, set)?;
    let elems: Vec<&BigInt> = set.iter().collect();
    for i in 0..elems.len() {
        for j in i + 1..elems.len() {
            if !mu_hat_is_zero(system, &(elems[i] - elems[j])) {
                return Ok(Some((elems[i].clone(), elems[j].clone())));
            }
        }
    }
    Ok(None)
}

/// Whether every pair of distinct elements is orthogonal.
pub fn is_orthogonal_family(
    system: &CantorSystem,
    set: &FrequencySet,
) -> Result<bool, OrthogonalityError> {
    Ok(first_non_orthogonal_pair(system, set)?.is_none())
}

fn check_base(system: &CantorSystem, set: &FrequencySet) -> Result<(), OrthogonalityError> {
    if set.base() != system.base() {
        return Err(OrthogonalityError::BaseMismatch {
            set_base: set.base(),
            system_base: system.base(),
        });
    }
    Ok(())
}

/// Observed next digits of the elements sharing one digit prefix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BranchRecord {
    pub prefix: Vec<u32>,
    pub digits: BTreeSet<u32>,
    pub within_bound: bool,
}

impl BranchRecord {
    pub fn count(&self) -> usize {
        self.digits.len()
    }
}

/// Branching counts of a frequency set, grouped by digit prefix and compared
/// against the universal bound `p^|T|`.
#[derive(Debug, Clone)]
pub struct BranchingProfile {
    records: Vec<BranchRecord>,
    bound: u64,
}

impl BranchingProfile {
    /// Records ordered by (prefix length, prefix).
    pub fn records(&self) -> &[BranchRecord] {
        &self.records
    }

    pub fn bound(&self) -> u64 {
        self.bound
    }

    pub fn max_count(&self) -> usize {
        self.records.iter().map(|r| r.count()).max().unwrap_or(0)
    }

    pub fn all_within_bound(&self) -> bool {
        self.records.iter().all(|r| r.within_bound)
    }

    /// The record for one exact prefix, if that prefix is populated.
    pub fn record_for(&self, prefix: &[u32]) -> Option<&BranchRecord> {
        self.records.iter().find(|r| r.prefix == prefix)
    }
}

/// For every populated digit prefix of length `n < depth`, collect the set of
/// observed `n`-th digits.
pub fn branching_profile(
    system: &CantorSystem,
    set: &FrequencySet,
    depth: u32,
) -> Result<BranchingProfile, OrthogonalityError> {
    check_base(system, set)?;
    if depth == 0 {
        return Err(OrthogonalityError::ZeroDepth);
    }
    let bound = system.branching_bound();
    let expansions: Vec<_> = set
        .iter()
        .map(|k| expand(k, system.base()).expect("validated base"))
        .collect();
    let mut groups: std::collections::BTreeMap<Vec<u32>, BTreeSet<u32>> =
        std::collections::BTreeMap::new();
    for e in &expansions {
        let mut prefix = Vec::new();
        for n in 0..depth as usize {
            groups.entry(prefix.clone()).or_default().insert(e.digit(n));
            prefix.push(e.digit(n));
        }
    }
    let mut records: Vec<BranchRecord> = groups
        .into_iter()
        .map(|(prefix, digits)| {
            let within_bound = digits.len() as u64 <= bound;
            BranchRecord {
                prefix,
                digits,
                within_bound,
            }
        })
        .collect();
    records.sort_by(|a, b| (a.prefix.len(), &a.prefix).cmp(&(b.prefix.len(), &b.prefix)));
    Ok(BranchingProfile { records, bound })
}

/// How a Hadamard triple is tested.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HadamardCheckMode {
    /// Admissibility of every pairwise label difference, in exact arithmetic.
    Exact,
    /// Unitarity of the scaled exponential matrix, in floating point.
    Numeric,
}

/// Tolerance for the numeric unitarity check.
pub const UNITARITY_TOLERANCE: f64 = 1e-10;

/// A candidate label set `L` for the triple `(N, D, L)`.
#[derive(Debug, Clone)]
pub struct HadamardCandidate<'a> {
    system: &'a CantorSystem,
    labels: Vec<u32>,
}

impl<'a> HadamardCandidate<'a> {
    /// Requires `|L| = |D|` with distinct labels in `[0, N)`.
    pub fn new(system: &'a CantorSystem, labels: &[u32]) -> Result<Self, OrthogonalityError> {
        if labels.len() != system.digit_count() {
            return Err(OrthogonalityError::SizeMismatch {
                expected: system.digit_count(),
                got: labels.len(),
            });
        }
        let mut sorted = labels.to_vec();
        sorted.sort_unstable();
        for pair in sorted.windows(2) {
            if pair[0] == pair[1] {
                return Err(OrthogonalityError::DuplicateLabel(pair[0]));
            }
        }
        for &l in &sorted {
            if l as u64 >= system.base() {
                return Err(OrthogonalityError::LabelOutOfRange {
                    label: l,
                    base: system.base(),
                });
            }
        }
        Ok(HadamardCandidate {
            system,
            labels: sorted,
        })
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn check(&self, mode: HadamardCheckMode) -> bool {
        match mode {
            HadamardCheckMode::Exact => self.check_exact(),
            HadamardCheckMode::Numeric => self.unitarity_defect() < UNITARITY_TOLERANCE,
        }
    }

    /// Every pairwise difference of labels must be admissible.
    pub fn check_exact(&self) -> bool {
        for (i, &a) in self.labels.iter().enumerate() {
            for &b in &self.labels[i + 1..] {
                let delta = b as i64 - a as i64;
                if !self
                    .system
                    .admissible_label_difference(delta)
                    .expect("labels validated in range")
                {
                    return false;
                }
            }
        }
        true
    }

    /// Max absolute entry of `M* M - I` for the matrix with entries
    /// `e(d * l / N) / sqrt(|D|)`.
    pub fn unitarity_defect(&self) -> f64 {
        let m = self.labels.len();
        let n = self.system.base() as f64;
        let scale = 1.0 / (m as f64).sqrt();
        let matrix: Vec<Vec<Complex64>> = self
            .system
            .digits()
            .iter()
            .map(|&d| {
                self.labels
                    .iter()
                    .map(|&l| {
                        let angle = 2.0 * std::f64::consts::PI * (d as f64) * (l as f64) / n;
                        Complex64::new(angle.cos(), angle.sin()) * scale
                    })
                    .collect()
            })
            .collect();
        let mut defect: f64 = 0.0;
        for i in 0..m {
            for j in 0..m {
                let mut entry = Complex64::new(0.0, 0.0);
                for row in &matrix {
                    entry += row[i].conj() * row[j];
                }
                let expected = if i == j { 1.0 } else { 0.0 };
                defect = defect.max((entry - expected).norm());
            }
        }
        defect
    }
}

/// All admissible label sets of a system, or a diagnostic when the
/// cyclotomic-product hypothesis fails.
#[derive(Debug, Clone)]
pub struct HadamardEnumeration {
    pub sets: Vec<Vec<u32>>,
    /// The enumeration stopped at a caller-imposed cap before exhausting the
    /// search space.
    pub truncated: bool,
    pub diagnostic: Option<String>,
}

/// Enumerate every `L` in `[0, N)` with `|L| = |D|` whose pairwise
/// differences are all admissible, in lexicographic order.
///
/// Without the cyclotomic-product hypothesis such label sets no longer
/// describe the child sets of maximal orthogonal families, so the enumeration
/// is skipped and a diagnostic returned instead.
pub fn enumerate_hadamard_label_sets(system: &CantorSystem) -> HadamardEnumeration {
    enumerate_label_sets_inner(system, None)
}

/// Like [`enumerate_hadamard_label_sets`] but stopping after `limit` sets;
/// `truncated` is set when more sets remained.
pub fn enumerate_hadamard_label_sets_capped(
    system: &CantorSystem,
    limit: usize,
) -> HadamardEnumeration {
    enumerate_label_sets_inner(system, Some(limit))
}

fn enumerate_label_sets_inner(system: &CantorSystem, limit: Option<usize>) -> HadamardEnumeration {
    if !system.is_cyclotomic_product() {
        return HadamardEnumeration {
            sets: Vec::new(),
            truncated: false,
            diagnostic: Some(
                "digit polynomial is not an exact product of p-power cyclotomics; \
                 label-set enumeration requires that hypothesis"
                    .into(),
            ),
        };
    }
    let base = system.base() as usize;
    let want = system.digit_count();
    let admissible: Vec<bool> = (0..base)
        .map(|delta| {
            delta != 0
                && system
                    .admissible_label_difference(delta as i64)
                    .expect("in range")
        })
        .collect();
    let mut sets = Vec::new();
    let mut chosen: Vec<u32> = Vec::with_capacity(want);
    // returns true when the cap was hit
    fn dfs(
        start: usize,
        base: usize,
        want: usize,
        limit: Option<usize>,
        admissible: &[bool],
        chosen: &mut Vec<u32>,
        sets: &mut Vec<Vec<u32>>,
    ) -> bool {
        if chosen.len() == want {
            if limit.is_some_and(|cap| sets.len() >= cap) {
                return true;
            }
            sets.push(chosen.clone());
            return false;
        }
        // not enough labels left to finish the set
        let needed = want - chosen.len();
        for label in start..base {
            if base - label < needed {
                break;
            }
            if chosen.iter().all(|&prev| admissible[label - prev as usize]) {
                chosen.push(label as u32);
                let capped = dfs(label + 1, base, want, limit, admissible, chosen, sets);
                chosen.pop();
                if capped {
                    return true;
                }
            }
        }
        false
    }
    let truncated = dfs(0, base, want, limit, &admissible, &mut chosen, &mut sets);
    HadamardEnumeration {
        sets,
        truncated,
        diagnostic: None,
    }
}

/// Guard for the ratio-closed brute force.
pub const MAX_BETA_COUNT: usize = 3;
pub const MAX_ROOT_ORDER: u64 = 64;

/// Maximum size of a set of roots of `(x - 1) * prod_j Phi_{p^beta_j}` whose
/// pairwise ratios are all roots again.
///
/// Roots are `e(a / p^B)` for the maximal exponent `B`; they are represented
/// by the exact residues `a`, so ratio membership is a set lookup, and the
/// search is a branch-and-bound maximum clique over at most 64 residues.
pub fn max_ratio_closed_subset_size(p: u64, betas: &[u32]) -> Result<usize, OrthogonalityError> {
    if !is_prime(p) {
        return Err(OrthogonalityError::NotPrime(p));
    }
    let mut sorted = betas.to_vec();
    sorted.sort_unstable();
    if sorted.contains(&0) || sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(OrthogonalityError::InvalidBetas);
    }
    if sorted.len() > MAX_BETA_COUNT {
        return Err(OrthogonalityError::InstanceTooLarge {
            detail: format!(
                "{} beta exponents, guard allows {MAX_BETA_COUNT}",
                sorted.len()
            ),
        });
    }
    let max_beta = sorted.last().copied().unwrap_or(0);
    let modulus = (p as u128)
        .checked_pow(max_beta)
        .filter(|&m| m <= MAX_ROOT_ORDER as u128);
    let modulus = modulus.ok_or_else(|| OrthogonalityError::InstanceTooLarge {
        detail: format!("p^max(beta) = {p}^{max_beta} exceeds the guard {MAX_ROOT_ORDER}"),
    })? as u64;

    // Residues a with e(a / p^B) a root of F: 0 (the root 1) plus, for each
    // beta, the residues k * p^(B - beta) with p not dividing k.
    let mut residues: BTreeSet<u64> = BTreeSet::new();
    residues.insert(0);
    for &beta in &sorted {
        let order = p.pow(beta);
        let stride = modulus / order;
        for k in 1..order {
            if k % p != 0 {
                residues.insert(k * stride);
            }
        }
    }
    let roots: Vec<u64> = residues.iter().copied().collect();
    let index_of = |a: u64| roots.binary_search(&a).ok();
    let count = roots.len();
    assert!(count <= 64, "guard keeps the root count within one bitmask");

    let mut adjacency = vec![0u64; count];
    for i in 0..count {
        for j in 0..count {
            if i == j {
                continue;
            }
            let diff = (roots[i] + modulus - roots[j]) % modulus;
            if index_of(diff).is_some() {
                adjacency[i] |= 1 << j;
            }
        }
    }

    fn search(adjacency: &[u64], candidates: u64, size: usize, best: &mut usize) {
        if size + candidates.count_ones() as usize <= *best {
            return;
        }
        if candidates == 0 {
            *best = (*best).max(size);
            return;
        }
        let mut rest = candidates;
        while rest != 0 {
            if size + rest.count_ones() as usize <= *best {
                return;
            }
            let v = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            search(adjacency, rest & adjacency[v], size + 1, best);
        }
        *best = (*best).max(size);
    }

    let mut best = 1; // the singleton {1} is always ratio-closed
    let all = if count == 64 {
        u64::MAX
    } else {
        (1u64 << count) - 1
    };
    search(&adjacency, all, 0, &mut best);
    Ok(best)
}

/// Greedily extend `seed` to a set that is maximal among the integers of
/// `[-bound, bound]`: scan by increasing absolute value (positive first) and
/// add every integer orthogonal to all current members.
pub fn greedy_maximal_completion(
    system: &CantorSystem,
    seed: &FrequencySet,
    bound: u64,
) -> Result<FrequencySet, OrthogonalityError> {
    check_base(system, seed)?;
    if let Some((a, b)) = first_non_orthogonal_pair(system, seed)? {
        return Err(OrthogonalityError::SeedNotOrthogonal { a, b });
    }
    for k in seed.iter() {
        if k.abs() > BigInt::from(bound) {
            return Err(OrthogonalityError::SeedOutsideWindow {
                element: k.clone(),
                bound,
            });
        }
    }
    // Window elements fit in i128 (bound is u64); scan there for speed.
    let mut members: Vec<i128> = seed
        .iter()
        .map(|k| k.to_i128().expect("bounded by u64"))
        .collect();
    let mut in_set: BTreeSet<i128> = members.iter().copied().collect();
    let bound = bound as i128;
    let consider = |k: i128, members: &mut Vec<i128>, in_set: &mut BTreeSet<i128>| {
        if in_set.contains(&k) {
            return;
        }
        if members.iter().all(|&m| mu_hat_is_zero_i128(system, k - m)) {
            members.push(k);
            in_set.insert(k);
        }
    };
    consider(0, &mut members, &mut in_set);
    for magnitude in 1..=bound {
        consider(magnitude, &mut members, &mut in_set);
        consider(-magnitude, &mut members, &mut in_set);
    }
    Ok(
        FrequencySet::new(system.base(), members.into_iter().map(BigInt::from))
            .expect("system base is always >= 2"),
    )
}
