//! Validated Cantor-measure systems.
//!
//! A [`CantorSystem`] bundles a prime `p`, exponent `alpha`, the base
//! `N = p^alpha`, and a digit set `D` in distinct residue classes modulo `N`.
//! Construction derives the exponent set `T` (orders `p^t` whose cyclotomic
//! polynomial divides the digit polynomial) and two structural flags that gate
//! the stronger guarantees: whether the digit polynomial is exactly the
//! product of those cyclotomics, and whether its unit-circle roots are
//! exhausted by them.

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::polyarith::{
    cyclotomic, divides, exact_div, poly_from_digit_set, self_reciprocal_part, IntPolynomial,
    PolyError,
};

/// Largest admissible base `N = p^alpha`.
pub const MAX_BASE: u64 = 1_000_000;
/// Largest admissible digit value.
pub const MAX_DIGIT: u64 = 10_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SystemError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("alpha must be at least 1")]
    AlphaZero,
    #[error("digit set is empty")]
    EmptyDigitSet,
    #[error("digit {0} is negative")]
    NegativeDigit(i64),
    #[error("digit {digit} exceeds the configured cap {cap}")]
    DigitTooLarge { digit: u64, cap: u64 },
    #[error("base {p}^{alpha} exceeds the configured cap {cap}")]
    BaseTooLarge { p: u64, alpha: u32, cap: u64 },
    #[error("digits {a} and {b} collide in residue class {residue} modulo {base}")]
    ResidueCollision {
        a: u64,
        b: u64,
        residue: u64,
        base: u64,
    },
    #[error("label difference must be nonzero")]
    ZeroLabelDifference,
    #[error("label difference {delta} out of range for base {base}")]
    LabelDifferenceOutOfRange { delta: i64, base: u64 },
    #[error("polynomial arithmetic failed: {0}")]
    Poly(#[from] PolyError),
    #[error("invalid serialized system: {0}")]
    Deserialize(String),
}

/// Deterministic trial-division primality test; inputs are capped well below
/// the point where this matters.
pub(crate) fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n.is_multiple_of(2) {
        return n == 2;
    }
    let mut d = 3;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

/// p-adic valuation of a nonzero `u64`.
pub(crate) fn padic_valuation_u64(mut x: u64, p: u64) -> u32 {
    debug_assert!(x != 0 && p >= 2);
    let mut v = 0;
    while x.is_multiple_of(p) {
        x /= p;
        v += 1;
    }
    v
}

/// A validated `(p, alpha, N, D)` bundle with its derived set `T` and flags.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CantorSystem {
    p: u64,
    alpha: u32,
    base: u64,
    digits: Vec<u64>,
    t_exponents: Vec<u32>,
    digit_poly: IntPolynomial,
    is_cyclotomic_product: bool,
    circle_hypothesis: bool,
}

impl CantorSystem {
    /// Validate the inputs and derive `T` and the hypothesis flags.
    pub fn new(p: u64, alpha: u32, digits: &[i64]) -> Result<Self, SystemError> {
        if !is_prime(p) {
            return Err(SystemError::NotPrime(p));
        }
        if alpha == 0 {
            return Err(SystemError::AlphaZero);
        }
        let base = (p as u128)
            .checked_pow(alpha)
            .filter(|&b| b <= MAX_BASE as u128)
            .map(|b| b as u64)
            .ok_or(SystemError::BaseTooLarge {
                p,
                alpha,
                cap: MAX_BASE,
            })?;
        if digits.is_empty() {
            return Err(SystemError::EmptyDigitSet);
        }
        let mut checked: Vec<u64> = Vec::with_capacity(digits.len());
        for &d in digits {
            if d < 0 {
                return Err(SystemError::NegativeDigit(d));
            }
            let d = d as u64;
            if d > MAX_DIGIT {
                return Err(SystemError::DigitTooLarge {
                    digit: d,
                    cap: MAX_DIGIT,
                });
            }
            checked.push(d);
        }
        checked.sort_unstable();
        let mut by_residue = std::collections::HashMap::new();
        for &d in &checked {
            if let Some(&prev) = by_residue.get(&(d % base)) {
                return Err(SystemError::ResidueCollision {
                    a: prev,
                    b: d,
                    residue: d % base,
                    base,
                });
            }
            by_residue.insert(d % base, d);
        }

        let digit_poly =
            poly_from_digit_set(&checked.iter().map(|&d| d as i64).collect::<Vec<_>>())?;
        let mut t_exponents = Vec::new();
        let mut cyclotomic_product = IntPolynomial::one();
        for t in 1..=alpha {
            let phi = cyclotomic(p.pow(t))?;
            if divides(&phi, &digit_poly)? {
                t_exponents.push(t);
                cyclotomic_product = cyclotomic_product.mul(&phi);
            }
        }
        let is_cyclotomic_product = digit_poly == cyclotomic_product;

        // p^|T| divides |D| because the product of the Phi_{p^t} divides P_D;
        // a violation here is an arithmetic bug, not bad input.
        let branching_bound = p.pow(t_exponents.len() as u32);
        assert!(
            branching_bound <= checked.len() as u64,
            "branching bound exceeds digit count"
        );

        let circle_hypothesis = if is_cyclotomic_product {
            true
        } else {
            let quotient = exact_div(&digit_poly, &cyclotomic_product)?;
            Self::quotient_has_only_known_circle_roots(&quotient, p, &t_exponents)?
        };

        Ok(CantorSystem {
            p,
            alpha,
            base,
            digits: checked,
            t_exponents,
            digit_poly,
            is_cyclotomic_product,
            circle_hypothesis,
        })
    }

    /// The circle hypothesis holds when the self-reciprocal part of the
    /// quotient `P_D / prod Phi_{p^t}` is, up to an `x^k` factor, itself a
    /// product of `Phi_{p^t}` with `t` in `T`: divide those out repeatedly and
    /// require a constant to remain.
    fn quotient_has_only_known_circle_roots(
        quotient: &IntPolynomial,
        p: u64,
        t_exponents: &[u32],
    ) -> Result<bool, SystemError> {
        let mut part = self_reciprocal_part(&quotient.strip_x_power())?;
        loop {
            if part.is_constant() {
                return Ok(true);
            }
            let mut reduced = false;
            for &t in t_exponents {
                let phi = cyclotomic(p.pow(t))?;
                while divides(&phi, &part)? {
                    part = exact_div(&part, &phi)?;
                    reduced = true;
                }
            }
            if !reduced {
                return Ok(false);
            }
        }
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn alpha(&self) -> u32 {
        self.alpha
    }

    /// The expansion base `N = p^alpha`.
    pub fn base(&self) -> u64 {
        self.base
    }

    /// The sorted digit set `D`.
    pub fn digits(&self) -> &[u64] {
        &self.digits
    }

    /// `m = |D|`.
    pub fn digit_count(&self) -> usize {
        self.digits.len()
    }

    /// The sorted exponents `t` in `[1, alpha]` with `Phi_{p^t}` dividing the
    /// digit polynomial.
    pub fn t_exponents(&self) -> &[u32] {
        &self.t_exponents
    }

    /// `p^|T|`, the universal bound on branching counts of orthogonal sets.
    pub fn branching_bound(&self) -> u64 {
        self.p.pow(self.t_exponents.len() as u32)
    }

    /// The digit polynomial `P_D`.
    pub fn digit_poly(&self) -> &IntPolynomial {
        &self.digit_poly
    }

    /// Whether `P_D` equals the product of the `Phi_{p^t}` over `T` exactly.
    pub fn is_cyclotomic_product(&self) -> bool {
        self.is_cyclotomic_product
    }

    /// Whether every unit-circle root of `P_D` is a root of some `Phi_{p^t}`
    /// with `t` in `T`.
    pub fn circle_hypothesis(&self) -> bool {
        self.circle_hypothesis
    }

    /// Whether two labels `l, l'` with `delta = l - l'` can appear among the
    /// children of one tree node: `e(delta / N)` must be a root of the digit
    /// polynomial, which happens exactly when `alpha - v_p(delta)` lies in `T`.
    pub fn admissible_label_difference(&self, delta: i64) -> Result<bool, SystemError> {
        if delta == 0 {
            return Err(SystemError::ZeroLabelDifference);
        }
        let abs = delta.unsigned_abs();
        if abs >= self.base {
            return Err(SystemError::LabelDifferenceOutOfRange {
                delta,
                base: self.base,
            });
        }
        let v = padic_valuation_u64(abs, self.p);
        // |delta| < p^alpha forces v < alpha, so alpha - v is in [1, alpha].
        Ok(self.t_exponents.contains(&(self.alpha - v)))
    }
}

#[derive(Serialize, Deserialize)]
struct SystemRepr {
    p: u64,
    alpha: u32,
    #[serde(rename = "N")]
    base: u64,
    #[serde(rename = "D")]
    digits: Vec<u64>,
    #[serde(rename = "T")]
    t_exponents: Vec<u32>,
    is_cyclotomic_product: bool,
    circle_hypothesis: bool,
}

impl Serialize for CantorSystem {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        SystemRepr {
            p: self.p,
            alpha: self.alpha,
            base: self.base,
            digits: self.digits.clone(),
            t_exponents: self.t_exponents.clone(),
            is_cyclotomic_product: self.is_cyclotomic_product,
            circle_hypothesis: self.circle_hypothesis,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for CantorSystem {
    /// Rebuilds the system from `(p, alpha, D)` and cross-checks the stored
    /// derived fields, so hand-edited files cannot smuggle in wrong flags.
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let repr = SystemRepr::deserialize(deserializer)?;
        let digits: Vec<i64> = repr.digits.iter().map(|&d| d as i64).collect();
        let system = CantorSystem::new(repr.p, repr.alpha, &digits)
            .map_err(|e| D::Error::custom(format!("invalid system: {e}")))?;
        if system.base != repr.base
            || system.t_exponents != repr.t_exponents
            || system.is_cyclotomic_product != repr.is_cyclotomic_product
            || system.circle_hypothesis != repr.circle_hypothesis
        {
            return Err(D::Error::custom(
                "derived fields do not match the (p, alpha, D) they claim to describe",
            ));
        }
        Ok(system)
    }
}
