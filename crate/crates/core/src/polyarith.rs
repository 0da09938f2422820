//! Dense integer-coefficient polynomial arithmetic.
//!
//! Coefficients are arbitrary-precision integers stored lowest degree first.
//! The canonical form never stores trailing zero coefficients, so the zero
//! polynomial has an empty coefficient vector and `degree` is `None`.
//!
//! Besides the ring operations this module provides the digit polynomial of a
//! digit set, cyclotomic polynomials by recursive exact division, exact
//! divisibility tests over the integers, and the self-reciprocal part used to
//! isolate unit-circle roots.

use std::collections::HashMap;
use std::fmt;
use std::sync::Mutex;
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PolyError {
    #[error("invalid digit set: {0}")]
    InvalidDigitSet(String),
    #[error("cyclotomic order must be positive")]
    ZeroCyclotomicOrder,
    #[error("division by the zero polynomial")]
    ZeroDivisor,
    #[error("inexact division, remainder {remainder}")]
    InexactDivision { remainder: IntPolynomial },
    #[error("operation undefined for the zero polynomial")]
    ZeroPolynomial,
}

/// Dense polynomial over the integers in canonical form (no trailing zeros).
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct IntPolynomial {
    coeffs: Vec<BigInt>,
}

impl IntPolynomial {
    pub fn zero() -> Self {
        IntPolynomial { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        IntPolynomial {
            coeffs: vec![BigInt::one()],
        }
    }

    /// Build from coefficients (index = exponent), trimming trailing zeros.
    pub fn from_coeffs(mut coeffs: Vec<BigInt>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        IntPolynomial { coeffs }
    }

    pub fn from_i64_coeffs(coeffs: &[i64]) -> Self {
        Self::from_coeffs(coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    /// The monomial `x^exp`.
    pub fn x_pow(exp: usize) -> Self {
        let mut coeffs = vec![BigInt::zero(); exp + 1];
        coeffs[exp] = BigInt::one();
        IntPolynomial { coeffs }
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading_coefficient(&self) -> Option<&BigInt> {
        self.coeffs.last()
    }

    pub fn coefficient(&self, exp: usize) -> BigInt {
        self.coeffs.get(exp).cloned().unwrap_or_else(BigInt::zero)
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.len() <= 1
    }

    pub fn eval(&self, x: &BigInt) -> BigInt {
        let mut acc = BigInt::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    /// Sum of coefficients, i.e. the value at 1.
    pub fn eval_one(&self) -> BigInt {
        self.coeffs.iter().sum()
    }

    pub fn neg(&self) -> Self {
        IntPolynomial {
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut coeffs = Vec::with_capacity(n);
        for i in 0..n {
            coeffs.push(self.coefficient(i) + other.coefficient(i));
        }
        Self::from_coeffs(coeffs)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut coeffs = vec![BigInt::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        Self::from_coeffs(coeffs)
    }

    pub fn scale(&self, k: &BigInt) -> Self {
        if k.is_zero() {
            return Self::zero();
        }
        IntPolynomial {
            coeffs: self.coeffs.iter().map(|c| c * k).collect(),
        }
    }

    /// Substitute `x -> x^k`, spreading coefficients to exponents `k * i`.
    pub fn substitute_x_pow(&self, k: usize) -> Self {
        assert!(k >= 1, "substitution exponent must be positive");
        if self.is_zero() {
            return Self::zero();
        }
        let mut coeffs = vec![BigInt::zero(); (self.coeffs.len() - 1) * k + 1];
        for (i, c) in self.coeffs.iter().enumerate() {
            coeffs[i * k] = c.clone();
        }
        IntPolynomial { coeffs }
    }

    /// `x^{deg f} * f(1/x)`: the coefficient sequence reversed.
    pub fn reverse(&self) -> Self {
        let mut coeffs = self.coeffs.clone();
        coeffs.reverse();
        Self::from_coeffs(coeffs)
    }

    /// Largest `k` such that `x^k` divides the polynomial (0 for the zero polynomial).
    pub fn x_power_divisor(&self) -> usize {
        self.coeffs.iter().position(|c| !c.is_zero()).unwrap_or(0)
    }

    /// Remove the `x^k` factor returned by [`x_power_divisor`](Self::x_power_divisor).
    pub fn strip_x_power(&self) -> Self {
        let k = self.x_power_divisor();
        IntPolynomial {
            coeffs: self.coeffs[k..].to_vec(),
        }
    }

    /// Gcd of the coefficients; zero for the zero polynomial.
    pub fn content(&self) -> BigInt {
        self.coeffs.iter().fold(BigInt::zero(), |acc, c| acc.gcd(c))
    }

    /// Divide out the content and normalize the leading coefficient to be positive.
    pub fn primitive_part(&self) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let mut content = self.content();
        if self.leading_coefficient().unwrap().is_negative() {
            content = -content;
        }
        IntPolynomial {
            coeffs: self.coeffs.iter().map(|c| c / &content).collect(),
        }
    }

    fn shifted_scaled(&self, k: &BigInt, shift: usize) -> Self {
        let mut coeffs = vec![BigInt::zero(); shift];
        coeffs.extend(self.coeffs.iter().map(|c| c * k));
        Self::from_coeffs(coeffs)
    }
}

impl fmt::Debug for IntPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for IntPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (exp, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
                first = false;
            } else if c.is_negative() {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let abs = c.abs();
            match exp {
                0 => write!(f, "{abs}")?,
                _ => {
                    if !abs.is_one() {
                        write!(f, "{abs}*")?;
                    }
                    if exp == 1 {
                        write!(f, "x")?;
                    } else {
                        write!(f, "x^{exp}")?;
                    }
                }
            }
        }
        Ok(())
    }
}

/// The digit polynomial `sum_{d in D} x^d` of a finite digit set.
pub fn poly_from_digit_set(digits: &[i64]) -> Result<IntPolynomial, PolyError> {
    if digits.is_empty() {
        return Err(PolyError::InvalidDigitSet("digit set is empty".into()));
    }
    let mut coeffs = Vec::new();
    for &d in digits {
        if d < 0 {
            return Err(PolyError::InvalidDigitSet(format!("digit {d} is negative")));
        }
        let d = d as usize;
        if coeffs.len() <= d {
            coeffs.resize(d + 1, BigInt::zero());
        }
        if !coeffs[d].is_zero() {
            return Err(PolyError::InvalidDigitSet(format!("digit {d} repeated")));
        }
        coeffs[d] = BigInt::one();
    }
    Ok(IntPolynomial::from_coeffs(coeffs))
}

fn divisors(n: u64) -> Vec<u64> {
    let mut divs = Vec::new();
    let mut i = 1;
    while i * i <= n {
        if n.is_multiple_of(i) {
            divs.push(i);
            if i != n / i {
                divs.push(n / i);
            }
        }
        i += 1;
    }
    divs.sort_unstable();
    divs
}

fn cyclotomic_cache() -> &'static Mutex<HashMap<u64, IntPolynomial>> {
    static CACHE: OnceLock<Mutex<HashMap<u64, IntPolynomial>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// The cyclotomic polynomial of order `n`.
///
/// Computed by exact division `Phi_n = (x^n - 1) / prod_{d | n, d < n} Phi_d`
/// and memoized. Concurrent callers may race to insert the same entry; the
/// value is identical either way.
pub fn cyclotomic(n: u64) -> Result<IntPolynomial, PolyError> {
    if n == 0 {
        return Err(PolyError::ZeroCyclotomicOrder);
    }
    if let Some(hit) = cyclotomic_cache().lock().unwrap().get(&n) {
        return Ok(hit.clone());
    }
    let result = if n == 1 {
        IntPolynomial::from_i64_coeffs(&[-1, 1])
    } else {
        let mut num = IntPolynomial::x_pow(n as usize).sub(&IntPolynomial::one());
        for d in divisors(n) {
            if d == n {
                continue;
            }
            let phi = cyclotomic(d)?;
            num = exact_div(&num, &phi)?;
        }
        num
    };
    cyclotomic_cache().lock().unwrap().insert(n, result.clone());
    Ok(result)
}

/// Long division in `Z[x]`, requiring every quotient coefficient to stay integral.
///
/// Returns the quotient when the division is exact. When `f` is not divisible
/// by `q` over the integers, the error carries a nonzero remainder witness
/// (the state of the division when it stopped).
pub fn exact_div(f: &IntPolynomial, q: &IntPolynomial) -> Result<IntPolynomial, PolyError> {
    if q.is_zero() {
        return Err(PolyError::ZeroDivisor);
    }
    if f.is_zero() {
        return Ok(IntPolynomial::zero());
    }
    let dq = q.degree().unwrap();
    let lead = q.leading_coefficient().unwrap().clone();
    let mut rem = f.clone();
    let mut quot = vec![BigInt::zero(); f.coeffs.len().saturating_sub(dq)];
    while let Some(dr) = rem.degree() {
        if dr < dq {
            break;
        }
        let (c, r) = rem.leading_coefficient().unwrap().div_rem(&lead);
        if !r.is_zero() {
            // If q divided f exactly, every leading coefficient along the way
            // would be divisible by lead(q).
            return Err(PolyError::InexactDivision { remainder: rem });
        }
        quot[dr - dq] = c.clone();
        rem = rem.sub(&q.shifted_scaled(&c, dr - dq));
    }
    if rem.is_zero() {
        Ok(IntPolynomial::from_coeffs(quot))
    } else {
        Err(PolyError::InexactDivision { remainder: rem })
    }
}

/// Whether `q` divides `f` exactly over the integers.
pub fn divides(q: &IntPolynomial, f: &IntPolynomial) -> Result<bool, PolyError> {
    match exact_div(f, q) {
        Ok(_) => Ok(true),
        Err(PolyError::InexactDivision { .. }) => Ok(false),
        Err(e) => Err(e),
    }
}

/// Pseudo-remainder of `a` by `b`: the remainder of `lc(b)^(deg a - deg b + 1) * a`
/// divided by `b`, which stays in `Z[x]`.
fn pseudo_rem(a: &IntPolynomial, b: &IntPolynomial) -> IntPolynomial {
    let db = b.degree().expect("pseudo_rem by zero");
    let lead = b.leading_coefficient().unwrap().clone();
    let da = a.degree().unwrap_or(0);
    let mut steps_left = da as i64 - db as i64 + 1;
    let mut rem = a.clone();
    while let Some(dr) = rem.degree() {
        if dr < db {
            break;
        }
        let c = rem.leading_coefficient().unwrap().clone();
        rem = rem.scale(&lead).sub(&b.shifted_scaled(&c, dr - db));
        steps_left -= 1;
    }
    // Degree can drop by more than one per step; pad the scaling so the result
    // equals lc(b)^(delta+1) * a mod b exactly.
    while steps_left > 0 {
        rem = rem.scale(&lead);
        steps_left -= 1;
    }
    rem
}

/// Gcd over the rationals, computed with the subresultant polynomial remainder
/// sequence so all intermediate values stay integral. The result is primitive
/// with positive leading coefficient.
pub fn subresultant_gcd(a: &IntPolynomial, b: &IntPolynomial) -> IntPolynomial {
    if a.is_zero() {
        return b.primitive_part();
    }
    if b.is_zero() {
        return a.primitive_part();
    }
    let (mut a, mut b) = (a.primitive_part(), b.primitive_part());
    if a.degree() < b.degree() {
        std::mem::swap(&mut a, &mut b);
    }
    let mut g = BigInt::one();
    let mut h = BigInt::one();
    loop {
        let delta = a.degree().unwrap() - b.degree().unwrap();
        let rem = pseudo_rem(&a, &b);
        if rem.is_zero() {
            return b.primitive_part();
        }
        if b.degree() == Some(0) || rem.degree() == Some(0) {
            return IntPolynomial::one();
        }
        let divisor = &g * h.pow(delta as u32);
        a = b;
        b = IntPolynomial {
            coeffs: rem.coeffs.iter().map(|c| c / &divisor).collect(),
        };
        g = a.leading_coefficient().unwrap().clone();
        h = if delta == 0 {
            h
        } else {
            g.pow(delta as u32) / h.pow(delta as u32 - 1)
        };
    }
}

/// The factor of `f` carrying every unit-circle root of `f`.
///
/// Strips the `x^k` factor and returns `gcd(f, reverse(f))` in primitive form.
/// A root on the unit circle satisfies `1/z = conj(z)`, so with integer
/// coefficients it is a common root of `f` and its reversal; off-circle roots
/// survive only when `f` happens to contain a reciprocal pair.
pub fn self_reciprocal_part(f: &IntPolynomial) -> Result<IntPolynomial, PolyError> {
    if f.is_zero() {
        return Err(PolyError::ZeroPolynomial);
    }
    let stripped = f.strip_x_power();
    Ok(subresultant_gcd(&stripped, &stripped.reverse()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use proptest::prelude::*;
    use rand::Rng;
    use rand::SeedableRng;

    fn poly(coeffs: &[i64]) -> IntPolynomial {
        IntPolynomial::from_i64_coeffs(coeffs)
    }

    #[test]
    fn digit_set_single_zero_gives_one() {
        assert_eq!(poly_from_digit_set(&[0]).unwrap(), IntPolynomial::one());
    }

    #[test]
    fn digit_set_zero_two() {
        let p = poly_from_digit_set(&[0, 2]).unwrap();
        assert_eq!(p, poly(&[1, 0, 1]));
        assert_eq!(p.eval_one(), BigInt::from(2));
    }

    #[test]
    fn digit_set_0246_is_phi4_phi8() {
        let p = poly_from_digit_set(&[0, 2, 4, 6]).unwrap();
        assert_eq!(p, poly(&[1, 0, 1, 0, 1, 0, 1]));
        let product = cyclotomic(4).unwrap().mul(&cyclotomic(8).unwrap());
        assert_eq!(p, product);
    }

    #[test]
    fn digit_set_rejects_bad_inputs() {
        assert!(matches!(
            poly_from_digit_set(&[]),
            Err(PolyError::InvalidDigitSet(_))
        ));
        assert!(matches!(
            poly_from_digit_set(&[0, -3]),
            Err(PolyError::InvalidDigitSet(_))
        ));
        assert!(matches!(
            poly_from_digit_set(&[1, 1]),
            Err(PolyError::InvalidDigitSet(_))
        ));
    }

    #[test]
    fn cyclotomic_base_cases() {
        assert_eq!(cyclotomic(1).unwrap(), poly(&[-1, 1]));
        assert_eq!(cyclotomic(2).unwrap(), poly(&[1, 1]));
        for p in [2u64, 3, 5, 7, 11, 13] {
            let phi = cyclotomic(p).unwrap();
            assert_eq!(phi.coeffs(), vec![BigInt::one(); p as usize].as_slice());
        }
        // Phi_8 = x^4 + 1 = (x^8 - 1) / ((x - 1)(x + 1)(x^2 + 1)), expanded by hand.
        assert_eq!(cyclotomic(8).unwrap(), poly(&[1, 0, 0, 0, 1]));
        assert!(matches!(cyclotomic(0), Err(PolyError::ZeroCyclotomicOrder)));
    }

    #[test]
    fn cyclotomic_prime_power_is_prime_composed_with_power() {
        // Phi_{p^a}(x) = Phi_p(x^{p^(a-1)}).
        for (p, a) in [(2u64, 2u32), (2, 3), (2, 4), (3, 2), (3, 3), (5, 2), (7, 2)] {
            let order = p.pow(a);
            let direct = cyclotomic(order).unwrap();
            let composed = cyclotomic(p)
                .unwrap()
                .substitute_x_pow(p.pow(a - 1) as usize);
            assert_eq!(direct, composed, "order {order}");
        }
    }

    #[test]
    fn cyclotomic_product_over_divisors_is_x_n_minus_one() {
        for n in 1..=200u64 {
            let mut product = IntPolynomial::one();
            for d in divisors(n) {
                product = product.mul(&cyclotomic(d).unwrap());
            }
            let expected = IntPolynomial::x_pow(n as usize).sub(&IntPolynomial::one());
            assert_eq!(product, expected, "n = {n}");
        }
    }

    #[test]
    fn cyclotomic_prime_power_evaluates_to_p_at_one() {
        for p in [2u64, 3, 5, 7, 11, 13] {
            for t in 1..=4u32 {
                let order = p.pow(t);
                if order > 200 {
                    continue;
                }
                assert_eq!(cyclotomic(order).unwrap().eval_one(), BigInt::from(p));
            }
        }
    }

    #[test]
    fn cyclotomic_cache_is_thread_safe() {
        let handles: Vec<_> = (0..4)
            .map(|_| {
                std::thread::spawn(|| {
                    (1..=60u64)
                        .map(|n| cyclotomic(n).unwrap())
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        let results: Vec<_> = handles.into_iter().map(|h| h.join().unwrap()).collect();
        for r in &results[1..] {
            assert_eq!(r, &results[0]);
        }
    }

    #[test]
    fn divides_examples() {
        let p0246 = poly_from_digit_set(&[0, 2, 4, 6]).unwrap();
        assert!(divides(&poly(&[1, 0, 1]), &p0246).unwrap());
        assert!(!divides(&poly(&[1, 1]), &poly(&[1, 0, 1])).unwrap());
        let f = poly(&[3, -1, 2]);
        assert!(divides(&f, &f).unwrap());
        assert!(matches!(
            divides(&IntPolynomial::zero(), &f),
            Err(PolyError::ZeroDivisor)
        ));
    }

    #[test]
    fn inexact_division_reports_remainder_two() {
        // (x^2 + 1) / (x + 1) stops with remainder 2.
        match exact_div(&poly(&[1, 0, 1]), &poly(&[1, 1])) {
            Err(PolyError::InexactDivision { remainder }) => {
                assert_eq!(remainder, poly(&[2]));
            }
            other => panic!("expected inexact division, got {other:?}"),
        }
    }

    #[test]
    fn exact_div_examples() {
        let p0246 = poly_from_digit_set(&[0, 2, 4, 6]).unwrap();
        assert_eq!(
            exact_div(&p0246, &poly(&[1, 0, 1])).unwrap(),
            poly(&[1, 0, 0, 0, 1])
        );
        assert_eq!(exact_div(&p0246, &IntPolynomial::one()).unwrap(), p0246);
        assert_eq!(
            exact_div(&poly(&[-1, 0, 1]), &poly(&[-1, 1])).unwrap(),
            poly(&[1, 1])
        );
    }

    #[test]
    fn self_reciprocal_part_examples() {
        // Palindromic input is its own reciprocal part.
        assert_eq!(
            self_reciprocal_part(&poly(&[1, 0, 1])).unwrap(),
            poly(&[1, 0, 1])
        );
        // x - 2 has no unit-circle roots.
        assert_eq!(
            self_reciprocal_part(&poly(&[-2, 1])).unwrap(),
            IntPolynomial::one()
        );
        // (x - 2)(x^2 + 1) keeps only the circle factor.
        let f = poly(&[-2, 1]).mul(&poly(&[1, 0, 1]));
        assert_eq!(self_reciprocal_part(&f).unwrap(), poly(&[1, 0, 1]));
        // x^3 * (x - 2)(x^2 + 1): the x-power factor is stripped first.
        let shifted = f.mul(&IntPolynomial::x_pow(3));
        assert_eq!(self_reciprocal_part(&shifted).unwrap(), poly(&[1, 0, 1]));
        assert!(matches!(
            self_reciprocal_part(&IntPolynomial::zero()),
            Err(PolyError::ZeroPolynomial)
        ));
    }

    /// Durand-Kerner iteration; adequate for the small random corpus below.
    fn complex_roots(p: &IntPolynomial) -> Vec<Complex64> {
        let deg = match p.degree() {
            Some(d) if d >= 1 => d,
            _ => return Vec::new(),
        };
        let lead = p.leading_coefficient().unwrap();
        let coeffs: Vec<Complex64> = p
            .coeffs()
            .iter()
            .map(|c| {
                let num = c.to_string().parse::<f64>().unwrap();
                let den = lead.to_string().parse::<f64>().unwrap();
                Complex64::new(num / den, 0.0)
            })
            .collect();
        let eval = |z: Complex64| {
            let mut acc = Complex64::new(0.0, 0.0);
            for c in coeffs.iter().rev() {
                acc = acc * z + c;
            }
            acc
        };
        let seed = Complex64::new(0.4, 0.9);
        let mut roots: Vec<Complex64> = (0..deg).map(|i| seed.powu(i as u32 + 1)).collect();
        for _ in 0..200 {
            let mut delta: f64 = 0.0;
            for i in 0..deg {
                let mut denom = Complex64::new(1.0, 0.0);
                for j in 0..deg {
                    if j != i {
                        denom *= roots[i] - roots[j];
                    }
                }
                let step = eval(roots[i]) / denom;
                roots[i] -= step;
                delta = delta.max(step.norm());
            }
            if delta < 1e-13 {
                break;
            }
        }
        roots
    }

    #[test]
    fn self_reciprocal_part_divides_and_captures_circle_roots() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x5eed);
        for _ in 0..60 {
            let deg = rng.gen_range(1..=7);
            let mut coeffs: Vec<i64> = (0..=deg).map(|_| rng.gen_range(-5..=5)).collect();
            if coeffs[deg] == 0 {
                coeffs[deg] = 1;
            }
            let f = IntPolynomial::from_i64_coeffs(&coeffs);
            if f.is_zero() {
                continue;
            }
            let g = self_reciprocal_part(&f).unwrap();
            assert!(divides(&g, &f).unwrap(), "f = {f}, g = {g}");
            for root in complex_roots(&g) {
                assert!(
                    (root.norm() - 1.0).abs() < 1e-8,
                    "off-circle root {root} of {g} from f = {f}"
                );
            }
        }
    }

    #[test]
    fn subresultant_gcd_handles_degenerate_inputs() {
        let f = poly(&[2, 4]);
        assert_eq!(subresultant_gcd(&f, &IntPolynomial::zero()), poly(&[1, 2]));
        assert_eq!(subresultant_gcd(&IntPolynomial::zero(), &f), poly(&[1, 2]));
        assert_eq!(
            subresultant_gcd(&IntPolynomial::zero(), &IntPolynomial::zero()),
            IntPolynomial::zero()
        );
        // gcd of coprime polynomials with coefficient blowup potential.
        let a = poly(&[1, 3, 0, 2, 5, 1]);
        let b = poly(&[7, 0, 0, 1, -2, 0, 3]);
        assert_eq!(subresultant_gcd(&a, &b), IntPolynomial::one());
    }

    #[test]
    fn display_renders_readable_terms() {
        assert_eq!(poly(&[1, 0, 1]).to_string(), "x^2 + 1");
        assert_eq!(poly(&[-2, 1]).to_string(), "x - 2");
        assert_eq!(poly(&[0, -3]).to_string(), "-3*x");
        assert_eq!(IntPolynomial::zero().to_string(), "0");
    }

    proptest! {
        #[test]
        fn multiply_back_round_trip(
            f in proptest::collection::vec(-6i64..=6, 0..7),
            q in proptest::collection::vec(-6i64..=6, 1..5),
        ) {
            let f = IntPolynomial::from_i64_coeffs(&f);
            let q = IntPolynomial::from_i64_coeffs(&q);
            prop_assume!(!q.is_zero());
            let product = f.mul(&q);
            // divides <=> exact_div succeeds <=> multiply-back equality.
            prop_assert!(divides(&q, &product).unwrap());
            let back = exact_div(&product, &q).unwrap();
            prop_assert_eq!(back.mul(&q), product);
            prop_assert_eq!(back, f);
        }

        #[test]
        fn divides_agrees_with_exact_div(
            f in proptest::collection::vec(-6i64..=6, 0..8),
            q in proptest::collection::vec(-6i64..=6, 1..5),
        ) {
            let f = IntPolynomial::from_i64_coeffs(&f);
            let q = IntPolynomial::from_i64_coeffs(&q);
            prop_assume!(!q.is_zero());
            match exact_div(&f, &q) {
                Ok(g) => {
                    prop_assert!(divides(&q, &f).unwrap());
                    prop_assert_eq!(g.mul(&q), f);
                }
                Err(PolyError::InexactDivision { remainder }) => {
                    prop_assert!(!divides(&q, &f).unwrap());
                    prop_assert!(!remainder.is_zero());
                }
                Err(e) => return Err(TestCaseError::fail(format!("{e}"))),
            }
        }

        #[test]
        fn self_reciprocal_part_always_divides(
            coeffs in proptest::collection::vec(-5i64..=5, 1..8),
        ) {
            let f = IntPolynomial::from_i64_coeffs(&coeffs);
            prop_assume!(!f.is_zero());
            let g = self_reciprocal_part(&f).unwrap();
            prop_assert!(divides(&g, &f).unwrap());
        }
    }
}
