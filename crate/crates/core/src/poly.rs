//! Dense univariate polynomials in λ with arbitrary-precision integer coefficients.
//!
//! Multiplication switches from schoolbook to Kronecker substitution for large
//! operands: both factors are packed into one big integer with word-aligned
//! slots wide enough that the product's coefficients never carry into each
//! other, so a single big-integer product does the work.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::{BigInt, BigUint, Sign};
use num_traits::{One, Signed, Zero};

use crate::error::Error;

/// Below this many coefficients in the shorter factor, schoolbook wins.
const KRONECKER_THRESHOLD: usize = 24;

/// `coeffs[i]` is the coefficient of λ^i; the highest stored coefficient is nonzero.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Polynomial {
    coeffs: Vec<BigInt>,
}

impl Polynomial {
    pub fn zero() -> Self {
        Polynomial { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Polynomial::constant(BigInt::one())
    }

    /// The polynomial λ.
    pub fn lambda() -> Self {
        Polynomial::monomial(BigInt::one(), 1)
    }

    pub fn constant(c: BigInt) -> Self {
        Polynomial::from_coeffs(vec![c])
    }

    pub fn monomial(c: BigInt, degree: usize) -> Self {
        let mut coeffs = vec![BigInt::zero(); degree + 1];
        coeffs[degree] = c;
        Polynomial::from_coeffs(coeffs)
    }

    pub fn from_coeffs(mut coeffs: Vec<BigInt>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        Polynomial { coeffs }
    }

    pub fn from_i64s(coeffs: &[i64]) -> Self {
        Polynomial::from_coeffs(coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<BigInt> {
        self.coeffs
    }

    /// Coefficient of λ^i (zero past the degree).
    pub fn coeff(&self, i: usize) -> BigInt {
        self.coeffs.get(i).cloned().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// Index of the lowest nonzero coefficient.
    pub fn valuation(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| !c.is_zero())
    }

    pub fn is_nonnegative(&self) -> bool {
        self.coeffs.iter().all(|c| !c.is_negative())
    }

    /// Value at λ = 1.
    pub fn sum_coeffs(&self) -> BigInt {
        self.coeffs.iter().sum()
    }

    pub fn eval(&self, x: &BigInt) -> BigInt {
        self.coeffs
            .iter()
            .rev()
            .fold(BigInt::zero(), |acc, c| acc * x + c)
    }

    /// Multiplication by λ^t.
    pub fn shift_up(&self, t: usize) -> Polynomial {
        if self.is_zero() || t == 0 {
            return self.clone();
        }
        let mut coeffs = vec![BigInt::zero(); t];
        coeffs.extend(self.coeffs.iter().cloned());
        Polynomial { coeffs }
    }

    /// Exact division by λ^t, or `None` when a coefficient below λ^t is nonzero.
    pub fn shift_down(&self, t: usize) -> Option<Polynomial> {
        if self.coeffs.iter().take(t).any(|c| !c.is_zero()) {
            return None;
        }
        Some(Polynomial {
            coeffs: self.coeffs.iter().skip(t).cloned().collect(),
        })
    }

    pub fn scale(&self, c: &BigInt) -> Polynomial {
        if c.is_zero() {
            return Polynomial::zero();
        }
        Polynomial {
            coeffs: self.coeffs.iter().map(|a| a * c).collect(),
        }
    }

    pub fn derivative(&self) -> Polynomial {
        Polynomial::from_coeffs(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * BigInt::from(i))
                .collect(),
        )
    }

    fn add_scaled_into(dst: &mut Vec<BigInt>, src: &[BigInt], negate: bool) {
        if dst.len() < src.len() {
            dst.resize(src.len(), BigInt::zero());
        }
        for (d, s) in dst.iter_mut().zip(src) {
            if negate {
                *d -= s;
            } else {
                *d += s;
            }
        }
    }
}

fn schoolbook(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    let mut out = vec![BigInt::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            if !y.is_zero() {
                out[i + j] += x * y;
            }
        }
    }
    out
}

fn pack(coeffs: &[BigUint], slot_words: usize) -> BigUint {
    let mut words = vec![0u32; coeffs.len() * slot_words];
    for (i, c) in coeffs.iter().enumerate() {
        let digits = c.to_u32_digits();
        words[i * slot_words..i * slot_words + digits.len()].copy_from_slice(&digits);
    }
    BigUint::new(words)
}

/// Product of two nonnegative coefficient vectors via one big-integer product.
fn kronecker(a: &[BigUint], b: &[BigUint]) -> Vec<BigUint> {
    let bits = |v: &[BigUint]| v.iter().map(BigUint::bits).max().unwrap_or(0);
    let overlap = a.len().min(b.len()) as u64;
    let guard = 64 - overlap.leading_zeros() as u64 + 1;
    let slot_bits = bits(a) + bits(b) + guard;
    let slot_words = slot_bits.div_ceil(32) as usize;
    let product = pack(a, slot_words) * pack(b, slot_words);
    let digits = product.to_u32_digits();
    (0..a.len() + b.len() - 1)
        .map(|i| {
            let lo = (i * slot_words).min(digits.len());
            let hi = ((i + 1) * slot_words).min(digits.len());
            BigUint::from_slice(&digits[lo..hi])
        })
        .collect()
}

fn split_signs(v: &[BigInt]) -> (Vec<BigUint>, Vec<BigUint>) {
    let pos = v
        .iter()
        .map(|c| match c.sign() {
            Sign::Plus => c.magnitude().clone(),
            _ => BigUint::zero(),
        })
        .collect();
    let neg = v
        .iter()
        .map(|c| match c.sign() {
            Sign::Minus => c.magnitude().clone(),
            _ => BigUint::zero(),
        })
        .collect();
    (pos, neg)
}

fn mul_coeffs(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    if a.len().min(b.len()) < KRONECKER_THRESHOLD {
        return schoolbook(a, b);
    }
    let (ap, an) = split_signs(a);
    let (bp, bn) = split_signs(b);
    let a_neg = an.iter().any(|c| !c.is_zero());
    let b_neg = bn.iter().any(|c| !c.is_zero());
    let lift = |v: Vec<BigUint>| -> Vec<BigInt> { v.into_iter().map(BigInt::from).collect() };
    let mut out = lift(kronecker(&ap, &bp));
    if a_neg && b_neg {
        Polynomial::add_scaled_into(&mut out, &lift(kronecker(&an, &bn)), false);
    }
    if b_neg {
        Polynomial::add_scaled_into(&mut out, &lift(kronecker(&ap, &bn)), true);
    }
    if a_neg {
        Polynomial::add_scaled_into(&mut out, &lift(kronecker(&an, &bp)), true);
    }
    out
}

impl Add<&Polynomial> for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Add for Polynomial {
    type Output = Polynomial;
    fn add(mut self, rhs: Polynomial) -> Polynomial {
        self += &rhs;
        self
    }
}

impl AddAssign<&Polynomial> for Polynomial {
    fn add_assign(&mut self, rhs: &Polynomial) {
        Polynomial::add_scaled_into(&mut self.coeffs, &rhs.coeffs, false);
        *self = Polynomial::from_coeffs(std::mem::take(&mut self.coeffs));
    }
}

impl SubAssign<&Polynomial> for Polynomial {
    fn sub_assign(&mut self, rhs: &Polynomial) {
        Polynomial::add_scaled_into(&mut self.coeffs, &rhs.coeffs, true);
        *self = Polynomial::from_coeffs(std::mem::take(&mut self.coeffs));
    }
}

impl Sub<&Polynomial> for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl Sub for Polynomial {
    type Output = Polynomial;
    fn sub(mut self, rhs: Polynomial) -> Polynomial {
        self -= &rhs;
        self
    }
}

impl Neg for Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        Polynomial {
            coeffs: self.coeffs.into_iter().map(|c| -c).collect(),
        }
    }
}

impl Mul<&Polynomial> for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        Polynomial::from_coeffs(mul_coeffs(&self.coeffs, &rhs.coeffs))
    }
}

impl Mul for Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: Polynomial) -> Polynomial {
        &self * &rhs
    }
}

impl fmt::Display for Polynomial {
    /// `poly deg d: c0 c1 … cd`; the zero polynomial is `poly deg -1:`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.degree() {
            None => write!(f, "poly deg -1:"),
            Some(d) => {
                write!(f, "poly deg {d}:")?;
                for c in &self.coeffs {
                    write!(f, " {c}")?;
                }
                Ok(())
            }
        }
    }
}

impl FromStr for Polynomial {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let bad = |message: String| Error::Parse { line: 1, message };
        let rest = s
            .trim()
            .strip_prefix("poly deg ")
            .ok_or_else(|| bad("expected `poly deg`".into()))?;
        let (deg, body) = rest
            .split_once(':')
            .ok_or_else(|| bad("missing `:`".into()))?;
        let deg: i64 = deg
            .trim()
            .parse()
            .map_err(|_| bad(format!("bad degree {deg:?}")))?;
        let coeffs = body
            .split_whitespace()
            .map(|t| t.parse::<BigInt>().map_err(|_| bad(format!("bad coefficient {t:?}"))))
            .collect::<Result<Vec<_>, _>>()?;
        if coeffs.len() as i64 != deg + 1 {
            return Err(bad(format!(
                "degree {deg} needs {} coefficients, found {}",
                deg + 1,
                coeffs.len()
            )));
        }
        let p = Polynomial::from_coeffs(coeffs);
        if p.degree().map_or(-1, |d| d as i64) != deg {
            return Err(bad("leading coefficient is zero".into()));
        }
        Ok(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(c: &[i64]) -> Polynomial {
        Polynomial::from_i64s(c)
    }

    #[test]
    fn trims_and_reports_degree() {
        assert_eq!(p(&[1, 2, 0, 0]).degree(), Some(1));
        assert!(p(&[0, 0]).is_zero());
        assert_eq!(Polynomial::zero().degree(), None);
        assert_eq!(p(&[0, 0, 3]).valuation(), Some(2));
    }

    #[test]
    fn shifts_are_exact_or_refused() {
        let q = p(&[0, 0, 1, 4]);
        assert_eq!(q.shift_down(2), Some(p(&[1, 4])));
        assert_eq!(q.shift_down(3), None);
        assert_eq!(p(&[1, 4]).shift_up(2), q);
        assert_eq!(Polynomial::zero().shift_down(5), Some(Polynomial::zero()));
    }

    #[test]
    fn text_format() {
        let q = p(&[1, 3, 1]);
        assert_eq!(q.to_string(), "poly deg 2: 1 3 1");
        assert_eq!("poly deg 2: 1 3 1".parse::<Polynomial>().unwrap(), q);
        assert_eq!(Polynomial::zero().to_string(), "poly deg -1:");
        assert!("poly deg -1:".parse::<Polynomial>().unwrap().is_zero());
        assert!("poly deg 2: 1 3".parse::<Polynomial>().is_err());
        assert!("poly deg 1: 1 0".parse::<Polynomial>().is_err());
    }

    #[test]
    fn kronecker_handles_huge_coefficients() {
        let big = BigInt::from(7u8).pow(300);
        let a = Polynomial::from_coeffs((0..40).map(|i| &big * BigInt::from(i + 1)).collect());
        let b = Polynomial::from_coeffs((0..50).map(|i| BigInt::from(3 * i + 2) * &big).collect());
        let expected = Polynomial::from_coeffs(schoolbook(a.coeffs(), b.coeffs()));
        assert_eq!(&a * &b, expected);
    }

    fn arb_poly(max_len: usize) -> impl Strategy<Value = Polynomial> {
        prop::collection::vec(-1_000_000_000i64..1_000_000_000, 0..max_len)
            .prop_map(|v| Polynomial::from_i64s(&v))
    }

    proptest! {
        #[test]
        fn product_matches_schoolbook_and_evaluation(a in arb_poly(60), b in arb_poly(60), x in -5i64..5) {
            let prod = &a * &b;
            let school = if a.is_zero() || b.is_zero() {
                Polynomial::zero()
            } else {
                Polynomial::from_coeffs(schoolbook(a.coeffs(), b.coeffs()))
            };
            prop_assert_eq!(&prod, &school);
            let x = BigInt::from(x);
            prop_assert_eq!(prod.eval(&x), a.eval(&x) * b.eval(&x));
        }

        #[test]
        fn ring_identities(a in arb_poly(30), b in arb_poly(30)) {
            prop_assert_eq!(&(&a + &b) - &b, a.clone());
            prop_assert_eq!(&a * &Polynomial::one(), a.clone());
            prop_assert_eq!((&a * &Polynomial::lambda()).shift_down(1), Some(a.clone()));
        }
    }
}
