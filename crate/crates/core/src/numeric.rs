//! Floating-point helpers for polynomials whose coefficients overflow `f64`.
//!
//! [`ExtComplex`] carries a separate binary exponent so sums and products of
//! numbers like `10^1300` stay finite. [`BigFloat`] is a slow arbitrary-precision
//! float used only to re-evaluate a polynomial when double precision cancels.

use num_bigint::{BigInt, Sign};
use num_complex::Complex64;
use num_traits::{ToPrimitive, Zero};

use crate::poly::Polynomial;

const HI: f64 = 1.157_920_892_373_162e77; // 2^256
const LO: f64 = 8.636_168_555_094_445e-78; // 2^-256

/// `2^e` for any `e`, saturating to 0 or infinity.
pub fn pow2(e: i64) -> f64 {
    if e > 1023 {
        f64::INFINITY
    } else if e >= -1022 {
        f64::from_bits(((e + 1023) as u64) << 52)
    } else if e >= -1074 {
        f64::from_bits(1u64 << (e + 1074))
    } else {
        0.0
    }
}

/// `x · 2^e` without intermediate overflow.
pub fn ldexp(x: f64, e: i64) -> f64 {
    if (-1000..=1000).contains(&e) {
        x * pow2(e)
    } else {
        let half = e / 2;
        x * pow2(half) * pow2(e - half)
    }
}

/// Binary exponent of a finite nonzero `x`: `2^e ≤ |x| < 2^{e+1}`.
fn ilogb(x: f64) -> i64 {
    let bits = x.abs().to_bits();
    let field = ((bits >> 52) & 0x7ff) as i64;
    if field == 0 {
        ilogb(x * pow2(200)) - 200
    } else {
        field - 1023
    }
}

/// A complex number `(re + i·im) · 2^exp` with unbounded exponent.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExtComplex {
    re: f64,
    im: f64,
    exp: i64,
}

impl ExtComplex {
    pub const ZERO: ExtComplex = ExtComplex { re: 0.0, im: 0.0, exp: 0 };
    pub const ONE: ExtComplex = ExtComplex { re: 1.0, im: 0.0, exp: 0 };

    fn normalized(re: f64, im: f64, exp: i64) -> Self {
        let m = re.abs().max(im.abs());
        if m == 0.0 {
            return Self::ZERO;
        }
        if !(LO..=HI).contains(&m) && m.is_finite() {
            let e = ilogb(m);
            let s = pow2(-e);
            return ExtComplex { re: re * s, im: im * s, exp: exp + e };
        }
        ExtComplex { re, im, exp }
    }

    pub fn from_complex(z: Complex64) -> Self {
        Self::normalized(z.re, z.im, 0)
    }

    pub fn from_real(x: f64) -> Self {
        Self::normalized(x, 0.0, 0)
    }

    /// `re · 2^re_exp + i · im · 2^im_exp`.
    pub fn from_parts(re: f64, re_exp: i64, im: f64, im_exp: i64) -> Self {
        if re == 0.0 {
            return Self::normalized(0.0, im, im_exp);
        }
        if im == 0.0 {
            return Self::normalized(re, 0.0, re_exp);
        }
        let e = re_exp.max(im_exp);
        Self::normalized(ldexp(re, re_exp - e), ldexp(im, im_exp - e), e)
    }

    pub fn from_bigint(c: &BigInt) -> Self {
        let (m, e) = bigint_to_f64_exp(c);
        Self::normalized(m, 0.0, e)
    }

    pub fn is_zero(&self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }

    pub fn is_finite(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }

    pub fn mul(self, o: ExtComplex) -> Self {
        Self::normalized(
            self.re * o.re - self.im * o.im,
            self.re * o.im + self.im * o.re,
            self.exp + o.exp,
        )
    }

    pub fn mul_complex(self, z: Complex64) -> Self {
        Self::normalized(
            self.re * z.re - self.im * z.im,
            self.re * z.im + self.im * z.re,
            self.exp,
        )
    }

    pub fn scale(self, x: f64) -> Self {
        Self::normalized(self.re * x, self.im * x, self.exp)
    }

    pub fn add(self, o: ExtComplex) -> Self {
        if o.is_zero() {
            return self;
        }
        if self.is_zero() {
            return o;
        }
        let d = self.exp - o.exp;
        if d >= 0 {
            if d > 600 {
                return self;
            }
            let s = pow2(-d);
            Self::normalized(self.re + o.re * s, self.im + o.im * s, self.exp)
        } else {
            if d < -600 {
                return o;
            }
            let s = pow2(d);
            Self::normalized(self.re * s + o.re, self.im * s + o.im, o.exp)
        }
    }

    pub fn neg(self) -> Self {
        ExtComplex { re: -self.re, im: -self.im, exp: self.exp }
    }

    pub fn sub(self, o: ExtComplex) -> Self {
        self.add(o.neg())
    }

    pub fn div(self, o: ExtComplex) -> Self {
        let q = Complex64::new(self.re, self.im) / Complex64::new(o.re, o.im);
        Self::normalized(q.re, q.im, self.exp - o.exp)
    }

    pub fn conj(self) -> Self {
        ExtComplex { im: -self.im, ..self }
    }

    /// Nearest `Complex64`, possibly infinite or zero.
    pub fn to_complex(self) -> Complex64 {
        Complex64::new(ldexp(self.re, self.exp), ldexp(self.im, self.exp))
    }

    pub fn log2_abs(self) -> f64 {
        if self.is_zero() {
            return f64::NEG_INFINITY;
        }
        self.re.hypot(self.im).log2() + self.exp as f64
    }

    pub fn ln_abs(self) -> f64 {
        self.log2_abs() * std::f64::consts::LN_2
    }

    /// `|self| / |o|` as a plain float.
    pub fn abs_ratio(self, o: ExtComplex) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        (self.log2_abs() - o.log2_abs()).exp2()
    }
}

/// `c ≈ m · 2^e` with `m` carrying the top 64 bits of `c`.
pub fn bigint_to_f64_exp(c: &BigInt) -> (f64, i64) {
    let bits = c.bits();
    if bits <= 63 {
        return (c.to_i64().unwrap() as f64, 0);
    }
    let shift = bits - 64;
    let top = (c.magnitude() >> shift).to_u64().unwrap() as f64;
    let m = if c.sign() == Sign::Minus { -top } else { top };
    (m, shift as i64)
}

/// A polynomial with coefficients in extended-exponent form, for evaluation off the reals.
#[derive(Clone, Debug)]
pub struct ExtPoly {
    coeffs: Vec<ExtComplex>,
    abs_coeffs: Vec<ExtComplex>,
}

impl ExtPoly {
    pub fn new(p: &Polynomial) -> Self {
        let coeffs: Vec<ExtComplex> = p.coeffs().iter().map(ExtComplex::from_bigint).collect();
        let abs_coeffs = coeffs
            .iter()
            .map(|c| ExtComplex::normalized(c.re.abs(), 0.0, c.exp))
            .collect();
        ExtPoly { coeffs, abs_coeffs }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn coeff(&self, i: usize) -> ExtComplex {
        self.coeffs[i]
    }

    pub fn eval(&self, z: Complex64) -> ExtComplex {
        let mut acc = ExtComplex::ZERO;
        for &c in self.coeffs.iter().rev() {
            acc = acc.mul_complex(z).add(c);
        }
        acc
    }

    /// `(p(z), p'(z))` in one Horner pass.
    pub fn eval_with_derivative(&self, z: Complex64) -> (ExtComplex, ExtComplex) {
        let mut p = ExtComplex::ZERO;
        let mut dp = ExtComplex::ZERO;
        for &c in self.coeffs.iter().rev() {
            dp = dp.mul_complex(z).add(p);
            p = p.mul_complex(z).add(c);
        }
        (p, dp)
    }

    /// `Σ |c_i| r^i`, the scale against which rounding in `p(z)` is measured for `|z| = r`.
    pub fn abs_sum(&self, r: f64) -> ExtComplex {
        let z = Complex64::new(r, 0.0);
        let mut acc = ExtComplex::ZERO;
        for &c in self.abs_coeffs.iter().rev() {
            acc = acc.mul_complex(z).add(c);
        }
        acc
    }

    /// Backward-error residual `|p(z)| / Σ |c_i| |z|^i`.
    pub fn backward_error(&self, z: Complex64) -> f64 {
        self.eval(z).abs_ratio(self.abs_sum(z.norm()))
    }
}

/// `mant · 2^exp` with the mantissa truncated towards zero to a working precision.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BigFloat {
    mant: BigInt,
    exp: i64,
}

impl BigFloat {
    pub fn zero() -> Self {
        BigFloat { mant: BigInt::zero(), exp: 0 }
    }

    pub fn from_bigint(c: &BigInt, prec: u32) -> Self {
        BigFloat { mant: c.clone(), exp: 0 }.truncated(prec)
    }

    /// Exact conversion.
    pub fn from_f64(x: f64) -> Self {
        if x == 0.0 {
            return Self::zero();
        }
        let bits = x.to_bits();
        let field = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        let (m, e) = if field == 0 {
            (frac, -1074)
        } else {
            (frac | (1u64 << 52), field - 1075)
        };
        let mant = if x < 0.0 { -BigInt::from(m) } else { BigInt::from(m) };
        BigFloat { mant, exp: e }
    }

    fn magnitude(&self) -> i64 {
        self.mant.bits() as i64 + self.exp
    }

    fn truncated(mut self, prec: u32) -> Self {
        let bits = self.mant.bits();
        if bits > prec as u64 {
            let s = bits - prec as u64;
            let mag = self.mant.magnitude() >> s;
            self.mant = BigInt::from_biguint(self.mant.sign(), mag);
            self.exp += s as i64;
        }
        self
    }

    pub fn add(&self, o: &BigFloat, prec: u32) -> BigFloat {
        if o.mant.is_zero() {
            return self.clone();
        }
        if self.mant.is_zero() {
            return o.clone();
        }
        let gap = self.magnitude() - o.magnitude();
        if gap > prec as i64 + 4 {
            return self.clone();
        }
        if -gap > prec as i64 + 4 {
            return o.clone();
        }
        let (hi, lo) = if self.exp >= o.exp { (self, o) } else { (o, self) };
        let mant = (&hi.mant << (hi.exp - lo.exp) as usize) + &lo.mant;
        BigFloat { mant, exp: lo.exp }.truncated(prec)
    }

    pub fn neg(&self) -> BigFloat {
        BigFloat { mant: -&self.mant, exp: self.exp }
    }

    pub fn mul(&self, o: &BigFloat, prec: u32) -> BigFloat {
        BigFloat { mant: &self.mant * &o.mant, exp: self.exp + o.exp }.truncated(prec)
    }

    /// `(m, e)` with `self ≈ m · 2^e`.
    pub fn to_f64_exp(&self) -> (f64, i64) {
        let (m, e) = bigint_to_f64_exp(&self.mant);
        (m, e + self.exp)
    }
}

/// Evaluates `p` and `p'` at a double-precision point with `prec`-bit arithmetic.
pub fn eval_with_derivative_big(coeffs: &[BigFloat], z: Complex64, prec: u32) -> (ExtComplex, ExtComplex) {
    let zr = BigFloat::from_f64(z.re);
    let zi = BigFloat::from_f64(z.im);
    let mul_z = |re: &BigFloat, im: &BigFloat| {
        (
            re.mul(&zr, prec).add(&im.mul(&zi, prec).neg(), prec),
            re.mul(&zi, prec).add(&im.mul(&zr, prec), prec),
        )
    };
    let (mut pr, mut pi) = (BigFloat::zero(), BigFloat::zero());
    let (mut dr, mut di) = (BigFloat::zero(), BigFloat::zero());
    for c in coeffs.iter().rev() {
        let (ar, ai) = mul_z(&dr, &di);
        dr = ar.add(&pr, prec);
        di = ai.add(&pi, prec);
        let (br, bi) = mul_z(&pr, &pi);
        pr = br.add(c, prec);
        pi = bi;
    }
    let to_ext = |re: &BigFloat, im: &BigFloat| {
        let (a, ae) = re.to_f64_exp();
        let (b, be) = im.to_f64_exp();
        ExtComplex::from_parts(a, ae, b, be)
    };
    (to_ext(&pr, &pi), to_ext(&dr, &di))
}
