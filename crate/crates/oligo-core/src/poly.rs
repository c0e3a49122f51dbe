//! Exact univariate polynomial and rational-function arithmetic over the
//! integers. Everything here is deliberately simple: degrees stay modest
//! (bounded by the truncation depth of a series), so quadratic algorithms
//! and the primitive pseudo-remainder sequence for gcds are plenty.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Polynomial with `BigInt` coefficients, `coeffs[i]` the coefficient of
/// `z^i`; no trailing zeros. The zero polynomial has an empty coefficient
/// vector.
#[derive(Clone, PartialEq, Eq)]
pub struct IntPoly {
    coeffs: Vec<BigInt>,
}

impl fmt::Debug for IntPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.display())
    }
}

impl IntPoly {
    pub fn zero() -> Self {
        IntPoly { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        IntPoly::constant(BigInt::one())
    }

    pub fn constant(c: BigInt) -> Self {
        if c.is_zero() {
            IntPoly::zero()
        } else {
            IntPoly { coeffs: vec![c] }
        }
    }

    pub fn from_coeffs(coeffs: Vec<BigInt>) -> Self {
        let mut p = IntPoly { coeffs };
        p.trim();
        p
    }

    pub fn from_i64(coeffs: &[i64]) -> Self {
        IntPoly::from_coeffs(coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    /// The monomial `c * z^k`.
    pub fn monomial(c: BigInt, k: usize) -> Self {
        if c.is_zero() {
            return IntPoly::zero();
        }
        let mut coeffs = vec![BigInt::zero(); k + 1];
        coeffs[k] = c;
        IntPoly { coeffs }
    }

    /// `1 - z^k`.
    pub fn one_minus_power(k: usize) -> Self {
        let mut coeffs = vec![BigInt::zero(); k + 1];
        coeffs[0] = BigInt::one();
        coeffs[k] = -BigInt::one();
        IntPoly { coeffs }
    }

    /// `1 + z^k`.
    pub fn one_plus_power(k: usize) -> Self {
        let mut coeffs = vec![BigInt::zero(); k + 1];
        coeffs[0] = BigInt::one();
        coeffs[k] = BigInt::one();
        IntPoly { coeffs }
    }

    fn trim(&mut self) {
        while self.coeffs.last().map_or(false, |c| c.is_zero()) {
            self.coeffs.pop();
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree of a nonzero polynomial; the zero polynomial answers 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn coeff(&self, k: usize) -> BigInt {
        self.coeffs.get(k).cloned().unwrap_or_else(BigInt::zero)
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn leading(&self) -> BigInt {
        self.coeffs.last().cloned().unwrap_or_else(BigInt::zero)
    }

    pub fn add(&self, other: &IntPoly) -> IntPoly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut coeffs = vec![BigInt::zero(); n];
        for (i, c) in self.coeffs.iter().enumerate() {
            coeffs[i] += c;
        }
        for (i, c) in other.coeffs.iter().enumerate() {
            coeffs[i] += c;
        }
        IntPoly::from_coeffs(coeffs)
    }

    pub fn sub(&self, other: &IntPoly) -> IntPoly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut coeffs = vec![BigInt::zero(); n];
        for (i, c) in self.coeffs.iter().enumerate() {
            coeffs[i] += c;
        }
        for (i, c) in other.coeffs.iter().enumerate() {
            coeffs[i] -= c;
        }
        IntPoly::from_coeffs(coeffs)
    }

    pub fn neg(&self) -> IntPoly {
        IntPoly {
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }

    pub fn mul(&self, other: &IntPoly) -> IntPoly {
        if self.is_zero() || other.is_zero() {
            return IntPoly::zero();
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
        IntPoly::from_coeffs(coeffs)
    }

    pub fn scale(&self, c: &BigInt) -> IntPoly {
        if c.is_zero() {
            return IntPoly::zero();
        }
        IntPoly {
            coeffs: self.coeffs.iter().map(|a| a * c).collect(),
        }
    }

    /// Exact division; errors if `other` does not divide `self` over the
    /// integers.
    pub fn exact_div(&self, other: &IntPoly) -> Result<IntPoly> {
        if other.is_zero() {
            return Err(Error::Precondition("division by zero polynomial".to_string()));
        }
        if self.is_zero() {
            return Ok(IntPoly::zero());
        }
        if self.degree() < other.degree() {
            return Err(Error::Precondition(format!(
                "{:?} does not divide {:?}",
                other, self
            )));
        }
        let mut rem = self.coeffs.clone();
        let dq = self.degree() - other.degree();
        let mut q = vec![BigInt::zero(); dq + 1];
        let lead = other.leading();
        for k in (0..=dq).rev() {
            let top = rem[k + other.degree()].clone();
            if top.is_zero() {
                continue;
            }
            let (c, r) = num_integer::div_rem(top, lead.clone());
            if !r.is_zero() {
                return Err(Error::Precondition(format!(
                    "{:?} does not divide {:?} exactly",
                    other, self
                )));
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                let delta = &c * b;
                rem[k + j] -= delta;
            }
            q[k] = c;
        }
        if rem.iter().any(|c| !c.is_zero()) {
            return Err(Error::Precondition(format!(
                "{:?} does not divide {:?} (nonzero remainder)",
                other, self
            )));
        }
        Ok(IntPoly::from_coeffs(q))
    }

    /// Content: gcd of the coefficients (nonnegative).
    pub fn content(&self) -> BigInt {
        let mut g = BigInt::zero();
        for c in &self.coeffs {
            g = num_integer::gcd(g, c.clone());
        }
        g
    }

    /// Primitive part: the polynomial divided by its content, with
    /// positive leading coefficient.
    pub fn primitive(&self) -> IntPoly {
        if self.is_zero() {
            return IntPoly::zero();
        }
        let mut c = self.content();
        if self.leading().is_negative() {
            c = -c;
        }
        IntPoly {
            coeffs: self.coeffs.iter().map(|a| a / &c).collect(),
        }
    }

    /// Gcd by the primitive pseudo-remainder sequence; result is primitive
    /// with positive leading coefficient, scaled by the gcd of contents.
    pub fn gcd(&self, other: &IntPoly) -> IntPoly {
        if self.is_zero() {
            return other.primitive().scale(&other.content());
        }
        if other.is_zero() {
            return self.primitive().scale(&self.content());
        }
        let cont = num_integer::gcd(self.content(), other.content());
        let mut a = self.primitive();
        let mut b = other.primitive();
        if a.degree() < b.degree() {
            core::mem::swap(&mut a, &mut b);
        }
        while !b.is_zero() {
            let r = pseudo_rem(&a, &b);
            a = b;
            b = r.primitive();
        }
        a.primitive().scale(&cont)
    }

    /// Evaluates at an integer point.
    pub fn eval_int(&self, x: &BigInt) -> BigInt {
        let mut acc = BigInt::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn pow(&self, mut e: usize) -> IntPoly {
        let mut base = self.clone();
        let mut acc = IntPoly::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// Multiplicity of the root z = 1.
    pub fn multiplicity_at_one(&self) -> usize {
        if self.is_zero() {
            return 0;
        }
        let mut p = self.clone();
        let mut m = 0;
        let linear = IntPoly::from_i64(&[-1, 1]); // z - 1
        while p.eval_int(&BigInt::one()).is_zero() {
            p = p.exact_div(&linear).expect("z-1 divides after root check");
            m += 1;
        }
        m
    }

    /// Human-readable form like `1 - z^2 + 3z^5`.
    pub fn display(&self) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let mag = c.abs();
            if out.is_empty() {
                if c.is_negative() {
                    out.push('-');
                }
            } else if c.is_negative() {
                out.push_str(" - ");
            } else {
                out.push_str(" + ");
            }
            let show_coeff = !mag.is_one() || i == 0;
            if show_coeff {
                out.push_str(&mag.to_string());
            }
            if i == 1 {
                out.push('z');
            } else if i > 1 {
                out.push_str(&format!("z^{i}"));
            }
        }
        out
    }
}

fn pseudo_rem(a: &IntPoly, b: &IntPoly) -> IntPoly {
    // multiply the remainder through by lc(b) at each step, so every
    // cancellation is exact over the integers
    let lead = b.leading();
    let mut rem = a.clone();
    while !rem.is_zero() && rem.degree() >= b.degree() {
        let k = rem.degree() - b.degree();
        let c = rem.leading();
        rem = rem.scale(&lead).sub(&b.mul(&IntPoly::monomial(c, k)));
    }
    rem
}

/// A quotient of integer polynomials, kept reduced (no common factor,
/// positive constant-or-leading sign on the denominator).
#[derive(Clone, PartialEq, Eq)]
pub struct RationalFunction {
    num: IntPoly,
    den: IntPoly,
}

impl fmt::Debug for RationalFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}) / ({})", self.num.display(), self.den.display())
    }
}

impl RationalFunction {
    pub fn new(num: IntPoly, den: IntPoly) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::Precondition("zero denominator".to_string()));
        }
        let mut r = RationalFunction { num, den };
        r.reduce();
        Ok(r)
    }

    pub fn zero() -> Self {
        RationalFunction {
            num: IntPoly::zero(),
            den: IntPoly::one(),
        }
    }

    pub fn from_poly(p: IntPoly) -> Self {
        RationalFunction {
            num: p,
            den: IntPoly::one(),
        }
    }

    pub fn numerator(&self) -> &IntPoly {
        &self.num
    }

    pub fn denominator(&self) -> &IntPoly {
        &self.den
    }

    fn reduce(&mut self) {
        if self.num.is_zero() {
            self.den = IntPoly::one();
            return;
        }
        let g = self.num.gcd(&self.den);
        if !g.is_zero() {
            self.num = self.num.exact_div(&g).expect("gcd divides numerator");
            self.den = self.den.exact_div(&g).expect("gcd divides denominator");
        }
        // normalise sign: constant term of the denominator positive if
        // nonzero, leading coefficient positive otherwise
        let pivot = if self.den.coeff(0).is_zero() {
            self.den.leading()
        } else {
            self.den.coeff(0)
        };
        if pivot.is_negative() {
            self.num = self.num.neg();
            self.den = self.den.neg();
        }
    }

    pub fn add(&self, other: &RationalFunction) -> RationalFunction {
        let num = self.num.mul(&other.den).add(&other.num.mul(&self.den));
        let den = self.den.mul(&other.den);
        RationalFunction::new(num, den).expect("nonzero denominator is preserved")
    }

    pub fn mul(&self, other: &RationalFunction) -> RationalFunction {
        RationalFunction::new(self.num.mul(&other.num), self.den.mul(&other.den))
            .expect("nonzero denominator is preserved")
    }

    pub fn scale_div(&self, c: &BigInt) -> Result<RationalFunction> {
        RationalFunction::new(self.num.clone(), self.den.scale(c))
    }

    /// True iff the function is a polynomial (denominator is a constant
    /// dividing the numerator's content; after reduction, a unit).
    pub fn is_polynomial(&self) -> bool {
        self.den.degree() == 0
    }

    /// First `n + 1` power-series coefficients. Requires the denominator's
    /// constant term to be a unit up to the content of the numerator; the
    /// series must have integer coefficients or this errors.
    pub fn series_prefix(&self, n: usize) -> Result<Vec<BigInt>> {
        let d0 = self.den.coeff(0);
        if d0.is_zero() {
            return Err(Error::Precondition(
                "denominator vanishes at z = 0".to_string(),
            ));
        }
        let mut out = Vec::with_capacity(n + 1);
        for k in 0..=n {
            let mut acc = self.num.coeff(k);
            for i in 1..=k.min(self.den.degree()) {
                let di = self.den.coeff(i);
                if !di.is_zero() {
                    acc -= di * &out[k - i];
                }
            }
            let (c, r) = num_integer::div_rem(acc, d0.clone());
            if !r.is_zero() {
                return Err(Error::FalsifiedProperty(format!(
                    "series coefficient {k} of {self:?} is not an integer"
                )));
            }
            out.push(c);
        }
        Ok(out)
    }

    /// Order of the pole at z = 1 (0 if no pole there).
    pub fn pole_order_at_one(&self) -> usize {
        let dm = self.den.multiplicity_at_one();
        let nm = self.num.multiplicity_at_one();
        dm.saturating_sub(nm)
    }
}
