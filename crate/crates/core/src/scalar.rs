//! Working-precision real numbers.
//!
//! Every numerical routine in this crate is generic over [`Scalar`], which is
//! implemented for `f64` (machine precision) and for [`BigReal`], a binary
//! floating-point number with a configurable mantissa length. Values carry no
//! global state: a [`Precision`] is passed wherever a constant has to be
//! materialised.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::{Mutex, OnceLock};

use dashu_float::round::mode::HalfEven;
use dashu_float::FBig;
use serde::{Deserialize, Serialize};

type Float = FBig<HalfEven, 2>;

/// Arithmetic precision used by a computation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Precision {
    /// IEEE-754 binary64.
    Machine,
    /// Binary floating point with the given number of mantissa bits.
    Extended(u32),
}

impl Precision {
    /// Mantissa bits of the format.
    pub fn bits(&self) -> u32 {
        match *self {
            Precision::Machine => 53,
            Precision::Extended(bits) => bits,
        }
    }

    /// Unit roundoff `u = 2^-bits`, saturating at the smallest positive f64.
    pub fn unit_roundoff(&self) -> f64 {
        match *self {
            Precision::Machine => f64::EPSILON / 2.0,
            Precision::Extended(bits) => 2f64.powi(-(bits.min(1074) as i32)),
        }
    }

    /// Significant decimal digits used when printing values of this precision.
    pub fn decimal_digits(&self) -> usize {
        match *self {
            Precision::Machine => 17,
            Precision::Extended(bits) => (bits / 3) as usize,
        }
    }

    pub fn is_machine(&self) -> bool {
        matches!(self, Precision::Machine)
    }
}

impl fmt::Display for Precision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Precision::Machine => write!(f, "machine"),
            Precision::Extended(bits) => write!(f, "extended({bits})"),
        }
    }
}

/// A real number type the numerical kernels can run on.
pub trait Scalar:
    Clone
    + fmt::Debug
    + PartialOrd
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    /// Whether values of this type can honour `prec`.
    fn supports(prec: Precision) -> bool;

    fn from_f64(x: f64, prec: Precision) -> Self;

    fn from_i64(n: i64, prec: Precision) -> Self;

    fn to_f64(&self) -> f64;

    /// The precision this value is stored at.
    fn precision(&self) -> Precision;

    fn zero(prec: Precision) -> Self {
        Self::from_i64(0, prec)
    }

    fn one(prec: Precision) -> Self {
        Self::from_i64(1, prec)
    }

    fn pi(prec: Precision) -> Self;

    fn abs(&self) -> Self;

    fn sqrt(&self) -> Self;

    fn exp(&self) -> Self;

    fn ln(&self) -> Self;

    fn erf(&self) -> Self;

    fn is_zero(&self) -> bool;

    fn is_finite(&self) -> bool;

    /// Decimal rendering with `digits` significant digits in scientific notation.
    fn to_decimal_string(&self, digits: usize) -> String;

    fn powi(&self, n: u32) -> Self {
        let mut result = Self::one(self.precision());
        let mut base = self.clone();
        let mut e = n;
        while e > 0 {
            if e & 1 == 1 {
                result = result * base.clone();
            }
            e >>= 1;
            if e > 0 {
                base = base.clone() * base;
            }
        }
        result
    }

    fn square(&self) -> Self {
        self.clone() * self.clone()
    }

    fn max_of(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    fn is_negative(&self) -> bool {
        *self < Self::zero(self.precision())
    }
}

impl Scalar for f64 {
    fn supports(prec: Precision) -> bool {
        prec.is_machine()
    }

    fn from_f64(x: f64, _prec: Precision) -> Self {
        x
    }

    fn from_i64(n: i64, _prec: Precision) -> Self {
        n as f64
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn precision(&self) -> Precision {
        Precision::Machine
    }

    fn pi(_prec: Precision) -> Self {
        std::f64::consts::PI
    }

    fn abs(&self) -> Self {
        f64::abs(*self)
    }

    fn sqrt(&self) -> Self {
        f64::sqrt(*self)
    }

    fn exp(&self) -> Self {
        f64::exp(*self)
    }

    fn ln(&self) -> Self {
        f64::ln(*self)
    }

    fn erf(&self) -> Self {
        libm::erf(*self)
    }

    fn is_zero(&self) -> bool {
        *self == 0.0
    }

    fn is_finite(&self) -> bool {
        f64::is_finite(*self)
    }

    fn to_decimal_string(&self, digits: usize) -> String {
        format!("{:.*e}", digits.saturating_sub(1), self)
    }

    fn powi(&self, n: u32) -> Self {
        f64::powi(*self, n as i32)
    }
}

/// Binary floating-point number with a per-value mantissa length.
///
/// Binary operations round to the larger of the two operand precisions.
#[derive(Clone, PartialEq, PartialOrd)]
pub struct BigReal(Float);

impl BigReal {
    pub fn bits(&self) -> u32 {
        self.0.precision() as u32
    }

    /// Re-rounds to `bits` mantissa bits.
    pub fn with_bits(&self, bits: u32) -> Self {
        BigReal(self.0.clone().with_precision(bits as usize).value())
    }

    fn from_float(x: Float) -> Self {
        BigReal(x)
    }

    // Exact shortcuts (exp(0), sqrt(1), ...) come back with unlimited precision.
    fn keep_bits(&self, r: Float) -> Self {
        if r.precision() == 0 {
            BigReal(r.with_precision(self.0.precision()).value())
        } else {
            BigReal(r)
        }
    }
}

impl fmt::Debug for BigReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_decimal_string(20))
    }
}

impl fmt::Display for BigReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let digits = (self.bits() / 3).max(1) as usize;
        write!(f, "{}", self.to_decimal_string(digits))
    }
}

macro_rules! big_binop {
    ($trait:ident, $method:ident, $op:tt) => {
        impl $trait for BigReal {
            type Output = BigReal;
            fn $method(self, rhs: BigReal) -> BigReal {
                BigReal(&self.0 $op &rhs.0)
            }
        }
        impl<'a> $trait<&'a BigReal> for &'a BigReal {
            type Output = BigReal;
            fn $method(self, rhs: &'a BigReal) -> BigReal {
                BigReal(&self.0 $op &rhs.0)
            }
        }
    };
}

big_binop!(Add, add, +);
big_binop!(Sub, sub, -);
big_binop!(Mul, mul, *);
big_binop!(Div, div, /);

impl Neg for BigReal {
    type Output = BigReal;
    fn neg(self) -> BigReal {
        BigReal(-self.0)
    }
}

fn pi_cache() -> &'static Mutex<HashMap<u32, Float>> {
    static CACHE: OnceLock<Mutex<HashMap<u32, Float>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// arctan(1/k) by its alternating Taylor series.
fn arctan_inv(k: u32, bits: usize) -> Float {
    let one = Float::ONE.with_precision(bits).value();
    let k = Float::from(k).with_precision(bits).value();
    let k2 = &k * &k;
    let eps = Float::from_parts(1.into(), -(bits as isize) - 2);
    let mut power = &one / &k;
    let mut sum = power.clone();
    let mut n: u32 = 1;
    loop {
        power = &power / &k2;
        let term = &power / &Float::from(2 * n + 1);
        if term < eps {
            break;
        }
        if n % 2 == 1 {
            sum = &sum - &term;
        } else {
            sum = &sum + &term;
        }
        n += 1;
    }
    sum
}

fn big_pi(bits: u32) -> Float {
    let mut cache = pi_cache().lock().unwrap_or_else(|e| e.into_inner());
    if let Some(p) = cache.get(&bits) {
        return p.clone();
    }
    // Machin: pi = 16 atan(1/5) - 4 atan(1/239)
    let work = bits as usize + 32;
    let pi = Float::from(16) * arctan_inv(5, work) - Float::from(4) * arctan_inv(239, work);
    let pi = pi.with_precision(bits as usize).value();
    cache.insert(bits, pi.clone());
    pi
}

impl Scalar for BigReal {
    fn supports(prec: Precision) -> bool {
        !prec.is_machine()
    }

    fn from_f64(x: f64, prec: Precision) -> Self {
        let v = Float::try_from(x).expect("non-finite f64 cannot be lifted to extended precision");
        BigReal(v.with_precision(prec.bits() as usize).value())
    }

    fn from_i64(n: i64, prec: Precision) -> Self {
        BigReal(Float::from(n).with_precision(prec.bits() as usize).value())
    }

    fn to_f64(&self) -> f64 {
        self.0.to_f64().value()
    }

    fn precision(&self) -> Precision {
        Precision::Extended(self.bits())
    }

    fn pi(prec: Precision) -> Self {
        BigReal(big_pi(prec.bits()))
    }

    fn abs(&self) -> Self {
        if self.0 < Float::ZERO {
            BigReal(-self.0.clone())
        } else {
            self.clone()
        }
    }

    fn sqrt(&self) -> Self {
        self.keep_bits(self.0.sqrt())
    }

    fn exp(&self) -> Self {
        self.keep_bits(self.0.exp())
    }

    fn ln(&self) -> Self {
        self.keep_bits(self.0.ln())
    }

    fn erf(&self) -> Self {
        erf_big(self)
    }

    fn is_zero(&self) -> bool {
        self.0 == Float::ZERO
    }

    fn is_finite(&self) -> bool {
        !self.0.repr().is_infinite()
    }

    fn to_decimal_string(&self, digits: usize) -> String {
        if self.is_zero() {
            return "0e0".to_string();
        }
        let dec = self.0.to_decimal().value();
        let dec = dec.with_precision(digits.max(1)).value();
        format!("{dec:e}")
    }
}

/// erf at the working precision of `x`.
///
/// Uses `erf(x) = 2x/sqrt(pi) * exp(-x^2) * sum_n (2x^2)^n / (2n+1)!!`, whose
/// terms are all positive, so only a few guard bits are needed.
fn erf_big(x: &BigReal) -> BigReal {
    let bits = x.bits();
    let xf = x.to_f64();
    // erfc(t) < 2^-(bits+8) once t^2 > (bits+8) ln 2 + a little.
    let cutoff = (((bits + 8) as f64) * std::f64::consts::LN_2).sqrt() + 1.0;
    let prec = Precision::Extended(bits);
    if xf.abs() > cutoff {
        let one = BigReal::one(prec);
        return if xf > 0.0 { one } else { -one };
    }
    if x.is_zero() {
        return BigReal::zero(prec);
    }
    let work = bits + 32;
    let xw = x.with_bits(work);
    let two_x2 = Float::from(2) * &xw.0 * &xw.0;
    let mut term = Float::ONE.with_precision(work as usize).value();
    let mut sum = term.clone();
    let mut n: u64 = 0;
    loop {
        n += 1;
        term = &term * &two_x2 / Float::from(2 * n + 1);
        sum = &sum + &term;
        // Terms decrease once n exceeds x^2; stop when negligible.
        if (n as f64) > xf * xf && term < Float::from_parts(1.into(), -(work as isize)) * &sum {
            break;
        }
    }
    let pi = big_pi(work);
    let front = Float::from(2) * &xw.0 / pi.sqrt();
    let damp = (-(&xw.0 * &xw.0)).exp();
    BigReal::from_float((front * damp * sum).with_precision(bits as usize).value())
}

/// Lifts a slice of f64 values to working precision.
pub fn lift<S: Scalar>(xs: &[f64], prec: Precision) -> Vec<S> {
    xs.iter().map(|&x| S::from_f64(x, prec)).collect()
}

/// Converts a slice of scalars to f64.
pub fn lower<S: Scalar>(xs: &[S]) -> Vec<f64> {
    xs.iter().map(Scalar::to_f64).collect()
}
