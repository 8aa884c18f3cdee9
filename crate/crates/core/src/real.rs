//! Fixed-precision software floats used for the analytic constants.
//!
//! `Real` wraps an `astro_float::BigFloat` at [`PRECISION`] bits with
//! round-to-nearest-even. Only the handful of operations the constant
//! solver needs are exposed.

use std::cell::RefCell;
use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use astro_float::{BigFloat, Consts, RoundingMode, Sign};
use num_bigint::BigUint;

/// Significand width in bits.
pub const PRECISION: usize = 256;

const RM: RoundingMode = RoundingMode::ToEven;

thread_local! {
    static CONSTS: RefCell<Consts> = RefCell::new(Consts::new().expect("astro-float constant cache"));
}

#[derive(Clone)]
pub struct Real(BigFloat);

impl Real {
    pub fn zero() -> Self {
        Real(BigFloat::from_u64(0, PRECISION))
    }

    pub fn one() -> Self {
        Real::from_u64(1)
    }

    pub fn from_u64(v: u64) -> Self {
        Real(BigFloat::from_u64(v, PRECISION))
    }

    pub fn from_i64(v: i64) -> Self {
        Real(BigFloat::from_i64(v, PRECISION))
    }

    pub fn from_f64(v: f64) -> Self {
        Real(BigFloat::from_f64(v, PRECISION))
    }

    pub fn ratio(num: i64, den: i64) -> Self {
        Real::from_i64(num) / Real::from_i64(den)
    }

    /// Exact integer, rounded to [`PRECISION`] bits.
    pub fn from_biguint(v: &BigUint) -> Self {
        let bits = v.bits();
        if bits == 0 {
            return Real::zero();
        }
        let words = PRECISION / 64 + 1;
        let keep = (words * 64) as u64;
        let top = if bits > keep {
            v >> (bits - keep) as usize
        } else {
            v << (keep - bits) as usize
        };
        // `top` has exactly `keep` bits, so the leading one is the top bit of the last word.
        let digits = top.to_u64_digits();
        debug_assert_eq!(digits.len(), words);
        let mut x = BigFloat::from_words(&digits, Sign::Pos, 0);
        x.set_exponent(bits as i32);
        x.set_precision(PRECISION, RM).expect("precision");
        Real(x)
    }

    pub fn to_f64(&self) -> f64 {
        if self.0.is_zero() {
            return 0.0;
        }
        match self.0.as_raw_parts() {
            Some((m, _, s, e, _)) => {
                let top = *m.last().unwrap_or(&0);
                let mag = (top as f64) * 2f64.powi(e - 64);
                if s == Sign::Neg {
                    -mag
                } else {
                    mag
                }
            }
            None => f64::NAN,
        }
    }

    pub fn sqrt(&self) -> Self {
        Real(self.0.sqrt(PRECISION, RM))
    }

    pub fn ln(&self) -> Self {
        CONSTS.with(|c| Real(self.0.ln(PRECISION, RM, &mut c.borrow_mut())))
    }

    pub fn exp(&self) -> Self {
        CONSTS.with(|c| Real(self.0.exp(PRECISION, RM, &mut c.borrow_mut())))
    }

    pub fn pi() -> Self {
        CONSTS.with(|c| Real(c.borrow_mut().pi(PRECISION, RM)))
    }

    pub fn powi(&self, n: usize) -> Self {
        Real(self.0.powi(n, PRECISION, RM))
    }

    pub fn abs(&self) -> Self {
        Real(self.0.abs())
    }

    pub fn is_finite(&self) -> bool {
        !self.0.is_nan() && !self.0.is_inf()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive() && !self.0.is_zero()
    }

    pub fn max(&self, other: &Real) -> Real {
        if self >= other {
            self.clone()
        } else {
            other.clone()
        }
    }
}

impl PartialEq for Real {
    fn eq(&self, other: &Self) -> bool {
        self.0.cmp(&other.0) == Some(0)
    }
}

impl PartialOrd for Real {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.0.cmp(&other.0).map(|c| c.cmp(&0))
    }
}

impl fmt::Debug for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

macro_rules! bin_op {
    ($trait:ident, $method:ident) => {
        impl $trait<&Real> for &Real {
            type Output = Real;
            fn $method(self, rhs: &Real) -> Real {
                Real(self.0.$method(&rhs.0, PRECISION, RM))
            }
        }
        impl $trait<Real> for Real {
            type Output = Real;
            fn $method(self, rhs: Real) -> Real {
                Real(self.0.$method(&rhs.0, PRECISION, RM))
            }
        }
        impl $trait<&Real> for Real {
            type Output = Real;
            fn $method(self, rhs: &Real) -> Real {
                Real(self.0.$method(&rhs.0, PRECISION, RM))
            }
        }
        impl $trait<Real> for &Real {
            type Output = Real;
            fn $method(self, rhs: Real) -> Real {
                Real(self.0.$method(&rhs.0, PRECISION, RM))
            }
        }
    };
}

bin_op!(Add, add);
bin_op!(Sub, sub);
bin_op!(Mul, mul);
bin_op!(Div, div);

impl Neg for Real {
    type Output = Real;
    fn neg(self) -> Real {
        Real(self.0.neg())
    }
}

impl Neg for &Real {
    type Output = Real;
    fn neg(self) -> Real {
        Real(self.0.clone().neg())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips_f64() {
        for v in [1.0, 0.75, -3.5, 1e-30, 12345.678, 1.0 / 6.0] {
            assert_eq!(Real::from_f64(v).to_f64(), v);
        }
    }

    #[test]
    fn converts_big_integers() {
        let big: BigUint = BigUint::from(3u32).pow(2000);
        let r = Real::from_biguint(&big);
        let expected = 2000.0 * 3f64.ln();
        assert!((r.ln().to_f64() - expected).abs() < 1e-12);
        assert_eq!(Real::from_biguint(&BigUint::from(12345u32)).to_f64(), 12345.0);
        assert_eq!(Real::from_biguint(&BigUint::from(0u32)).to_f64(), 0.0);
    }

    #[test]
    fn sqrt_three_high_digits() {
        let s = Real::from_u64(3).sqrt();
        let back = &s * &s - Real::from_u64(3);
        assert!(back.abs() < Real::from_f64(1e-70));
    }
}
