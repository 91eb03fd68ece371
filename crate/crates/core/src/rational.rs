//! Exact rational scalars.
//!
//! [`Rational`] wraps an arbitrary-precision fraction kept in lowest terms
//! with a positive denominator. Every operation is exact.

use std::cmp::Ordering;
use std::fmt;
use std::iter::{Product, Sum};
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Pow, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Rational(BigRational);

impl Rational {
    /// Panics when `den == 0`.
    pub fn new(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        Rational(BigRational::new(num.into(), den.into()))
    }

    pub fn from_bigints(num: BigInt, den: BigInt) -> Self {
        assert!(!den.is_zero(), "zero denominator");
        Rational(BigRational::new(num, den))
    }

    pub fn integer(n: i64) -> Self {
        Rational(BigRational::from_integer(n.into()))
    }

    pub fn from_bigint(n: BigInt) -> Self {
        Rational(BigRational::from_integer(n))
    }

    pub fn zero() -> Self {
        Rational(BigRational::zero())
    }

    pub fn one() -> Self {
        Rational(BigRational::one())
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn abs(&self) -> Self {
        Rational(self.0.abs())
    }

    /// Panics on zero.
    pub fn recip(&self) -> Self {
        Rational(self.0.recip())
    }

    pub fn floor(&self) -> BigInt {
        self.0.floor().to_integer()
    }

    pub fn ceil(&self) -> BigInt {
        self.0.ceil().to_integer()
    }

    /// Ceiling as a machine integer; `None` if negative or too large.
    pub fn ceil_u64(&self) -> Option<u64> {
        self.ceil().to_u64()
    }

    pub fn powi(&self, exp: i32) -> Self {
        Rational(Pow::pow(&self.0, exp))
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    pub fn min(self, other: Self) -> Self {
        std::cmp::min(self, other)
    }

    pub fn max(self, other: Self) -> Self {
        std::cmp::max(self, other)
    }

    /// Largest multiple of `1/2^bits` not above `self`.
    pub fn round_down_bits(&self, bits: u32) -> Self {
        let scale = BigInt::one() << bits;
        let scaled = (&self.0 * BigRational::from_integer(scale.clone())).floor().to_integer();
        Rational(BigRational::new(scaled, scale))
    }

    /// Smallest multiple of `1/2^bits` not below `self`.
    pub fn round_up_bits(&self, bits: u32) -> Self {
        let scale = BigInt::one() << bits;
        let scaled = (&self.0 * BigRational::from_integer(scale.clone())).ceil().to_integer();
        Rational(BigRational::new(scaled, scale))
    }

    /// Always `num/den`, including integers (`3/1`).
    pub fn to_fraction_string(&self) -> String {
        format!("{}/{}", self.numer(), self.denom())
    }

    /// Decimal rendering rounded half-up to `sig` significant digits, trailing
    /// zeros removed, no exponent notation.
    pub fn to_decimal_string(&self, sig: u32) -> String {
        assert!(sig > 0);
        if self.is_zero() {
            return "0".to_string();
        }
        let neg = self.is_negative();
        let mag = self.abs();
        // exponent e with 10^e <= mag < 10^(e+1)
        let ten = Rational::integer(10);
        let mut e: i64 = mag.floor().to_string().len() as i64 - 1;
        if mag < Rational::one() {
            e = -1;
            let mut probe = mag.clone() * ten.clone();
            while probe < Rational::one() {
                probe *= ten.clone();
                e -= 1;
            }
        }
        let shift = sig as i64 - 1 - e;
        let scale = |shift: i64| ten.powi(shift as i32);
        let half = Rational::new(1, 2);
        let mut digits = (mag.clone() * scale(shift) + half.clone()).floor();
        let mut shift = shift;
        if digits.to_string().len() > sig as usize {
            // rounding carried into a new leading digit
            shift -= 1;
            digits = (mag * scale(shift) + half).floor();
        }
        let digit_str = digits.to_string();
        let body = if shift <= 0 {
            let zeros = "0".repeat((-shift) as usize);
            format!("{digit_str}{zeros}")
        } else {
            let shift = shift as usize;
            let padded = if digit_str.len() <= shift {
                format!("{}{}", "0".repeat(shift - digit_str.len() + 1), digit_str)
            } else {
                digit_str
            };
            let (int_part, frac_part) = padded.split_at(padded.len() - shift);
            let frac_part = frac_part.trim_end_matches('0');
            if frac_part.is_empty() {
                int_part.to_string()
            } else {
                format!("{int_part}.{frac_part}")
            }
        };
        if neg {
            format!("-{body}")
        } else {
            body
        }
    }
}

impl From<i64> for Rational {
    fn from(n: i64) -> Self {
        Rational::integer(n)
    }
}

impl From<u64> for Rational {
    fn from(n: u64) -> Self {
        Rational::from_bigint(n.into())
    }
}

impl From<usize> for Rational {
    fn from(n: usize) -> Self {
        Rational::from_bigint(n.into())
    }
}

impl From<BigRational> for Rational {
    fn from(r: BigRational) -> Self {
        Rational(r)
    }
}

/// Accepts `num/den`, integers, and terminating decimals (`0.25`, `-1.5`).
/// Exponent notation and repeating decimals are rejected.
impl FromStr for Rational {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let err = || Error::Parse {
            what: "rational",
            input: s.to_string(),
        };
        let t = s.trim();
        if t.is_empty() {
            return Err(err());
        }
        if let Some((n, d)) = t.split_once('/') {
            let n: BigInt = parse_int(n).ok_or_else(err)?;
            let d: BigInt = parse_int(d).ok_or_else(err)?;
            if d.is_zero() {
                return Err(err());
            }
            return Ok(Rational::from_bigints(n, d));
        }
        let (neg, body) = match t.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, t.strip_prefix('+').unwrap_or(t)),
        };
        let (int_part, frac_part) = match body.split_once('.') {
            Some((i, f)) => (i, f),
            None => (body, ""),
        };
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(err());
        }
        let all_digits = |p: &str| p.bytes().all(|b| b.is_ascii_digit());
        if !all_digits(int_part) || !all_digits(frac_part) {
            return Err(err());
        }
        let mut digits = String::with_capacity(int_part.len() + frac_part.len() + 1);
        digits.push_str(int_part);
        digits.push_str(frac_part);
        if digits.is_empty() {
            return Err(err());
        }
        let mag: BigInt = digits.parse().map_err(|_| err())?;
        let den = num_traits::pow(BigInt::from(10), frac_part.len());
        let mag = if neg { -mag } else { mag };
        Ok(Rational::from_bigints(mag, den))
    }
}

fn parse_int(s: &str) -> Option<BigInt> {
    let s = s.trim();
    let body = s.strip_prefix('-').or_else(|| s.strip_prefix('+')).unwrap_or(s);
    if body.is_empty() || !body.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    s.parse().ok()
}

impl fmt::Display for Rational {
    /// `num/den`, or just `num` for integers.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_integer() {
            write!(f, "{}", self.numer())
        } else {
            write!(f, "{}/{}", self.numer(), self.denom())
        }
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.numer(), self.denom())
    }
}

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-self.0)
    }
}

impl Neg for &Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-&self.0)
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident, $assign_trait:ident, $assign_method:ident) => {
        impl $trait<Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational(self.0.$method(rhs.0))
            }
        }
        impl $trait<&Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: &Rational) -> Rational {
                Rational(self.0.$method(&rhs.0))
            }
        }
        impl $trait<Rational> for &Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational((&self.0).$method(rhs.0))
            }
        }
        impl $trait<&Rational> for &Rational {
            type Output = Rational;
            fn $method(self, rhs: &Rational) -> Rational {
                Rational((&self.0).$method(&rhs.0))
            }
        }
        impl $trait<i64> for Rational {
            type Output = Rational;
            fn $method(self, rhs: i64) -> Rational {
                Rational(self.0.$method(BigRational::from_integer(rhs.into())))
            }
        }
        impl $trait<i64> for &Rational {
            type Output = Rational;
            fn $method(self, rhs: i64) -> Rational {
                Rational((&self.0).$method(BigRational::from_integer(rhs.into())))
            }
        }
        impl $assign_trait<Rational> for Rational {
            fn $assign_method(&mut self, rhs: Rational) {
                self.0.$assign_method(rhs.0);
            }
        }
        impl $assign_trait<&Rational> for Rational {
            fn $assign_method(&mut self, rhs: &Rational) {
                self.0.$assign_method(&rhs.0);
            }
        }
    };
}

binop!(Add, add, AddAssign, add_assign);
binop!(Sub, sub, SubAssign, sub_assign);
binop!(Mul, mul, MulAssign, mul_assign);
binop!(Div, div, DivAssign, div_assign);

impl Sum for Rational {
    fn sum<I: Iterator<Item = Rational>>(iter: I) -> Rational {
        iter.fold(Rational::zero(), |acc, x| acc + x)
    }
}

impl<'a> Sum<&'a Rational> for Rational {
    fn sum<I: Iterator<Item = &'a Rational>>(iter: I) -> Rational {
        iter.fold(Rational::zero(), |acc, x| acc + x)
    }
}

impl Product for Rational {
    fn product<I: Iterator<Item = Rational>>(iter: I) -> Rational {
        iter.fold(Rational::one(), |acc, x| acc * x)
    }
}

impl PartialEq<i64> for Rational {
    fn eq(&self, other: &i64) -> bool {
        self.is_integer() && *self.numer() == BigInt::from(*other)
    }
}

impl PartialOrd<i64> for Rational {
    fn partial_cmp(&self, other: &i64) -> Option<Ordering> {
        Some(self.cmp(&Rational::integer(*other)))
    }
}

/// `(1 - 1/b)^e` style helpers want integer powers of small fractions.
pub fn pow_ratio(num: u64, den: u64, exp: u32) -> Rational {
    let n = num_traits::pow(BigInt::from(num), exp as usize);
    let d = num_traits::pow(BigInt::from(den), exp as usize);
    if num.gcd(&den) == 1 {
        // already coprime; skip the gcd on potentially huge operands
        Rational(BigRational::new_raw(n, d))
    } else {
        Rational::from_bigints(n, d)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(s: &str) -> Rational {
        s.parse().unwrap()
    }

    #[test]
    fn lowest_terms() {
        let r = Rational::new(6, -4);
        assert_eq!(*r.numer(), BigInt::from(-3));
        assert_eq!(*r.denom(), BigInt::from(2));
    }

    #[test]
    fn parse_forms() {
        assert_eq!(q("3/6"), Rational::new(1, 2));
        assert_eq!(q("0.25"), Rational::new(1, 4));
        assert_eq!(q("-1.5"), Rational::new(-3, 2));
        assert_eq!(q("7"), Rational::integer(7));
        assert_eq!(q(".5"), Rational::new(1, 2));
        for bad in ["", "1/0", "1e-3", "0.3.3", "abc", "1/", "/2", "-", "."] {
            assert!(bad.parse::<Rational>().is_err(), "{bad}");
        }
    }

    #[test]
    fn display_forms() {
        assert_eq!(Rational::integer(3).to_string(), "3");
        assert_eq!(Rational::new(18, 5).to_string(), "18/5");
        assert_eq!(Rational::integer(3).to_fraction_string(), "3/1");
    }

    #[test]
    fn decimal_rendering() {
        assert_eq!(Rational::new(1, 2).to_decimal_string(12), "0.5");
        assert_eq!(Rational::integer(3).to_decimal_string(12), "3");
        assert_eq!(Rational::new(1, 3).to_decimal_string(12), "0.333333333333");
        assert_eq!(Rational::new(2, 3).to_decimal_string(12), "0.666666666667");
        assert_eq!(Rational::new(16, 11).to_decimal_string(12), "1.45454545455");
        assert_eq!(Rational::new(9999999, 10000000).to_decimal_string(3), "1");
        assert_eq!(Rational::integer(12345).to_decimal_string(3), "12300");
        assert_eq!(Rational::new(-1, 8).to_decimal_string(12), "-0.125");
        assert_eq!(Rational::new(1, 1000).to_decimal_string(12), "0.001");
    }

    #[test]
    fn rounding_to_dyadics() {
        let third = Rational::new(1, 3);
        let lo = third.round_down_bits(10);
        let hi = third.round_up_bits(10);
        assert!(lo <= third && third <= hi);
        assert_eq!(&hi - &lo, Rational::new(1, 1024));
        assert_eq!(Rational::new(1, 4).round_up_bits(10), Rational::new(1, 4));
    }

    #[test]
    fn ceil_floor() {
        assert_eq!(Rational::new(7, 2).ceil_u64(), Some(4));
        assert_eq!(Rational::integer(5).ceil_u64(), Some(5));
        assert_eq!(Rational::new(7, 2).floor(), BigInt::from(3));
    }

    fn small() -> impl Strategy<Value = Rational> {
        (-1000i64..1000, 1i64..1000).prop_map(|(n, d)| Rational::new(n, d))
    }

    proptest! {
        #[test]
        fn add_associative_commutative(a in small(), b in small(), c in small()) {
            prop_assert_eq!((&a + &b) + &c, &a + (&b + &c));
            prop_assert_eq!(&a + &b, &b + &a);
            prop_assert_eq!(&a * &b, &b * &a);
            prop_assert_eq!((&a * &b) * &c, &a * (&b * &c));
        }

        #[test]
        fn canonical_after_ops(a in small(), b in small()) {
            let s = &a - &b;
            prop_assert!(s.denom() > &BigInt::zero());
            prop_assert_eq!(s.numer().gcd(s.denom()), if s.is_zero() { s.denom().clone() } else { BigInt::one() });
        }

        #[test]
        fn fraction_string_round_trips(a in small()) {
            prop_assert_eq!(a.to_fraction_string().parse::<Rational>().unwrap(), a);
        }
    }
}
