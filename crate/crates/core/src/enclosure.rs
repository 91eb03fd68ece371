//! Certified rational enclosures of transcendental values.
//!
//! An [`Enclosure`] is a closed interval `[lo, hi]` with rational endpoints
//! that is guaranteed to contain the true real value. Series are truncated
//! with explicit remainder bounds and endpoints are rounded outward to dyadic
//! rationals so that operand sizes stay bounded.

use crate::rational::Rational;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Enclosure {
    lo: Rational,
    hi: Rational,
}

impl Enclosure {
    /// Panics if `lo > hi`.
    pub fn new(lo: Rational, hi: Rational) -> Self {
        assert!(lo <= hi, "empty enclosure [{lo}, {hi}]");
        Enclosure { lo, hi }
    }

    pub fn exact(q: Rational) -> Self {
        Enclosure {
            lo: q.clone(),
            hi: q,
        }
    }

    pub fn lo(&self) -> &Rational {
        &self.lo
    }

    pub fn hi(&self) -> &Rational {
        &self.hi
    }

    pub fn width(&self) -> Rational {
        &self.hi - &self.lo
    }

    pub fn midpoint(&self) -> Rational {
        (&self.lo + &self.hi) / 2
    }

    pub fn contains(&self, q: &Rational) -> bool {
        &self.lo <= q && q <= &self.hi
    }

    pub fn overlaps(&self, other: &Enclosure) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }

    pub fn is_positive(&self) -> bool {
        self.lo.is_positive()
    }

    pub fn add(&self, other: &Enclosure) -> Enclosure {
        Enclosure::new(&self.lo + &other.lo, &self.hi + &other.hi)
    }

    pub fn sub(&self, other: &Enclosure) -> Enclosure {
        Enclosure::new(&self.lo - &other.hi, &self.hi - &other.lo)
    }

    pub fn neg(&self) -> Enclosure {
        Enclosure::new(-&self.hi, -&self.lo)
    }

    pub fn mul(&self, other: &Enclosure) -> Enclosure {
        let products = [
            &self.lo * &other.lo,
            &self.lo * &other.hi,
            &self.hi * &other.lo,
            &self.hi * &other.hi,
        ];
        let lo = products.iter().min().unwrap().clone();
        let hi = products.iter().max().unwrap().clone();
        Enclosure::new(lo, hi)
    }

    pub fn scale(&self, q: &Rational) -> Enclosure {
        self.mul(&Enclosure::exact(q.clone()))
    }

    /// Panics if the interval contains zero.
    pub fn recip(&self) -> Enclosure {
        assert!(
            self.lo.is_positive() || self.hi.is_negative(),
            "reciprocal of an enclosure containing zero"
        );
        Enclosure::new(self.hi.recip(), self.lo.recip())
    }

    pub fn div(&self, other: &Enclosure) -> Enclosure {
        self.mul(&other.recip())
    }

    /// Round endpoints outward to multiples of `2^-bits`.
    pub fn widen_to_bits(&self, bits: u32) -> Enclosure {
        Enclosure::new(self.lo.round_down_bits(bits), self.hi.round_up_bits(bits))
    }
}

/// Runs `f` at increasing working precision until the result is at most
/// `tol` wide.
fn refine(tol: &Rational, f: impl Fn(u32) -> Enclosure) -> Enclosure {
    assert!(tol.is_positive(), "tolerance must be positive");
    let mut bits = 64;
    loop {
        let e = f(bits);
        if e.width() <= *tol {
            return e;
        }
        bits *= 2;
        assert!(bits <= 1 << 16, "enclosure failed to converge");
    }
}

/// `2^-bits` as a rational.
fn ulp(bits: u32) -> Rational {
    Rational::from_bigints(1.into(), num_bigint::BigInt::from(1) << bits)
}

/// `exp(r)` for `|r| <= 1/2` by Taylor series; remainder bounded by
/// `2 |r|^(N+1) / (N+1)!` since `e^{1/2} < 2`.
fn exp_small(r: &Rational, bits: u32) -> Enclosure {
    let target = ulp(bits + 4);
    let abs_r = r.abs();
    let mut term = Rational::one();
    let mut sum = Rational::one();
    let mut n: i64 = 0;
    loop {
        n += 1;
        term = (&term * r) / n;
        sum += &term;
        let tail = term.abs() * &abs_r / (n + 1) * 2;
        if tail <= target {
            return Enclosure::new(&sum - &tail, &sum + &tail).widen_to_bits(bits + 4);
        }
    }
}

fn exp_at(q: &Rational, bits: u32) -> Enclosure {
    if q.is_zero() {
        return Enclosure::exact(Rational::one());
    }
    // halve until |r| <= 1/2, then square back up
    let half = Rational::new(1, 2);
    let mut halvings = 0u32;
    let mut r = q.clone();
    while r.abs() > half {
        r = r / 2;
        halvings += 1;
    }
    let work = bits + 2 * halvings + 8;
    let mut e = exp_small(&r, work);
    for _ in 0..halvings {
        e = e.mul(&e).widen_to_bits(work);
    }
    e
}

/// Enclosure of `e^q` no wider than `tol`.
pub fn exp(q: &Rational, tol: &Rational) -> Enclosure {
    refine(tol, |bits| exp_at(q, bits))
}

/// `2 atanh(z)` for `0 <= z <= 1/3`; tail after the `z^(2N+1)` term bounded
/// by `z^(2N+3) / ((2N+3)(1 - z^2))` with `1/(1 - z^2) <= 9/8`.
fn two_atanh(z: &Rational, bits: u32) -> Enclosure {
    let target = ulp(bits + 4);
    let z2 = z * z;
    let mut power = z.clone();
    let mut sum = z.clone();
    let mut k: i64 = 0;
    loop {
        k += 1;
        power = &power * &z2;
        sum += &power / (2 * k + 1);
        let tail = &power * &z2 * Rational::new(9, 8) / (2 * k + 3);
        if tail <= target {
            let e = Enclosure::new(sum.clone(), &sum + &tail);
            return e.scale(&Rational::integer(2)).widen_to_bits(bits + 4);
        }
    }
}

fn ln_at(q: &Rational, bits: u32) -> Enclosure {
    assert!(q.is_positive(), "logarithm of a nonpositive value");
    if *q == Rational::one() {
        return Enclosure::exact(Rational::zero());
    }
    if *q < Rational::one() {
        return ln_at(&q.recip(), bits).neg();
    }
    // q = 2^m * s with 1 <= s < 2
    let mut m: i64 = 0;
    let mut s = q.clone();
    let two = Rational::integer(2);
    while s >= two {
        s = s / 2;
        m += 1;
    }
    let work = bits + 8 + (64 - (m.max(1) as u64).leading_zeros());
    let z = (&s - 1) / (&s + 1);
    let mut e = two_atanh(&z, work);
    if m > 0 {
        let ln2 = two_atanh(&Rational::new(1, 3), work);
        e = e.add(&ln2.scale(&Rational::integer(m)));
    }
    e.widen_to_bits(work)
}

/// Enclosure of `ln q` (natural log) no wider than `tol`. Panics if `q <= 0`.
pub fn ln(q: &Rational, tol: &Rational) -> Enclosure {
    refine(tol, |bits| ln_at(q, bits))
}

/// Enclosure of `base^exponent` for `base > 0`. Exact for integer exponents.
pub fn pow(base: &Rational, exponent: &Rational, tol: &Rational) -> Enclosure {
    assert!(base.is_positive(), "power of a nonpositive base");
    if exponent.is_integer() {
        if let Ok(e) = i32::try_from(exponent.numer()) {
            return Enclosure::exact(base.powi(e));
        }
    }
    refine(tol, |bits| {
        let l = ln_at(base, bits + 16);
        let t = l.scale(exponent);
        // exp is increasing: evaluate at both ends of the exponent enclosure
        let lo = exp_at(t.lo(), bits + 8);
        let hi = exp_at(t.hi(), bits + 8);
        Enclosure::new(lo.lo().clone(), hi.hi().clone())
    })
}

/// `10^-digits`.
pub fn decimal_tolerance(digits: u32) -> Rational {
    Rational::integer(10).powi(-(digits as i32))
}
