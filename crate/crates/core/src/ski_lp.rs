//! The feasibility LP behind the randomized ski-rental lower bound.
//!
//! Variables `p_1..p_y` are buy-day probabilities for the hard prediction
//! `y = 2B - 1`. A `β`-consistent, `γ`-robust strategy exists iff the LP
//! built by [`build_lp`] is feasible. The closed forms here ([`analytic_k`],
//! [`analytic_distribution`], [`min_consistency`]) give the exact boundary,
//! which [`verify_tightness`] cross-checks with the exact simplex.

use num_bigint::BigInt;
use num_traits::One;

use crate::enclosure::{self, Enclosure};
use crate::error::{Error, Result};
use crate::lp::{lp_feasible, Constraint, LpProblem, Relation};
use crate::rational::{pow_ratio, Rational};
use crate::ski_rental::BuyDistribution;

pub use crate::lp::LpFeasibility;

fn check_budget(budget: u64) -> Result<()> {
    if budget < 2 {
        return Err(Error::invalid(format!("LP needs B >= 2, got {budget}")));
    }
    Ok(())
}

fn check_gamma(gamma: &Rational) -> Result<()> {
    if *gamma <= Rational::one() {
        return Err(Error::invalid(format!("robustness {gamma} must exceed 1")));
    }
    Ok(())
}

/// Number of LP variables for buy cost `B`.
pub fn horizon(budget: u64) -> usize {
    2 * budget as usize - 1
}

/// Expected-cost row for season length `x` over `num_vars` buy days:
/// `B + i - 1` for days `i <= x`, and `x` for later days.
fn cost_row(budget: u64, x: u64, num_vars: usize) -> Vec<Rational> {
    (1..=num_vars as u64)
        .map(|i| {
            if i <= x {
                Rational::from(budget + i - 1)
            } else {
                Rational::from(x)
            }
        })
        .collect()
}

/// Robustness constraint `C(x)`: expected cost at season length `x` is at
/// most `γ · min(x, B)`.
fn robustness_row(budget: u64, gamma: &Rational, x: u64, num_vars: usize) -> Constraint {
    Constraint::new(
        cost_row(budget, x, num_vars),
        Relation::Le,
        gamma * Rational::from(x.min(budget)),
    )
}

fn core_rows(budget: u64, beta: &Rational, gamma: &Rational, num_vars: usize) -> Vec<Constraint> {
    let y = horizon(budget) as u64;
    let mut rows = Vec::with_capacity(budget as usize + 1);
    rows.push(Constraint::new(
        vec![Rational::one(); num_vars],
        Relation::Eq,
        Rational::one(),
    ));
    // consistency at x = y >= B, where OPT = B
    rows.push(Constraint::new(
        cost_row(budget, y, num_vars),
        Relation::Le,
        beta * Rational::from(budget),
    ));
    for x in 1..budget {
        rows.push(robustness_row(budget, gamma, x, num_vars));
    }
    rows
}

fn check_pair(budget: u64, beta: &Rational, gamma: &Rational) -> Result<()> {
    check_budget(budget)?;
    if *beta < Rational::one() {
        return Err(Error::invalid(format!("consistency {beta} below 1")));
    }
    if beta >= gamma {
        return Err(Error::invalid(format!(
            "consistency {beta} must be strictly below robustness {gamma}"
        )));
    }
    Ok(())
}

/// The reduced LP: `2B - 1` variables and `B + 1` constraints, in order
/// probability, consistency, then `C(1)..C(B-1)`.
pub fn build_lp(budget: u64, beta: &Rational, gamma: &Rational) -> Result<LpProblem> {
    check_pair(budget, beta, gamma)?;
    let n = horizon(budget);
    LpProblem::new(n, core_rows(budget, beta, gamma, n))
}

/// [`build_lp`] plus the robustness constraints `C(x)` for each listed
/// `x` in `B..=2B-1`, which the reduction drops as redundant.
pub fn build_lp_with_dropped_rows(
    budget: u64,
    beta: &Rational,
    gamma: &Rational,
    xs: &[u64],
) -> Result<LpProblem> {
    let mut lp = build_lp(budget, beta, gamma)?;
    let y = horizon(budget) as u64;
    for &x in xs {
        if x < budget || x > y {
            return Err(Error::invalid(format!("dropped row C({x}) outside B..=2B-1")));
        }
        let row = robustness_row(budget, gamma, x, lp.num_vars());
        lp = lp.with_constraint(row)?;
    }
    Ok(lp)
}

/// The unreduced LP restricted to buy days `1..=2B-1+extra`: every
/// robustness constraint that is distinct on that support is present.
pub fn build_extended_lp(budget: u64, beta: &Rational, gamma: &Rational, extra: usize) -> Result<LpProblem> {
    check_pair(budget, beta, gamma)?;
    let n = horizon(budget) + extra;
    let mut rows = core_rows(budget, beta, gamma, n);
    for x in budget..=n as u64 {
        rows.push(robustness_row(budget, gamma, x, n));
    }
    LpProblem::new(n, rows)
}

/// Smallest `k` with `(γ-1)((B/(B-1))^k - 1) >= 1`, by exact iteration.
pub fn analytic_k(budget: u64, gamma: &Rational) -> Result<u64> {
    check_budget(budget)?;
    check_gamma(gamma)?;
    // (γ-1) = a/d:  a (B^k - (B-1)^k) >= d (B-1)^k
    let slack = gamma - 1;
    let (a, d) = (slack.numer().clone(), slack.denom().clone());
    let b = BigInt::from(budget);
    let b1 = BigInt::from(budget - 1);
    let mut pb = BigInt::one();
    let mut pb1 = BigInt::one();
    let mut k = 0u64;
    loop {
        k += 1;
        pb *= &b;
        pb1 *= &b1;
        if &a * (&pb - &pb1) >= &d * &pb1 {
            return Ok(k);
        }
    }
}

fn k_within_budget(budget: u64, gamma: &Rational) -> Result<u64> {
    let k = analytic_k(budget, gamma)?;
    if k > budget {
        return Err(Error::SupportExceedsBudget { k, budget });
    }
    Ok(k)
}

/// Buy-day distribution that makes `C(1)..C(k-1)` tight:
/// `p_i = (γ-1)/(B-1) · (B/(B-1))^(i-1)` for `i < k`, remainder on day `k`.
pub fn analytic_distribution(budget: u64, gamma: &Rational) -> Result<BuyDistribution> {
    let k = k_within_budget(budget, gamma)?;
    let base = (gamma - 1) / Rational::from(budget - 1);
    let mut probs = Vec::with_capacity(k as usize);
    let mut growth = Rational::one();
    let step = Rational::from(budget) / Rational::from(budget - 1);
    for _ in 1..k {
        probs.push(&base * &growth);
        growth *= &step;
    }
    let used: Rational = probs.iter().sum();
    probs.push(Rational::one() - used);
    BuyDistribution::new(probs)
}

/// Pads a buy-day distribution with zeros to `num_vars` LP variables.
pub fn to_lp_point(dist: &BuyDistribution, num_vars: usize) -> Vec<Rational> {
    let mut x = dist.probs().to_vec();
    x.resize(num_vars.max(x.len()), Rational::zero());
    x
}

/// Least consistency compatible with robustness `γ`:
/// `1 + (k-1)γ/B + (γ-1)(1 - (B/(B-1))^(k-1))`.
pub fn min_consistency(budget: u64, gamma: &Rational) -> Result<Rational> {
    let k = k_within_budget(budget, gamma)?;
    let b = Rational::from(budget);
    let growth = pow_ratio(budget, budget - 1, (k - 1) as u32);
    Ok(Rational::one() + Rational::from(k - 1) * gamma / &b + (gamma - 1) * (Rational::one() - growth))
}

/// Enclosure of `γ · ln(1 + 1/(γ-1))` over every `γ` in `gamma`.
///
/// The map is decreasing in `γ`, so the ends of `gamma` bound it.
pub fn asymptotic_bound_enclosure(gamma: &Enclosure, tol: &Rational) -> Enclosure {
    assert!(*gamma.lo() > Rational::one(), "robustness must exceed 1");
    let inner = tol / (gamma.hi() * 4);
    let arg = |g: &Rational| Rational::one() + (g - 1).recip();
    let ln_small = enclosure::ln(&arg(gamma.hi()), &inner);
    let ln_large = enclosure::ln(&arg(gamma.lo()), &inner);
    let log_term = Enclosure::new(ln_small.lo().clone(), ln_large.hi().clone());
    gamma.mul(&log_term)
}

/// Rational lower enclosure of `γ · ln(1 + 1/(γ-1))`, within `10^-digits`.
pub fn asymptotic_lower_bound(gamma: &Rational, digits: u32) -> Result<Rational> {
    check_gamma(gamma)?;
    let tol = enclosure::decimal_tolerance(digits);
    Ok(asymptotic_bound_enclosure(&Enclosure::exact(gamma.clone()), &tol)
        .lo()
        .clone())
}

/// Enclosure of the finite-`B` bound `(γ/B) · ln(1 + 1/(γ-1)) / ln(1 + 1/(B-1))`.
pub fn pre_limit_bound(budget: u64, gamma: &Rational, tol: &Rational) -> Result<Enclosure> {
    check_budget(budget)?;
    check_gamma(gamma)?;
    let b = Rational::from(budget);
    let small = tol / (gamma * 64);
    let num = enclosure::ln(&(Rational::one() + (gamma - 1).recip()), &small);
    let den = enclosure::ln(&(Rational::one() + (&b - 1).recip()), &(&small / (&b * &b)));
    Ok(num.div(&den).scale(&(gamma / b)))
}

/// Certified lower bound on `x/B - (B/(B-1))^(-1) ((B/(B-1))^x - 1)`; exact
/// whenever `x` is an integer.
pub fn convexity_gap_lower(budget: u64, x: &Rational, tol: &Rational) -> Result<Rational> {
    check_budget(budget)?;
    let b = Rational::from(budget);
    let base = &b / (&b - 1);
    let power = enclosure::pow(&base, x, tol);
    Ok(x / &b - (Rational::one() / &base) * (power.hi() - 1))
}

#[derive(Clone, Debug)]
pub struct TightnessReport {
    pub budget: u64,
    pub gamma: Rational,
    pub k: u64,
    pub beta_min: Rational,
    /// Largest probed infeasible consistency.
    pub infeasible_below: Rational,
    /// Smallest probed feasible consistency.
    pub feasible_above: Rational,
    pub bracketed: bool,
    pub feasible_at_min: bool,
    pub witness_accepted: bool,
    /// Smallest certified lower bound of the convexity gap on the x-grid.
    pub convexity_gap_min: Rational,
    pub convexity_gap_endpoints_zero: bool,
}

impl TightnessReport {
    pub fn passed(&self) -> bool {
        self.bracketed
            && self.feasible_at_min
            && self.witness_accepted
            && !self.convexity_gap_min.is_negative()
            && self.convexity_gap_endpoints_zero
    }
}

/// Is the LP at consistency `beta` feasible? `beta >= γ` counts as feasible
/// because the consistency row is then implied.
pub fn feasible_at(budget: u64, beta: &Rational, gamma: &Rational) -> Result<bool> {
    if beta >= gamma {
        return Ok(true);
    }
    Ok(lp_feasible(&build_lp(budget, beta, gamma)?)?.feasible)
}

/// Bisects the consistency over `[1, γ]` for `depth` rounds with the exact
/// simplex and checks that the boundary brackets [`min_consistency`]; also
/// checks the convexity-gap inequality on `x = j/100`, `j = 0..=100`.
pub fn verify_tightness(budget: u64, gamma: &Rational, depth: u32) -> Result<TightnessReport> {
    let k = k_within_budget(budget, gamma)?;
    let beta_min = min_consistency(budget, gamma)?;

    let mut lo = Rational::one();
    let mut hi = gamma.clone();
    if feasible_at(budget, &lo, gamma)? {
        hi = lo.clone();
    } else {
        for _ in 0..depth {
            let mid = (&lo + &hi) / 2;
            if feasible_at(budget, &mid, gamma)? {
                hi = mid;
            } else {
                lo = mid;
            }
        }
    }
    let bracketed = lo < beta_min && beta_min <= hi;

    let lp = build_lp(budget, &beta_min.clone().min(gamma.clone()), gamma);
    let (feasible_at_min, witness_accepted) = match lp {
        Ok(lp) => {
            let dist = analytic_distribution(budget, gamma)?;
            let point = to_lp_point(&dist, lp.num_vars());
            (lp_feasible(&lp)?.feasible, lp.is_satisfied_by(&point))
        }
        Err(_) => (true, true),
    };

    let tol = enclosure::decimal_tolerance(12);
    let mut gap_min: Option<Rational> = None;
    for j in 0..=100 {
        let g = convexity_gap_lower(budget, &Rational::new(j, 100), &tol)?;
        if gap_min.as_ref().is_none_or(|m| g < *m) {
            gap_min = Some(g);
        }
    }
    let endpoints_zero = convexity_gap_lower(budget, &Rational::zero(), &tol)?.is_zero()
        && convexity_gap_lower(budget, &Rational::one(), &tol)?.is_zero();

    Ok(TightnessReport {
        budget,
        gamma: gamma.clone(),
        k,
        beta_min,
        infeasible_below: lo,
        feasible_above: hi,
        bracketed,
        feasible_at_min,
        witness_accepted,
        convexity_gap_min: gap_min.expect("grid is nonempty"),
        convexity_gap_endpoints_zero: endpoints_zero,
    })
}
