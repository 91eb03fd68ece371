//! Deterministic and randomized ski rental with a predicted season length.
//!
//! Both algorithms pick a horizon from the prediction: when `y >= B` they
//! commit early (around day `λB`), otherwise they wait (around day `B/λ`).
//! Worst cases are measured by exact finite sweeps; the sweep bounds are
//! chosen so that every ratio beyond them repeats one already visited.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::enclosure::{self, Enclosure};
use crate::error::{Error, Result};
use crate::model::{opt_ski_cost, SkiInstance, TradeoffPoint};
use crate::rational::Rational;

fn check_lambda(lambda: &Rational) -> Result<()> {
    if !lambda.is_positive() || *lambda >= Rational::one() {
        return Err(Error::invalid(format!("lambda {lambda} outside (0, 1)")));
    }
    Ok(())
}

fn check_budget(budget: u64) -> Result<()> {
    if budget == 0 {
        return Err(Error::invalid("buy cost B must be >= 1"));
    }
    Ok(())
}

fn ceil_day(q: Rational) -> u64 {
    q.ceil_u64().expect("day index fits in u64")
}

/// Buy day used for prediction `y`: `⌈λB⌉` when `y >= B`, else `⌈B/λ⌉`.
fn horizon(budget: u64, predicted: u64, lambda: &Rational) -> u64 {
    let b = Rational::from(budget);
    if predicted >= budget {
        ceil_day(lambda * b)
    } else {
        ceil_day(b / lambda)
    }
}

/// Deterministic policy: buy at the start of `buy_day`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DetPolicy {
    buy_day: u64,
}

impl DetPolicy {
    pub fn new(buy_day: u64) -> Result<Self> {
        if buy_day == 0 {
            return Err(Error::invalid("buy day must be >= 1"));
        }
        Ok(DetPolicy { buy_day })
    }

    pub fn buy_day(&self) -> u64 {
        self.buy_day
    }
}

pub fn det_buy_day(budget: u64, predicted: u64, lambda: &Rational) -> Result<DetPolicy> {
    check_budget(budget)?;
    check_lambda(lambda)?;
    if predicted == 0 {
        return Err(Error::invalid("prediction y must be >= 1"));
    }
    DetPolicy::new(horizon(budget, predicted, lambda))
}

/// Rent on days `1..t`, buy at the start of day `t` if the season lasts that long.
pub fn det_cost(budget: u64, true_days: u64, policy: DetPolicy) -> Rational {
    let t = policy.buy_day;
    if true_days < t {
        Rational::from(true_days)
    } else {
        Rational::from(t - 1 + budget)
    }
}

/// Maxima of a finite sweep together with the instances that attain them.
#[derive(Clone, Debug)]
pub struct SweepResult {
    pub point: TradeoffPoint,
    pub consistency_witness: SkiInstance,
    pub robustness_witness: SkiInstance,
}

/// Exact worst-case consistency and robustness of the deterministic
/// algorithm over `x, y` in `1..=2⌈B/λ⌉ + B`.
pub fn det_worst_case(budget: u64, lambda: &Rational) -> Result<TradeoffPoint> {
    Ok(det_sweep(budget, lambda)?.point)
}

pub fn det_sweep(budget: u64, lambda: &Rational) -> Result<SweepResult> {
    check_budget(budget)?;
    check_lambda(lambda)?;
    let x_max = 2 * ceil_day(Rational::from(budget) / lambda) + budget;
    let ratio_at = |x: u64, t: u64| {
        let inst = SkiInstance::new(budget, x, 1).expect("positive");
        det_cost(budget, x, DetPolicy { buy_day: t }) / opt_ski_cost(&inst)
    };

    let mut consistency = (Rational::zero(), 0);
    // the policy only depends on y through its buy day, so the x-sweep is
    // shared by every y mapping to the same day
    let mut per_day: BTreeMap<u64, (Rational, u64, u64)> = BTreeMap::new();
    for y in 1..=x_max {
        let t = horizon(budget, y, lambda);
        let r = ratio_at(y, t);
        if r > consistency.0 {
            consistency = (r, y);
        }
        per_day.entry(t).or_insert_with(|| {
            let mut best = (Rational::zero(), 0, y);
            for x in 1..=x_max {
                let r = ratio_at(x, t);
                if r > best.0 {
                    best = (r, x, y);
                }
            }
            best
        });
    }
    let (robustness, rx, ry) = per_day
        .into_values()
        .max_by(|a, b| a.0.cmp(&b.0).then(b.1.cmp(&a.1)))
        .expect("at least one prediction swept");
    Ok(SweepResult {
        point: TradeoffPoint::new(lambda.clone(), consistency.0, robustness)?,
        consistency_witness: SkiInstance::new(budget, consistency.1, consistency.1)?,
        robustness_witness: SkiInstance::new(budget, rx, ry)?,
    })
}

/// Lower-bound instance against the deterministic algorithm: a prediction
/// just above `(1+λ)B` forces an early buy day `t`, then the season ends on
/// day `t`.
pub fn det_adversary(budget: u64, lambda: &Rational) -> Result<SkiInstance> {
    check_budget(budget)?;
    check_lambda(lambda)?;
    let threshold = (Rational::one() + lambda) * Rational::from(budget);
    let y = u64::try_from(threshold.floor() + BigInt::one()).expect("fits in u64");
    let t = det_buy_day(budget, y, lambda)?.buy_day;
    SkiInstance::new(budget, t, y)
}

/// `1 + (B-1)/(λB+1)`, the ratio any `(1+λ)`-consistent deterministic
/// algorithm must concede on the adversarial instance.
pub fn det_lower_bound(budget: u64, lambda: &Rational) -> Rational {
    let b = Rational::from(budget);
    Rational::one() + (&b - 1) / (lambda * &b + 1)
}

/// Probability of buying at the start of each day `1..=k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BuyDistribution {
    probs: Vec<Rational>,
}

impl BuyDistribution {
    pub fn new(probs: Vec<Rational>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::EmptyInput("buy distribution"));
        }
        if let Some(p) = probs.iter().find(|p| p.is_negative()) {
            return Err(Error::invalid(format!("negative probability {p}")));
        }
        let total: Rational = probs.iter().sum();
        if total != Rational::one() {
            return Err(Error::invalid(format!("probabilities sum to {total}, not 1")));
        }
        Ok(BuyDistribution { probs })
    }

    pub fn support_end(&self) -> u64 {
        self.probs.len() as u64
    }

    /// `probs()[i]` is the probability of buying on day `i + 1`.
    pub fn probs(&self) -> &[Rational] {
        &self.probs
    }
}

/// Buy day `i ∈ 1..=k` drawn with probability proportional to `(1-1/B)^(k-i)`.
pub fn rand_distribution(budget: u64, predicted: u64, lambda: &Rational) -> Result<BuyDistribution> {
    check_lambda(lambda)?;
    if budget < 2 {
        return Err(Error::invalid("randomized ski rental needs B >= 2"));
    }
    if predicted == 0 {
        return Err(Error::invalid("prediction y must be >= 1"));
    }
    let k = horizon(budget, predicted, lambda) as usize;
    // scale every weight by B^(k-1): w_i = (B-1)^(k-i) * B^(i-1), all integers
    let b = BigInt::from(budget);
    let b1 = BigInt::from(budget - 1);
    let mut weights = vec![BigInt::zero(); k];
    let mut pow_b = BigInt::one();
    for w in weights.iter_mut() {
        *w = pow_b.clone();
        pow_b *= &b;
    }
    let mut pow_b1 = BigInt::one();
    for w in weights.iter_mut().rev() {
        *w *= &pow_b1;
        pow_b1 *= &b1;
    }
    let total: BigInt = weights.iter().sum();
    let probs = weights
        .into_iter()
        .map(|w| Rational::from_bigints(w, total.clone()))
        .collect();
    Ok(BuyDistribution { probs })
}

/// Exact `E[cost]` when the season lasts `x` days.
pub fn expected_cost(dist: &BuyDistribution, budget: u64, true_days: u64) -> Rational {
    let b = Rational::from(budget);
    let x = Rational::from(true_days);
    let mut bought = Rational::zero();
    let mut rent_only = Rational::zero();
    for (i, p) in dist.probs.iter().enumerate() {
        let day = i as u64 + 1;
        if day <= true_days {
            bought += (&b + Rational::from(day - 1)) * p;
        } else {
            rent_only += p;
        }
    }
    bought + x * rent_only
}

/// `expected_cost` for every `x` in `1..=upto`, via prefix sums.
fn expected_cost_profile(dist: &BuyDistribution, budget: u64, upto: u64) -> Vec<Rational> {
    let b = Rational::from(budget);
    let mut out = Vec::with_capacity(upto as usize);
    let mut bought = Rational::zero();
    let mut mass = Rational::zero();
    for x in 1..=upto {
        if let Some(p) = dist.probs.get(x as usize - 1) {
            bought += (&b + Rational::from(x - 1)) * p;
            mass += p;
        }
        let tail = Rational::one() - &mass;
        out.push(&bought + Rational::from(x) * tail);
    }
    out
}

/// Exact worst-case consistency and robustness of the randomized algorithm.
///
/// Predictions are swept over `1..=max(B, ⌈B/λ⌉)`, past which the chosen
/// distribution and the ratio at `x = y` no longer change. For each of the
/// two distributions, `x` is swept over `1..=max(k, B)`.
pub fn rand_worst_case(budget: u64, lambda: &Rational) -> Result<TradeoffPoint> {
    Ok(rand_sweep(budget, lambda)?.point)
}

pub fn rand_sweep(budget: u64, lambda: &Rational) -> Result<SweepResult> {
    check_lambda(lambda)?;
    if budget < 2 {
        return Err(Error::invalid("randomized ski rental needs B >= 2"));
    }
    let b = Rational::from(budget);
    if *lambda <= b.recip() {
        return Err(Error::invalid(format!("lambda {lambda} must exceed 1/B = 1/{budget}")));
    }
    let early = rand_distribution(budget, budget, lambda)?;
    let late = rand_distribution(budget, 1, lambda)?;
    let y_max = budget.max(late.support_end());

    let early_profile = expected_cost_profile(&early, budget, y_max.max(early.support_end()));
    let late_profile = expected_cost_profile(&late, budget, y_max);
    let opt = |x: u64| Rational::from(x.min(budget));

    let mut consistency = (Rational::zero(), 0);
    for y in 1..=y_max {
        let profile = if y >= budget { &early_profile } else { &late_profile };
        let r = &profile[y as usize - 1] / opt(y);
        if r > consistency.0 {
            consistency = (r, y);
        }
    }

    let mut robustness = (Rational::zero(), 0, 0);
    for (profile, k, y) in [(&early_profile, early.support_end(), budget), (&late_profile, late.support_end(), 1)] {
        for x in 1..=k.max(budget) {
            let r = &profile[x as usize - 1] / opt(x);
            if r > robustness.0 {
                robustness = (r, x, y);
            }
        }
    }
    Ok(SweepResult {
        point: TradeoffPoint::new(lambda.clone(), consistency.0, robustness.0)?,
        consistency_witness: SkiInstance::new(budget, consistency.1, consistency.1)?,
        robustness_witness: SkiInstance::new(budget, robustness.1, robustness.2)?,
    })
}

/// Enclosure of the randomized consistency guarantee `λ / (1 - e^{-λ})`.
pub fn rand_consistency_bound(lambda: &Rational, tol: &Rational) -> Enclosure {
    let inner_tol = tol / 16;
    let e = enclosure::exp(&-lambda, &inner_tol);
    let denom = Enclosure::exact(Rational::one()).sub(&e);
    Enclosure::exact(lambda.clone()).div(&denom)
}

/// Enclosure of the randomized robustness guarantee `1 / (1 - e^{-(λ - 1/B)})`.
pub fn rand_robustness_bound(budget: u64, lambda: &Rational, tol: &Rational) -> Enclosure {
    let shifted = lambda - Rational::from(budget).recip();
    assert!(shifted.is_positive(), "robustness bound needs lambda > 1/B");
    // 1/(1-e^{-s}) has derivative ~1/s^2 near 0; tighten accordingly
    let inner_tol = tol * &shifted * &shifted / 16;
    let e = enclosure::exp(&-shifted, &inner_tol);
    Enclosure::exact(Rational::one()).sub(&e).recip()
}
