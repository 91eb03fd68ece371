//! Problem instances, offline optima, and competitive-ratio reports.

use crate::error::{Error, Result};
use crate::rational::Rational;

/// A ski-rental input: buy cost `B`, true season length `x`, predicted `y`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SkiInstance {
    buy_cost: u64,
    true_days: u64,
    predicted_days: u64,
}

impl SkiInstance {
    pub fn new(buy_cost: u64, true_days: u64, predicted_days: u64) -> Result<Self> {
        if buy_cost == 0 || true_days == 0 || predicted_days == 0 {
            return Err(Error::invalid(format!(
                "ski instance needs B, x, y >= 1 (got B={buy_cost}, x={true_days}, y={predicted_days})"
            )));
        }
        Ok(SkiInstance {
            buy_cost,
            true_days,
            predicted_days,
        })
    }

    pub fn buy_cost(&self) -> u64 {
        self.buy_cost
    }

    pub fn true_days(&self) -> u64 {
        self.true_days
    }

    pub fn predicted_days(&self) -> u64 {
        self.predicted_days
    }

    /// Prediction error `|x - y|`.
    pub fn error(&self) -> u64 {
        self.true_days.abs_diff(self.predicted_days)
    }
}

/// True and predicted processing times for `n` jobs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JobSet {
    true_times: Vec<Rational>,
    predicted_times: Vec<Rational>,
}

impl JobSet {
    pub fn new(true_times: Vec<Rational>, predicted_times: Vec<Rational>) -> Result<Self> {
        if true_times.is_empty() {
            return Err(Error::EmptyInput("job set"));
        }
        if true_times.len() != predicted_times.len() {
            return Err(Error::invalid(format!(
                "{} true times but {} predictions",
                true_times.len(),
                predicted_times.len()
            )));
        }
        for (job, value) in true_times.iter().chain(&predicted_times).enumerate() {
            if !value.is_positive() {
                return Err(Error::NonPositiveTime {
                    job: job % true_times.len(),
                    value: value.clone(),
                });
            }
        }
        Ok(JobSet {
            true_times,
            predicted_times,
        })
    }

    /// Instance whose predictions are exact.
    pub fn perfect(times: Vec<Rational>) -> Result<Self> {
        JobSet::new(times.clone(), times)
    }

    pub fn len(&self) -> usize {
        self.true_times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.true_times.is_empty()
    }

    pub fn true_times(&self) -> &[Rational] {
        &self.true_times
    }

    pub fn predicted_times(&self) -> &[Rational] {
        &self.predicted_times
    }

    /// Total prediction error `sum |x_i - y_i|`.
    pub fn error(&self) -> Rational {
        self.true_times
            .iter()
            .zip(&self.predicted_times)
            .map(|(x, y)| (x - y).abs())
            .sum()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RatioReport {
    pub alg_cost: Rational,
    pub opt_cost: Rational,
    pub ratio: Rational,
}

/// A (consistency, robustness) pair at trade-off parameter `lambda`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TradeoffPoint {
    lambda: Rational,
    beta: Rational,
    gamma: Rational,
}

impl TradeoffPoint {
    pub fn new(lambda: Rational, beta: Rational, gamma: Rational) -> Result<Self> {
        if lambda.is_negative() || lambda > Rational::one() {
            return Err(Error::invalid(format!("lambda {lambda} outside [0, 1]")));
        }
        if beta < Rational::one() || gamma < Rational::one() {
            return Err(Error::invalid(format!(
                "consistency {beta} and robustness {gamma} must both be >= 1"
            )));
        }
        if beta > gamma {
            return Err(Error::invalid(format!(
                "consistency {beta} exceeds robustness {gamma}"
            )));
        }
        Ok(TradeoffPoint {
            lambda,
            beta,
            gamma,
        })
    }

    pub fn lambda(&self) -> &Rational {
        &self.lambda
    }

    pub fn consistency(&self) -> &Rational {
        &self.beta
    }

    pub fn robustness(&self) -> &Rational {
        &self.gamma
    }
}

/// Offline optimum for ski rental: `min(x, B)`.
pub fn opt_ski_cost(inst: &SkiInstance) -> Rational {
    Rational::from(inst.true_days.min(inst.buy_cost))
}

/// Shortest-processing-time-first total completion time: sorted ascending,
/// the i-th shortest job (1-based) is counted `n - i + 1` times.
pub fn opt_completion(times: &[Rational]) -> Result<Rational> {
    if times.is_empty() {
        return Err(Error::EmptyInput("processing times"));
    }
    if let Some((job, value)) = times.iter().enumerate().find(|(_, t)| !t.is_positive()) {
        return Err(Error::NonPositiveTime {
            job,
            value: value.clone(),
        });
    }
    let mut sorted: Vec<&Rational> = times.iter().collect();
    sorted.sort();
    let n = sorted.len();
    Ok(sorted
        .into_iter()
        .enumerate()
        .map(|(i, t)| t * Rational::from(n - i))
        .sum())
}

/// Exact `alg / opt`. Errors on `opt <= 0` and on `alg < opt`, which would
/// mean some cost model undercut the offline optimum.
pub fn ratio(alg: &Rational, opt: &Rational) -> Result<RatioReport> {
    if !opt.is_positive() {
        return Err(Error::NonPositiveOpt(opt.clone()));
    }
    if alg < opt {
        return Err(Error::BelowOptimum {
            alg: Box::new(alg.clone()),
            opt: Box::new(opt.clone()),
        });
    }
    Ok(RatioReport {
        alg_cost: alg.clone(),
        opt_cost: opt.clone(),
        ratio: alg / opt,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ints(v: &[i64]) -> Vec<Rational> {
        v.iter().map(|&x| Rational::integer(x)).collect()
    }

    /// Every non-preemptive order, total completion time minimized.
    fn brute_force_opt(times: &[Rational]) -> Rational {
        fn rec(remaining: &mut Vec<Rational>, now: Rational, acc: Rational, best: &mut Option<Rational>) {
            if remaining.is_empty() {
                if best.as_ref().is_none_or(|b| acc < *b) {
                    *best = Some(acc);
                }
                return;
            }
            for i in 0..remaining.len() {
                let t = remaining.remove(i);
                let done = &now + &t;
                rec(remaining, done.clone(), &acc + &done, best);
                remaining.insert(i, t);
            }
        }
        let mut best = None;
        rec(&mut times.to_vec(), Rational::zero(), Rational::zero(), &mut best);
        best.unwrap()
    }

    #[test]
    fn ski_opt_branches() {
        let opt = |b, x| opt_ski_cost(&SkiInstance::new(b, x, 1).unwrap());
        assert_eq!(opt(10, 4), 4);
        assert_eq!(opt(10, 25), 10);
        assert_eq!(opt(1, 1), 1);
    }

    #[test]
    fn ski_instance_rejects_zero() {
        assert!(SkiInstance::new(0, 1, 1).is_err());
        assert!(SkiInstance::new(1, 0, 1).is_err());
        assert!(SkiInstance::new(1, 1, 0).is_err());
        assert_eq!(SkiInstance::new(5, 3, 9).unwrap().error(), 6);
    }

    #[test]
    fn completion_examples() {
        assert_eq!(opt_completion(&ints(&[1, 1])).unwrap(), 3);
        for n in 1..=8i64 {
            assert_eq!(opt_completion(&ints(&vec![1; n as usize])).unwrap(), n * (n + 1) / 2);
        }
        assert_eq!(opt_completion(&ints(&[3, 1, 2])).unwrap(), 10);
        assert_eq!(brute_force_opt(&ints(&[3, 1, 2])), 10);
    }

    #[test]
    fn completion_errors() {
        assert!(matches!(opt_completion(&[]), Err(Error::EmptyInput(_))));
        assert!(matches!(
            opt_completion(&ints(&[1, 0])),
            Err(Error::NonPositiveTime { job: 1, .. })
        ));
    }

    #[test]
    fn ratio_examples() {
        assert_eq!(ratio(&Rational::integer(14), &Rational::integer(10)).unwrap().ratio, Rational::new(7, 5));
        assert_eq!(ratio(&Rational::integer(3), &Rational::integer(3)).unwrap().ratio, 1);
        assert_eq!(ratio(&Rational::integer(4), &Rational::integer(3)).unwrap().ratio, Rational::new(4, 3));
        assert!(matches!(
            ratio(&Rational::integer(1), &Rational::zero()),
            Err(Error::NonPositiveOpt(_))
        ));
        assert!(matches!(
            ratio(&Rational::integer(2), &Rational::integer(3)),
            Err(Error::BelowOptimum { .. })
        ));
    }

    #[test]
    fn tradeoff_point_invariants() {
        assert!(TradeoffPoint::new(Rational::new(1, 2), Rational::new(3, 2), Rational::integer(3)).is_ok());
        assert!(TradeoffPoint::new(Rational::new(1, 2), Rational::integer(3), Rational::new(3, 2)).is_err());
        assert!(TradeoffPoint::new(Rational::integer(2), Rational::one(), Rational::one()).is_err());
    }

    #[test]
    fn job_set_error_and_validation() {
        let js = JobSet::new(ints(&[1, 4]), ints(&[2, 2])).unwrap();
        assert_eq!(js.error(), 3);
        assert!(JobSet::new(ints(&[1]), ints(&[1, 1])).is_err());
        assert!(JobSet::new(ints(&[1, 1]), ints(&[1, 0])).is_err());
        assert!(JobSet::new(vec![], vec![]).is_err());
    }

    proptest! {
        #[test]
        fn spt_matches_brute_force(v in proptest::collection::vec((1i64..20, 1i64..6), 1..=6)) {
            let times: Vec<Rational> = v.iter().map(|&(n, d)| Rational::new(n, d)).collect();
            prop_assert_eq!(opt_completion(&times).unwrap(), brute_force_opt(&times));
        }
    }
}
