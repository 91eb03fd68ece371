//! Preemptive single-machine scheduling with predicted processing times.
//!
//! Jobs share the machine through fractional rates summing to at most one.
//! [`simulate`] advances exactly from event to event: a job finishing, a job
//! reaching its predicted time without finishing (an overrun), or a policy
//! timer running out.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{opt_completion, ratio, JobSet, RatioReport};
use crate::rational::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Phase {
    Stage1,
    Stage2,
    FallbackRr,
}

/// Snapshot of a two-stage run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolicyState {
    pub phase: Phase,
    pub budget_remaining: Rational,
    pub processed: Vec<Rational>,
    pub mispredicted: bool,
}

/// A scheduling policy; [`Policy::start`] creates per-simulation state.
pub trait Policy: Sync {
    fn name(&self) -> String;
    fn start(&self, predictions: &[Rational]) -> Result<Box<dyn PolicyRun>>;
}

/// The mutable side of a policy during one simulation.
pub trait PolicyRun {
    /// Rates for every job; finished jobs must get zero.
    fn rates(&self, finished: &[bool]) -> Vec<Rational>;

    /// Time left until the policy wants to change its mind on its own.
    fn timer(&self) -> Option<Rational> {
        None
    }

    /// Whether overrun events should be raised at all.
    fn watches_overruns(&self) -> bool {
        false
    }

    fn advance(&mut self, _dt: &Rational) {}

    fn on_complete(&mut self, _job: usize, _as_predicted: bool) {}

    fn on_overrun(&mut self, _job: usize) {}

    fn on_timer(&mut self) {}

    fn state(&self, _processed: &[Rational]) -> Option<PolicyState> {
        None
    }
}

fn equal_share(finished: &[bool]) -> Vec<Rational> {
    let live = finished.iter().filter(|f| !**f).count();
    finished
        .iter()
        .map(|&f| {
            if f {
                Rational::zero()
            } else {
                Rational::new(1, live as i64)
            }
        })
        .collect()
}

#[derive(Clone, Copy, Debug, Default)]
pub struct RoundRobin;

struct RoundRobinRun;

impl PolicyRun for RoundRobinRun {
    fn rates(&self, finished: &[bool]) -> Vec<Rational> {
        equal_share(finished)
    }
}

impl Policy for RoundRobin {
    fn name(&self) -> String {
        "round-robin".to_string()
    }

    fn start(&self, _predictions: &[Rational]) -> Result<Box<dyn PolicyRun>> {
        Ok(Box::new(RoundRobinRun))
    }
}

pub fn round_robin_policy() -> RoundRobin {
    RoundRobin
}

/// Round robin for a budget of `λ n OPT_y / C(n, 2)`, then jobs one at a time
/// in predicted order; any misprediction drops to round robin for good.
#[derive(Clone, Debug)]
pub struct TwoStage {
    lambda: Rational,
}

impl TwoStage {
    pub fn lambda(&self) -> &Rational {
        &self.lambda
    }
}

pub fn two_stage_policy(lambda: Rational) -> Result<TwoStage> {
    if lambda.is_negative() || lambda >= Rational::one() {
        return Err(Error::invalid(format!("lambda {lambda} outside [0, 1)")));
    }
    Ok(TwoStage { lambda })
}

/// Stage-one budget for predictions `y`.
pub fn stage_one_budget(lambda: &Rational, predictions: &[Rational]) -> Result<Rational> {
    let n = predictions.len();
    if n < 2 {
        return Err(Error::invalid("two-stage schedule needs at least two jobs"));
    }
    let pairs = Rational::from((n * (n - 1) / 2) as u64);
    Ok(lambda * Rational::from(n as u64) * opt_completion(predictions)? / pairs)
}

struct TwoStageRun {
    phase: Phase,
    budget: Rational,
    order: Vec<usize>,
    mispredicted: bool,
}

impl TwoStageRun {
    fn fall_back(&mut self) {
        self.mispredicted = true;
        self.phase = Phase::FallbackRr;
    }
}

impl PolicyRun for TwoStageRun {
    fn rates(&self, finished: &[bool]) -> Vec<Rational> {
        match self.phase {
            Phase::Stage1 | Phase::FallbackRr => equal_share(finished),
            Phase::Stage2 => {
                let mut rates = vec![Rational::zero(); finished.len()];
                if let Some(&j) = self.order.iter().find(|&&j| !finished[j]) {
                    rates[j] = Rational::one();
                }
                rates
            }
        }
    }

    fn timer(&self) -> Option<Rational> {
        (self.phase == Phase::Stage1).then(|| self.budget.clone())
    }

    fn watches_overruns(&self) -> bool {
        !self.mispredicted
    }

    fn advance(&mut self, dt: &Rational) {
        if self.phase == Phase::Stage1 {
            self.budget -= dt;
        }
    }

    fn on_complete(&mut self, _job: usize, as_predicted: bool) {
        if !as_predicted {
            self.fall_back();
        }
    }

    fn on_overrun(&mut self, _job: usize) {
        self.fall_back();
    }

    fn on_timer(&mut self) {
        if self.phase == Phase::Stage1 {
            self.phase = Phase::Stage2;
        }
    }

    fn state(&self, processed: &[Rational]) -> Option<PolicyState> {
        Some(PolicyState {
            phase: self.phase,
            budget_remaining: self.budget.clone(),
            processed: processed.to_vec(),
            mispredicted: self.mispredicted,
        })
    }
}

impl Policy for TwoStage {
    fn name(&self) -> String {
        format!("two-stage(lambda={})", self.lambda)
    }

    fn start(&self, predictions: &[Rational]) -> Result<Box<dyn PolicyRun>> {
        let budget = stage_one_budget(&self.lambda, predictions)?;
        let mut order: Vec<usize> = (0..predictions.len()).collect();
        order.sort_by(|&a, &b| predictions[a].cmp(&predictions[b]).then(a.cmp(&b)));
        let phase = if budget.is_positive() {
            Phase::Stage1
        } else {
            Phase::Stage2
        };
        Ok(Box::new(TwoStageRun {
            phase,
            budget,
            order,
            mispredicted: false,
        }))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EventKind {
    Complete,
    Overrun,
    Budget,
}

impl EventKind {
    fn as_str(self) -> &'static str {
        match self {
            EventKind::Complete => "complete",
            EventKind::Overrun => "overrun",
            EventKind::Budget => "budget",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceEvent {
    pub time: Rational,
    pub kind: EventKind,
    /// `None` for budget exhaustion.
    pub job: Option<usize>,
}

impl fmt::Display for TraceEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "t={} event={} job=", self.time.to_fraction_string(), self.kind.as_str())?;
        match self.job {
            Some(j) => write!(f, "{j}"),
            None => write!(f, "-"),
        }
    }
}

impl FromStr for TraceEvent {
    type Err = Error;

    fn from_str(line: &str) -> Result<Self> {
        let bad = || Error::Parse {
            what: "trace line",
            input: line.to_string(),
        };
        let mut time = None;
        let mut kind = None;
        let mut job = None;
        for field in line.split_whitespace() {
            let (key, value) = field.split_once('=').ok_or_else(bad)?;
            match key {
                "t" => time = Some(value.parse::<Rational>().map_err(|_| bad())?),
                "event" => {
                    kind = Some(match value {
                        "complete" => EventKind::Complete,
                        "overrun" => EventKind::Overrun,
                        "budget" => EventKind::Budget,
                        _ => return Err(bad()),
                    })
                }
                "job" => {
                    job = Some(if value == "-" {
                        None
                    } else {
                        Some(value.parse::<usize>().map_err(|_| bad())?)
                    })
                }
                _ => return Err(bad()),
            }
        }
        match (time, kind, job) {
            (Some(time), Some(kind), Some(job)) if job.is_none() == (kind == EventKind::Budget) => {
                Ok(TraceEvent { time, kind, job })
            }
            _ => Err(bad()),
        }
    }
}

/// Parses trace text, one event per nonblank line.
pub fn parse_trace(text: &str) -> Result<Vec<TraceEvent>> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(str::parse)
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Interval {
    pub start: Rational,
    pub end: Rational,
    pub rates: Vec<Rational>,
    pub state: Option<PolicyState>,
}

#[derive(Clone, Debug)]
pub struct Schedule {
    pub intervals: Vec<Interval>,
    pub events: Vec<TraceEvent>,
    pub completion_times: Vec<Rational>,
    /// `delay[i][j]`: processing received by job `i` up to the completion of job `j`.
    pub delay: Vec<Vec<Rational>>,
}

impl Schedule {
    pub fn total_completion(&self) -> Rational {
        self.completion_times.iter().sum()
    }

    pub fn delay(&self, i: usize, j: usize) -> &Rational {
        &self.delay[i][j]
    }

    /// Job that finishes first, lowest index on ties.
    pub fn first_completed(&self) -> usize {
        let mut best = 0;
        for (j, c) in self.completion_times.iter().enumerate() {
            if *c < self.completion_times[best] {
                best = j;
            }
        }
        best
    }

    pub fn trace_text(&self) -> String {
        self.events.iter().map(|e| format!("{e}\n")).collect()
    }
}

fn min_opt(acc: &mut Option<Rational>, v: Rational) {
    if acc.as_ref().is_none_or(|a| v < *a) {
        *acc = Some(v);
    }
}

fn run(policy: &dyn Policy, jobs: &JobSet, stop_after_first: bool, limit: Option<&Rational>) -> Result<Schedule> {
    let n = jobs.len();
    let x = jobs.true_times();
    let y = jobs.predicted_times();
    let mut state = policy.start(y)?;
    let mut now = Rational::zero();
    let mut processed = vec![Rational::zero(); n];
    let mut finished = vec![false; n];
    let mut overrun_seen = vec![false; n];
    let mut completion_times = vec![Rational::zero(); n];
    let mut delay = vec![vec![Rational::zero(); n]; n];
    let mut intervals = Vec::new();
    let mut events = Vec::new();
    let mut remaining = n;

    while remaining > 0 {
        let rates = state.rates(&finished);
        debug_assert!(rates.iter().sum::<Rational>() <= Rational::one());
        let watch = state.watches_overruns();
        let mut dt = None;
        for j in (0..n).filter(|&j| !finished[j] && rates[j].is_positive()) {
            min_opt(&mut dt, (&x[j] - &processed[j]) / &rates[j]);
            if watch && !overrun_seen[j] && y[j] < x[j] {
                min_opt(&mut dt, (&y[j] - &processed[j]) / &rates[j]);
            }
        }
        if let Some(t) = state.timer() {
            min_opt(&mut dt, t);
        }
        let Some(dt) = dt else {
            return Err(Error::Starvation(now));
        };
        if let Some(limit) = limit {
            if &(&now + &dt) > limit {
                return Err(Error::Starvation(limit.clone()));
            }
        }

        let snapshot = state.state(&processed);
        let start = now.clone();
        now += &dt;
        for j in 0..n {
            if rates[j].is_positive() {
                processed[j] += &rates[j] * &dt;
            }
        }
        state.advance(&dt);
        intervals.push(Interval {
            start,
            end: now.clone(),
            rates: rates.clone(),
            state: snapshot,
        });

        for j in 0..n {
            if !finished[j] && processed[j] == x[j] {
                finished[j] = true;
                remaining -= 1;
                completion_times[j] = now.clone();
                for i in 0..n {
                    delay[i][j] = processed[i].clone();
                }
                events.push(TraceEvent {
                    time: now.clone(),
                    kind: EventKind::Complete,
                    job: Some(j),
                });
                state.on_complete(j, x[j] == y[j]);
            }
        }
        if watch {
            for j in 0..n {
                if !finished[j] && !overrun_seen[j] && processed[j] == y[j] {
                    overrun_seen[j] = true;
                    events.push(TraceEvent {
                        time: now.clone(),
                        kind: EventKind::Overrun,
                        job: Some(j),
                    });
                    state.on_overrun(j);
                }
            }
        }
        if state.timer().is_some_and(|t| !t.is_positive()) {
            events.push(TraceEvent {
                time: now.clone(),
                kind: EventKind::Budget,
                job: None,
            });
            state.on_timer();
        }
        if stop_after_first && remaining < n {
            break;
        }
    }

    Ok(Schedule {
        intervals,
        events,
        completion_times,
        delay,
    })
}

/// Runs `policy` on `jobs` to completion.
pub fn simulate(policy: &dyn Policy, jobs: &JobSet) -> Result<Schedule> {
    run(policy, jobs, false, None)
}

/// Simulated total completion time against the SPT optimum.
pub fn evaluate(policy: &dyn Policy, jobs: &JobSet) -> Result<RatioReport> {
    let alg = simulate(policy, jobs)?.total_completion();
    ratio(&alg, &opt_completion(jobs.true_times())?)
}

/// Lower bound on the robustness of any `(1+λ)`-consistent policy on `n` jobs:
/// `(n + n(n+1)λ) / (1 + λ(n+1)(n+2)/2)`.
pub fn sched_robustness_lower_bound(n: u64, lambda: &Rational) -> Result<Rational> {
    if n < 2 {
        return Err(Error::invalid(format!("bound needs n >= 2, got {n}")));
    }
    let cap = Rational::one() - Rational::new(2, n as i64 + 1);
    if lambda.is_negative() || *lambda > cap {
        return Err(Error::invalid(format!("lambda {lambda} outside [0, {cap}]")));
    }
    let n = Rational::from(n);
    let num = &n + &n * (&n + 1) * lambda;
    let den = Rational::one() + lambda * (&n + 1) * (&n + 2) / 2;
    Ok(num / den)
}

/// Processing received by each job when the first job completes on the
/// all-ones instance.
#[derive(Clone, Debug)]
pub struct FirstCompletion {
    pub job: usize,
    pub time: Rational,
    pub processed: Vec<Rational>,
}

impl FirstCompletion {
    /// `Σ_{i>=2} (i-1) d_i` over the other jobs' processing sorted
    /// nonincreasing.
    pub fn weighted_delay(&self) -> Rational {
        let mut others: Vec<&Rational> = self
            .processed
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != self.job)
            .map(|(_, d)| d)
            .collect();
        others.sort_by(|a, b| b.cmp(a));
        others
            .into_iter()
            .enumerate()
            .map(|(i, d)| d * Rational::from(i as u64 + 1))
            .sum()
    }
}

/// Runs `policy` on `n` unit jobs with exact predictions until the first
/// completion. Fails if nothing completes by time `2n`.
pub fn first_completion(policy: &dyn Policy, n: usize) -> Result<FirstCompletion> {
    if n == 0 {
        return Err(Error::EmptyInput("job count"));
    }
    let ones = JobSet::perfect(vec![Rational::one(); n])?;
    let limit = Rational::from(2 * n as u64);
    let sched = run(policy, &ones, true, Some(&limit))?;
    let done = sched
        .events
        .iter()
        .find(|e| e.kind == EventKind::Complete)
        .expect("run stops after a completion");
    let job = done.job.expect("completion names a job");
    Ok(FirstCompletion {
        job,
        time: done.time.clone(),
        processed: (0..n).map(|i| sched.delay[i][job].clone()).collect(),
    })
}

/// Adversarial instance: predictions all one, the first job to finish keeps
/// size one, and every other job is cut to what it had received by then
/// plus `epsilon`. Job indices are kept so the policy sees the same run up
/// to that instant.
pub fn adversary_njobs(policy: &dyn Policy, n: usize, epsilon: &Rational) -> Result<JobSet> {
    if !epsilon.is_positive() {
        return Err(Error::invalid(format!("epsilon {epsilon} must be positive")));
    }
    let first = first_completion(policy, n)?;
    let x = first
        .processed
        .iter()
        .enumerate()
        .map(|(i, d)| {
            if i == first.job {
                Rational::one()
            } else {
                d + epsilon
            }
        })
        .collect();
    JobSet::new(x, vec![Rational::one(); n])
}

/// Ratio on an instance whose predictions are exact.
pub fn consistency_ratio(policy: &dyn Policy, y: &[Rational]) -> Result<RatioReport> {
    evaluate(policy, &JobSet::perfect(y.to_vec())?)
}

#[derive(Clone, Debug)]
pub struct WorstCase {
    pub report: RatioReport,
    pub jobs: JobSet,
}

/// Largest simulated ratio over predictions `(1, 1)` and true sizes on the
/// grid `{step, 2 step, .., cap}^2`, plus the near-critical instances
/// `(1, 3λ+ε)`, `(1+ε, 3λ+2ε)`, `(3λ+ε, 1)` with `ε = step/100`.
pub fn worst_case_ratio_2jobs(policy: &dyn Policy, lambda: &Rational, step: &Rational, cap: &Rational) -> Result<WorstCase> {
    if !step.is_positive() {
        return Err(Error::invalid(format!("grid step {step} must be positive")));
    }
    if *cap < Rational::integer(2) {
        return Err(Error::invalid(format!("grid cap {cap} must be at least 2")));
    }
    let points = (cap / step).floor();
    let points: u64 = points
        .try_into()
        .map_err(|_| Error::invalid("grid too large"))?;
    let grid: Vec<Rational> = (1..=points).map(|i| step * Rational::from(i)).collect();

    let eps = step / 100;
    let near = lambda * 3;
    let mut candidates: Vec<(Rational, Rational)> = vec![
        (Rational::one(), &near + &eps),
        (Rational::one() + &eps, &near + &eps * 2),
        (&near + &eps, Rational::one()),
    ];
    candidates.retain(|(a, b)| a.is_positive() && b.is_positive());
    for a in &grid {
        for b in &grid {
            candidates.push((a.clone(), b.clone()));
        }
    }

    let best = candidates
        .par_iter()
        .enumerate()
        .map(|(idx, (a, b))| -> Result<(usize, RatioReport, JobSet)> {
            let jobs = JobSet::new(vec![a.clone(), b.clone()], vec![Rational::one(), Rational::one()])?;
            let report = evaluate(policy, &jobs)?;
            Ok((idx, report, jobs))
        })
        .try_reduce_with(|l, r| {
            // exact max, earliest candidate on ties
            Ok(if r.1.ratio > l.1.ratio || (r.1.ratio == l.1.ratio && r.0 < l.0) {
                r
            } else {
                l
            })
        })
        .expect("candidate list is nonempty")?;
    Ok(WorstCase {
        report: best.1,
        jobs: best.2,
    })
}
