use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use robcons::enclosure::decimal_tolerance;
use robcons::lp::lp_feasible;
use robcons::model::{opt_ski_cost, JobSet, SkiInstance};
use robcons::scheduling::{
    adversary_njobs, evaluate, simulate, sched_robustness_lower_bound, two_stage_policy, Policy, RoundRobin,
};
use robcons::ski_lp::{build_lp, min_consistency, verify_tightness};
use robcons::ski_rental::{
    det_adversary, det_buy_day, det_cost, det_lower_bound, det_sweep, expected_cost, rand_consistency_bound,
    rand_distribution, rand_robustness_bound, rand_sweep,
};
use robcons::tradeoff_curves::{
    dominance_violations, emit, measured_violations, parse_csv, sched_curves, ski_curves, CurveSeries,
};
use robcons::{Error, Rational};

#[derive(Parser, Debug)]
#[command(name = "robcons", version, about = "Consistency/robustness trade-offs for ski rental and scheduling")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Deterministic ski rental: worst case over a sweep, or one instance
    SkiDet(SkiArgs),
    /// Randomized ski rental: worst case over a sweep, or one instance
    SkiRand(SkiArgs),
    /// Feasibility LP for randomized ski rental
    SkiLp(LpArgs),
    /// Simulate a scheduling policy on one instance
    Sched(SchedArgs),
    /// Build and evaluate the adversarial scheduling instance
    SchedAdversary(AdversaryArgs),
    /// Write trade-off curves as CSV (and optionally SVG)
    Curve(CurveArgs),
}

fn rational(s: &str) -> Result<Rational, String> {
    s.parse::<Rational>().map_err(|e| e.to_string())
}

#[derive(Clone, Debug)]
struct RationalList(Vec<Rational>);

fn rational_list(s: &str) -> Result<RationalList, String> {
    s.split(',').map(|t| rational(t.trim())).collect::<Result<_, _>>().map(RationalList)
}

#[derive(Args, Debug)]
struct SkiArgs {
    #[arg(long)]
    budget: u64,
    #[arg(long, value_parser = rational)]
    lambda: Rational,
    /// True season length
    #[arg(long, requires = "y")]
    x: Option<u64>,
    /// Predicted season length
    #[arg(long, requires = "x")]
    y: Option<u64>,
}

#[derive(Args, Debug)]
struct LpArgs {
    #[arg(long)]
    budget: u64,
    #[arg(long, value_parser = rational)]
    gamma: Rational,
    #[arg(long, value_parser = rational, required_unless_present = "bisect", conflicts_with = "bisect")]
    beta: Option<Rational>,
    /// Bisection depth
    #[arg(long)]
    bisect: Option<u32>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum PolicyName {
    Rr,
    TwoStage,
}

#[derive(Args, Debug)]
struct SchedArgs {
    #[arg(long, value_enum)]
    policy: PolicyName,
    #[arg(long, value_parser = rational)]
    lambda: Option<Rational>,
    /// True processing times, comma separated
    #[arg(long, value_parser = rational_list)]
    x: RationalList,
    /// Predicted processing times, comma separated
    #[arg(long, value_parser = rational_list)]
    y: RationalList,
    /// Print one line per simulation event
    #[arg(long)]
    trace: bool,
}

#[derive(Args, Debug)]
struct AdversaryArgs {
    #[arg(long, value_enum)]
    policy: PolicyName,
    #[arg(long)]
    n: usize,
    #[arg(long, value_parser = rational)]
    lambda: Option<Rational>,
    #[arg(long, value_parser = rational, default_value = "1/10000")]
    epsilon: Rational,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Which {
    Ski,
    Sched2,
    #[value(name = "schedN")]
    SchedN,
}

#[derive(Args, Debug)]
struct CurveArgs {
    #[arg(long, value_enum)]
    which: Which,
    #[arg(long, default_value_t = 50)]
    budget: u64,
    #[arg(long, default_value_t = 3)]
    n: u64,
    /// Grid spacing for measured scheduling points
    #[arg(long, value_parser = rational, default_value = "1/20")]
    step: Rational,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    svg: Option<PathBuf>,
}

/// Bad input from the command line, reported with exit code 2.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
struct Usage(String);

fn usage(msg: impl Into<String>) -> anyhow::Error {
    Usage(msg.into()).into()
}

fn check_open_lambda(lambda: &Rational) -> anyhow::Result<()> {
    if !lambda.is_positive() || *lambda >= Rational::one() {
        return Err(usage(format!("--lambda must lie in (0, 1), got {lambda}")));
    }
    Ok(())
}

struct Out<'a> {
    w: &'a mut dyn Write,
}

impl Out<'_> {
    fn kv(&mut self, key: &str, value: impl std::fmt::Display) -> anyhow::Result<()> {
        writeln!(self.w, "{key}={value}")?;
        Ok(())
    }

    fn q(&mut self, key: &str, value: &Rational) -> anyhow::Result<()> {
        self.kv(key, value)
    }

    fn list(&mut self, key: &str, values: &[Rational]) -> anyhow::Result<()> {
        let joined: Vec<String> = values.iter().map(Rational::to_string).collect();
        self.kv(key, joined.join(","))
    }

    fn verdict(&mut self, ok: bool) -> anyhow::Result<bool> {
        self.kv("verdict", if ok { "ok" } else { "violated" })?;
        Ok(ok)
    }
}

/// Parses `argv` (including the program name), runs the command and returns
/// the process exit code.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            let target: &mut dyn Write = if code == 0 { stdout } else { stderr };
            let _ = write!(target, "{text}");
            return code;
        }
    };
    let mut out = Out { w: stdout };
    match dispatch(cli.command, &mut out) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e:#}");
            if is_usage(&e) {
                2
            } else {
                1
            }
        }
    }
}

fn is_usage(e: &anyhow::Error) -> bool {
    e.chain().any(|cause| {
        cause.downcast_ref::<Usage>().is_some()
            || matches!(
                cause.downcast_ref::<Error>(),
                Some(
                    Error::InvalidParameter(_)
                        | Error::EmptyInput(_)
                        | Error::NonPositiveTime { .. }
                        | Error::Parse { .. }
                )
            )
    })
}

fn dispatch(cmd: Command, out: &mut Out) -> anyhow::Result<bool> {
    match cmd {
        Command::SkiDet(a) => ski_det(a, out),
        Command::SkiRand(a) => ski_rand(a, out),
        Command::SkiLp(a) => ski_lp(a, out),
        Command::Sched(a) => sched(a, out),
        Command::SchedAdversary(a) => sched_adversary(a, out),
        Command::Curve(a) => curve(a, out),
    }
}

fn ski_det(a: SkiArgs, out: &mut Out) -> anyhow::Result<bool> {
    check_open_lambda(&a.lambda)?;
    let b = a.budget;
    out.kv("budget", b)?;
    out.q("lambda", &a.lambda)?;
    if let (Some(x), Some(y)) = (a.x, a.y) {
        let inst = SkiInstance::new(b, x, y)?;
        let policy = det_buy_day(b, y, &a.lambda)?;
        let alg = det_cost(b, x, policy);
        let report = robcons::model::ratio(&alg, &opt_ski_cost(&inst))?;
        out.kv("buy_day", policy.buy_day())?;
        out.q("alg", &report.alg_cost)?;
        out.q("opt", &report.opt_cost)?;
        out.q("ratio", &report.ratio)?;
        return Ok(true);
    }
    let sweep = det_sweep(b, &a.lambda)?;
    let one = Rational::one();
    let bf = Rational::from(b);
    let beta_cap = &one + &a.lambda + bf.recip();
    let gamma_cap = &one + a.lambda.recip() + Rational::integer(2) / &bf;
    out.q("consistency", sweep.point.consistency())?;
    out.q("robustness", sweep.point.robustness())?;
    let adv = det_adversary(b, &a.lambda)?;
    let policy = det_buy_day(b, adv.predicted_days(), &a.lambda)?;
    let adv_ratio = det_cost(b, adv.true_days(), policy) / opt_ski_cost(&adv);
    let lower = det_lower_bound(b, &a.lambda);
    out.kv("adversary_x", adv.true_days())?;
    out.kv("adversary_y", adv.predicted_days())?;
    out.q("adversary_ratio", &adv_ratio)?;
    out.q("lower_bound", &lower)?;
    out.verdict(*sweep.point.consistency() <= beta_cap && *sweep.point.robustness() <= gamma_cap && adv_ratio >= lower)
}

fn ski_rand(a: SkiArgs, out: &mut Out) -> anyhow::Result<bool> {
    check_open_lambda(&a.lambda)?;
    let b = a.budget;
    out.kv("budget", b)?;
    out.q("lambda", &a.lambda)?;
    if let (Some(x), Some(y)) = (a.x, a.y) {
        let inst = SkiInstance::new(b, x, y)?;
        let dist = rand_distribution(b, y, &a.lambda)?;
        let alg = expected_cost(&dist, b, x);
        let report = robcons::model::ratio(&alg, &opt_ski_cost(&inst))?;
        out.kv("support_end", dist.support_end())?;
        out.q("expected_alg", &report.alg_cost)?;
        out.q("opt", &report.opt_cost)?;
        out.q("ratio", &report.ratio)?;
        return Ok(true);
    }
    let sweep = rand_sweep(b, &a.lambda)?;
    let tol = decimal_tolerance(10);
    let beta_bound = rand_consistency_bound(&a.lambda, &tol);
    let gamma_bound = rand_robustness_bound(b, &a.lambda, &tol);
    out.q("consistency", sweep.point.consistency())?;
    out.q("robustness", sweep.point.robustness())?;
    out.kv("consistency_decimal", sweep.point.consistency().to_decimal_string(12))?;
    out.kv("robustness_decimal", sweep.point.robustness().to_decimal_string(12))?;
    out.kv("consistency_bound", beta_bound.hi().to_decimal_string(12))?;
    out.kv("robustness_bound", gamma_bound.hi().to_decimal_string(12))?;
    out.verdict(sweep.point.consistency() <= beta_bound.hi() && sweep.point.robustness() <= gamma_bound.hi())
}

fn ski_lp(a: LpArgs, out: &mut Out) -> anyhow::Result<bool> {
    out.kv("budget", a.budget)?;
    out.q("gamma", &a.gamma)?;
    if let Some(beta) = a.beta {
        let lp = build_lp(a.budget, &beta, &a.gamma)?;
        let res = lp_feasible(&lp)?;
        out.q("beta", &beta)?;
        out.kv("feasible", res.feasible)?;
        if let Some(w) = &res.witness {
            out.list("witness", w)?;
        }
        if let Some(c) = &res.certificate {
            out.list("certificate", c)?;
        }
        return Ok(res.feasible);
    }
    let depth = a.bisect.expect("clap requires one mode");
    let report = match verify_tightness(a.budget, &a.gamma, depth) {
        Err(Error::SupportExceedsBudget { k, budget }) => {
            out.kv("k", k)?;
            out.kv("error", format!("support {k} exceeds budget {budget}"))?;
            return Ok(false);
        }
        r => r?,
    };
    out.kv("k", report.k)?;
    out.q("beta_min", &report.beta_min)?;
    out.kv("beta_min_decimal", report.beta_min.to_decimal_string(12))?;
    out.q("infeasible_below", &report.infeasible_below)?;
    out.q("feasible_above", &report.feasible_above)?;
    out.kv("bracketed", report.bracketed)?;
    out.kv("feasible_at_min", report.feasible_at_min)?;
    out.kv("witness_accepted", report.witness_accepted)?;
    debug_assert_eq!(min_consistency(a.budget, &a.gamma)?, report.beta_min);
    out.verdict(report.passed())
}

fn make_policy(name: PolicyName, lambda: Option<&Rational>) -> anyhow::Result<Box<dyn Policy>> {
    Ok(match name {
        PolicyName::Rr => Box::new(RoundRobin),
        PolicyName::TwoStage => {
            let lambda = lambda.ok_or_else(|| usage("--lambda is required for the two-stage policy"))?;
            check_open_lambda(lambda)?;
            Box::new(two_stage_policy(lambda.clone())?)
        }
    })
}

fn sched(a: SchedArgs, out: &mut Out) -> anyhow::Result<bool> {
    if let Some(l) = &a.lambda {
        check_open_lambda(l)?;
    }
    let policy = make_policy(a.policy, a.lambda.as_ref())?;
    let jobs = JobSet::new(a.x.0, a.y.0)?;
    let schedule = simulate(policy.as_ref(), &jobs)?;
    let report = evaluate(policy.as_ref(), &jobs)?;
    out.q("alg", &report.alg_cost)?;
    out.q("opt", &report.opt_cost)?;
    out.q("ratio", &report.ratio)?;
    out.q("error", &jobs.error())?;
    out.list("completion", &schedule.completion_times)?;
    if a.trace {
        write!(out.w, "{}", schedule.trace_text())?;
    }
    Ok(true)
}

fn sched_adversary(a: AdversaryArgs, out: &mut Out) -> anyhow::Result<bool> {
    if !a.epsilon.is_positive() {
        return Err(usage("--epsilon must be positive"));
    }
    let policy = make_policy(a.policy, a.lambda.as_ref())?;
    let jobs = adversary_njobs(policy.as_ref(), a.n, &a.epsilon)?;
    let report = evaluate(policy.as_ref(), &jobs)?;
    out.list("x", jobs.true_times())?;
    out.list("y", jobs.predicted_times())?;
    out.q("alg", &report.alg_cost)?;
    out.q("opt", &report.opt_cost)?;
    out.q("ratio", &report.ratio)?;
    let Some(lambda) = a.lambda else {
        return Ok(true);
    };
    let bound = sched_robustness_lower_bound(a.n as u64, &lambda).context("bound for the given n and lambda")?;
    out.q("bound", &bound)?;
    Ok(true)
}

fn grid(count: i64, scale: &Rational) -> Vec<Rational> {
    (1..=count).map(|j| scale * Rational::new(j, 1)).collect()
}

fn curve(a: CurveArgs, out: &mut Out) -> anyhow::Result<bool> {
    let (series, slack): (Vec<CurveSeries>, Rational) = match a.which {
        Which::Ski => {
            if a.budget < 2 {
                return Err(usage("--budget must be at least 2"));
            }
            let floor = Rational::from(a.budget).recip();
            let lambdas: Vec<Rational> = grid(19, &Rational::new(1, 20)).into_iter().filter(|l| *l > floor).collect();
            (ski_curves(a.budget, &lambdas)?, Rational::integer(3) / Rational::from(a.budget))
        }
        Which::Sched2 => (sched_curves(2, &grid(9, &Rational::new(1, 30)), &a.step)?, Rational::zero()),
        Which::SchedN => {
            if a.n < 2 {
                return Err(usage("--n must be at least 2"));
            }
            let top = Rational::one() - Rational::new(2, a.n as i64 + 1);
            let mut lambdas = vec![Rational::zero()];
            lambdas.extend(grid(10, &(top / 10)));
            (sched_curves(a.n, &lambdas, &a.step)?, Rational::zero())
        }
    };
    emit(&series, &a.out, a.svg.as_deref())?;
    let text = std::fs::read_to_string(&a.out).with_context(|| format!("reading back {}", a.out.display()))?;
    let rows = parse_csv(&text)?;
    let expected = robcons::tradeoff_curves::rows(&series);
    if rows != expected {
        bail!("CSV read back from {} differs from the generated series", a.out.display());
    }
    let dominance = dominance_violations(&rows);
    let measured = measured_violations(&rows, &slack);
    out.kv("csv", a.out.display())?;
    if let Some(svg) = &a.svg {
        out.kv("svg", svg.display())?;
    }
    out.kv("series", series.len())?;
    out.kv("rows", rows.len())?;
    out.kv("dominance_violations", dominance.len())?;
    out.kv("measured_violations", measured.len())?;
    out.verdict(dominance.is_empty() && measured.is_empty())
}
