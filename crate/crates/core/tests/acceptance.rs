use std::process::Command;
use std::time::{Duration, Instant};

use robcons::enclosure::{self, decimal_tolerance, Enclosure};
use robcons::lp::lp_feasible;
use robcons::model::{opt_completion, opt_ski_cost, JobSet};
use robcons::scheduling::{
    adversary_njobs, consistency_ratio, evaluate, simulate, sched_robustness_lower_bound, two_stage_policy, worst_case_ratio_2jobs,
    RoundRobin,
};
use robcons::ski_lp::{
    asymptotic_bound_enclosure, build_extended_lp, build_lp, build_lp_with_dropped_rows, convexity_gap_lower, horizon,
    verify_tightness,
};
use robcons::ski_rental::{
    det_adversary, det_buy_day, det_cost, det_lower_bound, det_worst_case, rand_consistency_bound,
    rand_robustness_bound, rand_worst_case,
};
use robcons::tradeoff_curves::{dominance_violations, measured_violations, parse_csv, rows, ski_curves};
use robcons::Rational;

fn q(n: i64, d: i64) -> Rational {
    Rational::new(n, d)
}

fn lambda_grid() -> [Rational; 4] {
    [q(1, 10), q(1, 4), q(1, 2), q(3, 4)]
}

fn sched_lambdas() -> [Rational; 4] {
    [q(1, 100), q(1, 10), q(1, 5), q(3, 10)]
}

fn tight_robustness(l: &Rational) -> Rational {
    Rational::one() + (Rational::one() + l * 6).recip()
}

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn timed<T>(limit: Duration, what: &str, f: impl FnOnce() -> T) -> Result<(T, Duration), String> {
    let start = Instant::now();
    let out = f();
    let took = start.elapsed();
    ensure(took < limit, || format!("{what} took {took:?}, limit {limit:?}"))?;
    Ok((out, took))
}

fn deterministic_ski() -> Check {
    let b = 100u64;
    let bf = Rational::from(b);
    let mut slowest = Duration::ZERO;
    for l in lambda_grid() {
        let ((point, ratio, lower), took) = timed(Duration::from_secs(1), &format!("B=100 λ={l}"), || {
            let point = det_worst_case(b, &l).unwrap();
            let adv = det_adversary(b, &l).unwrap();
            let policy = det_buy_day(b, adv.predicted_days(), &l).unwrap();
            let ratio = det_cost(b, adv.true_days(), policy) / opt_ski_cost(&adv);
            (point, ratio, det_lower_bound(b, &l))
        })?;
        slowest = slowest.max(took);
        let beta_cap = Rational::one() + &l + bf.recip();
        let gamma_cap = Rational::one() + l.recip() + Rational::integer(2) / &bf;
        ensure(*point.consistency() <= beta_cap, || format!("λ={l}: consistency {} > {beta_cap}", point.consistency()))?;
        ensure(*point.robustness() <= gamma_cap, || format!("λ={l}: robustness {} > {gamma_cap}", point.robustness()))?;
        ensure(ratio >= lower, || format!("λ={l}: adversary ratio {ratio} < {lower}"))?;
    }
    Ok(format!("B=100, 4 lambdas, slowest {slowest:.2?}"))
}

fn randomized_ski() -> Check {
    let b = 50u64;
    let tol = decimal_tolerance(10);
    let (result, took) = timed(Duration::from_secs(5), "B=50 sweep", || {
        lambda_grid()
            .into_iter()
            .map(|l| (rand_worst_case(b, &l).unwrap(), l))
            .collect::<Vec<_>>()
    })?;
    for (point, l) in result {
        let beta = rand_consistency_bound(&l, &tol);
        let gamma = rand_robustness_bound(b, &l, &tol);
        ensure(beta.width() <= tol && gamma.width() <= tol, || format!("λ={l}: enclosure too wide"))?;
        ensure(point.consistency() <= beta.lo(), || {
            format!("λ={l}: consistency {} above {}", point.consistency().to_f64(), beta.lo().to_f64())
        })?;
        ensure(point.robustness() <= gamma.lo(), || {
            format!("λ={l}: robustness {} above {}", point.robustness().to_f64(), gamma.lo().to_f64())
        })?;
    }
    Ok(format!("B=50, 4 lambdas in {took:.2?}"))
}

fn lp_tightness() -> Check {
    let (res, took) = timed(Duration::from_secs(60), "LP bisection", || -> Result<(), String> {
        for b in [5u64, 10, 20] {
            for g in [q(8, 5), q(2, 1), q(3, 1)] {
                let tag = format!("B={b} γ={g}");
                let report = verify_tightness(b, &g, 40).map_err(|e| format!("{tag}: {e}"))?;
                ensure(report.bracketed, || {
                    format!("{tag}: [{}, {}] misses {}", report.infeasible_below, report.feasible_above, report.beta_min)
                })?;
                ensure(report.feasible_at_min, || format!("{tag}: infeasible at the minimum"))?;
                ensure(report.witness_accepted, || format!("{tag}: witness rejected"))?;
                let below = &report.beta_min - (&g - 1) / Rational::from_bigint(num_bigint::BigInt::from(1u64 << 30));
                let lp = build_lp(b, &below, &g).unwrap();
                let res = lp_feasible(&lp).unwrap();
                ensure(!res.feasible, || format!("{tag}: feasible just below the minimum"))?;
                ensure(lp.is_infeasibility_certificate(res.certificate.as_ref().unwrap()), || {
                    format!("{tag}: bad certificate")
                })?;
            }
        }
        Ok(())
    })?;
    res?;
    Ok(format!("9 (B, γ) pairs, depth 40, in {took:.2?}"))
}

fn reduction_properties() -> Check {
    let mut checked = 0usize;
    let mut feasible_bases = 0usize;
    for b in 2u64..=8 {
        for g in [q(3, 2), q(8, 5), q(2, 1), q(5, 2), q(3, 1)] {
            for j in [1, 3, 5, 7, 9] {
                let beta = Rational::one() + (&g - 1) * q(j, 10);
                let base = lp_feasible(&build_lp(b, &beta, &g).unwrap()).unwrap().feasible;
                feasible_bases += base as usize;
                for x in b..=horizon(b) as u64 {
                    let lp = build_lp_with_dropped_rows(b, &beta, &g, &[x]).unwrap();
                    ensure(lp_feasible(&lp).unwrap().feasible == base, || {
                        format!("B={b} γ={g} β={beta}: C({x}) flips feasibility")
                    })?;
                    checked += 1;
                }
                let ext = build_extended_lp(b, &beta, &g, 2).unwrap();
                ensure(lp_feasible(&ext).unwrap().feasible == base, || {
                    format!("B={b} γ={g} β={beta}: extra variables flip feasibility")
                })?;
                checked += 1;
            }
        }
    }
    let tol = decimal_tolerance(12);
    for b in [2u64, 10, 100] {
        for j in 0..=100 {
            let x = q(j, 100);
            let gap = convexity_gap_lower(b, &x, &tol).unwrap();
            ensure(!gap.is_negative(), || format!("B={b} x={x}: gap lower bound {gap} < 0"))?;
            if j == 0 || j == 100 {
                ensure(gap.is_zero(), || format!("B={b} x={x}: gap {gap} not exactly zero"))?;
            }
        }
    }
    Ok(format!(
        "{checked} LP variants over {feasible_bases} feasible and {} infeasible bases, 303 gap points",
        7 * 25 - feasible_bases
    ))
}

fn asymptotic_match() -> Check {
    let tol = decimal_tolerance(10);
    for l in [q(1, 4), q(1, 2), q(3, 4)] {
        let e = enclosure::exp(&-&l, &(&tol / 1_000_000));
        let gamma = Enclosure::exact(Rational::one()).sub(&e).recip();
        let lower = asymptotic_bound_enclosure(&gamma, &(&tol / 10));
        let upper = rand_consistency_bound(&l, &tol);
        ensure(lower.width() <= tol && upper.width() <= tol, || format!("λ={l}: enclosures too wide"))?;
        ensure(lower.overlaps(&upper), || {
            format!("λ={l}: [{}, {}] vs [{}, {}]", lower.lo().to_f64(), lower.hi().to_f64(), upper.lo().to_f64(), upper.hi().to_f64())
        })?;
    }
    Ok("3 lambdas overlap at width 1e-10".to_string())
}

fn two_stage_consistency() -> Check {
    let sizes = [(1, 1), (1, 2), (2, 1), (1, 3), (3, 1), (2, 3), (3, 2), (1, 10), (7, 4), (5, 9)];
    for l in sched_lambdas() {
        let policy = two_stage_policy(l.clone()).unwrap();
        for &(a, b) in &sizes {
            let y = vec![Rational::integer(a), Rational::integer(b)];
            let r = consistency_ratio(&policy, &y).unwrap();
            let cap = (Rational::one() + &l) * &r.opt_cost;
            ensure(r.alg_cost <= cap, || format!("λ={l} y={a},{b}: {} > {cap}", r.alg_cost))?;
            if (a, b) == (1, 1) {
                ensure(r.alg_cost == cap, || format!("λ={l}: not tight at (1,1)"))?;
            }
        }
    }
    Ok("4 lambdas x 10 instances".to_string())
}

fn two_stage_robustness() -> Check {
    let mut slowest = Duration::ZERO;
    let mut closest = Vec::new();
    for l in sched_lambdas() {
        let policy = two_stage_policy(l.clone()).unwrap();
        let (w, took) = timed(Duration::from_secs(30), &format!("λ={l} grid"), || {
            worst_case_ratio_2jobs(&policy, &l, &q(1, 100), &Rational::integer(3)).unwrap()
        })?;
        slowest = slowest.max(took);
        let bound = tight_robustness(&l);
        let r = &w.report.ratio;
        ensure(*r < bound, || format!("λ={l}: ratio {r} reaches {bound}"))?;
        ensure(*r >= &bound - q(1, 20), || format!("λ={l}: ratio {} far below {}", r.to_f64(), bound.to_f64()))?;
        closest.push(format!("{:.4}", (&bound - r).to_f64()));
    }
    Ok(format!("gaps to bound [{}], slowest {slowest:.2?}", closest.join(", ")))
}

fn adversary() -> Check {
    let eps = q(1, 10_000);
    for l in sched_lambdas() {
        let policy = two_stage_policy(l.clone()).unwrap();
        let jobs = adversary_njobs(&policy, 2, &eps).unwrap();
        let r = evaluate(&policy, &jobs).unwrap().ratio;
        let floor = tight_robustness(&l) - q(1, 1000);
        ensure(r >= floor, || format!("λ={l}: adversary ratio {} < {}", r.to_f64(), floor.to_f64()))?;
    }
    for n in [2usize, 3, 5] {
        let ones = JobSet::perfect(vec![Rational::one(); n]).unwrap();
        let alg = simulate(&RoundRobin, &ones).unwrap().total_completion();
        let r = alg / opt_completion(ones.true_times()).unwrap();
        let want = Rational::integer(2) - Rational::new(2, n as i64 + 1);
        ensure(r == want, || format!("RR n={n}: ratio {r} != {want}"))?;
    }
    Ok("two-stage at 4 lambdas, round robin n = 2, 3, 5".to_string())
}

fn formula_identities() -> Check {
    for j in 0..50 {
        let l = q(j, 150);
        let v = sched_robustness_lower_bound(2, &l).unwrap();
        let a = (Rational::integer(2) + &l * 6) / (Rational::one() + &l * 6);
        ensure(v == a && v == tight_robustness(&l), || format!("λ={l}: {v} vs {a}"))?;
    }
    for n in 2u64..=10 {
        ensure(sched_robustness_lower_bound(n, &Rational::zero()).unwrap() == Rational::from(n), || format!("n={n} at 0"))?;
        let top = Rational::one() - Rational::new(2, n as i64 + 1);
        let want = Rational::integer(2) - Rational::new(2, n as i64 + 1);
        ensure(sched_robustness_lower_bound(n, &top).unwrap() == want, || format!("n={n} at the top end"))?;
    }
    Ok("50-point grid, n = 2..10 endpoints".to_string())
}

fn curve_emission() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut total = 0;
    for (which, slack) in [("ski", q(3, 50)), ("sched2", Rational::zero()), ("schedN", Rational::zero())] {
        let csv = dir.path().join(format!("{which}.csv"));
        let svg = dir.path().join(format!("{which}.svg"));
        let out = Command::new(env!("CARGO_BIN_EXE_robcons"))
            .args(["curve", "--which", which, "--budget", "50", "--n", "4", "--out"])
            .arg(&csv)
            .arg("--svg")
            .arg(&svg)
            .output()
            .map_err(|e| e.to_string())?;
        ensure(out.status.success(), || {
            format!("curve --which {which} failed: {}", String::from_utf8_lossy(&out.stderr))
        })?;
        let parsed = parse_csv(&std::fs::read_to_string(&csv).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
        let bad = dominance_violations(&parsed);
        ensure(bad.is_empty(), || format!("{which}: {} dominance violations, first {:?}", bad.len(), bad[0]))?;
        let bad = measured_violations(&parsed, &slack);
        ensure(bad.is_empty(), || format!("{which}: {} measured violations", bad.len()))?;
        if which == "ski" {
            let floor = Rational::from(50u64).recip();
            let lambdas: Vec<Rational> = (1..=19).map(|j| q(j, 20)).filter(|l| *l > floor).collect();
            let expected = rows(&ski_curves(50, &lambdas).unwrap());
            ensure(parsed == expected, || "ski CSV exact columns differ from the generated points".to_string())?;
        }
        total += parsed.len();
    }
    Ok(format!("{total} rows across ski, sched2, schedN"))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("deterministic ski-rental tightness", deterministic_ski),
        ("randomized ski-rental upper bound", randomized_ski),
        ("LP tightness by exact bisection", lp_tightness),
        ("reduction properties and convexity gap", reduction_properties),
        ("asymptotic lower bound matches randomized consistency", asymptotic_match),
        ("two-stage consistency is exact", two_stage_consistency),
        ("two-stage robustness", two_stage_robustness),
        ("adversary effectiveness", adversary),
        ("formula identities", formula_identities),
        ("curve emission", curve_emission),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {why}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
