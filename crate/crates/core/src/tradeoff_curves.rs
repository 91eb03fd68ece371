//! Consistency/robustness trade-off curves as data series, with CSV and SVG
//! output.
//!
//! Closed-form curves with transcendental values are stored through certified
//! enclosures: upper-bound series keep the upper end, lower-bound series the
//! lower end, so every stored rational is itself a valid bound.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::enclosure::{self, Enclosure};
use crate::error::{Error, Result};
use crate::model::TradeoffPoint;
use crate::rational::Rational;
use crate::scheduling::{consistency_ratio, sched_robustness_lower_bound, two_stage_policy, worst_case_ratio_2jobs};
use crate::ski_lp::asymptotic_lower_bound;
use crate::ski_rental::{det_lower_bound, det_worst_case, rand_consistency_bound, rand_robustness_bound, rand_worst_case};

pub const CSV_HEADER: [&str; 7] = ["series", "lambda", "beta", "gamma", "kind", "beta_exact", "gamma_exact"];

const DIGITS: u32 = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SeriesKind {
    UpperBound,
    LowerBound,
    Measured,
}

impl SeriesKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SeriesKind::UpperBound => "upper-bound",
            SeriesKind::LowerBound => "lower-bound",
            SeriesKind::Measured => "measured",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "upper-bound" => Ok(SeriesKind::UpperBound),
            "lower-bound" => Ok(SeriesKind::LowerBound),
            "measured" => Ok(SeriesKind::Measured),
            _ => Err(Error::Parse {
                what: "series kind",
                input: s.to_string(),
            }),
        }
    }
}

#[derive(Clone, Debug)]
pub struct CurveSeries {
    name: String,
    kind: SeriesKind,
    points: Vec<TradeoffPoint>,
}

impl CurveSeries {
    /// Points must be sorted by strictly increasing `lambda`.
    pub fn new(name: impl Into<String>, kind: SeriesKind, points: Vec<TradeoffPoint>) -> Result<Self> {
        let name = name.into();
        if name.is_empty() || name.contains([',', '"', '\n']) {
            return Err(Error::invalid(format!("bad series name {name:?}")));
        }
        if points.windows(2).any(|w| w[0].lambda() >= w[1].lambda()) {
            return Err(Error::invalid(format!("series {name}: lambdas not strictly increasing")));
        }
        Ok(CurveSeries { name, kind, points })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kind(&self) -> SeriesKind {
        self.kind
    }

    pub fn points(&self) -> &[TradeoffPoint] {
        &self.points
    }

    pub fn family(&self) -> &str {
        family_of(&self.name)
    }
}

/// Series that describe the same trade-off share a family: the name without
/// a `-lower`, `-measured` or `-prior` suffix.
pub fn family_of(name: &str) -> &str {
    ["-lower", "-measured", "-prior"]
        .iter()
        .find_map(|s| name.strip_suffix(s))
        .unwrap_or(name)
}

fn tolerance() -> Rational {
    enclosure::decimal_tolerance(15)
}

fn point(lambda: &Rational, beta: Rational, gamma: Rational) -> Result<TradeoffPoint> {
    TradeoffPoint::new(lambda.clone(), beta, gamma)
}

fn check_sorted_lambdas(lambdas: &[Rational]) -> Result<()> {
    if lambdas.is_empty() {
        return Err(Error::EmptyInput("lambda grid"));
    }
    if lambdas.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid("lambda grid must be strictly increasing"));
    }
    Ok(())
}

/// Robustness of the randomized algorithm as `B` grows: `1/(1 - e^{-λ})`.
fn limit_robustness(lambda: &Rational, tol: &Rational) -> Enclosure {
    let e = enclosure::exp(&-lambda, &(tol * lambda * lambda / 16));
    Enclosure::exact(Rational::one()).sub(&e).recip()
}

/// Ski-rental series for buy cost `B`: deterministic upper, lower and
/// measured; randomized upper, asymptotic lower and measured.
pub fn ski_curves(budget: u64, lambdas: &[Rational]) -> Result<Vec<CurveSeries>> {
    check_sorted_lambdas(lambdas)?;
    let b = Rational::from(budget);
    if budget < 2 || lambdas[0] <= b.recip() || *lambdas.last().unwrap() >= Rational::one() {
        return Err(Error::invalid(format!("ski curves need B >= 2 and lambdas in (1/{budget}, 1)")));
    }
    let tol = tolerance();
    let mut det = Vec::new();
    let mut det_lower = Vec::new();
    let mut det_measured = Vec::new();
    let mut rand = Vec::new();
    let mut rand_lower = Vec::new();
    let mut rand_measured = Vec::new();
    for l in lambdas {
        let one = Rational::one();
        det.push(point(l, &one + l, &one + l.recip())?);
        det_lower.push(point(l, &one + l, det_lower_bound(budget, l))?);
        det_measured.push(det_worst_case(budget, l)?);

        let beta = rand_consistency_bound(l, &tol).hi().clone();
        let gamma = rand_robustness_bound(budget, l, &tol).hi().clone();
        rand.push(point(l, beta, gamma)?);
        let gamma_inf = limit_robustness(l, &tol).hi().clone();
        let beta_low = asymptotic_lower_bound(&gamma_inf, 15)?;
        rand_lower.push(point(l, beta_low, gamma_inf)?);
        rand_measured.push(rand_worst_case(budget, l)?);
    }
    Ok(vec![
        CurveSeries::new("ski-det", SeriesKind::UpperBound, det)?,
        CurveSeries::new("ski-det-lower", SeriesKind::LowerBound, det_lower)?,
        CurveSeries::new("ski-det-measured", SeriesKind::Measured, det_measured)?,
        CurveSeries::new("ski-rand", SeriesKind::UpperBound, rand)?,
        CurveSeries::new("ski-rand-lower", SeriesKind::LowerBound, rand_lower)?,
        CurveSeries::new("ski-rand-measured", SeriesKind::Measured, rand_measured)?,
    ])
}

/// Robustness of the earlier two-job algorithm at consistency `1 + λ`:
/// its curve `((1+μ)/(2μ), 4/(3-3μ))` at `μ = 1/(1+2λ)`.
pub fn prior_two_job_robustness(lambda: &Rational) -> Rational {
    (Rational::integer(2) + lambda * 4) / (lambda * 3)
}

/// Scheduling series. For two jobs: the tight curve, the matching lower
/// bound, the earlier algorithm's curve and measured points from grid
/// search with spacing `step`. For other `n`, only the lower bound.
pub fn sched_curves(n: u64, lambdas: &[Rational], step: &Rational) -> Result<Vec<CurveSeries>> {
    check_sorted_lambdas(lambdas)?;
    let mut lower = Vec::new();
    for l in lambdas {
        lower.push(point(l, Rational::one() + l, sched_robustness_lower_bound(n, l)?)?);
    }
    let lower = CurveSeries::new(format!("sched{n}-lower"), SeriesKind::LowerBound, lower)?;
    if n != 2 {
        return Ok(vec![lower]);
    }
    if !lambdas[0].is_positive() || *lambdas.last().unwrap() >= Rational::new(1, 3) {
        return Err(Error::invalid("two-job curves need lambdas in (0, 1/3)"));
    }
    let probes: Vec<Vec<Rational>> = [(1, 1), (1, 2), (2, 1), (2, 3), (3, 1)]
        .iter()
        .map(|&(a, b)| vec![Rational::integer(a), Rational::integer(b)])
        .collect();
    let cap = Rational::integer(3);
    let mut tight = Vec::new();
    let mut prior = Vec::new();
    let mut measured = Vec::new();
    for l in lambdas {
        let one = Rational::one();
        tight.push(point(l, &one + l, &one + (&one + l * 6).recip())?);
        prior.push(point(l, &one + l, prior_two_job_robustness(l))?);
        let policy = two_stage_policy(l.clone())?;
        let mut beta = Rational::one();
        for y in &probes {
            beta = beta.max(consistency_ratio(&policy, y)?.ratio);
        }
        let gamma = worst_case_ratio_2jobs(&policy, l, step, &cap)?.report.ratio;
        measured.push(point(l, beta, gamma)?);
    }
    Ok(vec![
        CurveSeries::new("sched2", SeriesKind::UpperBound, tight)?,
        lower,
        CurveSeries::new("sched2-prior", SeriesKind::UpperBound, prior)?,
        CurveSeries::new("sched2-measured", SeriesKind::Measured, measured)?,
    ])
}

/// One CSV row with exact columns parsed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CurveRow {
    pub series: String,
    pub lambda: String,
    pub beta: String,
    pub gamma: String,
    pub kind: SeriesKind,
    pub beta_exact: Rational,
    pub gamma_exact: Rational,
}

impl CurveRow {
    fn from_point(series: &CurveSeries, p: &TradeoffPoint) -> Self {
        CurveRow {
            series: series.name.clone(),
            lambda: p.lambda().to_decimal_string(DIGITS),
            beta: p.consistency().to_decimal_string(DIGITS),
            gamma: p.robustness().to_decimal_string(DIGITS),
            kind: series.kind,
            beta_exact: p.consistency().clone(),
            gamma_exact: p.robustness().clone(),
        }
    }

    fn fields(&self) -> [String; 7] {
        [
            self.series.clone(),
            self.lambda.clone(),
            self.beta.clone(),
            self.gamma.clone(),
            self.kind.as_str().to_string(),
            self.beta_exact.to_fraction_string(),
            self.gamma_exact.to_fraction_string(),
        ]
    }
}

pub fn rows(series: &[CurveSeries]) -> Vec<CurveRow> {
    series
        .iter()
        .flat_map(|s| s.points.iter().map(move |p| CurveRow::from_point(s, p)))
        .collect()
}

pub fn to_csv_string(series: &[CurveSeries]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let path = Path::new("<memory>");
    let wrap = |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    };
    w.write_record(CSV_HEADER).map_err(wrap)?;
    for row in rows(series) {
        w.write_record(row.fields()).map_err(wrap)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e.into_error(),
    })?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Parses CSV text in the emitted schema.
pub fn parse_csv(text: &str) -> Result<Vec<CurveRow>> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let wrap = |source| Error::Csv {
        path: "<memory>".into(),
        source,
    };
    let header = reader.headers().map_err(wrap)?;
    if header.iter().ne(CSV_HEADER) {
        return Err(Error::Parse {
            what: "curve CSV header",
            input: header.iter().collect::<Vec<_>>().join(","),
        });
    }
    let mut out = Vec::new();
    for record in reader.records() {
        let record = record.map_err(wrap)?;
        let field = |i: usize| record.get(i).unwrap_or_default().to_string();
        out.push(CurveRow {
            series: field(0),
            lambda: field(1),
            beta: field(2),
            gamma: field(3),
            kind: SeriesKind::parse(&field(4))?,
            beta_exact: field(5).parse()?,
            gamma_exact: field(6).parse()?,
        });
    }
    Ok(out)
}

/// Writes the CSV and, when asked, an SVG plot.
pub fn emit(series: &[CurveSeries], csv_path: &Path, svg_path: Option<&Path>) -> Result<()> {
    if series.is_empty() {
        return Err(Error::EmptyInput("curve series"));
    }
    let text = to_csv_string(series)?;
    std::fs::write(csv_path, text).map_err(|source| Error::Io {
        path: csv_path.to_path_buf(),
        source,
    })?;
    if let Some(svg_path) = svg_path {
        std::fs::write(svg_path, to_svg(series)).map_err(|source| Error::Io {
            path: svg_path.to_path_buf(),
            source,
        })?;
    }
    Ok(())
}

/// Pairs of rows that break `lower <= upper` at equal lambda within a family.
pub fn dominance_violations(rows: &[CurveRow]) -> Vec<(CurveRow, CurveRow)> {
    type Bounds<'a> = (Vec<&'a CurveRow>, Vec<&'a CurveRow>);
    let mut by_key: BTreeMap<(&str, &str), Bounds> = BTreeMap::new();
    for r in rows {
        let entry = by_key.entry((family_of(&r.series), r.lambda.as_str())).or_default();
        match r.kind {
            SeriesKind::UpperBound => entry.0.push(r),
            SeriesKind::LowerBound => entry.1.push(r),
            SeriesKind::Measured => {}
        }
    }
    let mut bad = Vec::new();
    for (uppers, lowers) in by_key.values() {
        for u in uppers {
            for l in lowers {
                if l.beta_exact > u.beta_exact || l.gamma_exact > u.gamma_exact {
                    bad.push(((*l).clone(), (*u).clone()));
                }
            }
        }
    }
    bad
}

/// Measured rows whose consistency or robustness exceeds an upper-bound row
/// of the same family and lambda by more than `slack`.
pub fn measured_violations(rows: &[CurveRow], slack: &Rational) -> Vec<(CurveRow, CurveRow)> {
    let mut bad = Vec::new();
    for m in rows.iter().filter(|r| r.kind == SeriesKind::Measured) {
        let family = family_of(&m.series);
        for u in rows.iter().filter(|r| {
            r.kind == SeriesKind::UpperBound && r.lambda == m.lambda && family_of(&r.series) == family
        }) {
            if m.beta_exact > &u.beta_exact + slack || m.gamma_exact > &u.gamma_exact + slack {
                bad.push((m.clone(), u.clone()));
            }
        }
    }
    bad
}

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

/// Minimal SVG 1.1 plot: consistency on the x axis, robustness on the y
/// axis, bound series as polylines and measured series as dots.
pub fn to_svg(series: &[CurveSeries]) -> String {
    let (w, h, m) = (720.0, 480.0, 60.0);
    let pts = series.iter().flat_map(|s| s.points.iter());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for p in pts {
        let (x, y) = (p.consistency().to_f64(), p.robustness().to_f64());
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if x0 > x1 {
        (x0, x1, y0, y1) = (1.0, 2.0, 1.0, 2.0);
    }
    let pad = |lo: f64, hi: f64| {
        let d = ((hi - lo) * 0.05).max(1e-3);
        (lo - d, hi + d)
    };
    let (x0, x1) = pad(x0, x1);
    let (y0, y1) = pad(y0, y1);
    let sx = |x: f64| m + (x - x0) / (x1 - x0) * (w - 2.0 * m);
    let sy = |y: f64| h - m - (y - y0) / (y1 - y0) * (h - 2.0 * m);

    let mut out = String::new();
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    );
    let _ = writeln!(out, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<g stroke="black"><line x1="{m}" y1="{}" x2="{}" y2="{}"/><line x1="{m}" y1="{m}" x2="{m}" y2="{}"/></g>"#,
        h - m,
        w - m,
        h - m,
        h - m
    );
    for i in 0..=5 {
        let t = i as f64 / 5.0;
        let (xv, yv) = (x0 + t * (x1 - x0), y0 + t * (y1 - y0));
        let _ = writeln!(
            out,
            r#"<line x1="{x:.1}" y1="{}" x2="{x:.1}" y2="{}" stroke="black"/><text x="{x:.1}" y="{}" font-size="11" text-anchor="middle">{xv:.3}</text>"#,
            h - m,
            h - m + 5.0,
            h - m + 18.0,
            x = sx(xv)
        );
        let _ = writeln!(
            out,
            r#"<line x1="{}" y1="{y:.1}" x2="{m}" y2="{y:.1}" stroke="black"/><text x="{}" y="{y:.1}" font-size="11" text-anchor="end">{yv:.3}</text>"#,
            m - 5.0,
            m - 8.0,
            y = sy(yv)
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" font-size="13" text-anchor="middle">consistency</text>"#,
        w / 2.0,
        h - 15.0
    );
    let _ = writeln!(
        out,
        r#"<text x="15" y="{}" font-size="13" text-anchor="middle" transform="rotate(-90 15 {})">robustness</text>"#,
        h / 2.0,
        h / 2.0
    );
    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let coords: Vec<(f64, f64)> = s
            .points
            .iter()
            .map(|p| (sx(p.consistency().to_f64()), sy(p.robustness().to_f64())))
            .collect();
        if s.kind == SeriesKind::Measured {
            for (x, y) in &coords {
                let _ = writeln!(out, r#"<circle cx="{x:.2}" cy="{y:.2}" r="3" fill="{color}"/>"#);
            }
        } else {
            let line: Vec<String> = coords.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
            let dash = if s.kind == SeriesKind::LowerBound {
                r#" stroke-dasharray="6,4""#
            } else {
                ""
            };
            let _ = writeln!(
                out,
                r#"<polyline fill="none" stroke="{color}" stroke-width="2"{dash} points="{}"/>"#,
                line.join(" ")
            );
        }
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" font-size="11" fill="{color}">{} ({})</text>"#,
            w - m - 150.0,
            m + 14.0 * i as f64,
            s.name,
            s.kind.as_str()
        );
    }
    out.push_str("</svg>\n");
    out
}
