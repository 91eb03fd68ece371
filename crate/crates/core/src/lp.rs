//! Exact feasibility for small linear programs over the rationals.
//!
//! [`lp_feasible`] runs phase 1 of the tableau simplex method with Bland's
//! anti-cycling rule. Both outcomes are certified before they are returned:
//! a feasible answer carries a witness that satisfies every constraint
//! exactly, and an infeasible answer carries Farkas multipliers `u` with
//! `uᵀA >= 0`, `u_i >= 0` on `<=` rows, and `uᵀb < 0`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::rational::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Relation::Le => "<=",
            Relation::Eq => "=",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Constraint {
    pub coeffs: Vec<Rational>,
    pub relation: Relation,
    pub rhs: Rational,
}

impl Constraint {
    pub fn new(coeffs: Vec<Rational>, relation: Relation, rhs: Rational) -> Self {
        Constraint {
            coeffs,
            relation,
            rhs,
        }
    }

    fn lhs(&self, x: &[Rational]) -> Rational {
        self.coeffs.iter().zip(x).map(|(a, v)| a * v).sum()
    }

    pub fn holds_at(&self, x: &[Rational]) -> bool {
        let lhs = self.lhs(x);
        match self.relation {
            Relation::Le => lhs <= self.rhs,
            Relation::Eq => lhs == self.rhs,
        }
    }
}

/// Feasibility problem `{x >= 0 : each constraint holds}`; no objective.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LpProblem {
    num_vars: usize,
    constraints: Vec<Constraint>,
}

impl LpProblem {
    pub fn new(num_vars: usize, constraints: Vec<Constraint>) -> Result<Self> {
        if num_vars == 0 {
            return Err(Error::MalformedLp("no variables".into()));
        }
        for (i, c) in constraints.iter().enumerate() {
            if c.coeffs.len() != num_vars {
                return Err(Error::MalformedLp(format!(
                    "constraint {i} has {} coefficients, expected {num_vars}",
                    c.coeffs.len()
                )));
            }
        }
        Ok(LpProblem {
            num_vars,
            constraints,
        })
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn with_constraint(mut self, c: Constraint) -> Result<Self> {
        self.constraints.push(c);
        LpProblem::new(self.num_vars, self.constraints)
    }

    pub fn is_satisfied_by(&self, x: &[Rational]) -> bool {
        x.len() == self.num_vars
            && x.iter().all(|v| !v.is_negative())
            && self.constraints.iter().all(|c| c.holds_at(x))
    }

    /// True when `u` proves infeasibility: `uᵀA >= 0` columnwise, `u_i >= 0`
    /// on `<=` rows, `uᵀb < 0`.
    pub fn is_infeasibility_certificate(&self, u: &[Rational]) -> bool {
        if u.len() != self.constraints.len() {
            return false;
        }
        let signs_ok = self
            .constraints
            .iter()
            .zip(u)
            .all(|(c, ui)| c.relation == Relation::Eq || !ui.is_negative());
        let columns_ok = (0..self.num_vars).all(|j| {
            let s: Rational = self.constraints.iter().zip(u).map(|(c, ui)| &c.coeffs[j] * ui).sum();
            !s.is_negative()
        });
        let rhs: Rational = self.constraints.iter().zip(u).map(|(c, ui)| &c.rhs * ui).sum();
        signs_ok && columns_ok && rhs.is_negative()
    }

    /// One constraint per line: `coeff_1 ... coeff_n REL rhs`, every rational
    /// written as `num/den`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for c in &self.constraints {
            for a in &c.coeffs {
                out.push_str(&a.to_fraction_string());
                out.push(' ');
            }
            out.push_str(&c.relation.to_string());
            out.push(' ');
            out.push_str(&c.rhs.to_fraction_string());
            out.push('\n');
        }
        out
    }
}

impl FromStr for LpProblem {
    type Err = Error;

    /// Parses the format written by [`LpProblem::to_text`]. Blank lines and
    /// lines starting with `#` are skipped.
    fn from_str(s: &str) -> Result<Self> {
        let mut constraints = Vec::new();
        let mut width = None;
        for (lineno, line) in s.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = |msg: &str| Error::MalformedLp(format!("line {}: {msg}", lineno + 1));
            let tokens: Vec<&str> = line.split_whitespace().collect();
            if tokens.len() < 3 {
                return Err(bad("expected coefficients, relation and rhs"));
            }
            let (rel_tok, rhs_tok) = (tokens[tokens.len() - 2], tokens[tokens.len() - 1]);
            let relation = match rel_tok {
                "<=" => Relation::Le,
                "=" => Relation::Eq,
                other => return Err(bad(&format!("unknown relation {other:?}"))),
            };
            let coeffs = tokens[..tokens.len() - 2]
                .iter()
                .map(|t| t.parse::<Rational>())
                .collect::<Result<Vec<_>>>()?;
            if *width.get_or_insert(coeffs.len()) != coeffs.len() {
                return Err(bad("ragged coefficient count"));
            }
            constraints.push(Constraint::new(coeffs, relation, rhs_tok.parse()?));
        }
        let n = width.ok_or_else(|| Error::MalformedLp("no constraints".into()))?;
        LpProblem::new(n, constraints)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LpFeasibility {
    pub feasible: bool,
    /// A point satisfying every constraint, when feasible.
    pub witness: Option<Vec<Rational>>,
    /// Farkas multipliers, one per constraint, when infeasible.
    pub certificate: Option<Vec<Rational>>,
}

struct Tableau {
    rows: Vec<Vec<Rational>>,
    rhs: Vec<Rational>,
    basis: Vec<usize>,
    cost: Vec<Rational>,
    reduced: Vec<Rational>,
}

impl Tableau {
    fn pivot(&mut self, row: usize, col: usize) {
        let p = self.rows[row][col].clone();
        for v in self.rows[row].iter_mut() {
            *v /= &p;
        }
        self.rhs[row] /= &p;
        let pivot_row = self.rows[row].clone();
        let pivot_rhs = self.rhs[row].clone();
        for r in 0..self.rows.len() {
            if r == row || self.rows[r][col].is_zero() {
                continue;
            }
            let f = self.rows[r][col].clone();
            for (v, pv) in self.rows[r].iter_mut().zip(&pivot_row) {
                if !pv.is_zero() {
                    *v -= &f * pv;
                }
            }
            self.rhs[r] -= &f * &pivot_rhs;
        }
        if !self.reduced[col].is_zero() {
            let f = self.reduced[col].clone();
            for (v, pv) in self.reduced.iter_mut().zip(&pivot_row) {
                if !pv.is_zero() {
                    *v -= &f * pv;
                }
            }
        }
        self.basis[row] = col;
    }

    /// Bland's rule: lowest-index improving column, lowest-index leaving
    /// variable among ratio-test ties.
    fn run(&mut self) {
        loop {
            let Some(col) = self.reduced.iter().position(|d| d.is_negative()) else {
                return;
            };
            let mut best: Option<(Rational, usize)> = None;
            for r in 0..self.rows.len() {
                let a = &self.rows[r][col];
                if !a.is_positive() {
                    continue;
                }
                let ratio = &self.rhs[r] / a;
                let better = match &best {
                    None => true,
                    Some((b, br)) => ratio < *b || (ratio == *b && self.basis[r] < self.basis[*br]),
                };
                if better {
                    best = Some((ratio, r));
                }
            }
            // phase 1 is bounded below by zero, so some row always qualifies
            let (_, row) = best.expect("phase-1 objective cannot be unbounded");
            self.pivot(row, col);
        }
    }

    fn objective(&self) -> Rational {
        self.basis
            .iter()
            .zip(&self.rhs)
            .map(|(&b, v)| &self.cost[b] * v)
            .sum()
    }
}

/// Exact phase-1 simplex feasibility test.
pub fn lp_feasible(lp: &LpProblem) -> Result<LpFeasibility> {
    let lp = LpProblem::new(lp.num_vars, lp.constraints.clone())?;
    let n = lp.num_vars;
    let m = lp.constraints.len();

    // Normalize rhs >= 0, then give every row a starting basic column:
    // slack for `<=`, artificial for `=` and for negated `<=` (now `>=`).
    let mut signs = Vec::with_capacity(m);
    let mut kinds = Vec::with_capacity(m);
    for c in &lp.constraints {
        let negated = c.rhs.is_negative();
        signs.push(if negated { -1i64 } else { 1 });
        kinds.push((c.relation, negated));
    }
    let extra_cols: usize = kinds
        .iter()
        .map(|k| match k {
            (Relation::Le, false) => 1,
            (Relation::Le, true) => 2,
            (Relation::Eq, _) => 1,
        })
        .sum();
    let width = n + extra_cols;
    let mut rows = vec![vec![Rational::zero(); width]; m];
    let mut rhs = Vec::with_capacity(m);
    let mut basis = Vec::with_capacity(m);
    let mut cost = vec![Rational::zero(); width];
    let mut next = n;
    for (i, c) in lp.constraints.iter().enumerate() {
        let s = signs[i];
        for (j, a) in c.coeffs.iter().enumerate() {
            rows[i][j] = a * s;
        }
        rhs.push(&c.rhs * s);
        match kinds[i] {
            (Relation::Le, false) => {
                rows[i][next] = Rational::one();
                basis.push(next);
                next += 1;
            }
            (Relation::Le, true) => {
                rows[i][next] = -Rational::one();
                rows[i][next + 1] = Rational::one();
                cost[next + 1] = Rational::one();
                basis.push(next + 1);
                next += 2;
            }
            (Relation::Eq, _) => {
                rows[i][next] = Rational::one();
                cost[next] = Rational::one();
                basis.push(next);
                next += 1;
            }
        }
    }
    let start_basis = basis.clone();

    let mut reduced = cost.clone();
    for (i, &b) in basis.iter().enumerate() {
        if cost[b].is_zero() {
            continue;
        }
        for (d, a) in reduced.iter_mut().zip(&rows[i]) {
            *d -= &cost[b] * a;
        }
    }
    let mut t = Tableau {
        rows,
        rhs,
        basis,
        cost,
        reduced,
    };
    t.run();

    if t.objective().is_zero() {
        let mut x = vec![Rational::zero(); n];
        for (r, &b) in t.basis.iter().enumerate() {
            if b < n {
                x[b] = t.rhs[r].clone();
            }
        }
        if !lp.is_satisfied_by(&x) {
            return Err(Error::MalformedLp("simplex produced a witness that fails verification".into()));
        }
        return Ok(LpFeasibility {
            feasible: true,
            witness: Some(x),
            certificate: None,
        });
    }

    // π = c_Bᵀ B⁻¹; column start_basis[i] of the final tableau is B⁻¹ e_i.
    let u: Vec<Rational> = (0..m)
        .map(|i| {
            let col = start_basis[i];
            let pi: Rational = t
                .basis
                .iter()
                .enumerate()
                .map(|(r, &b)| &t.cost[b] * &t.rows[r][col])
                .sum();
            -(pi * signs[i])
        })
        .collect();
    if !lp.is_infeasibility_certificate(&u) {
        return Err(Error::MalformedLp("simplex produced a certificate that fails verification".into()));
    }
    Ok(LpFeasibility {
        feasible: false,
        witness: None,
        certificate: Some(u),
    })
}
