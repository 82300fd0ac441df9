//! Certification report: runs every numerical check in [`crate::lemmas`] over an `ε` grid
//! and collects one PASS/FAIL line per check.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lemmas::{
    alpha_identity_residual, alpha_minus, alpha_plus, beta_median_tail_exact, certify_h_min, default_epsilon_grid, f1,
    f1_derivative, k2_star, two_point_scan_side, upper_edge, Side, MIN_GRID_POINTS,
};
use crate::plan::{median_tail_bound, mom_leading_constant, nuisance_factor, scaled_leading_constant, TailForm};

pub const H_MIN_TOLERANCE: f64 = 1e-9;
pub const SCAN_TOLERANCE: f64 = 1e-6;
pub const AGREEMENT_TOLERANCE: f64 = 1e-6;
pub const K0_EQUALITY_TOLERANCE: f64 = 1e-12;
pub const DERIVATIVE_TOLERANCE: f64 = 1e-6;
pub const IDENTITY_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertifyConfig {
    pub epsilon_grid: Vec<f64>,
    /// Grid size for [`certify_h_min`].
    pub grid_points: usize,
    /// Grid size for the two-point scan.
    pub scan_points: usize,
    /// Multiplies `alpha_plus(ε)` in the tail checks. Anything well above 1 must fail.
    pub alpha_inflation: f64,
    /// Tail masses `p` at which the median bound is compared to the exact tail.
    pub median_p_grid: Vec<f64>,
    /// The median bound is checked for `k = 1..=median_k_max`.
    pub median_k_max: u64,
}

impl Default for CertifyConfig {
    fn default() -> Self {
        Self {
            epsilon_grid: default_epsilon_grid(),
            grid_points: 10_000,
            scan_points: 200_000,
            alpha_inflation: 1.0,
            // The two tail masses the plans rely on.
            median_p_grid: vec![0.125, 0.25],
            median_k_max: 50,
        }
    }
}

impl CertifyConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epsilon_grid.is_empty() {
            return Err(Error::Parse("epsilon grid is empty".into()));
        }
        for &eps in &self.epsilon_grid {
            if !(eps > 0.0 && eps < 1.0 / 3.0) {
                return Err(Error::domain("epsilon", eps, "(0, 1/3)"));
            }
        }
        if self.grid_points < MIN_GRID_POINTS {
            return Err(Error::domain("grid_points", self.grid_points as f64, "[1000, inf)"));
        }
        if self.scan_points < 2 {
            return Err(Error::domain("scan_points", self.scan_points as f64, "[2, inf)"));
        }
        if !(self.alpha_inflation > 0.0 && self.alpha_inflation.is_finite()) {
            return Err(Error::domain("alpha_inflation", self.alpha_inflation, "(0, inf)"));
        }
        for &p in &self.median_p_grid {
            if !(p > 0.0 && p < 0.5) {
                return Err(Error::domain("median p", p, "(0, 1/2)"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Status {
    Pass,
    Fail,
}

impl Status {
    fn from_bool(ok: bool) -> Self {
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
        }
    }
}

/// One certified quantity: `value` is the worst case over the grid, compared to `threshold`
/// in the direction given by `comparison`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub status: Status,
    pub value: f64,
    pub comparison: &'static str,
    pub threshold: f64,
    /// Where the worst case occurred.
    pub at: String,
}

impl Check {
    fn at_least(name: &'static str, value: f64, threshold: f64, at: String) -> Self {
        Self { name, status: Status::from_bool(value >= threshold), value, comparison: ">=", threshold, at }
    }

    fn at_most(name: &'static str, value: f64, threshold: f64, at: String) -> Self {
        Self { name, status: Status::from_bool(value <= threshold), value, comparison: "<=", threshold, at }
    }
}

/// Per-`ε` values behind the tail checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EpsilonRow {
    pub epsilon: f64,
    pub alpha: f64,
    pub h_min_upper: f64,
    pub h_min_lower: f64,
    pub scan_upper: f64,
    pub scan_lower: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HeadlineConstants {
    /// `2/ln(4/3)`.
    pub scaled: f64,
    /// `16/ln(16/7)`.
    pub median_of_means: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertificationReport {
    pub passed: bool,
    pub constants: HeadlineConstants,
    pub checks: Vec<Check>,
    pub rows: Vec<EpsilonRow>,
}

impl CertificationReport {
    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| c.status == Status::Fail)
    }
}

fn worst_by<I, F>(items: I, mut beats: F) -> (f64, String)
where
    I: IntoIterator<Item = (f64, String)>,
    F: FnMut(f64, f64) -> bool,
{
    let mut best: Option<(f64, String)> = None;
    for (v, at) in items {
        // NaN never wins a comparison, so it is returned as soon as it is seen.
        if v.is_nan() {
            return (v, at);
        }
        if best.as_ref().is_none_or(|b| beats(v, b.0)) {
            best = Some((v, at));
        }
    }
    best.unwrap_or((f64::NAN, String::new()))
}

fn min_of<I: IntoIterator<Item = (f64, String)>>(items: I) -> (f64, String) {
    worst_by(items, |v, b| v < b)
}

fn max_of<I: IntoIterator<Item = (f64, String)>>(items: I) -> (f64, String) {
    worst_by(items, |v, b| v > b)
}

fn tail_row(eps: f64, config: &CertifyConfig) -> Result<EpsilonRow> {
    let alpha = alpha_plus(eps)? * config.alpha_inflation;
    let up = certify_h_min(eps, alpha, Side::Upper, config.grid_points)?;
    let down = certify_h_min(eps, alpha, Side::Lower, config.grid_points)?;
    let scan_up = two_point_scan_side(eps, alpha, config.scan_points, Side::Upper)?;
    let scan_down = two_point_scan_side(eps, alpha, config.scan_points, Side::Lower)?;
    Ok(EpsilonRow {
        epsilon: eps,
        alpha,
        h_min_upper: up.min_value,
        h_min_lower: down.min_value,
        scan_upper: scan_up.worst,
        scan_lower: scan_down.worst,
    })
}

/// Points away from the pole and from `k₂*` (where the derivative vanishes).
fn derivative_probe_points(eps: f64) -> Result<[f64; 4]> {
    let pole = eps / (eps + 2.0);
    let star = k2_star(eps)?;
    Ok([1.5 * pole, 0.5 * (pole + star).max(1.2 * pole), 3.0 * star, upper_edge(eps).max(4.0 * star)])
}

fn derivative_error(eps: f64) -> Result<(f64, f64)> {
    let mut worst = (0.0f64, f64::NAN);
    for k2 in derivative_probe_points(eps)? {
        let h = 1e-6 * k2;
        let fd = (f1(k2 + h, eps)? - f1(k2 - h, eps)?) / (2.0 * h);
        let exact = f1_derivative(k2, eps)?;
        let rel = (fd - exact).abs() / exact.abs();
        if !(rel <= worst.0) {
            worst = (rel, k2);
        }
    }
    Ok(worst)
}

/// Runs the full certificate. Errors only on an invalid configuration.
pub fn certify(config: &CertifyConfig) -> Result<CertificationReport> {
    config.validate()?;
    let grid = &config.epsilon_grid;
    let at_eps = |e: f64| format!("epsilon={e}");

    let rows: Vec<EpsilonRow> = grid.par_iter().map(|&eps| tail_row(eps, config)).collect::<Result<_>>()?;

    let mut checks = Vec::new();
    let (v, at) = min_of(rows.iter().map(|r| (r.h_min_upper, at_eps(r.epsilon))));
    checks.push(Check::at_least("h_min_upper", v, 0.75 - H_MIN_TOLERANCE, at));
    let (v, at) = min_of(rows.iter().map(|r| (r.h_min_lower, at_eps(r.epsilon))));
    checks.push(Check::at_least("h_min_lower", v, 0.75 - H_MIN_TOLERANCE, at));
    let (v, at) = max_of(rows.iter().map(|r| (r.scan_upper.max(r.scan_lower), at_eps(r.epsilon))));
    checks.push(Check::at_most("two_point_worst_tail", v, 0.25 + SCAN_TOLERANCE, at));
    let (v, at) = max_of(rows.iter().map(|r| {
        let up = (1.0 - r.h_min_upper - r.scan_upper).abs();
        let down = (1.0 - r.h_min_lower - r.scan_lower).abs();
        (up.max(down), at_eps(r.epsilon))
    }));
    checks.push(Check::at_most("oracle_agreement", v, AGREEMENT_TOLERANCE, at));

    let mut ratios = Vec::new();
    let mut k0 = Vec::new();
    for &p in &config.median_p_grid {
        for k in 1..=config.median_k_max {
            let exact = beta_median_tail_exact(p, k)?;
            let bound = median_tail_bound(p, k, TailForm::OneSided)?;
            ratios.push((exact / bound, format!("p={p} k={k}")));
        }
        k0.push(((beta_median_tail_exact(p, 0)? - p).abs(), format!("p={p}")));
    }
    if !ratios.is_empty() {
        let (v, at) = max_of(ratios);
        checks.push(Check::at_most("median_tail_bound", v, 1.0, at));
        let (v, at) = max_of(k0);
        checks.push(Check::at_most("median_k0_equality", v, K0_EQUALITY_TOLERANCE, at));
    }

    let mut slack = Vec::new();
    let mut f1_margin = Vec::new();
    let mut derivative = Vec::new();
    let mut dominance = Vec::new();
    let mut identity = Vec::new();
    for &eps in grid {
        let star = k2_star(eps)?;
        slack.push(((star - (eps - eps * eps)).min(eps - star), at_eps(eps)));
        let target = eps * eps / nuisance_factor(eps)?;
        f1_margin.push((f1(star, eps)? / target, at_eps(eps)));
        let (rel, k2) = derivative_error(eps)?;
        derivative.push((rel, format!("epsilon={eps} k2={k2}")));
        dominance.push((alpha_plus(eps)? / alpha_minus(eps)?, at_eps(eps)));
        identity.push((alpha_identity_residual(eps)?, at_eps(eps)));
    }
    let (v, at) = min_of(slack);
    checks.push(Check::at_least("k2_star_bounds", v, 0.0, at));
    let (v, at) = min_of(f1_margin);
    checks.push(Check::at_least("f1_at_k2_star_ratio", v, 1.0 - IDENTITY_TOLERANCE, at));
    let (v, at) = max_of(derivative);
    checks.push(Check::at_most("f1_derivative_rel_error", v, DERIVATIVE_TOLERANCE, at));
    let (v, at) = max_of(dominance);
    checks.push(Check::at_most("alpha_plus_over_alpha_minus", v, 1.0, at));
    let (v, at) = max_of(identity);
    checks.push(Check::at_most("alpha_identity_residual", v, IDENTITY_TOLERANCE, at));

    let constants = HeadlineConstants { scaled: scaled_leading_constant(), median_of_means: mom_leading_constant() };
    checks.push(Check::at_most("scaled_constant", constants.scaled, 6.96, "2/ln(4/3)".into()));
    checks.push(Check::at_most(
        "mom_constant_distance",
        (constants.median_of_means - 19.35).abs(),
        0.01,
        "|16/ln(16/7) - 19.35|".into(),
    ));

    let passed = checks.iter().all(|c| c.status == Status::Pass);
    Ok(CertificationReport { passed, constants, checks, rows })
}
