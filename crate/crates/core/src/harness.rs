//! Monte Carlo failure-rate harness.
//!
//! Trial `i` runs the configured estimator with seed `trial_seed(master_seed, i)` on a fresh
//! view of the source, so the outcome of every trial is a pure function of
//! `(master_seed, i)`. Trials run on the rayon pool and are collected in index order;
//! the report is assembled on one thread afterwards.

use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::Serialize;

use crate::distributions::{make_source, DistributionSpec};
use crate::error::{Error, Result};
use crate::estimators::{estimate, EstimatorConfig};
use crate::num::CompensatedSum;
use crate::plan::{plan_for, Accuracy, EstimatorKind, RelativeSpread, SamplingPlan};
use crate::rng::trial_seed;
use crate::special::ClopperPearson;

/// Confidence level of the reported failure-rate upper bound.
pub const CONFIDENCE: f64 = 0.99;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExperimentConfig {
    pub kind: EstimatorKind,
    pub accuracy: Accuracy<f64>,
    pub c: RelativeSpread<f64>,
    pub distribution: DistributionSpec<f64>,
    pub trials: u64,
    pub master_seed: u64,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::domain("trials", 0.0, "[1, inf)"));
        }
        self.distribution.validate()?;
        if !(self.distribution.true_mean() > 0.0) {
            return Err(Error::domain("distribution mean", self.distribution.true_mean(), "(0, inf)"));
        }
        Ok(())
    }

    pub fn plan(&self) -> Result<SamplingPlan> {
        plan_for(self.kind, self.c, self.accuracy)
    }

    fn estimator(&self, trial_index: u64) -> EstimatorConfig<f64> {
        EstimatorConfig {
            kind: self.kind,
            accuracy: self.accuracy,
            c: self.c,
            seed: trial_seed(self.master_seed, trial_index),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrialReport {
    pub trial_index: u64,
    pub estimate: f64,
    /// `μ̂/μ − 1`.
    pub rel_error: f64,
    /// `|μ̂/μ − 1| > ε`.
    pub failed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FailureRateReport {
    pub trials: u64,
    pub failures: u64,
    pub empirical_rate: f64,
    /// Upper end of the two-sided exact 99% interval for the failure probability.
    pub cp99_upper: f64,
    pub total_draws_per_trial: u64,
    pub mean_estimate: f64,
    pub mean_abs_rel_error: f64,
    /// Not serialized, so that reports of identical runs are byte-identical.
    #[serde(skip)]
    pub wall_time: Duration,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Simulation {
    pub plan: SamplingPlan,
    pub report: FailureRateReport,
    pub trials: Vec<TrialReport>,
}

/// Runs one trial. Exposed so single trials can be replayed.
pub fn run_trial(config: &ExperimentConfig, trial_index: u64) -> Result<TrialReport> {
    let source = make_source(config.distribution)?;
    let mu = config.distribution.true_mean();
    let est = estimate(&config.estimator(trial_index), &source)?;
    let rel_error = est.value / mu - 1.0;
    Ok(TrialReport {
        trial_index,
        estimate: est.value,
        rel_error,
        failed: rel_error.abs() > config.accuracy.epsilon(),
    })
}

/// Aggregates trial outcomes. The input order does not affect the counts; the sums use
/// compensated summation in the given order.
pub fn summarize(trials: &[TrialReport], plan: &SamplingPlan, wall_time: Duration) -> Result<FailureRateReport> {
    let n = trials.len() as u64;
    let failures = trials.iter().filter(|t| t.failed).count() as u64;
    let cp = ClopperPearson::new(failures, n, 1.0 - CONFIDENCE)?;
    let mean_estimate = trials.iter().map(|t| t.estimate).collect::<CompensatedSum<f64>>().total() / n as f64;
    let mean_abs_rel_error =
        trials.iter().map(|t| t.rel_error.abs()).collect::<CompensatedSum<f64>>().total() / n as f64;
    Ok(FailureRateReport {
        trials: n,
        failures,
        empirical_rate: failures as f64 / n as f64,
        cp99_upper: cp.upper,
        total_draws_per_trial: plan.total(),
        mean_estimate,
        mean_abs_rel_error,
        wall_time,
    })
}

/// Runs all trials in parallel. Any trial error aborts the run; no partial report is built.
pub fn run_simulation(config: &ExperimentConfig) -> Result<Simulation> {
    config.validate()?;
    let plan = config.plan()?;
    let start = Instant::now();
    let trials = (0..config.trials)
        .into_par_iter()
        .map(|i| run_trial(config, i))
        .collect::<Result<Vec<_>>>()?;
    let report = summarize(&trials, &plan, start.elapsed())?;
    Ok(Simulation { plan, report, trials })
}

/// Same as [`run_simulation`] on the calling thread only.
pub fn run_simulation_sequential(config: &ExperimentConfig) -> Result<Simulation> {
    config.validate()?;
    let plan = config.plan()?;
    let start = Instant::now();
    let trials = (0..config.trials).map(|i| run_trial(config, i)).collect::<Result<Vec<_>>>()?;
    let report = summarize(&trials, &plan, start.elapsed())?;
    Ok(Simulation { plan, report, trials })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(kind: EstimatorKind, trials: u64) -> ExperimentConfig {
        ExperimentConfig {
            kind,
            accuracy: Accuracy::new(0.1, 0.25).unwrap(),
            c: RelativeSpread::new(1.0).unwrap(),
            distribution: DistributionSpec::Exponential { mean: 1.0 },
            trials,
            master_seed: 42,
        }
    }

    #[test]
    fn parallel_matches_sequential() {
        let cfg = config(EstimatorKind::ScaledMedian, 64);
        let par = run_simulation(&cfg).unwrap();
        let seq = run_simulation_sequential(&cfg).unwrap();
        assert_eq!(par.trials, seq.trials);
        let strip = |r: &FailureRateReport| FailureRateReport { wall_time: Duration::ZERO, ..r.clone() };
        assert_eq!(strip(&par.report), strip(&seq.report));
    }

    #[test]
    fn trial_replay() {
        let cfg = config(EstimatorKind::MedianOfMeans, 8);
        let sim = run_simulation(&cfg).unwrap();
        assert_eq!(run_trial(&cfg, 5).unwrap(), sim.trials[5]);
        assert_eq!(sim.trials.iter().map(|t| t.trial_index).collect::<Vec<_>>(), (0..8).collect::<Vec<_>>());
    }

    #[test]
    fn report_invariants() {
        let sim = run_simulation(&config(EstimatorKind::MeanOnly, 50)).unwrap();
        let r = &sim.report;
        assert!(r.failures <= r.trials);
        assert_eq!(r.empirical_rate, r.failures as f64 / r.trials as f64);
        assert!(r.cp99_upper >= r.empirical_rate);
        assert_eq!(r.total_draws_per_trial, sim.plan.total());
    }

    #[test]
    fn constant_source_never_fails() {
        let cfg = ExperimentConfig { distribution: DistributionSpec::Constant { value: 3.0 }, ..config(EstimatorKind::ScaledMedian, 20) };
        let sim = run_simulation(&cfg).unwrap();
        assert_eq!(sim.report.failures, 0);
        assert!(sim.trials.iter().all(|t| t.rel_error.abs() <= 0.1));
    }

    #[test]
    fn zero_trials_rejected() {
        assert!(run_simulation(&config(EstimatorKind::ScaledMedian, 0)).is_err());
    }
}
