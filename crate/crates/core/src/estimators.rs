//! Estimation kernels: sample mean, median of means, and the uniformly scaled median of means.
//!
//! Stream layout under a seed: group `i` draws `X` from stream `i`. The scaler of group `i`
//! comes from stream `num_groups + i`. Group means use compensated summation. Results are
//! therefore bit-reproducible and independent of how groups are scheduled.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::num::{CompensatedSum, Real};
use crate::plan::{plan_for, Accuracy, EstimatorKind, RelativeSpread, SamplingPlan};
use crate::rng::RngStream;
use crate::source::SampleSource;

/// Output of one estimator run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate<T> {
    pub value: T,
    pub plan: SamplingPlan,
    pub draws_consumed: u64,
}

/// Everything needed to run an estimator end to end.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimatorConfig<T> {
    pub kind: EstimatorKind,
    pub accuracy: Accuracy<T>,
    pub c: RelativeSpread<T>,
    pub seed: u64,
}

impl<T: Real> EstimatorConfig<T> {
    pub fn plan(&self) -> Result<SamplingPlan> {
        plan_for(self.kind, self.c, self.accuracy)
    }
}

/// Multiplier applied to each group mean before the median is taken.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Scaler<T> {
    /// `Uniform[1−ε, 1+ε]`, sampled as `(1−ε) + 2ε·U` with `U ∈ [0, 1)`.
    Uniform { epsilon: T },
    /// Always 1; reduces the scaled kernel to plain median of means.
    Unit,
}

impl<T: Real> Scaler<T> {
    fn sample(&self, rng: &mut RngStream) -> T {
        match *self {
            Scaler::Uniform { epsilon } => (T::one() - epsilon) + (epsilon + epsilon) * rng.unit::<T>(),
            Scaler::Unit => T::one(),
        }
    }
}

/// Intermediate values of the scaled kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaledTrace<T> {
    pub group_means: Vec<T>,
    pub scalers: Vec<T>,
    pub products: Vec<T>,
    pub median: T,
}

fn checked_draw<T: Real, S: SampleSource<T> + ?Sized>(src: &S, rng: &mut RngStream) -> Result<T> {
    let x = src.draw(rng);
    if x.is_finite() {
        Ok(x)
    } else {
        Err(Error::NonFiniteDraw { source_name: src.descriptor(), value: x.to_f64().unwrap_or(f64::NAN) })
    }
}

/// `S_k = (X₁ + … + X_k)/k` over `k` fresh draws from `rng`.
pub fn sample_mean<T: Real, S: SampleSource<T> + ?Sized>(src: &S, k: u64, rng: &mut RngStream) -> Result<T> {
    if k == 0 {
        return Err(Error::domain("k", 0.0, "[1, inf)"));
    }
    let mut acc = CompensatedSum::new();
    for _ in 0..k {
        acc.add(checked_draw(src, rng)?);
    }
    Ok(acc.total() / T::from_count(k))
}

/// The `((n+1)/2)`-th order statistic of an odd-length, finite slice.
pub fn median<T: Real>(values: &[T]) -> Result<T> {
    if values.is_empty() || values.len().is_multiple_of(2) {
        return Err(Error::MedianLength(values.len()));
    }
    if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
        return Err(Error::domain("median input", *bad, "finite reals"));
    }
    let mut work = values.to_vec();
    let mid = work.len() / 2;
    let (_, m, _) = work.select_nth_unstable_by(mid, |a, b| a.partial_cmp(b).expect("finite"));
    Ok(*m)
}

/// Means of `num_groups` groups of `group_size` draws, group `i` on stream `(seed, i)`.
pub fn group_means<T: Real, S: SampleSource<T> + ?Sized>(
    src: &S,
    group_size: u64,
    num_groups: u64,
    seed: u64,
) -> Result<Vec<T>> {
    (0..num_groups)
        .map(|i| sample_mean(src, group_size, &mut RngStream::new(seed, i)))
        .collect()
}

/// Runs the scaled kernel and keeps every intermediate value.
pub fn scaled_median_trace<T: Real, S: SampleSource<T> + ?Sized>(
    src: &S,
    group_size: u64,
    num_groups: u64,
    scaler: Scaler<T>,
    seed: u64,
) -> Result<ScaledTrace<T>> {
    let group_means = group_means(src, group_size, num_groups, seed)?;
    let scalers: Vec<T> = (0..num_groups)
        .map(|i| scaler.sample(&mut RngStream::new(seed, num_groups + i)))
        .collect();
    let products: Vec<T> = group_means.iter().zip(&scalers).map(|(&s, &r)| s * r).collect();
    let median = median(&products)?;
    Ok(ScaledTrace { group_means, scalers, products, median })
}

fn require_kind(plan: &SamplingPlan, kind: EstimatorKind) -> Result<()> {
    if plan.kind() == kind {
        Ok(())
    } else {
        Err(Error::PlanMismatch(format!("expected a {:?} plan, got {:?}", kind, plan.kind())))
    }
}

/// Single sample mean over all `plan.total()` draws (stream 0).
pub fn mean_estimate<T: Real, S: SampleSource<T> + ?Sized>(src: &S, plan: SamplingPlan, seed: u64) -> Result<Estimate<T>> {
    require_kind(&plan, EstimatorKind::MeanOnly)?;
    let value = sample_mean(src, plan.total(), &mut RngStream::new(seed, 0))?;
    Ok(Estimate { value, plan, draws_consumed: plan.total() })
}

/// Median of `num_groups` independent group means.
pub fn mom_estimate<T: Real, S: SampleSource<T> + ?Sized>(src: &S, plan: SamplingPlan, seed: u64) -> Result<Estimate<T>> {
    require_kind(&plan, EstimatorKind::MedianOfMeans)?;
    let means = group_means(src, plan.group_size(), plan.num_groups(), seed)?;
    let value = median(&means)?;
    Ok(Estimate { value, plan, draws_consumed: plan.total() })
}

/// Median of `Sᵢ·Rᵢ` with `Rᵢ ~ Uniform[1−ε, 1+ε]` independent of the group means `Sᵢ`.
pub fn scaled_median_estimate<T: Real, S: SampleSource<T> + ?Sized>(
    src: &S,
    plan: SamplingPlan,
    acc: Accuracy<T>,
    seed: u64,
) -> Result<Estimate<T>> {
    require_kind(&plan, EstimatorKind::ScaledMedian)?;
    if let Some((eps, _)) = plan.accuracy() {
        if Some(eps) != acc.epsilon().to_f64() {
            return Err(Error::PlanMismatch(format!(
                "plan built for epsilon {eps}, scaler uses {}",
                acc.epsilon()
            )));
        }
    }
    let trace = scaled_median_trace(
        src,
        plan.group_size(),
        plan.num_groups(),
        Scaler::Uniform { epsilon: acc.epsilon() },
        seed,
    )?;
    Ok(Estimate { value: trace.median, plan, draws_consumed: plan.total() })
}

/// Builds the plan for `config` and runs the matching kernel.
pub fn estimate<T: Real, S: SampleSource<T> + ?Sized>(config: &EstimatorConfig<T>, src: &S) -> Result<Estimate<T>> {
    let plan = config.plan()?;
    match config.kind {
        EstimatorKind::MeanOnly => mean_estimate(src, plan, config.seed),
        EstimatorKind::MedianOfMeans => mom_estimate(src, plan, config.seed),
        EstimatorKind::ScaledMedian => scaled_median_estimate(src, plan, config.accuracy, config.seed),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plan::{chebyshev_failure, mom_plan, scaled_plan};
    use crate::source::{Counting, FnSource, Scaled};
    use proptest::prelude::*;

    fn constant(v: f64) -> FnSource<impl Fn(&mut RngStream) -> f64 + Send + Sync> {
        FnSource::new("constant", move |_: &mut RngStream| v)
    }

    fn exponential() -> FnSource<impl Fn(&mut RngStream) -> f64 + Send + Sync> {
        FnSource::new("exponential:1", |r: &mut RngStream| -r.unit_open_left::<f64>().ln())
    }

    fn config(kind: EstimatorKind, eps: f64, delta: f64, seed: u64) -> EstimatorConfig<f64> {
        EstimatorConfig {
            kind,
            accuracy: Accuracy::new(eps, delta).unwrap(),
            c: RelativeSpread::new(1.0).unwrap(),
            seed,
        }
    }

    #[test]
    fn sample_mean_basics() {
        let mut rng = RngStream::new(1, 0);
        assert_eq!(sample_mean(&constant(5.0), 10, &mut rng).unwrap(), 5.0);
        assert!(sample_mean(&constant(5.0), 0, &mut rng).is_err());

        let src = exponential();
        let mut a = RngStream::new(9, 0);
        let mut b = RngStream::new(9, 0);
        assert_eq!(sample_mean(&src, 1, &mut a).unwrap(), src.draw(&mut b));
    }

    #[test]
    fn sample_mean_two_point_converges() {
        let src = FnSource::new("two-point", |r: &mut RngStream| if r.unit::<f64>() < 0.5 { 0.0 } else { 2.0 });
        let m: f64 = sample_mean(&src, 1_000_000, &mut RngStream::new(2024, 0)).unwrap();
        // sd of the mean is 1e-3, so 0.01 is 10 sigma.
        assert!((m - 1.0).abs() < 0.01, "{m}");
    }

    #[test]
    fn non_finite_draw_is_a_data_error() {
        let src = FnSource::new("nan", |_: &mut RngStream| f64::NAN);
        let err = sample_mean(&src, 3, &mut RngStream::new(0, 0)).unwrap_err();
        assert!(matches!(err, Error::NonFiniteDraw { .. }));
    }

    #[test]
    fn median_cases() {
        assert_eq!(median(&[3.0]).unwrap(), 3.0);
        assert_eq!(median(&[5.0, 1.0, 9.0]).unwrap(), 5.0);
        assert_eq!(median(&[1.0, 1.0, 2.0, 2.0, 2.0]).unwrap(), 2.0);
        assert_eq!(median::<f64>(&[]).unwrap_err(), Error::MedianLength(0));
        assert_eq!(median(&[1.0, 2.0]).unwrap_err(), Error::MedianLength(2));
        assert!(median(&[1.0, f64::NAN, 2.0]).is_err());
    }

    #[test]
    fn constant_source_is_exact() {
        let src = constant(3.5);
        let est = estimate(&config(EstimatorKind::MedianOfMeans, 0.1, 0.05, 7), &src).unwrap();
        assert_eq!(est.value, 3.5);
        for seed in 0..200 {
            let est = estimate(&config(EstimatorKind::ScaledMedian, 0.1, 0.05, seed), &src).unwrap();
            assert!(est.value >= 0.9 * 3.5 && est.value <= 1.1 * 3.5);
            assert!((est.value / 3.5 - 1.0).abs() <= 0.1 + 1e-15);
        }
    }

    #[test]
    fn draws_consumed_matches_plan() {
        let cases = [
            (EstimatorKind::ScaledMedian, 3375u64),
            (EstimatorKind::MedianOfMeans, 7200),
            (EstimatorKind::MeanOnly, 2000),
        ];
        for (kind, expected) in cases {
            let src = Counting::new(exponential());
            let est = estimate(&config(kind, 0.1, 0.05, 11), &src).unwrap();
            assert_eq!(est.draws_consumed, expected);
            assert_eq!(src.count(), expected);
            assert_eq!(est.plan.total(), expected);
        }
    }

    #[test]
    fn mean_only_plan_meets_chebyshev() {
        let cfg = config(EstimatorKind::MeanOnly, 0.1, 0.05, 1);
        let plan = cfg.plan().unwrap();
        assert_eq!(plan.total(), 2000);
        assert!(chebyshev_failure(cfg.c, 0.1, plan.total()).unwrap() <= 0.05 + 1e-15);
    }

    #[test]
    fn unit_scaler_reduces_to_mom() {
        let src = exponential();
        let plan = mom_plan(RelativeSpread::new(1.0).unwrap(), Accuracy::new(0.1, 0.05).unwrap()).unwrap();
        let mom = mom_estimate(&src, plan, 99).unwrap();
        let trace = scaled_median_trace(&src, plan.group_size(), plan.num_groups(), Scaler::Unit, 99).unwrap();
        assert_eq!(trace.median, mom.value);
    }

    #[test]
    fn group_order_does_not_matter() {
        let src = exponential();
        let plan = mom_plan(RelativeSpread::new(1.0).unwrap(), Accuracy::new(0.1, 0.05).unwrap()).unwrap();
        let mut means = group_means(&src, plan.group_size(), plan.num_groups(), 5).unwrap();
        let value = mom_estimate(&src, plan, 5).unwrap().value;
        means.reverse();
        means.rotate_left(3);
        assert_eq!(median(&means).unwrap(), value);
    }

    #[test]
    fn kernels_reject_foreign_plans() {
        let src = constant(1.0);
        let c = RelativeSpread::new(1.0).unwrap();
        let acc = Accuracy::new(0.1, 0.05).unwrap();
        let mom = mom_plan(c, acc).unwrap();
        let scaled = scaled_plan(c, acc).unwrap();
        assert!(matches!(scaled_median_estimate(&src, mom, acc, 0), Err(Error::PlanMismatch(_))));
        assert!(matches!(mom_estimate(&src, scaled, 0), Err(Error::PlanMismatch(_))));
        let other = Accuracy::new(0.2, 0.05).unwrap();
        assert!(matches!(scaled_median_estimate(&src, scaled, other, 0), Err(Error::PlanMismatch(_))));
    }

    #[test]
    fn epsilon_changes_only_scalers() {
        let src = exponential();
        let a = scaled_median_trace(&src, 50, 11, Scaler::Uniform { epsilon: 0.1 }, 3).unwrap();
        let b = scaled_median_trace(&src, 50, 11, Scaler::Uniform { epsilon: 0.2 }, 3).unwrap();
        assert_eq!(a.group_means, b.group_means);
        assert_ne!(a.scalers, b.scalers);
        for (ra, rb) in a.scalers.iter().zip(&b.scalers) {
            // Same underlying uniform: (r − 1)/ε agrees.
            assert!(((ra - 1.0) / 0.1 - (rb - 1.0) / 0.2).abs() < 1e-12);
        }
    }

    #[test]
    fn determinism() {
        let src = exponential();
        for kind in [EstimatorKind::MeanOnly, EstimatorKind::MedianOfMeans, EstimatorKind::ScaledMedian] {
            let a = estimate(&config(kind, 0.1, 0.05, 1234), &src).unwrap();
            let b = estimate(&config(kind, 0.1, 0.05, 1234), &src).unwrap();
            assert_eq!(a.value.to_bits(), b.value.to_bits());
            let c = estimate(&config(kind, 0.1, 0.05, 1235), &src).unwrap();
            assert_ne!(a.value, c.value);
        }
    }

    #[test]
    fn mom_and_scaled_meet_guarantee_on_exponential() {
        // 2000 seeded trials at (c=1, ε=0.1, δ=0.05); the observed failure fraction must stay ≤ δ.
        for kind in [EstimatorKind::MedianOfMeans, EstimatorKind::ScaledMedian] {
            let src = exponential();
            let failures = (0..2000u64)
                .filter(|&t| {
                    let est = estimate(&config(kind, 0.1, 0.05, crate::rng::trial_seed(77, t)), &src).unwrap();
                    (est.value - 1.0).abs() > 0.1
                })
                .count();
            assert!(failures as f64 / 2000.0 <= 0.05, "{kind:?}: {failures}");
        }
    }

    #[test]
    fn works_in_single_precision() {
        let src = FnSource::new("exp32", |r: &mut RngStream| -r.unit_open_left::<f32>().ln());
        let cfg = EstimatorConfig {
            kind: EstimatorKind::ScaledMedian,
            accuracy: Accuracy::new(0.1f32, 0.05).unwrap(),
            c: RelativeSpread::new(1.0f32).unwrap(),
            seed: 5,
        };
        let est = estimate(&cfg, &src).unwrap();
        assert_eq!(est.draws_consumed, 3375);
        assert!((est.value - 1.0).abs() < 0.1);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn median_is_permutation_invariant(mut xs in prop::collection::vec(-1e6f64..1e6, 1..40), seed in any::<u64>()) {
            if xs.len() % 2 == 0 { xs.pop(); }
            let m = median(&xs).unwrap();
            let mut shuffled = xs.clone();
            let mut rng = RngStream::new(seed, 0);
            for i in (1..shuffled.len()).rev() {
                let j = (rng.next_u64() % (i as u64 + 1)) as usize;
                shuffled.swap(i, j);
            }
            prop_assert_eq!(median(&shuffled).unwrap(), m);
            let below = xs.iter().filter(|&&x| x < m).count();
            let above = xs.iter().filter(|&&x| x > m).count();
            prop_assert!(below <= xs.len() / 2 && above <= xs.len() / 2);
        }

        #[test]
        fn estimators_are_scale_equivariant(seed in any::<u64>(), power in -8i32..8, lambda in 0.01f64..100.0) {
            let base = exponential();
            for kind in [EstimatorKind::MeanOnly, EstimatorKind::MedianOfMeans, EstimatorKind::ScaledMedian] {
                let cfg = config(kind, 0.3, 0.3, seed);
                let x = estimate(&cfg, &base).unwrap().value;
                // Powers of two scale every intermediate exactly.
                let exact = 2f64.powi(power);
                let y = estimate(&cfg, &Scaled::new(&base, exact)).unwrap().value;
                prop_assert_eq!(y, exact * x);
                let z = estimate(&cfg, &Scaled::new(&base, lambda)).unwrap().value;
                prop_assert!((z - lambda * x).abs() <= 1e-12 * (lambda * x).abs());
            }
        }

        #[test]
        fn scaled_estimate_is_contained(seed in any::<u64>(), eps in 0.01f64..0.33) {
            let trace = scaled_median_trace(&exponential(), 7, 9, Scaler::Uniform { epsilon: eps }, seed).unwrap();
            let lo = trace.group_means.iter().cloned().fold(f64::INFINITY, f64::min) * (1.0 - eps);
            let hi = trace.group_means.iter().cloned().fold(f64::NEG_INFINITY, f64::max) * (1.0 + eps);
            prop_assert!(trace.median >= lo && trace.median <= hi);
            for r in &trace.scalers {
                prop_assert!(*r >= 1.0 - eps && *r < 1.0 + eps);
            }
        }
    }
}
