//! Closed-form sample sizes and failure bounds.
//!
//! Three plans are available:
//!
//! * [`mean_plan`]: a single sample average sized by Chebyshev's inequality,
//!   `k = ⌈c²/(ε²δ)⌉`.
//! * [`mom_plan`]: classic median of means. Groups of `⌈8(c/ε)²⌉` draws, each group mean
//!   lands within `εμ` with probability 7/8, and `2⌈ln(δ⁻¹)/ln(16/7)⌉ + 1` groups are medianed.
//! * [`scaled_plan`]: groups of `⌈(c/ε)² f(ε)⌉` draws whose means are multiplied by an
//!   independent `Uniform[1−ε, 1+ε]` before taking the median of
//!   `2⌈ln(2δ⁻¹)/ln(4/3)⌉ + 1` of them.
//!
//! Leading order costs are `19.35 (c/ε)² ln(δ⁻¹)` and `6.96 (c/ε)² ln(δ⁻¹)` respectively.
//!
//! The group size uses `f(ε)` unsquared. A squared variant `⌈(c f(ε)/ε)²⌉` also circulates
//! but is inconsistent with the per-group tail requirement `sd(S) ≤ εμ/√f(ε)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::{guarded_ceil, Real};

/// Target relative error `ε ∈ (0, 1/3)` and failure probability `δ ∈ (0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Accuracy<T> {
    epsilon: T,
    delta: T,
}

impl<T: Real> Accuracy<T> {
    pub fn new(epsilon: T, delta: T) -> Result<Self> {
        if !(epsilon > T::zero() && epsilon < T::one() / T::lit(3.0)) {
            return Err(Error::domain("epsilon", epsilon, "(0, 1/3)"));
        }
        if !(delta > T::zero() && delta < T::one()) {
            return Err(Error::domain("delta", delta, "(0, 1)"));
        }
        Ok(Self { epsilon, delta })
    }

    pub fn epsilon(&self) -> T {
        self.epsilon
    }

    pub fn delta(&self) -> T {
        self.delta
    }
}

/// Known upper bound `c` on `sd(X)/E[X]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(transparent)]
pub struct RelativeSpread<T>(T);

impl<T: Real> RelativeSpread<T> {
    pub fn new(c: T) -> Result<Self> {
        if !(c > T::zero() && c.is_finite()) {
            return Err(Error::domain("c", c, "(0, inf)"));
        }
        Ok(Self(c))
    }

    pub fn get(&self) -> T {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorKind {
    #[serde(alias = "mean")]
    MeanOnly,
    #[serde(alias = "mom")]
    MedianOfMeans,
    #[serde(alias = "scaled")]
    ScaledMedian,
}

impl EstimatorKind {
    /// Short name used on the command line.
    pub fn short_name(&self) -> &'static str {
        match self {
            EstimatorKind::MeanOnly => "mean",
            EstimatorKind::MedianOfMeans => "mom",
            EstimatorKind::ScaledMedian => "scaled",
        }
    }
}

impl std::str::FromStr for EstimatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mean" | "mean_only" => Ok(EstimatorKind::MeanOnly),
            "mom" | "median_of_means" => Ok(EstimatorKind::MedianOfMeans),
            "scaled" | "scaled_median" => Ok(EstimatorKind::ScaledMedian),
            other => Err(Error::Parse(format!("unknown estimator kind '{other}' (expected mean, mom or scaled)"))),
        }
    }
}

/// How many draws an estimator consumes and how they are grouped.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SamplingPlan {
    group_size: u64,
    num_groups: u64,
    total: u64,
    kind: EstimatorKind,
    /// `(ε, δ)` the plan was derived from; `None` for hand-built plans.
    #[serde(skip)]
    accuracy: Option<(f64, f64)>,
}

impl SamplingPlan {
    /// Builds a plan from raw counts. `num_groups` must be odd.
    pub fn new(kind: EstimatorKind, group_size: u64, num_groups: u64) -> Result<Self> {
        if group_size == 0 {
            return Err(Error::domain("group_size", 0.0, "[1, inf)"));
        }
        if num_groups.is_multiple_of(2) {
            return Err(Error::domain("num_groups", num_groups as f64, "odd positive integers"));
        }
        let total = group_size.checked_mul(num_groups).ok_or(Error::Overflow("plan total"))?;
        if total > (1u64 << f64::MANTISSA_DIGITS) {
            return Err(Error::Overflow("plan total"));
        }
        Ok(Self { group_size, num_groups, total, kind, accuracy: None })
    }

    fn derived_from<T: Real>(mut self, acc: Accuracy<T>) -> Self {
        self.accuracy = acc.epsilon().to_f64().zip(acc.delta().to_f64());
        self
    }

    /// `(ε, δ)` this plan was computed for, if it came from one of the plan functions.
    pub fn accuracy(&self) -> Option<(f64, f64)> {
        self.accuracy
    }

    pub fn group_size(&self) -> u64 {
        self.group_size
    }

    pub fn num_groups(&self) -> u64 {
        self.num_groups
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn kind(&self) -> EstimatorKind {
        self.kind
    }

    /// `total·ε²/(c²·ln(δ⁻¹))`, the constant in front of `(c/ε)² ln(δ⁻¹)` realized by this plan.
    pub fn leading_constant<T: Real>(&self, c: RelativeSpread<T>, acc: Accuracy<T>) -> T {
        let eps = acc.epsilon();
        T::from_count(self.total) * eps * eps / (c.get() * c.get() * acc.delta().recip().ln())
    }
}

/// `f(ε) = (1−ε)⁻²(1+ε−ε²)⁻¹(1+ε)`.
pub fn nuisance_factor<T: Real>(epsilon: T) -> Result<T> {
    if !(epsilon > T::zero() && epsilon < T::one()) {
        return Err(Error::domain("epsilon", epsilon, "(0, 1)"));
    }
    let one = T::one();
    let om = one - epsilon;
    Ok((one + epsilon) / (om * om * (one + epsilon - epsilon * epsilon)))
}

/// Chebyshev bound `min(1, c²/(ε²k))` on `P(|S_k/μ − 1| ≥ ε)`.
pub fn chebyshev_failure<T: Real>(c: RelativeSpread<T>, epsilon: T, k: u64) -> Result<T> {
    if k == 0 {
        return Err(Error::domain("k", 0.0, "[1, inf)"));
    }
    if !(epsilon > T::zero()) {
        return Err(Error::domain("epsilon", epsilon, "(0, inf)"));
    }
    let ratio = c.get() / epsilon;
    Ok((ratio * ratio / T::from_count(k)).min(T::one()))
}

/// Which hypothesis the median tail bound is stated under.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TailForm {
    /// `P(R ≤ a) ≤ p` and `P(R ≥ b) ≤ p`; prefactor 4.
    TwoSided,
    /// `P(R ∈ [a, b]) ≥ 1 − p`; prefactor 2.
    OneSided,
}

/// Bound on `P(median{R₁,…,R_{2k+1}} ∉ [a, b])`:
/// `A·(π(k+1))^{-1/2}·[4p(1−p)]^k`, with `A = 4` or `2` per [`TailForm`], clamped to `[0, 1]`.
///
/// The one-sided form is not a valid upper bound for `p` close to 1/2: the exact tail
/// exceeds it at `p = 0.45` for `k ≥ 9`. For the tail masses the plans use
/// (1/8 and 1/4) it holds.
pub fn median_tail_bound<T: Real>(p: T, k: u64, form: TailForm) -> Result<T> {
    if !(p > T::zero() && p < T::lit(0.5)) {
        return Err(Error::domain("p", p, "(0, 1/2)"));
    }
    let prefactor = match form {
        TailForm::TwoSided => T::lit(4.0),
        TailForm::OneSided => T::lit(2.0),
    };
    let kk = T::from_count(k);
    let base = T::lit(4.0) * p * (T::one() - p);
    let bound = prefactor / (T::PI() * (kk + T::one())).sqrt() * base.powf(kk);
    Ok(bound.max(T::zero()).min(T::one()))
}

fn checked_plan<T: Real>(
    kind: EstimatorKind,
    acc: Accuracy<T>,
    group_size: Option<u64>,
    num_groups: Option<u64>,
) -> Result<SamplingPlan> {
    let group_size = group_size.ok_or(Error::Overflow("group size"))?;
    let num_groups = num_groups.ok_or(Error::Overflow("group count"))?;
    Ok(SamplingPlan::new(kind, group_size.max(1), num_groups)?.derived_from(acc))
}

/// Single sample average with `k = ⌈c²/(ε²δ)⌉`, so that the Chebyshev failure bound is at most δ.
pub fn mean_plan<T: Real>(c: RelativeSpread<T>, acc: Accuracy<T>) -> Result<SamplingPlan> {
    let ratio = c.get() / acc.epsilon();
    let k = guarded_ceil(ratio * ratio / acc.delta());
    checked_plan(EstimatorKind::MeanOnly, acc, k, Some(1))
}

/// Median of `2⌈ln(δ⁻¹)/ln(16/7)⌉ + 1` means of `⌈8(c/ε)²⌉` draws each.
pub fn mom_plan<T: Real>(c: RelativeSpread<T>, acc: Accuracy<T>) -> Result<SamplingPlan> {
    let ratio = c.get() / acc.epsilon();
    let group_size = guarded_ceil(T::lit(8.0) * ratio * ratio);
    let half = guarded_ceil(acc.delta().recip().ln() / (T::lit(16.0) / T::lit(7.0)).ln());
    let num_groups = half.and_then(|h| h.checked_mul(2)).and_then(|h| h.checked_add(1));
    checked_plan(EstimatorKind::MedianOfMeans, acc, group_size, num_groups)
}

/// Median of `2⌈ln(2δ⁻¹)/ln(4/3)⌉ + 1` uniformly scaled means of `⌈(c/ε)² f(ε)⌉` draws each.
pub fn scaled_plan<T: Real>(c: RelativeSpread<T>, acc: Accuracy<T>) -> Result<SamplingPlan> {
    let ratio = c.get() / acc.epsilon();
    let f = nuisance_factor(acc.epsilon())?;
    let group_size = guarded_ceil(ratio * ratio * f);
    let half = guarded_ceil((T::lit(2.0) / acc.delta()).ln() / (T::lit(4.0) / T::lit(3.0)).ln());
    let num_groups = half.and_then(|h| h.checked_mul(2)).and_then(|h| h.checked_add(1));
    checked_plan(EstimatorKind::ScaledMedian, acc, group_size, num_groups)
}

pub fn plan_for<T: Real>(kind: EstimatorKind, c: RelativeSpread<T>, acc: Accuracy<T>) -> Result<SamplingPlan> {
    match kind {
        EstimatorKind::MeanOnly => mean_plan(c, acc),
        EstimatorKind::MedianOfMeans => mom_plan(c, acc),
        EstimatorKind::ScaledMedian => scaled_plan(c, acc),
    }
}

/// `8·2/ln(16/7)`: leading constant of the median-of-means plan.
pub fn mom_leading_constant<T: Real>() -> T {
    T::lit(16.0) / (T::lit(16.0) / T::lit(7.0)).ln()
}

/// `2/ln(4/3)`: leading constant of the scaled plan.
pub fn scaled_leading_constant<T: Real>() -> T {
    T::lit(2.0) / (T::lit(4.0) / T::lit(3.0)).ln()
}
