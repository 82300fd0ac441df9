//! Numerical certification of the tail bounds behind the scaled estimator.
//!
//! Normalize a group mean to `Y = S/μ`, so `E[Y] = 1` and `sd(Y) ≤ α`, and let
//! `R ~ Uniform[1−ε, 1+ε]` be independent of `Y`. The scaled estimator needs both
//! `q₊ = P(YR ≥ 1+ε)` and `q₋ = P(YR ≤ 1−ε)` to be at most 1/4.
//!
//! The worst case over all such `Y` is attained by two-point variables with `sd(Y) = α`.
//! Writing the support as `{1+k₁, 1+k₂}` with `k₁ ≤ 0 < k₂`, the moment constraints
//! `p₁k₁ + p₂k₂ = 0` and `p₁k₁² + p₂k₂² = α²` leave one free parameter. Then
//! `1 − q₊ = h(k₂)` and `1 − q₋ = h₂(k₁)`, and the bounds reduce to
//! `min h ≥ 3/4` and `min h₂ ≥ 3/4`.
//!
//! Two independent routes evaluate the extremal tail:
//!
//! * [`certify_h_min`] minimizes the closed forms [`h_upper`] / [`h_lower`] by grid
//!   search plus golden-section refinement;
//! * [`two_point_worst_tail`] builds every two-point law on a grid with
//!   [`TwoPointSpec`] and integrates its tails exactly with [`exact_scaled_tails`].
//!
//! The upper side holds for `α² ≤ ε²/f(ε)` ([`alpha_plus`]). That threshold comes from
//! `f₁(k₂) = k₂²(k₂+1)ε/(k₂(ε+2) − ε)` evaluated around its minimizer [`k2_star`].
//! The lower side holds for the larger [`alpha_minus`], so `alpha_plus` certifies both.

use crate::error::{Error, Result};
use crate::num::Real;
use crate::plan::nuisance_factor;
use crate::search::minimize;
use crate::special::regularized_incomplete_beta;

/// Which tail of `YR` is being bounded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    /// `P(YR ≥ 1+ε)`, governed by `h(k₂)`.
    Upper,
    /// `P(YR ≤ 1−ε)`, governed by `h₂(k₁)`.
    Lower,
}

/// Two-point law of `Y`: `1 + k1` with probability `p1`, `1 + k2` otherwise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoPointSpec<T> {
    p1: T,
    /// `1 − p1`, kept separately so that masses near 0 or 1 keep full precision.
    p2: T,
    k1: T,
    k2: T,
}

impl<T: Real> TwoPointSpec<T> {
    pub fn new(p1: T, k1: T, k2: T) -> Result<Self> {
        if !(p1 >= T::zero() && p1 <= T::one()) {
            return Err(Error::domain("p1", p1, "[0, 1]"));
        }
        if !(k1 <= T::zero()) {
            return Err(Error::domain("k1", k1, "(-inf, 0]"));
        }
        if !(k2 > T::zero() && k2.is_finite()) {
            return Err(Error::domain("k2", k2, "(0, inf)"));
        }
        Ok(Self { p1, p2: T::one() - p1, k1, k2 })
    }

    fn with_masses(self, p1: T, p2: T) -> Self {
        Self { p1, p2, ..self }
    }

    /// Mean 1, standard deviation `alpha`, upper offset `k2`:
    /// `k1 = −α²/k2`, `p1 = k2²/(k2² + α²)`.
    pub fn with_upper(k2: T, alpha: T) -> Result<Self> {
        if !(alpha > T::zero()) {
            return Err(Error::domain("alpha", alpha, "(0, inf)"));
        }
        if !(k2 > T::zero()) {
            return Err(Error::domain("k2", k2, "(0, inf)"));
        }
        let a2 = alpha * alpha;
        let denom = k2 * k2 + a2;
        Ok(Self::new(k2 * k2 / denom, -a2 / k2, k2)?.with_masses(k2 * k2 / denom, a2 / denom))
    }

    /// Mean 1, standard deviation `alpha`, lower offset `k1 < 0`:
    /// `k2 = −α²/k1`, `p1 = α²/(k1² + α²)`.
    pub fn with_lower(k1: T, alpha: T) -> Result<Self> {
        if !(alpha > T::zero()) {
            return Err(Error::domain("alpha", alpha, "(0, inf)"));
        }
        if !(k1 < T::zero()) {
            return Err(Error::domain("k1", k1, "(-inf, 0)"));
        }
        let a2 = alpha * alpha;
        let denom = k1 * k1 + a2;
        Ok(Self::new(a2 / denom, k1, -a2 / k1)?.with_masses(a2 / denom, k1 * k1 / denom))
    }

    pub fn p1(&self) -> T {
        self.p1
    }

    pub fn p2(&self) -> T {
        self.p2
    }

    pub fn k1(&self) -> T {
        self.k1
    }

    pub fn k2(&self) -> T {
        self.k2
    }

    /// `E[Y] − 1 = p1·k1 + p2·k2`.
    pub fn mean_offset(&self) -> T {
        self.p1 * self.k1 + self.p2 * self.k2
    }

    /// `E[(Y−1)²] = p1·k1² + p2·k2²`.
    pub fn second_moment(&self) -> T {
        self.p1 * self.k1 * self.k1 + self.p2 * self.k2 * self.k2
    }

    fn atoms(&self) -> [(T, T); 2] {
        [(T::one() + self.k1, self.p1), (T::one() + self.k2, self.p2)]
    }
}

/// Standard-deviation bound `alpha` on the normalized group mean, together with the `ε`
/// it is used with.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaBound<T> {
    pub alpha: T,
    pub epsilon: T,
}

impl<T: Real> AlphaBound<T> {
    pub fn new(alpha: T, epsilon: T) -> Result<Self> {
        if !(alpha > T::zero() && alpha.is_finite()) {
            return Err(Error::domain("alpha", alpha, "(0, inf)"));
        }
        Ok(Self { alpha, epsilon })
    }

    /// `α = ε/√f(ε)`, the group-mean spread the scaled plan guarantees.
    pub fn plus(epsilon: T) -> Result<Self> {
        Self::new(alpha_plus(epsilon)?, epsilon)
    }

    pub fn minus(epsilon: T) -> Result<Self> {
        Self::new(alpha_minus(epsilon)?, epsilon)
    }

    pub fn inflated(self, factor: T) -> Result<Self> {
        Self::new(self.alpha * factor, self.epsilon)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledTails<T> {
    pub q_plus: T,
    pub q_minus: T,
}

fn check_epsilon<T: Real>(epsilon: T) -> Result<()> {
    if epsilon > T::zero() && epsilon < T::one() {
        Ok(())
    } else {
        Err(Error::domain("epsilon", epsilon, "(0, 1)"))
    }
}

fn clamp_unit<T: Real>(x: T) -> T {
    x.max(T::zero()).min(T::one())
}

/// Exact `q₊ = P(YR ≥ 1+ε)` and `q₋ = P(YR ≤ 1−ε)` for two-point `Y` and
/// `R ~ Uniform[1−ε, 1+ε]`.
///
/// With `R = 1 + εV`, `V ~ Uniform[−1, 1]`, an atom `v > 0` contributes
/// `P(V ≥ ((1+ε)/v − 1)/ε)` to `q₊` and `P(V ≤ ((1−ε)/v − 1)/ε)` to `q₋`.
/// Atoms with positive mass must be positive.
pub fn exact_scaled_tails<T: Real>(spec: &TwoPointSpec<T>, epsilon: T) -> Result<ScaledTails<T>> {
    check_epsilon(epsilon)?;
    let one = T::one();
    let half = T::lit(0.5);
    let mut q_plus = T::zero();
    let mut q_minus = T::zero();
    for (value, mass) in spec.atoms() {
        if mass == T::zero() {
            continue;
        }
        if !(value > T::zero()) {
            return Err(Error::domain("two-point support value", value, "(0, inf)"));
        }
        let u_plus = ((one + epsilon) / value - one) / epsilon;
        let u_minus = ((one - epsilon) / value - one) / epsilon;
        q_plus = q_plus + mass * clamp_unit((one - u_plus) * half);
        q_minus = q_minus + mass * clamp_unit((one + u_minus) * half);
    }
    Ok(ScaledTails { q_plus: clamp_unit(q_plus), q_minus: clamp_unit(q_minus) })
}

/// Right end `2ε/(1−ε)` of the region where the upper atom can still be scaled below `1+ε`.
pub fn upper_edge<T: Real>(epsilon: T) -> T {
    T::lit(2.0) * epsilon / (T::one() - epsilon)
}

/// Left end `−2ε/(1+ε)` of the region where the lower atom can still be scaled above `1−ε`.
pub fn lower_edge<T: Real>(epsilon: T) -> T {
    T::lit(-2.0) * epsilon / (T::one() + epsilon)
}

/// `h(k₂) = k₂²/(k₂²+α²) + α²/(k₂²+α²)·1{k₂ ≤ 2ε/(1−ε)}·((1+ε)/(1+k₂) − (1−ε))/(2ε)`,
/// which equals `P(YR ≤ 1+ε)` for the sd-`α` two-point law with upper offset `k₂`.
pub fn h_upper<T: Real>(k2: T, epsilon: T, alpha: T) -> Result<T> {
    check_epsilon(epsilon)?;
    if !(k2 > T::zero()) {
        return Err(Error::domain("k2", k2, "(0, inf)"));
    }
    if !(alpha > T::zero()) {
        return Err(Error::domain("alpha", alpha, "(0, inf)"));
    }
    let one = T::one();
    let a2 = alpha * alpha;
    let denom = k2 * k2 + a2;
    let bracket = if k2 <= upper_edge(epsilon) {
        ((one + epsilon) / (one + k2) - (one - epsilon)) / (epsilon + epsilon)
    } else {
        T::zero()
    };
    Ok(k2 * k2 / denom + a2 / denom * bracket)
}

/// `h₂(k₁) = k₁²/(k₁²+α²) + α²/(k₁²+α²)·1{k₁ ≥ −2ε/(1+ε)}·(1+ε − (1−ε)/(1+k₁))/(2ε)`,
/// which equals `P(YR ≥ 1−ε)` for the sd-`α` two-point law with lower offset `k₁`.
///
/// The indicator edge is `−2ε/(1+ε)`, where the bracket vanishes. Using `−2ε/(1−ε)`
/// instead would let the bracket go negative between the two points.
pub fn h_lower<T: Real>(k1: T, epsilon: T, alpha: T) -> Result<T> {
    check_epsilon(epsilon)?;
    if !(k1 <= T::zero() && k1 > -T::one()) {
        return Err(Error::domain("k1", k1, "(-1, 0]"));
    }
    if !(alpha > T::zero()) {
        return Err(Error::domain("alpha", alpha, "(0, inf)"));
    }
    let one = T::one();
    let a2 = alpha * alpha;
    let denom = k1 * k1 + a2;
    let bracket = if k1 >= lower_edge(epsilon) {
        (one + epsilon - (one - epsilon) / (one + k1)) / (epsilon + epsilon)
    } else {
        T::zero()
    };
    Ok(k1 * k1 / denom + a2 / denom * bracket)
}

fn f1_denominator<T: Real>(k2: T, epsilon: T) -> Result<T> {
    let denom = k2 * (epsilon + T::lit(2.0)) - epsilon;
    let scale = (k2 * (epsilon + T::lit(2.0))).abs() + epsilon.abs();
    if denom.abs() <= T::lit(8.0) * T::epsilon() * scale {
        return Err(Error::Pole { name: "f1", at: (epsilon / (epsilon + T::lit(2.0))).to_f64().unwrap_or(f64::NAN) });
    }
    Ok(denom)
}

/// `f₁(k₂) = k₂²(k₂+1)ε / (k₂(ε+2) − ε)`. On the active region, `h(k₂) ≥ 3/4` exactly when
/// `α² ≤ f₁(k₂)`.
pub fn f1<T: Real>(k2: T, epsilon: T) -> Result<T> {
    let denom = f1_denominator(k2, epsilon)?;
    Ok(k2 * k2 * (k2 + T::one()) * epsilon / denom)
}

/// `df₁/dk₂ = 2k₂ε(k₂²(ε+2) + k₂(1−ε) − ε) / (k₂(ε+2) − ε)²`.
pub fn f1_derivative<T: Real>(k2: T, epsilon: T) -> Result<T> {
    let denom = f1_denominator(k2, epsilon)?;
    let quadratic = k2 * k2 * (epsilon + T::lit(2.0)) + k2 * (T::one() - epsilon) - epsilon;
    Ok(T::lit(2.0) * k2 * epsilon * quadratic / (denom * denom))
}

/// Minimizer of `f₁`: `k₂* = (ε − 1 + √(5ε² + 6ε + 1)) / (2(ε + 2))`.
pub fn k2_star<T: Real>(epsilon: T) -> Result<T> {
    check_epsilon(epsilon)?;
    let disc = T::lit(5.0) * epsilon * epsilon + T::lit(6.0) * epsilon + T::one();
    Ok((epsilon - T::one() + disc.sqrt()) / (T::lit(2.0) * (epsilon + T::lit(2.0))))
}

/// `ε·√((1−ε)²(1+ε−ε²)/(1+ε))`, equal to `ε/√f(ε)`.
pub fn alpha_plus<T: Real>(epsilon: T) -> Result<T> {
    check_epsilon(epsilon)?;
    let one = T::one();
    let om = one - epsilon;
    Ok(epsilon * (om * om * (one + epsilon - epsilon * epsilon) / (one + epsilon)).sqrt())
}

/// `ε·√((1+ε)³(1−2ε)/(1−3ε+2ε²))`, the spread up to which the lower tail stays ≤ 1/4.
pub fn alpha_minus<T: Real>(epsilon: T) -> Result<T> {
    let one = T::one();
    let two = T::lit(2.0);
    let three = T::lit(3.0);
    let denom = one - three * epsilon + two * epsilon * epsilon;
    if epsilon == T::lit(0.5) || epsilon == one {
        return Err(Error::Pole { name: "alpha_minus", at: epsilon.to_f64().unwrap_or(f64::NAN) });
    }
    if !(epsilon > T::zero() && epsilon < T::lit(0.5)) {
        return Err(Error::domain("epsilon", epsilon, "(0, 1/2)"));
    }
    let onep = one + epsilon;
    Ok(epsilon * (onep * onep * onep * (one - two * epsilon) / denom).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HMin<T> {
    pub min_value: T,
    pub argmin: T,
}

pub const MIN_GRID_POINTS: usize = 1_000;

/// Minimum of `h` over `k₂ > 0` (upper side) or of `h₂` over `−1 < k₁ ≤ 0` (lower side).
///
/// Beyond `2ε/(1−ε)`, `h(k₂) = k₂²/(k₂²+α²)` is increasing, so only `(0, 2ε/(1−ε)]`
/// needs to be searched, and likewise `h₂` below its edge. The minimum is found with a
/// `grid_points` uniform grid, then refined by golden-section search to a `1e-10`
/// bracket. Comparing the result to 3/4 is left to the caller.
pub fn certify_h_min<T: Real>(epsilon: T, alpha: T, side: Side, grid_points: usize) -> Result<HMin<T>> {
    check_epsilon(epsilon)?;
    if !(alpha > T::zero()) {
        return Err(Error::domain("alpha", alpha, "(0, inf)"));
    }
    if grid_points < MIN_GRID_POINTS {
        return Err(Error::domain("grid_points", grid_points as f64, "[1000, inf)"));
    }
    let n = T::from_count(grid_points as u64);
    let (lo, hi) = match side {
        Side::Upper => {
            let edge = upper_edge(epsilon);
            (edge / n, edge)
        }
        Side::Lower => {
            let far = (-upper_edge(epsilon)).max(T::lit(-1.0) + T::lit(1e-9));
            (far, far / n)
        }
    };
    let tol = T::lit(1e-10).max(T::epsilon().sqrt() * (hi - lo));
    let (argmin, min_value) = match side {
        Side::Upper => {
            let h = |k: T| h_upper(k, epsilon, alpha).expect("k in domain");
            minimize(&h, lo, hi, grid_points, tol)
        }
        Side::Lower => {
            let h = |k: T| h_lower(k, epsilon, alpha).expect("k in domain");
            minimize(&h, lo, hi, grid_points, tol)
        }
    };
    Ok(HMin { min_value, argmin })
}

/// `P(M > 1 − p)` for `M` the median of `2k+1` iid uniforms, i.e. `M ~ Beta(k+1, k+1)`.
/// By symmetry this is `I_p(k+1, k+1) = P(Bin(2k+1, p) ≥ k+1)`.
pub fn beta_median_tail_exact<T: Real>(p: T, k: u64) -> Result<T> {
    if !(p > T::zero() && p < T::one()) {
        return Err(Error::domain("p", p, "(0, 1)"));
    }
    let shape = T::from_count(k + 1);
    regularized_incomplete_beta(p, shape, shape)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanResult<T> {
    /// Largest tail probability seen on the grid.
    pub worst: T,
    /// Free offset (`k₂` for the upper tail, `k₁` for the lower) where it occurred.
    pub at: T,
}

/// Worst tail of one side over the sd-`α` two-point family, by exact integration on a
/// uniform grid of `grid_points` offsets. Laws with a nonpositive atom are skipped.
pub fn two_point_scan_side<T: Real>(epsilon: T, alpha: T, grid_points: usize, side: Side) -> Result<ScanResult<T>> {
    check_epsilon(epsilon)?;
    if !(alpha > T::zero()) {
        return Err(Error::domain("alpha", alpha, "(0, inf)"));
    }
    if grid_points < 2 {
        return Err(Error::domain("grid_points", grid_points as f64, "[2, inf)"));
    }
    let a2 = alpha * alpha;
    let reach = T::lit(2.0) * upper_edge(epsilon);
    let n = T::from_count(grid_points as u64);
    let mut best = ScanResult { worst: T::zero(), at: T::zero() };
    for i in 1..=grid_points {
        let t = T::from_count(i as u64) / n;
        let tails_at = match side {
            Side::Upper => {
                // Lower atom 1 − α²/k₂ must stay positive.
                let hi = reach.max(T::lit(2.0) * a2);
                let k2 = hi * t;
                if k2 <= a2 {
                    continue;
                }
                TwoPointSpec::with_upper(k2, alpha)
                    .and_then(|s| exact_scaled_tails(&s, epsilon))
                    .map(|q| (q.q_plus, k2))
            }
            Side::Lower => {
                let far = reach.min(T::one());
                let k1 = -far * t;
                if k1 <= -T::one() {
                    continue;
                }
                TwoPointSpec::with_lower(k1, alpha)
                    .and_then(|s| exact_scaled_tails(&s, epsilon))
                    .map(|q| (q.q_minus, k1))
            }
        };
        let (q, at) = tails_at?;
        if q > best.worst {
            best = ScanResult { worst: q, at };
        }
    }
    Ok(best)
}

/// Worst of the two tails over the sd-`α` two-point family. This route is independent of
/// [`certify_h_min`]: `1 − certify_h_min(..).min_value` should match it per side.
pub fn two_point_worst_tail<T: Real>(epsilon: T, alpha: T, grid_points: usize) -> Result<T> {
    let upper = two_point_scan_side(epsilon, alpha, grid_points, Side::Upper)?;
    let lower = two_point_scan_side(epsilon, alpha, grid_points, Side::Lower)?;
    Ok(upper.worst.max(lower.worst))
}

/// `{0.01, 0.02, …, 0.33}`.
pub fn default_epsilon_grid<T: Real>() -> Vec<T> {
    (1..=33u64).map(|i| T::from_count(i) / T::lit(100.0)).collect()
}

/// `alpha_plus(ε)·√f(ε)`, which should be `ε`.
pub fn alpha_identity_residual<T: Real>(epsilon: T) -> Result<T> {
    Ok((alpha_plus(epsilon)? * nuisance_factor(epsilon)?.sqrt() - epsilon).abs())
}
