//! Test distributions with closed-form mean and relative spread.
//!
//! Every family is described by a [`DistributionSpec`] and parsed from `family:params`
//! strings such as `exponential:1` or `lognormal:1,5`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::lemmas::alpha_plus;
use crate::num::Real;
use crate::rng::RngStream;
use crate::source::SampleSource;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DistributionSpec<T> {
    /// Point mass at `value`.
    Constant { value: T },
    /// Two values with mean `mean` and standard deviation `offset`: the lower value
    /// `mean − offset·√((1−p)/p)` with probability `p`, the upper one otherwise.
    /// With `p = 1/2` the values are `mean ± offset`.
    TwoPoint { mean: T, offset: T, p: T },
    Exponential { mean: T },
    /// `scale·Bernoulli(p)`.
    ScaledBernoulli { p: T, scale: T },
    /// Log-normal with the given mean and `sd/mean = c`.
    LogNormal { mean: T, c: T },
    /// Uniform on `[low, high)` with `0 < low < high`.
    UniformPositive { low: T, high: T },
}

impl<T: Real> DistributionSpec<T> {
    pub fn validate(&self) -> Result<()> {
        let zero = T::zero();
        let positive = |name: &'static str, v: T| {
            if v > zero && v.is_finite() {
                Ok(())
            } else {
                Err(Error::domain(name, v, "(0, inf)"))
            }
        };
        let probability = |name: &'static str, v: T, closed_right: bool| {
            let ok = v > zero && (v < T::one() || (closed_right && v == T::one()));
            if ok {
                Ok(())
            } else {
                Err(Error::domain(name, v, if closed_right { "(0, 1]" } else { "(0, 1)" }))
            }
        };
        match *self {
            DistributionSpec::Constant { value } => positive("value", value),
            DistributionSpec::TwoPoint { mean, offset, p } => {
                positive("mean", mean)?;
                if !(offset >= zero && offset.is_finite()) {
                    return Err(Error::domain("offset", offset, "[0, inf)"));
                }
                probability("p", p, false)
            }
            DistributionSpec::Exponential { mean } => positive("mean", mean),
            DistributionSpec::ScaledBernoulli { p, scale } => {
                probability("p", p, true)?;
                positive("scale", scale)
            }
            DistributionSpec::LogNormal { mean, c } => {
                positive("mean", mean)?;
                positive("c", c)
            }
            DistributionSpec::UniformPositive { low, high } => {
                positive("low", low)?;
                positive("high", high)?;
                if low < high {
                    Ok(())
                } else {
                    Err(Error::domain("high", high, "(low, inf)"))
                }
            }
        }
    }

    pub fn family(&self) -> &'static str {
        match self {
            DistributionSpec::Constant { .. } => "constant",
            DistributionSpec::TwoPoint { .. } => "two-point",
            DistributionSpec::Exponential { .. } => "exponential",
            DistributionSpec::ScaledBernoulli { .. } => "bernoulli",
            DistributionSpec::LogNormal { .. } => "lognormal",
            DistributionSpec::UniformPositive { .. } => "uniform",
        }
    }

    pub fn true_mean(&self) -> T {
        match *self {
            DistributionSpec::Constant { value } => value,
            DistributionSpec::TwoPoint { mean, .. } => mean,
            DistributionSpec::Exponential { mean } => mean,
            DistributionSpec::ScaledBernoulli { p, scale } => p * scale,
            DistributionSpec::LogNormal { mean, .. } => mean,
            DistributionSpec::UniformPositive { low, high } => (low + high) / T::lit(2.0),
        }
    }

    pub fn true_sd(&self) -> T {
        match *self {
            DistributionSpec::Constant { .. } => T::zero(),
            DistributionSpec::TwoPoint { offset, .. } => offset,
            DistributionSpec::Exponential { mean } => mean,
            DistributionSpec::ScaledBernoulli { p, scale } => scale * (p * (T::one() - p)).sqrt(),
            DistributionSpec::LogNormal { mean, c } => mean * c,
            DistributionSpec::UniformPositive { low, high } => (high - low) / T::lit(12.0).sqrt(),
        }
    }

    pub fn true_c(&self) -> T {
        self.true_sd() / self.true_mean()
    }

    /// Draws are strictly positive for every family except the Bernoulli one.
    pub fn strictly_positive(&self) -> bool {
        match *self {
            DistributionSpec::ScaledBernoulli { .. } => false,
            DistributionSpec::TwoPoint { mean, offset, p } => mean - offset * ((T::one() - p) / p).sqrt() > T::zero(),
            _ => true,
        }
    }
}

impl<T: Real> fmt::Display for DistributionSpec<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            DistributionSpec::Constant { value } => write!(f, "constant:{value}"),
            DistributionSpec::TwoPoint { mean, offset, p } => write!(f, "two-point:{mean},{offset},{p}"),
            DistributionSpec::Exponential { mean } => write!(f, "exponential:{mean}"),
            DistributionSpec::ScaledBernoulli { p, scale } => write!(f, "bernoulli:{p},{scale}"),
            DistributionSpec::LogNormal { mean, c } => write!(f, "lognormal:{mean},{c}"),
            DistributionSpec::UniformPositive { low, high } => write!(f, "uniform:{low},{high}"),
        }
    }
}

impl<T: Real> FromStr for DistributionSpec<T> {
    type Err = Error;

    /// `constant:V`, `two-point:MEAN,OFFSET[,P]`, `exponential[:MEAN]`, `bernoulli:P[,SCALE]`,
    /// `lognormal:MEAN,C`, `uniform:LOW,HIGH`.
    fn from_str(s: &str) -> Result<Self> {
        let (family, rest) = s.split_once(':').unwrap_or((s, ""));
        let params: Vec<T> = rest
            .split(',')
            .map(str::trim)
            .filter(|p| !p.is_empty())
            .map(|p| {
                p.parse::<f64>()
                    .map(T::lit)
                    .map_err(|_| Error::Parse(format!("invalid number '{p}' in distribution '{s}'")))
            })
            .collect::<Result<_>>()?;
        let arity = |lo: usize, hi: usize| {
            if (lo..=hi).contains(&params.len()) {
                Ok(())
            } else {
                Err(Error::Parse(format!(
                    "distribution '{family}' takes {lo}..={hi} parameters, got {}",
                    params.len()
                )))
            }
        };
        let spec = match family.trim().to_ascii_lowercase().as_str() {
            "constant" => {
                arity(1, 1)?;
                DistributionSpec::Constant { value: params[0] }
            }
            "two-point" | "twopoint" | "two_point" => {
                arity(2, 3)?;
                let p = params.get(2).copied().unwrap_or(T::lit(0.5));
                DistributionSpec::TwoPoint { mean: params[0], offset: params[1], p }
            }
            "exponential" | "exp" => {
                arity(0, 1)?;
                DistributionSpec::Exponential { mean: params.first().copied().unwrap_or(T::one()) }
            }
            "bernoulli" | "scaled-bernoulli" => {
                arity(1, 2)?;
                DistributionSpec::ScaledBernoulli { p: params[0], scale: params.get(1).copied().unwrap_or(T::one()) }
            }
            "lognormal" | "log-normal" => {
                arity(2, 2)?;
                DistributionSpec::LogNormal { mean: params[0], c: params[1] }
            }
            "uniform" => {
                arity(2, 2)?;
                DistributionSpec::UniformPositive { low: params[0], high: params[1] }
            }
            other => return Err(Error::Parse(format!("unknown distribution family '{other}'"))),
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// A validated [`DistributionSpec`] acting as a [`SampleSource`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistributionSource<T> {
    spec: DistributionSpec<T>,
    sampler: Sampler<T>,
}

/// Per-family constants precomputed from the spec.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Sampler<T> {
    Constant(T),
    TwoPoint { low: T, high: T, p: T },
    Exponential(T),
    Bernoulli { p: T, scale: T },
    LogNormal { location: T, shape: T },
    Uniform { low: T, width: T },
}

impl<T: Real> DistributionSource<T> {
    pub fn spec(&self) -> &DistributionSpec<T> {
        &self.spec
    }
}

pub fn make_source<T: Real>(spec: DistributionSpec<T>) -> Result<DistributionSource<T>> {
    spec.validate()?;
    let one = T::one();
    let sampler = match spec {
        DistributionSpec::Constant { value } => Sampler::Constant(value),
        DistributionSpec::TwoPoint { mean, offset, p } => Sampler::TwoPoint {
            low: mean - offset * ((one - p) / p).sqrt(),
            high: mean + offset * (p / (one - p)).sqrt(),
            p,
        },
        DistributionSpec::Exponential { mean } => Sampler::Exponential(mean),
        DistributionSpec::ScaledBernoulli { p, scale } => Sampler::Bernoulli { p, scale },
        DistributionSpec::LogNormal { mean, c } => {
            let shape_sq = (one + c * c).ln();
            Sampler::LogNormal { location: mean.ln() - shape_sq / T::lit(2.0), shape: shape_sq.sqrt() }
        }
        DistributionSpec::UniformPositive { low, high } => Sampler::Uniform { low, width: high - low },
    };
    Ok(DistributionSource { spec, sampler })
}

/// Two-point source `1 ± α` with `α = ε/√f(ε)`, equally likely. A single draw has the law
/// of an extremal group mean for the scaled estimator, so it exercises the per-group tail
/// bound with group size 1.
pub fn worst_case_group_source<T: Real>(epsilon: T) -> Result<DistributionSource<T>> {
    if !(epsilon > T::zero() && epsilon < T::one() / T::lit(3.0)) {
        return Err(Error::domain("epsilon", epsilon, "(0, 1/3)"));
    }
    make_source(DistributionSpec::TwoPoint { mean: T::one(), offset: alpha_plus(epsilon)?, p: T::lit(0.5) })
}

impl<T: Real> SampleSource<T> for DistributionSource<T> {
    fn draw(&self, rng: &mut RngStream) -> T {
        match self.sampler {
            Sampler::Constant(v) => v,
            Sampler::TwoPoint { low, high, p } => {
                if rng.unit::<T>() < p {
                    low
                } else {
                    high
                }
            }
            Sampler::Exponential(mean) => -mean * rng.unit_open_left::<T>().ln(),
            Sampler::Bernoulli { p, scale } => {
                if rng.unit::<T>() < p {
                    scale
                } else {
                    T::zero()
                }
            }
            Sampler::LogNormal { location, shape } => {
                // Box–Muller, cosine branch only.
                let radius = (T::lit(-2.0) * rng.unit_open_left::<T>().ln()).sqrt();
                let angle = T::lit(2.0) * T::PI() * rng.unit::<T>();
                (location + shape * radius * angle.cos()).exp()
            }
            Sampler::Uniform { low, width } => low + width * rng.unit::<T>(),
        }
    }

    fn descriptor(&self) -> String {
        self.spec.to_string()
    }

    fn true_mean(&self) -> Option<T> {
        Some(self.spec.true_mean())
    }

    fn true_c(&self) -> Option<T> {
        Some(self.spec.true_c())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::CompensatedSum;

    fn parse(s: &str) -> DistributionSpec<f64> {
        s.parse().unwrap()
    }

    #[test]
    fn parse_and_display_roundtrip() {
        for s in ["constant:5", "two-point:1,0.1,0.5", "exponential:1", "bernoulli:0.1,1", "lognormal:1,5", "uniform:0.5,1.5"] {
            assert_eq!(parse(s).to_string(), s);
        }
        assert_eq!(parse("exponential"), DistributionSpec::Exponential { mean: 1.0 });
        assert_eq!(parse("two-point:2,0.5"), DistributionSpec::TwoPoint { mean: 2.0, offset: 0.5, p: 0.5 });
        assert!("gamma:1".parse::<DistributionSpec<f64>>().is_err());
        assert!("lognormal:1".parse::<DistributionSpec<f64>>().is_err());
        assert!("uniform:2,1".parse::<DistributionSpec<f64>>().is_err());
        assert!("exponential:-1".parse::<DistributionSpec<f64>>().is_err());
        assert!("exponential:abc".parse::<DistributionSpec<f64>>().is_err());
        assert!("bernoulli:0".parse::<DistributionSpec<f64>>().is_err());
        assert!("two-point:1,0.1,1".parse::<DistributionSpec<f64>>().is_err());
    }

    #[test]
    fn oracle_moments() {
        let tp = parse("two-point:1,0.1,0.5");
        let src = make_source(tp).unwrap();
        let mut rng = RngStream::new(1, 0);
        for _ in 0..100 {
            let x = src.draw(&mut rng);
            assert!(x == 0.9 || x == 1.1, "{x}");
        }
        assert!((tp.true_c() - 0.1).abs() < 1e-15);
        assert_eq!(parse("exponential:1").true_c(), 1.0);
        let b = parse("bernoulli:0.1");
        assert!((b.true_mean() - 0.1).abs() < 1e-15);
        assert!((b.true_c() - 3.0).abs() < 1e-12);
        assert!((parse("lognormal:2,5").true_c() - 5.0).abs() < 1e-15);
        assert!((parse("uniform:1,3").true_c() - 1.0 / (2.0 * 3f64.sqrt())).abs() < 1e-15);
    }

    #[test]
    fn worst_case_source_spread() {
        let src = worst_case_group_source(0.1f64).unwrap();
        assert!((src.true_c().unwrap() - 0.089_589_975).abs() < 1e-6);
        assert!(worst_case_group_source(1.0f64 / 3.0).is_err());
        assert!(worst_case_group_source(0.0f64).is_err());
    }

    /// Central fourth moment, used for the standard error of the sample sd.
    fn fourth_central_moment(spec: &DistributionSpec<f64>) -> f64 {
        match *spec {
            DistributionSpec::Constant { .. } => 0.0,
            DistributionSpec::TwoPoint { offset, p, .. } => {
                let d1 = offset * ((1.0 - p) / p).sqrt();
                let d2 = offset * (p / (1.0 - p)).sqrt();
                p * d1.powi(4) + (1.0 - p) * d2.powi(4)
            }
            DistributionSpec::Exponential { mean } => 9.0 * mean.powi(4),
            DistributionSpec::ScaledBernoulli { p, scale } => scale.powi(4) * p * (1.0 - p) * (1.0 - 3.0 * p + 3.0 * p * p),
            DistributionSpec::LogNormal { c, .. } => {
                let s2 = (1.0 + c * c).ln();
                let kurtosis = (4.0 * s2).exp() + 2.0 * (3.0 * s2).exp() + 3.0 * (2.0 * s2).exp() - 3.0;
                kurtosis * spec.true_sd().powi(4)
            }
            DistributionSpec::UniformPositive { low, high } => (high - low).powi(4) / 80.0,
        }
    }

    #[test]
    fn empirical_moments_match_oracle() {
        let n = 1_000_000u64;
        let specs = ["constant:5", "two-point:1,0.1,0.3", "exponential:2", "bernoulli:0.1,4", "lognormal:1,1", "uniform:0.5,1.5"];
        for (i, s) in specs.iter().enumerate() {
            let spec = parse(s);
            let src = make_source(spec).unwrap();
            let mut rng = RngStream::new(31_337, i as u64);
            let mut sum = CompensatedSum::new();
            let mut sq = CompensatedSum::new();
            let mean = spec.true_mean();
            for _ in 0..n {
                let x = src.draw(&mut rng);
                assert!(x.is_finite());
                if spec.strictly_positive() {
                    assert!(x > 0.0);
                }
                sum.add(x);
                sq.add((x - mean) * (x - mean));
            }
            let nf = n as f64;
            let sd = spec.true_sd();
            let emp_mean = sum.total() / nf;
            let emp_sd = (sq.total() / nf).sqrt();
            let mean_se = sd / nf.sqrt();
            assert!((emp_mean - mean).abs() <= 5.0 * mean_se + 1e-12, "{s}: mean {emp_mean}");
            let var_se = ((fourth_central_moment(&spec) - sd.powi(4)) / nf).sqrt();
            let sd_se = if sd > 0.0 { var_se / (2.0 * sd) } else { 0.0 };
            assert!((emp_sd - sd).abs() <= 5.0 * sd_se + 1e-12, "{s}: sd {emp_sd} vs {sd}");
        }
    }

    #[test]
    fn heavy_lognormal_mean() {
        let spec = parse("lognormal:1,5");
        let src = make_source(spec).unwrap();
        let mut rng = RngStream::new(5, 0);
        let n = 1_000_000;
        let m: f64 = (0..n).map(|_| src.draw(&mut rng)).collect::<CompensatedSum<f64>>().total() / n as f64;
        assert!((m - 1.0).abs() <= 5.0 * 5.0 / (n as f64).sqrt(), "{m}");
    }
}
