//! Parametric cost distributions on [t_min, ∞): cumulative distribution
//! functions, inverse-transform sampling, conditioning on a minimum, the
//! conditional mean μ_s = E[s/t | t ≥ s], and reciprocal-mean constants.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::integrate_adaptive;
use crate::rng::RandomStream;
use crate::special::exp_e1_scaled;

const MU_QUAD_TOL: f64 = 1e-10;

/// A per-task cost distribution.
///
/// Pareto: F(t) = 1 − (t_min/t)^α. Shifted exponential:
/// F(t) = 1 − e^(−λ(t − t_min)). Uniform on [t_min, t_max].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DistributionSpec {
    Pareto { t_min: f64, alpha: f64 },
    ShiftedExponential { t_min: f64, lambda: f64 },
    Uniform { t_min: f64, t_max: f64 },
}

use DistributionSpec::*;

impl DistributionSpec {
    pub fn pareto(t_min: f64, alpha: f64) -> Result<Self> {
        check_positive("tmin", t_min)?;
        check_positive("alpha", alpha)?;
        Ok(Pareto { t_min, alpha })
    }

    pub fn shifted_exponential(t_min: f64, lambda: f64) -> Result<Self> {
        check_positive("tmin", t_min)?;
        check_positive("lambda", lambda)?;
        Ok(ShiftedExponential { t_min, lambda })
    }

    pub fn uniform(t_min: f64, t_max: f64) -> Result<Self> {
        check_positive("tmin", t_min)?;
        if !(t_max > t_min) || !t_max.is_finite() {
            return Err(Error::domain(format!(
                "uniform needs tmax > tmin, got tmin={t_min}, tmax={t_max}"
            )));
        }
        Ok(Uniform { t_min, t_max })
    }

    pub fn t_min(&self) -> f64 {
        match *self {
            Pareto { t_min, .. } | ShiftedExponential { t_min, .. } | Uniform { t_min, .. } => {
                t_min
            }
        }
    }

    pub fn cdf(&self, t: f64) -> f64 {
        if t <= self.t_min() {
            return 0.0;
        }
        match *self {
            Pareto { t_min, alpha } => 1.0 - (t_min / t).powf(alpha),
            ShiftedExponential { t_min, lambda } => 1.0 - (-lambda * (t - t_min)).exp(),
            Uniform { t_min, t_max } => ((t - t_min) / (t_max - t_min)).min(1.0),
        }
    }

    /// Inverse CDF; defined for u in [0, 1), with quantile(0) = t_min.
    pub fn quantile(&self, u: f64) -> Result<f64> {
        if !(0.0..1.0).contains(&u) {
            return Err(Error::domain(format!("quantile needs u in [0, 1), got {u}")));
        }
        Ok(match *self {
            Pareto { t_min, alpha } => t_min * (1.0 - u).powf(-1.0 / alpha),
            ShiftedExponential { t_min, lambda } => t_min - (1.0 - u).ln() / lambda,
            Uniform { t_min, t_max } => t_min + u * (t_max - t_min),
        })
    }

    /// Inverse-transform draw from the unconditional distribution.
    pub fn sample(&self, stream: &mut RandomStream) -> f64 {
        self.quantile(stream.next_f64()).unwrap()
    }

    /// Draw from G_s(t) = (F(t) − F(s)) / (1 − F(s)), the law of a cost
    /// conditioned on being at least `s`.
    pub fn conditional_sample(&self, s: f64, stream: &mut RandomStream) -> Result<f64> {
        let fs = self.conditioning_cdf(s)?;
        let u = stream.next_f64();
        self.quantile(fs + u * (1.0 - fs))
    }

    /// μ_s = E_{t ~ G_s}[s/t]. Closed forms for Pareto and the shifted
    /// exponential, adaptive quadrature otherwise.
    pub fn mu_s(&self, s: f64) -> Result<f64> {
        self.conditioning_cdf(s)?;
        Ok(match *self {
            // the conditional law of a Pareto above s is Pareto(s, alpha)
            Pareto { alpha, .. } => alpha / (alpha + 1.0),
            // memoryless tail: t | t >= s is s + Exp(lambda)
            ShiftedExponential { lambda, .. } => lambda * s * exp_e1_scaled(lambda * s).unwrap(),
            Uniform { .. } => self.mu_s_quadrature(s)?,
        })
    }

    /// μ_s by adaptive quadrature of s/quantile over the conditioned
    /// uniform variable; the independent route used to cross-check the
    /// closed forms.
    pub fn mu_s_quadrature(&self, s: f64) -> Result<f64> {
        let fs = self.conditioning_cdf(s)?;
        let spec = *self;
        Ok(integrate_adaptive(
            &|u: f64| {
                let v = (fs + u * (1.0 - fs)).min(1.0 - 1e-16);
                s / spec.quantile(v).unwrap()
            },
            0.0,
            1.0,
            MU_QUAD_TOL,
        ))
    }

    /// (E_{t~F}[1/t])^(−1), the per-task constant in the limiting
    /// average-case ratio. Always at least t_min.
    pub fn inverse_mean_reciprocal(&self) -> f64 {
        match *self {
            Pareto { t_min, alpha } => t_min * (alpha + 1.0) / alpha,
            ShiftedExponential { t_min, lambda } => {
                1.0 / (lambda * exp_e1_scaled(lambda * t_min).unwrap())
            }
            Uniform { t_min, t_max } => (t_max - t_min) / (t_max / t_min).ln(),
        }
    }

    /// Validates a conditioning point and returns F(s).
    fn conditioning_cdf(&self, s: f64) -> Result<f64> {
        if !(s >= self.t_min()) || !s.is_finite() {
            return Err(Error::domain(format!(
                "conditioning point {s} is below the support minimum {}",
                self.t_min()
            )));
        }
        let fs = self.cdf(s);
        if fs >= 1.0 {
            return Err(Error::domain(format!(
                "cannot condition on s={s}: F(s) = 1 leaves no mass"
            )));
        }
        Ok(fs)
    }
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0) || !v.is_finite() {
        return Err(Error::domain(format!(
            "{name} must be strictly positive and finite, got {v}"
        )));
    }
    Ok(())
}

impl fmt::Display for DistributionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Pareto { t_min, alpha } => write!(f, "pareto:tmin={t_min},alpha={alpha}"),
            ShiftedExponential { t_min, lambda } => write!(f, "exp:tmin={t_min},lambda={lambda}"),
            Uniform { t_min, t_max } => write!(f, "uniform:tmin={t_min},tmax={t_max}"),
        }
    }
}

impl FromStr for DistributionSpec {
    type Err = Error;

    /// Grammar: `pareto:tmin=<f>,alpha=<f>` | `exp:tmin=<f>,lambda=<f>`
    /// | `uniform:tmin=<f>,tmax=<f>`. The kind token is
    /// case-insensitive and parameters may appear in either order.
    fn from_str(s: &str) -> Result<Self> {
        let (kind, params) = s
            .split_once(':')
            .ok_or_else(|| Error::parse(format!("distribution spec {s:?} is missing ':'")))?;
        let mut fields: Vec<(String, f64)> = Vec::new();
        for part in params.split(',') {
            let (key, value) = part.split_once('=').ok_or_else(|| {
                Error::parse(format!("parameter {part:?} is not of the form key=value"))
            })?;
            let value: f64 = value.trim().parse().map_err(|_| {
                Error::parse(format!("parameter {key:?} has non-numeric value {value:?}"))
            })?;
            fields.push((key.trim().to_ascii_lowercase(), value));
        }
        let expect = |wanted: [&str; 2]| -> Result<(f64, f64)> {
            let mut found = [None, None];
            for (key, value) in &fields {
                match wanted.iter().position(|w| w == key) {
                    Some(i) if found[i].is_none() => found[i] = Some(*value),
                    Some(_) => return Err(Error::parse(format!("duplicate parameter {key:?}"))),
                    None => {
                        return Err(Error::parse(format!(
                            "unknown parameter {key:?}; expected {} and {}",
                            wanted[0], wanted[1]
                        )))
                    }
                }
            }
            match found {
                [Some(a), Some(b)] => Ok((a, b)),
                _ => Err(Error::parse(format!(
                    "spec must provide both {} and {}",
                    wanted[0], wanted[1]
                ))),
            }
        };
        match kind.to_ascii_lowercase().as_str() {
            "pareto" => {
                let (t_min, alpha) = expect(["tmin", "alpha"])?;
                DistributionSpec::pareto(t_min, alpha)
            }
            "exp" => {
                let (t_min, lambda) = expect(["tmin", "lambda"])?;
                DistributionSpec::shifted_exponential(t_min, lambda)
            }
            "uniform" => {
                let (t_min, t_max) = expect(["tmin", "tmax"])?;
                DistributionSpec::uniform(t_min, t_max)
            }
            other => Err(Error::parse(format!(
                "unknown distribution kind {other:?}; expected pareto, exp, or uniform"
            ))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cdf_examples() {
        let p = DistributionSpec::pareto(1.0, 2.0).unwrap();
        assert!((p.cdf(2.0) - 0.75).abs() < 1e-15);
        assert_eq!(p.cdf(1.0), 0.0);
        assert_eq!(p.cdf(0.5), 0.0);

        let e = DistributionSpec::shifted_exponential(1.0, 2.0).unwrap();
        assert_eq!(e.cdf(1.0), 0.0);

        let u = DistributionSpec::uniform(1.0, 3.0).unwrap();
        assert!((u.cdf(2.0) - 0.5).abs() < 1e-15);
        assert_eq!(u.cdf(5.0), 1.0);
    }

    #[test]
    fn quantile_examples() {
        let p = DistributionSpec::pareto(1.0, 2.0).unwrap();
        assert!((p.quantile(0.75).unwrap() - 2.0).abs() < 1e-12);
        assert_eq!(p.quantile(0.0).unwrap(), 1.0);

        let u = DistributionSpec::uniform(1.0, 3.0).unwrap();
        assert!((u.quantile(0.5).unwrap() - 2.0).abs() < 1e-15);

        assert!(p.quantile(1.0).is_err());
        assert!(p.quantile(-0.1).is_err());
    }

    #[test]
    fn sampling_is_deterministic_and_supported() {
        let spec = DistributionSpec::pareto(1.0, 2.0).unwrap();
        let mut a = RandomStream::new(9, 3);
        let mut b = RandomStream::new(9, 3);
        for _ in 0..100 {
            let x = spec.sample(&mut a);
            assert_eq!(x, spec.sample(&mut b));
            assert!(x >= 1.0);
        }
    }

    #[test]
    fn conditional_samples_at_least_s() {
        let spec = DistributionSpec::shifted_exponential(1.0, 2.0).unwrap();
        let mut stream = RandomStream::new(1, 1);
        for _ in 0..1000 {
            assert!(spec.conditional_sample(2.5, &mut stream).unwrap() >= 2.5);
        }
    }

    #[test]
    fn conditional_rejects_bad_s() {
        let spec = DistributionSpec::uniform(1.0, 3.0).unwrap();
        let mut stream = RandomStream::new(1, 1);
        assert!(spec.conditional_sample(0.5, &mut stream).is_err());
        // F(s) = 1 at the right endpoint
        assert!(spec.conditional_sample(3.0, &mut stream).is_err());
    }

    #[test]
    fn mu_s_pareto_independent_of_s() {
        let spec = DistributionSpec::pareto(1.0, 2.0).unwrap();
        for &s in &[1.0, 2.0, 17.5] {
            assert!((spec.mu_s(s).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn mu_s_exponential_matches_e1_form() {
        // 2 e^2 E1(2) at s = 1, lambda = 2
        let spec = DistributionSpec::shifted_exponential(1.0, 2.0).unwrap();
        let mu = spec.mu_s(1.0).unwrap();
        assert!((mu - 0.7226572).abs() < 1e-6, "{mu}");
        // the reciprocal is the ≈1.384 limiting constant
        assert!((1.0 / mu - 1.384).abs() < 1e-3);
    }

    #[test]
    fn mu_s_closed_form_vs_quadrature() {
        for spec in [
            DistributionSpec::pareto(1.0, 2.0).unwrap(),
            DistributionSpec::pareto(0.5, 1.3).unwrap(),
            DistributionSpec::shifted_exponential(1.0, 2.0).unwrap(),
            DistributionSpec::shifted_exponential(2.0, 0.7).unwrap(),
        ] {
            for &s_mult in &[1.0, 1.5, 4.0] {
                let s = spec.t_min() * s_mult;
                let closed = spec.mu_s(s).unwrap();
                let quad = spec.mu_s_quadrature(s).unwrap();
                assert!((closed - quad).abs() < 1e-8, "{spec} s={s}: {closed} vs {quad}");
            }
        }
    }

    #[test]
    fn mu_s_degenerate_limit_near_one() {
        // Uniform mass concentrating just above s pushes mu_s toward 1.
        let spec = DistributionSpec::uniform(1.0, 3.0).unwrap();
        let mu = spec.mu_s(2.999).unwrap();
        assert!(mu > 0.999 && mu <= 1.0, "{mu}");
    }

    #[test]
    fn mu_s_in_unit_interval() {
        for spec in [
            DistributionSpec::pareto(1.0, 0.2).unwrap(),
            DistributionSpec::shifted_exponential(3.0, 5.0).unwrap(),
            DistributionSpec::uniform(1.0, 10.0).unwrap(),
        ] {
            let mu = spec.mu_s(spec.t_min() * 1.1).unwrap();
            assert!(mu > 0.0 && mu <= 1.0, "{spec}: {mu}");
        }
    }

    #[test]
    fn inverse_mean_reciprocal_examples() {
        let p = DistributionSpec::pareto(1.0, 2.0).unwrap();
        assert!((p.inverse_mean_reciprocal() - 1.5).abs() < 1e-12);

        // 80/20 rule tail index
        let alpha = 5f64.ln() / 4f64.ln();
        let p = DistributionSpec::pareto(1.0, alpha).unwrap();
        assert!((p.inverse_mean_reciprocal() - 1.861).abs() < 1e-3);

        let e = DistributionSpec::shifted_exponential(1.0, 2.0).unwrap();
        assert!((e.inverse_mean_reciprocal() - 1.384).abs() < 1e-3);
    }

    #[test]
    fn inverse_mean_reciprocal_at_least_t_min() {
        for spec in [
            DistributionSpec::pareto(2.0, 0.5).unwrap(),
            DistributionSpec::shifted_exponential(0.25, 8.0).unwrap(),
            DistributionSpec::uniform(1.0, 1.001).unwrap(),
        ] {
            assert!(spec.inverse_mean_reciprocal() >= spec.t_min());
        }
    }

    #[test]
    fn spec_grammar_round_trip() {
        for text in [
            "pareto:tmin=1,alpha=2",
            "exp:tmin=1,lambda=2",
            "uniform:tmin=1,tmax=3",
        ] {
            let spec: DistributionSpec = text.parse().unwrap();
            assert_eq!(spec.to_string(), text);
        }
    }

    #[test]
    fn spec_grammar_flexible_and_strict() {
        // case-insensitive kind, free parameter order
        let spec: DistributionSpec = "Pareto:alpha=2,tmin=1".parse().unwrap();
        assert_eq!(spec, DistributionSpec::pareto(1.0, 2.0).unwrap());

        assert!("pareto:tmin=1,beta=2".parse::<DistributionSpec>().is_err());
        assert!("pareto:tmin=1".parse::<DistributionSpec>().is_err());
        assert!("pareto:tmin=1,alpha=2,alpha=3"
            .parse::<DistributionSpec>()
            .is_err());
        assert!("gauss:tmin=1,alpha=2".parse::<DistributionSpec>().is_err());
        assert!("pareto".parse::<DistributionSpec>().is_err());
        assert!("pareto:tmin=x,alpha=2".parse::<DistributionSpec>().is_err());
    }
}
