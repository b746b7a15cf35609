//! Maxwell-Boltzmann input distributions, the shaping-parameter search and
//! constant-composition distribution matching.

mod ccdm;
mod lambda;

pub use ccdm::CcdmCodec;
pub(crate) use lambda::golden_max;
pub use lambda::{optimize_lambda, LAMBDA_TOLERANCE};

use crate::error::{Error, Result};
use crate::modem::Constellation;

/// Entropy in bits of a pmf; zero-probability entries contribute nothing.
pub fn entropy(pmf: &[f64]) -> f64 {
    pmf.iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.log2())
        .sum()
}

/// Symmetric ASK input distribution together with its amplitude marginal.
#[derive(Clone, Debug, PartialEq)]
pub struct ShapingDistribution {
    m: u32,
    lambda: f64,
    // pmf over point indices (ascending points)
    px: Vec<f64>,
    // pmf over amplitude indices (amplitudes 1, 3, ...)
    pa: Vec<f64>,
    entropy_a: f64,
}

impl ShapingDistribution {
    /// `P_X(x) ∝ exp(-lambda x^2)` on the `2^m`-ASK alphabet.
    pub fn maxwell_boltzmann(m: u32, lambda: f64) -> Result<Self> {
        if !(lambda >= 0.0) || !lambda.is_finite() {
            return Err(Error::Parameter(format!("shaping parameter lambda={lambda} must be finite and >= 0")));
        }
        let c = Constellation::new(m)?;
        // Shift the exponent by the smallest energy (x^2 = 1) to avoid underflow.
        let weights: Vec<f64> = c
            .amplitudes()
            .iter()
            .map(|&a| (-lambda * ((a * a) as f64 - 1.0)).exp())
            .collect();
        let total: f64 = weights.iter().sum();
        let pa: Vec<f64> = weights.iter().map(|w| w / total).collect();
        let mut dist = Self::from_amplitude_pmf(m, &pa)?;
        dist.lambda = lambda;
        Ok(dist)
    }

    /// Uniform distribution (`lambda = 0`).
    pub fn uniform(m: u32) -> Result<Self> {
        Self::maxwell_boltzmann(m, 0.0)
    }

    /// Symmetric distribution induced by an amplitude pmf and uniform signs.
    /// The reported `lambda` is NaN because the pmf need not be Maxwell-Boltzmann.
    pub fn from_amplitude_pmf(m: u32, pa: &[f64]) -> Result<Self> {
        let c = Constellation::new(m)?;
        if pa.len() != c.num_amplitudes() {
            return Err(Error::Length {
                what: "amplitude pmf",
                expected: c.num_amplitudes(),
                got: pa.len(),
            });
        }
        let total: f64 = pa.iter().sum();
        if pa.iter().any(|&p| !(p >= 0.0)) || (total - 1.0).abs() > 1e-9 {
            return Err(Error::Parameter("amplitude pmf must be non-negative and sum to 1".into()));
        }
        let px: Vec<f64> = (0..c.num_points())
            .map(|i| pa[c.amplitude_index_of_point(i)] / 2.0)
            .collect();
        Ok(Self {
            m,
            lambda: f64::NAN,
            px,
            pa: pa.to_vec(),
            entropy_a: entropy(pa),
        })
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// pmf over ascending point indices.
    pub fn px(&self) -> &[f64] {
        &self.px
    }

    /// pmf over amplitude indices.
    pub fn pa(&self) -> &[f64] {
        &self.pa
    }

    /// `H(A)` in bits.
    pub fn entropy_a(&self) -> f64 {
        self.entropy_a
    }

    /// `H(X) = H(A) + 1` for a symmetric distribution.
    pub fn entropy_x(&self) -> f64 {
        self.entropy_a + 1.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_limit() {
        let d = ShapingDistribution::maxwell_boltzmann(2, 0.0).unwrap();
        assert_eq!(d.px(), &[0.25; 4]);
        assert_eq!(d.pa(), &[0.5, 0.5]);
        assert!((d.entropy_a() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn concentration_limit() {
        let d = ShapingDistribution::maxwell_boltzmann(2, 10.0).unwrap();
        assert!(1.0 - d.pa()[0] < 1e-30 && d.pa()[1] < 1e-30);
        assert!(d.entropy_a() < 1e-30);
    }

    #[test]
    fn matches_high_precision_normalisation() {
        // exp(-0.01 x^2) summed over the 16 points, evaluated term by term with
        // a compensated sum in the natural (unshifted) form.
        let xs: Vec<f64> = (0..16).map(|i| (2 * i - 15) as f64).collect();
        let terms: Vec<f64> = xs.iter().map(|x| (-0.01 * x * x).exp()).collect();
        let mut sum = 0.0f64;
        let mut comp = 0.0f64;
        for t in &terms {
            let y = t - comp;
            let s = sum + y;
            comp = (s - sum) - y;
            sum = s;
        }
        let d = ShapingDistribution::maxwell_boltzmann(4, 0.01).unwrap();
        for (p, t) in d.px().iter().zip(&terms) {
            assert!((p - t / sum).abs() < 1e-15);
        }
    }

    #[test]
    fn symmetry_normalisation_and_entropy_identity() {
        for m in 1..=6 {
            for k in 0..40 {
                let lambda = k as f64 * 0.0125;
                let d = ShapingDistribution::maxwell_boltzmann(m, lambda).unwrap();
                let px = d.px();
                let n = px.len();
                assert!((px.iter().sum::<f64>() - 1.0).abs() < 1e-12);
                for i in 0..n {
                    assert_eq!(px[i], px[n - 1 - i]);
                }
                for (k, &p) in d.pa().iter().enumerate() {
                    assert!((p - 2.0 * px[n / 2 + k]).abs() < 1e-15);
                }
                assert!((entropy(px) - 1.0 - d.entropy_a()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn rejects_negative_lambda() {
        assert!(ShapingDistribution::maxwell_boltzmann(3, -0.1).is_err());
        assert!(ShapingDistribution::maxwell_boltzmann(3, f64::NAN).is_err());
    }
}
