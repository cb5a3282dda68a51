use serde::{Deserialize, Serialize};

/// Integration method tag carried by every [`Estimate`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Deterministic adaptive radial quadrature.
    Radial,
    /// Importance-sampled Monte Carlo over R^N.
    Mc,
    /// Importance-sampled Monte Carlo over R^{2N}.
    Mc2n,
}

/// A numerical value with an uncertainty: zero for deterministic quadrature,
/// one standard error for sampling paths.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub uncertainty: f64,
    #[serde(rename = "samples")]
    pub samples_used: u64,
    pub method: Method,
}

impl Estimate {
    pub fn exact(value: f64, evals: u64) -> Self {
        Estimate {
            value,
            uncertainty: 0.0,
            samples_used: evals,
            method: Method::Radial,
        }
    }

    /// Averages k independent estimates; uncertainty propagates as RMS/sqrt(k),
    /// i.e. sqrt(sum sigma_i^2)/k.
    pub fn combine(parts: &[Estimate]) -> Estimate {
        assert!(!parts.is_empty());
        let k = parts.len() as f64;
        let value = parts.iter().map(|e| e.value).sum::<f64>() / k;
        let uncertainty = parts
            .iter()
            .map(|e| e.uncertainty * e.uncertainty)
            .sum::<f64>()
            .sqrt()
            / k;
        Estimate {
            value,
            uncertainty,
            samples_used: parts.iter().map(|e| e.samples_used).sum(),
            method: parts[0].method,
        }
    }

    /// Delta-method push-forward through `x -> x^power` for nonnegative
    /// integrals (used to turn integral estimates into norms).
    pub fn powf(self, power: f64) -> Estimate {
        if self.value <= 0.0 {
            // a vanishing integral with vanishing spread stays zero
            return Estimate {
                value: 0.0,
                uncertainty: if self.uncertainty == 0.0 {
                    0.0
                } else {
                    self.uncertainty.abs().powf(power)
                },
                ..self
            };
        }
        let value = self.value.powf(power);
        let uncertainty = (power.abs() * self.value.powf(power - 1.0) * self.uncertainty).abs();
        Estimate {
            value,
            uncertainty,
            ..self
        }
    }

    pub fn scaled(self, c: f64) -> Estimate {
        Estimate {
            value: c * self.value,
            uncertainty: c.abs() * self.uncertainty,
            ..self
        }
    }

    /// Sum of two estimates with independent errors.
    pub fn add(self, other: Estimate) -> Estimate {
        Estimate {
            value: self.value + other.value,
            uncertainty: (self.uncertainty * self.uncertainty
                + other.uncertainty * other.uncertainty)
                .sqrt(),
            samples_used: self.samples_used + other.samples_used,
            method: self.method,
        }
    }

    /// z-score of the estimate against a reference value; infinite when the
    /// uncertainty is zero and the values differ.
    pub fn z_score(&self, truth: f64) -> f64 {
        if self.uncertainty == 0.0 {
            if self.value == truth {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            (self.value - truth) / self.uncertainty
        }
    }
}

/// Deterministic pairwise summation; order-insensitive reduction contract.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= 32 {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}
