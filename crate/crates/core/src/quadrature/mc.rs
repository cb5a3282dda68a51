//! Importance-sampled Monte Carlo over R^N.

use super::estimate::{pairwise_sum, Estimate, Method};
use super::rng::{SampleStreams, SALT_MC};
use super::{McConfig, MAX_MC_DIM};
use crate::error::{Error, Result};
use crate::params::unit_ball_volume;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

const CHUNK: usize = 4096;

/// Importance density over R^N. Both variants sample a uniform direction and
/// a radius; `SingularOrigin` stratifies the radius at the singular split so
/// that integrands behaving like `|x|^{-beta}` at the origin keep finite
/// variance.
#[derive(Debug, Clone, Copy)]
pub enum Importance {
    UniformBall { radius: f64 },
    SingularOrigin { beta: f64, radius: f64 },
}

impl Importance {
    fn radius(&self) -> f64 {
        match *self {
            Importance::UniformBall { radius } => radius,
            Importance::SingularOrigin { radius, .. } => radius,
        }
    }
}

pub(crate) fn sample_direction(rng: &mut ChaCha8Rng, dim: usize, out: &mut [f64]) {
    loop {
        let mut norm_sq = 0.0;
        for slot in out.iter_mut().take(dim) {
            let g: f64 = rng.sample(rand_distr::StandardNormal);
            *slot = g;
            norm_sq += g * g;
        }
        if norm_sq > 1e-24 {
            let inv = norm_sq.sqrt().recip();
            for slot in out.iter_mut().take(dim) {
                *slot *= inv;
            }
            return;
        }
    }
}

/// Radial sampler for a stratified origin-adapted density. Densities are
/// with respect to the radius; the volume density divides by the sphere area.
struct RadialMixture {
    dim: f64,
    split: f64,
    radius: f64,
    gamma: f64,
    w_inner: f64,
}

impl RadialMixture {
    fn new(dim: usize, beta: f64, radius: f64, split_hint: f64) -> Result<Self> {
        let n = dim as f64;
        let gamma = n - beta;
        if gamma <= 0.0 {
            return Err(Error::NonIntegrableSingularity {
                exponent: -beta + n - 1.0,
                place: "origin importance",
            });
        }
        let split = split_hint.min(0.5 * radius);
        Ok(RadialMixture {
            dim: n,
            split,
            radius,
            gamma,
            w_inner: 0.5,
        })
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        let pick: f64 = rng.gen();
        let u: f64 = rng.gen();
        if pick < self.w_inner {
            self.split * u.powf(1.0 / self.gamma)
        } else {
            let a = self.split.powf(self.dim);
            let b = self.radius.powf(self.dim);
            (a + u * (b - a)).powf(1.0 / self.dim)
        }
    }

    /// Radial density q(r).
    fn density(&self, r: f64) -> f64 {
        if r <= 0.0 || r > self.radius {
            return 0.0;
        }
        if r < self.split {
            self.w_inner * self.gamma * r.powf(self.gamma - 1.0) / self.split.powf(self.gamma)
        } else {
            let a = self.split.powf(self.dim);
            let b = self.radius.powf(self.dim);
            (1.0 - self.w_inner) * self.dim * r.powf(self.dim - 1.0) / (b - a)
        }
    }
}

fn sphere_area(dim: usize) -> f64 {
    dim as f64 * unit_ball_volume(dim as u32)
}

/// Unbiased estimator of `int_{R^N} f`, deterministic given
/// `(cfg.seed, cfg.sample_count)` regardless of thread count.
///
/// The importance density must be positive wherever `f` is nonzero within
/// the sampled ball; deterministic probes outside it raise
/// [`Error::ZeroDensityRegion`] when `f` visibly extends past the cutoff.
pub fn integrate_mc(
    f: impl Fn(&[f64]) -> f64 + Sync,
    dim: usize,
    cfg: &McConfig,
    importance: Importance,
) -> Result<Estimate> {
    assert!(dim >= 1 && dim <= MAX_MC_DIM);
    cfg.validate()?;
    let radius = importance.radius();

    probe_beyond_cutoff(&f, dim, radius)?;

    let mixture = match importance {
        Importance::UniformBall { .. } => None,
        Importance::SingularOrigin { beta, radius } => Some(RadialMixture::new(
            dim,
            beta,
            radius,
            cfg.singular_split_radius,
        )?),
    };
    let ball_density = 1.0 / (unit_ball_volume(dim as u32) * radius.powi(dim as i32));
    let area = sphere_area(dim);

    let n = cfg.sample_count as usize;
    let streams = SampleStreams::new(cfg.seed, SALT_MC);
    let mut values = vec![0.0f64; n];
    values
        .par_chunks_mut(CHUNK)
        .enumerate()
        .for_each(|(chunk_idx, chunk)| {
            let mut x = [0.0f64; MAX_MC_DIM];
            for (j, slot) in chunk.iter_mut().enumerate() {
                let index = (chunk_idx * CHUNK + j) as u64;
                let mut rng = streams.stream(index);
                let r = match &mixture {
                    None => radius * rng.gen::<f64>().powf(1.0 / dim as f64),
                    Some(mix) => mix.sample(&mut rng),
                };
                sample_direction(&mut rng, dim, &mut x);
                for xi in x.iter_mut().take(dim) {
                    *xi *= r;
                }
                let fx = f(&x[..dim]);
                if fx == 0.0 {
                    *slot = 0.0;
                    continue;
                }
                let density = match &mixture {
                    None => ball_density,
                    Some(mix) => mix.density(r) / (area * r.powf(dim as f64 - 1.0)),
                };
                *slot = fx / density;
            }
        });

    Ok(estimate_from_samples(&values, Method::Mc))
}

pub(crate) fn estimate_from_samples(values: &[f64], method: Method) -> Estimate {
    let n = values.len() as f64;
    let sum = pairwise_sum(values);
    let mean = sum / n;
    let sum_sq = pairwise_sum_of_squares(values);
    let var = ((sum_sq - sum * sum / n) / (n - 1.0)).max(0.0);
    Estimate {
        value: mean,
        uncertainty: (var / n).sqrt(),
        samples_used: values.len() as u64,
        method,
    }
}

fn pairwise_sum_of_squares(values: &[f64]) -> f64 {
    if values.len() <= 32 {
        return values.iter().map(|v| v * v).sum();
    }
    let mid = values.len() / 2;
    pairwise_sum_of_squares(&values[..mid]) + pairwise_sum_of_squares(&values[mid..])
}

fn probe_beyond_cutoff(f: &impl Fn(&[f64]) -> f64, dim: usize, radius: f64) -> Result<()> {
    let mut x = [0.0f64; MAX_MC_DIM];
    let mut interior_scale: f64 = 0.0;
    for k in 1..=4 {
        let r = radius * 0.2 * k as f64;
        x[..dim].fill(0.0);
        x[0] = r;
        interior_scale = interior_scale.max(f(&x[..dim]).abs());
        x[..dim].fill(r / (dim as f64).sqrt());
        interior_scale = interior_scale.max(f(&x[..dim]).abs());
    }
    if interior_scale == 0.0 {
        return Ok(()); // nothing visible; a zero integrand is fine
    }
    for &c in &[1.03, 1.3, 2.0, 5.0] {
        let r = radius * c;
        x[..dim].fill(0.0);
        x[0] = r;
        let a = f(&x[..dim]).abs();
        x[..dim].fill(r / (dim as f64).sqrt());
        let b = f(&x[..dim]).abs();
        if a.max(b) > 1e-9 * interior_scale {
            return Err(Error::ZeroDensityRegion(format!(
                "integrand is {:.3e} at radius {r:.3} beyond the cutoff {radius:.3}",
                a.max(b)
            )));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn cfg(samples: u64) -> McConfig {
        McConfig {
            seed: 42,
            sample_count: samples,
            truncation_radius: 8.0,
            singular_split_radius: 0.5,
        }
    }

    #[test]
    fn indicator_area_in_2d() {
        let f = |x: &[f64]| {
            if x.iter().map(|v| v * v).sum::<f64>() <= 1.0 {
                1.0
            } else {
                0.0
            }
        };
        let est = integrate_mc(f, 2, &cfg(100_000), Importance::UniformBall { radius: 2.0 })
            .unwrap();
        assert!(
            (est.value - PI).abs() <= 3.0 * est.uncertainty,
            "{} +- {}",
            est.value,
            est.uncertainty
        );
        assert!(est.uncertainty > 0.0);
    }

    #[test]
    fn gaussian_integral_in_3d() {
        let f = |x: &[f64]| (-x.iter().map(|v| v * v).sum::<f64>()).exp();
        let est = integrate_mc(
            f,
            3,
            &cfg(200_000),
            Importance::SingularOrigin {
                beta: 0.0,
                radius: 8.0,
            },
        )
        .unwrap();
        let truth = PI.powf(1.5);
        assert!(
            (est.value - truth).abs() <= 3.0 * est.uncertainty,
            "{} vs {truth} +- {}",
            est.value,
            est.uncertainty
        );
    }

    #[test]
    fn zero_integrand_returns_exact_zero() {
        let est = integrate_mc(
            |_: &[f64]| 0.0,
            2,
            &cfg(1000),
            Importance::UniformBall { radius: 1.0 },
        )
        .unwrap();
        assert_eq!(est.value, 0.0);
        assert_eq!(est.uncertainty, 0.0);
    }

    #[test]
    fn determinism_across_runs() {
        let f = |x: &[f64]| (x[0] + 1.5).cos() * (-x.iter().map(|v| v * v).sum::<f64>()).exp();
        let e1 = integrate_mc(f, 2, &cfg(50_000), Importance::UniformBall { radius: 6.0 }).unwrap();
        let e2 = integrate_mc(f, 2, &cfg(50_000), Importance::UniformBall { radius: 6.0 }).unwrap();
        assert_eq!(e1.value.to_bits(), e2.value.to_bits());
        assert_eq!(e1.uncertainty.to_bits(), e2.uncertainty.to_bits());
    }

    #[test]
    fn singular_weight_is_recovered() {
        // int_{B_1} |x|^{-1.2} dx in N=2 equals 2 pi / 0.8
        let f = |x: &[f64]| {
            let r2: f64 = x.iter().map(|v| v * v).sum();
            let r = r2.sqrt();
            if r <= 1.0 && r > 0.0 {
                r.powf(-1.2)
            } else {
                0.0
            }
        };
        let est = integrate_mc(
            f,
            2,
            &cfg(200_000),
            Importance::SingularOrigin {
                beta: 1.2,
                radius: 1.0,
            },
        )
        .unwrap();
        let truth = 2.0 * PI / 0.8;
        assert!(
            (est.value - truth).abs() <= 3.0 * est.uncertainty,
            "{} vs {truth} +- {}",
            est.value,
            est.uncertainty
        );
        assert!(est.uncertainty < 0.02 * truth);
    }

    #[test]
    fn mass_beyond_cutoff_is_detected() {
        let f = |_: &[f64]| 1.0; // constant: clearly nonzero past any cutoff
        let err = integrate_mc(f, 2, &cfg(1000), Importance::UniformBall { radius: 1.0 })
            .unwrap_err();
        assert!(matches!(err, Error::ZeroDensityRegion(_)));
    }
}
