//! Mollifiers, smooth cutoffs, convolution, and the smooth-approximation
//! pipeline `v_n = (u * rho_n) zeta_n`.
//!
//! Convolution is pointwise quadrature over the mollifier ball on a fixed
//! spherical product grid (Gauss-Legendre radially and in the polar angle,
//! trapezoid in the periodic angles), memoized per evaluation point with
//! insert-if-absent semantics so concurrent evaluations stay cheap.

use crate::error::{Error, Result};
use crate::functions::{
    GradientDifferenceField, RadialProfile, SmoothTransition, Smoothness, TestFunction,
};
use crate::norms::gagliardo_field;
use crate::params::Params;
use crate::quadrature::{integrate_radial, Estimate, McConfig};
use dashmap::DashMap;
use std::sync::Arc;

/// Normalized radial bump supported in the closed ball of radius `1/n`:
/// `rho_n(x) = n^N rho(n x)` with `int rho = 1`.
#[derive(Debug, Clone)]
pub struct Mollifier {
    n: u32,
    dim: usize,
    normalizer: f64,
}

fn unnormalized_bump(r: f64) -> f64 {
    if r >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - r * r)).exp()
    }
}

/// Builds the mollifier `rho_n`; the normalization constant is computed once
/// per dimension by radial quadrature (target 1e-10).
pub fn mollifier(n: u32, dim: usize) -> Result<Mollifier> {
    if n < 1 {
        return Err(Error::ConstraintViolation {
            name: "mollifier-index",
            value: n as f64,
            bound: "n >= 1".into(),
        });
    }
    let base_mass = integrate_radial(unnormalized_bump, 0.0, dim, Some(1.0))?;
    Ok(Mollifier {
        n,
        dim,
        normalizer: 1.0 / base_mass.value,
    })
}

impl Mollifier {
    pub fn index(&self) -> u32 {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn support_radius(&self) -> f64 {
        1.0 / self.n as f64
    }

    /// `rho_n(x)` as a function of `r = |x|`.
    pub fn profile(&self, r: f64) -> f64 {
        let n = self.n as f64;
        n.powi(self.dim as i32) * self.normalizer * unnormalized_bump(n * r)
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.profile(x.iter().map(|v| v * v).sum::<f64>().sqrt())
    }

    /// `int rho_n`, recomputed by radial quadrature as an independent check.
    pub fn mass(&self) -> Result<Estimate> {
        let clone = self.clone();
        integrate_radial(
            move |r| clone.profile(r),
            0.0,
            self.dim,
            Some(self.support_radius()),
        )
    }
}

/// Smooth cutoff `zeta_n(x) = T(|x|/n)`: identically 1 on `B_n`, zero
/// outside `B_{2n}`, with `|grad zeta_n| <= C/n` and a Hessian bound `C/n^2`
/// inherited from the fixed transition `T`.
#[derive(Debug, Clone, Copy)]
pub struct Cutoff {
    n: u32,
    dim: usize,
}

pub fn cutoff(n: u32, dim: usize) -> Result<Cutoff> {
    if n < 1 {
        return Err(Error::ConstraintViolation {
            name: "cutoff-index",
            value: n as f64,
            bound: "n >= 1".into(),
        });
    }
    Ok(Cutoff { n, dim })
}

impl Cutoff {
    pub fn index(&self) -> u32 {
        self.n
    }

    pub fn plateau_radius(&self) -> f64 {
        self.n as f64
    }

    pub fn support_radius(&self) -> f64 {
        2.0 * self.n as f64
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        SmoothTransition::shared().value(r / self.n as f64)
    }

    pub fn grad_into(&self, x: &[f64], out: &mut [f64]) {
        let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        let n = self.n as f64;
        let scaled = r / n;
        if !(1.0..2.0).contains(&scaled) || r == 0.0 {
            out[..self.dim].fill(0.0);
            return;
        }
        let c = SmoothTransition::shared().derivative(scaled) / (n * r);
        for (o, xi) in out[..self.dim].iter_mut().zip(x) {
            *o = c * xi;
        }
    }

    pub fn grad_norm(&self, x: &[f64]) -> f64 {
        let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        let n = self.n as f64;
        SmoothTransition::shared().derivative(r / n).abs() / n
    }

    /// Radial and tangential second-derivative magnitudes at radius `r`;
    /// both are bounded by `C/n^2` for the fixed transition.
    pub fn second_derivative_terms(&self, r: f64) -> (f64, f64) {
        let n = self.n as f64;
        let scaled = r / n;
        let t = SmoothTransition::shared();
        let radial = t.second_derivative(scaled).abs() / (n * n);
        let tangential = if scaled > 0.0 {
            t.derivative(scaled).abs() / (n * n * scaled)
        } else {
            0.0
        };
        (radial, tangential)
    }
}

// ---------------------------------------------------------------------------
// Convolution
// ---------------------------------------------------------------------------

/// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration on the
/// Legendre recurrence.
fn gauss_legendre(count: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; count];
    let mut weights = vec![0.0; count];
    let n = count as f64;
    for i in 0..count {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n + 0.5)).cos();
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=count {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let dp = n * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (mut p0, mut p1) = (1.0, x);
        for k in 2..=count {
            let kf = k as f64;
            let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
            p0 = p1;
            p1 = p2;
        }
        let dp = n * (x * p1 - p0) / (x * x - 1.0);
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

const RADIAL_NODES: usize = 16;
const POLAR_NODES: usize = 12;
const ANGULAR_NODES: usize = 24;

/// Quadrature stencil for integration against `rho_n(z) dz` over `B_{1/n}`.
/// Discrete weights are normalized to unit mass, so constants convolve
/// exactly.
struct MollifierStencil {
    offsets: Vec<Vec<f64>>,
    weights: Vec<f64>,
}

fn build_stencil(m: &Mollifier) -> MollifierStencil {
    let dim = m.dim();
    let radius = m.support_radius();
    let (rad_nodes, rad_weights) = gauss_legendre(RADIAL_NODES);
    let mut offsets = Vec::new();
    let mut weights = Vec::new();
    for (rn, rw) in rad_nodes.iter().zip(&rad_weights) {
        let r = radius * 0.5 * (rn + 1.0);
        let jac = radius * 0.5 * rw * m.profile(r) * r.powi(dim as i32 - 1);
        match dim {
            1 => {
                for sign in [-1.0, 1.0] {
                    offsets.push(vec![sign * r]);
                    weights.push(jac);
                }
            }
            2 => {
                let dtheta = std::f64::consts::TAU / ANGULAR_NODES as f64;
                for k in 0..ANGULAR_NODES {
                    let theta = dtheta * k as f64;
                    offsets.push(vec![r * theta.cos(), r * theta.sin()]);
                    weights.push(jac * dtheta);
                }
            }
            3 => {
                let (cos_nodes, cos_weights) = gauss_legendre(POLAR_NODES);
                let dphi = std::f64::consts::TAU / ANGULAR_NODES as f64;
                for (cn, cw) in cos_nodes.iter().zip(&cos_weights) {
                    let sin_theta = (1.0 - cn * cn).sqrt();
                    for k in 0..ANGULAR_NODES {
                        let phi = dphi * k as f64;
                        offsets.push(vec![
                            r * sin_theta * phi.cos(),
                            r * sin_theta * phi.sin(),
                            r * cn,
                        ]);
                        weights.push(jac * cw * dphi);
                    }
                }
            }
            _ => panic!("convolution supports dimensions 1 through 3"),
        }
    }
    let total: f64 = weights.iter().sum();
    for w in weights.iter_mut() {
        *w /= total;
    }
    MollifierStencil { offsets, weights }
}

type MemoKey = [u64; 8];
type MemoValue = (f64, [f64; 8]);

struct Convolution {
    base: TestFunction,
    stencil: MollifierStencil,
    memo: DashMap<MemoKey, MemoValue>,
}

impl Convolution {
    fn key(x: &[f64]) -> MemoKey {
        let mut key = [0u64; 8];
        for (slot, v) in key.iter_mut().zip(x) {
            *slot = v.to_bits();
        }
        key
    }

    /// Value and gradient of `u * rho_n` at `x` in one pass.
    fn eval(&self, x: &[f64]) -> MemoValue {
        let key = Self::key(x);
        if let Some(hit) = self.memo.get(&key) {
            return *hit;
        }
        let dim = self.base.dim();
        let mut value = 0.0;
        let mut grad = [0.0f64; 8];
        let mut point = [0.0f64; 8];
        let mut gbuf = [0.0f64; 8];
        for (offset, w) in self.stencil.offsets.iter().zip(&self.stencil.weights) {
            for i in 0..dim {
                point[i] = x[i] - offset[i];
            }
            value += w * self.base.eval(&point[..dim]);
            self.base.grad_into(&point[..dim], &mut gbuf[..dim]);
            for i in 0..dim {
                grad[i] += w * gbuf[i];
            }
        }
        let entry = (value, grad);
        self.memo.insert(key, entry);
        entry
    }
}

struct ConvolvedProfile {
    conv: Arc<Convolution>,
    dim: usize,
}

impl RadialProfile for ConvolvedProfile {
    fn value(&self, r: f64) -> f64 {
        let mut x = [0.0f64; 8];
        x[0] = r;
        self.conv.eval(&x[..self.dim]).0
    }
    fn derivative(&self, r: f64) -> f64 {
        let mut x = [0.0f64; 8];
        x[0] = r;
        self.conv.eval(&x[..self.dim]).1[0]
    }
}

/// `(u * rho_n)` as a new test function with quadrature-evaluated value and
/// gradient (`grad (u * rho_n) = (grad u) * rho_n`), memoized per point.
pub fn convolve(u: &TestFunction, m: &Mollifier) -> Result<TestFunction> {
    if !u.is_smooth() {
        return Err(Error::RearrangementOnlyFunction(u.name().to_string()));
    }
    assert_eq!(u.dim(), m.dim(), "dimension mismatch");
    let dim = u.dim();
    let conv = Arc::new(Convolution {
        base: u.clone(),
        stencil: build_stencil(m),
        memo: DashMap::new(),
    });
    let support = u.support_radius().map(|r| r + m.support_radius());
    let radial = u.radial();
    let profile = radial.then(|| {
        Arc::new(ConvolvedProfile {
            conv: conv.clone(),
            dim,
        }) as Arc<dyn RadialProfile>
    });
    let conv_eval = conv.clone();
    let conv_grad = conv.clone();
    Ok(TestFunction::from_parts(
        format!("{}*rho_{}", u.name(), m.index()),
        dim,
        if support.is_some() {
            Smoothness::CcInfinity
        } else {
            Smoothness::SmoothDecay
        },
        support,
        radial,
        profile,
        Arc::new(move |x: &[f64]| conv_eval.eval(x).0),
        Arc::new(move |x: &[f64], out: &mut [f64]| {
            let (_, grad) = conv_grad.eval(x);
            out.copy_from_slice(&grad[..x.len()]);
        }),
    ))
}

/// `v_n = (u * rho_n) zeta_n` with the product-rule gradient
/// `(grad u * rho_n) zeta_n + (u * rho_n) grad zeta_n`, plus the seminorm
/// residual `[u - v_n]_{s,p,a}` measured on the gradients.
pub fn approximation_sequence(
    u: &TestFunction,
    n: u32,
    params: &Params,
    cfg: &McConfig,
) -> Result<(TestFunction, Estimate)> {
    let v = approximation_step(u, n)?;
    let residual_field = GradientDifferenceField { left: u, right: &v };
    let residual = gagliardo_field(&residual_field, params.sigma(), params.p(), params.a(), cfg)?;
    Ok((v, residual))
}

/// The approximant `v_n` alone (no residual quadrature).
pub fn approximation_step(u: &TestFunction, n: u32) -> Result<TestFunction> {
    let dim = u.dim();
    let m = mollifier(n, dim)?;
    let z = cutoff(n, dim)?;
    let smoothed = convolve(u, &m)?;
    let support = smoothed
        .support_radius()
        .map_or(z.support_radius(), |r| r.min(z.support_radius()));
    let eval_inner = smoothed.clone();
    let grad_inner = smoothed.clone();
    let radial = u.radial();
    let profile = (radial && smoothed.profile().is_some()).then(|| {
        let inner = smoothed.profile().unwrap().clone();
        Arc::new(CutoffProductProfile { inner, cutoff: z }) as Arc<dyn RadialProfile>
    });
    Ok(TestFunction::from_parts(
        format!("({})zeta_{}", smoothed.name(), n),
        dim,
        Smoothness::CcInfinity,
        Some(support),
        radial,
        profile,
        Arc::new(move |x: &[f64]| eval_inner.eval(x) * z.eval(x)),
        Arc::new(move |x: &[f64], out: &mut [f64]| {
            let dim = x.len();
            grad_inner.grad_into(x, out);
            let zeta = z.eval(x);
            let value = grad_inner.eval(x);
            let mut zgrad = [0.0f64; 8];
            z.grad_into(x, &mut zgrad[..dim]);
            for i in 0..dim {
                out[i] = out[i] * zeta + value * zgrad[i];
            }
        }),
    ))
}

struct CutoffProductProfile {
    inner: Arc<dyn RadialProfile>,
    cutoff: Cutoff,
}

impl RadialProfile for CutoffProductProfile {
    fn value(&self, r: f64) -> f64 {
        let mut x = [0.0f64; 8];
        x[0] = r;
        self.inner.value(r) * self.cutoff.eval(&x[..self.cutoff.dim])
    }
    fn derivative(&self, r: f64) -> f64 {
        let n = self.cutoff.n as f64;
        let t = SmoothTransition::shared();
        self.inner.derivative(r) * t.value(r / n) + self.inner.value(r) * t.derivative(r / n) / n
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functions::{bump, gaussian, plateau_bump};
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn mollifier_mass_is_one() {
        for dim in [2usize, 3] {
            for n in [1u32, 2, 4, 8] {
                let m = mollifier(n, dim).unwrap();
                let mass = m.mass().unwrap();
                assert!(
                    (mass.value - 1.0).abs() <= 1e-8,
                    "dim {dim} n {n}: mass {}",
                    mass.value
                );
            }
        }
    }

    #[test]
    fn mollifier_support_and_scaling() {
        let m1 = mollifier(1, 2).unwrap();
        let m2 = mollifier(2, 2).unwrap();
        assert_eq!(m2.eval(&[0.51, 0.0]), 0.0);
        assert_eq!(m2.eval(&[0.0, 0.505]), 0.0);
        // rho_2(0) = 2^N rho_1(0)
        let ratio = m2.eval(&[0.0, 0.0]) / m1.eval(&[0.0, 0.0]);
        assert!((ratio - 4.0).abs() < 1e-12);
    }

    #[test]
    fn cutoff_plateau_and_support() {
        for n in [1u32, 3] {
            let z = cutoff(n, 2).unwrap();
            let nf = n as f64;
            assert_eq!(z.eval(&[0.5 * nf, 0.0]), 1.0);
            assert_eq!(z.eval(&[0.0, 2.5 * nf]), 0.0);
            let mid = z.eval(&[1.5 * nf, 0.0]);
            assert!(mid > 0.0 && mid < 1.0);
        }
    }

    #[test]
    fn cutoff_gradient_rescales_exactly() {
        // max |grad zeta_n| * n is constant in n
        let sup_scaled = |n: u32| {
            let z = cutoff(n, 2).unwrap();
            let mut best: f64 = 0.0;
            for k in 0..400 {
                let r = n as f64 * (1.0 + k as f64 / 400.0);
                best = best.max(z.grad_norm(&[r, 0.0]) * n as f64);
            }
            best
        };
        let a = sup_scaled(1);
        let b = sup_scaled(4);
        assert!((a - b).abs() <= 1e-9 * a, "{a} vs {b}");
        assert!(a > 0.0);
    }

    #[test]
    fn cutoff_derivative_bounds_scale_with_n() {
        // sampled sup of |grad| * n and of the second-derivative terms * n^2
        // match the fixed-transition constants
        let t = SmoothTransition::shared();
        let mut c1: f64 = 0.0;
        let mut c2: f64 = 0.0;
        for k in 0..=1000 {
            let r = 1.0 + k as f64 / 1000.0;
            c1 = c1.max(t.derivative(r).abs());
            c2 = c2.max(t.second_derivative(r).abs() + t.derivative(r).abs() / r);
        }
        for n in [2u32, 8] {
            let z = cutoff(n, 3).unwrap();
            let nf = n as f64;
            for k in 0..200 {
                let r = nf * (1.0 + k as f64 / 200.0);
                assert!(z.grad_norm(&[r, 0.0, 0.0]) <= c1 / nf * (1.0 + 1e-12));
                let (radial, tangential) = z.second_derivative_terms(r);
                assert!(radial + tangential <= c2 / (nf * nf) * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn convolving_the_plateau_keeps_constants() {
        // plateau_bump is identically 1 on B_1; with n = 8 the mollified
        // value at |x| <= 1 - 1/8 is exactly 1 (normalized stencil)
        let u = plateau_bump(2);
        let m = mollifier(8, 2).unwrap();
        let c = convolve(&u, &m).unwrap();
        for x in [[0.0, 0.0], [0.5, 0.3], [0.0, 0.87]] {
            assert!((c.eval(&x) - 1.0).abs() < 1e-12, "{x:?}: {}", c.eval(&x));
        }
        assert_eq!(c.support_radius(), Some(2.0 + 1.0 / 8.0));
    }

    #[test]
    fn convolution_is_a_sup_norm_contraction() {
        let u = bump(2);
        let m = mollifier(2, 2).unwrap();
        let c = convolve(&u, &m).unwrap();
        let max_u = u.eval(&[0.0, 0.0]);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let x = [rng.gen_range(-1.6..1.6), rng.gen_range(-1.6..1.6)];
            assert!(c.eval(&x) <= max_u + 1e-9);
        }
    }

    #[test]
    fn convolution_error_is_lipschitz_over_n() {
        let u = bump(2);
        // Lipschitz constant of the bump from its sampled gradient
        let mut lipschitz: f64 = 0.0;
        for k in 0..400 {
            let x = [k as f64 / 400.0, 0.0];
            lipschitz = lipschitz.max(u.grad_norm(&x));
        }
        for n in [2u32, 4, 8] {
            let m = mollifier(n, 2).unwrap();
            let c = convolve(&u, &m).unwrap();
            let mut worst: f64 = 0.0;
            for k in 0..100 {
                let x = [-1.2 + 2.4 * k as f64 / 100.0, 0.1];
                worst = worst.max((u.eval(&x) - c.eval(&x)).abs());
            }
            assert!(
                worst <= lipschitz / n as f64 + 1e-9,
                "n={n}: {worst} vs {}",
                lipschitz / n as f64
            );
        }
    }

    #[test]
    fn convolution_commutes_with_translation() {
        let u = gaussian(2);
        let m = mollifier(2, 2).unwrap();
        let c = convolve(&u, &m).unwrap();
        let shift = [0.3, -0.4];
        let translated = TestFunction::from_parts(
            "gaussian-shift".into(),
            2,
            Smoothness::SmoothDecay,
            None,
            false,
            None,
            {
                let u = u.clone();
                Arc::new(move |x: &[f64]| u.eval(&[x[0] - shift[0], x[1] - shift[1]]))
            },
            {
                let u = u.clone();
                Arc::new(move |x: &[f64], out: &mut [f64]| {
                    u.grad_into(&[x[0] - shift[0], x[1] - shift[1]], out)
                })
            },
        );
        let ct = convolve(&translated, &m).unwrap();
        for x in [[0.0, 0.0], [0.7, 0.2], [-0.4, 0.9]] {
            let direct = c.eval(&[x[0] - shift[0], x[1] - shift[1]]);
            let shifted = ct.eval(&x);
            assert!((direct - shifted).abs() < 1e-10, "{direct} vs {shifted}");
        }
    }

    #[test]
    fn convolution_gradient_matches_finite_differences() {
        let u = bump(2);
        let m = mollifier(2, 2).unwrap();
        let c = convolve(&u, &m).unwrap();
        let h = 1e-4;
        for x in [[0.2, 0.1], [-0.5, 0.4], [0.9, -0.3]] {
            let g = c.grad(&x);
            for i in 0..2 {
                let mut xp = x;
                let mut xm = x;
                xp[i] += h;
                xm[i] -= h;
                let fd = (c.eval(&xp) - c.eval(&xm)) / (2.0 * h);
                assert!(
                    (g[i] - fd).abs() <= 1e-4 * (1.0 + g[i].abs()),
                    "{x:?} comp {i}: {} vs {fd}",
                    g[i]
                );
            }
        }
    }

    #[test]
    fn cutoff_is_inactive_on_compactly_supported_input() {
        // supp(u * rho_2) = B_{1.5} sits inside the plateau B_2 of zeta_2
        let u = bump(2);
        let m = mollifier(2, 2).unwrap();
        let c = convolve(&u, &m).unwrap();
        let v = approximation_step(&u, 2).unwrap();
        for x in [[0.0, 0.0], [0.9, 0.4], [1.2, -0.6]] {
            assert_eq!(v.eval(&x), c.eval(&x));
        }
    }

    #[test]
    fn zero_function_has_zero_residual() {
        let params = Params::new_unchecked(2, 1.3, 1.4, 0.1);
        let z = TestFunction::zero(2);
        let cfg = McConfig::default_for(2).with_samples(2000);
        let (_, residual) = approximation_sequence(&z, 2, &params, &cfg).unwrap();
        assert_eq!(residual.value, 0.0);
    }
}
