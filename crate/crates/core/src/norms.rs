//! Weighted Lebesgue norms, Gagliardo seminorms, and the homogeneous norm,
//! built on the quadrature engines.
//!
//! Radial functions take the deterministic radial path; everything else goes
//! through Monte Carlo. Gradients are exact closed forms from the catalog, so
//! quadrature error is the only error source.

use crate::error::{Error, Result};
use crate::functions::{
    GradientComponentField, GradientField, ScalarField, TestFunction, VectorField,
};
use crate::params::Params;
use crate::quadrature::{
    gagliardo_mc, integrate_mc, integrate_radial, Estimate, GagliardoImportance, Importance,
    McConfig,
};
use serde::Serialize;

/// Selector for one norm kind, as surfaced through the CLI.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NormSpec {
    /// `( int |u|^q |x|^{-beta} dx )^{1/q}`.
    WeightedLp { q: f64, beta: f64 },
    /// Gagliardo seminorm of order `t in (0,1)` applied to u itself.
    Gagliardo { t: f64 },
    /// `|| grad u ||_{L^{p*_sigma}_a} + [u]_{s,p,a}`.
    Homogeneous,
}

impl NormSpec {
    /// Parses `weighted_lp:q=2,beta=0.5`, `gagliardo:t=0.3`, `homogeneous`.
    pub fn parse(text: &str) -> Result<Self> {
        let unknown = || Error::Unsupported(format!("unknown norm spec `{text}`"));
        let (kind, rest) = match text.split_once(':') {
            Some((k, r)) => (k.trim(), r.trim()),
            None => (text.trim(), ""),
        };
        let lookup = |key: &str| -> Result<f64> {
            for part in rest.split(',') {
                if let Some((k, v)) = part.split_once('=') {
                    if k.trim() == key {
                        return v.trim().parse().map_err(|_| unknown());
                    }
                }
            }
            Err(unknown())
        };
        match kind {
            "weighted_lp" => Ok(NormSpec::WeightedLp {
                q: lookup("q")?,
                beta: lookup("beta").unwrap_or(0.0),
            }),
            "gagliardo" => Ok(NormSpec::Gagliardo { t: lookup("t")? }),
            "homogeneous" => Ok(NormSpec::Homogeneous),
            _ => Err(unknown()),
        }
    }

    pub fn evaluate(&self, u: &TestFunction, params: &Params, cfg: &McConfig) -> Result<Estimate> {
        match *self {
            NormSpec::WeightedLp { q, beta } => weighted_lp(u, q, beta, cfg),
            NormSpec::Gagliardo { t } => gagliardo_fn(u, t, params.p(), params.a(), cfg),
            NormSpec::Homogeneous => Ok(homogeneous_norm(u, params, cfg)?.total),
        }
    }
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// `( int |u(x)|^q |x|^{-beta} dx )^{1/q}`; radial path when `u` is radial,
/// Monte Carlo otherwise. Accepts every catalog entry, including the
/// rearrangement-only ones.
pub fn weighted_lp(u: &TestFunction, q: f64, beta: f64, cfg: &McConfig) -> Result<Estimate> {
    if q < 1.0 {
        return Err(Error::ConstraintViolation {
            name: "lp-exponent",
            value: q,
            bound: "q >= 1".into(),
        });
    }
    if let Some(profile) = u.profile() {
        if u.radial() {
            let p = profile.clone();
            let integral = integrate_radial(
                move |r| p.value(r).abs().powf(q),
                beta,
                u.dim(),
                u.support_radius(),
            )?;
            return Ok(integral.powf(1.0 / q));
        }
    }
    weighted_lp_mc(u, q, beta, cfg)
}

/// Monte Carlo path of [`weighted_lp`], also exposed for radial/MC agreement
/// checks.
pub fn weighted_lp_mc(u: &TestFunction, q: f64, beta: f64, cfg: &McConfig) -> Result<Estimate> {
    let radius = u.support_radius().unwrap_or(cfg.truncation_radius);
    let importance = if beta > 0.0 {
        Importance::SingularOrigin { beta, radius }
    } else {
        Importance::UniformBall { radius }
    };
    let integral = integrate_mc(
        |x: &[f64]| {
            let v = u.eval(x).abs();
            if v == 0.0 {
                return 0.0;
            }
            let vq = v.powf(q);
            if beta == 0.0 {
                vq
            } else {
                vq * norm(x).powf(-beta)
            }
        },
        u.dim(),
        cfg,
        importance,
    )?;
    Ok(integral.powf(1.0 / q))
}

/// `( int |grad u(x)|^q |x|^{-beta} dx )^{1/q}` with the exact gradient.
pub fn weighted_lp_grad(u: &TestFunction, q: f64, beta: f64, cfg: &McConfig) -> Result<Estimate> {
    if q < 1.0 {
        return Err(Error::ConstraintViolation {
            name: "lp-exponent",
            value: q,
            bound: "q >= 1".into(),
        });
    }
    if let Some(profile) = u.profile() {
        if u.radial() {
            // |grad u(x)| = |h'(|x|)| for radial u
            let p = profile.clone();
            let integral = integrate_radial(
                move |r| p.derivative(r).abs().powf(q),
                beta,
                u.dim(),
                u.support_radius(),
            )?;
            return Ok(integral.powf(1.0 / q));
        }
    }
    let radius = u.support_radius().unwrap_or(cfg.truncation_radius);
    let importance = if beta > 0.0 {
        Importance::SingularOrigin { beta, radius }
    } else {
        Importance::UniformBall { radius }
    };
    let dim = u.dim();
    let integral = integrate_mc(
        |x: &[f64]| {
            let mut buf = [0.0f64; 8];
            u.grad_into(x, &mut buf[..dim]);
            let v = norm(&buf[..dim]);
            if v == 0.0 {
                return 0.0;
            }
            let vq = v.powf(q);
            if beta == 0.0 {
                vq
            } else {
                vq * norm(x).powf(-beta)
            }
        },
        dim,
        cfg,
        importance,
    )?;
    Ok(integral.powf(1.0 / q))
}

/// Gagliardo seminorm of order `t in (0,1)` of a vector field, with the
/// per-variable weights `|x|^{-a} |y|^{-a}`:
/// `( iint |F(x)-F(y)|^p / |x-y|^{N+tp} dx/|x|^a dy/|y|^a )^{1/p}`.
/// Differences are measured in the Euclidean norm.
pub fn gagliardo_field(
    field: &dyn VectorField,
    t: f64,
    p: f64,
    a: f64,
    cfg: &McConfig,
) -> Result<Estimate> {
    if !(t > 0.0 && t < 1.0) {
        return Err(Error::ConstraintViolation {
            name: "gagliardo-order",
            value: t,
            bound: "0 < t < 1".into(),
        });
    }
    if p < 1.0 {
        return Err(Error::ConstraintViolation {
            name: "gagliardo-exponent",
            value: p,
            bound: "p >= 1".into(),
        });
    }
    let dim = field.dim();
    let comps = field.components();
    let kernel = dim as f64 + t * p;
    let imp = GagliardoImportance {
        kernel_exponent: kernel,
        difference_power: p,
        holder_order: 1.0,
        weight_exponent: a,
        x_radius: field.support_radius().unwrap_or(cfg.truncation_radius),
    };
    let integral = gagliardo_mc(
        |x: &[f64], z: &[f64]| {
            let mut y = [0.0f64; 8];
            for i in 0..dim {
                y[i] = x[i] + z[i];
            }
            let mut fx = [0.0f64; 8];
            let mut fy = [0.0f64; 8];
            field.eval_into(x, &mut fx[..comps]);
            field.eval_into(&y[..dim], &mut fy[..comps]);
            let mut diff_sq = 0.0;
            for i in 0..comps {
                let d = fx[i] - fy[i];
                diff_sq += d * d;
            }
            if diff_sq == 0.0 {
                return 0.0;
            }
            let rz = norm(z);
            let mut value = diff_sq.sqrt().powf(p) * rz.powf(-kernel);
            if a != 0.0 {
                let rx = norm(x);
                let ry = norm(&y[..dim]);
                if rx == 0.0 || ry == 0.0 {
                    return 0.0;
                }
                value *= (rx * ry).powf(-a);
            }
            value
        },
        dim,
        &imp,
        cfg,
    )?;
    Ok(integral.powf(1.0 / p))
}

fn require_smooth(u: &TestFunction) -> Result<()> {
    if u.is_smooth() {
        Ok(())
    } else {
        Err(Error::RearrangementOnlyFunction(u.name().to_string()))
    }
}

/// `[u]_{t,p,a}` on u itself (scalar differences).
pub fn gagliardo_fn(u: &TestFunction, t: f64, p: f64, a: f64, cfg: &McConfig) -> Result<Estimate> {
    require_smooth(u)?;
    gagliardo_field(&ScalarField(u), t, p, a, cfg)
}

/// `[u]_{s,p,a}` as defined on the gradient: order `t = sigma` differences of
/// `grad u` in the Euclidean norm.
pub fn gagliardo_grad(u: &TestFunction, t: f64, p: f64, a: f64, cfg: &McConfig) -> Result<Estimate> {
    require_smooth(u)?;
    gagliardo_field(&GradientField(u), t, p, a, cfg)
}

/// Componentwise variant: `( sum_i [du/dx_i]_{t,p,a}^p )^{1/p}`. The
/// elementary power bounds relate it to the Euclidean-norm seminorm; it
/// exists so that relation can be checked, not as the primary definition.
pub fn gagliardo_componentwise(
    u: &TestFunction,
    t: f64,
    p: f64,
    a: f64,
    cfg: &McConfig,
) -> Result<Estimate> {
    require_smooth(u)?;
    let mut total: Option<Estimate> = None;
    for component in 0..u.dim() {
        let field = GradientComponentField {
            function: u,
            component,
        };
        let part = gagliardo_field(&field, t, p, a, cfg)?.powf(p);
        total = Some(match total {
            None => part,
            Some(acc) => acc.add(part),
        });
    }
    Ok(total.expect("dim >= 1").powf(1.0 / p))
}

/// The homogeneous norm split into its two summands; `total` is their exact
/// sum with uncertainties combined in quadrature.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct HomogeneousNorm {
    pub total: Estimate,
    pub gradient_term: Estimate,
    pub seminorm_term: Estimate,
}

/// `||u|| = || grad u ||_{L^{p*_sigma}_a} + [u]_{s,p,a}`.
pub fn homogeneous_norm(
    u: &TestFunction,
    params: &Params,
    cfg: &McConfig,
) -> Result<HomogeneousNorm> {
    require_smooth(u)?;
    let p_star_sigma = params.p_star_sigma();
    let beta = 2.0 * params.a() * p_star_sigma / params.p();
    let gradient_term = weighted_lp_grad(u, p_star_sigma, beta, cfg)?;
    let seminorm_term = gagliardo_grad(u, params.sigma(), params.p(), params.a(), cfg)?;
    Ok(HomogeneousNorm {
        total: gradient_term.add(seminorm_term),
        gradient_term,
        seminorm_term,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functions::{ball_indicator, bump, gaussian, plateau_bump, poly_bump, scale};
    use crate::params::unit_ball_volume;
    use std::f64::consts::PI;

    fn cfg2() -> McConfig {
        McConfig::default_for(2).with_samples(60_000)
    }

    #[test]
    fn indicator_l2_norm_is_sqrt_ball_volume() {
        let u = ball_indicator(3, 1.0);
        let est = weighted_lp(&u, 2.0, 0.0, &McConfig::default_for(3)).unwrap();
        assert!((est.value - unit_ball_volume(3).sqrt()).abs() < 1e-9);
        assert_eq!(est.uncertainty, 0.0);
    }

    #[test]
    fn gaussian_l2_norm_in_2d() {
        let u = gaussian(2);
        let est = weighted_lp(&u, 2.0, 0.0, &cfg2()).unwrap();
        assert!((est.value - (PI / 2.0).sqrt()).abs() < 1e-9);
    }

    #[test]
    fn weighted_lp_scaling_law_holds_deterministically() {
        // ||u_lambda||_{p,a}^p = lambda^{a-N} ||u||_{p,a}^p for kappa = 0
        let (p, a, lambda) = (1.6, 0.25, 2.0f64);
        let u = bump(3);
        let cfg = McConfig::default_for(3);
        let base = weighted_lp(&u, p, a, &cfg).unwrap().powf(p);
        let scaledf = scale(&u, lambda, 0.0);
        let scaled = weighted_lp(&scaledf, p, a, &cfg).unwrap().powf(p);
        let predicted = lambda.powf(a - 3.0) * base.value;
        assert!(
            (scaled.value - predicted).abs() < 1e-7 * predicted.abs(),
            "{} vs {predicted}",
            scaled.value
        );
    }

    #[test]
    fn radial_and_mc_weighted_lp_agree() {
        for (u, beta) in [(bump(2), 0.0), (bump(2), 0.7), (gaussian(2), 0.3)] {
            let radial = weighted_lp(&u, 1.6, beta, &cfg2()).unwrap();
            let mc = weighted_lp_mc(&u, 1.6, beta, &cfg2()).unwrap();
            assert!(
                (radial.value - mc.value).abs() <= 3.0 * mc.uncertainty,
                "{} vs {} +- {}",
                radial.value,
                mc.value,
                mc.uncertainty
            );
        }
    }

    struct ConstField {
        dim: usize,
    }
    impl VectorField for ConstField {
        fn dim(&self) -> usize {
            self.dim
        }
        fn components(&self) -> usize {
            1
        }
        fn eval_into(&self, _x: &[f64], out: &mut [f64]) {
            out[0] = 3.25;
        }
        fn support_radius(&self) -> Option<f64> {
            Some(1.0)
        }
    }

    #[test]
    fn constant_field_has_zero_seminorm() {
        let est = gagliardo_field(&ConstField { dim: 2 }, 0.3, 1.4, 0.1, &cfg2()).unwrap();
        assert_eq!(est.value, 0.0);
        assert_eq!(est.uncertainty, 0.0);
    }

    #[test]
    fn rearrangement_only_entries_are_rejected() {
        let g = ball_indicator(2, 1.0);
        let err = gagliardo_fn(&g, 0.3, 1.4, 0.1, &cfg2()).unwrap_err();
        assert!(matches!(err, Error::RearrangementOnlyFunction(_)));
    }

    #[test]
    fn order_outside_unit_interval_is_rejected() {
        let u = bump(2);
        assert!(gagliardo_fn(&u, 1.0, 1.4, 0.1, &cfg2()).is_err());
        assert!(gagliardo_fn(&u, 0.0, 1.4, 0.1, &cfg2()).is_err());
    }

    struct AmplifiedField<'a> {
        inner: ScalarField<'a>,
        c: f64,
    }
    impl VectorField for AmplifiedField<'_> {
        fn dim(&self) -> usize {
            self.inner.dim()
        }
        fn components(&self) -> usize {
            1
        }
        fn eval_into(&self, x: &[f64], out: &mut [f64]) {
            self.inner.eval_into(x, out);
            out[0] *= self.c;
        }
        fn support_radius(&self) -> Option<f64> {
            self.inner.support_radius()
        }
    }

    #[test]
    fn absolute_homogeneity_within_uncertainty() {
        let u = bump(2);
        let cfg = cfg2();
        let base = gagliardo_fn(&u, 0.3, 1.4, 0.1, &cfg).unwrap();
        for c in [-2.0, 0.5] {
            let field = AmplifiedField {
                inner: ScalarField(&u),
                c,
            };
            let scaled = gagliardo_field(&field, 0.3, 1.4, 0.1, &cfg).unwrap();
            let predicted = c.abs() * base.value;
            let tol = 3.0 * (scaled.uncertainty + c.abs() * base.uncertainty);
            assert!(
                (scaled.value - predicted).abs() <= tol,
                "c={c}: {} vs {predicted} tol {tol}",
                scaled.value
            );
        }
    }

    struct SumField<'a> {
        left: ScalarField<'a>,
        right: ScalarField<'a>,
    }
    impl VectorField for SumField<'_> {
        fn dim(&self) -> usize {
            self.left.dim()
        }
        fn components(&self) -> usize {
            1
        }
        fn eval_into(&self, x: &[f64], out: &mut [f64]) {
            let mut buf = [0.0f64];
            self.left.eval_into(x, out);
            self.right.eval_into(x, &mut buf);
            out[0] += buf[0];
        }
        fn support_radius(&self) -> Option<f64> {
            match (self.left.support_radius(), self.right.support_radius()) {
                (Some(a), Some(b)) => Some(a.max(b)),
                _ => None,
            }
        }
    }

    #[test]
    fn triangle_inequality_statistically() {
        let u = bump(2);
        let v = plateau_bump(2);
        let cfg = cfg2();
        let (t, p, a) = (0.3, 1.4, 0.1);
        let sum_field = SumField {
            left: ScalarField(&u),
            right: ScalarField(&v),
        };
        let s = gagliardo_field(&sum_field, t, p, a, &cfg).unwrap();
        let su = gagliardo_fn(&u, t, p, a, &cfg).unwrap();
        let sv = gagliardo_fn(&v, t, p, a, &cfg).unwrap();
        let slack = 3.0 * (s.uncertainty + su.uncertainty + sv.uncertainty);
        assert!(
            s.value <= su.value + sv.value + slack,
            "{} vs {} + {}",
            s.value,
            su.value,
            sv.value
        );
    }

    struct RotatedField<'a> {
        inner: ScalarField<'a>,
    }
    impl VectorField for RotatedField<'_> {
        fn dim(&self) -> usize {
            2
        }
        fn components(&self) -> usize {
            1
        }
        fn eval_into(&self, x: &[f64], out: &mut [f64]) {
            let rotated = [-x[1], x[0]];
            self.inner.eval_into(&rotated, out);
        }
        fn support_radius(&self) -> Option<f64> {
            self.inner.support_radius()
        }
    }

    #[test]
    fn seminorm_is_rotation_invariant_within_uncertainty() {
        let u = poly_bump(2);
        let cfg = cfg2();
        let direct = gagliardo_fn(&u, 0.3, 1.4, 0.1, &cfg).unwrap();
        let rotated = gagliardo_field(
            &RotatedField {
                inner: ScalarField(&u),
            },
            0.3,
            1.4,
            0.1,
            &cfg,
        )
        .unwrap();
        let tol = 3.0 * (direct.uncertainty + rotated.uncertainty);
        assert!(
            (direct.value - rotated.value).abs() <= tol,
            "{} vs {}",
            direct.value,
            rotated.value
        );
    }

    #[test]
    fn homogeneous_norm_total_is_exact_sum() {
        let params = Params::new_unchecked(2, 1.3, 1.4, 0.1);
        let u = bump(2);
        let h = homogeneous_norm(&u, &params, &cfg2()).unwrap();
        assert_eq!(h.total.value, h.gradient_term.value + h.seminorm_term.value);
        assert!(h.total.value > 0.0);
    }

    #[test]
    fn homogeneous_norm_of_zero_is_zero() {
        let params = Params::new_unchecked(2, 1.3, 1.4, 0.1);
        let z = TestFunction::zero(2);
        let h = homogeneous_norm(&z, &params, &cfg2()).unwrap();
        assert_eq!(h.total.value, 0.0);
    }

    #[test]
    fn norm_spec_parsing() {
        assert_eq!(
            NormSpec::parse("weighted_lp:q=2,beta=0.5").unwrap(),
            NormSpec::WeightedLp { q: 2.0, beta: 0.5 }
        );
        assert_eq!(
            NormSpec::parse("gagliardo:t=0.3").unwrap(),
            NormSpec::Gagliardo { t: 0.3 }
        );
        assert_eq!(NormSpec::parse("homogeneous").unwrap(), NormSpec::Homogeneous);
        assert!(NormSpec::parse("sobolev").is_err());
    }

    // dual-route check: componentwise seminorms vs the Euclidean-norm
    // seminorm, related by the elementary power bounds with q = p/2
    #[test]
    fn componentwise_and_euclidean_seminorms_obey_power_bounds() {
        let u = bump(2);
        let cfg = cfg2();
        let (t, p, a) = (0.3, 1.4, 0.1);
        let euclid = gagliardo_grad(&u, t, p, a, &cfg).unwrap().powf(p);
        let comp = gagliardo_componentwise(&u, t, p, a, &cfg).unwrap().powf(p);
        let q = p / 2.0;
        // q < 1: A = 1, B = (q/2)^{N/2} for even N
        let b = q / 2.0;
        let slack = 3.0 * (euclid.uncertainty + comp.uncertainty);
        assert!(euclid.value <= comp.value + slack, "upper bound");
        assert!(
            euclid.value >= b * comp.value - slack,
            "lower bound: {} vs {}",
            euclid.value,
            b * comp.value
        );
    }

    #[test]
    fn gaussian_gradient_norm_is_radial_closed_form() {
        // | grad e^{-|x|^2} | = 2 r e^{-r^2}; the radial path picks it up
        let u = gaussian(2);
        let est = weighted_lp_grad(&u, 2.0, 0.0, &cfg2()).unwrap();
        // int |2 r e^{-r^2}|^2 dx over R^2 = 2 pi int 4 r^3 e^{-2 r^2} dr = pi
        assert!((est.value - PI.sqrt()).abs() < 1e-8, "{}", est.value);
        let profile = u.profile().unwrap();
        assert!((profile.derivative(0.5) + 2.0 * 0.5 * (-0.25f64).exp()).abs() < 1e-15);
    }
}
