//! Distribution functions, decreasing rearrangements, Lorentz quasi-norms,
//! and the layer-cake identities that convert weighted integrals into them.
//!
//! Profiles come from three sources: closed forms for the entries whose
//! superlevel sets invert analytically, bisection inversion of radial
//! nonincreasing profiles (to 1e-12), and hit-counting Monte Carlo for the
//! rest. Lorentz integrals run on the logarithmic t-axis with power-law
//! endpoint corrections; empirical step profiles are integrated exactly.

use crate::error::{Error, Result};
use crate::functions::TestFunction;
use crate::norms::weighted_lp;
use crate::params::{unit_ball_volume, Params};
use crate::quadrature::{integrate_log_axis, Estimate, McConfig, Method};
use rand::Rng;
use serde::Serialize;
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileSource {
    ClosedForm,
    ProfileInversion,
    McEstimate,
}

pub use ProfileSource as DistributionMethod;

type Curve = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

enum ProfileData {
    Deterministic {
        mu: Curve,
        fstar: Curve,
        /// ess sup |f|; `INFINITY` for unbounded functions.
        sup_value: f64,
        /// measure of the support; `INFINITY` when unbounded.
        support_measure: f64,
    },
    Empirical {
        /// |f| sample values, sorted descending.
        levels: Vec<f64>,
        /// prefix sums of per-sample weights 1/(n p_i); the cumulative
        /// measure estimate.
        prefix: Vec<f64>,
        /// prefix sums of raw squared contributions (1/p_i)^2.
        prefix_sq: Vec<f64>,
        samples: u64,
        /// per-sample values grouped for block uncertainty estimates.
        block_values: Vec<(f64, f64)>, // (value, weight 1/p_i)
    },
}

/// Distribution function `mu_f` and decreasing rearrangement `f*` as
/// evaluable curves.
pub struct RearrangementProfile {
    source: ProfileSource,
    data: ProfileData,
}

impl RearrangementProfile {
    pub fn source(&self) -> ProfileSource {
        self.source
    }

    /// Measure of the superlevel set `{|f| > t}` with its uncertainty.
    pub fn mu(&self, t: f64) -> Estimate {
        match &self.data {
            ProfileData::Deterministic { mu, .. } => Estimate::exact(mu(t), 1),
            ProfileData::Empirical {
                levels,
                prefix,
                prefix_sq,
                samples,
                ..
            } => {
                // number of levels strictly above t
                let k = levels.partition_point(|v| *v > t);
                if k == 0 {
                    return Estimate {
                        value: 0.0,
                        uncertainty: 0.0,
                        samples_used: *samples,
                        method: Method::Mc,
                    };
                }
                let n = *samples as f64;
                let mean = prefix[k - 1];
                let raw_sum = mean * n; // sum of matched 1/p_i
                let raw_sum_sq = prefix_sq[k - 1];
                let var = ((raw_sum_sq - raw_sum * raw_sum / n) / (n - 1.0)).max(0.0);
                Estimate {
                    value: mean,
                    uncertainty: (var / n).sqrt(),
                    samples_used: *samples,
                    method: Method::Mc,
                }
            }
        }
    }

    /// Decreasing rearrangement `f*(tau) = inf { t : mu(t) < tau }`.
    pub fn fstar(&self, tau: f64) -> f64 {
        match &self.data {
            ProfileData::Deterministic { fstar, .. } => fstar(tau),
            ProfileData::Empirical { levels, prefix, .. } => {
                // mu(t) = prefix[k-1] for t in [levels[k], levels[k-1]);
                // f*(tau) is the smallest level whose cumulative weight
                // reaches tau
                let k = prefix.partition_point(|w| *w < tau);
                if k >= levels.len() {
                    0.0
                } else {
                    levels[k]
                }
            }
        }
    }

    /// Essential supremum of |f| (the largest sampled value for empirical
    /// profiles).
    pub fn sup_value(&self) -> f64 {
        match &self.data {
            ProfileData::Deterministic { sup_value, .. } => *sup_value,
            ProfileData::Empirical { levels, .. } => levels.first().copied().unwrap_or(0.0),
        }
    }

    fn support_measure(&self) -> f64 {
        match &self.data {
            ProfileData::Deterministic {
                support_measure, ..
            } => *support_measure,
            ProfileData::Empirical { prefix, .. } => prefix.last().copied().unwrap_or(0.0),
        }
    }
}

/// Builds the distribution profile of `f` by the requested method.
pub fn distribution(
    f: &TestFunction,
    method: DistributionMethod,
    cfg: &McConfig,
) -> Result<RearrangementProfile> {
    match method {
        DistributionMethod::ClosedForm => closed_form_profile(f),
        DistributionMethod::ProfileInversion => inversion_profile(f),
        DistributionMethod::McEstimate => Ok(mc_profile(f, cfg)),
    }
}

/// Closed form where available, then profile inversion for radial entries,
/// then Monte Carlo hit counting.
pub fn distribution_auto(f: &TestFunction, cfg: &McConfig) -> Result<RearrangementProfile> {
    closed_form_profile(f)
        .or_else(|_| inversion_profile(f))
        .or_else(|_| Ok(mc_profile(f, cfg)))
}

fn closed_form_profile(f: &TestFunction) -> Result<RearrangementProfile> {
    let dim = f.dim();
    let omega = unit_ball_volume(dim as u32);
    let n = dim as f64;
    let name = f.name();
    let data = if let Some(rest) = name.strip_prefix("ball_indicator(") {
        let radius: f64 = rest
            .strip_suffix(')')
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::UnknownName(name.into()))?;
        let measure = omega * radius.powi(dim as i32);
        ProfileData::Deterministic {
            mu: Arc::new(move |t| if t < 1.0 && t >= 0.0 { measure } else { 0.0 }),
            fstar: Arc::new(move |tau| if tau <= measure { 1.0 } else { 0.0 }),
            sup_value: 1.0,
            support_measure: measure,
        }
    } else if let Some(rest) = name.strip_prefix("power_singular(") {
        let d: f64 = rest
            .strip_suffix(')')
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::UnknownName(name.into()))?;
        ProfileData::Deterministic {
            mu: Arc::new(move |t| omega * t.powf(-n / d)),
            fstar: Arc::new(move |tau| (omega / tau).powf(d / n)),
            sup_value: f64::INFINITY,
            support_measure: f64::INFINITY,
        }
    } else if name == "gaussian" {
        ProfileData::Deterministic {
            mu: Arc::new(move |t| {
                if t <= 0.0 || t >= 1.0 {
                    if t <= 0.0 {
                        f64::INFINITY
                    } else {
                        0.0
                    }
                } else {
                    omega * (1.0 / t).ln().powf(n / 2.0)
                }
            }),
            fstar: Arc::new(move |tau| (-(tau / omega).powf(2.0 / n)).exp()),
            sup_value: 1.0,
            support_measure: f64::INFINITY,
        }
    } else {
        return Err(Error::Unsupported(format!(
            "no closed-form distribution for `{name}`"
        )));
    };
    Ok(RearrangementProfile {
        source: ProfileSource::ClosedForm,
        data,
    })
}

fn inversion_profile(f: &TestFunction) -> Result<RearrangementProfile> {
    if !f.radial() {
        return Err(Error::NonMonotoneProfile(format!(
            "`{}` is not radial",
            f.name()
        )));
    }
    let profile = f
        .profile()
        .ok_or_else(|| Error::NonMonotoneProfile(format!("`{}` has no 1-D profile", f.name())))?
        .clone();
    let dim = f.dim();
    let omega = unit_ball_volume(dim as u32);
    let outer = f.support_radius();

    // sampled monotonicity check on a geometric grid
    let check_radius = outer.unwrap_or(64.0);
    let mut previous = profile.value(0.0).abs();
    let scale = previous.max(1.0);
    let mut r = 1e-6 * check_radius;
    while r <= check_radius {
        let value = profile.value(r).abs();
        if value > previous + 1e-12 * scale {
            return Err(Error::NonMonotoneProfile(format!(
                "`{}` increases at r = {r}",
                f.name()
            )));
        }
        previous = value;
        r *= 1.3;
    }

    let sup_value = profile.value(0.0).abs();
    let support_measure = outer
        .map(|r| omega * r.powi(dim as i32))
        .unwrap_or(f64::INFINITY);

    let n = dim as f64;
    let prof_mu = profile.clone();
    let mu: Curve = Arc::new(move |t: f64| {
        if t >= sup_value {
            return 0.0;
        }
        if t <= 0.0 {
            return support_measure;
        }
        // boundary radius sup { r : |h(r)| > t } by bisection
        let mut hi = match outer {
            Some(r) => r,
            None => {
                let mut hi = 1.0;
                while prof_mu.value(hi).abs() > t {
                    hi *= 2.0;
                    if hi > 1e12 {
                        return f64::INFINITY;
                    }
                }
                hi
            }
        };
        let mut lo = 0.0;
        for _ in 0..200 {
            if hi - lo <= 1e-13 * hi.max(1.0) {
                break;
            }
            let mid = 0.5 * (lo + hi);
            if prof_mu.value(mid).abs() > t {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        omega * (0.5 * (lo + hi)).powf(n)
    });

    let mu_for_fstar = mu.clone();
    let fstar: Curve = Arc::new(move |tau: f64| {
        if tau >= support_measure {
            return 0.0;
        }
        if mu_for_fstar(0.0) < tau {
            return 0.0;
        }
        // smallest t with mu(t) < tau; mu is nonincreasing in t
        let mut lo = 0.0;
        let mut hi = sup_value;
        for _ in 0..200 {
            if hi - lo <= 1e-13 * hi.max(1e-300) {
                break;
            }
            let mid = 0.5 * (lo + hi);
            if mu_for_fstar(mid) < tau {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    });

    Ok(RearrangementProfile {
        source: ProfileSource::ProfileInversion,
        data: ProfileData::Deterministic {
            mu,
            fstar,
            sup_value,
            support_measure,
        },
    })
}

fn mc_profile(f: &TestFunction, cfg: &McConfig) -> RearrangementProfile {
    let dim = f.dim();
    let radius = f.support_radius().unwrap_or(cfg.truncation_radius);
    let ball = unit_ball_volume(dim as u32) * radius.powi(dim as i32);
    let n = cfg.sample_count;
    let mut pairs: Vec<(f64, f64)> = Vec::with_capacity(n as usize);
    let mut base = crate::quadrature::distribution_stream(cfg.seed);
    let mut x = vec![0.0; dim];
    for _ in 0..n {
        // uniform point in the ball
        loop {
            for xi in x.iter_mut() {
                *xi = base.gen_range(-radius..radius);
            }
            if x.iter().map(|v| v * v).sum::<f64>() <= radius * radius {
                break;
            }
        }
        let value = f.eval(&x).abs();
        pairs.push((value, ball)); // 1/p_i = ball volume
    }
    let block_values = pairs.clone();
    pairs.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(std::cmp::Ordering::Equal));
    let nf = n as f64;
    let mut prefix = Vec::with_capacity(pairs.len());
    let mut prefix_sq = Vec::with_capacity(pairs.len());
    let mut acc = 0.0;
    let mut acc_sq = 0.0;
    let mut levels = Vec::with_capacity(pairs.len());
    for (value, inv_p) in &pairs {
        levels.push(*value);
        acc += inv_p / nf;
        acc_sq += inv_p * inv_p;
        prefix.push(acc);
        prefix_sq.push(acc_sq);
    }
    RearrangementProfile {
        source: ProfileSource::McEstimate,
        data: ProfileData::Empirical {
            levels,
            prefix,
            prefix_sq,
            samples: n,
            block_values,
        },
    }
}

// ---------------------------------------------------------------------------
// Lorentz quasi-norms
// ---------------------------------------------------------------------------

const LORENTZ_REL_TOL: f64 = 1e-9;

/// `|f|_{p,q}` with `p` finite and `q` finite or infinite (`q = None`).
pub fn lorentz_quasinorm(
    f: &TestFunction,
    p: f64,
    q: Option<f64>,
    cfg: &McConfig,
) -> Result<Estimate> {
    let profile = distribution_auto(f, cfg)?;
    lorentz_from_profile(&profile, p, q)
}

/// Same as [`lorentz_quasinorm`] but on a prebuilt profile, so independent
/// computation paths can share one distribution function.
pub fn lorentz_from_profile(
    profile: &RearrangementProfile,
    p: f64,
    q: Option<f64>,
) -> Result<Estimate> {
    if p <= 0.0 {
        return Err(Error::ConstraintViolation {
            name: "lorentz-p",
            value: p,
            bound: "p > 0".into(),
        });
    }
    match q {
        None => weak_norm(profile, p),
        Some(q) if q > 0.0 => finite_q_norm(profile, p, q),
        Some(q) => Err(Error::ConstraintViolation {
            name: "lorentz-q",
            value: q,
            bound: "q > 0".into(),
        }),
    }
}

fn weak_norm(profile: &RearrangementProfile, p: f64) -> Result<Estimate> {
    if let ProfileData::Empirical {
        levels,
        prefix,
        samples,
        ..
    } = &profile.data
    {
        // for a step profile the supremum is attained just below a level
        let mut best = 0.0f64;
        for (k, level) in levels.iter().enumerate() {
            best = best.max(level * prefix[k].powf(1.0 / p));
        }
        return Ok(Estimate {
            value: best,
            uncertainty: 0.0,
            samples_used: *samples,
            method: Method::Mc,
        });
    }

    let sup = profile.sup_value();
    if sup == 0.0 {
        return Ok(Estimate::exact(0.0, 0));
    }
    let (t_lo, t_hi) = if sup.is_finite() {
        (sup * 1e-10, sup * (1.0 - 1e-12))
    } else {
        (1e-8, 1e8)
    };
    let score = |t: f64| {
        let m = profile.mu(t).value;
        if m <= 0.0 || !m.is_finite() {
            0.0
        } else {
            t * m.powf(1.0 / p)
        }
    };
    const GRID: usize = 256;
    let ratio = (t_hi / t_lo).powf(1.0 / (GRID as f64 - 1.0));
    let mut best_k = 0;
    let mut best = f64::NEG_INFINITY;
    let mut t = t_lo;
    let mut grid = Vec::with_capacity(GRID);
    for k in 0..GRID {
        grid.push(t);
        let s = score(t);
        if s > best {
            best = s;
            best_k = k;
        }
        t *= ratio;
    }
    // golden-section refinement on the log axis around the best grid point
    let mut lo = grid[best_k.saturating_sub(1)].ln();
    let mut hi = grid[(best_k + 1).min(GRID - 1)].ln();
    let phi = (5.0f64.sqrt() - 1.0) / 2.0;
    for _ in 0..80 {
        let m1 = hi - phi * (hi - lo);
        let m2 = lo + phi * (hi - lo);
        if score(m1.exp()) < score(m2.exp()) {
            lo = m1;
        } else {
            hi = m2;
        }
    }
    let refined = score((0.5 * (lo + hi)).exp()).max(best);
    Ok(Estimate::exact(refined, GRID as u64 + 160))
}

fn finite_q_norm(profile: &RearrangementProfile, p: f64, q: f64) -> Result<Estimate> {
    if let ProfileData::Empirical { .. } = &profile.data {
        return empirical_finite_q(profile, p, q);
    }

    let sup = profile.sup_value();
    if sup == 0.0 {
        return Ok(Estimate::exact(0.0, 0));
    }
    let g = |t: f64| {
        let m = profile.mu(t).value;
        if m <= 0.0 || !m.is_finite() {
            0.0
        } else {
            t.powf(q - 1.0) * m.powf(q / p)
        }
    };
    let (t_lo, mut t_hi) = if sup.is_finite() {
        (sup * 1e-9, sup)
    } else {
        (1e-9, 1e9)
    };

    // divergence tests from the locally observed power laws
    let alpha_lo = local_exponent(&g, t_lo);
    if alpha_lo <= -1.0 + 1e-9 {
        return Err(Error::DivergentQuasinorm(format!(
            "integrand exponent {alpha_lo:.4} at t -> 0"
        )));
    }
    if !sup.is_finite() {
        let alpha_hi = local_exponent(&g, t_hi / 4.0);
        if alpha_hi >= -1.0 - 1e-9 {
            return Err(Error::DivergentQuasinorm(format!(
                "integrand exponent {alpha_hi:.4} at t -> infinity"
            )));
        }
        // extend until the upper tail is negligible under the observed decay
        while g(t_hi) * t_hi > 1e-14 * g(t_lo * 4.0) * t_lo && t_hi < 1e30 {
            t_hi *= 8.0;
        }
    }

    let (mid, evals) = integrate_log_axis(&g, t_lo, t_hi, 1e-300, LORENTZ_REL_TOL)?;
    // lower-end correction from the observed power law
    let tail_lo = g(t_lo) * t_lo / (alpha_lo + 1.0);
    let total = p * (mid + tail_lo);
    Ok(Estimate::exact(total, evals).powf(1.0 / q))
}

fn local_exponent(g: &impl Fn(f64) -> f64, t: f64) -> f64 {
    let a = g(t);
    let b = g(2.0 * t);
    if a <= 0.0 || b <= 0.0 {
        return 0.0;
    }
    (b / a).ln() / 2.0f64.ln()
}

fn empirical_finite_q(profile: &RearrangementProfile, p: f64, q: f64) -> Result<Estimate> {
    let ProfileData::Empirical {
        levels,
        prefix,
        samples,
        block_values,
        ..
    } = &profile.data
    else {
        unreachable!()
    };
    let value = step_lorentz(levels, prefix, p, q);

    // block-based uncertainty: the statistic recomputed on disjoint blocks
    const BLOCKS: usize = 10;
    let block_len = block_values.len() / BLOCKS;
    let mut block_stats = Vec::with_capacity(BLOCKS);
    for b in 0..BLOCKS {
        let chunk = &block_values[b * block_len..(b + 1) * block_len];
        let mut sorted: Vec<(f64, f64)> = chunk.to_vec();
        sorted.sort_by(|x, y| y.0.partial_cmp(&x.0).unwrap_or(std::cmp::Ordering::Equal));
        let nb = sorted.len() as f64;
        let mut lv = Vec::with_capacity(sorted.len());
        let mut pw = Vec::with_capacity(sorted.len());
        let mut acc = 0.0;
        for (v, inv_p) in &sorted {
            lv.push(*v);
            acc += inv_p / nb;
            pw.push(acc);
        }
        block_stats.push(step_lorentz(&lv, &pw, p, q));
    }
    let k = block_stats.len() as f64;
    let mean = block_stats.iter().sum::<f64>() / k;
    let var = block_stats.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>() / (k - 1.0);
    Ok(Estimate {
        value,
        uncertainty: (var / k).sqrt(),
        samples_used: *samples,
        method: Method::Mc,
    })
}

/// Exact Lorentz integral of a descending step profile:
/// `|f|_{p,q}^q = p sum_k W_k^{q/p} (v_k^q - v_{k+1}^q)/q`.
fn step_lorentz(levels: &[f64], prefix: &[f64], p: f64, q: f64) -> f64 {
    let mut total = 0.0;
    for k in 0..levels.len() {
        let upper = levels[k];
        let lower = if k + 1 < levels.len() { levels[k + 1] } else { 0.0 };
        if upper <= lower {
            continue;
        }
        total += prefix[k].powf(q / p) * (upper.powf(q) - lower.powf(q));
    }
    (total * p / q).powf(1.0 / q)
}

// ---------------------------------------------------------------------------
// Layer-cake identities
// ---------------------------------------------------------------------------

/// The relation a two-sided check asserts. The weighted-integral identities
/// hold with equality exactly when the superlevel sets are origin-centred
/// balls (radial nonincreasing functions); otherwise the rearrangement
/// inequality bounds the left side by the right.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum IdentityRelation {
    Equality,
    UpperBound,
}

/// Two independently computed sides of an identity and their relative gap.
#[derive(Debug, Clone, Serialize)]
pub struct IdentityReport {
    pub name: String,
    pub relation: IdentityRelation,
    pub lhs: Estimate,
    pub rhs: Estimate,
    pub relative_gap: f64,
    pub tolerance: f64,
    pub passed: bool,
}

fn identity_report(
    name: &str,
    relation: IdentityRelation,
    lhs: Estimate,
    rhs: Estimate,
    base_tol: f64,
) -> IdentityReport {
    let scale = lhs.value.abs().max(rhs.value.abs());
    let relative_gap = if scale == 0.0 {
        0.0
    } else {
        (lhs.value - rhs.value).abs() / scale
    };
    let stat_slack = if scale == 0.0 {
        0.0
    } else {
        3.0 * (lhs.uncertainty + rhs.uncertainty) / scale
    };
    let tolerance = base_tol.max(stat_slack);
    let passed = match relation {
        IdentityRelation::Equality => relative_gap <= tolerance,
        IdentityRelation::UpperBound => lhs.value <= rhs.value * (1.0 + tolerance),
    };
    IdentityReport {
        name: name.into(),
        relation,
        lhs,
        rhs,
        relative_gap,
        tolerance,
        passed,
    }
}

/// `int f dx = int_0^{|Omega|} f*(tau) dtau` for nonnegative `f`; both sides
/// computed independently (space quadrature vs the rearranged curve).
pub fn layer_cake_check(f: &TestFunction, cfg: &McConfig, base_tol: f64) -> Result<IdentityReport> {
    let lhs = weighted_lp(f, 1.0, 0.0, cfg)?; // q = 1: plain integral of |f|
    let profile = distribution_auto(f, cfg)?;
    let rhs = rearranged_integral(&profile)?;
    // the whole-space layer cake is an identity for every f
    Ok(identity_report(
        "layer_cake",
        IdentityRelation::Equality,
        lhs,
        rhs,
        base_tol,
    ))
}

/// `int_0^inf f*(tau) dtau` on the log axis with endpoint corrections.
fn rearranged_integral(profile: &RearrangementProfile) -> Result<Estimate> {
    if let ProfileData::Empirical {
        levels,
        prefix,
        samples,
        ..
    } = &profile.data
    {
        // exact integral of the empirical step rearrangement
        let mut total = 0.0;
        let mut previous = 0.0;
        for (k, level) in levels.iter().enumerate() {
            total += level * (prefix[k] - previous);
            previous = prefix[k];
        }
        return Ok(Estimate {
            value: total,
            uncertainty: 0.0,
            samples_used: *samples,
            method: Method::Mc,
        });
    }

    let support = profile.support_measure();
    let sup = profile.sup_value();
    if sup == 0.0 {
        return Ok(Estimate::exact(0.0, 0));
    }
    let tau_hi = if support.is_finite() {
        support
    } else {
        // expand until the rearrangement is negligible
        let mut tau = 1.0;
        while profile.fstar(tau) > 1e-16 * sup && tau < 1e30 {
            tau *= 2.0;
        }
        tau
    };
    let tau_lo = tau_hi * 1e-10;
    let g = |tau: f64| profile.fstar(tau);
    let (mid, evals) = integrate_log_axis(&g, tau_lo, tau_hi, 1e-300, LORENTZ_REL_TOL)?;
    // f* is bounded by sup near tau = 0; power-law correction
    let alpha = local_exponent(&g, tau_lo);
    let head = g(tau_lo) * tau_lo / (alpha + 1.0);
    Ok(Estimate::exact(mid + head, evals))
}

/// `int |u|^p / |x|^{sp+2a} dx = omega_N^{(sp+2a)/N} |u|_{p*,p}^p`, the
/// layer-cake identity behind the finer Lorentz embedding. An equality for
/// radial nonincreasing u; for general u the superlevel sets are not balls
/// and the left side is bounded by the right (rearrangement inequality).
pub fn hardy_layercake_identity(
    u: &TestFunction,
    params: &Params,
    cfg: &McConfig,
    base_tol: f64,
) -> Result<IdentityReport> {
    let p = params.p();
    let exponent = params.s() * p + 2.0 * params.a();
    let lhs = weighted_lp(u, p, exponent, cfg)?.powf(p);
    let p_star = params.lorentz_target();
    let omega = unit_ball_volume(params.dim());
    let rhs = lorentz_quasinorm(u, p_star, Some(p), cfg)?
        .powf(p)
        .scaled(omega.powf(exponent / params.n()));
    Ok(identity_report(
        "hardy_layercake",
        layercake_relation(u),
        lhs,
        rhs,
        base_tol,
    ))
}

fn layercake_relation(u: &TestFunction) -> IdentityRelation {
    if u.radial() {
        IdentityRelation::Equality
    } else {
        IdentityRelation::UpperBound
    }
}

/// `int |u|^{p*_s} / |x|^{2a p*_s / p} dx = omega_N^{2a/(N-sp)}
/// |u|_{p*, p*_s}^{p*_s}`, the companion identity at the Sobolev exponent.
pub fn sobolev_layercake_identity(
    u: &TestFunction,
    params: &Params,
    cfg: &McConfig,
    base_tol: f64,
) -> Result<IdentityReport> {
    let p = params.p();
    let p_star_s = params.p_star_s();
    let beta = 2.0 * params.a() * p_star_s / p;
    let lhs = weighted_lp(u, p_star_s, beta, cfg)?.powf(p_star_s);
    let p_star = params.lorentz_target();
    let omega = unit_ball_volume(params.dim());
    let scale = omega.powf(2.0 * params.a() / (params.n() - params.s() * p));
    let rhs = lorentz_quasinorm(u, p_star, Some(p_star_s), cfg)?
        .powf(p_star_s)
        .scaled(scale);
    Ok(identity_report(
        "sobolev_layercake",
        layercake_relation(u),
        lhs,
        rhs,
        base_tol,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functions::{ball_indicator, bump, gaussian, poly_bump, power_singular};
    use std::f64::consts::PI;

    fn cfg(dim: usize) -> McConfig {
        McConfig::default_for(dim).with_samples(50_000)
    }

    #[test]
    fn indicator_distribution_closed_form() {
        let f = ball_indicator(3, 2.0);
        let prof = distribution(&f, DistributionMethod::ClosedForm, &cfg(3)).unwrap();
        let measure = unit_ball_volume(3) * 8.0;
        assert_eq!(prof.mu(0.5).value, measure);
        assert_eq!(prof.mu(1.0).value, 0.0);
        assert_eq!(prof.fstar(measure * 0.99), 1.0);
        assert_eq!(prof.fstar(measure * 1.01), 0.0);
    }

    #[test]
    fn power_singular_distribution_closed_form() {
        let f = power_singular(3, 1.0);
        let prof = distribution(&f, DistributionMethod::ClosedForm, &cfg(3)).unwrap();
        let omega = unit_ball_volume(3);
        for t in [0.25, 1.0, 4.0] {
            assert!((prof.mu(t).value - omega * t.powf(-3.0)).abs() < 1e-12 * omega);
        }
    }

    #[test]
    fn gaussian_distribution_matches_inversion() {
        let f = gaussian(2);
        let closed = distribution(&f, DistributionMethod::ClosedForm, &cfg(2)).unwrap();
        let inverted = distribution(&f, DistributionMethod::ProfileInversion, &cfg(2)).unwrap();
        for t in [0.1, 0.3, 0.5, 0.9] {
            let a = closed.mu(t).value;
            let b = inverted.mu(t).value;
            assert!((a - b).abs() < 1e-9 * a.max(1.0), "t={t}: {a} vs {b}");
        }
        for tau in [0.5, 2.0, 7.0] {
            let a = closed.fstar(tau);
            let b = inverted.fstar(tau);
            assert!((a - b).abs() < 1e-9, "tau={tau}: {a} vs {b}");
        }
    }

    #[test]
    fn inversion_rejects_non_radial_and_non_monotone() {
        let f = poly_bump(2);
        assert!(matches!(
            distribution(&f, DistributionMethod::ProfileInversion, &cfg(2)),
            Err(Error::NonMonotoneProfile(_))
        ));
    }

    #[test]
    fn galois_inequalities_hold_at_sampled_points() {
        let f = bump(2);
        let prof = distribution(&f, DistributionMethod::ProfileInversion, &cfg(2)).unwrap();
        for t in [0.05, 0.1, 0.2, 0.3] {
            let m = prof.mu(t).value;
            assert!(prof.fstar(m) <= t + 1e-9, "fstar(mu(t)) <= t at {t}");
        }
        for tau in [0.2, 0.7, 1.5] {
            let v = prof.fstar(tau);
            assert!(prof.mu(v).value <= tau + 1e-9, "mu(fstar(tau)) <= tau at {tau}");
        }
    }

    #[test]
    fn equimeasurability_of_the_rearranged_profile() {
        // distribution of f* (w.r.t. Lebesgue measure on (0, inf)) equals mu_f
        let f = bump(2);
        let prof = distribution(&f, DistributionMethod::ProfileInversion, &cfg(2)).unwrap();
        for t in [0.05, 0.15, 0.25] {
            let mu_f = prof.mu(t).value;
            // measure of { tau : f*(tau) > t } by bisection on fstar
            let mut lo = 0.0;
            let mut hi = 16.0;
            for _ in 0..120 {
                let mid = 0.5 * (lo + hi);
                if prof.fstar(mid) > t {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let mu_star = 0.5 * (lo + hi);
            assert!(
                (mu_f - mu_star).abs() < 1e-6 * mu_f.max(1e-9),
                "t={t}: {mu_f} vs {mu_star}"
            );
        }
    }

    #[test]
    fn weak_norm_of_power_singular_is_constant() {
        let f = power_singular(3, 1.0);
        let est = lorentz_quasinorm(&f, 3.0, None, &cfg(3)).unwrap();
        let truth = unit_ball_volume(3).powf(1.0 / 3.0);
        assert!(
            (est.value - truth).abs() < 1e-6 * truth,
            "{} vs {truth}",
            est.value
        );
    }

    #[test]
    fn indicator_lorentz_closed_form() {
        let f = ball_indicator(2, 1.0);
        let (p, q) = (2.5, 1.5);
        let est = lorentz_quasinorm(&f, p, Some(q), &cfg(2)).unwrap();
        let truth = (p / q).powf(1.0 / q) * PI.powf(1.0 / p);
        assert!(
            (est.value - truth).abs() < 1e-6 * truth,
            "{} vs {truth}",
            est.value
        );
    }

    #[test]
    fn lorentz_pp_equals_lp_norm() {
        let f = gaussian(2);
        let est = lorentz_quasinorm(&f, 2.0, Some(2.0), &cfg(2)).unwrap();
        let truth = (PI / 2.0).sqrt();
        assert!(
            (est.value - truth).abs() < 1e-6 * truth,
            "{} vs {truth}",
            est.value
        );
    }

    #[test]
    fn lorentz_diverges_for_power_singular_at_pp() {
        // |x|^{-1} in N=3 is in L^{3,inf} but not L^{3,3}
        let f = power_singular(3, 1.0);
        let err = lorentz_quasinorm(&f, 3.0, Some(3.0), &cfg(3)).unwrap_err();
        assert!(matches!(err, Error::DivergentQuasinorm(_)));
    }

    #[test]
    fn layer_cake_for_indicator_is_exact() {
        let f = ball_indicator(3, 1.0);
        let report = layer_cake_check(&f, &cfg(3), 1e-12).unwrap();
        assert!(report.passed, "{report:?}");
        assert!(report.relative_gap <= 1e-12);
    }

    #[test]
    fn layer_cake_for_gaussian_hits_quadrature_precision() {
        let f = gaussian(2);
        let report = layer_cake_check(&f, &cfg(2), 1e-6).unwrap();
        assert!(report.passed, "{report:?}");
        assert!((report.lhs.value - PI).abs() < 1e-7);
    }

    #[test]
    fn layer_cake_for_bump_cross_validates() {
        let f = bump(3);
        let report = layer_cake_check(&f, &cfg(3), 1e-6).unwrap();
        assert!(report.passed, "{report:?}");
    }

    #[test]
    fn empirical_profile_tracks_closed_form() {
        let f = gaussian(2);
        let prof = distribution(&f, DistributionMethod::McEstimate, &cfg(2)).unwrap();
        let closed = distribution(&f, DistributionMethod::ClosedForm, &cfg(2)).unwrap();
        for t in [0.2, 0.5, 0.8] {
            let est = prof.mu(t);
            let truth = closed.mu(t).value;
            assert!(
                (est.value - truth).abs() <= 4.0 * est.uncertainty.max(1e-3),
                "t={t}: {} vs {truth} +- {}",
                est.value,
                est.uncertainty
            );
        }
    }

    #[test]
    fn lorentz_nesting_on_the_catalog() {
        // |f|_{p*, p*_s} finite whenever |f|_{p*, p} is
        let params = Params::validate(3, 1.25, 1.6, 0.25).unwrap();
        let p_star = params.lorentz_target();
        for f in [bump(3), gaussian(3)] {
            let finer = lorentz_quasinorm(&f, p_star, Some(params.p()), &cfg(3)).unwrap();
            let coarser = lorentz_quasinorm(&f, p_star, Some(params.p_star_s()), &cfg(3)).unwrap();
            assert!(finer.value.is_finite() && coarser.value.is_finite());
            assert!(coarser.value > 0.0);
        }
    }

    #[test]
    fn hardy_layercake_identity_on_bump() {
        let params = Params::validate(3, 1.25, 1.6, 0.25).unwrap();
        let u = bump(3);
        let report = hardy_layercake_identity(&u, &params, &cfg(3), 0.02).unwrap();
        assert!(report.passed, "{report:?}");
        assert!(report.relative_gap < 0.02, "gap {}", report.relative_gap);
    }

    #[test]
    fn sobolev_layercake_identity_on_bump() {
        let params = Params::validate(3, 1.25, 1.6, 0.25).unwrap();
        let u = bump(3);
        let report = sobolev_layercake_identity(&u, &params, &cfg(3), 0.02).unwrap();
        assert!(report.passed, "{report:?}");
    }

    #[test]
    fn sobolev_layercake_reduces_to_lp_at_a_zero() {
        let params = Params::validate(3, 1.25, 1.6, 0.0).unwrap();
        let u = bump(3);
        let report = sobolev_layercake_identity(&u, &params, &cfg(3), 1e-5).unwrap();
        assert!(report.passed, "{report:?}");
        let direct = weighted_lp(&u, params.p_star_s(), 0.0, &cfg(3))
            .unwrap()
            .powf(params.p_star_s());
        assert!((report.lhs.value - direct.value).abs() < 1e-9 * direct.value);
    }

    #[test]
    fn zero_function_layer_cake_is_trivial() {
        let z = TestFunction::zero(2);
        let report = layer_cake_check(&z, &cfg(2), 1e-12).unwrap();
        assert_eq!(report.lhs.value, 0.0);
        assert_eq!(report.rhs.value, 0.0);
        assert!(report.passed);
    }
}
