//! Exponent algebra and parameter validation.
//!
//! [`Params`] is the single source of truth for admissibility of a
//! `(N, s, p, a)` tuple; the free functions [`critical_exponent`] and
//! [`lorentz_target`] accept raw inputs so that boundary cases rejected by
//! [`Params::validate`] (e.g. `s = 2`) can still be checked algebraically.

use crate::error::{Error, Result};
use serde::Serialize;

/// Validated exponent bundle.
///
/// Invariants, enforced at construction: `N >= 2`, `1 < s < 2`,
/// `sigma = s - 1` exactly, `1 < p < N/s`, `0 <= a < (N - s p)/2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Params {
    dim: u32,
    s: f64,
    sigma: f64,
    p: f64,
    a: f64,
}

impl Params {
    /// Validates raw inputs, returning the first violated constraint.
    pub fn validate(dim: u32, s: f64, p: f64, a: f64) -> Result<Self> {
        if dim < 2 {
            return Err(Error::ConstraintViolation {
                name: "dimension",
                value: dim as f64,
                bound: "N >= 2".into(),
            });
        }
        if !(s > 1.0 && s < 2.0) {
            return Err(Error::ConstraintViolation {
                name: "s-window",
                value: s,
                bound: "1 < s < 2".into(),
            });
        }
        let n = dim as f64;
        if !(p > 1.0 && p < n / s) {
            return Err(Error::ConstraintViolation {
                name: "p-window",
                value: p,
                bound: format!("1 < p < N/s = {}", n / s),
            });
        }
        let a_bound = (n - s * p) / 2.0;
        if !(a >= 0.0 && a < a_bound) {
            return Err(Error::ConstraintViolation {
                name: "a-window",
                value: a,
                bound: format!("0 <= a < (N - s p)/2 = {a_bound}"),
            });
        }
        Ok(Params {
            dim,
            s,
            sigma: s - 1.0,
            p,
            a,
        })
    }

    /// Builds a bundle without enforcing the admissibility windows. The
    /// scaling-law and approximation experiments probe configurations where
    /// `a` sits at or past `(N - s p)/2`; the exponent formulas stay finite
    /// there even though `validate` rejects them. Derived-exponent methods
    /// still require their own denominators to be positive.
    pub fn new_unchecked(dim: u32, s: f64, p: f64, a: f64) -> Self {
        assert!(dim >= 1 && s.is_finite() && p > 0.0 && a >= 0.0);
        Params {
            dim,
            s,
            sigma: s - 1.0,
            p,
            a,
        }
    }

    pub fn dim(&self) -> u32 {
        self.dim
    }

    pub fn n(&self) -> f64 {
        self.dim as f64
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    /// sigma = s - 1, the fractional order applied to the gradient.
    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    /// Sobolev critical exponent `Np/(N - alpha p)` for this bundle.
    pub fn critical_exponent(&self, alpha: f64) -> Result<f64> {
        critical_exponent(self.dim, self.p, alpha)
    }

    /// `p*_sigma = Np/(N - sigma p)`.
    pub fn p_star_sigma(&self) -> f64 {
        critical_exponent(self.dim, self.p, self.sigma).expect("valid params")
    }

    /// `p*_s = Np/(N - s p)`.
    pub fn p_star_s(&self) -> f64 {
        critical_exponent(self.dim, self.p, self.s).expect("valid params")
    }

    /// Lorentz first index `Np/(N - s p - 2a)`.
    pub fn lorentz_target(&self) -> f64 {
        lorentz_target(self.dim, self.s, self.p, self.a).expect("valid params")
    }

    /// Homogeneity exponent `(N - s p - 2a)/p` that makes the scale orbit
    /// norm-invariant.
    pub fn homogeneity_kappa(&self) -> f64 {
        (self.n() - self.s * self.p - 2.0 * self.a) / self.p
    }
}

/// `Np/(N - alpha p)`, accepting any inputs with `N - alpha p > 0`.
pub fn critical_exponent(dim: u32, p: f64, alpha: f64) -> Result<f64> {
    let n = dim as f64;
    let denom = n - alpha * p;
    if denom <= 0.0 {
        return Err(Error::DegenerateExponent(denom));
    }
    Ok(n * p / denom)
}

/// `Np/(N - s p - 2a)`, accepting any inputs with a positive denominator.
///
/// Boundary values such as `s = 2` are allowed here even though
/// [`Params::validate`] rejects them.
pub fn lorentz_target(dim: u32, s: f64, p: f64, a: f64) -> Result<f64> {
    let n = dim as f64;
    let denom = n - s * p - 2.0 * a;
    if denom <= 0.0 {
        return Err(Error::DegenerateExponent(denom));
    }
    Ok(n * p / denom)
}

/// ln Gamma(k/2) for integer `k >= 1`, by the exact half-integer recurrence.
///
/// Gamma(1/2) = sqrt(pi), Gamma(1) = 1, Gamma(x+1) = x Gamma(x); summing
/// logarithms avoids overflow up to the N <= 64 range supported here.
fn ln_gamma_half(k: u32) -> f64 {
    debug_assert!(k >= 1);
    let mut acc = if k % 2 == 0 {
        0.0 // Gamma(1)
    } else {
        0.5 * std::f64::consts::PI.ln() // Gamma(1/2)
    };
    let mut x = if k % 2 == 0 { 1.0 } else { 0.5 };
    while 2.0 * x + 0.5 < k as f64 {
        acc += x.ln();
        x += 1.0;
    }
    acc
}

/// Volume of the unit ball in dimension `N`, via log-Gamma.
pub fn unit_ball_volume(dim: u32) -> f64 {
    assert!((1..=64).contains(&dim), "supported range is 1 <= N <= 64");
    let n = dim as f64;
    // omega_N = pi^{N/2} / Gamma(N/2 + 1)
    (0.5 * n * std::f64::consts::PI.ln() - ln_gamma_half(dim + 2)).exp()
}

/// Parameter tuple of the first-order weighted interpolation inequality.
///
/// `m` is always derived from `(l, gamma, beta)`; it is not a stored field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CknParams {
    pub dim: u32,
    pub p: f64,
    pub q: f64,
    pub r: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub l: f64,
}

impl CknParams {
    pub fn new(
        dim: u32,
        p: f64,
        q: f64,
        r: f64,
        alpha: f64,
        beta: f64,
        gamma: f64,
        l: f64,
    ) -> Result<Self> {
        if p < 1.0 || q < 1.0 {
            return Err(Error::ConstraintViolation {
                name: "pq-window",
                value: p.min(q),
                bound: "p, q >= 1".into(),
            });
        }
        if r <= 0.0 {
            return Err(Error::ConstraintViolation {
                name: "r-window",
                value: r,
                bound: "r > 0".into(),
            });
        }
        if !(0.0..=1.0).contains(&l) {
            return Err(Error::ConstraintViolation {
                name: "l-window",
                value: l,
                bound: "0 <= l <= 1".into(),
            });
        }
        Ok(CknParams {
            dim,
            p,
            q,
            r,
            alpha,
            beta,
            gamma,
            l,
        })
    }

    /// `m = l gamma + (1 - l) beta`, recomputed on every call.
    pub fn m(&self) -> f64 {
        self.l * self.gamma + (1.0 - self.l) * self.beta
    }

    /// The admissible choice used to derive the weighted first-order
    /// inequality from a valid `(N, s, p, a)` bundle:
    /// `r = p, l = 1, alpha = -(sigma p + 2a)/p, gamma = -(s p + 2a)/p`.
    pub fn first_order_choice(params: &Params) -> Self {
        let p = params.p();
        let alpha = -(params.sigma() * p + 2.0 * params.a()) / p;
        let gamma = -(params.s() * p + 2.0 * params.a()) / p;
        CknParams {
            dim: params.dim(),
            p,
            q: p,
            r: p,
            alpha,
            beta: gamma,
            gamma,
            l: 1.0,
        }
    }
}

/// Per-constraint admissibility verdict for a [`CknParams`] tuple.
#[derive(Debug, Clone, Serialize)]
pub struct AdmissibilityReport {
    pub positivity_p: bool,
    pub positivity_q: bool,
    pub positivity_r: bool,
    pub balance: bool,
    pub balance_defect: f64,
    pub side_lower: bool,
    pub side_upper: bool,
    pub admissible: bool,
}

/// Default absolute tolerance for the dimensional-balance comparison: all
/// quantities are O(1) rationals of user inputs.
pub const CKN_BALANCE_TOL: f64 = 1e-12;

/// Checks the admissibility relations of the weighted interpolation
/// inequality. `tol` is the absolute tolerance for the balance equation and
/// the equality-case detection (the literature leaves it undefined, so it is
/// a parameter; use [`CKN_BALANCE_TOL`] by default).
pub fn ckn_admissible(c: &CknParams, tol: f64) -> AdmissibilityReport {
    let n = c.dim as f64;
    let m = c.m();
    let positivity_p = 1.0 / c.p + c.alpha / n > 0.0;
    let positivity_q = 1.0 / c.q + c.beta / n > 0.0;
    let positivity_r = 1.0 / c.r + m / n > 0.0;

    let lhs = 1.0 / c.r + m / n;
    let first = 1.0 / c.p + (c.alpha - 1.0) / n;
    let rhs = c.l * first + (1.0 - c.l) * (1.0 / c.q + c.beta / n);
    let balance_defect = (lhs - rhs).abs();
    let balance = balance_defect <= tol;

    let side_lower = if c.l > 0.0 {
        c.alpha - c.gamma >= -tol
    } else {
        true
    };
    let side_upper = if c.l > 0.0 && (lhs - first).abs() <= tol {
        c.alpha - c.gamma <= 1.0 + tol
    } else {
        true
    };

    let admissible =
        positivity_p && positivity_q && positivity_r && balance && side_lower && side_upper;
    AdmissibilityReport {
        positivity_p,
        positivity_q,
        positivity_r,
        balance,
        balance_defect,
        side_lower,
        side_upper,
        admissible,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn validate_accepts_interior_points() {
        let p = Params::validate(4, 1.5, 2.0, 0.4).unwrap();
        assert_eq!(p.dim(), 4);
        assert_eq!(p.sigma(), 0.5);
        Params::validate(3, 1.25, 1.6, 0.25).unwrap();
    }

    #[test]
    fn validate_rejects_p_at_or_above_n_over_s() {
        let err = Params::validate(2, 1.5, 1.5, 0.0).unwrap_err();
        match err {
            Error::ConstraintViolation { name, .. } => assert_eq!(name, "p-window"),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn validate_rejects_boundaries() {
        assert!(Params::validate(4, 2.0, 1.5, 0.0).is_err()); // s = 2
        assert!(Params::validate(4, 1.5, 8.0 / 3.0, 0.0).is_err()); // p = N/s
        assert!(Params::validate(4, 1.5, 2.0, 0.5).is_err()); // a = (N-sp)/2
        assert!(Params::validate(1, 1.5, 1.2, 0.0).is_err());
    }

    #[test]
    fn validate_is_idempotent() {
        let p = Params::validate(3, 1.25, 1.6, 0.25).unwrap();
        let again = Params::validate(p.dim(), p.s(), p.p(), p.a()).unwrap();
        assert_eq!(p, again);
    }

    #[test]
    fn critical_exponent_examples() {
        assert_eq!(critical_exponent(4, 2.0, 1.5).unwrap(), 8.0);
        assert_eq!(critical_exponent(4, 2.0, 0.0).unwrap(), 2.0);
        assert!((critical_exponent(4, 2.0, 0.5).unwrap() - 8.0 / 3.0).abs() < 1e-15);
        assert!(matches!(
            critical_exponent(4, 2.0, 2.0),
            Err(Error::DegenerateExponent(_))
        ));
    }

    #[test]
    fn lorentz_target_examples() {
        // s = 2 is allowed here even though validate() rejects it.
        assert_eq!(lorentz_target(6, 2.0, 2.0, 0.0).unwrap(), 6.0);
        assert!((lorentz_target(3, 1.25, 1.6, 0.25).unwrap() - 9.6).abs() < 1e-12);
    }

    #[test]
    fn lorentz_target_matches_critical_exponent_at_a_zero() {
        let p = Params::validate(3, 1.25, 1.6, 0.0).unwrap();
        let lt = p.lorentz_target();
        let ce = p.critical_exponent(p.s()).unwrap();
        assert!((lt - ce).abs() <= 1e-15 * ce.abs());
    }

    #[test]
    fn unit_ball_volumes() {
        assert!((unit_ball_volume(1) - 2.0).abs() < 1e-14);
        assert!((unit_ball_volume(2) - std::f64::consts::PI).abs() < 1e-14);
        assert!((unit_ball_volume(3) - 4.0 * std::f64::consts::PI / 3.0).abs() < 1e-14);
        // large N stays finite thanks to the log-Gamma path
        assert!(unit_ball_volume(64) > 0.0);
        assert!(unit_ball_volume(64) < 1e-13);
    }

    #[test]
    fn ckn_first_order_choice_is_admissible() {
        let params = Params::validate(3, 1.25, 1.6, 0.25).unwrap();
        let c = CknParams::first_order_choice(&params);
        let m = c.m();
        assert!((m - c.gamma).abs() < 1e-15);
        assert!((m - (c.alpha - 1.0)).abs() < 1e-15);
        let report = ckn_admissible(&c, CKN_BALANCE_TOL);
        assert!(report.admissible, "{report:?}");
    }

    #[test]
    fn ckn_positivity_failure_is_inadmissible() {
        let c = CknParams::new(3, 1.0, 1.0, 1.0, -4.0, 0.0, -4.0, 1.0).unwrap();
        let report = ckn_admissible(&c, CKN_BALANCE_TOL);
        assert!(!report.positivity_p);
        assert!(!report.admissible);
    }

    #[test]
    fn ckn_l_zero_balance_holds_identically() {
        // l = 0, r = q, m = beta: the balance relation is an identity.
        let c = CknParams::new(4, 2.0, 3.0, 3.0, 0.7, -0.3, 5.0, 0.0).unwrap();
        let report = ckn_admissible(&c, CKN_BALANCE_TOL);
        assert!(report.balance);
        assert!(report.admissible);
    }

    fn valid_params_strategy() -> impl Strategy<Value = Params> {
        (2u32..6, 0.0f64..1.0, 0.0f64..1.0, 0.0f64..1.0).prop_map(|(dim, ts, tp, ta)| {
            let s = 1.0 + 0.02 + ts * 0.96;
            let n = dim as f64;
            let p = 1.0 + (0.01 + 0.98 * tp) * (n / s - 1.0);
            let a_bound = (n - s * p) / 2.0;
            let a = (1e-6 + ta * 0.98) * a_bound;
            Params::validate(dim, s, p, a).expect("constructed inside the window")
        })
    }

    proptest! {
        #[test]
        fn exponent_chain_is_monotone(params in valid_params_strategy()) {
            let p = params.p();
            let ps = params.p_star_sigma();
            let pss = params.p_star_s();
            let pl = params.lorentz_target();
            prop_assert!(p < ps && ps < pss && pss < pl, "chain broken: {p} {ps} {pss} {pl}");
            prop_assert!(pl.is_finite());
        }

        #[test]
        fn ckn_report_is_stable_under_m_recomputation(params in valid_params_strategy()) {
            let c = CknParams::first_order_choice(&params);
            let r1 = ckn_admissible(&c, CKN_BALANCE_TOL);
            let r2 = ckn_admissible(&c.clone(), CKN_BALANCE_TOL);
            prop_assert_eq!(r1.admissible, r2.admissible);
            prop_assert!(r1.admissible);
        }
    }
}
