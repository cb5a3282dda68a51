//! Catalog of analytic test functions on R^N with exact gradients, plus the
//! scaling operator `u_lambda(x) = lambda^kappa u(lambda x)`.
//!
//! The catalog is closed: every entry carries closed-form values and
//! gradients, so quadrature error is the only error source downstream.

use crate::error::{Error, Result};
use std::fmt;
use std::sync::{Arc, OnceLock};

/// Smoothness tag controlling which operations accept a function.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Smoothness {
    /// Smooth with compact support.
    CcInfinity,
    /// Smooth with rapid decay (no compact support).
    SmoothDecay,
    /// Admissible only for rearrangement/distribution operations.
    RearrangementOnly,
}

/// One-dimensional radial profile with exact derivative.
pub trait RadialProfile: Send + Sync {
    fn value(&self, r: f64) -> f64;
    fn derivative(&self, r: f64) -> f64;
}

type EvalFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
type GradFn = Arc<dyn Fn(&[f64], &mut [f64]) + Send + Sync>;

/// Analytically defined u: R^N -> R with exact gradient and support metadata.
#[derive(Clone)]
pub struct TestFunction {
    name: String,
    dim: usize,
    smoothness: Smoothness,
    support_radius: Option<f64>,
    radial: bool,
    profile: Option<Arc<dyn RadialProfile>>,
    eval: EvalFn,
    grad: GradFn,
}

impl fmt::Debug for TestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TestFunction")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("smoothness", &self.smoothness)
            .field("support_radius", &self.support_radius)
            .field("radial", &self.radial)
            .finish()
    }
}

impl TestFunction {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn smoothness(&self) -> Smoothness {
        self.smoothness
    }

    /// `None` means unbounded support.
    pub fn support_radius(&self) -> Option<f64> {
        self.support_radius
    }

    pub fn radial(&self) -> bool {
        self.radial
    }

    pub fn profile(&self) -> Option<&Arc<dyn RadialProfile>> {
        self.profile.as_ref()
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim);
        (self.eval)(x)
    }

    pub fn grad_into(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.dim);
        debug_assert_eq!(out.len(), self.dim);
        (self.grad)(x, out)
    }

    pub fn grad(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        self.grad_into(x, &mut out);
        out
    }

    pub fn grad_norm(&self, x: &[f64]) -> f64 {
        let mut out = vec![0.0; self.dim];
        self.grad_into(x, &mut out);
        out.iter().map(|g| g * g).sum::<f64>().sqrt()
    }

    /// True for entries admissible in seminorm quadrature.
    pub fn is_smooth(&self) -> bool {
        matches!(
            self.smoothness,
            Smoothness::CcInfinity | Smoothness::SmoothDecay
        )
    }

    /// Assembles a function from raw parts; used by derived constructions
    /// (convolutions, cutoff products) that live outside this module.
    #[allow(clippy::too_many_arguments)]
    pub fn from_parts(
        name: String,
        dim: usize,
        smoothness: Smoothness,
        support_radius: Option<f64>,
        radial: bool,
        profile: Option<Arc<dyn RadialProfile>>,
        eval: EvalFn,
        grad: GradFn,
    ) -> Self {
        TestFunction {
            name,
            dim,
            smoothness,
            support_radius,
            radial,
            profile,
            eval,
            grad,
        }
    }

    /// Identically-zero function; useful as the trivial case of every check.
    pub fn zero(dim: usize) -> Self {
        TestFunction {
            name: "zero".into(),
            dim,
            smoothness: Smoothness::CcInfinity,
            support_radius: Some(1.0),
            radial: true,
            profile: Some(Arc::new(ZeroProfile)),
            eval: Arc::new(|_| 0.0),
            grad: Arc::new(|_, out| out.fill(0.0)),
        }
    }
}

struct ZeroProfile;
impl RadialProfile for ZeroProfile {
    fn value(&self, _r: f64) -> f64 {
        0.0
    }
    fn derivative(&self, _r: f64) -> f64 {
        0.0
    }
}

fn norm_sq(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

// ---------------------------------------------------------------------------
// Smooth transition built by integrating the standard one-dimensional bump.
// ---------------------------------------------------------------------------

/// C-infinity monotone transition `T` with `T = 1` on `r <= 1` and `T = 0`
/// on `r >= 2`, defined by `T(r) = (1/Z) \int_r^2 b(t) dt` where
/// `b(t) = exp(-1/((t-1)(2-t)))` and `Z` normalizes. The derivative
/// `T'(r) = -b(r)/Z` is closed-form; values come from a Simpson prefix table
/// refined by cubic Hermite interpolation (node error ~1e-13).
pub struct SmoothTransition {
    nodes: Vec<f64>,   // cumulative integral of b from 1 to t_i
    total: f64,        // Z
    step: f64,
}

fn transition_bump(t: f64) -> f64 {
    if t <= 1.0 || t >= 2.0 {
        0.0
    } else {
        (-1.0 / ((t - 1.0) * (2.0 - t))).exp()
    }
}

fn transition_bump_derivative(t: f64) -> f64 {
    if t <= 1.0 || t >= 2.0 {
        0.0
    } else {
        let g = (t - 1.0) * (2.0 - t);
        transition_bump(t) * (3.0 - 2.0 * t) / (g * g)
    }
}

impl SmoothTransition {
    fn build() -> Self {
        const M: usize = 4096;
        let step = 1.0 / M as f64;
        let mut nodes = Vec::with_capacity(M + 1);
        nodes.push(0.0);
        let mut acc = 0.0;
        for i in 0..M {
            let a = 1.0 + i as f64 * step;
            let b = a + step;
            let mid = 0.5 * (a + b);
            acc += step / 6.0
                * (transition_bump(a) + 4.0 * transition_bump(mid) + transition_bump(b));
            nodes.push(acc);
        }
        SmoothTransition {
            nodes,
            total: acc,
            step,
        }
    }

    pub fn shared() -> &'static SmoothTransition {
        static INSTANCE: OnceLock<SmoothTransition> = OnceLock::new();
        INSTANCE.get_or_init(SmoothTransition::build)
    }

    /// T(r).
    pub fn value(&self, r: f64) -> f64 {
        if r <= 1.0 {
            return 1.0;
        }
        if r >= 2.0 {
            return 0.0;
        }
        let u = (r - 1.0) / self.step;
        let i = (u as usize).min(self.nodes.len() - 2);
        let t = u - i as f64;
        let h = self.step;
        let (y0, y1) = (self.nodes[i], self.nodes[i + 1]);
        let (d0, d1) = (
            transition_bump(1.0 + i as f64 * h),
            transition_bump(1.0 + (i + 1) as f64 * h),
        );
        // cubic Hermite for the cumulative integral of b
        let t2 = t * t;
        let t3 = t2 * t;
        let cum = y0 * (2.0 * t3 - 3.0 * t2 + 1.0)
            + d0 * h * (t3 - 2.0 * t2 + t)
            + y1 * (-2.0 * t3 + 3.0 * t2)
            + d1 * h * (t3 - t2);
        1.0 - cum / self.total
    }

    /// T'(r) = -b(r)/Z, exact up to the tabulated Z.
    pub fn derivative(&self, r: f64) -> f64 {
        -transition_bump(r) / self.total
    }

    /// T''(r) = -b'(r)/Z.
    pub fn second_derivative(&self, r: f64) -> f64 {
        -transition_bump_derivative(r) / self.total
    }
}

// ---------------------------------------------------------------------------
// Catalog
// ---------------------------------------------------------------------------

/// Closed set of named test functions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CatalogEntry {
    /// `exp(-1/(1-|x|^2))` on the unit ball.
    Bump,
    /// Smooth, identically 1 on B_1, supported in B_2.
    PlateauBump,
    /// `exp(-|x|^2)`.
    Gaussian,
    /// `x_1 * bump(x)`; the non-radial entry.
    PolyBump,
    /// `|x|^{-d}`; rearrangement-only.
    PowerSingular(f64),
    /// Indicator of the ball of radius R; rearrangement-only.
    BallIndicator(f64),
}

impl CatalogEntry {
    pub fn parse(name: &str) -> Result<Self> {
        let name = name.trim();
        match name {
            "bump" => return Ok(CatalogEntry::Bump),
            "plateau_bump" => return Ok(CatalogEntry::PlateauBump),
            "gaussian" => return Ok(CatalogEntry::Gaussian),
            "poly_bump" => return Ok(CatalogEntry::PolyBump),
            _ => {}
        }
        if let Some(arg) = name
            .strip_prefix("power_singular(")
            .and_then(|s| s.strip_suffix(')'))
        {
            let d: f64 = arg
                .trim()
                .parse()
                .map_err(|_| Error::UnknownName(name.into()))?;
            return Ok(CatalogEntry::PowerSingular(d));
        }
        if let Some(arg) = name
            .strip_prefix("ball_indicator(")
            .and_then(|s| s.strip_suffix(')'))
        {
            let r: f64 = arg
                .trim()
                .parse()
                .map_err(|_| Error::UnknownName(name.into()))?;
            return Ok(CatalogEntry::BallIndicator(r));
        }
        Err(Error::UnknownName(name.into()))
    }

    pub fn build(&self, dim: usize) -> Result<TestFunction> {
        match *self {
            CatalogEntry::Bump => Ok(bump(dim)),
            CatalogEntry::PlateauBump => Ok(plateau_bump(dim)),
            CatalogEntry::Gaussian => Ok(gaussian(dim)),
            CatalogEntry::PolyBump => Ok(poly_bump(dim)),
            CatalogEntry::PowerSingular(d) => {
                if d <= 0.0 || d >= dim as f64 {
                    return Err(Error::ConstraintViolation {
                        name: "power_singular-exponent",
                        value: d,
                        bound: format!("0 < d < N = {dim}"),
                    });
                }
                Ok(power_singular(dim, d))
            }
            CatalogEntry::BallIndicator(r) => {
                if r <= 0.0 {
                    return Err(Error::ConstraintViolation {
                        name: "ball_indicator-radius",
                        value: r,
                        bound: "R > 0".into(),
                    });
                }
                Ok(ball_indicator(dim, r))
            }
        }
    }
}

/// Builds a catalog entry by name, e.g. `"bump"` or `"power_singular(1.0)"`.
pub fn catalog(name: &str, dim: usize) -> Result<TestFunction> {
    CatalogEntry::parse(name)?.build(dim)
}

/// Names of the smooth-tagged entries (the seminorm-admissible catalog).
pub fn smooth_catalog_names() -> &'static [&'static str] {
    &["bump", "plateau_bump", "gaussian", "poly_bump"]
}

struct BumpProfile;
impl RadialProfile for BumpProfile {
    fn value(&self, r: f64) -> f64 {
        if r >= 1.0 {
            0.0
        } else {
            (-1.0 / (1.0 - r * r)).exp()
        }
    }
    fn derivative(&self, r: f64) -> f64 {
        if r >= 1.0 {
            0.0
        } else {
            let q = 1.0 - r * r;
            -2.0 * r / (q * q) * (-1.0 / q).exp()
        }
    }
}

pub fn bump(dim: usize) -> TestFunction {
    TestFunction {
        name: "bump".into(),
        dim,
        smoothness: Smoothness::CcInfinity,
        support_radius: Some(1.0),
        radial: true,
        profile: Some(Arc::new(BumpProfile)),
        eval: Arc::new(|x| BumpProfile.value(norm_sq(x).sqrt())),
        grad: Arc::new(|x, out| {
            let r2 = norm_sq(x);
            if r2 >= 1.0 {
                out.fill(0.0);
            } else {
                let q = 1.0 - r2;
                let f = (-1.0 / q).exp();
                let c = -2.0 * f / (q * q);
                for (o, xi) in out.iter_mut().zip(x) {
                    *o = c * xi;
                }
            }
        }),
    }
}

struct PlateauProfile;
impl RadialProfile for PlateauProfile {
    fn value(&self, r: f64) -> f64 {
        SmoothTransition::shared().value(r)
    }
    fn derivative(&self, r: f64) -> f64 {
        SmoothTransition::shared().derivative(r)
    }
}

pub fn plateau_bump(dim: usize) -> TestFunction {
    TestFunction {
        name: "plateau_bump".into(),
        dim,
        smoothness: Smoothness::CcInfinity,
        support_radius: Some(2.0),
        radial: true,
        profile: Some(Arc::new(PlateauProfile)),
        eval: Arc::new(|x| SmoothTransition::shared().value(norm_sq(x).sqrt())),
        grad: Arc::new(|x, out| {
            let r = norm_sq(x).sqrt();
            if !(1.0..2.0).contains(&r) {
                out.fill(0.0);
            } else {
                let c = SmoothTransition::shared().derivative(r) / r;
                for (o, xi) in out.iter_mut().zip(x) {
                    *o = c * xi;
                }
            }
        }),
    }
}

struct GaussianProfile;
impl RadialProfile for GaussianProfile {
    fn value(&self, r: f64) -> f64 {
        (-r * r).exp()
    }
    fn derivative(&self, r: f64) -> f64 {
        -2.0 * r * (-r * r).exp()
    }
}

pub fn gaussian(dim: usize) -> TestFunction {
    TestFunction {
        name: "gaussian".into(),
        dim,
        smoothness: Smoothness::SmoothDecay,
        support_radius: None,
        radial: true,
        profile: Some(Arc::new(GaussianProfile)),
        eval: Arc::new(|x| (-norm_sq(x)).exp()),
        grad: Arc::new(|x, out| {
            let c = -2.0 * (-norm_sq(x)).exp();
            for (o, xi) in out.iter_mut().zip(x) {
                *o = c * xi;
            }
        }),
    }
}

pub fn poly_bump(dim: usize) -> TestFunction {
    TestFunction {
        name: "poly_bump".into(),
        dim,
        smoothness: Smoothness::CcInfinity,
        support_radius: Some(1.0),
        radial: false,
        profile: None,
        eval: Arc::new(|x| x[0] * BumpProfile.value(norm_sq(x).sqrt())),
        grad: Arc::new(|x, out| {
            let r2 = norm_sq(x);
            if r2 >= 1.0 {
                out.fill(0.0);
            } else {
                let q = 1.0 - r2;
                let f = (-1.0 / q).exp();
                let c = -2.0 * f / (q * q) * x[0];
                for (o, xi) in out.iter_mut().zip(x) {
                    *o = c * xi;
                }
                out[0] += f;
            }
        }),
    }
}

struct PowerProfile {
    d: f64,
}
impl RadialProfile for PowerProfile {
    fn value(&self, r: f64) -> f64 {
        r.powf(-self.d)
    }
    fn derivative(&self, r: f64) -> f64 {
        -self.d * r.powf(-self.d - 1.0)
    }
}

pub fn power_singular(dim: usize, d: f64) -> TestFunction {
    TestFunction {
        name: format!("power_singular({d})"),
        dim,
        smoothness: Smoothness::RearrangementOnly,
        support_radius: None,
        radial: true,
        profile: Some(Arc::new(PowerProfile { d })),
        eval: Arc::new(move |x| norm_sq(x).sqrt().powf(-d)),
        grad: Arc::new(|_, out| out.fill(0.0)),
    }
}

struct IndicatorProfile {
    radius: f64,
}
impl RadialProfile for IndicatorProfile {
    fn value(&self, r: f64) -> f64 {
        if r <= self.radius {
            1.0
        } else {
            0.0
        }
    }
    fn derivative(&self, _r: f64) -> f64 {
        0.0
    }
}

pub fn ball_indicator(dim: usize, radius: f64) -> TestFunction {
    TestFunction {
        name: format!("ball_indicator({radius})"),
        dim,
        smoothness: Smoothness::RearrangementOnly,
        support_radius: Some(radius),
        radial: true,
        profile: Some(Arc::new(IndicatorProfile { radius })),
        eval: Arc::new(move |x| {
            if norm_sq(x).sqrt() <= radius {
                1.0
            } else {
                0.0
            }
        }),
        grad: Arc::new(|_, out| out.fill(0.0)),
    }
}

// ---------------------------------------------------------------------------
// Scaling
// ---------------------------------------------------------------------------

/// `u_lambda(x) = lambda^kappa u(lambda x)`, with the exact gradient
/// `lambda^{kappa+1} (grad u)(lambda x)`.
#[derive(Debug, Clone)]
pub struct ScaledFunction {
    pub base: TestFunction,
    pub lambda: f64,
    pub kappa: f64,
}

struct ScaledProfile {
    base: Arc<dyn RadialProfile>,
    lambda: f64,
    amp: f64,
}
impl RadialProfile for ScaledProfile {
    fn value(&self, r: f64) -> f64 {
        self.amp * self.base.value(self.lambda * r)
    }
    fn derivative(&self, r: f64) -> f64 {
        self.amp * self.lambda * self.base.derivative(self.lambda * r)
    }
}

impl ScaledFunction {
    pub fn function(&self) -> TestFunction {
        let lambda = self.lambda;
        let amp = lambda.powf(self.kappa);
        let base_eval = self.base.eval.clone();
        let base_grad = self.base.grad.clone();
        let dim = self.base.dim;
        let profile = self.base.profile.clone().map(|p| {
            Arc::new(ScaledProfile {
                base: p,
                lambda,
                amp,
            }) as Arc<dyn RadialProfile>
        });
        TestFunction {
            name: format!("{}[lambda={},kappa={}]", self.base.name, lambda, self.kappa),
            dim,
            smoothness: self.base.smoothness,
            support_radius: self.base.support_radius.map(|r| r / lambda),
            radial: self.base.radial,
            profile,
            eval: Arc::new(move |x| {
                let y: Vec<f64> = x.iter().map(|v| v * lambda).collect();
                amp * base_eval(&y)
            }),
            grad: Arc::new(move |x, out| {
                let y: Vec<f64> = x.iter().map(|v| v * lambda).collect();
                base_grad(&y, out);
                let c = amp * lambda;
                for o in out.iter_mut() {
                    *o *= c;
                }
            }),
        }
    }
}

/// Scales `u` by `lambda > 0` with homogeneity exponent `kappa`.
pub fn scale(u: &TestFunction, lambda: f64, kappa: f64) -> TestFunction {
    assert!(lambda > 0.0, "lambda must be positive");
    ScaledFunction {
        base: u.clone(),
        lambda,
        kappa,
    }
    .function()
}

// ---------------------------------------------------------------------------
// Vector-field views (used by seminorm quadrature)
// ---------------------------------------------------------------------------

/// A vector field R^N -> R^m evaluated into a caller-provided buffer.
/// Seminorms act on fields; differences are measured in the Euclidean norm.
pub trait VectorField: Send + Sync {
    fn dim(&self) -> usize;
    /// Number of output components (1 for scalar views, N for gradients).
    fn components(&self) -> usize;
    fn eval_into(&self, x: &[f64], out: &mut [f64]);
    /// Radius beyond which the field vanishes (or is negligible).
    fn support_radius(&self) -> Option<f64>;
}

/// Scalar view of a test function.
pub struct ScalarField<'a>(pub &'a TestFunction);

impl VectorField for ScalarField<'_> {
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn components(&self) -> usize {
        1
    }
    fn eval_into(&self, x: &[f64], out: &mut [f64]) {
        out[0] = self.0.eval(x);
    }
    fn support_radius(&self) -> Option<f64> {
        self.0.support_radius()
    }
}

/// Gradient view of a test function.
pub struct GradientField<'a>(pub &'a TestFunction);

impl VectorField for GradientField<'_> {
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn components(&self) -> usize {
        self.0.dim()
    }
    fn eval_into(&self, x: &[f64], out: &mut [f64]) {
        self.0.grad_into(x, out);
    }
    fn support_radius(&self) -> Option<f64> {
        self.0.support_radius()
    }
}

/// Single component of a gradient, for componentwise seminorm variants.
pub struct GradientComponentField<'a> {
    pub function: &'a TestFunction,
    pub component: usize,
}

impl VectorField for GradientComponentField<'_> {
    fn dim(&self) -> usize {
        self.function.dim()
    }
    fn components(&self) -> usize {
        1
    }
    fn eval_into(&self, x: &[f64], out: &mut [f64]) {
        let mut buf = vec![0.0; self.function.dim()];
        self.function.grad_into(x, &mut buf);
        out[0] = buf[self.component];
    }
    fn support_radius(&self) -> Option<f64> {
        self.function.support_radius()
    }
}

/// Difference of the gradients of two functions, `grad u - grad v`.
pub struct GradientDifferenceField<'a> {
    pub left: &'a TestFunction,
    pub right: &'a TestFunction,
}

impl VectorField for GradientDifferenceField<'_> {
    fn dim(&self) -> usize {
        self.left.dim()
    }
    fn components(&self) -> usize {
        self.left.dim()
    }
    fn eval_into(&self, x: &[f64], out: &mut [f64]) {
        self.left.grad_into(x, out);
        let mut buf = vec![0.0; self.right.dim()];
        self.right.grad_into(x, &mut buf);
        for (o, b) in out.iter_mut().zip(&buf) {
            *o -= b;
        }
    }
    fn support_radius(&self) -> Option<f64> {
        match (self.left.support_radius(), self.right.support_radius()) {
            (Some(a), Some(b)) => Some(a.max(b)),
            _ => None,
        }
    }
}
