//! Suite definitions: each suite is a list of independent jobs keyed by a
//! stable name.

use crate::config::RunConfig;
use crate::report::Job;
use anyhow::{anyhow, bail};
use fraclab::functions::{catalog, scale, TestFunction};
use fraclab::mollify::{approximation_sequence, cutoff, mollifier};
use fraclab::norms::{
    gagliardo_grad, homogeneous_norm, weighted_lp, weighted_lp_grad,
};
use fraclab::params::{ckn_admissible, CknParams, CKN_BALANCE_TOL};
use fraclab::rearrange::{
    hardy_layercake_identity, layer_cake_check, lorentz_quasinorm, sobolev_layercake_identity,
};
use fraclab::verify::{
    ckn_first_order_check, elementary_bounds_check, grad_equivalence_check, hardy_check,
    lorentz_embedding_check, poincare_failure_probe, rellich_check, weak_young_check,
    PoincareKind, Verdict,
};
use fraclab::{unit_ball_volume, Params};
use serde_json::json;

pub const SUITES: &[&str] = &[
    "params",
    "norms",
    "rearrange",
    "mollify-approx",
    "inequalities",
];

pub fn function_by_name(name: &str, dim: usize) -> anyhow::Result<TestFunction> {
    if name == "zero" {
        return Ok(TestFunction::zero(dim));
    }
    catalog(name, dim).map_err(|e| anyhow!("{e}"))
}

pub fn jobs_for_suite(suite: &str, config: &RunConfig) -> anyhow::Result<Vec<Job>> {
    match suite {
        "params" => Ok(params_jobs(config)),
        "norms" => Ok(norms_jobs(config)),
        "rearrange" => Ok(rearrange_jobs(config)),
        "mollify-approx" => Ok(mollify_jobs(config)),
        "inequalities" => Ok(inequality_jobs(config)),
        "all" => {
            let mut jobs = Vec::new();
            for s in SUITES {
                jobs.extend(jobs_for_suite(s, config)?);
            }
            Ok(jobs)
        }
        other => bail!("unknown suite `{other}` (expected one of {SUITES:?} or all)"),
    }
}

fn params_jobs(config: &RunConfig) -> Vec<Job> {
    let cfg = config.clone();
    let exponents = Job::new("params/exponents", "exponents", move || {
        let params = cfg.params()?;
        Ok(json!({
            "n": params.dim(),
            "s": params.s(),
            "sigma": params.sigma(),
            "p": params.p(),
            "a": params.a(),
            "p_star_sigma": params.p_star_sigma(),
            "p_star_s": params.p_star_s(),
            "lorentz_target": params.lorentz_target(),
            "homogeneity_kappa": params.homogeneity_kappa(),
            "unit_ball_volume": unit_ball_volume(params.dim()),
        }))
    });
    let cfg = config.clone();
    let ckn = Job::new("params/ckn_choice", "admissibility", move || {
        let params = cfg.params()?;
        let choice = CknParams::first_order_choice(&params);
        let report = ckn_admissible(&choice, CKN_BALANCE_TOL);
        Ok(json!({ "choice": choice, "report": report }))
    });
    vec![exponents, ckn]
}

fn norms_jobs(config: &RunConfig) -> Vec<Job> {
    let mut jobs = Vec::new();
    for (key, spec) in [
        ("norms/weighted_lp", "weighted_lp"),
        ("norms/grad_lp", "grad_lp"),
        ("norms/gagliardo", "gagliardo"),
        ("norms/homogeneous", "homogeneous"),
    ] {
        let cfg = config.clone();
        jobs.push(Job::new(key, "norm", move || {
            let params = cfg.params()?;
            let u = function_by_name(&cfg.function, params.dim() as usize)?;
            let value = match spec {
                "weighted_lp" => weighted_lp(&u, params.p(), params.a(), &cfg.mc())?,
                "grad_lp" => weighted_lp_grad(&u, params.p(), params.a(), &cfg.mc())?,
                "gagliardo" => gagliardo_grad(
                    &u,
                    params.sigma(),
                    params.p(),
                    params.a(),
                    &cfg.mc_gagliardo(),
                )?,
                "homogeneous" => {
                    let h = homogeneous_norm(&u, &params, &cfg.mc_gagliardo())?;
                    return Ok(serde_json::to_value(h)?);
                }
                _ => unreachable!(),
            };
            Ok(serde_json::to_value(value)?)
        }));
    }

    // kappa = 0 scaling checks at lambda = 2
    let cfg = config.clone();
    jobs.push(Job::new("norms/scaling_weighted", "scaling", move || {
        let params = cfg.params()?;
        let u = function_by_name(&cfg.function, params.dim() as usize)?;
        let lambda = 2.0f64;
        let p = params.p();
        let base = weighted_lp(&u, p, params.a(), &cfg.mc())?.powf(p);
        let scaled = weighted_lp(&scale(&u, lambda, 0.0), p, params.a(), &cfg.mc())?.powf(p);
        let predicted = lambda.powf(params.a() - params.n()) * base.value;
        let gap = if predicted == 0.0 {
            0.0
        } else {
            (scaled.value - predicted).abs() / predicted.abs()
        };
        let tol = 1e-7f64.max(
            3.0 * (scaled.uncertainty + base.uncertainty) / predicted.abs().max(1e-300),
        );
        Ok(json!({
            "lambda": lambda,
            "expected_exponent": params.a() - params.n(),
            "base": base, "scaled": scaled,
            "relative_gap": gap,
            "verdict": if gap <= tol { "holds" } else { "violated" },
        }))
    }));
    let cfg = config.clone();
    jobs.push(Job::new("norms/scaling_seminorm", "scaling", move || {
        let params = cfg.params()?;
        let u = function_by_name(&cfg.function, params.dim() as usize)?;
        let lambda = 2.0f64;
        let p = params.p();
        let mc = cfg.mc_gagliardo();
        let base = gagliardo_grad(&u, params.sigma(), p, params.a(), &mc)?.powf(p);
        let scaled =
            gagliardo_grad(&scale(&u, lambda, 0.0), params.sigma(), p, params.a(), &mc)?.powf(p);
        let exponent = 2.0 * params.a() - params.n() + params.s() * p;
        let predicted = lambda.powf(exponent) * base.value;
        let gap = (scaled.value - predicted).abs();
        let tol = 3.0 * (scaled.uncertainty + lambda.powf(exponent) * base.uncertainty);
        Ok(json!({
            "lambda": lambda,
            "expected_exponent": exponent,
            "base": base, "scaled": scaled,
            "absolute_gap": gap,
            "verdict": if gap <= tol { "holds" } else { "violated" },
        }))
    }));
    jobs
}

fn rearrange_jobs(config: &RunConfig) -> Vec<Job> {
    let mut jobs = Vec::new();
    let cfg = config.clone();
    jobs.push(Job::new("rearrange/layer_cake", "identity", move || {
        let params = cfg.params()?;
        let u = function_by_name(&cfg.function, params.dim() as usize)?;
        Ok(serde_json::to_value(layer_cake_check(
            &u,
            &cfg.mc(),
            1e-6,
        )?)?)
    }));
    let cfg = config.clone();
    jobs.push(Job::new(
        "rearrange/weak_norm_closed_form",
        "closed_form",
        move || {
            let params = cfg.params()?;
            let dim = params.dim() as usize;
            let g = catalog("power_singular(1.0)", dim)?;
            let est = lorentz_quasinorm(&g, params.n(), None, &cfg.mc())?;
            let truth = unit_ball_volume(params.dim()).powf(1.0 / params.n());
            let gap = (est.value - truth).abs() / truth;
            Ok(json!({
                "estimate": est, "closed_form": truth, "relative_gap": gap,
                "verdict": if gap <= 0.01 { "holds" } else { "violated" },
            }))
        },
    ));
    let cfg = config.clone();
    jobs.push(Job::new("rearrange/lorentz_norm", "norm", move || {
        let params = cfg.params()?;
        let u = function_by_name(&cfg.function, params.dim() as usize)?;
        let est = lorentz_quasinorm(&u, params.lorentz_target(), Some(params.p()), &cfg.mc())?;
        Ok(serde_json::to_value(est)?)
    }));
    let cfg = config.clone();
    jobs.push(Job::new("rearrange/hardy_layercake", "identity", move || {
        let params = cfg.params()?;
        let u = function_by_name(&cfg.function, params.dim() as usize)?;
        Ok(serde_json::to_value(hardy_layercake_identity(
            &u,
            &params,
            &cfg.mc(),
            0.02,
        )?)?)
    }));
    let cfg = config.clone();
    jobs.push(Job::new(
        "rearrange/sobolev_layercake",
        "identity",
        move || {
            let params = cfg.params()?;
            let u = function_by_name(&cfg.function, params.dim() as usize)?;
            Ok(serde_json::to_value(sobolev_layercake_identity(
                &u,
                &params,
                &cfg.mc(),
                0.02,
            )?)?)
        },
    ));
    jobs
}

fn mollify_jobs(config: &RunConfig) -> Vec<Job> {
    let mut jobs = Vec::new();
    let cfg = config.clone();
    jobs.push(Job::new("mollify/mass", "mollifier", move || {
        let dim = cfg.n as usize;
        let mut masses = Vec::new();
        for n in [1u32, 2, 4, 8] {
            let m = mollifier(n, dim).map_err(|e| anyhow!("{e}"))?;
            let mass = m.mass().map_err(|e| anyhow!("{e}"))?;
            let ok = (mass.value - 1.0).abs() <= 1e-8;
            masses.push(json!({
                "n": n, "mass": mass,
                "verdict": if ok { "holds" } else { "violated" },
            }));
        }
        Ok(json!(masses))
    }));
    let cfg = config.clone();
    jobs.push(Job::new("mollify/cutoff_bounds", "cutoff", move || {
        let dim = cfg.n as usize;
        let mut rows = Vec::new();
        for n in [1u32, 4] {
            let z = cutoff(n, dim).map_err(|e| anyhow!("{e}"))?;
            let nf = n as f64;
            let mut grad_sup: f64 = 0.0;
            let mut hess_sup: f64 = 0.0;
            let mut x = vec![0.0; dim];
            for k in 0..=400 {
                let r = nf * (1.0 + k as f64 / 400.0);
                x[0] = r;
                grad_sup = grad_sup.max(z.grad_norm(&x) * nf);
                let (radial, tangential) = z.second_derivative_terms(r);
                hess_sup = hess_sup.max((radial + tangential) * nf * nf);
            }
            rows.push(json!({ "n": n, "grad_sup_times_n": grad_sup,
                              "hessian_sup_times_n2": hess_sup }));
        }
        Ok(json!(rows))
    }));
    let cfg = config.clone();
    jobs.push(Job::new("approx/residuals", "approximation", move || {
        let params = cfg.params()?;
        let u = function_by_name(&cfg.function, params.dim() as usize)?;
        let mc = cfg.mc_gagliardo();
        let base = gagliardo_grad(&u, params.sigma(), params.p(), params.a(), &mc)
            .map_err(|e| anyhow!("{e}"))?;
        let mut rows = Vec::new();
        for n in [1u32, 2, 4, 8] {
            let (_, residual) =
                approximation_sequence(&u, n, &params, &mc).map_err(|e| anyhow!("{e}"))?;
            rows.push(json!({ "n": n, "residual": residual }));
        }
        Ok(json!({ "base_seminorm": base, "residuals": rows }))
    }));
    jobs
}

fn inequality_jobs(config: &RunConfig) -> Vec<Job> {
    let mut jobs = Vec::new();

    let cfg = config.clone();
    jobs.push(Job::new(
        "verify/elementary_bounds",
        "elementary",
        move || {
            let mut reports = Vec::new();
            let mut violations = 0u64;
            for dim in 2u32..=5 {
                for q in [0.3, 0.5, 1.0, 2.0, 3.7] {
                    let report = elementary_bounds_check(dim, q, 10_000, cfg.seed);
                    violations += report.violations;
                    reports.push(report);
                }
            }
            Ok(json!({
                "total_violations": violations,
                "verdict": if violations == 0 { "holds" } else { "violated" },
                "reports": reports,
            }))
        },
    ));

    for name in ["hardy", "rellich", "ckn_first_order", "grad_equivalence", "lorentz_embedding"] {
        let cfg = config.clone();
        jobs.push(Job::new(
            format!("verify/{name}"),
            "inequality",
            move || {
                let params = cfg.params()?;
                let u = function_by_name(&cfg.function, params.dim() as usize)?;
                run_named_check(name, &u, &params, &cfg)
            },
        ));
        // scale-orbit ratio invariance across lambda in {1/2, 2}
        let cfg = config.clone();
        jobs.push(Job::new(
            format!("verify/{name}/scale_orbit"),
            "scale_orbit",
            move || {
                let params = cfg.params()?;
                let u = function_by_name(&cfg.function, params.dim() as usize)?;
                let base = check_ratio(name, &u, &params, &cfg)?;
                let mut rows = Vec::new();
                let mut verdict = Verdict::Holds;
                for lambda in [0.5, 2.0] {
                    let kappa = if name == "grad_equivalence" {
                        params.homogeneity_kappa()
                    } else {
                        0.0
                    };
                    let scaled = scale(&u, lambda, kappa);
                    let moved = check_ratio(name, &scaled, &params, &cfg)?;
                    let rel_tol =
                        fraclab::verify::DETERMINISTIC_RATIO_SLACK + 3.0 * (base.1 + moved.1);
                    let drift = if base.0 == 0.0 && moved.0 == 0.0 {
                        0.0 // both sides vanish identically (zero function)
                    } else {
                        (moved.0 / base.0 - 1.0).abs()
                    };
                    if !(drift <= rel_tol) {
                        verdict = Verdict::Violated;
                    }
                    rows.push(json!({
                        "lambda": lambda, "ratio": moved.0, "drift": drift, "tolerance": rel_tol,
                    }));
                }
                Ok(json!({ "base_ratio": base.0, "orbit": rows, "verdict": verdict }))
            },
        ));
    }

    let cfg = config.clone();
    jobs.push(Job::new("verify/poincare", "slope", move || {
        let params = cfg.params()?;
        let u = function_by_name(&cfg.function, params.dim() as usize)?;
        let report = poincare_failure_probe(
            &u,
            &params,
            &[0.25, 0.5, 1.0, 2.0, 4.0],
            PoincareKind::Function,
            &cfg.mc_gagliardo(),
        )?;
        Ok(serde_json::to_value(report)?)
    }));
    let cfg = config.clone();
    jobs.push(Job::new("verify/poincare_gradient", "slope", move || {
        let params = cfg.params()?;
        let u = function_by_name(&cfg.function, params.dim() as usize)?;
        let report = poincare_failure_probe(
            &u,
            &params,
            &[0.25, 0.5, 1.0, 2.0, 4.0],
            PoincareKind::Gradient,
            &cfg.mc_gagliardo(),
        )?;
        Ok(serde_json::to_value(report)?)
    }));
    let cfg = config.clone();
    jobs.push(Job::new("verify/weak_young", "inequality", move || {
        let params = cfg.params()?;
        let dim = params.dim() as usize;
        let h = catalog("gaussian", dim)?;
        let n = params.n();
        let q = 2.0 * n / (2.0 * n - 1.0);
        let report = weak_young_check(1.0, &h, n, q, &cfg.mc())?;
        Ok(serde_json::to_value(report)?)
    }));
    jobs
}

/// Full named check with its complete payload.
fn run_named_check(
    name: &str,
    u: &TestFunction,
    params: &Params,
    cfg: &RunConfig,
) -> anyhow::Result<serde_json::Value> {
    Ok(match name {
        "hardy" => serde_json::to_value(hardy_check(
            u,
            params.sigma(),
            params.p(),
            params.a(),
            &cfg.mc_gagliardo(),
        )?)?,
        "rellich" => serde_json::to_value(rellich_check(u, params, &cfg.mc_gagliardo())?)?,
        "ckn_first_order" => {
            serde_json::to_value(ckn_first_order_check(u, params, &cfg.mc())?)?
        }
        "grad_equivalence" => {
            serde_json::to_value(grad_equivalence_check(u, params, &cfg.mc_gagliardo())?)?
        }
        "lorentz_embedding" => {
            serde_json::to_value(lorentz_embedding_check(u, params, &cfg.mc_gagliardo())?)?
        }
        other => bail!("unknown check `{other}`"),
    })
}

/// The check's headline ratio and its relative uncertainty, for orbit
/// comparisons.
fn check_ratio(
    name: &str,
    u: &TestFunction,
    params: &Params,
    cfg: &RunConfig,
) -> anyhow::Result<(f64, f64)> {
    let report = match name {
        "hardy" => hardy_check(u, params.sigma(), params.p(), params.a(), &cfg.mc_gagliardo())?,
        "rellich" => rellich_check(u, params, &cfg.mc_gagliardo())?,
        "ckn_first_order" => ckn_first_order_check(u, params, &cfg.mc())?.hardy_type,
        "grad_equivalence" => grad_equivalence_check(u, params, &cfg.mc_gagliardo())?,
        "lorentz_embedding" => lorentz_embedding_check(u, params, &cfg.mc_gagliardo())?.embedding,
        other => bail!("unknown check `{other}`"),
    };
    let rel = report.combined_uncertainty / report.rhs.value.abs().max(1e-300);
    Ok((report.ratio, rel))
}
