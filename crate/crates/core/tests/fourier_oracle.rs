//! Dual-route validation of the double-integral seminorm engine on a smooth
//! non-compact function: for p = 2 and no weights, the order-t difference
//! energy has a Fourier-side closed form,
//!
//! `iint |u(x)-u(y)|^2 / |x-y|^{N+2t} dx dy
//!    = (2 pi)^{-N} * 2 A(N,t) * int |xi|^{2t} |Fu(xi)|^2 dxi`,
//!
//! where `A(N,t) = int (1 - cos w_1) |w|^{-N-2t} dw` and `Fu` is the
//! non-unitary transform. Every piece of the right side is computed by the
//! deterministic 1-D engine, so this cross-checks the Monte Carlo sampler
//! end to end, independently of the discrete-grid oracle.

use fraclab::functions::gaussian;
use fraclab::norms::gagliardo_fn;
use fraclab::quadrature::{integrate_1d, integrate_radial, McConfig};
use std::f64::consts::{PI, TAU};

/// Bessel J0 by the angular average `(1/2pi) int cos(r sin theta) d theta`;
/// the trapezoid rule is geometrically accurate for periodic integrands once
/// the oscillation is resolved.
fn bessel_j0(r: f64) -> f64 {
    const NODES: usize = 1024;
    let mut acc = 0.0;
    for k in 0..NODES {
        let theta = TAU * k as f64 / NODES as f64;
        acc += (r * theta.sin()).cos();
    }
    acc / NODES as f64
}

#[test]
fn seminorm_matches_fourier_side_for_the_gaussian() {
    let t = 0.5f64;
    let dim = 2usize;
    let u = gaussian(dim);
    let cfg = McConfig {
        seed: 0xf0,
        sample_count: 400_000,
        truncation_radius: 8.0,
        singular_split_radius: 0.5,
    };

    // left: Monte Carlo seminorm, squared
    let lhs = gagliardo_fn(&u, t, 2.0, 0.0, &cfg).unwrap().powf(2.0);

    // A(2, t) = 2 pi [ int_0^R (1 - J0(r)) r^{-1-2t} dr + R^{-2t}/(2t) ],
    // neglecting the oscillatory remainder int_R^inf J0 r^{-1-2t} = O(R^{-1/2-2t})
    let cutoff = 400.0;
    let (inner, _) = integrate_1d(
        |r: f64| {
            if r == 0.0 {
                return 0.0;
            }
            (1.0 - bessel_j0(r)) * r.powf(-1.0 - 2.0 * t)
        },
        0.0,
        cutoff,
        1e-12,
        1e-9,
    )
    .unwrap();
    let a_constant = TAU * (inner + cutoff.powf(-2.0 * t) / (2.0 * t));

    // Fourier side: |Fu(xi)|^2 = pi^2 exp(-|xi|^2/2) for the gaussian, and
    // the |xi|^{2t} factor enters as a negative weight power
    let spectral = integrate_radial(
        |r: f64| PI * PI * (-0.5 * r * r).exp(),
        -2.0 * t,
        dim,
        None,
    )
    .unwrap();

    let rhs = 2.0 * a_constant * spectral.value / TAU.powi(dim as i32);

    let tolerance = 3.0 * lhs.uncertainty + 2e-3 * rhs;
    assert!(
        (lhs.value - rhs).abs() <= tolerance,
        "seminorm^2 {} +- {} vs Fourier side {rhs} (A = {a_constant})",
        lhs.value,
        lhs.uncertainty
    );
}
