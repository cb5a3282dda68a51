// quick calibration: seminorm variance and runtime
use fraclab::functions::{bump, gaussian, poly_bump, plateau_bump};
use fraclab::norms::{gagliardo_grad, gagliardo_fn};
use fraclab::quadrature::McConfig;
use std::time::Instant;

fn main() {
    // N=2 lab config
    let u = bump(2);
    for samples in [200_000u64, 800_000] {
        let cfg = McConfig::default_for(2).with_samples(samples);
        let t0 = Instant::now();
        let est = gagliardo_grad(&u, 0.3, 1.4, 0.1, &cfg).unwrap();
        println!("N=2 bump grad-seminorm samples={samples}: {:.6} +- {:.6} ({:.2}% rel) in {:?}",
            est.value, est.uncertainty, 100.0*est.uncertainty/est.value, t0.elapsed());
    }
    // N=3 standard config
    for (name, u) in [("bump", bump(3)), ("plateau", plateau_bump(3)), ("gaussian", gaussian(3)), ("poly", poly_bump(3))] {
        let cfg = McConfig::default_for(3);
        let t0 = Instant::now();
        let est = gagliardo_grad(&u, 0.25, 1.6, 0.25, &cfg).unwrap();
        println!("N=3 {name} grad-seminorm samples=1e6: {:.6} +- {:.6} ({:.2}% rel) in {:?}",
            est.value, est.uncertainty, 100.0*est.uncertainty/est.value, t0.elapsed());
    }
    // scalar seminorm (hardy check s'=sigma)
    let u3 = bump(3);
    let cfg = McConfig::default_for(3);
    let t0 = Instant::now();
    let est = gagliardo_fn(&u3, 0.25, 1.6, 0.25, &cfg).unwrap();
    println!("N=3 bump scalar-seminorm: {:.6} +- {:.6} ({:.2}% rel) in {:?}",
        est.value, est.uncertainty, 100.0*est.uncertainty/est.value, t0.elapsed());
}
