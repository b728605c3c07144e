use curveflow_core::fixtures;
use curveflow_core::smoother::{build_corrector, TimeScheme};

fn main() {
    let semi = fixtures::semicircle(128);
    let p = build_corrector(&semi, 1.0).unwrap();
    for &eps in &[1e-4, 1e-5, 1e-6, 1e-7] {
        let sm = p.smooth(eps, 48).unwrap();
        let dist = (0..=128).map(|i| (sm.point(i) - semi.point(i)).norm()).fold(0.0_f64, f64::max);
        println!("eps {eps:.0e}: C0 dist = {dist:.4e}, endpoint v0 = {:.2e}",
            (sm.point(0) - semi.point(0)).norm());
    }
    let mut p2 = build_corrector(&semi, 1.0).unwrap();
    let be = p2.smooth(1e-5, 64).unwrap();
    p2.scheme = TimeScheme::CrankNicolson;
    let cn = p2.smooth(1e-5, 64).unwrap();
    let d = (0..=128).map(|i| (be.point(i) - cn.point(i)).norm()).fold(0.0_f64, f64::max);
    println!("BE vs CN at 1e-5: {d:.3e}");
    // rate probe on the semicircle
    let report = p.rate_probe(&[1e-4, 1e-5, 1e-6, 1e-7], 48).unwrap();
    println!("observed c0 {:?} (theory {:.4})", report.observed_c0, report.theory_c0);
    println!("observed c1 {:?} (theory {:.4})", report.observed_c1, report.theory_c1);
    println!("observed c2 {:?} (theory {:.4})", report.observed_c2, report.theory_c2);
    for s in &report.samples {
        println!("  eps {:.1e}: c0 {:.3e} c1 {:.3e} c2 {:.3e}", s.epsilon, s.c0_dist, s.c1_dist, s.c2_norm);
    }
}
