use anharmonic::{lpt, varopt, PotentialSpec, QuadratureConfig};

fn main() {
    let cfg = QuadratureConfig::default();
    let cases = [
        (1.0, 2.0, 1.607541303542f64),
        (0.0, 1.0, 1.060362094762),
        (-1.0, 2.0, 1.029560850845),
    ];
    for (m2, g, e1_ref) in cases {
        let spec = PotentialSpec::new(m2, g).unwrap();
        let t0 = std::time::Instant::now();
        let r = varopt::case1_optimize(&spec, 0, &cfg).unwrap();
        let e_exp = r.best.full_params_unchecked().map(|p| p.e_exp(g));
        println!(
            "case1 m2={m2} g={g}: E1 = {:.12} (ref {:.12}, diff {:+.2e}) evals {} conv {} [{} ms] e_exp {:?}",
            r.best_e1, e1_ref, r.best_e1 - e1_ref, r.evals_used, r.converged,
            t0.elapsed().as_millis(), e_exp
        );
        if let anharmonic::TrialFunction::Excited(e) = &r.best {
            println!("   params: a0={:.6} a={:.8} b={:.6} c={:.6} d={:.6}", e.base.a0, e.base.a, e.base.b, e.base.c, e.base.d);
        }
        let t1 = std::time::Instant::now();
        let r2 = varopt::case2_optimize(&spec, 0, &cfg).unwrap();
        println!("   case2: E1 = {:.12} (diff vs case1 {:+.2e}) [{} ms]", r2.best_e1, r2.best_e1 - r.best_e1, t1.elapsed().as_millis());
        let s = lpt::run_series(&spec, &r.best, 2, &cfg).unwrap();
        println!("   E(2) at case1 opt = {:.12}", s.partial_sum(2));
    }
}
