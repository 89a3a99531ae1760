// Reconstruct the tabulated Case-1 parameters and run the series.
use anharmonic::trial::{FullTrialParams, TrialFunction};
use anharmonic::{lpt, PotentialSpec, QuadratureConfig};

fn case1_from_table(m2: f64, g: f64, a: f64, a0: f64, e_exp: f64) -> FullTrialParams {
    let d = (3.0 * (a - m2)).sqrt();
    let c2 = e_exp - a / d + a0 * g / (d * d * d);
    FullTrialParams::new(a0, a, 4.0 / 3.0, c2.sqrt(), d).unwrap()
}

fn main() {
    let cases = [
        (1.0, 2.0, 1.79502293, 0.7796, 1.607362918, 1.607541303542, 0.0026, -0.107e-8, 1.607541302469, -0.12e-12),
        (0.0, 1.0, 0.37849775, 0.2535, 1.059963236, 1.060362094762, 0.0029, -0.428e-8, 1.060362090485, -0.64e-12),
        (-1.0, 2.0, 1.10179879, -1.8484, 1.030192509, 1.029560850845, 0.0064, -0.198e-7, 1.029560831059, -0.47e-11),
    ];
    let cfg = QuadratureConfig::default();
    for (m2, g, a, a0, e_exp, e1_ref, y1_ref, e2_ref, ee2_ref, e3_ref) in cases {
        let spec = PotentialSpec::new(m2, g).unwrap();
        let p = case1_from_table(m2, g, a, a0, e_exp);
        println!("== m2={m2}, g={g}:  c = {:.6}, d = {:.6}, e_exp = {:.9}", p.c, p.d, p.e_exp(g));
        let t = TrialFunction::Full(p);
        let t0 = std::time::Instant::now();
        let s = lpt::run_series(&spec, &t, 3, &cfg).unwrap();
        println!("   E(1) = {:.12}   ref {:.12}   diff {:+.2e}", s.partial_sum(1), e1_ref, s.partial_sum(1) - e1_ref);
        println!("   E2   = {:+.4e}      ref {:+.4e}   ratio {:.3}", s.e_terms[2], e2_ref, s.e_terms[2] / e2_ref);
        println!("   E(2) = {:.12}   ref {:.12}   diff {:+.2e}", s.partial_sum(2), ee2_ref, s.partial_sum(2) - ee2_ref);
        println!("   E3   = {:+.4e}      ref {:+.4e}   ratio {:.3}", s.e_terms[3], e3_ref, s.e_terms[3] / e3_ref);
        println!("   y1max= {:.5} @ x = {:.3}   ref {:.4}", s.diagnostics.y1_max, s.diagnostics.y1_argmax, y1_ref);
        println!("   domination R = {:.3}, residuals = {:?}", s.diagnostics.domination_radius, s.diagnostics.riccati_residual);
        println!("   [{} ms]", t0.elapsed().as_millis());
    }
}
