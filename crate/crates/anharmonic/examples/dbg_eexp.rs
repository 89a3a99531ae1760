// Pin (a0, a, b, d) from the table; minimize over c alone; check e_exp.
use anharmonic::trial::{FullTrialParams, TrialFunction};
use anharmonic::varopt::{minimize, FreeParam, OptimizationProblem};
use anharmonic::{PotentialSpec, QuadratureConfig};

fn main() {
    let cfg = QuadratureConfig::default();
    let cases = [
        (1.0, 2.0, 1.79502293, 0.7796, 1.607362918f64),
        (0.0, 1.0, 0.37849775, 0.2535, 1.059963236),
        (-1.0, 2.0, 1.10179879, -1.8484, 1.030192509),
    ];
    for (m2, g, a, a0, e_exp_ref) in cases {
        let spec = PotentialSpec::new(m2, g).unwrap();
        let d = (3.0 * (a - m2)).sqrt();
        let init = FullTrialParams::new(a0, a, 4.0 / 3.0, 0.8, d).unwrap();
        let mut prob = OptimizationProblem::new(spec, TrialFunction::Full(init), vec![FreeParam::C]);
        prob.seed = 1;
        prob.tol_energy = 1e-13;
        let r = minimize(&prob, &cfg).unwrap();
        let p = r.best.full_params_unchecked().unwrap();
        println!(
            "m2={m2}: c_opt = {:.8}  e_exp = {:.9}  ref {:.9}  diff {:+.2e}   E1 = {:.12}",
            p.c, p.e_exp(g), e_exp_ref, p.e_exp(g) - e_exp_ref, r.best_e1
        );
    }
}
