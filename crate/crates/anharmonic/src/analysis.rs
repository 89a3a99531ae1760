//! Derived studies: critical couplings where the ground-state energy
//! crosses zero, the deep-well scan at fixed quartic coupling, and the
//! ground/first-excited energy gap.
//!
//! Critical points are always located on oracle energies; the perturbative
//! value is the method under test, never the ground truth.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lpt;
use crate::model::PotentialSpec;
use crate::oracle;
use crate::quadgrid::QuadratureConfig;
use crate::varopt;

/// A located zero crossing of the ground-state energy.
#[derive(Debug, Clone, Serialize)]
pub struct CriticalPoint {
    /// The critical parameter (g for fixed m², m² for fixed g).
    pub value: f64,
    /// Oracle energy at the root (should vanish to the oracle's accuracy).
    pub energy_at_root: f64,
    pub energy_err: f64,
    /// m²/g^{2/3} at the root; identical for every critical pair.
    pub scaling_invariant: f64,
}

fn oracle_energy(m2: f64, g: f64, tol: f64) -> Result<f64> {
    let spec = PotentialSpec::new(m2, g)?;
    Ok(oracle::solve_shoot(&spec, 0, tol)?.energy)
}

/// Bisection with secant acceleration inside a sign-changing bracket.
fn hybrid_root<F: FnMut(f64) -> Result<f64>>(
    mut f: F,
    mut a: f64,
    mut b: f64,
    mut fa: f64,
    mut fb: f64,
    xtol: f64,
) -> Result<f64> {
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if (fa < 0.0) == (fb < 0.0) {
        return Err(Error::RootNotBracketed { lo: a, hi: b });
    }
    for _ in 0..120 {
        if (b - a).abs() < xtol {
            break;
        }
        let secant = a - fa * (b - a) / (fb - fa);
        let mid = if secant > a && secant < b && (fb - fa).abs() > 0.0 {
            // Alternate secant and bisection to keep worst-case linear.
            if (b - a) > 4.0 * xtol {
                0.5 * (secant + 0.5 * (a + b))
            } else {
                secant
            }
        } else {
            0.5 * (a + b)
        };
        let fm = f(mid)?;
        if fm == 0.0 {
            return Ok(mid);
        }
        if (fm < 0.0) == (fa < 0.0) {
            a = mid;
            fa = fm;
        } else {
            b = mid;
            fb = fm;
        }
    }
    Ok(0.5 * (a + b))
}

/// Critical quartic coupling for fixed m² < 0: the g at which E = 0.
pub fn critical_g(m2: f64, tol: f64) -> Result<CriticalPoint> {
    if !(m2 < 0.0) {
        return Err(Error::Unsupported(
            "the energy only crosses zero for m² < 0".into(),
        ));
    }
    let e_tol = (0.01 * tol).clamp(1e-11, 1e-9);
    let scale = (-m2).powf(1.5);
    let mut lo = 0.05 * scale;
    let mut hi = 1.2 * scale;
    let mut f_lo = oracle_energy(m2, lo, e_tol)?;
    let mut f_hi = oracle_energy(m2, hi, e_tol)?;
    let mut guard = 0;
    while (f_lo < 0.0) == (f_hi < 0.0) {
        lo /= 3.0;
        hi *= 3.0;
        f_lo = oracle_energy(m2, lo, e_tol)?;
        f_hi = oracle_energy(m2, hi, e_tol)?;
        guard += 1;
        if guard > 6 {
            return Err(Error::BracketNotFound { lo, hi });
        }
    }
    let root = hybrid_root(|g| oracle_energy(m2, g, e_tol), lo, hi, f_lo, f_hi, tol)?;
    let at_root = oracle::solve_shoot(&PotentialSpec::new(m2, root)?, 0, 1e-11)?;
    Ok(CriticalPoint {
        value: root,
        energy_at_root: at_root.energy,
        energy_err: at_root.err_estimate,
        scaling_invariant: m2 / root.powf(2.0 / 3.0),
    })
}

/// Critical m² for fixed g > 0: the m² at which E = 0.
pub fn critical_m2(g: f64, tol: f64) -> Result<CriticalPoint> {
    if !(g > 0.0) {
        return Err(Error::Unsupported("needs g > 0".into()));
    }
    let e_tol = (0.01 * tol).clamp(1e-11, 1e-9);
    let scale = g.powf(2.0 / 3.0);
    let mut lo = -3.2 * scale; // E < 0 side
    let mut hi = -1.2 * scale; // E > 0 side
    let mut f_lo = oracle_energy(lo, g, e_tol)?;
    let mut f_hi = oracle_energy(hi, g, e_tol)?;
    let mut guard = 0;
    while (f_lo < 0.0) == (f_hi < 0.0) {
        lo *= 1.8;
        hi /= 1.8;
        f_lo = oracle_energy(lo, g, e_tol)?;
        f_hi = oracle_energy(hi, g, e_tol)?;
        guard += 1;
        if guard > 6 {
            return Err(Error::BracketNotFound { lo, hi });
        }
    }
    let root = hybrid_root(|m2| oracle_energy(m2, g, e_tol), lo, hi, f_lo, f_hi, tol)?;
    let at_root = oracle::solve_shoot(&PotentialSpec::new(root, g)?, 0, 1e-11)?;
    Ok(CriticalPoint {
        value: root,
        energy_at_root: at_root.energy,
        energy_err: at_root.err_estimate,
        scaling_invariant: root / g.powf(2.0 / 3.0),
    })
}

/// One row of the deep-well scan.
#[derive(Debug, Clone, Serialize)]
pub struct ScanRow {
    pub m2: f64,
    pub g: f64,
    /// Optimized variational energy E⁽¹⁾ (tail-pinned family).
    pub e1_var: Option<f64>,
    /// Second energy correction at the optimum.
    pub e2: Option<f64>,
    pub e_oracle: Option<f64>,
    pub oracle_err: Option<f64>,
    /// Per-row failure note; the scan never aborts on one bad row.
    pub note: Option<String>,
}

/// Optimize, correct, and cross-check each m² at fixed g.
pub fn semiclassical_scan(
    g: f64,
    m2_values: &[f64],
    seed: u64,
    cfg: &QuadratureConfig,
) -> Result<Vec<ScanRow>> {
    if !(g > 0.0) {
        return Err(Error::Unsupported("needs g > 0".into()));
    }
    let mut rows = Vec::with_capacity(m2_values.len());
    for &m2 in m2_values {
        let mut row = ScanRow {
            m2,
            g,
            e1_var: None,
            e2: None,
            e_oracle: None,
            oracle_err: None,
            note: None,
        };
        let spec = match PotentialSpec::new(m2, g) {
            Ok(s) => s,
            Err(e) => {
                row.note = Some(e.to_string());
                rows.push(row);
                continue;
            }
        };
        match oracle::solve_shoot(&spec, 0, 1e-9) {
            Ok(sol) => {
                row.e_oracle = Some(sol.energy);
                row.oracle_err = Some(sol.err_estimate);
            }
            Err(e) => row.note = Some(format!("oracle: {e}")),
        }
        match varopt::case1_optimize(&spec, seed, cfg)
            .and_then(|opt| lpt::run_series(&spec, &opt.best, 2, cfg))
        {
            Ok(series) => {
                row.e1_var = Some(series.partial_sum(1));
                row.e2 = Some(series.e_terms[2]);
            }
            Err(e) => {
                let msg = format!("optimizer: {e}");
                row.note = Some(match row.note.take() {
                    Some(prev) => format!("{prev}; {msg}"),
                    None => msg,
                });
            }
        }
        rows.push(row);
    }
    Ok(rows)
}

/// How to compute the ground/first-excited gap.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum GapMethod {
    /// Second-order perturbation theory around optimized (0,0) and (0,1)
    /// tail-pinned ansätze.
    Lpt,
    /// Independent eigensolver for both states.
    Oracle,
}

/// E(first excited) − E(ground). Positive for every bound spectrum.
pub fn energy_gap(
    spec: &PotentialSpec,
    method: GapMethod,
    seed: u64,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    match method {
        GapMethod::Oracle => {
            let e0 = oracle::solve_shoot(spec, 0, 1e-10)?;
            let e1 = oracle::solve_shoot(spec, 1, 1e-10)?;
            Ok(e1.energy - e0.energy)
        }
        GapMethod::Lpt => {
            let even = varopt::case1_optimize_state(spec, 0, 0, seed, cfg)?;
            let odd = varopt::case1_optimize_state(spec, 0, 1, seed, cfg)?;
            let s_even = lpt::run_series(spec, &even.best, 2, cfg)?;
            let s_odd = lpt::run_series(spec, &odd.best, 2, cfg)?;
            Ok(s_odd.partial_sum(2) - s_even.partial_sum(2))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn harmonic_gap_is_two() {
        let spec = PotentialSpec::new(1.0, 0.0).unwrap();
        let gap = energy_gap(&spec, GapMethod::Oracle, 0, &QuadratureConfig::default()).unwrap();
        assert_relative_eq!(gap, 2.0, epsilon = 1e-8);
    }

    #[test]
    fn critical_g_rejects_single_well() {
        assert!(critical_g(1.0, 1e-5).is_err());
        assert!(critical_m2(0.0, 1e-5).is_err());
    }
}
