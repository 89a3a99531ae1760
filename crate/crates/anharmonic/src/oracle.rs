//! Independent high-accuracy eigensolvers used as ground truth.
//!
//! Two methods with different failure modes cross-validate each other:
//!
//! - [`solve_fd`]: symmetric second-order finite differences on the parity-
//!   reduced half box [0, L], eigenvalues by Sturm-sequence bisection,
//!   Richardson extrapolation over grid refinements (h² error series);
//! - [`solve_shoot`]: renormalized Numerov integration outward from the
//!   origin and inward from the box edge, eigenvalue located by the zero of
//!   the discrete Wronskian at a matching point, Richardson extrapolation in
//!   the step (h⁴ series). This is the precision instrument; the
//!   finite-difference route is the robust cross-check.
//!
//! The potential is even, so states of index n reduce to the k = n/2 -th
//! eigenvalue of the half problem with parity n mod 2 (even: ψ′(0) = 0,
//! odd: ψ(0) = 0), which both solvers exploit.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::PotentialSpec;

/// An independently computed eigenvalue with solver metadata.
#[derive(Debug, Clone, Serialize)]
pub struct OracleSolution {
    pub energy: f64,
    pub state_index: usize,
    pub box_size: f64,
    pub grid_points: usize,
    pub extrapolation_order: usize,
    pub err_estimate: f64,
}

/// Half-box size such that the true state has decayed to ~e^{-T/2} at L,
/// with T = 46 + 4n.
fn box_size(spec: &PotentialSpec, n: usize) -> f64 {
    let t = 46.0 + 4.0 * n as f64;
    let m2 = spec.m2();
    let g = spec.g();
    if g == 0.0 {
        return (t / m2.sqrt()).sqrt();
    }
    // Solve (2√g/3) L³ + (m²/√g) L = T beyond the well.
    let sg = g.sqrt();
    let mut l = (1.5 * t / sg).cbrt().max(2.0 * spec.well_position() + 1.0);
    for _ in 0..60 {
        let f = 2.0 * sg / 3.0 * l * l * l + m2 / sg * l - t;
        let fp = 2.0 * sg * l * l + m2 / sg;
        if fp <= 0.0 {
            l *= 1.3;
            continue;
        }
        let step = f / fp;
        l -= step;
        if step.abs() < 1e-12 * l.abs() {
            break;
        }
    }
    l.max(1.5 * spec.well_position() + 3.0).max(3.0)
}

/// Parity-reduced tridiagonal (diagonal, off-diagonal) for step h on [0, L].
fn half_line_tridiag(spec: &PotentialSpec, l: f64, n: usize, parity: usize) -> (Vec<f64>, Vec<f64>) {
    let h = l / n as f64;
    let inv_h2 = 1.0 / (h * h);
    match parity {
        0 => {
            // Nodes x_i = i h, i = 0..n-1; ghost symmetry at the origin makes
            // the first off-diagonal √2/h² after symmetrization.
            let d: Vec<f64> = (0..n)
                .map(|i| 2.0 * inv_h2 + spec.eval(i as f64 * h))
                .collect();
            let mut e = vec![-inv_h2; n - 1];
            e[0] = -std::f64::consts::SQRT_2 * inv_h2;
            (d, e)
        }
        _ => {
            // Nodes x_i = i h, i = 1..n-1 (Dirichlet at both ends).
            let d: Vec<f64> = (1..n)
                .map(|i| 2.0 * inv_h2 + spec.eval(i as f64 * h))
                .collect();
            let e = vec![-inv_h2; n - 2];
            (d, e)
        }
    }
}

/// Number of eigenvalues of the symmetric tridiagonal strictly below λ
/// (Sturm sequence via the LDLᵀ pivot signs).
fn sturm_count(d: &[f64], e: &[f64], lambda: f64) -> usize {
    let guard = 1e-300;
    let mut count = 0usize;
    let mut q = d[0] - lambda;
    if q < 0.0 {
        count += 1;
    }
    for i in 1..d.len() {
        let q_safe = if q.abs() < guard {
            if q >= 0.0 {
                guard
            } else {
                -guard
            }
        } else {
            q
        };
        q = (d[i] - lambda) - e[i - 1] * e[i - 1] / q_safe;
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// k-th (0-indexed) eigenvalue by bisection on the Sturm count.
fn kth_eigenvalue(d: &[f64], e: &[f64], k: usize) -> f64 {
    let n = d.len();
    let mut lo = f64::MAX;
    let mut hi = f64::MIN;
    for i in 0..n {
        let left = if i > 0 { e[i - 1].abs() } else { 0.0 };
        let right = if i < n - 1 { e[i].abs() } else { 0.0 };
        lo = lo.min(d[i] - left - right);
        hi = hi.max(d[i] + left + right);
    }
    lo -= 1.0;
    hi += 1.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (hi - lo) < 1e-15 * mid.abs().max(1.0) {
            break;
        }
        if sturm_count(d, e, mid) <= k {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn fd_eigenvalue(spec: &PotentialSpec, l: f64, n: usize, state_index: usize) -> f64 {
    let parity = state_index % 2;
    let k = state_index / 2;
    let (d, e) = half_line_tridiag(spec, l, n, parity);
    kth_eigenvalue(&d, &e, k)
}

/// Richardson extrapolation for a value with an error series in h^p,
/// sampled at h, h/2, h/4, …. Returns the diagonal of the Neville table.
fn richardson_diagonal(vals: &[f64], p: f64) -> Vec<f64> {
    let n = vals.len();
    let mut table = vec![vals.to_vec()];
    for j in 1..n {
        let fac = 2f64.powf(p * j as f64);
        let prev = &table[j - 1];
        let mut row = Vec::with_capacity(n - j);
        for i in 0..n - j {
            row.push((fac * prev[i + 1] - prev[i]) / (fac - 1.0));
        }
        table.push(row);
    }
    (0..n).map(|i| table[i][0]).collect()
}

/// Finite-difference eigenvalue with Richardson extrapolation over at least
/// three grid refinements.
pub fn solve_fd(spec: &PotentialSpec, state_index: usize, target_tol: f64) -> Result<OracleSolution> {
    let target_tol = target_tol.max(1e-12);
    let mut l = box_size(spec, state_index);

    // Boundary sensitivity: doubling the box at fixed step must not move the
    // eigenvalue; enlarge automatically, fail only if it keeps drifting.
    let mut attempts = 0;
    loop {
        let h_probe = l / 2000.0;
        let e1 = fd_eigenvalue(spec, l, 2000, state_index);
        let e2 = fd_eigenvalue(spec, 2.0 * l, (2.0 * l / h_probe) as usize, state_index);
        let shift = (e2 - e1).abs();
        if shift <= (0.1 * target_tol).max(1e-11) * e1.abs().max(1.0) {
            break;
        }
        l *= 2.0;
        attempts += 1;
        if attempts > 3 {
            return Err(Error::BoxSensitivity { shift });
        }
    }

    let n0 = 1000usize;
    let max_levels = 5;
    let mut vals = Vec::new();
    let mut diag_prev = f64::NAN;
    let mut err = f64::INFINITY;
    let mut levels = 0;
    for lev in 0..max_levels {
        let n = n0 << lev;
        vals.push(fd_eigenvalue(spec, l, n, state_index));
        levels = lev + 1;
        if levels >= 3 {
            let diag = richardson_diagonal(&vals, 2.0);
            let last = *diag.last().unwrap();
            let prev = diag[diag.len() - 2];
            err = (last - prev).abs();
            if err < target_tol * last.abs().max(1.0) {
                diag_prev = last;
                break;
            }
            diag_prev = last;
        }
    }
    let n_finest = n0 << (levels - 1);
    let h_min = l / n_finest as f64;
    // Roundoff floor of Sturm bisection scales with the matrix norm.
    let floor = 30.0 * f64::EPSILON * (4.0 / (h_min * h_min) + spec.eval(l).abs());
    Ok(OracleSolution {
        energy: diag_prev,
        state_index,
        box_size: l,
        grid_points: n_finest,
        extrapolation_order: levels - 1,
        err_estimate: err.max(floor),
    })
}

/// One Numerov double sweep; returns the normalized discrete Wronskian at
/// the matching index and the interior node count of the matched solution.
fn numerov_mismatch(
    spec: &PotentialSpec,
    energy: f64,
    l: f64,
    n: usize,
    i_match: usize,
    parity: usize,
) -> (f64, usize) {
    let h = l / n as f64;
    let h2_12 = h * h / 12.0;
    let q = |i: usize| spec.eval(i as f64 * h) - energy;

    // Outward sweep from the origin with parity-correct start values.
    let (mut ym, mut yi, mut nodes, start) = match parity {
        0 => {
            let y0 = 1.0;
            let y1 = y0 * (1.0 + 5.0 * h2_12 * q(0)) / (1.0 - h2_12 * q(1));
            (y0, y1, 0usize, 1usize)
        }
        _ => {
            let q0 = q(0);
            (0.0, h + q0 * h * h * h / 6.0, 0usize, 1usize)
        }
    };
    let mut out_pair = (ym, yi);
    for i in start..=i_match {
        let yn = (2.0 * yi * (1.0 + 5.0 * h2_12 * q(i)) - ym * (1.0 - h2_12 * q(i - 1)))
            / (1.0 - h2_12 * q(i + 1));
        ym = yi;
        yi = yn;
        if ym != 0.0 && yi != 0.0 && (ym < 0.0) != (yi < 0.0) && i < i_match {
            nodes += 1;
        }
        if yi.abs() > 1e120 {
            ym /= 1e120;
            yi /= 1e120;
        }
        if i == i_match {
            out_pair = (ym, yi); // (y[i_match], y[i_match + 1])
        }
    }

    // Inward sweep from the Dirichlet edge.
    let mut yp = 0.0f64; // y[n]
    let mut yj = 1e-250f64; // y[n-1]
    let mut in_nodes = 0usize;
    let mut in_pair = (yj, yp);
    let mut j = n - 1;
    while j > i_match {
        let ynm = (2.0 * yj * (1.0 + 5.0 * h2_12 * q(j)) - yp * (1.0 - h2_12 * q(j + 1)))
            / (1.0 - h2_12 * q(j - 1));
        yp = yj;
        yj = ynm;
        if yp != 0.0 && yj != 0.0 && (yp < 0.0) != (yj < 0.0) {
            in_nodes += 1;
        }
        if yj.abs() > 1e120 {
            yp /= 1e120;
            yj /= 1e120;
        }
        j -= 1;
    }
    in_pair.0 = yj; // y[i_match]
    in_pair.1 = yp; // y[i_match + 1]

    let (o0, o1) = out_pair;
    let (i0, i1) = in_pair;
    let w = o0 * i1 - o1 * i0;
    let scale = o0.abs() * i0.abs() + o1.abs() * i1.abs() + f64::MIN_POSITIVE;
    (w / scale, nodes + in_nodes)
}

/// All Wronskian roots inside the window, ascending, with node counts.
#[doc(hidden)]
pub fn shoot_roots_in_window(
    spec: &PotentialSpec,
    l: f64,
    n: usize,
    i_match: usize,
    parity: usize,
    e_lo: f64,
    e_hi: f64,
    scan_points: usize,
) -> Vec<(f64, usize)> {
    let w_of = |e: f64| numerov_mismatch(spec, e, l, n, i_match, parity);
    let mut roots = Vec::new();
    let mut prev_e = e_lo;
    let mut prev_w = w_of(prev_e).0;
    for i in 1..=scan_points {
        let e = e_lo + (e_hi - e_lo) * i as f64 / scan_points as f64;
        let w = w_of(e).0;
        if prev_w == 0.0 {
            prev_e = e;
            prev_w = w;
            continue;
        }
        if w != 0.0 && (prev_w < 0.0) != (w < 0.0) {
            // Polish: secant alternated with strict bisection, so the
            // bracket provably halves every other step (plain regula falsi
            // stagnates against the steep side of the crossing).
            let (mut a, mut b, mut fa, mut fb) = (prev_e, e, prev_w, w);
            for it in 0..110 {
                let width = b - a;
                let mid = if it % 2 == 1 && (fb - fa).abs() > 0.0 {
                    let s = a - fa * width / (fb - fa);
                    if s > a + 1e-3 * width && s < b - 1e-3 * width {
                        s
                    } else {
                        0.5 * (a + b)
                    }
                } else {
                    0.5 * (a + b)
                };
                let fm = w_of(mid).0;
                if fm == 0.0 {
                    a = mid;
                    b = mid;
                    break;
                }
                if (fm < 0.0) == (fa < 0.0) {
                    a = mid;
                    fa = fm;
                } else {
                    b = mid;
                    fb = fm;
                }
                if (b - a).abs() < 1e-14 * b.abs().max(1.0) {
                    break;
                }
            }
            let root = 0.5 * (a + b);
            let nodes = w_of(root).1;
            roots.push((root, nodes));
        }
        prev_e = e;
        prev_w = w;
    }
    roots
}

#[doc(hidden)]
pub fn shoot_eigenvalue(
    spec: &PotentialSpec,
    l: f64,
    n: usize,
    state_index: usize,
) -> Result<f64> {
    let parity = state_index % 2;
    let k = state_index / 2;
    let h = l / n as f64;

    // Matching point: outer turning region, clamped inside the box.
    let e_scale = spec.v_min().abs().max(spec.m2().abs()).max(1.0);
    let mut x_match = spec.well_position() + 1.0;
    while x_match < 0.8 * l && spec.eval(x_match) < 4.0 * e_scale {
        x_match += 0.1;
    }
    let i_match = ((x_match / h) as usize).clamp(n / 10, 8 * n / 10);

    let omega = (2.0 * spec.m2().abs()).sqrt().max(2.0 * spec.g().cbrt()).max(1.0);
    let e_lo = spec.v_min() - 0.5;
    let mut span = omega * (2.0 * (k + 1) as f64 + 2.0) + 2.0;
    for _attempt in 0..8 {
        let e_hi = e_lo + span;
        let scan = 48 * (k + 1);
        let roots = shoot_roots_in_window(spec, l, n, i_match, parity, e_lo, e_hi, scan);
        if let Some(&(root, _)) = roots.iter().find(|&&(_, nodes)| nodes == k) {
            return Ok(root);
        }
        // Enough roots found but none with the right node count usually means
        // the scan was too coarse; otherwise widen the window.
        if roots.len() > k {
            let denser =
                shoot_roots_in_window(spec, l, n, i_match, parity, e_lo, e_hi, scan * 4);
            if let Some(&(root, _)) = denser.iter().find(|&&(_, nodes)| nodes == k) {
                return Ok(root);
            }
        }
        span *= 1.8;
    }
    Err(Error::BracketNotFound {
        lo: e_lo,
        hi: e_lo + span,
    })
}

/// Shooting eigenvalue with Richardson extrapolation in the Numerov step.
pub fn solve_shoot(
    spec: &PotentialSpec,
    state_index: usize,
    target_tol: f64,
) -> Result<OracleSolution> {
    let target_tol = target_tol.max(1e-12);
    let l = box_size(spec, state_index);

    // Resolve the local wavelength comfortably everywhere that matters.
    let kappa = (spec.eval((spec.well_position() + 3.0).min(l)) - spec.v_min())
        .abs()
        .sqrt()
        .max(1.0);
    let n0 = ((l * kappa / 0.05).ceil() as usize).clamp(4000, 40000);

    let mut vals = Vec::new();
    let mut levels = 0usize;
    let mut energy = f64::NAN;
    let mut err = f64::INFINITY;
    for lev in 0..4 {
        let n = n0 << lev;
        vals.push(shoot_eigenvalue(spec, l, n, state_index)?);
        levels = lev + 1;
        if levels >= 2 {
            let diag = richardson_diagonal(&vals, 4.0);
            let last = *diag.last().unwrap();
            let prev = diag[diag.len() - 2];
            err = (last - prev).abs();
            energy = last;
            if err < 0.5 * target_tol * last.abs().max(1.0) {
                break;
            }
        } else {
            energy = vals[0];
        }
    }
    let floor = 5e-14 * energy.abs().max(1.0);
    Ok(OracleSolution {
        energy,
        state_index,
        box_size: l,
        grid_points: n0 << (levels - 1),
        extrapolation_order: levels - 1,
        err_estimate: err.max(floor),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn harmonic_levels_are_exact() {
        let spec = PotentialSpec::new(1.0, 0.0).unwrap();
        let s0 = solve_fd(&spec, 0, 1e-10).unwrap();
        assert_relative_eq!(s0.energy, 1.0, epsilon = 1e-9);
        let s1 = solve_shoot(&spec, 1, 1e-10).unwrap();
        assert_relative_eq!(s1.energy, 3.0, epsilon = 1e-9);
        let s2 = solve_fd(&spec, 2, 1e-9).unwrap();
        assert_relative_eq!(s2.energy, 5.0, epsilon = 1e-8);
    }

    #[test]
    fn harmonic_scaling_with_m() {
        // E_n = (2n+1)√(m²)
        let spec = PotentialSpec::new(4.0, 0.0).unwrap();
        let s = solve_shoot(&spec, 0, 1e-10).unwrap();
        assert_relative_eq!(s.energy, 2.0, epsilon = 1e-9);
    }

    #[test]
    fn methods_agree_on_quartic_ground_state() {
        let spec = PotentialSpec::new(1.0, 2.0).unwrap();
        let fd = solve_fd(&spec, 0, 1e-9).unwrap();
        let sh = solve_shoot(&spec, 0, 1e-10).unwrap();
        assert!(
            (fd.energy - sh.energy).abs() <= fd.err_estimate + sh.err_estimate,
            "fd {} ± {} vs shoot {} ± {}",
            fd.energy,
            fd.err_estimate,
            sh.energy,
            sh.err_estimate
        );
        assert_relative_eq!(sh.energy, 1.607541303, epsilon = 1e-8);
    }

    #[test]
    fn interlacing_of_low_states() {
        let spec = PotentialSpec::new(-1.0, 2.0).unwrap();
        let e: Vec<f64> = (0..4)
            .map(|n| solve_shoot(&spec, n, 1e-9).unwrap().energy)
            .collect();
        for w in e.windows(2) {
            assert!(w[0] < w[1], "levels out of order: {e:?}");
        }
    }

    #[test]
    fn pure_quartic_ground_state() {
        let spec = PotentialSpec::new(0.0, 1.0).unwrap();
        let sh = solve_shoot(&spec, 0, 1e-10).unwrap();
        assert_relative_eq!(sh.energy, 1.06036209, epsilon = 1e-8);
    }

    #[test]
    fn double_well_ground_state() {
        let spec = PotentialSpec::new(-1.0, 2.0).unwrap();
        let fd = solve_fd(&spec, 0, 1e-9).unwrap();
        let sh = solve_shoot(&spec, 0, 1e-10).unwrap();
        assert_relative_eq!(sh.energy, 1.02956085, epsilon = 1e-7);
        assert!((fd.energy - sh.energy).abs() <= fd.err_estimate + sh.err_estimate);
    }
}
