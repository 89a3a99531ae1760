//! Parameterized trial wavefunctions ψ₀ and their exact companions
//! y₀ = −(log ψ₀)′ and V₀ = y₀² − y₀′.
//!
//! Sign convention used throughout: with ψ = e^{−φ} we take y ≡ φ′ = −ψ′/ψ,
//! so y grows like +√g·x|x| in the tail and the Riccati equation reads
//! y′ − y² = E − V. Every trial family is an interpolation of y between its
//! exact small-x and large-x behavior. The eigenvalue of the generated
//! potential V₀ is fixed to E₀ = 0 by absorbing the constant into V₀.
//!
//! Families:
//! - simple: y₀ = a·x + b√g·x|x| + c·x/(1 + c x²), i.e. a Gaussian times a
//!   cubic-exponential envelope with an optional algebraic prefactor
//!   1/√(1 + c x²) (c = 0 recovers the two-parameter family);
//! - full: ψ₀ = (1 + c²x²)^{−1/2} exp[−(A + a x²/2 + b g x⁴/4)/√(d² + g x²)],
//!   which can reproduce the three leading tail terms of y exactly;
//! - excited: x^p · P_k(x²) times the full envelope, giving the (2k+p)-th
//!   state ansatz with nodes at ±√rᵢ (and at 0 when p = 1).

use serde::Serialize;

use crate::error::{Error, Result};
use crate::quadgrid::{self, Domain, QuadratureConfig};

/// Parameters of the simple family (optionally with the algebraic prefactor).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimpleTrialParams {
    /// Gaussian strength: coefficient of x in y₀.
    pub a: f64,
    /// Cubic envelope strength: coefficient of √g·x|x| in y₀. Must be > 0.
    pub b: f64,
    /// Prefactor parameter in 1/√(1 + c x²). Must be ≥ 0; 0 disables it.
    pub c: f64,
}

impl SimpleTrialParams {
    pub fn new(a: f64, b: f64, c: f64) -> Result<Self> {
        if ![a, b, c].iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidTrial("non-finite simple-family parameter".into()));
        }
        if b <= 0.0 {
            return Err(Error::InvalidTrial(format!("b = {b} must be positive")));
        }
        if c < 0.0 {
            return Err(Error::InvalidTrial(format!("c = {c} must be non-negative")));
        }
        Ok(Self { a, b, c })
    }

    /// Parameters that represent the same state after scaling the coupling
    /// from (m²/g^{2/3}, 1) to (m², g).
    pub fn symanzik_scaled(&self, g: f64) -> Self {
        let s = g.cbrt();
        Self {
            a: self.a * s,
            b: self.b,
            c: self.c * s,
        }
    }
}

/// Parameters of the full five-parameter family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FullTrialParams {
    /// Constant term of the exponent numerator (pure normalization at large
    /// distance, shifts log ψ₀ by −a0/√(d² + g x²)).
    pub a0: f64,
    /// Quadratic term of the exponent numerator.
    pub a: f64,
    /// Quartic term of the exponent numerator. Must be > 0.
    pub b: f64,
    /// Algebraic prefactor parameter in 1/√(1 + c² x²). Must be ≥ 0.
    pub c: f64,
    /// Scale of the envelope denominator √(d² + g x²). Must satisfy d² > 0.
    pub d: f64,
}

impl FullTrialParams {
    pub fn new(a0: f64, a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        if ![a0, a, b, c, d].iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidTrial("non-finite full-family parameter".into()));
        }
        if b <= 0.0 {
            return Err(Error::InvalidTrial(format!("b = {b} must be positive")));
        }
        if c < 0.0 {
            return Err(Error::InvalidTrial(format!("c = {c} must be non-negative")));
        }
        if d * d <= 0.0 {
            return Err(Error::InvalidTrial(format!("d = {d} must satisfy d² > 0")));
        }
        Ok(Self { a0, a, b, c, d })
    }

    /// Full family with (a, b) pinned by the tail-matching constraints.
    pub fn with_case1(m2: f64, g: f64, a0: f64, c: f64, d: f64) -> Result<Self> {
        let (a, b) = fix_case1_constraints(m2, g, d)?;
        Self::new(a0, a, b, c, d)
    }

    /// Coefficient of x in the small-x expansion of y₀.
    ///
    /// Equals the exact energy when y₀ is the exact log-derivative.
    pub fn e_exp(&self, g: f64) -> f64 {
        let d = self.d.abs();
        self.a / d - self.a0 * g / (d * d * d) + self.c * self.c
    }

    /// Same-state parameters after scaling the coupling from
    /// (m²/g^{2/3}, 1) to (m², g).
    pub fn symanzik_scaled(&self, g: f64) -> Self {
        let s = g.cbrt();
        Self {
            a0: self.a0 * s,
            a: self.a * s * s,
            b: self.b,
            c: self.c * g.powf(1.0 / 6.0),
            d: self.d * s,
        }
    }
}

/// Pin (a, b) so the trial tail reproduces the leading growing terms of y:
/// b = 4/3 and a = d²/3 + m².
pub fn fix_case1_constraints(m2: f64, g: f64, d: f64) -> Result<(f64, f64)> {
    if g <= 0.0 {
        return Err(Error::InvalidTrial(
            "tail-matching constraints need g > 0".into(),
        ));
    }
    Ok((d * d / 3.0 + m2, 4.0 / 3.0))
}

/// Ansatz for the (2k+p)-th excited state: x^p P_k(x²) times the full
/// envelope. Supported for k ≤ 1 and p ∈ {0, 1}.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExcitedSpec {
    pub k: usize,
    pub p: usize,
    /// Roots of P_k in the variable x²; the state has nodes at ±√rᵢ.
    pub roots: Vec<f64>,
    pub base: FullTrialParams,
}

impl ExcitedSpec {
    pub fn new(k: usize, p: usize, roots: Vec<f64>, base: FullTrialParams) -> Result<Self> {
        if k > 1 {
            return Err(Error::Unsupported(format!(
                "excited ansatz implemented for k <= 1 (got k = {k})"
            )));
        }
        if p > 1 {
            return Err(Error::InvalidTrial(format!("p = {p} must be 0 or 1")));
        }
        if roots.len() != k {
            return Err(Error::InvalidTrial(format!(
                "expected {k} polynomial roots, got {}",
                roots.len()
            )));
        }
        if !roots.iter().all(|r| r.is_finite() && *r > 0.0) {
            return Err(Error::InvalidTrial("polynomial roots must be positive".into()));
        }
        let mut sorted = roots.clone();
        sorted.sort_by(f64::total_cmp);
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidTrial("polynomial roots must be distinct".into()));
        }
        Ok(Self { k, p, roots, base })
    }

    /// Number of real nodes of the wavefunction (counting x = 0 when p = 1).
    pub fn node_count(&self) -> usize {
        2 * self.k + self.p
    }
}

/// log ψ₀ split into magnitude and sign, so deep tails and noded states are
/// both representable.
#[derive(Debug, Clone, Copy)]
pub struct LogPsi {
    pub ln_abs: f64,
    pub sign: f64,
}

/// A tagged trial wavefunction.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum TrialFunction {
    Simple(SimpleTrialParams),
    Full(FullTrialParams),
    Excited(ExcitedSpec),
}

impl TrialFunction {
    /// Family-level validity for a given coupling.
    pub fn validate(&self, g: f64) -> Result<()> {
        if g < 0.0 {
            return Err(Error::InvalidPotential(format!("g = {g} < 0")));
        }
        match self {
            TrialFunction::Simple(p) => {
                SimpleTrialParams::new(p.a, p.b, p.c)?;
                if g == 0.0 && p.a <= 0.0 {
                    return Err(Error::InvalidTrial(
                        "g = 0 requires a > 0 for normalizability".into(),
                    ));
                }
            }
            TrialFunction::Full(p) => {
                FullTrialParams::new(p.a0, p.a, p.b, p.c, p.d)?;
                if g == 0.0 && p.a <= 0.0 {
                    return Err(Error::InvalidTrial(
                        "g = 0 requires a > 0 for normalizability".into(),
                    ));
                }
            }
            TrialFunction::Excited(e) => {
                ExcitedSpec::new(e.k, e.p, e.roots.clone(), e.base)?;
                if g == 0.0 && e.base.a <= 0.0 {
                    return Err(Error::InvalidTrial(
                        "g = 0 requires a > 0 for normalizability".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    /// The five-parameter envelope, when the family has one.
    pub fn full_params_unchecked(&self) -> Option<FullTrialParams> {
        match self {
            TrialFunction::Simple(_) => None,
            TrialFunction::Full(p) => Some(*p),
            TrialFunction::Excited(e) => Some(e.base),
        }
    }

    /// 0 for even states, 1 for odd states.
    pub fn parity(&self) -> usize {
        match self {
            TrialFunction::Excited(e) => e.p,
            _ => 0,
        }
    }

    /// Positive node positions (interior kinks/zeros the quadrature must
    /// respect). The node at the origin for odd states is a domain endpoint.
    pub fn positive_nodes(&self) -> Vec<f64> {
        match self {
            TrialFunction::Excited(e) => e.roots.iter().map(|r| r.sqrt()).collect(),
            _ => Vec::new(),
        }
    }

    /// log ψ₀(x) with an explicit sign. At a node the magnitude is −∞ and
    /// the sign is taken from the right limit.
    pub fn log_psi(&self, g: f64, x: f64) -> LogPsi {
        match self {
            TrialFunction::Simple(p) => LogPsi {
                ln_abs: -(0.5 * p.a * x * x + p.b * g.sqrt() * x.abs().powi(3) / 3.0)
                    - 0.5 * (p.c * x * x).ln_1p(),
                sign: 1.0,
            },
            TrialFunction::Full(p) => LogPsi {
                ln_abs: full_envelope_log(p, g, x),
                sign: 1.0,
            },
            TrialFunction::Excited(e) => {
                let mut ln_abs = full_envelope_log(&e.base, g, x);
                let mut sign = 1.0;
                if e.p == 1 {
                    ln_abs += x.abs().ln();
                    if x < 0.0 {
                        sign = -sign;
                    }
                }
                if e.k == 1 {
                    let q = x * x - e.roots[0];
                    ln_abs += q.abs().ln();
                    if q < 0.0 {
                        sign = -sign;
                    }
                }
                LogPsi { ln_abs, sign }
            }
        }
    }

    /// y₀ = −(log ψ₀)′. Diverges at the nodes of excited states.
    pub fn y0(&self, g: f64, x: f64) -> f64 {
        match self {
            TrialFunction::Simple(p) => {
                p.a * x + p.b * g.sqrt() * x * x.abs() + p.c * x / (1.0 + p.c * x * x)
            }
            TrialFunction::Full(p) => full_smooth_y(p, g, x),
            TrialFunction::Excited(e) => {
                let mut y = full_smooth_y(&e.base, g, x);
                if e.p == 1 {
                    y -= 1.0 / x;
                }
                if e.k == 1 {
                    y -= 2.0 * x / (x * x - e.roots[0]);
                }
                y
            }
        }
    }

    /// dy₀/dx (one-sided at the |x| kink of the simple family).
    pub fn y0_prime(&self, g: f64, x: f64) -> f64 {
        match self {
            TrialFunction::Simple(p) => {
                let den = 1.0 + p.c * x * x;
                p.a + 2.0 * p.b * g.sqrt() * x.abs() + p.c * (1.0 - p.c * x * x) / (den * den)
            }
            TrialFunction::Full(p) => full_smooth_y_prime(p, g, x),
            TrialFunction::Excited(e) => {
                let mut yp = full_smooth_y_prime(&e.base, g, x);
                if e.p == 1 {
                    yp += 1.0 / (x * x);
                }
                if e.k == 1 {
                    let q = x * x - e.roots[0];
                    yp += 2.0 * (x * x + e.roots[0]) / (q * q);
                }
                yp
            }
        }
    }

    /// V₀ = y₀² − y₀′, with the node poles cancelled analytically.
    ///
    /// For all supported states the only genuine singularities left are the
    /// simple poles 2(2s+1)/(x² − r) at the off-origin nodes of k = 1 states
    /// (s = 0 for p = 0, s = 1 for p = 1); the 1/x pieces of odd states
    /// cancel exactly.
    pub fn v0(&self, g: f64, x: f64) -> f64 {
        match self {
            TrialFunction::Simple(_) | TrialFunction::Full(_) => {
                let y = self.y0(g, x);
                y * y - self.y0_prime(g, x)
            }
            TrialFunction::Excited(e) => {
                let u = full_smooth_y(&e.base, g, x);
                let up = full_smooth_y_prime(&e.base, g, x);
                let mut v = u * u - up;
                if e.p == 1 {
                    // (s² − s′) vanishes for s = −1/x; the cross term stays.
                    v -= 2.0 * u / x;
                }
                if e.k == 1 {
                    let q = x * x - e.roots[0];
                    let weight = if e.p == 1 { 6.0 } else { 2.0 };
                    v += weight / q - 4.0 * x * u / q;
                }
                v
            }
        }
    }
}

fn full_envelope_log(p: &FullTrialParams, g: f64, x: f64) -> f64 {
    let x2 = x * x;
    let num = p.a0 + 0.5 * p.a * x2 + 0.25 * p.b * g * x2 * x2;
    let den = (p.d * p.d + g * x2).sqrt();
    -num / den - 0.5 * (p.c * p.c * x2).ln_1p()
}

/// Smooth part of y₀ for the full envelope (no node poles).
fn full_smooth_y(p: &FullTrialParams, g: f64, x: f64) -> f64 {
    let x2 = x * x;
    let num = p.a0 + 0.5 * p.a * x2 + 0.25 * p.b * g * x2 * x2;
    let num_p = p.a * x + p.b * g * x2 * x;
    let s2 = p.d * p.d + g * x2;
    let s = s2.sqrt();
    let c2 = p.c * p.c;
    num_p / s - num * g * x / (s2 * s) + c2 * x / (1.0 + c2 * x2)
}

fn full_smooth_y_prime(p: &FullTrialParams, g: f64, x: f64) -> f64 {
    let x2 = x * x;
    let num = p.a0 + 0.5 * p.a * x2 + 0.25 * p.b * g * x2 * x2;
    let num_p = p.a * x + p.b * g * x2 * x;
    let num_pp = p.a + 3.0 * p.b * g * x2;
    let s2 = p.d * p.d + g * x2;
    let s = s2.sqrt();
    let s3 = s2 * s;
    let c2 = p.c * p.c;
    let den = 1.0 + c2 * x2;
    num_pp / s - num_p * g * x / s3 - g * (num_p * x + num) / s3
        + 3.0 * g * g * num * x2 / (s2 * s3)
        + c2 * (1.0 - c2 * x2) / (den * den)
}

/// V₀ from the log-derivative alone: V₀(x) = y₀(x)² − y₀′(x).
pub fn v0_from_y0<F, G>(y0: F, y0_prime: G, x: f64) -> f64
where
    F: Fn(f64) -> f64,
    G: Fn(f64) -> f64,
{
    let y = y0(x);
    y * y - y0_prime(x)
}

/// ⟨ψ₁, ψ₂⟩ over the full line (0 exactly for opposite parities).
pub fn overlap(
    t1: &TrialFunction,
    t2: &TrialFunction,
    g: f64,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    if t1.parity() != t2.parity() {
        return Ok(0.0);
    }
    let mut splits = t1.positive_nodes();
    splits.extend(t2.positive_nodes());
    let cfg = cfg.clone().with_splits(&splits);
    let est = quadgrid::integrate(
        |x| {
            let l1 = t1.log_psi(g, x);
            let l2 = t2.log_psi(g, x);
            let ln = l1.ln_abs + l2.ln_abs;
            if ln < -700.0 {
                return 0.0;
            }
            l1.sign * l2.sign * ln.exp()
        },
        Domain::HalfLinePositive,
        &cfg,
    )?;
    Ok(2.0 * est.value)
}

/// √⟨ψ, ψ⟩.
pub fn norm(t: &TrialFunction, g: f64, cfg: &QuadratureConfig) -> Result<f64> {
    Ok(overlap(t, t, g, cfg)?.sqrt())
}

/// Fix the polynomial roots of an excited ansatz so it is orthogonal to the
/// given lower states; all other parameters are left untouched.
///
/// For k = 0 there is nothing to do (odd states are orthogonal to even ones
/// by parity). For k = 1 the single root is fixed by one overlap constraint
/// against the k = 0 state of the same parity.
pub fn build_excited(
    spec: ExcitedSpec,
    lower_states: &[ExcitedSpec],
    g: f64,
    cfg: &QuadratureConfig,
) -> Result<ExcitedSpec> {
    let relevant: Vec<&ExcitedSpec> = lower_states
        .iter()
        .filter(|l| l.p == spec.p && l.k < spec.k)
        .collect();

    if spec.k == 0 {
        return Ok(spec);
    }
    // k == 1 from here on (the constructor rejects k > 1).
    if relevant.len() > spec.k {
        return Err(Error::Orthogonality(format!(
            "{} lower states but only {} free polynomial roots",
            relevant.len(),
            spec.k
        )));
    }
    let Some(lower) = relevant.first() else {
        return Err(Error::Orthogonality(
            "a k = 1 state needs the k = 0 state of the same parity".into(),
        ));
    };
    if lower.k != 0 {
        return Err(Error::Orthogonality(
            "orthogonality against noded lower states is not supported".into(),
        ));
    }

    // ⟨x^p (x²−r) env₁, x^p env₀⟩ = I₂ − r I₀ is linear in r.
    let pw = 2 * spec.p as i32;
    let moment = |extra: i32| -> Result<f64> {
        let est = quadgrid::integrate(
            |x: f64| {
                let ln = full_envelope_log(&spec.base, g, x)
                    + full_envelope_log(&lower.base, g, x);
                if ln < -700.0 {
                    return 0.0;
                }
                x.powi(pw + extra) * ln.exp()
            },
            Domain::HalfLinePositive,
            cfg,
        )?;
        Ok(est.value)
    };
    let i0 = moment(0)?;
    let i2 = moment(2)?;
    if !(i0 > 0.0) || !i2.is_finite() {
        return Err(Error::Orthogonality(
            "degenerate overlap moments; envelopes not normalizable?".into(),
        ));
    }
    let root = i2 / i0;
    let tuned = ExcitedSpec::new(spec.k, spec.p, vec![root], spec.base)?;

    // Verify the constraint actually holds at quadrature accuracy.
    let upper = TrialFunction::Excited(tuned.clone());
    let lower_t = TrialFunction::Excited((*lower).clone());
    let ov = overlap(&upper, &lower_t, g, cfg)?;
    let scale = norm(&upper, g, cfg)? * norm(&lower_t, g, cfg)?;
    if ov.abs() > 1e-10 * scale {
        return Err(Error::Orthogonality(format!(
            "residual overlap {:e} exceeds 1e-10 of the norm product",
            ov / scale
        )));
    }
    Ok(tuned)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn simple_y0_values() {
        let t = TrialFunction::Simple(SimpleTrialParams::new(1.0, 1.0, 0.0).unwrap());
        assert_eq!(t.y0(1.0, 2.0), 6.0);
        assert_eq!(t.y0(1.0, -2.0), -6.0);
        assert_eq!(t.y0(1.0, 0.0), 0.0);
    }

    #[test]
    fn quartic_exponential_generates_its_potential() {
        // ψ = e^{-x^4}: y₀ = 4x³ and V₀ = 16x⁶ − 12x².
        let y0 = |x: f64| 4.0 * x * x * x;
        let y0p = |x: f64| 12.0 * x * x;
        for &x in &[-2.0f64, -0.7, 0.0, 0.3, 1.9] {
            let expect = 16.0 * x.powi(6) - 12.0 * x * x;
            assert_relative_eq!(
                v0_from_y0(y0, y0p, x),
                expect,
                max_relative = 1e-14,
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn harmonic_v0() {
        // y₀ = a·x gives V₀ = a²x² − a.
        let a = 1.7;
        let t = TrialFunction::Simple(SimpleTrialParams::new(a, 1e-12, 0.0).unwrap());
        let x = 0.9;
        assert_relative_eq!(t.v0(0.0, x), a * a * x * x - a, max_relative = 1e-9);
    }

    #[test]
    fn simple_family_v0_closed_form() {
        // For c = 0: V₀ = a²x² + b²gx⁴ − 2b√g|x|(1 − ax²) − a.
        let (a, b, g) = (1.3, 0.8, 2.0);
        let t = TrialFunction::Simple(SimpleTrialParams::new(a, b, 0.0).unwrap());
        for &x in &[-2.2, -0.5, 0.4, 1.0, 3.3] {
            let expect = a * a * x * x + b * b * g * x.powi(4)
                - 2.0 * b * g.sqrt() * x.abs() * (1.0 - a * x * x)
                - a;
            assert_relative_eq!(t.v0(g, x), expect, max_relative = 1e-12, epsilon = 1e-12);
        }
    }

    #[test]
    fn log_psi_origin_is_zero_for_simple() {
        let t = TrialFunction::Simple(SimpleTrialParams::new(1.0, 1.0, 0.0).unwrap());
        assert_eq!(t.log_psi(1.0, 0.0).ln_abs, 0.0);
    }

    #[test]
    fn case1_constraints_match_inversion() {
        let (a, b) = fix_case1_constraints(1.0, 2.0, 2.38506879f64.sqrt()).unwrap();
        assert_relative_eq!(a, 1.79502293, max_relative = 1e-9);
        assert_eq!(b, 4.0 / 3.0);
        let (a2, _) = fix_case1_constraints(0.0, 1.0, 1.13549325f64.sqrt()).unwrap();
        assert_relative_eq!(a2, 0.37849775, max_relative = 1e-9);
        assert!(fix_case1_constraints(1.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn e_exp_matches_finite_difference_slope() {
        let p = FullTrialParams::new(0.78, 1.795, 4.0 / 3.0, 0.93, 1.544).unwrap();
        let g = 2.0;
        let t = TrialFunction::Full(p);
        let h = 1e-4;
        let slope = (t.y0(g, h) - t.y0(g, -h)) / (2.0 * h);
        assert!(
            (p.e_exp(g) - slope).abs() < 1e-7,
            "analytic {} vs slope {}",
            p.e_exp(g),
            slope
        );
    }

    #[test]
    fn derivatives_consistent_with_values() {
        // y₀ = −(log ψ)′ and y₀′ checked against central differences.
        let cases: Vec<(TrialFunction, f64)> = vec![
            (
                TrialFunction::Simple(SimpleTrialParams::new(0.9, 1.2, 0.4).unwrap()),
                2.0,
            ),
            (
                TrialFunction::Full(FullTrialParams::new(-0.5, 1.4, 4.0 / 3.0, 0.7, 1.3).unwrap()),
                1.0,
            ),
            (
                TrialFunction::Excited(
                    ExcitedSpec::new(
                        0,
                        1,
                        vec![],
                        FullTrialParams::new(0.2, 1.0, 4.0 / 3.0, 0.5, 1.1).unwrap(),
                    )
                    .unwrap(),
                ),
                2.0,
            ),
        ];
        let h = 2e-4;
        // Five-point stencils: O(h⁴) truncation keeps the oracle trustworthy
        // even close to the 1/x pole of odd states.
        let d5 = |f: &dyn Fn(f64) -> f64, x: f64| {
            (f(x - 2.0 * h) - 8.0 * f(x - h) + 8.0 * f(x + h) - f(x + 2.0 * h)) / (12.0 * h)
        };
        for (t, g) in cases {
            for i in 0..100 {
                let x = 0.05 + 0.045 * i as f64;
                let num_y = d5(&|u| -t.log_psi(g, u).ln_abs, x);
                assert!(
                    (t.y0(g, x) - num_y).abs() < 1e-7 * (1.0 + t.y0(g, x).abs()),
                    "y0 mismatch at x = {x}"
                );
                let num_yp = d5(&|u| t.y0(g, u), x);
                assert!(
                    (t.y0_prime(g, x) - num_yp).abs() < 1e-6 * (1.0 + num_yp.abs()),
                    "y0' mismatch at x = {x}"
                );
                // Riccati consistency of the generated potential: V₀ = y₀² − y₀′.
                let v = t.v0(g, x);
                let direct = t.y0(g, x).powi(2) - t.y0_prime(g, x);
                assert!(
                    (v - direct).abs() < 1e-9 * (1.0 + direct.abs()),
                    "V0 mismatch at x = {x}"
                );
            }
        }
    }

    #[test]
    fn case1_tail_matches_three_terms() {
        let m2 = 1.0;
        let g = 2.0;
        let d = 1.5;
        let p = FullTrialParams::with_case1(m2, g, 0.4, 0.8, d).unwrap();
        let t = TrialFunction::Full(p);
        let asym = |x: f64| g.sqrt() * x * x + m2 / (2.0 * g.sqrt()) + 1.0 / x;
        let r30 = (30.0f64).powi(2) * (t.y0(g, 30.0) - asym(30.0));
        let r50 = (50.0f64).powi(2) * (t.y0(g, 50.0) - asym(50.0));
        assert!(r30.abs() < 100.0, "x² × tail mismatch at 30: {r30}");
        assert!(r50.abs() < 100.0, "x² × tail mismatch at 50: {r50}");
        // Bounded, not growing.
        assert!(r50.abs() < 2.0 * r30.abs() + 1.0);
    }

    #[test]
    fn excited_sign_conventions() {
        let base = FullTrialParams::new(0.0, 1.0, 4.0 / 3.0, 0.5, 1.0).unwrap();
        let odd = TrialFunction::Excited(ExcitedSpec::new(0, 1, vec![], base).unwrap());
        assert_eq!(odd.log_psi(1.0, 1.0).sign, 1.0);
        assert_eq!(odd.log_psi(1.0, -1.0).sign, -1.0);
        // Exactly at the node: magnitude −∞, sign from the right limit.
        let at0 = odd.log_psi(1.0, 0.0);
        assert_eq!(at0.ln_abs, f64::NEG_INFINITY);
        assert_eq!(at0.sign, 1.0);

        let noded =
            TrialFunction::Excited(ExcitedSpec::new(1, 0, vec![1.44], base).unwrap());
        assert_eq!(noded.log_psi(1.0, 1.0).sign, -1.0);
        assert_eq!(noded.log_psi(1.0, 1.3).sign, 1.0);
        let at_node = noded.log_psi(1.0, 1.2);
        assert_eq!(at_node.ln_abs, f64::NEG_INFINITY);
        assert_eq!(at_node.sign, 1.0);
    }

    #[test]
    fn a0_shift_moves_log_psi_by_envelope() {
        let g = 2.0;
        let p = FullTrialParams::new(0.3, 1.7, 4.0 / 3.0, 0.9, 1.5).unwrap();
        let delta = 0.37;
        let shifted = FullTrialParams::new(p.a0 + delta, p.a, p.b, p.c, p.d).unwrap();
        for &x in &[0.0, 0.5, 1.0, 2.5, 6.0] {
            let got = TrialFunction::Full(shifted).log_psi(g, x).ln_abs
                - TrialFunction::Full(p).log_psi(g, x).ln_abs;
            let expect = -delta / (p.d * p.d + g * x * x).sqrt();
            assert_relative_eq!(got, expect, max_relative = 1e-12, epsilon = 1e-14);
        }
    }

    #[test]
    fn build_excited_identity_and_parity_cases() {
        let base = FullTrialParams::new(0.0, 1.5, 4.0 / 3.0, 0.6, 1.2).unwrap();
        let cfg = QuadratureConfig::default();
        let ground = ExcitedSpec::new(0, 0, vec![], base).unwrap();
        let same = build_excited(ground.clone(), &[], 2.0, &cfg).unwrap();
        assert_eq!(same, ground);

        // Odd k = 0 state: no constraints needed, parity does the job.
        let odd = ExcitedSpec::new(0, 1, vec![], base).unwrap();
        let built = build_excited(odd.clone(), &[ground.clone()], 2.0, &cfg).unwrap();
        assert_eq!(built, odd);
        let ov = overlap(
            &TrialFunction::Excited(built),
            &TrialFunction::Excited(ground),
            2.0,
            &cfg,
        )
        .unwrap();
        assert_eq!(ov, 0.0);
    }

    #[test]
    fn build_excited_tunes_single_root() {
        let g = 2.0;
        let base = FullTrialParams::new(0.0, 1.5, 4.0 / 3.0, 0.6, 1.2).unwrap();
        let cfg = QuadratureConfig::default();
        let ground = ExcitedSpec::new(0, 0, vec![], base).unwrap();
        let raw = ExcitedSpec::new(1, 0, vec![1.0], base).unwrap();
        let tuned = build_excited(raw, &[ground.clone()], g, &cfg).unwrap();

        let upper = TrialFunction::Excited(tuned);
        let lower = TrialFunction::Excited(ground);
        let ov = overlap(&upper, &lower, g, &cfg).unwrap();
        let scale = norm(&upper, g, &cfg).unwrap() * norm(&lower, g, &cfg).unwrap();
        assert!(ov.abs() <= 1e-10 * scale, "overlap {:e}", ov / scale);
    }

    #[test]
    fn build_excited_rejects_infeasible() {
        let base = FullTrialParams::new(0.0, 1.5, 4.0 / 3.0, 0.6, 1.2).unwrap();
        let cfg = QuadratureConfig::default();
        let raw = ExcitedSpec::new(1, 0, vec![1.0], base).unwrap();
        // Missing the ground state entirely.
        assert!(build_excited(raw.clone(), &[], 2.0, &cfg).is_err());
        // Two lower states against a single free root.
        let g0 = ExcitedSpec::new(0, 0, vec![], base).unwrap();
        let other = FullTrialParams::new(0.1, 1.2, 4.0 / 3.0, 0.4, 1.0).unwrap();
        let g1 = ExcitedSpec::new(0, 0, vec![], other).unwrap();
        assert!(build_excited(raw, &[g0, g1], 2.0, &cfg).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn y0_is_odd_for_even_states(
            a in -2.0f64..3.0,
            b in 0.2f64..2.0,
            c in 0.0f64..2.0,
            x in -8.0f64..8.0,
            g in 0.1f64..4.0,
        ) {
            let t = TrialFunction::Simple(SimpleTrialParams::new(a, b, c).unwrap());
            prop_assert!((t.y0(g, x) + t.y0(g, -x)).abs() < 1e-12 * (1.0 + t.y0(g, x).abs()));
            // V₀ even.
            prop_assert!((t.v0(g, x) - t.v0(g, -x)).abs() < 1e-10 * (1.0 + t.v0(g, x).abs()));
        }

        #[test]
        fn psi_is_odd_for_p1_states(x in 0.01f64..6.0, g in 0.2f64..3.0) {
            let base = FullTrialParams::new(0.1, 1.0, 4.0 / 3.0, 0.4, 1.0).unwrap();
            let t = TrialFunction::Excited(ExcitedSpec::new(0, 1, vec![], base).unwrap());
            let plus = t.log_psi(g, x);
            let minus = t.log_psi(g, -x);
            prop_assert_eq!(plus.ln_abs, minus.ln_abs);
            prop_assert_eq!(plus.sign, -minus.sign);
        }
    }
}
