//! Multiplicative (logarithmic) perturbation theory around a trial state.
//!
//! With ψ₀ as zero approximation and V₀ = y₀² − y₀′ (so that E₀ = 0
//! exactly), the deviation V₁ = V − V₀ drives the correction hierarchy
//!
//!   E_k = ⟨Q_k⟩,     y_k(x) = ψ₀(x)^{-2} ∫₀^x (E_k − Q_k) ψ₀² dx′,
//!
//! with Q₁ = V₁ and Q_k = −Σ_{i=1}^{k-1} y_i y_{k−i}. All weights are carried
//! as log ψ₀² relative to its maximum, so the deep tail never underflows; in
//! the far region the complementary form −ψ₀^{-2} ∫_x^∞ (E_k − Q_k) ψ₀² is
//! used, which is the same function by the definition of E_k but stays
//! conditioned where ψ₀^{-2} amplification would destroy the direct form.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::PotentialSpec;
use crate::quadgrid::{self, Domain, GridFunction, QuadratureConfig};
use crate::trial::TrialFunction;

/// Exponent below which ψ₀² is treated as an exact zero.
const LN_UNDERFLOW: f64 = -745.0;

/// Relative weight below which the complementary (tail) form of y_k takes
/// over. The direct form loses ~log10(w_max/w) digits to cancellation, so
/// the crossover is placed where both forms still agree to ~1e-8.
const LN_SWITCH: f64 = -9.2103403719761836; // ln(1e-4)

/// Convergence diagnostics of a perturbation run.
#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceReport {
    /// sup |y₁| over the stored grid.
    pub y1_max: f64,
    /// Location of the supremum.
    pub y1_argmax: f64,
    /// Smallest sampled radius beyond which the (tail-normalized)
    /// perturbation stays subordinate: |V₁/V₀| < 1 for all larger |x|.
    /// +∞ when the sampled range never satisfies it.
    pub domination_radius: f64,
    /// max |y′ − y² − (E − V)| over the standard probes, per order
    /// (index 0 = zero approximation alone).
    pub riccati_residual: Vec<f64>,
}

/// Energy corrections, log-derivative corrections, and partial sums.
#[derive(Debug, Clone, Serialize)]
pub struct PerturbationSeries {
    /// [E₀ = 0, E₁, …, E_order].
    pub e_terms: Vec<f64>,
    /// [y₁, y₂, …] sampled on x ≥ 0 (odd extension applies).
    #[serde(skip)]
    pub y_terms: Vec<GridFunction>,
    /// [E⁽¹⁾, …, E⁽ᵒʳᵈᵉʳ⁾] with E⁽ⁿ⁾ = Σ_{k≤n} E_k.
    pub partial_sums: Vec<f64>,
    pub diagnostics: ConvergenceReport,
}

impl PerturbationSeries {
    pub fn order(&self) -> usize {
        self.e_terms.len() - 1
    }

    /// E⁽ⁿ⁾ for 1 ≤ n ≤ order.
    pub fn partial_sum(&self, n: usize) -> f64 {
        self.partial_sums[n - 1]
    }
}

/// Log-weight context: ln ψ₀²(x) gauged to its maximum over x ≥ 0.
pub(crate) struct Weight<'a> {
    trial: &'a TrialFunction,
    g: f64,
    ln_psi_max: f64,
    x_of_max: f64,
}

impl<'a> Weight<'a> {
    pub(crate) fn new(trial: &'a TrialFunction, g: f64) -> Result<Self> {
        trial.validate(g)?;
        let ln_psi = |x: f64| trial.log_psi(g, x).ln_abs;

        // Bracket the decaying region, then scan for the maximum.
        let mut x_hi = 12.0f64;
        let mut best = (0.0, ln_psi(0.0));
        loop {
            let n = 800;
            for i in 0..=n {
                let x = x_hi * i as f64 / n as f64;
                let v = ln_psi(x);
                if v > best.1 {
                    best = (x, v);
                }
            }
            if ln_psi(x_hi) < best.1 - 60.0 || x_hi > 1e4 {
                break;
            }
            x_hi *= 2.0;
        }
        // Golden-section refinement around the scan maximum.
        let step = x_hi / 800.0;
        let (mut lo, mut hi) = ((best.0 - step).max(0.0), best.0 + step);
        let phi = 0.5 * (5f64.sqrt() - 1.0);
        for _ in 0..70 {
            let m1 = hi - phi * (hi - lo);
            let m2 = lo + phi * (hi - lo);
            if ln_psi(m1) < ln_psi(m2) {
                lo = m1;
            } else {
                hi = m2;
            }
        }
        let x_of_max = 0.5 * (lo + hi);
        let ln_psi_max = ln_psi(x_of_max).max(best.1);

        Ok(Self {
            trial,
            g,
            ln_psi_max,
            x_of_max,
        })
    }

    /// ln of the normalized weight ψ₀²(x)/ψ₀²_max.
    pub(crate) fn ln_w(&self, x: f64) -> f64 {
        2.0 * (self.trial.log_psi(self.g, x).ln_abs - self.ln_psi_max)
    }

    /// Weighted integrand over the half line: f(x)·w(x), with f never
    /// evaluated where the weight has underflowed.
    fn weighted<F: Fn(f64) -> f64 + 'a>(&'a self, f: F) -> impl Fn(f64) -> f64 + 'a {
        move |x: f64| {
            let lw = self.ln_w(x);
            if lw < LN_UNDERFLOW {
                0.0
            } else {
                f(x) * lw.exp()
            }
        }
    }

    /// Smallest x beyond the weight maximum where ln w drops below `level`.
    fn x_where_ln_w_below(&self, level: f64) -> f64 {
        let mut hi = (self.x_of_max + 1.0).max(1.0);
        let mut guard = 0;
        while self.ln_w(hi) > level && guard < 200 {
            hi *= 1.3;
            guard += 1;
        }
        let mut lo = self.x_of_max;
        for _ in 0..80 {
            let m = 0.5 * (lo + hi);
            if self.ln_w(m) > level {
                lo = m;
            } else {
                hi = m;
            }
        }
        0.5 * (lo + hi)
    }
}

fn splits_of(trial: &TrialFunction) -> Vec<f64> {
    trial.positive_nodes()
}

/// The perturbation V₁ = V − V₀ in the E₀ = 0 convention (the additive
/// constant that the exact tail would carry is part of V₁; it cancels
/// identically in every E_k − Q_k).
pub fn perturbation_potential<'a>(
    spec: &'a PotentialSpec,
    trial: &'a TrialFunction,
) -> impl Fn(f64) -> f64 + 'a {
    let g = spec.g();
    move |x: f64| spec.eval(x) - trial.v0(g, x)
}

/// ⟨ψ₀²⟩ normalization integral in the gauged weight (test hook and
/// square-integrability check rolled into one).
fn half_norm(w: &Weight, cfg: &QuadratureConfig) -> Result<f64> {
    let est = quadgrid::integrate(
        w.weighted(|_| 1.0),
        Domain::HalfLinePositive,
        &cfg.clone().with_splits(&splits_of(w.trial)),
    )?;
    if !(est.value > 0.0) {
        return Err(Error::InvalidTrial(
            "trial state has vanishing norm".into(),
        ));
    }
    Ok(est.value)
}

/// First-order energy: E₁ = ⟨V₁⟩ (equals the variational energy since
/// E₀ = 0).
pub fn compute_e1(
    spec: &PotentialSpec,
    trial: &TrialFunction,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    let w = Weight::new(trial, spec.g())?;
    e1_in_gauge(spec, trial, &w, cfg)
}

fn e1_in_gauge(
    spec: &PotentialSpec,
    trial: &TrialFunction,
    w: &Weight,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    let v1 = perturbation_potential(spec, trial);
    let cfg_s = cfg.clone().with_splits(&splits_of(trial));
    let den = half_norm(w, &cfg_s)?;
    let num = quadgrid::integrate(w.weighted(&v1), Domain::HalfLinePositive, &cfg_s)?;
    Ok(num.value / den)
}

/// Rayleigh quotient ⟨ψ₀|H|ψ₀⟩/⟨ψ₀|ψ₀⟩ = ⟨y₀² + V⟩, evaluated by direct
/// quadrature (independent route to E₀ + E₁).
pub fn rayleigh_quotient(
    spec: &PotentialSpec,
    trial: &TrialFunction,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    let g = spec.g();
    let w = Weight::new(trial, g)?;
    let cfg_s = cfg.clone().with_splits(&splits_of(trial));
    let den = half_norm(&w, &cfg_s)?;
    let num = quadgrid::integrate(
        w.weighted(|x| {
            let y = trial.y0(g, x);
            y * y + spec.eval(x)
        }),
        Domain::HalfLinePositive,
        &cfg_s,
    )?;
    Ok(num.value / den)
}

/// Environment shared by the correction computations for one (spec, trial).
struct SeriesCtx<'a> {
    w: Weight<'a>,
    splits: Vec<f64>,
    x_switch: f64,
    x_grid_max: f64,
}

impl<'a> SeriesCtx<'a> {
    fn new(trial: &'a TrialFunction, g: f64) -> Result<Self> {
        let w = Weight::new(trial, g)?;
        let x_switch = w.x_where_ln_w_below(LN_SWITCH);
        let x_grid_max = w.x_where_ln_w_below(-240.0).max(12.0);
        Ok(Self {
            w,
            splits: splits_of(trial),
            x_switch,
            x_grid_max,
        })
    }

    /// Direct form: y_k(x) = ψ₀(x)^{-2} ∫₀^x (E_k − Q_k) ψ₀².
    fn yk_core(&self, e_k: f64, q: &dyn Fn(f64) -> f64, x: f64, cfg: &QuadratureConfig) -> Result<f64> {
        if x == 0.0 {
            return Ok(0.0);
        }
        let lw_x = self.w.ln_w(x);
        let f = |xp: f64| {
            let arg = self.w.ln_w(xp) - lw_x;
            if arg < LN_UNDERFLOW {
                return 0.0;
            }
            (e_k - q(xp)) * arg.exp()
        };
        let cfg = cfg.clone().with_splits(&self.splits);
        Ok(quadgrid::integrate(f, Domain::Interval(0.0, x), &cfg)?.value)
    }

    /// Complementary form: y_k(x) = −ψ₀(x)^{-2} ∫_x^∞ (E_k − Q_k) ψ₀².
    fn yk_tail(&self, e_k: f64, q: &dyn Fn(f64) -> f64, x: f64, cfg: &QuadratureConfig) -> Result<f64> {
        let lw_x = self.w.ln_w(x);
        let f = |u: f64| {
            let xp = x + u;
            let arg = self.w.ln_w(xp) - lw_x;
            if arg < LN_UNDERFLOW {
                return 0.0;
            }
            (e_k - q(xp)) * arg.exp()
        };
        let shifted: Vec<f64> = self
            .splits
            .iter()
            .filter_map(|s| (*s > x).then_some(*s - x))
            .collect();
        let cfg = cfg.clone().with_splits(&shifted);
        Ok(-quadgrid::integrate(f, Domain::HalfLinePositive, &cfg)?.value)
    }

    fn yk_auto(&self, e_k: f64, q: &dyn Fn(f64) -> f64, x: f64, cfg: &QuadratureConfig) -> Result<f64> {
        if x <= self.x_switch {
            self.yk_core(e_k, q, x, cfg)
        } else {
            self.yk_tail(e_k, q, x, cfg)
        }
    }

    /// Expectation value ⟨f⟩ in the ψ₀² measure.
    fn average(&self, f: &dyn Fn(f64) -> f64, cfg: &QuadratureConfig) -> Result<f64> {
        let cfg = cfg.clone().with_splits(&self.splits);
        let den = half_norm(&self.w, &cfg)?;
        let num = quadgrid::integrate(self.w.weighted(f), Domain::HalfLinePositive, &cfg)?;
        Ok(num.value / den)
    }

    /// Sample y_k on a graded grid of [0, x_grid_max], refined until the
    /// interpolant is trustworthy, with a fitted power-law tail.
    fn build_yk_grid(
        &self,
        e_k: f64,
        q: &dyn Fn(f64) -> f64,
        cfg: &QuadratureConfig,
    ) -> Result<GridFunction> {
        let x_max = self.x_grid_max;
        let dense_to = 4.0f64.min(x_max / 2.0).max(self.x_switch.min(6.0));
        let mut nodes: Vec<f64> = vec![0.0];
        let n_dense = 110;
        for i in 1..=n_dense {
            nodes.push(dense_to * i as f64 / n_dense as f64);
        }
        let ratio = 1.035f64;
        let mut x = dense_to;
        while x < x_max {
            x = (x * ratio).min(x_max);
            nodes.push(x);
        }
        for s in &self.splits {
            // Keep clear of node poles of excited trials.
            nodes.retain(|n| (n - s).abs() > 1e-6);
        }
        nodes.sort_by(f64::total_cmp);
        nodes.dedup();

        let mut values = Vec::with_capacity(nodes.len());
        for &xn in &nodes {
            values.push(self.yk_auto(e_k, q, xn, cfg)?);
        }

        // Midpoint refinement against the cubic interpolant.
        for _pass in 0..4 {
            let grid = GridFunction::new(nodes.clone(), values.clone(), 2.0)?;
            let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let tol = (2e-6 * scale).max(5e-13);
            let mut inserts: Vec<(f64, f64)> = Vec::new();
            for win in nodes.windows(2) {
                let m = 0.5 * (win[0] + win[1]);
                if m <= win[0] || m >= win[1] {
                    continue;
                }
                let exact = self.yk_auto(e_k, q, m, cfg)?;
                if (grid.eval(m) - exact).abs() > tol {
                    inserts.push((m, exact));
                }
            }
            if inserts.is_empty() || nodes.len() + inserts.len() > 520 {
                break;
            }
            for (xm, v) in inserts {
                let i = nodes.partition_point(|&p| p < xm);
                nodes.insert(i, xm);
                values.insert(i, v);
            }
        }

        // Fit the tail power from the outermost samples; fall back to the
        // 1/x² law of the first correction.
        let n = nodes.len();
        let (va, vb) = (values[n - 2], values[n - 1]);
        let (xa, xb) = (nodes[n - 2], nodes[n - 1]);
        let tail = if va * vb > 0.0 && xa > 0.0 {
            let p = (va / vb).abs().ln() / (xb / xa).ln();
            if p.is_finite() {
                p.clamp(-4.0, 8.0)
            } else {
                2.0
            }
        } else {
            2.0
        };
        GridFunction::new(nodes, values, tail)
    }
}

/// Sum y₀ + Σ y_k (odd extension for the grid terms).
fn y_through_order(
    trial: &TrialFunction,
    g: f64,
    terms: &[GridFunction],
    order: usize,
    x: f64,
) -> (f64, f64) {
    let mut y = trial.y0(g, x);
    let mut yp = trial.y0_prime(g, x);
    for gf in terms.iter().take(order) {
        let (v, d) = gf.eval_with_derivative(x.abs());
        y += if x < 0.0 { -v } else { v };
        yp += d; // derivative of an odd function is even
    }
    (y, yp)
}

/// Pointwise Riccati residual r(x) = y′ − y² − (E − V) with y and E summed
/// through `order` corrections.
pub fn riccati_residual(
    spec: &PotentialSpec,
    trial: &TrialFunction,
    series: &PerturbationSeries,
    order: usize,
    probe_xs: &[f64],
) -> Result<Vec<f64>> {
    if order > series.order() || order > series.y_terms.len() {
        return Err(Error::Unsupported(format!(
            "residual at order {order} needs y-corrections through that order \
             (have {})",
            series.y_terms.len()
        )));
    }
    let g = spec.g();
    let e: f64 = series.e_terms.iter().take(order + 1).sum();
    Ok(probe_xs
        .iter()
        .map(|&x| {
            let (y, yp) = y_through_order(trial, g, &series.y_terms, order, x);
            yp - y * y - (e - spec.eval(x))
        })
        .collect())
}

/// Diagnostics for a computed series: bound on |y₁|, subordination radius of
/// the perturbation, residual decay per order.
pub fn convergence_diagnostics(
    spec: &PotentialSpec,
    trial: &TrialFunction,
    series: &PerturbationSeries,
    _cfg: &QuadratureConfig,
) -> Result<ConvergenceReport> {
    let Some(y1) = series.y_terms.first() else {
        return Err(Error::Unsupported(
            "diagnostics need the first correction y₁".into(),
        ));
    };
    let (y1_argmax, y1_max) = y1.max_abs();

    // Subordination |V₁/V₀| in the intrinsic split: the additive constant
    // −V₀(0) (the energy the exact tail would carry) belongs to V₀ here, so
    // an exact trial gives identically zero perturbation.
    let g = spec.g();
    let eps = 1e-7;
    let kappa = -trial.v0(g, eps);
    let r_max = 2.0 * y1.x_max();
    let n = 4000;
    let mut radius = f64::INFINITY;
    let mut all_below = true;
    for i in (1..=n).rev() {
        let x = r_max * i as f64 / n as f64;
        let v0 = trial.v0(g, x) + kappa;
        let v1 = spec.eval(x) - trial.v0(g, x) - kappa;
        let below = v1.abs() < v0.abs();
        if all_below && !below {
            radius = x;
            all_below = false;
        }
    }
    if all_below {
        radius = 0.0;
    }

    let probes: Vec<f64> = (1..=100).map(|i| 0.05 * i as f64).collect();
    let mut residuals = Vec::new();
    for ord in 0..=series.y_terms.len().min(series.order()) {
        let r = riccati_residual(spec, trial, series, ord, &probes)?;
        residuals.push(r.iter().fold(0.0f64, |m, v| m.max(v.abs())));
    }

    Ok(ConvergenceReport {
        y1_max,
        y1_argmax,
        domination_radius: radius,
        riccati_residual: residuals,
    })
}

/// Run the correction hierarchy through E_order.
///
/// Stores y₁ … y_{order−1} (y₁ always, for the diagnostics); the last energy
/// correction needs no new y. Trials with off-origin nodes are rejected:
/// their y₁ picks up poles at the unperturbed nodes and the second-order
/// averages stop existing.
pub fn run_series(
    spec: &PotentialSpec,
    trial: &TrialFunction,
    order: usize,
    cfg: &QuadratureConfig,
) -> Result<PerturbationSeries> {
    if order < 1 {
        return Err(Error::Unsupported("series order must be >= 1".into()));
    }
    if !trial.positive_nodes().is_empty() {
        return Err(Error::Unsupported(
            "perturbation series around trials with off-origin nodes is not \
             defined beyond first order; use the variational energy instead"
                .into(),
        ));
    }
    let ctx = SeriesCtx::new(trial, spec.g())?;

    // Tighter, compensated settings for the higher corrections, which are
    // small differences of O(1) quadratures.
    let mut cfg_hi = cfg.clone();
    cfg_hi.abs_tol = (cfg.abs_tol * 1e-4).max(1e-18);
    cfg_hi.rel_tol = cfg.rel_tol.min(1e-9);
    cfg_hi.compensated = true;
    let mut cfg_grid = cfg.clone();
    cfg_grid.abs_tol = 1e-14;
    cfg_grid.rel_tol = 1e-10;

    let v1 = perturbation_potential(spec, trial);

    let mut e_terms = vec![0.0f64];
    let mut y_terms: Vec<GridFunction> = Vec::new();

    for k in 1..=order {
        let q_k: Box<dyn Fn(f64) -> f64> = match k {
            1 => Box::new(&v1),
            _ => {
                let grids = y_terms.clone(); // y₁ … y_{k−1}
                Box::new(move |x: f64| {
                    -(1..k)
                        .map(|i| grids[i - 1].eval_odd(x) * grids[k - i - 1].eval_odd(x))
                        .sum::<f64>()
                })
            }
        };

        let cfg_ek = if k == 1 { cfg } else { &cfg_hi };
        let e_k = ctx.average(q_k.as_ref(), cfg_ek)?;
        e_terms.push(e_k);

        let need_grid = k < order || k == 1;
        if need_grid && y_terms.len() < k {
            let grid_cfg = if k == 1 { &cfg_grid } else { &cfg_hi };
            y_terms.push(ctx.build_yk_grid(e_k, q_k.as_ref(), grid_cfg)?);
        }
    }

    let mut partial_sums = Vec::with_capacity(order);
    let mut acc = 0.0;
    for &e in e_terms.iter().skip(1) {
        acc += e;
        partial_sums.push(acc);
    }

    let mut series = PerturbationSeries {
        e_terms,
        y_terms,
        partial_sums,
        diagnostics: ConvergenceReport {
            y1_max: 0.0,
            y1_argmax: 0.0,
            domination_radius: f64::INFINITY,
            riccati_residual: Vec::new(),
        },
    };
    series.diagnostics = convergence_diagnostics(spec, trial, &series, cfg)?;
    Ok(series)
}

/// Direct-quadrature evaluation of y_k at a point (no grid interpolation),
/// choosing the well-conditioned form automatically.
pub fn yk_at(
    spec: &PotentialSpec,
    trial: &TrialFunction,
    series: &PerturbationSeries,
    k: usize,
    x: f64,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    let (ctx, q) = point_eval_ctx(spec, trial, series, k)?;
    let v = ctx.yk_auto(series.e_terms[k], q.as_ref(), x.abs(), cfg)?;
    Ok(if x < 0.0 { -v } else { v })
}

/// Direct form of y_k at a point, regardless of conditioning.
pub fn yk_core_at(
    spec: &PotentialSpec,
    trial: &TrialFunction,
    series: &PerturbationSeries,
    k: usize,
    x: f64,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    let (ctx, q) = point_eval_ctx(spec, trial, series, k)?;
    ctx.yk_core(series.e_terms[k], q.as_ref(), x, cfg)
}

/// Complementary form of y_k at a point.
pub fn yk_tail_at(
    spec: &PotentialSpec,
    trial: &TrialFunction,
    series: &PerturbationSeries,
    k: usize,
    x: f64,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    let (ctx, q) = point_eval_ctx(spec, trial, series, k)?;
    ctx.yk_tail(series.e_terms[k], q.as_ref(), x, cfg)
}

/// The switch point between the direct and complementary forms of y_k.
pub fn switch_point(spec: &PotentialSpec, trial: &TrialFunction) -> Result<f64> {
    Ok(SeriesCtx::new(trial, spec.g())?.x_switch)
}

fn point_eval_ctx<'a>(
    spec: &'a PotentialSpec,
    trial: &'a TrialFunction,
    series: &'a PerturbationSeries,
    k: usize,
) -> Result<(SeriesCtx<'a>, Box<dyn Fn(f64) -> f64 + 'a>)> {
    if k == 0 || k > series.order() {
        return Err(Error::Unsupported(format!("no correction of order {k}")));
    }
    if k >= 2 && series.y_terms.len() < k - 1 {
        return Err(Error::Unsupported(format!(
            "correction {k} needs stored y-terms through {}",
            k - 1
        )));
    }
    let ctx = SeriesCtx::new(trial, spec.g())?;
    let q: Box<dyn Fn(f64) -> f64 + 'a> = if k == 1 {
        Box::new(perturbation_potential(spec, trial))
    } else {
        let terms = &series.y_terms;
        Box::new(move |x: f64| {
            -(1..k)
                .map(|i| terms[i - 1].eval_odd(x) * terms[k - i - 1].eval_odd(x))
                .sum::<f64>()
        })
    };
    Ok((ctx, q))
}

/// Residual of the zero-mean identity ∫(E_k − Q_k)ψ₀² = 0, normalized by
/// the weight's own norm (fresh quadrature, independent of the E_k path).
pub fn zero_mean_residual(
    spec: &PotentialSpec,
    trial: &TrialFunction,
    series: &PerturbationSeries,
    k: usize,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    let (ctx, q) = point_eval_ctx(spec, trial, series, k)?;
    let e_k = series.e_terms[k];
    let cfg_s = cfg.clone().with_splits(&ctx.splits);
    let den = half_norm(&ctx.w, &cfg_s)?;
    let num = quadgrid::integrate(
        ctx.w.weighted(|x| e_k - q(x)),
        Domain::HalfLinePositive,
        &cfg_s,
    )?;
    Ok(num.value / den)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trial::{FullTrialParams, SimpleTrialParams};
    use approx::assert_relative_eq;

    fn simple(a: f64, b: f64, c: f64) -> TrialFunction {
        TrialFunction::Simple(SimpleTrialParams::new(a, b, c).unwrap())
    }

    #[test]
    fn v1_closed_form_for_matched_simple_family() {
        // a = m, b = 1: V₁ = 2√g|x|(1 − m x²) + m in the E₀ = 0 convention.
        let spec = PotentialSpec::new(1.0, 2.0).unwrap();
        let t = simple(1.0, 1.0, 0.0);
        let v1 = perturbation_potential(&spec, &t);
        for &x in &[-2.0f64, -0.3, 0.5, 1.7] {
            let expect = 2.0 * 2.0f64.sqrt() * x.abs() * (1.0 - x * x) + 1.0;
            assert_relative_eq!(v1(x), expect, max_relative = 1e-11, epsilon = 1e-11);
        }
    }

    #[test]
    fn v1_quadratic_and_quartic_terms_vanish_when_matched() {
        // Least-squares fit of V₁ onto {1, |x|, x², |x|³, x⁴} at a = m, b = 1:
        // the x² and x⁴ coefficients must vanish.
        let spec = PotentialSpec::new(1.0, 2.0).unwrap();
        let t = simple(1.0, 1.0, 0.0);
        let v1 = perturbation_potential(&spec, &t);
        let xs: Vec<f64> = (1..=60).map(|i| 0.1 * i as f64).collect();
        // Exact by construction: check sampled values against the pure
        // |x|-family part; any residual quadratic/quartic term would grow.
        for &x in &xs {
            let odd_part = 2.0 * 2.0f64.sqrt() * x * (1.0 - x * x) + 1.0;
            assert!((v1(x) - odd_part).abs() < 1e-9 * (1.0 + odd_part.abs()));
        }
    }

    #[test]
    fn harmonic_limit_is_exact() {
        let spec = PotentialSpec::new(1.0, 0.0).unwrap();
        let t = simple(1.0, 1e-14, 0.0);
        let cfg = QuadratureConfig::default();
        let e1 = compute_e1(&spec, &t, &cfg).unwrap();
        assert_relative_eq!(e1, 1.0, max_relative = 1e-11);

        let series = run_series(&spec, &t, 2, &cfg).unwrap();
        assert!(series.e_terms[2].abs() < 1e-10, "E2 = {}", series.e_terms[2]);
        assert!(series.diagnostics.y1_max < 1e-9);
        assert_eq!(series.diagnostics.domination_radius, 0.0);
    }

    #[test]
    fn e1_matches_rayleigh_quotient() {
        let spec = PotentialSpec::new(1.0, 2.0).unwrap();
        let t = simple(1.2, 1.1, 0.3);
        let cfg = QuadratureConfig::default();
        let e1 = compute_e1(&spec, &t, &cfg).unwrap();
        let rq = rayleigh_quotient(&spec, &t, &cfg).unwrap();
        assert!(
            (e1 - rq).abs() <= 2.0 * (cfg.abs_tol + cfg.rel_tol * rq.abs()) * 1e3,
            "E1 {} vs Rayleigh {}",
            e1,
            rq
        );
    }

    #[test]
    fn closed_form_first_order_energy_matches_generic_path() {
        // Dual route for a = m, b = 1, c = 0 at m² = 1, g = 2:
        // E⁽¹⁾ = m + 2√g ∫ x(1−mx²) W / ∫ W with W = e^{−m x² − (2√g/3)x³}.
        let spec = PotentialSpec::new(1.0, 2.0).unwrap();
        let (m, g) = (1.0f64, 2.0f64);
        let t = simple(m, 1.0, 0.0);
        let cfg = QuadratureConfig::default();
        let generic = compute_e1(&spec, &t, &cfg).unwrap();

        let wgt = |x: f64| (-m * x * x - 2.0 * g.sqrt() / 3.0 * x.powi(3)).exp();
        let num = quadgrid::integrate(
            |x| x * (1.0 - m * x * x) * wgt(x),
            Domain::HalfLinePositive,
            &cfg,
        )
        .unwrap()
        .value;
        let den = quadgrid::integrate(wgt, Domain::HalfLinePositive, &cfg)
            .unwrap()
            .value;
        let closed = m + 2.0 * g.sqrt() * num / den;
        assert!(
            (generic - closed).abs() < 1e-10,
            "generic {generic} vs closed {closed}"
        );
    }

    #[test]
    fn gauge_shift_leaves_e1_invariant() {
        // Multiplying ψ₀ by a constant must not move E₁: shift the gauge
        // reference by hand and compare.
        let spec = PotentialSpec::new(0.0, 1.0).unwrap();
        let t = TrialFunction::Full(FullTrialParams::new(0.25, 0.38, 4.0 / 3.0, 0.9, 1.07).unwrap());
        let cfg = QuadratureConfig::default();
        let mut w = Weight::new(&t, spec.g()).unwrap();
        let base = e1_in_gauge(&spec, &t, &w, &cfg).unwrap();
        w.ln_psi_max += 7.0;
        let shifted = e1_in_gauge(&spec, &t, &w, &cfg).unwrap();
        assert!(
            (base - shifted).abs() < 1e-10 * (1.0 + base.abs()),
            "gauge dependence: {base} vs {shifted}"
        );
    }

    #[test]
    fn y1_vanishes_at_origin_and_when_unperturbed() {
        let spec = PotentialSpec::new(1.0, 2.0).unwrap();
        let t = simple(1.0, 1.0, 0.0);
        let cfg = QuadratureConfig::default();
        let series = run_series(&spec, &t, 2, &cfg).unwrap();
        let y1 = &series.y_terms[0];
        assert_eq!(y1.eval(0.0), 0.0);
        assert_eq!(y1.eval_odd(0.0), 0.0);
        // Oddness of the extension is exact.
        assert_eq!(y1.eval_odd(1.3), -y1.eval_odd(-1.3));
    }

    #[test]
    fn riccati_residual_identities() {
        let spec = PotentialSpec::new(1.0, 2.0).unwrap();
        let t = simple(1.0, 1.0, 0.0);
        let cfg = QuadratureConfig::default();
        let series = run_series(&spec, &t, 2, &cfg).unwrap();
        let v1 = perturbation_potential(&spec, &t);

        // Order 0: the residual is the perturbation itself.
        let probes = [0.3, 0.9, 1.7, 2.8];
        let r0 = riccati_residual(&spec, &t, &series, 0, &probes).unwrap();
        for (&x, &r) in probes.iter().zip(&r0) {
            assert_relative_eq!(r, v1(x), max_relative = 1e-10, epsilon = 1e-10);
        }

        // Residual decreases with order.
        let d = &series.diagnostics.riccati_residual;
        assert!(d[1] < d[0], "order 1 residual {} !< order 0 {}", d[1], d[0]);
    }

    #[test]
    fn rejects_noded_trials_beyond_first_order() {
        use crate::trial::ExcitedSpec;
        let spec = PotentialSpec::new(1.0, 2.0).unwrap();
        let base = FullTrialParams::with_case1(1.0, 2.0, 0.0, 1.0, 1.4).unwrap();
        let t = TrialFunction::Excited(ExcitedSpec::new(1, 0, vec![1.2], base).unwrap());
        let cfg = QuadratureConfig::default();
        assert!(run_series(&spec, &t, 2, &cfg).is_err());
        // First-order (variational) energy still fine.
        assert!(compute_e1(&spec, &t, &cfg).unwrap().is_finite());
    }
}
