//! Reduced flows: the normalized Ricci flow on products of two hyperbolic
//! surfaces, and the Yamabe flow on axisymmetric conformal factors.

use serde::Serialize;

use crate::conformal::{
    lp_scalar_functional, round_lp_floor, scalar_curvature, volume_integrate, ConformalFactorField,
    ScalarField,
};
use crate::error::{Error, Result};

const MAX_HALVINGS: u32 = 30;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProductFlowState {
    pub t: f64,
    pub a: f64,
    pub b: f64,
    pub v1: f64,
    pub v2: f64,
}

impl ProductFlowState {
    pub fn new(a: f64, b: f64, v1: f64, v2: f64) -> Result<Self> {
        if [a, b, v1, v2].iter().any(|&x| !(x.is_finite() && x > 0.0)) {
            return Err(Error::InvalidParameter(
                "scales and areas must be positive".into(),
            ));
        }
        Ok(Self {
            t: 0.0,
            a,
            b,
            v1,
            v2,
        })
    }

    pub fn volume(&self) -> f64 {
        self.a * self.b * self.v1 * self.v2
    }

    pub fn scalar(&self) -> f64 {
        -2.0 / self.a - 2.0 / self.b
    }

    /// `∫S² dv = (2/a + 2/b)² · ab V₁V₂`.
    pub fn int_s2(&self) -> f64 {
        self.scalar().powi(2) * self.volume()
    }

    /// `∫|Ric|² dv = (2/a² + 2/b²) · ab V₁V₂`.
    pub fn int_ric2(&self) -> f64 {
        (2.0 / (self.a * self.a) + 2.0 / (self.b * self.b)) * self.volume()
    }

    pub fn monitor(&self) -> ProductMonitor {
        ProductMonitor {
            t: self.t,
            a: self.a,
            b: self.b,
            int_s2: self.int_s2(),
            int_ric2: self.int_ric2(),
            volume: self.volume(),
        }
    }
}

/// `(da/dt, db/dt) = (1 − a/b, 1 − b/a)`, the block reduction of
/// `∂g/∂t = −2z − (2δS/n) g` with `δS = 0` on homogeneous metrics.
pub fn ricci_product_rhs(a: f64, b: f64) -> (f64, f64) {
    (1.0 - a / b, 1.0 - b / a)
}

fn rk4(a: f64, b: f64, dt: f64) -> (f64, f64) {
    let f = ricci_product_rhs;
    let (k1a, k1b) = f(a, b);
    let (k2a, k2b) = f(a + 0.5 * dt * k1a, b + 0.5 * dt * k1b);
    let (k3a, k3b) = f(a + 0.5 * dt * k2a, b + 0.5 * dt * k2b);
    let (k4a, k4b) = f(a + dt * k3a, b + dt * k3b);
    (
        a + dt / 6.0 * (k1a + 2.0 * k2a + 2.0 * k3a + k4a),
        b + dt / 6.0 * (k1b + 2.0 * k2b + 2.0 * k3b + k4b),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProductMonitor {
    pub t: f64,
    pub a: f64,
    pub b: f64,
    pub int_s2: f64,
    pub int_ric2: f64,
    pub volume: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProductRunReport {
    pub steps: usize,
    /// Steps where `∫S²` rose by more than round-off.
    pub s2_increases: usize,
    pub s2_non_increasing: bool,
    /// Informational only: the product violates the pinching hypothesis.
    pub ric2_non_increasing: bool,
    pub max_volume_drift: f64,
    pub final_gap: f64,
    pub halvings: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProductRun {
    pub trajectory: Vec<ProductMonitor>,
    pub report: ProductRunReport,
}

fn rises(prev: f64, cur: f64) -> bool {
    cur > prev + 8.0 * f64::EPSILON * prev.abs()
}

/// Classical fourth-order integration to `t_end`. A step that would leave
/// the positive quadrant is halved and retried.
pub fn ricci_product_run(initial: ProductFlowState, t_end: f64, dt: f64) -> Result<ProductRun> {
    if !(dt > 0.0 && dt.is_finite()) || !(t_end >= 0.0 && t_end.is_finite()) {
        return Err(Error::InvalidParameter(
            "dt must be positive and t_end non-negative".into(),
        ));
    }
    let mut state = initial;
    let v0 = state.volume();
    let mut trajectory = vec![state.monitor()];
    let mut halvings = 0;
    let mut steps = 0;
    while state.t < t_end * (1.0 - 1e-15) {
        let mut h = dt.min(t_end - state.t);
        let mut tries = 0;
        let (a, b) = loop {
            let (a, b) = rk4(state.a, state.b, h);
            if a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite() {
                break (a, b);
            }
            tries += 1;
            if tries > MAX_HALVINGS {
                return Err(Error::StepSize { t: state.t, dt: h });
            }
            h /= 2.0;
        };
        halvings += tries;
        state = ProductFlowState {
            t: state.t + h,
            a,
            b,
            ..state
        };
        trajectory.push(state.monitor());
        steps += 1;
    }
    let s2_increases = trajectory
        .windows(2)
        .filter(|w| rises(w[0].int_s2, w[1].int_s2))
        .count();
    let ric2_non_increasing = trajectory
        .windows(2)
        .all(|w| !rises(w[0].int_ric2, w[1].int_ric2));
    let max_volume_drift = trajectory
        .iter()
        .map(|m| (m.volume / v0 - 1.0).abs())
        .fold(0.0, f64::max);
    Ok(ProductRun {
        report: ProductRunReport {
            steps,
            s2_increases,
            s2_non_increasing: s2_increases == 0,
            ric2_non_increasing,
            max_volume_drift,
            final_gap: (state.a - state.b).abs(),
            halvings,
        },
        trajectory,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct YamabeFlowState {
    pub u: ConformalFactorField,
    pub t: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct YamabeMonitor {
    pub t: f64,
    pub lp: f64,
    pub volume: f64,
    pub min_s: f64,
    pub max_s: f64,
    pub s_bar: f64,
}

/// `s̄ = ∫S dv / Vol`.
pub fn mean_scalar(u: &ConformalFactorField, s: &ScalarField) -> f64 {
    volume_integrate(s, u).expect("scalar field comes from the same grid") / u.volume()
}

pub fn yamabe_monitor(state: &YamabeFlowState) -> YamabeMonitor {
    let s = scalar_curvature(&state.u);
    YamabeMonitor {
        t: state.t,
        lp: lp_scalar_functional(&state.u),
        volume: state.u.volume(),
        min_s: s.min(),
        max_s: s.max(),
        s_bar: mean_scalar(&state.u, &s),
    }
}

/// Explicit-Euler stability cap. The stiff part of `∂u/∂t` is
/// `(n−1) u^{−4/(n−2)} Δ₀u`, whose discrete spectrum on the latitude grid is
/// dominated by the pole rows, of size `4n/h²`.
pub fn stable_dt(u: &ConformalFactorField) -> f64 {
    let n = u.dim() as f64;
    let q = 4.0 / (n - 2.0);
    let umin = u.values().iter().copied().fold(f64::INFINITY, f64::min);
    let diffusivity = umin.powf(-q);
    let radius2 = match u.background() {
        crate::models::ModelGeometry::RoundSphere { radius, .. } => radius * radius,
        _ => 1.0,
    };
    0.4 * u.spacing().powi(2) * radius2 / (n * (n - 1.0) * diffusivity)
}

fn velocity(u: &ConformalFactorField, normalized: bool) -> Vec<f64> {
    let n = u.dim() as f64;
    let s = scalar_curvature(u);
    let target = if normalized { mean_scalar(u, &s) } else { 0.0 };
    let c = (n - 2.0) / 4.0;
    u.values()
        .iter()
        .zip(&s.values)
        .map(|(ui, si)| c * (target - si) * ui)
        .collect()
}

/// One explicit-Euler step of `∂u/∂t = ((n−2)/4)(s̄ − S)u` (normalized) or
/// `−((n−2)/4)Su`. A step that loses positivity is halved and retried.
/// Pole regularity needs no separate projection: the pole rows of the
/// Laplacian already use the reflected ghost node.
pub fn yamabe_flow_step(
    state: &YamabeFlowState,
    dt: f64,
    normalized: bool,
) -> Result<YamabeFlowState> {
    let cap = stable_dt(&state.u);
    if !(dt > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "dt must be positive, got {dt}"
        )));
    }
    if dt > cap * (1.0 + 1e-12) {
        return Err(Error::Precondition(format!(
            "dt = {dt} exceeds the stability cap {cap}"
        )));
    }
    let v = velocity(&state.u, normalized);
    let mut h = dt;
    for _ in 0..=MAX_HALVINGS {
        let next: Vec<f64> = state
            .u
            .values()
            .iter()
            .zip(&v)
            .map(|(u, du)| u + h * du)
            .collect();
        if let Ok(u) = state.u.with_values(next) {
            return Ok(YamabeFlowState { u, t: state.t + h });
        }
        h /= 2.0;
    }
    Err(Error::Stiffness {
        t: state.t,
        halvings: MAX_HALVINGS,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct YamabeRunOptions {
    pub normalized: bool,
    /// Fraction of the stability cap used as the step.
    pub dt_factor: f64,
    /// Keep every k-th monitor in the history (the checks use every step).
    pub record_every: usize,
}

impl Default for YamabeRunOptions {
    fn default() -> Self {
        Self {
            normalized: true,
            dt_factor: 1.0,
            record_every: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct YamabeRunReport {
    pub steps: usize,
    pub initial_min_s: f64,
    /// Largest per-step relative increase of `∫|S|^{n/2} dv`.
    pub max_relative_increase: f64,
    pub monotone: bool,
    pub positivity_lost: bool,
    pub max_volume_drift: f64,
    pub volume_drift_per_unit_time: f64,
    /// `(n(n−1))^{n/2} ωₙ`; only meaningful on round backgrounds.
    pub lp_floor: f64,
    /// `min_t ∫|S|^{n/2} dv / floor − 1`.
    pub min_floor_ratio: f64,
    pub grid_tolerance: f64,
    pub floor_respected: bool,
    pub terminal_lp: f64,
    pub terminal_relative_to_floor: f64,
    pub initial_spread: f64,
    pub terminal_spread: f64,
    pub pole_warnings: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct YamabeRun {
    pub history: Vec<YamabeMonitor>,
    pub report: YamabeRunReport,
    #[serde(skip)]
    pub final_state: YamabeFlowState,
}

/// Per-step tolerance of the monotonicity monitor.
pub const MONOTONE_TOL: f64 = 1e-8;

pub fn yamabe_flow_run(
    initial: ConformalFactorField,
    t_end: f64,
    opts: YamabeRunOptions,
) -> Result<YamabeRun> {
    if !(opts.dt_factor > 0.0 && opts.dt_factor <= 1.0) {
        return Err(Error::InvalidParameter(
            "dt_factor must lie in (0, 1]".into(),
        ));
    }
    if !(t_end >= 0.0 && t_end.is_finite()) {
        return Err(Error::InvalidParameter("t_end must be non-negative".into()));
    }
    let s0 = scalar_curvature(&initial);
    if s0.min() <= 0.0 {
        return Err(Error::Precondition(format!(
            "initial scalar curvature must be positive, min is {}",
            s0.min()
        )));
    }
    let n = initial.dim();
    let record_every = opts.record_every.max(1);
    let mut state = YamabeFlowState { u: initial, t: 0.0 };
    let first = yamabe_monitor(&state);
    let (lp_floor, grid_tolerance) = (round_lp_floor(n), state.u.grid_tolerance());
    let mut history = vec![first];
    let mut prev = first;
    let mut max_inc = f64::NEG_INFINITY;
    let mut positivity_lost = false;
    let mut min_lp = first.lp;
    let mut max_drift: f64 = 0.0;
    let mut pole_warnings = 0;
    let mut steps = 0;
    while state.t < t_end * (1.0 - 1e-15) {
        let dt = (opts.dt_factor * stable_dt(&state.u)).min(t_end - state.t);
        state = yamabe_flow_step(&state, dt, opts.normalized)?;
        steps += 1;
        let m = yamabe_monitor(&state);
        if m.min_s <= 0.0 {
            positivity_lost = true;
        }
        if !positivity_lost {
            max_inc = max_inc.max((m.lp - prev.lp) / prev.lp);
        }
        if !state.u.pole_regular() {
            pole_warnings += 1;
        }
        min_lp = min_lp.min(m.lp);
        max_drift = max_drift.max((m.volume / first.volume - 1.0).abs());
        if steps % record_every == 0 || state.t >= t_end * (1.0 - 1e-15) {
            history.push(m);
        }
        prev = m;
    }
    let round = state.u.is_sphere();
    let report = YamabeRunReport {
        steps,
        initial_min_s: first.min_s,
        max_relative_increase: max_inc.max(0.0),
        monotone: max_inc <= MONOTONE_TOL,
        positivity_lost,
        max_volume_drift: max_drift,
        volume_drift_per_unit_time: if t_end > 0.0 {
            max_drift / t_end.max(1.0)
        } else {
            0.0
        },
        lp_floor,
        min_floor_ratio: min_lp / lp_floor - 1.0,
        grid_tolerance,
        floor_respected: !round || min_lp >= lp_floor * (1.0 - grid_tolerance),
        terminal_lp: prev.lp,
        terminal_relative_to_floor: prev.lp / lp_floor - 1.0,
        initial_spread: first.max_s - first.min_s,
        terminal_spread: prev.max_s - prev.min_s,
        pole_warnings,
    };
    Ok(YamabeRun {
        history,
        report,
        final_state: state,
    })
}

/// Right side of the scalar-curvature evolution under the normalized flow,
/// `(n−1)Δ_g S + S(S − s̄)`.
pub fn scalar_evolution_rhs(u: &ConformalFactorField) -> Vec<f64> {
    let n = u.dim() as f64;
    let s = scalar_curvature(u);
    let sbar = mean_scalar(u, &s);
    let lap = u.laplacian(&s.values).expect("same grid");
    s.values
        .iter()
        .zip(&lap)
        .map(|(si, li)| (n - 1.0) * li + si * (si - sbar))
        .collect()
}

/// Weighted `L²(dv₀)` mismatch between `∂S/∂t` and the evolution right side.
///
/// The time derivative is that of the discrete `S` along the semi-discrete
/// flow `u̇ = v`: `Ṡ = −p u^{−p−1} v (S₀u − C_nΔ₀u) + u^{−p}(S₀v − C_nΔ₀v)`
/// with `p = (n+2)/(n−2)`. Differencing over a step would divide the
/// `O(ε/h²)` round-off in `S` by a step of size `O(h²)`.
pub fn evolution_residual(u: &ConformalFactorField) -> Result<f64> {
    let n = u.dim() as f64;
    let p = (n + 2.0) / (n - 2.0);
    let cn = crate::conformal::conformal_constant(u.dim());
    let s0 = u.background_scalar();
    let v = velocity(u, true);
    let lap_u = u.background_laplacian(u.values());
    let lap_v = u.background_laplacian(&v);
    let rhs = scalar_evolution_rhs(u);
    let w = u.weights();
    let mut num = 0.0;
    for i in 0..u.len() {
        let ui = u.values()[i];
        let ds = -p * ui.powf(-p - 1.0) * v[i] * (s0 * ui - cn * lap_u[i])
            + ui.powf(-p) * (s0 * v[i] - cn * lap_v[i]);
        let r = ds - rhs[i];
        num += w[i] * r * r;
    }
    Ok((num / w.iter().sum::<f64>()).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResidualRow {
    pub nodes: usize,
    pub spacing: f64,
    pub residual: f64,
    /// Residual of the previous (coarser) row over this one.
    pub reduction: Option<f64>,
}

/// Residual of the evolution equation on successively refined grids.
pub fn residual_convergence<F: Fn(f64) -> f64>(
    n: usize,
    grids: &[usize],
    f: F,
) -> Result<Vec<ResidualRow>> {
    let mut rows: Vec<ResidualRow> = Vec::with_capacity(grids.len());
    for &m in grids {
        let u = ConformalFactorField::on_round_sphere(n, m, &f)?;
        let residual = evolution_residual(&u)?;
        rows.push(ResidualRow {
            nodes: m,
            spacing: u.spacing(),
            residual,
            reduction: rows.last().map(|p| p.residual / residual),
        });
    }
    Ok(rows)
}
