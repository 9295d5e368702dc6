//! Conformal metrics `g = u^{4/(n−2)} g₀` on one-dimensional reductions of
//! the round sphere (latitude-only factors) and the flat torus (factors
//! depending on the first coordinate).

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::models::{unit_sphere_volume, ModelGeometry};

pub const MIN_NODES: usize = 32;
pub const DEFAULT_NODES: usize = 512;

/// Multiplier of `h²` in the relative grid tolerance.
const GRID_TOL_FACTOR: f64 = 10.0;

/// `4(n−1)/(n−2)`.
pub fn conformal_constant(n: usize) -> f64 {
    4.0 * (n as f64 - 1.0) / (n as f64 - 2.0)
}

/// `∫|S|^{n/2} dv` of the unit round sphere, `(n(n−1))^{n/2} ωₙ`. Scale invariant.
pub fn round_lp_floor(n: usize) -> f64 {
    let nf = n as f64;
    (nf * (nf - 1.0)).powf(nf / 2.0) * unit_sphere_volume(n)
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Chart {
    Sphere { radius: f64 },
    Torus { length: f64, cross_section: f64 },
}

/// A positive conformal factor sampled on a latitude grid `θᵢ = iπ/(N−1)` of
/// the round sphere or on a periodic grid `xᵢ = iL/N` of the torus.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConformalFactorField {
    background: ModelGeometry,
    nodes: Vec<f64>,
    values: Vec<f64>,
    #[serde(skip)]
    chart: Chart,
}

impl ConformalFactorField {
    pub fn new(background: ModelGeometry, values: Vec<f64>) -> Result<Self> {
        let background = background.normalized();
        background.validate()?;
        let n = background.dim();
        if n < 3 {
            return Err(Error::UnsupportedDimension {
                n,
                operation: "conformal factor fields",
            });
        }
        let len = values.len();
        if len < MIN_NODES {
            return Err(Error::InvalidParameter(format!(
                "grid needs at least {MIN_NODES} nodes, got {len}"
            )));
        }
        let (chart, nodes) = match &background {
            ModelGeometry::RoundSphere { radius, .. } => {
                let h = PI / (len - 1) as f64;
                (
                    Chart::Sphere { radius: *radius },
                    (0..len).map(|i| i as f64 * h).collect(),
                )
            }
            ModelGeometry::FlatTorus { periods, .. } => {
                let length = periods[0];
                let h = length / len as f64;
                let chart = Chart::Torus {
                    length,
                    cross_section: periods[1..].iter().product(),
                };
                (chart, (0..len).map(|i| i as f64 * h).collect())
            }
            _ => {
                return Err(Error::InvalidGeometry(
                    "conformal fields need a round sphere or flat torus background".into(),
                ))
            }
        };
        check_positive(&values)?;
        Ok(Self {
            background,
            nodes,
            values,
            chart,
        })
    }

    pub fn from_fn(
        background: ModelGeometry,
        num_nodes: usize,
        f: impl Fn(f64) -> f64,
    ) -> Result<Self> {
        let probe = Self::new(background, vec![1.0; num_nodes.max(MIN_NODES)])?;
        if num_nodes < MIN_NODES {
            return Err(Error::InvalidParameter(format!(
                "grid needs at least {MIN_NODES} nodes, got {num_nodes}"
            )));
        }
        let values = probe.nodes.iter().map(|&x| f(x)).collect();
        probe.with_values(values)
    }

    /// Field on the unit round `Sⁿ`, as a function of the polar angle.
    pub fn on_round_sphere(n: usize, num_nodes: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::from_fn(ModelGeometry::RoundSphere { n, radius: 1.0 }, num_nodes, f)
    }

    /// Same grid and background, new values.
    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        if values.len() != self.values.len() {
            return Err(Error::GridMismatch);
        }
        check_positive(&values)?;
        Ok(Self {
            values,
            ..self.clone()
        })
    }

    pub fn dim(&self) -> usize {
        self.background.dim()
    }

    pub fn background(&self) -> &ModelGeometry {
        &self.background
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_sphere(&self) -> bool {
        matches!(self.chart, Chart::Sphere { .. })
    }

    pub fn spacing(&self) -> f64 {
        self.nodes[1] - self.nodes[0]
    }

    /// Relative tolerance for quantities that converge at second order.
    pub fn grid_tolerance(&self) -> f64 {
        GRID_TOL_FACTOR * self.spacing().powi(2)
    }

    pub fn same_grid(&self, other: &Self) -> bool {
        self.background == other.background && self.len() == other.len()
    }

    /// Scalar curvature of `g₀`.
    pub fn background_scalar(&self) -> f64 {
        match self.chart {
            Chart::Sphere { radius } => {
                let n = self.dim() as f64;
                n * (n - 1.0) / (radius * radius)
            }
            Chart::Torus { .. } => 0.0,
        }
    }

    /// Quadrature weights of `dv₀` (composite trapezoid).
    pub fn weights(&self) -> Vec<f64> {
        let h = self.spacing();
        let n = self.dim();
        match self.chart {
            Chart::Sphere { radius } => {
                let c = radius.powi(n as i32) * unit_sphere_volume(n - 1) * h;
                let last = self.len() - 1;
                self.nodes
                    .iter()
                    .enumerate()
                    .map(|(i, th)| {
                        let w = c * th.sin().powi(n as i32 - 1);
                        if i == 0 || i == last {
                            w / 2.0
                        } else {
                            w
                        }
                    })
                    .collect()
            }
            Chart::Torus { cross_section, .. } => vec![cross_section * h; self.len()],
        }
    }

    /// Weights of `dv_g = u^{2n/(n−2)} dv₀`.
    pub fn conformal_weights(&self) -> Vec<f64> {
        let p = self.volume_exponent();
        self.weights()
            .iter()
            .zip(&self.values)
            .map(|(w, u)| w * u.powf(p))
            .collect()
    }

    pub fn volume(&self) -> f64 {
        self.conformal_weights().iter().sum()
    }

    fn volume_exponent(&self) -> f64 {
        let n = self.dim() as f64;
        2.0 * n / (n - 2.0)
    }

    /// `1/r²` on the sphere, 1 on the torus: converts coordinate derivatives
    /// into metric inner products.
    fn inverse_metric(&self) -> f64 {
        match self.chart {
            Chart::Sphere { radius } => 1.0 / (radius * radius),
            Chart::Torus { .. } => 1.0,
        }
    }

    /// Coordinate derivative by central differences; zero at the poles.
    pub fn derivative(&self, f: &[f64]) -> Vec<f64> {
        let m = f.len();
        let h = self.spacing();
        match self.chart {
            Chart::Sphere { .. } => (0..m)
                .map(|i| {
                    if i == 0 || i == m - 1 {
                        0.0
                    } else {
                        (f[i + 1] - f[i - 1]) / (2.0 * h)
                    }
                })
                .collect(),
            Chart::Torus { .. } => (0..m)
                .map(|i| (f[(i + 1) % m] - f[(i + m - 1) % m]) / (2.0 * h))
                .collect(),
        }
    }

    /// `Δ₀f`. On the sphere the poles use the regular limit `n·f''` with a
    /// reflected ghost node.
    pub fn background_laplacian(&self, f: &[f64]) -> Vec<f64> {
        let m = f.len();
        let h = self.spacing();
        let h2 = h * h;
        match self.chart {
            Chart::Sphere { radius } => {
                let n = self.dim() as f64;
                let r2 = radius * radius;
                (0..m)
                    .map(|i| {
                        let lap = if i == 0 {
                            n * 2.0 * (f[1] - f[0]) / h2
                        } else if i == m - 1 {
                            n * 2.0 * (f[m - 2] - f[m - 1]) / h2
                        } else {
                            let d2 = (f[i + 1] - 2.0 * f[i] + f[i - 1]) / h2;
                            let d1 = (f[i + 1] - f[i - 1]) / (2.0 * h);
                            d2 + (n - 1.0) * d1 / self.nodes[i].tan()
                        };
                        lap / r2
                    })
                    .collect()
            }
            Chart::Torus { .. } => (0..m)
                .map(|i| (f[(i + 1) % m] - 2.0 * f[i] + f[(i + m - 1) % m]) / h2)
                .collect(),
        }
    }

    /// `Δ_g f = u^{−4/(n−2)} (Δ₀f + 2⟨∇u, ∇f⟩₀ / u)`.
    pub fn laplacian(&self, f: &[f64]) -> Result<Vec<f64>> {
        if f.len() != self.len() {
            return Err(Error::GridMismatch);
        }
        let n = self.dim() as f64;
        let q = 4.0 / (n - 2.0);
        let lap0 = self.background_laplacian(f);
        let du = self.derivative(&self.values);
        let df = self.derivative(f);
        let g = self.inverse_metric();
        Ok((0..self.len())
            .map(|i| {
                let u = self.values[i];
                u.powf(-q) * (lap0[i] + 2.0 * g * du[i] * df[i] / u)
            })
            .collect())
    }

    /// Largest second-order one-sided slope at the two poles.
    pub fn pole_slope(&self) -> f64 {
        if !self.is_sphere() {
            return 0.0;
        }
        let h = self.spacing();
        let u = &self.values;
        let m = u.len();
        let north = (-3.0 * u[0] + 4.0 * u[1] - u[2]) / (2.0 * h);
        let south = (3.0 * u[m - 1] - 4.0 * u[m - 2] + u[m - 3]) / (2.0 * h);
        north.abs().max(south.abs())
    }

    pub fn pole_regular(&self) -> bool {
        let scale = 1.0 + self.values.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
        self.pole_slope() <= self.spacing() * scale
    }
}

fn check_positive(values: &[f64]) -> Result<()> {
    match values.iter().position(|&v| !(v.is_finite() && v > 0.0)) {
        Some(node) => Err(Error::NonPositiveFactor {
            node,
            value: values[node],
        }),
        None => Ok(()),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalarField {
    pub values: Vec<f64>,
    /// Set when the factor's one-sided pole slope exceeds the grid tolerance.
    pub pole_warning: bool,
}

impl ScalarField {
    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn spread(&self) -> f64 {
        self.max() - self.min()
    }
}

/// `S(g) = u^{−(n+2)/(n−2)} (S₀u − C_n Δ₀u)`.
pub fn scalar_curvature(u: &ConformalFactorField) -> ScalarField {
    let n = u.dim() as f64;
    let p = (n + 2.0) / (n - 2.0);
    let cn = conformal_constant(u.dim());
    let s0 = u.background_scalar();
    let lap = u.background_laplacian(u.values());
    let values = u
        .values()
        .iter()
        .zip(&lap)
        .map(|(&ui, &li)| ui.powf(-p) * (s0 * ui - cn * li))
        .collect();
    ScalarField {
        values,
        pole_warning: !u.pole_regular(),
    }
}

/// `∫ f dv_g`.
pub fn volume_integrate(f: &ScalarField, u: &ConformalFactorField) -> Result<f64> {
    if f.values.len() != u.len() {
        return Err(Error::GridMismatch);
    }
    Ok(f.values
        .iter()
        .zip(u.conformal_weights())
        .map(|(a, w)| a * w)
        .sum())
}

/// `∫ |S(g)|^{n/2} dv_g`.
pub fn lp_scalar_functional(u: &ConformalFactorField) -> f64 {
    let half = u.dim() as f64 / 2.0;
    let s = scalar_curvature(u);
    s.values
        .iter()
        .zip(u.conformal_weights())
        .map(|(si, w)| si.abs().powf(half) * w)
        .sum()
}

/// Yamabe quotient of `u` over the background:
/// `(C_n ∫|∇u|² + ∫S₀u²) / (∫u^{2n/(n−2)})^{(n−2)/n}`, all against `dv₀`.
pub fn yamabe_quotient(u: &ConformalFactorField) -> f64 {
    let n = u.dim() as f64;
    let w = u.weights();
    let du = u.derivative(u.values());
    let g = u.inverse_metric();
    let s0 = u.background_scalar();
    let mut energy = 0.0;
    for i in 0..u.len() {
        let ui = u.values[i];
        energy += w[i] * (conformal_constant(u.dim()) * g * du[i] * du[i] + s0 * ui * ui);
    }
    energy / u.volume().powf((n - 2.0) / n)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BubbleSpec {
    pub n: usize,
    pub epsilon: f64,
}

impl BubbleSpec {
    pub fn new(n: usize, epsilon: f64) -> Result<Self> {
        if n < 3 {
            return Err(Error::UnsupportedDimension {
                n,
                operation: "bubbles",
            });
        }
        if !(epsilon.is_finite() && epsilon > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "bubble epsilon must be positive, got {epsilon}"
            )));
        }
        Ok(Self { n, epsilon })
    }

    /// Constant scalar curvature of the flat-chart bubble metric, `4n(n−1)`.
    pub fn scalar_curvature(&self) -> f64 {
        let n = self.n as f64;
        4.0 * n * (n - 1.0)
    }

    /// Bubble factor relative to the round metric, at polar angle `θ` from
    /// the projection pole. Equal to `u_ε / u_round` in the stereographic
    /// chart `|x| = cot(θ/2)`, written so both poles are regular.
    pub fn relative_factor(&self, theta: f64) -> f64 {
        let e = self.epsilon;
        let (s, c) = (theta / 2.0).sin_cos();
        (e / (2.0 * (e * e * s * s + c * c))).powf((self.n as f64 - 2.0) / 2.0)
    }
}

/// The bubble metric pulled back to the unit round sphere.
pub fn bubble_pullback(spec: &BubbleSpec, num_nodes: usize) -> Result<ConformalFactorField> {
    ConformalFactorField::on_round_sphere(spec.n, num_nodes, |th| spec.relative_factor(th))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BubbleConcentration {
    pub n: usize,
    pub epsilon: f64,
    pub cap_radius: f64,
    pub scalar_curvature: f64,
    /// `(4n(n−1))^{n/2} ω_{n−1}`.
    pub c_n: f64,
    /// `∫₀^∞ r^{n−1}(1+r²)^{−n} dr`.
    pub i_n: f64,
    /// `∫|S|^{n/2} dv` evaluated in the unscaled chart variable.
    pub total: f64,
    /// Mass within geodesic distance `cap_radius` of the concentration pole.
    pub inside: f64,
    pub outside: f64,
    /// `(n(n−1))^{n/2} ωₙ` for comparison.
    pub round_value: f64,
}

impl BubbleConcentration {
    pub fn outside_fraction(&self) -> f64 {
        self.outside / self.total
    }
}

const QUAD_TOL: f64 = 1e-14;

fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    quadrature::integrate(f, a, b, QUAD_TOL).integral
}

/// `I_n = ∫₀^{π/2} sinⁿ⁻¹φ cosⁿ⁻¹φ dφ`, the `r = tan φ` form of the radial integral.
pub fn bubble_radial_integral(n: usize) -> f64 {
    let k = n as i32 - 1;
    integrate(|p| (p.sin() * p.cos()).powi(k), 0.0, PI / 2.0)
}

pub fn bubble_concentration(spec: &BubbleSpec, cap_radius: f64) -> Result<BubbleConcentration> {
    if !(cap_radius > 0.0 && cap_radius < PI) {
        return Err(Error::InvalidParameter(format!(
            "cap radius must lie in (0, π), got {cap_radius}"
        )));
    }
    let n = spec.n;
    let nf = n as f64;
    let e = spec.epsilon;
    let s_const = spec.scalar_curvature();
    let c_n = s_const.powf(nf / 2.0) * unit_sphere_volume(n - 1);
    // In the chart variable s = |x| = tan ψ the density is
    // c_n · (ε/(ε²+s²))ⁿ sⁿ⁻¹ ds, which becomes
    // c_n · (ε/(ε²cos²ψ + sin²ψ))ⁿ (sinψ cosψ)ⁿ⁻¹ dψ.
    let density = |psi: f64| {
        let (sn, cs) = psi.sin_cos();
        let ratio = e / (e * e * cs * cs + sn * sn);
        c_n * ratio.powi(n as i32) * (sn * cs).powi(n as i32 - 1)
    };
    let split = (cap_radius / 2.0).tan().atan();
    let inside = integrate(density, 0.0, split);
    let outside = integrate(density, split, PI / 2.0);
    Ok(BubbleConcentration {
        n,
        epsilon: e,
        cap_radius,
        scalar_curvature: s_const,
        c_n,
        i_n: bubble_radial_integral(n),
        total: inside + outside,
        inside,
        outside,
        round_value: round_lp_floor(n),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SobolevReport {
    pub a: f64,
    pub b: f64,
    pub sobolev_constant: f64,
    /// `min{4(n−1)/(n−2), n a²}`.
    pub min_term: f64,
    /// `C(n,a,b) = min_term / (C(n,a) n b²)`.
    pub constant: f64,
    /// `C(n,a,b)^{n/2}`, the constant the Hölder chain actually yields.
    pub effective_constant: f64,
    pub conformal_value: f64,
    pub background_value: f64,
    /// `conformal_value − effective_constant · background_value`.
    pub margin: f64,
    pub holds: bool,
    /// Same comparison with the unpowered constant.
    pub unpowered_margin: f64,
    /// `n a² > 4(n−1)/(n−2)`: the gradient coefficient is the minimum.
    pub gradient_term_dominates: bool,
    /// `a² ≤ Ric ≤ b²` on the background.
    pub ricci_pinching_holds: bool,
}

/// Both sides of `∫|S(g')|^{n/2} dv' ≥ C ∫|S(g)|^{n/2} dv` for the supplied
/// field, with the Sobolev constant `C(n, a)` injected by the caller.
pub fn sobolev_bound_report(
    u: &ConformalFactorField,
    a: f64,
    b: f64,
    sobolev_constant: f64,
) -> Result<SobolevReport> {
    let positive = |x: f64| x > 0.0 && !x.is_nan();
    if !(positive(a) && positive(b) && positive(sobolev_constant)) {
        return Err(Error::InvalidParameter(
            "a, b and the Sobolev constant must be positive".into(),
        ));
    }
    let n = u.dim();
    let nf = n as f64;
    let cn = conformal_constant(n);
    let min_term = cn.min(nf * a * a);
    let constant = min_term / (sobolev_constant * nf * b * b);
    let effective_constant = constant.powf(nf / 2.0);
    let conformal_value = lp_scalar_functional(u);
    let background = u.with_values(vec![1.0; u.len()])?;
    let background_value = lp_scalar_functional(&background);
    let ricci = u.background().ricci_eigenvalues();
    let margin = conformal_value - effective_constant * background_value;
    let tol = 1e-12 * conformal_value.max(background_value);
    Ok(SobolevReport {
        a,
        b,
        sobolev_constant,
        min_term,
        constant,
        effective_constant,
        conformal_value,
        background_value,
        margin,
        holds: margin >= -tol,
        unpowered_margin: conformal_value - constant * background_value,
        gradient_term_dominates: nf * a * a > cn,
        ricci_pinching_holds: ricci
            .iter()
            .all(|&r| r >= a * a * (1.0 - 1e-12) && r <= b * b * (1.0 + 1e-12)),
    })
}

/// One CSV row of a field: `node, u, S, weight`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FieldRow {
    pub node: f64,
    pub u: f64,
    #[serde(rename = "S")]
    pub s: f64,
    pub weight: f64,
}

pub fn field_rows(u: &ConformalFactorField) -> Vec<FieldRow> {
    let s = scalar_curvature(u);
    let w = u.weights();
    (0..u.len())
        .map(|i| FieldRow {
            node: u.nodes()[i],
            u: u.values()[i],
            s: s.values[i],
            weight: w[i],
        })
        .collect()
}
