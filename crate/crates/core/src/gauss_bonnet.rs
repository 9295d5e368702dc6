//! Gauss-Bonnet integrands and their self-calibrated constants.
//!
//! The permutation route evaluates the Pfaffian double sum
//! `Σ_{σ,τ} ε(σ)ε(τ) Π_k R[σ(2k−1)][σ(2k)][τ(2k−1)][τ(2k)]`. In four
//! dimensions the closed-form route uses `|U|² − |Z|² + |W|²`. Constants are
//! never taken from tables: `c_n` and `k₄` are fixed by requiring `χ(Sⁿ) = 2`
//! on the unit round sphere.

use std::f64::consts::PI;

use serde::Serialize;

use crate::curvature::{decompose, tensor_norm_sq, CurvatureTensor};
use crate::error::{Error, Result};
use crate::models::{unit_sphere_volume, ModelGeometry};

const SUPPORTED: [usize; 3] = [2, 4, 6];

fn check_dimension(n: usize, operation: &'static str) -> Result<()> {
    if SUPPORTED.contains(&n) {
        Ok(())
    } else {
        Err(Error::UnsupportedDimension { n, operation })
    }
}

/// All permutations of `0..n` in lexicographic order, each with its sign.
pub fn signed_permutations(n: usize) -> Vec<(Vec<usize>, f64)> {
    let mut perm: Vec<usize> = (0..n).collect();
    let mut sign = 1.0;
    let mut out = vec![(perm.clone(), sign)];
    while let Some(i) = (0..n.saturating_sub(1))
        .rev()
        .find(|&i| perm[i] < perm[i + 1])
    {
        let j = (i + 1..n).rev().find(|&j| perm[j] > perm[i]).unwrap();
        perm.swap(i, j);
        sign = -sign;
        let tail = n - (i + 1);
        perm[i + 1..].reverse();
        if (tail / 2) % 2 == 1 {
            sign = -sign;
        }
        out.push((perm.clone(), sign));
    }
    out
}

/// Pfaffian-type permutation double sum. Cost `(n!)²`; `n ∈ {2, 4, 6}`.
pub fn pfaffian_integrand(r: &CurvatureTensor) -> Result<f64> {
    let n = r.dim();
    check_dimension(n, "permutation Gauss-Bonnet sum")?;
    let perms = signed_permutations(n);
    let mut total = 0.0;
    for (sigma, s_sign) in &perms {
        let mut inner = 0.0;
        for (tau, t_sign) in &perms {
            let mut prod = *t_sign;
            for k in (0..n).step_by(2) {
                prod *= r.get(sigma[k], sigma[k + 1], tau[k], tau[k + 1]);
                if prod == 0.0 {
                    break;
                }
            }
            inner += prod;
        }
        total += s_sign * inner;
    }
    Ok(total)
}

/// `|U|² − |Z|² + |W|²`, the four-dimensional closed-form integrand.
pub fn closed_form_integrand(r: &CurvatureTensor) -> Result<f64> {
    if r.dim() != 4 {
        return Err(Error::UnsupportedDimension {
            n: r.dim(),
            operation: "closed-form Gauss-Bonnet integrand",
        });
    }
    let d = decompose(r)?;
    Ok(tensor_norm_sq(&d.u) - tensor_norm_sq(&d.z) + tensor_norm_sq(&d.weyl))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GBCalibration {
    pub n: usize,
    /// `χ = c_n⁻¹ ∫ (permutation sum) dv`.
    pub c_n: f64,
    /// `χ = k₄ ∫ (|U|² − |Z|² + |W|²) dv`; only for `n = 4`.
    pub k4: Option<f64>,
}

pub fn calibrate(n: usize) -> Result<GBCalibration> {
    check_dimension(n, "Gauss-Bonnet calibration")?;
    let round = CurvatureTensor::constant_curvature(n, 1.0)?;
    let vol = unit_sphere_volume(n);
    let c_n = pfaffian_integrand(&round)? * vol / 2.0;
    let k4 = if n == 4 {
        Some(2.0 / (closed_form_integrand(&round)? * vol))
    } else {
        None
    };
    Ok(GBCalibration { n, c_n, k4 })
}

/// Both routes to `χ` on a homogeneous model.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EulerEstimate {
    pub n: usize,
    pub permutation: f64,
    pub closed_form: Option<f64>,
    /// `|permutation − closed_form|`, zero when only one route exists.
    pub residual: f64,
}

impl EulerEstimate {
    pub fn value(&self) -> f64 {
        self.permutation
    }
}

pub fn euler_characteristic(geom: &ModelGeometry, cal: &GBCalibration) -> Result<EulerEstimate> {
    geom.validate()?;
    if geom.dim() != cal.n {
        return Err(Error::DimensionMismatch {
            expected: cal.n,
            found: geom.dim(),
        });
    }
    if !geom.is_homogeneous() {
        return Err(Error::InvalidGeometry(
            "Gauss-Bonnet needs a homogeneous model".into(),
        ));
    }
    let r = geom.curvature_tensor()?;
    let vol = geom.volume();
    let permutation = pfaffian_integrand(&r)? * vol / cal.c_n;
    let closed_form = match cal.k4 {
        Some(k4) => Some(k4 * closed_form_integrand(&r)? * vol),
        None => None,
    };
    let residual = closed_form.map_or(0.0, |c| (c - permutation).abs());
    Ok(EulerEstimate {
        n: cal.n,
        permutation,
        closed_form,
        residual,
    })
}

/// One JSON report line: `{route, n, integrand, chi_estimate, residual}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GBRecord {
    pub geometry: String,
    pub route: &'static str,
    pub n: usize,
    pub integrand: f64,
    pub chi_estimate: f64,
    pub residual: f64,
}

pub fn gb_records(label: &str, geom: &ModelGeometry, cal: &GBCalibration) -> Result<Vec<GBRecord>> {
    let est = euler_characteristic(geom, cal)?;
    let r = geom.curvature_tensor()?;
    let mut out = vec![GBRecord {
        geometry: label.to_string(),
        route: "permutation",
        n: cal.n,
        integrand: pfaffian_integrand(&r)?,
        chi_estimate: est.permutation,
        residual: est.residual,
    }];
    if let Some(c) = est.closed_form {
        out.push(GBRecord {
            geometry: label.to_string(),
            route: "closed_form",
            n: cal.n,
            integrand: closed_form_integrand(&r)?,
            chi_estimate: c,
            residual: est.residual,
        });
    }
    Ok(out)
}

/// Integrals entering the four-dimensional Hölder cascade.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvatureIntegrals {
    pub u2: f64,
    pub z2: f64,
    pub w2: f64,
    pub s2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CascadeReport {
    pub chi: f64,
    /// `δ₄`: a-priori threshold on `∫|Z|²`.
    pub delta: f64,
    /// `ε₄`: a-priori threshold on `∫|W|²`.
    pub epsilon: f64,
    pub vacuous: bool,
    pub non_integer_chi: bool,
    pub hypotheses_hold: bool,
    /// Certified `∫S² ≥ 96π²(2|χ| − 1)`, when not vacuous.
    pub certified_lower_bound: Option<f64>,
    pub actual_s2: f64,
    pub bound_satisfied: Option<bool>,
    /// `|∫|U|² − ∫S²/6|`, consistency of the supplied data.
    pub u_s_consistency: f64,
}

/// Four-dimensional Hölder cascade.
///
/// From `|χ| ≤ k₄(∫|U|² + ∫|Z|² + ∫|W|²)` with the thresholds chosen so that
/// `k₄(δ₄ + ε₄) = 1/2`, smallness of `∫|Z|²` and `∫|W|²` forces
/// `∫|U|² ≥ (|χ| − 1/2)/k₄`, and `|U|² = S²/6` turns this into a bound on `∫S²`.
pub fn holder_cascade_check(n: usize, ints: CurvatureIntegrals, chi: f64) -> Result<CascadeReport> {
    if n != 4 {
        return Err(Error::UnsupportedDimension {
            n,
            operation: "Hölder cascade",
        });
    }
    if [ints.u2, ints.z2, ints.w2, ints.s2]
        .iter()
        .any(|&x| !(x >= 0.0))
    {
        return Err(Error::InvalidParameter(
            "curvature integrals must be non-negative".into(),
        ));
    }
    let k4 = calibrate(4)?.k4.expect("n = 4 has a closed-form constant");
    let threshold = 1.0 / (4.0 * k4);
    let vacuous = chi == 0.0;
    let hypotheses_hold = ints.z2 <= threshold && ints.w2 <= threshold;
    let certified = (!vacuous).then(|| 6.0 * (chi.abs() - 0.5) / k4);
    Ok(CascadeReport {
        chi,
        delta: threshold,
        epsilon: threshold,
        vacuous,
        non_integer_chi: chi.fract() != 0.0,
        hypotheses_hold,
        certified_lower_bound: certified,
        actual_s2: ints.s2,
        bound_satisfied: certified.map(|c| !hypotheses_hold || ints.s2 >= c * (1.0 - 1e-12)),
        u_s_consistency: (ints.u2 - ints.s2 / 6.0).abs(),
    })
}

/// Homogeneous-model integrals: pointwise norms times volume.
pub fn model_integrals(geom: &ModelGeometry) -> Result<CurvatureIntegrals> {
    let r = geom.curvature_tensor()?;
    let d = decompose(&r)?;
    let vol = geom.volume();
    Ok(CurvatureIntegrals {
        u2: tensor_norm_sq(&d.u) * vol,
        z2: tensor_norm_sq(&d.z) * vol,
        w2: tensor_norm_sq(&d.weyl) * vol,
        s2: d.scalar * d.scalar * vol,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VolumeBound {
    pub bound: f64,
    pub hypothesis_violated: bool,
}

/// Volume lower bound for a four-dimensional Einstein metric with
/// `Ric = ±3g`: `Vol ≥ (|χ|/k₄ − ∫|W|²)/24`, since `|U|² = 24` pointwise.
pub fn einstein_volume_bound(n: usize, w2: f64, chi: f64) -> Result<VolumeBound> {
    if n != 4 {
        return Err(Error::UnsupportedDimension {
            n,
            operation: "Einstein volume bound",
        });
    }
    if chi == 0.0 {
        return Err(Error::VacuousEuler);
    }
    let k4 = 1.0 / (32.0 * PI * PI);
    debug_assert!((calibrate(4)?.k4.unwrap() - k4).abs() < 1e-12 * k4);
    let bound = (chi.abs() / k4 - w2) / 24.0;
    Ok(VolumeBound {
        bound,
        hypothesis_violated: bound < 0.0,
    })
}
