//! Pointwise algebraic curvature tensors in an orthonormal frame.
//!
//! Components are stored densely as `R[i][j][k][l]` with the convention that
//! `R[i][j][i][j]` is the sectional curvature of the plane `e_i ∧ e_j`, so the
//! unit round sphere is `δ_ik δ_jl − δ_il δ_jk`. Ricci contracts the first and
//! third slots: `Ric[j][l] = Σ_i R[i][j][i][l]`.
//!
//! Norms are plain componentwise sums of squares over all `n⁴` entries.

use std::ops::{Add, Neg, Sub};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};

/// Algebraic curvature tensor of dimension `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureTensor {
    n: usize,
    data: Vec<f64>,
}

/// Largest absolute violation of each curvature-tensor symmetry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SymmetryResidual {
    pub antisymmetry: f64,
    pub pair_symmetry: f64,
    pub bianchi: f64,
}

impl SymmetryResidual {
    pub fn max(&self) -> f64 {
        self.antisymmetry.max(self.pair_symmetry).max(self.bianchi)
    }
}

impl CurvatureTensor {
    pub fn zeros(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidDimension(n));
        }
        Ok(Self {
            n,
            data: vec![0.0; n.pow(4)],
        })
    }

    /// Constant sectional curvature `k`: `k (δ_ik δ_jl − δ_il δ_jk)`.
    pub fn constant_curvature(n: usize, k: f64) -> Result<Self> {
        let mut t = Self::zeros(n)?;
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let a = t.idx(i, j, i, j);
                t.data[a] = k;
                let b = t.idx(i, j, j, i);
                t.data[b] = -k;
            }
        }
        Ok(t)
    }

    pub(crate) fn from_raw_unchecked(n: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), n.pow(4));
        Self { n, data }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn components(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    fn idx(&self, i: usize, j: usize, k: usize, l: usize) -> usize {
        ((i * self.n + j) * self.n + k) * self.n + l
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        self.data[self.idx(i, j, k, l)]
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            n: self.n,
            data: self.data.iter().map(|x| x * factor).collect(),
        }
    }

    pub fn symmetry_residual(&self) -> SymmetryResidual {
        let n = self.n;
        let mut res = SymmetryResidual {
            antisymmetry: 0.0,
            pair_symmetry: 0.0,
            bianchi: 0.0,
        };
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let r = self.get(i, j, k, l);
                        res.antisymmetry = res
                            .antisymmetry
                            .max((r + self.get(j, i, k, l)).abs())
                            .max((r + self.get(i, j, l, k)).abs());
                        res.pair_symmetry = res.pair_symmetry.max((r - self.get(k, l, i, j)).abs());
                        let cyc = r + self.get(i, k, l, j) + self.get(i, l, j, k);
                        res.bianchi = res.bianchi.max(cyc.abs());
                    }
                }
            }
        }
        res
    }

    /// `R(u, v, u, v)`, skipping zero vector entries.
    pub fn biquadratic(&self, u: &[f64], v: &[f64]) -> f64 {
        let n = self.n;
        let nu: Vec<usize> = (0..n).filter(|&i| u[i] != 0.0).collect();
        let nv: Vec<usize> = (0..n).filter(|&i| v[i] != 0.0).collect();
        let mut acc = 0.0;
        for &i in &nu {
            for &j in &nv {
                for &k in &nu {
                    for &l in &nv {
                        acc += self.get(i, j, k, l) * u[i] * v[j] * u[k] * v[l];
                    }
                }
            }
        }
        acc
    }

    fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        assert_eq!(self.n, other.n, "curvature tensors of different dimension");
        Self {
            n: self.n,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }
}

impl Add for &CurvatureTensor {
    type Output = CurvatureTensor;
    fn add(self, rhs: Self) -> CurvatureTensor {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl Sub for &CurvatureTensor {
    type Output = CurvatureTensor;
    fn sub(self, rhs: Self) -> CurvatureTensor {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl Neg for &CurvatureTensor {
    type Output = CurvatureTensor;
    fn neg(self) -> CurvatureTensor {
        self.scaled(-1.0)
    }
}

/// Projects an arbitrary `n⁴` array onto the space of algebraic curvature
/// tensors: antisymmetrize both index pairs, symmetrize under pair exchange,
/// then subtract one third of the cyclic sum.
pub fn project_symmetries(n: usize, raw: &[f64]) -> Result<CurvatureTensor> {
    if n < 2 {
        return Err(Error::InvalidDimension(n));
    }
    if raw.len() != n.pow(4) {
        return Err(Error::ShapeMismatch { n, len: raw.len() });
    }
    let src = CurvatureTensor::from_raw_unchecked(n, raw.to_vec());
    let mut a = CurvatureTensor::zeros(n)?;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let v = src.get(i, j, k, l) - src.get(j, i, k, l) - src.get(i, j, l, k)
                        + src.get(j, i, l, k);
                    let w = src.get(k, l, i, j) - src.get(l, k, i, j) - src.get(k, l, j, i)
                        + src.get(l, k, j, i);
                    let p = a.idx(i, j, k, l);
                    a.data[p] = (v + w) / 8.0;
                }
            }
        }
    }
    let mut out = CurvatureTensor::zeros(n)?;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let r = a.get(i, j, k, l);
                    let cyc = r + a.get(i, k, l, j) + a.get(i, l, j, k);
                    let p = out.idx(i, j, k, l);
                    out.data[p] = r - cyc / 3.0;
                }
            }
        }
    }
    Ok(out)
}

/// Symmetric 2-tensor in an orthonormal frame.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SymTensor2 {
    n: usize,
    data: Vec<f64>,
}

impl SymTensor2 {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let n = values.len();
        let mut t = Self::zeros(n);
        for (i, &v) in values.iter().enumerate() {
            t.data[i * n + i] = v;
        }
        t
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    pub fn norm_sq(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum()
    }

    /// Trace within `1e-12 · (|T| + 1)`.
    pub fn is_trace_free(&self) -> bool {
        self.trace().abs() <= 1e-12 * (self.norm_sq().sqrt() + 1.0)
    }

    pub fn trace_free_part(&self) -> Self {
        let shift = self.trace() / self.n as f64;
        let mut out = self.clone();
        for i in 0..self.n {
            out.data[i * self.n + i] -= shift;
        }
        out
    }
}

/// Ricci tensor `Ric[j][l] = Σ_i R[i][j][i][l]` and scalar curvature.
pub fn ricci_and_scalar(r: &CurvatureTensor) -> (SymTensor2, f64) {
    let n = r.dim();
    let mut ric = SymTensor2::zeros(n);
    for j in 0..n {
        for l in j..n {
            let v: f64 = (0..n).map(|i| r.get(i, j, i, l)).sum();
            ric.data[j * n + l] = v;
            ric.data[l * n + j] = v;
        }
    }
    let s = ric.trace();
    (ric, s)
}

/// `h_ik δ_jl + h_jl δ_ik − h_il δ_jk − h_jk δ_il`.
fn kulkarni_nomizu_identity(h: &SymTensor2) -> CurvatureTensor {
    let n = h.dim();
    let d = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
    let mut out = CurvatureTensor::from_raw_unchecked(n, vec![0.0; n.pow(4)]);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let v = h.get(i, k) * d(j, l) + h.get(j, l) * d(i, k)
                        - h.get(i, l) * d(j, k)
                        - h.get(j, k) * d(i, l);
                    let p = out.idx(i, j, k, l);
                    out.data[p] = v;
                }
            }
        }
    }
    out
}

/// Weyl, trace-free Ricci and scalar parts of a curvature tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    pub weyl: CurvatureTensor,
    pub z: CurvatureTensor,
    pub u: CurvatureTensor,
    pub scalar: f64,
    pub traceless_ricci: SymTensor2,
}

impl Decomposition {
    pub fn recombine(&self) -> CurvatureTensor {
        &(&self.weyl + &self.z) + &self.u
    }
}

/// Splits `R = W + Z + U` with `U = S/(n(n−1)) (δδ − δδ)` and
/// `Z = (1/(n−2)) z ⊙ δ` built from the trace-free Ricci tensor `z`.
pub fn decompose(r: &CurvatureTensor) -> Result<Decomposition> {
    let n = r.dim();
    if n < 4 {
        return Err(Error::UnsupportedDimension {
            n,
            operation: "Weyl decomposition",
        });
    }
    let (ric, s) = ricci_and_scalar(r);
    let z_tensor = ric.trace_free_part();
    let nf = n as f64;
    let u = CurvatureTensor::constant_curvature(n, s / (nf * (nf - 1.0)))?;
    let z = kulkarni_nomizu_identity(&z_tensor).scaled(1.0 / (nf - 2.0));
    let weyl = &(r - &z) - &u;
    Ok(Decomposition {
        weyl,
        z,
        u,
        scalar: s,
        traceless_ricci: z_tensor,
    })
}

pub fn tensor_norm_sq(t: &CurvatureTensor) -> f64 {
    t.components().iter().map(|x| x * x).sum()
}

fn relative_residual(lhs: f64, rhs: f64) -> f64 {
    let scale = lhs.abs().max(rhs.abs());
    if scale == 0.0 {
        0.0
    } else {
        (lhs - rhs).abs() / scale
    }
}

/// Relative residuals of the four norm identities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormIdentityReport {
    /// `|R|² = |W|² + |Z|² + |U|²`
    pub pythagoras: f64,
    /// `|U|² = 2S²/(n(n−1))`
    pub u_identity: f64,
    /// `|Z|² = 4|z|²/(n−2)`
    pub z_identity: f64,
    /// `|Ric|² = |z|² + S²/n`
    pub ricci_identity: f64,
}

impl NormIdentityReport {
    pub fn max(&self) -> f64 {
        self.pythagoras
            .max(self.u_identity)
            .max(self.z_identity)
            .max(self.ricci_identity)
    }
}

pub fn norm_identities_check(r: &CurvatureTensor) -> Result<NormIdentityReport> {
    let d = decompose(r)?;
    let n = r.dim() as f64;
    let (ric, s) = ricci_and_scalar(r);
    let r2 = tensor_norm_sq(r);
    let (w2, z2, u2) = (
        tensor_norm_sq(&d.weyl),
        tensor_norm_sq(&d.z),
        tensor_norm_sq(&d.u),
    );
    let small_z2 = d.traceless_ricci.norm_sq();
    let pythagoras = if r2 == 0.0 {
        0.0
    } else {
        (r2 - (w2 + z2 + u2)).abs() / r2
    };
    Ok(NormIdentityReport {
        pythagoras,
        u_identity: relative_residual(u2, 2.0 * s * s / (n * (n - 1.0))),
        z_identity: relative_residual(z2, 4.0 / (n - 2.0) * small_z2),
        ricci_identity: relative_residual(ric.norm_sq(), small_z2 + s * s / n),
    })
}

/// The two pointwise lower bounds on `|Ric|` by `|Z|` and `|U|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RicciBoundReport {
    pub ricci_norm: f64,
    /// `(n−2)/√(4(n−2)) · |Z|`
    pub z_bound: f64,
    /// `√((n−1)/2) · |U|`
    pub u_bound: f64,
    pub z_margin: f64,
    pub u_margin: f64,
}

impl RicciBoundReport {
    /// Both margins non-negative up to `rel_tol · |Ric|`.
    pub fn holds(&self, rel_tol: f64) -> bool {
        let slack = rel_tol * self.ricci_norm.max(f64::MIN_POSITIVE);
        self.z_margin >= -slack && self.u_margin >= -slack
    }
}

pub fn ricci_lower_bounds_check(r: &CurvatureTensor) -> Result<RicciBoundReport> {
    let d = decompose(r)?;
    let n = r.dim() as f64;
    let (ric, _) = ricci_and_scalar(r);
    let ricci_norm = ric.norm_sq().sqrt();
    let z_bound = (n - 2.0) / (4.0 * (n - 2.0)).sqrt() * tensor_norm_sq(&d.z).sqrt();
    let u_bound = ((n - 1.0) / 2.0).sqrt() * tensor_norm_sq(&d.u).sqrt();
    Ok(RicciBoundReport {
        ricci_norm,
        z_bound,
        u_bound,
        z_margin: ricci_norm - z_bound,
        u_margin: ricci_norm - u_bound,
    })
}

fn gram_area(u: &[f64], v: &[f64]) -> (f64, f64) {
    let uu: f64 = u.iter().map(|x| x * x).sum();
    let vv: f64 = v.iter().map(|x| x * x).sum();
    let uv: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
    (uu * vv - uv * uv, uu * vv)
}

fn is_degenerate(area: f64, scale: f64) -> bool {
    !(area > 1e-14 * scale)
}

/// Sectional curvature `R(u,v,u,v) / (|u|²|v|² − ⟨u,v⟩²)`.
pub fn sectional(r: &CurvatureTensor, u: &[f64], v: &[f64]) -> Result<f64> {
    let n = r.dim();
    if u.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: u.len(),
        });
    }
    if v.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: v.len(),
        });
    }
    let (area, scale) = gram_area(u, v);
    if is_degenerate(area, scale) {
        return Err(Error::DegeneratePlane);
    }
    Ok(r.biquadratic(u, v) / area)
}

/// Curvature of the coordinate plane `e_i ∧ e_j`.
pub fn sectional_basis(r: &CurvatureTensor, i: usize, j: usize) -> f64 {
    r.get(i, j, i, j)
}

/// Rebuilds the full tensor from a plane-curvature oracle.
///
/// With `K(x, y) = σ(x, y)(|x|²|y|² − ⟨x,y⟩²) = R(x,y,x,y)`,
/// `6 R(x,y,z,w) = ∂²/∂s∂t [K(x+sz, y+tw) − K(x+sw, y+tz)]` at `s = t = 0`.
/// `K` is quadratic in each slot, so the mixed derivative is exactly
/// `[f(1,1) − f(1,−1) − f(−1,1) + f(−1,−1)] / 4`. Degenerate planes
/// contribute zero and are never passed to the oracle.
pub fn reconstruct_from_sectional<F>(n: usize, mut oracle: F) -> Result<CurvatureTensor>
where
    F: FnMut(&[f64], &[f64]) -> f64,
{
    let mut out = CurvatureTensor::zeros(n)?;
    let mut k = |x: &[f64], y: &[f64]| -> Result<f64> {
        let (area, scale) = gram_area(x, y);
        if is_degenerate(area, scale) {
            return Ok(0.0);
        }
        let s = oracle(x, y);
        if !s.is_finite() {
            return Err(Error::NonFiniteOracle);
        }
        Ok(s * area)
    };
    let basis = |i: usize| {
        let mut e = vec![0.0; n];
        e[i] = 1.0;
        e
    };
    let comb = |a: &[f64], b: &[f64], sign: f64| -> Vec<f64> {
        a.iter().zip(b).map(|(p, q)| p + sign * q).collect()
    };
    for i in 0..n {
        for j in 0..n {
            for kk in 0..n {
                for l in 0..n {
                    let (x, y, z, w) = (basis(i), basis(j), basis(kk), basis(l));
                    let mut mixed = |p: &[f64], q: &[f64]| -> Result<f64> {
                        let (xp, xm) = (comb(&x, p, 1.0), comb(&x, p, -1.0));
                        let (yp, ym) = (comb(&y, q, 1.0), comb(&y, q, -1.0));
                        Ok((k(&xp, &yp)? - k(&xp, &ym)? - k(&xm, &yp)? + k(&xm, &ym)?) / 4.0)
                    };
                    let v = (mixed(&z, &w)? - mixed(&w, &z)?) / 6.0;
                    let p = out.idx(i, j, kk, l);
                    out.data[p] = v;
                }
            }
        }
    }
    Ok(out)
}

/// Deterministic random curvature tensor: a uniform `[-1, 1)` array projected
/// onto the symmetry space.
pub fn random_curvature(n: usize, seed: u64) -> Result<CurvatureTensor> {
    if n < 2 {
        return Err(Error::InvalidDimension(n));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let raw: Vec<f64> = (0..n.pow(4)).map(|_| rng.gen_range(-1.0..1.0)).collect();
    project_symmetries(n, &raw)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn projection_rejects_small_dimension() {
        assert_eq!(
            project_symmetries(1, &[0.0]),
            Err(Error::InvalidDimension(1))
        );
        assert!(matches!(
            project_symmetries(3, &[0.0; 10]),
            Err(Error::ShapeMismatch { .. })
        ));
    }

    #[test]
    fn projection_fixes_zero_and_constant_curvature() {
        let zero = project_symmetries(4, &vec![0.0; 256]).unwrap();
        assert!(zero.components().iter().all(|&x| x == 0.0));
        let round = CurvatureTensor::constant_curvature(4, 1.0).unwrap();
        let p = project_symmetries(4, round.components()).unwrap();
        assert_eq!(p, round);
    }

    #[test]
    fn projection_is_idempotent() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let raw: Vec<f64> = (0..256).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let once = project_symmetries(4, &raw).unwrap();
        assert!(once.symmetry_residual().max() < 1e-15);
        let twice = project_symmetries(4, once.components()).unwrap();
        let diff = (&twice - &once)
            .components()
            .iter()
            .fold(0.0f64, |m, x| m.max(x.abs()));
        assert!(diff < 1e-14);
    }

    #[test]
    fn round_and_hyperbolic_contractions() {
        let round = CurvatureTensor::constant_curvature(4, 1.0).unwrap();
        let (ric, s) = ricci_and_scalar(&round);
        assert_eq!(s, 12.0);
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(ric.get(i, j), if i == j { 3.0 } else { 0.0 });
            }
        }
        let hyp = CurvatureTensor::constant_curvature(4, -1.0).unwrap();
        assert_eq!(ricci_and_scalar(&hyp).1, -12.0);
        let zero = CurvatureTensor::zeros(4).unwrap();
        let (ric0, s0) = ricci_and_scalar(&zero);
        assert_eq!((ric0.norm_sq(), s0), (0.0, 0.0));
    }

    #[test]
    fn decompose_needs_dimension_four() {
        let t = CurvatureTensor::constant_curvature(3, 1.0).unwrap();
        assert!(matches!(
            decompose(&t),
            Err(Error::UnsupportedDimension { n: 3, .. })
        ));
    }

    #[test]
    fn round_sphere_is_pure_scalar_part() {
        let round = CurvatureTensor::constant_curvature(4, 1.0).unwrap();
        let d = decompose(&round).unwrap();
        assert!(tensor_norm_sq(&d.weyl) < 1e-28);
        assert!(tensor_norm_sq(&d.z) < 1e-28);
        assert_eq!(d.u, round);
        assert_relative_eq!(tensor_norm_sq(&d.u), 24.0, max_relative = 1e-12);
    }

    #[test]
    fn einstein_tensor_has_no_z_part() {
        // Weyl-type perturbation: traceless part of a random tensor added to the round one.
        let r = random_curvature(4, 5).unwrap();
        let w = decompose(&r).unwrap().weyl;
        let einstein = &CurvatureTensor::constant_curvature(4, 1.0).unwrap() + &w;
        let d = decompose(&einstein).unwrap();
        assert!(tensor_norm_sq(&d.z) < 1e-26);
        let (ric, _) = ricci_and_scalar(&einstein);
        assert_relative_eq!(ric.get(0, 0), 3.0, max_relative = 1e-12);
    }

    #[test]
    fn weyl_part_is_traceless() {
        for seed in 0..5 {
            let r = random_curvature(5, seed).unwrap();
            let d = decompose(&r).unwrap();
            let (ric_w, s_w) = ricci_and_scalar(&d.weyl);
            assert!(ric_w.norm_sq().sqrt() < 1e-12);
            assert!(s_w.abs() < 1e-12);
            assert!(d.traceless_ricci.is_trace_free());
        }
    }

    #[test]
    fn round_sphere_ricci_bound_is_sharp() {
        let round = CurvatureTensor::constant_curvature(4, 1.0).unwrap();
        let rep = ricci_lower_bounds_check(&round).unwrap();
        assert_relative_eq!(rep.ricci_norm, 6.0, max_relative = 1e-12);
        assert_relative_eq!(rep.u_bound, 6.0, max_relative = 1e-12);
        assert!(rep.holds(1e-12));
    }

    #[test]
    fn pure_weyl_bounds_are_trivial() {
        let r = random_curvature(4, 9).unwrap();
        let w = decompose(&r).unwrap().weyl;
        let rep = ricci_lower_bounds_check(&w).unwrap();
        assert!(rep.ricci_norm < 1e-12 && rep.z_bound < 1e-12 && rep.u_bound < 1e-12);
    }

    #[test]
    fn sectional_values() {
        let round = CurvatureTensor::constant_curvature(4, 1.0).unwrap();
        let s = sectional(&round, &[1.0, 2.0, 0.0, -1.0], &[0.5, 0.0, 3.0, 1.0]).unwrap();
        assert_relative_eq!(s, 1.0, max_relative = 1e-14);
        let hyp = CurvatureTensor::constant_curvature(4, -1.0).unwrap();
        assert_eq!(sectional_basis(&hyp, 0, 1), -1.0);
        assert_eq!(
            sectional(&round, &[1.0, 0.0, 0.0, 0.0], &[2.0, 0.0, 0.0, 0.0]),
            Err(Error::DegeneratePlane)
        );
        assert!(matches!(
            sectional(&round, &[1.0, 0.0], &[0.0, 1.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn sectional_is_scale_invariant() {
        let r = random_curvature(4, 3).unwrap();
        let u = [0.3, -1.0, 0.2, 0.7];
        let v = [1.1, 0.4, -0.5, 0.0];
        let s1 = sectional(&r, &u, &v).unwrap();
        let u2: Vec<f64> = u.iter().map(|x| 2.0 * x).collect();
        let v3: Vec<f64> = v.iter().map(|x| 3.0 * x).collect();
        let s2 = sectional(&r, &u2, &v3).unwrap();
        assert!((s1 - s2).abs() <= 1e-12 * s1.abs().max(1.0));
    }

    #[test]
    fn reconstruct_constant_oracles() {
        let round = reconstruct_from_sectional(4, |_, _| 1.0).unwrap();
        let want = CurvatureTensor::constant_curvature(4, 1.0).unwrap();
        assert!((&round - &want)
            .components()
            .iter()
            .all(|x| x.abs() < 1e-14));
        let hyp = reconstruct_from_sectional(4, |_, _| -1.0).unwrap();
        let want = CurvatureTensor::constant_curvature(4, -1.0).unwrap();
        assert!((&hyp - &want).components().iter().all(|x| x.abs() < 1e-14));
    }

    #[test]
    fn reconstruct_propagates_non_finite() {
        let err = reconstruct_from_sectional(4, |_, _| f64::NAN).unwrap_err();
        assert_eq!(err, Error::NonFiniteOracle);
    }

    #[test]
    fn random_curvature_is_deterministic() {
        let a = random_curvature(4, 1).unwrap();
        let b = random_curvature(4, 1).unwrap();
        let c = random_curvature(4, 2).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(random_curvature(6, 77).unwrap().symmetry_residual().max() < 1e-14);
        assert_eq!(random_curvature(1, 0), Err(Error::InvalidDimension(1)));
    }
}
