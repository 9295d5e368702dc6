//! The pinching quadratic form
//! `F(σ, λ) = Σ_{i<j} σ_ij (n λ_i λ_j + |λ|²)`
//! over plane curvatures `σ_ij` confined to a box around −1 and trace-free
//! Ricci eigenvalues `λ`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum BoxSide {
    /// `σ ∈ [−1−ε, −1+ε]`.
    #[default]
    TwoSided,
    /// `σ ∈ [−1, −1+ε]`.
    OneSided,
}

impl BoxSide {
    pub fn bounds(self, epsilon: f64) -> (f64, f64) {
        match self {
            Self::TwoSided => (-1.0 - epsilon, -1.0 + epsilon),
            Self::OneSided => (-1.0, -1.0 + epsilon),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PinchingSample {
    pub n: usize,
    /// Row-major symmetric `n×n`; the diagonal is ignored.
    pub sigma: Vec<f64>,
    pub lambda: Vec<f64>,
}

impl PinchingSample {
    pub fn new(sigma: Vec<f64>, lambda: Vec<f64>) -> Result<Self> {
        let n = lambda.len();
        if n < 4 {
            return Err(Error::UnsupportedDimension {
                n,
                operation: "pinching form",
            });
        }
        if sigma.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                found: sigma.len(),
            });
        }
        for i in 0..n {
            for j in i + 1..n {
                if sigma[i * n + j] != sigma[j * n + i] {
                    return Err(Error::InvalidParameter("sigma must be symmetric".into()));
                }
            }
        }
        Ok(Self { n, sigma, lambda })
    }

    /// All plane curvatures equal to `value`.
    pub fn uniform(value: f64, lambda: Vec<f64>) -> Result<Self> {
        let n = lambda.len();
        Self::new(vec![value; n * n], lambda)
    }

    pub fn trace(&self) -> f64 {
        self.lambda.iter().sum()
    }

    pub fn in_box(&self, epsilon: f64, side: BoxSide) -> bool {
        let (lo, hi) = side.bounds(epsilon);
        let n = self.n;
        (0..n).all(|i| (i + 1..n).all(|j| (lo..=hi).contains(&self.sigma[i * n + j])))
    }
}

fn norm_sq(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum()
}

fn coefficient(n: usize, lambda: &[f64], l2: f64, i: usize, j: usize) -> f64 {
    n as f64 * lambda[i] * lambda[j] + l2
}

pub fn pinching_form(sample: &PinchingSample) -> f64 {
    let n = sample.n;
    let l = &sample.lambda;
    let l2 = norm_sq(l);
    let mut f = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            f += sample.sigma[i * n + j] * coefficient(n, l, l2, i, j);
        }
    }
    f
}

/// Closed form on the unpinched box `σ ≡ −1`:
/// `−(n/2)(Σλ)² − (n(n−2)/2)|λ|²`.
pub fn unpinched_form(lambda: &[f64]) -> f64 {
    let n = lambda.len() as f64;
    let t: f64 = lambda.iter().sum();
    -(n / 2.0) * t * t - n * (n - 2.0) / 2.0 * norm_sq(lambda)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchOptions {
    pub side: BoxSide,
    /// Restrict `λ` to `Σλ = 0`.
    pub trace_free: bool,
    /// Number of best samples refined by ascent.
    pub refine: usize,
    pub ascent_iterations: usize,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            side: BoxSide::TwoSided,
            trace_free: true,
            refine: 32,
            ascent_iterations: 200,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ViolationSearch {
    pub n: usize,
    pub epsilon: f64,
    pub trials: usize,
    pub side: BoxSide,
    pub trace_free: bool,
    #[serde(rename = "maxF")]
    pub max_f: f64,
    pub argmax: PinchingSample,
    pub safe: bool,
}

const CHUNK: usize = 4096;

fn project(lambda: &mut [f64], trace_free: bool) {
    if trace_free {
        let mean = lambda.iter().sum::<f64>() / lambda.len() as f64;
        lambda.iter_mut().for_each(|x| *x -= mean);
    }
    let norm = norm_sq(lambda).sqrt();
    if norm > 0.0 {
        lambda.iter_mut().for_each(|x| *x /= norm);
    }
}

/// Best box vertex for fixed `λ`: each `σ_ij` sits at the end of the box
/// matching the sign of its coefficient.
fn snap_sigma(n: usize, lambda: &[f64], lo: f64, hi: f64) -> Vec<f64> {
    let l2 = norm_sq(lambda);
    let mut sigma = vec![-1.0; n * n];
    for i in 0..n {
        for j in i + 1..n {
            let v = if coefficient(n, lambda, l2, i, j) > 0.0 {
                hi
            } else {
                lo
            };
            sigma[i * n + j] = v;
            sigma[j * n + i] = v;
        }
    }
    sigma
}

/// Alternates σ-vertex snapping with projected gradient steps in λ. For
/// fixed σ the form is `λᵀMλ`; the step `λ ← P(M + cI)λ / |·|` with a shift
/// `c` making `M + cI` positive is gradient ascent with step `1/(2c)`.
fn refine(start: &PinchingSample, epsilon: f64, opts: &SearchOptions) -> PinchingSample {
    let n = start.n;
    let (lo, hi) = opts.side.bounds(epsilon);
    let shift = (n * n) as f64 * (1.0 + epsilon);
    let mut lambda = start.lambda.clone();
    let mut best = start.clone();
    let mut best_f = pinching_form(start);
    for _ in 0..opts.ascent_iterations {
        let sigma = snap_sigma(n, &lambda, lo, hi);
        let total: f64 = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .map(|(i, j)| sigma[i * n + j])
            .sum();
        let mut next = vec![0.0; n];
        for i in 0..n {
            let mut acc = (total + shift) * lambda[i];
            for j in 0..n {
                if j != i {
                    acc += n as f64 / 2.0 * sigma[i * n + j] * lambda[j];
                }
            }
            next[i] = acc;
        }
        project(&mut next, opts.trace_free);
        let candidate = PinchingSample {
            n,
            sigma: snap_sigma(n, &next, lo, hi),
            lambda: next.clone(),
        };
        let f = pinching_form(&candidate);
        if f > best_f {
            best_f = f;
            best = candidate;
        }
        lambda = next;
    }
    best
}

fn random_sample(
    rng: &mut ChaCha8Rng,
    n: usize,
    lo: f64,
    hi: f64,
    trace_free: bool,
) -> PinchingSample {
    let mut sigma = vec![-1.0; n * n];
    for i in 0..n {
        for j in i + 1..n {
            let v = if hi > lo { rng.gen_range(lo..=hi) } else { lo };
            sigma[i * n + j] = v;
            sigma[j * n + i] = v;
        }
    }
    let mut lambda: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
    project(&mut lambda, trace_free);
    PinchingSample { n, sigma, lambda }
}

/// Uniform sampling of the box and the unit `λ`-sphere followed by ascent
/// from the best candidates. Deterministic for a fixed seed: chunk `k` draws
/// from ChaCha stream `k`.
pub fn violation_search(
    n: usize,
    epsilon: f64,
    trials: usize,
    seed: u64,
    opts: &SearchOptions,
) -> Result<ViolationSearch> {
    if n < 4 {
        return Err(Error::UnsupportedDimension {
            n,
            operation: "pinching search",
        });
    }
    if !(epsilon >= 0.0 && epsilon.is_finite()) || trials == 0 {
        return Err(Error::InvalidParameter(
            "epsilon must be non-negative and trials positive".into(),
        ));
    }
    let (lo, hi) = opts.side.bounds(epsilon);
    let keep = opts.refine.max(1);
    let chunks = trials.div_ceil(CHUNK);
    let mut pool: Vec<(f64, usize, PinchingSample)> = (0..chunks)
        .into_par_iter()
        .flat_map_iter(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c as u64);
            let count = CHUNK.min(trials - c * CHUNK);
            let mut local: Vec<(f64, usize, PinchingSample)> = (0..count)
                .map(|k| {
                    let s = random_sample(&mut rng, n, lo, hi, opts.trace_free);
                    (pinching_form(&s), c * CHUNK + k, s)
                })
                .collect();
            local.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
            local.truncate(keep);
            local
        })
        .collect();
    pool.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    pool.truncate(keep);
    let refined: Vec<(f64, usize, PinchingSample)> = pool
        .par_iter()
        .map(|(_, id, s)| {
            let r = refine(s, epsilon, opts);
            (pinching_form(&r), *id, r)
        })
        .collect();
    let (max_f, _, argmax) = pool
        .into_iter()
        .chain(refined)
        .max_by(|a, b| a.0.total_cmp(&b.0).then(b.1.cmp(&a.1)))
        .expect("at least one trial");
    Ok(ViolationSearch {
        n,
        epsilon,
        trials,
        side: opts.side,
        trace_free: opts.trace_free,
        max_f,
        argmax,
        safe: max_f < 0.0,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriticalEpsilon {
    pub n: usize,
    pub side: BoxSide,
    /// Largest probed ε found safe.
    pub safe: f64,
    /// Smallest probed ε found violated.
    pub violated: f64,
    pub estimate: f64,
    pub width: f64,
    pub probes: usize,
}

/// Bisection on ε between a safe and a violated probe.
pub fn critical_epsilon(
    n: usize,
    trials: usize,
    seed: u64,
    tol: f64,
    opts: &SearchOptions,
) -> Result<CriticalEpsilon> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter("tolerance must be positive".into()));
    }
    let probe = |eps: f64| violation_search(n, eps, trials, seed, opts).map(|r| r.safe);
    let mut probes = 1;
    if !probe(0.0)? {
        return Err(Error::Precondition(
            "the unpinched box already violates the inequality".into(),
        ));
    }
    let (mut lo, mut hi) = (0.0, 3.0);
    while probe(hi)? {
        probes += 1;
        lo = hi;
        hi *= 2.0;
        if hi > 1e6 {
            return Err(Error::Precondition("no violating epsilon found".into()));
        }
    }
    probes += 1;
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        probes += 1;
        if probe(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(CriticalEpsilon {
        n,
        side: opts.side,
        safe: lo,
        violated: hi,
        estimate: 0.5 * (lo + hi),
        width: hi - lo,
        probes,
    })
}
