//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Reference values are derived here by hand, not by the library.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use curvnorm::conformal::{
    bubble_concentration, bubble_pullback, bubble_radial_integral, scalar_curvature,
    yamabe_quotient, BubbleSpec, ConformalFactorField,
};
use curvnorm::curvature::{
    decompose, random_curvature, reconstruct_from_sectional, CurvatureTensor,
};
use curvnorm::experiment::{discrepancy_ledger, integrand_ratio_spread};
use curvnorm::flows::{
    residual_convergence, ricci_product_run, yamabe_flow_run, ProductFlowState, YamabeRunOptions,
};
use curvnorm::gauss_bonnet::{
    calibrate, closed_form_integrand, euler_characteristic, pfaffian_integrand,
};
use curvnorm::models::ModelGeometry;
use curvnorm::pinching::{
    critical_epsilon, pinching_form, violation_search, PinchingSample, SearchOptions,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<Vec<String>, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg)
    }
}

fn lib<T>(r: curvnorm::Result<T>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

/// Unit-sphere volumes written out by hand.
fn omega(n: usize) -> f64 {
    match n {
        3 => 2.0 * PI * PI,
        4 => 8.0 * PI * PI / 3.0,
        6 => 16.0 * PI.powi(3) / 15.0,
        _ => unreachable!(),
    }
}

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

fn sq(t: &CurvatureTensor) -> f64 {
    t.components().iter().map(|x| x * x).sum()
}

/// Ricci contraction and scalar curvature, straight from components.
fn contract(t: &CurvatureTensor) -> (Vec<f64>, f64) {
    let n = t.dim();
    let mut ric = vec![0.0; n * n];
    for j in 0..n {
        for l in 0..n {
            ric[j * n + l] = (0..n).map(|i| t.get(i, j, i, l)).sum();
        }
    }
    let s = (0..n).map(|i| ric[i * n + i]).sum();
    (ric, s)
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for n in [4usize, 6] {
        let nf = n as f64;
        for seed in 0..1000 {
            let r = lib(random_curvature(n, seed))?;
            let d = lib(decompose(&r))?;
            let (ric, s) = contract(&r);
            let ric2: f64 = ric.iter().map(|x| x * x).sum();
            let z2: f64 = (0..n)
                .flat_map(|i| (0..n).map(move |j| (i, j)))
                .map(|(i, j)| {
                    let z = ric[i * n + j] - if i == j { s / nf } else { 0.0 };
                    z * z
                })
                .sum();
            let (w, zz, u) = (sq(&d.weyl), sq(&d.z), sq(&d.u));
            worst = worst
                .max(rel(sq(&r), w + zz + u))
                .max(rel(u, 2.0 * s * s / (nf * (nf - 1.0))))
                .max(rel(zz, 4.0 * z2 / (nf - 2.0)))
                .max(rel(ric2, z2 + s * s / nf));
        }
    }
    let elapsed = start.elapsed();
    ensure(worst < 1e-10, format!("identity residual {worst:e}"))?;
    ensure(
        elapsed < Duration::from_secs(30),
        format!("runtime {elapsed:?}"),
    )?;
    Ok(vec![format!(
        "max relative residual {worst:.2e} over 2000 tensors in {:.2} s",
        elapsed.as_secs_f64()
    )])
}

fn criterion_2() -> Outcome {
    let mut worst = 0.0f64;
    for n in [4usize, 5, 6] {
        for seed in 0..100 {
            let r = lib(random_curvature(n, 10_000 + seed))?;
            let oracle = |u: &[f64], v: &[f64]| {
                let mut num = 0.0;
                for i in 0..n {
                    for j in 0..n {
                        for k in 0..n {
                            for l in 0..n {
                                num += r.get(i, j, k, l) * u[i] * v[j] * u[k] * v[l];
                            }
                        }
                    }
                }
                let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
                num / (dot(u, u) * dot(v, v) - dot(u, v).powi(2))
            };
            let rebuilt = lib(reconstruct_from_sectional(n, oracle))?;
            let scale = r.components().iter().fold(0.0f64, |a, x| a.max(x.abs()));
            let diff = rebuilt
                .components()
                .iter()
                .zip(r.components())
                .fold(0.0f64, |a, (x, y)| a.max((x - y).abs()));
            worst = worst.max(diff / scale);
        }
    }
    ensure(worst < 1e-10, format!("reconstruction residual {worst:e}"))?;
    Ok(vec![format!(
        "max relative residual {worst:.2e} over 300 tensors (n = 4, 5, 6)"
    )])
}

fn criterion_3() -> Outcome {
    let cal = lib(calibrate(4))?;
    let k4 = cal.k4.ok_or("no closed-form constant")?;
    let expect_k4 = 1.0 / (32.0 * PI * PI);
    ensure((k4 - expect_k4).abs() < 1e-9, format!("k4 = {k4}"))?;

    let v = 5.0 * PI * PI;
    let cases = [
        (ModelGeometry::RoundSphere { n: 4, radius: 1.0 }, 2.0),
        (
            ModelGeometry::FlatTorus {
                n: 4,
                periods: vec![],
            },
            0.0,
        ),
        (
            ModelGeometry::HyperbolicForm { n: 4, volume: v },
            3.0 * v / (4.0 * PI * PI),
        ),
    ];
    let mut worst = 0.0f64;
    for (g, expect) in &cases {
        let est = lib(euler_characteristic(g, &cal))?;
        let closed = est.closed_form.ok_or("missing closed-form route")?;
        worst = worst
            .max((est.permutation - expect).abs())
            .max((closed - expect).abs());
    }
    ensure(worst < 1e-9, format!("χ error {worst:e}"))?;

    let spread = lib(integrand_ratio_spread(100, 777))?;
    ensure(
        spread.relative_spread < 1e-8,
        format!("ratio spread {:e}", spread.relative_spread),
    )?;
    // Independent cross-check of the ratio: |R|² − 4|Ric|² + S² from components.
    let r = lib(random_curvature(4, 4242))?;
    let (ric, s) = contract(&r);
    let quad = sq(&r) - 4.0 * ric.iter().map(|x| x * x).sum::<f64>() + s * s;
    let pf = lib(pfaffian_integrand(&r))?;
    ensure(
        rel(pf, 4.0 * quad) < 1e-10,
        format!("pfaffian {pf} vs 4·quadratic {}", 4.0 * quad),
    )?;
    ensure(
        rel(lib(closed_form_integrand(&r))?, quad) < 1e-10,
        "closed form mismatch".into(),
    )?;

    let ledger = lib(discrepancy_ledger())?;
    let entry = ledger
        .iter()
        .find(|e| e.id == "gauss-bonnet-constant")
        .ok_or("constant deviation missing from the discrepancy ledger")?;
    let factor = entry.printed / entry.computed;
    ensure(
        (factor - 4.0).abs() < 1e-12,
        format!("ledger factor {factor}"),
    )?;
    Ok(vec![
        format!(
            "k4·32π² = {:.12}, max χ error {worst:.1e}",
            k4 * 32.0 * PI * PI
        ),
        format!(
            "integrand ratio {:.12} with spread {:.1e} over 100 tensors",
            spread.mean, spread.relative_spread
        ),
        format!("ledger: printed constant is {factor:.1}× the calibrated one"),
    ])
}

fn criterion_4() -> Outcome {
    let start = Instant::now();
    let opts = SearchOptions::default();
    let search = lib(violation_search(4, 0.25, 1_000_000, 2024, &opts))?;
    ensure(
        search.max_f < 0.0,
        format!("maxF = {} at ε = 0.25", search.max_f),
    )?;

    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let mut lambda: Vec<f64> = (0..4).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let mean = lambda.iter().sum::<f64>() / 4.0;
        lambda.iter_mut().for_each(|x| *x -= mean);
        let norm2: f64 = lambda.iter().map(|x| x * x).sum();
        let f = pinching_form(&lib(PinchingSample::uniform(-1.0, lambda))?);
        worst = worst.max((f + 4.0 * norm2).abs() / norm2.max(1.0));
    }
    ensure(
        worst < 1e-12,
        format!("ε = 0 closed form residual {worst:e}"),
    )?;

    let crit = lib(critical_epsilon(4, 100_000, 7, 0.01, &opts))?;
    ensure(crit.width <= 0.01, format!("bracket {}", crit.width))?;
    ensure(
        crit.safe >= 0.25,
        format!("critical ε {} below 1/4", crit.safe),
    )?;
    let elapsed = start.elapsed();
    ensure(
        elapsed < Duration::from_secs(120),
        format!("runtime {elapsed:?}"),
    )?;
    Ok(vec![
        format!(
            "maxF at ε = 0.25 over 10⁶ samples + ascent: {:.6}",
            search.max_f
        ),
        format!("ε = 0 closed form residual {worst:.1e}"),
        format!(
            "critical ε ∈ [{:.4}, {:.4}] (width {:.4}) in {:.1} s",
            crit.safe,
            crit.violated,
            crit.width,
            elapsed.as_secs_f64()
        ),
    ])
}

fn criterion_5() -> Outcome {
    let run = lib(ricci_product_run(
        lib(ProductFlowState::new(1.0, 2.0, 1.0, 1.0))?,
        20.0,
        0.01,
    ))?;
    let traj = &run.trajectory;
    // Once a = b to working precision, ∫S² = 16·V is flat and consecutive
    // values differ only in the last bits; increases up to 8 ulp are round-off.
    let largest_rise = traj
        .windows(2)
        .map(|w| (w[1].int_s2 - w[0].int_s2) / (f64::EPSILON * w[0].int_s2))
        .fold(f64::NEG_INFINITY, f64::max);
    let rises = traj
        .windows(2)
        .filter(|w| w[1].int_s2 > w[0].int_s2 * (1.0 + 8.0 * f64::EPSILON))
        .count();
    ensure(
        rises == 0,
        format!("∫S² rose beyond round-off on {rises} steps"),
    )?;
    let last = traj.last().ok_or("empty trajectory")?;
    let gap = (last.a - last.b).abs();
    ensure(gap < 1e-6, format!("|a − b| = {gap:e} at t = 20"))?;
    let drift = traj
        .iter()
        .map(|m| (m.a * m.b / 2.0 - 1.0).abs())
        .fold(0.0, f64::max);
    ensure(drift < 1e-8, format!("volume drift {drift:e}"))?;
    let ric_monotone = traj.windows(2).all(|w| w[1].int_ric2 <= w[0].int_ric2);
    Ok(vec![
        format!("{} steps, |a − b| = {gap:.1e}, volume drift {drift:.1e}", traj.len() - 1),
        format!("largest step-to-step change in ∫S²: {largest_rise:+.1} ulp"),
        format!(
            "∫|Ric|² recorded from {:.6} to {:.6} (non-increasing here: {ric_monotone}; not asserted)",
            traj[0].int_ric2, last.int_ric2
        ),
    ])
}

fn criterion_6() -> Outcome {
    let u = lib(ConformalFactorField::on_round_sphere(4, 129, |t| {
        1.0 + 0.1 * t.cos()
    }))?;
    let s0 = scalar_curvature(&u);
    ensure(s0.min() > 0.0, format!("initial min S = {}", s0.min()))?;
    let run = lib(yamabe_flow_run(u, 1.0, YamabeRunOptions::default()))?;
    let rep = &run.report;
    let floor = 384.0 * PI * PI;
    ensure(
        rep.max_relative_increase <= 1e-8,
        format!("per-step increase {:e}", rep.max_relative_increase),
    )?;
    ensure(!rep.positivity_lost, "positivity lost".into())?;
    ensure(
        rep.volume_drift_per_unit_time < 1e-4,
        format!("volume drift {:e}", rep.volume_drift_per_unit_time),
    )?;
    let terminal = rel(rep.terminal_lp, floor);
    ensure(terminal < 0.005, format!("terminal offset {terminal:e}"))?;
    let min_lp = run
        .history
        .iter()
        .map(|m| m.lp)
        .fold(f64::INFINITY, f64::min);
    ensure(
        min_lp >= floor * (1.0 - rep.grid_tolerance),
        format!("floor violated: {min_lp} < {floor}"),
    )?;
    let rows = lib(residual_convergence(4, &[33, 65, 129, 257], |t| {
        1.0 + 0.1 * t.cos()
    }))?;
    let worst = rows
        .iter()
        .filter_map(|r| r.reduction)
        .fold(f64::INFINITY, f64::min);
    ensure(worst >= 3.5, format!("residual reduction {worst}"))?;
    Ok(vec![
        format!(
            "{} steps: max per-step increase {:.1e}, volume drift {:.1e}",
            rep.steps, rep.max_relative_increase, rep.volume_drift_per_unit_time
        ),
        format!(
            "terminal ∫S² / 384π² − 1 = {:.2e}, floor margin {:.2e} (tolerance {:.1e})",
            rep.terminal_lp / floor - 1.0,
            min_lp / floor - 1.0,
            rep.grid_tolerance
        ),
        format!(
            "residual reductions {:?}",
            rows.iter()
                .filter_map(|r| r.reduction)
                .map(|x| (x * 100.0).round() / 100.0)
                .collect::<Vec<_>>()
        ),
    ])
}

fn criterion_7() -> Outcome {
    let i4 = bubble_radial_integral(4);
    ensure((i4 - 1.0 / 12.0).abs() < 1e-10, format!("I₄ = {i4}"))?;
    let conc = |e: f64| lib(BubbleSpec::new(4, e).and_then(|s| bubble_concentration(&s, 0.5)));
    let (a, b, c) = (conc(0.1)?, conc(0.01)?, conc(1e-3)?);
    let indep = rel(a.total, b.total).max(rel(a.total, c.total));
    ensure(indep < 1e-8, format!("ε-dependence {indep:e}"))?;
    // Closed form of the total: 48² · 2π² · (1/12) = 384π².
    ensure(
        rel(a.total, 384.0 * PI * PI) < 1e-8,
        format!("total {}", a.total),
    )?;
    ensure(
        c.outside_fraction() < 0.01,
        format!("outside fraction {}", c.outside_fraction()),
    )?;

    let spec = lib(BubbleSpec::new(4, 0.5))?;
    let u = lib(bubble_pullback(&spec, 512))?;
    let s = scalar_curvature(&u);
    let mean = s.values.iter().sum::<f64>() / s.values.len() as f64;
    let spread = s.spread() / mean;
    ensure(
        spread < u.grid_tolerance(),
        format!("relative spread {spread:e}"),
    )?;
    ensure(
        (mean - 48.0).abs() < (mean - 8.0).abs(),
        format!("mean S = {mean}"),
    )?;
    let ledger = lib(discrepancy_ledger())?;
    ensure(
        ledger
            .iter()
            .any(|e| e.id == "bubble-scalar-curvature" && (e.computed - 48.0).abs() < 0.5),
        "bubble verdict missing from the ledger".into(),
    )?;
    Ok(vec![
        format!("I₄ − 1/12 = {:.1e}, ε-independence {indep:.1e}", i4 - 1.0 / 12.0),
        format!("outside-cap fraction at ε = 10⁻³: {:.2e}", c.outside_fraction()),
        format!(
            "grid S = {mean:.6} (relative spread {spread:.1e} < {:.1e}): 4n(n−1) = 48, not n(n−2) = 8",
            u.grid_tolerance()
        ),
    ])
}

fn criterion_8() -> Outcome {
    let mut lines = vec![];
    for n in [3usize, 4, 6] {
        let nf = n as f64;
        let expect = nf * (nf - 1.0) * omega(n).powf(2.0 / nf);
        let u = lib(ConformalFactorField::on_round_sphere(n, 512, |_| 1.0))?;
        let q = yamabe_quotient(&u);
        ensure(
            rel(q, expect) < 1e-8,
            format!("n = {n}: Q = {q}, expected {expect}"),
        )?;
        let mut worst = 0.0f64;
        for e in [0.5, 2.0, 0.3] {
            let b = lib(BubbleSpec::new(n, e).and_then(|s| bubble_pullback(&s, 512)))?;
            let qb = yamabe_quotient(&b);
            ensure(
                rel(qb, expect) < b.grid_tolerance(),
                format!("n = {n}, ε = {e}: bubble Q = {qb}, expected {expect}"),
            )?;
            worst = worst.max(rel(qb, expect));
        }
        lines.push(format!(
            "n = {n}: Q(1) = {q:.10} (relative error {:.1e}), bubbles within {worst:.1e}",
            rel(q, expect)
        ));
    }
    Ok(lines)
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("norm identities on random tensors", criterion_1),
        ("polarization round trip", criterion_2),
        ("Gauss-Bonnet calibration", criterion_3),
        ("pinching form", criterion_4),
        ("Ricci product flow", criterion_5),
        ("Yamabe flow", criterion_6),
        ("bubble computations", criterion_7),
        ("Yamabe quotient", criterion_8),
    ];
    let mut failed = 0;
    for (i, (title, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = f();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(lines) => {
                println!("PASS criterion {}: {title} ({secs:.2} s)", i + 1);
                for l in lines {
                    println!("    {l}");
                }
            }
            Err(msg) => {
                failed += 1;
                println!("FAIL criterion {}: {title} ({secs:.2} s): {msg}", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
