//! Acceptance checks, one test each. Every test prints a single
//! `PASS`/`FAIL` line on stderr (bypassing output capture) before asserting.

use std::io::Write;
use std::time::Instant;

use dirac_amalgam::amalgam::{
    amalgam_norm, holder_duality_check, lorentz_weak_norm, sequence_lp_norm, AmalgamSpec, MixedNormSpec,
    Window,
};
use dirac_amalgam::config::RunConfig;
use dirac_amalgam::experiments::{
    check_classical_admissible, check_decay_exponents, check_theorem1_admissible, decay_experiment,
    envelope_samples, gaussian_packet, random_polarization, strichartz_sweep, sweep_family,
    windowed_time_experiment, DecayRegime, DecaySettings, ExponentTuple, SweepSettings,
    WindowedTimeSettings,
};
use dirac_amalgam::fourier::{pde_residual, propagate_dirac, GridSpec, SpinorField, COMPONENTS};
use dirac_amalgam::kernel::{bump_rho, check_pointwise_envelope, kernel_value, EnvelopeRegime};
use dirac_amalgam::quadrature::gauss_legendre_panels;
use dirac_amalgam::spinor::{dirac_basis, projection, symbol, FrequencyVector, Matrix4, Sign};
use dirac_amalgam::stats::log_space;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn verdict(name: &str, passed: bool, detail: &str) -> bool {
    let line = format!(
        "[acceptance] {} {name}: {detail}\n",
        if passed { "PASS" } else { "FAIL" }
    );
    let _ = std::io::stderr().write_all(line.as_bytes());
    passed
}

fn random_xi(rng: &mut ChaCha8Rng) -> FrequencyVector {
    // Magnitudes over several decades, directions uniform in the cube.
    let scale = 10f64.powf(rng.gen_range(-3.0..2.0));
    FrequencyVector::new(std::array::from_fn(|_| scale * rng.gen_range(-1.0..1.0)))
}

#[test]
fn dirac_algebra_identities() {
    let start = Instant::now();
    let b = dirac_basis();
    let id = Matrix4::identity();
    let mut worst: f64 = 0.0;
    let mut err = |m: Matrix4| worst = worst.max(m.max_abs());
    err(b.beta * b.beta - id);
    for j in 0..3 {
        err(b.alpha[j] * b.beta + b.beta * b.alpha[j]);
        for k in 0..3 {
            let expected = if j == k { id.scale_re(2.0) } else { Matrix4::zero() };
            err(b.alpha[j] * b.alpha[k] + b.alpha[k] * b.alpha[j] - expected);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..1000 {
        let xi = random_xi(&mut rng);
        let p = projection(&xi, Sign::Plus);
        let m = projection(&xi, Sign::Minus);
        err(p * p - p);
        err(m * m - m);
        err(p * m);
        err(m * p);
        err(p + m - id);
        err(symbol(&xi) - (p - m).scale_re(xi.bracket()));
    }
    let elapsed = start.elapsed().as_secs_f64();
    let passed = worst <= 1e-12 && elapsed < 1.0;
    let ok = verdict(
        "algebraic identities",
        passed,
        &format!("max entry error {worst:.2e} (<= 1e-12), {elapsed:.3} s (< 1 s)"),
    );
    assert!(ok);
}

fn single_mode(grid: GridSpec, idx: usize, sign: Sign) -> (SpinorField, f64) {
    let xi0 = grid.frequency(idx);
    let e = [Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8), Complex64::new(0.0, 0.0), Complex64::new(0.3, -0.1)];
    let v = projection(&xi0, sign).mul_vec(&e);
    let f = SpinorField::from_frequency_fn(grid, |xi| {
        if *xi == xi0 {
            v
        } else {
            [Complex64::new(0.0, 0.0); COMPONENTS]
        }
    });
    (f, xi0.bracket())
}

#[test]
fn propagator_suite() {
    let start = Instant::now();
    let grid = GridSpec::new(32, 16.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let f = gaussian_packet(grid, 1.0, [0.5, -1.0, 0.25], [0.8, 0.0, -0.4], random_polarization(&mut rng));
    let n0 = f.l2_norm();
    let mut unitarity: f64 = 0.0;
    let mut group: f64 = 0.0;
    for (s, t) in [(0.7, 3.1), (-2.4, 1.3), (5.0, -5.5)] {
        let us = propagate_dirac(&f, s);
        unitarity = unitarity.max((us.to_position().l2_norm() - n0).abs() / n0);
        let composed = propagate_dirac(&us, t);
        let direct = propagate_dirac(&f, s + t);
        group = group.max(composed.relative_distance(&direct).unwrap());
    }
    let identity = propagate_dirac(&f, 0.0).relative_distance(&f).unwrap();

    let mut phase: f64 = 0.0;
    for (idx, sign) in [(grid.index(3, 1, 30), Sign::Plus), (grid.index(0, 5, 2), Sign::Minus)] {
        let (m, bracket) = single_mode(grid, idx, sign);
        for t in [0.3, 2.0, -7.5] {
            let expected = m.scale(Complex64::from_polar(1.0, -sign.as_f64() * t * bracket));
            phase = phase.max(propagate_dirac(&m, t).relative_distance(&expected).unwrap());
        }
    }

    let r1 = pde_residual(&f, 0.5, 1e-3).unwrap();
    let r2 = pde_residual(&f, 0.5, 5e-4).unwrap();
    let order = r1 / r2;
    let elapsed = start.elapsed().as_secs_f64();
    let passed = unitarity <= 1e-10
        && group <= 1e-10
        && identity == 0.0
        && phase <= 1e-10
        && r1 <= 1e-4
        && (3.5..=4.5).contains(&order)
        && elapsed < 30.0;
    let ok = verdict(
        "propagator suite",
        passed,
        &format!(
            "unitarity {unitarity:.1e}, group {group:.1e}, t=0 {identity:.1e}, phase {phase:.1e}, \
             residual {r1:.2e} at dt=1e-3, halving ratio {order:.3}, {elapsed:.1} s"
        ),
    );
    assert!(ok);
}

/// Direct evaluation of `(2π)^{-3} ∫ e^{i(x·ξ+t⟨ξ⟩)} ⟨ξ⟩^{-γ} dξ`: the part
/// cut off smoothly at `|ξ| ~ 8..16` as a 3-D lattice sum, the remainder as a
/// 1-D radial integral.
struct LatticeKernel {
    points: Vec<([f64; 3], f64, f64)>,
    h: f64,
}

const ORACLE_CUT: f64 = 8.0;

impl LatticeKernel {
    fn new(h: f64) -> Self {
        let m = (2.0 * ORACLE_CUT / h).ceil() as i64;
        let mut points = Vec::new();
        for i in -m..=m {
            for j in -m..=m {
                for k in -m..=m {
                    let xi = [i as f64 * h, j as f64 * h, k as f64 * h];
                    let r = (xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]).sqrt();
                    let c = bump_rho(r / ORACLE_CUT);
                    if c > 0.0 {
                        points.push((xi, (1.0 + r * r).sqrt(), c));
                    }
                }
            }
        }
        LatticeKernel { points, h }
    }

    fn eval(&self, x_norm: f64, t: f64, gamma: f64) -> Complex64 {
        let dir = [0.48, 0.6, 0.64];
        let x = dir.map(|d| d * x_norm);
        let mut sum = Complex64::new(0.0, 0.0);
        for (xi, br, c) in &self.points {
            let phase = x[0] * xi[0] + x[1] * xi[1] + x[2] * xi[2] + t * br;
            sum += Complex64::from_polar(c * br.powf(-gamma), phase);
        }
        let low = sum * self.h.powi(3) / (2.0 * std::f64::consts::PI).powi(3);
        low + Self::tail(x_norm, t, gamma)
    }

    /// `(2π² r)^{-1} ∫ (1 − c(ρ)) ρ sin(rρ) ⟨ρ⟩^{-γ} e^{it⟨ρ⟩} dρ` up to 10⁴.
    fn tail(r: f64, t: f64, gamma: f64) -> Complex64 {
        let upper = 1e4;
        let panels = ((upper - ORACLE_CUT) / 0.25) as usize;
        let sum: Complex64 = gauss_legendre_panels(ORACLE_CUT, upper, panels)
            .into_iter()
            .map(|(rho, w)| {
                let br = (1.0 + rho * rho).sqrt();
                let a = (1.0 - bump_rho(rho / ORACLE_CUT)) * rho * (r * rho).sin() * br.powf(-gamma);
                Complex64::from_polar(w * a, t * br)
            })
            .sum();
        sum / (2.0 * std::f64::consts::PI.powi(2) * r)
    }
}

#[test]
fn kernel_matches_lattice_oracle() {
    let start = Instant::now();
    let oracle = LatticeKernel::new(0.25);
    let cases: [(f64, f64, f64); 20] = [
        (0.5, 0.0, 2.5),
        (1.0, 0.3, 2.5),
        (2.0, 0.5, 2.5),
        (0.7, 1.5, 2.5),
        (3.5, 1.0, 2.5),
        (1.2, 3.0, 2.5),
        (4.0, -2.0, 2.5),
        (0.5, 0.0, 3.0),
        (1.5, 0.2, 3.0),
        (2.5, 1.0, 3.0),
        (0.3, 2.0, 3.0),
        (5.0, 2.5, 3.0),
        (1.0, -3.0, 3.0),
        (0.5, 0.0, 4.0),
        (1.0, 0.5, 4.0),
        (2.0, 1.0, 4.0),
        (0.4, 1.2, 4.0),
        (3.0, 0.0, 4.0),
        (1.5, 4.0, 4.0),
        (6.0, -3.0, 4.0),
    ];
    let mut worst: f64 = 0.0;
    for &(x, t, gamma) in &cases {
        assert!((x - t.abs()).abs() >= 0.5);
        let got = kernel_value(x, t, gamma).unwrap().value();
        let reference = oracle.eval(x, t, gamma);
        worst = worst.max((got - reference).norm() / reference.norm());
    }
    let k400 = kernel_value(0.0, 0.0, 4.0).unwrap().value();
    let exact = 1.0 / (8.0 * std::f64::consts::PI);
    let origin_err = (k400 - exact).norm();
    let elapsed = start.elapsed().as_secs_f64();
    let passed = worst <= 1e-3 && origin_err <= 1e-6 && elapsed < 300.0;
    let ok = verdict(
        "kernel oracle",
        passed,
        &format!(
            "worst relative error {worst:.2e} over 20 samples (<= 1e-3), |K4(0,0) - 1/(8pi)| = {origin_err:.1e}, {elapsed:.1} s"
        ),
    );
    assert!(ok);
}

#[test]
fn pointwise_kernel_envelope() {
    let start = Instant::now();
    let rep = check_pointwise_envelope(2.5, &envelope_samples(), 1.2).unwrap();
    let slope = rep.shell_slope.unwrap_or(f64::NAN);
    let near = rep.fit(EnvelopeRegime::Near).unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    let slope_ok = (-1.15..=-0.85).contains(&slope);
    let passed = slope_ok && near.passed && elapsed < 600.0;
    let ok = verdict(
        "pointwise kernel envelope",
        passed,
        &format!(
            "shell slope {slope:.3} (in [-1.15, -0.85]: {slope_ok}), near-field holdout ratio {:.3} (<= 1.2), {elapsed:.1} s",
            near.worst_holdout_ratio
        ),
    );
    assert!(ok);
}

#[test]
fn kernel_norm_time_decay() {
    let start = Instant::now();
    let s = DecaySettings::default();
    let large = log_space(2.0, 50.0, 12);
    let small = log_space(0.05, 1.0, 12);
    let mut parts = Vec::new();
    let mut passed = true;
    for (gamma, rt, r) in [(2.5, 16.0, 12.0), (4.0, 10.0, 8.0)] {
        let l = decay_experiment(gamma, rt, r, &large, DecayRegime::Large, &s).unwrap();
        let m = decay_experiment(gamma, rt, r, &small, DecayRegime::Small, &s).unwrap();
        passed &= l.passed && m.passed;
        parts.push(format!(
            "(γ,r̃,r)=({gamma},{rt},{r}): large-t slope {:.3} vs {:.3}+0.1, small-t holdout {:.3} (<= 1.2)",
            l.slope,
            l.predicted_exponent,
            m.worst_holdout_ratio.unwrap()
        ));
    }
    let elapsed = start.elapsed().as_secs_f64();
    passed &= elapsed < 1800.0;
    let ok = verdict(
        "kernel norm decay",
        passed,
        &format!("{}; {elapsed:.1} s", parts.join("; ")),
    );
    assert!(ok);
}

#[test]
fn windowed_time_bounds() {
    let start = Instant::now();
    let e = ExponentTuple::new(2.0, 4.0, 16.0, 12.0, 1.25);
    let rep = windowed_time_experiment(2.0 * e.sigma, &e, 32, &WindowedTimeSettings::default()).unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    let passed = rep.passed && elapsed < 600.0;
    let ok = verdict(
        "windowed time bounds",
        passed,
        &format!(
            "fitted exponent {:.3} vs predicted {:.3} (±0.1), |k|<=2 bounded {}, weak-L^{{q/2}} growth {:.3}, \
             critical exponent {:.3} vs q/2 = {}, {elapsed:.1} s",
            rep.fitted_exponent,
            rep.predicted_exponent,
            rep.small_k_bounded,
            rep.weak_growth,
            rep.bound_critical_exponent,
            e.q / 2.0
        ),
    );
    assert!(ok);
}

#[test]
fn amalgam_identities() {
    let grid = GridSpec::new(32, 16.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let f = gaussian_packet(grid, 1.2, [0.5, -0.3, 0.2], [0.4, 0.0, 0.0], random_polarization(&mut rng))
        .to_position();
    let modulus = f.modulus();
    let mut fubini: f64 = 0.0;
    for p in [2.0, 3.0, 4.0, 8.0] {
        // Eight lattice cells per window radius.
        let spec = AmalgamSpec::new(p, p, Window::space(4.0).unwrap()).unwrap();
        let got = amalgam_norm(&f, &spec).unwrap().value;
        let lattice = sequence_lp_norm(&modulus, p) * grid.cell_volume().powf(1.0 / p);
        let expected = spec.window.lp_norm(p) * lattice;
        fubini = fubini.max((got - expected).abs() / expected);
    }

    let mut weak_ok = true;
    for _ in 0..1000 {
        let len = rng.gen_range(1..200);
        let q = rng.gen_range(1.0..10.0);
        let v: Vec<f64> = (0..len).map(|_| rng.gen_range(0.0..1.0f64).powi(3)).collect();
        weak_ok &= lorentz_weak_norm(&v, q) <= sequence_lp_norm(&v, q) * (1.0 + 1e-12);
    }

    let small = GridSpec::new(16, 16.0).unwrap();
    let tuples = [(2.0, 4.0, 16.0, 12.0), (4.0, 3.0, 24.0, 18.0), (f64::INFINITY, 6.0, 9.0, 9.0)];
    let mut holder_ok = true;
    let mut worst_ratio: f64 = 0.0;
    let mut constant: f64 = 0.0;
    for pair in 0..50 {
        let (qt, q, rt, r) = tuples[pair % tuples.len()];
        let spec = MixedNormSpec::new(
            AmalgamSpec::new(qt, q, Window::time(1.0).unwrap()).unwrap(),
            AmalgamSpec::new(rt, r, Window::space(4.0).unwrap()).unwrap(),
            false,
            1.0,
        )
        .unwrap();
        let times = spec.time_samples();
        let random_field = |rng: &mut ChaCha8Rng| {
            let width = rng.gen_range(0.7..2.5);
            let center = std::array::from_fn(|_| rng.gen_range(-3.0..3.0));
            let k0 = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
            gaussian_packet(small, width, center, k0, random_polarization(rng))
        };
        let f0 = random_field(&mut rng);
        let g0 = random_field(&mut rng);
        let fs: Vec<SpinorField> = times.iter().map(|&t| propagate_dirac(&f0, t)).collect();
        let gs: Vec<SpinorField> = times
            .iter()
            .map(|&t| propagate_dirac(&g0, 0.5 * t).scale(Complex64::from_polar(1.0 + t, t)))
            .collect();
        let rep = holder_duality_check(&fs, &gs, spec.time_step(), &spec).unwrap();
        holder_ok &= rep.holds;
        worst_ratio = worst_ratio.max(rep.ratio / rep.constant);
        constant = constant.max(rep.constant);
    }
    let passed = fubini <= 1e-3 && weak_ok && holder_ok;
    let ok = verdict(
        "amalgam identities",
        passed,
        &format!(
            "Fubini relative error {fubini:.2e} (<= 1e-3), weak <= strong on 1000 sequences: {weak_ok}, \
             Hölder on 50 pairs: {holder_ok} (constant {constant:.4}, worst lhs/(C·rhs) {worst_ratio:.3})"
        ),
    );
    assert!(ok);
}

#[test]
fn strichartz_sweep_ratios() {
    let start = Instant::now();
    let cfg = RunConfig::default();
    let grid = cfg.grid().unwrap();
    let settings = SweepSettings::from_config(&cfg);
    let scales: Vec<f64> = (-3..=3).map(|j| 2f64.powi(j)).collect();
    let data = sweep_family(grid, &scales, cfg.seed);
    let tuples = [
        ExponentTuple::new(2.0, 4.0, 16.0, 12.0, 1.1),
        ExponentTuple::new(4.0, 3.0, 24.0, 18.0, 1.2),
        ExponentTuple::new(f64::INFINITY, 6.0, 9.0, 9.0, 1.5),
    ];
    let rep = strichartz_sweep(&data, &tuples, grid, &settings).unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    let detail: Vec<String> = rep
        .summaries
        .iter()
        .map(|s| {
            format!(
                "{}: slope {:.3}, max/min {:.2}, branch gap {:.1e}",
                s.tuple, s.trend_slope, s.max_min, s.max_branch_mismatch
            )
        })
        .collect();
    let passed = rep.passed() && elapsed < 3600.0;
    let ok = verdict(
        "Strichartz sweep (48^3, T=8)",
        passed,
        &format!("{}; {} warnings; {elapsed:.0} s", detail.join("; "), rep.warnings.len()),
    );
    assert!(ok);
}

#[test]
fn admissibility_table() {
    let inf = f64::INFINITY;
    // (q̃, q, r̃, r, σ) and the exact clauses expected to fail.
    let theorem: [(ExponentTuple, &[&str]); 16] = [
        (ExponentTuple::new(2.0, 4.0, 16.0, 12.0, 1.1), &[]),
        (ExponentTuple::new(4.0, 3.0, 24.0, 18.0, 1.2), &[]),
        (ExponentTuple::new(inf, 6.0, 9.0, 9.0, 1.5), &[]),
        (ExponentTuple::new(2.0, 4.0, 16.0, 12.0, 1.0), &["σ>1"]),
        (ExponentTuple::new(2.0, inf, 16.0, 6.0, 1.1), &["2<q<∞", "6<r"]),
        (ExponentTuple::new(1.5, 4.0, 16.0, 12.0, 1.1), &["2≤q̃≤∞"]),
        (ExponentTuple::new(2.0, 2.0, inf, inf, 1.1), &["2<q<∞", "r̃<∞"]),
        (ExponentTuple::new(2.0, 4.0, 10.0, 12.0, 1.1), &["r≤r̃"]),
        (ExponentTuple::new(4.0, 4.0, 20.0, 12.0, 1.1), &["1/q̃+3/r̃>3/2−σ"]),
        (ExponentTuple::new(4.0, 4.0, 19.0, 12.0, 1.1), &[]),
        (ExponentTuple::new(2.0, 4.1, 16.0, 12.0, 1.1), &["1/q+3/r=1/2"]),
        (ExponentTuple::new(2.0, 5.0, 16.0, 10.0, 1.1), &[]),
        (
            ExponentTuple::new(inf, inf, inf, 6.0, 1.0),
            &["σ>1", "2<q<∞", "6<r", "r̃<∞", "1/q̃+3/r̃>3/2−σ"],
        ),
        (ExponentTuple::new(2.0, 8.0, 16.0, 8.0, 1.1), &[]),
        (ExponentTuple::new(2.0, 4.0, 12.0, 12.0, 1.1), &[]),
        (ExponentTuple::new(2.0, 4.0, 16.0, 12.0, 0.5), &["σ>1", "1/q̃+3/r̃>3/2−σ"]),
    ];
    let classical: [((f64, f64, f64), &[&str]); 9] = [
        ((2.0, 6.0, 5.0 / 6.0), &[]),
        ((2.0, 6.0, 0.8), &["σ≥1/q−1/r+1/2"]),
        ((inf, 2.0, 0.0), &[]),
        ((4.0, 3.0, 0.75), &[]),
        ((4.0, 4.0, 1.0), &["2/q+3/r=3/2"]),
        ((1.0, 6.0, 1.0), &["2≤q≤∞", "2/q+3/r=3/2", "σ≥1/q−1/r+1/2"]),
        ((2.0, 7.0, 1.0), &["2≤r≤6", "2/q+3/r=3/2"]),
        ((2.0, 6.0, 0.9), &[]),
        ((8.0 / 3.0, 4.0, 0.5), &["σ≥1/q−1/r+1/2"]),
    ];
    let decay: [((f64, f64, f64), &[&str]); 5] = [
        ((2.5, 12.0, 8.0), &["r̃≠6/(3−γ) (excluded value)"]),
        ((2.5, 16.0, 12.0), &[]),
        ((2.0, 16.0, 12.0), &["γ>2"]),
        ((4.0, 10.0, 8.0), &[]),
        ((2.5, 16.0, 6.0), &["6<r"]),
    ];
    let expected = |clauses: &[&str]| -> Vec<String> { clauses.iter().map(|c| format!("{c} violated")).collect() };
    let mut mismatches = Vec::new();
    for (e, clauses) in &theorem {
        let got = check_theorem1_admissible(e);
        if got.reasons != expected(clauses) || got.admissible != clauses.is_empty() {
            mismatches.push(format!("{e}: {:?}", got.reasons));
        }
    }
    for ((q, r, s), clauses) in &classical {
        let got = check_classical_admissible(*q, *r, *s);
        if got.reasons != expected(clauses) || got.admissible != clauses.is_empty() {
            mismatches.push(format!("classical ({q},{r},{s}): {:?}", got.reasons));
        }
    }
    for ((g, rt, r), clauses) in &decay {
        let got = check_decay_exponents(*g, *rt, *r);
        if got.reasons != expected(clauses) || got.admissible != clauses.is_empty() {
            mismatches.push(format!("decay ({g},{rt},{r}): {:?}", got.reasons));
        }
    }
    let total = theorem.len() + classical.len() + decay.len();
    assert_eq!(total, 30);
    let ok = verdict(
        "region logic",
        mismatches.is_empty(),
        &format!("{} of {total} cases match{}", total - mismatches.len(), if mismatches.is_empty() { String::new() } else { format!(": {}", mismatches.join("; ")) }),
    );
    assert!(ok);
}

#[test]
fn box_doubling_keeps_mixed_norm() {
    // The sweep datum at unit scale on (n, L) and (2n, 2L) with a short horizon.
    let grid = GridSpec::new(32, 16.0).unwrap();
    let settings = SweepSettings {
        horizon: 2.0,
        space_window_radius: 2.0,
        time_window_radius: 1.0,
        tolerances: Default::default(),
    };
    let e = ExponentTuple::new(2.0, 4.0, 16.0, 12.0, 1.1);
    let pol = dirac_amalgam::experiments::default_polarization();
    let (a, b, rel) = dirac_amalgam::experiments::box_sensitivity(
        |g| gaussian_packet(g, 1.0, [0.0; 3], [0.0; 3], pol),
        grid,
        &e,
        &settings,
    )
    .unwrap();
    assert!(rel < 0.02, "{a} vs {b}");
}
