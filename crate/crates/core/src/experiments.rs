//! End-to-end checks: admissible exponents, time decay of kernel amalgam
//! norms, windowed time bounds and Strichartz ratio sweeps.
//!
//! The estimates being tested have unspecified constants, so verdicts only
//! ever concern exponents, or constants fitted on one half of the data and
//! checked with slack on the other half.

use std::fmt;
use std::io::Write;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::amalgam::{
    amalgam_norm_radial, lorentz_weak_norm, mixed_norm_from_spatial, AmalgamSpec, GridAmalgam,
    MixedNormSpec, NormEstimate, Window,
};
use crate::config::{RunConfig, Tolerances};
use crate::fourier::{
    project, propagate_dirac, propagate_half_kg, sobolev_norm, GridSpec, SpinorField, COMPONENTS,
};
use crate::kernel::{KernelParams, RadialKernelProfile};
use crate::quadrature::gauss_legendre_panels;
use crate::spinor::Sign;
use crate::stats::{linear_fit, log_log_slope, log_space};
use crate::{Error, Result};

/// Tolerance for the equalities in the admissibility conditions.
pub const EQUALITY_TOL: f64 = 1e-12;

fn inv(p: f64) -> f64 {
    if p.is_infinite() {
        0.0
    } else {
        1.0 / p
    }
}

/// `(q̃, q, r̃, r, σ)`; `f64::INFINITY` stands for `∞`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentTuple {
    pub qt: f64,
    pub q: f64,
    pub rt: f64,
    pub r: f64,
    pub sigma: f64,
}

impl ExponentTuple {
    pub fn new(qt: f64, q: f64, rt: f64, r: f64, sigma: f64) -> Self {
        ExponentTuple { qt, q, rt, r, sigma }
    }
}

impl fmt::Display for ExponentTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "(qt={}, q={}, rt={}, r={}, sigma={})",
            self.qt, self.q, self.rt, self.r, self.sigma
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Admissibility {
    pub admissible: bool,
    /// One entry per violated clause.
    pub reasons: Vec<String>,
}

impl Admissibility {
    fn from_reasons(reasons: Vec<String>) -> Self {
        Admissibility {
            admissible: reasons.is_empty(),
            reasons,
        }
    }
}

/// Conditions of the main Strichartz theorem: `σ > 1`, `2 ≤ q̃ ≤ ∞`,
/// `2 < q < ∞`, `6 < r ≤ r̃ < ∞`, `1/q̃ + 3/r̃ > 3/2 − σ`, `1/q + 3/r = 1/2`.
/// Strict inequalities must hold by more than [`EQUALITY_TOL`].
pub fn check_theorem1_admissible(e: &ExponentTuple) -> Admissibility {
    let mut reasons = Vec::new();
    let mut clause = |ok: bool, text: &str| {
        if !ok {
            reasons.push(format!("{text} violated"));
        }
    };
    clause(e.sigma > 1.0, "σ>1");
    clause(e.qt >= 2.0, "2≤q̃≤∞");
    clause(e.q > 2.0 && e.q.is_finite(), "2<q<∞");
    clause(e.r > 6.0, "6<r");
    clause(e.r <= e.rt, "r≤r̃");
    clause(e.rt.is_finite(), "r̃<∞");
    clause(
        inv(e.qt) + 3.0 * inv(e.rt) > 1.5 - e.sigma + EQUALITY_TOL,
        "1/q̃+3/r̃>3/2−σ",
    );
    clause(
        (inv(e.q) + 3.0 * inv(e.r) - 0.5).abs() <= EQUALITY_TOL,
        "1/q+3/r=1/2",
    );
    Admissibility::from_reasons(reasons)
}

/// The classical range: `2 ≤ q ≤ ∞`, `2 ≤ r ≤ 6`, `2/q + 3/r = 3/2`,
/// `σ ≥ 1/q − 1/r + 1/2`.
pub fn check_classical_admissible(q: f64, r: f64, sigma: f64) -> Admissibility {
    let mut reasons = Vec::new();
    let mut clause = |ok: bool, text: &str| {
        if !ok {
            reasons.push(format!("{text} violated"));
        }
    };
    clause(q >= 2.0, "2≤q≤∞");
    clause((2.0..=6.0).contains(&r), "2≤r≤6");
    clause(
        (2.0 * inv(q) + 3.0 * inv(r) - 1.5).abs() <= EQUALITY_TOL,
        "2/q+3/r=3/2",
    );
    clause(
        sigma >= inv(q) - inv(r) + 0.5 - EQUALITY_TOL,
        "σ≥1/q−1/r+1/2",
    );
    Admissibility::from_reasons(reasons)
}

/// Preconditions of the kernel decay law: `γ > 2`, `6 < r ≤ r̃ < ∞`, and
/// `r̃ ≠ 6/(3−γ)` when `γ < 3`.
pub fn check_decay_exponents(gamma: f64, rt: f64, r: f64) -> Admissibility {
    let mut reasons = Vec::new();
    let mut clause = |ok: bool, text: &str| {
        if !ok {
            reasons.push(format!("{text} violated"));
        }
    };
    clause(gamma > 2.0, "γ>2");
    clause(r > 6.0, "6<r");
    clause(r <= rt, "r≤r̃");
    clause(rt.is_finite(), "r̃<∞");
    if gamma < 3.0 {
        let excluded = 6.0 / (3.0 - gamma);
        clause(
            (rt - excluded).abs() > EQUALITY_TOL * excluded.max(1.0),
            "r̃≠6/(3−γ) (excluded value)",
        );
    }
    Admissibility::from_reasons(reasons)
}

/// Predicted decay exponent of `‖K_γ(·,t)‖_{W(r̃/2,r/2)}` for `|t| ≥ 1`.
pub fn large_time_exponent(r: f64) -> f64 {
    -1.0 + 6.0 / r
}

/// Exponent in the small-time envelope `max{1, |t|^{−3+γ+6/r̃}}`.
pub fn small_time_exponent(gamma: f64, rt: f64) -> f64 {
    -3.0 + gamma + 6.0 / rt
}

/// A pass/fail outcome with the tolerance it used.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub name: String,
    pub passed: bool,
    pub measured: f64,
    pub threshold: f64,
    pub tolerance: String,
}

impl Verdict {
    pub fn new(name: &str, passed: bool, measured: f64, threshold: f64, tolerance: String) -> Self {
        Verdict {
            name: name.to_string(),
            passed,
            measured,
            threshold,
            tolerance,
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {}: measured {:.6e}, threshold {:.6e} ({})",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.measured,
            self.threshold,
            self.tolerance
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub name: String,
    pub parameters: Vec<(String, String)>,
    pub measurements: Vec<(String, f64)>,
    pub predictions: Vec<(String, f64)>,
    pub verdicts: Vec<Verdict>,
    pub runtime_seconds: f64,
    pub grid: Option<GridSpec>,
    pub warnings: Vec<String>,
}

impl ExperimentReport {
    pub fn new(name: &str) -> Self {
        ExperimentReport {
            name: name.to_string(),
            parameters: Vec::new(),
            measurements: Vec::new(),
            predictions: Vec::new(),
            verdicts: Vec::new(),
            runtime_seconds: 0.0,
            grid: None,
            warnings: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.passed)
    }

    pub fn param(mut self, key: &str, value: impl fmt::Display) -> Self {
        self.parameters.push((key.to_string(), value.to_string()));
        self
    }

    /// Human-readable summary; also embedded in run manifests.
    pub fn to_text(&self) -> String {
        let mut out = format!("[{}]\n", self.name);
        for (k, v) in &self.parameters {
            out += &format!("param {k} = {v}\n");
        }
        if let Some(g) = &self.grid {
            out += &format!("grid n = {}, L = {}\n", g.n(), g.box_length());
        }
        for (k, v) in &self.measurements {
            out += &format!("measured {k} = {v:.6e}\n");
        }
        for (k, v) in &self.predictions {
            out += &format!("predicted {k} = {v:.6e}\n");
        }
        for v in &self.verdicts {
            out += &format!("{v}\n");
        }
        for w in &self.warnings {
            out += &format!("warning: {w}\n");
        }
        out += &format!("runtime {:.2} s\n", self.runtime_seconds);
        out
    }
}

/// Resolution of the radial kernel profiles behind `‖K_γ(·,t)‖_{W}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelNormSettings {
    pub window_radius: f64,
    /// Profile spacing away from the origin.
    pub spacing: f64,
    /// The profile extends to `|t| + margin`; beyond the light cone the
    /// kernel decays exponentially.
    pub margin: f64,
}

impl Default for KernelNormSettings {
    fn default() -> Self {
        KernelNormSettings {
            window_radius: 1.0,
            spacing: 1.0 / 16.0,
            margin: 12.0,
        }
    }
}

/// Profile radii for `K(·, t)`: geometric near the origin, fine up to twice
/// the time scale `min(|t|, 1)`, then uniform.
pub fn kernel_profile_nodes(t: f64, settings: &KernelNormSettings) -> Vec<f64> {
    let scale = t.abs().clamp(1e-3, 1.0);
    let r_max = t.abs() + settings.margin;
    let mut nodes = vec![0.0];
    let mut r = scale / 256.0;
    while r < scale / 8.0 {
        nodes.push(r);
        r *= 1.1;
    }
    let fine = (scale / 32.0).min(settings.spacing);
    let mut r = scale / 8.0;
    while r < 2.0 * scale {
        nodes.push(r);
        r += fine;
    }
    let mut r = 2.0 * scale;
    while r < r_max + settings.spacing {
        nodes.push(r);
        r += settings.spacing;
    }
    nodes.sort_by(f64::total_cmp);
    nodes.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    nodes
}

/// `‖K_γ(·,t)‖_{W(p,q)}` through the radial fast path.
pub fn kernel_amalgam_norm(
    gamma: f64,
    t: f64,
    p: f64,
    q: f64,
    settings: &KernelNormSettings,
) -> Result<NormEstimate> {
    let params = KernelParams::new(gamma, t)?;
    let profile = RadialKernelProfile::compute(params, kernel_profile_nodes(t, settings))?;
    let spec = AmalgamSpec::new(p, q, Window::space(settings.window_radius)?)?;
    amalgam_norm_radial(&profile, &spec)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DecayRegime {
    /// `t ≥ 1`: power law `t^{−1+6/r}`.
    Large,
    /// `t ≤ 1`: envelope `max{1, t^{−3+γ+6/r̃}}`.
    Small,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecaySettings {
    pub norm: KernelNormSettings,
    pub exponent_slack: f64,
    pub constant_slack: f64,
}

impl Default for DecaySettings {
    fn default() -> Self {
        DecaySettings {
            norm: KernelNormSettings::default(),
            exponent_slack: 0.1,
            constant_slack: 1.2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayPoint {
    pub t: f64,
    pub norm: f64,
    pub abs_err: f64,
    /// Used to fit the envelope constant (small-time regime).
    pub training: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub gamma: f64,
    pub rt: f64,
    pub r: f64,
    pub regime: DecayRegime,
    pub points: Vec<DecayPoint>,
    /// Least-squares slope of `log norm` against `log t`.
    pub slope: f64,
    pub predicted_exponent: f64,
    pub exponent_slack: f64,
    pub constant_slack: f64,
    /// `max norm/envelope` over the training points.
    pub constant: f64,
    /// `max norm/(C·envelope)` over the holdout points (small-time regime).
    pub worst_holdout_ratio: Option<f64>,
    pub passed: bool,
    pub tolerance: String,
}

impl DecayFit {
    pub fn envelope(&self, t: f64) -> f64 {
        let power = t.powf(self.predicted_exponent);
        match self.regime {
            DecayRegime::Large => power,
            DecayRegime::Small => power.max(1.0),
        }
    }

    /// Verdict at another slack: an exponent slack for the large-time regime,
    /// a constant factor for the small-time regime.
    pub fn passes_with(&self, slack: f64) -> bool {
        match self.regime {
            DecayRegime::Large => self.slope <= self.predicted_exponent + slack,
            DecayRegime::Small => self.worst_holdout_ratio.map_or(false, |w| w <= slack),
        }
    }

    pub fn report(&self, runtime_seconds: f64) -> ExperimentReport {
        let mut rep = ExperimentReport::new("decay")
            .param("gamma", self.gamma)
            .param("rtilde", self.rt)
            .param("r", self.r)
            .param("regime", format!("{:?}", self.regime))
            .param("t_min", self.points.first().map_or(f64::NAN, |p| p.t))
            .param("t_max", self.points.last().map_or(f64::NAN, |p| p.t));
        rep.measurements.push(("slope".into(), self.slope));
        rep.measurements.push(("constant".into(), self.constant));
        if let Some(w) = self.worst_holdout_ratio {
            rep.measurements.push(("worst_holdout_ratio".into(), w));
        }
        rep.predictions.push(("exponent".into(), self.predicted_exponent));
        let (measured, threshold) = match self.regime {
            DecayRegime::Large => (self.slope, self.predicted_exponent + self.exponent_slack),
            DecayRegime::Small => (self.worst_holdout_ratio.unwrap_or(f64::NAN), self.constant_slack),
        };
        rep.verdicts.push(Verdict::new(
            "decay",
            self.passed,
            measured,
            threshold,
            self.tolerance.clone(),
        ));
        rep.runtime_seconds = runtime_seconds;
        rep
    }
}

fn check_decay_grid(t_grid: &[f64], regime: DecayRegime) -> Result<()> {
    if t_grid.len() < 8 {
        return Err(Error::InvalidParameter(format!(
            "decay fits need at least 8 times, got {}",
            t_grid.len()
        )));
    }
    if t_grid.iter().any(|t| !(*t > 0.0) || !t.is_finite()) {
        return Err(Error::InvalidParameter("decay times must be positive".into()));
    }
    let lo = t_grid.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = t_grid.iter().copied().fold(0.0, f64::max);
    if (hi / lo).log10() < 1.2 - 1e-12 {
        return Err(Error::InvalidParameter(format!(
            "decay times must span at least 1.2 decades, got [{lo}, {hi}]"
        )));
    }
    let in_regime = match regime {
        DecayRegime::Large => lo >= 1.0,
        DecayRegime::Small => hi <= 1.0,
    };
    if !in_regime {
        return Err(Error::InvalidParameter(format!(
            "times [{lo}, {hi}] leave the {regime:?} regime"
        )));
    }
    Ok(())
}

/// Measures `‖K_γ(·,t)‖_{W(r̃/2, r/2)}` over `t_grid` and tests the decay law.
pub fn decay_experiment(
    gamma: f64,
    rt: f64,
    r: f64,
    t_grid: &[f64],
    regime: DecayRegime,
    settings: &DecaySettings,
) -> Result<DecayFit> {
    let adm = check_decay_exponents(gamma, rt, r);
    if !adm.admissible {
        return Err(Error::InvalidParameter(adm.reasons.join("; ")));
    }
    check_decay_grid(t_grid, regime)?;
    let mut points = Vec::with_capacity(t_grid.len());
    for (i, &t) in t_grid.iter().enumerate() {
        let est = kernel_amalgam_norm(gamma, t, rt / 2.0, r / 2.0, &settings.norm)?;
        points.push(DecayPoint {
            t,
            norm: est.value,
            abs_err: est.abs_err,
            training: i % 2 == 0,
        });
    }
    let ts: Vec<f64> = points.iter().map(|p| p.t).collect();
    let ns: Vec<f64> = points.iter().map(|p| p.norm).collect();
    let slope = log_log_slope(&ts, &ns);
    let predicted_exponent = match regime {
        DecayRegime::Large => large_time_exponent(r),
        DecayRegime::Small => small_time_exponent(gamma, rt),
    };
    let mut fit = DecayFit {
        gamma,
        rt,
        r,
        regime,
        points,
        slope,
        predicted_exponent,
        exponent_slack: settings.exponent_slack,
        constant_slack: settings.constant_slack,
        constant: 0.0,
        worst_holdout_ratio: None,
        passed: false,
        tolerance: String::new(),
    };
    let train_ratio = |p: &DecayPoint| p.norm / fit.envelope(p.t);
    match regime {
        DecayRegime::Large => {
            fit.constant = fit.points.iter().map(train_ratio).fold(0.0, f64::max);
            fit.tolerance = format!("slope <= predicted + {}", settings.exponent_slack);
            fit.passed = fit.passes_with(settings.exponent_slack);
        }
        DecayRegime::Small => {
            let c = fit
                .points
                .iter()
                .filter(|p| p.training)
                .map(train_ratio)
                .fold(0.0, f64::max);
            let worst = fit
                .points
                .iter()
                .filter(|p| !p.training)
                .map(|p| p.norm / (c * fit.envelope(p.t)))
                .fold(0.0, f64::max);
            fit.constant = c;
            fit.worst_holdout_ratio = Some(worst);
            fit.tolerance = format!(
                "holdout norm <= {} * C * max(1, t^predicted), C fitted on the training half",
                settings.constant_slack
            );
            fit.passed = fit.passes_with(settings.constant_slack);
        }
    }
    Ok(fit)
}

/// CSV with columns `gamma,rtilde,r,t,norm,predicted_exp,slope,verdict`.
pub fn write_decay_csv<W: Write>(fits: &[DecayFit], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["gamma", "rtilde", "r", "t", "norm", "predicted_exp", "slope", "verdict"])?;
    for fit in fits {
        for p in &fit.points {
            w.write_record(&[
                fit.gamma.to_string(),
                fit.rt.to_string(),
                fit.r.to_string(),
                p.t.to_string(),
                format!("{:.12e}", p.norm),
                fit.predicted_exponent.to_string(),
                format!("{:.6}", fit.slope),
                if fit.passed { "pass" } else { "fail" }.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowedTimeSettings {
    pub norm: KernelNormSettings,
    pub time_window_radius: f64,
    /// Smallest time at which `h` is sampled; below it `h` is extended by
    /// the power law through the first two samples.
    pub t_min: f64,
    /// Number of log-spaced samples of `h`.
    pub samples: usize,
    pub exponent_slack: f64,
    /// Largest growth exponent of truncated weak norms still called bounded.
    pub growth_tolerance: f64,
}

impl Default for WindowedTimeSettings {
    fn default() -> Self {
        WindowedTimeSettings {
            norm: KernelNormSettings::default(),
            time_window_radius: 1.0,
            t_min: 0.01,
            samples: 48,
            exponent_slack: 0.1,
            growth_tolerance: 0.05,
        }
    }
}

/// `h(t)` sampled on a log grid and interpolated linearly in log-log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogLogTable {
    pub t: Vec<f64>,
    pub values: Vec<f64>,
}

impl LogLogTable {
    pub fn at(&self, t: f64) -> f64 {
        let t = t.abs();
        let n = self.t.len();
        let j = self.t.partition_point(|&s| s <= t).clamp(1, n - 1);
        let (t0, t1) = (self.t[j - 1].ln(), self.t[j].ln());
        let (v0, v1) = (self.values[j - 1].ln(), self.values[j].ln());
        let w = (t.ln() - t0) / (t1 - t0);
        (v0 + w * (v1 - v0)).exp()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowedTimeReport {
    pub tuple: ExponentTuple,
    pub gamma: f64,
    pub h: LogLogTable,
    /// `k` from `−k_max` to `k_max`.
    pub ks: Vec<i64>,
    /// `‖h·φ(·−k)‖_{L^{q̃/2}}` per `k`.
    pub values: Vec<f64>,
    /// `−(1 − 6/r)`.
    pub predicted_exponent: f64,
    /// Slope of `log value` against `log(|k|−1)` over `2 ≤ k ≤ k_max`.
    pub fitted_exponent: f64,
    pub exponent_slack: f64,
    pub exponent_passed: bool,
    /// The weaker one-sided statement: decay at least as fast as predicted.
    pub decays_at_least_predicted: bool,
    pub small_k_bounded: bool,
    pub ratio_16_over_8: f64,
    pub predicted_ratio_16_over_8: f64,
    /// Weak `ℓ^{q/2,∞}` norm of the measured sequence.
    pub weak_norm: f64,
    /// Growth exponent of that weak norm between truncations `k_max/4` and `k_max`.
    pub weak_growth: f64,
    pub weak_finite: bool,
    /// Critical weak exponent `1/(1−6/r)` of the bound sequence `(|k|−1)^{−(1−6/r)}`.
    pub bound_critical_exponent: f64,
    pub critical_matches_q: bool,
    /// Growth of the bound sequence's weak norm at `q/2` and at `0.9·q/2`.
    pub bound_growth_at_q: f64,
    pub bound_growth_below_q: f64,
    pub passed: bool,
}

impl WindowedTimeReport {
    pub fn report(&self, runtime_seconds: f64) -> ExperimentReport {
        let e = &self.tuple;
        let mut rep = ExperimentReport::new("windowed-time")
            .param("gamma", self.gamma)
            .param("tuple", e)
            .param("k_max", self.ks.last().copied().unwrap_or(0));
        rep.measurements.push(("fitted_exponent".into(), self.fitted_exponent));
        rep.measurements.push(("ratio_16_over_8".into(), self.ratio_16_over_8));
        rep.measurements.push(("weak_norm".into(), self.weak_norm));
        rep.measurements.push(("weak_growth".into(), self.weak_growth));
        rep.measurements.push(("bound_growth_at_q".into(), self.bound_growth_at_q));
        rep.measurements.push(("bound_growth_below_q".into(), self.bound_growth_below_q));
        rep.predictions.push(("exponent".into(), self.predicted_exponent));
        rep.predictions.push(("ratio_16_over_8".into(), self.predicted_ratio_16_over_8));
        rep.predictions.push(("bound_critical_exponent".into(), self.bound_critical_exponent));
        rep.verdicts.push(Verdict::new(
            "small-k windows bounded",
            self.small_k_bounded,
            self.values.iter().copied().fold(0.0, f64::max),
            f64::INFINITY,
            "finite for |k| <= 2".into(),
        ));
        rep.verdicts.push(Verdict::new(
            "power law exponent",
            self.exponent_passed,
            self.fitted_exponent,
            self.predicted_exponent,
            format!("|fitted - predicted| <= {}", self.exponent_slack),
        ));
        rep.verdicts.push(Verdict::new(
            "weak norm finite",
            self.weak_finite,
            self.weak_growth,
            0.0,
            "growth exponent of truncated weak norms <= tolerance".into(),
        ));
        rep.verdicts.push(Verdict::new(
            "critical weak exponent",
            self.critical_matches_q,
            self.bound_critical_exponent,
            e.q / 2.0,
            "1/(1-6/r) = q/2, i.e. 2/q = 1-6/r".into(),
        ));
        rep.runtime_seconds = runtime_seconds;
        rep
    }
}

/// `∫ g` over `[lo, hi]`. Intervals ending at `t = 0` are split into dyadic
/// panels shrinking toward 0, which handles integrable `|t|^{−a}` singularities.
fn integrate_time<G: Fn(f64) -> f64>(lo: f64, hi: f64, g: &G) -> f64 {
    const PANELS: usize = 32;
    const LEVELS: i32 = 60;
    let gl = |a: f64, b: f64, panels: usize| -> f64 {
        gauss_legendre_panels(a, b, panels).iter().map(|(x, w)| w * g(*x)).sum()
    };
    if hi <= lo {
        0.0
    } else if lo < 0.0 && hi > 0.0 {
        integrate_time(lo, 0.0, g) + integrate_time(0.0, hi, g)
    } else if lo == 0.0 || hi == 0.0 {
        let far = if lo == 0.0 { hi } else { lo };
        (0..LEVELS)
            .map(|j| {
                let (a, b) = (far * 0.5f64.powi(j + 1), far * 0.5f64.powi(j));
                if a < b { gl(a, b, 8) } else { gl(b, a, 8) }
            })
            .sum()
    } else {
        gl(lo, hi, PANELS)
    }
}

fn weak_growth(sequence_at: impl Fn(i64) -> f64, s: f64, k_lo: i64, k_hi: i64) -> f64 {
    let weak = |k_max: i64| {
        let v: Vec<f64> = (-k_max..=k_max).map(&sequence_at).collect();
        lorentz_weak_norm(&v, s)
    };
    (weak(k_hi) / weak(k_lo)).ln() / (k_hi as f64 / k_lo as f64).ln()
}

/// Windowed time bounds for `h(t) = ‖K_γ(·,t)‖_{W(r̃/2, r/2)}`: the values
/// `‖h·φ(·−k)‖_{L^{q̃/2}}`, their power decay in `|k|`, and the weak
/// `ℓ^{q/2,∞}` membership of the resulting sequence.
pub fn windowed_time_experiment(
    gamma: f64,
    tuple: &ExponentTuple,
    k_max: i64,
    settings: &WindowedTimeSettings,
) -> Result<WindowedTimeReport> {
    let adm = check_theorem1_admissible(tuple);
    if !adm.admissible {
        return Err(Error::InvalidParameter(adm.reasons.join("; ")));
    }
    if (gamma - 2.0 * tuple.sigma).abs() > EQUALITY_TOL {
        return Err(Error::InvalidParameter(format!(
            "windowed time bounds use γ = 2σ, got γ = {gamma}, σ = {}",
            tuple.sigma
        )));
    }
    let dec = check_decay_exponents(gamma, tuple.rt, tuple.r);
    if !dec.admissible {
        return Err(Error::InvalidParameter(dec.reasons.join("; ")));
    }
    if k_max < 16 {
        return Err(Error::InvalidParameter(format!("k_max must be at least 16, got {k_max}")));
    }
    let radius = settings.time_window_radius;
    let window = Window::time(radius)?;
    let t_max = k_max as f64 + radius + 0.5;
    let times = log_space(settings.t_min, t_max, settings.samples);
    let mut values = Vec::with_capacity(times.len());
    for &t in &times {
        values.push(kernel_amalgam_norm(gamma, t, tuple.rt / 2.0, tuple.r / 2.0, &settings.norm)?.value);
    }
    let h = LogLogTable { t: times, values };

    let p = tuple.qt / 2.0;
    let windowed = |k: i64| -> f64 {
        let c = k as f64;
        if p.is_infinite() {
            (0..=800)
                .map(|i| c - radius + 2.0 * radius * i as f64 / 800.0)
                .filter(|t| *t != 0.0)
                .map(|t| h.at(t) * window.value((t - c).abs()))
                .fold(0.0, f64::max)
        } else {
            let g = |t: f64| (h.at(t) * window.value((t - c).abs())).powf(p);
            integrate_time(c - radius, c + radius, &g).powf(1.0 / p)
        }
    };
    let positive: Vec<f64> = (0..=k_max).map(windowed).collect();
    let ks: Vec<i64> = (-k_max..=k_max).collect();
    let seq: Vec<f64> = ks.iter().map(|k| positive[k.unsigned_abs() as usize]).collect();

    let predicted_exponent = -(1.0 - 6.0 / tuple.r);
    let (xs, ys): (Vec<f64>, Vec<f64>) = (2..=k_max)
        .map(|k| (((k - 1) as f64).ln(), positive[k as usize].ln()))
        .unzip();
    let fitted_exponent = linear_fit(&xs, &ys).slope;
    let slack = settings.exponent_slack;
    let small_k_bounded = positive[..=2].iter().all(|v| v.is_finite() && *v > 0.0);

    let s = tuple.q / 2.0;
    let lookup = |k: i64| positive[k.unsigned_abs() as usize];
    let weak_norm = lorentz_weak_norm(&seq, s);
    let growth = weak_growth(lookup, s, k_max / 4, k_max);
    let alpha = 1.0 - 6.0 / tuple.r;
    let bound = |k: i64| ((k.abs() - 1).max(1) as f64).powf(-alpha);
    let bound_critical_exponent = 1.0 / alpha;
    let critical_matches_q = (bound_critical_exponent - s).abs() <= EQUALITY_TOL * s.max(1.0);
    let bound_growth_at_q = weak_growth(bound, s, 1 << 14, 1 << 20);
    let bound_growth_below_q = weak_growth(bound, 0.9 * s, 1 << 14, 1 << 20);

    let exponent_passed = (fitted_exponent - predicted_exponent).abs() <= slack;
    let weak_finite = growth <= settings.growth_tolerance;
    Ok(WindowedTimeReport {
        tuple: *tuple,
        gamma,
        h,
        ks,
        values: seq,
        predicted_exponent,
        fitted_exponent,
        exponent_slack: slack,
        exponent_passed,
        decays_at_least_predicted: fitted_exponent <= predicted_exponent + slack,
        small_k_bounded,
        ratio_16_over_8: positive[16] / positive[8],
        predicted_ratio_16_over_8: (15.0f64 / 7.0).powf(predicted_exponent),
        weak_norm,
        weak_growth: growth,
        weak_finite,
        bound_critical_exponent,
        critical_matches_q,
        bound_growth_at_q,
        bound_growth_below_q,
        passed: small_k_bounded && exponent_passed && weak_finite && critical_matches_q,
    })
}

/// CSV with columns `k,value,bound`, where `bound = (|k|−1)^{−(1−6/r)}` for `|k| ≥ 2`.
pub fn write_windowed_csv<W: Write>(rep: &WindowedTimeReport, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["k", "value", "bound"])?;
    for (k, v) in rep.ks.iter().zip(&rep.values) {
        let bound = if k.abs() >= 2 {
            format!("{:.12e}", ((k.abs() - 1) as f64).powf(rep.predicted_exponent))
        } else {
            String::new()
        };
        w.write_record(&[k.to_string(), format!("{v:.12e}"), bound])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Family {
    DilatedGaussian,
    ModulatedBump,
    RandomPolarization,
    ProjectedPlus,
    ProjectedMinus,
}

/// Initial data for a sweep. `scale` is the dilation for Gaussians and the
/// modulation frequency for modulated bumps.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialDatum {
    pub family: Family,
    pub scale: f64,
    pub field: SpinorField,
}

/// Width of the undilated Gaussian. Scales `2^{−3}..2^{3}` then span widths
/// `1/16..4`, which keeps the widest member clear of the box boundary for
/// `L = 32`.
pub const GAUSSIAN_BASE_WIDTH: f64 = 0.5;

pub fn default_polarization() -> [Complex64; COMPONENTS] {
    let v = [
        Complex64::new(1.0, 0.0),
        Complex64::new(0.0, 0.5),
        Complex64::new(0.5, 0.0),
        Complex64::new(0.0, -0.25),
    ];
    let n = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    v.map(|c| c / n)
}

pub fn random_polarization(rng: &mut ChaCha8Rng) -> [Complex64; COMPONENTS] {
    let v: [Complex64; COMPONENTS] =
        std::array::from_fn(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    let n = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    v.map(|c| c / n)
}

fn unit_band_limited(field: SpinorField) -> SpinorField {
    let f = field.band_limited().to_frequency();
    let n = f.l2_norm();
    f.scale(Complex64::new(1.0 / n, 0.0))
}

/// Gaussian of width `w` centered at `center`, modulated by `e^{ik₀·x}`,
/// built from its exact Fourier transform on the frequency lattice, then
/// band-limited and scaled to unit `L²` norm.
pub fn gaussian_packet(
    grid: GridSpec,
    width: f64,
    center: [f64; 3],
    k0: [f64; 3],
    polarization: [Complex64; COMPONENTS],
) -> SpinorField {
    let f = SpinorField::from_frequency_fn(grid, |xi| {
        let x = xi.xi();
        let d2: f64 = (0..3).map(|a| (x[a] - k0[a]).powi(2)).sum();
        let phase: f64 = (0..3).map(|a| (x[a] - k0[a]) * center[a]).sum();
        let g = Complex64::from_polar((-0.5 * width * width * d2).exp(), -phase);
        polarization.map(|v| v * g)
    });
    unit_band_limited(f)
}

pub fn dilated_gaussian(grid: GridSpec, scale: f64, polarization: [Complex64; COMPONENTS]) -> SpinorField {
    gaussian_packet(grid, GAUSSIAN_BASE_WIDTH * scale, [0.0; 3], [0.0; 3], polarization)
}

/// The sweep family: dilated Gaussians at `scales`, modulated bumps, randomly
/// polarized Gaussians and the two spectral projections of a Gaussian.
pub fn sweep_family(grid: GridSpec, scales: &[f64], seed: u64) -> Vec<InitialDatum> {
    let pol = default_polarization();
    let mut out: Vec<InitialDatum> = scales
        .iter()
        .map(|&s| InitialDatum {
            family: Family::DilatedGaussian,
            scale: s,
            field: dilated_gaussian(grid, s, pol),
        })
        .collect();
    for kappa in [1.0, 2.0] {
        let k0 = [kappa / 3f64.sqrt(); 3];
        out.push(InitialDatum {
            family: Family::ModulatedBump,
            scale: kappa,
            field: gaussian_packet(grid, 1.0, [0.0; 3], k0, pol),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..2 {
        let v = random_polarization(&mut rng);
        out.push(InitialDatum {
            family: Family::RandomPolarization,
            scale: 1.0,
            field: dilated_gaussian(grid, 1.0, v),
        });
    }
    let base = dilated_gaussian(grid, 1.0, pol);
    for (sign, family) in [(Sign::Plus, Family::ProjectedPlus), (Sign::Minus, Family::ProjectedMinus)] {
        out.push(InitialDatum {
            family,
            scale: 1.0,
            field: project(&base, sign),
        });
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepSettings {
    pub horizon: f64,
    pub space_window_radius: f64,
    pub time_window_radius: f64,
    pub tolerances: Tolerances,
}

impl SweepSettings {
    pub fn from_config(cfg: &RunConfig) -> Self {
        SweepSettings {
            horizon: cfg.horizon,
            space_window_radius: cfg.space_window_radius,
            time_window_radius: cfg.time_window_radius,
            tolerances: cfg.tolerances,
        }
    }

    pub fn mixed_spec(&self, e: &ExponentTuple) -> Result<MixedNormSpec> {
        MixedNormSpec::new(
            AmalgamSpec::new(e.qt, e.q, Window::time(self.time_window_radius)?)?,
            AmalgamSpec::new(e.rt, e.r, Window::space(self.space_window_radius)?)?,
            false,
            self.horizon,
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub family: Family,
    pub scale: f64,
    pub tuple: ExponentTuple,
    pub mixed_norm: f64,
    pub hsigma: f64,
    pub ratio: f64,
    /// Per-branch ratios `‖e^{∓it⟨D⟩}f±‖ / ‖f±‖_{H^σ}`; `None` for a vanishing branch.
    pub ratio_plus: Option<f64>,
    pub ratio_minus: Option<f64>,
    /// Relative gap between the direct flow's mixed norm and that of `u₊ + u₋`.
    pub assembled_rel_diff: f64,
    /// Relative change of the mixed norm when the horizon is halved.
    pub half_horizon_rel_change: f64,
    /// Largest share of `L²` mass in the outer layer of the box over all times.
    pub max_boundary_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TupleSummary {
    pub tuple: ExponentTuple,
    /// Slope of `log ratio` against `log scale` over the dilated Gaussians.
    pub trend_slope: f64,
    pub max_min: f64,
    pub max_branch_mismatch: f64,
    pub trend_passed: bool,
    pub spread_passed: bool,
    pub branch_passed: bool,
}

impl TupleSummary {
    pub fn passed(&self) -> bool {
        self.trend_passed && self.spread_passed && self.branch_passed
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub grid: GridSpec,
    pub horizon: f64,
    pub rows: Vec<SweepRow>,
    pub summaries: Vec<TupleSummary>,
    pub skipped: usize,
    pub warnings: Vec<String>,
    pub tolerances: Tolerances,
}

impl SweepReport {
    pub fn passed(&self) -> bool {
        self.summaries.iter().all(|s| s.passed())
    }

    pub fn report(&self, runtime_seconds: f64) -> ExperimentReport {
        let tol = &self.tolerances;
        let mut rep = ExperimentReport::new("sweep").param("horizon", self.horizon);
        rep.grid = Some(self.grid);
        for s in &self.summaries {
            let tag = s.tuple.to_string();
            rep.measurements.push((format!("trend_slope {tag}"), s.trend_slope));
            rep.measurements.push((format!("max_min {tag}"), s.max_min));
            rep.measurements.push((format!("branch_mismatch {tag}"), s.max_branch_mismatch));
            rep.verdicts.push(Verdict::new(
                &format!("ratio trend {tag}"),
                s.trend_passed,
                s.trend_slope,
                tol.trend_slope,
                format!("|slope| <= {}", tol.trend_slope),
            ));
            rep.verdicts.push(Verdict::new(
                &format!("ratio spread {tag}"),
                s.spread_passed,
                s.max_min,
                tol.max_min_ratio,
                format!("max/min < {}", tol.max_min_ratio),
            ));
            rep.verdicts.push(Verdict::new(
                &format!("branch assembly {tag}"),
                s.branch_passed,
                s.max_branch_mismatch,
                tol.branch_match,
                format!("relative gap <= {}", tol.branch_match),
            ));
        }
        let worst_t = self
            .rows
            .iter()
            .map(|r| r.half_horizon_rel_change)
            .fold(0.0, f64::max);
        rep.measurements.push(("max_half_horizon_rel_change".into(), worst_t));
        rep.warnings = self.warnings.clone();
        rep.runtime_seconds = runtime_seconds;
        rep
    }
}

/// Mixed norms of `u`, `u₊`, `u₋` and `u₊ + u₋` for one datum and many tuples.
struct FlowNorms {
    direct: Vec<f64>,
    plus: Vec<f64>,
    minus: Vec<f64>,
    assembled: Vec<f64>,
    half_direct: Vec<f64>,
    max_boundary_fraction: f64,
}

fn flow_norms(
    f: &SpinorField,
    specs: &[MixedNormSpec],
    engines: &[GridAmalgam],
    with_branches: bool,
) -> Result<FlowNorms> {
    let times = specs[0].time_samples();
    let horizon = specs[0].horizon;
    let f = f.to_frequency();
    let fp = project(&f, Sign::Plus);
    let fm = project(&f, Sign::Minus);
    let m = specs.len();
    let mut series = vec![vec![Vec::with_capacity(times.len()); 4]; m];
    let mut max_boundary_fraction: f64 = 0.0;
    for &t in &times {
        let u = propagate_dirac(&f, t).to_position();
        max_boundary_fraction = max_boundary_fraction.max(u.boundary_mass_fraction());
        let um = u.modulus();
        let branches = if with_branches {
            let up = propagate_half_kg(&fp, t, Sign::Plus).to_position();
            let un = propagate_half_kg(&fm, t, Sign::Minus).to_position();
            let asm = up.add(&un)?;
            Some([up.modulus(), un.modulus(), asm.modulus()])
        } else {
            None
        };
        for (j, engine) in engines.iter().enumerate() {
            series[j][0].push(engine.norm_of_modulus(&um)?.value);
            if let Some(b) = &branches {
                for (slot, modulus) in b.iter().enumerate() {
                    series[j][slot + 1].push(engine.norm_of_modulus(modulus)?.value);
                }
            }
        }
    }
    let half_idx: Vec<usize> = (0..times.len())
        .filter(|&i| times[i].abs() <= 0.5 * horizon + 1e-12)
        .collect();
    let half_times: Vec<f64> = half_idx.iter().map(|&i| times[i]).collect();
    let mut out = FlowNorms {
        direct: Vec::new(),
        plus: Vec::new(),
        minus: Vec::new(),
        assembled: Vec::new(),
        half_direct: Vec::new(),
        max_boundary_fraction,
    };
    for (j, spec) in specs.iter().enumerate() {
        let mixed = |s: &[f64]| mixed_norm_from_spatial(&times, s, spec).map(|r| r.value);
        out.direct.push(mixed(&series[j][0])?);
        if with_branches {
            out.plus.push(mixed(&series[j][1])?);
            out.minus.push(mixed(&series[j][2])?);
            out.assembled.push(mixed(&series[j][3])?);
        }
        let half_spec = MixedNormSpec {
            horizon: 0.5 * horizon,
            ..*spec
        };
        let half_series: Vec<f64> = half_idx.iter().map(|&i| series[j][0][i]).collect();
        out.half_direct
            .push(mixed_norm_from_spatial(&half_times, &half_series, &half_spec)?.value);
    }
    Ok(out)
}

/// Mixed norm `‖e^{−it(D+β)}f‖_{W(q̃,q)_t W(r̃,r)_x}` over `[−T, T]`.
pub fn mixed_norm_of_flow(f: &SpinorField, tuple: &ExponentTuple, settings: &SweepSettings) -> Result<f64> {
    let spec = settings.mixed_spec(tuple)?;
    let engine = GridAmalgam::new(*f.grid(), spec.space)?;
    Ok(flow_norms(f, &[spec], &[engine], false)?.direct[0])
}

/// Strichartz ratios `mixed norm / ‖f‖_{H^σ}` of the Dirac flow over a family
/// of initial data and several exponent tuples.
pub fn strichartz_sweep(
    data: &[InitialDatum],
    tuples: &[ExponentTuple],
    grid: GridSpec,
    settings: &SweepSettings,
) -> Result<SweepReport> {
    if tuples.is_empty() {
        return Err(Error::InvalidParameter("sweep needs at least one exponent tuple".into()));
    }
    for e in tuples {
        let adm = check_theorem1_admissible(e);
        if !adm.admissible {
            return Err(Error::InvalidParameter(format!(
                "{e} is not admissible: {}",
                adm.reasons.join("; ")
            )));
        }
    }
    let specs: Vec<MixedNormSpec> = tuples.iter().map(|e| settings.mixed_spec(e)).collect::<Result<_>>()?;
    let engines: Vec<GridAmalgam> = specs
        .iter()
        .map(|s| GridAmalgam::new(grid, s.space))
        .collect::<Result<_>>()?;
    let tol = settings.tolerances;
    let mut rows = Vec::new();
    let mut warnings = Vec::new();
    let mut skipped = 0;
    for datum in data {
        if *datum.field.grid() != grid {
            return Err(Error::InvalidParameter("initial datum lives on a different grid".into()));
        }
        if !datum.field.is_band_limited(1e-10) {
            return Err(Error::InvalidParameter(format!(
                "{:?} datum at scale {} is not band-limited",
                datum.family, datum.scale
            )));
        }
        if datum.field.l2_norm() == 0.0 {
            skipped += 1;
            continue;
        }
        let f = datum.field.to_frequency();
        let fp = project(&f, Sign::Plus);
        let fm = project(&f, Sign::Minus);
        let norms = flow_norms(&f, &specs, &engines, true)?;
        if norms.max_boundary_fraction > tol.wrap_fraction {
            let msg = format!(
                "{:?} datum at scale {}: boundary mass fraction {:.3e} exceeds {} (wrap-around)",
                datum.family, datum.scale, norms.max_boundary_fraction, tol.wrap_fraction
            );
            log::warn!("{msg}");
            warnings.push(msg);
        }
        for (j, e) in tuples.iter().enumerate() {
            let hs = sobolev_norm(&f, e.sigma);
            let branch_ratio = |mixed: f64, g: &SpinorField| {
                let h = sobolev_norm(g, e.sigma);
                (h > 1e-12 * hs).then(|| mixed / h)
            };
            let direct = norms.direct[j];
            rows.push(SweepRow {
                family: datum.family,
                scale: datum.scale,
                tuple: *e,
                mixed_norm: direct,
                hsigma: hs,
                ratio: direct / hs,
                ratio_plus: branch_ratio(norms.plus[j], &fp),
                ratio_minus: branch_ratio(norms.minus[j], &fm),
                assembled_rel_diff: (norms.assembled[j] - direct).abs() / direct,
                half_horizon_rel_change: (direct - norms.half_direct[j]).abs() / direct,
                max_boundary_fraction: norms.max_boundary_fraction,
            });
        }
    }
    let summaries = tuples
        .iter()
        .map(|e| {
            let mine: Vec<&SweepRow> = rows.iter().filter(|r| r.tuple == *e).collect();
            let gauss: Vec<&&SweepRow> = mine
                .iter()
                .filter(|r| r.family == Family::DilatedGaussian)
                .collect();
            let scales: Vec<f64> = gauss.iter().map(|r| r.scale).collect();
            let ratios: Vec<f64> = gauss.iter().map(|r| r.ratio).collect();
            let trend_slope = if ratios.len() >= 2 {
                log_log_slope(&scales, &ratios)
            } else {
                0.0
            };
            let max = ratios.iter().copied().fold(0.0, f64::max);
            let min = ratios.iter().copied().fold(f64::INFINITY, f64::min);
            let max_min = if ratios.is_empty() { 1.0 } else { max / min };
            let max_branch_mismatch = mine.iter().map(|r| r.assembled_rel_diff).fold(0.0, f64::max);
            TupleSummary {
                tuple: *e,
                trend_slope,
                max_min,
                max_branch_mismatch,
                trend_passed: trend_slope.abs() <= tol.trend_slope,
                spread_passed: max_min < tol.max_min_ratio,
                branch_passed: max_branch_mismatch <= tol.branch_match,
            }
        })
        .collect();
    Ok(SweepReport {
        grid,
        horizon: settings.horizon,
        rows,
        summaries,
        skipped,
        warnings,
        tolerances: tol,
    })
}

/// CSV with columns `scale,qt,q,rt,r,sigma,mixed_norm,hsigma,ratio`.
pub fn write_sweep_csv<W: Write>(report: &SweepReport, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["scale", "qt", "q", "rt", "r", "sigma", "mixed_norm", "hsigma", "ratio"])?;
    for row in &report.rows {
        let e = &row.tuple;
        w.write_record(&[
            row.scale.to_string(),
            e.qt.to_string(),
            e.q.to_string(),
            e.rt.to_string(),
            e.r.to_string(),
            e.sigma.to_string(),
            format!("{:.12e}", row.mixed_norm),
            format!("{:.12e}", row.hsigma),
            format!("{:.12e}", row.ratio),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Relative change of the mixed norm when the box is doubled at fixed grid
/// spacing. `make` builds the datum on a given grid.
pub fn box_sensitivity<M>(
    make: M,
    grid: GridSpec,
    tuple: &ExponentTuple,
    settings: &SweepSettings,
) -> Result<(f64, f64, f64)>
where
    M: Fn(GridSpec) -> SpinorField,
{
    let big = GridSpec::new(2 * grid.n(), 2.0 * grid.box_length())?;
    let a = mixed_norm_of_flow(&make(grid), tuple, settings)?;
    let b = mixed_norm_of_flow(&make(big), tuple, settings)?;
    Ok((a, b, (a - b).abs() / b))
}

/// Sample points `(|x|, t)` for the pointwise kernel envelope: a log range of
/// `|(x,t)|` in `[0.01, 1]` at several angles, and dyadic shells `[R, 2R)`,
/// `R = 4..64`, densely covering directions near the light cone.
pub fn envelope_samples() -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    for rho in log_space(0.01, 1.0, 12) {
        for theta in [0.1, 0.4, std::f64::consts::FRAC_PI_4, 1.2, 1.5] {
            out.push((rho * f64::cos(theta), rho * f64::sin(theta)));
        }
    }
    for j in 2..=6 {
        let shell = 2f64.powi(j);
        for frac in [1.0, 1.3, 1.6, 1.9] {
            let rho = shell * frac;
            for ratio in [0.0f64, 0.5, 0.8, 0.9, 0.95, 0.98, 1.0, 1.02, 1.1, 2.0] {
                // x = ratio·t on the circle |(x,t)| = rho.
                let t = rho / (1.0 + ratio * ratio).sqrt();
                out.push((ratio * t, t));
            }
        }
    }
    out
}
