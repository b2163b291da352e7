//! Wiener amalgam norms `W(p,q)`, weak Lorentz quasi-norms and mixed
//! space-time norms.
//!
//! `‖f‖_{W(p,q)} = ‖ x ↦ ‖f·φ(·−x)‖_{L^p} ‖_{L^q}` with a smooth window `φ`
//! normalized in `L²`. Grid norms place window centers on the sampling grid;
//! the radial path exploits that `K_γ(·,t)` depends on `|x|` only.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::fourier::{fft3, Direction, GridSpec, SpinorField};
use crate::kernel::{bump_rho, RadialKernelProfile};
use crate::quadrature::{gauss_legendre_panels, integrate_real, GL5};
use crate::{Error, Result};

/// Relative level below which FFT convolution output is treated as zero.
/// Without it, round-off noise dominates `N^{q/p}` when `q < p`.
const CONVOLUTION_FLOOR: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum WindowShape {
    /// `ρ(2|x|/R)`, with `ρ` the cutoff of the kernel module: flat on the
    /// half-radius ball, zero outside radius `R`.
    Bump,
}

/// A radial window `φ` in one or three dimensions, scaled to `‖φ‖_{L²} = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    shape: WindowShape,
    dim: usize,
    radius: f64,
    scale: f64,
}

impl Window {
    pub fn new(shape: WindowShape, dim: usize, radius: f64) -> Result<Self> {
        if dim != 1 && dim != 3 {
            return Err(Error::InvalidParameter(format!(
                "windows exist in 1 or 3 dimensions, not {dim}"
            )));
        }
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "window radius must be positive, got {radius}"
            )));
        }
        let raw = Window {
            shape,
            dim,
            radius,
            scale: 1.0,
        };
        let scale = 1.0 / raw.power_integral(2.0).sqrt();
        Ok(Window { scale, ..raw })
    }

    pub fn space(radius: f64) -> Result<Self> {
        Self::new(WindowShape::Bump, 3, radius)
    }

    pub fn time(radius: f64) -> Result<Self> {
        Self::new(WindowShape::Bump, 1, radius)
    }

    pub fn shape(&self) -> WindowShape {
        self.shape
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// `φ` at distance `d` from the center.
    pub fn value(&self, d: f64) -> f64 {
        match self.shape {
            WindowShape::Bump => self.scale * bump_rho(2.0 * d / self.radius),
        }
    }

    /// Largest value, attained on the inner half-radius ball.
    pub fn peak(&self) -> f64 {
        self.scale
    }

    fn radial_measure(&self, d: f64) -> f64 {
        if self.dim == 3 {
            4.0 * PI * d * d
        } else {
            2.0
        }
    }

    /// `∫ φ^p` over the whole space.
    pub fn power_integral(&self, p: f64) -> f64 {
        integrate_real(
            |d| self.value(d).powf(p) * self.radial_measure(d),
            0.0,
            self.radius,
            32,
        )
    }

    pub fn lp_norm(&self, p: f64) -> f64 {
        if p.is_infinite() {
            self.peak()
        } else {
            self.power_integral(p).powf(1.0 / p)
        }
    }

    pub fn l2_norm(&self) -> f64 {
        self.lp_norm(2.0)
    }

    /// Measure of the support ball.
    pub fn support_measure(&self) -> f64 {
        ball_volume(self.dim, self.radius)
    }
}

fn ball_volume(dim: usize, radius: f64) -> f64 {
    if dim == 3 {
        4.0 * PI / 3.0 * radius.powi(3)
    } else {
        2.0 * radius
    }
}

fn check_exponent(name: &str, v: f64) -> Result<()> {
    if v >= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "exponent {name} must lie in [1, ∞], got {v}"
        )))
    }
}

/// Hölder conjugate, with `1 ↔ ∞`.
pub fn conjugate_exponent(p: f64) -> f64 {
    if p == 1.0 {
        f64::INFINITY
    } else if p.is_infinite() {
        1.0
    } else {
        p / (p - 1.0)
    }
}

/// Exponents of a `W(p,q)` norm and its window. `f64::INFINITY` means sup.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AmalgamSpec {
    pub p: f64,
    pub q: f64,
    pub window: Window,
}

impl AmalgamSpec {
    pub fn new(p: f64, q: f64, window: Window) -> Result<Self> {
        check_exponent("p", p)?;
        check_exponent("q", q)?;
        Ok(AmalgamSpec { p, q, window })
    }

    pub fn conjugate(&self) -> AmalgamSpec {
        AmalgamSpec {
            p: conjugate_exponent(self.p),
            q: conjugate_exponent(self.q),
            window: self.window,
        }
    }
}

/// A computed norm with an absolute error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormEstimate {
    pub value: f64,
    pub abs_err: f64,
}

/// `(Σ v^q)^{1/q}` with a scale guard; `q = ∞` gives the max.
pub fn sequence_lp_norm(values: &[f64], q: f64) -> f64 {
    let m = values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if m == 0.0 || q.is_infinite() {
        return m;
    }
    m * values
        .iter()
        .map(|v| (v.abs() / m).powf(q))
        .sum::<f64>()
        .powf(1.0 / q)
}

/// `sup_λ λ·#{|v| > λ}^{1/q}`, computed exactly as `max_k v*_k · k^{1/q}` over
/// the decreasing rearrangement `v*`.
pub fn lorentz_weak_norm(values: &[f64], q: f64) -> f64 {
    let mut sorted: Vec<f64> = values.iter().map(|v| v.abs()).collect();
    sorted.sort_by(|a, b| b.total_cmp(a));
    if q.is_infinite() {
        return sorted.first().copied().unwrap_or(0.0);
    }
    sorted
        .iter()
        .enumerate()
        .map(|(k, v)| v * ((k + 1) as f64).powf(1.0 / q))
        .fold(0.0, f64::max)
}

/// Combines local norms `N(x)` into the outer `L^q` norm over centers with
/// cell measure `cell`.
fn outer_norm(local: &[f64], q: f64, cell: f64) -> f64 {
    if q.is_infinite() {
        local.iter().copied().fold(0.0, f64::max)
    } else {
        sequence_lp_norm(local, q) * cell.powf(1.0 / q)
    }
}

/// Grid amalgam norm with the window prepared once for repeated use.
#[derive(Debug, Clone)]
pub struct GridAmalgam {
    grid: GridSpec,
    spec: AmalgamSpec,
    /// Transform of `φ^p·dx³/n³` (finite `p`).
    window_hat: Vec<Complex64>,
    /// `(offset, φ)` pairs on the window support (infinite `p`).
    stencil: Vec<([i64; 3], f64)>,
    /// `|‖φ‖_p (lattice) / ‖φ‖_p − 1|`.
    discretization: f64,
    /// `Σ φ² dx³` on the lattice.
    lattice_l2_sq: f64,
}

impl GridAmalgam {
    pub fn new(grid: GridSpec, spec: AmalgamSpec) -> Result<Self> {
        let window = spec.window;
        if window.dim() != 3 {
            return Err(Error::InvalidParameter("grid norms need a 3-D window".into()));
        }
        let dx = grid.spacing();
        if window.radius() < 4.0 * dx {
            return Err(Error::Resolution(format!(
                "window radius {} spans fewer than 4 grid cells (dx = {dx})",
                window.radius()
            )));
        }
        if window.radius() >= 0.5 * grid.box_length() {
            return Err(Error::InvalidParameter(format!(
                "window radius {} does not fit in a box of length {}",
                window.radius(),
                grid.box_length()
            )));
        }
        let dv = grid.cell_volume();
        let phi: Vec<f64> = (0..grid.len())
            .map(|idx| {
                let x = grid.position(idx);
                window.value((x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt())
            })
            .collect();
        let lattice_l2_sq = phi.iter().map(|v| v * v).sum::<f64>() * dv;
        let (window_hat, stencil, discretization) = if spec.p.is_finite() {
            let norm = 1.0 / grid.len() as f64;
            let mut hat: Vec<Complex64> = phi
                .iter()
                .map(|v| Complex64::new(v.powf(spec.p) * dv * norm, 0.0))
                .collect();
            fft3(&mut hat, grid.n(), Direction::Forward);
            let lattice = (phi.iter().map(|v| v.powf(spec.p)).sum::<f64>() * dv).powf(1.0 / spec.p);
            let disc = (lattice / window.lp_norm(spec.p) - 1.0).abs();
            (hat, Vec::new(), disc)
        } else {
            let stencil = phi
                .iter()
                .enumerate()
                .filter(|(_, v)| **v > 0.0)
                .map(|(idx, v)| {
                    let [i, j, k] = grid.unravel(idx);
                    ([grid.signed(i), grid.signed(j), grid.signed(k)], *v)
                })
                .collect();
            (Vec::new(), stencil, 0.0)
        };
        Ok(GridAmalgam {
            grid,
            spec,
            window_hat,
            stencil,
            discretization,
            lattice_l2_sq,
        })
    }

    pub fn spec(&self) -> &AmalgamSpec {
        &self.spec
    }

    /// `Σ φ² dx³` over the lattice; 1 up to discretization error.
    pub fn lattice_l2_sq(&self) -> f64 {
        self.lattice_l2_sq
    }

    /// `N(x) = ‖f·φ(·−x)‖_{L^p}` for every grid center `x`, given `|f|`.
    pub fn local_norms(&self, modulus: &[f64]) -> Result<Vec<f64>> {
        if modulus.len() != self.grid.len() {
            return Err(Error::InvalidParameter(
                "sample count does not match the grid".into(),
            ));
        }
        let m = modulus.iter().copied().fold(0.0, f64::max);
        if m == 0.0 {
            return Ok(vec![0.0; modulus.len()]);
        }
        if !m.is_finite() {
            return Err(Error::InvalidParameter("field has non-finite samples".into()));
        }
        let p = self.spec.p;
        if p.is_infinite() {
            return Ok(self.local_sup(modulus));
        }
        let mut buf: Vec<Complex64> = modulus
            .iter()
            .map(|v| Complex64::new((v / m).powf(p), 0.0))
            .collect();
        let n = self.grid.n();
        fft3(&mut buf, n, Direction::Forward);
        for (b, w) in buf.iter_mut().zip(&self.window_hat) {
            *b *= w;
        }
        fft3(&mut buf, n, Direction::Inverse);
        let peak = buf.iter().map(|v| v.re).fold(0.0, f64::max);
        let floor = CONVOLUTION_FLOOR * peak;
        Ok(buf
            .iter()
            .map(|v| if v.re > floor { m * v.re.powf(1.0 / p) } else { 0.0 })
            .collect())
    }

    fn local_sup(&self, modulus: &[f64]) -> Vec<f64> {
        let n = self.grid.n() as i64;
        (0..self.grid.len())
            .map(|idx| {
                let c = self.grid.unravel(idx);
                self.stencil
                    .iter()
                    .map(|(off, w)| {
                        let [i, j, k] = [0, 1, 2].map(|a| (c[a] as i64 + off[a]).rem_euclid(n) as usize);
                        modulus[self.grid.index(i, j, k)] * w
                    })
                    .fold(0.0, f64::max)
            })
            .collect()
    }

    pub fn norm_of_modulus(&self, modulus: &[f64]) -> Result<NormEstimate> {
        let local = self.local_norms(modulus)?;
        let value = outer_norm(&local, self.spec.q, self.grid.cell_volume());
        Ok(NormEstimate {
            value,
            abs_err: value * self.discretization,
        })
    }

    pub fn norm(&self, field: &SpinorField) -> Result<NormEstimate> {
        if *field.grid() != self.grid {
            return Err(Error::InvalidParameter("field lives on a different grid".into()));
        }
        self.norm_of_modulus(&field.to_position().modulus())
    }
}

/// `‖f‖_{W(p,q)}` of a spinor field, using the pointwise `C⁴` norm.
pub fn amalgam_norm(field: &SpinorField, spec: &AmalgamSpec) -> Result<NormEstimate> {
    GridAmalgam::new(*field.grid(), *spec)?.norm(field)
}

/// Cumulative table of `Φ(u) = ∫₀^u φ(d)^p d dd`.
struct PhiTable {
    step: f64,
    values: Vec<f64>,
}

impl PhiTable {
    const SEGMENTS: usize = 2048;

    fn new(window: &Window, p: f64) -> Self {
        let step = window.radius() / Self::SEGMENTS as f64;
        let mut values = Vec::with_capacity(Self::SEGMENTS + 1);
        values.push(0.0);
        let mut acc = 0.0;
        for j in 0..Self::SEGMENTS {
            let a = j as f64 * step;
            acc += integrate_real(|d| window.value(d).powf(p) * d, a, a + step, 1);
            values.push(acc);
        }
        PhiTable { step, values }
    }

    fn at(&self, u: f64) -> f64 {
        let x = u / self.step;
        if x >= Self::SEGMENTS as f64 {
            return self.values[Self::SEGMENTS];
        }
        let j = x.floor() as usize;
        let w = x - j as f64;
        self.values[j] + w * (self.values[j + 1] - self.values[j])
    }
}

/// Integrates `g(r, |K(r)|/M)` over `[lo, hi]` against the piecewise-linear
/// modulus of a profile, with 5-point Gauss–Legendre on each profile cell.
fn profile_integral<G>(radii: &[f64], scaled: &[f64], lo: f64, hi: f64, g: G) -> f64
where
    G: Fn(f64, f64) -> f64,
{
    let hi = hi.min(*radii.last().unwrap());
    if hi <= lo || radii.len() < 2 {
        return 0.0;
    }
    let start = radii.partition_point(|&r| r <= lo).saturating_sub(1);
    let mut total = 0.0;
    for j in start..radii.len() - 1 {
        let (r0, r1) = (radii[j], radii[j + 1]);
        if r0 >= hi {
            break;
        }
        let a = r0.max(lo);
        let b = r1.min(hi);
        if b <= a {
            continue;
        }
        let (v0, v1) = (scaled[j], scaled[j + 1]);
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        for &(x, w) in GL5.iter() {
            let r = mid + half * x;
            let v = v0 + (r - r0) / (r1 - r0) * (v1 - v0);
            total += w * half * g(r, v);
        }
    }
    total
}

/// Radial fast path for `‖K(·)‖_{W(p,q)}` when `K` depends on `|x|` only.
///
/// With `|y| = s`, spherical coordinates about the origin give
/// `N(s)^p = (2π/s) ∫ r |K(r)|^p [Φ(min(r+s,R)) − Φ(min(|r−s|,R))] dr`,
/// and the outer norm is `∫ 4πs² N(s)^q ds`.
pub struct RadialAmalgam<'a> {
    profile: &'a RadialKernelProfile,
    spec: AmalgamSpec,
    peak: f64,
    scaled: Vec<f64>,
    phi: Option<PhiTable>,
}

impl<'a> RadialAmalgam<'a> {
    pub fn new(profile: &'a RadialKernelProfile, spec: AmalgamSpec) -> Result<Self> {
        let window = spec.window;
        if window.dim() != 3 {
            return Err(Error::InvalidParameter("radial norms need a 3-D window".into()));
        }
        if profile.max_spacing() > window.radius() / 8.0 * (1.0 + 1e-12) {
            return Err(Error::Resolution(format!(
                "profile spacing {} exceeds window radius / 8 = {}",
                profile.max_spacing(),
                window.radius() / 8.0
            )));
        }
        let moduli: Vec<f64> = profile.values.iter().map(|v| v.norm()).collect();
        let peak = moduli.iter().copied().fold(0.0, f64::max);
        let scaled = if peak > 0.0 {
            moduli.iter().map(|v| v / peak).collect()
        } else {
            moduli
        };
        let phi = spec.p.is_finite().then(|| PhiTable::new(&window, spec.p));
        Ok(RadialAmalgam {
            profile,
            spec,
            peak,
            scaled,
            phi,
        })
    }

    /// `N(s)^p / M^p` with `M = max|K|` (finite `p`), or `N(s)/M` (`p = ∞`).
    fn scaled_local(&self, s: f64) -> f64 {
        let r_win = self.spec.window.radius();
        let radii = &self.profile.radii;
        match &self.phi {
            None => {
                let lo = radii.partition_point(|&r| r < s - r_win);
                radii[lo..]
                    .iter()
                    .zip(&self.scaled[lo..])
                    .take_while(|(r, _)| **r <= s + r_win)
                    .map(|(r, v)| v * self.spec.window.value((r - s).abs()))
                    .fold(0.0, f64::max)
            }
            Some(table) => {
                let p = self.spec.p;
                if s < 1e-12 {
                    let win = &self.spec.window;
                    return profile_integral(radii, &self.scaled, 0.0, r_win, |r, v| {
                        4.0 * PI * r * r * (v * win.value(r)).powf(p)
                    });
                }
                let lo = (s - r_win).max(0.0);
                let integral = profile_integral(radii, &self.scaled, lo, s + r_win, |r, v| {
                    let g = table.at((r + s).min(r_win)) - table.at((r - s).abs().min(r_win));
                    r * v.powf(p) * g
                });
                2.0 * PI / s * integral
            }
        }
    }

    /// `N(s) = ‖K·φ(·−y)‖_{L^p}` for any `|y| = s`.
    pub fn local_norm(&self, s: f64) -> f64 {
        let v = self.scaled_local(s).max(0.0);
        match self.spec.p.is_finite() {
            true => self.peak * v.powf(1.0 / self.spec.p),
            false => self.peak * v,
        }
    }

    fn outer(&self, panel_width: f64) -> f64 {
        if self.peak == 0.0 {
            return 0.0;
        }
        let s_max = self.profile.r_max() + self.spec.window.radius();
        let panels = (s_max / panel_width).ceil() as usize;
        let nodes = gauss_legendre_panels(0.0, s_max, panels);
        let locals: Vec<f64> = nodes.iter().map(|(s, _)| self.scaled_local(*s).max(0.0)).collect();
        // Local values are N^p/M^p for finite p and N/M for p = ∞.
        let to_norm = |v: f64| match self.spec.p.is_finite() {
            true => v.powf(1.0 / self.spec.p),
            false => v,
        };
        let top = locals.iter().copied().fold(0.0, f64::max);
        if top == 0.0 {
            return 0.0;
        }
        let q = self.spec.q;
        if q.is_infinite() {
            return self.peak * to_norm(top);
        }
        let sum: f64 = nodes
            .iter()
            .zip(&locals)
            .map(|((s, w), v)| 4.0 * PI * s * s * w * to_norm(v / top).powf(q))
            .sum();
        self.peak * to_norm(top) * sum.powf(1.0 / q)
    }

    pub fn norm(&self) -> NormEstimate {
        let r = self.spec.window.radius();
        let fine = self.outer(r / 8.0);
        let coarse = self.outer(r / 4.0);
        let profile_err = self.profile.errors.iter().copied().fold(0.0, f64::max);
        let rel = if self.peak > 0.0 { profile_err / self.peak } else { 0.0 };
        NormEstimate {
            value: fine,
            abs_err: (fine - coarse).abs() + fine * rel,
        }
    }
}

pub fn amalgam_norm_radial(profile: &RadialKernelProfile, spec: &AmalgamSpec) -> Result<NormEstimate> {
    Ok(RadialAmalgam::new(profile, *spec)?.norm())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShellIntegralSample {
    pub y_norm: f64,
    pub t: f64,
    pub exponent: f64,
    pub value: f64,
}

/// `∫_{|y|−1 ≤ |x| ≤ |y|+1} |K(x)|^e dx` over the unit-thickness shell.
pub fn shell_integral(
    profile: &RadialKernelProfile,
    y_norm: f64,
    exponent: f64,
) -> Result<ShellIntegralSample> {
    if !(exponent > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "shell exponent must be positive, got {exponent}"
        )));
    }
    let moduli: Vec<f64> = profile.values.iter().map(|v| v.norm()).collect();
    let value = profile_integral(&profile.radii, &moduli, (y_norm - 1.0).max(0.0), y_norm + 1.0, |r, v| {
        4.0 * PI * r * r * v.powf(exponent)
    });
    Ok(ShellIntegralSample {
        y_norm,
        t: profile.params.map(|p| p.t()).unwrap_or(f64::NAN),
        exponent,
        value,
    })
}

/// Local norms of a uniformly sampled time series `h(t_j)`, treated as zero
/// outside the samples. Centers run over the sample lattice extended by the
/// window radius on both sides; the first center is `t_0 − pad·dt` with
/// `pad` the returned offset.
pub fn time_local_norms(series: &[f64], dt: f64, p: f64, window: &Window) -> Result<(Vec<f64>, usize)> {
    if window.dim() != 1 {
        return Err(Error::InvalidParameter("time norms need a 1-D window".into()));
    }
    if !(dt > 0.0) {
        return Err(Error::InvalidParameter(format!("time step must be positive, got {dt}")));
    }
    if window.radius() < 4.0 * dt {
        return Err(Error::Resolution(format!(
            "time window radius {} spans fewer than 4 steps of {dt}",
            window.radius()
        )));
    }
    let pad = (window.radius() / dt).ceil() as usize;
    let weights: Vec<f64> = (0..=2 * pad)
        .map(|m| window.value((m as f64 - pad as f64).abs() * dt))
        .collect();
    let len = series.len() + 2 * pad;
    let peak = series.iter().copied().fold(0.0, f64::max);
    let local = (0..len)
        .map(|c| {
            // Center c sits at sample index c − pad; window offsets run over ±pad.
            let terms = (0..=2 * pad).filter_map(|m| {
                let j = (c + m).checked_sub(2 * pad)?;
                series.get(j).map(|h| (h.abs(), weights[m]))
            });
            if p.is_infinite() {
                terms.map(|(h, w)| h * w).fold(0.0, f64::max)
            } else if peak == 0.0 {
                0.0
            } else {
                let s: f64 = terms.map(|(h, w)| (h / peak * w).powf(p)).sum();
                peak * (s * dt).powf(1.0 / p)
            }
        })
        .collect();
    Ok((local, pad))
}

/// 1-D amalgam norm of a uniformly sampled series, optionally with the weak
/// `L^{q,∞}` outer norm.
pub fn time_amalgam_norm(series: &[f64], dt: f64, spec: &AmalgamSpec, weak_outer: bool) -> Result<f64> {
    let (local, _) = time_local_norms(series, dt, spec.p, &spec.window)?;
    Ok(if weak_outer {
        let q = spec.q;
        lorentz_weak_norm(&local, q) * if q.is_finite() { dt.powf(1.0 / q) } else { 1.0 }
    } else {
        outer_norm(&local, spec.q, dt)
    })
}

/// `W(q̃,q)_t W(r̃,r)_x` with a finite horizon `[−T, T]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MixedNormSpec {
    pub time: AmalgamSpec,
    pub space: AmalgamSpec,
    /// Replace the outer time `L^q` by weak `L^{q,∞}`.
    pub weak_time_outer: bool,
    pub horizon: f64,
}

impl MixedNormSpec {
    pub fn new(time: AmalgamSpec, space: AmalgamSpec, weak_time_outer: bool, horizon: f64) -> Result<Self> {
        if time.window.dim() != 1 || space.window.dim() != 3 {
            return Err(Error::InvalidParameter(
                "mixed norms need a 1-D time window and a 3-D space window".into(),
            ));
        }
        if !(horizon > 0.0) || !horizon.is_finite() {
            return Err(Error::InvalidParameter(format!("horizon must be positive, got {horizon}")));
        }
        Ok(MixedNormSpec {
            time,
            space,
            weak_time_outer,
            horizon,
        })
    }

    /// Default time step: an eighth of the time-window radius.
    pub fn time_step(&self) -> f64 {
        self.time.window.radius() / 8.0
    }

    /// Uniform samples of `[−T, T]` at [`Self::time_step`], symmetric about 0.
    pub fn time_samples(&self) -> Vec<f64> {
        let dt = self.time_step();
        let half = (self.horizon / dt + 1e-9).floor() as i64;
        (-half..=half).map(|j| j as f64 * dt).collect()
    }

    pub fn conjugate(&self) -> MixedNormSpec {
        MixedNormSpec {
            time: self.time.conjugate(),
            space: self.space.conjugate(),
            ..*self
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixedNormReport {
    pub value: f64,
    pub times: Vec<f64>,
    /// `‖u(t_j)‖_{W(r̃,r)}` per time sample.
    pub spatial_norms: Vec<f64>,
    pub warnings: Vec<String>,
}

fn uniform_step(times: &[f64], horizon: f64) -> Result<f64> {
    if times.len() < 2 {
        return Err(Error::InvalidParameter("need at least two time samples".into()));
    }
    let dt = times[1] - times[0];
    if !(dt > 0.0) || times.windows(2).any(|w| ((w[1] - w[0]) - dt).abs() > 1e-9 * dt) {
        return Err(Error::InvalidParameter("time samples must be uniformly spaced".into()));
    }
    let slack = 1e-9 * horizon;
    if times[0] < -horizon - slack || times[times.len() - 1] > horizon + slack {
        return Err(Error::InvalidParameter(format!(
            "time samples leave the horizon [-{horizon}, {horizon}]"
        )));
    }
    Ok(dt)
}

fn horizon_warnings(spec: &MixedNormSpec) -> Vec<String> {
    let mut warnings = Vec::new();
    if spec.horizon < 4.0 * spec.time.window.radius() {
        let msg = format!(
            "horizon T = {} is below 4 time-window radii ({})",
            spec.horizon,
            4.0 * spec.time.window.radius()
        );
        log::warn!("{msg}");
        warnings.push(msg);
    }
    warnings
}

/// Mixed norm from precomputed spatial norms `‖u(t_j)‖_{W(r̃,r)}`.
pub fn mixed_norm_from_spatial(times: &[f64], spatial: &[f64], spec: &MixedNormSpec) -> Result<MixedNormReport> {
    if times.len() != spatial.len() {
        return Err(Error::InvalidParameter("times and norms differ in length".into()));
    }
    let dt = uniform_step(times, spec.horizon)?;
    let value = time_amalgam_norm(spatial, dt, &spec.time, spec.weak_time_outer)?;
    Ok(MixedNormReport {
        value,
        times: times.to_vec(),
        spatial_norms: spatial.to_vec(),
        warnings: horizon_warnings(spec),
    })
}

/// `‖u‖_{W(q̃,q)_t W(r̃,r)_x}` where `field_at(t)` produces `u(t)`.
pub fn mixed_spacetime_norm<F>(times: &[f64], mut field_at: F, spec: &MixedNormSpec) -> Result<MixedNormReport>
where
    F: FnMut(f64) -> Result<SpinorField>,
{
    uniform_step(times, spec.horizon)?;
    let mut engine: Option<GridAmalgam> = None;
    let mut spatial = Vec::with_capacity(times.len());
    for &t in times {
        let u = field_at(t)?;
        if engine.is_none() {
            engine = Some(GridAmalgam::new(*u.grid(), spec.space)?);
        }
        spatial.push(engine.as_ref().unwrap().norm(&u)?.value);
    }
    mixed_norm_from_spatial(times, &spatial, spec)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HolderReport {
    /// `|⟨F, G⟩_{L²_{x,t}}|`.
    pub lhs: f64,
    pub norm_f: f64,
    /// Norm of `G` in the conjugate mixed space.
    pub norm_g: f64,
    pub rhs: f64,
    /// Window constant `max(1, 1/(Σφ_x² dx³ · Σφ_t² dt))`; exactly the loss
    /// from the lattice sums of `φ²` not being 1.
    pub constant: f64,
    pub ratio: f64,
    pub holds: bool,
}

/// Checks `|⟨F,G⟩| ≤ C ‖F‖_{W(q̃,q)W(r̃,r)} ‖G‖_{W(q̃′,q′)W(r̃′,r′)}` for
/// fields sampled at uniform time step `dt`.
pub fn holder_duality_check(
    f: &[SpinorField],
    g: &[SpinorField],
    dt: f64,
    spec: &MixedNormSpec,
) -> Result<HolderReport> {
    if f.len() != g.len() || f.is_empty() {
        return Err(Error::InvalidParameter("F and G need the same nonzero number of time samples".into()));
    }
    if spec.weak_time_outer {
        return Err(Error::InvalidParameter("duality check needs strong outer norms".into()));
    }
    let grid = *f[0].grid();
    if f.iter().chain(g).any(|u| *u.grid() != grid) {
        return Err(Error::InvalidParameter("all fields must share one grid".into()));
    }
    let dual = spec.conjugate();
    let space_f = GridAmalgam::new(grid, spec.space)?;
    let space_g = GridAmalgam::new(grid, dual.space)?;
    let mut pairing = Complex64::new(0.0, 0.0);
    let mut nf = Vec::with_capacity(f.len());
    let mut ng = Vec::with_capacity(g.len());
    for (a, b) in f.iter().zip(g) {
        let (a, b) = (a.to_position(), b.to_position());
        for c in 0..crate::fourier::COMPONENTS {
            pairing += a
                .component(c)
                .iter()
                .zip(b.component(c))
                .map(|(x, y)| x * y.conj())
                .sum::<Complex64>();
        }
        nf.push(space_f.norm(&a)?.value);
        ng.push(space_g.norm(&b)?.value);
    }
    let lhs = pairing.norm() * grid.cell_volume() * dt;
    let norm_f = time_amalgam_norm(&nf, dt, &spec.time, false)?;
    let norm_g = time_amalgam_norm(&ng, dt, &dual.time, false)?;
    let rhs = norm_f * norm_g;
    let pad = (spec.time.window.radius() / dt).ceil() as i64;
    let time_sq: f64 = (-pad..=pad)
        .map(|m| spec.time.window.value((m as f64 * dt).abs()).powi(2))
        .sum::<f64>()
        * dt;
    let constant = (1.0 / (space_f.lattice_l2_sq() * time_sq)).max(1.0);
    let ratio = if rhs > 0.0 { lhs / rhs } else { 0.0 };
    Ok(HolderReport {
        lhs,
        norm_f,
        norm_g,
        rhs,
        constant,
        ratio,
        holds: lhs <= constant * rhs * (1.0 + 1e-9),
    })
}

/// A constant `C` with `‖f‖_{W(p₁,q₁)} ≤ C ‖f‖_{W(p₀,q₀)}` for `p₀ ≥ p₁`,
/// `q₀ ≤ q₁`.
///
/// Local part: Hölder on the support ball, `|B_R|^{1/p₁−1/p₀}`. Outer part:
/// `‖N‖_{q₁} ≤ ‖N‖_∞^{1−q₀/q₁} ‖N‖_{q₀}^{q₀/q₁}` with
/// `‖N‖_∞ ≤ m |B_{R/4}|^{−1/q₀} ‖N‖_{q₀}`, where `m` balls of radius `R/4`
/// cover the support and `φ` is flat on each ball `B(y, R/2)` with `|y| ≤ R/4`.
pub fn inclusion_constant(window: &Window, p0: f64, q0: f64, p1: f64, q1: f64) -> Result<f64> {
    for (name, v) in [("p0", p0), ("q0", q0), ("p1", p1), ("q1", q1)] {
        check_exponent(name, v)?;
    }
    if p0 < p1 || q0 > q1 {
        return Err(Error::InvalidParameter(
            "inclusion needs p0 >= p1 and q0 <= q1".into(),
        ));
    }
    let inv = |p: f64| if p.is_infinite() { 0.0 } else { 1.0 / p };
    let dim = window.dim();
    let local = window.support_measure().powf(inv(p1) - inv(p0));
    let per_axis = (4.0 * (dim as f64).sqrt()).ceil();
    let cover = per_axis.powi(dim as i32);
    let sup_factor = cover * ball_volume(dim, window.radius() / 4.0).powf(-inv(q0));
    let outer_exp = if q1.is_infinite() { 1.0 } else { 1.0 - q0 / q1 };
    Ok(local * sup_factor.powf(outer_exp))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fourier::{Representation, COMPONENTS};
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn smooth_field(grid: GridSpec, center: [f64; 3], width: f64) -> SpinorField {
        SpinorField::from_fn(grid, |x| {
            let r2: f64 = (0..3).map(|a| (x[a] - center[a]).powi(2)).sum();
            let g = (-r2 / (2.0 * width * width)).exp();
            [
                Complex64::new(g, 0.0),
                Complex64::new(0.0, 0.3 * g * x[0]),
                Complex64::new(0.1 * g, 0.0),
                Complex64::new(0.0, 0.0),
            ]
        })
    }

    fn lattice_lp(field: &SpinorField, p: f64) -> f64 {
        let dv = field.grid().cell_volume();
        field.modulus().iter().map(|v| v.powf(p)).sum::<f64>().powf(1.0 / p) * dv.powf(1.0 / p)
    }

    #[test]
    fn window_is_l2_normalized_and_supported() {
        for w in [Window::space(1.0).unwrap(), Window::time(2.5).unwrap(), Window::space(0.3).unwrap()] {
            assert_relative_eq!(w.l2_norm(), 1.0, max_relative = 1e-10);
            assert_eq!(w.value(w.radius()), 0.0);
            assert_eq!(w.value(w.radius() * 1.01), 0.0);
            assert_eq!(w.value(0.0), w.peak());
            assert_eq!(w.value(0.49 * w.radius()), w.peak());
        }
        assert!(Window::new(WindowShape::Bump, 2, 1.0).is_err());
    }

    #[test]
    fn zero_field_has_zero_norm() {
        let grid = GridSpec::new(16, 8.0).unwrap();
        let spec = AmalgamSpec::new(3.0, 2.0, Window::space(2.0).unwrap()).unwrap();
        let f = SpinorField::zeros(grid, Representation::Position);
        assert_eq!(amalgam_norm(&f, &spec).unwrap().value, 0.0);
    }

    #[test]
    fn fubini_identity_on_grid() {
        let grid = GridSpec::new(32, 16.0).unwrap();
        let f = smooth_field(grid, [0.5, -0.3, 0.2], 1.2);
        for p in [2.0, 3.0, 4.0, 8.0] {
            // Eight cells per window radius.
            let spec = AmalgamSpec::new(p, p, Window::space(4.0).unwrap()).unwrap();
            let got = amalgam_norm(&f, &spec).unwrap().value;
            let expected = spec.window.lp_norm(p) * lattice_lp(&f, p);
            assert_relative_eq!(got, expected, max_relative = 1e-3);
        }
    }

    #[test]
    fn resolution_guard() {
        let grid = GridSpec::new(16, 16.0).unwrap();
        let spec = AmalgamSpec::new(2.0, 2.0, Window::space(3.9).unwrap()).unwrap();
        assert!(matches!(GridAmalgam::new(grid, spec), Err(Error::Resolution(_))));
    }

    #[test]
    fn translation_invariance() {
        let grid = GridSpec::new(32, 16.0).unwrap();
        let f = smooth_field(grid, [0.0; 3], 1.0);
        let g = f.shift_lattice([3, -5, 2]);
        let spec = AmalgamSpec::new(4.0, 3.0, Window::space(2.0).unwrap()).unwrap();
        let a = amalgam_norm(&f, &spec).unwrap().value;
        let b = amalgam_norm(&g, &spec).unwrap().value;
        assert_relative_eq!(a, b, max_relative = 1e-10);
        let sup = AmalgamSpec::new(f64::INFINITY, 3.0, spec.window).unwrap();
        let a = amalgam_norm(&f, &sup).unwrap().value;
        let b = amalgam_norm(&g, &sup).unwrap().value;
        assert_relative_eq!(a, b, max_relative = 1e-12);
    }

    #[test]
    fn inclusion_bound_holds() {
        let grid = GridSpec::new(32, 16.0).unwrap();
        let window = Window::space(2.0).unwrap();
        let f = smooth_field(grid, [1.0, 0.0, 0.0], 0.8);
        let big = amalgam_norm(&f, &AmalgamSpec::new(6.0, 2.0, window).unwrap()).unwrap().value;
        let small = amalgam_norm(&f, &AmalgamSpec::new(4.0, 3.0, window).unwrap()).unwrap().value;
        let c = inclusion_constant(&window, 6.0, 2.0, 4.0, 3.0).unwrap();
        assert!(small <= c * big, "{small} > {c} * {big}");
        assert!(inclusion_constant(&window, 2.0, 2.0, 4.0, 3.0).is_err());
    }

    #[test]
    fn lorentz_examples() {
        assert_relative_eq!(lorentz_weak_norm(&[1.0; 9], 2.0), 3.0, max_relative = 1e-15);
        let v = [0.3, -2.0, 1.5, 0.1];
        let doubled: Vec<f64> = v.iter().map(|x| 2.0 * x).collect();
        assert_relative_eq!(lorentz_weak_norm(&doubled, 3.0), 2.0 * lorentz_weak_norm(&v, 3.0));
        let q = 3.0;
        let seq: Vec<f64> = (1..=500).map(|k| (k as f64).powf(-2.0 / q)).collect();
        assert_relative_eq!(lorentz_weak_norm(&seq, q), 1.0, max_relative = 1e-14);
    }

    #[test]
    fn weak_norm_dominated_by_strong() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let len = rng.gen_range(1..60);
            let q = rng.gen_range(0.5..8.0);
            let v: Vec<f64> = (0..len).map(|_| rng.gen_range(-3.0..3.0)).collect();
            assert!(lorentz_weak_norm(&v, q) <= sequence_lp_norm(&v, q) * (1.0 + 1e-12));
        }
    }

    fn constant_profile(r_max: f64, spacing: f64) -> RadialKernelProfile {
        let n = (r_max / spacing).round() as usize;
        let radii: Vec<f64> = (0..=n).map(|j| j as f64 * spacing).collect();
        let values = vec![Complex64::new(1.0, 0.0); radii.len()];
        RadialKernelProfile::from_values(radii, values).unwrap()
    }

    #[test]
    fn shell_integrals_of_constant_profile() {
        let prof = constant_profile(20.0, 0.05);
        let ball = shell_integral(&prof, 0.0, 3.0).unwrap().value;
        assert_relative_eq!(ball, 4.0 * PI / 3.0, max_relative = 1e-12);
        let shell = shell_integral(&prof, 10.0, 1.5).unwrap().value;
        assert_relative_eq!(shell, 4.0 * PI / 3.0 * (11f64.powi(3) - 9f64.powi(3)), max_relative = 1e-12);
        assert!(shell_integral(&prof, 1.0, 0.0).is_err());
    }

    #[test]
    fn radial_local_norm_of_constant_profile() {
        let prof = constant_profile(30.0, 0.05);
        let window = Window::space(1.0).unwrap();
        for p in [2.0, 3.0, 6.0] {
            let ra = RadialAmalgam::new(&prof, AmalgamSpec::new(p, 2.0, window).unwrap()).unwrap();
            for s in [0.0, 0.3, 2.0, 15.0] {
                assert_relative_eq!(ra.local_norm(s), window.lp_norm(p), max_relative = 1e-5);
            }
        }
        let sup = RadialAmalgam::new(&prof, AmalgamSpec::new(f64::INFINITY, 2.0, window).unwrap()).unwrap();
        assert_relative_eq!(sup.local_norm(4.0), window.peak(), max_relative = 1e-12);
    }

    #[test]
    fn radial_profile_disjoint_from_window() {
        let radii: Vec<f64> = (0..=400).map(|j| j as f64 * 0.05).collect();
        let values = radii
            .iter()
            .map(|&r| Complex64::new(if r >= 3.0 { 1.0 } else { 0.0 }, 0.0))
            .collect();
        let prof = RadialKernelProfile::from_values(radii, values).unwrap();
        let window = Window::space(1.0).unwrap();
        let ra = RadialAmalgam::new(&prof, AmalgamSpec::new(4.0, 2.0, window).unwrap()).unwrap();
        assert_eq!(ra.local_norm(0.0), 0.0);
        assert_eq!(ra.local_norm(1.5), 0.0);
        assert!(ra.local_norm(3.0) > 0.0);
    }

    #[test]
    fn radial_path_matches_grid_on_gaussian() {
        let width = 1.3;
        let gauss = |r: f64| (-r * r / (2.0 * width * width)).exp();
        let radii: Vec<f64> = (0..=1200).map(|j| j as f64 * 0.01).collect();
        let values = radii.iter().map(|&r| Complex64::new(gauss(r), 0.0)).collect();
        let prof = RadialKernelProfile::from_values(radii, values).unwrap();
        let grid = GridSpec::new(64, 16.0).unwrap();
        let modulus: Vec<f64> = (0..grid.len())
            .map(|idx| {
                let x = grid.position(idx);
                gauss((x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt())
            })
            .collect();
        // A lattice sup needs more cells per radius than a lattice sum.
        for (p, q, radius) in [(8.0, 6.0, 1.0), (2.0, 4.0, 1.0), (3.0, f64::INFINITY, 1.0), (f64::INFINITY, 3.0, 2.0)] {
            let spec = AmalgamSpec::new(p, q, Window::space(radius).unwrap()).unwrap();
            let radial = amalgam_norm_radial(&prof, &spec).unwrap().value;
            let grid_v = GridAmalgam::new(grid, spec).unwrap().norm_of_modulus(&modulus).unwrap().value;
            assert_relative_eq!(radial, grid_v, max_relative = 2e-2);
        }
    }

    #[test]
    fn time_amalgam_of_constant_series() {
        // A constant series on a long interval: W(p,p) Fubini in one dimension.
        let dt = 1.0 / 8.0;
        let series = vec![2.0; 801];
        let window = Window::time(1.0).unwrap();
        let spec = AmalgamSpec::new(3.0, 3.0, window).unwrap();
        let got = time_amalgam_norm(&series, dt, &spec, false).unwrap();
        let lattice_phi: f64 = (-8..=8).map(|m| window.value((m as f64 * dt).abs()).powi(3)).sum::<f64>() * dt;
        let expected = 2.0 * (801.0 * dt * lattice_phi).powf(1.0 / 3.0);
        assert_relative_eq!(got, expected, max_relative = 1e-12);
        // Eight samples per radius resolve the steep bump edge to a few 1e-3.
        assert_relative_eq!(lattice_phi, window.power_integral(3.0), max_relative = 5e-3);
    }

    #[test]
    fn weak_time_outer_at_most_strong() {
        let dt = 0.125;
        let series: Vec<f64> = (0..200).map(|j| 1.0 / (1.0 + j as f64 * dt)).collect();
        let spec = AmalgamSpec::new(2.0, 3.0, Window::time(1.0).unwrap()).unwrap();
        let weak = time_amalgam_norm(&series, dt, &spec, true).unwrap();
        let strong = time_amalgam_norm(&series, dt, &spec, false).unwrap();
        assert!(weak <= strong);
        assert!(weak > 0.0);
    }

    fn random_smooth(grid: GridSpec, rng: &mut ChaCha8Rng) -> SpinorField {
        let c: [f64; 3] = std::array::from_fn(|_| rng.gen_range(-2.0..2.0));
        let k: [f64; 3] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
        let pol: [Complex64; COMPONENTS] =
            std::array::from_fn(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        let width = rng.gen_range(0.8..2.0);
        SpinorField::from_fn(grid, |x| {
            let r2: f64 = (0..3).map(|a| (x[a] - c[a]).powi(2)).sum();
            let phase = (0..3).map(|a| k[a] * x[a]).sum::<f64>();
            let g = Complex64::from_polar((-r2 / (2.0 * width * width)).exp(), phase);
            pol.map(|p| p * g)
        })
    }

    #[test]
    fn holder_duality_on_random_pairs() {
        let grid = GridSpec::new(16, 16.0).unwrap();
        let spec = MixedNormSpec::new(
            AmalgamSpec::new(4.0, 4.0, Window::time(1.0).unwrap()).unwrap(),
            AmalgamSpec::new(8.0, 8.0, Window::space(4.0).unwrap()).unwrap(),
            false,
            1.0,
        )
        .unwrap();
        let dt = spec.time_step();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..3 {
            let f: Vec<SpinorField> = (0..6).map(|_| random_smooth(grid, &mut rng)).collect();
            let g: Vec<SpinorField> = (0..6).map(|_| random_smooth(grid, &mut rng)).collect();
            let rep = holder_duality_check(&f, &g, dt, &spec).unwrap();
            assert!(rep.holds, "{rep:?}");
            assert!(rep.constant >= 1.0);
        }
        let zero = vec![SpinorField::zeros(grid, Representation::Position); 6];
        let f: Vec<SpinorField> = (0..6).map(|_| random_smooth(grid, &mut rng)).collect();
        let rep = holder_duality_check(&f, &zero, dt, &spec).unwrap();
        assert_eq!(rep.lhs, 0.0);
        assert_eq!(rep.rhs, 0.0);
    }

    #[test]
    fn holder_with_l2_exponents_is_cauchy_schwarz() {
        let grid = GridSpec::new(16, 16.0).unwrap();
        let spec = MixedNormSpec::new(
            AmalgamSpec::new(2.0, 2.0, Window::time(1.0).unwrap()).unwrap(),
            AmalgamSpec::new(2.0, 2.0, Window::space(4.0).unwrap()).unwrap(),
            false,
            1.0,
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let f: Vec<SpinorField> = (0..5).map(|_| random_smooth(grid, &mut rng)).collect();
        let rep = holder_duality_check(&f, &f, spec.time_step(), &spec).unwrap();
        // F = G: the pairing is ‖F‖² and each norm squared is Σφ_x²·Σφ_t²·‖F‖².
        let dt = spec.time_step();
        let s_x = GridAmalgam::new(grid, spec.space).unwrap().lattice_l2_sq();
        let s_t: f64 = (-8..=8)
            .map(|m| spec.time.window.value((m as f64 * dt).abs()).powi(2))
            .sum::<f64>()
            * dt;
        assert_relative_eq!(rep.ratio * s_x * s_t, 1.0, max_relative = 1e-12);
        assert!(rep.holds);
    }

    #[test]
    fn mixed_norm_of_static_field_is_separable() {
        let grid = GridSpec::new(16, 16.0).unwrap();
        let f = smooth_field(grid, [0.0; 3], 1.5);
        let spec = MixedNormSpec::new(
            AmalgamSpec::new(3.0, 3.0, Window::time(1.0).unwrap()).unwrap(),
            AmalgamSpec::new(4.0, 2.0, Window::space(4.0).unwrap()).unwrap(),
            false,
            4.0,
        )
        .unwrap();
        let times = spec.time_samples();
        let rep = mixed_spacetime_norm(&times, |_| Ok(f.clone()), &spec).unwrap();
        let space = amalgam_norm(&f, &spec.space).unwrap().value;
        let dt = spec.time_step();
        let ones = vec![1.0; times.len()];
        let factor = time_amalgam_norm(&ones, dt, &spec.time, false).unwrap();
        assert_relative_eq!(rep.value, factor * space, max_relative = 1e-12);
        assert!(rep.warnings.is_empty());
        let short = MixedNormSpec { horizon: 2.0, ..spec };
        let rep = mixed_spacetime_norm(&short.time_samples(), |_| Ok(f.clone()), &short).unwrap();
        assert_eq!(rep.warnings.len(), 1);
    }
}
