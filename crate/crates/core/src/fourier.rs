//! Spinor fields on a periodic cube and the spectral operators acting on them.
//!
//! The box `[0, L)³` is sampled at `n³` points `x_j = j·L/n` (indices are
//! periodic, so `j ≥ n/2` stands for `j − n`). Frequencies form the lattice
//! `ξ_k = 2πk/L`, `k ∈ [−n/2, n/2)³`.
//!
//! The transform pair mirrors the continuous one with the `(2π)^{-3}` factor
//! on the inverse:
//!
//! ```text
//! f̂(ξ_k) = dx³ Σ_j f(x_j) e^{−iξ_k·x_j}          (≈ ∫ f e^{−ix·ξ} dx)
//! f(x_j) = L^{-3} Σ_k f̂(ξ_k) e^{iξ_k·x_j}         (= (2π)^{-3} Σ_k f̂ dξ³)
//! ```
//!
//! so the round trip is the identity and Parseval reads
//! `Σ|f|² dx³ = L^{-3} Σ|f̂|²`. The factor `L^{-3}` is the lattice cell weight
//! used by [`sobolev_norm`].
//!
//! # Binary field dump
//!
//! [`write_field`] and [`read_field`] use a 24-byte little-endian header
//! followed by the samples:
//!
//! | offset | type     | content                                        |
//! |--------|----------|------------------------------------------------|
//! | 0      | [u8; 8]  | magic `b"SPINFLD\0"`                           |
//! | 8      | u32      | `n`, points per axis                           |
//! | 12     | f64      | `L`, box length                                |
//! | 20     | u8       | representation: 0 position, 1 frequency        |
//! | 21     | u8       | component count (4)                            |
//! | 22     | u8       | precision: 1 = complex64, 2 = complex128       |
//! | 23     | u8       | reserved, 0                                    |
//!
//! The payload is row-major over `(i, j, k)` with `k` fastest; each grid
//! point stores its components in order, each as `(re, im)` little-endian
//! floats of the stated precision.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::io::{Read, Write};
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::spinor::{dirac_evolution, projection, symbol, FrequencyVector, Matrix4, Sign};
use crate::{Error, Result};

/// Number of spinor components.
pub const COMPONENTS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    n: usize,
    box_length: f64,
}

impl GridSpec {
    /// `n` must be even and at least 8. Powers of two are fastest, but any
    /// even size works with the mixed-radix transform.
    pub fn new(n: usize, box_length: f64) -> Result<Self> {
        if n < 8 || n % 2 != 0 {
            return Err(Error::InvalidParameter(format!(
                "grid size must be even and >= 8, got {n}"
            )));
        }
        if !(box_length > 0.0) || !box_length.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "box length must be positive, got {box_length}"
            )));
        }
        Ok(GridSpec { n, box_length })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn box_length(&self) -> f64 {
        self.box_length
    }

    pub fn spacing(&self) -> f64 {
        self.box_length / self.n as f64
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(3)
    }

    /// `L^{-3}`, the weight of one frequency lattice cell.
    pub fn lattice_weight(&self) -> f64 {
        self.box_length.powi(-3)
    }

    pub fn len(&self) -> usize {
        self.n * self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.n + j) * self.n + k
    }

    pub fn unravel(&self, idx: usize) -> [usize; 3] {
        let n = self.n;
        [idx / (n * n), (idx / n) % n, idx % n]
    }

    /// Signed lattice index in `[−n/2, n/2)`.
    pub fn signed(&self, j: usize) -> i64 {
        let n = self.n as i64;
        let j = j as i64;
        if j < n / 2 {
            j
        } else {
            j - n
        }
    }

    /// Position of a sample, taking the periodic image closest to the origin.
    pub fn position(&self, idx: usize) -> [f64; 3] {
        let h = self.spacing();
        self.unravel(idx).map(|j| self.signed(j) as f64 * h)
    }

    pub fn frequency(&self, idx: usize) -> FrequencyVector {
        let dk = 2.0 * PI / self.box_length;
        FrequencyVector::new(self.unravel(idx).map(|j| self.signed(j) as f64 * dk))
    }

    /// True when every lattice index satisfies `|k_j| ≤ n/3`.
    pub fn in_band(&self, idx: usize) -> bool {
        let cut = self.n as i64 / 3;
        self.unravel(idx).iter().all(|&j| self.signed(j).abs() <= cut)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Representation {
    Position,
    Frequency,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Inverse,
}

/// A four-component complex field on a periodic grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinorField {
    grid: GridSpec,
    representation: Representation,
    components: [Vec<Complex64>; COMPONENTS],
}

impl SpinorField {
    pub fn zeros(grid: GridSpec, representation: Representation) -> Self {
        let len = grid.len();
        SpinorField {
            grid,
            representation,
            components: std::array::from_fn(|_| vec![Complex64::new(0.0, 0.0); len]),
        }
    }

    /// Samples `f(x)` at every grid position (minimal-image coordinates).
    pub fn from_fn<F>(grid: GridSpec, f: F) -> Self
    where
        F: Fn([f64; 3]) -> [Complex64; COMPONENTS],
    {
        let mut field = Self::zeros(grid, Representation::Position);
        for idx in 0..grid.len() {
            let v = f(grid.position(idx));
            for c in 0..COMPONENTS {
                field.components[c][idx] = v[c];
            }
        }
        field
    }

    /// Builds a field from per-frequency values.
    pub fn from_frequency_fn<F>(grid: GridSpec, f: F) -> Self
    where
        F: Fn(&FrequencyVector) -> [Complex64; COMPONENTS],
    {
        let mut field = Self::zeros(grid, Representation::Frequency);
        for idx in 0..grid.len() {
            let v = f(&grid.frequency(idx));
            for c in 0..COMPONENTS {
                field.components[c][idx] = v[c];
            }
        }
        field
    }

    pub fn from_components(
        grid: GridSpec,
        representation: Representation,
        components: [Vec<Complex64>; COMPONENTS],
    ) -> Result<Self> {
        if components.iter().any(|c| c.len() != grid.len()) {
            return Err(Error::InvalidParameter(
                "component length does not match the grid".into(),
            ));
        }
        Ok(SpinorField {
            grid,
            representation,
            components,
        })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn representation(&self) -> Representation {
        self.representation
    }

    pub fn component(&self, c: usize) -> &[Complex64] {
        &self.components[c]
    }

    pub fn at(&self, idx: usize) -> [Complex64; COMPONENTS] {
        std::array::from_fn(|c| self.components[c][idx])
    }

    fn set(&mut self, idx: usize, v: [Complex64; COMPONENTS]) {
        for (c, val) in v.into_iter().enumerate() {
            self.components[c][idx] = val;
        }
    }

    pub fn to_frequency(&self) -> SpinorField {
        match self.representation {
            Representation::Frequency => self.clone(),
            Representation::Position => run_transform(self, Direction::Forward),
        }
    }

    pub fn to_position(&self) -> SpinorField {
        match self.representation {
            Representation::Position => self.clone(),
            Representation::Frequency => run_transform(self, Direction::Inverse),
        }
    }

    pub fn to_representation(&self, repr: Representation) -> SpinorField {
        match repr {
            Representation::Position => self.to_position(),
            Representation::Frequency => self.to_frequency(),
        }
    }

    /// Discrete `L²` norm, computed in whichever representation the field is in.
    pub fn l2_norm(&self) -> f64 {
        let weight = match self.representation {
            Representation::Position => self.grid.cell_volume(),
            Representation::Frequency => self.grid.lattice_weight(),
        };
        (self.sum_sq() * weight).sqrt()
    }

    fn sum_sq(&self) -> f64 {
        self.components
            .iter()
            .flat_map(|c| c.iter())
            .map(|v| v.norm_sqr())
            .sum()
    }

    /// Pointwise Euclidean norm `|f(x)|_{C⁴}` in the current representation.
    pub fn modulus(&self) -> Vec<f64> {
        (0..self.grid.len())
            .map(|idx| {
                self.components
                    .iter()
                    .map(|c| c[idx].norm_sqr())
                    .sum::<f64>()
                    .sqrt()
            })
            .collect()
    }

    pub fn scale(&self, s: Complex64) -> SpinorField {
        let mut out = self.clone();
        out.components
            .iter_mut()
            .flat_map(|c| c.iter_mut())
            .for_each(|v| *v *= s);
        out
    }

    /// Sum of two fields; `other` is converted to this field's representation.
    pub fn add(&self, other: &SpinorField) -> Result<SpinorField> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &SpinorField) -> Result<SpinorField> {
        self.zip_with(other, |a, b| a - b)
    }

    fn zip_with<F>(&self, other: &SpinorField, op: F) -> Result<SpinorField>
    where
        F: Fn(Complex64, Complex64) -> Complex64,
    {
        if self.grid != other.grid {
            return Err(Error::InvalidParameter("fields live on different grids".into()));
        }
        let other = other.to_representation(self.representation);
        let mut out = self.clone();
        for c in 0..COMPONENTS {
            for (a, b) in out.components[c].iter_mut().zip(&other.components[c]) {
                *a = op(*a, *b);
            }
        }
        Ok(out)
    }

    /// `L²` norm of the difference, relative to `‖self‖`.
    pub fn relative_distance(&self, other: &SpinorField) -> Result<f64> {
        let diff = self.sub(other)?;
        Ok(diff.l2_norm() / self.l2_norm())
    }

    /// Periodic shift by whole lattice steps: `g(x) = f(x − shift·dx)`.
    pub fn shift_lattice(&self, shift: [i64; 3]) -> SpinorField {
        let pos = self.to_position();
        let n = self.grid.n as i64;
        let mut out = SpinorField::zeros(self.grid, Representation::Position);
        for idx in 0..self.grid.len() {
            let [i, j, k] = self.grid.unravel(idx);
            let dst = [i as i64 + shift[0], j as i64 + shift[1], k as i64 + shift[2]]
                .map(|v| v.rem_euclid(n) as usize);
            out.set(self.grid.index(dst[0], dst[1], dst[2]), pos.at(idx));
        }
        out.to_representation(self.representation)
    }

    /// Zeroes every frequency with some `|k_j| > n/3`.
    pub fn band_limited(&self) -> SpinorField {
        let mut f = self.to_frequency();
        for idx in 0..self.grid.len() {
            if !self.grid.in_band(idx) {
                f.set(idx, [Complex64::new(0.0, 0.0); COMPONENTS]);
            }
        }
        f.to_representation(self.representation)
    }

    /// True when the out-of-band energy is below `rel_tol` of the total.
    pub fn is_band_limited(&self, rel_tol: f64) -> bool {
        let f = self.to_frequency();
        let mut outside = 0.0;
        let mut total = 0.0;
        for idx in 0..self.grid.len() {
            let e: f64 = f.at(idx).iter().map(|v| v.norm_sqr()).sum();
            total += e;
            if !self.grid.in_band(idx) {
                outside += e;
            }
        }
        outside <= rel_tol * rel_tol * total
    }

    /// Fraction of `|f|²` in the outer layer `max_j |x_j| > 0.4 L`.
    pub fn boundary_mass_fraction(&self) -> f64 {
        let pos = self.to_position();
        let edge = 0.4 * self.grid.box_length;
        let mut near = 0.0;
        let mut total = 0.0;
        for idx in 0..self.grid.len() {
            let e: f64 = pos.at(idx).iter().map(|v| v.norm_sqr()).sum();
            total += e;
            if self.grid.position(idx).iter().any(|x| x.abs() > edge) {
                near += e;
            }
        }
        if total > 0.0 {
            near / total
        } else {
            0.0
        }
    }
}

/// Cached 1-D transforms for one axis length.
struct FftEngine {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

fn engine(n: usize) -> Arc<FftEngine> {
    static ENGINES: OnceLock<Mutex<HashMap<usize, Arc<FftEngine>>>> = OnceLock::new();
    let map = ENGINES.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = map.lock().unwrap_or_else(|e| e.into_inner());
    guard
        .entry(n)
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            Arc::new(FftEngine {
                forward: planner.plan_fft_forward(n),
                inverse: planner.plan_fft_inverse(n),
            })
        })
        .clone()
}

/// Unnormalized in-place 3-D DFT of an `n³` row-major array.
pub(crate) fn fft3(data: &mut [Complex64], n: usize, direction: Direction) {
    let eng = engine(n);
    let plan = match direction {
        Direction::Forward => &eng.forward,
        Direction::Inverse => &eng.inverse,
    };
    let mut scratch = vec![Complex64::new(0.0, 0.0); plan.get_inplace_scratch_len()];
    // Last axis is contiguous.
    plan.process_with_scratch(data, &mut scratch);
    let mut line = vec![Complex64::new(0.0, 0.0); n];
    // Middle axis.
    for i in 0..n {
        for k in 0..n {
            for j in 0..n {
                line[j] = data[(i * n + j) * n + k];
            }
            plan.process_with_scratch(&mut line, &mut scratch);
            for j in 0..n {
                data[(i * n + j) * n + k] = line[j];
            }
        }
    }
    // First axis.
    for j in 0..n {
        for k in 0..n {
            for i in 0..n {
                line[i] = data[(i * n + j) * n + k];
            }
            plan.process_with_scratch(&mut line, &mut scratch);
            for i in 0..n {
                data[(i * n + j) * n + k] = line[i];
            }
        }
    }
}

fn run_transform(field: &SpinorField, direction: Direction) -> SpinorField {
    let grid = field.grid;
    let scale = match direction {
        Direction::Forward => grid.cell_volume(),
        Direction::Inverse => grid.lattice_weight(),
    };
    let mut out = field.clone();
    for c in out.components.iter_mut() {
        fft3(c, grid.n, direction);
        c.iter_mut().for_each(|v| *v *= scale);
    }
    out.representation = match direction {
        Direction::Forward => Representation::Frequency,
        Direction::Inverse => Representation::Position,
    };
    out
}

/// Componentwise 3-D transform. The input must be in the representation the
/// direction starts from (position for forward, frequency for inverse).
pub fn transform(field: &SpinorField, direction: Direction) -> Result<SpinorField> {
    let expected = match direction {
        Direction::Forward => Representation::Position,
        Direction::Inverse => Representation::Frequency,
    };
    if field.representation != expected {
        return Err(Error::InvalidParameter(format!(
            "{direction:?} transform expects a field in {expected:?} representation"
        )));
    }
    Ok(run_transform(field, direction))
}

/// Left-multiplies the frequency data at each lattice point by `m(ξ)`. The
/// result comes back in the input's representation.
pub fn apply_multiplier<M>(field: &SpinorField, m: M) -> SpinorField
where
    M: Fn(&FrequencyVector) -> Matrix4,
{
    let mut f = field.to_frequency();
    for idx in 0..f.grid.len() {
        let xi = f.grid.frequency(idx);
        let v = m(&xi).mul_vec(&f.at(idx));
        f.set(idx, v);
    }
    f.to_representation(field.representation)
}

/// Multiplies every component by the scalar symbol `m(ξ)`.
pub fn apply_scalar_multiplier<M>(field: &SpinorField, m: M) -> SpinorField
where
    M: Fn(&FrequencyVector) -> Complex64,
{
    let mut f = field.to_frequency();
    for idx in 0..f.grid.len() {
        let s = m(&f.grid.frequency(idx));
        for c in f.components.iter_mut() {
            c[idx] *= s;
        }
    }
    f.to_representation(field.representation)
}

/// `π±(D) f`.
pub fn project(field: &SpinorField, sign: Sign) -> SpinorField {
    apply_multiplier(field, |xi| projection(xi, sign))
}

/// The free Dirac flow `e^{−it(D+β)} f`.
pub fn propagate_dirac(field: &SpinorField, t: f64) -> SpinorField {
    apply_multiplier(field, |xi| dirac_evolution(xi, t))
}

/// The half Klein–Gordon flow `e^{∓it⟨D⟩} g`, applied to each component.
pub fn propagate_half_kg(field: &SpinorField, t: f64, sign: Sign) -> SpinorField {
    let s = sign.as_f64();
    apply_scalar_multiplier(field, |xi| Complex64::from_polar(1.0, -s * t * xi.bracket()))
}

/// `(Σ_ξ ⟨ξ⟩^{2σ} |f̂(ξ)|² L^{-3})^{1/2}`.
pub fn sobolev_norm(field: &SpinorField, sigma: f64) -> f64 {
    let f = field.to_frequency();
    let grid = f.grid;
    let sum: f64 = (0..grid.len())
        .map(|idx| {
            let w = grid.frequency(idx).bracket().powf(2.0 * sigma);
            let e: f64 = f.at(idx).iter().map(|v| v.norm_sqr()).sum();
            w * e
        })
        .sum();
    (sum * grid.lattice_weight()).sqrt()
}

/// Relative residual of the Dirac equation `−i∂_t u + (D+β)u = 0` for
/// `u = e^{−it(D+β)} f`, with `∂_t` replaced by a centered difference of
/// step `dt`. Normalized by `‖f‖_{L²}`.
///
/// Everything is evaluated on the frequency lattice; by Parseval this is the
/// same as the position-space `L²` norm.
pub fn pde_residual(field: &SpinorField, t: f64, dt: f64) -> Result<f64> {
    if !(dt > 0.0) || !dt.is_finite() || !t.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "need finite t and dt > 0 (t = {t}, dt = {dt})"
        )));
    }
    if !field.is_band_limited(1e-13) {
        return Err(Error::InvalidParameter(
            "residual check needs band-limited data (top third of frequencies zero)".into(),
        ));
    }
    let f = field.to_frequency();
    let grid = f.grid;
    let i = Complex64::i();
    let mut sum = 0.0;
    for idx in 0..grid.len() {
        let v = f.at(idx);
        if v.iter().all(|c| c.norm_sqr() == 0.0) {
            continue;
        }
        let xi = grid.frequency(idx);
        let ahead = dirac_evolution(&xi, t + dt).mul_vec(&v);
        let behind = dirac_evolution(&xi, t - dt).mul_vec(&v);
        let now = dirac_evolution(&xi, t).mul_vec(&v);
        let h_now = symbol(&xi).mul_vec(&now);
        for c in 0..COMPONENTS {
            let r = -i * (ahead[c] - behind[c]) / (2.0 * dt) + h_now[c];
            sum += r.norm_sqr();
        }
    }
    let norm = (sum * grid.lattice_weight()).sqrt();
    Ok(norm / f.l2_norm())
}

/// Precision of the binary payload.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Precision {
    Complex64,
    Complex128,
}

const MAGIC: &[u8; 8] = b"SPINFLD\0";

pub fn write_field<W: Write>(field: &SpinorField, precision: Precision, mut out: W) -> Result<()> {
    let grid = field.grid;
    let n = u32::try_from(grid.n).map_err(|_| Error::Format("grid too large".into()))?;
    out.write_all(MAGIC)?;
    out.write_all(&n.to_le_bytes())?;
    out.write_all(&grid.box_length.to_le_bytes())?;
    let repr = match field.representation {
        Representation::Position => 0u8,
        Representation::Frequency => 1u8,
    };
    let prec = match precision {
        Precision::Complex64 => 1u8,
        Precision::Complex128 => 2u8,
    };
    out.write_all(&[repr, COMPONENTS as u8, prec, 0])?;
    let mut buf = Vec::with_capacity(grid.len() * COMPONENTS * 16);
    for idx in 0..grid.len() {
        for v in field.at(idx) {
            match precision {
                Precision::Complex64 => {
                    buf.extend_from_slice(&(v.re as f32).to_le_bytes());
                    buf.extend_from_slice(&(v.im as f32).to_le_bytes());
                }
                Precision::Complex128 => {
                    buf.extend_from_slice(&v.re.to_le_bytes());
                    buf.extend_from_slice(&v.im.to_le_bytes());
                }
            }
        }
    }
    out.write_all(&buf)?;
    Ok(())
}

pub fn read_field<R: Read>(mut input: R) -> Result<SpinorField> {
    let mut header = [0u8; 24];
    input.read_exact(&mut header)?;
    if &header[0..8] != MAGIC {
        return Err(Error::Format("bad magic, not a spinor field dump".into()));
    }
    let n = u32::from_le_bytes(header[8..12].try_into().unwrap()) as usize;
    let box_length = f64::from_le_bytes(header[12..20].try_into().unwrap());
    let representation = match header[20] {
        0 => Representation::Position,
        1 => Representation::Frequency,
        other => return Err(Error::Format(format!("unknown representation tag {other}"))),
    };
    if header[21] as usize != COMPONENTS {
        return Err(Error::Format(format!(
            "expected {COMPONENTS} components, found {}",
            header[21]
        )));
    }
    let width = match header[22] {
        1 => 4,
        2 => 8,
        other => return Err(Error::Format(format!("unknown precision tag {other}"))),
    };
    let grid = GridSpec::new(n, box_length)?;
    let mut payload = vec![0u8; grid.len() * COMPONENTS * 2 * width];
    input.read_exact(&mut payload)?;
    let read = |off: usize| -> f64 {
        if width == 4 {
            f32::from_le_bytes(payload[off..off + 4].try_into().unwrap()) as f64
        } else {
            f64::from_le_bytes(payload[off..off + 8].try_into().unwrap())
        }
    };
    let mut field = SpinorField::zeros(grid, representation);
    for idx in 0..grid.len() {
        for c in 0..COMPONENTS {
            let off = (idx * COMPONENTS + c) * 2 * width;
            field.components[c][idx] = Complex64::new(read(off), read(off + width));
        }
    }
    Ok(field)
}
