//! Dirac and Pauli matrix algebra.
//!
//! The symbol of the free Dirac operator with unit mass is `α·ξ + β`. Because
//! the Dirac matrices anticommute, `(α·ξ + β)² = ⟨ξ⟩² I`, so the symbol has the
//! two eigenvalues `±⟨ξ⟩`, each of multiplicity two. The eigenprojections
//!
//! ```text
//! π±(ξ) = ½ (I ± (α·ξ + β) / ⟨ξ⟩)
//! ```
//!
//! are regular everywhere, including `ξ = 0` where they reduce to `(I ± β)/2`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// A 2×2 complex matrix (Pauli matrices).
pub type Matrix2 = [[Complex64; 2]; 2];

/// Which of the two spectral branches `±⟨ξ⟩` is meant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn as_f64(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sign::Plus => write!(f, "+"),
            Sign::Minus => write!(f, "-"),
        }
    }
}

/// Dense 4×4 complex matrix, row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Matrix4(pub [[Complex64; 4]; 4]);

impl Matrix4 {
    pub const fn zero() -> Self {
        Matrix4([[ZERO; 4]; 4])
    }

    pub fn identity() -> Self {
        Self::diagonal([ONE; 4])
    }

    pub fn diagonal(d: [Complex64; 4]) -> Self {
        let mut m = Self::zero();
        for (i, v) in d.into_iter().enumerate() {
            m.0[i][i] = v;
        }
        m
    }

    /// Block matrix `[[a, b], [c, d]]` from 2×2 blocks.
    pub fn from_blocks(a: &Matrix2, b: &Matrix2, c: &Matrix2, d: &Matrix2) -> Self {
        let mut m = Self::zero();
        for i in 0..2 {
            for j in 0..2 {
                m.0[i][j] = a[i][j];
                m.0[i][j + 2] = b[i][j];
                m.0[i + 2][j] = c[i][j];
                m.0[i + 2][j + 2] = d[i][j];
            }
        }
        m
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let mut m = *self;
        m.0.iter_mut().flatten().for_each(|v| *v *= s);
        m
    }

    pub fn scale_re(&self, s: f64) -> Self {
        self.scale(Complex64::new(s, 0.0))
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let mut m = Self::zero();
        for i in 0..4 {
            for j in 0..4 {
                m.0[i][j] = self.0[j][i].conj();
            }
        }
        m
    }

    pub fn trace(&self) -> Complex64 {
        (0..4).map(|i| self.0[i][i]).sum()
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn mul_vec(&self, v: &[Complex64; 4]) -> [Complex64; 4] {
        let mut out = [ZERO; 4];
        for (i, row) in self.0.iter().enumerate() {
            out[i] = row[0] * v[0] + row[1] * v[1] + row[2] * v[2] + row[3] * v[3];
        }
        out
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        (*self - self.adjoint()).max_abs() <= tol
    }
}

impl Default for Matrix4 {
    fn default() -> Self {
        Self::zero()
    }
}

impl Add for Matrix4 {
    type Output = Matrix4;
    fn add(mut self, rhs: Matrix4) -> Matrix4 {
        for (a, b) in self.0.iter_mut().flatten().zip(rhs.0.iter().flatten()) {
            *a += *b;
        }
        self
    }
}

impl Sub for Matrix4 {
    type Output = Matrix4;
    fn sub(mut self, rhs: Matrix4) -> Matrix4 {
        for (a, b) in self.0.iter_mut().flatten().zip(rhs.0.iter().flatten()) {
            *a -= *b;
        }
        self
    }
}

impl Neg for Matrix4 {
    type Output = Matrix4;
    fn neg(self) -> Matrix4 {
        self.scale_re(-1.0)
    }
}

impl Mul for Matrix4 {
    type Output = Matrix4;
    fn mul(self, rhs: Matrix4) -> Matrix4 {
        let mut m = Matrix4::zero();
        for i in 0..4 {
            for j in 0..4 {
                m.0[i][j] = (0..4).map(|k| self.0[i][k] * rhs.0[k][j]).sum();
            }
        }
        m
    }
}

/// A frequency `ξ ∈ R³` together with its Japanese bracket `⟨ξ⟩ = √(1+|ξ|²)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrequencyVector {
    xi: [f64; 3],
    bracket: f64,
}

impl FrequencyVector {
    pub fn new(xi: [f64; 3]) -> Self {
        let norm_sq = xi.iter().map(|v| v * v).sum::<f64>();
        FrequencyVector {
            xi,
            bracket: (1.0 + norm_sq).sqrt(),
        }
    }

    pub fn xi(&self) -> [f64; 3] {
        self.xi
    }

    pub fn norm(&self) -> f64 {
        self.xi.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn bracket(&self) -> f64 {
        self.bracket
    }
}

impl From<[f64; 3]> for FrequencyVector {
    fn from(xi: [f64; 3]) -> Self {
        FrequencyVector::new(xi)
    }
}

/// The Dirac matrices `α₁, α₂, α₃, β` in the standard (Dirac) representation,
/// and the Pauli matrices they are built from.
#[derive(Debug, Clone, PartialEq)]
pub struct DiracBasis {
    pub alpha: [Matrix4; 3],
    pub beta: Matrix4,
    pub pauli: [Matrix2; 3],
}

/// Builds the fixed Dirac basis. All entries are exactly `0`, `±1` or `±i`.
pub fn dirac_basis() -> DiracBasis {
    let zero2: Matrix2 = [[ZERO; 2]; 2];
    let id2: Matrix2 = [[ONE, ZERO], [ZERO, ONE]];
    let neg_id2: Matrix2 = [[-ONE, ZERO], [ZERO, -ONE]];
    let pauli: [Matrix2; 3] = [
        [[ZERO, ONE], [ONE, ZERO]],
        [[ZERO, -I], [I, ZERO]],
        [[ONE, ZERO], [ZERO, -ONE]],
    ];
    let alpha = [0, 1, 2].map(|j| Matrix4::from_blocks(&zero2, &pauli[j], &pauli[j], &zero2));
    let beta = Matrix4::from_blocks(&id2, &zero2, &zero2, &neg_id2);
    DiracBasis { alpha, beta, pauli }
}

/// The symbol `α·ξ + β` of the massive Dirac operator.
///
/// Written out directly rather than summed from the basis; the hot loops in
/// the propagators call this once per lattice point.
pub fn symbol(xi: &FrequencyVector) -> Matrix4 {
    let [x, y, z] = xi.xi;
    let c = |re: f64, im: f64| Complex64::new(re, im);
    // σ·ξ = [[z, x - iy], [x + iy, -z]]
    Matrix4([
        [ONE, ZERO, c(z, 0.0), c(x, -y)],
        [ZERO, ONE, c(x, y), c(-z, 0.0)],
        [c(z, 0.0), c(x, -y), -ONE, ZERO],
        [c(x, y), c(-z, 0.0), ZERO, -ONE],
    ])
}

/// Spectral projection `π±(ξ) = ½(I ± (α·ξ+β)/⟨ξ⟩)`.
pub fn projection(xi: &FrequencyVector, sign: Sign) -> Matrix4 {
    let s = sign.as_f64() / xi.bracket;
    let mut m = symbol(xi).scale_re(0.5 * s);
    for i in 0..4 {
        m.0[i][i] += 0.5;
    }
    m
}

/// The Dirac propagator symbol `e^{-it(α·ξ+β)} = e^{-it⟨ξ⟩}π₊(ξ) + e^{it⟨ξ⟩}π₋(ξ)`.
pub fn dirac_evolution(xi: &FrequencyVector, t: f64) -> Matrix4 {
    // e^{-itA} with A² = ⟨ξ⟩²I equals cos(t⟨ξ⟩) I - i sin(t⟨ξ⟩) A/⟨ξ⟩.
    let b = xi.bracket;
    let (sin, cos) = (t * b).sin_cos();
    let mut m = symbol(xi).scale(Complex64::new(0.0, -sin / b));
    for i in 0..4 {
        m.0[i][i] += cos;
    }
    m
}
