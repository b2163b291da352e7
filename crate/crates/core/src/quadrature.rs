//! One-dimensional quadrature rules shared by the kernel and norm code.
//!
//! Two rules are enough here: a 21-point Gauss–Kronrod rule used on panels of
//! bounded phase, and an exp-sinh (double exponential) rule for integrals
//! over `[0, ∞)` with algebraic or exponential decay.

use num_complex::Complex64;

/// Integral value together with an absolute error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: Complex64,
    pub abs_err: f64,
}

impl Estimate {
    pub const ZERO: Estimate = Estimate {
        value: Complex64::new(0.0, 0.0),
        abs_err: 0.0,
    };
}

impl std::ops::Add for Estimate {
    type Output = Estimate;
    fn add(self, rhs: Estimate) -> Estimate {
        Estimate {
            value: self.value + rhs.value,
            abs_err: self.abs_err + rhs.abs_err,
        }
    }
}

impl std::ops::AddAssign for Estimate {
    fn add_assign(&mut self, rhs: Estimate) {
        *self = *self + rhs;
    }
}

impl std::iter::Sum for Estimate {
    fn sum<I: Iterator<Item = Estimate>>(iter: I) -> Estimate {
        iter.fold(Estimate::ZERO, |a, b| a + b)
    }
}

// Kronrod abscissae on [0, 1]; odd indices are the embedded 10-point Gauss nodes.
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

/// 21-point Gauss–Kronrod rule on `[a, b]`. The error estimate is the
/// difference to the embedded 10-point Gauss rule, which is pessimistic for
/// smooth integrands.
pub fn gauss_kronrod21<F>(mut f: F, a: f64, b: f64) -> Estimate
where
    F: FnMut(f64) -> Complex64,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[10];
    let mut gauss = Complex64::new(0.0, 0.0);
    for j in 0..10 {
        let dx = half * XGK[j];
        let s = f(center - dx) + f(center + dx);
        kronrod += s * WGK[j];
        if j % 2 == 1 {
            gauss += s * WG[j / 2];
        }
    }
    Estimate {
        value: kronrod * half,
        abs_err: ((kronrod - gauss) * half).norm(),
    }
}

/// Composite Gauss–Kronrod over `panels` equal sub-intervals of `[a, b]`.
pub fn composite_gk21<F>(mut f: F, a: f64, b: f64, panels: usize) -> Estimate
where
    F: FnMut(f64) -> Complex64,
{
    let panels = panels.max(1);
    let h = (b - a) / panels as f64;
    (0..panels)
        .map(|i| {
            let lo = a + i as f64 * h;
            let hi = if i + 1 == panels { b } else { lo + h };
            gauss_kronrod21(&mut f, lo, hi)
        })
        .sum()
}

/// Real-valued convenience wrapper around [`composite_gk21`].
pub fn integrate_real<F>(mut f: F, a: f64, b: f64, panels: usize) -> f64
where
    F: FnMut(f64) -> f64,
{
    composite_gk21(|x| Complex64::new(f(x), 0.0), a, b, panels).value.re
}

/// Exp-sinh rule for `∫₀^∞ f(s) ds`.
///
/// Uses the substitution `s = exp(π/2 · sinh τ)` with trapezoidal steps in `τ`,
/// halving the step until two successive levels agree to `rel_tol` (or the
/// level cap is hit). The error estimate is the last level difference.
pub fn exp_sinh<F>(mut f: F, rel_tol: f64) -> Estimate
where
    F: FnMut(f64) -> Complex64,
{
    const MAX_LEVEL: usize = 7;
    const HALF_PI: f64 = std::f64::consts::FRAC_PI_2;
    // |τ| ≤ 4.5 keeps s within roughly [1e-58, 1e58].
    const TAU_MAX: f64 = 4.5;

    let mut node = |tau: f64| -> Complex64 {
        let s = (HALF_PI * tau.sinh()).exp();
        let w = HALF_PI * tau.cosh() * s;
        let v = f(s) * w;
        if v.re.is_finite() && v.im.is_finite() {
            v
        } else {
            Complex64::new(0.0, 0.0)
        }
    };

    let mut h = 0.5;
    let mut sum = node(0.0);
    let mut k = 1;
    while k as f64 * h <= TAU_MAX {
        let tau = k as f64 * h;
        sum += node(tau) + node(-tau);
        k += 1;
    }
    let mut estimate = sum * h;
    let mut err = f64::INFINITY;
    for _ in 0..MAX_LEVEL {
        h *= 0.5;
        // Only the odd multiples of the new step are new nodes.
        let mut k = 1;
        while k as f64 * h <= TAU_MAX {
            let tau = k as f64 * h;
            sum += node(tau) + node(-tau);
            k += 2;
        }
        let next = sum * h;
        err = (next - estimate).norm();
        estimate = next;
        if err <= rel_tol * estimate.norm() || err < 1e-300 {
            break;
        }
    }
    Estimate {
        value: estimate,
        abs_err: err,
    }
}

/// 5-point Gauss–Legendre nodes and weights on `[-1, 1]`.
pub const GL5: [(f64, f64); 5] = [
    (-0.906_179_845_938_664_0, 0.236_926_885_056_189_1),
    (-0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (0.0, 0.568_888_888_888_888_9),
    (0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (0.906_179_845_938_664_0, 0.236_926_885_056_189_1),
];

/// Nodes and weights of composite 5-point Gauss–Legendre on `[a, b]`.
pub fn gauss_legendre_panels(a: f64, b: f64, panels: usize) -> Vec<(f64, f64)> {
    let panels = panels.max(1);
    let h = (b - a) / panels as f64;
    let mut out = Vec::with_capacity(5 * panels);
    for i in 0..panels {
        let mid = a + (i as f64 + 0.5) * h;
        out.extend(GL5.iter().map(|&(x, w)| (mid + 0.5 * h * x, 0.5 * h * w)));
    }
    out
}

/// Trapezoidal rule over sorted, possibly non-uniform nodes.
pub fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    debug_assert_eq!(x.len(), y.len());
    x.windows(2)
        .zip(y.windows(2))
        .map(|(xs, ys)| 0.5 * (xs[1] - xs[0]) * (ys[0] + ys[1]))
        .sum()
}
