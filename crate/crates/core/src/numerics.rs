//! Shared numeric kernel: adaptive quadrature of spectral densities with an
//! analytic `c/ω²` tail, Brent root refinement, half-maximum widths and a
//! grid peak finder.

use std::collections::BinaryHeap;
use std::f64::consts::PI;

use crate::error::{Error, Result};

// Gauss-Kronrod 7/15 abscissae and weights (QUADPACK qk15).
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_3,
    0.949_107_912_342_758_524_526_189_684_047_9,
    0.864_864_423_359_769_072_789_712_788_640_9,
    0.741_531_185_599_394_439_863_864_773_280_8,
    0.586_087_235_467_691_130_294_144_845_693_0,
    0.405_845_151_377_397_166_906_606_412_076_9,
    0.207_784_955_007_898_467_600_689_403_773_2,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_97,
    0.063_092_092_629_978_553_290_700_663_189_20,
    0.104_790_010_322_250_183_839_876_322_541_5,
    0.140_653_259_715_525_918_745_189_590_510_2,
    0.169_004_726_639_267_902_826_583_426_598_6,
    0.190_350_578_064_785_409_913_256_402_421_0,
    0.204_432_940_075_298_892_414_161_999_234_6,
    0.209_482_141_084_727_828_012_999_174_891_7,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_1,
    0.279_705_391_489_276_667_901_467_771_423_8,
    0.381_830_050_505_118_944_950_369_775_489_0,
    0.417_959_183_673_469_387_755_102_040_816_3,
];

fn gauss_kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * pair;
        // odd Kronrod nodes coincide with the Gauss nodes
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// A spectral feature the integrator should resolve: a peak centred at
/// `center` with half width `width`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Feature {
    pub center: f64,
    pub width: f64,
}

/// Integrates a spectral density `S(ω)` in the form `(1/2π)∫S dω`.
///
/// The adaptive part covers `|ω| ≤ window`; beyond it the density is
/// replaced by its leading tail `tail_coefficient/ω²`, contributing
/// `2·tail_coefficient/window`.
#[derive(Debug, Clone)]
pub struct SpectralIntegral {
    window: f64,
    tail_coefficient: f64,
    rel_tol: f64,
    abs_tol: f64,
    even: bool,
    min_width: f64,
    max_panels: usize,
    features: Vec<Feature>,
}

impl SpectralIntegral {
    pub fn new(window: f64) -> Self {
        Self {
            window,
            tail_coefficient: 0.0,
            rel_tol: 1e-10,
            abs_tol: 1e-300,
            even: false,
            min_width: 1e-6,
            max_panels: 20_000,
            features: Vec::new(),
        }
    }

    pub fn tail(mut self, coefficient: f64) -> Self {
        self.tail_coefficient = coefficient;
        self
    }

    pub fn rel_tol(mut self, tol: f64) -> Self {
        self.rel_tol = tol;
        self
    }

    pub fn abs_tol(mut self, tol: f64) -> Self {
        self.abs_tol = tol;
        self
    }

    /// The density is even in ω; only `[0, window]` is integrated.
    pub fn even(mut self, even: bool) -> Self {
        self.even = even;
        self
    }

    /// Smallest feature scale seeded by the initial geometric panels.
    pub fn min_width(mut self, width: f64) -> Self {
        self.min_width = width;
        self
    }

    pub fn max_panels(mut self, n: usize) -> Self {
        self.max_panels = n;
        self
    }

    pub fn features(mut self, features: impl IntoIterator<Item = Feature>) -> Self {
        self.features.extend(features);
        self
    }

    fn breakpoints(&self) -> Vec<f64> {
        let w = self.window;
        let mut pts = vec![0.0, w];
        let mut x = self.min_width.min(w);
        while x < w {
            pts.push(x);
            x *= 2.0;
        }
        for feat in &self.features {
            let width = feat.width.abs().max(1e-300);
            for k in [-16.0, -4.0, -1.0, -0.25, 0.0, 0.25, 1.0, 4.0, 16.0] {
                let x = feat.center.abs() + k * width;
                if x > 0.0 && x < w {
                    pts.push(x);
                }
            }
        }
        if !self.even {
            let neg: Vec<f64> = pts.iter().filter(|&&x| x > 0.0).map(|x| -x).collect();
            pts.extend(neg);
        }
        pts.sort_by(f64::total_cmp);
        pts.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * w);
        pts
    }

    /// Returns `(1/2π)∫S(ω)dω`.
    pub fn integrate<F: Fn(f64) -> f64>(&self, density: F) -> Result<f64> {
        let raw = self.adaptive(&density)?;
        let inner = if self.even { 2.0 * raw } else { raw };
        Ok((inner + 2.0 * self.tail_coefficient / self.window) / (2.0 * PI))
    }

    fn adaptive<F: Fn(f64) -> f64>(&self, f: &F) -> Result<f64> {
        let pts = self.breakpoints();
        let mut heap = BinaryHeap::with_capacity(pts.len() * 4);
        let mut total = 0.0;
        let mut error = 0.0;
        for w in pts.windows(2) {
            let (value, err) = gauss_kronrod(f, w[0], w[1]);
            total += value;
            error += err;
            heap.push(Panel {
                a: w[0],
                b: w[1],
                value,
                error: err,
            });
        }
        if !total.is_finite() {
            return Err(Error::Quadrature {
                panels: heap.len(),
                error,
                value: total,
            });
        }
        while error > (self.rel_tol * total.abs()).max(self.abs_tol) {
            if heap.len() >= self.max_panels {
                return Err(Error::Quadrature {
                    panels: heap.len(),
                    error,
                    value: total,
                });
            }
            let worst = heap.pop().expect("non-empty panel heap");
            let mid = 0.5 * (worst.a + worst.b);
            if mid <= worst.a || mid >= worst.b {
                // panel cannot be split further in double precision
                return Err(Error::Quadrature {
                    panels: heap.len() + 1,
                    error,
                    value: total,
                });
            }
            let (v1, e1) = gauss_kronrod(f, worst.a, mid);
            let (v2, e2) = gauss_kronrod(f, mid, worst.b);
            total += v1 + v2 - worst.value;
            error += e1 + e2 - worst.error;
            heap.push(Panel {
                a: worst.a,
                b: mid,
                value: v1,
                error: e1,
            });
            heap.push(Panel {
                a: mid,
                b: worst.b,
                value: v2,
                error: e2,
            });
        }
        // re-sum to shed accumulated rounding from incremental updates
        Ok(heap.iter().map(|p| p.value).sum())
    }
}

/// `(1/2π)[∫_{|ω|≤W} S dω + 2c/W]` with the default tolerance.
pub fn integrate_spectrum<F: Fn(f64) -> f64>(
    density: F,
    tail_coefficient: f64,
    window: f64,
) -> Result<f64> {
    SpectralIntegral::new(window)
        .tail(tail_coefficient)
        .integrate(density)
}

/// Brent's method on a bracket with a sign change. `x_tol` bounds the final
/// bracket width.
pub fn try_find_root<F>(mut f: F, bracket: (f64, f64), x_tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let (mut a, mut b) = bracket;
    let mut fa = f(a)?;
    let mut fb = f(b)?;
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::NoRoot(format!(
            "no sign change on [{a}, {b}] (f = {fa:e}, {fb:e})"
        )));
    }
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;
    for _ in 0..500 {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = 2.0 * f64::EPSILON * b.abs() + 0.5 * x_tol;
        let m = 0.5 * (c - b);
        if m.abs() <= tol || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * m * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol.copysign(m) };
        fb = f(b)?;
    }
    Err(Error::Convergence(format!(
        "Brent iteration limit reached near {b}"
    )))
}

/// Infallible-function convenience wrapper around [`try_find_root`].
pub fn find_root<F: FnMut(f64) -> f64>(mut f: F, bracket: (f64, f64), x_tol: f64) -> Result<f64> {
    try_find_root(|x| Ok(f(x)), bracket, x_tol)
}

/// Full width at half maximum of an even density peaked at ω = 0.
///
/// `scale` is a characteristic frequency used to seed the outward scan. A
/// value above `S(0)` anywhere on the scan means the maximum is off-centre
/// and the width is undefined.
pub fn fwhm<F: Fn(f64) -> f64>(density: F, scale: f64) -> Result<f64> {
    let peak = density(0.0);
    if !(peak > 0.0) {
        return Err(Error::SplitSpectrum(format!(
            "non-positive density at the centre ({peak:e})"
        )));
    }
    let half = 0.5 * peak;
    let mut lo = 0.0;
    let mut x = 1e-8 * scale;
    loop {
        let v = density(x);
        if v > peak * (1.0 + 1e-12) {
            return Err(Error::SplitSpectrum(format!(
                "density {v:e} at ω = {x:e} exceeds the centre value {peak:e}"
            )));
        }
        if v < half {
            break;
        }
        lo = x;
        x *= 1.25;
        if x > 1e12 * scale {
            return Err(Error::NoRoot("density never falls to half maximum".into()));
        }
    }
    // keep scanning past the crossing for an off-centre maximum
    let mut y = x;
    while y < 1e3 * x.max(scale) {
        if density(y) > peak * (1.0 + 1e-12) {
            return Err(Error::SplitSpectrum(format!(
                "off-centre maximum beyond the half-maximum point near ω = {y:e}"
            )));
        }
        y *= 1.25;
    }
    let w_half = find_root(|w| density(w) - half, (lo, x), 1e-14 * x)?;
    Ok(2.0 * w_half)
}

/// A strict local maximum on a sampled spectrum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    pub omega: f64,
    pub value: f64,
    /// Height above the higher of the two bounding minima.
    pub prominence: f64,
}

impl Peak {
    pub fn relative_prominence(&self) -> f64 {
        self.prominence / self.value.abs()
    }

    /// A peak stands out from its surroundings by at least `min_relative`
    /// of its own height.
    pub fn is_resolved(&self, min_relative: f64) -> bool {
        self.relative_prominence() >= min_relative
    }
}

/// Default relative prominence for calling a sampled peak resolved.
pub const RESOLVED_PROMINENCE: f64 = 0.01;

/// Strict local maxima of `values` on `grid`, symmetric partners folded onto
/// `ω ≥ 0`.
pub fn peak_finder(grid: &[f64], values: &[f64]) -> Vec<Peak> {
    assert_eq!(grid.len(), values.len(), "grid and values differ in length");
    let n = values.len();
    let mut peaks = Vec::new();
    for i in 0..n {
        let left_lower = i == 0 || values[i] > values[i - 1];
        let right_lower = i + 1 == n || values[i] > values[i + 1];
        // sample endpoints only count when the grid is one-sided and starts at 0
        let interior = i > 0 && i + 1 < n;
        let origin = i == 0 && grid[0] == 0.0 && n > 1;
        if !(left_lower && right_lower && (interior || origin)) {
            continue;
        }
        if grid[i] < 0.0 {
            continue;
        }
        let mut left_min = values[i];
        for j in (0..i).rev() {
            if values[j] > values[i] {
                break;
            }
            left_min = left_min.min(values[j]);
        }
        let mut right_min = values[i];
        for v in &values[i + 1..] {
            if *v > values[i] {
                break;
            }
            right_min = right_min.min(*v);
        }
        let base = if origin { right_min } else { left_min.max(right_min) };
        peaks.push(Peak {
            omega: grid[i],
            value: values[i],
            prominence: values[i] - base,
        });
    }
    peaks
}
