//! Quaternions, stereographic projection and closed curves on the unit 3-sphere.
//!
//! Points of `S3` are unit quaternions `w + x i + y j + z k`. Curves are
//! stored as complex trigonometric polynomials in the parameter `s`, so
//! evaluation and differentiation are exact for the stored coefficients.

use std::f64::consts::TAU;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Minimum chordal distance between a point and the projection pole.
pub const EPS_POLE: f64 = 1e-6;
/// Default minimum chordal distance between distinct link components.
pub const DEFAULT_SEPARATION: f64 = 1e-3;
/// Interpolated points with a smaller norm make a curve degenerate.
pub const MIN_CURVE_NORM: f64 = 1e-6;
/// Fewest samples accepted by [`CurveS3::from_samples`].
pub const MIN_SAMPLES: usize = 8;

/// Samples per component used when scanning a link for separation.
const SEPARATION_SCAN: usize = 256;
/// Smallest resampling density used when projecting an interpolant onto the sphere.
const MIN_DENSE_SAMPLES: usize = 256;

pub type Vec3 = [f64; 3];

#[inline]
pub fn dot3(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub fn cross3(a: Vec3, b: Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

#[inline]
pub fn norm3(a: Vec3) -> f64 {
    dot3(a, a).sqrt()
}

#[inline]
pub fn sub3(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

#[inline]
pub fn scale3(a: Vec3, k: f64) -> Vec3 {
    [a[0] * k, a[1] * k, a[2] * k]
}

/// A quaternion, i.e. a vector of R4 in the basis `1, i, j, k`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Quat {
    pub w: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Quat {
    pub const ZERO: Quat = Quat::new(0.0, 0.0, 0.0, 0.0);
    pub const ONE: Quat = Quat::new(1.0, 0.0, 0.0, 0.0);
    pub const I: Quat = Quat::new(0.0, 1.0, 0.0, 0.0);
    pub const J: Quat = Quat::new(0.0, 0.0, 1.0, 0.0);
    pub const K: Quat = Quat::new(0.0, 0.0, 0.0, 1.0);

    pub const fn new(w: f64, x: f64, y: f64, z: f64) -> Self {
        Self { w, x, y, z }
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        Self::new(a[0], a[1], a[2], a[3])
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.w, self.x, self.y, self.z]
    }

    /// Pure quaternion with imaginary part `v`.
    pub fn pure(v: Vec3) -> Self {
        Self::new(0.0, v[0], v[1], v[2])
    }

    pub fn imag(self) -> Vec3 {
        [self.x, self.y, self.z]
    }

    pub fn conj(self) -> Self {
        Self::new(self.w, -self.x, -self.y, -self.z)
    }

    /// Euclidean dot product in R4.
    pub fn dot(self, other: Quat) -> f64 {
        self.w * other.w + self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn norm_sqr(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn scale(self, k: f64) -> Self {
        Self::new(self.w * k, self.x * k, self.y * k, self.z * k)
    }

    pub fn normalized(self) -> Self {
        self.scale(1.0 / self.norm())
    }

    pub fn is_unit(self, eps: f64) -> bool {
        (self.norm() - 1.0).abs() <= eps
    }

    pub fn distance(self, other: Quat) -> f64 {
        (self - other).norm()
    }
}

/// Hamilton product.
impl Mul for Quat {
    type Output = Quat;

    #[inline]
    fn mul(self, b: Quat) -> Quat {
        let a = self;
        Quat::new(
            a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
            a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
            a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
            a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w,
        )
    }
}

impl Add for Quat {
    type Output = Quat;

    fn add(self, b: Quat) -> Quat {
        Quat::new(self.w + b.w, self.x + b.x, self.y + b.y, self.z + b.z)
    }
}

impl Sub for Quat {
    type Output = Quat;

    fn sub(self, b: Quat) -> Quat {
        Quat::new(self.w - b.w, self.x - b.x, self.y - b.y, self.z - b.z)
    }
}

impl Neg for Quat {
    type Output = Quat;

    fn neg(self) -> Quat {
        self.scale(-1.0)
    }
}

/// Stereographic projection of `S3 - {p}` onto the 3-space through the
/// origin orthogonal to `p`.
///
/// Coordinates are taken in the basis `p i, p j, p k` (the standard basis
/// transported by left translation), which makes the result equal to
/// `pr_1(conj(p) v)`. The antipode `-p` maps to the origin and the great
/// sphere orthogonal to `p` is fixed.
pub fn stereo_from_pole(p: Quat, v: Quat) -> Result<Vec3> {
    let distance = v.distance(p);
    if distance < EPS_POLE {
        return Err(Error::PoleTooClose {
            distance,
            min: EPS_POLE,
        });
    }
    let w = p.conj() * v;
    let denom = 1.0 - w.w;
    Ok(scale3(w.imag(), 1.0 / denom))
}

/// Stereographic projection from the pole `1`.
pub fn stereo(v: Quat) -> Result<Vec3> {
    stereo_from_pole(Quat::ONE, v)
}

/// Inverse of [`stereo`]: lifts a point of R3 to the unit 3-sphere.
pub fn inverse_stereo(u: Vec3) -> Quat {
    let r2 = dot3(u, u);
    let d = 1.0 / (r2 + 1.0);
    Quat::new((r2 - 1.0) * d, 2.0 * u[0] * d, 2.0 * u[1] * d, 2.0 * u[2] * d)
}

/// Direction in which a component is traversed relative to its stored
/// parametrization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Orientation {
    #[default]
    Positive,
    Negative,
}

impl Orientation {
    pub fn sign(self) -> f64 {
        match self {
            Orientation::Positive => 1.0,
            Orientation::Negative => -1.0,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Orientation::Positive => Orientation::Negative,
            Orientation::Negative => Orientation::Positive,
        }
    }

    pub fn from_sign(sign: i32) -> Option<Self> {
        match sign {
            1 => Some(Orientation::Positive),
            -1 => Some(Orientation::Negative),
            _ => None,
        }
    }

    pub fn as_i32(self) -> i32 {
        match self {
            Orientation::Positive => 1,
            Orientation::Negative => -1,
        }
    }
}

/// A smooth closed curve on `S3` stored as a trigonometric polynomial.
///
/// `coeffs[k + degree]` holds the complex coefficient of `e^{iks}` for each
/// of the four coordinates. The curve is `c(s) = P(σ s)` where `P` is the
/// stored polynomial and `σ = ±1` the orientation.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveS3 {
    coeffs: Vec<[Complex64; 4]>,
    orientation: Orientation,
}

impl CurveS3 {
    /// Builds a curve from `M` equispaced samples on `S3`.
    ///
    /// Samples are radially projected to the sphere, interpolated by a
    /// trigonometric polynomial of degree `M/2`, then resampled densely,
    /// renormalized pointwise and interpolated once more.
    pub fn from_samples(points: &[Quat], orientation: Orientation) -> Result<Self> {
        if points.len() < MIN_SAMPLES {
            return Err(Error::TooFewSamples {
                got: points.len(),
                min: MIN_SAMPLES,
            });
        }
        let mut unit = Vec::with_capacity(points.len());
        for p in points {
            let norm = p.norm();
            if norm < MIN_CURVE_NORM {
                return Err(Error::DegenerateCurve { norm });
            }
            unit.push(p.scale(1.0 / norm));
        }
        let coarse = interpolate(&unit);

        let m = unit.len();
        let dense_count = m * (MIN_DENSE_SAMPLES.div_ceil(m)).max(4);
        let mut dense = Vec::with_capacity(dense_count);
        for j in 0..dense_count {
            let q = eval_poly(&coarse, TAU * j as f64 / dense_count as f64);
            let norm = q.norm();
            if norm < MIN_CURVE_NORM {
                return Err(Error::DegenerateCurve { norm });
            }
            dense.push(q.scale(1.0 / norm));
        }
        Ok(Self {
            coeffs: interpolate(&dense),
            orientation,
        })
    }

    /// Builds a curve from samples in R3, lifted through [`inverse_stereo`].
    pub fn from_r3_samples(points: &[Vec3], orientation: Orientation) -> Result<Self> {
        let lifted: Vec<Quat> = points.iter().map(|&u| inverse_stereo(u)).collect();
        Self::from_samples(&lifted, orientation)
    }

    /// Wraps existing coefficients without resampling. `coeffs` must have
    /// odd length `2K + 1`, ordered from wave number `-K` to `K`.
    pub fn from_coeffs(coeffs: Vec<[Complex64; 4]>, orientation: Orientation) -> Option<Self> {
        if coeffs.len() % 2 == 0 {
            return None;
        }
        Some(Self {
            coeffs,
            orientation,
        })
    }

    /// Maximal wave number `K`.
    pub fn degree(&self) -> usize {
        self.coeffs.len() / 2
    }

    pub fn coeffs(&self) -> &[[Complex64; 4]] {
        &self.coeffs
    }

    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    pub fn eval(&self, s: f64) -> Quat {
        eval_poly(&self.coeffs, self.orientation.sign() * s)
    }

    pub fn eval_deriv(&self, s: f64) -> Quat {
        let sign = self.orientation.sign();
        eval_poly_deriv(&self.coeffs, sign * s).scale(sign)
    }

    /// `n` equispaced points `c(2πj/n)`.
    pub fn sample(&self, n: usize) -> Vec<Quat> {
        (0..n).map(|j| self.eval(TAU * j as f64 / n as f64)).collect()
    }

    /// Same polynomial, opposite orientation.
    pub fn reversed(&self) -> Self {
        Self {
            coeffs: self.coeffs.clone(),
            orientation: self.orientation.flipped(),
        }
    }

    /// Reflection through the hyperplane orthogonal to coordinate `coord`
    /// (0 = `w`, 1 = `x`, 2 = `y`, 3 = `z`).
    pub fn reflected(&self, coord: usize) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .map(|c| {
                let mut c = *c;
                c[coord] = -c[coord];
                c
            })
            .collect();
        Self {
            coeffs,
            orientation: self.orientation,
        }
    }

    /// Image under left multiplication `v -> q v`, an isometry of `S3`
    /// when `q` is a unit quaternion.
    pub fn left_multiplied(&self, q: Quat) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .map(|c| {
                let re = q * Quat::new(c[0].re, c[1].re, c[2].re, c[3].re);
                let im = q * Quat::new(c[0].im, c[1].im, c[2].im, c[3].im);
                [
                    Complex64::new(re.w, im.w),
                    Complex64::new(re.x, im.x),
                    Complex64::new(re.y, im.y),
                    Complex64::new(re.z, im.z),
                ]
            })
            .collect();
        Self {
            coeffs,
            orientation: self.orientation,
        }
    }
}

/// Trigonometric interpolant of equispaced samples. For even `M` the
/// Nyquist coefficient is split evenly between `±M/2`.
fn interpolate(points: &[Quat]) -> Vec<[Complex64; 4]> {
    let m = points.len();
    let fft = FftPlanner::<f64>::new().plan_fft_forward(m);
    let mut spectra: Vec<Vec<Complex64>> = (0..4)
        .map(|c| {
            points
                .iter()
                .map(|p| Complex64::new(p.to_array()[c], 0.0))
                .collect()
        })
        .collect();
    for spectrum in &mut spectra {
        fft.process(spectrum);
    }
    let degree = m / 2;
    let inv = 1.0 / m as f64;
    let mut coeffs = vec![[Complex64::default(); 4]; 2 * degree + 1];
    for (slot, k) in (-(degree as isize)..=degree as isize).enumerate() {
        let idx = k.rem_euclid(m as isize) as usize;
        let nyquist = m % 2 == 0 && k.unsigned_abs() == degree;
        let weight = if nyquist { 0.5 * inv } else { inv };
        for c in 0..4 {
            coeffs[slot][c] = spectra[c][idx] * weight;
        }
    }
    coeffs
}

fn eval_terms(coeffs: &[[Complex64; 4]], s: f64, derivative: bool) -> Quat {
    let degree = (coeffs.len() / 2) as isize;
    let s = s.rem_euclid(TAU);
    let (sin, cos) = s.sin_cos();
    let step = Complex64::new(cos, sin);
    let mut acc = [0.0f64; 4];
    let mut phase = Complex64::new(1.0, 0.0);
    for k in 0..=degree {
        let plus = &coeffs[(degree + k) as usize];
        let minus = &coeffs[(degree - k) as usize];
        for c in 0..4 {
            if derivative {
                if k > 0 {
                    // i k (c_k e^{iks} - c_{-k} e^{-iks})
                    let v = plus[c] * phase - minus[c] * phase.conj();
                    acc[c] += -(k as f64) * v.im;
                }
            } else if k == 0 {
                acc[c] += plus[c].re;
            } else {
                acc[c] += (plus[c] * phase + minus[c] * phase.conj()).re;
            }
        }
        phase *= step;
    }
    Quat::from_array(acc)
}

fn eval_poly(coeffs: &[[Complex64; 4]], s: f64) -> Quat {
    eval_terms(coeffs, s, false)
}

fn eval_poly_deriv(coeffs: &[[Complex64; 4]], s: f64) -> Quat {
    eval_terms(coeffs, s, true)
}

/// An ordered, oriented triple of pairwise disjoint closed curves on `S3`.
#[derive(Debug, Clone, PartialEq)]
pub struct Link3 {
    components: [CurveS3; 3],
}

impl Link3 {
    pub fn new(x: CurveS3, y: CurveS3, z: CurveS3) -> Result<Self> {
        Self::with_separation(x, y, z, DEFAULT_SEPARATION)
    }

    /// Validates that distinct components stay at chordal distance greater
    /// than `min_separation` over a dense parameter scan.
    pub fn with_separation(x: CurveS3, y: CurveS3, z: CurveS3, min_separation: f64) -> Result<Self> {
        let link = Self {
            components: [x, y, z],
        };
        for (first, second) in [(0, 1), (1, 2), (0, 2)] {
            let distance = link.pair_distance(first, second, SEPARATION_SCAN);
            if distance <= min_separation {
                return Err(Error::ComponentsTooClose {
                    first,
                    second,
                    distance,
                    min: min_separation,
                });
            }
        }
        Ok(link)
    }

    pub fn x(&self) -> &CurveS3 {
        &self.components[0]
    }

    pub fn y(&self) -> &CurveS3 {
        &self.components[1]
    }

    pub fn z(&self) -> &CurveS3 {
        &self.components[2]
    }

    pub fn components(&self) -> &[CurveS3; 3] {
        &self.components
    }

    pub fn into_components(self) -> [CurveS3; 3] {
        self.components
    }

    /// Minimum sampled chordal distance between components `first` and `second`.
    pub fn pair_distance(&self, first: usize, second: usize, samples: usize) -> f64 {
        let a = self.components[first].sample(samples);
        let b = self.components[second].sample(samples);
        a.iter()
            .flat_map(|p| b.iter().map(move |q| p.distance(*q)))
            .fold(f64::INFINITY, f64::min)
    }

    /// Minimum sampled chordal distance over all pairs of components.
    pub fn min_separation(&self, samples: usize) -> f64 {
        [(0, 1), (1, 2), (0, 2)]
            .iter()
            .map(|&(a, b)| self.pair_distance(a, b, samples))
            .fold(f64::INFINITY, f64::min)
    }
}
