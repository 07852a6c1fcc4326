//! Fields on the flat 3-torus `[0, 2π)^3` sampled on a uniform node-centered grid.
//!
//! Node `(a, b, c)` sits at `(2πa/N, 2πb/N, 2πc/N)` and is stored at flat
//! index `a + N (b + N c)`, so `s` is the fastest-varying coordinate.
//!
//! Fourier coefficients are normalized so that the zero mode equals the grid
//! mean: `f(x) = Σ_k f̂(k) e^{i k·x}`. First-derivative multipliers vanish on
//! the Nyquist index of the differentiated axis. [`biot_savart`] and the
//! helicity routines act on the interior cube `|k_i| < N/2` only.

use std::f64::consts::{PI, TAU};
use std::io::{self, Write};
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::geometry::{cross3, dot3, Vec3};

/// `1/(8π³)`, the inverse volume of the torus.
pub const INV_VOLUME: f64 = 1.0 / (8.0 * PI * PI * PI);

/// Largest grid accepted by the `O(N^6)` brute-force helicity.
pub const BRUTE_FORCE_MAX_N: usize = 12;

/// Scalar samples on the `N^3` torus grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField3 {
    n: usize,
    data: Vec<f64>,
}

impl ScalarField3 {
    pub fn new(n: usize, data: Vec<f64>) -> Result<Self> {
        check_grid(n)?;
        if data.len() != n * n * n {
            return Err(Error::SizeMismatch {
                left: n * n * n,
                right: data.len(),
            });
        }
        Ok(Self { n, data })
    }

    pub fn zeros(n: usize) -> Result<Self> {
        Self::new(n, vec![0.0; n * n * n])
    }

    /// Samples `f(s, t, u)` at every node.
    pub fn from_fn(n: usize, f: impl Fn(f64, f64, f64) -> f64 + Sync) -> Result<Self> {
        check_grid(n)?;
        let h = TAU / n as f64;
        let data = (0..n * n * n)
            .into_par_iter()
            .map(|idx| {
                let (a, b, c) = unravel(idx, n);
                f(h * a as f64, h * b as f64, h * c as f64)
            })
            .collect();
        Ok(Self { n, data })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn get(&self, a: usize, b: usize, c: usize) -> f64 {
        self.data[index(a, b, c, self.n)]
    }

    pub fn mean(&self) -> f64 {
        pairwise_sum(&self.data) / self.data.len() as f64
    }

    /// Root-mean-square over the grid.
    pub fn rms(&self) -> f64 {
        let sq: Vec<f64> = self.data.iter().map(|v| v * v).collect();
        (pairwise_sum(&sq) / sq.len() as f64).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn scaled(&self, k: f64) -> Self {
        Self {
            n: self.n,
            data: self.data.iter().map(|v| v * k).collect(),
        }
    }

    /// Cyclic translation by whole grid cells.
    pub fn shifted(&self, da: usize, db: usize, dc: usize) -> Self {
        let n = self.n;
        let mut data = vec![0.0; self.data.len()];
        for (idx, v) in self.data.iter().enumerate() {
            let (a, b, c) = unravel(idx, n);
            data[index((a + da) % n, (b + db) % n, (c + dc) % n, n)] = *v;
        }
        Self { n, data }
    }

    fn zip_map(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        Self {
            n: self.n,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| f(*a, *b))
                .collect(),
        }
    }
}

/// A vector field on the torus grid, components along `∂/∂s, ∂/∂t, ∂/∂u`.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField3 {
    components: [ScalarField3; 3],
}

impl VectorField3 {
    pub fn new(s: ScalarField3, t: ScalarField3, u: ScalarField3) -> Result<Self> {
        for other in [&t, &u] {
            if other.n != s.n {
                return Err(Error::SizeMismatch {
                    left: s.n,
                    right: other.n,
                });
            }
        }
        Ok(Self {
            components: [s, t, u],
        })
    }

    pub fn zeros(n: usize) -> Result<Self> {
        let z = ScalarField3::zeros(n)?;
        Ok(Self {
            components: [z.clone(), z.clone(), z],
        })
    }

    pub fn from_fn(n: usize, f: impl Fn(f64, f64, f64) -> Vec3 + Sync) -> Result<Self> {
        check_grid(n)?;
        let h = TAU / n as f64;
        let values: Vec<Vec3> = (0..n * n * n)
            .into_par_iter()
            .map(|idx| {
                let (a, b, c) = unravel(idx, n);
                f(h * a as f64, h * b as f64, h * c as f64)
            })
            .collect();
        Ok(Self::from_nodes(n, &values))
    }

    pub(crate) fn from_nodes(n: usize, values: &[Vec3]) -> Self {
        let comp = |i: usize| ScalarField3 {
            n,
            data: values.iter().map(|v| v[i]).collect(),
        };
        Self {
            components: [comp(0), comp(1), comp(2)],
        }
    }

    pub fn n(&self) -> usize {
        self.components[0].n
    }

    pub fn components(&self) -> &[ScalarField3; 3] {
        &self.components
    }

    pub fn component(&self, i: usize) -> &ScalarField3 {
        &self.components[i]
    }

    pub fn at(&self, a: usize, b: usize, c: usize) -> Vec3 {
        let idx = index(a, b, c, self.n());
        self.at_index(idx)
    }

    fn at_index(&self, idx: usize) -> Vec3 {
        [
            self.components[0].data[idx],
            self.components[1].data[idx],
            self.components[2].data[idx],
        ]
    }

    pub fn means(&self) -> Vec3 {
        [
            self.components[0].mean(),
            self.components[1].mean(),
            self.components[2].mean(),
        ]
    }

    /// Grid L2 norm `sqrt(mean |V|^2)`.
    pub fn rms(&self) -> f64 {
        let sq: f64 = self.components.iter().map(|c| c.rms().powi(2)).sum();
        sq.sqrt()
    }

    pub fn scaled(&self, k: f64) -> Self {
        Self {
            components: self.components.clone().map(|c| c.scaled(k)),
        }
    }

    pub fn shifted(&self, da: usize, db: usize, dc: usize) -> Self {
        Self {
            components: self.components.clone().map(|c| c.shifted(da, db, dc)),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self {
            components: [0, 1, 2].map(|i| self.components[i].zip_map(&other.components[i], |a, b| a - b)),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            components: [0, 1, 2].map(|i| self.components[i].zip_map(&other.components[i], |a, b| a + b)),
        }
    }

    /// `V - mean(V)`, componentwise.
    pub fn mean_removed(&self) -> Self {
        let means = self.means();
        Self {
            components: [0, 1, 2].map(|i| {
                let m = means[i];
                ScalarField3 {
                    n: self.n(),
                    data: self.components[i].data.iter().map(|v| v - m).collect(),
                }
            }),
        }
    }

    /// Writes `s,t,u,vs,vt,vu` rows, `s` fastest.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        let n = self.n();
        let h = TAU / n as f64;
        writeln!(out, "s,t,u,vs,vt,vu")?;
        for idx in 0..n * n * n {
            let (a, b, c) = unravel(idx, n);
            let v = self.at_index(idx);
            writeln!(
                out,
                "{},{},{},{},{},{}",
                h * a as f64,
                h * b as f64,
                h * c as f64,
                v[0],
                v[1],
                v[2]
            )?;
        }
        Ok(())
    }
}

/// Fourier coefficients of a grid field, wave numbers in `[-N/2, N/2)^3`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField3 {
    n: usize,
    data: Vec<Complex64>,
}

impl SpectralField3 {
    pub fn zeros(n: usize) -> Result<Self> {
        check_grid(n)?;
        Ok(Self {
            n,
            data: vec![Complex64::default(); n * n * n],
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Coefficient of `e^{i(l s + m t + k u)}`; indices are taken modulo `N`.
    pub fn coeff(&self, l: i64, m: i64, k: i64) -> Complex64 {
        self.data[self.slot(l, m, k)]
    }

    pub fn set(&mut self, l: i64, m: i64, k: i64, value: Complex64) {
        let slot = self.slot(l, m, k);
        self.data[slot] = value;
    }

    /// Iterates `(wave vector, coefficient)` over all stored modes.
    pub fn modes(&self) -> impl Iterator<Item = ([i64; 3], Complex64)> + '_ {
        let n = self.n;
        self.data.iter().enumerate().map(move |(idx, v)| {
            let (a, b, c) = unravel(idx, n);
            ([wave_number(a, n), wave_number(b, n), wave_number(c, n)], *v)
        })
    }

    /// Largest deviation from `coeff(-k) = conj(coeff(k))`.
    pub fn conjugate_symmetry_defect(&self) -> f64 {
        self.modes()
            .map(|(k, v)| (self.coeff(-k[0], -k[1], -k[2]) - v.conj()).norm())
            .fold(0.0, f64::max)
    }

    fn slot(&self, l: i64, m: i64, k: i64) -> usize {
        let n = self.n as i64;
        index(
            l.rem_euclid(n) as usize,
            m.rem_euclid(n) as usize,
            k.rem_euclid(n) as usize,
            self.n,
        )
    }
}

fn check_grid(n: usize) -> Result<()> {
    if n < 8 || n % 2 != 0 {
        return Err(Error::InvalidGrid {
            n,
            reason: "grid size must be even and at least 8",
        });
    }
    Ok(())
}

#[inline]
fn index(a: usize, b: usize, c: usize, n: usize) -> usize {
    a + n * (b + n * c)
}

#[inline]
fn unravel(idx: usize, n: usize) -> (usize, usize, usize) {
    (idx % n, (idx / n) % n, idx / (n * n))
}

/// Signed wave number of DFT slot `j`.
#[inline]
pub(crate) fn wave_number(j: usize, n: usize) -> i64 {
    if j < n / 2 {
        j as i64
    } else {
        j as i64 - n as i64
    }
}

/// Wave number used by first derivatives: zero on the Nyquist slot.
#[inline]
fn derivative_wave_number(j: usize, n: usize) -> f64 {
    if j == n / 2 {
        0.0
    } else {
        wave_number(j, n) as f64
    }
}

struct Plans {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl Plans {
    fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }
    }

    fn get(&self, inverse: bool) -> &Arc<dyn Fft<f64>> {
        if inverse {
            &self.inverse
        } else {
            &self.forward
        }
    }
}

/// Unnormalized 1D transforms of every grid line along `axis`.
fn transform_axis(data: &mut [Complex64], n: usize, axis: usize, fft: &Arc<dyn Fft<f64>>) {
    match axis {
        0 => data.par_chunks_mut(n * n).for_each(|slab| fft.process(slab)),
        1 => data.par_chunks_mut(n * n).for_each(|slab| {
            let mut lines = vec![Complex64::default(); n * n];
            for b in 0..n {
                for a in 0..n {
                    lines[b + n * a] = slab[a + n * b];
                }
            }
            fft.process(&mut lines);
            for b in 0..n {
                for a in 0..n {
                    slab[a + n * b] = lines[b + n * a];
                }
            }
        }),
        _ => {
            let columns: Vec<Vec<Complex64>> = (0..n * n)
                .into_par_iter()
                .map(|col| {
                    let mut line: Vec<Complex64> = (0..n).map(|c| data[col + n * n * c]).collect();
                    fft.process(&mut line);
                    line
                })
                .collect();
            for (col, line) in columns.into_iter().enumerate() {
                for (c, v) in line.into_iter().enumerate() {
                    data[col + n * n * c] = v;
                }
            }
        }
    }
}

fn fft3(data: &mut [Complex64], n: usize, inverse: bool, plans: &Plans) {
    for axis in 0..3 {
        transform_axis(data, n, axis, plans.get(inverse));
    }
}

fn to_complex(f: &ScalarField3) -> Vec<Complex64> {
    f.data.iter().map(|&v| Complex64::new(v, 0.0)).collect()
}

fn forward_with(f: &ScalarField3, plans: &Plans) -> SpectralField3 {
    let n = f.n;
    let mut data = to_complex(f);
    fft3(&mut data, n, false, plans);
    let inv = 1.0 / (n * n * n) as f64;
    data.par_iter_mut().for_each(|v| *v *= inv);
    SpectralField3 { n, data }
}

fn inverse_with(spec: &SpectralField3, plans: &Plans) -> ScalarField3 {
    let n = spec.n;
    let mut data = spec.data.clone();
    fft3(&mut data, n, true, plans);
    ScalarField3 {
        n,
        data: data.into_iter().map(|v| v.re).collect(),
    }
}

/// Forward transform with `coeff(0) = mean(f)`.
pub fn dft_forward(f: &ScalarField3) -> SpectralField3 {
    forward_with(f, &Plans::new(f.n))
}

/// Inverse of [`dft_forward`]; the imaginary part is discarded.
pub fn dft_inverse(spec: &SpectralField3) -> ScalarField3 {
    inverse_with(spec, &Plans::new(spec.n))
}

/// Applies a per-mode multiplier `mult(slot_a, slot_b, slot_c, coeffs)` to
/// the three components of `v` and returns the transformed field.
fn vector_multiplier(
    v: &VectorField3,
    mult: impl Fn([usize; 3], [Complex64; 3]) -> [Complex64; 3] + Sync,
) -> VectorField3 {
    let n = v.n();
    let plans = Plans::new(n);
    let spectra: Vec<SpectralField3> = v.components.iter().map(|c| forward_with(c, &plans)).collect();
    let mut out = [
        vec![Complex64::default(); n * n * n],
        vec![Complex64::default(); n * n * n],
        vec![Complex64::default(); n * n * n],
    ];
    let values: Vec<[Complex64; 3]> = (0..n * n * n)
        .into_par_iter()
        .map(|idx| {
            let (a, b, c) = unravel(idx, n);
            mult(
                [a, b, c],
                [spectra[0].data[idx], spectra[1].data[idx], spectra[2].data[idx]],
            )
        })
        .collect();
    for (idx, v) in values.into_iter().enumerate() {
        for i in 0..3 {
            out[i][idx] = v[i];
        }
    }
    let [s, t, u] = out.map(|data| inverse_with(&SpectralField3 { n, data }, &plans));
    VectorField3 {
        components: [s, t, u],
    }
}

fn scalar_multiplier(f: &ScalarField3, mult: impl Fn([usize; 3], Complex64) -> Complex64 + Sync) -> ScalarField3 {
    let n = f.n;
    let plans = Plans::new(n);
    let mut spec = forward_with(f, &plans);
    spec.data.par_iter_mut().enumerate().for_each(|(idx, v)| {
        let (a, b, c) = unravel(idx, n);
        *v = mult([a, b, c], *v);
    });
    inverse_with(&spec, &plans)
}

fn deriv_k(slots: [usize; 3], n: usize) -> [f64; 3] {
    slots.map(|j| derivative_wave_number(j, n))
}

fn full_k2(slots: [usize; 3], n: usize) -> f64 {
    slots.iter().map(|&j| (wave_number(j, n) as f64).powi(2)).sum()
}

fn on_nyquist_plane(slots: [usize; 3], n: usize) -> bool {
    slots.contains(&(n / 2))
}

fn i_cross(k: [f64; 3], v: [Complex64; 3]) -> [Complex64; 3] {
    let i = Complex64::i();
    [
        i * (v[2] * k[1] - v[1] * k[2]),
        i * (v[0] * k[2] - v[2] * k[0]),
        i * (v[1] * k[0] - v[0] * k[1]),
    ]
}

/// Spectral partial derivative along one axis (0 = `s`, 1 = `t`, 2 = `u`).
///
/// Only 1D transforms along `axis` are performed.
pub fn spectral_partial(f: &ScalarField3, axis: usize) -> ScalarField3 {
    let n = f.n;
    let plans = Plans::new(n);
    let mut data = to_complex(f);
    transform_axis(&mut data, n, axis, &plans.forward);
    let inv = 1.0 / n as f64;
    data.par_iter_mut().enumerate().for_each(|(idx, v)| {
        let (a, b, c) = unravel(idx, n);
        let j = [a, b, c][axis];
        *v *= Complex64::new(0.0, derivative_wave_number(j, n) * inv);
    });
    transform_axis(&mut data, n, axis, &plans.inverse);
    ScalarField3 {
        n,
        data: data.into_iter().map(|v| v.re).collect(),
    }
}

pub fn gradient(f: &ScalarField3) -> VectorField3 {
    VectorField3 {
        components: [0, 1, 2].map(|axis| spectral_partial(f, axis)),
    }
}

pub fn curl(v: &VectorField3) -> VectorField3 {
    let n = v.n();
    vector_multiplier(v, |slots, c| i_cross(deriv_k(slots, n), c))
}

pub fn divergence(v: &VectorField3) -> ScalarField3 {
    let n = v.n();
    let plans = Plans::new(n);
    let spectra: Vec<SpectralField3> = v.components.iter().map(|c| forward_with(c, &plans)).collect();
    let mut spec = SpectralField3::zeros(n).expect("grid already validated");
    spec.data.par_iter_mut().enumerate().for_each(|(idx, out)| {
        let (a, b, c) = unravel(idx, n);
        let k = deriv_k([a, b, c], n);
        let i = Complex64::i();
        *out = i * (spectra[0].data[idx] * k[0] + spectra[1].data[idx] * k[1] + spectra[2].data[idx] * k[2]);
    });
    inverse_with(&spec, &plans)
}

pub fn laplacian(f: &ScalarField3) -> ScalarField3 {
    let n = f.n;
    scalar_multiplier(f, |slots, c| c * -full_k2(slots, n))
}

pub fn vector_laplacian(v: &VectorField3) -> VectorField3 {
    VectorField3 {
        components: v.components.clone().map(|c| laplacian(&c)),
    }
}

/// Green's operator: inverts the Laplacian on mean-zero fields and
/// annihilates the mean.
pub fn green(v: &VectorField3) -> VectorField3 {
    let n = v.n();
    vector_multiplier(v, |slots, c| {
        let k2 = full_k2(slots, n);
        if k2 == 0.0 {
            [Complex64::default(); 3]
        } else {
            c.map(|x| x * (-1.0 / k2))
        }
    })
}

/// Biot–Savart operator `-curl ∘ green`: multiplier `i k × V̂(k) / |k|^2`,
/// zero at `k = 0` and on the Nyquist planes.
pub fn biot_savart(v: &VectorField3) -> VectorField3 {
    let n = v.n();
    vector_multiplier(v, |slots, c| biot_savart_mode(slots, n, c))
}

#[inline]
fn biot_savart_mode(slots: [usize; 3], n: usize, c: [Complex64; 3]) -> [Complex64; 3] {
    let k2 = full_k2(slots, n);
    if k2 == 0.0 || on_nyquist_plane(slots, n) {
        return [Complex64::default(); 3];
    }
    let k = slots.map(|j| wave_number(j, n) as f64);
    i_cross(k, c).map(|x| x / k2)
}

/// Helicity `∫ BS(V)·V` by the periodic trapezoidal rule.
///
/// The node products are reduced with a fixed pairwise tree, so the result
/// does not depend on the thread count.
pub fn helicity(v: &VectorField3) -> f64 {
    let n = v.n();
    let bs = biot_savart(v);
    let products: Vec<f64> = (0..n * n * n)
        .into_par_iter()
        .map(|idx| dot3(bs.at_index(idx), v.at_index(idx)))
        .collect();
    let h = TAU / n as f64;
    h * h * h * pairwise_sum(&products)
}

/// Helicity as the spectral sum `8π³ Σ_{k≠0} conj(V̂)·(i k × V̂) / |k|^2`
/// over the interior cube.
pub fn helicity_spectral(v: &VectorField3) -> f64 {
    let n = v.n();
    let plans = Plans::new(n);
    let spectra: Vec<SpectralField3> = v.components.iter().map(|c| forward_with(c, &plans)).collect();
    let terms: Vec<f64> = (0..n * n * n)
        .into_par_iter()
        .map(|idx| {
            let (a, b, c) = unravel(idx, n);
            let vh = [spectra[0].data[idx], spectra[1].data[idx], spectra[2].data[idx]];
            let bs = biot_savart_mode([a, b, c], n, vh);
            (0..3).map(|i| (vh[i].conj() * bs[i]).re).sum()
        })
        .collect();
    8.0 * PI * PI * PI * pairwise_sum(&terms)
}

/// Real partial sum of `-(1/8π³) Σ e^{i k·x} / |k|^2` over the cube
/// `0 < max |k_i| <= m`.
pub fn phi_eval(point: Vec3, m: usize) -> f64 {
    let mut acc = 0.0;
    for_each_cube_mode(point, m, |k, phase| {
        acc += phase.re / k2_of(k);
    });
    -INV_VOLUME * acc
}

/// Gradient of the cube partial sum in [`phi_eval`].
pub fn phi_gradient(point: Vec3, m: usize) -> Vec3 {
    let mut acc = [0.0; 3];
    for_each_cube_mode(point, m, |k, phase| {
        // ∂ e^{ik·x} = i k e^{ik·x}; the real part is -k sin(k·x).
        let w = -phase.im / k2_of(k);
        for i in 0..3 {
            acc[i] += k[i] as f64 * w;
        }
    });
    acc.map(|v| -INV_VOLUME * v)
}

/// The 2-torus analogue `-(1/4π²) Σ e^{i(lx+my)} / (l^2+m^2)` over the
/// square `0 < max(|l|,|m|) <= m`.
pub fn phi2_eval(x: f64, y: f64, m: usize) -> f64 {
    let m = m as i64;
    let mut acc = 0.0;
    for l in -m..=m {
        for k in -m..=m {
            if l == 0 && k == 0 {
                continue;
            }
            acc += (l as f64 * x + k as f64 * y).cos() / (l * l + k * k) as f64;
        }
    }
    -acc / (4.0 * PI * PI)
}

fn k2_of(k: [i64; 3]) -> f64 {
    (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) as f64
}

fn for_each_cube_mode(point: Vec3, m: usize, mut f: impl FnMut([i64; 3], Complex64)) {
    let m = m as i64;
    let phases: Vec<Vec<Complex64>> = point
        .iter()
        .map(|&x| (-m..=m).map(|k| Complex64::from_polar(1.0, k as f64 * x)).collect())
        .collect();
    for (il, l) in (-m..=m).enumerate() {
        for (im, mm) in (-m..=m).enumerate() {
            let pm = phases[0][il] * phases[1][im];
            for (ik, k) in (-m..=m).enumerate() {
                if l == 0 && mm == 0 && k == 0 {
                    continue;
                }
                f([l, mm, k], pm * phases[2][ik]);
            }
        }
    }
}

/// Result of the direct double-integral helicity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BruteForceHelicity {
    pub value: f64,
    /// Bound on the spectral tail beyond the truncation cube,
    /// `8π³ Σ_{max|k| > M} |V̂(k)|^2 / |k|` over the interior cube.
    pub truncation_bound: f64,
    /// Floating-point allowance proportional to the total spectral weight.
    pub rounding_allowance: f64,
}

impl BruteForceHelicity {
    /// Total bound on `|helicity(V) - value|`.
    pub fn bound(&self) -> f64 {
        self.truncation_bound + self.rounding_allowance
    }
}

/// Direct double Riemann sum of `∫∫ V(σ) × V(τ) · ∇φ_M(σ - τ) dσ dτ` with
/// `∇φ_M` from the term-wise differentiated cube partial sum.
pub fn helicity_bruteforce(v: &VectorField3, m: usize) -> Result<BruteForceHelicity> {
    let n = v.n();
    if n > BRUTE_FORCE_MAX_N {
        return Err(Error::GridTooLarge {
            n,
            max: BRUTE_FORCE_MAX_N,
        });
    }
    if m == 0 || m + 1 > n / 2 {
        return Err(Error::InvalidGrid {
            n,
            reason: "truncation M must satisfy 1 <= M <= N/2 - 1",
        });
    }
    let h = TAU / n as f64;
    let total = n * n * n;
    // ∇φ_M on every grid difference σ - τ.
    let kernel: Vec<Vec3> = (0..total)
        .into_par_iter()
        .map(|idx| {
            let (a, b, c) = unravel(idx, n);
            phi_gradient([h * a as f64, h * b as f64, h * c as f64], m)
        })
        .collect();
    let nodes: Vec<Vec3> = (0..total).map(|idx| v.at_index(idx)).collect();
    let rows: Vec<f64> = (0..total)
        .into_par_iter()
        .map(|sigma| {
            let (sa, sb, sc) = unravel(sigma, n);
            let vs = nodes[sigma];
            let terms: Vec<f64> = (0..total)
                .map(|tau| {
                    let (ta, tb, tc) = unravel(tau, n);
                    let diff = index((sa + n - ta) % n, (sb + n - tb) % n, (sc + n - tc) % n, n);
                    dot3(cross3(vs, nodes[tau]), kernel[diff])
                })
                .collect();
            pairwise_sum(&terms)
        })
        .collect();
    let value = h.powi(6) * pairwise_sum(&rows);

    let plans = Plans::new(n);
    let spectra: Vec<SpectralField3> = v.components.iter().map(|c| forward_with(c, &plans)).collect();
    let mut tail = 0.0;
    let mut weight = 0.0;
    for idx in 0..total {
        let (a, b, c) = unravel(idx, n);
        let slots = [a, b, c];
        let k2 = full_k2(slots, n);
        if k2 == 0.0 || on_nyquist_plane(slots, n) {
            continue;
        }
        let energy: f64 = spectra.iter().map(|s| s.data[idx].norm_sqr()).sum();
        let term = energy / k2.sqrt();
        weight += term;
        let kmax = slots.iter().map(|&j| wave_number(j, n).unsigned_abs()).max().unwrap_or(0);
        if kmax as usize > m {
            tail += term;
        }
    }
    let scale = 8.0 * PI * PI * PI;
    Ok(BruteForceHelicity {
        value,
        truncation_bound: scale * tail,
        rounding_allowance: scale * weight * 1e-12,
    })
}

/// Sums with a fixed balanced binary tree; large halves run in parallel.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    const LEAF: usize = 64;
    const PARALLEL: usize = 1 << 14;
    if xs.len() <= LEAF {
        return xs.iter().sum();
    }
    let (left, right) = xs.split_at(xs.len() / 2);
    if xs.len() >= PARALLEL {
        let (a, b) = rayon::join(|| pairwise_sum(left), || pairwise_sum(right));
        a + b
    } else {
        pairwise_sum(left) + pairwise_sum(right)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_field(n: usize, seed: u64) -> ScalarField3 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        ScalarField3::new(n, (0..n * n * n).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap()
    }

    /// Sum of a few random Fourier modes with `|k_i| <= kmax`.
    fn band_limited(n: usize, kmax: i64, modes: usize, seed: u64) -> VectorField3 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let terms: Vec<([f64; 3], Vec3, Vec3)> = (0..modes)
            .map(|_| {
                let k = [0, 1, 2].map(|_| rng.gen_range(-kmax..=kmax) as f64);
                let a = [0, 1, 2].map(|_| rng.gen_range(-1.0..1.0));
                let b = [0, 1, 2].map(|_| rng.gen_range(-1.0..1.0));
                (k, a, b)
            })
            .collect();
        VectorField3::from_fn(n, |s, t, u| {
            let mut out = [0.0; 3];
            for (k, a, b) in &terms {
                let phase = k[0] * s + k[1] * t + k[2] * u;
                for i in 0..3 {
                    out[i] += a[i] * phase.cos() + b[i] * phase.sin();
                }
            }
            out
        })
        .unwrap()
    }

    fn max_diff(a: &ScalarField3, b: &ScalarField3) -> f64 {
        a.data.iter().zip(&b.data).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
    }

    fn vmax_diff(a: &VectorField3, b: &VectorField3) -> f64 {
        (0..3).map(|i| max_diff(&a.components[i], &b.components[i])).fold(0.0, f64::max)
    }

    fn vmax(a: &VectorField3) -> f64 {
        a.components.iter().map(|c| c.max_abs()).fold(0.0, f64::max)
    }

    #[test]
    fn constant_transforms_to_zero_mode() {
        let f = ScalarField3::from_fn(8, |_, _, _| 1.0).unwrap();
        let spec = dft_forward(&f);
        for (k, v) in spec.modes() {
            let expect = if k == [0, 0, 0] { 1.0 } else { 0.0 };
            assert_abs_diff_eq!(v.re, expect, epsilon = 1e-15);
            assert_abs_diff_eq!(v.im, 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn cosine_has_half_coefficients() {
        let f = ScalarField3::from_fn(8, |s, _, _| (2.0 * s).cos()).unwrap();
        let spec = dft_forward(&f);
        for (k, v) in spec.modes() {
            let expect = if k == [2, 0, 0] || k == [-2, 0, 0] { 0.5 } else { 0.0 };
            assert!((v - Complex64::new(expect, 0.0)).norm() < 1e-15, "{k:?} {v}");
        }
        let g = ScalarField3::from_fn(8, |_, _, u| (3.0 * u).sin()).unwrap();
        let spec = dft_forward(&g);
        assert!((spec.coeff(0, 0, 3) - Complex64::new(0.0, -0.5)).norm() < 1e-15);
    }

    #[test]
    fn round_trip_and_parseval() {
        let f = random_field(16, 7);
        let spec = dft_forward(&f);
        let back = dft_inverse(&spec);
        assert!(max_diff(&f, &back) <= 1e-12);
        let energy: f64 = spec.modes().map(|(_, v)| v.norm_sqr()).sum();
        assert!((energy - f.rms().powi(2)).abs() <= 1e-12 * energy);
        assert!(spec.conjugate_symmetry_defect() <= 1e-12);
        assert_abs_diff_eq!(spec.coeff(0, 0, 0).re, f.mean(), epsilon = 1e-14);
    }

    #[test]
    fn green_of_single_mode_and_constant() {
        let v = VectorField3::from_fn(8, |s, _, _| [s.cos(), 0.0, 0.0]).unwrap();
        let g = green(&v);
        let expect = VectorField3::from_fn(8, |s, _, _| [-s.cos(), 0.0, 0.0]).unwrap();
        assert!(vmax_diff(&g, &expect) < 1e-14);
        let c = VectorField3::from_fn(8, |_, _, _| [1.0, -2.0, 0.5]).unwrap();
        assert!(vmax(&green(&c)) < 1e-15);
    }

    #[test]
    fn green_inverts_laplacian() {
        let v = band_limited(16, 7, 10, 3).mean_removed();
        let back = vector_laplacian(&green(&v));
        assert!(vmax_diff(&back, &v) <= 1e-10 * vmax(&v));
    }

    #[test]
    fn biot_savart_of_single_mode() {
        // curl(sin t ê_u) = cos t ê_s, and sin t ê_u is divergence free.
        let v = VectorField3::from_fn(8, |_, t, _| [t.cos(), 0.0, 0.0]).unwrap();
        let expect = VectorField3::from_fn(8, |_, t, _| [0.0, 0.0, t.sin()]).unwrap();
        assert!(vmax_diff(&biot_savart(&v), &expect) < 1e-14);
        let c = VectorField3::from_fn(8, |_, _, _| [1.0, 1.0, 1.0]).unwrap();
        assert!(vmax(&biot_savart(&c)) < 1e-15);
    }

    #[test]
    fn differential_identities() {
        let f = ScalarField3::from_fn(16, |s, t, u| (s + 2.0 * t).sin() * (3.0 * u).cos() + (t - u).cos()).unwrap();
        let grad = gradient(&f);
        assert!(vmax(&curl(&grad)) <= 1e-12 * vmax(&grad));
        let v = band_limited(16, 7, 8, 11);
        let c = curl(&v);
        assert!(divergence(&c).max_abs() <= 1e-12 * vmax(&c));
        let cosine = ScalarField3::from_fn(8, |s, _, _| s.cos()).unwrap();
        assert!(max_diff(&laplacian(&cosine), &cosine.scaled(-1.0)) < 1e-14);
    }

    #[test]
    fn single_pair_helicity_matches_hand_sum() {
        // V = cos u ê_s + sin u ê_t: curl V = -V, so BS(V) = -V and
        // Hel = -∫|V|^2 = -8π³. The mirror-handed pair gives +8π³.
        let left = VectorField3::from_fn(8, |_, _, u| [u.cos(), u.sin(), 0.0]).unwrap();
        let right = VectorField3::from_fn(8, |_, _, u| [u.sin(), u.cos(), 0.0]).unwrap();
        let vol = 8.0 * PI * PI * PI;
        assert_abs_diff_eq!(helicity(&left), -vol, epsilon = 1e-10);
        assert_abs_diff_eq!(helicity(&right), vol, epsilon = 1e-10);
        assert_abs_diff_eq!(helicity_spectral(&right), vol, epsilon = 1e-10);
    }

    #[test]
    fn helicity_of_gradient_vanishes() {
        let f = random_field(12, 5);
        let grad = gradient(&f);
        let scale = grad.rms().powi(2) * 8.0 * PI * PI * PI;
        assert!(helicity(&grad).abs() <= 1e-10 * scale);
    }

    #[test]
    fn helicity_is_odd_under_reflection() {
        let v = band_limited(12, 5, 6, 21);
        let n = v.n();
        // Pull back under u -> -u with the ê_u sign flip.
        let mut values = Vec::with_capacity(n * n * n);
        for c in 0..n {
            for b in 0..n {
                for a in 0..n {
                    let w = v.at(a, b, (n - c) % n);
                    values.push([w[0], w[1], -w[2]]);
                }
            }
        }
        let mirrored = VectorField3::from_nodes(n, &values);
        let h = helicity(&v);
        assert!((helicity(&mirrored) + h).abs() <= 1e-10 * h.abs().max(1.0));
    }

    #[test]
    fn helicity_is_translation_invariant_and_quadratic() {
        let v = band_limited(12, 5, 6, 8);
        let h = helicity(&v);
        let shifted = helicity(&v.shifted(3, 7, 1));
        assert!((shifted - h).abs() <= 1e-12 * h.abs().max(1.0));
        let scaled = helicity(&v.scaled(-2.5));
        assert!((scaled - 6.25 * h).abs() <= 1e-12 * h.abs().max(1.0));
        assert!((helicity_spectral(&v) - h).abs() <= 1e-10 * h.abs().max(1.0));
    }

    #[test]
    fn phi_at_cube_center_matches_enumeration() {
        // 26 modes with M = 1 at (π, π, π): axis modes give -6, face
        // diagonals +1/2 each (12), corners -1/3 each (8).
        let expect = 1.0 / (3.0 * PI.powi(3));
        assert_abs_diff_eq!(phi_eval([PI, PI, PI], 1), expect, epsilon = 1e-12);
    }

    #[test]
    fn phi_is_even_and_mean_free() {
        for (i, x) in [[0.3, 1.1, 2.0], [5.0, 0.1, 4.4], [2.2, 2.2, 0.7]].iter().enumerate() {
            let m = 1 + i * 2;
            let minus = x.map(|v| -v);
            assert_abs_diff_eq!(phi_eval(*x, m), phi_eval(minus, m), epsilon = 1e-14);
        }
        let f = ScalarField3::from_fn(12, |s, t, u| phi_eval([s, t, u], 4)).unwrap();
        assert!(f.mean().abs() < 1e-14);
    }

    #[test]
    fn phi_gradient_matches_finite_differences() {
        let x = [0.7, 2.1, 4.0];
        let g = phi_gradient(x, 4);
        let h = 1e-6;
        for i in 0..3 {
            let mut p = x;
            let mut q = x;
            p[i] += h;
            q[i] -= h;
            let fd = (phi_eval(p, 4) - phi_eval(q, 4)) / (2.0 * h);
            assert_abs_diff_eq!(g[i], fd, epsilon = 1e-8);
        }
    }

    #[test]
    fn truncated_laplacian_has_flat_spectrum() {
        // Δφ_M = (1/8π³) Σ_{0 < max|k| <= M} e^{ik·x}.
        let (n, m) = (12, 3);
        let f = ScalarField3::from_fn(n, |s, t, u| phi_eval([s, t, u], m)).unwrap();
        let spec = dft_forward(&laplacian(&f));
        for (k, v) in spec.modes() {
            let kmax = k.iter().map(|x| x.unsigned_abs()).max().unwrap() as usize;
            let expect = if kmax == 0 || kmax > m { 0.0 } else { INV_VOLUME };
            assert!((v - Complex64::new(expect, 0.0)).norm() <= 1e-12 * INV_VOLUME, "{k:?}");
        }
    }

    #[test]
    fn bruteforce_matches_single_pair() {
        let right = VectorField3::from_fn(8, |_, _, u| [u.sin(), u.cos(), 0.0]).unwrap();
        let bf = helicity_bruteforce(&right, 3).unwrap();
        assert_abs_diff_eq!(bf.value, 8.0 * PI * PI * PI, epsilon = 1e-8);
        let zero = VectorField3::zeros(8).unwrap();
        assert_eq!(helicity_bruteforce(&zero, 3).unwrap().value, 0.0);
    }

    #[test]
    fn bruteforce_matches_spectral_on_band_limited() {
        let v = band_limited(8, 2, 2, 99).mean_removed();
        let bf = helicity_bruteforce(&v, 3).unwrap();
        let h = helicity(&v);
        assert!((bf.value - h).abs() <= 1e-8, "{} vs {h}", bf.value);
        assert!((bf.value - h).abs() <= bf.bound());
        // Truncating below the band leaves a tail the bound must cover.
        let bf1 = helicity_bruteforce(&v, 1).unwrap();
        assert!((bf1.value - h).abs() <= bf1.bound());
    }

    #[test]
    fn bruteforce_guards() {
        let v = VectorField3::zeros(14).unwrap();
        assert!(matches!(helicity_bruteforce(&v, 3), Err(Error::GridTooLarge { n: 14, .. })));
        let v = VectorField3::zeros(8).unwrap();
        assert!(helicity_bruteforce(&v, 4).is_err());
        assert!(helicity_bruteforce(&v, 0).is_err());
    }

    #[test]
    fn odd_grid_rejected() {
        assert!(matches!(ScalarField3::zeros(9), Err(Error::InvalidGrid { n: 9, .. })));
    }

    #[test]
    fn csv_layout() {
        let v = VectorField3::from_fn(8, |s, t, u| [s, t, u]).unwrap();
        let mut buf = Vec::new();
        v.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "s,t,u,vs,vt,vu");
        assert_eq!(lines.len(), 513);
        let h = TAU / 8.0;
        assert_eq!(lines[2], format!("{h},0,0,{h},0,0"));
        assert_eq!(lines[9], format!("0,{h},0,0,{h},0"));
    }

    #[test]
    fn pairwise_sum_is_exact_on_integers() {
        let xs: Vec<f64> = (0..100_000).map(|i| i as f64).collect();
        assert_eq!(pairwise_sum(&xs), 4_999_950_000.0);
    }
}
