//! Link invariants: subtorus degrees of the characteristic map, the Gauss
//! linking integral, and the triple linking number `μ = ν / 2` with
//! `ν = Hel(V_L)`.
//!
//! Orientation conventions: the torus is oriented by `(s, t, u)`; the
//! subtorus with `s` frozen is oriented by `(t, u)`, with `t` frozen by
//! `(u, s)` and with `u` frozen by `(s, t)`; the sphere by its outward
//! normal. Under these conventions `p`, `q`, `r` are the degrees with `s`,
//! `t`, `u` frozen, i.e. the linking numbers of `(Y, Z)`, `(X, Z)` and
//! `(X, Y)`.

use std::f64::consts::{PI, TAU};
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::charmap::{g_async_at, grassmann_f, sample_vl, TriplePoint, AREA_SCALE, EPS_F};
use crate::error::{Axis, Error, Result};
use crate::geometry::{cross3, dot3, norm3, scale3, stereo, sub3, CurveS3, Vec3, DEFAULT_SEPARATION};
use crate::torus::{helicity, helicity_bruteforce, pairwise_sum, BRUTE_FORCE_MAX_N};

/// Degree integrals farther than this from an integer are rejected.
pub const DEGREE_RESIDUAL_MAX: f64 = 0.1;
/// Smallest grid for degree and μ computations.
pub const MIN_GRID: usize = 16;
/// Field means above this trigger a warning before the helicity solve.
pub const MEAN_WARNING: f64 = 1e-4;
/// `|μ_N - μ_{N/2}|` below this marks a report as converged.
pub const CONVERGENCE_TOL: f64 = 1e-3;

/// Which characteristic map to integrate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CharMap {
    /// `g_L = F / |F|`; the integrand is evaluated as `F·(F_a × F_b) / |F|^3`.
    Symmetric,
    /// The stereographic map of [`crate::charmap::g_async`], differentiated spectrally.
    Asymmetric,
}

/// A rounded subtorus degree.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubtorusDegree {
    pub axis: Axis,
    pub degree: i64,
    pub raw: f64,
    pub residual: f64,
}

/// Free parameters, in orientation order, when `axis` is frozen.
pub fn free_axes(axis: Axis) -> (Axis, Axis) {
    match axis {
        Axis::S => (Axis::T, Axis::U),
        Axis::T => (Axis::U, Axis::S),
        Axis::U => (Axis::S, Axis::T),
    }
}

/// Degree of `g_L` on the coordinate subtorus with `axis` frozen at
/// `frozen_value`, as `(degree, residual)`.
pub fn subtorus_degree(link: &crate::Link3, axis: Axis, frozen_value: f64, n: usize) -> Result<(i64, f64)> {
    let d = subtorus_degree_with(link, CharMap::Symmetric, axis, frozen_value, n)?;
    Ok((d.degree, d.residual))
}

/// Unrounded degree integral `(1/4π) ∫ g · (∂_a g × ∂_b g)` over the subtorus.
pub fn raw_subtorus_degree(link: &crate::Link3, map: CharMap, axis: Axis, frozen_value: f64, n: usize) -> Result<f64> {
    if n < MIN_GRID || n % 2 != 0 {
        return Err(Error::InvalidGrid {
            n,
            reason: "subtorus degrees need an even grid of at least 16",
        });
    }
    let (first, second) = free_axes(axis);
    let h = TAU / n as f64;
    let curves = link.components();
    // Component samples along each free axis; the frozen one is constant.
    let samples = |a: Axis| -> Vec<crate::Quat> {
        if a == axis {
            vec![curves[a.index()].eval(frozen_value); n]
        } else {
            curves[a.index()].sample(n)
        }
    };
    let (xs, ys, zs) = (samples(Axis::S), samples(Axis::T), samples(Axis::U));
    let point = |i: usize, j: usize| -> (TriplePoint, [f64; 3]) {
        let mut idx = [0usize; 3];
        idx[first.index()] = i;
        idx[second.index()] = j;
        let params = [0, 1, 2].map(|k| if k == axis.index() { frozen_value } else { h * idx[k] as f64 });
        (TriplePoint::new(xs[idx[0]], ys[idx[1]], zs[idx[2]]), params)
    };

    let values: Vec<Vec3> = (0..n * n)
        .into_par_iter()
        .map(|flat| {
            let (p, params) = point(flat % n, flat / n);
            match map {
                CharMap::Symmetric => {
                    let f = grassmann_f(&p);
                    let norm = norm3(f);
                    if norm < EPS_F {
                        Err(Error::NearDegenerateTriple {
                            s: params[0],
                            t: params[1],
                            u: params[2],
                            norm,
                        })
                    } else {
                        Ok(f)
                    }
                }
                CharMap::Asymmetric => g_async_at(&p).map_err(|err| match err {
                    Error::NearDegenerateTriple { norm, .. } => Error::NearDegenerateTriple {
                        s: params[0],
                        t: params[1],
                        u: params[2],
                        norm,
                    },
                    other => other,
                }),
            }
        })
        .collect::<Result<_>>()?;

    let fft = Fft2::new(n);
    let da = fft.partial(&values, 0);
    let db = fft.partial(&values, 1);
    let integrand: Vec<f64> = (0..n * n)
        .map(|k| {
            let v = values[k];
            let triple = dot3(v, cross3(da[k], db[k]));
            match map {
                CharMap::Symmetric => triple / norm3(v).powi(3),
                CharMap::Asymmetric => triple,
            }
        })
        .collect();
    Ok(AREA_SCALE * h * h * pairwise_sum(&integrand))
}

/// [`raw_subtorus_degree`] rounded, rejecting residuals above
/// [`DEGREE_RESIDUAL_MAX`].
pub fn subtorus_degree_with(
    link: &crate::Link3,
    map: CharMap,
    axis: Axis,
    frozen_value: f64,
    n: usize,
) -> Result<SubtorusDegree> {
    let raw = raw_subtorus_degree(link, map, axis, frozen_value, n)?;
    let degree = raw.round();
    let residual = (raw - degree).abs();
    if residual > DEGREE_RESIDUAL_MAX {
        return Err(Error::DegenerateDegree { axis, raw });
    }
    Ok(SubtorusDegree {
        axis,
        degree: degree as i64,
        raw,
        residual,
    })
}

/// Spectral first derivatives of vector samples on an `n × n` grid stored
/// first-index fastest.
struct Fft2 {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl Fft2 {
    fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            n,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }
    }

    fn partial(&self, values: &[Vec3], dir: usize) -> Vec<Vec3> {
        let n = self.n;
        let mut out = vec![[0.0; 3]; n * n];
        for comp in 0..3 {
            for line in 0..n {
                let slot = |k: usize| if dir == 0 { k + n * line } else { line + n * k };
                let mut buf: Vec<Complex64> = (0..n).map(|k| Complex64::new(values[slot(k)][comp], 0.0)).collect();
                self.forward.process(&mut buf);
                for (j, v) in buf.iter_mut().enumerate() {
                    let k = if j == n / 2 {
                        0.0
                    } else if j < n / 2 {
                        j as f64
                    } else {
                        j as f64 - n as f64
                    };
                    *v *= Complex64::new(0.0, k / n as f64);
                }
                self.inverse.process(&mut buf);
                for (k, v) in buf.iter().enumerate() {
                    out[slot(k)][comp] = v.re;
                }
            }
        }
        out
    }
}

/// The three rounded subtorus degrees of `g_L`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkingDegrees {
    /// Degree with `s` frozen: `lk(Y, Z)`.
    pub p: i64,
    /// Degree with `t` frozen: `lk(X, Z)`.
    pub q: i64,
    /// Degree with `u` frozen: `lk(X, Y)`.
    pub r: i64,
    pub raw: [f64; 3],
    pub residuals: [f64; 3],
}

impl LinkingDegrees {
    pub fn as_array(&self) -> [i64; 3] {
        [self.p, self.q, self.r]
    }

    pub fn all_zero(&self) -> bool {
        self.as_array() == [0, 0, 0]
    }
}

/// Degrees of the chosen characteristic map on the three coordinate
/// subtori, each with the frozen parameter at zero.
pub fn linking_degrees_with(link: &crate::Link3, map: CharMap, n: usize) -> Result<LinkingDegrees> {
    let degrees: Vec<SubtorusDegree> = Axis::ALL
        .par_iter()
        .map(|&axis| subtorus_degree_with(link, map, axis, 0.0, n))
        .collect::<Result<_>>()?;
    Ok(LinkingDegrees {
        p: degrees[0].degree,
        q: degrees[1].degree,
        r: degrees[2].degree,
        raw: [degrees[0].raw, degrees[1].raw, degrees[2].raw],
        residuals: [degrees[0].residual, degrees[1].residual, degrees[2].residual],
    })
}

pub fn linking_degrees(link: &crate::Link3, n: usize) -> Result<LinkingDegrees> {
    linking_degrees_with(link, CharMap::Symmetric, n)
}

/// A closed curve in R3 parametrized over `[0, 2π)`.
pub trait ClosedCurve3 {
    fn point(&self, s: f64) -> Vec3;
    fn tangent(&self, s: f64) -> Vec3;
}

/// Closed curve given by closures for the point and its derivative.
pub struct FnCurve<P, T> {
    pub point: P,
    pub tangent: T,
}

impl<P, T> ClosedCurve3 for FnCurve<P, T>
where
    P: Fn(f64) -> Vec3,
    T: Fn(f64) -> Vec3,
{
    fn point(&self, s: f64) -> Vec3 {
        (self.point)(s)
    }

    fn tangent(&self, s: f64) -> Vec3 {
        (self.tangent)(s)
    }
}

/// The stereographic image `pr_1(c)` of a curve on `S3` that avoids the pole.
pub struct StereoImage<'a> {
    curve: &'a CurveS3,
}

impl<'a> StereoImage<'a> {
    /// Fails with [`Error::PoleTooClose`] if a dense scan of the curve comes
    /// within [`EPS_POLE`] of the pole `1`.
    pub fn new(curve: &'a CurveS3) -> Result<Self> {
        for q in curve.sample(1024) {
            stereo(q)?;
        }
        Ok(Self { curve })
    }
}

impl ClosedCurve3 for StereoImage<'_> {
    fn point(&self, s: f64) -> Vec3 {
        let v = self.curve.eval(s);
        scale3(v.imag(), 1.0 / (1.0 - v.w))
    }

    fn tangent(&self, s: f64) -> Vec3 {
        let v = self.curve.eval(s);
        let dv = self.curve.eval_deriv(s);
        let d = 1.0 / (1.0 - v.w);
        let im = v.imag();
        let dim = dv.imag();
        [0, 1, 2].map(|i| dim[i] * d + im[i] * dv.w * d * d)
    }
}

/// Gauss linking integral
/// `(1/4π) ∫∫ a'(s) × b'(t) · (a(s) - b(t)) / |a(s) - b(t)|^3 ds dt`
/// by the trapezoidal rule on `m × m` nodes.
pub fn gauss_linking(a: &impl ClosedCurve3, b: &impl ClosedCurve3, m: usize) -> Result<f64> {
    let h = TAU / m as f64;
    let pa: Vec<(Vec3, Vec3)> = (0..m).map(|i| (a.point(h * i as f64), a.tangent(h * i as f64))).collect();
    let pb: Vec<(Vec3, Vec3)> = (0..m).map(|j| (b.point(h * j as f64), b.tangent(h * j as f64))).collect();
    let rows: Vec<(f64, f64)> = pa
        .par_iter()
        .map(|(x, dx)| {
            let mut min_dist = f64::INFINITY;
            let terms: Vec<f64> = pb
                .iter()
                .map(|(y, dy)| {
                    let d = sub3(*x, *y);
                    let r = norm3(d);
                    min_dist = min_dist.min(r);
                    dot3(cross3(*dx, *dy), d) / (r * r * r)
                })
                .collect();
            (pairwise_sum(&terms), min_dist)
        })
        .collect();
    let distance = rows.iter().map(|r| r.1).fold(f64::INFINITY, f64::min);
    if distance <= DEFAULT_SEPARATION {
        return Err(Error::CurvesTooClose {
            distance,
            min: DEFAULT_SEPARATION,
        });
    }
    let sums: Vec<f64> = rows.iter().map(|r| r.0).collect();
    Ok(pairwise_sum(&sums) * h * h / (4.0 * PI))
}

/// Pairwise linking numbers, `μ` and diagnostics for one link at one grid size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvariantReport {
    pub p: i64,
    pub q: i64,
    pub r: i64,
    pub deg_residuals: [f64; 3],
    /// `ν = Hel(V_L)`.
    pub nu: f64,
    /// `μ = ν / 2`.
    pub mu: f64,
    /// Distance of `μ` from the nearest integer.
    pub mu_residual: f64,
    pub grid_n: usize,
    /// Set when a coarser grid was compared.
    pub converged: Option<bool>,
    pub coarse_grid_n: Option<usize>,
    pub mu_coarse: Option<f64>,
    pub convergence_delta: Option<f64>,
    /// Fluxes `4π² mean(V_L)` through the three coordinate subtori.
    pub fluxes: [f64; 3],
    pub warnings: Vec<String>,
}

/// `μ = Hel(V_L) / 2` at grid size `n`, without the linking-number gate.
pub fn mu_helicity(link: &crate::Link3, n: usize) -> Result<f64> {
    Ok(0.5 * helicity(&sample_vl(link, n)?))
}

/// Triple linking number via the helicity of `V_L`.
///
/// Refuses with [`Error::NonzeroLinking`] unless all three pairwise
/// linking numbers vanish.
pub fn milnor_mu(link: &crate::Link3, n: usize) -> Result<InvariantReport> {
    let degrees = linking_degrees(link, n)?;
    if !degrees.all_zero() {
        return Err(Error::NonzeroLinking {
            p: degrees.p,
            q: degrees.q,
            r: degrees.r,
        });
    }
    let field = sample_vl(link, n)?;
    let means = field.means();
    let mut warnings = Vec::new();
    for (axis, m) in Axis::ALL.iter().zip(means) {
        if m.abs() > MEAN_WARNING {
            let msg = format!("V_L component {axis} has mean {m:e}, expected zero flux");
            log::warn!("{msg}");
            warnings.push(msg);
        }
    }
    let nu = helicity(&field);
    let mu = 0.5 * nu;
    Ok(InvariantReport {
        p: degrees.p,
        q: degrees.q,
        r: degrees.r,
        deg_residuals: degrees.residuals,
        nu,
        mu,
        mu_residual: (mu - mu.round()).abs(),
        grid_n: n,
        converged: None,
        coarse_grid_n: None,
        mu_coarse: None,
        convergence_delta: None,
        fluxes: means.map(|m| 4.0 * PI * PI * m),
        warnings,
    })
}

/// [`milnor_mu`] at `n`, compared against the helicity value at `n / 2`.
pub fn milnor_mu_checked(link: &crate::Link3, n: usize) -> Result<InvariantReport> {
    let mut report = milnor_mu(link, n)?;
    let coarse_n = n / 2;
    let coarse = mu_helicity(link, coarse_n)?;
    let delta = (report.mu - coarse).abs();
    report.coarse_grid_n = Some(coarse_n);
    report.mu_coarse = Some(coarse);
    report.convergence_delta = Some(delta);
    report.converged = Some(delta <= CONVERGENCE_TOL);
    Ok(report)
}

/// `μ` from the literal double integral, with a bound on its distance from
/// the spectral value at the same grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BruteForceMu {
    pub mu: f64,
    pub bound: f64,
}

/// Half the brute-force helicity of `V_L` sampled on an `n^3` grid
/// (`n <= 12`) with the fundamental solution truncated at `m`.
pub fn milnor_mu_bruteforce(link: &crate::Link3, n: usize, m: usize) -> Result<BruteForceMu> {
    if n > BRUTE_FORCE_MAX_N {
        return Err(Error::GridTooLarge {
            n,
            max: BRUTE_FORCE_MAX_N,
        });
    }
    let field = sample_vl(link, n)?;
    let bf = helicity_bruteforce(&field, m)?;
    Ok(BruteForceMu {
        mu: 0.5 * bf.value,
        bound: 0.5 * bf.bound(),
    })
}
