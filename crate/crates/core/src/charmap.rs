//! The characteristic map of a three-component link and its area field.
//!
//! For `(x, y, z)` on `S3` the Grassmann field is
//!
//! ```text
//! F(x,y,z) = ( x·iy + y·iz + z·ix ,  x·jy + y·jz + z·jx ,  x·ky + y·kz + z·kx )
//! ```
//!
//! with `·` the dot product of R4 and `iy` a quaternion product. The
//! characteristic map is `g_L = F / |F|` evaluated on `(x(s), y(t), z(u))`.

use std::f64::consts::{PI, TAU};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{cross3, dot3, norm3, scale3, stereo, sub3, Link3, Quat, Vec3};
use crate::torus::{spectral_partial, ScalarField3, VectorField3};

/// Smallest `|F|` accepted before a triple counts as degenerate.
pub const EPS_F: f64 = 1e-9;

/// Three points of `S3`, one per link component.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TriplePoint {
    pub x: Quat,
    pub y: Quat,
    pub z: Quat,
}

impl TriplePoint {
    pub fn new(x: Quat, y: Quat, z: Quat) -> Self {
        Self { x, y, z }
    }
}

/// Scale turning the solid-angle form of the unit sphere into the area form
/// of total area one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalizationConvention {
    pub area_scale: f64,
}

impl NormalizationConvention {
    pub const STANDARD: NormalizationConvention = NormalizationConvention {
        area_scale: 1.0 / (4.0 * PI),
    };
}

pub const AREA_SCALE: f64 = NormalizationConvention::STANDARD.area_scale;

#[inline]
fn grassmann_component(e: Quat, x: Quat, y: Quat, z: Quat) -> f64 {
    x.dot(e * y) + y.dot(e * z) + z.dot(e * x)
}

/// The Grassmann field `F(x, y, z)`. Its norm is twice the area of the
/// triangle with vertices `x, y, z`.
pub fn grassmann_f(p: &TriplePoint) -> Vec3 {
    [Quat::I, Quat::J, Quat::K].map(|e| grassmann_component(e, p.x, p.y, p.z))
}

fn link_point(link: &Link3, s: f64, t: f64, u: f64) -> TriplePoint {
    TriplePoint::new(link.x().eval(s), link.y().eval(t), link.z().eval(u))
}

/// The characteristic map `g_L(s, t, u)`.
pub fn g_map(link: &Link3, s: f64, t: f64, u: f64) -> Result<Vec3> {
    let f = grassmann_f(&link_point(link, s, t, u));
    let norm = norm3(f);
    if norm < EPS_F {
        return Err(Error::NearDegenerateTriple { s, t, u, norm });
    }
    Ok(scale3(f, 1.0 / norm))
}

/// The asymmetric characteristic map, built from stereographic projection
/// from `x`: the unit direction from `pr_1(y x̄)` to `pr_1(z x̄)`.
///
/// With the basis and orientation conventions fixed here this direction is
/// homotopic to [`g_map`], so both maps have the same subtorus degrees.
pub fn g_async(link: &Link3, s: f64, t: f64, u: f64) -> Result<Vec3> {
    let p = link_point(link, s, t, u);
    g_async_at(&p).map_err(|err| match err {
        Error::NearDegenerateTriple { norm, .. } => Error::NearDegenerateTriple { s, t, u, norm },
        other => other,
    })
}

pub(crate) fn g_async_at(p: &TriplePoint) -> Result<Vec3> {
    let xbar = p.x.conj();
    let a = stereo(p.y * xbar)?;
    let b = stereo(p.z * xbar)?;
    let d = sub3(b, a);
    let norm = norm3(d);
    if norm < EPS_F {
        return Err(Error::NearDegenerateTriple {
            s: f64::NAN,
            t: f64::NAN,
            u: f64::NAN,
            norm,
        });
    }
    Ok(scale3(d, 1.0 / norm))
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

/// `F` sampled on the `N^3` grid, one scalar field per component.
pub fn grassmann_grid(link: &Link3, n: usize) -> Result<[ScalarField3; 3]> {
    check_grid(n)?;
    let xs = link.x().sample(n);
    let ys = link.y().sample(n);
    let zs = link.z().sample(n);
    let values: Vec<Vec3> = (0..n * n * n)
        .into_par_iter()
        .map(|idx| {
            let (a, b, c) = (idx % n, (idx / n) % n, idx / (n * n));
            grassmann_f(&TriplePoint::new(xs[a], ys[b], zs[c]))
        })
        .collect();
    if let Some((idx, norm)) = values
        .iter()
        .map(|f| norm3(*f))
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(&b.1))
    {
        if norm < EPS_F {
            let h = TAU / n as f64;
            let (a, b, c) = (idx % n, (idx / n) % n, idx / (n * n));
            return Err(Error::NearDegenerateTriple {
                s: h * a as f64,
                t: h * b as f64,
                u: h * c as f64,
                norm,
            });
        }
    }
    let comp = |i: usize| ScalarField3::new(n, values.iter().map(|f| f[i]).collect());
    Ok([comp(0)?, comp(1)?, comp(2)?])
}

/// Samples the divergence-free field
///
/// ```text
/// V_L = (F_t × F_u · F) ∂/∂s + (F_u × F_s · F) ∂/∂t + (F_s × F_t · F) ∂/∂u
///       ---------------------------------------------------------------
///                               4π |F|^3
/// ```
///
/// on the `N^3` grid, with `F_s, F_t, F_u` from spectral differentiation of
/// the gridded `F`.
pub fn sample_vl(link: &Link3, n: usize) -> Result<VectorField3> {
    let f = grassmann_grid(link, n)?;
    // partials[axis][component]
    let partials: Vec<[ScalarField3; 3]> = (0..3)
        .map(|axis| [0, 1, 2].map(|i| spectral_partial(&f[i], axis)))
        .collect();
    let at = |fields: &[ScalarField3; 3], idx: usize| -> Vec3 { [0, 1, 2].map(|i| fields[i].data()[idx]) };
    let values: Vec<Vec3> = (0..n * n * n)
        .into_par_iter()
        .map(|idx| {
            let fv = at(&f, idx);
            let fs = at(&partials[0], idx);
            let ft = at(&partials[1], idx);
            let fu = at(&partials[2], idx);
            let r = norm3(fv);
            let denom = AREA_SCALE / (r * r * r);
            [
                dot3(cross3(ft, fu), fv) * denom,
                dot3(cross3(fu, fs), fv) * denom,
                dot3(cross3(fs, ft), fv) * denom,
            ]
        })
        .collect();
    Ok(VectorField3::from_nodes(n, &values))
}
