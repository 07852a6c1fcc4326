//! Reference links with known invariants, and the transforms used to build
//! variants of them.

use std::f64::consts::{FRAC_1_SQRT_2, TAU};

use serde::{Deserialize, Serialize};

use crate::geometry::{CurveS3, Link3, Orientation, Quat, Vec3};

/// Known invariants of a catalog link.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Expected {
    pub p: i64,
    pub q: i64,
    pub r: i64,
    /// `|μ|`, when the pairwise linking numbers vanish.
    pub mu_abs: Option<f64>,
    pub note: String,
}

#[derive(Debug, Clone)]
pub struct CatalogEntry {
    pub name: String,
    pub link: Link3,
    pub expected: Option<Expected>,
    pub samples_per_component: usize,
}

pub const NAMES: [&str; 3] = ["borromean", "unlink", "hopf_pair_plus_unknot"];

pub fn names() -> &'static [&'static str] {
    &NAMES
}

pub fn by_name(name: &str) -> Option<CatalogEntry> {
    match name {
        "borromean" => Some(borromean()),
        "unlink" => Some(unlink()),
        "hopf_pair_plus_unknot" => Some(hopf_pair_plus_unknot()),
        _ => None,
    }
}

pub fn list() -> Vec<CatalogEntry> {
    NAMES.iter().filter_map(|n| by_name(n)).collect()
}

const BORROMEAN_SAMPLES: usize = 64;
const CIRCLE_SAMPLES: usize = 64;

fn nodes(m: usize) -> impl Iterator<Item = f64> {
    (0..m).map(move |j| TAU * j as f64 / m as f64)
}

/// Three ellipses with semi-axes 1 and 0.4 in the coordinate planes of R3,
/// lifted to S3.
pub fn borromean() -> CatalogEntry {
    let m = BORROMEAN_SAMPLES;
    let ellipse = |f: fn(f64) -> Vec3| {
        let pts: Vec<Vec3> = nodes(m).map(f).collect();
        CurveS3::from_r3_samples(&pts, Orientation::Positive).expect("ellipse samples are valid")
    };
    let x = ellipse(|s| [s.cos(), 0.4 * s.sin(), 0.0]);
    let y = ellipse(|t| [0.0, t.cos(), 0.4 * t.sin()]);
    let z = ellipse(|u| [0.4 * u.sin(), 0.0, u.cos()]);
    CatalogEntry {
        name: "borromean".into(),
        link: Link3::new(x, y, z).expect("ellipses are disjoint"),
        expected: Some(Expected {
            p: 0,
            q: 0,
            r: 0,
            mu_abs: Some(1.0),
            note: "Borromean rings: pairwise unlinked, triple linking number ±1".into(),
        }),
        samples_per_component: m,
    }
}

/// Circle of angular radius `radius` about the unit quaternion `center`,
/// spanned by the unit vectors `e1`, `e2` orthogonal to it and each other.
pub fn small_circle(center: Quat, e1: Quat, e2: Quat, radius: f64, samples: usize) -> CurveS3 {
    let (sr, cr) = radius.sin_cos();
    let pts: Vec<Quat> = nodes(samples)
        .map(|s| center.scale(cr) + (e1.scale(s.cos()) + e2.scale(s.sin())).scale(sr))
        .collect();
    CurveS3::from_samples(&pts, Orientation::Positive).expect("circle samples are valid")
}

/// Great circle through `a` and `b` (orthonormal), starting at `a`.
pub fn great_circle(a: Quat, b: Quat, samples: usize) -> CurveS3 {
    let pts: Vec<Quat> = nodes(samples).map(|s| a.scale(s.cos()) + b.scale(s.sin())).collect();
    CurveS3::from_samples(&pts, Orientation::Positive).expect("circle samples are valid")
}

/// Three small circles about `1`, `i` and `j`.
pub fn unlink() -> CatalogEntry {
    let m = CIRCLE_SAMPLES;
    let x = small_circle(Quat::ONE, Quat::I, Quat::J, 0.2, m);
    let y = small_circle(Quat::I, Quat::J, Quat::K, 0.2, m);
    let z = small_circle(Quat::J, Quat::K, Quat::ONE, 0.2, m);
    CatalogEntry {
        name: "unlink".into(),
        link: Link3::new(x, y, z).expect("circles are disjoint"),
        expected: Some(Expected {
            p: 0,
            q: 0,
            r: 0,
            mu_abs: Some(0.0),
            note: "split link of three round circles".into(),
        }),
        samples_per_component: m,
    }
}

/// Great circles in the `(1, i)` and `(j, k)` planes, which link once, and
/// a small circle about `(1 + j)/√2` split from both. The whole link is
/// rotated by `(1 + i + j + k)/2` so that no component meets the pole `1`.
pub fn hopf_pair_plus_unknot() -> CatalogEntry {
    let m = CIRCLE_SAMPLES;
    let h = FRAC_1_SQRT_2;
    let x = great_circle(Quat::ONE, Quat::I, m);
    let y = great_circle(Quat::J, Quat::K, m);
    let z = small_circle(
        Quat::new(h, 0.0, h, 0.0),
        Quat::new(h, 0.0, -h, 0.0),
        Quat::new(0.0, h, 0.0, -h),
        0.2,
        m,
    );
    let q = Quat::new(0.5, 0.5, 0.5, 0.5);
    let link = Link3::new(x.left_multiplied(q), y.left_multiplied(q), z.left_multiplied(q)).expect("components are disjoint");
    CatalogEntry {
        name: "hopf_pair_plus_unknot".into(),
        link,
        expected: Some(Expected {
            p: 0,
            q: 0,
            r: -1,
            mu_abs: None,
            note: "Hopf link X, Y plus a split unknot Z; mu is undefined".into(),
        }),
        samples_per_component: m,
    }
}

/// Reflection negating the `k` coordinate of every component.
pub fn mirror(e: &CatalogEntry) -> CatalogEntry {
    let [x, y, z] = e.link.components().clone().map(|c| c.reflected(3));
    CatalogEntry {
        name: format!("mirror({})", e.name),
        link: Link3::new(x, y, z).expect("reflection is an isometry"),
        expected: e.expected.as_ref().map(|ex| Expected {
            p: -ex.p,
            q: -ex.q,
            r: -ex.r,
            mu_abs: ex.mu_abs,
            note: format!("mirror image: {}", ex.note),
        }),
        samples_per_component: e.samples_per_component,
    }
}

/// Reorders components so that component `i` of the result is component
/// `perm[i]` of `e`.
///
/// # Panics
/// If `perm` is not a permutation of `{0, 1, 2}`.
pub fn permute(e: &CatalogEntry, perm: [usize; 3]) -> CatalogEntry {
    let mut seen = [false; 3];
    for &i in &perm {
        assert!(i < 3 && !seen[i], "not a permutation: {perm:?}");
        seen[i] = true;
    }
    let c = e.link.components();
    let link = Link3::new(c[perm[0]].clone(), c[perm[1]].clone(), c[perm[2]].clone()).expect("same components");
    // Pair linking numbers indexed by the component left out.
    let expected = e.expected.as_ref().map(|ex| {
        let old = [ex.p, ex.q, ex.r];
        let new = perm.map(|i| old[i]);
        Expected {
            p: new[0],
            q: new[1],
            r: new[2],
            mu_abs: ex.mu_abs,
            note: format!("permuted {perm:?}: {}", ex.note),
        }
    });
    CatalogEntry {
        name: format!("permute({}, {perm:?})", e.name),
        link,
        expected,
        samples_per_component: e.samples_per_component,
    }
}

/// Flips the orientation of component `which` (0, 1 or 2).
pub fn reverse_component(e: &CatalogEntry, which: usize) -> CatalogEntry {
    assert!(which < 3, "component index {which} out of range");
    let mut c = e.link.components().clone();
    c[which] = c[which].reversed();
    let [x, y, z] = c;
    let expected = e.expected.as_ref().map(|ex| {
        let mut d = [ex.p, ex.q, ex.r];
        for (k, v) in d.iter_mut().enumerate() {
            if k != which {
                *v = -*v;
            }
        }
        Expected {
            p: d[0],
            q: d[1],
            r: d[2],
            mu_abs: ex.mu_abs,
            note: format!("component {which} reversed: {}", ex.note),
        }
    });
    CatalogEntry {
        name: format!("reverse({}, {which})", e.name),
        link: Link3::new(x, y, z).expect("same components"),
        expected,
        samples_per_component: e.samples_per_component,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_resolve() {
        for n in names() {
            assert_eq!(by_name(n).unwrap().name, *n);
        }
        assert!(by_name("trefoil").is_none());
        assert_eq!(list().len(), 3);
    }

    #[test]
    fn separations() {
        assert!(borromean().link.min_separation(512) >= 0.1);
        assert!(unlink().link.min_separation(512) >= 0.5);
        assert!(hopf_pair_plus_unknot().link.min_separation(512) >= 0.1);
    }

    #[test]
    fn components_avoid_the_pole() {
        for e in list() {
            for c in e.link.components() {
                for q in c.sample(2048) {
                    assert!(q.distance(Quat::ONE) > 1e-3, "{}", e.name);
                }
            }
        }
    }

    #[test]
    fn borromean_lift_interpolates_the_ellipses() {
        let e = borromean();
        let x = e.link.x();
        for j in 0..200 {
            let s = TAU * (j as f64 + 0.37) / 200.0;
            let p = crate::geometry::stereo(x.eval(s)).unwrap();
            let d = crate::geometry::norm3(crate::geometry::sub3(p, [s.cos(), 0.4 * s.sin(), 0.0]));
            assert!(d <= 1e-8, "{d}");
        }
    }

    #[test]
    fn mirror_twice_is_identity() {
        let e = borromean();
        let m = mirror(&mirror(&e));
        for (a, b) in e.link.components().iter().zip(m.link.components()) {
            for (p, q) in a.sample(64).iter().zip(b.sample(64)) {
                assert_eq!(*p, q);
            }
        }
    }

    #[test]
    fn permute_moves_expected_values() {
        let e = hopf_pair_plus_unknot();
        let p = permute(&e, [2, 0, 1]);
        let ex = p.expected.unwrap();
        assert_eq!([ex.p, ex.q, ex.r], [-1, 0, 0]);
        assert_eq!(p.link.x().sample(8), e.link.z().sample(8));
    }

    #[test]
    #[should_panic]
    fn permute_rejects_repeats() {
        permute(&unlink(), [0, 0, 1]);
    }

    #[test]
    fn reverse_flips_the_two_involved_degrees() {
        let e = reverse_component(&hopf_pair_plus_unknot(), 0);
        let ex = e.expected.unwrap();
        assert_eq!([ex.p, ex.q, ex.r], [0, 0, 1]);
    }
}
