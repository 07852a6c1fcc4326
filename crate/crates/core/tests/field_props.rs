use linkhel::catalog::{borromean, hopf_pair_plus_unknot, list, unlink};
use linkhel::charmap::sample_vl;
use linkhel::torus::{dft_forward, divergence, VectorField3};

fn relative_divergence(v: &VectorField3) -> f64 {
    divergence(v).rms() / v.rms()
}

/// Largest coefficient magnitude on the Nyquist planes relative to the largest overall.
fn spectral_tail(v: &VectorField3) -> f64 {
    let n = v.n() as i64;
    let mut tail = 0.0f64;
    let mut peak = 0.0f64;
    for c in v.components() {
        for (k, z) in dft_forward(c).modes() {
            peak = peak.max(z.norm());
            if k.iter().any(|x| x.abs() == n / 2) {
                tail = tail.max(z.norm());
            }
        }
    }
    tail / peak
}

#[test]
fn unlink_field_is_divergence_free_and_resolved() {
    let link = unlink().link;
    assert!(relative_divergence(&sample_vl(&link, 32).unwrap()) <= 1e-6);
    assert!(spectral_tail(&sample_vl(&link, 64).unwrap()) <= 1e-8);
}

#[test]
fn divergence_and_tail_decrease_with_grid() {
    for entry in [borromean(), hopf_pair_plus_unknot()] {
        let fields: Vec<VectorField3> = [16, 32, 64].iter().map(|&n| sample_vl(&entry.link, n).unwrap()).collect();
        let div: Vec<f64> = fields.iter().map(relative_divergence).collect();
        let tail: Vec<f64> = fields.iter().map(spectral_tail).collect();
        for w in div.windows(2) {
            assert!(w[1] < w[0], "{}: divergence {div:?}", entry.name);
        }
        for w in tail.windows(2) {
            assert!(w[1] < w[0], "{}: tail {tail:?}", entry.name);
        }
    }
}

#[test]
fn fluxes_are_the_linking_numbers() {
    for entry in list() {
        let ex = entry.expected.unwrap();
        let v = sample_vl(&entry.link, 32).unwrap();
        let flux = v.means().map(|m| 4.0 * std::f64::consts::PI.powi(2) * m);
        for (f, e) in flux.iter().zip([ex.p, ex.q, ex.r]) {
            assert!((f - e as f64).abs() <= 1e-6, "{}: {flux:?}", entry.name);
        }
    }
}

#[test]
fn borromean_field_has_no_flux_at_n32() {
    let v = sample_vl(&borromean().link, 32).unwrap();
    assert!(v.means().iter().all(|m| m.abs() <= 1e-6));
}
