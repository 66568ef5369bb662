//! Helpers shared by the integration suites: random unitaries and region
//! sampling.

use num_complex::Complex64;
use projsum_core::linalg::CMat;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn random_unitary(dim: usize, rng: &mut ChaCha8Rng) -> CMat {
    let mut u = CMat::identity(dim);
    if dim == 1 {
        return u;
    }
    for _ in 0..(3 * dim * dim).max(8) {
        let p = rng.gen_range(0..dim);
        let mut q = rng.gen_range(0..dim);
        while q == p {
            q = rng.gen_range(0..dim);
        }
        let theta: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        let phi: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        let (s, c) = theta.sin_cos();
        let w = Complex64::from_polar(1.0, phi);
        for k in 0..dim {
            let a = u.get(k, p);
            let b = u.get(k, q);
            u.set(k, p, a * c + b * (w * s));
            u.set(k, q, -a * (w.conj() * s) + b * c);
        }
    }
    u
}

/// A point of the region `{(x, y): (x-y)^2 <= x+y <= 1}`; with `boundary`
/// the point lands exactly on the parabolic boundary.
pub fn sample_region_point(rng: &mut ChaCha8Rng, boundary: bool) -> (f64, f64) {
    let s: f64 = rng.gen_range(0.0..=1.0);
    let frac: f64 = if boundary {
        if rng.gen_bool(0.5) {
            1.0
        } else {
            -1.0
        }
    } else {
        rng.gen_range(-1.0..=1.0)
    };
    let d = frac * s.sqrt();
    ((s + d) / 2.0, (s - d) / 2.0)
}
