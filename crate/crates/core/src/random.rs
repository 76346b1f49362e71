//! Seeded complex-Gaussian sampling. Trial `i` of a run with seed `s` draws
//! from its own stream, so trials can be evaluated in any order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::numerics::{c, CMat, CVec};

pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

pub fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> num_complex::Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    c(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn gaussian_vec<R: Rng + ?Sized>(rng: &mut R, d: usize) -> CVec {
    CVec::from_fn(d, |_, _| gaussian(rng))
}

pub fn unit_vec<R: Rng + ?Sized>(rng: &mut R, d: usize) -> CVec {
    loop {
        let v = gaussian_vec(rng, d);
        let n = v.norm();
        if n > 1e-12 {
            return v / c(n, 0.0);
        }
    }
}

pub fn gaussian_mat<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMat {
    CMat::from_fn(rows, cols, |_, _| gaussian(rng))
}

/// Random Hermitian matrix `(G + G*) / 2`.
pub fn hermitian_mat<R: Rng + ?Sized>(rng: &mut R, d: usize) -> CMat {
    let g = gaussian_mat(rng, d, d);
    (&g + g.adjoint()) * c(0.5, 0.0)
}

/// Haar-like random unitary from the QR factorization of a Gaussian matrix.
pub fn unitary<R: Rng + ?Sized>(rng: &mut R, d: usize) -> CMat {
    let qr = gaussian_mat(rng, d, d).qr();
    let (q, r) = qr.unpack();
    // Fix the phases of R's diagonal so the distribution does not depend on
    // the QR sign convention.
    let phases = CMat::from_fn(d, d, |i, j| {
        if i == j {
            let z = r[(i, i)];
            if z.norm() > 0.0 {
                z / z.norm()
            } else {
                c(1.0, 0.0)
            }
        } else {
            c(0.0, 0.0)
        }
    });
    q * phases
}

/// Random matrix rescaled to spectral radius `rho`. For `rho = 0` a strictly
/// upper-triangular (nilpotent) sample is returned.
pub fn contraction<R: Rng + ?Sized>(rng: &mut R, d: usize, rho: f64) -> CMat {
    if rho == 0.0 {
        let g = gaussian_mat(rng, d, d);
        return CMat::from_fn(d, d, |i, j| if j > i { g[(i, j)] } else { c(0.0, 0.0) });
    }
    let g = gaussian_mat(rng, d, d);
    let r = crate::numerics::spectral_radius(&g).unwrap_or(0.0);
    if r == 0.0 {
        g
    } else {
        g * c(rho / r, 0.0)
    }
}
