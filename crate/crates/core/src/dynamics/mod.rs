//! Iterated systems `{T^k φ}`: generation, decay and Bessel tests, and the
//! closed-form frame operator of an infinite orbit.

mod conjecture;
mod recovery;
mod representation;
mod unitary;

pub use conjecture::{conjecture_explore, BlockCertificate, ConjectureCertificate};
pub use recovery::{
    linear_independence_test, range_diagnostics, recover_operator, IndependenceReport, RangeEntry,
    RangeReport, RecoveryResult,
};
pub use representation::{
    multiplication_rep, operator_response, operator_response_matrix, representation_check,
    RepresentationReport, SpectralRep,
};
pub use unitary::{
    detect_period, dual_operator_check, z_tight_unitary_check, DualOperatorReport, ZTightReport,
};

use serde::Serialize;

use crate::error::{FrameError, Result};
use crate::frames::{self, FrameSystem};
use crate::numerics::{self, c, CMat, CVec};
use crate::tol::Tolerances;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Horizon {
    Finite(usize),
    Infinite,
}

/// An operator, a generator and how far the orbit runs.
#[derive(Debug, Clone, PartialEq)]
pub struct IteratedSystem {
    op: CMat,
    generator: CVec,
    horizon: Horizon,
}

impl IteratedSystem {
    /// `Horizon::Infinite` is only admitted when the orbit is Bessel, i.e. the
    /// restricted spectral radius on the cyclic subspace is below 1.
    pub fn new(op: CMat, generator: CVec, horizon: Horizon, tol: &Tolerances) -> Result<Self> {
        check_shapes(&op, &generator)?;
        match horizon {
            Horizon::Finite(0) => {
                return Err(FrameError::InvalidArgument("orbit length must be at least 1".into()))
            }
            Horizon::Infinite => {
                let b = bessel_test(&op, &generator, tol)?;
                if !b.bessel {
                    return Err(FrameError::SpectralRadius {
                        radius: b.restricted_radius,
                        margin: tol.radius_margin,
                    });
                }
            }
            Horizon::Finite(_) => {}
        }
        Ok(Self {
            op,
            generator,
            horizon,
        })
    }

    pub fn op(&self) -> &CMat {
        &self.op
    }

    pub fn generator(&self) -> &CVec {
        &self.generator
    }

    pub fn horizon(&self) -> Horizon {
        self.horizon
    }

    /// `Σ_k T^k φ φ* (T*)^k` over the horizon.
    pub fn frame_operator(&self, tol: &Tolerances) -> Result<CMat> {
        match self.horizon {
            Horizon::Finite(k) => Ok(frames::frame_operator(&iterate(&self.op, &self.generator, k)?)),
            Horizon::Infinite => orbit_frame_operator(&self.op, &self.generator, tol),
        }
    }
}

fn check_shapes(t: &CMat, phi: &CVec) -> Result<usize> {
    let d = numerics::ensure_square(t)?;
    numerics::ensure_finite_mat(t, "operator")?;
    numerics::ensure_finite_vec(phi, "generator")?;
    if phi.len() != d {
        return Err(FrameError::DimensionMismatch {
            context: "generator length vs operator size",
            expected: d,
            actual: phi.len(),
        });
    }
    Ok(d)
}

/// `(φ, Tφ, …, T^{K−1}φ)` with index origin 0.
pub fn iterate(t: &CMat, phi: &CVec, k: usize) -> Result<FrameSystem> {
    let d = check_shapes(t, phi)?;
    if k == 0 {
        return Err(FrameError::InvalidArgument("orbit length must be at least 1".into()));
    }
    let mut vectors = Vec::with_capacity(k);
    let mut current = phi.clone();
    for _ in 0..k {
        let next = t * &current;
        vectors.push(current);
        current = next;
    }
    FrameSystem::new(d, vectors, 0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerDecayReport {
    pub decays: bool,
    pub spectral_radius: f64,
}

/// `(T*)^n φ → 0` for every `φ` exactly when the spectral radius is below 1.
pub fn power_decay_test(t: &CMat, tol: &Tolerances) -> Result<PowerDecayReport> {
    let radius = numerics::spectral_radius(t)?;
    Ok(PowerDecayReport {
        decays: radius < 1.0 - tol.radius_margin,
        spectral_radius: radius,
    })
}

/// Orthonormal basis (columns) of the cyclic subspace `span{φ, Tφ, T²φ, …}`,
/// built by Arnoldi iteration with full reorthogonalization.
pub fn cyclic_subspace(t: &CMat, phi: &CVec, tol: &Tolerances) -> Result<CMat> {
    let d = check_shapes(t, phi)?;
    let norm = phi.norm();
    if norm == 0.0 {
        return Ok(CMat::zeros(d, 0));
    }
    let scale = numerics::operator_norm(t)?;
    let mut basis: Vec<CVec> = vec![phi / c(norm, 0.0)];
    while basis.len() < d {
        let mut w = t * basis.last().expect("basis is nonempty");
        for _ in 0..2 {
            for q in &basis {
                let proj = q.dotc(&w);
                w -= q * proj;
            }
        }
        let n = w.norm();
        if n <= tol.rank * scale || n == 0.0 {
            break;
        }
        basis.push(w / c(n, 0.0));
    }
    Ok(CMat::from_columns(&basis))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BesselReport {
    pub bessel: bool,
    /// Spectral radius of `T` restricted to the cyclic subspace of `φ`.
    pub restricted_radius: f64,
    /// `Σ_k ‖T^k φ‖²`, present when the orbit is Bessel.
    pub trace_bound: Option<f64>,
    pub cyclic_dim: usize,
    /// `φ = 0`.
    pub degenerate: bool,
}

pub fn bessel_test(t: &CMat, phi: &CVec, tol: &Tolerances) -> Result<BesselReport> {
    let q = cyclic_subspace(t, phi, tol)?;
    if q.ncols() == 0 {
        return Ok(BesselReport {
            bessel: true,
            restricted_radius: 0.0,
            trace_bound: Some(0.0),
            cyclic_dim: 0,
            degenerate: true,
        });
    }
    let restricted = q.adjoint() * t * &q;
    let radius = numerics::spectral_radius(&restricted)?;
    let bessel = radius < 1.0 - tol.radius_margin;
    let trace_bound = if bessel {
        let coords = q.adjoint() * phi;
        let s = numerics::stein_solve(&restricted, &(&coords * coords.adjoint()), tol)?;
        Some(s.trace().re)
    } else {
        None
    };
    Ok(BesselReport {
        bessel,
        restricted_radius: radius,
        trace_bound,
        cyclic_dim: q.ncols(),
        degenerate: false,
    })
}

/// Frame operator of the infinite orbit, solved on the cyclic subspace of `φ`
/// and lifted back, so expanding directions `φ` never reaches are harmless.
pub fn orbit_frame_operator(t: &CMat, phi: &CVec, tol: &Tolerances) -> Result<CMat> {
    let d = check_shapes(t, phi)?;
    let q = cyclic_subspace(t, phi, tol)?;
    if q.ncols() == 0 {
        return Ok(CMat::zeros(d, d));
    }
    let restricted = q.adjoint() * t * &q;
    let coords = q.adjoint() * phi;
    let s = numerics::stein_solve(&restricted, &(&coords * coords.adjoint()), tol)?;
    let lifted = &q * s * q.adjoint();
    Ok((&lifted + lifted.adjoint()) * c(0.5, 0.0))
}

/// Bound on `‖S_∞ − S_K‖` for the `K`-term truncation `S_K` of an orbit's
/// frame operator: with `p = ‖T^K‖²`, `S_∞ = S_K + T^K S_∞ (T*)^K` gives
/// `‖S_∞ − S_K‖ ≤ p‖S_K‖ / (1 − p)`. Infinite when `p ≥ 1`.
pub fn truncation_tail_bound(t: &CMat, k: usize, s_k: &CMat) -> Result<f64> {
    let p = numerics::operator_norm(&numerics::mat_pow(t, k))?.powi(2);
    if p >= 1.0 {
        return Ok(f64::INFINITY);
    }
    Ok(p * numerics::operator_norm(s_k)? / (1.0 - p))
}
