use num_complex::Complex64;

use crate::error::Result;
use crate::numerics::{self, c, CMat, CVec};
use crate::random;
use crate::tol::Tolerances;

use super::representation_check;

/// Eigenvalues closer than this (relative to `max(1, ‖T‖)`) share a block.
/// Defective eigenvalues split by roughly `eps^(1/m)` under Schur iteration.
const CLUSTER_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct BlockCertificate {
    pub eigenvalue: Complex64,
    /// Orthonormal basis (columns) of the generalized eigenspace.
    pub basis: CMat,
    pub restricted_radius: f64,
    pub certified: bool,
    /// Generator in ambient coordinates.
    pub generator: Option<CVec>,
    pub block_bounds: Option<(f64, f64)>,
    pub reason: Option<String>,
}

impl BlockCertificate {
    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConjectureCertificate {
    pub blocks: Vec<BlockCertificate>,
    pub covers_space: bool,
    /// `max_n ‖T Q_n − Q_n (Q_n* T Q_n)‖` over block bases `Q_n`.
    pub invariance_defect: f64,
}

/// Splits `C^d` into the generalized eigenspaces of `T` and looks, block by
/// block, for a generator whose orbit is a frame for the block.
///
/// Candidates per block, in block coordinates: the standard basis vectors from
/// last to first, the all-ones vector, then `trials` seeded complex-Gaussian
/// vectors. Blocks whose restricted spectral radius is not below 1 are
/// reported uncertified without a search.
pub fn conjecture_explore(t: &CMat, trials: usize, seed: u64, tol: &Tolerances) -> Result<ConjectureCertificate> {
    let d = numerics::ensure_square(t)?;
    let clusters = cluster_eigenvalues(&numerics::general_eigenvalues(t)?, t)?;

    let mut blocks = Vec::with_capacity(clusters.len());
    let mut invariance_defect: f64 = 0.0;
    for (j, (lambda, mult)) in clusters.iter().enumerate() {
        let basis = if clusters.len() == 1 {
            numerics::identity(d)
        } else {
            block_basis(t, &clusters, j, *mult)?
        };
        let restricted = basis.adjoint() * t * &basis;
        invariance_defect =
            invariance_defect.max(numerics::operator_norm(&(t * &basis - &basis * &restricted))?);
        let radius = numerics::spectral_radius(&restricted)?;

        let mut block = BlockCertificate {
            eigenvalue: *lambda,
            basis,
            restricted_radius: radius,
            certified: false,
            generator: None,
            block_bounds: None,
            reason: None,
        };
        if radius >= 1.0 - tol.radius_margin {
            block.reason = Some(format!(
                "Bessel fails: restricted spectral radius {radius} is not below 1"
            ));
            blocks.push(block);
            continue;
        }

        let m = *mult;
        let mut candidates: Vec<CVec> = (0..m).rev().map(|i| numerics::unit(m, i)).collect();
        candidates.push(CVec::from_element(m, c(1.0, 0.0)));
        let found = candidates
            .into_iter()
            .chain((0..trials as u64).map(|trial| {
                let mut rng = random::trial_rng(seed, (j as u64) << 32 | trial);
                random::gaussian_vec(&mut rng, m)
            }))
            .find_map(|coords| match representation_check(&restricted, &coords, tol) {
                Ok(r) if r.is_frame => Some(Ok((coords, r.bounds))),
                Ok(_) => None,
                Err(e) => Some(Err(e)),
            })
            .transpose()?;
        match found {
            Some((coords, bounds)) => {
                block.certified = true;
                block.generator = Some(&block.basis * coords);
                block.block_bounds = bounds;
            }
            None => {
                block.reason = Some(format!(
                    "no generator with a frame orbit among {} candidates",
                    m + 1 + trials
                ));
            }
        }
        blocks.push(block);
    }

    let covered: usize = blocks.iter().map(|b| b.dim()).sum();
    Ok(ConjectureCertificate {
        covers_space: covered == d && blocks.iter().all(|b| b.certified),
        blocks,
        invariance_defect,
    })
}

/// Groups eigenvalues into clusters `(mean, multiplicity)`, ordered by
/// descending modulus, then real part, then imaginary part.
fn cluster_eigenvalues(eigs: &[Complex64], t: &CMat) -> Result<Vec<(Complex64, usize)>> {
    let radius = CLUSTER_TOL * numerics::operator_norm(t)?.max(1.0);
    let mut clusters: Vec<Vec<Complex64>> = Vec::new();
    for &z in eigs {
        let home = clusters.iter_mut().find(|members| {
            let mean = members.iter().sum::<Complex64>() / members.len() as f64;
            (mean - z).norm() <= radius
        });
        match home {
            Some(members) => members.push(z),
            None => clusters.push(vec![z]),
        }
    }
    let mut out: Vec<(Complex64, usize)> = clusters
        .into_iter()
        .map(|m| (m.iter().sum::<Complex64>() / m.len() as f64, m.len()))
        .collect();
    out.sort_by(|a, b| {
        b.0.norm()
            .total_cmp(&a.0.norm())
            .then(a.0.re.total_cmp(&b.0.re))
            .then(a.0.im.total_cmp(&b.0.im))
    });
    Ok(out)
}

/// The generalized eigenspace of cluster `j` is the range of
/// `Π_{i≠j} (T − λ_i I)^{m_i}`; its dimension `m_j` is known, so the leading
/// `m_j` left singular vectors span it.
fn block_basis(t: &CMat, clusters: &[(Complex64, usize)], j: usize, mult: usize) -> Result<CMat> {
    let d = t.nrows();
    let mut product = numerics::identity(d);
    for (i, (lambda, m)) in clusters.iter().enumerate() {
        if i == j {
            continue;
        }
        let shifted = t - numerics::identity(d) * *lambda;
        for _ in 0..*m {
            product = &shifted * product;
            let n = numerics::operator_norm(&product)?;
            if n > 0.0 {
                product /= c(n, 0.0);
            }
        }
    }
    let dec = numerics::svd(&product)?;
    let mut basis = dec.left.columns(0, mult).into_owned();
    for mut col in basis.column_iter_mut() {
        let mut v: CVec = col.clone_owned();
        numerics::canonical_phase(&mut v);
        col.copy_from(&v);
    }
    Ok(basis)
}
