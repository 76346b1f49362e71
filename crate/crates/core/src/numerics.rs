//! Dense complex linear-algebra kernel.
//!
//! Thin, deterministic wrappers over `nalgebra` decompositions plus the
//! Stein-equation solver. Every routine rejects non-finite input and returns
//! results in a canonical order so that downstream reports are reproducible.

use nalgebra::{DMatrix, DVector, Schur};
use num_complex::Complex64;

use crate::error::{FrameError, Result};
use crate::tol::Tolerances;

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

/// Largest dimension for which the Stein equation is solved as a dense
/// Kronecker system; above it the doubling iteration is used.
pub const STEIN_DIRECT_MAX_DIM: usize = 32;

const SCHUR_MAX_ITER: usize = 10_000;
const PHASE_THRESHOLD: f64 = 1e-8;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Standard basis vector `e_i` of `C^d`.
pub fn unit(d: usize, i: usize) -> CVec {
    CVec::from_fn(d, |k, _| if k == i { c(1.0, 0.0) } else { c(0.0, 0.0) })
}

pub fn real_diag(values: &[f64]) -> CMat {
    let d = values.len();
    CMat::from_fn(d, d, |i, j| if i == j { c(values[i], 0.0) } else { c(0.0, 0.0) })
}

pub fn ensure_finite_mat(m: &CMat, what: &'static str) -> Result<()> {
    if m.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(FrameError::NonFinite { what })
    }
}

pub fn ensure_finite_vec(v: &CVec, what: &'static str) -> Result<()> {
    if v.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(FrameError::NonFinite { what })
    }
}

pub fn ensure_square(m: &CMat) -> Result<usize> {
    if m.nrows() == m.ncols() {
        Ok(m.nrows())
    } else {
        Err(FrameError::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        })
    }
}

/// `‖M − M*‖` in operator norm.
pub fn hermitian_defect(m: &CMat) -> f64 {
    operator_norm_unchecked(&(m - m.adjoint()))
}

/// Rotates `v` so that its first entry above the phase threshold is real and positive.
pub fn canonical_phase(v: &mut CVec) {
    let scale = v.norm();
    if scale == 0.0 {
        return;
    }
    if let Some(z) = v.iter().find(|z| z.norm() > PHASE_THRESHOLD * scale) {
        let rot = z.conj() / z.norm();
        v.iter_mut().for_each(|x| *x *= rot);
    }
}

#[derive(Debug, Clone)]
pub struct EigResult {
    /// Ascending eigenvalues.
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors, column `i` belongs to `values[i]`.
    pub vectors: CMat,
}

impl EigResult {
    pub fn reconstruct(&self) -> CMat {
        let q = &self.vectors;
        q * real_diag(&self.values) * q.adjoint()
    }
}

/// Eigendecomposition of a Hermitian matrix. The input is symmetrized first.
pub fn herm_eig(m: &CMat) -> Result<EigResult> {
    let d = ensure_square(m)?;
    ensure_finite_mat(m, "matrix")?;
    let h = (m + m.adjoint()) * c(0.5, 0.0);
    let eig = h.symmetric_eigen();

    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = CMat::zeros(d, d);
    for (dst, &src) in order.iter().enumerate() {
        let mut col: CVec = eig.eigenvectors.column(src).into_owned();
        canonical_phase(&mut col);
        vectors.set_column(dst, &col);
    }
    Ok(EigResult { values, vectors })
}

#[derive(Debug, Clone)]
pub struct Svd {
    /// `rows × r` with orthonormal columns, `r = min(rows, cols)`.
    pub left: CMat,
    /// Descending, nonnegative.
    pub singulars: Vec<f64>,
    /// `cols × r` with orthonormal columns.
    pub right: CMat,
}

impl Svd {
    pub fn max(&self) -> f64 {
        self.singulars.first().copied().unwrap_or(0.0)
    }

    /// Number of singular values above `rank_tol * sigma_max`.
    pub fn rank(&self, rank_tol: f64) -> usize {
        numeric_rank(&self.singulars, rank_tol)
    }

    pub fn reconstruct(&self) -> CMat {
        &self.left * real_diag(&self.singulars) * self.right.adjoint()
    }
}

/// Count of entries of a descending sequence above `rank_tol` times its first entry.
pub fn numeric_rank(descending: &[f64], rank_tol: f64) -> usize {
    let top = descending.first().copied().unwrap_or(0.0);
    if top <= 0.0 {
        return 0;
    }
    descending.iter().filter(|&&s| s > rank_tol * top).count()
}

pub fn svd(m: &CMat) -> Result<Svd> {
    ensure_finite_mat(m, "matrix")?;
    let (rows, cols) = m.shape();
    let r = rows.min(cols);
    let dec = m.clone().svd(true, true);
    let u = dec.u.expect("left singular vectors requested");
    let v = dec.v_t.expect("right singular vectors requested").adjoint();

    let mut order: Vec<usize> = (0..r).collect();
    order.sort_by(|&a, &b| dec.singular_values[b].total_cmp(&dec.singular_values[a]));

    let mut left = CMat::zeros(rows, r);
    let mut right = CMat::zeros(cols, r);
    let mut singulars = Vec::with_capacity(r);
    for (dst, &src) in order.iter().enumerate() {
        left.set_column(dst, &u.column(src));
        right.set_column(dst, &v.column(src));
        singulars.push(dec.singular_values[src].max(0.0));
    }
    Ok(Svd {
        left,
        singulars,
        right,
    })
}

/// Moore–Penrose pseudoinverse. `rank_tol` is an absolute cutoff on singular
/// values; `None` selects `RANK_TOL * sigma_max`.
pub fn pinv(m: &CMat, rank_tol: Option<f64>) -> Result<CMat> {
    let dec = svd(m)?;
    let cutoff = rank_tol.unwrap_or(crate::tol::RANK_TOL * dec.max());
    let (rows, cols) = m.shape();
    let mut out = CMat::zeros(cols, rows);
    if dec.max() == 0.0 {
        return Ok(out);
    }
    for (i, &s) in dec.singulars.iter().enumerate() {
        if s > cutoff {
            let v = dec.right.column(i);
            let u = dec.left.column(i);
            out += (v * u.adjoint()) * c(1.0 / s, 0.0);
        }
    }
    Ok(out)
}

/// Orthonormal basis of the null space of `m` (columns), using the shared
/// relative rank cutoff.
pub fn null_space(m: &CMat, rank_tol: f64) -> Result<CMat> {
    let cols = m.ncols();
    // Pad with zero rows so the SVD returns a full set of right vectors.
    let padded = if m.nrows() < cols {
        let mut p = CMat::zeros(cols, cols);
        p.view_mut((0, 0), m.shape()).copy_from(m);
        p
    } else {
        m.clone()
    };
    let dec = svd(&padded)?;
    let rank = dec.rank(rank_tol);
    let k = cols - rank;
    let mut basis = CMat::zeros(cols, k);
    for j in 0..k {
        basis.set_column(j, &dec.right.column(rank + j));
    }
    Ok(basis)
}

fn operator_norm_unchecked(m: &CMat) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.singular_values().max()
}

/// Largest singular value.
pub fn operator_norm(m: &CMat) -> Result<f64> {
    ensure_finite_mat(m, "matrix")?;
    Ok(operator_norm_unchecked(m))
}

/// Eigenvalues of a general square matrix via the Schur form. The 2×2 diagonal
/// blocks a real-arithmetic Schur form may leave are resolved in closed form.
pub fn general_eigenvalues(m: &CMat) -> Result<Vec<Complex64>> {
    let d = ensure_square(m)?;
    ensure_finite_mat(m, "matrix")?;
    if d == 0 {
        return Ok(Vec::new());
    }
    let Some(schur) = Schur::try_new(m.clone(), f64::EPSILON, SCHUR_MAX_ITER) else {
        return Err(FrameError::InvalidArgument(
            "Schur iteration did not converge".into(),
        ));
    };
    let (_, t) = schur.unpack();
    let scale = operator_norm_unchecked(&t).max(f64::MIN_POSITIVE);
    let mut out = Vec::with_capacity(d);
    let mut i = 0;
    while i < d {
        if i + 1 < d && t[(i + 1, i)].norm() > f64::EPSILON * scale {
            let (a, b, cc, dd) = (t[(i, i)], t[(i, i + 1)], t[(i + 1, i)], t[(i + 1, i + 1)]);
            let half_tr = (a + dd) * 0.5;
            let disc = (((a - dd) * 0.5).powi(2) + b * cc).sqrt();
            out.push(half_tr + disc);
            out.push(half_tr - disc);
            i += 2;
        } else {
            out.push(t[(i, i)]);
            i += 1;
        }
    }
    Ok(out)
}

/// Spectral radius from the Schur eigenvalues, falling back to Gelfand's
/// formula with repeated squaring if the Schur iteration fails.
pub fn spectral_radius(m: &CMat) -> Result<f64> {
    ensure_square(m)?;
    ensure_finite_mat(m, "matrix")?;
    match general_eigenvalues(m) {
        Ok(ev) => Ok(ev.iter().map(|z| z.norm()).fold(0.0, f64::max)),
        Err(_) => Ok(gelfand_radius(m)),
    }
}

fn gelfand_radius(m: &CMat) -> f64 {
    // ‖A^(2^j)‖^(1/2^j), tracking a log-scale so the powers cannot overflow.
    let mut a = m.clone();
    let mut log_scale = 0.0_f64;
    let mut estimate = operator_norm_unchecked(m);
    for j in 1..=40 {
        let n = operator_norm_unchecked(&a);
        if n == 0.0 {
            return 0.0;
        }
        a /= c(n, 0.0);
        log_scale = 2.0 * (log_scale + n.ln());
        a = &a * &a;
        let n2 = operator_norm_unchecked(&a);
        if n2 == 0.0 {
            return 0.0;
        }
        estimate = ((log_scale + n2.ln()) / 2f64.powi(j)).exp();
    }
    estimate
}

pub fn identity(d: usize) -> CMat {
    CMat::identity(d, d)
}

pub fn mat_pow(m: &CMat, k: usize) -> CMat {
    let mut out = identity(m.nrows());
    let mut base = m.clone();
    let mut e = k;
    while e > 0 {
        if e & 1 == 1 {
            out = &out * &base;
        }
        e >>= 1;
        if e > 0 {
            base = &base * &base;
        }
    }
    out
}

pub fn inverse(m: &CMat) -> Result<CMat> {
    ensure_square(m)?;
    m.clone().try_inverse().ok_or(FrameError::SingularOperator {
        sigma_min: svd(m)?.singulars.last().copied().unwrap_or(0.0),
    })
}

/// Solves `S − T S T* = W` for `S` when the spectral radius of `T` is below
/// `1 − radius_margin`. The solution is the series `Σ_k T^k W (T*)^k`.
pub fn stein_solve(t: &CMat, w: &CMat, tol: &Tolerances) -> Result<CMat> {
    let d = ensure_square(t)?;
    ensure_finite_mat(w, "right-hand side")?;
    if w.shape() != (d, d) {
        return Err(FrameError::DimensionMismatch {
            context: "Stein right-hand side",
            expected: d,
            actual: w.nrows(),
        });
    }
    let radius = spectral_radius(t)?;
    if radius >= 1.0 - tol.radius_margin {
        return Err(FrameError::SpectralRadius {
            radius,
            margin: tol.radius_margin,
        });
    }
    let s = if d <= STEIN_DIRECT_MAX_DIM {
        stein_direct(t, w)?
    } else {
        stein_doubling(t, w)
    };
    Ok((&s + s.adjoint()) * c(0.5, 0.0))
}

fn stein_direct(t: &CMat, w: &CMat) -> Result<CMat> {
    let d = t.nrows();
    // Column-major vec: vec(T S T*) = (conj(T) ⊗ T) vec(S).
    let system = CMat::identity(d * d, d * d) - t.conjugate().kronecker(t);
    let rhs = CVec::from_column_slice(w.as_slice());
    let sol = system.lu().solve(&rhs).ok_or(FrameError::SpectralRadius {
        radius: 1.0,
        margin: 0.0,
    })?;
    Ok(CMat::from_column_slice(d, d, sol.as_slice()))
}

fn stein_doubling(t: &CMat, w: &CMat) -> CMat {
    let mut s = w.clone();
    let mut a = t.clone();
    for _ in 0..128 {
        let inc = &a * &s * a.adjoint();
        s += &inc;
        if operator_norm_unchecked(&inc) <= f64::EPSILON * operator_norm_unchecked(&s) {
            break;
        }
        a = &a * &a;
    }
    s
}

/// `f(T) = Q f(Λ) Q*` for Hermitian `T`.
pub fn apply_hermitian_function<F>(t: &CMat, f: F) -> Result<CMat>
where
    F: Fn(f64) -> f64,
{
    let eig = herm_eig(t)?;
    let mut mapped = Vec::with_capacity(eig.values.len());
    for &x in &eig.values {
        let y = f(x);
        if !y.is_finite() {
            return Err(FrameError::FunctionUndefined { at: x });
        }
        mapped.push(y);
    }
    let q = &eig.vectors;
    Ok(q * real_diag(&mapped) * q.adjoint())
}
