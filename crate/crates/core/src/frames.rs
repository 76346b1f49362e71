//! Finite frame systems: synthesis, analysis and frame operators, optimal
//! bounds, the spectral frame-sequence test and canonical duals.

use serde::Serialize;

use crate::error::{FrameError, Result};
use crate::numerics::{self, CMat, CVec};
use crate::tol::Tolerances;

/// Ordered vectors of `C^dim`. `index_origin` is the index carried by the
/// first vector: 0 for forward orbits, `-K` for symmetric two-sided ones.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameSystem {
    dim: usize,
    vectors: Vec<CVec>,
    index_origin: i64,
}

impl FrameSystem {
    pub fn new(dim: usize, vectors: Vec<CVec>, index_origin: i64) -> Result<Self> {
        if dim == 0 {
            return Err(FrameError::InvalidArgument("dimension must be positive".into()));
        }
        if vectors.is_empty() {
            return Err(FrameError::DegenerateSystem("empty vector list"));
        }
        for v in &vectors {
            if v.len() != dim {
                return Err(FrameError::DimensionMismatch {
                    context: "frame vector",
                    expected: dim,
                    actual: v.len(),
                });
            }
            numerics::ensure_finite_vec(v, "frame vector")?;
        }
        Ok(Self {
            dim,
            vectors,
            index_origin,
        })
    }

    /// Forward system with `index_origin = 0`; the dimension is taken from the first vector.
    pub fn from_vectors(vectors: Vec<CVec>) -> Result<Self> {
        let dim = vectors.first().map(|v| v.len()).unwrap_or(0);
        if vectors.is_empty() {
            return Err(FrameError::DegenerateSystem("empty vector list"));
        }
        Self::new(dim, vectors, 0)
    }

    /// System whose vectors are the columns of `u`.
    pub fn from_columns(u: &CMat, index_origin: i64) -> Result<Self> {
        let vectors = u.column_iter().map(|col| col.into_owned()).collect();
        Self::new(u.nrows(), vectors, index_origin)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn vectors(&self) -> &[CVec] {
        &self.vectors
    }

    pub fn index_origin(&self) -> i64 {
        self.index_origin
    }

    /// Every vector multiplied by `factor`.
    pub fn scaled(&self, factor: num_complex::Complex64) -> Self {
        Self {
            dim: self.dim,
            vectors: self.vectors.iter().map(|v| v * factor).collect(),
            index_origin: self.index_origin,
        }
    }

    fn ensure_same_shape(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(FrameError::DimensionMismatch {
                context: "system dimension",
                expected: self.dim,
                actual: other.dim,
            });
        }
        if self.len() != other.len() {
            return Err(FrameError::DimensionMismatch {
                context: "system length",
                expected: self.len(),
                actual: other.len(),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrameReport {
    /// Smallest eigenvalue of `S` on the span of the system.
    pub lower_bound: f64,
    pub upper_bound: f64,
    pub rank: usize,
    pub spans_space: bool,
    pub tight: bool,
    /// `(λ_max(S) − λ_min(S)) / λ_max(S)` over the whole space.
    pub tightness_defect: f64,
    pub synthesis_norm_sq: f64,
}

impl FrameReport {
    /// Only a frame for its own span.
    pub fn frame_sequence_only(&self) -> bool {
        !self.spans_space
    }
}

/// `dim × K` matrix whose column `k` is `f_k`.
pub fn synthesis_matrix(f: &FrameSystem) -> CMat {
    CMat::from_columns(&f.vectors)
}

/// `⟨f, f_k⟩` for every `k`, linear in the first slot.
pub fn analysis_coefficients(frame: &FrameSystem, f: &CVec) -> Result<Vec<num_complex::Complex64>> {
    if f.len() != frame.dim {
        return Err(FrameError::DimensionMismatch {
            context: "analysed vector",
            expected: frame.dim,
            actual: f.len(),
        });
    }
    Ok(frame.vectors.iter().map(|fk| fk.dotc(f)).collect())
}

/// `S = U U* = Σ f_k f_k*`.
pub fn frame_operator(f: &FrameSystem) -> CMat {
    let u = synthesis_matrix(f);
    &u * u.adjoint()
}

/// Optimal frame bounds from the singular values of the synthesis matrix.
pub fn frame_bounds(f: &FrameSystem, tol: &Tolerances) -> Result<FrameReport> {
    let dec = numerics::svd(&synthesis_matrix(f))?;
    let top = dec.max();
    if top == 0.0 {
        return Err(FrameError::DegenerateSystem("all vectors are zero"));
    }
    let rank = dec.rank(tol.rank);
    let upper = top * top;
    let lower = dec.singulars[rank - 1].powi(2);
    Ok(assemble_report(f.dim, rank, lower, upper, tol))
}

/// Frame bounds read off a frame operator directly. Used for infinite orbits
/// whose `S` comes from the Stein equation.
pub fn bounds_from_frame_operator(s: &CMat, tol: &Tolerances) -> Result<FrameReport> {
    let eig = numerics::herm_eig(s)?;
    let upper = eig.values.last().copied().unwrap_or(0.0);
    if upper <= 0.0 {
        return Err(FrameError::DegenerateSystem("frame operator vanishes"));
    }
    let descending: Vec<f64> = eig.values.iter().rev().copied().collect();
    let rank = numerics::numeric_rank(&descending, tol.rank);
    let lower = descending[rank - 1];
    Ok(assemble_report(s.nrows(), rank, lower, upper, tol))
}

fn assemble_report(dim: usize, rank: usize, lower: f64, upper: f64, tol: &Tolerances) -> FrameReport {
    let spans_space = rank == dim;
    let whole_space_min = if spans_space { lower } else { 0.0 };
    let tightness_defect = ((upper - whole_space_min) / upper).max(0.0);
    FrameReport {
        lower_bound: lower,
        upper_bound: upper,
        rank,
        spans_space,
        tight: spans_space && tightness_defect <= tol.identity,
        tightness_defect,
        synthesis_norm_sq: upper,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrameSequenceReport {
    /// Nonzero eigenvalues of `U*U`, ascending.
    pub restricted_spectrum: Vec<f64>,
    /// All eigenvalues of `U*U`, ascending.
    pub full_spectrum: Vec<f64>,
    pub synthesis_norm_sq: f64,
    /// Restricted spectrum lies in `]0, ‖U‖²]`.
    pub contained: bool,
    /// Full spectrum lies in `[0, ‖U‖²]`.
    pub full_spectrum_bound: bool,
}

/// Spectral test on the Gram matrix `U*U`: the system is a frame sequence
/// exactly when the spectrum of `U*U` on `N(U)^⊥` stays away from 0.
pub fn frame_sequence_test(f: &FrameSystem, tol: &Tolerances) -> Result<FrameSequenceReport> {
    let u = synthesis_matrix(f);
    let dec = numerics::svd(&u)?;
    let sigma_max = dec.max();
    if sigma_max == 0.0 {
        return Err(FrameError::DegenerateSystem("all vectors are zero"));
    }
    let rank = dec.rank(tol.rank);
    let norm_sq = numerics::operator_norm(&u)?.powi(2);

    let gram = u.adjoint() * &u;
    let full = numerics::herm_eig(&gram)?.values;
    let restricted = full[full.len() - rank..].to_vec();

    let slack = tol.identity * norm_sq;
    let floor = (tol.rank * sigma_max).powi(2);
    let contained = restricted.first().is_some_and(|&m| m > floor)
        && restricted.last().is_some_and(|&m| m <= norm_sq + slack);
    let full_spectrum_bound = full.iter().all(|&x| x >= -slack && x <= norm_sq + slack);
    Ok(FrameSequenceReport {
        restricted_spectrum: restricted,
        full_spectrum: full,
        synthesis_norm_sq: norm_sq,
        contained,
        full_spectrum_bound,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalarFrameReport {
    /// `Σ |⟨f, f_k⟩|²`.
    pub sum: f64,
    /// `A ‖f‖²`.
    pub lower: f64,
    /// `B ‖f‖²`.
    pub upper: f64,
    pub lower_ok: bool,
    pub upper_ok: bool,
    pub frame_sequence_only: bool,
}

/// Checks that the scalars `⟨f, f_k⟩` form a frame for `C` with bounds
/// `A‖f‖²` and `B‖f‖²`, `(A, B)` being the optimal bounds of the system.
pub fn scalar_frame_check(frame: &FrameSystem, f: &CVec, tol: &Tolerances) -> Result<ScalarFrameReport> {
    let coeffs = analysis_coefficients(frame, f)?;
    let norm_sq = f.norm_squared();
    if norm_sq == 0.0 {
        return Err(FrameError::ZeroVector);
    }
    let report = frame_bounds(frame, tol)?;
    let sum: f64 = coeffs.iter().map(|z| z.norm_sqr()).sum();
    let lower = report.lower_bound * norm_sq;
    let upper = report.upper_bound * norm_sq;
    let slack = tol.identity * upper;
    Ok(ScalarFrameReport {
        sum,
        lower,
        upper,
        lower_ok: sum >= lower - slack,
        upper_ok: sum <= upper + slack,
        frame_sequence_only: report.frame_sequence_only(),
    })
}

/// Unit eigenvector of `S` for its smallest eigenvalue on the whole space,
/// together with that eigenvalue. When the system does not span, the witness
/// lies in the orthogonal complement of the span.
pub fn lower_bound_witness(f: &FrameSystem) -> Result<(CVec, f64)> {
    let eig = numerics::herm_eig(&frame_operator(f))?;
    Ok((eig.vectors.column(0).into_owned(), eig.values[0]))
}

/// `{S⁻¹ f_k}`.
pub fn canonical_dual(f: &FrameSystem, tol: &Tolerances) -> Result<FrameSystem> {
    let report = frame_bounds(f, tol)?;
    if !report.spans_space {
        return Err(FrameError::NotAFrame {
            rank: report.rank,
            dim: f.dim,
        });
    }
    let s_inv = numerics::apply_hermitian_function(&frame_operator(f), |x| 1.0 / x)?;
    let vectors = f.vectors.iter().map(|v| &s_inv * v).collect();
    FrameSystem::new(f.dim, vectors, f.index_origin)
}

/// `‖U_F U_G* − I‖`; zero exactly when `G` is a dual of `F`.
pub fn duality_defect(f: &FrameSystem, g: &FrameSystem) -> Result<f64> {
    f.ensure_same_shape(g)?;
    let product = synthesis_matrix(f) * synthesis_matrix(g).adjoint();
    numerics::operator_norm(&(product - numerics::identity(f.dim)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{c, unit};
    use approx::assert_abs_diff_eq;

    fn rv(xs: &[f64]) -> CVec {
        CVec::from_iterator(xs.len(), xs.iter().map(|&x| c(x, 0.0)))
    }

    fn onb() -> FrameSystem {
        FrameSystem::from_vectors(vec![unit(2, 0), unit(2, 1)]).unwrap()
    }

    fn redundant() -> FrameSystem {
        FrameSystem::from_vectors(vec![unit(2, 0), unit(2, 0), unit(2, 1)]).unwrap()
    }

    #[test]
    fn synthesis_matrix_columns() {
        assert_eq!(synthesis_matrix(&onb()), numerics::identity(2));
        let u = synthesis_matrix(&redundant());
        let expected = CMat::from_row_iterator(
            2,
            3,
            [1.0, 1.0, 0.0, 0.0, 0.0, 1.0].iter().map(|&x| c(x, 0.0)),
        );
        assert_eq!(u, expected);
    }

    #[test]
    fn analysis_coefficient_cases() {
        let f = CVec::from_vec(vec![c(3.0, 0.0), c(0.0, 4.0)]);
        let a = analysis_coefficients(&onb(), &f).unwrap();
        assert_eq!(a, vec![c(3.0, 0.0), c(0.0, 4.0)]);

        let a = analysis_coefficients(&redundant(), &rv(&[1.0, 1.0])).unwrap();
        assert_eq!(a, vec![c(1.0, 0.0); 3]);

        let pair = FrameSystem::from_vectors(vec![rv(&[1.0, 1.0]), rv(&[1.0, -1.0])]).unwrap();
        let a = analysis_coefficients(&pair, &rv(&[1.0, 0.0])).unwrap();
        assert_eq!(a, vec![c(1.0, 0.0), c(1.0, 0.0)]);

        assert!(matches!(
            analysis_coefficients(&onb(), &rv(&[1.0])),
            Err(FrameError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn analysis_is_conjugate_linear_in_frame_slot() {
        // ⟨f, i e1⟩ = -i ⟨f, e1⟩
        let frame = FrameSystem::from_vectors(vec![unit(2, 0) * c(0.0, 1.0)]).unwrap();
        let a = analysis_coefficients(&frame, &rv(&[1.0, 0.0])).unwrap();
        assert_eq!(a[0], c(0.0, -1.0));
    }

    #[test]
    fn frame_operator_cases() {
        assert_eq!(frame_operator(&onb()), numerics::identity(2));
        assert_eq!(frame_operator(&redundant()), numerics::real_diag(&[2.0, 1.0]));
    }

    #[test]
    fn bounds_cases() {
        let r = frame_bounds(&onb(), &Tolerances::default()).unwrap();
        assert_abs_diff_eq!(r.lower_bound, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(r.upper_bound, 1.0, epsilon = 1e-14);
        assert!(r.tight && r.spans_space);

        let r = frame_bounds(&redundant(), &Tolerances::default()).unwrap();
        assert_abs_diff_eq!(r.lower_bound, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(r.upper_bound, 2.0, epsilon = 1e-14);
        assert!(!r.tight);

        let zero = FrameSystem::from_vectors(vec![rv(&[0.0, 0.0])]).unwrap();
        assert!(matches!(
            frame_bounds(&zero, &Tolerances::default()),
            Err(FrameError::DegenerateSystem(_))
        ));
    }

    #[test]
    fn bounds_of_closed_form_orbit_operator() {
        let s = CMat::from_row_iterator(
            2,
            2,
            [4.0 / 3.0, 1.2, 1.2, 9.0 / 8.0].iter().map(|&x| c(x, 0.0)),
        );
        let r = bounds_from_frame_operator(&s, &Tolerances::default()).unwrap();
        assert_abs_diff_eq!(r.lower_bound, 0.024_66, epsilon = 1e-5);
        assert_abs_diff_eq!(r.upper_bound, 2.433_68, epsilon = 1e-5);
    }

    #[test]
    fn non_spanning_system_reports_frame_sequence() {
        let line = FrameSystem::from_vectors(vec![unit(2, 0), unit(2, 0) * c(2.0, 0.0)]).unwrap();
        let r = frame_bounds(&line, &Tolerances::default()).unwrap();
        assert_eq!(r.rank, 1);
        assert!(r.frame_sequence_only());
        assert_abs_diff_eq!(r.lower_bound, 5.0, epsilon = 1e-13);
        assert!(!r.tight);
        assert_abs_diff_eq!(r.tightness_defect, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn frame_sequence_cases() {
        let tol = Tolerances::default();
        let r = frame_sequence_test(&onb(), &tol).unwrap();
        assert_eq!(r.restricted_spectrum.len(), 2);
        assert!(r.contained);

        let r = frame_sequence_test(&redundant(), &tol).unwrap();
        assert_abs_diff_eq!(r.restricted_spectrum[0], 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(r.restricted_spectrum[1], 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(r.full_spectrum[0], 0.0, epsilon = 1e-14);
        assert!(r.contained && r.full_spectrum_bound);

        let h = 0.5f64.sqrt();
        let single = FrameSystem::from_vectors(vec![rv(&[h, h])]).unwrap();
        let r = frame_sequence_test(&single, &tol).unwrap();
        assert_eq!(r.restricted_spectrum.len(), 1);
        assert_abs_diff_eq!(r.restricted_spectrum[0], 1.0, epsilon = 1e-14);
        assert!(r.contained);
    }

    #[test]
    fn scalar_frame_cases() {
        let tol = Tolerances::default();
        let r = scalar_frame_check(&onb(), &unit(2, 0), &tol).unwrap();
        assert_abs_diff_eq!(r.sum, 1.0, epsilon = 1e-14);
        assert!(r.lower_ok && r.upper_ok);

        let r = scalar_frame_check(&redundant(), &rv(&[1.0, 1.0]), &tol).unwrap();
        assert_abs_diff_eq!(r.sum, 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(r.lower, 2.0, epsilon = 1e-13);
        assert_abs_diff_eq!(r.upper, 4.0, epsilon = 1e-13);
        assert!(r.lower_ok && r.upper_ok);

        assert_eq!(
            scalar_frame_check(&onb(), &rv(&[0.0, 0.0]), &tol).unwrap_err(),
            FrameError::ZeroVector
        );
    }

    #[test]
    fn canonical_dual_cases() {
        let tol = Tolerances::default();
        let dual = canonical_dual(&onb(), &tol).unwrap();
        assert!(duality_defect(&onb(), &dual).unwrap() < 1e-14);
        for (a, b) in dual.vectors().iter().zip(onb().vectors()) {
            assert!((a - b).norm() < 1e-14);
        }

        let dual = canonical_dual(&redundant(), &tol).unwrap();
        let expected = [rv(&[0.5, 0.0]), rv(&[0.5, 0.0]), rv(&[0.0, 1.0])];
        for (a, b) in dual.vectors().iter().zip(&expected) {
            assert!((a - b).norm() < 1e-14);
        }
        assert!(duality_defect(&redundant(), &dual).unwrap() < 1e-14);

        let tight = onb().scaled(c(2.0, 0.0));
        let dual = canonical_dual(&tight, &tol).unwrap();
        assert!((&dual.vectors()[0] - unit(2, 0) * c(0.5, 0.0)).norm() < 1e-14);

        let line = FrameSystem::from_vectors(vec![unit(2, 0)]).unwrap();
        assert!(matches!(canonical_dual(&line, &tol), Err(FrameError::NotAFrame { .. })));
    }

    #[test]
    fn duality_defect_of_scaled_basis() {
        let d = duality_defect(&onb(), &onb().scaled(c(2.0, 0.0))).unwrap();
        assert_abs_diff_eq!(d, 1.0, epsilon = 1e-14);
        assert!(duality_defect(&onb(), &redundant()).is_err());
    }

    #[test]
    fn witness_for_rank_deficient_system() {
        let line = FrameSystem::from_vectors(vec![unit(2, 0), unit(2, 0)]).unwrap();
        let (w, value) = lower_bound_witness(&line).unwrap();
        assert_abs_diff_eq!(value, 0.0, epsilon = 1e-14);
        assert!((frame_operator(&line) * &w).norm() < 1e-14);
    }

    #[test]
    fn empty_system_is_degenerate() {
        assert!(matches!(
            FrameSystem::new(2, vec![], 0),
            Err(FrameError::DegenerateSystem(_))
        ));
    }
}
