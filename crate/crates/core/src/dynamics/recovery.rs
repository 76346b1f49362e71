use num_complex::Complex64;
use serde::Serialize;

use crate::error::{FrameError, Result};
use crate::frames::{synthesis_matrix, FrameSystem};
use crate::numerics::{self, CMat};
use crate::tol::Tolerances;

#[derive(Debug, Clone, PartialEq)]
pub struct RecoveryResult {
    /// `F₂ · F₁⁺`, the least-squares operator mapping each vector to its successor.
    pub t_hat: CMat,
    /// `max_k ‖T̂ f_k − f_{k+1}‖ / max_k ‖f_k‖`.
    pub residual: f64,
    pub consistent: bool,
    /// Kernel of the synthesis matrix is closed under the truncated right shift.
    pub kernel_shift_invariant: bool,
    pub norm_of_t_hat: f64,
}

/// Recovers the operator `T` with `f_{k+1} = T f_k` from the system, if one exists.
///
/// A linear `T` exists exactly when every linear relation among
/// `f_1 … f_{K−1}` survives the shift to `f_2 … f_K`; the residual of the
/// least-squares fit measures that. The shift-invariance of the synthesis
/// kernel is evaluated independently from the null space of `U`.
pub fn recover_operator(f: &FrameSystem, tol: &Tolerances) -> Result<RecoveryResult> {
    let k = f.len();
    if k < 2 {
        return Err(FrameError::InvalidArgument(
            "operator recovery needs at least two vectors".into(),
        ));
    }
    let u = synthesis_matrix(f);
    let head = u.columns(0, k - 1).into_owned();
    let tail = u.columns(1, k - 1).into_owned();
    let t_hat = &tail * numerics::pinv(&head, None)?;

    let scale = f.vectors().iter().map(|v| v.norm()).fold(0.0, f64::max);
    let misfit = (&t_hat * &head - &tail)
        .column_iter()
        .map(|col| col.norm())
        .fold(0.0, f64::max);
    let residual = if scale > 0.0 { misfit / scale } else { 0.0 };

    Ok(RecoveryResult {
        norm_of_t_hat: numerics::operator_norm(&t_hat)?,
        consistent: residual <= tol.identity,
        kernel_shift_invariant: kernel_shift_invariant(&u, tol)?,
        residual,
        t_hat,
    })
}

fn kernel_shift_invariant(u: &CMat, tol: &Tolerances) -> Result<bool> {
    let k = u.ncols();
    let kernel = numerics::null_space(u, tol.rank)?;
    if kernel.ncols() == 0 {
        return Ok(true);
    }
    // Restrict to kernel vectors whose last coefficient vanishes, so the
    // truncated shift loses nothing.
    let last_row = kernel.rows(k - 1, 1).into_owned();
    let combos = numerics::null_space(&last_row, tol.rank)?;
    let admissible = &kernel * combos;
    if admissible.ncols() == 0 {
        return Ok(true);
    }
    let mut shifted = CMat::zeros(k, admissible.ncols());
    shifted
        .rows_mut(1, k - 1)
        .copy_from(&admissible.rows(0, k - 1));
    let image = u * shifted;
    let scale = numerics::operator_norm(u)?;
    Ok(numerics::operator_norm(&image)? <= tol.identity * scale.max(f64::MIN_POSITIVE))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct IndependenceReport {
    pub independent: bool,
    pub rank: usize,
}

pub fn linear_independence_test(f: &FrameSystem, tol: &Tolerances) -> Result<IndependenceReport> {
    let rank = numerics::svd(&synthesis_matrix(f))?.rank(tol.rank);
    Ok(IndependenceReport {
        independent: rank == f.len(),
        rank,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RangeEntry {
    pub lambda: Complex64,
    /// `dim − rank(T − λI)`; zero exactly when `T − λI` has dense (= full) range.
    pub rank_defect: usize,
    pub smallest_singular: f64,
    pub dense_range: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RangeReport {
    pub rank: usize,
    /// Ranges of matrices are always closed.
    pub closed_range: bool,
    pub entries: Vec<RangeEntry>,
}

/// Rank defect and smallest singular value of `T − λI` over the eigenvalues of
/// `T` followed by `extra` points.
pub fn range_diagnostics(t: &CMat, extra: &[Complex64], tol: &Tolerances) -> Result<RangeReport> {
    let d = numerics::ensure_square(t)?;
    let norm = numerics::operator_norm(t)?;
    let mut grid = numerics::general_eigenvalues(t)?;
    grid.extend_from_slice(extra);

    let entries = grid
        .into_iter()
        .map(|lambda| {
            let shifted = t - numerics::identity(d) * lambda;
            let dec = numerics::svd(&shifted)?;
            let scale = norm.max(lambda.norm());
            let cutoff = tol.rank * scale;
            let rank = dec.singulars.iter().filter(|&&s| s > cutoff).count();
            Ok(RangeEntry {
                lambda,
                rank_defect: d - rank,
                smallest_singular: dec.singulars.last().copied().unwrap_or(0.0),
                dense_range: rank == d,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(RangeReport {
        rank: numerics::svd(t)?.rank(tol.rank),
        closed_range: true,
        entries,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::iterate;
    use crate::numerics::{c, real_diag, unit, CVec};
    use approx::assert_abs_diff_eq;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn system(vs: Vec<CVec>) -> FrameSystem {
        FrameSystem::from_vectors(vs).unwrap()
    }

    #[test]
    fn recovers_swap_from_alternating_orbit() {
        let r = recover_operator(&system(vec![unit(2, 0), unit(2, 1), unit(2, 0)]), &tol()).unwrap();
        let swap = CMat::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]);
        assert!((r.t_hat - swap).norm() < 1e-14);
        assert!(r.residual < 1e-15);
        assert!(r.consistent && r.kernel_shift_invariant);
    }

    #[test]
    fn scalar_action_on_a_line() {
        let r = recover_operator(&system(vec![unit(2, 0), unit(2, 0) * c(2.0, 0.0)]), &tol()).unwrap();
        assert!((&r.t_hat * unit(2, 0) - unit(2, 0) * c(2.0, 0.0)).norm() < 1e-14);
        assert!(r.consistent);
        assert_abs_diff_eq!(r.norm_of_t_hat, 2.0, epsilon = 1e-14);
    }

    #[test]
    fn conflicting_transitions_are_inconsistent() {
        let sum = unit(2, 0) + unit(2, 1);
        let r = recover_operator(
            &system(vec![unit(2, 0), unit(2, 1), unit(2, 0), sum]),
            &tol(),
        )
        .unwrap();
        assert!(r.residual > 0.1);
        assert!(!r.consistent);
        assert!(!r.kernel_shift_invariant);
    }

    #[test]
    fn recovery_needs_two_vectors() {
        assert!(recover_operator(&system(vec![unit(2, 0)]), &tol()).is_err());
    }

    #[test]
    fn orbit_of_known_operator_round_trips() {
        let t = CMat::from_row_slice(
            2,
            2,
            &[c(0.3, 0.1), c(0.2, 0.0), c(-0.1, 0.0), c(0.4, -0.2)],
        );
        let phi = CVec::from_vec(vec![c(1.0, 0.0), c(0.5, 0.5)]);
        let r = recover_operator(&iterate(&t, &phi, 4).unwrap(), &tol()).unwrap();
        assert!((r.t_hat - &t).norm() < 1e-12);
        assert!(r.consistent && r.kernel_shift_invariant);
    }

    #[test]
    fn independence_cases() {
        let r = linear_independence_test(&system(vec![unit(2, 0), unit(2, 1)]), &tol()).unwrap();
        assert!(r.independent);
        let r = linear_independence_test(&system(vec![unit(2, 0), unit(2, 0)]), &tol()).unwrap();
        assert!(!r.independent);
        assert_eq!(r.rank, 1);
        let r = linear_independence_test(
            &system(vec![unit(2, 0), unit(2, 1), unit(2, 0) + unit(2, 1)]),
            &tol(),
        )
        .unwrap();
        assert!(!r.independent);
    }

    #[test]
    fn range_cases() {
        let t = real_diag(&[0.5, 1.0 / 3.0]);
        let r = range_diagnostics(&t, &[c(5.0, 0.0)], &tol()).unwrap();
        assert!(r.closed_range);
        assert_eq!(r.rank, 2);
        let at_half = r.entries.iter().find(|e| e.lambda == c(0.5, 0.0)).unwrap();
        assert_eq!(at_half.rank_defect, 1);
        assert!(!at_half.dense_range);
        let at_five = r.entries.last().unwrap();
        assert_eq!(at_five.rank_defect, 0);
        assert!(at_five.dense_range);

        let r = range_diagnostics(&numerics::identity(3), &[c(1.0, 0.0)], &tol()).unwrap();
        assert!(r.entries.iter().all(|e| e.rank_defect == 3));
    }
}
