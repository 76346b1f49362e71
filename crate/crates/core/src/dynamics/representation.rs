use crate::error::{FrameError, Result};
use crate::numerics::{self, CMat, CVec};
use crate::tol::Tolerances;

use super::{check_shapes, power_decay_test};

/// `⟨f, g⟩ e`, the operator response of `g` with respect to the unit vector `e`.
pub fn operator_response(g: &CVec, e: &CVec, f: &CVec, tol: &Tolerances) -> Result<CVec> {
    check_unit(e, tol)?;
    for (v, what) in [(g, "response vector g"), (f, "argument f")] {
        if v.len() != e.len() {
            return Err(FrameError::DimensionMismatch {
                context: what,
                expected: e.len(),
                actual: v.len(),
            });
        }
    }
    Ok(e * g.dotc(f))
}

/// Matrix of `f ↦ ⟨f, g⟩ e`, i.e. `e g*`. Its operator norm is `‖g‖`.
pub fn operator_response_matrix(g: &CVec, e: &CVec, tol: &Tolerances) -> Result<CMat> {
    check_unit(e, tol)?;
    if g.len() != e.len() {
        return Err(FrameError::DimensionMismatch {
            context: "response vector g",
            expected: e.len(),
            actual: g.len(),
        });
    }
    Ok(e * g.adjoint())
}

fn check_unit(e: &CVec, tol: &Tolerances) -> Result<()> {
    let norm = e.norm();
    if (norm - 1.0).abs() > tol.identity {
        return Err(FrameError::NotUnit { norm });
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct RepresentationReport {
    /// `(T*)^n φ → 0` for all `φ`.
    pub condition_i: bool,
    pub spectral_radius: f64,
    /// Solution of `S − T S T* = f₁ f₁*`; absent when condition (i) fails.
    pub s: Option<CMat>,
    pub s_invertible: bool,
    /// `‖T S T* − S + f₁ f₁*‖`.
    pub stein_residual: Option<f64>,
    pub is_frame: bool,
    pub bounds: Option<(f64, f64)>,
}

/// Decides whether `{T^k f₁}` is a frame through the Stein identity
/// `T S T* = S − ‖f₁‖ Λ_{f₁}^e`, where `‖f₁‖ Λ_{f₁}^e = f₁ f₁*`.
pub fn representation_check(t: &CMat, f1: &CVec, tol: &Tolerances) -> Result<RepresentationReport> {
    check_shapes(t, f1)?;
    let decay = power_decay_test(t, tol)?;
    if !decay.decays {
        return Ok(RepresentationReport {
            condition_i: false,
            spectral_radius: decay.spectral_radius,
            s: None,
            s_invertible: false,
            stein_residual: None,
            is_frame: false,
            bounds: None,
        });
    }
    let w = f1 * f1.adjoint();
    let s = numerics::stein_solve(t, &w, tol)?;
    let residual = numerics::operator_norm(&(t * &s * t.adjoint() - &s + &w))?;
    let eig = numerics::herm_eig(&s)?;
    let lo = eig.values[0];
    let hi = *eig.values.last().expect("nonempty spectrum");
    let s_invertible = hi > 0.0 && lo > tol.rank * hi;
    Ok(RepresentationReport {
        condition_i: true,
        spectral_radius: decay.spectral_radius,
        s_invertible,
        stein_residual: Some(residual),
        is_frame: s_invertible,
        bounds: s_invertible.then_some((lo, hi)),
        s: Some(s),
    })
}

/// Diagonalization of a Hermitian `T` relative to the spectral measure of a
/// cyclic vector `φ`.
///
/// `L²(σ(T), μ_φ)` is identified with `C^m` (one coordinate per node) under
/// the weighted inner product `⟨u, v⟩_μ = Σ u_i conj(v_i) w_i`. The transform
/// sends `p(T)φ` to the node values `(p(λ_1), …, p(λ_m))`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralRep {
    /// Distinct eigenvalues, ascending.
    pub nodes: Vec<f64>,
    /// `μ_φ({λ_i}) = ‖P_i φ‖²`.
    pub weights: Vec<f64>,
    /// `m × d` matrix of `V`.
    pub transform: CMat,
    pub total_mass: f64,
}

impl SpectralRep {
    /// Adjoint of `V` for the weighted inner product: `V^† = V* diag(w)`.
    pub fn adjoint(&self) -> CMat {
        self.transform.adjoint() * numerics::real_diag(&self.weights)
    }

    /// Operator norm of an `m × m` matrix on the weighted space.
    pub fn weighted_norm(&self, x: &CMat) -> f64 {
        let sqrt_w: Vec<f64> = self.weights.iter().map(|w| w.sqrt()).collect();
        let inv_sqrt_w: Vec<f64> = sqrt_w.iter().map(|w| 1.0 / w).collect();
        let conj = numerics::real_diag(&sqrt_w) * x * numerics::real_diag(&inv_sqrt_w);
        numerics::operator_norm(&conj).unwrap_or(f64::INFINITY)
    }

    /// `max(‖V^†V − I‖, ‖VV^† − I‖_μ)`.
    pub fn unitarity_defect(&self) -> f64 {
        let v = &self.transform;
        let vdag = self.adjoint();
        let left = numerics::operator_norm(&(&vdag * v - numerics::identity(v.ncols())))
            .unwrap_or(f64::INFINITY);
        let right = self.weighted_norm(&(v * &vdag - numerics::identity(v.nrows())));
        left.max(right)
    }

    /// `‖V T V^† − diag(nodes)‖_μ`.
    pub fn multiplication_defect(&self, t: &CMat) -> f64 {
        let vtv = &self.transform * t * self.adjoint();
        self.weighted_norm(&(vtv - numerics::real_diag(&self.nodes)))
    }

    pub fn apply(&self, x: &CVec) -> CVec {
        &self.transform * x
    }
}

pub fn multiplication_rep(t: &CMat, phi: &CVec, tol: &Tolerances) -> Result<SpectralRep> {
    let d = check_shapes(t, phi)?;
    let defect = numerics::hermitian_defect(t);
    if defect > tol.identity * numerics::operator_norm(t)?.max(1.0) {
        return Err(FrameError::NotHermitian { defect });
    }
    let phi_norm = phi.norm();
    if phi_norm == 0.0 {
        return Err(FrameError::NotCyclic("generator is zero".into()));
    }

    let eig = numerics::herm_eig(t)?;
    let spread = eig.values[d - 1] - eig.values[0];
    let merge = tol.node_merge * spread;

    // Group ascending eigenvalues whose consecutive gaps are within `merge`.
    let mut groups: Vec<Vec<usize>> = vec![vec![0]];
    for i in 1..d {
        if eig.values[i] - eig.values[i - 1] <= merge {
            groups.last_mut().expect("nonempty").push(i);
        } else {
            groups.push(vec![i]);
        }
    }
    if groups.len() < d {
        return Err(FrameError::NotCyclic(format!(
            "T has {} distinct eigenvalues in dimension {d}",
            groups.len()
        )));
    }

    let mut nodes = Vec::with_capacity(d);
    let mut weights = Vec::with_capacity(d);
    let mut projections = Vec::with_capacity(d);
    for group in &groups {
        let node = group.iter().map(|&i| eig.values[i]).sum::<f64>() / group.len() as f64;
        let mut p = CVec::zeros(d);
        for &i in group {
            let q = eig.vectors.column(i);
            p += q * q.dotc(phi);
        }
        let w = p.norm_squared();
        if w.sqrt() <= tol.rank * phi_norm {
            return Err(FrameError::NotCyclic(format!(
                "spectral measure vanishes at eigenvalue {node}"
            )));
        }
        nodes.push(node);
        weights.push(w);
        projections.push(p);
    }

    // V = diag(w)^{-1} B*, B = [P_1 φ … P_m φ].
    let b = CMat::from_columns(&projections);
    let inv_w: Vec<f64> = weights.iter().map(|w| 1.0 / w).collect();
    let transform = numerics::real_diag(&inv_w) * b.adjoint();
    Ok(SpectralRep {
        total_mass: weights.iter().sum(),
        nodes,
        weights,
        transform,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{c, real_diag, unit};
    use approx::assert_abs_diff_eq;

    fn rv(xs: &[f64]) -> CVec {
        CVec::from_iterator(xs.len(), xs.iter().map(|&x| c(x, 0.0)))
    }

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn operator_response_cases() {
        let e1 = unit(2, 0);
        assert_eq!(operator_response(&e1, &e1, &e1, &tol()).unwrap(), e1);

        let r = operator_response(&(unit(2, 0) * c(2.0, 0.0)), &unit(2, 1), &e1, &tol()).unwrap();
        assert_eq!(r, unit(2, 1) * c(2.0, 0.0));

        let r = operator_response(&unit(2, 1), &e1, &e1, &tol()).unwrap();
        assert_eq!(r.norm(), 0.0);

        assert!(matches!(
            operator_response(&e1, &rv(&[2.0, 0.0]), &e1, &tol()),
            Err(FrameError::NotUnit { .. })
        ));
    }

    #[test]
    fn response_matrix_norm_is_norm_of_g() {
        let g = CVec::from_vec(vec![c(3.0, 1.0), c(0.0, -4.0)]);
        let m = operator_response_matrix(&g, &unit(2, 1), &tol()).unwrap();
        assert_abs_diff_eq!(numerics::operator_norm(&m).unwrap(), g.norm(), epsilon = 1e-13);
        let f = rv(&[1.0, 2.0]);
        let direct = operator_response(&g, &unit(2, 1), &f, &tol()).unwrap();
        assert!((m * f - direct).norm() < 1e-14);
    }

    #[test]
    fn stein_characterization_of_geometric_orbit() {
        let t = real_diag(&[0.5, 1.0 / 3.0]);
        let r = representation_check(&t, &rv(&[1.0, 1.0]), &tol()).unwrap();
        assert!(r.condition_i && r.is_frame && r.s_invertible);
        let s = r.s.unwrap();
        assert_abs_diff_eq!(s[(0, 0)].re, 4.0 / 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(s[(0, 1)].re, 6.0 / 5.0, epsilon = 1e-14);
        assert_abs_diff_eq!(s[(1, 1)].re, 9.0 / 8.0, epsilon = 1e-14);
        assert!(r.stein_residual.unwrap() <= 1e-10);
        let (a, b) = r.bounds.unwrap();
        assert_abs_diff_eq!(a, 0.024_66, epsilon = 1e-5);
        assert_abs_diff_eq!(b, 2.433_68, epsilon = 1e-5);
    }

    #[test]
    fn unitary_operator_fails_condition_i() {
        let u = CMat::from_diagonal(&CVec::from_vec(vec![c(1.0, 0.0), c(0.0, 1.0)]));
        let r = representation_check(&u, &rv(&[1.0, 1.0]), &tol()).unwrap();
        assert!(!r.condition_i && !r.is_frame);
        assert!(r.s.is_none());
    }

    #[test]
    fn non_cyclic_generator_gives_singular_s() {
        let r = representation_check(&real_diag(&[0.5, 1.0 / 3.0]), &unit(2, 0), &tol()).unwrap();
        assert!(r.condition_i);
        assert!(!r.s_invertible && !r.is_frame);
        let s = r.s.unwrap();
        assert_abs_diff_eq!(s[(0, 0)].re, 4.0 / 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(s[(1, 1)].norm(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn multiplication_rep_of_diagonal() {
        let r = multiplication_rep(&real_diag(&[2.0, 3.0]), &rv(&[1.0, 1.0]), &tol()).unwrap();
        assert_eq!(r.nodes.len(), 2);
        assert_abs_diff_eq!(r.nodes[0], 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(r.nodes[1], 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(r.weights[0], 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(r.weights[1], 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(r.total_mass, 2.0, epsilon = 1e-14);
    }

    #[test]
    fn multiplication_rep_of_swap() {
        let swap = CMat::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]);
        let r = multiplication_rep(&swap, &unit(2, 0), &tol()).unwrap();
        assert_abs_diff_eq!(r.nodes[0], -1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(r.nodes[1], 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(r.weights[0], 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(r.weights[1], 0.5, epsilon = 1e-14);
        assert!(r.unitarity_defect() < 1e-14);
        assert!(r.multiplication_defect(&swap) < 1e-14);
        // V φ is the constant function 1
        let one = r.apply(&unit(2, 0));
        assert!((one - rv(&[1.0, 1.0])).norm() < 1e-14);
    }

    #[test]
    fn multiplication_rep_errors() {
        let err = multiplication_rep(&real_diag(&[2.0, 3.0]), &unit(2, 0), &tol()).unwrap_err();
        assert!(matches!(err, FrameError::NotCyclic(_)));

        let err = multiplication_rep(&numerics::identity(2), &rv(&[1.0, 1.0]), &tol()).unwrap_err();
        assert!(matches!(err, FrameError::NotCyclic(_)));

        let upper = CMat::from_row_slice(2, 2, &[c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(2.0, 0.0)]);
        let err = multiplication_rep(&upper, &rv(&[1.0, 1.0]), &tol()).unwrap_err();
        assert!(matches!(err, FrameError::NotHermitian { .. }));
    }
}
