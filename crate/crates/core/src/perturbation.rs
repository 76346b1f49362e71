//! Stability of frames under perturbation: explicit bounds for a perturbed
//! system and a sampled checker for the scalar-coefficient perturbation
//! condition that preserves an operator representation.

use serde::Serialize;

use crate::dynamics::{recover_operator, RecoveryResult};
use crate::error::{FrameError, Result};
use crate::frames::{frame_bounds, synthesis_matrix, FrameSystem};
use crate::numerics::{self, CMat};
use crate::random;
use crate::tol::Tolerances;

/// Default number of sampled `(f, c)` pairs when hunting for violations.
pub const DEFAULT_TRIALS: usize = 10_000;

/// `(λ₁, λ₂, μ)` in `‖Σc(f−g)‖ ≤ λ₁‖Σcf‖ + λ₂‖Σcg‖ + μ‖c‖`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PerturbationParams {
    pub lambda1: f64,
    pub lambda2: f64,
    pub mu: f64,
}

impl PerturbationParams {
    pub fn new(lambda1: f64, lambda2: f64, mu: f64) -> Self {
        Self {
            lambda1,
            lambda2,
            mu,
        }
    }

    /// `max(λ₁ + μ/√A, λ₂)`.
    pub fn admissibility_value(&self, lower_bound: f64) -> f64 {
        (self.lambda1 + self.mu / lower_bound.sqrt()).max(self.lambda2)
    }

    pub fn admissible(&self, lower_bound: f64) -> bool {
        lower_bound > 0.0 && self.admissibility_value(lower_bound) < 1.0
    }
}

/// Frame bounds of a perturbed system:
/// `A' = A (1 − (λ₁ + λ₂ + μ/√A) / (1 + λ₂))²`,
/// `B' = B (1 + (λ₁ + λ₂ + μ/√B) / (1 − λ₂))²`.
pub fn casazza_bounds(a: f64, b: f64, p: &PerturbationParams) -> Result<(f64, f64)> {
    if !(a > 0.0 && b > 0.0) {
        return Err(FrameError::InvalidArgument(format!(
            "frame bounds must be positive (A = {a}, B = {b})"
        )));
    }
    if [p.lambda1, p.lambda2, p.mu].iter().any(|x| x.is_nan() || *x < 0.0) {
        return Err(FrameError::InvalidArgument(
            "perturbation parameters must be nonnegative".into(),
        ));
    }
    if !p.admissible(a) {
        return Err(FrameError::Admissibility {
            value: p.admissibility_value(a),
        });
    }
    let lower = a * (1.0 - (p.lambda1 + p.lambda2 + p.mu / a.sqrt()) / (1.0 + p.lambda2)).powi(2);
    let upper = b * (1.0 + (p.lambda1 + p.lambda2 + p.mu / b.sqrt()) / (1.0 - p.lambda2)).powi(2);
    Ok((lower, upper))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PerturbationFit {
    pub params: PerturbationParams,
    /// Lower frame bound `A` of the reference system.
    pub reference_lower_bound: f64,
    pub admissible: bool,
}

/// The certified triple `(0, 0, ‖U_F − U_G‖)`: with it the perturbation
/// inequality holds for every coefficient sequence.
pub fn perturbation_fit(f: &FrameSystem, g: &FrameSystem, tol: &Tolerances) -> Result<PerturbationFit> {
    ensure_same_shape(f, g)?;
    let mu = numerics::operator_norm(&(synthesis_matrix(f) - synthesis_matrix(g)))?;
    let report = frame_bounds(f, tol)?;
    let params = PerturbationParams::new(0.0, 0.0, mu);
    let a = if report.spans_space { report.lower_bound } else { 0.0 };
    Ok(PerturbationFit {
        params,
        reference_lower_bound: a,
        admissible: params.admissible(a),
    })
}

fn ensure_same_shape(f: &FrameSystem, g: &FrameSystem) -> Result<()> {
    if f.dim() != g.dim() {
        return Err(FrameError::DimensionMismatch {
            context: "perturbed system dimension",
            expected: f.dim(),
            actual: g.dim(),
        });
    }
    if f.len() != g.len() {
        return Err(FrameError::DimensionMismatch {
            context: "perturbed system length",
            expected: f.len(),
            actual: g.len(),
        });
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationReport {
    pub params: PerturbationParams,
    pub predicted_bounds: Option<(f64, f64)>,
    pub actual_bounds: Option<(f64, f64)>,
    pub sandwich_ok: bool,
    /// Largest sampled normalized violation of the scalar perturbation
    /// condition; `None` on the operator-norm path.
    pub max_violation_ratio: Option<f64>,
    pub hypothesis_holds: Option<bool>,
    pub representation: Option<RecoveryResult>,
}

fn sandwich(predicted: (f64, f64), actual: (f64, f64), tol: &Tolerances) -> bool {
    let slack = tol.identity * predicted.1.max(actual.1);
    predicted.0 <= actual.0 + slack && actual.1 <= predicted.1 + slack
}

/// Predicted bounds from the certified triple against the actual bounds of `G`.
pub fn sandwich_verify(f: &FrameSystem, g: &FrameSystem, tol: &Tolerances) -> Result<PerturbationReport> {
    let fit = perturbation_fit(f, g, tol)?;
    let reference = frame_bounds(f, tol)?;
    if !fit.admissible {
        return Err(FrameError::Admissibility {
            value: fit.params.admissibility_value(fit.reference_lower_bound),
        });
    }
    let predicted = casazza_bounds(reference.lower_bound, reference.upper_bound, &fit.params)?;
    let actual_report = frame_bounds(g, tol)?;
    let actual = (actual_report.lower_bound, actual_report.upper_bound);
    Ok(PerturbationReport {
        params: fit.params,
        predicted_bounds: Some(predicted),
        actual_bounds: Some(actual),
        sandwich_ok: actual_report.spans_space && sandwich(predicted, actual, tol),
        max_violation_ratio: None,
        hypothesis_holds: None,
        representation: None,
    })
}

/// Samples the condition
/// `|Σ c_k⟨f_k − g_k, f⟩| ≤ λ₁|Σ c_k⟨f_k, f⟩| + λ₂|Σ c_k⟨g_k, f⟩|`
/// over seeded unit pairs `(f, c)` and, when no violation is found, compares
/// the bounds of `G` with the `μ = 0` prediction and recovers the operator
/// generating `G`.
pub fn prop28_check(
    f: &FrameSystem,
    g: &FrameSystem,
    lambda1: f64,
    lambda2: f64,
    trials: usize,
    seed: u64,
    tol: &Tolerances,
) -> Result<PerturbationReport> {
    for (name, value) in [("lambda1", lambda1), ("lambda2", lambda2)] {
        if !(value > 0.0 && value < 1.0) {
            return Err(FrameError::ParamRange { name, value });
        }
    }
    if trials == 0 {
        return Err(FrameError::InvalidArgument("at least one trial is required".into()));
    }
    ensure_same_shape(f, g)?;
    let reference = frame_bounds(f, tol)?;
    if !reference.spans_space {
        return Err(FrameError::NotAFrame {
            rank: reference.rank,
            dim: f.dim(),
        });
    }

    let uf = synthesis_matrix(f);
    let ug = synthesis_matrix(g);
    let scale = numerics::operator_norm(&uf)? + numerics::operator_norm(&ug)?;
    let ratio = max_violation(&uf, &ug, lambda1, lambda2, trials, seed) / scale;
    let holds = ratio <= tol.identity;

    let params = PerturbationParams::new(lambda1, lambda2, 0.0);
    let mut report = PerturbationReport {
        params,
        predicted_bounds: None,
        actual_bounds: None,
        sandwich_ok: false,
        max_violation_ratio: Some(ratio),
        hypothesis_holds: Some(holds),
        representation: None,
    };
    if holds {
        let predicted = casazza_bounds(reference.lower_bound, reference.upper_bound, &params)?;
        let actual_report = frame_bounds(g, tol)?;
        let actual = (actual_report.lower_bound, actual_report.upper_bound);
        report.predicted_bounds = Some(predicted);
        report.actual_bounds = Some(actual);
        report.sandwich_ok = actual_report.spans_space && sandwich(predicted, actual, tol);
        if g.len() >= 2 {
            report.representation = Some(recover_operator(g, tol)?);
        }
    }
    Ok(report)
}

/// `max |⟨U_F c − U_G c, f⟩| − (λ₁|⟨U_F c, f⟩| + λ₂|⟨U_G c, f⟩|)` over sampled unit `f`, `c`.
fn max_violation(uf: &CMat, ug: &CMat, lambda1: f64, lambda2: f64, trials: usize, seed: u64) -> f64 {
    let (d, k) = uf.shape();
    (0..trials as u64)
        .map(|trial| {
            let mut rng = random::trial_rng(seed, trial);
            let f = random::unit_vec(&mut rng, d);
            let coeffs = random::unit_vec(&mut rng, k);
            let fc = f.dotc(&(uf * &coeffs)).norm();
            let gc = f.dotc(&(ug * &coeffs)).norm();
            let diff = f.dotc(&((uf - ug) * &coeffs)).norm();
            diff - (lambda1 * fc + lambda2 * gc)
        })
        .fold(f64::NEG_INFINITY, f64::max)
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

    fn onb() -> FrameSystem {
        FrameSystem::from_vectors(vec![unit(2, 0), unit(2, 1)]).unwrap()
    }

    fn stretched(x: f64) -> FrameSystem {
        FrameSystem::from_vectors(vec![unit(2, 0) * c(x, 0.0), unit(2, 1)]).unwrap()
    }

    #[test]
    fn worked_bounds() {
        let (a, b) = casazza_bounds(1.0, 1.0, &PerturbationParams::new(0.0, 0.0, 0.1)).unwrap();
        assert_abs_diff_eq!(a, 0.81, epsilon = 1e-15);
        assert_abs_diff_eq!(b, 1.21, epsilon = 1e-15);

        let (a, b) = casazza_bounds(2.0, 5.0, &PerturbationParams::new(0.0, 0.0, 0.0)).unwrap();
        assert_eq!((a, b), (2.0, 5.0));

        let (a, b) = casazza_bounds(1.0, 1.0, &PerturbationParams::new(0.0, 0.5, 0.0)).unwrap();
        assert_abs_diff_eq!(a, 4.0 / 9.0, epsilon = 1e-15);
        assert_abs_diff_eq!(b, 4.0, epsilon = 1e-15);
    }

    #[test]
    fn inadmissible_parameters_are_rejected() {
        let err = casazza_bounds(1.0, 1.0, &PerturbationParams::new(0.5, 0.0, 0.6)).unwrap_err();
        assert!(matches!(err, FrameError::Admissibility { .. }));
        let err = casazza_bounds(1.0, 1.0, &PerturbationParams::new(0.0, 1.0, 0.0)).unwrap_err();
        assert!(matches!(err, FrameError::Admissibility { .. }));
    }

    #[test]
    fn fit_cases() {
        let fit = perturbation_fit(&onb(), &onb(), &tol()).unwrap();
        assert_eq!(fit.params, PerturbationParams::new(0.0, 0.0, 0.0));

        let fit = perturbation_fit(&onb(), &stretched(1.1), &tol()).unwrap();
        assert_abs_diff_eq!(fit.params.mu, 0.1, epsilon = 1e-14);
        assert!(fit.admissible);

        let swapped = FrameSystem::from_vectors(vec![unit(2, 1), unit(2, 0)]).unwrap();
        let fit = perturbation_fit(&onb(), &swapped, &tol()).unwrap();
        // U_F − U_G = [[1, −1], [−1, 1]] has singular values (2, 0)
        assert_abs_diff_eq!(fit.params.mu, 2.0, epsilon = 1e-14);
        assert!(!fit.admissible);
    }

    #[test]
    fn sandwich_cases() {
        let r = sandwich_verify(&onb(), &stretched(1.1), &tol()).unwrap();
        let (pa, pb) = r.predicted_bounds.unwrap();
        assert_abs_diff_eq!(pa, 0.81, epsilon = 1e-13);
        assert_abs_diff_eq!(pb, 1.21, epsilon = 1e-13);
        let (aa, ab) = r.actual_bounds.unwrap();
        assert_abs_diff_eq!(aa, 1.0, epsilon = 1e-13);
        assert_abs_diff_eq!(ab, 1.21, epsilon = 1e-13);
        assert!(r.sandwich_ok);

        let r = sandwich_verify(&onb(), &onb(), &tol()).unwrap();
        assert_eq!(r.predicted_bounds, r.actual_bounds);
        assert!(r.sandwich_ok);

        let r = sandwich_verify(&onb(), &stretched(0.5), &tol()).unwrap();
        let (pa, pb) = r.predicted_bounds.unwrap();
        assert_abs_diff_eq!(pa, 0.25, epsilon = 1e-13);
        assert_abs_diff_eq!(pb, 2.25, epsilon = 1e-13);
        let (aa, ab) = r.actual_bounds.unwrap();
        assert_abs_diff_eq!(aa, 0.25, epsilon = 1e-13);
        assert_abs_diff_eq!(ab, 1.0, epsilon = 1e-13);
        assert!(r.sandwich_ok);

        let swapped = FrameSystem::from_vectors(vec![unit(2, 1), unit(2, 0)]).unwrap();
        assert!(matches!(
            sandwich_verify(&onb(), &swapped, &tol()),
            Err(FrameError::Admissibility { .. })
        ));
    }

    fn orbit() -> FrameSystem {
        let phi = CVec::from_vec(vec![c(1.0, 0.0), c(1.0, 0.0)]);
        iterate(&real_diag(&[0.5, 1.0 / 3.0]), &phi, 6).unwrap()
    }

    #[test]
    fn unperturbed_system_satisfies_condition() {
        let f = orbit();
        let r = prop28_check(&f, &f, 0.3, 0.7, 500, 1, &tol()).unwrap();
        assert!(r.max_violation_ratio.unwrap() <= 0.0);
        assert_eq!(r.hypothesis_holds, Some(true));
        assert!(r.sandwich_ok);
        assert!(r.representation.unwrap().consistent);
    }

    #[test]
    fn one_percent_scaling_is_accepted() {
        let f = orbit();
        let g = f.scaled(c(1.01, 0.0));
        let r = prop28_check(&f, &g, 0.5, 0.5, 500, 3, &tol()).unwrap();
        assert_eq!(r.hypothesis_holds, Some(true));
        assert!(r.sandwich_ok);
        let rep = r.representation.unwrap();
        assert!(rep.consistent);
    }

    #[test]
    fn sign_flip_is_rejected() {
        let f = orbit();
        let g = f.scaled(c(-1.0, 0.0));
        let r = prop28_check(&f, &g, 0.4, 0.4, 200, 5, &tol()).unwrap();
        assert!(r.max_violation_ratio.unwrap() > 0.0);
        assert_eq!(r.hypothesis_holds, Some(false));
        assert!(r.representation.is_none());
    }

    #[test]
    fn lambdas_must_lie_in_open_unit_interval() {
        let f = orbit();
        for (l1, l2) in [(0.0, 0.5), (0.5, 1.0), (-0.1, 0.5)] {
            assert!(matches!(
                prop28_check(&f, &f, l1, l2, 10, 0, &tol()),
                Err(FrameError::ParamRange { .. })
            ));
        }
    }
}
