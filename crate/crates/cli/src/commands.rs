//! One function per subcommand. Each takes parsed input documents and returns
//! the output document with the exit code it implies.

use framecast::dynamics::{
    self, bessel_test, conjecture_explore, linear_independence_test, multiplication_rep,
    recover_operator, representation_check, Horizon, IteratedSystem, RecoveryResult,
};
use framecast::frames::{self, FrameSystem};
use framecast::numerics::{self, c};
use framecast::perturbation::{self, PerturbationReport};
use framecast::random;
use framecast::{CMat, CVec, FrameError, Tolerances};
use serde_json::{json, Value};

use crate::document::{
    envelope, matrix_from, matrix_value, report, system_from, system_value, vector_from,
    vector_value, Input, Kind,
};
use crate::error::CliError;

pub const DEFAULT_CONJECTURE_TRIALS: usize = 64;
/// Longest truncation searched when reporting how deep an infinite orbit must
/// be cut for its tail to fall below the identity tolerance.
const MAX_TAIL_DEPTH: usize = 100_000;

#[derive(Debug, Clone)]
pub struct Outcome {
    pub document: Value,
    pub exit_code: i32,
}

impl Outcome {
    fn ok(document: Value) -> Self {
        Self { document, exit_code: 0 }
    }
}

fn to_value<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("report types serialize")
}

fn pair(p: Option<(f64, f64)>) -> Value {
    match p {
        Some((a, b)) => json!([a, b]),
        None => Value::Null,
    }
}

fn operator(input: &Input) -> Result<CMat, CliError> {
    let t = matrix_from(&input.payload, "operator")?;
    numerics::ensure_square(&t)?;
    Ok(t)
}

fn vector(input: &Input) -> Result<CVec, CliError> {
    vector_from(&input.payload, "vector")
}

fn operator_and_vector(op: &Input, vec: &Input) -> Result<(CMat, CVec), CliError> {
    let t = operator(op)?;
    let phi = vector(vec)?;
    if phi.len() != t.nrows() {
        return Err(FrameError::DimensionMismatch {
            context: "vector length vs operator size",
            expected: t.nrows(),
            actual: phi.len(),
        }
        .into());
    }
    Ok((t, phi))
}

pub fn analyze(system: &Input, tol: &Tolerances) -> Result<Outcome, CliError> {
    let f = system_from(&system.payload, "system")?;
    let bounds = frames::frame_bounds(&f, tol)?;
    let sequence = frames::frame_sequence_test(&f, tol)?;
    let exit_code = if bounds.spans_space { 0 } else { 3 };
    let result = json!({
        "frame": to_value(&bounds),
        "frame_sequence": to_value(&sequence),
        "frame_sequence_only": bounds.frame_sequence_only(),
        "len": f.len(),
    });
    Ok(Outcome {
        document: envelope(Kind::Report, report("analyze", &[("system", system)], result), None, tol),
        exit_code,
    })
}

/// `--steps K` emits the orbit as a system document.
pub fn iterate_steps(op: &Input, vec: &Input, steps: usize, tol: &Tolerances) -> Result<Outcome, CliError> {
    let (t, phi) = operator_and_vector(op, vec)?;
    let f = dynamics::iterate(&t, &phi, steps)?;
    Ok(Outcome::ok(envelope(Kind::System, system_value(&f), None, tol)))
}

/// `--infinite` emits the closed-form frame operator of the whole orbit.
pub fn iterate_infinite(op: &Input, vec: &Input, tol: &Tolerances) -> Result<Outcome, CliError> {
    let (t, phi) = operator_and_vector(op, vec)?;
    let system = IteratedSystem::new(t.clone(), phi.clone(), Horizon::Infinite, tol)?;
    let s = system.frame_operator(tol)?;
    let bounds = frames::bounds_from_frame_operator(&s, tol)?;
    let bessel = bessel_test(&t, &phi, tol)?;

    // S − S_K = T^K S (T*)^K exactly; report the first K where it is negligible.
    let target = tol.identity * numerics::operator_norm(&s)?;
    let mut tail = s.clone();
    let mut depth = None;
    for k in 0..=MAX_TAIL_DEPTH {
        let norm = numerics::operator_norm(&tail)?;
        if norm <= target {
            depth = Some((k, norm));
            break;
        }
        tail = &t * tail * t.adjoint();
    }

    let result = json!({
        "frame_operator": matrix_value(&s),
        "frame": to_value(&bounds),
        "bounds": [bounds.lower_bound, bounds.upper_bound],
        "is_frame": bounds.spans_space,
        "bessel": to_value(&bessel),
        "tail": {
            "target": target,
            "depth": depth.map(|d| d.0),
            "remainder_norm": depth.map(|d| d.1),
        },
    });
    Ok(Outcome::ok(envelope(
        Kind::Report,
        report("iterate", &[("operator", op), ("vector", vec)], result),
        None,
        tol,
    )))
}

fn recovery_value(r: &RecoveryResult) -> Value {
    json!({
        "t_hat": matrix_value(&r.t_hat),
        "residual": r.residual,
        "consistent": r.consistent,
        "kernel_shift_invariant": r.kernel_shift_invariant,
        "norm_of_t_hat": r.norm_of_t_hat,
    })
}

pub fn recover(system: &Input, tol: &Tolerances) -> Result<Outcome, CliError> {
    let f = system_from(&system.payload, "system")?;
    let r = recover_operator(&f, tol)?;
    let independence = linear_independence_test(&f, tol)?;
    let mut result = recovery_value(&r);
    result["linear_independence"] = to_value(&independence);
    Ok(Outcome::ok(envelope(
        Kind::Report,
        report("recover", &[("system", system)], result),
        None,
        tol,
    )))
}

pub fn represent_check(op: &Input, vec: &Input, tol: &Tolerances) -> Result<Outcome, CliError> {
    let (t, phi) = operator_and_vector(op, vec)?;
    let r = representation_check(&t, &phi, tol)?;
    let result = json!({
        "condition_i": r.condition_i,
        "spectral_radius": r.spectral_radius,
        "s": r.s.as_ref().map(matrix_value),
        "s_invertible": r.s_invertible,
        "stein_residual": r.stein_residual,
        "is_frame": r.is_frame,
        "bounds": pair(r.bounds),
    });
    Ok(Outcome::ok(envelope(
        Kind::Report,
        report("represent-check", &[("operator", op), ("vector", vec)], result),
        None,
        tol,
    )))
}

pub fn diagonalize(op: &Input, vec: &Input, tol: &Tolerances) -> Result<Outcome, CliError> {
    let (t, phi) = operator_and_vector(op, vec)?;
    let rep = multiplication_rep(&t, &phi, tol)?;
    let result = json!({
        "nodes": rep.nodes,
        "weights": rep.weights,
        "total_mass": rep.total_mass,
        "transform": matrix_value(&rep.transform),
        "unitarity_defect": rep.unitarity_defect(),
        "multiplication_defect": rep.multiplication_defect(&t),
    });
    Ok(Outcome::ok(envelope(
        Kind::Report,
        report("diagonalize", &[("operator", op), ("vector", vec)], result),
        None,
        tol,
    )))
}

fn perturbation_value(r: &PerturbationReport) -> Value {
    json!({
        "params": to_value(&r.params),
        "predicted_bounds": pair(r.predicted_bounds),
        "actual_bounds": pair(r.actual_bounds),
        "sandwich_ok": r.sandwich_ok,
        "max_violation_ratio": r.max_violation_ratio,
        "hypothesis_holds": r.hypothesis_holds,
        "representation": r.representation.as_ref().map(recovery_value),
    })
}

/// Scalar-condition parameters for the sampled check; absent means the
/// operator-norm path with `μ = ‖U_F − U_G‖`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampledCondition {
    pub lambda1: f64,
    pub lambda2: f64,
    pub trials: usize,
    pub seed: u64,
}

pub fn perturb(f: &Input, g: &Input, sampled: Option<SampledCondition>, tol: &Tolerances) -> Result<Outcome, CliError> {
    let fs = system_from(&f.payload, "reference system")?;
    let gs = system_from(&g.payload, "perturbed system")?;
    let (r, seed) = match sampled {
        Some(a) => (
            perturbation::prop28_check(&fs, &gs, a.lambda1, a.lambda2, a.trials, a.seed, tol)?,
            Some(a.seed),
        ),
        None => (perturbation::sandwich_verify(&fs, &gs, tol)?, None),
    };
    Ok(Outcome::ok(envelope(
        Kind::Report,
        report("perturb", &[("reference", f), ("perturbed", g)], perturbation_value(&r)),
        seed,
        tol,
    )))
}

pub fn conjecture(op: &Input, trials: usize, seed: u64, tol: &Tolerances) -> Result<Outcome, CliError> {
    let t = operator(op)?;
    let cert = conjecture_explore(&t, trials, seed, tol)?;
    let blocks: Vec<Value> = cert
        .blocks
        .iter()
        .map(|b| {
            json!({
                "eigenvalue": [b.eigenvalue.re, b.eigenvalue.im],
                "dim": b.dim(),
                "basis": matrix_value(&b.basis),
                "restricted_radius": b.restricted_radius,
                "certified": b.certified,
                "generator": b.generator.as_ref().map(vector_value),
                "block_bounds": pair(b.block_bounds),
                "reason": b.reason,
            })
        })
        .collect();
    let result = json!({
        "blocks": blocks,
        "covers_space": cert.covers_space,
        "invariance_defect": cert.invariance_defect,
        "trials": trials,
    });
    Ok(Outcome::ok(envelope(
        Kind::Report,
        report("conjecture", &[("operator", op)], result),
        Some(seed),
        tol,
    )))
}

/// Generated operator and (where the kind has one) generator vector.
#[derive(Debug, Clone)]
pub struct Generated {
    pub operator: Value,
    pub vector: Option<Value>,
}

/// `T = diag(1, ω, …, ω^{d−1})` with `ω = e^{2πi/N}` and `f₀ = (1, …, 1)`.
pub fn generate_harmonic(d: usize, n: usize, tol: &Tolerances) -> Result<Generated, CliError> {
    if d == 0 || n < d {
        return Err(CliError::Malformed(format!("harmonic requires 1 <= d <= N (got d={d}, N={n})")));
    }
    let roots: Vec<_> = (0..d)
        .map(|j| {
            let angle = 2.0 * std::f64::consts::PI * j as f64 / n as f64;
            root_of_unity(angle)
        })
        .collect();
    let t = CMat::from_diagonal(&CVec::from_vec(roots));
    let f0 = CVec::from_element(d, c(1.0, 0.0));
    Ok(Generated {
        operator: envelope(Kind::Operator, matrix_value(&t), None, tol),
        vector: Some(envelope(Kind::Vector, vector_value(&f0), None, tol)),
    })
}

/// `e^{iθ}` with the quarter turns made exact.
fn root_of_unity(angle: f64) -> num_complex::Complex64 {
    let z = c(angle.cos(), angle.sin());
    let snap = |x: f64| if x.abs() < 1e-15 { 0.0 } else { x };
    c(snap(z.re), snap(z.im))
}

pub fn generate_contraction(d: usize, rho: f64, seed: u64, tol: &Tolerances) -> Result<Generated, CliError> {
    if d == 0 {
        return Err(CliError::Malformed("contraction requires dim >= 1".into()));
    }
    if !(0.0..1.0).contains(&rho) {
        return Err(CliError::Malformed(format!("contraction requires 0 <= rho < 1 (got {rho})")));
    }
    let mut rng = random::trial_rng(seed, 0);
    let t = random::contraction(&mut rng, d, rho);
    let phi = random::gaussian_vec(&mut rng, d);
    Ok(Generated {
        operator: envelope(Kind::Operator, matrix_value(&t), Some(seed), tol),
        vector: Some(envelope(Kind::Vector, vector_value(&phi), Some(seed), tol)),
    })
}

pub fn generate_jordan(lambda: f64, size: usize, tol: &Tolerances) -> Result<Generated, CliError> {
    if size == 0 || !lambda.is_finite() {
        return Err(CliError::Malformed(format!(
            "jordan requires a finite eigenvalue and size >= 1 (got {lambda}, {size})"
        )));
    }
    let mut t = numerics::identity(size) * c(lambda, 0.0);
    for i in 0..size - 1 {
        t[(i, i + 1)] = c(1.0, 0.0);
    }
    Ok(Generated {
        operator: envelope(Kind::Operator, matrix_value(&t), None, tol),
        vector: None,
    })
}

pub fn system_document(f: &FrameSystem, tol: &Tolerances) -> Value {
    envelope(Kind::System, system_value(f), None, tol)
}
