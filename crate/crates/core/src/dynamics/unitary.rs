use serde::Serialize;

use crate::error::{FrameError, Result};
use crate::frames::{self, FrameSystem};
use crate::numerics::{self, CMat, CVec};
use crate::tol::Tolerances;

use super::check_shapes;

/// Smallest `N ≤ max_n` with `‖T^N − I‖ ≤ tol.identity`.
pub fn detect_period(t: &CMat, max_n: usize, tol: &Tolerances) -> Result<Option<usize>> {
    let d = numerics::ensure_square(t)?;
    let id = numerics::identity(d);
    let mut power = id.clone();
    for n in 1..=max_n {
        power = &power * t;
        if numerics::operator_norm(&(&power - &id))? <= tol.identity {
            return Ok(Some(n));
        }
    }
    Ok(None)
}

fn ensure_invertible(t: &CMat, tol: &Tolerances) -> Result<CMat> {
    let dec = numerics::svd(t)?;
    let sigma_min = dec.singulars.last().copied().unwrap_or(0.0);
    if sigma_min <= tol.rank * dec.max() || dec.max() == 0.0 {
        return Err(FrameError::SingularOperator { sigma_min });
    }
    numerics::inverse(t)
}

/// `T^k v` for `k = from..from+count`, using `inv` for negative powers.
fn two_sided_orbit(t: &CMat, inv: &CMat, v: &CVec, from: i64, count: usize) -> Vec<CVec> {
    let start = if from >= 0 {
        numerics::mat_pow(t, from as usize) * v
    } else {
        numerics::mat_pow(inv, from.unsigned_abs() as usize) * v
    };
    let mut out = Vec::with_capacity(count);
    let mut current = start;
    for _ in 0..count {
        let next = t * &current;
        out.push(current);
        current = next;
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZTightReport {
    /// Exact period `N` with `T^N = I`, if one was found among `N ≤ 2K + 1`.
    pub period: Option<usize>,
    pub index_origin: i64,
    pub orbit_len: usize,
    pub spans_space: bool,
    pub bounds: (f64, f64),
    pub tight: bool,
    pub tightness_defect: f64,
    /// `max(‖T*T − I‖, ‖TT* − I‖)`.
    pub isometry_defect: f64,
    pub unitary: bool,
    /// Tight over one full period: the two-sided orbit is an exact finite group orbit.
    pub certified: bool,
    /// `certified ⇒ unitary`.
    pub implication_holds: bool,
}

/// Tightness of the two-sided orbit `{T^k f₀}` against unitarity of `T`.
///
/// The orbit is truncated to `k = −K..K`. When `T^N = I` for some
/// `N ≤ 2K + 1` the orbit is a finite group orbit and one period
/// `k = 0..N−1` represents it exactly; only then can tightness be certified.
pub fn z_tight_unitary_check(t: &CMat, f0: &CVec, k: usize, tol: &Tolerances) -> Result<ZTightReport> {
    let d = check_shapes(t, f0)?;
    if k == 0 {
        return Err(FrameError::InvalidArgument("truncation K must be at least 1".into()));
    }
    let inv = ensure_invertible(t, tol)?;
    let period = detect_period(t, 2 * k + 1, tol)?;
    let (origin, count) = match period {
        Some(n) => (0, n),
        None => (-(k as i64), 2 * k + 1),
    };
    let system = FrameSystem::new(d, two_sided_orbit(t, &inv, f0, origin, count), origin)?;
    let report = frames::frame_bounds(&system, tol)?;

    let id = numerics::identity(d);
    let isometry_defect = numerics::operator_norm(&(t.adjoint() * t - &id))?
        .max(numerics::operator_norm(&(t * t.adjoint() - &id))?);
    let unitary = isometry_defect <= tol.identity;
    let certified = period.is_some() && report.tight;
    Ok(ZTightReport {
        period,
        index_origin: origin,
        orbit_len: count,
        spans_space: report.spans_space,
        bounds: (report.lower_bound, report.upper_bound),
        tight: report.tight,
        tightness_defect: report.tightness_defect,
        isometry_defect,
        unitary,
        certified,
        implication_holds: !certified || unitary,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DualOperatorReport {
    /// Common period of `T` and `U`, if any `N ≤ 2K + 1` works for both.
    pub period: Option<usize>,
    /// `‖Σ_k (T^k f₀)(U^k g₀)* − I‖`.
    pub reconstruction_defect: f64,
    /// `‖T U* − I‖`.
    pub tu_star_defect: f64,
    pub operators_equal: bool,
    /// `{U^k g₀}` is a dual of `{T^k f₀}` and `T` is unitary.
    pub hypotheses_hold: bool,
    /// `hypotheses_hold ⇒ operators_equal`.
    pub conclusion_holds: bool,
}

/// If `{U^k g₀}` is a dual of the tight two-sided orbit `{T^k f₀}`, then `TU* = I`
/// and hence `U = T`. Sums run over one common period when there is one and
/// over `k = −K..K` otherwise.
pub fn dual_operator_check(
    t: &CMat,
    f0: &CVec,
    u: &CMat,
    g0: &CVec,
    k: usize,
    tol: &Tolerances,
) -> Result<DualOperatorReport> {
    let d = check_shapes(t, f0)?;
    if check_shapes(u, g0)? != d {
        return Err(FrameError::DimensionMismatch {
            context: "dual operator size",
            expected: d,
            actual: u.nrows(),
        });
    }
    let id = numerics::identity(d);
    let max_n = 2 * k + 1;
    let mut period = None;
    let (mut tp, mut up) = (id.clone(), id.clone());
    for n in 1..=max_n {
        tp = &tp * t;
        up = &up * u;
        if numerics::operator_norm(&(&tp - &id))? <= tol.identity
            && numerics::operator_norm(&(&up - &id))? <= tol.identity
        {
            period = Some(n);
            break;
        }
    }

    let (origin, count) = match period {
        Some(n) => (0, n),
        None => (-(k as i64), max_n),
    };
    let (t_inv, u_inv) = if origin < 0 {
        (ensure_invertible(t, tol)?, ensure_invertible(u, tol)?)
    } else {
        (id.clone(), id.clone())
    };
    let primal = two_sided_orbit(t, &t_inv, f0, origin, count);
    let dual = two_sided_orbit(u, &u_inv, g0, origin, count);
    let mut sum = CMat::zeros(d, d);
    for (p, q) in primal.iter().zip(&dual) {
        sum += p * q.adjoint();
    }
    let reconstruction_defect = numerics::operator_norm(&(sum - &id))?;
    let tu_star_defect = numerics::operator_norm(&(t * u.adjoint() - &id))?;
    let scale = numerics::operator_norm(t)?.max(1.0);
    let operators_equal = numerics::operator_norm(&(u - t))? <= tol.identity * scale;
    let isometry_defect = numerics::operator_norm(&(t.adjoint() * t - &id))?;
    let hypotheses_hold = reconstruction_defect <= tol.identity && isometry_defect <= tol.identity;
    Ok(DualOperatorReport {
        period,
        reconstruction_defect,
        tu_star_defect,
        operators_equal,
        hypotheses_hold,
        conclusion_holds: !hypotheses_hold || operators_equal,
    })
}
