//! Nominal and malfunctioning minimal reach times.
//!
//! Both optima are attained with constant inputs, so each reduces to
//! directional LPs: one for the nominal system, and one per vertex of the
//! lost-input box for the malfunctioning system.

use nalgebra::DVector;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::ext::ExtReal;
use crate::lp::{max_scaled_direction, max_scaled_direction_offset, DirectionalLambda, LpError};
use crate::model::{ActuatorSplit, Direction, IntegratorSystem};

/// Largest number of lost columns for which the `2ᵖ` vertices are enumerated.
pub const DEFAULT_MAX_LOST: usize = 20;

const BOX_TOL: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum ReachError {
    #[error("direction has {got} components, system has {expected} states")]
    Dimension { expected: usize, got: usize },
    #[error("{lost} lost columns exceed the enumeration cap of {cap} (2^{lost} vertices)")]
    Capacity { lost: usize, cap: usize },
    #[error("undesirable input lies outside its box")]
    OutsideBox,
    #[error("direction must be nonzero")]
    ZeroDirection,
    #[error("order must be at least 1")]
    ZeroOrder,
    #[error("initial derivative x^({order}) is nonzero; order-{k} reach times assume zero initial derivatives")]
    NonzeroInitialDerivative { order: usize, k: u32 },
    #[error(transparent)]
    Lp(#[from] LpError),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReachResult {
    /// Order-`k` reach time.
    pub time: ExtReal,
    /// The same quantity for the first-order system (`k = 1`).
    pub first_order_time: ExtReal,
    pub order: u32,
    /// Constant controlled input achieving `time` (absent when infinite or `d = 0`).
    pub optimizer_u: Option<Vec<f64>>,
    /// Worst constant undesirable input (malfunctioning times only).
    pub optimizer_w: Option<Vec<f64>>,
    /// Index of `optimizer_w` among the vertices of `W_c`.
    pub worst_vertex: Option<usize>,
}

impl ReachResult {
    fn zero(order: u32) -> Self {
        ReachResult {
            time: ExtReal::ZERO,
            first_order_time: ExtReal::ZERO,
            order,
            optimizer_u: None,
            optimizer_w: None,
            worst_vertex: None,
        }
    }
}

fn check_dim(n: usize, d: &Direction) -> Result<(), ReachError> {
    if d.dim() != n {
        return Err(ReachError::Dimension {
            expected: n,
            got: d.dim(),
        });
    }
    Ok(())
}

/// Order-`k` reach times are only defined from rest: `x⁽ˡ⁾(0) = 0` for `1 ≤ l < k`.
/// `derivatives[l-1]` holds `x⁽ˡ⁾(0)`.
pub fn validate_initial_derivatives(k: u32, derivatives: &[DVector<f64>]) -> Result<(), ReachError> {
    if k == 0 {
        return Err(ReachError::ZeroOrder);
    }
    for (i, x) in derivatives.iter().enumerate() {
        if (i + 1) < k as usize && x.iter().any(|&v| v != 0.0) {
            return Err(ReachError::NonzeroInitialDerivative { order: i + 1, k });
        }
    }
    Ok(())
}

/// `T_N*(d)` for the full system at its own order.
pub fn nominal_reach_time(sys: &IntegratorSystem, d: &Direction) -> Result<ReachResult, ReachError> {
    nominal_reach_time_k(sys, d, sys.order())
}

/// `T_N*(d)` at order `k`.
pub fn nominal_reach_time_k(
    sys: &IntegratorSystem,
    d: &Direction,
    k: u32,
) -> Result<ReachResult, ReachError> {
    if k == 0 {
        return Err(ReachError::ZeroOrder);
    }
    check_dim(sys.states(), d)?;
    if d.is_zero() {
        return Ok(ReachResult::zero(k));
    }
    let r = max_scaled_direction(sys.b_bar(), sys.u_min(), sys.u_max(), d.as_vector())?;
    Ok(from_lambda(r, k, None, None))
}

fn from_lambda(
    r: DirectionalLambda,
    k: u32,
    w: Option<&DVector<f64>>,
    vertex: Option<usize>,
) -> ReachResult {
    match r {
        DirectionalLambda::Finite { lambda, argument } if lambda > 0.0 => {
            let t1 = 1.0 / lambda;
            ReachResult {
                time: ExtReal::Finite(crate::ext::order_k_time(t1, k)),
                first_order_time: ExtReal::Finite(t1),
                order: k,
                optimizer_u: Some(argument.iter().copied().collect()),
                optimizer_w: w.map(|w| w.iter().copied().collect()),
                worst_vertex: vertex,
            }
        }
        // Unbounded speed cannot occur with finite boxes; treat it as instant arrival.
        DirectionalLambda::Unbounded => ReachResult {
            time: ExtReal::ZERO,
            first_order_time: ExtReal::ZERO,
            order: k,
            optimizer_u: None,
            optimizer_w: w.map(|w| w.iter().copied().collect()),
            worst_vertex: vertex,
        },
        _ => ReachResult {
            time: ExtReal::PosInf,
            first_order_time: ExtReal::PosInf,
            order: k,
            optimizer_u: None,
            optimizer_w: w.map(|w| w.iter().copied().collect()),
            worst_vertex: vertex,
        },
    }
}

/// First-order `T_M(w, d)` for a fixed undesirable input `w`.
pub fn malfunction_time_for_w(
    split: &ActuatorSplit,
    w: &DVector<f64>,
    d: &Direction,
) -> Result<ExtReal, ReachError> {
    Ok(malfunction_for_w(split, w, d, 1, None)?.time)
}

fn malfunction_for_w(
    split: &ActuatorSplit,
    w: &DVector<f64>,
    d: &Direction,
    k: u32,
    vertex: Option<usize>,
) -> Result<ReachResult, ReachError> {
    check_dim(split.base().states(), d)?;
    if d.is_zero() {
        return Err(ReachError::ZeroDirection);
    }
    if !split.contains_w(w, BOX_TOL) {
        return Err(ReachError::OutsideBox);
    }
    let offset = split.c() * w;
    let r = max_scaled_direction_offset(split.b(), split.u_min(), split.u_max(), &offset, d.as_vector())?;
    Ok(from_lambda(r, k, Some(w), vertex))
}

/// Vertex `index` of the box `[lo, hi]`: component `j` is `hi[j]` iff bit
/// `p−1−j` of `index` is set, so index 0 is the all-minimum corner and the
/// enumeration order is lexicographic.
pub fn box_vertex(lo: &DVector<f64>, hi: &DVector<f64>, index: usize) -> DVector<f64> {
    let p = lo.len();
    DVector::from_fn(p, |j, _| {
        if (index >> (p - 1 - j)) & 1 == 1 {
            hi[j]
        } else {
            lo[j]
        }
    })
}

/// `T_M*(d)` at order `k`, enumerating every vertex of `W_c`.
pub fn malfunctioning_reach_time(
    split: &ActuatorSplit,
    d: &Direction,
    k: u32,
) -> Result<ReachResult, ReachError> {
    malfunctioning_reach_time_capped(split, d, k, DEFAULT_MAX_LOST)
}

pub fn malfunctioning_reach_time_capped(
    split: &ActuatorSplit,
    d: &Direction,
    k: u32,
    max_lost: usize,
) -> Result<ReachResult, ReachError> {
    if k == 0 {
        return Err(ReachError::ZeroOrder);
    }
    check_dim(split.base().states(), d)?;
    let p = split.lost();
    if p > max_lost || p >= usize::BITS as usize {
        return Err(ReachError::Capacity { lost: p, cap: max_lost });
    }
    if d.is_zero() {
        return Ok(ReachResult::zero(k));
    }
    let per_vertex: Vec<ReachResult> = (0..1usize << p)
        .into_par_iter()
        .map(|i| {
            let w = box_vertex(split.w_min(), split.w_max(), i);
            malfunction_for_w(split, &w, d, k, Some(i))
        })
        .collect::<Result<_, _>>()?;

    // Sequential reduction over vertex index: the first maximum wins.
    let mut best = 0;
    for (i, r) in per_vertex.iter().enumerate().skip(1) {
        if strictly_greater(r.first_order_time, per_vertex[best].first_order_time) {
            best = i;
        }
    }
    Ok(per_vertex.into_iter().nth(best).expect("at least one vertex"))
}

fn strictly_greater(a: ExtReal, b: ExtReal) -> bool {
    match (a, b) {
        (ExtReal::Finite(x), ExtReal::Finite(y)) => x > y + 1e-12 * y.abs().max(1e-300),
        _ => a > b,
    }
}

/// Nominal time, malfunctioning time and their ratio for one direction.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RatioReport {
    pub nominal: ReachResult,
    pub malfunctioning: ReachResult,
    pub ratio: ExtReal,
}

pub fn ratio_report(split: &ActuatorSplit, d: &Direction, k: u32) -> Result<RatioReport, ReachError> {
    let nominal = nominal_reach_time_k(split.base(), d, k)?;
    let malfunctioning = malfunctioning_reach_time(split, d, k)?;
    let ratio = if d.is_zero() {
        ExtReal::ONE
    } else {
        match (malfunctioning.time, nominal.time) {
            (ExtReal::PosInf, _) => ExtReal::PosInf,
            (ExtReal::Finite(tm), ExtReal::Finite(tn)) if tn > 0.0 => {
                let r = tm / tn;
                // T_N ≤ T_M; ratios a hair below 1 are LP round-off.
                ExtReal::Finite(if r < 1.0 && r > 1.0 - 1e-9 { 1.0 } else { r })
            }
            (ExtReal::Finite(_), ExtReal::Finite(_)) => ExtReal::ONE,
            _ => ExtReal::PosInf,
        }
    };
    Ok(RatioReport {
        nominal,
        malfunctioning,
        ratio,
    })
}

/// `t_k(d) = T_{k,M}*(d) / T_{k,N}*(d)`.
pub fn time_ratio(split: &ActuatorSplit, d: &Direction, k: u32) -> Result<ExtReal, ReachError> {
    Ok(ratio_report(split, d, k)?.ratio)
}
