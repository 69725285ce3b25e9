//! Controllability, the λ± programs, `r(±C)` and the quantitative resilience
//! of single-column losses.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use thiserror::Error;

use crate::ext::ExtReal;
use crate::lp::{max_scaled_direction, DirectionalLambda, LpError, LpOutcome, LpProblem};
use crate::model::{ActuatorSplit, Direction, IntegratorSystem};
use crate::reach::{box_vertex, malfunctioning_reach_time, nominal_reach_time_k, ReachError, DEFAULT_MAX_LOST};

/// Relative singular-value cutoff for the rank test.
pub const RANK_TOL: f64 = 1e-10;
/// `r` counts as positive only above this value, and as at most 1 up to it.
pub const R_TOL: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum ResilienceError {
    #[error("closed-form resilience needs exactly one lost column, got {0}")]
    UnsupportedLoss(usize),
    #[error("lost column is identically zero")]
    ZeroColumn,
    #[error(transparent)]
    Reach(#[from] ReachError),
    #[error(transparent)]
    Lp(#[from] LpError),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Controllability {
    pub rank: usize,
    pub states: usize,
    /// `0` lies in the interior of `{B̄ū : ū ∈ Ū}`.
    pub zero_in_interior: bool,
}

impl Controllability {
    pub fn controllable(&self) -> bool {
        self.rank == self.states && self.zero_in_interior
    }
}

pub fn numerical_rank(m: &DMatrix<f64>) -> usize {
    if m.is_empty() {
        return 0;
    }
    let sv = m.clone().svd(false, false).singular_values;
    let smax = sv.max();
    if smax == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > RANK_TOL * smax).count()
}

pub fn controllability(sys: &IntegratorSystem) -> Controllability {
    let n = sys.states();
    let rank = numerical_rank(sys.b_bar());
    let zero_in_interior = rank == n
        && (0..n).all(|j| {
            [1.0, -1.0].iter().all(|&s| {
                let mut e = DVector::zeros(n);
                e[j] = s;
                match max_scaled_direction(sys.b_bar(), sys.u_min(), sys.u_max(), &e) {
                    Ok(DirectionalLambda::Finite { lambda, .. }) => lambda > 0.0,
                    Ok(DirectionalLambda::Unbounded) => true,
                    _ => false,
                }
            })
        });
    Controllability {
        rank,
        states: n,
        zero_in_interior,
    }
}

/// Full row rank and `0` interior to the image of the input box.
pub fn check_controllability(sys: &IntegratorSystem) -> bool {
    controllability(sys).controllable()
}

fn single_nonzero_column(split: &ActuatorSplit) -> Result<DVector<f64>, ResilienceError> {
    let c = split
        .single_column()
        .ok_or(ResilienceError::UnsupportedLoss(split.lost()))?;
    if c.iter().all(|&v| v == 0.0) {
        return Err(ResilienceError::ZeroColumn);
    }
    Ok(c)
}

fn lambda_along(split: &ActuatorSplit, d: &DVector<f64>) -> Result<ExtReal, ResilienceError> {
    Ok(match max_scaled_direction(split.b(), split.u_min(), split.u_max(), d)? {
        DirectionalLambda::Finite { lambda, .. } => ExtReal::Finite(lambda),
        DirectionalLambda::Unbounded => ExtReal::PosInf,
        DirectionalLambda::NegativeCertificate => ExtReal::NegInf,
    })
}

/// `(λ⁺, λ⁻)`: the largest `λ ≥ 0` with `Bυ = ±λC`, `υ ∈ U_c`.
/// An empty feasible set gives `−∞`.
pub fn lambda_pair(split: &ActuatorSplit) -> Result<(ExtReal, ExtReal), ResilienceError> {
    let c = single_nonzero_column(split)?;
    Ok((lambda_along(split, &c)?, lambda_along(split, &(-&c))?))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RPair {
    pub lambda_plus: ExtReal,
    pub lambda_minus: ExtReal,
    pub r_plus: f64,
    pub r_minus: f64,
    pub diagnostics: Vec<String>,
}

impl RPair {
    pub fn min(&self) -> f64 {
        self.r_plus.min(self.r_minus)
    }
}

fn ratio_or_zero(num: f64, den: f64, what: &str, diagnostics: &mut Vec<String>) -> f64 {
    if den.abs() <= 1e-12 * num.abs().max(1.0) {
        diagnostics.push(format!("{what}: degenerate denominator {den:e}"));
        0.0
    } else {
        num / den
    }
}

/// `r(C) = (w_min + λ⁺)/(w_max + λ⁺)` and `r(−C) = (w_max − λ⁻)/(w_min − λ⁻)`.
pub fn r_pair(split: &ActuatorSplit) -> Result<RPair, ResilienceError> {
    let (lp, lm) = lambda_pair(split)?;
    let (wmin, wmax) = (split.w_min()[0], split.w_max()[0]);
    let mut diagnostics = Vec::new();
    let r_plus = match lp {
        ExtReal::Finite(l) => ratio_or_zero(wmin + l, wmax + l, "r(C)", &mut diagnostics),
        ExtReal::PosInf => {
            diagnostics.push("λ⁺ unbounded; r(C) taken as its limit 1".into());
            1.0
        }
        ExtReal::NegInf => {
            diagnostics.push("λ⁺ program infeasible; r(C) = 0".into());
            0.0
        }
    };
    let r_minus = match lm {
        ExtReal::Finite(l) => ratio_or_zero(wmax - l, wmin - l, "r(−C)", &mut diagnostics),
        ExtReal::PosInf => {
            diagnostics.push("λ⁻ unbounded; r(−C) taken as its limit 1".into());
            1.0
        }
        ExtReal::NegInf => {
            diagnostics.push("λ⁻ program infeasible; r(−C) = 0".into());
            0.0
        }
    };
    Ok(RPair {
        lambda_plus: lp,
        lambda_minus: lm,
        r_plus,
        r_minus,
        diagnostics,
    })
}

pub fn in_unit_interval(r: f64) -> bool {
    r > R_TOL && r <= 1.0 + R_TOL
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResilienceReport {
    /// One-based column number in `B̄`.
    pub column: usize,
    pub label: String,
    pub order: u32,
    pub controllable: bool,
    pub resilient: bool,
    /// `None` when the lost column is zero.
    pub lambda_plus: Option<ExtReal>,
    pub lambda_minus: Option<ExtReal>,
    pub r_plus: Option<f64>,
    pub r_minus: Option<f64>,
    pub r_min: Option<f64>,
    pub r_q: f64,
    pub r_kq: f64,
    pub containment: Option<bool>,
    pub diagnostics: Vec<String>,
}

/// `r_q` and `r_{k,q} = r_q^(1/k)` for a single lost column.
pub fn quantitative_resilience(split: &ActuatorSplit, k: u32) -> Result<ResilienceReport, ResilienceError> {
    if split.lost() != 1 {
        return Err(ResilienceError::UnsupportedLoss(split.lost()));
    }
    if k == 0 {
        return Err(ReachError::ZeroOrder.into());
    }
    let col = split.lost_columns()[0];
    let ctrl = controllability(split.base());
    let controllable = ctrl.controllable();
    let mut diagnostics = Vec::new();
    if !controllable {
        diagnostics.push(format!(
            "not controllable (rank {} of {}, zero interior: {})",
            ctrl.rank, ctrl.states, ctrl.zero_in_interior
        ));
    }

    let mut report = ResilienceReport {
        column: col + 1,
        label: split.base().column_label(col),
        order: k,
        controllable,
        resilient: false,
        lambda_plus: None,
        lambda_minus: None,
        r_plus: None,
        r_minus: None,
        r_min: None,
        r_q: 0.0,
        r_kq: 0.0,
        containment: None,
        diagnostics: Vec::new(),
    };

    match r_pair(split) {
        Err(ResilienceError::ZeroColumn) => {
            diagnostics.push("lost column is zero".into());
            report.resilient = controllable;
            report.r_q = if controllable { 1.0 } else { 0.0 };
        }
        Err(e) => return Err(e),
        Ok(pair) => {
            diagnostics.extend(pair.diagnostics.iter().cloned());
            let both = in_unit_interval(pair.r_plus) && in_unit_interval(pair.r_minus);
            for (name, r) in [("r(C)", pair.r_plus), ("r(−C)", pair.r_minus)] {
                if r.abs() <= R_TOL {
                    diagnostics.push(format!("{name} on the resilience boundary"));
                }
            }
            report.resilient = controllable && both;
            report.r_q = if report.resilient { pair.min().min(1.0) } else { 0.0 };
            report.lambda_plus = Some(pair.lambda_plus);
            report.lambda_minus = Some(pair.lambda_minus);
            report.r_plus = Some(pair.r_plus);
            report.r_minus = Some(pair.r_minus);
            report.r_min = Some(pair.min());
        }
    }
    report.r_kq = kth_root(report.r_q, k);
    report.containment = Some(polytope_containment_check(split)?);
    if report.resilient && report.containment == Some(false) {
        diagnostics.push("resilient but containment check failed".into());
    }
    report.diagnostics = diagnostics;
    Ok(report)
}

fn kth_root(x: f64, k: u32) -> f64 {
    match k {
        1 => x,
        2 => x.sqrt(),
        _ => x.powf(1.0 / f64::from(k)),
    }
}

/// Reach times along `±C` and the verdict they imply.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReachVerdict {
    pub nominal_plus: ExtReal,
    pub malfunctioning_plus: ExtReal,
    pub nominal_minus: ExtReal,
    pub malfunctioning_minus: ExtReal,
    /// `t(C)` and `t(−C)`.
    pub ratio_plus: ExtReal,
    pub ratio_minus: ExtReal,
    pub resilient: bool,
}

/// Resilient iff controllable and `T_M*(±C)` are both finite.
pub fn resilience_via_reach_times(split: &ActuatorSplit) -> Result<ReachVerdict, ResilienceError> {
    let c = single_nonzero_column(split)?;
    let plus = Direction::new(c.clone()).map_err(|_| ResilienceError::ZeroColumn)?;
    let minus = plus.negated();
    let times = |d: &Direction| -> Result<(ExtReal, ExtReal), ResilienceError> {
        let n = nominal_reach_time_k(split.base(), d, 1)?.time;
        let m = malfunctioning_reach_time(split, d, 1)?.time;
        Ok((n, m))
    };
    let (np, mp) = times(&plus)?;
    let (nm, mm) = times(&minus)?;
    let ratio = |n: ExtReal, m: ExtReal| match (m, n) {
        (ExtReal::Finite(m), ExtReal::Finite(n)) if n > 0.0 => ExtReal::Finite((m / n).max(1.0)),
        _ => ExtReal::PosInf,
    };
    let resilient = check_controllability(split.base()) && mp.is_finite() && mm.is_finite();
    Ok(ReachVerdict {
        nominal_plus: np,
        malfunctioning_plus: mp,
        nominal_minus: nm,
        malfunctioning_minus: mm,
        ratio_plus: ratio(np, mp),
        ratio_minus: ratio(nm, mm),
        resilient,
    })
}

/// Whether `−C·W_c` lies in the interior of `B·U_c`.
///
/// Each vertex `x` of `C·W_c` is tested by checking that the `2n` points
/// `−x ± ε_j e_j` belong to `B·U_c`, with `ε_j` a fixed fraction of the
/// half-width of `B·U_c` along axis `j`.
pub fn polytope_containment_check(split: &ActuatorSplit) -> Result<bool, ResilienceError> {
    let p = split.lost();
    if p > DEFAULT_MAX_LOST {
        return Err(ReachError::Capacity {
            lost: p,
            cap: DEFAULT_MAX_LOST,
        }
        .into());
    }
    let b = split.b();
    let n = b.nrows();
    let m = b.ncols();
    if m == 0 {
        return Ok(false);
    }
    let half: Vec<f64> = (0..n)
        .map(|i| {
            (0..m)
                .map(|j| b[(i, j)].abs() * (split.u_max()[j] - split.u_min()[j]) / 2.0)
                .sum()
        })
        .collect();
    if half.contains(&0.0) {
        return Ok(false);
    }
    let member = |y: &DVector<f64>| -> Result<bool, LpError> {
        let prob = LpProblem::new(
            DVector::zeros(m),
            b.clone(),
            y.clone(),
            split.u_min().clone(),
            split.u_max().clone(),
        )?;
        Ok(matches!(prob.solve(), LpOutcome::Optimal { .. }))
    };
    for v in 0..1usize << p {
        let w = box_vertex(split.w_min(), split.w_max(), v);
        let target = -(split.c() * &w);
        for j in 0..n {
            for s in [1.0, -1.0] {
                let mut y = target.clone();
                y[j] += s * 1e-7 * half[j];
                if !member(&y)? {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::split;
    use nalgebra::{dmatrix, dvector};

    fn toy2_with(u_hi: f64) -> ActuatorSplit {
        let sys = IntegratorSystem::new(
            "toy2",
            1,
            dmatrix![1.0, -1.0],
            dvector![-1.0, 0.0],
            dvector![u_hi, 1.0],
        )
        .unwrap();
        split(&sys, &[1]).unwrap()
    }

    fn toy1() -> ActuatorSplit {
        let sys = IntegratorSystem::new(
            "toy1",
            1,
            dmatrix![1.0, 0.0, 1.0; 0.0, 1.0, 0.0],
            dvector![-2.0, -2.0, -1.0],
            dvector![2.0, 2.0, 1.0],
        )
        .unwrap();
        split(&sys, &[2]).unwrap()
    }

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    #[test]
    fn controllability_examples() {
        let flat = IntegratorSystem::new("flat", 1, dmatrix![1.0, 0.0; 0.0, 0.0], dvector![-1.0, -1.0], dvector![1.0, 1.0])
            .unwrap();
        assert!(!check_controllability(&flat));
        let pm = IntegratorSystem::new("pm", 1, dmatrix![1.0, -1.0], dvector![0.0, 0.0], dvector![1.0, 1.0]).unwrap();
        assert!(check_controllability(&pm));
        let one_sided = IntegratorSystem::new("os", 1, dmatrix![1.0, 1.0], dvector![0.0, 0.0], dvector![1.0, 1.0]).unwrap();
        assert!(!check_controllability(&one_sided));
        assert_eq!(controllability(&one_sided).rank, 1);
    }

    #[test]
    fn lambda_pairs() {
        let (p, m) = lambda_pair(&toy2_with(3.0)).unwrap();
        assert!(close(p.to_f64(), 1.0) && close(m.to_f64(), 3.0));
        let (p, m) = lambda_pair(&toy1()).unwrap();
        assert!(close(p.to_f64(), 2.0) && close(m.to_f64(), 2.0));
    }

    #[test]
    fn r_pairs() {
        let r = r_pair(&toy2_with(3.0)).unwrap();
        assert!(close(r.r_plus, 0.5) && close(r.r_minus, 2.0 / 3.0));
        let r = r_pair(&toy1()).unwrap();
        assert!(close(r.r_plus, 1.0 / 3.0) && close(r.r_minus, 1.0 / 3.0));
    }

    #[test]
    fn toy2_quantitative() {
        let rep = quantitative_resilience(&toy2_with(3.0), 1).unwrap();
        assert!(rep.resilient && rep.controllable);
        assert!(close(rep.r_q, 0.5));
        let rep2 = quantitative_resilience(&toy2_with(3.0), 2).unwrap();
        assert!(close(rep2.r_kq, 0.5f64.sqrt()));
        assert_eq!(rep2.containment, Some(true));
    }

    #[test]
    fn boundary_case_is_not_resilient() {
        // λ⁺ = 1 and w_min = −1 put r(C) exactly on 0.
        let sys = IntegratorSystem::new("edge", 1, dmatrix![1.0, 1.0], dvector![-1.0, -1.0], dvector![1.0, 1.0]).unwrap();
        let rep = quantitative_resilience(&split(&sys, &[1]).unwrap(), 1).unwrap();
        assert!(!rep.resilient);
        assert_eq!(rep.r_q, 0.0);
        assert!(rep.diagnostics.iter().any(|d| d.contains("boundary")));
    }

    #[test]
    fn zero_column_costs_nothing() {
        let sys = IntegratorSystem::new("z", 1, dmatrix![1.0, 0.0], dvector![-1.0, -1.0], dvector![1.0, 1.0]).unwrap();
        let s = split(&sys, &[1]).unwrap();
        let rep = quantitative_resilience(&s, 3).unwrap();
        assert!(rep.resilient);
        assert_eq!((rep.r_q, rep.r_kq), (1.0, 1.0));
        assert_eq!(rep.r_plus, None);
        assert_eq!(lambda_pair(&s), Err(ResilienceError::ZeroColumn));
        assert_eq!(polytope_containment_check(&s), Ok(true));
    }

    #[test]
    fn multi_column_loss_refused() {
        let sys = IntegratorSystem::new(
            "toy3",
            1,
            dmatrix![1.0, 0.0, 0.5, 0.0; 0.0, 1.0, 0.0, 0.5],
            DVector::from_element(4, -1.0),
            DVector::from_element(4, 1.0),
        )
        .unwrap();
        let s = split(&sys, &[2, 3]).unwrap();
        assert_eq!(quantitative_resilience(&s, 1), Err(ResilienceError::UnsupportedLoss(2)));
        assert_eq!(polytope_containment_check(&s), Ok(true));
    }

    #[test]
    fn toy2_reach_verdict() {
        let v = resilience_via_reach_times(&toy2_with(3.0)).unwrap();
        assert!(close(v.nominal_plus.to_f64(), 0.5));
        assert!(close(v.malfunctioning_plus.to_f64(), 1.0));
        assert!(close(v.nominal_minus.to_f64(), 1.0 / 3.0));
        assert!(close(v.malfunctioning_minus.to_f64(), 0.5));
        assert!(v.resilient);
    }

    #[test]
    fn containment_examples() {
        assert_eq!(polytope_containment_check(&toy2_with(3.0)), Ok(true));
        assert_eq!(polytope_containment_check(&toy2_with(0.5)), Ok(false));
    }

    #[test]
    fn symmetric_boxes_give_equal_pair() {
        let sys = IntegratorSystem::new(
            "sym",
            1,
            dmatrix![1.0, 0.3, -0.4; 0.2, -1.0, 0.7],
            dvector![-1.0, -2.0, -0.5],
            dvector![1.0, 2.0, 0.5],
        )
        .unwrap();
        let r = r_pair(&split(&sys, &[2]).unwrap()).unwrap();
        assert!((r.r_plus - r.r_minus).abs() < 1e-10);
    }
}
