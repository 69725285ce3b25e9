//! Brute-force falsifiers for the structural results the fast paths rely on:
//! the worst undesirable input sits on a vertex of `W_c`, the worst direction
//! is `±C`, and reach times are positively homogeneous in `d`.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};
use thiserror::Error;

use crate::ext::ExtReal;
use crate::model::{ActuatorSplit, Direction};
use crate::reach::{
    malfunction_time_for_w, malfunctioning_reach_time, nominal_reach_time_k, time_ratio, ReachError,
};
use crate::resilience::{quantitative_resilience, ResilienceError};

/// Largest grid evaluated by [`grid_worst_w`].
pub const MAX_GRID_POINTS: usize = 1_000_000;
/// Relative violations below this are LP round-off and reported as 0.
pub const CLAMP_TOL: f64 = 1e-10;

#[derive(Debug, Error, PartialEq)]
pub enum OracleError {
    #[error("grid of {points} points exceeds the cap of {MAX_GRID_POINTS}")]
    GridTooLarge { points: f64 },
    #[error("need at least 2 points per axis")]
    GridTooCoarse,
    #[error("direction scan needs a resilient single-column loss")]
    NotResilient,
    #[error("direction must be nonzero")]
    ZeroDirection,
    #[error("scales must be positive and finite")]
    BadScale,
    #[error(transparent)]
    Reach(#[from] ReachError),
    #[error(transparent)]
    Resilience(#[from] ResilienceError),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanReport {
    pub kind: &'static str,
    pub evaluations: usize,
    pub worst_value: ExtReal,
    pub worst_argument: Vec<f64>,
    pub theory_value: ExtReal,
    /// `max(0, worst − theory)/theory`, clamped to 0 below [`CLAMP_TOL`].
    pub max_violation: f64,
}

impl ScanReport {
    /// Replaces the theoretical value by `scale` times itself and recomputes the violation.
    pub fn scale_theory(mut self, scale: f64) -> Self {
        self.theory_value = match self.theory_value {
            ExtReal::Finite(t) => ExtReal::Finite(t * scale),
            other => other,
        };
        self.max_violation = relative_violation(self.worst_value, self.theory_value);
        self
    }
}

pub fn relative_violation(observed: ExtReal, theory: ExtReal) -> f64 {
    match (observed, theory) {
        (_, ExtReal::PosInf) => 0.0,
        (ExtReal::PosInf, _) => f64::INFINITY,
        (ExtReal::Finite(o), ExtReal::Finite(t)) => {
            let v = (o - t).max(0.0) / t.abs().max(f64::MIN_POSITIVE);
            if v < CLAMP_TOL {
                0.0
            } else {
                v
            }
        }
        _ => 0.0,
    }
}

/// Index of the first maximum.
fn argmax(values: &[ExtReal]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate().skip(1) {
        if v.total_cmp(&values[best]).is_gt() {
            best = i;
        }
    }
    best
}

/// Evaluates `T_M(w, d)` on a uniform grid over `W_c` (vertices included)
/// and compares the maximum with the vertex-enumeration value.
pub fn grid_worst_w(split: &ActuatorSplit, d: &Direction, points_per_axis: usize) -> Result<ScanReport, OracleError> {
    if points_per_axis < 2 {
        return Err(OracleError::GridTooCoarse);
    }
    if d.is_zero() {
        return Err(OracleError::ZeroDirection);
    }
    let p = split.lost();
    let total = (points_per_axis as f64).powi(p as i32);
    if total > MAX_GRID_POINTS as f64 {
        return Err(OracleError::GridTooLarge { points: total });
    }
    let total = total as usize;
    let (lo, hi) = (split.w_min(), split.w_max());
    let point = |mut idx: usize| -> DVector<f64> {
        let mut w = DVector::zeros(p);
        for j in (0..p).rev() {
            let t = (idx % points_per_axis) as f64 / (points_per_axis - 1) as f64;
            idx /= points_per_axis;
            w[j] = if t == 1.0 { hi[j] } else { lo[j] + (hi[j] - lo[j]) * t };
        }
        w
    };
    let values: Vec<ExtReal> = (0..total)
        .into_par_iter()
        .map(|i| malfunction_time_for_w(split, &point(i), d))
        .collect::<Result<_, _>>()?;
    let best = argmax(&values);
    let theory = malfunctioning_reach_time(split, d, 1)?.time;
    Ok(ScanReport {
        kind: "grid_worst_w",
        evaluations: total,
        worst_value: values[best],
        worst_argument: point(best).iter().copied().collect(),
        theory_value: theory,
        max_violation: relative_violation(values[best], theory),
    })
}

/// `samples` quasi-random unit vectors in `ℝⁿ`, reproducible from `seed`.
///
/// A Halton sequence shifted by a seeded random offset (mod 1) is mapped
/// through the inverse normal CDF and normalized, which spreads the points
/// evenly over the sphere.
pub fn sphere_directions(n: usize, samples: usize, seed: u64) -> Vec<DVector<f64>> {
    let primes = first_primes(n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shift: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
    let normal = Normal::standard();
    let mut out = Vec::with_capacity(samples);
    let mut i = 1u64;
    while out.len() < samples {
        let z = DVector::from_fn(n, |j, _| {
            let mut u = (radical_inverse(i, primes[j]) + shift[j]).fract();
            u = u.clamp(1e-12, 1.0 - 1e-12);
            normal.inverse_cdf(u)
        });
        i += 1;
        let norm = z.norm();
        if norm > 1e-12 {
            out.push(z / norm);
        }
    }
    out
}

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let (mut f, mut r) = (inv, 0.0);
    while i > 0 {
        r += f * (i % base) as f64;
        i /= base;
        f *= inv;
    }
    r
}

fn first_primes(n: usize) -> Vec<u64> {
    let mut primes = Vec::with_capacity(n);
    let mut c = 2u64;
    while primes.len() < n {
        if primes.iter().all(|p| !c.is_multiple_of(*p)) {
            primes.push(c);
        }
        c += 1;
    }
    primes
}

/// Evaluates `t(d)` at `samples` directions plus `±C` and compares the
/// maximum with `max(t(C), t(−C))`.
pub fn direction_scan(split: &ActuatorSplit, samples: usize, seed: u64) -> Result<ScanReport, OracleError> {
    let report = quantitative_resilience(split, 1)?;
    let c = split.single_column().ok_or(OracleError::NotResilient)?;
    if !report.resilient || c.iter().all(|&v| v == 0.0) {
        return Err(OracleError::NotResilient);
    }
    let c = c.normalize();
    let mut dirs = vec![c.clone(), -c];
    dirs.extend(sphere_directions(split.base().states(), samples, seed));

    let ratios: Vec<ExtReal> = dirs
        .par_iter()
        .map(|d| time_ratio(split, &Direction::new(d.clone()).expect("unit vector"), 1))
        .collect::<Result<_, _>>()?;
    let theory = ratios[0].max(ratios[1]);
    let best = argmax(&ratios);
    Ok(ScanReport {
        kind: "direction_scan",
        evaluations: dirs.len(),
        worst_value: ratios[best],
        worst_argument: dirs[best].iter().copied().collect(),
        theory_value: theory,
        max_violation: relative_violation(ratios[best], theory),
    })
}

/// `max |T(αd) − αT(d)| / (αT(d))` over `scales`, for `T_N*` and `T_M*` (finite cases only).
pub fn homogeneity_probe(split: &ActuatorSplit, d: &Direction, scales: &[f64]) -> Result<f64, OracleError> {
    if d.is_zero() {
        return Err(OracleError::ZeroDirection);
    }
    if scales.iter().any(|&a| !(a.is_finite() && a > 0.0)) {
        return Err(OracleError::BadScale);
    }
    let times = |d: &Direction| -> Result<[ExtReal; 2], OracleError> {
        Ok([
            nominal_reach_time_k(split.base(), d, 1)?.time,
            malfunctioning_reach_time(split, d, 1)?.time,
        ])
    };
    let base = times(d)?;
    let mut worst: f64 = 0.0;
    for &alpha in scales {
        let scaled = times(&d.scaled(alpha))?;
        for (b, s) in base.iter().zip(scaled) {
            if let (ExtReal::Finite(b), ExtReal::Finite(s)) = (*b, s) {
                if b > 0.0 {
                    worst = worst.max((s - alpha * b).abs() / (alpha * b));
                }
            }
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{toy1, toy2, toy3};
    use crate::model::split;

    fn dir(v: &[f64]) -> Direction {
        Direction::from_slice(v).unwrap()
    }

    #[test]
    fn toy2_grid() {
        let s = split(&toy2(), &[1]).unwrap();
        let r = grid_worst_w(&s, &dir(&[-1.0]), 101).unwrap();
        assert!((r.worst_value.to_f64() - 1.0).abs() < 1e-12);
        assert_eq!(r.worst_argument, vec![0.0]);
        assert_eq!(r.max_violation, 0.0);
        assert_eq!(r.evaluations, 101);
    }

    #[test]
    fn toy3_grid() {
        let s = split(&toy3(), &[2, 3]).unwrap();
        let r = grid_worst_w(&s, &dir(&[1.0, 0.0]), 21).unwrap();
        assert!((r.worst_value.to_f64() - 2.0).abs() < 1e-12);
        assert_eq!(r.worst_argument[0], -1.0);
        assert_eq!(r.max_violation, 0.0);
    }

    #[test]
    fn vertex_only_grid_has_no_violation() {
        let s = split(&toy3(), &[2, 3]).unwrap();
        let r = grid_worst_w(&s, &dir(&[0.3, -0.8]), 2).unwrap();
        assert_eq!(r.max_violation, 0.0);
        assert_eq!(r.worst_value, r.theory_value);
    }

    #[test]
    fn grid_limits() {
        let s = split(&toy3(), &[2, 3]).unwrap();
        assert_eq!(grid_worst_w(&s, &dir(&[1.0, 0.0]), 1), Err(OracleError::GridTooCoarse));
        assert!(matches!(
            grid_worst_w(&s, &dir(&[1.0, 0.0]), 1001),
            Err(OracleError::GridTooLarge { .. })
        ));
    }

    #[test]
    fn toy2_direction_scan() {
        let s = split(&toy2(), &[1]).unwrap();
        let r = direction_scan(&s, 1000, 1).unwrap();
        assert!((r.worst_value.to_f64() - 2.0).abs() < 1e-12);
        assert_eq!(r.max_violation, 0.0);
        let r0 = direction_scan(&s, 0, 1).unwrap();
        assert_eq!(r0.evaluations, 2);
        assert_eq!(r0.max_violation, 0.0);
    }

    #[test]
    fn toy1_direction_scan() {
        let s = split(&toy1(), &[2]).unwrap();
        let r = direction_scan(&s, 2000, 7).unwrap();
        assert!(r.max_violation <= 1e-9);
        assert!((r.theory_value.to_f64() - 3.0).abs() < 1e-9);
    }

    #[test]
    fn non_resilient_scan_refused() {
        let sys = crate::model::IntegratorSystem::new(
            "edge",
            1,
            nalgebra::dmatrix![1.0, 1.0],
            nalgebra::dvector![-1.0, -1.0],
            nalgebra::dvector![1.0, 1.0],
        )
        .unwrap();
        let s = split(&sys, &[1]).unwrap();
        assert_eq!(direction_scan(&s, 10, 0), Err(OracleError::NotResilient));
    }

    #[test]
    fn directions_are_unit_and_reproducible() {
        let a = sphere_directions(3, 50, 42);
        let b = sphere_directions(3, 50, 42);
        assert_eq!(a, b);
        assert!(a.iter().all(|d| (d.norm() - 1.0).abs() < 1e-12));
        assert_ne!(a, sphere_directions(3, 50, 43));
    }

    #[test]
    fn homogeneity_on_toy2() {
        let s = split(&toy2(), &[1]).unwrap();
        assert!(homogeneity_probe(&s, &dir(&[-1.0]), &[0.5, 2.0, 10.0]).unwrap() <= 1e-10);
        assert_eq!(homogeneity_probe(&s, &dir(&[-1.0]), &[1.0]).unwrap(), 0.0);
    }

    #[test]
    fn corrupted_theory_is_flagged() {
        let s = split(&toy2(), &[1]).unwrap();
        let r = grid_worst_w(&s, &dir(&[-1.0]), 11).unwrap().scale_theory(0.5);
        assert!((r.max_violation - 1.0).abs() < 1e-12);
    }
}
