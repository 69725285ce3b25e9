//! Exact trajectories of `x⁽ᵏ⁾ = B̄ū` under constant inputs and under
//! first-order input lag `u̇ = (uᶜ − u)/τ` with piecewise-constant commands.
//!
//! Between sample points the forcing is `a_c + (a₀ − a_c)e^{−s/τ}`, whose
//! repeated integrals have closed forms, so every step is exact up to
//! floating-point rounding.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use nalgebra::DVector;
use serde::Serialize;
use thiserror::Error;

use crate::catalog::{octocopter_translational, CatalogError, OctocopterParams};
use crate::ext::{factorial, ExtReal};
use crate::model::{split, Direction, IntegratorSystem};
use crate::reach::{malfunctioning_reach_time, nominal_reach_time_k, ReachError};

const BOX_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("input {which} lies outside the input box")]
    OutsideBox { which: String },
    #[error("time step {dt} must be positive and at most τ/10 = {max}")]
    BadStep { dt: f64, max: f64 },
    #[error("no component {component} of derivative {derivative} in a system with {states} states and order {order}")]
    BadComponent {
        derivative: usize,
        component: usize,
        states: usize,
        order: u32,
    },
    #[error("horizon must be positive and finite")]
    BadHorizon,
    #[error("time constant must be positive")]
    BadTau,
    #[error("command schedule must start at t = 0 with increasing times")]
    BadSchedule,
    #[error("input has {got} entries, system has {expected} inputs")]
    Dimension { expected: usize, got: usize },
    #[error("target {target} not reached within horizon {horizon} s")]
    NotReached { target: f64, horizon: f64 },
    #[error("direction must be (0, 0, ±1)")]
    UnsupportedDirection,
    #[error("target must be positive")]
    BadTarget,
    #[error("the {0} reach time is infinite")]
    Unreachable(&'static str),
    #[error(transparent)]
    Reach(#[from] ReachError),
    #[error(transparent)]
    Catalog(#[from] CatalogError),
    #[error("cannot write {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Sampled trajectory. `states[s]` stacks `x, ẋ, …, x⁽ᵏ⁻¹⁾` (length `n·k`).
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub n: usize,
    pub k: u32,
    pub times: Vec<f64>,
    pub states: Vec<DVector<f64>>,
    pub inputs: Vec<DVector<f64>>,
}

impl Trajectory {
    /// `x⁽ˡ⁾_i` at every sample.
    pub fn component(&self, derivative: usize, i: usize) -> Vec<f64> {
        self.states.iter().map(|s| s[derivative * self.n + i]).collect()
    }

    pub fn final_state(&self) -> &DVector<f64> {
        self.states.last().expect("nonempty trajectory")
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("t");
        for l in 0..self.k as usize {
            for i in 1..=self.n {
                if l == 0 {
                    let _ = write!(out, ",x{i}");
                } else {
                    let _ = write!(out, ",x{i}_d{l}");
                }
            }
        }
        let m = self.inputs.first().map_or(0, |u| u.len());
        for j in 1..=m {
            let _ = write!(out, ",u{j}");
        }
        out.push('\n');
        for ((t, x), u) in self.times.iter().zip(&self.states).zip(&self.inputs) {
            let _ = write!(out, "{t}");
            for v in x.iter().chain(u.iter()) {
                let _ = write!(out, ",{v}");
            }
            out.push('\n');
        }
        out
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<(), SimError> {
        let path = path.as_ref();
        fs::write(path, self.to_csv()).map_err(|source| SimError::Io {
            path: path.display().to_string(),
            source,
        })
    }
}

/// Input vector relaxing towards its command with time constant `tau`.
#[derive(Clone, Debug, PartialEq)]
pub struct LagInputState {
    pub current: DVector<f64>,
    pub tau: f64,
}

impl LagInputState {
    pub fn new(current: DVector<f64>, tau: f64) -> Result<Self, SimError> {
        if !(tau.is_finite() && tau > 0.0) {
            return Err(SimError::BadTau);
        }
        Ok(LagInputState { current, tau })
    }

    /// Input after holding `command` for `h` seconds.
    pub fn at(&self, command: &DVector<f64>, h: f64) -> DVector<f64> {
        command + (&self.current - command) * (-h / self.tau).exp()
    }
}

/// `∫₀ʰ (h−s)^{j−1}/(j−1)! · e^{−s/τ} ds`.
pub fn exp_integral(j: usize, h: f64, tau: f64) -> f64 {
    let z = h / tau;
    if z < 1.0 {
        // h^j Σ_m (−z)^m / (m+j)!
        let mut term = 1.0 / factorial(j as u32);
        let mut sum = term;
        for m in 1..60 {
            term *= -z / (m + j) as f64;
            sum += term;
            if term.abs() < 1e-18 * sum.abs() {
                break;
            }
        }
        h.powi(j as i32) * sum
    } else {
        let mut poly = 0.0;
        let mut t = 1.0;
        for i in 0..j {
            if i > 0 {
                t *= -z / i as f64;
            }
            poly += t;
        }
        (-tau).powi(j as i32) * ((-z).exp() - poly)
    }
}

/// State of the integrator chain: `d[l] = x⁽ˡ⁾`.
#[derive(Clone, Debug)]
struct Chain {
    d: Vec<DVector<f64>>,
}

impl Chain {
    fn stacked(&self) -> DVector<f64> {
        let n = self.d[0].len();
        DVector::from_iterator(n * self.d.len(), self.d.iter().flat_map(|v| v.iter().copied()))
    }

    /// Advances by `h` under forcing `a_c + (a0 − a_c)e^{−s/τ}` (`tau = None`: constant `a_c`).
    fn advance(&self, a_c: &DVector<f64>, a0: &DVector<f64>, tau: Option<f64>, h: f64) -> Chain {
        let k = self.d.len();
        let mut out = Vec::with_capacity(k);
        for l in 0..k {
            let mut v = DVector::zeros(a_c.len());
            for i in l..k {
                v += &self.d[i] * (h.powi((i - l) as i32) / factorial((i - l) as u32));
            }
            let j = k - l;
            v += a_c * (h.powi(j as i32) / factorial(j as u32));
            if let Some(tau) = tau {
                v += (a0 - a_c) * exp_integral(j, h, tau);
            }
            out.push(v);
        }
        Chain { d: out }
    }

    /// Component `c` of `x⁽ˡ⁾` after [`Chain::advance`], without building the whole state.
    fn component_after(&self, l: usize, c: usize, a_c: f64, a0: f64, tau: Option<f64>, h: f64) -> f64 {
        let k = self.d.len();
        let mut v = 0.0;
        for i in l..k {
            v += self.d[i][c] * h.powi((i - l) as i32) / factorial((i - l) as u32);
        }
        let j = k - l;
        v += a_c * h.powi(j as i32) / factorial(j as u32);
        if let Some(tau) = tau {
            v += (a0 - a_c) * exp_integral(j, h, tau);
        }
        v
    }
}

fn check_input(sys: &IntegratorSystem, u: &DVector<f64>, which: &str) -> Result<(), SimError> {
    if u.len() != sys.inputs() {
        return Err(SimError::Dimension {
            expected: sys.inputs(),
            got: u.len(),
        });
    }
    if !sys.contains_input(u, BOX_TOL) {
        return Err(SimError::OutsideBox { which: which.into() });
    }
    Ok(())
}

fn sample_times(horizon: f64, dt: f64, extra: &[f64]) -> Result<Vec<f64>, SimError> {
    if !(horizon.is_finite() && horizon > 0.0) {
        return Err(SimError::BadHorizon);
    }
    if !(dt.is_finite() && dt > 0.0) {
        return Err(SimError::BadStep { dt, max: f64::INFINITY });
    }
    let steps = (horizon / dt).floor() as usize;
    let mut t: Vec<f64> = (0..=steps).map(|i| i as f64 * dt).collect();
    t.extend(extra.iter().copied().filter(|&s| s > 0.0 && s < horizon));
    t.push(horizon);
    t.sort_by(f64::total_cmp);
    t.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * horizon);
    Ok(t)
}

fn rest(n: usize, k: u32, x0: &DVector<f64>) -> Chain {
    let mut d = vec![DVector::zeros(n); k as usize];
    d[0] = x0.clone();
    Chain { d }
}

/// Trajectory from `x0` at rest under the constant input `u`, sampled every
/// `dt` plus the horizon. Each sample is evaluated from `t = 0` directly.
pub fn integrate_constant(
    sys: &IntegratorSystem,
    u: &DVector<f64>,
    x0: &DVector<f64>,
    horizon: f64,
    dt: f64,
) -> Result<Trajectory, SimError> {
    check_input(sys, u, "u")?;
    let n = sys.states();
    if x0.len() != n {
        return Err(SimError::Dimension { expected: n, got: x0.len() });
    }
    let times = sample_times(horizon, dt, &[])?;
    let a = sys.b_bar() * u;
    let start = rest(n, sys.order(), x0);
    let states = times.iter().map(|&t| start.advance(&a, &a, None, t).stacked()).collect();
    Ok(Trajectory {
        n,
        k: sys.order(),
        inputs: vec![u.clone(); times.len()],
        times,
        states,
    })
}

/// Piecewise-constant commands: `(start time, command)` with the first at `t = 0`.
pub type CommandSchedule = Vec<(f64, DVector<f64>)>;

/// Trajectory from `x0` at rest with lagged inputs starting from `u0`.
pub fn integrate_with_lag(
    sys: &IntegratorSystem,
    commands: &CommandSchedule,
    u0: &DVector<f64>,
    x0: &DVector<f64>,
    tau: f64,
    horizon: f64,
    dt: f64,
) -> Result<Trajectory, SimError> {
    if !(tau.is_finite() && tau > 0.0) {
        return Err(SimError::BadTau);
    }
    if !(dt > 0.0 && dt <= tau / 10.0 * (1.0 + 1e-12)) {
        return Err(SimError::BadStep { dt, max: tau / 10.0 });
    }
    if commands.is_empty() || commands[0].0 != 0.0 || commands.windows(2).any(|w| w[1].0 <= w[0].0) {
        return Err(SimError::BadSchedule);
    }
    for (i, (_, c)) in commands.iter().enumerate() {
        check_input(sys, c, &format!("command {i}"))?;
    }
    if u0.len() != sys.inputs() {
        return Err(SimError::Dimension {
            expected: sys.inputs(),
            got: u0.len(),
        });
    }
    let n = sys.states();
    if x0.len() != n {
        return Err(SimError::Dimension { expected: n, got: x0.len() });
    }
    let switch: Vec<f64> = commands.iter().map(|(t, _)| *t).collect();
    let times = sample_times(horizon, dt, &switch)?;

    let b = sys.b_bar();
    let mut chain = rest(n, sys.order(), x0);
    let mut lag = LagInputState::new(u0.clone(), tau)?;
    let mut states = vec![chain.stacked()];
    let mut inputs = vec![u0.clone()];
    for w in times.windows(2) {
        let (t0, t1) = (w[0], w[1]);
        let seg = commands.iter().rposition(|(s, _)| *s <= t0 + 1e-12 * horizon).unwrap_or(0);
        let uc = &commands[seg].1;
        let h = t1 - t0;
        chain = chain.advance(&(b * uc), &(b * &lag.current), Some(tau), h);
        lag.current = lag.at(uc, h);
        states.push(chain.stacked());
        inputs.push(lag.current.clone());
    }
    Ok(Trajectory {
        n,
        k: sys.order(),
        times,
        states,
        inputs,
    })
}

/// First time `x⁽ˡ⁾_i` reaches `level` (approached from below if `rising`),
/// when starting at rest with inputs `u0` relaxing towards the constant
/// command `uc` (`tau = None`: `uc` applied instantly).
#[allow(clippy::too_many_arguments)]
pub fn first_crossing(
    sys: &IntegratorSystem,
    uc: &DVector<f64>,
    u0: &DVector<f64>,
    tau: Option<f64>,
    derivative: usize,
    component: usize,
    level: f64,
    dt: f64,
    horizon: f64,
) -> Result<f64, SimError> {
    let n = sys.states();
    if derivative >= sys.order() as usize || component >= n {
        return Err(SimError::BadComponent {
            derivative,
            component,
            states: n,
            order: sys.order(),
        });
    }
    check_input(sys, uc, "command")?;
    if u0.len() != sys.inputs() {
        return Err(SimError::Dimension {
            expected: sys.inputs(),
            got: u0.len(),
        });
    }
    if !(horizon.is_finite() && horizon > 0.0) {
        return Err(SimError::BadHorizon);
    }
    if !(dt.is_finite() && dt > 0.0) {
        return Err(SimError::BadStep { dt, max: f64::INFINITY });
    }
    if let Some(tau) = tau {
        if !(tau.is_finite() && tau > 0.0) {
            return Err(SimError::BadTau);
        }
    }
    let b = sys.b_bar();
    let a_c = b * uc;
    let a0 = if tau.is_some() { b * u0 } else { a_c.clone() };
    let start = rest(n, sys.order(), &DVector::zeros(n));
    let rising = level >= 0.0;
    let value = |t: f64| {
        let v = start.component_after(derivative, component, a_c[component], a0[component], tau, t);
        if rising {
            v - level
        } else {
            level - v
        }
    };
    let steps = (horizon / dt).ceil() as usize;
    let mut lo = 0.0;
    for s in 1..=steps {
        let hi = (s as f64 * dt).min(horizon);
        if value(hi) >= 0.0 {
            let (mut a, mut b) = (lo, hi);
            for _ in 0..200 {
                let mid = 0.5 * (a + b);
                if mid <= a || mid >= b {
                    break;
                }
                if value(mid) >= 0.0 {
                    b = mid;
                } else {
                    a = mid;
                }
            }
            return Ok(b);
        }
        lo = hi;
    }
    Err(SimError::NotReached { target: level, horizon })
}

/// Which quantity of the translational dynamics must reach the target.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ReachQuantity {
    /// Vertical velocity (first-order system in velocity).
    Velocity,
    /// Vertical position (double integrator).
    Position,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SmoothRatio {
    pub quantity: ReachQuantity,
    pub target: f64,
    pub tau: f64,
    pub nominal_bang: f64,
    pub malfunction_bang: f64,
    pub nominal_smooth: f64,
    pub malfunction_smooth: f64,
    pub ratio_bangbang: f64,
    pub ratio_smooth: f64,
    /// Optimal constant commands (full input vectors).
    pub nominal_command: Vec<f64>,
    pub malfunction_command: Vec<f64>,
}

/// The vertical scenario: propeller 1 lost, yaw 0, inputs starting at hover.
pub struct VerticalScenario {
    pub system: IntegratorSystem,
    pub nominal_command: DVector<f64>,
    pub malfunction_command: DVector<f64>,
    /// Constant-input reach-time ratio from the reach module.
    pub reach_ratio: ExtReal,
}

/// Optimal constant commands for `d = (0, 0, ±1)` at the given order.
pub fn vertical_scenario(p: &OctocopterParams, d: &Direction, quantity: ReachQuantity) -> Result<VerticalScenario, SimError> {
    let v = d.as_vector();
    if d.dim() != 3 || v[0] != 0.0 || v[1] != 0.0 || v[2].abs() != 1.0 {
        return Err(SimError::UnsupportedDirection);
    }
    let k = match quantity {
        ReachQuantity::Velocity => 1,
        ReachQuantity::Position => 2,
    };
    let system = octocopter_translational(p, 0.0)?.with_order(k).map_err(CatalogError::from)?;
    let sp = split(&system, &[0]).map_err(CatalogError::from)?;
    let nom = nominal_reach_time_k(&system, d, k)?;
    let mal = malfunctioning_reach_time(&sp, d, k)?;
    let nominal_command = DVector::from_vec(nom.optimizer_u.ok_or(SimError::Unreachable("nominal"))?);
    let (u, w) = match (mal.optimizer_u, mal.optimizer_w) {
        (Some(u), Some(w)) => (DVector::from_vec(u), DVector::from_vec(w)),
        _ => return Err(SimError::Unreachable("malfunctioning")),
    };
    let malfunction_command = sp.merge_inputs(&u, &w);
    let reach_ratio = match (mal.time, nom.time) {
        (ExtReal::Finite(m), ExtReal::Finite(n)) => ExtReal::Finite(m / n),
        _ => ExtReal::PosInf,
    };
    Ok(VerticalScenario {
        system,
        nominal_command,
        malfunction_command,
        reach_ratio,
    })
}

/// Crossing-time ratios with and without input lag for the vertical scenario.
///
/// `target` is a speed (m/s) or a distance (m) depending on `quantity`.
pub fn smooth_reach_ratio(
    p: &OctocopterParams,
    d: &Direction,
    quantity: ReachQuantity,
    target: f64,
    dt: f64,
) -> Result<SmoothRatio, SimError> {
    if !(target.is_finite() && target > 0.0) {
        return Err(SimError::BadTarget);
    }
    if !(dt > 0.0 && dt <= p.tau / 10.0 * (1.0 + 1e-12)) {
        return Err(SimError::BadStep { dt, max: p.tau / 10.0 });
    }
    let sc = vertical_scenario(p, d, quantity)?;
    let sys = &sc.system;
    let level = target * d.as_vector()[2];
    let hover = DVector::zeros(sys.inputs());

    let bang = |cmd: &DVector<f64>| -> Result<f64, SimError> {
        let speed = (sys.b_bar() * cmd)[2].abs();
        let t = match quantity {
            ReachQuantity::Velocity => target / speed,
            ReachQuantity::Position => (2.0 * target / speed).sqrt(),
        };
        // Confirm by simulation; the analytic value fixes the horizon.
        let horizon = 100.0 * (t + p.tau);
        first_crossing(sys, cmd, &hover, None, 0, 2, level, dt, horizon)
    };
    let smooth = |cmd: &DVector<f64>, t_bang: f64| -> Result<f64, SimError> {
        let horizon = 100.0 * (t_bang + p.tau);
        first_crossing(sys, cmd, &hover, Some(p.tau), 0, 2, level, dt, horizon)
    };
    let nb = bang(&sc.nominal_command)?;
    let mb = bang(&sc.malfunction_command)?;
    let ns = smooth(&sc.nominal_command, nb)?;
    let ms = smooth(&sc.malfunction_command, mb)?;
    Ok(SmoothRatio {
        quantity,
        target,
        tau: p.tau,
        nominal_bang: nb,
        malfunction_bang: mb,
        nominal_smooth: ns,
        malfunction_smooth: ms,
        ratio_bangbang: mb / nb,
        ratio_smooth: ms / ns,
        nominal_command: sc.nominal_command.iter().copied().collect(),
        malfunction_command: sc.malfunction_command.iter().copied().collect(),
    })
}

/// `sup_t |x_a(t) − x_b(t)|` over the common samples of two trajectories.
pub fn sup_distance(a: &Trajectory, b: &Trajectory) -> f64 {
    a.states
        .iter()
        .zip(&b.states)
        .map(|(x, y)| (x - y).abs().max())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::toy2;
    use nalgebra::{dmatrix, dvector};

    #[test]
    fn exp_integral_branches_agree() {
        for j in 1..6 {
            for &h in &[0.05f64, 0.099, 0.1, 0.101, 0.3] {
                let tau = 0.1;
                let series = {
                    let z = h / tau;
                    let mut s = 0.0;
                    for m in 0..80 {
                        s += (-z).powi(m) / factorial((m + j as i32) as u32);
                    }
                    h.powi(j as i32) * s
                };
                let v = exp_integral(j, h, tau);
                assert!((v - series).abs() <= 1e-12 * series.abs().max(1e-300), "j={j} h={h}: {v} vs {series}");
            }
        }
        // j = 1: τ(1 − e^{−h/τ})
        assert!((exp_integral(1, 0.4, 0.1) - 0.1 * (1.0 - (-4.0f64).exp())).abs() < 1e-15);
    }

    #[test]
    fn toy2_constant_input() {
        let tr = integrate_constant(&toy2(), &dvector![-1.0, 1.0], &dvector![0.0], 0.5, 0.1).unwrap();
        assert!((tr.final_state()[0] + 1.0).abs() < 1e-15);
        assert_eq!(tr.times.len(), 6);
    }

    #[test]
    fn double_integrator_closed_form() {
        let sys = IntegratorSystem::new("dbl", 2, dmatrix![2.0], dvector![-1.0], dvector![1.0]).unwrap();
        let tr = integrate_constant(&sys, &dvector![0.75], &dvector![0.0], 1.3, 0.01).unwrap();
        let x = tr.final_state();
        assert!((x[0] - 1.5 * 1.3 * 1.3 / 2.0).abs() < 1e-14);
        assert!((x[1] - 1.5 * 1.3).abs() < 1e-14);
    }

    #[test]
    fn lag_input_reaches_command() {
        let lag = LagInputState::new(dvector![0.0], 0.1).unwrap();
        let u = lag.at(&dvector![1.0], 0.4);
        assert!((u[0] - (1.0 - (-4.0f64).exp())).abs() < 1e-15);
        assert!((u[0] - 0.9817).abs() < 1e-4);
    }

    #[test]
    fn lag_trajectory_matches_direct_formula() {
        // ẋ = u, u̇ = (1 − u)/τ from u(0) = 0: x(t) = t − τ(1 − e^{−t/τ}).
        let sys = IntegratorSystem::new("one", 1, dmatrix![1.0], dvector![0.0], dvector![1.0]).unwrap();
        let tr = integrate_with_lag(&sys, &vec![(0.0, dvector![1.0])], &dvector![0.0], &dvector![0.0], 0.1, 1.0, 0.01)
            .unwrap();
        for (t, x) in tr.times.iter().zip(tr.component(0, 0)) {
            let exact = t - 0.1 * (1.0 - (-t / 0.1).exp());
            assert!((x - exact).abs() < 1e-13, "t={t}");
        }
    }

    #[test]
    fn lag_schedule_switches() {
        let sys = IntegratorSystem::new("one", 1, dmatrix![1.0], dvector![-1.0], dvector![1.0]).unwrap();
        let cmds = vec![(0.0, dvector![1.0]), (0.255, dvector![-1.0])];
        let tr = integrate_with_lag(&sys, &cmds, &dvector![0.0], &dvector![0.0], 0.1, 0.5, 0.01).unwrap();
        assert!(tr.times.iter().any(|&t| (t - 0.255).abs() < 1e-12));
        assert!(tr.inputs.last().unwrap()[0] < 0.0);
    }

    #[test]
    fn lag_rejects_coarse_step_and_bad_commands() {
        let sys = IntegratorSystem::new("one", 1, dmatrix![1.0], dvector![0.0], dvector![1.0]).unwrap();
        assert!(matches!(
            integrate_with_lag(&sys, &vec![(0.0, dvector![1.0])], &dvector![0.0], &dvector![0.0], 0.1, 1.0, 0.05),
            Err(SimError::BadStep { .. })
        ));
        assert!(matches!(
            integrate_with_lag(&sys, &vec![(0.0, dvector![2.0])], &dvector![0.0], &dvector![0.0], 0.1, 1.0, 0.01),
            Err(SimError::OutsideBox { .. })
        ));
        assert!(matches!(
            integrate_constant(&sys, &dvector![-0.5], &dvector![0.0], 1.0, 0.1),
            Err(SimError::OutsideBox { .. })
        ));
    }

    #[test]
    fn crossing_is_exact_for_constant_input() {
        let sys = IntegratorSystem::new("one", 1, dmatrix![2.0], dvector![0.0], dvector![1.0]).unwrap();
        let t = first_crossing(&sys, &dvector![1.0], &dvector![0.0], None, 0, 0, 1.0, 0.01, 10.0).unwrap();
        assert!((t - 0.5).abs() < 1e-12);
        let err = first_crossing(&sys, &dvector![0.0], &dvector![0.0], None, 0, 0, 1.0, 0.01, 1.0).unwrap_err();
        assert!(matches!(err, SimError::NotReached { .. }));
    }

    #[test]
    fn smooth_ratio_downward() {
        let p = OctocopterParams::default();
        let d = Direction::from_slice(&[0.0, 0.0, -1.0]).unwrap();
        let r = smooth_reach_ratio(&p, &d, ReachQuantity::Velocity, 1.0, p.tau / 100.0).unwrap();
        assert!(r.ratio_smooth >= 1.0 && r.ratio_smooth < r.ratio_bangbang);
        assert!(r.nominal_smooth > r.nominal_bang);
    }

    #[test]
    fn scenario_rejects_other_directions() {
        let d = Direction::from_slice(&[1.0, 0.0, 0.0]).unwrap();
        assert!(matches!(
            smooth_reach_ratio(&OctocopterParams::default(), &d, ReachQuantity::Velocity, 1.0, 1e-3),
            Err(SimError::UnsupportedDirection)
        ));
    }
}
