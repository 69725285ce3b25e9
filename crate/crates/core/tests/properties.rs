use std::f64::consts::FRAC_PI_4;

use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

use quantres::catalog::{self, OctocopterParams};
use quantres::ext::factorial;
use quantres::reach::{malfunctioning_reach_time, nominal_reach_time_k, ratio_report, time_ratio};
use quantres::resilience::{
    polytope_containment_check, quantitative_resilience, r_pair, resilience_via_reach_times,
};
use quantres::sim::{self, first_crossing, integrate_constant, integrate_with_lag, sup_distance, ReachQuantity};
use quantres::{split, Direction, ExtReal, IntegratorSystem};

/// Small systems with half-integer entries; boxes may or may not contain 0.
fn system(symmetric: bool) -> impl Strategy<Value = IntegratorSystem> {
    (1usize..=3)
        .prop_flat_map(move |n| (Just(n), (n + 1)..=5))
        .prop_flat_map(move |(n, m)| {
            (
                Just(n),
                Just(m),
                prop::collection::vec(-4i32..=4, n * m),
                prop::collection::vec(-3i32..=1, m),
                prop::collection::vec(1i32..=4, m),
            )
        })
        .prop_map(move |(n, m, b, lo, width)| {
            let b = DMatrix::from_row_iterator(n, m, b.into_iter().map(|v| f64::from(v) / 2.0));
            let (lo, hi): (Vec<f64>, Vec<f64>) = if symmetric {
                width.iter().map(|&w| (-f64::from(w), f64::from(w))).unzip()
            } else {
                lo.iter().zip(&width).map(|(&l, &w)| (f64::from(l), f64::from(l + w))).unzip()
            };
            IntegratorSystem::new("random", 1, b, DVector::from_vec(lo), DVector::from_vec(hi)).unwrap()
        })
}

fn direction(n: usize) -> impl Strategy<Value = Direction> {
    prop::collection::vec(-3.0f64..3.0, n)
        .prop_filter("nonzero", |v| v.iter().any(|x| x.abs() > 1e-3))
        .prop_map(|v| Direction::from_slice(&v).unwrap())
}

fn system_and_direction() -> impl Strategy<Value = (IntegratorSystem, Direction, usize)> {
    system(false).prop_flat_map(|s| {
        let (n, m) = (s.states(), s.inputs());
        (Just(s), direction(n), 0..m)
    })
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1e-300)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn reach_times_are_positively_homogeneous((sys, d, col) in system_and_direction(), alpha in 0.1f64..20.0) {
        let s = split(&sys, &[col]).unwrap();
        let scaled = d.scaled(alpha);
        let pairs = [
            (nominal_reach_time_k(&sys, &d, 1).unwrap().time, nominal_reach_time_k(&sys, &scaled, 1).unwrap().time),
            (malfunctioning_reach_time(&s, &d, 1).unwrap().time, malfunctioning_reach_time(&s, &scaled, 1).unwrap().time),
        ];
        for (base, sc) in pairs {
            match (base, sc) {
                (ExtReal::Finite(b), ExtReal::Finite(t)) => prop_assert!(rel_close(t, alpha * b, 1e-8), "{t} vs {}", alpha * b),
                (b, t) => prop_assert_eq!(b, t),
            }
        }
    }

    #[test]
    fn losing_authority_never_speeds_things_up((sys, d, col) in system_and_direction()) {
        let s = split(&sys, &[col]).unwrap();
        let r = ratio_report(&s, &d, 1).unwrap();
        if let (ExtReal::Finite(tn), ExtReal::Finite(tm)) = (r.nominal.time, r.malfunctioning.time) {
            prop_assert!(tn <= tm * (1.0 + 1e-9), "T_N {tn} > T_M {tm}");
        }
        if r.nominal.time.is_pos_inf() {
            prop_assert!(r.malfunctioning.time.is_pos_inf());
        }
        if let ExtReal::Finite(t) = r.ratio {
            prop_assert!(t >= 1.0);
        }
    }

    #[test]
    fn order_k_times_follow_the_factorial_identity((sys, d, col) in system_and_direction(), k in 1u32..=5) {
        let s = split(&sys, &[col]).unwrap();
        let nominal = nominal_reach_time_k(&sys, &d, k).unwrap();
        let malfunctioning = malfunctioning_reach_time(&s, &d, k).unwrap();
        for r in [nominal, malfunctioning] {
            match (r.time, r.first_order_time) {
                (ExtReal::Finite(tk), ExtReal::Finite(t1)) => {
                    prop_assert!(rel_close(tk.powi(k as i32), factorial(k) * t1, 1e-12));
                }
                (a, b) => prop_assert_eq!(a, b),
            }
        }
    }

    #[test]
    fn higher_order_resilience_is_larger((sys, _d, col) in system_and_direction(), k in 1u32..=5) {
        let s = split(&sys, &[col]).unwrap();
        let r1 = quantitative_resilience(&s, 1).unwrap();
        let rk = quantitative_resilience(&s, k).unwrap();
        prop_assert!((0.0..=1.0).contains(&r1.r_q));
        prop_assert_eq!(r1.r_q, rk.r_q);
        prop_assert!(rk.r_kq >= rk.r_q);
        prop_assert!(rel_close(rk.r_kq, rk.r_q.powf(1.0 / f64::from(k)), 1e-12) || rk.r_q == 0.0);
    }

    #[test]
    fn verdicts_agree_with_reach_times((sys, _d, col) in system_and_direction()) {
        let s = split(&sys, &[col]).unwrap();
        prop_assume!(s.single_column().unwrap().iter().any(|&v| v != 0.0));
        let report = quantitative_resilience(&s, 1).unwrap();
        // Exactly on the boundary the verdict is a matter of tolerance.
        if report.r_min.is_some_and(|r| r.abs() <= 1e-6) {
            return Ok(());
        }
        let via_reach = resilience_via_reach_times(&s).unwrap();
        prop_assert_eq!(report.resilient, via_reach.resilient);
        if report.resilient {
            let worst = via_reach.ratio_plus.max(via_reach.ratio_minus).to_f64();
            prop_assert!(rel_close(1.0 / report.r_q, worst, 1e-8), "1/r_q {} vs {worst}", 1.0 / report.r_q);
        }
    }

    #[test]
    fn resilient_implies_interior_containment((sys, _d, col) in system_and_direction()) {
        let s = split(&sys, &[col]).unwrap();
        let report = quantitative_resilience(&s, 1).unwrap();
        if report.resilient && report.r_min.is_some_and(|r| r > 1e-5) {
            prop_assert!(polytope_containment_check(&s).unwrap());
        }
    }

    #[test]
    fn symmetric_boxes_give_equal_pair(sys in system(true), col in 0usize..2) {
        let s = split(&sys, &[col]).unwrap();
        prop_assume!(s.single_column().unwrap().iter().any(|&v| v != 0.0));
        let pair = r_pair(&s).unwrap();
        prop_assert!((pair.r_plus - pair.r_minus).abs() <= 1e-9 * pair.r_plus.abs().max(1.0));
    }

    #[test]
    fn model_documents_round_trip(sys in system(false)) {
        let back = IntegratorSystem::from_json(&sys.to_json()).unwrap();
        prop_assert_eq!(back, sys);
    }

    #[test]
    fn constant_input_trajectories_are_exact(sys in system(false), k in 1u32..=3, frac in prop::collection::vec(0.0f64..=1.0, 5)) {
        let sys = sys.with_order(k).unwrap();
        let u = DVector::from_fn(sys.inputs(), |j, _| {
            sys.u_min()[j] + (sys.u_max()[j] - sys.u_min()[j]) * frac[j]
        });
        let a = sys.b_bar() * &u;
        let traj = integrate_constant(&sys, &u, &DVector::zeros(sys.states()), 0.7, 0.1).unwrap();
        prop_assert_eq!(traj.times.len(), 8);
        for (t, x) in traj.times.iter().zip(&traj.states) {
            for l in 0..k as usize {
                let j = k as usize - l;
                for i in 0..sys.states() {
                    let expect = a[i] * t.powi(j as i32) / factorial(j as u32);
                    prop_assert!((x[l * sys.states() + i] - expect).abs() <= 1e-12 * (1.0 + expect.abs()));
                }
            }
        }
    }
}

fn catalog_systems() -> Vec<IntegratorSystem> {
    let p = OctocopterParams::default();
    vec![
        catalog::toy1(),
        catalog::toy2(),
        catalog::toy3(),
        catalog::spacecraft_printed(),
        catalog::octocopter_rotational(&p).unwrap(),
        catalog::octocopter_translational(&p, 0.0).unwrap(),
    ]
}

/// Simulating the reported optimal constant inputs reaches `d` at the reported time.
#[test]
fn simulated_optimizers_reach_at_reported_times() {
    for sys in catalog_systems() {
        let n = sys.states();
        let s = split(&sys, &[0]).unwrap();
        for i in 0..n {
            for sign in [1.0, -1.0] {
                let mut v = vec![0.0; n];
                v[i] = sign;
                let d = Direction::from_slice(&v).unwrap();
                let hover = DVector::zeros(sys.inputs());

                let nominal = nominal_reach_time_k(&sys, &d, 1).unwrap();
                let t = nominal.time.to_f64();
                let dt = t / 1000.0;
                let u = DVector::from_vec(nominal.optimizer_u.unwrap());
                let hit = first_crossing(&sys, &u, &hover, None, 0, i, sign, dt, 2.0 * t).unwrap();
                assert!((hit - t).abs() <= 2.0 * dt, "{}: nominal {hit} vs {t}", sys.name());

                let mal = malfunctioning_reach_time(&s, &d, 1).unwrap();
                if let ExtReal::Finite(t) = mal.time {
                    let dt = t / 1000.0;
                    let u = DVector::from_vec(mal.optimizer_u.unwrap());
                    let w = DVector::from_vec(mal.optimizer_w.unwrap());
                    let full = s.merge_inputs(&u, &w);
                    let hit = first_crossing(&sys, &full, &hover, None, 0, i, sign, dt, 2.0 * t).unwrap();
                    assert!((hit - t).abs() <= 2.0 * dt, "{}: malfunctioning {hit} vs {t}", sys.name());
                }
            }
        }
    }
}

#[test]
fn second_order_crossing_matches_reach_time() {
    let sys = catalog::toy1().with_order(2).unwrap();
    let d = Direction::from_slice(&[1.0, 0.0]).unwrap();
    let r = nominal_reach_time_k(&sys, &d, 2).unwrap();
    let t = r.time.to_f64();
    let u = DVector::from_vec(r.optimizer_u.unwrap());
    let hit = first_crossing(&sys, &u, &DVector::zeros(3), None, 0, 0, 1.0, t / 1000.0, 2.0 * t).unwrap();
    assert!((hit - t).abs() <= 2e-3 * t);
}

/// Distance to the bang-bang trajectory shrinks as the lag vanishes.
#[test]
fn lag_converges_monotonically_to_bang_bang() {
    let p = OctocopterParams::default();
    let d = Direction::from_slice(&[0.0, 0.0, 1.0]).unwrap();
    let sc = sim::vertical_scenario(&p, &d, ReachQuantity::Velocity).unwrap();
    let x0 = DVector::zeros(3);
    let hover = DVector::zeros(8);
    let (horizon, dt) = (1.0, 1e-3);
    for cmd in [&sc.nominal_command, &sc.malfunction_command] {
        let bang = integrate_constant(&sc.system, cmd, &x0, horizon, dt).unwrap();
        let gaps: Vec<f64> = [0.2, 0.1, 0.05, 0.01]
            .iter()
            .map(|&tau| {
                let lag = integrate_with_lag(&sc.system, &vec![(0.0, cmd.clone())], &hover, &x0, tau, horizon, dt).unwrap();
                sup_distance(&lag, &bang)
            })
            .collect();
        assert!(gaps.windows(2).all(|w| w[1] <= w[0]), "{gaps:?}");
        assert!(gaps[3] < gaps[0] / 10.0);
    }
}

#[test]
fn vanishing_lag_recovers_the_bang_bang_ratio() {
    let p = OctocopterParams {
        tau: 1e-6,
        ..OctocopterParams::default()
    };
    let d = Direction::from_slice(&[0.0, 0.0, -1.0]).unwrap();
    let r = sim::smooth_reach_ratio(&p, &d, ReachQuantity::Velocity, 1.0, 1e-8).unwrap();
    assert!((r.ratio_smooth - r.ratio_bangbang).abs() < 1e-3);
}

/// Upward, position level: the bang-bang ratio is the square root of the
/// velocity-level ratio, and the lag lowers it.
#[test]
fn upward_position_ratio() {
    let p = OctocopterParams::default();
    let d = Direction::from_slice(&[0.0, 0.0, 1.0]).unwrap();
    let v = sim::smooth_reach_ratio(&p, &d, ReachQuantity::Velocity, 1.0, 1e-3).unwrap();
    let x = sim::smooth_reach_ratio(&p, &d, ReachQuantity::Position, 1.0, 1e-3).unwrap();
    assert!((x.ratio_bangbang - v.ratio_bangbang.sqrt()).abs() < 1e-6);
    assert!((x.ratio_bangbang - 1.1428).abs() < 1e-3, "{}", x.ratio_bangbang);
    assert!(x.ratio_smooth < x.ratio_bangbang);
}

/// Yawing rotates the image of the inputs, so resilience does not depend on the yaw
/// and ratios follow the rotated direction.
#[test]
fn translational_resilience_is_yaw_invariant() {
    let p = OctocopterParams::default();
    let level = catalog::octocopter_translational(&p, 0.0).unwrap();
    let d = DVector::from_vec(vec![0.6, -0.3, 0.7]);
    for psi in [0.0, FRAC_PI_4, 1.3] {
        let yawed = catalog::octocopter_translational(&p, psi).unwrap();
        let rd = Direction::new(catalog::yaw_rotation(psi) * &d).unwrap();
        for col in 0..8 {
            let (a, b) = (split(&level, &[col]).unwrap(), split(&yawed, &[col]).unwrap());
            let (ra, rb) = (
                quantitative_resilience(&a, 1).unwrap(),
                quantitative_resilience(&b, 1).unwrap(),
            );
            assert_eq!(ra.resilient, rb.resilient);
            assert!((ra.r_q - rb.r_q).abs() < 1e-9, "psi {psi} col {col}");
            let (ta, tb) = (
                time_ratio(&a, &Direction::new(d.clone()).unwrap(), 1).unwrap(),
                time_ratio(&b, &rd, 1).unwrap(),
            );
            match (ta, tb) {
                (ExtReal::Finite(x), ExtReal::Finite(y)) => assert!(rel_close(x, y, 1e-9)),
                (x, y) => assert_eq!(x, y),
            }
        }
    }
}

/// The rotational allocation has two propeller groups with different lever arms:
/// losses within a group are interchangeable, losses across groups are not.
#[test]
fn rotational_losses_are_equal_within_groups() {
    let sys = catalog::octocopter_rotational(&OctocopterParams::default()).unwrap();
    let rq: Vec<f64> = (0..8)
        .map(|j| quantitative_resilience(&split(&sys, &[j]).unwrap(), 1).unwrap().r_q)
        .collect();
    for group in [&rq[..4], &rq[4..]] {
        assert!(group.iter().all(|r| (r - group[0]).abs() < 1e-9), "{rq:?}");
    }
    assert!((rq[0] - rq[4]).abs() > 0.1);
}
