use std::sync::Arc;

use super::*;
use crate::field::{FieldInitialData, FieldSettings, FieldSolver};
use crate::history::{Kinematics, Trajectory, TrajectoryHistory};
use crate::model::{ChargeDensity, ConfiningPotential};
use crate::quadrature::BallRule;
use crate::vec3::Vec3;
use crate::Error;

fn bump() -> Arc<ChargeDensity<f64>> {
    Arc::new(ChargeDensity::bump(1.0, 1.0))
}

fn resting(h: f64, n: usize, at: Vec3<f64>) -> TrajectoryHistory<f64> {
    let mut hist = TrajectoryHistory::from_fn(h, n, |_| Kinematics { q: at, ..Default::default() }).unwrap();
    hist.set_last_acceleration(Vec3::zero());
    hist
}

#[test]
fn force_vanishes_at_matched_and_zero_start() {
    let rho = bump();
    let q0 = Vec3::new(0.3, -0.2, 0.1);
    let hist = resting(0.02, 0, q0);
    let matched = FieldSolver::new(rho.clone(), FieldInitialData::matched(q0.to_f64()), FieldSettings::default());
    let (fr, fp) = matched.retarded_force(&hist, q0, 0.0).unwrap();
    assert_eq!(fr.max_abs() + fp.max_abs(), 0.0);
    let zero = FieldSolver::new(rho, FieldInitialData::zero(), FieldSettings::default());
    assert_eq!(zero.kirchhoff_force(q0, 0.0).max_abs(), 0.0);
    assert_eq!(zero.retarded_force(&hist, q0, 0.0).unwrap().0.max_abs(), 0.0);
}

/// `−∫ρ(x) ∇s₀(x + d) dx` by product quadrature.
fn two_center_oracle(rho: &ChargeDensity<f64>, d: Vec3<f64>) -> Vec3<f64> {
    let ball = BallRule::simple(Vec3::zero(), 1.0, 48, 32, 32);
    let mut f = Vec3::zero();
    for (x, w) in ball.points.iter().zip(ball.weights.iter()) {
        f -= rho.coulomb_gradient(Vec3::zero(), *x + d) * (*w * rho.rho(*x));
    }
    f
}

#[test]
fn saturated_field_gives_static_two_center_force() {
    let rho = bump();
    let qp = Vec3::new(0.2, 0.1, 0.0);
    // resting at q' from t = 0 on, with the Coulomb field of q' as initial data
    let hist = resting(0.02, 500, qp);
    let solver = FieldSolver::new(rho.clone(), FieldInitialData::matched(qp.to_f64()), FieldSettings::default());
    for probe in [Vec3::new(1.7, 0.4, -0.3), Vec3::new(0.5, 0.0, 0.2), Vec3::new(3.5, 0.0, 0.0)] {
        let (fr, fp) = solver.retarded_force(&hist, probe, 10.0).unwrap();
        let f = fr + fp;
        let o = two_center_oracle(&rho, probe - qp);
        assert!((f - o).norm() <= 1e-4 * o.norm(), "{f:?} vs {o:?}");
        // attraction towards q'
        assert!(f.dot(probe - qp) < 0.0);
    }
    // the same without the resting past: only the retarded part after saturation
    let fresh = FieldSolver::new(rho.clone(), FieldInitialData::zero(), FieldSettings::default());
    let probe = Vec3::new(1.7, 0.4, -0.3);
    let (fr, fp) = fresh.retarded_force(&hist, probe, 10.0).unwrap();
    let o = two_center_oracle(&rho, probe - qp);
    assert_eq!(fp.max_abs(), 0.0);
    assert!((fr - o).norm() <= 1e-4 * o.norm());
}

#[test]
fn reduced_force_matches_ball_quadrature() {
    let rho = bump();
    let traj = |t: f64| Kinematics {
        q: Vec3::new(0.4 * (1.3 * t).sin(), 0.2 * t * t / (1.0 + t), 0.0),
        v: Vec3::new(0.52 * (1.3 * t).cos(), 0.2 * (2.0 * t + t * t) / ((1.0 + t) * (1.0 + t)), 0.0),
        a: Vec3::new(-0.676 * (1.3 * t).sin(), 0.4 / ((1.0 + t) * (1.0 + t) * (1.0 + t)), 0.0),
    };
    let hist = TrajectoryHistory::from_fn(0.02, 150, traj).unwrap();
    let data = FieldInitialData::bump([2.5, 0.5, 0.0], 1.0, 0.3, -0.2).with_coulomb([-0.5, 0.0, 0.0]);
    let solver = FieldSolver::new(rho.clone(), data, FieldSettings::default());
    let pot = ConfiningPotential::harmonic(1.0);
    for (t, q) in [(1.5, Vec3::new(0.3, 0.1, 0.05)), (3.0, hist.position(3.0))] {
        let parts = solver.force_parts(&pot, &hist, q, t).unwrap();
        let reduced = parts.self_force + parts.kirchhoff;
        let quad = solver.self_force_quadrature(&hist, q, t, 32, 32, 48).unwrap();
        assert!(parts.kirchhoff.norm() > 1e-4, "data must reach the particle");
        assert!((reduced - quad).norm() <= 1e-6 * (1.0 + quad.norm()), "{reduced:?} vs {quad:?}");
    }
}

#[test]
fn kirchhoff_force_at_start_pairs_data_with_gradient() {
    let rho = bump();
    let data = FieldInitialData::bump([0.8, 0.0, 0.3], 1.2, 0.7, 0.0);
    let solver = FieldSolver::new(rho.clone(), data.clone(), FieldSettings::default());
    let q = Vec3::new(0.1, 0.2, 0.0);
    let f = solver.kirchhoff_force(q, 0.0);
    let ball = BallRule::simple(q, 1.0, 40, 32, 48);
    let mut o = Vec3::zero();
    for (x, w) in ball.points.iter().zip(ball.weights.iter()) {
        o += rho.grad_rho(*x - q) * (*w * data.phi0_free(*x));
    }
    assert!((f - o).norm() < 1e-7, "{f:?} vs {o:?}");
}

#[test]
fn stationary_start_is_a_fixed_point() {
    let mut cfg = ScenarioConfig::stationary(2.0);
    cfg.q0 = [0.0; 3];
    let rec = simulate::<f64>(&cfg).unwrap();
    for q in rec.history.positions() {
        assert!(q.norm() < 1e-12);
    }
    for v in rec.history.velocities() {
        assert!(v.norm() < 1e-12);
    }
}

#[test]
fn decoupled_oscillator_converges_at_fourth_order() {
    let err = |h: f64| {
        let cfg = ScenarioConfig {
            rho: DensitySpec::Zero { radius: 1.0 },
            q0: [1.0, 0.0, 0.0],
            p0: [0.0, 0.5, 0.0],
            h,
            t_end: 10.0,
            ..ScenarioConfig::default()
        };
        let rec = simulate::<f64>(&cfg).unwrap();
        let s = rec.final_state();
        let exact = Vec3::new(10f64.cos(), 0.5 * 10f64.sin(), 0.0);
        (s.q - exact).norm()
    };
    let (e1, e2) = (err(0.1), err(0.05));
    let ratio = e1 / e2;
    assert!((14.0..18.0).contains(&ratio), "ratio {ratio}");
}

#[test]
fn coupled_run_self_converges() {
    let run = |h: f64| {
        let cfg = ScenarioConfig { h, ..ScenarioConfig::displaced(0.5, 3.0) };
        simulate::<f64>(&cfg).unwrap().final_state().q
    };
    let (a, b, c) = (run(0.04), run(0.02), run(0.01));
    let order = ((a - b).norm() / (b - c).norm()).log2();
    assert!(order >= 3.0, "order {order}");
}

#[test]
fn forces_sum_to_stored_acceleration() {
    let cfg = ScenarioConfig {
        field: FieldSpec {
            free: FreeField::Bump { center: [2.0, 0.0, 0.0], radius: 1.0, amp_phi: 0.2, amp_pi: 0.1 },
            coulomb: CoulombPart::Minimum,
        },
        ..ScenarioConfig::displaced(0.3, 1.0)
    };
    let rec = simulate::<f64>(&cfg).unwrap();
    assert_eq!(rec.history.len(), cfg.steps() + 1);
    for (f, a) in rec.forces.iter().zip(rec.history.accelerations()) {
        assert!((f.total() - *a).max_abs() < 1e-15);
    }
    assert!(rec.info.max_plane_deviation < 1e-12);
}

#[test]
fn plane_mode_and_escape_are_enforced() {
    let mut cfg = ScenarioConfig::displaced(0.5, 1.0);
    cfg.q0[2] = 0.1;
    assert!(matches!(cfg.validate(), Err(Error::InvalidParameter { name, .. }) if name == "init.q3"));
    let mut cfg = ScenarioConfig::displaced(0.5, 1.0);
    cfg.tolerances.escape_radius = Some(0.45);
    let e = simulate::<f64>(&cfg).unwrap_err();
    assert!(matches!(e, Error::Escape { .. }), "{e}");
    let mut cfg = ScenarioConfig::displaced(0.5, 1.0);
    cfg.t_end = 1.005;
    assert!(cfg.validate().is_err());
}



fn linear_cfg(q0: [f64; 3], t_end: f64) -> ScenarioConfig {
    ScenarioConfig {
        q0,
        field: FieldSpec { free: FreeField::None, coulomb: CoulombPart::Minimum },
        t_end,
        ..ScenarioConfig::default()
    }
}

#[test]
fn operator_a_on_snapshots() {
    let sys = LinearSystem::<f64>::from_config(&linear_cfg([1.0, 0.0, 0.0], 0.0)).unwrap();
    let nu1 = sys.nu1_squared;
    let hist = resting(0.02, 0, Vec3::unit(0));
    let r = sys.apply_a(&hist, 0.0).unwrap();
    assert_eq!(r.dq, Vec3::zero());
    assert!((r.dp - Vec3::new(-(1.0 + nu1), 0.0, 0.0)).max_abs() < 1e-14);
    let zero = resting(0.02, 0, Vec3::zero());
    let r0 = sys.apply_a(&zero, 0.0).unwrap();
    assert_eq!(r0.dp.max_abs() + r0.dq.max_abs(), 0.0);
    // field components at t = 0: (Π₀, ∇ρ·Q₀)
    for x in [Vec3::new(0.3, 0.2, -0.1), Vec3::new(-0.5, 0.6, 0.1)] {
        let (pi, acc) = sys.field_rates(&hist, x, 0.0).unwrap();
        assert_eq!(pi, 0.0);
        assert!((acc - sys.rho().grad_rho(x)[0]).abs() < 1e-10);
    }
    // linearity on a recorded history
    let traj = |s: f64| move |t: f64| Kinematics {
        q: Vec3::new(s * t.cos(), s * 0.3 * t, 0.0),
        v: Vec3::new(-s * t.sin(), s * 0.3, 0.0),
        a: Vec3::new(-s * t.cos(), 0.0, 0.0),
    };
    let h1 = TrajectoryHistory::from_fn(0.02, 150, traj(1.0)).unwrap();
    let h2 = TrajectoryHistory::from_fn(0.02, 150, traj(2.0)).unwrap();
    let (a1, a2) = (sys.apply_a(&h1, 2.5).unwrap(), sys.apply_a(&h2, 2.5).unwrap());
    assert!((a2.dp - a1.dp * 2.0).max_abs() < 1e-14 * (1.0 + a2.dp.max_abs()));
    assert!((a2.dq - a1.dq * 2.0).max_abs() < 1e-14);
    let x = Vec3::new(0.4, 1.1, 0.2);
    let (f1, f2) = (sys.field_rates(&h1, x, 2.5).unwrap(), sys.field_rates(&h2, x, 2.5).unwrap());
    assert!((f2.0 - 2.0 * f1.0).abs() < 1e-14 && (f2.1 - 2.0 * f1.1).abs() < 1e-14);
}

#[test]
fn resting_past_start_feels_only_the_potential() {
    let cfg = ScenarioConfig { field: FieldSpec::matched(), ..linear_cfg([0.2, -0.1, 0.0], 0.0) };
    let sys = LinearSystem::<f64>::from_config(&cfg).unwrap();
    let q0 = Vec3::new(0.2, -0.1, 0.0);
    let hist = TrajectoryHistory::new(0.02, q0, Vec3::zero(), Vec3::zero(), true).unwrap();
    let f = sys.force(&hist, q0, 0.0).unwrap();
    assert!((f + q0).max_abs() < 1e-13, "{f:?}");
}

#[test]
fn linear_runs_zero_and_decoupled() {
    let rec = linear_simulate::<f64>(&linear_cfg([0.0; 3], 2.0)).unwrap();
    assert!(rec.history.positions().iter().all(|q| q.max_abs() == 0.0));
    let cfg = ScenarioConfig { rho: DensitySpec::Zero { radius: 1.0 }, ..linear_cfg([1.0, 0.0, 0.0], 5.0) };
    let rec = linear_simulate::<f64>(&cfg).unwrap();
    let s = rec.history.last();
    assert!((s.1.q[0] - 5f64.cos()).abs() < 1e-7);
}

#[test]
fn linear_energy_starts_from_the_quadratic_form() {
    let rec = linear_simulate::<f64>(&linear_cfg([0.3, 0.1, 0.0], 0.0)).unwrap();
    let e = rec.energy_at(0.0).unwrap();
    let nu1 = rec.system.nu1_squared;
    let expected = 0.5 * (1.0 + nu1) * 0.1;
    assert!((e.value - expected).abs() < 1e-9 * expected, "{e:?} vs {expected}");
}

#[test]
fn linear_energy_is_conserved_on_short_runs() {
    let cfg = ScenarioConfig {
        field: FieldSpec {
            free: FreeField::Bump { center: [1.5, 0.0, 0.0], radius: 1.0, amp_phi: 0.1, amp_pi: 0.05 },
            coulomb: CoulombPart::Minimum,
        },
        ..linear_cfg([0.3, 0.0, 0.0], 2.0)
    };
    let rec = linear_simulate::<f64>(&cfg).unwrap();
    let e0 = rec.energy_at(0.0).unwrap().value;
    for t in [0.9, 2.0] {
        let e = rec.energy_at(t).unwrap().value;
        assert!((e - e0).abs() < 1e-6 * e0, "t={t} {e} vs {e0}");
    }
}

#[test]
fn remainder_vanishes_at_origin_and_scales_quadratically() {
    let cfg = ScenarioConfig {
        potential: PotentialSpec {
            kind: crate::model::PotentialKind::Cubic { kappa: 0.5, lambda: 0.1 },
            nu0: 1.0,
            minimum: [0.0; 3],
        },
        ..linear_cfg([0.0; 3], 0.0)
    };
    let sys = cfg.build::<f64>().unwrap();
    let at = |d: f64| {
        let hist = TrajectoryHistory::new(0.02, Vec3::new(d, 0.0, 0.0), Vec3::zero(), Vec3::zero(), true).unwrap();
        sys.nonlinear_remainder(&hist, 0.0).unwrap()
    };
    let b0 = at(0.0);
    assert_eq!(b0.norm(), 0.0);
    let norms: Vec<f64> = [0.2, 0.1, 0.05, 0.025].iter().map(|&s| at(s).norm()).collect();
    for w in norms.windows(2) {
        let r = w[0] / w[1];
        assert!((r - 4.0).abs() < 0.4, "ratio {r}");
    }
    // harmonic potential: −∇V(q) + ν₀² q cancels
    let harm = linear_cfg([0.0; 3], 0.0).build::<f64>().unwrap();
    let q = Vec3::new(0.3, -0.2, 0.1);
    assert_eq!(-harm.potential.gradient(q) + q * harm.potential.nu0_squared, Vec3::zero());
}

#[test]
fn splitting_matches_direct_quadrature() {
    let cfg = ScenarioConfig {
        potential: PotentialSpec {
            kind: crate::model::PotentialKind::Cubic { kappa: 0.5, lambda: 0.1 },
            nu0: 1.0,
            minimum: [0.0; 3],
        },
        field: FieldSpec {
            free: FreeField::Bump { center: [1.5, 0.5, 0.0], radius: 1.0, amp_phi: 0.1, amp_pi: 0.0 },
            coulomb: CoulombPart::Minimum,
        },
        ..linear_cfg([0.3, 0.1, 0.0], 1.0)
    };
    let rec = simulate::<f64>(&cfg).unwrap();
    let sys = &rec.system;
    let orders = crate::model::QuadOrders { radial: 24, polar: 40, azimuthal: 64 };
    for t in [0.0, 1.0] {
        let red = sys.nonlinear_remainder(&rec.history, t).unwrap().particle;
        let quad = sys.nonlinear_remainder_quadrature(&rec.history, t, orders).unwrap();
        assert!((red - quad).norm() < 1e-6 * (1.0 + red.norm()), "t={t} {red:?} vs {quad:?}");
        // A X + B(X) reproduces the full right-hand side −∇V(q) + F(q)
        let lin = LinearSystem::<f64>::from_config(&cfg).unwrap();
        let k = rec.history.interpolate(t).unwrap();
        let f_plus = {
            let (a, b) = sys.solver.retarded_force(&rec.history, Vec3::zero(), t).unwrap();
            a + b + sys.solver.kirchhoff_force(Vec3::zero(), t)
        };
        let ax = -k.q * (lin.nu0_squared + lin.nu1_squared) + f_plus;
        assert!((ax + red - k.a).norm() < 1e-12 * (1.0 + k.a.norm()));
    }
}

#[test]
fn linear_energy_without_free_data_is_conserved() {
    let rec = linear_simulate::<f64>(&linear_cfg([0.3, 0.1, 0.0], 20.0)).unwrap();
    let e0 = rec.energy_at(0.0).unwrap().value;
    for t in [5.0, 12.0, 20.0] {
        let e = rec.energy_at(t).unwrap();
        assert!((e.value - e0).abs() < 1e-7 * e0, "t={t} {e:?} vs {e0}");
    }
}
