use std::sync::Arc;

use super::*;
use crate::history::{Kinematics, TrajectoryHistory};
use crate::quadrature::adaptive;
use proptest::prelude::*;

fn bump() -> Arc<ChargeDensity<f64>> {
    Arc::new(ChargeDensity::bump(1.0, 1.0))
}

fn solver(data: FieldInitialData) -> FieldSolver<f64> {
    FieldSolver::new(bump(), data, FieldSettings::default())
}

fn constant(q: Vec3<f64>, h: f64, n: usize) -> TrajectoryHistory<f64> {
    TrajectoryHistory::from_fn(h, n, |_| Kinematics { q, v: Vec3::zero(), a: Vec3::zero() }).unwrap()
}

fn wobble(amp: f64, freq: f64, h: f64, n: usize) -> TrajectoryHistory<f64> {
    TrajectoryHistory::from_fn(h, n, |t: f64| Kinematics {
        q: Vec3::new(amp * (freq * t).sin(), 0.0, 0.0),
        v: Vec3::new(amp * freq * (freq * t).cos(), 0.0, 0.0),
        a: Vec3::new(-amp * freq * freq * (freq * t).sin(), 0.0, 0.0),
    })
    .unwrap()
}

fn circle(rad: f64, freq: f64, h: f64, n: usize) -> TrajectoryHistory<f64> {
    TrajectoryHistory::from_fn(h, n, |t: f64| {
        let (s, c) = (freq * t).sin_cos();
        Kinematics {
            q: Vec3::new(rad * c, rad * s, 0.0),
            v: Vec3::new(-rad * freq * s, rad * freq * c, 0.0),
            a: Vec3::new(-rad * freq * freq * c, -rad * freq * freq * s, 0.0),
        }
    })
    .unwrap()
}

#[test]
fn retarded_field_vanishes_at_time_zero() {
    let s = solver(FieldInitialData::zero());
    let h = wobble(0.3, 1.0, 0.01, 100);
    let v = s.lw_field(&h, Vec3::new(0.2, 0.1, 0.0), 0.0).unwrap();
    assert_eq!(v.max_abs(), 0.0);
    assert!(s.lw_field(&h, Vec3::zero(), 1.5).is_err());
}

#[test]
fn retarded_field_saturates_to_coulomb() {
    let s = solver(FieldInitialData::zero());
    let q0 = Vec3::new(0.3, -0.2, 0.1);
    let h = constant(q0, 0.02, 300);
    for x in [Vec3::new(0.5, 0.4, -0.2), Vec3::new(2.0, 1.0, 0.0), q0] {
        let t = (x).norm() + 1.0 + 0.6;
        let v = s.lw_field(&h, x, t).unwrap();
        let rho = bump();
        assert!((v.phi - rho.coulomb_field(q0, x)).abs() < 1e-10, "{} {}", v.phi, rho.coulomb_field(q0, x));
        assert!(v.pi.abs() < 1e-10);
        assert!((v.grad_phi - rho.coulomb_gradient(q0, x)).max_abs() < 1e-10);
    }
}

#[test]
fn retarded_field_matches_light_cone_quadrature() {
    let s = solver(FieldInitialData::zero());
    let h = wobble(0.3, 1.0, 0.01, 1000);
    for (x, t) in [(Vec3::new(2.0, 0.0, 0.0), 10.0), (Vec3::new(0.3, 0.5, -0.2), 1.3), (Vec3::new(-1.0, 2.0, 0.5), 4.0)] {
        let a = s.lw_field(&h, x, t).unwrap();
        let b = s.lw_field_ball(&h, x, t, 16, 64, 16).unwrap();
        let scale = a.max_abs();
        assert!(a.add(b.scale(-1.0)).max_abs() < 1e-5 * scale, "{a:?} {b:?}");
    }
}

#[test]
fn retarded_field_matches_cartesian_midpoint_oracle() {
    let s = solver(FieldInitialData::zero());
    let h = wobble(0.3, 1.0, 0.01, 1000);
    let rho = bump();
    let (x, t) = (Vec3::new(2.0, 0.0, 0.0), 10.0);
    let n = 200;
    let (lo, hi) = (-1.3, 1.3);
    let dx = (hi - lo) / n as f64;
    let mut phi = 0.0;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let y = Vec3::new(lo + (i as f64 + 0.5) * dx, lo + (j as f64 + 0.5) * dx, lo + (k as f64 + 0.5) * dx);
                let d = (x - y).norm();
                if d >= t {
                    continue;
                }
                let q = h.position(t - d);
                phi -= rho.rho(y - q) / (4.0 * std::f64::consts::PI * d) * dx * dx * dx;
            }
        }
    }
    let v = s.lw_field(&h, x, t).unwrap();
    assert!((v.phi - phi).abs() < 1e-3 * phi.abs(), "{} {}", v.phi, phi);
}

#[test]
fn kirchhoff_examples() {
    let s = solver(FieldInitialData::zero());
    assert_eq!(s.kirchhoff_field(Vec3::new(0.1, 0.2, 0.3), 2.0).unwrap().max_abs(), 0.0);
    let c = 0.7;
    let p = solver(FieldInitialData::plateau([0.0; 3], 2.0, 3.0, 0.0, c));
    for &t in &[0.3, 1.0, 1.9] {
        let v = p.kirchhoff_field(Vec3::zero(), t).unwrap();
        assert!((v.phi - c * t).abs() < 1e-13);
        assert!((v.pi - c).abs() < 1e-13);
        assert!(v.grad_phi.max_abs() < 1e-13);
    }
}

#[test]
fn strong_huygens() {
    let d = FieldInitialData::bump([0.5, 0.0, 0.0], 1.5, 1.0, -0.4);
    let s = solver(d);
    for x in [Vec3::new(0.0, 0.0, 0.0), Vec3::new(3.0, -1.0, 0.5)] {
        let t = (x - Vec3::new(0.5, 0.0, 0.0)).norm() + 1.5 + 1e-3;
        assert!(s.kirchhoff_field(x, t).unwrap().max_abs() < 1e-10);
        assert!(s.kirchhoff_field(x, t + 10.0).unwrap().max_abs() < 1e-10);
    }
}

#[test]
fn kirchhoff_matches_radial_exact_solution() {
    // π₀ = g(|x|), φ₀ = 0 solves to u(r,t) = (1/2r)∫_{|r−t|}^{r+t} s g(s) ds
    let d = FieldInitialData::bump([0.0; 3], 1.5, 0.0, 1.0);
    let s = solver(d.clone());
    let g = |r: f64| Shape::Bump { radius: 1.5 }.eval(r)[0];
    for &(r, t) in &[(0.4, 0.5), (1.0, 1.2), (2.0, 1.0), (0.2, 1.4)] {
        let exact = adaptive(|u| u * g(u), (r - t as f64).abs(), r + t, 1e-14) / (2.0 * r);
        let v = s.kirchhoff_field(Vec3::new(0.0, r, 0.0), t).unwrap();
        assert!((v.phi - exact).abs() < 1e-9, "{r} {t}: {} {exact}", v.phi);
    }
}

#[test]
fn kirchhoff_time_and_space_derivatives_consistent() {
    let d = FieldInitialData::bump([0.3, 0.0, 0.0], 1.5, 0.8, 0.0)
        .scaled(1.0)
        .with_coulomb([0.0, 0.2, 0.0]);
    let mut d = d;
    d.pi.push(Component { center: [-0.2, 0.1, 0.0], amplitude: 0.5, shape: Shape::Algebraic { scale: 1.0, sigma: 3.0 } });
    let s = solver(d);
    let x = Vec3::new(0.4, -0.5, 0.3);
    let t = 0.9;
    let e = 1e-5;
    let v = s.kirchhoff_field(x, t).unwrap();
    let dt = (s.kirchhoff_field(x, t + e).unwrap().phi - s.kirchhoff_field(x, t - e).unwrap().phi) / (2.0 * e);
    assert!((v.pi - dt).abs() < 1e-7, "{} {dt}", v.pi);
    for i in 0..3 {
        let dx = Vec3::unit(i) * e;
        let fd = (s.kirchhoff_field(x + dx, t).unwrap().phi - s.kirchhoff_field(x - dx, t).unwrap().phi) / (2.0 * e);
        assert!((v.grad_phi[i] - fd).abs() < 1e-7);
    }
    let zero = s.kirchhoff_field(x, 0.0).unwrap();
    let small = s.kirchhoff_field(x, 1e-6).unwrap();
    assert!((zero.phi - small.phi).abs() < 1e-5);
}

#[test]
fn matched_start_with_resting_particle_is_stationary() {
    let c = Vec3::new(0.2, -0.1, 0.0);
    let s = solver(FieldInitialData::matched([0.2, -0.1, 0.0]));
    let h = constant(c, 0.02, 200);
    let rho = bump();
    for &t in &[0.0, 0.5, 1.7, 3.9] {
        for x in [Vec3::new(0.1, 0.3, 0.2), Vec3::new(1.4, 0.0, -0.5), c] {
            let f = s.field_eval(&h, x, t).unwrap();
            assert!((f.phi - rho.coulomb_field(c, x)).abs() < 1e-10, "t={t}");
            assert!(f.pi.abs() < 1e-10);
            assert!((f.grad_phi - rho.coulomb_gradient(c, x)).max_abs() < 1e-10);
            assert!((f.phi - f.retarded.phi - f.kirchhoff.phi).abs() < 1e-15);
        }
    }
}

#[test]
fn field_parts_and_linearity() {
    let d = FieldInitialData::bump([0.0, 0.5, 0.0], 2.0, 0.3, 0.2);
    let s1 = solver(d.clone());
    let s2 = solver(d.scaled(2.0));
    let h = wobble(0.3, 1.0, 0.02, 200);
    let x = Vec3::new(0.5, 0.5, 0.1);
    let a = s1.field_eval(&h, x, 2.0).unwrap();
    let b = s2.field_eval(&h, x, 2.0).unwrap();
    assert_eq!(b.kirchhoff, a.kirchhoff.scale(2.0));
    assert_eq!(a.retarded, b.retarded);
    let z = solver(FieldInitialData::zero()).field_eval(&h, x, 2.0).unwrap();
    assert_eq!(z.total(), z.retarded);
}

#[test]
fn theta_examples() {
    assert_eq!(theta_threshold(0.5, 0.01).unwrap(), 0.0);
    assert!((theta_threshold(2.0f64, 0.01).unwrap() - (0.01 + 3f64.sqrt() / 2.0)).abs() < 1e-15);
    assert!((theta_threshold(2.0f64, 0.01).unwrap() - 0.87603).abs() < 1e-5);
    assert!((theta_threshold(1.0f64, 0.01).unwrap() - 0.01).abs() < 1e-15);
    assert!(theta_threshold(2.0, 0.2).is_err());
    assert!(theta_threshold(0.5, 0.0).is_err());
}

#[test]
fn farfield_vanishes_without_radiation() {
    let s = solver(FieldInitialData::zero());
    let st = constant(Vec3::new(0.1, 0.0, 0.0), 0.02, 500);
    let w = Vec3::new(0.3, 0.4, 0.5).normalized();
    assert_eq!(s.farfield_amplitude(&st, w, 5.0).unwrap(), 0.0);
    let un = TrajectoryHistory::from_fn(0.02, 500, |t: f64| Kinematics {
        q: Vec3::new(0.4 * (t - 5.0), 0.1 * (t - 5.0), 0.0),
        v: Vec3::new(0.4, 0.1, 0.0),
        a: Vec3::zero(),
    })
    .unwrap();
    let s2 = FieldSolver::new(bump(), FieldInitialData::zero(), FieldSettings::default());
    // window must stay inside the record
    let v = s2.farfield_amplitude(&un, w, 5.0);
    assert!(v.is_err() || v.unwrap().abs() < 1e-6);
    let c = s2.farfield_amplitude_cone(&un, Vec3::unit(2), 5.0, 0.1);
    assert!(c.is_err() || c.unwrap().value == 0.0);
    let circ = circle(0.3, 1.0, 0.02, 1000);
    for w in [Vec3::unit(2), -Vec3::unit(2)] {
        assert!(s.farfield_amplitude(&circ, w, 10.0).unwrap().abs() < 1e-14);
    }
}

#[test]
fn uniform_motion_inside_window() {
    let s = solver(FieldInitialData::zero());
    let un = TrajectoryHistory::from_fn(0.02, 1000, |t: f64| Kinematics {
        q: Vec3::new(0.04 * (t - 10.0), 0.01 * (t - 10.0), 0.0),
        v: Vec3::new(0.04, 0.01, 0.0),
        a: Vec3::zero(),
    })
    .unwrap();
    let w = Vec3::new(0.6, 0.0, 0.8);
    assert!(s.farfield_amplitude(&un, w, 10.0).unwrap().abs() < 1e-6);
    assert_eq!(s.farfield_amplitude_cone(&un, w, 10.0, 0.1).unwrap().value, 0.0);
}

#[test]
fn farfield_routes_agree() {
    let s = solver(FieldInitialData::zero());
    let circ = circle(0.3, 1.0, 0.02, 1000);
    for w in [Vec3::new(1.0, 0.0, 0.0), Vec3::new(0.3, -0.4, 0.7).normalized(), Vec3::new(0.0, 0.6, 0.8)] {
        for &t in &[6.0, 9.5, 13.0] {
            let a = s.farfield_amplitude(&circ, w, t).unwrap();
            let b = s.farfield_amplitude_ball(&circ, w, t, 32, 16).unwrap();
            let c = s.farfield_amplitude_cone(&circ, w, t, 0.1).unwrap().value;
            let scale = a.abs().max(1e-8);
            assert!((a - b).abs() < 1e-8 * scale.max(1.0), "{a} {b}");
            assert!((a - c).abs() < 1e-5 * scale.max(1e-3), "{a} {c}");
        }
    }
}

#[test]
fn farfield_is_the_wave_zone_limit() {
    let s = solver(FieldInitialData::zero());
    let circ = circle(0.3, 1.0, 0.02, 11000);
    let w = Vec3::new(0.8, 0.0, 0.6);
    let ts: Vec<f64> = (0..8).map(|i| 6.0 + 0.75 * i as f64).collect();
    let far: Vec<f64> = ts.iter().map(|&t| s.farfield_amplitude(&circ, w, t).unwrap()).collect();
    let scale = far.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let err = |r: f64| {
        ts.iter().zip(&far).map(|(&t, f)| (r * s.lw_field(&circ, w * r, r + t).unwrap().pi - f).abs()).fold(0.0, f64::max)
    };
    let (e1, e2) = (err(100.0), err(200.0));
    assert!(e1 < 0.05 * scale, "{e1} {scale}");
    assert!((e1 / e2 - 2.0).abs() < 0.2, "{e1} {e2}");
}

#[test]
fn superluminal_cone() {
    let s = solver(FieldInitialData::zero());
    let h = wobble(0.5, 3.0, 0.01, 2000);
    assert!(h.speed_bound() >= 1.5 - 1e-9);
    let w = Vec3::new((1.0 - 0.95f64 * 0.95).sqrt(), 0.0, 0.95);
    let c = s.farfield_amplitude_cone(&h, w, 10.0, 0.01).unwrap();
    assert!(c.value.is_finite() && c.min_denominator > 0.0);
    assert!(c.theta > 0.75);
    let g = s.farfield_amplitude(&h, w, 10.0).unwrap();
    assert!((g - c.value).abs() < 1e-3 * g.abs().max(1e-3), "{g} {}", c.value);
    let bad = Vec3::new((1.0 - 0.5f64 * 0.5).sqrt(), 0.0, 0.5);
    assert!(matches!(s.farfield_amplitude_cone(&h, bad, 10.0, 0.01), Err(Error::OutsideCone { .. })));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]
    #[test]
    fn huygens_outside_light_shell(x in -4.0f64..4.0, y in -4.0f64..4.0, z in -4.0f64..4.0, extra in 0.0f64..5.0) {
        let s = solver(FieldInitialData::bump([0.0, 0.0, 0.0], 1.0, 0.5, 0.5));
        let p = Vec3::new(x, y, z);
        let t = p.norm() + 1.0 + extra + 1e-9;
        prop_assert!(s.kirchhoff_field(p, t).unwrap().max_abs() < 1e-10);
    }
}

#[test]
fn quadrature_refinement_is_stable() {
    let d = FieldInitialData::bump([0.2, 0.0, 0.0], 1.5, 0.4, -0.3);
    let coarse = solver(d.clone());
    let fine = FieldSolver::new(bump(), d, FieldSettings::default().doubled());
    let h = wobble(0.3, 1.0, 0.01, 1000);
    for (x, t) in [(Vec3::new(-1.0, 2.0, 0.5), 4.0), (Vec3::new(0.3, 0.1, 0.0), 1.1), (Vec3::new(2.0, 0.0, 0.0), 9.0)] {
        let a = coarse.field_eval(&h, x, t).unwrap().total();
        let b = fine.field_eval(&h, x, t).unwrap().total();
        assert!(a.add(b.scale(-1.0)).max_abs() < 1e-9, "{a:?} {b:?}");
    }
    let w = Vec3::new(0.0, 0.6, 0.8);
    let a = coarse.farfield_amplitude(&h, w, 5.0).unwrap();
    let b = fine.farfield_amplitude(&h, w, 5.0).unwrap();
    assert!((a - b).abs() < 1e-12);
}
