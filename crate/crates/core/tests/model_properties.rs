use mfpotts::model::{
    eos_jacobian_q3, eos_residual_general, eos_residual_q3, free_energy, free_energy_q3, kronecker_poly,
    kronecker_q3, moments_from_probabilities, probabilities_from_moments, probabilities_q3,
};
use mfpotts::{ModelSpec, MomentVector, ProbabilityVector, ThermoPoint};
use proptest::prelude::*;

/// Interior moments from barycentric weights bounded away from zero.
fn interior() -> impl Strategy<Value = MomentVector> {
    (0.05f64..1.0, 0.05f64..1.0, 0.05f64..1.0).prop_map(|(a, b, c)| {
        let s = a + b + c;
        let (p1, p2) = (a / s, b / s);
        MomentVector::new(p1 - p2, p1 + p2)
    })
}

fn thermo() -> impl Strategy<Value = ThermoPoint> {
    (-2.0f64..2.0, -2.0f64..2.0, 0.0f64..3.0).prop_map(|(x, y, t)| ThermoPoint { x, y, t })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn residual_is_gradient_of_free_energy(m in interior(), pt in thermo()) {
        let h = 1e-6;
        let f = |a: f64, b: f64| free_energy_q3(MomentVector::new(a, b), pt).unwrap();
        let d1 = (f(m.m1 + h, m.m2) - f(m.m1 - h, m.m2)) / (2.0 * h);
        let d2 = (f(m.m1, m.m2 + h) - f(m.m1, m.m2 - h)) / (2.0 * h);
        let r = eos_residual_q3(m, pt).unwrap();
        prop_assert!((r[0] - d1).abs() <= 1e-6, "{} vs {}", r[0], d1);
        prop_assert!((r[1] - d2).abs() <= 1e-6, "{} vs {}", r[1], d2);
    }

    #[test]
    fn jacobian_is_derivative_of_residual(m in interior(), pt in thermo()) {
        let h = 1e-6;
        let r = |a: f64, b: f64| eos_residual_q3(MomentVector::new(a, b), pt).unwrap();
        let j = eos_jacobian_q3(m, pt.t).unwrap();
        let (p, q) = (r(m.m1 + h, m.m2), r(m.m1 - h, m.m2));
        let (u, v) = (r(m.m1, m.m2 + h), r(m.m1, m.m2 - h));
        for i in 0..2 {
            let d1 = (p[i] - q[i]) / (2.0 * h);
            let d2 = (u[i] - v[i]) / (2.0 * h);
            prop_assert!((j[i][0] - d1).abs() <= 1e-6 * j[i][0].abs().max(1.0));
            prop_assert!((j[i][1] - d2).abs() <= 1e-6 * j[i][1].abs().max(1.0));
        }
        prop_assert_eq!(j[0][1], j[1][0]);
    }

    #[test]
    fn probabilities_round_trip(m in interior()) {
        let spec = ModelSpec::q3();
        let p = probabilities_q3(m).unwrap();
        prop_assert!((p.as_slice().iter().sum::<f64>() - 1.0).abs() < 1e-15);
        let back = moments_from_probabilities(&spec, &p).unwrap();
        prop_assert!((back[0] - m.m1).abs() < 1e-14 && (back[1] - m.m2).abs() < 1e-14);
    }

    #[test]
    fn general_levels_round_trip(a in 0.05f64..1.0, b in 0.05f64..1.0, c in 0.05f64..1.0, d in 0.05f64..1.0) {
        let spec = ModelSpec::new(vec![-1.5, -0.5, 0.5, 2.0]).unwrap();
        let s = a + b + c + d;
        let p = ProbabilityVector::new(vec![a / s, b / s, c / s, d / s]).unwrap();
        let m = moments_from_probabilities(&spec, &p).unwrap();
        let back = probabilities_from_moments(&spec, &m).unwrap();
        for (u, v) in back.as_slice().iter().zip(p.as_slice()) {
            prop_assert!((u - v).abs() < 1e-12);
        }
    }

    #[test]
    fn general_residual_matches_three_state(m in interior(), pt in thermo()) {
        let spec = ModelSpec::q3();
        let g = eos_residual_general(&spec, &[m.m1, m.m2], &[pt.x, pt.y], pt.t).unwrap();
        let r = eos_residual_q3(m, pt).unwrap();
        prop_assert!((g[0] - r[0]).abs() < 1e-12 && (g[1] - r[1]).abs() < 1e-12);
        let f = free_energy(&spec, &[m.m1, m.m2], &[pt.x, pt.y], pt.t).unwrap();
        prop_assert!((f - free_energy_q3(m, pt).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn general_residual_is_gradient(a in 0.1f64..1.0, b in 0.1f64..1.0, c in 0.1f64..1.0, d in 0.1f64..1.0,
                                    h1 in -1.0f64..1.0, h2 in -1.0f64..1.0, h3 in -1.0f64..1.0, t in 0.0f64..2.0) {
        let spec = ModelSpec::new(vec![1.0, -1.0, 0.0, 2.0]).unwrap();
        let s = a + b + c + d;
        let p = ProbabilityVector::new(vec![a / s, b / s, c / s, d / s]).unwrap();
        let m = moments_from_probabilities(&spec, &p).unwrap();
        let fields = [h1, h2, h3];
        let g = eos_residual_general(&spec, &m, &fields, t).unwrap();
        let h = 1e-6;
        for j in 0..3 {
            let (mut up, mut dn) = (m.clone(), m.clone());
            up[j] += h;
            dn[j] -= h;
            let d = (free_energy(&spec, &up, &fields, t).unwrap() - free_energy(&spec, &dn, &fields, t).unwrap()) / (2.0 * h);
            prop_assert!((g[j] - d).abs() < 1e-5, "{} vs {}", g[j], d);
        }
    }
}

#[test]
fn kronecker_delta_on_all_level_pairs() {
    let spec = ModelSpec::q3();
    for &a in &[1.0, -1.0, 0.0] {
        for &b in &[1.0, -1.0, 0.0] {
            let want = if a == b { 1.0 } else { 0.0 };
            assert!((kronecker_q3(a, b) - want).abs() < 1e-15);
            assert!((kronecker_poly(&spec, a, b).unwrap() - want).abs() < 1e-14);
        }
    }
    let spec = ModelSpec::new(vec![0.0, 1.0, 3.0, 7.0, -2.0]).unwrap();
    for &a in spec.levels() {
        for &b in spec.levels() {
            let want = if a == b { 1.0 } else { 0.0 };
            assert!((kronecker_poly(&spec, a, b).unwrap() - want).abs() < 1e-12);
        }
    }
}

#[test]
fn free_energy_at_uniform_state() {
    let pt = ThermoPoint::new(0.0, 0.0, 0.5).unwrap();
    let f = free_energy_q3(MomentVector::uniform(), pt).unwrap();
    assert!((f - (0.5 / 3.0 + 3f64.ln())).abs() < 1e-14);
}
