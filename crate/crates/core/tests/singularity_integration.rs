use mfpotts::model::{eos_jacobian_q3, eos_residual_q3};
use mfpotts::numeric::linspace;
use mfpotts::singularity::{
    critical_time_extrema, critical_time_lines, critical_time_loop, cusp_event_timeline, cusp_locus,
    cusp_point, cusp_residuals, fields_from_eos, fold_residual, locus_points_at_y, loop_auxiliaries, map_cusp_to_fields,
    quartic_residual, sample_all_loci, CuspEventKind, LocusId,
};
use mfpotts::{MomentVector, PottsError, ThermoPoint};
use proptest::prelude::*;

/// Independent fold and tangency values from central differences of the
/// equations of state.
fn numeric_cusp_conditions(m: MomentVector, t: f64) -> [f64; 2] {
    let h = 1e-6;
    let det = |a: f64, b: f64| {
        let j = eos_jacobian_q3(MomentVector::new(a, b), t).unwrap();
        j[0][0] * j[1][1] - j[0][1] * j[1][0]
    };
    let j = eos_jacobian_q3(m, t).unwrap();
    let g1 = (det(m.m1 + h, m.m2) - det(m.m1 - h, m.m2)) / (2.0 * h);
    let g2 = (det(m.m1, m.m2 + h) - det(m.m1, m.m2 - h)) / (2.0 * h);
    [det(m.m1, m.m2), j[0][1] * g1 - j[0][0] * g2]
}

fn locus_m2() -> impl Strategy<Value = (LocusId, f64)> {
    prop_oneof![
        (0.52f64..0.95).prop_map(|m| (LocusId::LineI, m)),
        (0.52f64..0.95).prop_map(|m| (LocusId::LineII, m)),
        (0.5f64..=7.0 / 9.0).prop_map(|m| (LocusId::LoopPlus, m)),
        (0.5f64..=7.0 / 9.0).prop_map(|m| (LocusId::LoopMinus, m)),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn locus_points_are_cusps((locus, m2) in locus_m2()) {
        let c = cusp_point(locus, m2).unwrap();
        let r = cusp_residuals(c.m, c.t_c).unwrap();
        prop_assert!(r[0].abs() <= 1e-9 && r[1].abs() <= 1e-9, "{:?} {:?}", c, r);
        let n = numeric_cusp_conditions(c.m, c.t_c);
        let scale = 1.0 + c.t_c.powi(2);
        prop_assert!(n[0].abs() <= 1e-6 * scale && n[1].abs() <= 1e-4 * scale, "{:?}", n);
    }

    #[test]
    fn field_images_solve_the_equations_of_state((locus, m2) in locus_m2()) {
        let c = cusp_point(locus, m2).unwrap();
        let (x, y) = fields_from_eos(c.m, c.t_c).unwrap();
        prop_assert!((x - c.x).abs() <= 1e-9 && (y - c.y).abs() <= 1e-9);
        let r = eos_residual_q3(c.m, ThermoPoint::new(c.x, c.y, c.t_c).unwrap()).unwrap();
        prop_assert!(r[0].abs() <= 1e-9 && r[1].abs() <= 1e-9);
    }

    #[test]
    fn loop_points_satisfy_the_quartic(m2 in 0.5f64..=7.0 / 9.0) {
        let (m1, _) = cusp_locus(m2, LocusId::LoopPlus).unwrap();
        prop_assert!(quartic_residual(m1, m2).abs() <= 1e-12);
        prop_assert!(quartic_residual(-m1, m2).abs() <= 1e-12);
    }

    #[test]
    fn loop_times_stay_between_extremes(m2 in 0.5f64..=7.0 / 9.0) {
        let t = critical_time_loop(m2).unwrap();
        prop_assert!(t >= 9.0 / 7.0 - 1e-12 && t <= 4.0 / 3.0 + 1e-12);
    }

    #[test]
    fn line_times_start_at_one(m2 in 0.5f64..0.999) {
        prop_assert!(critical_time_lines(m2) >= 1.0);
    }
}

#[test]
fn time_extrema_match_closed_forms() {
    let e = critical_time_extrema();
    assert!((e.line_min.t_c - 1.0).abs() <= 1e-9);
    assert!((e.line_min.m2 - 0.5).abs() <= 1e-9);
    assert_eq!(e.loop_min.len(), 2);
    assert_eq!(e.loop_max.len(), 2);
    for (ext, m2) in e.loop_min.iter().zip([11.0 / 18.0, 7.0 / 9.0]) {
        assert!((ext.t_c - 9.0 / 7.0).abs() <= 1e-9, "{ext:?}");
        assert!((ext.m2 - m2).abs() <= 1e-9, "{ext:?}");
    }
    for (ext, m2) in e.loop_max.iter().zip([0.5, 0.75]) {
        assert!((ext.t_c - 4.0 / 3.0).abs() <= 1e-9, "{ext:?}");
        assert!((ext.m2 - m2).abs() <= 1e-9, "{ext:?}");
    }
}

#[test]
fn loop_meets_lines_at_shared_points() {
    for (m2, line) in [(11.0 / 18.0, LocusId::LineII), (0.75, LocusId::LineI)] {
        let (a, _) = cusp_locus(m2, LocusId::LoopPlus).unwrap();
        let (b, _) = cusp_locus(m2, line).unwrap();
        assert!((a - b).abs() < 1e-12, "{a} vs {b}");
    }
    let (m1, _) = cusp_locus(11.0 / 18.0, LocusId::LoopMinus).unwrap();
    assert!((m1 + 1.0 / 6.0).abs() < 1e-12);
}

#[test]
fn field_map_divergence_is_reported() {
    assert!(matches!(map_cusp_to_fields(LocusId::LineII, 0.5), Err(PottsError::InfiniteField { .. })));
    let (x, y) = map_cusp_to_fields(LocusId::LoopPlus, 0.5).unwrap();
    assert!(x.abs() < 1e-12 && y.is_finite());
    assert!(matches!(loop_auxiliaries(0.8), Err(PottsError::LocusDomain { .. })));
}

#[test]
fn line_image_peaks_at_zero() {
    // y on the line images is largest at m2 = 2/3 where it vanishes
    let peak = cusp_point(LocusId::LineI, 2.0 / 3.0).unwrap();
    assert!(peak.y.abs() < 1e-14);
    for m2 in linspace(0.51, 0.95, 45) {
        assert!(cusp_point(LocusId::LineI, m2).unwrap().y <= 1e-14);
    }
    // Jacobian vanishes identically there at t = 3/2
    let j = eos_jacobian_q3(MomentVector::uniform(), 1.5).unwrap();
    assert!(j.iter().flatten().all(|v| v.abs() < 1e-12));
}

#[test]
fn timeline_is_canonical() {
    let events = cusp_event_timeline();
    assert_eq!(events[0].kind, CuspEventKind::Creation);
    assert_eq!(events[0].time, 1.0);
    let last = events.last().unwrap();
    assert_eq!(last.kind, CuspEventKind::Annihilation);
    assert!((last.time - 4.0 / 3.0).abs() < 1e-12);
    let kinds_at = |t: f64| -> Vec<CuspEventKind> {
        events.iter().filter(|e| (e.time - t).abs() < 1e-12).map(|e| e.kind).collect()
    };
    assert!(kinds_at(9.0 / 7.0).contains(&CuspEventKind::Creation));
    assert!(kinds_at(9.0 / 7.0).contains(&CuspEventKind::Split));
    assert!(kinds_at(9.0 / 7.0).contains(&CuspEventKind::Collision));
    assert_eq!(kinds_at(4.0 / 3.0), vec![CuspEventKind::Annihilation; 2]);
    for e in &events {
        assert!(e.residual <= 1e-8, "{e:?}");
        for m in &e.locations {
            if m.min_probability() > 1e-3 {
                let r = cusp_residuals(*m, e.time).unwrap();
                assert!(r[0].abs() <= 1e-8 && r[1].abs() <= 1e-8, "{e:?}");
            }
        }
    }
}

#[test]
fn sampled_loci_pass_self_check() {
    let rows = sample_all_loci(400).unwrap();
    let mut reasons = 0;
    for r in &rows {
        match r.cusp_residual {
            Some(v) => assert!(v <= 1e-8, "{r:?}"),
            None => {
                reasons += 1;
                assert!(r.fields.is_none() && r.reason.is_some());
            }
        }
        assert!(fold_residual(r.m, r.t_c).map_or(true, |j| j.abs() <= 1e-8));
    }
    assert_eq!(reasons, 2);
}

#[test]
fn inverting_the_field_image() {
    let y = -0.0202147;
    let pts = locus_points_at_y(LocusId::LoopPlus, y, 2000).unwrap();
    assert_eq!(pts.len(), 1);
    assert!((pts[0].y - y).abs() < 1e-12);
    assert!((pts[0].t_c - 1.3263).abs() < 1e-3, "{:?}", pts[0]);
    // every line root maps back onto the same y
    for c in locus_points_at_y(LocusId::LineI, y, 2000).unwrap() {
        assert!((c.y - y).abs() < 1e-12 && (c.x - y).abs() < 1e-12);
    }
    assert!(locus_points_at_y(LocusId::LoopPlus, y, 1).is_err());
}
