//! Property-based checks for geometry, detector, oracle and report invariants.

use std::f64::consts::PI;

use icsfuzz::detector::{builtin_cd, ground_truth, DefectModel};
use icsfuzz::fuzzer::OutcomeRecord;
use icsfuzz::geometry::{
    center_distance, intersection_area, iou, overlaps, penetration_depth, OrientedBox, Point2,
    EPS_AREA,
};
use icsfuzz::oracle::{check_ic, max_iou, OracleConfig, ScenarioType};
use icsfuzz::report::{bucket, success_rates, Axis, BucketScheme};
use icsfuzz::scenario::{make_seed, ControlParameters, ScenarioKind};
use icsfuzz::simulator::{closing_speed, simulate, Frame, SimConfig, Trace};
use proptest::prelude::*;

fn arb_box() -> impl Strategy<Value = OrientedBox> {
    (-3.0..3.0f64, -3.0..3.0f64, 0.1..3.0f64, 0.1..2.0f64, -PI..PI)
        .prop_map(|(x, y, hl, hw, yaw)| OrientedBox::new(Point2::new(x, y), hl, hw, yaw))
}

fn rigid(b: &OrientedBox, angle: f64, shift: Point2) -> OrientedBox {
    let (s, c) = angle.sin_cos();
    let p = b.center;
    let rotated = Point2::new(c * p.x - s * p.y, s * p.x + c * p.y);
    b.with_pose(rotated + shift, b.yaw + angle)
}

/// Frames of a synthetic trace whose boxes are drawn at random.
fn arb_trace() -> impl Strategy<Value = Trace> {
    prop::collection::vec((arb_box(), arb_box(), 0.0..5.0f64), 1..40).prop_map(|pairs| {
        let frames: Vec<Frame> = pairs
            .into_iter()
            .enumerate()
            .map(|(i, (ev, npc, closing))| Frame {
                t: i as f64 * 0.01,
                ev_box: ev,
                npc_box: npc,
                gt_overlap: overlaps(&ev, &npc),
                penetration: penetration_depth(&ev, &npc),
                closing_speed: closing,
                triggered: false,
            })
            .collect();
        let first_contact = frames.iter().position(|f| f.gt_overlap);
        Trace {
            frames,
            first_contact,
            trigger_frame: None,
        }
    })
}

fn arb_defect() -> impl Strategy<Value = DefectModel> {
    (1usize..12, 0.0..0.5f64, 0.0..3.0f64).prop_map(|(k, p, v)| DefectModel {
        sample_period: k,
        min_penetration: p,
        min_impact_speed: v,
    })
}

fn arb_params() -> impl Strategy<Value = ControlParameters> {
    (2.0..=7.0f64, 0.5..=50.0f64, -1.0..=1.0f64)
        .prop_map(|(d, v, a)| ControlParameters::from_angle(d, v, a))
}

fn arb_kind() -> impl Strategy<Value = ScenarioKind> {
    prop::sample::select(ScenarioKind::ALL.to_vec())
}

fn arb_records() -> impl Strategy<Value = Vec<OutcomeRecord>> {
    let scheme = BucketScheme::default();
    prop::collection::vec(
        (
            arb_kind(),
            arb_params(),
            prop::sample::select(ScenarioType::ALL.to_vec()),
        ),
        1..200,
    )
    .prop_map(move |rows| {
        rows.into_iter()
            .enumerate()
            .map(|(i, (kind, params, verdict))| OutcomeRecord {
                ordinal: i,
                kind,
                kind_ordinal: i,
                params,
                verdict,
                first_contact_s: None,
                elapsed_s: i as f64,
                buckets: bucket(&params, &scheme),
            })
            .collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn overlap_and_area_are_symmetric(a in arb_box(), b in arb_box()) {
        prop_assert_eq!(overlaps(&a, &b), overlaps(&b, &a));
        prop_assert!((intersection_area(&a, &b) - intersection_area(&b, &a)).abs() < 1e-9);
        prop_assert!((iou(&a, &b) - iou(&b, &a)).abs() < 1e-12);
        prop_assert!((center_distance(&a, &b) - center_distance(&b, &a)).abs() < 1e-12);
    }

    #[test]
    fn area_is_bounded(a in arb_box(), b in arb_box()) {
        let area = intersection_area(&a, &b);
        prop_assert!(area >= 0.0);
        prop_assert!(area <= a.area().min(b.area()) + 1e-9);
        let r = iou(&a, &b);
        prop_assert!((0.0..=1.0).contains(&r));
    }

    #[test]
    fn self_overlap_is_full(a in arb_box()) {
        prop_assert!((intersection_area(&a, &a) - a.area()).abs() < 1e-9 * a.area().max(1.0));
        prop_assert!((iou(&a, &a) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn rigid_motion_preserves_contact(
        a in arb_box(),
        b in arb_box(),
        angle in -PI..PI,
        dx in -50.0..50.0f64,
        dy in -50.0..50.0f64,
    ) {
        let shift = Point2::new(dx, dy);
        let (ma, mb) = (rigid(&a, angle, shift), rigid(&b, angle, shift));
        let before = intersection_area(&a, &b);
        let after = intersection_area(&ma, &mb);
        prop_assert!((before - after).abs() < 1e-7, "{before} vs {after}");
        prop_assert!((penetration_depth(&a, &b) - penetration_depth(&ma, &mb)).abs() < 1e-7);
    }

    #[test]
    fn overlap_agrees_with_area_and_depth(a in arb_box(), b in arb_box()) {
        let area = intersection_area(&a, &b);
        let depth = penetration_depth(&a, &b);
        // skip configurations within rounding of touching
        prop_assume!(depth > 1e-6 || !overlaps(&a, &b));
        prop_assume!((area - EPS_AREA).abs() > 1e-7);
        prop_assert_eq!(overlaps(&a, &b), area > EPS_AREA);
        prop_assert_eq!(overlaps(&a, &b), depth > 0.0);
    }

    #[test]
    fn detector_never_reports_phantoms(trace in arb_trace(), defect in arb_defect()) {
        if builtin_cd(&trace, &defect) {
            prop_assert!(ground_truth(&trace).is_some());
        }
    }

    #[test]
    fn perfect_detector_matches_ground_truth(trace in arb_trace()) {
        prop_assert_eq!(builtin_cd(&trace, &DefectModel::perfect()), ground_truth(&trace).is_some());
    }

    #[test]
    fn weaker_defect_keeps_detections(
        trace in arb_trace(),
        defect in arb_defect(),
        divisor in 1usize..6,
        dp in 0.0..1.0f64,
        dv in 0.0..1.0f64,
    ) {
        // sampling every k/m-th frame only adds frames when m divides k
        let k = defect.sample_period;
        let weaker_k = if k % divisor == 0 { k / divisor } else { k };
        let weaker = DefectModel {
            sample_period: weaker_k,
            min_penetration: defect.min_penetration * dp,
            min_impact_speed: defect.min_impact_speed * dv,
        };
        if builtin_cd(&trace, &defect) {
            prop_assert!(builtin_cd(&trace, &weaker));
        }
    }

    #[test]
    fn verdict_is_one_of_four(trace in arb_trace(), defect in arb_defect(), t in 0.0..0.99f64) {
        let v = check_ic(&trace, &defect, &OracleConfig { t_bbox: t });
        let matches = ScenarioType::ALL.iter().filter(|x| **x == v).count();
        prop_assert_eq!(matches, 1);
        let cond1 = if t <= 0.0 { ground_truth(&trace).is_some() } else { max_iou(&trace) >= t };
        prop_assert_eq!(v, ScenarioType::from_conditions(cond1, builtin_cd(&trace, &defect)));
    }

    #[test]
    fn raising_threshold_only_removes_collisions(
        trace in arb_trace(),
        defect in arb_defect(),
        lo in 0.0..0.5f64,
        gap in 0.0..0.49f64,
    ) {
        let hi = lo + gap;
        let at_lo = check_ic(&trace, &defect, &OracleConfig { t_bbox: lo });
        let at_hi = check_ic(&trace, &defect, &OracleConfig { t_bbox: hi });
        if at_hi.is_collision() {
            prop_assert!(at_lo.is_collision());
        }
        if at_lo == ScenarioType::NC {
            prop_assert_eq!(at_hi, ScenarioType::NC);
        }
    }

    #[test]
    fn report_conserves_counts(records in arb_records()) {
        let report = success_rates(&records, &BucketScheme::default()).unwrap();
        prop_assert_eq!(report.total_executions, records.len());
        for table in &report.axes {
            let sum: usize = table.buckets.iter().map(|(_, s)| s.executions).sum();
            prop_assert_eq!(sum, records.len(), "{:?}", table.axis);
            let ics: usize = table.buckets.iter().map(|(_, s)| s.ics).sum();
            prop_assert_eq!(ics, records.iter().filter(|r| r.verdict == ScenarioType::IC).count());
        }
        for m in &report.cross {
            let rows = report.axis(m.rows).unwrap();
            let cols = report.axis(m.cols).unwrap();
            for (i, label) in m.row_labels.iter().enumerate() {
                let total: usize = m.cells[i].iter().map(|c| c.executions).sum();
                prop_assert_eq!(total, rows.get(label).unwrap().executions);
            }
            for (j, label) in m.col_labels.iter().enumerate() {
                let total: usize = m.cells.iter().map(|r| r[j].executions).sum();
                prop_assert_eq!(total, cols.get(label).unwrap().executions);
            }
        }
        let summed: usize = report.summary.iter().map(|k| k.executions).sum();
        prop_assert_eq!(summed, records.len());
        prop_assert!(report.axis(Axis::Angle).is_some());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn simulated_frames_keep_their_invariants(kind in arb_kind(), params in arb_params()) {
        let (spec, _) = make_seed(kind);
        let trace = simulate(&spec, &params, &SimConfig::default()).unwrap();
        for f in trace.frames.iter().step_by(7) {
            prop_assert_eq!(f.gt_overlap, overlaps(&f.ev_box, &f.npc_box));
            prop_assert_eq!(f.penetration, penetration_depth(&f.ev_box, &f.npc_box));
            prop_assert!(f.closing_speed >= 0.0);
        }
        prop_assert_eq!(trace.first_contact, trace.frames.iter().position(|f| f.gt_overlap));
        let again = simulate(&spec, &params, &SimConfig::default()).unwrap();
        prop_assert_eq!(trace, again);
    }

    #[test]
    fn larger_trigger_distance_never_fires_later(kind in arb_kind(), params in arb_params(), extra in 0.0..3.0f64) {
        prop_assume!(!matches!(kind, ScenarioKind::InC | ScenarioKind::PCF));
        let (spec, _) = make_seed(kind);
        let cfg = SimConfig::default();
        let near = simulate(&spec, &params, &cfg).unwrap();
        let far_params = ControlParameters { d: (params.d + extra).min(7.0), ..params };
        let far = simulate(&spec, &far_params, &cfg).unwrap();
        if let (Some(n), Some(f)) = (near.trigger_frame, far.trigger_frame) {
            prop_assert!(f <= n);
        }
        if near.trigger_frame.is_some() {
            prop_assert!(far.trigger_frame.is_some());
        }
    }
}

#[test]
fn closing_speed_is_zero_when_receding() {
    let v = closing_speed(
        Point2::new(0.0, 0.0),
        Point2::new(5.0, 0.0),
        Point2::new(-1.0, 0.0),
        Point2::new(0.0, 0.0),
    );
    assert_eq!(v, 0.0);
}
