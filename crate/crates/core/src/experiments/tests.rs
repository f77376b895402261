use std::f64::consts::PI;

use serde_json::json;

use super::*;
use crate::error::Error;

fn quick() -> Overrides {
    Overrides {
        samples: Some(200),
        t_max: None,
    }
}

#[test]
fn catalog_order_and_labels() {
    let names: Vec<_> = catalog().iter().map(|e| e.name).collect();
    assert_eq!(names.len(), 13);
    assert_eq!(names[0], "oracle-calibration");
    assert_eq!(names[12], "exit-tail");
    let labels: Vec<_> = catalog().iter().map(|e| e.label).collect();
    assert!(labels.contains(&"dashed-half-plane (Thm 3.1)"));
    assert!(labels.contains(&"staircase-budget (Thm 5.1)"));
    assert!(labels.contains(&"growth-ratio (Prop 5.2)"));
    for e in catalog() {
        assert!(e.label.starts_with(e.name));
        assert!(default_params(e.name).is_ok(), "{}", e.name);
    }
}

#[test]
fn unknown_experiment_lists_names() {
    let err = run_experiment("nope", serde_json::Value::Null, &quick(), &StudyContext::new(1)).unwrap_err();
    match err {
        Error::ExperimentUnknown { name, available } => {
            assert_eq!(name, "nope");
            assert_eq!(available.len(), 13);
        }
        e => panic!("unexpected {e:?}"),
    }
}

#[test]
fn overlapping_segments_rejected_with_location() {
    let p = json!({ "grid": [[2.0, 1.5]] });
    let err = run_experiment("dashed-half-plane", p, &quick(), &StudyContext::new(1)).unwrap_err();
    match err {
        Error::ConfigInvalid { location, .. } => assert_eq!(location.as_deref(), Some("params.grid[0]")),
        e => panic!("unexpected {e:?}"),
    }
}

#[test]
fn unknown_field_rejected() {
    let err = run_experiment("exit-tail", json!({ "bogus": 1 }), &quick(), &StudyContext::new(1)).unwrap_err();
    assert!(matches!(err, Error::ConfigInvalid { .. }));
}

#[test]
fn zero_samples_rejected() {
    let ov = Overrides {
        samples: Some(0),
        t_max: None,
    };
    assert!(run_experiment("exit-tail", serde_json::Value::Null, &ov, &StudyContext::new(1)).is_err());
}

#[test]
fn report_is_deterministic() {
    let p = json!({ "t_max": 1e4 });
    let ctx = StudyContext::new(7);
    let a = run_experiment("exit-tail", p.clone(), &quick(), &ctx).unwrap();
    let b = run_experiment("exit-tail", p, &quick(), &ctx).unwrap();
    assert_eq!(a.to_json(), b.to_json());
    assert_eq!(a.metrics_hash(), b.metrics_hash());
    let c = run_experiment("exit-tail", json!({ "t_max": 1e4 }), &quick(), &StudyContext::new(8)).unwrap();
    assert_ne!(a.metrics_hash(), c.metrics_hash());
    assert_eq!(a.schema_version, REPORT_SCHEMA_VERSION);
}

#[test]
fn angle_and_budget_schedules() {
    assert!((angle_schedule(1) - 3.0 * PI / 16.0).abs() < 1e-15);
    assert!((angle_schedule(2) - 7.0 * PI / 32.0).abs() < 1e-15);
    let s = BudgetSchedule::new(0.8, 6).unwrap();
    assert!((s.budget(1) - 1.2).abs() < 1e-12);
    assert!(s.budgets.windows(2).all(|w| w[1] > w[0]));
    assert!(s.budgets.iter().all(|&b| b < 1.6));
    assert!(BudgetSchedule::new(-1.0, 3).is_err());
}

#[test]
fn dynkin_function_vanishes_on_rays_and_has_laplacian_minus_two() {
    let a: f64 = 0.6;
    let on = crate::geometry::Point::new(2.0 * a.cos(), 2.0 * a.sin());
    assert!(dynkin_wedge(a, on).abs() < 1e-12);
    let h = 1e-3;
    let z = crate::geometry::Point::new(1.3, 0.2);
    let f = |dx: f64, dy: f64| dynkin_wedge(a, crate::geometry::Point::new(z.x + dx, z.y + dy));
    let lap = (f(h, 0.0) + f(-h, 0.0) + f(0.0, h) + f(0.0, -h) - 4.0 * f(0.0, 0.0)) / (h * h);
    assert!((lap + 2.0).abs() < 1e-6, "{lap}");
}

#[test]
fn given_radii_must_increase() {
    let p = json!({ "plan": { "source": "radii", "radii": [5.0, 3.0, 10.0] } });
    let err = run_experiment("critical-moment", p, &quick(), &StudyContext::new(1)).unwrap_err();
    assert!(matches!(err, Error::ConfigInvalid { .. }));
}

#[test]
fn non_finite_metric_goes_to_notes() {
    let mut rep = Report::new("x", &StudyContext::new(1), &json!({}));
    rep.metric("nan", f64::NAN);
    assert!(rep.metrics.get("nan").is_none());
    assert!(!rep.notes.is_empty());
}
