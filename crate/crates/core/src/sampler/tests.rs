use std::f64::consts::{FRAC_PI_2, PI};

use super::*;

fn cfg() -> SamplerConfig {
    SamplerConfig {
        t_max: 50.0,
        seed: 11,
        ..SamplerConfig::default()
    }
}

#[test]
fn same_index_same_sample() {
    let d = Domain::HalfPlane;
    let a = Point::new(0.0, 1.0);
    let x = sample_exit(&d, a, &cfg(), 5).unwrap();
    let y = sample_exit(&d, a, &cfg(), 5).unwrap();
    let z = sample_exit(&d, a, &cfg(), 6).unwrap();
    assert_eq!(x, y);
    assert_ne!(x, z);
}

#[test]
fn samples_respect_their_invariants() {
    let d = Domain::square_lattice(0.25).unwrap();
    let a = Point::new(0.5, 0.5);
    let c = cfg();
    let b = sample_batch(&d, a, &c, 200).unwrap();
    for s in &b.samples {
        if s.truncated {
            assert_eq!(s.time, Some(c.t_max));
            assert!(s.feature.is_none());
        } else {
            assert!(d.nearest(s.position).dist <= c.shell_eps + 1e-12);
            assert!(s.feature.is_some());
        }
    }
}

#[test]
fn start_outside_is_rejected() {
    let e = sample_exit(&Domain::HalfPlane, Point::new(0.0, -1.0), &cfg(), 0);
    assert!(matches!(e, Err(Error::PointOutsideDomain { .. })));
}

#[test]
fn wos_has_no_time() {
    let s = sample_exit_position_wos(&Domain::HalfPlane, Point::new(0.0, 1.0), &cfg(), 0).unwrap();
    assert!(s.time.is_none());
    assert!(s.position.y.abs() <= 1e-6);
    assert_eq!(s.feature, Some(BoundaryFeature::Line));
}

#[test]
fn bad_config_rejected() {
    let c = SamplerConfig {
        step_factor: 1.5,
        ..cfg()
    };
    assert!(matches!(
        sample_exit(&Domain::HalfPlane, Point::new(0.0, 1.0), &c, 0),
        Err(Error::InvalidSamplerConfig(_))
    ));
}

#[test]
fn winding_half_plane_exits_on_a_ray() {
    let s = sample_winding_exit(FRAC_PI_2, Point::new(1.0, 0.0), &cfg(), 3).unwrap();
    if !s.truncated {
        assert!(s.position.x.abs() < 1e-5);
    }
    // beyond π the stopping time is not an exit time but is still sampled
    let s = sample_winding_exit(2.0 * PI, Point::new(1.0, 0.0), &cfg(), 3).unwrap();
    assert!(s.time.unwrap() > 0.0);
}

#[test]
fn layered_solid_half_plane_never_reaches_lower_line() {
    let d = Domain::HalfPlane;
    let k = LayerSet::HorizontalLine { y: 1.0 };
    let kt = LayerSet::HorizontalLine { y: -1.0 };
    let traces = layered_batch(&d, &k, &kt, Point::new(0.0, 1.0), 10, &cfg(), 200).unwrap();
    assert!(traces.iter().all(|t| t.layers_completed == 0));
}

#[test]
fn layer_splitting_stops_without_survivors() {
    let k = LayerSet::HorizontalLine { y: 1.0 };
    let kt = LayerSet::HorizontalLine { y: -1.0 };
    let c = layered_splitting(&Domain::HalfPlane, &k, &kt, Point::new(0.0, 1.0), 5, &cfg(), 100).unwrap();
    assert_eq!(c, vec![0]);
}

#[test]
fn layer_splitting_alternates_and_repeats() {
    let d = Domain::dashed_half_plane(5.0, 0.5).unwrap();
    let k = LayerSet::HorizontalLine { y: 1.0 };
    let kt = LayerSet::HorizontalLine { y: -1.0 };
    let a = Point::new(0.0, 1.0);
    let c = layered_splitting(&d, &k, &kt, a, 4, &cfg(), 400).unwrap();
    assert_eq!(c.len(), 4);
    assert!(c.iter().all(|&x| x > 0 && x < 400), "{c:?}");
    assert_eq!(c, layered_splitting(&d, &k, &kt, a, 4, &cfg(), 400).unwrap());
}

#[test]
fn layered_rejects_whole_plane() {
    let d = Domain::Intersection { parts: vec![] };
    let k = LayerSet::HorizontalLine { y: 1.0 };
    let kt = LayerSet::HorizontalLine { y: -1.0 };
    let e = sample_layered(&d, &k, &kt, Point::new(0.0, 1.0), 10, &cfg(), 0);
    assert!(matches!(e, Err(Error::InvalidDomain(_))));
}

#[test]
fn layer_times_are_nondecreasing() {
    let d = Domain::dashed_half_plane(2.0, 0.5).unwrap();
    let k = LayerSet::HorizontalLine { y: 1.0 };
    let kt = LayerSet::HorizontalLine { y: -1.0 };
    let c = cfg();
    for tr in layered_batch(&d, &k, &kt, Point::new(0.0, 1.0), 20, &c, 300).unwrap() {
        assert!(tr.layer_times.windows(2).all(|w| w[0] <= w[1]));
        assert!(tr.layer_times.iter().all(|&t| t <= c.t_max));
    }
}
