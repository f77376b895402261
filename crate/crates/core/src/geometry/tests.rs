use std::f64::consts::{FRAC_PI_4, FRAC_PI_8, PI};

use super::*;

fn dashed() -> Domain {
    Domain::dashed_half_plane(2.0, 0.5).unwrap()
}

#[test]
fn membership_examples() {
    assert!(Domain::HalfPlane.contains(Point::new(0.0, 1.0)));
    assert!(dashed().contains(Point::new(1.0, 0.0)));
    assert!(!dashed().contains(Point::new(0.5, 0.0)));
    let lat = Domain::square_lattice(0.25).unwrap();
    assert!(!lat.contains(Point::ORIGIN));
    assert!(!lat.contains(Point::new(0.25, 0.0)));
}

#[test]
fn distance_examples() {
    let d = Domain::HalfPlane.dist_to_boundary(Point::new(0.0, 1.0)).unwrap();
    assert_eq!(d, 1.0);
    let w = Domain::wedge(FRAC_PI_4).unwrap();
    let d = w.dist_to_boundary(Point::new(1.0, 0.0)).unwrap();
    assert!((d - FRAC_PI_4.sin()).abs() < 1e-15);
    let lat = Domain::square_lattice(0.25).unwrap();
    let d = lat.dist_to_boundary(Point::new(0.5, 0.5)).unwrap();
    assert!((d - (0.5f64.sqrt() - 0.25)).abs() < 1e-15);
    assert!(matches!(
        Domain::HalfPlane.dist_to_boundary(Point::new(0.0, -1.0)),
        Err(Error::PointOutsideDomain { .. })
    ));
}

#[test]
fn classify_examples() {
    let f = dashed().classify_boundary_hit(Point::new(0.1, 1e-9), 1e-6).unwrap();
    assert_eq!(f, BoundaryFeature::Segment { index: 0 });
    let w = Domain::wedge(FRAC_PI_4).unwrap();
    let p = Point::polar(1.0, FRAC_PI_4) + Point::new(-1.0, 1.0) * (1e-9 / 2f64.sqrt());
    assert_eq!(
        w.classify_boundary_hit(p, 1e-6).unwrap(),
        BoundaryFeature::Ray { upper: true }
    );
    let lat = Domain::square_lattice(0.25).unwrap();
    assert_eq!(
        lat.classify_boundary_hit(Point::new(0.25 + 1e-9, 0.0), 1e-6).unwrap(),
        BoundaryFeature::Hole { i: 0, j: 0 }
    );
    assert!(matches!(
        lat.classify_boundary_hit(Point::new(0.5, 0.5), 1e-6),
        Err(Error::NotNearBoundary { .. })
    ));
}

#[test]
fn tie_goes_to_smallest_feature() {
    let w = Domain::wedge(FRAC_PI_4).unwrap();
    // the apex is equidistant from both rays
    let f = w.classify_boundary_hit(Point::new(-1e-9, 0.0), 1e-6).unwrap();
    assert_eq!(f, BoundaryFeature::Ray { upper: false });
}

#[test]
fn invalid_parameters_rejected() {
    assert!(Domain::dashed_half_plane(2.0, 1.0).is_err());
    assert!(Domain::square_lattice(0.5).is_err());
    assert!(Domain::wedge(0.0).is_err());
    assert!(Domain::Intersection { parts: vec![] }.validate().is_err());
}

#[test]
fn feature_strings_round_trip() {
    let fs = [
        BoundaryFeature::Line,
        BoundaryFeature::StripEdge { right: true },
        BoundaryFeature::Ray { upper: false },
        BoundaryFeature::Circle,
        BoundaryFeature::Segment { index: -3 },
        BoundaryFeature::RaySegment { upper: true, index: 7 },
        BoundaryFeature::Hole { i: -1, j: 2 },
        BoundaryFeature::StaircaseRay { stage: 3, upper: true },
        BoundaryFeature::StaircaseArc { stage: 2, upper: false },
        BoundaryFeature::Part {
            part: 1,
            inner: Box::new(BoundaryFeature::Hole { i: 0, j: 0 }),
        },
    ];
    for f in fs {
        let s = f.to_string();
        assert_eq!(s.parse::<BoundaryFeature>().unwrap(), f, "{s}");
    }
}

#[test]
fn dashed_wedge_gaps() {
    let d = Domain::DashedWedge {
        half_angle: FRAC_PI_4,
        period: 1.0,
        gap: 0.5,
    };
    d.validate().unwrap();
    let u = Point::polar(1.0, FRAC_PI_4);
    assert!(!d.contains(u * 0.5));
    assert!(d.contains(u * 1.25));
    assert!(!d.contains(u * 1.75));
    let f = d.classify_boundary_hit(u * 1.75 + Point::new(1e-9, 0.0), 1e-6).unwrap();
    assert_eq!(f, BoundaryFeature::RaySegment { upper: true, index: 1 });
    // a chord through the gap does not hit
    let n = Point::new(-u.y, u.x);
    assert!(d.chord_hit(u * 1.25 - n * 0.1, u * 1.25 + n * 0.1).is_none());
    assert!(d.chord_hit(u * 1.75 - n * 0.1, u * 1.75 + n * 0.1).is_some());
}

#[test]
fn chord_hits_nearest_hole_first() {
    let lat = Domain::square_lattice(0.25).unwrap();
    let h = lat.chord_hit(Point::new(0.5, 0.0), Point::new(3.5, 0.0)).unwrap();
    assert_eq!(h.feature, BoundaryFeature::Hole { i: 1, j: 0 });
    assert!((h.s - 0.25 / 3.0).abs() < 1e-12);
}

#[test]
fn graph_complement_left_half_is_free() {
    let d = Domain::GraphComplement {
        hole_radius: 0.25,
        mask: CenterMask::RightHalfPlane,
    };
    d.validate().unwrap();
    assert!(d.contains(Point::new(-3.0, 0.0)));
    assert!(!d.contains(Point::new(3.0, 0.0)));
    let dist = d.dist_to_boundary(Point::new(-3.0, 0.0)).unwrap();
    assert!((dist - 2.75).abs() < 1e-12);
}

#[test]
fn union_and_intersection() {
    let a = Domain::Disk {
        center: Point::new(-0.5, 0.0),
        radius: 1.0,
    };
    let b = Domain::Disk {
        center: Point::new(0.5, 0.0),
        radius: 1.0,
    };
    let u = Domain::Union {
        parts: vec![a.clone(), b.clone()],
    };
    let i = Domain::Intersection { parts: vec![a, b] };
    assert!(u.contains(Point::new(1.2, 0.0)));
    assert!(!i.contains(Point::new(1.2, 0.0)));
    let di = i.dist_to_boundary(Point::ORIGIN).unwrap();
    assert!((di - 0.5).abs() < 1e-12);
    let du = u.dist_to_boundary(Point::ORIGIN).unwrap();
    assert!(du > 0.0 && du <= 3f64.sqrt() / 2.0 + 1e-12);
    let h = u.chord_hit(Point::ORIGIN, Point::new(3.0, 0.0)).unwrap();
    assert!((h.s - 0.5).abs() < 1e-12);
}

#[test]
fn serde_round_trip() {
    let ds = [
        dashed(),
        Domain::wedge(FRAC_PI_8).unwrap(),
        Domain::square_lattice(0.25).unwrap(),
        Domain::GraphComplement {
            hole_radius: 0.25,
            mask: CenterMask::OutsideWedge { half_angle: FRAC_PI_8 },
        },
        Domain::StaircaseWedge(
            StaircaseWedge::new(
                vec![
                    Stage { angle: 0.5, radius: 0.0 },
                    Stage { angle: 0.6, radius: 2.0 },
                ],
                Terminal::QuarterPlane { radius: 5.0 },
            )
            .unwrap(),
        ),
        Domain::Strip { half_width: PI / 2.0 },
    ];
    for d in ds {
        let s = serde_json::to_string(&d).unwrap();
        let back: Domain = serde_json::from_str(&s).unwrap();
        assert_eq!(back, d, "{s}");
        assert_eq!(back.content_hash(), d.content_hash());
    }
}
