use std::f64::consts::{FRAC_PI_4, FRAC_PI_8, PI};

use bhlab::experiments::angle_schedule;
use bhlab::geometry::{CenterMask, Domain, LatticeBasis, Point, Stage, StaircaseWedge, Terminal};
use proptest::prelude::*;

fn staircase(n: usize) -> StaircaseWedge {
    let radii = [0.0, 2.0, 5.0, 13.0, 40.0];
    StaircaseWedge::new(
        (1..=n)
            .map(|k| Stage {
                angle: angle_schedule(k),
                radius: radii[k - 1],
            })
            .collect(),
        Terminal::LastStage,
    )
    .unwrap()
}

fn catalog() -> Vec<Domain> {
    vec![
        Domain::HalfPlane,
        Domain::Strip { half_width: 1.5 },
        Domain::Wedge { half_angle: FRAC_PI_8 },
        Domain::Wedge { half_angle: PI },
        Domain::Disk {
            center: Point::new(1.0, -1.0),
            radius: 3.0,
        },
        Domain::DiskComplement { radius: 1.0 },
        Domain::dashed_half_plane(2.0, 0.5).unwrap(),
        Domain::DashedWedge {
            half_angle: FRAC_PI_4,
            period: 1.0,
            gap: 0.5,
        },
        Domain::square_lattice(0.25).unwrap(),
        Domain::DiskLattice {
            generators: LatticeBasis::new(Point::new(1.0, 0.0), Point::new(0.5, 0.9)).unwrap(),
            hole_radius: 0.2,
        },
        Domain::GraphComplement {
            hole_radius: 0.25,
            mask: CenterMask::OutsideWedge { half_angle: FRAC_PI_8 },
        },
        Domain::StaircaseWedge(staircase(4)),
        Domain::Intersection {
            parts: vec![Domain::Wedge { half_angle: 0.5 }, Domain::DiskComplement { radius: 2.0 }],
        },
    ]
}

fn point() -> impl Strategy<Value = Point> {
    (-6.0..6.0f64, -6.0..6.0f64).prop_map(|(x, y)| Point::new(x, y))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn distance_disk_holds_no_boundary(p in point(), k in 0usize..13) {
        let d = &catalog()[k];
        prop_assume!(d.contains(p));
        let r = d.dist_to_boundary(p).unwrap();
        prop_assert!(r > 0.0);
        for i in 0..256 {
            let th = 2.0 * PI * i as f64 / 256.0;
            for f in [0.3, 0.7, 0.999] {
                let q = Point::new(p.x + f * r * th.cos(), p.y + f * r * th.sin());
                prop_assert!(d.contains(q), "{d:?}: {q:?} within {r} of {p:?} is outside");
            }
        }
        let n = d.nearest(p);
        prop_assert!((n.point.dist(p) - r).abs() <= 1e-9 * r.max(1.0));
    }

    #[test]
    fn dashed_half_plane_is_periodic(p in point(), period in 0.5..5.0f64, frac in 0.05..0.95f64, k in -3i32..4) {
        let d = Domain::dashed_half_plane(period, frac * period / 2.0).unwrap();
        let q = Point::new(p.x + k as f64 * period, p.y);
        prop_assert_eq!(d.contains(p), d.contains(q));
        if d.contains(p) {
            let (a, b) = (d.dist_to_boundary(p).unwrap(), d.dist_to_boundary(q).unwrap());
            prop_assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn wedge_is_dilation_invariant(p in point(), alpha in 0.05..PI, s in 1e-3..1e3f64) {
        let d = Domain::Wedge { half_angle: alpha };
        prop_assert_eq!(d.contains(p), d.contains(Point::new(s * p.x, s * p.y)));
    }

    #[test]
    fn staircase_stages_are_nested(r in 0.0..80.0f64, th in -PI..PI) {
        let p = Point::polar(r, th);
        let full = staircase(5);
        for n in 2..=5 {
            let (inner, outer) = (full.truncated(n - 1), full.truncated(n));
            let wedge = Domain::Wedge { half_angle: angle_schedule(n) };
            if inner.contains(p) {
                prop_assert!(outer.contains(p), "D_{} not inside D_{n} at {p:?}", n - 1);
            }
            if outer.contains(p) {
                prop_assert!(wedge.contains(p), "D_{n} not inside W_{n} at {p:?}");
            }
        }
    }
}

#[test]
fn staircase_grid_nesting() {
    let full = staircase(5);
    for i in 0..200 {
        for j in 0..90 {
            let p = Point::polar(0.05 + 0.4 * i as f64, -FRAC_PI_4 + FRAC_PI_4 * j as f64 / 45.0);
            for n in 2..=5 {
                assert!(!full.truncated(n - 1).contains(p) || full.truncated(n).contains(p));
            }
        }
    }
}

#[test]
fn catalog_round_trips_through_json() {
    for d in catalog() {
        let s = serde_json::to_string(&d).unwrap();
        let back: Domain = serde_json::from_str(&s).unwrap();
        assert_eq!(back, d);
        assert_eq!(back.content_hash(), d.content_hash());
    }
}
