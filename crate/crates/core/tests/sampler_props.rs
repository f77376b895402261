use std::f64::consts::FRAC_PI_8;

use bhlab::estimators::{survival_curve, truncated_moment, EstimatorConfig};
use bhlab::geometry::{Domain, Point};
use bhlab::oracles::wedge_mean;
use bhlab::sampler::{sample_batch, sample_exit, splitting_batch, SampleBatch, SamplerConfig, Scheme, Splitting};
use bhlab::stats::{ks_two_sample, sort_floats};
use proptest::prelude::*;

fn cfg(seed: u64, t_max: f64) -> SamplerConfig {
    SamplerConfig {
        seed,
        t_max,
        ..SamplerConfig::default()
    }
}

fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(f)
}

fn mean_time(b: &SampleBatch) -> (f64, f64) {
    let t = b.times().unwrap();
    let n = t.len() as f64;
    let m = t.iter().sum::<f64>() / n;
    let v = t.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, (v / n).sqrt())
}

#[test]
fn batches_do_not_depend_on_worker_count() {
    let d = Domain::dashed_half_plane(2.0, 0.5).unwrap();
    let a = Point::new(0.3, 1.0);
    let c = cfg(42, 100.0);
    let one = in_pool(1, || sample_batch(&d, a, &c, 300).unwrap());
    let four = in_pool(4, || sample_batch(&d, a, &c, 300).unwrap());
    assert_eq!(one, four);
    assert_eq!(one.samples[17], sample_exit(&d, a, &c, 17).unwrap());

    let w = Domain::Wedge { half_angle: FRAC_PI_8 };
    let c = cfg(3, 1e6).with_dt_max(1e5);
    let s1 = in_pool(1, || splitting_batch(&w, Point::new(1.0, 0.0), &c, &Splitting::default(), 50).unwrap());
    let s3 = in_pool(3, || splitting_batch(&w, Point::new(1.0, 0.0), &c, &Splitting::default(), 50).unwrap());
    assert_eq!(s1, s3);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn raising_the_horizon_never_shortens_a_sample(seed in any::<u64>(), t in 0.5..20.0f64, factor in 1.0..8.0f64) {
        let d = Domain::Strip { half_width: 2.0 };
        let a = Point::new(0.4, 0.0);
        let short = sample_batch(&d, a, &cfg(seed, t), 40).unwrap();
        let long = sample_batch(&d, a, &cfg(seed, t * factor), 40).unwrap();
        for (s, l) in short.samples.iter().zip(&long.samples) {
            prop_assert!(l.time.unwrap() >= s.time.unwrap());
            if !s.truncated {
                prop_assert_eq!(s, l);
            }
        }
    }
}

#[test]
fn bridge_and_walk_on_spheres_agree_on_exit_positions() {
    let n = 20_000;
    for (d, a) in [
        (
            Domain::Disk {
                center: Point::new(0.0, 0.0),
                radius: 1.0,
            },
            Point::new(0.3, 0.2),
        ),
        (Domain::HalfPlane, Point::new(0.0, 1.0)),
    ] {
        let c = cfg(5, 1e4).with_dt_max(1.0);
        let w = SamplerConfig {
            scheme: Scheme::WalkOnSpheres,
            seed: 6,
            ..c.clone()
        };
        let angle = |b: &SampleBatch| -> Vec<f64> {
            let mut v: Vec<f64> = b
                .samples
                .iter()
                .filter(|s| !s.truncated)
                .map(|s| if d == Domain::HalfPlane { s.position.x.atan() } else { s.position.arg() })
                .collect();
            sort_floats(&mut v);
            v
        };
        let x = angle(&sample_batch(&d, a, &c, n).unwrap());
        let y = angle(&sample_batch(&d, a, &w, n).unwrap());
        let (nx, ny) = (x.len() as f64, y.len() as f64);
        let crit = 1.95 * ((nx + ny) / (nx * ny)).sqrt();
        let ks = ks_two_sample(&x, &y);
        assert!(ks < crit, "{d:?}: KS {ks} vs {crit}");
    }
}

#[test]
fn smaller_domain_exits_sooner() {
    let a = Point::new(0.0, 0.0);
    let small = Domain::Disk { center: a, radius: 1.0 };
    let big = Domain::Strip { half_width: 1.0 };
    let c = cfg(9, 50.0);
    let grid = [0.1, 0.3, 0.5, 1.0, 2.0];
    let s = survival_curve(&sample_batch(&small, a, &c, 20_000).unwrap(), &grid, 0.99).unwrap();
    let b = survival_curve(&sample_batch(&big, a, &c, 20_000).unwrap(), &grid, 0.99).unwrap();
    for (u, v) in s.iter().zip(&b) {
        assert!(u.lo <= v.hi, "at t={}: {} vs {}", u.t, u.survival, v.survival);
    }
    assert!(s[3].survival < b[3].survival);
}

#[test]
fn halving_step_and_shell_keeps_the_disk_mean() {
    let d = Domain::Disk {
        center: Point::new(0.0, 0.0),
        radius: 1.0,
    };
    let a = Point::new(0.0, 0.0);
    let c = cfg(12, 100.0);
    let fine = SamplerConfig {
        step_factor: c.step_factor / 2.0,
        shell_eps: c.shell_eps / 2.0,
        seed: 13,
        ..c.clone()
    };
    let (m1, e1) = mean_time(&sample_batch(&d, a, &c, 20_000).unwrap());
    let (m2, e2) = mean_time(&sample_batch(&d, a, &fine, 20_000).unwrap());
    assert!((m1 - m2).abs() < 2.58 * (e1 * e1 + e2 * e2).sqrt(), "{m1} vs {m2}");
    assert!((m2 - 0.5).abs() < 0.02);
}

#[test]
fn splitting_recovers_the_wedge_mean() {
    let alpha = FRAC_PI_8;
    let a = Point::new(1.0, 0.0);
    let c = cfg(21, 1e20 * 4.0).with_dt_max(1e19);
    let roots = splitting_batch(&Domain::Wedge { half_angle: alpha }, a, &c, &Splitting::default(), 4000).unwrap();
    let v: Vec<f64> = roots.iter().map(|r| r.value).collect();
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    let se = (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0) / n).sqrt();
    let exact = wedge_mean(alpha, a).unwrap();
    assert!((m - exact).abs() < 3.0 * se + 0.01 * exact, "{m} ± {se} vs {exact}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn moments_grow_with_order_and_horizon(times in prop::collection::vec(1.0..1e3f64, 5..60), p in 0.1..2.0f64, dp in 0.0..1.5f64, cut in 0.1..1.0f64) {
        let c = cfg(0, 1e3);
        let b = SampleBatch {
            config: c.clone(),
            start: Point::new(0.0, 1.0),
            source: "synthetic".into(),
            samples: times
                .iter()
                .map(|&t| bhlab::sampler::ExitSample {
                    time: Some(t),
                    position: Point::new(0.0, 0.0),
                    feature: None,
                    truncated: t >= c.t_max,
                    steps: 1,
                })
                .collect(),
        };
        let est = EstimatorConfig::default();
        let lo = truncated_moment(&b, p, None, &est).unwrap().value;
        let hi = truncated_moment(&b, p + dp, None, &est).unwrap().value;
        prop_assert!(hi >= lo * (1.0 - 1e-12));
        let short = truncated_moment(&b, p, Some(cut * c.t_max), &est).unwrap().value;
        prop_assert!(lo >= short * (1.0 - 1e-12));
    }
}
