use rand::Rng;

use super::*;
use crate::geometry::Point;
use crate::rng::aux_stream;
use crate::sampler::{ExitSample, SamplerConfig};

fn batch_of(times: &[f64], t_max: f64) -> SampleBatch {
    SampleBatch {
        config: SamplerConfig {
            t_max,
            seed: 3,
            ..SamplerConfig::default()
        },
        start: Point::ORIGIN,
        source: "synthetic".into(),
        samples: times
            .iter()
            .map(|&t| {
                if t >= t_max {
                    ExitSample {
                        time: Some(t_max),
                        position: Point::ORIGIN,
                        feature: None,
                        truncated: true,
                        steps: 0,
                    }
                } else {
                    ExitSample {
                        time: Some(t),
                        position: Point::ORIGIN,
                        feature: Some(crate::geometry::BoundaryFeature::Line),
                        truncated: false,
                        steps: 0,
                    }
                }
            })
            .collect(),
    }
}

fn pareto(n: usize, exponent: f64, seed: u64) -> Vec<f64> {
    let mut rng = aux_stream(seed, 99);
    (0..n).map(|_| (1.0 - rng.random::<f64>()).powf(-1.0 / exponent)).collect()
}

#[test]
fn identical_samples_have_exact_moment() {
    let b = batch_of(&[2.0; 10], 100.0);
    let m = truncated_moment(&b, 1.0, None, &EstimatorConfig::default()).unwrap();
    assert_eq!(m.value, 2.0);
    assert_eq!(m.stderr, 0.0);
    assert!(!m.divergence_flag);
}

#[test]
fn empty_batch_is_an_error() {
    let b = batch_of(&[], 1.0);
    let cfg = EstimatorConfig::default();
    assert!(matches!(truncated_moment(&b, 1.0, None, &cfg), Err(Error::EmptyBatch)));
    assert!(matches!(survival_curve(&b, &[0.5], 0.95), Err(Error::EmptyBatch)));
    assert!(matches!(tail_index(&b, TailMethod::Hill, None, &cfg), Err(Error::EmptyBatch)));
}

#[test]
fn truncated_samples_count_at_the_horizon() {
    let b = batch_of(&[1.0, 50.0], 10.0);
    let m = truncated_moment(&b, 1.0, None, &EstimatorConfig::default()).unwrap();
    assert_eq!(m.value, 5.5);
    assert_eq!(m.truncated, 1);
    assert!((m.truncation_share - 5.0 / 5.5).abs() < 1e-12);
    assert!(m.divergence_flag);
    // re-truncation below the batch horizon
    let m = truncated_moment(&b, 1.0, Some(0.5), &EstimatorConfig::default()).unwrap();
    assert_eq!(m.value, 0.5);
    assert!(truncated_moment(&b, 1.0, Some(20.0), &EstimatorConfig::default()).is_err());
}

#[test]
fn all_truncated_survival_is_one() {
    let b = batch_of(&[5.0; 20], 1.0);
    let s = survival_curve(&b, &[0.1, 0.5, 1.0], 0.95).unwrap();
    assert!(s.iter().all(|p| p.survival == 1.0 && p.hi == 1.0));
    assert!(survival_curve(&b, &[2.0], 0.95).is_err());
}

#[test]
fn synthetic_pareto_half() {
    let times = pareto(100_000, 0.5, 1);
    let b = batch_of(&times, 1e9);
    let cfg = EstimatorConfig::default();
    for m in [TailMethod::LogLogLS, TailMethod::Hill] {
        let e = tail_index(&b, m, None, &cfg).unwrap();
        assert!((e.exponent - 0.5).abs() < 0.05, "{m:?}: {e:?}");
        assert!(e.ci_low <= e.exponent && e.exponent <= e.ci_high);
        assert!(e.fit_window.0 < e.fit_window.1 && e.fit_window.1 <= 1e9);
    }
}

#[test]
fn explicit_window_guards() {
    let b = batch_of(&pareto(1000, 0.5, 2), 100.0);
    let cfg = EstimatorConfig::default();
    assert!(matches!(
        tail_index(&b, TailMethod::LogLogLS, Some((1.0, 60.0)), &cfg),
        Err(Error::TruncationContamination { .. })
    ));
    assert!(matches!(
        tail_index(&b, TailMethod::Hill, Some((40.0, 45.0)), &cfg),
        Err(Error::WindowTooSparse { .. })
    ));
}

#[test]
fn bootstrap_is_reproducible() {
    let b = batch_of(&pareto(20_000, 1.0, 4), 1e6);
    let cfg = EstimatorConfig::default();
    let x = tail_index(&b, TailMethod::LogLogLS, None, &cfg).unwrap();
    let y = tail_index(&b, TailMethod::LogLogLS, None, &cfg).unwrap();
    assert_eq!(x, y);
}

fn trace(layers: usize) -> LayerTrace {
    let mut times: Vec<f64> = (1..=layers).map(|j| j as f64).collect();
    times.push(layers as f64 + 0.5);
    LayerTrace {
        layer_times: times,
        layers_completed: layers,
        exited_first: layers == 0,
        exit: ExitSample {
            time: Some(layers as f64 + 0.5),
            position: Point::ORIGIN,
            feature: None,
            truncated: false,
            steps: 0,
        },
    }
}

#[test]
fn geometric_layers_recover_ratio() {
    let mut rng = aux_stream(9, 1);
    let traces: Vec<LayerTrace> = (0..20_000)
        .map(|_| {
            let mut j = 0;
            while rng.random::<f64>() < 0.6 {
                j += 1;
            }
            trace(j)
        })
        .collect();
    let f = layer_decay_fit(&traces, &EstimatorConfig::default()).unwrap();
    assert!((f.alpha_hat - 0.6).abs() < 0.02, "{f:?}");
    assert!(f.ci_high < 1.0);
    assert!(f.layers.len() >= 3);
}

#[test]
fn no_layers_is_insufficient() {
    let traces = vec![trace(0); 100];
    assert!(matches!(
        layer_decay_fit(&traces, &EstimatorConfig::default()),
        Err(Error::InsufficientLayers { usable: 0 })
    ));
}

#[test]
fn split_stages_recover_ratio() {
    let mut rng = aux_stream(9, 2);
    let n = 2000;
    let counts: Vec<usize> = (0..6)
        .map(|j| (0..n).filter(|_| rng.random::<f64>() < if j == 0 { 0.3 } else { 0.05 }).count())
        .collect();
    let f = layer_decay_split(&counts, n, &EstimatorConfig::default()).unwrap();
    assert!((f.alpha_hat - 0.05).abs() < 0.01, "{f:?}");
    assert!(f.ci_low <= f.alpha_hat && f.alpha_hat <= f.ci_high && f.ci_high < 1.0);
    assert_eq!(f.layers, vec![1, 2, 3, 4, 5, 6]);
}

#[test]
fn split_stages_stop_at_sparse_depth() {
    let cfg = EstimatorConfig::default();
    assert!(matches!(
        layer_decay_split(&[500, 40, 3, 400], 1000, &cfg),
        Err(Error::InsufficientLayers { usable: 2 })
    ));
}

#[test]
fn minkowski_holds_for_p_below_one() {
    let traces: Vec<LayerTrace> = (0..6).map(trace).collect();
    let c = minkowski_layer_check(&traces, 0.4, 4).unwrap();
    assert!(c.holds && c.increments >= c.total);
}

#[test]
fn exponential_tail_slopes_grow() {
    let mut rng = aux_stream(5, 2);
    let times: Vec<f64> = (0..100_000).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
    let b = batch_of(&times, 1e3);
    let s = rolling_tail_slopes(&b, 4, 100).unwrap();
    let (rate, monotone) = slope_growth_per_decade(&s);
    assert!(monotone && rate > 1.0, "{s:?}");
}
