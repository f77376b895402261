use super::*;
use crate::error::Error;
use crate::experiments::Overrides;
use crate::geometry::{Domain, Point};
use crate::sampler::{sample_batch, SampleBatch, SamplerConfig};

fn small_batch(n: usize) -> SampleBatch {
    let cfg = SamplerConfig::default().with_seed(3).with_t_max(5.0);
    sample_batch(&Domain::Disk { center: Point::new(0.0, 0.0), radius: 1.0 }, Point::new(0.2, 0.1), &cfg, n).unwrap()
}

#[test]
fn three_samples_three_rows() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("s.csv");
    let warnings = export_samples(&small_batch(3), &p, "abc").unwrap();
    assert!(warnings.is_empty());
    let text = std::fs::read_to_string(&p).unwrap();
    let lines: Vec<_> = text.lines().collect();
    assert_eq!(lines[0], "time,x,y,feature,truncated,steps");
    assert_eq!(lines.iter().filter(|l| !l.starts_with('#')).count(), 4);
    assert!(lines.contains(&"# config_hash=abc"));
}

#[test]
fn empty_batch_header_only_with_warning() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("s.csv");
    let warnings = export_samples(&small_batch(0), &p, "abc").unwrap();
    assert_eq!(warnings.len(), 1);
    let back = import_samples(&p).unwrap();
    assert!(back.batch.is_empty());
}

#[test]
fn export_import_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("s.csv");
    let mut b = small_batch(50);
    b.samples[0].feature = Some(crate::geometry::BoundaryFeature::Part {
        part: 1,
        inner: Box::new(crate::geometry::BoundaryFeature::Hole { i: -2, j: 3 }),
    });
    b.samples[1].time = None;
    export_samples(&b, &p, "h").unwrap();
    let back = import_samples(&p).unwrap();
    assert_eq!(back.config_hash, "h");
    assert_eq!(back.batch, b);
}

#[test]
fn malformed_rows_are_io_errors() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("s.csv");
    export_samples(&small_batch(2), &p, "h").unwrap();
    let text = std::fs::read_to_string(&p).unwrap().replacen("false", "maybe", 1);
    std::fs::write(&p, text).unwrap();
    assert!(matches!(import_samples(&p), Err(Error::Io(_))));
}

#[test]
fn config_rejects_unknown_keys_with_line() {
    let err = ExperimentConfig::parse("experiment = \"exit-tail\"\nsede = 3\n").unwrap_err();
    match err {
        Error::ConfigInvalid { location, message } => {
            assert_eq!(location.as_deref(), Some("line 2, column 1"));
            assert!(message.contains("sede"), "{message}");
        }
        e => panic!("unexpected {e:?}"),
    }
    assert!(ExperimentConfig::parse("experiment = \"exit-tail\"\n[sampler]\nbeta = 1\n").is_err());
}

#[test]
fn config_hash_ignores_spelling_but_not_values() {
    let a = ExperimentConfig::parse("experiment = \"exit-tail\"\nseed = 1\n").unwrap();
    let b = ExperimentConfig::parse("seed = 1\nexperiment = \"exit-tail\"\n[params]\nsamples = 100000\n").unwrap();
    let c = ExperimentConfig::parse("experiment = \"exit-tail\"\nseed = 2\n").unwrap();
    let ov = Overrides::default();
    assert_eq!(a.hash(&ov).unwrap(), b.hash(&ov).unwrap());
    assert_ne!(a.hash(&ov).unwrap(), c.hash(&ov).unwrap());
    let small = Overrides {
        samples: Some(10),
        t_max: None,
    };
    assert_ne!(a.hash(&ov).unwrap(), a.hash(&small).unwrap());
}

#[test]
fn invalid_params_name_the_field() {
    let cfg = ExperimentConfig::parse("experiment = \"dashed-half-plane\"\n[params]\ngrid = [[2.0, 1.2]]\n").unwrap();
    match cfg.hash(&Overrides::default()).unwrap_err() {
        Error::ConfigInvalid { location, message } => {
            assert_eq!(location.as_deref(), Some("params.grid[0]"));
            assert!(message.contains("overlap"), "{message}");
        }
        e => panic!("unexpected {e:?}"),
    }
}

#[test]
fn run_writes_report_record_and_curves() {
    let dir = tempfile::tempdir().unwrap();
    let text = "experiment = \"exit-tail\"\nseed = 5\n[params]\nt_max = 1e4\n";
    let cfg = ExperimentConfig::parse(text).unwrap();
    let ov = Overrides {
        samples: Some(300),
        t_max: None,
    };
    let out = run_config(&cfg, text.as_bytes(), &ov, dir.path()).unwrap();
    assert_eq!(out.record.config_hash, cfg.hash(&ov).unwrap());
    assert_eq!(out.record.input_hash, content_hash(text.as_bytes()));
    for a in &out.record.artifacts {
        let body = std::fs::read_to_string(a).unwrap();
        assert!(body.contains(&out.record.config_hash), "{}", a.display());
    }
    assert!(out.dir.join("record.json").exists());
    assert!(!dir.path().join(OutputLock::FILE).exists());
    let again = run_config(&cfg, text.as_bytes(), &ov, dir.path()).unwrap();
    assert_eq!(again.record.metrics, out.record.metrics);
    assert_eq!(again.record.metrics_hash, out.record.metrics_hash);
}

#[test]
fn lock_excludes_a_second_run() {
    let dir = tempfile::tempdir().unwrap();
    let held = OutputLock::acquire(dir.path()).unwrap();
    assert!(matches!(OutputLock::acquire(dir.path()), Err(Error::Io(_))));
    drop(held);
    assert!(OutputLock::acquire(dir.path()).is_ok());
}

#[test]
fn git_style_hash_of_empty_input() {
    // `git hash-object --object-format=sha256 /dev/null`
    assert_eq!(
        content_hash(b""),
        "473a0f4c3be8a93681a267e3b1e9a7dcda1185436fe141f7749120a303721813"
    );
}
