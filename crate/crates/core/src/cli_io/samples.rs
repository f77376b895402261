use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::experiments::Curve;
use crate::geometry::{BoundaryFeature, Point};
use crate::sampler::{ExitSample, SampleBatch, SamplerConfig};

/// Column order of sample files.
pub const SAMPLE_COLUMNS: [&str; 6] = ["time", "x", "y", "feature", "truncated", "steps"];

const HASH_KEY: &str = "config_hash";

fn bad(path: &Path, msg: impl std::fmt::Display) -> Error {
    Error::Io(std::io::Error::new(
        std::io::ErrorKind::InvalidData,
        format!("{}: {msg}", path.display()),
    ))
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.into())
}

/// Writes one row per sample (`feature` is the snake-case name of a unit
/// feature, JSON otherwise) plus `#` footer lines carrying `config_hash`, the
/// start point, the domain hash and the sampler config. Returns warnings
/// (an empty batch still produces a header-only file).
pub fn export_samples(batch: &SampleBatch, path: &Path, config_hash: &str) -> Result<Vec<String>> {
    let mut warnings = Vec::new();
    if batch.is_empty() {
        warnings.push(format!("{}: batch is empty, wrote the header only", path.display()));
    }
    let mut w = csv::Writer::from_writer(File::create(path)?);
    w.write_record(SAMPLE_COLUMNS).map_err(csv_err)?;
    for s in &batch.samples {
        let feature = match &s.feature {
            Some(f) => match serde_json::to_value(f).map_err(std::io::Error::from)? {
                serde_json::Value::String(name) => name,
                v => v.to_string(),
            },
            None => String::new(),
        };
        w.write_record([
            s.time.map(|t| t.to_string()).unwrap_or_default(),
            s.position.x.to_string(),
            s.position.y.to_string(),
            feature,
            s.truncated.to_string(),
            s.steps.to_string(),
        ])
        .map_err(csv_err)?;
    }
    let mut f = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    writeln!(f, "# {HASH_KEY}={config_hash}")?;
    writeln!(f, "# start={},{}", batch.start.x, batch.start.y)?;
    writeln!(f, "# source={}", batch.source)?;
    writeln!(
        f,
        "# sampler={}",
        serde_json::to_string(&batch.config).map_err(std::io::Error::from)?
    )?;
    Ok(warnings)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImportedBatch {
    pub batch: SampleBatch,
    pub config_hash: String,
}

fn parse<T: std::str::FromStr>(path: &Path, row: usize, col: &str, s: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    s.parse().map_err(|e| bad(path, format!("row {row}, column {col}: {e}")))
}

/// Reads a file written by [`export_samples`].
pub fn import_samples(path: &Path) -> Result<ImportedBatch> {
    let mut footer = std::collections::BTreeMap::new();
    for line in BufReader::new(File::open(path)?).lines() {
        let line = line?;
        if let Some(rest) = line.strip_prefix("# ") {
            if let Some((k, v)) = rest.split_once('=') {
                footer.insert(k.to_string(), v.to_string());
            }
        }
    }
    let get = |k: &str| footer.get(k).ok_or_else(|| bad(path, format!("missing footer line '# {k}=…'")));
    let config_hash = get(HASH_KEY)?.clone();
    let (sx, sy) = get("start")?
        .split_once(',')
        .ok_or_else(|| bad(path, "start must be 'x,y'"))?;
    let start = Point::new(parse(path, 0, "start", sx)?, parse(path, 0, "start", sy)?);
    let source = get("source")?.clone();
    let config: SamplerConfig = serde_json::from_str(get("sampler")?).map_err(|e| bad(path, e))?;

    let mut r = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(csv_err)?;
    let header = r.headers().map_err(csv_err)?.clone();
    if header.iter().ne(SAMPLE_COLUMNS) {
        return Err(bad(path, format!("expected columns {}", SAMPLE_COLUMNS.join(","))));
    }
    let mut samples = Vec::new();
    for (k, rec) in r.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        let row = k + 1;
        let time = match &rec[0] {
            "" => None,
            t => Some(parse(path, row, "time", t)?),
        };
        let feature: Option<BoundaryFeature> = match &rec[3] {
            "" => None,
            f => {
                let v = if f.starts_with('{') {
                    serde_json::from_str(f)
                } else {
                    Ok(serde_json::Value::String(f.into()))
                };
                let parsed = v.and_then(serde_json::from_value);
                Some(parsed.map_err(|e| bad(path, format!("row {row}, column feature: {e}")))?)
            }
        };
        samples.push(ExitSample {
            time,
            position: Point::new(parse(path, row, "x", &rec[1])?, parse(path, row, "y", &rec[2])?),
            feature,
            truncated: parse(path, row, "truncated", &rec[4])?,
            steps: parse(path, row, "steps", &rec[5])?,
        });
    }
    Ok(ImportedBatch {
        batch: SampleBatch {
            config,
            start,
            source,
            samples,
        },
        config_hash,
    })
}

/// Writes a report curve as CSV with the `config_hash` footer.
pub fn write_curve(curve: &Curve, path: &Path, config_hash: &str) -> Result<()> {
    let mut w = csv::Writer::from_writer(File::create(path)?);
    w.write_record(&curve.columns).map_err(csv_err)?;
    for row in &curve.rows {
        w.write_record(row.iter().map(|v| v.to_string())).map_err(csv_err)?;
    }
    let mut f = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    writeln!(f, "# {HASH_KEY}={config_hash}")?;
    Ok(())
}
