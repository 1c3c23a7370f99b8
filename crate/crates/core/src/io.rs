//! Point-cloud ingestion, diagram serialization and seeded synthetic data.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;
use serde_json::{json, Value};

use crate::divergence::{DomainConstraint, Generator, GeneratorKind, PointCloud};
use crate::error::{Error, Result};
use crate::persistence::{DiagramPoint, PersistenceDiagram};

/// Version tag of every JSON document this crate writes.
pub const SCHEMA_VERSION: u64 = 1;

/// Parsed rows with the input line each came from.
#[derive(Debug, Clone, PartialEq)]
pub struct Rows {
    pub points: Vec<Vec<f64>>,
    pub lines: Vec<usize>,
}

impl Rows {
    pub fn dim(&self) -> usize {
        self.points.first().map_or(0, Vec::len)
    }

    /// Validates every row against a generator of `kind` in the rows' dimension.
    pub fn into_cloud(self, kind: GeneratorKind) -> Result<(Generator, PointCloud)> {
        let gen = Generator::new(kind, self.dim());
        for (row, &line) in self.points.iter().zip(&self.lines) {
            if let Err(Error::DomainViolation { index, value, domain }) = gen.check(row) {
                return Err(Error::RowDomainViolation {
                    line,
                    index,
                    value,
                    domain,
                });
            }
        }
        let cloud = PointCloud::new(&gen, &self.points)?;
        Ok((gen, cloud))
    }
}

fn finite(value: f64, line: usize) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::Parse {
            line,
            message: format!("non-finite coordinate {value}"),
        })
    }
}

fn check_shape(points: &[Vec<f64>], lines: &[usize]) -> Result<()> {
    let Some(first) = points.first() else {
        return Err(Error::Parse {
            line: 1,
            message: "no points".into(),
        });
    };
    if first.is_empty() {
        return Err(Error::Parse {
            line: lines[0],
            message: "a point needs at least one coordinate".into(),
        });
    }
    for (row, &line) in points.iter().zip(lines) {
        if row.len() != first.len() {
            return Err(Error::Parse {
                line,
                message: format!("expected {} fields, found {}", first.len(), row.len()),
            });
        }
    }
    Ok(())
}

/// Headerless comma-separated decimal rows.
pub fn parse_csv(text: &str) -> Result<Rows> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut points = Vec::new();
    let mut lines = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::Parse {
            line: e.position().map_or(0, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        // The reader's own line counter ignores skipped blank lines.
        let line = record.position().map_or(0, |p| {
            let bytes = text.as_bytes();
            let mut at = p.byte() as usize;
            while at < bytes.len() && matches!(bytes[at], b'\n' | b'\r') {
                at += 1;
            }
            1 + bytes[..at].iter().filter(|&&b| b == b'\n').count()
        });
        if record.iter().all(str::is_empty) {
            continue;
        }
        let row = record
            .iter()
            .map(|field| {
                let value: f64 = field.parse().map_err(|_| Error::Parse {
                    line,
                    message: format!("invalid number {field:?}"),
                })?;
                finite(value, line)
            })
            .collect::<Result<Vec<f64>>>()?;
        points.push(row);
        lines.push(line);
    }
    check_shape(&points, &lines)?;
    Ok(Rows { points, lines })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct JsonPoints {
    points: Vec<Vec<f64>>,
}

/// `{"points": [[...], ...]}`; the reported line of a row is its 1-based position.
pub fn parse_json(text: &str) -> Result<Rows> {
    let doc: JsonPoints = serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        message: e.to_string(),
    })?;
    let lines: Vec<usize> = (1..=doc.points.len()).collect();
    for (row, &line) in doc.points.iter().zip(&lines) {
        for &v in row {
            finite(v, line)?;
        }
    }
    check_shape(&doc.points, &lines)?;
    Ok(Rows {
        points: doc.points,
        lines,
    })
}

/// JSON if the first non-blank character is `{`, CSV otherwise.
pub fn parse_points(text: &str) -> Result<Rows> {
    if text.trim_start().starts_with('{') {
        parse_json(text)
    } else {
        parse_csv(text)
    }
}

/// Reads and validates a point cloud for a generator of `kind`.
pub fn ingest(path: &Path, kind: GeneratorKind) -> Result<(Generator, PointCloud)> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_points(&text)?.into_cloud(kind)
}

fn encode_point(p: &DiagramPoint) -> Value {
    let death = if p.death.is_infinite() {
        json!("inf")
    } else {
        json!(p.death)
    };
    json!({"dim": p.dim, "birth": p.birth, "death": death})
}

/// `[{"dim", "birth", "death"}, ...]` with `"inf"` for classes that never die.
pub fn diagram_to_json(d: &PersistenceDiagram) -> Value {
    Value::Array(d.points.iter().map(encode_point).collect())
}

/// `{"schema": 1, "diagram": [...]}` on one line.
pub fn encode_diagram(d: &PersistenceDiagram) -> String {
    json!({"schema": SCHEMA_VERSION, "diagram": diagram_to_json(d)}).to_string()
}

fn bad(message: impl Into<String>) -> Error {
    Error::Parse {
        line: 1,
        message: message.into(),
    }
}

fn decode_point(v: &Value) -> Result<DiagramPoint> {
    let obj = v.as_object().ok_or_else(|| bad("diagram point must be an object"))?;
    if obj.len() != 3 {
        return Err(bad("diagram point needs exactly dim, birth and death"));
    }
    let dim = obj
        .get("dim")
        .and_then(Value::as_u64)
        .ok_or_else(|| bad("dim must be a nonnegative integer"))?;
    let dim = usize::try_from(dim).map_err(|_| bad("dim out of range"))?;
    let birth = obj
        .get("birth")
        .and_then(Value::as_f64)
        .ok_or_else(|| bad("birth must be a number"))?;
    let death = match obj.get("death") {
        Some(Value::String(s)) if s == "inf" => f64::INFINITY,
        Some(v) => v.as_f64().ok_or_else(|| bad("death must be a number or \"inf\""))?,
        None => return Err(bad("missing death")),
    };
    if !birth.is_finite() || death.is_nan() || birth > death {
        return Err(bad(format!("invalid interval ({birth}, {death})")));
    }
    Ok(DiagramPoint { dim, birth, death })
}

/// Accepts a full `{"schema": 1, "diagram": [...]}` document or a bare array.
pub fn decode_diagram(text: &str) -> Result<PersistenceDiagram> {
    let doc: Value = serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        message: e.to_string(),
    })?;
    let array = match &doc {
        Value::Array(a) => a,
        Value::Object(obj) => {
            match obj.get("schema") {
                Some(s) if s.as_u64() == Some(SCHEMA_VERSION) => {}
                Some(s) => return Err(bad(format!("unsupported schema {s}"))),
                None => return Err(bad("missing schema")),
            }
            obj.get("diagram")
                .and_then(Value::as_array)
                .ok_or_else(|| bad("missing diagram array"))?
        }
        _ => return Err(bad("expected an object or an array")),
    };
    let points = array.iter().map(decode_point).collect::<Result<Vec<_>>>()?;
    Ok(PersistenceDiagram::new(points))
}

/// Seeded uniform samples from a box inside the generator's domain:
/// `[0.1, 1]` per coordinate on the positive orthant, `[-1, 1]` on ℝⁿ.
pub fn synth(kind: GeneratorKind, num_points: usize, dim: usize, seed: u64) -> Vec<Vec<f64>> {
    let (lo, hi) = match Generator::new(kind, dim.max(1)).domain.constraint {
        DomainConstraint::All => (-1.0, 1.0),
        DomainConstraint::PositiveOrthant => (0.1, 1.0),
        DomainConstraint::NegativeOrthant => (-1.0, -0.1),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..num_points)
        .map(|_| (0..dim).map(|_| rng.random_range(lo..hi)).collect())
        .collect()
}

/// Headerless CSV with shortest round-trip decimal formatting.
pub fn to_csv(points: &[Vec<f64>]) -> String {
    let mut out = String::new();
    for p in points {
        let row: Vec<String> = p.iter().map(|v| format!("{v:?}")).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}
