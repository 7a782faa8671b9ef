//! File formats: problem and family JSON, grid specs, and the CSV tables.
//!
//! Every floating-point value is written with 17 significant digits so that
//! reading a table back reproduces the numbers bit for bit.

use std::io::{Read, Write};
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{PencilError, Result};
use crate::inverse::FitResult;
use crate::model::PencilProblem;
use crate::propagator::SolutionTrace;
use crate::spectral::{check_lemma4, AsymptoticRow, CharacteristicSample, EigenRecord};
use crate::weyl::{line_grid, WeylSample};

/// Round-trippable rendering of a float.
pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn schema(e: serde_json::Error) -> PencilError {
    PencilError::Schema(format!("line {}, column {}: {e}", e.line(), e.column()))
}

/// Strict parse (unknown keys rejected) followed by validation.
pub fn parse_problem(text: &str, allow_identity: bool) -> Result<PencilProblem> {
    let mut problem: PencilProblem = serde_json::from_str(text).map_err(schema)?;
    problem.allow_identity = allow_identity;
    problem.ensure_valid()?;
    Ok(problem)
}

pub fn read_problem_file(path: &Path, allow_identity: bool) -> Result<PencilProblem> {
    parse_problem(&std::fs::read_to_string(path)?, allow_identity)
}

pub fn problem_to_json(problem: &PencilProblem) -> String {
    serde_json::to_string_pretty(problem).expect("problem serialises")
}

/// Which parameters vary and their bounds; the base problem comes separately.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilySpec {
    pub names: Vec<String>,
    pub bounds: Vec<(f64, f64)>,
}

pub fn parse_family(text: &str) -> Result<FamilySpec> {
    serde_json::from_str(text).map_err(schema)
}

/// `re0:re1:n[,im]`, e.g. `0.5:8:16,0.2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub re0: f64,
    pub re1: f64,
    pub n: usize,
    pub im: f64,
}

impl GridSpec {
    pub fn points(&self) -> Vec<Complex64> {
        line_grid(self.re0, self.re1, self.n, self.im)
    }
}

pub fn parse_grid(spec: &str) -> Result<GridSpec> {
    let bad = |why: &str| PencilError::Schema(format!("grid `{spec}`: {why}; expected re0:re1:n[,im]"));
    let (line, im) = match spec.split_once(',') {
        Some((l, i)) => (l, i.trim().parse::<f64>().map_err(|_| bad("bad imaginary part"))?),
        None => (spec, 0.0),
    };
    let parts: Vec<&str> = line.split(':').map(str::trim).collect();
    let [re0, re1, n] = parts[..] else {
        return Err(bad("need three `:`-separated fields"));
    };
    let re0: f64 = re0.parse().map_err(|_| bad("bad re0"))?;
    let re1: f64 = re1.parse().map_err(|_| bad("bad re1"))?;
    let n: usize = n.parse().map_err(|_| bad("bad point count"))?;
    if !(re0.is_finite() && re1.is_finite() && im.is_finite()) {
        return Err(bad("values must be finite"));
    }
    if n == 0 {
        return Err(bad("point count must be positive"));
    }
    Ok(GridSpec { re0, re1, n, im })
}

fn csv_reader<R: Read>(input: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .has_headers(true)
        .from_reader(input)
}

fn field(record: &csv::StringRecord, idx: usize, row: usize, name: &str) -> Result<f64> {
    record
        .get(idx)
        .ok_or_else(|| PencilError::Schema(format!("row {row}: missing column `{name}`")))?
        .parse::<f64>()
        .map_err(|_| PencilError::Schema(format!("row {row}: column `{name}` is not a number")))
}

fn check_header<R: Read>(reader: &mut csv::Reader<R>, expected: &[&str]) -> Result<()> {
    let header = reader
        .headers()
        .map_err(|e| PencilError::Schema(format!("header: {e}")))?;
    let got: Vec<&str> = header.iter().collect();
    if got != expected {
        return Err(PencilError::Schema(format!(
            "expected header `{}`, found `{}`",
            expected.join(","),
            got.join(",")
        )));
    }
    Ok(())
}

pub const WEYL_HEADER: [&str; 5] = ["re_lambda", "im_lambda", "re_m", "im_m", "pole_distance"];

pub fn write_weyl_samples<W: Write>(mut out: W, samples: &[WeylSample]) -> Result<()> {
    writeln!(out, "{}", WEYL_HEADER.join(","))?;
    for s in samples {
        writeln!(
            out,
            "{},{},{},{},{}",
            num(s.lambda.re),
            num(s.lambda.im),
            num(s.m.re),
            num(s.m.im),
            num(s.pole_distance)
        )?;
    }
    Ok(())
}

pub fn read_weyl_samples<R: Read>(input: R) -> Result<Vec<WeylSample>> {
    let mut reader = csv_reader(input);
    check_header(&mut reader, &WEYL_HEADER)?;
    let mut out = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let row = i + 2;
        let rec = rec.map_err(|e| PencilError::Schema(format!("row {row}: {e}")))?;
        if rec.len() != WEYL_HEADER.len() {
            return Err(PencilError::Schema(format!(
                "row {row}: expected {} columns, found {}",
                WEYL_HEADER.len(),
                rec.len()
            )));
        }
        let v: Vec<f64> = WEYL_HEADER
            .iter()
            .enumerate()
            .map(|(k, name)| field(&rec, k, row, name))
            .collect::<Result<_>>()?;
        if v[..4].iter().any(|x| !x.is_finite()) {
            return Err(PencilError::Schema(format!("row {row}: non-finite sample")));
        }
        out.push(WeylSample {
            lambda: Complex64::new(v[0], v[1]),
            m: Complex64::new(v[2], v[3]),
            pole_distance: v[4],
        });
    }
    Ok(out)
}

pub const EIG_HEADER: [&str; 12] = [
    "n",
    "lambda_n",
    "beta_n",
    "alpha_n",
    "lambda_n0",
    "residual",
    "lemma4_relerr",
    "im_lambda_n",
    "im_beta_n",
    "im_alpha_n",
    "im_lambda_n0",
    "optical_term",
];

/// The first seven columns carry real parts; imaginary parts follow.
pub fn write_eigen_records<W: Write>(mut out: W, records: &[EigenRecord]) -> Result<()> {
    writeln!(out, "{}", EIG_HEADER.join(","))?;
    for r in records {
        let l4 = check_lemma4(r).relative_error;
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            r.n,
            num(r.lambda_n.re),
            num(r.beta_n.re),
            num(r.alpha_n.re),
            num(r.lambda_n0.re),
            num(r.residual.re),
            num(l4),
            num(r.lambda_n.im),
            num(r.beta_n.im),
            num(r.alpha_n.im),
            num(r.lambda_n0.im),
            num(r.optical_term)
        )?;
    }
    Ok(())
}

pub const DET_SCAN_HEADER: [&str; 6] = ["re_lambda", "re_delta", "im_delta", "re_delta0", "im_delta0", "im_lambda"];

pub fn write_det_scan<W: Write>(mut out: W, samples: &[CharacteristicSample]) -> Result<()> {
    writeln!(out, "{}", DET_SCAN_HEADER.join(","))?;
    for s in samples {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            num(s.lambda.re),
            num(s.delta.re),
            num(s.delta.im),
            num(s.delta0.re),
            num(s.delta0.im),
            num(s.lambda.im)
        )?;
    }
    Ok(())
}

pub const ASYMPTOTICS_HEADER: [&str; 8] = [
    "n",
    "lambda_n",
    "lambda_n0",
    "difference",
    "scaled",
    "optical_term",
    "im_lambda_n",
    "im_scaled",
];

pub fn write_asymptotics<W: Write>(mut out: W, rows: &[AsymptoticRow]) -> Result<()> {
    writeln!(out, "{}", ASYMPTOTICS_HEADER.join(","))?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.n,
            num(r.lambda_n.re),
            num(r.lambda_n0.re),
            num(r.difference.re),
            num(r.scaled.re),
            num(r.optical_term),
            num(r.lambda_n.im),
            num(r.scaled.im)
        )?;
    }
    Ok(())
}

pub const TRACE_HEADER: [&str; 7] = ["x", "re_y", "im_y", "re_yprime", "im_yprime", "region", "side"];

pub fn write_trace<W: Write>(mut out: W, trace: &SolutionTrace) -> Result<()> {
    writeln!(out, "{}", TRACE_HEADER.join(","))?;
    for n in &trace.nodes {
        let s = &n.state;
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            num(s.x),
            num(s.y.re),
            num(s.y.im),
            num(s.yprime.re),
            num(s.yprime.im),
            n.region,
            n.side.label()
        )?;
    }
    Ok(())
}

/// One frozen reference value of Δ.
#[derive(Debug, Clone, PartialEq)]
pub struct GoldenRow {
    pub fixture: String,
    pub lambda: Complex64,
    pub delta: Complex64,
}

pub const GOLDEN_HEADER: [&str; 5] = ["fixture", "re_lambda", "im_lambda", "re_delta", "im_delta"];

pub fn write_golden<W: Write>(mut out: W, rows: &[GoldenRow]) -> Result<()> {
    writeln!(out, "{}", GOLDEN_HEADER.join(","))?;
    for r in rows {
        if r.fixture.contains([',', '"', '\n']) {
            return Err(PencilError::Schema(format!("fixture id `{}` needs quoting", r.fixture)));
        }
        writeln!(
            out,
            "{},{},{},{},{}",
            r.fixture,
            num(r.lambda.re),
            num(r.lambda.im),
            num(r.delta.re),
            num(r.delta.im)
        )?;
    }
    Ok(())
}

pub fn read_golden<R: Read>(input: R) -> Result<Vec<GoldenRow>> {
    let mut reader = csv_reader(input);
    check_header(&mut reader, &GOLDEN_HEADER)?;
    let mut out = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let row = i + 2;
        let rec = rec.map_err(|e| PencilError::Schema(format!("row {row}: {e}")))?;
        if rec.len() != GOLDEN_HEADER.len() {
            return Err(PencilError::Schema(format!("row {row}: expected 5 columns, found {}", rec.len())));
        }
        let v: Vec<f64> = (1..5)
            .map(|k| field(&rec, k, row, GOLDEN_HEADER[k]))
            .collect::<Result<_>>()?;
        out.push(GoldenRow {
            fixture: rec[0].to_string(),
            lambda: Complex64::new(v[0], v[1]),
            delta: Complex64::new(v[2], v[3]),
        });
    }
    Ok(out)
}

/// `{params: {name: value, ...}, objective, iterations, converged}` with
/// parameters in family order.
pub fn fit_result_json(result: &FitResult) -> String {
    let mut params = serde_json::Map::new();
    for (name, v) in &result.params {
        params.insert(name.clone(), serde_json::json!(v));
    }
    let mut root = serde_json::Map::new();
    root.insert("params".into(), serde_json::Value::Object(params));
    root.insert("objective".into(), serde_json::json!(result.objective));
    root.insert("iterations".into(), serde_json::json!(result.iterations));
    root.insert("converged".into(), serde_json::json!(result.converged));
    serde_json::to_string_pretty(&serde_json::Value::Object(root)).expect("fit result serialises")
}
