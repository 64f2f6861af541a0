//! Plain-text serialization: instance files, stationary-point sidecars,
//! trace CSVs, and rate-report blocks.
//!
//! Floats are written in scientific notation with the shortest digit string
//! that round-trips exactly, so files are byte-deterministic and lossless.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::{DMatrix, DVector};

use crate::analysis::RateReport;
use crate::error::{Error, Result};
use crate::instances::{StationaryPoint2D, SyntheticInstance};
use crate::problem::{realify_problem, ComplexProblem, RealProblem, UnitModulusPoint};
use crate::solvers::SolverTrace;

const REAL_HEADER: &str = "UMLS v1";
const COMPLEX_HEADER: &str = "UMLS-COMPLEX v1";
const META_HEADER: &str = "UMLS-META v1";

/// Lossless round-trip formatting for a float.
pub fn fmt_float(x: f64) -> String {
    format!("{x:e}")
}

fn fmt_row(row: impl Iterator<Item = f64>) -> String {
    row.map(fmt_float).collect::<Vec<_>>().join(" ")
}

fn parse_float(tok: &str, what: &str) -> Result<f64> {
    tok.parse::<f64>()
        .map_err(|_| Error::Parse(format!("bad float {tok:?} in {what}")))
}

fn parse_row(line: &str, expected: usize, what: &str) -> Result<Vec<f64>> {
    let vals = line
        .split_whitespace()
        .map(|t| parse_float(t, what))
        .collect::<Result<Vec<f64>>>()?;
    if vals.len() != expected {
        return Err(Error::Parse(format!(
            "{what}: expected {expected} values per line, got {}",
            vals.len()
        )));
    }
    Ok(vals)
}

/// Serializes a real instance: header `UMLS v1 M N`, then the 2M rows of A,
/// then b on one line.
pub fn instance_to_string(p: &RealProblem) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{REAL_HEADER} {} {}", p.m(), p.n());
    for i in 0..2 * p.m() {
        let _ = writeln!(out, "{}", fmt_row((0..2 * p.n()).map(|j| p.a()[(i, j)])));
    }
    let _ = writeln!(out, "{}", fmt_row(p.b().iter().copied()));
    out
}

/// Serializes complex input as two real matrices in the same layout:
/// header `UMLS-COMPLEX v1 M N`, M rows of Re(Φ), M rows of Im(Φ), then
/// Re(h) and Im(h) on one line each.
pub fn complex_instance_to_string(cp: &ComplexProblem) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{COMPLEX_HEADER} {} {}", cp.m(), cp.n());
    for part in [cp.phi_re(), cp.phi_im()] {
        for i in 0..cp.m() {
            let _ = writeln!(out, "{}", fmt_row((0..cp.n()).map(|j| part[(i, j)])));
        }
    }
    let _ = writeln!(out, "{}", fmt_row(cp.h_re().iter().copied()));
    let _ = writeln!(out, "{}", fmt_row(cp.h_im().iter().copied()));
    out
}

/// Parses an instance in either the real or the complex layout; complex
/// data is realified on the way in.
pub fn instance_from_str(text: &str) -> Result<RealProblem> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty instance file".into()))?;
    let toks: Vec<&str> = header.split_whitespace().collect();
    let (kind, rest) = match toks.as_slice() {
        ["UMLS", "v1", m, n] => (REAL_HEADER, (*m, *n)),
        ["UMLS-COMPLEX", "v1", m, n] => (COMPLEX_HEADER, (*m, *n)),
        _ => {
            return Err(Error::Parse(format!(
                "unrecognized instance header {header:?}"
            )))
        }
    };
    let m: usize = rest
        .0
        .parse()
        .map_err(|_| Error::Parse(format!("bad M {:?}", rest.0)))?;
    let n: usize = rest
        .1
        .parse()
        .map_err(|_| Error::Parse(format!("bad N {:?}", rest.1)))?;
    if m == 0 || n == 0 {
        return Err(Error::Parse("instance must have M, N >= 1".into()));
    }

    let mut take_row = |count: usize, what: &str| -> Result<Vec<f64>> {
        let line = lines
            .next()
            .ok_or_else(|| Error::Parse(format!("missing line for {what}")))?;
        parse_row(line, count, what)
    };

    if kind == REAL_HEADER {
        let mut a = DMatrix::<f64>::zeros(2 * m, 2 * n);
        for i in 0..2 * m {
            let row = take_row(2 * n, "A row")?;
            for (j, v) in row.into_iter().enumerate() {
                a[(i, j)] = v;
            }
        }
        let b = DVector::from_vec(take_row(2 * m, "b")?);
        RealProblem::new(a, b)
    } else {
        let mut phi_re = DMatrix::<f64>::zeros(m, n);
        for i in 0..m {
            let row = take_row(n, "Re(Phi) row")?;
            for (j, v) in row.into_iter().enumerate() {
                phi_re[(i, j)] = v;
            }
        }
        let mut phi_im = DMatrix::<f64>::zeros(m, n);
        for i in 0..m {
            let row = take_row(n, "Im(Phi) row")?;
            for (j, v) in row.into_iter().enumerate() {
                phi_im[(i, j)] = v;
            }
        }
        let h_re = DVector::from_vec(take_row(m, "Re(h)")?);
        let h_im = DVector::from_vec(take_row(m, "Im(h)")?);
        let cp = ComplexProblem::new(phi_re, phi_im, h_re, h_im)?;
        Ok(realify_problem(&cp))
    }
}

pub fn write_instance(p: &RealProblem, path: &Path) -> Result<()> {
    std::fs::write(path, instance_to_string(p))?;
    Ok(())
}

pub fn read_instance(path: &Path) -> Result<RealProblem> {
    instance_from_str(&std::fs::read_to_string(path)?)
}

/// Sidecar fields of a synthetic instance: the planted point, multipliers,
/// and generation parameters.
#[derive(Debug, Clone)]
pub struct InstanceMeta {
    pub seed: u64,
    pub retries: u32,
    pub sigma_v: f64,
    pub x_star: DVector<f64>,
    pub gamma: DVector<f64>,
}

pub fn meta_to_string(inst: &SyntheticInstance) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{META_HEADER}");
    let _ = writeln!(out, "seed={}", inst.seed);
    let _ = writeln!(out, "retries={}", inst.retries_used);
    let _ = writeln!(out, "sigma_v={}", fmt_float(inst.sigma_v));
    let _ = writeln!(out, "x_star={}", fmt_row(inst.x_star.as_vector().iter().copied()));
    let _ = writeln!(out, "gamma={}", fmt_row(inst.gamma_planted.iter().copied()));
    out
}

pub fn meta_from_str(text: &str) -> Result<InstanceMeta> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty sidecar".into()))?;
    if header.trim() != META_HEADER {
        return Err(Error::Parse(format!("unrecognized sidecar header {header:?}")));
    }
    let mut seed = None;
    let mut retries = None;
    let mut sigma_v = None;
    let mut x_star = None;
    let mut gamma = None;
    for line in lines {
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("sidecar line without '=': {line:?}")))?;
        match key.trim() {
            "seed" => {
                seed = Some(value.trim().parse::<u64>().map_err(|_| {
                    Error::Parse(format!("bad seed {value:?}"))
                })?)
            }
            "retries" => {
                retries = Some(value.trim().parse::<u32>().map_err(|_| {
                    Error::Parse(format!("bad retries {value:?}"))
                })?)
            }
            "sigma_v" => sigma_v = Some(parse_float(value.trim(), "sigma_v")?),
            "x_star" => {
                let vals = value
                    .split_whitespace()
                    .map(|t| parse_float(t, "x_star"))
                    .collect::<Result<Vec<f64>>>()?;
                x_star = Some(DVector::from_vec(vals));
            }
            "gamma" => {
                let vals = value
                    .split_whitespace()
                    .map(|t| parse_float(t, "gamma"))
                    .collect::<Result<Vec<f64>>>()?;
                gamma = Some(DVector::from_vec(vals));
            }
            other => return Err(Error::Parse(format!("unknown sidecar key {other:?}"))),
        }
    }
    Ok(InstanceMeta {
        seed: seed.ok_or_else(|| Error::Parse("sidecar missing seed".into()))?,
        retries: retries.ok_or_else(|| Error::Parse("sidecar missing retries".into()))?,
        sigma_v: sigma_v.ok_or_else(|| Error::Parse("sidecar missing sigma_v".into()))?,
        x_star: x_star.ok_or_else(|| Error::Parse("sidecar missing x_star".into()))?,
        gamma: gamma.ok_or_else(|| Error::Parse("sidecar missing gamma".into()))?,
    })
}

/// Conventional sidecar path: `<instance>.meta`.
pub fn meta_path(instance_path: &Path) -> std::path::PathBuf {
    let mut os = instance_path.as_os_str().to_owned();
    os.push(".meta");
    std::path::PathBuf::from(os)
}

pub fn write_instance_with_meta(inst: &SyntheticInstance, path: &Path) -> Result<()> {
    write_instance(&inst.problem, path)?;
    std::fs::write(meta_path(path), meta_to_string(inst))?;
    Ok(())
}

pub fn read_meta(instance_path: &Path) -> Result<InstanceMeta> {
    meta_from_str(&std::fs::read_to_string(meta_path(instance_path))?)
}

impl InstanceMeta {
    pub fn x_star_point(&self) -> Result<UnitModulusPoint> {
        UnitModulusPoint::new(self.x_star.clone())
    }
}

/// Trace CSV: `k,f,eta,gg_norm,err,restarted`, one row per iterate, full
/// round-trip precision. The `err` field is empty when the run had no
/// reference point; `restarted` is 0/1.
pub fn trace_to_csv(trace: &SolverTrace) -> String {
    let mut out = String::from("k,f,eta,gg_norm,err,restarted\n");
    for r in &trace.records {
        let err = r.err_to_ref.map(fmt_float).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.k,
            fmt_float(r.f),
            fmt_float(r.eta),
            fmt_float(r.gen_grad_norm),
            err,
            if r.restarted { 1 } else { 0 }
        );
    }
    out
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_float).unwrap_or_else(|| "nan".into())
}

/// Key-value block for a rate report, one `name=value` per line.
pub fn rate_report_to_kv(r: &RateReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "eta={}", fmt_float(r.eta));
    let _ = writeln!(out, "rho={}", fmt_opt(r.rho));
    let _ = writeln!(out, "c1_ok={}", r.c1_ok);
    let _ = writeln!(out, "c2_ok={}", r.c2_ok);
    let _ = writeln!(out, "c3_ok={}", r.c3_ok);
    let _ = writeln!(out, "c3prime_ok={}", r.c3prime_ok);
    let _ = writeln!(out, "fixed_point_ok={}", r.fixed_point_ok);
    let _ = writeln!(out, "c0={}", fmt_opt(r.c0));
    let _ = writeln!(out, "c1_radius={}", fmt_opt(r.c1_radius));
    out
}

pub const RATE_REPORT_CSV_HEADER: &str =
    "eta,rho,c1_ok,c2_ok,c3_ok,c3prime_ok,fp_ok,c0,c1_radius";

/// One CSV row matching [`RATE_REPORT_CSV_HEADER`], for step-size sweeps.
pub fn rate_report_to_csv_row(r: &RateReport) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{}",
        fmt_float(r.eta),
        fmt_opt(r.rho),
        r.c1_ok as u8,
        r.c2_ok as u8,
        r.c3_ok as u8,
        r.c3prime_ok as u8,
        r.fixed_point_ok as u8,
        fmt_opt(r.c0),
        fmt_opt(r.c1_radius),
    )
}

/// Stationary points of the 2-D example as CSV: `t,x1,x2,gamma,h,kind`.
pub fn stationary_points_to_csv(points: &[StationaryPoint2D]) -> String {
    let mut out = String::from("t,x1,x2,gamma,h,kind\n");
    for s in points {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            fmt_float(s.angle),
            fmt_float(s.x.as_vector()[0]),
            fmt_float(s.x.as_vector()[1]),
            fmt_float(s.gamma),
            fmt_float(s.h),
            s.kind.as_str()
        );
    }
    out
}
