//! Parameter grids, angle expressions and the deterministic CSV/JSON output
//! used by the command-line front end.
//!
//! Angle grammar:
//!
//! ```text
//! range  := expr | expr ':' expr ':' count
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := ('+' | '-') unary | atom
//! atom   := number atom? | 'pi' | 'inf' | '(' expr ')'
//! ```
//!
//! A number directly followed by an atom multiplies it, so `2pi/3` works.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize, Serializer};

use crate::analytics::{formula, router_formula, scaling_fit, simulate, Protocol, ScalingFit};
use crate::error::{Error, Result};
use crate::protocols::{router_outcomes, WorkingPoint};
use crate::rydberg::{loss_from_phase_on, Branch};

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.src[self.pos..].chars().next()
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.src[self.pos..].chars().next() {
            if !c.is_whitespace() {
                break;
            }
            self.pos += c.len_utf8();
        }
    }

    fn error(&self, what: &str) -> Error {
        Error::invalid(format!("{what} at position {} in '{}'", self.pos, self.src))
    }

    fn expr(&mut self) -> Result<f64> {
        let mut v = self.term()?;
        while let Some(c @ ('+' | '-')) = self.peek() {
            self.pos += 1;
            let rhs = self.term()?;
            v = if c == '+' { v + rhs } else { v - rhs };
        }
        Ok(v)
    }

    fn term(&mut self) -> Result<f64> {
        let mut v = self.unary()?;
        while let Some(c @ ('*' | '/')) = self.peek() {
            self.pos += 1;
            let rhs = self.unary()?;
            v = if c == '*' { v * rhs } else { v / rhs };
        }
        Ok(v)
    }

    fn unary(&mut self) -> Result<f64> {
        match self.peek() {
            Some('-') => {
                self.pos += 1;
                Ok(-self.unary()?)
            }
            Some('+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.atom(),
        }
    }

    fn atom(&mut self) -> Result<f64> {
        let rest = &self.src[self.pos..];
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                let v = self.expr()?;
                if self.peek() != Some(')') {
                    return Err(self.error("expected ')'"));
                }
                self.pos += 1;
                Ok(v)
            }
            Some(c) if c.is_ascii_digit() || c == '.' => {
                let v = self.number()?;
                match self.peek() {
                    Some(n) if n == '(' || n.is_ascii_alphabetic() => Ok(v * self.atom()?),
                    _ => Ok(v),
                }
            }
            Some(_) => {
                let rest = rest.trim_start();
                let word: String = rest.chars().take_while(|c| c.is_ascii_alphabetic()).collect();
                let value = match word.to_ascii_lowercase().as_str() {
                    "pi" => std::f64::consts::PI,
                    "inf" | "infinity" => f64::INFINITY,
                    _ => return Err(self.error("expected a number, 'pi' or 'inf'")),
                };
                self.pos += word.len();
                Ok(value)
            }
            None => Err(self.error("unexpected end of expression")),
        }
    }

    fn number(&mut self) -> Result<f64> {
        let bytes = self.src.as_bytes();
        let start = self.pos;
        let mut i = start;
        while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
            i += 1;
        }
        if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
            let mut j = i + 1;
            if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                j += 1;
            }
            if j < bytes.len() && bytes[j].is_ascii_digit() {
                while j < bytes.len() && bytes[j].is_ascii_digit() {
                    j += 1;
                }
                i = j;
            }
        }
        self.pos = i;
        self.src[start..i].parse().map_err(|_| self.error("malformed number"))
    }
}

/// Evaluates a scalar angle or depth expression such as `pi/3` or `inf`.
pub fn parse_value(src: &str) -> Result<f64> {
    let mut p = Parser { src, pos: 0 };
    let v = p.expr()?;
    if p.peek().is_some() {
        return Err(p.error("trailing input"));
    }
    if v.is_nan() {
        return Err(Error::invalid(format!("'{src}' is not a number")));
    }
    Ok(v)
}

/// `start:stop:count` (inclusive, evenly spaced) or a single value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhiRange {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

impl PhiRange {
    pub fn single(phi: f64) -> Self {
        PhiRange { start: phi, stop: phi, points: 1 }
    }

    pub fn values(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.start];
        }
        let n = (self.points - 1) as f64;
        (0..self.points)
            .map(|k| {
                if k + 1 == self.points {
                    self.stop
                } else {
                    self.start + (self.stop - self.start) * k as f64 / n
                }
            })
            .collect()
    }
}

pub fn parse_range(src: &str) -> Result<PhiRange> {
    let parts: Vec<&str> = src.split(':').collect();
    match parts.as_slice() {
        [v] => Ok(PhiRange::single(parse_value(v)?)),
        [a, b, n] => {
            let points: usize = n
                .trim()
                .parse()
                .map_err(|_| Error::invalid(format!("point count '{n}' is not a positive integer")))?;
            if points < 2 {
                return Err(Error::invalid("a range needs at least two points"));
            }
            let (start, stop) = (parse_value(a)?, parse_value(b)?);
            if !start.is_finite() || !stop.is_finite() || stop <= start {
                return Err(Error::invalid(format!("range '{src}' must be finite and increasing")));
            }
            Ok(PhiRange { start, stop, points })
        }
        _ => Err(Error::invalid(format!("'{src}' is neither a value nor start:stop:count"))),
    }
}

/// Comma-separated list of values, e.g. `30,60,inf`.
pub fn parse_list(src: &str) -> Result<Vec<f64>> {
    let values: Vec<f64> = src.split(',').map(parse_value).collect::<Result<_>>()?;
    if values.is_empty() {
        return Err(Error::invalid("empty list"));
    }
    Ok(values)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    Formula,
    Simulator,
    Both,
}

impl std::str::FromStr for Engine {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "formula" => Ok(Engine::Formula),
            "simulator" | "sim" => Ok(Engine::Simulator),
            "both" => Ok(Engine::Both),
            _ => Err(Error::invalid(format!("unknown engine '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            _ => Err(Error::invalid(format!("unknown format '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub protocol: Protocol,
    pub phi: PhiRange,
    pub od_b: Vec<f64>,
    pub p_de: Vec<f64>,
    /// `φ₁ = phi1_ratio · φ`.
    pub phi1_ratio: f64,
    pub engine: Engine,
    pub format: OutputFormat,
}

impl SweepConfig {
    pub fn new(protocol: Protocol, phi: PhiRange, od_b: Vec<f64>, p_de: Vec<f64>) -> Self {
        SweepConfig { protocol, phi, od_b, p_de, phi1_ratio: 0.0, engine: Engine::Formula, format: OutputFormat::Csv }
    }

    pub fn validate(&self) -> Result<()> {
        if self.phi.points == 0 {
            return Err(Error::invalid("phase grid is empty"));
        }
        if self.od_b.is_empty() || self.p_de.is_empty() {
            return Err(Error::invalid("od_b and p_de lists must be non-empty"));
        }
        if let Some(od) = self.od_b.iter().find(|&&od| od.is_nan() || od <= 0.0) {
            return Err(Error::invalid(format!("OD_b must be positive, got {od}")));
        }
        if let Some(p) = self.p_de.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(Error::invalid(format!("p_de = {p} is not a probability")));
        }
        if !self.phi1_ratio.is_finite() {
            return Err(Error::invalid("phi1 ratio must be finite"));
        }
        Ok(())
    }
}

fn serialize_depth<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_infinite() {
        s.serialize_str("inf")
    } else {
        s.serialize_f64(*v)
    }
}

/// One output row.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRecord {
    pub phi: f64,
    #[serde(serialize_with = "serialize_depth")]
    pub od_b: f64,
    pub p_de: f64,
    pub phi1: f64,
    pub protocol: String,
    pub engine: String,
    pub probability: Option<f64>,
    pub status: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutput {
    pub records: Vec<SweepRecord>,
    /// Largest `|formula − simulator|`, present for [`Engine::Both`].
    pub max_abs_diff: Option<f64>,
}

/// Values per engine at one grid point, keyed by output protocol label.
fn evaluate(protocol: Protocol, engine: Engine, wp: &WorkingPoint) -> Result<Option<Vec<(String, f64)>>> {
    let run = |sim: bool| -> Result<Vec<(String, f64)>> {
        if protocol == Protocol::Router {
            let r = if sim { router_outcomes(wp)? } else { router_formula(wp)? };
            Ok(vec![("router_uu".into(), r.uu), ("router_uw".into(), r.uw), ("router_ww".into(), r.ww)])
        } else {
            let v = if sim { simulate(protocol, wp)? } else { formula(protocol, wp)? };
            Ok(vec![(protocol.name().into(), v)])
        }
    };
    let (f, s) = match engine {
        Engine::Formula => (Some(run(false)), None),
        Engine::Simulator => (None, Some(run(true))),
        Engine::Both => (Some(run(false)), Some(run(true))),
    };
    let mut rows: Vec<(String, f64)> = Vec::new();
    for r in [f, s].into_iter().flatten() {
        match r {
            Ok(v) => rows.extend(v),
            Err(Error::UnreachablePhase { .. }) => return Ok(None),
            Err(e) => return Err(e),
        }
    }
    Ok(Some(rows))
}

fn engine_labels(engine: Engine) -> &'static [&'static str] {
    match engine {
        Engine::Formula => &["formula"],
        Engine::Simulator => &["simulator"],
        Engine::Both => &["formula", "simulator"],
    }
}

fn points(config: &SweepConfig) -> Vec<WorkingPoint> {
    let mut out = Vec::new();
    for phi in config.phi.values() {
        for &od in &config.od_b {
            for &p in &config.p_de {
                out.push(WorkingPoint::new(phi, od, p).with_phi1(config.phi1_ratio * phi));
            }
        }
    }
    out
}

#[cfg(feature = "parallel")]
fn map_points<T: Send>(pts: &[WorkingPoint], f: impl Fn(&WorkingPoint) -> T + Sync + Send) -> Vec<T> {
    use rayon::prelude::*;
    pts.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
fn map_points<T>(pts: &[WorkingPoint], f: impl Fn(&WorkingPoint) -> T) -> Vec<T> {
    pts.iter().map(f).collect()
}

/// Caps the worker pool used by [`run_sweep`]. Must be called before the
/// first sweep; later calls fail.
#[cfg(feature = "parallel")]
pub fn configure_threads(n: usize) -> Result<()> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::invalid(format!("cannot configure worker pool: {e}")))
}

#[cfg(not(feature = "parallel"))]
pub fn configure_threads(_n: usize) -> Result<()> {
    Ok(())
}

/// Evaluates the grid φ-major, then `od_b`, then `p_de`. Points are computed
/// concurrently but emitted in grid order.
pub fn run_sweep(config: &SweepConfig) -> Result<SweepOutput> {
    config.validate()?;
    let pts = points(config);
    let values = map_points(&pts, |wp| evaluate(config.protocol, config.engine, wp));
    let labels = engine_labels(config.engine);
    let mut records = Vec::new();
    let mut max_abs_diff: Option<f64> = (config.engine == Engine::Both).then_some(0.0);
    for (wp, v) in pts.iter().zip(values) {
        let base = |protocol: &str, engine: &str, probability: Option<f64>, status: &str| SweepRecord {
            phi: wp.phi,
            od_b: wp.od_b,
            p_de: wp.p_de,
            phi1: wp.phi1,
            protocol: protocol.to_string(),
            engine: engine.to_string(),
            probability,
            status: status.to_string(),
        };
        match v? {
            None => {
                let names: Vec<String> = if config.protocol == Protocol::Router {
                    ["router_uu", "router_uw", "router_ww"].map(String::from).to_vec()
                } else {
                    vec![config.protocol.name().to_string()]
                };
                for name in &names {
                    for e in labels {
                        records.push(base(name, e, None, "unreachable"));
                    }
                    if config.engine == Engine::Both {
                        records.push(base(name, "abs_diff", None, "unreachable"));
                    }
                }
            }
            Some(rows) => {
                let width = rows.len() / labels.len();
                for k in 0..width {
                    let name = &rows[k].0;
                    for (j, e) in labels.iter().enumerate() {
                        records.push(base(name, e, Some(rows[j * width + k].1), "ok"));
                    }
                    if config.engine == Engine::Both {
                        let d = (rows[k].1 - rows[width + k].1).abs();
                        max_abs_diff = max_abs_diff.map(|m| m.max(d));
                        records.push(base(name, "abs_diff", Some(d), "ok"));
                    }
                }
            }
        }
    }
    Ok(SweepOutput { records, max_abs_diff })
}

/// Twelve significant digits in scientific notation; `inf` for infinity.
pub fn fmt_num(v: f64) -> String {
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let v = if v == 0.0 { 0.0 } else { v };
    format!("{v:.11e}")
}

pub const CSV_HEADER: &str = "phi,od_b,p_de,phi1,protocol,engine,probability,status";

pub fn render_sweep(out: &SweepOutput, format: OutputFormat) -> Result<String> {
    match format {
        OutputFormat::Csv => {
            let mut s = String::new();
            s.push_str(CSV_HEADER);
            s.push('\n');
            for r in &out.records {
                let _ = writeln!(
                    s,
                    "{},{},{},{},{},{},{},{}",
                    fmt_num(r.phi),
                    fmt_num(r.od_b),
                    fmt_num(r.p_de),
                    fmt_num(r.phi1),
                    r.protocol,
                    r.engine,
                    r.probability.map(fmt_num).unwrap_or_default(),
                    r.status
                );
            }
            if let Some(d) = out.max_abs_diff {
                let _ = writeln!(s, "# max_abs_diff,{}", fmt_num(d));
            }
            Ok(s)
        }
        OutputFormat::Json => {
            let mut s = serde_json::to_string_pretty(&out.records)
                .map_err(|e| Error::invalid(format!("cannot serialize records: {e}")))?;
            s.push('\n');
            Ok(s)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CircleRow {
    pub od_b: f64,
    pub branch: Branch,
    pub phi: f64,
    pub epsilon: f64,
    pub tau: f64,
}

/// Both circle branches on `points` phases from 0 to `OD_b/4` per depth.
pub fn circle_rows(od_bs: &[f64], points: usize) -> Result<Vec<CircleRow>> {
    if points < 2 {
        return Err(Error::invalid("circle needs at least two points"));
    }
    let mut rows = Vec::new();
    for &od in od_bs {
        if !od.is_finite() {
            return Err(Error::invalid("circle needs a finite OD_b"));
        }
        let apex = od / 4.0;
        for branch in [Branch::Lower, Branch::Upper] {
            for phi in (PhiRange { start: 0.0, stop: apex, points }).values() {
                let p = loss_from_phase_on(phi, od, branch)?;
                rows.push(CircleRow { od_b: od, branch, phi, epsilon: p.epsilon, tau: p.tau });
            }
        }
    }
    Ok(rows)
}

pub fn render_circle(rows: &[CircleRow]) -> String {
    let mut s = String::from("od_b,branch,phi,epsilon,tau\n");
    for r in rows {
        let branch = match r.branch {
            Branch::Lower => "lower",
            Branch::Upper => "upper",
        };
        let _ = writeln!(s, "{},{},{},{},{}", fmt_num(r.od_b), branch, fmt_num(r.phi), fmt_num(r.epsilon), fmt_num(r.tau));
    }
    s
}

pub fn opt_phase(protocol: Protocol, od_bs: &[f64], p_de: f64) -> Result<ScalingFit> {
    scaling_fit(protocol, od_bs, p_de)
}

pub fn render_opt_phase(fit: &ScalingFit) -> String {
    let mut s = String::from("od_b,phi_opt,p_opt\n");
    for p in &fit.points {
        let _ = writeln!(s, "{},{},{}", fmt_num(p.od_b), fmt_num(p.phi_opt), fmt_num(p.p_opt));
    }
    let _ = writeln!(s, "# protocol,{}", fit.protocol);
    let _ = writeln!(s, "# fit_exponent_phase,{}", fmt_num(fit.fit_exponent_phase));
    let _ = writeln!(s, "# fit_exponent_infidelity,{}", fmt_num(fit.fit_exponent_infidelity));
    s
}
