//! Line-oriented wire protocol for external scalarization solvers.
//!
//! Every record is one JSON object on one line. The engine sends
//! `{"query_id":N,"p":[..],"q":[..]}` and finally `{"done":true}`; the solver
//! answers each query with `{"query_id":N,"alpha":a,"z":[..],"lambda":[..]}`
//! (optionally `"x":[..]`), or `{"query_id":N,"no_intersection":true}` when
//! the search line misses the image set. Numbers carry 17 significant digits,
//! enough to round-trip any `f64`.

use std::io::{BufRead, Write};

use serde_json::{Map, Value};

use super::{PsQuery, PsSolution, PsSolver, SolveError};

/// `%.17g`-style rendering: shortest of fixed and exponent notation, trailing
/// zeros removed, always 17 significant digits of precision.
pub fn format_number(v: f64) -> String {
    if !v.is_finite() {
        // not representable in JSON; callers validate finiteness first
        return if v.is_nan() { "nan".into() } else if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return if v.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{:.16e}", v);
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    let (sign, mantissa) = match mantissa.strip_prefix('-') {
        Some(rest) => ("-", rest),
        None => ("", mantissa),
    };
    let digits: String = mantissa.chars().filter(|c| *c != '.').collect();
    if !(-4..17).contains(&exp) {
        let frac = digits[1..].trim_end_matches('0');
        let esign = if exp < 0 { '-' } else { '+' };
        return if frac.is_empty() {
            format!("{sign}{}e{esign}{:02}", &digits[..1], exp.abs())
        } else {
            format!("{sign}{}.{frac}e{esign}{:02}", &digits[..1], exp.abs())
        };
    }
    let (int_part, frac) = if exp >= 0 {
        let e = exp as usize + 1;
        (digits[..e].to_string(), digits[e..].to_string())
    } else {
        ("0".to_string(), "0".repeat((-exp - 1) as usize) + &digits)
    };
    let frac = frac.trim_end_matches('0');
    if frac.is_empty() {
        format!("{sign}{int_part}")
    } else {
        format!("{sign}{int_part}.{frac}")
    }
}

fn push_array(out: &mut String, key: &str, values: &[f64]) {
    out.push_str(",\"");
    out.push_str(key);
    out.push_str("\":[");
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push_str(&format_number(*v));
    }
    out.push(']');
}

/// Engine → solver query record, without the trailing newline.
pub fn encode_query(query: &PsQuery) -> String {
    let mut out = format!("{{\"query_id\":{}", query.query_id);
    push_array(&mut out, "p", &query.p);
    push_array(&mut out, "q", &query.q);
    out.push('}');
    out
}

/// Engine → solver termination record.
pub fn encode_done() -> String {
    "{\"done\":true}".to_string()
}

/// Solver → engine answer record.
pub fn encode_solution(sol: &PsSolution) -> String {
    let mut out = format!("{{\"query_id\":{},\"alpha\":{}", sol.query_id, format_number(sol.alpha));
    push_array(&mut out, "z", &sol.z);
    push_array(&mut out, "lambda", &sol.lambda);
    if let Some(x) = &sol.decision {
        push_array(&mut out, "x", x);
    }
    out.push('}');
    out
}

/// Solver → engine record for a search line that misses the image set.
pub fn encode_no_intersection(query_id: u64) -> String {
    format!("{{\"query_id\":{query_id},\"no_intersection\":true}}")
}

fn protocol(msg: impl Into<String>) -> SolveError {
    SolveError::Protocol(msg.into())
}

fn parse_object(line: &str) -> Result<Map<String, Value>, SolveError> {
    match serde_json::from_str::<Value>(line.trim()) {
        Ok(Value::Object(map)) => Ok(map),
        Ok(_) => Err(protocol("record is not a JSON object")),
        Err(e) => Err(protocol(format!("malformed record: {e}"))),
    }
}

fn get_id(map: &Map<String, Value>) -> Result<u64, SolveError> {
    map.get("query_id")
        .ok_or_else(|| protocol("missing field query_id"))?
        .as_u64()
        .ok_or_else(|| protocol("query_id is not a non-negative integer"))
}

fn get_number(map: &Map<String, Value>, key: &str) -> Result<f64, SolveError> {
    map.get(key)
        .ok_or_else(|| protocol(format!("missing field {key}")))?
        .as_f64()
        .ok_or_else(|| protocol(format!("{key} is not a number")))
}

fn get_array(map: &Map<String, Value>, key: &str) -> Result<Vec<f64>, SolveError> {
    let arr = map
        .get(key)
        .ok_or_else(|| protocol(format!("missing field {key}")))?
        .as_array()
        .ok_or_else(|| protocol(format!("{key} is not an array")))?;
    arr.iter()
        .map(|v| v.as_f64().ok_or_else(|| protocol(format!("{key} contains a non-number"))))
        .collect()
}

fn is_true(map: &Map<String, Value>, key: &str) -> bool {
    map.get(key).and_then(Value::as_bool) == Some(true)
}

/// Parses a solver answer to the query `expected_id` in dimension `m`.
///
/// A `no_intersection` record yields `Err(SolveError::NoIntersection)`.
pub fn decode_solution(line: &str, expected_id: u64, m: usize) -> Result<PsSolution, SolveError> {
    let map = parse_object(line)?;
    let id = get_id(&map)?;
    if id != expected_id {
        return Err(protocol(format!("answer for query {id}, expected {expected_id}")));
    }
    if is_true(&map, "no_intersection") {
        return Err(SolveError::NoIntersection);
    }
    let alpha = get_number(&map, "alpha")?;
    let z = get_array(&map, "z")?;
    let lambda = get_array(&map, "lambda")?;
    if z.len() != m || lambda.len() != m {
        return Err(protocol(format!(
            "z has {} and lambda {} components, expected {m}",
            z.len(),
            lambda.len()
        )));
    }
    let x = match map.get("x") {
        None | Some(Value::Null) => None,
        Some(_) => Some(get_array(&map, "x")?),
    };
    PsSolution::from_parts(id, alpha, z, lambda, x)
}

/// Solver-side parse of an engine record; `None` for the `done` record.
pub fn decode_query(line: &str) -> Result<Option<PsQuery>, SolveError> {
    let map = parse_object(line)?;
    if is_true(&map, "done") {
        return Ok(None);
    }
    let id = get_id(&map)?;
    let p = get_array(&map, "p")?;
    let q = get_array(&map, "q")?;
    PsQuery::new(id, p, q).map(Some).map_err(|e| protocol(e.to_string()))
}

/// Engine-side endpoint: each solve writes one query and reads one answer.
#[derive(Debug)]
pub struct StreamSolver<R, W> {
    reader: R,
    writer: W,
    lines_read: usize,
    done_sent: bool,
}

impl<R: BufRead, W: Write> StreamSolver<R, W> {
    pub fn new(reader: R, writer: W) -> Self {
        Self { reader, writer, lines_read: 0, done_sent: false }
    }

    /// Number of answer lines consumed so far.
    pub fn lines_read(&self) -> usize {
        self.lines_read
    }

    /// Sends the termination record. Idempotent.
    pub fn finish(&mut self) -> Result<(), SolveError> {
        if !self.done_sent {
            self.done_sent = true;
            writeln!(self.writer, "{}", encode_done()).map_err(|e| SolveError::Io(e.to_string()))?;
            self.writer.flush().map_err(|e| SolveError::Io(e.to_string()))?;
        }
        Ok(())
    }

    pub fn into_inner(self) -> (R, W) {
        (self.reader, self.writer)
    }
}

impl<R: BufRead, W: Write> PsSolver for StreamSolver<R, W> {
    fn solve(&mut self, query: &PsQuery) -> Result<PsSolution, SolveError> {
        if self.done_sent {
            return Err(protocol("query after done"));
        }
        let io = |e: std::io::Error| SolveError::Io(e.to_string());
        writeln!(self.writer, "{}", encode_query(query)).map_err(io)?;
        self.writer.flush().map_err(io)?;
        let mut line = String::new();
        let n = self.reader.read_line(&mut line).map_err(io)?;
        self.lines_read += 1;
        if n == 0 {
            return Err(protocol(format!("line {}: solver closed the stream", self.lines_read)));
        }
        decode_solution(&line, query.query_id, query.dim()).map_err(|e| match e {
            SolveError::Protocol(msg) => protocol(format!("line {}: {msg}", self.lines_read)),
            SolveError::Contract(msg) => SolveError::Contract(format!("line {}: {msg}", self.lines_read)),
            other => other,
        })
    }
}
