//! Metrics CSV.
//!
//! Header `k,f_bar,f_gap,h_bar,dist_xstar,gamma_k,lambda_k,elapsed_s`,
//! reals in scientific notation with 17 significant digits, `\n` line
//! endings, unknown values as empty fields. When `f*` is an estimate a
//! single `# f_star=<value> estimated` line precedes the header.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::solver::{FStar, Trace, TraceRow};

pub const HEADER: &str = "k,f_bar,f_gap,h_bar,dist_xstar,gamma_k,lambda_k,elapsed_s";

fn real(v: f64) -> String {
    format!("{v:.16e}")
}

fn opt(v: Option<f64>) -> String {
    v.map(real).unwrap_or_default()
}

pub fn format_metrics_csv(trace: &Trace) -> String {
    let mut out = String::new();
    if let Some(FStar { value, estimated: true }) = trace.f_star {
        out.push_str(&format!("# f_star={} estimated\n", real(value)));
    }
    out.push_str(HEADER);
    out.push('\n');
    for r in &trace.rows {
        let fields = [
            r.k.to_string(),
            real(r.f_bar),
            opt(r.f_gap),
            real(r.h_bar),
            opt(r.dist_xstar),
            real(r.gamma_k),
            real(r.lambda_k),
            opt(r.elapsed_s),
        ];
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

pub fn emit_metrics_csv(trace: &Trace, path: impl AsRef<Path>) -> Result<()> {
    if trace.rows.is_empty() {
        return Err(Error::invalid("refusing to write an empty trace"));
    }
    let path = path.as_ref();
    fs::write(path, format_metrics_csv(trace)).map_err(|e| Error::io(path, e))
}

pub fn read_metrics_csv(path: impl AsRef<Path>) -> Result<Trace> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_metrics_csv(&text, path)
}

pub fn parse_metrics_csv(text: &str, origin: &Path) -> Result<Trace> {
    let err = |line: usize, msg: String| Error::Parse {
        path: origin.to_path_buf(),
        line,
        msg,
    };
    let mut trace = Trace::default();
    let mut seen_header = false;
    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        if let Some(comment) = line.strip_prefix('#') {
            if let Some(rest) = comment.trim().strip_prefix("f_star=") {
                let value = rest
                    .split_whitespace()
                    .next()
                    .and_then(|v| v.parse().ok())
                    .ok_or_else(|| err(lineno, format!("bad f_star comment {line:?}")))?;
                trace.f_star = Some(FStar {
                    value,
                    estimated: rest.contains("estimated"),
                });
            }
            continue;
        }
        if !seen_header {
            if line != HEADER {
                return Err(err(lineno, format!("expected header {HEADER:?}")));
            }
            seen_header = true;
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 8 {
            return Err(err(lineno, format!("expected 8 fields, found {}", f.len())));
        }
        let req = |s: &str| -> Result<f64> {
            s.parse().map_err(|_| err(lineno, format!("bad number {s:?}")))
        };
        let optional = |s: &str| -> Result<Option<f64>> {
            if s.is_empty() {
                Ok(None)
            } else {
                req(s).map(Some)
            }
        };
        trace.rows.push(TraceRow {
            k: f[0].parse().map_err(|_| err(lineno, format!("bad iteration {:?}", f[0])))?,
            f_bar: req(f[1])?,
            f_gap: optional(f[2])?,
            h_bar: req(f[3])?,
            dist_xstar: optional(f[4])?,
            gamma_k: req(f[5])?,
            lambda_k: req(f[6])?,
            elapsed_s: optional(f[7])?,
        });
    }
    if !seen_header {
        return Err(err(0, "missing header".into()));
    }
    Ok(trace)
}
