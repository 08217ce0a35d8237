//! Text and JSON rendering of verification reports.

use doublepole::identities::{registry, Params, SelftestSummary, Status, VerificationReport};
use serde::Serialize;

use crate::Format;

/// `println!` that ignores a closed stdout.
macro_rules! emit {
    ($($arg:tt)*) => {{
        use std::io::Write;
        let _ = writeln!(std::io::stdout().lock(), $($arg)*);
    }};
}

#[derive(Serialize)]
struct FirstMismatch<'a> {
    /// In units of `q^(1/grain)`.
    exponent: usize,
    grain: u32,
    lhs: &'a str,
    rhs: &'a str,
}

#[derive(Serialize)]
struct JsonReport<'a> {
    id: &'a str,
    params: &'a Params,
    order: usize,
    grain: u32,
    status: &'static str,
    first_mismatch: Option<FirstMismatch<'a>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    elapsed_ms: Option<f64>,
}

pub struct Output {
    format: Format,
    timing: bool,
}

impl Output {
    pub fn new(format: Format, timing: bool) -> Self {
        Output { format, timing }
    }

    fn json<'a>(&self, r: &'a VerificationReport) -> JsonReport<'a> {
        let first_mismatch = match &r.status {
            Status::Equal => None,
            Status::Mismatch { exponent, lhs, rhs } => Some(FirstMismatch {
                exponent: *exponent,
                grain: r.grain,
                lhs,
                rhs,
            }),
        };
        JsonReport {
            id: &r.id,
            params: &r.params,
            order: r.order,
            grain: r.grain,
            status: r.status.name(),
            first_mismatch,
            elapsed_ms: self.timing.then_some(r.elapsed.as_secs_f64() * 1e3),
        }
    }

    fn line(&self, r: &VerificationReport) -> String {
        if self.timing {
            format!("{r} [{:.1} ms]", r.elapsed.as_secs_f64() * 1e3)
        } else {
            r.to_string()
        }
    }

    pub fn single(&self, r: &VerificationReport) {
        match self.format {
            Format::Text => emit!("{}", self.line(r)),
            Format::Json => emit!(
                "{}",
                serde_json::to_string_pretty(&self.json(r)).expect("serializable")
            ),
        }
    }

    pub fn many(&self, reports: &[VerificationReport]) {
        match self.format {
            Format::Text => {
                for r in reports {
                    emit!("{}", self.line(r));
                }
                let equal = reports.iter().filter(|r| r.status.is_equal()).count();
                emit!(
                    "{} cases: {equal} equal, {} mismatch",
                    reports.len(),
                    reports.len() - equal
                );
            }
            Format::Json => {
                let docs: Vec<_> = reports.iter().map(|r| self.json(r)).collect();
                emit!(
                    "{}",
                    serde_json::to_string_pretty(&docs).expect("serializable")
                );
            }
        }
    }
}

#[derive(Serialize)]
struct JsonCase {
    id: &'static str,
    summary: &'static str,
    params: Vec<&'static str>,
    grid_size: usize,
}

pub fn list(format: Format) {
    let cases: Vec<JsonCase> = registry()
        .iter()
        .map(|c| JsonCase {
            id: c.id,
            summary: c.summary,
            params: c.keys.iter().map(|k| k.name()).collect(),
            grid_size: c.grid().len(),
        })
        .collect();
    match format {
        Format::Text => {
            for c in &cases {
                let params = if c.params.is_empty() {
                    "-".to_string()
                } else {
                    c.params.join(",")
                };
                emit!("{:<16} [{params}] {}", c.id, c.summary);
            }
        }
        Format::Json => emit!(
            "{}",
            serde_json::to_string_pretty(&cases).expect("serializable")
        ),
    }
}

pub fn selftest(format: Format, s: &SelftestSummary) {
    match format {
        Format::Text => {
            for c in &s.checks {
                let mark = if c.passed { "PASS" } else { "FAIL" };
                emit!("{mark} {}: {}", c.name, c.detail);
            }
            emit!("{} passed, {} failed", s.passed, s.failed);
        }
        Format::Json => emit!("{}", serde_json::to_string_pretty(s).expect("serializable")),
    }
}
