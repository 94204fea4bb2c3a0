//! Checkpoint traces and their CSV form.
//!
//! CSV schema (stable): header `epoch,iter,szo_count,f_value,grad_norm_sq,flag`,
//! one row per checkpoint, LF line endings. Floats are written in Rust's
//! shortest round-trip form; a missing gradient norm is an empty cell. `flag`
//! is `1` on the row where a run was truncated by its evaluation budget.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::optimizers::{Algorithm, BaselineConfig, OptimizerConfig};

pub const TRACE_HEADER: &str = "epoch,iter,szo_count,f_value,grad_norm_sq,flag";

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub epoch: usize,
    /// Inner step within the epoch (iteration number for single-loop methods).
    pub iter: usize,
    /// Optimizer iterations completed since the start of the run.
    pub iterations: u64,
    /// Cumulative optimizer evaluations (reporting excluded).
    pub szo_count: u64,
    pub f_value: f64,
    pub grad_norm_sq: Option<f64>,
    /// Elapsed wall time; informational only and never written to CSV.
    pub wall_ms: f64,
    pub truncated: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum RunConfig {
    Szvr(OptimizerConfig),
    Baseline(Algorithm, BaselineConfig),
}

/// Uniformly drawn iterate, the output convention of randomized stochastic gradient.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomizedOutput {
    pub index: u64,
    pub point: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub records: Vec<TraceRecord>,
    pub final_point: Vec<f64>,
    pub config: RunConfig,
    pub truncated: bool,
    pub randomized_output: Option<RandomizedOutput>,
}

impl Trace {
    pub(crate) fn new(config: RunConfig, start: Vec<f64>) -> Self {
        Self {
            records: Vec::new(),
            final_point: start,
            config,
            truncated: false,
            randomized_output: None,
        }
    }

    pub fn last(&self) -> Option<&TraceRecord> {
        self.records.last()
    }

    /// First record whose squared gradient norm is at or below `threshold`.
    pub fn first_below(&self, threshold: f64) -> Option<&TraceRecord> {
        self.records
            .iter()
            .find(|r| r.grad_norm_sq.is_some_and(|g| g <= threshold))
    }

    pub(crate) fn mark_truncated(&mut self) {
        self.truncated = true;
        if let Some(last) = self.records.last_mut() {
            last.truncated = true;
        }
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        out.write_all(TRACE_HEADER.as_bytes())?;
        out.write_all(b"\n")?;
        for r in &self.records {
            let grad = r.grad_norm_sq.map(|g| format!("{g:?}")).unwrap_or_default();
            writeln!(
                out,
                "{},{},{},{:?},{},{}",
                r.epoch,
                r.iter,
                r.szo_count,
                r.f_value,
                grad,
                u8::from(r.truncated)
            )?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("trace CSV is ASCII")
    }
}

/// Row of a trace CSV as read back from disk.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub epoch: usize,
    pub iter: usize,
    pub szo_count: u64,
    pub f_value: f64,
    pub grad_norm_sq: Option<f64>,
    pub flag: bool,
}

pub fn read_trace_csv<R: BufRead>(input: R) -> Result<Vec<TraceRow>> {
    let mut rows = Vec::new();
    for (idx, line) in input.lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        if idx == 0 {
            if line != TRACE_HEADER {
                return Err(Error::Parse {
                    line: lineno,
                    message: format!("expected header `{TRACE_HEADER}`"),
                });
            }
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != 6 {
            return Err(Error::Parse {
                line: lineno,
                message: format!("expected 6 cells, found {}", cells.len()),
            });
        }
        let bad = |what: &str| Error::Parse {
            line: lineno,
            message: format!("malformed {what}"),
        };
        rows.push(TraceRow {
            epoch: cells[0].parse().map_err(|_| bad("epoch"))?,
            iter: cells[1].parse().map_err(|_| bad("iter"))?,
            szo_count: cells[2].parse().map_err(|_| bad("szo_count"))?,
            f_value: cells[3].parse().map_err(|_| bad("f_value"))?,
            grad_norm_sq: if cells[4].is_empty() {
                None
            } else {
                Some(cells[4].parse().map_err(|_| bad("grad_norm_sq"))?)
            },
            flag: match cells[5] {
                "0" => false,
                "1" => true,
                _ => return Err(bad("flag")),
            },
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optimizers::StepSchedule;
    use proptest::prelude::*;

    fn dummy_trace(values: &[(f64, Option<f64>)]) -> Trace {
        let config = BaselineConfig::new(StepSchedule::Constant(0.1), 0.01, 10);
        let mut t = Trace::new(RunConfig::Baseline(Algorithm::Rgf, config), vec![0.0]);
        for (k, &(f, g)) in values.iter().enumerate() {
            t.records.push(TraceRecord {
                epoch: 0,
                iter: k,
                iterations: k as u64,
                szo_count: 2 * k as u64,
                f_value: f,
                grad_norm_sq: g,
                wall_ms: 1.5,
                truncated: false,
            });
        }
        t
    }

    #[test]
    fn header_and_empty_gradient_cell() {
        let t = dummy_trace(&[(0.5, None), (0.25, Some(1e-7))]);
        let csv = t.to_csv_string();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some(TRACE_HEADER));
        assert_eq!(lines.next(), Some("0,0,0,0.5,,0"));
        assert_eq!(lines.next(), Some("0,1,2,0.25,1e-7,0"));
        assert!(!csv.contains('\r'));
    }

    #[test]
    fn first_below_threshold() {
        let t = dummy_trace(&[(1.0, Some(1.0)), (0.5, Some(0.01)), (0.4, Some(0.001))]);
        assert_eq!(t.first_below(0.01).unwrap().iter, 1);
        assert!(t.first_below(1e-9).is_none());
    }

    #[test]
    fn rejects_bad_header() {
        let err = read_trace_csv("a,b\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
    }

    proptest! {
        #[test]
        fn csv_round_trips_floats_exactly(
            values in prop::collection::vec((any::<f64>().prop_filter("finite", |v| v.is_finite()),
                                             prop::option::of(0.0f64..1e300)), 1..20)
        ) {
            let t = dummy_trace(&values);
            let rows = read_trace_csv(t.to_csv_string().as_bytes()).unwrap();
            prop_assert_eq!(rows.len(), values.len());
            for (row, (f, g)) in rows.iter().zip(values.iter()) {
                prop_assert_eq!(row.f_value.to_bits(), f.to_bits());
                prop_assert_eq!(row.grad_norm_sq.map(f64::to_bits), g.map(f64::to_bits));
            }
        }
    }
}
