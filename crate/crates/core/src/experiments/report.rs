use std::fmt;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};

/// Where a threshold came from.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Provenance {
    /// Closed-form expression of the model's constants.
    Formula(String),
    /// Constant fitted on the grid, with the fit's identifier.
    Fitted(String),
    /// Independent reference solution.
    Oracle(String),
    /// Value taken from the configuration.
    Config(String),
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Provenance::Formula(s) => write!(f, "formula:{s}"),
            Provenance::Fitted(s) => write!(f, "fitted:{s}"),
            Provenance::Oracle(s) => write!(f, "oracle:{s}"),
            Provenance::Config(s) => write!(f, "config:{s}"),
        }
    }
}

/// One checked statement.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    /// Criterion the verdict belongs to, e.g. `decay.crossing`.
    pub criterion: String,
    /// Run or sub-check the verdict is about.
    pub subject: String,
    pub observed: f64,
    pub threshold: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub provenance: Provenance,
}

impl Verdict {
    pub fn new(
        criterion: impl Into<String>,
        subject: impl Into<String>,
        observed: f64,
        threshold: f64,
        tolerance: f64,
        pass: bool,
        provenance: Provenance,
    ) -> Self {
        Verdict {
            criterion: criterion.into(),
            subject: subject.into(),
            observed,
            threshold,
            tolerance,
            pass,
            provenance,
        }
    }
}

/// Free-form per-run numbers, kept in insertion order.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct RunSummary {
    pub label: String,
    pub values: Vec<(String, f64)>,
}

impl RunSummary {
    pub fn new(label: impl Into<String>) -> Self {
        RunSummary {
            label: label.into(),
            values: Vec::new(),
        }
    }

    pub fn push(&mut self, key: impl Into<String>, v: f64) -> &mut Self {
        self.values.push((key.into(), v));
        self
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        self.values.iter().find(|(k, _)| k == key).map(|(_, v)| *v)
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct ExperimentReport {
    pub name: String,
    pub runs: Vec<RunSummary>,
    pub verdicts: Vec<Verdict>,
    pub notes: Vec<String>,
}

impl ExperimentReport {
    pub fn new(name: impl Into<String>) -> Self {
        ExperimentReport {
            name: name.into(),
            ..Default::default()
        }
    }

    pub fn all_pass(&self) -> bool {
        !self.verdicts.is_empty() && self.verdicts.iter().all(|v| v.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Verdict> {
        self.verdicts.iter().filter(|v| !v.pass)
    }

    pub fn verdicts_for<'a>(&'a self, criterion: &'a str) -> impl Iterator<Item = &'a Verdict> {
        self.verdicts.iter().filter(move |v| v.criterion == criterion)
    }

    pub fn run(&self, label: &str) -> Option<&RunSummary> {
        self.runs.iter().find(|r| r.label == label)
    }

    /// Verdict table: `criterion,subject,observed,threshold,tolerance,pass,provenance`.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv_to(f)
    }

    pub fn write_csv_to<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["criterion", "subject", "observed", "threshold", "tolerance", "pass", "provenance"])?;
        for v in &self.verdicts {
            wr.write_record([
                v.criterion.clone(),
                v.subject.clone(),
                format!("{:e}", v.observed),
                format!("{:e}", v.threshold),
                format!("{:e}", v.tolerance),
                v.pass.to_string(),
                v.provenance.to_string(),
            ])?;
        }
        wr.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }

    /// Long-format run table: `label,key,value`.
    pub fn write_runs_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut wr = csv::Writer::from_writer(f);
        wr.write_record(["label", "key", "value"])?;
        for r in &self.runs {
            for (k, v) in &r.values {
                wr.write_record([r.label.as_str(), k.as_str(), &format!("{v:e}")])?;
            }
        }
        wr.flush().map_err(|e| Error::io(path, e))?;
        Ok(())
    }
}

impl fmt::Display for ExperimentReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "experiment {}", self.name)?;
        for r in &self.runs {
            write!(f, "  run {}:", r.label)?;
            for (k, v) in &r.values {
                write!(f, " {k}={v:.4e}")?;
            }
            writeln!(f)?;
        }
        for v in &self.verdicts {
            writeln!(
                f,
                "  [{}] {} {}: observed {:.4e} vs {:.4e} (tol {:.2e}; {})",
                if v.pass { "pass" } else { "FAIL" },
                v.criterion,
                v.subject,
                v.observed,
                v.threshold,
                v.tolerance,
                v.provenance
            )?;
        }
        for n in &self.notes {
            writeln!(f, "  note: {n}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_report_does_not_pass() {
        assert!(!ExperimentReport::new("x").all_pass());
    }

    #[test]
    fn csv_has_one_row_per_verdict() {
        let mut r = ExperimentReport::new("x");
        r.verdicts.push(Verdict::new("a", "run0", 1.0, 2.0, 0.1, true, Provenance::Config("ladder".into())));
        r.verdicts.push(Verdict::new("b", "run0", 3.0, 2.0, 0.1, false, Provenance::Oracle("ode".into())));
        let mut buf = Vec::new();
        r.write_csv_to(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 3);
        assert!(text.lines().nth(2).unwrap().ends_with("false,oracle:ode"));
        assert!(!r.all_pass());
        assert_eq!(r.failures().count(), 1);
    }
}
