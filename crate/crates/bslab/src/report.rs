//! Report types and writers.

use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::config::JobSpec;
use crate::{json, Error};

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub meta: Meta,
    pub jobs: Vec<JobReport>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Meta {
    pub version: String,
    pub seed: u64,
    /// `null` unless the campaign asks for it, to keep reports reproducible.
    pub timestamp: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Inconclusive,
}

#[derive(Debug, Clone, Serialize)]
pub struct JobReport {
    pub name: String,
    pub spec: JobSpec,
    pub status: Status,
    pub method: Option<String>,
    pub near_threshold: bool,
    pub spectrum: Vec<f64>,
    pub checks: Vec<CheckReport>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub errors: Vec<String>,
}

/// One verified statement: `pass` decides it, `slack` and `tol` say by how
/// much. The sign convention is `slack = rhs - lhs` for inequalities.
#[derive(Debug, Clone, Serialize)]
pub struct CheckReport {
    pub name: String,
    pub claim: String,
    pub paper_ref: String,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub tol: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(rename = "E", skip_serializing_if = "Option::is_none")]
    pub energy: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ratio: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub status: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<serde_json::Value>,
}

impl CheckReport {
    pub fn new(name: impl Into<String>, claim: &str, paper_ref: &str, lhs: f64, rhs: f64, tol: f64, pass: bool) -> Self {
        CheckReport {
            name: name.into(),
            claim: claim.into(),
            paper_ref: paper_ref.into(),
            lhs,
            rhs,
            slack: rhs - lhs,
            tol,
            pass,
            n: None,
            energy: None,
            ratio: None,
            status: None,
            detail: None,
        }
    }
}

pub fn render_json(report: &Report) -> String {
    json::to_string(report).expect("report types always serialize")
}

pub fn render_csv(report: &Report) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["job", "check", "lhs", "rhs", "slack", "pass"]).expect("in-memory write");
    for job in &report.jobs {
        for c in &job.checks {
            w.write_record([
                job.name.clone(),
                c.name.clone(),
                num(c.lhs),
                num(c.rhs),
                num(c.slack),
                c.pass.to_string(),
            ])
            .expect("in-memory write");
        }
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv writes UTF-8")
}

pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes every `(path, contents)` pair atomically: all files are staged
/// next to their targets first, and only then renamed into place, so a
/// failure leaves no partial output behind.
pub fn write_atomic(files: &[(&Path, &str)]) -> Result<(), Error> {
    let mut staged = Vec::with_capacity(files.len());
    for (path, text) in files {
        let dir = match path.parent() {
            Some(d) if !d.as_os_str().is_empty() => d,
            _ => Path::new("."),
        };
        let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(path, e))?;
        tmp.write_all(text.as_bytes()).map_err(|e| Error::io(path, e))?;
        tmp.as_file().sync_all().map_err(|e| Error::io(path, e))?;
        staged.push((tmp, *path));
    }
    for (tmp, path) in staged {
        tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unwritable_path_is_named() {
        let p = Path::new("/nonexistent-dir/for/report.json");
        let e = write_atomic(&[(p, "{}")]).unwrap_err().to_string();
        assert!(e.contains("/nonexistent-dir/for/report.json"), "{e}");
    }

    #[test]
    fn csv_has_header_only_for_no_jobs() {
        let r = Report { meta: Meta { version: "0".into(), seed: 0, timestamp: None }, jobs: vec![] };
        assert_eq!(render_csv(&r), "job,check,lhs,rhs,slack,pass\n");
        let v: serde_json::Value = serde_json::from_str(&render_json(&r)).unwrap();
        assert_eq!(v["jobs"], serde_json::json!([]));
        assert!(v["meta"]["timestamp"].is_null());
    }
}
