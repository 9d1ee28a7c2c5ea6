//! Command reports and their human and JSON renderings.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use clap::ValueEnum;
use fuzzy_holonomy::linalg::{CMatrix, C64};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Human,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Value {
    Scalar { value: f64 },
    Complex { re: f64, im: f64 },
    Count { value: u64 },
    Flag { value: bool },
    Text { value: String },
    Matrix { value: Vec<Vec<[f64; 2]>> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Entry {
    pub label: String,
    #[serde(flatten)]
    pub value: Value,
    /// Tolerance the value was checked against, if any.
    pub tolerance: Option<f64>,
    pub pass: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub command: String,
    /// SHA-256 over the input files and parameters.
    pub inputs_digest: String,
    pub inputs: BTreeMap<String, String>,
    pub seed: Option<u64>,
    pub tolerances: BTreeMap<String, f64>,
    pub results: Vec<Entry>,
    pub verdict: Option<String>,
    pub warnings: Vec<String>,
}

pub fn file_digest(bytes: &[u8]) -> String {
    format!("sha256:{}", hex::encode(Sha256::digest(bytes)))
}

impl Report {
    pub fn new(command: &str) -> Self {
        Self {
            command: command.into(),
            inputs_digest: String::new(),
            inputs: BTreeMap::new(),
            seed: None,
            tolerances: BTreeMap::new(),
            results: Vec::new(),
            verdict: None,
            warnings: Vec::new(),
        }
    }

    pub fn input(&mut self, name: &str, value: impl Into<String>) {
        self.inputs.insert(name.into(), value.into());
    }

    pub fn tolerance(&mut self, name: &str, tol: f64) {
        self.tolerances.insert(name.into(), tol);
    }

    fn push(
        &mut self,
        label: impl Into<String>,
        value: Value,
        tolerance: Option<f64>,
        pass: Option<bool>,
    ) {
        self.results.push(Entry {
            label: label.into(),
            value,
            tolerance,
            pass,
        });
    }

    /// Scalar that must not exceed `tol`.
    pub fn bound(&mut self, label: impl Into<String>, value: f64, tol: f64) -> bool {
        let pass = value <= tol;
        self.push(label, Value::Scalar { value }, Some(tol), Some(pass));
        pass
    }

    pub fn scalar(&mut self, label: impl Into<String>, value: f64) {
        self.push(label, Value::Scalar { value }, None, None);
    }

    pub fn complex(&mut self, label: impl Into<String>, z: C64) {
        self.push(label, Value::Complex { re: z.re, im: z.im }, None, None);
    }

    pub fn count(&mut self, label: impl Into<String>, value: usize) {
        self.push(
            label,
            Value::Count {
                value: value as u64,
            },
            None,
            None,
        );
    }

    pub fn flag(
        &mut self,
        label: impl Into<String>,
        value: bool,
        tol: Option<f64>,
        expected: Option<bool>,
    ) {
        self.push(
            label,
            Value::Flag { value },
            tol,
            expected.map(|e| e == value),
        );
    }

    pub fn text(&mut self, label: impl Into<String>, value: impl Into<String>) {
        self.push(
            label,
            Value::Text {
                value: value.into(),
            },
            None,
            None,
        );
    }

    pub fn matrix(&mut self, label: impl Into<String>, a: &CMatrix) {
        let value = a
            .to_rows()
            .into_iter()
            .map(|r| r.into_iter().map(|z| [z.re, z.im]).collect())
            .collect();
        self.push(label, Value::Matrix { value }, None, None);
    }

    pub fn all_pass(&self) -> bool {
        self.results.iter().all(|e| e.pass != Some(false))
    }

    /// Fixes the input digest from the recorded inputs and seed.
    pub fn seal(&mut self) {
        let mut h = Sha256::new();
        h.update(self.command.as_bytes());
        for (k, v) in &self.inputs {
            h.update(format!("\n{k}={v}").as_bytes());
        }
        if let Some(s) = self.seed {
            h.update(format!("\nseed={s}").as_bytes());
        }
        self.inputs_digest = format!("sha256:{}", hex::encode(h.finalize()));
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serialization cannot fail");
        s.push('\n');
        s
    }

    pub fn to_human(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "command: {}", self.command);
        for (k, v) in &self.inputs {
            let _ = writeln!(out, "  {k}: {v}");
        }
        if let Some(seed) = self.seed {
            let _ = writeln!(out, "seed: {seed}");
        }
        let _ = writeln!(out, "inputs digest: {}", self.inputs_digest);
        out.push('\n');

        let mut rows = vec![[
            "quantity".to_string(),
            "value".into(),
            "imag".into(),
            "tolerance".into(),
            "status".into(),
        ]];
        let mut matrices = Vec::new();
        for e in &self.results {
            let (value, imag) = match &e.value {
                Value::Scalar { value } => (fmt_num(*value), String::new()),
                Value::Complex { re, im } => (fmt_num(*re), fmt_num(*im)),
                Value::Count { value } => (value.to_string(), String::new()),
                Value::Flag { value } => (value.to_string(), String::new()),
                Value::Text { value } => (value.clone(), String::new()),
                Value::Matrix { value } => {
                    matrices.push((e.label.clone(), value));
                    (
                        format!(
                            "{}x{} matrix (below)",
                            value.len(),
                            value.first().map_or(0, Vec::len)
                        ),
                        String::new(),
                    )
                }
            };
            let tol = e.tolerance.map_or_else(|| "-".into(), |t| format!("{t:e}"));
            let status = match e.pass {
                Some(true) => "ok",
                Some(false) => "FAIL",
                None => "-",
            };
            rows.push([e.label.clone(), value, imag, tol, status.into()]);
        }
        let widths: Vec<usize> = (0..5)
            .map(|c| rows.iter().map(|r| r[c].chars().count()).max().unwrap_or(0))
            .collect();
        for r in &rows {
            let line: Vec<String> = r
                .iter()
                .zip(&widths)
                .map(|(s, w)| format!("{s:<w$}"))
                .collect();
            let _ = writeln!(out, "{}", line.join("  ").trim_end());
        }

        for (label, m) in matrices {
            let _ = writeln!(out, "\n{label}:");
            for row in m {
                let cells: Vec<String> = row
                    .iter()
                    .map(|[re, im]| format!("{re:+.12e}{im:+.12e}i"))
                    .collect();
                let _ = writeln!(out, "  [{}]", cells.join(", "));
            }
        }
        for w in &self.warnings {
            let _ = writeln!(out, "warning: {w}");
        }
        if let Some(v) = &self.verdict {
            let _ = writeln!(out, "\nverdict: {v}");
        }
        out
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Human => self.to_human(),
            Format::Json => self.to_json(),
        }
    }

    pub fn save(&self, path: &Path, format: Format) -> Result<()> {
        fs::write(path, self.render(format))
            .with_context(|| format!("cannot write report to {}", path.display()))
    }
}

fn fmt_num(x: f64) -> String {
    if x != 0.0 && (x.abs() < 1e-4 || x.abs() >= 1e6) {
        format!("{x:e}")
    } else {
        x.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Report {
        let mut r = Report::new("observables");
        r.input("scenario", "sha256:00");
        r.input("tau", "1");
        r.seed = Some(7);
        r.tolerance("check", 1e-10);
        r.complex("W(e3)", C64::new(2.0 * 0.5f64.cos(), 1.0e-17));
        r.bound("defect", 3.0e-15, 1e-10);
        r.flag("hermitian", true, Some(1e-10), Some(true));
        r.count("words", 3);
        r.text("verdict", "equivalent");
        r.matrix("u", &CMatrix::identity(2));
        r.scalar("third", 1.0 / 3.0);
        r.seal();
        r
    }

    #[test]
    fn json_round_trip_is_exact() {
        let r = sample();
        let back: Report = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(back, r);
        assert_eq!(back.to_json(), r.to_json());
    }

    #[test]
    fn json_key_order_is_stable() {
        let j = sample().to_json();
        let pos: Vec<usize> = [
            "\"command\"",
            "\"inputs_digest\"",
            "\"inputs\"",
            "\"seed\"",
            "\"tolerances\"",
            "\"results\"",
        ]
        .iter()
        .map(|k| j.find(k).unwrap())
        .collect();
        assert!(pos.windows(2).all(|w| w[0] < w[1]));
        assert!(j.contains("0.3333333333333333"));
    }

    #[test]
    fn human_table_has_tolerances_and_parts() {
        let h = sample().to_human();
        assert!(h
            .lines()
            .next()
            .unwrap()
            .starts_with("command: observables"));
        let header = h.lines().find(|l| l.starts_with("quantity")).unwrap();
        assert!(header.contains("tolerance") && header.contains("imag"));
        let w = h.lines().find(|l| l.starts_with("W(e3)")).unwrap();
        assert!(w.contains("1.7551651237807455") && w.contains("1e-17"));
        let d = h.lines().find(|l| l.starts_with("defect")).unwrap();
        assert!(d.contains("1e-10") && d.ends_with("ok"));
    }

    #[test]
    fn digest_depends_on_inputs() {
        let a = sample();
        let mut b = sample();
        b.input("tau", "2");
        b.seal();
        assert_ne!(a.inputs_digest, b.inputs_digest);
        assert!(a.inputs_digest.starts_with("sha256:"));
        assert_eq!(file_digest(b"").len(), 7 + 64);
    }
}
