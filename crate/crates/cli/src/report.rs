//! Plain-text tables and the paired JSON report files.

use std::path::{Path, PathBuf};

use serde_json::Value;

use crate::manifest::RunManifest;

/// A rendered report: the human-readable text and the structured form.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub name: String,
    pub text: String,
    pub json: Value,
}

impl Report {
    /// Attaches the manifest to the JSON body and a one-line summary to the text.
    pub fn new(name: &str, manifest: &RunManifest, body: Value, text: String) -> Self {
        let mut json = serde_json::json!({ "manifest": manifest });
        if let (Value::Object(dst), Value::Object(src)) = (&mut json, body) {
            dst.extend(src);
        }
        let text = format!("{text}\n{}\n", manifest.footer());
        Report { name: name.to_string(), text, json }
    }

    pub fn write(&self, dir: &Path) -> std::io::Result<(PathBuf, PathBuf)> {
        std::fs::create_dir_all(dir)?;
        let txt = dir.join(format!("{}.report.txt", self.name));
        let json = dir.join(format!("{}.report.json", self.name));
        std::fs::write(&txt, &self.text)?;
        let mut body = serde_json::to_string_pretty(&self.json).expect("report JSON serializes");
        body.push('\n');
        std::fs::write(&json, body)?;
        Ok((txt, json))
    }
}

/// Left-aligned first column, right-aligned value columns.
#[derive(Debug, Clone, Default)]
pub struct Table {
    headers: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(headers: impl IntoIterator<Item = S>) -> Self {
        Table { headers: headers.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn row<S: Into<String>>(&mut self, cells: impl IntoIterator<Item = S>) {
        let cells: Vec<String> = cells.into_iter().map(Into::into).collect();
        assert_eq!(cells.len(), self.headers.len(), "row width must match the header");
        self.rows.push(cells);
    }

    pub fn render(&self) -> String {
        let widths: Vec<usize> = (0..self.headers.len())
            .map(|c| std::iter::once(&self.headers[c]).chain(self.rows.iter().map(|r| &r[c])).map(|s| s.chars().count()).max().unwrap_or(0))
            .collect();
        let line = |cells: &[String]| -> String {
            let parts: Vec<String> = cells
                .iter()
                .enumerate()
                .map(|(c, s)| if c == 0 { format!("{s:<w$}", w = widths[c]) } else { format!("{s:>w$}", w = widths[c]) })
                .collect();
            parts.join("  ").trim_end().to_string()
        };
        let mut out = line(&self.headers);
        out.push('\n');
        let rule: Vec<String> = widths.iter().map(|&w| "-".repeat(w)).collect();
        out.push_str(&rule.join("  "));
        out.push('\n');
        for r in &self.rows {
            out.push_str(&line(r));
            out.push('\n');
        }
        out
    }
}

/// Fixed-precision score, scaled to percent when asked. `None` renders as `NA`.
pub fn fmt_score(value: Option<f64>, percent: bool) -> String {
    match value {
        None => "NA".to_string(),
        Some(v) if percent => format!("{:.2}", v * 100.0),
        Some(v) => format!("{v:.4}"),
    }
}

pub fn mean(values: impl IntoIterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.into_iter().fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}
