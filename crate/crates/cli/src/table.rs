//! Comma-separated output with a `#`-prefixed metadata header. Numeric
//! cells use a fixed scientific format so identical inputs render
//! byte-identical tables.

use anyhow::{bail, Result};

#[derive(Debug, Clone)]
pub struct OutputTable {
    metadata: Vec<(String, String)>,
    headers: Vec<String>,
    rows: Vec<Vec<String>>,
}

pub fn fmt_f64(v: f64) -> String {
    format!("{v:.12e}")
}

impl OutputTable {
    pub fn new(headers: &[&str]) -> Self {
        Self {
            metadata: Vec::new(),
            headers: headers.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn meta(&mut self, key: &str, value: impl Into<String>) {
        self.metadata.push((key.to_string(), value.into()));
    }

    /// Appends a purely numeric row; every value must be finite.
    pub fn push_numeric(&mut self, values: &[f64]) -> Result<()> {
        self.push_mixed(&[], values)
    }

    /// Appends labels followed by numeric values.
    pub fn push_mixed(&mut self, labels: &[&str], values: &[f64]) -> Result<()> {
        if labels.len() + values.len() != self.headers.len() {
            bail!(
                "row width {} does not match {} columns",
                labels.len() + values.len(),
                self.headers.len()
            );
        }
        for v in values {
            if !v.is_finite() {
                bail!("non-finite value in output row");
            }
        }
        let mut row: Vec<String> = labels.iter().map(|l| l.to_string()).collect();
        row.extend(values.iter().map(|v| fmt_f64(*v)));
        self.rows.push(row);
        Ok(())
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.metadata {
            out.push_str(&format!("# {k}: {v}\n"));
        }
        out.push_str(&self.headers.join(","));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

}
