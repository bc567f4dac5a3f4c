//! Plain-text reports: key-value sections and named tables, parseable back
//! into the same structure, plus CSV export of the tables.
//!
//! ```text
//! calm-probe report v1
//! [config]
//! command = falsify
//! [model]
//! | [dims]
//! | n=1 m=1 q=2
//! [result]
//! verdict = Falsified
//! [table sweep]
//! columns = epsilon,samples
//! row = 0.4,2500
//! [end]
//! ```

use std::fmt::Write;

use crate::error::{Error, Result};

pub const HEADER: &str = "calm-probe report v1";

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: impl Into<String>, columns: &[&str]) -> Self {
        Self {
            name: name.into(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn with_columns(name: impl Into<String>, columns: Vec<String>) -> Self {
        Self {
            name: name.into(),
            columns,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<&str>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i].as_str()).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Report {
    pub config: Vec<(String, String)>,
    /// Model file text the run used.
    pub model: String,
    pub summary: Vec<(String, String)>,
    pub result: Vec<(String, String)>,
    pub tables: Vec<Table>,
}

/// Shortest round-trip representation (`inf`, `NaN` and exponents included);
/// negative zero prints as `0.0`.
pub fn num(v: f64) -> String {
    let v = if v == 0.0 { 0.0 } else { v };
    format!("{v:?}")
}

pub fn nums(v: &[f64]) -> String {
    v.iter().map(|x| num(*x)).collect::<Vec<_>>().join(",")
}

fn check_cell(s: &str) -> Result<()> {
    if s.contains(',') || s.contains('\n') {
        return Err(Error::Report(format!("table cell '{s}' contains ',' or a newline")));
    }
    Ok(())
}

impl Report {
    pub fn config(&mut self, key: &str, value: impl ToString) {
        self.config.push((key.into(), value.to_string()));
    }

    pub fn summary(&mut self, key: &str, value: impl ToString) {
        self.summary.push((key.into(), value.to_string()));
    }

    pub fn result(&mut self, key: &str, value: impl ToString) {
        self.result.push((key.into(), value.to_string()));
    }

    pub fn get_result(&self, key: &str) -> Option<&str> {
        self.result.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn get_config(&self, key: &str) -> Option<&str> {
        self.config.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    pub fn to_text(&self) -> Result<String> {
        let mut s = String::new();
        let _ = writeln!(s, "{HEADER}");
        for (name, pairs) in [("config", &self.config), ("summary", &self.summary), ("result", &self.result)] {
            if name == "summary" {
                let _ = writeln!(s, "[model]");
                for line in self.model.lines() {
                    let _ = writeln!(s, "| {line}");
                }
            }
            let _ = writeln!(s, "[{name}]");
            for (k, v) in pairs.iter() {
                if k.contains('=') || k.contains('\n') || v.contains('\n') {
                    return Err(Error::Report(format!("entry '{k}' cannot be serialized")));
                }
                let _ = writeln!(s, "{k} = {v}");
            }
        }
        for t in &self.tables {
            let _ = writeln!(s, "[table {}]", t.name);
            for c in &t.columns {
                check_cell(c)?;
            }
            let _ = writeln!(s, "columns = {}", t.columns.join(","));
            for r in &t.rows {
                if r.len() != t.columns.len() {
                    return Err(Error::Report(format!("ragged row in table {}", t.name)));
                }
                for c in r {
                    check_cell(c)?;
                }
                let _ = writeln!(s, "row = {}", r.join(","));
            }
        }
        let _ = writeln!(s, "[end]");
        Ok(s)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let bad = |line: usize, msg: &str| Error::Report(format!("line {line}: {msg}"));
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
        match lines.next() {
            Some((_, HEADER)) => {}
            _ => return Err(bad(1, "missing report header")),
        }
        let mut report = Report::default();
        let mut section = String::new();
        let mut model = String::new();
        let mut ended = false;
        for (no, line) in lines {
            if ended {
                if line.trim().is_empty() {
                    continue;
                }
                return Err(bad(no, "content after [end]"));
            }
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                match name {
                    "end" => ended = true,
                    "config" | "model" | "summary" | "result" => section = name.into(),
                    _ => {
                        let Some(t) = name.strip_prefix("table ") else {
                            return Err(bad(no, &format!("unknown section [{name}]")));
                        };
                        report.tables.push(Table {
                            name: t.into(),
                            ..Table::default()
                        });
                        section = "table".into();
                    }
                }
                continue;
            }
            if section == "model" {
                let body = line
                    .strip_prefix("| ")
                    .or_else(|| (line == "|").then_some(""))
                    .ok_or_else(|| bad(no, "model lines must start with '| '"))?;
                model.push_str(body);
                model.push('\n');
                continue;
            }
            let (k, v) = line
                .split_once(" = ")
                .ok_or_else(|| bad(no, "expected 'key = value'"))?;
            match section.as_str() {
                "config" => report.config.push((k.into(), v.into())),
                "summary" => report.summary.push((k.into(), v.into())),
                "result" => report.result.push((k.into(), v.into())),
                "table" => {
                    let t = report.tables.last_mut().expect("table section open");
                    let cells: Vec<String> = v.split(',').map(str::to_string).collect();
                    match k {
                        "columns" if t.columns.is_empty() => t.columns = cells,
                        "row" if !t.columns.is_empty() => {
                            if cells.len() != t.columns.len() {
                                return Err(bad(no, "row length does not match columns"));
                            }
                            t.rows.push(cells);
                        }
                        _ => return Err(bad(no, "expected 'columns' then 'row' entries")),
                    }
                }
                _ => return Err(bad(no, "entry outside a section")),
            }
        }
        if !ended {
            return Err(Error::Report("report is truncated (no [end])".into()));
        }
        report.model = model;
        Ok(report)
    }

    /// Every table as a CSV block headed by `# table <name>`.
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        for (i, t) in self.tables.iter().enumerate() {
            if i > 0 {
                s.push('\n');
            }
            let _ = writeln!(s, "# table {}", t.name);
            let _ = writeln!(s, "{}", t.columns.join(","));
            for r in &t.rows {
                let _ = writeln!(s, "{}", r.join(","));
            }
        }
        s
    }

    /// Human-readable rendering with aligned tables.
    pub fn render(&self) -> String {
        let mut s = String::new();
        for (title, pairs) in [("config", &self.config), ("summary", &self.summary), ("result", &self.result)] {
            let _ = writeln!(s, "== {title} ==");
            let width = pairs.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
            for (k, v) in pairs.iter() {
                let _ = writeln!(s, "  {k:width$}  {v}");
            }
        }
        for t in &self.tables {
            let _ = writeln!(s, "== table {} ({} rows) ==", t.name, t.rows.len());
            let widths: Vec<usize> = (0..t.columns.len())
                .map(|i| {
                    t.rows
                        .iter()
                        .map(|r| r[i].chars().count())
                        .chain([t.columns[i].chars().count()])
                        .max()
                        .unwrap_or(0)
                })
                .collect();
            let line = |cells: &[String]| {
                cells
                    .iter()
                    .zip(&widths)
                    .map(|(c, w)| format!("{c:>w$}"))
                    .collect::<Vec<_>>()
                    .join("  ")
            };
            let _ = writeln!(s, "  {}", line(&t.columns));
            for r in &t.rows {
                let _ = writeln!(s, "  {}", line(r));
            }
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Report {
        let mut r = Report::default();
        r.config("command", "falsify");
        r.config("seed", 3);
        r.model = "[dims]\nn=1 m=1 q=1\n\n# note\n".into();
        r.summary("n", 1);
        r.result("verdict", "Falsified");
        let mut t = Table::new("trace", &["t", "kappa"]);
        t.push(vec![num(0.5), num(f64::INFINITY)]);
        t.push(vec![num(1e-20), num(f64::NAN)]);
        r.tables.push(t);
        r
    }

    #[test]
    fn round_trip() {
        let r = sample();
        let text = r.to_text().unwrap();
        let back = Report::parse(&text).unwrap();
        assert_eq!(back, r);
        assert_eq!(back.to_text().unwrap(), text);
        assert_eq!(back.table("trace").unwrap().column("kappa").unwrap(), vec!["inf", "NaN"]);
    }

    #[test]
    fn corrupt_reports_are_rejected() {
        let text = sample().to_text().unwrap();
        assert!(Report::parse("hello").is_err());
        assert!(Report::parse(&text.replace("[end]\n", "")).is_err());
        assert!(Report::parse(&text.replace("row = 0.5,inf", "row = 0.5")).is_err());
        assert!(Report::parse(&text.replace("[result]", "[bogus]")).is_err());
    }

    #[test]
    fn csv_blocks() {
        let csv = sample().to_csv();
        assert!(csv.starts_with("# table trace\nt,kappa\n0.5,inf\n"));
    }
}
