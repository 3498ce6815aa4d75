//! Report rendering: aligned text tables and RFC-4180 CSV, written
//! atomically when an output directory is given.

use std::fs;
use std::io::Write as _;
use std::path::Path;

use perimkit::Result;

/// Output format of a command.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Table,
    Csv,
}

/// The rendered outputs of one command: a human table and a machine table.
/// Both are fully built before anything is emitted, so a failure can never
/// leave a half-written report behind.
#[derive(Debug)]
pub struct Report {
    pub command: &'static str,
    pub table: String,
    pub csv: String,
}

impl Report {
    /// Print to stdout, or write to `dir/<command>.<ext>` atomically.
    pub fn emit(&self, format: Format, dir: Option<&Path>) -> Result<()> {
        let (body, ext) = match format {
            Format::Table => (&self.table, "txt"),
            Format::Csv => (&self.csv, "csv"),
        };
        match dir {
            None => {
                // Stdout is the report; nothing else is printed on success.
                print!("{body}");
                std::io::stdout().flush()?;
            }
            Some(dir) => {
                fs::create_dir_all(dir)?;
                let path = dir.join(format!("{}.{ext}", self.command));
                let tmp = dir.join(format!("{}.{ext}.tmp", self.command));
                fs::write(&tmp, body)?;
                fs::rename(&tmp, &path)?;
            }
        }
        Ok(())
    }
}

/// Incremental text-table builder with aligned columns.
pub struct TableOut {
    lines: Vec<String>,
}

impl TableOut {
    pub fn new(title: &str) -> Self {
        TableOut {
            lines: vec![title.to_string()],
        }
    }

    pub fn kv(&mut self, key: &str, value: impl AsRef<str>) {
        self.lines.push(format!("{key}: {}", value.as_ref()));
    }

    pub fn heading(&mut self, name: &str) {
        self.lines.push(String::new());
        self.lines.push(format!("== {name} =="));
    }

    pub fn line(&mut self, text: impl Into<String>) {
        self.lines.push(text.into());
    }

    /// Append a table with left-aligned columns and a two-space gutter.
    pub fn table(&mut self, columns: &[&str], rows: &[Vec<String>]) {
        let mut widths: Vec<usize> = columns.iter().map(|c| c.len()).collect();
        for row in rows {
            for (i, cell) in row.iter().enumerate() {
                widths[i] = widths[i].max(cell.len());
            }
        }
        let fmt_row = |cells: Vec<&str>| -> String {
            let mut line = String::new();
            for (i, cell) in cells.iter().enumerate() {
                if i > 0 {
                    line.push_str("  ");
                }
                if i + 1 == cells.len() {
                    line.push_str(cell);
                } else {
                    line.push_str(&format!("{cell:<width$}", width = widths[i]));
                }
            }
            line.trim_end().to_string()
        };
        self.lines.push(fmt_row(columns.to_vec()));
        for row in rows {
            self.lines
                .push(fmt_row(row.iter().map(String::as_str).collect()));
        }
    }

    pub fn finish(self) -> String {
        let mut out = self.lines.join("\n");
        out.push('\n');
        out
    }
}

/// Encode one machine table as CSV with RFC-4180 quoting.
pub fn csv_encode(columns: &[&str], rows: &[Vec<String>]) -> String {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(columns).expect("in-memory write");
    for row in rows {
        writer.write_record(row).expect("in-memory write");
    }
    let bytes = writer.into_inner().expect("in-memory flush");
    String::from_utf8(bytes).expect("csv output is utf-8")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_quotes_embedded_commas() {
        let rows = vec![vec!["a,b".to_string(), "plain".to_string()]];
        let text = csv_encode(&["x", "y"], &rows);
        assert_eq!(text, "x,y\n\"a,b\",plain\n");
    }

    #[test]
    fn tables_align() {
        let mut t = TableOut::new("demo");
        t.table(
            &["id", "value"],
            &[
                vec!["1".into(), "x".into()],
                vec!["100".into(), "y".into()],
            ],
        );
        let text = t.finish();
        assert!(text.contains("id   value"));
        assert!(text.contains("1    x"));
        assert!(text.contains("100  y"));
    }
}
