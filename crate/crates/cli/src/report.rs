//! Tabular reports rendered as aligned text, CSV or JSON.
//!
//! Numbers stay exact in every format: terminating decimals print as such,
//! anything else as `p/q`. Text tables add an approximate decimal after a
//! fraction.

use std::io::Write;

use anyhow::Result;
use clap::ValueEnum;
use coopetitive::Scalar;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Cell {
    Number(Scalar),
    Text(String),
    Flag(bool),
}

impl Cell {
    fn exact(&self) -> String {
        match self {
            Cell::Number(x) => x.to_string(),
            Cell::Text(t) => t.clone(),
            Cell::Flag(b) => b.to_string(),
        }
    }

    fn display(&self) -> String {
        match self {
            Cell::Number(x) if x.to_decimal_string().is_none() => {
                format!("{} (≈{:.6})", x.to_fraction_string(), x.to_f64())
            }
            other => other.exact(),
        }
    }
}

impl From<Scalar> for Cell {
    fn from(x: Scalar) -> Self {
        Cell::Number(x)
    }
}

impl From<&Scalar> for Cell {
    fn from(x: &Scalar) -> Self {
        Cell::Number(x.clone())
    }
}

impl From<String> for Cell {
    fn from(t: String) -> Self {
        Cell::Text(t)
    }
}

impl From<&str> for Cell {
    fn from(t: &str) -> Self {
        Cell::Text(t.to_string())
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Flag(b)
    }
}

impl From<usize> for Cell {
    fn from(n: usize) -> Self {
        Cell::Number(Scalar::from_integer(n as i64))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Section {
    pub title: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Section {
    pub fn new(title: impl Into<String>, columns: &[&str]) -> Self {
        Section {
            title: title.into(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn row(&mut self, cells: Vec<Cell>) -> &mut Self {
        debug_assert_eq!(cells.len(), self.columns.len());
        self.rows.push(cells);
        self
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub command: String,
    pub sections: Vec<Section>,
    pub notes: Vec<String>,
}

impl Report {
    pub fn new(command: &str) -> Self {
        Report {
            command: command.to_string(),
            sections: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn push(&mut self, section: Section) {
        self.sections.push(section);
    }

    pub fn note(&mut self, note: impl Into<String>) {
        self.notes.push(note.into());
    }

    pub fn render(&self, format: Format, out: &mut dyn Write) -> Result<()> {
        match format {
            Format::Table => self.render_table(out),
            Format::Csv => self.render_csv(out),
            Format::Json => {
                serde_json::to_writer_pretty(&mut *out, self)?;
                writeln!(out)?;
                Ok(())
            }
        }
    }

    fn render_table(&self, out: &mut dyn Write) -> Result<()> {
        for (k, section) in self.sections.iter().enumerate() {
            if k > 0 {
                writeln!(out)?;
            }
            writeln!(out, "{}", section.title)?;
            let cells: Vec<Vec<String>> = section
                .rows
                .iter()
                .map(|r| r.iter().map(Cell::display).collect())
                .collect();
            let mut widths: Vec<usize> = section.columns.iter().map(|c| c.chars().count()).collect();
            for row in &cells {
                for (w, c) in widths.iter_mut().zip(row) {
                    *w = (*w).max(c.chars().count());
                }
            }
            let line = |items: &[String]| -> String {
                items
                    .iter()
                    .zip(&widths)
                    .map(|(c, w)| format!("{c:<w$}"))
                    .collect::<Vec<_>>()
                    .join("  ")
                    .trim_end()
                    .to_string()
            };
            writeln!(out, "  {}", line(&section.columns))?;
            for row in &cells {
                writeln!(out, "  {}", line(row))?;
            }
        }
        if !self.notes.is_empty() {
            writeln!(out)?;
            for n in &self.notes {
                writeln!(out, "note: {n}")?;
            }
        }
        Ok(())
    }

    /// Each section becomes a block: a `# title` record, the header, the rows
    /// and a blank separator. Notes come last as `# note:` records.
    fn render_csv(&self, out: &mut dyn Write) -> Result<()> {
        let mut w = csv::WriterBuilder::new().flexible(true).from_writer(out);
        for (k, section) in self.sections.iter().enumerate() {
            if k > 0 {
                w.write_record([""])?;
            }
            w.write_record([format!("# {}", section.title)])?;
            w.write_record(&section.columns)?;
            for row in &section.rows {
                w.write_record(row.iter().map(Cell::exact))?;
            }
        }
        for n in &self.notes {
            w.write_record([format!("# note: {n}")])?;
        }
        w.flush()?;
        Ok(())
    }
}
