//! Row sinks: CSV files with a `#` metadata block, or in-memory tables.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

/// Destination for one table of numbers.
pub trait RowSink {
    fn header(&mut self, columns: &[String]) -> io::Result<()>;
    fn row(&mut self, values: &[f64]) -> io::Result<()>;
}

/// In-memory table, used by tests and the validation suite.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    /// Values of `name` in row order.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }
}

impl RowSink for Table {
    fn header(&mut self, columns: &[String]) -> io::Result<()> {
        self.columns = columns.to_vec();
        Ok(())
    }

    fn row(&mut self, values: &[f64]) -> io::Result<()> {
        self.rows.push(values.to_vec());
        Ok(())
    }
}

/// CSV writer; every row is flushed so interrupted runs keep finished rows.
pub struct CsvSink {
    writer: csv::Writer<Box<dyn Write>>,
}

impl CsvSink {
    /// Writes `# key: value` lines to `path` (stdout when `None`).
    pub fn create(path: Option<&Path>, metadata: &[(&str, String)]) -> io::Result<Self> {
        let mut out: Box<dyn Write> = match path {
            Some(p) => Box::new(BufWriter::new(File::create(p)?)),
            None => Box::new(io::stdout()),
        };
        for (k, v) in metadata {
            writeln!(out, "# {k}: {v}")?;
        }
        Ok(CsvSink {
            writer: csv::Writer::from_writer(out),
        })
    }
}

impl RowSink for CsvSink {
    fn header(&mut self, columns: &[String]) -> io::Result<()> {
        self.writer.write_record(columns)?;
        self.writer.flush()
    }

    fn row(&mut self, values: &[f64]) -> io::Result<()> {
        self.writer.write_record(values.iter().map(|v| v.to_string()))?;
        self.writer.flush()
    }
}

/// Owned column names.
pub fn columns(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}
