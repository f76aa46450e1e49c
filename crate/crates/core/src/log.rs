use std::io::{self, Write};

/// Per-sweep error metrics.
///
/// Sweep indices are strictly increasing; CSV output is `sweep,<metric>,...`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceLog {
    metrics: Vec<String>,
    records: Vec<LogRecord>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogRecord {
    pub sweep: u64,
    pub errors: Vec<f64>,
}

impl ConvergenceLog {
    pub fn new<S: Into<String>>(metrics: impl IntoIterator<Item = S>) -> Self {
        Self {
            metrics: metrics.into_iter().map(Into::into).collect(),
            records: Vec::new(),
        }
    }

    pub fn push(&mut self, sweep: u64, errors: Vec<f64>) {
        assert_eq!(errors.len(), self.metrics.len(), "metric count mismatch");
        if let Some(last) = self.records.last() {
            assert!(sweep > last.sweep, "sweep indices must increase");
        }
        self.records.push(LogRecord { sweep, errors });
    }

    pub fn metrics(&self) -> &[String] {
        &self.metrics
    }

    pub fn records(&self) -> &[LogRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn last(&self) -> Option<&LogRecord> {
        self.records.last()
    }

    pub fn at_sweep(&self, sweep: u64) -> Option<&LogRecord> {
        self.records
            .binary_search_by_key(&sweep, |r| r.sweep)
            .ok()
            .map(|i| &self.records[i])
    }

    /// Values of one metric in sweep order.
    pub fn series(&self, metric: &str) -> Option<Vec<f64>> {
        let col = self.metrics.iter().position(|m| m == metric)?;
        Some(self.records.iter().map(|r| r.errors[col]).collect())
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        write!(out, "sweep")?;
        for m in &self.metrics {
            write!(out, ",{m}")?;
        }
        writeln!(out)?;
        for r in &self.records {
            write!(out, "{}", r.sweep)?;
            for e in &r.errors {
                write!(out, ",{e}")?;
            }
            writeln!(out)?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("CSV is ASCII")
    }
}
