//! Report rows and their CSV / JSON-lines encodings.

use std::io::Write;
use std::time::Instant;

use clap::ValueEnum;
use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// One computed quantity, optionally next to the closed value it should equal.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ReportRow {
    pub n: u32,
    pub q: Option<u64>,
    pub p: Option<u64>,
    pub r: Option<u32>,
    pub method: String,
    pub value: String,
    pub closed: Option<String>,
    #[serde(rename = "match")]
    pub matched: bool,
    pub elapsed_ms: u64,
}

impl ReportRow {
    pub fn new(n: u32, method: impl Into<String>, value: impl ToString) -> Self {
        ReportRow {
            n,
            q: None,
            p: None,
            r: None,
            method: method.into(),
            value: value.to_string(),
            closed: None,
            matched: true,
            elapsed_ms: 0,
        }
    }

    pub fn q(mut self, q: u64) -> Self {
        self.q = Some(q);
        self
    }

    pub fn p(mut self, p: u64) -> Self {
        self.p = Some(p);
        self
    }

    pub fn r(mut self, r: u32) -> Self {
        self.r = Some(r);
        self
    }

    /// Sets the expected value; the row matches iff the strings agree.
    pub fn closed(mut self, closed: impl ToString) -> Self {
        let c = closed.to_string();
        self.matched = c == self.value;
        self.closed = Some(c);
        self
    }

    /// For rows checked by an inequality rather than an equality.
    pub fn check(mut self, ok: bool) -> Self {
        self.matched = ok;
        self
    }

    pub fn elapsed(mut self, ms: u64) -> Self {
        self.elapsed_ms = ms;
        self
    }

    fn sort_key(&self) -> (u32, Option<u64>, Option<u64>, Option<u32>, &str) {
        (self.n, self.q, self.p, self.r, &self.method)
    }
}

/// Runs `f` and returns its result with the elapsed milliseconds.
pub fn timed<T>(f: impl FnOnce() -> T) -> (T, u64) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed().as_millis() as u64)
}

pub fn sort_rows(rows: &mut [ReportRow]) {
    rows.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
}

pub fn mismatches(rows: &[ReportRow]) -> usize {
    rows.iter().filter(|r| !r.matched).count()
}

pub fn write_rows<W: Write>(out: W, rows: &[ReportRow], format: Format) -> std::io::Result<()> {
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            if rows.is_empty() {
                w.write_record(["n", "q", "p", "r", "method", "value", "closed", "match", "elapsed_ms"])?;
            }
            for row in rows {
                w.serialize(row)?;
            }
            w.flush()
        }
        Format::Json => {
            let mut out = out;
            for row in rows {
                serde_json::to_writer(&mut out, row)?;
                writeln!(out)?;
            }
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout() {
        let rows = vec![ReportRow::new(4, "exact-count", 37500).q(25).p(5).r(2).closed("37500")];
        let mut buf = Vec::new();
        write_rows(&mut buf, &rows, Format::Csv).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "n,q,p,r,method,value,closed,match,elapsed_ms\n4,25,5,2,exact-count,37500,37500,true,0\n"
        );
    }

    #[test]
    fn json_lines() {
        let rows = vec![ReportRow::new(3, "estimate", -15).p(5).check(false)];
        let mut buf = Vec::new();
        write_rows(&mut buf, &rows, Format::Json).unwrap();
        let v: serde_json::Value = serde_json::from_slice(&buf).unwrap();
        assert_eq!(v["value"], "-15");
        assert_eq!(v["match"], false);
        assert!(v["closed"].is_null());
    }

    #[test]
    fn rows_sort_numerically() {
        let mut rows = vec![
            ReportRow::new(2, "a", 0).p(11),
            ReportRow::new(2, "a", 0).p(5),
            ReportRow::new(1, "a", 0).p(97),
        ];
        sort_rows(&mut rows);
        let ps: Vec<_> = rows.iter().map(|r| r.p.unwrap()).collect();
        assert_eq!(ps, [97, 5, 11]);
    }
}
