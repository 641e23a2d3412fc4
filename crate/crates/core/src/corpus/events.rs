use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use indexmap::{IndexMap, IndexSet};
use serde::Deserialize;

use crate::error::{Error, Result};

/// One diagnosis event. A record with count `k` is equivalent to `k`
/// records with count 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EventRecord {
    pub patient_id: String,
    pub code: String,
    pub count: u64,
}

impl EventRecord {
    pub fn new(patient_id: impl Into<String>, code: impl Into<String>, count: u64) -> Self {
        Self {
            patient_id: patient_id.into(),
            code: code.into(),
            count,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventFormat {
    /// Comma-delimited with a mandatory `patient_id,code[,count]` header.
    Csv,
    /// One JSON object per line with the same fields.
    JsonLines,
}

impl EventFormat {
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("jsonl") || ext.eq_ignore_ascii_case("ndjson") => {
                EventFormat::JsonLines
            }
            _ => EventFormat::Csv,
        }
    }
}

/// Row-level tallies gathered while ingesting.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct IngestReport {
    pub rows_read: u64,
    pub zero_count_rows: u64,
}

/// Aggregated event stream. Patients and codes keep first-appearance order,
/// and duplicate (patient, code) rows are summed.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EventLog {
    patients: IndexSet<String>,
    codes: IndexSet<String>,
    cells: IndexMap<(usize, usize), u64>,
    code_totals: Vec<u64>,
    total: u64,
    report: IngestReport,
}

impl EventLog {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds one event. Zero counts are dropped and tallied; empty identifiers
    /// are rejected.
    pub fn push(&mut self, record: EventRecord) -> Result<()> {
        self.report.rows_read += 1;
        if record.patient_id.is_empty() || record.code.is_empty() {
            return Err(Error::InvalidArgument(
                "patient_id and code must be non-empty".into(),
            ));
        }
        if record.count == 0 {
            self.report.zero_count_rows += 1;
            return Ok(());
        }
        let total = self.total.checked_add(record.count).ok_or_else(|| Error::CountOverflow {
            patient: record.patient_id.clone(),
            code: record.code.clone(),
        })?;
        let (p, _) = self.patients.insert_full(record.patient_id);
        let (c, new_code) = self.codes.insert_full(record.code);
        if new_code {
            self.code_totals.push(0);
        }
        let cell = self.cells.entry((p, c)).or_insert(0);
        *cell = cell.checked_add(record.count).ok_or_else(|| Error::CountOverflow {
            patient: self.patients[p].clone(),
            code: self.codes[c].clone(),
        })?;
        self.code_totals[c] += record.count;
        self.total = total;
        Ok(())
    }

    pub fn from_records<I: IntoIterator<Item = EventRecord>>(records: I) -> Result<Self> {
        let mut log = Self::new();
        for r in records {
            log.push(r)?;
        }
        Ok(log)
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn n_patients(&self) -> usize {
        self.patients.len()
    }

    pub fn n_codes(&self) -> usize {
        self.codes.len()
    }

    pub fn total_occurrences(&self) -> u64 {
        self.total
    }

    pub fn report(&self) -> IngestReport {
        self.report
    }

    pub fn patients(&self) -> impl Iterator<Item = &str> {
        self.patients.iter().map(String::as_str)
    }

    /// Aggregated records in first-appearance order.
    pub fn records(&self) -> impl Iterator<Item = (&str, &str, u64)> + '_ {
        self.cells
            .iter()
            .map(|(&(p, c), &n)| (self.patients[p].as_str(), self.codes[c].as_str(), n))
    }

    /// Total occurrences per code, in first-appearance order.
    pub fn code_frequencies(&self) -> Vec<(&str, u64)> {
        self.codes
            .iter()
            .map(String::as_str)
            .zip(self.code_totals.iter().copied())
            .collect()
    }

    pub fn frequency_of(&self, code: &str) -> u64 {
        self.codes
            .get_index_of(code)
            .map_or(0, |c| self.code_totals[c])
    }

    /// Writes the aggregated log as CSV with a `patient_id,code,count` header.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let map = |e: csv::Error| Error::InvalidArgument(e.to_string());
        w.write_record(["patient_id", "code", "count"]).map_err(map)?;
        for (p, c, n) in self.records() {
            w.write_record([p, c, &n.to_string()]).map_err(map)?;
        }
        w.flush().map_err(|e| Error::io("<events>", e))?;
        Ok(())
    }
}

/// Parses an event log. Malformed rows are errors that name the line;
/// zero-count rows are dropped and tallied in [`EventLog::report`].
pub fn ingest_events<R: Read>(source: R, format: EventFormat) -> Result<EventLog> {
    let log = match format {
        EventFormat::Csv => ingest_csv(source)?,
        EventFormat::JsonLines => ingest_jsonl(source)?,
    };
    if log.is_empty() {
        return Err(Error::EmptyEventLog);
    }
    if log.report.zero_count_rows > 0 {
        log::warn!("dropped {} zero-count rows", log.report.zero_count_rows);
    }
    Ok(log)
}

pub fn ingest_path(path: &Path) -> Result<EventLog> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    ingest_events(BufReader::new(file), EventFormat::from_path(path))
}

fn malformed(line: u64, reason: impl Into<String>) -> Error {
    Error::MalformedRow {
        line,
        reason: reason.into(),
    }
}

fn csv_error(err: csv::Error) -> Error {
    let line = err.position().map(|p| p.line()).unwrap_or(0);
    match err.kind() {
        csv::ErrorKind::Io(e) => Error::io("<events>", std::io::Error::new(e.kind(), e.to_string())),
        _ => malformed(line, err.to_string()),
    }
}

fn ingest_csv<R: Read>(source: R) -> Result<EventLog> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(source);

    let header = reader.headers().map_err(csv_error)?.clone();
    if header.is_empty() || (header.len() == 1 && header[0].is_empty()) {
        return Err(Error::EmptyEventLog);
    }
    let column = |name: &str| header.iter().position(|h| h.eq_ignore_ascii_case(name));
    let patient_col = column("patient_id").ok_or_else(|| malformed(1, "header lacks a patient_id column"))?;
    let code_col = column("code").ok_or_else(|| malformed(1, "header lacks a code column"))?;
    let count_col = column("count");

    let mut log = EventLog::new();
    let mut record = csv::StringRecord::new();
    while reader.read_record(&mut record).map_err(csv_error)? {
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        if record.len() != header.len() {
            return Err(malformed(
                line,
                format!("expected {} fields, found {}", header.len(), record.len()),
            ));
        }
        let patient = &record[patient_col];
        let code = &record[code_col];
        if patient.is_empty() {
            return Err(malformed(line, "empty patient_id"));
        }
        if code.is_empty() {
            return Err(malformed(line, "empty code"));
        }
        let count = match count_col.map(|i| &record[i]) {
            None | Some("") => 1,
            Some(s) => s
                .parse::<u64>()
                .map_err(|_| malformed(line, format!("count {s:?} is not a non-negative integer")))?,
        };
        log.push(EventRecord::new(patient, code, count))
            .map_err(|e| malformed(line, e.to_string()))?;
    }
    Ok(log)
}

#[derive(Deserialize)]
struct JsonRow {
    patient_id: String,
    code: String,
    #[serde(default = "one")]
    count: u64,
}

fn one() -> u64 {
    1
}

fn ingest_jsonl<R: Read>(source: R) -> Result<EventLog> {
    let mut log = EventLog::new();
    for (i, line) in BufReader::new(source).lines().enumerate() {
        let line_no = i as u64 + 1;
        let line = line.map_err(|e| malformed(line_no, e.to_string()))?;
        let text = line.trim();
        if text.is_empty() {
            continue;
        }
        let row: JsonRow = serde_json::from_str(text).map_err(|e| malformed(line_no, e.to_string()))?;
        let patient = row.patient_id.trim();
        let code = row.code.trim();
        if patient.is_empty() {
            return Err(malformed(line_no, "empty patient_id"));
        }
        if code.is_empty() {
            return Err(malformed(line_no, "empty code"));
        }
        log.push(EventRecord::new(patient, code, row.count))
            .map_err(|e| malformed(line_no, e.to_string()))?;
    }
    Ok(log)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn csv(text: &str) -> Result<EventLog> {
        ingest_events(text.as_bytes(), EventFormat::Csv)
    }

    #[test]
    fn aggregates_duplicate_rows() {
        let log = csv("patient_id,code,count\np1,A,2\np1,A,3\np2,B,1\n").unwrap();
        let recs: Vec<_> = log.records().collect();
        assert_eq!(recs, vec![("p1", "A", 5), ("p2", "B", 1)]);
        assert_eq!(log.n_patients(), 2);
        assert_eq!(log.n_codes(), 2);
        assert_eq!(log.total_occurrences(), 6);
    }

    #[test]
    fn single_row() {
        let log = csv("patient_id,code,count\np1,A,1\n").unwrap();
        assert_eq!(log.records().count(), 1);
        assert_eq!(log.n_patients(), 1);
        assert_eq!(log.n_codes(), 1);
        assert_eq!(log.total_occurrences(), 1);
    }

    #[test]
    fn count_column_is_optional() {
        let log = csv("code,patient_id\nA,p1\nA,p1\nB,p1\n").unwrap();
        assert_eq!(log.frequency_of("A"), 2);
        assert_eq!(log.total_occurrences(), 3);
    }

    #[test]
    fn zero_counts_are_dropped_and_tallied() {
        let log = csv("patient_id,code,count\np1,A,0\np1,B,2\n").unwrap();
        assert_eq!(log.report().zero_count_rows, 1);
        assert_eq!(log.report().rows_read, 2);
        assert_eq!(log.n_codes(), 1);
    }

    #[test]
    fn empty_source_is_rejected() {
        assert!(matches!(csv(""), Err(Error::EmptyEventLog)));
        assert!(matches!(csv("patient_id,code,count\n"), Err(Error::EmptyEventLog)));
        assert!(matches!(
            ingest_events(&b""[..], EventFormat::JsonLines),
            Err(Error::EmptyEventLog)
        ));
    }

    #[test]
    fn malformed_row_names_its_line() {
        let err = csv("patient_id,code,count\np1,A,1\np2,B,-3\n").unwrap_err();
        match err {
            Error::MalformedRow { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        let err = csv("patient_id,code,count\np1,A,1\np2,B\n").unwrap_err();
        assert!(matches!(err, Error::MalformedRow { line: 3, .. }), "{err:?}");
        let err = csv("patient_id,code,count\n,A,1\n").unwrap_err();
        assert!(matches!(err, Error::MalformedRow { line: 2, .. }), "{err:?}");
    }

    #[test]
    fn missing_header_columns() {
        assert!(matches!(csv("who,what\np1,A\n"), Err(Error::MalformedRow { line: 1, .. })));
    }

    #[test]
    fn json_lines_variant() {
        let text = "{\"patient_id\":\"p1\",\"code\":\"A\",\"count\":2}\n\n{\"patient_id\":\"p1\",\"code\":\"A\"}\n";
        let log = ingest_events(text.as_bytes(), EventFormat::JsonLines).unwrap();
        assert_eq!(log.frequency_of("A"), 3);
        let err = ingest_events(&b"{\"patient_id\":\"p1\"}\n"[..], EventFormat::JsonLines).unwrap_err();
        assert!(matches!(err, Error::MalformedRow { line: 1, .. }));
    }

    #[test]
    fn format_from_extension() {
        assert_eq!(EventFormat::from_path(Path::new("a.jsonl")), EventFormat::JsonLines);
        assert_eq!(EventFormat::from_path(Path::new("a.NDJSON")), EventFormat::JsonLines);
        assert_eq!(EventFormat::from_path(Path::new("a.csv")), EventFormat::Csv);
        assert_eq!(EventFormat::from_path(Path::new("events")), EventFormat::Csv);
    }

    #[test]
    fn csv_round_trip() {
        let log = csv("patient_id,code,count\np1,A,2\np2,\"B,x\",4\np1,A,1\n").unwrap();
        let mut buf = Vec::new();
        log.write_csv(&mut buf).unwrap();
        let again = csv(std::str::from_utf8(&buf).unwrap()).unwrap();
        assert_eq!(
            log.records().collect::<Vec<_>>(),
            again.records().collect::<Vec<_>>()
        );
    }
}
