//! Ranked per-topic code listings with a cumulative-probability footer.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::io::Read;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::eval::ranked_indices;
use crate::sampler::TopicModel;

/// Optional code → display label map.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LabelMap {
    labels: HashMap<String, String>,
}

impl LabelMap {
    /// Parses a two-column `code,label` CSV with a header row.
    pub fn from_csv<R: Read>(source: R) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(source);
        let malformed = |line: u64, reason: String| Error::MalformedRow { line, reason };
        let header = reader
            .headers()
            .map_err(|e| malformed(1, e.to_string()))?
            .clone();
        let col = |name: &str| header.iter().position(|h| h.eq_ignore_ascii_case(name));
        let (code_col, label_col) = match (col("code"), col("label")) {
            (Some(c), Some(l)) => (c, l),
            _ => return Err(malformed(1, "label map header must contain code and label".into())),
        };
        let mut labels = HashMap::new();
        for record in reader.records() {
            let record = record.map_err(|e| {
                malformed(e.position().map_or(0, |p| p.line()), e.to_string())
            })?;
            let line = record.position().map_or(0, |p| p.line());
            let code = record.get(code_col).unwrap_or("");
            let label = record.get(label_col).unwrap_or("");
            if code.is_empty() {
                return Err(malformed(line, "empty code".into()));
            }
            if labels.insert(code.to_owned(), label.to_owned()).is_some() {
                return Err(malformed(line, format!("duplicate code {code:?}")));
            }
        }
        Ok(Self { labels })
    }

    pub fn get(&self, code: &str) -> Option<&str> {
        self.labels.get(code).map(String::as_str).filter(|l| !l.is_empty())
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

impl FromIterator<(String, String)> for LabelMap {
    fn from_iter<I: IntoIterator<Item = (String, String)>>(iter: I) -> Self {
        Self {
            labels: iter.into_iter().collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportEntry {
    pub code: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub probability: f64,
}

impl ReportEntry {
    pub fn display_name(&self) -> &str {
        self.label.as_deref().unwrap_or(&self.code)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TopicReportRow {
    pub topic: usize,
    pub entries: Vec<ReportEntry>,
    pub cumulative_probability: f64,
}

/// The `top_n` most probable codes of every topic, ties broken by
/// vocabulary index. `top_n` is capped at the vocabulary size.
pub fn topic_report(model: &TopicModel, labels: Option<&LabelMap>, top_n: usize) -> Result<Vec<TopicReportRow>> {
    if top_n == 0 {
        return Err(Error::InvalidArgument("top_n must be at least 1".into()));
    }
    Ok(model
        .phi
        .iter()
        .enumerate()
        .map(|(topic, row)| {
            let entries: Vec<ReportEntry> = ranked_indices(row)
                .into_iter()
                .take(top_n)
                .map(|w| {
                    let code = model.codes[w].clone();
                    ReportEntry {
                        label: labels.and_then(|l| l.get(&code)).map(str::to_owned),
                        code,
                        probability: row[w],
                    }
                })
                .collect();
            let cumulative_probability = entries.iter().map(|e| e.probability).sum();
            TopicReportRow {
                topic,
                entries,
                cumulative_probability,
            }
        })
        .collect())
}

/// Three decimals without a leading zero: `0.369` → `.369`, `1.0` → `1.000`.
pub fn format_probability(p: f64) -> String {
    let s = format!("{p:.3}");
    match s.strip_prefix("0.") {
        Some(rest) => format!(".{rest}"),
        None => s,
    }
}

pub const CUMULATIVE_LABEL: &str = "CUMULATIVE PROBABILITY";

/// Plain-text rendering: one block per topic, ranked `(condition,
/// probability)` lines, and a cumulative footer.
pub fn render_table(rows: &[TopicReportRow]) -> String {
    let width = rows
        .iter()
        .flat_map(|r| r.entries.iter().map(|e| e.display_name().chars().count()))
        .chain(std::iter::once(CUMULATIVE_LABEL.len()))
        .max()
        .unwrap_or(0);
    let mut out = String::new();
    for (i, row) in rows.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        let _ = writeln!(out, "Topic {}", row.topic);
        for e in &row.entries {
            let _ = writeln!(out, "{:<width$}  {:>5}", e.display_name(), format_probability(e.probability));
        }
        let _ = writeln!(
            out,
            "{:<width$}  {:>5}",
            CUMULATIVE_LABEL,
            format_probability(row.cumulative_probability)
        );
    }
    out
}
