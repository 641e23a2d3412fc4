//! Topic quality measures: Jensen-Shannon inter-topic distances
//! (distinctiveness) and threshold / top-mass reports (tightness).

use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Inputs whose sum is within this of 1 are renormalized; others are
/// rejected.
pub const SUM_TOLERANCE: f64 = 1e-6;

pub const DEFAULT_THRESHOLD: f64 = 0.01;
pub const DEFAULT_TOP_N: usize = 10;

fn checked_distribution(x: &[f64]) -> Result<Vec<f64>> {
    if let Some((index, &value)) = x.iter().enumerate().find(|(_, v)| !v.is_finite() || **v < 0.0) {
        return Err(Error::NegativeProbability { index, value });
    }
    let sum: f64 = x.iter().sum();
    if (sum - 1.0).abs() > SUM_TOLERANCE {
        return Err(Error::NotADistribution { sum });
    }
    Ok(x.iter().map(|v| v / sum).collect())
}

/// Jensen-Shannon divergence in nats, in `[0, ln 2]`.
///
/// Terms with a zero probability contribute nothing.
pub fn jsd(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    if x.is_empty() {
        return Err(Error::InvalidArgument("empty distribution".into()));
    }
    let x = checked_distribution(x)?;
    let y = checked_distribution(y)?;
    let mut sx = 0.0;
    let mut sy = 0.0;
    for (&xi, &yi) in x.iter().zip(&y) {
        let m = 0.5 * (xi + yi);
        if xi > 0.0 {
            sx += xi * (xi / m).ln();
        }
        if yi > 0.0 {
            sy += yi * (yi / m).ln();
        }
    }
    Ok((0.5 * sx + 0.5 * sy).clamp(0.0, std::f64::consts::LN_2))
}

/// Symmetric K×K matrix of pairwise JSD values with a zero diagonal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceMatrix {
    pub k: usize,
    pub values: Vec<Vec<f64>>,
}

impl DistanceMatrix {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i][j]
    }

    /// Entries strictly above the diagonal, row by row.
    pub fn upper_triangle(&self) -> Vec<f64> {
        (0..self.k)
            .flat_map(|i| ((i + 1)..self.k).map(move |j| (i, j)))
            .map(|(i, j)| self.values[i][j])
            .collect()
    }

    pub fn to_table(&self) -> String {
        let mut out = String::from("topic");
        for j in 0..self.k {
            let _ = write!(out, " {:>8}", j);
        }
        out.push('\n');
        for (i, row) in self.values.iter().enumerate() {
            let _ = write!(out, "{:>5}", i);
            for v in row {
                let _ = write!(out, " {:>8.6}", v);
            }
            out.push('\n');
        }
        out
    }
}

pub fn inter_topic_distances(phi: &[Vec<f64>]) -> Result<DistanceMatrix> {
    let k = phi.len();
    let mut values = vec![vec![0.0; k]; k];
    for i in 0..k {
        for j in (i + 1)..k {
            let d = jsd(&phi[i], &phi[j])?;
            values[i][j] = d;
            values[j][i] = d;
        }
    }
    if k == 1 {
        // still validate the lone row
        checked_distribution(&phi[0])?;
    }
    Ok(DistanceMatrix { k, values })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistinctivenessSummary {
    pub mean: f64,
    pub median: f64,
    pub min: f64,
}

impl fmt::Display for DistinctivenessSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "mean={:.6} median={:.6} min={:.6}", self.mean, self.median, self.min)
    }
}

/// Mean, median and minimum over the K(K-1)/2 distinct topic pairs.
pub fn distinctiveness_summary(d: &DistanceMatrix) -> Result<DistinctivenessSummary> {
    if d.k < 2 {
        return Err(Error::NoDistinctPairs);
    }
    let mut pairs = d.upper_triangle();
    pairs.sort_by(f64::total_cmp);
    Ok(DistinctivenessSummary {
        mean: pairs.iter().sum::<f64>() / pairs.len() as f64,
        median: median_of_sorted(&pairs),
        min: pairs[0],
    })
}

/// Even counts take the midpoint of the two central order statistics.
fn median_of_sorted(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicTightness {
    pub topic: usize,
    pub n_above_threshold: usize,
    pub top_n_mass: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TightnessReport {
    pub threshold: f64,
    pub top_n: usize,
    pub topics: Vec<TopicTightness>,
}

impl TightnessReport {
    pub fn to_table(&self) -> String {
        let mut out = format!("{:>5} {:>10} {:>10}\n", "topic", format!(">{}", self.threshold), format!("top{}", self.top_n));
        for t in &self.topics {
            let _ = writeln!(out, "{:>5} {:>10} {:>10.6}", t.topic, t.n_above_threshold, t.top_n_mass);
        }
        out
    }
}

/// Indices of `row` ordered by descending value, ties by ascending index.
pub fn ranked_indices(row: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..row.len()).collect();
    idx.sort_by(|&a, &b| row[b].total_cmp(&row[a]).then(a.cmp(&b)));
    idx
}

/// Per topic: how many codes have probability strictly above `threshold`,
/// and the mass of the `top_n` most probable codes.
pub fn tightness(phi: &[Vec<f64>], threshold: f64, top_n: usize) -> Result<TightnessReport> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::InvalidArgument(format!("threshold {threshold} outside (0, 1)")));
    }
    let v = phi.first().map_or(0, Vec::len);
    if top_n == 0 || top_n > v {
        return Err(Error::InvalidArgument(format!("top_n {top_n} outside 1..={v}")));
    }
    let topics = phi
        .iter()
        .enumerate()
        .map(|(topic, row)| {
            if row.len() != v {
                return Err(Error::LengthMismatch {
                    left: row.len(),
                    right: v,
                });
            }
            let row = checked_distribution(row)?;
            let top_n_mass: f64 = ranked_indices(&row).iter().take(top_n).map(|&i| row[i]).sum();
            Ok(TopicTightness {
                topic,
                n_above_threshold: row.iter().filter(|&&p| p > threshold).count(),
                top_n_mass: top_n_mass.min(1.0),
            })
        })
        .collect::<Result<_>>()?;
    Ok(TightnessReport {
        threshold,
        top_n,
        topics,
    })
}
