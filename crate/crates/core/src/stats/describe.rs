use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{FeatureGroup, FeatureSchema};
use crate::learn::LabeledDataset;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelStats {
    pub label: String,
    pub n: usize,
    pub mean: Vec<f64>,
    /// Population standard deviation.
    pub std: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub schema: FeatureSchema,
    pub labels: Vec<LabelStats>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DimStat {
    pub mean: f64,
    pub std: f64,
    pub n: usize,
}

/// Per-label mean and population standard deviation of every dimension.
/// Labels appear in lexicographic order.
pub fn describe(data: &LabeledDataset) -> Result<GroupSummary> {
    let labels: Vec<String> = data.classes();
    describe_labels(data, &labels)
}

/// Like [`describe`] for an explicit label order; a label without rows is
/// an error.
pub fn describe_labels(data: &LabeledDataset, labels: &[String]) -> Result<GroupSummary> {
    let mut by: BTreeMap<&str, Vec<&[f64]>> = BTreeMap::new();
    for (row, label) in data.rows.iter().zip(&data.labels) {
        by.entry(label.as_str()).or_default().push(&row.values);
    }
    let dims = data.schema.len();
    let mut out = Vec::with_capacity(labels.len());
    for label in labels {
        let rows = by.get(label.as_str()).ok_or_else(|| Error::EmptyGroup(label.clone()))?;
        let n = rows.len() as f64;
        let mut mean = vec![0.0; dims];
        for r in rows {
            for (m, x) in mean.iter_mut().zip(r.iter()) {
                *m += x;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = vec![0.0; dims];
        for r in rows {
            for ((v, x), m) in var.iter_mut().zip(r.iter()).zip(&mean) {
                *v += (x - m) * (x - m);
            }
        }
        out.push(LabelStats {
            label: label.clone(),
            n: rows.len(),
            mean,
            std: var.into_iter().map(|v| (v / n).sqrt()).collect(),
        });
    }
    Ok(GroupSummary {
        schema: data.schema.clone(),
        labels: out,
    })
}

impl GroupSummary {
    pub fn get(&self, label: &str, dim: &str) -> Option<DimStat> {
        let col = self.schema.names().iter().position(|d| *d == dim)?;
        let l = self.labels.iter().find(|l| l.label == label)?;
        Some(DimStat {
            mean: l.mean[col],
            std: l.std[col],
            n: l.n,
        })
    }

    /// `label,dimension,mean,std,n` rows.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["label", "dimension", "mean", "std", "n"])?;
        let names = self.schema.names();
        for l in &self.labels {
            for (i, d) in names.iter().enumerate() {
                out.write_record([
                    l.label.clone(),
                    d.to_string(),
                    l.mean[i].to_string(),
                    l.std[i].to_string(),
                    l.n.to_string(),
                ])?;
            }
        }
        out.flush().map_err(|e| Error::io("<summary csv>", e))
    }

    /// Aligned text tables, one per feature group, with a μ/σ column pair
    /// per dimension and an average row. Coverage groups print as
    /// percentages.
    pub fn render_table(&self) -> String {
        let mut out = String::new();
        let mut offset = 0;
        let label_w = self.labels.iter().map(|l| l.label.len()).max().unwrap_or(0).max("Average".len());
        for g in &self.schema.groups {
            let dims = g.dimensions();
            let pct = matches!(g, FeatureGroup::Ne | FeatureGroup::Timex);
            let fmt = |v: f64| if pct { format!("{:.2}%", 100.0 * v) } else { format!("{v:.2}") };
            let mut rows: Vec<(String, Vec<String>)> = Vec::new();
            for l in &self.labels {
                let cells = (0..dims.len())
                    .flat_map(|i| [fmt(l.mean[offset + i]), fmt(l.std[offset + i])])
                    .collect();
                rows.push((l.label.clone(), cells));
            }
            if self.labels.len() > 1 {
                let k = self.labels.len() as f64;
                let cells = (0..dims.len())
                    .flat_map(|i| {
                        let m = self.labels.iter().map(|l| l.mean[offset + i]).sum::<f64>() / k;
                        let s = self.labels.iter().map(|l| l.std[offset + i]).sum::<f64>() / k;
                        [fmt(m), fmt(s)]
                    })
                    .collect();
                rows.push(("Average".into(), cells));
            }
            let cell_w: Vec<usize> = (0..2 * dims.len())
                .map(|c| {
                    let head = if c % 2 == 0 { dims[c / 2].len().max(2) } else { 2 };
                    rows.iter().map(|r| r.1[c].len()).max().unwrap_or(0).max(head)
                })
                .collect();

            let _ = writeln!(out, "[{}]", g.name());
            let mut header = format!("{:label_w$}", "");
            let mut sub = format!("{:label_w$}", "");
            for (i, d) in dims.iter().enumerate() {
                let w = cell_w[2 * i] + 1 + cell_w[2 * i + 1];
                let _ = write!(header, " | {d:^w$}");
                let _ = write!(sub, " | {:>w1$} {:>w2$}", "mu", "sd", w1 = cell_w[2 * i], w2 = cell_w[2 * i + 1]);
            }
            let _ = writeln!(out, "{header}");
            let _ = writeln!(out, "{sub}");
            let _ = writeln!(out, "{}", "-".repeat(sub.len()));
            for (label, cells) in &rows {
                let mut line = format!("{label:label_w$}");
                for i in 0..dims.len() {
                    let _ = write!(
                        line,
                        " | {:>w1$} {:>w2$}",
                        cells[2 * i],
                        cells[2 * i + 1],
                        w1 = cell_w[2 * i],
                        w2 = cell_w[2 * i + 1]
                    );
                }
                let _ = writeln!(out, "{line}");
            }
            out.push('\n');
            offset += dims.len();
        }
        out
    }
}
