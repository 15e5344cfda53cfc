//! Side-by-side deltas of every method against the first one listed.

use std::io::Write;

use anyhow::Result;

use crate::output::fmt_f64;
use crate::sweep::SweepRecord;

pub const COMPARE_HEADER: [&str; 8] = [
    "scheme",
    "nbar",
    "method",
    "variance",
    "reference",
    "reference_variance",
    "rel_delta",
    "notes",
];

#[derive(Debug, Clone, PartialEq)]
pub struct Delta {
    pub scheme: String,
    pub nbar: f64,
    pub method: String,
    pub variance: Option<f64>,
    pub reference: String,
    pub reference_variance: Option<f64>,
    pub notes: String,
}

impl Delta {
    pub fn rel_delta(&self) -> Option<f64> {
        Some((self.variance? - self.reference_variance?) / self.reference_variance?)
    }
}

/// `records` must come from a sweep, i.e. grouped by scheme then method,
/// each group holding the same grid. Pairs are matched by grid position.
pub fn pair_up(records: &[SweepRecord], methods: &[String], grid_len: usize) -> Vec<Delta> {
    let mut out = Vec::new();
    if methods.len() < 2 || grid_len == 0 {
        return out;
    }
    for block in records.chunks(methods.len() * grid_len) {
        let reference = &block[..grid_len];
        for k in 0..grid_len {
            for m in 1..methods.len() {
                let r = &block[m * grid_len + k];
                let base = &reference[k];
                out.push(Delta {
                    scheme: r.scheme.clone(),
                    nbar: base.nbar,
                    method: r.method.clone(),
                    variance: r.variance,
                    reference: base.method.clone(),
                    reference_variance: base.variance,
                    notes: [base.notes.as_str(), r.notes.as_str()]
                        .iter()
                        .filter(|n| n.starts_with("skip:") || n.starts_with("error:"))
                        .cloned()
                        .collect::<Vec<_>>()
                        .join(";"),
                });
            }
        }
    }
    out
}

pub fn write_deltas<W: Write>(deltas: &[Delta], sink: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(sink);
    w.write_record(COMPARE_HEADER)?;
    let opt = |x: Option<f64>| x.map(fmt_f64).unwrap_or_default();
    for d in deltas {
        w.write_record([
            d.scheme.clone(),
            fmt_f64(d.nbar),
            d.method.clone(),
            opt(d.variance),
            d.reference.clone(),
            opt(d.reference_variance),
            opt(d.rel_delta()),
            d.notes.clone(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
