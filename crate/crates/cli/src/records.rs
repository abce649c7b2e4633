//! Comma-separated experiment tables.

use std::io::Write;

use anyhow::Result;

pub const HEADER: [&str; 9] = [
    "experiment", "matrix", "family", "gamma", "nnz", "seed", "metric", "k", "value",
];

/// Everything in a row except the metric, `k` and value.
#[derive(Clone, Debug)]
pub struct RecordContext {
    pub experiment: String,
    pub matrix: String,
    pub family: String,
    pub gamma: f64,
    pub nnz: usize,
    pub seed: u64,
}

/// Writes the header once, then appends rows.
pub struct RecordWriter<W: Write> {
    inner: csv::Writer<W>,
}

impl<W: Write> RecordWriter<W> {
    pub fn new(out: W) -> Result<Self> {
        let mut inner = csv::Writer::from_writer(out);
        inner.write_record(HEADER)?;
        Ok(Self { inner })
    }

    /// `k` is 1-based; pass 0 for scalars.
    pub fn write(&mut self, ctx: &RecordContext, metric: &str, k: usize, value: f64) -> Result<()> {
        self.inner.write_record([
            ctx.experiment.as_str(),
            ctx.matrix.as_str(),
            ctx.family.as_str(),
            &ctx.gamma.to_string(),
            &ctx.nnz.to_string(),
            &ctx.seed.to_string(),
            metric,
            &k.to_string(),
            &format!("{value:e}"),
        ])?;
        Ok(())
    }

    pub fn write_curve(&mut self, ctx: &RecordContext, metric: &str, values: &[f64]) -> Result<()> {
        for (i, v) in values.iter().enumerate() {
            self.write(ctx, metric, i + 1, *v)?;
        }
        Ok(())
    }

    pub fn finish(mut self) -> Result<()> {
        self.inner.flush()?;
        Ok(())
    }
}
