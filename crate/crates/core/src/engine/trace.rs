use std::io::Write;

use ndarray::Array2;

use crate::algorithms::{Algorithm, CostCounters};
use crate::scalar::Scalar;

pub const CSV_HEADER: &str =
    "algorithm,seed,s,t,epochs,grads_total,comm_rounds,stationary_gap,consensus_error,objective,def33_mean";

/// One recorded point of a run. Baseline runs use `s = 0` and `t = k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunRecord<T> {
    pub s: usize,
    pub t: usize,
    /// Cumulative per-node component gradients divided by `m`.
    pub epochs: T,
    pub grads_total: u64,
    pub comm_rounds: u64,
    pub stationary_gap: T,
    pub consensus_error: T,
    /// `F(xbar)`.
    pub objective: T,
    /// Running mean of the stationarity terms; NaN when disabled.
    pub def33_mean: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunTrace<T> {
    pub algorithm: Algorithm,
    pub seed: u64,
    /// Step size actually used, after resolving `auto`.
    pub alpha: T,
    pub records: Vec<RunRecord<T>>,
    pub counters: CostCounters,
    /// Largest tracking deviation seen after any update (zero for DSGD).
    pub max_tracking_deviation: T,
    /// Final running mean over every evaluated iterate.
    pub def33_mean: T,
    /// Number of iterates entering `def33_mean`.
    pub def33_terms: u64,
    pub final_x: Array2<T>,
}

impl<T: Scalar> RunTrace<T> {
    pub fn last(&self) -> Option<&RunRecord<T>> {
        self.records.last()
    }

    pub fn final_stationary_gap(&self) -> Option<T> {
        self.last().map(|r| r.stationary_gap)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{CSV_HEADER}")?;
        let name = self.algorithm.name();
        for r in &self.records {
            writeln!(
                out,
                "{name},{},{},{},{},{},{},{},{},{},{}",
                self.seed,
                r.s,
                r.t,
                r.epochs,
                r.grads_total,
                r.comm_rounds,
                r.stationary_gap,
                r.consensus_error,
                r.objective,
                r.def33_mean
            )?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv is ascii")
    }
}
