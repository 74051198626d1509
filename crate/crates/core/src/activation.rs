//! Spreading activation over an association network.
//!
//! A prime node receives the initial activation; at every synchronous step
//! each node keeps `retention` of its activation and hands the rest to its
//! neighbours in proportion to edge weight:
//!
//! ```text
//! a_j(t+1) = retention * a_j(t) + sum_i (1 - retention) * a_i(t) * w_ij / s_i
//! ```
//!
//! where `s_i` is the strength of node `i`. There is no decay and no
//! suppression, so total activation is conserved.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{diameter, AssociationNetwork, DiameterMethod};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpreadParams {
    /// Fraction of activation a node keeps each step, in `[0, 1]`.
    pub retention: f64,
    pub steps: u32,
    pub initial_activation: f64,
}

impl SpreadParams {
    pub const DEFAULT_RETENTION: f64 = 0.5;

    pub fn new(retention: f64, steps: u32, initial_activation: f64) -> Result<Self> {
        let params = SpreadParams {
            retention,
            steps,
            initial_activation,
        };
        params.validate()?;
        Ok(params)
    }

    /// Retention 0.5, twice the exact diameter as the step count, and the
    /// node count as initial activation.
    pub fn defaults_for(net: &AssociationNetwork) -> Result<Self> {
        let d = diameter(net, DiameterMethod::Exact)?;
        Self::new(Self::DEFAULT_RETENTION, 2 * d.max(1), net.node_count() as f64)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.retention) {
            return Err(Error::invalid(format!("retention {} outside [0, 1]", self.retention)));
        }
        if self.steps == 0 {
            return Err(Error::invalid("steps must be at least 1"));
        }
        if !(self.initial_activation > 0.0 && self.initial_activation.is_finite()) {
            return Err(Error::invalid(format!(
                "initial activation {} must be positive",
                self.initial_activation
            )));
        }
        Ok(())
    }
}

/// Final activation of every node after priming `prime`.
pub fn spread(net: &AssociationNetwork, prime: &str, params: &SpreadParams) -> Result<Vec<f64>> {
    params.validate()?;
    let source = net
        .index_of(prime)
        .ok_or_else(|| Error::MissingPrime(vec![String::from(prime)]))?;
    Ok(diffuse(net, source, params))
}

fn diffuse(net: &AssociationNetwork, source: usize, params: &SpreadParams) -> Vec<f64> {
    let n = net.node_count();
    let mut current = vec![0.0; n];
    let mut next = vec![0.0; n];
    let mut outflow = vec![0.0; n];
    current[source] = params.initial_activation;
    let passed = 1.0 - params.retention;
    let strengths = net.strengths();
    for _ in 0..params.steps {
        for i in 0..n {
            outflow[i] = passed * current[i] / strengths[i];
        }
        for j in 0..n {
            let incoming: f64 = net.neighbors(j).map(|(i, w)| w as f64 * outflow[i]).sum();
            next[j] = params.retention * current[j] + incoming;
        }
        core::mem::swap(&mut current, &mut next);
    }
    current
}

/// Which normalization a matrix has been through.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    Raw,
    L1ColRow,
    L2ColRow,
}

impl Normalization {
    pub fn as_str(self) -> &'static str {
        match self {
            Normalization::Raw => "raw",
            Normalization::L1ColRow => "l1_col_row",
            Normalization::L2ColRow => "l2_col_row",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "raw" => Some(Normalization::Raw),
            "l1_col_row" => Some(Normalization::L1ColRow),
            "l2_col_row" => Some(Normalization::L2ColRow),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Norm {
    L1,
    L2,
}

impl Norm {
    pub fn as_str(self) -> &'static str {
        match self {
            Norm::L1 => "l1",
            Norm::L2 => "l2",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "l1" => Some(Norm::L1),
            "l2" => Some(Norm::L2),
            _ => None,
        }
    }

    fn of(self, values: impl Iterator<Item = f64>) -> f64 {
        match self {
            Norm::L1 => values.map(f64::abs).sum(),
            Norm::L2 => libm::sqrt(values.map(|v| v * v).sum()),
        }
    }

    pub fn tag(self) -> Normalization {
        match self {
            Norm::L1 => Normalization::L1ColRow,
            Norm::L2 => Normalization::L2ColRow,
        }
    }
}

/// Nodes x primes table of final activation levels.
#[derive(Debug, Clone, PartialEq)]
pub struct ActivationMatrix {
    node_labels: Vec<String>,
    prime_labels: Vec<String>,
    /// Row-major, `node_labels.len() * prime_labels.len()`.
    values: Vec<f64>,
    normalization: Normalization,
    row_index: BTreeMap<String, usize>,
}

impl ActivationMatrix {
    /// Assembles a matrix from row-major values. Node labels must be unique.
    pub fn from_parts(
        node_labels: Vec<String>,
        prime_labels: Vec<String>,
        values: Vec<f64>,
        normalization: Normalization,
    ) -> Result<Self> {
        if values.len() != node_labels.len() * prime_labels.len() {
            return Err(Error::invalid(format!(
                "matrix has {} values, expected {} x {}",
                values.len(),
                node_labels.len(),
                prime_labels.len()
            )));
        }
        let mut row_index = BTreeMap::new();
        for (i, label) in node_labels.iter().enumerate() {
            if row_index.insert(label.clone(), i).is_some() {
                return Err(Error::validation(format!("duplicate node label '{label}'")));
            }
        }
        Ok(ActivationMatrix {
            node_labels,
            prime_labels,
            values,
            normalization,
            row_index,
        })
    }

    pub fn rows(&self) -> usize {
        self.node_labels.len()
    }

    pub fn cols(&self) -> usize {
        self.prime_labels.len()
    }

    pub fn node_labels(&self) -> &[String] {
        &self.node_labels
    }

    pub fn prime_labels(&self) -> &[String] {
        &self.prime_labels
    }

    pub fn normalization(&self) -> Normalization {
        self.normalization
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.cols() + col]
    }

    pub fn row_of(&self, node: &str) -> Option<usize> {
        self.row_index.get(node).copied()
    }

    /// Column of the first occurrence of `prime`.
    pub fn col_of(&self, prime: &str) -> Option<usize> {
        self.prime_labels.iter().position(|p| p == prime)
    }

    pub fn column(&self, col: usize) -> impl Iterator<Item = f64> + '_ {
        self.values.iter().skip(col).step_by(self.cols().max(1)).copied()
    }

    pub fn row(&self, row: usize) -> &[f64] {
        let c = self.cols();
        &self.values[row * c..(row + 1) * c]
    }
}

/// Runs [`spread`] for every prime and collects the results as columns.
///
/// All primes are checked before any diffusion starts. With the `std`
/// feature the columns are computed in parallel; each column is produced by
/// an independent sequential loop, so the result does not depend on
/// scheduling.
pub fn spread_batch<S: AsRef<str>>(
    net: &AssociationNetwork,
    primes: &[S],
    params: &SpreadParams,
) -> Result<ActivationMatrix> {
    params.validate()?;
    let mut sources = Vec::with_capacity(primes.len());
    let mut missing = Vec::new();
    for p in primes {
        match net.index_of(p.as_ref()) {
            Some(i) => sources.push(i),
            None => missing.push(String::from(p.as_ref())),
        }
    }
    if !missing.is_empty() {
        return Err(Error::MissingPrime(missing));
    }

    #[cfg(feature = "std")]
    let columns: Vec<Vec<f64>> = {
        use rayon::prelude::*;
        sources.par_iter().map(|&s| diffuse(net, s, params)).collect()
    };
    #[cfg(not(feature = "std"))]
    let columns: Vec<Vec<f64>> = sources.iter().map(|&s| diffuse(net, s, params)).collect();

    let (n, p) = (net.node_count(), primes.len());
    let mut values = vec![0.0; n * p];
    for (k, col) in columns.iter().enumerate() {
        for (i, &v) in col.iter().enumerate() {
            values[i * p + k] = v;
        }
    }
    ActivationMatrix::from_parts(
        net.labels().to_vec(),
        primes.iter().map(|p| String::from(p.as_ref())).collect(),
        values,
        Normalization::Raw,
    )
}

/// Divides every column by its norm, then every row of the result by its
/// norm. Columns or rows with zero norm stay zero.
pub fn normalize_matrix(m: &ActivationMatrix, norm: Norm) -> Result<ActivationMatrix> {
    if m.normalization != Normalization::Raw {
        return Err(Error::Normalization(format!(
            "matrix is already normalized ({})",
            m.normalization.as_str()
        )));
    }
    let (rows, cols) = (m.rows(), m.cols());
    let mut values = m.values.clone();
    for c in 0..cols {
        let scale = norm.of((0..rows).map(|r| values[r * cols + c]));
        if scale > 0.0 {
            for r in 0..rows {
                values[r * cols + c] /= scale;
            }
        }
    }
    for row in values.chunks_mut(cols.max(1)) {
        let scale = norm.of(row.iter().copied());
        if scale > 0.0 {
            row.iter_mut().for_each(|v| *v /= scale);
        }
    }
    Ok(ActivationMatrix {
        values,
        normalization: norm.tag(),
        ..m.clone()
    })
}
