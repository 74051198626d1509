//! On-disk artifact formats. Every writer here is deterministic: same value
//! in, same bytes out.

use std::fmt::Write as _;
use std::io::BufRead;

use serde::{Deserialize, Serialize};
use wordassoc_core::{
    ActivationMatrix, AssociationNetwork, BiasReport, HeatmapCell, MindsetStream, NormRecord, Normalization,
    PrimeCoefficient, SpreadParams,
};

use crate::error::{Error, Result};

const NETWORK_HEADER: &str = "# wordassoc network";

/// Shortest decimal form that parses back to the same `f64`.
fn num(v: f64) -> String {
    format!("{v:?}")
}

pub fn write_aggregated(records: &[NormRecord]) -> String {
    let mut out = String::new();
    for r in records {
        let _ = writeln!(out, "{}\t{}\t{}", r.cue, r.response, r.count);
    }
    out
}

/// Edge list, one `a<TAB>b<TAB>weight` line per edge in canonical order,
/// under a comment line carrying the node and edge counts.
pub fn write_network(net: &AssociationNetwork) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{NETWORK_HEADER} node_count={} edge_count={}",
        net.node_count(),
        net.edge_count()
    );
    for (a, b, w) in net.edges() {
        let _ = writeln!(out, "{}\t{}\t{}", net.label(a), net.label(b), w);
    }
    out
}

fn header_field(header: &str, key: &str) -> Result<usize> {
    header
        .split_whitespace()
        .find_map(|kv| kv.strip_prefix(key)?.strip_prefix('='))
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| Error::parse(1, format!("network header lacks {key}")))
}

pub fn read_network(reader: impl BufRead) -> Result<AssociationNetwork> {
    let mut lines = reader.lines().enumerate();
    let header = match lines.next() {
        Some((_, line)) => line.map_err(|e| Error::parse(1, e.to_string()))?,
        None => return Err(Error::parse(1, "empty network file")),
    };
    if !header.starts_with(NETWORK_HEADER) {
        return Err(Error::parse(1, "not a wordassoc network file"));
    }
    let nodes = header_field(&header, "node_count")?;
    let edges = header_field(&header, "edge_count")?;

    let mut list = Vec::with_capacity(edges);
    for (i, line) in lines {
        let no = i + 1;
        let line = line.map_err(|e| Error::parse(no, e.to_string()))?;
        if line.is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split('\t').collect();
        if cells.len() != 3 {
            return Err(Error::parse(no, format!("expected 3 columns, found {}", cells.len())));
        }
        let w: u64 = cells[2]
            .parse()
            .map_err(|_| Error::parse(no, format!("bad weight '{}'", cells[2])))?;
        list.push((cells[0].to_owned(), cells[1].to_owned(), w));
    }
    let net = AssociationNetwork::from_edges(list)?;
    if net.node_count() != nodes || net.edge_count() != edges {
        return Err(Error::parse(
            1,
            format!(
                "header promises {nodes} nodes / {edges} edges, body has {} / {}",
                net.node_count(),
                net.edge_count()
            ),
        ));
    }
    Ok(net)
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("artifact types serialize");
    s.push('\n');
    s
}

pub fn from_json<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::parse(e.line(), e.to_string()))
}

/// Sidecar describing how a matrix was produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixMeta {
    pub normalization: Normalization,
    pub params: SpreadParams,
    /// `"2x_diameter"` when the step count was derived, `"override"` otherwise.
    pub steps_source: String,
    pub diameter: u32,
    pub nodes: usize,
    pub primes: Vec<String>,
}

/// Header `node<TAB>prime...`, then one row per node. Values use the
/// shortest round-tripping decimal form.
pub fn write_matrix(m: &ActivationMatrix) -> String {
    let mut out = String::from("node");
    for p in m.prime_labels() {
        out.push('\t');
        out.push_str(p);
    }
    out.push('\n');
    for (r, label) in m.node_labels().iter().enumerate() {
        out.push_str(label);
        for &v in m.row(r) {
            out.push('\t');
            out.push_str(&num(v));
        }
        out.push('\n');
    }
    out
}

pub fn read_matrix(reader: impl BufRead, normalization: Normalization) -> Result<ActivationMatrix> {
    let mut lines = reader.lines();
    let header = match lines.next() {
        Some(line) => line.map_err(|e| Error::parse(1, e.to_string()))?,
        None => return Err(Error::parse(1, "empty matrix file")),
    };
    let mut cols = header.split('\t');
    if cols.next() != Some("node") {
        return Err(Error::parse(1, "matrix header must start with 'node'"));
    }
    let primes: Vec<String> = cols.map(str::to_owned).collect();
    let mut nodes = Vec::new();
    let mut values = Vec::new();
    for (i, line) in lines.enumerate() {
        let no = i + 2;
        let line = line.map_err(|e| Error::parse(no, e.to_string()))?;
        if line.is_empty() {
            continue;
        }
        let mut cells = line.split('\t');
        nodes.push(cells.next().unwrap_or_default().to_owned());
        let before = values.len();
        for c in cells {
            values.push(c.parse::<f64>().map_err(|_| Error::parse(no, format!("bad value '{c}'")))?);
        }
        if values.len() - before != primes.len() {
            return Err(Error::parse(
                no,
                format!("expected {} values, found {}", primes.len(), values.len() - before),
            ));
        }
    }
    Ok(ActivationMatrix::from_parts(nodes, primes, values, normalization)?)
}

fn csv_bytes(write: impl FnOnce(&mut csv::Writer<Vec<u8>>) -> csv::Result<()>) -> String {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    write(&mut w).expect("in-memory csv");
    String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf-8 input")
}

pub fn write_heatmap(cells: &[HeatmapCell]) -> String {
    csv_bytes(|w| {
        w.write_record(["target", "prime", "value"])?;
        for c in cells {
            w.write_record([c.target.as_str(), c.prime.as_str(), &num(c.value)])?;
        }
        Ok(())
    })
}

pub fn write_coefficients(coefs: &[PrimeCoefficient]) -> String {
    csv_bytes(|w| {
        w.write_record(["prime", "coefficient", "std_error", "intercept", "joint_coefficient"])?;
        for c in coefs {
            w.write_record([
                c.prime.as_str(),
                &num(c.coefficient),
                &num(c.std_error),
                &num(c.intercept),
                &num(c.joint_coefficient),
            ])?;
        }
        Ok(())
    })
}

pub fn write_report(report: &BiasReport) -> String {
    to_json(report)
}

pub fn write_stream_json(stream: &MindsetStream) -> String {
    to_json(stream)
}

/// File stem for artifacts keyed by a free-form name.
pub fn file_stem(name: &str) -> String {
    name.chars()
        .map(|c| if c.is_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect()
}
