//! Mindset streams: the minimum-cost paths leading from a prime to a target,
//! and their union as a small subgraph for qualitative reading.

use alloc::collections::{BTreeMap, BTreeSet, BinaryHeap};
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::AssociationNetwork;
use crate::lexicon::Lexicon;

pub const DEFAULT_MAX_PATHS: usize = 16;

/// Relative tolerance under which two path costs count as equal.
const COST_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CostMode {
    /// Edge cost `1 / weight`: strong associations are short.
    InverseWeight,
    /// Every edge costs 1.
    Unit,
}

impl CostMode {
    fn cost(self, weight: u64) -> f64 {
        match self {
            CostMode::InverseWeight => 1.0 / weight as f64,
            CostMode::Unit => 1.0,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            CostMode::InverseWeight => "inverse_weight",
            CostMode::Unit => "unit",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "inverse_weight" => Some(CostMode::InverseWeight),
            "unit" => Some(CostMode::Unit),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MindsetStream {
    pub prime: String,
    pub target: String,
    pub cost_mode: CostMode,
    /// Total cost shared by every enumerated path.
    pub cost: f64,
    /// Co-minimal paths in lexicographic order, each from prime to target.
    pub paths: Vec<Vec<String>>,
    pub hop_lengths: Vec<usize>,
    /// Number of co-minimal paths in the graph (saturating).
    pub total_paths: u64,
    /// Union of the enumerated paths' edges, canonical order.
    pub subgraph: Vec<(String, String, u64)>,
    /// Valence of each subgraph node, filled by [`MindsetStream::annotate`].
    pub node_valence: BTreeMap<String, Option<f64>>,
}

impl MindsetStream {
    pub fn nodes(&self) -> BTreeSet<&str> {
        self.paths.iter().flatten().map(String::as_str).collect()
    }

    /// Records the valence of every node on the stream (absent if unrated).
    pub fn annotate(&mut self, lex: &Lexicon) {
        self.node_valence = self
            .nodes()
            .into_iter()
            .map(|w| (String::from(w), lex.valence(w)))
            .collect();
    }
}

#[derive(Clone, Copy, PartialEq)]
struct Frontier {
    cost: f64,
    node: usize,
}

impl Eq for Frontier {}

impl Ord for Frontier {
    fn cmp(&self, other: &Self) -> Ordering {
        // Min-heap on cost, ties on node index.
        other.cost.total_cmp(&self.cost).then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for Frontier {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn same_cost(a: f64, b: f64) -> bool {
    libm::fabs(a - b) <= COST_TOLERANCE * a.max(b).max(1.0)
}

/// Finds all minimum-cost paths from `prime` to `target` and returns up to
/// `max_paths` of them with their union subgraph.
pub fn extract_stream(
    net: &AssociationNetwork,
    prime: &str,
    target: &str,
    cost_mode: CostMode,
    max_paths: usize,
) -> Result<MindsetStream> {
    if max_paths == 0 {
        return Err(Error::invalid("max_paths must be at least 1"));
    }
    let source = net.index_of(prime).ok_or_else(|| Error::MissingNode(String::from(prime)))?;
    let sink = net.index_of(target).ok_or_else(|| Error::MissingNode(String::from(target)))?;
    if source == sink {
        return Err(Error::DegenerateStream);
    }

    let n = net.node_count();
    let mut dist = vec![f64::INFINITY; n];
    let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut settled = vec![false; n];
    let mut heap = BinaryHeap::new();
    dist[source] = 0.0;
    heap.push(Frontier { cost: 0.0, node: source });
    while let Some(Frontier { cost, node }) = heap.pop() {
        if settled[node] {
            continue;
        }
        settled[node] = true;
        if node == sink {
            break;
        }
        for (next, w) in net.neighbors(node) {
            if settled[next] {
                continue;
            }
            let candidate = cost + cost_mode.cost(w);
            if dist[next].is_finite() && same_cost(candidate, dist[next]) {
                preds[next].push(node);
            } else if candidate < dist[next] {
                dist[next] = candidate;
                preds[next].clear();
                preds[next].push(node);
                heap.push(Frontier {
                    cost: candidate,
                    node: next,
                });
            }
        }
    }

    // Nodes of the shortest-path DAG that lead to the sink, and the forward
    // edges between them.
    let mut on_dag = vec![false; n];
    let mut stack = vec![sink];
    on_dag[sink] = true;
    let mut succ: Vec<Vec<usize>> = vec![Vec::new(); n];
    while let Some(v) = stack.pop() {
        for &u in &preds[v] {
            succ[u].push(v);
            if !on_dag[u] {
                on_dag[u] = true;
                stack.push(u);
            }
        }
    }
    for s in &mut succ {
        s.sort_unstable();
        s.dedup();
    }

    let total_paths = count_paths(source, sink, &succ);

    let mut paths: Vec<Vec<usize>> = Vec::new();
    let mut current = vec![source];
    enumerate(source, sink, &succ, &mut current, &mut paths, max_paths);

    let mut edges: BTreeSet<(usize, usize)> = BTreeSet::new();
    for p in &paths {
        for w in p.windows(2) {
            edges.insert((w[0].min(w[1]), w[0].max(w[1])));
        }
    }
    let subgraph = edges
        .into_iter()
        .map(|(a, b)| {
            let w = net.weight(a, b).expect("path edge exists");
            (String::from(net.label(a)), String::from(net.label(b)), w)
        })
        .collect();

    Ok(MindsetStream {
        prime: String::from(prime),
        target: String::from(target),
        cost_mode,
        cost: dist[sink],
        hop_lengths: paths.iter().map(|p| p.len() - 1).collect(),
        paths: paths
            .iter()
            .map(|p| p.iter().map(|&i| String::from(net.label(i))).collect())
            .collect(),
        total_paths,
        subgraph,
        node_valence: BTreeMap::new(),
    })
}

fn count_paths(source: usize, sink: usize, succ: &[Vec<usize>]) -> u64 {
    fn visit(u: usize, sink: usize, succ: &[Vec<usize>], memo: &mut BTreeMap<usize, u64>) -> u64 {
        if u == sink {
            return 1;
        }
        if let Some(&c) = memo.get(&u) {
            return c;
        }
        let c = succ[u]
            .iter()
            .fold(0u64, |acc, &v| acc.saturating_add(visit(v, sink, succ, memo)));
        memo.insert(u, c);
        c
    }
    visit(source, sink, succ, &mut BTreeMap::new())
}

fn enumerate(
    u: usize,
    sink: usize,
    succ: &[Vec<usize>],
    current: &mut Vec<usize>,
    out: &mut Vec<Vec<usize>>,
    limit: usize,
) {
    if out.len() >= limit {
        return;
    }
    if u == sink {
        out.push(current.clone());
        return;
    }
    for &v in &succ[u] {
        current.push(v);
        enumerate(v, sink, succ, current, out, limit);
        current.pop();
        if out.len() >= limit {
            return;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ValenceClass {
    Positive,
    Neutral,
    Negative,
}

impl ValenceClass {
    pub fn of(valence: Option<f64>) -> Self {
        match valence {
            Some(v) if v >= 0.6 => ValenceClass::Positive,
            Some(v) if v <= 0.4 => ValenceClass::Negative,
            _ => ValenceClass::Neutral,
        }
    }

    fn name(self) -> &'static str {
        match self {
            ValenceClass::Positive => "positive",
            ValenceClass::Neutral => "neutral",
            ValenceClass::Negative => "negative",
        }
    }

    fn color(self) -> &'static str {
        match self {
            ValenceClass::Positive => "#6baed6",
            ValenceClass::Neutral => "#e0e0e0",
            ValenceClass::Negative => "#fb6a4a",
        }
    }
}

fn quoted(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        if c == '"' || c == '\\' {
            out.push('\\');
        }
        out.push(c);
    }
    out.push('"');
    out
}

/// Renders a stream as an undirected DOT graph. Node fill follows valence
/// (blue positive, red negative, grey neutral or unrated). The prime is a
/// double-outlined box and the target a double-outlined ellipse.
pub fn render_dot(stream: &MindsetStream, lex: &Lexicon) -> String {
    let mut out = String::new();
    let title = format!("{} -- {}", stream.prime, stream.target);
    let _ = writeln!(out, "graph {} {{", quoted("mindset_stream"));
    let _ = writeln!(out, "  graph [label={}, labelloc=t];", quoted(&title));
    let _ = writeln!(out, "  node [style=filled, shape=ellipse];");
    for word in stream.nodes() {
        let class = ValenceClass::of(lex.valence(word));
        let mut attrs = format!(
            "label={}, class={}, fillcolor={}",
            quoted(word),
            quoted(class.name()),
            quoted(class.color())
        );
        if word == stream.prime {
            attrs.push_str(", shape=box, peripheries=2");
        } else if word == stream.target {
            attrs.push_str(", peripheries=2");
        }
        let _ = writeln!(out, "  {} [{}];", quoted(word), attrs);
    }
    for (a, b, w) in &stream.subgraph {
        let _ = writeln!(out, "  {} -- {} [label=\"{}\"];", quoted(a), quoted(b), w);
    }
    out.push_str("}\n");
    out
}
