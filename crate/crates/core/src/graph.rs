//! Construction of the undirected association network and its structural
//! statistics.
//!
//! Nodes are stored in lexicographic label order, so node indices are dense
//! (`0..n`) and the canonical edge order `(i, j)` with `i < j` coincides
//! with the lexicographic order of the word pairs.

use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One aggregated cue -> response association.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct NormRecord {
    pub cue: String,
    pub response: String,
    pub count: u64,
}

impl NormRecord {
    pub fn new(cue: impl Into<String>, response: impl Into<String>, count: u64) -> Result<Self> {
        let rec = NormRecord {
            cue: cue.into(),
            response: response.into(),
            count,
        };
        rec.validate()?;
        Ok(rec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.count == 0 {
            return Err(Error::validation(format!(
                "count for {} -> {} must be positive",
                self.cue, self.response
            )));
        }
        for token in [&self.cue, &self.response] {
            if token.is_empty() {
                return Err(Error::validation("empty token in norm record"));
            }
            if token.contains(['\t', '\n', '\r']) {
                return Err(Error::validation(format!(
                    "token {token:?} contains a tab or newline"
                )));
            }
        }
        Ok(())
    }
}

/// Undirected, weighted, connected word graph in compressed adjacency form.
#[derive(Debug, Clone, PartialEq)]
pub struct AssociationNetwork {
    labels: Vec<String>,
    index: BTreeMap<String, u32>,
    offsets: Vec<usize>,
    neighbors: Vec<u32>,
    weights: Vec<u64>,
    strength: Vec<f64>,
    edge_count: usize,
}

impl AssociationNetwork {
    /// Builds a network from labelled undirected edges.
    ///
    /// The edge list must be simple (no self-loops, no repeated pair in
    /// either orientation), have positive weights and form a single
    /// connected component.
    pub fn from_edges<S: AsRef<str>>(edges: impl IntoIterator<Item = (S, S, u64)>) -> Result<Self> {
        let mut pairs: BTreeMap<(String, String), u64> = BTreeMap::new();
        for (a, b, w) in edges {
            let (a, b) = (a.as_ref(), b.as_ref());
            if a == b {
                return Err(Error::validation(format!("self-loop on '{a}'")));
            }
            if w == 0 {
                return Err(Error::validation(format!("zero weight on edge {a} -- {b}")));
            }
            let key = if a < b {
                (String::from(a), String::from(b))
            } else {
                (String::from(b), String::from(a))
            };
            if pairs.insert(key, w).is_some() {
                return Err(Error::validation(format!("duplicate edge {a} -- {b}")));
            }
        }
        if pairs.is_empty() {
            return Err(Error::EmptyNetwork);
        }
        let net = Self::from_canonical(pairs);
        let components = net.component_count();
        if components != 1 {
            return Err(Error::Disconnected { components });
        }
        Ok(net)
    }

    fn from_canonical(pairs: BTreeMap<(String, String), u64>) -> Self {
        let mut words: BTreeSet<&str> = BTreeSet::new();
        for (a, b) in pairs.keys() {
            words.insert(a);
            words.insert(b);
        }
        let labels: Vec<String> = words.into_iter().map(String::from).collect();
        let index: BTreeMap<String, u32> = labels
            .iter()
            .enumerate()
            .map(|(i, w)| (w.clone(), i as u32))
            .collect();

        let n = labels.len();
        let mut degree = vec![0usize; n];
        let edges: Vec<(u32, u32, u64)> = pairs
            .iter()
            .map(|((a, b), &w)| (index[a], index[b], w))
            .collect();
        for &(i, j, _) in &edges {
            degree[i as usize] += 1;
            degree[j as usize] += 1;
        }
        let mut offsets = vec![0usize; n + 1];
        for i in 0..n {
            offsets[i + 1] = offsets[i] + degree[i];
        }
        let mut fill = offsets.clone();
        let mut neighbors = vec![0u32; offsets[n]];
        let mut weights = vec![0u64; offsets[n]];
        // Edges arrive sorted by (i, j), so every adjacency list ends up sorted.
        for &(i, j, w) in &edges {
            neighbors[fill[i as usize]] = j;
            weights[fill[i as usize]] = w;
            fill[i as usize] += 1;
            neighbors[fill[j as usize]] = i;
            weights[fill[j as usize]] = w;
            fill[j as usize] += 1;
        }
        for i in 0..n {
            let (lo, hi) = (offsets[i], offsets[i + 1]);
            let mut adj: Vec<(u32, u64)> = neighbors[lo..hi]
                .iter()
                .copied()
                .zip(weights[lo..hi].iter().copied())
                .collect();
            adj.sort_unstable();
            for (k, (j, w)) in adj.into_iter().enumerate() {
                neighbors[lo + k] = j;
                weights[lo + k] = w;
            }
        }
        let strength = (0..n)
            .map(|i| weights[offsets[i]..offsets[i + 1]].iter().map(|&w| w as f64).sum())
            .collect();

        AssociationNetwork {
            labels,
            index,
            offsets,
            neighbors,
            weights,
            strength,
            edge_count: edges.len(),
        }
    }

    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, node: usize) -> &str {
        &self.labels[node]
    }

    pub fn index_of(&self, word: &str) -> Option<usize> {
        self.index.get(word).map(|&i| i as usize)
    }

    pub fn contains(&self, word: &str) -> bool {
        self.index.contains_key(word)
    }

    pub fn degree(&self, node: usize) -> usize {
        self.offsets[node + 1] - self.offsets[node]
    }

    /// Sum of incident edge weights.
    pub fn strength(&self, node: usize) -> f64 {
        self.strength[node]
    }

    pub fn strengths(&self) -> &[f64] {
        &self.strength
    }

    /// `(neighbor, weight)` pairs of `node`, sorted by neighbor index.
    pub fn neighbors(&self, node: usize) -> impl Iterator<Item = (usize, u64)> + '_ {
        let range = self.offsets[node]..self.offsets[node + 1];
        self.neighbors[range.clone()]
            .iter()
            .zip(&self.weights[range])
            .map(|(&j, &w)| (j as usize, w))
    }

    pub fn weight(&self, a: usize, b: usize) -> Option<u64> {
        let range = self.offsets[a]..self.offsets[a + 1];
        self.neighbors[range.clone()]
            .binary_search(&(b as u32))
            .ok()
            .map(|k| self.weights[range.start + k])
    }

    /// Edges `(i, j, weight)` with `i < j` in canonical lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, u64)> + '_ {
        (0..self.node_count())
            .flat_map(move |i| self.neighbors(i).filter(move |&(j, _)| j > i).map(move |(j, w)| (i, j, w)))
    }

    fn component_count(&self) -> usize {
        let n = self.node_count();
        let mut seen = vec![false; n];
        let mut count = 0;
        let mut queue = VecDeque::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            count += 1;
            seen[start] = true;
            queue.push_back(start);
            while let Some(u) = queue.pop_front() {
                for (v, _) in self.neighbors(u) {
                    if !seen[v] {
                        seen[v] = true;
                        queue.push_back(v);
                    }
                }
            }
        }
        count
    }
}

/// Builds the filtered network from aggregated norms.
///
/// Steps, in order: vocabulary filter, self-loop removal, undirecting with
/// the larger of the two directed weights, removal of edges lighter than
/// `min_weight`, and restriction to the largest connected component (ties
/// go to the component holding the lexicographically smallest word).
pub fn build_network(
    records: &[NormRecord],
    vocabulary: Option<&BTreeSet<String>>,
    min_weight: u64,
) -> Result<AssociationNetwork> {
    if min_weight == 0 {
        return Err(Error::invalid("min_weight must be at least 1"));
    }
    let mut keys: BTreeSet<(&str, &str)> = BTreeSet::new();
    for rec in records {
        rec.validate()?;
        if !keys.insert((&rec.cue, &rec.response)) {
            return Err(Error::validation(format!(
                "records are not aggregated: duplicate {} -> {}",
                rec.cue, rec.response
            )));
        }
    }

    let in_vocab = |w: &str| vocabulary.is_none_or(|v| v.contains(w));
    let mut undirected: BTreeMap<(String, String), u64> = BTreeMap::new();
    for rec in records {
        if !in_vocab(&rec.cue) || !in_vocab(&rec.response) || rec.cue == rec.response {
            continue;
        }
        let key = if rec.cue < rec.response {
            (rec.cue.clone(), rec.response.clone())
        } else {
            (rec.response.clone(), rec.cue.clone())
        };
        let w = undirected.entry(key).or_insert(0);
        *w = (*w).max(rec.count);
    }
    undirected.retain(|_, w| *w >= min_weight);
    if undirected.is_empty() {
        return Err(Error::EmptyNetwork);
    }

    let full = AssociationNetwork::from_canonical(undirected);
    let keep = largest_component(&full);
    let kept: BTreeMap<(String, String), u64> = full
        .edges()
        .filter(|&(i, _, _)| keep[i])
        .map(|(i, j, w)| ((full.labels[i].clone(), full.labels[j].clone()), w))
        .collect();
    Ok(AssociationNetwork::from_canonical(kept))
}

/// Membership mask of the largest component. Components are discovered in
/// increasing order of their smallest node index, and a later component
/// must be strictly larger to win, which implements the lexicographic
/// tie-break.
fn largest_component(net: &AssociationNetwork) -> Vec<bool> {
    let n = net.node_count();
    let mut comp = vec![usize::MAX; n];
    let mut sizes = Vec::new();
    let mut queue = VecDeque::new();
    for start in 0..n {
        if comp[start] != usize::MAX {
            continue;
        }
        let id = sizes.len();
        let mut size = 0;
        comp[start] = id;
        queue.push_back(start);
        while let Some(u) = queue.pop_front() {
            size += 1;
            for (v, _) in net.neighbors(u) {
                if comp[v] == usize::MAX {
                    comp[v] = id;
                    queue.push_back(v);
                }
            }
        }
        sizes.push(size);
    }
    let mut best = 0;
    for (id, &size) in sizes.iter().enumerate() {
        if size > sizes[best] {
            best = id;
        }
    }
    comp.into_iter().map(|c| c == best).collect()
}

/// Structural summary of a network.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NetworkStats {
    pub node_count: usize,
    pub edge_count: usize,
    pub density: f64,
    pub average_degree: f64,
    pub diameter: u32,
}

pub fn network_stats(net: &AssociationNetwork) -> NetworkStats {
    let n = net.node_count() as f64;
    let m = net.edge_count() as f64;
    NetworkStats {
        node_count: net.node_count(),
        edge_count: net.edge_count(),
        density: 2.0 * m / (n * (n - 1.0)),
        average_degree: 2.0 * m / n,
        diameter: exact_diameter(net),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiameterMethod {
    /// True maximum eccentricity, found with iFUB bound pruning.
    Exact,
    /// Distance reached by two BFS sweeps; a lower bound.
    DoubleSweepLowerBound,
}

/// Unweighted (hop-count) diameter.
pub fn diameter(net: &AssociationNetwork, method: DiameterMethod) -> Result<u32> {
    let mut dist = vec![u32::MAX; net.node_count()];
    let (_, _, reached) = bfs(net, 0, &mut dist);
    if reached != net.node_count() {
        return Err(Error::Disconnected {
            components: net.component_count(),
        });
    }
    Ok(match method {
        DiameterMethod::Exact => exact_diameter(net),
        DiameterMethod::DoubleSweepLowerBound => {
            let (_, far, _) = bfs(net, 0, &mut dist);
            bfs(net, far, &mut dist).0
        }
    })
}

/// BFS from `src`; fills `dist` and returns (eccentricity, lowest-index
/// farthest node, reached count).
fn bfs(net: &AssociationNetwork, src: usize, dist: &mut [u32]) -> (u32, usize, usize) {
    dist.fill(u32::MAX);
    let mut queue = VecDeque::with_capacity(dist.len());
    dist[src] = 0;
    queue.push_back(src);
    let (mut ecc, mut far, mut reached) = (0, src, 0);
    while let Some(u) = queue.pop_front() {
        reached += 1;
        let d = dist[u];
        if d > ecc || (d == ecc && u < far) {
            ecc = d;
            far = u;
        }
        for (v, _) in net.neighbors(u) {
            if dist[v] == u32::MAX {
                dist[v] = d + 1;
                queue.push_back(v);
            }
        }
    }
    (ecc, far, reached)
}

fn eccentricity(net: &AssociationNetwork, src: usize, scratch: &mut [u32]) -> u32 {
    bfs(net, src, scratch).0
}

fn exact_diameter(net: &AssociationNetwork) -> u32 {
    let n = net.node_count();
    if n < 2 {
        return 0;
    }
    let mut dist_a = vec![u32::MAX; n];
    let mut scratch = vec![u32::MAX; n];

    // Two sweeps from the highest-degree node give a lower bound and a long
    // path whose midpoint is a good root for the upper-bound levels.
    let hub = (0..n).max_by_key(|&i| (net.degree(i), core::cmp::Reverse(i))).unwrap_or(0);
    let (_, a, _) = bfs(net, hub, &mut scratch);
    let (ecc_a, b, _) = bfs(net, a, &mut dist_a);
    let mut lower = ecc_a;

    let mut mid = b;
    while dist_a[mid] > ecc_a / 2 {
        let want = dist_a[mid] - 1;
        mid = net
            .neighbors(mid)
            .map(|(v, _)| v)
            .find(|&v| dist_a[v] == want)
            .expect("BFS parent exists");
    }

    let mut dist_root = vec![u32::MAX; n];
    let (ecc_root, _, _) = bfs(net, mid, &mut dist_root);
    lower = lower.max(ecc_root);

    let mut levels: Vec<Vec<usize>> = vec![Vec::new(); ecc_root as usize + 1];
    for (v, &d) in dist_root.iter().enumerate() {
        levels[d as usize].push(v);
    }

    let mut level = ecc_root;
    while level >= 1 {
        for &v in &levels[level as usize] {
            lower = lower.max(eccentricity(net, v, &mut scratch));
        }
        // Pairs with both ends below this level are at most 2(level-1) apart.
        if lower >= 2 * (level - 1) {
            return lower;
        }
        level -= 1;
    }
    lower
}
