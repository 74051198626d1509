//! Random inputs and brute-force oracles shared by the integration suites.
//! Every oracle here is written independently of the library code paths.

#![allow(dead_code)]

use std::collections::VecDeque;

use rand::Rng;
use wordassoc_core::{AssociationNetwork, CostMode, SpreadParams};

pub fn label(i: usize) -> String {
    format!("w{i:04}")
}

/// Random connected graph: a random spanning tree plus `extra` random
/// chords, weights in `1..=max_weight`.
pub fn random_network(rng: &mut impl Rng, n: usize, extra: usize, max_weight: u64) -> AssociationNetwork {
    assert!(n >= 2);
    let mut edges = std::collections::BTreeMap::new();
    for i in 1..n {
        let j = rng.gen_range(0..i);
        edges.insert((j, i), rng.gen_range(1..=max_weight));
    }
    for _ in 0..extra {
        let (a, b) = (rng.gen_range(0..n), rng.gen_range(0..n));
        if a != b {
            edges.entry((a.min(b), a.max(b))).or_insert_with(|| rng.gen_range(1..=max_weight));
        }
    }
    AssociationNetwork::from_edges(edges.into_iter().map(|((a, b), w)| (label(a), label(b), w))).unwrap()
}

/// Dense weight matrix, row-major.
pub fn dense_weights(net: &AssociationNetwork) -> Vec<f64> {
    let n = net.node_count();
    let mut w = vec![0.0; n * n];
    for (a, b, x) in net.edges() {
        w[a * n + b] = x as f64;
        w[b * n + a] = x as f64;
    }
    w
}

fn matmul(a: &[f64], b: &[f64], n: usize) -> Vec<f64> {
    let mut c = vec![0.0; n * n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i * n + k];
            if aik != 0.0 {
                for j in 0..n {
                    c[i * n + j] += aik * b[k * n + j];
                }
            }
        }
    }
    c
}

/// Final activations from `a(steps) = (R^T)^steps a(0)` with
/// `R = r I + (1 - r) D^{-1} W`, computing the matrix power first.
pub fn dense_spread(net: &AssociationNetwork, source: usize, params: &SpreadParams) -> Vec<f64> {
    let n = net.node_count();
    let w = dense_weights(net);
    let r = params.retention;
    let mut step = vec![0.0; n * n];
    for i in 0..n {
        let s: f64 = w[i * n..(i + 1) * n].iter().sum();
        for j in 0..n {
            step[i * n + j] = (1.0 - r) * w[i * n + j] / s;
        }
        step[i * n + i] += r;
    }
    let mut power = vec![0.0; n * n];
    for i in 0..n {
        power[i * n + i] = 1.0;
    }
    for _ in 0..params.steps {
        power = matmul(&power, &step, n);
    }
    // a(t)^T = a(0)^T R^t; a(0) is a point mass at the source.
    (0..n).map(|j| params.initial_activation * power[source * n + j]).collect()
}

/// Diameter by BFS from every node.
pub fn all_pairs_diameter(net: &AssociationNetwork) -> u32 {
    let n = net.node_count();
    let mut best = 0;
    for s in 0..n {
        let mut dist = vec![u32::MAX; n];
        dist[s] = 0;
        let mut q = VecDeque::from([s]);
        while let Some(u) = q.pop_front() {
            for (v, _) in net.neighbors(u) {
                if dist[v] == u32::MAX {
                    dist[v] = dist[u] + 1;
                    q.push_back(v);
                }
            }
        }
        best = best.max(*dist.iter().max().unwrap());
    }
    best
}

/// Two-sided Wilcoxon p-value by enumerating all `2^n` sign patterns over
/// the ranks of tie-free, nonzero differences: the share of patterns whose
/// W+ lies at least as far from its mean as the observed one.
pub fn sign_enumeration_p(diffs: &[i64]) -> f64 {
    let n = diffs.len();
    let mut mags: Vec<u64> = diffs.iter().map(|d| d.unsigned_abs()).collect();
    mags.sort_unstable();
    let rank = |d: i64| mags.iter().position(|&m| m == d.unsigned_abs()).unwrap() as i64 + 1;
    let total = (n * (n + 1) / 2) as i64;
    let observed: i64 = diffs.iter().filter(|&&d| d > 0).map(|&d| rank(d)).sum();
    // |2 W - total| compares distances from the mean in integers.
    let far = (2 * observed - total).abs();
    let mut count = 0u64;
    for mask in 0u64..(1 << n) {
        let w: i64 = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| i as i64 + 1).sum();
        if (2 * w - total).abs() >= far {
            count += 1;
        }
    }
    count as f64 / (1u64 << n) as f64
}

/// Inverse by Gauss-Jordan elimination with partial pivoting.
pub fn invert(a: &[f64], n: usize) -> Vec<f64> {
    let mut m = a.to_vec();
    let mut inv = vec![0.0; n * n];
    for i in 0..n {
        inv[i * n + i] = 1.0;
    }
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&x, &y| m[x * n + col].abs().total_cmp(&m[y * n + col].abs()))
            .unwrap();
        for j in 0..n {
            m.swap(col * n + j, pivot * n + j);
            inv.swap(col * n + j, pivot * n + j);
        }
        let d = m[col * n + col];
        for j in 0..n {
            m[col * n + j] /= d;
            inv[col * n + j] /= d;
        }
        for r in 0..n {
            if r != col {
                let f = m[r * n + col];
                for j in 0..n {
                    m[r * n + j] -= f * m[col * n + j];
                    inv[r * n + j] -= f * inv[col * n + j];
                }
            }
        }
    }
    inv
}

/// OLS with intercept through the normal equations. Returns coefficients
/// and the row-major covariance `sigma^2 (X^T X)^{-1}`.
pub fn normal_equations(y: &[f64], columns: &[Vec<f64>]) -> (Vec<f64>, Vec<f64>) {
    let n = y.len();
    let k = columns.len() + 1;
    let x = |i: usize, j: usize| if j == 0 { 1.0 } else { columns[j - 1][i] };
    let mut xtx = vec![0.0; k * k];
    let mut xty = vec![0.0; k];
    for i in 0..n {
        for a in 0..k {
            xty[a] += x(i, a) * y[i];
            for b in 0..k {
                xtx[a * k + b] += x(i, a) * x(i, b);
            }
        }
    }
    let inv = invert(&xtx, k);
    let beta: Vec<f64> = (0..k).map(|a| (0..k).map(|b| inv[a * k + b] * xty[b]).sum()).collect();
    let rss: f64 = (0..n)
        .map(|i| {
            let r = y[i] - (0..k).map(|j| x(i, j) * beta[j]).sum::<f64>();
            r * r
        })
        .sum();
    let sigma2 = rss / (n - k) as f64;
    (beta, inv.into_iter().map(|v| v * sigma2).collect())
}

/// Explicit `(C b)^T (C V C^T)^{-1} (C b)` with one row per consecutive
/// pair of `indices`.
pub fn wald_quadratic_form(beta: &[f64], cov: &[f64], indices: &[usize]) -> f64 {
    let k = beta.len();
    let m = indices.len() - 1;
    let mut c = vec![0.0; m * k];
    for r in 0..m {
        c[r * k + indices[r]] = 1.0;
        c[r * k + indices[r + 1]] = -1.0;
    }
    let cb: Vec<f64> = (0..m).map(|r| (0..k).map(|j| c[r * k + j] * beta[j]).sum()).collect();
    let mut v = vec![0.0; m * m];
    for a in 0..m {
        for b in 0..m {
            let mut s = 0.0;
            for i in 0..k {
                for j in 0..k {
                    s += c[a * k + i] * cov[i * k + j] * c[b * k + j];
                }
            }
            v[a * m + b] = s;
        }
    }
    let vinv = invert(&v, m);
    (0..m).map(|a| (0..m).map(|b| cb[a] * vinv[a * m + b] * cb[b]).sum::<f64>()).sum()
}

pub fn edge_cost(w: u64, mode: CostMode) -> f64 {
    match mode {
        CostMode::InverseWeight => 1.0 / w as f64,
        CostMode::Unit => 1.0,
    }
}

/// All-pairs minimum path costs by Floyd-Warshall.
pub fn floyd_warshall(net: &AssociationNetwork, mode: CostMode) -> Vec<Vec<f64>> {
    let n = net.node_count();
    let mut d = vec![vec![f64::INFINITY; n]; n];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = 0.0;
    }
    for (a, b, w) in net.edges() {
        d[a][b] = edge_cost(w, mode);
        d[b][a] = edge_cost(w, mode);
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = d[i][k] + d[k][j];
                if via < d[i][j] {
                    d[i][j] = via;
                }
            }
        }
    }
    d
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs())
}
