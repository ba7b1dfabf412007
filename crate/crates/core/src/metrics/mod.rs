//! Topological characterization of a grid.
//!
//! All metrics operate on the simplified graph: in-service branches only,
//! parallel branches collapsed to a single edge. Branch-length statistics
//! are the exception; they are taken over the physical in-service
//! branches, which carry the lengths.

pub mod eigen;
mod report;

pub use report::{
    write_branch_length_pmf, write_degree_pmf, write_report_kv, write_spectral_density,
};

use std::collections::BTreeMap;
use std::collections::VecDeque;

use thiserror::Error;

use crate::grid::{laplacian, simple_adjacency_matrix, GridGraph};
use eigen::DENSE_EIGEN_LIMIT;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("graph is disconnected ({components} components)")]
    Disconnected { components: usize },
    #[error("graph has no edges")]
    NoEdges,
    #[error("graph has no in-service branches")]
    NoBranches,
    #[error("metric needs at least {min} buses, graph has {n}")]
    TooSmall { min: usize, n: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("eigensolver failure: {0}")]
    Eigensolver(String),
}

/// The six summary metrics plus the three empirical distributions.
#[derive(Debug, Clone)]
pub struct TopologyReport {
    /// N: bus count.
    pub n_nodes: usize,
    /// m: edge count of the simplified graph.
    pub n_branches: usize,
    /// ⟨k⟩ = 2m/N.
    pub avg_degree: f64,
    /// ⟨l⟩: mean shortest-path length in hops over distinct pairs.
    pub avg_path_length_hops: f64,
    /// ρ: Pearson correlation of endpoint degrees; `None` when a marginal
    /// has zero variance (regular graphs).
    pub pearson_degree_corr: Option<f64>,
    /// λ2(L): second-smallest Laplacian eigenvalue.
    pub algebraic_connectivity: f64,
    /// C(G): average local clustering coefficient.
    pub clustering_coeff: f64,
    /// Global transitivity (triangle ratio), reported alongside.
    pub clustering_transitivity: f64,
    pub degree_pmf: BTreeMap<usize, f64>,
    /// (bin center in meters, probability) over in-service branch lengths.
    pub branch_length_hist: Vec<(f64, f64)>,
    /// (normalized adjacency eigenvalue bin center, density).
    pub spectral_density: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, Copy)]
pub struct ReportOptions {
    pub spectral_bins: usize,
    pub length_bin_width_m: f64,
}

impl Default for ReportOptions {
    fn default() -> Self {
        ReportOptions {
            spectral_bins: 51,
            length_bin_width_m: 100.0,
        }
    }
}

fn connected_components(adj: &[Vec<usize>]) -> usize {
    let n = adj.len();
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
            for &v in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
    }
    count
}

fn bfs_distance_sum(adj: &[Vec<usize>], source: usize, dist: &mut [i64]) -> (u64, usize) {
    dist.fill(-1);
    dist[source] = 0;
    let mut queue = VecDeque::new();
    queue.push_back(source);
    let mut sum = 0u64;
    let mut visited = 1usize;
    while let Some(u) = queue.pop_front() {
        for &v in &adj[u] {
            if dist[v] < 0 {
                dist[v] = dist[u] + 1;
                sum += dist[v] as u64;
                visited += 1;
                queue.push_back(v);
            }
        }
    }
    (sum, visited)
}

/// Mean unweighted shortest-path length in hops over all unordered
/// distinct bus pairs of the simplified graph.
pub fn avg_shortest_path(g: &GridGraph) -> Result<f64, MetricsError> {
    let adj = g.adjacency_lists();
    avg_shortest_path_adj(&adj)
}

fn avg_shortest_path_adj(adj: &[Vec<usize>]) -> Result<f64, MetricsError> {
    let n = adj.len();
    if n < 2 {
        return Err(MetricsError::TooSmall { min: 2, n });
    }
    let comps = connected_components(adj);
    if comps > 1 {
        return Err(MetricsError::Disconnected { components: comps });
    }
    let mut dist = vec![-1i64; n];
    let mut total = 0u64;
    for s in 0..n {
        let (sum, _) = bfs_distance_sum(adj, s, &mut dist);
        total += sum;
    }
    // ordered-pair sum / N(N-1) equals the unordered mean
    Ok(total as f64 / (n as f64 * (n as f64 - 1.0)))
}

/// Pearson correlation of endpoint degrees over the 2m ordered endpoint
/// pairs. `Ok(None)` marks the undefined case (zero degree variance,
/// e.g. cycles); an edgeless graph is an error.
pub fn pearson_degree_correlation(g: &GridGraph) -> Result<Option<f64>, MetricsError> {
    let adj = g.adjacency_lists();
    pearson_adj(&adj)
}

fn pearson_adj(adj: &[Vec<usize>]) -> Result<Option<f64>, MetricsError> {
    let deg: Vec<f64> = adj.iter().map(|a| a.len() as f64).collect();
    let mut n_pairs = 0u64;
    let (mut sx, mut sxx, mut sxy) = (0.0f64, 0.0f64, 0.0f64);
    for (u, nbrs) in adj.iter().enumerate() {
        for &v in nbrs {
            // each undirected edge visited in both orientations
            sx += deg[u];
            sxx += deg[u] * deg[u];
            sxy += deg[u] * deg[v];
            n_pairs += 1;
        }
    }
    if n_pairs == 0 {
        return Err(MetricsError::NoEdges);
    }
    let n = n_pairs as f64;
    let mean = sx / n;
    let var = sxx / n - mean * mean;
    let cov = sxy / n - mean * mean;
    // x and y marginals coincide by symmetry
    if var <= 1e-12 * mean.max(1.0).powi(2) {
        return Ok(None);
    }
    Ok(Some(cov / var))
}

/// λ2(L) to absolute tolerance 1e-8. Returns 0 for disconnected graphs.
/// Dense solve up to [`DENSE_EIGEN_LIMIT`] buses, Lanczos above.
pub fn algebraic_connectivity(g: &GridGraph) -> Result<f64, MetricsError> {
    let n = g.n_buses();
    if n < 2 {
        return Err(MetricsError::TooSmall { min: 2, n });
    }
    let adj = g.adjacency_lists();
    if connected_components(&adj) > 1 {
        return Ok(0.0);
    }
    if n <= DENSE_EIGEN_LIMIT {
        let ev = eigen::symmetric_eigenvalues(&laplacian(g)).map_err(MetricsError::Eigensolver)?;
        Ok(ev[1].max(0.0))
    } else {
        match eigen::lanczos_lambda2(&adj, 1e-8) {
            Some(v) => Ok(v),
            None => {
                let ev =
                    eigen::symmetric_eigenvalues(&laplacian(g)).map_err(MetricsError::Eigensolver)?;
                Ok(ev[1].max(0.0))
            }
        }
    }
}

fn local_clustering(adj: &[Vec<usize>]) -> (f64, f64) {
    let n = adj.len();
    if n == 0 {
        return (0.0, 0.0);
    }
    let sorted: Vec<Vec<usize>> = adj
        .iter()
        .map(|a| {
            let mut s = a.clone();
            s.sort_unstable();
            s
        })
        .collect();
    let mut sum_local = 0.0f64;
    let mut wedge_total = 0.0f64;
    let mut closed_total = 0.0f64;
    for u in 0..n {
        let d = sorted[u].len();
        if d < 2 {
            continue;
        }
        let mut links = 0u64;
        for (i, &v) in sorted[u].iter().enumerate() {
            for &w in &sorted[u][i + 1..] {
                if sorted[v].binary_search(&w).is_ok() {
                    links += 1;
                }
            }
        }
        let wedges = (d * (d - 1) / 2) as f64;
        sum_local += links as f64 / wedges;
        wedge_total += wedges;
        closed_total += links as f64;
    }
    let avg_local = sum_local / n as f64;
    let transitivity = if wedge_total > 0.0 {
        closed_total / wedge_total
    } else {
        0.0
    };
    (avg_local, transitivity)
}

/// Average local (Watts–Strogatz) clustering coefficient; nodes of degree
/// < 2 contribute 0.
pub fn clustering_coefficient(g: &GridGraph) -> f64 {
    local_clustering(&g.adjacency_lists()).0
}

/// Global transitivity: closed wedges / all wedges.
pub fn global_transitivity(g: &GridGraph) -> f64 {
    local_clustering(&g.adjacency_lists()).1
}

/// Empirical degree distribution of the simplified graph.
pub fn degree_pmf(g: &GridGraph) -> BTreeMap<usize, f64> {
    degree_pmf_adj(&g.adjacency_lists())
}

fn degree_pmf_adj(adj: &[Vec<usize>]) -> BTreeMap<usize, f64> {
    let n = adj.len();
    let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
    for a in adj {
        *counts.entry(a.len()).or_insert(0) += 1;
    }
    counts
        .into_iter()
        .map(|(d, c)| (d, c as f64 / n as f64))
        .collect()
}

/// Raw adjacency eigenvalues of the simplified graph, ascending.
pub fn adjacency_eigenvalues(g: &GridGraph) -> Result<Vec<f64>, MetricsError> {
    let n = g.n_buses();
    if n < 2 {
        return Err(MetricsError::TooSmall { min: 2, n });
    }
    eigen::symmetric_eigenvalues(&simple_adjacency_matrix(g)).map_err(MetricsError::Eigensolver)
}

/// Scale factor `√(N·p·(1−p))` with `p = 2m/(N(N−1))`; 1 when the graph
/// is complete or too small for the normalization to be meaningful.
fn spectral_scale(n: usize, m: usize) -> f64 {
    let nf = n as f64;
    let p = 2.0 * m as f64 / (nf * (nf - 1.0));
    let s2 = nf * p * (1.0 - p);
    if s2 > 0.0 {
        s2.sqrt()
    } else {
        1.0
    }
}

/// Normalized graph spectral density: adjacency eigenvalues scaled by
/// `1/√(N·p(1−p))`, binned so the histogram integrates to 1.
pub fn spectral_density(g: &GridGraph, n_bins: usize) -> Result<Vec<(f64, f64)>, MetricsError> {
    if n_bins == 0 {
        return Err(MetricsError::InvalidParameter("n_bins must be >= 1".into()));
    }
    let eigs = adjacency_eigenvalues(g)?;
    let scale = spectral_scale(g.n_buses(), g.n_simplified_edges());
    let scaled: Vec<f64> = eigs.iter().map(|l| l / scale).collect();
    Ok(bin_density(&scaled, n_bins))
}

fn bin_density(values: &[f64], n_bins: usize) -> Vec<(f64, f64)> {
    let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let span = (hi - lo).max(1e-12);
    let width = span / n_bins as f64;
    let mut counts = vec![0usize; n_bins];
    for &v in values {
        let mut b = ((v - lo) / width) as usize;
        if b >= n_bins {
            b = n_bins - 1;
        }
        counts[b] += 1;
    }
    let total = values.len() as f64;
    counts
        .into_iter()
        .enumerate()
        .map(|(i, c)| (lo + (i as f64 + 0.5) * width, c as f64 / (total * width)))
        .collect()
}

/// Binned pmf of in-service branch lengths; bins of `bin_width` meters
/// from 0, probabilities summing to 1.
pub fn branch_length_pmf(g: &GridGraph, bin_width: f64) -> Result<Vec<(f64, f64)>, MetricsError> {
    if !(bin_width > 0.0) {
        return Err(MetricsError::InvalidParameter(
            "bin width must be positive".into(),
        ));
    }
    let lengths: Vec<f64> = g
        .in_service_branches()
        .map(|(_, b)| b.length_m)
        .collect();
    if lengths.is_empty() {
        return Err(MetricsError::NoBranches);
    }
    let max = lengths.iter().cloned().fold(0.0f64, f64::max);
    let n_bins = (max / bin_width).floor() as usize + 1;
    let mut counts = vec![0usize; n_bins];
    for &len in &lengths {
        let mut b = (len / bin_width) as usize;
        if b >= n_bins {
            b = n_bins - 1;
        }
        counts[b] += 1;
    }
    let total = lengths.len() as f64;
    Ok(counts
        .into_iter()
        .enumerate()
        .map(|(i, c)| ((i as f64 + 0.5) * bin_width, c as f64 / total))
        .collect())
}

pub fn full_report(g: &GridGraph) -> Result<TopologyReport, MetricsError> {
    full_report_with(g, &ReportOptions::default())
}

pub fn full_report_with(
    g: &GridGraph,
    opts: &ReportOptions,
) -> Result<TopologyReport, MetricsError> {
    let adj = g.adjacency_lists();
    let n = adj.len();
    if n < 2 {
        return Err(MetricsError::TooSmall { min: 2, n });
    }
    let comps = connected_components(&adj);
    if comps > 1 {
        return Err(MetricsError::Disconnected { components: comps });
    }
    let m = g.n_simplified_edges();
    let avg_path = avg_shortest_path_adj(&adj)?;
    let pearson = pearson_adj(&adj)?;
    let lambda2 = algebraic_connectivity(g)?;
    let (avg_local, transitivity) = local_clustering(&adj);
    let degree_pmf = degree_pmf_adj(&adj);
    let branch_length_hist = branch_length_pmf(g, opts.length_bin_width_m)?;
    let spectral = spectral_density(g, opts.spectral_bins)?;
    Ok(TopologyReport {
        n_nodes: n,
        n_branches: m,
        avg_degree: 2.0 * m as f64 / n as f64,
        avg_path_length_hops: avg_path,
        pearson_degree_corr: pearson,
        algebraic_connectivity: lambda2,
        clustering_coeff: avg_local,
        clustering_transitivity: transitivity,
        degree_pmf,
        branch_length_hist,
        spectral_density: spectral,
    })
}
