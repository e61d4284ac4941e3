//! Topology statistics for IO networks: density, bilateral density, shortest
//! paths, degree/strength profiles, neighbor averages (ANND/ANNS), link-wise
//! assortativity, and HITS hub/authority centrality.
//!
//! Conventions: self loops are excluded from degrees, paths, and density but
//! included in strengths (strength is an economic total). Degrees are
//! normalized by the maximum possible degree `S - 1`. Neighbor averages use
//! the undirected skeleton of the binary adjacency and total (in + out)
//! degree/strength. Pairs with no connecting path are excluded from both the
//! diameter and the average path length.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::iotable::IONetwork;
use crate::linalg;
use crate::util::pearson;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum NetstatsError {
    #[error("no reachable ordered pairs; path statistics are undefined")]
    NoReachablePairs,
    #[error("HITS did not converge within {max_iters} iterations")]
    HitsNonConvergence { max_iters: usize },
    #[error("all link weights are zero; HITS scores are undefined")]
    ZeroWeights,
}

/// Whether path statistics follow edge direction or the undirected skeleton.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum PathMode {
    #[default]
    Directed,
    Undirected,
}

/// Country-level topology summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopologySummary {
    pub density: f64,
    pub bilateral_density: f64,
    pub diameter: usize,
    pub average_path_length: f64,
    pub isolated_count: usize,
}

/// Fraction of possible directed links present, self loops excluded.
pub fn density(net: &IONetwork) -> f64 {
    let s = net.node_count();
    assert!(s >= 2, "density needs at least two nodes");
    net.edge_count() as f64 / (s * (s - 1)) as f64
}

/// Fraction of directed links whose reverse link also exists. Zero edges
/// yields 0.
pub fn bilateral_density(net: &IONetwork) -> f64 {
    let edges = net.edge_count();
    if edges == 0 {
        return 0.0;
    }
    let reciprocated = net
        .edges()
        .filter(|&(i, j, _)| net.has_edge(j, i))
        .count();
    reciprocated as f64 / edges as f64
}

/// Diameter and average path length over reachable ordered pairs.
pub fn shortest_path_stats(
    net: &IONetwork,
    mode: PathMode,
) -> Result<(usize, f64), NetstatsError> {
    let s = net.node_count();
    let connects = |i: usize, j: usize| match mode {
        PathMode::Directed => net.has_edge(i, j),
        PathMode::Undirected => net.has_edge(i, j) || net.has_edge(j, i),
    };
    let mut diameter = 0usize;
    let mut total = 0u64;
    let mut pairs = 0u64;
    let mut dist = vec![usize::MAX; s];
    let mut queue = VecDeque::new();
    for source in 0..s {
        dist.fill(usize::MAX);
        dist[source] = 0;
        queue.clear();
        queue.push_back(source);
        while let Some(u) = queue.pop_front() {
            for v in 0..s {
                if dist[v] == usize::MAX && connects(u, v) {
                    dist[v] = dist[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        for (v, &d) in dist.iter().enumerate() {
            if v != source && d != usize::MAX {
                diameter = diameter.max(d);
                total += d as u64;
                pairs += 1;
            }
        }
    }
    if pairs == 0 {
        return Err(NetstatsError::NoReachablePairs);
    }
    Ok((diameter, total as f64 / pairs as f64))
}

pub fn topology_summary(
    net: &IONetwork,
    mode: PathMode,
) -> Result<TopologySummary, NetstatsError> {
    let (diameter, average_path_length) = shortest_path_stats(net, mode)?;
    Ok(TopologySummary {
        density: density(net),
        bilateral_density: bilateral_density(net),
        diameter,
        average_path_length,
        isolated_count: net.isolated_count(),
    })
}

/// Degrees (normalized by `S - 1`, self loops excluded) and strengths
/// (self loops included).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegreeStrength {
    pub in_degree: Vec<f64>,
    pub out_degree: Vec<f64>,
    pub in_strength: Vec<f64>,
    pub out_strength: Vec<f64>,
}

pub fn degree_strength_profiles(net: &IONetwork) -> DegreeStrength {
    let s = net.node_count();
    let norm = (s - 1) as f64;
    let mut in_deg = vec![0usize; s];
    let mut out_deg = vec![0usize; s];
    for (i, j, _) in net.edges() {
        out_deg[i] += 1;
        in_deg[j] += 1;
    }
    DegreeStrength {
        in_degree: in_deg.iter().map(|&d| d as f64 / norm).collect(),
        out_degree: out_deg.iter().map(|&d| d as f64 / norm).collect(),
        in_strength: (0..s).map(|j| net.weights().col_sum(j)).collect(),
        out_strength: (0..s).map(|i| net.weights().row_sum(i)).collect(),
    }
}

/// Average nearest-neighbor degree and strength plus their correlations with
/// node degree and strength. Nodes without neighbors carry `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeighborAverages {
    pub annd: Vec<Option<f64>>,
    pub anns: Vec<Option<f64>>,
    /// Pearson correlation of total degree vs ANND; `None` when degenerate.
    pub degree_correlation: Option<f64>,
    /// Pearson correlation of total strength vs ANNS; `None` when degenerate.
    pub strength_correlation: Option<f64>,
}

pub fn annd_anns(net: &IONetwork) -> NeighborAverages {
    let s = net.node_count();
    let mut total_deg = vec![0usize; s];
    for (i, j, _) in net.edges() {
        total_deg[i] += 1;
        total_deg[j] += 1;
    }
    let total_strength: Vec<f64> = (0..s)
        .map(|i| net.weights().row_sum(i) + net.weights().col_sum(i))
        .collect();
    let neighbors: Vec<Vec<usize>> = (0..s)
        .map(|i| {
            (0..s)
                .filter(|&j| j != i && (net.has_edge(i, j) || net.has_edge(j, i)))
                .collect()
        })
        .collect();
    let annd: Vec<Option<f64>> = neighbors
        .iter()
        .map(|ns| {
            (!ns.is_empty()).then(|| {
                ns.iter().map(|&j| total_deg[j] as f64).sum::<f64>() / ns.len() as f64
            })
        })
        .collect();
    let anns: Vec<Option<f64>> = neighbors
        .iter()
        .map(|ns| {
            (!ns.is_empty())
                .then(|| ns.iter().map(|&j| total_strength[j]).sum::<f64>() / ns.len() as f64)
        })
        .collect();

    let paired = |values: &[Option<f64>], base: &dyn Fn(usize) -> f64| -> Option<f64> {
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for (i, v) in values.iter().enumerate() {
            if let Some(v) = v {
                xs.push(base(i));
                ys.push(*v);
            }
        }
        pearson(&xs, &ys)
    };
    let degree_correlation = paired(&annd, &|i| total_deg[i] as f64);
    let strength_correlation = paired(&anns, &|i| total_strength[i]);
    NeighborAverages {
        annd,
        anns,
        degree_correlation,
        strength_correlation,
    }
}

/// Link-wise assortativity: Pearson correlation over directed edges `(i, j)`
/// of the endpoints' total degrees and of their total strengths.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Assortativity {
    pub degree: Option<f64>,
    pub strength: Option<f64>,
}

pub fn linkwise_assortativity(net: &IONetwork) -> Assortativity {
    let s = net.node_count();
    let mut total_deg = vec![0usize; s];
    for (i, j, _) in net.edges() {
        total_deg[i] += 1;
        total_deg[j] += 1;
    }
    let total_strength: Vec<f64> = (0..s)
        .map(|i| net.weights().row_sum(i) + net.weights().col_sum(i))
        .collect();
    let mut deg_src = Vec::new();
    let mut deg_dst = Vec::new();
    let mut str_src = Vec::new();
    let mut str_dst = Vec::new();
    for (i, j, _) in net.edges() {
        deg_src.push(total_deg[i] as f64);
        deg_dst.push(total_deg[j] as f64);
        str_src.push(total_strength[i]);
        str_dst.push(total_strength[j]);
    }
    Assortativity {
        degree: pearson(&deg_src, &deg_dst),
        strength: pearson(&str_src, &str_dst),
    }
}

/// Hub and authority scores, both unit Euclidean norm and nonnegative.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HitsScores {
    pub hub: Vec<f64>,
    pub authority: Vec<f64>,
    pub iterations: usize,
}

/// HITS on the weighted matrix by alternating updates `a <- Z^T h`,
/// `h <- Z a` with Euclidean renormalization, starting from uniform vectors.
/// Converges when the largest entrywise change of both vectors drops below
/// `tol`.
pub fn hits_scores(
    net: &IONetwork,
    tol: f64,
    max_iters: usize,
) -> Result<HitsScores, NetstatsError> {
    weighted_hits(net.weights(), tol, max_iters)
}

pub fn weighted_hits(
    weights: &linalg::DenseMatrix,
    tol: f64,
    max_iters: usize,
) -> Result<HitsScores, NetstatsError> {
    let s = weights.rows();
    if weights.max_abs() == 0.0 {
        return Err(NetstatsError::ZeroWeights);
    }
    let uniform = 1.0 / (s as f64).sqrt();
    let mut hub = vec![uniform; s];
    let mut authority = vec![uniform; s];
    let transposed = weights.transpose();
    for iteration in 1..=max_iters {
        let mut new_auth = transposed.matvec(&hub);
        normalize(&mut new_auth);
        let mut new_hub = weights.matvec(&new_auth);
        normalize(&mut new_hub);
        let delta = max_abs_delta(&new_auth, &authority).max(max_abs_delta(&new_hub, &hub));
        authority = new_auth;
        hub = new_hub;
        if delta < tol {
            return Ok(HitsScores {
                hub,
                authority,
                iterations: iteration,
            });
        }
    }
    Err(NetstatsError::HitsNonConvergence { max_iters })
}

fn normalize(v: &mut [f64]) {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        for x in v.iter_mut() {
            *x /= norm;
        }
    }
}

fn max_abs_delta(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
}

/// Default HITS convergence tolerance.
pub const HITS_TOL: f64 = 1e-12;
/// Default HITS iteration cap.
pub const HITS_MAX_ITERS: usize = 10_000;

/// Everything the per-node export needs, assembled in one pass.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeScores {
    pub degrees: DegreeStrength,
    pub neighbor_averages: NeighborAverages,
    pub assortativity: Assortativity,
    pub hits: HitsScores,
}

pub fn node_scores(net: &IONetwork) -> Result<NodeScores, NetstatsError> {
    Ok(NodeScores {
        degrees: degree_strength_profiles(net),
        neighbor_averages: annd_anns(net),
        assortativity: linkwise_assortativity(net),
        hits: hits_scores(net, HITS_TOL, HITS_MAX_ITERS)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::DenseMatrix;

    fn net(rows: &[Vec<f64>]) -> IONetwork {
        IONetwork::from_weights(DenseMatrix::from_rows(rows).unwrap())
    }

    fn complete3() -> IONetwork {
        net(&[
            vec![0.0, 10.0, 10.0],
            vec![10.0, 0.0, 10.0],
            vec![10.0, 10.0, 0.0],
        ])
    }

    fn cycle3() -> IONetwork {
        net(&[
            vec![0.0, 10.0, 0.0],
            vec![0.0, 0.0, 10.0],
            vec![10.0, 0.0, 0.0],
        ])
    }

    fn one_way_star4() -> IONetwork {
        net(&[
            vec![0.0, 10.0, 10.0, 10.0],
            vec![0.0, 0.0, 0.0, 0.0],
            vec![0.0, 0.0, 0.0, 0.0],
            vec![0.0, 0.0, 0.0, 0.0],
        ])
    }

    fn mutual_star4() -> IONetwork {
        net(&[
            vec![0.0, 10.0, 10.0, 10.0],
            vec![10.0, 0.0, 0.0, 0.0],
            vec![10.0, 0.0, 0.0, 0.0],
            vec![10.0, 0.0, 0.0, 0.0],
        ])
    }

    #[test]
    fn density_examples() {
        assert_eq!(density(&complete3()), 1.0);
        assert_eq!(density(&cycle3()), 0.5);
        assert_eq!(density(&one_way_star4()), 0.25);
    }

    #[test]
    fn bilateral_density_examples() {
        let pair = net(&[vec![0.0, 3.0], vec![4.0, 0.0]]);
        assert_eq!(bilateral_density(&pair), 1.0);
        assert_eq!(bilateral_density(&cycle3()), 0.0);
        assert_eq!(bilateral_density(&mutual_star4()), 1.0);
        let none = net(&[vec![0.0, 0.0], vec![0.0, 0.0]]);
        assert_eq!(bilateral_density(&none), 0.0);
    }

    #[test]
    fn path_stats_examples() {
        assert_eq!(
            shortest_path_stats(&complete3(), PathMode::Directed).unwrap(),
            (1, 1.0)
        );
        // one-way cycle: all 6 ordered pairs reachable, lengths 1,2
        assert_eq!(
            shortest_path_stats(&cycle3(), PathMode::Directed).unwrap(),
            (2, 1.5)
        );
        // one-way star: only hub -> leaf pairs are reachable
        assert_eq!(
            shortest_path_stats(&one_way_star4(), PathMode::Directed).unwrap(),
            (1, 1.0)
        );
        // undirected skeleton adds leaf-leaf paths through the hub
        assert_eq!(
            shortest_path_stats(&one_way_star4(), PathMode::Undirected).unwrap(),
            (2, 1.5)
        );
    }

    #[test]
    fn path_stats_error_without_edges() {
        let empty = net(&[vec![0.0, 0.0], vec![0.0, 0.0]]);
        assert_eq!(
            shortest_path_stats(&empty, PathMode::Directed),
            Err(NetstatsError::NoReachablePairs)
        );
    }

    #[test]
    fn degree_strength_examples() {
        let p = degree_strength_profiles(&one_way_star4());
        assert_eq!(p.out_degree[0], 1.0);
        assert_eq!(p.in_degree[0], 0.0);
        assert_eq!(p.in_degree[1], 1.0 / 3.0);

        let p = degree_strength_profiles(&cycle3());
        for i in 0..3 {
            assert_eq!(p.in_degree[i], 0.5);
            assert_eq!(p.out_degree[i], 0.5);
        }

        let m = net(&[vec![2.0, 10.0], vec![5.0, 3.0]]);
        let p = degree_strength_profiles(&m);
        assert_eq!(p.out_strength, vec![12.0, 8.0]);
        assert_eq!(p.in_strength, vec![7.0, 13.0]);
    }

    #[test]
    fn strength_swaps_under_transposition() {
        let z = DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        let a = degree_strength_profiles(&IONetwork::from_weights(z.clone()));
        let b = degree_strength_profiles(&IONetwork::from_weights(z.transpose()));
        assert_eq!(a.in_strength, b.out_strength);
        assert_eq!(a.out_strength, b.in_strength);
    }

    #[test]
    fn annd_examples() {
        // regular graph: ANND constant, correlation undefined
        let r = annd_anns(&complete3());
        assert!(r.annd.iter().all(|v| *v == Some(4.0)));
        assert_eq!(r.degree_correlation, None);

        let r = annd_anns(&cycle3());
        assert!(r.annd.iter().all(|v| *v == Some(2.0)));

        let r = annd_anns(&one_way_star4());
        assert_eq!(r.annd[0], Some(1.0));
        assert_eq!(r.annd[1], Some(3.0));
        let corr = r.degree_correlation.unwrap();
        assert!((corr + 1.0).abs() < 1e-12);
    }

    #[test]
    fn linkwise_assortativity_examples() {
        // complete digraph: all degrees equal -> undefined
        let a = linkwise_assortativity(&complete3());
        assert_eq!(a.degree, None);
        assert_eq!(a.strength, None);

        // reciprocated star: hubs link only to leaves -> perfectly negative
        let a = linkwise_assortativity(&mutual_star4());
        assert!((a.degree.unwrap() + 1.0).abs() < 1e-12);
        assert!((a.strength.unwrap() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn linkwise_assortativity_matches_brute_force() {
        let fixture = net(&[
            vec![0.0, 4.0, 0.0, 2.0, 0.0, 0.0],
            vec![0.0, 0.0, 7.0, 0.0, 1.0, 0.0],
            vec![3.0, 0.0, 0.0, 0.0, 0.0, 5.0],
            vec![0.0, 2.0, 0.0, 0.0, 6.0, 0.0],
            vec![0.0, 0.0, 1.0, 0.0, 0.0, 0.0],
            vec![8.0, 0.0, 0.0, 1.0, 0.0, 0.0],
        ]);
        let got = linkwise_assortativity(&fixture);

        // independent route: explicit edge list and a from-scratch correlation
        let s = fixture.node_count();
        let mut deg = vec![0.0f64; s];
        let mut strength = vec![0.0f64; s];
        let mut edges = Vec::new();
        for i in 0..s {
            for j in 0..s {
                let w = fixture.weights().get(i, j);
                strength[i] += w;
                strength[j] += w;
                if i != j && w > 0.0 {
                    deg[i] += 1.0;
                    deg[j] += 1.0;
                    edges.push((i, j));
                }
            }
        }
        let corr = |pairs: &[(f64, f64)]| -> f64 {
            let n = pairs.len() as f64;
            let mx = pairs.iter().map(|p| p.0).sum::<f64>() / n;
            let my = pairs.iter().map(|p| p.1).sum::<f64>() / n;
            let cov: f64 = pairs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
            let vx: f64 = pairs.iter().map(|p| (p.0 - mx).powi(2)).sum();
            let vy: f64 = pairs.iter().map(|p| (p.1 - my).powi(2)).sum();
            cov / (vx * vy).sqrt()
        };
        let deg_pairs: Vec<(f64, f64)> = edges.iter().map(|&(i, j)| (deg[i], deg[j])).collect();
        let str_pairs: Vec<(f64, f64)> =
            edges.iter().map(|&(i, j)| (strength[i], strength[j])).collect();
        assert!((got.degree.unwrap() - corr(&deg_pairs)).abs() < 1e-12);
        assert!((got.strength.unwrap() - corr(&str_pairs)).abs() < 1e-12);
    }

    #[test]
    fn hits_mutual_pair() {
        let pair = net(&[vec![0.0, 5.0], vec![5.0, 0.0]]);
        let scores = hits_scores(&pair, 1e-12, 10_000).unwrap();
        let inv_sqrt2 = 1.0 / 2.0f64.sqrt();
        for v in scores.hub.iter().chain(&scores.authority) {
            assert!((v - inv_sqrt2).abs() < 1e-10);
        }
    }

    #[test]
    fn hits_one_way_edge() {
        let m = net(&[vec![0.0, 3.0], vec![0.0, 0.0]]);
        let scores = hits_scores(&m, 1e-12, 10_000).unwrap();
        assert!((scores.hub[0] - 1.0).abs() < 1e-12);
        assert!(scores.hub[1].abs() < 1e-12);
        assert!((scores.authority[1] - 1.0).abs() < 1e-12);
        assert!(scores.authority[0].abs() < 1e-12);
    }

    #[test]
    fn hits_matches_closed_form_eigensolve() {
        // flows into sectors 1 and 2 from 0 and 3; Z^T Z restricted to
        // columns {1,2} is [[5,4],[4,5]] with dominant eigenpair (9, (1,1))
        let fixture = net(&[
            vec![0.0, 2.0, 1.0, 0.0],
            vec![0.0, 0.0, 0.0, 0.0],
            vec![0.0, 0.0, 0.0, 0.0],
            vec![0.0, 1.0, 2.0, 0.0],
        ]);
        let scores = hits_scores(&fixture, 1e-14, 10_000).unwrap();
        let inv_sqrt2 = 1.0 / 2.0f64.sqrt();
        assert!(scores.authority[0].abs() < 1e-9);
        assert!((scores.authority[1] - inv_sqrt2).abs() < 1e-9);
        assert!((scores.authority[2] - inv_sqrt2).abs() < 1e-9);
        assert!(scores.authority[3].abs() < 1e-9);
        // hubs mirror on rows {0,3}
        assert!((scores.hub[0] - inv_sqrt2).abs() < 1e-9);
        assert!((scores.hub[3] - inv_sqrt2).abs() < 1e-9);
    }

    #[test]
    fn hits_zero_matrix_is_an_error() {
        let z = net(&[vec![0.0, 0.0], vec![0.0, 0.0]]);
        assert_eq!(
            hits_scores(&z, 1e-12, 100),
            Err(NetstatsError::ZeroWeights)
        );
    }

    #[test]
    fn apl_never_exceeds_diameter() {
        for rows in [
            vec![
                vec![0.0, 1.0, 0.0, 0.0],
                vec![0.0, 0.0, 2.0, 0.0],
                vec![0.0, 0.0, 0.0, 3.0],
                vec![4.0, 0.0, 0.0, 0.0],
            ],
            vec![
                vec![0.0, 1.0, 1.0, 0.0],
                vec![0.0, 0.0, 0.0, 1.0],
                vec![1.0, 0.0, 0.0, 0.0],
                vec![0.0, 0.0, 0.0, 0.0],
            ],
        ] {
            let n = net(&rows);
            for mode in [PathMode::Directed, PathMode::Undirected] {
                let (diameter, apl) = shortest_path_stats(&n, mode).unwrap();
                assert!(apl <= diameter as f64);
            }
        }
    }
}
