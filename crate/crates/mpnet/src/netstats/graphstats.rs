//! Structural graph statistics: components, transitivity, path lengths.
//!
//! BFS fan-out and triangle counting run per-node in parallel and reduce with
//! integer sums and maxima only, so results do not depend on thread count.

use std::collections::VecDeque;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec;
use crate::graph::SimpleGraph;

/// Component id per node (ids are dense, assigned in node order).
pub fn connected_components(g: &SimpleGraph) -> Vec<u32> {
    let n = g.node_count();
    let mut comp = vec![u32::MAX; n];
    let mut next = 0u32;
    let mut queue = VecDeque::new();
    for start in 0..n {
        if comp[start] != u32::MAX {
            continue;
        }
        comp[start] = next;
        queue.push_back(start as u32);
        while let Some(u) = queue.pop_front() {
            for &v in g.neighbors(u as usize) {
                if comp[v as usize] == u32::MAX {
                    comp[v as usize] = next;
                    queue.push_back(v);
                }
            }
        }
        next += 1;
    }
    comp
}

/// Fraction of nodes in the largest connected component, and its members.
/// Ties break toward the component discovered first.
pub fn largest_component(g: &SimpleGraph) -> Result<(f64, Vec<u32>)> {
    let n = g.node_count();
    if n == 0 {
        return Err(Error::EmptyNetwork);
    }
    let comp = connected_components(g);
    let n_comp = comp.iter().copied().max().map_or(0, |c| c as usize + 1);
    let mut sizes = vec![0usize; n_comp];
    for &c in &comp {
        sizes[c as usize] += 1;
    }
    let best = (0..n_comp).max_by_key(|&c| (sizes[c], std::cmp::Reverse(c))).unwrap();
    let members: Vec<u32> = (0..n as u32).filter(|&v| comp[v as usize] == best as u32).collect();
    Ok((members.len() as f64 / n as f64, members))
}

/// Number of triangles, each counted once.
pub fn triangle_count(g: &SimpleGraph) -> u64 {
    exec::map_reduce(
        g.node_count(),
        0u64,
        |u| {
            let mut local = 0u64;
            for &v in g.neighbors(u) {
                let v = v as usize;
                if v <= u {
                    continue;
                }
                // Common neighbors w with u < v < w close a triangle exactly once.
                let (mut a, mut b) = (g.neighbors(u), g.neighbors(v));
                while let (Some(&x), Some(&y)) = (a.first(), b.first()) {
                    if x == y {
                        if x as usize > v {
                            local += 1;
                        }
                        a = &a[1..];
                        b = &b[1..];
                    } else if x < y {
                        a = &a[1..];
                    } else {
                        b = &b[1..];
                    }
                }
            }
            local
        },
        |a, b| a + b,
    )
}

/// Paths of length two, `Σ_v d(v)·(d(v)−1)/2`.
pub fn wedge_count(g: &SimpleGraph) -> u64 {
    (0..g.node_count())
        .map(|v| {
            let d = g.degree(v) as u64;
            d * d.saturating_sub(1) / 2
        })
        .sum()
}

/// Global transitivity: `3·triangles / wedges`.
pub fn clustering_coefficient(g: &SimpleGraph) -> Result<f64> {
    let wedges = wedge_count(g);
    if wedges == 0 {
        return Err(Error::NoWedges);
    }
    Ok(3.0 * triangle_count(g) as f64 / wedges as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PathMode {
    Exact,
    Sampled { sources: usize, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PathStats {
    pub diameter: u32,
    /// Set when the diameter comes from sampled eccentricities only.
    pub diameter_is_lower_bound: bool,
    pub mean_path_length: f64,
    pub sources_used: usize,
    pub lcc_size: usize,
}

fn bfs_row(g: &SimpleGraph, source: u32, dist: &mut [u32], queue: &mut VecDeque<u32>) -> (u64, u32) {
    dist.fill(u32::MAX);
    dist[source as usize] = 0;
    queue.clear();
    queue.push_back(source);
    let mut sum = 0u64;
    let mut ecc = 0u32;
    while let Some(u) = queue.pop_front() {
        let du = dist[u as usize];
        sum += du as u64;
        ecc = ecc.max(du);
        for &v in g.neighbors(u as usize) {
            if dist[v as usize] == u32::MAX {
                dist[v as usize] = du + 1;
                queue.push_back(v);
            }
        }
    }
    (sum, ecc)
}

/// Diameter and mean shortest-path length over the largest connected
/// component. Exact mode runs BFS from every component node; sampled mode
/// from a seeded uniform subset, flagging the diameter as a lower bound.
pub fn path_statistics(g: &SimpleGraph, mode: PathMode) -> Result<PathStats> {
    let (_, members) = largest_component(g)?;
    let l = members.len();
    if l == 1 {
        return Ok(PathStats {
            diameter: 0,
            diameter_is_lower_bound: false,
            mean_path_length: 0.0,
            sources_used: 1,
            lcc_size: 1,
        });
    }

    let (sources, lower_bound) = match mode {
        PathMode::Exact => (members.clone(), false),
        PathMode::Sampled { sources, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut pool = members.clone();
            pool.shuffle(&mut rng);
            pool.truncate(sources.max(1).min(l));
            let exhaustive = pool.len() == l;
            (pool, !exhaustive)
        }
    };

    let n = g.node_count();
    let (dist_sum, diameter) = exec::map_reduce(
        sources.len(),
        (0u64, 0u32),
        |i| {
            let mut dist = vec![u32::MAX; n];
            let mut queue = VecDeque::new();
            bfs_row(g, sources[i], &mut dist, &mut queue)
        },
        |a, b| (a.0 + b.0, a.1.max(b.1)),
    );
    let pairs = sources.len() as f64 * (l - 1) as f64;
    Ok(PathStats {
        diameter,
        diameter_is_lower_bound: lower_bound,
        mean_path_length: dist_sum as f64 / pairs,
        sources_used: sources.len(),
        lcc_size: l,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph(n: usize, edges: &[(u32, u32)]) -> SimpleGraph {
        SimpleGraph::from_edges(n, edges)
    }

    #[test]
    fn triangle_is_fully_clustered() {
        let g = graph(3, &[(0, 1), (1, 2), (0, 2)]);
        assert_eq!(triangle_count(&g), 1);
        assert_eq!(clustering_coefficient(&g).unwrap(), 1.0);
    }

    #[test]
    fn star_has_no_triangles() {
        let g = graph(5, &[(0, 1), (0, 2), (0, 3), (0, 4)]);
        assert_eq!(clustering_coefficient(&g).unwrap(), 0.0);
    }

    #[test]
    fn single_edge_has_no_wedges() {
        let g = graph(2, &[(0, 1)]);
        assert!(matches!(clustering_coefficient(&g), Err(Error::NoWedges)));
    }

    #[test]
    fn lcc_fraction_of_split_graph() {
        // Two K2 components and one isolate: 5 nodes, LCC fraction 0.4.
        let g = graph(5, &[(0, 1), (2, 3)]);
        let (frac, members) = largest_component(&g).unwrap();
        assert_eq!(frac, 0.4);
        assert_eq!(members, vec![0, 1]);
    }

    #[test]
    fn connected_graph_has_full_lcc() {
        let g = graph(4, &[(0, 1), (1, 2), (2, 3)]);
        assert_eq!(largest_component(&g).unwrap().0, 1.0);
    }

    #[test]
    fn path_graph_statistics() {
        // P4: diameter 3, mean (3·1 + 2·2 + 1·3)/6 = 10/6.
        let g = graph(4, &[(0, 1), (1, 2), (2, 3)]);
        let stats = path_statistics(&g, PathMode::Exact).unwrap();
        assert_eq!(stats.diameter, 3);
        assert!(!stats.diameter_is_lower_bound);
        assert!((stats.mean_path_length - 10.0 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn complete_graph_statistics() {
        let edges: Vec<(u32, u32)> = (0..5u32)
            .flat_map(|u| ((u + 1)..5).map(move |v| (u, v)))
            .collect();
        let g = graph(5, &edges);
        let stats = path_statistics(&g, PathMode::Exact).unwrap();
        assert_eq!(stats.diameter, 1);
        assert_eq!(stats.mean_path_length, 1.0);
        assert_eq!(clustering_coefficient(&g).unwrap(), 1.0);
    }

    #[test]
    fn sampled_mode_flags_lower_bound() {
        let g = graph(6, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5)]);
        let stats = path_statistics(&g, PathMode::Sampled { sources: 2, seed: 9 }).unwrap();
        assert!(stats.diameter_is_lower_bound);
        assert!(stats.diameter <= 5);
        assert_eq!(stats.sources_used, 2);
    }

    #[test]
    fn paths_ignore_other_components() {
        let g = graph(7, &[(0, 1), (1, 2), (2, 3), (5, 6)]);
        let stats = path_statistics(&g, PathMode::Exact).unwrap();
        assert_eq!(stats.lcc_size, 4);
        assert_eq!(stats.diameter, 3);
    }

    #[test]
    fn empty_graph_is_an_error() {
        let g = graph(0, &[]);
        assert!(matches!(path_statistics(&g, PathMode::Exact), Err(Error::EmptyNetwork)));
    }
}
