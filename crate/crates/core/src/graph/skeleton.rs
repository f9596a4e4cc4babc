//! Index layout of the product graph and the edge skeletons that graph learning fills in.

use std::collections::HashSet;

use crate::error::{Error, Result};

/// Position of one sample in the stacked space-time signal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SpaceTimeIndex {
    pub station: usize,
    pub instant: usize,
}

/// Shape of a space-time signal: `stations` nodes per instant, `instants`
/// instants, stored time-major so instant `t` occupies `t*N .. (t+1)*N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Layout {
    pub stations: usize,
    pub instants: usize,
}

impl Layout {
    pub fn new(stations: usize, instants: usize) -> Self {
        Layout { stations, instants }
    }

    pub fn len(&self) -> usize {
        self.stations * self.instants
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn flat(&self, station: usize, instant: usize) -> usize {
        debug_assert!(station < self.stations && instant < self.instants);
        instant * self.stations + station
    }

    pub fn index(&self, flat: usize) -> SpaceTimeIndex {
        SpaceTimeIndex {
            station: flat % self.stations,
            instant: flat / self.stations,
        }
    }

    /// Mask that is true on the first `observed` instants.
    pub fn prefix_mask(&self, observed: usize) -> Vec<bool> {
        (0..self.len()).map(|i| i / self.stations < observed).collect()
    }
}

/// Road network: stations joined by undirected edges with nonnegative travel cost.
#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalGraph {
    station_count: usize,
    edges: Vec<(usize, usize, f64)>,
}

impl PhysicalGraph {
    pub fn new(station_count: usize, edges: Vec<(usize, usize, f64)>) -> Result<Self> {
        let mut seen = HashSet::new();
        for &(a, b, cost) in &edges {
            if a >= station_count || b >= station_count {
                return Err(Error::invalid(format!(
                    "edge ({a}, {b}) references a station outside 0..{station_count}"
                )));
            }
            if a == b {
                return Err(Error::invalid(format!("self-edge at station {a}")));
            }
            if !(cost >= 0.0 && cost.is_finite()) {
                return Err(Error::invalid(format!("edge ({a}, {b}) has cost {cost}")));
            }
            if !seen.insert((a.min(b), a.max(b))) {
                return Err(Error::invalid(format!("duplicate edge ({a}, {b})")));
            }
        }
        Ok(PhysicalGraph { station_count, edges })
    }

    pub fn station_count(&self) -> usize {
        self.station_count
    }

    pub fn edges(&self) -> &[(usize, usize, f64)] {
        &self.edges
    }

    /// Per-station `(neighbor, cost)` lists.
    pub fn adjacency(&self) -> Vec<Vec<(usize, f64)>> {
        let mut adj = vec![Vec::new(); self.station_count];
        for &(a, b, c) in &self.edges {
            adj[a].push((b, c));
            adj[b].push((a, c));
        }
        adj
    }

    /// Whether every station is reachable from station 0.
    pub fn is_connected(&self) -> bool {
        if self.station_count == 0 {
            return true;
        }
        let adj = self.adjacency();
        let mut seen = vec![false; self.station_count];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for &(u, _) in &adj[v] {
                if !seen[u] {
                    seen[u] = true;
                    stack.push(u);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }
}

/// Undirected spatial edges shared by every instant.
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialSkeleton {
    neighbors: Vec<Vec<usize>>,
    edges: Vec<(usize, usize)>,
}

impl SpatialSkeleton {
    /// Builds a skeleton directly from neighbor lists, symmetrizing by union.
    pub fn from_neighbors(neighbors: Vec<Vec<usize>>) -> Result<Self> {
        let n = neighbors.len();
        let mut pairs = HashSet::new();
        for (i, list) in neighbors.iter().enumerate() {
            for &j in list {
                if j >= n || j == i {
                    return Err(Error::invalid(format!("bad neighbor {j} for station {i}")));
                }
                pairs.insert((i.min(j), i.max(j)));
            }
        }
        let mut edges: Vec<_> = pairs.into_iter().collect();
        edges.sort_unstable();
        let mut sym = vec![Vec::new(); n];
        for &(a, b) in &edges {
            sym[a].push(b);
            sym[b].push(a);
        }
        for list in &mut sym {
            list.sort_unstable();
        }
        Ok(SpatialSkeleton { neighbors: sym, edges })
    }

    pub fn station_count(&self) -> usize {
        self.neighbors.len()
    }

    /// Sorted neighbor list of a station after symmetrization.
    pub fn neighbors(&self, station: usize) -> &[usize] {
        &self.neighbors[station]
    }

    /// Unordered edges `(a, b)` with `a < b`, sorted.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge_index(&self, a: usize, b: usize) -> Option<usize> {
        self.edges.binary_search(&(a.min(b), a.max(b))).ok()
    }
}

/// Keeps each station's `k` cheapest physical neighbors (ties to the lower
/// station id) and symmetrizes the selection by union.
pub fn build_spatial_skeleton(pg: &PhysicalGraph, k: usize) -> Result<SpatialSkeleton> {
    if k == 0 {
        return Err(Error::invalid("k must be at least 1"));
    }
    if pg.station_count() == 0 {
        return Err(Error::invalid("physical graph has no stations"));
    }
    let selected = pg
        .adjacency()
        .into_iter()
        .map(|mut cands| {
            cands.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
            cands.into_iter().take(k).map(|(j, _)| j).collect()
        })
        .collect();
    SpatialSkeleton::from_neighbors(selected)
}

/// A directed temporal edge from `(station, instant - lag)` to `(station, instant)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TemporalEdge {
    pub from: usize,
    pub to: usize,
    pub lag: usize,
}

/// Windowed directed temporal DAG over the product graph.
#[derive(Debug, Clone, PartialEq)]
pub struct TemporalSkeleton {
    layout: Layout,
    window: usize,
    edges: Vec<TemporalEdge>,
    /// For each flat node, the range of `edges` whose `to` is that node.
    incoming: Vec<std::ops::Range<usize>>,
}

/// Same-station temporal edges for lags `1..=window`.
pub fn build_temporal_skeleton(stations: usize, instants: usize, window: usize) -> Result<TemporalSkeleton> {
    if stations == 0 {
        return Err(Error::invalid("need at least one station"));
    }
    if instants < 2 {
        return Err(Error::invalid(format!("need at least 2 instants, got {instants}")));
    }
    if window == 0 || window >= instants {
        return Err(Error::invalid(format!("window {window} must lie in 1..{instants}")));
    }
    let layout = Layout::new(stations, instants);
    let mut edges = Vec::new();
    let mut incoming = Vec::with_capacity(layout.len());
    for t in 0..instants {
        for s in 0..stations {
            let start = edges.len();
            for lag in 1..=window.min(t) {
                edges.push(TemporalEdge {
                    from: layout.flat(s, t - lag),
                    to: layout.flat(s, t),
                    lag,
                });
            }
            incoming.push(start..edges.len());
        }
    }
    Ok(TemporalSkeleton {
        layout,
        window,
        edges,
        incoming,
    })
}

impl TemporalSkeleton {
    pub fn layout(&self) -> Layout {
        self.layout
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn edges(&self) -> &[TemporalEdge] {
        &self.edges
    }

    /// Indices into [`edges`](Self::edges) of the edges entering `node`.
    pub fn incoming(&self, node: usize) -> std::ops::Range<usize> {
        self.incoming[node].clone()
    }

    pub fn is_source(&self, node: usize) -> bool {
        self.incoming[node].is_empty()
    }

    pub fn sources(&self) -> Vec<usize> {
        (0..self.layout.len()).filter(|&v| self.is_source(v)).collect()
    }
}
