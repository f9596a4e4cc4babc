use crate::error::{check_len, Error, Result};
use crate::graph::{Layout, PhysicalGraph, SparseMatrix};
use crate::priors::spectrum_dense;

/// Length of the fixed sinusoidal time embedding.
pub const TEMPORAL_DIM: usize = 10;
/// Default number of eigenmap coordinates per station.
pub const DEFAULT_SPATIAL_DIM: usize = 5;

/// `[sin(t), cos(t), sin(t/10^4), cos(t/10^4), ...]` for five frequencies.
pub fn temporal_embedding(t: f64) -> [f64; TEMPORAL_DIM] {
    let mut e = [0.0; TEMPORAL_DIM];
    for i in 0..TEMPORAL_DIM / 2 {
        let arg = t / 10000f64.powi(i as i32);
        e[2 * i] = arg.sin();
        e[2 * i + 1] = arg.cos();
    }
    e
}

/// Laplacian eigenmap coordinates of each station.
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialEigenmap {
    dim: usize,
    coords: Vec<Vec<f64>>,
}

impl SpatialEigenmap {
    /// Smallest nontrivial eigenvectors of the unit-weight Laplacian of `pg`,
    /// each signed so its first nonzero entry is positive. Coordinates past
    /// `N - 1` are zero.
    pub fn new(pg: &PhysicalGraph, dim: usize) -> Result<Self> {
        let n = pg.station_count();
        if n == 0 {
            return Err(Error::invalid("physical graph has no stations"));
        }
        if !pg.is_connected() {
            log::warn!("physical graph is disconnected; eigenmap mixes components");
        }
        let mut trip = Vec::with_capacity(n + 2 * pg.edges().len());
        let mut deg = vec![0.0; n];
        for &(a, b, _) in pg.edges() {
            trip.push((a, b, -1.0));
            trip.push((b, a, -1.0));
            deg[a] += 1.0;
            deg[b] += 1.0;
        }
        trip.extend(deg.iter().enumerate().map(|(i, &d)| (i, i, d)));
        let lap = SparseMatrix::from_triplets_summed(n, n, &trip)?;
        let mut spec = spectrum_dense(&lap)?;
        spec.canonicalize_signs(1e-9);
        let coords = (0..n)
            .map(|s| {
                (0..dim)
                    .map(|k| spec.eigenvectors.get(k + 1).map_or(0.0, |v| v[s]))
                    .collect()
            })
            .collect();
        Ok(SpatialEigenmap { dim, coords })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn station_count(&self) -> usize {
        self.coords.len()
    }

    pub fn station(&self, s: usize) -> &[f64] {
        &self.coords[s]
    }
}

/// Per-node embedding vectors `[signal; spatial; temporal]`, flattened row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Embeddings {
    dim: usize,
    data: Vec<f64>,
}

impl Embeddings {
    pub fn from_rows(dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 || !data.len().is_multiple_of(dim) {
            return Err(Error::invalid(format!(
                "{} values do not split into rows of {dim}",
                data.len()
            )));
        }
        Ok(Embeddings { dim, data })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn node(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }
}

/// Embeds every node of a space-time signal. `timestamps` has one entry per instant.
pub fn embed(x: &[f64], layout: Layout, eigenmap: &SpatialEigenmap, timestamps: &[f64]) -> Result<Embeddings> {
    check_len("signal", layout.len(), x.len())?;
    check_len("timestamps", layout.instants, timestamps.len())?;
    check_len("eigenmap stations", layout.stations, eigenmap.station_count())?;
    let dim = 1 + eigenmap.dim() + TEMPORAL_DIM;
    let mut data = Vec::with_capacity(dim * layout.len());
    for (t, &ts) in timestamps.iter().enumerate() {
        let te = temporal_embedding(ts);
        for s in 0..layout.stations {
            data.push(x[layout.flat(s, t)]);
            data.extend_from_slice(eigenmap.station(s));
            data.extend_from_slice(&te);
        }
    }
    Ok(Embeddings { dim, data })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn time_zero() {
        assert_eq!(
            temporal_embedding(0.0),
            [0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0]
        );
    }

    #[test]
    fn path3_fiedler() {
        let pg = PhysicalGraph::new(3, vec![(0, 1, 1.0), (1, 2, 4.0)]).unwrap();
        let em = SpatialEigenmap::new(&pg, 2).unwrap();
        let f: Vec<f64> = (0..3).map(|s| em.station(s)[0]).collect();
        let r = 0.5f64.sqrt();
        for (got, want) in f.iter().zip([r, 0.0, -r]) {
            assert!((got - want).abs() < 1e-10, "{f:?}");
        }
    }

    #[test]
    fn pads_past_station_count() {
        let pg = PhysicalGraph::new(2, vec![(0, 1, 1.0)]).unwrap();
        let em = SpatialEigenmap::new(&pg, 3).unwrap();
        assert_eq!(em.station(0)[1..], [0.0, 0.0]);
    }

    #[test]
    fn symmetric_stations_match() {
        let pg = PhysicalGraph::new(3, vec![(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        let em = SpatialEigenmap::new(&pg, 2).unwrap();
        let layout = Layout::new(3, 2);
        let x = [5.0, 1.0, 5.0, 6.0, 2.0, 6.0];
        let e = embed(&x, layout, &em, &[0.0, 1.0]).unwrap();
        assert_eq!(e.dim(), 1 + 2 + TEMPORAL_DIM);
        for (a, b) in e.node(0).iter().zip(e.node(2)) {
            assert!((a.abs() - b.abs()).abs() < 1e-10);
        }
        assert!(embed(&x[1..], layout, &em, &[0.0, 1.0]).is_err());
    }
}
