//! Dense reference implementations built directly from edge lists with nalgebra.
#![allow(dead_code)]

use mixgraph::admm::LayerParams;
use mixgraph::graph::{build_temporal_skeleton, MixedGraph, SparseMatrix, SpatialSkeleton, SpatialWeights};
use mixgraph::priors::PriorWeights;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn dense(m: &SparseMatrix) -> DMatrix<f64> {
    let mut d = DMatrix::zeros(m.rows(), m.cols());
    for (r, c, v) in m.triplets() {
        d[(r, c)] += v;
    }
    d
}

pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |a, v| a.max(v.abs()))
}

/// Random product-graph instance with dense operators derived from its raw weights.
pub struct Instance {
    pub graph: MixedGraph,
    pub w_u: DMatrix<f64>,
    pub l_u: DMatrix<f64>,
    pub w_rd: DMatrix<f64>,
    pub l_rd: DMatrix<f64>,
    pub cal: DMatrix<f64>,
    pub l_n: DMatrix<f64>,
    /// Diagonal observation mask `H^T H`.
    pub hth: DMatrix<f64>,
    pub y: Vec<f64>,
    pub hty: DVector<f64>,
    pub weights: PriorWeights,
}

#[derive(Debug, Clone)]
pub struct Shape {
    pub stations: usize,
    pub instants: usize,
    pub window: usize,
    pub observed: usize,
}

impl Shape {
    /// `N <= 4`, at most five instants.
    pub fn tiny(rng: &mut ChaCha8Rng) -> Shape {
        let stations = rng.gen_range(2..=4);
        let instants = rng.gen_range(2..=5);
        Shape {
            stations,
            instants,
            window: rng.gen_range(1..instants),
            observed: rng.gen_range(1..instants),
        }
    }
}

pub fn instance(rng: &mut ChaCha8Rng, shape: &Shape, with_l1: bool) -> Instance {
    let n = shape.stations;
    let neighbors: Vec<Vec<usize>> = (0..n)
        .map(|i| {
            (0..n)
                .filter(|&j| j != i && (j + 1 == i || i + 1 == j || rng.gen_bool(0.5)))
                .collect()
        })
        .collect();
    let neighbors = symmetric(neighbors);
    let spatial = SpatialSkeleton::from_neighbors(neighbors).unwrap();
    let per_instant: Vec<Vec<f64>> = (0..shape.instants)
        .map(|_| (0..spatial.edges().len()).map(|_| rng.gen_range(0.1..1.0)).collect())
        .collect();
    let temporal = build_temporal_skeleton(n, shape.instants, shape.window).unwrap();
    let wd: Vec<f64> = (0..temporal.edges().len()).map(|_| rng.gen_range(0.1..1.0)).collect();
    let graph = MixedGraph::assemble(
        &spatial,
        &temporal,
        &SpatialWeights {
            per_instant: per_instant.clone(),
        },
        &wd,
        shape.observed,
    )
    .unwrap();

    let len = n * shape.instants;
    let mut w_u = DMatrix::zeros(len, len);
    for (t, ws) in per_instant.iter().enumerate() {
        for (&(a, b), &w) in spatial.edges().iter().zip(ws) {
            w_u[(t * n + a, t * n + b)] = w;
            w_u[(t * n + b, t * n + a)] = w;
        }
    }
    let l_u = DMatrix::from_diagonal(&DVector::from_iterator(len, w_u.row_iter().map(|r| r.sum()))) - &w_u;

    let mut w_rd = DMatrix::zeros(len, len);
    let mut indeg = vec![0.0; len];
    for (e, &w) in temporal.edges().iter().zip(&wd) {
        w_rd[(e.to, e.from)] += w;
        indeg[e.to] += w;
    }
    for (i, &d) in indeg.iter().enumerate() {
        if d == 0.0 {
            w_rd[(i, i)] = 1.0;
        } else {
            for j in 0..len {
                w_rd[(i, j)] /= d;
            }
        }
    }
    let l_rd = DMatrix::identity(len, len) - &w_rd;
    let cal = l_rd.transpose() * &l_rd;

    let mut a = DMatrix::zeros(len, len);
    for i in 0..len {
        for j in 0..len {
            if i != j {
                a[(i, j)] = 0.5 * (w_rd[(i, j)] + w_rd[(j, i)]);
            }
        }
    }
    let deg: Vec<f64> = a.row_iter().map(|r| r.sum()).collect();
    let mut l_n = DMatrix::zeros(len, len);
    for i in 0..len {
        for j in 0..len {
            let id = if i == j && deg[i] > 0.0 { 1.0 } else { 0.0 };
            let off = if a[(i, j)] != 0.0 {
                a[(i, j)] / (deg[i] * deg[j]).sqrt()
            } else {
                0.0
            };
            l_n[(i, j)] = id - off;
        }
    }

    let observed = n * shape.observed;
    let mut hth = DMatrix::zeros(len, len);
    for i in 0..observed {
        hth[(i, i)] = 1.0;
    }
    let y: Vec<f64> = (0..observed).map(|_| rng.sample(StandardNormal)).collect();
    let mut hty = DVector::zeros(len);
    hty.rows_mut(0, observed).copy_from_slice(&y);
    let weights = PriorWeights {
        mu_u: rng.gen_range(0.2..2.0),
        mu_d2: rng.gen_range(0.2..2.0),
        mu_d1: if with_l1 { rng.gen_range(0.05..0.5) } else { 0.0 },
    };
    Instance {
        graph,
        w_u,
        l_u,
        w_rd,
        l_rd,
        cal,
        l_n,
        hth,
        y,
        hty,
        weights,
    }
}

fn symmetric(mut nb: Vec<Vec<usize>>) -> Vec<Vec<usize>> {
    let n = nb.len();
    for i in 0..n {
        for j in nb[i].clone() {
            if !nb[j].contains(&i) {
                nb[j].push(i);
            }
        }
    }
    for l in nb.iter_mut() {
        l.sort_unstable();
    }
    nb
}

impl Instance {
    pub fn len(&self) -> usize {
        self.hty.len()
    }

    pub fn objective_with(&self, x: &[f64], w: &PriorWeights, temporal: &DMatrix<f64>, directed: bool) -> f64 {
        let x = DVector::from_column_slice(x);
        let hx = &self.hth * &x;
        let fid = (&self.hty - hx).norm_squared();
        let glr = x.dot(&(&self.l_u * &x));
        let t = if directed {
            (&self.l_rd * &x).norm_squared()
        } else {
            x.dot(&(temporal * &x))
        };
        let tv = (&self.l_rd * &x).lp_norm(1);
        fid + w.mu_u * glr + w.mu_d2 * t + w.mu_d1 * tv
    }

    pub fn objective(&self, x: &[f64]) -> f64 {
        self.objective_with(x, &self.weights, &self.cal, true)
    }

    /// Minimizer of the quadratic objective `||y - Hx||² + x^T S x`.
    pub fn quadratic_solution(&self, s: &DMatrix<f64>) -> DVector<f64> {
        let a = &self.hth + s;
        a.cholesky().expect("positive definite").solve(&self.hty)
    }

    pub fn smooth_solution(&self) -> DVector<f64> {
        let w = &self.weights;
        self.quadratic_solution(&(&self.l_u * w.mu_u + &self.cal * w.mu_d2))
    }

    /// FISTA on the dual of the ℓ1 problem; the primal is recovered from the dual box variable.
    pub fn l1_solution(&self) -> DVector<f64> {
        let w = &self.weights;
        let q = (&self.hth + &self.l_u * w.mu_u + &self.cal * w.mu_d2) * 2.0;
        let chol = q.cholesky().expect("positive definite");
        let c = &self.hty * 2.0;
        let d = &self.l_rd;
        let x_of = |u: &DVector<f64>| chol.solve(&(&c - d.transpose() * u));
        let k = d * chol.inverse() * d.transpose();
        let lip = k.symmetric_eigenvalues().amax().max(1e-12);
        let step = 1.0 / lip;
        let mu = w.mu_d1;
        let n = self.len();
        let mut u = DVector::zeros(n);
        let mut z = u.clone();
        let mut t = 1.0f64;
        for _ in 0..500_000 {
            let g = d * x_of(&z);
            let next = (&z + g * step).map(|v| v.clamp(-mu, mu));
            let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
            let moved = (&next - &u).amax();
            z = &next + (&next - &u) * ((t - 1.0) / t_next);
            u = next;
            t = t_next;
            if moved < 1e-13 {
                break;
            }
        }
        x_of(&u)
    }
}

pub fn uniform_params(w: &PriorWeights, rho: f64) -> LayerParams {
    LayerParams {
        mu_u: w.mu_u,
        mu_d2: w.mu_d2,
        mu_d1: w.mu_d1,
        rho,
        rho_u: rho,
        rho_d: rho,
    }
}

pub fn random_spd(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    let b = DMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    b.transpose() * &b / n as f64 + DMatrix::identity(n, n)
}

pub fn random_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

pub fn tiny_instance(rng: &mut ChaCha8Rng, with_l1: bool) -> Instance {
    let shape = Shape::tiny(rng);
    instance(rng, &shape, with_l1)
}
