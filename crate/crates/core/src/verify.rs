//! Self-checks run by `mixgraph verify`: closed forms, golden matrices and
//! small dense oracles for every solver path.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::admm::{
    admm_block, cg_solve, mode_objective, soft_threshold, update_zd, update_zu, AdmmState, CgSchedule, FnOperator,
    LayerParams, SolverMode,
};
use crate::graph::{
    build_temporal_skeleton, Layout, MixedGraph, RandomWalkDigraph, SparseMatrix, SpatialSkeleton, SpatialWeights,
};
use crate::learn::{directed_weights, undirected_weights, Features, MetricMatrix};
use crate::pipeline::perron_centrality;
use crate::priors::{self, lowpass_response, spectrum_dense, PriorWeights};

/// Outcome of one check.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, passed: bool, detail: String) -> Check {
    Check { name, passed, detail }
}

/// Runs every check with a fixed seed.
pub fn run_all() -> Vec<Check> {
    vec![
        line_graph_identity(),
        golden_four_node(),
        directionality(),
        soft_threshold_grid(),
        smooth_fixed_point(),
        l1_oracle(),
        spectral_filters(),
        cg_dense(),
        ablations(),
        graph_invariants(),
        perron_star(),
    ]
}

fn max_abs_diff(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    a.iter()
        .flatten()
        .zip(b.iter().flatten())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Gaussian elimination with partial pivoting.
fn dense_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            if f != 0.0 {
                for c in col..n {
                    a[r][c] -= f * a[col][c];
                }
                b[r] -= f * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Some(x)
}

fn mat_add(a: &mut [Vec<f64>], b: &[Vec<f64>], s: f64) {
    for (ra, rb) in a.iter_mut().zip(b) {
        for (x, y) in ra.iter_mut().zip(rb) {
            *x += s * y;
        }
    }
}

fn mat_vec(a: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
    a.iter().map(|r| r.iter().zip(x).map(|(p, q)| p * q).sum()).collect()
}

fn directed_line(n: usize) -> RandomWalkDigraph {
    let edges: Vec<_> = (1..n).map(|j| (j - 1, j, 1.0)).collect();
    RandomWalkDigraph::from_edges(n, &edges).expect("line graph")
}

fn line_graph_identity() -> Check {
    let start = std::time::Instant::now();
    let mut worst = 0.0f64;
    for n in 2..=32 {
        let d = directed_line(n);
        let cal = d.l_rd_t.matmul(&d.l_rd).expect("square").to_dense();
        let mut lu = vec![vec![0.0; n]; n];
        for j in 1..n {
            lu[j][j] += 1.0;
            lu[j - 1][j - 1] += 1.0;
            lu[j][j - 1] -= 1.0;
            lu[j - 1][j] -= 1.0;
        }
        worst = worst.max(max_abs_diff(&cal, &lu));
    }
    let secs = start.elapsed().as_secs_f64();
    check(
        "line-graph identity",
        worst == 0.0 && secs < 1.0,
        format!("max |calL - L_line| = {worst:e} over N = 2..32 in {secs:.3}s"),
    )
}

fn golden_four_node() -> Check {
    let d = directed_line(4);
    let w = vec![
        vec![1.0, 0.0, 0.0, 0.0],
        vec![1.0, 0.0, 0.0, 0.0],
        vec![0.0, 1.0, 0.0, 0.0],
        vec![0.0, 0.0, 1.0, 0.0],
    ];
    let l = vec![
        vec![0.0, 0.0, 0.0, 0.0],
        vec![-1.0, 1.0, 0.0, 0.0],
        vec![0.0, -1.0, 1.0, 0.0],
        vec![0.0, 0.0, -1.0, 1.0],
    ];
    let cal = vec![
        vec![1.0, -1.0, 0.0, 0.0],
        vec![-1.0, 2.0, -1.0, 0.0],
        vec![0.0, -1.0, 2.0, -1.0],
        vec![0.0, 0.0, -1.0, 1.0],
    ];
    let got = crate::graph::symmetrized_dglr_matrix(&d.l_rd).expect("square");
    let errs = [
        max_abs_diff(&d.w_rd.to_dense(), &w),
        max_abs_diff(&d.l_rd.to_dense(), &l),
        max_abs_diff(&got.to_dense(), &cal),
    ];
    check(
        "four-node golden matrices",
        errs.iter().all(|&e| e == 0.0),
        format!(
            "entrywise errors W_rd {:e}, L_rd {:e}, calL_rd {:e}",
            errs[0], errs[1], errs[2]
        ),
    )
}

fn directionality() -> Check {
    let c = RandomWalkDigraph::from_edges(3, &[(0, 2, 1.0), (1, 2, 1.0)]).expect("graph");
    let d = RandomWalkDigraph::from_edges(3, &[(2, 0, 1.0), (2, 1, 1.0)]).expect("graph");
    let x = [2.0, 0.0, 1.0];
    let a = priors::dglr(&x, &c).unwrap_or(f64::NAN);
    let b = priors::dglr(&x, &d).unwrap_or(f64::NAN);
    check(
        "DGLR directionality",
        a == 0.0 && b == 2.0,
        format!("converging pair {a}, diverging pair {b}"),
    )
}

fn soft_threshold_grid() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let delta = rng.gen_range(-4.0..4.0);
        let mu = rng.gen_range(0.0..3.0);
        let rho = rng.gen_range(0.2..5.0);
        let t = mu / rho;
        let got = soft_threshold(delta, t);
        // g(φ) = μ|φ| + (ρ/2)(φ - δ)² on a 1e-4 grid over [-5, 5].
        let mut best = (f64::INFINITY, 0.0);
        for i in 0..=100_000 {
            let phi = -5.0 + 1e-4 * i as f64;
            let g = mu * phi.abs() + 0.5 * rho * (phi - delta).powi(2);
            if g < best.0 {
                best = (g, phi);
            }
        }
        worst = worst.max((got - best.1).abs());
    }
    let exact = soft_threshold(1.5, 0.5) == 1.0 && soft_threshold(0.0, 0.3) == 0.0;
    check(
        "soft-threshold vs grid search",
        worst <= 1e-3 && exact,
        format!("max gap {worst:.2e} over 1000 triples"),
    )
}

/// Small random mixed graph with observations and prior weights.
pub struct TinyProblem {
    pub graph: MixedGraph,
    pub y: Vec<f64>,
    pub weights: PriorWeights,
}

/// `N <= 4` stations and at most 5 instants with random positive weights.
pub fn tiny_problem(rng: &mut ChaCha8Rng, with_l1: bool) -> TinyProblem {
    let stations = rng.gen_range(2..=4);
    let instants = rng.gen_range(2..=5);
    let window = rng.gen_range(1..instants);
    let observed = rng.gen_range(1..instants);
    let neighbors: Vec<Vec<usize>> = (0..stations)
        .map(|i| (0..stations).filter(|&j| j != i).collect())
        .collect();
    let spatial = SpatialSkeleton::from_neighbors(neighbors).expect("complete graph");
    let per_instant = (0..instants)
        .map(|_| (0..spatial.edges().len()).map(|_| rng.gen_range(0.1..1.0)).collect())
        .collect();
    let temporal = build_temporal_skeleton(stations, instants, window).expect("skeleton");
    let wd: Vec<f64> = (0..temporal.edges().len()).map(|_| rng.gen_range(0.1..1.0)).collect();
    let graph =
        MixedGraph::assemble(&spatial, &temporal, &SpatialWeights { per_instant }, &wd, observed).expect("assembles");
    let y = (0..graph.observed_count())
        .map(|_| rng.sample::<f64, _>(StandardNormal))
        .collect();
    let weights = PriorWeights {
        mu_u: rng.gen_range(0.2..2.0),
        mu_d2: rng.gen_range(0.2..2.0),
        mu_d1: if with_l1 { rng.gen_range(0.05..0.5) } else { 0.0 },
    };
    TinyProblem { graph, y, weights }
}

/// Dense `H^T H + μ_u L_u + μ_d2 calL_rd`.
fn smooth_system(g: &MixedGraph, w: &PriorWeights) -> Vec<Vec<f64>> {
    let n = g.len();
    let mut a = vec![vec![0.0; n]; n];
    for (i, &m) in g.observed().iter().enumerate() {
        if m {
            a[i][i] = 1.0;
        }
    }
    mat_add(&mut a, &g.l_u().to_dense(), w.mu_u);
    mat_add(&mut a, &g.cal_l_rd().to_dense(), w.mu_d2);
    a
}

fn uniform_params(w: &PriorWeights, rho: f64) -> LayerParams {
    LayerParams {
        mu_u: w.mu_u,
        mu_d2: w.mu_d2,
        mu_d1: w.mu_d1,
        rho,
        rho_u: rho,
        rho_d: rho,
    }
}

fn exact_cg() -> CgSchedule {
    CgSchedule::exact(500, 1e-13)
}

fn smooth_fixed_point() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let p = tiny_problem(&mut rng, false);
        let hty = p.graph.upsample(&p.y).expect("shape");
        let xs = dense_solve(smooth_system(&p.graph, &p.weights), hty).expect("nonsingular");
        let f_star = priors::objective(&xs, &p.y, &p.graph, &p.weights).expect("shape");
        let params = vec![uniform_params(&p.weights, 1.0); 300];
        let x0 = vec![0.0; p.graph.len()];
        let x = match admm_block(&x0, &p.y, &p.graph, &params, &exact_cg(), SolverMode::Full) {
            Ok(x) => x,
            Err(e) => return check("smooth fixed point", false, e.to_string()),
        };
        let f = priors::objective(&x, &p.y, &p.graph, &p.weights).expect("shape");
        worst = worst.max((f - f_star).abs());
    }
    check(
        "smooth fixed point vs dense solve",
        worst < 1e-6,
        format!("max objective gap {worst:.2e} over 20 instances"),
    )
}

/// `min ||y - Hx||² + x^T S x + μ_d1 ||L_rd x||_1` by projected gradient on the dual box.
pub fn l1_dual_oracle(p: &TinyProblem) -> Vec<f64> {
    let g = &p.graph;
    let n = g.len();
    let mut q = smooth_system(g, &p.weights);
    q.iter_mut().flatten().for_each(|v| *v *= 2.0);
    let c: Vec<f64> = g.upsample(&p.y).expect("shape").iter().map(|v| 2.0 * v).collect();
    let d = g.l_rd().to_dense();
    let dt = g.digraph().l_rd_t.to_dense();
    let x_of = |u: &[f64]| -> Vec<f64> {
        let dtu = mat_vec(&dt, u);
        let rhs: Vec<f64> = c.iter().zip(&dtu).map(|(a, b)| a - b).collect();
        dense_solve(q.clone(), rhs).expect("positive definite")
    };
    // Lipschitz bound of u -> D Q^{-1} D^T u by power iteration.
    let mut v = vec![1.0; n];
    let mut lip = 0.0;
    for _ in 0..200 {
        let w = mat_vec(&d, &dense_solve(q.clone(), mat_vec(&dt, &v)).expect("pd"));
        let norm = w.iter().map(|a| a * a).sum::<f64>().sqrt();
        if norm == 0.0 {
            break;
        }
        lip = norm / v.iter().map(|a| a * a).sum::<f64>().sqrt();
        v = w.iter().map(|a| a / norm).collect();
    }
    let step = 1.0 / (1.1 * lip.max(1e-12));
    let bound = p.weights.mu_d1;
    let mut u = vec![0.0; n];
    let mut z = u.clone();
    let mut t = 1.0f64;
    for _ in 0..200_000 {
        let x = x_of(&z);
        let dx = mat_vec(&d, &x);
        let next: Vec<f64> = z
            .iter()
            .zip(&dx)
            .map(|(zi, gi)| (zi + step * gi).clamp(-bound, bound))
            .collect();
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        let moved = next.iter().zip(&u).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        z = next
            .iter()
            .zip(&u)
            .map(|(a, b)| a + (t - 1.0) / t_next * (a - b))
            .collect();
        u = next;
        t = t_next;
        if moved < 1e-12 {
            break;
        }
    }
    x_of(&u)
}

fn l1_oracle() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let p = tiny_problem(&mut rng, true);
        let xo = l1_dual_oracle(&p);
        let fo = priors::objective(&xo, &p.y, &p.graph, &p.weights).expect("shape");
        let params = vec![uniform_params(&p.weights, 1.0); 500];
        let x0 = vec![0.0; p.graph.len()];
        let x = match admm_block(&x0, &p.y, &p.graph, &params, &exact_cg(), SolverMode::Full) {
            Ok(x) => x,
            Err(e) => return check("l1 oracle", false, e.to_string()),
        };
        let f = priors::objective(&x, &p.y, &p.graph, &p.weights).expect("shape");
        worst = worst.max((f - fo).abs());
    }
    check(
        "l1 case vs dual projected gradient",
        worst < 1e-4,
        format!("max objective gap {worst:.2e} over 10 instances"),
    )
}

fn spectral_filters() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0.0f64;
    for _ in 0..5 {
        let p = tiny_problem(&mut rng, false);
        let g = &p.graph;
        let n = g.len();
        let mut st = AdmmState::init(&vec![0.0; n], g).expect("shape");
        for v in [&mut st.x, &mut st.gamma_u, &mut st.gamma_d] {
            v.iter_mut().for_each(|a| *a = rng.sample(StandardNormal));
        }
        let lp = LayerParams {
            rho_u: rng.gen_range(0.5..2.0),
            rho_d: rng.gen_range(0.5..2.0),
            ..uniform_params(&p.weights, 1.0)
        };
        let zu = update_zu(&st, g, &lp, &exact_cg()).expect("cg");
        let zd = update_zd(&st, g, &lp, &exact_cg()).expect("cg");
        let su = spectrum_dense(g.l_u()).expect("small");
        let sd = spectrum_dense(g.cal_l_rd()).expect("small");
        let inp = |gamma: &[f64], rho: f64| -> Vec<f64> { gamma.iter().zip(&st.x).map(|(a, b)| a / rho + b).collect() };
        let ou = su.filter(
            |l| lowpass_response(l, 2.0 * lp.mu_u / lp.rho_u),
            &inp(&st.gamma_u, lp.rho_u),
        );
        let od = sd.filter(
            |l| lowpass_response(l, 2.0 * lp.mu_d2 / lp.rho_d),
            &inp(&st.gamma_d, lp.rho_d),
        );
        for (a, b) in zu.iter().zip(&ou).chain(zd.iter().zip(&od)) {
            worst = worst.max((a - b).abs());
        }
    }
    check(
        "z-updates vs spectral low-pass",
        worst < 1e-8,
        format!("max deviation {worst:.2e}"),
    )
}

fn random_spd(rng: &mut ChaCha8Rng, n: usize) -> Vec<Vec<f64>> {
    let b: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect())
        .collect();
    let mut a = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            a[i][j] = (0..n).map(|k| b[k][i] * b[k][j]).sum::<f64>() / n as f64;
        }
        a[i][i] += 1.0;
    }
    a
}

fn cg_dense() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst_res = 0.0f64;
    let mut worst_gap = 0.0f64;
    for &n in &[10usize, 50, 120, 200] {
        let a = random_spd(&mut rng, n);
        let b: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let op = FnOperator::new(n, |x: &[f64], out: &mut [f64]| {
            for (o, row) in out.iter_mut().zip(&a) {
                *o = row.iter().zip(x).map(|(p, q)| p * q).sum();
            }
        });
        let sol = match cg_solve(&op, &b, &vec![0.0; n], &CgSchedule::exact(10 * n, 1e-11)) {
            Ok(s) => s,
            Err(e) => return check("CG vs dense elimination", false, e.to_string()),
        };
        let ax = mat_vec(&a, &sol.x);
        let res = ax.iter().zip(&b).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt();
        let direct = dense_solve(a.clone(), b.clone()).expect("spd");
        worst_res = worst_res.max(res);
        worst_gap = worst_gap.max(
            sol.x
                .iter()
                .zip(&direct)
                .map(|(p, q)| (p - q).abs())
                .fold(0.0, f64::max),
        );
    }
    check(
        "CG vs dense elimination",
        worst_res < 1e-8 && worst_gap < 1e-8,
        format!("max residual {worst_res:.2e}, max gap {worst_gap:.2e}"),
    )
}

fn ablations() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut gap_dgtv = 0.0f64;
    let mut gap_und = 0.0f64;
    for _ in 0..10 {
        let p = tiny_problem(&mut rng, false);
        let g = &p.graph;
        let x0 = vec![0.0; g.len()];
        let params = vec![uniform_params(&p.weights, 1.0); 300];
        let run = |mode| admm_block(&x0, &p.y, g, &params, &exact_cg(), mode);
        let (full, nod, und) = match (
            run(SolverMode::Full),
            run(SolverMode::NoDgtv),
            run(SolverMode::UndirectedTemporal),
        ) {
            (Ok(a), Ok(b), Ok(c)) => (a, b, c),
            _ => return check("ablation consistency", false, "solver failure".into()),
        };
        let f_full = priors::objective(&full, &p.y, g, &p.weights).expect("shape");
        let f_nod = mode_objective(&nod, &p.y, g, &p.weights, SolverMode::NoDgtv).expect("shape");
        gap_dgtv = gap_dgtv.max((f_full - f_nod).abs());

        let n = g.len();
        let mut a = vec![vec![0.0; n]; n];
        for (i, &m) in g.observed().iter().enumerate() {
            if m {
                a[i][i] = 1.0;
            }
        }
        mat_add(&mut a, &g.l_u().to_dense(), p.weights.mu_u);
        mat_add(&mut a, &g.l_n().to_dense(), p.weights.mu_d2);
        let xs = dense_solve(a, g.upsample(&p.y).expect("shape")).expect("nonsingular");
        let f_star = mode_objective(&xs, &p.y, g, &p.weights, SolverMode::UndirectedTemporal).expect("shape");
        let f_und = mode_objective(&und, &p.y, g, &p.weights, SolverMode::UndirectedTemporal).expect("shape");
        gap_und = gap_und.max((f_und - f_star).abs());
    }
    check(
        "ablation consistency",
        gap_dgtv < 1e-6 && gap_und < 1e-6,
        format!("no_dgtv gap {gap_dgtv:.2e}, undirected_temporal gap {gap_und:.2e}"),
    )
}

fn graph_invariants() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut worst_row = 0.0f64;
    let mut worst_sym = 0.0f64;
    let mut worst_eig = 0.0f64;
    let mut worst_const = 0.0f64;
    for _ in 0..5 {
        let stations = 4;
        let instants = 5;
        let layout = Layout::new(stations, instants);
        let spatial =
            SpatialSkeleton::from_neighbors(vec![vec![1, 2], vec![0, 3], vec![0, 3], vec![1, 2]]).expect("ring");
        let temporal = build_temporal_skeleton(stations, instants, 2).expect("skeleton");
        let rows: Vec<Vec<f64>> = (0..layout.len())
            .map(|_| (0..3).map(|_| rng.sample::<f64, _>(StandardNormal)).collect())
            .collect();
        let f = Features::from_rows(&rows).expect("rows");
        let m = MetricMatrix::diagonal(&[1.0, 0.5, 2.0]);
        let wu = undirected_weights(&f, &spatial, &vec![m.clone(); instants]).expect("weights");
        let wd = directed_weights(&f, &temporal, &[m.clone(), m]).expect("weights");
        let g = MixedGraph::assemble(&spatial, &temporal, &wu, &wd, 3).expect("graph");
        for s in g.w_rd().row_sums() {
            worst_row = worst_row.max((s - 1.0).abs());
        }
        worst_sym = worst_sym
            .max(g.spatial_adjacency().asymmetry())
            .max(g.l_u().asymmetry());
        for mat in [g.l_u(), g.cal_l_rd(), g.l_n()] {
            let lam = spectrum_dense(mat).expect("small").eigenvalues[0];
            worst_eig = worst_eig.max(-lam);
        }
        let ones = vec![1.0; g.len()];
        for mat in [g.l_u(), g.l_rd(), g.cal_l_rd()] {
            let r: &SparseMatrix = mat;
            worst_const = worst_const.max(r.mul_vec(&ones).expect("shape").iter().fold(0.0, |a, v| a.max(v.abs())));
        }
    }
    check(
        "graph invariants",
        worst_row < 1e-12 && worst_sym < 1e-12 && worst_eig < 1e-10 && worst_const < 1e-12,
        format!(
            "row-sum {worst_row:.1e}, asymmetry {worst_sym:.1e}, min eigenvalue {:.1e}, L·1 {worst_const:.1e}",
            -worst_eig
        ),
    )
}

fn perron_star() -> Check {
    let trip: Vec<_> = (1..4).flat_map(|l| [(0, l, 1.0), (l, 0, 1.0)]).collect();
    let w = SparseMatrix::from_triplets(4, 4, &trip).expect("star");
    match perron_centrality(&w) {
        Ok(p) => {
            let ok = p.iter().all(|&v| v > 0.0) && p[1..].iter().all(|&v| v < p[0]);
            check("Perron centrality", ok, format!("star centrality {p:.4?}"))
        }
        Err(e) => check("Perron centrality", false, e.to_string()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dense_solve_small() {
        let x = dense_solve(vec![vec![2.0, 1.0], vec![1.0, 3.0]], vec![3.0, 5.0]).unwrap();
        assert!((x[0] - 0.8).abs() < 1e-14 && (x[1] - 1.4).abs() < 1e-14);
        assert!(dense_solve(vec![vec![0.0]], vec![1.0]).is_none());
    }

    #[test]
    fn every_check_passes() {
        for c in run_all() {
            assert!(c.passed, "{}: {}", c.name, c.detail);
        }
    }
}
