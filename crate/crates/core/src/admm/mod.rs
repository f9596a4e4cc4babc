//! Unrolled ADMM for the mixed-graph reconstruction problem.
//!
//! One layer runs four sub-steps: a CG solve for `x`, CG solves for the split
//! variables `z_u` and `z_d`, a soft-threshold for `φ`, and the multiplier
//! updates. [`SolverMode`] selects the full solver or one of the ablations.

mod cg;

pub use cg::{
    cg_in_place, cg_solve, CgSchedule, CgSolution, FnOperator, LinearOperator, DEFAULT_EXACT_TOL,
    DEFAULT_UNROLLED_FILL, DEFAULT_UNROLLED_ITERS, MAX_UNROLLED_ALPHA,
};

use std::cell::RefCell;

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result, SubStep};
use crate::graph::{MixedGraph, Operator};
use crate::priors::{self, PriorWeights};

/// Per-layer prior weights and ADMM penalties.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LayerParams {
    pub mu_u: f64,
    pub mu_d2: f64,
    pub mu_d1: f64,
    pub rho: f64,
    pub rho_u: f64,
    pub rho_d: f64,
}

impl LayerParams {
    /// μ's at 3 and every ρ at `sqrt(N / (T+S+1))`.
    pub fn initial(stations: usize, instants: usize) -> Self {
        let rho = (stations as f64 / instants as f64).sqrt();
        LayerParams {
            mu_u: 3.0,
            mu_d2: 3.0,
            mu_d1: 3.0,
            rho,
            rho_u: rho,
            rho_d: rho,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("mu_u", self.mu_u), ("mu_d2", self.mu_d2), ("mu_d1", self.mu_d1)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::invalid(format!("{name} must be >= 0, got {v}")));
            }
        }
        for (name, v) in [("rho", self.rho), ("rho_u", self.rho_u), ("rho_d", self.rho_d)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(format!("{name} must be > 0, got {v}")));
            }
        }
        Ok(())
    }

    pub fn priors(&self) -> PriorWeights {
        PriorWeights {
            mu_u: self.mu_u,
            mu_d2: self.mu_d2,
            mu_d1: self.mu_d1,
        }
    }
}

/// Which formulation the block solves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverMode {
    /// GLR + DGLR + DGTV with both ℓ2 terms split.
    #[default]
    Full,
    /// DGTV removed; no `φ` or `γ`.
    NoDgtv,
    /// DGLR removed; no `z_d` or `γ_d`.
    NoDglr,
    /// Temporal DAG replaced by its undirected copy with a normalized-Laplacian GLR
    /// weighted by `μ_{d,2}`; `z_d` plays the role of `z_n`.
    UndirectedTemporal,
    /// ℓ2 terms left unsplit: one linear system in `x` per layer.
    DirectUnsplit,
}

impl SolverMode {
    fn uses_phi(self) -> bool {
        matches!(self, SolverMode::Full | SolverMode::NoDglr | SolverMode::DirectUnsplit)
    }

    fn uses_zu(self) -> bool {
        self != SolverMode::DirectUnsplit
    }

    fn uses_zd(self) -> bool {
        matches!(
            self,
            SolverMode::Full | SolverMode::NoDgtv | SolverMode::UndirectedTemporal
        )
    }

    fn zd_operator(self) -> Operator {
        if self == SolverMode::UndirectedTemporal {
            Operator::TemporalUndirected
        } else {
            Operator::Symmetrized
        }
    }
}

/// Solver iterate.
#[derive(Debug, Clone, PartialEq)]
pub struct AdmmState {
    pub x: Vec<f64>,
    pub z_u: Vec<f64>,
    pub z_d: Vec<f64>,
    pub phi: Vec<f64>,
    pub gamma: Vec<f64>,
    pub gamma_u: Vec<f64>,
    pub gamma_d: Vec<f64>,
}

impl AdmmState {
    /// Block entry: `φ = L_rd x0`, `z_u = z_d = x0`, multipliers zero.
    pub fn init(x0: &[f64], graph: &MixedGraph) -> Result<Self> {
        check_len("initial signal", graph.len(), x0.len())?;
        let n = x0.len();
        Ok(AdmmState {
            x: x0.to_vec(),
            z_u: x0.to_vec(),
            z_d: x0.to_vec(),
            phi: graph.l_rd().mul_vec(x0)?,
            gamma: vec![0.0; n],
            gamma_u: vec![0.0; n],
            gamma_d: vec![0.0; n],
        })
    }

    fn is_finite(&self) -> bool {
        [
            &self.x,
            &self.z_u,
            &self.z_d,
            &self.phi,
            &self.gamma,
            &self.gamma_u,
            &self.gamma_d,
        ]
        .iter()
        .all(|v| v.iter().all(|a| a.is_finite()))
    }
}

/// `a·Op + shift·I`.
struct ShiftedOperator<'a> {
    graph: &'a MixedGraph,
    op: Operator,
    coeff: f64,
    shift: f64,
    tmp: RefCell<Vec<f64>>,
}

impl LinearOperator for ShiftedOperator<'_> {
    fn dim(&self) -> usize {
        self.graph.len()
    }

    fn apply(&self, x: &[f64], out: &mut [f64]) {
        if self.coeff == 0.0 {
            for (o, v) in out.iter_mut().zip(x) {
                *o = self.shift * v;
            }
            return;
        }
        let mut tmp = self.tmp.borrow_mut();
        self.graph.apply_into(self.op, x, &mut tmp, out);
        for (o, v) in out.iter_mut().zip(x) {
            *o = self.coeff * *o + self.shift * v;
        }
    }
}

/// `H^T H + cal·(L_rd)^T L_rd + lu·L^u + shift·I`.
struct XSystem<'a> {
    graph: &'a MixedGraph,
    cal: f64,
    lu: f64,
    shift: f64,
    tmp: RefCell<(Vec<f64>, Vec<f64>)>,
}

impl LinearOperator for XSystem<'_> {
    fn dim(&self) -> usize {
        self.graph.len()
    }

    fn apply(&self, x: &[f64], out: &mut [f64]) {
        let mut guard = self.tmp.borrow_mut();
        let (tmp, acc) = &mut *guard;
        for ((o, v), &m) in out.iter_mut().zip(x).zip(self.graph.observed()) {
            *o = if m { (1.0 + self.shift) * v } else { self.shift * v };
        }
        if self.cal != 0.0 {
            self.graph.apply_into(Operator::Symmetrized, x, tmp, acc);
            for (o, a) in out.iter_mut().zip(acc.iter()) {
                *o += self.cal * a;
            }
        }
        if self.lu != 0.0 {
            self.graph.apply_into(Operator::Undirected, x, tmp, acc);
            for (o, a) in out.iter_mut().zip(acc.iter()) {
                *o += self.lu * a;
            }
        }
    }
}

fn wrap(layer: usize, step: SubStep) -> impl FnOnce(Error) -> Error {
    move |e| Error::Layer {
        layer,
        step,
        source: Box::new(e),
    }
}

fn solve_x(
    state: &AdmmState,
    graph: &MixedGraph,
    p: &LayerParams,
    hty: &[f64],
    sched: &CgSchedule,
    mode: SolverMode,
) -> Result<Vec<f64>> {
    let n = graph.len();
    let mut rhs = hty.to_vec();
    if mode.uses_phi() {
        let v: Vec<f64> = state
            .gamma
            .iter()
            .zip(&state.phi)
            .map(|(g, f)| 0.5 * g + 0.5 * p.rho * f)
            .collect();
        let lt = graph.digraph().l_rd_t.mul_vec(&v)?;
        rhs.iter_mut().zip(&lt).for_each(|(r, a)| *r += a);
    }
    let mut shift = 0.0;
    if mode.uses_zu() {
        shift += 0.5 * p.rho_u;
        for i in 0..n {
            rhs[i] += -0.5 * state.gamma_u[i] + 0.5 * p.rho_u * state.z_u[i];
        }
    }
    if mode.uses_zd() {
        shift += 0.5 * p.rho_d;
        for i in 0..n {
            rhs[i] += -0.5 * state.gamma_d[i] + 0.5 * p.rho_d * state.z_d[i];
        }
    }
    let (cal, lu) = match mode {
        SolverMode::Full | SolverMode::NoDglr => (0.5 * p.rho, 0.0),
        SolverMode::DirectUnsplit => (p.mu_d2 + 0.5 * p.rho, p.mu_u),
        SolverMode::NoDgtv | SolverMode::UndirectedTemporal => (0.0, 0.0),
    };
    let op = XSystem {
        graph,
        cal,
        lu,
        shift,
        tmp: RefCell::new((vec![0.0; n], vec![0.0; n])),
    };
    let mut x = state.x.clone();
    cg_in_place(&op, &rhs, &mut x, sched)?;
    Ok(x)
}

/// x-update of the full solver: CG on
/// `(H^T H + (ρ/2) calL_rd + ((ρ_u+ρ_d)/2) I) x = (L_rd)^T(γ/2 + (ρ/2)φ) - γ_u/2 + (ρ_u/2) z_u - γ_d/2 + (ρ_d/2) z_d + H^T y`,
/// warm-started at the current `x`.
pub fn update_x(
    state: &AdmmState,
    graph: &MixedGraph,
    p: &LayerParams,
    y: &[f64],
    sched: &CgSchedule,
) -> Result<Vec<f64>> {
    let hty = graph.upsample(y)?;
    solve_x(state, graph, p, &hty, sched, SolverMode::Full)
}

fn solve_split(
    graph: &MixedGraph,
    op: Operator,
    mu: f64,
    rho: f64,
    gamma: &[f64],
    x: &[f64],
    warm: &[f64],
    sched: &CgSchedule,
) -> Result<Vec<f64>> {
    let n = graph.len();
    let rhs: Vec<f64> = gamma.iter().zip(x).map(|(g, v)| 0.5 * g + 0.5 * rho * v).collect();
    let sys = ShiftedOperator {
        graph,
        op,
        coeff: mu,
        shift: 0.5 * rho,
        tmp: RefCell::new(vec![0.0; n]),
    };
    let mut z = warm.to_vec();
    cg_in_place(&sys, &rhs, &mut z, sched)?;
    Ok(z)
}

/// Solves `(μ_u L^u + (ρ_u/2) I) z_u = γ_u/2 + (ρ_u/2) x`, warm-started at `z_u`.
pub fn update_zu(state: &AdmmState, graph: &MixedGraph, p: &LayerParams, sched: &CgSchedule) -> Result<Vec<f64>> {
    solve_split(
        graph,
        Operator::Undirected,
        p.mu_u,
        p.rho_u,
        &state.gamma_u,
        &state.x,
        &state.z_u,
        sched,
    )
}

/// Solves `(μ_{d,2} calL_rd + (ρ_d/2) I) z_d = γ_d/2 + (ρ_d/2) x`, warm-started at `z_d`.
pub fn update_zd(state: &AdmmState, graph: &MixedGraph, p: &LayerParams, sched: &CgSchedule) -> Result<Vec<f64>> {
    solve_split(
        graph,
        Operator::Symmetrized,
        p.mu_d2,
        p.rho_d,
        &state.gamma_d,
        &state.x,
        &state.z_d,
        sched,
    )
}

/// `sign(δ) max(|δ| - t, 0)`.
pub fn soft_threshold(delta: f64, threshold: f64) -> f64 {
    delta.signum() * (delta.abs() - threshold).max(0.0)
}

/// Entrywise prox of the ℓ1 term: `δ = L_rd x - γ/ρ`, `φ = soft(δ, μ_{d,1}/ρ)`.
pub fn update_phi(x: &[f64], gamma: &[f64], graph: &MixedGraph, p: &LayerParams) -> Result<Vec<f64>> {
    check_len("multiplier γ", graph.len(), gamma.len())?;
    let lx = graph.l_rd().mul_vec(x)?;
    let t = p.mu_d1 / p.rho;
    Ok(lx
        .iter()
        .zip(gamma)
        .map(|(l, g)| soft_threshold(l - g / p.rho, t))
        .collect())
}

/// Multiplier ascent: `γ += ρ(φ - L_rd x)`, `γ_u += ρ_u(x - z_u)`, `γ_d += ρ_d(x - z_d)`.
pub fn update_multipliers(
    state: &AdmmState,
    x_new: &[f64],
    phi_new: &[f64],
    z_u_new: &[f64],
    z_d_new: &[f64],
    graph: &MixedGraph,
    p: &LayerParams,
) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    let lx = graph.l_rd().mul_vec(x_new)?;
    let gamma = state
        .gamma
        .iter()
        .zip(phi_new.iter().zip(&lx))
        .map(|(g, (f, l))| g + p.rho * (f - l))
        .collect();
    let gamma_u = state
        .gamma_u
        .iter()
        .zip(x_new.iter().zip(z_u_new))
        .map(|(g, (x, z))| g + p.rho_u * (x - z))
        .collect();
    let gamma_d = state
        .gamma_d
        .iter()
        .zip(x_new.iter().zip(z_d_new))
        .map(|(g, (x, z))| g + p.rho_d * (x - z))
        .collect();
    Ok((gamma, gamma_u, gamma_d))
}

/// Objective minimized by a given mode.
pub fn mode_objective(x: &[f64], y: &[f64], graph: &MixedGraph, w: &PriorWeights, mode: SolverMode) -> Result<f64> {
    let mut w = *w;
    match mode {
        SolverMode::Full | SolverMode::DirectUnsplit => priors::objective(x, y, graph, &w),
        SolverMode::NoDgtv => {
            w.mu_d1 = 0.0;
            priors::objective(x, y, graph, &w)
        }
        SolverMode::NoDglr => {
            w.mu_d2 = 0.0;
            priors::objective(x, y, graph, &w)
        }
        SolverMode::UndirectedTemporal => {
            let base = priors::fidelity(x, y, graph)? + w.mu_u * priors::glr(x, graph.l_u())?;
            Ok(base + w.mu_d2 * priors::glr(x, graph.l_n())?)
        }
    }
}

/// Per-layer diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LayerTrace {
    pub layer: usize,
    pub objective: f64,
    pub res_phi: f64,
    pub res_zu: f64,
    pub res_zd: f64,
}

/// Result of one ADMM block.
#[derive(Debug, Clone)]
pub struct AdmmOutput {
    pub state: AdmmState,
    pub trace: Vec<LayerTrace>,
}

fn norm_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// One layer in place.
fn run_layer(
    state: &mut AdmmState,
    graph: &MixedGraph,
    p: &LayerParams,
    hty: &[f64],
    sched: &CgSchedule,
    mode: SolverMode,
    layer: usize,
) -> Result<()> {
    let check = |s: &[f64], step: SubStep| -> Result<()> {
        if s.iter().all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(Error::NonFinite { layer, step })
        }
    };

    state.x = solve_x(state, graph, p, hty, sched, mode).map_err(wrap(layer, SubStep::X))?;
    check(&state.x, SubStep::X)?;

    if mode.uses_zu() {
        state.z_u = update_zu(state, graph, p, sched).map_err(wrap(layer, SubStep::Zu))?;
        check(&state.z_u, SubStep::Zu)?;
    }
    if mode.uses_zd() {
        state.z_d = solve_split(
            graph,
            mode.zd_operator(),
            p.mu_d2,
            p.rho_d,
            &state.gamma_d,
            &state.x,
            &state.z_d,
            sched,
        )
        .map_err(wrap(layer, SubStep::Zd))?;
        check(&state.z_d, SubStep::Zd)?;
    }
    if mode.uses_phi() {
        state.phi = update_phi(&state.x, &state.gamma, graph, p)?;
        check(&state.phi, SubStep::Phi)?;
    }

    let lx = graph.l_rd().mul_vec(&state.x)?;
    if mode.uses_phi() {
        for i in 0..state.x.len() {
            state.gamma[i] += p.rho * (state.phi[i] - lx[i]);
        }
    }
    if mode.uses_zu() {
        for i in 0..state.x.len() {
            state.gamma_u[i] += p.rho_u * (state.x[i] - state.z_u[i]);
        }
    }
    if mode.uses_zd() {
        for i in 0..state.x.len() {
            state.gamma_d[i] += p.rho_d * (state.x[i] - state.z_d[i]);
        }
    }
    if !state.is_finite() {
        return Err(Error::NonFinite {
            layer,
            step: SubStep::Multipliers,
        });
    }
    Ok(())
}

/// Runs one unrolled ADMM block of `params.len()` layers from `x0`.
pub fn run_admm_block(
    x0: &[f64],
    y: &[f64],
    graph: &MixedGraph,
    params: &[LayerParams],
    sched: &CgSchedule,
    mode: SolverMode,
    trace: bool,
) -> Result<AdmmOutput> {
    if params.is_empty() {
        return Err(Error::invalid("an ADMM block needs at least one layer"));
    }
    for p in params {
        p.validate()?;
    }
    let hty = graph.upsample(y)?;
    let mut state = AdmmState::init(x0, graph)?;
    let mut out = Vec::new();
    for (layer, p) in params.iter().enumerate() {
        run_layer(&mut state, graph, p, &hty, sched, mode, layer)?;
        if trace {
            let lx = graph.l_rd().mul_vec(&state.x)?;
            out.push(LayerTrace {
                layer,
                objective: mode_objective(&state.x, y, graph, &p.priors(), mode)?,
                res_phi: if mode.uses_phi() {
                    norm_diff(&state.phi, &lx)
                } else {
                    0.0
                },
                res_zu: if mode.uses_zu() {
                    norm_diff(&state.x, &state.z_u)
                } else {
                    0.0
                },
                res_zd: if mode.uses_zd() {
                    norm_diff(&state.x, &state.z_d)
                } else {
                    0.0
                },
            });
        }
    }
    Ok(AdmmOutput { state, trace: out })
}

/// Runs one ADMM block and returns the final signal.
pub fn admm_block(
    x0: &[f64],
    y: &[f64],
    graph: &MixedGraph,
    params: &[LayerParams],
    sched: &CgSchedule,
    mode: SolverMode,
) -> Result<Vec<f64>> {
    Ok(run_admm_block(x0, y, graph, params, sched, mode, false)?.state.x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{Layout, RandomWalkDigraph, SparseMatrix};

    fn chain2(observed: Vec<bool>) -> MixedGraph {
        MixedGraph::from_parts(
            Layout::new(1, 2),
            SparseMatrix::zeros(2, 2),
            RandomWalkDigraph::from_edges(2, &[(0, 1, 1.0)]).unwrap(),
            observed,
        )
        .unwrap()
    }

    fn params(mu: f64, rho: f64) -> LayerParams {
        LayerParams {
            mu_u: mu,
            mu_d2: mu,
            mu_d1: mu,
            rho,
            rho_u: rho,
            rho_d: rho,
        }
    }

    #[test]
    fn initial_params() {
        let p = LayerParams::initial(20, 5);
        assert_eq!(p.mu_u, 3.0);
        assert_eq!(p.rho, 2.0);
        assert!(params(0.0, 0.0).validate().is_err());
        assert!(params(-1.0, 1.0).validate().is_err());
    }

    #[test]
    fn split_updates_identity_cases() {
        let g = chain2(vec![true, false]);
        let mut st = AdmmState::init(&[1.0, 3.0], &g).unwrap();
        st.gamma_u = vec![2.0, -2.0];
        st.gamma_d = vec![1.0, 1.0];
        let p = params(0.0, 2.0);
        let sched = CgSchedule::exact(50, 1e-14);
        let zu = update_zu(&st, &g, &p, &sched).unwrap();
        assert!((zu[0] - 2.0).abs() < 1e-12 && (zu[1] - 2.0).abs() < 1e-12);
        let zd = update_zd(&st, &g, &p, &sched).unwrap();
        assert!((zd[0] - 1.5).abs() < 1e-12 && (zd[1] - 3.5).abs() < 1e-12);

        // Constants pass the low-pass filters untouched.
        let st = AdmmState::init(&[4.0, 4.0], &g).unwrap();
        let p = params(5.0, 1.0);
        let zd = update_zd(&st, &g, &p, &sched).unwrap();
        assert!(zd.iter().all(|v| (v - 4.0).abs() < 1e-12));
    }

    #[test]
    fn x_update_two_by_two() {
        // 1 station, 2 instants, instant 0 observed.
        let g = chain2(vec![true, false]);
        let mut st = AdmmState::init(&[0.0, 0.0], &g).unwrap();
        st.phi = vec![0.0, 0.5];
        st.gamma = vec![0.0, 1.0];
        st.z_u = vec![1.0, 2.0];
        st.z_d = vec![-1.0, 0.5];
        st.gamma_u = vec![0.2, 0.0];
        st.gamma_d = vec![0.0, -0.4];
        let p = LayerParams {
            mu_u: 1.0,
            mu_d2: 1.0,
            mu_d1: 1.0,
            rho: 2.0,
            rho_u: 1.0,
            rho_d: 3.0,
        };
        let x = update_x(&st, &g, &p, &[1.5], &CgSchedule::exact(20, 1e-14)).unwrap();
        // L_rd = [[0,0],[-1,1]] so calL = [[1,-1],[-1,1]].
        // A = diag(1,0) + 1*calL + 2*I = [[4,-1],[-1,3]].
        // v = γ/2 + φ = [0, 1.0]; L^T v = [-1, 1].
        // rhs = [-1,1] + [-0.1, 0] + [0.5, 1.0] + [0, 0.2] + [-1.5, 0.75] + [1.5, 0] = [-0.6, 2.95]
        let det = 4.0 * 3.0 - 1.0;
        let want = [(3.0 * -0.6 + 2.95) / det, (-0.6 + 4.0 * 2.95) / det];
        assert!(
            (x[0] - want[0]).abs() < 1e-12 && (x[1] - want[1]).abs() < 1e-12,
            "{x:?}"
        );
    }

    #[test]
    fn soft_threshold_cases() {
        assert_eq!(soft_threshold(0.0, 0.5), 0.0);
        assert_eq!(soft_threshold(1.5, 0.5), 1.0);
        assert_eq!(soft_threshold(-1.5, 0.5), -1.0);
        assert_eq!(soft_threshold(0.3, 0.5), 0.0);
        assert_eq!(soft_threshold(-0.7, 0.0), -0.7);
    }

    #[test]
    fn phi_without_shrink_is_shift() {
        let g = chain2(vec![true, false]);
        let p = LayerParams {
            mu_d1: 0.0,
            ..params(1.0, 2.0)
        };
        let phi = update_phi(&[1.0, 4.0], &[2.0, -2.0], &g, &p).unwrap();
        assert_eq!(phi, vec![-1.0, 4.0]);
    }

    #[test]
    fn multipliers() {
        let g = chain2(vec![true, false]);
        let st = AdmmState::init(&[1.0, 2.0], &g).unwrap();
        let x = st.x.clone();
        let lx = g.l_rd().mul_vec(&x).unwrap();
        let (a, b, c) = update_multipliers(&st, &x, &lx, &x, &x, &g, &params(1.0, 1.0)).unwrap();
        assert_eq!((a, b, c), (st.gamma.clone(), st.gamma_u.clone(), st.gamma_d.clone()));

        let phi: Vec<f64> = lx.iter().map(|v| v + 1.0).collect();
        let z: Vec<f64> = x.iter().map(|v| v - 1.0).collect();
        let (a, b, c) = update_multipliers(&st, &x, &phi, &z, &z, &g, &params(1.0, 1.0)).unwrap();
        assert_eq!(a, vec![1.0, 1.0]);
        assert_eq!(b, vec![1.0, 1.0]);
        assert_eq!(c, vec![1.0, 1.0]);
    }

    #[test]
    fn fidelity_only_restores_observations() {
        let g = chain2(vec![true, false]);
        let p = LayerParams {
            mu_u: 0.0,
            mu_d2: 0.0,
            mu_d1: 0.0,
            ..params(0.0, 1.0)
        };
        let x = admm_block(
            &[0.0, 0.0],
            &[2.5],
            &g,
            &[p],
            &CgSchedule::exact(50, 1e-14),
            SolverMode::Full,
        )
        .unwrap();
        // One layer from z = 0 gives x_0 = 2.5 / (1 + ρ) ... the fixed point needs more layers.
        assert!(x[0] > 0.0);
        let many = vec![p; 200];
        let x = admm_block(
            &[0.0, 0.0],
            &[2.5],
            &g,
            &many,
            &CgSchedule::exact(50, 1e-14),
            SolverMode::Full,
        )
        .unwrap();
        assert!((x[0] - 2.5).abs() < 1e-6, "{x:?}");
    }

    #[test]
    fn empty_params_rejected() {
        let g = chain2(vec![true, false]);
        assert!(admm_block(&[0.0, 0.0], &[1.0], &g, &[], &CgSchedule::default(), SolverMode::Full).is_err());
    }
}
