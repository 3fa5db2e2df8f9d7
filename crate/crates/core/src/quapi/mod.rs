//! Iterative quasi-adiabatic path-integral propagation of the two branches.

mod propagator;
mod tensor;

pub use propagator::{
    influence_factor, pair_index, pair_spins, step_unitary, system_propagator, InfluenceTable,
    PropagatorTable, PAIRS,
};

use log::debug;
use nalgebra::Matrix2;
use num_complex::Complex64;

use crate::bath::{eta_table, BathSpec};
use crate::entanglement::{concurrence_x, ConcurrenceBreakdown};
use crate::error::{config, domain, Error, Result};
use crate::model::{assemble_xstate, build_branches, BathTopology, BranchSpec, BranchState, InitialState, QubitPairParams, XState};
use crate::TOL_POS;
use tensor::{DenseTensor, PathTensor, SparseTensor};

/// Trace drift tolerated before a run is aborted.
pub const TRACE_DRIFT_TOL: f64 = 1e-6;
/// Default cap on augmented-tensor entries.
pub const DEFAULT_MAX_ENTRIES: usize = 1 << 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Storage {
    /// Sparse when the bare propagator is diagonal, dense otherwise.
    #[default]
    Auto,
    Dense,
    Sparse,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuapiConfig {
    pub dt: f64,
    /// Memory length in time steps.
    pub dk_max: usize,
    pub storage: Storage,
    pub max_entries: usize,
}

impl QuapiConfig {
    pub fn new(dt: f64, dk_max: usize) -> Self {
        Self { dt, dk_max, storage: Storage::Auto, max_entries: DEFAULT_MAX_ENTRIES }
    }

    pub fn with_storage(self, storage: Storage) -> Self {
        Self { storage, ..self }
    }

    fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return domain(format!("time step must be > 0, got {}", self.dt));
        }
        if self.dk_max == 0 {
            return domain("memory length dk_max must be >= 1");
        }
        Ok(())
    }
}

impl Default for QuapiConfig {
    fn default() -> Self {
        Self::new(0.25, 9)
    }
}

fn to_pairs(rho: &BranchState) -> [Complex64; PAIRS] {
    [rho.get(0, 0), rho.get(0, 1), rho.get(1, 0), rho.get(1, 1)]
}

fn from_pairs(v: &[Complex64; PAIRS]) -> BranchState {
    BranchState::from_raw(Matrix2::new(v[0], v[1], v[2], v[3]))
}

/// Final half step of the symmetric splitting, applied to the marginal of
/// the newest path point.
fn closing_half_step(v: &[Complex64; PAIRS], half: &PropagatorTable) -> [Complex64; PAIRS] {
    let u = half.unitary;
    let m = u * Matrix2::new(v[0], v[1], v[2], v[3]) * u.adjoint();
    [m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]]
}

fn checked_state(v: &[Complex64; PAIRS], step: usize) -> Result<BranchState> {
    let state = from_pairs(v);
    let drift = (state.trace() - 1.0).norm();
    if !drift.is_finite() || drift > TRACE_DRIFT_TOL {
        return Err(Error::Numerical(format!(
            "trace drifted by {drift:e} at step {step}"
        )));
    }
    let min_eig = state.min_eigenvalue();
    if min_eig < -TOL_POS {
        return Err(Error::Numerical(format!(
            "branch state lost positivity at step {step} (eigenvalue {min_eig:e})"
        )));
    }
    if min_eig < 0.0 {
        debug!("step {step}: eigenvalue {min_eig:e} within positivity tolerance");
    }
    Ok(state)
}

/// Evolves one branch with the default storage and entry cap.
pub fn evolve_branch(
    branch: &BranchSpec,
    bath: &BathSpec,
    rho0: &BranchState,
    dt: f64,
    dk_max: usize,
    n_steps: usize,
) -> Result<Vec<BranchState>> {
    evolve_branch_with(branch, bath, rho0, &QuapiConfig::new(dt, dk_max), n_steps)
}

/// Reduced branch dynamics at `t_k = k dt` for `k = 0..=n_steps`.
///
/// Each step is split symmetrically: half a bare step, the bath window with
/// the coupling operator frozen, half a bare step. Adjacent halves merge, so
/// only the first and the last half step appear explicitly.
///
/// `bath.kondo` must equal `branch.k_eff`. Without coupling the branch is
/// propagated by plain unitary conjugation.
pub fn evolve_branch_with(
    branch: &BranchSpec,
    bath: &BathSpec,
    rho0: &BranchState,
    cfg: &QuapiConfig,
    n_steps: usize,
) -> Result<Vec<BranchState>> {
    cfg.validate()?;
    bath.validate()?;
    rho0.check()?;
    if n_steps == 0 {
        return domain("n_steps must be >= 1");
    }
    if (bath.kondo - branch.k_eff).abs() > 1e-12 * branch.k_eff.max(1.0) {
        return config(format!(
            "bath Kondo parameter {} does not match branch coupling {}",
            bath.kondo, branch.k_eff
        ));
    }
    let prop = system_propagator(branch, cfg.dt);
    let mut out = Vec::with_capacity(n_steps + 1);
    out.push(*rho0);

    if branch.k_eff == 0.0 {
        let u = prop.unitary;
        let mut rho = *rho0.matrix();
        for _ in 0..n_steps {
            rho = u * rho * u.adjoint();
            out.push(BranchState::from_raw(rho));
        }
        return Ok(out);
    }

    let eta = eta_table(bath, cfg.dt, cfg.dk_max)?;
    let infl = InfluenceTable::new(&eta);
    let half = system_propagator(branch, 0.5 * cfg.dt);
    let rho0 = to_pairs(rho0);
    let sparse = match cfg.storage {
        Storage::Sparse => true,
        Storage::Dense => false,
        Storage::Auto => prop.is_diagonal(),
    };
    let mut tensor: Box<dyn PathTensor> = if sparse {
        Box::new(SparseTensor::new(&rho0, &half, &infl, cfg.max_entries))
    } else {
        Box::new(DenseTensor::new(&rho0, &half, &infl, cfg.max_entries)?)
    };
    out.push(checked_state(&closing_half_step(&tensor.readout(), &half), 1)?);
    for step in 2..=n_steps {
        tensor.step(&prop, &infl)?;
        out.push(checked_state(&closing_half_step(&tensor.readout(), &half), step)?);
    }
    debug!(
        "branch {:?}: {} steps, final tensor order {}",
        branch.branch,
        n_steps,
        tensor.order()
    );
    Ok(out)
}

/// Combined bath parameters for the branch problems. Independent baths add
/// their spectral densities, which stays Ohmic only when the temperature
/// and cutoff agree.
pub fn effective_bath(topology: BathTopology, left: &BathSpec, right: &BathSpec) -> Result<BathSpec> {
    left.validate()?;
    right.validate()?;
    match topology {
        BathTopology::Separate if left.kondo > 0.0 && right.kondo > 0.0 => {
            if left.temperature != right.temperature || left.cutoff != right.cutoff {
                return config(
                    "separate baths must share temperature and cutoff to combine into one Ohmic bath",
                );
            }
            Ok(*left)
        }
        BathTopology::Separate if right.kondo > 0.0 => Ok(*right),
        _ => Ok(*left),
    }
}

/// Branch-resolved dynamics on a uniform grid; independent of the weight `a`.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchDynamics {
    pub dt: f64,
    pub q: Vec<BranchState>,
    pub p: Vec<BranchState>,
}

impl BranchDynamics {
    pub fn len(&self) -> usize {
        self.q.len()
    }

    pub fn is_empty(&self) -> bool {
        self.q.is_empty()
    }

    pub fn trajectory(&self, a: f64) -> Trajectory {
        let states: Vec<XState> =
            self.q.iter().zip(&self.p).map(|(q, p)| assemble_xstate(a, q, p)).collect();
        let concurrence = states.iter().map(concurrence_x).collect();
        Trajectory {
            a,
            times: (0..states.len()).map(|k| k as f64 * self.dt).collect(),
            states,
            concurrence,
            q_branch: self.q.clone(),
            p_branch: self.p.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub a: f64,
    pub times: Vec<f64>,
    pub states: Vec<XState>,
    pub concurrence: Vec<ConcurrenceBreakdown>,
    pub q_branch: Vec<BranchState>,
    pub p_branch: Vec<BranchState>,
}

impl Trajectory {
    pub fn final_concurrence(&self) -> f64 {
        self.concurrence.last().map_or(0.0, |c| c.c)
    }

    pub fn concurrence_series(&self) -> Vec<f64> {
        self.concurrence.iter().map(|c| c.c).collect()
    }
}

/// Evolves both branches of the pair. Each branch starts from its own
/// state in `init` regardless of the weight, so the result can be reweighted
/// through [`BranchDynamics::trajectory`].
pub fn simulate_branches(
    params: &QubitPairParams,
    topology: BathTopology,
    bath_left: &BathSpec,
    bath_right: &BathSpec,
    init: &InitialState,
    cfg: &QuapiConfig,
    n_steps: usize,
) -> Result<BranchDynamics> {
    let (q, p) = build_branches(params, topology, bath_left.kondo, bath_right.kondo)?;
    let env = effective_bath(topology, bath_left, bath_right)?;
    let q_states = evolve_branch_with(&q, &env.with_kondo(q.k_eff), &init.rho_q, cfg, n_steps)?;
    let p_states = evolve_branch_with(&p, &env.with_kondo(p.k_eff), &init.rho_p, cfg, n_steps)?;
    Ok(BranchDynamics { dt: cfg.dt, q: q_states, p: p_states })
}

/// Full pipeline: branch mapping, two branch propagations, X-state assembly
/// and concurrence at every grid point.
pub fn simulate_pair(
    params: &QubitPairParams,
    topology: BathTopology,
    bath_left: &BathSpec,
    bath_right: &BathSpec,
    init: &InitialState,
    cfg: &QuapiConfig,
    n_steps: usize,
) -> Result<Trajectory> {
    let dynamics = simulate_branches(params, topology, bath_left, bath_right, init, cfg, n_steps)?;
    Ok(dynamics.trajectory(init.a))
}

#[cfg(test)]
mod tests;
