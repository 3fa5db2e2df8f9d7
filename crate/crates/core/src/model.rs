//! Two-qubit Hamiltonian and its exact decomposition into two spin-boson branches.
//!
//! With the dephasing coupling `sigma1^z B_L + sigma2^z B_R`, the composite
//! operators
//!
//! ```text
//! Q_z = (s1z + s2z)/2 = |00><00| - |11><11|     Q_x = |00><11| + |11><00|
//! P_z = (s1z - s2z)/2 = |01><01| - |10><10|     P_x = |01><10| + |10><01|
//! ```
//!
//! act as Pauli matrices inside the two invariant subspaces, and
//!
//! ```text
//! H_Q = (e1+e2) Q_z + J*gamma Q_x + Q_z (B_L + B_R) + J*delta
//! H_P = (e1-e2) P_z + J       P_x + P_z (B_L - B_R) - J*delta
//! ```
//!
//! Basis convention inside each branch: index 0 carries the `+1` eigenvalue
//! of the branch `z` operator (`|00>` for Q, `|01>` for P), index 1 carries `-1`.

use nalgebra::{Matrix2, Matrix4};
use num_complex::Complex64;

use crate::error::{config, domain, Result};
use crate::TOL_POS;

const HERMITIAN_TOL: f64 = 1e-10;
const TRACE_TOL: f64 = 1e-10;

/// Subsystem energies of the interacting qubit pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitPairParams {
    /// Bias of qubit 1.
    pub eps1: f64,
    /// Bias of qubit 2.
    pub eps2: f64,
    /// Exchange strength.
    pub j: f64,
    /// XY anisotropy.
    pub gamma: f64,
    /// ZZ anisotropy.
    pub delta: f64,
}

impl QubitPairParams {
    pub fn validate(&self) -> Result<()> {
        let named = [
            ("eps1", self.eps1),
            ("eps2", self.eps2),
            ("J", self.j),
            ("gamma", self.gamma),
            ("delta", self.delta),
        ];
        for (name, v) in named {
            if !v.is_finite() {
                return domain(format!("{name} must be finite, got {v}"));
            }
        }
        Ok(())
    }
}

impl Default for QubitPairParams {
    fn default() -> Self {
        Self {
            eps1: 0.2,
            eps2: 0.2,
            j: 1.0,
            gamma: 0.5,
            delta: 0.1,
        }
    }
}

/// How the two qubits see their environment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BathTopology {
    /// Independent baths `L` (qubit 1) and `R` (qubit 2).
    Separate,
    /// One bath coupled identically to both qubits.
    Common,
    /// Only qubit 1 is coupled; qubit 2 feels the bath through the exchange term.
    SingleLeft,
}

impl std::str::FromStr for BathTopology {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "separate" => Ok(Self::Separate),
            "common" => Ok(Self::Common),
            "single_left" => Ok(Self::SingleLeft),
            other => config(format!(
                "unknown topology '{other}' (expected separate, common or single_left)"
            )),
        }
    }
}

impl std::fmt::Display for BathTopology {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Separate => "separate",
            Self::Common => "common",
            Self::SingleLeft => "single_left",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BranchId {
    Q,
    P,
}

/// Effective two-level problem living in one invariant subspace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchSpec {
    /// Coefficient of the branch `sigma_z` analog.
    pub bias: f64,
    /// Coefficient of the branch `sigma_x` analog.
    pub tunneling: f64,
    /// Scalar `+-J*delta` shift. It commutes with everything inside the
    /// branch and drops out of `U rho U^dagger`, so propagation ignores it.
    pub offset: f64,
    /// Kondo parameter of the combined bath seen by this branch.
    pub k_eff: f64,
    pub branch: BranchId,
}

/// Maps the qubit pair onto its Q and P branch problems.
///
/// The bath operator seen by a branch is `B_L + B_R` (Q) or `B_L - B_R`
/// (P). For independent Ohmic baths the spectral densities add, so both
/// branches see `K_L + K_R`. For a common bath `B_L = B_R = B_c`, the Q
/// branch couples through `2 B_c`; the spectral density is quadratic in the
/// coupling amplitude, giving `4 K`, while the P branch decouples entirely.
pub fn build_branches(
    params: &QubitPairParams,
    topology: BathTopology,
    k_left: f64,
    k_right: f64,
) -> Result<(BranchSpec, BranchSpec)> {
    params.validate()?;
    if !(k_left >= 0.0 && k_right >= 0.0) || !k_left.is_finite() || !k_right.is_finite() {
        return domain(format!(
            "Kondo parameters must be finite and non-negative, got K_L={k_left}, K_R={k_right}"
        ));
    }
    let (k_q, k_p) = match topology {
        BathTopology::Separate => (k_left + k_right, k_left + k_right),
        BathTopology::SingleLeft => {
            if k_right != 0.0 {
                return config(format!("single_left topology requires K_R = 0, got {k_right}"));
            }
            (k_left, k_left)
        }
        BathTopology::Common => {
            if k_right != 0.0 {
                return config(format!(
                    "common topology takes its coupling from K_L; K_R must be 0, got {k_right}"
                ));
            }
            (4.0 * k_left, 0.0)
        }
    };
    let j = params.j;
    let q = BranchSpec {
        bias: params.eps1 + params.eps2,
        tunneling: j * params.gamma,
        offset: j * params.delta,
        k_eff: k_q,
        branch: BranchId::Q,
    };
    let p = BranchSpec {
        bias: params.eps1 - params.eps2,
        tunneling: j,
        offset: -j * params.delta,
        k_eff: k_p,
        branch: BranchId::P,
    };
    Ok((q, p))
}

/// Density matrix of one branch in its two-dimensional subspace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchState(Matrix2<Complex64>);

impl BranchState {
    /// Validates hermiticity, unit trace and positivity (within `TOL_POS`).
    pub fn new(m: Matrix2<Complex64>) -> Result<Self> {
        let s = Self(m);
        s.check()?;
        Ok(s)
    }

    /// Wraps a matrix without validation. Used by the propagator, which
    /// checks trace drift itself.
    pub(crate) fn from_raw(m: Matrix2<Complex64>) -> Self {
        Self(m)
    }

    pub fn from_rows(rows: [[Complex64; 2]; 2]) -> Result<Self> {
        Self::new(Matrix2::new(rows[0][0], rows[0][1], rows[1][0], rows[1][1]))
    }

    /// Pure state `|psi><psi|` for a normalized amplitude pair.
    pub fn pure(psi: [Complex64; 2]) -> Result<Self> {
        let norm = psi[0].norm_sqr() + psi[1].norm_sqr();
        if (norm - 1.0).abs() > TRACE_TOL {
            return domain(format!("state vector not normalized (norm^2 = {norm})"));
        }
        let m = Matrix2::from_fn(|i, j| psi[i] * psi[j].conj());
        Self::new(m)
    }

    /// Equal superposition `(|0> + |1>)/sqrt(2)`: all entries 1/2.
    pub fn bell() -> Self {
        let h = Complex64::new(0.5, 0.0);
        Self(Matrix2::new(h, h, h, h))
    }

    pub fn matrix(&self) -> &Matrix2<Complex64> {
        &self.0
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.0[(i, j)]
    }

    pub fn trace(&self) -> Complex64 {
        self.0[(0, 0)] + self.0[(1, 1)]
    }

    pub fn purity(&self) -> f64 {
        (self.0 * self.0).trace().re
    }

    pub fn hermiticity_error(&self) -> f64 {
        (self.0 - self.0.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Smallest eigenvalue of the Hermitian part.
    pub fn min_eigenvalue(&self) -> f64 {
        let a = self.0[(0, 0)].re;
        let d = self.0[(1, 1)].re;
        let b = 0.5 * (self.0[(0, 1)] + self.0[(1, 0)].conj());
        let mean = 0.5 * (a + d);
        let radius = (0.25 * (a - d) * (a - d) + b.norm_sqr()).sqrt();
        mean - radius
    }

    pub(crate) fn check(&self) -> Result<()> {
        if self.0.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return domain("branch state has non-finite entries");
        }
        let herm = self.hermiticity_error();
        if herm > HERMITIAN_TOL {
            return domain(format!("branch state not Hermitian (deviation {herm:e})"));
        }
        let tr = self.trace();
        if (tr - 1.0).norm() > TRACE_TOL {
            return domain(format!("branch state trace {tr} differs from 1"));
        }
        let min_eig = self.min_eigenvalue();
        if min_eig < -TOL_POS {
            return domain(format!("branch state not positive (eigenvalue {min_eig:e})"));
        }
        Ok(())
    }
}

/// Initial condition `a rho_Q(0) (+) (1-a) rho_P(0)` in direct-sum form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitialState {
    /// Weight of the Q (zero/double excitation) subspace.
    pub a: f64,
    pub rho_q: BranchState,
    pub rho_p: BranchState,
}

impl InitialState {
    pub fn new(a: f64, rho_q: BranchState, rho_p: BranchState) -> Result<Self> {
        check_weight(a)?;
        rho_q.check()?;
        rho_p.check()?;
        Ok(Self { a, rho_q, rho_p })
    }

    /// Rejects a full 4x4 initial density matrix unless it has direct-sum
    /// structure; the branch mapping cannot evolve P-Q cross coherences.
    pub fn from_density_matrix(rho: &Matrix4<Complex64>) -> Result<Self> {
        const Q: [usize; 2] = [0, 3];
        const P: [usize; 2] = [1, 2];
        for &i in &Q {
            for &j in &P {
                if rho[(i, j)].norm() > HERMITIAN_TOL || rho[(j, i)].norm() > HERMITIAN_TOL {
                    return domain(format!(
                        "initial state has P-Q cross coherence at ({i},{j}); only direct-sum states are supported"
                    ));
                }
            }
        }
        let a = rho[(0, 0)].re + rho[(3, 3)].re;
        check_weight(a)?;
        let block = |idx: [usize; 2], w: f64| -> Result<BranchState> {
            if w <= TRACE_TOL {
                return Ok(BranchState::bell());
            }
            BranchState::new(Matrix2::from_fn(|r, c| rho[(idx[r], idx[c])] / w))
        };
        Self::new(a, block(Q, a)?, block(P, 1.0 - a)?)
    }
}

fn check_weight(a: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&a) {
        return domain(format!("subspace weight a must lie in [0, 1], got {a}"));
    }
    Ok(())
}

/// Bell states in both branches with Q weight `a`.
pub fn bell_initial(a: f64) -> Result<InitialState> {
    check_weight(a)?;
    Ok(InitialState {
        a,
        rho_q: BranchState::bell(),
        rho_p: BranchState::bell(),
    })
}

/// Reduced two-qubit density matrix in X form, basis order `|00>, |01>, |10>, |11>`.
///
/// Only the six independent X-pattern entries are stored; everything else is
/// zero by construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct XState {
    pub p00: f64,
    pub p01: f64,
    pub p10: f64,
    pub p11: f64,
    /// `(rho)_{01,10}`.
    pub c_p: Complex64,
    /// `(rho)_{00,11}`.
    pub c_q: Complex64,
}

impl XState {
    pub fn trace(&self) -> f64 {
        self.p00 + self.p01 + self.p10 + self.p11
    }

    pub fn to_matrix(&self) -> Matrix4<Complex64> {
        let z = Complex64::new(0.0, 0.0);
        let r = |x: f64| Complex64::new(x, 0.0);
        #[rustfmt::skip]
        let m = Matrix4::new(
            r(self.p00), z,              z,              self.c_q,
            z,           r(self.p01),    self.c_p,       z,
            z,           self.c_p.conj(), r(self.p10),   z,
            self.c_q.conj(), z,          z,              r(self.p11),
        );
        m
    }

    /// Checks unit trace, population signs and the 2x2 positivity bounds
    /// on both coherences.
    pub fn validate(&self, trace_tol: f64) -> Result<()> {
        if (self.trace() - 1.0).abs() > trace_tol {
            return domain(format!("X-state trace {} differs from 1", self.trace()));
        }
        for p in [self.p00, self.p01, self.p10, self.p11] {
            if p < -TOL_POS {
                return domain(format!("negative population {p:e}"));
            }
        }
        if self.c_p.norm_sqr() > self.p01 * self.p10 + TOL_POS {
            return domain("P coherence violates |c_P|^2 <= p01*p10");
        }
        if self.c_q.norm_sqr() > self.p00 * self.p11 + TOL_POS {
            return domain("Q coherence violates |c_Q|^2 <= p00*p11");
        }
        Ok(())
    }
}

/// Places weighted branch states into the X-shaped two-qubit matrix.
pub fn assemble_xstate(a: f64, rho_q: &BranchState, rho_p: &BranchState) -> XState {
    let b = 1.0 - a;
    XState {
        p00: a * rho_q.get(0, 0).re,
        p11: a * rho_q.get(1, 1).re,
        c_q: a * rho_q.get(0, 1),
        p01: b * rho_p.get(0, 0).re,
        p10: b * rho_p.get(1, 1).re,
        c_p: b * rho_p.get(0, 1),
    }
}
