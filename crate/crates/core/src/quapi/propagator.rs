//! Short-time bare propagator and pairwise influence factors.
//!
//! A path point is a forward/backward spin pair `(s+, s-)`, encoded as
//! `2 * i(s+) + i(s-)` with `i(+1) = 0`, `i(-1) = 1`. The same code is the
//! row-major index of the density-matrix element `rho[i(s+)][i(s-)]`.

use nalgebra::Matrix2;
use num_complex::Complex64;

use crate::bath::EtaTable;
use crate::model::BranchSpec;

pub const PAIRS: usize = 4;

#[inline]
pub fn pair_index(s_plus: i8, s_minus: i8) -> usize {
    2 * spin_index(s_plus) + spin_index(s_minus)
}

#[inline]
fn spin_index(s: i8) -> usize {
    debug_assert!(s == 1 || s == -1);
    usize::from(s < 0)
}

/// Spin eigenvalues `(s+, s-)` of a pair code.
#[inline]
pub fn pair_spins(x: usize) -> (f64, f64) {
    let s = |i: usize| if i == 0 { 1.0 } else { -1.0 };
    (s(x >> 1), s(x & 1))
}

/// `exp(-i dt (bias sz + tunneling sx))` from the closed form
/// `cos(W dt) - i sin(W dt) (bias sz + tunneling sx) / W`.
pub fn step_unitary(bias: f64, tunneling: f64, dt: f64) -> Matrix2<Complex64> {
    let w = bias.hypot(tunneling);
    let (c, s_over_w) = if w == 0.0 {
        (1.0, dt)
    } else {
        ((w * dt).cos(), (w * dt).sin() / w)
    };
    let i = Complex64::new(0.0, 1.0);
    let cc = Complex64::new(c, 0.0);
    Matrix2::new(
        cc - i * s_over_w * bias,
        -i * s_over_w * tunneling,
        -i * s_over_w * tunneling,
        cc + i * s_over_w * bias,
    )
}

/// Forward/backward amplitudes for one step of the bare branch dynamics.
#[derive(Debug, Clone, PartialEq)]
pub struct PropagatorTable {
    pub unitary: Matrix2<Complex64>,
    /// `amp[new * 4 + old] = <new+|U|old+> <old-|U^dagger|new->`.
    pub amp: [Complex64; PAIRS * PAIRS],
}

impl PropagatorTable {
    pub fn from_unitary(unitary: Matrix2<Complex64>) -> Self {
        let mut amp = [Complex64::new(0.0, 0.0); PAIRS * PAIRS];
        for new in 0..PAIRS {
            for old in 0..PAIRS {
                let (np, nm) = (new >> 1, new & 1);
                let (op, om) = (old >> 1, old & 1);
                amp[new * PAIRS + old] = unitary[(np, op)] * unitary[(nm, om)].conj();
            }
        }
        Self { unitary, amp }
    }

    #[inline]
    pub fn get(&self, new: usize, old: usize) -> Complex64 {
        self.amp[new * PAIRS + old]
    }

    /// Amplitude in spin notation: `K(s'+, s'-; s+, s-)`.
    pub fn amplitude(&self, new: (i8, i8), old: (i8, i8)) -> Complex64 {
        self.get(pair_index(new.0, new.1), pair_index(old.0, old.1))
    }

    /// True when the propagator cannot flip the spin (no tunneling), so
    /// most entries vanish identically.
    pub fn is_diagonal(&self) -> bool {
        self.unitary[(0, 1)] == Complex64::new(0.0, 0.0)
            && self.unitary[(1, 0)] == Complex64::new(0.0, 0.0)
    }
}

/// Bare branch propagator over one time step. The scalar offset is dropped:
/// it only contributes a global phase that cancels between the two paths.
pub fn system_propagator(branch: &BranchSpec, dt: f64) -> PropagatorTable {
    PropagatorTable::from_unitary(step_unitary(branch.bias, branch.tunneling, dt))
}

/// `exp[-(s_k+ - s_k-) (eta s_k'+ - conj(eta) s_k'-)]` for the later point
/// `s_k` and the earlier point `s_k'` separated by `sep` windows.
pub fn influence_factor(eta: &EtaTable, s_k: (i8, i8), s_kp: (i8, i8), sep: usize) -> Complex64 {
    if sep > eta.dk_max() {
        return Complex64::new(1.0, 0.0);
    }
    pair_factor(eta.coefficient(sep), pair_index(s_k.0, s_k.1), pair_index(s_kp.0, s_kp.1))
}

#[inline]
fn pair_factor(eta: Complex64, later: usize, earlier: usize) -> Complex64 {
    let (kp, km) = pair_spins(later);
    let diff = kp - km;
    if diff == 0.0 {
        return Complex64::new(1.0, 0.0);
    }
    let (ep, em) = pair_spins(earlier);
    (-(diff * (eta * ep - eta.conj() * em))).exp()
}

/// All pairwise factors for separations `0..=dk_max`, laid out as
/// `factors[sep][later * 4 + earlier]`.
#[derive(Debug, Clone)]
pub struct InfluenceTable {
    pub factors: Vec<[Complex64; PAIRS * PAIRS]>,
}

impl InfluenceTable {
    pub fn new(eta: &EtaTable) -> Self {
        let factors = (0..=eta.dk_max())
            .map(|sep| {
                let c = eta.coefficient(sep);
                let mut f = [Complex64::new(1.0, 0.0); PAIRS * PAIRS];
                for later in 0..PAIRS {
                    for earlier in 0..PAIRS {
                        f[later * PAIRS + earlier] = pair_factor(c, later, earlier);
                    }
                }
                f
            })
            .collect();
        Self { factors }
    }

    pub fn dk_max(&self) -> usize {
        self.factors.len() - 1
    }

    #[inline]
    pub fn get(&self, sep: usize, later: usize, earlier: usize) -> Complex64 {
        self.factors[sep][later * PAIRS + earlier]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bath::{eta_table, BathSpec};
    use crate::model::BranchId;

    fn branch(bias: f64, tunneling: f64) -> BranchSpec {
        BranchSpec { bias, tunneling, offset: 0.0, k_eff: 0.0, branch: BranchId::P }
    }

    /// Independent exponential: truncated Taylor series of `-i H dt`.
    fn taylor_exp(bias: f64, tunneling: f64, dt: f64) -> Matrix2<Complex64> {
        let i = Complex64::new(0.0, 1.0);
        let h = Matrix2::new(
            Complex64::new(bias, 0.0),
            Complex64::new(tunneling, 0.0),
            Complex64::new(tunneling, 0.0),
            Complex64::new(-bias, 0.0),
        );
        let a = h * (-i * dt);
        let mut term = Matrix2::identity();
        let mut sum = Matrix2::identity();
        for n in 1..40 {
            term = term * a / Complex64::new(n as f64, 0.0);
            sum += term;
        }
        sum
    }

    #[test]
    fn short_step_is_identity() {
        let t = system_propagator(&branch(0.4, 0.5), 1e-12);
        for new in 0..4 {
            for old in 0..4 {
                let expected = if new == old { 1.0 } else { 0.0 };
                assert!((t.get(new, old) - expected).norm() < 1e-11);
            }
        }
    }

    #[test]
    fn diagonal_case() {
        let t = system_propagator(&branch(0.2, 0.0), 0.25);
        assert!((t.unitary[(0, 0)] - Complex64::from_polar(1.0, -0.05)).norm() < 1e-15);
        assert!((t.unitary[(1, 1)] - Complex64::from_polar(1.0, 0.05)).norm() < 1e-15);
        assert!(t.is_diagonal());
    }

    #[test]
    fn pure_tunneling_matches_taylor() {
        let t = system_propagator(&branch(0.0, 1.0), 0.25);
        let reference = taylor_exp(0.0, 1.0, 0.25);
        assert!((t.unitary - reference).norm() < 1e-12);
        assert!((t.unitary[(1, 0)].norm() - 0.25f64.sin()).abs() < 1e-12);
        assert!((t.unitary[(1, 0)].norm() - 0.247_403_959_254_522_9).abs() < 1e-12);
        assert!(!t.is_diagonal());
    }

    #[test]
    fn general_step_matches_taylor_and_is_unitary() {
        for (b, d, dt) in [(0.4, 0.5, 0.25), (-1.3, 0.7, 0.1), (0.0, 0.0, 0.3)] {
            let t = system_propagator(&branch(b, d), dt);
            assert!((t.unitary - taylor_exp(b, d, dt)).norm() < 1e-12);
            for col in 0..2 {
                let norm: f64 = (0..2).map(|row| t.unitary[(row, col)].norm_sqr()).sum();
                assert!((norm - 1.0).abs() < 1e-12);
            }
            assert_eq!(
                t.amplitude((1, -1), (-1, 1)),
                t.unitary[(0, 1)] * t.unitary[(1, 0)].conj()
            );
        }
    }

    #[test]
    fn influence_factor_properties() {
        let bath = BathSpec::new(0.3, 0.2, 7.5).unwrap();
        let eta = eta_table(&bath, 0.25, 4).unwrap();
        let spins = [(1i8, 1i8), (1, -1), (-1, 1), (-1, -1)];
        for s in spins {
            for sp in spins {
                for sep in 0..=4 {
                    let f = influence_factor(&eta, s, sp, sep);
                    if s.0 == s.1 {
                        assert_eq!(f, Complex64::new(1.0, 0.0));
                    }
                }
                assert_eq!(influence_factor(&eta, s, sp, 5), Complex64::new(1.0, 0.0));
            }
            // self-decoherence damps
            assert!(influence_factor(&eta, s, s, 0).norm() <= 1.0);
        }
        let zero = eta_table(&bath.with_kondo(0.0), 0.25, 4).unwrap();
        for s in spins {
            for sp in spins {
                assert_eq!(influence_factor(&zero, s, sp, 2), Complex64::new(1.0, 0.0));
            }
        }
    }

    #[test]
    fn pair_codes_round_trip() {
        for x in 0..4 {
            let (p, m) = pair_spins(x);
            assert_eq!(pair_index(p as i8, m as i8), x);
        }
        assert_eq!(pair_index(1, -1), 1);
    }
}
