//! Weak-coupling long-time estimates for the branch observables and the
//! stationary concurrence.
//!
//! `mu` uses the real part of `psi(iJ / pi T)`. The digamma function is
//! complex on the imaginary axis and the renormalization constant must be
//! real; `Re psi(iy) = Re psi(1 + iy)`, which is the form that appears in the
//! standard weak-coupling spin-boson treatment.

use crate::error::{domain, Result};
use crate::model::QubitPairParams;
use crate::special::digamma_re_imag_axis;

/// Largest Kondo parameter still treated as weak coupling by [`steady_concurrence`].
pub const WEAK_COUPLING_MAX_K: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyParams {
    /// `sqrt(eps^2 + (J gamma)^2)`, the biased Q-branch splitting with the
    /// bare tunneling standing in for the renormalized one.
    pub delta_b: f64,
    /// Renormalized P-branch frequency `J sqrt(1 + 2 K mu)`.
    pub omega_r: f64,
    pub mu: f64,
}

impl SteadyParams {
    pub fn new(params: &QubitPairParams, kondo: f64, temperature: f64) -> Result<Self> {
        let mu = mu_coefficient(params.j, temperature)?;
        let eps = params.eps1 + params.eps2;
        let delta_b = eps.hypot(params.j * params.gamma);
        let omega_r = renormalized_frequency(params.j, kondo, mu)?;
        Ok(Self { delta_b, omega_r, mu })
    }
}

/// `mu = Re psi(iJ / pi T) - ln(J / T)`. Independent of the coupling.
pub fn mu_coefficient(j: f64, temperature: f64) -> Result<f64> {
    if !(j > 0.0 && temperature > 0.0) {
        return domain(format!("mu needs J > 0 and T > 0, got J={j}, T={temperature}"));
    }
    let y = j / (std::f64::consts::PI * temperature);
    Ok(digamma_re_imag_axis(y) - (j / temperature).ln())
}

fn renormalized_frequency(j: f64, kondo: f64, mu: f64) -> Result<f64> {
    let factor = 1.0 + 2.0 * kondo * mu;
    if factor <= 0.0 {
        return domain(format!(
            "Omega^2 = J^2 (1 + 2 K mu) is not positive (1 + 2K mu = {factor}); outside the weak-coupling formula"
        ));
    }
    Ok(j * factor.sqrt())
}

fn biased_splitting(eps: f64, tun_q: f64) -> Result<f64> {
    let delta_b = eps.hypot(tun_q);
    if delta_b <= 0.0 {
        return domain("Q-branch splitting vanishes (eps = 0 and J gamma = 0)");
    }
    Ok(delta_b)
}

/// `<Q_z> = a (eps / Delta_b) tanh(Delta_b / T)`.
pub fn steady_qz(a: f64, eps: f64, tun_q: f64, temperature: f64) -> Result<f64> {
    let delta_b = biased_splitting(eps, tun_q)?;
    Ok(a * (eps / delta_b) * (delta_b / temperature).tanh())
}

/// `sqrt(p00 p11) = (a/2) sqrt(1 - (eps/Delta_b)^2 tanh^2(Delta_b / T))`.
pub fn steady_population_product_q(a: f64, eps: f64, tun_q: f64, temperature: f64) -> Result<f64> {
    let delta_b = biased_splitting(eps, tun_q)?;
    let pol = (eps / delta_b) * (delta_b / temperature).tanh();
    Ok(0.5 * a * (1.0 - pol * pol).max(0.0).sqrt())
}

/// `|(rho)_{01,10}| ~ ((1-a)/2) (J / Omega) tanh(Omega / T)`.
pub fn steady_coherence_p(a: f64, j: f64, kondo: f64, temperature: f64) -> Result<f64> {
    let mu = mu_coefficient(j, temperature)?;
    let omega = renormalized_frequency(j, kondo, mu)?;
    Ok(0.5 * (1.0 - a) * (j / omega) * (omega / temperature).tanh())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyConcurrence {
    /// `max(0, (1-a)/sqrt(1 + 2 mu K) - a)`.
    pub value: f64,
    /// First-order expansion `1 - 2a - mu K (1 - a)`.
    pub linearized: f64,
    /// True when `a < 1/2`, `T < J`, `T < J gamma`, `eps < J gamma` and `K <= 0.1`.
    pub valid: bool,
    /// `2a - 1` for `a > 1/2`. Observed in simulations, not derived; advisory only.
    pub high_weight_estimate: Option<f64>,
    pub mu: f64,
}

pub fn steady_concurrence(
    a: f64,
    params: &QubitPairParams,
    kondo: f64,
    temperature: f64,
) -> Result<SteadyConcurrence> {
    if !(0.0..=1.0).contains(&a) {
        return domain(format!("subspace weight a must lie in [0, 1], got {a}"));
    }
    let mu = mu_coefficient(params.j, temperature)?;
    let factor = 1.0 + 2.0 * mu * kondo;
    if factor <= 0.0 {
        return domain(format!("1 + 2 mu K = {factor} is not positive"));
    }
    let value = ((1.0 - a) / factor.sqrt() - a).max(0.0);
    let linearized = 1.0 - 2.0 * a - mu * kondo * (1.0 - a);
    let tun_q = (params.j * params.gamma).abs();
    let eps = params.eps1 + params.eps2;
    let valid = a < 0.5
        && temperature < params.j
        && temperature < tun_q
        && eps.abs() < tun_q
        && kondo <= WEAK_COUPLING_MAX_K;
    let high_weight_estimate = (a > 0.5).then_some(2.0 * a - 1.0);
    Ok(SteadyConcurrence { value, linearized, valid, high_weight_estimate, mu })
}
