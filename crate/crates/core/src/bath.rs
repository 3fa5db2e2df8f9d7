//! Ohmic bosonic baths and the discretized influence-functional coefficients.
//!
//! For a displacement coupling `s B` with `s = +-1`, the bath autocorrelation is
//!
//! ```text
//! C(t) = (1/pi) int_0^inf dw J(w) [coth(w/2T) cos(wt) - i sin(wt)]
//! ```
//!
//! and the coefficient linking two time windows is the double integral of
//! `C(t' - t'')` over them. Both are evaluated here as single frequency
//! integrals, with the window integrals done in closed form.

use num_complex::Complex64;

use crate::error::{domain, Result};
use crate::quadrature::{integrate, QuadConfig};

/// Upper frequency limit in units of the cutoff. The neglected tail of any
/// integrand here is bounded by a polynomial times `exp(-40)`.
pub const OMEGA_MAX_CUTOFFS: f64 = 40.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BathSpec {
    /// Kondo parameter.
    pub kondo: f64,
    /// Temperature (k_B = 1).
    pub temperature: f64,
    /// Exponential cutoff frequency.
    pub cutoff: f64,
}

impl BathSpec {
    pub fn new(kondo: f64, temperature: f64, cutoff: f64) -> Result<Self> {
        let b = Self { kondo, temperature, cutoff };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.kondo >= 0.0 && self.kondo.is_finite()) {
            return domain(format!("Kondo parameter must be >= 0, got {}", self.kondo));
        }
        if !(self.temperature > 0.0 && self.temperature.is_finite()) {
            return domain(format!("temperature must be > 0, got {}", self.temperature));
        }
        if !(self.cutoff > 0.0 && self.cutoff.is_finite()) {
            return domain(format!("cutoff frequency must be > 0, got {}", self.cutoff));
        }
        Ok(())
    }

    pub fn with_kondo(&self, kondo: f64) -> Self {
        Self { kondo, ..*self }
    }

    fn omega_max(&self) -> f64 {
        OMEGA_MAX_CUTOFFS * self.cutoff
    }
}

/// `J(w) = (pi K / 2) w exp(-w / w_c)`.
pub fn spectral_density(omega: f64, bath: &BathSpec) -> Result<f64> {
    if omega < 0.0 || omega.is_nan() {
        return domain(format!("spectral density needs omega >= 0, got {omega}"));
    }
    Ok(0.5 * std::f64::consts::PI * bath.kondo * omega * (-omega / bath.cutoff).exp())
}

/// `w coth(w / 2T)`, finite (`-> 2T`) at the origin.
pub(crate) fn omega_coth(omega: f64, temperature: f64) -> f64 {
    let u = omega / (2.0 * temperature);
    if u < 1e-4 {
        let u2 = u * u;
        2.0 * temperature * (1.0 + u2 / 3.0 - u2 * u2 / 45.0)
    } else {
        omega / u.tanh()
    }
}

/// `J(w) / (K w)` for the Ohmic form.
fn unit_shape(omega: f64, cutoff: f64) -> f64 {
    0.5 * std::f64::consts::PI * (-omega / cutoff).exp()
}

fn quad_config() -> QuadConfig {
    QuadConfig {
        abs_tol: 1e-15,
        rel_tol: 1e-12,
        ..Default::default()
    }
}

/// Integrates `(1/pi) int_0^wmax unit_shape(w) * [re(w), im(w)] dw` for unit K.
fn unit_transform<R, I>(bath: &BathSpec, cfg: &QuadConfig, re: R, im: I) -> Result<Complex64>
where
    R: Fn(f64) -> f64,
    I: Fn(f64) -> f64,
{
    let wmax = bath.omega_max();
    let wc = bath.cutoff;
    let r = integrate(|w| unit_shape(w, wc) * re(w), 0.0, wmax, cfg)?;
    let i = integrate(|w| unit_shape(w, wc) * im(w), 0.0, wmax, cfg)?;
    Ok(Complex64::new(r.value, i.value) / std::f64::consts::PI)
}

/// Bath autocorrelation `C(t)`.
pub fn bath_correlation(t: f64, bath: &BathSpec) -> Result<Complex64> {
    bath.validate()?;
    if bath.kondo == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let temp = bath.temperature;
    let unit = unit_transform(
        bath,
        &quad_config(),
        |w| omega_coth(w, temp) * (w * t).cos(),
        |w| -w * (w * t).sin(),
    )?;
    Ok(unit * bath.kondo)
}

/// Discretized influence coefficients for uniform windows of width `dt`.
#[derive(Debug, Clone, PartialEq)]
pub struct EtaTable {
    pub dt: f64,
    /// Time-ordered self-window term `int_0^dt dt' int_0^t' dt'' C(t'-t'')`.
    pub eta_same: Complex64,
    /// `eta_diff[k - 1]` couples windows `k` steps apart, `k = 1..=dk_max`.
    pub eta_diff: Vec<Complex64>,
}

impl EtaTable {
    pub fn dk_max(&self) -> usize {
        self.eta_diff.len()
    }

    /// Coefficient for a window separation; zero beyond the memory length.
    pub fn coefficient(&self, sep: usize) -> Complex64 {
        match sep {
            0 => self.eta_same,
            s if s <= self.eta_diff.len() => self.eta_diff[s - 1],
            _ => Complex64::new(0.0, 0.0),
        }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            dt: self.dt,
            eta_same: self.eta_same * factor,
            eta_diff: self.eta_diff.iter().map(|e| e * factor).collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.eta_same == Complex64::new(0.0, 0.0)
            && self.eta_diff.iter().all(|e| *e == Complex64::new(0.0, 0.0))
    }
}

/// Builds the coefficient table for memory length `dk_max` windows.
///
/// Everything is computed for unit Kondo parameter and then scaled, so the
/// table is exactly linear in `K`.
pub fn eta_table(bath: &BathSpec, dt: f64, dk_max: usize) -> Result<EtaTable> {
    eta_table_with(bath, dt, dk_max, &quad_config())
}

pub fn eta_table_with(bath: &BathSpec, dt: f64, dk_max: usize, cfg: &QuadConfig) -> Result<EtaTable> {
    bath.validate()?;
    if !(dt > 0.0 && dt.is_finite()) {
        return domain(format!("time step must be > 0, got {dt}"));
    }
    if dk_max == 0 {
        return domain("memory length dk_max must be >= 1");
    }
    if bath.kondo == 0.0 {
        return Ok(EtaTable {
            dt,
            eta_same: Complex64::new(0.0, 0.0),
            eta_diff: vec![Complex64::new(0.0, 0.0); dk_max],
        });
    }
    let temp = bath.temperature;
    // 4 sin^2(w dt / 2) / w^2, the squared window transform.
    let window = move |w: f64| {
        if w * dt < 1e-4 {
            dt * dt * (1.0 - (w * dt).powi(2) / 12.0)
        } else {
            let s = (0.5 * w * dt).sin();
            4.0 * s * s / (w * w)
        }
    };
    let same = unit_transform(
        bath,
        cfg,
        |w| 0.5 * omega_coth(w, temp) * window(w),
        |w| {
            let x = w * dt;
            if x < 1e-3 {
                -w * dt * dt * dt / 6.0 * (1.0 - x * x / 20.0)
            } else {
                -(x - x.sin()) / w
            }
        },
    )?;
    let diff = (1..=dk_max)
        .map(|k| {
            let lag = k as f64 * dt;
            unit_transform(
                bath,
                cfg,
                |w| omega_coth(w, temp) * window(w) * (w * lag).cos(),
                |w| -w * window(w) * (w * lag).sin(),
            )
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EtaTable { dt, eta_same: same, eta_diff: diff }.scaled(bath.kondo))
}
