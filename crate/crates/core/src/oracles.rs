//! Independent reference solutions.
//!
//! None of these share numerical kernels with the propagation engine: the
//! matrix exponential comes from nalgebra's Pade scaling-and-squaring, the
//! frequency integrals use composite Simpson with Richardson extrapolation,
//! and the path sum is a brute-force enumeration.

use nalgebra::Matrix2;
use num_complex::Complex64;

use crate::bath::{eta_table, BathSpec, EtaTable};
use crate::error::{domain, Error, Result};
use crate::model::{BranchSpec, BranchState};

/// Largest step count accepted by [`full_path_sum`].
pub const MAX_ENUMERATION_STEPS: usize = 8;

fn hamiltonian(branch: &BranchSpec) -> Matrix2<Complex64> {
    let b = Complex64::new(branch.bias, 0.0);
    let d = Complex64::new(branch.tunneling, 0.0);
    Matrix2::new(b, d, d, -b)
}

fn unitary(branch: &BranchSpec, t: f64) -> Matrix2<Complex64> {
    (hamiltonian(branch) * Complex64::new(0.0, -t)).exp()
}

/// Closed-system branch evolution `U(t) rho0 U(t)^dagger`.
pub fn rabi_closed(branch: &BranchSpec, rho0: &BranchState, t: f64) -> BranchState {
    let u = unitary(branch, t);
    BranchState::from_raw(u * rho0.matrix() * u.adjoint())
}

fn x_coth_half(x: f64, temperature: f64) -> f64 {
    // x coth(x / 2T)
    if x == 0.0 {
        return 2.0 * temperature;
    }
    let e = (-x / temperature).exp();
    x * (1.0 + e) / (1.0 - e)
}

/// Composite Simpson on `[a, b]`, doubling the panel count and applying one
/// Richardson step until successive extrapolants agree.
pub fn simpson_richardson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64) -> Result<f64> {
    let simpson = |n: usize| {
        let h = (b - a) / n as f64;
        let mut s = f(a) + f(b);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * f(a + h * i as f64);
        }
        s * h / 3.0
    };
    let mut n = 256;
    let mut coarse = simpson(n);
    let mut previous: Option<f64> = None;
    while n <= 1 << 22 {
        n *= 2;
        let fine = simpson(n);
        let extrapolated = fine + (fine - coarse) / 15.0;
        if let Some(p) = previous {
            if (extrapolated - p).abs() <= rel_tol * extrapolated.abs().max(1e-300) {
                return Ok(extrapolated);
            }
        }
        previous = Some(extrapolated);
        coarse = fine;
    }
    Err(Error::Numerical(format!(
        "Simpson-Richardson on [{a}, {b}] did not reach relative tolerance {rel_tol:e}"
    )))
}

fn omega_max(bath: &BathSpec) -> f64 {
    40.0 * bath.cutoff
}

/// Bath autocorrelation from the Simpson route.
pub fn correlation_simpson(t: f64, bath: &BathSpec) -> Result<Complex64> {
    if bath.kondo == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let pref = 0.5 * bath.kondo;
    let (wc, temp) = (bath.cutoff, bath.temperature);
    let re = simpson_richardson(
        |w| (-w / wc).exp() * x_coth_half(w, temp) * (w * t).cos(),
        0.0,
        omega_max(bath),
        1e-12,
    )?;
    let im = simpson_richardson(|w| -(-w / wc).exp() * w * (w * t).sin(), 0.0, omega_max(bath), 1e-12)?;
    Ok(Complex64::new(re, im) * pref)
}

/// Exact pure-dephasing exponent
/// `Gamma(t) = (4/pi) int dw J(w)/w^2 coth(w/2T) (1 - cos wt)`
/// for coupling eigenvalues `+-1`.
pub fn dephasing_decay(bath: &BathSpec, t: f64) -> Result<f64> {
    if t < 0.0 {
        return domain(format!("dephasing exponent needs t >= 0, got {t}"));
    }
    if bath.kondo == 0.0 || t == 0.0 {
        return Ok(0.0);
    }
    let (wc, temp) = (bath.cutoff, bath.temperature);
    // (4/pi)(pi K/2) = 2K; integrand e^{-w/wc} (w coth) (1 - cos wt) / w^2
    let integrand = |w: f64| {
        let one_minus_cos = if w * t < 1e-4 {
            0.5 * (w * t).powi(2)
        } else {
            2.0 * (0.5 * w * t).sin().powi(2)
        };
        if w == 0.0 {
            return 0.5 * t * t * 2.0 * temp;
        }
        (-w / wc).exp() * x_coth_half(w, temp) * one_minus_cos / (w * w)
    };
    Ok(2.0 * bath.kondo * simpson_richardson(integrand, 0.0, omega_max(bath), 1e-11)?)
}

/// Window coefficients from a 2-D trapezoid over `C(t' - t'')` sampled on
/// `nodes x nodes` points per window, with `C` taken from [`correlation_simpson`].
pub fn eta_trapezoid(bath: &BathSpec, dt: f64, dk_max: usize, nodes: usize) -> Result<EtaTable> {
    if nodes < 2 {
        return domain("trapezoid needs at least two nodes per window");
    }
    let h = dt / (nodes - 1) as f64;
    let m = nodes - 1;
    // Lags needed: j h for |j| <= m plus the window offsets k dt = k m h.
    let mut cache = std::collections::HashMap::new();
    let mut corr = |lag_steps: i64| -> Result<Complex64> {
        if let Some(v) = cache.get(&lag_steps) {
            return Ok(*v);
        }
        let v = correlation_simpson(lag_steps as f64 * h, bath)?;
        cache.insert(lag_steps, v);
        Ok(v)
    };
    let weight = |i: usize| if i == 0 || i == m { 0.5 } else { 1.0 };

    // Triangle: outer trapezoid over t' = i h, inner over t'' in [0, t'].
    let mut same = Complex64::new(0.0, 0.0);
    for i in 1..=m {
        let mut inner = Complex64::new(0.0, 0.0);
        for j in 0..=i {
            let w = if j == 0 || j == i { 0.5 } else { 1.0 };
            inner += corr((i - j) as i64)? * w;
        }
        same += inner * h * weight(i);
    }
    same *= h;

    let mut diff = Vec::with_capacity(dk_max);
    for k in 1..=dk_max {
        let offset = (k * m) as i64;
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..=m {
            for j in 0..=m {
                acc += corr(offset + i as i64 - j as i64)? * (weight(i) * weight(j));
            }
        }
        diff.push(acc * h * h);
    }
    Ok(EtaTable { dt, eta_same: same, eta_diff: diff })
}

fn pair_spins(x: usize) -> (f64, f64) {
    (if x >> 1 == 0 { 1.0 } else { -1.0 }, if x & 1 == 0 { 1.0 } else { -1.0 })
}

/// Brute-force evaluation of the discretized path sum without memory
/// truncation, at every grid point up to `n_steps`.
pub fn full_path_sum(
    branch: &BranchSpec,
    bath: &BathSpec,
    rho0: &BranchState,
    dt: f64,
    n_steps: usize,
) -> Result<Vec<BranchState>> {
    if n_steps > MAX_ENUMERATION_STEPS {
        return Err(Error::Resource(format!(
            "full path enumeration limited to {MAX_ENUMERATION_STEPS} steps, asked for {n_steps}"
        )));
    }
    // Symmetric splitting: half a bare step before the first window and
    // after the last one, full bare steps in between.
    let u = unitary(branch, dt);
    let uh = unitary(branch, 0.5 * dt);
    let amp = |m: &Matrix2<Complex64>, new: usize, old: usize| m[(new >> 1, old >> 1)] * m[(new & 1, old & 1)].conj();
    let eta = eta_table(bath, dt, n_steps.max(1))?;
    let factor = |later: usize, earlier: usize, sep: usize| {
        let (kp, km) = pair_spins(later);
        let (ep, em) = pair_spins(earlier);
        let c = eta.coefficient(sep);
        (-(kp - km) * (c * ep - c.conj() * em)).exp()
    };
    let rho = [rho0.get(0, 0), rho0.get(0, 1), rho0.get(1, 0), rho0.get(1, 1)];

    let mut out = vec![*rho0];
    for n in 1..=n_steps {
        let mut acc = [Complex64::new(0.0, 0.0); 4];
        // odometer over x_0 .. x_n, x_0 least significant
        let total = 1usize << (2 * (n + 1));
        let mut path = vec![0usize; n + 1];
        for code in 0..total {
            for (k, slot) in path.iter_mut().enumerate() {
                *slot = (code >> (2 * k)) & 3;
            }
            let mut w = rho[path[0]];
            for k in 1..=n {
                w *= amp(if k == 1 { &uh } else { &u }, path[k], path[k - 1]);
                for kp in 1..=k {
                    w *= factor(path[k], path[kp], k - kp);
                }
            }
            acc[path[n]] += w;
        }
        let marginal = Matrix2::new(acc[0], acc[1], acc[2], acc[3]);
        out.push(BranchState::from_raw(uh * marginal * uh.adjoint()));
    }
    Ok(out)
}
