//! Digamma function for complex arguments.

use num_complex::Complex64;

/// `B_{2k} / (2k)` for k = 1..7.
const ASYMPTOTIC: [f64; 7] = [
    1.0 / 12.0,
    -1.0 / 120.0,
    1.0 / 252.0,
    -1.0 / 240.0,
    1.0 / 132.0,
    -691.0 / 32760.0,
    1.0 / 12.0,
];

const SHIFT_TO: f64 = 12.0;

/// `psi(z)` for `Re z > 0` or `Im z != 0`, via upward recurrence
/// `psi(z) = psi(z + n) - sum 1/(z + k)` followed by the asymptotic series.
pub fn digamma(z: Complex64) -> Complex64 {
    let mut z = z;
    let mut acc = Complex64::new(0.0, 0.0);
    while z.re < SHIFT_TO {
        acc -= z.inv();
        z += 1.0;
    }
    let inv2 = (z * z).inv();
    let mut series = Complex64::new(0.0, 0.0);
    let mut pow = inv2;
    for c in ASYMPTOTIC {
        series += pow * c;
        pow *= inv2;
    }
    acc + z.ln() - 0.5 * z.inv() - series
}

/// `Re psi(i y)`.
pub fn digamma_re_imag_axis(y: f64) -> f64 {
    digamma(Complex64::new(0.0, y)).re
}

#[cfg(test)]
mod tests {
    use super::*;

    const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

    #[test]
    fn real_axis_values() {
        assert!((digamma(Complex64::new(1.0, 0.0)).re + EULER_GAMMA).abs() < 1e-14);
        let half = digamma(Complex64::new(0.5, 0.0)).re;
        assert!((half - (-EULER_GAMMA - 2.0 * std::f64::consts::LN_2)).abs() < 1e-14);
    }

    #[test]
    fn imaginary_part_on_imaginary_axis() {
        // Im psi(iy) = 1/(2y) + (pi/2) coth(pi y)
        for y in [0.1, 0.7, 1.591_549_430_918_953_4, 5.0, 40.0] {
            let z = digamma(Complex64::new(0.0, y));
            let expected = 0.5 / y + 0.5 * std::f64::consts::PI / (std::f64::consts::PI * y).tanh();
            assert!((z.im - expected).abs() < 1e-12 * expected.max(1.0));
        }
    }
}
