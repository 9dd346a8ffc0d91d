//! The time representation: closed-form packet wavefunctions via terminating
//! hypergeometric series, a panel-quadrature Fourier oracle, and the
//! completeness-kernel diagnostic.
//!
//! Convention: the energy-to-time transform is
//! psi(t) = (2 pi)^(-1/2) int_0^inf d omega e^(-i omega (t - tau)) phi(omega).

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::modes::PacketSpec;
use crate::quadrature::{fourier_halfline, integrate_grid, Grid1D, MAX_ORDER};
use crate::specfun::{
    hyp2f1_terminating, laguerre_weighted, laguerre_weighted_chain, log_gamma,
};

/// Values of a complex function on an explicit 1D grid.
#[derive(Debug, Clone)]
pub struct ComplexSamples {
    grid: Grid1D,
    values: Vec<Complex64>,
}

impl ComplexSamples {
    pub fn new(grid: Grid1D, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Usage(format!(
                "sample count {} does not match grid point count {}",
                values.len(),
                grid.len()
            )));
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::Domain("samples must be finite".into()));
        }
        Ok(Self { grid, values })
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// Trapezoid integral of the samples over the grid.
    pub fn integrate(&self) -> Complex64 {
        integrate_grid(&self.values, &self.grid).expect("lengths match by construction")
    }
}

/// Closed-form time-representation wavefunction of a packet:
///
///   psi(t) = (omega0 / sqrt(2 pi)) c_n
///            Gamma(alpha/2 + 1) Gamma(alpha + n + 1) / (n! Gamma(alpha + 1))
///            2F1(-n, alpha/2 + 1; alpha + 1; zeta^-1) / zeta^(alpha/2 + 1),
///
/// with zeta = 1/2 + i omega0 (t - tau) on the principal branch.
pub fn psi_closed_form(packet: &PacketSpec, t: f64) -> Complex64 {
    let mode = packet.mode();
    let n = mode.n();
    let nf = f64::from(n);
    let alpha = mode.alpha();
    let w0 = mode.omega0();
    let zeta = Complex64::new(0.5, w0 * (t - packet.tau()));
    // Re(zeta) = 1/2 > 0 keeps the complex power off the branch cut.
    assert!(zeta.re > 0.0);
    let ln_pref = 0.5 * w0.ln() - 0.5 * (2.0 * std::f64::consts::PI).ln()
        + 0.5 * (log_gamma(nf + 1.0).unwrap() - log_gamma(alpha + nf + 1.0).unwrap())
        + log_gamma(alpha / 2.0 + 1.0).unwrap()
        + log_gamma(alpha + nf + 1.0).unwrap()
        - log_gamma(nf + 1.0).unwrap()
        - log_gamma(alpha + 1.0).unwrap();
    let series = hyp2f1_terminating(n, alpha / 2.0 + 1.0, alpha + 1.0, zeta.inv())
        .expect("alpha + 1 > 0 admits no zero denominator");
    ln_pref.exp() * series * zeta.powf(-(alpha / 2.0 + 1.0))
}

/// Numerical Fourier transform of a packet from the energy to the time
/// representation, the oracle for `psi_closed_form`.
///
/// The half-line integral is split into panels no longer than
/// min(2 pi / (omega0 |t - tau|), omega0 scaled to 1), each integrated with a
/// fixed Gauss-Legendre rule of the requested order, until the envelope tail
/// bound falls below 1e-13.
pub fn psi_numeric(
    packet: &PacketSpec,
    grid: &Grid1D,
    quad_order: usize,
) -> Result<ComplexSamples> {
    let mode = packet.mode();
    let n = mode.n();
    let alpha = mode.alpha();
    let w0 = mode.omega0();
    if quad_order < n as usize + 20 {
        return Err(Error::Domain(format!(
            "psi_numeric needs quad_order >= n + 20 = {}, got {quad_order}",
            n as usize + 20
        )));
    }
    if quad_order > MAX_ORDER {
        return Err(Error::Domain(format!(
            "quad_order must not exceed {MAX_ORDER}, got {quad_order}"
        )));
    }

    // |L_n^alpha(x)| <= coeff_sum * max(1, x)^n with all-positive coefficient
    // magnitudes, so c_n x^(alpha/2) e^(-x/2) |L_n| is bounded by `envelope`.
    let nf = f64::from(n);
    let ln_cn = 0.5 * (log_gamma(nf + 1.0)? - log_gamma(alpha + nf + 1.0)?);
    let mut coeff_sum = 0.0;
    for m in 0..=n {
        let mf = f64::from(m);
        coeff_sum += (log_gamma(nf + alpha + 1.0)?
            - log_gamma(mf + alpha + 1.0)?
            - log_gamma(nf - mf + 1.0)?
            - log_gamma(mf + 1.0)?)
        .exp();
    }
    let envelope = |x: f64| (ln_cn + (alpha / 2.0 + nf) * x.ln() - x / 2.0).exp() * coeff_sum;

    let mut x_max = (2.0 * (alpha + 4.0 * nf) + 60.0).max(80.0);
    // The integrand decays at least like e^(-x/4) past 4(alpha/2 + n), so
    // four envelope units bound the tail.
    while 4.0 * envelope(x_max) > 1e-13 && x_max < 4000.0 {
        x_max += 20.0;
    }
    let tail_estimate = 4.0 * envelope(x_max) / (2.0 * std::f64::consts::PI).sqrt();
    if tail_estimate > 1e-8 {
        return Err(Error::Numeric(format!(
            "psi_numeric truncation error estimate {tail_estimate:.3e} exceeds the 1e-8 budget"
        )));
    }

    let scale = w0.sqrt() / (2.0 * std::f64::consts::PI).sqrt();
    let mut values = Vec::with_capacity(grid.len());
    for &t in grid.points() {
        let s = w0 * (t - packet.tau());
        let integral = fourier_halfline(
            |x| laguerre_weighted(alpha, x, n).unwrap(),
            s,
            1.0,
            x_max,
            quad_order,
        )?;
        values.push(integral * scale);
    }
    ComplexSamples::new(grid.clone(), values)
}

/// Truncated completeness kernel K_N(omega, omega') =
/// sum_{n=0}^{N} phi_n(omega) phi_n(omega'), symmetric in its arguments.
pub fn completeness_kernel(
    n_max: u32,
    alpha: f64,
    omega0: f64,
    omega: f64,
    omega_prime: f64,
) -> Result<f64> {
    if !(alpha > -1.0) || !alpha.is_finite() {
        return Err(Error::Domain(format!(
            "completeness kernel needs alpha > -1, got {alpha}"
        )));
    }
    if !(omega0 > 0.0) || !omega0.is_finite() {
        return Err(Error::Domain(format!(
            "completeness kernel needs omega0 > 0, got {omega0}"
        )));
    }
    if omega < 0.0 || omega_prime < 0.0 {
        return Ok(0.0);
    }
    let count = n_max as usize + 1;
    let a = laguerre_weighted_chain(alpha, omega / omega0, count)?;
    let b = laguerre_weighted_chain(alpha, omega_prime / omega0, count)?;
    Ok(a.iter().zip(&b).map(|(x, y)| x * y).sum::<f64>() / omega0)
}

/// Grid moments of |psi|^2 from the closed-form wavefunction.
#[derive(Debug, Clone, Copy)]
pub struct TimeMomentsNumeric {
    /// Trapezoid integral of |psi|^2 over the grid (1 up to truncation).
    pub norm: f64,
    /// <T> over the grid, normalized by `norm`.
    pub mean: f64,
    /// <T^2> over the grid, normalized by `norm`.
    pub second: f64,
}

/// Time-domain oracle for the packet moments; the grid should be symmetric
/// about tau for the mean to cancel exactly.
pub fn time_moments_numeric(packet: &PacketSpec, grid: &Grid1D) -> Result<TimeMomentsNumeric> {
    let abs2: Vec<f64> = grid
        .points()
        .iter()
        .map(|&t| psi_closed_form(packet, t).norm_sqr())
        .collect();
    let to_c = |v: &[f64]| -> Vec<Complex64> {
        v.iter().map(|&x| Complex64::new(x, 0.0)).collect()
    };
    let norm = integrate_grid(&to_c(&abs2), grid)?.re;
    if norm <= 0.0 {
        return Err(Error::Numeric("vanishing norm on the moment grid".into()));
    }
    let first: Vec<Complex64> = grid
        .points()
        .iter()
        .zip(&abs2)
        .map(|(&t, &v)| Complex64::new(t * v, 0.0))
        .collect();
    let second: Vec<Complex64> = grid
        .points()
        .iter()
        .zip(&abs2)
        .map(|(&t, &v)| Complex64::new(t * t * v, 0.0))
        .collect();
    Ok(TimeMomentsNumeric {
        norm,
        mean: integrate_grid(&first, grid)?.re / norm,
        second: integrate_grid(&second, grid)?.re / norm,
    })
}
