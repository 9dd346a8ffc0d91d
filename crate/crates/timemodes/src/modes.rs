//! Orthonormal energy modes on the positive half-line, their time-shifted
//! packets, and the derivative expansion feeding the time-variance chain.
//!
//! A mode is phi_n^alpha(omega) = c_n (omega/omega0)^(alpha/2)
//! e^(-omega/2 omega0) L_n^alpha(omega/omega0) for omega >= 0 and zero
//! otherwise, with c_n = sqrt(n! / (omega0 Gamma(alpha+n+1))) so that the
//! modes are orthonormal in L2(0, inf).

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::specfun::{laguerre_unchecked, laguerre_weighted, log_gamma};

/// The triple (n, alpha, omega0) identifying one mode; the universal index
/// into every formula in this crate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeSpec {
    n: u32,
    alpha: f64,
    omega0: f64,
}

impl ModeSpec {
    pub fn new(n: u32, alpha: f64, omega0: f64) -> Result<Self> {
        if !(alpha > -1.0) || !alpha.is_finite() {
            return Err(Error::Domain(format!(
                "mode shape exponent must satisfy alpha > -1, got {alpha}"
            )));
        }
        if !(omega0 > 0.0) || !omega0.is_finite() {
            return Err(Error::Domain(format!(
                "mode energy scale must satisfy omega0 > 0, got {omega0}"
            )));
        }
        Ok(Self { n, alpha, omega0 })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn omega0(&self) -> f64 {
        self.omega0
    }

    /// Normalization constant c_n = sqrt(n! / (omega0 Gamma(alpha+n+1))).
    pub fn normalization(&self) -> f64 {
        (0.5 * (log_gamma(f64::from(self.n) + 1.0).unwrap()
            - log_gamma(self.alpha + f64::from(self.n) + 1.0).unwrap()))
        .exp()
            / self.omega0.sqrt()
    }

    /// Mode value in the energy representation.
    ///
    /// Returns 0 for omega < 0. At omega = 0 the value is 0 for alpha > 0,
    /// finite for alpha = 0, and the divergent limit +infinity for alpha < 0.
    pub fn eval_energy(&self, omega: f64) -> f64 {
        if omega < 0.0 {
            return 0.0;
        }
        if omega == 0.0 {
            if self.alpha > 0.0 {
                return 0.0;
            } else if self.alpha == 0.0 {
                // c_n^0 L_n^0(0) = 1 / sqrt(omega0).
                return 1.0 / self.omega0.sqrt();
            }
            return f64::INFINITY;
        }
        laguerre_weighted(self.alpha, omega / self.omega0, self.n).unwrap()
            / self.omega0.sqrt()
    }

    /// Analytic derivative d phi / d omega, used by finite-difference and
    /// quadrature cross-checks. Requires alpha >= 2 for a finite limit at
    /// omega = 0.
    pub fn eval_energy_derivative(&self, omega: f64) -> f64 {
        if omega < 0.0 {
            return 0.0;
        }
        let x = omega / self.omega0;
        let ln_c = 0.5
            * (log_gamma(f64::from(self.n) + 1.0).unwrap()
                - log_gamma(self.alpha + f64::from(self.n) + 1.0).unwrap());
        if omega == 0.0 {
            if self.alpha > 2.0 {
                return 0.0;
            } else if self.alpha == 2.0 {
                // Limit c_n L_n^2(0) = c_n (n+1)(n+2)/2.
                let nf = f64::from(self.n);
                return ln_c.exp() * (nf + 1.0) * (nf + 2.0) / 2.0
                    / self.omega0.powf(1.5);
                // note: alpha < 2 diverges at 0
            }
            return f64::INFINITY;
        }
        // d/dx [c x^(a/2) e^(-x/2) L_n^a(x)]
        //   = c x^(a/2 - 1) e^(-x/2) [ (a - x)/2 L_n^a(x) - x L_{n-1}^{a+1}(x) ].
        let envelope = (ln_c + (self.alpha / 2.0 - 1.0) * x.ln() - x / 2.0).exp();
        let ln = laguerre_unchecked(self.n, self.alpha, x);
        let lower = if self.n == 0 {
            0.0
        } else {
            laguerre_unchecked(self.n - 1, self.alpha + 1.0, x)
        };
        envelope * ((self.alpha - x) / 2.0 * ln - x * lower) / self.omega0.powf(1.5)
    }

    /// Expands d phi_n^alpha / d omega (in omega0 = 1 units) over the bases
    /// phi_l^(alpha-2) and phi_m^alpha. Requires alpha >= 2 so the reduced
    /// basis is normalizable.
    pub fn derivative_expansion(&self) -> Result<DerivativeExpansion> {
        if self.alpha < 2.0 {
            return Err(Error::Domain(format!(
                "derivative expansion needs alpha >= 2 (reduced basis normalizable), got {}",
                self.alpha
            )));
        }
        let n = self.n;
        let nf = f64::from(n);
        let a = self.alpha;
        let ln_cn = 0.5 * (log_gamma(nf + 1.0)? - log_gamma(a + nf + 1.0)?);
        // N_{nl} = (alpha/2) (c_n^alpha / c_l^(alpha-2)) (n - l + 1).
        let cross_terms = (0..=n)
            .map(|l| {
                let lf = f64::from(l);
                let ratio =
                    (ln_cn - 0.5 * (log_gamma(lf + 1.0)? - log_gamma(a - 1.0 + lf)?)).exp();
                Ok((l, 0.5 * a * ratio * (nf - lf + 1.0)))
            })
            .collect::<Result<Vec<_>>>()?;
        // Ladder of same-alpha lower modes: the coefficient on phi_m^alpha is
        // -c_n/c_m for every m < n (L_n' = -sum_{m<n} L_m^(alpha) in the
        // monic identity chain), reducing to the single adjacent term for
        // n <= 1.
        let lower_coefficients = (0..n)
            .map(|m| {
                let mf = f64::from(m);
                Ok(-(ln_cn - 0.5 * (log_gamma(mf + 1.0)? - log_gamma(a + mf + 1.0)?)).exp())
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(DerivativeExpansion {
            n,
            alpha: a,
            cross_terms,
            self_coefficient: -0.5,
            lower_coefficients,
        })
    }
}

/// A mode carrying the phase e^(i omega tau): the packet centered at mean
/// time tau.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PacketSpec {
    mode: ModeSpec,
    tau: f64,
}

impl PacketSpec {
    pub fn new(mode: ModeSpec, tau: f64) -> Result<Self> {
        if !tau.is_finite() {
            return Err(Error::Domain(format!(
                "packet time shift must be finite, got {tau}"
            )));
        }
        Ok(Self { mode, tau })
    }

    pub fn mode(&self) -> ModeSpec {
        self.mode
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// e^(i omega tau) phi_n^alpha(omega); the modulus equals the mode value.
    pub fn eval_energy(&self, omega: f64) -> Complex64 {
        let phase = omega * self.tau;
        Complex64::from_polar(1.0, phase) * self.mode.eval_energy(omega)
    }
}

/// Coefficients of d phi_n^alpha / d omega (omega0 = 1 units):
///
///   sum_l N_{nl} phi_l^(alpha-2)  - 1/2 phi_n^alpha
///   - sum_{m<n} (c_n/c_m) phi_m^alpha.
#[derive(Debug, Clone)]
pub struct DerivativeExpansion {
    n: u32,
    alpha: f64,
    cross_terms: Vec<(u32, f64)>,
    self_coefficient: f64,
    lower_coefficients: Vec<f64>,
}

impl DerivativeExpansion {
    /// (l, N_{nl}) pairs over the reduced basis phi_l^(alpha-2), l = 0..=n.
    pub fn cross_terms(&self) -> &[(u32, f64)] {
        &self.cross_terms
    }

    /// The -1/2 coefficient on phi_n^alpha itself.
    pub fn self_coefficient(&self) -> f64 {
        self.self_coefficient
    }

    /// Coefficients on phi_m^alpha for m = 0..n (all negative); empty iff
    /// n = 0.
    pub fn lower_coefficients(&self) -> &[f64] {
        &self.lower_coefficients
    }

    /// The adjacent term -c_n/c_{n-1}, or 0 when n = 0.
    pub fn lower_coefficient(&self) -> f64 {
        self.lower_coefficients.last().copied().unwrap_or(0.0)
    }

    /// Evaluates the expansion at omega (omega0 = 1 units).
    pub fn evaluate(&self, omega: f64) -> f64 {
        if omega < 0.0 {
            return 0.0;
        }
        let mut total = 0.0;
        for &(l, coeff) in &self.cross_terms {
            total += coeff * laguerre_weighted(self.alpha - 2.0, omega, l).unwrap();
        }
        total += self.self_coefficient * laguerre_weighted(self.alpha, omega, self.n).unwrap();
        for (m, &coeff) in self.lower_coefficients.iter().enumerate() {
            total += coeff * laguerre_weighted(self.alpha, omega, m as u32).unwrap();
        }
        total
    }
}

/// g_nu(t) = (beta + i t)^(-nu), the time-side member of the warm-up Fourier
/// pair.
pub fn gnu(t: f64, nu: u32, beta: f64) -> Result<Complex64> {
    check_pair_params(nu, beta)?;
    if !t.is_finite() {
        return Err(Error::Domain(format!("gnu requires finite t, got {t}")));
    }
    Ok(Complex64::new(beta, t).powi(-(nu as i32)))
}

/// f_nu(omega) = sqrt(2 pi)/Gamma(nu) omega^(nu-1) e^(-beta omega) for
/// omega > 0use, zero otherwise; the energy-side member of the pair.
pub fn fnu(omega: f64, nu: u32, beta: f64) -> Result<f64> {
    check_pair_params(nu, beta)?;
    if !omega.is_finite() {
        return Err(Error::Domain(format!("fnu requires finite omega, got {omega}")));
    }
    if omega <= 0.0 {
        return Ok(0.0);
    }
    let ln = -log_gamma(f64::from(nu))? + (f64::from(nu) - 1.0) * omega.ln() - beta * omega;
    Ok((2.0 * std::f64::consts::PI).sqrt() * ln.exp())
}

fn check_pair_params(nu: u32, beta: f64) -> Result<()> {
    if nu < 2 {
        return Err(Error::Domain(format!(
            "the Fourier pair needs nu >= 2 for square integrability, got {nu}"
        )));
    }
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(Error::Domain(format!("beta must be positive, got {beta}")));
    }
    Ok(())
}
