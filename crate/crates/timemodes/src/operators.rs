//! The Hamiltonian as a banded matrix in the mode basis, its truncated
//! spectrum, energy and time moments, and uncertainty products.
//!
//! Multiplication by omega couples mode n only to n -+ 1, so the Hamiltonian
//! is tridiagonal; its square is pentadiagonal. Every closed-form moment here
//! is validated against an independent Gauss-Laguerre quadrature.

use std::collections::BTreeMap;

use crate::dd::Dd;
use crate::error::{Error, Result};
use crate::linalg::eigh_tridiagonal;
use crate::modes::{ModeSpec, PacketSpec};
use crate::quadrature::gauss_laguerre_rule;
use crate::specfun::{laguerre_unchecked, log_gamma};

/// Relative tolerance inside which the closed-form time variance must agree
/// with its quadrature oracle; beyond it the quadrature value is taken as
/// authoritative.
pub const TIME_VARIANCE_GATE: f64 = 1e-9;

/// Symmetric real banded matrix in the mode basis.
///
/// Entries are stored dimensionless; `element` applies the physical scale
/// omega0^unit_power.
#[derive(Debug, Clone)]
pub struct BandedOperator {
    dim: usize,
    half_bandwidth: usize,
    omega0: f64,
    unit_power: i32,
    /// diagonals[k][i] is the dimensionless entry (i, i + k).
    diagonals: Vec<Vec<f64>>,
}

impl BandedOperator {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn half_bandwidth(&self) -> usize {
        self.half_bandwidth
    }

    pub fn omega0(&self) -> f64 {
        self.omega0
    }

    /// Power of omega0 carried by the entries (1 for the Hamiltonian, 2 for
    /// its square).
    pub fn unit_power(&self) -> i32 {
        self.unit_power
    }

    /// Physical matrix element (m, n); zero outside the band.
    pub fn element(&self, m: usize, n: usize) -> f64 {
        self.dimensionless_element(m, n) * self.omega0.powi(self.unit_power)
    }

    /// Matrix element in omega0 = 1 units.
    pub fn dimensionless_element(&self, m: usize, n: usize) -> f64 {
        let (lo, hi) = if m <= n { (m, n) } else { (n, m) };
        let k = hi - lo;
        if hi >= self.dim || k > self.half_bandwidth {
            return 0.0;
        }
        self.diagonals[k][lo]
    }
}

fn validate_matrix_args(nmax: usize, alpha: f64, omega0: f64) -> Result<()> {
    if nmax == 0 {
        return Err(Error::Domain("matrix dimension must be at least 1".into()));
    }
    if !(alpha > -1.0) || !alpha.is_finite() {
        return Err(Error::Domain(format!(
            "matrix shape exponent must satisfy alpha > -1, got {alpha}"
        )));
    }
    if !(omega0 > 0.0) || !omega0.is_finite() {
        return Err(Error::Domain(format!(
            "energy scale must satisfy omega0 > 0, got {omega0}"
        )));
    }
    Ok(())
}

/// Tridiagonal matrix of the Hamiltonian over modes 0..nmax-1:
/// diagonal (alpha + 2n + 1) omega0, off-diagonal
/// -sqrt((n+1)(n+alpha+1)) omega0 under the positive-normalization sign
/// convention.
pub fn hamiltonian_matrix(nmax: usize, alpha: f64, omega0: f64) -> Result<BandedOperator> {
    validate_matrix_args(nmax, alpha, omega0)?;
    let diag: Vec<f64> = (0..nmax)
        .map(|n| alpha + 2.0 * n as f64 + 1.0)
        .collect();
    let off: Vec<f64> = (0..nmax.saturating_sub(1))
        .map(|n| {
            let nf = n as f64;
            -((nf + 1.0) * (nf + alpha + 1.0)).sqrt()
        })
        .collect();
    Ok(BandedOperator {
        dim: nmax,
        half_bandwidth: 1,
        omega0,
        unit_power: 1,
        diagonals: vec![diag, off],
    })
}

/// Pentadiagonal matrix of the squared Hamiltonian. Entries are the exact
/// infinite-basis elements (band convolution of the tridiagonal matrix), not
/// the square of a truncation, so edge rows are exact too.
pub fn hamiltonian_sq_matrix(nmax: usize, alpha: f64, omega0: f64) -> Result<BandedOperator> {
    validate_matrix_args(nmax, alpha, omega0)?;
    let s = |n: f64| ((n + 1.0) * (n + alpha + 1.0)).sqrt();
    let diag: Vec<f64> = (0..nmax)
        .map(|n| {
            let nf = n as f64;
            (nf + 1.0) * (alpha + nf + 1.0)
                + (alpha + 2.0 * nf + 1.0).powi(2)
                + nf * (alpha + nf)
        })
        .collect();
    let off1: Vec<f64> = (0..nmax.saturating_sub(1))
        .map(|n| {
            let nf = n as f64;
            -2.0 * (alpha + 2.0 * nf + 2.0) * s(nf)
        })
        .collect();
    let off2: Vec<f64> = (0..nmax.saturating_sub(2))
        .map(|n| {
            let nf = n as f64;
            s(nf) * s(nf + 1.0)
        })
        .collect();
    Ok(BandedOperator {
        dim: nmax,
        half_bandwidth: 2,
        omega0,
        unit_power: 2,
        diagonals: vec![diag, off1, off2],
    })
}

/// First two energy moments and the variance of a mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyMoments {
    /// <H> = (alpha + 2n + 1) omega0.
    pub mean: f64,
    /// <H^2> = [(n+1)(alpha+n+1) + (alpha+2n+1)^2 + n(alpha+n)] omega0^2.
    pub second: f64,
    /// (Delta H)^2 = [(n+1)(alpha+n+1) + n(alpha+n)] omega0^2.
    pub var: f64,
}

pub fn energy_moments(mode: &ModeSpec) -> EnergyMoments {
    let n = f64::from(mode.n());
    let a = mode.alpha();
    let w0 = mode.omega0();
    let mean = (a + 2.0 * n + 1.0) * w0;
    let var = ((n + 1.0) * (a + n + 1.0) + n * (a + n)) * w0 * w0;
    EnergyMoments {
        mean,
        second: var + mean * mean,
        var,
    }
}

/// Eigen-decomposition of a truncated Hamiltonian.
#[derive(Debug, Clone)]
pub struct SpectrumResult {
    /// Ascending eigenvalues in physical units.
    pub eigenvalues: Vec<f64>,
    /// Orthonormal eigenvectors (mode-basis coefficients), paired with
    /// `eigenvalues`.
    pub eigenvectors: Vec<Vec<f64>>,
    pub truncation_dim: usize,
}

/// Spectrum of the nmax x nmax Hamiltonian truncation.
pub fn spectrum_truncated(nmax: usize, alpha: f64, omega0: f64) -> Result<SpectrumResult> {
    if !(2..=2048).contains(&nmax) {
        return Err(Error::Domain(format!(
            "truncation dimension must lie in 2..=2048, got {nmax}"
        )));
    }
    validate_matrix_args(nmax, alpha, omega0)?;
    let h = hamiltonian_matrix(nmax, alpha, 1.0)?;
    let diag = h.diagonals[0].clone();
    let off = h.diagonals[1].clone();
    let eig = eigh_tridiagonal(&diag, &off)?;

    // Residual check ||H v - E v|| <= 1e-9 ||H|| per pair.
    let mut norm = 0.0f64;
    for i in 0..nmax {
        let mut row = diag[i].abs();
        if i > 0 {
            row += off[i - 1].abs();
        }
        if i + 1 < nmax {
            row += off[i].abs();
        }
        norm = norm.max(row);
    }
    for (k, (lambda, v)) in eig.values.iter().zip(&eig.vectors).enumerate() {
        let mut worst = 0.0f64;
        for i in 0..nmax {
            let mut r = diag[i] * v[i] - lambda * v[i];
            if i > 0 {
                r += off[i - 1] * v[i - 1];
            }
            if i + 1 < nmax {
                r += off[i] * v[i + 1];
            }
            worst = worst.max(r.abs());
        }
        if worst > 1e-9 * norm {
            return Err(Error::Numeric(format!(
                "spectrum residual {worst:.3e} for eigenpair {k} exceeds 1e-9 * ||H||"
            )));
        }
    }

    Ok(SpectrumResult {
        eigenvalues: eig.values.iter().map(|e| e * omega0).collect(),
        eigenvectors: eig.vectors,
        truncation_dim: nmax,
    })
}

/// Quadrature value of the matrix element <m| omega^power |n> in omega0 = 1
/// units (power 1 or 2), the independent oracle for the banded matrices.
///
/// Only the f64 node positions are taken from the cached rule. The
/// Christoffel weights and the polynomial x^power L_m L_n are both rebuilt
/// in double-double from one recurrence pass per node, so a vanishing
/// out-of-band element resolves far below the f64 roundoff floor (Gaussian
/// rules are stationary under node perturbations when the weights follow the
/// Christoffel function, leaving the node error at second order).
pub fn band_element_quadrature(m: u32, n: u32, power: u32, alpha: f64) -> Result<f64> {
    if power == 0 || power > 2 {
        return Err(Error::Usage(format!(
            "band elements carry omega^1 or omega^2, got power {power}"
        )));
    }
    let order = ((m + n + 2 * power) / 2 + 6) as usize;
    let rule = gauss_laguerre_rule(order, alpha)?;
    // Normalizations enter as one common scale factor, harmless to the
    // cancellation; everything node-dependent stays in double-double.
    let mf = f64::from(m);
    let nf = f64::from(n);
    let ln_pref = 0.5 * (log_gamma(mf + 1.0)? - log_gamma(mf + alpha + 1.0)?)
        + 0.5 * (log_gamma(nf + 1.0)? - log_gamma(nf + alpha + 1.0)?)
        + rule.ln_mass();
    let jmax = (order - 1).max(m as usize).max(n as usize);
    let mut acc = Dd::ZERO;
    for &node in rule.nodes() {
        // Polish the node to double-double accuracy: Newton on L_order(x),
        // with x L' = order L_order - (order + alpha) L_{order-1}.
        let mut x = Dd::from_f64(node);
        for _ in 0..3 {
            let chain = dd_laguerre_chain(alpha, x, order, order, m as usize, n as usize);
            let slope = chain
                .l_top
                .mul_f64(order as f64)
                .add(chain.l_top_prev.mul_f64(-(order as f64 + alpha)))
                .div(x);
            x = x.add(chain.l_top.div(slope).mul_f64(-1.0));
        }
        let chain = dd_laguerre_chain(alpha, x, jmax, order, m as usize, n as usize);
        let mut term = chain.l_m.mul(chain.l_n);
        for _ in 0..power {
            term = term.mul(x);
        }
        acc = acc.add(term.div(chain.weight_denominator));
    }
    Ok(ln_pref.exp() * acc.to_f64())
}

struct DdChain {
    /// 1 / normalized Christoffel weight: sum_{j<order} s_j L_j(x)^2 with
    /// s_j = Gamma(alpha+1) j! / Gamma(j+alpha+1).
    weight_denominator: Dd,
    l_m: Dd,
    l_n: Dd,
    /// L_jmax and L_{jmax-1}, for Newton polishing.
    l_top: Dd,
    l_top_prev: Dd,
}

fn dd_laguerre_chain(
    alpha: f64,
    x: Dd,
    jmax: usize,
    order: usize,
    m: usize,
    n: usize,
) -> DdChain {
    let neg_x = x.mul_f64(-1.0);
    let mut l_prev = Dd::ZERO;
    let mut l_cur = Dd::from_f64(1.0);
    let mut s = Dd::from_f64(1.0);
    let mut out = DdChain {
        weight_denominator: Dd::ZERO,
        l_m: Dd::ZERO,
        l_n: Dd::ZERO,
        l_top: Dd::ZERO,
        l_top_prev: Dd::ZERO,
    };
    for j in 0..=jmax {
        if j > 0 {
            let jf = j as f64;
            let c = Dd::from_f64(2.0 * (jf - 1.0) + alpha + 1.0).add(neg_x);
            let next = c
                .mul(l_cur)
                .add(l_prev.mul_f64(-(jf - 1.0 + alpha)))
                .div_f64(jf);
            l_prev = l_cur;
            l_cur = next;
            s = s.mul_f64(jf).div_f64(jf + alpha);
        }
        if j < order {
            out.weight_denominator = out.weight_denominator.add(s.mul(l_cur).mul(l_cur));
        }
        if j == m {
            out.l_m = l_cur;
        }
        if j == n {
            out.l_n = l_cur;
        }
    }
    out.l_top = l_cur;
    out.l_top_prev = l_prev;
    out
}

/// Overlap integral of phi_l^(alpha-2) with phi_n^alpha, evaluated by a
/// generalized Gauss-Laguerre rule with weight exponent alpha - 1 (the
/// product integrand carries omega^(alpha-1) e^(-omega)). Dimensionless, so
/// independent of omega0.
pub fn cross_alpha_overlap(l: u32, n: u32, alpha: f64, omega0: f64) -> Result<f64> {
    if alpha < 2.0 {
        return Err(Error::Domain(format!(
            "cross-alpha overlaps need alpha >= 2, got {alpha}"
        )));
    }
    if !(omega0 > 0.0) || !omega0.is_finite() {
        return Err(Error::Domain(format!(
            "energy scale must satisfy omega0 > 0, got {omega0}"
        )));
    }
    let order = (l + n + 8) as usize;
    let rule = gauss_laguerre_rule(order, alpha - 1.0)?;
    let lf = f64::from(l);
    let nf = f64::from(n);
    // c_l^(alpha-2) c_n^alpha Gamma(alpha) in log space (omega0 cancels).
    let ln_pref = 0.5 * (log_gamma(lf + 1.0)? - log_gamma(lf + alpha - 1.0)?)
        + 0.5 * (log_gamma(nf + 1.0)? - log_gamma(nf + alpha + 1.0)?)
        + rule.ln_mass();
    let sum = rule.integrate_weighted_normalized(|x| {
        laguerre_unchecked(l, alpha - 2.0, x) * laguerre_unchecked(n, alpha, x)
    });
    Ok(ln_pref.exp() * sum)
}

/// Time moments of a packet. Three routes to the variance are kept: the
/// closed form from the derivative expansion with the full lower-mode ladder,
/// the variant keeping only the adjacent (n-1) ladder term, and the
/// independent quadrature of the squared mode derivative.
#[derive(Debug, Clone, Copy)]
pub struct TimeMoments {
    /// <T> = tau (units omega0^-1).
    pub mean: f64,
    /// <T^2> = tau^2 + var (units omega0^-2).
    pub second: f64,
    /// Authoritative variance: the closed form when it sits within
    /// `TIME_VARIANCE_GATE` of the quadrature, otherwise the quadrature.
    pub var: f64,
    /// Closed form with the full lower-mode ladder.
    pub var_closed: f64,
    /// Closed form keeping only the adjacent lower term.
    pub var_adjacent_ladder: f64,
    /// Quadrature of the squared derivative of the mode.
    pub var_quadrature: f64,
}

pub fn time_moments(packet: &PacketSpec) -> Result<TimeMoments> {
    let mode = packet.mode();
    if mode.alpha() < 2.0 {
        return Err(Error::Domain(format!(
            "closed-form time moments need alpha >= 2, got {}; sample the time \
             representation (timerep::time_moments_numeric) instead",
            mode.alpha()
        )));
    }
    let inv_w0_sq = 1.0 / (mode.omega0() * mode.omega0());
    let (var_closed, var_adjacent) = time_variance_closed(&mode)?;
    let var_quadrature = time_variance_quadrature(&mode)?;
    let var_closed = var_closed * inv_w0_sq;
    let var_adjacent = var_adjacent * inv_w0_sq;
    let var_quadrature = var_quadrature * inv_w0_sq;

    let rel = (var_closed - var_quadrature).abs() / var_quadrature.abs().max(f64::MIN_POSITIVE);
    let var = if rel <= TIME_VARIANCE_GATE {
        var_closed
    } else {
        var_quadrature
    };
    let tau = packet.tau();
    Ok(TimeMoments {
        mean: tau,
        second: tau * tau + var,
        var,
        var_closed,
        var_adjacent_ladder: var_adjacent,
        var_quadrature,
    })
}

/// The two closed-form variances (full ladder, adjacent-only ladder) in
/// omega0 = 1 units.
fn time_variance_closed(mode: &ModeSpec) -> Result<(f64, f64)> {
    let n = mode.n();
    let alpha = mode.alpha();
    let unit = ModeSpec::new(n, alpha, 1.0)?;
    let exp = unit.derivative_expansion()?;
    let cross = exp.cross_terms();
    let ladder = exp.lower_coefficients(); // -c_n/c_m, m = 0..n

    // Overlaps A[l][m] = <phi_l^(alpha-2), phi_m^alpha> for l, m <= n.
    let nn = n as usize;
    let mut overlaps = vec![vec![0.0; nn + 1]; nn + 1];
    for l in 0..=n {
        for m in 0..=n {
            overlaps[l as usize][m as usize] = cross_alpha_overlap(l, m, alpha, 1.0)?;
        }
    }

    let base = |upto_adjacent_only: bool| -> f64 {
        let mut v = 0.25;
        for &(_, nl) in cross {
            v += nl * nl;
        }
        for &(l, nl) in cross {
            v -= nl * overlaps[l as usize][nn];
        }
        let range: Box<dyn Iterator<Item = usize>> = if upto_adjacent_only {
            if nn == 0 {
                Box::new(std::iter::empty())
            } else {
                Box::new(std::iter::once(nn - 1))
            }
        } else {
            Box::new(0..nn)
        };
        for m in range {
            let kappa = -ladder[m]; // c_n / c_m > 0
            v += kappa * kappa;
            let mut cross_sum = 0.0;
            for &(l, nl) in cross {
                cross_sum += nl * overlaps[l as usize][m];
            }
            v -= 2.0 * kappa * cross_sum;
        }
        v
    };
    Ok((base(false), base(true)))
}

/// Quadrature of int (d phi_n^alpha / d omega)^2 d omega in omega0 = 1
/// units. The integrand is x^(alpha-2) e^(-x) Q(x)^2 with polynomial
/// Q(x) = (alpha - x)/2 L_n^alpha(x) - x L_{n-1}^(alpha+1)(x), so a rule with
/// weight exponent alpha - 2 integrates it exactly.
fn time_variance_quadrature(mode: &ModeSpec) -> Result<f64> {
    let n = mode.n();
    let alpha = mode.alpha();
    let nf = f64::from(n);
    let order = (n + 8) as usize;
    let rule = gauss_laguerre_rule(order, alpha - 2.0)?;
    let ln_pref = log_gamma(nf + 1.0)? - log_gamma(nf + alpha + 1.0)? + rule.ln_mass();
    let sum = rule.integrate_weighted_normalized(|x| {
        let q = 0.5 * (alpha - x) * laguerre_unchecked(n, alpha, x)
            - if n == 0 {
                0.0
            } else {
                x * laguerre_unchecked(n - 1, alpha + 1.0, x)
            };
        q * q
    });
    Ok(ln_pref.exp() * sum)
}

/// Per-mode record of energy and time moments, the uncertainty product, and
/// every closed-form-vs-oracle residual.
#[derive(Debug, Clone)]
pub struct UncertaintyReport {
    pub mode: ModeSpec,
    pub mean_h: f64,
    pub second_h: f64,
    pub var_h: f64,
    pub mean_t: f64,
    pub second_t: f64,
    pub var_t: f64,
    /// sqrt(var_h var_t), dimensionless with hbar = 1.
    pub product: f64,
    pub oracle_residuals: BTreeMap<String, f64>,
}

pub fn uncertainty_report(mode: &ModeSpec, tau: f64) -> Result<UncertaintyReport> {
    if mode.alpha() < 2.0 {
        return Err(Error::Domain(format!(
            "the uncertainty chain needs alpha >= 2, got {}",
            mode.alpha()
        )));
    }
    let em = energy_moments(mode);
    let (mean_q, second_q) = energy_moments_quadrature(mode)?;
    let packet = PacketSpec::new(*mode, tau)?;
    let tm = time_moments(&packet)?;

    let mut residuals = BTreeMap::new();
    let rel = |a: f64, b: f64| (a - b).abs() / b.abs().max(f64::MIN_POSITIVE);
    residuals.insert("energy_mean_rel".into(), rel(em.mean, mean_q));
    residuals.insert("energy_second_rel".into(), rel(em.second, second_q));
    residuals.insert(
        "energy_var_rel".into(),
        rel(em.var, second_q - mean_q * mean_q),
    );
    residuals.insert(
        "time_var_closed_vs_quadrature_rel".into(),
        rel(tm.var_closed, tm.var_quadrature),
    );
    residuals.insert(
        "time_var_adjacent_vs_quadrature_rel".into(),
        rel(tm.var_adjacent_ladder, tm.var_quadrature),
    );

    let product = (em.var * tm.var).sqrt();
    residuals.insert("heisenberg_margin".into(), product - 0.5);
    debug_assert!(product >= 0.5 - 1e-9);

    Ok(UncertaintyReport {
        mode: *mode,
        mean_h: em.mean,
        second_h: em.second,
        var_h: em.var,
        mean_t: tm.mean,
        second_t: tm.second,
        var_t: tm.var,
        product,
        oracle_residuals: residuals,
    })
}

/// Quadrature values of <H> and <H^2> in physical units.
fn energy_moments_quadrature(mode: &ModeSpec) -> Result<(f64, f64)> {
    let n = mode.n();
    let alpha = mode.alpha();
    let nf = f64::from(n);
    let rule = gauss_laguerre_rule((n + 4) as usize, alpha)?;
    let ln_pref = log_gamma(nf + 1.0)? - log_gamma(nf + alpha + 1.0)? + rule.ln_mass();
    let pref = ln_pref.exp();
    let mean = pref
        * rule.integrate_weighted_normalized(|x| {
            let l = laguerre_unchecked(n, alpha, x);
            x * l * l
        });
    let second = pref
        * rule.integrate_weighted_normalized(|x| {
            let l = laguerre_unchecked(n, alpha, x);
            x * x * l * l
        });
    Ok((mean * mode.omega0(), second * mode.omega0() * mode.omega0()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::integrate_halfline;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use num_complex::Complex64;

    #[test]
    fn hamiltonian_entries() {
        let h = hamiltonian_matrix(6, 2.0, 1.0).unwrap();
        assert_eq!(h.dim(), 6);
        assert_eq!(h.half_bandwidth(), 1);
        assert_relative_eq!(h.element(0, 0), 3.0, max_relative = 1e-15);
        assert_relative_eq!(h.element(0, 1), -(3.0f64.sqrt()), max_relative = 1e-14);
        assert_relative_eq!(h.element(1, 0), h.element(0, 1), max_relative = 1e-15);
        assert_eq!(h.element(0, 2), 0.0);
        assert_eq!(h.element(0, 9), 0.0);

        let h = hamiltonian_matrix(6, 20.0, 1.0).unwrap();
        assert_relative_eq!(h.element(3, 3), 27.0, max_relative = 1e-15);
        let h = hamiltonian_matrix(2, 20.0, 2.0).unwrap();
        assert_relative_eq!(h.element(0, 0), 42.0, max_relative = 1e-15);
    }

    #[test]
    fn hamiltonian_matches_quadrature() {
        for &alpha in &[2.0, 20.0] {
            let nmax = 9usize;
            let h = hamiltonian_matrix(nmax, alpha, 1.0).unwrap();
            let rule = gauss_laguerre_rule(2 * nmax + 8, alpha).unwrap();
            for m in 0..nmax {
                for n in m..nmax {
                    let pm = ModeSpec::new(m as u32, alpha, 1.0).unwrap();
                    let pn = ModeSpec::new(n as u32, alpha, 1.0).unwrap();
                    let q = integrate_halfline(
                        |w| Complex64::new(w * pm.eval_energy(w) * pn.eval_energy(w), 0.0),
                        &rule,
                        1.0,
                    )
                    .unwrap()
                    .re;
                    assert_abs_diff_eq!(h.element(m, n), q, epsilon = 1e-11);
                }
            }
        }
    }

    #[test]
    fn hamiltonian_sq_entries_and_quadrature() {
        let h2 = hamiltonian_sq_matrix(6, 2.0, 1.0).unwrap();
        assert_relative_eq!(h2.element(0, 0), 12.0, max_relative = 1e-14);
        assert_relative_eq!(h2.element(1, 1), 36.0, max_relative = 1e-14);
        let rule = gauss_laguerre_rule(24, 2.0).unwrap();
        let p0 = ModeSpec::new(0, 2.0, 1.0).unwrap();
        let p2 = ModeSpec::new(2, 2.0, 1.0).unwrap();
        let q = integrate_halfline(
            |w| Complex64::new(w * w * p0.eval_energy(w) * p2.eval_energy(w), 0.0),
            &rule,
            1.0,
        )
        .unwrap()
        .re;
        assert_abs_diff_eq!(h2.element(0, 2), q, epsilon = 1e-11);
        // omega0 scaling in units of omega0^2.
        let h2s = hamiltonian_sq_matrix(2, 2.0, 3.0).unwrap();
        assert_relative_eq!(h2s.element(0, 0), 12.0 * 9.0, max_relative = 1e-14);
    }

    #[test]
    fn squared_matrix_is_matrix_square_inside_band() {
        // Away from the truncation edge, the pentadiagonal entries equal the
        // band convolution of the tridiagonal matrix with itself.
        for &alpha in &[2.0, 20.0] {
            let nmax = 12usize;
            let h = hamiltonian_matrix(nmax, alpha, 1.0).unwrap();
            let h2 = hamiltonian_sq_matrix(nmax, alpha, 1.0).unwrap();
            for m in 0..nmax - 2 {
                for n in 0..nmax - 2 {
                    let mut conv = 0.0;
                    for k in 0..nmax {
                        conv += h.element(m, k) * h.element(k, n);
                    }
                    assert_abs_diff_eq!(h2.element(m, n), conv, epsilon = 1e-10);
                }
            }
        }
    }

    #[test]
    fn band_element_oracle() {
        // In-band elements match the closed entries; out-of-band elements
        // vanish well below the plain-f64 floor.
        for &alpha in &[2.0, 20.0] {
            let h1 = hamiltonian_matrix(8, alpha, 1.0).unwrap();
            let h2 = hamiltonian_sq_matrix(8, alpha, 1.0).unwrap();
            for m in 0..8u32 {
                for n in m..8u32 {
                    let q1 = band_element_quadrature(m, n, 1, alpha).unwrap();
                    let q2 = band_element_quadrature(m, n, 2, alpha).unwrap();
                    assert_relative_eq!(
                        q1,
                        h1.element(m as usize, n as usize),
                        max_relative = 1e-12,
                        epsilon = 1e-12
                    );
                    assert_relative_eq!(
                        q2,
                        h2.element(m as usize, n as usize),
                        max_relative = 1e-12,
                        epsilon = 1e-12
                    );
                }
            }
        }
        // A far out-of-band element at large indices stays essentially zero.
        let leak = band_element_quadrature(22, 25, 2, 20.0).unwrap();
        assert!(leak.abs() <= 1e-12, "leak {leak:e}");
        assert!(band_element_quadrature(0, 0, 3, 2.0).is_err());
    }

    #[test]
    fn energy_moment_values() {
        let m = ModeSpec::new(0, 2.0, 1.0).unwrap();
        let em = energy_moments(&m);
        assert_eq!((em.mean, em.second, em.var), (3.0, 12.0, 3.0));

        let m = ModeSpec::new(1, 2.0, 1.0).unwrap();
        assert_eq!(energy_moments(&m).var, 11.0);

        let m = ModeSpec::new(0, 20.0, 2.0).unwrap();
        assert_eq!(energy_moments(&m).mean, 42.0);
    }

    #[test]
    fn energy_moments_match_quadrature() {
        for &alpha in &[2.0, 20.0] {
            for n in 0..=20u32 {
                let m = ModeSpec::new(n, alpha, 1.0).unwrap();
                let em = energy_moments(&m);
                let (mean_q, second_q) = energy_moments_quadrature(&m).unwrap();
                assert_relative_eq!(em.mean, mean_q, max_relative = 1e-11);
                assert_relative_eq!(em.second, second_q, max_relative = 1e-11);
            }
        }
    }

    #[test]
    fn variance_identity_row_sums() {
        // (Delta H)^2_n = sum_{m != n} (d1_{mn})^2.
        for &alpha in &[2.0, 20.0] {
            let h = hamiltonian_matrix(32, alpha, 1.0).unwrap();
            for n in 0..=20usize {
                let m = ModeSpec::new(n as u32, alpha, 1.0).unwrap();
                let var = energy_moments(&m).var;
                let sum = h.element(n, n + 1).powi(2)
                    + if n > 0 { h.element(n, n - 1).powi(2) } else { 0.0 };
                assert_relative_eq!(var, sum, max_relative = 1e-10);
            }
        }
    }

    #[test]
    fn spectrum_two_by_two() {
        let s = spectrum_truncated(2, 2.0, 1.0).unwrap();
        assert_abs_diff_eq!(s.eigenvalues[0], 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.eigenvalues[1], 6.0, epsilon = 1e-12);
        assert_eq!(s.truncation_dim, 2);
        // Trace preservation for arbitrary alpha.
        let s = spectrum_truncated(2, 7.3, 1.0).unwrap();
        assert_relative_eq!(
            s.eigenvalues.iter().sum::<f64>(),
            (7.3 + 1.0) + (7.3 + 3.0),
            max_relative = 1e-13
        );
    }

    #[test]
    fn spectrum_positivity_and_shrinking_bottom() {
        let mut previous_min = f64::INFINITY;
        for &nmax in &[50usize, 100, 200] {
            let s = spectrum_truncated(nmax, 2.0, 1.0).unwrap();
            assert!(s.eigenvalues.iter().all(|&e| e > 0.0));
            assert!(s.eigenvalues[0] < previous_min);
            previous_min = s.eigenvalues[0];
        }
    }

    #[test]
    fn spectrum_eigenvector_orthonormality() {
        let s = spectrum_truncated(60, 2.0, 1.0).unwrap();
        for a in 0..60 {
            for b in a..60 {
                let dot: f64 = s.eigenvectors[a]
                    .iter()
                    .zip(&s.eigenvectors[b])
                    .map(|(x, y)| x * y)
                    .sum();
                let want = if a == b { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(dot, want, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn spectrum_bounds() {
        assert!(spectrum_truncated(1, 2.0, 1.0).is_err());
        assert!(spectrum_truncated(2049, 2.0, 1.0).is_err());
    }

    #[test]
    fn cross_alpha_overlap_values() {
        // <phi_0^0, phi_0^2> = c_0^0 c_0^2 Gamma(2) = 1/sqrt(2).
        assert_relative_eq!(
            cross_alpha_overlap(0, 0, 2.0, 1.0).unwrap(),
            std::f64::consts::FRAC_1_SQRT_2,
            max_relative = 1e-13
        );
        // Dimensionless: omega0 drops out.
        assert_relative_eq!(
            cross_alpha_overlap(3, 2, 4.0, 1.0).unwrap(),
            cross_alpha_overlap(3, 2, 4.0, 5.0).unwrap(),
            max_relative = 1e-14
        );
        // Frozen exact values.
        assert_relative_eq!(
            cross_alpha_overlap(1, 0, 4.0, 1.0).unwrap(),
            -0.5,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            cross_alpha_overlap(2, 3, 2.0, 1.0).unwrap(),
            0.223_606_797_749_978_97,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            cross_alpha_overlap(4, 4, 20.0, 1.0).unwrap(),
            0.808_693_704_220_811_16,
            max_relative = 1e-12
        );
        assert!(cross_alpha_overlap(0, 0, 1.5, 1.0).is_err());
    }

    #[test]
    fn cross_alpha_overlap_vs_dense_trapezoid() {
        // Independent dense-grid check of the (1, 0, alpha=4) value.
        let l = ModeSpec::new(1, 2.0, 1.0).unwrap();
        let n = ModeSpec::new(0, 4.0, 1.0).unwrap();
        let pts = 1_000_000usize;
        let hi = 80.0;
        let h = hi / pts as f64;
        let mut sum = 0.0;
        for i in 0..=pts {
            let w = i as f64 * h;
            let v = l.eval_energy(w) * n.eval_energy(w);
            sum += if i == 0 || i == pts { 0.5 * v } else { v };
        }
        sum *= h;
        assert_abs_diff_eq!(
            cross_alpha_overlap(1, 0, 4.0, 1.0).unwrap(),
            sum,
            epsilon = 1e-8
        );
    }

    #[test]
    fn time_moment_values() {
        let m = ModeSpec::new(0, 2.0, 1.0).unwrap();
        let p = PacketSpec::new(m, 2.5).unwrap();
        let tm = time_moments(&p).unwrap();
        assert_eq!(tm.mean, 2.5);
        assert_relative_eq!(tm.var, 0.25, max_relative = 1e-11);
        assert_relative_eq!(tm.second, 2.5 * 2.5 + 0.25, max_relative = 1e-11);

        // 1/(4(alpha-1)) for the lowest mode.
        let m = ModeSpec::new(0, 20.0, 1.0).unwrap();
        let tm = time_moments(&PacketSpec::new(m, 0.0).unwrap()).unwrap();
        assert_relative_eq!(tm.var, 1.0 / 76.0, max_relative = 1e-11);
    }

    #[test]
    fn time_variance_routes_agree() {
        let frozen = [
            (1u32, 2.0, 0.583_333_333_333_333_33),
            (2, 2.0, 0.916_666_666_666_666_67),
            (3, 2.0, 1.25),
            (6, 2.0, 2.25),
            (2, 4.0, 0.35),
            (6, 4.0, 0.883_333_333_333_333_33),
            (3, 20.0, 0.088_345_864_661_654_135),
            (6, 20.0, 0.163_533_834_586_466_17),
        ];
        for (n, alpha, want) in frozen {
            let m = ModeSpec::new(n, alpha, 1.0).unwrap();
            let tm = time_moments(&PacketSpec::new(m, 0.0).unwrap()).unwrap();
            assert_relative_eq!(tm.var_closed, want, max_relative = 1e-11);
            assert_relative_eq!(tm.var_adjacent_ladder, want, max_relative = 1e-11);
            assert_relative_eq!(tm.var_quadrature, want, max_relative = 1e-11);
        }
    }

    #[test]
    fn time_moments_scale_with_omega0() {
        let m = ModeSpec::new(2, 2.0, 4.0).unwrap();
        let tm = time_moments(&PacketSpec::new(m, 0.0).unwrap()).unwrap();
        let m1 = ModeSpec::new(2, 2.0, 1.0).unwrap();
        let tm1 = time_moments(&PacketSpec::new(m1, 0.0).unwrap()).unwrap();
        assert_relative_eq!(tm.var, tm1.var / 16.0, max_relative = 1e-12);
    }

    #[test]
    fn time_moments_reject_small_alpha() {
        let m = ModeSpec::new(2, 1.5, 1.0).unwrap();
        let err = time_moments(&PacketSpec::new(m, 0.0).unwrap()).unwrap_err();
        assert!(err.to_string().contains("timerep"));
    }

    #[test]
    fn uncertainty_report_values() {
        let m = ModeSpec::new(0, 2.0, 1.0).unwrap();
        let r = uncertainty_report(&m, 0.0).unwrap();
        assert_relative_eq!(r.product, 3.0f64.sqrt() * 0.5, max_relative = 1e-10);
        assert!(r.product >= 0.5 - 1e-9);
        assert!(r.oracle_residuals["time_var_closed_vs_quadrature_rel"] <= 1e-9);
        assert!(r.oracle_residuals["energy_mean_rel"] <= 1e-11);

        // Asymptotic regime: within 1e-4 of 1/2 at alpha = 1e4.
        let m = ModeSpec::new(0, 1.0e4, 1.0).unwrap();
        let r = uncertainty_report(&m, 0.0).unwrap();
        assert_abs_diff_eq!(r.product, 0.5, epsilon = 1e-4);
        assert_relative_eq!(r.product, 0.500_050_002_500_25, max_relative = 1e-9);
    }
}
