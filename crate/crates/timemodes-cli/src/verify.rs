//! Aggregated residual suite behind `timemodes verify`: every closed form in
//! the library against its independent oracle, with one named residual per
//! check and documented tolerances.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde_json::json;

use timemodes::arrival::{
    toa_amplitude_mode, toa_amplitude_mode_quadrature, ArrivalQuery, Direction,
};
use timemodes::modes::{ModeSpec, PacketSpec};
use timemodes::operators::{
    band_element_quadrature, energy_moments, hamiltonian_matrix, hamiltonian_sq_matrix,
    time_moments, uncertainty_report,
};
use timemodes::quadrature::{gauss_laguerre_rule, integrate_halfline, Grid1D};
use timemodes::timerep::{psi_closed_form, psi_numeric, time_moments_numeric};

use crate::CliError;

/// A named residual with its gate. `tolerance` of `None` marks a residual
/// reported for diagnosis only.
struct Check {
    name: &'static str,
    value: f64,
    tolerance: Option<f64>,
    /// true when the value must stay ABOVE the tolerance (margins).
    lower_bound: bool,
}

pub struct VerifyOutcome {
    pub report: serde_json::Value,
    pub pass: bool,
}

pub fn run_verify(alpha: f64, nmax: u32, omega0: f64) -> Result<VerifyOutcome, CliError> {
    if nmax > 64 {
        return Err(CliError::Usage(format!(
            "--nmax: the full suite supports nmax <= 64, got {nmax}"
        )));
    }
    if !(alpha >= 2.0) {
        return Err(CliError::Usage(format!(
            "--alpha: the uncertainty suite requires alpha >= 2, got {alpha}"
        )));
    }
    let mode = |n: u32| ModeSpec::new(n, alpha, omega0).map_err(CliError::from);
    let mut checks: Vec<Check> = Vec::new();

    // Orthonormality of the modes under the half-line rule.
    {
        let rule = gauss_laguerre_rule(2 * nmax as usize + 8, alpha)?;
        let mut worst = 0.0f64;
        for n in 0..=nmax {
            let pn = mode(n)?;
            for np in n..=nmax {
                let pq = mode(np)?;
                let v = integrate_halfline(
                    |w| Complex64::new(pn.eval_energy(w) * pq.eval_energy(w), 0.0),
                    &rule,
                    omega0,
                )?
                .re;
                let want = if n == np { 1.0 } else { 0.0 };
                worst = worst.max((v - want).abs());
            }
        }
        checks.push(Check {
            name: "orthonormality_max_abs",
            value: worst,
            tolerance: Some(1e-11),
            lower_bound: false,
        });
    }

    // Band structure: matrix elements vanish outside the band and match
    // quadrature inside it (dimensionless units; the oracle carries the
    // double-double polynomial path so near-zero elements resolve cleanly).
    {
        let dim = nmax as usize + 1;
        let h1 = hamiltonian_matrix(dim, alpha, omega0)?;
        let h2 = hamiltonian_sq_matrix(dim, alpha, omega0)?;
        let (mut leak1, mut leak2) = (0.0f64, 0.0f64);
        let (mut in1, mut in2) = (0.0f64, 0.0f64);
        for m in 0..dim {
            for n in m..dim {
                let q1 = band_element_quadrature(m as u32, n as u32, 1, alpha)?;
                let q2 = band_element_quadrature(m as u32, n as u32, 2, alpha)?;
                let rel1 =
                    (q1 - h1.dimensionless_element(m, n)).abs() / h1.dimensionless_element(m, n).abs().max(1.0);
                let rel2 =
                    (q2 - h2.dimensionless_element(m, n)).abs() / h2.dimensionless_element(m, n).abs().max(1.0);
                match n - m {
                    0 | 1 => {
                        in1 = in1.max(rel1);
                        in2 = in2.max(rel2);
                    }
                    2 => {
                        leak1 = leak1.max(q1.abs());
                        in2 = in2.max(rel2);
                    }
                    _ => {
                        leak1 = leak1.max(q1.abs());
                        leak2 = leak2.max(q2.abs());
                    }
                }
            }
        }
        checks.push(Check {
            name: "band_d1_leak_max_abs",
            value: leak1,
            tolerance: Some(1e-11),
            lower_bound: false,
        });
        checks.push(Check {
            name: "band_d2_leak_max_abs",
            value: leak2,
            tolerance: Some(1e-11),
            lower_bound: false,
        });
        checks.push(Check {
            name: "hamiltonian_vs_quadrature_max_rel",
            value: in1,
            tolerance: Some(1e-11),
            lower_bound: false,
        });
        checks.push(Check {
            name: "hamiltonian_sq_vs_quadrature_max_rel",
            value: in2,
            tolerance: Some(1e-10),
            lower_bound: false,
        });
    }

    // Energy moments and the variance identity.
    {
        let dim = nmax as usize + 2;
        let h1 = hamiltonian_matrix(dim, alpha, omega0)?;
        let mut moment_rel = 0.0f64;
        let mut var_rel = 0.0f64;
        for n in 0..=nmax {
            let m = mode(n)?;
            let em = energy_moments(&m);
            let r = uncertainty_report(&m, 0.0)?;
            moment_rel = moment_rel
                .max(r.oracle_residuals["energy_mean_rel"])
                .max(r.oracle_residuals["energy_second_rel"]);
            let nn = n as usize;
            let sum = h1.element(nn, nn + 1).powi(2)
                + if nn > 0 {
                    h1.element(nn, nn - 1).powi(2)
                } else {
                    0.0
                };
            var_rel = var_rel.max((em.var - sum).abs() / em.var);
        }
        checks.push(Check {
            name: "energy_moments_max_rel",
            value: moment_rel,
            tolerance: Some(1e-11),
            lower_bound: false,
        });
        checks.push(Check {
            name: "variance_identity_max_rel",
            value: var_rel,
            tolerance: Some(1e-10),
            lower_bound: false,
        });
    }

    // Closed-form wavefunction against the Fourier oracle.
    {
        let grid = Grid1D::uniform(-10.0 / omega0, 10.0 / omega0, 17).map_err(CliError::from)?;
        let mut worst = 0.0f64;
        for n in 0..=nmax.min(4) {
            let p = PacketSpec::new(mode(n)?, 0.0)?;
            let numeric = psi_numeric(&p, &grid, n as usize + 24)?;
            for (&t, &v) in grid.points().iter().zip(numeric.values()) {
                worst = worst.max((psi_closed_form(&p, t) - v).norm() * omega0.sqrt().recip());
            }
        }
        checks.push(Check {
            name: "psi_closed_vs_numeric_max_abs",
            value: worst,
            tolerance: Some(1e-6),
            lower_bound: false,
        });
    }

    // Time-variance chain: closed form against quadrature (gated) and the
    // adjacent-ladder variant (diagnostic).
    {
        let mut closed_rel = 0.0f64;
        let mut adjacent_rel = 0.0f64;
        for n in 0..=nmax.min(6) {
            let tm = time_moments(&PacketSpec::new(mode(n)?, 0.0)?)?;
            closed_rel =
                closed_rel.max((tm.var_closed - tm.var_quadrature).abs() / tm.var_quadrature);
            adjacent_rel = adjacent_rel
                .max((tm.var_adjacent_ladder - tm.var_quadrature).abs() / tm.var_quadrature);
        }
        checks.push(Check {
            name: "time_var_closed_vs_quadrature_max_rel",
            value: closed_rel,
            tolerance: Some(1e-9),
            lower_bound: false,
        });
        checks.push(Check {
            name: "time_var_adjacent_vs_quadrature_max_rel",
            value: adjacent_rel,
            tolerance: None,
            lower_bound: false,
        });
    }

    // Mean arrival of the packet sits at tau (time-domain oracle).
    {
        let tau = 1.5 / omega0;
        let p = PacketSpec::new(mode(nmax.min(2))?, tau)?;
        let grid = Grid1D::uniform(tau - 60.0 / omega0, tau + 60.0 / omega0, 12_001)
            .map_err(CliError::from)?;
        let m = time_moments_numeric(&p, &grid)?;
        checks.push(Check {
            name: "mean_time_abs_err",
            value: (m.mean - tau).abs() * omega0,
            tolerance: Some(1e-10),
            lower_bound: false,
        });
    }

    // Heisenberg margin over the tested modes.
    {
        let mut margin = f64::INFINITY;
        for n in 0..=nmax.min(8) {
            let r = uncertainty_report(&mode(n)?, 0.0)?;
            margin = margin.min(r.product - 0.5);
        }
        checks.push(Check {
            name: "heisenberg_margin_min",
            value: margin,
            tolerance: Some(-1e-9),
            lower_bound: true,
        });
    }

    // Arrival amplitudes: regrouped closed form against direct quadrature.
    {
        let mut worst = 0.0f64;
        for n in 0..=3u32 {
            for m in 0..=3u32 {
                for i in 0..11 {
                    let u = -4.0 + 0.8 * i as f64;
                    let packet = PacketSpec::new(mode(n)?, u / omega0)?;
                    let q = ArrivalQuery::new(packet, 0.0, Direction::Right)?;
                    let closed = toa_amplitude_mode(&q, m);
                    let oracle = toa_amplitude_mode_quadrature(&q, m, 32)?;
                    worst = worst.max((closed - oracle).norm());
                }
            }
        }
        checks.push(Check {
            name: "arrival_closed_vs_quadrature_max_abs",
            value: worst,
            tolerance: Some(1e-8),
            lower_bound: false,
        });
    }

    let mut residuals = BTreeMap::new();
    let mut pass = true;
    for c in &checks {
        residuals.insert(c.name.to_string(), c.value);
        if let Some(tol) = c.tolerance {
            let ok = if c.lower_bound {
                c.value >= tol
            } else {
                c.value <= tol
            };
            pass &= ok;
        }
    }

    let mut report = serde_json::Map::new();
    for (k, v) in &residuals {
        report.insert(k.clone(), json!(v));
    }
    report.insert("alpha".into(), json!(alpha));
    report.insert("nmax".into(), json!(nmax));
    report.insert("omega0".into(), json!(omega0));
    report.insert("pass".into(), json!(pass));
    report.insert("version".into(), json!(env!("CARGO_PKG_VERSION")));
    Ok(VerifyOutcome {
        report: serde_json::Value::Object(report),
        pass,
    })
}
