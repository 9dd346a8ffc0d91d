//! Time-of-arrival amplitudes for massless particles in one dimension,
//! dispersion p(omega) = s omega.
//!
//! The overlap of a detector packet (n, tau) at position x with a basis mode
//! m has the closed form
//!
//!   A = psi_hat (i u)^(m+n) / (1 + i u)^(m+n+alpha+1)
//!       2F1(-m, -n; -m-n-alpha; (1 + u^2)/u^2),
//!
//! u = omega0 (tau - s x), psi_hat = (omega0 / sqrt(2 pi)) c_n c_m
//! Gamma(m+n+alpha+1) / (m! n!). The hypergeometric argument diverges as
//! u -> 0, so the terminating series is regrouped term by term into
//! u^(m+n-2k) (1 + u^2)^k monomials, each finite at u = 0; the amplitude then
//! vanishes identically at u = 0 for m != n. The regrouped form is the
//! contract here and is validated against direct quadrature of the overlap
//! integral.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::modes::{ModeSpec, PacketSpec};
use crate::quadrature::{fourier_halfline, Grid1D};
use crate::specfun::{laguerre_weighted, log_gamma};

/// Propagation direction of a massless mover.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Right,
    Left,
}

impl Direction {
    pub fn sign(self) -> f64 {
        match self {
            Direction::Right => 1.0,
            Direction::Left => -1.0,
        }
    }

    pub fn from_sign(s: i32) -> Result<Self> {
        match s {
            1 => Ok(Direction::Right),
            -1 => Ok(Direction::Left),
            other => Err(Error::Usage(format!(
                "direction must be +1 or -1, got {other}"
            ))),
        }
    }
}

/// A detector packet (n, tau) at position x probing movers of direction s.
#[derive(Debug, Clone, Copy)]
pub struct ArrivalQuery {
    packet: PacketSpec,
    x: f64,
    direction: Direction,
}

impl ArrivalQuery {
    pub fn new(packet: PacketSpec, x: f64, direction: Direction) -> Result<Self> {
        if !x.is_finite() {
            return Err(Error::Domain(format!(
                "detector position must be finite, got {x}"
            )));
        }
        Ok(Self {
            packet,
            x,
            direction,
        })
    }

    pub fn packet(&self) -> PacketSpec {
        self.packet
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    /// The dimensionless lag u = omega0 (tau - s x) the amplitude depends on.
    pub fn lag(&self) -> f64 {
        let mode = self.packet.mode();
        mode.omega0() * (self.packet.tau() - self.direction.sign() * self.x)
    }
}

/// Expansion coefficients of a state over the modes phi_m^alpha.
#[derive(Debug, Clone)]
pub struct StateCoefficients {
    coefficients: Vec<Complex64>,
    alpha: f64,
    omega0: f64,
}

impl StateCoefficients {
    pub fn new(coefficients: Vec<Complex64>, alpha: f64, omega0: f64) -> Result<Self> {
        if coefficients
            .iter()
            .any(|c| !c.re.is_finite() || !c.im.is_finite())
        {
            return Err(Error::Domain("state coefficients must be finite".into()));
        }
        ModeSpec::new(0, alpha, omega0)?; // shared-basis validity
        Ok(Self {
            coefficients,
            alpha,
            omega0,
        })
    }

    /// As `new`, additionally checking unit norm within 1e-10.
    pub fn normalized(coefficients: Vec<Complex64>, alpha: f64, omega0: f64) -> Result<Self> {
        let state = Self::new(coefficients, alpha, omega0)?;
        let norm: f64 = state.coefficients.iter().map(|c| c.norm_sqr()).sum();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::Domain(format!(
                "state norm^2 = {norm} is not 1 within 1e-10"
            )));
        }
        Ok(state)
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn omega0(&self) -> f64 {
        self.omega0
    }
}

/// Arrival amplitude of the single basis mode m against the detector packet,
/// via the regrouped terminating series.
pub fn toa_amplitude_mode(query: &ArrivalQuery, m: u32) -> Complex64 {
    let mode = query.packet.mode();
    let n = mode.n();
    let alpha = mode.alpha();
    let u = query.lag();
    let mf = f64::from(m);
    let nf = f64::from(n);

    // psi_hat = (omega0 / sqrt(2 pi)) c_n c_m Gamma(m+n+alpha+1) / (m! n!);
    // the omega0 factors cancel against the normalizations.
    let ln_pref = -0.5 * (2.0 * std::f64::consts::PI).ln()
        + 0.5 * (log_gamma(nf + 1.0).unwrap() - log_gamma(nf + alpha + 1.0).unwrap())
        + 0.5 * (log_gamma(mf + 1.0).unwrap() - log_gamma(mf + alpha + 1.0).unwrap())
        + log_gamma(mf + nf + alpha + 1.0).unwrap()
        - log_gamma(mf + 1.0).unwrap()
        - log_gamma(nf + 1.0).unwrap();

    // sum_k C_k u^(m+n-2k) (1+u^2)^k with
    // C_k = (-m)_k (-n)_k / ((-m-n-alpha)_k k!); the exponent m+n-2k stays
    // >= |m-n|, so every term is finite at u = 0.
    let kmax = m.min(n);
    let one_plus_u2 = 1.0 + u * u;
    let mut series = 0.0f64;
    let mut coeff = 1.0f64;
    for k in 0..=kmax {
        let kf = f64::from(k);
        let power = (m + n - 2 * k) as i32;
        series += coeff * u.powi(power) * one_plus_u2.powi(k as i32);
        if k < kmax {
            coeff *= ((-mf + kf) * (-nf + kf)) / ((-mf - nf - alpha + kf) * (kf + 1.0));
        }
    }

    let i_pow = match (m + n) % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    };
    let denom = Complex64::new(1.0, u).powf(mf + nf + alpha + 1.0);
    i_pow * (ln_pref.exp() * series) / denom
}

/// Direct oscillatory quadrature of the defining overlap integral
/// (2 pi)^(-1/2) int_0^inf d omega e^(-i omega (tau - s x)) phi_n phi_m,
/// the independent oracle for the regrouped closed form. `order` is the
/// per-panel Gauss-Legendre order.
pub fn toa_amplitude_mode_quadrature(
    query: &ArrivalQuery,
    m: u32,
    order: usize,
) -> Result<Complex64> {
    let mode = query.packet.mode();
    let n = mode.n();
    let alpha = mode.alpha();
    let u = query.lag();
    // Envelope bound c_n c_m coeff_sums x^(alpha + n + m) e^(-x) fixes the
    // truncation point; the integrand decays at least like e^(-x/2) past
    // 2 (alpha + n + m).
    let mut ln_env = 0.0;
    for (idx, a) in [(n, alpha), (m, alpha)] {
        let f = f64::from(idx);
        ln_env += 0.5 * (log_gamma(f + 1.0)? - log_gamma(f + alpha + 1.0)?);
        let mut coeff_sum = 0.0;
        for j in 0..=idx {
            let jf = f64::from(j);
            coeff_sum += (log_gamma(f + a + 1.0)?
                - log_gamma(jf + a + 1.0)?
                - log_gamma(f - jf + 1.0)?
                - log_gamma(jf + 1.0)?)
            .exp();
        }
        ln_env += coeff_sum.ln();
    }
    let power = alpha + f64::from(n + m);
    let bound = |x: f64| (ln_env + power * x.ln() - x).exp();
    let mut x_max = (2.0 * power + 60.0).max(80.0);
    while 2.0 * bound(x_max) > 1e-13 && x_max < 4000.0 {
        x_max += 20.0;
    }
    let integral = fourier_halfline(
        |x| {
            laguerre_weighted(alpha, x, n).unwrap() * laguerre_weighted(alpha, x, m).unwrap()
        },
        u,
        1.0,
        x_max,
        order,
    )?;
    Ok(integral / (2.0 * std::f64::consts::PI).sqrt())
}

/// Arrival amplitude of a general state, by linearity over its mode
/// coefficients.
pub fn toa_amplitude_state(query: &ArrivalQuery, state: &StateCoefficients) -> Result<Complex64> {
    if state.coefficients.is_empty() {
        return Err(Error::Usage(
            "toa_amplitude_state requires at least one state coefficient".into(),
        ));
    }
    let mode = query.packet.mode();
    if state.alpha != mode.alpha() || state.omega0 != mode.omega0() {
        return Err(Error::Usage(format!(
            "state basis (alpha={}, omega0={}) does not match the detector basis (alpha={}, omega0={})",
            state.alpha,
            state.omega0,
            mode.alpha(),
            mode.omega0()
        )));
    }
    let mut total = Complex64::new(0.0, 0.0);
    for (m, &coeff) in state.coefficients.iter().enumerate() {
        if coeff != Complex64::new(0.0, 0.0) {
            total += coeff * toa_amplitude_mode(query, m as u32);
        }
    }
    Ok(total)
}

/// |<n tau x s|Psi>|^2 over a grid of detector times tau.
pub fn toa_density_scan(
    detector: &ModeSpec,
    x: f64,
    direction: Direction,
    state: &StateCoefficients,
    tau_grid: &Grid1D,
) -> Result<Vec<f64>> {
    tau_grid
        .points()
        .iter()
        .map(|&tau| {
            let packet = PacketSpec::new(*detector, tau)?;
            let query = ArrivalQuery::new(packet, x, direction)?;
            Ok(toa_amplitude_state(&query, state)?.norm_sqr())
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use proptest::prelude::*;

    fn query(n: u32, alpha: f64, tau: f64, x: f64, dir: Direction) -> ArrivalQuery {
        let mode = ModeSpec::new(n, alpha, 1.0).unwrap();
        ArrivalQuery::new(PacketSpec::new(mode, tau).unwrap(), x, dir).unwrap()
    }

    #[test]
    fn orthogonality_zero_at_coincidence() {
        // tau = s x makes u = 0; distinct modes overlap to an exact zero.
        let q = query(3, 2.0, 2.0, 2.0, Direction::Right);
        assert_eq!(q.lag(), 0.0);
        let a = toa_amplitude_mode(&q, 1);
        assert_eq!(a, Complex64::new(0.0, 0.0));
        // Equal modes stay nonzero: the m = n term carries u^0.
        let q = query(0, 2.0, 2.0, 2.0, Direction::Right);
        let a = toa_amplitude_mode(&q, 0);
        assert_relative_eq!(a.re, 0.398_942_280_401_432_68, max_relative = 1e-13);
        assert_eq!(a.im, 0.0);
        // 1/sqrt(2 pi): the overlap of |phi_0|^2 carried to the arrival side.
        assert_relative_eq!(
            a.re,
            1.0 / (2.0 * std::f64::consts::PI).sqrt(),
            max_relative = 1e-13
        );
    }

    #[test]
    fn frozen_amplitudes() {
        let cases = [
            (1u32, 3u32, 2.0, 2.0, 0.009_733_295_458_458_714, -0.093_305_384_050_052_5),
            (1, 3, 20.0, 0.5, 0.071_061_509_476_5, 0.104_853_785_307_24),
            (0, 0, 2.0, 1.0, -0.099_735_570_100_358_169, -0.099_735_570_100_358_169),
            (4, 2, 2.0, -3.5, -0.029_095_929_932_720_147, 0.039_333_185_442_254_682),
        ];
        for (m, n, alpha, u, re, im) in cases {
            // Realize the same u through tau with x = 0.
            let q = query(n, alpha, u, 0.0, Direction::Right);
            let a = toa_amplitude_mode(&q, m);
            assert_relative_eq!(a.re, re, max_relative = 1e-12, epsilon = 1e-15);
            assert_relative_eq!(a.im, im, max_relative = 1e-12, epsilon = 1e-15);
        }
    }

    #[test]
    fn amplitude_is_symmetric_in_mode_indices() {
        for &u in &[-2.3, 0.4, 5.0] {
            for (m, n) in [(0u32, 3u32), (2, 4), (1, 1)] {
                let a = toa_amplitude_mode(&query(n, 2.0, u, 0.0, Direction::Right), m);
                let b = toa_amplitude_mode(&query(m, 2.0, u, 0.0, Direction::Right), n);
                assert_relative_eq!(a.re, b.re, max_relative = 1e-13, epsilon = 1e-16);
                assert_relative_eq!(a.im, b.im, max_relative = 1e-13, epsilon = 1e-16);
            }
        }
    }

    #[test]
    fn direction_symmetry() {
        // The amplitude depends only on tau - s x.
        let a = toa_amplitude_mode(&query(3, 2.0, 1.0, 0.7, Direction::Right), 1);
        let b = toa_amplitude_mode(&query(3, 2.0, 1.0, -0.7, Direction::Left), 1);
        assert_eq!(a, b);
        let c = toa_amplitude_mode(&query(3, 2.0, 1.0, 0.7 + 2.0, Direction::Right), 1);
        let d = toa_amplitude_mode(&query(3, 2.0, 1.0 + 2.0, 0.7 + 4.0, Direction::Right), 1);
        assert_eq!(c, d);
    }

    #[test]
    fn state_linearity() {
        let q = query(3, 2.0, 1.4, 0.0, Direction::Right);
        // Single-coefficient state equals the bare mode amplitude.
        let mut coeffs = vec![Complex64::new(0.0, 0.0); 4];
        coeffs[3] = Complex64::new(1.0, 0.0);
        let state = StateCoefficients::normalized(coeffs, 2.0, 1.0).unwrap();
        let a = toa_amplitude_state(&q, &state).unwrap();
        let b = toa_amplitude_mode(&q, 3);
        assert_eq!(a, b);

        // A global phase passes through linearly.
        let phase = Complex64::from_polar(1.0, 0.87);
        let coeffs: Vec<Complex64> = (0..4)
            .map(|m| phase * Complex64::new(0.5, -0.1 * m as f64))
            .collect();
        let with_phase = StateCoefficients::new(coeffs.clone(), 2.0, 1.0).unwrap();
        let without: Vec<Complex64> = coeffs.iter().map(|c| c / phase).collect();
        let bare = StateCoefficients::new(without, 2.0, 1.0).unwrap();
        let va = toa_amplitude_state(&q, &with_phase).unwrap();
        let vb = toa_amplitude_state(&q, &bare).unwrap() * phase;
        assert_abs_diff_eq!(va.re, vb.re, epsilon = 1e-15);
        assert_abs_diff_eq!(va.im, vb.im, epsilon = 1e-15);
    }

    #[test]
    fn state_validation() {
        let q = query(3, 2.0, 1.4, 0.0, Direction::Right);
        let empty = StateCoefficients::new(vec![], 2.0, 1.0).unwrap();
        assert!(toa_amplitude_state(&q, &empty).is_err());
        let mismatched = StateCoefficients::new(vec![Complex64::new(1.0, 0.0)], 4.0, 1.0).unwrap();
        assert!(toa_amplitude_state(&q, &mismatched).is_err());
        assert!(
            StateCoefficients::normalized(vec![Complex64::new(0.7, 0.0)], 2.0, 1.0).is_err()
        );
        assert!(Direction::from_sign(0).is_err());
        assert_eq!(Direction::from_sign(-1).unwrap(), Direction::Left);
    }

    #[test]
    fn density_scan_shape() {
        let detector = ModeSpec::new(3, 2.0, 1.0).unwrap();
        let mut coeffs = vec![Complex64::new(0.0, 0.0); 2];
        coeffs[1] = Complex64::new(1.0, 0.0);
        let state = StateCoefficients::normalized(coeffs, 2.0, 1.0).unwrap();
        let grid = Grid1D::uniform(-8.0, 8.0, 161).unwrap();
        let scan = toa_density_scan(&detector, 0.0, Direction::Right, &state, &grid).unwrap();
        assert!(scan.iter().all(|&d| d >= 0.0));
        // Zero at tau = s x (u = 0 is the middle grid point).
        assert_eq!(scan[80], 0.0);
        // Shift invariance: (x, s) -> (x + dx, s) with the tau grid shifted.
        let shifted_grid = Grid1D::uniform(-8.0 + 2.5, 8.0 + 2.5, 161).unwrap();
        let shifted =
            toa_density_scan(&detector, 2.5, Direction::Right, &state, &shifted_grid).unwrap();
        for (a, b) in scan.iter().zip(&shifted) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-13);
        }
    }

    #[test]
    fn detector_matching_state_peaks_at_coincidence() {
        // With the state equal to the detector mode, the density over the
        // scan is maximal at tau = s x.
        let detector = ModeSpec::new(2, 2.0, 1.0).unwrap();
        let mut coeffs = vec![Complex64::new(0.0, 0.0); 3];
        coeffs[2] = Complex64::new(1.0, 0.0);
        let state = StateCoefficients::normalized(coeffs, 2.0, 1.0).unwrap();
        let grid = Grid1D::uniform(-6.0, 6.0, 241).unwrap();
        let scan = toa_density_scan(&detector, 0.0, Direction::Right, &state, &grid).unwrap();
        let (argmax, _) = scan
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .unwrap();
        assert_eq!(grid.points()[argmax], 0.0);
    }

    #[test]
    fn closed_form_matches_quadrature_oracle() {
        for &alpha in &[2.0, 20.0] {
            for (m, n) in [(0u32, 0u32), (1, 3), (4, 2), (3, 3)] {
                for &u in &[-4.0, -1.0, 0.0, 0.6, 3.3] {
                    let q = query(n, alpha, u, 0.0, Direction::Right);
                    let closed = toa_amplitude_mode(&q, m);
                    let quad = toa_amplitude_mode_quadrature(&q, m, 32).unwrap();
                    assert!(
                        (closed - quad).norm() <= 1e-8,
                        "m={m} n={n} alpha={alpha} u={u}: {closed} vs {quad}"
                    );
                }
            }
        }
    }

    proptest! {
        #[test]
        fn modulus_even_in_lag(u in -6.0f64..6.0, m in 0u32..5, n in 0u32..5) {
            let a = toa_amplitude_mode(&query(n, 2.0, u, 0.0, Direction::Right), m).norm();
            let b = toa_amplitude_mode(&query(n, 2.0, -u, 0.0, Direction::Right), m).norm();
            prop_assert!((a - b).abs() <= 1e-12 * a.max(b).max(1e-30));
        }
    }
}
