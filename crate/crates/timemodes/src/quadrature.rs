//! Gauss-Laguerre rules with exact polynomial degree, grid integrators, and a
//! panel-based half-line Fourier integrator.
//!
//! These are the independent oracles the closed forms elsewhere in the crate
//! are validated against.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::eigh_tridiagonal;
use crate::specfun::{laguerre_weighted_chain, log_gamma, ComplexKahan};

/// Largest supported rule order.
pub const MAX_ORDER: usize = 512;

/// Nodes and weights of a generalized Gauss-Laguerre rule for the weight
/// x^alpha e^(-x) on (0, inf).
///
/// Three weight sets are kept:
/// * `weights` — classical weights, summing to Gamma(alpha + 1);
/// * `normalized_weights` — classical weights divided by the total mass,
///   summing to 1 (these stay finite for arbitrarily large alpha, where the
///   classical weights saturate to infinity);
/// * `halfline_weights` — Christoffel weights 1 / sum_j phi_j(x_k)^2 for
///   integrating a plain (unweighted) function of the node values.
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    order: usize,
    alpha_weight: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    normalized_weights: Vec<f64>,
    halfline_weights: Vec<f64>,
    ln_mass: f64,
}

impl QuadratureRule {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn alpha_weight(&self) -> f64 {
        self.alpha_weight
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn normalized_weights(&self) -> &[f64] {
        &self.normalized_weights
    }

    pub fn halfline_weights(&self) -> &[f64] {
        &self.halfline_weights
    }

    /// ln Gamma(alpha_weight + 1), the logarithm of the total weight mass.
    pub fn ln_mass(&self) -> f64 {
        self.ln_mass
    }

    /// Integrates g(x) x^alpha e^(-x) over (0, inf); exact for polynomial g
    /// of degree <= 2 order - 1.
    pub fn integrate_weighted(&self, mut g: impl FnMut(f64) -> f64) -> f64 {
        let mut sum = 0.0f64;
        let mut comp = 0.0f64;
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            let y = w * g(x) - comp;
            let t = sum + y;
            comp = (t - sum) - y;
            sum = t;
        }
        sum
    }

    /// As `integrate_weighted` but against the unit-mass weight
    /// x^alpha e^(-x) / Gamma(alpha + 1); safe for very large alpha.
    pub fn integrate_weighted_normalized(&self, mut g: impl FnMut(f64) -> f64) -> f64 {
        let mut sum = 0.0f64;
        let mut comp = 0.0f64;
        for (&x, &w) in self.nodes.iter().zip(&self.normalized_weights) {
            let y = w * g(x) - comp;
            let t = sum + y;
            comp = (t - sum) - y;
            sum = t;
        }
        sum
    }
}

fn rule_cache() -> &'static Mutex<HashMap<(usize, u64), Arc<QuadratureRule>>> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, u64), Arc<QuadratureRule>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Builds (or fetches from the write-once cache) the generalized
/// Gauss-Laguerre rule of the given order via the Golub-Welsch eigenvalue
/// construction.
pub fn gauss_laguerre_rule(order: usize, alpha_weight: f64) -> Result<Arc<QuadratureRule>> {
    if order == 0 || order > MAX_ORDER {
        return Err(Error::Domain(format!(
            "quadrature order must lie in 1..={MAX_ORDER}, got {order}"
        )));
    }
    if !(alpha_weight > -1.0) || !alpha_weight.is_finite() {
        return Err(Error::Domain(format!(
            "weight exponent must satisfy alpha > -1, got {alpha_weight}"
        )));
    }
    let key = (order, alpha_weight.to_bits());
    let mut cache = rule_cache().lock().expect("rule cache poisoned");
    if let Some(rule) = cache.get(&key) {
        return Ok(Arc::clone(rule));
    }
    let rule = Arc::new(build_rule(order, alpha_weight)?);
    cache.insert(key, Arc::clone(&rule));
    Ok(rule)
}

fn build_rule(order: usize, alpha: f64) -> Result<QuadratureRule> {
    // Jacobi matrix of the monic recurrence: a_k = 2k + alpha + 1,
    // b_k = sqrt(k (k + alpha)).
    let diag: Vec<f64> = (0..order)
        .map(|k| 2.0 * k as f64 + alpha + 1.0)
        .collect();
    let off: Vec<f64> = (1..order)
        .map(|k| (k as f64 * (k as f64 + alpha)).sqrt())
        .collect();
    let eig = eigh_tridiagonal(&diag, &off)?;

    let nodes = eig.values;
    if nodes[0] <= 0.0 {
        return Err(Error::Numeric(format!(
            "Gauss-Laguerre node {} is not positive (order {order}, alpha {alpha})",
            nodes[0]
        )));
    }
    let ln_mass = log_gamma(alpha + 1.0)?;
    let mass = ln_mass.exp();
    let normalized_weights: Vec<f64> = eig.vectors.iter().map(|v| v[0] * v[0]).collect();
    let weights: Vec<f64> = normalized_weights.iter().map(|w| w * mass).collect();

    let norm_sum: f64 = normalized_weights.iter().sum();
    if (norm_sum - 1.0).abs() > 1e-12 {
        return Err(Error::Numeric(format!(
            "quadrature weights sum to {norm_sum}, expected 1 (order {order}, alpha {alpha})"
        )));
    }

    // Christoffel weights from the orthonormal weighted chain; unlike
    // w_k e^(x_k) x_k^(-alpha) this form never overflows.
    let mut halfline_weights = Vec::with_capacity(order);
    for &x in &nodes {
        let chain = laguerre_weighted_chain(alpha, x, order)?;
        let s: f64 = chain.iter().map(|v| v * v).sum();
        halfline_weights.push(1.0 / s);
    }

    Ok(QuadratureRule {
        order,
        alpha_weight: alpha,
        nodes,
        weights,
        normalized_weights,
        halfline_weights,
        ln_mass,
    })
}

/// Approximates the plain half-line integral of `f` over omega in (0, inf):
/// omega0 * sum_k hat w_k f(omega0 x_k), with the weight division folded into
/// the Christoffel weights. Exact when f(omega0 x) = p(x) x^alpha e^(-x) for
/// polynomial p of degree <= 2 order - 1.
pub fn integrate_halfline(
    mut f: impl FnMut(f64) -> Complex64,
    rule: &QuadratureRule,
    omega0: f64,
) -> Result<Complex64> {
    if !(omega0 > 0.0) || !omega0.is_finite() {
        return Err(Error::Domain(format!(
            "integrate_halfline requires omega0 > 0, got {omega0}"
        )));
    }
    let mut acc = ComplexKahan::default();
    for (&x, &w) in rule.nodes().iter().zip(rule.halfline_weights()) {
        let v = f(omega0 * x);
        if !v.re.is_finite() || !v.im.is_finite() {
            return Err(Error::Numeric(format!(
                "integrate_halfline: non-finite sample at omega = {}",
                omega0 * x
            )));
        }
        acc.add(v * w);
    }
    Ok(acc.value() * omega0)
}

/// Strictly increasing 1D grid (time or energy axis).
#[derive(Debug, Clone, PartialEq)]
pub struct Grid1D {
    points: Vec<f64>,
}

impl Grid1D {
    pub fn new(points: Vec<f64>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::Usage(format!(
                "a grid needs at least 2 points, got {}",
                points.len()
            )));
        }
        if points.iter().any(|p| !p.is_finite()) {
            return Err(Error::Domain("grid points must be finite".into()));
        }
        if points.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Usage("grid points must be strictly increasing".into()));
        }
        Ok(Self { points })
    }

    /// Uniform grid with `count` points covering [min, max].
    pub fn uniform(min: f64, max: f64, count: usize) -> Result<Self> {
        if count < 2 {
            return Err(Error::Usage(format!(
                "a grid needs at least 2 points, got {count}"
            )));
        }
        if !(min < max) || !min.is_finite() || !max.is_finite() {
            return Err(Error::Usage(format!(
                "invalid grid range [{min}, {max}]"
            )));
        }
        let step = (max - min) / (count - 1) as f64;
        let points = (0..count)
            .map(|i| if i + 1 == count { max } else { min + step * i as f64 })
            .collect();
        Ok(Self { points })
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        false // invariant: at least two points
    }
}

/// Trapezoid-rule integral of complex samples over the grid.
pub fn integrate_grid(values: &[Complex64], grid: &Grid1D) -> Result<Complex64> {
    if values.len() != grid.len() {
        return Err(Error::Usage(format!(
            "sample count {} does not match grid point count {}",
            values.len(),
            grid.len()
        )));
    }
    let pts = grid.points();
    let mut acc = ComplexKahan::default();
    for i in 0..pts.len() - 1 {
        let h = pts[i + 1] - pts[i];
        acc.add((values[i] + values[i + 1]) * (0.5 * h));
    }
    Ok(acc.value())
}

/// Gauss-Legendre rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

fn legendre_cache() -> &'static Mutex<HashMap<usize, Arc<GaussLegendre>>> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<GaussLegendre>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Gauss-Legendre nodes and weights on [-1, 1] via the Jacobi eigenproblem.
pub fn gauss_legendre(order: usize) -> Result<Arc<GaussLegendre>> {
    if order == 0 || order > MAX_ORDER {
        return Err(Error::Domain(format!(
            "quadrature order must lie in 1..={MAX_ORDER}, got {order}"
        )));
    }
    let mut cache = legendre_cache().lock().expect("rule cache poisoned");
    if let Some(rule) = cache.get(&order) {
        return Ok(Arc::clone(rule));
    }
    let diag = vec![0.0; order];
    let off: Vec<f64> = (1..order)
        .map(|k| {
            let k = k as f64;
            k / (4.0 * k * k - 1.0).sqrt()
        })
        .collect();
    let eig = eigh_tridiagonal(&diag, &off)?;
    let rule = Arc::new(GaussLegendre {
        nodes: eig.values,
        weights: eig.vectors.iter().map(|v| 2.0 * v[0] * v[0]).collect(),
    });
    cache.insert(order, Arc::clone(&rule));
    Ok(rule)
}

/// Integrates g(x) e^(-i s x) over [0, x_max] by fixed-order Gauss-Legendre
/// panels no longer than min(2 pi / |s|, panel_cap), so each panel carries at
/// most one oscillation period.
pub fn fourier_halfline(
    mut g: impl FnMut(f64) -> f64,
    s: f64,
    panel_cap: f64,
    x_max: f64,
    order: usize,
) -> Result<Complex64> {
    if !(x_max > 0.0) || !x_max.is_finite() {
        return Err(Error::Domain(format!(
            "fourier_halfline requires x_max > 0, got {x_max}"
        )));
    }
    if !(panel_cap > 0.0) {
        return Err(Error::Domain(format!(
            "fourier_halfline requires panel_cap > 0, got {panel_cap}"
        )));
    }
    let rule = gauss_legendre(order)?;
    let h = if s.abs() > std::f64::consts::TAU / panel_cap {
        std::f64::consts::TAU / s.abs()
    } else {
        panel_cap
    };
    let panels = (x_max / h).ceil() as usize;
    let h = x_max / panels as f64;
    let mut acc = ComplexKahan::default();
    for p in 0..panels {
        let a = p as f64 * h;
        let half = 0.5 * h;
        let mid = a + half;
        for (&t, &w) in rule.nodes.iter().zip(&rule.weights) {
            let x = mid + half * t;
            let phase = -s * x;
            let v = g(x) * w * half;
            acc.add(Complex64::new(v * phase.cos(), v * phase.sin()));
        }
    }
    Ok(acc.value())
}
