//! Quadrature over `[0, 1]` for vector-valued integrands.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Maximum bisection depth of the adaptive Simpson scheme.
pub const MAX_SIMPSON_DEPTH: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "scheme", rename_all = "snake_case")]
pub enum QuadratureConfig {
    GaussLegendre { nodes: usize },
    AdaptiveSimpson { tol: f64 },
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig::GaussLegendre { nodes: 32 }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        match *self {
            QuadratureConfig::GaussLegendre { nodes } if nodes < 2 => Err(Error::InvalidConfig(
                format!("Gauss-Legendre needs at least 2 nodes, got {nodes}"),
            )),
            QuadratureConfig::AdaptiveSimpson { tol } if !(tol > 0.0) => Err(
                Error::InvalidConfig(format!("adaptive tolerance must be > 0, got {tol}")),
            ),
            _ => Ok(()),
        }
    }
}

/// Gauss–Legendre nodes and weights on `[−1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Newton iteration on `P_k` from the Chebyshev-like initial guesses.
    pub fn new(k: usize) -> Self {
        let mut nodes = vec![0.0; k];
        let mut weights = vec![0.0; k];
        let m = (k + 1) / 2;
        for i in 0..m {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (k as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(k, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() <= 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(k, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[k - 1 - i] = x;
            weights[i] = w;
            weights[k - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    pub fn cached(k: usize) -> Arc<Self> {
        static CACHE: OnceLock<Mutex<HashMap<usize, Arc<GaussLegendre>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().unwrap_or_else(|e| e.into_inner());
        guard.entry(k).or_insert_with(|| Arc::new(Self::new(k))).clone()
    }
}

/// `(P_k(x), P_k'(x))` by the three-term recurrence.
fn legendre(k: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if k == 0 {
        return (1.0, 0.0);
    }
    for j in 2..=k {
        let jf = j as f64;
        let p2 = ((2.0 * jf - 1.0) * x * p1 - (jf - 1.0) * p0) / jf;
        p0 = p1;
        p1 = p2;
    }
    let d = k as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// `∫₀¹ f(t) dt` componentwise, `f` returning vectors of length `dim`.
pub fn integrate_unit<F>(cfg: &QuadratureConfig, dim: usize, f: F) -> Result<DVector<f64>>
where
    F: Fn(f64) -> Result<DVector<f64>>,
{
    cfg.validate()?;
    match *cfg {
        QuadratureConfig::GaussLegendre { nodes } => {
            let rule = GaussLegendre::cached(nodes);
            let mut acc = DVector::zeros(dim);
            for (x, w) in rule.nodes.iter().zip(&rule.weights) {
                // [−1, 1] → [0, 1]
                let t = 0.5 * (x + 1.0);
                acc += f(t)? * (0.5 * w);
            }
            Ok(acc)
        }
        QuadratureConfig::AdaptiveSimpson { tol } => adaptive_simpson(&f, dim, tol),
    }
}

struct Panel {
    a: f64,
    b: f64,
    fa: DVector<f64>,
    fm: DVector<f64>,
    fb: DVector<f64>,
    whole: DVector<f64>,
}

fn adaptive_simpson<F>(f: &F, dim: usize, tol: f64) -> Result<DVector<f64>>
where
    F: Fn(f64) -> Result<DVector<f64>>,
{
    // four starting panels so that symmetric integrands cannot fool the first estimate
    const START: usize = 4;
    let mut total = DVector::zeros(dim);
    let mut prev = f(0.0)?;
    for i in 0..START {
        let a = i as f64 / START as f64;
        let b = (i + 1) as f64 / START as f64;
        let fb = f(b)?;
        let fm = f(0.5 * (a + b))?;
        let whole = simpson(a, b, &prev, &fm, &fb);
        let panel = Panel {
            a,
            b,
            fa: prev,
            fm,
            fb: fb.clone(),
            whole,
        };
        total += refine(f, panel, tol / START as f64, 0)?;
        prev = fb;
    }
    Ok(total)
}

fn simpson(a: f64, b: f64, fa: &DVector<f64>, fm: &DVector<f64>, fb: &DVector<f64>) -> DVector<f64> {
    (fa + fm * 4.0 + fb) * ((b - a) / 6.0)
}

fn refine<F>(f: &F, p: Panel, tol: f64, depth: usize) -> Result<DVector<f64>>
where
    F: Fn(f64) -> Result<DVector<f64>>,
{
    let m = 0.5 * (p.a + p.b);
    let lm = 0.5 * (p.a + m);
    let rm = 0.5 * (m + p.b);
    let flm = f(lm)?;
    let frm = f(rm)?;
    let left = simpson(p.a, m, &p.fa, &flm, &p.fm);
    let right = simpson(m, p.b, &p.fm, &frm, &p.fb);
    let both = &left + &right;
    let diff = &both - &p.whole;
    let err = diff.amax();
    let floor = 8.0 * f64::EPSILON * both.amax();
    if err <= 15.0 * tol.max(floor) {
        return Ok(both + diff / 15.0);
    }
    if depth >= MAX_SIMPSON_DEPTH {
        return Err(Error::QuadratureNonconvergence(MAX_SIMPSON_DEPTH));
    }
    let l = refine(
        f,
        Panel {
            a: p.a,
            b: m,
            fa: p.fa,
            fm: flm,
            fb: p.fm.clone(),
            whole: left,
        },
        tol / 2.0,
        depth + 1,
    )?;
    let r = refine(
        f,
        Panel {
            a: m,
            b: p.b,
            fa: p.fm,
            fm: frm,
            fb: p.fb,
            whole: right,
        },
        tol / 2.0,
        depth + 1,
    )?;
    Ok(l + r)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar(cfg: QuadratureConfig, f: impl Fn(f64) -> f64) -> f64 {
        integrate_unit(&cfg, 1, |t| Ok(DVector::from_element(1, f(t)))).unwrap()[0]
    }

    #[test]
    fn gauss_legendre_weights_sum_to_two_and_nodes_symmetric() {
        for k in [2, 3, 7, 32, 64] {
            let r = GaussLegendre::new(k);
            assert!((r.weights.iter().sum::<f64>() - 2.0).abs() < 1e-13);
            for i in 0..k {
                assert!((r.nodes[i] + r.nodes[k - 1 - i]).abs() < 1e-15);
            }
        }
        let r = GaussLegendre::new(2);
        assert!((r.nodes[1] - 1.0 / 3f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn gauss_legendre_is_exact_to_degree_2k_minus_1() {
        let cfg = QuadratureConfig::GaussLegendre { nodes: 5 };
        for d in 0..10 {
            let got = scalar(cfg, |t| t.powi(d));
            assert!((got - 1.0 / (d as f64 + 1.0)).abs() < 1e-14, "degree {d}");
        }
    }

    #[test]
    fn adaptive_simpson_on_transcendental() {
        let cfg = QuadratureConfig::AdaptiveSimpson { tol: 1e-12 };
        let got = scalar(cfg, |t| (3.0 * t).sin() * (-t).exp());
        // ∫₀¹ e^{−t} sin 3t dt = (3 − e^{−1}(sin 3 + 3 cos 3)) / 10
        let e = (-1.0f64).exp();
        let exact = (3.0 - e * (3f64.sin() + 3.0 * 3f64.cos())) / 10.0;
        assert!((got - exact).abs() < 1e-12);
    }

    #[test]
    fn invalid_configs() {
        assert!(QuadratureConfig::GaussLegendre { nodes: 1 }.validate().is_err());
        assert!(QuadratureConfig::AdaptiveSimpson { tol: 0.0 }.validate().is_err());
        assert!(QuadratureConfig::default().validate().is_ok());
    }

    #[test]
    fn nonconvergence_is_reported() {
        let cfg = QuadratureConfig::AdaptiveSimpson { tol: 1e-15 };
        let r = integrate_unit(&cfg, 1, |t| {
            Ok(DVector::from_element(1, if t > std::f64::consts::FRAC_1_PI { 1.0 } else { 0.0 }))
        });
        assert!(matches!(r, Err(Error::QuadratureNonconvergence(_))));
    }

    #[test]
    fn errors_propagate() {
        let r = integrate_unit(&QuadratureConfig::default(), 1, |_| {
            Err(Error::NonFiniteValue("test".into()))
        });
        assert!(r.is_err());
    }
}
