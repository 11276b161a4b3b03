//! Trajectories of `ẋ = X(x)` and conservation checks along them.

use std::io::Write;

use nalgebra::DVector;
use serde::Serialize;

use crate::error::{check_dim, Error, Result};
use crate::fields::{NumericVectorField, ScalarField};

pub const DEFAULT_BLOWUP_BOUND: f64 = 1e8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "scheme")]
pub enum Scheme {
    /// Classical fourth-order Runge–Kutta with fixed step `h`.
    Rk4 { h: f64 },
    /// Dormand–Prince 5(4) with local error control.
    Dp54 { rtol: f64, atol: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntegratorConfig {
    pub scheme: Scheme,
    pub horizon: f64,
    pub max_steps: usize,
    /// Integration stops with `BlowUp` once `‖x‖` exceeds this.
    pub blowup_bound: f64,
    /// First trial step for DP54; chosen automatically when absent.
    pub initial_step: Option<f64>,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            scheme: Scheme::Dp54 {
                rtol: 1e-10,
                atol: 1e-12,
            },
            horizon: 10.0,
            max_steps: 1_000_000,
            blowup_bound: DEFAULT_BLOWUP_BOUND,
            initial_step: None,
        }
    }
}

impl IntegratorConfig {
    pub fn dp54(rtol: f64, atol: f64, horizon: f64) -> Self {
        Self {
            scheme: Scheme::Dp54 { rtol, atol },
            horizon,
            ..Self::default()
        }
    }

    pub fn rk4(h: f64, horizon: f64) -> Self {
        Self {
            scheme: Scheme::Rk4 { h },
            horizon,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.into()));
        match self.scheme {
            Scheme::Rk4 { h } if !(h > 0.0 && h.is_finite()) => return bad("step must be positive"),
            Scheme::Dp54 { rtol, atol } if !(rtol > 0.0 && atol > 0.0) => {
                return bad("tolerances must be positive")
            }
            _ => {}
        }
        if !(self.horizon >= 0.0 && self.horizon.is_finite()) {
            return bad("horizon must be finite and nonnegative");
        }
        if self.max_steps == 0 {
            return bad("max_steps must be positive");
        }
        if !(self.blowup_bound > 0.0) {
            return bad("blow-up bound must be positive");
        }
        if matches!(self.initial_step, Some(h) if !(h > 0.0)) {
            return bad("initial step must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Default)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
    pub min_step: f64,
    pub max_step: f64,
}

impl StepStats {
    fn record(&mut self, h: f64) {
        if self.accepted == 0 {
            self.min_step = h;
            self.max_step = h;
        } else {
            self.min_step = self.min_step.min(h);
            self.max_step = self.max_step.max(h);
        }
        self.accepted += 1;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlowTrace {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub stats: StepStats,
}

impl FlowTrace {
    pub fn dimension(&self) -> usize {
        self.states.first().map_or(0, Vec::len)
    }

    pub fn final_state(&self) -> DVector<f64> {
        DVector::from_column_slice(self.states.last().expect("trace holds the initial state"))
    }

    pub fn final_time(&self) -> f64 {
        *self.times.last().expect("trace holds the initial time")
    }

    /// CSV with header `t,x1,...,xn`, one row per accepted step.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let header: Vec<String> = (1..=self.dimension()).map(|i| format!("x{i}")).collect();
        writeln!(w, "t,{}", header.join(","))?;
        for (t, x) in self.times.iter().zip(&self.states) {
            let row: Vec<String> = x.iter().map(|v| format!("{v:e}")).collect();
            writeln!(w, "{t:e},{}", row.join(","))?;
        }
        Ok(())
    }
}

struct Recorder<'a> {
    trace: FlowTrace,
    cfg: &'a IntegratorConfig,
}

impl<'a> Recorder<'a> {
    fn new(x0: &DVector<f64>, cfg: &'a IntegratorConfig) -> Self {
        Self {
            trace: FlowTrace {
                times: vec![0.0],
                states: vec![x0.as_slice().to_vec()],
                stats: StepStats::default(),
            },
            cfg,
        }
    }

    fn push(&mut self, t: f64, h: f64, x: &DVector<f64>) -> Result<()> {
        check_state(t, x, self.cfg.blowup_bound)?;
        self.trace.stats.record(h);
        self.trace.times.push(t);
        self.trace.states.push(x.as_slice().to_vec());
        Ok(())
    }

    fn attempts(&self) -> usize {
        self.trace.stats.accepted + self.trace.stats.rejected
    }
}

fn check_state(t: f64, x: &DVector<f64>, bound: f64) -> Result<()> {
    if x.iter().any(|v| !v.is_finite()) || x.norm() > bound {
        return Err(Error::BlowUp { time: t, bound });
    }
    Ok(())
}

fn rhs(f: &NumericVectorField, x: &DVector<f64>) -> Result<DVector<f64>> {
    f.try_eval(x)
}

pub fn integrate(
    field: &NumericVectorField,
    x0: &DVector<f64>,
    cfg: &IntegratorConfig,
) -> Result<FlowTrace> {
    cfg.validate()?;
    check_dim(field.dimension(), x0.len())?;
    check_state(0.0, x0, cfg.blowup_bound)?;
    match cfg.scheme {
        Scheme::Rk4 { h } => rk4(field, x0, h, cfg),
        Scheme::Dp54 { rtol, atol } => dp54(field, x0, rtol, atol, cfg),
    }
}

fn rk4(f: &NumericVectorField, x0: &DVector<f64>, h: f64, cfg: &IntegratorConfig) -> Result<FlowTrace> {
    let mut rec = Recorder::new(x0, cfg);
    let (mut t, mut x) = (0.0, x0.clone());
    while t < cfg.horizon {
        if rec.attempts() >= cfg.max_steps {
            return Err(Error::MaxStepsExceeded(cfg.max_steps));
        }
        let step = h.min(cfg.horizon - t);
        let k1 = rhs(f, &x)?;
        let k2 = rhs(f, &(&x + &k1 * (step / 2.0)))?;
        let k3 = rhs(f, &(&x + &k2 * (step / 2.0)))?;
        let k4 = rhs(f, &(&x + &k3 * step))?;
        x += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (step / 6.0);
        t = if cfg.horizon - t <= h { cfg.horizon } else { t + step };
        rec.push(t, step, &x)?;
    }
    Ok(rec.trace)
}

// Dormand–Prince coefficients; the field is autonomous so the nodes are unused.
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
/// Fifth-order weights minus embedded fourth-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// One Dormand–Prince step: returns the fifth-order solution, the error
/// estimate, and `X` at the new point (first stage of the next step).
fn dp_step(
    f: &NumericVectorField,
    x: &DVector<f64>,
    k1: &DVector<f64>,
    h: f64,
) -> Result<(DVector<f64>, DVector<f64>, DVector<f64>)> {
    let mut k: Vec<DVector<f64>> = Vec::with_capacity(7);
    k.push(k1.clone());
    for a in A.iter().skip(1) {
        let mut y = x.clone();
        for (kj, aj) in k.iter().zip(a) {
            if *aj != 0.0 {
                y.axpy(h * aj, kj, 1.0);
            }
        }
        if k.len() == 6 {
            // the seventh row gives the solution itself
            let k7 = rhs(f, &y)?;
            k.push(k7);
            let mut err = DVector::zeros(x.len());
            for (kj, ej) in k.iter().zip(E) {
                err.axpy(h * ej, kj, 1.0);
            }
            let next = k[6].clone();
            return Ok((y, err, next));
        }
        k.push(rhs(f, &y)?);
    }
    unreachable!("tableau has seven stages")
}

fn error_norm(err: &DVector<f64>, x: &DVector<f64>, y: &DVector<f64>, rtol: f64, atol: f64) -> f64 {
    let n = err.len() as f64;
    let sum: f64 = err
        .iter()
        .zip(x.iter().zip(y.iter()))
        .map(|(e, (a, b))| {
            let sc = atol + rtol * a.abs().max(b.abs());
            (e / sc).powi(2)
        })
        .sum();
    (sum / n).sqrt()
}

fn initial_step(f0: &DVector<f64>, x0: &DVector<f64>, rtol: f64, atol: f64, horizon: f64) -> f64 {
    let scale = |v: &DVector<f64>| {
        let n = v.len() as f64;
        (v.iter()
            .zip(x0.iter())
            .map(|(a, b)| (a / (atol + rtol * b.abs())).powi(2))
            .sum::<f64>()
            / n)
            .sqrt()
    };
    let (d0, d1) = (scale(x0), scale(f0));
    let h = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    h.min(horizon).max(1e-12)
}

fn dp54(
    f: &NumericVectorField,
    x0: &DVector<f64>,
    rtol: f64,
    atol: f64,
    cfg: &IntegratorConfig,
) -> Result<FlowTrace> {
    const SAFETY: f64 = 0.9;
    const MIN_FACTOR: f64 = 0.2;
    const MAX_FACTOR: f64 = 5.0;
    let mut rec = Recorder::new(x0, cfg);
    let (mut t, mut x) = (0.0, x0.clone());
    let mut k1 = rhs(f, &x)?;
    let mut h = cfg
        .initial_step
        .unwrap_or_else(|| initial_step(&k1, x0, rtol, atol, cfg.horizon));
    let mut last_rejected = false;
    while t < cfg.horizon {
        if rec.attempts() >= cfg.max_steps {
            return Err(Error::MaxStepsExceeded(cfg.max_steps));
        }
        let last = t + h >= cfg.horizon;
        let step = if last { cfg.horizon - t } else { h };
        if step <= f64::EPSILON * t.abs().max(1.0) {
            return Err(Error::NonFiniteValue(format!("step size underflow at t = {t}")));
        }
        let (y, err, k_next) = match dp_step(f, &x, &k1, step) {
            Ok(r) => r,
            // a non-finite stage is treated as a failed step
            Err(Error::NonFiniteValue(_)) => {
                rec.trace.stats.rejected += 1;
                h = step * MIN_FACTOR;
                last_rejected = true;
                continue;
            }
            Err(e) => return Err(e),
        };
        let en = error_norm(&err, &x, &y, rtol, atol);
        if en.is_finite() && en <= 1.0 {
            t = if last { cfg.horizon } else { t + step };
            x = y;
            k1 = k_next;
            rec.push(t, step, &x)?;
            let mut factor = if en == 0.0 {
                MAX_FACTOR
            } else {
                (SAFETY * en.powf(-0.2)).clamp(MIN_FACTOR, MAX_FACTOR)
            };
            if last_rejected {
                factor = factor.min(1.0);
            }
            h = step * factor;
            last_rejected = false;
        } else {
            rec.trace.stats.rejected += 1;
            let factor = if en.is_finite() {
                (SAFETY * en.powf(-0.2)).clamp(MIN_FACTOR, 1.0)
            } else {
                MIN_FACTOR
            };
            h = step * factor;
            last_rejected = true;
        }
    }
    Ok(rec.trace)
}

/// Fixed-step Dormand–Prince (no error control); used to measure the order
/// of the fifth-order solution.
pub fn dp54_fixed(
    field: &NumericVectorField,
    x0: &DVector<f64>,
    h: f64,
    horizon: f64,
) -> Result<DVector<f64>> {
    check_dim(field.dimension(), x0.len())?;
    if !(h > 0.0) {
        return Err(Error::InvalidConfig("step must be positive".into()));
    }
    let (mut t, mut x) = (0.0, x0.clone());
    let mut k1 = rhs(field, &x)?;
    while t < horizon {
        let step = h.min(horizon - t);
        let (y, _, k) = dp_step(field, &x, &k1, step)?;
        x = y;
        k1 = k;
        t = if horizon - t <= h { horizon } else { t + step };
    }
    Ok(x)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DriftReport {
    pub integral: String,
    pub initial_value: f64,
    pub final_value: f64,
    /// `max |F(x(t)) − F(x₀)|` over accepted steps.
    pub max_drift: f64,
    pub final_time: f64,
    pub stats: StepStats,
}

/// Integrates and measures how far `F` moves from its initial value.
pub fn first_integral_drift(
    field: &NumericVectorField,
    f: &ScalarField,
    x0: &DVector<f64>,
    cfg: &IntegratorConfig,
) -> Result<(DriftReport, FlowTrace)> {
    check_dim(field.dimension(), f.dimension())?;
    let trace = integrate(field, x0, cfg)?;
    let f0 = f.value(x0);
    let mut max_drift = 0.0f64;
    let mut last = f0;
    for s in &trace.states {
        last = f.value(&DVector::from_column_slice(s));
        max_drift = max_drift.max((last - f0).abs());
    }
    if !max_drift.is_finite() {
        return Err(Error::NonFiniteValue(format!("{} along the trajectory", f.label())));
    }
    Ok((
        DriftReport {
            integral: f.label().to_string(),
            initial_value: f0,
            final_value: last,
            max_drift,
            final_time: trace.final_time(),
            stats: trace.stats,
        },
        trace,
    ))
}

/// `(L_X F)(x) = ⟨X(x), ∇F(x)⟩`.
pub fn lie_derivative(field: &NumericVectorField, f: &ScalarField, x: &DVector<f64>) -> Result<f64> {
    check_dim(field.dimension(), f.dimension())?;
    Ok(field.try_eval(x)?.dot(&f.gradient(x)))
}
