//! Sampled verification of the hypotheses of the conjugacy criterion.
//!
//! Two fields, each decomposed with respect to an inner product, are
//! conjugate when their rotational parts are, provided each gradient part has
//! the origin as its unique, globally attracting (or repelling) equilibrium.
//! Everything here checks those hypotheses on a finite box with finitely many
//! trials; verdicts are evidence, not certificates.

use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr_free::standard_normal;
use rayon::prelude::*;
use serde::Serialize;

use crate::decomp::{gradient_part, rotational_part, QuadratureConfig};
use crate::error::{check_dim, Error, Result};
use crate::fields::NumericVectorField;
use crate::flow::{integrate, FlowTrace, IntegratorConfig};
use crate::geometry::{GeometricStructure, Side};

/// Printed in every report.
pub const CERTIFICATION: &str =
    "sampled, non-certified: hypotheses checked on a finite box with finitely many trajectories";

pub const RATIONALE_SKEW: &str = "skew-symmetric structure: the gradient-like part is Hamiltonian, \
so the origin cannot be an asymptotically stable equilibrium point";
pub const RATIONALE_INDEFINITE: &str = "indefinite symmetric structure: the flow of the gradient-like \
part does not necessarily provide a diffeomorphism between R x (level set of H) and R^n minus the \
origin; the image can be strictly included";
pub const RATIONALE_GENERAL: &str =
    "structure is not symmetric: the criterion needs an inner product (symmetric positive definite)";

/// `‖g(x)‖` at or below this counts as an equilibrium.
pub const ZERO_TOL: f64 = 1e-8;
pub const ORIGIN_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConjugacyConfig {
    pub box_r: f64,
    pub grid_k: usize,
    pub trials: usize,
    pub horizon: f64,
    pub eps: f64,
    pub seed: u64,
    pub quadrature: QuadratureConfig,
    pub rtol: f64,
    pub atol: f64,
}

impl Default for ConjugacyConfig {
    fn default() -> Self {
        Self {
            box_r: 5.0,
            grid_k: 11,
            trials: 32,
            horizon: 50.0,
            eps: 1e-3,
            seed: 0,
            quadrature: QuadratureConfig::default(),
            rtol: 1e-8,
            atol: 1e-10,
        }
    }
}

impl ConjugacyConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.box_r > 0.0
            && self.box_r.is_finite()
            && self.grid_k >= 2
            && self.trials >= 1
            && self.horizon > 0.0
            && self.eps > 0.0
            && self.eps < 1.0
            && self.rtol > 0.0
            && self.atol > 0.0;
        if !ok {
            return Err(Error::InvalidConfig("invalid conjugacy configuration".into()));
        }
        self.quadrature.validate()
    }

    fn flow_config(&self) -> IntegratorConfig {
        IntegratorConfig::dp54(self.rtol, self.atol, self.horizon)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum AttractionVerdict {
    Attracting,
    Repelling,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Default)]
pub struct AttractionStats {
    pub trials: usize,
    /// Forward trajectories ending inside the ball of radius `eps·R`.
    pub attracted_forward: usize,
    /// Same for the time-reversed field (only run when forward fails).
    pub attracted_backward: usize,
    pub blowups: usize,
    pub max_final_norm_forward: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HypothesisReport {
    pub certification: &'static str,
    pub structure_admissible: bool,
    pub structure_rationale: Option<String>,
    pub origin_is_equilibrium_of_gradient_part: bool,
    /// `‖B ∇H(0)‖`.
    pub origin_residual: f64,
    pub unique_equilibrium_in_box: bool,
    pub equilibria_found: Vec<Vec<f64>>,
    pub attraction_verdict: AttractionVerdict,
    pub attraction_stats: AttractionStats,
    pub criterion_applicable: bool,
    pub notes: Vec<String>,
}

fn rejected(rationale: &str, origin_residual: f64) -> HypothesisReport {
    HypothesisReport {
        certification: CERTIFICATION,
        structure_admissible: false,
        structure_rationale: Some(rationale.to_string()),
        origin_is_equilibrium_of_gradient_part: false,
        origin_residual,
        unique_equilibrium_in_box: false,
        equilibria_found: Vec::new(),
        attraction_verdict: AttractionVerdict::Inconclusive,
        attraction_stats: AttractionStats::default(),
        criterion_applicable: false,
        notes: vec!["structure rejected; remaining hypotheses not evaluated".into()],
    }
}

/// The reason a structure cannot be used with the criterion, if any.
pub fn structure_rationale(s: &GeometricStructure) -> Option<&'static str> {
    if s.is_positive_definite() {
        None
    } else if s.is_skew() {
        Some(RATIONALE_SKEW)
    } else if s.is_symmetric() {
        Some(RATIONALE_INDEFINITE)
    } else {
        Some(RATIONALE_GENERAL)
    }
}

pub fn verify_hypotheses(
    s: &GeometricStructure,
    field: &NumericVectorField,
    cfg: &ConjugacyConfig,
) -> Result<HypothesisReport> {
    cfg.validate()?;
    let n = s.dimension();
    check_dim(n, field.dimension())?;
    let g = gradient_part(s, field, cfg.quadrature, Side::Right);
    let origin_residual = g.try_eval(&DVector::zeros(n))?.norm();
    if let Some(r) = structure_rationale(s) {
        return Ok(rejected(r, origin_residual));
    }
    let mut notes = Vec::new();
    let origin_eq = origin_residual <= ORIGIN_TOL;

    let equilibria = find_equilibria(&g, cfg)?;
    let scale = cfg.box_r.max(1.0);
    let unique = equilibria.len() == 1 && equilibria[0].norm() <= 1e-6 * scale;
    if equilibria.len() > 16 {
        notes.push(format!(
            "{} distinct equilibria found in the box (continuum likely)",
            equilibria.len()
        ));
    }

    let (verdict, stats) = attraction(&g, cfg)?;
    if stats.blowups > 0 {
        notes.push(format!("{} trajectories left the blow-up bound", stats.blowups));
    }
    let applicable = origin_eq && unique && verdict != AttractionVerdict::Inconclusive;
    Ok(HypothesisReport {
        certification: CERTIFICATION,
        structure_admissible: true,
        structure_rationale: None,
        origin_is_equilibrium_of_gradient_part: origin_eq,
        origin_residual,
        unique_equilibrium_in_box: unique,
        equilibria_found: equilibria.iter().map(|z| z.as_slice().to_vec()).collect(),
        attraction_verdict: verdict,
        attraction_stats: stats,
        criterion_applicable: applicable,
        notes,
    })
}

fn grid_point(index: usize, n: usize, k: usize, r: f64) -> DVector<f64> {
    let mut idx = index;
    DVector::from_fn(n, |_, _| {
        let i = idx % k;
        idx /= k;
        -r + 2.0 * r * i as f64 / (k - 1) as f64
    })
}

const MAX_CANDIDATES: usize = 256;
const MAX_GRID_POINTS: usize = 2_000_000;

/// Zeros of `g` in `[−R, R]ⁿ`: grid scan, then damped Newton from the grid
/// minima of `‖g‖`.
fn find_equilibria(g: &NumericVectorField, cfg: &ConjugacyConfig) -> Result<Vec<DVector<f64>>> {
    let n = g.dimension();
    let k = cfg.grid_k;
    let total = k
        .checked_pow(n as u32)
        .filter(|t| *t <= MAX_GRID_POINTS)
        .ok_or_else(|| Error::InvalidConfig(format!("grid {k}^{n} is too large")))?;
    let norms: Vec<f64> = (0..total)
        .into_par_iter()
        .map(|i| g.eval(&grid_point(i, n, k, cfg.box_r)).norm())
        .collect();
    if norms.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFiniteValue("gradient part on the search grid".into()));
    }
    let stride = |d: usize| k.pow(d as u32);
    let is_local_min = |i: usize| {
        (0..n).all(|d| {
            let c = (i / stride(d)) % k;
            (c == 0 || norms[i - stride(d)] >= norms[i]) && (c + 1 == k || norms[i + stride(d)] >= norms[i])
        })
    };
    let mut zeros: Vec<DVector<f64>> = Vec::new();
    let mut candidates: Vec<usize> = Vec::new();
    for i in 0..total {
        if norms[i] <= ZERO_TOL {
            zeros.push(grid_point(i, n, k, cfg.box_r));
        } else if is_local_min(i) {
            candidates.push(i);
        }
    }
    candidates.sort_by(|a, b| norms[*a].total_cmp(&norms[*b]));
    candidates.truncate(MAX_CANDIDATES);
    let mut starts: Vec<DVector<f64>> =
        candidates.iter().map(|&i| grid_point(i, n, k, cfg.box_r)).collect();
    starts.push(DVector::zeros(n));
    let refined: Vec<Option<DVector<f64>>> = starts.par_iter().map(|x| newton(g, x)).collect();
    let bound = cfg.box_r * (1.0 + 1e-9);
    zeros.extend(refined.into_iter().flatten().filter(|z| z.amax() <= bound));

    let tol = 1e-5 * cfg.box_r.max(1.0);
    let mut distinct: Vec<DVector<f64>> = Vec::new();
    for z in zeros {
        if distinct.iter().all(|d| (d - &z).norm() > tol) {
            distinct.push(z);
        }
    }
    Ok(distinct)
}

fn newton(g: &NumericVectorField, x0: &DVector<f64>) -> Option<DVector<f64>> {
    let mut x = x0.clone();
    let mut gx = g.try_eval(&x).ok()?;
    for _ in 0..50 {
        if gx.norm() <= ZERO_TOL * 1e-2 {
            break;
        }
        let j = g.jacobian(&x).ok()?;
        let step = j.lu().solve(&(-&gx))?;
        let mut lambda = 1.0;
        loop {
            let trial = &x + &step * lambda;
            if let Ok(gt) = g.try_eval(&trial) {
                if gt.norm() < gx.norm() {
                    x = trial;
                    gx = gt;
                    break;
                }
            }
            lambda /= 2.0;
            if lambda < 1e-6 {
                return (gx.norm() <= ZERO_TOL).then_some(x);
            }
        }
    }
    (gx.norm() <= ZERO_TOL).then_some(x)
}

/// Unit vectors drawn uniformly on the sphere.
pub fn sphere_starts(n: usize, count: usize, radius: f64, seed: u64) -> Vec<DVector<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| loop {
            let v = DVector::from_fn(n, |_, _| standard_normal(&mut rng));
            let norm = v.norm();
            if norm > 1e-12 {
                break v * (radius / norm);
            }
        })
        .collect()
}

enum Outcome {
    Attracted,
    Escaped(f64),
    BlowUp,
}

fn run_trials(g: &NumericVectorField, starts: &[DVector<f64>], cfg: &ConjugacyConfig) -> Result<Vec<Outcome>> {
    let flow = cfg.flow_config();
    let radius = cfg.eps * cfg.box_r;
    starts
        .par_iter()
        .map(|x0| match integrate(g, x0, &flow) {
            Ok(tr) => {
                let r = tr.final_state().norm();
                Ok(if r < radius { Outcome::Attracted } else { Outcome::Escaped(r) })
            }
            Err(Error::BlowUp { .. }) | Err(Error::MaxStepsExceeded(_)) => Ok(Outcome::BlowUp),
            Err(e) => Err(e),
        })
        .collect()
}

fn attraction(g: &NumericVectorField, cfg: &ConjugacyConfig) -> Result<(AttractionVerdict, AttractionStats)> {
    let starts = sphere_starts(g.dimension(), cfg.trials, cfg.box_r, cfg.seed);
    let forward = run_trials(g, &starts, cfg)?;
    let mut stats = AttractionStats {
        trials: cfg.trials,
        ..Default::default()
    };
    for o in &forward {
        match o {
            Outcome::Attracted => stats.attracted_forward += 1,
            Outcome::Escaped(r) => stats.max_final_norm_forward = stats.max_final_norm_forward.max(*r),
            Outcome::BlowUp => stats.blowups += 1,
        }
    }
    if stats.attracted_forward == cfg.trials {
        return Ok((AttractionVerdict::Attracting, stats));
    }
    let backward = run_trials(&g.reversed(), &starts, cfg)?;
    for o in &backward {
        match o {
            Outcome::Attracted => stats.attracted_backward += 1,
            Outcome::BlowUp => stats.blowups += 1,
            Outcome::Escaped(_) => {}
        }
    }
    let verdict = if stats.attracted_backward == cfg.trials {
        AttractionVerdict::Repelling
    } else {
        AttractionVerdict::Inconclusive
    };
    Ok((verdict, stats))
}

#[derive(Debug, Clone, Serialize)]
pub struct PairReport {
    pub first: HypothesisReport,
    pub second: HypothesisReport,
    /// Both criteria applicable with the same attraction verdict; the pair is
    /// then conjugate iff the rotational parts are (not decided here).
    pub reduction_valid: bool,
    /// Flow of `B⁻¹u` from one point on the sphere of radius `R`, per field.
    pub sphere_traces: [Option<FlowTrace>; 2],
    #[serde(skip)]
    pub rotational_parts: [NumericVectorField; 2],
}

/// Horizon of the sphere-restricted inspection traces.
pub const SPHERE_TRACE_HORIZON: f64 = 10.0;

pub fn compare_pair(
    s1: &GeometricStructure,
    x1: &NumericVectorField,
    s2: &GeometricStructure,
    x2: &NumericVectorField,
    cfg: &ConjugacyConfig,
) -> Result<PairReport> {
    check_dim(s1.dimension(), s2.dimension())?;
    let first = verify_hypotheses(s1, x1, cfg)?;
    let second = verify_hypotheses(s2, x2, cfg)?;
    let reduction_valid = first.criterion_applicable
        && second.criterion_applicable
        && first.attraction_verdict == second.attraction_verdict;
    let u1 = rotational_part(s1, x1, cfg.quadrature, Side::Right);
    let u2 = rotational_part(s2, x2, cfg.quadrature, Side::Right);
    let start = sphere_starts(s1.dimension(), 1, cfg.box_r, cfg.seed ^ 0x5eed).remove(0);
    let trace = |s: &GeometricStructure, u: &NumericVectorField| {
        let tangent = u.premultiplied(s.gram().clone(), "sphere-tangent part").ok()?;
        integrate(&tangent, &start, &IntegratorConfig::dp54(cfg.rtol, cfg.atol, SPHERE_TRACE_HORIZON)).ok()
    };
    Ok(PairReport {
        sphere_traces: [trace(s1, &u1), trace(s2, &u2)],
        first,
        second,
        reduction_valid,
        rotational_parts: [u1, u2],
    })
}

mod rand_distr_free {
    use rand::Rng;

    /// Box–Muller; avoids pulling in a distributions crate for one sampler.
    pub fn standard_normal<R: Rng>(rng: &mut R) -> f64 {
        let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
        let u2: f64 = rng.gen();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::linear_field;
    use nalgebra::DMatrix;

    fn quick() -> ConjugacyConfig {
        ConjugacyConfig {
            trials: 8,
            ..Default::default()
        }
    }

    #[test]
    fn contraction_is_applicable() {
        let e = GeometricStructure::euclidean(2).unwrap();
        let f = linear_field(-DMatrix::identity(2, 2)).unwrap();
        let r = verify_hypotheses(&e, &f, &quick()).unwrap();
        assert!(r.structure_admissible);
        assert!(r.origin_is_equilibrium_of_gradient_part);
        assert!(r.unique_equilibrium_in_box, "{:?}", r.equilibria_found);
        assert_eq!(r.attraction_verdict, AttractionVerdict::Attracting);
        assert!(r.criterion_applicable);
    }

    #[test]
    fn expansion_is_repelling() {
        let e = GeometricStructure::euclidean(2).unwrap();
        let f = linear_field(DMatrix::identity(2, 2)).unwrap();
        let cfg = ConjugacyConfig {
            trials: 4,
            horizon: 20.0,
            ..Default::default()
        };
        let r = verify_hypotheses(&e, &f, &cfg).unwrap();
        assert_eq!(r.attraction_verdict, AttractionVerdict::Repelling);
        assert!(r.criterion_applicable);
    }

    #[test]
    fn rotation_rejected() {
        let e = GeometricStructure::euclidean(2).unwrap();
        let f = linear_field(DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0])).unwrap();
        let r = verify_hypotheses(&e, &f, &quick()).unwrap();
        assert!(r.structure_admissible);
        assert!(!r.unique_equilibrium_in_box);
        assert!(!r.criterion_applicable);
    }

    #[test]
    fn non_inner_products_rejected() {
        let f = linear_field(DMatrix::from_row_slice(2, 2, &[-1.0, 1.0, 1.0, -1.0])).unwrap();
        let m = GeometricStructure::minkowski(2).unwrap();
        let r = verify_hypotheses(&m, &f, &quick()).unwrap();
        assert!(!r.structure_admissible);
        assert_eq!(r.structure_rationale.as_deref(), Some(RATIONALE_INDEFINITE));
        let sp = GeometricStructure::symplectic(2).unwrap();
        let r = verify_hypotheses(&sp, &f, &quick()).unwrap();
        assert_eq!(r.structure_rationale.as_deref(), Some(RATIONALE_SKEW));
    }

    #[test]
    fn pair_of_identical_contractions() {
        let e = GeometricStructure::euclidean(2).unwrap();
        let f = linear_field(-DMatrix::identity(2, 2)).unwrap();
        let p = compare_pair(&e, &f, &e, &f, &quick()).unwrap();
        assert!(p.reduction_valid);
        let x = DVector::from_vec(vec![0.3, -0.7]);
        for u in &p.rotational_parts {
            assert!(u.eval(&x).amax() < 1e-14);
        }
        assert!(p.sphere_traces.iter().all(Option::is_some));
    }

    #[test]
    fn sphere_starts_lie_on_sphere() {
        let pts = sphere_starts(3, 10, 5.0, 1);
        assert!(pts.iter().all(|p| (p.norm() - 5.0).abs() < 1e-12));
        assert_eq!(pts, sphere_starts(3, 10, 5.0, 1));
    }
}
