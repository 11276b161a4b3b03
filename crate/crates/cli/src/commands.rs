use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use geodecomp::conjugacy::{compare_pair, ConjugacyConfig};
use geodecomp::decomp::{decompose_at, QuadratureConfig};
use geodecomp::flow::{first_integral_drift, integrate, IntegratorConfig, Scheme};
use geodecomp::poincare::{check_gradient_like, check_gradient_like_exact, sample_points};
use geodecomp::polyfield::{decompose_exact, scalar_field, ExactDecomposition, PolyVectorField};
use geodecomp::{ScalarField, Side};
use serde_json::{json, Value};

use crate::spec::System;
use crate::{load_spec, parse_point, write_atomic, CliError, CliResult, SCHEMA_VERSION};

#[derive(Debug, Parser)]
#[command(name = "geodecomp", version, about = "Gradient-like / orthogonal decomposition of vector fields")]
pub struct Cli {
    /// Write the report here (atomically) instead of standard output.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SideArg {
    Left,
    Right,
    Both,
}

impl SideArg {
    fn sides(self) -> Vec<Side> {
        match self {
            SideArg::Left => vec![Side::Left],
            SideArg::Right => vec![Side::Right],
            SideArg::Both => vec![Side::Right, Side::Left],
        }
    }

    fn single(self) -> CliResult<Side> {
        match self {
            SideArg::Left => Ok(Side::Left),
            SideArg::Right => Ok(Side::Right),
            SideArg::Both => Err(CliError::Usage("this command needs --side left or right".into())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutFormat {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Integral {
    /// `‖x‖²`.
    Norm2,
    /// `b(x, x)`.
    Fb,
    /// The right potential `H` of the spec's field.
    Potential,
    /// The left potential `H★` of the spec's field.
    PotentialStar,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Part {
    Full,
    Gradient,
    Rotational,
    /// `G u` (right) or `Gᵀ u★` (left), tangent to spheres about the origin.
    RotationalNormalized,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decompose the field, exactly or at one point.
    Decompose {
        #[arg(long)]
        spec: String,
        /// Evaluation point, e.g. "1,2,3" (numeric mode).
        #[arg(long, allow_hyphen_values = true)]
        at: Option<String>,
        #[arg(long, value_enum, default_value = "both")]
        side: SideArg,
        /// Exact polynomial decomposition.
        #[arg(long)]
        exact: bool,
        /// Gauss–Legendre nodes.
        #[arg(long, default_value_t = 32)]
        nodes: usize,
        /// Use adaptive Simpson with this tolerance instead of Gauss–Legendre.
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long, value_enum, default_value = "json")]
        out: OutFormat,
    },
    /// Test whether the field is gradient-like.
    Check {
        #[arg(long)]
        spec: String,
        #[arg(long, value_enum, default_value = "right")]
        side: SideArg,
        /// Decide on sample points instead of exactly.
        #[arg(long)]
        numeric: bool,
        #[arg(long, default_value_t = geodecomp::poincare::DEFAULT_SAMPLES)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Integrate the field (or one of its parts) and measure drift of an integral.
    Flow {
        #[arg(long)]
        spec: String,
        #[arg(long, allow_hyphen_values = true)]
        x0: String,
        /// Time horizon.
        #[arg(long = "T", default_value_t = 10.0)]
        horizon: f64,
        #[arg(long, value_enum)]
        integral: Option<Integral>,
        #[arg(long, value_enum, default_value = "full")]
        part: Part,
        /// Side of the decomposition used by --part.
        #[arg(long, value_enum, default_value = "right")]
        side: SideArg,
        #[arg(long, default_value_t = 1e-10)]
        rtol: f64,
        #[arg(long, default_value_t = 1e-12)]
        atol: f64,
        /// Fixed-step RK4 with this step instead of adaptive DP54.
        #[arg(long)]
        rk4: Option<f64>,
        #[arg(long, default_value_t = 1_000_000)]
        max_steps: usize,
        /// CSV trace destination (header `t,x1,...,xn`).
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Check the hypotheses of the conjugacy criterion for two systems.
    Conjugacy {
        #[arg(long)]
        spec1: String,
        #[arg(long)]
        spec2: String,
        #[arg(long, default_value_t = 5.0)]
        box_r: f64,
        #[arg(long, default_value_t = 11)]
        grid_k: usize,
        #[arg(long, default_value_t = 32)]
        trials: usize,
        #[arg(long = "T", default_value_t = 50.0)]
        horizon: f64,
        #[arg(long, default_value_t = 1e-3)]
        eps: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn side_name(side: Side) -> &'static str {
    match side {
        Side::Left => "left",
        Side::Right => "right",
    }
}

fn envelope(command: &str, mut body: Value) -> Value {
    let obj = body.as_object_mut().expect("reports are objects");
    obj.insert("schema_version".into(), json!(SCHEMA_VERSION));
    obj.insert("command".into(), json!(command));
    body
}

fn to_json<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("reports are serializable")
}

fn vec_json(v: &[f64]) -> Value {
    json!(v)
}

fn exact_side(d: &ExactDecomposition) -> Value {
    let remainder: Vec<String> = d.remainder.components().iter().map(|p| p.to_string()).collect();
    let (h, u) = match d.side {
        Side::Right => ("H", "u"),
        Side::Left => ("H_star", "u_star"),
    };
    json!({
        "side": side_name(d.side),
        h: d.potential.to_string(),
        u: remainder,
    })
}

fn decompose(
    sys: &System,
    at: Option<&str>,
    side: SideArg,
    exact: bool,
    quadrature: QuadratureConfig,
    out: OutFormat,
) -> CliResult<String> {
    if exact {
        let parts = side
            .sides()
            .into_iter()
            .map(|s| decompose_exact(&sys.structure, &sys.field, s))
            .collect::<Result<Vec<_>, _>>()?;
        return Ok(match out {
            OutFormat::Json => {
                let body = json!({
                    "mode": "exact",
                    "field": sys.field.to_string(),
                    "sides": parts.iter().map(exact_side).collect::<Vec<_>>(),
                });
                format!("{:#}\n", envelope("decompose", body))
            }
            OutFormat::Text | OutFormat::Csv => {
                let mut s = String::new();
                for d in &parts {
                    let (h, u) = match d.side {
                        Side::Right => ("H", "u"),
                        Side::Left => ("H*", "u*"),
                    };
                    s.push_str(&format!("{h} = {}\n{u} = ({})\n", d.potential, d.remainder));
                }
                s
            }
        });
    }
    let at = at.ok_or_else(|| CliError::Usage("numeric mode needs --at (or use --exact)".into()))?;
    let x = parse_point(at, sys.structure.dimension())?;
    let d = decompose_at(&sys.structure, &sys.numeric, &x, &quadrature)?;
    let side_values = |s: Side| match s {
        Side::Right => ("right", d.h, &d.grad_h, &d.u, d.orthogonality_residual),
        Side::Left => ("left", d.h_star, &d.grad_h_star, &d.u_star, d.orthogonality_residual_star),
    };
    Ok(match out {
        OutFormat::Json => {
            let sides: Vec<Value> = side
                .sides()
                .into_iter()
                .map(|s| {
                    let (name, h, g, u, r) = side_values(s);
                    json!({
                        "side": name,
                        "potential": h,
                        "gradient": vec_json(g),
                        "remainder": vec_json(u),
                        "orthogonality_residual": r,
                    })
                })
                .collect();
            let body = json!({
                "mode": "numeric",
                "point": vec_json(&d.point),
                "quadrature": to_json(&quadrature),
                "sides": sides,
                "reconstruction_residual": d.reconstruction_residual,
                "decomposition": to_json(&d),
            });
            format!("{:#}\n", envelope("decompose", body))
        }
        OutFormat::Csv | OutFormat::Text => {
            let mut s = String::from("side,quantity,index,value\n");
            for side in side.sides() {
                let (name, h, g, u, r) = side_values(side);
                s.push_str(&format!("{name},potential,0,{h:e}\n"));
                for (i, v) in g.iter().enumerate() {
                    s.push_str(&format!("{name},gradient,{},{v:e}\n", i + 1));
                }
                for (i, v) in u.iter().enumerate() {
                    s.push_str(&format!("{name},remainder,{},{v:e}\n", i + 1));
                }
                s.push_str(&format!("{name},orthogonality_residual,0,{r:e}\n"));
            }
            s
        }
    })
}

fn part_field(sys: &System, part: Part, side: Side) -> CliResult<(PolyVectorField, String)> {
    if part == Part::Full {
        return Ok((sys.field.clone(), sys.label.clone()));
    }
    let d = decompose_exact(&sys.structure, &sys.field, side)?;
    let g = &sys.structure.exact()?.gram;
    Ok(match part {
        Part::Full => unreachable!(),
        Part::Gradient => (sys.field.sub(&d.remainder)?, "gradient part".into()),
        Part::Rotational => (d.remainder, "rotational part".into()),
        Part::RotationalNormalized => {
            let m = match side {
                Side::Right => g.clone(),
                Side::Left => g.transpose(),
            };
            (d.remainder.premultiply(&m)?, "normalized rotational part".into())
        }
    })
}

fn integral_function(sys: &System, integral: Integral) -> CliResult<ScalarField> {
    let n = sys.structure.dimension();
    Ok(match integral {
        Integral::Norm2 => ScalarField::norm_squared(n),
        Integral::Fb => ScalarField::quadratic_form(&sys.structure),
        Integral::Potential => scalar_field(
            &decompose_exact(&sys.structure, &sys.field, Side::Right)?.potential,
            "H",
        ),
        Integral::PotentialStar => scalar_field(
            &decompose_exact(&sys.structure, &sys.field, Side::Left)?.potential,
            "H_star",
        ),
    })
}

pub fn run(cli: Cli) -> CliResult<()> {
    crate::configure_threads()?;
    let report = match cli.command {
        Command::Decompose {
            spec,
            at,
            side,
            exact,
            nodes,
            tol,
            out,
        } => {
            let sys = load_spec(&spec)?;
            let quadrature = match tol {
                Some(tol) => QuadratureConfig::AdaptiveSimpson { tol },
                None => QuadratureConfig::GaussLegendre { nodes },
            };
            quadrature.validate()?;
            decompose(&sys, at.as_deref(), side, exact, quadrature, out)?
        }
        Command::Check {
            spec,
            side,
            numeric,
            samples,
            seed,
        } => {
            let sys = load_spec(&spec)?;
            let side = side.single()?;
            let report = if numeric {
                let pts = sample_points(sys.structure.dimension(), samples, seed);
                check_gradient_like(&sys.structure, &sys.numeric, side, &pts)?
            } else {
                check_gradient_like_exact(&sys.structure, &sys.field, side)?
            };
            format!("{:#}\n", envelope("check", to_json(&report)))
        }
        Command::Flow {
            spec,
            x0,
            horizon,
            integral,
            part,
            side,
            rtol,
            atol,
            rk4,
            max_steps,
            trace,
        } => {
            let sys = load_spec(&spec)?;
            let x0 = parse_point(&x0, sys.structure.dimension())?;
            let (field, label) = part_field(&sys, part, side.single()?)?;
            let field = field.to_numeric(label.clone());
            let cfg = IntegratorConfig {
                scheme: match rk4 {
                    Some(h) => Scheme::Rk4 { h },
                    None => Scheme::Dp54 { rtol, atol },
                },
                horizon,
                max_steps,
                ..IntegratorConfig::default()
            };
            let (drift, tr) = match integral {
                Some(i) => {
                    let f = integral_function(&sys, i)?;
                    let (rep, tr) = first_integral_drift(&field, &f, &x0, &cfg)?;
                    (Some(rep), tr)
                }
                None => (None, integrate(&field, &x0, &cfg)?),
            };
            if let Some(path) = trace {
                let mut buf = Vec::new();
                tr.write_csv(&mut buf)?;
                write_atomic(&path, &buf)?;
            }
            let body = json!({
                "field": label,
                "config": to_json(&cfg),
                "final_time": tr.final_time(),
                "final_state": vec_json(tr.final_state().as_slice()),
                "stats": to_json(&tr.stats),
                "drift": drift.map(|d| to_json(&d)),
            });
            format!("{:#}\n", envelope("flow", body))
        }
        Command::Conjugacy {
            spec1,
            spec2,
            box_r,
            grid_k,
            trials,
            horizon,
            eps,
            seed,
        } => {
            let a = load_spec(&spec1)?;
            let b = load_spec(&spec2)?;
            let cfg = ConjugacyConfig {
                box_r,
                grid_k,
                trials,
                horizon,
                eps,
                seed,
                ..ConjugacyConfig::default()
            };
            let report = compare_pair(&a.structure, &a.numeric, &b.structure, &b.numeric, &cfg)?;
            format!("{:#}\n", envelope("conjugacy", to_json(&report)))
        }
    };
    match cli.output {
        Some(path) => write_atomic(&path, report.as_bytes()),
        None => {
            use std::io::Write;
            let mut out = std::io::stdout().lock();
            out.write_all(report.as_bytes())?;
            Ok(())
        }
    }
}
