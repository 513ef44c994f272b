use std::fmt;
use std::io::Write;
use std::path::Path;

use hilbert_core::body::ConvexBody;
use hilbert_core::density::{density_grid_csv, point_density, VolumeKind};
use hilbert_core::estimators::{
    self, approximate_polytope, asvol_estimate, default_entropy_ladder, default_entropy_window, default_epsilon_ladder,
    entropy_estimate, epsilon_ladder, flag_approx_estimate, radius_ladder, verify_entropy_identity, verify_flag_ratio,
    Report,
};
use hilbert_core::io::{load_body, BodySpec};
use hilbert_core::metric::{funk_distance, hilbert_distance};
use hilbert_core::volume::{growth_curve, monte_carlo_volume, BallSpec, Budget, VolumeEstimate};
use hilbert_core::{Error, FaceId, Polytope, Vector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::config::{Ball, Cli, Command, Common, EpsLadder, Kind, Ladder, Picker};

/// Default tangent-ball net sizes for smooth bodies.
const DENSITY_DIRS_2D: usize = 512;
const DENSITY_DIRS_3D: usize = 4096;
const DEFAULT_GRID: usize = 64;
const DEFAULT_R_MAX: f64 = 9.0;
const DEFAULT_R_STEP: f64 = 0.5;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Core(Error),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(Error::NonConvergentFit { .. }) => 2,
            _ => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Io(m) => f.write_str(m),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn emit(common: &Common, text: &str) -> Result<(), CliError> {
    match &common.out {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes()).map_err(|e| CliError::Io(e.to_string()))
        }
    }
}

fn emit_report(common: &Common, report: &Report) -> Result<(), CliError> {
    emit(common, &(report.to_json() + "\n"))
}

fn body(common: &Common) -> Result<(ConvexBody, String), CliError> {
    let path = common.body.as_deref().ok_or_else(|| usage("--body is required"))?;
    Ok((load_body(path)?, fixture_name(path)))
}

fn fixture_name(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

fn polytope(b: &ConvexBody) -> Result<&Polytope, CliError> {
    b.as_polytope().ok_or_else(|| usage("this command needs a polytope body"))
}

fn point(coords: &[f64], dim: usize, name: &str) -> Result<Vector, CliError> {
    if coords.len() != dim {
        return Err(usage(format!("--{name} needs {dim} coordinates, got {}", coords.len())));
    }
    Ok(Vector::from_vec(coords.to_vec()))
}

fn kind(common: &Common) -> VolumeKind {
    match common.kind.unwrap_or(Kind::Busemann) {
        Kind::Busemann => VolumeKind::Busemann,
        Kind::HolmesThompson => VolumeKind::HolmesThompson,
    }
}

fn budget(common: &Common, dim: usize) -> Budget {
    let d = Budget::default_for(dim);
    Budget { directions: common.directions.unwrap_or(d.directions), radial: common.radial.unwrap_or(d.radial) }
}

fn radii(l: &Ladder, default: impl FnOnce() -> Vec<f64>) -> Result<Vec<f64>, CliError> {
    let r = match (&l.radii, l.r_max) {
        (Some(r), _) => r.clone(),
        (None, Some(max)) => radius_ladder(l.r_step.unwrap_or(DEFAULT_R_STEP), max),
        (None, None) => default(),
    };
    if r.is_empty() || r.iter().any(|x| !(x.is_finite() && *x > 0.0)) || r.windows(2).any(|w| w[1] <= w[0]) {
        return Err(usage("radii must be positive and increasing"));
    }
    Ok(r)
}

fn epsilons(l: &EpsLadder, dim: usize) -> Result<Vec<f64>, CliError> {
    let e = match (&l.eps, l.eps_from, l.eps_to) {
        (Some(e), _, _) => e.clone(),
        (None, Some(a), Some(b)) => epsilon_ladder(a, b),
        (None, None, None) => default_epsilon_ladder(dim),
        _ => return Err(usage("--eps-from and --eps-to go together")),
    };
    if e.len() < 2 || e.iter().any(|x| !(x.is_finite() && *x > 0.0)) || e.windows(2).any(|w| w[1] >= w[0]) {
        return Err(usage("eps ladder needs at least two positive, decreasing values"));
    }
    Ok(e)
}

fn window(w: &Option<Vec<f64>>) -> Result<(f64, f64), CliError> {
    match w.as_deref() {
        None => Ok(default_entropy_window()),
        Some([lo, hi]) if lo < hi => Ok((*lo, *hi)),
        Some(_) => Err(usage("--window needs lo < hi")),
    }
}

pub fn dispatch(cli: Cli) -> Result<(), CliError> {
    let common = &cli.common;
    let seed = common.seed.unwrap_or(0);
    match &cli.command {
        Command::Distance { p, q, funk } => {
            let (b, _) = body(common)?;
            let d = b.dim();
            let p = point(p.as_deref().ok_or_else(|| usage("--p is required"))?, d, "p")?;
            let q = point(q.as_deref().ok_or_else(|| usage("--q is required"))?, d, "q")?;
            let h = hilbert_distance(&b, &p, &q)?;
            let text = if *funk {
                format!("hilbert,funk_pq,funk_qp\n{h},{},{}\n", funk_distance(&b, &p, &q)?, funk_distance(&b, &q, &p)?)
            } else {
                format!("{h}\n")
            };
            emit(common, &text)
        }
        Command::Density { p, grid, dirs } => {
            let (b, _) = body(common)?;
            let d = b.dim();
            let dirs = dirs.unwrap_or(if d >= 3 { DENSITY_DIRS_3D } else { DENSITY_DIRS_2D });
            let k = kind(common);
            let text = match p {
                Some(p) => {
                    let x = point(p, d, "p")?;
                    let coords: Vec<String> = x.iter().map(|c| c.to_string()).collect();
                    format!(
                        "point,density,kind\n{},{},{}\n",
                        coords.join(" "),
                        point_density(&b, &x, k, dirs)?,
                        k.name()
                    )
                }
                None => density_grid_csv(&b, k, grid.unwrap_or(DEFAULT_GRID), dirs)?,
            };
            emit(common, &text)
        }
        Command::BallVolume { p, ladder, ball, samples } => {
            let (b, name) = body(common)?;
            let d = b.dim();
            let center = match p {
                Some(p) => point(p, d, "p")?,
                None => b.certificate().center.clone(),
            };
            let spec = match ball.unwrap_or(Ball::Metric) {
                Ball::Metric => BallSpec::metric(&b, center, 0.0),
                Ball::Asymptotic => BallSpec::asymptotic(&b, center, 0.0),
            };
            let k = kind(common);
            let ladder = radii(ladder, || radius_ladder(1.0, 6.0))?;
            let curve = growth_curve(&spec, k, &ladder, budget(common, d))?;
            emit(common, &growth_table(&spec, k, &curve, &name, *samples, seed)?)
        }
        Command::Flags { lattice } => {
            let (b, _) = body(common)?;
            let p = polytope(&b)?;
            let mut text = format!("{}\n", p.flag_count());
            if *lattice {
                let counts: Vec<String> = (0..=p.dim()).map(|r| p.lattice().count(r).to_string()).collect();
                text.push_str(&format!("faces by rank: {}\n", counts.join(" ")));
            }
            emit(common, &text)
        }
        Command::Decompose { picker } => {
            let (b, _) = body(common)?;
            let p = polytope(&b)?;
            let simplices = match picker.unwrap_or(Picker::Barycenter) {
                Picker::Barycenter => p.barycentric_decomposition(),
                Picker::Random => {
                    // one fixed interior point per face, drawn up front so the picker is pure
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    let points: Vec<Vector> =
                        (0..p.lattice().faces().len()).map(|id| random_face_point(p, id, &mut rng)).collect();
                    p.flag_decomposition(|_, id| points[id].clone())?
                }
            };
            let d = p.dim();
            let mut text = String::from("simplex,volume,vertices\n");
            for (i, s) in simplices.iter().enumerate() {
                let verts: Vec<String> =
                    s.vertices.iter().map(|v| v.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(" ")).collect();
                text.push_str(&format!("{i},{},{}\n", s.volume(), verts.join(";")));
            }
            let total: f64 = simplices.iter().map(|s| s.volume()).sum();
            eprintln!(
                "{} flag simplices in dimension {d}, total volume {total} (polytope {})",
                simplices.len(),
                p.volume()
            );
            emit(common, &text)
        }
        Command::Asvol { ladder } => {
            let (b, name) = body(common)?;
            let k = kind(common);
            let ladder = radii(ladder, || radius_ladder(DEFAULT_R_STEP, DEFAULT_R_MAX))?;
            let est = asvol_estimate(&b, k, &ladder, budget(common, b.dim()))?;
            emit_report(
                common,
                &Report {
                    quantity: format!("asvol-{}", k.name()),
                    estimate: est.value,
                    uncertainty: est.uncertainty,
                    window: vec![est.window.0, est.window.1],
                    fixtures: vec![name],
                    details: serde_json::to_value(&est).expect("serializable"),
                },
            )
        }
        Command::Entropy { ladder, window: w } => {
            let (b, name) = body(common)?;
            let k = kind(common);
            let ladder = radii(ladder, default_entropy_ladder)?;
            let w = window(w)?;
            let fit = entropy_estimate(&b, None, k, &ladder, w, budget(common, b.dim()))?;
            emit_report(
                common,
                &Report {
                    quantity: format!("entropy-{}", k.name()),
                    estimate: fit.slope,
                    uncertainty: fit.slope_stderr,
                    window: vec![w.0, w.1],
                    fixtures: vec![name],
                    details: serde_json::to_value(&fit).expect("serializable"),
                },
            )
        }
        Command::Approximate { eps } => {
            let (b, _) = body(common)?;
            let eps = eps.ok_or_else(|| usage("--eps is required"))?;
            let p = approximate_polytope(&b, eps)?;
            eprintln!("{} vertices, {} facets, {} flags", p.vertices().len(), p.facets().len(), p.flag_count());
            let spec = BodySpec::from_body(&ConvexBody::polytope(p))?;
            emit(common, &(spec.to_json() + "\n"))
        }
        Command::FlagApprox { ladder } => {
            let (b, name) = body(common)?;
            let eps = epsilons(ladder, b.dim())?;
            let fit = flag_approx_estimate(&b, &eps)?;
            emit_report(
                common,
                &Report {
                    quantity: "flag-approximability".into(),
                    estimate: fit.slope,
                    uncertainty: fit.slope_stderr,
                    window: vec![eps[0], *eps.last().unwrap()],
                    fixtures: vec![name],
                    details: json!({
                        "eps": eps,
                        "log_inverse_eps": fit.x,
                        "log_flags": fit.y,
                        "intercept": fit.intercept,
                        "rms": fit.rms,
                        "vertex_budget": if b.dim() >= 3 { estimators::VERTEX_BUDGET_3D } else { estimators::VERTEX_BUDGET_2D },
                    }),
                },
            )
        }
        Command::VerifyRatio { r_max } => {
            let (b, name) = body(common)?;
            let p = polytope(&b)?;
            let rep = verify_flag_ratio(p, kind(common), r_max.unwrap_or(DEFAULT_R_MAX), budget(common, p.dim()))?;
            emit_report(common, &rep.report(&name))
        }
        Command::VerifyIdentity { ladder, window: w, eps } => {
            let (b, name) = body(common)?;
            let r = radii(ladder, default_entropy_ladder)?;
            let e = epsilons(eps, b.dim())?;
            let rep = verify_entropy_identity(&b, kind(common), &r, window(w)?, &e, budget(common, b.dim()))?;
            emit_report(common, &rep.report(&name))
        }
    }
}

fn growth_table(
    spec: &BallSpec,
    kind: VolumeKind,
    curve: &[(f64, VolumeEstimate)],
    name: &str,
    samples: Option<usize>,
    seed: u64,
) -> Result<String, CliError> {
    let Some(n) = samples else {
        return Ok(hilbert_core::volume::growth_csv(curve, name));
    };
    let mut out = String::from("R,volume,stderr,kind,body,mc_volume,mc_stderr\n");
    for (r, e) in curve {
        let mut s = spec.clone();
        s.radius = *r;
        let mc = monte_carlo_volume(&s, kind, n, seed)?;
        out.push_str(&format!("{r},{},{},{},{name},{},{}\n", e.value, e.stderr, kind.name(), mc.value, mc.stderr));
    }
    Ok(out)
}

/// Random convex combination of the face's vertices with weights bounded away from zero.
fn random_face_point(p: &Polytope, id: FaceId, rng: &mut ChaCha8Rng) -> Vector {
    let verts = &p.lattice().face(id).vertices;
    if id == p.lattice().top() {
        return p.base_point().clone();
    }
    let w: Vec<f64> = verts.iter().map(|_| rng.gen_range(0.2..1.0)).collect();
    let total: f64 = w.iter().sum();
    let mut x = Vector::zeros(p.dim());
    for (i, wi) in verts.iter().zip(&w) {
        x += &p.vertices()[*i] * (wi / total);
    }
    x
}
