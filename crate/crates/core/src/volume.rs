//! Busemann and Holmes–Thompson volumes of metric and asymptotic balls.
//!
//! Polytopes are integrated cone by cone: the ball is split by the cones from its centre `p`
//! over the boundary simplices of a flag decomposition. Inside a cone with boundary vertices
//! `x_0, …, x_{d−1}` (`x_k` in the relative interior of the `k`-face of the flag) a point is
//! `y = p + t (x − p)` with `x = x_0 + α_1 (x_1 − x_0) + α_1 α_2 (x_2 − x_1)`. The radial
//! variable is the Hilbert (or asymptotic) radius `σ` and the transverse variables are
//! `α_k = e^{−τ_k}`, so the integrand is smooth and of unit scale in `(σ, τ)` all the way into
//! the corners. Facet slacks of `y` are formed from those of `p` and the `x_k`, with exact zeros
//! on the faces, so densities stay accurate at slacks far below machine epsilon.
//!
//! Other bodies are integrated in polar coordinates about `p` over a direction net with the
//! closed-form radial extent, again in the variable `σ`.

use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::body::ConvexBody;
use crate::density::{point_density, polytope_tangent_volumes, RoundedTangent, VolumeKind};
use crate::error::{Error, Result};
use crate::linalg::{Matrix, Vector};
use crate::metric::{asymptotic_factor, hilbert_distance, radial_extent_from_hits};
use crate::polytope::{FlagSimplex, Polytope};
use crate::quadrature::{breakpoints, gauss_legendre};
use crate::sphere::DirectionNet;

pub const MIN_DIRECTIONS: usize = 16;
pub const MIN_RADIAL: usize = 8;
/// Transverse cut-off beyond `2R`; the integrand decays like `e^{−(τ − 2σ)}` there.
const TAU_MARGIN: f64 = 16.0;
/// Tangent-ball net size for smooth bodies.
const TANGENT_DIRS_2D: usize = 128;
const TANGENT_DIRS_3D: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BallKind {
    Metric,
    Asymptotic,
}

/// Region to which a ball is restricted; its apex must be the ball centre.
#[derive(Debug, Clone)]
pub enum Clip {
    /// A flag simplex whose last vertex (picked in the top face) is the centre.
    FlagSimplex(FlagSimplex),
    /// The cone from the centre over a facet.
    FacetCone(usize),
}

#[derive(Debug, Clone)]
pub struct BallSpec {
    pub body: ConvexBody,
    pub center: Vector,
    pub radius: f64,
    pub kind: BallKind,
    pub clip: Option<Clip>,
}

impl BallSpec {
    pub fn metric(body: &ConvexBody, center: Vector, radius: f64) -> Self {
        BallSpec { body: body.clone(), center, radius, kind: BallKind::Metric, clip: None }
    }

    pub fn asymptotic(body: &ConvexBody, center: Vector, radius: f64) -> Self {
        BallSpec { body: body.clone(), center, radius, kind: BallKind::Asymptotic, clip: None }
    }

    pub fn with_clip(mut self, clip: Clip) -> Self {
        self.clip = Some(clip);
        self
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.body.dim();
        if self.center.len() != d {
            return Err(Error::InvalidSpec(format!("centre has dimension {}, body {}", self.center.len(), d)));
        }
        if !self.body.is_interior(&self.center) {
            return Err(Error::InvalidSpec("centre is not interior".into()));
        }
        if !(self.radius >= 0.0) || !self.radius.is_finite() {
            return Err(Error::InvalidSpec(format!("radius must be finite and nonnegative, got {}", self.radius)));
        }
        if let Some(clip) = &self.clip {
            let poly = self
                .body
                .as_polytope()
                .ok_or_else(|| Error::InvalidSpec("clip regions require a polytope body".into()))?;
            match clip {
                Clip::FlagSimplex(s) => {
                    if s.vertices.len() != d + 1 || s.flag.0.len() != d + 1 {
                        return Err(Error::InvalidSpec("flag simplex has the wrong number of vertices".into()));
                    }
                    let scale = self.body.certificate().outer.max(1.0);
                    if (&s.vertices[d] - &self.center).norm() > 1e-9 * scale {
                        return Err(Error::InvalidSpec("flag simplex apex differs from the ball centre".into()));
                    }
                }
                Clip::FacetCone(i) => {
                    if *i >= poly.facets().len() {
                        return Err(Error::InvalidSpec(format!("facet {i} out of range")));
                    }
                }
            }
        }
        Ok(())
    }

    /// Membership in the region (used by the Monte Carlo cross-check).
    pub fn contains(&self, x: &Vector) -> bool {
        if !self.body.is_interior(x) {
            return false;
        }
        let inside = match self.kind {
            BallKind::Metric => {
                hilbert_distance(&self.body, &self.center, x).map(|r| r <= self.radius).unwrap_or(false)
            }
            BallKind::Asymptotic => {
                let f = asymptotic_factor(self.radius);
                f > 0.0 && self.body.contains(&(&self.center + (x - &self.center) / f), 0.0)
            }
        };
        if !inside {
            return false;
        }
        match &self.clip {
            None => true,
            Some(Clip::FlagSimplex(s)) => s.contains(x, 0.0),
            Some(Clip::FacetCone(i)) => {
                let poly = self.body.as_polytope().expect("validated");
                let u = x - &self.center;
                if u.norm() == 0.0 {
                    return true;
                }
                let exit = poly
                    .facets()
                    .iter()
                    .enumerate()
                    .filter(|(_, h)| h.normal.dot(&u) > 0.0)
                    .map(|(k, h)| (k, h.slack(&self.center) / h.normal.dot(&u)))
                    .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
                exit.map(|(k, _)| k == *i).unwrap_or(false)
            }
        }
    }
}

/// Quadrature budget: directions of the net and radial nodes per direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budget {
    pub directions: usize,
    pub radial: usize,
}

impl Budget {
    pub fn default_for(dim: usize) -> Self {
        match dim {
            1 | 2 => Budget { directions: 1024, radial: 64 },
            _ => Budget { directions: 4096, radial: 48 },
        }
    }

    fn check(&self) -> Result<()> {
        if self.directions < MIN_DIRECTIONS || self.radial < MIN_RADIAL {
            return Err(Error::BudgetTooSmall(format!(
                "{} directions x {} radial nodes (minimum {MIN_DIRECTIONS} x {MIN_RADIAL})",
                self.directions, self.radial
            )));
        }
        Ok(())
    }

    /// Gauss order used per unit cell.
    fn order(&self) -> usize {
        (self.radial / 16).clamp(3, 8)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    RadialQuadrature,
    MonteCarlo,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VolumeEstimate {
    pub value: f64,
    pub stderr: f64,
    pub method: Method,
    pub nodes: usize,
    pub kind: VolumeKind,
}

/// Worker pool, sized by `HILBERT_THREADS` when set.
pub fn pool() -> &'static rayon::ThreadPool {
    static POOL: OnceLock<rayon::ThreadPool> = OnceLock::new();
    POOL.get_or_init(|| {
        let mut builder = rayon::ThreadPoolBuilder::new();
        if let Some(n) = std::env::var("HILBERT_THREADS").ok().and_then(|s| s.parse::<usize>().ok()) {
            if n > 0 {
                builder = builder.num_threads(n);
            }
        }
        builder.build().expect("thread pool")
    })
}

/// Volume of a single region.
pub fn region_volume(spec: &BallSpec, kind: VolumeKind, budget: Budget) -> Result<VolumeEstimate> {
    let mut curve = growth_curve(spec, kind, &[spec.radius], budget)?;
    Ok(curve.pop().expect("one radius").1)
}

/// Metric-ball volumes `V(R)` about `p` along a ladder of radii.
pub fn ball_growth_curve(
    body: &ConvexBody,
    p: &Vector,
    kind: VolumeKind,
    ladder: &[f64],
    budget: Budget,
) -> Result<Vec<(f64, VolumeEstimate)>> {
    growth_curve(&BallSpec::metric(body, p.clone(), 0.0), kind, ladder, budget)
}

/// Volumes of the regions obtained from `spec` by replacing its radius with each ladder value.
/// Shells between consecutive radii are integrated once and accumulated, so the curve is
/// monotone.
pub fn growth_curve(
    spec: &BallSpec,
    kind: VolumeKind,
    ladder: &[f64],
    budget: Budget,
) -> Result<Vec<(f64, VolumeEstimate)>> {
    budget.check()?;
    spec.validate()?;
    if ladder.is_empty() {
        return Ok(vec![]);
    }
    if ladder.iter().any(|&r| !(r >= 0.0) || !r.is_finite()) || ladder.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidSpec("radius ladder must be increasing and nonnegative".into()));
    }
    let rmax = *ladder.last().unwrap();
    let order = budget.order();
    let (shells, coarse, nodes) = if rmax == 0.0 {
        (vec![0.0; ladder.len()], vec![0.0; ladder.len()], 0)
    } else if let (Some(poly), true) = (spec.body.as_polytope(), spec.body.dim() >= 2) {
        let cones = cones_for(poly, &spec.center, spec.clip.as_ref())?;
        let run = |q: usize| polytope_shells(poly, &spec.center, &cones, spec.kind, kind, ladder, q);
        let (fine, nodes) = run(order)?;
        let (rough, _) = run(order - 1)?;
        (fine, rough, nodes)
    } else {
        if spec.clip.is_some() {
            return Err(Error::InvalidSpec("clip regions require a polytope body".into()));
        }
        smooth_shells(&spec.body, &spec.center, spec.kind, kind, ladder, budget)?
    };
    let mut out = Vec::with_capacity(ladder.len());
    let (mut acc, mut acc_coarse) = (0.0, 0.0);
    for (k, &r) in ladder.iter().enumerate() {
        acc += shells[k];
        acc_coarse += coarse[k];
        out.push((
            r,
            VolumeEstimate {
                value: acc,
                stderr: (acc - acc_coarse).abs(),
                method: Method::RadialQuadrature,
                nodes,
                kind,
            },
        ));
    }
    Ok(out)
}

/// Gauss nodes `(σ, weight, shell)` on unit-or-smaller cells between consecutive ladder radii.
fn sigma_rule(ladder: &[f64], cell: f64, order: usize) -> Vec<(f64, f64, usize)> {
    let (x, w) = gauss_legendre(order);
    let mut out = Vec::new();
    let mut lo = 0.0;
    for (shell, &hi) in ladder.iter().enumerate() {
        if hi > lo {
            for c in breakpoints(lo, hi, cell, &[]).windows(2) {
                let half = 0.5 * (c[1] - c[0]);
                let mid = 0.5 * (c[1] + c[0]);
                for k in 0..order {
                    out.push((mid + half * x[k], half * w[k], shell));
                }
            }
        }
        lo = hi;
    }
    out
}

fn tau_rule(hi: f64, splits: &[f64], order: usize) -> Vec<(f64, f64)> {
    let (x, w) = gauss_legendre(order);
    let mut out = Vec::new();
    for c in breakpoints(0.0, hi, 1.0, splits).windows(2) {
        let half = 0.5 * (c[1] - c[0]);
        let mid = 0.5 * (c[1] + c[0]);
        for k in 0..order {
            out.push((mid + half * x[k], half * w[k]));
        }
    }
    out
}

/// Position along a ray in units of the boundary hit: `(t, 1 − t, dt/dσ)`.
fn radial_profile(kind: BallKind, sigma: f64, tm: f64) -> (f64, f64, f64) {
    let decay = (-2.0 * sigma).exp();
    match kind {
        BallKind::Asymptotic => (-(-2.0 * sigma).exp_m1(), decay, 2.0 * decay),
        BallKind::Metric => {
            let den = decay + tm;
            let t = tm * (-(-2.0 * sigma).exp_m1()) / den;
            let rest = (1.0 + tm) * decay / den;
            let rate = 2.0 * decay * tm * (1.0 + tm) / (den * den);
            (t, rest, rate)
        }
    }
}

/// Boundary simplex of one cone with facet slacks at its vertices.
#[derive(Debug, Clone)]
struct Cone {
    points: Vec<Vector>,
    slacks: Vec<Vec<f64>>,
    /// Slack at the centre of the facet carrying the simplex.
    height: f64,
    /// `|x_1 − x_0|` in 2D, twice the triangle area in 3D.
    jacobian: f64,
}

fn make_cone(poly: &Polytope, p: &Vector, flag_faces: &[usize], points: Vec<Vector>) -> Cone {
    let d = poly.dim();
    let lattice = poly.lattice();
    let slacks: Vec<Vec<f64>> = points
        .iter()
        .zip(flag_faces)
        .map(|(x, &face)| {
            let on = &lattice.face(face).facets;
            poly.facets()
                .iter()
                .enumerate()
                .map(|(i, h)| if on.contains(&i) { 0.0 } else { h.slack(x).max(0.0) })
                .collect()
        })
        .collect();
    let facet = flag_faces[d - 1] - lattice.rank_ids(d - 1).start;
    let height = poly.facets()[facet].slack(p);
    let jacobian = if d == 2 {
        (&points[1] - &points[0]).norm()
    } else {
        (&points[1] - &points[0]).cross(&(&points[2] - &points[1])).norm()
    };
    Cone { points, slacks, height, jacobian }
}

fn cones_for(poly: &Polytope, p: &Vector, clip: Option<&Clip>) -> Result<Vec<Cone>> {
    let d = poly.dim();
    if d > 3 {
        return Err(Error::UnsupportedDimension(d));
    }
    let barycentric = |faces: &[usize]| -> Vec<Vector> { faces[..d].iter().map(|&f| poly.barycenter(f)).collect() };
    let facet_rank = poly.lattice().rank_ids(d - 1);
    Ok(match clip {
        Some(Clip::FlagSimplex(s)) => vec![make_cone(poly, p, &s.flag.0, s.vertices[..d].to_vec())],
        Some(Clip::FacetCone(i)) => poly
            .enumerate_flags()
            .into_iter()
            .filter(|f| f.0[d - 1] == facet_rank.start + i)
            .map(|f| make_cone(poly, p, &f.0, barycentric(&f.0)))
            .collect(),
        None => poly.enumerate_flags().into_iter().map(|f| make_cone(poly, p, &f.0, barycentric(&f.0))).collect(),
    })
}

/// Transverse values `τ` in the 2D cone at which the backward exit switches facets.
fn backward_kinks(poly: &Polytope, p: &Vector, cone: &Cone) -> Vec<f64> {
    let cross = |a: &Vector, b: &Vector| a[0] * b[1] - a[1] * b[0];
    let e = &cone.points[1] - &cone.points[0];
    let mut out = Vec::new();
    for v in poly.vertices() {
        let back = p - v;
        let den = cross(&e, &back);
        if den.abs() < 1e-300 {
            continue;
        }
        let alpha = cross(&(p - &cone.points[0]), &back) / den;
        if alpha > 0.0 && alpha < 1.0 {
            let x = &cone.points[0] + &e * alpha;
            if (x - p).dot(&back) > 0.0 {
                out.push(-alpha.ln());
            }
        }
    }
    out
}

/// Exit time from `p` along `w`, in units of `w`, from the facet slacks at `p`.
fn exit_time(poly: &Polytope, p_slacks: &[f64], w: &Vector) -> f64 {
    poly.facets()
        .iter()
        .zip(p_slacks)
        .filter_map(|(h, &s)| {
            let rate = h.normal.dot(w);
            if rate > 0.0 {
                Some(s / rate)
            } else {
                None
            }
        })
        .fold(f64::INFINITY, f64::min)
}

/// Shell integrals for a polytope; returns the shells and the number of density evaluations.
fn polytope_shells(
    poly: &Polytope,
    p: &Vector,
    cones: &[Cone],
    ball: BallKind,
    kind: VolumeKind,
    ladder: &[f64],
    order: usize,
) -> Result<(Vec<f64>, usize)> {
    let d = poly.dim();
    let rmax = *ladder.last().unwrap();
    let sigma = sigma_rule(ladder, 1.0, order);
    let tau_max = 2.0 * rmax + TAU_MARGIN;
    let p_slacks = poly.slacks(p);
    let n_shells = ladder.len();
    // one job per (cone, outer transverse node)
    let mut jobs: Vec<(usize, f64, f64)> = Vec::new();
    let inner = tau_rule(tau_max, &[], order);
    for (c, cone) in cones.iter().enumerate() {
        let splits = if d == 2 { backward_kinks(poly, p, cone) } else { vec![] };
        for (t, w) in tau_rule(tau_max, &splits, order) {
            jobs.push((c, t, w));
        }
    }
    let results: Vec<Result<Vec<f64>>> = pool().install(|| {
        jobs.par_iter()
            .map(|&(c, tau1, w1)| {
                let cone = &cones[c];
                let a1 = (-tau1).exp();
                let mut shells = vec![0.0; n_shells];
                let transverse: Vec<(Vec<f64>, Vector, f64)> = if d == 2 {
                    let lambda = vec![-(-tau1).exp_m1(), a1];
                    let x = &cone.points[0] + (&cone.points[1] - &cone.points[0]) * a1;
                    vec![(lambda, x, w1 * a1 * cone.jacobian)]
                } else {
                    inner
                        .iter()
                        .map(|&(tau2, w2)| {
                            let a2 = (-tau2).exp();
                            let lambda = vec![-(-tau1).exp_m1(), a1 * (-(-tau2).exp_m1()), a1 * a2];
                            let x = &cone.points[0]
                                + (&cone.points[1] - &cone.points[0]) * a1
                                + (&cone.points[2] - &cone.points[1]) * (a1 * a2);
                            (lambda, x, w1 * w2 * a1 * a1 * a2 * cone.jacobian)
                        })
                        .collect()
                };
                let mut slacks = vec![0.0; p_slacks.len()];
                for (lambda, x, area) in transverse {
                    let back = exit_time(poly, &p_slacks, &(p - &x));
                    let boundary: Vec<f64> = (0..p_slacks.len())
                        .map(|i| lambda.iter().zip(&cone.slacks).map(|(l, s)| l * s[i]).sum())
                        .collect();
                    for &(s, ws, shell) in &sigma {
                        let (t, rest, rate) = radial_profile(ball, s, back);
                        for i in 0..slacks.len() {
                            slacks[i] = rest * p_slacks[i] + t * boundary[i];
                        }
                        let h = polytope_tangent_volumes(poly, &slacks)?.density(d, kind);
                        shells[shell] += ws * area * h * t.powi(d as i32 - 1) * cone.height * rate;
                    }
                }
                Ok(shells)
            })
            .collect()
    });
    let mut total = vec![0.0; n_shells];
    for r in results {
        for (acc, v) in total.iter_mut().zip(r?) {
            *acc += v;
        }
    }
    let per_job = if d == 2 { 1 } else { inner.len() };
    Ok((total, jobs.len() * per_job * sigma.len()))
}

/// Shell integrals for bodies given by oracles, with a direction-halving error estimate.
fn smooth_shells(
    body: &ConvexBody,
    p: &Vector,
    ball: BallKind,
    kind: VolumeKind,
    ladder: &[f64],
    budget: Budget,
) -> Result<(Vec<f64>, Vec<f64>, usize)> {
    let d = body.dim();
    if d > 3 {
        return Err(Error::UnsupportedDimension(d));
    }
    let order = budget.order();
    let rmax = *ladder.last().unwrap();
    let cells = (budget.radial / order).max(rmax.ceil() as usize).max(1);
    let sigma = sigma_rule(ladder, rmax / cells as f64 + 1e-12, order);
    let net = DirectionNet::new(d, budget.directions);
    let tangent = RoundedTangent::new(d, if d == 3 { TANGENT_DIRS_3D } else { TANGENT_DIRS_2D })?;
    let n_shells = ladder.len();
    let per_dir: Vec<Result<Vec<f64>>> = pool().install(|| {
        net.dirs
            .par_iter()
            .zip(net.weights.par_iter())
            .map(|(u, &wu)| {
                let (tm, tp) = body.chord_endpoints(p, u)?;
                let mut shells = vec![0.0; n_shells];
                let mut transform = Matrix::identity(d, d);
                for &(s, ws, shell) in &sigma {
                    let decay = (-2.0 * s).exp();
                    let (r, rate) = match ball {
                        BallKind::Metric => {
                            let den = tp * decay + tm;
                            (radial_extent_from_hits(tm, tp, s), 2.0 * decay * tp * tm * (tp + tm) / (den * den))
                        }
                        BallKind::Asymptotic => (asymptotic_factor(s) * tp, 2.0 * decay * tp),
                    };
                    let y = p + u * r;
                    let h = if let Some(poly) = body.as_polytope() {
                        polytope_tangent_volumes(poly, &poly.slacks(&y))?.density(d, kind)
                    } else {
                        tangent.volumes(body, &y, &mut transform)?.density(d, kind)
                    };
                    shells[shell] += wu * ws * h * r.powi(d as i32 - 1) * rate;
                }
                Ok(shells)
            })
            .collect()
    });
    let mut fine = vec![0.0; n_shells];
    let mut half = vec![0.0; n_shells];
    for (j, r) in per_dir.into_iter().enumerate() {
        let s = r?;
        for k in 0..n_shells {
            fine[k] += s[k];
            if j % 2 == 0 {
                half[k] += 2.0 * s[k];
            }
        }
    }
    if d == 1 {
        half = fine.clone();
    }
    Ok((fine, half, net.len() * sigma.len()))
}

/// Rejection-sampling estimate inside the bounding box of the asymptotic ball containing the region.
pub fn monte_carlo_volume(spec: &BallSpec, kind: VolumeKind, samples: usize, seed: u64) -> Result<VolumeEstimate> {
    spec.validate()?;
    if samples < 100 {
        return Err(Error::BudgetTooSmall(format!("{samples} Monte Carlo samples")));
    }
    let d = spec.body.dim();
    let f = asymptotic_factor(spec.radius);
    if f == 0.0 {
        return Ok(VolumeEstimate { value: 0.0, stderr: 0.0, method: Method::MonteCarlo, nodes: 0, kind });
    }
    let (mut lo, mut hi) = (Vector::zeros(d), Vector::zeros(d));
    for k in 0..d {
        let mut e = Vector::zeros(d);
        e[k] = 1.0;
        let c = spec.center[k];
        hi[k] = c + f * (spec.body.support(&e) - c);
        lo[k] = c - f * (spec.body.support(&(-&e)) + c);
    }
    let box_volume: f64 = (0..d).map(|k| hi[k] - lo[k]).product();
    let chunks = 64usize;
    let per = samples.div_ceil(chunks);
    let sums: Vec<Result<(f64, f64, usize)>> = pool().install(|| {
        (0..chunks)
            .into_par_iter()
            .map(|c| {
                let mut rng =
                    ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(c as u64));
                let (mut s1, mut s2, mut n) = (0.0, 0.0, 0usize);
                for _ in 0..per {
                    let x = Vector::from_fn(d, |k, _| rng.gen_range(lo[k]..hi[k]));
                    n += 1;
                    if spec.contains(&x) {
                        let h = point_density(
                            &spec.body,
                            &x,
                            kind,
                            if d == 3 { TANGENT_DIRS_3D } else { TANGENT_DIRS_2D },
                        )?;
                        s1 += h;
                        s2 += h * h;
                    }
                }
                Ok((s1, s2, n))
            })
            .collect()
    });
    let (mut s1, mut s2, mut n) = (0.0, 0.0, 0usize);
    for r in sums {
        let (a, b, c) = r?;
        s1 += a;
        s2 += b;
        n += c;
    }
    let nf = n as f64;
    let mean = s1 / nf;
    let var = (s2 / nf - mean * mean).max(0.0);
    Ok(VolumeEstimate {
        value: box_volume * mean,
        stderr: box_volume * (var / nf).sqrt(),
        method: Method::MonteCarlo,
        nodes: n,
        kind,
    })
}

/// CSV rows `R,volume,stderr,kind,body` for a growth curve.
pub fn growth_csv(curve: &[(f64, VolumeEstimate)], body_id: &str) -> String {
    let mut out = String::from("R,volume,stderr,kind,body\n");
    for (r, e) in curve {
        out.push_str(&format!("{r},{},{},{},{body_id}\n", e.value, e.stderr, e.kind.name()));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn v(c: &[f64]) -> Vector {
        Vector::from_vec(c.to_vec())
    }

    fn small() -> Budget {
        Budget { directions: 128, radial: 64 }
    }

    #[test]
    fn zero_radius_is_zero() {
        let disk = ConvexBody::unit_ball(2);
        let e = region_volume(&BallSpec::metric(&disk, v(&[0., 0.]), 0.0), VolumeKind::Busemann, small()).unwrap();
        assert_eq!(e.value, 0.0);
        let tri = ConvexBody::polytope(Polytope::regular_polygon(3, 1.0, 0.0));
        let e = region_volume(&BallSpec::metric(&tri, v(&[0., 0.]), 0.0), VolumeKind::Busemann, small()).unwrap();
        assert_eq!(e.value, 0.0);
    }

    #[test]
    fn budget_and_spec_validation() {
        let disk = ConvexBody::unit_ball(2);
        let spec = BallSpec::metric(&disk, v(&[0., 0.]), 1.0);
        let tiny = Budget { directions: 4, radial: 64 };
        assert!(matches!(region_volume(&spec, VolumeKind::Busemann, tiny), Err(Error::BudgetTooSmall(_))));
        let outside = BallSpec::metric(&disk, v(&[2., 0.]), 1.0);
        assert!(matches!(region_volume(&outside, VolumeKind::Busemann, small()), Err(Error::InvalidSpec(_))));
        let clipped = spec.with_clip(Clip::FacetCone(0));
        assert!(matches!(region_volume(&clipped, VolumeKind::Busemann, small()), Err(Error::InvalidSpec(_))));
    }

    #[test]
    fn hyperbolic_disk_growth() {
        let disk = ConvexBody::unit_ball(2);
        let ladder = [1.0, 2.0, 3.0, 6.0];
        let curve = ball_growth_curve(&disk, &v(&[0., 0.]), VolumeKind::Busemann, &ladder, small()).unwrap();
        for (r, e) in &curve {
            let exact = 2.0 * PI * (r.cosh() - 1.0);
            assert!((e.value / exact - 1.0).abs() < 1e-3, "R = {r}: {} vs {exact}", e.value);
        }
        assert!(curve.windows(2).all(|w| w[0].1.value <= w[1].1.value));
    }

    #[test]
    fn hyperbolic_ball_3d() {
        let ball = ConvexBody::unit_ball(3);
        let budget = Budget { directions: 64, radial: 48 };
        let curve = ball_growth_curve(&ball, &v(&[0., 0., 0.]), VolumeKind::Busemann, &[1.0, 2.5], budget).unwrap();
        for (r, e) in &curve {
            let exact = PI * ((2.0 * r).sinh() - 2.0 * r);
            assert!((e.value / exact - 1.0).abs() < 1e-2, "R = {r}: {} vs {exact}", e.value);
        }
    }

    #[test]
    fn triangle_balls_are_hexagonal_norm_balls() {
        // The triangle is isometric to a normed plane whose unit ball is a hexagon, so
        // Busemann area is πR² and Holmes–Thompson area is 9R²/π from any centre.
        let tri = ConvexBody::polytope(Polytope::regular_polygon(3, 1.0, 0.3));
        for centre in [v(&[0., 0.]), v(&[0.2, -0.1])] {
            let ladder = [1.0, 3.0, 6.0];
            for (kind, c) in [(VolumeKind::Busemann, PI), (VolumeKind::HolmesThompson, 9.0 / PI)] {
                let curve = ball_growth_curve(&tri, &centre, kind, &ladder, small()).unwrap();
                for (r, e) in &curve {
                    let exact = c * r * r;
                    assert!((e.value / exact - 1.0).abs() < 1e-4, "{kind:?} R = {r}: {} vs {exact}", e.value);
                    assert!(e.stderr < 1e-3 * exact);
                }
            }
        }
    }

    #[test]
    fn flag_simplex_clip_is_sixth_of_asymptotic_ball() {
        let tri = ConvexBody::polytope(Polytope::regular_polygon(3, 1.0, 0.0));
        let poly = tri.as_polytope().unwrap();
        let pieces = poly.barycentric_decomposition();
        let z = pieces[0].vertices[2].clone();
        let whole = region_volume(&BallSpec::asymptotic(&tri, z.clone(), 8.0), VolumeKind::Busemann, small()).unwrap();
        let mut sum = 0.0;
        for s in &pieces {
            let spec = BallSpec::asymptotic(&tri, z.clone(), 8.0).with_clip(Clip::FlagSimplex(s.clone()));
            let part = region_volume(&spec, VolumeKind::Busemann, small()).unwrap();
            assert!((part.value / (whole.value / 6.0) - 1.0).abs() < 1e-6);
            sum += part.value;
        }
        assert!((sum / whole.value - 1.0).abs() < 1e-10);
        let facet = BallSpec::asymptotic(&tri, z, 8.0).with_clip(Clip::FacetCone(1));
        let third = region_volume(&facet, VolumeKind::Busemann, small()).unwrap();
        assert!((third.value / (whole.value / 3.0) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn flag_simplex_with_moved_apex_rejected() {
        let tri = ConvexBody::polytope(Polytope::regular_polygon(3, 1.0, 0.0));
        let pieces = tri.as_polytope().unwrap().barycentric_decomposition();
        let spec = BallSpec::metric(&tri, v(&[0.1, 0.0]), 1.0).with_clip(Clip::FlagSimplex(pieces[0].clone()));
        assert!(matches!(spec.validate(), Err(Error::InvalidSpec(_))));
    }

    #[test]
    fn interval_length_is_twice_radius() {
        let interval = ConvexBody::polytope(Polytope::cube(1, 1.0));
        for kind in [VolumeKind::Busemann, VolumeKind::HolmesThompson] {
            let e = region_volume(&BallSpec::metric(&interval, v(&[0.3]), 4.0), kind, small()).unwrap();
            assert!((e.value - 8.0).abs() < 1e-8, "{}", e.value);
        }
    }

    #[test]
    fn quadrature_agrees_with_monte_carlo() {
        let pent = ConvexBody::polytope(Polytope::regular_polygon(5, 1.0, 0.0));
        let ell = ConvexBody::ellipsoid(v(&[0., 0.]), v(&[2., 1.])).unwrap();
        for (body, centre) in [(pent, v(&[0.1, 0.1])), (ell, v(&[0.3, -0.2]))] {
            for spec in [BallSpec::metric(&body, centre.clone(), 1.0), BallSpec::asymptotic(&body, centre.clone(), 0.7)]
            {
                let q = region_volume(&spec, VolumeKind::HolmesThompson, small()).unwrap();
                let mc = monte_carlo_volume(&spec, VolumeKind::HolmesThompson, 40_000, 3).unwrap();
                let combined = (q.stderr.powi(2) + mc.stderr.powi(2)).sqrt();
                assert!((q.value - mc.value).abs() <= 3.0 * combined, "{} vs {} ± {}", q.value, mc.value, combined);
            }
        }
    }

    #[test]
    fn nested_regions_have_nested_volumes() {
        let pent = ConvexBody::polytope(Polytope::regular_polygon(5, 1.0, 0.0));
        let c = v(&[0., 0.]);
        for kind in [VolumeKind::Busemann, VolumeKind::HolmesThompson] {
            let asy = region_volume(&BallSpec::asymptotic(&pent, c.clone(), 3.0), kind, small()).unwrap().value;
            let met = region_volume(&BallSpec::metric(&pent, c.clone(), 3.0), kind, small()).unwrap().value;
            let shift = crate::metric::sandwich_shift(&pent);
            let inner =
                region_volume(&BallSpec::asymptotic(&pent, c.clone(), 3.0 - shift), kind, small()).unwrap().value;
            assert!(inner <= met && met <= asy);
        }
    }

    #[test]
    fn growth_csv_has_header() {
        let disk = ConvexBody::unit_ball(2);
        let curve = ball_growth_curve(&disk, &v(&[0., 0.]), VolumeKind::Busemann, &[1.0], small()).unwrap();
        let csv = growth_csv(&curve, "disk");
        assert!(csv.starts_with("R,volume,stderr,kind,body\n1,"));
    }
}
