//! Tangent unit balls of the Finsler norm and the Busemann / Holmes–Thompson densities.
//!
//! At `p` the norm `F(p, ·)` is the support function of `K = ½(A − A)` where
//! `A = (Ω − p)°`. Hence the tangent ball is `β = K°` and its polar is `β* = K`. For a
//! polytope `A = conv{n_i / s_i}` with `s_i` the facet slacks at `p`, which gives the
//! densities exactly; smooth bodies use a direction net after an affine rounding of `β`.

use serde::{Deserialize, Serialize};

use crate::body::ConvexBody;
use crate::error::{Error, Result};
use crate::hull::{convex_hull, monotone_chain, Hull};
use crate::linalg::{complement_basis, sym_condition, sym_inv_sqrt, unit_ball_volume, Matrix, Vector};
use crate::polytope::Polytope;
use crate::sphere::DirectionNet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VolumeKind {
    Busemann,
    HolmesThompson,
}

impl VolumeKind {
    pub fn name(self) -> &'static str {
        match self {
            VolumeKind::Busemann => "busemann",
            VolumeKind::HolmesThompson => "holmes-thompson",
        }
    }
}

impl std::str::FromStr for VolumeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "busemann" | "b" => Ok(VolumeKind::Busemann),
            "holmes-thompson" | "holmes_thompson" | "ht" | "h" => Ok(VolumeKind::HolmesThompson),
            other => Err(Error::InvalidArgument(format!("unknown volume kind '{other}'"))),
        }
    }
}

/// Lebesgue volumes of the tangent ball and of its polar.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TangentVolumes {
    pub ball: f64,
    pub polar: f64,
}

impl TangentVolumes {
    pub fn density(&self, dim: usize, kind: VolumeKind) -> f64 {
        let omega = unit_ball_volume(dim);
        match kind {
            VolumeKind::Busemann => omega / self.ball,
            VolumeKind::HolmesThompson => self.polar / omega,
        }
    }
}

/// Sampled tangent unit ball at a point.
#[derive(Debug, Clone)]
pub struct TangentBall {
    pub point: Vector,
    pub net: DirectionNet,
    /// `r(u_j) = 2 t⁺ t⁻ / (t⁺ + t⁻)`.
    pub radii: Vec<f64>,
    pub volumes: TangentVolumes,
}

impl TangentBall {
    pub fn busemann(&self) -> f64 {
        self.volumes.density(self.point.len(), VolumeKind::Busemann)
    }

    pub fn holmes_thompson(&self) -> f64 {
        self.volumes.density(self.point.len(), VolumeKind::HolmesThompson)
    }

    pub fn density(&self, kind: VolumeKind) -> f64 {
        self.volumes.density(self.point.len(), kind)
    }
}

/// Radial samples of `β` on a plain direction net, with quadrature volumes of `β` and `β*`.
pub fn tangent_ball(body: &ConvexBody, p: &Vector, n_dirs: usize) -> Result<TangentBall> {
    let d = body.dim();
    if d > 1 && n_dirs < 16 {
        return Err(Error::InvalidArgument(format!("need at least 16 directions, got {n_dirs}")));
    }
    if d > 3 {
        return Err(Error::UnsupportedDimension(d));
    }
    let net = DirectionNet::new(d, n_dirs);
    let mut radii = Vec::with_capacity(net.len());
    for u in &net.dirs {
        let (tm, tp) = body.chord_endpoints(p, u)?;
        radii.push(2.0 * tp * tm / (tp + tm));
    }
    let volumes = net_volumes(&net, &radii);
    Ok(TangentBall { point: p.clone(), net, radii, volumes })
}

/// Volumes of a star body given by radial samples and of its polar (exact polygon polar in 2D,
/// support function maximized over the net otherwise).
fn net_volumes(net: &DirectionNet, radii: &[f64]) -> TangentVolumes {
    let d = net.dim as i32;
    let ball = net.weights.iter().zip(radii).map(|(w, r)| w * r.powi(d)).sum::<f64>() / d as f64;
    let polar = if net.dim == 2 {
        let pts: Vec<Vector> = net.dirs.iter().zip(radii).map(|(u, r)| u * *r).collect();
        polygon_polar_area(&pts)
    } else {
        net.dirs
            .iter()
            .zip(&net.weights)
            .map(|(u, w)| {
                let h = net.dirs.iter().zip(radii).map(|(v, r)| r * v.dot(u)).fold(f64::NEG_INFINITY, f64::max);
                w * h.powi(-d)
            })
            .sum::<f64>()
            / d as f64
    };
    TangentVolumes { ball, polar }
}

fn cross(a: &Vector, b: &Vector) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

/// Area of a polygon containing the origin, vertices in counterclockwise order.
fn fan_area(ring: &[Vector]) -> f64 {
    let n = ring.len();
    (0..n).map(|k| 0.5 * cross(&ring[k], &ring[(k + 1) % n])).sum()
}

/// Polar of a counterclockwise convex polygon containing the origin.
fn polar_ring(ring: &[Vector]) -> Vec<Vector> {
    let n = ring.len();
    (0..n)
        .map(|k| {
            let a = &ring[k];
            let b = &ring[(k + 1) % n];
            let e = b - a;
            let normal = Vector::from_vec(vec![e[1], -e[0]]);
            let h = normal.dot(a);
            normal / h
        })
        .collect()
}

fn polygon_polar_area(ring: &[Vector]) -> f64 {
    fan_area(&polar_ring(ring))
}

/// Volume of a 3D hull containing the origin, by cones over its facets.
fn hull_volume_3d(hull: &Hull) -> f64 {
    hull.facets
        .iter()
        .map(|f| {
            let basis = complement_basis(&f.normal);
            let flat: Vec<Vector> = f
                .points
                .iter()
                .map(|&i| Vector::from_vec(vec![basis[0].dot(&hull.points[i]), basis[1].dot(&hull.points[i])]))
                .collect();
            let ring: Vec<Vector> = monotone_chain(&flat).into_iter().map(|i| flat[i].clone()).collect();
            let c = ring.iter().fold(Vector::zeros(2), |acc, x| acc + x) / ring.len() as f64;
            let shifted: Vec<Vector> = ring.iter().map(|x| x - &c).collect();
            f.offset * fan_area(&shifted) / 3.0
        })
        .sum()
}

/// Volumes of a centrally symmetric body `K` (given by spanning points) and of its polar.
fn symmetric_volumes(points: &[Vector], dim: usize) -> Result<TangentVolumes> {
    match dim {
        2 => {
            let ring: Vec<Vector> = monotone_chain(points).into_iter().map(|i| points[i].clone()).collect();
            if ring.len() < 3 {
                return Err(Error::DegenerateBody(0.0));
            }
            Ok(TangentVolumes { ball: polygon_polar_area(&ring), polar: fan_area(&ring) })
        }
        3 => {
            let hull = convex_hull(points, 3)?;
            let dual: Vec<Vector> = hull.facets.iter().map(|f| &f.normal / f.offset).collect();
            let polar_hull = convex_hull(&dual, 3)?;
            Ok(TangentVolumes { ball: hull_volume_3d(&polar_hull), polar: hull_volume_3d(&hull) })
        }
        d => Err(Error::UnsupportedDimension(d)),
    }
}

/// Exact tangent-ball volumes at a point of a polytope, given the facet slacks there.
///
/// The difference body is computed after the change of basis `T = diag(c) Qᵀ`, where the
/// columns of `Q` orthonormalize the normals of the tightest independent facets and `c` are
/// their slacks; this keeps the hull well conditioned arbitrarily close to the boundary.
pub fn polytope_tangent_volumes(poly: &Polytope, slacks: &[f64]) -> Result<TangentVolumes> {
    let d = poly.dim();
    if slacks.iter().any(|&s| !(s > 0.0)) {
        let margin = slacks.iter().copied().fold(f64::INFINITY, f64::min);
        return Err(Error::PointNotInterior { margin });
    }
    if d == 1 {
        let r = 2.0 * slacks[0] * slacks[1] / (slacks[0] + slacks[1]);
        return Ok(TangentVolumes { ball: 2.0 * r, polar: 2.0 / r });
    }
    let facets = poly.facets();
    let mut order: Vec<usize> = (0..facets.len()).collect();
    order.sort_by(|&a, &b| slacks[a].partial_cmp(&slacks[b]).unwrap());
    let mut basis: Vec<Vector> = Vec::with_capacity(d);
    let mut scales: Vec<f64> = Vec::with_capacity(d);
    for &i in &order {
        let mut w = facets[i].normal.clone();
        for b in &basis {
            let c = w.dot(b);
            w -= b * c;
        }
        let n = w.norm();
        if n > 1e-6 {
            basis.push(w / n);
            scales.push(slacks[i]);
            if basis.len() == d {
                break;
            }
        }
    }
    let det: f64 = scales.iter().product();
    let mapped: Vec<Vector> = facets
        .iter()
        .zip(slacks)
        .map(|(h, &s)| Vector::from_fn(d, |k, _| basis[k].dot(&h.normal) * (scales[k] / s)))
        .collect();
    let mut diffs = Vec::with_capacity(mapped.len() * mapped.len());
    for (i, a) in mapped.iter().enumerate() {
        for (j, b) in mapped.iter().enumerate() {
            if i != j {
                diffs.push((a - b) * 0.5);
            }
        }
    }
    let v = symmetric_volumes(&diffs, d)?;
    Ok(TangentVolumes { ball: v.ball * det, polar: v.polar / det })
}

pub fn polytope_density(poly: &Polytope, slacks: &[f64], kind: VolumeKind) -> Result<f64> {
    Ok(polytope_tangent_volumes(poly, slacks)?.density(poly.dim(), kind))
}

/// Net-based densities for general bodies, with an affine rounding of the tangent ball so the
/// net resolves it uniformly even when it is extremely eccentric near the boundary.
#[derive(Debug, Clone)]
pub struct RoundedTangent {
    net: DirectionNet,
    /// Stop rounding once the moment matrix has condition number below this.
    pub condition: f64,
    pub max_rounds: usize,
}

impl RoundedTangent {
    pub fn new(dim: usize, n_dirs: usize) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::UnsupportedDimension(dim));
        }
        Ok(RoundedTangent { net: DirectionNet::new(dim, n_dirs), condition: 1.05, max_rounds: 16 })
    }

    pub fn dim(&self) -> usize {
        self.net.dim
    }

    /// Tangent volumes at `p`; `transform` is a unimodular warm start, updated in place.
    pub fn volumes(&self, body: &ConvexBody, p: &Vector, transform: &mut Matrix) -> Result<TangentVolumes> {
        let d = self.net.dim;
        let margin = body.margin(p);
        if !(margin > 0.0) {
            return Err(Error::PointNotInterior { margin });
        }
        let mut radii = vec![0.0; self.net.len()];
        for round in 0..self.max_rounds {
            let inv = transform
                .clone()
                .try_inverse()
                .ok_or_else(|| Error::InvalidArgument("singular rounding transform".into()))?;
            let mut moment = Matrix::zeros(d, d);
            for ((u, w), r) in self.net.dirs.iter().zip(&self.net.weights).zip(radii.iter_mut()) {
                let v = &inv * u;
                let tp = body.ray_exit(p, &v);
                let tm = body.ray_exit(p, &(-&v));
                if !(tp > 0.0 && tm > 0.0) || !tp.is_finite() || !tm.is_finite() {
                    return Err(Error::PointNotInterior { margin: tp.min(tm) });
                }
                *r = 2.0 * tp * tm / (tp + tm);
                moment += u * u.transpose() * (w * r.powi(d as i32 + 2));
            }
            if d == 1 || round + 1 == self.max_rounds || sym_condition(&moment) < self.condition {
                break;
            }
            let mut step = match sym_inv_sqrt(&moment) {
                Some(s) => s,
                None => break,
            };
            let det = step.determinant().abs();
            step /= det.powf(1.0 / d as f64);
            *transform = step * &*transform;
        }
        let v = net_volumes(&self.net, &radii);
        let det = transform.determinant().abs();
        Ok(TangentVolumes { ball: v.ball / det, polar: v.polar * det })
    }
}

/// Density at a single point: exact for polytopes, rounded net otherwise.
pub fn point_density(body: &ConvexBody, p: &Vector, kind: VolumeKind, n_dirs: usize) -> Result<f64> {
    if let Some(poly) = body.as_polytope() {
        return polytope_density(poly, &poly.slacks(p), kind);
    }
    let d = body.dim();
    let rt = RoundedTangent::new(d, n_dirs)?;
    let mut t = Matrix::identity(d, d);
    Ok(rt.volumes(body, p, &mut t)?.density(d, kind))
}

/// Density field on a regular grid over the bounding box, for plotting (2D bodies).
pub fn density_grid_csv(body: &ConvexBody, kind: VolumeKind, n: usize, n_dirs: usize) -> Result<String> {
    if body.dim() != 2 {
        return Err(Error::UnsupportedDimension(body.dim()));
    }
    let ex = Vector::from_vec(vec![1.0, 0.0]);
    let ey = Vector::from_vec(vec![0.0, 1.0]);
    let (x0, x1) = (-body.support(&-&ex), body.support(&ex));
    let (y0, y1) = (-body.support(&-&ey), body.support(&ey));
    let mut out = String::from("x,y,density\n");
    for i in 0..n {
        for j in 0..n {
            let x = x0 + (x1 - x0) * (i as f64 + 0.5) / n as f64;
            let y = y0 + (y1 - y0) * (j as f64 + 0.5) / n as f64;
            let p = Vector::from_vec(vec![x, y]);
            if body.is_interior(&p) {
                let h = point_density(body, &p, kind, n_dirs)?;
                out.push_str(&format!("{x},{y},{h}\n"));
            }
        }
    }
    Ok(out)
}

/// Busemann density of the Klein model: `(1 − |x|²)^{−(d+1)/2}`.
pub fn klein_density(x: &Vector) -> f64 {
    (1.0 - x.norm_squared()).powf(-0.5 * (x.len() as f64 + 1.0))
}
