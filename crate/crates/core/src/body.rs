//! Bounded convex bodies given by oracles (membership, ray hits, support values), each
//! carrying a Euclidean sandwich certificate `y + l E ⊆ Ω ⊆ y + L E`.

use std::f64::consts::PI;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{complement_basis, extreme_singular_values, Matrix, Vector};
use crate::polytope::Polytope;
use crate::sphere::DirectionNet;

/// Relative tolerance for boundary hits of smooth bodies.
pub const TAU_HIT: f64 = 1e-12;
/// Chords shorter than this are treated as touching the boundary.
pub const MIN_CHORD: f64 = 1e-12;
pub const DEFAULT_HAUSDORFF_DIRS: usize = 4096;
pub const DEFAULT_CENTROID_SAMPLES: usize = 1_000_000;

/// `x -> linear * x + shift`, with the inverse cached.
#[derive(Debug, Clone)]
pub struct AffineMap {
    pub linear: Matrix,
    pub shift: Vector,
    inverse: Matrix,
}

impl AffineMap {
    pub fn new(linear: Matrix, shift: Vector) -> Result<Self> {
        if !linear.is_square() || linear.nrows() != shift.len() {
            return Err(Error::DimensionMismatch { expected: shift.len(), got: linear.nrows() });
        }
        let inverse = linear
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::InvalidArgument("affine map is not invertible".into()))?;
        Ok(AffineMap { linear, shift, inverse })
    }

    pub fn apply(&self, x: &Vector) -> Vector {
        &self.linear * x + &self.shift
    }

    pub fn apply_linear(&self, v: &Vector) -> Vector {
        &self.linear * v
    }

    pub fn invert(&self, x: &Vector) -> Vector {
        &self.inverse * (x - &self.shift)
    }

    pub fn invert_linear(&self, v: &Vector) -> Vector {
        &self.inverse * v
    }
}

#[derive(Debug, Clone)]
pub enum Shape {
    /// Axis-aligned ellipsoid with semi-axes `axes`.
    Ellipsoid {
        center: Vector,
        axes: Vector,
    },
    /// `{ x : || (x - center) / scale ||_p <= 1 }`, `p >= 1` (possibly infinite).
    PNormBall {
        center: Vector,
        scale: f64,
        exponent: f64,
    },
    Polytope(Arc<Polytope>),
    AffineImage {
        inner: Arc<ConvexBody>,
        map: AffineMap,
    },
    /// Intersection of bodies with a common interior point (used for Macbeath regions).
    Intersection(Vec<ConvexBody>),
}

/// `center + inner E ⊆ Ω ⊆ center + outer E`.
#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    pub center: Vector,
    pub inner: f64,
    pub outer: f64,
}

#[derive(Debug, Clone)]
pub struct ConvexBody {
    dim: usize,
    shape: Shape,
    cert: Certificate,
}

fn pnorm(z: &Vector, p: f64) -> f64 {
    let m = z.amax();
    if m == 0.0 {
        return 0.0;
    }
    if p.is_infinite() {
        return m;
    }
    m * z.iter().map(|x| (x.abs() / m).powf(p)).sum::<f64>().powf(1.0 / p)
}

fn dual_exponent(p: f64) -> f64 {
    if p == 1.0 {
        f64::INFINITY
    } else if p.is_infinite() {
        1.0
    } else {
        p / (p - 1.0)
    }
}

impl ConvexBody {
    pub fn ellipsoid(center: Vector, axes: Vector) -> Result<Self> {
        if center.len() != axes.len() {
            return Err(Error::DimensionMismatch { expected: center.len(), got: axes.len() });
        }
        if axes.iter().any(|&a| !(a > 0.0)) {
            return Err(Error::InvalidArgument("ellipsoid axes must be positive".into()));
        }
        let cert = Certificate { center: center.clone(), inner: axes.min(), outer: axes.max() };
        Ok(ConvexBody { dim: center.len(), shape: Shape::Ellipsoid { center, axes }, cert })
    }

    /// Euclidean ball.
    pub fn ball(center: Vector, radius: f64) -> Result<Self> {
        let d = center.len();
        Self::ellipsoid(center, Vector::from_element(d, radius))
    }

    pub fn unit_ball(d: usize) -> Self {
        Self::ball(Vector::zeros(d), 1.0).expect("unit ball")
    }

    pub fn pnorm_ball(center: Vector, scale: f64, exponent: f64) -> Result<Self> {
        if !(exponent >= 1.0) {
            return Err(Error::InvalidArgument(format!("p-norm exponent must be >= 1, got {exponent}")));
        }
        if !(scale > 0.0) {
            return Err(Error::InvalidArgument("p-norm scale must be positive".into()));
        }
        let d = center.len() as f64;
        let power = if exponent.is_infinite() { 0.5 } else { 0.5 - 1.0 / exponent };
        let k = d.powf(power);
        let cert = Certificate { center: center.clone(), inner: scale * k.min(1.0), outer: scale * k.max(1.0) };
        Ok(ConvexBody { dim: center.len(), shape: Shape::PNormBall { center, scale, exponent }, cert })
    }

    /// Polytope body with certificate centred at the polytope's base point.
    pub fn polytope(p: Polytope) -> Self {
        let y = p.base_point().clone();
        Self::polytope_about(p, y).expect("base point is interior")
    }

    /// Polytope body with an auto-derived certificate about `y`: `L` = max vertex distance,
    /// `l` = min facet distance.
    pub fn polytope_about(p: Polytope, y: Vector) -> Result<Self> {
        let inner = p.margin(&y);
        if !(inner > 0.0) {
            return Err(Error::PointNotInterior { margin: inner });
        }
        let outer = p.vertices().iter().map(|v| (v - &y).norm()).fold(0.0, f64::max);
        Ok(ConvexBody {
            dim: p.dim(),
            shape: Shape::Polytope(Arc::new(p)),
            cert: Certificate { center: y, inner, outer },
        })
    }

    pub fn from_points(points: &[Vector], dim: usize) -> Result<Self> {
        Ok(Self::polytope(Polytope::from_points(points, dim)?))
    }

    /// Image of `inner` under an invertible affine map. Polytopes stay polytopes.
    pub fn affine_image(inner: &ConvexBody, map: AffineMap) -> Result<Self> {
        if map.shift.len() != inner.dim {
            return Err(Error::DimensionMismatch { expected: inner.dim, got: map.shift.len() });
        }
        let (smin, smax) = extreme_singular_values(&map.linear);
        let cert = Certificate {
            center: map.apply(&inner.cert.center),
            inner: inner.cert.inner * smin,
            outer: inner.cert.outer * smax,
        };
        if let Shape::Polytope(p) = &inner.shape {
            let image = p.affine_image(&map.linear, &map.shift)?;
            let body = Self::polytope_about(image, cert.center.clone())?;
            return Ok(body);
        }
        Ok(ConvexBody { dim: inner.dim, shape: Shape::AffineImage { inner: Arc::new(inner.clone()), map }, cert })
    }

    /// Intersection of bodies sharing the certificate centre `center` with inner radius `inner`.
    fn intersection(parts: Vec<ConvexBody>, cert: Certificate) -> Self {
        ConvexBody { dim: parts[0].dim, shape: Shape::Intersection(parts), cert }
    }

    /// Replaces the certificate after checking it: the inner ball via support values, the
    /// outer ball on vertices (polytopes) or support values on a direction net.
    pub fn with_certificate(mut self, cert: Certificate) -> Result<Self> {
        self.verify_certificate(&cert)?;
        self.cert = cert;
        Ok(self)
    }

    fn verify_certificate(&self, cert: &Certificate) -> Result<()> {
        if cert.center.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: cert.center.len() });
        }
        if !(cert.inner > 0.0) || cert.outer < cert.inner {
            return Err(Error::InvalidCertificate(format!(
                "need 0 < l <= L, got l = {}, L = {}",
                cert.inner, cert.outer
            )));
        }
        let slack = 1e-9 * cert.outer.max(1.0);
        match &self.shape {
            Shape::Polytope(p) => {
                let m = p.margin(&cert.center);
                if m < cert.inner - slack {
                    return Err(Error::InvalidCertificate(format!(
                        "inner radius {} exceeds facet distance {m}",
                        cert.inner
                    )));
                }
                let far = p.vertices().iter().map(|v| (v - &cert.center).norm()).fold(0.0, f64::max);
                if far > cert.outer + slack {
                    return Err(Error::InvalidCertificate(format!(
                        "vertex at distance {far} outside L = {}",
                        cert.outer
                    )));
                }
            }
            _ => {
                if self.dim > 3 {
                    return Ok(());
                }
                let net = DirectionNet::new(self.dim, 2048);
                for u in &net.dirs {
                    let h = self.support(u) - u.dot(&cert.center);
                    if h < cert.inner - slack {
                        return Err(Error::InvalidCertificate(format!(
                            "support {h} below inner radius {}",
                            cert.inner
                        )));
                    }
                    if h > cert.outer + slack {
                        return Err(Error::InvalidCertificate(format!(
                            "support {h} above outer radius {}",
                            cert.outer
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn certificate(&self) -> &Certificate {
        &self.cert
    }

    pub fn as_polytope(&self) -> Option<&Polytope> {
        match &self.shape {
            Shape::Polytope(p) => Some(p),
            _ => None,
        }
    }

    pub fn is_polytope(&self) -> bool {
        self.as_polytope().is_some()
    }

    fn check_dim(&self, x: &Vector) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: x.len() });
        }
        Ok(())
    }

    /// Signed membership margin: positive inside, zero on the boundary, negative outside.
    pub fn margin(&self, x: &Vector) -> f64 {
        match &self.shape {
            Shape::Polytope(p) => p.margin(x),
            Shape::Ellipsoid { center, axes } => {
                let g = (x - center).component_div(axes).norm();
                (1.0 - g) * axes.min()
            }
            Shape::PNormBall { center, scale, exponent } => {
                let g = pnorm(&((x - center) / *scale), *exponent);
                (1.0 - g) * self.cert.inner
            }
            Shape::AffineImage { inner, map } => {
                let (smin, _) = extreme_singular_values(&map.linear);
                inner.margin(&map.invert(x)) * smin
            }
            Shape::Intersection(parts) => parts.iter().map(|b| b.margin(x)).fold(f64::INFINITY, f64::min),
        }
    }

    pub fn contains(&self, x: &Vector, tol: f64) -> bool {
        self.margin(x) >= -tol
    }

    pub fn is_interior(&self, x: &Vector) -> bool {
        self.margin(x) > 0.0
    }

    /// Exit time along `p + t u` for an interior `p` (`u` need not be unit).
    pub(crate) fn ray_exit(&self, p: &Vector, u: &Vector) -> f64 {
        match &self.shape {
            Shape::Polytope(poly) => poly
                .facets()
                .iter()
                .filter_map(|h| {
                    let rate = h.normal.dot(u);
                    if rate > 0.0 {
                        Some(h.slack(p) / rate)
                    } else {
                        None
                    }
                })
                .fold(f64::INFINITY, f64::min),
            Shape::Ellipsoid { center, axes } => {
                let q = (p - center).component_div(axes);
                let w = u.component_div(axes);
                let a = w.norm_squared();
                let b = q.dot(&w);
                let c = q.norm_squared() - 1.0;
                let disc = (b * b - a * c).max(0.0).sqrt();
                if b >= 0.0 {
                    -c / (b + disc)
                } else {
                    (disc - b) / a
                }
            }
            Shape::PNormBall { center, scale, exponent } => {
                pnorm_exit(&((p - center) / *scale), &(u / *scale), *exponent, 2.0 * self.cert.outer / u.norm())
            }
            Shape::AffineImage { inner, map } => inner.ray_exit(&map.invert(p), &map.invert_linear(u)),
            Shape::Intersection(parts) => parts.iter().map(|b| b.ray_exit(p, u)).fold(f64::INFINITY, f64::min),
        }
    }

    /// Boundary hit times `(t_minus, t_plus)` of the chord through interior `p` along `u`:
    /// `p + t_plus u` and `p - t_minus u` lie on the boundary.
    pub fn chord_endpoints(&self, p: &Vector, u: &Vector) -> Result<(f64, f64)> {
        self.check_dim(p)?;
        self.check_dim(u)?;
        let margin = self.margin(p);
        if !(margin > 0.0) {
            return Err(Error::PointNotInterior { margin });
        }
        let un = u.norm();
        if !(un > 0.0) {
            return Err(Error::InvalidArgument("direction must be nonzero".into()));
        }
        let tp = self.ray_exit(p, u);
        let tm = self.ray_exit(p, &(-u));
        if tp * un < MIN_CHORD || tm * un < MIN_CHORD {
            return Err(Error::PointNotInterior { margin: (tp.min(tm) * un) });
        }
        Ok((tm, tp))
    }

    /// Support value `h(u) = sup <x, u>` (any vector `u`).
    pub fn support(&self, u: &Vector) -> f64 {
        match &self.shape {
            Shape::Polytope(p) => p.vertices().iter().map(|v| v.dot(u)).fold(f64::NEG_INFINITY, f64::max),
            Shape::Ellipsoid { center, axes } => center.dot(u) + u.component_mul(axes).norm(),
            Shape::PNormBall { center, scale, exponent } => center.dot(u) + scale * pnorm(u, dual_exponent(*exponent)),
            Shape::AffineImage { inner, map } => inner.support(&(map.linear.transpose() * u)) + map.shift.dot(u),
            Shape::Intersection(_) => {
                let x = self.support_point(u);
                x.dot(u)
            }
        }
    }

    /// A maximizer of `<x, u>` over the body.
    pub fn support_point(&self, u: &Vector) -> Vector {
        match &self.shape {
            Shape::Polytope(p) => {
                p.vertices().iter().max_by(|a, b| a.dot(u).partial_cmp(&b.dot(u)).unwrap()).unwrap().clone()
            }
            Shape::Ellipsoid { center, axes } => {
                let a2 = axes.component_mul(axes);
                let w = u.component_mul(&a2);
                let n = u.component_mul(axes).norm();
                center + w / n
            }
            Shape::PNormBall { center, scale, exponent } => {
                let q = dual_exponent(*exponent);
                let z = if q.is_infinite() {
                    let k = u.iamax();
                    let mut z = Vector::zeros(self.dim);
                    z[k] = u[k].signum();
                    z
                } else if q == 1.0 {
                    u.map(|x| if x == 0.0 { 0.0 } else { x.signum() })
                } else {
                    let nq = pnorm(u, q);
                    u.map(|x| x.signum() * (x.abs() / nq).powf(q - 1.0))
                };
                center + z * *scale
            }
            Shape::AffineImage { inner, map } => map.apply(&inner.support_point(&(map.linear.transpose() * u))),
            Shape::Intersection(_) => self.numeric_support_point(u),
        }
    }

    /// Support point found by searching boundary points along rays from the certificate centre.
    fn numeric_support_point(&self, u: &Vector) -> Vector {
        let y = &self.cert.center;
        let boundary = |dir: &Vector| -> Vector { y + dir * self.ray_exit(y, dir) };
        let net = if self.dim <= 3 { DirectionNet::new(self.dim, 2048) } else { random_net(self.dim, 4096, 11) };
        let mut best = net.dirs.iter().map(&boundary).max_by(|a, b| a.dot(u).partial_cmp(&b.dot(u)).unwrap()).unwrap();
        // local pattern search on the direction
        let mut step = 0.05;
        let mut dir = (&best - y).normalize();
        while step > 1e-10 {
            let mut improved = false;
            for k in 0..self.dim {
                for s in [-1.0, 1.0] {
                    let mut cand = dir.clone();
                    cand[k] += s * step;
                    let cand = cand.normalize();
                    let x = boundary(&cand);
                    if x.dot(u) > best.dot(u) {
                        best = x;
                        dir = cand;
                        improved = true;
                    }
                }
            }
            if !improved {
                step *= 0.5;
            }
        }
        best
    }

    /// Dilation `y + factor (Ω - y)`.
    pub fn scale_about(&self, y: &Vector, factor: f64) -> Result<Self> {
        self.check_dim(y)?;
        if !(factor > 0.0) {
            return Err(Error::NonpositiveFactor(factor));
        }
        let linear = Matrix::identity(self.dim, self.dim) * factor;
        let shift = y * (1.0 - factor);
        let map = AffineMap::new(linear, shift)?;
        let cert = Certificate {
            center: map.apply(&self.cert.center),
            inner: self.cert.inner * factor,
            outer: self.cert.outer * factor,
        };
        let mut body = Self::affine_image(self, map)?;
        body.cert = cert;
        Ok(body)
    }

    /// Lower bound on the radius of a Euclidean ball about `x` contained in the body.
    pub fn inradius_at(&self, x: &Vector) -> f64 {
        if let Shape::Polytope(p) = &self.shape {
            return p.margin(x).max(0.0);
        }
        let y = &self.cert.center;
        let w = x - y;
        let dist = w.norm();
        if dist == 0.0 {
            return self.cert.inner;
        }
        let t = self.ray_exit(x, &(&w / dist));
        (self.cert.inner * t / (dist + t)).max(0.0)
    }

    /// Intersection body with a fresh certificate about `center`.
    pub fn intersect_about(parts: Vec<ConvexBody>, center: Vector) -> Result<Self> {
        let inner = parts.iter().map(|b| b.inradius_at(&center)).fold(f64::INFINITY, f64::min);
        if !(inner > 0.0) {
            return Err(Error::PointNotInterior { margin: inner });
        }
        let outer =
            parts.iter().map(|b| (&b.cert.center - &center).norm() + b.cert.outer).fold(f64::INFINITY, f64::min);
        Ok(Self::intersection(parts, Certificate { center, inner, outer }))
    }

    /// Centre of mass: exact for polytopes, closed form for ellipsoids and p-balls,
    /// affine covariance for affine images, Monte Carlo for intersections.
    pub fn centroid(&self) -> Result<Vector> {
        Ok(self.centroid_with_error(DEFAULT_CENTROID_SAMPLES, 7)?.0)
    }

    /// Centroid and an estimate of its Euclidean standard error (zero when exact).
    pub fn centroid_with_error(&self, samples: usize, seed: u64) -> Result<(Vector, f64)> {
        match &self.shape {
            Shape::Polytope(p) => {
                let vol = p.volume();
                if vol <= 1e-14 * self.cert.outer.powi(self.dim as i32) {
                    return Err(Error::DegenerateBody(vol));
                }
                Ok((p.centroid(), 0.0))
            }
            Shape::Ellipsoid { center, .. } | Shape::PNormBall { center, .. } => Ok((center.clone(), 0.0)),
            Shape::AffineImage { inner, map } => {
                let (c, e) = inner.centroid_with_error(samples, seed)?;
                let (_, smax) = extreme_singular_values(&map.linear);
                Ok((map.apply(&c), e * smax))
            }
            Shape::Intersection(_) => self.monte_carlo_centroid(samples, seed),
        }
    }

    fn monte_carlo_centroid(&self, samples: usize, seed: u64) -> Result<(Vector, f64)> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let y = &self.cert.center;
        let r = self.cert.outer;
        let mut sum = Vector::zeros(self.dim);
        let mut sq = Vector::zeros(self.dim);
        let mut hits = 0usize;
        for _ in 0..samples {
            let x = Vector::from_fn(self.dim, |k, _| y[k] + rng.gen_range(-r..r));
            if self.contains(&x, 0.0) {
                sum += &x;
                sq += x.component_mul(&x);
                hits += 1;
            }
        }
        if hits < 10 {
            return Err(Error::DegenerateBody(hits as f64 / samples as f64));
        }
        let n = hits as f64;
        let mean = &sum / n;
        let var = (&sq / n - mean.component_mul(&mean)).map(|v| v.max(0.0));
        Ok((mean, (var.sum() / n).sqrt()))
    }

    /// Centroid of the section of the body by the hyperplane `<x, u> = c` (relative interior assumed nonempty).
    pub fn section_centroid(&self, u: &Vector, c: f64) -> Result<Vector> {
        match &self.shape {
            Shape::Polytope(p) => polytope_section_centroid(p, u, c),
            Shape::Ellipsoid { center, axes } => {
                let a2 = axes.component_mul(axes);
                let m_inv_u = u.component_mul(&a2);
                let mu = (c - center.dot(u)) / u.dot(&m_inv_u);
                Ok(center + m_inv_u * mu)
            }
            Shape::AffineImage { inner, map } => {
                let ui = map.linear.transpose() * u;
                let ci = c - map.shift.dot(u);
                Ok(map.apply(&inner.section_centroid(&ui, ci)?))
            }
            _ => self.radial_section_centroid(u, c),
        }
    }

    /// Section centroid of a general body: chord midpoint in 2D, polar quadrature in 3D.
    fn radial_section_centroid(&self, u: &Vector, c: f64) -> Result<Vector> {
        let un = u.norm();
        let n = u / un;
        let level = c / un;
        // interior point of the section on the segment between the two support points
        let hi = self.support_point(&n);
        let lo = self.support_point(&(-&n));
        let (a, b) = (lo.dot(&n), hi.dot(&n));
        if !(level > a && level < b) {
            return Err(Error::InvalidArgument("hyperplane misses the interior".into()));
        }
        let s = (level - a) / (b - a);
        let q0 = &lo + (&hi - &lo) * s;
        let basis = complement_basis(&n);
        match self.dim {
            1 => Ok(q0),
            2 => {
                let e = &basis[0];
                let tp = self.ray_exit(&q0, e);
                let tm = self.ray_exit(&q0, &(-e));
                Ok(&q0 + e * (0.5 * (tp - tm)))
            }
            3 => {
                let m = 4096;
                let mut area = 0.0;
                let mut moment = Vector::zeros(3);
                for k in 0..m {
                    let t = 2.0 * PI * k as f64 / m as f64;
                    let dir = &basis[0] * t.cos() + &basis[1] * t.sin();
                    let rho = self.ray_exit(&q0, &dir);
                    area += rho * rho / 2.0;
                    moment += &dir * (rho * rho * rho / 3.0);
                }
                Ok(&q0 + moment / area)
            }
            d => Err(Error::UnsupportedDimension(d)),
        }
    }

    /// Cap `{x in Ω : <x, u> >= h(u) - width}` with its apex and base centroid.
    pub fn make_cap(&self, u: &Vector, width: f64) -> Result<Cap> {
        self.check_dim(u)?;
        let n = u.normalize();
        let top = self.support(&n);
        let bottom = -self.support(&(-&n));
        let max = top - bottom;
        if !(width > 0.0 && width < max) {
            return Err(Error::WidthOutOfRange { width, max });
        }
        let offset = top - width;
        let apex = self.support_point(&n);
        let base_centroid = self.section_centroid(&n, offset)?;
        Ok(Cap { normal: n, offset, base_centroid, apex, width })
    }
}

/// Exit time from the unit p-ball along `q + t w`, by Newton iteration from the right of the root
/// (monotone for the convex norm) with a bisection fallback.
fn pnorm_exit(q: &Vector, w: &Vector, p: f64, upper: f64) -> f64 {
    let f = |t: f64| pnorm(&(q + w * t), p) - 1.0;
    let mut lo = 0.0;
    let mut hi = upper;
    while f(hi) < 0.0 {
        hi *= 2.0;
    }
    if p.is_finite() {
        let mut t = hi;
        for _ in 0..200 {
            let z = q + w * t;
            let nz = pnorm(&z, p);
            let fz = nz - 1.0;
            let grad: f64 =
                z.iter().zip(w.iter()).map(|(zi, wi)| zi.signum() * (zi.abs() / nz).powf(p - 1.0) * wi).sum();
            if fz.abs() <= TAU_HIT {
                // one more step takes the quadratic convergence down to rounding level
                let polished = t - fz / grad;
                return if grad > 0.0 && polished > lo && polished < hi { polished } else { t };
            }
            if !(grad > 0.0) {
                break;
            }
            let next = t - fz / grad;
            if !(next > lo && next < hi) || (t - next).abs() <= TAU_HIT * t {
                if (t - next).abs() <= TAU_HIT * t {
                    return next;
                }
                break;
            }
            if fz > 0.0 {
                hi = t;
            } else {
                lo = t;
            }
            t = next;
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= TAU_HIT * hi {
            break;
        }
    }
    0.5 * (lo + hi)
}

fn random_net(dim: usize, n: usize, seed: u64) -> DirectionNet {
    use rand_distr_normal::sample as gauss;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dirs: Vec<Vector> = (0..n).map(|_| Vector::from_fn(dim, |_, _| gauss(&mut rng)).normalize()).collect();
    let area = dim as f64 * crate::linalg::unit_ball_volume(dim);
    DirectionNet { dim, dirs, weights: vec![area / n as f64; n] }
}

/// Box–Muller normal sampling.
pub mod rand_distr_normal {
    use rand::Rng;

    pub fn sample<R: Rng>(rng: &mut R) -> f64 {
        let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
        let u2: f64 = rng.gen::<f64>();
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    }
}

pub fn random_unit<R: Rng>(rng: &mut R, dim: usize) -> Vector {
    loop {
        let v = Vector::from_fn(dim, |_, _| rand_distr_normal::sample(rng));
        let n = v.norm();
        if n > 1e-12 {
            return v / n;
        }
    }
}

fn polytope_section_centroid(p: &Polytope, u: &Vector, c: f64) -> Result<Vector> {
    let d = p.dim();
    let un = u.norm();
    let n = u / un;
    let level = c / un;
    let tol = 1e-12 * p.vertices().iter().map(|v| v.norm()).fold(1.0, f64::max);
    // section vertices: vertices on the plane and edge crossings
    let mut pts: Vec<Vector> = p.vertices().iter().filter(|v| (v.dot(&n) - level).abs() <= tol).cloned().collect();
    for e in p.lattice().rank_ids(1) {
        let vs = &p.lattice().face(e).vertices;
        let (a, b) = (&p.vertices()[vs[0]], &p.vertices()[vs[1]]);
        let (sa, sb) = (a.dot(&n) - level, b.dot(&n) - level);
        if (sa > tol && sb < -tol) || (sa < -tol && sb > tol) {
            let t = sa / (sa - sb);
            pts.push(a + (b - a) * t);
        }
    }
    if pts.is_empty() {
        return Err(Error::InvalidArgument("hyperplane misses the polytope".into()));
    }
    if d == 1 {
        return Ok(pts[0].clone());
    }
    let basis = complement_basis(&n);
    let origin = &n * level;
    let local: Vec<Vector> = pts.iter().map(|x| Vector::from_fn(d - 1, |k, _| basis[k].dot(&(x - &origin)))).collect();
    let c_local = if d == 2 {
        let lo = local.iter().map(|x| x[0]).fold(f64::INFINITY, f64::min);
        let hi = local.iter().map(|x| x[0]).fold(f64::NEG_INFINITY, f64::max);
        Vector::from_element(1, 0.5 * (lo + hi))
    } else {
        Polytope::from_points(&local, d - 1)?.centroid()
    };
    let mut out = origin;
    for k in 0..d - 1 {
        out += &basis[k] * c_local[k];
    }
    Ok(out)
}

/// Cap of a body: `normal` u, base hyperplane `<x, u> = offset`, apex maximizing `<x, u>`.
#[derive(Debug, Clone)]
pub struct Cap {
    pub normal: Vector,
    pub offset: f64,
    pub base_centroid: Vector,
    pub apex: Vector,
    pub width: f64,
}

/// Hausdorff distance between convex bodies as the maximal support-function gap.
///
/// Directions are a uniform net (2D), a Fibonacci net (3D) or random (higher), augmented by
/// facet normals of polytope arguments. Two polytopes in `d <= 3` use the exact vertex formula.
pub fn hausdorff_distance(a: &ConvexBody, b: &ConvexBody, n_dirs: usize) -> Result<f64> {
    if a.dim != b.dim {
        return Err(Error::DimensionMismatch { expected: a.dim, got: b.dim });
    }
    if let (Some(p), Some(q)) = (a.as_polytope(), b.as_polytope()) {
        if a.dim <= 3 {
            let one = p.vertices().iter().map(|v| polytope_distance(q, v)).fold(0.0, f64::max);
            let two = q.vertices().iter().map(|v| polytope_distance(p, v)).fold(0.0, f64::max);
            return Ok(one.max(two));
        }
    }
    let mut dirs = if a.dim <= 3 { DirectionNet::new(a.dim, n_dirs).dirs } else { random_net(a.dim, n_dirs, 5).dirs };
    for body in [a, b] {
        if let Some(p) = body.as_polytope() {
            dirs.extend(p.facets().iter().map(|h| h.normal.clone()));
        }
    }
    Ok(dirs.iter().map(|u| (a.support(u) - b.support(u)).abs()).fold(0.0, f64::max))
}

/// Euclidean distance from `x` to a polytope of dimension at most 3.
pub fn polytope_distance(p: &Polytope, x: &Vector) -> f64 {
    if p.margin(x) >= 0.0 {
        return 0.0;
    }
    let seg = |a: &Vector, b: &Vector| {
        let ab = b - a;
        let t = ((x - a).dot(&ab) / ab.norm_squared()).clamp(0.0, 1.0);
        (a + ab * t - x).norm()
    };
    let verts = p.vertices();
    let mut best: f64 = verts.iter().map(|v| (v - x).norm()).fold(f64::INFINITY, f64::min);
    if p.dim() >= 2 {
        for e in p.lattice().rank_ids(1) {
            let vs = &p.lattice().face(e).vertices;
            best = best.min(seg(&verts[vs[0]], &verts[vs[1]]));
        }
    }
    if p.dim() == 3 {
        for (f, h) in p.facets().iter().enumerate() {
            let proj = x - &h.normal * (h.normal.dot(x) - h.offset);
            // projection inside the facet polygon iff it satisfies the other facets' inequalities
            let inside = p.facets().iter().enumerate().all(|(g, k)| g == f || k.slack(&proj) >= -1e-12);
            if inside {
                best = best.min((proj - x).norm());
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn v(c: &[f64]) -> Vector {
        Vector::from_vec(c.to_vec())
    }

    #[test]
    fn disk_chords() {
        let disk = ConvexBody::unit_ball(2);
        let (tm, tp) = disk.chord_endpoints(&v(&[0., 0.]), &v(&[0.6, 0.8])).unwrap();
        assert_abs_diff_eq!(tm, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(tp, 1.0, epsilon = 1e-15);
        let (tm, tp) = disk.chord_endpoints(&v(&[0.5, 0.]), &v(&[1., 0.])).unwrap();
        assert_abs_diff_eq!(tm, 1.5, epsilon = 1e-15);
        assert_abs_diff_eq!(tp, 0.5, epsilon = 1e-15);
    }

    #[test]
    fn exterior_point_rejected() {
        let disk = ConvexBody::unit_ball(2);
        assert!(matches!(disk.chord_endpoints(&v(&[1.5, 0.]), &v(&[1., 0.])), Err(Error::PointNotInterior { .. })));
        assert!(matches!(disk.chord_endpoints(&v(&[1.0, 0.]), &v(&[0., 1.])), Err(Error::PointNotInterior { .. })));
    }

    #[test]
    fn pnorm_hits_lie_on_boundary() {
        let b = ConvexBody::pnorm_ball(v(&[0.1, -0.2, 0.3]), 1.5, 3.5).unwrap();
        let p = v(&[0.3, 0.1, 0.2]);
        let u = v(&[0.3, -0.5, 0.8]).normalize();
        let (tm, tp) = b.chord_endpoints(&p, &u).unwrap();
        for x in [&p + &u * tp, &p - &u * tm] {
            assert!(b.margin(&x).abs() < 1e-11);
        }
    }

    #[test]
    fn supports() {
        let sq = ConvexBody::polytope(Polytope::cube(2, 1.0));
        assert_abs_diff_eq!(sq.support(&v(&[1., 0.])), 1.0);
        let disk = ConvexBody::unit_ball(2);
        assert_abs_diff_eq!(disk.support(&v(&[0.6, -0.8])), 1.0, epsilon = 1e-15);
        let ell = ConvexBody::ellipsoid(v(&[0., 0.]), v(&[2., 1.])).unwrap();
        assert_abs_diff_eq!(ell.support(&v(&[1., 0.])), 2.0);
        let l1 = ConvexBody::pnorm_ball(v(&[0., 0.]), 1.0, 1.0).unwrap();
        assert_abs_diff_eq!(l1.support(&v(&[0.6, 0.8])), 0.8);
    }

    #[test]
    fn scale_about_disk() {
        let disk = ConvexBody::unit_ball(2);
        let half = disk.scale_about(&v(&[0., 0.]), 0.5).unwrap();
        assert_abs_diff_eq!(half.support(&v(&[0., 1.])), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(half.certificate().outer, 0.5);
        assert!(matches!(disk.scale_about(&v(&[0., 0.]), 0.0), Err(Error::NonpositiveFactor(_))));
        let same = disk.scale_about(&v(&[0.2, 0.1]), 1.0).unwrap();
        for k in 0..16 {
            let t = k as f64 * 0.4;
            let u = v(&[t.cos(), t.sin()]);
            assert_abs_diff_eq!(same.support(&u), 1.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn hausdorff_disk_vs_scaled_disk() {
        let a = ConvexBody::unit_ball(2);
        let b = ConvexBody::ball(v(&[0., 0.]), 1.25).unwrap();
        assert_abs_diff_eq!(hausdorff_distance(&a, &b, 512).unwrap(), 0.25, epsilon = 1e-14);
        assert_eq!(hausdorff_distance(&a, &a, 512).unwrap(), 0.0);
    }

    #[test]
    fn hausdorff_disk_vs_ngon() {
        for n in [3usize, 5, 6, 17] {
            let p = ConvexBody::polytope(Polytope::regular_polygon(n, 1.0, 0.3));
            let h = hausdorff_distance(&ConvexBody::unit_ball(2), &p, 10_000).unwrap();
            assert_abs_diff_eq!(h, 1.0 - (PI / n as f64).cos(), epsilon = 1e-6);
        }
    }

    #[test]
    fn centroids() {
        let tri = ConvexBody::from_points(&[v(&[0., 0.]), v(&[4., 0.]), v(&[1., 3.])], 2).unwrap();
        assert!((tri.centroid().unwrap() - v(&[5. / 3., 1.])).norm() < 1e-12);
        let ell = ConvexBody::ellipsoid(v(&[1., 2.]), v(&[3., 1.])).unwrap();
        assert_eq!(ell.centroid().unwrap(), v(&[1., 2.]));
    }

    #[test]
    fn caps() {
        let disk = ConvexBody::unit_ball(2);
        let cap = disk.make_cap(&v(&[1., 0.]), 0.3).unwrap();
        assert!((cap.apex - v(&[1., 0.])).norm() < 1e-14);
        assert!((cap.base_centroid.clone() - v(&[0.7, 0.])).norm() < 1e-14);
        let thin = disk.make_cap(&v(&[1., 0.]), 1e-6).unwrap();
        assert!((thin.base_centroid - thin.apex).norm() < 1e-5);
        let sq = ConvexBody::from_points(&[v(&[0., 0.]), v(&[1., 0.]), v(&[1., 1.]), v(&[0., 1.])], 2).unwrap();
        let cap = sq.make_cap(&v(&[1., 0.]), 0.25).unwrap();
        assert!((cap.base_centroid - v(&[0.75, 0.5])).norm() < 1e-12);
        assert!(matches!(disk.make_cap(&v(&[1., 0.]), 2.5), Err(Error::WidthOutOfRange { .. })));
    }

    #[test]
    fn section_centroid_cube_3d() {
        let cube = ConvexBody::polytope(Polytope::cube(3, 1.0));
        let c = cube.section_centroid(&v(&[1., 1., 0.]).normalize(), 0.5).unwrap();
        // section is a rectangle symmetric in z about the line x + y = 0.5*sqrt(2)
        assert_abs_diff_eq!(c[2], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(c[0], c[1], epsilon = 1e-12);
    }

    #[test]
    fn ellipse_section_matches_radial_quadrature() {
        let ell = ConvexBody::ellipsoid(v(&[0., 0., 0.]), v(&[2., 1., 0.5])).unwrap();
        let u = v(&[0.3, 0.5, 0.8]).normalize();
        let exact = ell.section_centroid(&u, 0.4).unwrap();
        let numeric = ell.radial_section_centroid(&u, 0.4).unwrap();
        assert!((exact - numeric).norm() < 1e-6);
    }

    #[test]
    fn certificates_are_checked() {
        let disk = ConvexBody::unit_ball(2);
        let ok = Certificate { center: v(&[0., 0.]), inner: 0.5, outer: 1.0 };
        assert!(disk.clone().with_certificate(ok).is_ok());
        let bad = Certificate { center: v(&[0., 0.]), inner: 1.2, outer: 2.0 };
        assert!(disk.clone().with_certificate(bad).is_err());
        let bad = Certificate { center: v(&[0., 0.]), inner: 0.5, outer: 0.9 };
        assert!(disk.with_certificate(bad).is_err());
    }

    #[test]
    fn affine_image_of_disk_is_ellipse() {
        let disk = ConvexBody::unit_ball(2);
        let map = AffineMap::new(Matrix::from_row_slice(2, 2, &[2., 0., 0., 1.]), v(&[0.5, 0.])).unwrap();
        let e = ConvexBody::affine_image(&disk, map).unwrap();
        assert_abs_diff_eq!(e.support(&v(&[1., 0.])), 2.5, epsilon = 1e-14);
        let (tm, tp) = e.chord_endpoints(&v(&[0.5, 0.]), &v(&[1., 0.])).unwrap();
        assert_abs_diff_eq!(tm, 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(tp, 2.0, epsilon = 1e-14);
    }
}
