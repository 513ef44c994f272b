//! Hilbert and Funk distances, the Finsler norm, metric-ball radial extents, asymptotic
//! balls and Macbeath regions.

use crate::body::{AffineMap, ConvexBody};
use crate::error::{Error, Result};
use crate::linalg::{Matrix, Vector};

fn interior_margin(body: &ConvexBody, x: &Vector) -> Result<()> {
    if x.len() != body.dim() {
        return Err(Error::DimensionMismatch { expected: body.dim(), got: x.len() });
    }
    let margin = body.margin(x);
    if !(margin > 0.0) {
        return Err(Error::PointNotInterior { margin });
    }
    Ok(())
}

/// Half the log cross ratio of `(a, p, q, b)` on the chord through `p` and `q`.
pub fn hilbert_distance(body: &ConvexBody, p: &Vector, q: &Vector) -> Result<f64> {
    interior_margin(body, p)?;
    interior_margin(body, q)?;
    let u = q - p;
    if u.norm() == 0.0 {
        return Ok(0.0);
    }
    // hit times in units of |q - p|: q sits at t = 1
    let (tm, tp) = body.chord_endpoints(p, &u)?;
    if !(tp > 1.0) {
        return Err(Error::PointNotInterior { margin: body.margin(q) });
    }
    Ok(0.5 * ((1.0 / tm).ln_1p() - (-1.0 / tp).ln_1p()))
}

/// `log(|pb| / |qb|)` with `b` the boundary point beyond `q` on the ray from `p`.
pub fn funk_distance(body: &ConvexBody, p: &Vector, q: &Vector) -> Result<f64> {
    interior_margin(body, p)?;
    interior_margin(body, q)?;
    let u = q - p;
    if u.norm() == 0.0 {
        return Ok(0.0);
    }
    let (_, tp) = body.chord_endpoints(p, &u)?;
    if !(tp > 1.0) {
        return Err(Error::PointNotInterior { margin: body.margin(q) });
    }
    Ok(-(-1.0 / tp).ln_1p())
}

/// `F(p, v) = (1/t_plus + 1/t_minus) / 2`, hit times measured in units of `v`.
pub fn finsler_norm(body: &ConvexBody, p: &Vector, v: &Vector) -> Result<f64> {
    interior_margin(body, p)?;
    if v.norm() == 0.0 {
        return Ok(0.0);
    }
    let (tm, tp) = body.chord_endpoints(p, v)?;
    Ok(0.5 * (1.0 / tp + 1.0 / tm))
}

/// `s(R)` with `t_+ t_- (e^{2R} - 1) / (t_+ + e^{2R} t_-)`, written overflow-free.
pub fn radial_extent_from_hits(tm: f64, tp: f64, radius: f64) -> f64 {
    let decay = (-2.0 * radius).exp();
    tp * tm * (-(-2.0 * radius).exp_m1()) / (tp * decay + tm)
}

/// Distance `s` with `hilbert_distance(p, p + s u) = R` (`u` normalized internally).
pub fn ball_radial_extent(body: &ConvexBody, p: &Vector, u: &Vector, radius: f64) -> Result<f64> {
    if !(radius >= 0.0) {
        return Err(Error::InvalidArgument(format!("radius must be nonnegative, got {radius}")));
    }
    let n = u.norm();
    if !(n > 0.0) {
        return Err(Error::InvalidArgument("direction must be nonzero".into()));
    }
    let (tm, tp) = body.chord_endpoints(p, &(u / n))?;
    Ok(radial_extent_from_hits(tm, tp, radius))
}

/// Dilation factor `1 - e^{-2R}` of the asymptotic ball.
pub fn asymptotic_factor(radius: f64) -> f64 {
    -(-2.0 * radius).exp_m1()
}

/// `AsB(y, R) = y + (1 - e^{-2R}) (Ω - y)`; `None` (empty) for `R <= 0`.
pub fn asymptotic_ball(body: &ConvexBody, y: &Vector, radius: f64) -> Result<Option<ConvexBody>> {
    interior_margin(body, y)?;
    if !(radius > 0.0) {
        return Ok(None);
    }
    Ok(Some(body.scale_about(y, asymptotic_factor(radius))?))
}

/// Sandwich loss `½ log(1 + L/l)` between metric and asymptotic balls.
pub fn sandwich_shift(body: &ConvexBody) -> f64 {
    let c = body.certificate();
    0.5 * (c.outer / c.inner).ln_1p()
}

/// `M'(x) = x + (⅕(Ω - x) ∩ ⅕(x - Ω))`.
pub fn macbeath_region(body: &ConvexBody, x: &Vector) -> Result<ConvexBody> {
    interior_margin(body, x)?;
    let d = body.dim();
    let forward = body.scale_about(x, 0.2)?;
    let reflect = AffineMap::new(Matrix::identity(d, d) * -0.2, x * 1.2)?;
    let backward = ConvexBody::affine_image(body, reflect)?;
    ConvexBody::intersect_about(vec![forward, backward], x.clone())
}

/// Euclidean distance from `x` to the boundary along the ray from `o` through `x`.
pub fn ray_distance(body: &ConvexBody, o: &Vector, x: &Vector) -> Result<f64> {
    interior_margin(body, o)?;
    let u = x - o;
    let n = u.norm();
    if n == 0.0 {
        return Err(Error::CoincidentPoints);
    }
    let (_, tp) = body.chord_endpoints(x, &(u / n))?;
    Ok(tp)
}
