//! Asymptotic volume, volume entropy, polytopal approximation and flag approximability,
//! and the harnesses that compare them.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::body::{hausdorff_distance, ConvexBody};
use crate::density::VolumeKind;
use crate::error::{Error, Result};
use crate::fit::{fit_slope, fit_slope_with_log, richardson_limit, SlopeFit};
use crate::linalg::{factorial, Vector};
use crate::polytope::{simplex_flag_count, Polytope};
use crate::sphere::DirectionNet;
use crate::volume::{growth_curve, pool, BallSpec, Budget, Clip};

/// Residual RMS above which a fit is reported as non-convergent.
pub const FIT_THRESHOLD: f64 = 0.1;
pub const VERTEX_BUDGET_2D: usize = 100_000;
pub const VERTEX_BUDGET_3D: usize = 10_000;
/// Directions used to certify approximations (facet normals are always added).
pub const CERTIFY_DIRS: usize = 4096;
/// Boundary net size `N ≈ K L / ε` for 3D approximations; the hull of a Fibonacci net of the
/// unit sphere has sagitta close to `3.72 / N`.
const NET_CONSTANT_3D: f64 = 3.8;

/// Structured report `{quantity, estimate, uncertainty, window, fixtures}` plus details.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub quantity: String,
    pub estimate: f64,
    pub uncertainty: f64,
    pub window: Vec<f64>,
    pub fixtures: Vec<String>,
    #[serde(default)]
    pub details: serde_json::Value,
}

impl Report {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// `R = step, 2 step, …, r_max`.
pub fn radius_ladder(step: f64, r_max: f64) -> Vec<f64> {
    let n = (r_max / step + 1e-9).floor() as usize;
    (1..=n).map(|k| k as f64 * step).collect()
}

/// `ε = 2^{−from}, …, 2^{−to}`.
pub fn epsilon_ladder(from: i32, to: i32) -> Vec<f64> {
    (from..=to).map(|k| 2f64.powi(-k)).collect()
}

pub fn default_entropy_ladder() -> Vec<f64> {
    radius_ladder(0.5, 10.0)
}

pub fn default_entropy_window() -> (f64, f64) {
    (6.0, 10.0)
}

pub fn default_epsilon_ladder(dim: usize) -> Vec<f64> {
    if dim >= 3 {
        epsilon_ladder(4, 10)
    } else {
        epsilon_ladder(4, 14)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsvolEstimate {
    /// Extrapolated `Vol(AsB(o, R)) / R^d`.
    pub value: f64,
    pub uncertainty: f64,
    /// The same limit from metric balls; both agree by the sandwich between them.
    pub metric_value: f64,
    pub metric_uncertainty: f64,
    pub kind: VolumeKind,
    /// `(R, Vol / R^d)` along the ladder for asymptotic balls.
    pub normalized: Vec<(f64, f64)>,
    pub window: (f64, f64),
}

fn tail_window(ladder: &[f64]) -> (f64, f64) {
    let hi = *ladder.last().unwrap();
    (hi / 2.0, hi)
}

fn normalized_limit(
    spec: &BallSpec,
    kind: VolumeKind,
    ladder: &[f64],
    budget: Budget,
) -> Result<(f64, f64, Vec<(f64, f64)>)> {
    let d = spec.body.dim() as i32;
    let curve = growth_curve(spec, kind, ladder, budget)?;
    let norm: Vec<(f64, f64)> = curve.iter().map(|(r, e)| (*r, e.value / r.powi(d))).collect();
    let (r, y): (Vec<f64>, Vec<f64>) = norm.iter().copied().unzip();
    let (a, u) = richardson_limit(&r, &y, Some(tail_window(ladder)))?;
    let quad = curve.last().map(|(r, e)| e.stderr / r.powi(d)).unwrap_or(0.0);
    Ok((a, u + quad, norm))
}

/// Asymptotic volume of a polytope about its base point, from a ladder ending at `R_max`.
pub fn asvol_estimate(body: &ConvexBody, kind: VolumeKind, ladder: &[f64], budget: Budget) -> Result<AsvolEstimate> {
    if !body.is_polytope() {
        return Err(Error::NonPolytopeBody);
    }
    let o = body.certificate().center.clone();
    let (value, uncertainty, normalized) =
        normalized_limit(&BallSpec::asymptotic(body, o.clone(), 0.0), kind, ladder, budget)?;
    let (metric_value, metric_uncertainty, _) =
        normalized_limit(&BallSpec::metric(body, o, 0.0), kind, ladder, budget)?;
    Ok(AsvolEstimate {
        value,
        uncertainty,
        metric_value,
        metric_uncertainty,
        kind,
        normalized,
        window: tail_window(ladder),
    })
}

/// Volume entropy: slope of `log Vol(B(p, R))` against `R` over `window`, with a `ln R` term
/// absorbing polynomial growth factors.
pub fn entropy_estimate(
    body: &ConvexBody,
    p: Option<&Vector>,
    kind: VolumeKind,
    ladder: &[f64],
    window: (f64, f64),
    budget: Budget,
) -> Result<SlopeFit> {
    let p = p.cloned().unwrap_or_else(|| body.certificate().center.clone());
    let curve = growth_curve(&BallSpec::metric(body, p, 0.0), kind, ladder, budget)?;
    let (r, logv): (Vec<f64>, Vec<f64>) = curve.iter().map(|(r, e)| (*r, e.value.ln())).unzip();
    fit_slope_with_log(&r, &logv, Some(window))?.check(FIT_THRESHOLD)
}

/// Inscribed polytope within Hausdorff distance `ε`, built from boundary points along a
/// direction net about the certificate centre. The angular spacing starts proportional to
/// `√(ε/L)` and is halved until the post-hoc support-function check passes.
pub fn approximate_polytope(body: &ConvexBody, eps: f64) -> Result<Polytope> {
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument(format!("epsilon must be positive, got {eps}")));
    }
    if let Some(p) = body.as_polytope() {
        return Ok(p.clone());
    }
    let d = body.dim();
    let y = &body.certificate().center;
    let outer = body.certificate().outer;
    let hit = |u: &Vector| y + u * body.ray_exit(y, u);
    let (mut n, budget) = match d {
        1 => {
            let e = Vector::from_element(1, 1.0);
            return Polytope::from_points(&[hit(&e), hit(&-e)], 1);
        }
        2 => {
            let ratio = (eps / outer).min(1.0);
            ((std::f64::consts::PI / (1.0 - ratio).acos()).ceil().max(3.0) as usize, VERTEX_BUDGET_2D)
        }
        3 => ((NET_CONSTANT_3D * outer / eps).ceil().max(8.0) as usize, VERTEX_BUDGET_3D),
        _ => return Err(Error::UnsupportedDimension(d)),
    };
    loop {
        if n > budget {
            return Err(Error::EpsilonTooSmall { eps, budget });
        }
        let net = DirectionNet::new(d, n);
        let points: Vec<Vector> = net.dirs.iter().map(&hit).collect();
        let poly = Polytope::from_points(&points, d)?;
        let gap = hausdorff_distance(body, &ConvexBody::polytope(poly.clone()), CERTIFY_DIRS)?;
        if gap <= eps {
            return Ok(poly);
        }
        // halving the angular spacing
        n *= if d == 2 { 2 } else { 4 };
    }
}

/// Flag count of the approximating polytope: an upper bound on the least flag number of an
/// `ε`-approximation.
pub fn flag_number(body: &ConvexBody, eps: f64) -> Result<u64> {
    Ok(approximate_polytope(body, eps)?.flag_count())
}

/// Slope of `log flag_number` against `−log ε` over the ladder.
pub fn flag_approx_estimate(body: &ConvexBody, eps_ladder: &[f64]) -> Result<SlopeFit> {
    if eps_ladder.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidArgument("epsilon ladder must be decreasing".into()));
    }
    let counts: Vec<Result<u64>> = pool().install(|| eps_ladder.par_iter().map(|&e| flag_number(body, e)).collect());
    let mut x = Vec::with_capacity(eps_ladder.len());
    let mut y = Vec::with_capacity(eps_ladder.len());
    for (e, c) in eps_ladder.iter().zip(counts) {
        x.push(-e.ln());
        y.push((c? as f64).ln());
    }
    fit_slope(&x, &y, None)?.check(FIT_THRESHOLD)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlagRatioReport {
    pub flags: u64,
    pub simplex_flags: u64,
    /// `|Flags(P)| / (d+1)!`.
    pub predicted: f64,
    /// `Asvol(P) / Asvol(Σ)`.
    pub measured: f64,
    pub uncertainty: f64,
    pub relative_discrepancy: f64,
    pub asvol: f64,
    pub simplex_asvol: f64,
    /// Asymptotic volume of each flag-simplex piece divided by `Asvol(Σ)/(d+1)!`.
    pub per_flag: Vec<f64>,
    pub kind: VolumeKind,
    pub r_max: f64,
}

impl FlagRatioReport {
    pub fn report(&self, fixture: &str) -> Report {
        Report {
            quantity: "asvol-flag-ratio".into(),
            estimate: self.measured,
            uncertainty: self.uncertainty,
            window: vec![self.r_max / 2.0, self.r_max],
            fixtures: vec![fixture.to_string(), format!("regular {}-simplex", self.per_flag_dim())],
            details: serde_json::to_value(self).expect("serializable"),
        }
    }

    fn per_flag_dim(&self) -> usize {
        (1..=4).find(|&d| simplex_flag_count(d) == self.simplex_flags).unwrap_or(0)
    }
}

/// Sum of the asymptotic volumes of the barycentric flag-simplex pieces, with the pieces.
fn piecewise_asvol(poly: &Polytope, kind: VolumeKind, ladder: &[f64], budget: Budget) -> Result<(f64, f64, Vec<f64>)> {
    let body = ConvexBody::polytope(poly.clone());
    let o = body.certificate().center.clone();
    let mut total = 0.0;
    let mut unc = 0.0;
    let mut pieces = Vec::new();
    for s in poly.barycentric_decomposition() {
        let spec = BallSpec::asymptotic(&body, o.clone(), 0.0).with_clip(Clip::FlagSimplex(s));
        let (a, u, _) = normalized_limit(&spec, kind, ladder, budget)?;
        total += a;
        unc += u;
        pieces.push(a);
    }
    Ok((total, unc, pieces))
}

/// Compares `Asvol(P) / Asvol(Σ)` with `|Flags(P)| / (d+1)!` using the same quadrature.
pub fn verify_flag_ratio(poly: &Polytope, kind: VolumeKind, r_max: f64, budget: Budget) -> Result<FlagRatioReport> {
    let d = poly.dim();
    let ladder = radius_ladder(0.5, r_max);
    let simplex = Polytope::regular_simplex(d);
    let (asvol, u1, pieces) = piecewise_asvol(poly, kind, &ladder, budget)?;
    let (simplex_asvol, u2, _) = piecewise_asvol(&simplex, kind, &ladder, budget)?;
    let flags = poly.flag_count();
    let simplex_flags = simplex_flag_count(d);
    let predicted = flags as f64 / factorial(d + 1);
    let measured = asvol / simplex_asvol;
    let unit = simplex_asvol / factorial(d + 1);
    Ok(FlagRatioReport {
        flags,
        simplex_flags,
        predicted,
        measured,
        uncertainty: measured * (u1 / asvol + u2 / simplex_asvol),
        relative_discrepancy: (measured - predicted) / predicted,
        asvol,
        simplex_asvol,
        per_flag: pieces.iter().map(|a| a / unit).collect(),
        kind,
        r_max,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyIdentityReport {
    pub entropy: SlopeFit,
    pub flag_approximability: SlopeFit,
    /// `ent / (2 · flagapprox)`; absent when both vanish.
    pub ratio: Option<f64>,
    pub ratio_uncertainty: Option<f64>,
    pub entropy_bound_holds: bool,
    pub flag_bound_holds: bool,
    pub dim: usize,
}

impl EntropyIdentityReport {
    pub fn report(&self, fixture: &str) -> Report {
        Report {
            quantity: "entropy-over-twice-flag-approximability".into(),
            estimate: self.ratio.unwrap_or(f64::NAN),
            uncertainty: self.ratio_uncertainty.unwrap_or(f64::NAN),
            window: vec![self.entropy.window.0, self.entropy.window.1],
            fixtures: vec![fixture.to_string()],
            details: json!({
                "entropy": self.entropy.slope,
                "entropy_stderr": self.entropy.slope_stderr,
                "flag_approximability": self.flag_approximability.slope,
                "twice_flag_approximability": 2.0 * self.flag_approximability.slope,
                "entropy_bound_holds": self.entropy_bound_holds,
                "flag_bound_holds": self.flag_bound_holds,
            }),
        }
    }
}

/// Tolerances for the upper-bound checks `ent ≤ d − 1` and `flagapprox ≤ (d − 1)/2`.
pub const ENTROPY_BOUND_TOL: f64 = 0.1;
pub const FLAG_BOUND_TOL: f64 = 0.05;
/// Below this both exponents count as zero and the ratio is not formed.
const VANISHING: f64 = 0.05;

/// Runs both estimators and compares `ent` with `2 · flagapprox`.
pub fn verify_entropy_identity(
    body: &ConvexBody,
    kind: VolumeKind,
    r_ladder: &[f64],
    window: (f64, f64),
    eps_ladder: &[f64],
    budget: Budget,
) -> Result<EntropyIdentityReport> {
    let d = body.dim();
    let entropy = entropy_estimate(body, None, kind, r_ladder, window, budget)?;
    let flag_approximability = flag_approx_estimate(body, eps_ladder)?;
    let (ent, fa) = (entropy.slope, flag_approximability.slope);
    let (ratio, ratio_uncertainty) = if fa.abs() < VANISHING && ent.abs() < VANISHING {
        (None, None)
    } else {
        let r = ent / (2.0 * fa);
        let rel = (entropy.slope_stderr / ent).powi(2) + (flag_approximability.slope_stderr / fa).powi(2);
        (Some(r), Some(r.abs() * rel.sqrt()))
    };
    Ok(EntropyIdentityReport {
        entropy_bound_holds: ent <= d as f64 - 1.0 + ENTROPY_BOUND_TOL,
        flag_bound_holds: fa <= (d as f64 - 1.0) / 2.0 + FLAG_BOUND_TOL,
        entropy,
        flag_approximability,
        ratio,
        ratio_uncertainty,
        dim: d,
    })
}

/// `ε′/ε` in the shrinking step of the entropy upper bound: with `λ = 1 + 2dε`,
/// `1 − ε′ = (1 − ε)/λ^k` for `k = 2` (both inclusions) or `k = 1`.
pub fn shrink_ratio(d: usize, eps: f64, lambda_power: i32) -> f64 {
    let lambda = 1.0 + 2.0 * d as f64 * eps;
    // 1 − (1 − ε) λ^{−k}, kept accurate for small ε
    let eps_prime = -((-eps).ln_1p() - lambda_power as f64 * lambda.ln()).exp_m1();
    eps_prime / eps
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::volume::Budget;

    fn v(c: &[f64]) -> Vector {
        Vector::from_vec(c.to_vec())
    }

    #[test]
    fn ladders() {
        assert_eq!(radius_ladder(0.5, 2.0), vec![0.5, 1.0, 1.5, 2.0]);
        assert_eq!(epsilon_ladder(4, 6), vec![1.0 / 16.0, 1.0 / 32.0, 1.0 / 64.0]);
        assert_eq!(default_entropy_ladder().len(), 20);
    }

    #[test]
    fn disk_approximation_is_minimal_ngon() {
        let disk = ConvexBody::unit_ball(2);
        for k in [4, 7, 10] {
            let eps = 2f64.powi(-k);
            let p = approximate_polytope(&disk, eps).unwrap();
            let n = (std::f64::consts::PI / (1.0 - eps).acos()).ceil() as usize;
            assert_eq!(p.vertices().len(), n);
            assert_eq!(flag_number(&disk, eps).unwrap(), 2 * n as u64);
            assert!(hausdorff_distance(&disk, &ConvexBody::polytope(p), 4096).unwrap() <= eps);
        }
    }

    #[test]
    fn ball_approximation_3d() {
        let ball = ConvexBody::unit_ball(3);
        let p = approximate_polytope(&ball, 1e-2).unwrap();
        assert!(hausdorff_distance(&ball, &ConvexBody::polytope(p.clone()), 4096).unwrap() <= 1e-2);
        assert_eq!(p.flag_count(), 12 * p.vertices().len() as u64 - 24);
    }

    #[test]
    fn polytopes_approximate_themselves() {
        let simplex = ConvexBody::polytope(Polytope::regular_simplex(3));
        assert_eq!(flag_number(&simplex, 1e-9).unwrap(), 24);
        let hex = ConvexBody::polytope(Polytope::regular_polygon(6, 1.0, 0.0));
        let f = flag_approx_estimate(&hex, &epsilon_ladder(4, 10)).unwrap();
        assert!(f.slope.abs() < 1e-12);
    }

    #[test]
    fn epsilon_budget_enforced() {
        let ball = ConvexBody::unit_ball(3);
        assert!(matches!(approximate_polytope(&ball, 1e-5), Err(Error::EpsilonTooSmall { .. })));
        assert!(approximate_polytope(&ball, 0.0).is_err());
    }

    #[test]
    fn disk_flag_approximability_is_half() {
        let disk = ConvexBody::unit_ball(2);
        let f = flag_approx_estimate(&disk, &epsilon_ladder(4, 14)).unwrap();
        assert!((f.slope - 0.5).abs() < 0.05, "{}", f.slope);
        // one halving of ε multiplies the flag count by about √2
        let a = flag_number(&disk, 2f64.powi(-12)).unwrap() as f64;
        let b = flag_number(&disk, 2f64.powi(-13)).unwrap() as f64;
        assert!((b / a - 2f64.sqrt()).abs() < 0.05);
    }

    #[test]
    fn asvol_requires_polytope() {
        let disk = ConvexBody::unit_ball(2);
        let r = asvol_estimate(
            &disk,
            VolumeKind::Busemann,
            &radius_ladder(0.5, 3.0),
            Budget { directions: 64, radial: 32 },
        );
        assert_eq!(r.unwrap_err(), Error::NonPolytopeBody);
    }

    #[test]
    fn triangle_asvol_is_pi() {
        let tri = ConvexBody::polytope(Polytope::regular_polygon(3, 1.0, 0.0));
        let budget = Budget { directions: 64, radial: 64 };
        let a = asvol_estimate(&tri, VolumeKind::Busemann, &radius_ladder(0.5, 9.0), budget).unwrap();
        assert!((a.value / std::f64::consts::PI - 1.0).abs() < 1e-2, "{}", a.value);
        assert!((a.metric_value / std::f64::consts::PI - 1.0).abs() < 1e-6, "{}", a.metric_value);
        // affine images share the asymptotic volume
        let img = ConvexBody::from_points(&[v(&[0., 0.]), v(&[3., 0.]), v(&[0.5, 0.4])], 2).unwrap();
        let b = asvol_estimate(&img, VolumeKind::Busemann, &radius_ladder(0.5, 9.0), budget).unwrap();
        assert!((b.value / a.value - 1.0).abs() < 2e-2);
    }

    #[test]
    fn shrink_ratio_limits() {
        for d in [2usize, 3] {
            let single = shrink_ratio(d, 1e-5, 1);
            assert!((single / (2 * d + 1) as f64 - 1.0).abs() < 1e-2);
            let double = shrink_ratio(d, 1e-5, 2);
            assert!((double / (4 * d + 1) as f64 - 1.0).abs() < 1e-2);
        }
    }

    #[test]
    fn report_json_fields() {
        let r = Report {
            quantity: "q".into(),
            estimate: 1.0,
            uncertainty: 0.1,
            window: vec![6.0, 10.0],
            fixtures: vec!["disk".into()],
            details: serde_json::Value::Null,
        };
        let v: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        for key in ["quantity", "estimate", "uncertainty", "window", "fixtures"] {
            assert!(v.get(key).is_some());
        }
    }
}
