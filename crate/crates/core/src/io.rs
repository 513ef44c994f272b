//! Body specifications (JSON `{dim, kind, parameters}`) and plain-text vertex lists.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::body::{AffineMap, Certificate, ConvexBody, Shape};
use crate::error::{Error, Result};
use crate::linalg::{Matrix, Vector};
use crate::polytope::Polytope;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BodySpec {
    pub dim: usize,
    pub kind: String,
    #[serde(default)]
    pub parameters: Value,
    /// Optional sandwich certificate `{center, inner, outer}`, verified on load.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificate: Option<Value>,
}

fn bad(msg: impl Into<String>) -> Error {
    Error::Parse(msg.into())
}

fn vector(v: &Value, what: &str) -> Result<Vector> {
    let arr = v.as_array().ok_or_else(|| bad(format!("'{what}' must be an array of numbers")))?;
    let xs: Option<Vec<f64>> = arr.iter().map(|x| x.as_f64()).collect();
    Ok(Vector::from_vec(xs.ok_or_else(|| bad(format!("'{what}' must contain numbers")))?))
}

fn number(v: &Value, what: &str) -> Result<f64> {
    match v {
        Value::Number(n) => n.as_f64().ok_or_else(|| bad(format!("'{what}' is not a number"))),
        Value::String(s) if s.eq_ignore_ascii_case("inf") || s.eq_ignore_ascii_case("infinity") => Ok(f64::INFINITY),
        _ => Err(bad(format!("'{what}' must be a number"))),
    }
}

fn field<'a>(params: &'a Value, key: &str) -> Option<&'a Value> {
    params.get(key).filter(|v| !v.is_null())
}

fn vec_json(v: &Vector) -> Value {
    json!(v.iter().copied().collect::<Vec<f64>>())
}

impl BodySpec {
    pub fn build(&self) -> Result<ConvexBody> {
        let d = self.dim;
        if d == 0 {
            return Err(bad("dim must be positive"));
        }
        let p = &self.parameters;
        let center = || -> Result<Vector> {
            match field(p, "center") {
                Some(c) => vector(c, "center"),
                None => Ok(Vector::zeros(d)),
            }
        };
        let check = |v: &Vector, what: &str| -> Result<()> {
            if v.len() != d {
                return Err(Error::DimensionMismatch { expected: d, got: v.len() })
                    .map_err(|e| bad(format!("{what}: {e}")));
            }
            Ok(())
        };
        let body = match self.kind.as_str() {
            "ball" | "disk" => {
                let c = center()?;
                check(&c, "center")?;
                let r = field(p, "radius").map(|v| number(v, "radius")).transpose()?.unwrap_or(1.0);
                ConvexBody::ball(c, r)?
            }
            "ellipsoid" | "ellipse" => {
                let c = center()?;
                let axes = vector(field(p, "axes").ok_or_else(|| bad("ellipsoid needs 'axes'"))?, "axes")?;
                check(&c, "center")?;
                check(&axes, "axes")?;
                ConvexBody::ellipsoid(c, axes)?
            }
            "pnorm" | "p-ball" => {
                let c = center()?;
                check(&c, "center")?;
                let scale = field(p, "scale").map(|v| number(v, "scale")).transpose()?.unwrap_or(1.0);
                let exponent = number(field(p, "exponent").ok_or_else(|| bad("pnorm needs 'exponent'"))?, "exponent")?;
                ConvexBody::pnorm_ball(c, scale, exponent)?
            }
            "polytope" => {
                let verts = field(p, "vertices").ok_or_else(|| bad("polytope needs 'vertices'"))?;
                let rows = verts.as_array().ok_or_else(|| bad("'vertices' must be an array"))?;
                let pts: Vec<Vector> = rows.iter().map(|r| vector(r, "vertex")).collect::<Result<_>>()?;
                for v in &pts {
                    check(v, "vertex")?;
                }
                ConvexBody::from_points(&pts, d)?
            }
            "simplex" => {
                let scale = field(p, "scale").map(|v| number(v, "scale")).transpose()?.unwrap_or(1.0);
                let s = Polytope::regular_simplex(d);
                let c = Vector::zeros(d);
                ConvexBody::polytope(if scale == 1.0 { s } else { s.scaled_about(&c, scale)? })
            }
            "cube" => {
                let h = field(p, "half_width").map(|v| number(v, "half_width")).transpose()?.unwrap_or(1.0);
                ConvexBody::polytope(Polytope::cube(d, h))
            }
            "regular-polygon" | "polygon" => {
                if d != 2 {
                    return Err(bad("regular polygons are two-dimensional"));
                }
                let n =
                    field(p, "n").and_then(|v| v.as_u64()).ok_or_else(|| bad("regular polygon needs integer 'n'"))?;
                if n < 3 {
                    return Err(bad("regular polygon needs n >= 3"));
                }
                let r = field(p, "radius").map(|v| number(v, "radius")).transpose()?.unwrap_or(1.0);
                let phase = field(p, "phase").map(|v| number(v, "phase")).transpose()?.unwrap_or(0.0);
                ConvexBody::polytope(Polytope::regular_polygon(n as usize, r, phase))
            }
            "affine" => {
                let inner: BodySpec =
                    serde_json::from_value(field(p, "inner").ok_or_else(|| bad("affine needs 'inner'"))?.clone())
                        .map_err(|e| bad(format!("inner body: {e}")))?;
                let rows = field(p, "matrix").and_then(|m| m.as_array()).ok_or_else(|| bad("affine needs 'matrix'"))?;
                let rows: Vec<Vector> = rows.iter().map(|r| vector(r, "matrix row")).collect::<Result<_>>()?;
                if rows.len() != d || rows.iter().any(|r| r.len() != d) {
                    return Err(bad("matrix must be dim x dim"));
                }
                let m = Matrix::from_fn(d, d, |i, j| rows[i][j]);
                let shift = match field(p, "shift") {
                    Some(s) => vector(s, "shift")?,
                    None => Vector::zeros(d),
                };
                check(&shift, "shift")?;
                ConvexBody::affine_image(&inner.build()?, AffineMap::new(m, shift)?)?
            }
            other => return Err(bad(format!("unknown body kind '{other}'"))),
        };
        if body.dim() != d {
            return Err(bad(format!("body has dimension {}, spec says {d}", body.dim())));
        }
        match &self.certificate {
            None => Ok(body),
            Some(c) => {
                let center = vector(c.get("center").ok_or_else(|| bad("certificate needs 'center'"))?, "center")?;
                let inner = number(c.get("inner").ok_or_else(|| bad("certificate needs 'inner'"))?, "inner")?;
                let outer = number(c.get("outer").ok_or_else(|| bad("certificate needs 'outer'"))?, "outer")?;
                body.with_certificate(Certificate { center, inner, outer })
            }
        }
    }

    /// Spec that rebuilds `body` (polytopes are written by their vertices).
    pub fn from_body(body: &ConvexBody) -> Result<Self> {
        let d = body.dim();
        let (kind, parameters) = match body.shape() {
            Shape::Ellipsoid { center, axes } => {
                ("ellipsoid", json!({"center": vec_json(center), "axes": vec_json(axes)}))
            }
            Shape::PNormBall { center, scale, exponent } => {
                let e = if exponent.is_infinite() { json!("inf") } else { json!(exponent) };
                ("pnorm", json!({"center": vec_json(center), "scale": scale, "exponent": e}))
            }
            Shape::Polytope(p) => {
                let rows: Vec<Value> = p.vertices().iter().map(vec_json).collect();
                ("polytope", json!({ "vertices": rows }))
            }
            Shape::AffineImage { inner, map } => {
                let rows: Vec<Value> =
                    (0..d).map(|i| json!((0..d).map(|j| map.linear[(i, j)]).collect::<Vec<f64>>())).collect();
                let inner = serde_json::to_value(BodySpec::from_body(inner)?).expect("serializable");
                ("affine", json!({"inner": inner, "matrix": rows, "shift": vec_json(&map.shift)}))
            }
            Shape::Intersection(_) => {
                return Err(Error::InvalidArgument("intersections have no file representation".into()))
            }
        };
        Ok(BodySpec { dim: d, kind: kind.into(), parameters, certificate: None })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec serializes")
    }
}

pub fn parse_body_spec(text: &str) -> Result<BodySpec> {
    serde_json::from_str(text).map_err(|e| bad(format!("body spec: {e}")))
}

/// One point per line, whitespace-separated coordinates; `#` starts a comment.
pub fn parse_vertex_list(text: &str) -> Result<Vec<Vector>> {
    let mut out: Vec<Vector> = Vec::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let xs: std::result::Result<Vec<f64>, _> = line.split_whitespace().map(str::parse::<f64>).collect();
        let xs = xs.map_err(|e| bad(format!("line {}: {e}", no + 1)))?;
        if let Some(first) = out.first() {
            if first.len() != xs.len() {
                return Err(bad(format!("line {}: expected {} coordinates, got {}", no + 1, first.len(), xs.len())));
            }
        }
        out.push(Vector::from_vec(xs));
    }
    if out.is_empty() {
        return Err(bad("vertex list is empty"));
    }
    Ok(out)
}

/// Shortest round-trip decimal representation, one point per line.
pub fn write_vertex_list(points: &[Vector]) -> String {
    let mut s = String::new();
    for p in points {
        let row: Vec<String> = p.iter().map(|x| format!("{x:?}")).collect();
        s.push_str(&row.join(" "));
        s.push('\n');
    }
    s
}

/// Parses either a JSON body spec or a vertex list.
pub fn parse_body(text: &str) -> Result<ConvexBody> {
    if text.trim_start().starts_with('{') {
        parse_body_spec(text)?.build()
    } else {
        let pts = parse_vertex_list(text)?;
        let d = pts[0].len();
        ConvexBody::from_points(&pts, d)
    }
}

pub fn load_body(path: &Path) -> Result<ConvexBody> {
    let text = std::fs::read_to_string(path).map_err(|e| bad(format!("{}: {e}", path.display())))?;
    parse_body(&text)
}

pub fn save_body(body: &ConvexBody, path: &Path) -> Result<()> {
    let text = BodySpec::from_body(body)?.to_json();
    std::fs::write(path, text).map_err(|e| Error::InvalidArgument(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_kinds() {
        let disk = parse_body(r#"{"dim": 2, "kind": "ball", "parameters": {"radius": 1.0}}"#).unwrap();
        assert!((disk.support(&Vector::from_vec(vec![0.0, 1.0])) - 1.0).abs() < 1e-15);
        let s3 = parse_body(r#"{"dim": 3, "kind": "simplex"}"#).unwrap();
        assert_eq!(s3.as_polytope().unwrap().flag_count(), 24);
        let sq =
            parse_body(r#"{"dim": 2, "kind": "polytope", "parameters": {"vertices": [[-1,-1],[1,-1],[1,1],[-1,1]]}}"#)
                .unwrap();
        assert_eq!(sq.as_polytope().unwrap().flag_count(), 8);
        let linf = parse_body(r#"{"dim": 2, "kind": "pnorm", "parameters": {"exponent": "inf", "scale": 2}}"#).unwrap();
        assert!((linf.support(&Vector::from_vec(vec![1.0, 1.0])) - 4.0).abs() < 1e-15);
        let hex = parse_body(r#"{"dim": 2, "kind": "regular-polygon", "parameters": {"n": 6}}"#).unwrap();
        assert_eq!(hex.as_polytope().unwrap().flag_count(), 12);
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(parse_body(r#"{"dim": 2, "kind": "blob"}"#).is_err());
        assert!(parse_body(r#"{"dim": 3, "kind": "ball", "parameters": {"center": [0, 0]}}"#).is_err());
        assert!(parse_body("0 0\n1 0\n2 0\n").is_err());
        assert!(parse_body("0 0\n1\n").is_err());
        let bad_cert = r#"{"dim": 2, "kind": "ball", "certificate": {"center": [0, 0], "inner": 2, "outer": 3}}"#;
        assert!(matches!(parse_body(bad_cert), Err(Error::InvalidCertificate(_))));
    }

    #[test]
    fn vertex_list_round_trip() {
        let pts = vec![
            Vector::from_vec(vec![0.1, 1.0 / 3.0]),
            Vector::from_vec(vec![2.0, -0.7]),
            Vector::from_vec(vec![1.0 / 7.0, 5.0]),
        ];
        let text = write_vertex_list(&pts);
        assert_eq!(parse_vertex_list(&text).unwrap(), pts);
        let body = parse_body(&format!("# triangle\n{text}")).unwrap();
        assert_eq!(body.as_polytope().unwrap().vertices().len(), 3);
    }

    #[test]
    fn specs_round_trip() {
        let specs = [
            r#"{"dim": 2, "kind": "ellipse", "parameters": {"center": [0.5, 0], "axes": [2, 1]}}"#,
            r#"{"dim": 3, "kind": "pnorm", "parameters": {"exponent": 3.5}}"#,
            r#"{"dim": 2, "kind": "affine", "parameters": {"inner": {"dim": 2, "kind": "ball"}, "matrix": [[2, 1], [0, 1]], "shift": [1, 1]}}"#,
            r#"{"dim": 3, "kind": "cube", "parameters": {"half_width": 0.5}}"#,
        ];
        for s in specs {
            let body = parse_body(s).unwrap();
            let text = BodySpec::from_body(&body).unwrap().to_json();
            let again = parse_body(&text).unwrap();
            let net = crate::sphere::DirectionNet::new(body.dim(), 64);
            for u in &net.dirs {
                assert!((body.support(u) - again.support(u)).abs() < 1e-12);
            }
            if let (Some(a), Some(b)) = (body.as_polytope(), again.as_polytope()) {
                for (x, y) in a.vertices().iter().zip(b.vertices()) {
                    assert!((x - y).norm() < 1e-12);
                }
            }
        }
    }
}
