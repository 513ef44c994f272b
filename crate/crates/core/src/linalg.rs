//! Small dense linear-algebra helpers on top of `nalgebra`.

use nalgebra::{DMatrix, DVector};

pub type Vector = DVector<f64>;
pub type Matrix = DMatrix<f64>;

/// Volume of the Euclidean unit ball in `R^d`.
pub fn unit_ball_volume(d: usize) -> f64 {
    match d {
        0 => 1.0,
        1 => 2.0,
        _ => unit_ball_volume(d - 2) * 2.0 * std::f64::consts::PI / d as f64,
    }
}

pub fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Affine dimension of a point set, with a tolerance relative to the spread of the set.
pub fn affine_rank(points: &[&Vector], tol: f64) -> usize {
    if points.len() <= 1 {
        return 0;
    }
    let origin = points[0];
    let scale = points.iter().map(|p| (*p - origin).norm()).fold(0.0_f64, f64::max).max(1.0);
    let mut basis: Vec<Vector> = Vec::new();
    for p in &points[1..] {
        let mut v = *p - origin;
        for b in &basis {
            let c = v.dot(b);
            v -= b * c;
        }
        // second pass for stability
        for b in &basis {
            let c = v.dot(b);
            v -= b * c;
        }
        let n = v.norm();
        if n > tol * scale {
            basis.push(v / n);
        }
    }
    basis.len()
}

/// Unit normal and offset of the hyperplane through `d` affinely independent points of `R^d`,
/// via the generalized cross product of the edge vectors.
pub fn hyperplane_through(points: &[&Vector]) -> Option<(Vector, f64)> {
    let d = points[0].len();
    if points.len() != d {
        return None;
    }
    if d == 1 {
        return Some((Vector::from_element(1, 1.0), points[0][0]));
    }
    let rows = d - 1;
    let mut m = Matrix::zeros(rows, d);
    for (r, p) in points[1..].iter().enumerate() {
        let diff = *p - points[0];
        m.set_row(r, &diff.transpose());
    }
    let mut normal = Vector::zeros(d);
    for col in 0..d {
        let minor = m.clone().remove_column(col);
        let sign = if col % 2 == 0 { 1.0 } else { -1.0 };
        normal[col] = sign * minor.determinant();
    }
    let n = normal.norm();
    let scale = (0..rows).map(|r| m.row(r).norm()).product::<f64>().max(f64::MIN_POSITIVE);
    if n <= 1e-12 * scale {
        return None;
    }
    normal /= n;
    let offset = normal.dot(points[0]);
    Some((normal, offset))
}

/// Lebesgue volume of the simplex spanned by `d + 1` points in `R^d`.
pub fn simplex_volume(points: &[Vector]) -> f64 {
    let d = points[0].len();
    debug_assert_eq!(points.len(), d + 1);
    let mut m = Matrix::zeros(d, d);
    for (c, p) in points[1..].iter().enumerate() {
        m.set_column(c, &(p - &points[0]));
    }
    m.determinant().abs() / factorial(d)
}

/// Orthonormal basis of the orthogonal complement of `u` (assumed nonzero).
pub fn complement_basis(u: &Vector) -> Vec<Vector> {
    let d = u.len();
    let un = u / u.norm();
    let mut basis: Vec<Vector> = vec![un];
    for k in 0..d {
        let mut v = Vector::zeros(d);
        v[k] = 1.0;
        for b in &basis {
            let c = v.dot(b);
            v -= b * c;
        }
        let n = v.norm();
        if n > 1e-8 {
            basis.push(v / n);
        }
        if basis.len() == d {
            break;
        }
    }
    basis.remove(0);
    basis
}

/// Symmetric inverse square root of a symmetric positive definite matrix.
pub fn sym_inv_sqrt(m: &Matrix) -> Option<Matrix> {
    let eig = m.clone().symmetric_eigen();
    if eig.eigenvalues.iter().any(|&l| !(l > 0.0) || !l.is_finite()) {
        return None;
    }
    let d = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| 1.0 / l.sqrt()));
    Some(&eig.eigenvectors * d * eig.eigenvectors.transpose())
}

/// Ratio of the largest to the smallest eigenvalue of a symmetric matrix.
pub fn sym_condition(m: &Matrix) -> f64 {
    let eig = m.clone().symmetric_eigen();
    let max = eig.eigenvalues.max();
    let min = eig.eigenvalues.min();
    if min <= 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

pub fn extreme_singular_values(m: &Matrix) -> (f64, f64) {
    let sv = m.clone().singular_values();
    (sv.min(), sv.max())
}
