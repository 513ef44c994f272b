//! Convex hull construction: facet half-spaces and point/facet incidences.
//!
//! Dimension 1 and 2 use direct sorting (monotone chain in the plane), dimension 3 an
//! incremental beneath-beyond hull whose coplanar triangles are merged afterwards, and
//! dimension 4 a brute-force search for supporting hyperplanes through vertex subsets.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::linalg::{affine_rank, hyperplane_through, Vector};

/// Relative tolerance for deduplication and coplanarity.
pub const HULL_TOL: f64 = 1e-9;

/// A supporting half-space `<normal, x> <= offset` together with the input points on it.
#[derive(Debug, Clone)]
pub struct HullFacet {
    pub normal: Vector,
    pub offset: f64,
    pub points: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct Hull {
    /// Deduplicated input points.
    pub points: Vec<Vector>,
    pub facets: Vec<HullFacet>,
    pub tol: f64,
}

/// Removes points closer than `tol` to an earlier point; keeps first occurrences in order.
pub fn dedup_points(points: &[Vector], tol: f64) -> Vec<Vector> {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| points[a][0].partial_cmp(&points[b][0]).unwrap());
    let mut dropped = vec![false; points.len()];
    for (k, &i) in order.iter().enumerate() {
        if dropped[i] {
            continue;
        }
        for &j in &order[k + 1..] {
            if points[j][0] - points[i][0] > tol {
                break;
            }
            if !dropped[j] && (&points[j] - &points[i]).norm() <= tol {
                // keep the earlier one in input order
                if j > i {
                    dropped[j] = true;
                } else {
                    dropped[i] = true;
                    break;
                }
            }
        }
    }
    points.iter().zip(dropped).filter(|(_, d)| !d).map(|(p, _)| p.clone()).collect()
}

fn spread(points: &[Vector]) -> (Vector, f64) {
    let d = points[0].len();
    let mut c = Vector::zeros(d);
    for p in points {
        c += p;
    }
    c /= points.len() as f64;
    let r = points.iter().map(|p| (p - &c).norm()).fold(0.0, f64::max);
    (c, r)
}

pub fn convex_hull(input: &[Vector], dim: usize) -> Result<Hull> {
    if input.is_empty() {
        return Err(Error::DegenerateInput { span: 0, dim });
    }
    if let Some(p) = input.iter().find(|p| p.len() != dim) {
        return Err(Error::DimensionMismatch { expected: dim, got: p.len() });
    }
    if !(1..=4).contains(&dim) {
        return Err(Error::UnsupportedDimension(dim));
    }
    let (_, radius) = spread(input);
    let tol = HULL_TOL * radius.max(1e-300);
    let points = dedup_points(input, tol.max(HULL_TOL * 1e-3));
    let refs: Vec<&Vector> = points.iter().collect();
    let span = affine_rank(&refs, HULL_TOL);
    if span < dim {
        return Err(Error::DegenerateInput { span, dim });
    }
    let facets = match dim {
        1 => hull_1d(&points),
        2 => hull_2d(&points, tol),
        3 => match hull_3d(&points, tol) {
            Some(f) => f,
            None => brute_force(&points, dim, tol),
        },
        _ => brute_force(&points, dim, tol),
    };
    let mut hull = Hull { points, facets, tol };
    attach_incidences(&mut hull);
    Ok(hull)
}

fn attach_incidences(hull: &mut Hull) {
    for f in &mut hull.facets {
        f.points = hull
            .points
            .iter()
            .enumerate()
            .filter(|(_, p)| (f.normal.dot(p) - f.offset).abs() <= hull.tol)
            .map(|(i, _)| i)
            .collect();
    }
}

fn hull_1d(points: &[Vector]) -> Vec<HullFacet> {
    let lo = points.iter().map(|p| p[0]).fold(f64::INFINITY, f64::min);
    let hi = points.iter().map(|p| p[0]).fold(f64::NEG_INFINITY, f64::max);
    vec![
        HullFacet { normal: Vector::from_element(1, 1.0), offset: hi, points: vec![] },
        HullFacet { normal: Vector::from_element(1, -1.0), offset: -lo, points: vec![] },
    ]
}

fn cross2(o: &Vector, a: &Vector, b: &Vector) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Indices of the hull vertices in counterclockwise order (Andrew's monotone chain).
/// Collinear points are dropped using a normalized cross-product test.
pub fn monotone_chain(points: &[Vector]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..points.len()).collect();
    idx.sort_by(|&a, &b| (points[a][0], points[a][1]).partial_cmp(&(points[b][0], points[b][1])).unwrap());
    if idx.len() < 3 {
        return idx;
    }
    let turns_left = |o: usize, a: usize, b: usize| {
        let c = cross2(&points[o], &points[a], &points[b]);
        let la = (&points[a] - &points[o]).norm();
        let lb = (&points[b] - &points[o]).norm();
        c > HULL_TOL * la * lb
    };
    let mut lower: Vec<usize> = Vec::new();
    for &i in &idx {
        while lower.len() >= 2 && !turns_left(lower[lower.len() - 2], lower[lower.len() - 1], i) {
            lower.pop();
        }
        lower.push(i);
    }
    let mut upper: Vec<usize> = Vec::new();
    for &i in idx.iter().rev() {
        while upper.len() >= 2 && !turns_left(upper[upper.len() - 2], upper[upper.len() - 1], i) {
            upper.pop();
        }
        upper.push(i);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

fn hull_2d(points: &[Vector], _tol: f64) -> Vec<HullFacet> {
    let ring = monotone_chain(points);
    let m = ring.len();
    (0..m)
        .map(|k| {
            let a = &points[ring[k]];
            let b = &points[ring[(k + 1) % m]];
            let e = b - a;
            let normal = Vector::from_vec(vec![e[1], -e[0]]).normalize();
            let offset = normal.dot(a);
            HullFacet { normal, offset, points: vec![] }
        })
        .collect()
}

struct Tri {
    v: [usize; 3],
    normal: Vector,
    offset: f64,
    alive: bool,
}

fn make_tri(points: &[Vector], v: [usize; 3]) -> Option<Tri> {
    let a = &points[v[0]];
    let e1 = &points[v[1]] - a;
    let e2 = &points[v[2]] - a;
    let n = e1.cross(&e2);
    let len = n.norm();
    if len <= 1e-14 * e1.norm() * e2.norm() {
        return None;
    }
    let normal = n / len;
    let offset = normal.dot(a);
    Some(Tri { v, normal, offset, alive: true })
}

/// Incremental 3D hull. Returns `None` when a degenerate configuration is met, so that
/// the caller can fall back to the brute-force enumeration.
fn hull_3d(points: &[Vector], tol: f64) -> Option<Vec<HullFacet>> {
    let n = points.len();
    // initial tetrahedron from extreme points
    let i0 = (0..n).min_by(|&a, &b| points[a][0].partial_cmp(&points[b][0]).unwrap())?;
    let i1 = (0..n)
        .max_by(|&a, &b| (&points[a] - &points[i0]).norm().partial_cmp(&(&points[b] - &points[i0]).norm()).unwrap())?;
    let line = (&points[i1] - &points[i0]).normalize();
    let dist_line = |p: &Vector| {
        let w = p - &points[i0];
        (&w - &line * w.dot(&line)).norm()
    };
    let i2 = (0..n).max_by(|&a, &b| dist_line(&points[a]).partial_cmp(&dist_line(&points[b])).unwrap())?;
    let plane_n = (&points[i1] - &points[i0]).cross(&(&points[i2] - &points[i0])).normalize();
    let dist_plane = |p: &Vector| (p - &points[i0]).dot(&plane_n).abs();
    let i3 = (0..n).max_by(|&a, &b| dist_plane(&points[a]).partial_cmp(&dist_plane(&points[b])).unwrap())?;
    if dist_plane(&points[i3]) <= tol {
        return None;
    }
    let inner = (&points[i0] + &points[i1] + &points[i2] + &points[i3]) / 4.0;

    let mut tris: Vec<Tri> = Vec::new();
    let mut edges: HashMap<(usize, usize), usize> = HashMap::new();
    let push = |tris: &mut Vec<Tri>, edges: &mut HashMap<(usize, usize), usize>, mut v: [usize; 3]| -> Option<()> {
        let mut t = make_tri(points, v)?;
        if t.normal.dot(&inner) > t.offset {
            v.swap(1, 2);
            t = make_tri(points, v)?;
        }
        let id = tris.len();
        for k in 0..3 {
            edges.insert((t.v[k], t.v[(k + 1) % 3]), id);
        }
        tris.push(t);
        Some(())
    };
    for v in [[i0, i1, i2], [i0, i1, i3], [i0, i2, i3], [i1, i2, i3]] {
        push(&mut tris, &mut edges, v)?;
    }

    let mut order: Vec<usize> = (0..n).filter(|&i| ![i0, i1, i2, i3].contains(&i)).collect();
    order.sort_by(|&a, &b| (&points[b] - &inner).norm().partial_cmp(&(&points[a] - &inner).norm()).unwrap());
    for p in order {
        let pt = &points[p];
        let visible: Vec<usize> = tris
            .iter()
            .enumerate()
            .filter(|(_, t)| t.alive && t.normal.dot(pt) - t.offset > tol)
            .map(|(i, _)| i)
            .collect();
        if visible.is_empty() {
            continue;
        }
        let mut horizon: Vec<(usize, usize)> = Vec::new();
        for &f in &visible {
            let v = tris[f].v;
            for k in 0..3 {
                let (a, b) = (v[k], v[(k + 1) % 3]);
                let nb = *edges.get(&(b, a))?;
                let nb_visible = tris[nb].normal.dot(pt) - tris[nb].offset > tol;
                if !nb_visible {
                    horizon.push((a, b));
                }
            }
        }
        for &f in &visible {
            tris[f].alive = false;
            let v = tris[f].v;
            for k in 0..3 {
                edges.remove(&(v[k], v[(k + 1) % 3]));
            }
        }
        for (a, b) in horizon {
            let t = make_tri(points, [a, b, p])?;
            let id = tris.len();
            for k in 0..3 {
                edges.insert((t.v[k], t.v[(k + 1) % 3]), id);
            }
            tris.push(t);
        }
    }

    // merge coplanar neighbours into polygonal facets
    let alive: Vec<usize> = (0..tris.len()).filter(|&i| tris[i].alive).collect();
    let mut parent: HashMap<usize, usize> = alive.iter().map(|&i| (i, i)).collect();
    fn find(parent: &mut HashMap<usize, usize>, i: usize) -> usize {
        let p = parent[&i];
        if p == i {
            return i;
        }
        let r = find(parent, p);
        parent.insert(i, r);
        r
    }
    for &i in &alive {
        let v = tris[i].v;
        for k in 0..3 {
            let (a, b) = (v[k], v[(k + 1) % 3]);
            let j = *edges.get(&(b, a))?;
            if !tris[j].alive {
                return None;
            }
            let apex = tris[j].v.iter().copied().find(|&x| x != a && x != b)?;
            if (tris[i].normal.dot(&points[apex]) - tris[i].offset).abs() <= tol
                && tris[i].normal.dot(&tris[j].normal) > 0.0
            {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent.insert(ri, rj);
                }
            }
        }
    }
    let mut groups: HashMap<usize, Vec<usize>> = HashMap::new();
    for &i in &alive {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push(i);
    }
    let mut keys: Vec<usize> = groups.keys().copied().collect();
    keys.sort_unstable();
    let mut facets = Vec::with_capacity(keys.len());
    for k in keys {
        let members = &groups[&k];
        let mut normal = Vector::zeros(3);
        for &t in members {
            let v = tris[t].v;
            let area = (&points[v[1]] - &points[v[0]]).cross(&(&points[v[2]] - &points[v[0]]));
            normal += area;
        }
        let normal = normal.normalize();
        let offset =
            members.iter().flat_map(|&t| tris[t].v).map(|i| normal.dot(&points[i])).fold(f64::NEG_INFINITY, f64::max);
        facets.push(HullFacet { normal, offset, points: vec![] });
    }
    // every point must lie inside every facet
    for f in &facets {
        if points.iter().any(|p| f.normal.dot(p) - f.offset > 10.0 * tol) {
            return None;
        }
    }
    Some(facets)
}

/// Supporting hyperplanes through every affinely independent `d`-subset.
fn brute_force(points: &[Vector], dim: usize, tol: f64) -> Vec<HullFacet> {
    let n = points.len();
    let mut seen: HashMap<Vec<usize>, ()> = HashMap::new();
    let mut facets = Vec::new();
    let mut combo: Vec<usize> = (0..dim).collect();
    loop {
        let refs: Vec<&Vector> = combo.iter().map(|&i| &points[i]).collect();
        if let Some((mut normal, mut offset)) = hyperplane_through(&refs) {
            let mut above = false;
            let mut below = false;
            for p in points {
                let s = normal.dot(p) - offset;
                if s > tol {
                    above = true;
                } else if s < -tol {
                    below = true;
                }
                if above && below {
                    break;
                }
            }
            if !(above && below) {
                if above {
                    normal = -normal;
                    offset = -offset;
                }
                let on: Vec<usize> = (0..n).filter(|&i| (normal.dot(&points[i]) - offset).abs() <= tol).collect();
                let on_refs: Vec<&Vector> = on.iter().map(|&i| &points[i]).collect();
                if affine_rank(&on_refs, HULL_TOL) == dim - 1 && seen.insert(on.clone(), ()).is_none() {
                    facets.push(HullFacet { normal, offset, points: on });
                }
            }
        }
        // next combination
        let mut k = dim;
        loop {
            if k == 0 {
                return facets;
            }
            k -= 1;
            if combo[k] < n - dim + k {
                combo[k] += 1;
                for j in k + 1..dim {
                    combo[j] = combo[j - 1] + 1;
                }
                break;
            }
        }
    }
}
