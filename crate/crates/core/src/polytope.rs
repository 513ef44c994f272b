//! Polytopes with their full face lattice, maximal flags and flag decompositions.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::hull::{convex_hull, Hull, HULL_TOL};
use crate::linalg::{affine_rank, factorial, simplex_volume, Matrix, Vector};

pub type FaceId = usize;

/// Closed half-space `<normal, x> <= offset` with a unit normal.
#[derive(Debug, Clone, PartialEq)]
pub struct Halfspace {
    pub normal: Vector,
    pub offset: f64,
}

impl Halfspace {
    pub fn slack(&self, x: &Vector) -> f64 {
        self.offset - self.normal.dot(x)
    }
}

#[derive(Debug, Clone)]
pub struct Face {
    pub rank: usize,
    /// Sorted vertex indices.
    pub vertices: Vec<usize>,
    /// Indices of the facets containing this face.
    pub facets: Vec<usize>,
    /// Faces of rank `rank - 1` on the relative boundary.
    pub subfaces: Vec<FaceId>,
    /// Faces of rank `rank + 1` containing this face.
    pub superfaces: Vec<FaceId>,
}

/// Graded poset of nonempty faces, ranks `0..=d`. IDs are assigned by rank, then discovery
/// order; rank 0 follows the vertex list and rank `d - 1` the facet list.
#[derive(Debug, Clone)]
pub struct FaceLattice {
    faces: Vec<Face>,
    rank_start: Vec<usize>,
}

impl FaceLattice {
    pub fn faces(&self) -> &[Face] {
        &self.faces
    }

    pub fn face(&self, id: FaceId) -> &Face {
        &self.faces[id]
    }

    pub fn rank_ids(&self, rank: usize) -> std::ops::Range<FaceId> {
        self.rank_start[rank]..self.rank_start[rank + 1]
    }

    pub fn count(&self, rank: usize) -> usize {
        self.rank_ids(rank).len()
    }

    pub fn top(&self) -> FaceId {
        self.faces.len() - 1
    }
}

/// A maximal chain `f_0 < ... < f_d`, stored as face IDs.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Flag(pub Vec<FaceId>);

/// Simplex with one vertex in the relative interior of each face of a flag.
#[derive(Debug, Clone)]
pub struct FlagSimplex {
    pub flag: Flag,
    pub vertices: Vec<Vector>,
}

impl FlagSimplex {
    pub fn volume(&self) -> f64 {
        simplex_volume(&self.vertices)
    }

    /// Barycentric coordinates of `x`.
    pub fn barycentric(&self, x: &Vector) -> Vector {
        let d = x.len();
        let mut m = Matrix::zeros(d, d);
        for (c, v) in self.vertices[1..].iter().enumerate() {
            m.set_column(c, &(v - &self.vertices[0]));
        }
        let rest = m.lu().solve(&(x - &self.vertices[0])).unwrap_or_else(|| Vector::from_element(d, f64::NAN));
        let mut out = Vector::zeros(d + 1);
        out[0] = 1.0 - rest.sum();
        for i in 0..d {
            out[i + 1] = rest[i];
        }
        out
    }

    pub fn contains(&self, x: &Vector, tol: f64) -> bool {
        self.barycentric(x).iter().all(|&l| l >= -tol)
    }
}

#[derive(Debug, Clone)]
pub struct Polytope {
    dim: usize,
    vertices: Vec<Vector>,
    facets: Vec<Halfspace>,
    lattice: FaceLattice,
    base_point: Vector,
}

impl Polytope {
    /// Convex hull of a point cloud with its full face lattice.
    pub fn from_points(points: &[Vector], dim: usize) -> Result<Self> {
        let hull = convex_hull(points, dim)?;
        Self::from_hull(hull)
    }

    fn from_hull(hull: Hull) -> Result<Self> {
        let d = hull.points[0].len();
        let n = hull.points.len();
        let mut incident: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (f, facet) in hull.facets.iter().enumerate() {
            for &p in &facet.points {
                incident[p].push(f);
            }
        }
        // a point is a vertex iff the normals of its facets span R^d
        let is_vertex: Vec<bool> = (0..n)
            .map(|p| {
                if incident[p].len() < d {
                    return false;
                }
                let mut m = Matrix::zeros(incident[p].len(), d);
                for (r, &f) in incident[p].iter().enumerate() {
                    m.set_row(r, &hull.facets[f].normal.transpose());
                }
                m.rank(1e-7) == d
            })
            .collect();
        let mut new_index = vec![usize::MAX; n];
        let mut vertices = Vec::new();
        for p in 0..n {
            if is_vertex[p] {
                new_index[p] = vertices.len();
                vertices.push(hull.points[p].clone());
            }
        }
        // 2D: keep the counterclockwise order of the boundary
        if d == 2 {
            let ring = crate::hull::monotone_chain(&vertices);
            let reordered: Vec<Vector> = ring.iter().map(|&i| vertices[i].clone()).collect();
            let mut remap = vec![usize::MAX; vertices.len()];
            for (new, &old) in ring.iter().enumerate() {
                remap[old] = new;
            }
            for x in new_index.iter_mut() {
                if *x != usize::MAX {
                    *x = remap[*x];
                }
            }
            vertices = reordered;
        }
        let mut facets = Vec::new();
        let mut facet_vertices = Vec::new();
        for facet in &hull.facets {
            let mut vs: Vec<usize> = facet.points.iter().filter(|&&p| is_vertex[p]).map(|&p| new_index[p]).collect();
            vs.sort_unstable();
            let refs: Vec<&Vector> = vs.iter().map(|&i| &vertices[i]).collect();
            if vs.len() < d || affine_rank(&refs, HULL_TOL) != d - 1 {
                return Err(Error::DegenerateInput { span: affine_rank(&refs, HULL_TOL), dim: d });
            }
            facets.push(Halfspace { normal: facet.normal.clone(), offset: facet.offset });
            facet_vertices.push(vs);
        }
        if d == 2 {
            // order facets so that facet k is the edge (v_k, v_{k+1})
            let m = vertices.len();
            let mut order: Vec<usize> = (0..facets.len()).collect();
            order.sort_by_key(|&f| {
                let vs = &facet_vertices[f];
                let (a, b) = (vs[0], vs[1]);
                if (a + 1) % m == b {
                    a
                } else {
                    b
                }
            });
            facets = order.iter().map(|&f| facets[f].clone()).collect();
            facet_vertices = order.iter().map(|&f| facet_vertices[f].clone()).collect();
        }
        let base_point = vertices.iter().fold(Vector::zeros(d), |acc, v| acc + v) / vertices.len() as f64;
        let lattice = build_lattice(d, &vertices, &facet_vertices);
        Ok(Polytope { dim: d, vertices, facets, lattice, base_point })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertices(&self) -> &[Vector] {
        &self.vertices
    }

    pub fn facets(&self) -> &[Halfspace] {
        &self.facets
    }

    pub fn lattice(&self) -> &FaceLattice {
        &self.lattice
    }

    /// Interior base point (vertex average).
    pub fn base_point(&self) -> &Vector {
        &self.base_point
    }

    pub fn facet_face(&self, facet: usize) -> FaceId {
        self.lattice.rank_ids(self.dim - 1).start + facet
    }

    pub fn vertex_face(&self, vertex: usize) -> FaceId {
        vertex
    }

    /// Minimum facet slack; positive strictly inside.
    pub fn margin(&self, x: &Vector) -> f64 {
        self.facets.iter().map(|h| h.slack(x)).fold(f64::INFINITY, f64::min)
    }

    pub fn slacks(&self, x: &Vector) -> Vec<f64> {
        self.facets.iter().map(|h| h.slack(x)).collect()
    }

    pub fn contains(&self, x: &Vector, tol: f64) -> bool {
        self.margin(x) >= -tol
    }

    /// Vertex average of a face.
    pub fn barycenter(&self, face: FaceId) -> Vector {
        let f = self.lattice.face(face);
        f.vertices.iter().fold(Vector::zeros(self.dim), |acc, &v| acc + &self.vertices[v]) / f.vertices.len() as f64
    }

    /// Number of maximal flags, by the facet recursion `|Flags(G)| = sum over facets F of G of |Flags(F)|`
    /// applied to every face, memoized.
    pub fn flag_count(&self) -> u64 {
        let mut memo: Vec<u64> = vec![0; self.lattice.faces.len()];
        for id in 0..self.lattice.faces.len() {
            let f = &self.lattice.faces[id];
            memo[id] = if f.rank == 0 { 1 } else { f.subfaces.iter().map(|&s| memo[s]).sum() };
        }
        memo[self.lattice.top()]
    }

    /// Flags of a single face viewed as a polytope of its own dimension.
    pub fn face_flag_count(&self, face: FaceId) -> u64 {
        fn count(l: &FaceLattice, id: FaceId, memo: &mut HashMap<FaceId, u64>) -> u64 {
            if let Some(&c) = memo.get(&id) {
                return c;
            }
            let f = l.face(id);
            let c = if f.rank == 0 { 1 } else { f.subfaces.iter().map(|&s| count(l, s, memo)).sum() };
            memo.insert(id, c);
            c
        }
        count(&self.lattice, face, &mut HashMap::new())
    }

    /// All maximal flags in lexicographic order of `(f_0, ..., f_d)`.
    pub fn enumerate_flags(&self) -> Vec<Flag> {
        let mut out = Vec::new();
        let mut chain = vec![self.lattice.top()];
        self.descend(&mut chain, &mut out);
        for f in out.iter_mut() {
            f.0.reverse();
        }
        out.sort();
        out
    }

    fn descend(&self, chain: &mut Vec<FaceId>, out: &mut Vec<Flag>) {
        let last = *chain.last().unwrap();
        let face = self.lattice.face(last);
        if face.rank == 0 {
            out.push(Flag(chain.clone()));
            return;
        }
        for &s in &face.subfaces {
            chain.push(s);
            self.descend(chain, out);
            chain.pop();
        }
    }

    /// Checks that `x` lies in the relative interior of `face`.
    pub fn in_relative_interior(&self, face: FaceId, x: &Vector, tol: f64) -> bool {
        let f = self.lattice.face(face);
        self.facets.iter().enumerate().all(|(i, h)| {
            let s = h.slack(x);
            if f.facets.contains(&i) {
                s.abs() <= tol
            } else {
                s > tol
            }
        })
    }

    /// One simplex per maximal flag, vertex `i` chosen by `picker` in face `f_i`.
    pub fn flag_decomposition<F>(&self, picker: F) -> Result<Vec<FlagSimplex>>
    where
        F: Fn(&Polytope, FaceId) -> Vector,
    {
        let mut points: HashMap<FaceId, Vector> = HashMap::new();
        let scale = self.vertices.iter().map(|v| v.norm()).fold(1.0, f64::max);
        for id in 0..self.lattice.faces.len() {
            let p = picker(self, id);
            if !self.in_relative_interior(id, &p, 1e-9 * scale) {
                return Err(Error::PickerPointNotInFace { face: id });
            }
            points.insert(id, p);
        }
        Ok(self
            .enumerate_flags()
            .into_iter()
            .map(|flag| {
                let vertices = flag.0.iter().map(|id| points[id].clone()).collect();
                FlagSimplex { flag, vertices }
            })
            .collect())
    }

    pub fn barycentric_decomposition(&self) -> Vec<FlagSimplex> {
        self.flag_decomposition(|p, id| p.barycenter(id))
            .expect("barycenters lie in the relative interior of their faces")
    }

    /// Lebesgue volume (fan of simplices from the base point over a triangulated boundary).
    pub fn volume(&self) -> f64 {
        self.simplices_from(&self.base_point).iter().map(|s| simplex_volume(s)).sum()
    }

    /// Centroid under Lebesgue measure (volume-weighted simplex centroids).
    pub fn centroid(&self) -> Vector {
        let mut total = 0.0;
        let mut acc = Vector::zeros(self.dim);
        for s in self.simplices_from(&self.base_point) {
            let v = simplex_volume(&s);
            let c = s.iter().fold(Vector::zeros(self.dim), |a, p| a + p) / s.len() as f64;
            acc += c * v;
            total += v;
        }
        acc / total
    }

    /// Triangulation of the polytope by cones from `apex` over barycentric subdivisions of the facets.
    fn simplices_from(&self, apex: &Vector) -> Vec<Vec<Vector>> {
        let d = self.dim;
        let mut out = Vec::new();
        let top = self.lattice.top();
        // walk chains below each facet
        let mut chain = vec![top];
        fn walk(p: &Polytope, chain: &mut Vec<FaceId>, apex: &Vector, out: &mut Vec<Vec<Vector>>) {
            let last = *chain.last().unwrap();
            let f = p.lattice.face(last);
            if f.rank == 0 {
                let mut s: Vec<Vector> = chain[1..].iter().rev().map(|&id| p.barycenter(id)).collect();
                s.push(apex.clone());
                out.push(s);
                return;
            }
            for &sub in &f.subfaces {
                chain.push(sub);
                walk(p, chain, apex, out);
                chain.pop();
            }
        }
        walk(self, &mut chain, apex, &mut out);
        debug_assert!(out.iter().all(|s| s.len() == d + 1));
        out
    }

    /// Image under `x -> a x + b` (invertible `a`).
    pub fn affine_image(&self, a: &Matrix, b: &Vector) -> Result<Polytope> {
        let pts: Vec<Vector> = self.vertices.iter().map(|v| a * v + b).collect();
        Polytope::from_points(&pts, self.dim)
    }

    /// Dilation `y + factor (P - y)`.
    pub fn scaled_about(&self, y: &Vector, factor: f64) -> Result<Polytope> {
        let pts: Vec<Vector> = self.vertices.iter().map(|v| y + (v - y) * factor).collect();
        Polytope::from_points(&pts, self.dim)
    }

    /// Plain-text face-lattice dump: one line `rank id v1 v2 ...` per face.
    pub fn lattice_dump(&self) -> String {
        let mut s = String::new();
        for (id, f) in self.lattice.faces.iter().enumerate() {
            let _ = write!(s, "{} {}", f.rank, id);
            for v in &f.vertices {
                let _ = write!(s, " {v}");
            }
            s.push('\n');
        }
        s
    }

    /// Euler characteristic `sum_i (-1)^i f_i` over ranks `0..=d` (equals 1 for a convex polytope).
    pub fn euler_characteristic(&self) -> i64 {
        (0..=self.dim)
            .map(|r| {
                let c = self.lattice.count(r) as i64;
                if r % 2 == 0 {
                    c
                } else {
                    -c
                }
            })
            .sum()
    }

    /// Regular `d`-simplex centred at the origin with circumradius 1.
    pub fn regular_simplex(d: usize) -> Polytope {
        // vertices e_i - centroid in R^{d+1}, then expressed in an orthonormal basis of the hyperplane
        let n = d + 1;
        let c = 1.0 / n as f64;
        let lifted: Vec<Vector> =
            (0..n).map(|i| Vector::from_fn(n, |k, _| if k == i { 1.0 - c } else { -c })).collect();
        let normal = Vector::from_element(n, 1.0 / (n as f64).sqrt());
        let basis = crate::linalg::complement_basis(&normal);
        let pts: Vec<Vector> = lifted.iter().map(|p| Vector::from_fn(d, |k, _| basis[k].dot(p))).collect();
        let r = pts[0].norm();
        let pts: Vec<Vector> = pts.into_iter().map(|p| p / r).collect();
        Polytope::from_points(&pts, d).expect("simplex vertices are affinely independent")
    }

    /// Regular `n`-gon with circumradius `r`, first vertex at angle `phase`.
    pub fn regular_polygon(n: usize, r: f64, phase: f64) -> Polytope {
        let pts: Vec<Vector> = (0..n)
            .map(|k| {
                let t = phase + 2.0 * std::f64::consts::PI * k as f64 / n as f64;
                Vector::from_vec(vec![r * t.cos(), r * t.sin()])
            })
            .collect();
        Polytope::from_points(&pts, 2).expect("regular polygon")
    }

    /// Axis-aligned cube `[-h, h]^d`.
    pub fn cube(d: usize, h: f64) -> Polytope {
        let pts: Vec<Vector> =
            (0..(1usize << d)).map(|m| Vector::from_fn(d, |k, _| if (m >> k) & 1 == 1 { h } else { -h })).collect();
        Polytope::from_points(&pts, d).expect("cube")
    }
}

fn build_lattice(d: usize, vertices: &[Vector], facet_vertices: &[Vec<usize>]) -> FaceLattice {
    let nv = vertices.len();
    let mut vertex_facets: Vec<Vec<usize>> = vec![Vec::new(); nv];
    for (f, vs) in facet_vertices.iter().enumerate() {
        for &v in vs {
            vertex_facets[v].push(f);
        }
    }
    // ranks[r] holds vertex sets of r-faces, discovered top-down
    let mut ranks: Vec<Vec<Vec<usize>>> = vec![Vec::new(); d + 1];
    ranks[d] = vec![(0..nv).collect()];
    if d >= 1 {
        ranks[d - 1] = facet_vertices.to_vec();
    }
    let mut children: Vec<Vec<Vec<usize>>> = vec![Vec::new(); d + 1];
    children[d] = vec![(0..facet_vertices.len()).collect()];
    for r in (1..d).rev() {
        let mut index: HashMap<Vec<usize>, usize> = HashMap::new();
        let mut found: Vec<Vec<usize>> = Vec::new();
        let mut kids_of: Vec<Vec<usize>> = Vec::new();
        for g in &ranks[r] {
            let mut candidates: Vec<usize> = g.iter().flat_map(|&v| vertex_facets[v].iter().copied()).collect();
            candidates.sort_unstable();
            candidates.dedup();
            let mut kids = Vec::new();
            for f in candidates {
                let fv = &facet_vertices[f];
                if g.iter().all(|v| fv.binary_search(v).is_ok()) {
                    continue;
                }
                let s: Vec<usize> = g.iter().copied().filter(|v| fv.binary_search(v).is_ok()).collect();
                if s.len() < r {
                    continue;
                }
                let refs: Vec<&Vector> = s.iter().map(|&i| &vertices[i]).collect();
                if affine_rank(&refs, HULL_TOL) != r - 1 {
                    continue;
                }
                let id = if r - 1 == 0 {
                    s[0]
                } else {
                    *index.entry(s.clone()).or_insert_with(|| {
                        found.push(s.clone());
                        found.len() - 1
                    })
                };
                if !kids.contains(&id) {
                    kids.push(id);
                }
            }
            kids.sort_unstable();
            kids_of.push(kids);
        }
        if r - 1 == 0 {
            ranks[0] = (0..nv).map(|v| vec![v]).collect();
        } else {
            ranks[r - 1] = found;
        }
        children[r] = kids_of;
    }
    if d == 1 {
        ranks[0] = (0..nv).map(|v| vec![v]).collect();
    }
    let mut rank_start = vec![0; d + 2];
    for r in 0..=d {
        rank_start[r + 1] = rank_start[r] + ranks[r].len();
    }
    let mut faces: Vec<Face> = Vec::with_capacity(rank_start[d + 1]);
    for r in 0..=d {
        for vs in &ranks[r] {
            let facets = if r == d {
                Vec::new()
            } else {
                let mut fs: Vec<usize> = vertex_facets[vs[0]]
                    .iter()
                    .copied()
                    .filter(|&f| vs.iter().all(|v| facet_vertices[f].binary_search(v).is_ok()))
                    .collect();
                fs.sort_unstable();
                fs
            };
            faces.push(Face { rank: r, vertices: vs.clone(), facets, subfaces: Vec::new(), superfaces: Vec::new() });
        }
    }
    for r in 1..=d {
        for (local, kids) in children[r].iter().enumerate() {
            let id = rank_start[r] + local;
            let kid_ids: Vec<FaceId> = kids.iter().map(|&k| rank_start[r - 1] + k).collect();
            for &k in &kid_ids {
                faces[k].superfaces.push(id);
            }
            faces[id].subfaces = kid_ids;
        }
    }
    FaceLattice { faces, rank_start }
}

/// Number of maximal flags of a `d`-simplex, `(d + 1)!`.
pub fn simplex_flag_count(d: usize) -> u64 {
    factorial(d + 1) as u64
}
