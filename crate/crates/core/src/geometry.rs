//! Reference domain: a rectangle whose sides may be split into several tagged
//! faces, its structured quadrilateral mesh, and the 1D grid on the elastic face.

use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Boundary condition type carried by a polygon face.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FaceTag {
    /// The compliant face carrying the shell.
    Elastic,
    /// Type I: `p + rho/2 |u|^2 = P_i`, `u . tau = 0`.
    DynamicPressure,
    /// Type II: `u = 0`.
    NoSlip,
    /// Type III: `u . nu = 0` with Navier slip friction.
    RigidSlip,
    /// Type IV: `u . nu = 0`, `d_nu u_tau = 0`.
    Symmetry,
}

impl FaceTag {
    pub fn name(self) -> &'static str {
        match self {
            FaceTag::Elastic => "elastic",
            FaceTag::DynamicPressure => "dynamic_pressure",
            FaceTag::NoSlip => "no_slip",
            FaceTag::RigidSlip => "rigid_slip",
            FaceTag::Symmetry => "symmetry",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Face {
    pub vertices: (usize, usize),
    pub tag: FaceTag,
}

/// Closed, counterclockwise polygon with tagged faces. Face `k` joins vertex
/// `k` to vertex `k + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferencePolygon {
    vertices: Vec<[f64; 2]>,
    faces: Vec<Face>,
    elastic_face: usize,
    length: f64,
}

/// Local frame of the elastic face: `z` runs from `origin` along `tangent`,
/// `normal` points out of the fluid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElasticFrame {
    pub origin: [f64; 2],
    pub tangent: [f64; 2],
    pub normal: [f64; 2],
    pub length: f64,
}

impl ElasticFrame {
    /// Cartesian vector from (tangential, normal) components.
    #[inline]
    pub fn to_cartesian(&self, c: [f64; 2]) -> [f64; 2] {
        [
            c[0] * self.tangent[0] + c[1] * self.normal[0],
            c[0] * self.tangent[1] + c[1] * self.normal[1],
        ]
    }

    #[inline]
    pub fn z_of(&self, p: [f64; 2]) -> f64 {
        (p[0] - self.origin[0]) * self.tangent[0] + (p[1] - self.origin[1]) * self.tangent[1]
    }
}

fn cross(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

impl ReferencePolygon {
    /// Builds a polygon from its vertices and one tag per face. Clockwise input
    /// is reversed (faces follow their edges).
    pub fn new(vertices: Vec<[f64; 2]>, tags: Vec<FaceTag>) -> Result<Self> {
        let n = vertices.len();
        if n < 3 {
            return Err(Error::InvalidPolygon("fewer than three vertices".into()));
        }
        if tags.len() != n {
            return Err(Error::InvalidPolygon(format!(
                "{} vertices but {} face tags",
                n,
                tags.len()
            )));
        }
        if vertices.iter().any(|v| !v[0].is_finite() || !v[1].is_finite()) {
            return Err(Error::InvalidPolygon("non-finite vertex".into()));
        }
        let area2: f64 = (0..n)
            .map(|k| cross(vertices[k], vertices[(k + 1) % n]))
            .sum();
        if area2.abs() <= 0.0 {
            return Err(Error::InvalidPolygon("zero area".into()));
        }
        let (vertices, tags) = if area2 < 0.0 {
            // new face k joins old vertices n-1-k -> n-2-k, i.e. old face n-2-k
            let mut v = vertices.clone();
            v.reverse();
            let t: Vec<FaceTag> = (0..n).map(|k| tags[(2 * n - 2 - k) % n]).collect();
            (v, t)
        } else {
            (vertices, tags)
        };
        let edge = |k: usize| {
            let a = vertices[k];
            let b = vertices[(k + 1) % n];
            [b[0] - a[0], b[1] - a[1]]
        };
        let scale = vertices
            .iter()
            .flat_map(|v| v.iter())
            .fold(0.0f64, |m, x| m.max(x.abs()))
            .max(1.0);
        for k in 0..n {
            let e = edge(k);
            if (e[0] * e[0] + e[1] * e[1]).sqrt() <= 1e-14 * scale {
                return Err(Error::InvalidPolygon(format!("face {k} has zero length")));
            }
        }
        let mut turning = 0.0;
        for k in 0..n {
            let e0 = edge(k);
            let e1 = edge((k + 1) % n);
            let c = cross(e0, e1);
            let d = e0[0] * e1[0] + e0[1] * e1[1];
            let l = (e0[0].hypot(e0[1])) * (e1[0].hypot(e1[1]));
            if c < -1e-12 * l {
                return Err(Error::InvalidPolygon(format!(
                    "interior angle at vertex {} exceeds pi",
                    (k + 1) % n
                )));
            }
            if c.abs() <= 1e-12 * l && d < 0.0 {
                return Err(Error::InvalidPolygon(format!(
                    "polygon folds back at vertex {}",
                    (k + 1) % n
                )));
            }
            turning += c.atan2(d);
        }
        if (turning - 2.0 * std::f64::consts::PI).abs() > 1e-8 {
            return Err(Error::InvalidPolygon("polygon is not simple".into()));
        }
        let elastic: Vec<usize> = tags
            .iter()
            .enumerate()
            .filter(|(_, t)| **t == FaceTag::Elastic)
            .map(|(k, _)| k)
            .collect();
        if elastic.len() != 1 {
            return Err(Error::InvalidPolygon(format!(
                "exactly one elastic face required, found {}",
                elastic.len()
            )));
        }
        let ef = elastic[0];
        let e = edge(ef);
        if e[0] != 0.0 && e[1] != 0.0 {
            return Err(Error::InvalidPolygon("elastic face is not axis-aligned".into()));
        }
        let faces = tags
            .iter()
            .enumerate()
            .map(|(k, &tag)| Face {
                vertices: (k, (k + 1) % n),
                tag,
            })
            .collect();
        let mut poly = Self {
            vertices,
            faces,
            elastic_face: ef,
            length: 0.0,
        };
        let frame = poly.elastic_frame();
        let a = poly.vertices[ef];
        poly.length = frame.z_of(a);
        Ok(poly)
    }

    /// Axis-aligned rectangle; tags ordered bottom, right, top, left.
    pub fn rectangle(lo: [f64; 2], hi: [f64; 2], tags: [FaceTag; 4]) -> Result<Self> {
        Self::new(
            vec![lo, [hi[0], lo[1]], hi, [lo[0], hi[1]]],
            tags.to_vec(),
        )
    }

    /// Unit square with the elastic face on top, dynamic-pressure faces left and
    /// right, and a rigid slip wall at the bottom.
    pub fn unit_square_default() -> Self {
        Self::rectangle(
            [0.0, 0.0],
            [1.0, 1.0],
            [
                FaceTag::RigidSlip,
                FaceTag::DynamicPressure,
                FaceTag::Elastic,
                FaceTag::DynamicPressure,
            ],
        )
        .expect("default domain is valid")
    }

    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }

    pub fn faces(&self) -> &[Face] {
        &self.faces
    }

    pub fn elastic_face(&self) -> usize {
        self.elastic_face
    }

    /// Length `L` of the elastic face.
    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn face_endpoints(&self, k: usize) -> ([f64; 2], [f64; 2]) {
        let f = &self.faces[k];
        (self.vertices[f.vertices.0], self.vertices[f.vertices.1])
    }

    pub fn face_length(&self, k: usize) -> f64 {
        let (a, b) = self.face_endpoints(k);
        (b[0] - a[0]).hypot(b[1] - a[1])
    }

    /// Outward unit normal of face `k` (counterclockwise orientation).
    pub fn face_normal(&self, k: usize) -> [f64; 2] {
        let (a, b) = self.face_endpoints(k);
        let d = [b[0] - a[0], b[1] - a[1]];
        let l = d[0].hypot(d[1]);
        [d[1] / l, -d[0] / l]
    }

    pub fn elastic_frame(&self) -> ElasticFrame {
        let (a, b) = self.face_endpoints(self.elastic_face);
        let d = [b[0] - a[0], b[1] - a[1]];
        let l = d[0].hypot(d[1]);
        let tangent = [-d[0] / l, -d[1] / l];
        let normal = [-tangent[1], tangent[0]];
        ElasticFrame {
            origin: b,
            tangent,
            normal,
            length: if self.length > 0.0 { self.length } else { l },
        }
    }

    pub fn has_tag(&self, tag: FaceTag) -> bool {
        self.faces.iter().any(|f| f.tag == tag)
    }

    fn bounding_box(&self) -> ([f64; 2], [f64; 2]) {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for v in &self.vertices {
            for d in 0..2 {
                lo[d] = lo[d].min(v[d]);
                hi[d] = hi[d].max(v[d]);
            }
        }
        (lo, hi)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryEdge {
    pub nodes: [usize; 2],
    pub face: usize,
    pub tag: FaceTag,
}

/// Structured quadrilateral mesh of the rectangle covering the polygon.
#[derive(Debug, Clone)]
pub struct Mesh {
    xs: Vec<f64>,
    ys: Vec<f64>,
    pub nodes: Vec<[f64; 2]>,
    /// Counterclockwise vertex indices.
    pub cells: Vec<[usize; 4]>,
    pub boundary_edges: Vec<BoundaryEdge>,
    /// Mesh nodes on the elastic face ordered by increasing `z`.
    pub interface_nodes: Vec<usize>,
    polygon: ReferencePolygon,
    fingerprint: u64,
}

/// Uniform structured mesh with `nx x ny` cells.
pub fn build_reference_mesh(polygon: &ReferencePolygon, nx: usize, ny: usize) -> Result<Mesh> {
    if nx < 2 || ny < 2 {
        return Err(Error::NonRectifiablePolygon(format!(
            "resolution {nx}x{ny} is below the minimum of 2 per axis"
        )));
    }
    let (lo, hi) = polygon.bounding_box();
    let line = |a: f64, b: f64, n: usize| -> Vec<f64> {
        let mut v: Vec<f64> = (0..=n).map(|i| a + (b - a) * (i as f64 / n as f64)).collect();
        v[0] = a;
        v[n] = b;
        v
    };
    build_reference_mesh_graded(polygon, line(lo[0], hi[0], nx), line(lo[1], hi[1], ny))
}

/// Tensor-product mesh with explicit, strictly increasing grid lines.
pub fn build_reference_mesh_graded(
    polygon: &ReferencePolygon,
    mut xs: Vec<f64>,
    mut ys: Vec<f64>,
) -> Result<Mesh> {
    if xs.len() < 3 || ys.len() < 3 {
        return Err(Error::NonRectifiablePolygon(
            "resolution below the minimum of 2 per axis".into(),
        ));
    }
    for (name, g) in [("x", &xs), ("y", &ys)] {
        if g.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::NonRectifiablePolygon(format!(
                "{name} grid lines are not strictly increasing"
            )));
        }
    }
    let n = polygon.vertices.len();
    for k in 0..n {
        let (a, b) = polygon.face_endpoints(k);
        if a[0] != b[0] && a[1] != b[1] {
            return Err(Error::NonRectifiablePolygon(format!(
                "face {k} is not axis-aligned"
            )));
        }
    }
    let (lo, hi) = polygon.bounding_box();
    let tol = 1e-10 * (hi[0] - lo[0]).max(hi[1] - lo[1]);
    if (xs[0] - lo[0]).abs() > tol
        || (xs[xs.len() - 1] - hi[0]).abs() > tol
        || (ys[0] - lo[1]).abs() > tol
        || (ys[ys.len() - 1] - hi[1]).abs() > tol
    {
        return Err(Error::NonRectifiablePolygon(
            "grid lines do not span the polygon".into(),
        ));
    }
    // every polygon vertex must sit on a grid line; snap to make breakpoints exact
    for v in &polygon.vertices {
        for (d, g) in [(0usize, &mut xs), (1usize, &mut ys)] {
            match g.iter().position(|x| (x - v[d]).abs() <= tol) {
                Some(i) => g[i] = v[d],
                None => {
                    return Err(Error::NonRectifiablePolygon(format!(
                        "face breakpoint {:?} does not fall on a grid line",
                        v
                    )))
                }
            }
        }
    }
    let nx = xs.len() - 1;
    let ny = ys.len() - 1;
    let idx = |i: usize, j: usize| j * (nx + 1) + i;
    let mut nodes = Vec::with_capacity((nx + 1) * (ny + 1));
    for y in &ys {
        for x in &xs {
            nodes.push([*x, *y]);
        }
    }
    let mut cells = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            cells.push([idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1)]);
        }
    }
    // boundary walk, counterclockwise
    let mut walk: Vec<(usize, usize)> = Vec::new();
    for i in 0..nx {
        walk.push((idx(i, 0), idx(i + 1, 0)));
    }
    for j in 0..ny {
        walk.push((idx(nx, j), idx(nx, j + 1)));
    }
    for i in (0..nx).rev() {
        walk.push((idx(i + 1, ny), idx(i, ny)));
    }
    for j in (0..ny).rev() {
        walk.push((idx(0, j + 1), idx(0, j)));
    }
    let mut boundary_edges = Vec::with_capacity(walk.len());
    for (a, b) in walk {
        let pa = nodes[a];
        let pb = nodes[b];
        let mid = [0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])];
        let face = (0..n)
            .find(|&k| segment_contains(polygon.face_endpoints(k), mid, tol))
            .ok_or_else(|| {
                Error::NonRectifiablePolygon(format!("boundary edge at {mid:?} matches no face"))
            })?;
        boundary_edges.push(BoundaryEdge {
            nodes: [a, b],
            face,
            tag: polygon.faces[face].tag,
        });
    }
    let frame = polygon.elastic_frame();
    let mut interface_nodes: Vec<usize> = Vec::new();
    for e in &boundary_edges {
        if e.face == polygon.elastic_face {
            for &v in &e.nodes {
                if !interface_nodes.contains(&v) {
                    interface_nodes.push(v);
                }
            }
        }
    }
    interface_nodes.sort_by(|&a, &b| frame.z_of(nodes[a]).total_cmp(&frame.z_of(nodes[b])));

    let mut h = DefaultHasher::new();
    for v in xs.iter().chain(ys.iter()) {
        v.to_bits().hash(&mut h);
    }
    for f in &polygon.faces {
        f.tag.hash(&mut h);
        f.vertices.hash(&mut h);
    }
    let fingerprint = h.finish();

    Ok(Mesh {
        xs,
        ys,
        nodes,
        cells,
        boundary_edges,
        interface_nodes,
        polygon: polygon.clone(),
        fingerprint,
    })
}

fn segment_contains(seg: ([f64; 2], [f64; 2]), p: [f64; 2], tol: f64) -> bool {
    let (a, b) = seg;
    let d = [b[0] - a[0], b[1] - a[1]];
    let l2 = d[0] * d[0] + d[1] * d[1];
    let t = ((p[0] - a[0]) * d[0] + (p[1] - a[1]) * d[1]) / l2;
    if !(0.0..=1.0).contains(&t) {
        return false;
    }
    let q = [a[0] + t * d[0], a[1] + t * d[1]];
    (q[0] - p[0]).hypot(q[1] - p[1]) <= tol
}

impl Mesh {
    pub fn nx(&self) -> usize {
        self.xs.len() - 1
    }

    pub fn ny(&self) -> usize {
        self.ys.len() - 1
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn ys(&self) -> &[f64] {
        &self.ys
    }

    pub fn polygon(&self) -> &ReferencePolygon {
        &self.polygon
    }

    pub fn fingerprint(&self) -> u64 {
        self.fingerprint
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }

    #[inline]
    pub fn node_index(&self, i: usize, j: usize) -> usize {
        j * (self.nx() + 1) + i
    }

    /// Cell `(i, j)` in lexicographic order.
    #[inline]
    pub fn cell_ij(&self, c: usize) -> (usize, usize) {
        (c % self.nx(), c / self.nx())
    }

    /// Lower-left corner and side lengths of cell `c`.
    #[inline]
    pub fn cell_box(&self, c: usize) -> ([f64; 2], [f64; 2]) {
        let (i, j) = self.cell_ij(c);
        (
            [self.xs[i], self.ys[j]],
            [self.xs[i + 1] - self.xs[i], self.ys[j + 1] - self.ys[j]],
        )
    }

    /// Q1 vertex indices of cell `c` in tensor order `a + 2 b`.
    #[inline]
    pub fn cell_q1(&self, c: usize) -> [usize; 4] {
        let (i, j) = self.cell_ij(c);
        [
            self.node_index(i, j),
            self.node_index(i + 1, j),
            self.node_index(i, j + 1),
            self.node_index(i + 1, j + 1),
        ]
    }

    /// Number of nodes per row of the Q2 lattice (vertices plus edge midpoints).
    #[inline]
    pub fn q2_row(&self) -> usize {
        2 * self.nx() + 1
    }

    pub fn num_q2_nodes(&self) -> usize {
        (2 * self.nx() + 1) * (2 * self.ny() + 1)
    }

    #[inline]
    pub fn q2_index(&self, i: usize, j: usize) -> usize {
        j * self.q2_row() + i
    }

    /// Q2 lattice nodes of cell `c` in tensor order `a + 3 b`.
    #[inline]
    pub fn cell_q2(&self, c: usize) -> [usize; 9] {
        let (i, j) = self.cell_ij(c);
        let mut out = [0; 9];
        for b in 0..3 {
            for a in 0..3 {
                out[a + 3 * b] = self.q2_index(2 * i + a, 2 * j + b);
            }
        }
        out
    }

    /// Coordinates of every Q2 lattice node.
    pub fn q2_coords(&self) -> Vec<[f64; 2]> {
        let line = |g: &[f64]| -> Vec<f64> {
            let mut v = Vec::with_capacity(2 * g.len() - 1);
            for w in g.windows(2) {
                v.push(w[0]);
                v.push(0.5 * (w[0] + w[1]));
            }
            v.push(g[g.len() - 1]);
            v
        };
        let lx = line(&self.xs);
        let ly = line(&self.ys);
        let mut out = Vec::with_capacity(lx.len() * ly.len());
        for y in &ly {
            for x in &lx {
                out.push([*x, *y]);
            }
        }
        out
    }

    /// Q2 lattice index of mesh vertex `n`.
    #[inline]
    pub fn vertex_to_q2(&self, n: usize) -> usize {
        let (i, j) = (n % (self.nx() + 1), n / (self.nx() + 1));
        self.q2_index(2 * i, 2 * j)
    }

    /// Physical point of a reference coordinate in cell `c`.
    #[inline]
    pub fn map_point(&self, c: usize, p: [f64; 2]) -> [f64; 2] {
        let (lo, h) = self.cell_box(c);
        [lo[0] + 0.5 * h[0] * (p[0] + 1.0), lo[1] + 0.5 * h[1] * (p[1] + 1.0)]
    }

    pub fn is_boundary_node(&self, n: usize) -> bool {
        let (i, j) = (n % (self.nx() + 1), n / (self.nx() + 1));
        i == 0 || j == 0 || i == self.nx() || j == self.ny()
    }

    /// Boundary faces touching node `n` (one, or two at corners and breakpoints).
    pub fn node_faces(&self, n: usize) -> Vec<usize> {
        let mut f: Vec<usize> = self
            .boundary_edges
            .iter()
            .filter(|e| e.nodes.contains(&n))
            .map(|e| e.face)
            .collect();
        f.sort_unstable();
        f.dedup();
        f
    }

    /// Smallest cell side.
    pub fn min_spacing(&self) -> f64 {
        self.xs
            .windows(2)
            .chain(self.ys.windows(2))
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min)
    }

    pub fn max_spacing(&self) -> f64 {
        self.xs
            .windows(2)
            .chain(self.ys.windows(2))
            .map(|w| w[1] - w[0])
            .fold(0.0, f64::max)
    }
}

/// Hermite degrees of freedom per interface node: (value, slope) for each of
/// the two displacement components.
pub const HERMITE_DOFS_PER_NODE: usize = 4;

/// 1D grid on the elastic face with its Hermite DOF layout.
#[derive(Debug, Clone, PartialEq)]
pub struct InterfaceGrid {
    pub z: Vec<f64>,
    pub spans: Vec<f64>,
    /// Mesh node index of each interface node.
    pub nodes: Vec<usize>,
    pub clamped: Vec<bool>,
    pub frame: ElasticFrame,
    mesh_fingerprint: u64,
}

pub fn interface_grid(mesh: &Mesh) -> Result<InterfaceGrid> {
    if !mesh.polygon.has_tag(FaceTag::Elastic) || mesh.interface_nodes.len() < 2 {
        return Err(Error::MissingElasticFace);
    }
    let frame = mesh.polygon.elastic_frame();
    let z: Vec<f64> = mesh
        .interface_nodes
        .iter()
        .map(|&n| frame.z_of(mesh.nodes[n]))
        .collect();
    let spans = z.windows(2).map(|w| w[1] - w[0]).collect();
    let mut clamped = vec![false; z.len()];
    clamped[0] = true;
    *clamped.last_mut().unwrap() = true;
    Ok(InterfaceGrid {
        z,
        spans,
        nodes: mesh.interface_nodes.clone(),
        clamped,
        frame,
        mesh_fingerprint: mesh.fingerprint,
    })
}

impl InterfaceGrid {
    pub fn num_nodes(&self) -> usize {
        self.z.len()
    }

    pub fn num_elements(&self) -> usize {
        self.spans.len()
    }

    pub fn length(&self) -> f64 {
        self.z[self.z.len() - 1]
    }

    pub fn num_dofs(&self) -> usize {
        HERMITE_DOFS_PER_NODE * self.num_nodes()
    }

    /// Global DOF of `node`, displacement component `comp` (0 = tangential,
    /// 1 = normal), `kind` (0 = value, 1 = slope).
    #[inline]
    pub fn dof(node: usize, comp: usize, kind: usize) -> usize {
        HERMITE_DOFS_PER_NODE * node + 2 * comp + kind
    }

    pub fn is_clamped_dof(&self, dof: usize) -> bool {
        self.clamped[dof / HERMITE_DOFS_PER_NODE]
    }

    /// DOFs not removed by the clamped end conditions, ascending.
    pub fn free_dofs(&self) -> Vec<usize> {
        (0..self.num_dofs()).filter(|&d| !self.is_clamped_dof(d)).collect()
    }

    pub fn mesh_fingerprint(&self) -> u64 {
        self.mesh_fingerprint
    }

    /// Value, first and second `z`-derivatives of both components of a Hermite
    /// field on element `e` at local coordinate `s` in `[0, 1]`.
    pub fn eval(&self, dofs: &[f64], e: usize, s: f64) -> ([f64; 2], [f64; 2], [f64; 2]) {
        let (h, d1, d2) = crate::fe::hermite(s, self.spans[e]);
        let mut out = ([0.0; 2], [0.0; 2], [0.0; 2]);
        for c in 0..2 {
            let loc = [
                dofs[Self::dof(e, c, 0)],
                dofs[Self::dof(e, c, 1)],
                dofs[Self::dof(e + 1, c, 0)],
                dofs[Self::dof(e + 1, c, 1)],
            ];
            for k in 0..4 {
                out.0[c] += h[k] * loc[k];
                out.1[c] += d1[k] * loc[k];
                out.2[c] += d2[k] * loc[k];
            }
        }
        out
    }

    /// Local DOF indices of element `e`, in the order used by [`fe::hermite`]
    /// for each component: `[comp][k]`.
    ///
    /// [`fe::hermite`]: crate::fe::hermite
    pub fn element_dofs(e: usize) -> [[usize; 4]; 2] {
        let mut out = [[0; 4]; 2];
        for (c, row) in out.iter_mut().enumerate() {
            *row = [
                Self::dof(e, c, 0),
                Self::dof(e, c, 1),
                Self::dof(e + 1, c, 0),
                Self::dof(e + 1, c, 1),
            ];
        }
        out
    }

    /// Hermite DOF vector interpolating a displacement profile given as
    /// `z -> ((eta_z, eta_r), (d eta_z, d eta_r))`.
    pub fn interpolate<F>(&self, f: F) -> Vec<f64>
    where
        F: Fn(f64) -> ([f64; 2], [f64; 2]),
    {
        let mut out = vec![0.0; self.num_dofs()];
        for (k, &z) in self.z.iter().enumerate() {
            let (v, d) = f(z);
            for c in 0..2 {
                out[Self::dof(k, c, 0)] = v[c];
                out[Self::dof(k, c, 1)] = d[c];
            }
        }
        out
    }
}

/// Legacy ASCII VTK unstructured grid with optional point and cell data.
pub fn write_vtk(
    mesh: &Mesh,
    point_vectors: &[(&str, &[[f64; 2]])],
    point_scalars: &[(&str, &[f64])],
    cell_scalars: &[(&str, &[f64])],
) -> String {
    use std::fmt::Write;
    let mut s = String::new();
    s.push_str("# vtk DataFile Version 3.0\n");
    s.push_str("fsi-split reference mesh\nASCII\nDATASET UNSTRUCTURED_GRID\n");
    let _ = writeln!(s, "POINTS {} double", mesh.nodes.len());
    for p in &mesh.nodes {
        let _ = writeln!(s, "{:.17e} {:.17e} 0", p[0], p[1]);
    }
    let _ = writeln!(s, "CELLS {} {}", mesh.cells.len(), mesh.cells.len() * 5);
    for c in &mesh.cells {
        let _ = writeln!(s, "4 {} {} {} {}", c[0], c[1], c[2], c[3]);
    }
    let _ = writeln!(s, "CELL_TYPES {}", mesh.cells.len());
    for _ in &mesh.cells {
        s.push_str("9\n");
    }
    if !point_vectors.is_empty() || !point_scalars.is_empty() {
        let _ = writeln!(s, "POINT_DATA {}", mesh.nodes.len());
        for (name, data) in point_vectors {
            let _ = writeln!(s, "VECTORS {name} double");
            for v in *data {
                let _ = writeln!(s, "{:.17e} {:.17e} 0", v[0], v[1]);
            }
        }
        for (name, data) in point_scalars {
            let _ = writeln!(s, "SCALARS {name} double 1\nLOOKUP_TABLE default");
            for v in *data {
                let _ = writeln!(s, "{v:.17e}");
            }
        }
    }
    if !cell_scalars.is_empty() {
        let _ = writeln!(s, "CELL_DATA {}", mesh.cells.len());
        for (name, data) in cell_scalars {
            let _ = writeln!(s, "SCALARS {name} double 1\nLOOKUP_TABLE default");
            for v in *data {
                let _ = writeln!(s, "{v:.17e}");
            }
        }
    }
    s
}
