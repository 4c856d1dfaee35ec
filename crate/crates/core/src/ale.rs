//! ALE map as the discrete harmonic extension of the interface displacement,
//! with quadrature-point Jacobian data, interface geometry and admissibility guards.

use crate::error::{Error, Result};
use crate::fe::{cof2, det2, gauss_legendre, inv2, q1_basis, q2_basis, spectral_norm2, QuadRule};
use crate::geometry::{InterfaceGrid, Mesh};
use crate::sparse::{SpdSolver, Triplets};

/// Gauss points per cell used for every volume integral (3 x 3 rule).
pub const QP_PER_CELL: usize = 9;
/// Gauss points per interface element.
pub const INTERFACE_QP: usize = 5;

/// The standard per-cell volume rule.
pub fn volume_rule() -> QuadRule {
    QuadRule::tensor(3)
}

type Mat2 = [[f64; 2]; 2];

/// Discrete ALE map `A = id + B` with `B` bilinear on the mesh vertices.
/// Quadrature data is stored cell-major, `QP_PER_CELL` entries per cell.
#[derive(Debug, Clone)]
pub struct AleMap {
    mesh_fingerprint: u64,
    pub displacement: Vec<[f64; 2]>,
    pub grad_a: Vec<Mat2>,
    pub grad_a_inv: Vec<Mat2>,
    pub jacobian: Vec<f64>,
    pub sup_grad_b: f64,
}

impl AleMap {
    pub fn identity(mesh: &Mesh) -> Self {
        Self::from_displacement(mesh, vec![[0.0; 2]; mesh.num_nodes()])
            .expect("length matches by construction")
    }

    /// Builds the map from an arbitrary nodal displacement field.
    pub fn from_displacement(mesh: &Mesh, b: Vec<[f64; 2]>) -> Result<Self> {
        if b.len() != mesh.num_nodes() {
            return Err(Error::AssemblyShapeMismatch(format!(
                "displacement has {} nodes, mesh has {}",
                b.len(),
                mesh.num_nodes()
            )));
        }
        let rule = volume_rule();
        let nq = mesh.num_cells() * QP_PER_CELL;
        let mut grad_a = Vec::with_capacity(nq);
        let mut grad_a_inv = Vec::with_capacity(nq);
        let mut jacobian = Vec::with_capacity(nq);
        let mut sup = 0.0f64;
        for c in 0..mesh.num_cells() {
            for p in &rule.points {
                let gb = grad_b(mesh, &b, c, *p);
                sup = sup.max(spectral_norm2(&gb));
                let ga = [[1.0 + gb[0][0], gb[0][1]], [gb[1][0], 1.0 + gb[1][1]]];
                grad_a.push(ga);
                grad_a_inv.push(inv2(&ga));
                jacobian.push(det2(&ga));
            }
        }
        Ok(Self {
            mesh_fingerprint: mesh.fingerprint(),
            displacement: b,
            grad_a,
            grad_a_inv,
            jacobian,
            sup_grad_b: sup,
        })
    }

    pub fn mesh_fingerprint(&self) -> u64 {
        self.mesh_fingerprint
    }

    pub fn check_mesh(&self, mesh: &Mesh) -> Result<()> {
        if self.mesh_fingerprint != mesh.fingerprint() {
            return Err(Error::MeshMismatch);
        }
        Ok(())
    }

    /// `grad A` at an arbitrary reference point of cell `c`.
    pub fn grad_a_at(&self, mesh: &Mesh, c: usize, p: [f64; 2]) -> Mat2 {
        let gb = grad_b(mesh, &self.displacement, c, p);
        [[1.0 + gb[0][0], gb[0][1]], [gb[1][0], 1.0 + gb[1][1]]]
    }

    pub fn j_min(&self) -> f64 {
        self.jacobian.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Deformed position of mesh vertex `n`.
    pub fn position(&self, mesh: &Mesh, n: usize) -> [f64; 2] {
        let x = mesh.nodes[n];
        let b = self.displacement[n];
        [x[0] + b[0], x[1] + b[1]]
    }
}

/// Physical gradients of the Q1 basis of cell `c` at reference point `p`.
#[inline]
pub(crate) fn q1_physical(mesh: &Mesh, c: usize, p: [f64; 2]) -> ([f64; 4], [[f64; 2]; 4]) {
    let (_, h) = mesh.cell_box(c);
    let (v, g) = q1_basis(p);
    let mut out = [[0.0; 2]; 4];
    for k in 0..4 {
        out[k] = [g[k][0] * 2.0 / h[0], g[k][1] * 2.0 / h[1]];
    }
    (v, out)
}

/// Physical gradients of the Q2 basis of cell `c` at reference point `p`.
#[inline]
pub(crate) fn q2_physical(mesh: &Mesh, c: usize, p: [f64; 2]) -> ([f64; 9], [[f64; 2]; 9]) {
    let (_, h) = mesh.cell_box(c);
    let (v, g) = q2_basis(p);
    let mut out = [[0.0; 2]; 9];
    for k in 0..9 {
        out[k] = [g[k][0] * 2.0 / h[0], g[k][1] * 2.0 / h[1]];
    }
    (v, out)
}

fn grad_b(mesh: &Mesh, b: &[[f64; 2]], c: usize, p: [f64; 2]) -> Mat2 {
    let nodes = mesh.cell_q1(c);
    let (_, g) = q1_physical(mesh, c, p);
    let mut m = [[0.0; 2]; 2];
    for k in 0..4 {
        let bk = b[nodes[k]];
        for i in 0..2 {
            for j in 0..2 {
                m[i][j] += bk[i] * g[k][j];
            }
        }
    }
    m
}

/// Q1 Laplacian on the mesh with the boundary nodes eliminated. The interior
/// block is factored once and reused for every extension on this mesh.
#[derive(Debug, Clone)]
pub struct HarmonicExtension {
    mesh_fingerprint: u64,
    interior: Vec<usize>,
    coupling: Vec<(usize, usize, f64)>,
    solver: Option<SpdSolver>,
}

impl HarmonicExtension {
    pub fn new(mesh: &Mesh) -> Result<Self> {
        let mut slot = vec![usize::MAX; mesh.num_nodes()];
        let mut interior = Vec::new();
        for n in 0..mesh.num_nodes() {
            if !mesh.is_boundary_node(n) {
                slot[n] = interior.len();
                interior.push(n);
            }
        }
        let (x, w) = gauss_legendre(2);
        let mut k = Triplets::with_capacity(interior.len(), 16 * mesh.num_cells());
        let mut coupling = Vec::new();
        for c in 0..mesh.num_cells() {
            let (_, h) = mesh.cell_box(c);
            let nodes = mesh.cell_q1(c);
            let mut loc = [[0.0; 4]; 4];
            for (qj, wj) in x.iter().zip(&w) {
                for (qi, wi) in x.iter().zip(&w) {
                    let (_, g) = q1_physical(mesh, c, [*qi, *qj]);
                    let dw = wi * wj * 0.25 * h[0] * h[1];
                    for a in 0..4 {
                        for b in 0..4 {
                            loc[a][b] += dw * (g[a][0] * g[b][0] + g[a][1] * g[b][1]);
                        }
                    }
                }
            }
            for a in 0..4 {
                let ra = slot[nodes[a]];
                if ra == usize::MAX {
                    continue;
                }
                for b in 0..4 {
                    let rb = slot[nodes[b]];
                    if rb == usize::MAX {
                        coupling.push((ra, nodes[b], loc[a][b]));
                    } else {
                        k.push(ra, rb, loc[a][b]);
                    }
                }
            }
        }
        let solver = if interior.is_empty() {
            None
        } else {
            Some(SpdSolver::new(k)?)
        };
        Ok(Self {
            mesh_fingerprint: mesh.fingerprint(),
            interior,
            coupling,
            solver,
        })
    }

    /// Extends the interface displacement (Hermite DOFs in the elastic frame)
    /// harmonically into the domain. Only nodal values enter the Dirichlet data.
    pub fn extend(&self, mesh: &Mesh, grid: &InterfaceGrid, eta: &[f64]) -> Result<AleMap> {
        if mesh.fingerprint() != self.mesh_fingerprint
            || grid.mesh_fingerprint() != self.mesh_fingerprint
        {
            return Err(Error::MeshMismatch);
        }
        if eta.len() != grid.num_dofs() {
            return Err(Error::AssemblyShapeMismatch(format!(
                "eta has {} DOFs, interface grid has {}",
                eta.len(),
                grid.num_dofs()
            )));
        }
        check_clamped_values(grid, eta)?;
        let mut b = vec![[0.0; 2]; mesh.num_nodes()];
        for (k, &n) in grid.nodes.iter().enumerate() {
            if grid.clamped[k] {
                continue;
            }
            let c = [
                eta[InterfaceGrid::dof(k, 0, 0)],
                eta[InterfaceGrid::dof(k, 1, 0)],
            ];
            b[n] = grid.frame.to_cartesian(c);
        }
        if let Some(solver) = &self.solver {
            let m = self.interior.len();
            for comp in 0..2 {
                let mut rhs = vec![0.0; m];
                for &(r, n, v) in &self.coupling {
                    rhs[r] -= v * b[n][comp];
                }
                let x = solver.solve(&rhs);
                let ax = solver.matrix().matvec(&x);
                let rn = rhs.iter().map(|v| v * v).sum::<f64>().sqrt();
                let res = ax
                    .iter()
                    .zip(&rhs)
                    .map(|(a, r)| (a - r) * (a - r))
                    .sum::<f64>()
                    .sqrt();
                if !(res <= 1e-10 * rn.max(f64::MIN_POSITIVE)) && rn > 0.0 {
                    return Err(Error::SolverFailure(format!(
                        "harmonic extension residual {:e}",
                        res / rn
                    )));
                }
                for (i, &n) in self.interior.iter().enumerate() {
                    b[n][comp] = x[i];
                }
            }
        }
        AleMap::from_displacement(mesh, b)
    }
}

fn check_clamped_values(grid: &InterfaceGrid, eta: &[f64]) -> Result<()> {
    let tol = 1e-12 * grid.length().max(1.0);
    for k in [0, grid.num_nodes() - 1] {
        for c in 0..2 {
            let v = eta[InterfaceGrid::dof(k, c, 0)];
            if v.abs() > tol {
                return Err(Error::ClampViolatedInput(format!(
                    "component {c} equals {v:e} at z = {}",
                    grid.z[k]
                )));
            }
        }
    }
    Ok(())
}

/// One-shot harmonic extension; use [`HarmonicExtension`] to reuse the factorization.
pub fn harmonic_extension(eta: &[f64], mesh: &Mesh, grid: &InterfaceGrid) -> Result<AleMap> {
    HarmonicExtension::new(mesh)?.extend(mesh, grid, eta)
}

/// Interface quadrature point carrying the deformed geometry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterfacePoint {
    pub element: usize,
    /// Local coordinate in `[0, 1]`.
    pub s: f64,
    pub z: f64,
    /// Quadrature weight including the element length (reference measure `dz`).
    pub weight: f64,
    pub tangent: [f64; 2],
    pub normal: [f64; 2],
    pub stretch: f64,
    pub position: [f64; 2],
}

#[derive(Debug, Clone)]
pub struct InterfaceGeometry {
    pub points: Vec<InterfacePoint>,
}

/// Tangent, outward normal, stretch and position of the deformed interface at
/// the interface quadrature points.
pub fn interface_geometry(grid: &InterfaceGrid, eta: &[f64]) -> Result<InterfaceGeometry> {
    if eta.len() != grid.num_dofs() {
        return Err(Error::AssemblyShapeMismatch(format!(
            "eta has {} DOFs, interface grid has {}",
            eta.len(),
            grid.num_dofs()
        )));
    }
    let (x, w) = gauss_legendre(INTERFACE_QP);
    let f = &grid.frame;
    let mut points = Vec::with_capacity(grid.num_elements() * INTERFACE_QP);
    for e in 0..grid.num_elements() {
        let len = grid.spans[e];
        for (xi, wi) in x.iter().zip(&w) {
            let s = 0.5 * (xi + 1.0);
            let z = grid.z[e] + s * len;
            let (val, d1, _) = grid.eval(eta, e, s);
            let dphi = f.to_cartesian([1.0 + d1[0], d1[1]]);
            let stretch = dphi[0].hypot(dphi[1]);
            if !(stretch > 1e-12) {
                return Err(Error::DegenerateTangent(stretch));
            }
            let tangent = [dphi[0] / stretch, dphi[1] / stretch];
            let normal = [-tangent[1], tangent[0]];
            let disp = f.to_cartesian(val);
            let base = [f.origin[0] + z * f.tangent[0], f.origin[1] + z * f.tangent[1]];
            points.push(InterfacePoint {
                element: e,
                s,
                z,
                weight: 0.5 * wi * len,
                tangent,
                normal,
                stretch,
                position: [base[0] + disp[0], base[1] + disp[1]],
            });
        }
    }
    Ok(InterfaceGeometry { points })
}

/// Nodal ALE velocity `(B^{n+1} - B^n) / dt`.
pub fn ale_velocity(a_new: &AleMap, a_old: &AleMap, dt: f64) -> Result<Vec<[f64; 2]>> {
    if a_new.mesh_fingerprint != a_old.mesh_fingerprint
        || a_new.displacement.len() != a_old.displacement.len()
    {
        return Err(Error::MeshMismatch);
    }
    if !(dt > 0.0) {
        return Err(Error::InvalidArgument(format!("dt must be positive, got {dt}")));
    }
    Ok(a_new
        .displacement
        .iter()
        .zip(&a_old.displacement)
        .map(|(n, o)| [(n[0] - o[0]) / dt, (n[1] - o[1]) / dt])
        .collect())
}

fn check_velocity(mesh: &Mesh, u: &[[f64; 2]], map: &AleMap) -> Result<()> {
    map.check_mesh(mesh)?;
    if u.len() != mesh.num_q2_nodes() {
        return Err(Error::AssemblyShapeMismatch(format!(
            "velocity has {} nodes, Q2 lattice has {}",
            u.len(),
            mesh.num_q2_nodes()
        )));
    }
    Ok(())
}

/// Reference gradient of a Q2 velocity field at every volume quadrature point.
pub fn velocity_gradient(mesh: &Mesh, u: &[[f64; 2]]) -> Vec<Mat2> {
    let rule = volume_rule();
    let mut out = Vec::with_capacity(mesh.num_cells() * QP_PER_CELL);
    for c in 0..mesh.num_cells() {
        let nodes = mesh.cell_q2(c);
        for p in &rule.points {
            let (_, g) = q2_physical(mesh, c, *p);
            let mut m = [[0.0; 2]; 2];
            for k in 0..9 {
                let uk = u[nodes[k]];
                for i in 0..2 {
                    for j in 0..2 {
                        m[i][j] += uk[i] * g[k][j];
                    }
                }
            }
            out.push(m);
        }
    }
    out
}

/// `grad u (grad A)^{-1}` at every volume quadrature point.
pub fn transformed_gradient(mesh: &Mesh, u: &[[f64; 2]], map: &AleMap) -> Result<Vec<Mat2>> {
    check_velocity(mesh, u, map)?;
    let g = velocity_gradient(mesh, u);
    Ok(g
        .iter()
        .zip(&map.grad_a_inv)
        .map(|(g, fi)| crate::fe::matmul2(g, fi))
        .collect())
}

/// Transformed divergence through the cofactor, `cof(grad A) : grad u / J`.
pub fn transformed_divergence(mesh: &Mesh, u: &[[f64; 2]], map: &AleMap) -> Result<Vec<f64>> {
    check_velocity(mesh, u, map)?;
    let g = velocity_gradient(mesh, u);
    Ok(g
        .iter()
        .zip(&map.grad_a)
        .zip(&map.jacobian)
        .map(|((g, f), j)| {
            let cf = cof2(f);
            (g[0][0] * cf[0][0] + g[0][1] * cf[0][1] + g[1][0] * cf[1][0] + g[1][1] * cf[1][1])
                / j
        })
        .collect())
}

/// Symmetric part of a 2x2 tensor.
#[inline]
pub fn sym(m: &Mat2) -> Mat2 {
    let o = 0.5 * (m[0][1] + m[1][0]);
    [[m[0][0], o], [o, m[1][1]]]
}

#[inline]
pub fn frob2(m: &Mat2) -> f64 {
    m[0][0] * m[0][0] + m[0][1] * m[0][1] + m[1][0] * m[1][0] + m[1][1] * m[1][1]
}

/// Reference-measure weight of every volume quadrature point.
pub fn quadrature_weights(mesh: &Mesh) -> Vec<f64> {
    let rule = volume_rule();
    let mut out = Vec::with_capacity(mesh.num_cells() * QP_PER_CELL);
    for c in 0..mesh.num_cells() {
        let (_, h) = mesh.cell_box(c);
        for w in &rule.weights {
            out.push(w * 0.25 * h[0] * h[1]);
        }
    }
    out
}

/// `|| grad^eta u || / || D^eta u ||` in the reference `L^2` norm.
pub fn korn_ratio(mesh: &Mesh, u: &[[f64; 2]], map: &AleMap) -> Result<f64> {
    let g = transformed_gradient(mesh, u, map)?;
    let w = quadrature_weights(mesh);
    let mut num = 0.0;
    let mut den = 0.0;
    for (g, w) in g.iter().zip(&w) {
        num += w * frob2(g);
        den += w * frob2(&sym(g));
    }
    let den = den.sqrt();
    if den <= 1e-14 {
        return Err(Error::ZeroDeformation);
    }
    Ok(num.sqrt() / den)
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct DomainStatus {
    pub j_min: f64,
    pub sup_grad_b: f64,
    pub injectivity_margin: f64,
    pub admissible: bool,
}

pub fn check_admissible(map: &AleMap, c_omega: f64, j_floor: f64) -> DomainStatus {
    let j_min = map.j_min();
    let injectivity_margin = c_omega - map.sup_grad_b;
    DomainStatus {
        j_min,
        sup_grad_b: map.sup_grad_b,
        injectivity_margin,
        admissible: j_min >= j_floor && injectivity_margin > 0.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_reference_mesh, interface_grid, ReferencePolygon};
    use std::f64::consts::PI;

    fn square(n: usize) -> (Mesh, InterfaceGrid) {
        let m = build_reference_mesh(&ReferencePolygon::unit_square_default(), n, n).unwrap();
        let g = interface_grid(&m).unwrap();
        (m, g)
    }

    fn q2_field(mesh: &Mesh, f: impl Fn(f64, f64) -> [f64; 2]) -> Vec<[f64; 2]> {
        mesh.q2_coords().iter().map(|p| f(p[0], p[1])).collect()
    }

    #[test]
    fn zero_data_gives_identity_map() {
        let (m, g) = square(4);
        let a = harmonic_extension(&vec![0.0; g.num_dofs()], &m, &g).unwrap();
        assert!(a.displacement.iter().all(|b| *b == [0.0, 0.0]));
        assert!(a.jacobian.iter().all(|&j| j == 1.0));
        assert!(a.grad_a_inv.iter().all(|f| *f == [[1.0, 0.0], [0.0, 1.0]]));
        assert_eq!(a.sup_grad_b, 0.0);
    }

    fn sinh_error(n: usize) -> f64 {
        let (m, g) = square(n);
        let eps = 0.05;
        let eta = g.interpolate(|z| ([0.0, eps * (PI * z).sin()], [0.0, eps * PI * (PI * z).cos()]));
        let mut eta = eta;
        for k in [0, g.num_nodes() - 1] {
            eta[InterfaceGrid::dof(k, 1, 0)] = 0.0;
        }
        let a = harmonic_extension(&eta, &m, &g).unwrap();
        m.nodes
            .iter()
            .zip(&a.displacement)
            .map(|(p, b)| (b[1] - eps * (PI * p[0]).sin() * (PI * p[1]).sinh() / PI.sinh()).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn sinh_oracle_converges_at_second_order() {
        let e: Vec<f64> = [8, 16, 32].iter().map(|&n| sinh_error(n)).collect();
        for w in e.windows(2) {
            let order = (w[0] / w[1]).log2();
            assert!((order - 2.0).abs() < 0.2, "order {order}");
        }
    }

    #[test]
    fn nonzero_end_value_is_rejected() {
        let (m, g) = square(4);
        let mut eta = vec![0.0; g.num_dofs()];
        eta[InterfaceGrid::dof(0, 1, 0)] = 0.1;
        assert!(matches!(
            harmonic_extension(&eta, &m, &g),
            Err(Error::ClampViolatedInput(_))
        ));
    }

    #[test]
    fn extension_obeys_maximum_principle() {
        let (m, g) = square(8);
        let eta = g.interpolate(|z| {
            let s = (PI * z).sin();
            ([0.03 * s * s, -0.1 * s * s * s], [0.0, 0.0])
        });
        let a = harmonic_extension(&eta, &m, &g).unwrap();
        for comp in 0..2 {
            let bd: Vec<f64> = (0..m.num_nodes())
                .filter(|&n| m.is_boundary_node(n))
                .map(|n| a.displacement[n][comp])
                .collect();
            let lo = bd.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = bd.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            for n in 0..m.num_nodes() {
                let v = a.displacement[n][comp];
                assert!(v >= lo - 1e-10 && v <= hi + 1e-10);
            }
        }
        for (j, fi) in a.jacobian.iter().zip(&a.grad_a_inv) {
            assert!((j * det2(fi) - 1.0).abs() < 1e-11);
        }
        for (f, fi) in a.grad_a.iter().zip(&a.grad_a_inv) {
            let p = crate::fe::matmul2(f, fi);
            assert!((p[0][0] - 1.0).abs() < 1e-12 && p[0][1].abs() < 1e-12);
            assert!(p[1][0].abs() < 1e-12 && (p[1][1] - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn interface_geometry_of_flat_interface() {
        let (_, g) = square(4);
        let geo = interface_geometry(&g, &vec![0.0; g.num_dofs()]).unwrap();
        for p in &geo.points {
            assert_eq!(p.tangent, [1.0, 0.0]);
            assert_eq!(p.normal, [-0.0, 1.0]);
            assert_eq!(p.stretch, 1.0);
        }
        let total: f64 = geo.points.iter().map(|p| p.weight).sum();
        assert!((total - 1.0).abs() < 1e-14);
    }

    #[test]
    fn interface_stretch_matches_closed_form() {
        let (_, g) = square(64);
        let eps = 0.1;
        let eta = g.interpolate(|z| ([0.0, eps * (PI * z).sin()], [0.0, eps * PI * (PI * z).cos()]));
        let geo = interface_geometry(&g, &eta).unwrap();
        for p in &geo.points {
            let c = (PI * p.z).cos();
            let s = (1.0 + eps * eps * PI * PI * c * c).sqrt();
            assert!((p.stretch - s).abs() < 1e-6);
        }
    }

    #[test]
    fn tangential_shear_keeps_frame_orthonormal() {
        let (_, g) = square(16);
        let d = 0.05;
        let eta = g.interpolate(|z| ([d * z * (1.0 - z), 0.0], [d * (1.0 - 2.0 * z), 0.0]));
        let geo = interface_geometry(&g, &eta).unwrap();
        for p in &geo.points {
            let t = p.tangent;
            let n = p.normal;
            assert!((t[0].hypot(t[1]) - 1.0).abs() < 1e-12);
            assert!((n[0].hypot(n[1]) - 1.0).abs() < 1e-12);
            assert!((t[0] * n[0] + t[1] * n[1]).abs() < 1e-12);
            assert!(n[1] > 0.99);
        }
    }

    #[test]
    fn ale_velocity_differences() {
        let (m, _) = square(4);
        let a0 = AleMap::identity(&m);
        assert!(ale_velocity(&a0, &a0, 0.1).unwrap().iter().all(|w| *w == [0.0, 0.0]));
        let dt = 0.25;
        let b: Vec<[f64; 2]> = m
            .nodes
            .iter()
            .map(|p| [0.5 * p[0] * dt, -2.0 * p[1] * dt])
            .collect();
        let a1 = AleMap::from_displacement(&m, b.clone()).unwrap();
        let w = ale_velocity(&a1, &a0, dt).unwrap();
        for (w, b) in w.iter().zip(&b) {
            assert_eq!(w[0], b[0] / dt);
            assert_eq!(w[1], b[1] / dt);
        }
        let (m2, _) = square(5);
        assert!(matches!(
            ale_velocity(&AleMap::identity(&m2), &a0, dt),
            Err(Error::MeshMismatch)
        ));
    }

    #[test]
    fn affine_stretch_transforms_gradient() {
        let (m, _) = square(4);
        let a = 0.3;
        let map =
            AleMap::from_displacement(&m, m.nodes.iter().map(|p| [a * p[0], 0.0]).collect())
                .unwrap();
        let u = q2_field(&m, |x, _| [x, 0.0]);
        let g = transformed_gradient(&m, &u, &map).unwrap();
        let d = transformed_divergence(&m, &u, &map).unwrap();
        for (g, d) in g.iter().zip(&d) {
            assert!((g[0][0] - 1.0 / (1.0 + a)).abs() < 1e-13);
            assert!(g[0][1].abs() < 1e-13 && g[1][0].abs() < 1e-13 && g[1][1].abs() < 1e-13);
            assert!((d - 1.0 / (1.0 + a)).abs() < 1e-13);
        }
    }

    #[test]
    fn identity_map_gradient_is_plain_gradient() {
        let (m, _) = square(3);
        let u = q2_field(&m, |x, y| [x * y, x * x - y]);
        let map = AleMap::identity(&m);
        assert_eq!(
            transformed_gradient(&m, &u, &map).unwrap(),
            velocity_gradient(&m, &u)
        );
    }

    #[test]
    fn admissibility_thresholds() {
        let (m, g) = square(8);
        let s = check_admissible(&AleMap::identity(&m), 0.5, 1e-3);
        assert_eq!(s.j_min, 1.0);
        assert_eq!(s.injectivity_margin, 0.5);
        assert!(s.admissible);
        // B = (x, 0): grad B has spectral norm 1 = 2 c_omega
        let map = AleMap::from_displacement(&m, m.nodes.iter().map(|p| [p[0], 0.0]).collect())
            .unwrap();
        let s = check_admissible(&map, 0.5, 1e-3);
        assert!((s.injectivity_margin + 0.5).abs() < 1e-14);
        assert!(!s.admissible);
        // amplitude beyond the domain height folds the domain
        let eta = g.interpolate(|z| {
            let s = (PI * z).sin();
            ([0.0, -1.5 * s * s], [0.0, -3.0 * PI * s * (PI * z).cos()])
        });
        let map = harmonic_extension(&eta, &m, &g).unwrap();
        let s = check_admissible(&map, 0.5, 1e-3);
        assert!(s.j_min <= 0.0);
        assert!(!s.admissible);
    }

    #[test]
    fn korn_ratio_examples() {
        let (m, _) = square(4);
        let id = AleMap::identity(&m);
        let shear = q2_field(&m, |x, y| [y, x]);
        assert!((korn_ratio(&m, &shear, &id).unwrap() - 1.0).abs() < 1e-13);
        let rot = q2_field(&m, |x, y| [-y, x]);
        assert!(matches!(korn_ratio(&m, &rot, &id), Err(Error::ZeroDeformation)));
    }
}
