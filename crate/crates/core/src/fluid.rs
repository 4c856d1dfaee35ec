//! Fluid sub-problem on the reference mesh: Q2/Q1 Taylor-Hood velocity and
//! pressure, shell velocity on the interface and a P1 multiplier for the
//! kinematic normal constraint, assembled into one saddle-point system.

use serde::{Deserialize, Serialize};

use crate::ale::{
    frob2, q1_physical, q2_physical, quadrature_weights, sym, volume_rule, AleMap,
    InterfaceGeometry, QP_PER_CELL,
};
use crate::error::{Error, Result};
use crate::fe::{cof2, gauss_legendre, hermite, lagrange2, q1_basis, q2_basis, QuadRule};
use crate::geometry::{ElasticFrame, FaceTag, InterfaceGrid, Mesh};
use crate::shell::{ShellOperator, StructureParams};
use crate::sparse::{LuSolver, Triplets};

const NONE: usize = usize::MAX;

/// Which Jacobian weights the convection and viscous terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JacobianVariant {
    #[default]
    New,
    Old,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FluidParams {
    pub rho_f: f64,
    pub mu: f64,
    /// Slip friction on the elastic interface.
    pub alpha: f64,
    /// Slip friction on rigid-slip faces without an explicit entry.
    pub alpha_wall: f64,
    /// Per-face overrides `(face index, alpha_i)`.
    pub alpha_faces: Vec<(usize, f64)>,
    pub jacobian_variant: JacobianVariant,
}

impl Default for FluidParams {
    fn default() -> Self {
        Self {
            rho_f: 1.0,
            mu: 0.1,
            alpha: 1.0,
            alpha_wall: 1.0,
            alpha_faces: Vec::new(),
            jacobian_variant: JacobianVariant::New,
        }
    }
}

impl FluidParams {
    pub fn alpha_face(&self, face: usize) -> f64 {
        self.alpha_faces
            .iter()
            .find(|(f, _)| *f == face)
            .map_or(self.alpha_wall, |(_, a)| *a)
    }

    pub fn validate(&self) -> Result<()> {
        let mut checks = vec![
            ("fluid.rho_f".to_string(), self.rho_f),
            ("fluid.mu".to_string(), self.mu),
            ("fluid.alpha".to_string(), self.alpha),
            ("fluid.alpha_wall".to_string(), self.alpha_wall),
        ];
        for (f, a) in &self.alpha_faces {
            checks.push((format!("fluid.alpha_faces[{f}]"), *a));
        }
        for (key, v) in checks {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Validation {
                    key,
                    constraint: "positivity".into(),
                });
            }
        }
        Ok(())
    }
}

/// Time profile of a dynamic pressure `P_i(t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PressureProfile {
    Constant { value: f64 },
    /// `offset + amplitude * sin(omega t + phase)`.
    Sinusoidal {
        amplitude: f64,
        omega: f64,
        #[serde(default)]
        phase: f64,
        #[serde(default)]
        offset: f64,
    },
    /// `value * min(t / duration, 1)`.
    Ramp { value: f64, duration: f64 },
}

impl PressureProfile {
    pub fn eval(&self, t: f64) -> f64 {
        match *self {
            Self::Constant { value } => value,
            Self::Sinusoidal {
                amplitude,
                omega,
                phase,
                offset,
            } => offset + amplitude * (omega * t + phase).sin(),
            Self::Ramp { value, duration } => value * (t / duration).min(1.0),
        }
    }

    /// Exact mean over `[t0, t1]` for constant and sinusoidal profiles,
    /// 5-point Gauss otherwise.
    pub fn step_average(&self, t0: f64, t1: f64) -> f64 {
        let dt = t1 - t0;
        match *self {
            Self::Constant { value } => value,
            Self::Sinusoidal {
                amplitude,
                omega,
                phase,
                offset,
            } => {
                if omega == 0.0 {
                    offset + amplitude * phase.sin()
                } else {
                    offset
                        + amplitude * ((omega * t0 + phase).cos() - (omega * t1 + phase).cos())
                            / (omega * dt)
                }
            }
            Self::Ramp { .. } => {
                let (x, w) = gauss_legendre(5);
                x.iter()
                    .zip(&w)
                    .map(|(x, w)| 0.5 * w * self.eval(t0 + 0.5 * (x + 1.0) * dt))
                    .sum()
            }
        }
    }
}

/// Dynamic pressure data on type-I faces, keyed by face index.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BoundaryData {
    pub pressures: Vec<(usize, PressureProfile)>,
}

/// Step-averaged source functional `q -> -sum_i Pbar_i int_{Gamma_i} q . n`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SourceTerm {
    pub averages: Vec<(usize, f64)>,
}

impl SourceTerm {
    pub fn is_zero(&self) -> bool {
        self.averages.iter().all(|(_, p)| *p == 0.0)
    }

    /// Dual-norm surrogate `sqrt(sum_i Pbar_i^2 |Gamma_i|)`.
    pub fn norm_surrogate(&self, mesh: &Mesh) -> f64 {
        self.averages
            .iter()
            .map(|(f, p)| p * p * mesh.polygon().face_length(*f))
            .sum::<f64>()
            .sqrt()
    }

    /// `<R, q>` for a Q2 velocity field `q`.
    pub fn apply(&self, space: &FluidSpace, q: &[[f64; 2]]) -> f64 {
        let mut out = 0.0;
        for (face, p) in &self.averages {
            for e in space.edges.iter().filter(|e| e.face == *face) {
                for (k, wk) in SIMPSON.iter().enumerate() {
                    let v = q[e.lattice[k]];
                    out -= p * wk * e.length * (v[0] * e.normal[0] + v[1] * e.normal[1]);
                }
            }
        }
        out
    }
}

const SIMPSON: [f64; 3] = [1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0];

/// Source functional for the step `[n dt, (n + 1) dt]`.
pub fn source_term(data: &BoundaryData, n: usize, dt: f64) -> SourceTerm {
    let t0 = n as f64 * dt;
    SourceTerm {
        averages: data
            .pressures
            .iter()
            .map(|(f, p)| (*f, p.step_average(t0, t0 + dt)))
            .collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StructureMode {
    #[default]
    Elastic,
    /// Interface held at its reference position (infinitely stiff shell).
    Frozen,
}

/// Fluid unknowns: Q2 velocity on the lattice, Q1 pressure on vertices, shell
/// velocity (Hermite DOFs) and the interface multiplier (per interface node).
#[derive(Debug, Clone, PartialEq)]
pub struct FluidState {
    pub u: Vec<[f64; 2]>,
    pub p: Vec<f64>,
    pub v: Vec<f64>,
    pub lambda: Vec<f64>,
}

impl FluidState {
    pub fn rest(mesh: &Mesh, grid: &InterfaceGrid) -> Self {
        Self {
            u: vec![[0.0; 2]; mesh.num_q2_nodes()],
            p: vec![0.0; mesh.num_nodes()],
            v: vec![0.0; grid.num_dofs()],
            lambda: vec![0.0; grid.num_nodes()],
        }
    }
}

#[derive(Debug, Clone)]
struct BoundarySegment {
    face: usize,
    tag: FaceTag,
    lattice: [usize; 3],
    length: f64,
    normal: [f64; 2],
    tangent_axis: usize,
}

/// DOF numbering and boundary bookkeeping of the fluid system on one mesh.
#[derive(Debug, Clone)]
pub struct FluidSpace {
    mesh_fingerprint: u64,
    pub mode: StructureMode,
    u_index: Vec<usize>,
    p_index: Vec<usize>,
    v_index: Vec<usize>,
    l_index: Vec<usize>,
    n_u: usize,
    n_p: usize,
    n_v: usize,
    n_l: usize,
    edges: Vec<BoundarySegment>,
    iface_lattice: Vec<[usize; 3]>,
    frame: ElasticFrame,
    rule: QuadRule,
    q2_ref: Vec<([f64; 9], [[f64; 2]; 9])>,
    q1_ref: Vec<([f64; 4], [[f64; 2]; 4])>,
}

fn midpoint_lattice(mesh: &Mesh, a: usize, b: usize) -> usize {
    let row = mesh.nx() + 1;
    let (ia, ja) = (a % row, a / row);
    let (ib, jb) = (b % row, b / row);
    mesh.q2_index(ia + ib, ja + jb)
}

impl FluidSpace {
    pub fn new(mesh: &Mesh, grid: &InterfaceGrid, mode: StructureMode) -> Result<Self> {
        if grid.mesh_fingerprint() != mesh.fingerprint() {
            return Err(Error::MeshMismatch);
        }
        let poly = mesh.polygon();
        let nq2 = mesh.num_q2_nodes();
        let mut fixed = vec![[false; 2]; nq2];
        let mut edges = Vec::with_capacity(mesh.boundary_edges.len());
        for be in &mesh.boundary_edges {
            let [a, b] = be.nodes;
            let lattice = [
                mesh.vertex_to_q2(a),
                midpoint_lattice(mesh, a, b),
                mesh.vertex_to_q2(b),
            ];
            let normal = poly.face_normal(be.face);
            let normal_axis = if normal[0].abs() > 0.5 { 0 } else { 1 };
            let tangent_axis = 1 - normal_axis;
            let pa = mesh.nodes[a];
            let pb = mesh.nodes[b];
            let length = (pb[0] - pa[0]).hypot(pb[1] - pa[1]);
            let fix: [bool; 2] = match (be.tag, mode) {
                (FaceTag::DynamicPressure, _) => {
                    let mut f = [false; 2];
                    f[tangent_axis] = true;
                    f
                }
                (FaceTag::NoSlip, _) => [true, true],
                (FaceTag::RigidSlip | FaceTag::Symmetry, _)
                | (FaceTag::Elastic, StructureMode::Frozen) => {
                    let mut f = [false; 2];
                    f[normal_axis] = true;
                    f
                }
                (FaceTag::Elastic, StructureMode::Elastic) => [false, false],
            };
            for &l in &lattice {
                fixed[l][0] |= fix[0];
                fixed[l][1] |= fix[1];
            }
            edges.push(BoundarySegment {
                face: be.face,
                tag: be.tag,
                lattice,
                length,
                normal,
                tangent_axis,
            });
        }
        let mut next = 0;
        let mut u_index = vec![NONE; 2 * nq2];
        for l in 0..nq2 {
            for c in 0..2 {
                if !fixed[l][c] {
                    u_index[2 * l + c] = next;
                    next += 1;
                }
            }
        }
        let n_u = next;
        let pin = mode == StructureMode::Frozen && !poly.has_tag(FaceTag::DynamicPressure);
        let mut p_index = vec![NONE; mesh.num_nodes()];
        for (n, slot) in p_index.iter_mut().enumerate() {
            if pin && n == 0 {
                continue;
            }
            *slot = next;
            next += 1;
        }
        let n_p = next - n_u;
        let mut v_index = vec![NONE; grid.num_dofs()];
        let mut l_index = vec![NONE; grid.num_nodes()];
        let iface_lattice: Vec<[usize; 3]> = (0..grid.num_elements())
            .map(|e| {
                let (a, b) = (grid.nodes[e], grid.nodes[e + 1]);
                [
                    mesh.vertex_to_q2(a),
                    midpoint_lattice(mesh, a, b),
                    mesh.vertex_to_q2(b),
                ]
            })
            .collect();
        if mode == StructureMode::Elastic {
            for d in grid.free_dofs() {
                v_index[d] = next;
                next += 1;
            }
        }
        let n_v = next - n_u - n_p;
        if mode == StructureMode::Elastic {
            let normal = grid.frame.normal;
            let axis = if normal[0].abs() > 0.5 { 0 } else { 1 };
            for (k, &n) in grid.nodes.iter().enumerate() {
                if !fixed[mesh.vertex_to_q2(n)][axis] {
                    l_index[k] = next;
                    next += 1;
                }
            }
        }
        let n_l = next - n_u - n_p - n_v;
        let rule = volume_rule();
        let q2_ref = rule.points.iter().map(|p| q2_basis(*p)).collect();
        let q1_ref = rule.points.iter().map(|p| q1_basis(*p)).collect();
        Ok(Self {
            mesh_fingerprint: mesh.fingerprint(),
            mode,
            u_index,
            p_index,
            v_index,
            l_index,
            n_u,
            n_p,
            n_v,
            n_l,
            edges,
            iface_lattice,
            frame: grid.frame,
            rule,
            q2_ref,
            q1_ref,
        })
    }

    pub fn num_unknowns(&self) -> usize {
        self.n_u + self.n_p + self.n_v + self.n_l
    }

    /// Sizes of the velocity, pressure, shell-velocity and multiplier blocks.
    pub fn block_sizes(&self) -> [usize; 4] {
        [self.n_u, self.n_p, self.n_v, self.n_l]
    }

    pub fn check_mesh(&self, mesh: &Mesh) -> Result<()> {
        if mesh.fingerprint() != self.mesh_fingerprint {
            return Err(Error::MeshMismatch);
        }
        Ok(())
    }

    /// Unknown index of velocity component `c` at lattice node `l`, if free.
    pub fn u_dof(&self, l: usize, c: usize) -> Option<usize> {
        let i = self.u_index[2 * l + c];
        (i != NONE).then_some(i)
    }

    pub fn is_fixed(&self, l: usize, c: usize) -> bool {
        self.u_index[2 * l + c] == NONE
    }

    /// Zeroes the strongly constrained velocity components.
    pub fn project(&self, u: &mut [[f64; 2]]) {
        for (l, v) in u.iter_mut().enumerate() {
            for c in 0..2 {
                if self.is_fixed(l, c) {
                    v[c] = 0.0;
                }
            }
        }
    }

    /// Fluid velocity trace on interface element `e` at local coordinate `s`.
    pub fn interface_velocity(&self, u: &[[f64; 2]], e: usize, s: f64) -> [f64; 2] {
        let (l, _) = lagrange2(2.0 * s - 1.0);
        let mut out = [0.0; 2];
        for k in 0..3 {
            let v = u[self.iface_lattice[e][k]];
            out[0] += l[k] * v[0];
            out[1] += l[k] * v[1];
        }
        out
    }

    fn unpack(&self, x: &[f64], mesh: &Mesh, grid: &InterfaceGrid) -> FluidState {
        let mut s = FluidState::rest(mesh, grid);
        for l in 0..s.u.len() {
            for c in 0..2 {
                if let Some(i) = self.u_dof(l, c) {
                    s.u[l][c] = x[i];
                }
            }
        }
        for (n, &i) in self.p_index.iter().enumerate() {
            if i != NONE {
                s.p[n] = x[i];
            }
        }
        for (d, &i) in self.v_index.iter().enumerate() {
            if i != NONE {
                s.v[d] = x[i];
            }
        }
        for (k, &i) in self.l_index.iter().enumerate() {
            if i != NONE {
                s.lambda[k] = x[i];
            }
        }
        s
    }
}

/// Everything the fluid sub-problem of one step depends on.
pub struct FluidInputs<'a> {
    pub u_prev: &'a [[f64; 2]],
    pub v_star: &'a [f64],
    pub map_prev: &'a AleMap,
    pub map_new: &'a AleMap,
    pub w: &'a [[f64; 2]],
    pub geom_new: &'a InterfaceGeometry,
    pub dt: f64,
    pub source: &'a SourceTerm,
    /// Volume force density evaluated at the deformed position and `t^{n+1}`.
    pub body_force: Option<&'a dyn Fn([f64; 2]) -> [f64; 2]>,
}

/// Assembled saddle-point system.
#[derive(Debug, Clone)]
pub struct FluidSystem {
    pub matrix: Triplets,
    pub rhs: Vec<f64>,
    /// Convection block alone (for antisymmetry probes).
    pub convection: Triplets,
    /// Fluid-to-shell tangential slip coupling block alone.
    pub slip_coupling: Triplets,
}

/// Element-level quadrature data reused by assembly and diagnostics.
struct CellQuad {
    phi: [f64; 9],
    grad: [[f64; 2]; 9],
    psi: [f64; 4],
    weight: f64,
}

fn cell_quads(space: &FluidSpace, mesh: &Mesh, c: usize) -> [CellQuad; QP_PER_CELL] {
    let (_, h) = mesh.cell_box(c);
    let area = 0.25 * h[0] * h[1];
    std::array::from_fn(|q| {
        let (phi, g) = &space.q2_ref[q];
        let (psi, _) = &space.q1_ref[q];
        let mut grad = [[0.0; 2]; 9];
        for k in 0..9 {
            grad[k] = [g[k][0] * 2.0 / h[0], g[k][1] * 2.0 / h[1]];
        }
        CellQuad {
            phi: *phi,
            grad,
            psi: *psi,
            weight: space.rule.weights[q] * area,
        }
    })
}

/// Trace functional of one interface quadrature point: coefficients of the
/// fluid and shell unknowns in `(u - v) . e` for a Cartesian direction `e`.
fn interface_trace(
    space: &FluidSpace,
    e: usize,
    s: f64,
    len: f64,
    dir: [f64; 2],
) -> (Vec<(usize, f64)>, Vec<(usize, f64)>) {
    let (l, _) = lagrange2(2.0 * s - 1.0);
    let mut u = Vec::with_capacity(6);
    for k in 0..3 {
        for c in 0..2 {
            let i = space.u_index[2 * space.iface_lattice[e][k] + c];
            if i != NONE {
                u.push((i, l[k] * dir[c]));
            }
        }
    }
    let mut v = Vec::with_capacity(8);
    if space.mode == StructureMode::Elastic {
        let (h, _, _) = hermite(s, len);
        let fv = [space.frame.tangent, space.frame.normal];
        let dofs = InterfaceGrid::element_dofs(e);
        for c in 0..2 {
            let proj = fv[c][0] * dir[0] + fv[c][1] * dir[1];
            for k in 0..4 {
                let i = space.v_index[dofs[c][k]];
                if i != NONE {
                    v.push((i, -h[k] * proj));
                }
            }
        }
    }
    (u, v)
}

/// Assembles the fluid sub-problem.
pub fn assemble_fluid_system(
    mesh: &Mesh,
    grid: &InterfaceGrid,
    space: &FluidSpace,
    inputs: &FluidInputs,
    params: &FluidParams,
    structure: &StructureParams,
    shell: Option<&ShellOperator>,
) -> Result<FluidSystem> {
    space.check_mesh(mesh)?;
    inputs.map_prev.check_mesh(mesh)?;
    inputs.map_new.check_mesh(mesh)?;
    let nq2 = mesh.num_q2_nodes();
    if inputs.u_prev.len() != nq2
        || inputs.w.len() != mesh.num_nodes()
        || inputs.v_star.len() != grid.num_dofs()
    {
        return Err(Error::AssemblyShapeMismatch(
            "previous velocity, ALE velocity or shell velocity has the wrong length".into(),
        ));
    }
    if !(inputs.dt > 0.0) {
        return Err(Error::InvalidArgument(format!("dt must be positive, got {}", inputs.dt)));
    }
    let n = space.num_unknowns();
    let dt = inputs.dt;
    let rho = params.rho_f;
    let mu = params.mu;
    let mut a = Triplets::with_capacity(n, mesh.num_cells() * 480);
    let mut conv = Triplets::with_capacity(n, mesh.num_cells() * 324);
    let mut slip = Triplets::new(n);
    let mut rhs = vec![0.0; n];

    let mut loc = [[0.0; 18]; 18];
    let mut locc = [[0.0; 18]; 18];
    let mut locp = [[0.0; 18]; 4];
    for c in 0..mesh.num_cells() {
        let q2 = mesh.cell_q2(c);
        let q1 = mesh.cell_q1(c);
        let quads = cell_quads(space, mesh, c);
        for r in loc.iter_mut().chain(locc.iter_mut()) {
            *r = [0.0; 18];
        }
        for r in locp.iter_mut() {
            *r = [0.0; 18];
        }
        let mut locr = [0.0; 18];
        for (qi, cq) in quads.iter().enumerate() {
            let idx = c * QP_PER_CELL + qi;
            let j_old = inputs.map_prev.jacobian[idx];
            let j_new = inputs.map_new.jacobian[idx];
            let j_w = match params.jacobian_variant {
                JacobianVariant::New => j_new,
                JacobianVariant::Old => j_old,
            };
            let f = inputs.map_new.grad_a[idx];
            let fi = inputs.map_new.grad_a_inv[idx];
            let cf = cof2(&f);
            let w = cq.weight;
            // transformed gradients g_a = grad(phi_a) F^{-1}
            let mut g = [[0.0; 2]; 9];
            for k in 0..9 {
                let d = cq.grad[k];
                g[k] = [
                    d[0] * fi[0][0] + d[1] * fi[1][0],
                    d[0] * fi[0][1] + d[1] * fi[1][1],
                ];
            }
            let mut uo = [0.0; 2];
            for k in 0..9 {
                let v = inputs.u_prev[q2[k]];
                uo[0] += cq.phi[k] * v[0];
                uo[1] += cq.phi[k] * v[1];
            }
            let mut wq = [0.0; 2];
            for k in 0..4 {
                let v = inputs.w[q1[k]];
                wq[0] += cq.psi[k] * v[0];
                wq[1] += cq.psi[k] * v[1];
            }
            let beta = [uo[0] - wq[0], uo[1] - wq[1]];
            let bg: [f64; 9] = std::array::from_fn(|k| beta[0] * g[k][0] + beta[1] * g[k][1]);
            let m_coef = w * (rho / dt * j_old + 0.5 * rho / dt * (j_new - j_old));
            let c_coef = w * 0.5 * rho * j_w;
            let v_coef = w * 2.0 * mu * j_w;
            for ai in 0..9 {
                for bi in 0..9 {
                    let mass = m_coef * cq.phi[ai] * cq.phi[bi];
                    let cv = c_coef * (bg[bi] * cq.phi[ai] - bg[ai] * cq.phi[bi]);
                    let gg = g[ai][0] * g[bi][0] + g[ai][1] * g[bi][1];
                    for cc in 0..2 {
                        for dd in 0..2 {
                            let mut val = 0.5 * g[ai][dd] * g[bi][cc];
                            if cc == dd {
                                val += 0.5 * gg;
                            }
                            let (r, s) = (2 * ai + cc, 2 * bi + dd);
                            loc[r][s] += v_coef * val;
                            if cc == dd {
                                loc[r][s] += mass;
                                locc[r][s] += cv;
                            }
                        }
                    }
                }
                // previous-step mass
                let mo = w * rho / dt * j_old * cq.phi[ai];
                locr[2 * ai] += mo * uo[0];
                locr[2 * ai + 1] += mo * uo[1];
            }
            if let Some(force) = inputs.body_force {
                let x = mesh.map_point(c, space.rule.points[qi]);
                let mut b = [0.0; 2];
                for k in 0..4 {
                    let d = inputs.map_new.displacement[q1[k]];
                    b[0] += cq.psi[k] * d[0];
                    b[1] += cq.psi[k] * d[1];
                }
                let fv = force([x[0] + b[0], x[1] + b[1]]);
                for ai in 0..9 {
                    locr[2 * ai] += w * j_new * fv[0] * cq.phi[ai];
                    locr[2 * ai + 1] += w * j_new * fv[1] * cq.phi[ai];
                }
            }
            // -int psi_k cof(F) : grad(phi_b e_d)
            for k in 0..4 {
                for bi in 0..9 {
                    let d = cq.grad[bi];
                    for dd in 0..2 {
                        locp[k][2 * bi + dd] -=
                            w * cq.psi[k] * (cf[dd][0] * d[0] + cf[dd][1] * d[1]);
                    }
                }
            }
        }
        let gi: [usize; 18] = std::array::from_fn(|r| space.u_index[2 * q2[r / 2] + r % 2]);
        for r in 0..18 {
            if gi[r] == NONE {
                continue;
            }
            rhs[gi[r]] += locr[r];
            for s in 0..18 {
                if gi[s] == NONE {
                    continue;
                }
                a.push(gi[r], gi[s], loc[r][s] + locc[r][s]);
                conv.push(gi[r], gi[s], locc[r][s]);
            }
        }
        for k in 0..4 {
            let pk = space.p_index[q1[k]];
            if pk == NONE {
                continue;
            }
            for s in 0..18 {
                if gi[s] == NONE {
                    continue;
                }
                a.push(pk, gi[s], locp[k][s]);
                a.push(gi[s], pk, locp[k][s]);
            }
        }
    }
    // rigid-slip friction, frozen-interface friction and dynamic pressure data
    let (xg, wg) = gauss_legendre(3);
    for e in &space.edges {
        let alpha = match (e.tag, space.mode) {
            (FaceTag::RigidSlip, _) => Some(params.alpha_face(e.face)),
            (FaceTag::Elastic, StructureMode::Frozen) => Some(params.alpha),
            _ => None,
        };
        if let Some(alpha) = alpha {
            let t = e.tangent_axis;
            let mut m = [[0.0; 3]; 3];
            for (x, wq) in xg.iter().zip(&wg) {
                let (l, _) = lagrange2(*x);
                for i in 0..3 {
                    for j in 0..3 {
                        m[i][j] += 0.5 * wq * e.length * l[i] * l[j] / alpha;
                    }
                }
            }
            for i in 0..3 {
                let r = space.u_index[2 * e.lattice[i] + t];
                if r == NONE {
                    continue;
                }
                for j in 0..3 {
                    let s = space.u_index[2 * e.lattice[j] + t];
                    if s != NONE {
                        a.push(r, s, m[i][j]);
                    }
                }
            }
        }
    }
    for (face, pbar) in &inputs.source.averages {
        for e in space.edges.iter().filter(|e| e.face == *face) {
            for k in 0..3 {
                for cc in 0..2 {
                    let r = space.u_index[2 * e.lattice[k] + cc];
                    if r != NONE {
                        rhs[r] -= pbar * SIMPSON[k] * e.length * e.normal[cc];
                    }
                }
            }
        }
    }
    if space.mode == StructureMode::Elastic {
        let shell = shell.ok_or_else(|| {
            Error::InvalidArgument("elastic mode requires the shell operator".into())
        })?;
        let rh = structure.inertia() / dt;
        for (d, &r) in space.v_index.iter().enumerate() {
            if r == NONE {
                continue;
            }
            let mut acc = 0.0;
            for (d2, &s) in space.v_index.iter().enumerate() {
                if s != NONE {
                    a.push(r, s, rh * shell.mass[d][d2]);
                }
                acc += shell.mass[d][d2] * inputs.v_star[d2];
            }
            rhs[r] += rh * acc;
        }
        if inputs.geom_new.points.len() != grid.num_elements() * crate::ale::INTERFACE_QP {
            return Err(Error::AssemblyShapeMismatch(
                "interface geometry does not match the interface grid".into(),
            ));
        }
        for p in &inputs.geom_new.points {
            let len = grid.spans[p.element];
            let (tu, tv) = interface_trace(space, p.element, p.s, len, p.tangent);
            let coef = p.weight * p.stretch / params.alpha;
            let all: Vec<(usize, f64)> = tu.iter().chain(&tv).copied().collect();
            for &(r, x) in &all {
                for &(s, y) in &all {
                    a.push(r, s, coef * x * y);
                }
            }
            for &(r, x) in &tu {
                for &(s, y) in &tv {
                    slip.push(r, s, coef * x * y);
                }
            }
            let (nu, nv) = interface_trace(space, p.element, p.s, len, p.normal);
            let lam = [
                (space.l_index[p.element], 1.0 - p.s),
                (space.l_index[p.element + 1], p.s),
            ];
            for (li, lw) in lam {
                if li == NONE {
                    continue;
                }
                for &(s, y) in nu.iter().chain(&nv) {
                    let val = p.weight * lw * y;
                    a.push(li, s, val);
                    a.push(s, li, val);
                }
            }
        }
    }
    Ok(FluidSystem {
        matrix: a,
        rhs,
        convection: conv,
        slip_coupling: slip,
    })
}

/// Residuals and the solution of one fluid solve.
#[derive(Debug, Clone)]
pub struct FluidSolution {
    pub state: FluidState,
    pub relative_residual: f64,
    /// Normalized residual of the incompressibility rows.
    pub div_residual: f64,
    /// Normalized residual of the kinematic normal-constraint rows.
    pub normal_residual: f64,
}

fn block_residual(sys: &FluidSystem, x: &[f64], lo: usize, hi: usize) -> f64 {
    let mut signed = vec![0.0; hi - lo];
    let mut abs = vec![0.0; hi - lo];
    for (r, c, v) in sys.matrix.entries() {
        if r >= lo && r < hi {
            signed[r - lo] += v * x[c];
            abs[r - lo] += (v * x[c]).abs();
        }
    }
    for r in lo..hi {
        signed[r - lo] -= sys.rhs[r];
        abs[r - lo] += sys.rhs[r].abs();
    }
    let s = signed.iter().map(|v| v * v).sum::<f64>().sqrt();
    let a = abs.iter().map(|v| v * v).sum::<f64>().sqrt();
    if a == 0.0 {
        0.0
    } else {
        s / a
    }
}

/// Solves the assembled system with a sparse direct factorization.
pub fn fluid_step(
    mesh: &Mesh,
    grid: &InterfaceGrid,
    space: &FluidSpace,
    system: &FluidSystem,
    solver: &mut LuSolver,
) -> Result<FluidSolution> {
    let rep = solver.solve(&system.matrix, &system.rhs, 1e-10)?;
    let [nu, np, nv, nl] = space.block_sizes();
    let div_residual = block_residual(system, &rep.x, nu, nu + np);
    let lo = nu + np + nv;
    let normal_residual = block_residual(system, &rep.x, lo, lo + nl);
    Ok(FluidSolution {
        state: space.unpack(&rep.x, mesh, grid),
        relative_residual: rep.relative_residual,
        div_residual,
        normal_residual,
    })
}

/// Q2 velocity at every volume quadrature point.
pub fn velocity_at_quadrature(mesh: &Mesh, u: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let rule = volume_rule();
    let basis: Vec<[f64; 9]> = rule.points.iter().map(|p| q2_basis(*p).0).collect();
    let mut out = Vec::with_capacity(mesh.num_cells() * QP_PER_CELL);
    for c in 0..mesh.num_cells() {
        let q2 = mesh.cell_q2(c);
        for phi in &basis {
            let mut v = [0.0; 2];
            for k in 0..9 {
                v[0] += phi[k] * u[q2[k]][0];
                v[1] += phi[k] * u[q2[k]][1];
            }
            out.push(v);
        }
    }
    out
}

/// `rho/2 int J |u|^2` on the reference mesh.
pub fn fluid_kinetic_energy(mesh: &Mesh, u: &[[f64; 2]], jacobian: &[f64], rho: f64) -> f64 {
    let uq = velocity_at_quadrature(mesh, u);
    let w = quadrature_weights(mesh);
    0.5 * rho
        * uq.iter()
            .zip(&w)
            .zip(jacobian)
            .map(|((u, w), j)| w * j * (u[0] * u[0] + u[1] * u[1]))
            .sum::<f64>()
}

/// Terms of the geometric conservation identity; `lhs` and `rhs` should agree.
#[derive(Debug, Clone, Copy)]
pub struct GclTerms {
    pub lhs: f64,
    pub rhs: f64,
    pub scale: f64,
}

impl GclTerms {
    pub fn residual(&self) -> f64 {
        if self.scale == 0.0 {
            0.0
        } else {
            (self.lhs - self.rhs).abs() / self.scale
        }
    }
}

fn gcl_sides(
    u0: &[[f64; 2]],
    u1: &[[f64; 2]],
    j0: &[f64],
    j1: &[f64],
    w: &[f64],
    rho: f64,
) -> ([f64; 2], [f64; 3]) {
    let mut l = [0.0; 2];
    let mut r = [0.0; 3];
    for q in 0..w.len() {
        let d = [u1[q][0] - u0[q][0], u1[q][1] - u0[q][1]];
        let n1 = u1[q][0] * u1[q][0] + u1[q][1] * u1[q][1];
        let n0 = u0[q][0] * u0[q][0] + u0[q][1] * u0[q][1];
        let nd = d[0] * d[0] + d[1] * d[1];
        l[0] += rho * w[q] * j0[q] * (d[0] * u1[q][0] + d[1] * u1[q][1]);
        l[1] += 0.5 * rho * w[q] * (j1[q] - j0[q]) * n1;
        r[0] += 0.5 * rho * w[q] * j1[q] * n1;
        r[1] += 0.5 * rho * w[q] * j0[q] * nd;
        r[2] -= 0.5 * rho * w[q] * j0[q] * n0;
    }
    (l, r)
}

/// GCL identity with Jacobians given directly at the volume quadrature points.
pub fn gcl_identity_terms(
    mesh: &Mesh,
    u_prev: &[[f64; 2]],
    u_new: &[[f64; 2]],
    j_prev: &[f64],
    j_new: &[f64],
    rho: f64,
) -> Result<GclTerms> {
    let nq = mesh.num_cells() * QP_PER_CELL;
    if u_prev.len() != mesh.num_q2_nodes()
        || u_new.len() != mesh.num_q2_nodes()
        || j_prev.len() != nq
        || j_new.len() != nq
    {
        return Err(Error::AssemblyShapeMismatch("GCL inputs have the wrong length".into()));
    }
    let u0 = velocity_at_quadrature(mesh, u_prev);
    let u1 = velocity_at_quadrature(mesh, u_new);
    let w = quadrature_weights(mesh);
    let (l, r) = gcl_sides(&u0, &u1, j_prev, j_new, &w, rho);
    Ok(GclTerms {
        lhs: l[0] + l[1],
        rhs: r[0] + r[1] + r[2],
        scale: l.iter().chain(&r).map(|x| x.abs()).sum(),
    })
}

/// Relative residual of the discrete geometric conservation identity.
pub fn verify_gcl_identity(
    mesh: &Mesh,
    u_prev: &[[f64; 2]],
    u_new: &[[f64; 2]],
    map_prev: &AleMap,
    map_new: &AleMap,
    rho: f64,
) -> Result<f64> {
    map_prev.check_mesh(mesh)?;
    map_new.check_mesh(mesh)?;
    Ok(gcl_identity_terms(mesh, u_prev, u_new, &map_prev.jacobian, &map_new.jacobian, rho)?
        .residual())
}

/// Same identity with the left side on the 3x3 rule and the right side on a
/// 2x2 rule; used to show the check detects inconsistent quadrature.
pub fn verify_gcl_identity_mixed_rules(
    mesh: &Mesh,
    u_prev: &[[f64; 2]],
    u_new: &[[f64; 2]],
    map_prev: &AleMap,
    map_new: &AleMap,
    rho: f64,
) -> Result<f64> {
    map_prev.check_mesh(mesh)?;
    map_new.check_mesh(mesh)?;
    let eval = |rule: &QuadRule| {
        let mut u0 = Vec::new();
        let mut u1 = Vec::new();
        let mut j0 = Vec::new();
        let mut j1 = Vec::new();
        let mut w = Vec::new();
        for c in 0..mesh.num_cells() {
            let q2 = mesh.cell_q2(c);
            let (_, h) = mesh.cell_box(c);
            for (p, wq) in rule.points.iter().zip(&rule.weights) {
                let (phi, _) = q2_physical(mesh, c, *p);
                let mut a = [0.0; 2];
                let mut b = [0.0; 2];
                for k in 0..9 {
                    for d in 0..2 {
                        a[d] += phi[k] * u_prev[q2[k]][d];
                        b[d] += phi[k] * u_new[q2[k]][d];
                    }
                }
                u0.push(a);
                u1.push(b);
                j0.push(crate::fe::det2(&map_prev.grad_a_at(mesh, c, *p)));
                j1.push(crate::fe::det2(&map_new.grad_a_at(mesh, c, *p)));
                w.push(wq * 0.25 * h[0] * h[1]);
            }
        }
        gcl_sides(&u0, &u1, &j0, &j1, &w, rho)
    };
    let (l, _) = eval(&QuadRule::tensor(3));
    let (_, r) = eval(&QuadRule::tensor(2));
    let t = GclTerms {
        lhs: l[0] + l[1],
        rhs: r[0] + r[1] + r[2],
        scale: l.iter().chain(&r).map(|x| x.abs()).sum(),
    };
    Ok(t.residual())
}

/// Parts of the discrete dissipation of one step.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct Dissipation {
    /// `dt mu int J D:D`.
    pub viscous: f64,
    /// `dt/2 sum_i 1/alpha_i int u_tau^2` over rigid-slip faces.
    pub wall: f64,
    /// `dt/alpha int |u_tau - v_tau|^2 S` on the interface.
    pub interface: f64,
    /// Interface term without the stretch weight.
    pub interface_unweighted: f64,
}

impl Dissipation {
    pub fn total(&self) -> f64 {
        self.viscous + self.wall + self.interface
    }
}

/// Discrete dissipation `D` of a fluid state. `viscous_jacobian` is the
/// Jacobian weighting the viscous term in the assembly.
#[allow(clippy::too_many_arguments)]
pub fn dissipation(
    mesh: &Mesh,
    grid: &InterfaceGrid,
    space: &FluidSpace,
    state: &FluidState,
    map: &AleMap,
    viscous_jacobian: &[f64],
    geom: &InterfaceGeometry,
    dt: f64,
    params: &FluidParams,
) -> Result<Dissipation> {
    let tg = crate::ale::transformed_gradient(mesh, &state.u, map)?;
    let w = quadrature_weights(mesh);
    let viscous = dt
        * params.mu
        * tg.iter()
            .zip(&w)
            .zip(viscous_jacobian)
            .map(|((g, w), j)| w * j * frob2(&sym(g)))
            .sum::<f64>();
    let (xg, wg) = gauss_legendre(3);
    let mut wall = 0.0;
    for e in &space.edges {
        let alpha = match (e.tag, space.mode) {
            (FaceTag::RigidSlip, _) => params.alpha_face(e.face),
            (FaceTag::Elastic, StructureMode::Frozen) => params.alpha,
            _ => continue,
        };
        let scale = if e.tag == FaceTag::Elastic { 1.0 } else { 0.5 };
        for (x, wq) in xg.iter().zip(&wg) {
            let (l, _) = lagrange2(*x);
            let ut: f64 = (0..3).map(|k| l[k] * state.u[e.lattice[k]][e.tangent_axis]).sum();
            wall += scale * dt / alpha * 0.5 * wq * e.length * ut * ut;
        }
    }
    let mut interface = 0.0;
    let mut interface_unweighted = 0.0;
    if space.mode == StructureMode::Elastic {
        for p in &geom.points {
            let u = space.interface_velocity(&state.u, p.element, p.s);
            let (vv, _, _) = grid.eval(&state.v, p.element, p.s);
            let vc = grid.frame.to_cartesian(vv);
            let jump = (u[0] - vc[0]) * p.tangent[0] + (u[1] - vc[1]) * p.tangent[1];
            interface += dt / params.alpha * p.weight * p.stretch * jump * jump;
            interface_unweighted += dt / params.alpha * p.weight * jump * jump;
        }
    }
    Ok(Dissipation {
        viscous,
        wall,
        interface,
        interface_unweighted,
    })
}

/// Energy quantities entering the fluid energy inequality of one step.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct FluidEnergyTerms {
    pub e_half: f64,
    pub e_full: f64,
    /// `rho_F/2 int J^n |u^{n+1} - u^n|^2`.
    pub du: f64,
    /// `rho_S h/2 ||v^{n+1} - v^{n+1/2}||^2`.
    pub dv: f64,
    pub d: f64,
}

/// `E^{n+1/2} + c dt ||R||^2 - (E^{n+1} + du + dv + D)`; nonnegative for a
/// genuine step.
pub fn verify_fluid_energy_inequality(t: &FluidEnergyTerms, r_norm: f64, dt: f64, c: f64) -> f64 {
    t.e_half + c * dt * r_norm * r_norm - (t.e_full + t.du + t.dv + t.d)
}

/// Nodal velocity interpolating a closed-form field on the Q2 lattice.
pub fn interpolate_velocity(mesh: &Mesh, f: impl Fn([f64; 2]) -> [f64; 2]) -> Vec<[f64; 2]> {
    mesh.q2_coords().into_iter().map(f).collect()
}

/// Reference divergence rows `int psi_k cof(F) : grad u` for every pressure
/// vertex, used for the initial-data compatibility check.
pub fn discrete_divergence(mesh: &Mesh, u: &[[f64; 2]], map: &AleMap) -> Result<(Vec<f64>, f64)> {
    map.check_mesh(mesh)?;
    let rule = volume_rule();
    let mut out = vec![0.0; mesh.num_nodes()];
    let mut scale = vec![0.0; mesh.num_nodes()];
    for c in 0..mesh.num_cells() {
        let q2 = mesh.cell_q2(c);
        let q1 = mesh.cell_q1(c);
        let (_, h) = mesh.cell_box(c);
        for (qi, (p, wq)) in rule.points.iter().zip(&rule.weights).enumerate() {
            let (_, g) = q2_physical(mesh, c, *p);
            let (psi, _) = q1_physical(mesh, c, *p);
            let cf = cof2(&map.grad_a[c * QP_PER_CELL + qi]);
            let w = wq * 0.25 * h[0] * h[1];
            let mut div = 0.0;
            let mut ab = 0.0;
            for k in 0..9 {
                for d in 0..2 {
                    let t = u[q2[k]][d] * (cf[d][0] * g[k][0] + cf[d][1] * g[k][1]);
                    div += t;
                    ab += t.abs();
                }
            }
            for k in 0..4 {
                out[q1[k]] += w * psi[k] * div;
                scale[q1[k]] += w * psi[k] * ab;
            }
        }
    }
    let s = scale.iter().map(|v| v * v).sum::<f64>().sqrt();
    Ok((out, s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ale::{interface_geometry, AleMap};
    use crate::geometry::{build_reference_mesh, interface_grid, ReferencePolygon};
    use crate::shell::assemble_shell_operator;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn setup(n: usize, mode: StructureMode) -> (Mesh, InterfaceGrid, FluidSpace) {
        let m = build_reference_mesh(&ReferencePolygon::unit_square_default(), n, n).unwrap();
        let g = interface_grid(&m).unwrap();
        let s = FluidSpace::new(&m, &g, mode).unwrap();
        (m, g, s)
    }

    fn random_field(m: &Mesh, rng: &mut ChaCha8Rng) -> Vec<[f64; 2]> {
        (0..m.num_q2_nodes())
            .map(|_| [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)])
            .collect()
    }

    #[test]
    fn pressure_averages() {
        assert_eq!(PressureProfile::Constant { value: 2.5 }.step_average(0.3, 0.4), 2.5);
        let s = PressureProfile::Sinusoidal {
            amplitude: 1.0,
            omega: 1.0,
            phase: 0.0,
            offset: 0.0,
        };
        let avg = s.step_average(0.0, 0.1);
        assert!((avg - (1.0 - 0.1f64.cos()) / 0.1).abs() < 1e-15);
        assert!((avg - 0.049958).abs() < 1e-6);
        let r = PressureProfile::Ramp {
            value: 2.0,
            duration: 1.0,
        };
        assert!((r.step_average(0.0, 0.5) - 0.5).abs() < 1e-14);
        let data = BoundaryData::default();
        assert!(source_term(&data, 3, 0.1).is_zero());
    }

    #[test]
    fn default_space_blocks() {
        let (m, g, s) = setup(4, StructureMode::Elastic);
        // left/right fix u_y, bottom fixes u_y, top free
        let fixed = (0..m.num_q2_nodes())
            .flat_map(|l| (0..2).map(move |c| (l, c)))
            .filter(|&(l, c)| s.is_fixed(l, c))
            .count();
        assert_eq!(fixed, 9 + 9 + 7);
        let [_, np, nv, nl] = s.block_sizes();
        assert_eq!(np, m.num_nodes());
        assert_eq!(nv, g.free_dofs().len());
        assert_eq!(nl, g.num_nodes() - 2);
    }

    fn rest_inputs_system(mode: StructureMode) -> (Mesh, InterfaceGrid, FluidSpace, FluidSystem) {
        let (m, g, s) = setup(4, mode);
        let map = AleMap::identity(&m);
        let geom = interface_geometry(&g, &vec![0.0; g.num_dofs()]).unwrap();
        let u = vec![[0.0; 2]; m.num_q2_nodes()];
        let w = vec![[0.0; 2]; m.num_nodes()];
        let v = vec![0.0; g.num_dofs()];
        let src = SourceTerm::default();
        let inputs = FluidInputs {
            u_prev: &u,
            v_star: &v,
            map_prev: &map,
            map_new: &map,
            w: &w,
            geom_new: &geom,
            dt: 0.01,
            source: &src,
            body_force: None,
        };
        let sp = StructureParams::default();
        let op = assemble_shell_operator(&sp, &g).unwrap();
        let sys =
            assemble_fluid_system(&m, &g, &s, &inputs, &FluidParams::default(), &sp, Some(&op))
                .unwrap();
        (m, g, s, sys)
    }

    #[test]
    fn rest_input_gives_rest_output() {
        for mode in [StructureMode::Elastic, StructureMode::Frozen] {
            let (m, g, s, sys) = rest_inputs_system(mode);
            assert!(sys.rhs.iter().all(|&x| x == 0.0));
            let mut lu = LuSolver::new();
            let sol = fluid_step(&m, &g, &s, &sys, &mut lu).unwrap();
            assert!(sol.state.u.iter().all(|v| *v == [0.0, 0.0]));
            assert!(sol.state.v.iter().all(|v| *v == 0.0));
        }
    }

    #[test]
    fn convection_block_is_antisymmetric() {
        let (m, g, s) = setup(6, StructureMode::Elastic);
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let eta = g.interpolate(|z| {
            let q = (std::f64::consts::PI * z).sin();
            ([0.0, 0.05 * q * q], [0.0, 0.0])
        });
        let map_new = crate::ale::harmonic_extension(&eta, &m, &g).unwrap();
        let map_prev = AleMap::identity(&m);
        let w = crate::ale::ale_velocity(&map_new, &map_prev, 0.1).unwrap();
        let geom = interface_geometry(&g, &eta).unwrap();
        let u = random_field(&m, &mut rng);
        let v = vec![0.0; g.num_dofs()];
        let src = SourceTerm::default();
        let inputs = FluidInputs {
            u_prev: &u,
            v_star: &v,
            map_prev: &map_prev,
            map_new: &map_new,
            w: &w,
            geom_new: &geom,
            dt: 0.1,
            source: &src,
            body_force: None,
        };
        let sp = StructureParams::default();
        let op = assemble_shell_operator(&sp, &g).unwrap();
        let sys =
            assemble_fluid_system(&m, &g, &s, &inputs, &FluidParams::default(), &sp, Some(&op))
                .unwrap();
        for _ in 0..10 {
            let xi: Vec<f64> = (0..s.num_unknowns()).map(|_| rng.random_range(-1.0..1.0)).collect();
            let q = sys.convection.bilinear(&xi, &xi);
            let scale: f64 = sys.convection.entries().map(|(r, c, v)| (xi[r] * v * xi[c]).abs()).sum();
            assert!(q.abs() <= 1e-12 * scale.max(1.0), "{q} vs {scale}");
        }
    }

    #[test]
    fn slip_coupling_scales_inversely_with_alpha() {
        let (m, g, s) = setup(4, StructureMode::Elastic);
        let map = AleMap::identity(&m);
        let eta = g.interpolate(|z| {
            let q = (std::f64::consts::PI * z).sin();
            ([0.01 * q * q, 0.03 * q * q], [0.0, 0.0])
        });
        let geom = interface_geometry(&g, &eta).unwrap();
        let u = vec![[0.0; 2]; m.num_q2_nodes()];
        let w = vec![[0.0; 2]; m.num_nodes()];
        let v = vec![0.0; g.num_dofs()];
        let src = SourceTerm::default();
        let inputs = FluidInputs {
            u_prev: &u,
            v_star: &v,
            map_prev: &map,
            map_new: &map,
            w: &w,
            geom_new: &geom,
            dt: 0.1,
            source: &src,
            body_force: None,
        };
        let sp = StructureParams::default();
        let op = assemble_shell_operator(&sp, &g).unwrap();
        let norm = |alpha: f64| {
            let p = FluidParams {
                alpha,
                ..Default::default()
            };
            let sys = assemble_fluid_system(&m, &g, &s, &inputs, &p, &sp, Some(&op)).unwrap();
            sys.slip_coupling.entries().map(|(_, _, v)| v * v).sum::<f64>().sqrt()
        };
        let ratio = norm(1.0) / norm(10.0);
        assert!((ratio - 10.0).abs() < 1e-10);
    }

    #[test]
    fn gcl_identity_holds_for_random_inputs() {
        let (m, _, _) = setup(5, StructureMode::Elastic);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let nq = m.num_cells() * QP_PER_CELL;
        let u0 = random_field(&m, &mut rng);
        let u1 = random_field(&m, &mut rng);
        let j0: Vec<f64> = (0..nq).map(|_| rng.random_range(0.2..2.0)).collect();
        let j1: Vec<f64> = (0..nq).map(|_| rng.random_range(0.2..2.0)).collect();
        let t = gcl_identity_terms(&m, &u0, &u1, &j0, &j1, 1.3).unwrap();
        assert!(t.residual() <= 1e-12);
        let same = gcl_identity_terms(&m, &u0, &u0, &j0, &j0, 1.0).unwrap();
        assert!(same.residual() <= 1e-15);
    }

    #[test]
    fn mixed_rules_are_detected() {
        let (m, _, _) = setup(4, StructureMode::Elastic);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let u0 = random_field(&m, &mut rng);
        let u1 = random_field(&m, &mut rng);
        let b: Vec<[f64; 2]> = m
            .nodes
            .iter()
            .map(|p| [0.05 * (3.0 * p[1]).sin(), 0.05 * (2.0 * p[0]).cos() * p[1]])
            .collect();
        let map0 = AleMap::identity(&m);
        let map1 = AleMap::from_displacement(&m, b).unwrap();
        assert!(verify_gcl_identity(&m, &u0, &u1, &map0, &map1, 1.0).unwrap() <= 1e-12);
        assert!(verify_gcl_identity_mixed_rules(&m, &u0, &u1, &map0, &map1, 1.0).unwrap() > 1e-8);
    }

    #[test]
    fn dissipation_of_rotation_and_rest() {
        let (m, g, s) = setup(4, StructureMode::Frozen);
        let map = AleMap::identity(&m);
        let geom = interface_geometry(&g, &vec![0.0; g.num_dofs()]).unwrap();
        let rest = FluidState::rest(&m, &g);
        let p = FluidParams::default();
        let d = dissipation(&m, &g, &s, &rest, &map, &map.jacobian, &geom, 0.1, &p).unwrap();
        assert_eq!(d.total(), 0.0);
        let mut st = rest.clone();
        st.u = interpolate_velocity(&m, |x| [-(x[1] - 0.5), x[0] - 0.5]);
        let d = dissipation(&m, &g, &s, &st, &map, &map.jacobian, &geom, 0.1, &p).unwrap();
        assert!(d.viscous.abs() < 1e-14);
        assert!(d.wall > 0.0);
    }
}
