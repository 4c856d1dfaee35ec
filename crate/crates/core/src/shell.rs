//! Clamped Euler-Bernoulli shell on cubic Hermite elements and the structure
//! half-step of the splitting scheme.

use crate::error::{Error, Result};
use crate::fe::{gauss_legendre, hermite};
use crate::geometry::InterfaceGrid;
use crate::sparse::dense_cholesky_solve;

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct StructureParams {
    pub rho_s: f64,
    pub h: f64,
    /// Bending rigidity of the tangential and normal components.
    pub bending: [f64; 2],
    pub coercivity_c: f64,
}

impl Default for StructureParams {
    fn default() -> Self {
        Self {
            rho_s: 1.0,
            h: 1.0,
            bending: [1.0, 1.0],
            coercivity_c: 1.0,
        }
    }
}

impl StructureParams {
    pub fn inertia(&self) -> f64 {
        self.rho_s * self.h
    }

    pub fn validate(&self) -> Result<()> {
        let checks = [
            ("structure.rho_s", self.rho_s),
            ("structure.h", self.h),
            ("structure.bending[0]", self.bending[0]),
            ("structure.bending[1]", self.bending[1]),
            ("structure.coercivity_c", self.coercivity_c),
        ];
        for (key, v) in checks {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Validation {
                    key: key.into(),
                    constraint: "positivity".into(),
                });
            }
        }
        Ok(())
    }
}

/// Hermite DOF vectors of the shell. Clamped entries are kept at zero.
#[derive(Debug, Clone, PartialEq)]
pub struct StructureState {
    pub eta: Vec<f64>,
    pub v: Vec<f64>,
    pub v_star: Vec<f64>,
}

impl StructureState {
    pub fn rest(grid: &InterfaceGrid) -> Self {
        let n = grid.num_dofs();
        Self {
            eta: vec![0.0; n],
            v: vec![0.0; n],
            v_star: vec![0.0; n],
        }
    }

    /// Validates the clamped conditions and zeroes round-off in clamped entries.
    pub fn new(grid: &InterfaceGrid, mut eta: Vec<f64>, mut v: Vec<f64>) -> Result<Self> {
        let n = grid.num_dofs();
        if eta.len() != n || v.len() != n {
            return Err(Error::AssemblyShapeMismatch(format!(
                "structure vectors must have {n} entries"
            )));
        }
        let tol = 1e-12 * grid.length().max(1.0);
        for (name, x) in [("eta", &mut eta), ("v", &mut v)] {
            for d in 0..n {
                if grid.is_clamped_dof(d) {
                    if x[d].abs() > tol {
                        return Err(Error::ClampViolatedInput(format!(
                            "{name}[{d}] = {:e}",
                            x[d]
                        )));
                    }
                    x[d] = 0.0;
                }
            }
        }
        let v_star = v.clone();
        Ok(Self { eta, v, v_star })
    }
}

/// Assembled shell stiffness `K` and mass `M` (dense, full DOF numbering,
/// clamped rows and columns zero).
#[derive(Debug, Clone)]
pub struct ShellOperator {
    free: Vec<usize>,
    pub stiffness: Vec<Vec<f64>>,
    pub mass: Vec<Vec<f64>>,
}

fn assemble(grid: &InterfaceGrid, bending: [f64; 2]) -> ShellOperator {
    let n = grid.num_dofs();
    let mut k = vec![vec![0.0; n]; n];
    let mut m = vec![vec![0.0; n]; n];
    let (x, w) = gauss_legendre(5);
    for e in 0..grid.num_elements() {
        let len = grid.spans[e];
        let dofs = InterfaceGrid::element_dofs(e);
        for (xi, wi) in x.iter().zip(&w) {
            let s = 0.5 * (xi + 1.0);
            let dz = 0.5 * wi * len;
            let (h0, _, h2) = hermite(s, len);
            for c in 0..2 {
                for a in 0..4 {
                    for b in 0..4 {
                        k[dofs[c][a]][dofs[c][b]] += dz * bending[c] * h2[a] * h2[b];
                        m[dofs[c][a]][dofs[c][b]] += dz * h0[a] * h0[b];
                    }
                }
            }
        }
    }
    for d in 0..n {
        if grid.is_clamped_dof(d) {
            for j in 0..n {
                k[d][j] = 0.0;
                k[j][d] = 0.0;
                m[d][j] = 0.0;
                m[j][d] = 0.0;
            }
        }
    }
    ShellOperator {
        free: grid.free_dofs(),
        stiffness: k,
        mass: m,
    }
}

/// Assembles the bending operator and checks positive definiteness on the
/// clamped space.
pub fn assemble_shell_operator(params: &StructureParams, grid: &InterfaceGrid) -> Result<ShellOperator> {
    if grid.num_elements() < 2 {
        return Err(Error::InvalidArgument(
            "shell operator needs at least 2 elements".into(),
        ));
    }
    let op = assemble(grid, params.bending);
    let kf = op.restrict(&op.stiffness);
    if dense_cholesky_solve(&kf, &vec![1.0; kf.len()]).is_none() {
        return Err(Error::SingularOperator(
            "stiffness is not positive definite on the clamped space".into(),
        ));
    }
    Ok(op)
}

/// Operator with zero bending rigidity (free drift); diagnostics only.
pub fn assemble_zero_bending(grid: &InterfaceGrid) -> ShellOperator {
    assemble(grid, [0.0, 0.0])
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn matvec(a: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
    a.iter().map(|row| dot(row, x)).collect()
}

impl ShellOperator {
    pub fn num_dofs(&self) -> usize {
        self.mass.len()
    }

    pub fn free_dofs(&self) -> &[usize] {
        &self.free
    }

    fn restrict(&self, a: &[Vec<f64>]) -> Vec<Vec<f64>> {
        self.free
            .iter()
            .map(|&i| self.free.iter().map(|&j| a[i][j]).collect())
            .collect()
    }

    pub fn apply_k(&self, x: &[f64]) -> Vec<f64> {
        matvec(&self.stiffness, x)
    }

    pub fn apply_m(&self, x: &[f64]) -> Vec<f64> {
        matvec(&self.mass, x)
    }

    /// `<K a, b>`.
    pub fn k_form(&self, a: &[f64], b: &[f64]) -> f64 {
        dot(&self.apply_k(a), b)
    }

    /// `<M a, b>`.
    pub fn m_form(&self, a: &[f64], b: &[f64]) -> f64 {
        dot(&self.apply_m(a), b)
    }
}

/// Structure half-step with zero load.
pub fn structure_step(
    op: &ShellOperator,
    state: &StructureState,
    dt: f64,
    params: &StructureParams,
) -> Result<StructureState> {
    structure_step_loaded(op, state, dt, params, None)
}

/// Structure half-step with an optional load vector (Hermite-tested force).
pub fn structure_step_loaded(
    op: &ShellOperator,
    state: &StructureState,
    dt: f64,
    params: &StructureParams,
    load: Option<&[f64]>,
) -> Result<StructureState> {
    if !(dt > 0.0) {
        return Err(Error::InvalidArgument(format!("dt must be positive, got {dt}")));
    }
    let n = op.num_dofs();
    if state.eta.len() != n || state.v.len() != n {
        return Err(Error::AssemblyShapeMismatch(format!(
            "structure state does not match operator with {n} DOFs"
        )));
    }
    let rh = params.inertia();
    let mv = op.apply_m(&state.v);
    let ke = op.apply_k(&state.eta);
    let free = &op.free;
    let a: Vec<Vec<f64>> = free
        .iter()
        .map(|&i| {
            free.iter()
                .map(|&j| rh * op.mass[i][j] + dt * dt * op.stiffness[i][j])
                .collect()
        })
        .collect();
    let b: Vec<f64> = free
        .iter()
        .map(|&i| rh * mv[i] - dt * ke[i] + load.map_or(0.0, |f| dt * f[i]))
        .collect();
    let x = dense_cholesky_solve(&a, &b)
        .ok_or_else(|| Error::SolverFailure("structure matrix is not positive definite".into()))?;
    let mut v_star = vec![0.0; n];
    for (k, &i) in free.iter().enumerate() {
        v_star[i] = x[k];
    }
    let eta = state
        .eta
        .iter()
        .zip(&v_star)
        .map(|(e, v)| e + dt * v)
        .collect();
    Ok(StructureState {
        eta,
        v: state.v.clone(),
        v_star,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VelocitySelector {
    V,
    VStar,
}

/// `(kinetic, elastic)` structure energy.
pub fn structure_energy(
    op: &ShellOperator,
    params: &StructureParams,
    state: &StructureState,
    which: VelocitySelector,
) -> (f64, f64) {
    let v = match which {
        VelocitySelector::V => &state.v,
        VelocitySelector::VStar => &state.v_star,
    };
    (
        0.5 * params.inertia() * op.m_form(v, v),
        0.5 * op.k_form(&state.eta, &state.eta),
    )
}

/// Relative residual of the exact energy identity of the structure half-step.
pub fn verify_structure_identity(
    op: &ShellOperator,
    params: &StructureParams,
    pre: &StructureState,
    post: &StructureState,
) -> f64 {
    let rh = params.inertia();
    let dv: Vec<f64> = post.v_star.iter().zip(&pre.v).map(|(a, b)| a - b).collect();
    let de: Vec<f64> = post.eta.iter().zip(&pre.eta).map(|(a, b)| a - b).collect();
    let lhs = 0.5 * rh * (op.m_form(&post.v_star, &post.v_star) + op.m_form(&dv, &dv))
        + 0.5 * (op.k_form(&post.eta, &post.eta) + op.k_form(&de, &de));
    let rhs = 0.5 * rh * op.m_form(&pre.v, &pre.v) + 0.5 * op.k_form(&pre.eta, &pre.eta);
    (lhs - rhs).abs() / rhs.abs().max(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_reference_mesh, interface_grid, ReferencePolygon};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn grid(n: usize) -> InterfaceGrid {
        let m = build_reference_mesh(&ReferencePolygon::unit_square_default(), n, 2).unwrap();
        interface_grid(&m).unwrap()
    }

    fn random_state(g: &InterfaceGrid, rng: &mut ChaCha8Rng) -> StructureState {
        let mut draw = || -> Vec<f64> {
            (0..g.num_dofs())
                .map(|d| if g.is_clamped_dof(d) { 0.0 } else { rng.random_range(-1.0..1.0) })
                .collect()
        };
        let eta = draw();
        let v = draw();
        StructureState::new(g, eta, v).unwrap()
    }

    #[test]
    fn beam_polynomial_energy() {
        // z^2 (1 - z)^2 is cubic-free; its second derivative is 12 z^2 - 12 z + 2
        for n in [4, 8] {
            let g = grid(n);
            let op = assemble_shell_operator(&StructureParams::default(), &g).unwrap();
            let eta = g.interpolate(|z| {
                (
                    [0.0, z * z * (1.0 - z) * (1.0 - z)],
                    [0.0, 2.0 * z * (1.0 - z) * (1.0 - 2.0 * z)],
                )
            });
            let e = op.k_form(&eta, &eta);
            let tol = if n == 8 { 2e-3 } else { 1e-2 };
            assert!((e - 0.8).abs() < tol, "n={n} e={e}");
        }
        let g = grid(64);
        let op = assemble_shell_operator(&StructureParams::default(), &g).unwrap();
        let eta = g.interpolate(|z| {
            (
                [0.0, z * z * (1.0 - z) * (1.0 - z)],
                [0.0, 2.0 * z * (1.0 - z) * (1.0 - 2.0 * z)],
            )
        });
        assert!((op.k_form(&eta, &eta) - 0.8).abs() < 1e-5);
        assert_eq!(op.k_form(&vec![0.0; g.num_dofs()], &vec![0.0; g.num_dofs()]), 0.0);
    }

    #[test]
    fn operator_is_symmetric() {
        let g = grid(7);
        let op = assemble_shell_operator(&StructureParams::default(), &g).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let a = random_state(&g, &mut rng).eta;
            let b = random_state(&g, &mut rng).eta;
            let (x, y) = (op.k_form(&a, &b), op.k_form(&b, &a));
            assert!((x - y).abs() <= 1e-13 * x.abs().max(1.0));
        }
    }

    #[test]
    fn rest_state_stays_at_rest() {
        let g = grid(4);
        let p = StructureParams::default();
        let op = assemble_shell_operator(&p, &g).unwrap();
        let s = structure_step(&op, &StructureState::rest(&g), 0.1, &p).unwrap();
        assert!(s.eta.iter().chain(&s.v_star).all(|&x| x == 0.0));
        assert_eq!(structure_energy(&op, &p, &s, VelocitySelector::V), (0.0, 0.0));
    }

    #[test]
    fn zero_bending_drifts_freely() {
        let g = grid(5);
        let p = StructureParams::default();
        let op = assemble_zero_bending(&g);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let s0 = random_state(&g, &mut rng);
        let dt = 0.3;
        let s1 = structure_step(&op, &s0, dt, &p).unwrap();
        for i in 0..g.num_dofs() {
            assert!((s1.v_star[i] - s0.v[i]).abs() < 1e-12);
            assert!((s1.eta[i] - s0.eta[i] - dt * s0.v[i]).abs() < 1e-12);
        }
    }

    fn gauss_pivot(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
        let n = b.len();
        for k in 0..n {
            let p = (k..n).max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs())).unwrap();
            a.swap(k, p);
            b.swap(k, p);
            for i in (k + 1)..n {
                let f = a[i][k] / a[k][k];
                for j in k..n {
                    a[i][j] -= f * a[k][j];
                }
                b[i] -= f * b[k];
            }
        }
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let s: f64 = ((i + 1)..n).map(|j| a[i][j] * x[j]).sum();
            x[i] = (b[i] - s) / a[i][i];
        }
        x
    }

    #[test]
    fn step_matches_dense_oracle() {
        let g = grid(6);
        let p = StructureParams {
            rho_s: 2.0,
            h: 0.5,
            bending: [0.7, 1.3],
            coercivity_c: 0.7,
        };
        let op = assemble_shell_operator(&p, &g).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let s0 = random_state(&g, &mut rng);
        let dt = 0.05;
        let s1 = structure_step(&op, &s0, dt, &p).unwrap();
        let free = g.free_dofs();
        let a: Vec<Vec<f64>> = free
            .iter()
            .map(|&i| free.iter().map(|&j| p.rho_s * p.h * op.mass[i][j] + dt * dt * op.stiffness[i][j]).collect())
            .collect();
        let b: Vec<f64> = free
            .iter()
            .map(|&i| {
                (0..g.num_dofs())
                    .map(|j| p.rho_s * p.h * op.mass[i][j] * s0.v[j] - dt * op.stiffness[i][j] * s0.eta[j])
                    .sum()
            })
            .collect();
        let x = gauss_pivot(a, b);
        let scale = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for (k, &i) in free.iter().enumerate() {
            assert!((s1.v_star[i] - x[k]).abs() <= 1e-11 * scale);
        }
    }

    #[test]
    fn identity_residual_and_sensitivity() {
        let g = grid(8);
        let p = StructureParams::default();
        let op = assemble_shell_operator(&p, &g).unwrap();
        let rest = StructureState::rest(&g);
        let s = structure_step(&op, &rest, 0.1, &p).unwrap();
        assert_eq!(verify_structure_identity(&op, &p, &rest, &s), 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for dt in [1e-1, 1e-3, 1e-6] {
            let s0 = random_state(&g, &mut rng);
            let s1 = structure_step(&op, &s0, dt, &p).unwrap();
            assert!(verify_structure_identity(&op, &p, &s0, &s1) <= 1e-10);
            let mut bad = s1.clone();
            for d in op.free_dofs() {
                bad.eta[*d] += 1e-3;
            }
            assert!(verify_structure_identity(&op, &p, &s0, &bad) > 1e-6);
        }
    }

    #[test]
    fn energy_is_quadratic_and_matches_mass_form() {
        let g = grid(4);
        let p = StructureParams {
            rho_s: 3.0,
            h: 0.5,
            ..Default::default()
        };
        let op = assemble_shell_operator(&p, &g).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let s = random_state(&g, &mut rng);
        let (k, e) = structure_energy(&op, &p, &s, VelocitySelector::V);
        let dense: f64 = (0..g.num_dofs())
            .flat_map(|i| (0..g.num_dofs()).map(move |j| (i, j)))
            .map(|(i, j)| s.v[i] * op.mass[i][j] * s.v[j])
            .sum();
        assert!((k - 0.75 * dense).abs() < 1e-13 * k.max(1.0));
        let s2 = StructureState {
            eta: s.eta.iter().map(|x| 2.0 * x).collect(),
            v: s.v.iter().map(|x| 2.0 * x).collect(),
            v_star: s.v_star.clone(),
        };
        let (k2, e2) = structure_energy(&op, &p, &s2, VelocitySelector::V);
        assert!((k2 - 4.0 * k).abs() < 1e-12 * k2 && (e2 - 4.0 * e).abs() < 1e-12 * e2);
    }

    #[test]
    fn clamped_entries_stay_zero() {
        let g = grid(5);
        let p = StructureParams::default();
        let op = assemble_shell_operator(&p, &g).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let mut s = random_state(&g, &mut rng);
        for _ in 0..50 {
            s = structure_step(&op, &s, 0.01, &p).unwrap();
            s.v = s.v_star.clone();
        }
        for d in 0..g.num_dofs() {
            if g.is_clamped_dof(d) {
                assert_eq!(s.eta[d], 0.0);
            }
        }
        let mut eta = vec![0.0; g.num_dofs()];
        eta[InterfaceGrid::dof(0, 0, 1)] = 0.2;
        assert!(matches!(
            StructureState::new(&g, eta, vec![0.0; g.num_dofs()]),
            Err(Error::ClampViolatedInput(_))
        ));
    }

    #[test]
    fn one_element_grid_is_rejected() {
        let mut g = grid(2);
        g.z.truncate(2);
        g.spans.truncate(1);
        g.clamped.truncate(2);
        g.nodes.truncate(2);
        assert!(assemble_shell_operator(&StructureParams::default(), &g).is_err());
    }
}
