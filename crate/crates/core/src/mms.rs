//! Manufactured-solution convergence studies on the fixed unit square.
//!
//! The exact velocity is the curl of `psi = g(t) X(x) F(y)` with
//! `X = x^2 (1-x)^2` and `F = y^2 (1-y) + a y^2 (1-y)^2`. It vanishes on the
//! left, right and bottom walls, has zero normal component on the top face,
//! and `a = 2 + 1/(2 alpha mu)` makes it satisfy the Navier slip law there.
//! The pressure is `g(t) x y`.

use serde::Serialize;

use crate::ale::volume_rule;
use crate::config::{DomainConfig, InterfaceProfile, SimConfig};
use crate::driver::{initialize, run_simulation, Simulation};
use crate::error::{Error, Result};
use crate::fe::q1_basis;
use crate::fluid::{velocity_at_quadrature, StructureMode};
use crate::geometry::FaceTag;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MmsCase {
    pub rho: f64,
    pub mu: f64,
    pub alpha: f64,
    /// Steady (`g = 1`) or oscillating (`g = sin t`) amplitude.
    pub steady: bool,
}

impl Default for MmsCase {
    fn default() -> Self {
        Self {
            rho: 1.0,
            mu: 1.0,
            alpha: 1.0,
            steady: true,
        }
    }
}

fn xs(x: f64) -> [f64; 4] {
    [
        x * x * (1.0 - x) * (1.0 - x),
        2.0 * x - 6.0 * x * x + 4.0 * x * x * x,
        2.0 - 12.0 * x + 12.0 * x * x,
        -12.0 + 24.0 * x,
    ]
}

impl MmsCase {
    fn a(&self) -> f64 {
        2.0 + 1.0 / (2.0 * self.alpha * self.mu)
    }

    fn fs(&self, y: f64) -> [f64; 4] {
        let a = self.a();
        [
            y * y * (1.0 - y) + a * y * y * (1.0 - y) * (1.0 - y),
            2.0 * y - 3.0 * y * y + a * (2.0 * y - 6.0 * y * y + 4.0 * y * y * y),
            2.0 - 6.0 * y + a * (2.0 - 12.0 * y + 12.0 * y * y),
            -6.0 + a * (-12.0 + 24.0 * y),
        ]
    }

    fn g(&self, t: f64) -> (f64, f64) {
        if self.steady {
            (1.0, 0.0)
        } else {
            (t.sin(), t.cos())
        }
    }

    pub fn velocity(&self, t: f64, p: [f64; 2]) -> [f64; 2] {
        let (g, _) = self.g(t);
        let x = xs(p[0]);
        let f = self.fs(p[1]);
        [g * x[0] * f[1], -g * x[1] * f[0]]
    }

    pub fn pressure(&self, t: f64, p: [f64; 2]) -> f64 {
        self.g(t).0 * p[0] * p[1]
    }

    /// `rho (du/dt + (u . grad) u) - mu lap u + grad p`.
    pub fn force(&self, t: f64, p: [f64; 2]) -> [f64; 2] {
        let (g, dg) = self.g(t);
        let x = xs(p[0]);
        let f = self.fs(p[1]);
        let dudt = [dg * x[0] * f[1], -dg * x[1] * f[0]];
        let conv = [
            g * g * x[0] * x[1] * (f[1] * f[1] - f[0] * f[2]),
            g * g * f[0] * f[1] * (x[1] * x[1] - x[0] * x[2]),
        ];
        let lap = [
            g * (x[2] * f[1] + x[0] * f[3]),
            -g * (x[3] * f[0] + x[1] * f[2]),
        ];
        let grad_p = [g * p[1], g * p[0]];
        [
            self.rho * (dudt[0] + conv[0]) - self.mu * lap[0] + grad_p[0],
            self.rho * (dudt[1] + conv[1]) - self.mu * lap[1] + grad_p[1],
        ]
    }

    /// Fixed-domain configuration: no-slip on three walls, frozen slip face on top.
    pub fn config(&self, n: usize, dt: f64, t_end: f64) -> SimConfig {
        let mut c = SimConfig::default();
        c.domain = DomainConfig {
            tags: vec![FaceTag::NoSlip, FaceTag::NoSlip, FaceTag::Elastic, FaceTag::NoSlip],
            nx: n,
            ny: n,
            ..Default::default()
        };
        c.structure.mode = StructureMode::Frozen;
        c.structure.initial_displacement = InterfaceProfile::Zero;
        c.structure.initial_velocity = InterfaceProfile::Zero;
        c.fluid.rho_f = self.rho;
        c.fluid.mu = self.mu;
        c.fluid.alpha = self.alpha;
        c.time.dt = dt;
        c.time.t_end = t_end;
        c
    }
}

/// Relative `L^2` errors of the discrete velocity and pressure at time `t`.
pub fn mms_errors(sim: &Simulation, case: &MmsCase, t: f64) -> (f64, f64) {
    let mesh = &sim.mesh;
    let rule = volume_rule();
    let uq = velocity_at_quadrature(mesh, &sim.fluid.u);
    let (mut eu, mut nu, mut ep, mut np) = (0.0, 0.0, 0.0, 0.0);
    for c in 0..mesh.num_cells() {
        let (_, size) = mesh.cell_box(c);
        let q1 = mesh.cell_q1(c);
        for (k, (p, w)) in rule.points.iter().zip(&rule.weights).enumerate() {
            let wq = w * 0.25 * size[0] * size[1];
            let x = mesh.map_point(c, *p);
            let ue = case.velocity(t, x);
            let uh = uq[c * rule.points.len() + k];
            eu += wq * ((uh[0] - ue[0]).powi(2) + (uh[1] - ue[1]).powi(2));
            nu += wq * (ue[0] * ue[0] + ue[1] * ue[1]);
            let psi = q1_basis(*p).0;
            let ph: f64 = (0..4).map(|i| psi[i] * sim.fluid.p[q1[i]]).sum();
            let pe = case.pressure(t, x);
            ep += wq * (ph - pe).powi(2);
            np += wq * pe * pe;
        }
    }
    ((eu / nu).sqrt(), (ep / np.max(1e-300)).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MmsRow {
    pub study: &'static str,
    pub h: f64,
    pub dt: f64,
    pub error_u: f64,
    pub error_p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MmsStudy {
    pub rows: Vec<MmsRow>,
    /// Least-squares slope of `log error_u` against `log h` (space) or `log dt` (time).
    pub order_u: f64,
    pub order_p: f64,
}

fn slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

fn solve_case(case: &MmsCase, n: usize, dt: f64, steps: usize) -> Result<(f64, f64)> {
    let cfg = case.config(n, dt, dt * steps as f64);
    let mut sim = initialize(&cfg)?;
    let c = *case;
    sim.set_body_force(Box::new(move |t, x| c.force(t, x)));
    run_simulation(&mut sim, steps, |_| {});
    if sim.step != steps {
        return Err(Error::RunStopped {
            step: sim.step,
            detail: sim.message().unwrap_or("manufactured run stopped").to_string(),
        });
    }
    Ok(mms_errors(&sim, case, sim.time()))
}

/// Steady manufactured solution on `n x n` meshes, converged by large-step
/// backward Euler (a Picard iteration on the steady problem).
pub fn mms_spatial(case: &MmsCase, ns: &[usize]) -> Result<MmsStudy> {
    if ns.len() < 2 {
        return Err(Error::InvalidArgument("need at least two meshes".into()));
    }
    let case = MmsCase {
        steady: true,
        ..*case
    };
    let mut rows = Vec::new();
    for &n in ns {
        let (eu, ep) = solve_case(&case, n, 1e4, 8)?;
        rows.push(MmsRow {
            study: "space",
            h: 1.0 / n as f64,
            dt: 1e4,
            error_u: eu,
            error_p: ep,
        });
    }
    finish(rows, |r| r.h)
}

/// Time-dependent manufactured solution on a fixed mesh, errors at `t_end`.
pub fn mms_temporal(case: &MmsCase, n: usize, dts: &[f64], t_end: f64) -> Result<MmsStudy> {
    if dts.len() < 2 {
        return Err(Error::InvalidArgument("need at least two time steps".into()));
    }
    let case = MmsCase {
        steady: false,
        ..*case
    };
    let mut rows = Vec::new();
    for &dt in dts {
        let steps = (t_end / dt).round() as usize;
        let (eu, ep) = solve_case(&case, n, dt, steps)?;
        rows.push(MmsRow {
            study: "time",
            h: 1.0 / n as f64,
            dt,
            error_u: eu,
            error_p: ep,
        });
    }
    finish(rows, |r| r.dt)
}

fn finish(rows: Vec<MmsRow>, x: impl Fn(&MmsRow) -> f64) -> Result<MmsStudy> {
    let xs: Vec<f64> = rows.iter().map(&x).collect();
    let eu: Vec<f64> = rows.iter().map(|r| r.error_u).collect();
    let ep: Vec<f64> = rows.iter().map(|r| r.error_p).collect();
    if eu.iter().chain(&ep).any(|e| !(*e > 0.0)) {
        return Err(Error::DegenerateFit("zero or non-finite error".into()));
    }
    Ok(MmsStudy {
        order_u: slope(&xs, &eu),
        order_p: slope(&xs, &ep),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_field_is_divergence_free_and_satisfies_walls() {
        let case = MmsCase::default();
        let e = 1e-6;
        for &(x, y) in &[(0.3, 0.4), (0.71, 0.2), (0.5, 0.93)] {
            let ux = (case.velocity(0.0, [x + e, y])[0] - case.velocity(0.0, [x - e, y])[0]) / (2.0 * e);
            let vy = (case.velocity(0.0, [x, y + e])[1] - case.velocity(0.0, [x, y - e])[1]) / (2.0 * e);
            assert!((ux + vy).abs() < 1e-8);
        }
        for s in [0.1, 0.5, 0.8] {
            assert_eq!(case.velocity(0.0, [0.0, s]), [0.0, 0.0]);
            assert_eq!(case.velocity(0.0, [1.0, s]), [0.0, 0.0]);
            assert_eq!(case.velocity(0.0, [s, 0.0]), [0.0, 0.0]);
            assert!(case.velocity(0.0, [s, 1.0])[1].abs() < 1e-15);
            // mu du/dy + u/alpha = 0 on the slip face
            let u = case.velocity(0.0, [s, 1.0])[0];
            let dudy = (case.velocity(0.0, [s, 1.0])[0] - case.velocity(0.0, [s, 1.0 - e])[0]) / e;
            assert!((case.mu * dudy + u / case.alpha).abs() < 1e-5);
        }
    }

    #[test]
    fn force_matches_finite_differences() {
        let case = MmsCase {
            steady: false,
            mu: 0.7,
            rho: 1.3,
            alpha: 2.0,
        };
        let (t, p) = (0.4, [0.37, 0.61]);
        let e = 1e-4;
        let u = |t: f64, x: f64, y: f64| case.velocity(t, [x, y]);
        let f = case.force(t, p);
        for d in 0..2 {
            let dt = (u(t + e, p[0], p[1])[d] - u(t - e, p[0], p[1])[d]) / (2.0 * e);
            let dx = (u(t, p[0] + e, p[1])[d] - u(t, p[0] - e, p[1])[d]) / (2.0 * e);
            let dy = (u(t, p[0], p[1] + e)[d] - u(t, p[0], p[1] - e)[d]) / (2.0 * e);
            let c = u(t, p[0], p[1])[d];
            let lap = (u(t, p[0] + e, p[1])[d] + u(t, p[0] - e, p[1])[d] + u(t, p[0], p[1] + e)[d]
                + u(t, p[0], p[1] - e)[d]
                - 4.0 * c)
                / (e * e);
            let vel = u(t, p[0], p[1]);
            let gp = if d == 0 { t.sin() * p[1] } else { t.sin() * p[0] };
            let expect = case.rho * (dt + vel[0] * dx + vel[1] * dy) - case.mu * lap + gp;
            assert!((f[d] - expect).abs() < 1e-5, "{} vs {}", f[d], expect);
        }
    }
}
