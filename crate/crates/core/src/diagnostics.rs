//! Time-shift norms, power-law fits, the piecewise-linear displacement
//! interpolant and time-step refinement studies.

use serde::Serialize;

use crate::ale::quadrature_weights;
use crate::config::SimConfig;
use crate::driver::{initialize, run, run_simulation, Simulation, Snapshot, StopReason, Trajectory};
use crate::error::{Error, Result};
use crate::fluid::velocity_at_quadrature;
use crate::geometry::{build_reference_mesh, interface_grid, Mesh};
use crate::shell::{assemble_shell_operator, assemble_zero_bending, ShellOperator, StructureParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ShiftField {
    /// Fluid velocity in `L^2(Omega)`.
    U,
    /// Shell velocity in `L^2(Gamma)`.
    V,
    /// Intermediate shell velocity in `L^2(Gamma)`.
    VStar,
    /// Piecewise-constant displacement in the `H^2(Gamma)` seminorm.
    Eta,
    /// Piecewise-linear displacement in the `H^2(Gamma)` seminorm.
    EtaTilde,
}

impl ShiftField {
    pub const ALL: [ShiftField; 5] = [Self::U, Self::V, Self::VStar, Self::Eta, Self::EtaTilde];

    pub fn name(self) -> &'static str {
        match self {
            Self::U => "u",
            Self::V => "v",
            Self::VStar => "v_star",
            Self::Eta => "eta",
            Self::EtaTilde => "eta_tilde",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|f| f.name() == s)
    }
}

/// Spatial norms used by the shift computations: the reference-domain
/// velocity mass and the shell mass and `H^2` seminorm.
pub struct Norms {
    mesh: Mesh,
    weights: Vec<f64>,
    shell_l2: ShellOperator,
    shell_h2: ShellOperator,
}

impl Norms {
    pub fn new(mesh: &Mesh) -> Result<Self> {
        let grid = interface_grid(mesh)?;
        let seminorm = StructureParams {
            bending: [1.0, 1.0],
            ..Default::default()
        };
        Ok(Self {
            mesh: mesh.clone(),
            weights: quadrature_weights(mesh),
            shell_l2: assemble_zero_bending(&grid),
            shell_h2: assemble_shell_operator(&seminorm, &grid)?,
        })
    }

    pub fn for_config(config: &SimConfig) -> Result<Self> {
        let mesh = build_reference_mesh(&config.polygon()?, config.domain.nx, config.domain.ny)?;
        Self::new(&mesh)
    }

    /// `||a - b||^2_{L^2(Omega)}` for nodal Q2 velocities.
    pub fn velocity_sq(&self, a: &[[f64; 2]], b: &[[f64; 2]]) -> f64 {
        let d: Vec<[f64; 2]> = a.iter().zip(b).map(|(x, y)| [x[0] - y[0], x[1] - y[1]]).collect();
        velocity_at_quadrature(&self.mesh, &d)
            .iter()
            .zip(&self.weights)
            .map(|(u, w)| w * (u[0] * u[0] + u[1] * u[1]))
            .sum()
    }

    pub fn shell_l2_sq(&self, a: &[f64], b: &[f64]) -> f64 {
        let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
        self.shell_l2.m_form(&d, &d)
    }

    pub fn shell_h2_sq(&self, a: &[f64], b: &[f64]) -> f64 {
        let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
        self.shell_h2.k_form(&d, &d)
    }

    fn snapshot_sq(&self, field: ShiftField, a: &Snapshot, b: &Snapshot) -> f64 {
        match field {
            ShiftField::U => self.velocity_sq(&a.u, &b.u),
            ShiftField::V => self.shell_l2_sq(&a.v, &b.v),
            ShiftField::VStar => self.shell_l2_sq(&a.v_star, &b.v_star),
            ShiftField::Eta | ShiftField::EtaTilde => self.shell_h2_sq(&a.eta, &b.eta),
        }
    }
}

/// `||T_h f - f||_{L^2(h, T; X)}` for the piecewise-constant (or, for
/// `EtaTilde`, piecewise-linear) trajectory, evaluated exactly.
///
/// The piecewise-constant function takes the value `f^n` on
/// `((n-1) dt, n dt]`, `n = 1..N`.
pub fn time_shift_norm(traj: &Trajectory, norms: &Norms, field: ShiftField, h: f64) -> Result<f64> {
    let duration = traj.duration();
    if !(h >= 0.0) || !h.is_finite() {
        return Err(Error::InvalidArgument(format!("shift must be nonnegative, got {h}")));
    }
    if h >= duration {
        return Err(Error::ShiftTooLarge { h, duration });
    }
    if h == 0.0 {
        return Ok(0.0);
    }
    let sq = match field {
        ShiftField::EtaTilde => linear_shift_sq(traj, norms, h),
        _ => constant_shift_sq(traj, |a, b| norms.snapshot_sq(field, a, b), h),
    };
    Ok(sq.max(0.0).sqrt())
}

/// Splits `h = m dt + r` with `0 <= r < dt`, snapping `r` to zero when `h`
/// is an integer multiple of `dt` up to rounding.
fn split_shift(h: f64, dt: f64) -> (usize, f64) {
    let q = h / dt;
    let m = q.round();
    if (q - m).abs() <= 1e-9 * q.max(1.0) {
        return (m as usize, 0.0);
    }
    let m = q.floor();
    (m as usize, h - m * dt)
}

fn constant_shift_sq<F: Fn(&Snapshot, &Snapshot) -> f64>(traj: &Trajectory, dist: F, h: f64) -> f64 {
    let dt = traj.dt;
    let s = &traj.snapshots;
    let n_last = s.len() - 1;
    let (m, r) = split_shift(h, dt);
    let mut total = 0.0;
    for n in 1..=n_last {
        // t - h falls in the interval of index n - m for a length dt - r
        if n > m && dt - r > 0.0 {
            total += (dt - r) * dist(&s[n], &s[n - m]);
        }
        // and in the interval of index n - m - 1 for a length r
        if r > 0.0 && n > m + 1 {
            total += r * dist(&s[n], &s[n - m - 1]);
        }
    }
    total
}

fn linear_shift_sq(traj: &Trajectory, norms: &Norms, h: f64) -> f64 {
    let view = InterpolantView::new(traj);
    let dt = traj.dt;
    let t_end = traj.duration();
    let n_last = traj.snapshots.len() - 1;
    let mut cuts: Vec<f64> = (0..=n_last).map(|n| n as f64 * dt).collect();
    cuts.extend((0..=n_last).map(|n| n as f64 * dt + h));
    cuts.retain(|&t| t >= h && t <= t_end);
    cuts.push(h);
    cuts.push(t_end);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * dt);
    let diff = |t: f64| -> Vec<f64> {
        let a = view.eta_tilde(t - h);
        let b = view.eta_tilde(t);
        a.iter().zip(&b).map(|(x, y)| x - y).collect()
    };
    let zero = vec![0.0; traj.snapshots[0].eta.len()];
    let mut total = 0.0;
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b - a <= 0.0 {
            continue;
        }
        // the difference is linear in t on each piece, so Simpson is exact
        let fa = norms.shell_h2_sq(&diff(a), &zero);
        let fm = norms.shell_h2_sq(&diff(0.5 * (a + b)), &zero);
        let fb = norms.shell_h2_sq(&diff(b), &zero);
        total += (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    }
    total
}

/// Read-only view of the piecewise-linear displacement interpolant and its
/// time derivative.
pub struct InterpolantView<'a> {
    traj: &'a Trajectory,
}

impl<'a> InterpolantView<'a> {
    pub fn new(traj: &'a Trajectory) -> Self {
        Self { traj }
    }

    /// Interpolant at `t = (n + theta) dt`, `theta` in `[0, 1]`.
    pub fn at(&self, n: usize, theta: f64) -> Vec<f64> {
        let s = &self.traj.snapshots;
        if theta == 0.0 || n + 1 >= s.len() {
            return s[n.min(s.len() - 1)].eta.clone();
        }
        s[n].eta
            .iter()
            .zip(&s[n + 1].eta)
            .map(|(a, b)| a + theta * (b - a))
            .collect()
    }

    pub fn eta_tilde(&self, t: f64) -> Vec<f64> {
        let dt = self.traj.dt;
        let last = self.traj.snapshots.len() - 1;
        let q = (t / dt).clamp(0.0, last as f64);
        let n = (q.floor() as usize).min(last);
        self.at(n, q - n as f64)
    }

    /// Time derivative on the open interval `(n dt, (n + 1) dt)`.
    pub fn derivative(&self, n: usize) -> Vec<f64> {
        let s = &self.traj.snapshots;
        let dt = self.traj.dt;
        s[n + 1].eta.iter().zip(&s[n].eta).map(|(b, a)| (b - a) / dt).collect()
    }
}

/// One `(field, h, value)` record.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ShiftValue {
    pub field: ShiftField,
    pub h: f64,
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerFit {
    pub c: f64,
    pub beta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShiftReport {
    pub values: Vec<ShiftValue>,
    pub fits: Vec<(ShiftField, PowerFit)>,
}

impl ShiftReport {
    pub fn fit(&self, field: ShiftField) -> Option<PowerFit> {
        self.fits.iter().find(|(f, _)| *f == field).map(|(_, p)| *p)
    }
}

/// Least-squares fit of `log value = log C + beta log h`.
pub fn sqrt_fit(hs: &[f64], values: &[f64]) -> Result<PowerFit> {
    if hs.len() != values.len() {
        return Err(Error::InvalidArgument("h and value lists differ in length".into()));
    }
    if hs.len() < 4 {
        return Err(Error::DegenerateFit(format!("need at least 4 points, got {}", hs.len())));
    }
    if values.iter().all(|&v| v == 0.0) {
        return Err(Error::DegenerateFit("all values are zero".into()));
    }
    if values.iter().any(|&v| !(v > 0.0)) || hs.iter().any(|&h| !(h > 0.0)) {
        return Err(Error::DegenerateFit("nonpositive value or shift".into()));
    }
    let x: Vec<f64> = hs.iter().map(|h| h.ln()).collect();
    let y: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    if sxx <= 0.0 {
        return Err(Error::DegenerateFit("shifts are not distinct".into()));
    }
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let beta = sxy / sxx;
    Ok(PowerFit {
        c: (my - beta * mx).exp(),
        beta,
    })
}

/// Shift norms for every field over `hs`, with a power-law fit per field.
pub fn shift_report(
    traj: &Trajectory,
    norms: &Norms,
    fields: &[ShiftField],
    hs: &[f64],
) -> Result<ShiftReport> {
    let mut values = Vec::new();
    let mut fits = Vec::new();
    for &field in fields {
        let vals = hs
            .iter()
            .map(|&h| time_shift_norm(traj, norms, field, h))
            .collect::<Result<Vec<f64>>>()?;
        for (&h, &value) in hs.iter().zip(&vals) {
            values.push(ShiftValue { field, h, value });
        }
        if hs.len() >= 4 {
            fits.push((field, sqrt_fit(hs, &vals)?));
        }
    }
    Ok(ShiftReport { values, fits })
}

/// Cauchy differences between consecutive time steps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RefinementRow {
    /// Coarser step of the pair.
    pub dt: f64,
    pub dt_fine: f64,
    /// `||u_dt - u_{dt'}||_{L^2(0,T;L^2(Omega))}`.
    pub diff_u: f64,
    /// `||eta_dt - eta_{dt'}||_{L^inf(0,T;L^2(Gamma))}`.
    pub diff_eta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RefinementTable {
    pub rows: Vec<RefinementRow>,
}

impl RefinementTable {
    /// True when `diff_u` strictly decreases down the table.
    pub fn strictly_decreasing(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].diff_u < w[0].diff_u)
    }
}

struct Stored {
    dt: f64,
    u: Vec<Vec<[f64; 2]>>,
    eta: Vec<Vec<f64>>,
}

fn check_completed(sim: &Simulation) -> Result<()> {
    match sim.stop_reason() {
        Some(StopReason::Completed) | None => Ok(()),
        Some(_) => Err(Error::RunStopped {
            step: sim.step,
            detail: sim.message().unwrap_or("run did not complete").to_string(),
        }),
    }
}

/// Runs `config` at every step of `dt_list` (strictly decreasing, each
/// dividing the horizon) and compares consecutive levels, aligned through
/// their piecewise-constant representations. Only two levels are held in
/// memory at a time.
pub fn refinement_study(config: &SimConfig, dt_list: &[f64]) -> Result<RefinementTable> {
    if dt_list.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::InvalidArgument("dt list must be strictly decreasing".into()));
    }
    if dt_list.len() < 2 {
        return Ok(RefinementTable { rows: Vec::new() });
    }
    let t_end = config.time.t_end;
    for &dt in dt_list {
        let steps = t_end / dt;
        if (steps - steps.round()).abs() > 1e-9 * steps.max(1.0) {
            return Err(Error::InvalidArgument(format!(
                "dt = {dt} does not divide the horizon {t_end}"
            )));
        }
    }
    let norms = Norms::for_config(config)?;
    let mut rows = Vec::new();
    let mut prev: Option<Stored> = None;
    for &dt in dt_list {
        let mut cfg = config.clone();
        cfg.time.dt = dt;
        let mut sim = initialize(&cfg)?;
        check_completed(&sim)?;
        let steps = cfg.num_steps();
        let keep = dt != *dt_list.last().unwrap();
        let mut stored = Stored {
            dt,
            u: Vec::new(),
            eta: Vec::new(),
        };
        let mut diff_u = 0.0;
        let mut diff_eta: f64 = 0.0;
        run_simulation(&mut sim, steps, |s| {
            let k = s.step;
            if k > 0 {
                if let Some(c) = &prev {
                    // fine interval ((k-1) dt, k dt] lies in coarse interval n
                    let mid = (k as f64 - 0.5) * dt;
                    let n = ((mid / c.dt).ceil() as usize).clamp(1, c.u.len() - 1);
                    diff_u += dt * norms.velocity_sq(&s.fluid.u, &c.u[n]);
                    diff_eta = diff_eta.max(norms.shell_l2_sq(&s.structure.eta, &c.eta[n]));
                }
            }
            if keep {
                stored.u.push(s.fluid.u.clone());
                stored.eta.push(s.structure.eta.clone());
            }
        });
        check_completed(&sim)?;
        if let Some(c) = &prev {
            rows.push(RefinementRow {
                dt: c.dt,
                dt_fine: dt,
                diff_u: diff_u.sqrt(),
                diff_eta: diff_eta.sqrt(),
            });
        }
        prev = Some(stored);
    }
    Ok(RefinementTable { rows })
}

/// Runs `config` and evaluates the shift report over `hs` (a fresh trajectory).
pub fn shifts_for_config(config: &SimConfig, hs: &[f64]) -> Result<(Trajectory, ShiftReport)> {
    let out = run(config)?;
    let norms = Norms::for_config(config)?;
    let report = shift_report(&out.trajectory, &norms, &ShiftField::ALL, hs)?;
    Ok((out.trajectory, report))
}
