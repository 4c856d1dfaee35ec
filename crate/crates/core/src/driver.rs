//! Lie splitting time loop: structure half-step, ALE update, fluid half-step,
//! with the per-step energy ledger and admissibility guards.

use serde::Serialize;

use crate::ale::{
    ale_velocity, check_admissible, interface_geometry, AleMap, DomainStatus, HarmonicExtension,
};
use crate::config::SimConfig;
use crate::error::{Error, IncompatibilityReason, Result};
use crate::fluid::{
    assemble_fluid_system, discrete_divergence, dissipation, fluid_kinetic_energy, fluid_step,
    interpolate_velocity, source_term, verify_fluid_energy_inequality, verify_gcl_identity,
    velocity_at_quadrature, BoundaryData, FluidEnergyTerms, FluidInputs, FluidParams, FluidSpace,
    FluidState, JacobianVariant, StructureMode,
};
use crate::geometry::{build_reference_mesh, interface_grid, InterfaceGrid, Mesh};
use crate::shell::{
    assemble_shell_operator, structure_step, verify_structure_identity, ShellOperator,
    StructureParams, StructureState,
};
use crate::sparse::LuSolver;

pub const STRUCT_TOL: f64 = 1e-10;
pub const GCL_TOL: f64 = 1e-12;
pub const ENERGY_SLACK: f64 = 1e-10;
pub const CONSTRAINT_TOL: f64 = 1e-9;

/// One ledger row. Row 0 holds the initial energy.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct LedgerRow {
    pub step: usize,
    pub t: f64,
    pub e_half: f64,
    pub e_full: f64,
    pub d: f64,
    pub gcl_res: f64,
    pub struct_res: f64,
    pub fluid_margin: f64,
    pub j_min: f64,
    pub inj_margin: f64,
    pub div_res: f64,
    pub normal_res: f64,
    /// `E^{n+1/2} - E^n`, nonpositive.
    pub structure_slack: f64,
    pub d_unweighted: f64,
    pub r_norm: f64,
    /// `rho_F int J^n |u^{n+1} - u^n|^2`.
    pub du_sq: f64,
    /// `rho_S h ||v^{n+1} - v^{n+1/2}||^2`.
    pub dv_sq: f64,
    /// `<K (eta^{n+1} - eta^n), eta^{n+1} - eta^n>`.
    pub deta_sq: f64,
    /// `rho_S h ||v^{n+1/2} - v^n||^2`.
    pub dvstar_sq: f64,
}

pub const LEDGER_HEADER: &str =
    "step,t,E_half,E_full,D,gcl_res,struct_res,fluid_margin,j_min,inj_margin,div_res,normal_res";

impl LedgerRow {
    pub fn csv(&self) -> String {
        let f = |x: f64| format!("{x:.16e}");
        [
            self.step.to_string(),
            f(self.t),
            f(self.e_half),
            f(self.e_full),
            f(self.d),
            f(self.gcl_res),
            f(self.struct_res),
            f(self.fluid_margin),
            f(self.j_min),
            f(self.inj_margin),
            f(self.div_res),
            f(self.normal_res),
        ]
        .join(",")
    }
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct EnergyLedger {
    pub rows: Vec<LedgerRow>,
    /// True once any asserted bound has been breached.
    pub failed: bool,
    pub failures: Vec<String>,
}

impl EnergyLedger {
    pub fn e0(&self) -> f64 {
        self.rows.first().map_or(0.0, |r| r.e_full)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::with_capacity(256 * (self.rows.len() + 1));
        s.push_str(LEDGER_HEADER);
        s.push('\n');
        for r in &self.rows {
            s.push_str(&r.csv());
            s.push('\n');
        }
        s
    }

    fn fail(&mut self, msg: String) {
        self.failed = true;
        if self.failures.len() < 20 {
            self.failures.push(msg);
        }
    }

    /// Accumulated `[du, dv, deta, dvstar]` squared differences.
    pub fn telescoped_sums(&self) -> [f64; 4] {
        let mut s = [0.0; 4];
        for r in self.rows.iter().skip(1) {
            s[0] += r.du_sq;
            s[1] += r.dv_sq;
            s[2] += r.deta_sq;
            s[3] += r.dvstar_sq;
        }
        s
    }

    /// `sum_n dt ||R^{n+1}||^2`.
    pub fn forcing_sum(&self, dt: f64) -> f64 {
        self.rows.iter().skip(1).map(|r| dt * r.r_norm * r.r_norm).fold(0.0, |a, b| a + b)
    }

    /// Empirical constant in `max_n E^n <= E^0 + C sum dt ||R||^2`.
    pub fn c_tilde(&self, dt: f64) -> f64 {
        let rs = self.forcing_sum(dt);
        if rs == 0.0 {
            return 0.0;
        }
        let emax = self.rows.iter().map(|r| r.e_full).fold(f64::NEG_INFINITY, f64::max);
        (emax - self.e0()).max(0.0) / rs
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Completed,
    DomainDegenerate,
    SolverFailure,
}

/// Piecewise-constant trajectory sample at `t = step * dt`.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub step: usize,
    pub t: f64,
    pub eta: Vec<f64>,
    pub v: Vec<f64>,
    /// `v^{n-1/2}` from the structure half-step ending at this sample.
    pub v_star: Vec<f64>,
    pub u: Vec<[f64; 2]>,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub dt: f64,
    pub snapshots: Vec<Snapshot>,
    pub stop_reason: StopReason,
    pub stop_step: usize,
    pub final_status: DomainStatus,
    pub message: Option<String>,
}

impl Trajectory {
    pub fn duration(&self) -> f64 {
        self.dt * (self.snapshots.len().saturating_sub(1)) as f64
    }
}

/// Solver state of a run. Holds the mesh, operators and the current
/// `(structure, fluid, map)` triple.
pub struct Simulation {
    pub config: SimConfig,
    pub mesh: Mesh,
    pub grid: InterfaceGrid,
    pub space: FluidSpace,
    pub shell: Option<ShellOperator>,
    pub structure_params: StructureParams,
    pub fluid_params: FluidParams,
    pub boundary: BoundaryData,
    extension: HarmonicExtension,
    solver: LuSolver,
    pub structure: StructureState,
    pub fluid: FluidState,
    pub map: AleMap,
    pub status: DomainStatus,
    pub step: usize,
    pub ledger: EnergyLedger,
    stop: Option<StopReason>,
    message: Option<String>,
    body_force: Option<Box<dyn Fn(f64, [f64; 2]) -> [f64; 2]>>,
}

fn incompatible(reason: IncompatibilityReason, detail: impl Into<String>) -> Error {
    Error::IncompatibleInitialData {
        reason,
        detail: detail.into(),
    }
}

/// Builds the run and checks the compatibility of the initial data.
pub fn initialize(config: &SimConfig) -> Result<Simulation> {
    config.validate()?;
    let poly = config.polygon()?;
    let mesh = build_reference_mesh(&poly, config.domain.nx, config.domain.ny)?;
    let grid = interface_grid(&mesh)?;
    let mode = config.structure.mode;
    let space = FluidSpace::new(&mesh, &grid, mode)?;
    let sp = config.structure.params();
    let fp = config.fluid.params();
    let shell = match mode {
        StructureMode::Elastic => Some(assemble_shell_operator(&sp, &grid)?),
        StructureMode::Frozen => None,
    };
    let extension = HarmonicExtension::new(&mesh)?;
    let len = grid.length();
    let eta0 = grid.interpolate(|z| config.structure.initial_displacement.eval(z, len));
    let v0 = grid.interpolate(|z| config.structure.initial_velocity.eval(z, len));
    if mode == StructureMode::Frozen
        && !(config.structure.initial_displacement.is_zero()
            && config.structure.initial_velocity.is_zero())
    {
        return Err(incompatible(
            IncompatibilityReason::FrozenStructureMotion,
            "frozen-structure runs need zero initial displacement and velocity",
        ));
    }
    let structure = StructureState::new(&grid, eta0, v0)
        .map_err(|e| incompatible(IncompatibilityReason::Clamped, e.to_string()))?;
    let map = extension.extend(&mesh, &grid, &structure.eta)?;
    let status = check_admissible(&map, config.guards.c_omega, config.guards.j_floor);
    let mut fluid = FluidState::rest(&mesh, &grid);
    fluid.u = interpolate_velocity(&mesh, |x| config.fluid.initial_velocity.eval(x));
    space.project(&mut fluid.u);
    fluid.v = structure.v.clone();
    let mut sim = Simulation {
        config: config.clone(),
        mesh,
        grid,
        space,
        shell,
        structure_params: sp,
        fluid_params: fp,
        boundary: config.boundary.data(),
        extension,
        solver: LuSolver::new(),
        structure,
        fluid,
        map,
        status,
        step: 0,
        ledger: EnergyLedger::default(),
        stop: None,
        message: None,
        body_force: None,
    };
    let degenerate =
        !status.admissible || status.sup_grad_b > 0.5 * config.guards.c_omega;
    if degenerate {
        sim.stop = Some(StopReason::DomainDegenerate);
        sim.message = Some(format!(
            "initial map outside the admissible window (j_min = {:e}, sup|grad B| = {:e})",
            status.j_min, status.sup_grad_b
        ));
    } else {
        sim.check_initial_fluid()?;
    }
    sim.write_initial_row();
    Ok(sim)
}

impl Simulation {
    fn check_initial_fluid(&self) -> Result<()> {
        let (div, scale) = discrete_divergence(&self.mesh, &self.fluid.u, &self.map)?;
        let dn = div.iter().map(|v| v * v).sum::<f64>().sqrt();
        if dn > 1e-10 * scale.max(1e-300) && dn > 1e-14 {
            return Err(incompatible(
                IncompatibilityReason::Divergence,
                format!("discrete divergence of u0 has norm {dn:e}"),
            ));
        }
        if self.space.mode == StructureMode::Elastic {
            let geom = interface_geometry(&self.grid, &self.structure.eta)?;
            let mut worst: f64 = 0.0;
            let mut scale: f64 = 0.0;
            for p in &geom.points {
                let u = self.space.interface_velocity(&self.fluid.u, p.element, p.s);
                let (v, _, _) = self.grid.eval(&self.structure.v, p.element, p.s);
                let v = self.grid.frame.to_cartesian(v);
                let un = u[0] * p.normal[0] + u[1] * p.normal[1];
                let vn = v[0] * p.normal[0] + v[1] * p.normal[1];
                worst = worst.max((un - vn).abs());
                scale = scale.max(un.abs()).max(vn.abs());
            }
            if worst > 1e-10 * scale.max(1.0) {
                return Err(incompatible(
                    IncompatibilityReason::NormalTrace,
                    format!("u0 . nu0 and v0 . nu0 differ by {worst:e}"),
                ));
            }
        }
        Ok(())
    }

    fn energy_parts(&self, u: &[[f64; 2]], jac: &[f64], v: &[f64], eta: &[f64]) -> f64 {
        let fluid = fluid_kinetic_energy(&self.mesh, u, jac, self.fluid_params.rho_f);
        match &self.shell {
            Some(op) => {
                fluid
                    + 0.5 * self.structure_params.inertia() * op.m_form(v, v)
                    + 0.5 * op.k_form(eta, eta)
            }
            None => fluid,
        }
    }

    /// Total energy of the current state.
    pub fn energy(&self) -> f64 {
        self.energy_parts(&self.fluid.u, &self.map.jacobian, &self.fluid.v, &self.structure.eta)
    }

    fn write_initial_row(&mut self) {
        let e0 = self.energy();
        self.ledger.rows.push(LedgerRow {
            step: 0,
            t: 0.0,
            e_half: e0,
            e_full: e0,
            j_min: self.status.j_min,
            inj_margin: self.status.injectivity_margin,
            ..Default::default()
        });
    }

    /// Replaces the initial fluid velocity (projected onto the strong boundary
    /// conditions) and rewrites ledger row 0. Only valid before the first step.
    pub fn set_initial_velocity(&mut self, u: Vec<[f64; 2]>) -> Result<()> {
        if self.step != 0 {
            return Err(Error::InvalidArgument("the run has already started".into()));
        }
        if u.len() != self.mesh.num_q2_nodes() {
            return Err(Error::AssemblyShapeMismatch("initial velocity length".into()));
        }
        self.fluid.u = u;
        self.space.project(&mut self.fluid.u);
        self.ledger.rows.clear();
        self.write_initial_row();
        Ok(())
    }

    /// Volume force `f(t, x)` added to the fluid momentum equation.
    pub fn set_body_force(&mut self, f: Box<dyn Fn(f64, [f64; 2]) -> [f64; 2]>) {
        self.body_force = Some(f);
    }

    pub fn dt(&self) -> f64 {
        self.config.time.dt
    }

    pub fn time(&self) -> f64 {
        self.step as f64 * self.dt()
    }

    pub fn stop_reason(&self) -> Option<StopReason> {
        self.stop
    }

    pub fn message(&self) -> Option<&str> {
        self.message.as_deref()
    }

    pub fn snapshot(&self) -> Snapshot {
        Snapshot {
            step: self.step,
            t: self.time(),
            eta: self.structure.eta.clone(),
            v: self.fluid.v.clone(),
            v_star: self.structure.v_star.clone(),
            u: self.fluid.u.clone(),
        }
    }

    /// One splitting step. Returns `false` (and records the stop reason) if
    /// the new map is inadmissible; the state is then left at step `n`.
    pub fn advance(&mut self) -> Result<bool> {
        if self.stop.is_some() {
            return Ok(false);
        }
        let dt = self.dt();
        let n = self.step;
        let rho = self.fluid_params.rho_f;
        let e_n = self.ledger.rows.last().map_or(0.0, |r| r.e_full);

        // structure half-step
        let pre = StructureState {
            eta: self.structure.eta.clone(),
            v: self.fluid.v.clone(),
            v_star: self.structure.v_star.clone(),
        };
        let (post, struct_res, deta_sq, dvstar_sq) = match &self.shell {
            Some(op) => {
                let post = structure_step(op, &pre, dt, &self.structure_params)?;
                let res = verify_structure_identity(op, &self.structure_params, &pre, &post);
                let de: Vec<f64> = post.eta.iter().zip(&pre.eta).map(|(a, b)| a - b).collect();
                let dv: Vec<f64> = post.v_star.iter().zip(&pre.v).map(|(a, b)| a - b).collect();
                let dvs = self.structure_params.inertia() * op.m_form(&dv, &dv);
                (post, res, op.k_form(&de, &de), dvs)
            }
            None => (pre.clone(), 0.0, 0.0, 0.0),
        };
        let e_half = self.energy_parts(&self.fluid.u, &self.map.jacobian, &post.v_star, &post.eta);

        // ALE update
        let map_new = self.extension.extend(&self.mesh, &self.grid, &post.eta)?;
        let status = check_admissible(&map_new, self.config.guards.c_omega, self.config.guards.j_floor);
        if !status.admissible {
            self.status = status;
            self.stop = Some(StopReason::DomainDegenerate);
            self.message = Some(format!(
                "map at step {} is inadmissible (j_min = {:e}, margin = {:e})",
                n + 1,
                status.j_min,
                status.injectivity_margin
            ));
            return Ok(false);
        }
        let geom = interface_geometry(&self.grid, &post.eta)?;
        let w = ale_velocity(&map_new, &self.map, dt)?;

        // fluid half-step
        let source = source_term(&self.boundary, n, dt);
        let t_new = (n + 1) as f64 * dt;
        let force_at;
        let body_force: Option<&dyn Fn([f64; 2]) -> [f64; 2]> = match &self.body_force {
            Some(f) => {
                force_at = move |x: [f64; 2]| f(t_new, x);
                Some(&force_at)
            }
            None => None,
        };
        let inputs = FluidInputs {
            u_prev: &self.fluid.u,
            v_star: &post.v_star,
            map_prev: &self.map,
            map_new: &map_new,
            w: &w,
            geom_new: &geom,
            dt,
            source: &source,
            body_force,
        };
        let system = assemble_fluid_system(
            &self.mesh,
            &self.grid,
            &self.space,
            &inputs,
            &self.fluid_params,
            &self.structure_params,
            self.shell.as_ref(),
        )?;
        let sol = fluid_step(&self.mesh, &self.grid, &self.space, &system, &mut self.solver)?;
        let new = sol.state;

        // ledger
        let gcl_res = verify_gcl_identity(&self.mesh, &self.fluid.u, &new.u, &self.map, &map_new, rho)?;
        let visc_j = match self.fluid_params.jacobian_variant {
            JacobianVariant::New => &map_new.jacobian,
            JacobianVariant::Old => &self.map.jacobian,
        };
        let diss = dissipation(
            &self.mesh,
            &self.grid,
            &self.space,
            &new,
            &map_new,
            visc_j,
            &geom,
            dt,
            &self.fluid_params,
        )?;
        let e_full = self.energy_parts(&new.u, &map_new.jacobian, &new.v, &post.eta);
        let u0 = velocity_at_quadrature(&self.mesh, &self.fluid.u);
        let u1 = velocity_at_quadrature(&self.mesh, &new.u);
        let wq = crate::ale::quadrature_weights(&self.mesh);
        let du_sq: f64 = rho
            * u0.iter()
                .zip(&u1)
                .zip(&wq)
                .zip(&self.map.jacobian)
                .map(|(((a, b), w), j)| {
                    w * j * ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2))
                })
                .sum::<f64>();
        let dv_sq = match &self.shell {
            Some(op) => {
                let d: Vec<f64> = new.v.iter().zip(&post.v_star).map(|(a, b)| a - b).collect();
                self.structure_params.inertia() * op.m_form(&d, &d)
            }
            None => 0.0,
        };
        let terms = FluidEnergyTerms {
            e_half,
            e_full,
            du: 0.5 * du_sq,
            dv: 0.5 * dv_sq,
            d: diss.total(),
        };
        let fluid_margin = verify_fluid_energy_inequality(&terms, 0.0, dt, 0.0);
        let row = LedgerRow {
            step: n + 1,
            t: t_new,
            e_half,
            e_full,
            d: diss.total(),
            gcl_res,
            struct_res,
            fluid_margin,
            j_min: status.j_min,
            inj_margin: status.injectivity_margin,
            div_res: sol.div_residual,
            normal_res: sol.normal_residual,
            structure_slack: e_half - e_n,
            d_unweighted: diss.viscous + diss.wall + diss.interface_unweighted,
            r_norm: source.norm_surrogate(&self.mesh),
            du_sq,
            dv_sq,
            deta_sq,
            dvstar_sq,
        };
        self.check_row(&row, source.is_zero() && self.body_force.is_none());
        self.ledger.rows.push(row);

        self.structure = StructureState {
            eta: post.eta,
            v: new.v.clone(),
            v_star: post.v_star,
        };
        self.fluid = new;
        self.map = map_new;
        self.status = status;
        self.step = n + 1;
        Ok(true)
    }

    fn check_row(&mut self, r: &LedgerRow, unforced: bool) {
        let s = r.step;
        if !(r.struct_res <= STRUCT_TOL) {
            self.ledger.fail(format!("step {s}: structure identity residual {:e}", r.struct_res));
        }
        if !(r.gcl_res <= GCL_TOL) {
            self.ledger.fail(format!("step {s}: GCL residual {:e}", r.gcl_res));
        }
        if !(r.structure_slack <= ENERGY_SLACK) {
            self.ledger.fail(format!("step {s}: E_half exceeds E_n by {:e}", r.structure_slack));
        }
        if unforced && !(r.fluid_margin >= -ENERGY_SLACK) {
            self.ledger.fail(format!("step {s}: fluid energy margin {:e}", r.fluid_margin));
        }
        if !(r.div_res <= CONSTRAINT_TOL) {
            self.ledger.fail(format!("step {s}: incompressibility residual {:e}", r.div_res));
        }
        if !(r.normal_res <= CONSTRAINT_TOL) {
            self.ledger.fail(format!("step {s}: normal constraint residual {:e}", r.normal_res));
        }
    }

    /// Run-end checks of the accumulated bounds.
    fn finish_checks(&mut self) {
        let dt = self.dt();
        let e0 = self.ledger.e0();
        let bound = 2.0 * (e0 + self.ledger.c_tilde(dt) * self.ledger.forcing_sum(dt)) + 1e-9;
        if self.body_force.is_some() {
            return;
        }
        let names = ["fluid velocity", "shell velocity", "displacement", "structure half-step"];
        for (name, s) in names.iter().zip(self.ledger.telescoped_sums()) {
            if !(s <= bound) {
                self.ledger.fail(format!("telescoped {name} differences {s:e} exceed {bound:e}"));
            }
        }
        if self.ledger.forcing_sum(dt) == 0.0 {
            if let Some(last) = self.ledger.rows.last() {
                if !(last.e_full <= e0 + 1e-9) {
                    let msg = format!("final energy {:e} exceeds initial {:e}", last.e_full, e0);
                    self.ledger.fail(msg);
                }
            }
        }
    }
}

/// Output of [`run`].
pub struct RunOutput {
    pub trajectory: Trajectory,
    pub ledger: EnergyLedger,
    pub summary: RunSummary,
}

/// Run-level facts written to `run_summary.json`.
#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub stop_reason: StopReason,
    pub stop_step: usize,
    pub steps_requested: usize,
    pub t_final: f64,
    pub failed: bool,
    pub failures: Vec<String>,
    pub message: Option<String>,
    pub e0: f64,
    pub e_final: f64,
    pub e_max: f64,
    pub c_tilde: f64,
    pub forcing_sum: f64,
    pub dissipation_sum: f64,
    /// `[fluid velocity, shell velocity, displacement, structure half-step]`.
    pub telescoped_sums: [f64; 4],
    pub final_status: DomainStatus,
    pub min_j: f64,
    pub min_injectivity_margin: f64,
}

fn summarize(sim: &Simulation, steps_requested: usize) -> RunSummary {
    let l = &sim.ledger;
    let dt = sim.dt();
    RunSummary {
        stop_reason: sim.stop.unwrap_or(StopReason::Completed),
        stop_step: sim.step,
        steps_requested,
        t_final: sim.time(),
        failed: l.failed,
        failures: l.failures.clone(),
        message: sim.message.clone(),
        e0: l.e0(),
        e_final: l.rows.last().map_or(0.0, |r| r.e_full),
        e_max: l.rows.iter().map(|r| r.e_full).fold(f64::NEG_INFINITY, f64::max),
        c_tilde: l.c_tilde(dt),
        forcing_sum: l.forcing_sum(dt),
        dissipation_sum: l.rows.iter().map(|r| r.d).fold(0.0, |a, b| a + b),
        telescoped_sums: l.telescoped_sums(),
        final_status: sim.status,
        min_j: l.rows.iter().map(|r| r.j_min).fold(sim.status.j_min, f64::min),
        min_injectivity_margin: l
            .rows
            .iter()
            .map(|r| r.inj_margin)
            .fold(sim.status.injectivity_margin, f64::min),
    }
}

/// Drives `sim` for `steps` steps, calling `observe` after initialization and
/// after every completed step. Solver failures end the run with
/// `StopReason::SolverFailure` rather than an error.
pub fn run_simulation<F: FnMut(&Simulation)>(
    sim: &mut Simulation,
    steps: usize,
    mut observe: F,
) -> RunSummary {
    observe(sim);
    while sim.step < steps && sim.stop.is_none() {
        match sim.advance() {
            Ok(true) => observe(sim),
            Ok(false) => break,
            Err(e) => {
                sim.stop = Some(StopReason::SolverFailure);
                sim.message = Some(e.to_string());
                sim.ledger.fail(format!("step {}: {e}", sim.step + 1));
            }
        }
    }
    if sim.stop.is_none() {
        sim.stop = Some(StopReason::Completed);
    }
    sim.finish_checks();
    summarize(sim, steps)
}

/// Runs a configuration to `t_end`, keeping every snapshot.
pub fn run(config: &SimConfig) -> Result<RunOutput> {
    let mut sim = initialize(config)?;
    let steps = config.num_steps();
    let mut snapshots = Vec::with_capacity(steps + 1);
    let summary = run_simulation(&mut sim, steps, |s| snapshots.push(s.snapshot()));
    let trajectory = Trajectory {
        dt: sim.dt(),
        snapshots,
        stop_reason: summary.stop_reason,
        stop_step: summary.stop_step,
        final_status: sim.status,
        message: sim.message.clone(),
    };
    Ok(RunOutput {
        trajectory,
        ledger: sim.ledger,
        summary,
    })
}
