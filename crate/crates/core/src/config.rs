//! Run configuration: TOML sections `[domain] [structure] [fluid] [boundary]
//! [time] [guards] [output]`, parsed strictly. Every field has a default; the
//! defaults describe the free-oscillation benchmark on the unit square.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fluid::{BoundaryData, FluidParams, JacobianVariant, PressureProfile, StructureMode};
use crate::geometry::{FaceTag, ReferencePolygon};
use crate::shell::StructureParams;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DomainConfig {
    /// Polygon vertices; face `k` joins vertex `k` to vertex `k + 1`.
    pub vertices: Vec<[f64; 2]>,
    /// One tag per face.
    pub tags: Vec<FaceTag>,
    pub nx: usize,
    pub ny: usize,
}

impl Default for DomainConfig {
    fn default() -> Self {
        Self {
            vertices: vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]],
            tags: vec![
                FaceTag::RigidSlip,
                FaceTag::DynamicPressure,
                FaceTag::Elastic,
                FaceTag::DynamicPressure,
            ],
            nx: 32,
            ny: 32,
        }
    }
}

/// Interface profile `(a_t, a_n) sin^2(pi z / L)`, clamped at both ends.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InterfaceProfile {
    Zero,
    Sine {
        #[serde(default)]
        tangential: f64,
        normal: f64,
    },
    /// `(a_t, a_n) sin(pi z / L)`: nonzero end slopes, rejected by the clamp check.
    HalfSine {
        #[serde(default)]
        tangential: f64,
        normal: f64,
    },
}

impl InterfaceProfile {
    /// Values and `z`-derivatives of both components at `z` on `[0, len]`.
    pub fn eval(&self, z: f64, len: f64) -> ([f64; 2], [f64; 2]) {
        let k = std::f64::consts::PI / len;
        match *self {
            Self::Zero => ([0.0; 2], [0.0; 2]),
            Self::Sine { tangential, normal } => {
                let (s, c) = (k * z).sin_cos();
                let v = s * s;
                let d = 2.0 * k * s * c;
                ([tangential * v, normal * v], [tangential * d, normal * d])
            }
            Self::HalfSine { tangential, normal } => {
                let (s, c) = (k * z).sin_cos();
                ([tangential * s, normal * s], [tangential * k * c, normal * k * c])
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        match *self {
            Self::Zero => true,
            Self::Sine { tangential, normal } | Self::HalfSine { tangential, normal } => {
                tangential == 0.0 && normal == 0.0
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StructureConfig {
    pub mode: StructureMode,
    pub rho_s: f64,
    pub h: f64,
    pub bending: [f64; 2],
    pub coercivity_c: f64,
    pub initial_displacement: InterfaceProfile,
    pub initial_velocity: InterfaceProfile,
}

impl Default for StructureConfig {
    fn default() -> Self {
        let p = StructureParams::default();
        Self {
            mode: StructureMode::Elastic,
            rho_s: p.rho_s,
            h: p.h,
            bending: p.bending,
            coercivity_c: p.coercivity_c,
            initial_displacement: InterfaceProfile::Sine {
                tangential: 0.0,
                normal: 0.02,
            },
            initial_velocity: InterfaceProfile::Zero,
        }
    }
}

impl StructureConfig {
    pub fn params(&self) -> StructureParams {
        StructureParams {
            rho_s: self.rho_s,
            h: self.h,
            bending: self.bending,
            coercivity_c: self.coercivity_c,
        }
    }
}

/// Initial fluid velocity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum VelocityProfile {
    Zero,
    /// `value + gradient x`.
    Affine {
        value: [f64; 2],
        gradient: [[f64; 2]; 2],
    },
}

impl VelocityProfile {
    pub fn eval(&self, x: [f64; 2]) -> [f64; 2] {
        match *self {
            Self::Zero => [0.0; 2],
            Self::Affine { value, gradient } => [
                value[0] + gradient[0][0] * x[0] + gradient[0][1] * x[1],
                value[1] + gradient[1][0] * x[0] + gradient[1][1] * x[1],
            ],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FaceAlpha {
    pub face: usize,
    pub alpha: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FluidConfig {
    pub rho_f: f64,
    pub mu: f64,
    pub alpha: f64,
    pub alpha_wall: f64,
    pub alpha_faces: Vec<FaceAlpha>,
    pub jacobian_variant: JacobianVariant,
    pub initial_velocity: VelocityProfile,
}

impl Default for FluidConfig {
    fn default() -> Self {
        let p = FluidParams::default();
        Self {
            rho_f: p.rho_f,
            mu: p.mu,
            alpha: p.alpha,
            alpha_wall: p.alpha_wall,
            alpha_faces: Vec::new(),
            jacobian_variant: p.jacobian_variant,
            initial_velocity: VelocityProfile::Zero,
        }
    }
}

impl FluidConfig {
    pub fn params(&self) -> FluidParams {
        FluidParams {
            rho_f: self.rho_f,
            mu: self.mu,
            alpha: self.alpha,
            alpha_wall: self.alpha_wall,
            alpha_faces: self.alpha_faces.iter().map(|f| (f.face, f.alpha)).collect(),
            jacobian_variant: self.jacobian_variant,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FacePressure {
    pub face: usize,
    pub profile: PressureProfile,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoundaryConfig {
    /// Dynamic pressure on type-I faces; faces without an entry carry zero.
    pub pressures: Vec<FacePressure>,
}

impl BoundaryConfig {
    pub fn data(&self) -> BoundaryData {
        BoundaryData {
            pressures: self.pressures.iter().map(|p| (p.face, p.profile)).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TimeConfig {
    pub dt: f64,
    pub t_end: f64,
}

impl Default for TimeConfig {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            t_end: 0.2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GuardConfig {
    pub c_omega: f64,
    pub j_floor: f64,
}

impl Default for GuardConfig {
    fn default() -> Self {
        Self {
            c_omega: 0.5,
            j_floor: 1e-3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dump_fields: bool,
    /// Field dump stride in steps.
    pub dump_every: usize,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dump_fields: false,
            dump_every: 10,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub domain: DomainConfig,
    pub structure: StructureConfig,
    pub fluid: FluidConfig,
    pub boundary: BoundaryConfig,
    pub time: TimeConfig,
    pub guards: GuardConfig,
    pub output: OutputConfig,
}

fn invalid(key: &str, constraint: impl Into<String>) -> Error {
    Error::Validation {
        key: key.into(),
        constraint: constraint.into(),
    }
}

fn positive(key: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(key, "positivity"))
    }
}

impl SimConfig {
    pub fn polygon(&self) -> Result<ReferencePolygon> {
        ReferencePolygon::new(self.domain.vertices.clone(), self.domain.tags.clone())
    }

    /// Number of time steps `N = round(t_end / dt)`.
    pub fn num_steps(&self) -> usize {
        (self.time.t_end / self.time.dt).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        positive("time.dt", self.time.dt)?;
        if !(self.time.t_end >= self.time.dt) || !self.time.t_end.is_finite() {
            return Err(invalid("time.t_end", "t_end >= dt"));
        }
        if self.num_steps() < 1 {
            return Err(invalid("time.t_end", "at least one step"));
        }
        if self.domain.nx < 2 {
            return Err(invalid("domain.nx", "at least 2"));
        }
        if self.domain.ny < 2 {
            return Err(invalid("domain.ny", "at least 2"));
        }
        let poly = self
            .polygon()
            .map_err(|e| invalid("domain.vertices", e.to_string()))?;
        self.structure.params().validate()?;
        self.fluid.params().validate()?;
        positive("guards.c_omega", self.guards.c_omega)?;
        positive("guards.j_floor", self.guards.j_floor)?;
        if self.output.dump_every == 0 {
            return Err(invalid("output.dump_every", "at least 1"));
        }
        let tag_of = |face: usize, key: &str| -> Result<FaceTag> {
            poly.faces()
                .get(face)
                .map(|f| f.tag)
                .ok_or_else(|| invalid(key, format!("face {face} does not exist")))
        };
        for p in &self.boundary.pressures {
            if tag_of(p.face, "boundary.pressures")? != FaceTag::DynamicPressure {
                return Err(invalid(
                    "boundary.pressures",
                    format!("face {} is not a dynamic_pressure face", p.face),
                ));
            }
            let ok = match p.profile {
                PressureProfile::Constant { value } => value.is_finite(),
                PressureProfile::Sinusoidal {
                    amplitude,
                    omega,
                    phase,
                    offset,
                } => [amplitude, omega, phase, offset].iter().all(|v| v.is_finite()),
                PressureProfile::Ramp { value, duration } => value.is_finite() && duration > 0.0,
            };
            if !ok {
                return Err(invalid("boundary.pressures", "finite profile parameters"));
            }
        }
        for a in &self.fluid.alpha_faces {
            if tag_of(a.face, "fluid.alpha_faces")? != FaceTag::RigidSlip {
                return Err(invalid(
                    "fluid.alpha_faces",
                    format!("face {} is not a rigid_slip face", a.face),
                ));
            }
        }
        Ok(())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration is always representable")
    }
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

/// Parses and validates configuration text.
pub fn parse_config_str(text: &str) -> Result<SimConfig> {
    let de = toml::Deserializer::parse(text).map_err(|e| Error::Parse {
        line: e.span().map_or(0, |s| line_of(text, s.start)),
        key: String::new(),
        reason: e.message().to_string(),
    })?;
    let cfg: SimConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let key = e.path().to_string();
        let inner = e.into_inner();
        Error::Parse {
            line: inner.span().map_or(0, |s| line_of(text, s.start)),
            key,
            reason: inner.message().to_string(),
        }
    })?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn parse_config(path: &Path) -> Result<SimConfig> {
    parse_config_str(&std::fs::read_to_string(path)?)
}
