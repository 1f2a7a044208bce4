//! File formats and planner configuration.
//!
//! Design JSON (units mm):
//!
//! ```json
//! {"substrate_z": 0,
//!  "joints": [{"id": "g1", "xyz": [0, 0, 0], "grounded": true}, ...],
//!  "beams": [{"id": "b1", "p": "g1", "q": "apex", "diameter": 0.15,
//!             "path": [[0, 0, 0], [0, 0, 4]]}, ...]}
//! ```
//!
//! `diameter` and `path` are optional; a missing path is the straight
//! segment between the joints, a missing diameter takes the configured
//! default. Plans and reports refer to beams and joints by these ids.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::constraints::{NozzleModel, PrintDirection};
use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::model::{validate_design, Beam, BeamId, FrameDesign, Joint, JointId};
use crate::planner::{CostMode, MachineModel, Plan, PlanStep, PlannerOptions, Toolpath, Unit, UnitKind};
use crate::stiffness::{Material, StiffnessModel};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct JointRecord {
    id: String,
    xyz: [f64; 3],
    #[serde(default)]
    grounded: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BeamRecord {
    id: String,
    p: String,
    q: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    diameter: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    path: Option<Vec<[f64; 3]>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DesignRecord {
    #[serde(default)]
    substrate_z: f64,
    joints: Vec<JointRecord>,
    beams: Vec<BeamRecord>,
}

fn parse_error(e: serde_json::Error) -> Error {
    Error::Parse(format!("line {}, column {}: {}", e.line(), e.column(), e))
}

fn v3(a: [f64; 3]) -> Vec3 {
    Vec3::new(a[0], a[1], a[2])
}

/// Parses and validates a design. Beams without a diameter get
/// `default_diameter`.
pub fn load_design(text: &str, default_diameter: f64) -> Result<FrameDesign> {
    let rec: DesignRecord = serde_json::from_str(text).map_err(parse_error)?;
    let mut ids: HashMap<&str, JointId> = HashMap::new();
    let mut joints = Vec::with_capacity(rec.joints.len());
    for (i, j) in rec.joints.iter().enumerate() {
        if ids.insert(j.id.as_str(), JointId(i)).is_some() {
            return Err(Error::Parse(format!("joints[{i}]: duplicate joint id {:?}", j.id)));
        }
        joints.push(Joint { name: j.id.clone(), position: v3(j.xyz), grounded: j.grounded });
    }
    let mut names: HashMap<&str, usize> = HashMap::new();
    let mut beams = Vec::with_capacity(rec.beams.len());
    for (i, b) in rec.beams.iter().enumerate() {
        if names.insert(b.id.as_str(), i).is_some() {
            return Err(Error::Parse(format!("beams[{i}]: duplicate beam id {:?}", b.id)));
        }
        let lookup = |field: &str, name: &str| {
            ids.get(name).copied().ok_or_else(|| {
                Error::Parse(format!("beams[{i}] ({}): field {field} references unknown joint {name:?}", b.id))
            })
        };
        let p = lookup("p", &b.p)?;
        let q = lookup("q", &b.q)?;
        let path = match &b.path {
            Some(pts) => pts.iter().copied().map(v3).collect(),
            None => vec![joints[p.0].position, joints[q.0].position],
        };
        beams.push(Beam { name: b.id.clone(), p, q, path, diameter: b.diameter.unwrap_or(default_diameter) });
    }
    let design = FrameDesign::new(rec.substrate_z, joints, beams);
    let defects = validate_design(&design);
    if defects.is_empty() {
        Ok(design)
    } else {
        Err(Error::InvalidDesign(defects))
    }
}

/// Design JSON with every diameter and path written out.
pub fn design_to_json(design: &FrameDesign) -> Result<String> {
    let rec = DesignRecord {
        substrate_z: design.substrate_z,
        joints: design
            .joints()
            .iter()
            .map(|j| JointRecord {
                id: j.name.clone(),
                xyz: [j.position.x, j.position.y, j.position.z],
                grounded: j.grounded,
            })
            .collect(),
        beams: design
            .beams()
            .iter()
            .map(|b| BeamRecord {
                id: b.name.clone(),
                p: design.joint(b.p).name.clone(),
                q: design.joint(b.q).name.clone(),
                diameter: Some(b.diameter),
                path: Some(b.path.iter().map(|p| [p.x, p.y, p.z]).collect()),
            })
            .collect(),
    };
    Ok(serde_json::to_string_pretty(&rec)? + "\n")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StepRecord {
    beam: String,
    direction: PrintDirection,
    from: String,
    to: String,
    cost: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct UnitRecord {
    kind: UnitKind,
    beams: Vec<String>,
    cost: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PlanRecord {
    cost_mode: CostMode,
    max_cost: f64,
    sequence: Vec<StepRecord>,
    partial_order: Vec<[String; 2]>,
    units: Vec<UnitRecord>,
}

pub fn plan_to_json(design: &FrameDesign, plan: &Plan) -> Result<String> {
    let name = |b: BeamId| design.beam(b).name.clone();
    let rec = PlanRecord {
        cost_mode: plan.cost_mode,
        max_cost: plan.max_cost,
        sequence: plan
            .steps
            .iter()
            .map(|s| {
                let beam = design.beam(s.beam);
                StepRecord {
                    beam: beam.name.clone(),
                    direction: s.direction,
                    from: design.joint(s.direction.start(beam)).name.clone(),
                    to: design.joint(s.direction.end(beam)).name.clone(),
                    cost: s.cost,
                }
            })
            .collect(),
        partial_order: plan.partial_order.iter().map(|(a, b)| [name(*a), name(*b)]).collect(),
        units: plan
            .units
            .iter()
            .map(|u| UnitRecord { kind: u.kind, beams: u.beams.iter().map(|b| name(*b)).collect(), cost: u.cost })
            .collect(),
    };
    Ok(serde_json::to_string_pretty(&rec)? + "\n")
}

pub fn load_plan(design: &FrameDesign, text: &str) -> Result<Plan> {
    let rec: PlanRecord = serde_json::from_str(text).map_err(parse_error)?;
    let beam = |name: &str| {
        design.beam_by_name(name).ok_or_else(|| Error::Parse(format!("plan references unknown beam {name:?}")))
    };
    let mut steps = Vec::with_capacity(rec.sequence.len());
    for s in &rec.sequence {
        let b = beam(&s.beam)?;
        let start = design.joint(s.direction.start(design.beam(b))).name.as_str();
        if start != s.from {
            return Err(Error::Parse(format!(
                "step for beam {:?}: direction {:?} starts at {start:?}, not {:?}",
                s.beam, s.direction, s.from
            )));
        }
        steps.push(PlanStep { beam: b, direction: s.direction, cost: s.cost });
    }
    let mut partial_order = Vec::with_capacity(rec.partial_order.len());
    for [a, b] in &rec.partial_order {
        partial_order.push((beam(a)?, beam(b)?));
    }
    let mut units = Vec::with_capacity(rec.units.len());
    for u in &rec.units {
        let beams = u.beams.iter().map(|n| beam(n)).collect::<Result<Vec<_>>>()?;
        units.push(Unit { kind: u.kind, beams, cost: u.cost });
    }
    Ok(Plan { steps, partial_order, max_cost: rec.max_cost, cost_mode: rec.cost_mode, units })
}

/// Summary written next to a plan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub beams: usize,
    pub joints: usize,
    pub cost_mode: CostMode,
    pub max_cost: f64,
    pub epsilon_c: f64,
    /// Steps whose cost exceeds `epsilon_c`.
    pub steps_over_epsilon: usize,
    /// Every step cost, smallest first.
    pub sorted_costs: Vec<f64>,
    pub print_time: f64,
    pub travel_time: f64,
    pub dwell_time: f64,
}

impl Report {
    pub fn new(design: &FrameDesign, plan: &Plan, toolpath: &Toolpath, config: &PlannerConfig) -> Self {
        let mut sorted_costs = plan.step_costs();
        sorted_costs.sort_by(f64::total_cmp);
        Report {
            beams: design.beam_count(),
            joints: design.joint_count(),
            cost_mode: plan.cost_mode,
            max_cost: plan.max_cost,
            epsilon_c: config.epsilon_c,
            steps_over_epsilon: sorted_costs.iter().filter(|c| **c > config.epsilon_c).count(),
            sorted_costs,
            print_time: toolpath.print_time(),
            travel_time: toolpath.travel_time(&config.machine),
            dwell_time: toolpath.dwell_time(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }
}

/// Writes `plan.json`, `toolpath.gcode` and `report.json` into `dir`.
pub fn save_plan(
    dir: &Path,
    design: &FrameDesign,
    plan: &Plan,
    toolpath: &Toolpath,
    report: &Report,
    machine: &MachineModel,
) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("plan.json"), plan_to_json(design, plan)?)?;
    fs::write(dir.join("toolpath.gcode"), toolpath.to_gcode(design, machine))?;
    fs::write(dir.join("report.json"), report.to_json()?)?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlannerConfig {
    pub material: Material,
    /// Filament diameter for beams that do not give one, mm.
    pub diameter: f64,
    /// Probe force at the printed tip, N.
    pub nominal_force: f64,
    pub nozzle: NozzleModel,
    pub machine: MachineModel,
    pub cost_mode: CostMode,
    /// Deflection above which a step is counted as risky in the report, mm.
    pub epsilon_c: f64,
    pub tie_break_seed: u64,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        PlannerConfig {
            material: Material::default(),
            diameter: 0.15,
            nominal_force: 1e-4,
            nozzle: NozzleModel::default(),
            machine: MachineModel::default(),
            cost_mode: CostMode::Exact,
            epsilon_c: 0.1,
            tie_break_seed: 0,
        }
    }
}

impl PlannerConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let c: PlannerConfig = serde_json::from_str(text).map_err(parse_error)?;
        c.validate()?;
        Ok(c)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("material.elastic_modulus", self.material.elastic_modulus),
            ("material.shear_modulus", self.material.shear_modulus),
            ("diameter", self.diameter),
            ("nominal_force", self.nominal_force),
            ("nozzle.tip_radius", self.nozzle.tip_radius),
            ("epsilon_c", self.epsilon_c),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        self.nozzle.validate()?;
        self.machine.validate()
    }

    pub fn stiffness(&self) -> StiffnessModel {
        StiffnessModel { material: self.material, load: self.nominal_force }
    }

    pub fn planner_options(&self) -> PlannerOptions {
        PlannerOptions { cost_mode: self.cost_mode, stiffness: self.stiffness(), ..PlannerOptions::default() }
    }
}
