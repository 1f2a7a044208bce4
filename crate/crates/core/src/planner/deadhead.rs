//! Travel time between printing moves and greedy reordering to reduce it.

use serde::{Deserialize, Serialize};

use super::{Plan, PlanStep};
use crate::bitset::BeamSet;
use crate::constraints::{step_feasible, PrecedenceSet};
use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::model::{AssemblyState, FrameDesign};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MachineModel {
    /// Per-axis travel speed limits, mm/s.
    pub axis_max_speed: Vec3,
    /// Extrusion speed along the beam, mm/s.
    pub print_speed: f64,
    /// Height kept above the tallest placed beam while travelling, mm.
    pub z_clearance: f64,
    /// Optional fixed travel height, mm. Travel never goes below it.
    pub travel_z: Option<f64>,
    /// Pause after each beam so the end joint solidifies, s.
    pub dwell: f64,
}

impl Default for MachineModel {
    fn default() -> Self {
        MachineModel {
            axis_max_speed: Vec3::new(50.0, 50.0, 20.0),
            print_speed: 0.4,
            z_clearance: 1.0,
            travel_z: None,
            dwell: 0.5,
        }
    }
}

impl MachineModel {
    pub fn validate(&self) -> Result<()> {
        let speeds = [self.axis_max_speed.x, self.axis_max_speed.y, self.axis_max_speed.z, self.print_speed];
        if speeds.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::Config("machine speeds must be positive".into()));
        }
        if !(self.z_clearance.is_finite() && self.z_clearance >= 0.0) {
            return Err(Error::Config("z clearance must be non-negative".into()));
        }
        if !(self.dwell.is_finite() && self.dwell >= 0.0) {
            return Err(Error::Config("dwell must be non-negative".into()));
        }
        Ok(())
    }

    /// Travel height over the placed beams of `state`.
    pub fn z_safe(&self, state: &AssemblyState<'_>) -> f64 {
        let top = state
            .placed
            .iter()
            .flat_map(|b| state.design.beam(b).path.iter().map(|p| p.z))
            .fold(state.design.substrate_z, f64::max);
        let z = top + self.z_clearance;
        self.travel_z.map_or(z, |t| z.max(t))
    }
}

/// Raise, move across, lower. Vertical legs already above the travel
/// height take no time.
pub fn deadhead_time(from: &Vec3, to: &Vec3, state: &AssemblyState<'_>, machine: &MachineModel) -> f64 {
    travel_time(from, to, machine.z_safe(state), machine)
}

pub(crate) fn travel_time(from: &Vec3, to: &Vec3, z_safe: f64, machine: &MachineModel) -> f64 {
    let v = machine.axis_max_speed;
    let up = (z_safe - from.z).max(0.0) / v.z;
    let across = ((to.x - from.x).abs() / v.x).max((to.y - from.y).abs() / v.y);
    let down = (z_safe - to.z).max(0.0) / v.z;
    up + across + down
}

/// Greedy reordering: from the current nozzle position, print next the
/// allowed step whose start is quickest to reach. Allowed means every
/// recorded and derived predecessor is placed and the step is feasible with
/// its fixed direction. Ties go to the earlier step of the input plan.
/// Directions and step costs travel with their beams.
pub fn order_for_deadheading(design: &FrameDesign, prec: &PrecedenceSet, plan: &Plan, machine: &MachineModel) -> Plan {
    let n = plan.steps.len();
    let mut recorded: Vec<Vec<usize>> = vec![Vec::new(); n];
    let index_of = |b| plan.steps.iter().position(|s: &PlanStep| s.beam == b);
    for &(a, b) in &plan.partial_order {
        if let (Some(ia), Some(ib)) = (index_of(a), index_of(b)) {
            recorded[ib].push(ia);
        }
    }
    let mut state = AssemblyState { design, placed: BeamSet::new(design.beam_count()) };
    let mut done = vec![false; n];
    let mut steps = Vec::with_capacity(n);
    let mut nozzle: Option<Vec3> = None;
    while steps.len() < n {
        let z_safe = machine.z_safe(&state);
        let mut best: Option<(f64, usize)> = None;
        for i in (0..n).filter(|i| !done[*i]) {
            let s = &plan.steps[i];
            if !recorded[i].iter().all(|p| done[*p]) || !step_feasible(&state, prec, s.beam, s.direction) {
                continue;
            }
            let start = design.joint(s.direction.start(design.beam(s.beam))).position;
            let t = nozzle.map_or(0.0, |at| travel_time(&at, &start, z_safe, machine));
            if best.is_none_or(|(bt, _)| t < bt) {
                best = Some((t, i));
            }
        }
        let Some((_, i)) = best else {
            log::warn!("deadhead ordering stalled after {} steps; keeping the planned order", steps.len());
            return plan.clone();
        };
        let s = plan.steps[i];
        done[i] = true;
        state.placed.insert(s.beam);
        nozzle = Some(design.joint(s.direction.end(design.beam(s.beam))).position);
        steps.push(s);
    }
    Plan { steps, ..plan.clone() }
}
