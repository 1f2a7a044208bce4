//! Machine moves for a plan and their G-code text form.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::deadhead::{travel_time, MachineModel};
use super::Plan;
use crate::bitset::BeamSet;
use crate::geometry::{polyline_length, Vec3};
use crate::model::{AssemblyState, BeamId, FrameDesign, JointId};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "move", rename_all = "snake_case")]
pub enum Move {
    /// Raise to `z`, cross, lower onto `to`.
    Travel {
        from: Vec3,
        to: Vec3,
        z: f64,
    },
    Print {
        step: usize,
        beam: BeamId,
        path: Vec<Vec3>,
        speed: f64,
    },
    Dwell {
        joint: JointId,
        seconds: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Toolpath {
    pub moves: Vec<Move>,
}

pub fn emit_toolpath(design: &FrameDesign, plan: &Plan, machine: &MachineModel) -> Toolpath {
    let mut moves = Vec::new();
    let mut state = AssemblyState { design, placed: BeamSet::new(design.beam_count()) };
    let mut nozzle: Option<Vec3> = None;
    for (i, s) in plan.steps.iter().enumerate() {
        let beam = design.beam(s.beam);
        let path = s.direction.oriented_path(beam);
        let start = path[0];
        let z = machine.z_safe(&state);
        let from = nozzle.unwrap_or(Vec3::new(start.x, start.y, z.max(start.z)));
        moves.push(Move::Travel { from, to: start, z });
        moves.push(Move::Print { step: i, beam: s.beam, path: path.clone(), speed: machine.print_speed });
        moves.push(Move::Dwell { joint: s.direction.end(beam), seconds: machine.dwell });
        nozzle = path.last().copied();
        state.placed.insert(s.beam);
    }
    Toolpath { moves }
}

impl Toolpath {
    pub fn print_time(&self) -> f64 {
        self.moves
            .iter()
            .map(|m| match m {
                Move::Print { path, speed, .. } => polyline_length(path) / speed,
                _ => 0.0,
            })
            .sum()
    }

    pub fn travel_time(&self, machine: &MachineModel) -> f64 {
        self.moves
            .iter()
            .map(|m| match m {
                Move::Travel { from, to, z } => travel_time(from, to, *z, machine),
                _ => 0.0,
            })
            .sum()
    }

    pub fn dwell_time(&self) -> f64 {
        self.moves
            .iter()
            .map(|m| match m {
                Move::Dwell { seconds, .. } => *seconds,
                _ => 0.0,
            })
            .sum()
    }

    /// G-code text. Lengths in mm with six decimals, feeds in mm/min.
    ///
    /// ```text
    /// ; step <i> beam <name> <from joint> -> <to joint>
    /// G0 Z<z> F<v_z>          raise (omitted when already at or above z)
    /// G0 X<x> Y<y> F<v_xy>    cross
    /// G0 Z<z> F<v_z>          lower (omitted when the target is at z)
    /// G1 X<x> Y<y> Z<z> F<f>  one line per path point after the first
    /// G4 S<seconds>           dwell
    /// ```
    ///
    /// `v_xy` is the smaller of the x and y limits.
    pub fn to_gcode(&self, design: &FrameDesign, machine: &MachineModel) -> String {
        let v = machine.axis_max_speed;
        let fz = v.z * 60.0;
        let fxy = v.x.min(v.y) * 60.0;
        let mut out = String::new();
        out.push_str("; frameseq toolpath\nG21\nG90\n");
        let mut pending_travel: Option<(Vec3, Vec3, f64)> = None;
        for m in &self.moves {
            match m {
                Move::Travel { from, to, z } => pending_travel = Some((*from, *to, *z)),
                Move::Print { step, beam, path, speed } => {
                    let b = design.beam(*beam);
                    let (first, last) = (path[0], path[path.len() - 1]);
                    let name = |p: &Vec3| {
                        let j = if (design.joint(b.p).position - p).norm() < 1e-9 { b.p } else { b.q };
                        design.joint(j).name.clone()
                    };
                    let _ = writeln!(out, "; step {} beam {} {} -> {}", step, b.name, name(&first), name(&last));
                    if let Some((from, to, z)) = pending_travel.take() {
                        if from.z < z {
                            let _ = writeln!(out, "G0 Z{:.6} F{:.6}", z, fz);
                        }
                        if from.x != to.x || from.y != to.y {
                            let _ = writeln!(out, "G0 X{:.6} Y{:.6} F{:.6}", to.x, to.y, fxy);
                        }
                        if to.z < z || from.z != to.z {
                            let _ = writeln!(out, "G0 Z{:.6} F{:.6}", to.z, fz);
                        }
                    }
                    for p in &path[1..] {
                        let _ = writeln!(out, "G1 X{:.6} Y{:.6} Z{:.6} F{:.6}", p.x, p.y, p.z, speed * 60.0);
                    }
                }
                Move::Dwell { seconds, .. } => {
                    let _ = writeln!(out, "G4 S{:.6}", seconds);
                }
            }
        }
        out
    }
}
