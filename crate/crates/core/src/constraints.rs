//! Process constraints.
//!
//! Directionality and collision depend only on the design and the nozzle, so
//! they are derived once into a [`PrecedenceSet`]. Connection and cantilever
//! depend on the assembly state and are evaluated per candidate step.
//!
//! The nozzle is a cone opening upward from its tip. Its swept volume over a
//! beam is the union of that cone over every point of the beam path.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{horizontal_distance, sample_polyline, Aabb, Vec3, COINCIDENT_TOL};
use crate::model::{joint_supports_pivot, AssemblyState, Beam, BeamId, FrameDesign, JointId};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NozzleModel {
    /// Radius of the nozzle tip, mm.
    pub tip_radius: f64,
    /// Half-angle of the nozzle cone, degrees from vertical.
    pub cone_half_angle: f64,
    /// Safety margin added to every intersection test, mm.
    pub clearance: f64,
}

impl Default for NozzleModel {
    fn default() -> Self {
        NozzleModel { tip_radius: 0.055, cone_half_angle: 20.0, clearance: 0.1 }
    }
}

impl NozzleModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.cone_half_angle > 0.0 && self.cone_half_angle < 90.0) {
            return Err(Error::Config(format!("cone_half_angle {} must be in (0, 90)", self.cone_half_angle)));
        }
        if !(self.tip_radius >= 0.0) || !(self.clearance >= 0.0) {
            return Err(Error::Config("tip_radius and clearance must be non-negative".into()));
        }
        Ok(())
    }

    fn cone(&self) -> Cone {
        let a = self.cone_half_angle.to_radians();
        Cone { tan: a.tan(), sin: a.sin(), cos: a.cos() }
    }
}

#[derive(Debug, Clone, Copy)]
struct Cone {
    tan: f64,
    sin: f64,
    cos: f64,
}

impl Cone {
    /// Distance from `x` to the cone with apex `s` (zero inside).
    fn distance(&self, apex: &Vec3, x: &Vec3) -> f64 {
        let h = horizontal_distance(apex, x);
        let dz = x.z - apex.z;
        if h <= dz * self.tan {
            return 0.0;
        }
        if h * self.sin + dz * self.cos <= 0.0 {
            (h * h + dz * dz).sqrt()
        } else {
            (h * self.cos - dz * self.sin).abs()
        }
    }

    /// Strictly inside the bare cone, away from its apex.
    fn strictly_contains(&self, apex: &Vec3, x: &Vec3) -> bool {
        let dz = x.z - apex.z;
        dz > 1e-9 && horizontal_distance(apex, x) < dz * self.tan - 1e-9
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PrintDirection {
    /// From `p` to `q` along the stored path.
    Forward,
    /// From `q` to `p`.
    Reverse,
}

impl PrintDirection {
    pub const BOTH: [PrintDirection; 2] = [PrintDirection::Forward, PrintDirection::Reverse];

    pub fn start(self, beam: &Beam) -> JointId {
        match self {
            PrintDirection::Forward => beam.p,
            PrintDirection::Reverse => beam.q,
        }
    }

    pub fn end(self, beam: &Beam) -> JointId {
        match self {
            PrintDirection::Forward => beam.q,
            PrintDirection::Reverse => beam.p,
        }
    }

    /// The direction that starts at `joint`, if it is an endpoint.
    pub fn starting_at(beam: &Beam, joint: JointId) -> Option<Self> {
        if beam.p == joint {
            Some(PrintDirection::Forward)
        } else if beam.q == joint {
            Some(PrintDirection::Reverse)
        } else {
            None
        }
    }

    pub fn oriented_path(self, beam: &Beam) -> Vec<Vec3> {
        match self {
            PrintDirection::Forward => beam.path.clone(),
            PrintDirection::Reverse => beam.path.iter().rev().copied().collect(),
        }
    }

    fn bit(self) -> u8 {
        match self {
            PrintDirection::Forward => 1,
            PrintDirection::Reverse => 2,
        }
    }
}

impl fmt::Display for PrintDirection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PrintDirection::Forward => "forward",
            PrintDirection::Reverse => "reverse",
        })
    }
}

/// Subset of {forward, reverse}.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct DirectionSet(u8);

impl DirectionSet {
    pub const NONE: DirectionSet = DirectionSet(0);
    pub const BOTH: DirectionSet = DirectionSet(3);

    pub fn only(d: PrintDirection) -> Self {
        DirectionSet(d.bit())
    }

    pub fn contains(self, d: PrintDirection) -> bool {
        self.0 & d.bit() != 0
    }

    pub fn insert(&mut self, d: PrintDirection) {
        self.0 |= d.bit();
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn iter(self) -> impl Iterator<Item = PrintDirection> {
        PrintDirection::BOTH.into_iter().filter(move |d| self.contains(*d))
    }
}

/// Unconstructability findings from [`derive_constraints`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Defect {
    NoPrintableDirection { beam: BeamId },
    MutualPrecedence { a: BeamId, b: BeamId },
    PrecedenceCycle { beams: Vec<BeamId> },
}

impl fmt::Display for Defect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Defect::NoPrintableDirection { beam } => write!(f, "beam {beam} cannot be printed in either direction"),
            Defect::MutualPrecedence { a, b } => write!(f, "beams {a} and {b} must each precede the other"),
            Defect::PrecedenceCycle { beams } => {
                write!(f, "precedence cycle through {} beams starting at {}", beams.len(), beams[0])
            }
        }
    }
}

/// Region swept by the nozzle tip along one beam, queried by distance.
#[derive(Debug, Clone)]
pub struct SweptVolume {
    apexes: Vec<Vec3>,
    cone: Cone,
    inflation: f64,
}

impl SweptVolume {
    pub fn contains(&self, x: &Vec3) -> bool {
        self.distance(x) <= self.inflation
    }

    /// Distance from `x` to the union of bare cones (before inflation).
    pub fn distance(&self, x: &Vec3) -> f64 {
        self.apexes.iter().map(|s| self.cone.distance(s, x)).fold(f64::INFINITY, f64::min)
    }
}

/// Sampling step used for a design: 0.1 mm or a quarter of the shortest
/// segment, whichever is smaller.
pub fn sampling_step(design: &FrameDesign) -> f64 {
    let shortest = design
        .beams()
        .iter()
        .flat_map(|b| b.path.windows(2).map(|w| (w[1] - w[0]).norm()))
        .fold(f64::INFINITY, f64::min);
    (shortest / 4.0).min(0.1)
}

pub fn swept_volume(beam: &Beam, nozzle: &NozzleModel) -> SweptVolume {
    let step = beam.path.windows(2).map(|w| (w[1] - w[0]).norm() / 4.0).fold(0.1f64, f64::min);
    SweptVolume {
        apexes: sample_polyline(&beam.path, step).into_iter().map(|(p, _)| p).collect(),
        cone: nozzle.cone(),
        inflation: nozzle.tip_radius + nozzle.clearance + step,
    }
}

/// Whether the nozzle stays clear of the already-deposited part of the beam
/// itself when the beam is traversed in direction `dir`.
pub fn direction_feasible(beam: &Beam, dir: PrintDirection, nozzle: &NozzleModel) -> bool {
    let path = dir.oriented_path(beam);
    let cone = nozzle.cone();
    // Fast paths on segment slopes.
    let limit = (90.0 - nozzle.cone_half_angle).to_radians().tan();
    let mut ascending = true;
    for w in path.windows(2) {
        let d = w[1] - w[0];
        let run = (d.x * d.x + d.y * d.y).sqrt();
        if d.z < 0.0 {
            ascending = false;
            if -d.z > run * limit + 1e-12 {
                return false;
            }
        }
    }
    if ascending {
        return true;
    }
    let step = path.windows(2).map(|w| (w[1] - w[0]).norm() / 4.0).fold(0.1f64, f64::min);
    let samples = sample_polyline(&path, step);
    for (i, (s, _)) in samples.iter().enumerate() {
        for (p, _) in &samples[..i] {
            if cone.strictly_contains(s, p) {
                return false;
            }
        }
    }
    true
}

struct BeamSamples {
    points: Vec<Vec3>,
    bbox: Aabb,
    radius: f64,
}

/// Whether printing `a` sweeps the nozzle through `b` (so `a` must come first).
fn sweeps_through(
    design: &FrameDesign,
    a: BeamId,
    b: BeamId,
    sa: &BeamSamples,
    sb: &BeamSamples,
    cone: &Cone,
    nozzle: &NozzleModel,
    step: f64,
) -> bool {
    let inflation = nozzle.tip_radius + nozzle.clearance + sb.radius + step;
    // Broad phase: b must reach above a's lowest point and lie within the
    // widest cone radius horizontally.
    if sb.bbox.max.z + inflation < sa.bbox.min.z {
        return false;
    }
    let reach = inflation + (sb.bbox.max.z - sa.bbox.min.z).max(0.0) * cone.tan;
    if sa.bbox.xy_gap(&sb.bbox) > reach {
        return false;
    }
    let (ba, bb) = (design.beam(a), design.beam(b));
    let shared: Vec<Vec3> =
        [ba.p, ba.q].into_iter().filter(|j| bb.has_endpoint(*j)).map(|j| design.joint(j).position).collect();
    let near_radius = 4.0 * inflation;
    for x in &sb.points {
        let near_joint = shared.iter().find(|j| (x - *j).norm() < near_radius);
        if let Some(j) = near_joint {
            if (x - j).norm() < COINCIDENT_TOL {
                continue;
            }
        }
        for s in &sa.points {
            let hit = match near_joint {
                // Around a shared joint the two beams are fused anyway; only
                // the bare cone counts there.
                Some(j) if (s - j).norm() < near_radius => cone.strictly_contains(s, x),
                _ => cone.distance(s, x) <= inflation,
            };
            if hit {
                return true;
            }
        }
    }
    false
}

/// Precedence pairs from nozzle collisions, plus any mutual pairs found.
pub fn collision_precedence(design: &FrameDesign, nozzle: &NozzleModel) -> (Vec<(BeamId, BeamId)>, Vec<Defect>) {
    collision_precedence_with_step(design, nozzle, sampling_step(design))
}

pub fn collision_precedence_with_step(
    design: &FrameDesign,
    nozzle: &NozzleModel,
    step: f64,
) -> (Vec<(BeamId, BeamId)>, Vec<Defect>) {
    let cone = nozzle.cone();
    let samples: Vec<BeamSamples> = design
        .beams()
        .iter()
        .map(|b| {
            let points: Vec<Vec3> = sample_polyline(&b.path, step).into_iter().map(|(p, _)| p).collect();
            BeamSamples { bbox: Aabb::of_points(&points), points, radius: b.diameter / 2.0 }
        })
        .collect();
    let n = design.beam_count();
    let pairs: Vec<(BeamId, BeamId)> = (0..n)
        .into_par_iter()
        .flat_map_iter(|a| {
            let samples = &samples;
            let cone = &cone;
            (0..n).filter_map(move |b| {
                (a != b && sweeps_through(design, BeamId(a), BeamId(b), &samples[a], &samples[b], cone, nozzle, step))
                    .then_some((BeamId(a), BeamId(b)))
            })
        })
        .collect();
    let set: std::collections::HashSet<(BeamId, BeamId)> = pairs.iter().copied().collect();
    let defects = pairs
        .iter()
        .filter(|(a, b)| a < b && set.contains(&(*b, *a)))
        .map(|(a, b)| Defect::MutualPrecedence { a: *a, b: *b })
        .collect();
    (pairs, defects)
}

/// State-independent precedence structure of a design.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrecedenceSet {
    allowed: Vec<DirectionSet>,
    preds: Vec<Vec<BeamId>>,
    succs: Vec<Vec<BeamId>>,
    /// Beams that can only be printed starting at a non-grounded joint: each
    /// must follow at least one other beam incident to that joint.
    pub forced_starts: Vec<(BeamId, JointId)>,
}

impl PrecedenceSet {
    /// Builds a set from explicit parts, typically for tests or when loading.
    pub fn from_parts(allowed: Vec<DirectionSet>, pairs: &[(BeamId, BeamId)]) -> Self {
        let n = allowed.len();
        let mut preds = vec![Vec::new(); n];
        let mut succs = vec![Vec::new(); n];
        for &(a, b) in pairs {
            if !preds[b.0].contains(&a) {
                preds[b.0].push(a);
                succs[a.0].push(b);
            }
        }
        for v in preds.iter_mut().chain(succs.iter_mut()) {
            v.sort();
        }
        PrecedenceSet { allowed, preds, succs, forced_starts: Vec::new() }
    }

    pub fn allowed(&self, b: BeamId) -> DirectionSet {
        self.allowed[b.0]
    }

    pub fn is_allowed(&self, b: BeamId, d: PrintDirection) -> bool {
        self.allowed[b.0].contains(d)
    }

    pub fn predecessors(&self, b: BeamId) -> &[BeamId] {
        &self.preds[b.0]
    }

    pub fn successors(&self, b: BeamId) -> &[BeamId] {
        &self.succs[b.0]
    }

    pub fn precedes(&self, a: BeamId, b: BeamId) -> bool {
        self.preds[b.0].binary_search(&a).is_ok()
    }

    pub fn order_pairs(&self) -> impl Iterator<Item = (BeamId, BeamId)> + '_ {
        self.preds.iter().enumerate().flat_map(|(b, ps)| ps.iter().map(move |a| (*a, BeamId(b))))
    }

    pub fn pair_count(&self) -> usize {
        self.preds.iter().map(Vec::len).sum()
    }

    pub fn beam_count(&self) -> usize {
        self.allowed.len()
    }

    /// A directed cycle among the order pairs, if any.
    pub fn find_cycle(&self) -> Option<Vec<BeamId>> {
        let n = self.allowed.len();
        // 0 = unvisited, 1 = on stack, 2 = done
        let mut color = vec![0u8; n];
        let mut parent = vec![usize::MAX; n];
        for root in 0..n {
            if color[root] != 0 {
                continue;
            }
            let mut stack = vec![(root, 0usize)];
            color[root] = 1;
            while let Some(top) = stack.len().checked_sub(1) {
                let (v, i) = stack[top];
                if i < self.succs[v].len() {
                    stack[top].1 += 1;
                    let w = self.succs[v][i].0;
                    if color[w] == 0 {
                        color[w] = 1;
                        parent[w] = v;
                        stack.push((w, 0));
                    } else if color[w] == 1 {
                        let mut cycle = vec![BeamId(w)];
                        let mut x = v;
                        while x != w {
                            cycle.push(BeamId(x));
                            x = parent[x];
                        }
                        cycle.reverse();
                        return Some(cycle);
                    }
                } else {
                    color[v] = 2;
                    stack.pop();
                }
            }
        }
        None
    }
}

/// Derives allowed directions and collision precedence for a design.
pub fn derive_constraints(design: &FrameDesign, nozzle: &NozzleModel) -> Result<PrecedenceSet> {
    derive_constraints_with_step(design, nozzle, sampling_step(design))
}

pub fn derive_constraints_with_step(design: &FrameDesign, nozzle: &NozzleModel, step: f64) -> Result<PrecedenceSet> {
    nozzle.validate()?;
    let mut defects = Vec::new();
    let allowed: Vec<DirectionSet> = design
        .beams()
        .par_iter()
        .map(|b| {
            let mut set = DirectionSet::NONE;
            for d in PrintDirection::BOTH {
                if direction_feasible(b, d, nozzle) {
                    set.insert(d);
                }
            }
            set
        })
        .collect();
    for (i, a) in allowed.iter().enumerate() {
        if a.is_empty() {
            defects.push(Defect::NoPrintableDirection { beam: BeamId(i) });
        }
    }
    let (pairs, mutual) = collision_precedence_with_step(design, nozzle, step);
    defects.extend(mutual);
    let mut prec = PrecedenceSet::from_parts(allowed, &pairs);
    if defects.is_empty() {
        if let Some(cycle) = prec.find_cycle() {
            defects.push(Defect::PrecedenceCycle { beams: cycle });
        }
    }
    if !defects.is_empty() {
        return Err(Error::Unconstructable(defects));
    }
    for b in design.beam_ids() {
        let beam = design.beam(b);
        let dirs: Vec<PrintDirection> = prec.allowed(b).iter().collect();
        if let [only] = dirs[..] {
            let start = only.start(beam);
            if !design.joint(start).grounded {
                prec.forced_starts.push((b, start));
            }
        }
    }
    Ok(prec)
}

/// The start joint is grounded or already carries a placed beam.
pub fn connection_feasible(state: &AssemblyState<'_>, beam: BeamId, dir: PrintDirection) -> bool {
    let start = dir.start(state.design.beam(beam));
    state.joint_present(start)
}

/// Neither endpoint that touches existing material has a hanging beam.
pub fn cantilever_feasible(state: &AssemblyState<'_>, beam: BeamId, _dir: PrintDirection) -> bool {
    let b = state.design.beam(beam);
    [b.p, b.q].into_iter().all(|j| !joint_supports_pivot(state.design, &state.placed, j))
}

/// A single step is feasible: unplaced, allowed direction, predecessors
/// placed, connection and cantilever satisfied.
pub fn step_feasible(state: &AssemblyState<'_>, prec: &PrecedenceSet, beam: BeamId, dir: PrintDirection) -> bool {
    !state.is_placed(beam)
        && prec.is_allowed(beam, dir)
        && prec.predecessors(beam).iter().all(|a| state.is_placed(*a))
        && connection_feasible(state, beam, dir)
        && cantilever_feasible(state, beam, dir)
}

pub fn feasible_actions(state: &AssemblyState<'_>, prec: &PrecedenceSet) -> Vec<(BeamId, PrintDirection)> {
    let mut out = Vec::new();
    for b in state.design.beam_ids() {
        if state.is_placed(b) || !prec.predecessors(b).iter().all(|a| state.is_placed(*a)) {
            continue;
        }
        let beam = state.design.beam(b);
        let cant_ok = [beam.p, beam.q].into_iter().all(|j| !joint_supports_pivot(state.design, &state.placed, j));
        if !cant_ok {
            continue;
        }
        for d in prec.allowed(b).iter() {
            if connection_feasible(state, b, d) {
                out.push((b, d));
            }
        }
    }
    out
}
