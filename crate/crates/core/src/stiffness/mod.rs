//! Linear elastic frame model of a partial assembly.
//!
//! Units are mm, N and MPa. Beams are Euler–Bernoulli frame elements with a
//! solid circular section; grounded joints are clamped. The cost of a step is
//! the translation of the freshly printed beam tip under a small downward
//! force standing in for nozzle contact.

mod chain;
mod element;
mod profile;

use std::collections::HashMap;
use std::fmt;

use nalgebra::{Matrix6, Vector6};
use serde::{Deserialize, Serialize};

use crate::constraints::PrintDirection;
use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::model::{AssemblyState, BeamId, JointId, JointUnion, Stability};

pub use chain::{chain_tip_translation, ChainSegment};
pub use element::{element_stiffness, local_stiffness, Mat12};
pub use profile::{reverse_cuthill_mckee, LdlFactor, ProfileMatrix};

/// Pivot threshold relative to the largest pivot seen.
pub const SINGULAR_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Material {
    /// Young's modulus, MPa.
    pub elastic_modulus: f64,
    /// Shear modulus, MPa.
    pub shear_modulus: f64,
}

impl Default for Material {
    fn default() -> Self {
        Material { elastic_modulus: 2600.0, shear_modulus: 1100.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Section {
    pub area: f64,
    /// Second moment of area about either bending axis.
    pub bending_inertia: f64,
    /// Polar moment, used as the torsion constant.
    pub torsion_constant: f64,
}

impl Section {
    pub fn circular(diameter: f64) -> Self {
        let pi = std::f64::consts::PI;
        Section {
            area: pi * diameter.powi(2) / 4.0,
            bending_inertia: pi * diameter.powi(4) / 64.0,
            torsion_constant: pi * diameter.powi(4) / 32.0,
        }
    }
}

/// Material plus the magnitude of the probe force applied at a new tip.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StiffnessModel {
    pub material: Material,
    /// Downward force at the tip of the beam being printed, N.
    pub load: f64,
}

impl Default for StiffnessModel {
    fn default() -> Self {
        StiffnessModel { material: Material::default(), load: 1e-4 }
    }
}

impl StiffnessModel {
    pub fn probe_force(&self) -> Vec3 {
        Vec3::new(0.0, 0.0, -self.load)
    }
}

/// A node of the assembled frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NodeKey {
    Joint(JointId),
    /// Interior vertex `k` of a placed beam's stored path.
    Interior(BeamId, usize),
    /// Free end of the beam being printed.
    Tip,
    /// Interior vertex `k` of the beam being printed, counted from its start.
    TipInterior(usize),
}

impl fmt::Display for NodeKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NodeKey::Joint(j) => write!(f, "{j}"),
            NodeKey::Interior(b, k) => write!(f, "{b}[{k}]"),
            NodeKey::Tip => f.write_str("tip"),
            NodeKey::TipInterior(k) => write!(f, "tip[{k}]"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoadCase {
    pub node: NodeKey,
    pub force: Vec3,
    pub moment: Vec3,
}

impl LoadCase {
    pub fn force(node: NodeKey, force: Vec3) -> Self {
        LoadCase { node, force, moment: Vec3::zeros() }
    }
}

/// Assembled stiffness of one partial structure.
#[derive(Debug, Clone)]
pub struct StiffnessSystem {
    nodes: Vec<NodeKey>,
    positions: Vec<Vec3>,
    index: HashMap<NodeKey, usize>,
    /// First DOF of each free node; `None` for clamped nodes.
    dof: Vec<Option<usize>>,
    matrix: ProfileMatrix,
}

#[derive(Debug, Clone)]
pub struct DeflectionField {
    nodes: Vec<NodeKey>,
    index: HashMap<NodeKey, usize>,
    translation: Vec<Vec3>,
    rotation: Vec<Vec3>,
    residual: f64,
}

impl DeflectionField {
    pub fn translation(&self, node: NodeKey) -> Option<Vec3> {
        self.index.get(&node).map(|&i| self.translation[i])
    }

    pub fn rotation(&self, node: NodeKey) -> Option<Vec3> {
        self.index.get(&node).map(|&i| self.rotation[i])
    }

    pub fn nodes(&self) -> &[NodeKey] {
        &self.nodes
    }

    /// ‖Kδ − f‖ / ‖f‖ of the solve.
    pub fn residual(&self) -> f64 {
        self.residual
    }

    /// Largest translation magnitude over all nodes, with its node.
    pub fn max_translation(&self) -> Option<(NodeKey, f64)> {
        self.nodes.iter().zip(&self.translation).map(|(n, t)| (*n, t.norm())).max_by(|a, b| a.1.total_cmp(&b.1))
    }
}

impl StiffnessSystem {
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn dof_count(&self) -> usize {
        self.matrix.dim()
    }

    pub fn contains(&self, node: NodeKey) -> bool {
        self.index.contains_key(&node)
    }

    pub fn position(&self, node: NodeKey) -> Option<Vec3> {
        self.index.get(&node).map(|&i| self.positions[i])
    }

    pub fn is_clamped(&self, node: NodeKey) -> Option<bool> {
        self.index.get(&node).map(|&i| self.dof[i].is_none())
    }

    pub fn factorize(self) -> Result<FactoredSystem> {
        let factor =
            self.matrix.clone().factorize(SINGULAR_TOL).map_err(|col| Error::Singular(self.describe_dof(col)))?;
        Ok(FactoredSystem { system: self, factor })
    }

    fn describe_dof(&self, col: usize) -> String {
        const NAMES: [&str; 6] = ["ux", "uy", "uz", "rx", "ry", "rz"];
        for (i, d) in self.dof.iter().enumerate() {
            if let Some(base) = d {
                if (*base..base + 6).contains(&col) {
                    return format!("node {} dof {}", self.nodes[i], NAMES[col - base]);
                }
            }
        }
        format!("dof {col}")
    }

    fn load_vector(&self, loads: &[LoadCase]) -> Result<Vec<f64>> {
        let mut f = vec![0.0; self.dof_count()];
        for load in loads {
            let i = *self.index.get(&load.node).ok_or_else(|| Error::LoadNotInSystem(load.node.to_string()))?;
            if let Some(base) = self.dof[i] {
                for k in 0..3 {
                    f[base + k] += load.force[k];
                    f[base + 3 + k] += load.moment[k];
                }
            }
        }
        Ok(f)
    }
}

/// A factored system, reusable for several load cases.
#[derive(Debug, Clone)]
pub struct FactoredSystem {
    system: StiffnessSystem,
    factor: LdlFactor,
}

impl FactoredSystem {
    pub fn system(&self) -> &StiffnessSystem {
        &self.system
    }

    pub fn solve(&self, loads: &[LoadCase]) -> Result<DeflectionField> {
        let sys = &self.system;
        let f = sys.load_vector(loads)?;
        let x = self.factor.solve(&f);
        let r = sys.matrix.mul(&x);
        let num = r.iter().zip(&f).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        let den = f.iter().map(|v| v * v).sum::<f64>().sqrt();
        let residual = if den > 0.0 { num / den } else { num };
        let mut translation = Vec::with_capacity(sys.nodes.len());
        let mut rotation = Vec::with_capacity(sys.nodes.len());
        for d in &sys.dof {
            match d {
                Some(b) => {
                    translation.push(Vec3::new(x[*b], x[b + 1], x[b + 2]));
                    rotation.push(Vec3::new(x[b + 3], x[b + 4], x[b + 5]));
                }
                None => {
                    translation.push(Vec3::zeros());
                    rotation.push(Vec3::zeros());
                }
            }
        }
        Ok(DeflectionField { nodes: sys.nodes.clone(), index: sys.index.clone(), translation, rotation, residual })
    }

    /// 6×6 compliance of a node: response (translation, rotation) to a unit
    /// force or moment applied there. Zero for a clamped node.
    pub fn compliance(&self, node: NodeKey) -> Result<Matrix6<f64>> {
        let sys = &self.system;
        let i = *sys.index.get(&node).ok_or_else(|| Error::LoadNotInSystem(node.to_string()))?;
        let mut c = Matrix6::zeros();
        if let Some(base) = sys.dof[i] {
            for k in 0..6 {
                let mut f = vec![0.0; sys.dof_count()];
                f[base + k] = 1.0;
                self.factor.solve_in_place(&mut f);
                for r in 0..6 {
                    c[(r, k)] = f[base + r];
                }
            }
        }
        Ok(c)
    }
}

/// Assembles the frame of the placed beams, plus the beam being printed when
/// `candidate` is given. Grounded joints are clamped. The candidate's far end
/// is always a separate free node, even when it coincides with a placed joint.
pub fn assemble_system(
    state: &AssemblyState<'_>,
    candidate: Option<(BeamId, PrintDirection)>,
    model: &StiffnessModel,
) -> Result<StiffnessSystem> {
    let design = state.design;
    if !design.joints().iter().any(|j| j.grounded) {
        return Err(Error::NoGround);
    }
    let mut b = Builder::default();
    for beam_id in state.placed.iter() {
        let beam = design.beam(beam_id);
        let section = Section::circular(beam.diameter);
        let last = beam.path.len() - 1;
        let mut prev = b.node(NodeKey::Joint(beam.p), beam.path[0], design.joint(beam.p).grounded);
        for (k, pt) in beam.path.iter().enumerate().skip(1) {
            let key = if k == last { NodeKey::Joint(beam.q) } else { NodeKey::Interior(beam_id, k) };
            let clamped = k == last && design.joint(beam.q).grounded;
            let next = b.node(key, *pt, clamped);
            b.element(prev, next, section, beam_id)?;
            prev = next;
        }
    }
    if let Some((beam_id, dir)) = candidate {
        let beam = design.try_beam(beam_id)?;
        let section = Section::circular(beam.diameter);
        let start = dir.start(beam);
        let path = dir.oriented_path(beam);
        let last = path.len() - 1;
        let mut prev = b.node(NodeKey::Joint(start), path[0], design.joint(start).grounded);
        for (k, pt) in path.iter().enumerate().skip(1) {
            let key = if k == last { NodeKey::Tip } else { NodeKey::TipInterior(k) };
            let next = b.node(key, *pt, false);
            b.element(prev, next, section, beam_id)?;
            prev = next;
        }
    }
    b.finish(model)
}

#[derive(Default)]
struct Builder {
    nodes: Vec<NodeKey>,
    positions: Vec<Vec3>,
    clamped: Vec<bool>,
    index: HashMap<NodeKey, usize>,
    elements: Vec<(usize, usize, Section)>,
}

impl Builder {
    fn node(&mut self, key: NodeKey, pos: Vec3, clamped: bool) -> usize {
        if let Some(&i) = self.index.get(&key) {
            return i;
        }
        let i = self.nodes.len();
        self.nodes.push(key);
        self.positions.push(pos);
        self.clamped.push(clamped);
        self.index.insert(key, i);
        i
    }

    fn element(&mut self, a: usize, b: usize, section: Section, beam: BeamId) -> Result<()> {
        if (self.positions[a] - self.positions[b]).norm() <= 0.0 {
            return Err(Error::ZeroLengthSegment(beam));
        }
        self.elements.push((a, b, section));
        Ok(())
    }

    fn finish(self, model: &StiffnessModel) -> Result<StiffnessSystem> {
        let n = self.nodes.len();
        let mut uf = JointUnion::new(n);
        for (a, b, _) in &self.elements {
            uf.union(*a, *b);
        }
        let mut anchored = vec![false; n];
        for i in 0..n {
            if self.clamped[i] {
                anchored[uf.find(i)] = true;
            }
        }
        let mut floating: Vec<JointId> = (0..n)
            .filter(|&i| !anchored[uf.find(i)])
            .filter_map(|i| match self.nodes[i] {
                NodeKey::Joint(j) => Some(j),
                _ => None,
            })
            .collect();
        if (0..n).any(|i| !anchored[uf.find(i)]) {
            floating.sort();
            return Err(Error::Floating(floating));
        }

        // Order the free nodes to keep the profile narrow.
        let free: Vec<usize> = (0..n).filter(|&i| !self.clamped[i]).collect();
        let mut local = vec![usize::MAX; n];
        for (k, &i) in free.iter().enumerate() {
            local[i] = k;
        }
        let mut adj = vec![Vec::new(); free.len()];
        for (a, b, _) in &self.elements {
            let (la, lb) = (local[*a], local[*b]);
            if la != usize::MAX && lb != usize::MAX {
                adj[la].push(lb);
                adj[lb].push(la);
            }
        }
        let order = reverse_cuthill_mckee(&adj);
        let mut dof = vec![None; n];
        for (pos, &k) in order.iter().enumerate() {
            dof[free[k]] = Some(6 * pos);
        }
        let mut first: Vec<usize> = vec![0; 6 * free.len()];
        for i in 0..n {
            if let Some(base) = dof[i] {
                for c in base..base + 6 {
                    first[c] = base;
                }
            }
        }
        for (a, b, _) in &self.elements {
            if let (Some(da), Some(db)) = (dof[*a], dof[*b]) {
                let (lo, hi) = if da < db { (da, db) } else { (db, da) };
                for c in hi..hi + 6 {
                    first[c] = first[c].min(lo);
                }
            }
        }
        let mut matrix = ProfileMatrix::new(first);
        for (a, b, section) in &self.elements {
            let k = element_stiffness(&self.positions[*a], &self.positions[*b], &model.material, section)
                .expect("element length checked on insertion");
            let ends = [dof[*a], dof[*b]];
            for (ei, di) in ends.iter().enumerate() {
                let Some(di) = di else { continue };
                for (ej, dj) in ends.iter().enumerate() {
                    let Some(dj) = dj else { continue };
                    // Upper triangle only; the profile is symmetric.
                    for r in 0..6 {
                        for c in 0..6 {
                            if di + r <= dj + c {
                                matrix.add(di + r, dj + c, k[(6 * ei + r, 6 * ej + c)]);
                            }
                        }
                    }
                }
            }
        }
        Ok(StiffnessSystem { nodes: self.nodes, positions: self.positions, index: self.index, dof, matrix })
    }
}

pub fn solve_deflections(system: &StiffnessSystem, loads: &[LoadCase]) -> Result<DeflectionField> {
    system.clone().factorize()?.solve(loads)
}

/// Tip deflection magnitude when `beam` is printed in direction `dir` onto the
/// state, using the full assembled structure.
pub fn exact_cost(state: &AssemblyState<'_>, beam: BeamId, dir: PrintDirection, model: &StiffnessModel) -> Result<f64> {
    let sys = assemble_system(state, Some((beam, dir)), model)?.factorize()?;
    let field = sys.solve(&[LoadCase::force(NodeKey::Tip, model.probe_force())])?;
    Ok(field.translation(NodeKey::Tip).expect("tip is always assembled").norm())
}

/// Tip deflection magnitude when the beam is modelled as the end of the
/// cantilevered chain `path` (root clamped at a stable joint), ignoring the
/// rest of the structure.
pub fn heuristic_cost(
    state: &AssemblyState<'_>,
    path: &[(BeamId, PrintDirection)],
    beam: BeamId,
    dir: PrintDirection,
    model: &StiffnessModel,
) -> Result<f64> {
    let design = state.design;
    let cand = design.try_beam(beam)?;
    let stability = Stability::of(state);
    let start = dir.start(cand);
    let root = match path.first() {
        Some((b, d)) => d.start(design.try_beam(*b)?),
        None => start,
    };
    if !stability.is_stable(root) {
        return Err(Error::InvalidPath(format!("root {root} is not stable")));
    }
    let mut seen = vec![root];
    let mut at = root;
    for (b, d) in path {
        let pb = design.try_beam(*b)?;
        if !state.is_placed(*b) {
            return Err(Error::BeamNotPlaced(*b));
        }
        if d.start(pb) != at {
            return Err(Error::InvalidPath(format!("beam {b} does not continue from {at}")));
        }
        at = d.end(pb);
        if seen.contains(&at) {
            return Err(Error::InvalidPath(format!("joint {at} visited twice")));
        }
        seen.push(at);
    }
    if at != start {
        return Err(Error::InvalidPath(format!("path ends at {at}, beam {beam} starts at {start}")));
    }
    let mut segments: Vec<ChainSegment> = path
        .iter()
        .map(|(b, d)| {
            let pb = design.beam(*b);
            ChainSegment { path: d.oriented_path(pb), section: Section::circular(pb.diameter) }
        })
        .collect();
    segments.push(ChainSegment { path: dir.oriented_path(cand), section: Section::circular(cand.diameter) });
    let t = chain_tip_translation(&segments, &model.material, &model.probe_force())?;
    Ok(t.norm())
}

/// The chain of placed beams hanging from the nearest stable joint down to
/// `joint`, oriented root-outward. Empty when `joint` is itself stable; `None`
/// when the unstable part around `joint` is not a simple chain.
pub fn cantilever_path(state: &AssemblyState<'_>, joint: JointId) -> Option<Vec<(BeamId, PrintDirection)>> {
    let stability = Stability::of(state);
    let design = state.design;
    let mut rev = Vec::new();
    let mut at = joint;
    let mut prev_beam: Option<BeamId> = None;
    let mut steps = 0;
    while !stability.is_stable(at) {
        let next: Vec<BeamId> = state.placed_incident(at).filter(|b| Some(*b) != prev_beam).collect();
        let b = match (prev_beam, next.as_slice()) {
            (_, [b]) => *b,
            _ => return None,
        };
        let beam = design.beam(b);
        let other = beam.other_end(at);
        rev.push((b, PrintDirection::starting_at(beam, other).expect("endpoint")));
        prev_beam = Some(b);
        at = other;
        steps += 1;
        if steps > design.beam_count() {
            return None;
        }
    }
    rev.reverse();
    Some(rev)
}

/// Tip deflection of `chain` hung from `root`, combined with the rigid-body
/// motion of `root` given its compliance in the rest of the structure. Equal
/// to [`exact_cost`] when the chain touches the structure only at `root`.
pub fn cost_through_root(
    root_compliance: &Matrix6<f64>,
    chain: &[ChainSegment],
    model: &StiffnessModel,
) -> Result<f64> {
    let force = model.probe_force();
    let local = chain_tip_translation(chain, &model.material, &force)?;
    let root = chain.first().map(|s| s.path[0]).unwrap_or_else(Vec3::zeros);
    let tip = *chain.last().and_then(|s| s.path.last()).unwrap_or(&root);
    let arm = tip - root;
    let mut wrench = Vector6::zeros();
    wrench.fixed_rows_mut::<3>(0).copy_from(&force);
    wrench.fixed_rows_mut::<3>(3).copy_from(&arm.cross(&force));
    let motion = root_compliance * wrench;
    let u: Vec3 = motion.fixed_rows::<3>(0).into();
    let w: Vec3 = motion.fixed_rows::<3>(3).into();
    Ok((local + u + w.cross(&arm)).norm())
}

/// Compliance of a joint within the placed structure (zero if grounded).
pub fn joint_compliance(state: &AssemblyState<'_>, joint: JointId, model: &StiffnessModel) -> Result<Matrix6<f64>> {
    if state.design.try_joint(joint)?.grounded {
        return Ok(Matrix6::zeros());
    }
    assemble_system(state, None, model)?.factorize()?.compliance(NodeKey::Joint(joint))
}

#[cfg(test)]
mod tests;
