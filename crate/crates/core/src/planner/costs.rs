//! Step costs for the planner.
//!
//! A hanging chain carries no load except at its own tip, so printing onto
//! it deflects the tip by the chain's own response plus the rigid motion of
//! the stable joint it hangs from. That joint's 6×6 compliance depends only
//! on the stable beams of its component, which is what gets factored and
//! cached here. In heuristic mode the root is treated as clamped.

use std::collections::HashMap;
use std::sync::Arc;

use nalgebra::Matrix6;

use super::CostMode;
use crate::bitset::BeamSet;
use crate::constraints::PrintDirection;
use crate::error::Result;
use crate::model::{AssemblyState, BeamId, FrameDesign, JointId, JointUnion, Stability};
use crate::stiffness::{
    assemble_system, cantilever_path, cost_through_root, exact_cost, ChainSegment, FactoredSystem, NodeKey, Section,
    StiffnessModel,
};

/// Stability and stable components of one assembly state.
#[derive(Debug, Clone)]
pub struct StateView {
    pub placed: BeamSet,
    pub stability: Stability,
    comp_of_joint: Vec<usize>,
    comps: Vec<BeamSet>,
}

impl StateView {
    pub fn new(design: &FrameDesign, placed: &BeamSet) -> Self {
        let state = AssemblyState { design, placed: placed.clone() };
        let stability = Stability::of(&state);
        let n = design.joint_count();
        let mut uf = JointUnion::new(n);
        let stable_beams: Vec<BeamId> = placed
            .iter()
            .filter(|b| {
                let beam = design.beam(*b);
                stability.is_stable(beam.p) && stability.is_stable(beam.q)
            })
            .collect();
        for b in &stable_beams {
            let beam = design.beam(*b);
            uf.union(beam.p.0, beam.q.0);
        }
        let mut comp_of_joint = vec![usize::MAX; n];
        let mut comps: Vec<BeamSet> = Vec::new();
        let mut by_root: HashMap<usize, usize> = HashMap::new();
        for b in &stable_beams {
            let beam = design.beam(*b);
            let r = uf.find(beam.p.0);
            let id = *by_root.entry(r).or_insert_with(|| {
                comps.push(BeamSet::new(design.beam_count()));
                comps.len() - 1
            });
            comps[id].insert(*b);
            comp_of_joint[beam.p.0] = id;
            comp_of_joint[beam.q.0] = id;
        }
        StateView { placed: placed.clone(), stability, comp_of_joint, comps }
    }

    pub fn is_stable(&self, j: JointId) -> bool {
        self.stability.is_stable(j)
    }

    /// Stable beams of the component holding `j`, if `j` carries any.
    pub fn stable_component(&self, j: JointId) -> Option<&BeamSet> {
        self.comps.get(self.comp_of_joint[j.0])
    }
}

type ComplianceCache = HashMap<BeamSet, (Arc<FactoredSystem>, HashMap<JointId, Matrix6<f64>>)>;

pub struct CostEvaluator<'d> {
    design: &'d FrameDesign,
    mode: CostMode,
    model: StiffnessModel,
    cache: ComplianceCache,
}

impl<'d> CostEvaluator<'d> {
    pub fn new(design: &'d FrameDesign, mode: CostMode, model: StiffnessModel) -> Self {
        CostEvaluator { design, mode, model, cache: HashMap::new() }
    }

    pub fn mode(&self) -> CostMode {
        self.mode
    }

    pub fn model(&self) -> &StiffnessModel {
        &self.model
    }

    /// Drops cached factorizations whose component no longer exists.
    pub fn retain_components(&mut self, view: &StateView) {
        self.cache.retain(|k, _| view.comps.contains(k));
    }

    /// Compliance of stable joint `root`; zero when grounded or in heuristic
    /// mode.
    pub fn root_compliance(&mut self, view: &StateView, root: JointId) -> Result<Matrix6<f64>> {
        if self.mode == CostMode::Heuristic || self.design.joint(root).grounded {
            return Ok(Matrix6::zeros());
        }
        let Some(comp) = view.stable_component(root) else {
            return Ok(Matrix6::zeros());
        };
        if !self.cache.contains_key(comp) {
            let state = AssemblyState { design: self.design, placed: comp.clone() };
            let factored = assemble_system(&state, None, &self.model)?.factorize()?;
            self.cache.insert(comp.clone(), (Arc::new(factored), HashMap::new()));
        }
        let (factor, per_joint) = self.cache.get_mut(comp).expect("inserted above");
        if let Some(c) = per_joint.get(&root) {
            return Ok(*c);
        }
        let c = factor.compliance(NodeKey::Joint(root))?;
        per_joint.insert(root, c);
        Ok(c)
    }

    /// Cost of printing `(beam, dir)` onto the placed set of `view`.
    pub fn step_cost(&mut self, view: &StateView, beam: BeamId, dir: PrintDirection) -> Result<f64> {
        let design = self.design;
        let start = dir.start(design.beam(beam));
        let state = AssemblyState { design, placed: view.placed.clone() };
        let path = if view.is_stable(start) { Some(Vec::new()) } else { cantilever_path(&state, start) };
        match path {
            Some(mut chain) => {
                let root = chain.first().map(|(b, d)| d.start(design.beam(*b))).unwrap_or(start);
                chain.push((beam, dir));
                let c = self.root_compliance(view, root)?;
                chain_cost(design, &self.model, &c, &chain)
            }
            // Not a simple hanging chain; fall back to the full model.
            None => exact_cost(&state, beam, dir, &self.model),
        }
    }
}

pub fn segments(design: &FrameDesign, chain: &[(BeamId, PrintDirection)]) -> Vec<ChainSegment> {
    chain
        .iter()
        .map(|(b, d)| {
            let beam = design.beam(*b);
            ChainSegment { path: d.oriented_path(beam), section: Section::circular(beam.diameter) }
        })
        .collect()
}

/// Tip deflection of `chain` hung from a root with compliance `c`.
pub fn chain_cost(
    design: &FrameDesign,
    model: &StiffnessModel,
    c: &Matrix6<f64>,
    chain: &[(BeamId, PrintDirection)],
) -> Result<f64> {
    cost_through_root(c, &segments(design, chain), model)
}
