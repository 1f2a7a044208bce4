//! Sequence planning.
//!
//! [`plan`] grows the structure one consistent subassembly at a time:
//!
//! * a set of beam paths between stable joints found by the tree search in
//!   [`search`],
//! * a single beam that hangs in the finished design, once its predecessors
//!   are in place,
//! * a single beam joining two stable joints.
//!
//! Each round takes the cheapest available unit. [`order_for_deadheading`]
//! then reorders the result within the recorded constraints to shorten
//! travel moves, and [`emit_toolpath`] turns it into machine moves.

pub mod costs;
mod deadhead;
pub mod search;
mod toolpath;

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use log::debug;
use serde::{Deserialize, Serialize};

use crate::bitset::BeamSet;
use crate::constraints::{cantilever_feasible, feasible_actions, PrecedenceSet, PrintDirection};
use crate::error::{Error, Result};
use crate::model::{cantilevered_beams, joint_supports_pivot, AssemblyState, BeamId, FrameDesign, JointUnion};
use crate::stiffness::StiffnessModel;

pub use costs::{CostEvaluator, StateView};
pub use deadhead::{deadhead_time, order_for_deadheading, MachineModel};
pub use search::{ConsistentSubassembly, Forest, SubassemblyTree};
pub use toolpath::{emit_toolpath, Move, Toolpath};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CostMode {
    #[default]
    Exact,
    Heuristic,
}

impl fmt::Display for CostMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CostMode::Exact => "exact",
            CostMode::Heuristic => "heuristic",
        })
    }
}

impl FromStr for CostMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(CostMode::Exact),
            "heuristic" => Ok(CostMode::Heuristic),
            other => Err(Error::Config(format!("unknown cost mode {other:?}; expected exact or heuristic"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanStep {
    pub beam: BeamId,
    pub direction: PrintDirection,
    /// Tip deflection when this beam is printed, mm.
    pub cost: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UnitKind {
    /// Paths between stable joints from the tree search.
    Paths,
    /// A beam that hangs in the finished design.
    Hanging,
    /// One beam joining two stable joints.
    Closing,
    /// Remaining beams sequenced by exhaustive search.
    Exhaustive,
}

/// One accepted subassembly, in plan order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Unit {
    pub kind: UnitKind,
    pub beams: Vec<BeamId>,
    pub cost: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Plan {
    pub steps: Vec<PlanStep>,
    /// Recorded precedence pairs `(a, b)`: `a` is printed before `b`.
    pub partial_order: Vec<(BeamId, BeamId)>,
    pub max_cost: f64,
    pub cost_mode: CostMode,
    pub units: Vec<Unit>,
}

impl Plan {
    pub fn sequence(&self) -> Vec<(BeamId, PrintDirection)> {
        self.steps.iter().map(|s| (s.beam, s.direction)).collect()
    }

    pub fn step_costs(&self) -> Vec<f64> {
        self.steps.iter().map(|s| s.cost).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlannerOptions {
    pub cost_mode: CostMode,
    pub stiffness: StiffnessModel,
    /// Largest number of paths combined while closing a candidate under
    /// predecessors.
    pub max_closure_paths: usize,
    /// When the search stalls with at most this many beams left, the rest
    /// is sequenced by exhaustive min-max search.
    pub exhaustive_fallback: usize,
}

impl Default for PlannerOptions {
    fn default() -> Self {
        PlannerOptions {
            cost_mode: CostMode::Exact,
            stiffness: StiffnessModel::default(),
            max_closure_paths: 8,
            exhaustive_fallback: 12,
        }
    }
}

/// Plans a full sequence for `design`.
pub fn plan(design: &FrameDesign, prec: &PrecedenceSet, options: &PlannerOptions) -> Result<Plan> {
    Planner::new(design, prec, options).run()
}

struct Planner<'a> {
    design: &'a FrameDesign,
    prec: &'a PrecedenceSet,
    options: PlannerOptions,
    hanging: BeamSet,
    placed: BeamSet,
    steps: Vec<PlanStep>,
    units: Vec<Unit>,
    running_max: f64,
    eval: CostEvaluator<'a>,
}

impl<'a> Planner<'a> {
    fn new(design: &'a FrameDesign, prec: &'a PrecedenceSet, options: &PlannerOptions) -> Self {
        Planner {
            design,
            prec,
            options: *options,
            hanging: cantilevered_beams(&AssemblyState::full(design)),
            placed: BeamSet::new(design.beam_count()),
            steps: Vec::new(),
            units: Vec::new(),
            running_max: 0.0,
            eval: CostEvaluator::new(design, options.cost_mode, options.stiffness),
        }
    }

    fn pivots(&self) -> Vec<bool> {
        let design = self.design;
        let mut out = vec![false; design.joint_count()];
        let view = StateView::new(design, &self.placed);
        for b in self.placed.iter() {
            let beam = design.beam(b);
            for j in [beam.p, beam.q] {
                if !out[j.0] && !(view.is_stable(beam.p) && view.is_stable(beam.q)) {
                    out[j.0] = joint_supports_pivot(design, &self.placed, j);
                }
            }
        }
        out
    }

    fn run(mut self) -> Result<Plan> {
        let design = self.design;
        let total = design.beam_count();
        let mut forest = Forest::new();
        let mut view = StateView::new(design, &self.placed);
        let mut pivot = self.pivots();
        {
            let ctx = search::Ctx {
                design: self.design,
                prec: self.prec,
                view: &view,
                hanging: &self.hanging,
                pivot: &pivot,
                max_paths: self.options.max_closure_paths,
            };
            forest.seed_roots(&ctx, &mut self.eval)?;
        }
        while self.placed.len() < total {
            let closers = self.closing_steps(&view, &pivot)?;
            let eager = closers.first().filter(|c| c.2 <= self.running_max).copied();
            let choice = if let Some((b, d, c)) = eager {
                Some((UnitKind::Closing, vec![(b, d)], vec![c]))
            } else {
                let singles = self.hanging_steps(&view, &pivot)?;
                let best_single = closers
                    .iter()
                    .map(|c| (UnitKind::Closing, *c))
                    .chain(singles.iter().map(|c| (UnitKind::Hanging, *c)))
                    .min_by(|a, b| a.1 .2.total_cmp(&b.1 .2).then((a.1 .0, a.1 .1).cmp(&(b.1 .0, b.1 .1))));
                let bound = best_single.map_or(f64::INFINITY, |s| s.1 .2);
                let ctx = search::Ctx {
                    design: self.design,
                    prec: self.prec,
                    view: &view,
                    hanging: &self.hanging,
                    pivot: &pivot,
                    max_paths: self.options.max_closure_paths,
                };
                let found = forest.find_consistent_subassembly(&ctx, &mut self.eval, bound)?;
                match (found, best_single) {
                    (Some(c), _) => Some((UnitKind::Paths, c.sequence, c.step_costs)),
                    (None, Some((kind, (b, d, c)))) => Some((kind, vec![(b, d)], vec![c])),
                    (None, None) => None,
                }
            };
            let Some((kind, seq, costs)) = choice else {
                let remaining = total - self.placed.len();
                if remaining <= self.options.exhaustive_fallback {
                    debug!("search stalled with {remaining} beams left; finishing exhaustively");
                    self.finish_exhaustively()?;
                    break;
                }
                return Err(Error::NoConsistentSubassembly(format!(
                    "{} of {} beams placed; {}",
                    self.placed.len(),
                    total,
                    forest.describe(design)
                )));
            };
            let cost = costs.iter().copied().fold(0.0, f64::max);
            debug!("unit {:?} of {} beams, cost {:.6e}", kind, seq.len(), cost);
            let placed_now: Vec<BeamId> = seq.iter().map(|s| s.0).collect();
            self.accept(kind, &seq, &costs);
            let old_view = view;
            view = StateView::new(design, &self.placed);
            pivot = self.pivots();
            self.eval.retain_components(&view);
            let ctx = search::Ctx {
                design: self.design,
                prec: self.prec,
                view: &view,
                hanging: &self.hanging,
                pivot: &pivot,
                max_paths: self.options.max_closure_paths,
            };
            forest.rebase(&ctx, &mut self.eval, &old_view, &placed_now)?;
        }
        let partial_order = record_constraints(design, &self.steps);
        Ok(Plan {
            max_cost: self.steps.iter().map(|s| s.cost).fold(0.0, f64::max),
            steps: self.steps,
            partial_order,
            cost_mode: self.options.cost_mode,
            units: self.units,
        })
    }

    fn accept(&mut self, kind: UnitKind, seq: &[(BeamId, PrintDirection)], costs: &[f64]) {
        for (&(beam, direction), &cost) in seq.iter().zip(costs) {
            self.placed.insert(beam);
            self.steps.push(PlanStep { beam, direction, cost });
            self.running_max = self.running_max.max(cost);
        }
        self.units.push(Unit {
            kind,
            beams: seq.iter().map(|s| s.0).collect(),
            cost: costs.iter().copied().fold(0.0, f64::max),
        });
    }

    fn state(&self) -> AssemblyState<'a> {
        AssemblyState { design: self.design, placed: self.placed.clone() }
    }

    /// Beams joining two stable joints, cheapest first.
    fn closing_steps(&mut self, view: &StateView, pivot: &[bool]) -> Result<Vec<(BeamId, PrintDirection, f64)>> {
        let design = self.design;
        let state = self.state();
        let mut out = Vec::new();
        for b in design.beam_ids() {
            let beam = design.beam(b);
            if self.placed.contains(b)
                || self.hanging.contains(b)
                || !view.is_stable(beam.p)
                || !view.is_stable(beam.q)
                || pivot[beam.p.0]
                || pivot[beam.q.0]
                || !self.prec.predecessors(b).iter().all(|p| self.placed.contains(*p))
            {
                continue;
            }
            for d in self.prec.allowed(b).iter() {
                if cantilever_feasible(&state, b, d) {
                    out.push((b, d, self.eval.step_cost(view, b, d)?));
                }
            }
        }
        out.sort_by(|a, b| a.2.total_cmp(&b.2).then((a.0, a.1).cmp(&(b.0, b.1))));
        Ok(out)
    }

    /// Beams that hang in the finished design and can go in now without
    /// blocking a joint that still needs other beams.
    fn hanging_steps(&mut self, view: &StateView, pivot: &[bool]) -> Result<Vec<(BeamId, PrintDirection, f64)>> {
        let design = self.design;
        let state = self.state();
        let mut out = Vec::new();
        for b in self.hanging.iter() {
            if self.placed.contains(b) || !self.prec.predecessors(b).iter().all(|p| self.placed.contains(*p)) {
                continue;
            }
            let beam = design.beam(b);
            if pivot[beam.p.0] || pivot[beam.q.0] {
                continue;
            }
            let after = self.placed.with(b);
            let blocks = [beam.p, beam.q].into_iter().any(|j| {
                joint_supports_pivot(design, &after, j) && design.incident(j).iter().any(|x| !after.contains(*x))
            });
            if blocks {
                continue;
            }
            for d in self.prec.allowed(b).iter() {
                if state.joint_present(d.start(beam)) && cantilever_feasible(&state, b, d) {
                    out.push((b, d, self.eval.step_cost(view, b, d)?));
                }
            }
        }
        out.sort_by(|a, b| a.2.total_cmp(&b.2).then((a.0, a.1).cmp(&(b.0, b.1))));
        Ok(out)
    }

    /// Exhaustive min-max over the remaining beams from the current state.
    fn finish_exhaustively(&mut self) -> Result<()> {
        let design = self.design;
        let full = BeamSet::full(design.beam_count());
        let mut memo: HashMap<BeamSet, Option<(f64, (BeamId, PrintDirection, f64))>> = HashMap::new();
        let start = self.placed.clone();
        if minmax(self, &start, &full, &mut memo)?.is_none() {
            return Err(Error::NoConsistentSubassembly(format!(
                "{} of {} beams placed and no feasible completion exists",
                self.placed.len(),
                design.beam_count()
            )));
        }
        let mut at = start;
        let mut seq = Vec::new();
        let mut costs = Vec::new();
        while at != full {
            let (_, (b, d, c)) = memo[&at].expect("optimal completion");
            seq.push((b, d));
            costs.push(c);
            at = at.with(b);
        }
        self.accept(UnitKind::Exhaustive, &seq, &costs);
        Ok(())
    }
}

type Memo = HashMap<BeamSet, Option<(f64, (BeamId, PrintDirection, f64))>>;

fn minmax(p: &mut Planner<'_>, placed: &BeamSet, full: &BeamSet, memo: &mut Memo) -> Result<Option<f64>> {
    if placed == full {
        return Ok(Some(0.0));
    }
    if let Some(v) = memo.get(placed) {
        return Ok(v.map(|x| x.0));
    }
    let state = AssemblyState { design: p.design, placed: placed.clone() };
    let view = StateView::new(p.design, placed);
    let mut best: Option<(f64, (BeamId, PrintDirection, f64))> = None;
    for (b, d) in feasible_actions(&state, p.prec) {
        let Some(rest) = minmax(p, &placed.with(b), full, memo)? else { continue };
        let c = p.eval.step_cost(&view, b, d)?;
        let total = c.max(rest);
        if best.is_none_or(|x| total < x.0) {
            best = Some((total, (b, d, c)));
        }
    }
    memo.insert(placed.clone(), best);
    Ok(best.map(|x| x.0))
}

/// Precedence pairs implied by the plan: every beam follows the beam
/// printed last in each connected component it attaches to. Together with
/// the fixed directions, any order respecting these pairs repeats every step
/// cost of the plan.
pub fn record_constraints(design: &FrameDesign, steps: &[PlanStep]) -> Vec<(BeamId, BeamId)> {
    let mut uf = JointUnion::new(design.joint_count());
    let mut last: HashMap<usize, BeamId> = HashMap::new();
    let mut touched = vec![false; design.joint_count()];
    let mut pairs = Vec::new();
    for s in steps {
        let beam = design.beam(s.beam);
        let mut preds = Vec::new();
        for j in [beam.p, beam.q] {
            if touched[j.0] {
                let r = uf.find(j.0);
                if let Some(&l) = last.get(&r) {
                    if !preds.contains(&l) {
                        preds.push(l);
                    }
                }
            }
        }
        for l in preds {
            pairs.push((l, s.beam));
        }
        for j in [beam.p, beam.q] {
            let r = uf.find(j.0);
            last.remove(&r);
            touched[j.0] = true;
        }
        uf.union(beam.p.0, beam.q.0);
        last.insert(uf.find(beam.p.0), s.beam);
    }
    pairs
}

#[cfg(test)]
mod tests;
