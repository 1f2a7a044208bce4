//! Sequence checking and exhaustive search over assembly states.
//!
//! Connection and cantilever rules are re-implemented here from their
//! definitions rather than shared with [`crate::constraints`], so that the
//! planner and the checker can disagree. Directionality and collision come
//! from the precedence set, which is derived once per design.

use std::collections::{HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::bitset::BeamSet;
use crate::constraints::{PrecedenceSet, PrintDirection};
use crate::error::{Error, Result};
use crate::model::{AssemblyState, BeamId, FrameDesign, JointId};

pub const EXHAUSTIVE_LIMIT: usize = 14;
pub const MINMAX_LIMIT: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ViolationKind {
    Directionality,
    Collision,
    Connection,
    Cantilever,
    Duplicate,
    Missing,
}

impl fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ViolationKind::Directionality => "directionality",
            ViolationKind::Collision => "collision",
            ViolationKind::Connection => "connection",
            ViolationKind::Cantilever => "cantilever",
            ViolationKind::Duplicate => "duplicate",
            ViolationKind::Missing => "missing",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    /// Index into the sequence; `None` for beams the sequence never prints.
    pub step: Option<usize>,
    pub beam: BeamId,
    pub kind: ViolationKind,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.step {
            Some(s) => write!(f, "step {s}: {} violation on {}: {}", self.kind, self.beam, self.detail),
            None => write!(f, "{} violation on {}: {}", self.kind, self.beam, self.detail),
        }
    }
}

/// Joints reachable from any grounded joint, skipping `removed`.
fn grounded_reach(design: &FrameDesign, placed: &BeamSet, removed: Option<JointId>) -> Vec<bool> {
    let mut seen = vec![false; design.joint_count()];
    let mut stack: Vec<JointId> =
        design.joint_ids().filter(|j| design.joint(*j).grounded && Some(*j) != removed).collect();
    for j in &stack {
        seen[j.0] = true;
    }
    while let Some(j) = stack.pop() {
        for b in design.incident(j) {
            if placed.contains(*b) {
                let k = design.beam(*b).other_end(j);
                if Some(k) != removed && !seen[k.0] {
                    seen[k.0] = true;
                    stack.push(k);
                }
            }
        }
    }
    seen
}

/// A beam placed at `joint` hangs from it when the beam's far end loses
/// every route to the substrate once `joint` is removed.
fn hanging_at(design: &FrameDesign, placed: &BeamSet, joint: JointId) -> Option<BeamId> {
    let mut reach: Option<Vec<bool>> = None;
    for b in design.incident(joint) {
        if !placed.contains(*b) {
            continue;
        }
        let r = reach.get_or_insert_with(|| grounded_reach(design, placed, Some(joint)));
        if !r[design.beam(*b).other_end(joint).0] {
            return Some(*b);
        }
    }
    None
}

fn touches(design: &FrameDesign, placed: &BeamSet, joint: JointId) -> bool {
    design.joint(joint).grounded || design.incident(joint).iter().any(|b| placed.contains(*b))
}

/// Why placing `(beam, dir)` onto `placed` is infeasible, per constraint.
fn step_violations(
    design: &FrameDesign,
    prec: &PrecedenceSet,
    placed: &BeamSet,
    beam: BeamId,
    dir: PrintDirection,
) -> Vec<(ViolationKind, String)> {
    let mut out = Vec::new();
    let b = design.beam(beam);
    if !prec.is_allowed(beam, dir) {
        out.push((ViolationKind::Directionality, format!("direction {dir} is not printable")));
    }
    let blocking: Vec<BeamId> = prec.successors(beam).iter().copied().filter(|s| placed.contains(*s)).collect();
    if !blocking.is_empty() {
        out.push((ViolationKind::Collision, format!("nozzle would hit already printed {}", join_ids(&blocking))));
    }
    let start = dir.start(b);
    if !touches(design, placed, start) {
        out.push((ViolationKind::Connection, format!("start joint {start} is neither grounded nor printed")));
    }
    for j in [b.p, b.q] {
        if let Some(h) = hanging_at(design, placed, j) {
            out.push((ViolationKind::Cantilever, format!("joint {j} carries hanging beam {h}")));
            break;
        }
    }
    out
}

fn join_ids(ids: &[BeamId]) -> String {
    ids.iter().map(|b| b.to_string()).collect::<Vec<_>>().join(", ")
}

/// Replays `sequence` from the empty state and lists every violated
/// constraint. An empty result means the sequence is feasible and complete.
pub fn verify_sequence(
    design: &FrameDesign,
    sequence: &[(BeamId, PrintDirection)],
    prec: &PrecedenceSet,
) -> Vec<Violation> {
    let mut placed = BeamSet::new(design.beam_count());
    let mut out = Vec::new();
    for (i, &(beam, dir)) in sequence.iter().enumerate() {
        if beam.0 >= design.beam_count() {
            out.push(Violation {
                step: Some(i),
                beam,
                kind: ViolationKind::Missing,
                detail: "beam is not part of the design".into(),
            });
            continue;
        }
        if placed.contains(beam) {
            out.push(Violation {
                step: Some(i),
                beam,
                kind: ViolationKind::Duplicate,
                detail: "beam printed twice".into(),
            });
            continue;
        }
        for (kind, detail) in step_violations(design, prec, &placed, beam, dir) {
            out.push(Violation { step: Some(i), beam, kind, detail });
        }
        placed.insert(beam);
    }
    for b in design.beam_ids() {
        if !placed.contains(b) {
            out.push(Violation {
                step: None,
                beam: b,
                kind: ViolationKind::Missing,
                detail: "beam never printed".into(),
            });
        }
    }
    out
}

fn feasible_from(
    design: &FrameDesign,
    prec: &PrecedenceSet,
    placed: &BeamSet,
    target: &BeamSet,
) -> Vec<(BeamId, PrintDirection)> {
    let mut out = Vec::new();
    for b in target.iter() {
        // A target predecessor left for later would be printed after `b`.
        if placed.contains(b) || prec.predecessors(b).iter().any(|p| target.contains(*p) && !placed.contains(*p)) {
            continue;
        }
        for d in PrintDirection::BOTH {
            if step_violations(design, prec, placed, b, d).is_empty() {
                out.push((b, d));
            }
        }
    }
    out
}

struct Search<'a> {
    design: &'a FrameDesign,
    prec: &'a PrecedenceSet,
    target: &'a BeamSet,
    dead: HashSet<BeamSet>,
    memoize: bool,
}

impl Search<'_> {
    fn reach(&mut self, placed: &BeamSet) -> bool {
        if placed == self.target {
            return true;
        }
        if self.memoize && self.dead.contains(placed) {
            return false;
        }
        let feasible = feasible_from(self.design, self.prec, placed, self.target);
        if self.memoize {
            // A step that cannot block anything later commutes to the front
            // of any completion, so it needs no branching.
            if let Some((b, _)) = feasible.iter().find(|(b, _)| self.harmless(placed, *b)) {
                let ok = self.reach(&placed.with(*b));
                if !ok {
                    self.dead.insert(placed.clone());
                }
                return ok;
            }
        }
        let mut tried = BeamSet::new(self.design.beam_count());
        for (b, _) in feasible {
            if !tried.insert(b) {
                continue;
            }
            if self.reach(&placed.with(b)) {
                return true;
            }
        }
        if self.memoize {
            self.dead.insert(placed.clone());
        }
        false
    }

    /// Placing `b` disables nothing: its target predecessors are all placed
    /// (so no collision pair can be broken later), and it does not hang off
    /// any joint that an unplaced target beam still has to use. Other placed
    /// beams only gain support from an extra beam, so no other joint starts
    /// blocking either.
    fn harmless(&self, placed: &BeamSet, b: BeamId) -> bool {
        let d = self.design;
        if self.prec.predecessors(b).iter().any(|p| self.target.contains(*p) && !placed.contains(*p)) {
            return false;
        }
        let after = placed.with(b);
        let beam = d.beam(b);
        [beam.p, beam.q].into_iter().all(|j| {
            let needed = d.incident(j).iter().any(|x| self.target.contains(*x) && !after.contains(*x));
            !needed || hanging_at(d, &after, j).is_none()
        })
    }
}

fn check_scope(g: &AssemblyState<'_>, h: &AssemblyState<'_>, limit: usize) -> Result<()> {
    if !g.placed.is_subset(&h.placed) {
        return Err(Error::Config("reachable: start state is not a subset of the goal".into()));
    }
    let size = h.placed.len() - g.placed.len();
    if size > limit {
        return Err(Error::OracleLimit { size, limit });
    }
    Ok(())
}

/// Whether some feasible forward sequence turns `g` into `h`.
pub fn reachable(g: &AssemblyState<'_>, h: &AssemblyState<'_>, prec: &PrecedenceSet) -> Result<bool> {
    reachable_with_limit(g, h, prec, EXHAUSTIVE_LIMIT)
}

pub fn reachable_with_limit(
    g: &AssemblyState<'_>,
    h: &AssemblyState<'_>,
    prec: &PrecedenceSet,
    limit: usize,
) -> Result<bool> {
    check_scope(g, h, limit)?;
    let mut s = Search { design: g.design, prec, target: &h.placed, dead: HashSet::new(), memoize: true };
    Ok(s.reach(&g.placed))
}

/// Same search without the dead-state memo; exponential, for cross-checking.
pub fn reachable_unmemoized(
    g: &AssemblyState<'_>,
    h: &AssemblyState<'_>,
    prec: &PrecedenceSet,
    limit: usize,
) -> Result<bool> {
    check_scope(g, h, limit)?;
    let mut s = Search { design: g.design, prec, target: &h.placed, dead: HashSet::new(), memoize: false };
    Ok(s.reach(&g.placed))
}

/// Greedy extension guided by reachability: from the empty state, repeatedly
/// add the first feasible beam from which the full state stays reachable.
/// `Ok(None)` when the design is unconstructable.
pub fn brute_force_plan(design: &FrameDesign, prec: &PrecedenceSet) -> Result<Option<Vec<(BeamId, PrintDirection)>>> {
    brute_force_plan_with_limit(design, prec, EXHAUSTIVE_LIMIT)
}

pub fn brute_force_plan_with_limit(
    design: &FrameDesign,
    prec: &PrecedenceSet,
    limit: usize,
) -> Result<Option<Vec<(BeamId, PrintDirection)>>> {
    let full = AssemblyState::full(design);
    check_scope(&AssemblyState::empty(design), &full, limit)?;
    let mut search = Search { design, prec, target: &full.placed, dead: HashSet::new(), memoize: true };
    let mut placed = BeamSet::new(design.beam_count());
    let mut seq = Vec::new();
    while placed != full.placed {
        let next = feasible_from(design, prec, &placed, &full.placed)
            .into_iter()
            .find(|(b, _)| search.reach(&placed.with(*b)));
        match next {
            Some((b, d)) => {
                placed.insert(b);
                seq.push((b, d));
            }
            None => return Ok(None),
        }
    }
    Ok(Some(seq))
}

#[derive(Debug, Clone, PartialEq)]
pub struct MinMax {
    pub max_cost: f64,
    pub sequence: Vec<(BeamId, PrintDirection)>,
}

/// Minimum over all feasible complete sequences (and direction choices) of
/// the largest per-step cost. `Ok(None)` when the design is unconstructable.
pub fn brute_force_minmax<F>(design: &FrameDesign, prec: &PrecedenceSet, cost: F) -> Result<Option<MinMax>>
where
    F: Fn(&AssemblyState<'_>, BeamId, PrintDirection) -> Result<f64>,
{
    brute_force_minmax_with_limit(design, prec, cost, MINMAX_LIMIT)
}

pub fn brute_force_minmax_with_limit<F>(
    design: &FrameDesign,
    prec: &PrecedenceSet,
    cost: F,
    limit: usize,
) -> Result<Option<MinMax>>
where
    F: Fn(&AssemblyState<'_>, BeamId, PrintDirection) -> Result<f64>,
{
    let full = AssemblyState::full(design);
    check_scope(&AssemblyState::empty(design), &full, limit)?;
    // best[S] = (optimal bottleneck from S, first step on an optimal path)
    let mut best: HashMap<BeamSet, Option<(f64, (BeamId, PrintDirection))>> = HashMap::new();
    let empty = BeamSet::new(design.beam_count());
    let root = minmax_rec(design, prec, &cost, &empty, &full.placed, &mut best)?;
    let Some(max_cost) = root else { return Ok(None) };
    let mut sequence = Vec::new();
    let mut at = empty;
    while at != full.placed {
        let (_, step) = best[&at].expect("optimal path continues");
        sequence.push(step);
        at = at.with(step.0);
    }
    Ok(Some(MinMax { max_cost, sequence }))
}

fn minmax_rec<F>(
    design: &FrameDesign,
    prec: &PrecedenceSet,
    cost: &F,
    placed: &BeamSet,
    full: &BeamSet,
    best: &mut HashMap<BeamSet, Option<(f64, (BeamId, PrintDirection))>>,
) -> Result<Option<f64>>
where
    F: Fn(&AssemblyState<'_>, BeamId, PrintDirection) -> Result<f64>,
{
    if placed == full {
        return Ok(Some(0.0));
    }
    if let Some(v) = best.get(placed) {
        return Ok(v.map(|(c, _)| c));
    }
    let state = AssemblyState { design, placed: placed.clone() };
    let mut result: Option<(f64, (BeamId, PrintDirection))> = None;
    for (b, d) in feasible_from(design, prec, placed, full) {
        let Some(rest) = minmax_rec(design, prec, cost, &placed.with(b), full, best)? else { continue };
        let here = cost(&state, b, d)?;
        let total = here.max(rest);
        if result.is_none_or(|(c, _)| total < c) {
            result = Some((total, (b, d)));
        }
    }
    best.insert(placed.clone(), result);
    Ok(result.map(|(c, _)| c))
}
