//! Subassembly trees grown best-first from every stable joint.
//!
//! Each tree node is a simple beam path hanging from its root. Nodes from
//! different trees whose tips meet (or a node whose tip lands on another
//! stable joint) form a candidate subassembly; candidates are closed under
//! collision predecessors by adding more meeting paths from the pool.

use std::cmp::{Ordering, Reverse};
use std::collections::{BTreeSet, BinaryHeap, HashMap, HashSet};

use rayon::prelude::*;

use super::costs::{chain_cost, CostEvaluator, StateView};
use crate::bitset::BeamSet;
use crate::constraints::{step_feasible, PrecedenceSet, PrintDirection};
use crate::error::Result;
use crate::model::{AssemblyState, BeamId, FrameDesign, JointId};

pub type Step = (BeamId, PrintDirection);
pub type NodeId = usize;

/// Read-only facts about the current state shared by one search round.
pub struct Ctx<'a> {
    pub design: &'a FrameDesign,
    pub prec: &'a PrecedenceSet,
    pub view: &'a StateView,
    /// Beams cantilevered in the finished design; never part of a path.
    pub hanging: &'a BeamSet,
    /// Joints of the current state that carry a hanging beam.
    pub pivot: &'a [bool],
    pub max_paths: usize,
}

impl Ctx<'_> {
    fn present(&self, j: JointId) -> bool {
        self.design.joint(j).grounded || self.design.incident(j).iter().any(|b| self.view.placed.contains(*b))
    }
}

#[derive(Debug, Clone)]
pub struct TreeNode {
    pub root: JointId,
    pub path: Vec<Step>,
    /// Root first, then the far end of each beam.
    pub joints: Vec<JointId>,
    pub step_costs: Vec<f64>,
    /// Largest step cost along the path (0 for a root).
    pub cost: f64,
    alive: bool,
    version: u32,
}

impl TreeNode {
    pub fn tip(&self) -> JointId {
        *self.joints.last().expect("joints start with the root")
    }

    pub fn is_root(&self) -> bool {
        self.path.is_empty()
    }

    fn has_beam(&self, b: BeamId) -> bool {
        self.path.iter().any(|(x, _)| *x == b)
    }

    fn key(&self) -> (JointId, Vec<BeamId>) {
        (self.root, self.path.iter().map(|s| s.0).collect())
    }
}

/// Snapshot of one tree for reporting.
#[derive(Debug, Clone)]
pub struct SubassemblyTree {
    pub root: JointId,
    pub nodes: Vec<TreeNode>,
    pub reached_joints: BTreeSet<JointId>,
}

#[derive(Debug, Clone, Copy)]
struct Expansion {
    key: f64,
    step: f64,
    beam: BeamId,
    dir: PrintDirection,
    node: NodeId,
    version: u32,
}

impl PartialEq for Expansion {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Expansion {}
impl PartialOrd for Expansion {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Expansion {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key
            .total_cmp(&other.key)
            .then(self.step.total_cmp(&other.step))
            .then(self.beam.cmp(&other.beam))
            .then(self.dir.cmp(&other.dir))
            .then(self.node.cmp(&other.node))
    }
}

/// A set of meeting paths, possibly already ordered and costed.
#[derive(Debug, Clone)]
struct Candidate {
    key: f64,
    paths: Vec<NodeId>,
    evaluated: Option<(Vec<Step>, Vec<f64>)>,
}

impl PartialEq for Candidate {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Candidate {}
impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key.total_cmp(&other.key).then_with(|| self.paths.cmp(&other.paths))
    }
}

/// The subassembly found by one search round.
#[derive(Debug, Clone)]
pub struct ConsistentSubassembly {
    pub paths: Vec<Vec<Step>>,
    pub sequence: Vec<Step>,
    pub step_costs: Vec<f64>,
    pub cost: f64,
}

enum Check {
    Ok(PrintDirection),
    Parked(BeamId),
    Invalid,
}

#[derive(Default)]
pub struct Forest {
    nodes: Vec<TreeNode>,
    by_key: HashMap<(JointId, Vec<BeamId>), NodeId>,
    by_tip: HashMap<JointId, Vec<NodeId>>,
    containing: HashMap<BeamId, Vec<NodeId>>,
    heap: BinaryHeap<Reverse<Expansion>>,
    parked: HashMap<BeamId, Vec<Expansion>>,
    candidates: BinaryHeap<Reverse<Candidate>>,
    seen_meetings: HashSet<Vec<NodeId>>,
    /// Candidates waiting for a missing predecessor to appear in the pool.
    pending: HashMap<BeamId, Vec<Vec<NodeId>>>,
}

impl Forest {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn alive_count(&self) -> usize {
        self.nodes.iter().filter(|n| n.alive).count()
    }

    pub fn frontier_len(&self) -> usize {
        self.heap.len()
    }

    pub fn node(&self, id: NodeId) -> &TreeNode {
        &self.nodes[id]
    }

    pub fn alive_nodes(&self) -> impl Iterator<Item = (NodeId, &TreeNode)> {
        self.nodes.iter().enumerate().filter(|(_, n)| n.alive)
    }

    pub fn trees(&self) -> Vec<SubassemblyTree> {
        let mut by_root: std::collections::BTreeMap<JointId, SubassemblyTree> = Default::default();
        for (_, n) in self.alive_nodes() {
            let t = by_root.entry(n.root).or_insert_with(|| SubassemblyTree {
                root: n.root,
                nodes: Vec::new(),
                reached_joints: BTreeSet::new(),
            });
            t.reached_joints.extend(n.joints.iter().copied());
            t.nodes.push(n.clone());
        }
        by_root.into_values().collect()
    }

    /// Adds a root node for every stable joint without one.
    pub fn seed_roots(&mut self, ctx: &Ctx<'_>, eval: &mut CostEvaluator<'_>) -> Result<()> {
        let roots: Vec<JointId> = ctx.view.stability.stable_joints().collect();
        for r in roots {
            if !self.by_key.contains_key(&(r, Vec::new())) {
                self.insert(ctx, eval, r, Vec::new(), None)?;
            }
        }
        Ok(())
    }

    /// Inserts a node (deduplicated by root and beams). Step costs are taken
    /// from `costs` when given, else computed. Pushes its expansions and
    /// records meetings.
    fn insert(
        &mut self,
        ctx: &Ctx<'_>,
        eval: &mut CostEvaluator<'_>,
        root: JointId,
        path: Vec<Step>,
        costs: Option<Vec<f64>>,
    ) -> Result<Option<NodeId>> {
        let key = (root, path.iter().map(|s| s.0).collect::<Vec<_>>());
        if let Some(&id) = self.by_key.get(&key) {
            if self.nodes[id].alive {
                return Ok(None);
            }
        }
        let mut joints = vec![root];
        for (b, d) in &path {
            joints.push(d.end(ctx.design.beam(*b)));
        }
        let step_costs = match costs {
            Some(c) => c,
            None => {
                let c = eval.root_compliance(ctx.view, root)?;
                path_costs(ctx.design, eval, &c, &path)?
            }
        };
        let cost = step_costs.iter().copied().fold(0.0, f64::max);
        let id = self.nodes.len();
        self.nodes.push(TreeNode { root, path, joints, step_costs, cost, alive: true, version: 0 });
        self.by_key.insert(key, id);
        self.index(id);
        self.push_expansions(ctx, eval, id)?;
        self.detect_meetings(ctx, id);
        self.release(ctx, eval, id)?;
        Ok(Some(id))
    }

    fn index(&mut self, id: NodeId) {
        let n = &self.nodes[id];
        if !n.is_root() {
            self.by_tip.entry(n.tip()).or_default().push(id);
        }
        let beams: Vec<BeamId> = n.path.iter().map(|s| s.0).collect();
        for b in beams {
            self.containing.entry(b).or_default().push(id);
        }
    }

    /// Re-queues parked expansions and pending candidates that were waiting
    /// for a beam the new node carries.
    fn release(&mut self, ctx: &Ctx<'_>, eval: &mut CostEvaluator<'_>, id: NodeId) -> Result<()> {
        let beams: Vec<BeamId> = self.nodes[id].path.iter().map(|s| s.0).collect();
        let root = self.nodes[id].root;
        for b in beams {
            if let Some(list) = self.parked.remove(&b) {
                let mut keep = Vec::new();
                for e in list {
                    if self.nodes[e.node].root == root {
                        keep.push(e);
                    } else {
                        self.requeue(ctx, eval, e)?;
                    }
                }
                if !keep.is_empty() {
                    self.parked.entry(b).or_default().extend(keep);
                }
            }
            if let Some(list) = self.pending.remove(&b) {
                for paths in list {
                    self.queue_candidate(ctx, paths);
                }
            }
        }
        Ok(())
    }

    /// Re-checks a parked expansion and queues it with its cost, or parks it
    /// on the next missing predecessor.
    fn requeue(&mut self, ctx: &Ctx<'_>, eval: &mut CostEvaluator<'_>, e: Expansion) -> Result<()> {
        let node = &self.nodes[e.node];
        if !node.alive || node.version != e.version {
            return Ok(());
        }
        match self.check(ctx, e.node, e.beam) {
            Check::Ok(dir) => {
                let c = eval.root_compliance(ctx.view, node.root)?;
                let mut chain = node.path.clone();
                chain.push((e.beam, dir));
                let step = chain_cost(ctx.design, eval.model(), &c, &chain)?;
                let key = step.max(node.cost);
                self.heap.push(Reverse(Expansion { key, step, beam: e.beam, dir, node: e.node, version: e.version }));
            }
            Check::Parked(m) => self.parked.entry(m).or_default().push(e),
            Check::Invalid => {}
        }
        Ok(())
    }

    fn check(&self, ctx: &Ctx<'_>, id: NodeId, beam: BeamId) -> Check {
        let node = &self.nodes[id];
        let design = ctx.design;
        if ctx.view.placed.contains(beam) || ctx.hanging.contains(beam) || node.has_beam(beam) {
            return Check::Invalid;
        }
        let b = design.beam(beam);
        let tip = node.tip();
        let Some(dir) = PrintDirection::starting_at(b, tip) else { return Check::Invalid };
        if !ctx.prec.is_allowed(beam, dir) {
            return Check::Invalid;
        }
        let end = dir.end(b);
        if node.joints.contains(&end) {
            return Check::Invalid;
        }
        if ctx.present(end) {
            // Only closing onto a stable joint; a bare root-to-root beam is
            // handled as a closing step outside the trees.
            if !ctx.view.is_stable(end) || node.is_root() || ctx.pivot[end.0] {
                return Check::Invalid;
            }
        }
        if node.is_root() && ctx.pivot[tip.0] {
            return Check::Invalid;
        }
        for p in ctx.prec.predecessors(beam) {
            if ctx.view.placed.contains(*p) || node.has_beam(*p) {
                continue;
            }
            let elsewhere = self
                .containing
                .get(p)
                .is_some_and(|ids| ids.iter().any(|&o| self.nodes[o].alive && self.nodes[o].root != node.root));
            if !elsewhere {
                return Check::Parked(*p);
            }
        }
        Check::Ok(dir)
    }

    fn push_expansions(&mut self, ctx: &Ctx<'_>, eval: &mut CostEvaluator<'_>, id: NodeId) -> Result<()> {
        let tip = self.nodes[id].tip();
        let mut ok = Vec::new();
        for &beam in ctx.design.incident(tip) {
            match self.check(ctx, id, beam) {
                Check::Ok(dir) => ok.push((beam, dir)),
                Check::Parked(missing) => {
                    let node = &self.nodes[id];
                    let e = Expansion {
                        key: f64::INFINITY,
                        step: f64::INFINITY,
                        beam,
                        dir: PrintDirection::Forward,
                        node: id,
                        version: node.version,
                    };
                    self.parked.entry(missing).or_default().push(e);
                }
                Check::Invalid => {}
            }
        }
        if ok.is_empty() {
            return Ok(());
        }
        let node = &self.nodes[id];
        let c = eval.root_compliance(ctx.view, node.root)?;
        let model = *eval.model();
        let design = ctx.design;
        let costs: Vec<Result<f64>> = ok
            .par_iter()
            .map(|(beam, dir)| {
                let mut chain = node.path.clone();
                chain.push((*beam, *dir));
                chain_cost(design, &model, &c, &chain)
            })
            .collect();
        for ((beam, dir), cost) in ok.into_iter().zip(costs) {
            let step = cost?;
            self.heap.push(Reverse(Expansion {
                key: step.max(node.cost),
                step,
                beam,
                dir,
                node: id,
                version: node.version,
            }));
        }
        Ok(())
    }

    fn detect_meetings(&mut self, ctx: &Ctx<'_>, id: NodeId) {
        let node = &self.nodes[id];
        if node.is_root() {
            return;
        }
        let tip = node.tip();
        if ctx.view.is_stable(tip) && tip != node.root {
            self.queue_candidate(ctx, vec![id]);
        }
        let others: Vec<NodeId> = self.by_tip.get(&tip).cloned().unwrap_or_default();
        for o in others {
            if o != id
                && self.nodes[o].alive
                && self.nodes[o].root != self.nodes[id].root
                && self.compatible(&[id], o, true)
            {
                self.queue_candidate(ctx, vec![id, o]);
            }
        }
    }

    /// Whether node `o` can join the paths `set` without sharing beams or
    /// joints, other than roots and (when `meet_at_tip`) the common tip.
    fn compatible(&self, set: &[NodeId], o: NodeId, meet_at_tip: bool) -> bool {
        let on = &self.nodes[o];
        for &s in set {
            let sn = &self.nodes[s];
            if on.path.iter().any(|(b, _)| sn.has_beam(*b)) {
                return false;
            }
        }
        let used: HashSet<JointId> = set.iter().flat_map(|&s| self.nodes[s].joints[1..].iter().copied()).collect();
        let roots: HashSet<JointId> = set.iter().map(|&s| self.nodes[s].root).collect();
        let last = on.joints.len() - 1;
        for (k, j) in on.joints.iter().enumerate().skip(1) {
            let shared = used.contains(j) || roots.contains(j);
            if shared && !(k == last && meet_at_tip) {
                return false;
            }
        }
        !used.contains(&on.root)
    }

    fn queue_candidate(&mut self, _ctx: &Ctx<'_>, mut paths: Vec<NodeId>) {
        paths.sort_unstable();
        if paths.iter().any(|&p| !self.nodes[p].alive) || !self.seen_meetings.insert(paths.clone()) {
            return;
        }
        let key = paths.iter().map(|&p| self.nodes[p].cost).fold(0.0, f64::max);
        self.candidates.push(Reverse(Candidate { key, paths, evaluated: None }));
    }

    /// Adds meeting paths until every collision predecessor of every beam is
    /// in the state or the set. Returns the missing beams on failure.
    fn close(&self, ctx: &Ctx<'_>, mut paths: Vec<NodeId>) -> std::result::Result<Vec<NodeId>, Vec<BeamId>> {
        loop {
            let mut in_set = BeamSet::new(ctx.design.beam_count());
            for &p in &paths {
                for (b, _) in &self.nodes[p].path {
                    in_set.insert(*b);
                }
            }
            let missing: BTreeSet<BeamId> = in_set
                .iter()
                .flat_map(|b| ctx.prec.predecessors(b).iter().copied())
                .filter(|p| !in_set.contains(*p) && !ctx.view.placed.contains(*p))
                .collect();
            let Some(&m) = missing.iter().next() else { return Ok(paths) };
            if paths.len() >= ctx.max_paths {
                return Err(missing.into_iter().collect());
            }
            let joints: HashSet<JointId> = paths.iter().flat_map(|&p| self.nodes[p].joints.iter().copied()).collect();
            let mut best: Option<(f64, Vec<NodeId>)> = None;
            let mut consider = |cost: f64, add: Vec<NodeId>| {
                if best.as_ref().is_none_or(|(c, a)| cost < *c || (cost == *c && add < *a)) {
                    best = Some((cost, add));
                }
            };
            for &n in self.containing.get(&m).map(Vec::as_slice).unwrap_or(&[]) {
                let node = &self.nodes[n];
                if !node.alive {
                    continue;
                }
                let tip = node.tip();
                let closes = joints.contains(&tip) || (ctx.view.is_stable(tip) && tip != node.root);
                if closes {
                    if self.compatible(&paths, n, true) {
                        consider(node.cost, vec![n]);
                    }
                    continue;
                }
                if !self.compatible(&paths, n, false) {
                    continue;
                }
                for &o in self.by_tip.get(&tip).map(Vec::as_slice).unwrap_or(&[]) {
                    let other = &self.nodes[o];
                    if o == n || !other.alive || other.root == node.root {
                        continue;
                    }
                    let mut with_n = paths.clone();
                    with_n.push(n);
                    if self.compatible(&with_n, o, true) {
                        consider(node.cost.max(other.cost), vec![n, o]);
                    }
                }
            }
            match best {
                Some((_, add)) => paths.extend(add),
                None => return Err(missing.into_iter().collect()),
            }
        }
    }

    /// Orders the paths into one feasible sequence (each path root-outward)
    /// and costs every step in that order.
    fn order(
        &self,
        ctx: &Ctx<'_>,
        eval: &mut CostEvaluator<'_>,
        paths: &[NodeId],
    ) -> Result<Option<(Vec<Step>, Vec<f64>)>> {
        let design = ctx.design;
        let mut state = AssemblyState { design, placed: ctx.view.placed.clone() };
        let mut next = vec![0usize; paths.len()];
        let total: usize = paths.iter().map(|&p| self.nodes[p].path.len()).sum();
        let mut seq = Vec::with_capacity(total);
        let mut costs = Vec::with_capacity(total);
        while seq.len() < total {
            let mut chosen = None;
            for (i, &p) in paths.iter().enumerate() {
                let path = &self.nodes[p].path;
                if next[i] < path.len() {
                    let (b, d) = path[next[i]];
                    if step_feasible(&state, ctx.prec, b, d) {
                        chosen = Some((i, b, d));
                        break;
                    }
                }
            }
            let Some((i, b, d)) = chosen else { return Ok(None) };
            let view = StateView::new(design, &state.placed);
            costs.push(eval.step_cost(&view, b, d)?);
            seq.push((b, d));
            state.placed.insert(b);
            next[i] += 1;
        }
        Ok(Some((seq, costs)))
    }

    /// Best-first search for the cheapest consistent subassembly whose cost
    /// does not exceed `bound`.
    pub fn find_consistent_subassembly(
        &mut self,
        ctx: &Ctx<'_>,
        eval: &mut CostEvaluator<'_>,
        bound: f64,
    ) -> Result<Option<ConsistentSubassembly>> {
        loop {
            let top = self.heap.peek().map_or(f64::INFINITY, |e| e.0.key);
            let cand = self.candidates.peek().map_or(f64::INFINITY, |c| c.0.key);
            if top.min(cand) > bound || (top == f64::INFINITY && cand == f64::INFINITY) {
                return Ok(None);
            }
            if cand <= top {
                let Reverse(c) = self.candidates.pop().expect("peeked");
                if c.paths.iter().any(|&p| !self.nodes[p].alive) {
                    continue;
                }
                match c.evaluated {
                    Some((sequence, step_costs)) => {
                        let paths = c.paths.iter().map(|&p| self.nodes[p].path.clone()).collect();
                        return Ok(Some(ConsistentSubassembly { paths, sequence, step_costs, cost: c.key }));
                    }
                    None => match self.close(ctx, c.paths.clone()) {
                        Ok(closed) => {
                            if let Some((seq, costs)) = self.order(ctx, eval, &closed)? {
                                let key = costs.iter().copied().fold(0.0, f64::max);
                                let mut closed = closed;
                                closed.sort_unstable();
                                self.candidates.push(Reverse(Candidate {
                                    key,
                                    paths: closed,
                                    evaluated: Some((seq, costs)),
                                }));
                            }
                        }
                        Err(missing) => {
                            for m in missing {
                                self.pending.entry(m).or_default().push(c.paths.clone());
                            }
                            // A later node carrying a missing beam re-queues it.
                            self.seen_meetings.remove(&c.paths);
                        }
                    },
                }
                continue;
            }
            let Reverse(e) = self.heap.pop().expect("peeked");
            let node = &self.nodes[e.node];
            if !node.alive || node.version != e.version {
                continue;
            }
            match self.check(ctx, e.node, e.beam) {
                Check::Ok(dir) if dir == e.dir => {
                    let mut path = node.path.clone();
                    path.push((e.beam, e.dir));
                    let mut costs = node.step_costs.clone();
                    costs.push(e.step);
                    let root = node.root;
                    self.insert(ctx, eval, root, path, Some(costs))?;
                }
                Check::Parked(m) => self.parked.entry(m).or_default().push(e),
                _ => {}
            }
        }
    }

    /// Updates the trees after `placed_now` joined the state: drops nodes
    /// made entirely of placed beams, re-roots the unplaced remainder of
    /// nodes at the last present joint when it is stable, and recomputes
    /// costs of nodes whose root component changed.
    pub fn rebase(
        &mut self,
        ctx: &Ctx<'_>,
        eval: &mut CostEvaluator<'_>,
        old_view: &StateView,
        placed_now: &[BeamId],
    ) -> Result<()> {
        let design = ctx.design;
        let view = ctx.view;
        let changed_root = |r: JointId| view.stable_component(r) != old_view.stable_component(r);
        let mut reroot: Vec<(JointId, Vec<Step>)> = Vec::new();
        let mut recompute: Vec<NodeId> = Vec::new();
        let touched: HashSet<JointId> =
            placed_now.iter().flat_map(|b| [design.beam(*b).p, design.beam(*b).q]).collect();
        for id in 0..self.nodes.len() {
            if !self.nodes[id].alive {
                continue;
            }
            let n = &self.nodes[id];
            let hits_placed = n.path.iter().any(|(b, _)| view.placed.contains(*b));
            let hits_joint = n.joints[1..].iter().any(|j| touched.contains(j));
            if !hits_placed && !hits_joint {
                if ctx.view.stability.is_stable(n.root) {
                    if eval.mode() == super::CostMode::Exact && changed_root(n.root) {
                        recompute.push(id);
                    }
                    continue;
                }
                self.kill(id);
                continue;
            }
            // Last joint on the path that is now part of the structure.
            let k = (0..n.joints.len()).rev().find(|&k| ctx.present(n.joints[k])).unwrap_or(0);
            let rest: Vec<Step> = n.path[k..].to_vec();
            let p = n.joints[k];
            let keep = !rest.is_empty() && view.is_stable(p) && rest.iter().all(|(b, _)| !view.placed.contains(*b));
            if keep {
                reroot.push((p, rest));
            }
            self.kill(id);
        }

        // Fresh costs for surviving nodes of changed components.
        let mut roots: Vec<JointId> = recompute.iter().map(|&id| self.nodes[id].root).collect();
        roots.sort();
        roots.dedup();
        let mut comp = HashMap::new();
        for r in roots {
            comp.insert(r, eval.root_compliance(view, r)?);
        }
        let model = *eval.model();
        let fresh: Vec<Result<Vec<f64>>> = recompute
            .par_iter()
            .map(|&id| {
                let n = &self.nodes[id];
                chain_prefix_costs(design, &model, &comp[&n.root], &n.path)
            })
            .collect();
        for (&id, costs) in recompute.iter().zip(fresh) {
            let costs = costs?;
            let n = &mut self.nodes[id];
            n.cost = costs.iter().copied().fold(0.0, f64::max);
            n.step_costs = costs;
            n.version += 1;
        }
        for &id in &recompute {
            self.push_expansions(ctx, eval, id)?;
        }

        self.seed_roots(ctx, eval)?;
        reroot.sort_by(|a, b| {
            (a.0, a.1.iter().map(|s| s.0).collect::<Vec<_>>()).cmp(&(b.0, b.1.iter().map(|s| s.0).collect()))
        });
        for (p, rest) in reroot {
            for len in 1..=rest.len() {
                self.insert(ctx, eval, p, rest[..len].to_vec(), None)?;
            }
        }

        // Expansions that may have become valid: toward newly stable
        // joints, from roots whose pivot state changed, and those parked on
        // beams that are now placed.
        let newly_stable: Vec<JointId> = view.stability.stable_joints().filter(|j| !old_view.is_stable(*j)).collect();
        let mut repush: BTreeSet<NodeId> = BTreeSet::new();
        for j in newly_stable.iter().chain(touched.iter()) {
            for &b in design.incident(*j) {
                if view.placed.contains(b) {
                    continue;
                }
                let t = design.beam(b).other_end(*j);
                for &o in self.by_tip.get(&t).map(Vec::as_slice).unwrap_or(&[]) {
                    if self.nodes[o].alive {
                        repush.insert(o);
                    }
                }
            }
            if let Some(&r) = self.by_key.get(&(*j, Vec::new())) {
                if self.nodes[r].alive {
                    repush.insert(r);
                }
            }
        }
        for b in placed_now {
            if let Some(list) = self.parked.remove(b) {
                for e in list {
                    self.requeue(ctx, eval, e)?;
                }
            }
        }
        for id in repush {
            if !recompute.contains(&id) {
                self.push_expansions(ctx, eval, id)?;
            }
        }

        // Meetings are rediscovered against the new state.
        self.candidates.clear();
        self.seen_meetings.clear();
        self.pending.clear();
        let alive: Vec<NodeId> = self.alive_nodes().map(|(i, _)| i).collect();
        for id in alive {
            self.detect_meetings(ctx, id);
        }
        self.compact_indexes();
        Ok(())
    }

    fn kill(&mut self, id: NodeId) {
        self.nodes[id].alive = false;
        let key = self.nodes[id].key();
        if self.by_key.get(&key) == Some(&id) {
            self.by_key.remove(&key);
        }
    }

    fn compact_indexes(&mut self) {
        let nodes = &self.nodes;
        self.by_tip.retain(|_, v| {
            v.retain(|&i| nodes[i].alive);
            !v.is_empty()
        });
        self.containing.retain(|_, v| {
            v.retain(|&i| nodes[i].alive);
            !v.is_empty()
        });
        self.heap.retain(|e| nodes[e.0.node].alive && nodes[e.0.node].version == e.0.version);
    }

    /// Short description of the search frontier for diagnostics.
    pub fn describe(&self, design: &FrameDesign) -> String {
        let mut parked: Vec<String> =
            self.parked.iter().map(|(b, list)| format!("{} waiting on {}", list.len(), design.beam(*b).name)).collect();
        parked.sort();
        parked.truncate(6);
        format!(
            "{} tree nodes alive, {} queued expansions, {} pending meetings; parked: [{}]",
            self.alive_count(),
            self.heap.len(),
            self.pending.values().map(Vec::len).sum::<usize>(),
            parked.join(", ")
        )
    }
}

fn path_costs(
    design: &FrameDesign,
    eval: &CostEvaluator<'_>,
    c: &nalgebra::Matrix6<f64>,
    path: &[Step],
) -> Result<Vec<f64>> {
    chain_prefix_costs(design, eval.model(), c, path)
}

/// Cost of each step of `path` printed in order from its root.
fn chain_prefix_costs(
    design: &FrameDesign,
    model: &crate::stiffness::StiffnessModel,
    c: &nalgebra::Matrix6<f64>,
    path: &[Step],
) -> Result<Vec<f64>> {
    (1..=path.len()).map(|k| chain_cost(design, model, c, &path[..k])).collect()
}
