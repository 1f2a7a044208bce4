//! Wireframe designs, assembly states and the stability predicates every other
//! module relies on.
//!
//! Stability is measured against a virtual ground vertex adjacent to every
//! grounded joint. A joint is stable when it is grounded or when it has two
//! paths to the virtual ground that share no vertex besides their endpoints,
//! i.e. it sits in a biconnected block that contains the ground vertex.

use std::collections::VecDeque;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::bitset::BeamSet;
use crate::error::{Error, Result};
use crate::geometry::{Vec3, COINCIDENT_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct JointId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BeamId(pub usize);

impl fmt::Display for JointId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "j{}", self.0)
    }
}

impl fmt::Display for BeamId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "b{}", self.0)
    }
}

pub const DEFAULT_MIN_SEGMENT_LENGTH: f64 = 0.05;

#[derive(Debug, Clone, PartialEq)]
pub struct Joint {
    pub name: String,
    pub position: Vec3,
    pub grounded: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Beam {
    pub name: String,
    pub p: JointId,
    pub q: JointId,
    /// Polyline from `p` to `q`.
    pub path: Vec<Vec3>,
    pub diameter: f64,
}

impl Beam {
    pub fn other_end(&self, j: JointId) -> JointId {
        if j == self.p {
            self.q
        } else {
            self.p
        }
    }

    pub fn has_endpoint(&self, j: JointId) -> bool {
        self.p == j || self.q == j
    }

    pub fn length(&self) -> f64 {
        crate::geometry::polyline_length(&self.path)
    }
}

/// Problems found by [`validate_design`]. Defects are values, not failures.
#[derive(Debug, Clone, PartialEq)]
pub enum DesignDefect {
    NonFinitePosition { joint: JointId },
    GroundedOffSubstrate { joint: JointId, offset: f64 },
    UnknownJoint { beam: BeamId, joint: JointId },
    SameEndpoints { beam: BeamId },
    PathTooShort { beam: BeamId },
    EndpointMismatch { beam: BeamId, joint: JointId, distance: f64 },
    ShortSegment { beam: BeamId, segment: usize, length: f64 },
    NonPositiveDiameter { beam: BeamId },
    DuplicateBeam { beam: BeamId, duplicate_of: BeamId },
    NoGroundedJoint,
}

impl fmt::Display for DesignDefect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use DesignDefect::*;
        match self {
            NonFinitePosition { joint } => write!(f, "joint {joint}: non-finite position"),
            GroundedOffSubstrate { joint, offset } => {
                write!(f, "joint {joint}: grounded but {offset:.3e} mm off the substrate")
            }
            UnknownJoint { beam, joint } => write!(f, "beam {beam}: references missing joint {joint}"),
            SameEndpoints { beam } => write!(f, "beam {beam}: both ends on the same joint"),
            PathTooShort { beam } => write!(f, "beam {beam}: path needs at least 2 points"),
            EndpointMismatch { beam, joint, distance } => {
                write!(f, "beam {beam}: path endpoint is {distance:.3e} mm from joint {joint}")
            }
            ShortSegment { beam, segment, length } => {
                write!(f, "beam {beam}: segment {segment} is only {length:.3e} mm long")
            }
            NonPositiveDiameter { beam } => write!(f, "beam {beam}: diameter must be positive"),
            DuplicateBeam { beam, duplicate_of } => write!(f, "beam {beam}: duplicates beam {duplicate_of}"),
            NoGroundedJoint => write!(f, "design has no grounded joint"),
        }
    }
}

/// Immutable wireframe graph.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameDesign {
    pub substrate_z: f64,
    joints: Vec<Joint>,
    beams: Vec<Beam>,
    incident: Vec<Vec<BeamId>>,
}

impl FrameDesign {
    /// Builds the graph without validating it. Beams referencing missing
    /// joints are kept so [`validate_design`] can report them, but they are
    /// left out of the incidence lists.
    pub fn new(substrate_z: f64, joints: Vec<Joint>, beams: Vec<Beam>) -> Self {
        let mut incident = vec![Vec::new(); joints.len()];
        for (i, b) in beams.iter().enumerate() {
            if b.p.0 < joints.len() && b.q.0 < joints.len() && b.p != b.q {
                incident[b.p.0].push(BeamId(i));
                incident[b.q.0].push(BeamId(i));
            }
        }
        FrameDesign { substrate_z, joints, beams, incident }
    }

    /// Builds and validates with the default minimum segment length.
    pub fn validated(substrate_z: f64, joints: Vec<Joint>, beams: Vec<Beam>) -> Result<Self> {
        let d = Self::new(substrate_z, joints, beams);
        let defects = validate_design(&d);
        if defects.is_empty() {
            Ok(d)
        } else {
            Err(Error::InvalidDesign(defects))
        }
    }

    pub fn joints(&self) -> &[Joint] {
        &self.joints
    }

    pub fn beams(&self) -> &[Beam] {
        &self.beams
    }

    pub fn joint(&self, j: JointId) -> &Joint {
        &self.joints[j.0]
    }

    pub fn beam(&self, b: BeamId) -> &Beam {
        &self.beams[b.0]
    }

    pub fn try_joint(&self, j: JointId) -> Result<&Joint> {
        self.joints.get(j.0).ok_or(Error::UnknownJoint(j))
    }

    pub fn try_beam(&self, b: BeamId) -> Result<&Beam> {
        self.beams.get(b.0).ok_or(Error::UnknownBeam(b))
    }

    pub fn joint_count(&self) -> usize {
        self.joints.len()
    }

    pub fn beam_count(&self) -> usize {
        self.beams.len()
    }

    pub fn beam_ids(&self) -> impl Iterator<Item = BeamId> + '_ {
        (0..self.beams.len()).map(BeamId)
    }

    pub fn joint_ids(&self) -> impl Iterator<Item = JointId> + '_ {
        (0..self.joints.len()).map(JointId)
    }

    pub fn incident(&self, j: JointId) -> &[BeamId] {
        &self.incident[j.0]
    }

    pub fn beam_by_name(&self, name: &str) -> Option<BeamId> {
        self.beams.iter().position(|b| b.name == name).map(BeamId)
    }

    pub fn joint_by_name(&self, name: &str) -> Option<JointId> {
        self.joints.iter().position(|j| j.name == name).map(JointId)
    }

    pub fn max_z(&self) -> f64 {
        self.beams.iter().flat_map(|b| b.path.iter()).map(|p| p.z).fold(self.substrate_z, f64::max)
    }

    /// A design containing only the listed beams (joints are kept).
    pub fn subdesign(&self, keep: &BeamSet) -> FrameDesign {
        let beams = self.beam_ids().filter(|b| keep.contains(*b)).map(|b| self.beam(b).clone()).collect();
        FrameDesign::new(self.substrate_z, self.joints.clone(), beams)
    }
}

/// Incremental construction of designs with straight or polyline beams.
#[derive(Debug, Default)]
pub struct DesignBuilder {
    substrate_z: f64,
    joints: Vec<Joint>,
    beams: Vec<Beam>,
    diameter: f64,
}

impl DesignBuilder {
    pub fn new(diameter: f64) -> Self {
        DesignBuilder { substrate_z: 0.0, joints: Vec::new(), beams: Vec::new(), diameter }
    }

    pub fn joint(&mut self, name: &str, position: Vec3) -> JointId {
        self.joints.push(Joint { name: name.to_string(), position, grounded: false });
        JointId(self.joints.len() - 1)
    }

    pub fn ground(&mut self, name: &str, x: f64, y: f64) -> JointId {
        self.joints.push(Joint { name: name.to_string(), position: Vec3::new(x, y, self.substrate_z), grounded: true });
        JointId(self.joints.len() - 1)
    }

    pub fn beam(&mut self, name: &str, p: JointId, q: JointId) -> BeamId {
        let path = vec![self.joints[p.0].position, self.joints[q.0].position];
        self.beam_path(name, p, q, path)
    }

    /// `via` holds interior polyline points only.
    pub fn beam_via(&mut self, name: &str, p: JointId, q: JointId, via: &[Vec3]) -> BeamId {
        let mut path = vec![self.joints[p.0].position];
        path.extend_from_slice(via);
        path.push(self.joints[q.0].position);
        self.beam_path(name, p, q, path)
    }

    pub fn beam_path(&mut self, name: &str, p: JointId, q: JointId, path: Vec<Vec3>) -> BeamId {
        self.beams.push(Beam { name: name.to_string(), p, q, path, diameter: self.diameter });
        BeamId(self.beams.len() - 1)
    }

    pub fn position(&self, j: JointId) -> Vec3 {
        self.joints[j.0].position
    }

    pub fn build_unchecked(self) -> FrameDesign {
        FrameDesign::new(self.substrate_z, self.joints, self.beams)
    }

    pub fn build(self) -> Result<FrameDesign> {
        FrameDesign::validated(self.substrate_z, self.joints, self.beams)
    }
}

pub fn validate_design(design: &FrameDesign) -> Vec<DesignDefect> {
    validate_design_with(design, DEFAULT_MIN_SEGMENT_LENGTH)
}

pub fn validate_design_with(design: &FrameDesign, min_segment_length: f64) -> Vec<DesignDefect> {
    let mut defects = Vec::new();
    for (i, j) in design.joints.iter().enumerate() {
        let id = JointId(i);
        if !(j.position.x.is_finite() && j.position.y.is_finite() && j.position.z.is_finite()) {
            defects.push(DesignDefect::NonFinitePosition { joint: id });
            continue;
        }
        let offset = (j.position.z - design.substrate_z).abs();
        if j.grounded && offset > COINCIDENT_TOL {
            defects.push(DesignDefect::GroundedOffSubstrate { joint: id, offset });
        }
    }
    if !design.joints.iter().any(|j| j.grounded) {
        defects.push(DesignDefect::NoGroundedJoint);
    }
    for (i, b) in design.beams.iter().enumerate() {
        let id = BeamId(i);
        let mut refs_ok = true;
        for j in [b.p, b.q] {
            if j.0 >= design.joints.len() {
                defects.push(DesignDefect::UnknownJoint { beam: id, joint: j });
                refs_ok = false;
            }
        }
        if b.p == b.q {
            defects.push(DesignDefect::SameEndpoints { beam: id });
        }
        if !(b.diameter > 0.0) {
            defects.push(DesignDefect::NonPositiveDiameter { beam: id });
        }
        if b.path.len() < 2 {
            defects.push(DesignDefect::PathTooShort { beam: id });
            continue;
        }
        if refs_ok {
            for (j, end) in [(b.p, b.path[0]), (b.q, *b.path.last().unwrap())] {
                let distance = (design.joints[j.0].position - end).norm();
                if !(distance <= COINCIDENT_TOL) {
                    defects.push(DesignDefect::EndpointMismatch { beam: id, joint: j, distance });
                }
            }
        }
        for (s, w) in b.path.windows(2).enumerate() {
            let length = (w[1] - w[0]).norm();
            if !(length >= min_segment_length) {
                defects.push(DesignDefect::ShortSegment { beam: id, segment: s, length });
            }
        }
    }
    // Duplicates: same unordered joint pair and the same geometry (either orientation).
    for i in 0..design.beams.len() {
        for k in 0..i {
            let (a, b) = (&design.beams[i], &design.beams[k]);
            let same_pair = (a.p == b.p && a.q == b.q) || (a.p == b.q && a.q == b.p);
            if !same_pair || a.path.len() != b.path.len() {
                continue;
            }
            let close = |x: &Vec3, y: &Vec3| (x - y).norm() <= COINCIDENT_TOL;
            let forward = a.path.iter().zip(&b.path).all(|(x, y)| close(x, y));
            let backward = a.path.iter().zip(b.path.iter().rev()).all(|(x, y)| close(x, y));
            if forward || backward {
                defects.push(DesignDefect::DuplicateBeam { beam: BeamId(i), duplicate_of: BeamId(k) });
            }
        }
    }
    defects
}

/// A subset of placed beams over a design.
#[derive(Debug, Clone)]
pub struct AssemblyState<'a> {
    pub design: &'a FrameDesign,
    pub placed: BeamSet,
}

impl PartialEq for AssemblyState<'_> {
    fn eq(&self, other: &Self) -> bool {
        std::ptr::eq(self.design, other.design) && self.placed == other.placed
    }
}

impl Eq for AssemblyState<'_> {}

impl<'a> AssemblyState<'a> {
    pub fn empty(design: &'a FrameDesign) -> Self {
        AssemblyState { design, placed: BeamSet::new(design.beam_count()) }
    }

    pub fn full(design: &'a FrameDesign) -> Self {
        AssemblyState { design, placed: BeamSet::full(design.beam_count()) }
    }

    pub fn from_beams(design: &'a FrameDesign, beams: impl IntoIterator<Item = BeamId>) -> Self {
        let mut s = Self::empty(design);
        for b in beams {
            s.placed.insert(b);
        }
        s
    }

    pub fn is_placed(&self, b: BeamId) -> bool {
        self.placed.contains(b)
    }

    pub fn with(&self, b: BeamId) -> Self {
        AssemblyState { design: self.design, placed: self.placed.with(b) }
    }

    /// True if the joint is grounded or touched by a placed beam.
    pub fn joint_present(&self, j: JointId) -> bool {
        self.design.joint(j).grounded || self.design.incident(j).iter().any(|b| self.placed.contains(*b))
    }

    pub fn placed_incident(&self, j: JointId) -> impl Iterator<Item = BeamId> + '_ {
        self.design.incident(j).iter().copied().filter(|b| self.placed.contains(*b))
    }

    pub fn is_complete(&self) -> bool {
        self.placed.len() == self.design.beam_count()
    }
}

/// Stability of every joint for one state, computed in one pass.
#[derive(Debug, Clone)]
pub struct Stability {
    stable: Vec<bool>,
}

impl Stability {
    pub fn of(state: &AssemblyState<'_>) -> Self {
        Stability { stable: stable_joints(state.design, &state.placed) }
    }

    pub fn is_stable(&self, j: JointId) -> bool {
        self.stable[j.0]
    }

    pub fn stable_joints(&self) -> impl Iterator<Item = JointId> + '_ {
        self.stable.iter().enumerate().filter(|(_, s)| **s).map(|(i, _)| JointId(i))
    }
}

/// Marks joints that are grounded or share a biconnected block with the
/// virtual ground vertex. Iterative Tarjan rooted at the ground vertex.
fn stable_joints(design: &FrameDesign, placed: &BeamSet) -> Vec<bool> {
    let n = design.joint_count();
    let g = n;
    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n + 1];
    let mut edge = 0usize;
    for b in placed.iter() {
        let beam = design.beam(b);
        adj[beam.p.0].push((beam.q.0, edge));
        adj[beam.q.0].push((beam.p.0, edge));
        edge += 1;
    }
    let mut stable = vec![false; n];
    for (i, j) in design.joints.iter().enumerate() {
        if j.grounded {
            adj[i].push((g, edge));
            adj[g].push((i, edge));
            edge += 1;
            stable[i] = true;
        }
    }

    const UNSEEN: usize = usize::MAX;
    let mut disc = vec![UNSEEN; n + 1];
    let mut low = vec![0usize; n + 1];
    let mut timer = 0usize;
    // (vertex, edge used to enter it, next adjacency index)
    let mut stack: Vec<(usize, usize, usize)> = vec![(g, UNSEEN, 0)];
    let mut edges: Vec<(usize, usize)> = Vec::new();
    disc[g] = timer;
    low[g] = timer;
    timer += 1;
    while let Some(top) = stack.len().checked_sub(1) {
        let (v, parent_edge, next) = stack[top];
        if next < adj[v].len() {
            stack[top].2 += 1;
            let (w, e) = adj[v][next];
            if e == parent_edge {
                continue;
            }
            if disc[w] == UNSEEN {
                edges.push((v, w));
                disc[w] = timer;
                low[w] = timer;
                timer += 1;
                stack.push((w, e, 0));
            } else if disc[w] < disc[v] {
                edges.push((v, w));
                low[v] = low[v].min(disc[w]);
            }
        } else {
            stack.pop();
            if let Some(&(u, _, _)) = stack.last() {
                low[u] = low[u].min(low[v]);
                if low[v] >= disc[u] {
                    // Block closed at articulation (or root) u.
                    while let Some((a, b)) = edges.pop() {
                        if u == g {
                            for x in [a, b] {
                                if x != g {
                                    stable[x] = true;
                                }
                            }
                        }
                        if (a, b) == (u, v) {
                            break;
                        }
                    }
                }
            }
        }
    }
    stable
}

pub fn is_stable_joint(state: &AssemblyState<'_>, joint: JointId) -> Result<bool> {
    let j = state.design.try_joint(joint)?;
    if j.grounded {
        return Ok(true);
    }
    Ok(Stability::of(state).is_stable(joint))
}

/// Joints reachable from the virtual ground through placed beams, never
/// entering `removed`.
fn ground_reach(design: &FrameDesign, placed: &BeamSet, removed: Option<JointId>) -> Vec<bool> {
    let n = design.joint_count();
    let mut seen = vec![false; n];
    let mut queue = VecDeque::new();
    for (i, j) in design.joints.iter().enumerate() {
        if j.grounded && Some(JointId(i)) != removed {
            seen[i] = true;
            queue.push_back(JointId(i));
        }
    }
    while let Some(j) = queue.pop_front() {
        for &b in design.incident(j) {
            if !placed.contains(b) {
                continue;
            }
            let k = design.beam(b).other_end(j);
            if Some(k) != removed && !seen[k.0] {
                seen[k.0] = true;
                queue.push_back(k);
            }
        }
    }
    seen
}

/// Whether `beam` hangs from `joint`: melting the joint would cut the beam's
/// other endpoint off from the ground.
pub fn pivots_about(state: &AssemblyState<'_>, beam: BeamId, joint: JointId) -> Result<bool> {
    let b = state.design.try_beam(beam)?;
    if !state.is_placed(beam) {
        return Err(Error::BeamNotPlaced(beam));
    }
    if !b.has_endpoint(joint) {
        return Err(Error::NotAnEndpoint { beam, joint });
    }
    let reach = ground_reach(state.design, &state.placed, Some(joint));
    Ok(!reach[b.other_end(joint).0])
}

/// Whether any placed beam incident to `joint` pivots about it. One graph
/// search answers the question for all incident beams.
pub fn joint_supports_pivot(design: &FrameDesign, placed: &BeamSet, joint: JointId) -> bool {
    let mut incident = design.incident(joint).iter().filter(|b| placed.contains(**b)).peekable();
    if incident.peek().is_none() {
        return false;
    }
    let reach = ground_reach(design, placed, Some(joint));
    design.incident(joint).iter().filter(|b| placed.contains(**b)).any(|b| !reach[design.beam(*b).other_end(joint).0])
}

/// A placed beam is cantilevered unless both of its endpoints are stable.
pub fn is_cantilevered_beam(state: &AssemblyState<'_>, beam: BeamId) -> Result<bool> {
    let b = state.design.try_beam(beam)?;
    if !state.is_placed(beam) {
        return Err(Error::BeamNotPlaced(beam));
    }
    let st = Stability::of(state);
    Ok(!(st.is_stable(b.p) && st.is_stable(b.q)))
}

/// Placed beams cantilevered in this state.
pub fn cantilevered_beams(state: &AssemblyState<'_>) -> BeamSet {
    let st = Stability::of(state);
    state
        .placed
        .iter()
        .filter(|b| {
            let beam = state.design.beam(*b);
            !(st.is_stable(beam.p) && st.is_stable(beam.q))
        })
        .collect()
}

/// Union-find over joints.
#[derive(Debug, Clone)]
pub struct JointUnion {
    parent: Vec<usize>,
}

impl JointUnion {
    pub fn new(n: usize) -> Self {
        JointUnion { parent: (0..n).collect() }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Partition of the placed beams into joint-connected classes, each sorted,
/// ordered by smallest member.
pub fn connected_components(state: &AssemblyState<'_>) -> Vec<Vec<BeamId>> {
    let design = state.design;
    let mut uf = JointUnion::new(design.joint_count());
    for b in state.placed.iter() {
        let beam = design.beam(b);
        uf.union(beam.p.0, beam.q.0);
    }
    let mut classes: Vec<(usize, Vec<BeamId>)> = Vec::new();
    for b in state.placed.iter() {
        let root = uf.find(design.beam(b).p.0);
        match classes.iter_mut().find(|(r, _)| *r == root) {
            Some((_, v)) => v.push(b),
            None => classes.push((root, vec![b])),
        }
    }
    classes.into_iter().map(|(_, v)| v).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn tripod_is_valid() {
        assert_eq!(validate_design(&fixtures::tripod()), vec![]);
    }

    #[test]
    fn endpoint_mismatch_is_reported() {
        let d = fixtures::tripod();
        let mut beams = d.beams().to_vec();
        beams[0].path[0].x += 0.01;
        let bad = FrameDesign::new(d.substrate_z, d.joints().to_vec(), beams);
        let defects = validate_design(&bad);
        assert_eq!(defects.len(), 1);
        assert!(matches!(defects[0], DesignDefect::EndpointMismatch { beam: BeamId(0), .. }));
    }

    #[test]
    fn missing_ground_is_reported() {
        let d = fixtures::tripod();
        let mut joints = d.joints().to_vec();
        for j in &mut joints {
            j.grounded = false;
        }
        let bad = FrameDesign::new(d.substrate_z, joints, d.beams().to_vec());
        assert_eq!(validate_design(&bad), vec![DesignDefect::NoGroundedJoint]);
    }

    #[test]
    fn duplicate_and_short_segments() {
        let mut b = DesignBuilder::new(0.2);
        let g = b.ground("g", 0.0, 0.0);
        let a = b.joint("a", Vec3::new(0.0, 0.0, 5.0));
        b.beam("x", g, a);
        b.beam("y", a, g);
        b.beam_via("z", g, a, &[Vec3::new(0.0, 0.0, 0.01)]);
        let defects = validate_design(&b.build_unchecked());
        assert!(defects.contains(&DesignDefect::DuplicateBeam { beam: BeamId(1), duplicate_of: BeamId(0) }));
        assert!(defects.iter().any(|d| matches!(d, DesignDefect::ShortSegment { beam: BeamId(2), segment: 0, .. })));
    }

    #[test]
    fn chain_tip_is_unstable() {
        let d = fixtures::chain3();
        let s = AssemblyState::full(&d);
        let tip = d.joint_by_name("c3").unwrap();
        assert!(!is_stable_joint(&s, tip).unwrap());
        let base = d.joint_by_name("g").unwrap();
        assert!(is_stable_joint(&AssemblyState::empty(&d), base).unwrap());
        assert!(is_stable_joint(&s, JointId(99)).is_err());
    }

    #[test]
    fn loop_apex_is_stable() {
        let d = fixtures::loop_arch();
        let s = AssemblyState::full(&d);
        assert!(is_stable_joint(&s, d.joint_by_name("apex").unwrap()).unwrap());
    }

    #[test]
    fn chain_pivots() {
        let d = fixtures::chain3();
        let s = AssemblyState::full(&d);
        let first = d.beam_by_name("c1").unwrap();
        let g = d.joint_by_name("g").unwrap();
        let c1 = d.joint_by_name("c1").unwrap();
        assert!(pivots_about(&s, first, g).unwrap());
        assert!(!pivots_about(&s, first, c1).unwrap());
        for b in d.beam_ids() {
            assert!(is_cantilevered_beam(&s, b).unwrap());
        }
        let tip = d.joint_by_name("c3").unwrap();
        assert!(matches!(pivots_about(&s, first, tip), Err(Error::NotAnEndpoint { .. })));
        let partial = AssemblyState::from_beams(&d, [first]);
        assert!(matches!(pivots_about(&partial, BeamId(2), c1), Err(Error::BeamNotPlaced(_))));
    }

    #[test]
    fn loop_does_not_pivot() {
        let d = fixtures::loop_arch();
        let s = AssemblyState::full(&d);
        let apex = d.joint_by_name("apex").unwrap();
        for b in d.beam_ids() {
            assert!(!pivots_about(&s, b, apex).unwrap());
            assert!(!is_cantilevered_beam(&s, b).unwrap());
        }
    }

    #[test]
    fn grounded_span_is_not_cantilevered() {
        let mut b = DesignBuilder::new(0.2);
        let g1 = b.ground("g1", 0.0, 0.0);
        let g2 = b.ground("g2", 5.0, 0.0);
        let beam = b.beam("span", g1, g2);
        let d = b.build().unwrap();
        assert!(!is_cantilevered_beam(&AssemblyState::full(&d), beam).unwrap());
    }

    #[test]
    fn parallel_beams_do_not_make_two_disjoint_paths() {
        let mut b = DesignBuilder::new(0.2);
        let g = b.ground("g", 0.0, 0.0);
        let a = b.joint("a", Vec3::new(3.0, 0.0, 3.0));
        b.beam("straight", g, a);
        b.beam_via("bent", g, a, &[Vec3::new(0.0, 0.0, 3.0)]);
        let d = b.build().unwrap();
        assert!(!is_stable_joint(&AssemblyState::full(&d), a).unwrap());
    }

    #[test]
    fn components() {
        let d = fixtures::tripod();
        assert!(connected_components(&AssemblyState::empty(&d)).is_empty());
        let full = connected_components(&AssemblyState::full(&d));
        assert_eq!(full.len(), 1);
        assert_eq!(full[0].len(), 3);
        let two = fixtures::two_chains();
        assert_eq!(connected_components(&AssemblyState::full(&two)).len(), 2);
    }
}
