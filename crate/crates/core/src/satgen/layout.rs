//! Gadget placement and wire routing for circuit compilation.
//!
//! Gadgets sit in one row along x, in a topological column order. A wire is a
//! single beam on one of two sides of the row:
//!
//! - north: its own track above the row, crossing nothing but the gadgets
//!   it connects;
//! - south: a corridor between the row and the output beam, passing above
//!   the magenta stub of every gadget it spans. Those magentas then precede
//!   the wire. Wires on one side never interleave, so a wire only ever waits
//!   on gadgets whose own south wires are strictly shorter, and the waits
//!   cannot form a cycle.
//!
//! Sides come from 2-colouring the interleaving graph. The circuit output
//! counts as a south wire to a column past the right end.
//!
//! Per gadget (local origin at the column x, heights in mm):
//!
//! ```text
//!               G (grounded, y=12)
//!        B1   /   \   R1          wires cross B1 above (NOR inputs)
//!     bm ----       ---- rm       or R1 above and R2 below (R-side legs)
//!        B2   \   /   R2
//!               T (y=0)
//!   ============|============ south corridor tracks, above the magenta
//!               |  magenta
//!   ------------|------------ output beam, above the magenta
//!               M, spine climbs over the output beam to ground
//! ```

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::circuit::{Circuit, Driver, GateKind};
use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::model::{BeamId, DesignBuilder, FrameDesign, JointId};

/// A placed column: a primary input stub or a gadget.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Node {
    Input(usize),
    Gate(usize),
}

/// Which side of the gadget row a wire runs on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    North,
    South,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Placement {
    pub node: Node,
    pub column: usize,
    pub x: f64,
}

/// Where everything went: column positions and every wire's route.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GadgetLayout {
    pub columns: Vec<Placement>,
    pub sides: BTreeMap<String, Side>,
    pub routes: BTreeMap<String, Vec<Vec3>>,
    pub output_route: Vec<Vec3>,
}

/// Beams of one gadget.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GadgetBeams {
    pub gate: usize,
    pub kind: GateKind,
    /// Red half-loop, from the grounded joint to the top joint.
    pub red: Vec<BeamId>,
    /// Blue half-loop, same orientation.
    pub blue: Vec<BeamId>,
    pub magenta: BeamId,
    pub spine: BeamId,
    /// NOR only: the beam leaving the input junction and its support.
    pub junction: Vec<BeamId>,
}

#[derive(Debug, Clone)]
pub struct CompiledCircuit {
    pub design: FrameDesign,
    pub circuit: Circuit,
    pub gadgets: Vec<GadgetBeams>,
    /// One beam per wire.
    pub wires: BTreeMap<String, BeamId>,
    pub output_beam: BeamId,
    /// Precedence pairs the geometry is built to produce.
    pub intended_order: Vec<(BeamId, BeamId)>,
    pub layout: GadgetLayout,
}

// Gadget geometry, relative to the column x.
const G_Y: f64 = 12.0;
const HALF_W: f64 = 8.0;
const MID_Y: f64 = 6.0;
const LOOP_Z: f64 = 3.0;
const OVER_Z: f64 = 4.5;
const UNDER_Z: f64 = 1.5;
/// NOR input legs; the second is also where a south input arrives when
/// the other input is north.
const NOR_IN_LEGS: [f64; 2] = [-2.5, -5.5];
const OUT_LEG: f64 = 2.5;
const SPLIT_OUT_LEGS: [f64; 2] = [4.5, 6.5];
/// South inputs come round the west side of the gadget: (port x, row y)
/// for each NOR leg, then for the splitter input.
const NOR_DETOURS: [(f64, f64); 2] = [(-15.5, 11.0), (-14.0, 9.5)];
const SPLIT_DETOUR: (f64, f64) = (-11.5, 14.5);
const TRACK_Y0: f64 = 18.0;
const TRACK_PITCH: f64 = 4.0;
const SOUTH_Y0: f64 = -3.5;
const SOUTH_PITCH: f64 = 2.5;
const COLUMN_GAP: f64 = 4.0;
/// Cap on search steps when looking for a crossing-free column order.
const ORDER_BUDGET: usize = 200_000;

fn extent(c: &Circuit, node: Node) -> (f64, f64) {
    match node {
        Node::Input(_) => (2.0, 2.0),
        Node::Gate(g) => match c.gates[g].kind {
            GateKind::Nor => (17.0, 9.0),
            GateKind::Split => (13.0, 9.0),
        },
    }
}

/// y of R1 (or B1, mirrored) above the leg at offset `dx`.
fn upper_y(dx: f64) -> f64 {
    G_Y - (G_Y - MID_Y) * dx.abs() / HALF_W
}

/// y of R2 (or B2, mirrored) at offset `dx`.
fn lower_y(dx: f64) -> f64 {
    MID_Y * dx.abs() / HALF_W
}

/// A wire between two columns. `dst` is `usize::MAX` for the circuit output.
#[derive(Debug, Clone)]
struct Arc {
    wire: String,
    src: usize,
    dst: usize,
    side: Side,
    /// Port positions along the row on the arc's side.
    x0: f64,
    x1: f64,
}

impl Arc {
    fn interleaves(&self, other: &Arc) -> bool {
        let (p, q) = if self.src <= other.src { (self, other) } else { (other, self) };
        p.src < q.src && q.src < p.dst && p.dst < q.dst
    }

    fn crosses(&self, other: &Arc) -> bool {
        let (p, q) = if self.x0 <= other.x0 { (self, other) } else { (other, self) };
        p.side == q.side && p.x0 < q.x0 && q.x0 < p.x1 && p.x1 < q.x1
    }
}

#[derive(Debug, Clone)]
pub(crate) struct ColumnOrder {
    pub nodes: Vec<Node>,
    pub xs: Vec<f64>,
    /// Source leg x per wire.
    pub src_leg: BTreeMap<String, f64>,
    /// Sink leg x per consumed wire.
    pub dst_leg: BTreeMap<String, f64>,
    arcs: Vec<Arc>,
    pub crossings: Vec<(String, String)>,
}

impl ColumnOrder {
    fn side(&self, w: &str) -> Side {
        self.arcs.iter().find(|a| a.wire == w).map_or(Side::North, |a| a.side)
    }
}

struct Wiring<'a> {
    circuit: &'a Circuit,
    driver: BTreeMap<&'a str, Node>,
    consumer: BTreeMap<&'a str, Node>,
}

impl<'a> Wiring<'a> {
    fn new(circuit: &'a Circuit) -> Result<Self> {
        let mut driver = BTreeMap::new();
        for (w, d) in circuit.drivers()? {
            driver.insert(
                w,
                match d {
                    Driver::Input(i) => Node::Input(i),
                    Driver::Gate(g) => Node::Gate(g),
                },
            );
        }
        let mut consumer = BTreeMap::new();
        for (w, gates) in circuit.consumers() {
            let extra = usize::from(w == circuit.output);
            if gates.len() + extra > 1 {
                return Err(Error::Circuit(format!(
                    "wire {w} has fan-out {}; insert splitters first",
                    gates.len() + extra
                )));
            }
            if let Some(g) = gates.first() {
                consumer.insert(w, Node::Gate(*g));
            }
        }
        Ok(Wiring { circuit, driver, consumer })
    }

    fn nodes(&self) -> Vec<Node> {
        (0..self.circuit.inputs.len()).map(Node::Input).chain((0..self.circuit.gates.len()).map(Node::Gate)).collect()
    }

    /// Sides by 2-colouring the interleaving graph; the output is south.
    /// Returns the sides and the pairs left interleaving on one side.
    fn colour(arcs: &[Arc]) -> (Vec<Side>, Vec<(usize, usize)>) {
        let n = arcs.len();
        let mut side: Vec<Option<Side>> = vec![None; n];
        let mut bad = Vec::new();
        let mut roots: Vec<usize> = (0..n).filter(|i| arcs[*i].dst == usize::MAX).collect();
        roots.extend((0..n).filter(|i| arcs[*i].dst != usize::MAX));
        for r in roots {
            if side[r].is_some() {
                continue;
            }
            side[r] = Some(if arcs[r].dst == usize::MAX { Side::South } else { Side::North });
            let mut queue = std::collections::VecDeque::from([r]);
            while let Some(i) = queue.pop_front() {
                let s = side[i].expect("coloured");
                let flip = if s == Side::North { Side::South } else { Side::North };
                for j in 0..n {
                    if j == i || !arcs[i].interleaves(&arcs[j]) {
                        continue;
                    }
                    match side[j] {
                        None => {
                            side[j] = Some(flip);
                            queue.push_back(j);
                        }
                        Some(t) if t == s => bad.push((i.min(j), i.max(j))),
                        Some(_) => {}
                    }
                }
            }
        }
        bad.sort();
        bad.dedup();
        (side.into_iter().map(|s| s.expect("coloured")).collect(), bad)
    }

    /// Column x positions, sides and legs for one order.
    fn place(&self, order: &[Node]) -> ColumnOrder {
        let c = self.circuit;
        let mut xs = Vec::with_capacity(order.len());
        let mut cursor = 0.0;
        for (i, n) in order.iter().enumerate() {
            let (w, e) = extent(c, *n);
            if i > 0 {
                cursor += w;
            }
            xs.push(cursor);
            cursor += e + COLUMN_GAP;
        }
        let col: BTreeMap<Node, usize> = order.iter().enumerate().map(|(i, n)| (*n, i)).collect();
        let dst_col = |w: &str| -> Option<usize> {
            if w == c.output {
                Some(usize::MAX)
            } else {
                self.consumer.get(w).map(|n| col[n])
            }
        };
        let mut arcs: Vec<Arc> = Vec::new();
        for (w, d) in &self.driver {
            if let Some(dst) = dst_col(w) {
                arcs.push(Arc { wire: w.to_string(), src: col[d], dst, side: Side::North, x0: 0.0, x1: 0.0 });
            }
        }
        arcs.sort_by(|a, b| (a.src, a.dst, &a.wire).cmp(&(b.src, b.dst, &b.wire)));
        let (sides, bad) = Self::colour(&arcs);
        for (a, s) in arcs.iter_mut().zip(&sides) {
            a.side = *s;
        }
        let side_of: BTreeMap<String, Side> = arcs.iter().map(|a| (a.wire.clone(), a.side)).collect();

        let mut src_leg = BTreeMap::new();
        for (i, n) in order.iter().enumerate() {
            match *n {
                Node::Input(k) => {
                    src_leg.insert(c.inputs[k].clone(), xs[i]);
                }
                Node::Gate(g) => {
                    let gate = &c.gates[g];
                    match gate.kind {
                        GateKind::Nor => {
                            src_leg.insert(gate.outputs[0].clone(), xs[i] + OUT_LEG);
                        }
                        GateKind::Split => {
                            // The wire to the farther sink takes the inner leg.
                            let mut outs: Vec<(usize, usize, &String)> = gate
                                .outputs
                                .iter()
                                .enumerate()
                                .map(|(k, w)| (usize::MAX - dst_col(w).unwrap_or(0), k, w))
                                .collect();
                            outs.sort();
                            for (slot, (_, _, w)) in outs.into_iter().enumerate() {
                                src_leg.insert(w.clone(), xs[i] + SPLIT_OUT_LEGS[slot]);
                            }
                        }
                    }
                }
            }
        }
        // Sink legs and, for south wires, the port where the detour leaves
        // the corridor.
        let mut dst_leg = BTreeMap::new();
        let mut dst_port = BTreeMap::new();
        for (i, n) in order.iter().enumerate() {
            let Node::Gate(g) = *n else { continue };
            let gate = &c.gates[g];
            let x = xs[i];
            match gate.kind {
                GateKind::Nor => {
                    let mut ins: Vec<(f64, usize)> =
                        gate.inputs.iter().enumerate().map(|(k, w)| (src_leg[w], k)).collect();
                    ins.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
                    let s: Vec<Side> = ins.iter().map(|(_, k)| side_of[&gate.inputs[*k]]).collect();
                    let slots: [usize; 2] = match (s[0], s[1]) {
                        (Side::North, Side::North) => [0, 1],
                        (Side::South, Side::South) => [1, 0],
                        (Side::North, Side::South) => [0, 1],
                        (Side::South, Side::North) => [1, 0],
                    };
                    for ((_, k), slot) in ins.into_iter().zip(slots) {
                        let w = &gate.inputs[k];
                        dst_leg.insert(w.clone(), x + NOR_IN_LEGS[slot]);
                        let port = match side_of[w] {
                            Side::North => x + NOR_IN_LEGS[slot],
                            Side::South => x + NOR_DETOURS[slot].0,
                        };
                        dst_port.insert(w.clone(), port);
                    }
                }
                GateKind::Split => {
                    let w = &gate.inputs[0];
                    dst_leg.insert(w.clone(), x + OUT_LEG);
                    let port = match side_of[w] {
                        Side::North => x + OUT_LEG,
                        Side::South => x + SPLIT_DETOUR.0,
                    };
                    dst_port.insert(w.clone(), port);
                }
            }
        }
        for a in &mut arcs {
            a.x0 = src_leg[&a.wire];
            a.x1 = if a.dst == usize::MAX { f64::INFINITY } else { dst_port[&a.wire] };
        }
        let mut pairs: Vec<(usize, usize)> = bad;
        for i in 0..arcs.len() {
            for j in i + 1..arcs.len() {
                if arcs[i].crosses(&arcs[j]) {
                    pairs.push((i, j));
                }
            }
        }
        pairs.sort();
        pairs.dedup();
        let crossings = pairs.into_iter().map(|(i, j)| (arcs[i].wire.clone(), arcs[j].wire.clone())).collect();
        ColumnOrder { nodes: order.to_vec(), xs, src_leg, dst_leg, arcs, crossings }
    }

    /// Column order search. Orders are topological and built left to right;
    /// an arc closing at the new column interleaves with every arc still open
    /// from a column inside it, so side conflicts are known as soon as they
    /// arise and a parity union-find prunes orders that cannot be 2-coloured.
    /// Candidates whose inputs were placed most recently go first, which
    /// keeps arcs short and nested.
    fn best_order(&self) -> ColumnOrder {
        let nodes = self.nodes();
        let index: BTreeMap<Node, usize> = nodes.iter().enumerate().map(|(i, n)| (*n, i)).collect();
        let mut preds = vec![Vec::new(); nodes.len()];
        let mut arcs = Vec::new();
        for (w, d) in &self.driver {
            let dst = if *w == self.circuit.output {
                None
            } else {
                match self.consumer.get(w) {
                    Some(n) => Some(index[n]),
                    None => continue,
                }
            };
            if let Some(t) = dst {
                preds[t].push(index[d]);
            }
            arcs.push((index[d], dst));
        }
        let search = OrderSearch { nodes: &nodes, preds: &preds, arcs: &arcs };
        let greedy: Vec<Node> = search.greedy().into_iter().map(|i| nodes[i]).collect();
        let mut best = self.place(&greedy);
        if best.crossings.is_empty() {
            return best;
        }
        let mut budget = ORDER_BUDGET;
        let mut state = SearchState::new(nodes.len(), arcs.len());
        if let Some(i) = arcs.iter().position(|a| a.1.is_none()) {
            state.sides.union(i, arcs.len(), false);
        }
        let mut found = None;
        search.run(&mut state, &mut budget, &mut |order| {
            let order: Vec<Node> = order.iter().map(|i| nodes[*i]).collect();
            let placed = self.place(&order);
            let done = placed.crossings.is_empty();
            if done {
                found = Some(placed);
            }
            done
        });
        if let Some(f) = found {
            best = f;
        }
        best
    }
}

/// Union-find over arcs plus one anchor standing for the south side; the
/// parity says whether an element sits on the other side of its root.
#[derive(Debug, Clone)]
struct Parity {
    parent: Vec<usize>,
    odd: Vec<bool>,
}

impl Parity {
    fn new(n: usize) -> Self {
        Parity { parent: (0..n).collect(), odd: vec![false; n] }
    }

    fn find(&self, mut x: usize) -> (usize, bool) {
        let mut odd = false;
        while self.parent[x] != x {
            odd ^= self.odd[x];
            x = self.parent[x];
        }
        (x, odd)
    }

    /// Records that `a` and `b` are on different sides (`differ`) or the
    /// same side. False when that contradicts what is already known.
    fn union(&mut self, a: usize, b: usize, differ: bool) -> bool {
        let (ra, pa) = self.find(a);
        let (rb, pb) = self.find(b);
        if ra == rb {
            return (pa ^ pb) == differ;
        }
        self.parent[ra] = rb;
        self.odd[ra] = pa ^ pb ^ differ;
        true
    }
}

#[derive(Debug, Clone)]
struct SearchState {
    order: Vec<usize>,
    pos: Vec<Option<usize>>,
    sides: Parity,
}

impl SearchState {
    fn new(nodes: usize, arcs: usize) -> Self {
        SearchState { order: Vec::with_capacity(nodes), pos: vec![None; nodes], sides: Parity::new(arcs + 1) }
    }
}

struct OrderSearch<'a> {
    nodes: &'a [Node],
    preds: &'a [Vec<usize>],
    /// (source node, sink node or `None` for the circuit output)
    arcs: &'a [(usize, Option<usize>)],
}

impl OrderSearch<'_> {
    fn candidates(&self, s: &SearchState) -> Vec<usize> {
        let mut c: Vec<(i64, usize)> = (0..self.nodes.len())
            .filter(|n| s.pos[*n].is_none() && self.preds[*n].iter().all(|p| s.pos[*p].is_some()))
            .map(|n| {
                let recent = self.preds[n].iter().map(|p| s.pos[*p].expect("placed") as i64).max().unwrap_or(-1);
                (-recent, n)
            })
            .collect();
        c.sort();
        c.into_iter().map(|(_, n)| n).collect()
    }

    fn greedy(&self) -> Vec<usize> {
        let mut s = SearchState::new(self.nodes.len(), 0);
        while s.order.len() < self.nodes.len() {
            let n = self.candidates(&s)[0];
            s.pos[n] = Some(s.order.len());
            s.order.push(n);
        }
        s.order
    }

    /// Places `n` next; false when that forces two interleaving arcs onto
    /// one side.
    fn place(&self, s: &mut SearchState, n: usize) -> bool {
        let p = s.order.len();
        s.pos[n] = Some(p);
        s.order.push(n);
        for (i, (src, dst)) in self.arcs.iter().enumerate() {
            if *dst != Some(n) {
                continue;
            }
            let a = s.pos[*src].expect("source placed");
            for (j, (src2, dst2)) in self.arcs.iter().enumerate() {
                let open = dst2.is_none_or(|t| s.pos[t].is_none());
                let inside = s.pos[*src2].is_some_and(|c| a < c && c < p);
                if open && inside && !s.sides.union(i, j, true) {
                    return false;
                }
            }
        }
        true
    }

    /// Depth-first over orders; `leaf` returns true to stop.
    fn run(&self, s: &mut SearchState, budget: &mut usize, leaf: &mut dyn FnMut(&[usize]) -> bool) -> bool {
        if s.order.len() == self.nodes.len() {
            return leaf(&s.order);
        }
        for n in self.candidates(s) {
            if *budget == 0 {
                return false;
            }
            *budget -= 1;
            let mut next = s.clone();
            if self.place(&mut next, n) && self.run(&mut next, budget, leaf) {
                return true;
            }
        }
        false
    }
}

pub(crate) fn column_order(circuit: &Circuit) -> Result<ColumnOrder> {
    let wiring = Wiring::new(circuit)?;
    Ok(wiring.best_order())
}

/// Compiles a splitter-normalised circuit into a frame design whose output
/// beam can be assembled exactly when the circuit is satisfiable.
///
/// Fails with [`Error::Circuit`] when a wire has fan-out above one or the
/// output is a primary input, and with [`Error::Layout`] when no column
/// order routes the wires without crossings (see [`super::planarize`]).
pub fn compile_circuit(circuit: &Circuit) -> Result<CompiledCircuit> {
    circuit.validate()?;
    if circuit.gates.is_empty() || circuit.inputs.contains(&circuit.output) {
        return Err(Error::Circuit("the output must be driven by a gate".into()));
    }
    let wiring = Wiring::new(circuit)?;
    let order = wiring.best_order();
    if let Some((a, b)) = order.crossings.first() {
        let arc = order.arcs.iter().find(|x| &x.wire == b).expect("crossing arc");
        return Err(Error::Layout {
            column: arc.src,
            reason: format!("wires {a} and {b} cross; planarize the circuit first"),
        });
    }
    Compiler::new(circuit, &wiring, order).run()
}

struct Compiler<'a> {
    circuit: &'a Circuit,
    wiring: &'a Wiring<'a>,
    order: ColumnOrder,
    b: DesignBuilder,
    levels: BTreeMap<String, usize>,
    junctions: BTreeMap<usize, JointId>,
    output_y: f64,
}

impl<'a> Compiler<'a> {
    fn new(circuit: &'a Circuit, wiring: &'a Wiring<'a>, order: ColumnOrder) -> Self {
        // Track level: one past the highest arc nested inside on that side.
        let mut arcs: Vec<&Arc> = order.arcs.iter().filter(|a| a.dst != usize::MAX).collect();
        arcs.sort_by(|a, b| (a.x1 - a.x0).total_cmp(&(b.x1 - b.x0)));
        let mut levels: BTreeMap<String, usize> = BTreeMap::new();
        for (i, a) in arcs.iter().enumerate() {
            let inner = arcs[..i]
                .iter()
                .filter(|b| b.side == a.side && b.x0 >= a.x0 && b.x1 <= a.x1)
                .map(|b| levels[&b.wire])
                .max()
                .unwrap_or(0);
            levels.insert(a.wire.clone(), inner + 1);
        }
        let deepest = arcs.iter().filter(|a| a.side == Side::South).map(|a| levels[&a.wire]).max().unwrap_or(0);
        let output_y = (south_track(deepest) - 6.0).min(-9.0);
        Compiler {
            circuit,
            wiring,
            order,
            b: DesignBuilder::new(crate::fixtures::DIAMETER),
            levels,
            junctions: BTreeMap::new(),
            output_y,
        }
    }

    fn column_x(&self, node: Node) -> f64 {
        let i = self.order.nodes.iter().position(|n| *n == node).expect("placed node");
        self.order.xs[i]
    }

    fn run(mut self) -> Result<CompiledCircuit> {
        let c = self.circuit;
        let mut gadgets = Vec::new();
        for (col, node) in self.order.nodes.clone().into_iter().enumerate() {
            if let Node::Gate(g) = node {
                let x = self.order.xs[col];
                gadgets.push(self.gadget(g, x));
            }
        }
        gadgets.sort_by_key(|gb| gb.gate);

        let mut wires = BTreeMap::new();
        let mut routes = BTreeMap::new();
        let mut intended = Vec::new();
        for w in c.all_wires() {
            let (path, end_joint) = self.wire_route(w);
            let base = self.b.ground(&format!("wire.{w}.base"), path[0].x, path[0].y);
            let end = match end_joint {
                Some(j) => j,
                None => self.b.joint(&format!("wire.{w}.end"), *path.last().expect("route")),
            };
            let beam = self.b.beam_path(&format!("wire.{w}"), base, end, path.clone());
            wires.insert(w.to_string(), beam);
            routes.insert(w.to_string(), path);
            if let Node::Gate(g) = self.wiring.driver[w] {
                intended.push((gadgets[g].red[0], beam));
                intended.push((beam, gadgets[g].red[1]));
            }
            if self.order.side(w) == Side::South && w != c.output {
                let arc = self.order.arcs.iter().find(|a| a.wire == w).expect("south arc");
                for col in arc.src + 1..arc.dst {
                    if let Node::Gate(g) = self.order.nodes[col] {
                        intended.push((gadgets[g].magenta, beam));
                    }
                }
            }
            if let Some(Node::Gate(g)) = self.wiring.consumer.get(w) {
                match c.gates[*g].kind {
                    GateKind::Nor => intended.push((gadgets[*g].blue[0], beam)),
                    GateKind::Split => {
                        intended.push((gadgets[*g].red[0], beam));
                        intended.push((beam, gadgets[*g].red[1]));
                    }
                }
            }
        }

        let xs: Vec<f64> = gadgets.iter().map(|gb| self.column_x(Node::Gate(gb.gate))).collect();
        let x0 = xs.iter().copied().fold(f64::INFINITY, f64::min) - 5.0;
        let x1 = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max) + 8.0;
        let oy = self.output_y;
        let output_route = vec![
            Vec3::new(x0 - 3.0, oy, 0.0),
            Vec3::new(x0, oy, OVER_Z),
            Vec3::new(x1, oy, OVER_Z),
            Vec3::new(x1 + 3.0, oy, 0.0),
        ];
        let o0 = self.b.ground("output.start", output_route[0].x, oy);
        let o1 = self.b.ground("output.end", output_route[3].x, oy);
        let output_beam = self.b.beam_path("output", o0, o1, output_route.clone());
        for gb in &gadgets {
            intended.push((gb.magenta, output_beam));
            intended.push((output_beam, gb.spine));
            let kind = c.gates[gb.gate].kind;
            if kind == GateKind::Nor {
                intended.push((gb.junction[0], gb.blue[1]));
                intended.push((gb.junction[0], gb.junction[1]));
            }
        }
        intended.push((wires[&c.output], output_beam));
        intended.sort();
        intended.dedup();

        let layout = GadgetLayout {
            columns: self
                .order
                .nodes
                .iter()
                .enumerate()
                .map(|(i, n)| Placement { node: *n, column: i, x: self.order.xs[i] })
                .collect(),
            sides: c.all_wires().into_iter().map(|w| (w.to_string(), self.order.side(w))).collect(),
            routes,
            output_route,
        };
        let design = self.b.build()?;
        Ok(CompiledCircuit {
            design,
            circuit: c.clone(),
            gadgets,
            wires,
            output_beam,
            intended_order: intended,
            layout,
        })
    }

    fn gadget(&mut self, g: usize, x: f64) -> GadgetBeams {
        let kind = self.circuit.gates[g].kind;
        let tag = match kind {
            GateKind::Nor => format!("nor{g}"),
            GateKind::Split => format!("split{g}"),
        };
        let b = &mut self.b;
        let p = |dx: f64, y: f64, z: f64| Vec3::new(x + dx, y, z);
        let ground = b.ground(&format!("{tag}.G"), x, G_Y);
        let rm = b.joint(&format!("{tag}.rm"), p(HALF_W, MID_Y, LOOP_Z));
        let top = b.joint(&format!("{tag}.T"), p(0.0, 0.0, LOOP_Z));
        let r1 = b.beam(&format!("{tag}.R1"), ground, rm);
        let r2 = b.beam(&format!("{tag}.R2"), rm, top);
        let blue = match kind {
            GateKind::Nor => {
                let bm = b.joint(&format!("{tag}.bm"), p(-HALF_W, MID_Y, LOOP_Z));
                vec![b.beam(&format!("{tag}.B1"), ground, bm), b.beam(&format!("{tag}.B2"), bm, top)]
            }
            GateKind::Split => vec![b.beam_via(&format!("{tag}.B"), ground, top, &[p(-HALF_W, MID_Y, LOOP_Z)])],
        };
        let oy = self.output_y;
        let m_y = oy - 6.0;
        let m = b.joint(&format!("{tag}.M"), p(0.0, m_y, LOOP_Z));
        let magenta = b.beam(&format!("{tag}.magenta"), top, m);
        let sg = b.ground(&format!("{tag}.spine_base"), x - 3.0, oy + 2.5);
        let spine =
            b.beam_via(&format!("{tag}.spine"), m, sg, &[p(-3.0, m_y + 2.0, LOOP_Z), p(-3.0, oy, OVER_Z + 1.5)]);
        let mut junction = Vec::new();
        if kind == GateKind::Nor {
            let j = b.joint(&format!("{tag}.J"), p(-4.0, 5.5, LOOP_Z));
            let k = b.joint(&format!("{tag}.K"), p(-9.0, 1.0, UNDER_Z));
            let (bx, by) = (4.3, 4.0);
            let c_beam = b.beam_via(&format!("{tag}.c"), j, k, &[p(-bx, by, UNDER_Z)]);
            // d passes over c on its way down to K.
            let t = (7.5 - bx) / (9.0 - bx);
            let over = p(-7.5, by + (1.0 - by) * t, 4.0);
            let dg = b.ground(&format!("{tag}.d_base"), x - 12.0, 4.5);
            let d_beam = b.beam_via(&format!("{tag}.d"), dg, k, &[over]);
            junction = vec![c_beam, d_beam];
            self.junctions.insert(g, j);
        }
        GadgetBeams { gate: g, kind, red: vec![r1, r2], blue, magenta, spine, junction }
    }

    /// Route of a wire and the joint it ends on, if it ends on a junction.
    fn wire_route(&self, w: &str) -> (Vec<Vec3>, Option<JointId>) {
        let c = self.circuit;
        let xs = self.order.src_leg[w];
        let side = self.order.side(w);
        let mut path = Vec::new();
        match self.wiring.driver[w] {
            Node::Input(_) => match side {
                Side::North => path.extend([Vec3::new(xs, 14.0, 0.0), Vec3::new(xs, 17.0, LOOP_Z)]),
                Side::South => path.push(Vec3::new(xs, 0.0, 0.0)),
            },
            Node::Gate(g) => {
                let dx = xs - self.column_x(Node::Gate(g));
                let (y1, y2) = (upper_y(dx), lower_y(dx));
                match side {
                    // Rises south of R2, passes under it and over R1.
                    Side::North => path.extend([
                        Vec3::new(xs, -1.0, 0.0),
                        Vec3::new(xs, y2, UNDER_Z),
                        Vec3::new(xs, y1, OVER_Z),
                        Vec3::new(xs, y1 + 1.5, OVER_Z),
                        Vec3::new(xs, y1 + 3.0, LOOP_Z),
                    ]),
                    // Enters from the north, over R1 and under R2.
                    Side::South => path.extend([
                        Vec3::new(xs, 15.0, 0.0),
                        Vec3::new(xs, y1 + 1.5, OVER_Z),
                        Vec3::new(xs, y1, OVER_Z),
                        Vec3::new(xs, y2, UNDER_Z),
                        Vec3::new(xs, y2 - 1.5, UNDER_Z),
                    ]),
                }
            }
        }
        if w == c.output {
            // Straight on south, under the output beam.
            path.push(Vec3::new(xs, self.output_y - 2.0, UNDER_Z));
            return (path, None);
        }
        let Some(Node::Gate(g)) = self.wiring.consumer.get(w).copied() else {
            return (path, None);
        };
        let kind = c.gates[g].kind;
        let xd = self.order.dst_leg[w];
        let gx = self.column_x(Node::Gate(g));
        let dx = xd - gx;
        let y1 = upper_y(dx);
        match side {
            Side::North => {
                let track = TRACK_Y0 + TRACK_PITCH * self.levels[w] as f64;
                path.push(Vec3::new(xs, track, LOOP_Z));
                path.push(Vec3::new(xd, track, LOOP_Z));
                path.push(Vec3::new(xd, y1 + 3.0, LOOP_Z));
            }
            Side::South => {
                let track = south_track(self.levels[w]);
                let (px, row) = match kind {
                    GateKind::Nor => NOR_DETOURS[NOR_IN_LEGS.iter().position(|l| gx + l == xd).expect("leg")],
                    GateKind::Split => SPLIT_DETOUR,
                };
                path.push(Vec3::new(xs, track, OVER_Z));
                path.push(Vec3::new(gx + px, track, OVER_Z));
                path.push(Vec3::new(gx + px, row, OVER_Z));
                path.push(Vec3::new(xd, row, OVER_Z));
            }
        }
        if path.last().expect("route").y > y1 + 1.5 {
            path.push(Vec3::new(xd, y1 + 1.5, OVER_Z));
        }
        path.push(Vec3::new(xd, y1 - 1.0, OVER_Z));
        match kind {
            GateKind::Nor => {
                let j = self.junctions[&g];
                path.push(self.b.position(j));
                (path, Some(j))
            }
            GateKind::Split => {
                let y2 = lower_y(dx);
                path.push(Vec3::new(xd, y2 + 1.5, UNDER_Z));
                path.push(Vec3::new(xd, y2 - 1.5, UNDER_Z));
                (path, None)
            }
        }
    }
}

fn south_track(level: usize) -> f64 {
    SOUTH_Y0 - SOUTH_PITCH * (level.max(1) - 1) as f64
}
