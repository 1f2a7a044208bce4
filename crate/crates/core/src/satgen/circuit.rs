//! NOR/splitter circuits: netlist text, evaluation and rewrites.
//!
//! Netlist format, one statement per line, `#` starts a comment and a
//! trailing `;` is optional:
//!
//! ```text
//! INPUT a, b
//! OUTPUT w
//! n = NOR(a, b)
//! w1, w2 = SPLIT(n)
//! w = NOR(w1, w2)
//! ```

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GateKind {
    Nor,
    Split,
}

impl GateKind {
    pub fn arity(self) -> (usize, usize) {
        match self {
            GateKind::Nor => (2, 1),
            GateKind::Split => (1, 2),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Gate {
    pub kind: GateKind,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
}

impl Gate {
    pub fn nor(a: &str, b: &str, out: &str) -> Self {
        Gate { kind: GateKind::Nor, inputs: vec![a.into(), b.into()], outputs: vec![out.into()] }
    }

    pub fn split(input: &str, o1: &str, o2: &str) -> Self {
        Gate { kind: GateKind::Split, inputs: vec![input.into()], outputs: vec![o1.into(), o2.into()] }
    }
}

/// Where a wire comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Driver {
    Input(usize),
    Gate(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Circuit {
    pub inputs: Vec<String>,
    pub gates: Vec<Gate>,
    pub output: String,
}

/// Largest input count for truth-table enumeration.
pub const MAX_TABLE_INPUTS: usize = 10;

impl Circuit {
    pub fn parse(text: &str) -> Result<Circuit> {
        let mut inputs = Vec::new();
        let mut output = None;
        let mut gates = Vec::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim().trim_end_matches(';').trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: &str| Error::Parse(format!("netlist line {}: {msg}: {raw:?}", n + 1));
            if let Some(rest) = line.strip_prefix("INPUT ") {
                for name in rest.split(',') {
                    inputs.push(wire_name(name).ok_or_else(|| err("bad input name"))?);
                }
            } else if let Some(rest) = line.strip_prefix("OUTPUT ") {
                if output.is_some() {
                    return Err(err("second OUTPUT"));
                }
                output = Some(wire_name(rest).ok_or_else(|| err("bad output name"))?);
            } else {
                let (lhs, rhs) = line.split_once('=').ok_or_else(|| err("expected `out = GATE(...)`"))?;
                let outs =
                    lhs.split(',').map(wire_name).collect::<Option<Vec<_>>>().ok_or_else(|| err("bad output wire"))?;
                let rhs = rhs.trim();
                let open = rhs.find('(').ok_or_else(|| err("missing `(`"))?;
                let args = rhs[open + 1..].strip_suffix(')').ok_or_else(|| err("missing `)`"))?;
                let kind = match rhs[..open].trim() {
                    "NOR" => GateKind::Nor,
                    "SPLIT" => GateKind::Split,
                    _ => return Err(err("unknown gate; expected NOR or SPLIT")),
                };
                let ins =
                    args.split(',').map(wire_name).collect::<Option<Vec<_>>>().ok_or_else(|| err("bad input wire"))?;
                if (ins.len(), outs.len()) != kind.arity() {
                    return Err(err("wrong number of wires for gate"));
                }
                gates.push(Gate { kind, inputs: ins, outputs: outs });
            }
        }
        let output = output.ok_or_else(|| Error::Parse("netlist has no OUTPUT".into()))?;
        let c = Circuit { inputs, gates, output };
        c.validate()?;
        Ok(c)
    }

    /// Wire drivers. Fails on doubly driven wires.
    pub fn drivers(&self) -> Result<HashMap<&str, Driver>> {
        let mut d = HashMap::new();
        for (i, w) in self.inputs.iter().enumerate() {
            if d.insert(w.as_str(), Driver::Input(i)).is_some() {
                return Err(Error::Circuit(format!("wire {w} has more than one driver")));
            }
        }
        for (g, gate) in self.gates.iter().enumerate() {
            for w in &gate.outputs {
                if d.insert(w.as_str(), Driver::Gate(g)).is_some() {
                    return Err(Error::Circuit(format!("wire {w} has more than one driver")));
                }
            }
        }
        Ok(d)
    }

    /// Gates consuming each wire, in gate order (a gate reading a wire twice
    /// appears twice).
    pub fn consumers(&self) -> BTreeMap<&str, Vec<usize>> {
        let mut c: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
        for (g, gate) in self.gates.iter().enumerate() {
            for w in &gate.inputs {
                c.entry(w.as_str()).or_default().push(g);
            }
        }
        c
    }

    pub fn validate(&self) -> Result<()> {
        for g in &self.gates {
            if (g.inputs.len(), g.outputs.len()) != g.kind.arity() {
                return Err(Error::Circuit(format!("gate driving {:?} has the wrong number of wires", g.outputs)));
            }
        }
        let drivers = self.drivers()?;
        for g in &self.gates {
            for w in &g.inputs {
                if !drivers.contains_key(w.as_str()) {
                    return Err(Error::Circuit(format!("wire {w} is read but never driven")));
                }
            }
        }
        if !drivers.contains_key(self.output.as_str()) {
            return Err(Error::Circuit(format!("output wire {} is never driven", self.output)));
        }
        self.topo_order().map(|_| ())
    }

    /// Gate indices in dependency order; ties by index.
    pub fn topo_order(&self) -> Result<Vec<usize>> {
        let drivers = self.drivers()?;
        let n = self.gates.len();
        let mut indeg = vec![0usize; n];
        let mut succ: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (g, gate) in self.gates.iter().enumerate() {
            for w in &gate.inputs {
                if let Some(Driver::Gate(src)) = drivers.get(w.as_str()) {
                    succ[*src].push(g);
                    indeg[g] += 1;
                }
            }
        }
        let mut ready: BTreeSet<usize> = (0..n).filter(|g| indeg[*g] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(g) = ready.pop_first() {
            order.push(g);
            for &s in &succ[g] {
                indeg[s] -= 1;
                if indeg[s] == 0 {
                    ready.insert(s);
                }
            }
        }
        if order.len() != n {
            return Err(Error::Circuit("circuit has a cycle".into()));
        }
        Ok(order)
    }

    /// Every wire value for one input assignment.
    pub fn evaluate(&self, assignment: &[bool]) -> Result<BTreeMap<String, bool>> {
        if assignment.len() != self.inputs.len() {
            return Err(Error::Circuit(format!("{} input values for {} inputs", assignment.len(), self.inputs.len())));
        }
        let mut v: BTreeMap<String, bool> = self.inputs.iter().cloned().zip(assignment.iter().copied()).collect();
        for g in self.topo_order()? {
            let gate = &self.gates[g];
            let ins: Vec<bool> = gate.inputs.iter().map(|w| v[w]).collect();
            match gate.kind {
                GateKind::Nor => {
                    v.insert(gate.outputs[0].clone(), !(ins[0] || ins[1]));
                }
                GateKind::Split => {
                    for o in &gate.outputs {
                        v.insert(o.clone(), ins[0]);
                    }
                }
            }
        }
        Ok(v)
    }

    /// Output value for every assignment; bit `i` of the row index is input `i`.
    pub fn truth_table(&self) -> Result<Vec<bool>> {
        let n = self.inputs.len();
        if n > MAX_TABLE_INPUTS {
            return Err(Error::Circuit(format!("{n} inputs is above the enumeration limit of {MAX_TABLE_INPUTS}")));
        }
        (0..1usize << n)
            .map(|row| {
                let a: Vec<bool> = (0..n).map(|i| row >> i & 1 == 1).collect();
                Ok(self.evaluate(&a)?[&self.output])
            })
            .collect()
    }

    /// A satisfying assignment, lowest row first.
    pub fn satisfying_assignment(&self) -> Result<Option<Vec<bool>>> {
        let n = self.inputs.len();
        Ok(self.truth_table()?.iter().position(|v| *v).map(|row| (0..n).map(|i| row >> i & 1 == 1).collect()))
    }

    pub fn is_satisfiable(&self) -> Result<bool> {
        Ok(self.satisfying_assignment()?.is_some())
    }

    pub fn all_wires(&self) -> BTreeSet<&str> {
        self.inputs
            .iter()
            .map(String::as_str)
            .chain(self.gates.iter().flat_map(|g| g.outputs.iter().map(String::as_str)))
            .collect()
    }

    fn fresh(&self, taken: &mut BTreeSet<String>, base: &str) -> String {
        let mut k = 1;
        loop {
            let name = format!("{base}.{k}");
            if !self.all_wires().contains(name.as_str()) && taken.insert(name.clone()) {
                return name;
            }
            k += 1;
        }
    }
}

fn wire_name(s: &str) -> Option<String> {
    let s = s.trim();
    let ok = !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '.');
    ok.then(|| s.to_string())
}

impl fmt::Display for Circuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "INPUT {}", self.inputs.join(", "))?;
        writeln!(f, "OUTPUT {}", self.output)?;
        for g in &self.gates {
            let name = match g.kind {
                GateKind::Nor => "NOR",
                GateKind::Split => "SPLIT",
            };
            writeln!(f, "{} = {}({})", g.outputs.join(", "), name, g.inputs.join(", "))?;
        }
        Ok(())
    }
}

/// Rewrites the circuit so every wire feeds at most one gate. A wire read
/// `k` times (the circuit output counts as one read) becomes a tree of
/// `k − 1` splitters.
pub fn insert_splitters(circuit: &Circuit) -> Result<Circuit> {
    circuit.validate()?;
    let mut out = circuit.clone();
    let mut taken = BTreeSet::new();
    // (gate, input slot) for every read, plus the output pseudo-read.
    let mut reads: BTreeMap<String, Vec<Option<(usize, usize)>>> = BTreeMap::new();
    for (g, gate) in circuit.gates.iter().enumerate() {
        for (slot, w) in gate.inputs.iter().enumerate() {
            reads.entry(w.clone()).or_default().push(Some((g, slot)));
        }
    }
    reads.entry(circuit.output.clone()).or_default().push(None);
    let mut new_gates = Vec::new();
    for (wire, uses) in reads {
        if uses.len() < 2 {
            continue;
        }
        let leaves = split_tree(circuit, &mut taken, &wire, uses.len(), &mut new_gates);
        for (leaf, use_) in leaves.into_iter().zip(uses) {
            match use_ {
                Some((g, slot)) => out.gates[g].inputs[slot] = leaf,
                None => out.output = leaf,
            }
        }
    }
    out.gates.extend(new_gates);
    out.validate()?;
    Ok(out)
}

fn split_tree(c: &Circuit, taken: &mut BTreeSet<String>, wire: &str, k: usize, gates: &mut Vec<Gate>) -> Vec<String> {
    if k == 1 {
        return vec![wire.to_string()];
    }
    let a = c.fresh(taken, wire);
    let b = c.fresh(taken, wire);
    gates.push(Gate::split(wire, &a, &b));
    let left = k.div_ceil(2);
    let mut leaves = split_tree(c, taken, &a, left, gates);
    leaves.extend(split_tree(c, taken, &b, k - left, gates));
    leaves
}

/// NOR network computing `XNOR(x, y)` into `out`.
fn xnor(x: &str, y: &str, out: &str, prefix: &str) -> Vec<Gate> {
    let n = format!("{prefix}n");
    let p = format!("{prefix}p");
    let q = format!("{prefix}q");
    vec![Gate::nor(x, y, &n), Gate::nor(x, &n, &p), Gate::nor(y, &n, &q), Gate::nor(&p, &q, out)]
}

/// Crossover built from NOR gates: outputs `(b_out, a_out)` carry the values
/// of `(b, a)`. Wires are read more than once; run [`insert_splitters`]
/// afterwards.
pub fn crossover(a: &str, b: &str, a_out: &str, b_out: &str, prefix: &str) -> Vec<Gate> {
    let t = format!("{prefix}t");
    let mut gates = xnor(a, b, &t, &format!("{prefix}x0"));
    gates.extend(xnor(a, &t, b_out, &format!("{prefix}x1")));
    gates.extend(xnor(b, &t, a_out, &format!("{prefix}x2")));
    gates
}

/// Replaces pairs of crossing wires in the layout's column order with
/// crossover subcircuits, then restores single fan-out. Gates that cannot
/// reach the output are dropped first. One pass: a crossing whose wire was
/// already rerouted is left, and the compiler reports it. Repeating the pass
/// does not converge, since crossovers add wires that cross again.
pub fn planarize(circuit: &Circuit) -> Result<Circuit> {
    let base = insert_splitters(&drop_dead_gates(circuit)?)?;
    let order = super::layout::column_order(&base)?;
    if order.crossings.is_empty() {
        return Ok(base);
    }
    uncross(&base, &order.crossings)
}

/// Gates whose output never reaches the circuit output, removed.
fn drop_dead_gates(circuit: &Circuit) -> Result<Circuit> {
    let drivers = circuit.drivers()?;
    let mut live: BTreeSet<String> = BTreeSet::new();
    let mut stack = vec![circuit.output.clone()];
    let mut gates = BTreeSet::new();
    while let Some(w) = stack.pop() {
        if !live.insert(w.clone()) {
            continue;
        }
        if let Some(Driver::Gate(g)) = drivers.get(w.as_str()) {
            gates.insert(*g);
            stack.extend(circuit.gates[*g].inputs.iter().cloned());
        }
    }
    let mut out = circuit.clone();
    out.gates = circuit.gates.iter().enumerate().filter(|(i, _)| gates.contains(i)).map(|(_, g)| g.clone()).collect();
    Ok(out)
}

/// Each crossing whose wires are both still untouched gets a crossover.
fn uncross(base: &Circuit, crossings: &[(String, String)]) -> Result<Circuit> {
    let mut out = base.clone();
    let mut used: BTreeSet<String> = BTreeSet::new();
    let mut taken = BTreeSet::new();
    for (k, (w1, w2)) in crossings.iter().enumerate() {
        if used.contains(w1) || used.contains(w2) {
            continue;
        }
        used.insert(w1.clone());
        used.insert(w2.clone());
        let a_out = base.fresh(&mut taken, w1);
        let b_out = base.fresh(&mut taken, w2);
        // Consumers of w1 now read a_out, consumers of w2 read b_out.
        for gate in &mut out.gates {
            for w in &mut gate.inputs {
                if w == w1 {
                    *w = a_out.clone();
                } else if w == w2 {
                    *w = b_out.clone();
                }
            }
        }
        if &out.output == w1 {
            out.output = a_out.clone();
        } else if &out.output == w2 {
            out.output = b_out.clone();
        }
        out.gates.extend(crossover(w1, w2, &a_out, &b_out, &format!("x{k}.")));
    }
    insert_splitters(&out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table_of(c: &Circuit) -> Vec<bool> {
        c.truth_table().unwrap()
    }

    #[test]
    fn parse_and_print_round_trip() {
        let text = "INPUT a, b\nOUTPUT w\nn = NOR(a, b)  # first\nw1, w2 = SPLIT(n);\nw = NOR(w1, w2)\n";
        let c = Circuit::parse(text).unwrap();
        assert_eq!(c.inputs, ["a", "b"]);
        assert_eq!(c.gates.len(), 3);
        assert_eq!(Circuit::parse(&c.to_string()).unwrap(), c);
        // NOR(NOR(a,b), NOR(a,b)) = a OR b
        assert_eq!(table_of(&c), [false, true, true, true]);
    }

    #[test]
    fn parse_errors() {
        assert!(Circuit::parse("INPUT a\nOUTPUT w\nw = AND(a, a)").is_err());
        assert!(Circuit::parse("INPUT a\nw = NOR(a, a)").is_err());
        assert!(Circuit::parse("INPUT a\nOUTPUT w\nw = NOR(a, z)").is_err());
        assert!(Circuit::parse("INPUT a\nOUTPUT w\nw = NOR(a, v)\nv = NOR(a, w)").is_err());
        assert!(Circuit::parse("INPUT a\nOUTPUT w\nw = NOR(a)").is_err());
    }

    #[test]
    fn fanout_one_is_unchanged() {
        let c = Circuit::parse("INPUT a, b\nOUTPUT w\nw = NOR(a, b)").unwrap();
        assert_eq!(insert_splitters(&c).unwrap(), c);
    }

    #[test]
    fn splitter_counts() {
        let c = Circuit::parse("INPUT a\nOUTPUT w\nw = NOR(a, a)").unwrap();
        let s = insert_splitters(&c).unwrap();
        assert_eq!(s.gates.iter().filter(|g| g.kind == GateKind::Split).count(), 1);
        // fan-out 4: a feeds two gates twice each
        let c = Circuit::parse("INPUT a\nOUTPUT w\nu = NOR(a, a)\nv = NOR(a, a)\nw = NOR(u, v)").unwrap();
        let s = insert_splitters(&c).unwrap();
        assert_eq!(s.gates.iter().filter(|g| g.kind == GateKind::Split).count(), 3);
        for (_, uses) in s.consumers() {
            assert_eq!(uses.len(), 1);
        }
        assert_eq!(table_of(&s), table_of(&c));
    }

    #[test]
    fn crossover_swaps() {
        let mut gates = crossover("a", "b", "a2", "b2", "x.");
        gates.push(Gate::split("a2", "a2l", "a2r"));
        let c = Circuit { inputs: vec!["a".into(), "b".into()], gates, output: "a2l".into() };
        let c = insert_splitters(&c).unwrap();
        for row in 0..4 {
            let a = [row & 1 == 1, row & 2 == 2];
            let v = c.evaluate(&a).unwrap();
            assert_eq!(v["a2l"], a[0]);
            assert_eq!(v["b2"], a[1]);
        }
    }

    #[test]
    fn satisfiability() {
        let sat = Circuit::parse("INPUT a\nOUTPUT w\nw = NOR(a, a)").unwrap();
        assert_eq!(sat.satisfying_assignment().unwrap(), Some(vec![false]));
        let unsat = Circuit::parse("INPUT x\nOUTPUT w\nn = NOR(x, x)\nw = NOR(x, n)").unwrap();
        assert!(!unsat.is_satisfiable().unwrap());
    }
}
