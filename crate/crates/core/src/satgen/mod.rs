//! Compiles NOR circuits into frame designs whose output beam can be
//! assembled exactly when the circuit is satisfiable.
//!
//! Each gate becomes a gadget with a grounded loop split into a red and a
//! blue half. Before the output beam goes down exactly one half can be
//! complete: the magenta stub hanging off the loop top must precede the
//! output beam, and the spine that stabilises it must follow. A NOR output
//! wire is printed between the two red beams, so it is present at that
//! moment exactly when red was chosen; a NOR input wire needs the first blue
//! beam, and the second blue beam needs one of the inputs through the
//! junction beam. Splitters tie all their wires to the red half.

mod circuit;
mod layout;

pub use circuit::{crossover, insert_splitters, planarize, Circuit, Driver, Gate, GateKind, MAX_TABLE_INPUTS};
pub use layout::{compile_circuit, CompiledCircuit, GadgetBeams, GadgetLayout, Node, Placement, Side};

#[cfg(test)]
mod tests;
