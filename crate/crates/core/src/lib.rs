//! Sequencing and toolpath planning for freeform (wireframe) printing.
//!
//! A design is a graph of joints and beams. The planner turns it into an
//! ordered list of (beam, direction) steps that respects the process
//! constraints of a 3-axis printer extruding a material that stiffens by a
//! reversible glass transition:
//!
//! * directionality: the nozzle never runs into the beam it is printing,
//! * collision: the nozzle never runs into a beam printed earlier,
//! * connection: every beam starts at the substrate or at existing material,
//! * cantilever: no beam is fused onto a joint that a hanging beam depends on.
//!
//! Among feasible sequences it minimises the largest deflection of a freshly
//! printed beam tip under a nominal nozzle load, using a linear elastic frame
//! model ([`stiffness`]).
//!
//! Module map:
//!
//! * [`model`] designs, assembly states, stability predicates
//! * [`constraints`] nozzle geometry, precedence derivation, per-step feasibility
//! * [`stiffness`] 3D frame elements, sparse factorisation, exact and heuristic costs
//! * [`planner`] consistent-subassembly search, deadhead ordering, toolpaths
//! * [`verifier`] independent sequence checking and exhaustive oracles
//! * [`satgen`] circuit-to-design compiler producing hard instances
//! * [`io`] file formats and planner configuration
//! * [`fixtures`] small canonical designs shared by tests and benches

pub mod bitset;
pub mod constraints;
pub mod error;
pub mod fixtures;
pub mod geometry;
pub mod io;
pub mod model;
pub mod planner;
pub mod satgen;
pub mod stiffness;
pub mod verifier;

pub use bitset::BeamSet;
pub use constraints::{NozzleModel, PrecedenceSet, PrintDirection};
pub use error::{Error, Result};
pub use geometry::Vec3;
pub use model::{AssemblyState, Beam, BeamId, FrameDesign, Joint, JointId};
pub use planner::{CostMode, MachineModel, Plan, PlanStep, Toolpath};
pub use stiffness::{Material, Section};
