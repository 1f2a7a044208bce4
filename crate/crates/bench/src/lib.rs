//! Shared inputs for the planning benchmarks.

use frameseq::constraints::{derive_constraints, NozzleModel};
use frameseq::{fixtures, FrameDesign, PrecedenceSet};

/// Regular lattice with its derived constraints.
pub fn lattice(nx: usize, ny: usize, layers: usize) -> (FrameDesign, PrecedenceSet) {
    let d = fixtures::lattice(nx, ny, layers, 4.0);
    let prec = derive_constraints(&d, &NozzleModel::default()).expect("lattice is constructable");
    (d, prec)
}
