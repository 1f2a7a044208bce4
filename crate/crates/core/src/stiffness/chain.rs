//! Serial chain clamped at its root, solved by block-tridiagonal elimination.

use nalgebra::{Matrix6, Vector6};

use super::element::element_stiffness;
use super::{Material, Section};
use crate::error::{Error, Result};
use crate::geometry::Vec3;

/// One beam of a chain; `path` starts where the previous segment ended.
#[derive(Debug, Clone)]
pub struct ChainSegment {
    pub path: Vec<Vec3>,
    pub section: Section,
}

/// Translation of the chain's last vertex under `force` applied there, with
/// the first vertex clamped.
pub fn chain_tip_translation(segments: &[ChainSegment], material: &Material, force: &Vec3) -> Result<Vec3> {
    // Elements in order; element i joins chain node i and i + 1 (node 0 clamped).
    let mut elements = Vec::new();
    for seg in segments {
        for w in seg.path.windows(2) {
            let k = element_stiffness(&w[0], &w[1], material, &seg.section)
                .ok_or_else(|| Error::InvalidPath("zero-length segment in chain".into()))?;
            elements.push(k);
        }
    }
    if elements.is_empty() {
        return Err(Error::InvalidPath("empty chain".into()));
    }
    // Schur complement sweep from the root toward the tip. With the only load
    // at the tip, the tip response is the inverse of the final block applied
    // to the load.
    let mut carried: Option<Matrix6<f64>> = None;
    for (i, k) in elements.iter().enumerate() {
        let near = k.fixed_view::<6, 6>(0, 0).into_owned();
        let coupling = k.fixed_view::<6, 6>(0, 6).into_owned();
        let far = k.fixed_view::<6, 6>(6, 6).into_owned();
        let d = match carried {
            // Node i is clamped only for i = 0.
            None => far,
            Some(prev) => {
                let block = prev + near;
                let chol = block.cholesky().ok_or_else(|| Error::Singular(format!("chain node {i}")))?;
                far - coupling.transpose() * chol.solve(&coupling)
            }
        };
        carried = Some(d);
    }
    let tip = carried.expect("non-empty chain");
    let chol = tip.cholesky().ok_or_else(|| Error::Singular("chain tip".into()))?;
    let mut f = Vector6::zeros();
    f.fixed_rows_mut::<3>(0).copy_from(force);
    let x = chol.solve(&f);
    Ok(x.fixed_rows::<3>(0).into())
}
