//! 3D Euler–Bernoulli frame element: 6 DOF per end (ux, uy, uz, rx, ry, rz).

use nalgebra::{Matrix3, SMatrix};

use super::{Material, Section};
use crate::geometry::Vec3;

pub type Mat12 = SMatrix<f64, 12, 12>;

/// Rows are the element's local x (axis), y and z directions in global
/// coordinates. Returns `None` for a zero-length segment.
pub fn local_axes(a: &Vec3, b: &Vec3) -> Option<Matrix3<f64>> {
    let axis = b - a;
    let len = axis.norm();
    if !(len > 0.0) {
        return None;
    }
    let x = axis / len;
    let reference = if x.z.abs() > 0.95 { Vec3::x() } else { Vec3::z() };
    let y = reference.cross(&x).normalize();
    let z = x.cross(&y);
    Some(Matrix3::from_rows(&[x.transpose(), y.transpose(), z.transpose()]))
}

/// Element stiffness in local axes.
pub fn local_stiffness(length: f64, material: &Material, section: &Section) -> Mat12 {
    let l = length;
    let (e, g) = (material.elastic_modulus, material.shear_modulus);
    let ea = e * section.area / l;
    let gj = g * section.torsion_constant / l;
    let ei = e * section.bending_inertia;
    let (k12, k6, k4, k2) = (12.0 * ei / l.powi(3), 6.0 * ei / l.powi(2), 4.0 * ei / l, 2.0 * ei / l);

    let mut k = Mat12::zeros();
    let mut set = |i: usize, j: usize, v: f64| {
        k[(i, j)] = v;
        k[(j, i)] = v;
    };
    set(0, 0, ea);
    set(0, 6, -ea);
    set(6, 6, ea);
    set(3, 3, gj);
    set(3, 9, -gj);
    set(9, 9, gj);
    // bending in the local x-y plane (about z)
    set(1, 1, k12);
    set(1, 5, k6);
    set(1, 7, -k12);
    set(1, 11, k6);
    set(5, 5, k4);
    set(5, 7, -k6);
    set(5, 11, k2);
    set(7, 7, k12);
    set(7, 11, -k6);
    set(11, 11, k4);
    // bending in the local x-z plane (about y)
    set(2, 2, k12);
    set(2, 4, -k6);
    set(2, 8, -k12);
    set(2, 10, -k6);
    set(4, 4, k4);
    set(4, 8, k6);
    set(4, 10, k2);
    set(8, 8, k12);
    set(8, 10, k6);
    set(10, 10, k4);
    k
}

/// Block-diagonal transform from global to local DOFs.
pub fn transform(r: &Matrix3<f64>) -> Mat12 {
    let mut t = Mat12::zeros();
    for blk in 0..4 {
        t.fixed_view_mut::<3, 3>(3 * blk, 3 * blk).copy_from(r);
    }
    t
}

/// Element stiffness of the straight segment `a`–`b` in global coordinates.
/// `None` for a zero-length segment.
pub fn element_stiffness(a: &Vec3, b: &Vec3, material: &Material, section: &Section) -> Option<Mat12> {
    let r = local_axes(a, b)?;
    let t = transform(&r);
    let k = local_stiffness((b - a).norm(), material, section);
    Some(t.transpose() * k * t)
}
