use super::*;
use crate::fixtures;
use crate::model::FrameDesign;

fn model() -> StiffnessModel {
    StiffnessModel::default()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

/// Deflection of a straight cantilever of length `l` inclined at `theta`
/// from horizontal under a vertical tip force: bending and axial parts.
fn inclined_oracle(l: f64, theta: f64, d: f64, f: f64) -> f64 {
    let m = Material::default();
    let s = Section::circular(d);
    let bend = f * theta.cos() * l.powi(3) / (3.0 * m.elastic_modulus * s.bending_inertia);
    let axial = f * theta.sin() * l / (m.elastic_modulus * s.area);
    bend.hypot(axial)
}

fn first_beam_cost(design: &FrameDesign) -> f64 {
    let state = AssemblyState::empty(design);
    exact_cost(&state, BeamId(0), PrintDirection::Forward, &model()).unwrap()
}

#[test]
fn horizontal_cantilever_matches_beam_theory() {
    let d = fixtures::straight_cantilever(Vec3::x(), 10.0, 0.15);
    let got = first_beam_cost(&d);
    assert!(rel(got, inclined_oracle(10.0, 0.0, 0.15, 1e-4)) < 1e-6);
}

#[test]
fn vertical_column_is_axial() {
    let d = fixtures::straight_cantilever(Vec3::z(), 7.0, 0.2);
    let got = first_beam_cost(&d);
    let expected = 1e-4 * 7.0 / (2600.0 * Section::circular(0.2).area);
    assert!(rel(got, expected) < 1e-6);
}

#[test]
fn inclined_cantilever() {
    let theta: f64 = 0.6;
    let dir = Vec3::new(theta.cos() * 0.6, theta.cos() * 0.8, theta.sin());
    let d = fixtures::straight_cantilever(dir, 5.0, 0.15);
    let got = first_beam_cost(&d);
    assert!(rel(got, inclined_oracle(5.0, theta, 0.15, 1e-4)) < 1e-6);
}

#[test]
fn torsion_closed_form() {
    let d = fixtures::straight_cantilever(Vec3::y(), 4.0, 0.15);
    let state = AssemblyState::full(&d);
    let sys = assemble_system(&state, None, &model()).unwrap();
    let tip = NodeKey::Joint(d.joint_by_name("tip").unwrap());
    let t = 1e-3;
    let field =
        solve_deflections(&sys, &[LoadCase { node: tip, force: Vec3::zeros(), moment: Vec3::y() * t }]).unwrap();
    let twist = field.rotation(tip).unwrap();
    let expected = t * 4.0 / (1100.0 * Section::circular(0.15).torsion_constant);
    assert!(rel(twist.y, expected) < 1e-6);
    assert!(twist.x.abs() + twist.z.abs() < 1e-9 * expected);
    assert!(field.residual() < 1e-10);
}

#[test]
fn subdivided_path_matches_straight_beam() {
    let mut b = crate::model::DesignBuilder::new(0.15);
    let g = b.ground("g", 0.0, 0.0);
    let t = b.joint("t", Vec3::new(6.0, 0.0, 2.0));
    b.beam_via("bent", g, t, &[Vec3::new(2.0, 0.0, 2.0 / 3.0), Vec3::new(4.0, 0.0, 4.0 / 3.0)]);
    let d = b.build().unwrap();
    let got = first_beam_cost(&d);
    let l = 40f64.sqrt();
    assert!(rel(got, inclined_oracle(l, (2.0f64 / 6.0).atan(), 0.15, 1e-4)) < 1e-6);
}

#[test]
fn coincident_tip_stays_unattached() {
    // The second arch leg ends on the apex already held by the first leg, but
    // while printing its tip is free.
    let d = fixtures::loop_arch();
    let l1 = d.beam_by_name("l1").unwrap();
    let l2 = d.beam_by_name("l2").unwrap();
    let state = AssemblyState::from_beams(&d, [l1]);
    let dir = PrintDirection::starting_at(d.beam(l2), d.joint_by_name("g2").unwrap()).unwrap();
    let got = exact_cost(&state, l2, dir, &model()).unwrap();
    let expected = inclined_oracle(32f64.sqrt(), std::f64::consts::FRAC_PI_4, 0.15, 1e-4);
    assert!(rel(got, expected) < 1e-6);
    let h = heuristic_cost(&state, &[], l2, dir, &model()).unwrap();
    assert!(rel(h, got) < 1e-9);
}

#[test]
fn floating_component_is_rejected() {
    let d = fixtures::chain3();
    let c2 = d.beam_by_name("c2").unwrap();
    let state = AssemblyState::from_beams(&d, [c2]);
    let err = assemble_system(&state, None, &model()).unwrap_err();
    assert!(matches!(err, Error::Floating(ref js) if js.len() == 2), "{err}");
}

#[test]
fn load_must_hit_a_node() {
    let d = fixtures::chain3();
    let state = AssemblyState::from_beams(&d, [BeamId(0)]);
    let sys = assemble_system(&state, None, &model()).unwrap();
    let err = solve_deflections(&sys, &[LoadCase::force(NodeKey::Tip, Vec3::z())]).unwrap_err();
    assert!(matches!(err, Error::LoadNotInSystem(_)));
}

#[test]
fn chain_heuristic_equals_exact_when_chain_is_everything() {
    let d = fixtures::chain3();
    let (c1, c2, c3) = (BeamId(0), BeamId(1), BeamId(2));
    let state = AssemblyState::from_beams(&d, [c1, c2]);
    let path = cantilever_path(&state, d.beam(c3).p).unwrap();
    assert_eq!(path.iter().map(|s| s.0).collect::<Vec<_>>(), vec![c1, c2]);
    let h = heuristic_cost(&state, &path, c3, PrintDirection::Forward, &model()).unwrap();
    let e = exact_cost(&state, c3, PrintDirection::Forward, &model()).unwrap();
    assert!(rel(h, e) < 1e-9, "{h} vs {e}");
}

#[test]
fn heuristic_rejects_bad_paths() {
    let d = fixtures::chain3();
    let (c1, c2, c3) = (BeamId(0), BeamId(1), BeamId(2));
    let state = AssemblyState::from_beams(&d, [c1, c2]);
    let m = model();
    assert!(matches!(
        heuristic_cost(&state, &[(c2, PrintDirection::Forward)], c3, PrintDirection::Forward, &m),
        Err(Error::InvalidPath(_))
    ));
    assert!(matches!(
        heuristic_cost(&state, &[(c1, PrintDirection::Forward)], c3, PrintDirection::Forward, &m),
        Err(Error::InvalidPath(_))
    ));
}

#[test]
fn root_compliance_route_matches_full_assembly() {
    // fig6: arch of four spans; hang a beam from the stable apex a2.
    let d = fixtures::fig6();
    let names = ["s1", "s2", "s3", "s4", "u1"];
    let placed: Vec<BeamId> = names.iter().map(|n| d.beam_by_name(n).unwrap()).collect();
    let state = AssemblyState::from_beams(&d, placed.iter().copied().take(4));
    let u1 = placed[4];
    let a1 = d.joint_by_name("a1").unwrap();
    let dir = PrintDirection::starting_at(d.beam(u1), a1).unwrap();
    let exact = exact_cost(&state, u1, dir, &model()).unwrap();
    let c = joint_compliance(&state, a1, &model()).unwrap();
    let chain = [ChainSegment { path: dir.oriented_path(d.beam(u1)), section: Section::circular(0.15) }];
    let fast = cost_through_root(&c, &chain, &model()).unwrap();
    assert!(rel(fast, exact) < 1e-8, "{fast} vs {exact}");
    // The structure adds compliance beyond the clamped-root chain.
    let h = heuristic_cost(&state, &[], u1, dir, &model()).unwrap();
    assert!(h < exact);
}

#[test]
fn residual_is_tiny_on_a_lattice() {
    let d = fixtures::lattice(4, 4, 2, 4.0);
    let state = AssemblyState::full(&d);
    let sys = assemble_system(&state, None, &model()).unwrap();
    let top = d.joints().iter().enumerate().max_by(|a, b| a.1.position.z.total_cmp(&b.1.position.z)).unwrap().0;
    let field =
        solve_deflections(&sys, &[LoadCase::force(NodeKey::Joint(JointId(top)), Vec3::new(0.0, 0.0, -1e-4))]).unwrap();
    assert!(field.residual() < 1e-9);
}
