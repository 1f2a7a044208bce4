use approx::assert_relative_eq;

use super::*;
use crate::constraints::{derive_constraints, NozzleModel};
use crate::fixtures;
use crate::geometry::Vec3;
use crate::model::JointId;
use crate::stiffness::{Material, Section};
use crate::verifier::verify_sequence;

fn planned(design: &FrameDesign, mode: CostMode) -> (PrecedenceSet, Plan) {
    let prec = derive_constraints(design, &NozzleModel::default()).unwrap();
    let options = PlannerOptions { cost_mode: mode, ..PlannerOptions::default() };
    let plan = plan(design, &prec, &options).unwrap();
    (prec, plan)
}

fn names(design: &FrameDesign, plan: &Plan) -> Vec<String> {
    plan.steps.iter().map(|s| design.beam(s.beam).name.clone()).collect()
}

/// Tip compliance of a straight cantilever under a unit-free transverse and
/// axial split of the load.
fn cantilever_tip(a: Vec3, b: Vec3, force: f64) -> f64 {
    let m = Material::default();
    let s = Section::circular(fixtures::DIAMETER);
    let d = b - a;
    let l = d.norm();
    let sin = (d.x * d.x + d.y * d.y).sqrt() / l;
    let cos = d.z / l;
    let transverse = force * sin * l.powi(3) / (3.0 * m.elastic_modulus * s.bending_inertia);
    let axial = force * cos * l / (m.elastic_modulus * s.area);
    (transverse * transverse + axial * axial).sqrt()
}

#[test]
fn tripod_legs_go_bottom_up_and_cost_their_own_cantilever() {
    let d = fixtures::tripod();
    let (prec, plan) = planned(&d, CostMode::Exact);
    assert_eq!(plan.steps.len(), 3);
    let apex = d.joint_by_name("apex").unwrap();
    let mut expected = 0.0f64;
    for s in &plan.steps {
        let beam = d.beam(s.beam);
        assert_eq!(s.direction.end(beam), apex);
        let foot = d.joint(s.direction.start(beam)).position;
        let c = cantilever_tip(foot, d.joint(apex).position, 1e-4);
        assert_relative_eq!(s.cost, c, max_relative = 1e-6);
        expected = expected.max(c);
    }
    assert_relative_eq!(plan.max_cost, expected, max_relative = 1e-6);
    assert!(verify_sequence(&d, &plan.sequence(), &prec).is_empty());
}

#[test]
fn max_cost_is_largest_step_cost() {
    for d in [fixtures::chain3(), fixtures::fig6(), fixtures::fig2(), fixtures::two_chains()] {
        let (_, plan) = planned(&d, CostMode::Exact);
        let m = plan.step_costs().into_iter().fold(0.0, f64::max);
        assert_eq!(plan.max_cost, m);
    }
}

#[test]
fn fixture_plans_verify_in_both_modes() {
    for d in [
        fixtures::tripod(),
        fixtures::chain3(),
        fixtures::loop_arch(),
        fixtures::two_chains(),
        fixtures::fig2(),
        fixtures::fig2_double(),
        fixtures::fig4(),
        fixtures::fig6(),
    ] {
        for mode in [CostMode::Exact, CostMode::Heuristic] {
            let (prec, plan) = planned(&d, mode);
            assert_eq!(plan.steps.len(), d.beam_count());
            let v = verify_sequence(&d, &plan.sequence(), &prec);
            assert!(v.is_empty(), "{mode}: {v:?}");
        }
    }
}

#[test]
fn fig6_starts_with_the_whole_lower_arch() {
    let d = fixtures::fig6();
    let (_, plan) = planned(&d, CostMode::Exact);
    let first = &plan.units[0];
    assert_eq!(first.kind, UnitKind::Paths);
    let mut beams: Vec<String> = first.beams.iter().map(|b| d.beam(*b).name.clone()).collect();
    beams.sort();
    assert_eq!(beams, ["s1", "s2", "s3", "s4"]);
    // Both halves grow away from their grounded roots.
    let g1 = d.joint_by_name("g1").unwrap();
    let g2 = d.joint_by_name("g2").unwrap();
    let s1 = plan.steps.iter().find(|s| d.beam(s.beam).name == "s1").unwrap();
    let s4 = plan.steps.iter().find(|s| d.beam(s.beam).name == "s4").unwrap();
    assert_eq!(s1.direction.start(d.beam(s1.beam)), g1);
    assert_eq!(s4.direction.start(d.beam(s4.beam)), g2);
}

#[test]
fn fig4_bridge_leaves_from_the_post() {
    let d = fixtures::fig4();
    let (_, plan) = planned(&d, CostMode::Exact);
    let r = d.joint_by_name("R").unwrap();
    let bridge = plan.steps.iter().find(|s| d.beam(s.beam).name == "bridge").unwrap();
    assert_eq!(bridge.direction.start(d.beam(bridge.beam)), r);
}

#[test]
fn recorded_order_follows_components() {
    let d = fixtures::two_chains();
    let (_, plan) = planned(&d, CostMode::Exact);
    let names = names(&d, &plan);
    let mut pairs: Vec<(String, String)> =
        plan.partial_order.iter().map(|(a, b)| (d.beam(*a).name.clone(), d.beam(*b).name.clone())).collect();
    pairs.sort();
    assert_eq!(pairs, [("a0".to_string(), "c0".to_string()), ("a1".to_string(), "c1".to_string())], "{names:?}");
}

#[test]
fn closing_beam_follows_both_components() {
    let d = fixtures::loop_arch();
    let steps = vec![
        PlanStep { beam: BeamId(0), direction: PrintDirection::Forward, cost: 0.0 },
        PlanStep { beam: BeamId(1), direction: PrintDirection::Forward, cost: 0.0 },
    ];
    assert_eq!(record_constraints(&d, &steps), [(BeamId(0), BeamId(1))]);
    let t = fixtures::tripod();
    let steps: Vec<PlanStep> =
        (0..3).map(|i| PlanStep { beam: BeamId(i), direction: PrintDirection::Forward, cost: 0.0 }).collect();
    assert_eq!(record_constraints(&t, &steps), [(BeamId(0), BeamId(1)), (BeamId(1), BeamId(2))]);
}

#[test]
fn planning_is_deterministic() {
    let d = fixtures::random_frame(7, 3, 3, 2);
    let (_, a) = planned(&d, CostMode::Exact);
    let (_, b) = planned(&d, CostMode::Exact);
    assert_eq!(a, b);
}

#[test]
fn cost_mode_text_round_trips() {
    for m in [CostMode::Exact, CostMode::Heuristic] {
        assert_eq!(m.to_string().parse::<CostMode>().unwrap(), m);
    }
    assert!("fast".parse::<CostMode>().is_err());
}

#[test]
fn deadhead_formula_cases() {
    let d = fixtures::two_chains();
    let empty = AssemblyState::empty(&d);
    let m = MachineModel { z_clearance: 1.0, ..MachineModel::default() };
    // Already above the travel height: only the x leg counts.
    let a = Vec3::new(0.0, 0.0, 2.0);
    let b = Vec3::new(10.0, 0.0, 2.0);
    assert_relative_eq!(deadhead_time(&a, &b, &empty, &m), 0.2, epsilon = 1e-12);
    // Same point below the travel height: raise and lower.
    let p = Vec3::new(1.0, 1.0, 0.0);
    assert_relative_eq!(deadhead_time(&p, &p, &empty, &m), 2.0 * 1.0 / 20.0, epsilon = 1e-12);
    let tall = AssemblyState::from_beams(&d, [BeamId(1)]);
    assert!(deadhead_time(&p, &p, &tall, &m) > deadhead_time(&p, &p, &empty, &m));
    let slow_y = MachineModel { axis_max_speed: Vec3::new(50.0, 10.0, 20.0), ..m };
    let c = Vec3::new(5.0, 5.0, 2.0);
    assert_relative_eq!(deadhead_time(&a, &c, &empty, &slow_y), 0.5, epsilon = 1e-12);
}

#[test]
fn deadhead_ordering_keeps_costs_and_prefers_continuing() {
    let d = fixtures::two_chains();
    let prec = derive_constraints(&d, &NozzleModel::default()).unwrap();
    let step = |i: usize, c: f64| PlanStep { beam: BeamId(i), direction: PrintDirection::Forward, cost: c };
    // Interleaved input: a0 a1 c0 c1.
    let input = Plan {
        steps: vec![step(0, 1.0), step(2, 2.0), step(1, 3.0), step(3, 4.0)],
        partial_order: vec![(BeamId(0), BeamId(1)), (BeamId(2), BeamId(3))],
        max_cost: 4.0,
        cost_mode: CostMode::Exact,
        units: Vec::new(),
    };
    let out = order_for_deadheading(&d, &prec, &input, &MachineModel::default());
    let order: Vec<usize> = out.steps.iter().map(|s| s.beam.0).collect();
    assert_eq!(order, [0, 1, 2, 3]);
    assert_eq!(out.max_cost, input.max_cost);
    for s in &out.steps {
        let orig = input.steps.iter().find(|x| x.beam == s.beam).unwrap();
        assert_eq!(s, orig);
    }
}

#[test]
fn forced_order_is_unchanged_by_deadheading() {
    let d = fixtures::chain3();
    let (prec, plan) = planned(&d, CostMode::Exact);
    let out = order_for_deadheading(&d, &prec, &plan, &MachineModel::default());
    assert_eq!(out, plan);
}

#[test]
fn toolpath_for_a_single_beam() {
    let d = fixtures::straight_cantilever(Vec3::new(1.0, 0.0, 1.0), 5.0, 0.15);
    let (_, plan) = planned(&d, CostMode::Exact);
    let m = MachineModel::default();
    let tp = emit_toolpath(&d, &plan, &m);
    assert!(matches!(tp.moves[0], Move::Travel { .. }));
    assert!(matches!(tp.moves[1], Move::Print { .. }));
    assert!(matches!(tp.moves[2], Move::Dwell { joint: JointId(1), .. }));
    assert_eq!(tp.moves.len(), 3);
    assert_relative_eq!(tp.print_time(), 5.0 / 0.4, max_relative = 1e-12);
    assert_relative_eq!(tp.dwell_time(), 0.5);
}

#[test]
fn tripod_toolpath_prints_three_times() {
    let d = fixtures::tripod();
    let (_, plan) = planned(&d, CostMode::Exact);
    let m = MachineModel::default();
    let tp = emit_toolpath(&d, &plan, &m);
    let prints = tp.moves.iter().filter(|x| matches!(x, Move::Print { .. })).count();
    assert_eq!(prints, 3);
    let total: f64 = d.beams().iter().map(|b| b.length()).sum();
    assert_relative_eq!(tp.print_time(), total / m.print_speed, max_relative = 1e-12);
    for mv in &tp.moves {
        if let Move::Travel { from, to, z } = mv {
            assert!(*z >= from.z.min(to.z));
        }
    }
    let g = tp.to_gcode(&d, &m);
    assert_eq!(g.matches("G1 ").count(), 3);
    assert_eq!(g.matches("G4 S0.500000").count(), 3);
    assert!(g.contains("; step 0 beam "));
}
