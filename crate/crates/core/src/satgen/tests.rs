use super::*;
use crate::constraints::{collision_precedence, derive_constraints, NozzleModel};
use crate::error::Error;
use crate::verifier::{brute_force_plan_with_limit, verify_sequence};

fn circuit(text: &str) -> Circuit {
    Circuit::parse(&text.replace(';', "\n")).unwrap()
}

fn compiled(text: &str) -> CompiledCircuit {
    compile_circuit(&insert_splitters(&circuit(text)).unwrap()).unwrap()
}

/// Derived collision pairs, by name, against the intended ones.
fn pair_mismatch(cc: &CompiledCircuit) -> (Vec<(String, String)>, Vec<(String, String)>) {
    let d = &cc.design;
    let (pairs, defects) = collision_precedence(d, &NozzleModel::default());
    assert!(defects.is_empty(), "{defects:?}");
    let name = |p: &(crate::model::BeamId, crate::model::BeamId)| (d.beam(p.0).name.clone(), d.beam(p.1).name.clone());
    let extra = pairs.iter().filter(|p| !cc.intended_order.contains(p)).map(name).collect();
    let missing = cc.intended_order.iter().filter(|p| !pairs.contains(p)).map(name).collect();
    (extra, missing)
}

const SOUTH: &str = "INPUT i0;g0 = NOR(i0, i0);g1 = NOR(i0, i0);g2 = NOR(g0, i0);OUTPUT g2";
const CROSSING: &str = "INPUT i0;g0 = NOR(i0, i0);g1 = NOR(i0, i0);g2 = NOR(i0, g0);g3 = NOR(g2, g1);OUTPUT g3";

#[test]
fn single_nor_produces_exactly_the_intended_pairs() {
    let cc = compiled("INPUT a, b;OUTPUT w;w = NOR(a, b)");
    assert_eq!(cc.gadgets.len(), 1);
    assert_eq!(cc.design.beam_count(), 12);
    let (extra, missing) = pair_mismatch(&cc);
    assert!(extra.is_empty() && missing.is_empty(), "{extra:?} {missing:?}");
}

#[test]
fn south_wires_wait_for_the_magentas_they_span() {
    let cc = compiled(SOUTH);
    let south: Vec<&String> = cc
        .layout
        .sides
        .iter()
        .filter(|(w, s)| **s == Side::South && **w != cc.circuit.output)
        .map(|(w, _)| w)
        .collect();
    assert!(!south.is_empty());
    let magentas: Vec<_> = cc.gadgets.iter().map(|g| g.magenta).collect();
    for w in south {
        let beam = cc.wires[w];
        assert!(cc.intended_order.iter().any(|(a, b)| *b == beam && magentas.contains(a)), "{w}");
    }
    let (extra, missing) = pair_mismatch(&cc);
    assert!(extra.is_empty() && missing.is_empty(), "{extra:?} {missing:?}");
}

#[test]
fn output_wire_is_south_and_precedes_the_output_beam() {
    let cc = compiled(SOUTH);
    assert_eq!(cc.layout.sides[&cc.circuit.output], Side::South);
    assert!(cc.intended_order.contains(&(cc.wires[&cc.circuit.output], cc.output_beam)));
    for g in &cc.gadgets {
        assert!(cc.intended_order.contains(&(g.magenta, cc.output_beam)));
        assert!(cc.intended_order.contains(&(cc.output_beam, g.spine)));
    }
}

#[test]
fn compile_rejects_bad_circuits() {
    let fan_out = circuit("INPUT a;OUTPUT w;v = NOR(a, a);w = NOR(v, v)");
    assert!(matches!(compile_circuit(&fan_out), Err(Error::Circuit(_))));
    let passthrough = circuit("INPUT a;OUTPUT a;v = NOR(a, a)");
    assert!(matches!(compile_circuit(&passthrough), Err(Error::Circuit(_))));
}

#[test]
fn crossing_wires_need_planarizing() {
    let c = circuit(CROSSING);
    let err = compile_circuit(&insert_splitters(&c).unwrap()).unwrap_err();
    assert!(matches!(err, Error::Layout { .. }), "{err}");
    let p = planarize(&c).unwrap();
    assert!(p.gates.len() > c.gates.len() + 12);
    assert_eq!(p.truth_table().unwrap(), c.truth_table().unwrap());
    let cc = compile_circuit(&p).unwrap();
    assert_eq!(cc.wires.len(), p.all_wires().len());
}

#[test]
fn planarize_keeps_routable_circuits() {
    let c = circuit("INPUT i0, i1;g0 = NOR(i0, i1);g1 = NOR(g0, i0);OUTPUT g1");
    assert_eq!(planarize(&c).unwrap(), insert_splitters(&c).unwrap());
}

#[test]
fn crossover_carries_both_values_across() {
    let mut gates = crossover("a", "b", "a2", "b2", "x.");
    gates.push(Gate::nor("a2", "b2", "o"));
    let c = Circuit { inputs: vec!["a".into(), "b".into()], gates, output: "o".into() };
    for bits in 0..4u32 {
        let (a, b) = (bits & 1 == 1, bits & 2 == 2);
        let v = c.evaluate(&[a, b]).unwrap();
        assert_eq!((v["a2"], v["b2"]), (a, b));
    }
    let cc = compile_circuit(&insert_splitters(&c).unwrap()).unwrap();
    assert!(cc.layout.sides.iter().any(|(w, s)| *s == Side::South && *w != "o"));
}

fn constructable(cc: &CompiledCircuit) -> bool {
    let prec = derive_constraints(&cc.design, &NozzleModel::default()).unwrap();
    let plan = brute_force_plan_with_limit(&cc.design, &prec, 64).unwrap();
    if let Some(seq) = &plan {
        assert!(verify_sequence(&cc.design, seq, &prec).is_empty());
    }
    plan.is_some()
}

#[test]
fn satisfiable_nor_is_constructable() {
    assert!(constructable(&compiled("INPUT a, b;OUTPUT w;w = NOR(a, b)")));
    assert!(constructable(&compiled("INPUT a;OUTPUT w;w = NOR(a, a)")));
}

#[test]
fn contradiction_is_not_constructable() {
    // x NOR (x NOR x) is false for both values of x.
    let text = "INPUT x;OUTPUT w;n = NOR(x, x);w = NOR(x, n)";
    assert!(!circuit(text).is_satisfiable().unwrap());
    assert!(!constructable(&compiled(text)));
}

#[test]
fn planarize_drops_gates_the_output_never_reads() {
    let c = circuit(
        "INPUT i0, i1;g0 = NOR(i0, i1);g1 = NOR(g0, i0);g2 = NOR(i0, g0);g3 = NOR(i0, g0);g4 = NOR(g1, i0);OUTPUT g4",
    );
    let p = planarize(&c).unwrap();
    assert!(p.all_wires().iter().all(|w| !w.starts_with("g2") && !w.starts_with("g3")));
    assert_eq!(p.truth_table().unwrap(), c.truth_table().unwrap());
    assert!(compile_circuit(&p).is_ok());
}
