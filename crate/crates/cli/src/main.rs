use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use serde_json::json;

use frameseq::constraints::derive_constraints;
use frameseq::io::{design_to_json, load_design, load_plan, save_plan, PlannerConfig, Report};
use frameseq::planner::{emit_toolpath, order_for_deadheading, plan};
use frameseq::satgen::{compile_circuit, planarize, Circuit};
use frameseq::stiffness::exact_cost;
use frameseq::verifier::{brute_force_minmax_with_limit, brute_force_plan_with_limit, verify_sequence};
use frameseq::{CostMode, Error, FrameDesign};

#[derive(Parser)]
#[command(name = "frameseq", version, about = "Sequence and toolpath planning for wireframe printing")]
struct Cli {
    /// Print results and errors as JSON on stdout.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Plan a design and write plan.json, toolpath.gcode and report.json.
    Plan {
        design: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        cost: Option<CostMode>,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Check a plan against a design; exit 1 on any violation.
    Verify {
        design: PathBuf,
        plan: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Compile a NOR/SPLIT netlist into a design.
    Satgen {
        netlist: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Fail on crossing wires instead of inserting crossovers.
        #[arg(long)]
        no_planarize: bool,
    },
    /// Exhaustive sequence search for small designs.
    Oracle {
        design: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Minimise the largest exact step cost instead of finding any sequence.
        #[arg(long)]
        minmax: bool,
        /// Largest design the search accepts [default: 64, or 20 with --minmax].
        #[arg(long)]
        limit: Option<usize>,
    },
    /// Counts and derived constraints of a design.
    Stats {
        design: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

/// A finished command: what to print and the exit code.
struct Outcome {
    code: u8,
    text: String,
    json: serde_json::Value,
}

impl Outcome {
    fn ok(text: String, json: serde_json::Value) -> Self {
        Outcome { code: 0, text, json }
    }
}

fn read(path: &Path) -> anyhow::Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn config(path: Option<&Path>) -> anyhow::Result<PlannerConfig> {
    match path {
        Some(p) => Ok(PlannerConfig::from_json(&read(p)?)?),
        None => Ok(PlannerConfig::default()),
    }
}

fn design(path: &Path, config: &PlannerConfig) -> anyhow::Result<FrameDesign> {
    load_design(&read(path)?, config.diameter).with_context(|| format!("loading {}", path.display()))
}

fn name(d: &FrameDesign, b: frameseq::BeamId) -> String {
    d.beam(b).name.clone()
}

fn unconstructable(e: &Error) -> bool {
    matches!(e, Error::Unconstructable(_) | Error::NoConsistentSubassembly(_))
}

fn run_plan(
    design_path: &Path,
    config_path: Option<&Path>,
    cost: Option<CostMode>,
    out: &Path,
    seed: Option<u64>,
) -> anyhow::Result<Outcome> {
    let mut cfg = config(config_path)?;
    if let Some(c) = cost {
        cfg.cost_mode = c;
    }
    if let Some(s) = seed {
        cfg.tie_break_seed = s;
    }
    cfg.validate()?;
    let d = design(design_path, &cfg)?;
    let planned =
        derive_constraints(&d, &cfg.nozzle).and_then(|prec| plan(&d, &prec, &cfg.planner_options()).map(|p| (prec, p)));
    let (prec, p) = match planned {
        Ok(x) => x,
        Err(e) if unconstructable(&e) => {
            return Ok(Outcome {
                code: 2,
                text: format!("unconstructable: {e}"),
                json: json!({"unconstructable": e.to_string()}),
            })
        }
        Err(e) => return Err(e.into()),
    };
    let p = order_for_deadheading(&d, &prec, &p, &cfg.machine);
    let toolpath = emit_toolpath(&d, &p, &cfg.machine);
    let report = Report::new(&d, &p, &toolpath, &cfg);
    save_plan(out, &d, &p, &toolpath, &report, &cfg.machine)?;
    let text = format!(
        "planned {} beams ({} mode), max cost {:.6e}; wrote {}",
        p.steps.len(),
        p.cost_mode,
        p.max_cost,
        out.display()
    );
    Ok(Outcome::ok(text, json!({"beams": p.steps.len(), "cost_mode": p.cost_mode, "max_cost": p.max_cost, "out": out})))
}

fn run_verify(design_path: &Path, plan_path: &Path, config_path: Option<&Path>) -> anyhow::Result<Outcome> {
    let cfg = config(config_path)?;
    let d = design(design_path, &cfg)?;
    let p = load_plan(&d, &read(plan_path)?)?;
    let prec = derive_constraints(&d, &cfg.nozzle)?;
    let violations = verify_sequence(&d, &p.sequence(), &prec);
    if violations.is_empty() {
        return Ok(Outcome::ok(format!("ok: {} steps", p.steps.len()), json!({"violations": []})));
    }
    let text = violations.iter().map(|v| format!("{v} ({})", name(&d, v.beam))).collect::<Vec<_>>().join("\n");
    Ok(Outcome { code: 1, text, json: json!({ "violations": violations }) })
}

fn run_satgen(netlist: &Path, out: &Path, no_planarize: bool) -> anyhow::Result<Outcome> {
    let circuit = Circuit::parse(&read(netlist)?)?;
    let normal = if no_planarize { frameseq::satgen::insert_splitters(&circuit)? } else { planarize(&circuit)? };
    let cc = compile_circuit(&normal)?;
    fs::write(out, design_to_json(&cc.design)?).with_context(|| format!("writing {}", out.display()))?;
    let sat = circuit.is_satisfiable().ok();
    let text = format!(
        "{} gadgets, {} beams, {} joints; satisfiable: {}; wrote {}",
        cc.gadgets.len(),
        cc.design.beam_count(),
        cc.design.joint_count(),
        sat.map_or("unknown".to_string(), |s| s.to_string()),
        out.display()
    );
    let json = json!({
        "gadgets": cc.gadgets.len(),
        "beams": cc.design.beam_count(),
        "joints": cc.design.joint_count(),
        "satisfiable": sat,
        "output_beam": name(&cc.design, cc.output_beam),
    });
    Ok(Outcome::ok(text, json))
}

fn run_oracle(
    design_path: &Path,
    config_path: Option<&Path>,
    minmax: bool,
    limit: Option<usize>,
) -> anyhow::Result<Outcome> {
    let cfg = config(config_path)?;
    let d = design(design_path, &cfg)?;
    let prec = match derive_constraints(&d, &cfg.nozzle) {
        Ok(p) => p,
        Err(e) if unconstructable(&e) => {
            return Ok(Outcome {
                code: 2,
                text: format!("unconstructable: {e}"),
                json: json!({"unconstructable": e.to_string()}),
            })
        }
        Err(e) => return Err(e.into()),
    };
    let steps = |seq: &[(frameseq::BeamId, frameseq::PrintDirection)]| -> Vec<serde_json::Value> {
        seq.iter().map(|(b, dir)| json!({"beam": name(&d, *b), "direction": dir})).collect()
    };
    let none = || Outcome {
        code: 2,
        text: "unconstructable: no feasible sequence".into(),
        json: json!({"unconstructable": "no feasible sequence"}),
    };
    if minmax {
        let model = cfg.stiffness();
        let r =
            brute_force_minmax_with_limit(&d, &prec, |s, b, dir| exact_cost(s, b, dir, &model), limit.unwrap_or(20))?;
        let Some(r) = r else { return Ok(none()) };
        let text = format!("optimal max cost {:.6e} over {} steps", r.max_cost, r.sequence.len());
        return Ok(Outcome::ok(text, json!({"max_cost": r.max_cost, "sequence": steps(&r.sequence)})));
    }
    let Some(seq) = brute_force_plan_with_limit(&d, &prec, limit.unwrap_or(64))? else { return Ok(none()) };
    let text = seq.iter().map(|(b, dir)| format!("{} {dir}", name(&d, *b))).collect::<Vec<_>>().join("\n");
    Ok(Outcome::ok(text, json!({ "sequence": steps(&seq) })))
}

fn run_stats(design_path: &Path, config_path: Option<&Path>) -> anyhow::Result<Outcome> {
    let cfg = config(config_path)?;
    let d = design(design_path, &cfg)?;
    let grounded = d.joints().iter().filter(|j| j.grounded).count();
    let (pairs, one_way, defects) = match derive_constraints(&d, &cfg.nozzle) {
        Ok(prec) => {
            let pairs: usize = d.beam_ids().map(|b| prec.predecessors(b).len()).sum();
            let one_way: Vec<String> =
                d.beam_ids().filter(|b| prec.allowed(*b).iter().count() == 1).map(|b| name(&d, b)).collect();
            (pairs, one_way, Vec::new())
        }
        Err(Error::Unconstructable(defects)) => (0, Vec::new(), defects.iter().map(|x| x.to_string()).collect()),
        Err(e) => return Err(e.into()),
    };
    let mut text = format!(
        "joints {} (grounded {})\nbeams {}\nprecedence pairs {}\none-way beams {}",
        d.joint_count(),
        grounded,
        d.beam_count(),
        pairs,
        one_way.len()
    );
    for x in &defects {
        text += &format!("\ndefect: {x}");
    }
    let json = json!({
        "joints": d.joint_count(),
        "grounded": grounded,
        "beams": d.beam_count(),
        "precedence_pairs": pairs,
        "one_way_beams": one_way,
        "defects": defects,
    });
    Ok(Outcome::ok(text, json))
}

fn threads_from_env() -> anyhow::Result<()> {
    if let Ok(v) = std::env::var("PLANNER_THREADS") {
        let n: usize = v.parse().with_context(|| format!("PLANNER_THREADS={v}"))?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = Cli::parse();
    let result = threads_from_env().and_then(|()| match &cli.command {
        Command::Plan { design, config, cost, out, seed } => run_plan(design, config.as_deref(), *cost, out, *seed),
        Command::Verify { design, plan, config } => run_verify(design, plan, config.as_deref()),
        Command::Satgen { netlist, out, no_planarize } => run_satgen(netlist, out, *no_planarize),
        Command::Oracle { design, config, minmax, limit } => run_oracle(design, config.as_deref(), *minmax, *limit),
        Command::Stats { design, config } => run_stats(design, config.as_deref()),
    });
    match result {
        Ok(o) => {
            if cli.json {
                println!("{}", o.json);
            } else if !o.text.is_empty() {
                println!("{}", o.text);
            }
            ExitCode::from(o.code)
        }
        Err(e) => {
            if cli.json {
                println!("{}", json!({"error": format!("{e:#}")}));
            } else {
                eprintln!("error: {e:#}");
            }
            ExitCode::from(1)
        }
    }
}
