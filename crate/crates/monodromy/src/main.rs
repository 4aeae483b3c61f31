//! Command-line front end: analyze a polynomial's monodromy and block
//! structure, construct the named example polynomials, or run the full
//! verification suite.

use std::collections::BTreeSet;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde_json::json;

use monodromy::blocks::{block_lattice_at, block_system, fatou_oracle, BlockConfig, BlockReport};
use monodromy::config::RunConfig;
use monodromy::construct::{
    build_conservative_cubic, build_f, build_g, build_h, power_map,
};
use monodromy::engine::{
    default_base_point, extract_wreath_recursion, infinity_cycle_check, monodromy_generators,
    EngineError,
};
use monodromy::group::GeneratedGroup;
use monodromy::path::Orientation;
use monodromy::poly::{critical_data, Poly};
use monodromy::tree::TreeShape;
use monodromy::verify::{run_all, VerifyConfig};

#[derive(Parser)]
#[command(
    name = "monodromy",
    about = "Monodromy groups of polynomial iterates: numeric computation, wreath recursions, block systems"
)]
struct Cli {
    #[command(flatten)]
    common: CommonArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Rng seed for the randomized suites.
    #[arg(long, global = true, env = "MONODROMY_SEED", default_value_t = 0xacce97)]
    seed: u64,
    /// Root residual tolerance, relative to the coefficient scale.
    #[arg(long, global = true, env = "MONODROMY_TOL_ROOT", default_value_t = 1e-12)]
    tol_root: f64,
    /// Root clustering tolerance.
    #[arg(long, global = true, env = "MONODROMY_TOL_CLUSTER", default_value_t = 1e-8)]
    tol_cluster: f64,
    /// Path/ray clearance tolerance.
    #[arg(long, global = true, env = "MONODROMY_TOL_CLEARANCE", default_value_t = 1e-9)]
    tol_clearance: f64,
    /// Loop orientation.
    #[arg(long, global = true, env = "MONODROMY_ORIENTATION", value_enum, default_value_t = OrientationArg::Ccw)]
    orientation: OrientationArg,
    /// Breadth-first closure cap; larger groups use the stabilizer chain.
    #[arg(long, global = true, env = "MONODROMY_CAP_CLOSURE", default_value_t = 1_000_000)]
    cap_closure: usize,
    /// Emit JSON instead of text.
    #[arg(long, global = true, env = "MONODROMY_JSON", default_value_t = false)]
    json: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OrientationArg {
    Ccw,
    Cw,
}

#[derive(Subcommand)]
enum Command {
    /// Analyze a polynomial from a coefficient file: critical data, base
    /// point, monodromy generators, wreath recursion, block lattice.
    Analyze {
        /// Coefficient file: one coefficient per line, ascending, `re [im]`.
        coeff_file: PathBuf,
        /// Tree level to analyze up to.
        #[arg(long, env = "MONODROMY_LEVEL", default_value_t = 1)]
        level: usize,
        /// Base point; auto-selected when omitted.
        #[arg(long, env = "MONODROMY_BASE")]
        base: Option<f64>,
    },
    /// Construct a named polynomial and write its coefficient file.
    Construct {
        /// One of: f, g, h, conservative-cubic, power.
        target: String,
        /// Degree for the power map.
        #[arg(long, default_value_t = 6)]
        degree: usize,
        /// Output file; stdout when omitted.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Run the full verification suite, one line per criterion.
    VerifyPaper,
}

// Exit codes: 0 success, 1 verification failure, 2 numeric failure, 3 bad input.
const EXIT_VERIFY: u8 = 1;
const EXIT_NUMERIC: u8 = 2;
const EXIT_INPUT: u8 = 3;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let config = RunConfig {
        tol_root: cli.common.tol_root,
        tol_cluster: cli.common.tol_cluster,
        tol_clearance: cli.common.tol_clearance,
        closure_cap: cli.common.cap_closure,
        seed: cli.common.seed,
        orientation: match cli.common.orientation {
            OrientationArg::Ccw => Orientation::Ccw,
            OrientationArg::Cw => Orientation::Cw,
        },
        json: cli.common.json,
        ..RunConfig::default()
    };
    if let Err(e) = config.validate() {
        eprintln!("invalid configuration: {e}");
        return ExitCode::from(EXIT_INPUT);
    }
    match cli.command {
        Command::Analyze {
            coeff_file,
            level,
            base,
        } => cmd_analyze(&config, &coeff_file, level, base),
        Command::Construct {
            target,
            degree,
            output,
        } => cmd_construct(&config, &target, degree, output.as_deref()),
        Command::VerifyPaper => cmd_verify_paper(&config),
    }
}

fn cmd_analyze(
    config: &RunConfig,
    coeff_file: &std::path::Path,
    level: usize,
    base_flag: Option<f64>,
) -> ExitCode {
    let text = match std::fs::read_to_string(coeff_file) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("cannot read {}: {e}", coeff_file.display());
            return ExitCode::from(EXIT_INPUT);
        }
    };
    let poly = match Poly::from_coeff_file(&text) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("cannot parse {}: {e}", coeff_file.display());
            return ExitCode::from(EXIT_INPUT);
        }
    };
    if poly.degree() < 2 {
        eprintln!("need degree at least 2");
        return ExitCode::from(EXIT_INPUT);
    }
    let engine = config.engine_config();
    let roots_cfg = config.root_config();

    let data = match critical_data(&poly, engine.post_critical_depth.max(level), &roots_cfg) {
        Ok(d) => d,
        Err(e) => {
            eprintln!("critical data failed: {e}");
            return ExitCode::from(EXIT_NUMERIC);
        }
    };
    let base = match base_flag {
        Some(b) => b,
        None => match default_base_point(&poly, level, &engine) {
            Ok(b) => b,
            Err(e) => {
                eprintln!("base selection failed: {e}");
                return ExitCode::from(EXIT_NUMERIC);
            }
        },
    };

    let mut levels_json = Vec::new();
    let mut text_out = String::new();
    text_out.push_str(&format!("degree: {}\n", poly.degree()));
    text_out.push_str(&format!(
        "critical points: {}\n",
        data.points
            .iter()
            .map(|(z, k)| format!("{} (local degree {k})", fmt_c(*z)))
            .collect::<Vec<_>>()
            .join(", ")
    ));
    text_out.push_str(&format!(
        "critical values: {}\n",
        data.values
            .iter()
            .map(|(z, degs)| format!("{} {degs:?}", fmt_c(*z)))
            .collect::<Vec<_>>()
            .join(", ")
    ));
    text_out.push_str(&format!(
        "post-critical ({}): {}\n",
        if data.post_critical_finite {
            "finite"
        } else {
            "truncated"
        },
        data.post_critical
            .iter()
            .map(|z| fmt_c(*z))
            .collect::<Vec<_>>()
            .join(", ")
    ));
    text_out.push_str(&format!("base point: {base}\n"));

    let mut automaton_text = None;
    let mut warnings: Vec<String> = Vec::new();
    for n in 1..=level {
        let md = match monodromy_generators(&poly, base, n, &engine) {
            Ok(m) => m,
            Err(e) => {
                eprintln!("monodromy at level {n} failed: {e}");
                return ExitCode::from(EXIT_NUMERIC);
            }
        };
        warnings.extend(md.warnings.iter().cloned());
        let infinity = infinity_cycle_check(&md.generators);
        text_out.push_str(&format!("level {n}:\n"));
        for (u, g) in md.punctures.iter().zip(&md.generators) {
            text_out.push_str(&format!("  loop {u:.6}: {g}\n"));
        }
        text_out.push_str(&format!(
            "  full cycle at infinity: {} ({})\n",
            infinity.found,
            infinity.ordering.clone().unwrap_or_else(|| "none".into())
        ));

        let group = GeneratedGroup::new(md.generators[0].degree(), md.generators.clone())
            .expect("equal degrees")
            .with_closure_cap(config.closure_cap);
        let shape = TreeShape::new(poly.degree(), n);
        let block_cfg = BlockConfig::default();
        let mut blocks_json = Vec::new();
        match block_lattice_at(&group, 1, &block_cfg) {
            Ok(lattice) => {
                text_out.push_str("  blocks through point 1:\n");
                for b in &lattice {
                    let report = BlockReport::from_indices(&shape, b);
                    text_out.push_str(&format!(
                        "    size {:>3} {:<12} {:?}\n",
                        report.size, report.class, report.points
                    ));
                    blocks_json.push(report);
                }
                // Proper blocks generate full partitions; surface them.
                for b in &lattice {
                    if b.len() > 1 && b.len() < group.degree() {
                        if let Ok(system) = block_system(&group, b) {
                            let classes: Vec<String> = system
                                .iter()
                                .map(|c| {
                                    BlockReport::from_indices(&shape, c)
                                        .points
                                        .join(",")
                                })
                                .collect();
                            text_out.push_str(&format!(
                                "  block system from size {}: {}\n",
                                b.len(),
                                classes.join(" | ")
                            ));
                        }
                    }
                }
            }
            Err(e) => {
                text_out.push_str(&format!("  block lattice skipped: {e}\n"));
            }
        }
        let mut fatou_json = Vec::new();
        if n >= 2 {
            let branch_size = shape.degree.pow((n - 1) as u32);
            for i in 1..=shape.degree {
                for j in (i + 1)..=shape.degree {
                    let seed = BTreeSet::from([
                        (i - 1) * branch_size + 1,
                        (j - 1) * branch_size + 1,
                    ]);
                    if let Ok(report) = fatou_oracle(&shape, &group, &seed) {
                        text_out.push_str(&format!(
                            "  branches {i},{j}: minimal block size {} (> d^(n-1): {})\n",
                            report.block_size, report.exceeds
                        ));
                        fatou_json.push(json!({
                            "branches": [i, j],
                            "block_size": report.block_size,
                            "exceeds": report.exceeds,
                        }));
                    }
                }
            }
        }
        levels_json.push(json!({
            "level": n,
            "punctures": md.punctures,
            "generators": md.punctures.iter().zip(&md.generators).map(|(u, g)| json!({
                "puncture": u,
                "cycles": g.to_string(),
            })).collect::<Vec<_>>(),
            "infinity_cycle": { "found": infinity.found, "order": infinity.order.to_string(), "ordering": infinity.ordering },
            "blocks": blocks_json,
            "fatou": fatou_json,
        }));
    }
    match extract_wreath_recursion(&poly, base, &engine) {
        Ok(extracted) => {
            text_out.push_str("wreath recursion:\n");
            for line in extracted.automaton.to_string().lines() {
                text_out.push_str(&format!("  {line}\n"));
            }
            automaton_text = Some(extracted.automaton.to_string());
        }
        Err(EngineError::NonRealFiber) => {
            warnings.push("wreath recursion skipped: level-1 fiber not real".to_string());
        }
        Err(e) => {
            eprintln!("wreath extraction failed: {e}");
            return ExitCode::from(EXIT_NUMERIC);
        }
    }
    for w in &warnings {
        text_out.push_str(&format!("warning: {w}\n"));
    }

    if config.json {
        let out = json!({
            "degree": poly.degree(),
            "base": base,
            "critical_values": data.values.iter().map(|(z, degs)| json!({
                "value": [z.re, z.im],
                "local_degrees": degs,
            })).collect::<Vec<_>>(),
            "post_critical": data.post_critical.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>(),
            "post_critical_finite": data.post_critical_finite,
            "levels": levels_json,
            "automaton": automaton_text,
            "warnings": warnings,
        });
        println!("{}", serde_json::to_string_pretty(&out).expect("serializable"));
    } else {
        print!("{text_out}");
    }
    ExitCode::SUCCESS
}

fn fmt_c(z: Complex64) -> String {
    if z.im.abs() < 1e-12 {
        format!("{:.6}", z.re)
    } else {
        format!("{:.6}{:+.6}i", z.re, z.im)
    }
}

fn cmd_construct(
    config: &RunConfig,
    target: &str,
    degree: usize,
    output: Option<&std::path::Path>,
) -> ExitCode {
    let (poly, report) = match target {
        "f" => {
            let f = build_f();
            (f, json!({ "target": "f", "critical_values": [0.0, 1.0, 2.0] }))
        }
        "g" => match build_g() {
            Ok(s) => {
                let report = json!({
                    "target": "g",
                    "slots": s.slots,
                    "lead": s.lead,
                    "residual": s.residual,
                });
                (s.poly, report)
            }
            Err(e) => {
                eprintln!("construction failed: {e}");
                return ExitCode::from(EXIT_NUMERIC);
            }
        },
        "h" => match build_h() {
            Ok(s) => {
                let report = json!({
                    "target": "h",
                    "slots": s.solved.slots,
                    "lead": s.solved.lead,
                    "residual": s.solved.residual,
                    "b": s.b,
                    "a": s.a,
                    "b_offset_from_one": s.b_offset_from_one,
                    "recommended_base": s.recommended_base,
                });
                (s.solved.poly, report)
            }
            Err(e) => {
                eprintln!("construction failed: {e}");
                return ExitCode::from(EXIT_NUMERIC);
            }
        },
        "conservative-cubic" => match build_conservative_cubic() {
            Ok(s) => {
                let report = json!({
                    "target": "conservative-cubic",
                    "residual": s.residual,
                });
                (s.poly, report)
            }
            Err(e) => {
                eprintln!("construction failed: {e}");
                return ExitCode::from(EXIT_NUMERIC);
            }
        },
        "power" => {
            if degree < 2 {
                eprintln!("power map needs degree at least 2");
                return ExitCode::from(EXIT_INPUT);
            }
            (
                power_map(degree),
                json!({ "target": "power", "degree": degree }),
            )
        }
        other => {
            eprintln!("unknown target {other:?}; use f, g, h, conservative-cubic, or power");
            return ExitCode::from(EXIT_INPUT);
        }
    };
    let file = poly.to_coeff_file();
    if let Some(path) = output {
        if let Err(e) = std::fs::write(path, &file) {
            eprintln!("cannot write {}: {e}", path.display());
            return ExitCode::from(EXIT_INPUT);
        }
    }
    if config.json {
        let mut out = report;
        out["coefficients"] = json!(poly
            .coeffs()
            .iter()
            .map(|c| [c.re, c.im])
            .collect::<Vec<_>>());
        println!("{}", serde_json::to_string_pretty(&out).expect("serializable"));
    } else if output.is_none() {
        print!("{file}");
    } else {
        println!(
            "wrote degree-{} coefficient file to {}",
            poly.degree(),
            output.expect("checked above").display()
        );
        if let Some(obj) = report.as_object() {
            for (key, value) in obj {
                if key != "target" {
                    println!("  {key}: {value}");
                }
            }
        }
    }
    ExitCode::SUCCESS
}

fn cmd_verify_paper(config: &RunConfig) -> ExitCode {
    let vcfg = VerifyConfig {
        seed: config.seed,
        closure_cap: config.closure_cap,
        orientation: config.orientation,
    };
    let outcomes = run_all(&vcfg);
    let all_passed = outcomes.iter().all(|o| o.passed);
    if config.json {
        println!(
            "{}",
            serde_json::to_string_pretty(&outcomes).expect("serializable")
        );
    } else {
        for o in &outcomes {
            println!(
                "[{}] criterion {:>2} ({:>6} ms)  {} — {}",
                if o.passed { "PASS" } else { "FAIL" },
                o.index,
                o.millis,
                o.name,
                o.details
            );
        }
    }
    if all_passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_VERIFY)
    }
}
