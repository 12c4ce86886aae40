//! Command-line surface of the pulse compiler.
//!
//! Exit codes: 0 success, 1 usage error, 2 constraint or validation
//! failure, 3 non-convergence.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use dqdc::demos::{grover_demo, maxcut_demo, MaxCutConfig, MaxCutProblem};
use dqdc::error::Error;
use dqdc::executor::{basis_label, execute, expectation, measure_distribution, Axis};
use dqdc::library::{compile_standard_with_report, CompileOptions, GateLibrary, EXTENDED_GATES};
use dqdc::linalg::StateVector;
use dqdc::scheduler::{schedule, verify_schedule, CircuitIR, Schedule};

#[derive(Parser)]
#[command(name = "dqdc", version, about = "Pulse compiler for singlet-triplet qubit chains")]
struct Cli {
    /// Seed for gate training and demo runs.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Key-value overrides file (`key = value` lines).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Emit machine-readable JSON on stdout.
    #[arg(long, global = true)]
    json: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train one standard gate and write it as a single-entry library.
    CompileGate {
        /// H, T, S, X, Y, Z, CX, CX_10 or CZ.
        name: String,
        #[arg(long)]
        lr: Option<f64>,
        #[arg(long)]
        max_rounds: Option<usize>,
        /// Output library file (default `<NAME>.gate.json`).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the full training report (histories) as JSON.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Train the full standard set (including both CX orientations).
    BuildLibrary {
        #[arg(long, default_value = "lib.json")]
        out: PathBuf,
    },
    /// Lay out a circuit file as a pulse schedule.
    CompileCircuit {
        ir: PathBuf,
        #[arg(long)]
        lib: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Execute a schedule and print the measurement distribution.
    Run {
        schedule: PathBuf,
        /// Initial computational basis state, e.g. `01`.
        #[arg(long)]
        init: Option<String>,
        /// Write `outcome,probability` rows.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Audit a schedule against the layout constraints.
    Verify { schedule: PathBuf },
    /// End-to-end demonstrations.
    Demo {
        #[command(subcommand)]
        which: DemoCommand,
    },
}

#[derive(Subcommand)]
enum DemoCommand {
    /// Compiled two-qubit search for the target item `11`.
    Grover {
        #[arg(long)]
        lib: PathBuf,
    },
    /// Multi-basis-encoding Max-Cut with dynamically trained pulses.
    Maxcut {
        #[arg(long)]
        lib: PathBuf,
        #[arg(long)]
        lr: Option<f64>,
        #[arg(long)]
        max_rounds: Option<usize>,
        /// Write `round,loss,cut` rows.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

/// Settings merged from the config file; explicit flags take precedence.
#[derive(Default, Clone)]
struct FileConfig {
    values: HashMap<String, String>,
}

impl FileConfig {
    fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
        let mut values = HashMap::new();
        for (ln, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| format!("config line {} is not `key = value`: {raw}", ln + 1))?;
            values.insert(key.trim().to_string(), value.trim().to_string());
        }
        Ok(FileConfig { values })
    }

    fn get<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>, String> {
        match self.values.get(key) {
            None => Ok(None),
            Some(raw) => raw
                .parse()
                .map(Some)
                .map_err(|_| format!("config key '{key}' has invalid value '{raw}'")),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // keep clap's rendered help/error but pin the usage exit code
            let is_help = matches!(
                e.kind(),
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
            );
            let _ = e.print();
            return if is_help { ExitCode::SUCCESS } else { ExitCode::from(1) };
        }
    };
    match run_cli(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Tool(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_of(&e))
        }
    }
}

enum CliError {
    Usage(String),
    Tool(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Tool(e)
    }
}

impl From<String> for CliError {
    fn from(msg: String) -> Self {
        CliError::Usage(msg)
    }
}

fn exit_code_of(e: &Error) -> u8 {
    match e {
        Error::CompilationFailed { .. } => 3,
        Error::Io(_) => 1,
        _ => 2,
    }
}

fn run_cli(cli: Cli) -> Result<(), CliError> {
    let file_cfg = match &cli.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    let seed = match cli.seed {
        Some(s) => Some(s),
        None => file_cfg.get::<u64>("seed")?,
    };

    match cli.command {
        Command::CompileGate { name, lr, max_rounds, out, report } => {
            let opts = CompileOptions {
                learning_rate: lr
                    .or(file_cfg.get("lr")?)
                    .or(file_cfg.get("learning_rate")?),
                max_rounds: max_rounds.or(file_cfg.get("max_rounds")?),
                seed,
                error_threshold: file_cfg.get("threshold")?,
            };
            let (gate, train_report) = compile_standard_with_report(&name, &opts).map_err(|e| {
                if matches!(e, Error::CompilationFailed { .. }) {
                    eprintln!(
                        "hint: '{name}' did not reach the threshold; retry with a different \
                         learning rate (--lr), as in changing 0.05 to 0.1"
                    );
                }
                e
            })?;
            let out = out.unwrap_or_else(|| PathBuf::from(format!("{name}.gate.json")));
            let mut lib = GateLibrary::new();
            lib.insert(gate.clone())?;
            lib.save(&out)?;
            if let Some(report_path) = report {
                std::fs::write(
                    &report_path,
                    serde_json::to_string_pretty(&train_report).map_err(Error::from)?,
                )
                .map_err(Error::from)?;
            }
            if cli.json {
                println!(
                    "{}",
                    serde_json::json!({
                        "gate": gate.name,
                        "epsilon": gate.epsilon,
                        "rounds": gate.meta.rounds,
                        "learning_rate": gate.meta.learning_rate,
                        "out": out,
                    })
                );
            } else {
                println!(
                    "compiled {} in {} rounds (error {:.3e}) -> {}",
                    gate.name,
                    gate.meta.rounds,
                    gate.epsilon,
                    out.display()
                );
            }
            Ok(())
        }
        Command::BuildLibrary { out } => {
            let opts = CompileOptions {
                learning_rate: file_cfg.get("lr")?,
                max_rounds: file_cfg.get("max_rounds")?,
                seed,
                error_threshold: file_cfg.get("threshold")?,
            };
            let mut lib = GateLibrary::new();
            let mut summary = Vec::new();
            for name in EXTENDED_GATES {
                let (gate, _) = compile_standard_with_report(name, &opts).map_err(|e| {
                    if matches!(e, Error::CompilationFailed { .. }) {
                        eprintln!(
                            "hint: '{name}' did not reach the threshold; retry with a different \
                             learning rate via --config (lr = ...)"
                        );
                    }
                    e
                })?;
                if !cli.json {
                    println!(
                        "compiled {name}: {} rounds, error {:.3e}",
                        gate.meta.rounds, gate.epsilon
                    );
                }
                summary.push(serde_json::json!({
                    "gate": name,
                    "rounds": gate.meta.rounds,
                    "epsilon": gate.epsilon,
                }));
                lib.insert(gate)?;
            }
            lib.save(&out)?;
            if cli.json {
                println!("{}", serde_json::json!({ "out": out, "gates": summary }));
            } else {
                println!("library with {} gates -> {}", lib.len(), out.display());
            }
            Ok(())
        }
        Command::CompileCircuit { ir, lib, out } => {
            let circuit = CircuitIR::load(&ir)?;
            let library = GateLibrary::load(&lib)?;
            let sched = schedule(&circuit, &library)?;
            sched.save(&out)?;
            if cli.json {
                println!(
                    "{}",
                    serde_json::json!({
                        "out": out,
                        "n_qubits": sched.n_qubits,
                        "makespan": sched.makespan,
                        "slots": (sched.makespan / sched.slot_duration).round() as u64,
                        "segments": sched.segments.len(),
                    })
                );
            } else {
                println!(
                    "scheduled {} ops into {} slots (makespan {:.4}) -> {}",
                    circuit.ops.len(),
                    (sched.makespan / sched.slot_duration).round() as u64,
                    sched.makespan,
                    out.display()
                );
            }
            Ok(())
        }
        Command::Run { schedule: sched_path, init, csv } => {
            let sched = Schedule::load(&sched_path)?;
            let init_state = parse_init(&init, sched.n_qubits)?;
            let result = execute(&sched, &init_state)?;
            let probs = measure_distribution(&result.final_state);
            if let Some(csv_path) = csv {
                let mut rows = String::from("outcome,probability\n");
                for (i, p) in probs.iter().enumerate() {
                    rows.push_str(&format!("{},{}\n", basis_label(sched.n_qubits, i), p));
                }
                std::fs::write(&csv_path, rows).map_err(Error::from)?;
            }
            let expectations: Vec<serde_json::Value> = (0..sched.n_qubits)
                .map(|q| {
                    Ok(serde_json::json!({
                        "qubit": q,
                        "z": expectation(&result.final_state, q, Axis::Z)?,
                        "x": expectation(&result.final_state, q, Axis::X)?,
                    }))
                })
                .collect::<Result<_, Error>>()?;
            if cli.json {
                let dist: Vec<_> = probs
                    .iter()
                    .enumerate()
                    .map(|(i, p)| {
                        serde_json::json!({ "outcome": basis_label(sched.n_qubits, i), "p": p })
                    })
                    .collect();
                println!(
                    "{}",
                    serde_json::json!({
                        "makespan": result.makespan,
                        "distribution": dist,
                        "expectations": expectations,
                    })
                );
            } else {
                println!("outcome  probability");
                for (i, p) in probs.iter().enumerate() {
                    println!("{}       {p:.10}", basis_label(sched.n_qubits, i));
                }
                println!("qubit   <z>          <x>");
                for (q, e) in expectations.iter().enumerate() {
                    println!(
                        "{q}       {:+.8}  {:+.8}",
                        e["z"].as_f64().unwrap(),
                        e["x"].as_f64().unwrap()
                    );
                }
            }
            Ok(())
        }
        Command::Verify { schedule: sched_path } => {
            let sched = Schedule::load(&sched_path)?;
            let report = verify_schedule(&sched);
            if cli.json {
                println!("{}", serde_json::to_string(&report).map_err(Error::from)?);
            } else {
                for item in &report.items {
                    let mark = if item.passed { "PASS" } else { "FAIL" };
                    println!("[{mark}] {}: {}", item.name, item.detail);
                }
            }
            if report.passed() {
                Ok(())
            } else {
                Err(Error::constraint("schedule verification failed").into())
            }
        }
        Command::Demo { which } => match which {
            DemoCommand::Grover { lib } => {
                let library = GateLibrary::load(&lib)?;
                let report = grover_demo(&library, seed.unwrap_or(0))?;
                if cli.json {
                    println!("{}", serde_json::to_string(&report).map_err(Error::from)?);
                } else {
                    println!(
                        "grover search over {} slots (makespan {:.4}):",
                        report.n_slots, report.makespan
                    );
                    for (label, p) in &report.distribution {
                        println!("  P({label}) = {p:.6}");
                    }
                    println!(
                        "top outcome: {} (P = {:.6})",
                        report.top_outcome, report.p_target
                    );
                }
                Ok(())
            }
            DemoCommand::Maxcut { lib, lr, max_rounds, csv } => {
                let library = GateLibrary::load(&lib)?;
                let mut cfg = MaxCutConfig::default();
                if let Some(lr) = lr.or(file_cfg.get("lr")?) {
                    cfg.learning_rate = lr;
                }
                if let Some(mr) = max_rounds.or(file_cfg.get("max_rounds")?) {
                    cfg.max_rounds = mr;
                }
                cfg.seed = seed.unwrap_or(0);
                let report = maxcut_demo(&library, &MaxCutProblem::default(), &cfg)?;
                if let Some(csv_path) = csv {
                    report.write_csv(&csv_path)?;
                }
                if cli.json {
                    println!("{}", serde_json::to_string(&report).map_err(Error::from)?);
                } else {
                    println!(
                        "max-cut after {} rounds: best loss {:.6} (round {}), predicted cut {}",
                        report.rounds, report.best_loss, report.best_round, report.final_cut
                    );
                }
                Ok(())
            }
        },
    }
}

fn parse_init(init: &Option<String>, n_qubits: usize) -> Result<StateVector, CliError> {
    match init {
        None => Ok(StateVector::zero_state(n_qubits)),
        Some(bits) => {
            if bits.len() != n_qubits || !bits.chars().all(|c| c == '0' || c == '1') {
                return Err(CliError::Usage(format!(
                    "--init must be a {n_qubits}-character bitstring, got '{bits}'"
                )));
            }
            let index = usize::from_str_radix(bits, 2).expect("validated bitstring");
            Ok(StateVector::basis(n_qubits, index))
        }
    }
}
