use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use fil_core::driver::{check_paths, interface_json, Checked, Options};
use fil_core::fuzz::fuzz;
use fil_core::log::body_log;
use fil_core::low::{lower_program, verify_program};
use fil_core::netlist::{build, NetlistSim};
use fil_core::resolve::ResolvedProgram;
use fil_core::sim::{gen_stimulus, simulate_for, Engine, LowSim, StimulusSpec};
use fil_core::typeck::CheckConfig;

#[derive(Parser)]
#[command(name = "fil", about = "Check, compile, and simulate timeline-typed hardware")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Emit {
    Low,
    Verilog,
    Log,
}

#[derive(Subcommand)]
enum Command {
    /// Typecheck the given files.
    Check {
        #[arg(long)]
        json: bool,
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
    /// Lower to Low Filament, Verilog, or the oracle's read/write logs.
    Compile {
        #[arg(long, value_enum, default_value = "low")]
        emit: Emit,
        /// Output directory; prints to stdout when absent.
        #[arg(short, long)]
        out: Option<PathBuf>,
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
    /// Simulate a component under a JSON stimulus.
    Sim {
        #[arg(long)]
        stim: PathBuf,
        /// Cycles to run; defaults to the end of the last capture window.
        #[arg(long)]
        cycles: Option<u64>,
        /// Component to simulate; defaults to the last one defined.
        #[arg(long)]
        top: Option<String>,
        /// Simulate the emitted netlist instead of the Low program.
        #[arg(long)]
        netlist: bool,
        /// Write a VCD waveform here.
        #[arg(long)]
        vcd: Option<PathBuf>,
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
    /// Print a component's events and port windows.
    Interface {
        #[arg(long)]
        json: bool,
        file: PathBuf,
        component: String,
    },
    /// Check random programs against the log oracle.
    Fuzz {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1000)]
        trials: u64,
        /// Disable one check, to confirm the oracle notices.
        #[arg(long)]
        without: Option<String>,
    },
}

/// Failure with its exit code: 1 for program errors, 2 for usage or IO.
struct Fail(u8, String);

fn io(e: impl std::fmt::Display) -> Fail {
    Fail(2, e.to_string())
}

/// Writes to stdout; a closed pipe (e.g. into `head`) is not an error.
fn emit(text: &str) -> Result<(), Fail> {
    use std::io::Write;
    match std::io::stdout().lock().write_all(text.as_bytes()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(io(e)),
        _ => Ok(()),
    }
}

fn checked(files: &[PathBuf]) -> Result<Checked, Fail> {
    check_paths(files, &Options::default()).map_err(io)
}

fn program(files: &[PathBuf]) -> Result<ResolvedProgram, Fail> {
    checked(files)?.into_program().map_err(|e| Fail(1, e))
}

fn write_out(dir: &Option<PathBuf>, files: Vec<(String, String)>) -> Result<(), Fail> {
    match dir {
        None => {
            for (_, text) in files {
                emit(&text)?;
            }
        }
        Some(d) => {
            std::fs::create_dir_all(d).map_err(io)?;
            for (name, text) in files {
                std::fs::write(Path::new(d).join(name), text).map_err(io)?;
            }
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Fail> {
    match cli.command {
        Command::Check { json, files } => {
            let c = checked(&files)?;
            if json {
                let diags: Vec<_> = c.diagnostics.iter().map(|d| d.to_json(&c.sources)).collect();
                let doc = serde_json::json!({ "ok": c.ok(), "diagnostics": diags });
                emit(&format!("{}\n", serde_json::to_string_pretty(&doc).expect("json")))?;
            } else if !c.ok() {
                eprint!("{}", c.render());
            }
            if c.ok() {
                Ok(())
            } else {
                Err(Fail(1, format!("{} error(s)", c.diagnostics.len())))
            }
        }
        Command::Compile { emit, out, files } => {
            let rp = program(&files)?;
            let lp = lower_program(&rp);
            verify_program(&lp).map_err(|e| Fail(1, e.to_string()))?;
            let texts = match emit {
                Emit::Low => lp.components.iter().map(|c| (format!("{}.low", c.name), c.to_string())).collect(),
                Emit::Verilog => build(&rp, &lp).map_err(|e| Fail(1, e.to_string()))?.files(),
                Emit::Log => rp
                    .user_components()
                    .map(|c| (format!("{}.log", c.name), format!("// {}\n{}", c.name, body_log(&rp, c))))
                    .collect(),
            };
            write_out(&out, texts)
        }
        Command::Sim { stim, cycles, top, netlist, vcd, files } => {
            let rp = program(&files)?;
            let top = match top {
                Some(t) => t,
                None => rp.user_components().last().map(|c| c.name.clone()).ok_or_else(|| Fail(1, "no component to simulate".into()))?,
            };
            if rp.program.get(&top).is_none_or(|c| c.is_extern) {
                return Err(Fail(1, format!("no component named `{top}`")));
            }
            let text = std::fs::read_to_string(&stim).map_err(io)?;
            let doc: StimulusSpec = serde_json::from_str(&text).map_err(|e| Fail(2, format!("{}: {e}", stim.display())))?;
            let stimulus = gen_stimulus(rp.get(&top), &doc.vectors, doc.mode, doc.seed).map_err(|e| Fail(1, e.to_string()))?;
            let lp = lower_program(&rp);
            let mut engine: Box<dyn Engine> = if netlist {
                let nl = build(&rp, &lp).map_err(|e| Fail(1, e.to_string()))?;
                Box::new(NetlistSim::new(&nl, &top).map_err(|e| Fail(1, e.to_string()))?)
            } else {
                Box::new(LowSim::new(&rp, &lp, &top).map_err(|e| Fail(1, e.to_string()))?)
            };
            let n = cycles.unwrap_or(stimulus.cycles());
            let trace = simulate_for(engine.as_mut(), &stimulus, n).map_err(|e| Fail(1, e.to_string()))?;
            emit(&trace.dump())?;
            for r in &trace.invalid_reads {
                eprintln!("warning: `{}.{}` captured an invalid value at cycle {}", r.instance, r.port, r.cycle);
            }
            if let Some(path) = vcd {
                std::fs::write(path, trace.vcd(&top)).map_err(io)?;
            }
            Ok(())
        }
        Command::Interface { json, file, component } => {
            let rp = program(&[file])?;
            let c = rp.program.get(&component).ok_or_else(|| Fail(1, format!("no component named `{component}`")))?;
            let doc = interface_json(c);
            if json {
                emit(&format!("{}\n", serde_json::to_string_pretty(&doc).expect("json")))?;
            } else {
                emit(&format!("{}\n", fil_core::pretty::signature(c)))?;
            }
            Ok(())
        }
        Command::Fuzz { seed, trials, without } => {
            let checks = match without {
                None => CheckConfig::default(),
                Some(name) => CheckConfig::without(&name).ok_or_else(|| Fail(2, format!("unknown check `{name}`")))?,
            };
            let report = fuzz(seed, trials, checks, 3);
            emit(&report.to_string())?;
            if report.violations.is_empty() {
                Ok(())
            } else {
                Err(Fail(1, format!("{} soundness violation(s)", report.violations.len())))
            }
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Fail(code, msg)) => {
            if !msg.is_empty() {
                eprintln!("error: {msg}");
            }
            ExitCode::from(code)
        }
    }
}
