//! `commitlab`: parse, lint, simulate, replay and check commitment protocols.
//!
//! Exit status: 0 on success, 1 when diagnostics contain an error or a
//! principal is found in violation, 2 on usage or I/O errors.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use commitlab::dsl::{self, Diagnostic};
use commitlab::sim::{self, Scenario};
use commitlab::{check, check_alignment, explain, CommitmentId, Principal, Protocol, Trace};

#[derive(Parser, Debug)]
#[command(name = "commitlab", version, about = "Commitment protocol engine")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Parse protocol files and report syntax errors only.
    CheckSyntax {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        #[arg(long)]
        machine: bool,
    },
    /// Parse, validate and lint protocol files. Any finding fails.
    Lint {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        #[arg(long)]
        machine: bool,
    },
    /// Enact a scenario (or every `.scn` file in a directory) and write the trace.
    Simulate {
        scenario: PathBuf,
        /// Protocol file; defaults to the one the scenario names.
        #[arg(long)]
        protocol: Option<PathBuf>,
        /// Overrides the scenario seed.
        #[arg(long, env = "COMMITLAB_SEED")]
        seed: Option<u64>,
        /// Trace file, or output directory when simulating a directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Replay a trace and print the resulting social state.
    Replay {
        trace: PathBuf,
        protocol: PathBuf,
        /// Print this principal's local view instead of the global state.
        #[arg(long = "as")]
        principal: Option<String>,
        #[arg(long)]
        horizon: Option<u64>,
        #[arg(long)]
        machine: bool,
    },
    /// Judge every commitment of a trace at a horizon.
    Comply {
        trace: PathBuf,
        protocol: PathBuf,
        #[arg(long)]
        horizon: Option<u64>,
        #[arg(long)]
        machine: bool,
    },
    /// Show the transitions that led to a commitment's verdict.
    Explain {
        trace: PathBuf,
        protocol: PathBuf,
        /// Commitment id, as `3` or `#3`.
        id: String,
        #[arg(long)]
        horizon: Option<u64>,
    },
    /// Run the bundled appointment scenario and print its progression.
    Demo {
        /// Accepted for uniformity; the bundled scenario is scripted.
        #[arg(long, env = "COMMITLAB_SEED")]
        seed: Option<u64>,
        /// Print the trace as JSON lines instead.
        #[arg(long)]
        machine: bool,
    },
}

/// Why a command stopped short of success.
enum Failure {
    /// Findings were reported on stdout.
    Findings,
    /// Usage or I/O problem, reported on stderr.
    Usage(String),
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdout = io::stdout();
    let mut out = stdout.lock();
    let result = match cli.command {
        Command::CheckSyntax { files, machine } => check_syntax(&mut out, &files, machine),
        Command::Lint { files, machine } => lint(&mut out, &files, machine),
        Command::Simulate {
            scenario,
            protocol,
            seed,
            out: target,
        } => simulate(&mut out, &scenario, protocol.as_deref(), seed, target.as_deref()),
        Command::Replay {
            trace,
            protocol,
            principal,
            horizon,
            machine,
        } => replay(&mut out, &trace, &protocol, principal, horizon, machine),
        Command::Comply {
            trace,
            protocol,
            horizon,
            machine,
        } => comply(&mut out, &trace, &protocol, horizon, machine),
        Command::Explain {
            trace,
            protocol,
            id,
            horizon,
        } => explain_cmd(&mut out, &trace, &protocol, &id, horizon),
        Command::Demo { seed: _, machine } => demo(&mut out, machine),
    };
    let _ = out.flush();
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Findings) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("commitlab: {msg}");
            ExitCode::from(2)
        }
    }
}

fn io_err(path: &Path) -> impl Fn(io::Error) -> Failure + '_ {
    move |e| Failure::Usage(format!("{}: {e}", path.display()))
}

fn write_err(e: io::Error) -> Failure {
    Failure::Usage(format!("writing output: {e}"))
}

fn read(path: &Path) -> Result<Vec<u8>, Failure> {
    fs::read(path).map_err(io_err(path))
}

fn read_text(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(io_err(path))
}

fn report(out: &mut impl Write, file: &Path, diags: &[Diagnostic], machine: bool) -> Outcome {
    let name = file.display().to_string();
    for d in diags {
        let line = if machine { d.to_record() } else { d.render(&name) };
        writeln!(out, "{line}").map_err(write_err)?;
    }
    Ok(())
}

fn check_syntax(out: &mut impl Write, files: &[PathBuf], machine: bool) -> Outcome {
    let mut failed = false;
    for file in files {
        let diags = match dsl::parse_bytes(&read(file)?) {
            Ok(_) => Vec::new(),
            Err(diags) => diags,
        };
        failed |= dsl::has_errors(&diags);
        report(out, file, &diags, machine)?;
    }
    if failed {
        Err(Failure::Findings)
    } else {
        Ok(())
    }
}

fn lint(out: &mut impl Write, files: &[PathBuf], machine: bool) -> Outcome {
    let mut findings = 0;
    for file in files {
        let (_, diags) = dsl::analyze_bytes(&read(file)?);
        findings += diags.len();
        report(out, file, &diags, machine)?;
    }
    if findings > 0 {
        Err(Failure::Findings)
    } else {
        Ok(())
    }
}

/// Parse, validate and lint; refuse on errors, print nothing on warnings.
fn load_protocol(out: &mut impl Write, path: &Path) -> Result<Protocol, Failure> {
    let (protocol, diags) = dsl::analyze_bytes(&read(path)?);
    match protocol {
        Some(p) if !dsl::has_errors(&diags) => Ok(p),
        _ => {
            let errors: Vec<Diagnostic> = diags.into_iter().filter(Diagnostic::is_error).collect();
            report(out, path, &errors, false)?;
            Err(Failure::Findings)
        }
    }
}

fn load_trace(path: &Path) -> Result<Trace, Failure> {
    Trace::from_jsonl(&read_text(path)?).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

struct Simulated {
    trace: String,
    summary: String,
}

fn simulate_one(path: &Path, protocol: Option<&Path>, seed: Option<u64>) -> Result<Simulated, String> {
    let src = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let mut scenario = Scenario::parse(&src).map_err(|diags| {
        let lines: Vec<String> = diags.iter().map(|d| d.render(&path.display().to_string())).collect();
        lines.join("\n")
    })?;
    if let Some(seed) = seed {
        scenario.seed = seed;
    }
    let protocol_file = match protocol {
        Some(p) => p.to_path_buf(),
        None => sim::protocol_path(path, &scenario)
            .ok_or_else(|| format!("{}: no protocol given and none named in the scenario", path.display()))?,
    };
    let bytes = fs::read(&protocol_file).map_err(|e| format!("{}: {e}", protocol_file.display()))?;
    let (parsed, diags) = dsl::analyze_bytes(&bytes);
    let protocol = match parsed {
        Some(p) if !dsl::has_errors(&diags) => p,
        _ => {
            let name = protocol_file.display().to_string();
            let lines: Vec<String> = diags.iter().filter(|d| d.is_error()).map(|d| d.render(&name)).collect();
            return Err(lines.join("\n"));
        }
    };
    let run = sim::run(&protocol, &scenario).map_err(|e| format!("{}: {e}", path.display()))?;
    let alignment = check_alignment(run.views.iter());
    let summary = format!(
        "{}: {} events, end time {}, {}, {}",
        scenario.name,
        run.trace.events.len(),
        run.end_time,
        if run.quiescent { "quiescent" } else { "cut off at max time" },
        if alignment.aligned() {
            "aligned".to_string()
        } else {
            format!("{} misaligned", alignment.misalignments.len())
        }
    );
    Ok(Simulated {
        trace: run.trace.to_jsonl(),
        summary,
    })
}

fn simulate(
    out: &mut impl Write,
    path: &Path,
    protocol: Option<&Path>,
    seed: Option<u64>,
    target: Option<&Path>,
) -> Outcome {
    if !path.is_dir() {
        return match simulate_one(path, protocol, seed) {
            Ok(s) => match target {
                Some(file) => {
                    fs::write(file, &s.trace).map_err(io_err(file))?;
                    writeln!(out, "{}", s.summary).map_err(write_err)
                }
                None => out.write_all(s.trace.as_bytes()).map_err(write_err),
            },
            Err(msg) => {
                writeln!(out, "{msg}").map_err(write_err)?;
                Err(Failure::Findings)
            }
        };
    }

    let mut files: Vec<PathBuf> = fs::read_dir(path)
        .map_err(io_err(path))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "scn"))
        .collect();
    files.sort();
    if let Some(dir) = target {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    let results: Vec<Result<Simulated, String>> = std::thread::scope(|s| {
        let handles: Vec<_> = files
            .iter()
            .map(|f| s.spawn(move || simulate_one(f, protocol, seed)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().unwrap_or_else(|_| Err("simulation panicked".to_string())))
            .collect()
    });
    let mut failed = false;
    for (file, result) in files.iter().zip(results) {
        match result {
            Ok(s) => {
                if let Some(dir) = target {
                    let name = file.file_stem().map(PathBuf::from).unwrap_or_default().with_extension("jsonl");
                    let dest = dir.join(name);
                    fs::write(&dest, &s.trace).map_err(io_err(&dest))?;
                }
                writeln!(out, "{}", s.summary).map_err(write_err)?;
            }
            Err(msg) => {
                failed = true;
                writeln!(out, "{msg}").map_err(write_err)?;
            }
        }
    }
    if failed {
        Err(Failure::Findings)
    } else {
        Ok(())
    }
}

fn replay(
    out: &mut impl Write,
    trace_path: &Path,
    protocol_path: &Path,
    principal: Option<String>,
    horizon: Option<u64>,
    machine: bool,
) -> Outcome {
    let protocol = load_protocol(out, protocol_path)?;
    let trace = load_trace(trace_path)?;
    let fail = |e: commitlab::TraceError| Failure::Usage(format!("{}: {e}", trace_path.display()));
    let state = match principal {
        Some(p) => {
            let mut prefix = trace.clone();
            if let Some(h) = horizon {
                prefix.events.retain(|e| e.time <= h);
            }
            prefix.local_view(&protocol, &Principal::new(p)).map_err(fail)?
        }
        None => trace.replay_until(&protocol, horizon).map_err(fail)?,
    };
    let text = if machine { state.to_records() } else { state.render() };
    out.write_all(text.as_bytes()).map_err(write_err)
}

fn comply(out: &mut impl Write, trace_path: &Path, protocol_path: &Path, horizon: Option<u64>, machine: bool) -> Outcome {
    let protocol = load_protocol(out, protocol_path)?;
    let trace = load_trace(trace_path)?;
    let report =
        check(&trace, &protocol, horizon).map_err(|e| Failure::Usage(format!("{}: {e}", trace_path.display())))?;
    let text = if machine { report.to_records() } else { report.render() };
    out.write_all(text.as_bytes()).map_err(write_err)?;
    if report.all_compliant() {
        Ok(())
    } else {
        Err(Failure::Findings)
    }
}

fn explain_cmd(out: &mut impl Write, trace_path: &Path, protocol_path: &Path, id: &str, horizon: Option<u64>) -> Outcome {
    let id: u32 = id
        .trim_start_matches('#')
        .parse()
        .map_err(|_| Failure::Usage(format!("`{id}` is not a commitment id")))?;
    let protocol = load_protocol(out, protocol_path)?;
    let trace = load_trace(trace_path)?;
    let report =
        check(&trace, &protocol, horizon).map_err(|e| Failure::Usage(format!("{}: {e}", trace_path.display())))?;
    let steps = explain(&report, CommitmentId(id)).map_err(|e| Failure::Usage(e.to_string()))?;
    for step in &steps {
        writeln!(out, "{step}").map_err(write_err)?;
    }
    let verdict = report
        .verdicts
        .iter()
        .find(|v| v.id == CommitmentId(id))
        .expect("explained commitments have verdicts");
    writeln!(out, "verdict: {}", verdict.verdict).map_err(write_err)?;
    if verdict.verdict == commitlab::Verdict::Violated {
        writeln!(out, "accountable: {}", verdict.debtor).map_err(write_err)?;
    }
    Ok(())
}

fn demo(out: &mut impl Write, machine: bool) -> Outcome {
    let trace = commitlab::demo::demo_trace();
    let text = if machine {
        trace.to_jsonl()
    } else {
        commitlab::demo::render(&commitlab::demo::appointment_protocol(), &trace)
    };
    out.write_all(text.as_bytes()).map_err(write_err)
}
