//! `lattice-sched`: generate instruction streams, lower circuits, schedule
//! them on a qubit plane and inspect the results.
//!
//! Exit codes: 0 success, 1 verification failure, 2 routing failure,
//! 64 usage, 65 bad input data, 66 missing input, 70 internal error,
//! 74 other I/O failure.
//! Errors are reported as a JSON object on stderr.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use lattice_sched::bench::{self, compute_metrics, resource_estimate};
use lattice_sched::frontend::{self, LowerMode};
use lattice_sched::manybody::{boundary_of_basis, verify_tree_action, RoutingTree};
use lattice_sched::program::InstructionList;
use lattice_sched::schedulers::{self, validate_schedule, Algorithm, Schedule};
use lattice_sched::semantics::{verify_path_action, LogicalOp};
use lattice_sched::{Error, QubitPlane};
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "lattice-sched", version, about = "Lattice-surgery instruction scheduling")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Random,
    Stair,
    Hub,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Measurements,
    Cnot,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Switch {
    On,
    Off,
}

#[derive(Clone, Copy, ValueEnum)]
enum Algo {
    Bfs,
    LaBfs,
    Bfs3d,
    Dijkstra3d,
    Proj,
    LaProj,
}

impl From<Algo> for Algorithm {
    fn from(a: Algo) -> Self {
        match a {
            Algo::Bfs => Algorithm::Bfs,
            Algo::LaBfs => Algorithm::LaBfs,
            Algo::Bfs3d => Algorithm::Bfs3d,
            Algo::Dijkstra3d => Algorithm::Dijkstra3d,
            Algo::Proj => Algorithm::Projection,
            Algo::LaProj => Algorithm::LaProjection,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Write a generated instruction stream.
    Gen {
        #[arg(long, value_enum)]
        kind: Kind,
        #[arg(long)]
        m: usize,
        /// Plane size for random instances.
        #[arg(long, default_value_t = 4)]
        plane_size: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Lower a Clifford+T circuit to instructions.
    Lower {
        #[arg(short, long)]
        input: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "measurements")]
        mode: Mode,
        #[arg(long, default_value_t = 1)]
        factories: usize,
    },
    /// Schedule an instruction stream.
    Schedule {
        #[arg(long, value_enum)]
        algo: Algo,
        #[arg(long, value_enum, default_value = "on")]
        kink: Switch,
        #[arg(short, long)]
        input: PathBuf,
        /// Overrides the plane size in the instruction header.
        #[arg(long)]
        plane_size: Option<u32>,
        #[arg(long)]
        factories_first: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Validate a schedule, optionally checking each route's logical action.
    Verify {
        #[arg(short, long)]
        input: PathBuf,
        #[arg(short, long)]
        schedule: PathBuf,
        #[arg(long)]
        oracle: bool,
        #[arg(long, default_value_t = 8)]
        seeds: u64,
    },
    /// Metrics and optional resource estimate as JSON.
    Stats {
        #[arg(short, long)]
        schedule: PathBuf,
        #[arg(long, requires = "perr")]
        distance: Option<u32>,
        #[arg(long, requires = "distance")]
        perr: Option<f64>,
    },
    /// Plain `x y t instr` voxel list.
    Export {
        #[arg(short, long)]
        schedule: PathBuf,
        #[arg(long)]
        voxels: PathBuf,
    },
}

enum Failure {
    Lib(Error),
    Open(PathBuf, io::Error),
    Verification(Value),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Lib(e.into())
    }
}

fn error_kind(e: &Error) -> (&'static str, u8) {
    match e {
        Error::Routing { .. } => ("routing", 2),
        Error::Io(_) => ("io", 74),
        Error::Internal(_) => ("internal", 70),
        Error::Parse { .. } => ("parse", 65),
        Error::UnsupportedGate(_) => ("unsupported_gate", 65),
        Error::Capacity { .. } => ("capacity", 65),
        Error::Domain(_) => ("domain", 65),
        _ => ("data", 65),
    }
}

fn report(f: Failure) -> ExitCode {
    let (value, code) = match f {
        Failure::Lib(e) => {
            let (kind, code) = error_kind(&e);
            (json!({"error": kind, "message": e.to_string()}), code)
        }
        Failure::Open(path, e) => {
            let code = if e.kind() == io::ErrorKind::NotFound { 66 } else { 74 };
            let kind = if code == 66 { "no_input" } else { "io" };
            (json!({"error": kind, "message": format!("{}: {e}", path.display())}), code)
        }
        Failure::Verification(v) => (v, 1),
    };
    eprintln!("{value}");
    ExitCode::from(code)
}

fn open(path: &Path) -> Result<BufReader<File>, Failure> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Failure::Open(path.to_path_buf(), e))
}

fn read_to_string(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Open(path.to_path_buf(), e))
}

fn write_output(path: Option<&Path>, body: impl FnOnce(&mut dyn Write) -> lattice_sched::Result<()>) -> Result<(), Failure> {
    match path {
        Some(p) => {
            let f = File::create(p).map_err(|e| Failure::Open(p.to_path_buf(), e))?;
            let mut w = BufWriter::new(f);
            body(&mut w)?;
            w.flush()?;
        }
        None => {
            let stdout = io::stdout();
            let mut w = stdout.lock();
            body(&mut w)?;
            w.flush()?;
        }
    }
    Ok(())
}

fn load_plane(instrs: &InstructionList, sched: &Schedule) -> Result<QubitPlane, Failure> {
    Ok(frontend::place(
        instrs,
        Some(sched.plane.plane_size),
        sched.plane.factories_first,
    )?)
}

fn oracle_verdicts(
    instrs: &InstructionList,
    plane: &QubitPlane,
    sched: &Schedule,
    seeds: u64,
) -> Vec<Value> {
    let mut failed = Vec::new();
    for (instr, routed) in instrs.iter().zip(&sched.routed) {
        let verdict = match &routed.edges {
            None => verify_path_action(&routed.path, LogicalOp::for_basis(instr.basis), seeds),
            Some(edges) => boundary_of_basis(instr.basis).and_then(|b| {
                let tree = RoutingTree {
                    voxels: routed.path.voxels.clone(),
                    edges: edges.clone(),
                    targets: instr.qubits.iter().map(|q| plane.cell_of(*q)).collect(),
                };
                verify_tree_action(&tree, b, seeds)
            }),
        };
        match verdict {
            Ok(true) => {}
            Ok(false) => failed.push(json!({"i": instr.index, "reason": "logical action differs"})),
            Err(e) => failed.push(json!({"i": instr.index, "reason": e.to_string()})),
        }
    }
    failed
}

fn execute(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Gen {
            kind,
            m,
            plane_size,
            seed,
            output,
        } => {
            let list = match kind {
                Kind::Random => bench::gen_random(m, plane_size, seed)?,
                Kind::Stair => bench::gen_stair(m)?,
                Kind::Hub => bench::gen_hub(m)?,
            };
            write_output(output.as_deref(), |w| list.write_to(w))
        }
        Command::Lower {
            input,
            output,
            mode,
            factories,
        } => {
            let gates = frontend::parse_circuit(open(&input)?)?;
            let mode = match mode {
                Mode::Measurements => LowerMode::Measurements,
                Mode::Cnot => LowerMode::Cnot,
            };
            let lowered = frontend::lower(&gates, mode, factories)?;
            write_output(output.as_deref(), |w| lowered.instrs.write_to(w))?;
            let dropped: Vec<String> = lowered.dropped.iter().map(|g| g.to_string()).collect();
            eprintln!("{}", json!({"instructions": lowered.instrs.len(), "dropped": dropped}));
            Ok(())
        }
        Command::Schedule {
            algo,
            kink,
            input,
            plane_size,
            factories_first,
            output,
        } => {
            let instrs = InstructionList::read_from(open(&input)?)?;
            let plane = frontend::place(&instrs, plane_size, factories_first)?;
            let t0 = Instant::now();
            let mut sched = schedulers::run(algo.into(), &instrs, &plane, kink == Switch::On)?;
            let elapsed = t0.elapsed().as_secs_f64();
            sched.plane.factories_first = factories_first;
            write_output(output.as_deref(), |w| {
                w.write_all(sched.to_json().as_bytes())?;
                w.write_all(b"\n")?;
                Ok(())
            })?;
            if output.is_some() {
                println!(
                    "{}",
                    json!({
                        "algorithm": sched.algorithm.tag(),
                        "total_beats": sched.total_beats,
                        "wall_time_secs": elapsed,
                    })
                );
            }
            Ok(())
        }
        Command::Verify {
            input,
            schedule,
            oracle,
            seeds,
        } => {
            let instrs = InstructionList::read_from(open(&input)?)?;
            let sched = Schedule::from_json(&read_to_string(&schedule)?)?;
            let plane = load_plane(&instrs, &sched)?;
            let report = validate_schedule(&instrs, &plane, &sched, sched.kink_condition);
            let failed = if oracle && report.passed() {
                oracle_verdicts(&instrs, &plane, &sched, seeds)
            } else {
                Vec::new()
            };
            let ok = report.passed() && failed.is_empty();
            let mut out = json!({
                "valid": report.passed(),
                "violations": report.violations,
            });
            if oracle {
                out["oracle"] = json!({
                    "checked": if report.passed() { sched.routed.len() } else { 0 },
                    "failed": failed,
                });
            }
            println!("{out}");
            if ok {
                Ok(())
            } else {
                Err(Failure::Verification(json!({"error": "verification", "report": out})))
            }
        }
        Command::Stats {
            schedule,
            distance,
            perr,
        } => {
            let sched = Schedule::from_json(&read_to_string(&schedule)?)?;
            let metrics = compute_metrics(&sched)?;
            let mut out = serde_json::to_value(&metrics).map_err(|e| Error::Internal(e.to_string()))?;
            if let (Some(d), Some(p)) = (distance, perr) {
                let side = 2 * sched.plane.plane_size as u64 - 1;
                let est = resource_estimate(metrics.active_volume, side * side, d, p)?;
                out["resources"] = serde_json::to_value(est).map_err(|e| Error::Internal(e.to_string()))?;
            }
            println!("{out}");
            Ok(())
        }
        Command::Export { schedule, voxels } => {
            let sched = Schedule::from_json(&read_to_string(&schedule)?)?;
            write_output(Some(&voxels), |w| {
                for r in &sched.routed {
                    for v in &r.path.voxels {
                        writeln!(w, "{} {} {} {}", v.cell.x, v.cell.y, v.t, r.instr_index)?;
                    }
                }
                Ok(())
            })
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            eprintln!("{}", json!({"error": "usage", "message": e.to_string()}));
            return ExitCode::from(64);
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => report(f),
    }
}
