use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use mcdp_cli::export::{export, Artifact};
use mcdp_cli::quantity::{parse_binding, Quantity};
use mcdp_cli::query::{bind, prepare, render_csv, render_json, render_text, restrict, run};
use mcdp_cli::sweep::{sweep, to_csv, to_json, Axis, SweepSpec};
use mcdp_cli::{exit, load, CliError};
use mcdp_core::solver::SolveStatus;
use mcdp_core::IterationBudget;

#[derive(Parser)]
#[command(name = "mcdp", version, about = "Solve, sweep and export monotone co-design models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Minimal resources for one functionality.
    Solve(SolveArgs),
    /// Solve on a grid over one or two functionalities.
    Sweep(SweepArgs),
    /// Write the graph, the composition tree or a Kleene trace.
    Export(ExportArgs),
    /// Compile models and report their interfaces.
    Check { files: Vec<PathBuf> },
}

#[derive(Args)]
struct Common {
    /// Model file; other models are looked up in the same directory.
    file: PathBuf,
    /// Functionality binding `name=value[unit]`; unit defaults to the declared one.
    #[arg(short = 'f', long = "fun", value_parser = parse_binding)]
    bindings: Vec<(String, Quantity)>,
    /// Maximum Kleene iterations per loop evaluation.
    #[arg(long, default_value_t = 1000)]
    budget: usize,
    /// Resources to keep, comma separated; the rest are ignored (terminated with ⊤).
    #[arg(long, value_delimiter = ',')]
    objective: Option<Vec<String>>,
    /// Hard limit `name=value[unit]` on a resource, which is then not an objective.
    #[arg(long = "limit", value_parser = parse_binding)]
    limits: Vec<(String, Quantity)>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
    /// Also write the Kleene traces as JSON lines.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: Common,
    /// First axis `name[unit]:min:max:steps[:log]`.
    #[arg(long, value_parser = Axis::parse)]
    x: Axis,
    /// Second axis, same syntax.
    #[arg(long, value_parser = Axis::parse)]
    y: Option<Axis>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    /// Output file; standard output when absent.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
#[command(group(ArgGroup::new("what").required(true)))]
struct ExportArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, group = "what")]
    dot: bool,
    #[arg(long, group = "what")]
    tree: bool,
    #[arg(long, group = "what")]
    tree_indented: bool,
    #[arg(long, group = "what")]
    tree_dot: bool,
    #[arg(long, group = "what")]
    trace: bool,
}

fn budget(n: usize) -> Result<IterationBudget, CliError> {
    Ok(IterationBudget::new(n)?)
}

fn io(e: std::io::Error) -> CliError {
    CliError::Io(e.to_string())
}

fn compiled(c: &Common) -> Result<mcdp_core::lang::CompiledModel, CliError> {
    restrict(load(&c.file)?, c.objective.as_deref(), &c.limits)
}

fn solve_cmd(a: SolveArgs) -> Result<i32, CliError> {
    let model = compiled(&a.common)?;
    let p = prepare(&model)?;
    let f = bind(&p.provides, &a.common.bindings)?;
    let r = run(&p, &f, budget(a.common.budget)?)?;
    let out = match a.format {
        Format::Text => render_text(&p, &f, &r),
        Format::Json => format!("{:#}\n", render_json(&p, &f, &r)),
        Format::Csv => render_csv(&p, &r),
    };
    print!("{out}");
    if let Some(path) = a.trace {
        std::fs::write(path, r.trace_json_lines()).map_err(io)?;
    }
    Ok(if r.status == SolveStatus::IterationCapReached { exit::ITERATION_CAP } else { exit::OK })
}

fn sweep_cmd(a: SweepArgs) -> Result<i32, CliError> {
    let model = compiled(&a.common)?;
    let p = prepare(&model)?;
    let spec = SweepSpec { x: a.x, y: a.y, fixed: a.common.bindings };
    let rows = sweep(&p, &spec, budget(a.common.budget)?)?;
    let out = match a.format {
        Format::Json => format!("{:#}\n", to_json(&p, &rows)),
        Format::Csv | Format::Text => to_csv(&p, &spec, &rows),
    };
    match a.output {
        Some(path) => std::fs::write(path, out).map_err(io)?,
        None => std::io::stdout().write_all(out.as_bytes()).map_err(io)?,
    }
    let capped = rows.iter().any(|r| r.status == SolveStatus::IterationCapReached);
    Ok(if capped { exit::ITERATION_CAP } else { exit::OK })
}

fn export_cmd(a: ExportArgs) -> Result<i32, CliError> {
    let model = compiled(&a.common)?;
    let what = if a.dot {
        Artifact::Dot
    } else if a.tree {
        Artifact::Tree
    } else if a.tree_indented {
        Artifact::TreeIndented
    } else if a.tree_dot {
        Artifact::TreeDot
    } else {
        Artifact::Trace
    };
    let f = match what {
        Artifact::Trace => Some(bind(&model.provides, &a.common.bindings)?),
        _ => None,
    };
    let b = budget(a.common.budget)?;
    print!("{}", export(&model, what, f.as_ref().map(|f| (f, b)))?);
    Ok(exit::OK)
}

fn check_cmd(files: Vec<PathBuf>) -> Result<i32, CliError> {
    let mut code = exit::OK;
    for file in files {
        match load(&file) {
            Ok(m) => {
                let names = |ps: &[mcdp_core::lang::PortInfo]| ps.iter().map(|p| p.name.as_str()).collect::<Vec<_>>().join(", ");
                println!(
                    "{}: ok ({} nodes, {} edges; provides {}; requires {})",
                    file.display(),
                    m.graph.nodes.len(),
                    m.graph.edges.len(),
                    names(&m.provides),
                    names(&m.requires)
                );
            }
            Err(e) => {
                eprintln!("{e}");
                code = exit::ERROR;
            }
        }
    }
    Ok(code)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve(a) => solve_cmd(a),
        Command::Sweep(a) => sweep_cmd(a),
        Command::Export(a) => export_cmd(a),
        Command::Check { files } => check_cmd(files),
    };
    let code = result.unwrap_or_else(|e| {
        eprintln!("{e}");
        exit::ERROR
    });
    ExitCode::from(code as u8)
}
