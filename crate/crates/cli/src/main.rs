//! pathgen command-line interface.
//!
//! Subcommands map onto the pipeline stages: `analyze` emits the knowledge
//! base, `paths` lists a method's loop-once CFG paths, `distill` emits one
//! distilled context as canonical JSON, `generate` runs the full pipeline,
//! and `report` re-renders a previous run.
//!
//! Exit codes: 0 on completion (even with invalid tests), 2 when the project
//! does not compile, 3 on configuration errors.

use clap::{Args, Parser, Subcommand};
use pathgen_core::distill::distill;
use pathgen_core::genloop::external::DEFAULT_TIMEOUT_SECS;
use pathgen_core::harness::{
    load_project, report_render, resolve_method_name, run, BackendChoice, FocalFilter,
    ReportFormat, RunConfig, RunError,
};
use pathgen_core::knowledge::{build_kb, save_kb, DEFAULT_PATH_CAP};
use pathgen_core::lang::{check, ProgramIndex};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "pathgen", version, about = "Path-sensitive unit test generation for SJ projects")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Extract the knowledge base of a project and write it as JSON.
    Analyze {
        /// Project directory containing `.sj` files.
        dir: PathBuf,
        /// Output file (defaults to stdout).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_PATH_CAP)]
        path_cap: usize,
    },
    /// List the loop-once CFG paths of one method.
    Paths {
        dir: PathBuf,
        /// Method reference: `Class#name` or `Class#name/(types)`.
        #[arg(long)]
        method: String,
        #[arg(long, default_value_t = DEFAULT_PATH_CAP)]
        path_cap: usize,
    },
    /// Emit the distilled context of one (method, path) pair as JSON.
    Distill {
        dir: PathBuf,
        #[arg(long)]
        method: String,
        /// Path index in enumeration order.
        #[arg(long)]
        path: usize,
        #[arg(long, default_value_t = 3)]
        recursion_depth: u32,
        #[arg(long, default_value_t = DEFAULT_PATH_CAP)]
        path_cap: usize,
    },
    /// Run the full pipeline: extract, distill, generate, validate, report.
    Generate(GenerateArgs),
    /// Re-render the report of a previous run directory.
    Report {
        run_dir: PathBuf,
        #[arg(long, value_enum, default_value = "table")]
        format: Format,
    },
}

#[derive(Args)]
struct GenerateArgs {
    dir: PathBuf,
    /// JSON config file mirroring the run configuration; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Backend: `brute-force`, `scripted:<file>`, or `external:<command>`.
    #[arg(long)]
    backend: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    max_rounds: Option<u32>,
    #[arg(long)]
    path_cap: Option<usize>,
    #[arg(long)]
    recursion_depth: Option<u32>,
    #[arg(long)]
    parallelism: Option<usize>,
    /// External backend timeout in seconds.
    #[arg(long)]
    timeout: Option<u64>,
    /// Focal methods (repeatable); default selects branching methods with
    /// data dependencies.
    #[arg(long = "focal")]
    focals: Vec<String>,
    /// Select every method instead of the default filter.
    #[arg(long)]
    all_methods: bool,
    /// Measure coverage over the whole project instead of the focal set.
    #[arg(long)]
    coverage_all: bool,
    #[arg(long, value_enum, default_value = "table")]
    format: Format,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum Format {
    Json,
    Table,
}

impl From<Format> for ReportFormat {
    fn from(f: Format) -> ReportFormat {
        match f {
            Format::Json => ReportFormat::Json,
            Format::Table => ReportFormat::Table,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Compile(message)) => {
            eprintln!("{message}");
            ExitCode::from(2)
        }
        Err(CliError::Config(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(3)
        }
    }
}

enum CliError {
    Compile(String),
    Config(String),
}

impl From<RunError> for CliError {
    fn from(e: RunError) -> CliError {
        match e {
            RunError::Compile(_) => CliError::Compile(e.to_string()),
            other => CliError::Config(other.to_string()),
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Analyze { dir, out, path_cap } => {
            let (units, index) = load_checked(&dir)?;
            let kb = build_kb(&units, &index, path_cap);
            let json = save_kb(&kb);
            match out {
                Some(path) => std::fs::write(path, json)
                    .map_err(|e| CliError::Config(e.to_string()))?,
                None => println!("{json}"),
            }
            Ok(())
        }
        Command::Paths {
            dir,
            method,
            path_cap,
        } => {
            let (units, index) = load_checked(&dir)?;
            let kb = build_kb(&units, &index, path_cap);
            let focal =
                resolve_method_name(&kb, &method).map_err(|e| CliError::Config(e.to_string()))?;
            let cfg = kb
                .cfg_of(&focal)
                .map_err(|e| CliError::Config(e.to_string()))?;
            let set = kb
                .paths_of(&focal)
                .map_err(|e| CliError::Config(e.to_string()))?;
            println!(
                "{}: {} path(s){}",
                focal,
                set.paths.len(),
                if set.truncated { " (truncated)" } else { "" }
            );
            for (i, path) in set.paths.iter().enumerate() {
                println!("  [{i}] nodes {:?}", path.node_ids);
                if path.obligations.is_empty() {
                    println!("      no branch obligations");
                }
                for (node, outcome) in &path.obligations {
                    match &cfg.node(*node).kind {
                        pathgen_core::knowledge::NodeKind::Branch { info } => {
                            println!("      {} -> {}", info.guard_text(), outcome);
                        }
                        _ => println!("      n{node} -> {outcome}"),
                    }
                }
            }
            Ok(())
        }
        Command::Distill {
            dir,
            method,
            path,
            recursion_depth,
            path_cap,
        } => {
            let (units, index) = load_checked(&dir)?;
            let kb = build_kb(&units, &index, path_cap);
            let focal =
                resolve_method_name(&kb, &method).map_err(|e| CliError::Config(e.to_string()))?;
            let ctx = distill(&focal, path, &kb, recursion_depth)
                .map_err(|e| CliError::Config(e.to_string()))?;
            println!("{}", ctx.canonical_json());
            Ok(())
        }
        Command::Generate(args) => {
            let config = build_config(args.config.as_deref(), &args)?;
            let artifacts = run(&config)?;
            println!(
                "{}",
                report_render(&artifacts.report, ReportFormat::from(args.format))
            );
            eprintln!(
                "phases: extract {}ms, distill {}ms, generate {}ms, validate {}ms",
                artifacts.timings.extract_ms,
                artifacts.timings.distill_ms,
                artifacts.timings.generate_ms,
                artifacts.timings.validate_ms
            );
            Ok(())
        }
        Command::Report { run_dir, format } => {
            let text = std::fs::read_to_string(run_dir.join("report.json"))
                .map_err(|e| CliError::Config(format!("cannot read report: {e}")))?;
            let report: pathgen_core::harness::RunReport = serde_json::from_str(&text)
                .map_err(|e| CliError::Config(format!("bad report: {e}")))?;
            println!("{}", report_render(&report, ReportFormat::from(format)));
            Ok(())
        }
    }
}

fn load_checked(
    dir: &std::path::Path,
) -> Result<(Vec<pathgen_core::lang::SourceUnit>, ProgramIndex), CliError> {
    let units = load_project(dir).map_err(CliError::from)?;
    let diags = check(&units);
    if !diags.is_empty() {
        let rendered: Vec<String> = diags.iter().map(|d| d.to_string()).collect();
        return Err(CliError::Compile(rendered.join("\n")));
    }
    let (index, _) = ProgramIndex::build(&units);
    Ok((units, index))
}

fn build_config(
    config_file: Option<&std::path::Path>,
    args: &GenerateArgs,
) -> Result<RunConfig, CliError> {
    let mut config = match config_file {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("cannot read config: {e}")))?;
            RunConfig::from_json(&text)
                .map_err(|e| CliError::Config(format!("bad config: {e}")))?
        }
        None => RunConfig::default(),
    };
    config.project_dir = args.dir.clone();
    if let Some(out) = &args.out {
        config.output_dir = out.clone();
    }
    if let Some(backend) = &args.backend {
        config.backend = parse_backend(backend, args.timeout)?;
    }
    if let Some(rounds) = args.max_rounds {
        if rounds == 0 {
            return Err(CliError::Config(
                "max_rounds must be at least 1".to_string(),
            ));
        }
        config.max_rounds = rounds;
    }
    if let Some(cap) = args.path_cap {
        config.path_cap = cap;
    }
    if let Some(depth) = args.recursion_depth {
        config.recursion_depth = depth;
    }
    if let Some(par) = args.parallelism {
        config.parallelism = par;
    }
    if args.all_methods {
        config.focal_filter = FocalFilter::All;
    }
    if !args.focals.is_empty() {
        config.focal_filter = FocalFilter::Explicit {
            methods: args.focals.clone(),
        };
    }
    if args.coverage_all {
        config.coverage_scope_all = true;
    }
    Ok(config)
}

fn parse_backend(spec: &str, timeout: Option<u64>) -> Result<BackendChoice, CliError> {
    if spec == "brute-force" {
        return Ok(BackendChoice::BruteForce);
    }
    if let Some(file) = spec.strip_prefix("scripted:") {
        return Ok(BackendChoice::Scripted {
            file: PathBuf::from(file),
        });
    }
    if let Some(command) = spec.strip_prefix("external:") {
        return Ok(BackendChoice::External {
            command: command.to_string(),
            timeout_secs: timeout.unwrap_or(DEFAULT_TIMEOUT_SECS),
        });
    }
    Err(CliError::Config(format!(
        "unknown backend `{spec}` (expected brute-force, scripted:<file>, or external:<command>)"
    )))
}
