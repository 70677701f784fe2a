use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, CommandFactory, Parser, Subcommand};

use stagekit::demos::{self, Demo, DemoKind};
use stagekit::driver::{compile_demo, Compiled, DriverOptions, Phase};
use stagekit::runtime::{execute_deg, interpret, schedule_deg, RunConfig, Value, DEFAULT_CHUNKS};
use stagekit::vectordsl::NormTier;

const EXIT_COMPILE: u8 = 2;
const EXIT_TRAP: u8 = 3;
const EXIT_IO: u8 = 74;
const EXIT_USAGE: u8 = 64;

/// Build, inspect and run the stagekit demo programs.
#[derive(Parser, Debug)]
#[command(name = "stagekit", version)]
struct Cli {
    #[command(flatten)]
    passes: PassFlags,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct PassFlags {
    /// Keep every parallel loop separate.
    #[arg(long, global = true)]
    no_fusion: bool,
    /// Disable hash-consing of pure nodes.
    #[arg(long, global = true)]
    no_cse: bool,
    /// Keep statements whose values are never used.
    #[arg(long, global = true)]
    no_dce: bool,
    /// Schedule every statement in the scope it was written in.
    #[arg(long, global = true)]
    no_code_motion: bool,
    /// Reject programs that would build records at run time.
    #[arg(long, global = true)]
    strict_records: bool,
    /// Allow re-association of Double arithmetic.
    #[arg(long, global = true)]
    fast_math: bool,
    /// How norm is provided: library, match or node.
    #[arg(long, global = true, value_name = "T", default_value = "library")]
    norm_tier: NormTier,
}

impl PassFlags {
    fn options(&self) -> DriverOptions {
        DriverOptions {
            fusion: !self.no_fusion,
            cse: !self.no_cse,
            dce: !self.no_dce,
            code_motion: !self.no_code_motion,
            strict_records: self.strict_records,
            fast_math: self.fast_math,
            norm_tier: self.norm_tier,
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// List the registered demos.
    List,
    /// Compile a demo and print its IR after one phase.
    Build {
        demo: String,
        #[arg(long, value_name = "PHASE", default_value = "scheduled")]
        dump_ir: Phase,
    },
    /// Write `<demo>.minic` and `<demo>.deg.json`.
    Codegen {
        demo: String,
        #[arg(long, value_name = "DIR", default_value = ".")]
        out: PathBuf,
    },
    /// Compile and execute a demo.
    Run {
        demo: String,
        /// Worker threads for the kernel executor.
        #[arg(long, value_name = "N")]
        threads: Option<usize>,
        /// Chunks per parallel loop.
        #[arg(long, value_name = "C", default_value_t = DEFAULT_CHUNKS)]
        chunks: usize,
        #[arg(long, value_name = "S", default_value_t = 1)]
        seed: u64,
        /// Check exactly-once visits and disjoint writes of loop kernels.
        #[arg(long)]
        debug_contracts: bool,
        /// Use the sequential reference interpreter.
        #[arg(long)]
        interpret: bool,
    },
    /// Print per-phase statistics as JSON.
    Stats { demo: String },
}

fn usage_exit(e: clap::Error) -> ExitCode {
    use clap::error::ErrorKind;
    let _ = e.print();
    match e.kind() {
        ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
        _ => {
            eprintln!("\n{}", Cli::command().render_help());
            ExitCode::from(EXIT_USAGE)
        }
    }
}

fn lookup(name: &str) -> Result<&'static Demo, ExitCode> {
    demos::find(name).ok_or_else(|| {
        let names: Vec<&str> = demos::DEMOS.iter().map(|d| d.name).collect();
        eprintln!("error: unknown demo `{name}`; available: {}", names.join(", "));
        ExitCode::from(EXIT_USAGE)
    })
}

fn compile(demo: &Demo, opts: &DriverOptions) -> Result<Compiled, ExitCode> {
    compile_demo(demo, opts).map_err(|e| {
        eprintln!("error: {e}");
        ExitCode::from(EXIT_COMPILE)
    })
}

fn default_threads() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

fn run(cli: Cli) -> Result<(), ExitCode> {
    let opts = cli.passes.options();
    match cli.command {
        Command::List => {
            for d in demos::DEMOS {
                let note = match d.kind {
                    DemoKind::Program => String::new(),
                    DemoKind::Rejected(diag) => format!(" (rejected: {diag})"),
                };
                println!("{:<20} {}{note}", d.name, d.summary);
            }
        }
        Command::Build { demo, dump_ir } => {
            let c = compile(lookup(&demo)?, &opts)?;
            print!("{}", c.snapshot(dump_ir).dump());
        }
        Command::Codegen { demo, out } => {
            let c = compile(lookup(&demo)?, &opts)?;
            let write = |name: String, text: String| {
                let path = out.join(name);
                std::fs::write(&path, text).map_err(|e| {
                    eprintln!("error: cannot write {}: {e}", path.display());
                    ExitCode::from(EXIT_IO)
                })
            };
            std::fs::create_dir_all(&out).map_err(|e| {
                eprintln!("error: cannot create {}: {e}", out.display());
                ExitCode::from(EXIT_IO)
            })?;
            write(format!("{demo}.minic"), c.minic())?;
            write(format!("{demo}.deg.json"), c.deg.to_json())?;
        }
        Command::Run {
            demo,
            threads,
            chunks,
            seed,
            debug_contracts,
            interpret: sequential,
        } => {
            let c = compile(lookup(&demo)?, &opts)?;
            let cfg = RunConfig {
                seed,
                debug_contracts,
                ..RunConfig::default()
            };
            let outcome = if sequential {
                interpret(&c.program, chunks.max(1), &cfg)
            } else {
                schedule_deg(&c.deg, threads.unwrap_or_else(default_threads))
                    .map_err(Into::into)
                    .and_then(|plan| execute_deg(&c.deg, &c.program, &plan.with_chunks(chunks), &cfg))
            };
            match outcome {
                Ok(r) => {
                    print!("{}", r.output);
                    if r.result != Value::Unit {
                        println!("result: {}", r.result);
                    }
                }
                Err(e) => {
                    eprintln!("trap: {e}");
                    return Err(ExitCode::from(EXIT_TRAP));
                }
            }
        }
        Command::Stats { demo } => {
            let c = compile(lookup(&demo)?, &opts)?;
            print!("{}", c.stats().to_json());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => return usage_exit(e),
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(code) => code,
    }
}
