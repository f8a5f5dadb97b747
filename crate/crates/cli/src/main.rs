use std::io;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use cup_cli::{cmd_bench, cmd_check, cmd_run, BenchOptions, Format, InferenceChoice, RunConfig};

#[derive(Parser)]
#[command(name = "cup", version, about = "Compile, run and benchmark cup programs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct SeedArg {
    /// Seed for every random choice.
    #[arg(long, env = "CUPPL_SEED", default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Compile and run a program, printing its result.
    Run {
        file: PathBuf,
        /// Replace the engine of every inference call.
        #[arg(long, value_enum, default_value_t = InferenceChoice::None)]
        inference: InferenceChoice,
        /// Samples for importance and mcmc; defaults to the program's count.
        #[arg(long)]
        samples: Option<usize>,
        /// Completed paths for enumerate; defaults to the program's count.
        #[arg(long)]
        max_executions: Option<usize>,
        /// Deepest enumerated choice sequence.
        #[arg(long)]
        max_depth: Option<usize>,
        #[command(flatten)]
        seed: SeedArg,
        #[arg(long, default_value_t = 0)]
        burn_in: usize,
        #[arg(long, default_value_t = 1)]
        thin: usize,
        #[arg(long, value_enum, default_value_t = Format::Tsv)]
        format: Format,
        #[arg(long)]
        dump_types: bool,
        #[arg(long)]
        dump_bytecode: bool,
        #[arg(long, default_value_t = cup_core::vm::DEFAULT_STACK_SLOTS)]
        stack_slots: usize,
        /// Run importance particles on one thread.
        #[arg(long)]
        sequential: bool,
    },
    /// Type-check a program without running it.
    Check {
        file: PathBuf,
        #[arg(long)]
        dump_types: bool,
    },
    /// Time the benchmark corpus after checking each result.
    Bench {
        /// Only benchmarks whose name contains this text.
        #[arg(long)]
        filter: Option<String>,
        #[arg(long, default_value_t = 3)]
        repeats: usize,
        #[command(flatten)]
        seed: SeedArg,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        max_executions: Option<usize>,
        #[arg(long)]
        max_depth: Option<usize>,
        /// 2 million importance samples, 100 thousand mcmc steps, 10
        /// thousand enumerated executions.
        #[arg(long)]
        full_scale: bool,
        /// Directory holding the `.cup` programs and `.expect` sidecars.
        #[arg(long)]
        corpus: Option<PathBuf>,
        #[arg(long)]
        sequential: bool,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let (mut out, mut err) = (io::stdout().lock(), io::stderr().lock());
    let code = match cli.command {
        Command::Run {
            file,
            inference,
            samples,
            max_executions,
            max_depth,
            seed,
            burn_in,
            thin,
            format,
            dump_types,
            dump_bytecode,
            stack_slots,
            sequential,
        } => {
            let cfg = RunConfig {
                inference,
                samples,
                max_executions,
                max_depth,
                seed: seed.seed,
                burn_in,
                thin,
                format,
                dump_types,
                dump_bytecode,
                stack_slots,
                parallel: !sequential,
                ..RunConfig::new(file)
            };
            cmd_run(&cfg, &mut out, &mut err)
        }
        Command::Check { file, dump_types } => cmd_check(&file, dump_types, &mut out, &mut err),
        Command::Bench {
            filter,
            repeats,
            seed,
            samples,
            max_executions,
            max_depth,
            full_scale,
            corpus,
            sequential,
        } => {
            let defaults = BenchOptions::default();
            let opts = BenchOptions {
                corpus: corpus.unwrap_or(defaults.corpus),
                filter,
                repeats,
                seed: seed.seed,
                samples,
                max_executions,
                max_depth,
                full_scale,
                parallel: !sequential,
            };
            cmd_bench(&opts, &mut out, &mut err)
        }
    };
    ExitCode::from(code as u8)
}
