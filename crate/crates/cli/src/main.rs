//! `arise-forge`: find fused custom instructions for an RV32 program.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use arise_core::pipeline::{run_evaluate, run_generate, RunOptions, RunOutput, Source};
use arise_core::{Error, LivenessMode, MetricKind};
use clap::{Args, Parser, Subcommand};
use log::error;

#[derive(Parser, Debug)]
#[command(name = "arise-forge", version, about = "Discover fused custom instructions for RV32 programs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate, select and verify fused instructions; write CoreDSL and a report.
    Generate(Common),
    /// Apply a previous report's selection to a program and recount.
    Evaluate {
        #[command(flatten)]
        common: Common,
        /// Report written by an earlier `generate` run.
        #[arg(long)]
        selection: PathBuf,
    },
}

#[derive(Args, Debug)]
struct Common {
    /// objdump-style disassembly listing.
    #[arg(long)]
    asm: PathBuf,
    /// Execution trace: one hex PC per line, or `pc,count` aggregates.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Metric to optimize.
    #[arg(long, default_value = "static-size", value_parser = parse_metric)]
    target: MetricKind,
    /// Total opcode width of a fused instruction (7 major bits plus minor bits).
    #[arg(long, default_value_t = 9)]
    opcode_bits: u8,
    /// `strict` requires a single live-out; `paper` lets intermediates escape.
    #[arg(long, default_value = "strict", value_parser = parse_liveness)]
    liveness: LivenessMode,
    #[arg(long, default_value = "fused.core_desc")]
    out_coredsl: PathBuf,
    #[arg(long, default_value = "report.json")]
    out_report: PathBuf,
    /// Seed for the equivalence trials.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Allow multiply/divide instructions in fused sequences.
    #[arg(long)]
    m_ext: bool,
    #[arg(long, default_value_t = 1000)]
    equivalence_trials: u32,
    /// Name of the emitted instruction set.
    #[arg(long, default_value = "XFused")]
    set_name: String,
}

fn parse_metric(s: &str) -> Result<MetricKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_liveness(s: &str) -> Result<LivenessMode, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

impl Common {
    fn options(&self) -> RunOptions {
        RunOptions {
            metric: self.target,
            opcode_bits: self.opcode_bits,
            liveness: self.liveness,
            seed: self.seed,
            include_m_ext: self.m_ext,
            equivalence_trials: self.equivalence_trials,
            set_name: self.set_name.clone(),
        }
    }
}

fn read(path: &Path) -> Result<String, Error> {
    fs::read_to_string(path).map_err(|source| Error::Io { path: path.display().to_string(), source })
}

fn write(path: &Path, text: &str) -> Result<(), Error> {
    fs::write(path, text).map_err(|source| Error::Io { path: path.display().to_string(), source })
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Parse { .. } | Error::Io { .. } | Error::Selection(_) => 1,
        Error::Config(_) => 2,
        Error::Contract(_) | Error::Invariant(_) => 3,
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Generate(c) => {
            let opts = c.options();
            // Reject bad configurations before touching the inputs.
            opts.validate(c.trace.is_some())?;
            let asm = read(&c.asm)?;
            let trace = c.trace.as_deref().map(read).transpose()?;
            let asm_name = c.asm.display().to_string();
            let trace_name = c.trace.as_ref().map(|p| p.display().to_string()).unwrap_or_default();
            let out = run_generate(
                Source::new(&asm_name, &asm),
                trace.as_deref().map(|t| Source::new(&trace_name, t)),
                &opts,
            )?;
            write(&c.out_coredsl, &out.coredsl)?;
            write(&c.out_report, &out.report_text)?;
            print_generate(&out);
        }
        Command::Evaluate { common: c, selection } => {
            let opts = c.options();
            opts.validate(c.trace.is_some())?;
            let asm = read(&c.asm)?;
            let trace = c.trace.as_deref().map(read).transpose()?;
            let sel = read(&selection)?;
            let asm_name = c.asm.display().to_string();
            let trace_name = c.trace.as_ref().map(|p| p.display().to_string()).unwrap_or_default();
            let sel_name = selection.display().to_string();
            let out = run_evaluate(
                Source::new(&asm_name, &asm),
                trace.as_deref().map(|t| Source::new(&trace_name, t)),
                Source::new(&sel_name, &sel),
                &opts,
            )?;
            write(&c.out_report, &out.report_text)?;
            for r in &out.report.selected {
                println!("{:<24} {} match(es), {} replacement(s)", r.name, r.match_count, r.replacements);
            }
            println!("{}", out.totals_line());
        }
    }
    Ok(())
}

fn print_generate(out: &RunOutput) {
    for line in out.summary_lines() {
        println!("{line}");
    }
    println!(
        "{} candidate(s), {} selected; {}",
        out.candidates_generated,
        out.selected.len(),
        out.totals_line()
    );
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("ARISE_FORGE_LOG", "warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            error!("{e}");
            eprintln!("arise-forge: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
