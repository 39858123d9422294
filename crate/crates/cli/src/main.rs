use std::path::PathBuf;
use std::process::ExitCode;

use acdd_cli::config::{Command, Overrides, Scale};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "acdd", version, about = "Active cyber defense dynamics experiments")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Rescale generated graphs to the desk size (n = 500, same mean degree).
    #[arg(long, value_enum)]
    scale: Option<Scale>,
}

#[derive(Args)]
struct FigureArgs {
    /// One of fig2a..fig2d, fig3, fig4, fig5b, fig6a..fig6d, fig7, fig8a, fig8b.
    id: String,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, value_enum, default_value = "desk")]
    scale: Scale,
}

#[derive(Subcommand)]
enum Cmd {
    Simulate(RunArgs),
    Equilibria(RunArgs),
    Threshold(RunArgs),
    Hopf(RunArgs),
    Sweep(RunArgs),
    StructuralSweep(RunArgs),
    Lyapunov(RunArgs),
    PerturbEstimate(RunArgs),
    /// Emit the dataset behind one published figure.
    Figure(FigureArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, args) = match cli.command {
        Cmd::Figure(a) => {
            return report(acdd_cli::run_figure(&a.id, a.scale, a.seed, a.out));
        }
        Cmd::Simulate(a) => (Command::Simulate, a),
        Cmd::Equilibria(a) => (Command::Equilibria, a),
        Cmd::Threshold(a) => (Command::Threshold, a),
        Cmd::Hopf(a) => (Command::Hopf, a),
        Cmd::Sweep(a) => (Command::Sweep, a),
        Cmd::StructuralSweep(a) => (Command::StructuralSweep, a),
        Cmd::Lyapunov(a) => (Command::Lyapunov, a),
        Cmd::PerturbEstimate(a) => (Command::PerturbEstimate, a),
    };
    let overrides = Overrides {
        command: Some(command),
        seed: args.seed,
        scale: args.scale,
    };
    report(acdd_cli::run_config(&args.config, overrides, args.out))
}

fn report(result: Result<acdd_cli::RunSummary, acdd_cli::error::CliError>) -> ExitCode {
    match result {
        Ok(summary) => {
            for f in &summary.outputs {
                println!("{}", summary.out_dir.join(&f.file).display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            let record = e.record();
            eprintln!("error [{}]: {}", record.error, record.message);
            ExitCode::from(record.exit_code as u8)
        }
    }
}
