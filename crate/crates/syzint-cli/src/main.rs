use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use syzint::driver::{solve, SolveOptions, SolveStatus, Strategy, SystemFile};
use syzint::reduction::RankingKind;

#[derive(Parser)]
#[command(
    name = "syzint",
    version,
    about = "Integrate overdetermined linear PDE systems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum RankingArg {
    Total,
    Lex,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a system file and print the report as JSON.
    Solve {
        #[arg(long)]
        input: PathBuf,
        /// `syzygy`, `conventional` or a comma separated action list.
        #[arg(long)]
        strategy: Option<String>,
        /// Write one JSON line per step here.
        #[arg(long)]
        trace: Option<PathBuf>,
        #[arg(long)]
        max_steps: Option<usize>,
        #[arg(long, value_enum)]
        ranking: Option<RankingArg>,
        /// Largest variable subset tried for divergence forms.
        #[arg(long)]
        max_divergence_subset: Option<usize>,
    },
}

fn run(cli: Cli) -> Result<ExitCode, syzint::Error> {
    let Command::Solve {
        input,
        strategy,
        trace,
        max_steps,
        ranking,
        max_divergence_subset,
    } = cli.command;
    let file = SystemFile::from_json(&std::fs::read_to_string(&input)?)?;
    let opts = SolveOptions {
        strategy: strategy.map(|s| s.parse::<Strategy>()).transpose()?,
        ranking: ranking.map(|r| match r {
            RankingArg::Total => RankingKind::TotalDegree,
            RankingArg::Lex => RankingKind::Lex,
        }),
        max_steps,
        max_divergence_subset,
    };
    let (report, steps) = solve(&file, &opts)?;
    if let Some(path) = trace {
        let mut out = String::new();
        for s in &steps {
            out.push_str(&serde_json::to_string(s)?);
            out.push('\n');
        }
        std::fs::write(path, out)?;
    }
    // a closed pipe (`| head`) is not an error worth a panic
    let _ = writeln!(std::io::stdout().lock(), "{}", report.to_json());
    if !report.oracle.residuals_vanish {
        eprintln!("error: the solution does not satisfy the input equations");
        return Ok(ExitCode::from(1));
    }
    Ok(match report.status {
        SolveStatus::Solved | SolveStatus::Converged => ExitCode::SUCCESS,
        SolveStatus::Incomplete => ExitCode::from(2),
    })
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
