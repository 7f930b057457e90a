use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use paralab::verify::EstimateReport;
use paralab_cli::output::{output_dir, write_fields, write_reports};
use paralab_cli::run::{execute, solve};
use paralab_cli::scenario::{Format, Scenario};
use paralab_cli::study::study;
use paralab_cli::CliError;

#[derive(Parser)]
#[command(name = "paralab", version, about = "Solve scenarios, run estimate checkers and refinement studies")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the scenario and export the computed field.
    Solve(Common),
    /// Solve the scenario and run its checkers.
    Verify(Common),
    /// Rerun the scenario on successively refined grids and fit rates.
    Study {
        #[command(flatten)]
        common: Common,
        /// Number of grids, each halving h and dt.
        #[arg(long, default_value_t = 3)]
        levels: u32,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    /// Output directory (default: $PARALAB_OUT, then output.dir, then ./out).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    /// Seed for random pair sampling in fits.
    #[arg(long)]
    seed: Option<u64>,
    /// Print the canonical form of the parsed scenario and exit.
    #[arg(long)]
    echo: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
    Both,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Format {
        match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
            FormatArg::Both => Format::Both,
        }
    }
}

fn load(c: &Common) -> Result<Scenario, CliError> {
    let text = std::fs::read_to_string(&c.config)?;
    let mut s = Scenario::parse(&text, &c.config.display().to_string())?;
    if let Some(seed) = c.seed {
        s.seed = seed;
    }
    if let Some(f) = c.format {
        s.output.format = Some(f.into());
    }
    Ok(s)
}

fn summarize(reports: &[EstimateReport]) {
    for r in reports {
        let status = if r.skipped { "skip" } else if r.pass { "pass" } else { "FAIL" };
        println!("{status:4}  {:<28} C = {:.4e}  ({})", r.name, r.implied_constant, r.estimate);
    }
}

fn run(cli: Cli) -> Result<bool, CliError> {
    let (common, levels) = match &cli.command {
        Command::Solve(c) | Command::Verify(c) => (c, None),
        Command::Study { common, levels } => (common, Some(*levels)),
    };
    let s = load(common)?;
    if common.echo {
        print!("{}", s.echo());
        return Ok(true);
    }
    let dir = output_dir(common.out.as_deref(), &s);
    let format = s.output.format.unwrap_or(Format::Both);
    let wants_fields = s.output.fields.unwrap_or(s.checks.is_empty());
    let (reports, passed) = match (&cli.command, levels) {
        (Command::Solve(_), _) => {
            let (u, ..) = solve(&s)?;
            for p in write_fields(&dir, &s.id, &u)? {
                println!("wrote {}", p.display());
            }
            return Ok(true);
        }
        (_, Some(levels)) => {
            let out = study(&s, levels)?;
            if wants_fields {
                if let Some(last) = out.levels.last() {
                    write_fields(&dir, &s.id, &last.field)?;
                }
            }
            let passed = out.passed();
            (out.reports, passed)
        }
        _ => {
            let out = execute(&s)?;
            if wants_fields {
                write_fields(&dir, &s.id, &out.field)?;
            }
            let passed = out.passed();
            (out.reports, passed)
        }
    };
    summarize(&reports);
    for p in write_reports(&dir, &s.id, format, &reports)? {
        println!("wrote {}", p.display());
    }
    Ok(passed)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
