use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use germnorm::certificate::{run_to_text, Command};
use germnorm::Error;

/// Exact normal forms for germs of functions, 1-forms and planar vector fields.
#[derive(Parser, Debug)]
#[command(name = "germnorm", version)]
struct Cli {
    /// One of: prepare-function, prepare-meromorphic, prepare-form,
    /// prepare-closed-form, prepare-k1, normalize-vf, refine-vf, verify.
    #[arg(long)]
    command: String,
    #[arg(long)]
    input: PathBuf,
    /// Write the output document here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Truncation order N; defaults to the input's own.
    #[arg(long)]
    trunc: Option<usize>,
    /// Require real coefficients in input and output.
    #[arg(long)]
    real: bool,
}

fn job(cli: &Cli) -> Result<String, Error> {
    let command = Command::parse(&cli.command)?;
    let text = std::fs::read_to_string(&cli.input)
        .map_err(|e| Error::Parse(format!("cannot read {}: {}", cli.input.display(), e)))?;
    run_to_text(command, &text, cli.trunc, cli.real)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if matches!(e.kind(), clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion) => {
            print!("{}", e);
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprint!("{}", e);
            return ExitCode::from(5);
        }
    };
    match job(&cli) {
        Ok(out) => match &cli.output {
            Some(p) => match std::fs::write(p, out) {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) => {
                    eprintln!("error: cannot write {}: {}", p.display(), e);
                    ExitCode::from(5)
                }
            },
            None => {
                print!("{}", out);
                ExitCode::SUCCESS
            }
        },
        Err(e) => {
            eprintln!("error: {}", e);
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
