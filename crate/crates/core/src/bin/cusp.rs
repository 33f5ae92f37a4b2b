use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use cusp::dsl::{self, Config, Diagnostic};

#[derive(Parser)]
#[command(name = "cusp", version, about = "Run scripts over abstract Cuntz semigroups")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Evaluate a script.
    Run {
        file: PathBuf,
        /// Print the JSON report instead of text.
        #[arg(long)]
        json: bool,
        #[arg(long, default_value_t = Config::default().budget)]
        budget: u64,
        #[arg(long, default_value_t = Config::default().summand_cap)]
        summand_cap: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Directory of `NAME.cusp` files consulted by `corpus(NAME)`.
        #[arg(long)]
        corpus: Option<PathBuf>,
    },
    /// Parse and resolve names only.
    Check { file: PathBuf },
}

fn read(file: &PathBuf) -> Result<String, ExitCode> {
    std::fs::read_to_string(file).map_err(|e| {
        eprintln!("{}: {e}", file.display());
        ExitCode::from(2)
    })
}

fn report_diagnostics(file: &Path, src: &str, ds: &[Diagnostic]) {
    for d in ds {
        eprint!("{}", d.render(&file.display().to_string(), src));
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Cmd::Check { file } => {
            let src = match read(&file) {
                Ok(s) => s,
                Err(code) => return code,
            };
            match dsl::parse(&src) {
                Ok(script) => {
                    println!("{}: {} statements", file.display(), script.statements.len());
                    ExitCode::SUCCESS
                }
                Err(ds) => {
                    report_diagnostics(&file, &src, &ds);
                    ExitCode::from(2)
                }
            }
        }
        Cmd::Run { file, json, budget, summand_cap, seed, corpus } => {
            let src = match read(&file) {
                Ok(s) => s,
                Err(code) => return code,
            };
            let config = Config { budget, summand_cap, seed, corpus_dir: corpus };
            let report = match dsl::parse(&src) {
                Ok(script) => dsl::evaluate(&script, &config),
                Err(diagnostics) => dsl::Report { entries: vec![], diagnostics },
            };
            if json {
                print!("{}", report.to_json_string(&config));
            } else {
                print!("{}", report.to_text());
            }
            report_diagnostics(&file, &src, &report.diagnostics);
            ExitCode::from(report.exit_code() as u8)
        }
    }
}
