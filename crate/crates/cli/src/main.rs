//! `analyze`: constraint analysis of degenerate Lagrangians from system files.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use presym::analysis::{analyze, AnalysisRequest, PictureSelection};
use presym::input::parse_system;
use presym::report::Report;
use presym::sym::{parse_rational, Rational};

#[derive(Clone, Copy, Debug, ValueEnum)]
enum PictureArg {
    Lagrangian,
    Hamiltonian,
    Both,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "analyze", version)]
#[command(about = "Run the constraint algorithm on Lagrangian system files")]
struct Cli {
    /// System description files.
    #[arg(required = true)]
    files: Vec<PathBuf>,

    #[arg(long, value_enum, default_value = "both")]
    picture: PictureArg,

    /// Maximum number of constraint generations per picture.
    #[arg(long = "max-gen", default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..))]
    max_gen: u64,

    /// Random surface points used for numeric verification.
    #[arg(long = "verify-samples", default_value_t = 16)]
    verify_samples: usize,

    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Fix a parameter, e.g. `--set beta=0`. Repeatable.
    #[arg(long = "set", value_name = "NAME=VALUE", value_parser = parse_set)]
    set: Vec<(String, Rational)>,

    #[arg(long, value_enum, default_value = "text")]
    format: Format,

    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_set(s: &str) -> Result<(String, Rational), String> {
    let (name, value) = s
        .split_once('=')
        .ok_or_else(|| format!("expected NAME=VALUE, got `{s}`"))?;
    let q = parse_rational(value).ok_or_else(|| format!("`{value}` is not a rational number"))?;
    Ok((name.trim().to_string(), q))
}

enum Failure {
    Input(String),
    Analysis(String),
}

fn run_one(cli: &Cli, path: &PathBuf) -> Result<Report, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    let spec = parse_system(&text, &cli.set)
        .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    let req = AnalysisRequest {
        spec,
        picture: match cli.picture {
            PictureArg::Lagrangian => PictureSelection::Lagrangian,
            PictureArg::Hamiltonian => PictureSelection::Hamiltonian,
            PictureArg::Both => PictureSelection::Both,
        },
        max_generations: cli.max_gen as usize,
        verify_samples: cli.verify_samples,
        seed: cli.seed,
    };
    analyze(&req).map_err(|e| Failure::Analysis(format!("{}: {e}", path.display())))
}

fn render(reports: &[Report], format: Format) -> String {
    match format {
        Format::Json if reports.len() == 1 => reports[0].to_json(),
        Format::Json => {
            let mut s = serde_json::to_string_pretty(reports).expect("reports serialize");
            s.push('\n');
            s
        }
        Format::Text => reports
            .iter()
            .map(Report::to_text)
            .collect::<Vec<_>>()
            .join("\n"),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut reports = Vec::new();
    for path in &cli.files {
        match run_one(&cli, path) {
            Ok(r) => reports.push(r),
            Err(Failure::Input(msg)) => {
                eprintln!("error: {msg}");
                return ExitCode::from(2);
            }
            Err(Failure::Analysis(msg)) => {
                eprintln!("analysis failed: {msg}");
                return ExitCode::from(1);
            }
        }
    }
    let out = render(&reports, cli.format);
    match &cli.out {
        Some(p) => {
            if let Err(e) = std::fs::write(p, out) {
                eprintln!("error: {}: {e}", p.display());
                return ExitCode::from(2);
            }
        }
        None => print!("{out}"),
    }
    ExitCode::SUCCESS
}
