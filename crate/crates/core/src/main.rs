use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use edgeflow::cli::{self, ExperimentConfig, Format, Mode};
use edgeflow::Error;

/// Edge spectral flow, Maslov indices and winding numbers for periodic
/// families of Hill and tube operators.
#[derive(Parser)]
#[command(name = "edgeflow", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Output format [default: json, or output.format from the config].
    #[arg(long, value_enum, global = true)]
    format: Option<Format>,
    /// Output file [default: stdout, or output.path from the config].
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads [default: all cores].
    #[arg(long, env = "EDGEFLOW_THREADS", global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Classify the energies against the bulk spectra.
    Probe(Source),
    /// Compute I, Mas and winding numbers.
    Indices(Source),
    /// Compute edge or junction spectral flows.
    Flow(Source),
    /// Run the full consistency checks.
    Verify(Source),
    /// List the bundled configurations.
    Builtins,
}

#[derive(Args)]
struct Source {
    /// Experiment configuration (TOML).
    #[arg(required_unless_present = "builtin")]
    config: Option<PathBuf>,
    /// Use a bundled configuration instead of a file.
    #[arg(long, conflicts_with = "config")]
    builtin: Option<String>,
}

fn load(src: &Source) -> Result<ExperimentConfig, Error> {
    match (&src.config, &src.builtin) {
        (Some(p), _) => ExperimentConfig::load(p),
        (None, Some(name)) => {
            let text = cli::builtin(name)
                .ok_or_else(|| Error::Config(format!("no bundled configuration {name:?}")))?;
            ExperimentConfig::parse(text)
        }
        (None, None) => Err(Error::Config("no configuration given".into())),
    }
}

fn fail(e: &Error) -> ExitCode {
    eprintln!("error: {e}");
    if let Some(hint) = cli::remediation(e) {
        eprintln!("hint: {hint}");
    }
    ExitCode::from(cli::error_code(e) as u8)
}

fn main() -> ExitCode {
    let args = match Cli::try_parse() {
        Ok(a) => a,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(4);
        }
    };
    if let Some(n) = args.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            return fail(&Error::Config(format!("thread pool: {e}")));
        }
    }
    let (mode, src) = match &args.command {
        Command::Probe(s) => (Mode::Probe, s),
        Command::Indices(s) => (Mode::Indices, s),
        Command::Flow(s) => (Mode::Flow, s),
        Command::Verify(s) => (Mode::Verify, s),
        Command::Builtins => {
            for (name, _) in cli::BUILTINS {
                println!("{name}");
            }
            return ExitCode::SUCCESS;
        }
    };
    let cfg = match load(src) {
        Ok(c) => c,
        Err(e) => return fail(&e),
    };
    let outcome = cli::run(&cfg, mode);
    let bundle = match &outcome {
        Ok(b) => b,
        Err(e) => return fail(e),
    };
    let format = args.format.or(cfg.output.format).unwrap_or(Format::Json);
    let path = args.out.or(cfg.output.path.clone());
    match cli::emit(bundle, format, path.as_deref()) {
        Ok(text) if path.is_none() => print!("{text}"),
        Ok(_) => {}
        Err(e) => return fail(&e),
    }
    for c in bundle.checks.iter().filter(|c| !c.pass) {
        eprintln!("failed: {}", c.label);
    }
    eprintln!(
        "{}",
        if bundle.consistent {
            "consistent"
        } else {
            "inconsistent"
        }
    );
    ExitCode::from(cli::exit_code(&outcome) as u8)
}
