//! Runs a bundled experiment from its TOML description and prints CSV.
use edgeflow::cli::{builtin, run, to_csv, ExperimentConfig, Mode};

fn main() -> edgeflow::Result<()> {
    let name = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "robin-loop".into());
    let text =
        builtin(&name).ok_or_else(|| edgeflow::Error::Config(format!("no builtin {name}")))?;
    let cfg = ExperimentConfig::parse(text)?;
    let bundle = run(&cfg, Mode::Verify)?;
    print!("{}", to_csv(&bundle));
    eprintln!("consistent: {}", bundle.consistent);
    Ok(())
}
