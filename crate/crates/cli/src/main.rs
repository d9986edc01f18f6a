mod args;
mod commands;
mod error;
mod table;
mod verify;

use args::{Cli, Command, Common};
use bloch1d::matricant::{QuadratureConfig, Scheme};
use bloch1d::profile::{parse_profile, presets, MaterialProfile};
use clap::Parser;
use commands::{Context, GreenRequest};
use error::CliError;
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::process::ExitCode;
use table::{Header, Table};

/// Profile as named on the command line, with the bytes that define it.
struct LoadedProfile {
    label: String,
    source: String,
    profile: MaterialProfile,
}

fn load_profile(common: &Common) -> Result<Option<LoadedProfile>, CliError> {
    if let Some(path) = &common.profile {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let profile = parse_profile(&text)?;
        return Ok(Some(LoadedProfile { label: path.display().to_string(), source: text, profile }));
    }
    if let Some(name) = &common.preset {
        let profile = presets::by_name(name).ok_or_else(|| {
            CliError::Config(format!("unknown preset `{name}`; choose one of {}", presets::NAMES.join(", ")))
        })?;
        return Ok(Some(LoadedProfile { label: format!("preset:{name}"), source: format!("preset:{name}"), profile }));
    }
    Ok(None)
}

fn quadrature(common: &Common) -> Result<QuadratureConfig, CliError> {
    common.validate()?;
    let scheme = Scheme::from_name(&common.scheme)
        .ok_or_else(|| CliError::Config(format!("unknown scheme `{}`", common.scheme)))?;
    let cfg = QuadratureConfig { scheme, ..QuadratureConfig::with_tol(common.tol) };
    cfg.validate()?;
    Ok(cfg)
}

/// Everything that determines the dataset; thread count and output encoding are excluded.
#[derive(Serialize)]
struct Fingerprint<'a> {
    common: &'a Common,
    command: &'a Command,
    profile: &'a str,
}

fn config_hash(cli: &Cli, profile_source: &str) -> Result<String, CliError> {
    let text = serde_json::to_string(&Fingerprint { common: &cli.common, command: &cli.command, profile: profile_source })?;
    Ok(Sha256::digest(text.as_bytes()).iter().map(|b| format!("{b:02x}")).collect())
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let cfg = quadrature(&cli.common)?;
    if cli.common.jobs > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.common.jobs)
            .build_global()
            .map_err(|e| CliError::Config(format!("--jobs: {e}")))?;
    }
    let loaded = load_profile(&cli.common)?;

    let (table, label, source, period, failures) = if let Command::Verify = cli.command {
        let suite: Vec<(String, MaterialProfile)> = match loaded {
            Some(l) => vec![(l.label, l.profile)],
            None => ["graded", "contrast-bilayer", "soft-bilayer"]
                .iter()
                .map(|n| (format!("preset:{n}"), presets::by_name(n).expect("built-in preset")))
                .collect(),
        };
        let label = suite.iter().map(|(l, _)| l.as_str()).collect::<Vec<_>>().join(",");
        let period = suite[0].1.period_scale();
        let (table, failed) = verify::run(&suite, &cfg);
        (table, label.clone(), label, period, failed)
    } else {
        let l = loaded.ok_or_else(|| CliError::Config("give --profile <file> or --preset <name>".into()))?;
        let period = l.profile.period_scale();
        let scale = if cli.common.physical { period } else { 1.0 };
        let ctx = Context { profile: l.profile, cfg, scale };
        let table = dispatch(&ctx, &cli.command)?;
        let failures = table.failures();
        (table, l.label, l.source, period, failures)
    };

    let header = Header {
        tool: "bloch1d",
        version: env!("CARGO_PKG_VERSION"),
        command: cli.command.name(),
        profile: label,
        period,
        units: if cli.common.physical { "physical" } else { "nondimensional" },
        config_sha256: config_hash(cli, &source)?,
    };
    let mut out: Box<dyn Write> = match &cli.common.output {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    };
    table::write(&mut out, cli.common.format, &header, &table)?;
    out.flush()?;
    if failures > 0 {
        return Err(CliError::PartialFailure { failed: failures, total: table.rows().len() });
    }
    Ok(())
}

fn dispatch(ctx: &Context, command: &Command) -> Result<Table, CliError> {
    match *command {
        Command::DeltaMap { omega, k } => Ok(commands::delta_map(ctx, omega, k)),
        Command::Band { k, big_k, branches, stopband_samples } => {
            commands::band(ctx, k, big_k, branches, stopband_samples)
        }
        Command::Isofreq { omega, k_max, truncate_terms } => commands::isofreq(ctx, omega, k_max, truncate_terms),
        Command::ZwsScan { k, omega_max } => commands::zws(ctx, k, omega_max),
        Command::Green { big_k, omega, k, mode, points, forcing_wavenumber } => {
            commands::green(ctx, &GreenRequest { big_k, omega, k, mode, points, forcing_wavenumber })
        }
        Command::WkbCompare { omega, k } => commands::wkb_compare(ctx, omega, k),
        Command::Verify => unreachable!("handled by run"),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        // A closed pipe means the reader has seen enough.
        Err(e) if e.is_broken_pipe() => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("bloch1d: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
