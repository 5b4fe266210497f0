use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use legpos_core::schoenberg::SchoenbergConfig;
use legpos_core::search::GammaRule;
use legpos_core::ScalarMode;
use serde_json::json;

mod config;
mod run;

use config::{
    AmplitudeParams, CommandConfig, CriticalAlphaParams, Format, LandscapeParams, QuadCheckParams, RunConfig,
    SCHEMA_VERSION,
};
use run::{Failure, Report};

/// Positivity of Legendre/Gegenbauer expansions and Schoenberg kernel tests.
#[derive(Parser, Debug)]
#[command(name = "legpos", version)]
struct Cli {
    /// Arithmetic for the algebraic pipelines.
    #[arg(long, global = true, value_enum, default_value_t = ModeArg::Float)]
    mode: ModeArg,
    /// Decimal digits in float mode.
    #[arg(long, global = true, default_value_t = 50)]
    digits: u32,
    /// Master RNG seed (overrides the seed in a schoenberg config).
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Output file; stdout when omitted. CSV output also gets a
    /// `<PATH>.config.json` replay file.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Rational,
    Float,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Expansion coefficients of the amplitude.
    Expand(AmplitudeArgs),
    /// Bisection for the critical alpha at one (M, beta).
    CriticalAlpha(CriticalArgs),
    /// Critical alpha over an (M, beta) grid with the max-over-M profile.
    Landscape(LandscapeArgs),
    /// Monte-Carlo Schoenberg test from a JSON config.
    Schoenberg { config: PathBuf },
    /// Recurrence against Gauss-Legendre quadrature coefficients (d = 2).
    QuadCheck(QuadArgs),
    /// Re-run a resolved config or a JSON result document.
    Replay { file: PathBuf },
}

#[derive(Args, Debug)]
struct AmplitudeArgs {
    #[arg(short = 'M', long = "M", visible_alias = "m")]
    m: u32,
    /// Decimal or `p/q`.
    #[arg(long)]
    alpha: String,
    #[arg(long)]
    beta: f64,
    /// Defaults to beta + 1.
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(short = 'd', long = "dim", default_value_t = 2)]
    d: u32,
}

impl AmplitudeArgs {
    fn params(&self) -> AmplitudeParams {
        AmplitudeParams {
            m: self.m,
            alpha: self.alpha.clone(),
            beta: self.beta,
            gamma: self.gamma.unwrap_or(self.beta + 1.0),
            d: self.d,
        }
    }
}

#[derive(Args, Debug)]
struct CriticalArgs {
    #[arg(short = 'M', long = "M", visible_alias = "m")]
    m: u32,
    #[arg(long)]
    beta: f64,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(short = 'd', long = "dim", default_value_t = 2)]
    d: u32,
    #[arg(long, default_value_t = 1e-6)]
    epsilon: f64,
    #[arg(long, default_value_t = 0.0)]
    alpha_min: f64,
    #[arg(long, default_value_t = 1.0)]
    alpha_max: f64,
}

#[derive(Args, Debug)]
struct LandscapeArgs {
    #[arg(long, default_value_t = 1)]
    m_min: u32,
    #[arg(long = "M-max", visible_alias = "m-max")]
    m_max: u32,
    #[arg(long, default_value_t = 1)]
    m_step: u32,
    #[arg(long)]
    beta_min: f64,
    #[arg(long)]
    beta_max: f64,
    #[arg(long, default_value_t = 1)]
    beta_steps: u32,
    /// Fixed gamma for every beta.
    #[arg(long, conflicts_with = "gamma_offset")]
    gamma: Option<f64>,
    /// gamma = beta + offset.
    #[arg(long, default_value_t = 1.0)]
    gamma_offset: f64,
    #[arg(long, default_value_t = 1e-6)]
    epsilon: f64,
    #[arg(short = 'd', long = "dim", default_value_t = 2)]
    d: u32,
}

#[derive(Args, Debug)]
struct QuadArgs {
    #[command(flatten)]
    amplitude: AmplitudeArgs,
    /// Rule size; defaults to M + 2, the smallest exact rule.
    #[arg(long)]
    nodes: Option<usize>,
    /// Defaults to the noise floor of the working precision.
    #[arg(long)]
    tolerance: Option<f64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            match &failure {
                Failure::Usage(msg) => eprintln!("error: {msg}"),
                Failure::Check(msg) => eprintln!("check failed: {msg}"),
            }
            ExitCode::from(failure.exit_code() as u8)
        }
    }
}

fn dispatch(cli: &Cli) -> Result<(), Failure> {
    let config = match &cli.command {
        Command::Replay { file } => {
            let text = read(file)?;
            config::parse_replay(&text).map_err(|e| Failure::Usage(format!("{}: {e}", file.display())))?
        }
        command => resolve(cli, command)?,
    };
    let report = run::execute(&config)?;
    write_report(&config, &report, cli.out.as_deref())?;
    for note in &report.notes {
        eprintln!("{note}");
    }
    match report.check_failure {
        Some(msg) => Err(Failure::Check(msg)),
        None => Ok(()),
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn resolve(cli: &Cli, command: &Command) -> Result<RunConfig, Failure> {
    let mode = match cli.mode {
        ModeArg::Rational => ScalarMode::ExactRational,
        ModeArg::Float => ScalarMode::float(cli.digits).map_err(|e| Failure::Usage(e.to_string()))?,
    };
    let mut seed = cli.seed.unwrap_or(0);
    let command = match command {
        Command::Expand(a) => CommandConfig::Expand(a.params()),
        Command::CriticalAlpha(a) => CommandConfig::CriticalAlpha(CriticalAlphaParams {
            m: a.m,
            beta: a.beta,
            gamma: a.gamma.unwrap_or(a.beta + 1.0),
            d: a.d,
            epsilon: a.epsilon,
            alpha_min: a.alpha_min,
            alpha_max: a.alpha_max,
        }),
        Command::Landscape(a) => CommandConfig::Landscape(LandscapeParams {
            m_min: a.m_min,
            m_max: a.m_max,
            m_step: a.m_step,
            beta_min: a.beta_min,
            beta_max: a.beta_max,
            beta_steps: a.beta_steps,
            gamma: a.gamma.map_or(GammaRule::BetaPlus(a.gamma_offset), GammaRule::Fixed),
            epsilon: a.epsilon,
            d: a.d,
        }),
        Command::Schoenberg { config } => {
            let text = read(config)?;
            let mut parsed: SchoenbergConfig =
                serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("{}: {e}", config.display())))?;
            match cli.seed {
                Some(s) => parsed.seed = s,
                None => seed = parsed.seed,
            }
            let resolved = parsed
                .resolved()
                .map_err(|e| Failure::Usage(format!("{}: {e}", config.display())))?;
            CommandConfig::Schoenberg(resolved)
        }
        Command::QuadCheck(a) => {
            let amp = a.amplitude.params();
            let digits = mode.digits();
            CommandConfig::QuadCheck(QuadCheckParams {
                nodes: a.nodes.unwrap_or(amp.m as usize + 2),
                tolerance: a
                    .tolerance
                    .unwrap_or_else(|| ScalarMode::HighPrecisionFloat { digits }.default_noise_floor()),
                m: amp.m,
                alpha: amp.alpha,
                beta: amp.beta,
                gamma: amp.gamma,
                d: amp.d,
            })
        }
        Command::Replay { .. } => unreachable!("handled by dispatch"),
    };
    Ok(RunConfig {
        mode,
        seed,
        format: cli.format,
        command,
    })
}

fn write_report(config: &RunConfig, report: &Report, out: Option<&Path>) -> Result<(), Failure> {
    let io_err = |e: io::Error| Failure::Usage(format!("writing output: {e}"));
    let bytes = match config.format {
        Format::Json => {
            let doc = json!({
                "schema_version": SCHEMA_VERSION,
                "config": config,
                "result": report.result,
            });
            let mut text = serde_json::to_string_pretty(&doc).expect("serializable report");
            text.push('\n');
            text.into_bytes()
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(&report.header)
                .map_err(|e| Failure::Usage(e.to_string()))?;
            for row in &report.rows {
                w.write_record(row).map_err(|e| Failure::Usage(e.to_string()))?;
            }
            w.into_inner().map_err(|e| Failure::Usage(e.to_string()))?
        }
    };
    match out {
        Some(path) => {
            fs::write(path, &bytes).map_err(io_err)?;
            if config.format == Format::Csv {
                let mut sidecar = path.as_os_str().to_owned();
                sidecar.push(".config.json");
                let doc = json!({ "schema_version": SCHEMA_VERSION, "config": config });
                let text = serde_json::to_string_pretty(&doc).expect("serializable config") + "\n";
                fs::write(PathBuf::from(sidecar), text).map_err(io_err)?;
            }
        }
        None => io::stdout().write_all(&bytes).map_err(io_err)?,
    }
    Ok(())
}
