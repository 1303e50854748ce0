use awqmp::engine::{batch, parse_protocols, simulate, write_metrics_csv, Metrics};
use awqmp::model::{load_scenario, ConfigError, ScenarioConfig};
use clap::{Parser, Subcommand};
use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{self, BufWriter};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "awqmp", version, about = "Water-quality sensor network lifetime simulator")]
struct Cli {
    /// Override the scenario's rng_seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one scenario and write its per-round metrics.
    Run {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run several protocols over consecutive seeds on identical topologies.
    Compare {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long, default_value = "echerp,leach")]
        protocols: String,
        #[arg(long, default_value_t = 1)]
        seeds: u64,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Re-run a scenario with one key set to each of several values.
    Sweep {
        #[arg(long)]
        scenario: PathBuf,
        /// `key=v1,v2,...`; dotted keys reach nested tables (`radio.e_elec=...`).
        #[arg(long)]
        set: String,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Check a scenario file and report every problem found.
    Validate {
        #[arg(long)]
        scenario: PathBuf,
    },
}

enum CliError {
    Config(ConfigError),
    Io(PathBuf, io::Error),
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e)
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 1,
            CliError::Io(..) => 2,
        }
    }

    fn report(&self) {
        match self {
            CliError::Config(ConfigError::Invalid(violations)) => {
                eprintln!("invalid scenario:");
                for v in violations {
                    eprintln!("  {v}");
                }
            }
            CliError::Config(e) => eprintln!("{e}"),
            CliError::Io(path, e) => eprintln!("{}: {e}", path.display()),
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> CliError + '_ {
    move |e| CliError::Io(path.to_path_buf(), e)
}

fn load(path: &Path, seed: Option<u64>) -> Result<ScenarioConfig, CliError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let mut config = load_scenario(&text)?;
    if let Some(seed) = seed {
        config.rng_seed = seed;
    }
    Ok(config)
}

fn write_csv(metrics: &Metrics, path: &Path) -> Result<(), CliError> {
    let file = File::create(path).map_err(io_err(path))?;
    write_metrics_csv(metrics, BufWriter::new(file)).map_err(io_err(path))
}

fn opt(v: Option<u32>) -> String {
    v.map_or_else(|| "NA".into(), |r| r.to_string())
}

fn summary_row(metrics: &Metrics) -> String {
    let s = &metrics.summary;
    format!(
        "{},{},{},{},{:.6}",
        opt(s.first_death_round),
        opt(s.half_death_round),
        opt(s.last_death_round),
        s.total_frames,
        metrics.last().map_or(0.0, |r| r.dissipated)
    )
}

const SUMMARY_COLUMNS: &str = "first_death_round,half_death_round,last_death_round,total_frames,dissipated_j";

fn sanitize(s: &str) -> String {
    s.chars().map(|c| if c.is_ascii_alphanumeric() || "._-".contains(c) { c } else { '_' }).collect()
}

fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run { scenario, out } => {
            let config = load(&scenario, cli.seed)?;
            let metrics = simulate(&config)?;
            write_csv(&metrics, &out)?;
            println!("{},{}", config.protocol, summary_row(&metrics));
        }
        Command::Compare { scenario, protocols, seeds, out_dir } => {
            let base = load(&scenario, cli.seed)?;
            let protocols = parse_protocols(&protocols)?;
            let runs: Vec<ScenarioConfig> = batch::seed_range(&base, seeds.max(1))
                .into_iter()
                .flat_map(|c| protocols.iter().map(move |&protocol| ScenarioConfig { protocol, ..c.clone() }))
                .collect();
            let results = batch::run_batch(&runs);
            fs::create_dir_all(&out_dir).map_err(io_err(&out_dir))?;
            let mut summary = format!("protocol,seed,{SUMMARY_COLUMNS}\n");
            for (config, metrics) in runs.iter().zip(results) {
                let metrics = metrics?;
                let path = out_dir.join(format!("{}_seed{}.csv", config.protocol, config.rng_seed));
                write_csv(&metrics, &path)?;
                let _ = writeln!(summary, "{},{},{}", config.protocol, config.rng_seed, summary_row(&metrics));
            }
            let path = out_dir.join("summary.csv");
            fs::write(&path, &summary).map_err(io_err(&path))?;
            print!("{summary}");
        }
        Command::Sweep { scenario, set, out_dir } => {
            let base = load(&scenario, cli.seed)?;
            let (key, values) = set
                .split_once('=')
                .ok_or_else(|| ConfigError::Parse(format!("--set expects key=v1,v2,... (got `{set}`)")))?;
            let values: Vec<&str> = values.split(',').map(str::trim).filter(|v| !v.is_empty()).collect();
            let runs = values
                .iter()
                .map(|v| base.with_override(key, v))
                .collect::<Result<Vec<_>, _>>()?;
            let results = batch::run_batch(&runs);
            fs::create_dir_all(&out_dir).map_err(io_err(&out_dir))?;
            let mut summary = format!("key,value,{SUMMARY_COLUMNS}\n");
            for (value, metrics) in values.iter().zip(results) {
                let metrics = metrics?;
                let path = out_dir.join(format!("{}={}.csv", sanitize(key), sanitize(value)));
                write_csv(&metrics, &path)?;
                let _ = writeln!(summary, "{key},{value},{}", summary_row(&metrics));
            }
            let path = out_dir.join("summary.csv");
            fs::write(&path, &summary).map_err(io_err(&path))?;
            print!("{summary}");
        }
        Command::Validate { scenario } => {
            load(&scenario, cli.seed)?;
            println!("ok");
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            e.report();
            ExitCode::from(e.exit_code())
        }
    }
}
