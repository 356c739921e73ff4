mod commands;
mod config;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use commands::Failure;
use config::{ConfigError, ModelChoice, RunConfig};

#[derive(Parser)]
#[command(name = "starkres", version, about = "Stark-field perturbation of embedded resonances")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Locate and certify one resonance, printed as JSON.
    Resonance(Flags),
    /// Field-free resonance across a grid of couplings.
    SweepMu(Flags),
    /// All zeros in a window, cross-checked against the winding count.
    Scan(Flags),
    /// Follow a resonance as the field strength decreases.
    Trace(Flags),
    /// Order-law checks of the small-field approximations.
    Validate(Flags),
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    Model1,
    Model2,
}

#[derive(Args)]
struct Flags {
    /// JSON configuration file; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    model: Option<ModelArg>,
    #[arg(long, allow_negative_numbers = true)]
    mu: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    epsilon: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    f: Option<f64>,
    #[arg(long, num_args = 2, value_names = ["START", "END"], allow_negative_numbers = true)]
    f_range: Option<Vec<f64>>,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long, num_args = 4, value_names = ["RE_LO", "RE_HI", "IM_LO", "IM_HI"], allow_negative_numbers = true)]
    window: Option<Vec<f64>>,
    /// Newton start grid, e.g. 6x3.
    #[arg(long, value_name = "NxM")]
    grid: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    tol: Option<f64>,
    /// Newton seed; repeat for several.
    #[arg(long, num_args = 2, value_names = ["RE", "IM"], allow_negative_numbers = true, action = clap::ArgAction::Append)]
    seed: Option<Vec<f64>>,
    /// Comma-separated couplings for sweep-mu.
    #[arg(long, value_delimiter = ',')]
    mu_grid: Option<Vec<f64>>,
    /// Worker threads; falls back to STARKRES_THREADS, then to the number of logical cores.
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    #[arg(long)]
    svg: bool,
    /// Print the effective configuration and exit.
    #[arg(long)]
    emit_config: bool,
}

fn parse_grid(s: &str) -> Result<[usize; 2], ConfigError> {
    let bad = || ConfigError(format!("flag --grid: expected NxM, got `{s}`"));
    let (a, b) = s.split_once(['x', 'X']).ok_or_else(bad)?;
    Ok([a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?])
}

impl Flags {
    fn resolve(&self) -> Result<RunConfig, ConfigError> {
        let mut c = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        if let Some(m) = self.model {
            c.model = match m {
                ModelArg::Model1 => ModelChoice::Model1,
                ModelArg::Model2 => ModelChoice::Model2,
            };
        }
        if let Some(v) = self.mu {
            c.mu = v;
        }
        if let Some(v) = self.epsilon {
            c.epsilon = v;
        }
        if let Some(v) = self.f {
            c.f = v;
        }
        if let Some(v) = &self.f_range {
            c.f_range = [v[0], v[1]];
        }
        if let Some(v) = self.steps {
            c.steps = v;
        }
        if let Some(v) = &self.window {
            c.window = [v[0], v[1], v[2], v[3]];
        }
        if let Some(g) = &self.grid {
            c.grid = parse_grid(g)?;
        }
        if let Some(v) = self.tol {
            c.tol = v;
        }
        if let Some(v) = &self.seed {
            c.seeds = v.chunks(2).map(|s| [s[0], s[1]]).collect();
        }
        if let Some(v) = &self.mu_grid {
            c.mu_grid = v.clone();
        }
        if let Some(v) = &self.out {
            c.out = v.clone();
        }
        if self.svg {
            c.svg = true;
        }
        // explicit scalar flags take precedence over a profile given in the file
        if self.mu.is_some() || self.epsilon.is_some() || self.model.is_some() {
            c.profile = None;
        }
        c.validate()?;
        Ok(c)
    }

    fn threads(&self) -> Result<Option<usize>, ConfigError> {
        let n = match self.threads {
            Some(n) => Some(n),
            None => match std::env::var("STARKRES_THREADS") {
                Ok(s) => Some(s.trim().parse().map_err(|_| {
                    ConfigError(format!("STARKRES_THREADS: expected a positive integer, got `{s}`"))
                })?),
                Err(_) => None,
            },
        };
        if n == Some(0) {
            return Err(ConfigError("thread count must be at least 1".into()));
        }
        Ok(n)
    }
}

fn run(cli: Cli) -> Result<String, Failure> {
    let (flags, cmd): (&Flags, fn(&RunConfig) -> Result<String, Failure>) = match &cli.command {
        Command::Resonance(f) => (f, commands::resonance),
        Command::SweepMu(f) => (f, commands::sweep_mu),
        Command::Scan(f) => (f, commands::scan),
        Command::Trace(f) => (f, commands::trace),
        Command::Validate(f) => (f, commands::validate),
    };
    let cfg = flags.resolve()?;
    if flags.emit_config {
        return Ok(cfg.to_json() + "\n");
    }
    if let Some(n) = flags.threads()? {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Config(format!("thread pool: {e}")))?;
    }
    cmd(&cfg)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.exit_code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_parses() {
        assert_eq!(parse_grid("6x3").unwrap(), [6, 3]);
        assert!(parse_grid("6,3").is_err());
    }

    #[test]
    fn flags_override_file() {
        let dir = std::env::temp_dir().join(format!("starkres-flags-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("c.json");
        std::fs::write(&path, r#"{"mu": 0.3, "f": 0.01}"#).unwrap();
        let cli = Cli::try_parse_from(["starkres", "resonance", "--config", path.to_str().unwrap(), "--mu", "0.2"]).unwrap();
        let Command::Resonance(flags) = cli.command else { unreachable!() };
        let c = flags.resolve().unwrap();
        assert_eq!((c.mu, c.f), (0.2, 0.01));
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
