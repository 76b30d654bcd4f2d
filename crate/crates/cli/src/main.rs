mod commands;
mod stream;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use teaser_core::{IntervalLength, SlaveKind, TeaserConfig, TeaserError};

#[derive(Debug, Parser)]
#[command(name = "teaser", version, about = "Early time-series classification with slave/master pairs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Train a model on a labeled dataset file.
    Train {
        /// Training data: one series per line, label first.
        #[arg(long, env = "TEASER_TRAIN")]
        train: PathBuf,
        #[command(flatten)]
        config: ConfigArgs,
        /// Model file to write.
        #[arg(long, env = "TEASER_OUT", default_value = "model.json")]
        out: PathBuf,
    },
    /// Classify a test file and write per-series decisions and a summary.
    Evaluate {
        #[arg(long, env = "TEASER_MODEL")]
        model: PathBuf,
        #[arg(long, env = "TEASER_TEST")]
        test: PathBuf,
        /// Directory receiving decisions.csv and summary.json.
        #[arg(long, env = "TEASER_OUT", default_value = ".")]
        out: PathBuf,
    },
    /// Read `id,value` lines and print a decision per series as soon as it is made.
    Stream {
        #[arg(long, env = "TEASER_MODEL")]
        model: PathBuf,
        /// Feed to replay; standard input when omitted.
        #[arg(long, env = "TEASER_INPUT")]
        input: Option<PathBuf>,
        /// Where decisions go; standard output when omitted.
        #[arg(long, env = "TEASER_OUT")]
        out: Option<PathBuf>,
    },
    /// Generate a synthetic dataset with bursts planted at random offsets.
    Synth {
        #[command(flatten)]
        spec: SynthArgs,
        /// Directory receiving train.tsv, test.tsv and the offset files.
        #[arg(long, env = "TEASER_OUT", default_value = ".")]
        out: PathBuf,
    },
    /// Train and evaluate once per interval length.
    Sweep {
        #[arg(long, env = "TEASER_TRAIN")]
        train: PathBuf,
        #[arg(long, env = "TEASER_TEST")]
        test: PathBuf,
        #[arg(long, env = "TEASER_W_VALUES", value_delimiter = ',', required = true)]
        w_values: Vec<usize>,
        #[command(flatten)]
        config: ConfigArgs,
        /// CSV with one row per test series and interval length.
        #[arg(long, env = "TEASER_OUT", default_value = "sweep.csv")]
        out: PathBuf,
    },
}

#[derive(Debug, Args)]
struct ConfigArgs {
    /// Interval length in points, or `auto` for n_max/20.
    #[arg(long, env = "TEASER_W", default_value = "auto")]
    w: IntervalLength,
    #[arg(long, env = "TEASER_SLAVE", default_value = "dtw")]
    slave: SlaveKind,
    #[arg(long, env = "TEASER_NU", default_value_t = teaser_core::master::DEFAULT_NU)]
    nu: f64,
    #[arg(long, env = "TEASER_GAMMA_GRID", value_delimiter = ',', default_value = "1,2,5,10,20,50,100")]
    gamma_grid: Vec<f64>,
    #[arg(long, env = "TEASER_V_GRID", value_delimiter = ',', default_value = "1,2,3,4,5")]
    v_grid: Vec<usize>,
    #[arg(long, env = "TEASER_SEED", default_value_t = 0)]
    seed: u64,
}

impl ConfigArgs {
    fn to_config(&self) -> TeaserConfig {
        TeaserConfig {
            w: self.w,
            slave_kind: self.slave,
            nu: self.nu,
            gamma_grid: self.gamma_grid.clone(),
            v_grid: self.v_grid.clone(),
            seed: self.seed,
        }
    }
}

#[derive(Debug, Args)]
struct SynthArgs {
    #[arg(long, env = "TEASER_CLASSES", default_value_t = 2)]
    classes: usize,
    #[arg(long, env = "TEASER_N_TRAIN", default_value_t = 100)]
    n_train: usize,
    #[arg(long, env = "TEASER_N_TEST", default_value_t = 100)]
    n_test: usize,
    #[arg(long, env = "TEASER_LENGTH_MIN", default_value_t = 200)]
    length_min: usize,
    #[arg(long, env = "TEASER_LENGTH_MAX", default_value_t = 200)]
    length_max: usize,
    /// Earliest burst start as a fraction of the series length.
    #[arg(long, env = "TEASER_OFFSET_MIN", default_value_t = 0.05)]
    offset_min: f64,
    #[arg(long, env = "TEASER_OFFSET_MAX", default_value_t = 0.5)]
    offset_max: f64,
    #[arg(long, env = "TEASER_BURST_LENGTH", default_value_t = 20)]
    burst_length: usize,
    #[arg(long, env = "TEASER_AMPLITUDE", default_value_t = 3.0)]
    amplitude: f64,
    #[arg(long, env = "TEASER_NOISE", default_value_t = 0.5)]
    noise: f64,
    #[arg(long, env = "TEASER_SEED", default_value_t = 0)]
    seed: u64,
}

/// Exit status classes.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Data(String),
    Training(String),
}

impl Failure {
    pub fn data(context: impl std::fmt::Display, e: TeaserError) -> Failure {
        Failure::Data(format!("{context}: {e}"))
    }

    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Data(_) => 2,
            Failure::Training(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Data(m) | Failure::Training(m) => m,
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Train { train, config, out } => commands::train(&train, &config.to_config(), &out),
        Command::Evaluate { model, test, out } => commands::evaluate(&model, &test, &out),
        Command::Stream { model, input, out } => stream::run(&model, input.as_deref(), out.as_deref()),
        Command::Synth { spec, out } => commands::synth(&spec.to_spec(), &out),
        Command::Sweep { train, test, w_values, config, out } => {
            commands::sweep(&train, &test, &w_values, &config.to_config(), &out)
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}

impl SynthArgs {
    fn to_spec(&self) -> teaser_core::synth::SynthSpec {
        teaser_core::synth::SynthSpec {
            n_classes: self.classes,
            n_train: self.n_train,
            n_test: self.n_test,
            length_min: self.length_min,
            length_max: self.length_max,
            offset_min: self.offset_min,
            offset_max: self.offset_max,
            burst_length: self.burst_length,
            burst_amplitude: self.amplitude,
            noise: self.noise,
            seed: self.seed,
        }
    }
}
