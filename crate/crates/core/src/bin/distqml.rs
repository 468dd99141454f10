use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use distqml::experiments::{self, error_record, render_json, ExperimentConfig, ExperimentKind};
use distqml::{Error, Result};

/// Two-party quantum machine-learning protocol simulator.
#[derive(Parser)]
#[command(name = "distqml", version)]
struct Cli {
    /// Overrides the seed of the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Directory for summary.json, series.csv and events.log.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct KindArgs {
    /// Parameter record as JSON.
    #[arg(long, default_value = "{}")]
    params: String,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a JSON config file.
    Run {
        #[arg(short, long)]
        config: PathBuf,
    },
    /// Print the catalog of experiment kinds and their parameters.
    List,
    /// Run every config listed (one path per line) in a file.
    Batch {
        #[arg(short = 'l', long)]
        list: PathBuf,
    },
    Inference(KindArgs),
    Gradcheck(KindArgs),
    Dpcd(KindArgs),
    Stdgd(KindArgs),
    Stdft(KindArgs),
    Linclass(KindArgs),
    Spectrum(KindArgs),
    Seprank(KindArgs),
    Universal(KindArgs),
    Dataparallel(KindArgs),
}

fn kind_args(cmd: &Command) -> Option<(ExperimentKind, &KindArgs)> {
    Some(match cmd {
        Command::Inference(a) => (ExperimentKind::Inference, a),
        Command::Gradcheck(a) => (ExperimentKind::Gradcheck, a),
        Command::Dpcd(a) => (ExperimentKind::Dpcd, a),
        Command::Stdgd(a) => (ExperimentKind::Stdgd, a),
        Command::Stdft(a) => (ExperimentKind::Stdft, a),
        Command::Linclass(a) => (ExperimentKind::Linclass, a),
        Command::Spectrum(a) => (ExperimentKind::Spectrum, a),
        Command::Seprank(a) => (ExperimentKind::Seprank, a),
        Command::Universal(a) => (ExperimentKind::Universal, a),
        Command::Dataparallel(a) => (ExperimentKind::Dataparallel, a),
        _ => return None,
    })
}

fn execute(mut config: ExperimentConfig, seed: Option<u64>, out_dir: Option<&Path>) -> Result<String> {
    if let Some(s) = seed {
        config.seed = s;
    }
    let output = experiments::run(&config)?;
    if let Some(dir) = out_dir.map(Path::to_path_buf).or(config.out_dir.clone()) {
        experiments::write_outputs(&output, &dir)?;
    }
    output.summary_json()
}

fn main_inner(cli: &Cli) -> Result<()> {
    let out_dir = cli.out_dir.as_deref();
    match &cli.command {
        Command::Run { config } => print!("{}", execute(ExperimentConfig::from_file(config)?, cli.seed, out_dir)?),
        Command::List => print!("{}", render_json(&serde_json::to_value(experiments::list_experiments()?)?)?),
        Command::Batch { list } => {
            let text = std::fs::read_to_string(list)?;
            let base = list.parent().unwrap_or(Path::new("."));
            let paths = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
            for (i, p) in paths.enumerate() {
                let config = ExperimentConfig::from_file(&base.join(p))?;
                let dir = out_dir.map(|d| d.join(format!("{i:03}-{}", config.kind)));
                print!("{}", execute(config, cli.seed, dir.as_deref())?);
            }
        }
        cmd => {
            let (kind, args) = kind_args(cmd).expect("remaining commands are experiment kinds");
            let params = serde_json::from_str(&args.params).map_err(|e| Error::Config(e.to_string()))?;
            let config = ExperimentConfig::new(kind, cli.seed.unwrap_or(0), params);
            print!("{}", execute(config, None, out_dir)?);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match main_inner(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let record = render_json(&error_record(&e)).unwrap_or_else(|_| format!("{{\"error\":{{\"code\":\"{}\"}}}}\n", e.code()));
            print!("{record}");
            ExitCode::from(2)
        }
    }
}
