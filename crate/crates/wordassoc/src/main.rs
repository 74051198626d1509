use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use wordassoc::config::{RunConfig, SpreadOverrides};
use wordassoc::error::{Error, Result};
use wordassoc::{formats, pipeline, NormFormat};
use wordassoc_core::{diameter, CostMode, DiameterMethod, Norm};

/// Word-association networks, spreading activation and implicit-bias
/// measurement.
#[derive(Parser)]
#[command(name = "wordassoc", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every stage described by a config file.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory (overrides the config).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        no_cache: bool,
        #[command(flatten)]
        spread: SpreadFlags,
        /// Use this norm for every approach.
        #[arg(long, value_parser = parse_norm)]
        norm: Option<Norm>,
        #[arg(long)]
        max_paths: Option<usize>,
    },
    /// Build a network from association norms.
    Build {
        #[arg(long)]
        norms: PathBuf,
        #[arg(long, default_value = "trial")]
        format: NormFormat,
        #[arg(long)]
        vocabulary: Option<PathBuf>,
        #[arg(long, default_value_t = 2)]
        min_weight: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Structural statistics of a serialized network.
    Stats {
        #[arg(long)]
        network: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Spread activation from the primes of a spec.
    Spread {
        #[arg(long)]
        network: PathBuf,
        #[arg(long)]
        spec: PathBuf,
        #[command(flatten)]
        spread: SpreadFlags,
        #[arg(long)]
        out: PathBuf,
    },
    /// Normalize a raw matrix and evaluate bias.
    Bias {
        /// Raw matrix; its `.json` sidecar must sit next to it.
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        valence: Option<PathBuf>,
        #[arg(long)]
        emotions: Option<PathBuf>,
        #[arg(long, value_parser = parse_norm)]
        norm: Option<Norm>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Minimum-cost paths from a prime to a target.
    Stream {
        #[arg(long)]
        network: PathBuf,
        #[arg(long)]
        prime: String,
        #[arg(long)]
        target: String,
        #[arg(long, default_value = "inverse_weight", value_parser = parse_cost_mode)]
        cost_mode: CostMode,
        #[arg(long, default_value_t = wordassoc_core::stream::DEFAULT_MAX_PATHS)]
        max_paths: usize,
        /// Valence lexicon for node colouring.
        #[arg(long)]
        valence: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct SpreadFlags {
    #[arg(long)]
    retention: Option<f64>,
    #[arg(long)]
    steps: Option<u32>,
    #[arg(long)]
    initial_activation: Option<f64>,
}

impl SpreadFlags {
    fn apply(&self, base: SpreadOverrides) -> SpreadOverrides {
        SpreadOverrides {
            retention: self.retention.or(base.retention),
            steps: self.steps.or(base.steps),
            initial_activation: self.initial_activation.or(base.initial_activation),
        }
    }
}

fn parse_norm(s: &str) -> std::result::Result<Norm, String> {
    Norm::parse(s).ok_or_else(|| format!("unknown norm '{s}' (expected l1 or l2)"))
}

fn parse_cost_mode(s: &str) -> std::result::Result<CostMode, String> {
    CostMode::parse(s).ok_or_else(|| format!("unknown cost mode '{s}' (expected inverse_weight or unit)"))
}

fn read_network(path: &Path) -> Result<wordassoc_core::AssociationNetwork> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    formats::read_network(std::io::BufReader::new(file))
}

fn write_out(out: &Path, files: pipeline::Artifacts) -> Result<()> {
    let mut dir = pipeline::OutputDir::acquire(out)?;
    dir.stage(Path::new(""), files)?;
    for f in dir.promote()? {
        println!("{}", out.join(f).display());
    }
    Ok(())
}

fn execute(cmd: Command) -> Result<()> {
    match cmd {
        Command::Run {
            config,
            out,
            no_cache,
            spread,
            norm,
            max_paths,
        } => {
            let mut cfg = RunConfig::load(&config)?;
            if let Some(out) = out {
                cfg.out = out;
            }
            cfg.cache &= !no_cache;
            cfg.spread = spread.apply(cfg.spread);
            if let Some(norm) = norm {
                cfg.normalization.override_all(norm);
            }
            if let Some(m) = max_paths {
                cfg.streams.max_paths = m;
            }
            for f in pipeline::run_pipeline(&cfg)? {
                println!("{}", cfg.out.join(f).display());
            }
            Ok(())
        }
        Command::Build {
            norms,
            format,
            vocabulary,
            min_weight,
            out,
        } => {
            let net = pipeline::build_stage(&norms, format, vocabulary.as_deref(), min_weight)
                .map_err(|e| e.in_stage("build"))?;
            let mut files = pipeline::Artifacts::new();
            files.insert(pipeline::NETWORK_FILE.into(), formats::write_network(&net));
            write_out(&out, files)
        }
        Command::Stats { network, out } => {
            let net = read_network(&network).map_err(|e| e.in_stage("stats"))?;
            let (_, files) = pipeline::stats_artifacts(&net);
            write_out(&out, files)
        }
        Command::Spread {
            network,
            spec,
            spread,
            out,
        } => {
            let spec = pipeline::load_spec(&spec)?;
            let overrides = spread.apply(SpreadOverrides::default());
            overrides.validate()?;
            let run = || -> Result<_> {
                let net = read_network(&network)?;
                let d = diameter(&net, DiameterMethod::Exact)?;
                let (raw, meta) = pipeline::spread_stage(&net, d, &spec, &overrides)?;
                Ok(pipeline::matrix_artifacts(&raw, &meta))
            };
            write_out(&out, run().map_err(|e| e.in_stage("spread"))?)
        }
        Command::Bias {
            matrix,
            spec,
            valence,
            emotions,
            norm,
            out,
        } => {
            let spec = pipeline::load_spec(&spec)?;
            let norm = norm.unwrap_or_else(|| wordassoc::config::NormConfig::default().for_approach(spec.approach)[0]);
            let run = || -> Result<_> {
                let lex = pipeline::load_lexicon(valence.as_deref(), emotions.as_deref())?;
                let (raw, meta) = pipeline::read_matrix_with_meta(&matrix)?;
                pipeline::bias_stage(&raw, &meta, &spec, &lex, norm)
            };
            write_out(&out, run().map_err(|e| e.in_stage("bias"))?)
        }
        Command::Stream {
            network,
            prime,
            target,
            cost_mode,
            max_paths,
            valence,
            out,
        } => {
            let run = || -> Result<_> {
                let net = read_network(&network)?;
                let lex = pipeline::load_lexicon(valence.as_deref(), None)?;
                let (p, t) = (wordassoc::ingest::normalize_token(&prime), wordassoc::ingest::normalize_token(&target));
                pipeline::stream_stage(&net, &p, &t, cost_mode, max_paths, &lex)
            };
            write_out(&out, run().map_err(|e| e.in_stage("stream"))?)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
