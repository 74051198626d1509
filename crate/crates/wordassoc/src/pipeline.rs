//! Stage functions and the full run. Each stage returns the bytes of its
//! artifacts, so a stage invoked on its own writes exactly what the full
//! run writes for it.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::time::Instant;

use sha2::{Digest, Sha256};
use wordassoc_core::{
    build_network, emotion_bias, extract_stream, network_stats, normalize_matrix, render_dot, spread_batch,
    stereotype_bias, valence_bias, ActivationMatrix, Approach, AssociationNetwork, CostMode, Lexicon, NetworkStats,
    Norm, PrimeSpec,
};

use crate::config::{RunConfig, SpreadOverrides};
use crate::error::{Error, Result, StageExt};
use crate::formats::{self, MatrixMeta};
use crate::ingest::{self, NormFormat};

pub const NETWORK_FILE: &str = "network.tsv";
pub const STATS_FILE: &str = "network_stats.json";

/// Relative path -> file contents, in a stable order.
pub type Artifacts = BTreeMap<PathBuf, String>;

fn read_file(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn open(path: &Path) -> Result<BufReader<fs::File>> {
    fs::File::open(path).map(BufReader::new).map_err(|e| Error::io(path, e))
}

pub fn load_spec(path: &Path) -> Result<PrimeSpec> {
    let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    ingest::load_prime_spec(&text).map_err(|e| match e {
        Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub fn load_lexicon(valence: Option<&Path>, emotions: Option<&Path>) -> Result<Lexicon> {
    let mut lex = Lexicon::new();
    if let Some(p) = valence {
        ingest::load_valence(open(p)?, &mut lex).map_err(|e| with_path(e, p))?;
    }
    if let Some(p) = emotions {
        ingest::load_emotions(open(p)?, &mut lex).map_err(|e| with_path(e, p))?;
    }
    Ok(lex)
}

fn with_path(err: Error, path: &Path) -> Error {
    match err {
        Error::Parse { line, message } => Error::Parse {
            line,
            message: format!("{}: {message}", path.display()),
        },
        other => other,
    }
}

/// Parses norms and builds the filtered network.
pub fn build_stage(
    norms: &Path,
    format: NormFormat,
    vocabulary: Option<&Path>,
    min_weight: u64,
) -> Result<AssociationNetwork> {
    let records = ingest::parse_trials(open(norms)?, format).map_err(|e| with_path(e, norms))?;
    let vocab = match vocabulary {
        Some(p) => Some(ingest::load_vocabulary(open(p)?)?),
        None => None,
    };
    log::info!("{} aggregated cue-response records", records.len());
    Ok(build_network(&records, vocab.as_ref(), min_weight)?)
}

pub fn stats_artifacts(net: &AssociationNetwork) -> (NetworkStats, Artifacts) {
    let stats = network_stats(net);
    let mut out = Artifacts::new();
    out.insert(STATS_FILE.into(), formats::to_json(&stats));
    (stats, out)
}

/// Diffuses from every prime of `spec` and returns the raw matrix with
/// its sidecar.
pub fn spread_stage(
    net: &AssociationNetwork,
    diameter: u32,
    spec: &PrimeSpec,
    overrides: &SpreadOverrides,
) -> Result<(ActivationMatrix, MatrixMeta)> {
    let (params, derived) = overrides.resolve(net.node_count(), diameter)?;
    let primes = spec.prime_words();
    let matrix = spread_batch(net, &primes, &params)?;
    let meta = MatrixMeta {
        normalization: matrix.normalization(),
        params,
        steps_source: if derived { "2x_diameter" } else { "override" }.into(),
        diameter,
        nodes: net.node_count(),
        primes,
    };
    Ok((matrix, meta))
}

pub fn matrix_artifacts(matrix: &ActivationMatrix, meta: &MatrixMeta) -> Artifacts {
    let tag = matrix.normalization().as_str();
    let mut out = Artifacts::new();
    out.insert(format!("matrix_{tag}.tsv").into(), formats::write_matrix(matrix));
    out.insert(format!("matrix_{tag}.json").into(), formats::to_json(meta));
    out
}

/// Normalizes the raw matrix and evaluates one approach under one norm.
pub fn bias_stage(
    raw: &ActivationMatrix,
    meta: &MatrixMeta,
    spec: &PrimeSpec,
    lex: &Lexicon,
    norm: Norm,
) -> Result<Artifacts> {
    let normalized = normalize_matrix(raw, norm)?;
    let report = match spec.approach {
        Approach::Stereotypes => stereotype_bias(&normalized, spec)?,
        Approach::Valence => valence_bias(&normalized, spec, lex)?,
        Approach::Emotions => emotion_bias(&normalized, spec, lex)?,
    };
    let norm_meta = MatrixMeta {
        normalization: normalized.normalization(),
        ..meta.clone()
    };
    let mut out = matrix_artifacts(&normalized, &norm_meta);
    let tag = norm.as_str();
    out.insert(format!("report_{tag}.json").into(), formats::write_report(&report));
    if let Some(cells) = &report.matrix_slice {
        out.insert(format!("heatmap_{tag}.csv").into(), formats::write_heatmap(cells));
    }
    if let Some(coefs) = &report.coefficients {
        out.insert(format!("coefficients_{tag}.csv").into(), formats::write_coefficients(coefs));
    }
    Ok(out)
}

pub fn stream_stage(
    net: &AssociationNetwork,
    prime: &str,
    target: &str,
    mode: CostMode,
    max_paths: usize,
    lex: &Lexicon,
) -> Result<Artifacts> {
    let mut stream = extract_stream(net, prime, target, mode, max_paths)?;
    stream.annotate(lex);
    let stem = format!("{}--{}", formats::file_stem(prime), formats::file_stem(target));
    let mut out = Artifacts::new();
    out.insert(format!("{stem}.dot").into(), render_dot(&stream, lex));
    out.insert(format!("{stem}.json").into(), formats::write_stream_json(&stream));
    Ok(out)
}

/// Reads a matrix together with its `.json` sidecar.
pub fn read_matrix_with_meta(path: &Path) -> Result<(ActivationMatrix, MatrixMeta)> {
    let meta_path = path.with_extension("json");
    let meta: MatrixMeta = formats::from_json(&read_file(&meta_path)?).map_err(|e| with_path(e, &meta_path))?;
    let matrix = formats::read_matrix(open(path)?, meta.normalization).map_err(|e| with_path(e, path))?;
    Ok((matrix, meta))
}

/// Exclusive ownership of an output directory plus a staging area whose
/// files are promoted only when every stage succeeded.
pub struct OutputDir {
    root: PathBuf,
    staging: PathBuf,
    lock: PathBuf,
    staged: BTreeSet<PathBuf>,
}

impl OutputDir {
    pub fn acquire(root: &Path) -> Result<Self> {
        fs::create_dir_all(root).map_err(|e| Error::io(root, e))?;
        let lock = root.join(".lock");
        fs::OpenOptions::new()
            .write(true)
            .create_new(true)
            .open(&lock)
            .map_err(|e| match e.kind() {
                std::io::ErrorKind::AlreadyExists => Error::Config(format!(
                    "{} is locked by another run (remove {} if stale)",
                    root.display(),
                    lock.display()
                )),
                _ => Error::io(&lock, e),
            })?;
        let staging = root.join(".staging");
        if staging.exists() {
            fs::remove_dir_all(&staging).map_err(|e| Error::io(&staging, e))?;
        }
        Ok(OutputDir {
            root: root.to_owned(),
            staging,
            lock,
            staged: BTreeSet::new(),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn stage(&mut self, dir: &Path, files: Artifacts) -> Result<()> {
        for (name, contents) in files {
            let rel = dir.join(name);
            let path = self.staging.join(&rel);
            if let Some(parent) = path.parent() {
                fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
            }
            fs::write(&path, contents).map_err(|e| Error::io(&path, e))?;
            self.staged.insert(rel);
        }
        Ok(())
    }

    /// Moves every staged file into place. Each move is an atomic rename.
    pub fn promote(mut self) -> Result<Vec<PathBuf>> {
        let staged = std::mem::take(&mut self.staged);
        for rel in &staged {
            let dest = self.root.join(rel);
            if let Some(parent) = dest.parent() {
                fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
            }
            let src = self.staging.join(rel);
            fs::rename(&src, &dest).map_err(|e| Error::io(&dest, e))?;
        }
        Ok(staged.into_iter().collect())
    }
}

impl Drop for OutputDir {
    fn drop(&mut self) {
        let _ = fs::remove_dir_all(&self.staging);
        let _ = fs::remove_file(&self.lock);
    }
}

/// Content-addressed store for built networks and raw matrices.
struct Cache {
    dir: Option<PathBuf>,
}

fn digest(parts: &[&[u8]]) -> String {
    let mut h = Sha256::new();
    for p in parts {
        h.update((p.len() as u64).to_le_bytes());
        h.update(p);
    }
    hex::encode(h.finalize())
}

impl Cache {
    fn get(&self, name: &str) -> Option<String> {
        let path = self.dir.as_ref()?.join(name);
        fs::read_to_string(path).ok()
    }

    fn put(&self, name: &str, contents: &str) -> Result<()> {
        let Some(dir) = &self.dir else { return Ok(()) };
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let tmp = dir.join(format!(".{name}.tmp"));
        let dest = dir.join(name);
        fs::write(&tmp, contents).map_err(|e| Error::io(&tmp, e))?;
        fs::rename(&tmp, &dest).map_err(|e| Error::io(&dest, e))
    }
}

/// Runs every stage the config asks for and promotes the results into the
/// output directory. Returns the relative paths written.
pub fn run_pipeline(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let started = Instant::now();
    cfg.validate()?;
    let format = cfg.norm_format()?;
    let specs = cfg.specs.iter().map(|p| load_spec(p)).collect::<Result<Vec<_>>>()?;
    for spec in &specs {
        let needs = match spec.approach {
            Approach::Valence => cfg.data.valence.as_ref().map(|_| ()).ok_or("data.valence"),
            Approach::Emotions => cfg.data.emotions.as_ref().map(|_| ()).ok_or("data.emotions"),
            Approach::Stereotypes => Ok(()),
        };
        if let Err(key) = needs {
            return Err(Error::Config(format!("{} ({}) needs {key}", spec.identity, spec.approach.as_str())));
        }
    }

    let mut out = OutputDir::acquire(&cfg.out)?;
    let cache = Cache {
        dir: cfg.cache.then(|| cfg.out.join("cache")),
    };

    let lex = load_lexicon(cfg.data.valence.as_deref(), cfg.data.emotions.as_deref()).stage("ingest")?;

    // Network and stats, keyed by the raw input bytes and build settings.
    let norms_bytes = fs::read(&cfg.data.norms).map_err(|e| Error::io(&cfg.data.norms, e))?;
    let vocab_bytes = match &cfg.data.vocabulary {
        Some(p) => fs::read(p).map_err(|e| Error::io(p, e))?,
        None => Vec::new(),
    };
    let net_key = digest(&[
        b"network-v1",
        format.as_str().as_bytes(),
        &norms_bytes,
        &[cfg.data.vocabulary.is_some() as u8],
        &vocab_bytes,
        &cfg.data.min_weight.to_le_bytes(),
    ]);
    let (net_file, stats_file) = (format!("network-{net_key}.tsv"), format!("stats-{net_key}.json"));
    let (net, stats_text) = match (cache.get(&net_file), cache.get(&stats_file)) {
        (Some(net_text), Some(stats_text)) => {
            log::info!("network: cache hit {}", &net_key[..12]);
            (formats::read_network(net_text.as_bytes()).stage("build")?, stats_text)
        }
        _ => {
            let t = Instant::now();
            let net = build_stage(&cfg.data.norms, format, cfg.data.vocabulary.as_deref(), cfg.data.min_weight)
                .stage("build")?;
            log::info!("build: {} nodes, {} edges in {:?}", net.node_count(), net.edge_count(), t.elapsed());
            let t = Instant::now();
            let (stats, _) = stats_artifacts(&net);
            log::info!("stats: diameter {} in {:?}", stats.diameter, t.elapsed());
            let stats_text = formats::to_json(&stats);
            cache.put(&net_file, &formats::write_network(&net)).stage("build")?;
            cache.put(&stats_file, &stats_text).stage("stats")?;
            (net, stats_text)
        }
    };
    let stats: NetworkStats = formats::from_json(&stats_text).stage("stats")?;
    let mut top = Artifacts::new();
    top.insert(NETWORK_FILE.into(), formats::write_network(&net));
    top.insert(STATS_FILE.into(), stats_text);
    out.stage(Path::new(""), top)?;

    for spec in &specs {
        let dir = PathBuf::from(formats::file_stem(&spec.identity));
        let t = Instant::now();
        let overrides = format!("{:?}", cfg.spread);
        let primes = spec.prime_words().join("\n");
        let key = digest(&[b"matrix-v1", net_key.as_bytes(), primes.as_bytes(), overrides.as_bytes()]);
        let (mfile, jfile) = (format!("matrix-{key}.tsv"), format!("matrix-{key}.json"));
        let (raw, meta) = match (cache.get(&mfile), cache.get(&jfile)) {
            (Some(m), Some(j)) => {
                log::info!("{}: matrix cache hit {}", spec.identity, &key[..12]);
                let meta: MatrixMeta = formats::from_json(&j).stage("spread")?;
                let raw = formats::read_matrix(m.as_bytes(), meta.normalization).stage("spread")?;
                (raw, meta)
            }
            _ => {
                let (raw, meta) = spread_stage(&net, stats.diameter, spec, &cfg.spread).stage("spread")?;
                cache.put(&mfile, &formats::write_matrix(&raw)).stage("spread")?;
                cache.put(&jfile, &formats::to_json(&meta)).stage("spread")?;
                (raw, meta)
            }
        };
        log::info!("{}: spread {} primes in {:?}", spec.identity, meta.primes.len(), t.elapsed());
        out.stage(&dir, matrix_artifacts(&raw, &meta))?;

        for norm in cfg.normalization.for_approach(spec.approach) {
            let t = Instant::now();
            let files = bias_stage(&raw, &meta, spec, &lex, norm).stage("bias")?;
            log::info!("{}: {} bias ({}) in {:?}", spec.identity, spec.approach.as_str(), norm.as_str(), t.elapsed());
            out.stage(&dir, files)?;
        }
    }

    for (prime, target) in &cfg.streams.pairs {
        let (p, t) = (ingest::normalize_token(prime), ingest::normalize_token(target));
        let files = stream_stage(&net, &p, &t, cfg.streams.cost_mode, cfg.streams.max_paths, &lex).stage("stream")?;
        out.stage(Path::new("streams"), files)?;
    }

    let written = out.promote()?;
    log::info!("run finished: {} artifacts in {:?}", written.len(), started.elapsed());
    Ok(written)
}
