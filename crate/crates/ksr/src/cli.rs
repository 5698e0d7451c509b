//! Argument parsing and the subcommands.

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use ksr_core::audio::{trim_silence, TrimStatus};
use ksr_core::augment::augment;
use ksr_core::decode::{beam_decode, greedy_decode, Hypothesis, MockModel};
use ksr_core::features::extract;
use ksr_core::metrics::{cer, pool, CerOptions, CerResult};
use ksr_core::schedules::{teacher_forcing_ratio, LrScheduleState};
use ksr_core::text::{build_vocab, clean_transcript, corpus_length_stats, Unit, Vocabulary};
use ksr_core::FeatureMatrix;
use rayon::prelude::*;

use crate::config::{self, Profile, Settings};
use crate::error::{CliError, ExitCode};
use crate::fmt::g6;
use crate::manifest::{self, Entry};
use crate::{ksfm, mockfile, selftest, wav};

#[derive(Debug, Parser)]
#[command(name = "ksr", version, about = "Korean speech recognition data pipeline")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Remove leading and trailing silence from every utterance
    Trim(BatchArgs),
    /// Extract features into KSFM files
    Featurize(BatchArgs),
    /// Apply frequency and time masks to KSFM files
    Augment(BatchArgs),
    /// Clean transcripts, filter by length and build the vocabulary
    Prep(BatchArgs),
    /// Print transcript length statistics
    Stats(StatsArgs),
    /// Decode utterances with a table-driven mock model
    Decode(DecodeArgs),
    /// Character error rate of hypotheses against reference transcripts
    Score(ScoreArgs),
    /// Print the teacher forcing and learning rate schedules per epoch
    ScheduleTrace(TraceArgs),
    /// Run the built-in property checks
    Selftest(SelftestArgs),
}

/// Flags shared by every command. Each long name is also a config file key.
#[derive(Debug, Clone, Default, Args)]
pub struct Common {
    /// Flat `key = value` settings file, applied after the profile
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Settings preset [default: paper-baseline]
    #[arg(long, value_parser = ["paper-baseline", "custom"])]
    pub profile: Option<String>,
    /// Seed for every random draw [default: 42]
    #[arg(long)]
    pub seed: Option<String>,
    /// Audio container [default: wav]
    #[arg(long, value_parser = ["wav", "raw"])]
    pub format: Option<String>,
    /// Sample rate of raw PCM input, Hz
    #[arg(long)]
    pub rate: Option<String>,
    /// Silence threshold below the loudest window, dB [default: 30]
    #[arg(long)]
    pub trim_db: Option<String>,
    /// Trim analysis window, ms [default: 20]
    #[arg(long)]
    pub trim_window_ms: Option<String>,
    /// Frame length, ms [default: 20]
    #[arg(long)]
    pub frame_ms: Option<String>,
    /// Frame hop, ms [default: 10]
    #[arg(long)]
    pub hop_ms: Option<String>,
    /// Analysis window [default: hamming-paper]
    #[arg(long, value_parser = ["hamming-paper", "hamming-standard", "rectangular"])]
    pub window: Option<String>,
    /// Zero-pad frames to a power of two [default: true]
    #[arg(long, num_args = 0..=1, default_missing_value = "true", value_name = "BOOL")]
    pub pad_pow2: Option<String>,
    /// Feature kind [default: fbank under paper-baseline, logmel otherwise]
    #[arg(long, value_parser = ["spectrogram", "logspec", "melspec", "logmel", "fbank", "mfcc"])]
    pub feature: Option<String>,
    /// Mel filters [default: 80]
    #[arg(long)]
    pub n_mels: Option<String>,
    /// Cepstral coefficients for mfcc [default: 13]
    #[arg(long)]
    pub n_ceps: Option<String>,
    /// Transform size; overrides the frame-derived size
    #[arg(long)]
    pub n_fft: Option<String>,
    /// Append a log-energy column to mfcc [default: true]
    #[arg(long, num_args = 0..=1, default_missing_value = "true", value_name = "BOOL")]
    pub append_energy: Option<String>,
    /// Mask features while featurizing [default: false]
    #[arg(long, num_args = 0..=1, default_missing_value = "true", value_name = "BOOL")]
    pub spec_augment: Option<String>,
    /// Maximum frequency mask width [default: 20]
    #[arg(long = "freq-mask-F")]
    pub freq_mask_f: Option<String>,
    /// Frequency masks per utterance [default: 1]
    #[arg(long)]
    pub n_freq_masks: Option<String>,
    /// Maximum time mask width, frames [default: 100]
    #[arg(long = "time-mask-T")]
    pub time_mask_t: Option<String>,
    /// Time masks per utterance [default: 10]
    #[arg(long)]
    pub n_time_masks: Option<String>,
    /// Time mask cap as a fraction of the utterance [default: 0.05]
    #[arg(long)]
    pub ps: Option<String>,
    /// Value written into masked cells [default: 0]
    #[arg(long)]
    pub mask_value: Option<String>,
    /// Token unit [default: char]
    #[arg(long, value_parser = ["char", "jamo"])]
    pub unit: Option<String>,
    /// Which side of `(A)/(B)` annotations to keep [default: spelling]
    #[arg(long, value_parser = ["spelling", "phonetic"])]
    pub transcription: Option<String>,
    /// Longest transcript kept by prep; decode length cap [default: 100]
    #[arg(long)]
    pub max_len: Option<String>,
}

impl Common {
    fn given(&self) -> Vec<(&'static str, String)> {
        let fields = [
            ("seed", &self.seed),
            ("format", &self.format),
            ("rate", &self.rate),
            ("trim-db", &self.trim_db),
            ("trim-window-ms", &self.trim_window_ms),
            ("frame-ms", &self.frame_ms),
            ("hop-ms", &self.hop_ms),
            ("window", &self.window),
            ("pad-pow2", &self.pad_pow2),
            ("feature", &self.feature),
            ("n-mels", &self.n_mels),
            ("n-ceps", &self.n_ceps),
            ("n-fft", &self.n_fft),
            ("append-energy", &self.append_energy),
            ("spec-augment", &self.spec_augment),
            ("freq-mask-F", &self.freq_mask_f),
            ("n-freq-masks", &self.n_freq_masks),
            ("time-mask-T", &self.time_mask_t),
            ("n-time-masks", &self.n_time_masks),
            ("ps", &self.ps),
            ("mask-value", &self.mask_value),
            ("unit", &self.unit),
            ("transcription", &self.transcription),
            ("max-len", &self.max_len),
        ];
        fields
            .into_iter()
            .filter_map(|(k, v)| v.clone().map(|v| (k, v)))
            .collect()
    }

    pub fn settings(&self) -> Result<Settings, CliError> {
        let file = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path)
                    .map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
                Some(config::parse_config(&text, &path.display().to_string()).map_err(CliError::usage)?)
            }
            None => None,
        };
        let profile = self
            .profile
            .as_deref()
            .map(|p| p.parse::<Profile>().map_err(CliError::usage))
            .transpose()?;
        config::resolve(file.as_ref(), profile, &self.given()).map_err(CliError::usage)
    }
}

#[derive(Debug, Args)]
pub struct BatchArgs {
    /// Input manifest, `utt_id<TAB>path[<TAB>transcript]`
    #[arg(long, value_name = "FILE")]
    pub manifest: PathBuf,
    /// Output directory; receives the files and a new manifest.tsv
    #[arg(long, value_name = "DIR")]
    pub out_dir: PathBuf,
    /// Worker threads; 0 uses every core
    #[arg(long, default_value_t = 0)]
    pub jobs: usize,
    /// Exit 0 even when some utterances fail
    #[arg(long)]
    pub keep_going: bool,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    /// Manifest with transcripts
    #[arg(long, value_name = "FILE")]
    pub manifest: PathBuf,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct DecodeArgs {
    /// Manifest of KSFM feature files
    #[arg(long, value_name = "FILE")]
    pub manifest: PathBuf,
    /// Mock posterior table, lines of `prefix_ids -> p_0 ... p_(V-1)`
    #[arg(long, value_name = "FILE")]
    pub mock_model: PathBuf,
    /// Beam width; greedy search when absent
    #[arg(long, value_name = "K")]
    pub beam: Option<usize>,
    /// Rank beams by log-probability per token
    #[arg(long)]
    pub length_norm: bool,
    /// Write results here instead of stdout
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    /// Worker threads; 0 uses every core
    #[arg(long, default_value_t = 0)]
    pub jobs: usize,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct ScoreArgs {
    /// Hypotheses: `utt_id<TAB>text`, or decode output when --vocab is given
    #[arg(long, value_name = "FILE")]
    pub hyp: PathBuf,
    /// Reference manifest; the last field of each line is the transcript
    #[arg(long = "ref", value_name = "FILE")]
    pub reference: PathBuf,
    /// Vocabulary file mapping decoded ids back to text
    #[arg(long, value_name = "FILE")]
    pub vocab: Option<PathBuf>,
    /// Remove whitespace before comparing
    #[arg(long)]
    pub ignore_spaces: bool,
    /// Write the TSV here instead of stdout
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct TraceArgs {
    #[arg(long, default_value_t = 20)]
    pub epochs: u32,
    #[arg(long, default_value_t = 100)]
    pub steps_per_epoch: u64,
    /// Comma-separated validation losses, one per epoch; the plateau
    /// tracker is idle without them
    #[arg(long, value_delimiter = ',', value_name = "LOSSES")]
    pub val_losses: Vec<f64>,
    #[arg(long, default_value_t = 400)]
    pub warmup_steps: u64,
    #[arg(long, default_value_t = 3e-4)]
    pub peak_lr: f64,
    /// Multiplier applied on a plateau
    #[arg(long, default_value_t = 0.5)]
    pub lr_factor: f64,
    /// Epochs without improvement before reducing
    #[arg(long, default_value_t = 1)]
    pub patience: u32,
    /// Minimum loss improvement that resets patience
    #[arg(long, default_value_t = 1e-4)]
    pub lr_threshold: f64,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct SelftestArgs {
    /// Random instances per suite
    #[arg(long, default_value_t = 100)]
    pub cases: usize,
    #[command(flatten)]
    pub common: Common,
}

/// Parses `args` (program name first) and runs the command. Standard
/// output goes to `out`; diagnostics to stderr.
pub fn run<I, T>(args: I, out: &mut dyn Write) -> Result<ExitCode, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            write!(out, "{e}").map_err(CliError::internal)?;
            return Ok(ExitCode::Ok);
        }
        Err(e) => return Err(CliError::usage(e.render().to_string().trim_end())),
    };
    let text = dispatch(cli.command)?;
    out.write_all(text.stdout.as_bytes()).map_err(CliError::internal)?;
    Ok(text.code)
}

struct Outcome {
    stdout: String,
    code: ExitCode,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Self {
            stdout,
            code: ExitCode::Ok,
        }
    }
}

fn dispatch(cmd: Command) -> Result<Outcome, CliError> {
    match cmd {
        Command::Trim(a) => cmd_trim(&a),
        Command::Featurize(a) => cmd_featurize(&a),
        Command::Augment(a) => cmd_augment(&a),
        Command::Prep(a) => cmd_prep(&a),
        Command::Stats(a) => cmd_stats(&a),
        Command::Decode(a) => cmd_decode(&a),
        Command::Score(a) => cmd_score(&a),
        Command::ScheduleTrace(a) => cmd_schedule_trace(&a),
        Command::Selftest(a) => cmd_selftest(&a),
    }
}

fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::data(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, bytes: impl AsRef<[u8]>) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(|e| CliError::data(format!("{}: {e}", path.display())))
}

fn load_manifest(path: &Path) -> Result<Vec<Entry>, CliError> {
    let text = read_text(path)?;
    manifest::parse(&text, path.parent()).map_err(|e| CliError::data(format!("{}: {e}", path.display())))
}

fn create_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::data(format!("{}: {e}", dir.display())))
}

fn pool_for(jobs: usize) -> Result<rayon::ThreadPool, CliError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(CliError::internal)
}

/// Runs `f` over the manifest on a bounded pool, keeping manifest order.
fn par_map<R: Send>(
    jobs: usize,
    entries: &[Entry],
    f: impl Fn(usize, &Entry) -> Result<R, String> + Sync,
) -> Result<Vec<Result<R, String>>, CliError> {
    let pool = pool_for(jobs)?;
    Ok(pool.install(|| {
        entries
            .par_iter()
            .enumerate()
            .map(|(i, e)| f(i, e))
            .collect()
    }))
}

/// Path as written into a manifest stored in `dir`: files inside `dir` by
/// name, anything else absolute.
fn manifest_path(dir: &Path, path: &Path) -> PathBuf {
    match path.strip_prefix(dir) {
        Ok(rel) => rel.to_path_buf(),
        Err(_) => std::path::absolute(path).unwrap_or_else(|_| path.to_path_buf()),
    }
}

/// Output path for an utterance: the id with unsafe characters replaced.
fn out_path(dir: &Path, utt: &str, ext: &str) -> PathBuf {
    let safe: String = utt
        .chars()
        .map(|c| if c.is_alphanumeric() || "-_.".contains(c) { c } else { '_' })
        .collect();
    dir.join(format!("{safe}.{ext}"))
}

/// Collects per-utterance results into a manifest, a summary and an exit code.
struct Batch {
    kept: Vec<Entry>,
    failures: Vec<(String, String)>,
}

impl Batch {
    fn new() -> Self {
        Self {
            kept: Vec::new(),
            failures: Vec::new(),
        }
    }

    fn finish(mut self, out_dir: &Path, keep_going: bool, mut stdout: String, summary: String) -> Result<Outcome, CliError> {
        for e in &mut self.kept {
            e.path = manifest_path(out_dir, &e.path);
        }
        write_file(&out_dir.join("manifest.tsv"), manifest::render(&self.kept))?;
        let _ = writeln!(stdout, "{summary} failures={}", self.failures.len());
        for (utt, err) in &self.failures {
            let _ = writeln!(stdout, "failed\t{utt}\t{err}");
            eprintln!("ksr: {utt}: {err}");
        }
        let code = if self.failures.is_empty() || keep_going {
            ExitCode::Ok
        } else {
            ExitCode::Data
        };
        Ok(Outcome { stdout, code })
    }
}

fn cmd_trim(a: &BatchArgs) -> Result<Outcome, CliError> {
    let s = a.common.settings()?;
    let entries = load_manifest(&a.manifest)?;
    create_dir(&a.out_dir)?;
    let results = par_map(a.jobs, &entries, |_, e| {
        let buf = wav::load_audio(&e.path, s.format, s.rate).map_err(|e| e.to_string())?;
        let (trimmed, report) = trim_silence(&buf, s.trim_db, s.trim_window_ms).map_err(|e| e.to_string())?;
        let path = out_path(&a.out_dir, &e.utt_id, "wav");
        wav::write_wav(&path, &trimmed).map_err(|e| format!("{}: {e}", path.display()))?;
        Ok((path, report))
    })?;
    let mut batch = Batch::new();
    let mut stdout = String::new();
    for (e, r) in entries.iter().zip(results) {
        match r {
            Ok((path, report)) => {
                let status = match report.status {
                    TrimStatus::Retained => "retained",
                    TrimStatus::AllSilent => "all-silent",
                };
                let _ = writeln!(
                    stdout,
                    "{}\t{}\t{}\t{status}",
                    e.utt_id, report.leading_samples_removed, report.trailing_samples_removed
                );
                batch.kept.push(Entry { path, ..e.clone() });
            }
            Err(err) => batch.failures.push((e.utt_id.clone(), err)),
        }
    }
    let summary = format!("trimmed={}", batch.kept.len());
    batch.finish(&a.out_dir, a.keep_going, stdout, summary)
}

fn featurize_one(s: &Settings, index: usize, e: &Entry) -> Result<FeatureMatrix, String> {
    let buf = wav::load_audio(&e.path, s.format, s.rate).map_err(|e| e.to_string())?;
    let m = extract(&buf, s.feature, &s.frame_config(), s.window, &s.feature_params()).map_err(|e| e.to_string())?;
    if s.spec_augment {
        let policy = s.augment_policy(s.seed.wrapping_add(index as u64));
        Ok(augment(&m, &policy).map_err(|e| e.to_string())?.0)
    } else {
        Ok(m)
    }
}

fn cmd_featurize(a: &BatchArgs) -> Result<Outcome, CliError> {
    let s = a.common.settings()?;
    let entries = load_manifest(&a.manifest)?;
    create_dir(&a.out_dir)?;
    let results = par_map(a.jobs, &entries, |i, e| {
        let m = featurize_one(&s, i, e)?;
        let path = out_path(&a.out_dir, &e.utt_id, "ksfm");
        ksfm::write(&path, &m).map_err(|e| e.to_string())?;
        Ok((path, m.rows()))
    })?;
    let mut batch = Batch::new();
    let mut frames = 0;
    for (e, r) in entries.iter().zip(results) {
        match r {
            Ok((path, rows)) => {
                frames += rows;
                batch.kept.push(Entry { path, ..e.clone() });
            }
            Err(err) => batch.failures.push((e.utt_id.clone(), err)),
        }
    }
    let summary = format!("utterances={} frames={frames}", batch.kept.len());
    batch.finish(&a.out_dir, a.keep_going, String::new(), summary)
}

fn cmd_augment(a: &BatchArgs) -> Result<Outcome, CliError> {
    let s = a.common.settings()?;
    let entries = load_manifest(&a.manifest)?;
    create_dir(&a.out_dir)?;
    let results = par_map(a.jobs, &entries, |i, e| {
        let m = ksfm::read(&e.path).map_err(|e| e.to_string())?;
        let (masked, masks) = augment(&m, &s.augment_policy(s.seed.wrapping_add(i as u64))).map_err(|e| e.to_string())?;
        let path = out_path(&a.out_dir, &e.utt_id, "ksfm");
        ksfm::write(&path, &masked).map_err(|e| e.to_string())?;
        Ok((path, masks))
    })?;
    let mut batch = Batch::new();
    let mut audit = String::new();
    for (e, r) in entries.iter().zip(results) {
        match r {
            Ok((path, masks)) => {
                for m in masks {
                    let _ = writeln!(audit, "{}\t{}\t{}\t{}", e.utt_id, m.axis, m.offset, m.width);
                }
                batch.kept.push(Entry { path, ..e.clone() });
            }
            Err(err) => batch.failures.push((e.utt_id.clone(), err)),
        }
    }
    write_file(&a.out_dir.join("masks.tsv"), &audit)?;
    let summary = format!("augmented={}", batch.kept.len());
    batch.finish(&a.out_dir, a.keep_going, audit, summary)
}

fn cmd_prep(a: &BatchArgs) -> Result<Outcome, CliError> {
    let s = a.common.settings()?;
    let entries = load_manifest(&a.manifest)?;
    create_dir(&a.out_dir)?;
    let rules = s.cleanup_rules();
    let mut batch = Batch::new();
    let mut dropped = 0;
    for e in &entries {
        let Some(raw) = &e.transcript else {
            batch.failures.push((e.utt_id.clone(), "no transcript".into()));
            continue;
        };
        match clean_transcript(raw, &rules) {
            Ok(t) if t.is_empty() || s.unit.split(&t).len() > s.max_len => dropped += 1,
            Ok(t) => batch.kept.push(Entry {
                transcript: Some(t),
                ..e.clone()
            }),
            Err(err) => batch.failures.push((e.utt_id.clone(), err.to_string())),
        }
    }
    let corpus: Vec<&str> = batch.kept.iter().filter_map(|e| e.transcript.as_deref()).collect();
    let vocab_size = if corpus.is_empty() {
        write_file(&a.out_dir.join("vocab.txt"), "")?;
        0
    } else {
        let vocab = build_vocab(&corpus, s.unit).map_err(CliError::data)?;
        write_file(&a.out_dir.join("vocab.txt"), render_vocab(&vocab))?;
        vocab.len()
    };
    let summary = format!("kept={} dropped={dropped} vocab={vocab_size}", batch.kept.len());
    batch.finish(&a.out_dir, a.keep_going, String::new(), summary)
}

pub fn render_vocab(v: &Vocabulary) -> String {
    v.tokens().into_iter().map(|t| t + "\n").collect()
}

pub fn parse_vocab(text: &str, unit: Unit) -> Result<Vocabulary, CliError> {
    let lines: Vec<&str> = text.split('\n').collect();
    let lines = match lines.split_last() {
        Some((&"", rest)) => rest,
        _ => &lines[..],
    };
    Vocabulary::from_tokens(unit, lines).map_err(CliError::data)
}

fn cmd_stats(a: &StatsArgs) -> Result<Outcome, CliError> {
    let s = a.common.settings()?;
    let entries = load_manifest(&a.manifest)?;
    let lengths: Vec<usize> = entries
        .iter()
        .map(|e| {
            let t = e.transcript.as_deref().unwrap_or_default();
            s.unit.split(t).len()
        })
        .collect();
    let st = corpus_length_stats(&lengths).map_err(CliError::data)?;
    let over = lengths.iter().filter(|&&l| l > s.max_len).count();
    let mut out = String::new();
    let _ = writeln!(out, "count\t{}", st.count);
    let _ = writeln!(out, "min\t{}", st.min);
    let _ = writeln!(out, "q1\t{}", g6(st.q1));
    let _ = writeln!(out, "median\t{}", g6(st.median));
    let _ = writeln!(out, "q3\t{}", g6(st.q3));
    let _ = writeln!(out, "max\t{}", st.max);
    let _ = writeln!(out, "outlier_threshold\t{}", g6(st.iqr_outlier_threshold));
    let _ = writeln!(out, "over_max_len\t{over}");
    Ok(Outcome::ok(out))
}

pub fn format_hypothesis(utt: &str, h: &Hypothesis) -> String {
    let ids: Vec<String> = h.output_tokens().iter().map(u32::to_string).collect();
    format!("{utt}\t{}\t{}\n", ids.join(" "), g6(h.log_prob))
}

fn decode_one(model: &MockModel, beam: Option<usize>, length_norm: bool) -> Result<Hypothesis, String> {
    match beam {
        None => greedy_decode(model).map_err(|e| e.to_string()),
        Some(k) => beam_decode(model, k, length_norm)
            .map_err(|e| e.to_string())?
            .into_iter()
            .next()
            .ok_or_else(|| "beam search returned nothing".to_owned()),
    }
}

fn cmd_decode(a: &DecodeArgs) -> Result<Outcome, CliError> {
    let s = a.common.settings()?;
    if a.beam == Some(0) {
        return Err(CliError::usage("--beam must be at least 1"));
    }
    let model = mockfile::parse(&read_text(&a.mock_model)?, s.max_len)
        .map_err(|e| CliError::data(format!("{}: {e}", a.mock_model.display())))?;
    let entries = load_manifest(&a.manifest)?;
    let results = par_map(a.jobs, &entries, |_, e| {
        ksfm::read(&e.path).map_err(|e| e.to_string())?;
        decode_one(&model, a.beam, a.length_norm)
    })?;
    let mut text = String::new();
    let mut failures = Vec::new();
    for (e, r) in entries.iter().zip(results) {
        match r {
            Ok(h) => text.push_str(&format_hypothesis(&e.utt_id, &h)),
            Err(err) => failures.push(format!("{}: {err}", e.utt_id)),
        }
    }
    let stdout = match &a.out {
        Some(p) => {
            write_file(p, &text)?;
            String::new()
        }
        None => text,
    };
    if failures.is_empty() {
        Ok(Outcome::ok(stdout))
    } else {
        Err(CliError::data(failures.join("\n")))
    }
}

fn cmd_score(a: &ScoreArgs) -> Result<Outcome, CliError> {
    let s = a.common.settings()?;
    let vocab = match &a.vocab {
        Some(p) => Some(parse_vocab(&read_text(p)?, s.unit)?),
        None => None,
    };
    let mut hyps = std::collections::HashMap::new();
    for (i, line) in read_text(&a.hyp)?.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let mut f = line.split('\t');
        let utt = f.next().unwrap_or_default();
        let body = f.next().unwrap_or_default();
        let text = match &vocab {
            Some(v) => {
                let ids = body
                    .split_whitespace()
                    .map(str::parse::<u32>)
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|_| CliError::data(format!("{}:{}: bad token id", a.hyp.display(), i + 1)))?;
                v.decode(&ids)
            }
            None => body.to_owned(),
        };
        hyps.insert(utt.to_owned(), text);
    }
    let refs = read_text(&a.reference)?;
    let opts = CerOptions {
        unit: s.unit,
        ignore_spaces: a.ignore_spaces,
    };
    let mut out = String::from("utt_id\tdistance\tref_len\tcer\n");
    let mut results: Vec<CerResult> = Vec::new();
    for (i, line) in refs.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() < 2 {
            return Err(CliError::data(format!("{}:{}: no transcript", a.reference.display(), i + 1)));
        }
        let utt = fields[0];
        let reference = fields[fields.len() - 1];
        let hyp = hyps
            .get(utt)
            .ok_or_else(|| CliError::data(format!("no hypothesis for {utt}")))?;
        let r = cer(hyp, reference, &opts).map_err(|e| CliError::data(format!("{utt}: {e}")))?;
        let _ = writeln!(out, "{utt}\t{}\t{}\t{}", r.distance, r.ref_len, g6(r.cer_percent));
        results.push(r);
    }
    let p = pool(&results).map_err(CliError::data)?;
    let _ = writeln!(out, "pooled\t{}\t{}\t{}", p.distance, p.ref_len, g6(p.cer_percent));
    match &a.out {
        Some(path) => {
            write_file(path, &out)?;
            Ok(Outcome::ok(String::new()))
        }
        None => Ok(Outcome::ok(out)),
    }
}

fn cmd_schedule_trace(a: &TraceArgs) -> Result<Outcome, CliError> {
    a.common.settings()?;
    let valid = a.warmup_steps > 0
        && a.peak_lr > 0.0
        && a.lr_factor > 0.0
        && a.lr_factor <= 1.0
        && a.lr_threshold >= 0.0;
    if !valid {
        return Err(CliError::usage(
            "need --warmup-steps > 0, --peak-lr > 0, 0 < --lr-factor <= 1 and --lr-threshold >= 0",
        ));
    }
    if !a.val_losses.is_empty() && a.val_losses.len() < a.epochs as usize {
        return Err(CliError::usage(format!(
            "--val-losses has {} values for {} epochs",
            a.val_losses.len(),
            a.epochs
        )));
    }
    let mut lr = LrScheduleState::new(a.warmup_steps, a.peak_lr, a.lr_factor, a.patience, a.lr_threshold);
    let mut out = String::from("epoch\tteacher_forcing\tlr_first_step\tlr_last_step\tval_loss\treduced\n");
    for epoch in 0..a.epochs {
        let first = u64::from(epoch) * a.steps_per_epoch;
        let last = first + a.steps_per_epoch.saturating_sub(1);
        let (lr_first, lr_last) = (lr.lr_on_step(first), lr.lr_on_step(last));
        let (loss, reduced) = match a.val_losses.get(epoch as usize) {
            Some(&l) => (g6(l), lr.lr_on_epoch_end(l)),
            None => ("-".to_owned(), false),
        };
        let _ = writeln!(
            out,
            "{epoch}\t{}\t{}\t{}\t{loss}\t{}",
            g6(teacher_forcing_ratio(epoch)),
            g6(lr_first),
            g6(lr_last),
            u8::from(reduced)
        );
    }
    Ok(Outcome::ok(out))
}

fn cmd_selftest(a: &SelftestArgs) -> Result<Outcome, CliError> {
    let s = a.common.settings()?;
    let report = selftest::run_all(s.seed, a.cases.max(1));
    let mut out = String::new();
    for r in &report {
        let _ = writeln!(out, "{}\t{}/{} passed", r.suite, r.passed, r.total);
    }
    let failed = report.iter().any(|r| r.passed != r.total);
    if failed {
        for r in &report {
            if let Some(msg) = &r.first_failure {
                eprintln!("ksr: selftest {}: {msg}", r.suite);
            }
        }
    }
    Ok(Outcome {
        stdout: out,
        code: if failed { ExitCode::Internal } else { ExitCode::Ok },
    })
}
