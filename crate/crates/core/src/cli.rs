//! Command-line front end.
//!
//! Exit codes: 0 on success, 2 for unparseable input (bad flags, malformed
//! files), 3 for well-formed input that violates a constraint (gamma out of
//! bounds, zero-sized image, too many gaps, ...).
//!
//! Configuration precedence is defaults < config file < flags. The config
//! file comes from `--config`, or failing that from `$OMEGA_PE_CONFIG`. It
//! holds `key=value` lines; `#` starts a comment. Recognised keys:
//! `bins`, `gamma_min`, `gamma_max`, `visual_step`, `head_dim`,
//! `rotary_split` (three comma-separated pair counts), `rotary_base` and
//! `format` (`csv` or `json`).

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;
use thiserror::Error;

use crate::gaess::{embedding_entropy, estimate_gamma, GaessConfig, GaessError};
use crate::index::{derive, IndexAssignment, IndexError, IndexStrategy, Strategy, V2peConfig};
use crate::io::{self, format_real, round_sig9, FormatError, IndexDocument};
use crate::perturb::{
    perturb, run_sweep, GapSpec, PerturbError, PerturbSpec, ShuffleSpec, SweepConfig, SweepGrid,
};
use crate::rotary::{RotaryConfig, RotaryError};
use crate::seq::{build_sequence, MultimodalSequence, SeqError};

pub const CONFIG_ENV: &str = "OMEGA_PE_CONFIG";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Parse(String),
    #[error("{0}")]
    Constraint(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Parse(_) => 2,
            CliError::Constraint(_) => 3,
        }
    }
}

impl From<FormatError> for CliError {
    fn from(e: FormatError) -> Self {
        CliError::Parse(e.to_string())
    }
}

impl From<SeqError> for CliError {
    fn from(e: SeqError) -> Self {
        CliError::Constraint(e.to_string())
    }
}

impl From<IndexError> for CliError {
    fn from(e: IndexError) -> Self {
        CliError::Constraint(e.to_string())
    }
}

impl From<GaessError> for CliError {
    fn from(e: GaessError) -> Self {
        match e {
            GaessError::NonFiniteInput { .. }
            | GaessError::ShapeMismatch { .. }
            | GaessError::EmptyMatrix { .. } => CliError::Parse(e.to_string()),
            _ => CliError::Constraint(e.to_string()),
        }
    }
}

impl From<PerturbError> for CliError {
    fn from(e: PerturbError) -> Self {
        CliError::Constraint(e.to_string())
    }
}

impl From<RotaryError> for CliError {
    fn from(e: RotaryError) -> Self {
        CliError::Constraint(e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl std::str::FromStr for OutputFormat {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(format!("unknown format `{other}`")),
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "omega-pe",
    version,
    about = "Positional index derivation for multimodal token sequences"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Default)]
pub struct GlobalOpts {
    /// Key-value config file (overrides $OMEGA_PE_CONFIG).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<OutputFormat>,
    /// Histogram bins per embedding dimension.
    #[arg(long, global = true)]
    pub bins: Option<usize>,
    #[arg(long = "gamma-min", global = true)]
    pub gamma_min: Option<f64>,
    #[arg(long = "gamma-max", global = true)]
    pub gamma_max: Option<f64>,
    /// Fractional visual step for v2pe.
    #[arg(long = "visual-step", global = true)]
    pub visual_step: Option<f64>,
    #[arg(long = "head-dim", global = true)]
    pub head_dim: Option<usize>,
    #[arg(long = "rotary-base", global = true)]
    pub rotary_base: Option<f64>,
    /// Write output here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GammaSource {
    /// Fixed scaling factor for omega.
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Text embedding matrix (EMB1 or CSV).
    #[arg(long)]
    pub text: Option<PathBuf>,
    /// Visual embedding matrix (EMB1 or CSV).
    #[arg(long)]
    pub vision: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Derive positional indices for a sequence description.
    Derive {
        #[arg(long)]
        strategy: Strategy,
        #[arg(long)]
        seq: PathBuf,
        #[command(flatten)]
        gamma: GammaSource,
    },
    /// Histogram entropy of an embedding matrix.
    Entropy {
        file: PathBuf,
        /// Include per-dimension entropies.
        #[arg(long = "per-dim")]
        per_dim: bool,
    },
    /// Scaling factor from text and visual embedding matrices.
    Gamma {
        #[arg(long)]
        text: PathBuf,
        #[arg(long)]
        vision: PathBuf,
    },
    /// Perturb an index table.
    #[command(subcommand)]
    Perturb(PerturbCommand),
    /// Score-matrix divergence under increasing perturbation.
    Sweep {
        #[arg(long)]
        seq: PathBuf,
        #[arg(long, default_value = "mspe")]
        strategy: Strategy,
        /// Comma-separated gap counts.
        #[arg(
            long,
            value_delimiter = ',',
            conflicts_with = "shuffle",
            required_unless_present = "shuffle"
        )]
        gaps: Option<Vec<usize>>,
        #[arg(long = "gap-size", default_value_t = 1)]
        gap_size: usize,
        /// Comma-separated shuffle proportions.
        #[arg(long, value_delimiter = ',')]
        shuffle: Option<Vec<f64>>,
        #[arg(long, default_value_t = 8)]
        trials: usize,
        #[arg(long)]
        seed: u64,
        #[command(flatten)]
        gamma: GammaSource,
    },
    /// Side-by-side indices under several strategies.
    Compare {
        #[arg(long)]
        seq: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "1d,2d,mspe")]
        strategies: Vec<Strategy>,
        #[command(flatten)]
        gamma: GammaSource,
    },
}

#[derive(Debug, Subcommand)]
pub enum PerturbCommand {
    /// Open gaps in the sequence axis of a text-only index table.
    Gaps {
        #[arg(long)]
        index: PathBuf,
        #[arg(long = "n-gaps")]
        n_gaps: usize,
        #[arg(long = "gap-size")]
        gap_size: usize,
        #[arg(long)]
        seed: u64,
    },
    /// Permute the indices of a proportion of visual tokens.
    Shuffle {
        #[arg(long)]
        index: PathBuf,
        #[arg(long)]
        proportion: f64,
        #[arg(long)]
        seed: u64,
    },
}

/// Effective configuration after merging defaults, config file and flags.
#[derive(Debug, Clone, PartialEq)]
pub struct CliConfig {
    pub gaess: GaessConfig,
    pub v2pe: V2peConfig,
    pub rotary: RotaryConfig,
    pub format: OutputFormat,
}

impl Default for CliConfig {
    fn default() -> Self {
        Self {
            gaess: GaessConfig::default(),
            v2pe: V2peConfig::default(),
            rotary: RotaryConfig::default(),
            format: OutputFormat::Csv,
        }
    }
}

#[derive(Debug, Default)]
struct RawConfig {
    bins: Option<usize>,
    gamma_min: Option<f64>,
    gamma_max: Option<f64>,
    visual_step: Option<f64>,
    head_dim: Option<usize>,
    rotary_split: Option<(usize, usize, usize)>,
    rotary_base: Option<f64>,
    format: Option<OutputFormat>,
}

fn parse_value<T: std::str::FromStr>(key: &str, value: &str, line: usize) -> Result<T, CliError> {
    value.parse().map_err(|_| {
        CliError::Parse(format!(
            "config line {line}: bad value `{value}` for `{key}`"
        ))
    })
}

fn parse_config_text(text: &str) -> Result<RawConfig, CliError> {
    let mut raw = RawConfig::default();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::Parse(format!("config line {line_no}: expected key=value")))?;
        let (key, value) = (key.trim(), value.trim());
        match key {
            "bins" => raw.bins = Some(parse_value(key, value, line_no)?),
            "gamma_min" => raw.gamma_min = Some(parse_value(key, value, line_no)?),
            "gamma_max" => raw.gamma_max = Some(parse_value(key, value, line_no)?),
            "visual_step" => raw.visual_step = Some(parse_value(key, value, line_no)?),
            "head_dim" => raw.head_dim = Some(parse_value(key, value, line_no)?),
            "rotary_base" => raw.rotary_base = Some(parse_value(key, value, line_no)?),
            "format" => raw.format = Some(parse_value(key, value, line_no)?),
            "rotary_split" => {
                let parts: Vec<usize> = value
                    .split(',')
                    .map(|p| parse_value(key, p.trim(), line_no))
                    .collect::<Result<_, _>>()?;
                let [a, b, c] = parts[..] else {
                    return Err(CliError::Parse(format!(
                        "config line {line_no}: rotary_split needs three counts"
                    )));
                };
                raw.rotary_split = Some((a, b, c));
            }
            other => {
                return Err(CliError::Parse(format!(
                    "config line {line_no}: unknown key `{other}`"
                )))
            }
        }
    }
    Ok(raw)
}

impl CliConfig {
    /// Merges an optional config file's text with command-line flags.
    pub fn resolve(file_text: Option<&str>, flags: &GlobalOpts) -> Result<Self, CliError> {
        let raw = match file_text {
            Some(t) => parse_config_text(t)?,
            None => RawConfig::default(),
        };
        let defaults = CliConfig::default();
        let bins = flags.bins.or(raw.bins).unwrap_or(defaults.gaess.bins());
        let gamma_min = flags
            .gamma_min
            .or(raw.gamma_min)
            .unwrap_or(defaults.gaess.gamma_min());
        let gamma_max = flags
            .gamma_max
            .or(raw.gamma_max)
            .unwrap_or(defaults.gaess.gamma_max());
        let gaess = GaessConfig::new(bins, gamma_min, gamma_max)?;
        let v2pe = match flags.visual_step.or(raw.visual_step) {
            Some(step) => V2peConfig::new(step)?,
            None => defaults.v2pe,
        };
        let head_dim = flags
            .head_dim
            .or(raw.head_dim)
            .unwrap_or(defaults.rotary.head_dim());
        let split = raw
            .rotary_split
            .unwrap_or_else(|| RotaryConfig::default_split(head_dim));
        let base = flags
            .rotary_base
            .or(raw.rotary_base)
            .unwrap_or(defaults.rotary.base());
        let rotary = RotaryConfig::new(head_dim, split, base)?;
        let format = flags.format.or(raw.format).unwrap_or_default();
        Ok(Self {
            gaess,
            v2pe,
            rotary,
            format,
        })
    }

    pub fn echo(&self) -> serde_json::Value {
        let (n_s, n_r, n_c) = self.rotary.split();
        json!({
            "bins": self.gaess.bins(),
            "gamma_min": self.gaess.gamma_min(),
            "gamma_max": self.gaess.gamma_max(),
            "visual_step": self.v2pe.visual_step(),
            "head_dim": self.rotary.head_dim(),
            "rotary_split": [n_s, n_r, n_c],
            "rotary_base": self.rotary.base(),
        })
    }
}

fn load_sequence(path: &Path) -> Result<MultimodalSequence, CliError> {
    let spec = io::read_sequence_spec(path)?;
    Ok(build_sequence(&spec)?)
}

/// Turns a strategy tag into a parameterised strategy. For omega the
/// scaling factor is either given directly or estimated from embeddings;
/// the second element is `Some` when it was estimated.
fn resolve_strategy(
    strategy: Strategy,
    source: &GammaSource,
    cfg: &CliConfig,
) -> Result<(IndexStrategy, Option<f64>), CliError> {
    Ok(match strategy {
        Strategy::NoPe => (IndexStrategy::NoPe, None),
        Strategy::OneD => (IndexStrategy::OneD, None),
        Strategy::TwoD => (IndexStrategy::TwoD, None),
        Strategy::Mipe => (IndexStrategy::Mipe, None),
        Strategy::V2pe => (IndexStrategy::V2pe(cfg.v2pe), None),
        Strategy::Mspe => (IndexStrategy::Mspe, None),
        Strategy::Omega => match (source.gamma, &source.text, &source.vision) {
            (Some(gamma), None, None) => (
                IndexStrategy::Omega {
                    gamma,
                    bounds: cfg.gaess,
                },
                None,
            ),
            (None, Some(text), Some(vision)) => {
                let t = io::read_embedding_file(text)?;
                let v = io::read_embedding_file(vision)?;
                let gamma = estimate_gamma(&t, &v, &cfg.gaess)?.gamma;
                (
                    IndexStrategy::Omega {
                        gamma,
                        bounds: cfg.gaess,
                    },
                    Some(gamma),
                )
            }
            _ => {
                return Err(CliError::Parse(
                    "omega needs either --gamma or both --text and --vision".to_string(),
                ))
            }
        },
    })
}

fn render_assignment(
    a: &IndexAssignment,
    format: OutputFormat,
    config: serde_json::Value,
) -> String {
    match format {
        OutputFormat::Csv => io::write_index_csv(a),
        OutputFormat::Json => io::write_index_json(a, config),
    }
}

fn emit(body: &str, out_path: Option<&Path>, stdout: &mut dyn Write) -> Result<(), CliError> {
    match out_path {
        Some(p) => io::write_file(p, body.as_bytes())?,
        None => stdout
            .write_all(body.as_bytes())
            .map_err(|e| CliError::Parse(e.to_string()))?,
    }
    Ok(())
}

fn say(stdout: &mut dyn Write, line: &str) -> Result<(), CliError> {
    writeln!(stdout, "{line}").map_err(|e| CliError::Parse(e.to_string()))
}

/// Runs a parsed command. `env_config` is the config file named by the
/// environment, used when `--config` is absent.
pub fn execute(
    cli: Cli,
    env_config: Option<PathBuf>,
    stdout: &mut dyn Write,
) -> Result<(), CliError> {
    let config_path = cli.global.config.clone().or(env_config);
    let config_text = config_path.as_deref().map(io::read_to_string).transpose()?;
    let cfg = CliConfig::resolve(config_text.as_deref(), &cli.global)?;
    let out_path = cli.global.out.as_deref();

    match cli.command {
        Command::Derive {
            strategy,
            seq,
            gamma,
        } => {
            let seq = load_sequence(&seq)?;
            let (strategy, estimated) = resolve_strategy(strategy, &gamma, &cfg)?;
            let a = derive(&seq, &strategy)?;
            let body = render_assignment(&a, cfg.format, cfg.echo());
            emit(&body, out_path, stdout)?;
            if let (Some(g), Some(_)) = (estimated, out_path) {
                say(stdout, &format!("gamma={}", format_real(g)))?;
            }
        }
        Command::Entropy { file, per_dim } => {
            let z = io::read_embedding_file(&file)?;
            let report = embedding_entropy(&z, cfg.gaess.bins())?;
            let mut doc = json!({
                "rows": z.rows(),
                "cols": z.cols(),
                "bins": cfg.gaess.bins(),
                "h_bits": round_sig9(report.h_bits),
            });
            if per_dim {
                doc["per_dim"] = report.per_dim.iter().map(|&h| round_sig9(h)).collect();
            }
            let body = serde_json::to_string_pretty(&doc).expect("serializable") + "\n";
            emit(&body, out_path, stdout)?;
        }
        Command::Gamma { text, vision } => {
            let t = io::read_embedding_file(&text)?;
            let v = io::read_embedding_file(&vision)?;
            let est = estimate_gamma(&t, &v, &cfg.gaess)?;
            let body = format!(
                "h_txt={}\nh_vis={}\ngamma={}\n",
                format_real(est.text.h_bits),
                format_real(est.vision.h_bits),
                format_real(est.gamma)
            );
            emit(&body, out_path, stdout)?;
        }
        Command::Perturb(cmd) => {
            let (path, spec): (&Path, PerturbSpec) = match &cmd {
                PerturbCommand::Gaps {
                    index,
                    n_gaps,
                    gap_size,
                    seed,
                } => (
                    index,
                    PerturbSpec::VisualGaps(GapSpec {
                        n_gaps: *n_gaps,
                        gap_size: *gap_size,
                        seed: *seed,
                    }),
                ),
                PerturbCommand::Shuffle {
                    index,
                    proportion,
                    seed,
                } => (
                    index,
                    PerturbSpec::Shuffle(ShuffleSpec {
                        proportion: *proportion,
                        seed: *seed,
                    }),
                ),
            };
            let text = io::read_to_string(path)?;
            let is_json = text.trim_start().starts_with('{');
            let (input, config) = if is_json {
                let doc: IndexDocument = serde_json::from_str(&text).map_err(FormatError::from)?;
                let config = doc.metadata.config.clone();
                (doc.into_assignment(), config)
            } else {
                (io::parse_index_csv(&text)?, cfg.echo())
            };
            let output = perturb(&input, &spec)?;
            // The input's own format wins unless --format is explicit.
            let format = cli.global.format.unwrap_or(if is_json {
                OutputFormat::Json
            } else {
                OutputFormat::Csv
            });
            emit(
                &render_assignment(&output, format, config),
                out_path,
                stdout,
            )?;
        }
        Command::Sweep {
            seq,
            strategy,
            gaps,
            gap_size,
            shuffle,
            trials,
            seed,
            gamma,
        } => {
            let seq = load_sequence(&seq)?;
            let (strategy, _) = resolve_strategy(strategy, &gamma, &cfg)?;
            let grid = match (gaps, shuffle) {
                (Some(levels), None) => SweepGrid::Gaps { levels, gap_size },
                (None, Some(proportions)) => SweepGrid::Shuffle { proportions },
                _ => {
                    return Err(CliError::Parse(
                        "give exactly one of --gaps or --shuffle".to_string(),
                    ))
                }
            };
            let rows = run_sweep(
                &seq,
                &strategy,
                &SweepConfig {
                    grid,
                    trials,
                    seed,
                    rotary: cfg.rotary.clone(),
                },
            )?;
            emit(&io::write_sweep_csv(&rows), out_path, stdout)?;
        }
        Command::Compare {
            seq,
            strategies,
            gamma,
        } => {
            let seq = load_sequence(&seq)?;
            let mut assignments = Vec::with_capacity(strategies.len());
            for &st in &strategies {
                let (strategy, _) = resolve_strategy(st, &gamma, &cfg)?;
                assignments.push(derive(&seq, &strategy)?);
            }
            let body = match cfg.format {
                OutputFormat::Csv => compare_csv(&strategies, &assignments),
                OutputFormat::Json => compare_json(&strategies, &assignments, cfg.echo()),
            };
            emit(&body, out_path, stdout)?;
        }
    }
    Ok(())
}

fn compare_csv(strategies: &[Strategy], assignments: &[IndexAssignment]) -> String {
    let mut out = String::from("seq_pos,modality");
    for st in strategies {
        let _ = write!(out, ",{st}_s,{st}_r,{st}_c");
    }
    out.push('\n');
    let Some(first) = assignments.first() else {
        return out;
    };
    for (i, e) in first.entries.iter().enumerate() {
        let _ = write!(out, "{},{}", e.seq_pos, e.modality);
        for a in assignments {
            let p = a.entries[i].index;
            let _ = write!(
                out,
                ",{},{},{}",
                format_real(p.s),
                format_real(p.r),
                format_real(p.c)
            );
        }
        out.push('\n');
    }
    out
}

fn compare_json(
    strategies: &[Strategy],
    assignments: &[IndexAssignment],
    config: serde_json::Value,
) -> String {
    let rows: Vec<serde_json::Value> = assignments
        .first()
        .map(|first| {
            first
                .entries
                .iter()
                .enumerate()
                .map(|(i, e)| {
                    let mut indices = serde_json::Map::new();
                    for (st, a) in strategies.iter().zip(assignments) {
                        let p = a.entries[i].index;
                        indices.insert(
                            st.to_string(),
                            json!([round_sig9(p.s), round_sig9(p.r), round_sig9(p.c)]),
                        );
                    }
                    json!({ "seq_pos": e.seq_pos, "modality": e.modality, "indices": indices })
                })
                .collect()
        })
        .unwrap_or_default();
    let doc = json!({ "strategies": strategies, "config": config, "rows": rows });
    serde_json::to_string_pretty(&doc).expect("serializable") + "\n"
}

/// Parses `args`, runs the command and maps the outcome to an exit code.
pub fn run<I, T>(
    args: I,
    env_config: Option<PathBuf>,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            if code == 0 {
                let _ = write!(stdout, "{}", e.render());
            } else {
                let _ = write!(stderr, "{}", e.render());
            }
            return if code == 0 { 0 } else { 2 };
        }
    };
    match execute(cli, env_config, stdout) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

/// Entry point used by the binary.
pub fn main_entry() -> ExitCode {
    let env_config = std::env::var_os(CONFIG_ENV)
        .filter(|v| !v.is_empty())
        .map(PathBuf::from);
    let code = run(
        std::env::args_os(),
        env_config,
        &mut std::io::stdout().lock(),
        &mut std::io::stderr().lock(),
    );
    ExitCode::from(code)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_precedence() {
        let flags = GlobalOpts {
            bins: Some(32),
            ..Default::default()
        };
        let cfg = CliConfig::resolve(Some("bins=64\ngamma_max=2.5 # tighter\n"), &flags).unwrap();
        assert_eq!(cfg.gaess.bins(), 32);
        assert_eq!(cfg.gaess.gamma_max(), 2.5);
        assert_eq!(cfg.gaess.gamma_min(), 0.25);

        let cfg = CliConfig::resolve(None, &GlobalOpts::default()).unwrap();
        assert_eq!(cfg, CliConfig::default());
        assert_eq!(cfg.gaess, GaessConfig::new(256, 0.25, 3.0).unwrap());
    }

    #[test]
    fn config_errors() {
        let flags = GlobalOpts::default();
        assert_eq!(
            CliConfig::resolve(Some("bogus=1"), &flags)
                .unwrap_err()
                .exit_code(),
            2
        );
        assert_eq!(
            CliConfig::resolve(Some("bins=many"), &flags)
                .unwrap_err()
                .exit_code(),
            2
        );
        assert_eq!(
            CliConfig::resolve(Some("gamma_min=4"), &flags)
                .unwrap_err()
                .exit_code(),
            3
        );
        assert_eq!(
            CliConfig::resolve(Some("rotary_split=1,2"), &flags)
                .unwrap_err()
                .exit_code(),
            2
        );
    }

    #[test]
    fn rotary_from_config() {
        let cfg = CliConfig::resolve(
            Some("head_dim=8\nrotary_split=2,1,1\nrotary_base=500"),
            &GlobalOpts::default(),
        )
        .unwrap();
        assert_eq!(cfg.rotary, RotaryConfig::new(8, (2, 1, 1), 500.0).unwrap());
        let cfg = CliConfig::resolve(
            None,
            &GlobalOpts {
                head_dim: Some(12),
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(cfg.rotary.split(), (3, 2, 1));
    }

    #[test]
    fn clap_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
