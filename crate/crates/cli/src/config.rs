//! Run configuration: `key = value` files merged with command-line flags.

use std::fmt;
use std::path::PathBuf;

use clap::{Parser, ValueEnum};
use morreycex_core::maxops::SummandKind;
use morreycex_core::paramlab::Mode;

use crate::error::CliError;

/// Overrides the default output directory when `out` is not configured.
pub const OUTPUT_DIR_ENV: &str = "MORREYCEX_OUTPUT_DIR";
pub const DEFAULT_OUTPUT_DIR: &str = "morreycex-out";
pub const DEFAULT_SEED: u64 = 42;

/// Serialization order of config keys.
pub const KEYS: [&str; 19] = [
    "command", "d", "p", "q", "q1", "mode", "theta", "n", "r", "seeds", "count", "kind", "cells", "padding", "box",
    "s", "k0", "format", "out",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, ValueEnum)]
pub enum Command {
    Validate,
    Sigma,
    VerifyLemma1,
    VerifySobolev,
    VerifyHolder,
    VerifyMaximal,
    VerifyPoincare,
    CexNorms,
    CexFit,
    Report,
}

impl Command {
    pub const ALL: [Command; 10] = [
        Command::Validate,
        Command::Sigma,
        Command::VerifyLemma1,
        Command::VerifySobolev,
        Command::VerifyHolder,
        Command::VerifyMaximal,
        Command::VerifyPoincare,
        Command::CexNorms,
        Command::CexFit,
        Command::Report,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Validate => "validate",
            Command::Sigma => "sigma",
            Command::VerifyLemma1 => "verify-lemma1",
            Command::VerifySobolev => "verify-sobolev",
            Command::VerifyHolder => "verify-holder",
            Command::VerifyMaximal => "verify-maximal",
            Command::VerifyPoincare => "verify-poincare",
            Command::CexNorms => "cex-norms",
            Command::CexFit => "cex-fit",
            Command::Report => "report",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.name() == s)
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Seeds {
    /// Inclusive range `a:b`.
    Range(u64, u64),
    List(Vec<u64>),
}

impl Seeds {
    pub fn values(&self) -> Vec<u64> {
        match self {
            Seeds::Range(a, b) => (*a..=*b).collect(),
            Seeds::List(v) => v.clone(),
        }
    }
}

/// Parsed configuration. Unset keys fall back to per-command defaults in
/// [`crate::run`]; only set keys are serialized.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunConfig {
    pub command: Option<Command>,
    pub d: Option<u32>,
    pub p: Option<f64>,
    pub q: Option<f64>,
    pub q1: Option<f64>,
    pub mode: Option<Mode>,
    pub theta: Option<f64>,
    pub n_range: Option<(u32, u32)>,
    pub r_list: Option<Vec<f64>>,
    pub seeds: Option<Seeds>,
    pub count: Option<usize>,
    pub kind: Option<SummandKind>,
    pub cells: Option<usize>,
    pub padding: Option<usize>,
    /// Half-width of the box `[-L, L]^d`.
    pub half_width: Option<f64>,
    pub s: Option<f64>,
    pub k0: Option<u32>,
    pub format: Option<Format>,
    pub out: Option<PathBuf>,
}

fn mismatch(key: &str, value: &str, expected: &'static str) -> CliError {
    CliError::TypeMismatch {
        key: key.to_string(),
        value: value.to_string(),
        expected,
    }
}

fn float(key: &str, v: &str) -> Result<f64, CliError> {
    match v.parse::<f64>() {
        Ok(x) if x.is_finite() => Ok(x),
        _ => Err(mismatch(key, v, "a finite number")),
    }
}

fn unsigned<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, CliError> {
    v.parse::<T>().map_err(|_| mismatch(key, v, "a nonnegative integer"))
}

fn range(key: &str, v: &str) -> Result<(u32, u32), CliError> {
    let bad = || mismatch(key, v, "an integer or an inclusive range lo:hi");
    let (a, b) = match v.split_once(':') {
        Some((a, b)) => (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?),
        None => {
            let a = v.parse().map_err(|_| bad())?;
            (a, a)
        }
    };
    if a > b {
        return Err(bad());
    }
    Ok((a, b))
}

impl RunConfig {
    /// Sets one key from its textual value.
    pub fn set(&mut self, key: &str, v: &str) -> Result<(), CliError> {
        let v = v.trim();
        match key {
            "command" => {
                self.command = Some(Command::parse(v).ok_or_else(|| mismatch(key, v, "a command name"))?);
            }
            "d" => self.d = Some(unsigned(key, v)?),
            "p" => self.p = Some(float(key, v)?),
            "q" => self.q = Some(float(key, v)?),
            "q1" => self.q1 = Some(float(key, v)?),
            "mode" => {
                self.mode = Some(match v {
                    "verification" => Mode::Verification,
                    "counterexample" => Mode::Counterexample,
                    _ => return Err(mismatch(key, v, "verification or counterexample")),
                })
            }
            "theta" => self.theta = Some(float(key, v)?),
            "n" => self.n_range = Some(range(key, v)?),
            "r" => {
                let list = v.split(',').map(|x| float(key, x.trim())).collect::<Result<Vec<_>, _>>()?;
                self.r_list = Some(list);
            }
            "seeds" => {
                self.seeds = Some(if let Some((a, b)) = v.split_once(':') {
                    let bad = || mismatch(key, v, "a seed range a:b or a comma list");
                    let a: u64 = a.trim().parse().map_err(|_| bad())?;
                    let b: u64 = b.trim().parse().map_err(|_| bad())?;
                    if a > b {
                        return Err(bad());
                    }
                    Seeds::Range(a, b)
                } else {
                    Seeds::List(v.split(',').map(|x| unsigned(key, x.trim())).collect::<Result<_, _>>()?)
                })
            }
            "count" => self.count = Some(unsigned(key, v)?),
            "kind" => {
                self.kind = Some(match v {
                    "gaussian" => SummandKind::Gaussian,
                    "bump" => SummandKind::ScaledBump,
                    _ => return Err(mismatch(key, v, "gaussian or bump")),
                })
            }
            "cells" => self.cells = Some(unsigned(key, v)?),
            "padding" => self.padding = Some(unsigned(key, v)?),
            "box" => self.half_width = Some(float(key, v)?),
            "s" => self.s = Some(float(key, v)?),
            "k0" => self.k0 = Some(unsigned(key, v)?),
            "format" => {
                self.format = Some(match v {
                    "csv" => Format::Csv,
                    "json" => Format::Json,
                    _ => return Err(mismatch(key, v, "csv or json")),
                })
            }
            "out" => {
                if v.is_empty() {
                    return Err(mismatch(key, v, "a path"));
                }
                self.out = Some(PathBuf::from(v));
            }
            _ => return Err(CliError::UnknownKey(key.to_string())),
        }
        Ok(())
    }

    /// Textual value of a set key, in the form `set` accepts.
    pub fn get(&self, key: &str) -> Option<String> {
        let join = |v: &[f64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
        match key {
            "command" => self.command.map(|c| c.name().to_string()),
            "d" => self.d.map(|x| x.to_string()),
            "p" => self.p.map(|x| x.to_string()),
            "q" => self.q.map(|x| x.to_string()),
            "q1" => self.q1.map(|x| x.to_string()),
            "mode" => self.mode.map(|m| m.to_string()),
            "theta" => self.theta.map(|x| x.to_string()),
            "n" => self.n_range.map(|(a, b)| format!("{a}:{b}")),
            "r" => self.r_list.as_deref().map(join),
            "seeds" => self.seeds.as_ref().map(|s| match s {
                Seeds::Range(a, b) => format!("{a}:{b}"),
                Seeds::List(v) => v.iter().map(u64::to_string).collect::<Vec<_>>().join(","),
            }),
            "count" => self.count.map(|x| x.to_string()),
            "kind" => self.kind.map(|k| match k {
                SummandKind::Gaussian => "gaussian".to_string(),
                SummandKind::ScaledBump => "bump".to_string(),
            }),
            "cells" => self.cells.map(|x| x.to_string()),
            "padding" => self.padding.map(|x| x.to_string()),
            "box" => self.half_width.map(|x| x.to_string()),
            "s" => self.s.map(|x| x.to_string()),
            "k0" => self.k0.map(|x| x.to_string()),
            "format" => self.format.map(|f| f.extension().to_string()),
            "out" => self.out.as_ref().map(|p| p.display().to_string()),
            _ => None,
        }
    }

    /// Reads a `key = value` file body. `#` starts a comment.
    pub fn parse_text(text: &str) -> Result<Self, CliError> {
        let mut cfg = RunConfig::default();
        cfg.merge_text(text)?;
        Ok(cfg)
    }

    fn merge_text(&mut self, text: &str) -> Result<(), CliError> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::Syntax { line: lineno + 1, text: raw.to_string() })?;
            self.set(key.trim(), value)?;
        }
        Ok(())
    }

    /// Canonical `key = value` text of the set keys, in [`KEYS`] order.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for key in KEYS {
            if let Some(v) = self.get(key) {
                out.push_str(key);
                out.push_str(" = ");
                out.push_str(&v);
                out.push('\n');
            }
        }
        out
    }

    /// Configured output directory, else the environment override, else the default.
    pub fn output_dir(&self) -> PathBuf {
        if let Some(p) = &self.out {
            return p.clone();
        }
        match std::env::var_os(OUTPUT_DIR_ENV) {
            Some(v) if !v.is_empty() => PathBuf::from(v),
            _ => PathBuf::from(DEFAULT_OUTPUT_DIR),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "morreycex", version, about = "Numerical checks of a Sobolev-Morrey interpolation inequality")]
struct Cli {
    /// Command to run; may instead come from the config file.
    #[arg(value_enum)]
    command: Option<Command>,
    /// `key = value` config file; flags take precedence over it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    d: Option<String>,
    #[arg(long)]
    p: Option<String>,
    #[arg(long)]
    q: Option<String>,
    #[arg(long)]
    q1: Option<String>,
    /// verification or counterexample.
    #[arg(long)]
    mode: Option<String>,
    /// Offset exponent for `sigma` when no parameters are given.
    #[arg(long)]
    theta: Option<String>,
    /// Inclusive range lo:hi.
    #[arg(long)]
    n: Option<String>,
    /// Comma-separated exponents.
    #[arg(long)]
    r: Option<String>,
    /// Range a:b or comma list.
    #[arg(long)]
    seeds: Option<String>,
    /// Summands per random field.
    #[arg(long)]
    count: Option<String>,
    /// gaussian or bump.
    #[arg(long)]
    kind: Option<String>,
    /// Cells per axis.
    #[arg(long)]
    cells: Option<String>,
    /// Zero margin in cells.
    #[arg(long)]
    padding: Option<String>,
    /// Half-width L of the box [-L, L]^d.
    #[arg(long = "box")]
    half_width: Option<String>,
    /// Lebesgue exponent for the maximal-function ratios.
    #[arg(long)]
    s: Option<String>,
    /// First block of the bump train.
    #[arg(long)]
    k0: Option<String>,
    /// csv or json.
    #[arg(long)]
    format: Option<String>,
    /// Output directory.
    #[arg(long)]
    out: Option<String>,
}

impl Cli {
    fn flags(&self) -> [(&'static str, &Option<String>); 18] {
        [
            ("d", &self.d),
            ("p", &self.p),
            ("q", &self.q),
            ("q1", &self.q1),
            ("mode", &self.mode),
            ("theta", &self.theta),
            ("n", &self.n),
            ("r", &self.r),
            ("seeds", &self.seeds),
            ("count", &self.count),
            ("kind", &self.kind),
            ("cells", &self.cells),
            ("padding", &self.padding),
            ("box", &self.half_width),
            ("s", &self.s),
            ("k0", &self.k0),
            ("format", &self.format),
            ("out", &self.out),
        ]
    }
}

/// Parses `argv` (program name first). Config file values are applied
/// first, then flags.
pub fn parse_config<I, T>(argv: I) -> Result<RunConfig, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv)?;
    let mut cfg = RunConfig::default();
    if let Some(path) = &cli.config {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.clone(),
            source,
        })?;
        cfg.merge_text(&text)?;
    }
    if let Some(c) = cli.command {
        cfg.command = Some(c);
    }
    for (key, value) in cli.flags() {
        if let Some(v) = value {
            cfg.set(key, v)?;
        }
    }
    if cfg.command.is_none() {
        return Err(CliError::MissingRequired("command".into()));
    }
    Ok(cfg)
}
