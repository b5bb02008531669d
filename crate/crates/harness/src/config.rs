//! Sweep configuration: per-command defaults, an optional INI-style
//! `key = value` file, and command-line overrides, in that order.

use std::path::{Path, PathBuf};

use ini::Ini;

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "PERISPLINE_OUT_DIR";

/// Seed used when none is configured.
pub const DEFAULT_SEED: u64 = 20240601;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> UsageError {
    UsageError(msg.into())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Self::Csv => "csv",
            Self::Json => "json",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Gram,
    Decay,
    Project,
    Quasi,
    VerifyAll,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Self::Gram => "gram",
            Self::Decay => "decay",
            Self::Project => "project",
            Self::Quasi => "quasi",
            Self::VerifyAll => "verify-all",
        }
    }
}

/// Raw settings before defaults are applied; every field optional.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub r: Option<String>,
    pub n: Option<String>,
    pub l: Option<String>,
    pub corpus: Option<String>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub seed: Option<u64>,
    pub nodes_per_cell: Option<usize>,
    pub samples_per_cell: Option<usize>,
}

impl Overrides {
    /// Fill unset fields from `other`.
    fn or(self, other: Overrides) -> Overrides {
        Overrides {
            r: self.r.or(other.r),
            n: self.n.or(other.n),
            l: self.l.or(other.l),
            corpus: self.corpus.or(other.corpus),
            out: self.out.or(other.out),
            format: self.format.or(other.format),
            seed: self.seed.or(other.seed),
            nodes_per_cell: self.nodes_per_cell.or(other.nodes_per_cell),
            samples_per_cell: self.samples_per_cell.or(other.samples_per_cell),
        }
    }
}

/// Read `key = value` pairs from a config file. Section headers are
/// accepted and ignored; keys are case-insensitive except `N`.
pub fn read_config_file(path: &Path) -> Result<Overrides, UsageError> {
    let ini = Ini::load_from_file(path).map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
    let mut o = Overrides::default();
    for (_, props) in ini.iter() {
        for (key, value) in props.iter() {
            let value = value.trim().to_string();
            match key.trim() {
                "r" => o.r = Some(value),
                "N" | "n" => o.n = Some(value),
                "l" => o.l = Some(value),
                "corpus" => o.corpus = Some(value),
                "out" => o.out = Some(PathBuf::from(value)),
                "format" => {
                    o.format = Some(match value.as_str() {
                        "csv" => Format::Csv,
                        "json" => Format::Json,
                        other => return Err(usage(format!("unknown format '{other}'"))),
                    })
                }
                "seed" => o.seed = Some(parse_number(key, &value)?),
                "nodes_per_cell" | "nodes-per-cell" => o.nodes_per_cell = Some(parse_number(key, &value)?),
                "samples_per_cell" | "samples-per-cell" => o.samples_per_cell = Some(parse_number(key, &value)?),
                other => return Err(usage(format!("unknown config key '{other}'"))),
            }
        }
    }
    Ok(o)
}

fn parse_number<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, UsageError> {
    value
        .parse()
        .map_err(|_| usage(format!("invalid value '{value}' for '{key}'")))
}

/// Parse `2,3,5` or inclusive ranges `2..5`, or a mix of both.
pub fn parse_list(key: &str, text: &str) -> Result<Vec<usize>, UsageError> {
    let mut out = Vec::new();
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        if let Some((a, b)) = part.split_once("..") {
            let a: usize = parse_number(key, a.trim())?;
            let b: usize = parse_number(key, b.trim().trim_start_matches('='))?;
            if a > b {
                return Err(usage(format!("empty range '{part}' for '{key}'")));
            }
            out.extend(a..=b);
        } else {
            out.push(parse_number(key, part)?);
        }
    }
    if out.is_empty() {
        return Err(usage(format!("'{key}' list is empty")));
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub command: Command,
    pub r_list: Vec<usize>,
    pub n_list: Vec<usize>,
    /// `None`: every `l <= r - 1` for each `r`.
    pub l_list: Option<Vec<usize>>,
    pub corpus: Vec<String>,
    /// `None`: `max(2r, 10)` per order.
    pub nodes_per_cell: Option<usize>,
    pub samples_per_cell: usize,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub format: Format,
}

impl SweepConfig {
    /// Orders and meshes for which `l` is swept at order `r`.
    pub fn l_values(&self, r: usize) -> Vec<usize> {
        match &self.l_list {
            Some(ls) => ls.clone(),
            None => (0..r).collect(),
        }
    }

    /// Output path: `--out`, else `$PERISPLINE_OUT_DIR/<command>.<ext>`,
    /// else standard output (`None`).
    pub fn output_path(&self) -> Option<PathBuf> {
        self.out.clone().or_else(|| {
            std::env::var_os(OUT_DIR_ENV)
                .filter(|d| !d.is_empty())
                .map(|d| PathBuf::from(d).join(format!("{}.{}", self.command.name(), self.format.extension())))
        })
    }
}

fn defaults(command: Command) -> Overrides {
    let (r, n) = match command {
        Command::Gram => ("1..8", "16,64,256"),
        Command::Decay => ("1..5", "64,128,256,512,1024,2048,4096"),
        Command::Project | Command::Quasi => ("2..4", "16,32,64,128,256"),
        Command::VerifyAll => ("2..5", "64"),
    };
    Overrides {
        r: Some(r.into()),
        n: Some(n.into()),
        l: None,
        corpus: Some("sin1,cos1,sin2,cos2,sin5,cos5,expsin,randtrig".into()),
        out: None,
        format: Some(Format::Csv),
        seed: Some(DEFAULT_SEED),
        nodes_per_cell: None,
        samples_per_cell: Some(perispline::projection::DEFAULT_SAMPLES_PER_CELL),
    }
}

/// Merge flags over the file over the command defaults, then validate.
pub fn resolve(command: Command, flags: Overrides, file: Option<&Path>) -> Result<SweepConfig, UsageError> {
    let from_file = match file {
        Some(p) => read_config_file(p)?,
        None => Overrides::default(),
    };
    let o = flags.or(from_file).or(defaults(command));
    let r_list = parse_list("r", o.r.as_deref().unwrap_or_default())?;
    let n_list = parse_list("N", o.n.as_deref().unwrap_or_default())?;
    let l_list = o.l.as_deref().map(|l| parse_list("l", l)).transpose()?;
    let corpus: Vec<String> = o
        .corpus
        .unwrap_or_default()
        .split(',')
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .collect();
    if corpus.is_empty() {
        return Err(usage("'corpus' list is empty"));
    }
    let seed = o.seed.unwrap_or(DEFAULT_SEED);
    for label in &corpus {
        if perispline::projection::corpus_function(label, seed).is_none() {
            return Err(usage(format!(
                "unknown corpus entry '{label}' (expected sin<k>, cos<k>, expsin, const or randtrig)"
            )));
        }
    }
    for &r in &r_list {
        if !(1..=perispline::MAX_ORDER).contains(&r) {
            return Err(usage(format!("order r = {r} outside 1..={}", perispline::MAX_ORDER)));
        }
        if matches!(command, Command::Project | Command::Quasi) && r < 2 {
            return Err(usage(format!("{} needs r >= 2, got {r}", command.name())));
        }
        for &n in &n_list {
            if n < 4 * r {
                return Err(usage(format!("N = {n} violates N >= 4r for r = {r}")));
            }
        }
    }
    if let Some(ls) = &l_list {
        let r_min = r_list[0];
        if let Some(&l) = ls.iter().find(|&&l| l >= r_min) {
            return Err(usage(format!("l = {l} violates l <= r - 1 for r = {r_min}")));
        }
    }
    let samples_per_cell = o.samples_per_cell.unwrap_or_default();
    if samples_per_cell < perispline::projection::MIN_SAMPLES_PER_CELL {
        return Err(usage(format!(
            "samples-per-cell must be at least {}",
            perispline::projection::MIN_SAMPLES_PER_CELL
        )));
    }
    if let Some(npc) = o.nodes_per_cell {
        let r_max = *r_list.last().expect("nonempty");
        if npc < r_max {
            return Err(usage(format!("nodes-per-cell must be at least r = {r_max}")));
        }
    }
    Ok(SweepConfig {
        command,
        r_list,
        n_list,
        l_list,
        corpus,
        nodes_per_cell: o.nodes_per_cell,
        samples_per_cell,
        seed,
        out: o.out,
        format: o.format.unwrap_or_default(),
    })
}
