use std::path::{Path, PathBuf};

use lierestrict::norms::{QuadratureSpec, Scheme};
use lierestrict::{build_root_system, Family, RootSystem};
use serde::Deserialize;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

/// Contents of a `--config` TOML file.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub family: Option<String>,
    pub rank: Option<usize>,
    pub systems: Option<Vec<String>>,
    pub c: Option<f64>,
    pub q_res: Option<usize>,
    pub weyl_cap: Option<f64>,
    pub node_budget: Option<f64>,
    pub seed: Option<u64>,
    pub format: Option<Format>,
    pub out: Option<PathBuf>,
    pub workers: Option<usize>,
    pub norm: Option<NormSection>,
}

/// Norm and scan parameters; shared by the `[norm]` table and the `norm`/`scan` flags.
#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormSection {
    pub mode: Option<String>,
    pub nodes: Option<String>,
    pub p: Option<f64>,
    pub n: Option<u32>,
    pub n_values: Option<Vec<u32>>,
    pub log_correct: Option<bool>,
    pub bound: Option<String>,
    pub perm: Option<Vec<usize>>,
    pub scheme: Option<String>,
    pub mc_samples: Option<usize>,
}

impl NormSection {
    /// Fields set in `over` replace those in `self`.
    pub fn overlay(self, over: NormSection) -> NormSection {
        NormSection {
            mode: over.mode.or(self.mode),
            nodes: over.nodes.or(self.nodes),
            p: over.p.or(self.p),
            n: over.n.or(self.n),
            n_values: over.n_values.or(self.n_values),
            log_correct: over.log_correct.or(self.log_correct),
            bound: over.bound.or(self.bound),
            perm: over.perm.or(self.perm),
            scheme: over.scheme.or(self.scheme),
            mc_samples: over.mc_samples.or(self.mc_samples),
        }
    }
}

/// Global settings after merging the config file with command-line flags.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub systems: Vec<(Family, usize)>,
    pub explicit_system: bool,
    pub c: Option<f64>,
    pub q_res: usize,
    pub weyl_cap: usize,
    pub node_budget: u128,
    pub seed: u64,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub workers: Option<usize>,
    pub norm: NormSection,
}

/// Global flag values as parsed by clap.
#[derive(Debug, Default, Clone)]
pub struct GlobalFlags {
    pub family: Option<String>,
    pub rank: Option<usize>,
    pub c: Option<f64>,
    pub q_res: Option<usize>,
    pub weyl_cap: Option<f64>,
    pub node_budget: Option<f64>,
    pub seed: Option<u64>,
    pub format: Option<Format>,
    pub out: Option<PathBuf>,
    pub workers: Option<usize>,
    pub config: Option<PathBuf>,
}

pub fn load_file(path: &Path) -> Result<FileConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| CliError::Usage(format!("invalid config {}: {e}", path.display())))
}

/// Parses `"A2"`, `"e8"` and similar.
pub fn parse_system(s: &str) -> Result<(Family, usize), CliError> {
    let s = s.trim();
    let mut chars = s.chars();
    let letter = chars
        .next()
        .ok_or_else(|| CliError::Usage("empty system name".into()))?;
    let family: Family = letter
        .to_string()
        .parse()
        .map_err(|e: lierestrict::Error| CliError::Usage(e.to_string()))?;
    let rank: usize = chars
        .as_str()
        .parse()
        .map_err(|_| CliError::Usage(format!("bad system name '{s}'")))?;
    family.validate_rank(rank)?;
    Ok((family, rank))
}

fn positive_count(name: &str, v: f64) -> Result<f64, CliError> {
    if !(v.is_finite() && v >= 1.0 && v.fract() == 0.0) {
        return Err(CliError::Usage(format!("{name} must be a positive integer, got {v}")));
    }
    Ok(v)
}

impl RunConfig {
    pub fn resolve(flags: GlobalFlags, norm_flags: NormSection) -> Result<Self, CliError> {
        let file = match &flags.config {
            Some(path) => load_file(path)?,
            None => FileConfig::default(),
        };
        let family = flags.family.or(file.family);
        let rank = flags.rank.or(file.rank);
        let (systems, explicit_system) = match (family, rank) {
            (Some(f), Some(r)) => {
                let family: Family = f
                    .parse()
                    .map_err(|e: lierestrict::Error| CliError::Usage(e.to_string()))?;
                family.validate_rank(r)?;
                (vec![(family, r)], true)
            }
            (Some(_), None) | (None, Some(_)) => {
                return Err(CliError::Usage("--family and --rank must be given together".into()))
            }
            (None, None) => match file.systems {
                Some(list) => (
                    list.iter().map(|s| parse_system(s)).collect::<Result<Vec<_>, _>>()?,
                    true,
                ),
                None => (Vec::new(), false),
            },
        };
        let c = flags.c.or(file.c);
        if let Some(c) = c {
            if !(c > 0.0 && c.is_finite()) {
                return Err(CliError::Usage(format!("c must be positive, got {c}")));
            }
        }
        let q_res = flags.q_res.or(file.q_res).unwrap_or(QuadratureSpec::default().q_res);
        if q_res == 0 {
            return Err(CliError::Usage("q_res must be positive".into()));
        }
        let weyl_cap = positive_count("weyl_cap", flags.weyl_cap.or(file.weyl_cap).unwrap_or(1e6))? as usize;
        let default_budget = QuadratureSpec::default().node_budget as f64;
        let node_budget = positive_count(
            "node_budget",
            flags.node_budget.or(file.node_budget).unwrap_or(default_budget),
        )? as u128;
        let workers = flags.workers.or(file.workers);
        if workers == Some(0) {
            return Err(CliError::Usage("workers must be positive".into()));
        }
        Ok(RunConfig {
            systems,
            explicit_system,
            c,
            q_res,
            weyl_cap,
            node_budget,
            seed: flags.seed.or(file.seed).unwrap_or(QuadratureSpec::default().seed),
            format: flags.format.or(file.format).unwrap_or(Format::Json),
            out: flags.out.or(file.out),
            workers,
            norm: file.norm.unwrap_or_default().overlay(norm_flags),
        })
    }

    /// The single configured system; errors if none or several were given.
    pub fn single_system(&self) -> Result<RootSystem, CliError> {
        match self.systems.as_slice() {
            [(f, r)] => Ok(build_root_system(*f, *r)?),
            [] => Err(CliError::Usage("this command needs --family and --rank".into())),
            _ => Err(CliError::Usage("this command takes a single system".into())),
        }
    }

    pub fn quadrature(&self) -> Result<QuadratureSpec, CliError> {
        let mut quad = QuadratureSpec::with_q_res(self.q_res);
        quad.seed = self.seed;
        quad.node_budget = self.node_budget;
        if let Some(s) = &self.norm.scheme {
            quad.scheme = s.parse::<Scheme>()?;
        }
        if let Some(m) = self.norm.mc_samples {
            quad.mc_samples = m;
        }
        quad.validate()?;
        Ok(quad)
    }
}
