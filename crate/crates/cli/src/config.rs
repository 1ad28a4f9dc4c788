//! Experiment configuration: a TOML file merged with command-line overrides.

use std::path::{Path, PathBuf};

use chain_scattering::analysis::{DEFAULT_EDGE_TOL, DEFAULT_FD_STEP};
use chain_scattering::{Lattice, PotentialCell, Segment};
use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const DEFAULT_TOL_UNITARITY: f64 = 1e-10;
pub const DEFAULT_PACKET_POINTS: usize = 4001;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// Flags shared by every subcommand. Each one overrides the config file.
#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    /// TOML experiment config
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output file (stdout when absent)
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[arg(long = "k-min", global = true)]
    pub k_min: Option<f64>,
    #[arg(long = "k-max", global = true)]
    pub k_max: Option<f64>,
    #[arg(long = "k-count", global = true)]
    pub k_count: Option<usize>,
    /// Fixed wave number for per-N scans (hartman, packet, chain per-N mode)
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub k: Option<f64>,
    /// Cell count
    #[arg(long = "N", global = true)]
    pub n: Option<usize>,
    /// Largest cell count of a per-N scan
    #[arg(long = "N-max", global = true)]
    pub n_max: Option<usize>,
    /// Comma-separated cell counts (packet)
    #[arg(long = "N-list", global = true, value_delimiter = ',')]
    pub n_list: Option<Vec<usize>>,
    /// Lattice period a
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub period: Option<f64>,
    /// delta:g=G | barrier:V0=V,w=W | piecewise:w1:V1,w2:V2,... | free
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub cell: Option<String>,
    #[arg(long = "tol-edge", global = true)]
    pub tol_edge: Option<f64>,
    #[arg(long = "tol-unitarity", global = true)]
    pub tol_unitarity: Option<f64>,
    #[arg(long = "fd-step", global = true)]
    pub fd_step: Option<f64>,
    /// Packet width in k
    #[arg(long, global = true)]
    pub sigma: Option<f64>,
    #[arg(long = "packet-points", global = true)]
    pub packet_points: Option<usize>,
    /// Displacement of the second system in `delay`
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub displace: Option<f64>,
}

/// Keys accepted in the TOML file.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub cell: Option<String>,
    pub period: Option<f64>,
    #[serde(rename = "N")]
    pub n: Option<usize>,
    #[serde(rename = "N_max")]
    pub n_max: Option<usize>,
    #[serde(rename = "N_list")]
    pub n_list: Option<Vec<usize>>,
    pub k_min: Option<f64>,
    pub k_max: Option<f64>,
    pub k_count: Option<usize>,
    pub k: Option<f64>,
    pub format: Option<Format>,
    pub out: Option<PathBuf>,
    pub tol_edge: Option<f64>,
    pub tol_unitarity: Option<f64>,
    pub fd_step: Option<f64>,
    pub sigma: Option<f64>,
    pub packet_points: Option<usize>,
    pub displace: Option<f64>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn parse(text: &str) -> Result<Self, toml::de::Error> {
        toml::from_str(text)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KGrid {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl KGrid {
    pub fn points(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.min];
        }
        let step = (self.max - self.min) / (self.count - 1) as f64;
        (0..self.count).map(|i| self.min + step * i as f64).collect()
    }
}

/// Fully merged and validated configuration; also echoed into JSON output.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentConfig {
    pub cell: String,
    pub period: f64,
    #[serde(rename = "N", skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(rename = "N_max", skip_serializing_if = "Option::is_none")]
    pub n_max: Option<usize>,
    #[serde(rename = "N_list", skip_serializing_if = "Option::is_none")]
    pub n_list: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_grid: Option<KGrid>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<f64>,
    pub format: Format,
    #[serde(skip)]
    pub out: Option<PathBuf>,
    pub tol_edge: f64,
    pub tol_unitarity: f64,
    pub fd_step: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    pub packet_points: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub displace: Option<f64>,
    #[serde(skip)]
    pub potential: PotentialCell,
}

impl ExperimentConfig {
    pub fn resolve(flags: &Overrides) -> Result<Self, CliError> {
        let file = match &flags.config {
            Some(path) => FileConfig::load(path)?,
            None => FileConfig::default(),
        };
        Self::merge(file, flags)
    }

    pub fn merge(file: FileConfig, flags: &Overrides) -> Result<Self, CliError> {
        let cell = flags
            .cell
            .clone()
            .or(file.cell)
            .ok_or_else(|| CliError::field("cell", "missing; e.g. --cell delta:g=1"))?;
        let potential = parse_cell(&cell)?;
        let period = flags.period.or(file.period).unwrap_or(1.0);
        if !(period > 0.0 && period.is_finite()) {
            return Err(CliError::field("period", format!("must be > 0, got {period}")));
        }
        if period < potential.support_width() {
            return Err(CliError::field(
                "period",
                format!("{period} is shorter than the cell support width {}", potential.support_width()),
            ));
        }

        let n = flags.n.or(file.n);
        let n_max = flags.n_max.or(file.n_max);
        let n_list = flags.n_list.clone().or(file.n_list);
        for (field, value) in [("N", n), ("N_max", n_max)] {
            if value == Some(0) {
                return Err(CliError::field(field, "must be >= 1"));
            }
        }
        if let Some(list) = &n_list {
            if list.is_empty() || list.contains(&0) {
                return Err(CliError::field("N_list", "must be a non-empty list of counts >= 1"));
            }
        }

        let k_min = flags.k_min.or(file.k_min);
        let k_max = flags.k_max.or(file.k_max);
        let k_count = flags.k_count.or(file.k_count);
        let k_grid = match (k_min, k_max, k_count) {
            (None, None, None) => None,
            (Some(min), Some(max), Some(count)) => Some(validate_grid(min, max, count)?),
            _ => {
                let missing = [("k_min", k_min.is_none()), ("k_max", k_max.is_none()), ("k_count", k_count.is_none())]
                    .iter()
                    .filter(|(_, m)| *m)
                    .map(|(f, _)| *f)
                    .collect::<Vec<_>>()
                    .join(", ");
                return Err(CliError::field(&missing, "incomplete k-grid: k_min, k_max and k_count go together"));
            }
        };
        let k = flags.k.or(file.k);
        if let Some(kv) = k {
            if !(kv > 0.0 && kv.is_finite()) {
                return Err(CliError::field("k", format!("must be > 0, got {kv}")));
            }
        }

        let positive = |field: &str, v: Option<f64>| -> Result<Option<f64>, CliError> {
            match v {
                Some(x) if !(x > 0.0 && x.is_finite()) => {
                    Err(CliError::field(field, format!("must be > 0, got {x}")))
                }
                other => Ok(other),
            }
        };
        let tol_edge = positive("tol_edge", flags.tol_edge.or(file.tol_edge))?.unwrap_or(DEFAULT_EDGE_TOL);
        let tol_unitarity =
            positive("tol_unitarity", flags.tol_unitarity.or(file.tol_unitarity))?.unwrap_or(DEFAULT_TOL_UNITARITY);
        let fd_step = positive("fd_step", flags.fd_step.or(file.fd_step))?.unwrap_or(DEFAULT_FD_STEP);
        let sigma = positive("sigma", flags.sigma.or(file.sigma))?;
        let packet_points = flags.packet_points.or(file.packet_points).unwrap_or(DEFAULT_PACKET_POINTS);
        if packet_points < 2 {
            return Err(CliError::field("packet_points", "must be >= 2"));
        }
        let displace = flags.displace.or(file.displace);
        if let Some(d) = displace {
            if !d.is_finite() {
                return Err(CliError::field("displace", "must be finite"));
            }
        }

        Ok(Self {
            cell,
            period,
            n,
            n_max,
            n_list,
            k_grid,
            k,
            format: flags.format.or(file.format).unwrap_or(Format::Csv),
            out: flags.out.clone().or(file.out),
            tol_edge,
            tol_unitarity,
            fd_step,
            sigma,
            packet_points,
            displace,
            potential,
        })
    }

    pub fn lattice(&self, cells: usize) -> Result<Lattice, CliError> {
        Lattice::new(self.potential.clone(), self.period, cells)
            .map_err(|e| CliError::field("period", e))
    }

    pub fn require_grid(&self) -> Result<KGrid, CliError> {
        self.k_grid
            .ok_or_else(|| CliError::field("k_min", "this command needs a k-grid (k_min, k_max, k_count)"))
    }

    pub fn require_k(&self) -> Result<f64, CliError> {
        self.k.ok_or_else(|| CliError::field("k", "this command needs a fixed wave number --k"))
    }

    /// `N_max`, falling back to `N`.
    pub fn require_n_max(&self) -> Result<usize, CliError> {
        self.n_max.or(self.n).ok_or_else(|| CliError::field("N_max", "missing (set N_max or N)"))
    }

    /// `N`, falling back to `N_max`.
    pub fn require_n(&self) -> Result<usize, CliError> {
        self.n.or(self.n_max).ok_or_else(|| CliError::field("N", "missing (set N or N_max)"))
    }
}

fn validate_grid(min: f64, max: f64, count: usize) -> Result<KGrid, CliError> {
    if !(min > 0.0 && min.is_finite()) {
        return Err(CliError::field("k_min", format!("must be > 0, got {min}")));
    }
    if !max.is_finite() || max < min {
        return Err(CliError::field("k_max", format!("must be >= k_min ({min}), got {max}")));
    }
    if count < 2 {
        return Err(CliError::field("k_count", format!("must be >= 2, got {count}")));
    }
    if max == min {
        return Err(CliError::field("k_max", "must be > k_min when k_count >= 2"));
    }
    Ok(KGrid { min, max, count })
}

/// Parses `delta:g=G`, `barrier:V0=V,w=W`, `piecewise:w1:V1,w2:V2,...` or `free`.
pub fn parse_cell(spec: &str) -> Result<PotentialCell, CliError> {
    let bad = |msg: String| CliError::field("cell", msg);
    let spec = spec.trim();
    let (kind, params) = spec.split_once(':').unwrap_or((spec, ""));
    let number = |s: &str, what: &str| -> Result<f64, CliError> {
        s.trim()
            .parse::<f64>()
            .map_err(|_| bad(format!("cannot parse {what} from `{s}` in `{spec}`")))
    };
    let key_values = |params: &str| -> Result<Vec<(String, f64)>, CliError> {
        params
            .split(',')
            .filter(|p| !p.trim().is_empty())
            .map(|p| {
                let (key, value) = p
                    .split_once('=')
                    .ok_or_else(|| bad(format!("expected key=value, got `{p}`")))?;
                Ok((key.trim().to_string(), number(value, key.trim())?))
            })
            .collect()
    };
    let cell = match kind.trim() {
        "free" => Ok(PotentialCell::free()),
        "delta" => {
            let kv = key_values(params)?;
            match kv.as_slice() {
                [(key, g)] if key == "g" => PotentialCell::delta(*g),
                _ => return Err(bad(format!("delta takes exactly `g=<strength>`, got `{params}`"))),
            }
        }
        "barrier" => {
            let kv = key_values(params)?;
            let get = |name: &str| kv.iter().find(|(k, _)| k == name).map(|(_, v)| *v);
            if kv.len() != 2 {
                return Err(bad(format!("barrier takes `V0=<height>,w=<width>`, got `{params}`")));
            }
            match (get("V0"), get("w")) {
                (Some(v0), Some(w)) => PotentialCell::barrier(v0, w),
                _ => return Err(bad(format!("barrier takes `V0=<height>,w=<width>`, got `{params}`"))),
            }
        }
        "piecewise" => {
            let segments = params
                .split(',')
                .filter(|p| !p.trim().is_empty())
                .map(|p| {
                    let (w, v) = p
                        .split_once(':')
                        .ok_or_else(|| bad(format!("piecewise segments are `width:height`, got `{p}`")))?;
                    Ok(Segment { width: number(w, "width")?, height: number(v, "height")? })
                })
                .collect::<Result<Vec<_>, CliError>>()?;
            PotentialCell::piecewise(segments)
        }
        other => return Err(bad(format!("unknown cell shape `{other}` (delta, barrier, piecewise, free)"))),
    };
    cell.map_err(|e| bad(e.to_string()))
}
