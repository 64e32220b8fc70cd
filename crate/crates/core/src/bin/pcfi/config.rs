use std::path::{Path, PathBuf};

use serde::Deserialize;

use pcfi::coherence::SearchConfig;
use pcfi::lincore::Tolerances;
use pcfi::resource::TOL_COMPLETENESS;
use pcfi::{Error, Result};

pub const CONFIG_ENV: &str = "PCFI_CONFIG";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Json,
    Csv,
}

/// Flat `key = value` file. Every key is optional.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub tol_herm: Option<f64>,
    pub tol_trace: Option<f64>,
    pub tol_psd: Option<f64>,
    pub tol_eig: Option<f64>,
    pub tol_sqrt: Option<f64>,
    pub tol_channel: Option<f64>,
    pub n_restarts: Option<usize>,
    pub n_groups_max: Option<usize>,
    pub step_tolerance: Option<f64>,
    pub max_iters: Option<usize>,
    pub continuous_deriv: Option<bool>,
    pub seed: Option<u64>,
    pub output_format: Option<OutputFormat>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
    }

    /// `--config` wins over `PCFI_CONFIG`; neither means defaults.
    pub fn discover(flag: Option<&Path>) -> Result<Self> {
        let path = match flag {
            Some(p) => Some(p.to_path_buf()),
            None => std::env::var_os(CONFIG_ENV).map(PathBuf::from),
        };
        match path {
            Some(p) => Self::load(&p),
            None => Ok(Self::default()),
        }
    }
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub tolerances: Tolerances,
    pub tol_channel: f64,
    pub search: SearchConfig,
    pub output_format: OutputFormat,
    pub seed: u64,
}

impl RunConfig {
    pub fn from_file(file: ConfigFile) -> Self {
        let d = Tolerances::default();
        let seed = file.seed.unwrap_or(0);
        let base = SearchConfig::default();
        RunConfig {
            tolerances: Tolerances {
                herm: file.tol_herm.unwrap_or(d.herm),
                trace: file.tol_trace.unwrap_or(d.trace),
                psd: file.tol_psd.unwrap_or(d.psd),
                eig: file.tol_eig.unwrap_or(d.eig),
                sqrt: file.tol_sqrt.unwrap_or(d.sqrt),
            },
            tol_channel: file.tol_channel.unwrap_or(TOL_COMPLETENESS),
            search: SearchConfig {
                n_restarts: file.n_restarts.unwrap_or(base.n_restarts),
                n_groups_max: file.n_groups_max.or(base.n_groups_max),
                seed,
                step_tolerance: file.step_tolerance.unwrap_or(base.step_tolerance),
                max_iters: file.max_iters.unwrap_or(base.max_iters),
                continuous_deriv: file.continuous_deriv.unwrap_or(base.continuous_deriv),
            },
            output_format: file.output_format.unwrap_or(OutputFormat::Json),
            seed,
        }
    }

    pub fn set_seed(&mut self, seed: u64) {
        self.seed = seed;
        self.search.seed = seed;
    }
}
