//! Run configuration: a TOML file with sections, overridden by `--set`
//! assignments and by the dedicated flags, then echoed into the output
//! directory.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::domain::{Family, FreePotential, ModelSpec};
use crate::error::{Error, Result};
use crate::kernels::{KernelId, KernelSpec};
use crate::models::{EdgeDensity, GinibreVariant, TruncationParams};
use crate::sampling::{AiryMethod, McmcConfig, SamplerConfig};
use crate::sde::IntegratorConfig;
use crate::stats::{BinAxis, Binning, TightnessParams};
use crate::verify::Suite;

/// Everything a run needs; every field has a default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub output: PathBuf,
    /// Configurations CSV used instead of fresh equilibrium samples.
    pub input: Option<PathBuf>,
    pub model: ModelSection,
    pub sampler: SamplerSection,
    pub simulate: SimulateSection,
    pub integrator: IntegratorConfig,
    pub kernel: KernelSection,
    pub diagnostics: DiagnosticsSection,
    pub verify: VerifySection,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 0,
            output: PathBuf::from("finite-ibm-out"),
            input: None,
            model: ModelSection::default(),
            sampler: SamplerSection::default(),
            simulate: SimulateSection::default(),
            integrator: IntegratorConfig::default(),
            kernel: KernelSection::default(),
            diagnostics: DiagnosticsSection::default(),
            verify: VerifySection::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSection {
    /// airy, ginibre, bessel, square-bessel, sqrt-square-bessel,
    /// lennard-jones, riesz.
    pub family: String,
    pub n: usize,
    pub beta: f64,
    pub alpha: Option<f64>,
    pub riesz_a: Option<u32>,
    pub free_potential: Option<FreePotential>,
}

impl Default for ModelSection {
    fn default() -> Self {
        ModelSection {
            family: "airy".into(),
            n: 10,
            beta: 2.0,
            alpha: None,
            riesz_a: None,
            free_potential: None,
        }
    }
}

impl ModelSection {
    pub fn spec(&self) -> Result<ModelSpec> {
        let family: Family = self
            .family
            .parse()
            .map_err(|_| Error::invalid("model.family", format!("unknown family `{}`", self.family)))?;
        // Bessel families fix beta = 2
        let beta = if family.is_bessel() { 2.0 } else { self.beta };
        let spec = ModelSpec {
            family,
            n_particles: self.n,
            beta,
            alpha: self.alpha,
            riesz_a: self.riesz_a,
            free_potential: self.free_potential,
        };
        spec.validate().map_err(|e| prefix_key("model", e))?;
        Ok(spec)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplerSection {
    pub n_samples: usize,
    pub airy_method: AiryMethod,
    pub mcmc: McmcConfig,
}

impl Default for SamplerSection {
    fn default() -> Self {
        SamplerSection {
            n_samples: 100,
            airy_method: AiryMethod::default(),
            mcmc: McmcConfig::default(),
        }
    }
}

impl SamplerSection {
    pub fn sampler_config(&self) -> Result<SamplerConfig> {
        if self.n_samples == 0 {
            return Err(Error::invalid("sampler.n_samples", "must be positive"));
        }
        self.mcmc.validate().map_err(|e| prefix_key("sampler.mcmc", e))?;
        Ok(SamplerConfig {
            airy_method: self.airy_method,
            mcmc: self.mcmc,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateSection {
    pub n_paths: usize,
}

impl Default for SimulateSection {
    fn default() -> Self {
        SimulateSection { n_paths: 100 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KernelSection {
    /// airy2, bessel, ginibre.
    pub kernel: String,
    pub alpha: Option<f64>,
    /// `start:stop:step`, both ends included.
    pub grid: String,
    /// All pairs instead of the diagonal.
    pub matrix: bool,
}

impl Default for KernelSection {
    fn default() -> Self {
        KernelSection {
            kernel: "airy2".into(),
            alpha: None,
            grid: "-4:2:0.05".into(),
            matrix: false,
        }
    }
}

impl KernelSection {
    pub fn spec(&self) -> Result<KernelSpec> {
        let id: KernelId = self
            .kernel
            .parse()
            .map_err(|_| Error::invalid("kernel.kernel", format!("unknown kernel `{}`", self.kernel)))?;
        match (id, self.alpha) {
            (KernelId::Bessel2Alpha, None) => {
                Err(Error::invalid("kernel.alpha", "the Bessel kernel needs alpha"))
            }
            (KernelId::Bessel2Alpha, Some(a)) => Ok(KernelSpec::bessel(a)),
            (_, Some(_)) => Err(Error::invalid("kernel.alpha", "only the Bessel kernel takes alpha")),
            (KernelId::Airy2, None) => Ok(KernelSpec::airy()),
            (KernelId::Ginibre, None) => Ok(KernelSpec::ginibre()),
        }
    }

    pub fn grid_points(&self) -> Result<Vec<f64>> {
        parse_grid(&self.grid).map_err(|reason| Error::invalid("kernel.grid", reason))
    }
}

/// Parses `start:stop:step` into the points start, start + step, ... up to
/// stop (included when it lies on the grid up to rounding).
pub fn parse_grid(s: &str) -> std::result::Result<Vec<f64>, String> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(format!("expected start:stop:step, got `{s}`"));
    }
    let num = |p: &str| {
        p.trim()
            .parse::<f64>()
            .map_err(|_| format!("`{p}` is not a number"))
    };
    let (a, b, h) = (num(parts[0])?, num(parts[1])?, num(parts[2])?);
    if !(a.is_finite() && b.is_finite() && h > 0.0 && b >= a) {
        return Err(format!("need finite start <= stop and step > 0, got `{s}`"));
    }
    let n = ((b - a) / h + 1e-9).floor() as usize;
    if n > 1_000_000 {
        return Err("more than a million grid points".into());
    }
    Ok((0..=n).map(|k| a + k as f64 * h).collect())
}

/// Uniform bins on `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BinSpec {
    pub lo: f64,
    pub hi: f64,
    pub width: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiagnosticsSection {
    /// Correlation order, 1 or 2.
    pub order: u8,
    /// Defaults to linear in 1D and radial otherwise.
    pub axis: Option<BinAxis>,
    /// Freedman-Diaconis bins when absent.
    pub bins: Option<BinSpec>,
    /// Order 2: anchor interval.
    pub anchor: Option<[f64; 2]>,
    /// Order 1: compare bins inside this interval with the kernel density.
    pub compare: Option<[f64; 2]>,
    pub correlate_tol: f64,

    /// Test position of the drift scan; defaults to -1 (Airy), (1, 0)
    /// (Ginibre) and 1 on the half-line.
    pub x: Option<Vec<f64>>,
    pub r_list: Vec<f64>,
    pub s: f64,
    pub variant: GinibreVariant,
    pub edge_density: EdgeDensity,
    pub drift_tol: f64,

    /// Tightness radius, horizon and bound on the diffusion coefficient
    /// (estimated from the samples when absent).
    pub r: f64,
    pub t: f64,
    pub c3: Option<f64>,
    pub q: f64,
    /// Defaults to N/4, N/2, 3N/4.
    pub l_list: Option<Vec<usize>>,
    pub tightness_ratio: f64,

    /// Lags in recording steps.
    pub lags: Vec<usize>,
    /// Particles entering the moment and the modulus cap.
    pub m: usize,
    pub a: f64,
    pub slope_range: [f64; 2],
}

impl Default for DiagnosticsSection {
    fn default() -> Self {
        DiagnosticsSection {
            order: 1,
            axis: None,
            bins: None,
            anchor: None,
            compare: None,
            correlate_tol: 0.05,
            x: None,
            r_list: vec![10.0, 20.0, 40.0],
            s: 1.0,
            variant: GinibreVariant::Centered,
            edge_density: EdgeDensity::default(),
            drift_tol: 0.15,
            r: 5.0,
            t: 1.0,
            c3: None,
            q: 1.0,
            l_list: None,
            tightness_ratio: 10.0,
            lags: vec![1, 2, 4, 8, 16],
            m: 10,
            a: 50.0,
            slope_range: [1.8, 2.2],
        }
    }
}

impl DiagnosticsSection {
    pub fn binning(&self, dim: usize, samples: &[crate::domain::Configuration]) -> Result<Binning> {
        let axis = self
            .axis
            .unwrap_or(if dim == 1 { BinAxis::Linear } else { BinAxis::Radial });
        let mut b = match self.bins {
            Some(s) => Binning::uniform(axis, s.lo, s.hi, s.width)
                .map_err(|e| prefix_key("diagnostics.bins", e))?,
            None => Binning::auto(axis, samples)?,
        };
        match (self.order, self.anchor) {
            (1, _) => {}
            (2, Some([lo, hi])) => b = b.with_anchor(lo, hi),
            (2, None) => {
                return Err(Error::invalid("diagnostics.anchor", "order 2 needs an anchor interval"))
            }
            _ => return Err(Error::invalid("diagnostics.order", "must be 1 or 2")),
        }
        Ok(b)
    }

    pub fn test_position(&self, spec: &ModelSpec) -> Result<Vec<f64>> {
        let x = match &self.x {
            Some(x) => x.clone(),
            None => match spec.family {
                Family::AiryBeta => vec![-1.0],
                Family::Ginibre => vec![1.0, 0.0],
                f if f.is_bessel() => vec![1.0],
                _ => vec![1.0, 0.0, 0.0],
            },
        };
        if x.len() != spec.dimension() {
            return Err(Error::invalid("diagnostics.x", "length must equal the model dimension"));
        }
        Ok(x)
    }

    pub fn truncation(&self, spec: &ModelSpec) -> Result<TruncationParams> {
        if self.r_list.is_empty() {
            return Err(Error::invalid("diagnostics.r_list", "needs at least one radius"));
        }
        let mut t = TruncationParams::new(self.r_list[0], self.s);
        if spec.family == Family::Ginibre {
            t.variant = Some(self.variant);
        }
        t.edge_density = self.edge_density;
        t.validate(spec.family).map_err(|e| prefix_key("diagnostics", e))?;
        Ok(t)
    }

    pub fn l_list(&self, n: usize) -> Vec<usize> {
        self.l_list
            .clone()
            .unwrap_or_else(|| vec![n / 4, n / 2, 3 * n / 4])
    }

    pub fn tightness(&self, c3: f64, l: usize) -> Result<TightnessParams> {
        let p = TightnessParams {
            r: self.r,
            l: l.max(1),
            t: self.t,
            c3,
            q: self.q,
        };
        p.validate().map_err(|e| prefix_key("diagnostics", e))?;
        Ok(p)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifySection {
    pub suite: Suite,
}

/// Qualifies the key of a parameter error with its config section.
fn prefix_key(section: &str, e: Error) -> Error {
    match e {
        Error::InvalidParameter { key, reason } => Error::InvalidParameter {
            key: format!("{section}.{key}"),
            reason,
        },
        other => other,
    }
}

/// Builds the configuration from an optional file plus `key=value`
/// overrides, applied in order. Keys are dotted paths such as
/// `integrator.dt`; values are TOML literals, bare words are strings.
pub fn resolve(file: Option<&Path>, overrides: &[(String, String)]) -> Result<RunConfig> {
    let mut table = match file {
        Some(p) => {
            let text = std::fs::read_to_string(p)?;
            text.parse::<toml::Table>()
                .map_err(|e| Error::invalid("config", format!("{}: {e}", p.display())))?
        }
        None => toml::Table::new(),
    };
    for (key, value) in overrides {
        set_path(&mut table, key, parse_value(value))?;
    }
    let cfg: RunConfig = toml::Value::Table(table)
        .try_into()
        .map_err(|e: toml::de::Error| Error::invalid("config", e.message().to_string()))?;
    Ok(cfg)
}

fn parse_value(s: &str) -> toml::Value {
    let wrapped = format!("v = {s}");
    match wrapped.parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").expect("key v"),
        Err(_) => toml::Value::String(s.to_string()),
    }
}

fn set_path(table: &mut toml::Table, key: &str, value: toml::Value) -> Result<()> {
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(Error::invalid(key, "malformed key"));
    }
    let mut cur = table;
    for p in &parts[..parts.len() - 1] {
        let entry = cur
            .entry(p.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cur = entry
            .as_table_mut()
            .ok_or_else(|| Error::invalid(key, format!("`{p}` is not a section")))?;
    }
    cur.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}

/// Splits `key=value`.
pub fn parse_assignment(s: &str) -> std::result::Result<(String, String), String> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| format!("expected key=value, got `{s}`"))?;
    Ok((k.trim().to_string(), v.trim().to_string()))
}
