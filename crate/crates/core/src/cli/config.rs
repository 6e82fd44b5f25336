//! Flat `key = value` run configuration.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use crate::coherence::{DetectorSpec, Kernel};
use crate::error::{Error, Result};
use crate::experiment::{ExperimentConfig, ThetaConvention, VdwPolicy};
use crate::params::{Dim, Particle, PhysicalConstants};

/// Every recognized key, its default, and its unit/meaning.
pub const KEYS: &[(&str, &str, &str)] = &[
    ("hbar", "1.054571817e-34", "reduced Planck constant, J s"),
    ("amu", "1.66053907e-27", "atomic mass unit, kg"),
    (
        "particle.mass_u",
        "840.77",
        "particle mass, u (70 x 12.011 for C70)",
    ),
    ("particle.v_z", "", "longitudinal velocity, m/s (optional)"),
    (
        "packet.b",
        "1e-7",
        "initial Gaussian width b for propagate and oracle-verify, m",
    ),
    (
        "packet.dim",
        "1",
        "transverse dimensions for the Gouy phase (1 or 2)",
    ),
    (
        "coherence.delta_kx",
        "9e6",
        "transverse momentum spread, 1/m",
    ),
    ("experiment.t_s", "6.65e-3", "time of flight, s"),
    ("experiment.slit_factor", "1", "b = factor x slit width"),
    (
        "experiment.vdw_policy",
        "per_point",
        "none | per_point | threshold",
    ),
    (
        "experiment.vdw_factor",
        "0.3333333333333333",
        "van der Waals narrowing factor",
    ),
    (
        "experiment.vdw_threshold_m",
        "0",
        "slits narrower than this are narrowed (threshold policy), m",
    ),
    (
        "experiment.deconvolve",
        "true",
        "remove detector width before the sigma_xp inversion",
    ),
    ("detector.fwhm_m", "12e-6", "detector resolution FWHM, m"),
    ("detector.kernel", "gaussian", "gaussian | tophat"),
    (
        "output.theta_convention",
        "sqrt2-sigma",
        "sigma | sqrt2-sigma",
    ),
    (
        "propagate.t_max_s",
        "",
        "end of the time sweep, s (default: experiment.t_s)",
    ),
    ("propagate.steps", "200", "intervals in the time sweep"),
    ("curves.a_min_m", "5e-8", "smallest slit width, m"),
    ("curves.a_max_m", "2e-5", "largest slit width, m"),
    ("curves.points", "200", "points per curve"),
    ("curves.log_x", "true", "logarithmic slit-width axis"),
    ("fit.init_dkx", "5e6", "initial delta_kx guess, 1/m"),
    ("fit.max_iterations", "100", "Gauss-Newton iteration cap"),
    ("fit.cofit_factor", "false", "also fit the slit factor"),
    (
        "oracle.t_factors",
        "0.5,1,5,50",
        "check times in units of tau_b",
    ),
    (
        "oracle.grid_n",
        "16384",
        "grid points for pure-state checks (power of two)",
    ),
    (
        "oracle.mixed_grid_n",
        "0",
        "grid points for ensemble checks (0 = automatic)",
    ),
    (
        "oracle.half_span_m",
        "0",
        "grid half-span, m (0 = automatic)",
    ),
    (
        "oracle.nodes",
        "32",
        "Gauss-Hermite nodes for the k_x average",
    ),
    (
        "oracle.ladder",
        "64",
        "time-ladder intervals for the width-integral check",
    ),
    ("synth.points", "12", "synthetic dataset size"),
    ("synth.a_min_m", "7e-8", "smallest synthetic slit width, m"),
    ("synth.a_max_m", "2e-5", "largest synthetic slit width, m"),
    ("synth.noise", "0", "relative multiplicative noise"),
    ("synth.seed", "1", "noise seed"),
    (
        "synth.flag_smallest",
        "true",
        "mark the smallest slit for van der Waals narrowing",
    ),
];

/// Raw key/value pairs, after defaults, file contents and overrides.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct KeyValues {
    entries: BTreeMap<String, String>,
}

impl KeyValues {
    pub fn defaults() -> Self {
        let entries = KEYS
            .iter()
            .map(|(k, v, _)| (k.to_string(), v.to_string()))
            .collect();
        Self { entries }
    }

    /// Overlays the contents of a config file. Blank lines and `#` comments
    /// are skipped; unknown keys are rejected.
    pub fn merge_text(&mut self, text: &str, origin: &str) -> Result<()> {
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::Parse {
                    path: origin.to_string(),
                    line: idx + 1,
                    message: format!("expected `key = value`, got `{line}`"),
                });
            };
            let key = key.trim();
            if !self.entries.contains_key(key) {
                return Err(Error::Parse {
                    path: origin.to_string(),
                    line: idx + 1,
                    message: format!("unknown key `{key}`"),
                });
            }
            self.entries
                .insert(key.to_string(), value.trim().to_string());
        }
        Ok(())
    }

    pub fn merge_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path)?;
        self.merge_text(&text, &path.display().to_string())
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) -> Result<()> {
        if !self.entries.contains_key(key) {
            return Err(Error::Config(format!("unknown key `{key}`")));
        }
        self.entries.insert(key.to_string(), value.into());
        Ok(())
    }

    pub fn raw(&self, key: &str) -> &str {
        self.entries.get(key).map(String::as_str).unwrap_or("")
    }

    fn get<T: FromStr>(&self, key: &str) -> Result<T> {
        let raw = self.raw(key);
        raw.parse()
            .map_err(|_| Error::Config(format!("cannot parse `{key} = {raw}`")))
    }

    fn get_opt<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        if self.raw(key).is_empty() {
            Ok(None)
        } else {
            self.get(key).map(Some)
        }
    }

    fn get_bool(&self, key: &str) -> Result<bool> {
        match self.raw(key) {
            "true" | "1" | "yes" => Ok(true),
            "false" | "0" | "no" => Ok(false),
            other => Err(Error::Config(format!(
                "cannot parse `{key} = {other}` as a boolean"
            ))),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropagateSettings {
    pub t_max: f64,
    pub steps: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurveSettings {
    pub a_min: f64,
    pub a_max: f64,
    pub points: usize,
    pub log_x: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitSettings {
    pub init_dkx: f64,
    pub max_iterations: usize,
    pub cofit_factor: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleSettings {
    pub t_factors: Vec<f64>,
    pub grid_n: Option<usize>,
    pub mixed_grid_n: Option<usize>,
    pub half_span: Option<f64>,
    pub nodes: usize,
    pub ladder: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthSettings {
    pub points: usize,
    pub a_min: f64,
    pub a_max: f64,
    pub noise: f64,
    pub seed: u64,
    pub flag_smallest: bool,
}

/// Validated parameters for every command.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub constants: PhysicalConstants,
    pub particle: Particle,
    pub packet_b: f64,
    pub packet_dim: Dim,
    pub delta_kx: f64,
    pub experiment: ExperimentConfig,
    pub theta_convention: ThetaConvention,
    pub propagate: PropagateSettings,
    pub curves: CurveSettings,
    pub fit: FitSettings,
    pub oracle: OracleSettings,
    pub synth: SynthSettings,
    source: KeyValues,
}

fn nonzero(n: usize) -> Option<usize> {
    (n > 0).then_some(n)
}

fn positive_or_none(v: f64) -> Option<f64> {
    (v > 0.0).then_some(v)
}

impl RunConfig {
    pub fn from_key_values(kv: KeyValues) -> Result<Self> {
        let constants = PhysicalConstants::new(kv.get("hbar")?, kv.get("amu")?)?;
        let mut particle = Particle::from_mass_u(kv.get("particle.mass_u")?, &constants)?;
        if let Some(v) = kv.get_opt::<f64>("particle.v_z")? {
            particle = particle.with_velocity(v)?;
        }
        let vdw_factor: f64 = kv.get("experiment.vdw_factor")?;
        let vdw_policy = match kv.raw("experiment.vdw_policy") {
            "none" => VdwPolicy::None,
            "per_point" => VdwPolicy::PerPointFlag { factor: vdw_factor },
            "threshold" => VdwPolicy::FactorBelowThreshold {
                factor: vdw_factor,
                threshold: kv.get("experiment.vdw_threshold_m")?,
            },
            other => {
                return Err(Error::Config(format!(
                "unknown experiment.vdw_policy `{other}` (expected none, per_point or threshold)"
            )))
            }
        };
        let kernel: Kernel = kv.raw("detector.kernel").parse()?;
        let experiment = ExperimentConfig {
            constants,
            particle,
            t: kv.get("experiment.t_s")?,
            detector: DetectorSpec::new(kv.get("detector.fwhm_m")?, kernel)?,
            slit_factor: kv.get("experiment.slit_factor")?,
            vdw_policy,
            deconvolve: kv.get_bool("experiment.deconvolve")?,
        };
        experiment.validate()?;

        let t_factors = kv
            .raw("oracle.t_factors")
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Config(format!("bad oracle.t_factors entry `{s}`")))
            })
            .collect::<Result<Vec<_>>>()?;

        let cfg = Self {
            constants,
            particle,
            packet_b: kv.get("packet.b")?,
            packet_dim: Dim::try_from(kv.get::<u32>("packet.dim")?)?,
            delta_kx: kv.get("coherence.delta_kx")?,
            experiment,
            theta_convention: kv.raw("output.theta_convention").parse()?,
            propagate: PropagateSettings {
                t_max: kv
                    .get_opt::<f64>("propagate.t_max_s")?
                    .unwrap_or(experiment.t),
                steps: kv.get("propagate.steps")?,
            },
            curves: CurveSettings {
                a_min: kv.get("curves.a_min_m")?,
                a_max: kv.get("curves.a_max_m")?,
                points: kv.get("curves.points")?,
                log_x: kv.get_bool("curves.log_x")?,
            },
            fit: FitSettings {
                init_dkx: kv.get("fit.init_dkx")?,
                max_iterations: kv.get("fit.max_iterations")?,
                cofit_factor: kv.get_bool("fit.cofit_factor")?,
            },
            oracle: OracleSettings {
                t_factors,
                grid_n: nonzero(kv.get("oracle.grid_n")?),
                mixed_grid_n: nonzero(kv.get("oracle.mixed_grid_n")?),
                half_span: positive_or_none(kv.get("oracle.half_span_m")?),
                nodes: kv.get("oracle.nodes")?,
                ladder: kv.get("oracle.ladder")?,
            },
            synth: SynthSettings {
                points: kv.get("synth.points")?,
                a_min: kv.get("synth.a_min_m")?,
                a_max: kv.get("synth.a_max_m")?,
                noise: kv.get("synth.noise")?,
                seed: kv.get("synth.seed")?,
                flag_smallest: kv.get_bool("synth.flag_smallest")?,
            },
            source: kv,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        if !(self.packet_b > 0.0) {
            return Err(Error::Config("packet.b must be > 0".into()));
        }
        if !(self.delta_kx >= 0.0 && self.delta_kx.is_finite()) {
            return Err(Error::Config("coherence.delta_kx must be >= 0".into()));
        }
        if !(self.propagate.t_max > 0.0) || self.propagate.steps == 0 {
            return Err(Error::Config(
                "propagate needs t_max_s > 0 and steps > 0".into(),
            ));
        }
        let c = &self.curves;
        if !(c.a_min > 0.0 && c.a_max > c.a_min) || c.points < 2 {
            return Err(Error::Config(
                "curves needs 0 < a_min_m < a_max_m and points >= 2".into(),
            ));
        }
        if !(self.fit.init_dkx > 0.0) {
            return Err(Error::Config("fit.init_dkx must be > 0".into()));
        }
        let s = &self.synth;
        if !(s.a_min > 0.0 && s.a_max > s.a_min) || s.points < 2 || !(s.noise >= 0.0) {
            return Err(Error::Config(
                "synth needs 0 < a_min_m < a_max_m, points >= 2, noise >= 0".into(),
            ));
        }
        Ok(())
    }

    /// Parameters recorded in every output header, in key order.
    pub fn metadata(&self) -> Vec<(String, String)> {
        self.source
            .iter()
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect()
    }

    /// The default run: C70 at the reference time of flight and coherence.
    pub fn paper() -> Self {
        Self::from_key_values(KeyValues::defaults()).expect("defaults are valid")
    }
}

impl Default for RunConfig {
    fn default() -> Self {
        Self::paper()
    }
}
