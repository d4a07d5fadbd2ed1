//! Experiment configuration: parsing, validation and the provenance hash.

use std::path::{Path, PathBuf};

use collapse_lab::fourier::{FourierSeries, ModeIndex, MAX_MODES};
use collapse_lab::models::{BundleModel, FiberSpin, ModelKind, ModelSpec, Warping};
use collapse_lab::potentials::{PotentialJson, PotentialSpec};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

/// `"auto"` or an explicit list of fiber modes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Modes {
    Auto(AutoModes),
    List(Vec<ModeIndex>),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AutoModes {
    Auto,
}

impl Default for Modes {
    fn default() -> Self {
        Modes::Auto(AutoModes::Auto)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Dat,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Outputs {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
    #[serde(default = "default_formats")]
    pub formats: Vec<Format>,
}

fn default_formats() -> Vec<Format> {
    vec![Format::Csv, Format::Json]
}

impl Default for Outputs {
    fn default() -> Self {
        Outputs {
            dir: None,
            formats: default_formats(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelSpec,
    #[serde(default)]
    pub modes: Modes,
    #[serde(default = "default_cutoffs")]
    pub cutoffs: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilons: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quotient_orders: Option<Vec<u32>>,
    /// Warping amplitudes `a` in `c = exp(a cos s)`; form models only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitudes: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub potential: Option<PotentialJson>,
    /// Replaces the measured potential bound `Λ` in audits.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default)]
    pub outputs: Outputs,
    #[serde(default)]
    pub seed: u64,
}

fn default_cutoffs() -> Vec<usize> {
    vec![32]
}

/// The sweep a collapse run walks through.
#[derive(Debug, Clone, PartialEq)]
pub enum Sweep {
    Epsilon(Vec<f64>),
    Quotient(Vec<u32>),
    Amplitude(Vec<f64>),
}

impl Sweep {
    pub fn name(&self) -> &'static str {
        match self {
            Sweep::Epsilon(_) => "epsilon",
            Sweep::Quotient(_) => "quotient_order",
            Sweep::Amplitude(_) => "amplitude",
        }
    }

    pub fn values(&self) -> Vec<f64> {
        match self {
            Sweep::Epsilon(v) | Sweep::Amplitude(v) => v.clone(),
            Sweep::Quotient(v) => v.iter().map(|&q| q as f64).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.values().len()
    }
}

/// One model of a sweep, with the value that produced it.
#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub value: f64,
    pub model: BundleModel,
    pub id: String,
}

pub fn model_id(model: &BundleModel) -> String {
    let spin = match model.fiber_spin() {
        FiberSpin::Projectable => "p",
        FiberSpin::Nonprojectable => "np",
    };
    let mut id = format!("{}:{spin}:eps={}", model.kind().name(), model.epsilon());
    if model.kind() == ModelKind::HeisenbergBundle {
        id.push_str(&format!(":b={}:q={}", model.curvature_mean(), model.quotient_order()));
    }
    id
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("invalid config: {e}")))
    }

    /// Hex prefix of the SHA-256 of the canonical serialization.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serializes");
        hex::encode(&Sha256::digest(canonical.as_bytes())[..8])
    }

    pub fn base_model(&self) -> Result<BundleModel, CliError> {
        self.model.build().map_err(CliError::config)
    }

    pub fn sweep(&self) -> Result<Option<Sweep>, CliError> {
        let given = [
            self.epsilons.as_ref().map(|v| Sweep::Epsilon(v.clone())),
            self.quotient_orders.as_ref().map(|v| Sweep::Quotient(v.clone())),
            self.amplitudes.as_ref().map(|v| Sweep::Amplitude(v.clone())),
        ];
        let mut sweeps = given.into_iter().flatten();
        let first = sweeps.next();
        if sweeps.next().is_some() {
            return Err(CliError::Config(
                "give at most one of epsilons, quotient_orders and amplitudes".into(),
            ));
        }
        if let Some(s) = &first {
            if s.len() == 0 {
                return Err(CliError::Config(format!("{} sweep list is empty", s.name())));
            }
        }
        Ok(first)
    }

    /// Models of the sweep, or the base model alone.
    pub fn points(&self) -> Result<Vec<SweepPoint>, CliError> {
        let base = self.base_model()?;
        let models: Vec<(f64, BundleModel)> = match self.sweep()? {
            None => vec![(base.epsilon(), base)],
            Some(Sweep::Epsilon(v)) => v
                .iter()
                .map(|&e| base.with_epsilon(e).map(|m| (e, m)))
                .collect::<Result<_, _>>()
                .map_err(CliError::config)?,
            Some(Sweep::Quotient(v)) => v
                .iter()
                .map(|&q| base.quotient(q).map(|m| (q as f64, m)))
                .collect::<Result<_, _>>()
                .map_err(CliError::config)?,
            Some(Sweep::Amplitude(v)) => {
                if base.kind() != ModelKind::FormTorus {
                    return Err(CliError::Config("amplitude sweeps need a form_torus model".into()));
                }
                v.iter()
                    .map(|&a| {
                        BundleModel::form_torus(base.epsilon(), Warping::Exponent(FourierSeries::cos(1, a)))
                            .map(|m| (a, m))
                    })
                    .collect::<Result<_, _>>()
                    .map_err(CliError::config)?
            }
        };
        let amplitude = matches!(self.sweep()?, Some(Sweep::Amplitude(_)));
        Ok(models
            .into_iter()
            .map(|(value, model)| {
                let mut id = model_id(&model);
                if amplitude {
                    id.push_str(&format!(":a={value}"));
                }
                SweepPoint { value, id, model }
            })
            .collect())
    }

    /// Fiber modes for `model`; `auto` takes every mode with `|k| ≤ 2`.
    pub fn modes_for(&self, model: &BundleModel) -> Result<Vec<ModeIndex>, CliError> {
        let ks = match (&self.modes, model.kind()) {
            (Modes::Auto(_), ModelKind::HeisenbergBundle | ModelKind::FormTorus) => vec![ModeIndex::integer(0)],
            (Modes::Auto(_), ModelKind::WarpedTorus) => match model.fiber_spin() {
                FiberSpin::Projectable => (-2..=2).map(ModeIndex::integer).collect(),
                FiberSpin::Nonprojectable => [-3, -1, 1, 3].into_iter().map(ModeIndex::from_twice).collect(),
            },
            (Modes::List(ks), _) => ks.clone(),
        };
        if ks.is_empty() {
            return Err(CliError::Config("mode list is empty".into()));
        }
        for &k in &ks {
            model.ensure_mode(k).map_err(CliError::config)?;
            if !k.is_zero() && model.kind() != ModelKind::WarpedTorus {
                return Err(CliError::Config(format!(
                    "mode k = {k} is not available for {}; only k = 0 is assembled",
                    model.kind().name()
                )));
            }
        }
        Ok(ks)
    }

    pub fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }

    pub fn potential_for(&self, model: &BundleModel) -> Result<Option<PotentialSpec>, CliError> {
        match &self.potential {
            None => Ok(None),
            Some(_) if model.kind() == ModelKind::FormTorus => {
                Err(CliError::Config("potentials are not supported on form_torus models".into()))
            }
            Some(p) => p.build(model, &mut self.rng()).map(Some).map_err(CliError::config),
        }
    }

    /// Checks everything that can be checked before any solve.
    pub fn validate(&self) -> Result<(), CliError> {
        if self.cutoffs.is_empty() {
            return Err(CliError::Config("cutoffs list is empty".into()));
        }
        if let Some(&c) = self.cutoffs.iter().find(|&&c| !(1..=MAX_MODES).contains(&c)) {
            return Err(CliError::Config(format!("cutoff {c} outside 1..={MAX_MODES}")));
        }
        if let Some(l) = self.lambda {
            if !(l >= 0.0) || !l.is_finite() {
                return Err(CliError::Config(format!("lambda = {l} must be a nonnegative number")));
            }
        }
        if self.outputs.formats.is_empty() {
            return Err(CliError::Config("outputs.formats is empty".into()));
        }
        for p in self.points()? {
            self.modes_for(&p.model)?;
            self.potential_for(&p.model)?;
            if let Some(w) = p.model.integrality_warning() {
                log::warn!("{}: {w}", p.id);
            }
        }
        Ok(())
    }
}
