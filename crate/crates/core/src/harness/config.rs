//! Experiment configuration, read from TOML. Unknown keys are rejected.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::cartoon::{CartoonSpec, SmoothPart};
use crate::deform::{FieldSpec, Interpolation, MatrixNorm};
use crate::error::{Error, Result};
use crate::frames::WaveletMother;
use crate::network::Nonlinearity;
use crate::signal::Grid;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    /// Input deformation errors only.
    Deformation,
    /// Feature distances against input errors, with contractivity and the
    /// cartoon bound checked per rung.
    Stability,
    /// Indicator translations and the square-root law.
    Sharpness,
    /// Concentrated indicators whose error does not decay.
    Counterexample,
    /// Smooth decaying inputs and the linear law.
    Smooth,
    /// Band-limited inputs of growing bandwidth at a fixed displacement.
    Bandlimited,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Deformation => "deformation",
            ExperimentKind::Stability => "stability",
            ExperimentKind::Sharpness => "sharpness",
            ExperimentKind::Counterexample => "counterexample",
            ExperimentKind::Smooth => "smooth",
            ExperimentKind::Bandlimited => "bandlimited",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub dim: usize,
    pub extent: usize,
    pub spacing: f64,
}

impl GridConfig {
    pub fn build(&self) -> Result<Grid> {
        let extents = vec![self.extent; self.dim];
        Grid::new(&extents, self.spacing)
    }
}

fn default_envelope() -> f64 {
    0.5
}

fn default_doublings() -> usize {
    3
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SourceConfig {
    Cartoon {
        f1: SmoothPart,
        f2: SmoothPart,
        domain: crate::cartoon::DomainB,
        #[serde(default)]
        size: Option<f64>,
    },
    Smooth {
        part: SmoothPart,
    },
    /// `f_R(x) = e^{−|x|²/(2σ²)} Σ_j cos(2π R ν_j x₀ + φ_j)` with fixed
    /// relative frequencies ν = (1/2, 3/4, 1), unit L² norm. Doubling R
    /// doubles every frequency while the envelope stays put.
    Bandlimited {
        bandwidth: f64,
        #[serde(default = "default_envelope")]
        envelope: f64,
        /// Bandwidth ladder `R·2^k`, `k = 0..=doublings`.
        #[serde(default = "default_doublings")]
        doublings: usize,
    },
    /// Unit-energy indicators of `[−s/2, s/2]`, one per rung amplitude s.
    ConcentratedIndicator,
    Pgm {
        path: PathBuf,
        /// Declared decay constant for the smooth-class guard.
        #[serde(default)]
        size: Option<f64>,
    },
}

impl SourceConfig {
    pub fn cartoon(&self) -> Option<CartoonSpec> {
        match self {
            SourceConfig::Cartoon {
                f1,
                f2,
                domain,
                size,
            } => Some(CartoonSpec {
                f1: f1.clone(),
                f2: f2.clone(),
                domain: domain.clone(),
                size: *size,
            }),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum BankConfig {
    Delta,
    Gabor {
        frequencies: Vec<Vec<f64>>,
        width: f64,
    },
    Wavelet {
        scales: usize,
        mother: WaveletMother,
        #[serde(default)]
        base_scale: Option<f64>,
    },
    Random {
        count: usize,
        seed: u64,
        smoothness: f64,
    },
}

fn default_true() -> bool {
    true
}

fn default_one() -> usize {
    1
}

fn default_gain() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkConfig {
    pub depth: usize,
    pub nonlinearity: Nonlinearity,
    #[serde(default = "default_one")]
    pub subsampling: usize,
    /// Rescale every bank to weak admissibility.
    #[serde(default = "default_true")]
    pub normalize: bool,
    /// Multiplies every atom before normalization.
    #[serde(default = "default_gain")]
    pub gain: f64,
    pub bank: BankConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LadderConfig {
    #[serde(default = "LadderConfig::default_start")]
    pub start: f64,
    #[serde(default = "LadderConfig::default_ratio")]
    pub ratio: f64,
    #[serde(default = "LadderConfig::default_rungs")]
    pub rungs: usize,
}

impl LadderConfig {
    fn default_start() -> f64 {
        0.25
    }

    fn default_ratio() -> f64 {
        0.5
    }

    fn default_rungs() -> usize {
        7
    }

    /// `s_k = start · ratio^k`.
    pub fn amplitudes(&self) -> Result<Vec<f64>> {
        if !(self.start > 0.0) || !(self.ratio > 0.0 && self.ratio < 1.0) || self.rungs == 0 {
            return Err(Error::Config(
                "ladder needs start > 0, 0 < ratio < 1 and at least one rung".into(),
            ));
        }
        Ok((0..self.rungs)
            .map(|k| self.start * self.ratio.powi(k as i32))
            .collect())
    }
}

impl Default for LadderConfig {
    fn default() -> Self {
        LadderConfig {
            start: Self::default_start(),
            ratio: Self::default_ratio(),
            rungs: Self::default_rungs(),
        }
    }
}

fn default_field() -> FieldSpec {
    FieldSpec::ConstantTranslation {
        direction: vec![1.0],
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeformationConfig {
    #[serde(default = "default_field")]
    pub field: FieldSpec,
    #[serde(default)]
    pub interpolation: Interpolation,
    #[serde(default)]
    pub matrix_norm: MatrixNorm,
    #[serde(default)]
    pub ladder: LadderConfig,
    /// Displacement used for every rung of a bandwidth ladder.
    #[serde(default)]
    pub fixed_amplitude: Option<f64>,
}

impl Default for DeformationConfig {
    fn default() -> Self {
        DeformationConfig {
            field: default_field(),
            interpolation: Interpolation::default(),
            matrix_norm: MatrixNorm::default(),
            ladder: LadderConfig::default(),
            fixed_amplitude: None,
        }
    }
}

/// Acceptance windows; absent entries are not checked unless the
/// experiment kind supplies its own default.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AssertionConfig {
    pub alpha_min: Option<f64>,
    pub alpha_max: Option<f64>,
    pub prefactor_min: Option<f64>,
    pub prefactor_max: Option<f64>,
    /// Relative tolerance of each rung against its closed-form value.
    pub rung_tolerance: Option<f64>,
    /// Relative slack of the feature-vs-input comparison.
    pub contractivity_slack: Option<f64>,
    /// Relative slack of the smooth-part bound `C·D·‖τ‖_∞`.
    pub bound_slack: Option<f64>,
    pub growth_min: Option<f64>,
    pub growth_max: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub grid: GridConfig,
    pub signal: SourceConfig,
    #[serde(default)]
    pub network: Option<NetworkConfig>,
    #[serde(default)]
    pub deformation: DeformationConfig,
    #[serde(default)]
    pub assertions: AssertionConfig,
    /// Replaces every seed in the config when set.
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<ExperimentConfig> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<ExperimentConfig> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = ExperimentConfig::from_toml(&text)?;
        if let SourceConfig::Pgm { path: p, .. } = &mut cfg.signal {
            if p.is_relative() {
                if let Some(dir) = path.parent() {
                    *p = dir.join(&*p);
                }
            }
        }
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Applies a seed override to the config and every seeded component.
    pub fn with_seed(mut self, seed: u64) -> ExperimentConfig {
        self.seed = Some(seed);
        self.apply_seed();
        self
    }

    pub(crate) fn apply_seed(&mut self) {
        let Some(seed) = self.seed else { return };
        if let FieldSpec::SmoothRandom { seed: s, .. } = &mut self.deformation.field {
            *s = seed;
        }
        if let Some(NetworkConfig {
            bank: BankConfig::Random { seed: s, .. },
            ..
        }) = &mut self.network
        {
            *s = seed;
        }
    }

    /// Halves the grid spacing `levels` times over the same domain.
    pub fn with_grid_refinement(mut self, levels: u32) -> ExperimentConfig {
        self.grid.extent <<= levels;
        self.grid.spacing /= (1u64 << levels) as f64;
        self
    }

    /// Default indicator-translation run: `1_{[−1,1]}` on `Δ = 2^{−10}`.
    pub fn default_sharpness() -> ExperimentConfig {
        ExperimentConfig {
            experiment: ExperimentKind::Sharpness,
            grid: GridConfig {
                dim: 1,
                extent: 8192,
                spacing: 1.0 / 1024.0,
            },
            signal: SourceConfig::Cartoon {
                f1: SmoothPart::zero(),
                f2: SmoothPart::Constant { value: 1.0 },
                domain: crate::cartoon::DomainB::interval(-1.0, 1.0),
                size: None,
            },
            network: None,
            deformation: DeformationConfig::default(),
            assertions: AssertionConfig::default(),
            seed: None,
            output_dir: None,
        }
    }

    /// Concentrated-indicator family on the sharpness grid.
    pub fn default_counterexample() -> ExperimentConfig {
        ExperimentConfig {
            experiment: ExperimentKind::Counterexample,
            signal: SourceConfig::ConcentratedIndicator,
            ..ExperimentConfig::default_sharpness()
        }
    }

    /// Two-component Gaussian mixture under translations.
    pub fn default_smooth() -> ExperimentConfig {
        ExperimentConfig {
            experiment: ExperimentKind::Smooth,
            grid: GridConfig {
                dim: 1,
                extent: 8192,
                spacing: 1.0 / 1024.0,
            },
            signal: SourceConfig::Smooth {
                part: SmoothPart::GaussianMixture {
                    components: vec![
                        crate::cartoon::GaussianBlob {
                            amplitude: 1.0,
                            center: vec![-0.3],
                            width: 0.5,
                        },
                        crate::cartoon::GaussianBlob {
                            amplitude: 0.6,
                            center: vec![0.4],
                            width: 0.3,
                        },
                    ],
                },
            },
            network: None,
            deformation: DeformationConfig::default(),
            assertions: AssertionConfig::default(),
            seed: None,
            output_dir: None,
        }
    }

    /// Bandwidths 2, 4, 8, 16 at `‖τ‖_∞ = 2^{−8}`.
    pub fn default_bandlimited() -> ExperimentConfig {
        ExperimentConfig {
            experiment: ExperimentKind::Bandlimited,
            grid: GridConfig {
                dim: 1,
                extent: 4096,
                spacing: 1.0 / 256.0,
            },
            signal: SourceConfig::Bandlimited {
                bandwidth: 2.0,
                envelope: default_envelope(),
                doublings: default_doublings(),
            },
            network: None,
            deformation: DeformationConfig {
                fixed_amplitude: Some(1.0 / 256.0),
                ..DeformationConfig::default()
            },
            assertions: AssertionConfig::default(),
            seed: None,
            output_dir: None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
experiment = "stability"
seed = 11

[grid]
dim = 2
extent = 64
spacing = 0.0625

[signal]
kind = "cartoon"
f1 = { kind = "gaussian", amplitude = 1.0, center = [0.0, 0.1], width = 0.4 }
f2 = { kind = "constant", value = 1.0 }
domain = { kind = "disc", center = [0.0, 0.0], radius = 0.5 }

[network]
depth = 2
nonlinearity = "modulus"
bank = { kind = "random", count = 3, seed = 1, smoothness = 0.2 }

[deformation]
field = { kind = "smooth-random", seed = 4 }
ladder = { start = 0.2, rungs = 5 }

[assertions]
alpha_min = 0.45
"#;

    #[test]
    fn parses_and_round_trips() {
        let cfg = ExperimentConfig::from_toml(SAMPLE).unwrap();
        assert_eq!(cfg.experiment, ExperimentKind::Stability);
        assert_eq!(cfg.deformation.ladder.rungs, 5);
        assert_eq!(cfg.deformation.ladder.ratio, 0.5);
        assert_eq!(cfg.network.as_ref().unwrap().subsampling, 1);
        let again = ExperimentConfig::from_toml(&cfg.to_toml()).unwrap();
        assert_eq!(again, cfg);
    }

    #[test]
    fn seed_override_reaches_components() {
        let cfg = ExperimentConfig::from_toml(SAMPLE).unwrap().with_seed(99);
        assert!(matches!(
            cfg.deformation.field,
            FieldSpec::SmoothRandom { seed: 99, .. }
        ));
        assert!(matches!(
            cfg.network.unwrap().bank,
            BankConfig::Random { seed: 99, .. }
        ));
    }

    #[test]
    fn unknown_keys_are_errors() {
        let bad = SAMPLE.replace("alpha_min", "alpha_minimum");
        assert!(matches!(
            ExperimentConfig::from_toml(&bad),
            Err(Error::Config(_))
        ));
        let bad = SAMPLE.replace("radius = 0.5", "radius = 0.5, colour = 1");
        assert!(ExperimentConfig::from_toml(&bad).is_err());
        assert!(ExperimentConfig::from_toml("experiment = ").is_err());
    }

    #[test]
    fn ladder_defaults() {
        let s = LadderConfig::default().amplitudes().unwrap();
        assert_eq!(s.len(), 7);
        assert_eq!(s[0], 0.25);
        assert_eq!(s[6], 0.25 / 64.0);
        assert!(LadderConfig {
            ratio: 1.0,
            ..LadderConfig::default()
        }
        .amplitudes()
        .is_err());
    }

    #[test]
    fn refinement_keeps_domain() {
        let cfg = ExperimentConfig::default_sharpness().with_grid_refinement(1);
        assert_eq!(cfg.grid.extent, 16384);
        assert_eq!(cfg.grid.spacing, 1.0 / 2048.0);
    }
}
