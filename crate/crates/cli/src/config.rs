//! Declarative run configuration (TOML) with command-line overrides.
//!
//! The effective configuration, after overrides, is echoed into every report
//! a command writes. Feeding that echo back in reproduces the run.

use std::path::Path;

use egoseg_core::{
    CaptureMetadata, ChromaThresholds, CompositeConfig, DepthBand, MorphConfig, QcConfig,
    SegmenterConfig,
};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    /// Worker threads for batch commands; `None` uses every available core.
    pub threads: Option<usize>,
    pub extract: ExtractSection,
    pub chroma: ChromaThresholds,
    pub morph: MorphSection,
    pub qc: QcConfig,
    pub composite: CompositeSection,
    pub metadata: Option<CaptureMetadata>,
    pub segmenter: SegmenterConfig,
    pub evaluate: EvaluateSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            threads: None,
            extract: ExtractSection::default(),
            chroma: ChromaThresholds::default(),
            morph: MorphSection::default(),
            qc: QcConfig::default(),
            composite: CompositeSection::default(),
            metadata: None,
            segmenter: SegmenterConfig::default(),
            evaluate: EvaluateSection::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExtractSection {
    pub stride: usize,
}

impl Default for ExtractSection {
    fn default() -> Self {
        Self { stride: 5 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MorphSection {
    pub open_radius: u32,
    pub close_radius: u32,
    /// Area threshold for a 720x720 frame.
    pub min_component_area: u64,
    /// Rescale `min_component_area` by frame area relative to 720x720.
    pub scale_min_area: bool,
}

impl Default for MorphSection {
    fn default() -> Self {
        let m = MorphConfig::default();
        Self {
            open_radius: m.open_radius,
            close_radius: m.close_radius,
            min_component_area: m.min_component_area,
            scale_min_area: true,
        }
    }
}

impl MorphSection {
    /// Morphology for a frame of the given size.
    pub fn for_frame(&self, width: u32, height: u32) -> MorphConfig {
        let base = MorphConfig {
            open_radius: self.open_radius,
            close_radius: self.close_radius,
            min_component_area: self.min_component_area,
        };
        if self.scale_min_area {
            base.scaled_for(width, height)
        } else {
            base
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CompositeSection {
    pub seed: u64,
    pub feather_radius: u32,
    pub copies: u32,
    /// Side of the square backgrounds; must match the foreground frames.
    pub background_size: u32,
}

impl Default for CompositeSection {
    fn default() -> Self {
        let c = CompositeConfig::default();
        Self {
            seed: c.seed,
            feather_radius: c.feather_radius,
            copies: c.copies,
            background_size: 720,
        }
    }
}

impl CompositeSection {
    pub fn composite_config(&self) -> CompositeConfig {
        CompositeConfig {
            seed: self.seed,
            feather_radius: self.feather_radius,
            copies: self.copies,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvaluateSection {
    pub resize_pred: bool,
    /// Heatmap reference size; defaults to the first groundtruth of each dataset.
    pub heatmap_size: Option<[u32; 2]>,
}

/// Command-line overrides shared by every subcommand.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub stride: Option<usize>,
    pub resize_pred: bool,
    pub copies: Option<u32>,
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> CliResult<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_toml_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn load_or_default(path: Option<&Path>) -> CliResult<Self> {
        match path {
            Some(p) => Self::load(p),
            None => Ok(Self::default()),
        }
    }

    pub fn apply(mut self, o: &Overrides) -> CliResult<Self> {
        if let Some(seed) = o.seed {
            self.composite.seed = seed;
        }
        if let Some(t) = o.threads {
            self.threads = Some(t);
        }
        if let Some(s) = o.stride {
            self.extract.stride = s;
        }
        if o.resize_pred {
            self.evaluate.resize_pred = true;
        }
        if let Some(c) = o.copies {
            self.composite.copies = c;
        }
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> CliResult<()> {
        let config_err = |e: egoseg_core::Error| CliError::Config(e.to_string());
        if self.schema_version != SCHEMA_VERSION {
            return Err(CliError::Config(format!(
                "invalid `schema_version`: expected {SCHEMA_VERSION}, got {}",
                self.schema_version
            )));
        }
        if self.threads == Some(0) {
            return Err(CliError::Config(
                "invalid `threads`: must be at least 1".into(),
            ));
        }
        if self.extract.stride == 0 {
            return Err(CliError::Config(
                "invalid `stride`: must be at least 1".into(),
            ));
        }
        if self.composite.background_size == 0 {
            return Err(CliError::Config(
                "invalid `background_size`: must be at least 1".into(),
            ));
        }
        self.chroma.validate().map_err(config_err)?;
        self.qc.validate().map_err(config_err)?;
        self.composite
            .composite_config()
            .validate()
            .map_err(config_err)?;
        self.segmenter.validate().map_err(config_err)?;
        if let Some(m) = &self.metadata {
            m.validate().map_err(config_err)?;
        }
        if let Some([w, h]) = self.evaluate.heatmap_size {
            if w == 0 || h == 0 {
                return Err(CliError::Config(
                    "invalid `heatmap_size`: sides must be at least 1".into(),
                ));
            }
        }
        Ok(())
    }

    pub fn echo(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("RunConfig always serializes")
    }

    pub fn depth_band_or_default(&self) -> DepthBand {
        match &self.segmenter {
            SegmenterConfig::Depth(b) => *b,
            _ => DepthBand::default(),
        }
    }

    /// Runs `f` on a rayon pool sized by `threads`.
    pub fn install<T: Send>(&self, f: impl FnOnce() -> T + Send) -> CliResult<T> {
        let mut builder = rayon::ThreadPoolBuilder::new();
        if let Some(n) = self.threads {
            builder = builder.num_threads(n);
        }
        let pool = builder
            .build()
            .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
        Ok(pool.install(f))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use egoseg_core::{BandMode, SkinBand};

    #[test]
    fn full_schema_parses() {
        let text = r#"
schema_version = 1
threads = 2

[extract]
stride = 3

[chroma]
h1 = 0.2
h2 = 0.5
s1 = 0.25
band_mode = "outside-band"

[morph]
open_radius = 0
close_radius = 1
min_component_area = 10
scale_min_area = false

[qc]
min_fg_fraction = 0.0
max_fg_fraction = 0.9
max_components = 5
forbid_top_border = false

[composite]
seed = 42
feather_radius = 0
copies = 2
background_size = 128

[metadata]
subject_id = "s03"
gender = "male"
arm_pose = "left-arm"
scenario = "outdoors"
outfit = "outfit1"
sleeve = "long"
ethnicity = "black"

[segmenter]
kind = "skin"
hue_ranges = [[0.0, 0.1], [0.95, 1.0]]
s_min = 0.2
s_max = 0.8
v_min = 0.1

[evaluate]
resize_pred = true
heatmap_size = [64, 48]
"#;
        let cfg = RunConfig::from_toml_str(text).unwrap();
        assert_eq!(cfg.extract.stride, 3);
        assert_eq!(cfg.chroma.band_mode, BandMode::OutsideBand);
        assert_eq!(cfg.composite.copies, 2);
        assert_eq!(
            cfg.segmenter,
            SegmenterConfig::Skin(SkinBand {
                hue_ranges: vec![[0.0, 0.1], [0.95, 1.0]],
                s_min: 0.2,
                s_max: 0.8,
                v_min: 0.1
            })
        );
        // echo round-trips through TOML
        let again: RunConfig = toml::from_str(&toml::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(again, cfg);
    }

    #[test]
    fn zero_stride_names_the_field() {
        let err = RunConfig::from_toml_str("[extract]\nstride = 0\n").unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("stride"), "{err}");
    }

    #[test]
    fn unknown_keys_and_versions_rejected() {
        assert!(RunConfig::from_toml_str("[extract]\nstrid = 5\n").is_err());
        assert!(RunConfig::from_toml_str("schema_version = 2\n").is_err());
        let bad_band = "[segmenter]\nkind = \"depth\"\nd_min = 500\nd_max = 100\n";
        assert_eq!(
            RunConfig::from_toml_str(bad_band).unwrap_err().exit_code(),
            2
        );
    }

    #[test]
    fn overrides_apply() {
        let o = Overrides {
            seed: Some(9),
            threads: Some(1),
            stride: Some(2),
            resize_pred: true,
            copies: Some(3),
        };
        let cfg = RunConfig::default().apply(&o).unwrap();
        assert_eq!(cfg.composite.seed, 9);
        assert_eq!(cfg.threads, Some(1));
        assert_eq!(cfg.extract.stride, 2);
        assert!(cfg.evaluate.resize_pred);
        assert_eq!(cfg.composite.copies, 3);
        let zero = Overrides {
            stride: Some(0),
            ..Overrides::default()
        };
        assert!(RunConfig::default().apply(&zero).is_err());
    }

    #[test]
    fn morph_scaling() {
        let m = MorphSection::default();
        assert_eq!(m.for_frame(720, 720).min_component_area, 64);
        assert_eq!(m.for_frame(180, 180).min_component_area, 4);
        let fixed = MorphSection {
            scale_min_area: false,
            ..m
        };
        assert_eq!(fixed.for_frame(180, 180).min_component_area, 64);
    }
}
