//! Stage sequencing: the canonical order WB-AD-CN-FHH-MB-GB-CB feeding the
//! Canny detector, with support for stage removal, forced conditionals, and
//! reordering of the post-WB stages.

use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use crate::canny::{canny_detect, CannyParams};
use crate::error::{Error, Result};
use crate::eval::{evaluate_corpus, ScorePair};
use crate::filters::{
    anisotropic_diffusion, conditional_contrast_normalization, conditional_gaussian_blur,
    fuzzy_histogram_hyperbolization, gaussian_blur, median_blur, white_balance,
    ConditionalTriggerParams, DiffusionParams,
};
use crate::raster::{checksum_f64, to_grayscale, ColorRaster, EdgeMap, GrayRaster};

/// Pre-processing stage identifiers, serialized with their two/three
/// letter abbreviations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Stage {
    #[serde(rename = "WB")]
    WhiteBalance,
    #[serde(rename = "AD")]
    AnisotropicDiffusion,
    #[serde(rename = "CN")]
    ContrastNormalization,
    #[serde(rename = "FHH")]
    FuzzyHyperbolization,
    #[serde(rename = "MB")]
    MedianBlur,
    #[serde(rename = "GB")]
    GaussianBlur,
    #[serde(rename = "CB")]
    ConditionalBlur,
}

impl Stage {
    pub const ALL: [Stage; 7] = [
        Stage::WhiteBalance,
        Stage::AnisotropicDiffusion,
        Stage::ContrastNormalization,
        Stage::FuzzyHyperbolization,
        Stage::MedianBlur,
        Stage::GaussianBlur,
        Stage::ConditionalBlur,
    ];

    pub fn abbrev(&self) -> &'static str {
        match self {
            Stage::WhiteBalance => "WB",
            Stage::AnisotropicDiffusion => "AD",
            Stage::ContrastNormalization => "CN",
            Stage::FuzzyHyperbolization => "FHH",
            Stage::MedianBlur => "MB",
            Stage::GaussianBlur => "GB",
            Stage::ConditionalBlur => "CB",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.abbrev())
    }
}

impl FromStr for Stage {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "WB" => Ok(Stage::WhiteBalance),
            "AD" => Ok(Stage::AnisotropicDiffusion),
            "CN" => Ok(Stage::ContrastNormalization),
            "FHH" => Ok(Stage::FuzzyHyperbolization),
            "MB" => Ok(Stage::MedianBlur),
            "GB" => Ok(Stage::GaussianBlur),
            "CB" => Ok(Stage::ConditionalBlur),
            other => Err(Error::UnknownStage(other.to_string())),
        }
    }
}

/// Parse a dash-separated order string like `WB-AD-CN-FHH-MB-GB-CB`.
pub fn parse_stage_order(s: &str) -> Result<Vec<Stage>> {
    s.split('-').map(|p| p.trim().parse()).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub stage_order: Vec<Stage>,
    pub disabled_stages: BTreeSet<Stage>,
    /// Bypass every conditional trigger.
    pub force_conditionals: bool,
    /// Bypass the trigger of individual conditional stages.
    pub forced_stages: BTreeSet<Stage>,
    pub diffusion: DiffusionParams,
    pub triggers: ConditionalTriggerParams,
    pub canny: CannyParams,
    /// Histogram bucket count L of the hyperbolization transfer.
    pub fhh_buckets: u32,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            stage_order: Stage::ALL.to_vec(),
            disabled_stages: BTreeSet::new(),
            force_conditionals: false,
            forced_stages: BTreeSet::new(),
            diffusion: DiffusionParams::default(),
            triggers: ConditionalTriggerParams::default(),
            canny: CannyParams::default(),
            fhh_buckets: 256,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        let mut seen = BTreeSet::new();
        for stage in &self.stage_order {
            if !seen.insert(*stage) {
                return Err(Error::InvalidConfig(format!("duplicate stage {stage}")));
            }
        }
        if let Some(pos) = self
            .stage_order
            .iter()
            .position(|&s| s == Stage::WhiteBalance)
        {
            if pos != 0 {
                return Err(Error::InvalidConfig(
                    "white balance must be the first stage when present".into(),
                ));
            }
        }
        self.diffusion.validate()?;
        self.triggers.validate()?;
        self.canny.validate()?;
        if self.fhh_buckets < 2 {
            return Err(Error::InvalidConfig("fhh_buckets must be at least 2".into()));
        }
        Ok(())
    }

    /// Stages that actually run, in execution order.
    pub fn enabled_stages(&self) -> Vec<Stage> {
        self.stage_order
            .iter()
            .filter(|s| !self.disabled_stages.contains(s))
            .copied()
            .collect()
    }

    pub fn without_stage(&self, stage: Stage) -> PipelineConfig {
        let mut cfg = self.clone();
        cfg.stage_order.retain(|&s| s != stage);
        cfg
    }

    /// Raw Canny baseline: grayscale conversion straight into the detector.
    pub fn raw_canny(&self) -> PipelineConfig {
        let mut cfg = self.clone();
        cfg.stage_order.clear();
        cfg
    }

    pub fn with_order(&self, order: Vec<Stage>) -> PipelineConfig {
        let mut cfg = self.clone();
        cfg.stage_order = order;
        cfg
    }
}

/// Trace entry label: a pre-processing stage or the final detector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TraceStage {
    Stage(Stage),
    Canny,
}

impl fmt::Display for TraceStage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TraceStage::Stage(s) => s.fmt(f),
            TraceStage::Canny => f.write_str("CANNY"),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StageTrace {
    pub stage: TraceStage,
    /// False for a conditional stage whose trigger stayed quiet.
    pub applied: bool,
    pub millis: f64,
    pub input_checksum: u64,
    pub output_checksum: u64,
    pub skew_ratio: Option<f64>,
    pub sparse_fraction: Option<f64>,
}

/// One entry per enabled stage plus one for the detector, in execution order.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct PipelineTrace {
    pub stages: Vec<StageTrace>,
}

impl PipelineTrace {
    pub fn stage(&self, stage: Stage) -> Option<&StageTrace> {
        self.stages
            .iter()
            .find(|t| t.stage == TraceStage::Stage(stage))
    }

    pub fn total_millis(&self) -> f64 {
        self.stages.iter().map(|t| t.millis).sum()
    }
}

enum Working {
    Color(ColorRaster),
    Gray(GrayRaster),
}

impl Working {
    fn checksum(&self) -> u64 {
        match self {
            Working::Color(c) => {
                checksum_f64(c.channel(0)) ^ checksum_f64(c.channel(1)).rotate_left(1)
                    ^ checksum_f64(c.channel(2)).rotate_left(2)
            }
            Working::Gray(g) => checksum_f64(g.values()),
        }
    }

    /// Grayscale conversion happens right after white balancing (or at the
    /// very start when WB is absent), since every other stage is gray-only.
    fn to_gray(self) -> GrayRaster {
        match self {
            Working::Color(c) => to_grayscale(&c),
            Working::Gray(g) => g,
        }
    }
}

/// Run the configured stage sequence and the Canny detector, recording a
/// per-stage trace.
pub fn run_pipeline(img: &ColorRaster, cfg: &PipelineConfig) -> Result<(EdgeMap, PipelineTrace)> {
    cfg.validate()?;
    let mut trace = PipelineTrace::default();
    let mut working = Working::Color(img.clone());

    for stage in cfg.enabled_stages() {
        let start = Instant::now();
        let input_checksum = working.checksum();
        let mut applied = true;
        let mut skew_ratio = None;
        let mut sparse_fraction = None;

        working = match stage {
            Stage::WhiteBalance => {
                let Working::Color(color) = working else {
                    // unreachable by construction: WB is validated to be first
                    return Err(Error::InvalidConfig("white balance after grayscale".into()));
                };
                let (balanced, ok) = white_balance(&color);
                applied = ok;
                // grayscale for the remainder of the pipeline
                Working::Gray(to_grayscale(&balanced))
            }
            Stage::AnisotropicDiffusion => {
                let gray = working.to_gray();
                Working::Gray(anisotropic_diffusion(&gray, &cfg.diffusion).map_err(|e| e.at_stage(stage))?)
            }
            Stage::ContrastNormalization => {
                let gray = working.to_gray();
                let force = cfg.force_conditionals || cfg.forced_stages.contains(&stage);
                let out = conditional_contrast_normalization(&gray, &cfg.triggers, force);
                applied = out.applied;
                skew_ratio = Some(out.skew_ratio);
                Working::Gray(out.image)
            }
            Stage::FuzzyHyperbolization => {
                let gray = working.to_gray();
                Working::Gray(fuzzy_histogram_hyperbolization(&gray, cfg.fhh_buckets))
            }
            Stage::MedianBlur => Working::Gray(median_blur(&working.to_gray())),
            Stage::GaussianBlur => Working::Gray(gaussian_blur(&working.to_gray())),
            Stage::ConditionalBlur => {
                let gray = working.to_gray();
                let force = cfg.force_conditionals || cfg.forced_stages.contains(&stage);
                let out = conditional_gaussian_blur(&gray, &cfg.triggers, force);
                applied = out.applied;
                sparse_fraction = Some(out.sparse_fraction);
                Working::Gray(out.image)
            }
        };

        trace.stages.push(StageTrace {
            stage: TraceStage::Stage(stage),
            applied,
            millis: start.elapsed().as_secs_f64() * 1e3,
            input_checksum,
            output_checksum: working.checksum(),
            skew_ratio,
            sparse_fraction,
        });
    }

    let gray = working.to_gray();
    let start = Instant::now();
    let input_checksum = checksum_f64(gray.values());
    let edges = canny_detect(&gray, &cfg.canny)?;
    trace.stages.push(StageTrace {
        stage: TraceStage::Canny,
        applied: true,
        millis: start.elapsed().as_secs_f64() * 1e3,
        input_checksum,
        output_checksum: checksum_f64(&edges.values().iter().map(|&v| v as f64).collect::<Vec<_>>()),
        skew_ratio: None,
        sparse_fraction: None,
    });
    Ok((edges, trace))
}

/// One annotated image of an evaluation corpus.
#[derive(Debug, Clone)]
pub struct CorpusItem {
    pub image: ColorRaster,
    pub truth: EdgeMap,
}

/// Run the pipeline over a corpus and average the SSIM-based scores.
pub fn evaluate_with_config(corpus: &[CorpusItem], cfg: &PipelineConfig) -> Result<ScorePair> {
    let mut pairs = Vec::with_capacity(corpus.len());
    for item in corpus {
        let (edges, _) = run_pipeline(&item.image, cfg)?;
        pairs.push((edges, item.truth.clone()));
    }
    evaluate_corpus(&pairs)
}

/// Score the corpus with one stage removed from the base configuration.
pub fn run_ablation(corpus: &[CorpusItem], base: &PipelineConfig, stage: Stage) -> Result<ScorePair> {
    if !base.stage_order.contains(&stage) {
        return Err(Error::UnknownStage(format!(
            "{stage} is not part of the configured order"
        )));
    }
    evaluate_with_config(corpus, &base.without_stage(stage))
}

/// Score the corpus under each candidate stage order. Conditional stages
/// re-evaluate their triggers at their new positions.
pub fn run_order_study(
    corpus: &[CorpusItem],
    base: &PipelineConfig,
    orders: &[Vec<Stage>],
) -> Result<Vec<(Vec<Stage>, ScorePair)>> {
    let mut rows = Vec::with_capacity(orders.len());
    for order in orders {
        if order.first() != Some(&Stage::WhiteBalance) {
            return Err(Error::InvalidConfig(format!(
                "order {} must start with WB",
                order.iter().map(|s| s.abbrev()).collect::<Vec<_>>().join("-")
            )));
        }
        let score = evaluate_with_config(corpus, &base.with_order(order.clone()))?;
        rows.push((order.clone(), score));
    }
    Ok(rows)
}
