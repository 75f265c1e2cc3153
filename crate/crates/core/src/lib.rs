//! Satellite-image edge detection without deep networks: a seven-stage
//! pre-processing pipeline (white balance, anisotropic diffusion,
//! conditional contrast normalization, fuzzy histogram hyperbolization,
//! median blur, Gaussian blur, conditional Gaussian blur) feeding a Canny
//! detector, plus an SSIM-based true/false-positive evaluation metric.

pub mod canny;
pub mod error;
pub mod eval;
pub mod filters;
pub mod io;
pub mod pipeline;
pub mod raster;

pub use canny::{canny_detect, noise_estimate, AutoMode, CannyParams};
pub use error::{Error, Result};
pub use eval::{
    evaluate_corpus, fp_score, matching_map, parse_annotations, rasterize_ground_truth,
    score_prediction, ssim_map, tp_score, PolygonAnnotation, ScorePair, SsimMap, SsimParams,
};
pub use filters::{
    anisotropic_diffusion, conditional_contrast_normalization, conditional_gaussian_blur,
    fuzzy_histogram_hyperbolization, gaussian_blur, median_blur, white_balance,
    ConditionalTriggerParams, DiffusionParams, KMode,
};
pub use pipeline::{
    parse_stage_order, run_ablation, run_order_study, run_pipeline, CorpusItem, PipelineConfig,
    PipelineTrace, Stage, StageTrace, TraceStage,
};
pub use raster::{
    border_extend, histogram, to_grayscale, ColorRaster, EdgeMap, GrayRaster, IntensityHistogram,
};
