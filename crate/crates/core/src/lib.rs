//! Dataset synthesis and evaluation toolkit for egocentric arm segmentation.
//!
//! The pipeline mirrors how a chroma-key arm dataset is produced and scored:
//!
//! 1. [`chroma`] turns green-screen frames into groundtruth masks and masked
//!    foregrounds;
//! 2. [`compositor`] pastes those foregrounds onto square natural
//!    backgrounds and writes a manifest;
//! 3. [`segmenters`] holds the color and depth baselines plus the loader for
//!    external model predictions;
//! 4. [`metrics`] scores predictions with arm-class IoU and miss rate.
//!
//! Every operation is a pure function over immutable rasters, so callers can
//! parallelize per image freely.

pub mod chroma;
pub mod color;
pub mod components;
pub mod compositor;
mod error;
pub mod io;
pub mod metrics;
pub mod morph;
pub mod raster;
pub mod resize;
pub mod segmenters;

pub use chroma::{
    chroma_mask, extract_groundtruth, mask_foreground, qc_screen, select_frames, BandMode,
    ChromaThresholds, QcConfig, QcRule, QcVerdict,
};
pub use color::{hsv_to_rgb, rgb_to_hsv, HsvPixel};
pub use components::{connected_components, BoundingBox, Component};
pub use compositor::{
    build_dataset, composite, prepare_backgrounds, BackgroundPool, BuildReport, CaptureMetadata,
    CompositeConfig, SampleManifest,
};
pub use error::{Error, Result};
pub use metrics::{
    aggregate, confusion, heatmap, iou_arm, miss_rate, report, ConfusionCounts, Heatmap,
    MetricRecord, MetricSummary, ReportFormat,
};
pub use morph::{morph_clean, MorphConfig};
pub use raster::{BinaryMask, DepthImage, RgbImage};
pub use resize::{resize_image, resize_mask, ResizeMode};
pub use segmenters::{
    depth_segment, load_prediction_mask, skin_segment, DepthBand, SegmenterConfig, SkinBand,
};

/// 8-bit mask values at or above this load as foreground.
pub const MASK_THRESHOLD: u8 = 128;
