//! Video and depth features: Haar-like responses, short/long-range motion,
//! hole-filled depth, table extent and depth-derived zoom.

mod depth;
mod frame;
mod haar;
mod integral;
mod motion;

pub use depth::{estimate_table, normalize_depth, zoom_from_depth, TableExtent, HOLE_FILL_PASSES};
pub use frame::{is_valid_depth, DepthFrame, VideoFrame, DEPTH_MAX_M, DEPTH_MIN_M};
pub use haar::{default_bank, haar_features, HaarFeature, HaarKind};
pub use integral::{integral_image, quantize, IntegralImage, FIXED_POINT_BITS};
pub use motion::{abs_diff_map, motion_features, BackgroundModel, MotionFeatures, BACKGROUND_WEIGHT_5FPS};
