//! Virtual cinematographer: turns speaker decisions into crop windows.

mod crop;
mod latency;
mod state;

pub use crop::{crop_for_target, crop_size, CropWindow};
pub use latency::{measure_decision_latency, percentile, CutEvent, LatencyStats, SpeakerChange};
pub use state::{vc_step, Target, VcInput, VcMode, VcParams, VcState};

/// One emitted framing decision.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecisionRecord {
    pub timestamp: f64,
    pub mode: VcMode,
    pub target: Option<usize>,
    pub crop: CropWindow,
}
