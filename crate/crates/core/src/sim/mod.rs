//! Synthetic meetings: scenario files, sensor synthesis and ground truth.

mod audio;
mod presets;
mod render;
mod scenario;
mod truth;

pub use audio::{distractor_events, far_field_frame, synthesize_audio, synthesize_audio_with, DistractorEvent, SPEECH_RMS};
pub use presets::{generate_scenario, suite, PresetOptions};
pub use render::{head_box, head_position, render_depth_frame, render_video_frame, BACKGROUND_INTENSITY};
pub use scenario::{
    parse_scenario, Noise, Participant, RoomClass, RoomDims, RoomScenario, Sensors, SpeechSegment, Table,
};
pub use truth::{ground_truth, GroundTruthFrame, ParticipantTruth};

/// Mixes two words into a well-spread seed (splitmix64 finalizer).
pub(crate) fn seed_mix(a: u64, b: u64) -> u64 {
    let mut z = a ^ b.wrapping_mul(0x9E37_79B9_7F4A_7C15).rotate_left(17);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
