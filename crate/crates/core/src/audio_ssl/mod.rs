//! Sound source localization over the linear microphone array and the
//! azimuth-likelihood features derived from it.

mod array;
mod features;
mod pdf;

pub use array::{
    Directivity, MicArrayGeometry, MultichannelAudioFrame, DEFAULT_FRAME_LEN, DEFAULT_SAMPLE_RATE,
    DEFAULT_SPEED_OF_SOUND,
};
pub use features::{
    extract_ssl_features, SslFeatureVector, SslWindowStats, DEFAULT_EPSILON_REL, SSL_FEATURE_COUNT,
};
pub use pdf::{compute_ssl_pdf, AzimuthGrid, SslConfig, SslPdf, SslProcessor};

/// True iff the mean per-channel RMS reaches `threshold_rms`.
pub fn speech_activity_gate(frame: &MultichannelAudioFrame, threshold_rms: f64) -> bool {
    if frame.channel_count() == 0 || frame.is_empty() {
        return false;
    }
    let mean = (0..frame.channel_count()).map(|c| frame.rms(c)).sum::<f64>() / frame.channel_count() as f64;
    mean >= threshold_rms
}

#[cfg(test)]
mod tests;
