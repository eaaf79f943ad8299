use super::render::head_box;
use super::scenario::RoomScenario;
use crate::error::Result;
use crate::geometry::BBox;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParticipantTruth {
    pub id: usize,
    pub bbox: BBox,
    pub azimuth_deg: f64,
    pub depth_m: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruthFrame {
    pub timestamp: f64,
    pub participants: Vec<ParticipantTruth>,
    pub speaker: Option<usize>,
}

impl GroundTruthFrame {
    pub fn participant(&self, id: usize) -> Option<&ParticipantTruth> {
        self.participants.iter().find(|p| p.id == id)
    }

    pub fn speaker_truth(&self) -> Option<&ParticipantTruth> {
        self.speaker.and_then(|s| self.participant(s))
    }
}

pub fn ground_truth(scenario: &RoomScenario, t: f64) -> Result<GroundTruthFrame> {
    scenario.check_time(t)?;
    let cam = scenario.sensors.video_intrinsics()?;
    let participants = scenario
        .participant
        .iter()
        .enumerate()
        .map(|(id, p)| ParticipantTruth {
            id,
            bbox: head_box(scenario, &cam, id, t),
            azimuth_deg: p.azimuth_deg(),
            depth_m: p.position[1],
        })
        .collect();
    Ok(GroundTruthFrame { timestamp: t, participants, speaker: scenario.active_speaker(t) })
}
