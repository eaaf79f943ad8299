//! Randomized meetings per room class.
//!
//! People sit along both long sides of a table that runs away from the
//! camera, plus a few seats at the far end. Turns last 2–6 s; most follow
//! each other closely, some leave a pause long enough for the global view.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::scenario::{Noise, Participant, RoomClass, RoomDims, RoomScenario, Sensors, SpeechSegment, Table};
use super::seed_mix;
use crate::error::Result;

#[derive(Debug, Clone, PartialEq)]
pub struct PresetOptions {
    pub duration: f64,
    pub fps: f64,
    pub snr_db: f64,
    pub distractor_rate: f64,
    pub motion: (f64, f64),
    pub visual: (f64, f64),
    /// Fixed headcount; drawn from the class range when `None`.
    pub headcount: Option<usize>,
}

impl Default for PresetOptions {
    fn default() -> Self {
        Self {
            duration: 60.0,
            fps: 20.0,
            snr_db: 20.0,
            distractor_rate: 0.05,
            motion: (0.001, 0.004),
            visual: (0.6, 1.0),
            headcount: None,
        }
    }
}

struct Layout {
    room: RoomDims,
    half_width: f64,
    y: (f64, f64),
    per_side: usize,
    at_end: usize,
    headcount: (usize, usize),
}

fn layout(class: RoomClass) -> Layout {
    match class {
        RoomClass::Small => Layout {
            room: RoomDims { width: 4.0, depth: 5.0, height: 2.8 },
            half_width: 0.5,
            y: (1.2, 2.6),
            per_side: 2,
            at_end: 2,
            headcount: (3, 6),
        },
        RoomClass::Medium => Layout {
            room: RoomDims { width: 6.0, depth: 8.0, height: 3.0 },
            half_width: 0.7,
            y: (1.2, 5.4),
            per_side: 7,
            at_end: 2,
            headcount: (7, 16),
        },
        RoomClass::Large => Layout {
            room: RoomDims { width: 8.0, depth: 12.0, height: 3.2 },
            half_width: 1.0,
            y: (1.2, 7.6),
            per_side: 8,
            at_end: 4,
            headcount: (17, 20),
        },
    }
}

fn seats(l: &Layout) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    let x = l.half_width + 0.4;
    let step = (l.y.1 - l.y.0 - 0.6) / (l.per_side - 1) as f64;
    for i in 0..l.per_side {
        let y = l.y.0 + 0.3 + i as f64 * step;
        out.push((-x, y));
        out.push((x, y));
    }
    let w = 2.0 * l.half_width / l.at_end as f64;
    for j in 0..l.at_end {
        out.push((-l.half_width + (j as f64 + 0.5) * w, l.y.1 + 0.4));
    }
    out
}

fn round_ms(t: f64) -> f64 {
    (t * 1000.0).round() / 1000.0
}

/// A random meeting of the given class.
pub fn generate_scenario(class: RoomClass, seed: u64, opts: &PresetOptions) -> Result<RoomScenario> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed_mix(seed, 0x9E5E_7000 + class as u64));
    let l = layout(class);
    let mut all = seats(&l);
    all.shuffle(&mut rng);
    let n = opts.headcount.unwrap_or_else(|| rng.random_range(l.headcount.0..=l.headcount.1)).min(all.len());
    let mut chosen: Vec<(f64, f64)> = all[..n].to_vec();
    // Seat order from left to right keeps participant ids readable.
    chosen.sort_by(|a, b| a.0.atan2(a.1).total_cmp(&b.0.atan2(b.1)));
    let participant: Vec<Participant> = chosen
        .iter()
        .map(|&(x, y)| Participant {
            position: [round_ms(x), round_ms(y), round_ms(rng.random_range(1.15..1.3))],
            head_size: round_ms(rng.random_range(0.2..0.24)),
            motion: round_ms(rng.random_range(opts.motion.0..=opts.motion.1) * 1000.0) / 1000.0,
            visual: round_ms(rng.random_range(opts.visual.0..=opts.visual.1)),
        })
        .collect();

    let mut speech = Vec::new();
    if n > 0 {
        let mut t = round_ms(rng.random_range(0.5..1.5));
        let mut prev: Option<usize> = None;
        while t < opts.duration - 1.0 {
            let who = loop {
                let c = rng.random_range(0..n);
                if n == 1 || Some(c) != prev {
                    break c;
                }
            };
            let end = round_ms((t + rng.random_range(2.0..6.0)).min(opts.duration));
            speech.push(SpeechSegment { participant: who, start: t, end });
            prev = Some(who);
            let r: f64 = rng.random();
            let gap = if r < 0.5 {
                0.0
            } else if r < 0.9 {
                rng.random_range(0.2..1.0)
            } else {
                rng.random_range(5.5..7.0)
            };
            t = round_ms(end + gap);
        }
    }

    let table = Table {
        height: round_ms(rng.random_range(0.72..0.78)),
        x_min: -l.half_width,
        x_max: l.half_width,
        y_min: l.y.0,
        y_max: l.y.1,
    };
    let s = RoomScenario {
        name: format!("{}-{seed:02}", class.as_str()),
        class: Some(class),
        duration: opts.duration,
        fps: opts.fps,
        seed,
        room: l.room,
        sensors: Sensors::default(),
        noise: Noise { snr_db: opts.snr_db, distractor_rate: opts.distractor_rate, ..Noise::default() },
        table: Some(table),
        participant,
        speech,
    };
    RoomScenario::parse(&s.to_canonical())
}

/// The evaluation suite: four meetings per room class.
pub fn suite(opts: &PresetOptions) -> Result<Vec<RoomScenario>> {
    let mut out = Vec::new();
    for class in RoomClass::ALL {
        for i in 0..4 {
            out.push(generate_scenario(class, i, opts)?);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classes_match_headcount() {
        for class in RoomClass::ALL {
            for seed in 0..6 {
                let s = generate_scenario(class, seed, &PresetOptions::default()).unwrap();
                assert_eq!(RoomClass::for_headcount(s.participant.len()), class);
                assert!(!s.speech.is_empty());
            }
        }
    }

    #[test]
    fn deterministic() {
        let o = PresetOptions::default();
        assert_eq!(generate_scenario(RoomClass::Medium, 3, &o).unwrap(), generate_scenario(RoomClass::Medium, 3, &o).unwrap());
    }
}
