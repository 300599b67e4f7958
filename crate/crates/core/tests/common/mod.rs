//! Shared fixtures and brute-force oracles for the integration suites.
//!
//! Oracle code deliberately avoids the library's machinery: reference tables
//! are transcribed separately, sets are plain `Vec<u8>` with loop-based
//! membership, and scales are built by modular addition. When an oracle and
//! the library disagree, the oracle is the bar.

#![allow(dead_code)] // each test binary uses its own subset

use modus::ingest::NoteEvent;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

// ---------------------------------------------------------------------------
// Frozen reference tables

/// Mode table: name, full interval list (offset 0 spelled out), weights.
pub const REF_MODES: [(&str, &[u8], &[u8]); 11] = [
    ("ionian_major", &[0, 2, 4, 5, 7, 9, 11], &[5, 1, 3, 5, 5, 3, 1]),
    ("dorian", &[0, 2, 3, 5, 7, 9, 10], &[5, 1, 3, 3, 5, 1, 5]),
    ("phrygian", &[0, 1, 3, 5, 7, 8, 10], &[5, 5, 3, 1, 5, 3, 1]),
    ("lydian", &[0, 2, 4, 6, 7, 9, 11], &[5, 5, 1, 3, 5, 1, 3]),
    ("mixolydian", &[0, 2, 4, 5, 7, 9, 10], &[5, 1, 1, 5, 3, 3, 5]),
    ("aeolian", &[0, 2, 3, 5, 7, 8, 10], &[5, 1, 5, 1, 3, 5, 3]),
    ("minor", &[0, 2, 3, 5, 7, 8, 10], &[5, 1, 5, 1, 3, 5, 3]),
    ("locrian", &[0, 1, 3, 5, 6, 8, 10], &[5, 5, 1, 3, 5, 1, 3]),
    ("whole_tone", &[0, 2, 4, 6, 8, 10], &[3, 1, 1, 5, 5, 5]),
    ("octatonic1", &[0, 1, 3, 4, 6, 7, 9, 10], &[3, 1, 5, 1, 5, 5, 1, 1]),
    ("octatonic2", &[0, 2, 3, 5, 6, 8, 9, 11], &[1, 5, 5, 1, 5, 1, 1, 3]),
];

/// Chord templates: label, offsets above the fundamental (0 implied), in
/// catalog order.
pub const REF_CHORDS: [(&str, &[u8]); 22] = [
    ("m2", &[1]),
    ("M2", &[2]),
    ("m3", &[3]),
    ("M3", &[4]),
    ("P4", &[5]),
    ("A4", &[6]),
    ("P5", &[7]),
    ("m6", &[8]),
    ("M6", &[9]),
    ("m7", &[10]),
    ("M7", &[11]),
    ("perfectmajor", &[4, 7]),
    ("perfectminor", &[3, 7]),
    ("diminished", &[3, 6]),
    ("augmented", &[4, 8]),
    ("dom7", &[4, 7, 10]),
    ("maj7", &[4, 7, 11]),
    ("min7", &[3, 7, 10]),
    ("halfdim7", &[3, 6, 10]),
    ("9th", &[2, 4, 7, 10]),
    ("11th", &[2, 4, 5, 7, 10]),
    ("13th", &[2, 4, 5, 7, 9, 10]),
];

// ---------------------------------------------------------------------------
// Brute-force oracles

/// All 132 (tonic, mode) pairs in canonical order whose rooted scale contains
/// every given pitch class.
pub fn oracle_candidates(pitch_classes: &[u8]) -> Vec<(u8, usize)> {
    let mut out = Vec::new();
    for tonic in 0u8..12 {
        for (mode_idx, (_, intervals, _)) in REF_MODES.iter().enumerate() {
            let scale: Vec<u8> = intervals.iter().map(|i| (tonic + i) % 12).collect();
            if pitch_classes.iter().all(|pc| scale.contains(&(pc % 12))) {
                out.push((tonic, mode_idx));
            }
        }
    }
    out
}

/// Degree-weight sum over note occurrences; `None` when a pitch class falls
/// outside the rooted scale.
pub fn oracle_profile_score(note_pcs: &[u8], tonic: u8, mode_idx: usize) -> Option<u32> {
    let (_, intervals, weights) = REF_MODES[mode_idx];
    let mut total = 0u32;
    for &pc in note_pcs {
        let offset = (12 + pc % 12 - tonic % 12) % 12;
        let degree = intervals.iter().position(|&i| i == offset)?;
        total += u32::from(weights[degree]);
    }
    Some(total)
}

/// Minimal-superset chord search: smallest template first, then catalog
/// order, then lowest root.
pub fn oracle_chord_label(pitch_classes: &[u8]) -> Option<(u8, &'static str)> {
    let mut distinct: Vec<u8> = pitch_classes.iter().map(|p| p % 12).collect();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() < 2 {
        return None;
    }
    let mut best: Option<(usize, usize, u8)> = None;
    for &root in &distinct {
        for (pos, (_, intervals)) in REF_CHORDS.iter().enumerate() {
            let covered = distinct.iter().all(|&pc| {
                let off = (12 + pc - root) % 12;
                off == 0 || intervals.contains(&off)
            });
            if covered {
                let key = (intervals.len(), pos, root);
                if best.is_none() || key < best.unwrap() {
                    best = Some(key);
                }
            }
        }
    }
    best.map(|(_, pos, root)| (root, REF_CHORDS[pos].0))
}

// ---------------------------------------------------------------------------
// Standard MIDI File builder

fn vlq(mut value: u32) -> Vec<u8> {
    let mut out = vec![(value & 0x7F) as u8];
    value >>= 7;
    while value > 0 {
        out.push((value & 0x7F) as u8 | 0x80);
        value >>= 7;
    }
    out.reverse();
    out
}

/// One note destined for a track.
#[derive(Clone, Copy)]
pub struct SmfNote {
    pub channel: u8,
    pub pitch: u8,
    pub velocity: u8,
    pub onset_beats: f64,
    pub duration_beats: f64,
}

fn track_chunk(mut events: Vec<(u32, u8, Vec<u8>)>) -> Vec<u8> {
    // order key: offs (0) before ons (1) at equal ticks, so FIFO pairing of
    // back-to-back repeats of one pitch works.
    events.sort_by_key(|(tick, order, _)| (*tick, *order));
    let mut body = Vec::new();
    let mut cursor = 0u32;
    for (tick, _, payload) in &events {
        body.extend(vlq(tick - cursor));
        body.extend(payload);
        cursor = *tick;
    }
    body.extend(vlq(0));
    body.extend([0xFF, 0x2F, 0x00]); // end of track
    let mut chunk = b"MTrk".to_vec();
    chunk.extend((body.len() as u32).to_be_bytes());
    chunk.extend(body);
    chunk
}

/// Builds a format-1 file: a tempo track (one set-tempo per `(tick, µs)`
/// entry) followed by one track per note list.
pub fn smf_bytes(division: u16, tempos: &[(u32, u32)], tracks: &[Vec<SmfNote>]) -> Vec<u8> {
    let ntracks = (tracks.len() + 1) as u16;
    let mut out = b"MThd".to_vec();
    out.extend(6u32.to_be_bytes());
    out.extend(1u16.to_be_bytes());
    out.extend(ntracks.to_be_bytes());
    out.extend(division.to_be_bytes());

    let tempo_events: Vec<(u32, u8, Vec<u8>)> = tempos
        .iter()
        .map(|&(tick, us)| {
            let [_, b2, b1, b0] = us.to_be_bytes();
            (tick, 1, vec![0xFF, 0x51, 0x03, b2, b1, b0])
        })
        .collect();
    out.extend(track_chunk(tempo_events));

    for notes in tracks {
        let mut events = Vec::with_capacity(notes.len() * 2);
        for n in notes {
            let on = (n.onset_beats * f64::from(division)).round() as u32;
            let off = ((n.onset_beats + n.duration_beats) * f64::from(division)).round() as u32;
            events.push((on, 1, vec![0x90 | n.channel, n.pitch, n.velocity]));
            events.push((off, 0, vec![0x80 | n.channel, n.pitch, 0]));
        }
        out.extend(track_chunk(events));
    }
    out
}

// ---------------------------------------------------------------------------
// The bundled two-channel demo fixture

/// Bytes of `data/two_channel_demo.mid`: an A-aeolian melody on channel 5
/// over dyad accompaniment on channel 4, 12 beats at 120 BPM.
pub fn demo_fixture_bytes() -> Vec<u8> {
    let melody: [(f64, f64, u8); 13] = [
        (0.0, 1.0, 69),
        (1.0, 1.0, 71),
        (2.0, 1.0, 72),
        (3.0, 1.0, 74),
        (4.0, 1.0, 76),
        (5.0, 1.0, 77),
        (6.0, 1.0, 79),
        (7.0, 1.0, 81),
        (8.0, 0.5, 77),
        (8.5, 0.5, 76),
        (9.0, 0.5, 77),
        (9.5, 0.5, 76),
        (10.0, 2.0, 69),
    ];
    let accompaniment: [(f64, &[u8]); 6] = [
        (0.0, &[57, 62]),
        (2.0, &[55, 62]),
        (4.0, &[57, 64]),
        (6.0, &[52, 59]),
        (8.0, &[57, 62]),
        (10.0, &[55, 60, 64]),
    ];

    let ch5: Vec<SmfNote> = melody
        .iter()
        .map(|&(onset_beats, duration_beats, pitch)| SmfNote {
            channel: 5,
            pitch,
            velocity: 96,
            onset_beats,
            duration_beats,
        })
        .collect();
    let ch4: Vec<SmfNote> = accompaniment
        .iter()
        .flat_map(|&(onset_beats, pitches)| {
            pitches.iter().map(move |&pitch| SmfNote {
                channel: 4,
                pitch,
                velocity: 80,
                onset_beats,
                duration_beats: 2.0,
            })
        })
        .collect();

    smf_bytes(480, &[(0, 500_000)], &[ch5, ch4])
}

// ---------------------------------------------------------------------------
// Random inputs

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A contiguous melody on channel 5 with catalog-friendly durations.
pub fn random_melody(rng: &mut ChaCha8Rng, len: usize) -> Vec<NoteEvent> {
    let durations = [0.25, 1.0 / 3.0, 0.5, 1.0, 2.0];
    let mut notes = Vec::with_capacity(len);
    let mut onset = 0.0f64;
    for _ in 0..len {
        let duration = durations[rng.random_range(0..durations.len())];
        notes.push(NoteEvent {
            onset_beats: onset,
            duration_beats: duration,
            channel: 5,
            pitch: rng.random_range(36..=96),
            velocity: 80,
            onset_sec: onset * 0.5,
            duration_sec: duration * 0.5,
        });
        onset += duration;
    }
    notes
}

/// Random distinct pitch classes, any size in `0..=12`.
pub fn random_pitch_class_set(rng: &mut ChaCha8Rng) -> Vec<u8> {
    let size = rng.random_range(0..=12usize);
    let mut classes: Vec<u8> = (0..12).collect();
    // Fisher-Yates prefix shuffle.
    for i in 0..size {
        let j = rng.random_range(i..12);
        classes.swap(i, j);
    }
    let mut chosen = classes[..size].to_vec();
    chosen.sort_unstable();
    chosen
}
