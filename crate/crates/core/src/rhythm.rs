//! Duration quantization into rhythmic figures and polyrhythm detection.
//!
//! Durations are classified in beats against a fixed nominal catalog
//! (whole note down to triplet sixteenth). Anything shorter than a triplet
//! sixteenth — minus the tolerance — is a "16th flourish". A simultaneity
//! block is polyrhythmic when its channels articulate different figure
//! multisets.

use std::fmt;

use crate::segmentation::SimultaneityBlock;

/// Errors from figure classification.
#[derive(Debug, thiserror::Error)]
pub enum RhythmError {
    /// Durations must be positive and finite.
    #[error("duration must be a positive number of beats, got {0}")]
    NonPositiveDuration(f64),
}

/// The rhythmic figure classes.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum FigureLabel {
    /// 4 beats.
    WholeNote,
    /// 2 beats.
    HalfNote,
    /// 4/3 beats (half-note triplet member).
    TripletHalf,
    /// 1 beat.
    QuarterNote,
    /// 2/3 beats.
    TripletQuarter,
    /// 1/2 beat.
    EighthNote,
    /// 1/3 beat.
    TripletEighth,
    /// 1/4 beat.
    SixteenthNote,
    /// 1/6 beat.
    TripletSixteenth,
    /// Shorter than any catalog figure; no nominal value.
    SixteenthFlourish,
}

impl FigureLabel {
    /// Printed spelling. Note `"16th flourish"` contains a space.
    pub fn as_str(self) -> &'static str {
        match self {
            FigureLabel::WholeNote => "wholenote",
            FigureLabel::HalfNote => "halfnote",
            FigureLabel::TripletHalf => "triplethalf",
            FigureLabel::QuarterNote => "quarternote",
            FigureLabel::TripletQuarter => "triplequarter",
            FigureLabel::EighthNote => "8thnote",
            FigureLabel::TripletEighth => "triple8th",
            FigureLabel::SixteenthNote => "16thnote",
            FigureLabel::TripletSixteenth => "triple16th",
            FigureLabel::SixteenthFlourish => "16th flourish",
        }
    }
}

impl fmt::Display for FigureLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Figures with nominal values, in strictly decreasing nominal order.
/// `SixteenthFlourish` is absent: it has no nominal duration.
pub const FIGURE_NOMINALS: [(FigureLabel, f64); 9] = [
    (FigureLabel::WholeNote, 4.0),
    (FigureLabel::HalfNote, 2.0),
    (FigureLabel::TripletHalf, 4.0 / 3.0),
    (FigureLabel::QuarterNote, 1.0),
    (FigureLabel::TripletQuarter, 2.0 / 3.0),
    (FigureLabel::EighthNote, 0.5),
    (FigureLabel::TripletEighth, 1.0 / 3.0),
    (FigureLabel::SixteenthNote, 0.25),
    (FigureLabel::TripletSixteenth, 1.0 / 6.0),
];

/// The figure catalog rendered as text (nominals shown as beat fractions).
pub fn figure_catalog_text() -> String {
    let fractions = [
        "4", "2", "4/3", "1", "2/3", "1/2", "1/3", "1/4", "1/6",
    ];
    let mut out = String::new();
    out.push_str("# Rhythmic figure catalog: nominal duration in beats per label.\n");
    out.push_str("# Durations below (1/6)*(1 - rel_tol) classify as \"16th flourish\".\n");
    for ((label, _), fraction) in FIGURE_NOMINALS.iter().zip(fractions) {
        out.push_str(&format!("{label} {fraction}\n"));
    }
    out.push_str("16th flourish -\n");
    out
}

/// A classified duration: the label plus whether it sat within tolerance.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct FigureMatch {
    /// Chosen figure.
    pub label: FigureLabel,
    /// False when the duration had to be snapped to the nearest nominal
    /// beyond `rel_tol`. Flourishes are exact by definition.
    pub exact: bool,
}

/// Classifies a duration and reports whether it was within tolerance.
///
/// Durations below `(1/6)·(1 − rel_tol)` are flourishes. Otherwise the
/// nearest nominal by relative error wins; if even the nearest exceeds
/// `rel_tol` the duration still snaps to it, flagged inexact.
pub fn classify_duration(duration_beats: f64, rel_tol: f64) -> Result<FigureMatch, RhythmError> {
    if !duration_beats.is_finite() || duration_beats <= 0.0 {
        return Err(RhythmError::NonPositiveDuration(duration_beats));
    }
    if duration_beats < (1.0 / 6.0) * (1.0 - rel_tol) {
        return Ok(FigureMatch {
            label: FigureLabel::SixteenthFlourish,
            exact: true,
        });
    }
    let mut best = FIGURE_NOMINALS[0].0;
    let mut best_err = f64::INFINITY;
    for (label, nominal) in FIGURE_NOMINALS {
        let err = (duration_beats - nominal).abs() / nominal;
        if err < best_err {
            best = label;
            best_err = err;
        }
    }
    Ok(FigureMatch {
        label: best,
        exact: best_err <= rel_tol,
    })
}

/// The figure label of a duration (see [`classify_duration`]).
pub fn figure_of(duration_beats: f64, rel_tol: f64) -> Result<FigureLabel, RhythmError> {
    classify_duration(duration_beats, rel_tol).map(|m| m.label)
}

/// Per-channel figure content of one simultaneity block.
#[derive(Clone, Debug, PartialEq)]
pub struct RhythmPattern {
    /// Start of the block, seconds.
    pub block_onset_sec: f64,
    /// (channel, figures of its notes in time order), channels ascending.
    pub figures_by_channel: Vec<(u8, Vec<FigureLabel>)>,
    /// True when the channels' figure multisets differ.
    pub polyrhythmic: bool,
}

/// Classifies every note in every block and flags polyrhythms.
///
/// Notes keep their full durations even where the block window clips them.
/// Returns the patterns plus how many durations fell outside `rel_tol` and
/// had to be snapped.
pub fn polyrhythm_report(
    blocks: &[SimultaneityBlock],
    rel_tol: f64,
) -> (Vec<RhythmPattern>, usize) {
    let mut patterns = Vec::with_capacity(blocks.len());
    let mut inexact = 0usize;
    for block in blocks {
        let mut figures_by_channel: Vec<(u8, Vec<FigureLabel>)> = Vec::new();
        for (&channel, notes) in &block.notes_by_channel {
            let mut figures = Vec::with_capacity(notes.len());
            for note in notes {
                // NoteTable guarantees positive durations.
                let m = classify_duration(note.duration_beats, rel_tol)
                    .expect("validated duration");
                if !m.exact {
                    inexact += 1;
                }
                figures.push(m.label);
            }
            figures_by_channel.push((channel, figures));
        }
        let mut multisets: Vec<Vec<FigureLabel>> = figures_by_channel
            .iter()
            .map(|(_, figs)| {
                let mut sorted = figs.clone();
                sorted.sort_unstable();
                sorted
            })
            .collect();
        multisets.dedup();
        let polyrhythmic = multisets.len() > 1;
        patterns.push(RhythmPattern {
            block_onset_sec: block.start_sec,
            figures_by_channel,
            polyrhythmic,
        });
    }
    (patterns, inexact)
}
