//! One-call analysis pipeline: note table in, full report out.

use crate::harmony::{analyze_blocks_harmony, ChordCatalog};
use crate::ingest::{NoteTable, SmfStats};
use crate::report::{AnalysisReport, Diagnostics, MelodicAnalysis};
use crate::rhythm::polyrhythm_report;
use crate::segmentation::{
    extract_channel_melody, segment_by_feasibility, segment_by_gaps, simultaneity_blocks,
    MelodySegment, SegmentLabel, SegmentationError,
};
use crate::tonality::{
    classify_scale_fixed_tonic, profile_score, tonal_centre_most_frequent,
    tonal_centre_most_played, ModeSelection, ScoredCandidate, TonalCentreMethod, MODE_CATALOG,
};

/// Errors from assembling an analysis.
#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    /// Segmentation rejected its parameters.
    #[error(transparent)]
    Segmentation(#[from] SegmentationError),
    /// Relative tolerance outside [0, 1).
    #[error("relative tolerance must lie in [0, 1), got {0}")]
    InvalidTolerance(f64),
}

/// Tunable knobs of one analysis run.
#[derive(Clone, Debug)]
pub struct AnalysisOptions {
    /// Channel carrying the predominant melody.
    pub melody_channel: u8,
    /// Channel carrying the secondary melody.
    pub secondary_channel: u8,
    /// Tonal-centre strategy for segment labels.
    pub method: TonalCentreMethod,
    /// When set, segment by silence gaps of this many seconds instead of by
    /// feasibility.
    pub gap_threshold: Option<f64>,
    /// Chord templates; `None` uses the built-in catalog.
    pub chord_catalog: Option<ChordCatalog>,
    /// Relative tolerance for rhythmic figure quantization.
    pub rel_tol: f64,
    /// Seed for the fixed-tonic methods' random mode pick; `None` picks the
    /// first feasible mode in catalog order.
    pub seed: Option<u64>,
    /// Minimum overlap (seconds) for two notes to count as simultaneous.
    pub overlap_eps: f64,
}

impl Default for AnalysisOptions {
    fn default() -> AnalysisOptions {
        AnalysisOptions {
            melody_channel: 5,
            secondary_channel: 4,
            method: TonalCentreMethod::Profiles,
            gap_threshold: None,
            chord_catalog: None,
            rel_tol: 0.10,
            seed: None,
            overlap_eps: 0.0,
        }
    }
}

impl AnalysisOptions {
    fn selection(&self) -> ModeSelection {
        match self.seed {
            Some(seed) => ModeSelection::SeededRandom(seed),
            None => ModeSelection::First,
        }
    }
}

/// Runs the full pipeline on a table with no ingest diagnostics to carry.
pub fn analyze_table(
    table: &NoteTable,
    opts: &AnalysisOptions,
) -> Result<AnalysisReport, PipelineError> {
    analyze_with_stats(
        table,
        &SmfStats {
            dangling_notes: 0,
            zero_length_notes: 0,
        },
        opts,
    )
}

/// Runs the full pipeline, carrying ingest repair counters into the report.
pub fn analyze_with_stats(
    table: &NoteTable,
    stats: &SmfStats,
    opts: &AnalysisOptions,
) -> Result<AnalysisReport, PipelineError> {
    if !opts.rel_tol.is_finite() || !(0.0..1.0).contains(&opts.rel_tol) {
        return Err(PipelineError::InvalidTolerance(opts.rel_tol));
    }

    let mut melodic = vec![analyze_channel(table, opts.melody_channel, opts)?];
    if opts.secondary_channel != opts.melody_channel {
        melodic.push(analyze_channel(table, opts.secondary_channel, opts)?);
    }

    let blocks = simultaneity_blocks(table, opts.overlap_eps);
    let default_catalog;
    let catalog = match &opts.chord_catalog {
        Some(c) => c,
        None => {
            default_catalog = ChordCatalog::default_catalog();
            default_catalog
        }
    };
    let (harmonic, no_match_chords) = analyze_blocks_harmony(&blocks, catalog);
    let (rhythmic, inexact_figures) = polyrhythm_report(&blocks, opts.rel_tol);

    Ok(AnalysisReport {
        source: table.source.clone(),
        melodic,
        harmonic,
        rhythmic,
        diagnostics: Diagnostics {
            dangling_notes: stats.dangling_notes,
            zero_length_notes: stats.zero_length_notes,
            no_match_chords,
            inexact_figures,
        },
    })
}

fn analyze_channel(
    table: &NoteTable,
    channel: u8,
    opts: &AnalysisOptions,
) -> Result<MelodicAnalysis, SegmentationError> {
    let melody = extract_channel_melody(table, channel);
    let mut segments: Vec<MelodySegment> = if melody.is_empty() {
        Vec::new()
    } else {
        match opts.gap_threshold {
            Some(threshold) => {
                let mut segments = segment_by_gaps(&melody, threshold)?;
                if opts.method == TonalCentreMethod::Profiles {
                    for seg in &mut segments {
                        seg.label_with_profiles(&MODE_CATALOG);
                    }
                }
                segments
            }
            None => segment_by_feasibility(&melody)?,
        }
    };
    if opts.method != TonalCentreMethod::Profiles {
        for seg in &mut segments {
            relabel_fixed_tonic(seg, opts.method, opts.selection());
        }
    }
    Ok(MelodicAnalysis {
        channel,
        method: opts.method,
        segments,
    })
}

/// Replaces a segment's label using a fixed-tonic strategy. The candidate
/// list empties: fixed-tonic trials never enumerate pairs.
fn relabel_fixed_tonic(
    seg: &mut MelodySegment,
    method: TonalCentreMethod,
    selection: ModeSelection,
) {
    let tonic = match method {
        TonalCentreMethod::MostPlayed => tonal_centre_most_played(&seg.notes),
        TonalCentreMethod::MostFrequent => tonal_centre_most_frequent(&seg.notes),
        TonalCentreMethod::Profiles => unreachable!("profiles labels via candidates"),
    }
    .expect("segments hold at least one note");
    seg.candidates.clear();
    seg.chosen = Some(match classify_scale_fixed_tonic(&seg.notes, tonic, selection) {
        Some(mode) => {
            let score =
                profile_score(&seg.notes, tonic, mode).expect("classified mode contains segment");
            SegmentLabel::Chosen(ScoredCandidate { tonic, mode, score })
        }
        None => SegmentLabel::NotKnownMode { tonic: Some(tonic) },
    });
}
