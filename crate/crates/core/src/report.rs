//! Report assembly, text/JSON emission, and the reference-agreement metric.
//!
//! Text layouts follow a fixed tabular style: one header line per section,
//! one line per item, onsets printed with exactly four decimals. The JSON
//! document mirrors every printed value (plus beat-time segment bounds, which
//! the agreement metric needs) under a versioned schema.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::harmony::ChordEvent;
use crate::rhythm::RhythmPattern;
use crate::segmentation::{MelodySegment, SegmentLabel};
use crate::tonality::TonalCentreMethod;

/// Version of the JSON report schema.
pub const SCHEMA_VERSION: u32 = 1;

/// Errors from report parsing and the agreement metric.
#[derive(Debug, thiserror::Error)]
pub enum ReportError {
    /// Underlying file I/O failure.
    #[error("i/o error")]
    Io(#[from] std::io::Error),
    /// A malformed annotation line.
    #[error("annotation line {line}: {reason}")]
    BadAnnotationLine {
        /// 1-based line number.
        line: usize,
        /// What was wrong.
        reason: String,
    },
    /// Annotation sections must be contiguous, increasing measure ranges.
    #[error("annotation line {line}: sections must be contiguous and increasing")]
    NonContiguousSections {
        /// 1-based line number.
        line: usize,
    },
    /// A malformed measure-map line.
    #[error("measure map line {line}: {reason}")]
    BadMeasureMapLine {
        /// 1-based line number.
        line: usize,
        /// What was wrong.
        reason: String,
    },
    /// A section start measure missing from the measure map.
    #[error("measure {measure} is not covered by the measure map")]
    UncoveredMeasure {
        /// The unmapped measure number.
        measure: u32,
    },
    /// A report document that does not parse as schema version 1 JSON.
    #[error("bad report json: {0}")]
    BadReportJson(#[from] serde_json::Error),
    /// A report lacking the requested melodic channel.
    #[error("report has no melodic analysis for channel {channel}")]
    MissingChannel {
        /// The channel asked for.
        channel: u8,
    },
}

/// Ingest/analysis repair counters carried alongside the results.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Note-ons with no note-off (durations clamped at ingest).
    pub dangling_notes: usize,
    /// Note pairs dropped at ingest for non-positive duration.
    pub zero_length_notes: usize,
    /// Same-onset groups no chord template matched.
    pub no_match_chords: usize,
    /// Durations snapped to a figure beyond the relative tolerance.
    pub inexact_figures: usize,
}

/// The segments of one channel under one method.
#[derive(Clone, Debug, PartialEq)]
pub struct MelodicAnalysis {
    /// Channel the melody came from.
    pub channel: u8,
    /// Strategy that produced the labels.
    pub method: TonalCentreMethod,
    /// Labeled segments in time order.
    pub segments: Vec<MelodySegment>,
}

/// Everything one analysis run produced.
#[derive(Clone, Debug, PartialEq)]
pub struct AnalysisReport {
    /// Provenance of the input table.
    pub source: String,
    /// Melodic analyses (primary channel first, then secondary).
    pub melodic: Vec<MelodicAnalysis>,
    /// Labeled chord occurrences, sorted by (onset, channel).
    pub harmonic: Vec<ChordEvent>,
    /// Per-block rhythm patterns in block order.
    pub rhythmic: Vec<RhythmPattern>,
    /// Repair counters.
    pub diagnostics: Diagnostics,
}

/// Output encoding.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum ReportFormat {
    /// Fixed-layout text.
    Text,
    /// Pretty-printed JSON, schema version 1.
    Json,
}

/// Which sections to print (text) — JSON always carries all of them.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum ReportSection {
    /// Melodic segment labels only.
    Melodic,
    /// Chord events only.
    Harmonic,
    /// Rhythm patterns only.
    Rhythmic,
    /// Everything.
    All,
}

fn fmt4(x: f64) -> String {
    format!("{x:.4}")
}

/// Renders one melodic analysis as text.
///
/// Fixed-tonic methods print `start end tonic mode` per segment; the
/// profiles method appends the scored candidate list and its weights.
pub fn emit_melodic_report(analysis: &MelodicAnalysis, format: ReportFormat) -> String {
    match format {
        ReportFormat::Text => emit_melodic_text(analysis),
        ReportFormat::Json => {
            serde_json::to_string_pretty(&JsonMelodic::from(analysis)).expect("serializable") + "\n"
        }
    }
}

fn emit_melodic_text(analysis: &MelodicAnalysis) -> String {
    let mut out = String::new();
    match analysis.method {
        TonalCentreMethod::Profiles => {
            out.push_str("Onset time/Scale/Mode/Pair candidates/Respective Weights:\n");
        }
        _ => out.push_str("Onset time/Scale/Mode:\n"),
    }
    for seg in &analysis.segments {
        let (tonic, mode) = match &seg.chosen {
            Some(SegmentLabel::Chosen(c)) => (c.tonic.name().to_string(), c.mode.to_string()),
            Some(SegmentLabel::NotKnownMode { tonic }) => (
                tonic.map_or("-".to_string(), |t| t.name().to_string()),
                "notknownmode".to_string(),
            ),
            None => ("-".to_string(), "unlabeled".to_string()),
        };
        write!(
            out,
            "{} {} {} {}",
            fmt4(seg.start_sec),
            fmt4(seg.end_sec),
            tonic,
            mode
        )
        .unwrap();
        if analysis.method == TonalCentreMethod::Profiles {
            let pairs: Vec<String> = seg
                .candidates
                .iter()
                .map(|c| format!("[{}, {}]", c.tonic.name(), c.mode))
                .collect();
            let weights: Vec<String> =
                seg.candidates.iter().map(|c| c.score.to_string()).collect();
            write!(out, " [{}] [{}]", pairs.join(","), weights.join(",")).unwrap();
        }
        out.push('\n');
    }
    out
}

/// Renders the chord events: `fundamental chord onset channel` per line.
pub fn emit_harmonic_report(events: &[ChordEvent], format: ReportFormat) -> String {
    match format {
        ReportFormat::Text => {
            let mut out = String::from("Fundamental/Chord/Time onset/Midi channel:\n");
            for e in events {
                writeln!(
                    out,
                    "{} {} {} {}",
                    e.fundamental.name(),
                    e.label,
                    fmt4(e.onset_sec),
                    e.channel
                )
                .unwrap();
            }
            out
        }
        ReportFormat::Json => {
            let mirror: Vec<JsonChordEvent> = events.iter().map(JsonChordEvent::from).collect();
            serde_json::to_string_pretty(&mirror).expect("serializable") + "\n"
        }
    }
}

/// Renders the rhythm patterns: `[onset, [figures...]]` per line, channel
/// figure lists flattened in ascending channel order.
pub fn emit_rhythmic_report(patterns: &[RhythmPattern], format: ReportFormat) -> String {
    match format {
        ReportFormat::Text => {
            let mut out = String::from("Event(sec)/Figures-polyrhythm by channel:\n");
            for p in patterns {
                let figures: Vec<&str> = p
                    .figures_by_channel
                    .iter()
                    .flat_map(|(_, figs)| figs.iter().map(|f| f.as_str()))
                    .collect();
                writeln!(out, "[{}, [{}]]", fmt4(p.block_onset_sec), figures.join(", ")).unwrap();
            }
            out
        }
        ReportFormat::Json => {
            let mirror: Vec<JsonRhythmPattern> =
                patterns.iter().map(JsonRhythmPattern::from).collect();
            serde_json::to_string_pretty(&mirror).expect("serializable") + "\n"
        }
    }
}

/// Renders a full report.
///
/// Text output concatenates the requested sections (blank line between);
/// JSON output always carries every section — `section` only selects what
/// text shows.
pub fn render_report(
    report: &AnalysisReport,
    section: ReportSection,
    format: ReportFormat,
) -> String {
    match format {
        ReportFormat::Json => {
            serde_json::to_string_pretty(&JsonReport::from(report)).expect("serializable") + "\n"
        }
        ReportFormat::Text => {
            let mut parts: Vec<String> = Vec::new();
            if matches!(section, ReportSection::Melodic | ReportSection::All) {
                for analysis in &report.melodic {
                    parts.push(emit_melodic_report(analysis, ReportFormat::Text));
                }
            }
            if matches!(section, ReportSection::Harmonic | ReportSection::All) {
                parts.push(emit_harmonic_report(&report.harmonic, ReportFormat::Text));
            }
            if matches!(section, ReportSection::Rhythmic | ReportSection::All) {
                parts.push(emit_rhythmic_report(&report.rhythmic, ReportFormat::Text));
            }
            parts.join("\n")
        }
    }
}

// ---------------------------------------------------------------------------
// JSON schema (version 1)

/// Top-level JSON document.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JsonReport {
    /// Always [`SCHEMA_VERSION`].
    pub schema_version: u32,
    /// Provenance of the input table.
    pub source: String,
    /// Melodic analyses.
    pub melodic: Vec<JsonMelodic>,
    /// Chord events.
    pub harmonic: Vec<JsonChordEvent>,
    /// Rhythm patterns.
    pub rhythmic: Vec<JsonRhythmPattern>,
    /// Repair counters.
    pub diagnostics: Diagnostics,
}

/// One channel's melodic analysis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JsonMelodic {
    /// Source channel.
    pub channel: u8,
    /// Labeling method ("profiles", "most-played", "most-frequent").
    pub method: TonalCentreMethod,
    /// Segments in time order.
    pub segments: Vec<JsonSegment>,
}

/// One melody segment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JsonSegment {
    /// First note onset, seconds.
    pub start_sec: f64,
    /// Last note offset, seconds.
    pub end_sec: f64,
    /// First note onset, beats.
    pub start_beats: f64,
    /// Last note offset, beats.
    pub end_beats: f64,
    /// How many notes the segment holds.
    pub note_count: usize,
    /// Chosen tonic name, or null for an unlabeled/unknown segment.
    pub tonic: Option<String>,
    /// Chosen mode name, or "notknownmode".
    pub mode: String,
    /// Profile score of the chosen pair, when one exists.
    pub score: Option<u32>,
    /// Scored candidates (profiles method only).
    pub candidates: Vec<JsonCandidate>,
}

/// One scored candidate pair.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JsonCandidate {
    /// Tonic name.
    pub tonic: String,
    /// Mode name.
    pub mode: String,
    /// Profile score.
    pub score: u32,
}

/// One chord event.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JsonChordEvent {
    /// Fundamental pitch-class name.
    pub fundamental: String,
    /// Chord label.
    pub chord: String,
    /// Onset, seconds.
    pub onset_sec: f64,
    /// Channel.
    pub channel: u8,
}

/// One rhythm pattern.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JsonRhythmPattern {
    /// Block onset, seconds.
    pub onset_sec: f64,
    /// Whether the channels' figure multisets differ.
    pub polyrhythmic: bool,
    /// Figures per channel, channels ascending.
    pub channels: Vec<JsonChannelFigures>,
}

/// Figures of one channel within a block.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JsonChannelFigures {
    /// Channel number.
    pub channel: u8,
    /// Figure labels of its notes, in time order.
    pub figures: Vec<String>,
}

impl From<&AnalysisReport> for JsonReport {
    fn from(r: &AnalysisReport) -> JsonReport {
        JsonReport {
            schema_version: SCHEMA_VERSION,
            source: r.source.clone(),
            melodic: r.melodic.iter().map(JsonMelodic::from).collect(),
            harmonic: r.harmonic.iter().map(JsonChordEvent::from).collect(),
            rhythmic: r.rhythmic.iter().map(JsonRhythmPattern::from).collect(),
            diagnostics: r.diagnostics,
        }
    }
}

impl From<&MelodicAnalysis> for JsonMelodic {
    fn from(a: &MelodicAnalysis) -> JsonMelodic {
        JsonMelodic {
            channel: a.channel,
            method: a.method,
            segments: a.segments.iter().map(JsonSegment::from).collect(),
        }
    }
}

impl From<&MelodySegment> for JsonSegment {
    fn from(s: &MelodySegment) -> JsonSegment {
        let (tonic, mode, score) = match &s.chosen {
            Some(SegmentLabel::Chosen(c)) => (
                Some(c.tonic.name().to_string()),
                c.mode.to_string(),
                Some(c.score),
            ),
            Some(SegmentLabel::NotKnownMode { tonic }) => (
                tonic.map(|t| t.name().to_string()),
                "notknownmode".to_string(),
                None,
            ),
            None => (None, "unlabeled".to_string(), None),
        };
        JsonSegment {
            start_sec: s.start_sec,
            end_sec: s.end_sec,
            start_beats: s.start_beats(),
            end_beats: s.end_beats(),
            note_count: s.notes.len(),
            tonic,
            mode,
            score,
            candidates: s
                .candidates
                .iter()
                .map(|c| JsonCandidate {
                    tonic: c.tonic.name().to_string(),
                    mode: c.mode.to_string(),
                    score: c.score,
                })
                .collect(),
        }
    }
}

impl From<&ChordEvent> for JsonChordEvent {
    fn from(e: &ChordEvent) -> JsonChordEvent {
        JsonChordEvent {
            fundamental: e.fundamental.name().to_string(),
            chord: e.label.clone(),
            onset_sec: e.onset_sec,
            channel: e.channel,
        }
    }
}

impl From<&RhythmPattern> for JsonRhythmPattern {
    fn from(p: &RhythmPattern) -> JsonRhythmPattern {
        JsonRhythmPattern {
            onset_sec: p.block_onset_sec,
            polyrhythmic: p.polyrhythmic,
            channels: p
                .figures_by_channel
                .iter()
                .map(|(channel, figures)| JsonChannelFigures {
                    channel: *channel,
                    figures: figures.iter().map(|f| f.as_str().to_string()).collect(),
                })
                .collect(),
        }
    }
}

/// Parses a JSON report document (schema version 1).
pub fn parse_report_json(text: &str) -> Result<JsonReport, ReportError> {
    let report: JsonReport = serde_json::from_str(text)?;
    Ok(report)
}

// ---------------------------------------------------------------------------
// Reference annotation and agreement metric

/// A manual sectioning of a piece: ordered (label, start measure, end
/// measure) rows with contiguous, increasing measure ranges.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReferenceAnnotation {
    /// The sections in order.
    pub sections: Vec<(String, u32, u32)>,
}

impl ReferenceAnnotation {
    /// Parses `label start_measure end_measure` lines (`#` comments and
    /// blanks skipped).
    pub fn parse(text: &str) -> Result<ReferenceAnnotation, ReportError> {
        let mut sections: Vec<(String, u32, u32)> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = trimmed.split_whitespace().collect();
            if fields.len() != 3 {
                return Err(ReportError::BadAnnotationLine {
                    line,
                    reason: format!("expected `label start end`, found {} fields", fields.len()),
                });
            }
            let parse_measure = |s: &str| -> Result<u32, ReportError> {
                s.parse().map_err(|_| ReportError::BadAnnotationLine {
                    line,
                    reason: format!("measure {s:?} is not a positive integer"),
                })
            };
            let start = parse_measure(fields[1])?;
            let end = parse_measure(fields[2])?;
            if start == 0 || end < start {
                return Err(ReportError::BadAnnotationLine {
                    line,
                    reason: format!("bad measure range {start}..{end}"),
                });
            }
            if let Some((_, _, prev_end)) = sections.last() {
                if start != prev_end + 1 {
                    return Err(ReportError::NonContiguousSections { line });
                }
            }
            sections.push((fields[0].to_string(), start, end));
        }
        Ok(ReferenceAnnotation { sections })
    }

    /// Reads an annotation file.
    pub fn load(path: &Path) -> Result<ReferenceAnnotation, ReportError> {
        ReferenceAnnotation::parse(&fs::read_to_string(path)?)
    }
}

/// Measure → beat-position lookup: ordered (measure, start_beats) rows,
/// strictly increasing in both columns.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasureMap {
    entries: Vec<(u32, f64)>,
}

impl MeasureMap {
    /// Parses `measure start_beats` lines (`#` comments and blanks skipped).
    pub fn parse(text: &str) -> Result<MeasureMap, ReportError> {
        let mut entries: Vec<(u32, f64)> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = trimmed.split_whitespace().collect();
            if fields.len() != 2 {
                return Err(ReportError::BadMeasureMapLine {
                    line,
                    reason: format!(
                        "expected `measure start_beats`, found {} fields",
                        fields.len()
                    ),
                });
            }
            let measure: u32 = fields[0].parse().map_err(|_| ReportError::BadMeasureMapLine {
                line,
                reason: format!("measure {:?} is not an integer", fields[0]),
            })?;
            let beats: f64 = fields[1].parse().map_err(|_| ReportError::BadMeasureMapLine {
                line,
                reason: format!("start_beats {:?} is not a number", fields[1]),
            })?;
            if !beats.is_finite() {
                return Err(ReportError::BadMeasureMapLine {
                    line,
                    reason: "start_beats must be finite".to_string(),
                });
            }
            if let Some(&(prev_m, prev_b)) = entries.last() {
                if measure <= prev_m || beats <= prev_b {
                    return Err(ReportError::BadMeasureMapLine {
                        line,
                        reason: "entries must be strictly increasing".to_string(),
                    });
                }
            }
            entries.push((measure, beats));
        }
        Ok(MeasureMap { entries })
    }

    /// Reads a measure-map file.
    pub fn load(path: &Path) -> Result<MeasureMap, ReportError> {
        MeasureMap::parse(&fs::read_to_string(path)?)
    }

    /// Beat position of a measure's start.
    pub fn start_beats(&self, measure: u32) -> Option<f64> {
        self.entries
            .iter()
            .find(|(m, _)| *m == measure)
            .map(|(_, b)| *b)
    }
}

/// Boundary agreement between predicted segmentation and a reference.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Agreement {
    /// Number of reference boundaries (section starts).
    pub reference_boundaries: usize,
    /// Number of predicted boundaries (segment starts).
    pub predicted_boundaries: usize,
    /// Boundary pairs within tolerance of each other.
    pub matched: usize,
    /// matched / predicted (0 when nothing was predicted).
    pub precision: f64,
    /// matched / reference (0 when the reference is empty).
    pub recall: f64,
    /// Harmonic mean of precision and recall (0 when both are 0).
    pub f1: f64,
    /// predicted − reference boundary count.
    pub segment_count_difference: i64,
}

/// Agreement between predicted boundary positions (beats) and the
/// annotation's section starts mapped through `measure_map`.
///
/// Boundaries match greedily in sorted order when within `tol_beats` of each
/// other; each boundary matches at most once.
pub fn compare_boundaries(
    predicted_beats: &[f64],
    annotation: &ReferenceAnnotation,
    measure_map: &MeasureMap,
    tol_beats: f64,
) -> Result<Agreement, ReportError> {
    let tol = tol_beats.max(0.0);
    let mut reference: Vec<f64> = Vec::with_capacity(annotation.sections.len());
    for (_, start, _) in &annotation.sections {
        let beats = measure_map
            .start_beats(*start)
            .ok_or(ReportError::UncoveredMeasure { measure: *start })?;
        reference.push(beats);
    }
    reference.sort_by(f64::total_cmp);
    let mut predicted = predicted_beats.to_vec();
    predicted.sort_by(f64::total_cmp);

    let mut matched = 0usize;
    let (mut i, mut j) = (0usize, 0usize);
    while i < predicted.len() && j < reference.len() {
        let d = predicted[i] - reference[j];
        if d.abs() <= tol {
            matched += 1;
            i += 1;
            j += 1;
        } else if d < 0.0 {
            i += 1;
        } else {
            j += 1;
        }
    }
    let precision = if predicted.is_empty() {
        0.0
    } else {
        matched as f64 / predicted.len() as f64
    };
    let recall = if reference.is_empty() {
        0.0
    } else {
        matched as f64 / reference.len() as f64
    };
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    Ok(Agreement {
        reference_boundaries: reference.len(),
        predicted_boundaries: predicted.len(),
        matched,
        precision,
        recall,
        f1,
        segment_count_difference: predicted.len() as i64 - reference.len() as i64,
    })
}

/// [`compare_boundaries`] over segments: each segment's first-note onset in
/// beats is a predicted boundary.
pub fn compare_to_reference(
    segments: &[MelodySegment],
    annotation: &ReferenceAnnotation,
    measure_map: &MeasureMap,
    tol_beats: f64,
) -> Result<Agreement, ReportError> {
    let predicted: Vec<f64> = segments.iter().map(|s| s.start_beats()).collect();
    compare_boundaries(&predicted, annotation, measure_map, tol_beats)
}

/// Renders an agreement summary as text.
pub fn agreement_text(a: &Agreement) -> String {
    format!(
        "reference boundaries: {}\npredicted boundaries: {}\nmatched: {}\nprecision: {:.4}\nrecall: {:.4}\nf1: {:.4}\nsegment count difference: {}\n",
        a.reference_boundaries,
        a.predicted_boundaries,
        a.matched,
        a.precision,
        a.recall,
        a.f1,
        a.segment_count_difference
    )
}
