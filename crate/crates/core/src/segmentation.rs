//! Melody segmentation and cross-channel simultaneity blocks.
//!
//! Two segmentation strategies exist: a silence threshold
//! ([`segment_by_gaps`]) and incremental feasibility
//! ([`segment_by_feasibility`]), which grows a segment while at least one
//! `(tonic, mode)` candidate still contains every pitch class seen.
//! Simultaneity blocks are the time windows where two or more channels have
//! overlapping notes; harmony and rhythm analyses run inside them.

use std::collections::BTreeMap;

use crate::ingest::{NoteEvent, NoteTable};
use crate::tonality::{
    enumerate_candidates_in, mode_pitch_set, select_best_candidate, CandidatePair, Mode,
    PitchClass, PitchClassSet, ScoredCandidate, MODE_CATALOG,
};

/// Errors from segmentation.
#[derive(Debug, thiserror::Error)]
pub enum SegmentationError {
    /// Gap threshold that is zero, negative or not finite.
    #[error("gap threshold must be a positive number of seconds, got {0}")]
    NonPositiveThreshold(f64),
    /// Feasibility segmentation needs at least one note.
    #[error("melody is empty")]
    EmptyMelody,
}

/// How a segment ended up labeled.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum SegmentLabel {
    /// A concrete `(tonic, mode)` with its profile score.
    Chosen(ScoredCandidate),
    /// No catalog mode fits. Fixed-tonic strategies still report the tonic
    /// they were given; the feasibility path has none to report.
    NotKnownMode {
        /// Tonic used by a fixed-tonic strategy, if any.
        tonic: Option<PitchClass>,
    },
}

/// A contiguous run of melody notes with its tonal label.
#[derive(Clone, Debug, PartialEq)]
pub struct MelodySegment {
    /// Onset of the first note, seconds.
    pub start_sec: f64,
    /// Offset (onset + duration) of the last note, seconds.
    pub end_sec: f64,
    /// The notes, in melody order.
    pub notes: Vec<NoteEvent>,
    /// Scored feasible candidates (populated by the profiles strategy;
    /// empty for gap segments until labeled, and for fixed-tonic labels).
    pub candidates: Vec<ScoredCandidate>,
    /// The label, once a strategy has assigned one.
    pub chosen: Option<SegmentLabel>,
}

impl MelodySegment {
    fn from_notes(notes: Vec<NoteEvent>) -> MelodySegment {
        assert!(!notes.is_empty(), "segment cannot be empty");
        let start_sec = notes[0].onset_sec;
        let end_sec = notes.last().unwrap().offset_sec();
        MelodySegment {
            start_sec,
            end_sec,
            notes,
            candidates: Vec::new(),
            chosen: None,
        }
    }

    /// Onset of the first note, beats.
    pub fn start_beats(&self) -> f64 {
        self.notes[0].onset_beats
    }

    /// Offset of the last note, beats.
    pub fn end_beats(&self) -> f64 {
        self.notes.last().unwrap().offset_beats()
    }

    /// Distinct pitch classes of the segment.
    pub fn pitch_class_set(&self) -> PitchClassSet {
        self.notes.iter().map(|n| n.pitch_class()).collect()
    }

    /// Scores this segment's candidates and stores the winner. With no
    /// feasible candidate the segment is labeled `notknownmode`.
    pub(crate) fn label_with_profiles(&mut self, catalog: &[Mode]) {
        let candidates = enumerate_candidates_in(self.pitch_class_set(), catalog);
        self.apply_candidates(&candidates);
    }

    fn apply_candidates(&mut self, candidates: &[CandidatePair]) {
        match select_best_candidate(&self.notes, candidates) {
            Ok((best, scored)) => {
                self.candidates = scored;
                self.chosen = Some(SegmentLabel::Chosen(best));
            }
            Err(_) => {
                self.candidates = Vec::new();
                self.chosen = Some(SegmentLabel::NotKnownMode { tonic: None });
            }
        }
    }
}

/// All notes of one channel, time-ordered. An absent channel gives an empty
/// list.
pub fn extract_channel_melody(table: &NoteTable, channel: u8) -> Vec<NoteEvent> {
    let mut melody: Vec<NoteEvent> = table
        .events
        .iter()
        .copied()
        .filter(|e| e.channel == channel)
        .collect();
    melody.sort_by(|a, b| a.onset_sec.total_cmp(&b.onset_sec).then(a.pitch.cmp(&b.pitch)));
    melody
}

/// Splits a melody wherever the silence between consecutive notes exceeds
/// `threshold_sec`. Segments come back unlabeled (no candidates).
pub fn segment_by_gaps(
    melody: &[NoteEvent],
    threshold_sec: f64,
) -> Result<Vec<MelodySegment>, SegmentationError> {
    if !threshold_sec.is_finite() || threshold_sec <= 0.0 {
        return Err(SegmentationError::NonPositiveThreshold(threshold_sec));
    }
    let mut segments = Vec::new();
    let mut current: Vec<NoteEvent> = Vec::new();
    for &note in melody {
        if let Some(prev) = current.last() {
            if note.onset_sec - prev.offset_sec() > threshold_sec {
                segments.push(MelodySegment::from_notes(std::mem::take(&mut current)));
            }
        }
        current.push(note);
    }
    if !current.is_empty() {
        segments.push(MelodySegment::from_notes(current));
    }
    Ok(segments)
}

/// Segments a melody by incremental feasibility and labels each segment by
/// best profile score.
///
/// Greedy left to right: seed a segment with the next two notes (one at the
/// melody's end), then keep appending while some `(tonic, mode)` candidate
/// contains every pitch class; the note that would empty the candidate list
/// starts the next segment. A seed pair that has no candidates at all opens a
/// `notknownmode` segment, which absorbs notes until a feasible two-note seed
/// reappears.
pub fn segment_by_feasibility(
    melody: &[NoteEvent],
) -> Result<Vec<MelodySegment>, SegmentationError> {
    segment_by_feasibility_in(melody, &MODE_CATALOG)
}

pub(crate) fn segment_by_feasibility_in(
    melody: &[NoteEvent],
    catalog: &[Mode],
) -> Result<Vec<MelodySegment>, SegmentationError> {
    if melody.is_empty() {
        return Err(SegmentationError::EmptyMelody);
    }
    let pair_set = |a: &NoteEvent, b: &NoteEvent| -> PitchClassSet {
        [a.pitch_class(), b.pitch_class()].into_iter().collect()
    };
    let n = melody.len();
    let mut segments = Vec::new();
    let mut i = 0;
    while i < n {
        if i == n - 1 {
            let mut seg = MelodySegment::from_notes(vec![melody[i]]);
            seg.label_with_profiles(catalog);
            segments.push(seg);
            break;
        }
        let seed_candidates =
            enumerate_candidates_in(pair_set(&melody[i], &melody[i + 1]), catalog);
        if seed_candidates.is_empty() {
            // No segment can start here; collect notes until a two-note
            // restart becomes possible (or only the final note remains).
            let start = i;
            i += 1;
            while i < n - 1
                && enumerate_candidates_in(pair_set(&melody[i], &melody[i + 1]), catalog)
                    .is_empty()
            {
                i += 1;
            }
            let mut seg = MelodySegment::from_notes(melody[start..i].to_vec());
            seg.chosen = Some(SegmentLabel::NotKnownMode { tonic: None });
            segments.push(seg);
            continue;
        }
        // Feasibility is monotone: the candidates of S ∪ {x} are exactly the
        // candidates of S whose pitch set contains x, so growth filters
        // instead of re-enumerating.
        let mut candidates = seed_candidates;
        let mut end = i + 2;
        while end < n {
            let pc = melody[end].pitch_class();
            let filtered: Vec<CandidatePair> = candidates
                .iter()
                .copied()
                .filter(|c| mode_pitch_set(c.mode, c.tonic).contains(pc))
                .collect();
            if filtered.is_empty() {
                break;
            }
            candidates = filtered;
            end += 1;
        }
        let mut seg = MelodySegment::from_notes(melody[i..end].to_vec());
        seg.apply_candidates(&candidates);
        segments.push(seg);
        i = end;
    }
    Ok(segments)
}

/// A maximal window where notes from at least two channels overlap in time.
#[derive(Clone, Debug, PartialEq)]
pub struct SimultaneityBlock {
    /// Earliest onset in the block, seconds.
    pub start_sec: f64,
    /// Latest offset in the block, seconds.
    pub end_sec: f64,
    /// Notes grouped by channel, each list time-ordered.
    pub notes_by_channel: BTreeMap<u8, Vec<NoteEvent>>,
}

impl SimultaneityBlock {
    fn from_notes(notes: Vec<NoteEvent>) -> SimultaneityBlock {
        assert!(!notes.is_empty());
        let start_sec = notes
            .iter()
            .map(|n| n.onset_sec)
            .fold(f64::INFINITY, f64::min);
        let end_sec = notes
            .iter()
            .map(|n| n.offset_sec())
            .fold(f64::NEG_INFINITY, f64::max);
        let mut notes_by_channel: BTreeMap<u8, Vec<NoteEvent>> = BTreeMap::new();
        for note in notes {
            notes_by_channel.entry(note.channel).or_default().push(note);
        }
        for list in notes_by_channel.values_mut() {
            list.sort_by(|a, b| a.onset_sec.total_cmp(&b.onset_sec).then(a.pitch.cmp(&b.pitch)));
        }
        SimultaneityBlock {
            start_sec,
            end_sec,
            notes_by_channel,
        }
    }

    /// Channels present, ascending.
    pub fn channels(&self) -> Vec<u8> {
        self.notes_by_channel.keys().copied().collect()
    }

    fn merge(&mut self, other: SimultaneityBlock) {
        self.start_sec = self.start_sec.min(other.start_sec);
        self.end_sec = self.end_sec.max(other.end_sec);
        for (channel, notes) in other.notes_by_channel {
            let list = self.notes_by_channel.entry(channel).or_default();
            list.extend(notes);
            list.sort_by(|a, b| a.onset_sec.total_cmp(&b.onset_sec).then(a.pitch.cmp(&b.pitch)));
        }
    }
}

struct Dsu {
    parent: Vec<usize>,
}

impl Dsu {
    fn new(n: usize) -> Dsu {
        Dsu {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, x: usize) -> usize {
        if self.parent[x] != x {
            let root = self.find(self.parent[x]);
            self.parent[x] = root;
        }
        self.parent[x]
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra] = rb;
        }
    }
}

/// Groups notes into simultaneity blocks.
///
/// Two notes are simultaneous when they lie on different channels and their
/// second-time extents overlap by more than `overlap_eps` (boundary touching
/// does not count). Connected components of that relation spanning at least
/// two channels become blocks; blocks whose windows still overlap by more
/// than `overlap_eps` are merged so the result is disjoint and ordered.
pub fn simultaneity_blocks(table: &NoteTable, overlap_eps: f64) -> Vec<SimultaneityBlock> {
    let eps = overlap_eps.max(0.0);
    let notes = &table.events;
    let n = notes.len();
    let mut dsu = Dsu::new(n);
    for i in 0..n {
        for j in (i + 1)..n {
            // Sorted by onset, so note j starts at or after note i; once j
            // starts too late to overlap i, later notes do too.
            if notes[j].onset_sec >= notes[i].offset_sec() - eps {
                break;
            }
            if notes[i].channel == notes[j].channel {
                continue;
            }
            let overlap =
                notes[i].offset_sec().min(notes[j].offset_sec()) - notes[j].onset_sec;
            if overlap > eps {
                dsu.union(i, j);
            }
        }
    }

    let mut components: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..n {
        let root = dsu.find(i);
        components.entry(root).or_default().push(i);
    }

    let mut blocks: Vec<SimultaneityBlock> = components
        .into_values()
        .filter_map(|idxs| {
            let mut channels: Vec<u8> = idxs.iter().map(|&i| notes[i].channel).collect();
            channels.sort_unstable();
            channels.dedup();
            if channels.len() < 2 {
                return None;
            }
            Some(SimultaneityBlock::from_notes(
                idxs.into_iter().map(|i| notes[i]).collect(),
            ))
        })
        .collect();
    blocks.sort_by(|a, b| a.start_sec.total_cmp(&b.start_sec));

    // Components only link notes across channels, so two blocks can still
    // share a stretch of time; collapse those to keep block windows disjoint.
    let mut merged: Vec<SimultaneityBlock> = Vec::with_capacity(blocks.len());
    for block in blocks {
        match merged.last_mut() {
            Some(last) if last.end_sec.min(block.end_sec) - block.start_sec > eps => {
                last.merge(block);
            }
            _ => merged.push(block),
        }
    }
    merged
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tonality::ModeName;

    fn melody_note(onset_sec: f64, duration_sec: f64, pitch: u8) -> NoteEvent {
        NoteEvent {
            onset_beats: onset_sec * 2.0,
            duration_beats: duration_sec * 2.0,
            channel: 5,
            pitch,
            velocity: 90,
            onset_sec,
            duration_sec,
        }
    }

    fn chan_note(channel: u8, onset_sec: f64, offset_sec: f64) -> NoteEvent {
        NoteEvent {
            onset_beats: onset_sec * 2.0,
            duration_beats: (offset_sec - onset_sec) * 2.0,
            channel,
            pitch: 60,
            velocity: 90,
            onset_sec,
            duration_sec: offset_sec - onset_sec,
        }
    }

    fn run(pitches: &[u8]) -> Vec<NoteEvent> {
        pitches
            .iter()
            .enumerate()
            .map(|(i, &p)| melody_note(i as f64 * 0.5, 0.5, p))
            .collect()
    }

    #[test]
    fn extract_filters_and_orders() {
        let mut notes = vec![
            chan_note(4, 1.0, 2.0),
            chan_note(5, 0.5, 1.0),
            chan_note(5, 0.0, 0.5),
        ];
        notes[2].pitch = 62;
        let table = NoteTable::new(notes, "t").unwrap();
        let melody = extract_channel_melody(&table, 5);
        assert_eq!(melody.len(), 2);
        assert!(melody[0].onset_sec <= melody[1].onset_sec);
        assert!(extract_channel_melody(&table, 9).is_empty());
    }

    #[test]
    fn gap_threshold_splits_on_silence() {
        let melody = vec![melody_note(0.0, 1.0, 60), melody_note(1.2, 1.0, 62)];
        assert_eq!(segment_by_gaps(&melody, 0.1).unwrap().len(), 2);
        assert_eq!(segment_by_gaps(&melody, 0.5).unwrap().len(), 1);
        assert_eq!(segment_by_gaps(&[melody_note(0.0, 1.0, 60)], 0.1).unwrap().len(), 1);
        assert!(segment_by_gaps(&melody, 0.0).is_err());
        assert!(segment_by_gaps(&melody, -1.0).is_err());
    }

    #[test]
    fn segment_bounds_come_from_first_and_last_note() {
        let melody = vec![melody_note(0.0, 1.0, 60), melody_note(0.5, 2.0, 64)];
        let segs = segment_by_gaps(&melody, 10.0).unwrap();
        assert_eq!(segs[0].start_sec, 0.0);
        assert_eq!(segs[0].end_sec, 2.5);
        assert_eq!(segs[0].start_beats(), 0.0);
        assert_eq!(segs[0].end_beats(), 5.0);
    }

    #[test]
    fn scale_melody_stays_one_segment_with_eight_candidates() {
        let melody = run(&[60, 62, 64, 65, 67, 69, 71]);
        let segs = segment_by_feasibility(&melody).unwrap();
        assert_eq!(segs.len(), 1);
        assert_eq!(segs[0].candidates.len(), 8);
        assert!(matches!(segs[0].chosen, Some(SegmentLabel::Chosen(_))));
    }

    #[test]
    fn chromatic_triple_splits_after_two_notes() {
        let melody = run(&[60, 61, 62]);
        let segs = segment_by_feasibility(&melody).unwrap();
        assert_eq!(segs.len(), 2);
        assert_eq!(segs[0].notes.len(), 2);
        assert_eq!(segs[1].notes.len(), 1);
        assert!(matches!(segs[0].chosen, Some(SegmentLabel::Chosen(_))));
    }

    #[test]
    fn single_note_melody_is_one_chosen_segment() {
        let segs = segment_by_feasibility(&run(&[60])).unwrap();
        assert_eq!(segs.len(), 1);
        assert!(matches!(segs[0].chosen, Some(SegmentLabel::Chosen(_))));
        assert!(segment_by_feasibility(&[]).is_err());
    }

    #[test]
    fn segments_partition_the_melody() {
        let melody = run(&[60, 62, 64, 66, 61, 63, 60, 72, 59, 58]);
        let segs = segment_by_feasibility(&melody).unwrap();
        let rebuilt: Vec<NoteEvent> = segs.iter().flat_map(|s| s.notes.clone()).collect();
        assert_eq!(rebuilt, melody);
    }

    #[test]
    fn closing_note_breaks_feasibility_of_previous_segment() {
        let melody = run(&[60, 62, 64, 65, 67, 69, 71, 61]);
        let segs = segment_by_feasibility(&melody).unwrap();
        assert!(segs.len() >= 2);
        for pair in segs.windows(2) {
            let mut set = pair[0].pitch_class_set();
            set.insert(pair[1].notes[0].pitch_class());
            assert!(
                enumerate_candidates_in(set, &MODE_CATALOG).is_empty(),
                "previous segment plus next segment's first note must be infeasible"
            );
        }
    }

    // The full catalog makes every pair feasible, so the notknownmode branch
    // needs a trimmed catalog to fire: with only whole_tone available, a
    // semitone step has no candidates.
    #[test]
    fn infeasible_seed_becomes_notknownmode_until_restart() {
        let whole_tone_only = [MODE_CATALOG[ModeName::WholeTone.catalog_index()]];
        let melody = run(&[60, 61, 62, 64]);
        let segs = segment_by_feasibility_in(&melody, &whole_tone_only).unwrap();
        assert_eq!(segs.len(), 2);
        assert_eq!(
            segs[0].chosen,
            Some(SegmentLabel::NotKnownMode { tonic: None })
        );
        assert_eq!(segs[0].notes.len(), 2);
        assert!(segs[0].candidates.is_empty());
        assert_eq!(segs[1].notes.len(), 2);
        assert!(matches!(
            segs[1].chosen,
            Some(SegmentLabel::Chosen(ScoredCandidate {
                mode: ModeName::WholeTone,
                ..
            }))
        ));
    }

    #[test]
    fn notknownmode_run_leaves_final_note_as_own_segment() {
        let whole_tone_only = [MODE_CATALOG[ModeName::WholeTone.catalog_index()]];
        let melody = run(&[60, 61]);
        let segs = segment_by_feasibility_in(&melody, &whole_tone_only).unwrap();
        assert_eq!(segs.len(), 2);
        assert_eq!(
            segs[0].chosen,
            Some(SegmentLabel::NotKnownMode { tonic: None })
        );
        assert!(matches!(segs[1].chosen, Some(SegmentLabel::Chosen(_))));
    }

    #[test]
    fn blocks_require_two_channels() {
        let table = NoteTable::new(
            vec![chan_note(4, 0.0, 1.0), chan_note(5, 0.0, 1.0)],
            "t",
        )
        .unwrap();
        let blocks = simultaneity_blocks(&table, 0.0);
        assert_eq!(blocks.len(), 1);
        assert_eq!(blocks[0].channels(), vec![4, 5]);

        let table = NoteTable::new(
            vec![chan_note(4, 0.0, 1.0), chan_note(4, 0.5, 1.5)],
            "t",
        )
        .unwrap();
        assert!(simultaneity_blocks(&table, 0.0).is_empty());
    }

    #[test]
    fn chained_overlaps_form_one_block() {
        let table = NoteTable::new(
            vec![
                chan_note(4, 0.0, 1.0),
                chan_note(5, 0.9, 2.0),
                chan_note(4, 1.8, 3.0),
            ],
            "t",
        )
        .unwrap();
        let blocks = simultaneity_blocks(&table, 0.0);
        assert_eq!(blocks.len(), 1);
        assert_eq!(blocks[0].start_sec, 0.0);
        assert_eq!(blocks[0].end_sec, 3.0);
        let total: usize = blocks[0].notes_by_channel.values().map(Vec::len).sum();
        assert_eq!(total, 3);
    }

    #[test]
    fn boundary_touch_is_not_simultaneity() {
        let table = NoteTable::new(
            vec![chan_note(4, 0.0, 1.0), chan_note(5, 1.0, 2.0)],
            "t",
        )
        .unwrap();
        assert!(simultaneity_blocks(&table, 0.0).is_empty());
    }

    #[test]
    fn overlapping_component_windows_are_coalesced() {
        // Components {ch4 [0,2], ch5 [0,1]} and {ch4 [1.5,3], ch6 [2.5,3]}
        // have no cross-channel link between them, yet their windows overlap;
        // the result must still be disjoint blocks.
        let table = NoteTable::new(
            vec![
                chan_note(4, 0.0, 2.0),
                chan_note(5, 0.0, 1.0),
                chan_note(4, 1.5, 3.0),
                chan_note(6, 2.5, 3.0),
            ],
            "t",
        )
        .unwrap();
        let blocks = simultaneity_blocks(&table, 0.0);
        assert_eq!(blocks.len(), 1);
        assert_eq!(blocks[0].channels(), vec![4, 5, 6]);
        assert_eq!((blocks[0].start_sec, blocks[0].end_sec), (0.0, 3.0));
    }

    #[test]
    fn blocks_are_ordered_and_disjoint() {
        let table = NoteTable::new(
            vec![
                chan_note(4, 0.0, 1.0),
                chan_note(5, 0.5, 1.0),
                chan_note(4, 5.0, 6.0),
                chan_note(5, 5.5, 6.5),
            ],
            "t",
        )
        .unwrap();
        let blocks = simultaneity_blocks(&table, 0.0);
        assert_eq!(blocks.len(), 2);
        assert!(blocks[0].end_sec <= blocks[1].start_sec);
    }
}
