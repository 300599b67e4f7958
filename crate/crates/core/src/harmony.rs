//! Chord and interval labelling over simultaneous pitch sets.
//!
//! Templates are interval sets above an unnamed fundamental. Labelling tries
//! every member of the input set as the fundamental and picks the *smallest*
//! template that contains the resulting offsets — scanning most-specific to
//! least, so a bare major triad falls through 13th/11th/9th/dom7 down to
//! `perfectmajor`. Inversions collapse onto the fundamental on purpose.

use std::fs;
use std::path::Path;
use std::sync::LazyLock;

use crate::segmentation::SimultaneityBlock;
use crate::tonality::{PitchClass, PitchClassSet};

/// Errors from chord labelling and catalog handling.
#[derive(Debug, thiserror::Error)]
pub enum HarmonyError {
    /// No template contains the offsets under any fundamental.
    #[error("no chord template matches the pitch-class set")]
    NoMatch,
    /// Labelling needs at least two distinct pitch classes.
    #[error("chord labelling needs at least 2 distinct pitch classes, got {found}")]
    TooFewPitches {
        /// Size of the offending set.
        found: usize,
    },
    /// A malformed catalog line.
    #[error("chord catalog line {line}: {reason}")]
    BadCatalogLine {
        /// 1-based line number.
        line: usize,
        /// What was wrong.
        reason: String,
    },
    /// Two templates with the same label.
    #[error("duplicate chord label {label:?}")]
    DuplicateLabel {
        /// The repeated label.
        label: String,
    },
    /// A catalog with no templates at all.
    #[error("chord catalog is empty")]
    EmptyCatalog,
    /// Underlying file I/O failure.
    #[error("i/o error")]
    Io(#[from] std::io::Error),
}

/// One template: a label and the semitone offsets above the fundamental
/// (offset 0 implied).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChordTemplate {
    /// Printed label, e.g. `"P4"` or `"dom7"`.
    pub label: String,
    /// Sorted semitone offsets, each in 1..=11.
    pub intervals: Vec<u8>,
    /// Bitmask of {0} ∪ intervals.
    mask: u16,
}

impl ChordTemplate {
    fn new(label: &str, intervals: &[u8]) -> ChordTemplate {
        let mut intervals: Vec<u8> = intervals.to_vec();
        intervals.sort_unstable();
        intervals.dedup();
        let mut mask = 1u16; // the fundamental
        for &i in &intervals {
            assert!((1..=11).contains(&i), "interval {i} out of range");
            mask |= 1 << i;
        }
        ChordTemplate {
            label: label.to_string(),
            intervals,
            mask,
        }
    }

    /// True if every offset in `offsets` (a set containing 0) lies in this
    /// template.
    fn matches(&self, offsets: PitchClassSet) -> bool {
        offsets.mask() & !self.mask == 0
    }
}

/// An ordered list of chord templates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChordCatalog {
    templates: Vec<ChordTemplate>,
}

/// Label and interval content of the built-in catalog: the 11 dyads by
/// semitone distance, four triads, four sevenths, and the stacked 9th/11th/
/// 13th extensions. "A6" (not "m7") names the 10-semitone dyad.
const DEFAULT_TEMPLATES: &[(&str, &[u8])] = &[
    ("m2", &[1]),
    ("M2", &[2]),
    ("m3", &[3]),
    ("M3", &[4]),
    ("P4", &[5]),
    ("A4", &[6]),
    ("P5", &[7]),
    ("m6", &[8]),
    ("M6", &[9]),
    ("A6", &[10]),
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

static DEFAULT_CATALOG: LazyLock<ChordCatalog> = LazyLock::new(|| ChordCatalog {
    templates: DEFAULT_TEMPLATES
        .iter()
        .map(|(label, intervals)| ChordTemplate::new(label, intervals))
        .collect(),
});

impl ChordCatalog {
    /// The built-in catalog.
    pub fn default_catalog() -> &'static ChordCatalog {
        &DEFAULT_CATALOG
    }

    /// Templates in authored order.
    pub fn templates(&self) -> &[ChordTemplate] {
        &self.templates
    }

    /// Parses the catalog text format: one `<label> intervals=<csv>` per
    /// line, `#` comments and blank lines ignored.
    pub fn parse(text: &str) -> Result<ChordCatalog, HarmonyError> {
        let mut templates: Vec<ChordTemplate> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let (label, rest) = trimmed.split_once(char::is_whitespace).ok_or_else(|| {
                HarmonyError::BadCatalogLine {
                    line,
                    reason: "expected `<label> intervals=<csv>`".to_string(),
                }
            })?;
            let rest = rest.trim();
            let csv = rest
                .strip_prefix("intervals=")
                .ok_or_else(|| HarmonyError::BadCatalogLine {
                    line,
                    reason: format!("expected `intervals=<csv>`, found {rest:?}"),
                })?;
            let mut intervals = Vec::new();
            for part in csv.split(',') {
                let v: u8 = part.trim().parse().map_err(|_| HarmonyError::BadCatalogLine {
                    line,
                    reason: format!("interval {part:?} is not an integer"),
                })?;
                if !(1..=11).contains(&v) {
                    return Err(HarmonyError::BadCatalogLine {
                        line,
                        reason: format!("interval {v} out of range 1..=11"),
                    });
                }
                intervals.push(v);
            }
            if intervals.is_empty() {
                return Err(HarmonyError::BadCatalogLine {
                    line,
                    reason: "empty interval list".to_string(),
                });
            }
            if templates.iter().any(|t| t.label == label) {
                return Err(HarmonyError::DuplicateLabel {
                    label: label.to_string(),
                });
            }
            templates.push(ChordTemplate::new(label, &intervals));
        }
        if templates.is_empty() {
            return Err(HarmonyError::EmptyCatalog);
        }
        Ok(ChordCatalog { templates })
    }

    /// Reads a catalog file.
    pub fn load(path: &Path) -> Result<ChordCatalog, HarmonyError> {
        ChordCatalog::parse(&fs::read_to_string(path)?)
    }

    /// Renders the catalog in the format [`ChordCatalog::parse`] reads.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str("# Chord template catalog: semitone offsets above the fundamental.\n");
        out.push_str("# Labelling picks the smallest template containing the offsets.\n");
        for t in &self.templates {
            let csv: Vec<String> = t.intervals.iter().map(|i| i.to_string()).collect();
            out.push_str(&format!("{} intervals={}\n", t.label, csv.join(",")));
        }
        out
    }
}

/// Labels a pitch-class set with its fundamental and chord name.
///
/// Every set member is tried as the fundamental; a template matches when the
/// offsets from that fundamental are a subset of {0} ∪ template intervals.
/// Among all matches the winner minimizes (template size, catalog position,
/// fundamental index) — the unique minimal-superset template, with the
/// catalog and the pitch classes breaking ties deterministically.
pub fn chord_label(
    pitches: PitchClassSet,
    catalog: &ChordCatalog,
) -> Result<(PitchClass, String), HarmonyError> {
    if pitches.len() < 2 {
        return Err(HarmonyError::TooFewPitches {
            found: pitches.len(),
        });
    }
    let mut best: Option<(usize, usize, u8)> = None; // (size, position, root)
    for root in pitches.iter() {
        let offsets = pitches.transpose(-i32::from(root.index()));
        for (position, template) in catalog.templates.iter().enumerate() {
            if !template.matches(offsets) {
                continue;
            }
            let key = (template.intervals.len(), position, root.index());
            if best.is_none() || key < best.unwrap() {
                best = Some(key);
            }
        }
    }
    match best {
        Some((_, position, root)) => Ok((
            PitchClass::new(root),
            catalog.templates[position].label.clone(),
        )),
        None => Err(HarmonyError::NoMatch),
    }
}

/// One labeled chord occurrence.
#[derive(Clone, Debug, PartialEq)]
pub struct ChordEvent {
    /// Fundamental pitch class the intervals were measured from.
    pub fundamental: PitchClass,
    /// Template label.
    pub label: String,
    /// Onset of the group, seconds.
    pub onset_sec: f64,
    /// Channel the group sounded on.
    pub channel: u8,
}

/// Labels every same-channel, same-onset note group inside the blocks.
///
/// Within each block and channel, notes sharing an exact onset form a group;
/// groups with at least two distinct pitch classes get a [`ChordEvent`].
/// Groups no template matches are skipped and counted. Events come back
/// sorted by (onset, channel).
pub fn analyze_blocks_harmony(
    blocks: &[SimultaneityBlock],
    catalog: &ChordCatalog,
) -> (Vec<ChordEvent>, usize) {
    let mut events = Vec::new();
    let mut no_match = 0usize;
    for block in blocks {
        for (&channel, notes) in &block.notes_by_channel {
            let mut i = 0;
            while i < notes.len() {
                let onset = notes[i].onset_sec;
                let mut j = i;
                while j < notes.len() && notes[j].onset_sec == onset {
                    j += 1;
                }
                let pitches: PitchClassSet =
                    notes[i..j].iter().map(|n| n.pitch_class()).collect();
                if pitches.len() >= 2 {
                    match chord_label(pitches, catalog) {
                        Ok((fundamental, label)) => events.push(ChordEvent {
                            fundamental,
                            label,
                            onset_sec: onset,
                            channel,
                        }),
                        Err(_) => no_match += 1,
                    }
                }
                i = j;
            }
        }
    }
    events.sort_by(|a, b| a.onset_sec.total_cmp(&b.onset_sec).then(a.channel.cmp(&b.channel)));
    (events, no_match)
}
