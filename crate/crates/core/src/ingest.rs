//! Note tables: the flat event representation every analysis consumes.
//!
//! A table row is one note with onset/duration in beats and in seconds,
//! plus channel, pitch and velocity. Tables come from Standard MIDI Files
//! ([`load_smf`]) or from whitespace-separated text ([`load_note_table`]),
//! and always hold events sorted by `(onset_sec, channel, pitch)`.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::tonality::PitchClass;

mod smf;

pub use smf::{load_smf, parse_smf, SmfLoad};

/// Errors from reading or constructing note tables.
#[derive(Debug, thiserror::Error)]
pub enum IngestError {
    /// Underlying file I/O failure.
    #[error("i/o error")]
    Io(#[from] std::io::Error),
    /// A text row with the wrong number of columns.
    #[error("line {line}: expected 7 columns, found {found}")]
    BadColumnCount {
        /// 1-based line number in the input file.
        line: usize,
        /// Number of whitespace-separated fields found.
        found: usize,
    },
    /// A text field that does not parse as a number.
    #[error("line {line}: field {field} is not numeric: {value:?}")]
    NonNumericField {
        /// 1-based line number in the input file.
        line: usize,
        /// Column name.
        field: &'static str,
        /// Raw text found.
        value: String,
    },
    /// A text row with a non-positive duration.
    #[error("line {line}: duration must be positive")]
    NegativeDuration {
        /// 1-based line number in the input file.
        line: usize,
    },
    /// A numeric field outside its valid range (channel beyond 15, pitch or
    /// velocity beyond 127, negative onset, or a fractional integer column).
    #[error("line {line}: field {field} out of range: {value}")]
    FieldOutOfRange {
        /// 1-based line number in the input file.
        line: usize,
        /// Column name.
        field: &'static str,
        /// Offending value.
        value: f64,
    },
    /// An event rejected by the [`NoteTable`] constructor.
    #[error("event {index}: {reason}")]
    InvalidEvent {
        /// Index of the event in the input slice.
        index: usize,
        /// What was wrong with it.
        reason: String,
    },
    /// A Standard MIDI File with an unsupported format word (only 0 and 1
    /// are read).
    #[error("unsupported midi format {format}; only formats 0 and 1 are supported")]
    UnsupportedFormat {
        /// Format word from the header chunk.
        format: u16,
    },
    /// SMPTE time division, which this reader does not interpret.
    #[error("unsupported midi division: SMPTE timing is not supported")]
    UnsupportedDivision,
    /// Structural damage in a Standard MIDI File.
    #[error("corrupt midi file: {reason}")]
    CorruptFile {
        /// What was malformed.
        reason: String,
    },
}

/// One note: where it starts, how long it lasts, and what it is.
#[derive(Clone, Copy, PartialEq, Debug, Serialize, Deserialize)]
pub struct NoteEvent {
    /// Onset in beats (quarter notes) from the start of the piece.
    pub onset_beats: f64,
    /// Duration in beats; always positive.
    pub duration_beats: f64,
    /// MIDI channel, 0..=15.
    pub channel: u8,
    /// MIDI note number, 0..=127.
    pub pitch: u8,
    /// Note-on velocity, 0..=127.
    pub velocity: u8,
    /// Onset in seconds under the file's tempo map.
    pub onset_sec: f64,
    /// Duration in seconds; always positive.
    pub duration_sec: f64,
}

impl NoteEvent {
    /// End of the note in seconds.
    pub fn offset_sec(&self) -> f64 {
        self.onset_sec + self.duration_sec
    }

    /// End of the note in beats.
    pub fn offset_beats(&self) -> f64 {
        self.onset_beats + self.duration_beats
    }

    /// Pitch class of the note.
    pub fn pitch_class(&self) -> PitchClass {
        PitchClass::new(self.pitch % 12)
    }

    fn validate(&self) -> Result<(), String> {
        if !self.onset_beats.is_finite() || self.onset_beats < 0.0 {
            return Err(format!("onset_beats {} must be finite and >= 0", self.onset_beats));
        }
        if !self.onset_sec.is_finite() || self.onset_sec < 0.0 {
            return Err(format!("onset_sec {} must be finite and >= 0", self.onset_sec));
        }
        if !self.duration_beats.is_finite() || self.duration_beats <= 0.0 {
            return Err(format!("duration_beats {} must be finite and > 0", self.duration_beats));
        }
        if !self.duration_sec.is_finite() || self.duration_sec <= 0.0 {
            return Err(format!("duration_sec {} must be finite and > 0", self.duration_sec));
        }
        if self.channel > 15 {
            return Err(format!("channel {} out of range 0..=15", self.channel));
        }
        if self.pitch > 127 {
            return Err(format!("pitch {} out of range 0..=127", self.pitch));
        }
        if self.velocity > 127 {
            return Err(format!("velocity {} out of range 0..=127", self.velocity));
        }
        Ok(())
    }
}

/// A validated, time-ordered list of note events.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoteTable {
    /// Events sorted by `(onset_sec, channel, pitch)`.
    pub events: Vec<NoteEvent>,
    /// Where the table came from (a path, or a label for synthetic tables).
    pub source: String,
}

impl NoteTable {
    /// Validates every event and stores them sorted by
    /// `(onset_sec, channel, pitch)`.
    pub fn new(mut events: Vec<NoteEvent>, source: impl Into<String>) -> Result<NoteTable, IngestError> {
        for (index, e) in events.iter().enumerate() {
            e.validate()
                .map_err(|reason| IngestError::InvalidEvent { index, reason })?;
        }
        sort_events(&mut events);
        Ok(NoteTable {
            events,
            source: source.into(),
        })
    }

    /// Number of events.
    pub fn len(&self) -> usize {
        self.events.len()
    }

    /// True if the table holds no events.
    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// Channels present, ascending and deduplicated.
    pub fn channels(&self) -> Vec<u8> {
        let mut chans: Vec<u8> = self.events.iter().map(|e| e.channel).collect();
        chans.sort_unstable();
        chans.dedup();
        chans
    }
}

fn sort_events(events: &mut [NoteEvent]) {
    events.sort_by(|a, b| {
        a.onset_sec
            .total_cmp(&b.onset_sec)
            .then(a.channel.cmp(&b.channel))
            .then(a.pitch.cmp(&b.pitch))
    });
}

const COLUMNS: [&str; 7] = [
    "onset_beats",
    "duration_beats",
    "channel",
    "pitch",
    "velocity",
    "onset_sec",
    "duration_sec",
];

/// Reads a whitespace-separated text note table.
///
/// Each data line holds the seven columns of [`NoteEvent`] in declaration
/// order. Blank lines and lines starting with `#` are skipped. Integer
/// columns accept a float spelling (`5.0`) as long as the value is integral.
pub fn load_note_table(path: &Path) -> Result<NoteTable, IngestError> {
    let text = fs::read_to_string(path)?;
    parse_note_table(&text, &path.display().to_string())
}

/// [`load_note_table`] over in-memory text.
pub fn parse_note_table(text: &str, source: &str) -> Result<NoteTable, IngestError> {
    let mut events = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        if fields.len() != COLUMNS.len() {
            return Err(IngestError::BadColumnCount {
                line,
                found: fields.len(),
            });
        }
        let mut values = [0.0f64; 7];
        for (i, (field, raw)) in COLUMNS.iter().zip(&fields).enumerate() {
            values[i] = raw.parse::<f64>().map_err(|_| IngestError::NonNumericField {
                line,
                field,
                value: (*raw).to_string(),
            })?;
            if !values[i].is_finite() {
                return Err(IngestError::NonNumericField {
                    line,
                    field,
                    value: (*raw).to_string(),
                });
            }
        }
        let [onset_beats, duration_beats, channel, pitch, velocity, onset_sec, duration_sec] =
            values;
        if duration_beats <= 0.0 || duration_sec <= 0.0 {
            return Err(IngestError::NegativeDuration { line });
        }
        let int_field = |field: &'static str, value: f64, max: f64| {
            if value.fract() != 0.0 || value < 0.0 || value > max {
                Err(IngestError::FieldOutOfRange { line, field, value })
            } else {
                Ok(value as u8)
            }
        };
        let channel = int_field("channel", channel, 15.0)?;
        let pitch = int_field("pitch", pitch, 127.0)?;
        let velocity = int_field("velocity", velocity, 127.0)?;
        for (field, value) in [("onset_beats", onset_beats), ("onset_sec", onset_sec)] {
            if value < 0.0 {
                return Err(IngestError::FieldOutOfRange { line, field, value });
            }
        }
        events.push(NoteEvent {
            onset_beats,
            duration_beats,
            channel,
            pitch,
            velocity,
            onset_sec,
            duration_sec,
        });
    }
    NoteTable::new(events, source)
}

/// Renders a table in the text format read by [`load_note_table`].
///
/// Floats use the shortest representation that round-trips, so
/// `parse_note_table(&note_table_to_string(t), ..)` reproduces `t` exactly.
/// An empty table renders as an empty string.
pub fn note_table_to_string(table: &NoteTable) -> String {
    let mut events = table.events.clone();
    sort_events(&mut events);
    let mut out = String::new();
    for e in &events {
        writeln!(
            out,
            "{} {} {} {} {} {} {}",
            e.onset_beats, e.duration_beats, e.channel, e.pitch, e.velocity, e.onset_sec, e.duration_sec
        )
        .unwrap();
    }
    out
}

/// Writes a table to `path` in the text format read by [`load_note_table`].
pub fn export_note_table(table: &NoteTable, path: &Path) -> Result<(), IngestError> {
    fs::write(path, note_table_to_string(table))?;
    Ok(())
}

/// A parsed Standard MIDI File plus ingest diagnostics.
#[derive(Debug, Clone)]
pub struct SmfStats {
    /// Note-ons with no matching note-off; their durations were clamped to
    /// the end of their track.
    pub dangling_notes: usize,
    /// Note pairs whose duration came out non-positive; dropped.
    pub zero_length_notes: usize,
}

/// Loads a note table from a file, sniffing the format: files starting with
/// the `MThd` magic load as Standard MIDI Files, everything else as text.
pub fn load_auto(path: &Path) -> Result<SmfLoad, IngestError> {
    let bytes = fs::read(path)?;
    if bytes.starts_with(b"MThd") {
        parse_smf(&bytes, &path.display().to_string())
    } else {
        let text = String::from_utf8_lossy(&bytes);
        let table = parse_note_table(&text, &path.display().to_string())?;
        Ok(SmfLoad {
            table,
            stats: SmfStats {
                dangling_notes: 0,
                zero_length_notes: 0,
            },
        })
    }
}
