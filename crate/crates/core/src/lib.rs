//! Symbolic music analysis over MIDI note data.
//!
//! The crate reads a piece as a flat table of note events (from a Standard
//! MIDI File or a whitespace-separated text table) and answers three kinds of
//! questions about it:
//!
//! - **melodic** — where does a melody line change scale, and which tonal
//!   centre / mode fits each stretch (`tonality`, `segmentation`);
//! - **harmonic** — which chords sound where several channels overlap
//!   (`harmony`);
//! - **rhythmic** — which rhythmic figures each channel plays inside those
//!   overlaps, and whether the channels disagree (`rhythm`).
//!
//! [`pipeline::analyze_table`] runs the whole chain and produces an
//! [`report::AnalysisReport`] that renders to plain text or JSON.
//!
//! ```
//! use modus::ingest::{NoteEvent, NoteTable};
//! use modus::pipeline::{analyze_table, AnalysisOptions};
//!
//! // One lonely A on channel 5: a one-segment melody.
//! let table = NoteTable::new(
//!     vec![NoteEvent {
//!         onset_beats: 0.0,
//!         duration_beats: 1.0,
//!         channel: 5,
//!         pitch: 69,
//!         velocity: 90,
//!         onset_sec: 0.0,
//!         duration_sec: 0.5,
//!     }],
//!     "doc",
//! )
//! .unwrap();
//! let report = analyze_table(&table, &AnalysisOptions::default()).unwrap();
//! assert_eq!(report.melodic[0].segments.len(), 1);
//! ```

pub mod harmony;
pub mod ingest;
pub mod pipeline;
pub mod report;
pub mod rhythm;
pub mod segmentation;
pub mod tonality;

#[cfg(doctest)]
mod book;
