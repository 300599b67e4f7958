//! Standard MIDI File reader (formats 0 and 1).
//!
//! Only the events the analyses need are interpreted: note-on/note-off pairs
//! and set-tempo metas. Everything else is decoded far enough to skip.
//! Overlapping same-pitch notes on one channel pair up FIFO: the oldest open
//! note-on takes the next note-off.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use super::{IngestError, NoteEvent, NoteTable, SmfStats};

/// Microseconds per quarter note before any set-tempo event (120 BPM).
const DEFAULT_TEMPO: u32 = 500_000;

/// A parsed file: the note table plus what had to be repaired on the way.
#[derive(Debug, Clone)]
pub struct SmfLoad {
    /// The extracted notes.
    pub table: NoteTable,
    /// Repair counters.
    pub stats: SmfStats,
}

/// Reads a Standard MIDI File from disk.
pub fn load_smf(path: &Path) -> Result<SmfLoad, IngestError> {
    let bytes = fs::read(path)?;
    parse_smf(&bytes, &path.display().to_string())
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn new(bytes: &'a [u8]) -> Reader<'a> {
        Reader { bytes, pos: 0 }
    }

    fn remaining(&self) -> usize {
        self.bytes.len() - self.pos
    }

    fn corrupt(&self, reason: &str) -> IngestError {
        IngestError::CorruptFile {
            reason: format!("{reason} at byte {}", self.pos),
        }
    }

    fn u8(&mut self) -> Result<u8, IngestError> {
        let b = *self
            .bytes
            .get(self.pos)
            .ok_or_else(|| self.corrupt("unexpected end of data"))?;
        self.pos += 1;
        Ok(b)
    }

    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    fn u16_be(&mut self) -> Result<u16, IngestError> {
        Ok(u16::from_be_bytes([self.u8()?, self.u8()?]))
    }

    fn u32_be(&mut self) -> Result<u32, IngestError> {
        Ok(u32::from_be_bytes([self.u8()?, self.u8()?, self.u8()?, self.u8()?]))
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8], IngestError> {
        if self.remaining() < n {
            return Err(self.corrupt("unexpected end of data"));
        }
        let slice = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(slice)
    }

    /// Variable-length quantity: up to four bytes, high bit continues.
    fn varint(&mut self) -> Result<u32, IngestError> {
        let mut value: u32 = 0;
        for _ in 0..4 {
            let b = self.u8()?;
            value = (value << 7) | u32::from(b & 0x7F);
            if b & 0x80 == 0 {
                return Ok(value);
            }
        }
        Err(self.corrupt("variable-length quantity longer than 4 bytes"))
    }
}

struct RawNote {
    on_tick: u64,
    off_tick: Option<u64>,
    channel: u8,
    pitch: u8,
    velocity: u8,
}

/// Tempo changes as (tick, microseconds per quarter), in file order.
type TempoEvents = Vec<(u64, u32)>;

struct TempoMap {
    /// (start tick, µs per quarter, seconds elapsed at start tick).
    segments: Vec<(u64, f64, f64)>,
    division: f64,
}

impl TempoMap {
    fn build(mut events: TempoEvents, division: u16) -> TempoMap {
        events.sort_by_key(|(tick, _)| *tick);
        let division = f64::from(division);
        let mut segments: Vec<(u64, f64, f64)> = vec![(0, f64::from(DEFAULT_TEMPO), 0.0)];
        for (tick, us) in events {
            let (last_tick, last_us, last_sec) = *segments.last().unwrap();
            if tick == last_tick {
                // Same-tick changes: the later event wins.
                segments.last_mut().unwrap().1 = f64::from(us);
            } else {
                let sec = last_sec + (tick - last_tick) as f64 * last_us / division * 1e-6;
                segments.push((tick, f64::from(us), sec));
            }
        }
        TempoMap { segments, division }
    }

    fn tick_to_sec(&self, tick: u64) -> f64 {
        let idx = self
            .segments
            .partition_point(|(start, _, _)| *start <= tick)
            - 1;
        let (start, us, sec) = self.segments[idx];
        sec + (tick - start) as f64 * us / self.division * 1e-6
    }
}

fn round4(x: f64) -> f64 {
    (x * 10_000.0).round() / 10_000.0
}

/// Parses a Standard MIDI File from memory.
///
/// Format 0 and 1 only; SMPTE division is rejected. Note-ons left open at the
/// end of their track are clamped to the track's final tick and counted; note
/// pairs whose rounded duration is not positive are dropped and counted.
pub fn parse_smf(bytes: &[u8], source: &str) -> Result<SmfLoad, IngestError> {
    let mut r = Reader::new(bytes);
    if r.remaining() < 14 || r.take(4)? != b"MThd" {
        return Err(IngestError::CorruptFile {
            reason: "missing MThd header".to_string(),
        });
    }
    let header_len = r.u32_be()? as usize;
    if header_len < 6 {
        return Err(r.corrupt("header chunk shorter than 6 bytes"));
    }
    let format = r.u16_be()?;
    let _ntrks = r.u16_be()?;
    let division = r.u16_be()?;
    r.take(header_len - 6)?;
    if format > 1 {
        return Err(IngestError::UnsupportedFormat { format });
    }
    if division & 0x8000 != 0 {
        return Err(IngestError::UnsupportedDivision);
    }
    if division == 0 {
        return Err(r.corrupt("time division is zero"));
    }

    let mut notes: Vec<RawNote> = Vec::new();
    let mut tempos: TempoEvents = Vec::new();
    let mut dangling = 0usize;
    while r.remaining() > 0 {
        if r.remaining() < 8 {
            return Err(r.corrupt("trailing bytes too short for a chunk header"));
        }
        let id: [u8; 4] = r.take(4)?.try_into().unwrap();
        let len = r.u32_be()? as usize;
        let body = r.take(len)?;
        if &id == b"MTrk" {
            dangling += parse_track(body, &mut notes, &mut tempos)?;
        }
        // Unknown chunk types are skipped, as the format requires.
    }

    let tempo_map = TempoMap::build(tempos, division);
    let division = f64::from(division);
    let mut events = Vec::with_capacity(notes.len());
    let mut zero_length = 0usize;
    for n in notes {
        let off_tick = n.off_tick.expect("all notes resolved per track");
        let onset_beats = round4(n.on_tick as f64 / division);
        let duration_beats = round4((off_tick - n.on_tick) as f64 / division);
        let onset_sec = round4(tempo_map.tick_to_sec(n.on_tick));
        let duration_sec =
            round4(tempo_map.tick_to_sec(off_tick) - tempo_map.tick_to_sec(n.on_tick));
        if duration_beats <= 0.0 || duration_sec <= 0.0 {
            zero_length += 1;
            continue;
        }
        events.push(NoteEvent {
            onset_beats,
            duration_beats,
            channel: n.channel,
            pitch: n.pitch,
            velocity: n.velocity,
            onset_sec,
            duration_sec,
        });
    }
    let table = NoteTable::new(events, source)?;
    Ok(SmfLoad {
        table,
        stats: SmfStats {
            dangling_notes: dangling,
            zero_length_notes: zero_length,
        },
    })
}

/// Parses one MTrk body, appending notes and tempo events. Returns how many
/// note-ons had to be clamped to the track end.
fn parse_track(
    body: &[u8],
    notes: &mut Vec<RawNote>,
    tempos: &mut TempoEvents,
) -> Result<usize, IngestError> {
    let mut r = Reader::new(body);
    let mut tick: u64 = 0;
    let mut running: Option<u8> = None;
    // FIFO of open note indices per (channel, pitch).
    let mut open: HashMap<(u8, u8), Vec<usize>> = HashMap::new();

    while r.remaining() > 0 {
        tick += u64::from(r.varint()?);
        let first = r.peek().ok_or_else(|| r.corrupt("missing event status"))?;
        let status = if first & 0x80 != 0 {
            r.u8()?;
            if first < 0xF0 {
                running = Some(first);
            } else {
                running = None;
            }
            first
        } else {
            running.ok_or_else(|| r.corrupt("running status with no prior status byte"))?
        };

        match status {
            0xFF => {
                let kind = r.u8()?;
                let len = r.varint()? as usize;
                let data = r.take(len)?;
                if kind == 0x51 {
                    if len != 3 {
                        return Err(r.corrupt("set-tempo meta with length other than 3"));
                    }
                    let us = u32::from_be_bytes([0, data[0], data[1], data[2]]);
                    tempos.push((tick, us));
                }
                if kind == 0x2F {
                    break;
                }
            }
            0xF0 | 0xF7 => {
                let len = r.varint()? as usize;
                r.take(len)?;
            }
            _ => {
                let hi = status >> 4;
                let channel = status & 0x0F;
                let needs_two = matches!(hi, 0x8 | 0x9 | 0xA | 0xB | 0xE);
                let d1 = r.u8()?;
                let d2 = if needs_two { r.u8()? } else { 0 };
                if d1 & 0x80 != 0 || d2 & 0x80 != 0 {
                    return Err(r.corrupt("data byte with high bit set"));
                }
                if hi == 0x9 && d2 > 0 {
                    open.entry((channel, d1)).or_default().push(notes.len());
                    notes.push(RawNote {
                        on_tick: tick,
                        off_tick: None,
                        channel,
                        pitch: d1,
                        velocity: d2,
                    });
                } else if hi == 0x8 || (hi == 0x9 && d2 == 0) {
                    if let Some(fifo) = open.get_mut(&(channel, d1)) {
                        if !fifo.is_empty() {
                            let idx = fifo.remove(0);
                            notes[idx].off_tick = Some(tick);
                        }
                        // A note-off with nothing open is ignored.
                    }
                }
            }
        }
    }

    let mut dangling = 0;
    for fifo in open.values() {
        for &idx in fifo {
            notes[idx].off_tick = Some(tick);
            dangling += 1;
        }
    }
    Ok(dangling)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vlq(mut v: u32) -> Vec<u8> {
        let mut bytes = vec![(v & 0x7F) as u8];
        v >>= 7;
        while v > 0 {
            bytes.insert(0, 0x80 | (v & 0x7F) as u8);
            v >>= 7;
        }
        bytes
    }

    /// Track events as (delta, raw event bytes); end-of-track appended.
    fn track(events: &[(u32, Vec<u8>)]) -> Vec<u8> {
        let mut body = Vec::new();
        for (delta, ev) in events {
            body.extend(vlq(*delta));
            body.extend(ev);
        }
        body.extend([0x00, 0xFF, 0x2F, 0x00]);
        let mut chunk = b"MTrk".to_vec();
        chunk.extend((body.len() as u32).to_be_bytes());
        chunk.extend(body);
        chunk
    }

    fn smf(format: u16, division: u16, tracks: &[Vec<u8>]) -> Vec<u8> {
        let mut bytes = b"MThd".to_vec();
        bytes.extend(6u32.to_be_bytes());
        bytes.extend(format.to_be_bytes());
        bytes.extend((tracks.len() as u16).to_be_bytes());
        bytes.extend(division.to_be_bytes());
        for t in tracks {
            bytes.extend(t);
        }
        bytes
    }

    fn on(ch: u8, pitch: u8, vel: u8) -> Vec<u8> {
        vec![0x90 | ch, pitch, vel]
    }

    fn off(ch: u8, pitch: u8) -> Vec<u8> {
        vec![0x80 | ch, pitch, 0]
    }

    fn tempo(us: u32) -> Vec<u8> {
        let b = us.to_be_bytes();
        vec![0xFF, 0x51, 0x03, b[1], b[2], b[3]]
    }

    #[test]
    fn single_note_at_default_tempo() {
        let bytes = smf(0, 480, &[track(&[(0, on(5, 60, 90)), (480, off(5, 60))])]);
        let load = parse_smf(&bytes, "t").unwrap();
        assert_eq!(load.table.len(), 1);
        let e = load.table.events[0];
        assert_eq!((e.channel, e.pitch, e.velocity), (5, 60, 90));
        assert_eq!((e.onset_beats, e.duration_beats), (0.0, 1.0));
        assert_eq!((e.onset_sec, e.duration_sec), (0.0, 0.5));
        assert_eq!(load.stats.dangling_notes, 0);
        assert_eq!(load.stats.zero_length_notes, 0);
    }

    #[test]
    fn tempo_change_midway_through_a_note() {
        // 240 ticks at 500000 µs/qn then 240 at 1000000: 0.25 s + 0.5 s.
        let t = track(&[
            (0, tempo(500_000)),
            (0, on(0, 60, 64)),
            (240, tempo(1_000_000)),
            (240, off(0, 60)),
        ]);
        let load = parse_smf(&smf(0, 480, &[t]), "t").unwrap();
        let e = load.table.events[0];
        assert_eq!(e.duration_beats, 1.0);
        assert_eq!(e.duration_sec, 0.75);
    }

    #[test]
    fn tempo_track_applies_to_other_tracks() {
        let conductor = track(&[(0, tempo(1_000_000))]);
        let notes = track(&[(0, on(3, 72, 80)), (480, off(3, 72))]);
        let load = parse_smf(&smf(1, 480, &[conductor, notes]), "t").unwrap();
        assert_eq!(load.table.events[0].duration_sec, 1.0);
    }

    #[test]
    fn running_status_reuses_last_channel_status() {
        let mut body = Vec::new();
        body.extend(vlq(0));
        body.extend(on(2, 60, 70));
        body.extend(vlq(0));
        body.extend([64u8, 70]); // running status: another note-on
        body.extend(vlq(480));
        body.extend([60u8, 0]); // running status: note-on vel 0 = off
        body.extend(vlq(0));
        body.extend([64u8, 0]);
        body.extend([0x00, 0xFF, 0x2F, 0x00]);
        let mut chunk = b"MTrk".to_vec();
        chunk.extend((body.len() as u32).to_be_bytes());
        chunk.extend(body);
        let load = parse_smf(&smf(0, 480, &[chunk]), "t").unwrap();
        assert_eq!(load.table.len(), 2);
        assert!(load.table.events.iter().all(|e| e.duration_beats == 1.0));
    }

    #[test]
    fn overlapping_same_pitch_notes_pair_fifo() {
        let t = track(&[
            (0, on(0, 60, 90)),
            (10, on(0, 60, 91)),
            (10, off(0, 60)),
            (10, off(0, 60)),
        ]);
        let load = parse_smf(&smf(0, 480, &[t]), "t").unwrap();
        let mut durs: Vec<(u8, f64)> = load
            .table
            .events
            .iter()
            .map(|e| (e.velocity, (e.duration_beats * 480.0).round()))
            .collect();
        durs.sort_by_key(|(v, _)| *v);
        assert_eq!(durs, vec![(90, 20.0), (91, 20.0)]);
    }

    #[test]
    fn dangling_note_clamps_to_track_end() {
        let t = track(&[(0, on(0, 60, 90)), (960, on(0, 62, 90)), (0, off(0, 62))]);
        let load = parse_smf(&smf(0, 480, &[t]), "t").unwrap();
        assert_eq!(load.stats.dangling_notes, 1);
        // The dangling 60 is clamped to the end-of-track tick (960) and the
        // zero-length 62 is dropped.
        assert_eq!(load.stats.zero_length_notes, 1);
        assert_eq!(load.table.len(), 1);
        assert_eq!(load.table.events[0].pitch, 60);
        assert_eq!(load.table.events[0].duration_beats, 2.0);
    }

    #[test]
    fn orphan_note_off_is_ignored() {
        let t = track(&[(0, off(0, 60)), (0, on(0, 62, 90)), (480, off(0, 62))]);
        let load = parse_smf(&smf(0, 480, &[t]), "t").unwrap();
        assert_eq!(load.table.len(), 1);
    }

    #[test]
    fn rejects_format_2_and_smpte() {
        let t = track(&[]);
        assert!(matches!(
            parse_smf(&smf(2, 480, std::slice::from_ref(&t)), "t"),
            Err(IngestError::UnsupportedFormat { format: 2 })
        ));
        assert!(matches!(
            parse_smf(&smf(0, 0x8000 | 25, &[t]), "t"),
            Err(IngestError::UnsupportedDivision)
        ));
    }

    #[test]
    fn rejects_structural_damage() {
        assert!(matches!(
            parse_smf(b"not a midi file", "t"),
            Err(IngestError::CorruptFile { .. })
        ));
        // Chunk length overrunning the file.
        let mut bytes = smf(0, 480, &[]);
        bytes.extend(b"MTrk");
        bytes.extend(100u32.to_be_bytes());
        bytes.extend([0u8; 4]);
        assert!(matches!(
            parse_smf(&bytes, "t"),
            Err(IngestError::CorruptFile { .. })
        ));
        // A varint that never terminates.
        let body = vec![0xFF, 0xFF, 0xFF, 0xFF, 0xFF];
        let mut chunk = b"MTrk".to_vec();
        chunk.extend((body.len() as u32).to_be_bytes());
        chunk.extend(body);
        assert!(matches!(
            parse_smf(&smf(0, 480, &[chunk]), "t"),
            Err(IngestError::CorruptFile { .. })
        ));
    }

    #[test]
    fn skips_unknown_chunks() {
        let mut bytes = smf(0, 480, &[]);
        bytes.extend(b"XFIH");
        bytes.extend(3u32.to_be_bytes());
        bytes.extend([1, 2, 3]);
        bytes.extend(track(&[(0, on(0, 60, 90)), (480, off(0, 60))]));
        assert_eq!(parse_smf(&bytes, "t").unwrap().table.len(), 1);
    }

    #[test]
    fn times_round_to_four_decimals() {
        // 160 ticks of 480 at default tempo: 1/3 beat, 1/6 s.
        let t = track(&[(0, on(0, 60, 90)), (160, off(0, 60))]);
        let load = parse_smf(&smf(0, 480, &[t]), "t").unwrap();
        let e = load.table.events[0];
        assert_eq!(e.duration_beats, 0.3333);
        assert_eq!(e.duration_sec, 0.1667);
    }
}
