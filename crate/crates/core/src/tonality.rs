//! Pitch classes, the mode catalog, and tonal-centre estimation.
//!
//! A *candidate pair* is a `(tonic, mode)` combination whose pitch set
//! contains every pitch class of a melody fragment; scoring candidates with
//! per-degree weights and keeping the argmax is how the default analysis
//! labels a segment. Two cheaper strategies fix the tonic first (most played
//! note, or longest total duration) and then pick any mode that fits.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::ingest::NoteEvent;

/// Errors from pitch-class and mode computations.
#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum TonalityError {
    /// MIDI note number above 127.
    #[error("midi note number {0} out of range 0..=127")]
    OutOfRange(u16),
    /// A pitch class does not belong to the scale it was looked up in.
    #[error("pitch class {pc} is not a degree of {tonic} {mode}")]
    NotInScale {
        /// The offending pitch class.
        pc: PitchClass,
        /// Tonic of the scale.
        tonic: PitchClass,
        /// Mode of the scale.
        mode: ModeName,
    },
    /// A selection was requested over an empty candidate list.
    #[error("candidate list is empty")]
    EmptyCandidates,
    /// A tonal-centre estimate was requested for an empty melody.
    #[error("melody is empty")]
    EmptyMelody,
    /// An unknown mode name was parsed.
    #[error("unknown mode name {0:?}")]
    UnknownMode(String),
}

/// A pitch class, 0..=11 with C = 0.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PitchClass(u8);

/// Enharmonic display names, indexed by pitch class.
const PC_NAMES: [&str; 12] = [
    "C/B#", "C#/Db", "D", "D#/Eb", "E/Fb", "F/E#", "F#/Gb", "G", "G#/Ab", "A", "A#/Bb", "B/Cb",
];

impl PitchClass {
    /// Builds a pitch class from an index. Panics if `index >= 12`.
    pub fn new(index: u8) -> PitchClass {
        assert!(index < 12, "pitch class index {index} out of range");
        PitchClass(index)
    }

    /// Pitch class of a MIDI note number (note mod 12, C = 0).
    pub fn from_midi(midi: u16) -> Result<PitchClass, TonalityError> {
        if midi > 127 {
            return Err(TonalityError::OutOfRange(midi));
        }
        Ok(PitchClass((midi % 12) as u8))
    }

    /// Index in 0..=11.
    pub fn index(self) -> u8 {
        self.0
    }

    /// Enharmonic name, e.g. `"G#/Ab"` for 8.
    pub fn name(self) -> &'static str {
        PC_NAMES[self.0 as usize]
    }

    /// The pitch class `semitones` above (or below, if negative) this one.
    pub fn transpose(self, semitones: i32) -> PitchClass {
        PitchClass((self.0 as i32 + semitones).rem_euclid(12) as u8)
    }

    /// All twelve pitch classes in ascending order.
    pub fn all() -> impl Iterator<Item = PitchClass> {
        (0..12).map(PitchClass)
    }
}

impl fmt::Display for PitchClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl fmt::Debug for PitchClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PitchClass({} {})", self.0, self.name())
    }
}

/// Pitch class of a MIDI note number.
pub fn pitch_class(midi: u16) -> Result<PitchClass, TonalityError> {
    PitchClass::from_midi(midi)
}

/// Folds a MIDI note into octave 2: the note with the same pitch class in
/// 24..=35.
pub fn fold_to_octave2(midi: u16) -> Result<u8, TonalityError> {
    if midi > 127 {
        return Err(TonalityError::OutOfRange(midi));
    }
    Ok(24 + (midi % 12) as u8)
}

/// A set of pitch classes, stored as a 12-bit mask.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct PitchClassSet(u16);

impl PitchClassSet {
    /// The empty set.
    pub fn empty() -> PitchClassSet {
        PitchClassSet(0)
    }

    /// Adds a pitch class.
    pub fn insert(&mut self, pc: PitchClass) {
        self.0 |= 1 << pc.0;
    }

    /// Membership test.
    pub fn contains(self, pc: PitchClass) -> bool {
        self.0 & (1 << pc.0) != 0
    }

    /// True if every member of `self` is in `other`.
    pub fn is_subset(self, other: PitchClassSet) -> bool {
        self.0 & !other.0 == 0
    }

    /// Number of distinct pitch classes.
    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    /// True if the set has no members.
    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    /// Members in ascending pitch-class order.
    pub fn iter(self) -> impl Iterator<Item = PitchClass> {
        (0..12).map(PitchClass).filter(move |pc| self.contains(*pc))
    }

    /// The set with every member moved `semitones` up (mod 12).
    pub fn transpose(self, semitones: i32) -> PitchClassSet {
        self.iter().map(|pc| pc.transpose(semitones)).collect()
    }

    /// Raw 12-bit mask, bit k set iff pitch class k is a member.
    pub fn mask(self) -> u16 {
        self.0
    }
}

impl FromIterator<PitchClass> for PitchClassSet {
    fn from_iter<T: IntoIterator<Item = PitchClass>>(iter: T) -> PitchClassSet {
        let mut set = PitchClassSet::empty();
        for pc in iter {
            set.insert(pc);
        }
        set
    }
}

impl fmt::Debug for PitchClassSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

/// Names of the eleven catalog modes, in canonical catalog order.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeName {
    /// Major scale.
    IonianMajor,
    /// Dorian mode.
    Dorian,
    /// Phrygian mode.
    Phrygian,
    /// Lydian mode.
    Lydian,
    /// Mixolydian mode.
    Mixolydian,
    /// Aeolian mode.
    Aeolian,
    /// Natural minor; same pitch sets as aeolian, listed separately.
    Minor,
    /// Locrian mode.
    Locrian,
    /// Whole-tone scale (six degrees).
    WholeTone,
    /// Octatonic scale starting half step–whole step (eight degrees).
    Octatonic1,
    /// Octatonic scale starting whole step–half step (eight degrees).
    Octatonic2,
}

impl ModeName {
    /// All mode names in canonical catalog order.
    pub const ALL: [ModeName; 11] = [
        ModeName::IonianMajor,
        ModeName::Dorian,
        ModeName::Phrygian,
        ModeName::Lydian,
        ModeName::Mixolydian,
        ModeName::Aeolian,
        ModeName::Minor,
        ModeName::Locrian,
        ModeName::WholeTone,
        ModeName::Octatonic1,
        ModeName::Octatonic2,
    ];

    /// Catalog spelling of the name.
    pub fn as_str(self) -> &'static str {
        match self {
            ModeName::IonianMajor => "ionian_major",
            ModeName::Dorian => "dorian",
            ModeName::Phrygian => "phrygian",
            ModeName::Lydian => "lydian",
            ModeName::Mixolydian => "mixolydian",
            ModeName::Aeolian => "aeolian",
            ModeName::Minor => "minor",
            ModeName::Locrian => "locrian",
            ModeName::WholeTone => "whole_tone",
            ModeName::Octatonic1 => "octatonic1",
            ModeName::Octatonic2 => "octatonic2",
        }
    }

    /// Position in the canonical catalog order.
    pub fn catalog_index(self) -> usize {
        ModeName::ALL.iter().position(|m| *m == self).unwrap()
    }
}

impl fmt::Display for ModeName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModeName {
    type Err = TonalityError;

    fn from_str(s: &str) -> Result<ModeName, TonalityError> {
        ModeName::ALL
            .iter()
            .copied()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| TonalityError::UnknownMode(s.to_string()))
    }
}

/// A catalog mode: interval list plus per-degree profile weights.
#[derive(Debug, Clone, Copy)]
pub struct Mode {
    /// Which mode this is.
    pub name: ModeName,
    /// Semitone offsets of degrees II..N above the tonic, ascending; the
    /// tonic itself (offset 0, degree I) is implied.
    pub intervals: &'static [u8],
    /// Profile weight of each degree, index 0 = degree I.
    pub degree_weights: &'static [u8],
}

impl Mode {
    /// Number of scale degrees (intervals plus the tonic).
    pub fn degree_count(&self) -> usize {
        self.intervals.len() + 1
    }

    /// Pitch-class set of the mode rooted at `tonic`.
    pub fn pitch_set(&self, tonic: PitchClass) -> PitchClassSet {
        std::iter::once(0)
            .chain(self.intervals.iter().copied())
            .map(|i| tonic.transpose(i as i32))
            .collect()
    }
}

/// The full mode catalog in canonical order.
///
/// Diatonic weights single out the tonal functions of each mode: weight 5 for
/// the degrees that anchor it, 3 for colour tones, 1 for the rest. `minor`
/// duplicates `aeolian` in both intervals and weights, so on equal scores the
/// earlier catalog entry (`aeolian`) wins ties.
pub static MODE_CATALOG: [Mode; 11] = [
    Mode {
        name: ModeName::IonianMajor,
        intervals: &[2, 4, 5, 7, 9, 11],
        degree_weights: &[5, 1, 3, 5, 5, 3, 1],
    },
    Mode {
        name: ModeName::Dorian,
        intervals: &[2, 3, 5, 7, 9, 10],
        degree_weights: &[5, 1, 3, 3, 5, 1, 5],
    },
    Mode {
        name: ModeName::Phrygian,
        intervals: &[1, 3, 5, 7, 8, 10],
        degree_weights: &[5, 5, 3, 1, 5, 3, 1],
    },
    Mode {
        name: ModeName::Lydian,
        intervals: &[2, 4, 6, 7, 9, 11],
        degree_weights: &[5, 5, 1, 3, 5, 1, 3],
    },
    Mode {
        name: ModeName::Mixolydian,
        intervals: &[2, 4, 5, 7, 9, 10],
        degree_weights: &[5, 1, 1, 5, 3, 3, 5],
    },
    Mode {
        name: ModeName::Aeolian,
        intervals: &[2, 3, 5, 7, 8, 10],
        degree_weights: &[5, 1, 5, 1, 3, 5, 3],
    },
    Mode {
        name: ModeName::Minor,
        intervals: &[2, 3, 5, 7, 8, 10],
        degree_weights: &[5, 1, 5, 1, 3, 5, 3],
    },
    Mode {
        name: ModeName::Locrian,
        intervals: &[1, 3, 5, 6, 8, 10],
        degree_weights: &[5, 5, 1, 3, 5, 1, 3],
    },
    Mode {
        name: ModeName::WholeTone,
        intervals: &[2, 4, 6, 8, 10],
        degree_weights: &[3, 1, 1, 5, 5, 5],
    },
    Mode {
        name: ModeName::Octatonic1,
        intervals: &[1, 3, 4, 6, 7, 9, 10],
        degree_weights: &[3, 1, 5, 1, 5, 5, 1, 1],
    },
    Mode {
        name: ModeName::Octatonic2,
        intervals: &[2, 3, 5, 6, 8, 9, 11],
        degree_weights: &[1, 5, 5, 1, 5, 1, 1, 3],
    },
];

/// Catalog entry for a mode name.
pub fn mode(name: ModeName) -> &'static Mode {
    &MODE_CATALOG[name.catalog_index()]
}

/// Pitch-class set of `mode` rooted at `tonic`.
pub fn mode_pitch_set(name: ModeName, tonic: PitchClass) -> PitchClassSet {
    mode(name).pitch_set(tonic)
}

/// The mode catalog rendered as text, one mode per line:
/// `<name> intervals=<csv> weights=<csv>`.
pub fn mode_catalog_text() -> String {
    let mut out = String::new();
    out.push_str("# Mode catalog: intervals above the tonic and per-degree profile weights.\n");
    out.push_str("# <name> intervals=<semitones for degrees II..N> weights=<weight per degree I..N>\n");
    for m in &MODE_CATALOG {
        let csv = |xs: &[u8]| {
            xs.iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(",")
        };
        out.push_str(&format!(
            "{} intervals={} weights={}\n",
            m.name,
            csv(m.intervals),
            csv(m.degree_weights)
        ));
    }
    out
}

/// True if every pitch class in `pitches` belongs to `(tonic, mode)`.
pub fn is_feasible(pitches: PitchClassSet, tonic: PitchClass, name: ModeName) -> bool {
    pitches.is_subset(mode_pitch_set(name, tonic))
}

/// A `(tonic, mode)` pair that can contain some melody fragment.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub struct CandidatePair {
    /// Tonal centre.
    pub tonic: PitchClass,
    /// Mode rooted at that tonic.
    pub mode: ModeName,
}

/// A candidate pair with its profile score for a particular fragment.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct ScoredCandidate {
    /// Tonal centre.
    pub tonic: PitchClass,
    /// Mode rooted at that tonic.
    pub mode: ModeName,
    /// Sum of degree weights over every note occurrence of the fragment.
    pub score: u32,
}

/// All feasible `(tonic, mode)` pairs for a pitch-class set, in canonical
/// order: tonics 0..=11 ascending, modes in catalog order within a tonic.
pub fn enumerate_candidates(pitches: PitchClassSet) -> Vec<CandidatePair> {
    enumerate_candidates_in(pitches, &MODE_CATALOG)
}

/// `enumerate_candidates` over an arbitrary catalog slice. With the full
/// catalog every set of at most two pitch classes is feasible somewhere;
/// trimmed catalogs (used in tests) can make even dyads infeasible.
pub(crate) fn enumerate_candidates_in(
    pitches: PitchClassSet,
    catalog: &[Mode],
) -> Vec<CandidatePair> {
    let mut out = Vec::new();
    for tonic in PitchClass::all() {
        for m in catalog {
            if pitches.is_subset(m.pitch_set(tonic)) {
                out.push(CandidatePair {
                    tonic,
                    mode: m.name,
                });
            }
        }
    }
    out
}

/// A scale degree, 1-based (degree I = the tonic).
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Degree(u8);

const ROMAN: [&str; 8] = ["I", "II", "III", "IV", "V", "VI", "VII", "VIII"];

impl Degree {
    /// 1-based degree number.
    pub fn number(self) -> u8 {
        self.0
    }

    /// 0-based index into a mode's weight table.
    pub fn index(self) -> usize {
        self.0 as usize - 1
    }
}

impl fmt::Display for Degree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(ROMAN[self.index()])
    }
}

/// Scale degree of `pc` within `(tonic, mode)`.
pub fn degree_of(pc: PitchClass, tonic: PitchClass, name: ModeName) -> Result<Degree, TonalityError> {
    let rel = (pc.index() as i32 - tonic.index() as i32).rem_euclid(12) as u8;
    if rel == 0 {
        return Ok(Degree(1));
    }
    mode(name)
        .intervals
        .iter()
        .position(|&i| i == rel)
        .map(|idx| Degree(idx as u8 + 2))
        .ok_or(TonalityError::NotInScale { pc, tonic, mode: name })
}

/// Profile score of a melody fragment under `(tonic, mode)`: the sum of the
/// mode's degree weights over every note occurrence (repeats count each time).
pub fn profile_score(
    notes: &[NoteEvent],
    tonic: PitchClass,
    name: ModeName,
) -> Result<u32, TonalityError> {
    let m = mode(name);
    let mut total = 0u32;
    for note in notes {
        let d = degree_of(note.pitch_class(), tonic, name)?;
        total += u32::from(m.degree_weights[d.index()]);
    }
    Ok(total)
}

/// Scores every candidate for the fragment and picks the best.
///
/// Returns the winner and the full scored list in the candidates' original
/// order. Ties keep the earliest candidate in the list, which under canonical
/// enumeration order means lowest tonic first, then catalog mode order.
pub fn select_best_candidate(
    notes: &[NoteEvent],
    candidates: &[CandidatePair],
) -> Result<(ScoredCandidate, Vec<ScoredCandidate>), TonalityError> {
    if candidates.is_empty() {
        return Err(TonalityError::EmptyCandidates);
    }
    let mut scored = Vec::with_capacity(candidates.len());
    for c in candidates {
        let score = profile_score(notes, c.tonic, c.mode)?;
        scored.push(ScoredCandidate {
            tonic: c.tonic,
            mode: c.mode,
            score,
        });
    }
    let mut best = scored[0];
    for s in &scored[1..] {
        if s.score > best.score {
            best = *s;
        }
    }
    Ok((best, scored))
}

/// Tonal centre by play count: the pitch class with the most note
/// occurrences; ties go to the lowest pitch-class index.
pub fn tonal_centre_most_played(notes: &[NoteEvent]) -> Result<PitchClass, TonalityError> {
    if notes.is_empty() {
        return Err(TonalityError::EmptyMelody);
    }
    let mut counts = [0u64; 12];
    for n in notes {
        counts[n.pitch_class().index() as usize] += 1;
    }
    let mut best = 0;
    for i in 1..12 {
        if counts[i] > counts[best] {
            best = i;
        }
    }
    Ok(PitchClass(best as u8))
}

/// Tonal centre by sounding time: the pitch class with the largest summed
/// duration in seconds; ties go to the lowest pitch-class index.
pub fn tonal_centre_most_frequent(notes: &[NoteEvent]) -> Result<PitchClass, TonalityError> {
    if notes.is_empty() {
        return Err(TonalityError::EmptyMelody);
    }
    let mut totals = [0.0f64; 12];
    for n in notes {
        totals[n.pitch_class().index() as usize] += n.duration_sec;
    }
    let mut best = 0;
    for i in 1..12 {
        if totals[i] > totals[best] {
            best = i;
        }
    }
    Ok(PitchClass(best as u8))
}

/// The three tonal-centre strategies.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TonalCentreMethod {
    /// Score every feasible `(tonic, mode)` candidate and keep the argmax.
    Profiles,
    /// Fix the tonic to the most-played pitch class, then pick a fitting mode.
    MostPlayed,
    /// Fix the tonic to the pitch class with the longest summed duration.
    MostFrequent,
}

impl TonalCentreMethod {
    /// CLI spelling of the method.
    pub fn as_str(self) -> &'static str {
        match self {
            TonalCentreMethod::Profiles => "profiles",
            TonalCentreMethod::MostPlayed => "most-played",
            TonalCentreMethod::MostFrequent => "most-frequent",
        }
    }
}

impl fmt::Display for TonalCentreMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TonalCentreMethod {
    type Err = String;

    fn from_str(s: &str) -> Result<TonalCentreMethod, String> {
        match s {
            "profiles" => Ok(TonalCentreMethod::Profiles),
            "most-played" => Ok(TonalCentreMethod::MostPlayed),
            "most-frequent" => Ok(TonalCentreMethod::MostFrequent),
            other => Err(format!(
                "unknown method {other:?}; expected profiles, most-played or most-frequent"
            )),
        }
    }
}

/// How to pick among several modes that all fit a fixed tonic.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum ModeSelection {
    /// First feasible mode in catalog order.
    First,
    /// Uniformly random feasible mode from a seeded generator; the same seed
    /// always picks the same mode.
    SeededRandom(u64),
}

/// Finds a mode containing the fragment once the tonic is fixed.
///
/// Returns `None` when no catalog mode rooted at `tonic` contains every pitch
/// class of the fragment (reported downstream as `notknownmode`).
pub fn classify_scale_fixed_tonic(
    notes: &[NoteEvent],
    tonic: PitchClass,
    selection: ModeSelection,
) -> Option<ModeName> {
    let pitches: PitchClassSet = notes.iter().map(|n| n.pitch_class()).collect();
    let feasible: Vec<ModeName> = MODE_CATALOG
        .iter()
        .filter(|m| pitches.is_subset(m.pitch_set(tonic)))
        .map(|m| m.name)
        .collect();
    if feasible.is_empty() {
        return None;
    }
    match selection {
        ModeSelection::First => Some(feasible[0]),
        ModeSelection::SeededRandom(seed) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            Some(feasible[rng.random_range(0..feasible.len())])
        }
    }
}
