//! `modus` — symbolic-music analysis from the command line.
//!
//! Exit codes: 0 success (including `--help`/`--version`), 1 bad input or
//! usage, 2 internal invariant violation.

use std::fs;
use std::path::PathBuf;

use anyhow::{anyhow, bail, Context, Result};
use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};

use modus::harmony::ChordCatalog;
use modus::ingest::load_auto;
use modus::pipeline::{analyze_with_stats, AnalysisOptions};
use modus::report::{
    agreement_text, compare_boundaries, parse_report_json, render_report, MeasureMap,
    ReferenceAnnotation, ReportFormat, ReportSection,
};
use modus::rhythm::figure_catalog_text;
use modus::tonality::{mode_catalog_text, TonalCentreMethod};

#[derive(Parser)]
#[command(name = "modus", version, about = "Symbolic-music analysis: tonal centres, segmentation, chords, polyrhythm")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Analyze a note table or Standard MIDI File and print a report.
    Analyze {
        /// Input file; the kind (text table or SMF) is sniffed from its bytes.
        input: PathBuf,
        /// Channel analysed as the predominant melody.
        #[arg(long, default_value_t = 5)]
        melody_channel: u8,
        /// Second channel given a melodic analysis.
        #[arg(long, default_value_t = 4)]
        secondary_channel: u8,
        /// Tonal-centre strategy.
        #[arg(long, value_enum, default_value_t = MethodArg::Profiles)]
        method: MethodArg,
        /// Which sections the text output shows (JSON always carries all).
        #[arg(long, value_enum, default_value_t = SectionArg::All)]
        report: SectionArg,
        /// Output format.
        #[arg(long, value_enum, default_value_t = FormatArg::Text)]
        format: FormatArg,
        /// Segment melodies by silence gaps of this many seconds instead of
        /// by feasibility.
        #[arg(long)]
        gap_threshold: Option<f64>,
        /// Custom chord template catalog file.
        #[arg(long)]
        chord_catalog: Option<PathBuf>,
        /// Relative tolerance for rhythmic figure quantization, in [0, 1).
        #[arg(long, default_value_t = 0.10)]
        rel_tol: f64,
        /// Seed for the fixed-tonic methods' mode pick.
        #[arg(long)]
        seed: Option<u64>,
        /// Write the report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print a built-in catalog in its text file format.
    Catalog {
        #[arg(value_enum)]
        which: CatalogArg,
    },
    /// Score a JSON report's segment boundaries against a reference
    /// annotation.
    Compare {
        /// JSON report produced by `analyze --format json`.
        report: PathBuf,
        /// Reference annotation: `label start_measure end_measure` lines.
        annotation: PathBuf,
        /// Measure map: `measure start_beats` lines.
        measure_map: PathBuf,
        /// Match window around each reference boundary, in beats.
        #[arg(long, default_value_t = 1.0)]
        tol_beats: f64,
        /// Which channel's melodic analysis to score (default: the first).
        #[arg(long)]
        channel: Option<u8>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Profiles,
    MostPlayed,
    MostFrequent,
}

impl From<MethodArg> for TonalCentreMethod {
    fn from(m: MethodArg) -> TonalCentreMethod {
        match m {
            MethodArg::Profiles => TonalCentreMethod::Profiles,
            MethodArg::MostPlayed => TonalCentreMethod::MostPlayed,
            MethodArg::MostFrequent => TonalCentreMethod::MostFrequent,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum SectionArg {
    Melodic,
    Harmonic,
    Rhythmic,
    All,
}

impl From<SectionArg> for ReportSection {
    fn from(s: SectionArg) -> ReportSection {
        match s {
            SectionArg::Melodic => ReportSection::Melodic,
            SectionArg::Harmonic => ReportSection::Harmonic,
            SectionArg::Rhythmic => ReportSection::Rhythmic,
            SectionArg::All => ReportSection::All,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Text,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum CatalogArg {
    Modes,
    Chords,
    Figures,
}

fn main() {
    let code = match std::panic::catch_unwind(cli_main) {
        Ok(code) => code,
        Err(_) => {
            eprintln!("internal error: invariant violated");
            2
        }
    };
    std::process::exit(code);
}

fn cli_main() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            return code;
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(err) => {
            eprintln!("error: {err:#}");
            1
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Analyze {
            input,
            melody_channel,
            secondary_channel,
            method,
            report,
            format,
            gap_threshold,
            chord_catalog,
            rel_tol,
            seed,
            out,
        } => {
            if melody_channel > 15 || secondary_channel > 15 {
                bail!("channels must lie in 0..=15");
            }
            let load = load_auto(&input)
                .with_context(|| format!("cannot load {}", input.display()))?;
            let catalog = match chord_catalog {
                Some(path) => Some(
                    ChordCatalog::load(&path)
                        .with_context(|| format!("cannot load chord catalog {}", path.display()))?,
                ),
                None => None,
            };
            let opts = AnalysisOptions {
                melody_channel,
                secondary_channel,
                method: method.into(),
                gap_threshold,
                chord_catalog: catalog,
                rel_tol,
                seed,
                overlap_eps: 0.0,
            };
            let analysis = analyze_with_stats(&load.table, &load.stats, &opts)?;
            let rendered = render_report(
                &analysis,
                report.into(),
                match format {
                    FormatArg::Text => ReportFormat::Text,
                    FormatArg::Json => ReportFormat::Json,
                },
            );
            emit(out.as_deref(), &rendered)
        }
        Command::Catalog { which } => {
            let text = match which {
                CatalogArg::Modes => mode_catalog_text(),
                CatalogArg::Chords => ChordCatalog::default_catalog().to_text(),
                CatalogArg::Figures => figure_catalog_text(),
            };
            print!("{text}");
            Ok(())
        }
        Command::Compare {
            report,
            annotation,
            measure_map,
            tol_beats,
            channel,
        } => {
            let text = fs::read_to_string(&report)
                .with_context(|| format!("cannot read {}", report.display()))?;
            let doc = parse_report_json(&text)
                .with_context(|| format!("cannot parse {}", report.display()))?;
            let melodic = match channel {
                Some(ch) => doc
                    .melodic
                    .iter()
                    .find(|m| m.channel == ch)
                    .ok_or_else(|| anyhow!("report holds no analysis for channel {ch}"))?,
                None => doc
                    .melodic
                    .first()
                    .ok_or_else(|| anyhow!("report holds no melodic analysis"))?,
            };
            let annotation = ReferenceAnnotation::load(&annotation)
                .with_context(|| format!("cannot load {}", annotation.display()))?;
            let measure_map = MeasureMap::load(&measure_map)
                .with_context(|| format!("cannot load {}", measure_map.display()))?;
            let predicted: Vec<f64> = melodic.segments.iter().map(|s| s.start_beats).collect();
            let agreement = compare_boundaries(&predicted, &annotation, &measure_map, tol_beats)?;
            print!("{}", agreement_text(&agreement));
            Ok(())
        }
    }
}

fn emit(out: Option<&std::path::Path>, rendered: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, rendered)
            .with_context(|| format!("cannot write {}", path.display())),
        None => {
            print!("{rendered}");
            Ok(())
        }
    }
}
