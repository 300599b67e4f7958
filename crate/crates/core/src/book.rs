//! Compiles the guide's code samples as doctests so `book/` and the crate
//! can't drift apart. Chapters with no Rust samples still pass trivially.

macro_rules! chapter {
    ($name:ident, $path:literal) => {
        #[doc = include_str!($path)]
        mod $name {}
    };
}

chapter!(overview, "../../../book/src/overview.md");
chapter!(ingestion, "../../../book/src/ingestion.md");
chapter!(modes, "../../../book/src/modes.md");
chapter!(tonal_centres, "../../../book/src/tonal-centres.md");
chapter!(segmentation, "../../../book/src/segmentation.md");
chapter!(harmony, "../../../book/src/harmony.md");
chapter!(rhythm, "../../../book/src/rhythm.md");
chapter!(reports, "../../../book/src/reports.md");
chapter!(cli, "../../../book/src/cli.md");
