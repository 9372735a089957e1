//! Library surface of the `uie` command-line tool: dataset manifests,
//! image I/O, method dispatch, and one entry function per subcommand.
//! The binary in `main.rs` only parses flags, merges them with the
//! optional TOML config, and maps outcomes to exit codes (0 clean,
//! 1 per-item failures, 2 configuration error).

pub mod config;
pub mod enhance;
pub mod estimate;
pub mod eval;
pub mod ingest_cmd;
pub mod io;
pub mod manifest;
pub mod methods;
pub mod report;
pub mod synth;
pub mod train_cmd;

pub use config::{FileConfig, DEFAULT_RETINEX_SCALES};
pub use enhance::{run_enhance, EnhanceArgs};
pub use estimate::{run_estimate, EstimateArgs};
pub use eval::{run_eval, EvalArgs};
pub use ingest_cmd::{run_ingest_check, IngestArgs};
pub use manifest::{ingest, load_or_ingest, DatasetManifest, IngestReport, ManifestEntry, MANIFEST_VERSION};
pub use methods::{enhance_one, estimate_one, Method, MethodCtx};
pub use report::{write_report, ReportRow, REPORT_COLUMNS};
pub use synth::{run_synth, SynthArgs, TruthFile};
pub use train_cmd::{run_train, NetPreset, TrainArgs, LOSS_LOG_FILE};
