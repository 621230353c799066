//! Monte Carlo engines: quenched walks, strip occupation, the composed
//! per-strip construction, tilted importance sampling, the environment
//! scanner, confined block returns and the dominant-event lower bound.
//!
//! Parallel work is split into fixed blocks with one random stream each
//! (see [`rng`]); results are merged in block order and are identical for
//! any worker count.

mod blocks;
mod decomposed;
mod dominant;
mod experiment;
mod importance;
mod occupation;
pub mod rng;
mod scan;
mod walk;

pub use blocks::{block_length, block_return_bound, BlockReport, CLT_LENGTHS};
pub use decomposed::{composed_endpoint_law, decomposed_rwpe_run, exact_endpoint_law, support_radius, total_variation, DecomposedReport};
pub use dominant::{dominant_event_bound, DominantEventReport, DominantOutcome};
pub use experiment::{quenched_rate_experiment, ExperimentReport, ExperimentRow};
pub use importance::{importance_sampling_return, return_estimator, return_estimators, ExactDp, Importance, Naive, ReturnEstimate, ReturnEstimator};
pub use occupation::{occupation_check, OccupationReport};
pub use scan::{ball_radius, first_hit_n, scan_environment, scan_for_g, search_radius, verify_hit, ScanMode, ScanReport, DEFAULT_SITE_CAP};
pub use walk::{run_walk, run_walk_with, WalkOptions, WalkRun};
