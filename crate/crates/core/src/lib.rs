//! Repair and identification pipeline for skeleton-joint time series captured
//! by low-resolution depth sensors.
//!
//! The crate turns per-frame pixel/range joint detections into world-coordinate
//! tracks, repairs dropouts and impulse jumps with a short-memory median rule,
//! smooths the result with a robust local linear smoother, extracts
//! inter-joint displacement features, estimates the gait cycle from the
//! ankle-to-ankle distance, and identifies subjects with a KNN classifier over
//! cycle-length feature windows.
//!
//! Modules mirror the pipeline stages:
//!
//! * [`skeleton`] — joint/track containers and the zero-as-missing convention
//! * [`io`] — JSONL/CSV sequence ingestion and artifact serialization
//! * [`projection`] — pixel/range to world-coordinate conversion
//! * [`repair`] — median-rule track repair
//! * [`smoothing`] — robust local linear (tricube + bisquare) smoother
//! * [`features`] — inter-joint displacement feature vectors
//! * [`cycle`] — gait-cycle estimation and window concatenation
//! * [`classify`] — KNN identification and evaluation reports
//! * [`synth`] — synthetic walker generator with a corruption model
//! * [`pipeline`] — end-to-end orchestration and stage artifacts

pub mod classify;
pub mod cycle;
mod error;
pub mod features;
pub mod io;
pub mod pipeline;
pub mod projection;
pub mod repair;
pub mod skeleton;
pub mod smoothing;
pub mod synth;

pub use error::{Error, Result};
