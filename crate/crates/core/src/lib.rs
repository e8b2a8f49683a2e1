//! Measuring how meaningful a set of binary attributes is.
//!
//! A discovered attribute set is compared with a human-labelled one through
//! reconstruction-error distances ([`reconstruct`]). The labelled set is split
//! into a representation `S1` and a holdout `S2` ([`select`]); injecting
//! random attributes into `S2` traces how the distance grows as meaning is
//! diluted by noise ([`interpolate`]). Inverting that curve at the discovered
//! set's distance gives the number of noise attributes it is "worth", which
//! maps to a 0–100 score ([`calibrate`]). [`analyze`] runs the whole
//! procedure over repeated random splits.

pub mod analyze;
pub mod calibrate;
pub mod error;
pub mod interpolate;
pub mod io;
pub mod matrix;
pub mod reconstruct;
pub mod rng;
pub mod select;
pub mod synth;

pub use analyze::{cooccurrence, evaluate_method, Calibrator, CooccurrenceMatrix, MeaningfulnessReport, MetricConfig};
pub use calibrate::{calibrate, gamma, gamma_combined, solve_gstar, CalibrationResult, Clamp};
pub use error::{Error, Result};
pub use interpolate::{gen_noise, trace_curve, InterpolationCurve, NoiseSpec};
pub use matrix::{validate, AttributeMatrix, AttributeVector, SubspaceSplit};
pub use reconstruct::{
    attribute_distance, correlation, delta, delta_cvx, delta_jp, greedy_match, simplex_project, DistanceKind, MatchSet,
    ReconstructionResult,
};
pub use select::{leave_one_out_errors, select_representation, SelectionConfig, Threshold};
pub use synth::{plant_meaningful, PlantSpec, Planted};
