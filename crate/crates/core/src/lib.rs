//! Exact analysis of rotated odometers: interval maps of the form
//! F = a ∘ R, where R permutes q equal subintervals and a is the dyadic
//! add-with-carry map.
//!
//! The pipeline: exact dyadic orbits ([`odometer`]) feed a finite cell
//! model ([`cells`]) whose chain structure renormalizes the system into an
//! eventually periodic sequence of substitutions ([`renorm`]). From there
//! the crate derives ordered Bratteli diagrams with a Vershik successor
//! action ([`diagram`]), spectral and ergodic-theoretic reports
//! ([`spectra`]), the translation-surface permutation dictionary
//! ([`surface`]), and aggregated machine-readable reports ([`report`]).
//!
//! All dynamical computation is integer-exact; floating point appears only
//! in explicitly approximate outputs (spectral radii, eigenvectors,
//! entropy values).

pub mod cells;
pub mod diagram;
pub mod dyadic;
pub mod error;
pub mod matrix;
pub mod odometer;
pub mod perm;
pub mod renorm;
pub mod report;
pub mod spectra;
pub mod surface;

pub use cells::{periodic_region, CellMap, PeriodicRegion, DEFAULT_CELL_LIMIT};
pub use diagram::{
    build_diagram, coding_check, fixed_point_prefix, heights, minimal_alphabet, stable_letters,
    telescope, CodingCheck, OrderedDiagram, PathPrefix, TelescopedSystem,
};
pub use dyadic::Dyadic;
pub use error::{CoreError, Result};
pub use matrix::{poly_string, IntegerMatrix};
pub use odometer::{NConvention, OrbitItinerary, RotatedOdometer};
pub use perm::Permutation;
pub use renorm::{
    covering_status, renorm_sequence, renorm_step, LevelRecord, PeriodicClass, RenormSeq,
    Substitution,
};
pub use report::{
    analyze, export_dot, report_diagram, report_json, survey, survey_csv, survey_sequential,
    AnalysisOptions, AnalysisReport, SurveyOptions, SurveyRow,
};
pub use spectra::{
    dyadic_scan, entropy_bound, frobenius_form, lebesgue_ergodic, measure_report, perron_data,
    rational_eigenvalue, DyadicScan, EntropyPoint, FrobeniusForm, MeasureReport, PerronData,
    RationalEigenvalueCheck, SeedChoice,
};
pub use surface::{flow_spec, slope_permutation, vertical_permutation, FlowSpec};
