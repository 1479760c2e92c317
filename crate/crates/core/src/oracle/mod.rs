//! Direct numerical ground truth for the step problem.
//!
//! [`solver`] integrates `q_t + 6q²q_x + q_xxx = 0` on a periodic interval
//! with smoothed step data; [`extrema`] and [`compare`] measure envelopes and
//! wavelengths of the resulting slices against the asymptotic evaluator;
//! [`io`] reads and writes slices.

pub mod compare;
pub mod extrema;
pub mod io;
pub mod solver;

pub use compare::{
    compare_envelope, compare_slice, compare_wavelength, elliptic_window, plateau_mean, synthetic_slice, vanishing_peak,
    CompareConfig, EnvelopeReport, ExtremumError, SliceReport, SpacingError, WavelengthReport,
};
pub use extrema::{extract_extrema, Extremum, ExtremaList, ExtremumKind};
pub use io::{
    read_slice, read_slice_binary, read_slice_csv, slice_from_bytes, slice_from_csv, slice_to_bytes, slice_to_csv, write_slice,
    write_slice_binary, write_slice_csv, SliceFormat,
};
pub use solver::{initial_profile, solve_mkdv, BlowUp, FieldSlice, GridSpec, MkdvSolver, SimulationRun};
