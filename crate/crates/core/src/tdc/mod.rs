//! Start-stop coincidence processing on timestamp records.
//!
//! D1 is the start channel; D2, D3 and D4 are stops. A window of width τ_w
//! is centered on the start and closed: a stop at `t` belongs to the start
//! at `s` when `2|t − s| ≤ τ_w` in integer picoseconds.

mod fit;
mod fourfold;
mod histogram;

pub use fit::{estimate_tau_c, fit_gaussian, tau_c_from_fwhm, GaussianFit, MIN_FIT_COUNTS};
pub use fourfold::{
    classify_fourfolds, extract_fourfolds, extract_fourfolds_with, extract_streams, sweep_windows,
    write_fourfolds, FourfoldEvent, StopPolicy, Streams, WindowResult,
};
pub use histogram::{histogram_times, start_stop_histogram, StartStopHistogram};
