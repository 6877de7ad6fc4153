//! Shared DSP primitives used by the generators, the channel and the
//! evaluation code.

pub mod fft;
pub mod filter;
pub mod fir;
pub mod resample;
pub mod spectral;
pub mod window;

pub use fft::{fft, fft_in_place, ifft, ifft_in_place};
pub use filter::{design_filter, FilterKind, FilterSpec};
pub use fir::{convolve, filter_centered};
pub use resample::{rational_ratio, resample};
