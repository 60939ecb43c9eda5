//! Analysis tools for the PSED detector: restricted isometry constants,
//! MMP recovery guarantees, large-system SINR/MSE limits, multiplication
//! counts, and the stream-correlation and error-count properties of LMMSE.

mod asymptotic;
mod complexity;
mod correlation;
mod guarantees;
mod rip;
pub mod special;

pub use asymptotic::{
    asymptotic_sinr, error_count_concentration, f_functional, mse_conv_asymptotic, mse_psed_bound,
    mse_psed_closed_form, pe_bpsk, trace_inverse_limit, MseBoundForm,
};
pub use complexity::{complexity_count, inversion_mults, ComplexityDetector, ComplexityReport};
pub use correlation::{stream_correlation, stream_correlation_lemma};
pub use guarantees::{
    mmp_exact_condition, mmp_exact_threshold, mmp_support_threshold, support_recovery_prob, GuaranteeReport,
};
pub use rip::{binomial, rip_constant, rip_constant_sampled, subset_delta, RipEstimate, EXHAUSTIVE_BUDGET, SAMPLED_SUBSETS};
