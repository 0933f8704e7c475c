//! Brute-force ground truth: least metastable witnesses, checks of rates of
//! (asymptotic) decreasingness, sampled lemma checks and tightness tables.
//!
//! Verdicts are three-valued. A bound like `2^8191` cannot be scanned, but a
//! witness found below both the bound and the scan cap still certifies it;
//! `fail` is only reported after an exhaustive scan up to the bound.

mod desc;
mod lemmas;
mod report;
mod source;
mod tree;
mod witness;

pub use desc::{
    random_head_harmonic, random_nonincreasing, random_nonnegative, BuildOptions, SequenceDesc,
    RANDOM_DENOMINATOR,
};
pub use lemmas::{extract_mu, step_size_report, verify_scaling_lemma, MuExtraction, StepSizeReport};
pub use report::{tightness_report, TightnessRow};
pub use source::{SequenceSource, Tail, Value};
pub use witness::{
    check_asym_dec, check_infimum_lemma, check_metastability_bound, min_witness, CheckOutcome,
    Verdict, WitnessOutcome, WitnessSearchResult,
};
