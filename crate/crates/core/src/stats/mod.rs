//! Descriptive statistics per label, significance tests and the synthetic
//! corpus generator.

mod describe;
mod significance;
mod special;
mod synth;

pub use describe::{describe, describe_labels, DimStat, GroupSummary, LabelStats};
pub use significance::{approx_randomization, f_test, t_test, FTest, TTest};
pub use special::{f_upper_tail, inc_beta, ln_gamma, t_two_tailed};
pub use synth::{
    generate_synthetic_corpus, LabelSpec, SynthSpec, COMPLEX_FILLER, DATE_PHRASES, DURATION_PHRASES, LOC_NAMES,
    MISC_NAMES, ORG_NAMES, PER_NAMES, SIMPLE_FILLER, TIME_PHRASES,
};
