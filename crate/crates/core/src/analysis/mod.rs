//! Analyses composed from the lower modules: comparison bounds for conjugate
//! times, Morse-index pipelines and negative-curvature certificates.

mod comparison;
mod hyperbolic;
mod morse;

pub use comparison::{comparison_check, curvature_extremes, ComparisonReport, WindowCheck, MAX_CURVATURE_SAMPLES, WINDOW_STARTS};
pub use hyperbolic::{
    analyze_equilibrium, certify_negative_curvature, decay_rate, polish_equilibrium, CertificateKind, Equilibrium,
    HyperbolicityCertificate, EQUILIBRIUM_TOL, IMAGINARY_AXIS_TOL, NEGATIVITY_MARGIN, REDUCED_SAMPLES,
};
pub use morse::{morse_pipeline, MorseReport, DEFAULT_TRIM_FRACTION};
