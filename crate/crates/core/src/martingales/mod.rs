//! Martingale families satisfying the conditional Bernstein condition, and
//! the per-path objects of the conjugate-measure argument.
//!
//! All four families have symmetric steps with closed-form conditional laws,
//! so conditional moments, log-MGFs `Ψ` and tilted means `bᵢ(λ)` are exact.

mod augment;
mod conditions;
mod conjugate;
mod enumerate;
mod model;
mod path;

pub use augment::bolthausen_augment;
pub use conditions::{verify_a1, verify_a2, A1Report, A2Report, MomentMargin};
pub use conjugate::{conjugate_stats, lemma_checks, path_laws, ConjugatePathStats, InequalityCheck, LemmaReport};
pub use enumerate::{enumerate_outcomes, exact_cdf, exact_tail, Outcome, MAX_EXHAUSTIVE_OUTCOMES};
pub use model::{MartingaleModel, NoiseFamily, StepLaw, TiltedLaw};
pub(crate) use path::check_tilt;
pub use path::{simulate_path, simulate_tilted_path, PathSample, Simulator, Terminal};
