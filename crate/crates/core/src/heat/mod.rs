//! Heat semigroups on Dirichlet exhaustions and checks of the inequalities
//! satisfied by solutions of the heat equation.

pub mod dirichlet;
pub mod expm;
pub mod field;
pub mod inequalities;
pub mod probe;
pub mod witness;

pub use dirichlet::{dirichlet_restriction, DirichletSystem};
pub use expm::{semigroup_apply, Semigroup};
pub use field::{heat_residual, DtMode, HeatField, HeatSource, Provenance, SemigroupSource, ZeroSolution};
pub use inequalities::{
    check_basic_estimate, check_caccioppoli, check_grigoryan, check_main_estimate, grigoryan_constants, Cutoff,
    GrigoryanConstants, InequalityReport, MainEstimateParams, StaticCutoff,
};
pub use probe::{
    completeness_probe, Completeness, CompletenessReport, ProbeOptions, ProbeRow, ProbeVerdict, DEFAULT_RTOL,
    DEFAULT_TIMES,
};
pub use witness::{check_omori_yau_witness, lift_certificate, TailBound, WitnessCertificate, WitnessVerdict};
