//! Envelope axioms, threshold equations and explicit certificate constants.

pub mod certificate;
pub mod params;
pub mod roots;
pub mod zfun;

pub use certificate::{
    certificate, certificate_extended, corollary_bound, corollary_x0, epsilon, epsilon_log,
    log_corollary_bound_at, log_height, log_lower_bound_at, lower_bound, BoundCertificate,
    CaseConstants, CertificateValues,
};
pub use params::{q_envelope, r_envelope, AxiomParams, GrowthCase};
pub use roots::{solve_master_threshold, threshold_gap, MasterThreshold};
pub use zfun::{rho2, z_chain, z_inverse};
