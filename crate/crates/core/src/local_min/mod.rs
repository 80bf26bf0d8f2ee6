//! Semidefinite programs for second-order points and local minima.

mod builders;
mod search;
mod sos;

pub use builders::{build_complete_sdp, build_complete_sdp_with, build_sos_sdp, CompleteObjective, CompleteSdp, SosSdp};
pub use search::{
    complete_value, dual_value, epsilon_certificate, extract_triple, find_local_minimum, find_strict_local_minimum,
    has_second_order_point, intermediate_value, polish_critical_point, relative_interior_point, t_matrix,
    triple_residuals, CoordinateRange, EpsilonCertificate, LocalMinResult, RelativeInterior, SearchOptions,
    SecondOrderCheck, Stage, TripleResiduals, Verdict, DEGENERATE_WIDTH, EPSILON_ZERO, EXACT_MAX_DENOMINATOR,
    FALLBACK_BOX,
};
pub use sos::{gamma_membership, solve_sos, SosCertificate, MEMBERSHIP_TOL};
