//! Problem data: kernels, gradient reaction, boundary data and scenarios.

mod boundary;
mod kernel;
mod reaction;
mod scenario;

pub use boundary::{BoundaryData, InitialProfile, TimeProfile};
pub use kernel::{
    nonlocal_reduced, nonlocal_term, verify_kernel_assumptions, KernelMatrix, KernelReport, KernelShape, KernelSpec,
};
pub use reaction::{psi_eval, ReactionSpec};
pub use scenario::{
    AnalysisParams, AnalysisSection, BoundarySection, CurveParams, CurveSection, DomainSection, KernelSection,
    Numerics, NumericsSection, ReactionSection, Scenario, ScenarioFile, TransverseNodes,
};
