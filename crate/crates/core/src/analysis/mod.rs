//! Sampled weighted Hoelder norms, the reflection extension of band fields,
//! and the cross-width regularity probe.

mod norms;
mod probe;
mod reflection;

pub use norms::{
    holder_seminorm_estimate, parabolic_distance, weighted_norm_estimate, weighted_norm_with, DeltaRow, NormReport,
    NormRequest, PairSet, Sample, SampleId, SpaceTimeField, MIN_PAIR_BUDGET,
};
pub use probe::{probe_scenario, regularity_probe, ProbeReport, ProbeRow, PROBE_RATIO_LIMIT};
pub use reflection::{
    fold, reflect_extend, reflection_params, rescale_extend, verify_reflection, Cell, ReflectionReport,
    ReflectionSetup,
};
