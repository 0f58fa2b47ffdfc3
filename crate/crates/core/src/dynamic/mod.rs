//! Recursive reconstruction of slowly changing sparse sequences.
//!
//! At each frame the support estimate of the previous frame becomes the
//! known set `T` of the next solve. Baselines (independent BP per frame and
//! BP on measurement differences) run through the same driver.

mod model;
mod pipelines;

pub use model::{
    generate_sequence, measure_sequence, mle_params, Frame, MleParams, SequenceModel,
    SequenceVariant, B_P_FLOOR,
};
pub use pipelines::{
    cs_diff, dynamic_modcs, dynamic_regmodcs, run_sequence, simple_cs, DynamicOptions,
    DynamicTrace, FrameRecord, FrameStatus, Method, ThresholdRule,
};
