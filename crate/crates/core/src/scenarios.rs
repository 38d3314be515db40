//! Pinned model pairs shipped with the crate.
//!
//! `standard_pair` is the 1-D affine pair used for distribution and
//! acceptance experiments; `prefix_divergent` differs mainly in the prefix
//! embedding, so only early positions see diverging conditions.
//! `matched_variance_pair` is the standard pair with the draft's chain
//! variances (all steps but the last) set equal to the target's.

use crate::autoregressive::{ARBackboneSpec, Activation, ToyModel};
use crate::config::ModelConfigFile;
use crate::diffusion::{DenoiserSpec, Nonlinearity, StepCoeffs};

pub const STANDARD_PAIR_JSON: &str = include_str!("../configs/standard_pair.json");
pub const PREFIX_DIVERGENT_JSON: &str = include_str!("../configs/prefix_divergent.json");
pub const MATCHED_VARIANCE_JSON: &str = include_str!("../configs/matched_variance_pair.json");

pub fn standard_pair() -> ModelConfigFile {
    ModelConfigFile::from_json_str(STANDARD_PAIR_JSON).expect("pinned config is valid")
}

pub fn prefix_divergent() -> ModelConfigFile {
    ModelConfigFile::from_json_str(PREFIX_DIVERGENT_JSON).expect("pinned config is valid")
}

pub fn matched_variance_pair() -> ModelConfigFile {
    ModelConfigFile::from_json_str(MATCHED_VARIANCE_JSON).expect("pinned config is valid")
}

fn zero_backbone(d: usize) -> ARBackboneSpec {
    ARBackboneSpec {
        prefix_embedding: vec![0.0; d],
        coupling: vec![0.0; d],
        offset: vec![0.0; d],
        activation: Activation::Identity,
    }
}

/// Two-step 1-D model whose output is exactly `N(mean, var)`: the last step
/// ignores `x_1` and the condition. The `t = 2` variance is 1, so a pair of
/// these has a variance product of exactly 1.
pub fn single_step_model(mean: f64, var: f64) -> ToyModel {
    let den = DenoiserSpec::new(
        vec![
            StepCoeffs::uniform(1, 0.0, 0.0, 0.0, 1.0),
            StepCoeffs::uniform(1, 0.0, 0.0, mean, var),
        ],
        Nonlinearity::Identity,
    )
    .expect("valid single-step denoiser");
    ToyModel::new(den, zero_backbone(1)).expect("valid backbone")
}

/// `(target, draft)` with effective output densities `p = N(p.0, p.1)` and
/// `q = N(q.0, q.1)`.
pub fn single_step_pair(p: (f64, f64), q: (f64, f64)) -> (ToyModel, ToyModel) {
    (single_step_model(p.0, p.1), single_step_model(q.0, q.1))
}
