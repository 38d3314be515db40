#![allow(dead_code)]

use contspec::autoregressive::{ARBackboneSpec, Activation, ToyModel};
use contspec::diffusion::{DenoiserSpec, Nonlinearity, StepCoeffs};
use rand::Rng;

fn vec_in<R: Rng>(rng: &mut R, d: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..d).map(|_| rng.random_range(lo..hi)).collect()
}

pub fn random_denoiser<R: Rng>(rng: &mut R, steps: usize, d: usize, nl: Nonlinearity) -> DenoiserSpec {
    let steps = (0..steps)
        .map(|_| StepCoeffs {
            a: vec_in(rng, d, -1.0, 1.0),
            c: vec_in(rng, d, -0.5, 0.5),
            b: vec_in(rng, d, -0.5, 0.5),
            var: vec_in(rng, d, 0.01, 1.0),
        })
        .collect();
    DenoiserSpec::new(steps, nl).unwrap()
}

pub fn random_backbone<R: Rng>(rng: &mut R, d: usize) -> ARBackboneSpec {
    ARBackboneSpec {
        prefix_embedding: vec_in(rng, d, -1.0, 1.0),
        coupling: vec_in(rng, d, -0.8, 0.8),
        offset: vec_in(rng, d, -0.5, 0.5),
        activation: if rng.random_bool(0.5) {
            Activation::Identity
        } else {
            Activation::Tanh
        },
    }
}

/// Random `(target, draft)` pair with a shared step count and dimension.
pub fn random_pair<R: Rng>(rng: &mut R, steps: usize, d: usize) -> (ToyModel, ToyModel) {
    let nl = if rng.random_bool(0.5) {
        Nonlinearity::Identity
    } else {
        Nonlinearity::Tanh
    };
    let target = ToyModel::new(random_denoiser(rng, steps, d, nl), random_backbone(rng, d)).unwrap();
    let draft = ToyModel::new(random_denoiser(rng, steps, d, nl), random_backbone(rng, d)).unwrap();
    (target, draft)
}

pub fn random_cond<R: Rng>(rng: &mut R, d: usize) -> Vec<f64> {
    vec_in(rng, d, -1.0, 1.0)
}
