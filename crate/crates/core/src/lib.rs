//! Continuous speculative decoding over Gaussian denoising chains.
//!
//! Tokens are real vectors produced by a `T`-step reverse diffusion chain.
//! A cheap draft model proposes tokens; the target model scores them on the
//! same noise, accepts or rejects by density ratio, and replaces rejected
//! tokens with draws from the residual distribution. The output sequence is
//! meant to follow the target model's distribution.
//!
//! Module map:
//! - [`math`]: log-space Gaussian primitives
//! - [`diffusion`]: denoising chains, noise records, variance products
//! - [`autoregressive`]: AR backbone, target-only generation, pre-filling
//! - [`specdec`]: the draft/verify/resample engine and run statistics
//! - [`oracle`]: grid integration, brute-force chain ratio, KS and chi-square
//! - [`bench`]: sweeps, trial histograms, walltime model
//! - [`config`]: model-config and results file formats

pub mod autoregressive;
pub mod bench;
pub mod config;
pub mod diffusion;
pub mod error;
pub mod math;
pub mod oracle;
pub mod rng;
pub mod scenarios;
pub mod specdec;

pub use error::{Error, Result};
