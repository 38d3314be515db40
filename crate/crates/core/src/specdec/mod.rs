//! Continuous speculative decoding.
//!
//! One step drafts up to `gamma` tokens with the draft model, scores each with
//! the target on the same noise record, accepts the longest prefix passing the
//! ratio test, and replaces the first rejected draft with a token drawn from
//! the normalized residual `max(0, p - q)` by acceptance-rejection on the
//! target's own chain. A fully accepted step appends one bonus target token.

mod stats;

pub use stats::{PositionCounts, PositionRecord, RunAlpha, RunStats, StatsSummary, StepRecord};

use std::ops::Range;

use rand::Rng;
use rand_distr::Open01;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::autoregressive::{prefill, prefill_count, Origin, SequenceState, ToyModel};
use crate::diffusion::{draw_noise_record, log_sigma_product, run_chain, DenoisingTrajectory, NoiseRecord};
use crate::error::{check_dim, Error, Result};
use crate::math::{self, Token};
use crate::rng::{self, label, PositionStreams};

pub const DEFAULT_MAX_RESAMPLE_TRIALS: u32 = 10_000;

fn default_true() -> bool {
    true
}

fn default_max_trials() -> u32 {
    DEFAULT_MAX_RESAMPLE_TRIALS
}

/// Run parameters. Step count and dimension come from the models.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpecDecodeConfig {
    pub gamma: usize,
    pub len: usize,
    #[serde(default)]
    pub rho: f64,
    pub temperature: f64,
    #[serde(default = "default_max_trials")]
    pub max_resample_trials: u32,
    pub seed: u64,
    /// Share `x_T` and every `eps_t` between draft and target chains.
    /// Disabling it is an ablation.
    #[serde(default = "default_true")]
    pub shared_noise: bool,
    /// Include the telescoped variance product in the ratio. Given shared
    /// noise the exact conditional ratio is the last-step ratio alone, so the
    /// output follows the target only when the product is 1 (equal chain
    /// variances) or this is off.
    #[serde(default = "default_true")]
    pub sigma_term: bool,
}

impl Default for SpecDecodeConfig {
    fn default() -> Self {
        SpecDecodeConfig {
            gamma: 4,
            len: 16,
            rho: 0.0,
            temperature: 1.0,
            max_resample_trials: DEFAULT_MAX_RESAMPLE_TRIALS,
            seed: 0,
            shared_noise: true,
            sigma_term: true,
        }
    }
}

impl SpecDecodeConfig {
    pub fn validate(&self) -> Result<()> {
        if self.gamma == 0 {
            return Err(Error::usage("gamma must be at least 1"));
        }
        if self.len == 0 {
            return Err(Error::usage("sequence length must be at least 1"));
        }
        if self.max_resample_trials == 0 {
            return Err(Error::usage("max_resample_trials must be at least 1"));
        }
        if !(self.temperature > 0.0 && self.temperature.is_finite()) {
            return Err(Error::usage(format!(
                "temperature must be > 0, got {}",
                self.temperature
            )));
        }
        prefill_count(self.rho, self.len)?;
        Ok(())
    }
}

pub fn check_pair(target: &ToyModel, draft: &ToyModel) -> Result<()> {
    if target.num_steps() != draft.num_steps() {
        return Err(Error::Config(format!(
            "draft has {} denoising steps, target has {}; aligned chains need equal T",
            draft.num_steps(),
            target.num_steps()
        )));
    }
    check_dim(target.dim(), draft.dim())
}

/// One drafted token and everything needed to score it.
#[derive(Debug, Clone)]
pub struct DraftEntry {
    pub token: Token,
    pub cond_q: Vec<f64>,
    pub noise: NoiseRecord,
    pub traj_q: DenoisingTrajectory,
    pub log_q: f64,
}

pub type DraftBundle = Vec<DraftEntry>;

#[derive(Debug, Clone, PartialEq)]
pub struct VerificationOutcome {
    pub start: usize,
    pub drafted: usize,
    /// Accepted draft count `n`.
    pub accepted: usize,
    pub log_ratios: Vec<f64>,
    pub uniforms: Vec<f64>,
    /// Present iff `accepted < drafted`.
    pub resampled: Option<(Token, u32)>,
    pub bonus: Option<Token>,
    pub target_chain_calls: u64,
    pub draft_chain_calls: u64,
}

fn ratio_terms(
    traj_q: &DenoisingTrajectory,
    traj_p: &DenoisingTrajectory,
    target: &ToyModel,
    cond_p: &[f64],
    x_0: &[f64],
    temperature: f64,
    sigma_term: bool,
) -> Result<f64> {
    let log_sigma = if sigma_term {
        log_sigma_product(traj_q, traj_p)?
    } else {
        0.0
    };
    let log_p = crate::diffusion::last_step_logpdf(&target.denoiser, cond_p, traj_p.x1().as_slice(), x_0, temperature)?;
    let log_q = math::gaussian_logpdf(x_0, &traj_q.last_step().params)?;
    Ok(log_sigma + log_p - log_q)
}

/// `ln(p/q)` for a drafted token: the target chain is replayed on the draft's
/// noise record, and the ratio is the variance product over `t = 2..T` times
/// the ratio of the two last-step densities at `x_0`.
pub fn acceptance_log_ratio(
    traj_q: &DenoisingTrajectory,
    target: &ToyModel,
    cond_p: &[f64],
    noise: &NoiseRecord,
    x_0: &Token,
    temperature: f64,
) -> Result<(f64, DenoisingTrajectory)> {
    if noise.num_steps() != traj_q.num_steps() || noise.dim() != traj_q.dim() {
        return Err(Error::usage("noise record does not match the draft trajectory"));
    }
    let traj_p = run_chain(&target.denoiser, cond_p, noise, temperature)?;
    let lr = ratio_terms(traj_q, &traj_p, target, cond_p, x_0.as_slice(), temperature, true)?;
    Ok((lr, traj_p))
}

/// Number of leading drafts accepted: the index before the first `i` with
/// `r_i > exp(log_ratio_i)`, or the full length if none.
pub fn verify_drafts(log_ratios: &[f64], uniforms: &[f64]) -> usize {
    assert_eq!(log_ratios.len(), uniforms.len(), "one uniform per draft");
    log_ratios
        .iter()
        .zip(uniforms)
        .position(|(&lr, &r)| lr < 0.0 && r > lr.exp())
        .unwrap_or(log_ratios.len())
}

/// Threshold `max(0, Σp - q) / (Σp)` in log form.
fn resample_threshold(log_sigma: f64, log_p: f64, log_q: f64) -> f64 {
    (1.0 - (log_q - log_sigma - log_p).exp()).max(0.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Resampled {
    pub token: Token,
    pub trials: u32,
}

/// Draw from the residual `max(0, p - q)` by acceptance-rejection with the
/// target as proposal and bound `M = 1/Z`, which makes the threshold
/// integral-free.
///
/// Each trial uses a fresh noise record; the draft chain is re-run on the
/// same record only to evaluate `q` and the variance product.
#[allow(clippy::too_many_arguments)]
pub fn rejection_resample<R: Rng + ?Sized>(
    target: &ToyModel,
    cond_p: &[f64],
    draft: &ToyModel,
    cond_q: &[f64],
    temperature: f64,
    rng: &mut R,
    max_trials: u32,
) -> Result<Resampled> {
    rejection_resample_with(target, cond_p, draft, cond_q, temperature, rng, max_trials, true, true)
}

#[allow(clippy::too_many_arguments)]
fn rejection_resample_with<R: Rng + ?Sized>(
    target: &ToyModel,
    cond_p: &[f64],
    draft: &ToyModel,
    cond_q: &[f64],
    temperature: f64,
    rng: &mut R,
    max_trials: u32,
    shared_noise: bool,
    sigma_term: bool,
) -> Result<Resampled> {
    check_pair(target, draft)?;
    let (t_steps, d) = (target.num_steps(), target.dim());
    let mut threshold_sum = 0.0;
    for trial in 1..=max_trials {
        let noise = draw_noise_record(t_steps, d, rng);
        let traj_p = run_chain(&target.denoiser, cond_p, &noise, temperature)?;
        let traj_q = if shared_noise {
            run_chain(&draft.denoiser, cond_q, &noise, temperature)?
        } else {
            let other = draw_noise_record(t_steps, d, rng);
            run_chain(&draft.denoiser, cond_q, &other, temperature)?
        };
        let candidate = traj_p.output();
        let log_sigma = if sigma_term {
            log_sigma_product(&traj_q, &traj_p)?
        } else {
            0.0
        };
        let log_p = traj_p.last_step_logpdf();
        let log_q = crate::diffusion::last_step_logpdf(
            &draft.denoiser,
            cond_q,
            traj_q.x1().as_slice(),
            candidate.as_slice(),
            temperature,
        )?;
        let alpha_s = resample_threshold(log_sigma, log_p, log_q);
        threshold_sum += alpha_s;
        let eps: f64 = rng.sample(Open01);
        if eps <= alpha_s {
            return Ok(Resampled {
                token: candidate.clone(),
                trials: trial,
            });
        }
    }
    let z_estimate = threshold_sum / max_trials as f64;
    Err(Error::ResampleExhausted {
        trials: max_trials,
        z_estimate,
        bound: 1.0 / z_estimate,
    })
}

/// Draft `min(gamma, len - |state|)` tokens autoregressively.
pub fn draft_tokens(
    draft: &ToyModel,
    state: &SequenceState,
    count: usize,
    temperature: f64,
    streams: &mut PositionStreams,
) -> Result<DraftBundle> {
    let mut bundle: DraftBundle = Vec::with_capacity(count);
    for j in 0..count {
        let pos = state.len() + j;
        let prev = bundle.last().map(|e| &e.token).or(state.last());
        let cond_q = draft.backbone.next_condition(prev);
        let noise = draw_noise_record(draft.num_steps(), draft.dim(), streams.at(pos));
        let traj_q = run_chain(&draft.denoiser, &cond_q, &noise, temperature).map_err(|e| e.at_position(pos))?;
        let token = traj_q.output().clone();
        let log_q = traj_q.last_step_logpdf();
        bundle.push(DraftEntry {
            token,
            cond_q,
            noise,
            traj_q,
            log_q,
        });
    }
    Ok(bundle)
}

/// One draft/verify/resample round. Appends to `state` and reports what happened.
pub fn speculative_step(
    target: &ToyModel,
    draft: &ToyModel,
    state: &mut SequenceState,
    config: &SpecDecodeConfig,
    streams: &mut PositionStreams,
) -> Result<VerificationOutcome> {
    let start = state.len();
    if start >= config.len {
        return Err(Error::usage("sequence already at full length"));
    }
    let tau = config.temperature;
    let count = config.gamma.min(config.len - start);
    let bundle = draft_tokens(draft, state, count, tau, streams)?;

    let mut log_ratios = Vec::with_capacity(count);
    let mut conds_p = Vec::with_capacity(count + 1);
    for (j, entry) in bundle.iter().enumerate() {
        let pos = start + j;
        let prev = if j == 0 {
            state.last()
        } else {
            Some(&bundle[j - 1].token)
        };
        let cond_p = target.backbone.next_condition(prev);
        let traj_p = if config.shared_noise {
            run_chain(&target.denoiser, &cond_p, &entry.noise, tau)
        } else {
            let noise = draw_noise_record(target.num_steps(), target.dim(), streams.at(pos));
            run_chain(&target.denoiser, &cond_p, &noise, tau)
        }
        .map_err(|e| e.at_position(pos))?;
        let lr = ratio_terms(
            &entry.traj_q,
            &traj_p,
            target,
            &cond_p,
            entry.token.as_slice(),
            tau,
            config.sigma_term,
        )?;
        log_ratios.push(lr);
        conds_p.push(cond_p);
    }
    let uniforms: Vec<f64> = (0..count).map(|j| streams.at(start + j).sample(Open01)).collect();
    let n = verify_drafts(&log_ratios, &uniforms);

    let mut outcome = VerificationOutcome {
        start,
        drafted: count,
        accepted: n,
        log_ratios,
        uniforms,
        resampled: None,
        bonus: None,
        target_chain_calls: count as u64,
        draft_chain_calls: count as u64,
    };

    for entry in &bundle[..n] {
        state.push(entry.token.clone(), Origin::DraftAccepted);
    }
    if n < count {
        let pos = start + n;
        let res = rejection_resample_with(
            target,
            &conds_p[n],
            draft,
            &bundle[n].cond_q,
            tau,
            streams.at(pos),
            config.max_resample_trials,
            config.shared_noise,
            config.sigma_term,
        )
        .map_err(|e| e.at_position(pos))?;
        outcome.target_chain_calls += u64::from(res.trials);
        outcome.draft_chain_calls += u64::from(res.trials);
        state.push(res.token.clone(), Origin::Resampled);
        outcome.resampled = Some((res.token, res.trials));
    } else if state.len() < config.len {
        let pos = state.len();
        let cond = target.backbone.next_condition(state.last());
        let traj = target
            .sample(&cond, tau, streams.at(pos))
            .map_err(|e| e.at_position(pos))?;
        outcome.target_chain_calls += 1;
        state.push(traj.output().clone(), Origin::TargetFallthrough);
        outcome.bonus = Some(traj.output().clone());
    }
    Ok(outcome)
}

/// Pre-fill, then speculative steps until the sequence reaches `config.len`.
pub fn generate(
    target: &ToyModel,
    draft: &ToyModel,
    config: &SpecDecodeConfig,
    streams: &mut PositionStreams,
    replicate: u64,
) -> Result<(SequenceState, RunStats)> {
    config.validate()?;
    check_pair(target, draft)?;
    let tau = config.temperature;
    let mut state = prefill(target, config.len, config.rho, streams, tau)?;
    let prefilled = state.len();
    let mut positions: Vec<PositionRecord> = (0..prefilled)
        .map(|position| PositionRecord {
            position,
            origin: Origin::Prefilled,
            log_ratio: None,
            uniform: None,
            trials: None,
        })
        .collect();
    let mut stats = RunStats {
        replicate,
        seed: streams.seed(),
        gamma: config.gamma,
        len: config.len,
        prefilled,
        positions: Vec::new(),
        steps: Vec::new(),
        target_chain_calls: prefilled as u64,
        draft_chain_calls: 0,
    };
    while state.len() < config.len {
        let out = speculative_step(target, draft, &mut state, config, streams)?;
        for j in 0..out.accepted {
            positions.push(PositionRecord {
                position: out.start + j,
                origin: Origin::DraftAccepted,
                log_ratio: Some(out.log_ratios[j]),
                uniform: Some(out.uniforms[j]),
                trials: None,
            });
        }
        let tail = out.start + out.accepted;
        if let Some((_, trials)) = &out.resampled {
            positions.push(PositionRecord {
                position: tail,
                origin: Origin::Resampled,
                log_ratio: Some(out.log_ratios[out.accepted]),
                uniform: Some(out.uniforms[out.accepted]),
                trials: Some(*trials),
            });
        } else if out.bonus.is_some() {
            positions.push(PositionRecord {
                position: tail,
                origin: Origin::TargetFallthrough,
                log_ratio: None,
                uniform: None,
                trials: None,
            });
        }
        stats.target_chain_calls += out.target_chain_calls;
        stats.draft_chain_calls += out.draft_chain_calls;
        stats.steps.push(StepRecord {
            start: out.start,
            drafted: out.drafted,
            accepted: out.accepted,
            log_ratios: out.log_ratios,
            uniforms: out.uniforms,
            resample_trials: out.resampled.map(|(_, t)| t),
            bonus: out.bonus.is_some(),
        });
    }
    stats.positions = positions;
    Ok((state, stats))
}

/// Position streams for replicate `r` of a run seeded with `seed`.
pub fn replicate_streams(seed: u64, replicate: u64) -> PositionStreams {
    PositionStreams::new(rng::derive_seed(seed, &[label::REPLICATE, replicate]))
}

/// Run `replicates` independent generations. Output order follows the
/// replicate index, independent of worker scheduling.
pub fn run_replicates(
    target: &ToyModel,
    draft: &ToyModel,
    config: &SpecDecodeConfig,
    replicates: u64,
) -> Result<Vec<(SequenceState, RunStats)>> {
    run_replicate_range(target, draft, config, 0..replicates)
}

/// Replicates `range` of a larger run; concatenating consecutive ranges gives
/// the same result as one `run_replicates` call.
pub fn run_replicate_range(
    target: &ToyModel,
    draft: &ToyModel,
    config: &SpecDecodeConfig,
    range: Range<u64>,
) -> Result<Vec<(SequenceState, RunStats)>> {
    range
        .into_par_iter()
        .map(|r| generate(target, draft, config, &mut replicate_streams(config.seed, r), r))
        .collect()
}

/// Target-only baseline over the same replicate seeding scheme.
pub fn run_target_only(target: &ToyModel, config: &SpecDecodeConfig, replicates: u64) -> Result<Vec<SequenceState>> {
    run_target_only_range(target, config, 0..replicates)
}

pub fn run_target_only_range(
    target: &ToyModel,
    config: &SpecDecodeConfig,
    range: Range<u64>,
) -> Result<Vec<SequenceState>> {
    range
        .into_par_iter()
        .map(|r| {
            crate::autoregressive::target_only_generate(
                target,
                config.len,
                &mut replicate_streams(config.seed, r),
                config.temperature,
            )
        })
        .collect()
}
