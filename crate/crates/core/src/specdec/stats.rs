use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::autoregressive::Origin;

/// Per-token record of one generated sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PositionRecord {
    pub position: usize,
    pub origin: Origin,
    /// Log acceptance ratio of the draft that decided this position
    /// (accepted, or the one rejected before resampling).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub log_ratio: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub uniform: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trials: Option<u32>,
}

impl PositionRecord {
    /// `Some(true)` for accepted drafts, `Some(false)` for rejected ones,
    /// `None` where no draft was evaluated.
    pub fn accepted(&self) -> Option<bool> {
        match self.origin {
            Origin::DraftAccepted => Some(true),
            Origin::Resampled => Some(false),
            _ => None,
        }
    }
}

/// One speculative step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    /// Sequence length before the step.
    pub start: usize,
    pub drafted: usize,
    pub accepted: usize,
    pub log_ratios: Vec<f64>,
    pub uniforms: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resample_trials: Option<u32>,
    pub bonus: bool,
}

impl StepRecord {
    pub fn appended(&self) -> usize {
        self.accepted + usize::from(self.resample_trials.is_some() || self.bonus)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunStats {
    pub replicate: u64,
    pub seed: u64,
    pub gamma: usize,
    pub len: usize,
    pub prefilled: usize,
    pub positions: Vec<PositionRecord>,
    pub steps: Vec<StepRecord>,
    pub target_chain_calls: u64,
    pub draft_chain_calls: u64,
}

impl RunStats {
    pub fn proposed(&self) -> u64 {
        self.steps.iter().map(|s| s.drafted as u64).sum()
    }

    pub fn accepted(&self) -> u64 {
        self.steps.iter().map(|s| s.accepted as u64).sum()
    }

    pub fn rejections(&self) -> u64 {
        self.steps.iter().filter(|s| s.resample_trials.is_some()).count() as u64
    }

    /// Accepted drafts over proposed drafts; `None` when nothing was drafted.
    pub fn alpha(&self) -> Option<f64> {
        let p = self.proposed();
        (p > 0).then(|| self.accepted() as f64 / p as f64)
    }

    /// Steps whose accepted drafts violate `r_i <= exp(log_ratio_i)`, or
    /// whose first rejected draft does not satisfy `r > exp(log_ratio)`.
    pub fn ratio_violations(&self) -> usize {
        self.steps
            .iter()
            .filter(|s| {
                let ok_accepts = s.log_ratios[..s.accepted]
                    .iter()
                    .zip(&s.uniforms)
                    .all(|(&lr, &r)| lr >= 0.0 || r <= lr.exp());
                let ok_reject = s.accepted == s.drafted || s.uniforms[s.accepted] > s.log_ratios[s.accepted].exp();
                !(ok_accepts && ok_reject)
            })
            .count()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PositionCounts {
    pub evaluated: u64,
    pub accepted: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RunAlpha {
    pub replicate: u64,
    pub accepted: u64,
    pub proposed: u64,
}

/// Aggregate over any number of runs. All fields are integer counts, so
/// [`merge`](StatsSummary::merge) is exactly associative and commutative.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StatsSummary {
    pub runs: u64,
    pub proposed: u64,
    pub accepted: u64,
    pub rejections: u64,
    pub steps: u64,
    pub appended: u64,
    /// Steps that drafted the full `gamma` (not cut short by the length limit).
    pub full_steps: u64,
    pub full_step_appended: u64,
    pub target_chain_calls: u64,
    pub draft_chain_calls: u64,
    pub per_position: Vec<PositionCounts>,
    pub trials: BTreeMap<u32, u64>,
    pub per_run: Vec<RunAlpha>,
}

impl StatsSummary {
    pub fn from_run(run: &RunStats) -> Self {
        let mut s = StatsSummary {
            runs: 1,
            proposed: run.proposed(),
            accepted: run.accepted(),
            rejections: run.rejections(),
            steps: run.steps.len() as u64,
            target_chain_calls: run.target_chain_calls,
            draft_chain_calls: run.draft_chain_calls,
            ..Default::default()
        };
        for step in &run.steps {
            s.appended += step.appended() as u64;
            if step.drafted == run.gamma {
                s.full_steps += 1;
                s.full_step_appended += step.appended() as u64;
            }
            if let Some(t) = step.resample_trials {
                *s.trials.entry(t).or_default() += 1;
            }
        }
        s.per_position = vec![PositionCounts::default(); run.positions.len()];
        for rec in &run.positions {
            if let Some(acc) = rec.accepted() {
                let c = &mut s.per_position[rec.position];
                c.evaluated += 1;
                c.accepted += u64::from(acc);
            }
        }
        s.per_run.push(RunAlpha {
            replicate: run.replicate,
            accepted: s.accepted,
            proposed: s.proposed,
        });
        s
    }

    pub fn from_runs<'a>(runs: impl IntoIterator<Item = &'a RunStats>) -> Self {
        runs.into_iter()
            .fold(StatsSummary::default(), |acc, r| acc.merge(StatsSummary::from_run(r)))
    }

    pub fn merge(mut self, other: StatsSummary) -> Self {
        self.runs += other.runs;
        self.proposed += other.proposed;
        self.accepted += other.accepted;
        self.rejections += other.rejections;
        self.steps += other.steps;
        self.appended += other.appended;
        self.full_steps += other.full_steps;
        self.full_step_appended += other.full_step_appended;
        self.target_chain_calls += other.target_chain_calls;
        self.draft_chain_calls += other.draft_chain_calls;
        if self.per_position.len() < other.per_position.len() {
            self.per_position
                .resize(other.per_position.len(), PositionCounts::default());
        }
        for (a, b) in self.per_position.iter_mut().zip(&other.per_position) {
            a.evaluated += b.evaluated;
            a.accepted += b.accepted;
        }
        for (k, v) in other.trials {
            *self.trials.entry(k).or_default() += v;
        }
        self.per_run.extend(other.per_run);
        self.per_run.sort_unstable();
        self
    }

    /// Pooled accepted / proposed.
    pub fn alpha(&self) -> Option<f64> {
        (self.proposed > 0).then(|| self.accepted as f64 / self.proposed as f64)
    }

    /// Per-draft acceptance probability: accepted / (accepted + rejected),
    /// counting only drafts that were actually decided.
    pub fn decided_alpha(&self) -> Option<f64> {
        let n = self.accepted + self.rejections;
        (n > 0).then(|| self.accepted as f64 / n as f64)
    }

    /// Mean and standard error of the per-run acceptance rate.
    pub fn alpha_mean_stderr(&self) -> Option<(f64, f64)> {
        let alphas: Vec<f64> = self
            .per_run
            .iter()
            .filter(|r| r.proposed > 0)
            .map(|r| r.accepted as f64 / r.proposed as f64)
            .collect();
        if alphas.is_empty() {
            return None;
        }
        let n = alphas.len() as f64;
        let mean = alphas.iter().sum::<f64>() / n;
        if alphas.len() < 2 {
            return Some((mean, 0.0));
        }
        let var = alphas.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / (n - 1.0);
        Some((mean, (var / n).sqrt()))
    }

    pub fn per_position_alpha(&self) -> Vec<Option<f64>> {
        self.per_position
            .iter()
            .map(|c| (c.evaluated > 0).then(|| c.accepted as f64 / c.evaluated as f64))
            .collect()
    }

    pub fn mean_trials(&self) -> Option<f64> {
        let n: u64 = self.trials.values().sum();
        (n > 0).then(|| self.trials.iter().map(|(&t, &c)| t as f64 * c as f64).sum::<f64>() / n as f64)
    }

    pub fn tokens_per_step(&self) -> Option<f64> {
        (self.steps > 0).then(|| self.appended as f64 / self.steps as f64)
    }

    pub fn full_tokens_per_step(&self) -> Option<f64> {
        (self.full_steps > 0).then(|| self.full_step_appended as f64 / self.full_steps as f64)
    }
}
