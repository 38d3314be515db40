//! Parameter sweeps over the decoding engine and the walltime model.

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::autoregressive::{prefill_count, ToyModel};
use crate::error::{Error, Result};
use crate::specdec::{run_replicates, RunStats, SpecDecodeConfig, StatsSummary};

/// Expected walltime improvement `(1 - α^{γ+1}) / ((1 - α)(γc + 1))`.
pub fn theoretical_improvement(alpha: f64, gamma: usize, c: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&alpha) {
        return Err(Error::usage(format!("alpha must be in [0, 1), got {alpha}")));
    }
    if !(c >= 0.0 && c.is_finite()) {
        return Err(Error::usage(format!("cost ratio must be >= 0, got {c}")));
    }
    let g = gamma as f64;
    Ok((1.0 - alpha.powi(gamma as i32 + 1)) / ((1.0 - alpha) * (g * c + 1.0)))
}

/// Throughput relative to target-only decoding under a cost model where a
/// target chain costs 1 and a draft chain costs `c`: tokens per full step
/// divided by the step cost `1 + γc`.
pub fn simulated_speedup(summary: &StatsSummary, gamma: usize, c: f64) -> Option<f64> {
    summary.full_tokens_per_step().map(|tps| tps / (1.0 + gamma as f64 * c))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepKind {
    Gamma,
    Prefill,
    Temperature,
}

impl SweepKind {
    fn apply(self, template: &SpecDecodeConfig, value: f64) -> Result<SpecDecodeConfig> {
        let mut cfg = template.clone();
        match self {
            SweepKind::Gamma => {
                if value < 1.0 || value.fract() != 0.0 {
                    return Err(Error::usage(format!("gamma must be a positive integer, got {value}")));
                }
                cfg.gamma = value as usize;
            }
            SweepKind::Prefill => cfg.rho = value,
            SweepKind::Temperature => cfg.temperature = value,
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub axis_value: f64,
    pub replicates: u64,
    /// Tokens pre-filled per run at this setting.
    pub prefilled: usize,
    pub mean_alpha: Option<f64>,
    pub stderr_alpha: Option<f64>,
    pub per_position_alpha: Vec<Option<f64>>,
    pub mean_trials: Option<f64>,
    pub tokens_per_step: Option<f64>,
    pub summary: StatsSummary,
}

impl SweepRow {
    /// Pooled acceptance over the first `window` positions after the pre-fill.
    pub fn early_alpha(&self, window: usize) -> Option<f64> {
        let range = self.prefilled..(self.prefilled + window).min(self.summary.per_position.len());
        let (acc, eval) = self.summary.per_position[range]
            .iter()
            .fold((0, 0), |(a, e), c| (a + c.accepted, e + c.evaluated));
        (eval > 0).then(|| acc as f64 / eval as f64)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub kind: SweepKind,
    pub seed: u64,
    pub rows: Vec<SweepRow>,
}

pub fn summarize_row(axis_value: f64, cfg: &SpecDecodeConfig, runs: &[RunStats]) -> Result<SweepRow> {
    let summary = StatsSummary::from_runs(runs);
    let ms = summary.alpha_mean_stderr();
    Ok(SweepRow {
        axis_value,
        replicates: runs.len() as u64,
        prefilled: prefill_count(cfg.rho, cfg.len)?,
        mean_alpha: ms.map(|m| m.0),
        stderr_alpha: ms.map(|m| m.1),
        per_position_alpha: summary.per_position_alpha(),
        mean_trials: summary.mean_trials(),
        tokens_per_step: summary.tokens_per_step(),
        summary,
    })
}

/// Run `replicates` generations at every axis value. All values share the
/// template's seed, so rows differ only through the swept parameter.
pub fn sweep(
    kind: SweepKind,
    target: &ToyModel,
    draft: &ToyModel,
    template: &SpecDecodeConfig,
    values: &[f64],
    replicates: u64,
) -> Result<SweepResult> {
    if replicates == 0 {
        return Err(Error::usage("replicates must be at least 1"));
    }
    let rows = values
        .iter()
        .map(|&v| {
            let cfg = kind.apply(template, v)?;
            let runs: Vec<RunStats> = run_replicates(target, draft, &cfg, replicates)?
                .into_iter()
                .map(|(_, s)| s)
                .collect();
            summarize_row(v, &cfg, &runs)
        })
        .collect::<Result<_>>()?;
    Ok(SweepResult {
        kind,
        seed: template.seed,
        rows,
    })
}

pub fn sweep_gamma(
    target: &ToyModel,
    draft: &ToyModel,
    template: &SpecDecodeConfig,
    gammas: &[usize],
    replicates: u64,
) -> Result<SweepResult> {
    let values: Vec<f64> = gammas.iter().map(|&g| g as f64).collect();
    sweep(SweepKind::Gamma, target, draft, template, &values, replicates)
}

pub const DEFAULT_PREFILL_RATIOS: [f64; 3] = [0.0, 0.05, 0.15];

pub fn sweep_prefill(
    target: &ToyModel,
    draft: &ToyModel,
    template: &SpecDecodeConfig,
    rhos: &[f64],
    replicates: u64,
) -> Result<SweepResult> {
    sweep(SweepKind::Prefill, target, draft, template, rhos, replicates)
}

pub fn sweep_temperature(
    target: &ToyModel,
    draft: &ToyModel,
    template: &SpecDecodeConfig,
    taus: &[f64],
    replicates: u64,
) -> Result<SweepResult> {
    sweep(SweepKind::Temperature, target, draft, template, taus, replicates)
}

pub const SWEEP_CSV_HEADER: [&str; 5] = [
    "axis_value",
    "mean_alpha",
    "stderr_alpha",
    "mean_trials",
    "tokens_per_step",
];

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn write_sweep_csv<W: Write>(result: &SweepResult, out: W) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SWEEP_CSV_HEADER)?;
    for row in &result.rows {
        w.write_record([
            row.axis_value.to_string(),
            opt(row.mean_alpha),
            opt(row.stderr_alpha),
            opt(row.mean_trials),
            opt(row.tokens_per_step),
        ])?;
    }
    w.flush()
}

/// Distribution of rejection-sampler trial counts.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrialsHistogram {
    pub counts: BTreeMap<u32, u64>,
    pub total: u64,
    pub mean: Option<f64>,
    pub p99: Option<u32>,
}

impl TrialsHistogram {
    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    pub fn from_counts(counts: BTreeMap<u32, u64>) -> Self {
        let total: u64 = counts.values().sum();
        if total == 0 {
            return TrialsHistogram::default();
        }
        let mean = counts.iter().map(|(&t, &c)| t as f64 * c as f64).sum::<f64>() / total as f64;
        let rank = (0.99 * total as f64).ceil() as u64;
        let mut seen = 0;
        let p99 = counts.iter().find_map(|(&t, &c)| {
            seen += c;
            (seen >= rank).then_some(t)
        });
        TrialsHistogram {
            counts,
            total,
            mean: Some(mean),
            p99,
        }
    }

    pub fn write_csv<W: Write>(&self, out: W) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["trials", "count"])?;
        for (t, c) in &self.counts {
            w.write_record([t.to_string(), c.to_string()])?;
        }
        w.flush()
    }
}

/// Histogram over every rejection recorded in `runs`. Empty when no draft was rejected.
pub fn trials_histogram(runs: &[RunStats]) -> TrialsHistogram {
    TrialsHistogram::from_counts(StatsSummary::from_runs(runs).trials)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenarios;
    use approx::assert_abs_diff_eq;

    #[test]
    fn formula_examples() {
        assert_abs_diff_eq!(theoretical_improvement(0.5, 1, 0.0).unwrap(), 1.5, epsilon = 1e-15);
        for g in [1, 4, 32] {
            for c in [0.0, 0.1, 0.5] {
                assert_abs_diff_eq!(
                    theoretical_improvement(0.0, g, c).unwrap(),
                    1.0 / (g as f64 * c + 1.0),
                    epsilon = 1e-15
                );
            }
        }
        let v = theoretical_improvement(0.19, 32, 0.38).unwrap();
        assert_abs_diff_eq!(v, 0.0938, epsilon = 5e-5);
        assert!(theoretical_improvement(1.0, 4, 0.1).is_err());
        assert!(theoretical_improvement(-0.1, 4, 0.1).is_err());
    }

    #[test]
    fn formula_monotone_in_alpha() {
        for g in [1usize, 2, 8, 32] {
            for c in [0.0, 0.05, 0.38, 1.0] {
                let vals: Vec<f64> = (0..999)
                    .map(|i| theoretical_improvement(i as f64 / 1000.0, g, c).unwrap())
                    .collect();
                assert!(vals.windows(2).all(|w| w[1] > w[0]), "gamma={g} c={c}");
            }
        }
    }

    #[test]
    fn identical_models_accept_everything() {
        let cfg = scenarios::standard_pair();
        let t = &cfg.target;
        let mut template = cfg.run.decode_config();
        template.len = 24;
        for kind in [SweepKind::Gamma, SweepKind::Temperature] {
            let values: &[f64] = match kind {
                SweepKind::Gamma => &[1.0, 4.0, 8.0],
                _ => &[0.7, 1.0, 1.3],
            };
            let res = sweep(kind, t, t, &template, values, 20).unwrap();
            for row in &res.rows {
                assert_eq!(row.mean_alpha, Some(1.0));
                assert!(row.mean_trials.is_none());
            }
        }
    }

    #[test]
    fn full_prefill_reports_absent_alpha() {
        let cfg = scenarios::prefix_divergent();
        let res = sweep_prefill(&cfg.target, &cfg.draft, &cfg.run.decode_config(), &[1.0], 5).unwrap();
        assert_eq!(res.rows[0].mean_alpha, None);
        let mut buf = Vec::new();
        write_sweep_csv(&res, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().nth(1).unwrap(), "1,,,,");
    }

    #[test]
    fn sweep_is_reproducible() {
        let cfg = scenarios::standard_pair();
        let template = cfg.run.decode_config();
        let a = sweep_gamma(&cfg.target, &cfg.draft, &template, &[2, 4], 1).unwrap();
        let b = sweep_gamma(&cfg.target, &cfg.draft, &template, &[2, 4], 1).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.rows.len(), 2);
    }

    #[test]
    fn histogram_accounting() {
        let mut counts = BTreeMap::new();
        counts.insert(1, 90);
        counts.insert(2, 9);
        counts.insert(7, 1);
        let h = TrialsHistogram::from_counts(counts);
        assert_eq!(h.total, 100);
        assert_eq!(h.p99, Some(2));
        assert_abs_diff_eq!(h.mean.unwrap(), (90.0 + 18.0 + 7.0) / 100.0, epsilon = 1e-12);
        assert!(TrialsHistogram::from_counts(BTreeMap::new()).is_empty());
    }

    #[test]
    fn histogram_from_runs_counts_every_rejection() {
        let cfg = scenarios::standard_pair();
        let mut dc = cfg.run.decode_config();
        dc.len = 32;
        let runs: Vec<RunStats> = run_replicates(&cfg.target, &cfg.draft, &dc, 50)
            .unwrap()
            .into_iter()
            .map(|(_, s)| s)
            .collect();
        let h = trials_histogram(&runs);
        let rejections: u64 = runs.iter().map(|r| r.rejections()).sum();
        assert_eq!(h.total, rejections);
        assert!(h.total > 0);
    }
}
