//! Independent reference computations: grid integration of the residual
//! distribution, a term-by-term chain ratio, and two-sample / goodness-of-fit
//! statistics.
//!
//! The chain ratio re-derives every step from the raw coefficients so it can
//! serve as a check on [`crate::specdec::acceptance_log_ratio`].
//! [`check_distribution`] drives the engine only to collect samples.

use rand::Rng;
use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::autoregressive::{SequenceState, ToyModel};
use crate::diffusion::{DenoiserSpec, NoiseRecord};
use crate::error::{Error, Result};
use crate::math::VARIANCE_FLOOR;
use crate::rng;
use crate::specdec::{run_replicate_range, run_target_only_range, RunStats, SpecDecodeConfig, StatsSummary};

/// Uniform midpoint grid on `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1D {
    lo: f64,
    hi: f64,
    bins: usize,
}

impl Grid1D {
    pub const MIN_BINS: usize = 100;

    pub fn new(lo: f64, hi: f64, bins: usize) -> Result<Self> {
        if !lo.is_finite() || !hi.is_finite() || lo >= hi {
            return Err(Error::usage(format!("grid needs finite lo < hi, got [{lo}, {hi}]")));
        }
        if bins < Self::MIN_BINS {
            return Err(Error::usage(format!(
                "grid needs at least {} bins, got {bins}",
                Self::MIN_BINS
            )));
        }
        Ok(Grid1D { lo, hi, bins })
    }

    /// Grid spanning `±sigmas` standard deviations of every listed `(mean, var)`.
    pub fn covering(gaussians: &[(f64, f64)], sigmas: f64, bins: usize) -> Result<Self> {
        let lo = gaussians
            .iter()
            .map(|&(m, v)| m - sigmas * v.sqrt())
            .fold(f64::INFINITY, f64::min);
        let hi = gaussians
            .iter()
            .map(|&(m, v)| m + sigmas * v.sqrt())
            .fold(f64::NEG_INFINITY, f64::max);
        Self::new(lo, hi, bins)
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn bins(&self) -> usize {
        self.bins
    }

    pub fn width(&self) -> f64 {
        (self.hi - self.lo) / self.bins as f64
    }

    pub fn center(&self, i: usize) -> f64 {
        self.lo + (i as f64 + 0.5) * self.width()
    }

    pub fn centers(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.bins).map(move |i| self.center(i))
    }

    /// Cell holding `x`; values outside the grid land in the end cells.
    pub fn cell(&self, x: f64) -> usize {
        let k = ((x - self.lo) / self.width()).floor();
        if k < 0.0 {
            0
        } else {
            (k as usize).min(self.bins - 1)
        }
    }
}

/// Density of `N(mean, var)`, written out directly.
pub fn normal_density(mean: f64, var: f64) -> impl Fn(f64) -> f64 + Copy {
    let norm = 1.0 / (2.0 * std::f64::consts::PI * var).sqrt();
    move |x| {
        let z = x - mean;
        norm * (-z * z / (2.0 * var)).exp()
    }
}

/// `Φ((x - mean) / sd)` via statrs.
pub fn normal_cdf(mean: f64, var: f64) -> impl Fn(f64) -> f64 {
    let n = statrs::distribution::Normal::new(mean, var.sqrt()).expect("valid normal");
    move |x| n.cdf(x)
}

/// Grid form of `p'(x) = max(0, p - q) / Z`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModifiedDistribution {
    pub grid: Grid1D,
    pub pmf: Vec<f64>,
    pub z: f64,
}

impl ModifiedDistribution {
    pub fn cdf(&self) -> Vec<f64> {
        self.pmf
            .iter()
            .scan(0.0, |acc, &m| {
                *acc += m;
                Some(*acc)
            })
            .collect()
    }

    /// Inverse-CDF draw: pick a cell by mass, then uniform within it.
    pub fn sample<R: Rng + ?Sized>(&self, cdf: &[f64], rng: &mut R) -> f64 {
        let u: f64 = rng.random::<f64>() * cdf[cdf.len() - 1];
        let i = cdf.partition_point(|&c| c < u).min(cdf.len() - 1);
        let w = self.grid.width();
        self.grid.lo() + (i as f64 + rng.random::<f64>()) * w
    }
}

pub const MIN_RESIDUAL_MASS: f64 = 1e-12;

pub fn modified_distribution_grid(
    p: impl Fn(f64) -> f64,
    q: impl Fn(f64) -> f64,
    grid: Grid1D,
) -> Result<ModifiedDistribution> {
    let w = grid.width();
    let raw: Vec<f64> = grid.centers().map(|x| (p(x) - q(x)).max(0.0) * w).collect();
    let z: f64 = raw.iter().sum();
    if z < MIN_RESIDUAL_MASS {
        return Err(Error::IndistinguishableDensities(z));
    }
    let pmf = raw.into_iter().map(|m| m / z).collect();
    Ok(ModifiedDistribution { grid, pmf, z })
}

/// Overlap `β = ∫ min(p, q)` on the grid.
pub fn overlap_beta(p: impl Fn(f64) -> f64, q: impl Fn(f64) -> f64, grid: Grid1D) -> f64 {
    let w = grid.width();
    grid.centers().map(|x| p(x).min(q(x)) * w).sum()
}

fn log_normal_diag(x: &[f64], mean: &[f64], var: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 0..x.len() {
        let v = var[i];
        let z = x[i] - mean[i];
        s += -0.5 * (2.0 * std::f64::consts::PI * v).ln() - z * z / (2.0 * v);
    }
    s
}

fn step_mean(spec: &DenoiserSpec, k: usize, x: &[f64], cond: &[f64]) -> Vec<f64> {
    let s = &spec.steps()[k];
    (0..x.len())
        .map(|i| spec.nonlinearity().apply(s.a[i] * x[i] + s.c[i] * cond[i] + s.b[i]))
        .collect()
}

/// Per-step `ln p(x^p_{t-1}|x^p_t) - ln q(x^q_{t-1}|x^q_t)` for `t = T..1`
/// along chains driven by the same noise; the `t = 1` target term is
/// evaluated at `x_0`. The shared `x_T` contributes nothing.
#[allow(clippy::too_many_arguments)]
pub fn full_chain_step_log_ratios(
    draft: &DenoiserSpec,
    target: &DenoiserSpec,
    cond_q: &[f64],
    cond_p: &[f64],
    noise: &NoiseRecord,
    x_0: &[f64],
    temperature: f64,
) -> Result<Vec<f64>> {
    let t_max = target.num_steps();
    if draft.num_steps() != t_max || noise.num_steps() != t_max {
        return Err(Error::usage("draft, target and noise must share the step count"));
    }
    let d = target.dim();
    if [draft.dim(), cond_q.len(), cond_p.len(), noise.dim(), x_0.len()]
        .iter()
        .any(|&n| n != d)
    {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: draft.dim(),
        });
    }
    let tau2 = temperature * temperature;
    let tempered = |v: &[f64]| -> Vec<f64> { v.iter().map(|x| (tau2 * x).max(VARIANCE_FLOOR)).collect() };
    let mut xq = noise.initial().to_vec();
    let mut xp = noise.initial().to_vec();
    let mut terms = Vec::with_capacity(t_max);
    for k in 0..t_max {
        let (mq, mp) = (step_mean(draft, k, &xq, cond_q), step_mean(target, k, &xp, cond_p));
        let (vq, vp) = (tempered(&draft.steps()[k].var), tempered(&target.steps()[k].var));
        if k + 1 == t_max {
            terms.push(log_normal_diag(x_0, &mp, &vp) - log_normal_diag(x_0, &mq, &vq));
            break;
        }
        let eps = &noise.eps()[k];
        let nq: Vec<f64> = (0..d).map(|i| mq[i] + vq[i].sqrt() * eps[i]).collect();
        let np: Vec<f64> = (0..d).map(|i| mp[i] + vp[i].sqrt() * eps[i]).collect();
        if nq.iter().chain(&np).any(|v| !v.is_finite()) {
            return Err(Error::Divergence {
                step: t_max - k,
                position: None,
            });
        }
        terms.push(log_normal_diag(&np, &mp, &vp) - log_normal_diag(&nq, &mq, &vq));
        xq = nq;
        xp = np;
    }
    Ok(terms)
}

/// Unsimplified log ratio of the two chains: the sum of every step's term.
#[allow(clippy::too_many_arguments)]
pub fn full_chain_log_ratio(
    draft: &DenoiserSpec,
    target: &DenoiserSpec,
    cond_q: &[f64],
    cond_p: &[f64],
    noise: &NoiseRecord,
    x_0: &[f64],
    temperature: f64,
) -> Result<f64> {
    Ok(
        full_chain_step_log_ratios(draft, target, cond_q, cond_p, noise, x_0, temperature)?
            .iter()
            .sum(),
    )
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KsResult {
    pub statistic: f64,
    /// Asymptotic Kolmogorov approximation.
    pub p_value: f64,
}

/// `Q_KS(λ) = 2 Σ_{k≥1} (-1)^{k-1} exp(-2 k² λ²)`.
pub fn kolmogorov_survival(lambda: f64) -> f64 {
    if lambda < 1e-3 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=200 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * lambda * lambda).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

fn sorted(xs: &[f64]) -> Vec<f64> {
    let mut v = xs.to_vec();
    v.sort_unstable_by(f64::total_cmp);
    v
}

/// Two-sample Kolmogorov-Smirnov statistic with asymptotic p-value.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<KsResult> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::usage("KS test needs non-empty samples"));
    }
    let (a, b) = (sorted(a), sorted(b));
    let (n, m) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    let ne = (n * m / (n + m)).sqrt();
    let p_value = kolmogorov_survival((ne + 0.12 + 0.11 / ne) * d);
    Ok(KsResult { statistic: d, p_value })
}

/// One-sample KS statistic against a continuous CDF.
pub fn ks_one_sample(samples: &[f64], cdf: impl Fn(f64) -> f64) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::usage("KS test needs a non-empty sample"));
    }
    let xs = sorted(samples);
    let n = xs.len() as f64;
    Ok(xs
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).max((i as f64 + 1.0) / n - f)
        })
        .fold(0.0, f64::max))
}

/// Asymptotic two-sample critical value `c(a) * sqrt((n+m)/(nm))`.
pub fn ks_critical_value(significance: f64, n: usize, m: usize) -> f64 {
    let c = (-(significance / 2.0).ln() / 2.0).sqrt();
    c * ((n + m) as f64 / (n as f64 * m as f64)).sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChiSquareResult {
    pub statistic: f64,
    pub df: usize,
    pub p_value: f64,
    /// `[lo, hi)` cell ranges of the merged bins, in grid cells.
    pub bins: Vec<(usize, usize)>,
}

pub const DEFAULT_CHI_SQUARE_BINS: usize = 50;
pub const MIN_EXPECTED_COUNT: f64 = 5.0;

/// Pearson goodness-of-fit of scalar samples against a grid pmf, with
/// adjacent cells merged until each bin expects at least
/// `max(5, n / target_bins)` samples.
pub fn chi_square_gof(samples: &[f64], reference: &ModifiedDistribution) -> Result<ChiSquareResult> {
    chi_square_gof_with_bins(samples, reference, DEFAULT_CHI_SQUARE_BINS)
}

pub fn chi_square_gof_with_bins(
    samples: &[f64],
    reference: &ModifiedDistribution,
    target_bins: usize,
) -> Result<ChiSquareResult> {
    let n = samples.len() as f64;
    let min_expected = MIN_EXPECTED_COUNT.max(n / target_bins.max(2) as f64);
    if n < 2.0 * MIN_EXPECTED_COUNT {
        return Err(Error::usage(format!(
            "chi-square needs at least 10 samples, got {}",
            samples.len()
        )));
    }
    let mut bins: Vec<(usize, usize, f64)> = Vec::new();
    let mut start = 0;
    let mut acc = 0.0;
    for (i, &m) in reference.pmf.iter().enumerate() {
        acc += m * n;
        if acc >= min_expected {
            bins.push((start, i + 1, acc));
            start = i + 1;
            acc = 0.0;
        }
    }
    if start < reference.pmf.len() {
        match bins.last_mut() {
            Some(last) => {
                last.1 = reference.pmf.len();
                last.2 += acc;
            }
            None => bins.push((0, reference.pmf.len(), acc)),
        }
    }
    if bins.len() < 2 {
        return Err(Error::usage("insufficient samples for two chi-square bins"));
    }
    let mut cell_to_bin = vec![0usize; reference.pmf.len()];
    for (b, &(lo, hi, _)) in bins.iter().enumerate() {
        cell_to_bin[lo..hi].iter_mut().for_each(|c| *c = b);
    }
    let mut observed = vec![0u64; bins.len()];
    for &x in samples {
        observed[cell_to_bin[reference.grid.cell(x)]] += 1;
    }
    let statistic: f64 = bins
        .iter()
        .zip(&observed)
        .map(|(&(_, _, e), &o)| (o as f64 - e).powi(2) / e)
        .sum();
    let df = bins.len() - 1;
    let p_value = ChiSquared::new(df as f64).expect("df >= 1").sf(statistic);
    Ok(ChiSquareResult {
        statistic,
        df,
        p_value,
        bins: bins.iter().map(|&(lo, hi, _)| (lo, hi)).collect(),
    })
}

/// Upper `significance` quantile of `χ²(df)`.
pub fn chi_square_critical(df: usize, significance: f64) -> f64 {
    ChiSquared::new(df as f64)
        .expect("df >= 1")
        .inverse_cdf(1.0 - significance)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AcceptanceReport {
    /// Accepted drafts over proposed drafts.
    pub overall: Option<f64>,
    /// Per sequence position: accepted over decided drafts.
    pub per_position: Vec<Option<f64>>,
}

pub fn empirical_acceptance(runs: &[RunStats]) -> AcceptanceReport {
    let s = StatsSummary::from_runs(runs);
    AcceptanceReport {
        overall: s.alpha(),
        per_position: s.per_position_alpha(),
    }
}

/// KS comparison for one coordinate of one sequence position.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PositionKs {
    pub position: usize,
    pub coord: usize,
    pub statistic: f64,
    pub p_value: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistributionCheck {
    pub runs: u64,
    pub significance: f64,
    /// Per-test threshold after Bonferroni correction over all positions and coordinates.
    pub threshold: f64,
    pub positions: Vec<PositionKs>,
}

impl DistributionCheck {
    pub fn pass(&self) -> bool {
        self.positions.iter().all(|p| p.pass)
    }

    pub fn max_statistic(&self) -> f64 {
        self.positions.iter().map(|p| p.statistic).fold(0.0, f64::max)
    }
}

const CHECK_CHUNK: u64 = 2_000;

/// Per-position two-sample KS between `runs` speculative generations and
/// `runs` independent target-only generations. The two sides use disjoint
/// seeds derived from `config.seed`.
pub fn check_distribution(
    target: &ToyModel,
    draft: &ToyModel,
    config: &SpecDecodeConfig,
    runs: u64,
    significance: f64,
) -> Result<DistributionCheck> {
    if runs == 0 {
        return Err(Error::usage("check needs at least one run"));
    }
    if !(significance > 0.0 && significance < 1.0) {
        return Err(Error::usage(format!(
            "significance must be in (0, 1), got {significance}"
        )));
    }
    config.validate()?;
    let (len, d) = (config.len, target.dim());
    let spec_cfg = SpecDecodeConfig {
        seed: rng::derive_seed(config.seed, &[rng::label::SPECULATIVE]),
        ..config.clone()
    };
    let base_cfg = SpecDecodeConfig {
        seed: rng::derive_seed(config.seed, &[rng::label::TARGET_ONLY]),
        ..config.clone()
    };
    let mut spec = vec![Vec::with_capacity(runs as usize); len * d];
    let mut base = vec![Vec::with_capacity(runs as usize); len * d];
    let collect = |cols: &mut [Vec<f64>], state: &SequenceState| {
        for (i, tok) in state.tokens().iter().enumerate() {
            for (k, &x) in tok.as_slice().iter().enumerate() {
                cols[i * d + k].push(x);
            }
        }
    };
    let mut start = 0;
    while start < runs {
        let range = start..(start + CHECK_CHUNK).min(runs);
        for (state, _) in run_replicate_range(target, draft, &spec_cfg, range.clone())? {
            collect(&mut spec, &state);
        }
        for state in run_target_only_range(target, &base_cfg, range.clone())? {
            collect(&mut base, &state);
        }
        start = range.end;
    }
    let threshold = significance / (len * d) as f64;
    let positions = spec
        .iter()
        .zip(&base)
        .enumerate()
        .map(|(idx, (a, b))| {
            let ks = ks_two_sample(a, b)?;
            Ok(PositionKs {
                position: idx / d,
                coord: idx % d,
                statistic: ks.statistic,
                p_value: ks.p_value,
                pass: ks.p_value >= threshold,
            })
        })
        .collect::<Result<_>>()?;
    Ok(DistributionCheck {
        runs,
        significance,
        threshold,
        positions,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand_distr::{Distribution, Normal};

    fn std_pair_grid() -> Grid1D {
        Grid1D::covering(&[(0.0, 1.0), (1.0, 1.0)], 8.0, 40_000).unwrap()
    }

    #[test]
    fn grid_validation() {
        assert!(Grid1D::new(1.0, 0.0, 200).is_err());
        assert!(Grid1D::new(0.0, 1.0, 50).is_err());
        let g = Grid1D::new(-1.0, 1.0, 200).unwrap();
        assert_eq!(g.cell(-5.0), 0);
        assert_eq!(g.cell(5.0), 199);
        assert_abs_diff_eq!(g.center(0), -0.995, epsilon = 1e-12);
    }

    #[test]
    fn residual_of_unit_shift() {
        let md =
            modified_distribution_grid(normal_density(0.0, 1.0), normal_density(1.0, 1.0), std_pair_grid()).unwrap();
        let exact = 2.0 * normal_cdf(0.0, 1.0)(0.5) - 1.0;
        assert_abs_diff_eq!(exact, 0.38292, epsilon = 1e-5);
        assert_abs_diff_eq!(md.z, exact, epsilon = 1e-7);
        assert_abs_diff_eq!(md.pmf.iter().sum::<f64>(), 1.0, epsilon = 1e-9);
        assert!(md.pmf.iter().all(|&m| m >= 0.0));
    }

    #[test]
    fn identical_densities_have_no_residual() {
        let p = normal_density(0.3, 2.0);
        let err = modified_distribution_grid(p, p, std_pair_grid()).unwrap_err();
        assert!(matches!(err, Error::IndistinguishableDensities(_)));
    }

    #[test]
    fn disjoint_densities_have_unit_residual() {
        // equal variances: Z = 2 Phi(shift / 2) - 1
        for (shift, z) in [(5.0, 2.0 * normal_cdf(0.0, 1.0)(2.5) - 1.0), (12.0, 1.0)] {
            let g = Grid1D::covering(&[(0.0, 1.0), (shift, 1.0)], 8.0, 40_000).unwrap();
            let md = modified_distribution_grid(normal_density(0.0, 1.0), normal_density(shift, 1.0), g).unwrap();
            assert_abs_diff_eq!(md.z, z, epsilon = 1e-6);
        }
    }

    #[test]
    fn residual_plus_overlap_is_one_and_refinement_stable() {
        for &(p, q) in &[
            ((0.0, 1.0), (1.0, 1.0)),
            ((0.0, 1.0), (0.5, 0.25)),
            ((0.0, 2.0), (-1.0, 0.5)),
        ] {
            let g = Grid1D::covering(&[p, q], 8.0, 40_000).unwrap();
            let (pd, qd) = (normal_density(p.0, p.1), normal_density(q.0, q.1));
            let z = modified_distribution_grid(pd, qd, g).unwrap().z;
            assert_abs_diff_eq!(z + overlap_beta(pd, qd, g), 1.0, epsilon = 1e-9);
            let g2 = Grid1D::new(g.lo(), g.hi(), 80_000).unwrap();
            let z2 = modified_distribution_grid(pd, qd, g2).unwrap().z;
            assert!((z - z2).abs() < 1e-6, "{z} vs {z2}");
        }
    }

    #[test]
    fn ks_examples() {
        let xs: Vec<f64> = (0..500).map(|i| (i as f64 * 0.37).sin()).collect();
        assert_eq!(ks_two_sample(&xs, &xs).unwrap().statistic, 0.0);
        assert!(ks_two_sample(&[], &xs).is_err());

        let draw = |seed: u64, mean: f64, n: usize| -> Vec<f64> {
            let mut r = rng::stream(seed, &[]);
            let d = Normal::new(mean, 1.0).unwrap();
            (0..n).map(|_| d.sample(&mut r)).collect()
        };
        let same = ks_two_sample(&draw(1, 0.0, 50_000), &draw(2, 0.0, 50_000)).unwrap();
        assert!(same.statistic < 0.015, "{same:?}");
        assert_abs_diff_eq!(
            ks_critical_value(0.01, 50_000, 50_000),
            1.628 * (2.0f64 / 50_000.0).sqrt(),
            epsilon = 1e-4
        );

        let shifted = ks_two_sample(&draw(3, 0.0, 10_000), &draw(4, 1.0, 10_000)).unwrap();
        assert!(shifted.statistic > 0.3, "{shifted:?}");
        assert!(shifted.p_value < 1e-10);
    }

    #[test]
    fn ks_handles_ties() {
        let a = vec![1.0; 200];
        let b: Vec<f64> = (0..200).map(|i| if i < 100 { 1.0 } else { 2.0 }).collect();
        assert_abs_diff_eq!(ks_two_sample(&a, &b).unwrap().statistic, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn kolmogorov_survival_reference_points() {
        // tabulated: Q(1.36) ≈ 0.049, Q(1.628) ≈ 0.010
        assert_abs_diff_eq!(kolmogorov_survival(1.358), 0.05, epsilon = 1e-3);
        assert_abs_diff_eq!(kolmogorov_survival(1.628), 0.01, epsilon = 5e-4);
        assert_eq!(kolmogorov_survival(0.0), 1.0);
    }

    #[test]
    fn chi_square_self_consistency() {
        let md =
            modified_distribution_grid(normal_density(0.0, 1.0), normal_density(1.0, 1.0), std_pair_grid()).unwrap();
        let cdf = md.cdf();
        let mut r = rng::stream(17, &[]);
        let xs: Vec<f64> = (0..100_000).map(|_| md.sample(&cdf, &mut r)).collect();
        let res = chi_square_gof(&xs, &md).unwrap();
        assert!(res.statistic < chi_square_critical(res.df, 0.01), "{res:?}");
    }

    #[test]
    fn chi_square_rejects_unmodified_target() {
        let md =
            modified_distribution_grid(normal_density(0.0, 1.0), normal_density(1.0, 1.0), std_pair_grid()).unwrap();
        let mut r = rng::stream(18, &[]);
        let d = Normal::new(0.0, 1.0).unwrap();
        let xs: Vec<f64> = (0..100_000).map(|_| d.sample(&mut r)).collect();
        let res = chi_square_gof(&xs, &md).unwrap();
        assert!(res.statistic > 10.0 * chi_square_critical(res.df, 0.01), "{res:?}");
    }

    #[test]
    fn chi_square_needs_samples() {
        let md =
            modified_distribution_grid(normal_density(0.0, 1.0), normal_density(1.0, 1.0), std_pair_grid()).unwrap();
        assert!(chi_square_gof(&[0.0; 3], &md).is_err());
    }
}
