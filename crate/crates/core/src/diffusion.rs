//! Reverse-diffusion chains over diagonal Gaussians.
//!
//! A [`DenoiserSpec`] is an explicit parametric stand-in for a learned
//! denoiser: at timestep `t` the mean is `A_t ⊙ x_t + C_t ⊙ cond + b_t`
//! (optionally squashed by `tanh`) and the variance is a fixed vector `var_t`.
//! Steps are stored in execution order, `t = T` first and `t = 1` last.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::math::{self, GaussianParams, Token, VARIANCE_FLOOR};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Nonlinearity {
    #[default]
    Identity,
    Tanh,
}

impl Nonlinearity {
    #[inline]
    pub fn apply(self, v: f64) -> f64 {
        match self {
            Nonlinearity::Identity => v,
            Nonlinearity::Tanh => v.tanh(),
        }
    }
}

/// Coefficients of one denoising step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepCoeffs {
    /// State coupling.
    pub a: Vec<f64>,
    /// Condition coupling.
    pub c: Vec<f64>,
    /// Offset.
    pub b: Vec<f64>,
    /// Predicted variance (before tempering).
    pub var: Vec<f64>,
}

impl StepCoeffs {
    /// Same coefficients in every dimension.
    pub fn uniform(d: usize, a: f64, c: f64, b: f64, var: f64) -> Self {
        StepCoeffs {
            a: vec![a; d],
            c: vec![c; d],
            b: vec![b; d],
            var: vec![var; d],
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct DenoiserSpecRaw {
    #[serde(default)]
    nonlinearity: Nonlinearity,
    steps: Vec<StepCoeffs>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DenoiserSpecRaw", into = "DenoiserSpecRaw")]
pub struct DenoiserSpec {
    nonlinearity: Nonlinearity,
    steps: Vec<StepCoeffs>,
    dim: usize,
}

impl TryFrom<DenoiserSpecRaw> for DenoiserSpec {
    type Error = Error;

    fn try_from(raw: DenoiserSpecRaw) -> Result<Self> {
        DenoiserSpec::new(raw.steps, raw.nonlinearity)
    }
}

impl From<DenoiserSpec> for DenoiserSpecRaw {
    fn from(s: DenoiserSpec) -> Self {
        DenoiserSpecRaw {
            nonlinearity: s.nonlinearity,
            steps: s.steps,
        }
    }
}

impl DenoiserSpec {
    /// `steps[0]` is timestep `T`, `steps[T-1]` is timestep 1.
    pub fn new(mut steps: Vec<StepCoeffs>, nonlinearity: Nonlinearity) -> Result<Self> {
        if steps.len() < 2 {
            return Err(Error::Config(format!(
                "denoiser needs at least 2 steps, got {}",
                steps.len()
            )));
        }
        let dim = steps[0].a.len();
        if dim == 0 {
            return Err(Error::Config("denoiser dimension must be at least 1".into()));
        }
        let t_max = steps.len();
        for (k, s) in steps.iter_mut().enumerate() {
            let t = t_max - k;
            for (name, v) in [("a", &s.a), ("c", &s.c), ("b", &s.b), ("var", &s.var)] {
                if v.len() != dim {
                    return Err(Error::Config(format!(
                        "step t={t}: `{name}` has {} entries, expected {dim}",
                        v.len()
                    )));
                }
                if v.iter().any(|x| !x.is_finite()) {
                    return Err(Error::Config(format!("step t={t}: `{name}` is not finite")));
                }
            }
            if s.var.iter().any(|&v| v < 0.0) {
                return Err(Error::Config(format!("step t={t}: negative variance")));
            }
            for v in &mut s.var {
                *v = v.max(VARIANCE_FLOOR);
            }
        }
        Ok(DenoiserSpec {
            nonlinearity,
            steps,
            dim,
        })
    }

    pub fn num_steps(&self) -> usize {
        self.steps.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nonlinearity(&self) -> Nonlinearity {
        self.nonlinearity
    }

    /// Coefficients in execution order (`t = T` first).
    pub fn steps(&self) -> &[StepCoeffs] {
        &self.steps
    }

    /// Coefficients of timestep `t` (1-based).
    pub fn step(&self, t: usize) -> Option<&StepCoeffs> {
        if t == 0 || t > self.steps.len() {
            return None;
        }
        self.steps.get(self.steps.len() - t)
    }

    fn mean_at(&self, k: usize, x: &[f64], cond: &[f64]) -> Vec<f64> {
        let s = &self.steps[k];
        (0..self.dim)
            .map(|i| self.nonlinearity.apply(s.a[i] * x[i] + s.c[i] * cond[i] + s.b[i]))
            .collect()
    }

    fn params_at(&self, k: usize, x: &[f64], cond: &[f64], temperature: f64) -> Result<GaussianParams> {
        let t = self.steps.len() - k;
        let mean = self.mean_at(k, x, cond);
        if mean.iter().any(|m| !m.is_finite()) {
            return Err(Error::Divergence {
                step: t,
                position: None,
            });
        }
        let tau2 = temperature * temperature;
        let var = self.steps[k].var.iter().map(|v| tau2 * v).collect();
        GaussianParams::new(mean, var).map_err(|_| Error::Divergence {
            step: t,
            position: None,
        })
    }

    /// Tempered Gaussian of timestep `t` given the state `x_t`.
    pub fn conditional(&self, t: usize, x_t: &[f64], cond: &[f64], temperature: f64) -> Result<GaussianParams> {
        if t == 0 || t > self.steps.len() {
            return Err(Error::usage(format!("timestep {t} outside 1..={}", self.steps.len())));
        }
        check_dim(self.dim, x_t.len())?;
        check_dim(self.dim, cond.len())?;
        check_temperature(temperature)?;
        self.params_at(self.steps.len() - t, x_t, cond, temperature)
    }
}

fn check_temperature(temperature: f64) -> Result<()> {
    if !(temperature > 0.0 && temperature.is_finite()) {
        return Err(Error::usage(format!("temperature must be > 0, got {temperature}")));
    }
    Ok(())
}

/// Pre-drawn noise for one token: the initial state `x_T` and one standard
/// normal vector per step, in execution order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseRecord {
    initial: Vec<f64>,
    eps: Vec<Vec<f64>>,
}

impl NoiseRecord {
    pub fn new(initial: Vec<f64>, eps: Vec<Vec<f64>>) -> Result<Self> {
        let d = initial.len();
        if d == 0 || eps.is_empty() {
            return Err(Error::usage("noise record must be non-empty"));
        }
        for e in &eps {
            check_dim(d, e.len())?;
        }
        if initial.iter().chain(eps.iter().flatten()).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("noise record"));
        }
        Ok(NoiseRecord { initial, eps })
    }

    pub fn initial(&self) -> &[f64] {
        &self.initial
    }

    pub fn eps(&self) -> &[Vec<f64>] {
        &self.eps
    }

    pub fn num_steps(&self) -> usize {
        self.eps.len()
    }

    pub fn dim(&self) -> usize {
        self.initial.len()
    }
}

pub fn draw_noise_record<R: Rng + ?Sized>(steps: usize, d: usize, rng: &mut R) -> NoiseRecord {
    assert!(steps >= 2 && d >= 1, "noise record needs T >= 2 and d >= 1");
    let mut normal = || -> f64 { rng.sample(StandardNormal) };
    let initial = (0..d).map(|_| normal()).collect();
    let eps = (0..steps).map(|_| (0..d).map(|_| normal()).collect()).collect();
    NoiseRecord { initial, eps }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainStep {
    /// Timestep index, `T` down to 1.
    pub t: usize,
    pub params: GaussianParams,
    pub eps: Vec<f64>,
    pub x_out: Token,
}

/// Record of one reverse chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenoisingTrajectory {
    pub initial: Token,
    pub steps: Vec<ChainStep>,
    /// `Σ_{t=2..T} 0.5 Σ_i ln var_t_i` of the tempered variances.
    pub log_var_tail: f64,
}

impl DenoisingTrajectory {
    pub fn num_steps(&self) -> usize {
        self.steps.len()
    }

    pub fn dim(&self) -> usize {
        self.initial.dim()
    }

    /// The state entering the final step.
    pub fn x1(&self) -> &Token {
        &self.steps[self.steps.len() - 2].x_out
    }

    /// The produced token `x_0`.
    pub fn output(&self) -> &Token {
        &self.steps[self.steps.len() - 1].x_out
    }

    pub fn last_step(&self) -> &ChainStep {
        &self.steps[self.steps.len() - 1]
    }

    /// Log-density the chain's own last step assigns to its output.
    pub fn last_step_logpdf(&self) -> f64 {
        let last = self.last_step();
        math::logpdf_unchecked(last.x_out.as_slice(), &last.params)
    }

    pub fn recompute_log_var_tail(&self) -> f64 {
        self.steps
            .iter()
            .filter(|s| s.t >= 2)
            .fold(0.0, |acc, s| acc + s.params.half_log_det())
    }
}

/// Iterate the reverse chain `t = T..1` on pre-drawn noise.
pub fn run_chain(
    spec: &DenoiserSpec,
    cond: &[f64],
    noise: &NoiseRecord,
    temperature: f64,
) -> Result<DenoisingTrajectory> {
    check_dim(spec.dim, cond.len())?;
    check_dim(spec.dim, noise.dim())?;
    check_temperature(temperature)?;
    if noise.num_steps() != spec.num_steps() {
        return Err(Error::usage(format!(
            "noise record has {} steps, denoiser has {}",
            noise.num_steps(),
            spec.num_steps()
        )));
    }
    let t_max = spec.num_steps();
    let initial = Token::new(noise.initial.clone())?;
    let mut steps = Vec::with_capacity(t_max);
    let mut log_var_tail = 0.0;
    let mut x = noise.initial.clone();
    for (k, eps) in noise.eps.iter().enumerate() {
        let t = t_max - k;
        let params = spec.params_at(k, &x, cond, temperature)?;
        let out = math::reparameterize_raw(&params, eps);
        let x_out = Token::new(out).map_err(|_| Error::Divergence {
            step: t,
            position: None,
        })?;
        if t >= 2 {
            log_var_tail += params.half_log_det();
        }
        x.clear();
        x.extend_from_slice(x_out.as_slice());
        steps.push(ChainStep {
            t,
            params,
            eps: eps.clone(),
            x_out,
        });
    }
    Ok(DenoisingTrajectory {
        initial,
        steps,
        log_var_tail,
    })
}

/// Density of `x_0` under the final step given `x_1`. Substitution only; no sampling.
pub fn last_step_logpdf(spec: &DenoiserSpec, cond: &[f64], x_1: &[f64], x_0: &[f64], temperature: f64) -> Result<f64> {
    let params = spec.conditional(1, x_1, cond, temperature)?;
    math::gaussian_logpdf(x_0, &params)
}

/// Log of the telescoped variance product over `t = 2..T`:
/// `ln Π sqrt|Σ_q_t| - ln Π sqrt|Σ_p_t|`.
pub fn log_sigma_product(traj_q: &DenoisingTrajectory, traj_p: &DenoisingTrajectory) -> Result<f64> {
    if traj_q.num_steps() != traj_p.num_steps() {
        return Err(Error::usage(format!(
            "trajectory step counts differ: {} vs {}",
            traj_q.num_steps(),
            traj_p.num_steps()
        )));
    }
    check_dim(traj_q.dim(), traj_p.dim())?;
    Ok(traj_q.log_var_tail - traj_p.log_var_tail)
}

/// Exact marginal of `x_0` for an affine chain started at `x_T ~ N(0, I)`.
pub fn analytic_marginal(spec: &DenoiserSpec, cond: &[f64], temperature: f64) -> Result<GaussianParams> {
    if spec.nonlinearity != Nonlinearity::Identity {
        return Err(Error::UnsupportedOracle(
            "closed-form marginal needs an affine (identity) chain",
        ));
    }
    check_dim(spec.dim, cond.len())?;
    check_temperature(temperature)?;
    let tau2 = temperature * temperature;
    let mut mean = vec![0.0; spec.dim];
    let mut var = vec![1.0; spec.dim];
    for s in &spec.steps {
        for i in 0..spec.dim {
            mean[i] = s.a[i] * mean[i] + s.c[i] * cond[i] + s.b[i];
            var[i] = s.a[i] * s.a[i] * var[i] + tau2 * s.var[i];
        }
    }
    GaussianParams::new(mean, var)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use approx::assert_abs_diff_eq;

    fn spec_1d(steps: &[(f64, f64, f64, f64)]) -> DenoiserSpec {
        DenoiserSpec::new(
            steps
                .iter()
                .map(|&(a, c, b, v)| StepCoeffs::uniform(1, a, c, b, v))
                .collect(),
            Nonlinearity::Identity,
        )
        .unwrap()
    }

    #[test]
    fn noise_record_shape_and_determinism() {
        let a = draw_noise_record(2, 1, &mut rng::stream(11, &[]));
        let b = draw_noise_record(2, 1, &mut rng::stream(11, &[]));
        assert_eq!(a, b);
        let c = draw_noise_record(2, 1, &mut rng::stream(12, &[]));
        assert_ne!(a, c);
        let r = draw_noise_record(3, 2, &mut rng::stream(0, &[]));
        assert_eq!(r.eps().len(), 3);
        assert!(r.eps().iter().all(|e| e.len() == 2));
    }

    #[test]
    fn identity_chain_passes_initial_through() {
        let spec = spec_1d(&[(1.0, 0.0, 0.0, 0.0); 5]);
        let noise = NoiseRecord::new(vec![0.37], vec![vec![0.0]; 5]).unwrap();
        let traj = run_chain(&spec, &[0.0], &noise, 1.0).unwrap();
        assert_eq!(traj.output().as_slice(), &[0.37]);
    }

    #[test]
    fn hand_iterated_chain() {
        let spec = spec_1d(&[(0.0, 0.0, 0.0, 1.0), (0.0, 0.0, 0.0, 1.0)]);
        let noise = NoiseRecord::new(vec![5.0], vec![vec![0.3], vec![-0.7]]).unwrap();
        let t1 = run_chain(&spec, &[0.0], &noise, 1.0).unwrap();
        assert_abs_diff_eq!(t1.x1().as_slice()[0], 0.3, epsilon = 1e-15);
        assert_abs_diff_eq!(t1.output().as_slice()[0], -0.7, epsilon = 1e-15);

        let t2 = run_chain(&spec, &[0.0], &noise, 2.0).unwrap();
        assert_abs_diff_eq!(t2.x1().as_slice()[0], 0.6, epsilon = 1e-15);
        assert_abs_diff_eq!(t2.output().as_slice()[0], -1.4, epsilon = 1e-15);
        assert_abs_diff_eq!(t2.log_var_tail - t1.log_var_tail, 0.5 * 4f64.ln(), epsilon = 1e-15);
    }

    #[test]
    fn last_step_density_examples() {
        let spec = spec_1d(&[(0.0, 0.0, 0.0, 1.0), (0.0, 0.0, 0.0, 1.0)]);
        assert_abs_diff_eq!(
            last_step_logpdf(&spec, &[0.0], &[3.0], &[0.0], 1.0).unwrap(),
            -0.918_938_5,
            epsilon = 1e-7
        );
        let narrow = spec_1d(&[(0.0, 0.0, 0.0, 1.0), (0.0, 0.0, 0.0, 0.25)]);
        assert_abs_diff_eq!(
            last_step_logpdf(&narrow, &[0.0], &[1.0], &[0.5], 1.0).unwrap(),
            -0.725_791_3,
            epsilon = 1e-7
        );
    }

    #[test]
    fn own_output_density_matches_recorded_step() {
        let spec = spec_1d(&[(0.7, 0.2, 0.1, 0.3), (0.5, 0.1, -0.2, 0.2), (0.9, 0.4, 0.0, 0.1)]);
        let noise = draw_noise_record(3, 1, &mut rng::stream(5, &[]));
        let traj = run_chain(&spec, &[0.4], &noise, 1.3).unwrap();
        let substituted = last_step_logpdf(&spec, &[0.4], traj.x1().as_slice(), traj.output().as_slice(), 1.3).unwrap();
        assert_eq!(substituted, traj.last_step_logpdf());
    }

    #[test]
    fn sigma_product_examples() {
        // steps listed t=3, t=2, t=1
        let q = spec_1d(&[(0.0, 0.0, 0.0, 0.04), (0.0, 0.0, 0.0, 0.25), (0.0, 0.0, 0.0, 1.0)]);
        let p = spec_1d(&[(0.0, 0.0, 0.0, 0.25), (0.0, 0.0, 0.0, 1.0), (0.0, 0.0, 0.0, 3.0)]);
        let noise = draw_noise_record(3, 1, &mut rng::stream(1, &[]));
        let tq = run_chain(&q, &[0.0], &noise, 1.0).unwrap();
        let tp = run_chain(&p, &[0.0], &noise, 1.0).unwrap();
        // direct product oracle: sqrt(0.25*0.04)/sqrt(1.0*0.25)
        let direct = ((0.25f64 * 0.04).sqrt() / (1.0f64 * 0.25).sqrt()).ln();
        assert_abs_diff_eq!(direct, -1.609_437_9, epsilon = 1e-7);
        assert_abs_diff_eq!(log_sigma_product(&tq, &tp).unwrap(), direct, epsilon = 1e-12);
        assert_eq!(log_sigma_product(&tq, &tq).unwrap(), 0.0);

        let q2 = spec_1d(&[(0.0, 0.0, 0.0, 0.08), (0.0, 0.0, 0.0, 0.5), (0.0, 0.0, 0.0, 2.0)]);
        let p2 = spec_1d(&[(0.0, 0.0, 0.0, 0.5), (0.0, 0.0, 0.0, 2.0), (0.0, 0.0, 0.0, 6.0)]);
        let tq2 = run_chain(&q2, &[0.0], &noise, 1.0).unwrap();
        let tp2 = run_chain(&p2, &[0.0], &noise, 1.0).unwrap();
        assert_abs_diff_eq!(
            log_sigma_product(&tq2, &tp2).unwrap(),
            log_sigma_product(&tq, &tp).unwrap(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn sigma_product_rejects_mismatch() {
        let a = spec_1d(&[(0.0, 0.0, 0.0, 1.0); 2]);
        let b = spec_1d(&[(0.0, 0.0, 0.0, 1.0); 3]);
        let ta = run_chain(&a, &[0.0], &draw_noise_record(2, 1, &mut rng::stream(0, &[])), 1.0).unwrap();
        let tb = run_chain(&b, &[0.0], &draw_noise_record(3, 1, &mut rng::stream(0, &[])), 1.0).unwrap();
        assert!(log_sigma_product(&ta, &tb).is_err());
    }

    #[test]
    fn log_var_tail_excludes_last_step_and_recomputes_exactly() {
        let spec = spec_1d(&[(0.5, 0.0, 0.0, 0.3), (0.5, 0.0, 0.0, 0.2), (0.5, 0.0, 0.0, 7.0)]);
        let noise = draw_noise_record(3, 1, &mut rng::stream(2, &[]));
        let traj = run_chain(&spec, &[0.0], &noise, 1.0).unwrap();
        assert_eq!(traj.recompute_log_var_tail(), traj.log_var_tail);
        assert_abs_diff_eq!(traj.log_var_tail, 0.5 * (0.3f64.ln() + 0.2f64.ln()), epsilon = 1e-15);
        for s in &traj.steps {
            let replay = math::reparameterize(&s.params, &s.eps).unwrap();
            assert_eq!(replay, s.x_out);
        }
    }

    #[test]
    fn analytic_marginal_examples() {
        let id = spec_1d(&[(1.0, 0.0, 0.0, 0.0); 4]);
        let m = analytic_marginal(&id, &[2.0], 1.0).unwrap();
        assert_abs_diff_eq!(m.mean()[0], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(m.variance()[0], 1.0, epsilon = 1e-10);

        let decoupled = spec_1d(&[(0.0, 0.0, 0.0, 1.0); 2]);
        let m = analytic_marginal(&decoupled, &[0.0], 1.0).unwrap();
        assert_eq!((m.mean()[0], m.variance()[0]), (0.0, 1.0));

        let half = spec_1d(&[(0.5, 0.0, 0.0, 0.25); 2]);
        let m = analytic_marginal(&half, &[0.0], 1.0).unwrap();
        assert_abs_diff_eq!(m.variance()[0], 0.375, epsilon = 1e-15);

        let tanh = DenoiserSpec::new(vec![StepCoeffs::uniform(1, 0.5, 0.0, 0.0, 0.25); 2], Nonlinearity::Tanh).unwrap();
        assert!(matches!(
            analytic_marginal(&tanh, &[0.0], 1.0),
            Err(Error::UnsupportedOracle(_))
        ));
    }

    #[test]
    fn analytic_marginal_matches_monte_carlo() {
        // 10^6 draws for the composed N(0, 0.375) example, then a
        // conditioned chain with offsets at 10^5 draws.
        let half = spec_1d(&[(0.5, 0.0, 0.0, 0.25); 2]);
        let cases: [(&DenoiserSpec, f64, usize); 2] = [(&half, 0.0, 1_000_000), (&half, 0.0, 100_000)];
        let shifted = spec_1d(&[(0.8, 0.3, 0.1, 0.2), (-0.6, 0.5, 0.2, 0.1), (0.9, 0.2, -0.3, 0.05)]);
        for (spec, cond, n) in cases.into_iter().chain([(&shifted, 1.5, 100_000)]) {
            let exact = analytic_marginal(spec, &[cond], 1.1).unwrap();
            let mut r = rng::stream(99, &[n as u64]);
            let xs: Vec<f64> = (0..n)
                .map(|_| {
                    let noise = draw_noise_record(spec.num_steps(), 1, &mut r);
                    run_chain(spec, &[cond], &noise, 1.1).unwrap().output().as_slice()[0]
                })
                .collect();
            let mean = xs.iter().sum::<f64>() / n as f64;
            let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            let stderr = (exact.variance()[0] / n as f64).sqrt();
            assert!(
                (mean - exact.mean()[0]).abs() < 3.0 * stderr,
                "mean {mean} vs {}",
                exact.mean()[0]
            );
            assert!(
                (var / exact.variance()[0] - 1.0).abs() < 0.05,
                "var {var} vs {}",
                exact.variance()[0]
            );
        }
    }

    #[test]
    fn run_chain_reports_divergence_step() {
        let spec = spec_1d(&[(1e200, 0.0, 0.0, 1.0), (1e200, 0.0, 0.0, 1.0), (1.0, 0.0, 0.0, 1.0)]);
        let noise = NoiseRecord::new(vec![1e200], vec![vec![0.0]; 3]).unwrap();
        let err = run_chain(&spec, &[0.0], &noise, 1.0).unwrap_err();
        assert_eq!(
            err,
            Error::Divergence {
                step: 3,
                position: None
            }
        );
    }

    #[test]
    fn run_chain_validates_inputs() {
        let spec = spec_1d(&[(1.0, 0.0, 0.0, 1.0); 3]);
        let noise = draw_noise_record(2, 1, &mut rng::stream(0, &[]));
        assert!(run_chain(&spec, &[0.0], &noise, 1.0).is_err());
        let noise = draw_noise_record(3, 1, &mut rng::stream(0, &[]));
        assert!(run_chain(&spec, &[0.0], &noise, 0.0).is_err());
        assert!(run_chain(&spec, &[0.0, 1.0], &noise, 1.0).is_err());
        assert!(DenoiserSpec::new(vec![StepCoeffs::uniform(1, 1.0, 0.0, 0.0, 1.0)], Nonlinearity::Identity).is_err());
    }

    #[test]
    fn spec_json_round_trip_and_step_lookup() {
        let spec = spec_1d(&[(0.1, 0.0, 0.0, 1.0), (0.2, 0.0, 0.0, 0.5)]);
        let json = serde_json::to_string(&spec).unwrap();
        let back: DenoiserSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(back, spec);
        assert_eq!(spec.step(2).unwrap().a[0], 0.1);
        assert_eq!(spec.step(1).unwrap().a[0], 0.2);
        assert!(spec.step(0).is_none() && spec.step(3).is_none());
    }
}
