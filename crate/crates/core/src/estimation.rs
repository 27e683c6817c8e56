//! Weighted complex least squares for the grouped parameters, plus
//! synthetic spectra for closed-loop checks.
//!
//! The search runs in `x = ln|p|` with the sign of every parameter frozen
//! at its initial value; `a_cc` is never estimated.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::identifiability::Weighting;
use crate::impedance::{spectrum, total_impedance, ComplexFrequency, ImpedanceSpectrum};
use crate::params::{GroupId, GroupedParameters};

/// Box constraints on the magnitudes `|p|`, in [`GroupId::ALL`] order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Bounds {
    /// `|p|·10^{±decades}` for every estimated quantity.
    pub fn around(g: &GroupedParameters, decades: f64) -> Self {
        let f = 10f64.powf(decades);
        let mags = g.to_array().map(f64::abs);
        Self {
            lower: mags.iter().map(|m| m / f).collect(),
            upper: mags.iter().map(|m| m * f).collect(),
        }
    }

    fn check(&self) -> Result<()> {
        let n = GroupId::ALL.len();
        if self.lower.len() != n || self.upper.len() != n {
            return Err(Error::Dimension(format!("bounds need {n} entries")));
        }
        for (i, (l, u)) in self.lower.iter().zip(&self.upper).enumerate() {
            if !(*l > 0.0 && l < u && u.is_finite()) {
                return Err(Error::InvalidOption(format!(
                    "bounds for {} must satisfy 0 < lower < upper, got [{l}, {u}]",
                    GroupId::ALL[i].name()
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FitOptions {
    pub max_iter: usize,
    /// Largest allowed cosine between the residual and a scaled Jacobian
    /// column.
    pub gradient_tol: f64,
    /// Relative size of an accepted log-step below which the search stops.
    pub step_tol: f64,
    /// Absolute cost regarded as an exact fit.
    pub cost_tol: f64,
    pub damping_init: f64,
    /// Damping beyond this is reported as divergence.
    pub damping_max: f64,
    /// `None` means three decades either side of the starting point.
    pub bounds: Option<Bounds>,
    pub multistart_count: usize,
    pub rng_seed: u64,
    /// Row weights used when the data carry none.
    pub weighting: Weighting,
    /// Quantities held at their initial values.
    pub fixed: Vec<GroupId>,
    /// Log-step of the finite-difference Jacobian.
    pub jacobian_step: f64,
    /// Second-order step correction for curved valleys.
    pub geodesic_acceleration: bool,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            max_iter: 200,
            gradient_tol: 1e-10,
            step_tol: 1e-12,
            cost_tol: 1e-28,
            damping_init: 1e-3,
            damping_max: 1e16,
            bounds: None,
            multistart_count: 1,
            rng_seed: 0,
            weighting: Weighting::Relative,
            fixed: Vec::new(),
            jacobian_step: 1e-6,
            geodesic_acceleration: true,
        }
    }
}

impl FitOptions {
    fn check(&self) -> Result<()> {
        let positive = [
            ("gradient_tol", self.gradient_tol),
            ("step_tol", self.step_tol),
            ("damping_init", self.damping_init),
            ("damping_max", self.damping_max),
            ("jacobian_step", self.jacobian_step),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidOption(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.cost_tol >= 0.0) {
            return Err(Error::InvalidOption("cost_tol must be non-negative".into()));
        }
        if let Some(b) = &self.bounds {
            b.check()?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    ExactFit,
    Gradient,
    Step,
    MaxIterations,
    DampingCeiling,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub groups_hat: GroupedParameters,
    /// Weighted sum of squared residuals.
    pub cost: f64,
    pub iterations: usize,
    pub converged: bool,
    pub termination: Termination,
    /// Labels of the covariance rows, the estimated quantities only.
    pub param_labels: Vec<String>,
    /// Covariance of `ln|p|`, `s²(JᵀJ)⁺` with `s² = cost/(m − n)`.
    pub covariance: DMatrix<f64>,
    /// Quantities along directions the data do not resolve.
    pub unbounded: Vec<String>,
    /// Cost at the start and after every accepted step.
    pub residual_trace: Vec<f64>,
    pub options: FitOptions,
}

/// Stacked `[w·Re(H − z); w·Im(H − z)]` over the grid.
pub fn residuals(g: &GroupedParameters, data: &ImpedanceSpectrum) -> Result<Vec<f64>> {
    if data.is_empty() {
        return Err(Error::Empty("spectrum"));
    }
    let n = data.len();
    let mut r = vec![0.0; 2 * n];
    for (i, (&f, z)) in data.freqs().iter().zip(data.z()).enumerate() {
        let h = total_impedance(g, ComplexFrequency::from_hz(f))?;
        if !h.is_finite() {
            return Err(Error::NonFinite { freq_hz: f });
        }
        let d = (h - z) * data.weight(i);
        r[i] = d.re;
        r[n + i] = d.im;
    }
    Ok(r)
}

fn cost_of(r: &[f64]) -> f64 {
    r.iter().map(|v| v * v).sum()
}

/// Applies the default row weights when the data have none.
fn weighted(data: &ImpedanceSpectrum, weighting: Weighting) -> Result<ImpedanceSpectrum> {
    if data.weights().is_some() || weighting == Weighting::Absolute {
        return Ok(data.clone());
    }
    let w: Vec<f64> = data
        .z()
        .iter()
        .map(|z| if z.norm() > 0.0 { 1.0 / z.norm() } else { 1.0 })
        .collect();
    data.clone().with_weights(Some(w))
}

struct Problem<'a> {
    data: &'a ImpedanceSpectrum,
    base: GroupedParameters,
    free: Vec<GroupId>,
    signs: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    jac_step: f64,
}

impl Problem<'_> {
    fn params(&self, x: &[f64]) -> GroupedParameters {
        let mut g = self.base;
        for (k, id) in self.free.iter().enumerate() {
            g.set(*id, self.signs[k] * x[k].exp());
        }
        g
    }

    fn residuals(&self, x: &[f64]) -> Result<Vec<f64>> {
        residuals(&self.params(x), self.data)
    }

    fn jacobian(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        let h = self.jac_step;
        let m = 2 * self.data.len();
        let mut j = DMatrix::zeros(m, x.len());
        for k in 0..x.len() {
            let mut xp = x.to_vec();
            let mut xm = x.to_vec();
            xp[k] += h;
            xm[k] -= h;
            let rp = self.residuals(&xp)?;
            let rm = self.residuals(&xm)?;
            for i in 0..m {
                j[(i, k)] = (rp[i] - rm[i]) / (2.0 * h);
            }
        }
        Ok(j)
    }

    /// Second-order correction along `v`, rejected when it would dominate
    /// the velocity.
    fn acceleration(
        &self,
        x: &[f64],
        r: &[f64],
        v: &[f64],
        solve: impl Fn(&DVector<f64>) -> Vec<f64>,
    ) -> Result<Option<Vec<f64>>> {
        let vn = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if vn == 0.0 {
            return Ok(None);
        }
        let h = 0.1;
        let xp: Vec<f64> = x.iter().zip(v).map(|(a, b)| a + h * b).collect();
        let xm: Vec<f64> = x.iter().zip(v).map(|(a, b)| a - h * b).collect();
        let (Ok(rp), Ok(rm)) = (self.residuals(&xp), self.residuals(&xm)) else {
            return Ok(None);
        };
        let curv = DVector::from_iterator(r.len(), (0..r.len()).map(|i| (rp[i] - 2.0 * r[i] + rm[i]) / (h * h)));
        let a = solve(&curv);
        let an = a.iter().map(|b| b * b).sum::<f64>().sqrt();
        Ok((2.0 * an <= 0.75 * vn).then_some(a))
    }

    fn clamp(&self, x: &mut [f64]) {
        for k in 0..x.len() {
            x[k] = x[k].clamp(self.lower[k], self.upper[k]);
        }
    }
}

/// Levenberg–Marquardt with Marquardt column scaling and Nielsen's damping
/// update. Every trial step is projected onto the bounds.
pub fn fit(data: &ImpedanceSpectrum, init: &GroupedParameters, opts: &FitOptions) -> Result<FitResult> {
    opts.check()?;
    init.validate()?;
    if data.is_empty() {
        return Err(Error::Empty("spectrum"));
    }
    let data = weighted(data, opts.weighting)?;
    let free: Vec<GroupId> = GroupId::ALL
        .iter()
        .copied()
        .filter(|id| !opts.fixed.contains(id))
        .collect();
    let bounds = opts.bounds.clone().unwrap_or_else(|| Bounds::around(init, 3.0));
    let mut x0 = Vec::with_capacity(free.len());
    let mut signs = Vec::with_capacity(free.len());
    let (mut lower, mut upper) = (Vec::new(), Vec::new());
    for id in &free {
        let v = init.get(*id);
        if v == 0.0 {
            return Err(Error::InvalidOption(format!(
                "{} is zero and cannot be fitted on a log scale; hold it fixed",
                id.name()
            )));
        }
        x0.push(v.abs().ln());
        signs.push(v.signum());
        lower.push(bounds.lower[id.index()].ln());
        upper.push(bounds.upper[id.index()].ln());
    }
    let problem = Problem {
        data: &data,
        base: *init,
        free: free.clone(),
        signs,
        lower,
        upper,
        jac_step: opts.jacobian_step,
    };
    let mut x = x0;
    problem.clamp(&mut x);
    let mut r = problem.residuals(&x)?;
    let mut cost = cost_of(&r);
    let mut trace = vec![cost];
    let n = x.len();
    let mut lambda = opts.damping_init;
    let mut nu = 2.0;
    let mut scale = vec![0.0f64; n];
    let mut iterations = 0;
    let mut jac = problem.jacobian(&x)?;
    let termination = loop {
        if cost <= opts.cost_tol {
            break Termination::ExactFit;
        }
        for k in 0..n {
            scale[k] = scale[k].max(jac.column(k).norm());
        }
        let dinv: Vec<f64> = scale.iter().map(|s| if *s > 0.0 { 1.0 / s } else { 1.0 }).collect();
        let mut js = jac.clone();
        for k in 0..n {
            js.column_mut(k).scale_mut(dinv[k]);
        }
        let rv = DVector::from_vec(r.clone());
        let rnorm = rv.norm();
        let grad = js.transpose() * &rv;
        let gmax = (0..n)
            .map(|k| {
                let c = js.column(k).norm();
                if c > 0.0 {
                    (grad[k] / (c * rnorm)).abs()
                } else {
                    0.0
                }
            })
            .fold(0.0, f64::max);
        if gmax <= opts.gradient_tol {
            break Termination::Gradient;
        }
        if iterations >= opts.max_iter {
            break Termination::MaxIterations;
        }
        let svd = js.clone().svd(true, true);
        let (u, vt) = (svd.u.as_ref().unwrap(), svd.v_t.as_ref().unwrap());
        let solve = |lambda: f64, rhs: &DVector<f64>| -> Vec<f64> {
            let ur = u.transpose() * rhs;
            let mut d = DVector::zeros(n);
            for (i, &sv) in svd.singular_values.iter().enumerate() {
                let coef = -sv / (sv * sv + lambda) * ur[i];
                d += vt.row(i).transpose() * coef;
            }
            (0..n).map(|k| d[k] * dinv[k]).collect()
        };
        let mut accepted = false;
        let mut small_step = false;
        while lambda <= opts.damping_max {
            let mut delta = solve(lambda, &rv);
            if opts.geodesic_acceleration {
                if let Some(acc) = problem.acceleration(&x, &r, &delta, |rhs| solve(lambda, rhs))? {
                    for k in 0..n {
                        delta[k] += 0.5 * acc[k];
                    }
                }
            }
            let mut xt: Vec<f64> = x.iter().zip(&delta).map(|(a, b)| a + b).collect();
            problem.clamp(&mut xt);
            let actual: Vec<f64> = xt.iter().zip(&x).map(|(a, b)| a - b).collect();
            let step_norm = actual.iter().map(|v| v * v).sum::<f64>().sqrt();
            let x_norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            if step_norm <= opts.step_tol * (x_norm + opts.step_tol) {
                small_step = true;
                break;
            }
            let rt = problem.residuals(&xt);
            let Ok(rt) = rt else {
                lambda *= nu;
                nu *= 2.0;
                continue;
            };
            let cost_t = cost_of(&rt);
            let pred_r = &rv + &jac * DVector::from_vec(actual.clone());
            let predicted = cost - pred_r.norm_squared();
            let rho = if predicted > 0.0 {
                (cost - cost_t) / predicted
            } else {
                -1.0
            };
            if rho > 0.0 && cost_t < cost {
                x = xt;
                r = rt;
                cost = cost_t;
                lambda *= (1.0f64 / 3.0).max(1.0 - (2.0 * rho - 1.0).powi(3));
                nu = 2.0;
                accepted = true;
                break;
            }
            lambda *= nu;
            nu *= 2.0;
        }
        if small_step {
            break Termination::Step;
        }
        if !accepted {
            break Termination::DampingCeiling;
        }
        iterations += 1;
        trace.push(cost);
        jac = problem.jacobian(&x)?;
    };
    let converged = matches!(
        termination,
        Termination::ExactFit | Termination::Gradient | Termination::Step
    );
    let (covariance, unbounded) = covariance(&jac, cost, &free);
    Ok(FitResult {
        groups_hat: problem.params(&x),
        cost,
        iterations,
        converged,
        termination,
        param_labels: free.iter().map(|id| id.name().to_string()).collect(),
        covariance,
        unbounded,
        residual_trace: trace,
        options: opts.clone(),
    })
}

fn covariance(jac: &DMatrix<f64>, cost: f64, free: &[GroupId]) -> (DMatrix<f64>, Vec<String>) {
    let (m, n) = jac.shape();
    let s2 = if m > n { cost / (m - n) as f64 } else { 0.0 };
    let svd = jac.clone().svd(false, true);
    let vt = svd.v_t.unwrap();
    let smax = svd.singular_values.max();
    let mut cov = DMatrix::zeros(n, n);
    let mut null = vec![0.0; n];
    for (i, &sv) in svd.singular_values.iter().enumerate() {
        let row = vt.row(i);
        if sv > 1e-8 * smax {
            cov += row.transpose() * row * (s2 / (sv * sv));
        } else {
            for k in 0..n {
                null[k] += row[k] * row[k];
            }
        }
    }
    let unbounded = (0..n)
        .filter(|&k| null[k] > 1e-12)
        .map(|k| free[k].name().to_string())
        .collect();
    (cov, unbounded)
}

/// Outcome of one start of [`multistart_fit`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StartOutcome {
    pub index: usize,
    pub start: GroupedParameters,
    pub cost: f64,
    pub converged: bool,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultistartResult {
    pub best: FitResult,
    pub best_index: usize,
    pub starts: Vec<StartOutcome>,
}

/// Start `i` drawn log-uniformly within `bounds`, with the signs and `a_cc`
/// of `template`. Stream `i` of a ChaCha8 generator seeded with `seed`.
pub fn draw_start(template: &GroupedParameters, bounds: &Bounds, seed: u64, i: usize) -> GroupedParameters {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(i as u64);
    let mut g = *template;
    for id in GroupId::ALL {
        let k = id.index();
        let (lo, hi) = (bounds.lower[k].ln(), bounds.upper[k].ln());
        let u: f64 = Uniform::new_inclusive(lo, hi).expect("ordered bounds").sample(&mut rng);
        let sign = if template.get(id) < 0.0 { -1.0 } else { 1.0 };
        g.set(id, sign * u.exp());
    }
    g
}

/// Fits from `n_starts` random starts in parallel and keeps the lowest cost
/// (ties go to the lower start index). Quantities listed in
/// `opts.fixed` keep the template value in every start.
pub fn multistart_fit(
    data: &ImpedanceSpectrum,
    template: &GroupedParameters,
    bounds: &Bounds,
    n_starts: usize,
    seed: u64,
    opts: &FitOptions,
) -> Result<MultistartResult> {
    if n_starts == 0 {
        return Err(Error::InvalidOption("n_starts must be at least 1".into()));
    }
    bounds.check()?;
    let opts = FitOptions {
        bounds: Some(bounds.clone()),
        multistart_count: n_starts,
        rng_seed: seed,
        ..opts.clone()
    };
    let fits: Vec<(GroupedParameters, FitResult)> = (0..n_starts)
        .into_par_iter()
        .map(|i| {
            let mut start = draw_start(template, bounds, seed, i);
            for id in &opts.fixed {
                start.set(*id, template.get(*id));
            }
            fit(data, &start, &opts).map(|r| (start, r))
        })
        .collect::<Result<_>>()?;
    let mut best_index = 0;
    for (i, (_, r)) in fits.iter().enumerate() {
        if r.cost < fits[best_index].1.cost {
            best_index = i;
        }
    }
    let starts = fits
        .iter()
        .enumerate()
        .map(|(index, (start, r))| StartOutcome {
            index,
            start: *start,
            cost: r.cost,
            converged: r.converged,
            iterations: r.iterations,
        })
        .collect();
    Ok(MultistartResult {
        best: fits[best_index].1.clone(),
        best_index,
        starts,
    })
}

/// Model spectrum plus independent Gaussian noise of standard deviation
/// `noise_rel·|z|` on the real and imaginary parts.
pub fn synth_data(g: &GroupedParameters, freqs: &[f64], noise_rel: f64, seed: u64) -> Result<ImpedanceSpectrum> {
    if !(noise_rel >= 0.0 && noise_rel.is_finite()) {
        return Err(Error::InvalidOption(format!(
            "noise_rel must be non-negative, got {noise_rel}"
        )));
    }
    let clean = spectrum(g, freqs)?;
    if noise_rel == 0.0 {
        return Ok(clean);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let z = clean
        .z()
        .iter()
        .map(|z| {
            let a: f64 = StandardNormal.sample(&mut rng);
            let b: f64 = StandardNormal.sample(&mut rng);
            z + noise_rel * z.norm() * Complex64::new(a, b)
        })
        .collect();
    ImpedanceSpectrum::new(freqs.to_vec(), z, None)
}

/// Multiplies every estimated quantity by `1 + u`, `u` uniform in
/// `[−frac, frac]` (ChaCha8, seeded).
pub fn perturb(g: &GroupedParameters, frac: f64, seed: u64) -> GroupedParameters {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dist = Uniform::new_inclusive(-frac, frac).expect("finite fraction");
    let mut q = *g;
    for id in GroupId::ALL {
        q.set(id, g.get(id) * (1.0 + dist.sample(&mut rng)));
    }
    q
}
