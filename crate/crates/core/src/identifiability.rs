//! Local identifiability: log-parameter sensitivity of the spectrum, its
//! numerical rank, and the Fisher information it implies.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::impedance::{check_grid, total_impedance, ComplexFrequency};
use crate::params::{
    electrolyte_gain_gauge, gauge_transform, group_parameters, FullCellParameters, GroupId, GroupedParameters,
    Submodel, FULL_FIELD_NAMES,
};

/// Finite-difference scheme for the log-parameter derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiffScheme {
    #[default]
    Central,
    Forward,
}

/// Row scaling of the sensitivity matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Weighting {
    /// Rows divided by `|H(f)|`: derivatives of the relative error, matching
    /// noise proportional to the impedance magnitude.
    #[default]
    Relative,
    /// Plain derivatives in Ω.
    Absolute,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensitivityOptions {
    pub scheme: DiffScheme,
    pub rel_step: f64,
    pub weighting: Weighting,
}

impl Default for SensitivityOptions {
    fn default() -> Self {
        Self {
            scheme: DiffScheme::Central,
            rel_step: 1e-4,
            weighting: Weighting::Relative,
        }
    }
}

/// `∂H/∂log θ` stacked as all real parts followed by all imaginary parts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityMatrix {
    pub entries: DMatrix<f64>,
    pub param_labels: Vec<String>,
    pub freq_grid: Vec<f64>,
}

impl SensitivityMatrix {
    pub fn column(&self, label: &str) -> Option<Vec<f64>> {
        let j = self.param_labels.iter().position(|l| l == label)?;
        Some(self.entries.column(j).iter().copied().collect())
    }

    pub fn column_norms(&self) -> Vec<f64> {
        self.entries.column_iter().map(|c| c.norm()).collect()
    }

    /// Drops the named columns (parameters treated as known).
    pub fn without(&self, labels: &[&str]) -> Self {
        let keep: Vec<usize> = (0..self.param_labels.len())
            .filter(|&j| !labels.contains(&self.param_labels[j].as_str()))
            .collect();
        Self {
            entries: self.entries.select_columns(&keep),
            param_labels: keep.iter().map(|&j| self.param_labels[j].clone()).collect(),
            freq_grid: self.freq_grid.clone(),
        }
    }

    /// Appends a copy of the named column under the label `"<name>#dup"`.
    pub fn with_duplicate(&self, label: &str) -> Result<Self> {
        let col = self
            .column(label)
            .ok_or_else(|| Error::InvalidOption(format!("no sensitivity column named {label}")))?;
        let mut entries = self.entries.clone().insert_column(self.entries.ncols(), 0.0);
        let last = entries.ncols() - 1;
        entries.column_mut(last).copy_from_slice(&col);
        let mut param_labels = self.param_labels.clone();
        param_labels.push(format!("{label}#dup"));
        Ok(Self {
            entries,
            param_labels,
            freq_grid: self.freq_grid.clone(),
        })
    }
}

fn evaluate<F>(model: &F, freqs: &[f64]) -> Result<Vec<Complex64>>
where
    F: Fn(ComplexFrequency) -> Result<Complex64>,
{
    freqs
        .iter()
        .map(|&f| {
            let z = model(ComplexFrequency::from_hz(f))?;
            if z.is_finite() {
                Ok(z)
            } else {
                Err(Error::NonFinite { freq_hz: f })
            }
        })
        .collect()
}

/// Generic builder: `perturb(j, factor)` returns the model with parameter `j`
/// multiplied by `factor`.
fn build<P, M>(
    labels: Vec<String>,
    freqs: &[f64],
    opts: &SensitivityOptions,
    perturb: P,
    model: M,
) -> Result<SensitivityMatrix>
where
    P: Fn(usize, f64) -> Result<Option<GroupedParameters>> + Sync,
    M: Fn(&GroupedParameters, ComplexFrequency) -> Result<Complex64> + Sync,
{
    check_grid(freqs)?;
    if !(opts.rel_step > 0.0 && opts.rel_step <= 0.1) {
        return Err(Error::InvalidOption(format!(
            "rel_step must lie in (0, 0.1], got {}",
            opts.rel_step
        )));
    }
    let base = perturb(usize::MAX, 1.0)?.expect("unperturbed model");
    let h0 = evaluate(&|s| model(&base, s), freqs)?;
    let scale: Vec<f64> = match opts.weighting {
        Weighting::Relative => h0.iter().map(|z| 1.0 / z.norm()).collect(),
        Weighting::Absolute => vec![1.0; freqs.len()],
    };
    let h = opts.rel_step;
    let columns: Vec<Vec<f64>> = (0..labels.len())
        .into_par_iter()
        .map(|j| -> Result<Vec<f64>> {
            let plus = perturb(j, h.exp())?;
            let Some(plus) = plus else {
                return Ok(vec![0.0; 2 * freqs.len()]);
            };
            let hp = evaluate(&|s| model(&plus, s), freqs)?;
            let d: Vec<Complex64> = match opts.scheme {
                DiffScheme::Central => {
                    let minus = perturb(j, (-h).exp())?.expect("perturbation exists");
                    let hm = evaluate(&|s| model(&minus, s), freqs)?;
                    hp.iter().zip(&hm).map(|(a, b)| (a - b) / (2.0 * h)).collect()
                }
                DiffScheme::Forward => hp.iter().zip(&h0).map(|(a, b)| (a - b) / h).collect(),
            };
            let re = d.iter().zip(&scale).map(|(d, w)| d.re * w);
            let im = d.iter().zip(&scale).map(|(d, w)| d.im * w);
            Ok(re.chain(im).collect())
        })
        .collect::<Result<_>>()?;
    let n = 2 * freqs.len();
    let entries = DMatrix::from_fn(n, labels.len(), |i, j| columns[j][i]);
    if entries.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite { freq_hz: f64::NAN });
    }
    Ok(SensitivityMatrix {
        entries,
        param_labels: labels,
        freq_grid: freqs.to_vec(),
    })
}

/// 22 columns: the 21 groups then `r_res`, in [`GroupId::ALL`] order.
pub fn sensitivity_matrix(
    g: &GroupedParameters,
    freqs: &[f64],
    scheme: DiffScheme,
    rel_step: f64,
) -> Result<SensitivityMatrix> {
    sensitivity_matrix_with(
        g,
        freqs,
        &SensitivityOptions {
            scheme,
            rel_step,
            ..Default::default()
        },
    )
}

pub fn sensitivity_matrix_with(
    g: &GroupedParameters,
    freqs: &[f64],
    opts: &SensitivityOptions,
) -> Result<SensitivityMatrix> {
    let labels = GroupId::ALL.iter().map(|id| id.name().to_string()).collect();
    let g = *g;
    build(
        labels,
        freqs,
        opts,
        |j, factor| {
            let mut q = g;
            if j < GroupId::ALL.len() {
                let id = GroupId::ALL[j];
                q.set(id, g.get(id) * factor);
            }
            Ok(Some(q))
        },
        total_impedance,
    )
}

/// Raw physical parameters included in [`raw_sensitivity_matrix`]: every
/// field except the known `a_cc`.
pub fn raw_parameter_names() -> Vec<&'static str> {
    FULL_FIELD_NAMES.iter().copied().filter(|n| *n != "a_cc").collect()
}

/// Sensitivity to the raw physical parameters through the grouped model.
pub fn raw_sensitivity_matrix(
    full: &FullCellParameters,
    freqs: &[f64],
    opts: &SensitivityOptions,
) -> Result<SensitivityMatrix> {
    let names = raw_parameter_names();
    let index: Vec<usize> = names
        .iter()
        .map(|n| FULL_FIELD_NAMES.iter().position(|f| f == n).unwrap())
        .collect();
    let full = *full;
    build(
        names.iter().map(|s| s.to_string()).collect(),
        freqs,
        opts,
        |j, factor| {
            let mut v = full.to_array();
            if j < index.len() {
                if v[index[j]] == 0.0 {
                    return Ok(None);
                }
                v[index[j]] *= factor;
            }
            group_parameters(&FullCellParameters::from_array(v)).map(Some)
        },
        total_impedance,
    )
}

/// Outcome of [`rank_analysis`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankReport {
    pub columns: usize,
    pub rank: usize,
    pub tol_ratio: f64,
    /// Descending.
    pub singular_values: Vec<f64>,
    /// `σ_max/σ_min`; infinite when `σ_min = 0`.
    pub condition_number: f64,
    pub near_collinear_pairs: Vec<CollinearPair>,
    /// Right singular vectors below the rank threshold, as
    /// `(label, component)` lists sorted by decreasing magnitude and
    /// trimmed to components above `1e-3`.
    pub null_directions: Vec<Vec<(String, f64)>>,
}

impl RankReport {
    pub fn deficiency(&self) -> usize {
        self.columns - self.rank
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollinearPair {
    pub a: String,
    pub b: String,
    /// Absolute cosine of the angle between the two columns.
    pub correlation: f64,
}

pub const COLLINEAR_THRESHOLD: f64 = 0.999;

struct SortedSvd {
    values: Vec<f64>,
    /// Columns are right singular vectors, ordered like `values`.
    v: DMatrix<f64>,
}

fn sorted_svd(m: &DMatrix<f64>) -> SortedSvd {
    let svd = m.clone().svd(false, true);
    let vt = svd.v_t.expect("requested V");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let values = order.iter().map(|&i| svd.singular_values[i]).collect();
    let mut v = DMatrix::zeros(m.ncols(), order.len());
    for (k, &i) in order.iter().enumerate() {
        for r in 0..m.ncols() {
            v[(r, k)] = vt[(i, r)];
        }
    }
    SortedSvd { values, v }
}

/// Numerical rank at threshold `tol_ratio·σ_max`, conditioning and
/// near-duplicate columns.
pub fn rank_analysis(s: &SensitivityMatrix, tol_ratio: f64) -> Result<RankReport> {
    let m = &s.entries;
    if m.nrows() == 0 || m.ncols() == 0 {
        return Err(Error::Empty("sensitivity matrix"));
    }
    if !(tol_ratio > 0.0 && tol_ratio < 1.0) {
        return Err(Error::InvalidOption(format!(
            "tol_ratio must lie in (0, 1), got {tol_ratio}"
        )));
    }
    let svd = sorted_svd(m);
    let smax = svd.values[0];
    let rank = svd.values.iter().filter(|&&v| v >= tol_ratio * smax && v > 0.0).count();
    let columns = m.ncols();
    // Thin SVD of a wide matrix has fewer values than columns.
    let smin = if svd.values.len() < columns {
        0.0
    } else {
        *svd.values.last().unwrap()
    };
    let mut null_directions = Vec::new();
    for k in rank..svd.values.len() {
        let mut dir: Vec<(String, f64)> = (0..columns)
            .map(|r| (s.param_labels[r].clone(), svd.v[(r, k)]))
            .filter(|(_, c)| c.abs() > 1e-3)
            .collect();
        dir.sort_by(|a, b| b.1.abs().total_cmp(&a.1.abs()));
        null_directions.push(dir);
    }
    let norms: Vec<f64> = m.column_iter().map(|c| c.norm()).collect();
    let mut pairs = Vec::new();
    for a in 0..columns {
        for b in a + 1..columns {
            if norms[a] == 0.0 || norms[b] == 0.0 {
                continue;
            }
            let cos = (m.column(a).dot(&m.column(b)) / (norms[a] * norms[b])).abs();
            if cos > COLLINEAR_THRESHOLD {
                pairs.push(CollinearPair {
                    a: s.param_labels[a].clone(),
                    b: s.param_labels[b].clone(),
                    correlation: cos,
                });
            }
        }
    }
    Ok(RankReport {
        columns,
        rank,
        tol_ratio,
        condition_number: if smin > 0.0 { smax / smin } else { f64::INFINITY },
        singular_values: svd.values,
        near_collinear_pairs: pairs,
        null_directions,
    })
}

/// Fisher information `SᵀS/σ²` and Cramér–Rao bounds in log-parameter
/// units (relative standard deviations for small values).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FisherReport {
    pub noise_sd: f64,
    pub information: DMatrix<f64>,
    pub param_labels: Vec<String>,
    /// `None` marks a parameter with a component along an unresolved
    /// direction (unbounded variance).
    pub crlb_sd: Vec<Option<f64>>,
    pub unbounded: Vec<String>,
}

/// Singular directions below `1e-8·σ_max` are treated as unresolved.
pub fn fisher_information(s: &SensitivityMatrix, noise_sd: f64) -> Result<FisherReport> {
    fisher_information_with_tol(s, noise_sd, 1e-8)
}

pub fn fisher_information_with_tol(s: &SensitivityMatrix, noise_sd: f64, tol_ratio: f64) -> Result<FisherReport> {
    if !(noise_sd > 0.0 && noise_sd.is_finite()) {
        return Err(Error::InvalidOption(format!(
            "noise_sd must be positive, got {noise_sd}"
        )));
    }
    let m = &s.entries;
    if m.nrows() == 0 || m.ncols() == 0 {
        return Err(Error::Empty("sensitivity matrix"));
    }
    let information = m.transpose() * m / (noise_sd * noise_sd);
    let svd = sorted_svd(m);
    let n = m.ncols();
    let smax = svd.values[0];
    let kept = svd.values.iter().filter(|&&v| v > tol_ratio * smax).count();
    let mut crlb_sd = Vec::with_capacity(n);
    let mut unbounded = Vec::new();
    for i in 0..n {
        let null_weight: f64 = (kept..n)
            .map(|k| {
                if k < svd.values.len() {
                    svd.v[(i, k)].powi(2)
                } else {
                    0.0
                }
            })
            .sum::<f64>()
            + if svd.values.len() < n {
                // Columns beyond the thin SVD lie entirely in the null space;
                // their weight is what the kept vectors miss.
                1.0 - (0..svd.values.len()).map(|k| svd.v[(i, k)].powi(2)).sum::<f64>()
            } else {
                0.0
            };
        if null_weight > 1e-12 {
            crlb_sd.push(None);
            unbounded.push(s.param_labels[i].clone());
        } else {
            let var: f64 = (0..kept).map(|k| (svd.v[(i, k)] / svd.values[k]).powi(2)).sum();
            crlb_sd.push(Some(noise_sd * var.sqrt()));
        }
    }
    Ok(FisherReport {
        noise_sd,
        information,
        param_labels: s.param_labels.clone(),
        crlb_sd,
        unbounded,
    })
}

/// Gauge transformations available for the nullity check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Gauge {
    Submodel(Submodel),
    /// [`electrolyte_gain_gauge`]: moves the reactivities against the
    /// concentration gains.
    ElectrolyteGain,
}

/// Norm of the directional derivative `dH/dlog α` of the (weighted, stacked)
/// spectrum along a gauge direction, by central differences.
pub fn gauge_direction_derivative(
    full: &FullCellParameters,
    freqs: &[f64],
    gauge: Gauge,
    opts: &SensitivityOptions,
) -> Result<f64> {
    check_grid(freqs)?;
    let apply = |alpha: f64| -> Result<GroupedParameters> {
        let q = match gauge {
            Gauge::Submodel(m) => gauge_transform(full, m, alpha)?,
            Gauge::ElectrolyteGain => electrolyte_gain_gauge(full, alpha)?,
        };
        group_parameters(&q)
    };
    let h = opts.rel_step;
    let base = evaluate(&|s| total_impedance(&group_parameters(full)?, s), freqs)?;
    let gp = apply(h.exp())?;
    let gm = apply((-h).exp())?;
    let hp = evaluate(&|s| total_impedance(&gp, s), freqs)?;
    let hm = evaluate(&|s| total_impedance(&gm, s), freqs)?;
    let mut acc = 0.0;
    for i in 0..freqs.len() {
        let w = match opts.weighting {
            Weighting::Relative => 1.0 / base[i].norm(),
            Weighting::Absolute => 1.0,
        };
        acc += ((hp[i] - hm[i]) / (2.0 * h) * w).norm_sqr();
    }
    Ok(acc.sqrt())
}
