//! Brute-force discretization of the linearized cell PDEs into a linear
//! state-space system, used to check every closed-form transfer function.
//!
//! All realizations take the total applied current (A) as input and return
//! the voltage (V) as output.

mod band;
mod electrolyte;
mod overpotential;
mod solid;

pub use band::{BandLu, BandMatrix};
pub use electrolyte::discretize_electrolyte;
pub use overpotential::discretize_overpotential;
pub use solid::discretize_solid;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::impedance::ComplexFrequency;
use crate::params::{Domain, FullCellParameters, Submodel};

/// Grid resolution: finite-volume cells per through-plane domain (anode,
/// separator, cathode) and radial shells per particle.
///
/// The overpotential grids reuse the anode and cathode cell counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mesh {
    pub cells_x: [usize; 3],
    pub shells_r: usize,
}

impl Mesh {
    pub const MIN_COUNT: usize = 4;

    pub fn new(cells_x: [usize; 3], shells_r: usize) -> Result<Self> {
        let m = Self { cells_x, shells_r };
        m.check()?;
        Ok(m)
    }

    /// 800 cells per domain, 2000 shells.
    pub fn reference() -> Self {
        Self {
            cells_x: [800; 3],
            shells_r: 2000,
        }
    }

    /// Every count multiplied by `k`.
    pub fn refined(&self, k: usize) -> Self {
        Self {
            cells_x: self.cells_x.map(|c| c * k),
            shells_r: self.shells_r * k,
        }
    }

    pub fn check(&self) -> Result<()> {
        let got = self.cells_x.iter().copied().chain([self.shells_r]).min().unwrap_or(0);
        if got < Self::MIN_COUNT {
            Err(Error::MeshTooCoarse {
                min: Self::MIN_COUNT,
                got,
            })
        } else {
            Ok(())
        }
    }
}

/// Where a state lives.
///
/// `coordinate` is the radius (m) for particle states, the distance from the
/// anode current collector (m) for electrolyte states, and the distance
/// from the electrode's own current collector (m) for overpotential states.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StateLabel {
    pub submodel: Submodel,
    pub domain: Domain,
    pub coordinate: f64,
}

/// `ẋ = A x + B I`, `v = C x + D I`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateSpaceRealization {
    pub a: BandMatrix,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    pub d: f64,
    pub labels: Vec<StateLabel>,
}

impl StateSpaceRealization {
    pub fn new(a: BandMatrix, b: Vec<f64>, c: Vec<f64>, d: f64, labels: Vec<StateLabel>) -> Result<Self> {
        let n = a.dim();
        if b.len() != n || c.len() != n || labels.len() != n {
            return Err(Error::Dimension(format!(
                "A is {n}×{n} but B, C, labels have lengths {}, {}, {}",
                b.len(),
                c.len(),
                labels.len()
            )));
        }
        Ok(Self { a, b, c, d, labels })
    }

    pub fn order(&self) -> usize {
        self.a.dim()
    }

    /// Block-diagonal stacking; feedthroughs add.
    pub fn stack(parts: &[&StateSpaceRealization]) -> Self {
        let blocks: Vec<&BandMatrix> = parts.iter().map(|p| &p.a).collect();
        Self {
            a: BandMatrix::block_diagonal(&blocks),
            b: parts.iter().flat_map(|p| p.b.iter().copied()).collect(),
            c: parts.iter().flat_map(|p| p.c.iter().copied()).collect(),
            d: parts.iter().map(|p| p.d).sum(),
            labels: parts.iter().flat_map(|p| p.labels.iter().copied()).collect(),
        }
    }

    /// Bundle of `(A, B, C, D)` with `A` in dense row-major form.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "schema_version": "1",
            "order": self.order(),
            "a": self.a.to_dense(),
            "b": self.b,
            "c": self.c,
            "d": self.d,
            "labels": self.labels,
        })
    }
}

/// Full cell: both particles, electrolyte and both overpotential grids in
/// one block-diagonal system with feedthrough `−R_res`.
pub fn discretize_cell(full: &FullCellParameters, mesh: &Mesh) -> Result<StateSpaceRealization> {
    let solid = discretize_solid(full, mesh)?;
    let electrolyte = discretize_electrolyte(full, mesh)?;
    let eta = discretize_overpotential(full, mesh)?;
    let mut ss = StateSpaceRealization::stack(&[&solid, &electrolyte, &eta]);
    ss.d = -full.series_resistance();
    Ok(ss)
}

/// Discretization of a single sub-model (no feedthrough).
pub fn discretize(full: &FullCellParameters, mesh: &Mesh, submodel: Submodel) -> Result<StateSpaceRealization> {
    match submodel {
        Submodel::Solid => discretize_solid(full, mesh),
        Submodel::Electrolyte => discretize_electrolyte(full, mesh),
        Submodel::Overpotential => discretize_overpotential(full, mesh),
    }
}

/// Solution `x = (sI − A)⁻¹ B` of the shifted system.
pub fn solve_states(ss: &StateSpaceRealization, s: ComplexFrequency) -> Result<Vec<Complex64>> {
    let lu = ss.a.factor_shifted(s.s, -1.0).map_err(|_| Error::SingularShift(s.s))?;
    let mut x: Vec<Complex64> = ss.b.iter().map(|&b| Complex64::new(b, 0.0)).collect();
    lu.solve_in_place(&mut x);
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::SingularShift(s.s));
    }
    Ok(x)
}

/// `D + C (sI − A)⁻¹ B`.
///
/// The output sum is accumulated separately over each contiguous run of
/// states with the same sub-model and domain before the runs are added, so
/// mirror-image blocks cancel exactly.
pub fn frequency_response(ss: &StateSpaceRealization, s: ComplexFrequency) -> Result<Complex64> {
    let x = solve_states(ss, s)?;
    let mut total = Complex64::new(0.0, 0.0);
    let mut i = 0;
    while i < x.len() {
        let key = (ss.labels[i].submodel, ss.labels[i].domain);
        let mut part = Complex64::new(0.0, 0.0);
        while i < x.len() && (ss.labels[i].submodel, ss.labels[i].domain) == key {
            part += ss.c[i] * x[i];
            i += 1;
        }
        total += part;
    }
    Ok(total + ss.d)
}

/// [`frequency_response`] at `s = i·2πf` for each frequency.
pub fn frequency_response_hz(ss: &StateSpaceRealization, freqs: &[f64]) -> Result<Vec<Complex64>> {
    use rayon::prelude::*;
    freqs
        .par_iter()
        .map(|&f| frequency_response(ss, ComplexFrequency::from_hz(f)))
        .collect()
}

/// Voltage samples at `t = dt, 2dt, …, n·dt` after a current step of
/// `amplitude` amperes applied at `t = 0` from rest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepTrace {
    pub times: Vec<f64>,
    pub voltage: Vec<f64>,
}

/// Trapezoidal time stepping, started with two backward-Euler half steps so
/// that the stiff modes excited by the step are damped rather than left
/// oscillating.
pub fn step_response(ss: &StateSpaceRealization, dt: f64, n: usize, amplitude: f64) -> Result<StepTrace> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidOption(format!("time step must be positive, got {dt}")));
    }
    let order = ss.order();
    if ss.b.len() != order || ss.c.len() != order {
        return Err(Error::Dimension("B or C length differs from state order".into()));
    }
    let h = 0.5 * dt;
    // Both schemes share I − (dt/2)A.
    let lu =
        ss.a.factor_shifted(1.0f64, -h)
            .map_err(|_| Error::InvalidOption(format!("time step {dt} makes I − (dt/2)A singular")))?;
    let output = |x: &[f64]| ss.c.iter().zip(x).map(|(c, x)| c * x).sum::<f64>() + ss.d * amplitude;
    let mut x = vec![0.0; order];
    let mut times = Vec::with_capacity(n);
    let mut voltage = Vec::with_capacity(n);
    for k in 1..=n {
        if k == 1 {
            for _ in 0..2 {
                let mut rhs: Vec<f64> = x.iter().zip(&ss.b).map(|(x, b)| x + h * b * amplitude).collect();
                lu.solve_in_place(&mut rhs);
                x = rhs;
            }
        } else {
            let ax = ss.a.mul_vec(&x);
            let mut rhs: Vec<f64> = (0..order)
                .map(|i| x[i] + h * ax[i] + dt * ss.b[i] * amplitude)
                .collect();
            lu.solve_in_place(&mut rhs);
            x = rhs;
        }
        times.push(k as f64 * dt);
        voltage.push(output(&x));
    }
    Ok(StepTrace { times, voltage })
}

/// Default step: `10⁻³` of the fastest double-layer time constant.
pub fn default_time_step(full: &FullCellParameters) -> Result<f64> {
    let g = crate::params::group_parameters(full)?;
    Ok(1e-3 * g.tau_eta_1.min(g.tau_eta_3))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::impedance::solid_diffusion_residue;
    use crate::params::group_parameters;

    fn label() -> StateLabel {
        StateLabel {
            submodel: Submodel::Solid,
            domain: Domain::Anode,
            coordinate: 0.0,
        }
    }

    fn integrator() -> StateSpaceRealization {
        StateSpaceRealization::new(BandMatrix::zeros(1, 0, 0), vec![1.0], vec![1.0], 0.0, vec![label()]).unwrap()
    }

    #[test]
    fn integrator_frequency_response() {
        let h = frequency_response(&integrator(), ComplexFrequency::new(Complex64::new(0.0, 1.0))).unwrap();
        assert!((h - Complex64::new(0.0, -1.0)).norm() < 1e-15);
    }

    #[test]
    fn integrator_at_its_pole() {
        let r = frequency_response(&integrator(), ComplexFrequency::new(Complex64::new(0.0, 0.0)));
        assert!(matches!(r, Err(Error::SingularShift(_))));
    }

    #[test]
    fn integrator_step_is_a_ramp() {
        let tr = step_response(&integrator(), 0.1, 20, 2.5).unwrap();
        for (t, v) in tr.times.iter().zip(&tr.voltage) {
            assert!((v - 2.5 * t).abs() < 1e-12);
        }
    }

    #[test]
    fn mesh_limits() {
        assert!(matches!(
            Mesh::new([3, 10, 10], 10),
            Err(Error::MeshTooCoarse { got: 3, .. })
        ));
        assert!(Mesh::new([4, 4, 4], 4).is_ok());
    }

    #[test]
    fn dimension_mismatch() {
        assert!(StateSpaceRealization::new(
            BandMatrix::zeros(2, 0, 0),
            vec![1.0],
            vec![1.0, 1.0],
            0.0,
            vec![label(); 2]
        )
        .is_err());
    }

    #[test]
    fn zero_amplitude_zero_trace() {
        let p = FullCellParameters::reference();
        let ss = discretize_cell(&p, &Mesh::new([20, 20, 20], 20).unwrap()).unwrap();
        let tr = step_response(&ss, 1e-3, 10, 0.0).unwrap();
        assert!(tr.voltage.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn combined_equals_sum_of_parts() {
        let p = FullCellParameters::reference();
        let mesh = Mesh::new([40, 40, 40], 40).unwrap();
        let s = ComplexFrequency::from_hz(1.0);
        let whole = frequency_response(&discretize_cell(&p, &mesh).unwrap(), s).unwrap();
        let parts: Complex64 = [Submodel::Solid, Submodel::Electrolyte, Submodel::Overpotential]
            .iter()
            .map(|m| frequency_response(&discretize(&p, &mesh, *m).unwrap(), s).unwrap())
            .sum();
        let expected = parts - p.series_resistance();
        assert!((whole - expected).norm() <= 1e-12 * whole.norm());
    }

    #[test]
    fn long_time_slope_is_the_integrator_residue() {
        let p = FullCellParameters::reference();
        let g = group_parameters(&p).unwrap();
        let mesh = Mesh::new([30, 30, 30], 200).unwrap();
        let ss = discretize_cell(&p, &mesh).unwrap();
        // Long enough for the slowest electrolyte mode (≈ 15 s) to die out.
        let dt = 0.25;
        let tr = step_response(&ss, dt, 1600, 1.0).unwrap();
        let n = tr.voltage.len();
        let slope = (tr.voltage[n - 1] - tr.voltage[n - 201]) / (200.0 * dt);
        let residue = solid_diffusion_residue(&g);
        assert!(((slope - residue) / residue).abs() < 1e-3, "{slope} {residue}");
    }
}
