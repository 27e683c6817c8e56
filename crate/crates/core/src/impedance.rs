//! Closed-form transfer functions of the three decoupled sub-models.
//!
//! Every function returns the voltage response per ampere of total applied
//! current (positive = discharge), in Ω. Concentration profiles and the
//! boundary overpotential are per unit current density instead.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hyperbolic::{cosh_over_sinh, coth, csch, sqrt, tanh, tanh_minus_id};
use crate::params::{Domain, Electrode, FullCellParameters, GroupedParameters};

/// Laplace variable `s` in rad/s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexFrequency {
    pub s: Complex64,
}

impl ComplexFrequency {
    pub fn new(s: Complex64) -> Self {
        Self { s }
    }

    /// `s = i·2πf`.
    pub fn from_hz(f: f64) -> Self {
        Self::new(Complex64::new(0.0, 2.0 * std::f64::consts::PI * f))
    }

    /// `s = i·ω`.
    pub fn from_angular(omega: f64) -> Self {
        Self::new(Complex64::new(0.0, omega))
    }

    pub fn conj(self) -> Self {
        Self::new(self.s.conj())
    }

    fn nonzero(self) -> Result<Complex64> {
        if self.s == Complex64::new(0.0, 0.0) {
            Err(Error::ZeroFrequency)
        } else {
            Ok(self.s)
        }
    }
}

impl From<Complex64> for ComplexFrequency {
    fn from(s: Complex64) -> Self {
        Self::new(s)
    }
}

/// Impedance samples on a strictly increasing grid of positive frequencies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImpedanceSpectrum {
    freqs: Vec<f64>,
    z: Vec<Complex64>,
    weights: Option<Vec<f64>>,
}

impl ImpedanceSpectrum {
    pub fn new(freqs: Vec<f64>, z: Vec<Complex64>, weights: Option<Vec<f64>>) -> Result<Self> {
        check_grid(&freqs)?;
        if z.len() != freqs.len() {
            return Err(Error::Dimension(format!(
                "{} impedance samples for {} frequencies",
                z.len(),
                freqs.len()
            )));
        }
        if let Some(w) = &weights {
            if w.len() != freqs.len() {
                return Err(Error::Dimension(format!(
                    "{} weights for {} frequencies",
                    w.len(),
                    freqs.len()
                )));
            }
            if let Some(bad) = w.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
                return Err(Error::InvalidOption(format!("weight {bad} is not positive")));
            }
        }
        Ok(Self { freqs, z, weights })
    }

    /// Builds a spectrum from points in any order by sorting on frequency.
    pub fn from_unsorted(mut points: Vec<(f64, Complex64, Option<f64>)>) -> Result<Self> {
        points.sort_by(|a, b| a.0.total_cmp(&b.0));
        let has_w = points.first().is_some_and(|p| p.2.is_some());
        if points.iter().any(|p| p.2.is_some() != has_w) {
            return Err(Error::InvalidOption("weights given for only some points".into()));
        }
        let freqs = points.iter().map(|p| p.0).collect();
        let z = points.iter().map(|p| p.1).collect();
        let weights = has_w.then(|| points.iter().map(|p| p.2.unwrap_or(1.0)).collect());
        Self::new(freqs, z, weights)
    }

    pub fn freqs(&self) -> &[f64] {
        &self.freqs
    }

    pub fn z(&self) -> &[Complex64] {
        &self.z
    }

    pub fn weights(&self) -> Option<&[f64]> {
        self.weights.as_deref()
    }

    /// Weight of point `i`, 1 when the spectrum is unweighted.
    pub fn weight(&self, i: usize) -> f64 {
        self.weights.as_ref().map_or(1.0, |w| w[i])
    }

    pub fn with_weights(mut self, weights: Option<Vec<f64>>) -> Result<Self> {
        self.weights = None;
        Self::new(self.freqs, self.z, weights)
    }

    pub fn len(&self) -> usize {
        self.freqs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.freqs.is_empty()
    }
}

/// Rejects empty, non-positive, non-finite or non-increasing grids.
pub fn check_grid(freqs: &[f64]) -> Result<()> {
    if freqs.is_empty() {
        return Err(Error::Empty("frequency grid"));
    }
    let positive = freqs.iter().all(|f| f.is_finite() && *f > 0.0);
    let increasing = freqs.windows(2).all(|w| w[1] > w[0]);
    if positive && increasing {
        Ok(())
    } else {
        Err(Error::BadFrequencyGrid)
    }
}

/// `n` logarithmically spaced frequencies from `fmin` to `fmax` inclusive.
pub fn log_grid(fmin: f64, fmax: f64, n: usize) -> Result<Vec<f64>> {
    if !(fmin > 0.0 && fmax > fmin && fmax.is_finite()) || n < 1 || (n == 1 && fmin != fmax) {
        if n == 1 && fmin > 0.0 && fmin.is_finite() {
            return Ok(vec![fmin]);
        }
        return Err(Error::BadFrequencyGrid);
    }
    let (a, b) = (fmin.log10(), fmax.log10());
    let mut v: Vec<f64> = (0..n)
        .map(|i| 10f64.powf(a + (b - a) * i as f64 / (n - 1) as f64))
        .collect();
    v[0] = fmin;
    v[n - 1] = fmax;
    Ok(v)
}

/// Particle kernel `tanh z / (tanh z − z)` with `z = √(s/τ)`.
///
/// Behaves like `−3τ/s` near the origin and like `−1/z` at high frequency.
pub fn particle_kernel(tau: f64, s: Complex64) -> Complex64 {
    let z = sqrt(s / tau);
    tanh(z) / tanh_minus_id(z)
}

/// `β₃·g(√(s/τ₃)) − β₁·g(√(s/τ₁))`.
pub fn solid_diffusion_impedance(g: &GroupedParameters, s: ComplexFrequency) -> Result<Complex64> {
    let s = s.nonzero()?;
    Ok(g.beta_cs_3 * particle_kernel(g.tau_cs_3, s) - g.beta_cs_1 * particle_kernel(g.tau_cs_1, s))
}

/// Limit of `s·Z_solid(s)` as `s → 0`.
pub fn solid_diffusion_residue(g: &GroupedParameters) -> f64 {
    -3.0 * (g.beta_cs_3 * g.tau_cs_3 - g.beta_cs_1 * g.tau_cs_1)
}

/// Coefficients of the electrolyte concentration per unit current density.
///
/// In each domain with local coordinate `ξ ∈ [0, 1]` the concentration is
/// `A e^{νξ} + B e^{−νξ} + c_p`, where the particular part `c_p` is
/// `π₁/s` in the anode, `0` in the separator and `−π₃/s` in the cathode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ElectrolyteCoefficients {
    pub a1: Complex64,
    pub b1: Complex64,
    pub a2: Complex64,
    pub b2: Complex64,
    pub a3: Complex64,
    pub b3: Complex64,
}

/// Internal solution in the scaled form where no exponential grows.
#[derive(Debug, Clone, Copy)]
struct ElectrolyteSolution {
    s: Complex64,
    nu: [Complex64; 3],
    pi1: f64,
    pi3: f64,
    /// `A₂·e^{ν₂}`.
    a2_hat: Complex64,
    b2: Complex64,
    /// Concentration-gradient amplitude in the anode: `c = x1·cosh(ν₁ξ)/sinh ν₁ + π₁/s`.
    x1: Complex64,
    /// Same for the cathode: `c = −x3·cosh(ν₃(1−ξ))/sinh ν₃ − π₃/s`.
    x3: Complex64,
}

fn solve_electrolyte(g: &GroupedParameters, s: Complex64) -> Option<ElectrolyteSolution> {
    if g.pi_1 == 0.0 && g.pi_3 == 0.0 {
        return None;
    }
    let nu = [sqrt(s / g.tau_ce_1), sqrt(s / g.tau_ce_2), sqrt(s / g.tau_ce_3)];
    let p1 = g.theta_ce_11 * coth(nu[0]);
    let q = -g.theta_ce_12 * coth(nu[2]);
    let p2 = 1.0 - q;
    let p3 = 1.0 + q;
    let e = (-nu[1]).exp();
    let det = (1.0 - p1) * p3 * e * e - (1.0 + p1) * p2;
    let (pi1, pi3) = (g.pi_1, g.pi_3);
    let a2_hat = (pi1 * p3 * e + pi3 * (1.0 + p1)) / (s * det);
    let b2 = -(pi1 * p2 + pi3 * (1.0 - p1) * e) / (s * det);
    let a2 = a2_hat * e;
    let x1 = g.theta_ce_11 * (a2 - b2);
    let x3 = g.theta_ce_12 * (a2_hat - b2 * e);
    Some(ElectrolyteSolution {
        s,
        nu,
        pi1,
        pi3,
        a2_hat,
        b2,
        x1,
        x3,
    })
}

impl ElectrolyteSolution {
    fn coefficients(&self) -> ElectrolyteCoefficients {
        let [n1, n2, n3] = self.nu;
        let a1 = 0.5 * self.x1 * csch(n1);
        // A₃ = x₃/(1 − e^{2ν₃}), B₃ = A₃e^{2ν₃}, rewritten with e^{−2ν₃}.
        let e3 = (-2.0 * n3).exp();
        let denom = 1.0 - e3;
        ElectrolyteCoefficients {
            a1,
            b1: a1,
            a2: self.a2_hat * (-n2).exp(),
            b2: self.b2,
            a3: -self.x3 * e3 / denom,
            b3: -self.x3 / denom,
        }
    }

    fn concentration(&self, domain: Domain, xi: f64) -> Complex64 {
        let [n1, n2, n3] = self.nu;
        match domain {
            Domain::Anode => self.x1 * cosh_over_sinh(n1, xi) + self.pi1 / self.s,
            Domain::Separator => self.a2_hat * (n2 * (xi - 1.0)).exp() + self.b2 * (-n2 * xi).exp(),
            Domain::Cathode => -self.x3 * cosh_over_sinh(n3, 1.0 - xi) - self.pi3 / self.s,
        }
    }

    /// Concentrations at `x = 0`, `L₁`, `L₁+L₂` and `L`.
    fn boundary_values(&self) -> [Complex64; 4] {
        let [n1, _, n3] = self.nu;
        [
            self.x1 * csch(n1) + self.pi1 / self.s,
            self.x1 * coth(n1) + self.pi1 / self.s,
            -self.x3 * coth(n3) - self.pi3 / self.s,
            -self.x3 * csch(n3) - self.pi3 / self.s,
        ]
    }
}

/// The six coefficients of the electrolyte concentration; all zero when both
/// reactivities vanish.
pub fn electrolyte_coefficients(g: &GroupedParameters, s: ComplexFrequency) -> Result<ElectrolyteCoefficients> {
    let s = s.nonzero()?;
    Ok(solve_electrolyte(g, s).map_or(
        ElectrolyteCoefficients {
            a1: Complex64::new(0.0, 0.0),
            b1: Complex64::new(0.0, 0.0),
            a2: Complex64::new(0.0, 0.0),
            b2: Complex64::new(0.0, 0.0),
            a3: Complex64::new(0.0, 0.0),
            b3: Complex64::new(0.0, 0.0),
        },
        |sol| sol.coefficients(),
    ))
}

/// Electrolyte concentration per unit current density (mol·m⁻³ per A·m⁻²)
/// at local position `xi ∈ [0, 1]` of `domain`.
pub fn electrolyte_concentration(
    g: &GroupedParameters,
    s: ComplexFrequency,
    domain: Domain,
    xi: f64,
) -> Result<Complex64> {
    let s = s.nonzero()?;
    if !(0.0..=1.0).contains(&xi) {
        return Err(Error::InvalidOption(format!("local position {xi} outside [0, 1]")));
    }
    Ok(solve_electrolyte(g, s).map_or(Complex64::new(0.0, 0.0), |sol| sol.concentration(domain, xi)))
}

/// Concentration-overpotential contribution of the electrolyte, Ω.
pub fn electrolyte_impedance(g: &GroupedParameters, s: ComplexFrequency) -> Result<Complex64> {
    let s = s.nonzero()?;
    let Some(sol) = solve_electrolyte(g, s) else {
        return Ok(Complex64::new(0.0, 0.0));
    };
    let [c0, c12, c23, cl] = sol.boundary_values();
    let v = -g.theta_ce_22 * c0 - g.theta_ce_21 * c12 + g.theta_ce_31 * c23 + g.theta_ce_32 * cl;
    Ok(v / (g.a_cc * g.a_cc))
}

/// Compact six-parameter overpotential impedance
/// `(θ₂,₃ coth υ₃/υ₃ − θ₂,₁ coth υ₁/υ₁)/A²` with `υ_k = √(θ₁,ₖ² + τ_η,k s)`.
pub fn overpotential_impedance(g: &GroupedParameters, s: ComplexFrequency) -> Complex64 {
    let term = |theta1: f64, theta2: f64, tau: f64| {
        let u = sqrt(theta1 * theta1 + tau * s.s);
        theta2 * coth(u) / u
    };
    let z = term(g.theta_eta_1_3, g.theta_eta_2_3, g.tau_eta_3) - term(g.theta_eta_1_1, g.theta_eta_2_1, g.tau_eta_1);
    z / (g.a_cc * g.a_cc)
}

fn upsilon(full: &FullCellParameters, e: Electrode, s: Complex64) -> Complex64 {
    let v = full.electrode(e);
    let inv = 1.0 / v.kappa + 1.0 / v.sigma;
    let r = full.reaction_coefficient(e);
    sqrt(v.length * v.length * inv * (r + v.csp * s))
}

/// Overpotential per unit current density at distance `x` (m) from the
/// separator interface of electrode `e`:
/// `L/(υ sinh υ)·[cosh(υx/L)/σ + cosh(υ(1 − x/L))/κ]`.
pub fn boundary_overpotential(
    full: &FullCellParameters,
    e: Electrode,
    x: f64,
    s: ComplexFrequency,
) -> Result<Complex64> {
    let v = full.electrode(e);
    if !(0.0..=v.length).contains(&x) {
        return Err(Error::InvalidOption(format!(
            "position {x} m outside electrode of thickness {} m",
            v.length
        )));
    }
    let u = upsilon(full, e, s.s);
    let xi = x / v.length;
    let bracket = cosh_over_sinh(u, xi) / v.sigma + cosh_over_sinh(u, 1.0 - xi) / v.kappa;
    Ok(v.length / u * bracket)
}

/// Overpotential impedance obtained by weighting the two boundary values
/// of [`boundary_overpotential`] in each electrode, Ω.
///
/// Differs from the compact form by `2L/((κ+σ) A υ sinh υ)` per electrode;
/// the two coincide only when that term cancels between the electrodes.
pub fn boundary_overpotential_impedance(full: &FullCellParameters, s: ComplexFrequency) -> Complex64 {
    let term = |e: Electrode| {
        let v = full.electrode(e);
        let u = upsilon(full, e, s.s);
        let at_cc = cosh_over_sinh(u, 1.0) / v.sigma + cosh_over_sinh(u, 0.0) / v.kappa;
        let at_sep = cosh_over_sinh(u, 0.0) / v.sigma + cosh_over_sinh(u, 1.0) / v.kappa;
        v.length / u * (v.kappa * at_cc + v.sigma * at_sep) / ((v.kappa + v.sigma) * full.a_cc)
    };
    term(Electrode::Cathode) - term(Electrode::Anode)
}

/// `Z_solid + Z_electrolyte + Z_overpotential − R_res` using the compact
/// overpotential form.
pub fn total_impedance(g: &GroupedParameters, s: ComplexFrequency) -> Result<Complex64> {
    let z = solid_diffusion_impedance(g, s)? + electrolyte_impedance(g, s)? + overpotential_impedance(g, s) - g.r_res;
    Ok(z)
}

/// As [`total_impedance`] but with the boundary-evaluated overpotential
/// term, which is what the discretized cell reproduces.
pub fn total_impedance_boundary(full: &FullCellParameters, s: ComplexFrequency) -> Result<Complex64> {
    let g = crate::params::group_parameters(full)?;
    let z =
        solid_diffusion_impedance(&g, s)? + electrolyte_impedance(&g, s)? + boundary_overpotential_impedance(full, s)
            - g.r_res;
    Ok(z)
}

/// [`total_impedance`] at `s = i·2πf` for every frequency of the grid.
pub fn spectrum(g: &GroupedParameters, freqs: &[f64]) -> Result<ImpedanceSpectrum> {
    check_grid(freqs)?;
    let z = freqs
        .iter()
        .map(|&f| {
            let z = total_impedance(g, ComplexFrequency::from_hz(f))?;
            if z.is_finite() {
                Ok(z)
            } else {
                Err(Error::NonFinite { freq_hz: f })
            }
        })
        .collect::<Result<Vec<_>>>()?;
    ImpedanceSpectrum::new(freqs.to_vec(), z, None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{group_parameters, FullCellParameters};
    use approx::assert_relative_eq;

    fn nominal() -> GroupedParameters {
        group_parameters(&FullCellParameters::reference()).unwrap()
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn zero_frequency_is_rejected() {
        let g = nominal();
        let zero = ComplexFrequency::new(c(0.0, 0.0));
        assert!(matches!(solid_diffusion_impedance(&g, zero), Err(Error::ZeroFrequency)));
        assert!(matches!(electrolyte_impedance(&g, zero), Err(Error::ZeroFrequency)));
        assert!(matches!(total_impedance(&g, zero), Err(Error::ZeroFrequency)));
        assert!(overpotential_impedance(&g, zero).is_finite());
    }

    #[test]
    fn particle_kernel_residue() {
        let s = c(0.0, 1e-9);
        let r = s * particle_kernel(4e-4, s);
        assert_relative_eq!(r.re, -1.2e-3, max_relative = 1e-6);
        assert!(r.im.abs() < 1e-8);
    }

    #[test]
    fn solid_residue_matches_closed_form() {
        let g = nominal();
        let s = ComplexFrequency::new(c(1e-9, 0.0));
        let r = s.s * solid_diffusion_impedance(&g, s).unwrap();
        assert_relative_eq!(r.re, solid_diffusion_residue(&g), max_relative = 1e-6);
    }

    #[test]
    fn solid_vanishes_at_high_frequency() {
        let g = nominal();
        let lo = solid_diffusion_impedance(&g, ComplexFrequency::from_hz(1.0)).unwrap();
        let hi = solid_diffusion_impedance(&g, ComplexFrequency::from_angular(1e16)).unwrap();
        assert!(hi.norm() < 1e-6 * lo.norm());
    }

    #[test]
    fn zero_reactivity_gives_zero() {
        let mut g = nominal();
        g.pi_1 = 0.0;
        g.pi_3 = 0.0;
        let s = ComplexFrequency::from_hz(3.0);
        let k = electrolyte_coefficients(&g, s).unwrap();
        for v in [k.a1, k.b1, k.a2, k.b2, k.a3, k.b3] {
            assert_eq!(v, c(0.0, 0.0));
        }
        assert_eq!(electrolyte_impedance(&g, s).unwrap(), c(0.0, 0.0));
    }

    #[test]
    fn coefficients_are_conjugate_symmetric() {
        let g = nominal();
        let s = ComplexFrequency::new(c(0.3, 2.0));
        let a = electrolyte_coefficients(&g, s).unwrap();
        let b = electrolyte_coefficients(&g, s.conj()).unwrap();
        for (x, y) in [(a.a1, b.a1), (a.a2, b.a2), (a.b2, b.b2), (a.a3, b.a3), (a.b3, b.b3)] {
            assert!((x.conj() - y).norm() <= 1e-12 * x.norm());
        }
    }

    #[test]
    fn coefficients_reproduce_profile_and_interface_conditions() {
        let g = nominal();
        let s = ComplexFrequency::from_angular(1.0);
        let k = electrolyte_coefficients(&g, s).unwrap();
        let nu2 = (s.s / g.tau_ce_2).sqrt();
        let nu3 = (s.s / g.tau_ce_3).sqrt();
        let mid = electrolyte_concentration(&g, s, Domain::Separator, 0.4).unwrap();
        let direct = k.a2 * (nu2 * 0.4).exp() + k.b2 * (-nu2 * 0.4).exp();
        assert!((mid - direct).norm() <= 1e-12 * mid.norm());
        let cat = electrolyte_concentration(&g, s, Domain::Cathode, 0.7).unwrap();
        let direct = k.a3 * (nu3 * 0.7).exp() + k.b3 * (-nu3 * 0.7).exp() - g.pi_3 / s.s;
        assert!((cat - direct).norm() <= 1e-12 * cat.norm());
        // Concentration is continuous across both interfaces.
        let l = electrolyte_concentration(&g, s, Domain::Anode, 1.0).unwrap();
        let r = electrolyte_concentration(&g, s, Domain::Separator, 0.0).unwrap();
        assert!((l - r).norm() <= 1e-12 * l.norm());
        let l = electrolyte_concentration(&g, s, Domain::Separator, 1.0).unwrap();
        let r = electrolyte_concentration(&g, s, Domain::Cathode, 0.0).unwrap();
        assert!((l - r).norm() <= 1e-12 * l.norm());
    }

    #[test]
    fn electrolyte_vanishes_at_high_frequency() {
        let g = nominal();
        let z = electrolyte_impedance(&g, ComplexFrequency::from_angular(1e12)).unwrap();
        assert!(z.norm() < 1e-9 * g.r_res);
        assert!(z.is_finite());
    }

    #[test]
    fn electrolyte_has_no_net_integrator() {
        let g = nominal();
        let a = electrolyte_impedance(&g, ComplexFrequency::new(c(1e-7, 0.0))).unwrap();
        let b = electrolyte_impedance(&g, ComplexFrequency::new(c(1e-8, 0.0))).unwrap();
        assert!((a - b).norm() < 1e-3 * a.norm());
    }

    #[test]
    fn overpotential_identical_electrodes_exactly_zero() {
        let mut g = nominal();
        g.theta_eta_1_3 = g.theta_eta_1_1;
        g.theta_eta_2_3 = g.theta_eta_2_1;
        g.tau_eta_3 = g.tau_eta_1;
        for f in [1e-3, 1.0, 1e4, 1e9] {
            assert_eq!(overpotential_impedance(&g, ComplexFrequency::from_hz(f)), c(0.0, 0.0));
        }
    }

    #[test]
    fn overpotential_dc_value() {
        let mut g = nominal();
        g.a_cc = 1.0;
        g.theta_eta_2_1 = 0.7;
        g.theta_eta_2_3 = 0.7;
        g.theta_eta_1_1 = 1.0;
        g.theta_eta_1_3 = 2.0;
        let z = overpotential_impedance(&g, ComplexFrequency::new(c(0.0, 0.0)));
        let expected = 0.7 * (1.0 / 2f64.tanh() / 2.0 - 1.0 / 1f64.tanh());
        assert_relative_eq!(z.re, expected, max_relative = 1e-14);
        assert_eq!(z.im, 0.0);
    }

    #[test]
    fn boundary_overpotential_symmetry_and_decay() {
        let mut p = FullCellParameters::reference();
        p.sigma_1 = p.kappa_1;
        let s = ComplexFrequency::from_hz(2.0);
        let a = boundary_overpotential(&p, Electrode::Anode, 0.0, s).unwrap();
        let b = boundary_overpotential(&p, Electrode::Anode, p.l_1, s).unwrap();
        assert!((a - b).norm() <= 1e-14 * a.norm());
        let hi = boundary_overpotential(&p, Electrode::Anode, 0.0, ComplexFrequency::from_angular(1e20));
        assert!(hi.unwrap().norm() < 1e-9 * a.norm());
        assert!(boundary_overpotential(&p, Electrode::Anode, 2.0 * p.l_1, s).is_err());
    }

    #[test]
    fn boundary_and_compact_forms_differ_by_closed_form_term() {
        let p = FullCellParameters::reference();
        let g = group_parameters(&p).unwrap();
        let s = ComplexFrequency::from_hz(5.0);
        let extra = |e: Electrode| {
            let v = p.electrode(e);
            let u = upsilon(&p, e, s.s);
            2.0 * v.length * csch(u) / ((v.kappa + v.sigma) * p.a_cc * u)
        };
        let diff = boundary_overpotential_impedance(&p, s) - overpotential_impedance(&g, s);
        let expected = extra(Electrode::Cathode) - extra(Electrode::Anode);
        assert!((diff - expected).norm() <= 1e-10 * diff.norm());
    }

    #[test]
    fn total_tends_to_minus_series_resistance() {
        let g = nominal();
        let z = total_impedance(&g, ComplexFrequency::from_angular(1e16)).unwrap();
        assert!((z + g.r_res).norm() < 1e-6 * g.r_res);
    }

    #[test]
    fn spectrum_grid_checks() {
        let g = nominal();
        assert_eq!(spectrum(&g, &[1.0]).unwrap().len(), 1);
        assert!(matches!(spectrum(&g, &[2.0, 1.0]), Err(Error::BadFrequencyGrid)));
        assert!(matches!(spectrum(&g, &[]), Err(Error::Empty(_))));
        let grid = log_grid(1e-4, 1e5, 60).unwrap();
        let sp = spectrum(&g, &grid).unwrap();
        assert!(sp.z().iter().all(|z| z.is_finite()));
    }

    #[test]
    fn log_grid_endpoints() {
        let v = log_grid(1e-3, 1e2, 6).unwrap();
        assert_eq!(v.len(), 6);
        assert_eq!(v[0], 1e-3);
        assert_eq!(v[5], 1e2);
        assert_relative_eq!(v[3], 1.0, max_relative = 1e-14);
        assert!(log_grid(1.0, 0.5, 3).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn conjugate_symmetry(re in 0.0f64..10.0, lim in -6.0f64..6.0, sign in prop::bool::ANY) {
                let g = nominal();
                let im = if sign { 10f64.powf(lim) } else { -(10f64.powf(lim)) };
                let s = ComplexFrequency::new(c(re, im));
                let a = total_impedance(&g, s).unwrap();
                let b = total_impedance(&g, s.conj()).unwrap();
                prop_assert!((a.conj() - b).norm() <= 1e-13 * a.norm());
            }

            #[test]
            fn finite_over_extreme_frequencies(lf in -8.0f64..12.0) {
                let g = nominal();
                let z = total_impedance(&g, ComplexFrequency::from_hz(10f64.powf(lf))).unwrap();
                prop_assert!(z.is_finite());
            }
        }
    }
}
