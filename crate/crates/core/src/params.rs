//! Parameter records: the full electrochemical set, its identifiable
//! grouping, validation, and gauge transformations that leave the groups
//! (and hence the impedance) unchanged.
//!
//! Domain subscripts follow the usual cell layout: `1` is the anode, `2` the
//! separator and `3` the cathode.

use serde::{Deserialize, Serialize};

use crate::constants::{FARADAY, GAS_CONSTANT};
use crate::error::{Error, Result};

/// Complete per-domain parameter record of the linearized cell.
///
/// Units: conductivities S/m, diffusivities m²/s, radii and lengths m,
/// specific area 1/m, concentration mol/m³, exchange current density A/m²,
/// double-layer capacitance F/m³ (volumetric), OCP slope V·m³/mol, current
/// collector area m², contact resistance Ω, temperature K.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FullCellParameters {
    pub sigma_1: f64,
    pub sigma_3: f64,
    pub kappa_1: f64,
    pub kappa_2: f64,
    pub kappa_3: f64,
    #[serde(alias = "De_1")]
    pub de_1: f64,
    #[serde(alias = "De_2")]
    pub de_2: f64,
    #[serde(alias = "De_3")]
    pub de_3: f64,
    #[serde(alias = "Ds_1")]
    pub ds_1: f64,
    #[serde(alias = "Ds_3")]
    pub ds_3: f64,
    #[serde(alias = "Rs_1")]
    pub rs_1: f64,
    #[serde(alias = "Rs_3")]
    pub rs_3: f64,
    #[serde(alias = "L_1")]
    pub l_1: f64,
    #[serde(alias = "L_2")]
    pub l_2: f64,
    #[serde(alias = "L_3")]
    pub l_3: f64,
    pub eps_1: f64,
    pub eps_3: f64,
    pub as_1: f64,
    pub as_3: f64,
    pub t_plus: f64,
    pub ce_star: f64,
    pub i0_1: f64,
    pub i0_3: f64,
    #[serde(alias = "Csp_1")]
    pub csp_1: f64,
    #[serde(alias = "Csp_3")]
    pub csp_3: f64,
    #[serde(alias = "dUdc_1")]
    pub dudc_1: f64,
    #[serde(alias = "dUdc_3")]
    pub dudc_3: f64,
    #[serde(alias = "A_cc")]
    pub a_cc: f64,
    #[serde(alias = "R_ctc")]
    pub r_ctc: f64,
    #[serde(alias = "T")]
    pub temperature: f64,
}

/// Electrode selector. The separator carries no particles or overpotential.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Electrode {
    Anode,
    Cathode,
}

/// The three through-plane regions of the cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Domain {
    Anode,
    Separator,
    Cathode,
}

/// Field names of [`FullCellParameters`] in declaration order; these are the
/// JSON keys.
pub const FULL_FIELD_NAMES: [&str; 30] = [
    "sigma_1",
    "sigma_3",
    "kappa_1",
    "kappa_2",
    "kappa_3",
    "de_1",
    "de_2",
    "de_3",
    "ds_1",
    "ds_3",
    "rs_1",
    "rs_3",
    "l_1",
    "l_2",
    "l_3",
    "eps_1",
    "eps_3",
    "as_1",
    "as_3",
    "t_plus",
    "ce_star",
    "i0_1",
    "i0_3",
    "csp_1",
    "csp_3",
    "dudc_1",
    "dudc_3",
    "a_cc",
    "r_ctc",
    "temperature",
];

impl FullCellParameters {
    /// A representative graphite/metal-oxide-like record used by the tests,
    /// the book and the CLI examples.
    pub fn reference() -> Self {
        Self {
            sigma_1: 2.0,
            sigma_3: 0.8,
            kappa_1: 0.5,
            kappa_2: 0.6,
            kappa_3: 0.4,
            de_1: 1.2e-10,
            de_2: 2.0e-10,
            de_3: 1.0e-10,
            ds_1: 1.6e-13,
            ds_3: 1.0e-13,
            rs_1: 2.0e-6,
            rs_3: 1.0e-6,
            l_1: 60e-6,
            l_2: 20e-6,
            l_3: 50e-6,
            eps_1: 0.3,
            eps_3: 0.3,
            as_1: 9.0e5,
            as_3: 1.5e6,
            t_plus: 0.4,
            ce_star: 1000.0,
            i0_1: 0.5,
            i0_3: 1.0,
            csp_1: 1.0e6,
            csp_3: 1.2e6,
            dudc_1: -1.5e-5,
            dudc_3: -2.0e-5,
            a_cc: 0.1,
            r_ctc: 1.0e-3,
            temperature: 298.15,
        }
    }

    /// `K = 2(1 - t+) R T / (c_e* F)`, the MacInnes concentration gain.
    pub fn macinnes_gain(&self) -> f64 {
        2.0 * (1.0 - self.t_plus) * GAS_CONSTANT * self.temperature / (self.ce_star * FARADAY)
    }

    /// Values in [`FULL_FIELD_NAMES`] order.
    pub fn to_array(&self) -> [f64; 30] {
        [
            self.sigma_1,
            self.sigma_3,
            self.kappa_1,
            self.kappa_2,
            self.kappa_3,
            self.de_1,
            self.de_2,
            self.de_3,
            self.ds_1,
            self.ds_3,
            self.rs_1,
            self.rs_3,
            self.l_1,
            self.l_2,
            self.l_3,
            self.eps_1,
            self.eps_3,
            self.as_1,
            self.as_3,
            self.t_plus,
            self.ce_star,
            self.i0_1,
            self.i0_3,
            self.csp_1,
            self.csp_3,
            self.dudc_1,
            self.dudc_3,
            self.a_cc,
            self.r_ctc,
            self.temperature,
        ]
    }

    pub fn from_array(v: [f64; 30]) -> Self {
        Self {
            sigma_1: v[0],
            sigma_3: v[1],
            kappa_1: v[2],
            kappa_2: v[3],
            kappa_3: v[4],
            de_1: v[5],
            de_2: v[6],
            de_3: v[7],
            ds_1: v[8],
            ds_3: v[9],
            rs_1: v[10],
            rs_3: v[11],
            l_1: v[12],
            l_2: v[13],
            l_3: v[14],
            eps_1: v[15],
            eps_3: v[16],
            as_1: v[17],
            as_3: v[18],
            t_plus: v[19],
            ce_star: v[20],
            i0_1: v[21],
            i0_3: v[22],
            csp_1: v[23],
            csp_3: v[24],
            dudc_1: v[25],
            dudc_3: v[26],
            a_cc: v[27],
            r_ctc: v[28],
            temperature: v[29],
        }
    }

    /// Per-electrode view used by the impedance and oracle code.
    pub fn electrode(&self, e: Electrode) -> ElectrodeView {
        match e {
            Electrode::Anode => ElectrodeView {
                sigma: self.sigma_1,
                kappa: self.kappa_1,
                de: self.de_1,
                ds: self.ds_1,
                rs: self.rs_1,
                length: self.l_1,
                eps: self.eps_1,
                a_s: self.as_1,
                i0: self.i0_1,
                csp: self.csp_1,
                dudc: self.dudc_1,
            },
            Electrode::Cathode => ElectrodeView {
                sigma: self.sigma_3,
                kappa: self.kappa_3,
                de: self.de_3,
                ds: self.ds_3,
                rs: self.rs_3,
                length: self.l_3,
                eps: self.eps_3,
                a_s: self.as_3,
                i0: self.i0_3,
                csp: self.csp_3,
                dudc: self.dudc_3,
            },
        }
    }

    /// Linearized reaction coefficient `F a_s i0* / (R T)`, 1/(Ω·m²)·… per volume.
    pub fn reaction_coefficient(&self, e: Electrode) -> f64 {
        let v = self.electrode(e);
        FARADAY * v.a_s * v.i0 / (GAS_CONSTANT * self.temperature)
    }

    /// Lumped series resistance seen by the total current, Ω.
    pub fn series_resistance(&self) -> f64 {
        self.r_ctc
            + (self.l_1 / (self.sigma_1 + self.kappa_1)
                + self.l_2 / self.kappa_2
                + self.l_3 / (self.sigma_3 + self.kappa_3))
                / self.a_cc
    }

    /// The alternative form of the series resistance in which the anode
    /// ohmic term is written with the cathode conductivities. Kept only for
    /// comparison; [`series_resistance`](Self::series_resistance) is used
    /// everywhere.
    pub fn series_resistance_cathode_only(&self) -> f64 {
        self.r_ctc
            + (self.l_1 / (self.sigma_3 + self.kappa_3)
                + self.l_2 / self.kappa_2
                + self.l_3 / (self.sigma_3 + self.kappa_3))
                / self.a_cc
    }
}

/// Borrowed-by-value slice of the per-electrode fields.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElectrodeView {
    pub sigma: f64,
    pub kappa: f64,
    pub de: f64,
    pub ds: f64,
    pub rs: f64,
    pub length: f64,
    pub eps: f64,
    pub a_s: f64,
    pub i0: f64,
    pub csp: f64,
    pub dudc: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub field: &'static str,
    pub message: String,
}

/// Outcome of [`validate`]: empty means the record is admissible.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn into_result(self) -> Result<()> {
        if self.is_ok() {
            Ok(())
        } else {
            let msg = self
                .violations
                .iter()
                .map(|v| format!("{}: {}", v.field, v.message))
                .collect::<Vec<_>>()
                .join("; ");
            Err(Error::InvalidParameters(msg))
        }
    }
}

/// Checks every invariant of [`FullCellParameters`] and lists the fields
/// that break them.
pub fn validate(p: &FullCellParameters) -> ValidationReport {
    let mut report = ValidationReport::default();
    let values = p.to_array();
    for (name, value) in FULL_FIELD_NAMES.iter().zip(values) {
        if !value.is_finite() {
            report.violations.push(Violation {
                field: name,
                message: format!("must be finite, got {value}"),
            });
            continue;
        }
        match *name {
            "t_plus" | "eps_1" | "eps_3" => {
                if !(value > 0.0 && value < 1.0) {
                    report.violations.push(Violation {
                        field: name,
                        message: format!("must lie in (0, 1), got {value}"),
                    });
                }
            }
            "dudc_1" | "dudc_3" => {
                if value == 0.0 {
                    report.violations.push(Violation {
                        field: name,
                        message: "must be nonzero".into(),
                    });
                }
            }
            "r_ctc" => {
                if value < 0.0 {
                    report.violations.push(Violation {
                        field: name,
                        message: format!("must be non-negative, got {value}"),
                    });
                }
            }
            _ => {
                if value <= 0.0 {
                    report.violations.push(Violation {
                        field: name,
                        message: format!("must be strictly positive, got {value}"),
                    });
                }
            }
        }
    }
    report
}

/// Identifier of one estimated grouped quantity: the 21 groups followed by
/// the series resistance. `A_cc` is a known constant and never appears here.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupId {
    TauCs1,
    TauCs3,
    BetaCs1,
    BetaCs3,
    TauCe1,
    TauCe2,
    TauCe3,
    Pi1,
    Pi3,
    ThetaCe11,
    ThetaCe12,
    ThetaCe21,
    ThetaCe22,
    ThetaCe31,
    ThetaCe32,
    ThetaEta11,
    ThetaEta13,
    ThetaEta21,
    ThetaEta23,
    TauEta1,
    TauEta3,
    RRes,
}

impl GroupId {
    /// All estimated quantities, 21 groups then `r_res`.
    pub const ALL: [GroupId; 22] = [
        GroupId::TauCs1,
        GroupId::TauCs3,
        GroupId::BetaCs1,
        GroupId::BetaCs3,
        GroupId::TauCe1,
        GroupId::TauCe2,
        GroupId::TauCe3,
        GroupId::Pi1,
        GroupId::Pi3,
        GroupId::ThetaCe11,
        GroupId::ThetaCe12,
        GroupId::ThetaCe21,
        GroupId::ThetaCe22,
        GroupId::ThetaCe31,
        GroupId::ThetaCe32,
        GroupId::ThetaEta11,
        GroupId::ThetaEta13,
        GroupId::ThetaEta21,
        GroupId::ThetaEta23,
        GroupId::TauEta1,
        GroupId::TauEta3,
        GroupId::RRes,
    ];

    /// Electrolyte quantities touched by the reactivity/gain rescaling
    /// (see [`GroupedParameters::rescale_electrolyte_gains`]).
    pub const ELECTROLYTE_GAIN_GAUGE: [GroupId; 6] = [
        GroupId::Pi1,
        GroupId::Pi3,
        GroupId::ThetaCe21,
        GroupId::ThetaCe22,
        GroupId::ThetaCe31,
        GroupId::ThetaCe32,
    ];

    pub fn name(self) -> &'static str {
        match self {
            GroupId::TauCs1 => "tau_cs_1",
            GroupId::TauCs3 => "tau_cs_3",
            GroupId::BetaCs1 => "beta_cs_1",
            GroupId::BetaCs3 => "beta_cs_3",
            GroupId::TauCe1 => "tau_ce_1",
            GroupId::TauCe2 => "tau_ce_2",
            GroupId::TauCe3 => "tau_ce_3",
            GroupId::Pi1 => "pi_1",
            GroupId::Pi3 => "pi_3",
            GroupId::ThetaCe11 => "theta_ce_11",
            GroupId::ThetaCe12 => "theta_ce_12",
            GroupId::ThetaCe21 => "theta_ce_21",
            GroupId::ThetaCe22 => "theta_ce_22",
            GroupId::ThetaCe31 => "theta_ce_31",
            GroupId::ThetaCe32 => "theta_ce_32",
            GroupId::ThetaEta11 => "theta_eta_1_1",
            GroupId::ThetaEta13 => "theta_eta_1_3",
            GroupId::ThetaEta21 => "theta_eta_2_1",
            GroupId::ThetaEta23 => "theta_eta_2_3",
            GroupId::TauEta1 => "tau_eta_1",
            GroupId::TauEta3 => "tau_eta_3",
            GroupId::RRes => "r_res",
        }
    }

    pub fn from_name(name: &str) -> Option<GroupId> {
        GroupId::ALL.iter().copied().find(|g| g.name() == name)
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn submodel(self) -> Option<Submodel> {
        use GroupId::*;
        match self {
            TauCs1 | TauCs3 | BetaCs1 | BetaCs3 => Some(Submodel::Solid),
            TauCe1 | TauCe2 | TauCe3 | Pi1 | Pi3 | ThetaCe11 | ThetaCe12 | ThetaCe21 | ThetaCe22 | ThetaCe31
            | ThetaCe32 => Some(Submodel::Electrolyte),
            ThetaEta11 | ThetaEta13 | ThetaEta21 | ThetaEta23 | TauEta1 | TauEta3 => Some(Submodel::Overpotential),
            RRes => None,
        }
    }
}

/// The three decoupled dynamic sub-models.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Submodel {
    Solid,
    Electrolyte,
    Overpotential,
}

/// The 21 identifiable groups plus the series resistance and the known
/// current-collector area.
///
/// `beta_cs_k` is the overall gain (Ω) of electrode `k`'s solid-diffusion
/// impedance; the anode value carries the sign flip of its reaction flux, so
/// the solid response is always `beta_cs_3·g_3 − beta_cs_1·g_1`.
/// `theta_ce_2*`, `theta_ce_3*` and `theta_eta_2_*` include one factor of
/// `a_cc` as tabulated; the impedance functions divide by `a_cc²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupedParameters {
    pub tau_cs_1: f64,
    pub tau_cs_3: f64,
    pub beta_cs_1: f64,
    pub beta_cs_3: f64,
    pub tau_ce_1: f64,
    pub tau_ce_2: f64,
    pub tau_ce_3: f64,
    pub pi_1: f64,
    pub pi_3: f64,
    pub theta_ce_11: f64,
    pub theta_ce_12: f64,
    pub theta_ce_21: f64,
    pub theta_ce_22: f64,
    pub theta_ce_31: f64,
    pub theta_ce_32: f64,
    pub theta_eta_1_1: f64,
    pub theta_eta_1_3: f64,
    pub theta_eta_2_1: f64,
    pub theta_eta_2_3: f64,
    pub tau_eta_1: f64,
    pub tau_eta_3: f64,
    #[serde(alias = "R_res")]
    pub r_res: f64,
    #[serde(alias = "A_cc")]
    pub a_cc: f64,
}

impl GroupedParameters {
    pub fn get(&self, id: GroupId) -> f64 {
        self.to_array()[id.index()]
    }

    pub fn set(&mut self, id: GroupId, value: f64) {
        let mut v = self.to_array();
        v[id.index()] = value;
        *self = Self::from_array(v, self.a_cc);
    }

    /// Estimated quantities in [`GroupId::ALL`] order.
    pub fn to_array(&self) -> [f64; 22] {
        [
            self.tau_cs_1,
            self.tau_cs_3,
            self.beta_cs_1,
            self.beta_cs_3,
            self.tau_ce_1,
            self.tau_ce_2,
            self.tau_ce_3,
            self.pi_1,
            self.pi_3,
            self.theta_ce_11,
            self.theta_ce_12,
            self.theta_ce_21,
            self.theta_ce_22,
            self.theta_ce_31,
            self.theta_ce_32,
            self.theta_eta_1_1,
            self.theta_eta_1_3,
            self.theta_eta_2_1,
            self.theta_eta_2_3,
            self.tau_eta_1,
            self.tau_eta_3,
            self.r_res,
        ]
    }

    pub fn from_array(v: [f64; 22], a_cc: f64) -> Self {
        Self {
            tau_cs_1: v[0],
            tau_cs_3: v[1],
            beta_cs_1: v[2],
            beta_cs_3: v[3],
            tau_ce_1: v[4],
            tau_ce_2: v[5],
            tau_ce_3: v[6],
            pi_1: v[7],
            pi_3: v[8],
            theta_ce_11: v[9],
            theta_ce_12: v[10],
            theta_ce_21: v[11],
            theta_ce_22: v[12],
            theta_ce_31: v[13],
            theta_ce_32: v[14],
            theta_eta_1_1: v[15],
            theta_eta_1_3: v[16],
            theta_eta_2_1: v[17],
            theta_eta_2_3: v[18],
            tau_eta_1: v[19],
            tau_eta_3: v[20],
            r_res: v[21],
            a_cc,
        }
    }

    /// Checks the sign and positivity constraints of the grouped set.
    pub fn validate(&self) -> Result<()> {
        let mut bad = Vec::new();
        for id in GroupId::ALL {
            let v = self.get(id);
            let ok = v.is_finite()
                && match id {
                    GroupId::BetaCs1 | GroupId::BetaCs3 => v != 0.0,
                    GroupId::Pi1 | GroupId::Pi3 | GroupId::RRes => v >= 0.0,
                    // Gains may be of either sign, but never zero in a
                    // log-parameterization.
                    GroupId::ThetaCe21
                    | GroupId::ThetaCe22
                    | GroupId::ThetaCe31
                    | GroupId::ThetaCe32
                    | GroupId::ThetaEta21
                    | GroupId::ThetaEta23 => true,
                    _ => v > 0.0,
                };
            if !ok {
                bad.push(format!("{} = {v}", id.name()));
            }
        }
        if !(self.a_cc.is_finite() && self.a_cc > 0.0) {
            bad.push(format!("a_cc = {}", self.a_cc));
        }
        if bad.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidParameters(bad.join("; ")))
        }
    }

    /// Multiplies both reactivities by `alpha` and divides the four
    /// concentration-to-voltage gains by `alpha`.
    ///
    /// The electrolyte voltage is bilinear in these two sets, so the
    /// impedance is unchanged: this is a direction the 21-group
    /// parameterization cannot resolve.
    pub fn rescale_electrolyte_gains(&self, alpha: f64) -> Self {
        let mut g = *self;
        g.pi_1 *= alpha;
        g.pi_3 *= alpha;
        g.theta_ce_21 /= alpha;
        g.theta_ce_22 /= alpha;
        g.theta_ce_31 /= alpha;
        g.theta_ce_32 /= alpha;
        g
    }
}

/// Which formula produces the solid-diffusion gain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolidGainConvention {
    /// `(dU/dc)·R_s / (a_s F D_s L A_cc)`, chained from the particle
    /// boundary flux and the uniform-reactivity current split. Matches the
    /// radial finite-difference oracle.
    #[default]
    Derived,
    /// `θ_cs·τ_cs` with `θ_cs = (dU/dc)/(L A_cc)`, both electrodes with the
    /// same sign. Kept for comparison only.
    Tabulated,
}

/// Maps a validated full record onto its 21 groups, `r_res` and `a_cc`.
pub fn group_parameters(p: &FullCellParameters) -> Result<GroupedParameters> {
    group_parameters_with(p, SolidGainConvention::Derived)
}

pub fn group_parameters_with(p: &FullCellParameters, convention: SolidGainConvention) -> Result<GroupedParameters> {
    validate(p).into_result()?;
    let a = p.a_cc;
    let k = p.macinnes_gain();
    let rt = GAS_CONSTANT * p.temperature;

    let solid_gain = |e: Electrode| {
        let v = p.electrode(e);
        match convention {
            SolidGainConvention::Derived => {
                let gain = v.dudc * v.rs / (v.a_s * FARADAY * v.ds * v.length * a);
                match e {
                    Electrode::Anode => -gain,
                    Electrode::Cathode => gain,
                }
            }
            SolidGainConvention::Tabulated => v.dudc / (v.length * a) * (v.ds / (v.rs * v.rs)),
        }
    };
    let eta = |e: Electrode| {
        let v = p.electrode(e);
        let inv = 1.0 / v.kappa + 1.0 / v.sigma;
        let l2 = v.length * v.length;
        let theta1 = (l2 * inv * FARADAY * v.a_s * v.i0 / rt).sqrt();
        let theta2 = a * v.length * (v.kappa / v.sigma + v.sigma / v.kappa) / (v.kappa + v.sigma);
        let tau = l2 * inv * v.csp;
        (theta1, theta2, tau)
    };
    let (t11, t21, te1) = eta(Electrode::Anode);
    let (t13, t23, te3) = eta(Electrode::Cathode);
    let s1k1 = p.sigma_1 + p.kappa_1;
    let s3k3 = p.sigma_3 + p.kappa_3;

    Ok(GroupedParameters {
        tau_cs_1: p.ds_1 / (p.rs_1 * p.rs_1),
        tau_cs_3: p.ds_3 / (p.rs_3 * p.rs_3),
        beta_cs_1: solid_gain(Electrode::Anode),
        beta_cs_3: solid_gain(Electrode::Cathode),
        tau_ce_1: p.de_1 / (p.l_1 * p.l_1),
        tau_ce_2: p.de_2 / (p.l_2 * p.l_2),
        tau_ce_3: p.de_3 / (p.l_3 * p.l_3),
        pi_1: p.as_1 * (1.0 - p.t_plus) / (p.eps_1 * FARADAY),
        pi_3: p.as_3 * (1.0 - p.t_plus) / (p.eps_3 * FARADAY),
        theta_ce_11: (p.de_2 / p.de_1).sqrt(),
        theta_ce_12: (p.de_2 / p.de_3).sqrt(),
        theta_ce_21: a * k * p.sigma_1 / s1k1,
        theta_ce_22: a * k * p.kappa_1 / s1k1,
        theta_ce_31: a * k * p.sigma_3 / s3k3,
        theta_ce_32: a * k * p.kappa_3 / s3k3,
        theta_eta_1_1: t11,
        theta_eta_1_3: t13,
        theta_eta_2_1: t21,
        theta_eta_2_3: t23,
        tau_eta_1: te1,
        tau_eta_3: te3,
        r_res: p.series_resistance(),
        a_cc: a,
    })
}

/// Produces a different full record with identical groups.
///
/// * `Solid`: `dU/dc ← α·dU/dc`, `R_s ← α·R_s`, `D_s ← α²·D_s` in both
///   electrodes.
/// * `Electrolyte`: `a_s ← α·a_s`, `ε ← α·ε`, with `i0* ← i0*/α` and
///   `dU/dc ← α·dU/dc` compensating the other uses of `a_s`.
/// * `Overpotential`: `T ← α·T`, `i0* ← α·i0*`, `c_e* ← α·c_e*`.
///
/// `A_cc` is never touched. The result is re-validated, so a factor that
/// pushes a porosity past 1 is an error.
pub fn gauge_transform(p: &FullCellParameters, submodel: Submodel, alpha: f64) -> Result<FullCellParameters> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::NonPositiveScale(alpha));
    }
    validate(p).into_result()?;
    let mut q = *p;
    match submodel {
        Submodel::Solid => {
            q.dudc_1 *= alpha;
            q.dudc_3 *= alpha;
            q.rs_1 *= alpha;
            q.rs_3 *= alpha;
            q.ds_1 *= alpha * alpha;
            q.ds_3 *= alpha * alpha;
        }
        Submodel::Electrolyte => {
            q.as_1 *= alpha;
            q.as_3 *= alpha;
            q.eps_1 *= alpha;
            q.eps_3 *= alpha;
            q.i0_1 /= alpha;
            q.i0_3 /= alpha;
            q.dudc_1 *= alpha;
            q.dudc_3 *= alpha;
        }
        Submodel::Overpotential => {
            q.temperature *= alpha;
            q.i0_1 *= alpha;
            q.i0_3 *= alpha;
            q.ce_star *= alpha;
        }
    }
    validate(&q).into_result()?;
    Ok(q)
}

/// Full-record realization of [`GroupedParameters::rescale_electrolyte_gains`]:
/// `c_e* ← α·c_e*` and `a_s ← α·a_s`, compensated by `i0* ← i0*/α` and
/// `dU/dc ← α·dU/dc`. The impedance is unchanged while `pi_k` and the four
/// `theta_ce` gains move.
pub fn electrolyte_gain_gauge(p: &FullCellParameters, alpha: f64) -> Result<FullCellParameters> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::NonPositiveScale(alpha));
    }
    let mut q = *p;
    q.ce_star *= alpha;
    q.as_1 *= alpha;
    q.as_3 *= alpha;
    q.i0_1 /= alpha;
    q.i0_3 /= alpha;
    q.dudc_1 *= alpha;
    q.dudc_3 *= alpha;
    validate(&q).into_result()?;
    Ok(q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn reference_record_is_valid() {
        assert!(validate(&FullCellParameters::reference()).is_ok());
    }

    #[test]
    fn transference_number_out_of_range() {
        let mut p = FullCellParameters::reference();
        p.t_plus = 1.2;
        let r = validate(&p);
        assert_eq!(r.violations.len(), 1);
        assert_eq!(r.violations[0].field, "t_plus");
    }

    #[test]
    fn zero_length_is_a_positivity_violation() {
        let mut p = FullCellParameters::reference();
        p.l_2 = 0.0;
        let r = validate(&p);
        assert_eq!(r.violations.len(), 1);
        assert_eq!(r.violations[0].field, "l_2");
        assert!(r.violations[0].message.contains("positive"));
    }

    #[test]
    fn zero_ocp_slope_rejected_negative_accepted() {
        let mut p = FullCellParameters::reference();
        p.dudc_3 = 0.0;
        assert!(!validate(&p).is_ok());
        p.dudc_3 = 3e-5;
        assert!(validate(&p).is_ok());
    }

    #[test]
    fn grouping_rejects_invalid_input() {
        let mut p = FullCellParameters::reference();
        p.eps_1 = 1.5;
        assert!(matches!(group_parameters(&p), Err(Error::InvalidParameters(_))));
    }

    #[test]
    fn equal_diffusivities_give_unit_ratios() {
        let mut p = FullCellParameters::reference();
        p.de_1 = 2e-10;
        p.de_2 = 2e-10;
        p.de_3 = 2e-10;
        let g = group_parameters(&p).unwrap();
        assert_eq!(g.theta_ce_11, 1.0);
        assert_eq!(g.theta_ce_12, 1.0);
    }

    #[test]
    fn particle_time_constant_substitution() {
        let mut p = FullCellParameters::reference();
        p.ds_1 = 1e-14;
        p.rs_1 = 5e-6;
        let g = group_parameters(&p).unwrap();
        assert_relative_eq!(g.tau_cs_1, 4e-4, max_relative = 1e-14);
    }

    #[test]
    fn twenty_one_groups_plus_auxiliaries() {
        let g = group_parameters(&FullCellParameters::reference()).unwrap();
        let json = serde_json::to_value(g).unwrap();
        let obj = json.as_object().unwrap();
        assert_eq!(obj.len(), 23);
        let groups = obj.keys().filter(|k| *k != "r_res" && *k != "a_cc").count();
        assert_eq!(groups, 21);
        assert_eq!(GroupId::ALL.len() - 1, 21);
    }

    #[test]
    fn group_names_round_trip() {
        for (i, id) in GroupId::ALL.iter().enumerate() {
            assert_eq!(id.index(), i);
            assert_eq!(GroupId::from_name(id.name()), Some(*id));
        }
    }

    #[test]
    fn derived_gain_formula_and_signs() {
        let p = FullCellParameters::reference();
        let g = group_parameters(&p).unwrap();
        let expected3 = p.dudc_3 * p.rs_3 / (p.as_3 * FARADAY * p.ds_3 * p.l_3 * p.a_cc);
        assert_relative_eq!(g.beta_cs_3, expected3, max_relative = 1e-15);
        // dU/dc < 0 in both electrodes of the reference record.
        assert!(g.beta_cs_3 < 0.0 && g.beta_cs_1 > 0.0);
        let t = group_parameters_with(&p, SolidGainConvention::Tabulated).unwrap();
        assert_relative_eq!(
            t.beta_cs_1,
            p.dudc_1 / (p.l_1 * p.a_cc) * g.tau_cs_1,
            max_relative = 1e-15
        );
    }

    #[test]
    fn series_resistance_uses_anode_conductivities() {
        let p = FullCellParameters::reference();
        let g = group_parameters(&p).unwrap();
        let expected =
            p.r_ctc + (p.l_1 / (p.sigma_1 + p.kappa_1) + p.l_2 / p.kappa_2 + p.l_3 / (p.sigma_3 + p.kappa_3)) / p.a_cc;
        assert_relative_eq!(g.r_res, expected, max_relative = 1e-15);
        assert!(rel(p.series_resistance_cathode_only(), g.r_res) > 1e-3);
    }

    #[test]
    fn gauge_identity_at_unit_scale() {
        let p = FullCellParameters::reference();
        for m in [Submodel::Solid, Submodel::Electrolyte, Submodel::Overpotential] {
            assert_eq!(gauge_transform(&p, m, 1.0).unwrap(), p);
        }
    }

    #[test]
    fn gauge_rejects_non_positive_scale() {
        let p = FullCellParameters::reference();
        assert!(matches!(
            gauge_transform(&p, Submodel::Solid, 0.0),
            Err(Error::NonPositiveScale(_))
        ));
        assert!(gauge_transform(&p, Submodel::Solid, -2.0).is_err());
    }

    #[test]
    fn electrolyte_gauge_keeps_electrolyte_groups() {
        let p = FullCellParameters::reference();
        let q = gauge_transform(&p, Submodel::Electrolyte, 2.0).unwrap();
        assert_ne!(p, q);
        let (g, h) = (group_parameters(&p).unwrap(), group_parameters(&q).unwrap());
        for id in GroupId::ALL
            .iter()
            .filter(|i| i.submodel() == Some(Submodel::Electrolyte))
        {
            assert!(rel(h.get(*id), g.get(*id)) <= 1e-14, "{}", id.name());
        }
    }

    #[test]
    fn overpotential_gauge_keeps_eta_groups() {
        let p = FullCellParameters::reference();
        let q = gauge_transform(&p, Submodel::Overpotential, 3.0).unwrap();
        let (g, h) = (group_parameters(&p).unwrap(), group_parameters(&q).unwrap());
        for id in [
            GroupId::ThetaEta11,
            GroupId::ThetaEta13,
            GroupId::ThetaEta21,
            GroupId::ThetaEta23,
            GroupId::TauEta1,
            GroupId::TauEta3,
        ] {
            assert!(rel(h.get(id), g.get(id)) <= 1e-14, "{}", id.name());
        }
    }

    #[test]
    fn electrolyte_gain_gauge_moves_only_the_bilinear_pair() {
        let p = FullCellParameters::reference();
        let q = electrolyte_gain_gauge(&p, 2.5).unwrap();
        let (g, h) = (group_parameters(&p).unwrap(), group_parameters(&q).unwrap());
        let expected = g.rescale_electrolyte_gains(2.5);
        for id in GroupId::ALL {
            assert!(rel(h.get(id), expected.get(id)) <= 1e-13, "{}", id.name());
        }
    }

    #[test]
    fn grouped_validation() {
        let mut g = group_parameters(&FullCellParameters::reference()).unwrap();
        assert!(g.validate().is_ok());
        g.beta_cs_1 = 0.0;
        assert!(g.validate().is_err());
        g.beta_cs_1 = 1.0;
        g.pi_3 = 0.0;
        assert!(g.validate().is_ok());
        g.tau_eta_1 = -1.0;
        assert!(g.validate().is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn scaled_record() -> impl Strategy<Value = FullCellParameters> {
            prop::collection::vec(-0.5f64..0.5, 30).prop_map(|logs| {
                let base = FullCellParameters::reference().to_array();
                let mut v = base;
                for (i, l) in logs.iter().enumerate() {
                    let name = FULL_FIELD_NAMES[i];
                    if matches!(name, "t_plus" | "eps_1" | "eps_3") {
                        v[i] = base[i] * (1.0 + 0.5 * l);
                    } else {
                        v[i] = base[i] * 10f64.powf(*l);
                    }
                }
                FullCellParameters::from_array(v)
            })
        }

        proptest! {
            #[test]
            fn grouped_output_satisfies_invariants(p in scaled_record()) {
                let g = group_parameters(&p).unwrap();
                prop_assert!(g.validate().is_ok());
            }

            #[test]
            fn every_gauge_preserves_all_groups(p in scaled_record(), a in 0.5f64..2.0) {
                let g = group_parameters(&p).unwrap();
                for m in [Submodel::Solid, Submodel::Overpotential, Submodel::Electrolyte] {
                    let Ok(q) = gauge_transform(&p, m, a) else { continue };
                    let h = group_parameters(&q).unwrap();
                    for id in GroupId::ALL {
                        prop_assert!(rel(h.get(id), g.get(id)) <= 1e-12, "{:?} {}", m, id.name());
                    }
                    prop_assert_eq!(h.a_cc, g.a_cc);
                }
            }
        }
    }
}
