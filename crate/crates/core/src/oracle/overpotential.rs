//! Central differences for the double-layer/charge-transfer equation in
//! each electrode.

use crate::error::Result;
use crate::params::{validate, Domain, Electrode, FullCellParameters, Submodel};

use super::{BandMatrix, Mesh, StateLabel, StateSpaceRealization};

/// Nodes `0..=N` run from the electrode's current collector to its
/// separator interface. Per electrode
/// `C η_t = g η_yy − r η`, `g = σκ/(σ+κ)`, `r = F a_s i0*/(RT)`,
/// with `η_y = −i/σ` at the collector and `η_y = +i/κ` at the separator,
/// both imposed through ghost nodes. The output weights the collector and
/// separator values by `κ` and `σ`.
pub fn discretize_overpotential(full: &FullCellParameters, mesh: &Mesh) -> Result<StateSpaceRealization> {
    validate(full).into_result()?;
    mesh.check()?;
    let counts = [mesh.cells_x[0], mesh.cells_x[2]];
    let total: usize = counts.iter().map(|n| n + 1).sum();
    let mut a = BandMatrix::zeros(total, 1, 1);
    let mut b = vec![0.0; total];
    let mut c = vec![0.0; total];
    let mut labels = Vec::with_capacity(total);
    let mut off = 0;
    for (e, cells) in [Electrode::Anode, Electrode::Cathode].into_iter().zip(counts) {
        let v = full.electrode(e);
        let h = v.length / cells as f64;
        let g = v.sigma * v.kappa / (v.sigma + v.kappa);
        let r = full.reaction_coefficient(e);
        let k = g / (h * h * v.csp);
        for i in 0..=cells {
            let row = off + i;
            a.add(row, row, -2.0 * k - r / v.csp);
            match i {
                0 => a.add(row, row + 1, 2.0 * k),
                _ if i == cells => a.add(row, row - 1, 2.0 * k),
                _ => {
                    a.add(row, row - 1, k);
                    a.add(row, row + 1, k);
                }
            }
            labels.push(StateLabel {
                submodel: Submodel::Overpotential,
                domain: match e {
                    Electrode::Anode => Domain::Anode,
                    Electrode::Cathode => Domain::Cathode,
                },
                coordinate: i as f64 * h,
            });
        }
        let current = 1.0 / full.a_cc;
        b[off] = 2.0 * g / (h * v.csp) * current / v.sigma;
        b[off + cells] = 2.0 * g / (h * v.csp) * current / v.kappa;
        let sign = match e {
            Electrode::Anode => -1.0,
            Electrode::Cathode => 1.0,
        };
        let denom = v.kappa + v.sigma;
        c[off] = sign * v.kappa / denom;
        c[off + cells] = sign * v.sigma / denom;
        off += cells + 1;
    }
    StateSpaceRealization::new(a, b, c, 0.0, labels)
}
