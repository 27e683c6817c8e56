//! Radial central differences for the transformed particle concentration
//! `u = r·c̃_s`, one representative particle per electrode.

use crate::constants::FARADAY;
use crate::error::Result;
use crate::params::{validate, Domain, Electrode, FullCellParameters, Submodel};

use super::{BandMatrix, Mesh, StateLabel, StateSpaceRealization};

/// Both particles, anode block first.
///
/// States are `u_i = r_i c̃_s(r_i)` at `r_i = i·R_s/N`, `i = 1..=N`
/// (`u_0 = 0` is eliminated). The surface row uses a ghost node to impose the
/// flux condition, which turns `u_r = u/R + R c_r` into a Robin condition.
pub fn discretize_solid(full: &FullCellParameters, mesh: &Mesh) -> Result<StateSpaceRealization> {
    validate(full).into_result()?;
    mesh.check()?;
    let n = mesh.shells_r;
    let mut a = BandMatrix::zeros(2 * n, 1, 1);
    let mut b = vec![0.0; 2 * n];
    let mut c = vec![0.0; 2 * n];
    let mut labels = Vec::with_capacity(2 * n);
    for (block, e) in [Electrode::Anode, Electrode::Cathode].into_iter().enumerate() {
        let v = full.electrode(e);
        let off = block * n;
        let h = v.rs / n as f64;
        let k = v.ds / (h * h);
        for i in 0..n {
            let row = off + i;
            if i > 0 {
                a.add(row, row - 1, k);
            }
            if i + 1 < n {
                a.add(row, row + 1, k);
                a.add(row, row, -2.0 * k);
            } else {
                a.add(row, row - 1, k);
                a.add(row, row, k * (-2.0 + 2.0 * h / v.rs));
            }
            labels.push(StateLabel {
                submodel: Submodel::Solid,
                domain: match e {
                    Electrode::Anode => Domain::Anode,
                    Electrode::Cathode => Domain::Cathode,
                },
                coordinate: (i + 1) as f64 * h,
            });
        }
        // Pore-wall flux per ampere of total current.
        let flux = 1.0 / (v.a_s * v.length * FARADAY * full.a_cc);
        let (flux, gain) = match e {
            Electrode::Anode => (-flux, -v.dudc / v.rs),
            Electrode::Cathode => (flux, v.dudc / v.rs),
        };
        b[off + n - 1] = -2.0 * v.rs / h * flux;
        c[off + n - 1] = gain;
    }
    StateSpaceRealization::new(a, b, c, 0.0, labels)
}
