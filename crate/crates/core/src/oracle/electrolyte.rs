//! Cell-centred finite volumes for the electrolyte concentration across the
//! three domains.

use crate::error::Result;
use crate::params::{group_parameters, validate, Domain, FullCellParameters, Submodel};

use super::{BandMatrix, Mesh, StateLabel, StateSpaceRealization};

/// Interface fluxes use the series (harmonic) conductance of the two
/// half-cells, so flux continuity across domain boundaries holds exactly
/// and the outer faces carry no flux. The source is `+π₁ i` in the anode and
/// `−π₃ i` in the cathode with `i = I/A_cc`.
pub fn discretize_electrolyte(full: &FullCellParameters, mesh: &Mesh) -> Result<StateSpaceRealization> {
    validate(full).into_result()?;
    mesh.check()?;
    let g = group_parameters(full)?;
    let lengths = [full.l_1, full.l_2, full.l_3];
    let diff = [full.de_1, full.de_2, full.de_3];
    let sources = [g.pi_1 / full.a_cc, 0.0, -g.pi_3 / full.a_cc];
    let domains = [Domain::Anode, Domain::Separator, Domain::Cathode];

    let total: usize = mesh.cells_x.iter().sum();
    let mut h = Vec::with_capacity(total);
    let mut d = Vec::with_capacity(total);
    let mut b = Vec::with_capacity(total);
    let mut labels = Vec::with_capacity(total);
    let mut x0 = 0.0;
    for k in 0..3 {
        let n = mesh.cells_x[k];
        let hk = lengths[k] / n as f64;
        for i in 0..n {
            h.push(hk);
            d.push(diff[k]);
            b.push(sources[k]);
            labels.push(StateLabel {
                submodel: Submodel::Electrolyte,
                domain: domains[k],
                coordinate: x0 + (i as f64 + 0.5) * hk,
            });
        }
        x0 += lengths[k];
    }

    let mut a = BandMatrix::zeros(total, 1, 1);
    for i in 0..total - 1 {
        let cond = 1.0 / (h[i] / (2.0 * d[i]) + h[i + 1] / (2.0 * d[i + 1]));
        a.add(i, i, -cond / h[i]);
        a.add(i, i + 1, cond / h[i]);
        a.add(i + 1, i + 1, -cond / h[i + 1]);
        a.add(i + 1, i, cond / h[i + 1]);
    }

    // Interface value from flux continuity between cells i and i + 1.
    let interface = |i: usize| {
        let wa = d[i] / (0.5 * h[i]);
        let wb = d[i + 1] / (0.5 * h[i + 1]);
        [(i, wa / (wa + wb)), (i + 1, wb / (wa + wb))]
    };
    let kk = full.macinnes_gain();
    let s1k1 = full.sigma_1 + full.kappa_1;
    let s3k3 = full.sigma_3 + full.kappa_3;
    let [n1, n2, _] = mesh.cells_x;
    let mut c = vec![0.0; total];
    c[0] -= kk * full.kappa_1 / s1k1;
    for (j, w) in interface(n1 - 1) {
        c[j] -= kk * full.sigma_1 / s1k1 * w;
    }
    for (j, w) in interface(n1 + n2 - 1) {
        c[j] += kk * full.sigma_3 / s3k3 * w;
    }
    c[total - 1] += kk * full.kappa_3 / s3k3;

    StateSpaceRealization::new(a, b, c, 0.0, labels)
}
