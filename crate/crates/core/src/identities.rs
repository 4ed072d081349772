//! Randomized audit of the exact discrete identities: the two
//! integration-by-parts formulas and the two exact sequences.

use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::fields::{CellField, EdgeField, VertexField};
use crate::mesh::StaggeredMesh;
use crate::operators::{assemble, curl, div, grad, skew_grad, OpKind};

/// Pass threshold for the integration-by-parts defects.
pub const IBP_TOL: f64 = 1e-12;
/// Pass threshold for the exact-sequence defects.
pub const SEQUENCE_TOL: f64 = 1e-13;

/// Worst defects over a batch of random fields.
///
/// Integration-by-parts defects are `|lhs - rhs| / (max(|lhs|, |rhs|) + 0.01 |u| |grad phi|)`,
/// so a defect of 1e-12 is 1e-12 relative with an absolute floor of
/// 1e-14 times the product of the field norms.
///
/// Exact-sequence defects are `max |curl grad phi|` divided by the same
/// composition applied with absolute values, i.e. relative to the size of
/// the terms that cancel. `*_raw` are the same maxima divided by `max |phi|`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct IdentityReport {
    pub fields: usize,
    pub ibp_grad: f64,
    pub ibp_skew: f64,
    /// The second formula with `u` vanishing on boundary edges and `psi` unrestricted.
    pub ibp_skew_zero_boundary: f64,
    pub curl_grad: f64,
    pub div_skew: f64,
    pub curl_grad_raw: f64,
    pub div_skew_raw: f64,
}

impl IdentityReport {
    pub fn ibp_max(&self) -> f64 {
        self.ibp_grad.max(self.ibp_skew).max(self.ibp_skew_zero_boundary)
    }

    pub fn sequence_max(&self) -> f64 {
        self.curl_grad.max(self.div_skew)
    }

    pub fn passes(&self) -> bool {
        self.ibp_max() <= IBP_TOL && self.sequence_max() <= SEQUENCE_TOL
    }

    pub fn rows(&self) -> [(&'static str, f64, f64); 7] {
        [
            ("(u, grad phi) = -1/2 (div u, phi)", self.ibp_grad, IBP_TOL),
            ("(u, skew_grad psi) = -1/2 (curl u, psi)", self.ibp_skew, IBP_TOL),
            ("same, u = 0 on the boundary", self.ibp_skew_zero_boundary, IBP_TOL),
            ("curl grad = 0 (relative)", self.curl_grad, SEQUENCE_TOL),
            ("div skew_grad = 0 (relative)", self.div_skew, SEQUENCE_TOL),
            ("curl grad = 0 (per max|phi|)", self.curl_grad_raw, f64::NAN),
            ("div skew_grad = 0 (per max|psi|)", self.div_skew_raw, f64::NAN),
        ]
    }
}

impl fmt::Display for IdentityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<42} {:>12} {:>10}  ({} random fields)", "identity", "max defect", "limit", self.fields)?;
        for (name, v, tol) in self.rows() {
            if tol.is_nan() {
                writeln!(f, "{name:<42} {v:>12.5e} {:>10}", "-")?;
            } else {
                let status = if v <= tol { "ok" } else { "FAIL" };
                writeln!(f, "{name:<42} {v:>12.5e} {tol:>10.0e}  {status}")?;
            }
        }
        Ok(())
    }
}

fn ibp_defect(lhs: f64, rhs: f64, norms: f64) -> f64 {
    let d = (lhs - rhs).abs();
    if d == 0.0 {
        0.0
    } else {
        d / (lhs.abs().max(rhs.abs()) + 1e-2 * norms)
    }
}

fn ratio(num: f64, den: f64) -> f64 {
    if num == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// Run the identity suite with `fields` random field tuples drawn from a
/// generator seeded with `seed`.
pub fn check_identities(mesh: &StaggeredMesh, fields: usize, seed: u64) -> IdentityReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let abs_grad = assemble(mesh, OpKind::Grad).matrix.abs();
    let abs_curl = assemble(mesh, OpKind::Curl).matrix.abs();
    let abs_skew = assemble(mesh, OpKind::SkewGrad).matrix.abs();
    let abs_div = assemble(mesh, OpKind::Div).matrix.abs();
    let mut r = IdentityReport { fields, ..Default::default() };
    for _ in 0..fields {
        let phi = CellField::random(mesh, &mut rng);
        let psi = VertexField::random(mesh, &mut rng);
        let u = EdgeField::random(mesh, &mut rng);
        let gphi = grad(&phi);
        let spsi = skew_grad(&psi);

        let lhs = u.inner(&gphi).expect("same mesh");
        let rhs = -0.5 * div(&u).inner(&phi).expect("same mesh");
        r.ibp_grad = r.ibp_grad.max(ibp_defect(lhs, rhs, u.norm() * gphi.norm()));

        let lhs = u.inner(&spsi).expect("same mesh");
        let rhs = -0.5 * curl(&u).inner(&psi).expect("same mesh");
        r.ibp_skew = r.ibp_skew.max(ibp_defect(lhs, rhs, u.norm() * spsi.norm()));

        let u0 = u.clone().with_zero_boundary();
        let lhs = u0.inner(&spsi).expect("same mesh");
        let rhs = -0.5 * curl(&u0).inner(&psi).expect("same mesh");
        r.ibp_skew_zero_boundary = r.ibp_skew_zero_boundary.max(ibp_defect(lhs, rhs, u0.norm() * spsi.norm()));

        let cg = curl(&gphi).max_abs();
        let abs_phi: Vec<f64> = phi.values().iter().map(|v| v.abs()).collect();
        let scale = abs_curl.mul_vec(&abs_grad.mul_vec(&abs_phi)).iter().fold(0.0f64, |m, v| m.max(*v));
        r.curl_grad = r.curl_grad.max(ratio(cg, scale));
        r.curl_grad_raw = r.curl_grad_raw.max(ratio(cg, phi.max_abs()));

        let ds = div(&spsi).max_abs();
        let abs_psi: Vec<f64> = psi.values().iter().map(|v| v.abs()).collect();
        let scale = abs_div.mul_vec(&abs_skew.mul_vec(&abs_psi)).iter().fold(0.0f64, |m, v| m.max(*v));
        r.div_skew = r.div_skew.max(ratio(ds, scale));
        r.div_skew_raw = r.div_skew_raw.max(ratio(ds, psi.max_abs()));
    }
    r
}
