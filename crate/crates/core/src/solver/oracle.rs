//! Explicit dense matrices for small lattices.
//!
//! Built directly from coordinates and the hopping formula, without the
//! neighbour table or the strided field access the fast operator uses.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::{field_to_dvec, to_c64, FermionField, GaugeField, ParityRestriction};
use crate::error::{domain, Result};
use crate::lattice::NDIM;

/// Largest volume the dense oracle accepts.
pub const DENSE_MAX_VOLUME: usize = 4096;

/// Dense `4m² − D_eo D_oe` on the even sites, plus the hopping blocks.
#[derive(Clone, Debug)]
pub struct DenseOperator {
    /// `D` restricted to even outputs and odd inputs.
    pub d_eo: DMatrix<Complex64>,
    /// `D` restricted to odd outputs and even inputs.
    pub d_oe: DMatrix<Complex64>,
    /// The even-site normal operator.
    pub a: DMatrix<Complex64>,
    pub mass: f64,
}

fn eta(c: &[usize; NDIM], mu: usize) -> f64 {
    let s: usize = c[..mu].iter().sum();
    if s.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

fn shifted(c: [usize; NDIM], dims: [usize; NDIM], mu: usize, up: bool) -> [usize; NDIM] {
    let mut out = c;
    out[mu] = if up { (c[mu] + 1) % dims[mu] } else { (c[mu] + dims[mu] - 1) % dims[mu] };
    out
}

/// Position of `c` within its parity class in the lexicographic (x fastest) order.
fn class_slot(c: [usize; NDIM], dims: [usize; NDIM]) -> usize {
    let lex = c[0] + dims[0] * (c[1] + dims[1] * (c[2] + dims[2] * c[3]));
    lex / 2
}

fn hopping_block(gauge: &GaugeField, out_even: bool) -> DMatrix<Complex64> {
    let geom = gauge.geometry();
    let dims = geom.dims();
    let h = geom.half_volume();
    let mut m = DMatrix::<Complex64>::zeros(3 * h, 3 * h);
    let half = Complex64::new(0.5, 0.0);
    for t in 0..dims[3] {
        for z in 0..dims[2] {
            for y in 0..dims[1] {
                for x in 0..dims[0] {
                    let c = [x, y, z, t];
                    if ((x + y + z + t) % 2 == 0) != out_even {
                        continue;
                    }
                    let row = class_slot(c, dims);
                    let xs = geom.site_index(c).expect("coords in range").linear;
                    for mu in 0..NDIM {
                        let e = Complex64::new(eta(&c, mu), 0.0) * half;
                        let up = shifted(c, dims, mu, true);
                        let dn = shifted(c, dims, mu, false);
                        let dn_site = geom.site_index(dn).expect("coords in range").linear;
                        let u_fwd = gauge.link(xs, mu);
                        let u_bwd = gauge.link(dn_site, mu);
                        let (cu, cd) = (class_slot(up, dims), class_slot(dn, dims));
                        for a in 0..3 {
                            for b in 0..3 {
                                // on 2-site extents the two hops land on the same site
                                m[(3 * row + a, 3 * cu + b)] += e * to_c64(u_fwd.e[a][b]);
                                m[(3 * row + a, 3 * cd + b)] -= e * to_c64(u_bwd.e[b][a]).conj();
                            }
                        }
                    }
                }
            }
        }
    }
    m
}

/// Dense even-site operator for `gauge` at `mass`.
pub fn dense_oracle(gauge: &GaugeField, mass: f64) -> Result<DenseOperator> {
    let v = gauge.geometry().volume();
    if v > DENSE_MAX_VOLUME {
        return domain(format!("dense oracle limited to {DENSE_MAX_VOLUME} sites, lattice has {v}"));
    }
    let d_eo = hopping_block(gauge, true);
    let d_oe = hopping_block(gauge, false);
    let n = d_eo.nrows();
    let mut a = -(&d_eo * &d_oe);
    let diag = Complex64::new(4.0 * mass * mass, 0.0);
    for i in 0..n {
        a[(i, i)] += diag;
    }
    Ok(DenseOperator { d_eo, d_oe, a, mass })
}

impl DenseOperator {
    pub fn dim(&self) -> usize {
        self.a.nrows()
    }

    /// `max |A − A†|` entrywise.
    pub fn hermiticity_defect(&self) -> f64 {
        let adj = self.a.adjoint();
        (&self.a - adj).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Smallest eigenvalue of the Hermitian part.
    pub fn min_eigenvalue(&self) -> f64 {
        let herm = (&self.a + self.a.adjoint()) * Complex64::new(0.5, 0.0);
        herm.symmetric_eigenvalues().iter().cloned().fold(f64::INFINITY, f64::min)
    }

    /// `A x` for an even field.
    pub fn apply(&self, x: &FermionField) -> DVector<Complex64> {
        &self.a * field_to_dvec(x)
    }

    /// `D` applied to a parity-restricted field, as a flat vector on the other parity.
    pub fn apply_dslash(&self, x: &FermionField) -> DVector<Complex64> {
        match x.restriction() {
            ParityRestriction::Odd => &self.d_eo * field_to_dvec(x),
            _ => &self.d_oe * field_to_dvec(x),
        }
    }
}

/// Cholesky solve of `A x = b` with the dense oracle.
pub fn dense_solve(op: &DenseOperator, b: &FermionField) -> Result<DVector<Complex64>> {
    let chol = op.a.clone().cholesky().ok_or_else(|| crate::Error::Domain("operator is not positive-definite".into()))?;
    Ok(chol.solve(&field_to_dvec(b)))
}
