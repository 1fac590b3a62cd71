//! Fixtures shared by the criterion benches in `benches/`.

use qcdperf_core::solver::ParityRestriction;
use qcdperf_core::su3::random_su3;
use qcdperf_core::{FermionField, GaugeField, LatticeGeometry, LayoutPolicy, Su3Matrix, Su3Vector};

/// Lattice extents the operator benches sweep; 8 fits in L2 on most hosts, 14 does not.
pub const OPERATOR_SIZES: [usize; 3] = [4, 8, 14];

pub fn matrices(n: usize, seed: u64) -> Vec<Su3Matrix> {
    (0..n as u64).map(|i| random_su3(seed.wrapping_add(i))).collect()
}

pub fn vectors(n: usize, seed: u64) -> Vec<Su3Vector> {
    (0..n as u64).map(|i| Su3Vector::random(seed.wrapping_add(i))).collect()
}

/// Random gauge field and even-parity source on an `l`^4 lattice.
pub fn lattice(l: usize, layout: LayoutPolicy) -> (GaugeField, FermionField) {
    let g = LatticeGeometry::hypercubic(l).expect("even extent");
    let u = GaugeField::random(g, layout, 1).expect("gauge field");
    let b = FermionField::random(g, layout.tag, ParityRestriction::Even, 2);
    (u, b)
}

pub fn layouts() -> [LayoutPolicy; 3] {
    [LayoutPolicy::site_major(), LayoutPolicy::milc_emulation(), LayoutPolicy::field_major()]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_have_requested_shapes() {
        assert_eq!(matrices(5, 1).len(), 5);
        assert_eq!(vectors(7, 1).len(), 7);
        let (u, b) = lattice(4, LayoutPolicy::field_major());
        assert_eq!(u.geometry().volume(), 256);
        assert_eq!(b.len(), 128);
    }
}
