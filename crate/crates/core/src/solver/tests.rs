use super::*;
use crate::lattice::LayoutPolicy;

fn geom(l: usize) -> LatticeGeometry {
    LatticeGeometry::hypercubic(l).unwrap()
}

#[test]
fn dslash_constant_is_576() {
    assert_eq!(DSLASH_FLOPS_PER_SITE, 576);
    assert_eq!(CG_ITER_FLOPS_PER_SITE, 1224);
    assert_eq!(CG_REFRESH_FLOPS_PER_SITE, 1170);
}

#[test]
fn phases_follow_coordinate_sums() {
    let g = LatticeGeometry::new([4, 4, 2, 2]).unwrap();
    let ph = StaggeredPhases::new(&g);
    for s in 0..g.volume() {
        let c = g.coords(s);
        assert_eq!(ph.eta(s, 0), 1.0);
        assert_eq!(ph.eta(s, 1), if c[0].is_multiple_of(2) { 1.0 } else { -1.0 });
        assert_eq!(ph.eta(s, 2), if (c[0] + c[1]).is_multiple_of(2) { 1.0 } else { -1.0 });
        assert_eq!(ph.eta(s, 3), if (c[0] + c[1] + c[2]).is_multiple_of(2) { 1.0 } else { -1.0 });
    }
}

#[test]
fn free_field_on_constant_vector_cancels() {
    let g = geom(4);
    let u = GaugeField::identity(g, LayoutPolicy::field_major()).unwrap();
    let v = Su3Vector::from_real([1.0, -2.0, 0.5]);
    let chi = FermionField::constant(g, LayoutTag::FieldMajor, ParityRestriction::Even, v);
    let out = dslash(&u, &chi, &StaggeredPhases::new(&g)).unwrap();
    assert_eq!(out.restriction(), ParityRestriction::Odd);
    assert!(out.norm_sqr() == 0.0);
}

#[test]
fn dslash_rejects_mismatches() {
    let g = geom(2);
    let u = GaugeField::identity(g, LayoutPolicy::site_major()).unwrap();
    let ph = StaggeredPhases::new(&g);
    let full = FermionField::zeros(g, LayoutTag::SiteMajor, ParityRestriction::Full);
    assert!(matches!(dslash(&u, &full, &ph), Err(Error::Domain(_))));
    let wrong_layout = FermionField::zeros(g, LayoutTag::FieldMajor, ParityRestriction::Even);
    assert!(matches!(dslash(&u, &wrong_layout, &ph), Err(Error::Domain(_))));
    let wrong_geom = FermionField::zeros(geom(4), LayoutTag::SiteMajor, ParityRestriction::Even);
    assert!(matches!(dslash(&u, &wrong_geom, &ph), Err(Error::Domain(_))));
}

#[test]
fn gauge_rejects_non_unitary_links() {
    let g = geom(2);
    let mut f = LatticeFields::zeroed(g, LayoutPolicy::site_major()).unwrap();
    for s in 0..g.volume() {
        for mu in 0..NDIM {
            f.set_link(s, mu, &Su3Matrix::identity());
        }
    }
    assert!(GaugeField::from_fields(f.clone()).is_ok());
    f.set_link(3, 2, &Su3Matrix::diagonal(Complex32::new(1.01, 0.0)));
    assert!(matches!(GaugeField::from_fields(f), Err(Error::Domain(_))));
}

#[test]
fn random_gauge_is_layout_independent() {
    let g = geom(4);
    let a = GaugeField::random(g, LayoutPolicy::site_major(), 5).unwrap();
    let b = GaugeField::random(g, LayoutPolicy::field_major(), 5).unwrap();
    for s in 0..g.volume() {
        for mu in 0..NDIM {
            assert_eq!(a.link(s, mu), b.link(s, mu));
            assert!(a.link(s, mu).unitarity_deviation() < 1e-5);
        }
    }
}

#[test]
fn zero_source_returns_zero() {
    let g = geom(4);
    let u = GaugeField::random(g, LayoutPolicy::field_major(), 1).unwrap();
    let b = FermionField::zeros(g, LayoutTag::FieldMajor, ParityRestriction::Even);
    let s = congrad(&u, &b, 0.1, 1e-6, 100).unwrap();
    assert_eq!(s.report.iterations, 0);
    assert!(s.report.converged);
    assert_eq!(s.x.norm_sqr(), 0.0);
}

#[test]
fn congrad_preconditions() {
    let g = geom(2);
    let u = GaugeField::identity(g, LayoutPolicy::field_major()).unwrap();
    let b = FermionField::random(g, LayoutTag::FieldMajor, ParityRestriction::Even, 3);
    assert!(congrad(&u, &b, 0.1, 0.0, 10).is_err());
    assert!(congrad(&u, &b, 0.0, 1e-6, 10).is_err());
    let odd = FermionField::random(g, LayoutTag::FieldMajor, ParityRestriction::Odd, 3);
    assert!(congrad(&u, &odd, 0.1, 1e-6, 10).is_err());
}

#[test]
fn nonconvergence_keeps_best_iterate() {
    let g = geom(4);
    let u = GaugeField::random(g, LayoutPolicy::field_major(), 2).unwrap();
    let b = FermionField::random(g, LayoutTag::FieldMajor, ParityRestriction::Even, 2);
    let s = congrad(&u, &b, 0.1, 1e-12, 3).unwrap();
    assert!(!s.report.converged);
    assert_eq!(s.report.iterations, 3);
    let best = s.report.residual_history.iter().cloned().fold(f64::INFINITY, f64::min);
    assert_eq!(s.report.final_relative_residual, best);
    let true_res = true_relative_residual(&u, &s.x, &b, 0.1);
    assert!((true_res - best).abs() < 1e-3 * best.max(1e-3));
}

#[test]
fn flops_match_formula() {
    let g = geom(4);
    for (seed, mass) in [(1u64, 0.1), (2, 0.5), (3, 0.05)] {
        let u = GaugeField::random(g, LayoutPolicy::field_major(), seed).unwrap();
        let b = FermionField::random(g, LayoutTag::FieldMajor, ParityRestriction::Even, seed);
        let s = congrad(&u, &b, mass, 1e-6, 500).unwrap();
        assert!(s.report.converged);
        assert_eq!(s.report.flops, congrad_flops(g.half_volume(), s.report.iterations, DEFAULT_REFRESH_INTERVAL));
        assert_eq!(s.report.global_sums, 1 + GLOBAL_SUMS_PER_ITERATION * s.report.iterations as u64);
    }
}

#[test]
fn global_sum_cases() {
    assert_eq!(global_sum(&[1.0, 2.0, 3.0]), 6.0);
    assert_eq!(global_sum(&[]), 0.0);
    let p = [1e16, 1.0, -1e16, 1.0];
    assert_eq!(global_sum(&p).to_bits(), global_sum(&p).to_bits());
    assert_eq!(global_sum(&p), 1.0);
}

#[test]
fn partition_count_changes_nothing_structural() {
    let g = geom(4);
    let u = GaugeField::random(g, LayoutPolicy::field_major(), 8).unwrap();
    let b = FermionField::random(g, LayoutTag::FieldMajor, ParityRestriction::Even, 8);
    let one = congrad_with(&u, &b, 0.2, 1e-6, 500, SolverOptions { partitions: 1, ..Default::default() }).unwrap();
    let four = congrad_with(&u, &b, 0.2, 1e-6, 500, SolverOptions { partitions: 4, ..Default::default() }).unwrap();
    assert!(one.report.converged && four.report.converged);
    assert!((one.report.iterations as i64 - four.report.iterations as i64).abs() <= 1);
}

#[test]
fn fermion_file_round_trip() {
    let g = LatticeGeometry::new([2, 4, 2, 2]).unwrap();
    for r in [ParityRestriction::Full, ParityRestriction::Even, ParityRestriction::Odd] {
        let f = FermionField::random(g, LayoutTag::SiteMajor, r, 17);
        let mut buf = Vec::new();
        f.write_to(&mut buf).unwrap();
        let back = FermionField::read_from(&mut buf.as_slice()).unwrap();
        assert_eq!(back, f);
    }
    let f = FermionField::random(g, LayoutTag::SiteMajor, ParityRestriction::Odd, 17);
    assert_eq!(f.first_site(), g.half_volume());
    assert_eq!(f.len(), g.half_volume());
}

#[test]
fn gauge_file_rejected_as_fermion() {
    let g = geom(2);
    let u = GaugeField::identity(g, LayoutPolicy::site_major()).unwrap();
    let mut buf = Vec::new();
    u.fields().write_to(&mut buf).unwrap();
    assert!(matches!(FermionField::read_from(&mut buf.as_slice()), Err(Error::Format(_))));
}

#[test]
fn csv_row_layout() {
    let r = SolveReport {
        iterations: 12,
        final_relative_residual: 5e-7,
        flops: FlopCount(1000),
        elapsed_sec: 0.5,
        mflops: 0.002,
        converged: true,
        global_sums: 37,
        residual_history: vec![],
    };
    let row = r.csv_row(&geom(4), &LayoutPolicy::field_major(), 0.1, 1e-6);
    assert_eq!(row.split(',').count(), SolveReport::CSV_HEADER.split(',').count());
    assert!(row.starts_with("4,field-major,0.1,0.000001,12,"));
}

