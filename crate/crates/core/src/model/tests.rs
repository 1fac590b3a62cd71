use super::*;

fn e7500() -> NodeProfile {
    reference_model().profile("xeon-2.0-e7500").unwrap().clone()
}

fn cluster(n: usize) -> ClusterConfig {
    ClusterConfig::homogeneous(e7500(), n, LinkProfile::new(225.0, 8.0))
}

#[test]
fn reference_config_loads() {
    let m = reference_model();
    let c = m.cluster().unwrap();
    assert_eq!(c.nodes.len(), 32);
    assert_eq!(c.link.wire_rate_cap_mbps, 250.0);
    assert_eq!(m.find_profile("i850E").unwrap().pci_read_mbps, 100.0);
    assert_eq!(m.find_profile("i860").unwrap().pci_write_mbps, 294.0);
    assert!(m.find_profile("xeon").is_err());
}

#[test]
fn config_errors_name_the_field() {
    let bad = REFERENCE_CONFIG.replace("bandwidth_mbps = 225.0", "bandwidth_mbps = -1.0");
    let e = ModelFile::parse(&bad).unwrap().cluster().unwrap_err().to_string();
    assert!(e.contains("link.bandwidth_mbps"), "{e}");
    let bad = REFERENCE_CONFIG.replace("pci_read_mbps = 100.0", "pci_read_mbps = 0.0");
    let e = ModelFile::parse(&bad).unwrap_err().to_string();
    assert!(e.contains("profile[4].pci_read_mbps"), "{e}");
    let bad = REFERENCE_CONFIG.replace("nodes = 32", "nodez = 32");
    let e = ModelFile::parse(&bad).unwrap_err().to_string();
    assert!(e.contains("nodez"), "{e}");
}

#[test]
fn single_process_grid() {
    let d = decompose(&LatticeGeometry::hypercubic(8).unwrap(), 1).unwrap();
    assert_eq!(d.grid, [1, 1, 1, 1]);
    assert_eq!(d.comm_dims, 0);
}

#[test]
fn sixteen_processes_on_16_4() {
    let d = decompose(&LatticeGeometry::hypercubic(16).unwrap(), 16).unwrap();
    assert_eq!(d.grid, [2, 2, 2, 2]);
    assert_eq!(d.sub, [8, 8, 8, 8]);
    assert_eq!(d.comm_dims, 4);
}

#[test]
fn comm_dims_sequence() {
    let dims: Vec<_> =
        [1, 2, 4, 8, 16, 32, 64, 128].iter().map(|&p| Decomposition::fixed_sublattice(6, p).unwrap().comm_dims).collect();
    assert_eq!(dims, vec![0, 1, 2, 3, 4, 4, 4, 4]);
    let d = decompose(&LatticeGeometry::hypercubic(16).unwrap(), 2).unwrap();
    assert_eq!(d.grid, [1, 1, 1, 2]);
}

#[test]
fn fixed_sublattice_keeps_sub() {
    for p in [1, 2, 4, 8, 16, 32, 64, 128] {
        let d = Decomposition::fixed_sublattice(10, p).unwrap();
        assert_eq!(d.sub, [10; 4]);
        assert_eq!(d.nprocs(), p);
    }
}

#[test]
fn decompose_errors() {
    let g = LatticeGeometry::new([2, 2, 2, 6]).unwrap();
    assert!(decompose(&g, 3).is_err());
    assert!(decompose(&g, 0).is_err());
    assert!(decompose(&g, 4).is_err());
}

#[test]
fn surface_examples() {
    assert_eq!(surface_bytes([8; 4], 0, 24).unwrap().total, 0);
    assert_eq!(surface_bytes([8; 4], 1, 24).unwrap().total, 12288);
    assert!(surface_bytes([8; 4], 5, 24).is_err());
    let a = surface_bytes([8, 8, 8, 8], 2, 24).unwrap();
    let b = surface_bytes([16, 8, 8, 8], 2, 24).unwrap();
    assert_eq!(b.per_dim[3], 2 * a.per_dim[3]);
    assert_eq!(b.per_dim[2], 2 * a.per_dim[2]);
}

#[test]
fn no_comm_means_compute_only() {
    let c = cluster(1);
    let d = Decomposition::fixed_sublattice(8, 1).unwrap();
    let t = model_dslash_time(&c, &d);
    assert_eq!(t.comm_us, 0.0);
    assert_eq!(t.total_us, t.compute_us);
    assert_eq!(allreduce_time_us(&c, 1), 0.0);
}

#[test]
fn halving_bandwidth_slows_dslash() {
    let c = cluster(16);
    let d = Decomposition::fixed_sublattice(8, 16).unwrap();
    let mut slow = c.clone();
    slow.link.bandwidth_mbps /= 2.0;
    assert!(model_dslash_time(&slow, &d).total_us > model_dslash_time(&c, &d).total_us);
}

#[test]
fn effective_bandwidth_is_capped() {
    let mut l = LinkProfile::new(400.0, 8.0);
    assert_eq!(l.effective_mbps(1000.0, 1000.0), 250.0);
    assert_eq!(l.effective_mbps(100.0, 1000.0), 100.0);
    l.bandwidth_mbps = 225.0;
    assert_eq!(l.effective_mbps(423.0, 476.0), 225.0);
}

#[test]
fn small_delay_barely_moves_large_dslash() {
    let c = cluster(32);
    let d = Decomposition::fixed_sublattice(14, 32).unwrap();
    let t0 = model_dslash_time(&c, &d).total_us;
    let t1 = model_dslash_time(&c.with_delay(100.0), &d).total_us;
    assert!((t1 - t0) / t0 < 0.03);
}

#[test]
fn break_even_delay_halves_rate() {
    let c = cluster(32);
    let d = break_even_delay_us(&c, 8).unwrap();
    let pts = sweep_latency(&c, &[0.0, d], 8).unwrap();
    let ratio = pts[1].congrad_mflops_per_node / pts[0].congrad_mflops_per_node;
    assert!((ratio - 0.5).abs() < 1e-9, "{ratio}");
}

#[test]
fn identical_substitution_changes_nothing() {
    let c = cluster(32);
    let p = evaluate_substitution(&c, &e7500(), 12).unwrap();
    assert_eq!(p.degradation, 0.0);
    assert!(model_substitution(&cluster(1), 12).is_err());
}

#[test]
fn heterogeneous_equals_slowest_homogeneous() {
    let m = reference_model();
    let base = cluster(32);
    for label in ["i850E", "i860", "xeon-1.7-e7500", "440GX"] {
        let cand = m.find_profile(label).unwrap().clone();
        let het = base.substituted(5, cand.clone()).unwrap();
        let slowest = NodeProfile::slowest_of(&het.nodes).unwrap();
        let mut homog = base.clone();
        homog.nodes = vec![slowest; 32];
        for l in [4, 8, 14] {
            assert_eq!(model_substitution(&het, l).unwrap(), model_substitution(&homog, l).unwrap());
        }
    }
}

#[test]
fn single_node_scaling_is_compute_rate() {
    let c = cluster(1);
    let p = sweep_scaling(&c, &[1], 14, Workload::Dslash).unwrap();
    assert_eq!(p[0].comm_us, 0.0);
    assert!((p[0].mflops_per_node - 350.0).abs() < 1e-9);
}

#[test]
fn smp_mode_scales_rate_and_shares_pci() {
    let mut c = cluster(4);
    c.procs_per_node = 2;
    assert_eq!(c.nprocs(), 8);
    assert!((c.process_rate(&c.nodes[0], 14usize.pow(4)) - 350.0 * 0.55).abs() < 1e-9);
    assert_eq!(c.process_pci(&c.nodes[0]), 423.0 / 2.0);
    c.procs_per_node = 3;
    assert!(c.validate().is_err());
}

#[test]
fn scaling_rejects_bad_counts() {
    let c = cluster(1);
    assert!(sweep_scaling(&c, &[3], 8, Workload::Dslash).is_err());
    assert!(sweep_scaling(&c, &[256], 8, Workload::Dslash).is_err());
}

#[test]
fn csv_rows_match_headers() {
    let c = cluster(8);
    let s = sweep_scaling(&c, &[8], 8, Workload::Congrad).unwrap();
    assert_eq!(s[0].csv_row().split(',').count(), ScalingPoint::CSV_HEADER.split(',').count());
    let l = sweep_latency(&c, &[0.0], 8).unwrap();
    assert_eq!(l[0].csv_row().split(',').count(), LatencyPoint::CSV_HEADER.split(',').count());
    let p = evaluate_substitution(&c, &e7500(), 8).unwrap();
    assert_eq!(p.csv_row().split(',').count(), SubstitutionPoint::CSV_HEADER.split(',').count());
}
