//! Analytic cluster model: fixed-sublattice scaling, slow-node substitution
//! and injected-latency sensitivity of the D-slash and CG workloads.
//!
//! Times are microseconds and rates MB/s, so `bytes / rate` is already in µs
//! and `flops / mflops` likewise.

use serde::{Deserialize, Serialize};

use crate::error::{config, domain, Error, Result};
use crate::lattice::{LatticeGeometry, MILC_SITE_BYTES, NDIM};
use crate::solver::{CG_ITER_FLOPS_PER_SITE, DSLASH_FLOPS_PER_SITE, GLOBAL_SUMS_PER_ITERATION};

pub const DEFAULT_WIRE_RATE_MBPS: f64 = 250.0;
pub const DEFAULT_SMP_EFFICIENCY: f64 = 0.55;
/// One single-precision color vector per exchanged site.
pub const DEFAULT_EXCHANGE_BYTES: usize = 24;
/// Payload of one global-sum contribution.
pub const ALLREDUCE_PAYLOAD_BYTES: f64 = 8.0;
/// CG flops per even site spent outside the two D-slash applications.
pub const CG_LINALG_FLOPS_PER_SITE: u64 = CG_ITER_FLOPS_PER_SITE - 2 * DSLASH_FLOPS_PER_SITE;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeProfile {
    pub label: String,
    pub mflops_in_cache: f64,
    pub mflops_main_memory: f64,
    pub l2_bytes: u64,
    pub pci_read_mbps: f64,
    pub pci_write_mbps: f64,
}

impl NodeProfile {
    /// Compute rate for a sublattice touching `working_set_bytes`.
    pub fn rate_for(&self, working_set_bytes: u64) -> f64 {
        if working_set_bytes <= self.l2_bytes {
            self.mflops_in_cache
        } else {
            self.mflops_main_memory
        }
    }

    pub fn pci_mbps(&self) -> f64 {
        self.pci_read_mbps.min(self.pci_write_mbps)
    }

    fn validate(&self, path: &str) -> Result<()> {
        for (name, v) in [
            ("mflops_in_cache", self.mflops_in_cache),
            ("mflops_main_memory", self.mflops_main_memory),
            ("pci_read_mbps", self.pci_read_mbps),
            ("pci_write_mbps", self.pci_write_mbps),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return config(format!("{path}.{name} must be positive, got {v}"));
            }
        }
        Ok(())
    }

    /// The slowest value of every rate across `nodes`.
    pub fn slowest_of<'a>(nodes: impl IntoIterator<Item = &'a NodeProfile>) -> Option<NodeProfile> {
        nodes.into_iter().cloned().reduce(|a, b| NodeProfile {
            label: "slowest".into(),
            mflops_in_cache: a.mflops_in_cache.min(b.mflops_in_cache),
            mflops_main_memory: a.mflops_main_memory.min(b.mflops_main_memory),
            l2_bytes: a.l2_bytes.min(b.l2_bytes),
            pci_read_mbps: a.pci_read_mbps.min(b.pci_read_mbps),
            pci_write_mbps: a.pci_write_mbps.min(b.pci_write_mbps),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkProfile {
    pub bandwidth_mbps: f64,
    pub base_latency_us: f64,
    #[serde(default)]
    pub injected_first_packet_delay_us: f64,
    #[serde(default = "default_wire_rate")]
    pub wire_rate_cap_mbps: f64,
}

fn default_wire_rate() -> f64 {
    DEFAULT_WIRE_RATE_MBPS
}

impl LinkProfile {
    pub fn new(bandwidth_mbps: f64, base_latency_us: f64) -> Self {
        LinkProfile { bandwidth_mbps, base_latency_us, injected_first_packet_delay_us: 0.0, wire_rate_cap_mbps: DEFAULT_WIRE_RATE_MBPS }
    }

    /// Point-to-point bandwidth between endpoints whose PCI limits are `pci_a` and `pci_b`.
    pub fn effective_mbps(&self, pci_a: f64, pci_b: f64) -> f64 {
        self.bandwidth_mbps.min(self.wire_rate_cap_mbps).min(pci_a).min(pci_b)
    }

    /// Latency paid before the first byte of a message arrives.
    pub fn startup_us(&self) -> f64 {
        self.base_latency_us + self.injected_first_packet_delay_us
    }

    /// One isolated message of `bytes`.
    pub fn message_time_us(&self, bytes: f64, effective_mbps: f64) -> f64 {
        self.startup_us() + bytes / effective_mbps
    }

    fn validate(&self) -> Result<()> {
        if !(self.bandwidth_mbps > 0.0) {
            return config(format!("link.bandwidth_mbps must be positive, got {}", self.bandwidth_mbps));
        }
        if !(self.wire_rate_cap_mbps > 0.0) {
            return config(format!("link.wire_rate_cap_mbps must be positive, got {}", self.wire_rate_cap_mbps));
        }
        if !(self.base_latency_us >= 0.0) {
            return config(format!("link.base_latency_us must be non-negative, got {}", self.base_latency_us));
        }
        if !(self.injected_first_packet_delay_us >= 0.0) {
            return config(format!(
                "link.injected_first_packet_delay_us must be non-negative, got {}",
                self.injected_first_packet_delay_us
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClusterConfig {
    pub nodes: Vec<NodeProfile>,
    pub link: LinkProfile,
    pub procs_per_node: usize,
    pub smp_efficiency: f64,
    /// Bytes per lattice site resident on a process.
    pub site_bytes: usize,
    /// Bytes per surface site sent in a D-slash gather.
    pub exchange_bytes: usize,
}

impl ClusterConfig {
    pub fn homogeneous(node: NodeProfile, count: usize, link: LinkProfile) -> Self {
        ClusterConfig {
            nodes: vec![node; count],
            link,
            procs_per_node: 1,
            smp_efficiency: DEFAULT_SMP_EFFICIENCY,
            site_bytes: MILC_SITE_BYTES,
            exchange_bytes: DEFAULT_EXCHANGE_BYTES,
        }
    }

    pub fn nprocs(&self) -> usize {
        self.nodes.len() * self.procs_per_node
    }

    /// Copy with node `index` replaced by `node`.
    pub fn substituted(&self, index: usize, node: NodeProfile) -> Result<Self> {
        if index >= self.nodes.len() {
            return domain(format!("node {index} out of range for a {}-node cluster", self.nodes.len()));
        }
        let mut c = self.clone();
        c.nodes[index] = node;
        Ok(c)
    }

    /// Same cluster with a different node count, all copies of node 0.
    pub fn resized(&self, count: usize) -> Self {
        let mut c = self.clone();
        c.nodes = vec![self.nodes[0].clone(); count];
        c
    }

    pub fn with_delay(&self, delay_us: f64) -> Self {
        let mut c = self.clone();
        c.link.injected_first_packet_delay_us = delay_us;
        c
    }

    pub fn validate(&self) -> Result<()> {
        if self.nodes.is_empty() {
            return config("nodes: at least one node is required");
        }
        for (i, n) in self.nodes.iter().enumerate() {
            n.validate(&format!("nodes[{i}]"))?;
        }
        self.link.validate()?;
        if !matches!(self.procs_per_node, 1 | 2) {
            return config(format!("procs_per_node must be 1 or 2, got {}", self.procs_per_node));
        }
        if !(self.smp_efficiency > 0.0 && self.smp_efficiency <= 1.0) {
            return config(format!("smp_efficiency must lie in (0, 1], got {}", self.smp_efficiency));
        }
        if self.site_bytes == 0 || self.exchange_bytes == 0 {
            return config("site_bytes and exchange_bytes must be positive");
        }
        Ok(())
    }

    /// Per-process compute rate on `node` for a sublattice of `volume` sites.
    pub fn process_rate(&self, node: &NodeProfile, volume: usize) -> f64 {
        let r = node.rate_for((self.site_bytes * volume) as u64);
        if self.procs_per_node == 2 {
            r * self.smp_efficiency
        } else {
            r
        }
    }

    /// PCI rate available to one process on `node`.
    pub fn process_pci(&self, node: &NodeProfile) -> f64 {
        node.pci_mbps() / self.procs_per_node as f64
    }

    /// Bandwidth of the slowest link in the cluster.
    pub fn min_effective_mbps(&self) -> f64 {
        let worst = self.nodes.iter().map(|n| self.process_pci(n)).fold(f64::INFINITY, f64::min);
        self.link.effective_mbps(worst, worst)
    }

    /// Slowest per-process compute rate for a sublattice of `volume` sites.
    pub fn min_process_rate(&self, volume: usize) -> f64 {
        self.nodes.iter().map(|n| self.process_rate(n, volume)).fold(f64::INFINITY, f64::min)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Decomposition {
    /// Process-grid extent per dimension, x first.
    pub grid: [usize; NDIM],
    /// Sublattice dims held by one process.
    pub sub: [usize; NDIM],
    pub comm_dims: usize,
}

impl Decomposition {
    pub fn nprocs(&self) -> usize {
        self.grid.iter().product()
    }

    pub fn sub_volume(&self) -> usize {
        self.sub.iter().product()
    }

    /// Dimensions with more than one process, in splitting order t,z,y,x.
    pub fn communicated(&self) -> impl Iterator<Item = usize> + '_ {
        (0..NDIM).rev().filter(|&d| self.grid[d] > 1)
    }

    /// Decomposition giving every one of `nprocs` processes an `l⁴` sublattice.
    pub fn fixed_sublattice(l: usize, nprocs: usize) -> Result<Self> {
        let grid = canonical_grid(nprocs)?;
        let dims = std::array::from_fn(|d| l * grid[d]);
        let dec = decompose(&LatticeGeometry::new(dims)?, nprocs)?;
        debug_assert_eq!(dec.sub, [l; NDIM]);
        Ok(dec)
    }
}

fn check_power_of_two(nprocs: usize) -> Result<()> {
    if nprocs == 0 || !nprocs.is_power_of_two() {
        return domain(format!("process count must be a power of two, got {nprocs}"));
    }
    Ok(())
}

/// Grid that splitting an unbounded hypercube `log2(nprocs)` times produces.
pub fn canonical_grid(nprocs: usize) -> Result<[usize; NDIM]> {
    check_power_of_two(nprocs)?;
    let mut grid = [1usize; NDIM];
    for _ in 0..nprocs.trailing_zeros() {
        let d = (0..NDIM).rev().min_by_key(|&d| grid[d]).expect("four dims");
        grid[d] *= 2;
    }
    Ok(grid)
}

/// Split `lattice` over `nprocs` processes by halving the largest local
/// extent, ties broken in the order t, z, y, x.
pub fn decompose(lattice: &LatticeGeometry, nprocs: usize) -> Result<Decomposition> {
    check_power_of_two(nprocs)?;
    let mut sub = lattice.dims();
    let mut grid = [1usize; NDIM];
    for _ in 0..nprocs.trailing_zeros() {
        let d = (0..NDIM).rev().max_by_key(|&d| (sub[d], d)).expect("four dims");
        if !sub[d].is_multiple_of(2) {
            return domain(format!(
                "lattice {:?} cannot be split over {nprocs} processes: extent {} in dimension {d} is odd",
                lattice.dims(),
                sub[d]
            ));
        }
        sub[d] /= 2;
        grid[d] *= 2;
    }
    let comm_dims = grid.iter().filter(|&&g| g > 1).count();
    Ok(Decomposition { grid, sub, comm_dims })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SurfaceBytes {
    /// Bytes exchanged per dimension (both faces), x first; zero if not communicated.
    pub per_dim: [u64; NDIM],
    pub total: u64,
}

/// Halo bytes of one D-slash for a sublattice communicating in the first
/// `comm_dims` dimensions of the order t, z, y, x.
pub fn surface_bytes(sub: [usize; NDIM], comm_dims: usize, bytes_per_site: usize) -> Result<SurfaceBytes> {
    if comm_dims > NDIM {
        return domain(format!("at most {NDIM} dimensions can communicate, got {comm_dims}"));
    }
    let vol: usize = sub.iter().product();
    let mut per_dim = [0u64; NDIM];
    for d in (0..NDIM).rev().take(comm_dims) {
        // two faces, one parity of each
        per_dim[d] = (2 * (vol / sub[d]) / 2 * bytes_per_site) as u64;
    }
    Ok(SurfaceBytes { per_dim, total: per_dim.iter().sum() })
}

fn surface_of(dec: &Decomposition, bytes_per_site: usize) -> SurfaceBytes {
    let vol = dec.sub_volume();
    let mut per_dim = [0u64; NDIM];
    for d in dec.communicated() {
        per_dim[d] = (vol / dec.sub[d] * bytes_per_site) as u64;
    }
    SurfaceBytes { per_dim, total: per_dim.iter().sum() }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PhaseTimes {
    pub compute_us: f64,
    pub comm_us: f64,
    pub total_us: f64,
}

/// One D-slash application, gated by the slowest process in each phase.
///
/// The gathers in all communicated directions are in flight together, so
/// the startup latency is paid once per application and the face transfers
/// queue behind each other on the adapter.
pub fn model_dslash_time(cfg: &ClusterConfig, dec: &Decomposition) -> PhaseTimes {
    let half = dec.sub_volume() as f64 / 2.0;
    let compute_us = DSLASH_FLOPS_PER_SITE as f64 * half / cfg.min_process_rate(dec.sub_volume());
    let comm_us = if dec.comm_dims == 0 {
        0.0
    } else {
        let s = surface_of(dec, cfg.exchange_bytes);
        cfg.link.startup_us() + s.total as f64 / cfg.min_effective_mbps()
    };
    PhaseTimes { compute_us, comm_us, total_us: compute_us + comm_us }
}

/// One global sum over `nprocs` processes: binary-tree reduce plus broadcast.
pub fn allreduce_time_us(cfg: &ClusterConfig, nprocs: usize) -> f64 {
    if nprocs <= 1 {
        return 0.0;
    }
    let hops = 2.0 * (nprocs as f64).log2().ceil();
    hops * cfg.link.message_time_us(ALLREDUCE_PAYLOAD_BYTES, cfg.min_effective_mbps())
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct CongradTimes {
    pub dslash: PhaseTimes,
    pub linalg_us: f64,
    /// All global sums of one iteration.
    pub allreduce_us: f64,
    pub total_us: f64,
}

impl CongradTimes {
    pub fn compute_us(&self) -> f64 {
        2.0 * self.dslash.compute_us + self.linalg_us
    }

    pub fn comm_us(&self) -> f64 {
        2.0 * self.dslash.comm_us
    }
}

/// One CG iteration: two D-slash applications, the vector algebra, and the global sums.
pub fn model_congrad_iter_time(cfg: &ClusterConfig, dec: &Decomposition) -> CongradTimes {
    let dslash = model_dslash_time(cfg, dec);
    let half = dec.sub_volume() as f64 / 2.0;
    let linalg_us = CG_LINALG_FLOPS_PER_SITE as f64 * half / cfg.min_process_rate(dec.sub_volume());
    let allreduce_us = GLOBAL_SUMS_PER_ITERATION as f64 * allreduce_time_us(cfg, dec.nprocs());
    CongradTimes { dslash, linalg_us, allreduce_us, total_us: 2.0 * dslash.total_us + linalg_us + allreduce_us }
}

/// Which operator a sweep times.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Workload {
    Dslash,
    Congrad,
}

impl std::str::FromStr for Workload {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "dslash" | "d-slash" => Ok(Workload::Dslash),
            "congrad" | "cg" => Ok(Workload::Congrad),
            _ => Err(Error::Config(format!("unknown workload {s:?} (expected dslash or congrad)"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScalingPoint {
    pub nodes: usize,
    pub nprocs: usize,
    pub l: usize,
    pub comm_dims: usize,
    pub compute_us: f64,
    pub comm_us: f64,
    pub allreduce_us: f64,
    pub total_us: f64,
    pub mflops_per_node: f64,
}

impl ScalingPoint {
    pub const CSV_HEADER: &'static str = "nprocs,L,comm_dims,compute_us,comm_us,allreduce_us,total_us,mflops_per_node";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{:.4},{:.4},{:.4},{:.4},{:.4}",
            self.nprocs, self.l, self.comm_dims, self.compute_us, self.comm_us, self.allreduce_us, self.total_us, self.mflops_per_node
        )
    }
}

fn evaluate(cfg: &ClusterConfig, l: usize, workload: Workload) -> Result<ScalingPoint> {
    let nprocs = cfg.nprocs();
    let dec = Decomposition::fixed_sublattice(l, nprocs)?;
    let half = dec.sub_volume() as f64 / 2.0;
    let (compute_us, comm_us, allreduce_us, total_us, flops) = match workload {
        Workload::Dslash => {
            let t = model_dslash_time(cfg, &dec);
            (t.compute_us, t.comm_us, 0.0, t.total_us, DSLASH_FLOPS_PER_SITE as f64 * half)
        }
        Workload::Congrad => {
            let t = model_congrad_iter_time(cfg, &dec);
            (t.compute_us(), t.comm_us(), t.allreduce_us, t.total_us, CG_ITER_FLOPS_PER_SITE as f64 * half)
        }
    };
    Ok(ScalingPoint {
        nodes: cfg.nodes.len(),
        nprocs,
        l,
        comm_dims: dec.comm_dims,
        compute_us,
        comm_us,
        allreduce_us,
        total_us,
        mflops_per_node: flops * cfg.procs_per_node as f64 / total_us,
    })
}

/// Per-node rate at each node count for a fixed `l⁴` sublattice per process.
pub fn sweep_scaling(cfg: &ClusterConfig, node_counts: &[usize], l: usize, workload: Workload) -> Result<Vec<ScalingPoint>> {
    cfg.validate()?;
    node_counts
        .iter()
        .map(|&n| {
            check_power_of_two(n)?;
            if n > 128 {
                return domain(format!("node counts above 128 are outside the modelled range, got {n}"));
            }
            evaluate(&cfg.resized(n), l, workload)
        })
        .collect()
}

/// Cluster MFlop/s of the CG workload: every process runs at the pace of the
/// slowest one because each iteration ends in global sums.
pub fn model_substitution(cfg: &ClusterConfig, l: usize) -> Result<f64> {
    cfg.validate()?;
    if cfg.nodes.len() < 2 {
        return domain("substitution needs at least two nodes");
    }
    let p = evaluate(cfg, l, Workload::Congrad)?;
    Ok(p.mflops_per_node * cfg.nodes.len() as f64)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SubstitutionPoint {
    pub profile: String,
    pub nprocs: usize,
    pub l: usize,
    pub pci_read: f64,
    pub pci_write: f64,
    pub effective_mbps: f64,
    pub cluster_mflops: f64,
    pub homogeneous_mflops: f64,
    /// Fractional loss of cluster MFlop/s.
    pub degradation: f64,
}

impl SubstitutionPoint {
    pub const CSV_HEADER: &'static str =
        "profile,nprocs,L,pci_read,pci_write,effective_mbps,cluster_mflops,homogeneous_mflops,degradation";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{:.4},{:.4},{:.4},{:.6}",
            self.profile,
            self.nprocs,
            self.l,
            self.pci_read,
            self.pci_write,
            self.effective_mbps,
            self.cluster_mflops,
            self.homogeneous_mflops,
            self.degradation
        )
    }
}

/// Replace one node of the homogeneous `base` cluster with `candidate`.
pub fn evaluate_substitution(base: &ClusterConfig, candidate: &NodeProfile, l: usize) -> Result<SubstitutionPoint> {
    let homogeneous = model_substitution(base, l)?;
    let sub = base.substituted(base.nodes.len() - 1, candidate.clone())?;
    let cluster = model_substitution(&sub, l)?;
    Ok(SubstitutionPoint {
        profile: candidate.label.clone(),
        nprocs: sub.nprocs(),
        l,
        pci_read: candidate.pci_read_mbps,
        pci_write: candidate.pci_write_mbps,
        effective_mbps: sub.min_effective_mbps(),
        cluster_mflops: cluster,
        homogeneous_mflops: homogeneous,
        degradation: 1.0 - cluster / homogeneous,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LatencyPoint {
    pub delay_us: f64,
    pub nprocs: usize,
    pub l: usize,
    pub comm_dims: usize,
    pub dslash_us: f64,
    pub congrad_us: f64,
    pub dslash_mflops_per_node: f64,
    pub congrad_mflops_per_node: f64,
}

impl LatencyPoint {
    pub const CSV_HEADER: &'static str =
        "delay_us,nprocs,L,comm_dims,dslash_us,congrad_us,dslash_mflops_per_node,congrad_mflops_per_node";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{:.4},{:.4},{:.4},{:.4}",
            self.delay_us,
            self.nprocs,
            self.l,
            self.comm_dims,
            self.dslash_us,
            self.congrad_us,
            self.dslash_mflops_per_node,
            self.congrad_mflops_per_node
        )
    }
}

/// D-slash and CG iteration time at each injected first-packet delay.
pub fn sweep_latency(cfg: &ClusterConfig, delays_us: &[f64], l: usize) -> Result<Vec<LatencyPoint>> {
    cfg.validate()?;
    delays_us
        .iter()
        .map(|&delay| {
            if !(delay >= 0.0) {
                return config(format!("injected delay must be non-negative, got {delay}"));
            }
            let c = cfg.with_delay(delay);
            let d = evaluate(&c, l, Workload::Dslash)?;
            let g = evaluate(&c, l, Workload::Congrad)?;
            Ok(LatencyPoint {
                delay_us: delay,
                nprocs: d.nprocs,
                l,
                comm_dims: d.comm_dims,
                dslash_us: d.total_us,
                congrad_us: g.total_us,
                dslash_mflops_per_node: d.mflops_per_node,
                congrad_mflops_per_node: g.mflops_per_node,
            })
        })
        .collect()
}

/// Injected delay at which the global sums of one CG iteration cost as
/// much as the rest of it, so MFlop/s is half the zero-delay value.
pub fn break_even_delay_us(cfg: &ClusterConfig, l: usize) -> Result<f64> {
    let c0 = cfg.with_delay(0.0);
    let dec = Decomposition::fixed_sublattice(l, c0.nprocs())?;
    let t0 = model_congrad_iter_time(&c0, &dec);
    // d(total)/d(delay): once per D-slash, and 2·ceil(log2 P) per global sum
    let hops = 2.0 * (dec.nprocs() as f64).log2().ceil();
    let slope = 2.0 * if dec.comm_dims > 0 { 1.0 } else { 0.0 } + GLOBAL_SUMS_PER_ITERATION as f64 * hops;
    if slope == 0.0 {
        return domain("a single process has no latency to inject");
    }
    Ok(t0.total_us / slope)
}

/// Declarative form of a [`ClusterConfig`] read from TOML.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    /// Label of the profile every node uses.
    pub node_profile: String,
    pub nodes: usize,
    #[serde(default = "one")]
    pub procs_per_node: usize,
    #[serde(default = "default_smp")]
    pub smp_efficiency: f64,
    #[serde(default = "default_site_bytes")]
    pub site_bytes: usize,
    #[serde(default = "default_exchange")]
    pub exchange_bytes: usize,
    pub link: LinkProfile,
    #[serde(rename = "profile")]
    pub profiles: Vec<NodeProfile>,
}

fn one() -> usize {
    1
}
fn default_smp() -> f64 {
    DEFAULT_SMP_EFFICIENCY
}
fn default_site_bytes() -> usize {
    MILC_SITE_BYTES
}
fn default_exchange() -> usize {
    DEFAULT_EXCHANGE_BYTES
}

impl ModelFile {
    pub fn parse(text: &str) -> Result<Self> {
        let f: ModelFile = toml::from_str(text).map_err(|e| Error::Config(format!("model config: {e}")))?;
        for (i, p) in f.profiles.iter().enumerate() {
            p.validate(&format!("profile[{i}]"))?;
        }
        Ok(f)
    }

    pub fn profile(&self, label: &str) -> Result<&NodeProfile> {
        self.profiles.iter().find(|p| p.label.eq_ignore_ascii_case(label)).ok_or_else(|| {
            let known: Vec<_> = self.profiles.iter().map(|p| p.label.as_str()).collect();
            Error::Config(format!("no profile labelled {label:?} (known: {})", known.join(", ")))
        })
    }

    /// Find a profile by exact label or by a unique case-insensitive substring.
    pub fn find_profile(&self, key: &str) -> Result<&NodeProfile> {
        if let Ok(p) = self.profile(key) {
            return Ok(p);
        }
        let k = key.to_ascii_lowercase();
        let hits: Vec<_> = self.profiles.iter().filter(|p| p.label.to_ascii_lowercase().contains(&k)).collect();
        match hits.as_slice() {
            [one] => Ok(one),
            [] => self.profile(key),
            _ => config(format!("profile {key:?} is ambiguous")),
        }
    }

    pub fn cluster(&self) -> Result<ClusterConfig> {
        let node = self.profile(&self.node_profile).map_err(|e| Error::Config(format!("node_profile: {e}")))?;
        let c = ClusterConfig {
            nodes: vec![node.clone(); self.nodes],
            link: self.link.clone(),
            procs_per_node: self.procs_per_node,
            smp_efficiency: self.smp_efficiency,
            site_bytes: self.site_bytes,
            exchange_bytes: self.exchange_bytes,
        };
        c.validate()?;
        Ok(c)
    }
}

/// The bundled reference configuration.
pub const REFERENCE_CONFIG: &str = include_str!("../../../data/reference/cluster_model.toml");

pub fn reference_model() -> ModelFile {
    ModelFile::parse(REFERENCE_CONFIG).expect("bundled model config parses")
}

#[cfg(test)]
mod tests;
