use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qcdperf_core::membench::{DEFAULT_STRIDE_BYTES, Kernel};

use crate::units;

#[derive(Parser, Debug, Clone)]
#[command(name = "qcdperf", version, about = "Lattice QCD kernel benchmarks, CG solver sweeps and cluster performance model")]
pub struct Cli {
    /// Output CSV [default: $QCDPERF_OUT/<command>.csv, or ./<command>.csv]
    #[arg(long, global = true, value_name = "FILE")]
    pub out: Option<PathBuf>,

    /// Also write a gnuplot script next to the CSV
    #[arg(long, global = true)]
    pub plot: bool,

    /// Overlay the bundled 2001-2003 reference tables in the plot script (implies --plot)
    #[arg(long, global = true)]
    pub compare: bool,

    /// Re-run the command recorded in a manifest and check its deterministic columns
    #[arg(long, value_name = "MANIFEST")]
    pub replay: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// SU(3) kernels over an operand pool under controlled access patterns
    Qcdstream(QcdstreamArgs),
    /// Copy bandwidth over a buffer larger than the cache
    Stream(StreamArgs),
    /// Throughput of concurrent workers against a single run
    Smp(SmpArgs),
    /// Full CG solves across lattice sizes and layouts
    Inverter(InverterArgs),
    /// Analytic cluster model sweeps
    Model(ModelArgs),
    /// Validate output CSVs and model configuration files
    SchemaCheck(SchemaCheckArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Qcdstream(_) => "qcdstream",
            Command::Stream(_) => "stream",
            Command::Smp(_) => "smp",
            Command::Inverter(_) => "inverter",
            Command::Model(m) => match m.which {
                ModelCommand::Latency(_) => "model-latency",
                ModelCommand::Scaling(_) => "model-scaling",
                ModelCommand::Substitute(_) => "model-substitute",
            },
            Command::SchemaCheck(_) => "schema-check",
        }
    }
}

#[derive(Args, Debug, Clone)]
pub struct TimingArgs {
    /// Starting repetitions per row (one value, or one per row); calibrated upward unless --fixed-reps
    #[arg(long, value_delimiter = ',', value_name = "N[,N...]")]
    pub reps: Option<Vec<u64>>,

    /// Use --reps exactly, with no calibration
    #[arg(long, requires = "reps")]
    pub fixed_reps: bool,

    /// Calibrate repetitions until one trial lasts this many seconds
    #[arg(long, default_value_t = 0.2)]
    pub min_seconds: f64,

    /// Timed trials per row; the fastest is reported
    #[arg(long, default_value_t = 3)]
    pub trials: usize,
}

#[derive(Args, Debug, Clone)]
pub struct HostArgs {
    /// Cache line size in bytes [default: detected]
    #[arg(long)]
    pub cache_line_bytes: Option<usize>,

    /// Cache capacity used for the in-cache window and cliff predictions [default: detected L2]
    #[arg(long)]
    pub l2_bytes: Option<usize>,
}

#[derive(Args, Debug, Clone)]
pub struct QcdstreamArgs {
    /// Kernels to run
    #[arg(long, value_delimiter = ',', default_value = "matvec")]
    pub kernel: Vec<Kernel>,

    /// Access pattern: incache, sequential, strided or mapped
    #[arg(long, default_value = "sequential", conflicts_with = "all_patterns")]
    pub pattern: String,

    /// One row per access pattern, all on the same pool
    #[arg(long)]
    pub all_patterns: bool,

    /// Stride in bytes for the strided pattern; must exceed one cache line
    #[arg(long, default_value_t = DEFAULT_STRIDE_BYTES)]
    pub stride: usize,

    /// Operand pool size (K, M, G suffixes are binary)
    #[arg(long, default_value = "64M", value_parser = units::parse_bytes)]
    pub pool: u64,

    /// Seed of the mapped permutation
    #[arg(long, default_value_t = 1)]
    pub seed: u64,

    #[command(flatten)]
    pub timing: TimingArgs,

    #[command(flatten)]
    pub host: HostArgs,
}

#[derive(Args, Debug, Clone)]
pub struct StreamArgs {
    /// Bytes copied per pass
    #[arg(long, default_value = "64M", value_parser = units::parse_bytes)]
    pub pool: u64,

    #[command(flatten)]
    pub timing: TimingArgs,

    #[command(flatten)]
    pub host: HostArgs,
}

#[derive(Args, Debug, Clone)]
pub struct SmpArgs {
    /// Concurrent workers
    #[arg(long, default_value_t = 2)]
    pub workers: usize,

    /// matvec, matmat or copy
    #[arg(long, default_value = "matvec")]
    pub kernel: Kernel,

    /// Access pattern (ignored for copy)
    #[arg(long, default_value = "sequential")]
    pub pattern: String,

    #[arg(long, default_value_t = DEFAULT_STRIDE_BYTES)]
    pub stride: usize,

    /// Pool size per worker
    #[arg(long, default_value = "64M", value_parser = units::parse_bytes)]
    pub pool: u64,

    #[arg(long, default_value_t = 1)]
    pub seed: u64,

    #[command(flatten)]
    pub timing: TimingArgs,

    #[command(flatten)]
    pub host: HostArgs,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Layouts {
    Site,
    Field,
    Both,
}

impl Layouts {
    pub fn name(self) -> &'static str {
        match self {
            Layouts::Site => "site",
            Layouts::Field => "field",
            Layouts::Both => "both",
        }
    }
}

#[derive(Args, Debug, Clone)]
pub struct InverterArgs {
    /// Lattice extents L (even), e.g. 2,4,6 or 2..16 for doubling
    #[arg(long, default_value = "2,4,6,8,10,12,14", value_parser = units::parse_list)]
    pub sizes: units::List,

    #[arg(long, value_enum, default_value_t = Layouts::Both)]
    pub layouts: Layouts,

    /// Pad site-major records to 1656 bytes per site
    #[arg(long)]
    pub emulate_milc_site: bool,

    #[arg(long, default_value_t = 0.1)]
    pub mass: f64,

    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,

    #[arg(long, default_value_t = 1000)]
    pub max_iter: usize,

    /// Seed of the gauge field; the source uses seed + 1
    #[arg(long, default_value_t = 1)]
    pub seed: u64,

    /// Calibrate solves until one trial lasts this many seconds
    #[arg(long, default_value_t = 0.2)]
    pub min_seconds: f64,

    #[arg(long, default_value_t = 3)]
    pub trials: usize,

    #[command(flatten)]
    pub host: HostArgs,
}

#[derive(Args, Debug, Clone)]
pub struct ModelArgs {
    #[command(subcommand)]
    pub which: ModelCommand,
}

#[derive(Args, Debug, Clone)]
pub struct ConfigArg {
    /// Cluster model TOML [default: bundled reference configuration]
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
}

#[derive(Subcommand, Debug, Clone)]
pub enum ModelCommand {
    /// Sweep injected first-packet delay
    Latency(LatencyArgs),
    /// Fixed-sublattice scaling over node counts
    Scaling(ScalingArgs),
    /// Replace one node of a homogeneous cluster with each profile
    Substitute(SubstituteArgs),
}

#[derive(Args, Debug, Clone)]
pub struct LatencyArgs {
    #[command(flatten)]
    pub config: ConfigArg,

    #[arg(long, default_value = "400us", value_parser = units::parse_delay_us)]
    pub max_delay: f64,

    #[arg(long, default_value = "25us", value_parser = units::parse_delay_us)]
    pub step: f64,

    #[arg(long, default_value_t = 32)]
    pub nodes: usize,

    /// Sublattice extent per process
    #[arg(long = "L", default_value_t = 14)]
    pub l: usize,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum WorkloadArg {
    Dslash,
    Congrad,
}

#[derive(Args, Debug, Clone)]
pub struct ScalingArgs {
    #[command(flatten)]
    pub config: ConfigArg,

    /// Sublattice extents
    #[arg(long = "L", default_value = "4,8,10,12,14", value_parser = units::parse_list)]
    pub l: units::List,

    /// Node counts; a..b doubles from a to b
    #[arg(long, default_value = "1..128", value_parser = units::parse_list)]
    pub nodes: units::List,

    #[arg(long, value_enum, default_value_t = WorkloadArg::Congrad)]
    pub workload: WorkloadArg,

    /// Processes per node [default: from the config]
    #[arg(long)]
    pub procs_per_node: Option<usize>,
}

#[derive(Args, Debug, Clone)]
pub struct SubstituteArgs {
    #[command(flatten)]
    pub config: ConfigArg,

    /// Profiles to substitute, by label or unique substring [default: every other profile]
    #[arg(long, value_delimiter = ',')]
    pub profile: Vec<String>,

    /// Profile of the homogeneous base cluster
    #[arg(long, default_value = "xeon-2.0-e7500")]
    pub base: String,

    #[arg(long, default_value_t = 32)]
    pub nodes: usize,

    /// Sublattice extents
    #[arg(long = "L", default_value = "14", value_parser = units::parse_list)]
    pub l: units::List,
}

#[derive(Args, Debug, Clone)]
pub struct SchemaCheckArgs {
    /// CSV outputs or model TOML files
    #[arg(required = true)]
    pub files: Vec<PathBuf>,
}
