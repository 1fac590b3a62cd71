//! qcdstream: SU(3) kernels driven through different memory-access patterns,
//! a stream-copy bandwidth probe, and a shared-memory contention experiment.

use std::sync::{Arc, Barrier};
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{config, Error, Result};
use crate::su3::{fast, random_su3, FlopCount, Su3Matrix, Su3Vector, MAT_MAT_FLOPS, MAT_VEC_FLOPS};

pub const DEFAULT_CACHE_LINE_BYTES: usize = 64;
pub const DEFAULT_L2_BYTES: usize = 512 * 1024;
pub const DEFAULT_STRIDE_BYTES: usize = 1024;
pub const DEFAULT_SIZES: [usize; 7] = [2, 4, 6, 8, 10, 12, 14];

/// Byte distance that one index step moves through the matrix operand array.
pub const STRIDE_UNIT_BYTES: usize = std::mem::size_of::<Su3Matrix>();

/// Distinct operand values cycled through a pool.
const OPERAND_VARIETY: usize = 1024;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Kernel {
    MatVec,
    MatMat,
    Copy,
    Congrad,
}

impl Kernel {
    pub fn name(self) -> &'static str {
        match self {
            Kernel::MatVec => "MatVec",
            Kernel::MatMat => "MatMat",
            Kernel::Copy => "Copy",
            Kernel::Congrad => "Congrad",
        }
    }

    /// Flops per pool element per pass.
    pub fn flops_per_elem(self) -> u64 {
        match self {
            Kernel::MatVec => MAT_VEC_FLOPS,
            Kernel::MatMat => MAT_MAT_FLOPS,
            Kernel::Copy | Kernel::Congrad => 0,
        }
    }

    /// Bytes read plus bytes written per pool element per pass.
    pub fn bytes_per_elem(self) -> usize {
        let m = std::mem::size_of::<Su3Matrix>();
        let v = std::mem::size_of::<Su3Vector>();
        match self {
            Kernel::MatVec => m + 2 * v,
            Kernel::MatMat => 3 * m,
            Kernel::Copy => 2 * 8,
            Kernel::Congrad => 0,
        }
    }
}

impl std::str::FromStr for Kernel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "matvec" | "mat_vec" => Ok(Kernel::MatVec),
            "matmat" | "mat_mat" => Ok(Kernel::MatMat),
            "copy" => Ok(Kernel::Copy),
            "congrad" => Ok(Kernel::Congrad),
            _ => Err(Error::Config(format!("unknown kernel {s:?} (expected matvec, matmat or copy)"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AccessPattern {
    /// A small window reused over and over.
    InCache,
    Sequential,
    /// `i·stride mod pool`.
    Strided { stride_elems: usize },
    /// Seeded random permutation of the pool.
    Mapped { seed: u64 },
}

impl AccessPattern {
    /// Strided pattern from a byte stride, rejecting strides within one cache line.
    pub fn strided_bytes(stride_bytes: usize, cache_line_bytes: usize) -> Result<Self> {
        check_stride(stride_bytes, cache_line_bytes)?;
        Ok(AccessPattern::Strided { stride_elems: stride_bytes.div_ceil(STRIDE_UNIT_BYTES) })
    }

    pub fn default_strided() -> Self {
        AccessPattern::Strided { stride_elems: DEFAULT_STRIDE_BYTES.div_ceil(STRIDE_UNIT_BYTES) }
    }

    pub fn name(&self) -> &'static str {
        match self {
            AccessPattern::InCache => "InCache",
            AccessPattern::Sequential => "Sequential",
            AccessPattern::Strided { .. } => "Strided",
            AccessPattern::Mapped { .. } => "Mapped",
        }
    }

    /// The four patterns with default parameters.
    pub fn all(seed: u64) -> [AccessPattern; 4] {
        [AccessPattern::InCache, AccessPattern::Sequential, AccessPattern::default_strided(), AccessPattern::Mapped { seed }]
    }

    /// Parse `incache`, `sequential`, `strided` or `mapped`.
    pub fn parse(name: &str, stride_bytes: usize, seed: u64, cache_line_bytes: usize) -> Result<Self> {
        match name.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "incache" => Ok(AccessPattern::InCache),
            "sequential" => Ok(AccessPattern::Sequential),
            "strided" => AccessPattern::strided_bytes(stride_bytes, cache_line_bytes),
            "mapped" => Ok(AccessPattern::Mapped { seed }),
            _ => Err(Error::Config(format!("unknown pattern {name:?}"))),
        }
    }
}

impl std::fmt::Display for AccessPattern {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

fn check_stride(stride_bytes: usize, line: usize) -> Result<()> {
    if stride_bytes <= line {
        return config(format!(
            "strided access needs a stride larger than one cache line: {stride_bytes} bytes <= {line}-byte line"
        ));
    }
    Ok(())
}

fn gcd(mut a: usize, mut b: usize) -> usize {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Cache parameters and recorded samples for one host.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MachineProfile {
    pub label: String,
    pub cache_line_bytes: usize,
    pub l2_bytes: usize,
    /// Last-level cache, when known.
    #[serde(default)]
    pub llc_bytes: Option<usize>,
    #[serde(default)]
    pub hardware_threads: usize,
    #[serde(default)]
    pub samples: Vec<PerfSample>,
}

impl Default for MachineProfile {
    fn default() -> Self {
        MachineProfile {
            label: "default".into(),
            cache_line_bytes: DEFAULT_CACHE_LINE_BYTES,
            l2_bytes: DEFAULT_L2_BYTES,
            llc_bytes: None,
            hardware_threads: 1,
            samples: Vec::new(),
        }
    }
}

fn parse_cache_size(s: &str) -> Option<usize> {
    let s = s.trim();
    let (num, mult) = match s.chars().last()? {
        'K' => (&s[..s.len() - 1], 1024),
        'M' => (&s[..s.len() - 1], 1024 * 1024),
        'G' => (&s[..s.len() - 1], 1024 * 1024 * 1024),
        _ => (s, 1),
    };
    num.parse::<usize>().ok().map(|n| n * mult)
}

impl MachineProfile {
    /// Host cache geometry from sysfs, falling back to the defaults.
    pub fn detect() -> Self {
        let mut p = MachineProfile {
            label: hostname(),
            hardware_threads: std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1),
            ..Default::default()
        };
        let base = std::path::Path::new("/sys/devices/system/cpu/cpu0/cache");
        let Ok(entries) = std::fs::read_dir(base) else {
            return p;
        };
        let mut llc = (0u32, 0usize);
        for e in entries.flatten() {
            let dir = e.path();
            let read = |f: &str| std::fs::read_to_string(dir.join(f)).ok();
            let (Some(level), Some(kind), Some(size)) = (read("level"), read("type"), read("size")) else {
                continue;
            };
            if kind.trim() == "Instruction" {
                continue;
            }
            let level: u32 = level.trim().parse().unwrap_or(0);
            let Some(size) = parse_cache_size(&size) else { continue };
            if level == 2 {
                p.l2_bytes = size;
            }
            if level > llc.0 {
                llc = (level, size);
            }
            if let Some(line) = read("coherency_line_size").and_then(|s| s.trim().parse().ok()) {
                p.cache_line_bytes = line;
            }
        }
        if llc.0 > 0 {
            p.llc_bytes = Some(llc.1);
        }
        p
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("profile serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Format(format!("machine profile: {e}")))
    }
}

pub fn hostname() -> String {
    std::fs::read_to_string("/proc/sys/kernel/hostname")
        .map(|s| s.trim().to_string())
        .unwrap_or_else(|_| "unknown".into())
}

/// How long and how often to repeat a measurement.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    /// Repetitions grow until one trial lasts this long.
    pub min_seconds: f64,
    pub trials: usize,
}

impl Default for Timing {
    fn default() -> Self {
        Timing { min_seconds: 0.2, trials: 3 }
    }
}

impl Timing {
    /// A single trial with no minimum duration.
    pub const fn once() -> Self {
        Timing { min_seconds: 0.0, trials: 1 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerfSample {
    pub kernel: Kernel,
    pub pattern: Option<AccessPattern>,
    pub working_set_bytes: u64,
    pub reps: u64,
    pub elapsed_sec: f64,
    pub flops: FlopCount,
    pub bytes_moved: u64,
    pub mflops: f64,
    pub mbytes_per_sec: f64,
    pub checksum: u64,
    /// Elapsed seconds of every trial, best one included.
    #[serde(default)]
    pub trial_seconds: Vec<f64>,
}

impl PerfSample {
    pub const CSV_HEADER: &'static str = "label,kernel,pattern,pool_bytes,reps,elapsed_sec,flops,bytes_moved,mflops,mbps,checksum";

    pub fn new(
        kernel: Kernel,
        pattern: Option<AccessPattern>,
        working_set_bytes: u64,
        reps: u64,
        elapsed_sec: f64,
        flops: FlopCount,
        bytes_moved: u64,
        checksum: u64,
    ) -> Self {
        let (mflops, mbytes_per_sec) = if elapsed_sec > 0.0 {
            (flops.get() as f64 / (elapsed_sec * 1e6), bytes_moved as f64 / (elapsed_sec * 1e6))
        } else {
            (0.0, 0.0)
        };
        PerfSample {
            kernel,
            pattern,
            working_set_bytes,
            reps,
            elapsed_sec,
            flops,
            bytes_moved,
            mflops,
            mbytes_per_sec,
            checksum,
            trial_seconds: vec![elapsed_sec],
        }
    }

    /// Rate used to compare runs: MFlop/s for arithmetic kernels, MB/s for copy.
    pub fn rate(&self) -> f64 {
        match self.kernel {
            Kernel::Copy => self.mbytes_per_sec,
            _ => self.mflops,
        }
    }

    pub fn csv_row(&self, label: &str) -> String {
        format!(
            "{},{},{},{},{},{:.6},{},{},{:.3},{:.3},{:016x}",
            label,
            self.kernel.name(),
            self.pattern.map(|p| p.name()).unwrap_or("-"),
            self.working_set_bytes,
            self.reps,
            self.elapsed_sec,
            self.flops.get(),
            self.bytes_moved,
            self.mflops,
            self.mbytes_per_sec,
            self.checksum
        )
    }
}

/// Profile and timing shared by the benchmark drivers.
#[derive(Clone, Debug, Default)]
pub struct BenchConfig {
    pub profile: MachineProfile,
    pub timing: Timing,
}

/// Index sequence visiting a pool of `pool_size` elements.
pub fn make_index_map(pattern: AccessPattern, pool_size: usize, profile: &MachineProfile) -> Result<Vec<u32>> {
    if pool_size == 0 {
        return config("operand pool must hold at least one element");
    }
    if pool_size > u32::MAX as usize {
        return config(format!("operand pool of {pool_size} elements exceeds the index range"));
    }
    let n = pool_size;
    Ok(match pattern {
        AccessPattern::InCache => {
            let w = in_cache_window(n, profile);
            (0..n).map(|i| (i % w) as u32).collect()
        }
        AccessPattern::Sequential => (0..n as u32).collect(),
        AccessPattern::Strided { stride_elems } => {
            if stride_elems == 0 {
                return config("stride must be positive");
            }
            check_stride(stride_elems * STRIDE_UNIT_BYTES, profile.cache_line_bytes)?;
            let mut s = stride_elems;
            if n > 1 {
                while gcd(s % n, n) != 1 {
                    s += 1;
                }
            }
            (0..n).map(|i| ((i as u128 * s as u128) % n as u128) as u32).collect()
        }
        AccessPattern::Mapped { seed } => {
            let mut v: Vec<u32> = (0..n as u32).collect();
            v.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
            v
        }
    })
}

/// Elements of the largest operand kernel that fit in half the L2.
fn in_cache_window(pool: usize, profile: &MachineProfile) -> usize {
    let per = Kernel::MatMat.bytes_per_elem();
    (profile.l2_bytes / 2 / per).clamp(1, pool)
}

/// Pool elements for a byte budget under `kernel`.
pub fn pool_elems_for_bytes(kernel: Kernel, bytes: usize) -> usize {
    (bytes / kernel.bytes_per_elem()).max(1)
}

fn fold_checksum<T: bytemuck::Pod>(out: &[T]) -> u64 {
    let words: &[u32] = bytemuck::cast_slice(out);
    let mut acc = 0u64;
    let step = (words.len() / 64).max(1);
    for (k, w) in words.iter().step_by(step).enumerate() {
        acc ^= (*w as u64).rotate_left((k % 64) as u32);
    }
    acc
}

fn alloc<T: Clone>(n: usize, v: T, what: &str) -> Result<Vec<T>> {
    let mut out = Vec::new();
    out.try_reserve_exact(n)
        .map_err(|_| Error::Resource(format!("cannot allocate {n} {what} operands")))?;
    advise_huge_pages(&mut out);
    out.resize(n, v);
    Ok(out)
}

/// Ask for transparent huge pages over a freshly reserved buffer, so that
/// scattered patterns measure memory rather than TLB reach.
#[cfg(target_os = "linux")]
fn advise_huge_pages<T>(v: &mut Vec<T>) {
    const HUGE: usize = 2 << 20;
    let bytes = v.capacity() * std::mem::size_of::<T>();
    let start = v.as_mut_ptr() as usize;
    let lo = start.next_multiple_of(HUGE);
    let hi = (start + bytes) / HUGE * HUGE;
    if hi > lo {
        // SAFETY: the range lies inside the allocation owned by `v`; madvise only changes paging hints.
        unsafe {
            libc::madvise(lo as *mut libc::c_void, hi - lo, libc::MADV_HUGEPAGE);
        }
    }
}

#[cfg(not(target_os = "linux"))]
fn advise_huge_pages<T>(_: &mut Vec<T>) {}

/// Pool elements between a software prefetch and the use of its operand.
const PREFETCH_AHEAD: usize = 16;

/// Touch every cache line of `v` ahead of use.
#[inline(always)]
fn prefetch<T>(v: &T) {
    #[cfg(target_arch = "x86_64")]
    {
        use std::arch::x86_64::{_mm_prefetch, _MM_HINT_T0};
        let p = v as *const T as *const i8;
        let mut off = 0;
        while off < std::mem::size_of::<T>() {
            // SAFETY: prefetch is a hint and never faults; the address is inside `v`.
            unsafe { _mm_prefetch(p.add(off), _MM_HINT_T0) };
            off += 64;
        }
        // the last byte may sit on one more line
        unsafe { _mm_prefetch(p.add(std::mem::size_of::<T>() - 1), _MM_HINT_T0) };
    }
    #[cfg(not(target_arch = "x86_64"))]
    let _ = v;
}

/// Operand pool for one kernel.
struct Pool {
    kernel: Kernel,
    idx: Vec<u32>,
    a: Vec<Su3Matrix>,
    b: Vec<Su3Matrix>,
    c: Vec<Su3Matrix>,
    x: Vec<Su3Vector>,
    y: Vec<Su3Vector>,
}

impl Pool {
    fn new(kernel: Kernel, pattern: AccessPattern, n: usize, profile: &MachineProfile) -> Result<Self> {
        let idx = make_index_map(pattern, n, profile)?;
        let variety: Vec<Su3Matrix> = (0..OPERAND_VARIETY.min(n)).map(|s| random_su3(s as u64)).collect();
        let mut a = alloc(n, Su3Matrix::zero(), "matrix")?;
        for (i, m) in a.iter_mut().enumerate() {
            *m = variety[i % variety.len()];
        }
        let (b, c, x, y) = match kernel {
            Kernel::MatVec => {
                let mut x = alloc(n, Su3Vector::zero(), "vector")?;
                for (i, v) in x.iter_mut().enumerate() {
                    *v = Su3Vector::new(variety[(i * 7 + 3) % variety.len()].e[0]);
                }
                (Vec::new(), Vec::new(), x, alloc(n, Su3Vector::zero(), "vector")?)
            }
            Kernel::MatMat => {
                let mut b = alloc(n, Su3Matrix::zero(), "matrix")?;
                for (i, m) in b.iter_mut().enumerate() {
                    *m = variety[(i * 7 + 3) % variety.len()];
                }
                (b, alloc(n, Su3Matrix::zero(), "matrix")?, Vec::new(), Vec::new())
            }
            _ => return config(format!("{} is not a qcdstream kernel", kernel.name())),
        };
        Ok(Pool { kernel, idx, a, b, c, x, y })
    }

    fn pass(&mut self) {
        let n = self.idx.len();
        match self.kernel {
            Kernel::MatVec => {
                for k in 0..n {
                    if k + PREFETCH_AHEAD < n {
                        let j = self.idx[k + PREFETCH_AHEAD] as usize;
                        prefetch(&self.a[j]);
                        prefetch(&self.x[j]);
                        prefetch(&self.y[j]);
                    }
                    let i = self.idx[k] as usize;
                    self.y[i] = fast::mat_vec(&self.a[i], &self.x[i]);
                }
                std::hint::black_box(&mut self.y);
            }
            Kernel::MatMat => {
                for k in 0..n {
                    if k + PREFETCH_AHEAD < n {
                        let j = self.idx[k + PREFETCH_AHEAD] as usize;
                        prefetch(&self.a[j]);
                        prefetch(&self.b[j]);
                        prefetch(&self.c[j]);
                    }
                    let i = self.idx[k] as usize;
                    self.c[i] = fast::mat_mat(&self.a[i], &self.b[i]);
                }
                std::hint::black_box(&mut self.c);
            }
            _ => unreachable!(),
        }
    }

    fn checksum(&self) -> u64 {
        match self.kernel {
            Kernel::MatVec => fold_checksum(&self.y),
            _ => fold_checksum(&self.c),
        }
    }
}

/// Time `work(reps)`; doubles `reps` until a trial lasts `min_seconds`,
/// then keeps the fastest of `trials`. Returns `(reps, best, all)`.
pub(crate) fn time_trials(timing: Timing, mut reps: u64, mut work: impl FnMut(u64)) -> (u64, f64, Vec<f64>) {
    let mut trials = Vec::with_capacity(timing.trials.max(1));
    loop {
        let t = Instant::now();
        work(reps);
        let e = t.elapsed().as_secs_f64();
        if e >= timing.min_seconds || reps >= u64::MAX / 2 {
            trials.push(e);
            break;
        }
        let grow = if e > 0.0 { (timing.min_seconds / e * 1.2).ceil() as u64 } else { 2 };
        reps = reps.saturating_mul(grow.clamp(2, 1024));
    }
    for _ in 1..timing.trials.max(1) {
        let t = Instant::now();
        work(reps);
        trials.push(t.elapsed().as_secs_f64());
    }
    let best = trials.iter().cloned().fold(f64::INFINITY, f64::min);
    (reps, best, trials)
}

fn warn_if_small(pattern: AccessPattern, bytes: usize, profile: &MachineProfile) {
    if pattern != AccessPattern::InCache && bytes < 4 * profile.l2_bytes {
        log::warn!(
            "operand pool of {bytes} bytes is less than 4x the {}-byte L2; {} results will be cache-resident",
            profile.l2_bytes,
            pattern.name()
        );
    }
}

/// One qcdstream measurement over `pool_size` elements.
pub fn run_qcdstream(
    kernel: Kernel,
    pattern: AccessPattern,
    pool_size: usize,
    reps: u64,
    cfg: &BenchConfig,
) -> Result<PerfSample> {
    if reps == 0 {
        return config("reps must be at least 1");
    }
    let mut pool = Pool::new(kernel, pattern, pool_size, &cfg.profile)?;
    let ws = pool_size * kernel.bytes_per_elem();
    warn_if_small(pattern, ws, &cfg.profile);
    pool.pass();
    let (reps, best, trials) = time_trials(cfg.timing, reps, |r| {
        for _ in 0..r {
            pool.pass();
        }
    });
    let flops = FlopCount::of(kernel.flops_per_elem(), reps * pool_size as u64);
    let bytes = reps * ws as u64;
    let mut s = PerfSample::new(kernel, Some(pattern), ws as u64, reps, best, flops, bytes, pool.checksum());
    s.trial_seconds = trials;
    Ok(s)
}

/// Stream-style copy of `bytes` bytes, `reps` times.
pub fn run_stream_copy(bytes: usize, reps: u64, cfg: &BenchConfig) -> Result<PerfSample> {
    let min = 4 * cfg.profile.l2_bytes;
    if bytes < min {
        return config(format!("copy buffer of {bytes} bytes is below the 4x L2 minimum of {min} bytes"));
    }
    if reps == 0 {
        return config("reps must be at least 1");
    }
    let n = bytes / 8;
    let mut src = alloc(n, 0u64, "copy")?;
    for (i, w) in src.iter_mut().enumerate() {
        *w = (i as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    }
    let mut dst = alloc(n, 0u64, "copy")?;
    copy_pass(&src, &mut dst);
    let (reps, best, trials) = time_trials(cfg.timing, reps, |r| {
        for _ in 0..r {
            copy_pass(&src, &mut dst);
        }
    });
    if dst != src {
        return Err(Error::Resource("copy destination differs from source".into()));
    }
    let moved = 2 * (n as u64 * 8) * reps;
    let mut s = PerfSample::new(Kernel::Copy, None, n as u64 * 8, reps, best, FlopCount::ZERO, moved, fold_checksum(&dst));
    s.trial_seconds = trials;
    Ok(s)
}

fn copy_pass(src: &[u64], dst: &mut [u64]) {
    dst.copy_from_slice(std::hint::black_box(src));
    std::hint::black_box(&mut *dst);
}

#[derive(Clone, Debug, PartialEq)]
pub struct SmpResult {
    /// The kernel run alone.
    pub single: PerfSample,
    /// One sample per concurrent worker.
    pub workers: Vec<PerfSample>,
    /// Aggregate rate over `workers × single` rate.
    pub efficiency: f64,
}

enum Work {
    Pool(Pool),
    Copy { src: Vec<u64>, dst: Vec<u64> },
}

impl Work {
    fn new(kernel: Kernel, pattern: AccessPattern, pool_size: usize, profile: &MachineProfile) -> Result<Self> {
        match kernel {
            Kernel::Copy => {
                let n = pool_size.max(1);
                let src: Vec<u64> = (0..n as u64).collect();
                Ok(Work::Copy { dst: alloc(n, 0, "copy")?, src })
            }
            _ => Ok(Work::Pool(Pool::new(kernel, pattern, pool_size, profile)?)),
        }
    }

    fn pass(&mut self) {
        match self {
            Work::Pool(p) => p.pass(),
            Work::Copy { src, dst } => copy_pass(src, dst),
        }
    }

    fn checksum(&self) -> u64 {
        match self {
            Work::Pool(p) => p.checksum(),
            Work::Copy { dst, .. } => fold_checksum(dst),
        }
    }
}

fn sample_from(kernel: Kernel, pattern: AccessPattern, pool_size: usize, reps: u64, t: f64, trials: Vec<f64>, ck: u64) -> PerfSample {
    let ws = pool_size as u64 * kernel.bytes_per_elem() as u64;
    let (flops, moved) = (FlopCount::of(kernel.flops_per_elem(), reps * pool_size as u64), reps * ws);
    let pat = (kernel != Kernel::Copy).then_some(pattern);
    let mut s = PerfSample::new(kernel, pat, ws, reps, t, flops, moved, ck);
    s.trial_seconds = trials;
    s
}

/// Run the same loop alone and then on `workers` threads at once.
///
/// `reps` is the starting repetition count for the solo calibration; every
/// worker then runs the calibrated count. For [`Kernel::Copy`] `pool_size`
/// counts 8-byte words and the pattern is ignored.
pub fn run_smp_contention(
    kernel: Kernel,
    pattern: AccessPattern,
    workers: usize,
    pool_size: usize,
    reps: u64,
    cfg: &BenchConfig,
) -> Result<SmpResult> {
    if workers == 0 {
        return config("at least one worker is required");
    }
    if reps == 0 {
        return config("reps must be at least 1");
    }
    let hw = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
    if workers > hw {
        log::warn!("{workers} workers exceed the {hw} hardware threads; efficiency will reflect time-slicing");
    }
    warn_if_small(pattern, pool_size * kernel.bytes_per_elem(), &cfg.profile);

    let mut solo = Work::new(kernel, pattern, pool_size, &cfg.profile)?;
    solo.pass();
    let (reps, best, trials) = time_trials(cfg.timing, reps, |r| {
        for _ in 0..r {
            solo.pass();
        }
    });
    let single = sample_from(kernel, pattern, pool_size, reps, best, trials, solo.checksum());
    drop(solo);
    if workers == 1 {
        return Ok(SmpResult { workers: vec![single.clone()], single, efficiency: 1.0 });
    }

    let mut pools = Vec::with_capacity(workers);
    for _ in 0..workers {
        pools.push(Work::new(kernel, pattern, pool_size, &cfg.profile)?);
    }
    let barrier = Arc::new(Barrier::new(workers));
    let trials_n = cfg.timing.trials.max(1);
    let handles: Vec<_> = pools
        .into_iter()
        .map(|mut w| {
            let barrier = Arc::clone(&barrier);
            std::thread::spawn(move || {
                w.pass();
                let mut times = Vec::with_capacity(trials_n);
                for _ in 0..trials_n {
                    barrier.wait();
                    let t = Instant::now();
                    for _ in 0..reps {
                        w.pass();
                    }
                    times.push(t.elapsed().as_secs_f64());
                }
                (times, w.checksum())
            })
        })
        .collect();
    let mut per = Vec::with_capacity(workers);
    for h in handles {
        let (times, ck) = h.join().map_err(|_| Error::Resource("benchmark worker panicked".into()))?;
        let best = times.iter().cloned().fold(f64::INFINITY, f64::min);
        per.push(sample_from(kernel, pattern, pool_size, reps, best, times, ck));
    }
    let aggregate: f64 = per.iter().map(PerfSample::rate).sum();
    let efficiency = aggregate / (workers as f64 * single.rate());
    Ok(SmpResult { single, workers: per, efficiency })
}

/// A benchmark that can be run at a hypercubic lattice size `L`.
pub trait LatticeBenchmark {
    /// Bytes of per-site storage the run touches.
    fn site_bytes(&self) -> usize;
    fn run(&mut self, l: usize) -> Result<PerfSample>;
}

/// Run `bench` at every size, setting each sample's working set to
/// `site_bytes × L⁴`.
pub fn sweep_lattice_sizes(bench: &mut dyn LatticeBenchmark, sizes: &[usize]) -> Result<Vec<PerfSample>> {
    if let Some(&l) = sizes.iter().find(|&&l| l == 0 || l % 2 != 0) {
        return config(format!("lattice sizes must be even and positive, got {l}"));
    }
    if sizes.windows(2).any(|w| w[0] >= w[1]) {
        return config("lattice sizes must be strictly ascending");
    }
    sizes
        .iter()
        .map(|&l| {
            let mut s = bench.run(l)?;
            s.working_set_bytes = working_set_bytes(bench.site_bytes(), l);
            Ok(s)
        })
        .collect()
}

pub fn working_set_bytes(site_bytes: usize, l: usize) -> u64 {
    site_bytes as u64 * (l as u64).pow(4)
}

/// Rate drop, relative to the best smaller size, that counts as falling off the cache.
pub const CLIFF_FRACTION: f64 = 0.85;

/// Smallest size whose working set exceeds `cache_bytes`.
pub fn first_size_exceeding(site_bytes: usize, sizes: &[usize], cache_bytes: usize) -> Option<usize> {
    sizes.iter().copied().find(|&l| working_set_bytes(site_bytes, l) > cache_bytes as u64)
}

/// First `(L, rate)` point whose rate is below `fraction` of the best rate at any smaller `L`.
pub fn rate_cliff(points: &[(usize, f64)], fraction: f64) -> Option<usize> {
    let mut peak = f64::NEG_INFINITY;
    for &(l, rate) in points {
        if rate < fraction * peak {
            return Some(l);
        }
        peak = peak.max(rate);
    }
    None
}
