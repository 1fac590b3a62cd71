use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use log::{info, warn};
use qcdperf_core::membench::{
    first_size_exceeding, pool_elems_for_bytes, rate_cliff, run_qcdstream, run_smp_contention, run_stream_copy,
    working_set_bytes, BenchConfig, CLIFF_FRACTION,
};
use qcdperf_core::model::{
    evaluate_substitution, sweep_latency, sweep_scaling, ClusterConfig, ModelFile, Workload, REFERENCE_CONFIG,
};
use qcdperf_core::solver::InverterBenchmark;
use qcdperf_core::{AccessPattern, Kernel, LayoutPolicy, MachineProfile, PerfSample, Timing};

use crate::args::*;
use crate::plot::PlotSpec;
use crate::schema::{self, Schema};
use crate::units::join;

/// Canonical argument vector plus the same settings as manifest keys.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Resolved {
    pub argv: Vec<String>,
    pub options: Vec<(String, String)>,
}

impl Resolved {
    fn new(cmd: &[&str]) -> Self {
        Resolved { argv: cmd.iter().map(|s| s.to_string()).collect(), options: Vec::new() }
    }

    fn opt(&mut self, key: &str, v: impl ToString) -> &mut Self {
        let v = v.to_string();
        self.argv.push(format!("--{key}"));
        self.argv.push(v.clone());
        self.options.push((key.to_string(), v));
        self
    }

    fn flag(&mut self, key: &str, on: bool) -> &mut Self {
        if on {
            self.argv.push(format!("--{key}"));
        }
        self.options.push((key.to_string(), on.to_string()));
        self
    }

    /// Recorded in the manifest without becoming part of the replay arguments.
    fn note(&mut self, key: &str, v: impl ToString) -> &mut Self {
        self.options.push((key.to_string(), v.to_string()));
        self
    }
}

/// What a command produced, before anything is written.
#[derive(Debug)]
pub struct Output {
    pub schema: &'static Schema,
    pub rows: Vec<String>,
    pub resolved: Resolved,
    pub seeds: Vec<u64>,
    pub host: Option<MachineProfile>,
    pub plot: PlotSpec,
    pub title: String,
    /// Extra manifest entries.
    pub notes: Vec<(String, String)>,
    /// 0 success, 1 numerical failure.
    pub code: u8,
}

fn host_profile(h: &HostArgs) -> Result<MachineProfile> {
    let mut p = MachineProfile::detect();
    if let Some(line) = h.cache_line_bytes {
        if line == 0 {
            bail!("--cache-line-bytes must be positive");
        }
        p.cache_line_bytes = line;
    }
    if let Some(l2) = h.l2_bytes {
        if l2 == 0 {
            bail!("--l2-bytes must be positive");
        }
        p.l2_bytes = l2;
    }
    Ok(p)
}

fn resolve_host(r: &mut Resolved, p: &MachineProfile) {
    r.opt("cache-line-bytes", p.cache_line_bytes);
    r.opt("l2-bytes", p.l2_bytes);
}

fn timing(t: &TimingArgs) -> Result<Timing> {
    if !(t.min_seconds >= 0.0) || !t.min_seconds.is_finite() {
        bail!("--min-seconds must be a non-negative number");
    }
    if t.trials == 0 {
        bail!("--trials must be at least 1");
    }
    Ok(Timing { min_seconds: if t.fixed_reps { 0.0 } else { t.min_seconds }, trials: t.trials })
}

/// Starting repetitions for each of `rows` rows.
fn reps_per_row(t: &TimingArgs, rows: usize) -> Result<Vec<u64>> {
    let v = match &t.reps {
        None => vec![1; rows],
        Some(r) if r.len() == 1 => vec![r[0]; rows],
        Some(r) if r.len() == rows => r.clone(),
        Some(r) => bail!("--reps has {} values for {rows} rows; give one value or one per row", r.len()),
    };
    if v.contains(&0) {
        bail!("--reps values must be at least 1");
    }
    Ok(v)
}

fn resolve_timing(r: &mut Resolved, t: &TimingArgs, used_reps: &[u64]) {
    r.opt("reps", join(used_reps));
    r.flag("fixed-reps", true);
    r.opt("min-seconds", t.min_seconds);
    r.opt("trials", t.trials);
    if !t.fixed_reps {
        r.note("calibrated", true);
    }
}

pub fn qcdstream(a: &QcdstreamArgs) -> Result<Output> {
    let profile = host_profile(&a.host)?;
    let cfg = BenchConfig { profile: profile.clone(), timing: timing(&a.timing)? };
    if a.kernel.is_empty() {
        bail!("--kernel needs at least one of matvec, matmat");
    }
    if let Some(k) = a.kernel.iter().find(|k| !matches!(k, Kernel::MatVec | Kernel::MatMat)) {
        bail!("qcdstream runs matvec and matmat only, got {}", k.name());
    }
    let strided = AccessPattern::parse("strided", a.stride, a.seed, profile.cache_line_bytes)?;
    let patterns: Vec<AccessPattern> = if a.all_patterns {
        vec![AccessPattern::InCache, AccessPattern::Sequential, strided, AccessPattern::Mapped { seed: a.seed }]
    } else {
        vec![AccessPattern::parse(&a.pattern, a.stride, a.seed, profile.cache_line_bytes)?]
    };
    let jobs: Vec<(Kernel, AccessPattern)> = a.kernel.iter().flat_map(|&k| patterns.iter().map(move |&p| (k, p))).collect();
    let start = reps_per_row(&a.timing, jobs.len())?;

    let mut samples = Vec::new();
    for (&(k, p), &r) in jobs.iter().zip(&start) {
        let n = pool_elems_for_bytes(k, a.pool as usize);
        info!("qcdstream {} {} over {n} elements", k.name(), p.name());
        samples.push(run_qcdstream(k, p, n, r, &cfg)?);
    }
    let used: Vec<u64> = samples.iter().map(|s| s.reps).collect();

    let mut res = Resolved::new(&["qcdstream"]);
    res.opt("kernel", a.kernel.iter().map(|k| k.name().to_ascii_lowercase()).collect::<Vec<_>>().join(","));
    if a.all_patterns {
        res.flag("all-patterns", true);
    } else {
        res.opt("pattern", patterns[0].name().to_ascii_lowercase());
    }
    res.opt("stride", a.stride).opt("pool", a.pool).opt("seed", a.seed);
    resolve_timing(&mut res, &a.timing, &used);
    resolve_host(&mut res, &profile);

    let rows = samples.iter().map(|s| s.csv_row(&profile.label)).collect();
    let kernels = a.kernel.iter().map(|k| k.name()).collect();
    Ok(Output {
        schema: &schema::QCDSTREAM,
        rows,
        resolved: res,
        seeds: vec![a.seed],
        host: Some(with_samples(profile, samples)),
        plot: PlotSpec::Qcdstream { kernels },
        title: format!("qcdstream, {} MiB pool", a.pool >> 20),
        notes: vec![],
        code: 0,
    })
}

fn with_samples(mut p: MachineProfile, s: Vec<PerfSample>) -> MachineProfile {
    p.samples.extend(s);
    p
}

pub fn stream(a: &StreamArgs) -> Result<Output> {
    let profile = host_profile(&a.host)?;
    let cfg = BenchConfig { profile: profile.clone(), timing: timing(&a.timing)? };
    let r = reps_per_row(&a.timing, 1)?;
    let s = run_stream_copy(a.pool as usize, r[0], &cfg)?;
    let mut res = Resolved::new(&["stream"]);
    res.opt("pool", a.pool);
    resolve_timing(&mut res, &a.timing, &[s.reps]);
    resolve_host(&mut res, &profile);
    Ok(Output {
        schema: &schema::STREAM,
        rows: vec![s.csv_row(&profile.label)],
        resolved: res,
        seeds: vec![],
        host: Some(with_samples(profile, vec![s])),
        plot: PlotSpec::Stream,
        title: "stream copy".into(),
        notes: vec![],
        code: 0,
    })
}

fn smp_row(s: &PerfSample, workers: usize, role: &str, eff: f64) -> String {
    format!(
        "{},{},{},{},{},{},{:.6},{:.3},{:.3},{:016x},{:.4}",
        s.kernel.name(),
        s.pattern.map(|p| p.name()).unwrap_or("-"),
        s.working_set_bytes,
        workers,
        role,
        s.reps,
        s.elapsed_sec,
        s.mflops,
        s.mbytes_per_sec,
        s.checksum,
        eff
    )
}

pub fn smp(a: &SmpArgs) -> Result<Output> {
    let profile = host_profile(&a.host)?;
    let cfg = BenchConfig { profile: profile.clone(), timing: timing(&a.timing)? };
    if a.workers == 0 {
        bail!("--workers must be at least 1");
    }
    AccessPattern::parse("strided", a.stride, a.seed, profile.cache_line_bytes)?;
    let pattern = if a.kernel == Kernel::Copy {
        AccessPattern::Sequential
    } else {
        AccessPattern::parse(&a.pattern, a.stride, a.seed, profile.cache_line_bytes)?
    };
    if a.kernel == Kernel::Congrad {
        bail!("smp runs matvec, matmat or copy");
    }
    let r = reps_per_row(&a.timing, 1)?;
    let n = pool_elems_for_bytes(a.kernel, a.pool as usize);
    let out = run_smp_contention(a.kernel, pattern, a.workers, n, r[0], &cfg)?;
    let mut rows = vec![smp_row(&out.single, a.workers, "single", out.efficiency)];
    for (i, w) in out.workers.iter().enumerate() {
        rows.push(smp_row(w, a.workers, &format!("worker{i}"), out.efficiency));
    }
    eprintln!("efficiency with {} workers: {:.3}", a.workers, out.efficiency);

    let mut res = Resolved::new(&["smp"]);
    res.opt("workers", a.workers)
        .opt("kernel", a.kernel.name().to_ascii_lowercase())
        .opt("pattern", pattern.name().to_ascii_lowercase())
        .opt("stride", a.stride)
        .opt("pool", a.pool)
        .opt("seed", a.seed);
    resolve_timing(&mut res, &a.timing, &[out.single.reps]);
    resolve_host(&mut res, &profile);
    let mut samples = vec![out.single.clone()];
    samples.extend(out.workers.iter().cloned());
    Ok(Output {
        schema: &schema::SMP,
        rows,
        resolved: res,
        seeds: vec![a.seed],
        host: Some(with_samples(profile, samples)),
        plot: PlotSpec::Smp,
        title: format!("{} workers, {} {}", a.workers, a.kernel.name(), pattern.name()),
        notes: vec![("efficiency".into(), format!("{}", out.efficiency))],
        code: 0,
    })
}

pub fn inverter(a: &InverterArgs) -> Result<Output> {
    let profile = host_profile(&a.host)?;
    if let Some(&l) = a.sizes.iter().find(|&&l| l == 0 || l % 2 != 0) {
        bail!("lattice sizes must be even and positive, got {l}");
    }
    if a.sizes.windows(2).any(|w| w[0] >= w[1]) {
        bail!("lattice sizes must be strictly ascending");
    }
    if !(a.min_seconds >= 0.0) || a.trials == 0 {
        bail!("--min-seconds must be non-negative and --trials at least 1");
    }
    let site = if a.emulate_milc_site { LayoutPolicy::milc_emulation() } else { LayoutPolicy::site_major() };
    let layouts = match a.layouts {
        Layouts::Site => vec![site],
        Layouts::Field => vec![LayoutPolicy::field_major()],
        Layouts::Both => vec![site, LayoutPolicy::field_major()],
    };

    let mut rows = Vec::new();
    let mut samples = Vec::new();
    let mut notes = Vec::new();
    let mut code = 0;
    for &layout in &layouts {
        let mut bench = InverterBenchmark::new(layout, a.mass, a.tol);
        bench.max_iter = a.max_iter;
        bench.seed = a.seed;
        bench.timing = Timing { min_seconds: a.min_seconds, trials: a.trials };
        let mut curve = Vec::new();
        for &l in &a.sizes {
            let s = bench.run_size(l)?;
            if !s.report.converged {
                warn!(
                    "L={l} {}: no convergence in {} iterations (residual {:e})",
                    layout.label(),
                    a.max_iter,
                    s.report.final_relative_residual
                );
                code = 1;
            }
            info!("L={l} {}: {:.1} MFlop/s, {} iterations", layout.label(), s.report.mflops, s.report.iterations);
            curve.push((l, s.report.mflops));
            rows.push(s.csv_row());
            samples.push(s.perf_sample());
        }
        let label = layout.label();
        let cliff = rate_cliff(&curve, CLIFF_FRACTION);
        let exceeds = first_size_exceeding(layout.site_bytes(), &a.sizes, profile.l2_bytes);
        let show = |v: Option<usize>| v.map_or("none".to_string(), |l| l.to_string());
        eprintln!(
            "{label}: rate cliff at L={} (first size below {:.0}% of the best smaller size); working set first exceeds {} bytes at L={}",
            show(cliff),
            CLIFF_FRACTION * 100.0,
            profile.l2_bytes,
            show(exceeds)
        );
        notes.push((format!("crossover.{label}"), show(cliff)));
        notes.push((format!("cache_exceeded_at.{label}"), show(exceeds)));
    }

    let mut res = Resolved::new(&["inverter"]);
    res.opt("sizes", join(&a.sizes))
        .opt("layouts", a.layouts.name())
        .flag("emulate-milc-site", a.emulate_milc_site)
        .opt("mass", a.mass)
        .opt("tol", a.tol)
        .opt("max-iter", a.max_iter)
        .opt("seed", a.seed)
        .opt("min-seconds", a.min_seconds)
        .opt("trials", a.trials);
    resolve_host(&mut res, &profile);
    let ticks = a.sizes.iter().map(|&l| (l, working_set_bytes(layouts[0].site_bytes(), l))).collect();
    Ok(Output {
        schema: &schema::INVERTER,
        rows,
        resolved: res,
        seeds: vec![a.seed, a.seed.wrapping_add(1)],
        host: Some(with_samples(profile, samples)),
        plot: PlotSpec::Inverter { layouts: layouts.iter().map(LayoutPolicy::label).collect(), ticks },
        title: format!("CG inverter, mass {}, tol {}", a.mass, a.tol),
        notes,
        code,
    })
}

fn load_model(c: &ConfigArg, res: &mut Resolved) -> Result<ModelFile> {
    match &c.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            res.opt("config", path.display());
            Ok(ModelFile::parse(&text).with_context(|| format!("in {}", path.display()))?)
        }
        None => {
            res.note("config", "bundled reference");
            Ok(ModelFile::parse(REFERENCE_CONFIG)?)
        }
    }
}

fn model_output(schema: &'static Schema, rows: Vec<String>, res: Resolved, plot: PlotSpec, title: String) -> Output {
    Output { schema, rows, resolved: res, seeds: vec![], host: None, plot, title, notes: vec![], code: 0 }
}

pub fn model(m: &ModelArgs) -> Result<Output> {
    match &m.which {
        ModelCommand::Latency(a) => {
            let mut res = Resolved::new(&["model", "latency"]);
            let file = load_model(&a.config, &mut res)?;
            if !(a.step > 0.0) {
                bail!("--step must be positive");
            }
            let cfg = file.cluster()?.resized(a.nodes);
            cfg.validate()?;
            let n = (a.max_delay / a.step).floor() as usize;
            let delays: Vec<f64> = (0..=n).map(|i| i as f64 * a.step).collect();
            let pts = sweep_latency(&cfg, &delays, a.l)?;
            res.opt("max-delay", format!("{}us", a.max_delay)).opt("step", format!("{}us", a.step)).opt("nodes", a.nodes).opt("L", a.l);
            let rows = pts.iter().map(|p| p.csv_row()).collect();
            let title = format!("{} nodes, L={} sublattice", a.nodes, a.l);
            Ok(model_output(&schema::MODEL_LATENCY, rows, res, PlotSpec::Latency, title))
        }
        ModelCommand::Scaling(a) => {
            let mut res = Resolved::new(&["model", "scaling"]);
            let file = load_model(&a.config, &mut res)?;
            let mut cfg = file.cluster()?;
            if let Some(p) = a.procs_per_node {
                cfg.procs_per_node = p;
            }
            cfg.validate()?;
            let workload = match a.workload {
                WorkloadArg::Dslash => Workload::Dslash,
                WorkloadArg::Congrad => Workload::Congrad,
            };
            let mut rows = Vec::new();
            for &l in &a.l {
                for p in sweep_scaling(&cfg, &a.nodes, l, workload)? {
                    rows.push(p.csv_row());
                }
            }
            res.opt("L", join(&a.l))
                .opt("nodes", join(&a.nodes))
                .opt("workload", format!("{:?}", a.workload).to_ascii_lowercase())
                .opt("procs-per-node", cfg.procs_per_node);
            let title = format!("fixed-sublattice scaling, {} process(es) per node", cfg.procs_per_node);
            Ok(model_output(&schema::MODEL_SCALING, rows, res, PlotSpec::Scaling { ls: a.l.clone() }, title))
        }
        ModelCommand::Substitute(a) => {
            let mut res = Resolved::new(&["model", "substitute"]);
            let file = load_model(&a.config, &mut res)?;
            let base_profile = file.find_profile(&a.base)?.clone();
            let template = file.cluster()?;
            let base = ClusterConfig { nodes: vec![base_profile.clone(); a.nodes], ..template };
            base.validate()?;
            let candidates: Vec<_> = if a.profile.is_empty() {
                file.profiles.iter().filter(|p| p.label != base_profile.label).cloned().collect()
            } else {
                a.profile.iter().map(|k| file.find_profile(k).cloned()).collect::<std::result::Result<_, _>>()?
            };
            let mut rows = Vec::new();
            for &l in &a.l {
                for c in &candidates {
                    rows.push(evaluate_substitution(&base, c, l)?.csv_row());
                }
            }
            if !a.profile.is_empty() {
                res.opt("profile", candidates.iter().map(|p| p.label.as_str()).collect::<Vec<_>>().join(","));
            }
            res.opt("base", &base_profile.label).opt("nodes", a.nodes).opt("L", join(&a.l));
            let title = format!("one node substituted into {} x {}", a.nodes, base_profile.label);
            Ok(model_output(&schema::MODEL_SUBSTITUTE, rows, res, PlotSpec::Substitute, title))
        }
    }
}

/// Validate each file: 0 if all pass, 1 if any is invalid, 2 if any cannot be read.
pub fn schema_check(a: &SchemaCheckArgs) -> u8 {
    let mut code = 0;
    for f in &a.files {
        if let Err(e) = std::fs::metadata(f) {
            println!("{}: UNREADABLE: {e}", f.display());
            code = 2;
            continue;
        }
        match check_one(f) {
            Ok(msg) => println!("{}: ok ({msg})", f.display()),
            Err(e) => {
                code = code.max(1);
                println!("{}: INVALID: {e:#}", f.display());
            }
        }
    }
    code
}

fn check_one(f: &Path) -> Result<String> {
    if f.extension().is_some_and(|e| e == "toml") {
        let text = std::fs::read_to_string(f).with_context(|| format!("reading {}", f.display()))?;
        let m = ModelFile::parse(&text)?;
        m.cluster()?;
        return Ok(format!("model config, {} profiles", m.profiles.len()));
    }
    let t = schema::Table::read(f)?;
    Ok(format!("{}, {} rows", t.schema.id(), t.rows.len()))
}

/// `$QCDPERF_OUT/<name>.csv`, or `./<name>.csv`.
pub fn default_out(name: &str) -> PathBuf {
    let dir = std::env::var_os("QCDPERF_OUT").map(PathBuf::from).unwrap_or_else(|| PathBuf::from("."));
    dir.join(format!("{name}.csv"))
}
