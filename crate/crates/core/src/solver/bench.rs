//! Inverter throughput as a function of lattice size and layout.

use super::{congrad_with, FermionField, GaugeField, ParityRestriction, SolveReport, SolverOptions};
use crate::error::Result;
use crate::lattice::{LatticeGeometry, LayoutPolicy};
use crate::membench::{time_trials, working_set_bytes, Kernel, LatticeBenchmark, PerfSample, Timing};

/// One timed solve at one size.
#[derive(Clone, Debug, PartialEq)]
pub struct InverterSample {
    pub l: usize,
    pub layout: LayoutPolicy,
    pub mass: f64,
    pub tol: f64,
    pub report: SolveReport,
    pub working_set_bytes: u64,
    /// Elapsed seconds of every timed trial.
    pub trial_seconds: Vec<f64>,
    pub solves_per_trial: u64,
}

impl InverterSample {
    pub const CSV_HEADER: &'static str =
        "L,layout,mass,tol,iters,residual,flops,elapsed_sec,mflops,working_set_bytes,site_bytes,converged";

    pub fn csv_row(&self) -> String {
        let geom = LatticeGeometry::hypercubic(self.l).expect("validated size");
        format!(
            "{},{},{},{}",
            self.report.csv_row(&geom, &self.layout, self.mass, self.tol),
            self.working_set_bytes,
            self.layout.site_bytes(),
            self.report.converged
        )
    }

    pub fn perf_sample(&self) -> PerfSample {
        let r = &self.report;
        let mut s = PerfSample::new(
            Kernel::Congrad,
            None,
            self.working_set_bytes,
            self.solves_per_trial,
            r.elapsed_sec,
            r.flops,
            0,
            r.final_relative_residual.to_bits(),
        );
        s.mflops = r.mflops;
        s.trial_seconds = self.trial_seconds.clone();
        s
    }
}

/// CG on seeded random fields, runnable at any `L`.
#[derive(Clone, Debug)]
pub struct InverterBenchmark {
    pub layout: LayoutPolicy,
    pub mass: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
    pub timing: Timing,
    pub options: SolverOptions,
    /// Every run so far, in order.
    pub samples: Vec<InverterSample>,
}

impl InverterBenchmark {
    pub fn new(layout: LayoutPolicy, mass: f64, tol: f64) -> Self {
        InverterBenchmark {
            layout,
            mass,
            tol,
            max_iter: 1000,
            seed: 1,
            timing: Timing::default(),
            options: SolverOptions::default(),
            samples: Vec::new(),
        }
    }

    pub fn run_size(&mut self, l: usize) -> Result<InverterSample> {
        let geom = LatticeGeometry::hypercubic(l)?;
        let gauge = GaugeField::random(geom, self.layout, self.seed)?;
        let b = FermionField::random(geom, self.layout.tag, ParityRestriction::Even, self.seed.wrapping_add(1));
        let mut last = None;
        let mut first_err = None;
        let (solves, best, trials) = time_trials(self.timing, 1, |n| {
            for _ in 0..n {
                match congrad_with(&gauge, &b, self.mass, self.tol, self.max_iter, self.options) {
                    Ok(s) => last = Some(s.report),
                    Err(e) => {
                        first_err.get_or_insert(e);
                        return;
                    }
                }
            }
        });
        if let Some(e) = first_err {
            return Err(e);
        }
        let mut report = last.expect("at least one solve");
        report.elapsed_sec = best / solves as f64;
        report.mflops = report.flops.mflops(report.elapsed_sec);
        let sample = InverterSample {
            l,
            layout: self.layout,
            mass: self.mass,
            tol: self.tol,
            report,
            working_set_bytes: working_set_bytes(self.layout.site_bytes(), l),
            trial_seconds: trials.iter().map(|t| t / solves as f64).collect(),
            solves_per_trial: solves,
        };
        self.samples.push(sample.clone());
        Ok(sample)
    }
}

impl LatticeBenchmark for InverterBenchmark {
    fn site_bytes(&self) -> usize {
        self.layout.site_bytes()
    }

    fn run(&mut self, l: usize) -> Result<PerfSample> {
        Ok(self.run_size(l)?.perf_sample())
    }
}

/// Full-solve MFlop/s at each size.
pub fn benchmark_inverter(sizes: &[usize], layout: LayoutPolicy, mass: f64, tol: f64) -> Result<Vec<PerfSample>> {
    let mut bench = InverterBenchmark::new(layout, mass, tol);
    crate::membench::sweep_lattice_sizes(&mut bench, sizes)
}

