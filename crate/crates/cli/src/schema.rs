//! Versioned CSV schemas for every command's output.
//!
//! Each file starts with `# qcdperf-schema: <name>/<version>`, then the
//! header line, then rows.

use std::path::Path;

use anyhow::{bail, Context, Result};
use qcdperf_core::model::{LatencyPoint, ScalingPoint, SubstitutionPoint};
use qcdperf_core::solver::InverterSample;
use qcdperf_core::PerfSample;

pub const SCHEMA_PREFIX: &str = "# qcdperf-schema: ";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Col {
    Int,
    Float,
    Text,
    Bool,
    Hex,
}

#[derive(Debug, PartialEq, Eq)]
pub struct Schema {
    pub name: &'static str,
    pub version: u32,
    pub header: &'static str,
    pub types: &'static [Col],
    /// Columns that must reproduce exactly on replay.
    pub deterministic: &'static [&'static str],
}

use Col::*;

const PERF_TYPES: &[Col] = &[Text, Text, Text, Int, Int, Float, Int, Int, Float, Float, Hex];
const PERF_DET: &[&str] = &["kernel", "pattern", "pool_bytes", "reps", "flops", "bytes_moved", "checksum"];

pub const QCDSTREAM: Schema =
    Schema { name: "qcdstream", version: 1, header: PerfSample::CSV_HEADER, types: PERF_TYPES, deterministic: PERF_DET };

pub const STREAM: Schema =
    Schema { name: "stream", version: 1, header: PerfSample::CSV_HEADER, types: PERF_TYPES, deterministic: PERF_DET };

pub const SMP_HEADER: &str = "kernel,pattern,pool_bytes,workers,role,reps,elapsed_sec,mflops,mbps,checksum,efficiency";

pub const SMP: Schema = Schema {
    name: "smp",
    version: 1,
    header: SMP_HEADER,
    types: &[Text, Text, Int, Int, Text, Int, Float, Float, Float, Hex, Float],
    deterministic: &["kernel", "pattern", "pool_bytes", "workers", "role", "reps", "checksum"],
};

pub const INVERTER: Schema = Schema {
    name: "inverter",
    version: 1,
    header: InverterSample::CSV_HEADER,
    types: &[Int, Text, Float, Float, Int, Float, Int, Float, Float, Int, Int, Bool],
    deterministic: &["L", "layout", "mass", "tol", "iters", "residual", "flops", "working_set_bytes", "site_bytes", "converged"],
};

pub const MODEL_LATENCY: Schema = Schema {
    name: "model-latency",
    version: 1,
    header: LatencyPoint::CSV_HEADER,
    types: &[Float, Int, Int, Int, Float, Float, Float, Float],
    deterministic: &[
        "delay_us",
        "nprocs",
        "L",
        "comm_dims",
        "dslash_us",
        "congrad_us",
        "dslash_mflops_per_node",
        "congrad_mflops_per_node",
    ],
};

pub const MODEL_SCALING: Schema = Schema {
    name: "model-scaling",
    version: 1,
    header: ScalingPoint::CSV_HEADER,
    types: &[Int, Int, Int, Float, Float, Float, Float, Float],
    deterministic: &["nprocs", "L", "comm_dims", "compute_us", "comm_us", "allreduce_us", "total_us", "mflops_per_node"],
};

pub const MODEL_SUBSTITUTE: Schema = Schema {
    name: "model-substitute",
    version: 1,
    header: SubstitutionPoint::CSV_HEADER,
    types: &[Text, Int, Int, Float, Float, Float, Float, Float, Float],
    deterministic: &[
        "profile",
        "nprocs",
        "L",
        "pci_read",
        "pci_write",
        "effective_mbps",
        "cluster_mflops",
        "homogeneous_mflops",
        "degradation",
    ],
};

pub const ALL: [&Schema; 7] = [&QCDSTREAM, &STREAM, &SMP, &INVERTER, &MODEL_LATENCY, &MODEL_SCALING, &MODEL_SUBSTITUTE];

impl Schema {
    pub fn id(&self) -> String {
        format!("{}/{}", self.name, self.version)
    }

    pub fn columns(&self) -> Vec<&'static str> {
        self.header.split(',').collect()
    }

    pub fn render(&self, rows: &[String]) -> String {
        let mut s = format!("{SCHEMA_PREFIX}{}\n{}\n", self.id(), self.header);
        for r in rows {
            s.push_str(r);
            s.push('\n');
        }
        s
    }

    pub fn by_id(id: &str) -> Result<&'static Schema> {
        ALL.into_iter().find(|s| s.id() == id).with_context(|| {
            let known: Vec<_> = ALL.iter().map(|s| s.id()).collect();
            format!("unknown schema {id:?} (known: {})", known.join(", "))
        })
    }

    fn check_cell(&self, col: usize, cell: &str) -> Result<()> {
        let ok = match self.types[col] {
            Int => cell.parse::<u64>().is_ok(),
            Float => cell.parse::<f64>().is_ok(),
            Text => !cell.is_empty(),
            Bool => cell == "true" || cell == "false",
            Hex => !cell.is_empty() && u64::from_str_radix(cell, 16).is_ok(),
        };
        if !ok {
            bail!("column {:?} expects {:?}, got {cell:?}", self.columns()[col], self.types[col]);
        }
        Ok(())
    }
}

/// A parsed output file.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub schema: &'static Schema,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn parse(text: &str) -> Result<Table> {
        let mut lines = text.lines();
        let first = lines.next().context("file is empty")?;
        let id = first.strip_prefix(SCHEMA_PREFIX).with_context(|| format!("first line must start with {SCHEMA_PREFIX:?}"))?;
        let schema = Schema::by_id(id.trim())?;
        let header = lines.next().context("missing header line")?;
        if header != schema.header {
            bail!("header does not match {}: expected {:?}, got {header:?}", schema.id(), schema.header);
        }
        let ncol = schema.types.len();
        let mut rows = Vec::new();
        for (i, line) in lines.enumerate() {
            if line.is_empty() {
                continue;
            }
            let cells: Vec<String> = line.split(',').map(str::to_string).collect();
            if cells.len() != ncol {
                bail!("row {}: expected {ncol} columns, got {}", i + 1, cells.len());
            }
            for (c, cell) in cells.iter().enumerate() {
                schema.check_cell(c, cell).with_context(|| format!("row {}", i + 1))?;
            }
            rows.push(cells);
        }
        Ok(Table { schema, rows })
    }

    pub fn read(path: &Path) -> Result<Table> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Table::parse(&text).with_context(|| format!("{} fails schema check", path.display()))
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.schema.columns().iter().position(|&c| c == name)
    }

    /// The deterministic cells of every row, in order.
    pub fn deterministic_cells(&self) -> Vec<Vec<&str>> {
        let idx: Vec<usize> = self.schema.deterministic.iter().map(|c| self.column(c).expect("schema lists its own columns")).collect();
        self.rows.iter().map(|r| idx.iter().map(|&i| r[i].as_str()).collect()).collect()
    }

    /// Differences in deterministic columns against `other`, as readable lines.
    pub fn deterministic_diff(&self, other: &Table) -> Vec<String> {
        if self.schema != other.schema {
            return vec![format!("schema {} vs {}", self.schema.id(), other.schema.id())];
        }
        let (a, b) = (self.deterministic_cells(), other.deterministic_cells());
        let mut out = Vec::new();
        if a.len() != b.len() {
            out.push(format!("{} rows vs {} rows", a.len(), b.len()));
        }
        for (i, (ra, rb)) in a.iter().zip(&b).enumerate() {
            for (c, (x, y)) in ra.iter().zip(rb).enumerate() {
                if x != y {
                    out.push(format!("row {} column {}: {x} vs {y}", i + 1, self.schema.deterministic[c]));
                }
            }
        }
        out
    }
}
