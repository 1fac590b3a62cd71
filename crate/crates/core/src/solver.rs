//! Naive staggered D-slash and the even-odd conjugate-gradient inverter.
//!
//! Conventions, fixed because the tests and the dense oracle rely on them:
//!
//! * `D chi(x) = ½ Σ_μ η_μ(x) [U_μ(x) chi(x+μ) − U_μ†(x−μ) chi(x−μ)]`
//! * `η_0 = 1`, `η_μ(x) = (−1)^(x_0 + … + x_{μ−1})`
//! * the inverter solves `(4m² − D_eo D_oe) x = b` on even sites
//!
//! Fields are single precision; every inner product and norm accumulates
//! in double precision per partition and is combined by [`global_sum`] in a
//! fixed order, so results do not depend on the storage layout.

use std::time::Instant;

use num_complex::Complex64;

use crate::error::{domain, Error, Result};
use crate::lattice::{
    read_payload, write_payload, FieldFileHeader, FieldKind, FieldStride, LatticeFields, LatticeGeometry,
    LayoutPolicy, LayoutTag, Parity, SiteRecord, NDIM,
};
use crate::su3::{
    self, random_su3, vec_dot_re, Complex32, FlopCount, Su3Matrix, Su3Vector, MAT_VEC_ADJ_FLOPS, MAT_VEC_FLOPS,
    VEC_ADD_FLOPS, VEC_AXPY_REAL_FLOPS, VEC_DOT_RE_FLOPS, VEC_SCALE_REAL_FLOPS,
};

mod bench;
pub mod oracle;

pub use bench::{benchmark_inverter, InverterBenchmark, InverterSample};
pub use oracle::{dense_oracle, dense_solve, DenseOperator};

/// Flops per output site of one D-slash application: eight hops, seven
/// vector adds or subtracts to combine them, one real rescale.
pub const DSLASH_FLOPS_PER_SITE: u64 =
    4 * MAT_VEC_FLOPS + 4 * MAT_VEC_ADJ_FLOPS + 7 * VEC_ADD_FLOPS + VEC_SCALE_REAL_FLOPS;

/// `4m²·p − t` per even site.
const NORMAL_COMBINE_FLOPS: u64 = VEC_SCALE_REAL_FLOPS + VEC_ADD_FLOPS;

/// Even-site normal operator application `A p`, per even site.
pub const NORMAL_OP_FLOPS_PER_SITE: u64 = 2 * DSLASH_FLOPS_PER_SITE + NORMAL_COMBINE_FLOPS;

/// One CG iteration per even site: `A p`, `⟨p,Ap⟩`, two axpys, `|r|²`, and
/// the search-direction update.
pub const CG_ITER_FLOPS_PER_SITE: u64 =
    NORMAL_OP_FLOPS_PER_SITE + VEC_DOT_RE_FLOPS + 2 * VEC_AXPY_REAL_FLOPS + VEC_DOT_RE_FLOPS + VEC_AXPY_REAL_FLOPS;

/// Recomputing `r = b − A x`, per even site.
pub const CG_REFRESH_FLOPS_PER_SITE: u64 = NORMAL_OP_FLOPS_PER_SITE + VEC_ADD_FLOPS;

/// Initial `|b|²`, per even site.
pub const CG_SETUP_FLOPS_PER_SITE: u64 = VEC_DOT_RE_FLOPS;

/// Global sums issued per CG iteration: `⟨p,Ap⟩`, `|r|²`, and the stopping test.
pub const GLOBAL_SUMS_PER_ITERATION: u64 = 3;

/// Default number of iterations between true-residual refreshes.
pub const DEFAULT_REFRESH_INTERVAL: usize = 50;

/// Exact flop count of a CG solve that ran `iterations` iterations.
pub fn congrad_flops(n_even: usize, iterations: usize, refresh_interval: usize) -> FlopCount {
    let refreshes = if refresh_interval == 0 { 0 } else { iterations / refresh_interval };
    let n = n_even as u64;
    FlopCount(
        n * (CG_SETUP_FLOPS_PER_SITE
            + iterations as u64 * CG_ITER_FLOPS_PER_SITE
            + refreshes as u64 * CG_REFRESH_FLOPS_PER_SITE),
    )
}

/// Fixed-order reduction of per-worker partial sums.
///
/// Partials are added strictly left to right; the same input order always
/// yields the same bits.
pub fn global_sum(partials: &[f64]) -> f64 {
    partials.iter().fold(0.0, |acc, &p| acc + p)
}

/// Staggered sign factors `η_μ(x)` for every site.
#[derive(Clone, Debug, PartialEq)]
pub struct StaggeredPhases {
    signs: Vec<u8>,
}

impl StaggeredPhases {
    pub fn new(geom: &LatticeGeometry) -> Self {
        let signs = (0..geom.volume())
            .map(|i| {
                let c = geom.coords(i);
                let mut bits = 0u8;
                let mut partial = 0;
                for mu in 0..NDIM {
                    if partial % 2 == 1 {
                        bits |= 1 << mu;
                    }
                    partial += c[mu];
                }
                bits
            })
            .collect();
        StaggeredPhases { signs }
    }

    /// `η_μ` at `site` as ±1.
    pub fn eta(&self, site: usize, mu: usize) -> f32 {
        if self.is_negative(site, mu) {
            -1.0
        } else {
            1.0
        }
    }

    #[inline(always)]
    fn is_negative(&self, site: usize, mu: usize) -> bool {
        self.signs[site] & (1 << mu) != 0
    }
}

/// Gauge links in one of the lattice layouts.
#[derive(Clone, Debug, PartialEq)]
pub struct GaugeField {
    fields: LatticeFields,
}

impl GaugeField {
    pub fn identity(geom: LatticeGeometry, layout: LayoutPolicy) -> Result<Self> {
        let fields = LatticeFields::from_fn(geom, layout, |_| SiteRecord {
            links: [Su3Matrix::identity(); NDIM],
            vector: Su3Vector::zero(),
        })?;
        Ok(GaugeField { fields })
    }

    /// Independent [`random_su3`] link per `(site, mu)`, keyed by linear
    /// index so the configuration does not depend on the layout.
    pub fn random(geom: LatticeGeometry, layout: LayoutPolicy, seed: u64) -> Result<Self> {
        let fields = LatticeFields::from_fn(geom, layout, |s| SiteRecord {
            links: std::array::from_fn(|mu| random_su3(link_seed(seed, s, mu))),
            vector: Su3Vector::zero(),
        })?;
        Ok(GaugeField { fields })
    }

    /// Wrap an existing field set after checking every link is unitary.
    pub fn from_fields(fields: LatticeFields) -> Result<Self> {
        for s in 0..fields.geometry().volume() {
            for mu in 0..NDIM {
                let dev = fields.link(s, mu).unitarity_deviation();
                if dev >= 1e-4 {
                    return domain(format!("link ({s}, {mu}) deviates from unitarity by {dev:e}"));
                }
            }
        }
        Ok(GaugeField { fields })
    }

    pub fn geometry(&self) -> &LatticeGeometry {
        self.fields.geometry()
    }

    pub fn layout(&self) -> LayoutPolicy {
        self.fields.layout()
    }

    pub fn fields(&self) -> &LatticeFields {
        &self.fields
    }

    pub fn into_fields(self) -> LatticeFields {
        self.fields
    }

    pub fn link(&self, site: usize, mu: usize) -> &Su3Matrix {
        self.fields.link(site, mu)
    }

    pub fn to_layout(&self, layout: LayoutPolicy) -> Result<GaugeField> {
        Ok(GaugeField { fields: self.fields.to_layout(layout)? })
    }
}

fn link_seed(seed: u64, site: usize, mu: usize) -> u64 {
    // splitmix64 finalizer over (seed, counter)
    let mut z = seed ^ ((site as u64) << 2 | mu as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Which sites a fermion field covers.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ParityRestriction {
    Full,
    Even,
    Odd,
}

impl ParityRestriction {
    fn of(p: Parity) -> Self {
        match p {
            Parity::Even => ParityRestriction::Even,
            Parity::Odd => ParityRestriction::Odd,
        }
    }
}

/// One color vector per covered site, stored in linear-index order.
#[derive(Clone, Debug, PartialEq)]
pub struct FermionField {
    geom: LatticeGeometry,
    layout: LayoutTag,
    restriction: ParityRestriction,
    data: Vec<Su3Vector>,
}

impl FermionField {
    pub fn zeros(geom: LatticeGeometry, layout: LayoutTag, restriction: ParityRestriction) -> Self {
        let n = match restriction {
            ParityRestriction::Full => geom.volume(),
            _ => geom.half_volume(),
        };
        FermionField { geom, layout, restriction, data: vec![Su3Vector::zero(); n] }
    }

    pub fn from_fn(
        geom: LatticeGeometry,
        layout: LayoutTag,
        restriction: ParityRestriction,
        mut f: impl FnMut(usize) -> Su3Vector,
    ) -> Self {
        let mut out = Self::zeros(geom, layout, restriction);
        let first = out.first_site();
        for (i, v) in out.data.iter_mut().enumerate() {
            *v = f(first + i);
        }
        out
    }

    /// Random components in `[-1, 1)` keyed by linear site index.
    pub fn random(geom: LatticeGeometry, layout: LayoutTag, restriction: ParityRestriction, seed: u64) -> Self {
        Self::from_fn(geom, layout, restriction, |s| Su3Vector::random(link_seed(seed ^ 0xF00D, s, 0)))
    }

    pub fn constant(geom: LatticeGeometry, layout: LayoutTag, restriction: ParityRestriction, v: Su3Vector) -> Self {
        Self::from_fn(geom, layout, restriction, |_| v)
    }

    pub fn geometry(&self) -> &LatticeGeometry {
        &self.geom
    }

    pub fn layout(&self) -> LayoutTag {
        self.layout
    }

    pub fn restriction(&self) -> ParityRestriction {
        self.restriction
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn as_slice(&self) -> &[Su3Vector] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [Su3Vector] {
        &mut self.data
    }

    /// Linear index of the first stored site.
    pub fn first_site(&self) -> usize {
        match self.restriction {
            ParityRestriction::Odd => self.geom.half_volume(),
            _ => 0,
        }
    }

    /// Vector at linear site index `site`.
    pub fn at(&self, site: usize) -> &Su3Vector {
        &self.data[site - self.first_site()]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.data.iter().map(Su3Vector::norm_sqr).sum()
    }

    pub fn write_to(&self, w: &mut impl std::io::Write) -> Result<()> {
        let kind = match self.restriction {
            ParityRestriction::Full => FieldKind::FermionFull,
            ParityRestriction::Even => FieldKind::FermionEven,
            ParityRestriction::Odd => FieldKind::FermionOdd,
        };
        FieldFileHeader { layout: self.layout, kind, padding_bytes: 0, dims: self.geom.dims() }.write_to(w)?;
        write_payload(w, bytemuck::cast_slice(&self.data))
    }

    pub fn read_from(r: &mut impl std::io::Read) -> Result<Self> {
        let h = FieldFileHeader::read_from(r)?;
        let restriction = match h.kind {
            FieldKind::FermionFull => ParityRestriction::Full,
            FieldKind::FermionEven => ParityRestriction::Even,
            FieldKind::FermionOdd => ParityRestriction::Odd,
            FieldKind::SiteRecords => return Err(Error::Format("expected a fermion field".into())),
        };
        let geom = LatticeGeometry::new(h.dims)?;
        let mut out = FermionField::zeros(geom, h.layout, restriction);
        let raw = read_payload(r, out.data.len() * 3)?;
        out.data.copy_from_slice(bytemuck::cast_slice(&raw));
        Ok(out)
    }
}

/// D-slash with its neighbour and phase tables prepared once.
pub struct StaggeredOperator<'a> {
    gauge: &'a GaugeField,
    phases: StaggeredPhases,
    neighbors: Vec<[u32; 2 * NDIM]>,
    strides: [FieldStride; NDIM],
}

impl<'a> StaggeredOperator<'a> {
    pub fn new(gauge: &'a GaugeField) -> Self {
        let geom = gauge.geometry();
        let strides = std::array::from_fn(|mu| gauge.fields.link_stride(mu));
        StaggeredOperator { gauge, phases: StaggeredPhases::new(geom), neighbors: geom.neighbor_table(), strides }
    }

    pub fn with_phases(gauge: &'a GaugeField, phases: StaggeredPhases) -> Self {
        let mut op = Self::new(gauge);
        op.phases = phases;
        op
    }

    pub fn geometry(&self) -> &LatticeGeometry {
        self.gauge.geometry()
    }

    /// `out = D chi` restricted to the parity opposite to `chi`'s.
    ///
    /// `input` holds vectors of parity `from`, indexed from the start of that
    /// parity class; `out` receives the other class. Returns the flops spent.
    pub fn apply_raw(&self, from: Parity, input: &[Su3Vector], out: &mut [Su3Vector]) -> FlopCount {
        let geom = self.gauge.geometry();
        let h = geom.half_volume();
        assert_eq!(input.len(), h);
        assert_eq!(out.len(), h);
        let in_base = geom.parity_range(from).start;
        let out_range = geom.parity_range(from.flip());
        let f = &self.gauge.fields;
        for (k, x) in out_range.enumerate() {
            let nb = &self.neighbors[x];
            let chi = |y: u32| &input[y as usize - in_base];
            let fwd0 = su3::mat_vec(f.link_at(self.strides[0], x), chi(nb[0]));
            let bwd0 = su3::mat_vec_adj(f.link_at(self.strides[0], nb[NDIM] as usize), chi(nb[NDIM]));
            let mut acc = fwd0.sub(&bwd0);
            for mu in 1..NDIM {
                let fwd = su3::mat_vec(f.link_at(self.strides[mu], x), chi(nb[mu]));
                let bwd = su3::mat_vec_adj(f.link_at(self.strides[mu], nb[NDIM + mu] as usize), chi(nb[NDIM + mu]));
                if self.phases.is_negative(x, mu) {
                    acc = acc.sub(&fwd).add(&bwd);
                } else {
                    acc = acc.add(&fwd).sub(&bwd);
                }
            }
            out[k] = acc.scale(0.5);
        }
        FlopCount::of(DSLASH_FLOPS_PER_SITE, h as u64)
    }

    /// Parity-restricted D-slash on whole fields.
    pub fn apply(&self, chi: &FermionField) -> Result<FermionField> {
        let from = match chi.restriction {
            ParityRestriction::Even => Parity::Even,
            ParityRestriction::Odd => Parity::Odd,
            ParityRestriction::Full => return domain("dslash input must be parity-restricted"),
        };
        check_compatible(self.gauge, chi)?;
        let mut out = FermionField::zeros(*chi.geometry(), chi.layout, ParityRestriction::of(from.flip()));
        self.apply_raw(from, &chi.data, &mut out.data);
        Ok(out)
    }
}

fn check_compatible(gauge: &GaugeField, chi: &FermionField) -> Result<()> {
    if chi.geometry() != gauge.geometry() {
        return domain(format!(
            "fermion lattice {:?} does not match gauge lattice {:?}",
            chi.geometry().dims(),
            gauge.geometry().dims()
        ));
    }
    if chi.layout != gauge.layout().tag {
        return domain(format!(
            "fermion layout {} does not match gauge layout {}",
            chi.layout.name(),
            gauge.layout().tag.name()
        ));
    }
    Ok(())
}

/// `D chi` for a parity-restricted `chi`; the result lives on the other parity.
pub fn dslash(gauge: &GaugeField, chi: &FermionField, phases: &StaggeredPhases) -> Result<FermionField> {
    if phases.signs.len() != gauge.geometry().volume() {
        return domain("phase table does not match the lattice volume");
    }
    StaggeredOperator::with_phases(gauge, phases.clone()).apply(chi)
}

/// Even-site normal operator `A = 4m² − D_eo D_oe` with scratch for the
/// intermediate odd field.
pub struct NormalOperator<'a> {
    op: StaggeredOperator<'a>,
    four_m2: f32,
    odd: Vec<Su3Vector>,
}

impl<'a> NormalOperator<'a> {
    pub fn new(gauge: &'a GaugeField, mass: f64) -> Self {
        let h = gauge.geometry().half_volume();
        NormalOperator { op: StaggeredOperator::new(gauge), four_m2: (4.0 * mass * mass) as f32, odd: vec![Su3Vector::zero(); h] }
    }

    pub fn half_volume(&self) -> usize {
        self.odd.len()
    }

    /// `out = A p` on even sites.
    pub fn apply(&mut self, p: &[Su3Vector], out: &mut [Su3Vector]) -> FlopCount {
        let mut flops = self.op.apply_raw(Parity::Even, p, &mut self.odd);
        flops += self.op.apply_raw(Parity::Odd, &self.odd, out);
        for (o, pi) in out.iter_mut().zip(p) {
            *o = pi.scale(self.four_m2).sub(o);
        }
        flops + FlopCount::of(NORMAL_COMBINE_FLOPS, p.len() as u64)
    }
}

/// Solver knobs beyond the mathematical inputs.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverOptions {
    /// Number of reduction partitions (simulated workers) for inner products.
    pub partitions: usize,
    /// Recompute `r = b − A x` every this many iterations; 0 disables.
    pub refresh_interval: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { partitions: 1, refresh_interval: DEFAULT_REFRESH_INTERVAL }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveReport {
    pub iterations: usize,
    pub final_relative_residual: f64,
    pub flops: FlopCount,
    pub elapsed_sec: f64,
    pub mflops: f64,
    pub converged: bool,
    pub global_sums: u64,
    /// `‖r‖/‖b‖` after every iteration, from the recursively updated residual.
    pub residual_history: Vec<f64>,
}

impl SolveReport {
    pub const CSV_HEADER: &'static str = "L,layout,mass,tol,iters,residual,flops,elapsed_sec,mflops";

    pub fn csv_row(&self, geom: &LatticeGeometry, layout: &LayoutPolicy, mass: f64, tol: f64) -> String {
        format!(
            "{},{},{},{},{},{:e},{},{:.6},{:.3}",
            lattice_label(geom),
            layout.label(),
            mass,
            tol,
            self.iterations,
            self.final_relative_residual,
            self.flops.get(),
            self.elapsed_sec,
            self.mflops
        )
    }
}

/// `L` for hypercubic lattices, `nx x ny x nz x nt` otherwise.
pub fn lattice_label(geom: &LatticeGeometry) -> String {
    let d = geom.dims();
    if d.iter().all(|&x| x == d[0]) {
        d[0].to_string()
    } else {
        format!("{}x{}x{}x{}", d[0], d[1], d[2], d[3])
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Solution {
    /// Converged solution, or the lowest-residual iterate seen.
    pub x: FermionField,
    pub report: SolveReport,
}

fn partition_bounds(n: usize, parts: usize) -> impl Iterator<Item = std::ops::Range<usize>> {
    let parts = parts.clamp(1, n.max(1));
    (0..parts).map(move |k| (k * n / parts)..((k + 1) * n / parts))
}

fn dot_partials(a: &[Su3Vector], b: &[Su3Vector], parts: usize, out: &mut Vec<f64>) {
    out.clear();
    for r in partition_bounds(a.len(), parts) {
        let mut acc = 0.0f64;
        for i in r {
            acc += vec_dot_re(&a[i], &b[i]);
        }
        out.push(acc);
    }
}

/// Conjugate gradient for `(4m² − D_eo D_oe) x = b` on even sites.
pub fn congrad(gauge: &GaugeField, b: &FermionField, mass: f64, tol: f64, max_iter: usize) -> Result<Solution> {
    congrad_with(gauge, b, mass, tol, max_iter, SolverOptions::default())
}

pub fn congrad_with(
    gauge: &GaugeField,
    b: &FermionField,
    mass: f64,
    tol: f64,
    max_iter: usize,
    opts: SolverOptions,
) -> Result<Solution> {
    if !(tol > 0.0) {
        return domain(format!("tolerance must be positive, got {tol}"));
    }
    if !(mass > 0.0) {
        return domain(format!("mass must be positive, got {mass}"));
    }
    if b.restriction != ParityRestriction::Even {
        return domain("right-hand side must be an even-parity field");
    }
    check_compatible(gauge, b)?;

    let start = Instant::now();
    let geom = *gauge.geometry();
    let n = geom.half_volume();
    let parts = opts.partitions.max(1);
    let mut a = NormalOperator::new(gauge, mass);

    let mut x = FermionField::zeros(geom, b.layout, ParityRestriction::Even);
    let mut best = x.clone();
    let mut r = b.data.clone();
    let mut p = r.clone();
    let mut ap = vec![Su3Vector::zero(); n];
    let mut partials = Vec::with_capacity(parts);

    let mut flops = FlopCount::of(CG_SETUP_FLOPS_PER_SITE, n as u64);
    let mut sums = 0u64;
    dot_partials(&r, &r, parts, &mut partials);
    let bb = global_sum(&partials);
    sums += 1;

    let finish = |x: FermionField, iterations, rel, flops: FlopCount, sums, converged, history| {
        let elapsed = start.elapsed().as_secs_f64();
        Solution {
            x,
            report: SolveReport {
                iterations,
                final_relative_residual: rel,
                flops,
                elapsed_sec: elapsed,
                mflops: flops.mflops(elapsed),
                converged,
                global_sums: sums,
                residual_history: history,
            },
        }
    };

    if bb == 0.0 {
        return Ok(finish(x, 0, 0.0, flops, sums, true, Vec::new()));
    }

    let mut rr = bb;
    let mut best_rr = rr;
    let mut history = Vec::new();
    let stop_rr = tol * tol * bb;

    for k in 1..=max_iter {
        flops += a.apply(&p, &mut ap);

        dot_partials(&p, &ap, parts, &mut partials);
        let pap = global_sum(&partials);
        sums += 1;
        flops += FlopCount::of(VEC_DOT_RE_FLOPS, n as u64);
        if !(pap > 0.0) {
            return Err(Error::Domain(format!("operator not positive-definite on search direction (pAp = {pap:e})")));
        }
        let alpha = (rr / pap) as f32;

        for i in 0..n {
            x.data[i] = su3::vec_axpy_real(alpha, &p[i], &x.data[i]);
            r[i] = su3::vec_axpy_real(-alpha, &ap[i], &r[i]);
        }
        flops += FlopCount::of(2 * VEC_AXPY_REAL_FLOPS, n as u64);

        if opts.refresh_interval > 0 && k % opts.refresh_interval == 0 {
            flops += a.apply(&x.data, &mut ap);
            for i in 0..n {
                r[i] = b.data[i].sub(&ap[i]);
            }
            flops += FlopCount::of(VEC_ADD_FLOPS, n as u64);
        }

        dot_partials(&r, &r, parts, &mut partials);
        let rr_new = global_sum(&partials);
        sums += 1;
        flops += FlopCount::of(VEC_DOT_RE_FLOPS, n as u64);

        // stopping decision: its own collective in a distributed run
        let stop_metric = global_sum(&partials);
        sums += 1;

        history.push((rr_new / bb).sqrt());
        if rr_new < best_rr {
            best_rr = rr_new;
            best.data.copy_from_slice(&x.data);
        }

        let beta = (rr_new / rr) as f32;
        rr = rr_new;
        if stop_metric <= stop_rr {
            flops += FlopCount::of(VEC_AXPY_REAL_FLOPS, n as u64);
            return Ok(finish(x, k, (rr / bb).sqrt(), flops, sums, true, history));
        }
        for i in 0..n {
            p[i] = su3::vec_axpy_real(beta, &p[i], &r[i]);
        }
        flops += FlopCount::of(VEC_AXPY_REAL_FLOPS, n as u64);
    }

    Ok(finish(best, max_iter, (best_rr / bb).sqrt(), flops, sums, false, history))
}

/// `‖A x − b‖ / ‖b‖` recomputed from the operator, not from the recursion.
pub fn true_relative_residual(gauge: &GaugeField, x: &FermionField, b: &FermionField, mass: f64) -> f64 {
    let mut a = NormalOperator::new(gauge, mass);
    let mut ax = vec![Su3Vector::zero(); x.len()];
    a.apply(&x.data, &mut ax);
    let mut num = 0.0f64;
    for (axi, bi) in ax.iter().zip(&b.data) {
        for c in 0..3 {
            let d = Complex64::new(axi.c[c].re as f64 - bi.c[c].re as f64, axi.c[c].im as f64 - bi.c[c].im as f64);
            num += d.norm_sqr();
        }
    }
    (num / b.norm_sqr()).sqrt()
}

pub(crate) fn to_c64(z: Complex32) -> Complex64 {
    Complex64::new(z.re as f64, z.im as f64)
}

pub(crate) fn field_to_dvec(f: &FermionField) -> nalgebra::DVector<Complex64> {
    nalgebra::DVector::from_iterator(f.len() * 3, f.data.iter().flat_map(|v| v.c.iter().map(|&z| to_c64(z))))
}

#[cfg(test)]
mod tests;
