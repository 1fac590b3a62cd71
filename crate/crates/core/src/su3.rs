//! Single-precision SU(3) kernels.
//!
//! Flop accounting follows the usual lattice convention: a complex multiply
//! is 6 flops and a complex add is 2. Every kernel has a fixed per-call cost
//! exposed as a constant so benchmark loops can report exact counts instead
//! of inferring them from timings.

use std::iter::Sum;
use std::ops::{Add, AddAssign, Mul};

use bytemuck::{Pod, Zeroable};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use num_complex::Complex32;

pub mod fast;

/// Flops for one complex multiply.
pub const COMPLEX_MUL_FLOPS: u64 = 6;
/// Flops for one complex add or subtract.
pub const COMPLEX_ADD_FLOPS: u64 = 2;

/// `m·v`: 9 complex multiplies and 6 complex adds.
pub const MAT_VEC_FLOPS: u64 = 9 * COMPLEX_MUL_FLOPS + 6 * COMPLEX_ADD_FLOPS;
/// `m†·v`, same operation count as [`MAT_VEC_FLOPS`].
pub const MAT_VEC_ADJ_FLOPS: u64 = MAT_VEC_FLOPS;
/// `a·b`: 27 complex multiplies and 18 complex adds.
pub const MAT_MAT_FLOPS: u64 = 27 * COMPLEX_MUL_FLOPS + 18 * COMPLEX_ADD_FLOPS;
/// `alpha·x + y` with complex `alpha`.
pub const VEC_AXPY_FLOPS: u64 = 3 * COMPLEX_MUL_FLOPS + 3 * COMPLEX_ADD_FLOPS;
/// `alpha·x + y` with real `alpha` (two real multiplies per component).
pub const VEC_AXPY_REAL_FLOPS: u64 = 3 * (2 + COMPLEX_ADD_FLOPS);
/// Component-wise sum or difference of two vectors.
pub const VEC_ADD_FLOPS: u64 = 3 * COMPLEX_ADD_FLOPS;
/// Multiplying a vector by a real scalar.
pub const VEC_SCALE_REAL_FLOPS: u64 = 6;
/// `Re⟨x, y⟩` or `|x|²` accumulated into a running sum.
pub const VEC_DOT_RE_FLOPS: u64 = 12;

const ZERO: Complex32 = Complex32::new(0.0, 0.0);
const ONE: Complex32 = Complex32::new(1.0, 0.0);

/// Counted floating point operations (1 flop = one real add or multiply).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct FlopCount(pub u64);

impl FlopCount {
    pub const ZERO: FlopCount = FlopCount(0);

    pub fn get(self) -> u64 {
        self.0
    }

    /// `n` repetitions of a kernel costing `per_call` flops.
    pub fn of(per_call: u64, n: u64) -> Self {
        FlopCount(per_call * n)
    }

    /// Millions of flops per second over `seconds`.
    pub fn mflops(self, seconds: f64) -> f64 {
        if seconds > 0.0 {
            self.0 as f64 / (seconds * 1e6)
        } else {
            0.0
        }
    }
}

impl Add for FlopCount {
    type Output = FlopCount;
    fn add(self, rhs: FlopCount) -> FlopCount {
        FlopCount(self.0 + rhs.0)
    }
}

impl AddAssign for FlopCount {
    fn add_assign(&mut self, rhs: FlopCount) {
        self.0 += rhs.0;
    }
}

impl Mul<u64> for FlopCount {
    type Output = FlopCount;
    fn mul(self, rhs: u64) -> FlopCount {
        FlopCount(self.0 * rhs)
    }
}

impl Sum for FlopCount {
    fn sum<I: Iterator<Item = FlopCount>>(iter: I) -> FlopCount {
        iter.fold(FlopCount::ZERO, Add::add)
    }
}

/// Color 3-vector, 24 bytes.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq, Pod, Zeroable)]
pub struct Su3Vector {
    pub c: [Complex32; 3],
}

/// 3×3 complex matrix stored row-major, 72 bytes.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Pod, Zeroable)]
pub struct Su3Matrix {
    pub e: [[Complex32; 3]; 3],
}

impl Default for Su3Matrix {
    fn default() -> Self {
        Su3Matrix::zero()
    }
}

impl Su3Vector {
    pub const fn new(c: [Complex32; 3]) -> Self {
        Su3Vector { c }
    }

    pub const fn zero() -> Self {
        Su3Vector { c: [ZERO; 3] }
    }

    pub fn from_real(v: [f32; 3]) -> Self {
        Su3Vector { c: v.map(|x| Complex32::new(x, 0.0)) }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.c.iter().map(|z| z.norm_sqr() as f64).sum()
    }

    /// Uniformly distributed components in `[-1, 1)`, deterministic per seed.
    pub fn random(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut c = [ZERO; 3];
        for z in &mut c {
            *z = Complex32::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        }
        Su3Vector { c }
    }

    #[inline]
    pub fn add(&self, o: &Su3Vector) -> Su3Vector {
        Su3Vector { c: [self.c[0] + o.c[0], self.c[1] + o.c[1], self.c[2] + o.c[2]] }
    }

    #[inline]
    pub fn sub(&self, o: &Su3Vector) -> Su3Vector {
        Su3Vector { c: [self.c[0] - o.c[0], self.c[1] - o.c[1], self.c[2] - o.c[2]] }
    }

    #[inline]
    pub fn scale(&self, s: f32) -> Su3Vector {
        Su3Vector { c: [self.c[0] * s, self.c[1] * s, self.c[2] * s] }
    }
}

impl Su3Matrix {
    pub const fn zero() -> Self {
        Su3Matrix { e: [[ZERO; 3]; 3] }
    }

    pub const fn identity() -> Self {
        Su3Matrix { e: [[ONE, ZERO, ZERO], [ZERO, ONE, ZERO], [ZERO, ZERO, ONE]] }
    }

    pub fn diagonal(d: Complex32) -> Self {
        let mut m = Su3Matrix::zero();
        for i in 0..3 {
            m.e[i][i] = d;
        }
        m
    }

    pub fn adjoint(&self) -> Su3Matrix {
        let mut out = Su3Matrix::zero();
        for i in 0..3 {
            for j in 0..3 {
                out.e[i][j] = self.e[j][i].conj();
            }
        }
        out
    }

    /// `max |(M†M − I)_ij|`, accumulated in double precision.
    pub fn unitarity_deviation(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..3 {
            for j in 0..3 {
                let (mut re, mut im) = (0.0f64, 0.0f64);
                for k in 0..3 {
                    let a = self.e[k][i].conj();
                    let b = self.e[k][j];
                    re += a.re as f64 * b.re as f64 - a.im as f64 * b.im as f64;
                    im += a.re as f64 * b.im as f64 + a.im as f64 * b.re as f64;
                }
                if i == j {
                    re -= 1.0;
                }
                worst = worst.max((re * re + im * im).sqrt());
            }
        }
        worst
    }

    /// Determinant in double precision as `(re, im)`.
    pub fn determinant(&self) -> (f64, f64) {
        let m = |i: usize, j: usize| {
            let z = self.e[i][j];
            num_complex::Complex64::new(z.re as f64, z.im as f64)
        };
        let det = m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1))
            - m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0))
            + m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0));
        (det.re, det.im)
    }
}

/// `m·v`. Costs [`MAT_VEC_FLOPS`].
#[inline]
pub fn mat_vec(m: &Su3Matrix, v: &Su3Vector) -> Su3Vector {
    let mut out = [ZERO; 3];
    for (i, o) in out.iter_mut().enumerate() {
        let r = &m.e[i];
        *o = r[0] * v.c[0] + r[1] * v.c[1] + r[2] * v.c[2];
    }
    Su3Vector { c: out }
}

/// `m†·v` without forming the adjoint. Costs [`MAT_VEC_ADJ_FLOPS`].
#[inline]
pub fn mat_vec_adj(m: &Su3Matrix, v: &Su3Vector) -> Su3Vector {
    let mut out = [ZERO; 3];
    for (i, o) in out.iter_mut().enumerate() {
        *o = m.e[0][i].conj() * v.c[0] + m.e[1][i].conj() * v.c[1] + m.e[2][i].conj() * v.c[2];
    }
    Su3Vector { c: out }
}

/// `a·b`. Costs [`MAT_MAT_FLOPS`].
#[inline]
pub fn mat_mat(a: &Su3Matrix, b: &Su3Matrix) -> Su3Matrix {
    let mut out = Su3Matrix::zero();
    for i in 0..3 {
        for j in 0..3 {
            out.e[i][j] = a.e[i][0] * b.e[0][j] + a.e[i][1] * b.e[1][j] + a.e[i][2] * b.e[2][j];
        }
    }
    out
}

/// `alpha·x + y`. Costs [`VEC_AXPY_FLOPS`].
#[inline]
pub fn vec_axpy(alpha: Complex32, x: &Su3Vector, y: &Su3Vector) -> Su3Vector {
    Su3Vector { c: [alpha * x.c[0] + y.c[0], alpha * x.c[1] + y.c[1], alpha * x.c[2] + y.c[2]] }
}

/// `alpha·x + y` for real `alpha`. Costs [`VEC_AXPY_REAL_FLOPS`].
#[inline]
pub fn vec_axpy_real(alpha: f32, x: &Su3Vector, y: &Su3Vector) -> Su3Vector {
    Su3Vector { c: [x.c[0] * alpha + y.c[0], x.c[1] * alpha + y.c[1], x.c[2] * alpha + y.c[2]] }
}

/// `Re⟨x, y⟩ = Σ Re(conj(x_i)·y_i)` in double precision.
#[inline]
pub fn vec_dot_re(x: &Su3Vector, y: &Su3Vector) -> f64 {
    let mut acc = 0.0f64;
    for i in 0..3 {
        acc += x.c[i].re as f64 * y.c[i].re as f64 + x.c[i].im as f64 * y.c[i].im as f64;
    }
    acc
}

/// Deterministic SU(3) matrix for `seed`.
///
/// Uniform complex entries, Gram–Schmidt on the first two rows, third row
/// set to the conjugate cross product so the determinant is one. The
/// orthonormalization runs in double precision and rounds once at the end.
pub fn random_su3(seed: u64) -> Su3Matrix {
    use num_complex::Complex64;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draw_row = |rng: &mut ChaCha8Rng| -> [Complex64; 3] {
        std::array::from_fn(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
    };
    let norm = |r: &[Complex64; 3]| r.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();

    let mut r0 = draw_row(&mut rng);
    let mut n0 = norm(&r0);
    while n0 < 1e-6 {
        r0 = draw_row(&mut rng);
        n0 = norm(&r0);
    }
    r0.iter_mut().for_each(|z| *z /= n0);

    let mut r1;
    loop {
        r1 = draw_row(&mut rng);
        let proj: Complex64 = (0..3).map(|k| r0[k].conj() * r1[k]).sum();
        for k in 0..3 {
            r1[k] -= proj * r0[k];
        }
        let n1 = norm(&r1);
        if n1 > 1e-6 {
            r1.iter_mut().for_each(|z| *z /= n1);
            break;
        }
    }

    let r2 = [
        (r0[1] * r1[2] - r0[2] * r1[1]).conj(),
        (r0[2] * r1[0] - r0[0] * r1[2]).conj(),
        (r0[0] * r1[1] - r0[1] * r1[0]).conj(),
    ];

    let to32 = |z: Complex64| Complex32::new(z.re as f32, z.im as f32);
    Su3Matrix { e: [r0.map(to32), r1.map(to32), r2.map(to32)] }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f32, im: f32) -> Complex32 {
        Complex32::new(re, im)
    }

    fn rel_err(a: &Su3Vector, b: &Su3Vector) -> f64 {
        a.sub(b).norm_sqr().sqrt() / b.norm_sqr().sqrt().max(1e-30)
    }

    #[test]
    fn storage_sizes() {
        assert_eq!(std::mem::size_of::<Complex32>(), 8);
        assert_eq!(std::mem::size_of::<Su3Vector>(), 24);
        assert_eq!(std::mem::size_of::<Su3Matrix>(), 72);
    }

    #[test]
    fn per_call_constants() {
        assert_eq!(MAT_VEC_FLOPS, 66);
        assert_eq!(MAT_VEC_ADJ_FLOPS, 66);
        assert_eq!(MAT_MAT_FLOPS, 198);
        assert_eq!(VEC_AXPY_FLOPS, 24);
        assert_eq!(VEC_AXPY_REAL_FLOPS, 12);
    }

    #[test]
    fn identity_mat_vec() {
        let v = Su3Vector::from_real([1.0, 2.0, 3.0]);
        assert_eq!(mat_vec(&Su3Matrix::identity(), &v), v);
        assert_eq!(mat_vec_adj(&Su3Matrix::identity(), &v), v);
    }

    #[test]
    fn diagonal_i_times_ones() {
        let m = Su3Matrix::diagonal(c(0.0, 1.0));
        let v = Su3Vector::from_real([1.0, 1.0, 1.0]);
        assert_eq!(mat_vec(&m, &v), Su3Vector::new([c(0.0, 1.0); 3]));
    }

    #[test]
    fn identity_mat_mat() {
        let b = random_su3(7);
        assert_eq!(mat_mat(&Su3Matrix::identity(), &b), b);
    }

    #[test]
    fn axpy_edges() {
        let x = Su3Vector::random(1);
        let y = Su3Vector::random(2);
        assert_eq!(vec_axpy(c(0.0, 0.0), &x, &y), y);
        assert_eq!(vec_axpy(c(1.0, 0.0), &x, &Su3Vector::zero()), x);
    }

    #[test]
    fn random_su3_seed_42() {
        let m = random_su3(42);
        assert!(m.unitarity_deviation() < 1e-5, "{}", m.unitarity_deviation());
        let (re, im) = m.determinant();
        assert!((re - 1.0).abs() < 1e-4 && im.abs() < 1e-4);
        assert_eq!(m, random_su3(42));
        assert_ne!(m, random_su3(43));
    }

    #[test]
    fn adjoint_undoes_mat_vec() {
        for seed in 0..32 {
            let m = random_su3(seed);
            let v = Su3Vector::random(seed + 1000);
            let back = mat_vec_adj(&m, &mat_vec(&m, &v));
            assert!(rel_err(&back, &v) < 1e-5);
            assert_eq!(mat_vec_adj(&m, &v), mat_vec(&m.adjoint(), &v));
        }
    }

    #[test]
    fn product_stays_unitary() {
        let p = mat_mat(&random_su3(1), &random_su3(2));
        assert!(p.unitarity_deviation() < 1e-4);
    }
}
