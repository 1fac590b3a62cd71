//! Vectorized kernels.
//!
//! Same operations as the scalar versions in the parent module. On x86_64
//! they use SSE2 on packed complex pairs; elsewhere an unrolled version over
//! flat `f32` lanes. The scalar kernels remain the reference; these agree
//! with them to single-precision rounding.

use super::{Su3Matrix, Su3Vector};

#[cfg_attr(all(target_arch = "x86_64", not(test)), allow(dead_code))]
#[inline(always)]
fn lanes_m(m: &Su3Matrix) -> &[f32; 18] {
    bytemuck::cast_ref(m)
}

#[cfg_attr(all(target_arch = "x86_64", not(test)), allow(dead_code))]
#[inline(always)]
fn lanes_v(v: &Su3Vector) -> &[f32; 6] {
    bytemuck::cast_ref(v)
}

/// `m·v`.
#[cfg_attr(all(target_arch = "x86_64", not(test)), allow(dead_code))]
#[inline(always)]
pub(crate) fn mat_vec_portable(m: &Su3Matrix, v: &Su3Vector) -> Su3Vector {
    let a = lanes_m(m);
    let b = lanes_v(v);
    let mut out = [0.0f32; 6];
    for i in 0..3 {
        let r = &a[6 * i..6 * i + 6];
        out[2 * i] = r[0] * b[0] - r[1] * b[1] + r[2] * b[2] - r[3] * b[3] + r[4] * b[4] - r[5] * b[5];
        out[2 * i + 1] = r[0] * b[1] + r[1] * b[0] + r[2] * b[3] + r[3] * b[2] + r[4] * b[5] + r[5] * b[4];
    }
    bytemuck::cast(out)
}

/// `m†·v`.
#[cfg_attr(all(target_arch = "x86_64", not(test)), allow(dead_code))]
#[inline(always)]
pub(crate) fn mat_vec_adj_portable(m: &Su3Matrix, v: &Su3Vector) -> Su3Vector {
    let a = lanes_m(m);
    let b = lanes_v(v);
    let mut out = [0.0f32; 6];
    for i in 0..3 {
        // column i of m, conjugated
        let (c0r, c0i) = (a[2 * i], a[2 * i + 1]);
        let (c1r, c1i) = (a[6 + 2 * i], a[6 + 2 * i + 1]);
        let (c2r, c2i) = (a[12 + 2 * i], a[12 + 2 * i + 1]);
        out[2 * i] = c0r * b[0] + c0i * b[1] + c1r * b[2] + c1i * b[3] + c2r * b[4] + c2i * b[5];
        out[2 * i + 1] = c0r * b[1] - c0i * b[0] + c1r * b[3] - c1i * b[2] + c2r * b[5] - c2i * b[4];
    }
    bytemuck::cast(out)
}

/// `a·b`.
#[cfg_attr(all(target_arch = "x86_64", not(test)), allow(dead_code))]
#[inline(always)]
pub(crate) fn mat_mat_portable(a: &Su3Matrix, b: &Su3Matrix) -> Su3Matrix {
    let x = lanes_m(a);
    let y = lanes_m(b);
    let mut out = [0.0f32; 18];
    for i in 0..3 {
        for j in 0..3 {
            let mut re = 0.0f32;
            let mut im = 0.0f32;
            for k in 0..3 {
                let (ar, ai) = (x[6 * i + 2 * k], x[6 * i + 2 * k + 1]);
                let (br, bi) = (y[6 * k + 2 * j], y[6 * k + 2 * j + 1]);
                re += ar * br - ai * bi;
                im += ar * bi + ai * br;
            }
            out[6 * i + 2 * j] = re;
            out[6 * i + 2 * j + 1] = im;
        }
    }
    bytemuck::cast(out)
}

#[cfg(target_arch = "x86_64")]
mod sse {
    use std::arch::x86_64::*;

    use super::{Su3Matrix, Su3Vector};

    #[inline(always)]
    unsafe fn lo(p: &[f32], at: usize) -> __m128 {
        _mm_loadu_ps(p[at..at + 4].as_ptr())
    }

    #[inline(always)]
    unsafe fn hi(p: &[f32], at: usize) -> __m128 {
        _mm_setr_ps(p[at], p[at + 1], 0.0, 0.0)
    }

    /// `[a, b, c, d] -> [b, a, d, c]`
    #[inline(always)]
    unsafe fn swap(v: __m128) -> __m128 {
        _mm_shuffle_ps::<0b10_11_00_01>(v, v)
    }

    /// `(re, im)` of row `r` times a complex vector: lanes 0 and 1 of the result.
    #[inline(always)]
    unsafe fn hsum_pair(re: __m128, im: __m128) -> __m128 {
        let s = _mm_add_ps(_mm_unpacklo_ps(re, im), _mm_unpackhi_ps(re, im));
        _mm_add_ps(s, _mm_movehl_ps(s, s))
    }

    #[inline(always)]
    unsafe fn store(out: &mut [f32], at: usize, v01: __m128, v2: __m128) {
        _mm_storeu_ps(out[at..at + 4].as_mut_ptr(), v01);
        let t: [f32; 4] = std::mem::transmute(v2);
        out[at + 4] = t[0];
        out[at + 5] = t[1];
    }

    #[inline(always)]
    pub fn mat_vec(m: &Su3Matrix, v: &Su3Vector) -> Su3Vector {
        let a: &[f32; 18] = bytemuck::cast_ref(m);
        let b: &[f32; 6] = bytemuck::cast_ref(v);
        let mut out = [0.0f32; 6];
        // SAFETY: SSE2 is part of the x86_64 baseline; all loads and stores are bounds-checked slices.
        unsafe {
            let neg_odd = _mm_setr_ps(1.0, -1.0, 1.0, -1.0);
            let (xl, xh) = (lo(b, 0), hi(b, 4));
            let (xsl, xsh) = (_mm_mul_ps(xl, neg_odd), _mm_mul_ps(xh, neg_odd));
            let (xwl, xwh) = (swap(xl), swap(xh));
            let row = |i: usize| {
                let (rl, rh) = (lo(a, 6 * i), hi(a, 6 * i + 4));
                let re = _mm_add_ps(_mm_mul_ps(rl, xsl), _mm_mul_ps(rh, xsh));
                let im = _mm_add_ps(_mm_mul_ps(rl, xwl), _mm_mul_ps(rh, xwh));
                hsum_pair(re, im)
            };
            let (y0, y1, y2) = (row(0), row(1), row(2));
            store(&mut out, 0, _mm_movelh_ps(y0, y1), y2);
        }
        bytemuck::cast(out)
    }

    #[inline(always)]
    pub fn mat_vec_adj(m: &Su3Matrix, v: &Su3Vector) -> Su3Vector {
        let a: &[f32; 18] = bytemuck::cast_ref(m);
        let b: &[f32; 6] = bytemuck::cast_ref(v);
        let mut out = [0.0f32; 6];
        // SAFETY: as in `mat_vec`.
        unsafe {
            let conj = _mm_setr_ps(1.0, -1.0, 1.0, -1.0);
            let mut yl = _mm_setzero_ps();
            let mut yh = _mm_setzero_ps();
            for k in 0..3 {
                // conj(a_k) * x_k = x_re * conj(a_k) + x_im * swap(a_k)
                let (rl, rh) = (lo(a, 6 * k), hi(a, 6 * k + 4));
                let xr = _mm_set1_ps(b[2 * k]);
                let xi = _mm_set1_ps(b[2 * k + 1]);
                yl = _mm_add_ps(yl, _mm_add_ps(_mm_mul_ps(xr, _mm_mul_ps(rl, conj)), _mm_mul_ps(xi, swap(rl))));
                yh = _mm_add_ps(yh, _mm_add_ps(_mm_mul_ps(xr, _mm_mul_ps(rh, conj)), _mm_mul_ps(xi, swap(rh))));
            }
            store(&mut out, 0, yl, yh);
        }
        bytemuck::cast(out)
    }

    #[inline(always)]
    pub fn mat_mat(x: &Su3Matrix, y: &Su3Matrix) -> Su3Matrix {
        let a: &[f32; 18] = bytemuck::cast_ref(x);
        let b: &[f32; 18] = bytemuck::cast_ref(y);
        let mut out = [0.0f32; 18];
        // SAFETY: as in `mat_vec`.
        unsafe {
            let sign = _mm_setr_ps(-1.0, 1.0, -1.0, 1.0);
            let bl = [lo(b, 0), lo(b, 6), lo(b, 12)];
            let bh = [hi(b, 4), hi(b, 10), hi(b, 16)];
            let bsl = [swap(bl[0]), swap(bl[1]), swap(bl[2])];
            let bsh = [swap(bh[0]), swap(bh[1]), swap(bh[2])];
            for i in 0..3 {
                let mut cl = _mm_setzero_ps();
                let mut ch = _mm_setzero_ps();
                for k in 0..3 {
                    // a_ik * b_k = a_re * b_k + a_im * (-im, re)
                    let ar = _mm_set1_ps(a[6 * i + 2 * k]);
                    let ai = _mm_mul_ps(_mm_set1_ps(a[6 * i + 2 * k + 1]), sign);
                    cl = _mm_add_ps(cl, _mm_add_ps(_mm_mul_ps(ar, bl[k]), _mm_mul_ps(ai, bsl[k])));
                    ch = _mm_add_ps(ch, _mm_add_ps(_mm_mul_ps(ar, bh[k]), _mm_mul_ps(ai, bsh[k])));
                }
                store(&mut out, 6 * i, cl, ch);
            }
        }
        bytemuck::cast(out)
    }
}

/// `m·v`.
#[inline(always)]
pub fn mat_vec(m: &Su3Matrix, v: &Su3Vector) -> Su3Vector {
    #[cfg(target_arch = "x86_64")]
    return sse::mat_vec(m, v);
    #[cfg(not(target_arch = "x86_64"))]
    return mat_vec_portable(m, v);
}

/// `m†·v`.
#[inline(always)]
pub fn mat_vec_adj(m: &Su3Matrix, v: &Su3Vector) -> Su3Vector {
    #[cfg(target_arch = "x86_64")]
    return sse::mat_vec_adj(m, v);
    #[cfg(not(target_arch = "x86_64"))]
    return mat_vec_adj_portable(m, v);
}

/// `a·b`.
#[inline(always)]
pub fn mat_mat(a: &Su3Matrix, b: &Su3Matrix) -> Su3Matrix {
    #[cfg(target_arch = "x86_64")]
    return sse::mat_mat(a, b);
    #[cfg(not(target_arch = "x86_64"))]
    return mat_mat_portable(a, b);
}

/// `out[i] = m[i]·v[i]` over equal-length slices.
pub fn mat_vec_batch(m: &[Su3Matrix], v: &[Su3Vector], out: &mut [Su3Vector]) {
    assert!(m.len() == v.len() && v.len() == out.len());
    for ((o, a), b) in out.iter_mut().zip(m).zip(v) {
        *o = mat_vec(a, b);
    }
}

/// `out[i] = a[i]·b[i]` over equal-length slices.
pub fn mat_mat_batch(a: &[Su3Matrix], b: &[Su3Matrix], out: &mut [Su3Matrix]) {
    assert!(a.len() == b.len() && b.len() == out.len());
    for ((o, x), y) in out.iter_mut().zip(a).zip(b) {
        *o = mat_mat(x, y);
    }
}
