//! Flag value syntax: byte sizes, delays and integer lists.

use anyhow::{bail, Context, Result};

/// `64M`, `256MiB`, `1G`, `4096`; suffixes are binary.
pub fn parse_bytes(s: &str) -> Result<u64> {
    parse_size::Config::new().with_binary().parse_size(s).with_context(|| format!("invalid byte size {s:?}"))
}

/// `400us`, `0.4ms`, `1s`, or a bare number of microseconds.
pub fn parse_delay_us(s: &str) -> Result<f64> {
    let t = s.trim();
    let (num, scale) = if let Some(n) = t.strip_suffix("us") {
        (n, 1.0)
    } else if let Some(n) = t.strip_suffix("µs") {
        (n, 1.0)
    } else if let Some(n) = t.strip_suffix("ms") {
        (n, 1e3)
    } else if let Some(n) = t.strip_suffix('s') {
        (n, 1e6)
    } else {
        (t, 1.0)
    };
    let v: f64 = num.trim().parse().with_context(|| format!("invalid delay {s:?}"))?;
    if !(v >= 0.0) || !v.is_finite() {
        bail!("delay must be a non-negative number, got {s:?}");
    }
    Ok(v * scale)
}

/// One argument holding a whole list, so clap parses it in a single call.
pub type List = Vec<usize>;

/// Comma-separated integers; `a..b` expands to `a, 2a, 4a, …` up to `b`.
pub fn parse_list(s: &str) -> Result<List> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        if let Some((a, b)) = part.split_once("..") {
            let a: usize = a.trim().parse().with_context(|| format!("invalid range start in {part:?}"))?;
            let b: usize = b.trim().parse().with_context(|| format!("invalid range end in {part:?}"))?;
            if a == 0 || a > b {
                bail!("range {part:?} must satisfy 0 < start <= end");
            }
            let mut v = a;
            while v <= b {
                out.push(v);
                v = v.checked_mul(2).context("range overflows")?;
            }
        } else {
            out.push(part.parse().with_context(|| format!("invalid integer {part:?}"))?);
        }
    }
    if out.is_empty() {
        bail!("empty list {s:?}");
    }
    Ok(out)
}

pub fn join<T: ToString>(v: &[T]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
}
