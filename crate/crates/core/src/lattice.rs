//! Four-dimensional periodic lattices, even-odd site ordering, and the
//! site-major / field-major storage layouts.
//!
//! Sites are numbered with every even site before every odd one. Inside
//! a parity class the order is lexicographic in `(t, z, y, x)` with `x`
//! fastest. All extents must be even, which makes consecutive `x` pairs
//! split evenly across the two classes.

use std::io::{Read, Write};

use bytemuck::{Pod, Zeroable};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::su3::{Complex32, Su3Matrix, Su3Vector};

/// Number of space-time directions.
pub const NDIM: usize = 4;

/// Bytes of one unpadded site record: four links and one color vector.
pub const SITE_PAYLOAD_BYTES: usize = NDIM * 72 + 24;

/// Size of a MILC site structure; used only for memory-traffic emulation.
pub const MILC_SITE_BYTES: usize = 1656;

const LINK_C: usize = 9;
const VEC_C: usize = 3;
const COMPLEX_BYTES: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn of_coords(c: [usize; NDIM]) -> Parity {
        if c.iter().sum::<usize>() % 2 == 0 {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    pub fn flip(self) -> Parity {
        match self {
            Parity::Even => Parity::Odd,
            Parity::Odd => Parity::Even,
        }
    }

    fn bit(self) -> usize {
        match self {
            Parity::Even => 0,
            Parity::Odd => 1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SiteIndex {
    pub linear: usize,
    pub parity: Parity,
}

/// Direction of a nearest-neighbour hop.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Hop {
    Forward,
    Backward,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LatticeGeometry {
    dims: [usize; NDIM],
    volume: usize,
}

impl LatticeGeometry {
    /// `dims` are `(nx, ny, nz, nt)`; each must be even and at least 2.
    pub fn new(dims: [usize; NDIM]) -> Result<Self> {
        if let Some(d) = dims.iter().find(|&&d| d < 2 || d % 2 != 0) {
            return domain(format!("lattice extent {d} in {dims:?} must be even and >= 2"));
        }
        if dims.iter().any(|&d| d > u16::MAX as usize) {
            return domain(format!("lattice extents {dims:?} exceed 65535"));
        }
        Ok(LatticeGeometry { dims, volume: dims.iter().product() })
    }

    pub fn hypercubic(l: usize) -> Result<Self> {
        Self::new([l; NDIM])
    }

    pub fn dims(&self) -> [usize; NDIM] {
        self.dims
    }

    pub fn volume(&self) -> usize {
        self.volume
    }

    pub fn half_volume(&self) -> usize {
        self.volume / 2
    }

    fn lex(&self, c: [usize; NDIM]) -> usize {
        let [nx, ny, nz, _] = self.dims;
        c[0] + nx * (c[1] + ny * (c[2] + nz * c[3]))
    }

    pub fn site_index(&self, coords: [usize; NDIM]) -> Result<SiteIndex> {
        for mu in 0..NDIM {
            if coords[mu] >= self.dims[mu] {
                return domain(format!("coordinate {coords:?} outside lattice {:?}", self.dims));
            }
        }
        Ok(self.index_unchecked(coords))
    }

    #[inline]
    fn index_unchecked(&self, coords: [usize; NDIM]) -> SiteIndex {
        let parity = Parity::of_coords(coords);
        SiteIndex { linear: parity.bit() * self.half_volume() + self.lex(coords) / 2, parity }
    }

    /// Parity of a linear index.
    pub fn parity_of(&self, linear: usize) -> Parity {
        if linear < self.half_volume() {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    pub fn coords(&self, linear: usize) -> [usize; NDIM] {
        debug_assert!(linear < self.volume);
        let parity = self.parity_of(linear);
        let half_lex = linear - parity.bit() * self.half_volume();
        let [nx, ny, nz, _] = self.dims;
        // x's low bit is fixed by the parity of the remaining coordinates
        let rest = (2 * half_lex) / nx;
        let (y, z, t) = (rest % ny, (rest / ny) % nz, rest / (ny * nz));
        let b = parity.bit() ^ ((y + z + t) % 2);
        let x = (2 * half_lex + b) % nx;
        [x, y, z, t]
    }

    pub fn neighbor(&self, s: SiteIndex, mu: usize, hop: Hop) -> SiteIndex {
        assert!(mu < NDIM, "direction {mu} out of range");
        let mut c = self.coords(s.linear);
        let n = self.dims[mu];
        c[mu] = match hop {
            Hop::Forward => (c[mu] + 1) % n,
            Hop::Backward => (c[mu] + n - 1) % n,
        };
        self.index_unchecked(c)
    }

    pub fn site(&self, linear: usize) -> SiteIndex {
        SiteIndex { linear, parity: self.parity_of(linear) }
    }

    /// Linear range of one parity class.
    pub fn parity_range(&self, p: Parity) -> std::ops::Range<usize> {
        let h = self.half_volume();
        match p {
            Parity::Even => 0..h,
            Parity::Odd => h..2 * h,
        }
    }

    /// Precomputed neighbours: entries `0..4` forward in `mu`, `4..8` backward.
    pub fn neighbor_table(&self) -> Vec<[u32; 2 * NDIM]> {
        (0..self.volume)
            .map(|i| {
                let s = self.site(i);
                let mut row = [0u32; 2 * NDIM];
                for mu in 0..NDIM {
                    row[mu] = self.neighbor(s, mu, Hop::Forward).linear as u32;
                    row[NDIM + mu] = self.neighbor(s, mu, Hop::Backward).linear as u32;
                }
                row
            })
            .collect()
    }
}

pub fn site_index(geom: &LatticeGeometry, coords: [usize; NDIM]) -> Result<SiteIndex> {
    geom.site_index(coords)
}

pub fn neighbor(geom: &LatticeGeometry, s: SiteIndex, mu: usize, hop: Hop) -> SiteIndex {
    geom.neighbor(s, mu, hop)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LayoutTag {
    SiteMajor,
    FieldMajor,
}

impl LayoutTag {
    fn code(self) -> u8 {
        match self {
            LayoutTag::SiteMajor => 0,
            LayoutTag::FieldMajor => 1,
        }
    }

    fn from_code(c: u8) -> Result<Self> {
        match c {
            0 => Ok(LayoutTag::SiteMajor),
            1 => Ok(LayoutTag::FieldMajor),
            _ => Err(Error::Format(format!("unknown layout tag {c}"))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            LayoutTag::SiteMajor => "site-major",
            LayoutTag::FieldMajor => "field-major",
        }
    }
}

impl std::str::FromStr for LayoutTag {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "site-major" | "site" | "SiteMajor" => Ok(LayoutTag::SiteMajor),
            "field-major" | "field" | "FieldMajor" => Ok(LayoutTag::FieldMajor),
            other => domain(format!("unknown layout {other:?}")),
        }
    }
}

/// Storage policy for a lattice field set.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LayoutPolicy {
    pub tag: LayoutTag,
    pub site_padding_bytes: usize,
}

impl LayoutPolicy {
    pub const fn site_major() -> Self {
        LayoutPolicy { tag: LayoutTag::SiteMajor, site_padding_bytes: 0 }
    }

    pub const fn field_major() -> Self {
        LayoutPolicy { tag: LayoutTag::FieldMajor, site_padding_bytes: 0 }
    }

    /// Site-major records padded out to the size of a MILC site.
    pub const fn milc_emulation() -> Self {
        LayoutPolicy { tag: LayoutTag::SiteMajor, site_padding_bytes: MILC_SITE_BYTES - SITE_PAYLOAD_BYTES }
    }

    pub fn site_major_padded(pad: usize) -> Result<Self> {
        let p = LayoutPolicy { tag: LayoutTag::SiteMajor, site_padding_bytes: pad };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.site_padding_bytes.is_multiple_of(COMPLEX_BYTES) {
            return domain(format!("site padding {} is not a multiple of 8 bytes", self.site_padding_bytes));
        }
        if self.tag == LayoutTag::FieldMajor && self.site_padding_bytes != 0 {
            return domain("field-major layouts carry no per-site padding");
        }
        if self.site_padding_bytes > u16::MAX as usize {
            return domain("site padding exceeds 65535 bytes");
        }
        Ok(())
    }

    /// Bytes one site occupies in this layout.
    pub fn site_bytes(&self) -> usize {
        SITE_PAYLOAD_BYTES + self.site_padding_bytes
    }

    pub fn is_emulating_milc(&self) -> bool {
        self.tag == LayoutTag::SiteMajor && self.site_bytes() == MILC_SITE_BYTES
    }

    pub fn label(&self) -> String {
        match (self.tag, self.site_padding_bytes) {
            (LayoutTag::SiteMajor, 0) => "site-major".into(),
            (LayoutTag::SiteMajor, p) => format!("site-major+{p}"),
            (LayoutTag::FieldMajor, _) => "field-major".into(),
        }
    }
}

/// One site's worth of fields in the natural (unpadded) order.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq, Pod, Zeroable)]
pub struct SiteRecord {
    pub links: [Su3Matrix; NDIM],
    pub vector: Su3Vector,
}

/// Strides, in complex units, of one field inside a [`LatticeFields`] buffer.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FieldStride {
    pub base: usize,
    pub per_site: usize,
}

impl FieldStride {
    #[inline(always)]
    pub fn offset(&self, site: usize) -> usize {
        self.base + site * self.per_site
    }
}

/// Four gauge links and one color vector per site, in either layout.
#[derive(Clone, Debug, PartialEq)]
pub struct LatticeFields {
    geom: LatticeGeometry,
    layout: LayoutPolicy,
    data: Vec<Complex32>,
}

impl LatticeFields {
    pub fn zeroed(geom: LatticeGeometry, layout: LayoutPolicy) -> Result<Self> {
        layout.validate()?;
        let len = Self::storage_len(&geom, &layout);
        let mut data = Vec::new();
        data.try_reserve_exact(len)
            .map_err(|e| Error::Resource(format!("cannot allocate {} bytes: {e}", len * COMPLEX_BYTES)))?;
        data.resize(len, Complex32::new(0.0, 0.0));
        Ok(LatticeFields { geom, layout, data })
    }

    /// Build from per-site records given in linear-index order.
    pub fn from_fn(geom: LatticeGeometry, layout: LayoutPolicy, mut f: impl FnMut(usize) -> SiteRecord) -> Result<Self> {
        let mut out = Self::zeroed(geom, layout)?;
        for s in 0..geom.volume() {
            out.set_record(s, &f(s));
        }
        Ok(out)
    }

    /// Wrap a raw buffer, checking its length against the layout.
    pub fn from_raw(geom: LatticeGeometry, layout: LayoutPolicy, data: Vec<Complex32>) -> Result<Self> {
        layout.validate()?;
        let want = Self::storage_len(&geom, &layout);
        if data.len() != want {
            return domain(format!("buffer holds {} complex values, layout needs {want}", data.len()));
        }
        Ok(LatticeFields { geom, layout, data })
    }

    fn storage_len(geom: &LatticeGeometry, layout: &LayoutPolicy) -> usize {
        geom.volume() * layout.site_bytes() / COMPLEX_BYTES
    }

    pub fn geometry(&self) -> &LatticeGeometry {
        &self.geom
    }

    pub fn layout(&self) -> LayoutPolicy {
        self.layout
    }

    pub fn raw(&self) -> &[Complex32] {
        &self.data
    }

    pub fn storage_bytes(&self) -> usize {
        self.data.len() * COMPLEX_BYTES
    }

    /// Placement of link `mu` across sites.
    pub fn link_stride(&self, mu: usize) -> FieldStride {
        let v = self.geom.volume();
        match self.layout.tag {
            LayoutTag::SiteMajor => FieldStride { base: mu * LINK_C, per_site: self.record_len() },
            LayoutTag::FieldMajor => FieldStride { base: mu * v * LINK_C, per_site: LINK_C },
        }
    }

    pub fn vector_stride(&self) -> FieldStride {
        let v = self.geom.volume();
        match self.layout.tag {
            LayoutTag::SiteMajor => FieldStride { base: NDIM * LINK_C, per_site: self.record_len() },
            LayoutTag::FieldMajor => FieldStride { base: NDIM * v * LINK_C, per_site: VEC_C },
        }
    }

    fn record_len(&self) -> usize {
        self.layout.site_bytes() / COMPLEX_BYTES
    }

    /// Byte offset of link `mu` at `site` from the start of storage.
    pub fn link_byte_offset(&self, site: usize, mu: usize) -> usize {
        self.link_stride(mu).offset(site) * COMPLEX_BYTES
    }

    #[inline(always)]
    pub fn link_at(&self, stride: FieldStride, site: usize) -> &Su3Matrix {
        let o = stride.offset(site);
        let block: &[Complex32; LINK_C] = self.data[o..o + LINK_C].try_into().unwrap();
        bytemuck::cast_ref(block)
    }

    #[inline]
    pub fn link(&self, site: usize, mu: usize) -> &Su3Matrix {
        self.link_at(self.link_stride(mu), site)
    }

    pub fn set_link(&mut self, site: usize, mu: usize, m: &Su3Matrix) {
        let o = self.link_stride(mu).offset(site);
        self.data[o..o + LINK_C].copy_from_slice(bytemuck::cast_slice(std::slice::from_ref(m)));
    }

    pub fn vector(&self, site: usize) -> &Su3Vector {
        let o = self.vector_stride().offset(site);
        let block: &[Complex32; VEC_C] = self.data[o..o + VEC_C].try_into().unwrap();
        bytemuck::cast_ref(block)
    }

    pub fn set_vector(&mut self, site: usize, v: &Su3Vector) {
        let o = self.vector_stride().offset(site);
        self.data[o..o + VEC_C].copy_from_slice(bytemuck::cast_slice(std::slice::from_ref(v)));
    }

    pub fn record(&self, site: usize) -> SiteRecord {
        SiteRecord {
            links: std::array::from_fn(|mu| *self.link(site, mu)),
            vector: *self.vector(site),
        }
    }

    pub fn set_record(&mut self, site: usize, r: &SiteRecord) {
        for mu in 0..NDIM {
            self.set_link(site, mu, &r.links[mu]);
        }
        self.set_vector(site, &r.vector);
    }

    /// Same values, reordered into `to`.
    pub fn to_layout(&self, to: LayoutPolicy) -> Result<LatticeFields> {
        if to == self.layout {
            return Ok(self.clone());
        }
        LatticeFields::from_fn(self.geom, to, |s| self.record(s))
    }

    pub fn write_to(&self, w: &mut impl Write) -> Result<()> {
        let header = FieldFileHeader {
            layout: self.layout.tag,
            kind: FieldKind::SiteRecords,
            padding_bytes: self.layout.site_padding_bytes as u16,
            dims: self.geom.dims(),
        };
        header.write_to(w)?;
        write_payload(w, &self.data)
    }

    pub fn read_from(r: &mut impl Read) -> Result<Self> {
        let header = FieldFileHeader::read_from(r)?;
        if header.kind != FieldKind::SiteRecords {
            return Err(Error::Format(format!("expected site records, found {:?}", header.kind)));
        }
        let geom = LatticeGeometry::new(header.dims)?;
        let layout = LayoutPolicy { tag: header.layout, site_padding_bytes: header.padding_bytes as usize };
        let data = read_payload(r, Self::storage_len(&geom, &layout))?;
        LatticeFields::from_raw(geom, layout, data)
    }
}

/// Reorder `data` from `from` into `to`; `data` must currently be in `from`.
pub fn transform_layout(data: &LatticeFields, from: LayoutPolicy, to: LayoutPolicy) -> Result<LatticeFields> {
    if data.layout() != from {
        return domain(format!("field set is {}, not {}", data.layout().label(), from.label()));
    }
    data.to_layout(to)
}

pub const FIELD_FILE_MAGIC: [u8; 4] = *b"SU3L";
pub const FIELD_FILE_HEADER_BYTES: usize = 16;

/// What a field file's payload holds.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FieldKind {
    /// Four links plus one vector per site.
    SiteRecords,
    /// One vector per site over the whole lattice.
    FermionFull,
    FermionEven,
    FermionOdd,
}

impl FieldKind {
    fn code(self) -> u8 {
        match self {
            FieldKind::SiteRecords => 0,
            FieldKind::FermionFull => 1,
            FieldKind::FermionEven => 2,
            FieldKind::FermionOdd => 3,
        }
    }

    fn from_code(c: u8) -> Result<Self> {
        Ok(match c {
            0 => FieldKind::SiteRecords,
            1 => FieldKind::FermionFull,
            2 => FieldKind::FermionEven,
            3 => FieldKind::FermionOdd,
            _ => return Err(Error::Format(format!("unknown field kind {c}"))),
        })
    }
}

/// 16-byte header: magic, layout tag, kind, padding (u16), four u16 extents.
/// All integers little-endian.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FieldFileHeader {
    pub layout: LayoutTag,
    pub kind: FieldKind,
    pub padding_bytes: u16,
    pub dims: [usize; NDIM],
}

impl FieldFileHeader {
    pub fn to_bytes(&self) -> [u8; FIELD_FILE_HEADER_BYTES] {
        let mut b = [0u8; FIELD_FILE_HEADER_BYTES];
        b[0..4].copy_from_slice(&FIELD_FILE_MAGIC);
        b[4] = self.layout.code();
        b[5] = self.kind.code();
        b[6..8].copy_from_slice(&self.padding_bytes.to_le_bytes());
        for (i, d) in self.dims.iter().enumerate() {
            b[8 + 2 * i..10 + 2 * i].copy_from_slice(&(*d as u16).to_le_bytes());
        }
        b
    }

    pub fn from_bytes(b: &[u8; FIELD_FILE_HEADER_BYTES]) -> Result<Self> {
        if b[0..4] != FIELD_FILE_MAGIC {
            return Err(Error::Format("bad magic".into()));
        }
        let dims = std::array::from_fn(|i| u16::from_le_bytes([b[8 + 2 * i], b[9 + 2 * i]]) as usize);
        Ok(FieldFileHeader {
            layout: LayoutTag::from_code(b[4])?,
            kind: FieldKind::from_code(b[5])?,
            padding_bytes: u16::from_le_bytes([b[6], b[7]]),
            dims,
        })
    }

    pub fn write_to(&self, w: &mut impl Write) -> Result<()> {
        w.write_all(&self.to_bytes())?;
        Ok(())
    }

    pub fn read_from(r: &mut impl Read) -> Result<Self> {
        let mut b = [0u8; FIELD_FILE_HEADER_BYTES];
        r.read_exact(&mut b)?;
        Self::from_bytes(&b)
    }
}

pub(crate) fn write_payload(w: &mut impl Write, data: &[Complex32]) -> Result<()> {
    let mut buf = Vec::with_capacity(data.len() * COMPLEX_BYTES);
    for z in data {
        buf.extend_from_slice(&z.re.to_le_bytes());
        buf.extend_from_slice(&z.im.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

pub(crate) fn read_payload(r: &mut impl Read, len: usize) -> Result<Vec<Complex32>> {
    let mut buf = vec![0u8; len * COMPLEX_BYTES];
    r.read_exact(&mut buf)
        .map_err(|e| Error::Format(format!("payload shorter than {} bytes: {e}", buf.len())))?;
    let mut extra = [0u8; 1];
    if r.read(&mut extra)? != 0 {
        return Err(Error::Format("trailing bytes after payload".into()));
    }
    Ok(buf
        .chunks_exact(COMPLEX_BYTES)
        .map(|c| {
            Complex32::new(
                f32::from_le_bytes([c[0], c[1], c[2], c[3]]),
                f32::from_le_bytes([c[4], c[5], c[6], c[7]]),
            )
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::su3::random_su3;

    fn g4() -> LatticeGeometry {
        LatticeGeometry::hypercubic(4).unwrap()
    }

    fn random_fields(geom: LatticeGeometry, layout: LayoutPolicy) -> LatticeFields {
        LatticeFields::from_fn(geom, layout, |s| SiteRecord {
            links: std::array::from_fn(|mu| random_su3((s * 4 + mu) as u64)),
            vector: Su3Vector::random(s as u64 + 99_999),
        })
        .unwrap()
    }

    #[test]
    fn origin_and_parity() {
        let g = g4();
        let o = g.site_index([0, 0, 0, 0]).unwrap();
        assert_eq!(o, SiteIndex { linear: 0, parity: Parity::Even });
        let s = g.site_index([1, 0, 0, 0]).unwrap();
        assert_eq!(s.parity, Parity::Odd);
        assert!(s.linear >= 128);
    }

    #[test]
    fn out_of_range_coordinate() {
        assert!(matches!(g4().site_index([4, 0, 0, 0]), Err(Error::Domain(_))));
    }

    #[test]
    fn round_trip_all_sites() {
        let g = g4();
        let mut seen = vec![false; g.volume()];
        for t in 0..4 {
            for z in 0..4 {
                for y in 0..4 {
                    for x in 0..4 {
                        let c = [x, y, z, t];
                        let s = g.site_index(c).unwrap();
                        assert!(!seen[s.linear]);
                        seen[s.linear] = true;
                        assert_eq!(g.coords(s.linear), c);
                        assert_eq!(s.parity == Parity::Even, s.linear < 128);
                    }
                }
            }
        }
        assert!(seen.iter().all(|&b| b));
    }

    #[test]
    fn anisotropic_round_trip() {
        let g = LatticeGeometry::new([2, 4, 6, 8]).unwrap();
        for i in 0..g.volume() {
            assert_eq!(g.site_index(g.coords(i)).unwrap().linear, i);
        }
    }

    #[test]
    fn neighbor_wraps_and_flips() {
        let g = g4();
        let o = g.site_index([0, 0, 0, 0]).unwrap();
        assert_eq!(g.coords(g.neighbor(o, 0, Hop::Forward).linear), [1, 0, 0, 0]);
        let e = g.site_index([3, 0, 0, 0]).unwrap();
        assert_eq!(g.neighbor(e, 0, Hop::Forward), o);
        for i in 0..g.volume() {
            let s = g.site(i);
            for mu in 0..NDIM {
                let f = g.neighbor(s, mu, Hop::Forward);
                assert_eq!(f.parity, s.parity.flip());
                assert_eq!(g.neighbor(f, mu, Hop::Backward), s);
            }
        }
    }

    #[test]
    fn odd_or_tiny_dims_rejected() {
        assert!(LatticeGeometry::hypercubic(1).is_err());
        assert!(LatticeGeometry::new([4, 4, 3, 4]).is_err());
        assert!(LatticeGeometry::new([4, 0, 4, 4]).is_err());
    }

    #[test]
    fn milc_record_size() {
        assert_eq!(SITE_PAYLOAD_BYTES, 312);
        assert_eq!(std::mem::size_of::<SiteRecord>(), 312);
        assert_eq!(LayoutPolicy::milc_emulation().site_bytes(), 1656);
    }

    #[test]
    fn field_major_link_zero_is_contiguous() {
        let g = LatticeGeometry::hypercubic(2).unwrap();
        let f = LatticeFields::zeroed(g, LayoutPolicy::field_major()).unwrap();
        for s in 0..16 {
            assert_eq!(f.link_byte_offset(s, 0), s * 72);
        }
        assert_eq!(f.link_byte_offset(0, 1), 16 * 72);
    }

    #[test]
    fn site_major_records_are_contiguous() {
        let g = LatticeGeometry::hypercubic(2).unwrap();
        let f = LatticeFields::zeroed(g, LayoutPolicy::milc_emulation()).unwrap();
        assert_eq!(f.link_byte_offset(1, 0), 1656);
        assert_eq!(f.link_byte_offset(1, 3), 1656 + 3 * 72);
    }

    #[test]
    fn transform_is_an_involution() {
        let g = g4();
        for from in [LayoutPolicy::site_major(), LayoutPolicy::milc_emulation()] {
            let a = random_fields(g, from);
            let b = transform_layout(&a, from, LayoutPolicy::field_major()).unwrap();
            for s in 0..g.volume() {
                assert_eq!(a.record(s), b.record(s));
            }
            let back = transform_layout(&b, LayoutPolicy::field_major(), from).unwrap();
            assert_eq!(back, a);
        }
    }

    #[test]
    fn transform_rejects_wrong_source_layout() {
        let a = random_fields(g4(), LayoutPolicy::site_major());
        assert!(transform_layout(&a, LayoutPolicy::field_major(), LayoutPolicy::site_major()).is_err());
    }

    #[test]
    fn raw_size_mismatch() {
        let g = g4();
        let r = LatticeFields::from_raw(g, LayoutPolicy::site_major(), vec![Complex32::new(0.0, 0.0); 10]);
        assert!(matches!(r, Err(Error::Domain(_))));
    }

    #[test]
    fn file_round_trip() {
        let a = random_fields(LatticeGeometry::new([2, 2, 4, 4]).unwrap(), LayoutPolicy::milc_emulation());
        let mut buf = Vec::new();
        a.write_to(&mut buf).unwrap();
        assert_eq!(&buf[0..4], b"SU3L");
        assert_eq!(buf.len(), 16 + a.storage_bytes());
        assert_eq!(u16::from_le_bytes([buf[8], buf[9]]), 2);
        assert_eq!(u16::from_le_bytes([buf[14], buf[15]]), 4);
        let b = LatticeFields::read_from(&mut buf.as_slice()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn truncated_file_rejected() {
        let a = random_fields(LatticeGeometry::hypercubic(2).unwrap(), LayoutPolicy::field_major());
        let mut buf = Vec::new();
        a.write_to(&mut buf).unwrap();
        buf.pop();
        assert!(matches!(LatticeFields::read_from(&mut buf.as_slice()), Err(Error::Format(_))));
        buf[0] = b'X';
        assert!(LatticeFields::read_from(&mut buf.as_slice()).is_err());
    }
}
