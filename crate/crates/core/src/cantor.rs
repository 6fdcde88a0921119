//! Square-Cantor-set encodings and piecewise-affine block maps.
//!
//! A binary sequence embeds into the square Cantor set through base-3
//! digits restricted to {0,2}: digit x_i records cell -i and digit y_i
//! records cell i. A generalized shift then acts as finitely many
//! area-preserving affine pieces, each a translation composed with a power
//! of the Baker digit transfer. Everything in this module is digit- or
//! rational-exact; no floating point.

use crate::gshift::{GeneralizedShift, SymbolSequence, Window};
use crate::machine::TuringMachine;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CantorError {
    #[error("point matches no source block")]
    NoSourceBlock,
    #[error("generalized shift must be over the binary alphabet")]
    NotBinary,
}

fn pow3(e: usize) -> BigInt {
    BigInt::from(3u8).pow(e as u32)
}

/// Exact point of the square Cantor set.
///
/// `x[i]` is base-3 digit x_{i+1} and `y[i]` is digit y_i, all in {0,2};
/// trailing zero digits are trimmed so equality is canonical. The
/// represented point is (sum x_i 3^-i, sum y_i 3^-(i+1)).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct TernaryPoint {
    x: Vec<u8>,
    y: Vec<u8>,
}

impl TernaryPoint {
    pub fn origin() -> Self {
        TernaryPoint::default()
    }

    pub fn new(x: Vec<u8>, y: Vec<u8>) -> Self {
        assert!(x.iter().chain(&y).all(|d| matches!(d, 0 | 2)));
        let mut p = TernaryPoint { x, y };
        p.trim();
        p
    }

    /// Digit x_i (i >= 1).
    pub fn x_digit(&self, i: usize) -> u8 {
        debug_assert!(i >= 1);
        self.x.get(i - 1).copied().unwrap_or(0)
    }

    /// Digit y_i (i >= 0).
    pub fn y_digit(&self, i: usize) -> u8 {
        self.y.get(i).copied().unwrap_or(0)
    }

    pub fn x_value(&self) -> BigRational {
        digits_value(&self.x, 0)
    }

    pub fn y_value(&self) -> BigRational {
        digits_value(&self.y, 0)
    }

    fn trim(&mut self) {
        while self.x.last() == Some(&0) {
            self.x.pop();
        }
        while self.y.last() == Some(&0) {
            self.y.pop();
        }
    }
}

/// Value of a digit word read as 3^-(1+shift), 3^-(2+shift), ...
fn digits_value(digits: &[u8], shift: usize) -> BigRational {
    let mut num = BigInt::zero();
    for &d in digits {
        num = num * 3 + d;
    }
    BigRational::new(num, pow3(digits.len() + shift))
}

/// Encodes a binary sequence: x_i = 2 s_{-i} (i >= 1), y_i = 2 s_i (i >= 0).
pub fn encode_sequence(s: &SymbolSequence) -> TernaryPoint {
    assert_eq!(s.alphabet_size(), 2, "encoding is defined on bit sequences");
    let (lo, hi) = match s.support() {
        None => return TernaryPoint::origin(),
        Some(b) => b,
    };
    let mut x = vec![0u8; if lo < 0 { (-lo) as usize } else { 0 }];
    for i in 1..=x.len() {
        x[i - 1] = 2 * s.get(-(i as i64)) as u8;
    }
    let mut y = vec![0u8; if hi >= 0 { hi as usize + 1 } else { 0 }];
    for (i, d) in y.iter_mut().enumerate() {
        *d = 2 * s.get(i as i64) as u8;
    }
    TernaryPoint::new(x, y)
}

/// Inverse of [`encode_sequence`].
pub fn decode_point(p: &TernaryPoint) -> SymbolSequence {
    let mut s = SymbolSequence::blank(2);
    for i in 1..=p.x.len() {
        if p.x_digit(i) == 2 {
            s.set(-(i as i64), 1);
        }
    }
    for i in 0..p.y.len() {
        if p.y_digit(i) == 2 {
            s.set(i as i64, 1);
        }
    }
    s
}

/// A cylinder of the square Cantor set: fixed leading digits on both axes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CantorBlock {
    x_prefix: Vec<u8>,
    y_prefix: Vec<u8>,
}

impl CantorBlock {
    pub fn new(x_prefix: Vec<u8>, y_prefix: Vec<u8>) -> Self {
        assert!(x_prefix.iter().chain(&y_prefix).all(|d| matches!(d, 0 | 2)));
        CantorBlock { x_prefix, y_prefix }
    }

    pub fn x_depth(&self) -> usize {
        self.x_prefix.len()
    }

    pub fn y_depth(&self) -> usize {
        self.y_prefix.len()
    }

    pub fn x_prefix(&self) -> &[u8] {
        &self.x_prefix
    }

    pub fn y_prefix(&self) -> &[u8] {
        &self.y_prefix
    }

    pub fn contains(&self, p: &TernaryPoint) -> bool {
        self.x_prefix
            .iter()
            .enumerate()
            .all(|(i, &d)| p.x_digit(i + 1) == d)
            && self
                .y_prefix
                .iter()
                .enumerate()
                .all(|(i, &d)| p.y_digit(i) == d)
    }

    /// Closed geometric footprint `[x_lo, x_hi] x [y_lo, y_hi]`.
    pub fn footprint(&self) -> [BigRational; 4] {
        let x_lo = digits_value(&self.x_prefix, 0);
        let y_lo = digits_value(&self.y_prefix, 0);
        let x_hi = &x_lo + BigRational::new(BigInt::one(), pow3(self.x_prefix.len()));
        let y_hi = &y_lo + BigRational::new(BigInt::one(), pow3(self.y_prefix.len()));
        [x_lo, x_hi, y_lo, y_hi]
    }

    /// Cantor measure 2^-(x_depth + y_depth).
    pub fn measure(&self) -> BigRational {
        BigRational::new(
            BigInt::one(),
            BigInt::from(2u8).pow((self.x_prefix.len() + self.y_prefix.len()) as u32),
        )
    }

    fn prefixes_compatible(a: &[u8], b: &[u8]) -> bool {
        a.iter().zip(b.iter()).all(|(da, db)| da == db)
    }

    /// Whether the two cylinders intersect.
    pub fn overlaps(&self, other: &CantorBlock) -> bool {
        Self::prefixes_compatible(&self.x_prefix, &other.x_prefix)
            && Self::prefixes_compatible(&self.y_prefix, &other.y_prefix)
    }
}

/// One affine piece of a block map.
///
/// The digit action rewrites the window `rewrite` over cells
/// `-x_depth..y_depth-1` and then transfers `shift` digits between the
/// streams; on the source footprint this is `(x, y) -> (3^-shift x + a, 3^shift y + b)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockMapComponent {
    pub source: CantorBlock,
    pub image: CantorBlock,
    pub shift: i64,
    rewrite: Vec<u8>,
}

impl BlockMapComponent {
    /// Exact affine offsets `(a, b)` of the piece.
    pub fn affine_offsets(&self) -> (BigRational, BigRational) {
        let [sx, _, sy, _] = self.source.footprint();
        let [ix, _, iy, _] = self.image.footprint();
        let a = ix - scale_pow3(-self.shift) * sx;
        let b = iy - scale_pow3(self.shift) * sy;
        (a, b)
    }
}

fn scale_pow3(e: i64) -> BigRational {
    if e >= 0 {
        BigRational::from(pow3(e as usize))
    } else {
        BigRational::new(BigInt::one(), pow3((-e) as usize))
    }
}

/// A finite family of affine pieces indexed by window words.
#[derive(Debug, Clone)]
pub struct BlockMap {
    x_depth: usize,
    y_depth: usize,
    components: Vec<BlockMapComponent>,
    source_index: Vec<Option<usize>>,
}

impl BlockMap {
    pub fn x_depth(&self) -> usize {
        self.x_depth
    }

    pub fn y_depth(&self) -> usize {
        self.y_depth
    }

    pub fn components(&self) -> &[BlockMapComponent] {
        &self.components
    }

    fn from_components(x_depth: usize, y_depth: usize, components: Vec<BlockMapComponent>) -> Self {
        let mut source_index = vec![None; 1usize << (x_depth + y_depth)];
        for (ci, comp) in components.iter().enumerate() {
            let mut idx = 0usize;
            for (j, &d) in comp.source.x_prefix().iter().enumerate() {
                // x digit i pins window cell -i, window bit offset x_depth - i.
                idx |= ((d / 2) as usize) << (x_depth - 1 - j);
            }
            for (j, &d) in comp.source.y_prefix().iter().enumerate() {
                idx |= ((d / 2) as usize) << (x_depth + j);
            }
            debug_assert!(source_index[idx].is_none(), "duplicate source block");
            source_index[idx] = Some(ci);
        }
        BlockMap {
            x_depth,
            y_depth,
            components,
            source_index,
        }
    }

    /// Restricts to the components at the given indices; the result usually
    /// no longer covers the square.
    pub fn restrict(&self, indices: &[usize]) -> BlockMap {
        BlockMap::from_components(
            self.x_depth,
            self.y_depth,
            indices.iter().map(|&i| self.components[i].clone()).collect(),
        )
    }

    fn source_component(&self, p: &TernaryPoint) -> Option<usize> {
        let mut idx = 0usize;
        for i in 1..=self.x_depth {
            idx |= ((p.x_digit(i) / 2) as usize) << (self.x_depth - i);
        }
        for j in 0..self.y_depth {
            idx |= ((p.y_digit(j) / 2) as usize) << (self.x_depth + j);
        }
        self.source_index[idx]
    }

    /// Exact digit-level application: rewrite the window, then transfer
    /// `shift` digits between the y and x streams.
    pub fn apply(&self, p: &TernaryPoint) -> Result<TernaryPoint, CantorError> {
        let ci = self.source_component(p).ok_or(CantorError::NoSourceBlock)?;
        let comp = &self.components[ci];
        let mut x: Vec<u8> = p.x.clone();
        let mut y: Vec<u8> = p.y.clone();
        if x.len() < self.x_depth {
            x.resize(self.x_depth, 0);
        }
        if y.len() < self.y_depth {
            y.resize(self.y_depth, 0);
        }
        // rewrite[j] is the new symbol of window cell -x_depth+j
        for (j, &sym) in comp.rewrite.iter().enumerate() {
            let cell = j as i64 - self.x_depth as i64;
            if cell < 0 {
                x[(-cell - 1) as usize] = 2 * sym;
            } else {
                y[cell as usize] = 2 * sym;
            }
        }
        let t = comp.shift;
        if t > 0 {
            // shifting left by one moves y_0 to the front of the x stream;
            // iterating t times leaves old y_{t-1} .. y_0 in front of x
            let take = t as usize;
            if y.len() < take {
                y.resize(take, 0);
            }
            let moved: Vec<u8> = y.drain(..take).collect();
            for d in moved {
                x.insert(0, d);
            }
        } else if t < 0 {
            let take = (-t) as usize;
            if x.len() < take {
                x.resize(take, 0);
            }
            let moved: Vec<u8> = x.drain(..take).collect();
            for d in moved {
                y.insert(0, d);
            }
        }
        Ok(TernaryPoint::new(x, y))
    }

    /// Plain-text report: one component per line with source and image
    /// prefixes, shift, and exact affine offsets over powers of three.
    pub fn render_report(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "# block map: {} components, window x-depth {}, y-depth {}",
            self.components.len(),
            self.x_depth,
            self.y_depth
        );
        let _ = writeln!(out, "# source-x source-y image-x image-y shift a b");
        for comp in &self.components {
            let (a, b) = comp.affine_offsets();
            let _ = writeln!(
                out,
                "src x={} y={}  img x={} y={}  shift={}  a={}  b={}",
                digits_str(comp.source.x_prefix()),
                digits_str(comp.source.y_prefix()),
                digits_str(comp.image.x_prefix()),
                digits_str(comp.image.y_prefix()),
                comp.shift,
                ternary_rational_str(&a),
                ternary_rational_str(&b),
            );
        }
        out
    }
}

fn digits_str(digits: &[u8]) -> String {
    if digits.is_empty() {
        "[]".to_string()
    } else {
        let body: String = digits.iter().map(|d| char::from(b'0' + d)).collect();
        format!("[{body}]")
    }
}

/// Formats a rational whose denominator is a power of three as `n/3^k`.
fn ternary_rational_str(r: &BigRational) -> String {
    if r.is_zero() {
        return "0".to_string();
    }
    let mut den = r.denom().clone();
    let mut k = 0u32;
    let three = BigInt::from(3u8);
    while (&den % &three).is_zero() {
        den /= &three;
        k += 1;
    }
    debug_assert!(den.magnitude() == &1u8.into(), "denominator is not a power of 3");
    if k == 0 {
        format!("{}", r.numer())
    } else {
        format!("{}/3^{k}", r.numer())
    }
}

/// Compiles a binary generalized shift into its block map.
///
/// The window hull is widened so that every image is again a digit-prefix
/// cylinder: the x side must absorb the largest right shift and the y side
/// the largest left shift. One component is built per word on the hull.
pub fn gshift_to_blockmap(gs: &GeneralizedShift) -> Result<BlockMap, CantorError> {
    if gs.alphabet_size() != 2 {
        return Err(CantorError::NotBinary);
    }
    let min_f = gs.f_table().iter().copied().min().unwrap_or(0);
    let max_f = gs.f_table().iter().copied().max().unwrap_or(0);
    let hull = |w: Window| (w.start, w.start + w.len as i64);
    let (f_lo, f_hi) = hull(gs.f_window());
    let (g_lo, g_hi) = hull(gs.g_window());
    let p = (-f_lo).max(-g_lo).max(-min_f).max(0) as usize;
    let q = f_hi.max(g_hi).max(max_f).max(0) as usize;
    let cells = p + q;
    let mut components = Vec::with_capacity(1 << cells);
    for idx in 0..(1usize << cells) {
        // window word over cells -p..q-1, bit j of idx = cell -p+j
        let word: Vec<u16> = (0..cells).map(|j| ((idx >> j) & 1) as u16).collect();
        let cell = |word: &[u16], n: i64| word[(n + p as i64) as usize];
        let subword = |w: Window| -> Vec<u16> { w.positions().map(|n| cell(&word, n)).collect() };
        let shift = gs.f_table()[gs.word_index(&subword(gs.f_window()))];
        let rewritten = &gs.g_table()[gs.word_index(&subword(gs.g_window()))];
        let mut new_word = word.clone();
        for (j, pos) in gs.g_window().positions().enumerate() {
            new_word[(pos + p as i64) as usize] = rewritten[j];
        }
        let source = CantorBlock::new(
            (1..=p).map(|i| 2 * cell(&word, -(i as i64)) as u8).collect(),
            (0..q).map(|j| 2 * cell(&word, j as i64) as u8).collect(),
        );
        // image pins cell n at the value the rewritten word had at n+shift
        let image = CantorBlock::new(
            (1..=(p as i64 + shift) as usize)
                .map(|i| 2 * cell(&new_word, shift - i as i64) as u8)
                .collect(),
            (0..(q as i64 - shift) as usize)
                .map(|j| 2 * cell(&new_word, j as i64 + shift) as u8)
                .collect(),
        );
        components.push(BlockMapComponent {
            source,
            image,
            shift,
            rewrite: new_word.iter().map(|&s| s as u8).collect(),
        });
    }
    Ok(BlockMap::from_components(p, q, components))
}

/// Per-component area bookkeeping plus the measure balance of the whole map.
#[derive(Debug, Clone)]
pub struct AreaCertificate {
    pub component_depth_sums: Vec<(usize, usize)>,
    pub determinants_unit: bool,
    pub corners_consistent: bool,
    pub total_source_measure: BigRational,
    pub total_image_measure: BigRational,
}

impl AreaCertificate {
    pub fn passes(&self) -> bool {
        self.determinants_unit
            && self.corners_consistent
            && self.total_source_measure == self.total_image_measure
            && self
                .component_depth_sums
                .iter()
                .all(|&(src, img)| src == img)
    }
}

/// Checks exact area preservation of every piece.
///
/// The determinant of `(x,y) -> (3^-t x + a, 3^t y + b)` is one by
/// construction; the certificate re-derives it from the digit bookkeeping
/// (depth sums) and verifies that the affine form maps the source footprint
/// onto the image footprint corner by corner.
pub fn check_area_preserving(bm: &BlockMap) -> AreaCertificate {
    let mut depth_sums = Vec::with_capacity(bm.components.len());
    let mut dets = true;
    let mut corners = true;
    let mut src_measure = BigRational::zero();
    let mut img_measure = BigRational::zero();
    for comp in &bm.components {
        let src_depth = comp.source.x_depth() + comp.source.y_depth();
        let img_depth = comp.image.x_depth() + comp.image.y_depth();
        depth_sums.push((src_depth, img_depth));
        let sx = scale_pow3(-comp.shift);
        let sy = scale_pow3(comp.shift);
        dets &= (&sx * &sy).is_one();
        let (a, b) = comp.affine_offsets();
        let [src_xlo, src_xhi, src_ylo, src_yhi] = comp.source.footprint();
        let [img_xlo, img_xhi, img_ylo, img_yhi] = comp.image.footprint();
        corners &= &sx * src_xlo + &a == img_xlo
            && &sx * src_xhi + &a == img_xhi
            && &sy * src_ylo + &b == img_ylo
            && &sy * src_yhi + &b == img_yhi;
        src_measure += comp.source.measure();
        img_measure += comp.image.measure();
    }
    AreaCertificate {
        component_depth_sums: depth_sums,
        determinants_unit: dets,
        corners_consistent: corners,
        total_source_measure: src_measure,
        total_image_measure: img_measure,
    }
}

/// Outcome of the pairwise image-disjointness check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImageDisjointness {
    pub disjoint: bool,
    /// Indices of an overlapping component pair, when one exists.
    pub witness: Option<(usize, usize)>,
}

/// True iff image cylinders are pairwise disjoint (digit-prefix test).
pub fn check_disjoint_images(bm: &BlockMap) -> ImageDisjointness {
    for i in 0..bm.components.len() {
        for j in (i + 1)..bm.components.len() {
            if bm.components[i].image.overlaps(&bm.components[j].image) {
                return ImageDisjointness {
                    disjoint: false,
                    witness: Some((i, j)),
                };
            }
        }
    }
    ImageDisjointness {
        disjoint: true,
        witness: None,
    }
}

/// The full lowering of one machine: shift, bit recoding and block map,
/// plus the subset of components reachable from encoded configurations.
pub struct CompiledMachine {
    pub shift: GeneralizedShift,
    pub coding: crate::gshift::MachineCoding,
    pub bit_shift: GeneralizedShift,
    pub bit_coding: crate::gshift::BitCoding,
    pub block_map: BlockMap,
    encodable: Vec<usize>,
}

impl CompiledMachine {
    pub fn encode_configuration(&self, c: &crate::machine::Configuration) -> TernaryPoint {
        encode_sequence(&self.bit_coding.recode(&self.coding.encode(c)))
    }

    pub fn decode_ternary(
        &self,
        p: &TernaryPoint,
    ) -> Result<crate::machine::Configuration, crate::gshift::GShiftError> {
        self.coding.decode(&self.bit_coding.decode(&decode_point(p))?)
    }

    /// Components whose source windows occur in encoded configurations:
    /// bit neighbors around a marked middle cell.
    pub fn encodable_block_map(&self) -> BlockMap {
        self.block_map.restrict(&self.encodable)
    }
}

/// Lowers a machine through shift, bit recoding and block map.
pub fn compile_machine(tm: &TuringMachine) -> Result<CompiledMachine, crate::gshift::GShiftError> {
    let (shift, coding) = crate::gshift::compile_tm_to_gshift(tm)?;
    let (bit_shift, bit_coding) = crate::gshift::recode_binary(&shift);
    let block_map = gshift_to_blockmap(&bit_shift).expect("bit shift is binary");
    let k = bit_coding.bits_per_symbol();
    let mut encodable = Vec::new();
    for x in 0..2u16 {
        for z in 0..2u16 {
            for q in 1..=tm.state_count() {
                for a in 0..2u8 {
                    let symbols = [x, coding.pair(q, a), z];
                    let mut idx = 0usize;
                    for (c, &sym) in symbols.iter().enumerate() {
                        for j in 0..k {
                            let bit = (sym >> (k - 1 - j)) & 1;
                            idx |= (bit as usize) << (c * k + j);
                        }
                    }
                    encodable.push(idx);
                }
            }
        }
    }
    Ok(CompiledMachine {
        shift,
        coding,
        bit_shift,
        bit_coding,
        block_map,
        encodable,
    })
}

/// Operational reversibility: the compiled block map restricted to
/// machine-reachable windows has pairwise disjoint image blocks.
pub fn machine_reversible(tm: &TuringMachine) -> bool {
    let compiled = compile_machine(tm).expect("machine within exhaustive-table limit");
    check_disjoint_images(&compiled.encodable_block_map()).disjoint
}
