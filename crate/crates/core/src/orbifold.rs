//! Signatures, Euler characteristic, dimension count and the combinatorics of
//! splitting along simple closed curves and full 1-suborbifolds.
//!
//! Every splitting is recorded as a list of pieces, each carrying its own
//! presentation and an inclusion map sending piece generators to ambient words.
//! Pieces may use a non-canonical block order so that new boundary generators
//! land exactly on the curve word (or its inverse) with no conjugating prefix.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::words::{GenKind, Generator, Rational, Word};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OrbifoldError {
    #[error("invalid signature: {0}")]
    InvalidSignature(String),
    #[error("cone point {cone} has order {order}, not two")]
    NotOrderTwo { cone: usize, order: u32 },
    #[error("euler characteristic obstruction: {0}")]
    EulerObstruction(String),
    #[error("invalid splitting: {0}")]
    InvalidSplitting(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct OrbifoldSignature {
    pub genus: usize,
    pub boundary: usize,
    pub cone_orders: Vec<u32>,
}

impl OrbifoldSignature {
    pub fn new(genus: usize, boundary: usize, cone_orders: Vec<u32>) -> Self {
        OrbifoldSignature { genus, boundary, cone_orders }
    }

    pub fn cone_count(&self) -> usize {
        self.cone_orders.len()
    }

    /// Number of cone points of order two.
    pub fn order_two_count(&self) -> usize {
        self.cone_orders.iter().filter(|&&r| r == 2).count()
    }

    pub fn euler_characteristic(&self) -> Rational {
        let mut chi = Rational::from_integer(2 - 2 * self.genus as i64 - self.boundary as i64);
        for &r in &self.cone_orders {
            chi -= Rational::one() - Rational::new(1, r as i64);
        }
        chi
    }

    pub fn validate(&self) -> Result<(), OrbifoldError> {
        if let Some((i, r)) = self.cone_orders.iter().enumerate().find(|(_, &r)| r < 2) {
            return Err(OrbifoldError::InvalidSignature(format!(
                "cone point {} has order {r} < 2",
                i + 1
            )));
        }
        let chi = self.euler_characteristic();
        if chi >= Rational::zero() {
            return Err(OrbifoldError::InvalidSignature(format!(
                "euler characteristic {chi} is not negative"
            )));
        }
        Ok(())
    }

    /// Generators in relator order: x1 y1 x2 y2 ... z1 .. zb s1 .. sc.
    pub fn generators(&self) -> Vec<Generator> {
        let mut out = Vec::new();
        for i in 1..=self.genus {
            out.push(Generator::x(i));
            out.push(Generator::y(i));
        }
        for j in 1..=self.boundary {
            out.push(Generator::z(j));
        }
        for k in 1..=self.cone_count() {
            out.push(Generator::s(k));
        }
        out
    }

    pub fn contains(&self, g: Generator) -> bool {
        let bound = match g.kind {
            GenKind::X | GenKind::Y => self.genus,
            GenKind::Z => self.boundary,
            GenKind::S => self.cone_count(),
        };
        g.index >= 1 && g.index <= bound
    }

    /// Order of the cone generator `s_k`.
    pub fn cone_order(&self, k: usize) -> u32 {
        self.cone_orders[k - 1]
    }

    /// `16g - 16 + 6c - 2c_b` for closed orbifolds.
    pub fn dimension_closed(&self) -> Result<i64, OrbifoldError> {
        self.validate()?;
        if self.boundary != 0 {
            return Err(OrbifoldError::InvalidSignature(format!(
                "dimension formula needs a closed orbifold, got {} boundary components",
                self.boundary
            )));
        }
        Ok(16 * self.genus as i64 - 16 + 6 * self.cone_count() as i64 - 2 * self.order_two_count() as i64)
    }
}

pub fn euler_characteristic(sig: &OrbifoldSignature) -> Rational {
    sig.euler_characteristic()
}

pub fn validate(sig: &OrbifoldSignature) -> Result<(), OrbifoldError> {
    sig.validate()
}

pub fn dimension_closed(sig: &OrbifoldSignature) -> Result<i64, OrbifoldError> {
    sig.dimension_closed()
}

// ---------------------------------------------------------------------------
// Presentations

/// One factor of the long relator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Block {
    /// `[x_i, y_i]`
    Handle(usize),
    /// `z_j`
    Boundary(usize),
    /// `s_k`
    Cone(usize),
}

impl Block {
    pub fn word(&self) -> Word {
        match *self {
            Block::Handle(i) => Word::commutator(&Word::gen(Generator::x(i)), &Word::gen(Generator::y(i))),
            Block::Boundary(j) => Word::gen(Generator::z(j)),
            Block::Cone(k) => Word::gen(Generator::s(k)),
        }
    }
}

/// A signature together with the order in which blocks appear in the long
/// relator. The canonical order is handles, then boundaries, then cones.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Presentation {
    pub signature: OrbifoldSignature,
    pub blocks: Vec<Block>,
}

impl Presentation {
    pub fn canonical(sig: &OrbifoldSignature) -> Self {
        let mut blocks = Vec::new();
        blocks.extend((1..=sig.genus).map(Block::Handle));
        blocks.extend((1..=sig.boundary).map(Block::Boundary));
        blocks.extend((1..=sig.cone_count()).map(Block::Cone));
        Presentation { signature: sig.clone(), blocks }
    }

    pub fn is_canonical(&self) -> bool {
        self.blocks == Presentation::canonical(&self.signature).blocks
    }

    pub fn relator(&self) -> Word {
        let words: Vec<Word> = self.blocks.iter().map(|b| b.word()).collect();
        Word::product(words.iter())
    }

    /// `s_k^{r_k}` paired with the cone generator.
    pub fn torsion_relators(&self) -> Vec<(Generator, Word)> {
        self.signature
            .cone_orders
            .iter()
            .enumerate()
            .map(|(i, &r)| {
                let s = Generator::s(i + 1);
                (s, Word::gen(s).pow(r as i64))
            })
            .collect()
    }

    pub fn boundary_generators(&self) -> Vec<Generator> {
        (1..=self.signature.boundary).map(Generator::z).collect()
    }

    /// Checks that every generator of the signature occurs in exactly one block.
    pub fn check(&self) -> Result<(), OrbifoldError> {
        let sig = &self.signature;
        let mut seen = (vec![0; sig.genus], vec![0; sig.boundary], vec![0; sig.cone_count()]);
        for b in &self.blocks {
            let (slot, i) = match *b {
                Block::Handle(i) => (&mut seen.0, i),
                Block::Boundary(i) => (&mut seen.1, i),
                Block::Cone(i) => (&mut seen.2, i),
            };
            if i == 0 || i > slot.len() {
                return Err(OrbifoldError::InvalidSplitting(format!("block {b:?} out of range")));
            }
            slot[i - 1] += 1;
        }
        let ok = seen.0.iter().chain(&seen.1).chain(&seen.2).all(|&n| n == 1);
        if ok {
            Ok(())
        } else {
            Err(OrbifoldError::InvalidSplitting("blocks do not cover the generators exactly once".into()))
        }
    }
}

// ---------------------------------------------------------------------------
// Inclusions and splittings

/// Piece generator to ambient word.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct InclusionMap {
    pub table: BTreeMap<String, Word>,
}

impl InclusionMap {
    pub fn get(&self, g: Generator) -> &Word {
        self.table.get(&g.name()).unwrap_or_else(|| panic!("inclusion map has no image for {g}"))
    }

    pub fn insert(&mut self, g: Generator, w: Word) {
        self.table.insert(g.name(), w);
    }

    pub fn apply(&self, w: &Word) -> Word {
        w.substitute(|g| self.get(g).clone())
    }

    pub fn identity(sig: &OrbifoldSignature) -> Self {
        let mut m = InclusionMap::default();
        for g in sig.generators() {
            m.insert(g, Word::gen(g));
        }
        m
    }
}

/// A curve of a splitting, described against the ambient canonical presentation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type")]
pub enum CurveSpec {
    /// Encircles the contiguous run of relator blocks `first..=last` (1-based,
    /// counted in the canonical order handles, boundaries, cones).
    #[serde(rename = "scc-separating")]
    SccSeparating { first: usize, last: usize },
    /// The curve `y_k` of handle `k`; `x_k` becomes the stable letter.
    #[serde(rename = "scc-nonseparating")]
    SccNonSeparating { handle: usize },
    /// Segment joining cone points `i < j`, both of order two.
    #[serde(rename = "full-suborbifold")]
    FullSuborbifold { i: usize, j: usize },
}

impl CurveSpec {
    pub fn is_scc(&self) -> bool {
        !matches!(self, CurveSpec::FullSuborbifold { .. })
    }
}

/// Where a boundary generator of some piece ended up.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PieceGen {
    pub piece: usize,
    pub gen: Generator,
}

impl Serialize for Generator {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.name())
    }
}

impl<'de> Deserialize<'de> for Generator {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Attachment data of one curve after all cuts have been made.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum CurveData {
    /// `outer` lies on the side containing the root piece; both boundary
    /// generators map to the same ambient word `xi` (as `xi` and `xi^-1`).
    Separating { xi: Word, outer: PieceGen, inner: PieceGen },
    /// `ι(z_a) = x y x^-1`, `ι(z_b) = y^-1` with `y = xi` and stable letter `x`.
    NonSeparating { xi: Word, stable: Word, stable_gen: Generator, za: PieceGen, zb: PieceGen },
    /// `ι(z) = s_i (B s_j B^-1)`; `first` is `s_i`, `second` is `B s_j B^-1`.
    Full { xi: Word, z: PieceGen, first: Word, second: Word, cone_i: usize, cone_j: usize, between: Word },
}

impl CurveData {
    pub fn xi(&self) -> &Word {
        match self {
            CurveData::Separating { xi, .. } | CurveData::NonSeparating { xi, .. } | CurveData::Full { xi, .. } => xi,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Piece {
    pub presentation: Presentation,
    pub inclusion: InclusionMap,
}

impl Piece {
    pub fn signature(&self) -> &OrbifoldSignature {
        &self.presentation.signature
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplittingSpec {
    pub ambient: OrbifoldSignature,
    pub curves: Vec<CurveSpec>,
    pub pieces: Vec<Piece>,
    pub curve_data: Vec<CurveData>,
    /// Ambient generators that are themselves generators of some piece.
    pub owners: BTreeMap<String, PieceGen>,
}

impl SplittingSpec {
    /// Ambient words along which cocycles must be parabolic: the curve words.
    pub fn curve_words(&self) -> Vec<Word> {
        self.curve_data.iter().map(|d| d.xi().clone()).collect()
    }
}

/// Working state of the cutting procedure.
#[derive(Clone)]
struct WorkPiece {
    sig: OrbifoldSignature,
    /// piece-level blocks together with the ambient block span each covers
    blocks: Vec<(Block, (usize, usize))>,
    inclusion: InclusionMap,
}

impl WorkPiece {
    fn presentation(&self) -> Presentation {
        Presentation { signature: self.sig.clone(), blocks: self.blocks.iter().map(|b| b.0).collect() }
    }

    fn block_word_ambient(&self, b: Block) -> Word {
        self.inclusion.apply(&b.word())
    }
}

/// Rebuilds a piece from a block list over old generators, renumbering
/// generators by order of appearance. Returns the piece and the old-to-new map
/// (for generators that survive).
fn renumber(
    old: &WorkPiece,
    blocks: Vec<(OldBlock, (usize, usize))>,
) -> (WorkPiece, BTreeMap<Generator, Generator>) {
    let (mut h, mut b, mut c) = (0usize, 0usize, 0usize);
    let mut cones = Vec::new();
    let mut map = BTreeMap::new();
    let mut inclusion = InclusionMap::default();
    let mut out_blocks = Vec::new();
    for (ob, span) in blocks {
        match ob {
            OldBlock::Handle(i) => {
                h += 1;
                map.insert(Generator::x(i), Generator::x(h));
                map.insert(Generator::y(i), Generator::y(h));
                inclusion.insert(Generator::x(h), old.inclusion.get(Generator::x(i)).clone());
                inclusion.insert(Generator::y(h), old.inclusion.get(Generator::y(i)).clone());
                out_blocks.push((Block::Handle(h), span));
            }
            OldBlock::Boundary(j) => {
                b += 1;
                map.insert(Generator::z(j), Generator::z(b));
                inclusion.insert(Generator::z(b), old.inclusion.get(Generator::z(j)).clone());
                out_blocks.push((Block::Boundary(b), span));
            }
            OldBlock::Cone(k) => {
                c += 1;
                cones.push(old.sig.cone_order(k));
                map.insert(Generator::s(k), Generator::s(c));
                inclusion.insert(Generator::s(c), old.inclusion.get(Generator::s(k)).clone());
                out_blocks.push((Block::Cone(c), span));
            }
            OldBlock::NewBoundary(ref w) => {
                b += 1;
                inclusion.insert(Generator::z(b), w.clone());
                out_blocks.push((Block::Boundary(b), span));
            }
        }
    }
    let piece = WorkPiece { sig: OrbifoldSignature::new(h, b, cones), blocks: out_blocks, inclusion };
    (piece, map)
}

/// Block over the generators of the piece being cut, or a fresh boundary with
/// its ambient image.
#[derive(Clone)]
enum OldBlock {
    Handle(usize),
    Boundary(usize),
    Cone(usize),
    NewBoundary(Word),
}

impl From<Block> for OldBlock {
    fn from(b: Block) -> Self {
        match b {
            Block::Handle(i) => OldBlock::Handle(i),
            Block::Boundary(j) => OldBlock::Boundary(j),
            Block::Cone(k) => OldBlock::Cone(k),
        }
    }
}

/// Identifier of a tracked boundary: (curve index, slot).
type TrackKey = (usize, u8);

struct Cutter {
    ambient: OrbifoldSignature,
    pieces: Vec<WorkPiece>,
    tracked: BTreeMap<TrackKey, PieceGen>,
    owners: BTreeMap<Generator, PieceGen>,
}

impl Cutter {
    fn new(sig: &OrbifoldSignature) -> Self {
        let p = Presentation::canonical(sig);
        let blocks = p.blocks.iter().enumerate().map(|(k, &b)| (b, (k + 1, k + 1))).collect();
        let piece = WorkPiece { sig: sig.clone(), blocks, inclusion: InclusionMap::identity(sig) };
        let owners = sig.generators().into_iter().map(|g| (g, PieceGen { piece: 0, gen: g })).collect();
        Cutter { ambient: sig.clone(), pieces: vec![piece], tracked: BTreeMap::new(), owners }
    }

    /// Applies a generator relabelling of piece `p` into possibly several new pieces.
    fn relabel(&mut self, p: usize, maps: &[(usize, BTreeMap<Generator, Generator>)]) {
        let lookup = |g: Generator| -> Option<PieceGen> {
            maps.iter().find_map(|(np, m)| m.get(&g).map(|&ng| PieceGen { piece: *np, gen: ng }))
        };
        for v in self.tracked.values_mut().chain(self.owners.values_mut()) {
            if v.piece == p {
                // generators consumed by a cut keep their stale entry; callers
                // remove them before relabelling
                if let Some(n) = lookup(v.gen) {
                    *v = n;
                }
            }
        }
    }

    fn find_block(&self, pred: impl Fn(Block, (usize, usize)) -> bool) -> Option<(usize, usize)> {
        for (pi, piece) in self.pieces.iter().enumerate() {
            for (bi, &(b, span)) in piece.blocks.iter().enumerate() {
                if pred(b, span) {
                    return Some((pi, bi));
                }
            }
        }
        None
    }

    fn check_piece(sig: &OrbifoldSignature, what: &str) -> Result<(), OrbifoldError> {
        if sig.euler_characteristic() >= Rational::zero() {
            return Err(OrbifoldError::EulerObstruction(format!(
                "{what} would have euler characteristic {} (genus {}, {} boundary, cones {:?})",
                sig.euler_characteristic(),
                sig.genus,
                sig.boundary,
                sig.cone_orders
            )));
        }
        Ok(())
    }

    fn cut_full(&mut self, ci: usize, i: usize, j: usize) -> Result<CurveData, OrbifoldError> {
        let amb = &self.ambient;
        if i == j || i == 0 || j == 0 || i > amb.cone_count() || j > amb.cone_count() {
            return Err(OrbifoldError::InvalidSplitting(format!("bad cone pair ({i}, {j})")));
        }
        let (i, j) = (i.min(j), i.max(j));
        for k in [i, j] {
            if amb.cone_order(k) != 2 {
                return Err(OrbifoldError::NotOrderTwo { cone: k, order: amb.cone_order(k) });
            }
        }
        let off = amb.genus + amb.boundary;
        let (bi, bj) = (off + i, off + j);
        let (pi, qi) = self
            .find_block(|b, s| matches!(b, Block::Cone(_)) && s == (bi, bi))
            .ok_or_else(|| OrbifoldError::InvalidSplitting(format!("cone {i} already consumed")))?;
        let (pj, qj) = self
            .find_block(|b, s| matches!(b, Block::Cone(_)) && s == (bj, bj))
            .ok_or_else(|| OrbifoldError::InvalidSplitting(format!("cone {j} already consumed")))?;
        if pi != pj {
            return Err(OrbifoldError::InvalidSplitting("cone pair lies in different pieces".into()));
        }
        let old = self.pieces[pi].clone();
        let between: Vec<Block> = old.blocks[qi + 1..qj].iter().map(|b| b.0).collect();
        let bw: Vec<Word> = between.iter().map(|&b| old.block_word_ambient(b)).collect();
        let b_word = Word::product(bw.iter());
        let first = old.block_word_ambient(old.blocks[qi].0);
        let sj = old.block_word_ambient(old.blocks[qj].0);
        let second = b_word.multiply(&sj).multiply(&b_word.inverse());
        let xi = first.multiply(&second);
        let mut nb: Vec<(OldBlock, (usize, usize))> = Vec::new();
        for (q, &(b, span)) in old.blocks.iter().enumerate() {
            if q == qi {
                nb.push((OldBlock::NewBoundary(xi.clone()), (bi, bj)));
            } else if q != qj {
                nb.push((b.into(), span));
            }
        }
        let new_index = old.sig.boundary + 1;
        let (piece, map) = renumber(&old, nb);
        Self::check_piece(&piece.sig, "piece")?;
        // locate the fresh boundary: the boundary block with span (bi, bj)
        let zgen = piece
            .blocks
            .iter()
            .find_map(|&(b, s)| match b {
                Block::Boundary(k) if s == (bi, bj) => Some(Generator::z(k)),
                _ => None,
            })
            .expect("fresh boundary");
        let _ = new_index;
        self.pieces[pi] = piece;
        self.owners.remove(&Generator::s(i));
        self.owners.remove(&Generator::s(j));
        self.relabel(pi, &[(pi, map)]);
        let z = PieceGen { piece: pi, gen: zgen };
        self.tracked.insert((ci, 0), z);
        Ok(CurveData::Full { xi, z, first, second, cone_i: i, cone_j: j, between: b_word })
    }

    fn cut_handle(&mut self, ci: usize, k: usize) -> Result<CurveData, OrbifoldError> {
        if k == 0 || k > self.ambient.genus {
            return Err(OrbifoldError::InvalidSplitting(format!("no handle {k}")));
        }
        let (pi, qi) = self
            .find_block(|b, s| matches!(b, Block::Handle(_)) && s == (k, k))
            .ok_or_else(|| OrbifoldError::InvalidSplitting(format!("handle {k} already consumed")))?;
        let old = self.pieces[pi].clone();
        let h = match old.blocks[qi].0 {
            Block::Handle(h) => h,
            _ => unreachable!(),
        };
        let x = old.inclusion.get(Generator::x(h)).clone();
        let y = old.inclusion.get(Generator::y(h)).clone();
        let za = x.multiply(&y).multiply(&x.inverse());
        let zb = y.inverse();
        let mut nb: Vec<(OldBlock, (usize, usize))> = Vec::new();
        for (q, &(b, span)) in old.blocks.iter().enumerate() {
            if q == qi {
                nb.push((OldBlock::NewBoundary(za.clone()), (k, k)));
                nb.push((OldBlock::NewBoundary(zb.clone()), (k, k)));
            } else {
                nb.push((b.into(), span));
            }
        }
        let (piece, map) = renumber(&old, nb);
        Self::check_piece(&piece.sig, "piece")?;
        let fresh: Vec<Generator> = piece
            .blocks
            .iter()
            .filter_map(|&(b, s)| match b {
                Block::Boundary(j) if s == (k, k) => Some(Generator::z(j)),
                _ => None,
            })
            .collect();
        self.pieces[pi] = piece;
        self.owners.remove(&Generator::x(k));
        self.owners.remove(&Generator::y(k));
        self.relabel(pi, &[(pi, map)]);
        let za_pg = PieceGen { piece: pi, gen: fresh[0] };
        let zb_pg = PieceGen { piece: pi, gen: fresh[1] };
        self.tracked.insert((ci, 0), za_pg);
        self.tracked.insert((ci, 1), zb_pg);
        Ok(CurveData::NonSeparating { xi: y, stable: x, stable_gen: Generator::x(k), za: za_pg, zb: zb_pg })
    }

    fn cut_interval(&mut self, ci: usize, first: usize, last: usize) -> Result<CurveData, OrbifoldError> {
        let n = self.ambient.genus + self.ambient.boundary + self.ambient.cone_count();
        if first == 0 || first > last || last > n {
            return Err(OrbifoldError::InvalidSplitting(format!("bad block interval {first}..={last}")));
        }
        if first == 1 && last == n {
            return Err(OrbifoldError::InvalidSplitting("interval covers every block".into()));
        }
        let inside = |s: (usize, usize)| s.0 >= first && s.1 <= last;
        let overlaps = |s: (usize, usize)| s.1 >= first && s.0 <= last;
        let mixed: Vec<usize> = (0..self.pieces.len())
            .filter(|&p| {
                let bl = &self.pieces[p].blocks;
                bl.iter().any(|&(_, s)| inside(s)) && bl.iter().any(|&(_, s)| !inside(s))
            })
            .collect();
        if mixed.len() != 1 {
            return Err(OrbifoldError::InvalidSplitting(format!(
                "interval {first}..={last} does not bound a single region"
            )));
        }
        let pi = mixed[0];
        let old = self.pieces[pi].clone();
        let sel: Vec<usize> = (0..old.blocks.len()).filter(|&q| inside(old.blocks[q].1)).collect();
        let contiguous = sel.windows(2).all(|w| w[1] == w[0] + 1);
        let partial = old.blocks.iter().any(|&(_, s)| overlaps(s) && !inside(s));
        if !contiguous || partial {
            return Err(OrbifoldError::InvalidSplitting(format!(
                "interval {first}..={last} crosses another curve"
            )));
        }
        let (a, b) = (sel[0], *sel.last().unwrap());
        let sw: Vec<Word> = old.blocks[a..=b].iter().map(|&(bl, _)| old.block_word_ambient(bl)).collect();
        let xi = Word::product(sw.iter());
        let mut outer_blocks: Vec<(OldBlock, (usize, usize))> = Vec::new();
        for &(bl, s) in &old.blocks[..a] {
            outer_blocks.push((bl.into(), s));
        }
        outer_blocks.push((OldBlock::NewBoundary(xi.clone()), (first, last)));
        for &(bl, s) in &old.blocks[b + 1..] {
            outer_blocks.push((bl.into(), s));
        }
        let mut inner_blocks: Vec<(OldBlock, (usize, usize))> =
            old.blocks[a..=b].iter().map(|&(bl, s)| (bl.into(), s)).collect();
        inner_blocks.push((OldBlock::NewBoundary(xi.inverse()), (first, last)));
        let (outer, omap) = renumber(&old, outer_blocks);
        let (inner, imap) = renumber(&old, inner_blocks);
        Self::check_piece(&outer.sig, "outer piece")?;
        Self::check_piece(&inner.sig, "inner piece")?;
        // the fresh boundary sits where the interval was in the outer piece and
        // last in the inner one; spans alone are ambiguous after a handle cut
        let fresh = |b: Block| match b {
            Block::Boundary(j) => Generator::z(j),
            _ => unreachable!("fresh block is a boundary"),
        };
        let (zo, zi) = (fresh(outer.blocks[a].0), fresh(inner.blocks.last().expect("nonempty").0));
        let new_p = self.pieces.len();
        self.pieces[pi] = outer;
        self.pieces.push(inner);
        self.relabel(pi, &[(pi, omap), (new_p, imap)]);
        let outer_pg = PieceGen { piece: pi, gen: zo };
        let inner_pg = PieceGen { piece: new_p, gen: zi };
        self.tracked.insert((ci, 0), outer_pg);
        self.tracked.insert((ci, 1), inner_pg);
        Ok(CurveData::Separating { xi, outer: outer_pg, inner: inner_pg })
    }
}

/// Cuts along all curves: full suborbifolds first, then handle curves, then
/// separating curves from the innermost outward.
pub fn split(sig: &OrbifoldSignature, curves: &[CurveSpec]) -> Result<SplittingSpec, OrbifoldError> {
    sig.validate()?;
    let mut order: Vec<usize> = (0..curves.len()).collect();
    order.sort_by_key(|&c| match curves[c] {
        CurveSpec::FullSuborbifold { .. } => (0, 0, c),
        CurveSpec::SccNonSeparating { .. } => (1, 0, c),
        CurveSpec::SccSeparating { first, last } => (2, last.saturating_sub(first), c),
    });
    let mut cutter = Cutter::new(sig);
    let mut data: Vec<Option<CurveData>> = vec![None; curves.len()];
    for &c in &order {
        let d = match curves[c] {
            CurveSpec::FullSuborbifold { i, j } => cutter.cut_full(c, i, j)?,
            CurveSpec::SccNonSeparating { handle } => cutter.cut_handle(c, handle)?,
            CurveSpec::SccSeparating { first, last } => cutter.cut_interval(c, first, last)?,
        };
        data[c] = Some(d);
    }
    // refresh attachment points that moved under later cuts
    let curve_data = data
        .into_iter()
        .enumerate()
        .map(|(c, d)| {
            let d = d.expect("every curve cut");
            let t = |slot: u8| cutter.tracked[&(c, slot)];
            match d {
                CurveData::Separating { xi, .. } => CurveData::Separating { xi, outer: t(0), inner: t(1) },
                CurveData::NonSeparating { xi, stable, stable_gen, .. } => {
                    CurveData::NonSeparating { xi, stable, stable_gen, za: t(0), zb: t(1) }
                }
                CurveData::Full { xi, first, second, cone_i, cone_j, between, .. } => {
                    CurveData::Full { xi, z: t(0), first, second, cone_i, cone_j, between }
                }
            }
        })
        .collect();
    let pieces =
        cutter.pieces.iter().map(|wp| Piece { presentation: wp.presentation(), inclusion: wp.inclusion.clone() }).collect();
    let owners = cutter.owners.iter().map(|(g, pg)| (g.name(), *pg)).collect();
    Ok(SplittingSpec { ambient: sig.clone(), curves: curves.to_vec(), pieces, curve_data, owners })
}

pub fn split_full_suborbifold(sig: &OrbifoldSignature, i: usize, j: usize) -> Result<SplittingSpec, OrbifoldError> {
    split(sig, &[CurveSpec::FullSuborbifold { i, j }])
}

pub fn split_scc(sig: &OrbifoldSignature, curve: &CurveSpec) -> Result<SplittingSpec, OrbifoldError> {
    if !curve.is_scc() {
        return Err(OrbifoldError::InvalidSplitting("not a simple closed curve".into()));
    }
    split(sig, std::slice::from_ref(curve))
}

/// Unit of the canonical pants decomposition: a handle, a paired couple of
/// order-two cones, or a single cone.
#[derive(Debug, Clone, Copy)]
enum Unit {
    Handle(usize),
    Pair(usize),
    Cone(usize),
}

/// The canonical decomposition: order-two cones paired lowest index first
/// (each pair must be adjacent in the cone list), every handle cut along `y_k`,
/// every handle encircled, and a chain of nested prefix curves.
pub fn pants_decomposition(sig: &OrbifoldSignature) -> Result<SplittingSpec, OrbifoldError> {
    sig.validate()?;
    if sig.boundary != 0 {
        return Err(OrbifoldError::InvalidSignature("pants decomposition needs a closed orbifold".into()));
    }
    let g = sig.genus;
    let twos: Vec<usize> = (1..=sig.cone_count()).filter(|&k| sig.cone_order(k) == 2).collect();
    let mut curves = Vec::new();
    let mut paired = vec![false; sig.cone_count() + 1];
    for pair in twos.chunks(2) {
        if let [i, j] = *pair {
            if j != i + 1 {
                return Err(OrbifoldError::InvalidSignature(format!(
                    "paired order-two cones {i} and {j} are not adjacent; list order-two cones consecutively"
                )));
            }
            paired[i] = true;
            paired[j] = true;
            curves.push(CurveSpec::FullSuborbifold { i, j });
        }
    }
    for k in 1..=g {
        curves.push(CurveSpec::SccNonSeparating { handle: k });
    }
    let mut units = Vec::new();
    units.extend((1..=g).map(Unit::Handle));
    let mut k = 1;
    while k <= sig.cone_count() {
        if paired[k] {
            units.push(Unit::Pair(k));
            k += 2;
        } else {
            units.push(Unit::Cone(k));
            k += 1;
        }
    }
    let span = |u: &Unit| match *u {
        Unit::Handle(h) => (h, h),
        Unit::Pair(c) => (g + c, g + c + 1),
        Unit::Cone(c) => (g + c, g + c),
    };
    let n_units = units.len();
    let n_blocks = g + sig.cone_count();
    let mut intervals: Vec<(usize, usize)> = Vec::new();
    let chi_side = |lo: usize, hi: usize| -> Rational {
        // side made of the units inside [lo, hi] plus one boundary
        let mut chi = Rational::from_integer(1);
        for u in &units {
            let s = span(u);
            if s.0 >= lo && s.1 <= hi {
                chi += match *u {
                    Unit::Handle(_) => Rational::from_integer(-2),
                    Unit::Pair(_) => Rational::from_integer(-1),
                    Unit::Cone(c) => Rational::new(1, sig.cone_order(c) as i64) - Rational::one(),
                };
            }
        }
        chi
    };
    let push = |lo: usize, hi: usize, intervals: &mut Vec<(usize, usize)>| {
        let complement_lo = if lo == 1 { hi + 1 } else { 1 };
        let complement_hi = if lo == 1 { n_blocks } else { lo - 1 };
        let complement_is_interval = lo == 1 || hi == n_blocks;
        let dup = complement_is_interval && intervals.contains(&(complement_lo, complement_hi));
        let chi_in = chi_side(lo, hi);
        let chi_out = sig.euler_characteristic() - chi_in;
        if !dup && !intervals.contains(&(lo, hi)) && chi_in < Rational::zero() && chi_out < Rational::zero() {
            intervals.push((lo, hi));
        }
    };
    for u in &units {
        if let Unit::Handle(h) = *u {
            push(h, h, &mut intervals);
        }
    }
    for m in 2..n_units.saturating_sub(1) {
        let lo = span(&units[0]).0;
        let hi = span(&units[m - 1]).1;
        push(lo, hi, &mut intervals);
    }
    curves.extend(intervals.into_iter().map(|(first, last)| CurveSpec::SccSeparating { first, last }));
    split(sig, &curves)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::words::Word;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    #[test]
    fn euler_characteristics() {
        assert_eq!(OrbifoldSignature::new(2, 0, vec![]).euler_characteristic(), q(-2, 1));
        assert_eq!(OrbifoldSignature::new(0, 0, vec![2, 2, 3, 3]).euler_characteristic(), q(-1, 3));
        assert!(matches!(
            OrbifoldSignature::new(0, 0, vec![2, 2, 2, 2]).validate(),
            Err(OrbifoldError::InvalidSignature(_))
        ));
        assert!(OrbifoldSignature::new(0, 0, vec![2, 3, 1]).validate().is_err());
    }

    #[test]
    fn closed_dimensions() {
        assert_eq!(OrbifoldSignature::new(2, 0, vec![]).dimension_closed().unwrap(), 16);
        assert_eq!(OrbifoldSignature::new(0, 0, vec![2, 2, 3, 3]).dimension_closed().unwrap(), 4);
        assert_eq!(OrbifoldSignature::new(0, 0, vec![2, 3, 7]).dimension_closed().unwrap(), 0);
        assert!(OrbifoldSignature::new(0, 3, vec![]).dimension_closed().is_err());
    }

    #[test]
    fn full_suborbifold_split() {
        let sig = OrbifoldSignature::new(0, 0, vec![2, 2, 3, 3]);
        let sp = split_full_suborbifold(&sig, 1, 2).unwrap();
        assert_eq!(sp.pieces.len(), 1);
        let p = &sp.pieces[0];
        assert_eq!(p.signature(), &OrbifoldSignature::new(0, 1, vec![3, 3]));
        assert_eq!(p.inclusion.get(Generator::z(1)), &"s1 s2".parse::<Word>().unwrap());
        assert_eq!(p.inclusion.apply(&p.presentation.relator()), canonical(&sig));

        let sig5 = OrbifoldSignature::new(0, 0, vec![2, 2, 2, 2, 2]);
        let sp5 = split_full_suborbifold(&sig5, 1, 2).unwrap();
        assert_eq!(sp5.pieces[0].signature().euler_characteristic(), q(-1, 2));

        let tri = OrbifoldSignature::new(0, 0, vec![2, 3, 7]);
        assert!(matches!(split_full_suborbifold(&tri, 1, 2), Err(OrbifoldError::NotOrderTwo { cone: 2, .. })));
    }

    fn canonical(sig: &OrbifoldSignature) -> Word {
        Presentation::canonical(sig).relator()
    }

    #[test]
    fn genus_two_separating() {
        let sig = OrbifoldSignature::new(2, 0, vec![]);
        let sp = split_scc(&sig, &CurveSpec::SccSeparating { first: 1, last: 1 }).unwrap();
        assert_eq!(sp.pieces.len(), 2);
        for p in &sp.pieces {
            assert_eq!(p.signature(), &OrbifoldSignature::new(1, 1, vec![]));
        }
        let inner = &sp.pieces[1];
        assert_eq!(inner.inclusion.get(Generator::z(1)), &"x1 y1 x1^-1 y1^-1".parse::<Word>().unwrap().inverse());
        assert!(inner.inclusion.apply(&inner.presentation.relator()).is_identity());
        let outer = &sp.pieces[0];
        assert_eq!(outer.inclusion.apply(&outer.presentation.relator()), canonical(&sig));
    }

    #[test]
    fn genus_two_nonseparating() {
        let sig = OrbifoldSignature::new(2, 0, vec![]);
        let sp = split_scc(&sig, &CurveSpec::SccNonSeparating { handle: 1 }).unwrap();
        assert_eq!(sp.pieces.len(), 1);
        let p = &sp.pieces[0];
        assert_eq!(p.signature(), &OrbifoldSignature::new(1, 2, vec![]));
        assert_eq!(p.inclusion.apply(&p.presentation.relator()), canonical(&sig));
    }

    #[test]
    fn annulus_obstruction() {
        let sig = OrbifoldSignature::new(1, 1, vec![]);
        assert!(matches!(
            split_scc(&sig, &CurveSpec::SccSeparating { first: 1, last: 1 }),
            Err(OrbifoldError::EulerObstruction(_))
        ));
    }

    #[test]
    fn pants_counts() {
        let cases: Vec<(OrbifoldSignature, usize, usize)> = vec![
            (OrbifoldSignature::new(2, 0, vec![]), 3, 2),
            (OrbifoldSignature::new(0, 0, vec![2, 2, 3, 3]), 0, 1),
            (OrbifoldSignature::new(1, 0, vec![3]), 1, 1),
            (OrbifoldSignature::new(3, 0, vec![]), 6, 4),
            (OrbifoldSignature::new(0, 0, vec![3, 3, 4, 5, 7]), 2, 3),
            (OrbifoldSignature::new(1, 0, vec![2, 2, 3]), 2, 2),
            (OrbifoldSignature::new(2, 0, vec![5]), 4, 3),
        ];
        for (sig, j, pieces) in cases {
            let sp = pants_decomposition(&sig).unwrap();
            let p = sig.order_two_count() / 2;
            let scc = sp.curves.iter().filter(|c| c.is_scc()).count();
            assert_eq!(scc, j, "{sig:?}");
            assert_eq!(scc as i64, 3 * sig.genus as i64 - 3 + sig.cone_count() as i64 - p as i64);
            assert_eq!(sp.curves.len() - scc, p);
            assert_eq!(sp.pieces.len(), pieces, "{sig:?}");
            for pc in &sp.pieces {
                let s = pc.signature();
                assert_eq!((s.genus, s.boundary + s.cone_count()), (0, 3), "{sig:?} piece {s:?}");
            }
        }
    }
}
