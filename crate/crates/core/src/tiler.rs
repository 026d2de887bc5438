//! Tile execution orders: bounding-box padding, the cache-oblivious orthant
//! recursion, the single-level lexicographic tile order, and wavefront
//! phases.

use std::fmt::{self, Write as _};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kernel::{embed, Prdg};
use crate::poly::{Domain, IntVec, OrthantBox, PolyError};

#[derive(Debug, Error)]
pub enum TileError {
    #[error("tile spec has {got} sizes, the tilable band has {expected}")]
    Width { expected: usize, got: usize },
    #[error("tile sizes must be positive, got {0}")]
    NonPositive(IntVec),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

pub type Result<T> = std::result::Result<T, TileError>;

/// Per-dimension base-case thresholds over the tilable band.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TileSpec {
    pub leaf: IntVec,
}

impl TileSpec {
    pub fn new(leaf: Vec<i64>) -> Result<Self> {
        if leaf.is_empty() || leaf.iter().any(|&b| b <= 0) {
            return Err(TileError::NonPositive(IntVec(leaf)));
        }
        Ok(TileSpec { leaf: IntVec(leaf) })
    }

    pub fn dim(&self) -> usize {
        self.leaf.dim()
    }
}

impl fmt::Display for TileSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.leaf.iter().map(|b| b.to_string()).collect();
        f.write_str(&parts.join("x"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PaddedBox {
    pub bx: OrthantBox,
    pub levels: IntVec,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Untiled,
    Slt,
    Cot,
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::Untiled => "untiled",
            Scheme::Slt => "slt",
            Scheme::Cot => "cot",
        })
    }
}

impl std::str::FromStr for Scheme {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "untiled" => Ok(Scheme::Untiled),
            "slt" => Ok(Scheme::Slt),
            "cot" => Ok(Scheme::Cot),
            _ => Err(format!("unknown scheme `{s}` (expected untiled, slt or cot)")),
        }
    }
}

/// Ordered leaf boxes over the full nest depth.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TileOrder {
    pub scheme: Scheme,
    pub leaves: Vec<OrthantBox>,
    /// Per leaf: outer untiled values, then one orthant bit-sum per level.
    pub phases: Option<Vec<Vec<i64>>>,
    /// Recursive invocations, early exits included (COT only).
    pub nodes: usize,
}

impl TileOrder {
    /// One line per leaf: `origin=(..) size=(..) phase=a.b.c`.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        for (k, leaf) in self.leaves.iter().enumerate() {
            write!(s, "{leaf}").unwrap();
            if let Some(ph) = &self.phases {
                let path: Vec<String> = ph[k].iter().map(|x| x.to_string()).collect();
                write!(s, " phase={}", path.join(".")).unwrap();
            }
            s.push('\n');
        }
        s
    }
}

/// Which early exits the recursion applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CotOptions {
    pub zero_exit: bool,
    pub empty_exit: bool,
}

impl Default for CotOptions {
    fn default() -> Self {
        CotOptions {
            zero_exit: true,
            empty_exit: true,
        }
    }
}

/// Least `k` with `b * 2^k >= n` per dimension.
pub fn pad_box(bb: &OrthantBox, t: &TileSpec) -> PaddedBox {
    assert_eq!(bb.dim(), t.dim(), "box and tile spec widths differ");
    let mut size = Vec::with_capacity(bb.dim());
    let mut levels = Vec::with_capacity(bb.dim());
    for (&n, &b) in bb.size.iter().zip(t.leaf.iter()) {
        assert!(b > 0, "tile sizes must be positive");
        let mut k = 0;
        let mut s = b;
        while s < n {
            s = s.checked_mul(2).expect("padded extent overflows");
            k += 1;
        }
        size.push(s);
        levels.push(k);
    }
    PaddedBox {
        bx: OrthantBox::new(bb.origin.clone(), IntVec(size)),
        levels: IntVec(levels),
    }
}

/// The `2^d` children of `bx` in bit-lexicographic order, dimension 0 most
/// significant. Dimensions already at leaf size keep their full extent in
/// the first half and get a zero-size second half.
pub fn split_orthants(bx: &OrthantBox, t: &TileSpec) -> Vec<OrthantBox> {
    let d = bx.dim();
    let halves: Vec<[(i64, i64); 2]> = (0..d)
        .map(|k| {
            let (o, s) = (bx.origin[k], bx.size[k]);
            if s > t.leaf[k] {
                let first = s - s / 2;
                [(o, first), (o + first, s - first)]
            } else {
                [(o, s), (o + s, 0)]
            }
        })
        .collect();
    (0..1usize << d)
        .map(|bits| {
            let mut origin = Vec::with_capacity(d);
            let mut size = Vec::with_capacity(d);
            for (k, h) in halves.iter().enumerate() {
                let bit = (bits >> (d - 1 - k)) & 1;
                origin.push(h[bit].0);
                size.push(h[bit].1);
            }
            OrthantBox::new(IntVec(origin), IntVec(size))
        })
        .collect()
}

/// Box emptiness against every statement domain, compiled once: for each
/// statement, the rational shadow of `domain ∧ box(o, s)` on `(o, s)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmptinessTest {
    pub depth: usize,
    pub param_dim: usize,
    /// Per statement, rows over `(o, s, params, 1)`.
    pub rows: Vec<Vec<Vec<i64>>>,
}

impl EmptinessTest {
    /// `p` must be perfect (see [`embed`]).
    pub fn compile(p: &Prdg) -> Result<Self> {
        let d = p.depth();
        let np = p.params.len();
        let mut all = Vec::with_capacity(p.statements.len());
        for s in &p.statements {
            // space (z, o, s, params, 1)
            let w = 3 * d + np + 1;
            let mut rows = Vec::new();
            for r in &s.domain.rows {
                let mut row = vec![0; w];
                row[..d].copy_from_slice(&r[..d]);
                row[3 * d..].copy_from_slice(&r[d..]);
                rows.push(row);
            }
            for k in 0..d {
                let mut lo = vec![0; w];
                lo[k] = 1;
                lo[d + k] = -1;
                rows.push(lo);
                let mut hi = vec![0; w];
                hi[k] = -1;
                hi[d + k] = 1;
                hi[2 * d + k] = 1;
                hi[w - 1] = -1;
                rows.push(hi);
            }
            let dom = Domain::new(3 * d, np, rows)?;
            let z: Vec<usize> = (0..d).collect();
            all.push(dom.fm_project(&z)?.rows);
        }
        Ok(EmptinessTest {
            depth: d,
            param_dim: np,
            rows: all,
        })
    }

    pub fn bind(&self, params: &[i64]) -> BoundEmptiness {
        let d = self.depth;
        let rows = self
            .rows
            .iter()
            .map(|stmt| {
                stmt.iter()
                    .map(|r| {
                        let mut out = r[..2 * d].to_vec();
                        let c: i64 = r[2 * d..2 * d + self.param_dim]
                            .iter()
                            .zip(params)
                            .map(|(a, b)| a * b)
                            .sum::<i64>()
                            + r[2 * d + self.param_dim];
                        out.push(c);
                        out
                    })
                    .collect()
            })
            .collect();
        BoundEmptiness { depth: d, rows }
    }
}

/// [`EmptinessTest`] with parameters substituted.
#[derive(Debug, Clone)]
pub struct BoundEmptiness {
    depth: usize,
    rows: Vec<Vec<Vec<i64>>>,
}

impl BoundEmptiness {
    /// True when no statement domain has a rational point in the box.
    pub fn is_empty(&self, bx: &OrthantBox) -> bool {
        let d = self.depth;
        !self.rows.iter().any(|stmt| {
            stmt.iter().all(|r| {
                let mut acc = r[2 * d];
                for k in 0..d {
                    acc += r[k] * bx.origin[k] + r[d + k] * bx.size[k];
                }
                acc >= 0
            })
        })
    }
}

/// Everything the order generators need for one kernel at fixed
/// parameters.
#[derive(Debug, Clone)]
pub struct TilingContext {
    pub prdg: Prdg,
    pub params: Vec<i64>,
    pub bbox: OrthantBox,
    pub emptiness: BoundEmptiness,
    pub band: std::ops::Range<usize>,
}

impl TilingContext {
    pub fn new(p: &Prdg, params: &[i64]) -> Result<Self> {
        let prdg = embed(p);
        let bbox = union_bbox(&prdg, params)?;
        let emptiness = EmptinessTest::compile(&prdg)?.bind(params);
        let band = prdg.tilable_band[0]..prdg.tilable_band[prdg.tilable_band.len() - 1] + 1;
        Ok(TilingContext {
            prdg,
            params: params.to_vec(),
            bbox,
            emptiness,
            band,
        })
    }

    fn check_spec(&self, t: &TileSpec) -> Result<()> {
        if t.dim() != self.band.len() {
            return Err(TileError::Width {
                expected: self.band.len(),
                got: t.dim(),
            });
        }
        if t.leaf.iter().any(|&b| b <= 0) {
            return Err(TileError::NonPositive(t.leaf.clone()));
        }
        Ok(())
    }

    pub fn band_box(&self) -> OrthantBox {
        OrthantBox::new(
            IntVec(self.bbox.origin[self.band.clone()].to_vec()),
            IntVec(self.bbox.size[self.band.clone()].to_vec()),
        )
    }

    /// Values of the untiled dimensions outside the band, lexicographic.
    fn outer_points(&self) -> Vec<Vec<i64>> {
        let r = 0..self.band.start;
        let bx = OrthantBox::new(
            IntVec(self.bbox.origin[r.clone()].to_vec()),
            IntVec(self.bbox.size[r].to_vec()),
        );
        bx.points().collect()
    }

    /// Full-depth box: fixed outer values, the band box, full inner extent.
    pub fn full_box(&self, outer: &[i64], band: &OrthantBox) -> OrthantBox {
        let mut origin = outer.to_vec();
        let mut size = vec![1; outer.len()];
        origin.extend_from_slice(&band.origin);
        size.extend_from_slice(&band.size);
        origin.extend_from_slice(&self.bbox.origin[self.band.end..]);
        size.extend_from_slice(&self.bbox.size[self.band.end..]);
        OrthantBox::new(IntVec(origin), IntVec(size))
    }

    pub fn untiled_order(&self) -> TileOrder {
        TileOrder {
            scheme: Scheme::Untiled,
            leaves: vec![self.bbox.clone()],
            phases: None,
            nodes: 0,
        }
    }

    pub fn slt_order(&self, t: &TileSpec) -> Result<TileOrder> {
        self.check_spec(t)?;
        let bb = self.band_box();
        let counts: Vec<i64> = bb.size.iter().zip(t.leaf.iter()).map(|(&n, &b)| (n + b - 1) / b).collect();
        let grid = OrthantBox::new(IntVec::zeros(counts.len()), IntVec(counts));
        let mut leaves = Vec::new();
        for outer in self.outer_points() {
            for g in grid.points() {
                let origin: Vec<i64> = g
                    .iter()
                    .zip(bb.origin.iter().zip(t.leaf.iter()))
                    .map(|(&c, (&o, &b))| o + c * b)
                    .collect();
                let band = OrthantBox::new(IntVec(origin), t.leaf.clone());
                let full = self.full_box(&outer, &band);
                if !self.emptiness.is_empty(&full) {
                    leaves.push(full);
                }
            }
        }
        Ok(TileOrder {
            scheme: Scheme::Slt,
            leaves,
            phases: None,
            nodes: 0,
        })
    }

    pub fn cot_order(&self, t: &TileSpec) -> Result<TileOrder> {
        self.cot_order_with(t, CotOptions::default())
    }

    pub fn cot_order_with(&self, t: &TileSpec, opts: CotOptions) -> Result<TileOrder> {
        self.check_spec(t)?;
        let padded = pad_box(&self.band_box(), t);
        let mut rec = Recursion {
            ctx: self,
            spec: t,
            opts,
            leaves: Vec::new(),
            phases: Vec::new(),
            nodes: 0,
            outer: Vec::new(),
            path: Vec::new(),
        };
        for outer in self.outer_points() {
            rec.outer = outer;
            rec.path.clear();
            rec.path.extend_from_slice(&rec.outer);
            rec.visit(&padded.bx);
        }
        Ok(TileOrder {
            scheme: Scheme::Cot,
            leaves: rec.leaves,
            phases: Some(rec.phases),
            nodes: rec.nodes,
        })
    }

    pub fn order(&self, scheme: Scheme, t: Option<&TileSpec>) -> Result<TileOrder> {
        match (scheme, t) {
            (Scheme::Untiled, _) | (_, None) => Ok(self.untiled_order()),
            (Scheme::Slt, Some(t)) => self.slt_order(t),
            (Scheme::Cot, Some(t)) => self.cot_order(t),
        }
    }
}

struct Recursion<'a> {
    ctx: &'a TilingContext,
    spec: &'a TileSpec,
    opts: CotOptions,
    leaves: Vec<OrthantBox>,
    phases: Vec<Vec<i64>>,
    nodes: usize,
    outer: Vec<i64>,
    path: Vec<i64>,
}

impl Recursion<'_> {
    fn visit(&mut self, bx: &OrthantBox) {
        self.nodes += 1;
        if self.opts.zero_exit && bx.is_zero() {
            return;
        }
        let full = self.ctx.full_box(&self.outer, bx);
        if self.opts.empty_exit && self.ctx.emptiness.is_empty(&full) {
            return;
        }
        if bx.size.iter().zip(self.spec.leaf.iter()).all(|(s, b)| s <= b) {
            self.leaves.push(full);
            self.phases.push(self.path.clone());
            return;
        }
        let d = bx.dim();
        for (bits, child) in split_orthants(bx, self.spec).iter().enumerate() {
            self.path.push(bits.count_ones() as i64);
            self.visit(child);
            self.path.pop();
            debug_assert!(bits < 1 << d);
        }
    }
}

/// Smallest box containing every statement's domain.
pub fn union_bbox(p: &Prdg, params: &[i64]) -> Result<OrthantBox> {
    let d = p.depth();
    let mut lo = vec![i64::MAX; d];
    let mut hi = vec![i64::MIN; d];
    let mut any = false;
    for s in &p.statements {
        let bb = match s.domain.bounding_box(params) {
            Ok(bb) => bb,
            Err(PolyError::Empty) => continue,
            Err(e) => return Err(e.into()),
        };
        any = true;
        for k in 0..d {
            lo[k] = lo[k].min(bb.origin[k]);
            hi[k] = hi[k].max(bb.origin[k] + bb.size[k]);
        }
    }
    if !any {
        return Err(PolyError::Empty.into());
    }
    let size = lo.iter().zip(&hi).map(|(l, h)| h - l).collect();
    Ok(OrthantBox::new(IntVec(lo), IntVec(size)))
}

pub fn cot_order(p: &Prdg, params: &[i64], t: &TileSpec) -> Result<TileOrder> {
    TilingContext::new(p, params)?.cot_order(t)
}

pub fn slt_order(p: &Prdg, params: &[i64], t: &TileSpec) -> Result<TileOrder> {
    TilingContext::new(p, params)?.slt_order(t)
}

/// Phase paths of a COT order are recorded during the recursion; this
/// returns the order unchanged for COT and `None` for other schemes.
pub fn assign_wavefront_phases(order: &TileOrder) -> Option<TileOrder> {
    (order.scheme == Scheme::Cot && order.phases.is_some()).then(|| order.clone())
}

/// A sequential order consistent with the wavefront partial order: leaves
/// sorted by phase path, leaves sharing a path permuted by `seed`.
pub fn linearize_wavefront(order: &TileOrder, seed: u64) -> TileOrder {
    let Some(phases) = &order.phases else {
        return order.clone();
    };
    let mut idx: Vec<usize> = (0..order.leaves.len()).collect();
    idx.sort_by(|&a, &b| phases[a].cmp(&phases[b]));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut start = 0;
    while start < idx.len() {
        let mut end = start + 1;
        while end < idx.len() && phases[idx[end]] == phases[idx[start]] {
            end += 1;
        }
        idx[start..end].shuffle(&mut rng);
        start = end;
    }
    TileOrder {
        scheme: order.scheme,
        leaves: idx.iter().map(|&k| order.leaves[k].clone()).collect(),
        phases: Some(idx.iter().map(|&k| phases[k].clone()).collect()),
        nodes: order.nodes,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;

    fn bx(o: &[i64], s: &[i64]) -> OrthantBox {
        OrthantBox::new(IntVec(o.to_vec()), IntVec(s.to_vec()))
    }

    fn spec(b: &[i64]) -> TileSpec {
        TileSpec::new(b.to_vec()).unwrap()
    }

    #[test]
    fn pad_examples() {
        let p = pad_box(&bx(&[0, 0], &[2000, 2000]), &spec(&[300, 300]));
        assert_eq!(p.bx.size, IntVec(vec![2400, 2400]));
        assert_eq!(p.levels, IntVec(vec![3, 3]));
        let p = pad_box(&bx(&[3], &[5]), &spec(&[8]));
        assert_eq!((p.bx.size[0], p.levels[0], p.bx.origin[0]), (8, 0, 3));
        let p = pad_box(&bx(&[1, 1], &[20, 9]), &spec(&[4, 4]));
        assert_eq!(p.bx.size, IntVec(vec![32, 16]));
        assert_eq!(p.levels, IntVec(vec![3, 2]));
    }

    #[test]
    fn split_examples() {
        let kids = split_orthants(&bx(&[0, 0], &[8, 8]), &spec(&[2, 2]));
        let origins: Vec<Vec<i64>> = kids.iter().map(|k| k.origin.0.clone()).collect();
        assert_eq!(origins, [[0, 0], [0, 4], [4, 0], [4, 4]]);
        assert!(kids.iter().all(|k| k.size.0 == [4, 4]));

        let kids = split_orthants(&bx(&[0, 0], &[4, 2]), &spec(&[2, 2]));
        let sizes: Vec<Vec<i64>> = kids.iter().map(|k| k.size.0.clone()).collect();
        assert_eq!(sizes, [[2, 2], [2, 0], [2, 2], [2, 0]]);

        let kids = split_orthants(&bx(&[0, 0, 0], &[2, 2, 2]), &spec(&[1, 1, 1]));
        let origins: Vec<Vec<i64>> = kids.iter().map(|k| k.origin.0.clone()).collect();
        let mut expect = Vec::new();
        for a in 0..2 {
            for b in 0..2 {
                for c in 0..2 {
                    expect.push(vec![a, b, c]);
                }
            }
        }
        assert_eq!(origins, expect);
        assert!(kids.iter().all(|k| k.size.0 == [1, 1, 1]));

        // odd sizes: the first half takes the ceiling
        let kids = split_orthants(&bx(&[0], &[5]), &spec(&[1]));
        assert_eq!((kids[0].size[0], kids[1].origin[0], kids[1].size[0]), (3, 3, 2));
    }

    fn rect_kernel() -> Prdg {
        crate::kernel::parse_kernel(
            r#"{"name": "rect", "params": ["N"], "indices": ["i", "j"],
                "arrays": [{"name": "X", "rank": 2, "extents": ["N", "N"], "role": "output"}],
                "statements": [{"id": "S", "domain": ["i >= 0", "i <= N - 1", "j >= 0", "j <= N - 1"],
                                "writes": {"array": "X", "subscripts": ["i", "j"]}, "body": "1.0"}],
                "tilable_band": [0, 1]}"#,
        )
        .unwrap()
    }

    fn grid_coords(order: &TileOrder, b: i64) -> Vec<(i64, i64)> {
        order.leaves.iter().map(|l| (l.origin[0] / b, l.origin[1] / b)).collect()
    }

    #[test]
    fn golden_cot_and_slt_on_four_by_four() {
        let ctx = TilingContext::new(&rect_kernel(), &[16]).unwrap();
        let t = spec(&[4, 4]);
        let cot = ctx.cot_order(&t).unwrap();
        assert_eq!(
            grid_coords(&cot, 4),
            [
                (0, 0),
                (0, 1),
                (1, 0),
                (1, 1),
                (0, 2),
                (0, 3),
                (1, 2),
                (1, 3),
                (2, 0),
                (2, 1),
                (3, 0),
                (3, 1),
                (2, 2),
                (2, 3),
                (3, 2),
                (3, 3)
            ]
        );
        let slt = ctx.slt_order(&t).unwrap();
        let expect: Vec<(i64, i64)> = (0..4).flat_map(|a| (0..4).map(move |b| (a, b))).collect();
        assert_eq!(grid_coords(&slt, 4), expect);
    }

    #[test]
    fn single_leaf_when_box_fits() {
        let ctx = TilingContext::new(&rect_kernel(), &[6]).unwrap();
        let cot = ctx.cot_order(&spec(&[8, 8])).unwrap();
        assert_eq!(cot.leaves.len(), 1);
        assert_eq!(cot.nodes, 1);
        assert_eq!(ctx.slt_order(&spec(&[8, 8])).unwrap().leaves.len(), 1);
    }

    #[test]
    fn triangle_skips_upper_blocks() {
        let p = corpus::load("triangle").unwrap();
        let ctx = TilingContext::new(&p, &[32]).unwrap();
        let t = spec(&[8, 8]);
        let cot = ctx.cot_order(&t).unwrap();
        assert_eq!(cot.leaves.len(), 10);
        assert!(grid_coords(&cot, 8).iter().all(|(i, j)| j <= i));
        let slt = ctx.slt_order(&t).unwrap();
        let mut a = cot.leaves.clone();
        let mut b = slt.leaves.clone();
        assert_ne!(a, b);
        a.sort_by(|x, y| x.origin.0.cmp(&y.origin.0));
        b.sort_by(|x, y| x.origin.0.cmp(&y.origin.0));
        assert_eq!(a, b);
        let off = ctx
            .cot_order_with(
                &t,
                CotOptions {
                    zero_exit: false,
                    empty_exit: false,
                },
            )
            .unwrap();
        assert!(cot.nodes < off.nodes);
    }

    #[test]
    fn emptiness_matches_enumeration_on_triangle_blocks() {
        let p = corpus::load("triangle").unwrap();
        let ctx = TilingContext::new(&p, &[32]).unwrap();
        for bi in 0..4 {
            for bj in 0..4 {
                let b = bx(&[bi * 8, bj * 8], &[8, 8]);
                let brute = !b.points().any(|x| p.statements[0].domain.contains(&x, &[32]).unwrap());
                assert_eq!(ctx.emptiness.is_empty(&b), brute, "block {bi},{bj}");
            }
        }
    }

    #[test]
    fn phases_one_level_diagonal() {
        let ctx = TilingContext::new(&rect_kernel(), &[8]).unwrap();
        let cot = ctx.cot_order(&spec(&[4, 4])).unwrap();
        assert_eq!(cot.phases.unwrap(), [[0], [1], [1], [2]]);
    }

    #[test]
    fn one_dimensional_linearization_is_identity() {
        let p = crate::kernel::parse_kernel(
            r#"{"name": "line", "params": ["N"], "indices": ["i"],
                "arrays": [{"name": "X", "rank": 1, "extents": ["N"], "role": "output"}],
                "statements": [{"id": "S", "domain": ["i >= 0", "i <= N - 1"],
                                "writes": {"array": "X", "subscripts": ["i"]}, "body": "1.0"}],
                "tilable_band": [0]}"#,
        )
        .unwrap();
        let ctx = TilingContext::new(&p, &[37]).unwrap();
        let cot = ctx.cot_order(&spec(&[4])).unwrap();
        for seed in 0..5 {
            assert_eq!(linearize_wavefront(&cot, seed).leaves, cot.leaves);
        }
    }

    #[test]
    fn outer_untiled_dimension_is_iterated() {
        let p = corpus::load("heat1d-fig7").unwrap();
        let ctx = TilingContext::new(&p, &[6]).unwrap();
        let cot = ctx.cot_order(&spec(&[4])).unwrap();
        // band is {t}; i spans the full extent inside every leaf
        assert!(cot.leaves.iter().all(|l| l.origin[1] == 0 && l.size[1] == 6));
        let covered: i64 = cot.leaves.iter().map(|l| l.size[0]).sum();
        assert!(covered >= 14);
        assert!(ctx.slt_order(&spec(&[4, 4])).is_err());
    }

    #[test]
    fn dump_lists_phases() {
        let ctx = TilingContext::new(&rect_kernel(), &[8]).unwrap();
        let text = ctx.cot_order(&spec(&[4, 4])).unwrap().dump();
        assert_eq!(text.lines().next().unwrap(), "origin=(0,0) size=(4,4) phase=0");
        assert_eq!(text.lines().count(), 4);
    }
}
