//! Point-by-point interpreter with a dependence oracle and an address trace.

use std::collections::HashMap;

use thiserror::Error;

use crate::expr::{BinOp, Expr};
use crate::kernel::{embed, ArrayRole, KernelError, Prdg};
use crate::memalloc::MemoryMap;
use crate::poly::{ceil_div, floor_div, OrthantBox, PolyError};
use crate::tiler::TileOrder;

pub const ELEMENT_BYTES: u64 = 8;
pub const ARRAY_ALIGN: u64 = 64;

#[derive(Debug, Error)]
pub enum ExecError {
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error("{stmt} at {point:?}: {array}{cell:?} is outside the allocated extents")]
    OutOfExtent {
        stmt: String,
        point: Vec<i64>,
        array: String,
        cell: Vec<i64>,
    },
    #[error("order has depth {got}, kernel has depth {expected}")]
    Depth { expected: usize, got: usize },
    #[error("map for {array} has input rank {got}, array rank is {expected}")]
    MapRank { array: String, expected: usize, got: usize },
}

pub type Result<T> = std::result::Result<T, ExecError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AccessKind {
    Read = 0,
    Write = 1,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TraceEvent {
    pub kind: AccessKind,
    pub array: u32,
    pub cell: u64,
    pub byte_addr: u64,
}

/// Consumer of the access stream.
pub trait TraceSink {
    fn event(&mut self, ev: TraceEvent);
}

impl TraceSink for Vec<TraceEvent> {
    fn event(&mut self, ev: TraceEvent) {
        self.push(ev);
    }
}

/// Writes the binary trace format: per event a `u8` kind, `u32` array id
/// and `u64` byte address, little-endian.
pub struct BinaryTrace<W: std::io::Write> {
    pub out: W,
    pub error: Option<std::io::Error>,
}

impl<W: std::io::Write> BinaryTrace<W> {
    pub fn new(out: W) -> Self {
        BinaryTrace { out, error: None }
    }
}

impl<W: std::io::Write> TraceSink for BinaryTrace<W> {
    fn event(&mut self, ev: TraceEvent) {
        if self.error.is_some() {
            return;
        }
        let mut rec = [0u8; 13];
        rec[0] = ev.kind as u8;
        rec[1..5].copy_from_slice(&ev.array.to_le_bytes());
        rec[5..13].copy_from_slice(&ev.byte_addr.to_le_bytes());
        if let Err(e) = self.out.write_all(&rec) {
            self.error = Some(e);
        }
    }
}

pub fn encode_trace(events: &[TraceEvent]) -> Vec<u8> {
    let mut sink = BinaryTrace::new(Vec::with_capacity(events.len() * 13));
    for &e in events {
        sink.event(e);
    }
    sink.out
}

pub fn decode_trace(bytes: &[u8]) -> Vec<(u8, u32, u64)> {
    bytes
        .chunks_exact(13)
        .map(|r| {
            (
                r[0],
                u32::from_le_bytes(r[1..5].try_into().expect("4 bytes")),
                u64::from_le_bytes(r[5..13].try_into().expect("8 bytes")),
            )
        })
        .collect()
}

pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Deterministic input value in [0, 1) for logical cell `index` of the
/// array declared at position `array`.
pub fn input_value(array: usize, index: u64) -> f64 {
    let h = splitmix64(((array as u64) << 40) ^ index);
    (h >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// FNV-1a over the little-endian bytes of every value.
pub fn checksum<'a>(arrays: impl IntoIterator<Item = &'a [f64]>) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for a in arrays {
        for v in a {
            for b in v.to_bits().to_le_bytes() {
                h ^= u64::from(b);
                h = h.wrapping_mul(0x0000_0100_0000_01b3);
            }
        }
    }
    h
}

#[derive(Debug, Clone, Default)]
pub struct ExecOptions {
    pub oracle: bool,
    /// Keep every executed `(statement, point)` in execution order.
    pub record_points: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    pub stmt: String,
    pub point: Vec<i64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ViolationKind {
    /// The cell holds another logical element, or nothing yet.
    StaleRead { found: Option<Instance> },
    /// A logical element was written twice.
    DoubleWrite { previous: Option<Instance> },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleViolation {
    pub at: Instance,
    pub array: String,
    pub cell: Vec<i64>,
    pub kind: ViolationKind,
}

/// Stored violations are capped; `violation_count` counts all of them.
pub const MAX_RECORDED_VIOLATIONS: usize = 64;

#[derive(Debug, Clone)]
pub struct ExecResult {
    /// Logical contents of each output array, in declaration order.
    pub outputs: Vec<(String, Vec<f64>)>,
    pub points_executed: u64,
    pub per_statement: Vec<u64>,
    pub oracle_violations: Vec<OracleViolation>,
    pub violation_count: u64,
    pub executed: Option<Vec<(usize, Vec<i64>)>>,
}

impl ExecResult {
    pub fn checksum(&self) -> u64 {
        checksum(self.outputs.iter().map(|(_, v)| v.as_slice()))
    }

    pub fn output(&self, name: &str) -> Option<&[f64]> {
        self.outputs.iter().find(|(n, _)| n == name).map(|(_, v)| v.as_slice())
    }
}

/// Physical layout of every array: row-major cells from a 64-byte aligned
/// base, arrays in declaration order.
#[derive(Debug, Clone)]
pub struct Layout {
    pub maps: Vec<MemoryMap>,
    pub logical: Vec<Vec<i64>>,
    pub base: Vec<u64>,
    pub cells: Vec<u64>,
}

impl Layout {
    pub fn new(p: &Prdg, params: &[i64], maps: &[MemoryMap]) -> Result<Self> {
        let mut out = Layout {
            maps: Vec::new(),
            logical: Vec::new(),
            base: Vec::new(),
            cells: Vec::new(),
        };
        let mut next = 0u64;
        for a in &p.arrays {
            let logical = a.extents_at(params);
            let map = maps
                .iter()
                .find(|m| m.array == a.name)
                .cloned()
                .unwrap_or_else(|| MemoryMap::identity(&a.name, &logical));
            if map.map.input_dim() != a.rank() {
                return Err(ExecError::MapRank {
                    array: a.name.clone(),
                    expected: a.rank(),
                    got: map.map.input_dim(),
                });
            }
            let cells = map.words() as u64;
            out.base.push(next);
            next += (cells * ELEMENT_BYTES).div_ceil(ARRAY_ALIGN) * ARRAY_ALIGN;
            out.cells.push(cells);
            out.maps.push(map);
            out.logical.push(logical);
        }
        Ok(out)
    }

    pub fn total_bytes(&self) -> u64 {
        match self.base.last() {
            Some(&b) => b + self.cells.last().copied().unwrap_or(0) * ELEMENT_BYTES,
            None => 0,
        }
    }
}

// A read or write site with params bound and the memory map folded in.
#[derive(Debug, Clone)]
struct Site {
    array: usize,
    // logical subscripts: rows over (z, 1)
    logical: Vec<Vec<i64>>,
    // physical coordinates before the modulo: rows over (z, 1)
    physical: Vec<Vec<i64>>,
    moduli: Vec<i64>,
    extents: Vec<i64>,
}

#[derive(Debug, Clone)]
enum Code {
    Num(f64),
    Affine(Vec<i64>),
    Read(Box<Site>),
    Bin(BinOp, Box<Code>, Box<Code>),
    Neg(Box<Code>),
    Sqrt(Box<Code>),
    Cond(Vec<Vec<i64>>, Box<Code>, Box<Code>),
}

#[derive(Debug, Clone)]
struct CompiledStmt {
    id: String,
    rows: Vec<Vec<i64>>,
    pieces: Vec<Vec<Vec<i64>>>,
    write: Site,
    body: Code,
}

fn dot(row: &[i64], z: &[i64]) -> i64 {
    let n = z.len();
    row[..n].iter().zip(z).map(|(a, b)| a * b).sum::<i64>() + row[n]
}

fn bind_row(row: &[i64], d: usize, params: &[i64]) -> Vec<i64> {
    let mut out = row[..d].to_vec();
    out.push(row[d..d + params.len()].iter().zip(params).map(|(a, b)| a * b).sum::<i64>() + row[d + params.len()]);
    out
}

fn compile_site(array: usize, subs: &[Vec<i64>], d: usize, params: &[i64], map: &MemoryMap) -> Site {
    let logical: Vec<Vec<i64>> = subs.iter().map(|r| bind_row(r, d, params)).collect();
    let physical = (0..map.map.output_dim())
        .map(|k| {
            let mut row = vec![0; d + 1];
            for (j, s) in logical.iter().enumerate() {
                let a = map.map.linear[k][j];
                for (slot, v) in row.iter_mut().zip(s) {
                    *slot += a * v;
                }
            }
            row[d] += map.map.constant[k];
            row
        })
        .collect();
    Site {
        array,
        logical,
        physical,
        moduli: map.moduli.0.clone(),
        extents: map.extents.0.clone(),
    }
}

fn compile_expr(e: &Expr, p: &Prdg, d: usize, params: &[i64], layout: &Layout) -> Code {
    match e {
        Expr::Num(v) => Code::Num(*v),
        Expr::Affine(r) => Code::Affine(bind_row(r, d, params)),
        Expr::Read { array, subs } => {
            let a = p.array_index(array).expect("validated kernel");
            Code::Read(Box::new(compile_site(a, subs, d, params, &layout.maps[a])))
        }
        Expr::Bin(op, l, r) => Code::Bin(
            *op,
            Box::new(compile_expr(l, p, d, params, layout)),
            Box::new(compile_expr(r, p, d, params, layout)),
        ),
        Expr::Neg(x) => Code::Neg(Box::new(compile_expr(x, p, d, params, layout))),
        Expr::Sqrt(x) => Code::Sqrt(Box::new(compile_expr(x, p, d, params, layout))),
        Expr::Cond { guard, then, otherwise } => Code::Cond(
            guard.iter().map(|r| bind_row(r, d, params)).collect(),
            Box::new(compile_expr(then, p, d, params, layout)),
            Box::new(compile_expr(otherwise, p, d, params, layout)),
        ),
    }
}

/// Binary operators shared with the emitted C.
pub fn apply_bin(op: BinOp, a: f64, b: f64) -> f64 {
    match op {
        BinOp::Add => a + b,
        BinOp::Sub => a - b,
        BinOp::Mul => a * b,
        BinOp::Div => a / b,
        BinOp::Min => {
            if b < a {
                b
            } else {
                a
            }
        }
        BinOp::Max => {
            if b > a {
                b
            } else {
                a
            }
        }
    }
}

struct Machine<'a, 's> {
    p: &'a Prdg,
    layout: &'a Layout,
    data: Vec<Vec<f64>>,
    // oracle state: logical tag per physical cell, last writer, written set
    tags: Vec<Vec<u64>>,
    writer: Vec<Vec<Option<(u32, Box<[i64]>)>>>,
    written: Vec<Vec<bool>>,
    oracle: bool,
    violations: Vec<OracleViolation>,
    violation_count: u64,
    sink: Option<&'s mut dyn TraceSink>,
    stmts: &'a [CompiledStmt],
}

const NO_TAG: u64 = u64::MAX;

impl Machine<'_, '_> {
    fn locate(&self, site: &Site, z: &[i64], stmt: usize) -> Result<(u64, Vec<i64>)> {
        let mut idx = 0u64;
        for ((row, &m), &e) in site.physical.iter().zip(&site.moduli).zip(&site.extents) {
            let mut v = dot(row, z);
            if m > 0 {
                v = v.rem_euclid(m);
            }
            if v < 0 || v >= e {
                let cell = site.logical.iter().map(|r| dot(r, z)).collect();
                return Err(ExecError::OutOfExtent {
                    stmt: self.stmts[stmt].id.clone(),
                    point: z.to_vec(),
                    array: self.p.arrays[site.array].name.clone(),
                    cell,
                });
            }
            idx = idx * e as u64 + v as u64;
        }
        let logical: Vec<i64> = if self.oracle { site.logical.iter().map(|r| dot(r, z)).collect() } else { Vec::new() };
        Ok((idx, logical))
    }

    fn logical_index(&self, array: usize, s: &[i64]) -> Option<u64> {
        let mut idx = 0u64;
        for (&x, &e) in s.iter().zip(&self.layout.logical[array]) {
            if x < 0 || x >= e {
                return None;
            }
            idx = idx * e as u64 + x as u64;
        }
        Some(idx)
    }

    fn instance(&self, w: &Option<(u32, Box<[i64]>)>) -> Option<Instance> {
        w.as_ref().map(|(s, pt)| Instance {
            stmt: self.stmts[*s as usize].id.clone(),
            point: pt.to_vec(),
        })
    }

    fn violate(&mut self, v: OracleViolation) {
        self.violation_count += 1;
        if self.violations.len() < MAX_RECORDED_VIOLATIONS {
            self.violations.push(v);
        }
    }

    fn emit(&mut self, kind: AccessKind, array: usize, cell: u64) {
        if let Some(sink) = self.sink.as_mut() {
            sink.event(TraceEvent {
                kind,
                array: array as u32,
                cell,
                byte_addr: self.layout.base[array] + cell * ELEMENT_BYTES,
            });
        }
    }

    fn eval(&mut self, c: &Code, z: &[i64], stmt: usize) -> Result<f64> {
        Ok(match c {
            Code::Num(v) => *v,
            Code::Affine(r) => dot(r, z) as f64,
            Code::Read(site) => {
                let (cell, logical) = self.locate(site, z, stmt)?;
                self.emit(AccessKind::Read, site.array, cell);
                if self.oracle {
                    let want = self.logical_index(site.array, &logical).unwrap_or(NO_TAG);
                    if self.tags[site.array][cell as usize] != want || want == NO_TAG {
                        let found = self.instance(&self.writer[site.array][cell as usize]);
                        self.violate(OracleViolation {
                            at: Instance {
                                stmt: self.stmts[stmt].id.clone(),
                                point: z.to_vec(),
                            },
                            array: self.p.arrays[site.array].name.clone(),
                            cell: logical,
                            kind: ViolationKind::StaleRead { found },
                        });
                    }
                }
                self.data[site.array][cell as usize]
            }
            Code::Bin(op, l, r) => {
                let a = self.eval(l, z, stmt)?;
                let b = self.eval(r, z, stmt)?;
                apply_bin(*op, a, b)
            }
            Code::Neg(x) => -self.eval(x, z, stmt)?,
            Code::Sqrt(x) => self.eval(x, z, stmt)?.sqrt(),
            Code::Cond(g, t, o) => {
                if g.iter().all(|r| dot(r, z) >= 0) {
                    self.eval(t, z, stmt)?
                } else {
                    self.eval(o, z, stmt)?
                }
            }
        })
    }

    fn execute(&mut self, si: usize, z: &[i64]) -> Result<()> {
        let stmts = self.stmts;
        let s = &stmts[si];
        let v = self.eval(&s.body, z, si)?;
        let (cell, logical) = self.locate(&s.write, z, si)?;
        let a = s.write.array;
        self.emit(AccessKind::Write, a, cell);
        self.data[a][cell as usize] = v;
        if self.oracle {
            let tag = self.logical_index(a, &logical).unwrap_or(NO_TAG);
            if tag != NO_TAG {
                if self.written[a][tag as usize] {
                    let previous = if self.tags[a][cell as usize] == tag {
                        self.instance(&self.writer[a][cell as usize])
                    } else {
                        None
                    };
                    self.violate(OracleViolation {
                        at: Instance {
                            stmt: s.id.clone(),
                            point: z.to_vec(),
                        },
                        array: self.p.arrays[a].name.clone(),
                        cell: logical,
                        kind: ViolationKind::DoubleWrite { previous },
                    });
                }
                self.written[a][tag as usize] = true;
            }
            self.tags[a][cell as usize] = tag;
            self.writer[a][cell as usize] = Some((si as u32, z.into()));
        }
        Ok(())
    }
}

/// Inclusive range of the last coordinate allowed by `rows` with the outer
/// coordinates fixed, or `None` if some row without that coordinate fails.
fn last_range(rows: &[Vec<i64>], z: &mut [i64], lo: i64, hi: i64) -> Option<(i64, i64)> {
    let d = z.len();
    let last = d - 1;
    z[last] = 0;
    let (mut lo, mut hi) = (lo, hi);
    for r in rows {
        let rest = dot(r, z);
        let a = r[last];
        if a == 0 {
            if rest < 0 {
                return None;
            }
        } else if a > 0 {
            lo = lo.max(ceil_div(-rest, a));
        } else {
            hi = hi.min(floor_div(rest, -a));
        }
    }
    (lo <= hi).then_some((lo, hi))
}

/// Executes `p` under `order`. Each leaf is clipped to the domain bounding
/// box and its points run lexicographically; at each point the statements
/// containing it run in textual order.
pub fn run(
    p: &Prdg,
    params: &[i64],
    order: &TileOrder,
    maps: &[MemoryMap],
    opts: &ExecOptions,
    sink: Option<&mut dyn TraceSink>,
) -> Result<ExecResult> {
    let embedded = embed(p);
    let p = &embedded;
    let d = p.depth();
    if let Some(l) = order.leaves.first() {
        if l.dim() != d {
            return Err(ExecError::Depth {
                expected: d,
                got: l.dim(),
            });
        }
    }
    let layout = Layout::new(p, params, maps)?;
    let stmts: Vec<CompiledStmt> = p
        .statements
        .iter()
        .map(|s| {
            let bind = |dom: &crate::poly::Domain| -> Result<Vec<Vec<i64>>> { Ok(dom.bind_params(params)?.rows) };
            let a = p.array_index(&s.write.array).expect("validated kernel");
            Ok(CompiledStmt {
                id: s.id.clone(),
                rows: bind(&s.domain)?,
                pieces: s.pieces.iter().map(bind).collect::<Result<_>>()?,
                write: compile_site(a, &s.write.subs, d, params, &layout.maps[a]),
                body: compile_expr(&s.body, p, d, params, &layout),
            })
        })
        .collect::<Result<_>>()?;

    let mut data: Vec<Vec<f64>> = layout.cells.iter().map(|&n| vec![0.0; n as usize]).collect();
    let mut tags: Vec<Vec<u64>> = Vec::new();
    let mut writer = Vec::new();
    let mut written = Vec::new();
    if opts.oracle {
        tags = layout.cells.iter().map(|&n| vec![NO_TAG; n as usize]).collect();
        writer = layout.cells.iter().map(|&n| vec![None; n as usize]).collect();
        written = layout.logical.iter().map(|e| vec![false; e.iter().product::<i64>().max(0) as usize]).collect();
    }
    for (ai, a) in p.arrays.iter().enumerate() {
        if a.role != ArrayRole::Input {
            continue;
        }
        let ext = &layout.logical[ai];
        let bx = OrthantBox::new(crate::poly::IntVec::zeros(ext.len()), crate::poly::IntVec(ext.clone()));
        for (li, s) in bx.points().enumerate() {
            if let Some(c) = layout.maps[ai].linear_cell(&s) {
                data[ai][c as usize] = input_value(ai, li as u64);
                if opts.oracle {
                    tags[ai][c as usize] = li as u64;
                    written[ai][li] = true;
                }
            }
        }
    }

    let bbox = crate::tiler::union_bbox(p, params).ok();
    let mut m = Machine {
        p,
        layout: &layout,
        data,
        tags,
        writer,
        written,
        oracle: opts.oracle,
        violations: Vec::new(),
        violation_count: 0,
        sink,
        stmts: &stmts,
    };
    let mut per_statement = vec![0u64; stmts.len()];
    let mut executed = opts.record_points.then(Vec::new);
    let mut ranges = vec![None; stmts.len()];
    for leaf in &order.leaves {
        let Some(bb) = &bbox else { break };
        // clip to the bounding box
        let lo: Vec<i64> = (0..d).map(|k| leaf.origin[k].max(bb.origin[k])).collect();
        let hi: Vec<i64> = (0..d)
            .map(|k| (leaf.origin[k] + leaf.size[k]).min(bb.origin[k] + bb.size[k]) - 1)
            .collect();
        if (0..d).any(|k| lo[k] > hi[k]) {
            continue;
        }
        let outer = OrthantBox::new(
            crate::poly::IntVec(lo[..d - 1].to_vec()),
            crate::poly::IntVec((0..d - 1).map(|k| hi[k] - lo[k] + 1).collect()),
        );
        let mut z = vec![0; d];
        for o in outer.points() {
            z[..d - 1].copy_from_slice(&o);
            let mut first = i64::MAX;
            let mut last = i64::MIN;
            for (si, s) in stmts.iter().enumerate() {
                ranges[si] = last_range(&s.rows, &mut z, lo[d - 1], hi[d - 1]);
                if let Some((a, b)) = ranges[si] {
                    first = first.min(a);
                    last = last.max(b);
                }
            }
            let mut x = first;
            while x <= last {
                z[d - 1] = x;
                for (si, s) in stmts.iter().enumerate() {
                    let Some((a, b)) = ranges[si] else { continue };
                    if x < a || x > b {
                        continue;
                    }
                    if !s.pieces.is_empty() && !s.pieces.iter().any(|pc| pc.iter().all(|r| dot(r, &z) >= 0)) {
                        continue;
                    }
                    m.execute(si, &z)?;
                    per_statement[si] += 1;
                    if let Some(e) = executed.as_mut() {
                        e.push((si, z.clone()));
                    }
                }
                x += 1;
            }
        }
    }

    let mut outputs = Vec::new();
    for (ai, a) in p.arrays.iter().enumerate() {
        if a.role != ArrayRole::Output {
            continue;
        }
        let ext = &layout.logical[ai];
        let bx = OrthantBox::new(crate::poly::IntVec::zeros(ext.len()), crate::poly::IntVec(ext.clone()));
        let vals = bx
            .points()
            .map(|s| layout.maps[ai].linear_cell(&s).map_or(0.0, |c| m.data[ai][c as usize]))
            .collect();
        outputs.push((a.name.clone(), vals));
    }
    Ok(ExecResult {
        outputs,
        points_executed: per_statement.iter().sum(),
        per_statement,
        oracle_violations: m.violations,
        violation_count: m.violation_count,
        executed,
    })
}

/// Compares executed instances with brute-force enumeration. Returns a
/// description of the first mismatch.
pub fn check_coverage(p: &Prdg, params: &[i64], res: &ExecResult) -> std::result::Result<(), String> {
    let p = embed(p);
    let mut want: HashMap<(usize, Vec<i64>), i64> = HashMap::new();
    for (si, s) in p.statements.iter().enumerate() {
        for z in s.enumerate(params).map_err(|e| e.to_string())? {
            *want.entry((si, z)).or_default() += 1;
        }
    }
    let Some(executed) = &res.executed else {
        let total: usize = want.len();
        return if res.points_executed as usize == total {
            Ok(())
        } else {
            Err(format!("executed {} points, domain has {total}", res.points_executed))
        };
    };
    for (si, z) in executed {
        let c = want.entry((*si, z.clone())).or_default();
        *c -= 1;
        if *c < 0 {
            return Err(format!("{} at {z:?} executed more than once or outside its domain", p.statements[*si].id));
        }
    }
    if let Some(((si, z), _)) = want.iter().find(|(_, &c)| c > 0) {
        return Err(format!("{} at {z:?} never executed", p.statements[*si].id));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::memalloc::{affine_split, allocate};
    use crate::tiler::{linearize_wavefront, TileSpec, TilingContext};

    fn opts() -> ExecOptions {
        ExecOptions {
            oracle: true,
            record_points: true,
        }
    }

    #[test]
    fn fig7_untiled_and_cot_agree() {
        let p = corpus::load("heat1d-fig7").unwrap();
        let ctx = TilingContext::new(&p, &[8]).unwrap();
        let a = run(&p, &[8], &ctx.untiled_order(), &[], &opts(), None).unwrap();
        let order = ctx.cot_order(&TileSpec::new(vec![4]).unwrap()).unwrap();
        let b = run(&p, &[8], &order, &[], &opts(), None).unwrap();
        let n = p.instance_count(&[8]).unwrap() as u64;
        assert_eq!(a.points_executed, n);
        assert_eq!(b.points_executed, n);
        assert_eq!(a.output("Aout"), b.output("Aout"));
        assert_eq!(a.violation_count + b.violation_count, 0);
        check_coverage(&p, &[8], &b).unwrap();
    }

    #[test]
    fn skewed_heat1d_tiles_in_two_dims() {
        let p = corpus::load("heat1d").unwrap();
        let ctx = TilingContext::new(&p, &[8]).unwrap();
        let base = run(&p, &[8], &ctx.untiled_order(), &[], &opts(), None).unwrap();
        let t = TileSpec::new(vec![4, 4]).unwrap();
        for order in [ctx.slt_order(&t).unwrap(), ctx.cot_order(&t).unwrap()] {
            let r = run(&p, &[8], &order, &[], &opts(), None).unwrap();
            assert_eq!(r.violation_count, 0, "{:?}", r.oracle_violations.first());
            assert_eq!(r.checksum(), base.checksum());
            check_coverage(&p, &[8], &r).unwrap();
        }
    }

    #[test]
    fn missing_tile_fails_coverage() {
        let p = corpus::load("heat2d").unwrap();
        let ctx = TilingContext::new(&p, &[3, 8]).unwrap();
        let mut order = ctx.cot_order(&TileSpec::new(vec![2, 4, 4]).unwrap()).unwrap();
        let full = run(&p, &[3, 8], &order, &[], &opts(), None).unwrap();
        let dropped = order.leaves.remove(order.leaves.len() / 2);
        let short = run(&p, &[3, 8], &order, &[], &opts(), None).unwrap();
        let pop = p
            .statements
            .iter()
            .flat_map(|s| s.enumerate(&[3, 8]).unwrap())
            .filter(|z| dropped.contains(z))
            .count() as u64;
        assert!(pop > 0);
        assert_eq!(full.points_executed - short.points_executed, pop);
        assert!(check_coverage(&p, &[3, 8], &short).is_err());
    }

    #[test]
    fn uov_allocation_matches_single_assignment() {
        let p = corpus::load("heat1d-fig7").unwrap();
        let split = affine_split(&p, &[8]).unwrap();
        let alloc = allocate(&split, &[8]).unwrap();
        let ctx = TilingContext::new(&split.prdg, &[8]).unwrap();
        let base = run(&p, &[8], &TilingContext::new(&p, &[8]).unwrap().untiled_order(), &[], &opts(), None).unwrap();
        let order = ctx.cot_order(&TileSpec::new(vec![2]).unwrap()).unwrap();
        let r = run(&split.prdg, &[8], &order, &alloc.maps(), &opts(), None).unwrap();
        assert_eq!(r.violation_count, 0, "{:?}", r.oracle_violations.first());
        assert_eq!(r.checksum(), base.checksum());
    }

    #[test]
    fn illegal_map_is_caught() {
        let p = corpus::load("heat1d-fig7").unwrap();
        for n in [3, 4, 6] {
            let split = affine_split(&p, &[n]).unwrap();
            let mut maps = allocate(&split, &[n]).unwrap().maps();
            let x = maps.iter_mut().find(|m| m.array == "X").unwrap();
            x.moduli.0[0] = 1;
            x.extents.0[0] = 1;
            let ctx = TilingContext::new(&split.prdg, &[n]).unwrap();
            let r = run(&split.prdg, &[n], &ctx.untiled_order(), &maps, &opts(), None).unwrap();
            assert!(r.violation_count > 0, "N={n}");
        }
    }

    #[test]
    fn wavefront_interleavings_agree() {
        let p = corpus::load("heat2d").unwrap();
        let ctx = TilingContext::new(&p, &[4, 8]).unwrap();
        let order = ctx.cot_order(&TileSpec::new(vec![2, 2, 2]).unwrap()).unwrap();
        let a = linearize_wavefront(&order, 0);
        let b = linearize_wavefront(&order, 1);
        assert_ne!(a.leaves, b.leaves);
        let ra = run(&p, &[4, 8], &a, &[], &opts(), None).unwrap();
        let rb = run(&p, &[4, 8], &b, &[], &opts(), None).unwrap();
        assert_eq!(ra.violation_count + rb.violation_count, 0);
        assert_eq!(ra.checksum(), rb.checksum());
    }

    #[test]
    fn trace_is_deterministic_and_encodes() {
        let p = corpus::load("triangle").unwrap();
        let ctx = TilingContext::new(&p, &[6]).unwrap();
        let order = ctx.cot_order(&TileSpec::new(vec![2, 2]).unwrap()).unwrap();
        let mut t1: Vec<TraceEvent> = Vec::new();
        let mut t2: Vec<TraceEvent> = Vec::new();
        run(&p, &[6], &order, &[], &ExecOptions::default(), Some(&mut t1)).unwrap();
        run(&p, &[6], &order, &[], &ExecOptions::default(), Some(&mut t2)).unwrap();
        assert_eq!(t1, t2);
        // 21 points, each two reads and one write
        assert_eq!(t1.len(), 63);
        let bytes = encode_trace(&t1);
        assert_eq!(bytes.len(), 63 * 13);
        let back = decode_trace(&bytes);
        assert_eq!(back[0], (t1[0].kind as u8, t1[0].array, t1[0].byte_addr));
        assert!(t1.iter().all(|e| e.byte_addr % 8 == 0));
    }

    #[test]
    fn layout_is_aligned_and_ordered() {
        let p = corpus::load("heat1d-fig7").unwrap();
        let l = Layout::new(&p, &[5], &[]).unwrap();
        assert_eq!(l.base, vec![0, 64, 64 + 448]);
        assert_eq!(l.cells, vec![5, 55, 5]);
    }

    #[test]
    fn input_values_are_in_unit_interval() {
        for i in 0..1000 {
            let v = input_value(3, i);
            assert!((0.0..1.0).contains(&v));
        }
        assert_ne!(input_value(0, 1), input_value(1, 1));
    }
}
