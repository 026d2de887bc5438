//! Schedule-independent memory allocation: edge classification, the affine
//! split, occupancy-vector allocation for original nodes and dense
//! single-assignment allocation for copy nodes.

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::expr::Expr;
use crate::kernel::{embed, eval_row, guards_hold, Access, ArrayDecl, ArrayRole, KernelError, Prdg, PrdgEdge, Statement};
use crate::poly::{Domain, IntAffineFn, IntVec, OrthantBox, PolyError};

#[derive(Debug, Error)]
pub enum AllocError {
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

pub type Result<T> = std::result::Result<T, AllocError>;

/// Default bound on the L1 norm of occupancy vectors considered.
pub const UOV_NORM_BOUND: i64 = 8;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EdgeClass {
    Uniform(IntVec),
    UniformInContext(IntVec),
    TrulyAffine,
    /// Context has no point at these parameters.
    Vacuous,
}

impl fmt::Display for EdgeClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EdgeClass::Uniform(v) => write!(f, "uniform {v}"),
            EdgeClass::UniformInContext(v) => write!(f, "uniform-in-context {v}"),
            EdgeClass::TrulyAffine => f.write_str("truly-affine"),
            EdgeClass::Vacuous => f.write_str("vacuous"),
        }
    }
}

/// Full-depth offset `z - f(z)` when it is the same at every context
/// point; `None` for an empty context or a varying offset. `p` must be
/// perfect.
pub fn uniform_in_context(p: &Prdg, e: &PrdgEdge, params: &[i64]) -> Result<Option<IntVec>> {
    let mut seen: Option<IntVec> = None;
    for z in e.context.enumerate(params)? {
        let v = p.dependence_vector(e, &z, params)?;
        match &seen {
            None => seen = Some(v),
            Some(s) if *s == v => {}
            Some(_) => return Ok(None),
        }
    }
    Ok(seen)
}

fn is_uniform_fn(f: &IntAffineFn, depth: usize) -> bool {
    f.output_dim() == depth
        && f.linear
            .iter()
            .enumerate()
            .all(|(k, row)| row.iter().enumerate().all(|(j, &a)| a == i64::from(j == k)))
}

pub fn classify(p: &Prdg, e: &PrdgEdge, params: &[i64]) -> Result<EdgeClass> {
    let d = p.depth();
    if is_uniform_fn(&e.func, d) {
        let off = IntVec(e.func.constant.iter().map(|c| -c).collect());
        return Ok(EdgeClass::Uniform(off));
    }
    if e.context.enumerate(params)?.is_empty() {
        return Ok(EdgeClass::Vacuous);
    }
    Ok(match uniform_in_context(p, e, params)? {
        Some(v) => EdgeClass::UniformInContext(v),
        None => EdgeClass::TrulyAffine,
    })
}

/// A node added by the split: copies of `source` values read through truly
/// affine edges.
#[derive(Debug, Clone, PartialEq)]
pub struct CopyNode {
    pub id: String,
    pub source: String,
    pub array: String,
    /// Images of the diverted edge contexts, one per edge.
    pub pieces: Vec<Domain>,
    pub diverted: usize,
}

#[derive(Debug, Clone)]
pub struct SplitResult {
    pub prdg: Prdg,
    /// Classification of every edge of the embedded input, in order.
    pub classes: Vec<EdgeClass>,
    pub copies: Vec<CopyNode>,
}

/// Diverts every truly affine edge to a copy of its producer. The input is
/// embedded first; the result is perfect and specific to `params`.
pub fn affine_split(p: &Prdg, params: &[i64]) -> Result<SplitResult> {
    let p = embed(p);
    let d = p.depth();
    let np = p.params.len();
    let classes = p
        .edges
        .iter()
        .map(|e| classify(&p, e, params))
        .collect::<Result<Vec<_>>>()?;
    let mut producers: Vec<String> = Vec::new();
    for (e, c) in p.edges.iter().zip(&classes) {
        if *c == EdgeClass::TrulyAffine && !producers.contains(&e.dst) {
            producers.push(e.dst.clone());
        }
    }
    if producers.is_empty() {
        return Ok(SplitResult {
            prdg: p,
            classes,
            copies: Vec::new(),
        });
    }

    let mut out = p.clone();
    let mut copies = Vec::new();
    // per producer: copy id, array name, logical origin
    let mut copy_of: HashMap<String, (String, String, Vec<i64>)> = HashMap::new();
    for v in &producers {
        let src = p.statement(v).expect("edge names a statement");
        let mut pieces = Vec::new();
        let mut diverted = 0;
        for (e, c) in p.edges.iter().zip(&classes) {
            if &e.dst == v && *c == EdgeClass::TrulyAffine {
                pieces.push(e.context.image(&e.func)?.intersect(&src.domain)?);
                diverted += 1;
            }
        }
        let bb = pieces_bbox(&pieces, d, params)?;
        let id = format!("{v}'");
        let array = format!("Y_{v}");
        let write_subs = (0..d)
            .map(|k| {
                let mut r = vec![0; d + np + 1];
                r[k] = 1;
                r[d + np] = -bb.origin[k];
                r
            })
            .collect();
        out.arrays.push(ArrayDecl {
            name: array.clone(),
            extents: bb
                .size
                .iter()
                .map(|&s| {
                    let mut r = vec![0; np + 1];
                    r[np] = s;
                    r
                })
                .collect(),
            role: ArrayRole::Temp,
        });
        let stmt = Statement {
            id: id.clone(),
            depth: d,
            domain: src.domain.clone(),
            pieces: pieces.clone(),
            write: Access {
                array: array.clone(),
                subs: write_subs,
            },
            body: Expr::Read {
                array: src.write.array.clone(),
                subs: src.write.subs.clone(),
            },
        };
        let pos = out.statement_index(v).expect("producer exists");
        out.statements.insert(pos + 1, stmt);
        copy_of.insert(v.clone(), (id.clone(), array.clone(), bb.origin.0.clone()));
        copies.push(CopyNode {
            id,
            source: v.clone(),
            array,
            pieces,
            diverted,
        });
    }

    // Rewrite consumer reads. Work per (consumer, read ordinal), highest
    // ordinal first so earlier ordinals stay valid.
    let mut sites: BTreeSet<(String, usize)> = BTreeSet::new();
    for (e, c) in p.edges.iter().zip(&classes) {
        if *c == EdgeClass::TrulyAffine {
            let r = e.read.expect("truly affine edges must name the read they explain");
            sites.insert((e.src.clone(), r));
        }
    }
    // edges tagged with their index in `p.edges`
    let mut edges: Vec<(Option<usize>, PrdgEdge)> = p.edges.iter().cloned().enumerate().map(|(k, e)| (Some(k), e)).collect();
    for (consumer, r) in sites.iter().rev() {
        let cidx = out.statement_index(consumer).expect("consumer exists");
        let stmt = &out.statements[cidx];
        let read_edges: Vec<usize> = edges
            .iter()
            .enumerate()
            .filter(|(_, (_, e))| &e.src == consumer && e.read == Some(*r))
            .map(|(k, _)| k)
            .collect();
        let affine: Vec<usize> = read_edges
            .iter()
            .copied()
            .filter(|&k| edges[k].0.is_some_and(|orig| classes[orig] == EdgeClass::TrulyAffine))
            .collect();
        let keep_original = affine.len() < read_edges.len();
        let original = stmt.body.reads()[*r].clone();
        let original_read = Expr::Read {
            array: original.array.to_string(),
            subs: original.subs.to_vec(),
        };
        // build the chain innermost-first
        let mut chain = if keep_original { Some(original_read) } else { None };
        for &k in affine.iter().rev() {
            let e = &edges[k].1;
            let (_, array, origin) = &copy_of[&e.dst];
            let subs = (0..d)
                .map(|j| {
                    let mut row = e.func.row(j);
                    let last = row.len() - 1;
                    row[last] -= origin[j];
                    row
                })
                .collect();
            let read = Expr::Read {
                array: array.clone(),
                subs,
            };
            chain = Some(match chain {
                None => read,
                Some(rest) => Expr::Cond {
                    guard: e
                        .context
                        .rows
                        .iter()
                        .filter(|row| !stmt.domain.rows.contains(row))
                        .cloned()
                        .collect(),
                    then: Box::new(read),
                    otherwise: Box::new(rest),
                },
            });
        }
        let replacement = chain.expect("at least one affine edge");
        let added = replacement.reads().len() - 1;
        let body = stmt.body.replace_read(*r, &replacement);
        out.statements[cidx].body = body;
        // shift later ordinals of this consumer
        for (_, e) in edges.iter_mut() {
            if &e.src == consumer {
                if let Some(o) = e.read.as_mut() {
                    if *o > *r {
                        *o += added;
                    }
                }
            }
        }
        // affine edges now point at the copy, at their branch ordinal
        for (branch, &k) in affine.iter().enumerate() {
            let (tag, e) = &mut edges[k];
            let (copy_id, _, _) = &copy_of[&e.dst];
            e.dst = copy_id.clone();
            e.read = Some(r + branch);
            *tag = None;
        }
        if keep_original {
            for &k in &read_edges {
                if !affine.contains(&k) {
                    edges[k].1.read = Some(r + affine.len());
                }
            }
        }
    }
    let mut new_edges: Vec<PrdgEdge> = edges.into_iter().map(|(_, e)| e).collect();
    for c in &copies {
        let v = p.statement(&c.source).expect("producer exists");
        let mut context = v.domain.clone();
        // restrict to the hull of the pieces' bounding box
        let bb = pieces_bbox(&c.pieces, d, params)?;
        for r in bb.rows(np) {
            if !context.rows.contains(&r) {
                context.rows.push(r);
            }
        }
        new_edges.push(PrdgEdge {
            src: c.id.clone(),
            dst: c.source.clone(),
            read: Some(0),
            context,
            func: IntAffineFn::identity(d + np).rows()[..d]
                .iter()
                .fold(None::<Vec<Vec<i64>>>, |acc, r| {
                    let mut acc = acc.unwrap_or_default();
                    acc.push(r.clone());
                    Some(acc)
                })
                .map(|rows| IntAffineFn::from_rows(&rows, d + np).expect("identity rows"))
                .expect("depth is positive"),
            kind: crate::kernel::EdgeKind::Flow,
        });
    }
    out.edges = new_edges;
    Ok(SplitResult {
        prdg: out,
        classes,
        copies,
    })
}

fn pieces_bbox(pieces: &[Domain], d: usize, params: &[i64]) -> Result<OrthantBox> {
    let mut lo = vec![i64::MAX; d];
    let mut hi = vec![i64::MIN; d];
    let mut any = false;
    for piece in pieces {
        match piece.bounding_box(params) {
            Ok(bb) => {
                any = true;
                for k in 0..d {
                    lo[k] = lo[k].min(bb.origin[k]);
                    hi[k] = hi[k].max(bb.origin[k] + bb.size[k]);
                }
            }
            Err(PolyError::Empty) => {}
            Err(e) => return Err(e.into()),
        }
    }
    if !any {
        return Ok(OrthantBox::new(IntVec::zeros(d), IntVec(vec![1; d])));
    }
    let size = lo.iter().zip(&hi).map(|(l, h)| h - l).collect();
    Ok(OrthantBox::new(IntVec(lo), IntVec(size)))
}

// ---------------------------------------------------------------------------
// Occupancy vectors
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct UovResult {
    pub vector: IntVec,
    pub valid: bool,
    /// For each dependence `d`, a decomposition of `u - d` into dependence
    /// indices; or the search bound on failure.
    pub witness: Vec<String>,
}

fn lex_nonneg(v: &[i64]) -> bool {
    for &x in v {
        if x != 0 {
            return x > 0;
        }
    }
    true
}

fn l1(v: &[i64]) -> i64 {
    v.iter().map(|x| x.abs()).sum()
}

/// Smallest-norm vector `u`, built from non-negative combinations of
/// `deps`, such that `u - d` is again such a combination for every `d`.
/// Ties are broken lexicographically.
pub fn find_uov(deps: &[IntVec]) -> UovResult {
    find_uov_bounded(deps, UOV_NORM_BOUND)
}

pub fn find_uov_bounded(deps: &[IntVec], bound: i64) -> UovResult {
    let deps: Vec<Vec<i64>> = {
        let mut v: Vec<Vec<i64>> = deps.iter().map(|d| d.0.clone()).filter(|d| d.iter().any(|&x| x != 0)).collect();
        v.sort();
        v.dedup();
        v
    };
    let fail = |why: String| UovResult {
        vector: IntVec::zeros(deps.first().map_or(1, |d| d.len())),
        valid: false,
        witness: vec![why],
    };
    if deps.is_empty() {
        return fail("no dependences".into());
    }
    if deps.iter().any(|d| !lex_nonneg(d)) {
        return fail("dependence not lexicographically positive".into());
    }
    // breadth-first over sums; intermediate norms may exceed the bound
    // before cancelling, so they get twice the room
    let dim = deps[0].len();
    let mut reach: HashSet<Vec<i64>> = HashSet::new();
    let zero = vec![0; dim];
    reach.insert(zero.clone());
    let mut frontier: VecDeque<Vec<i64>> = VecDeque::from([zero]);
    let max_terms = 2 * bound as usize;
    for _ in 0..max_terms {
        let mut next = VecDeque::new();
        while let Some(v) = frontier.pop_front() {
            for d in &deps {
                let w: Vec<i64> = v.iter().zip(d).map(|(a, b)| a + b).collect();
                if l1(&w) <= 2 * bound && reach.insert(w.clone()) {
                    next.push_back(w);
                }
            }
        }
        if next.is_empty() {
            break;
        }
        frontier = next;
    }
    let mut cands: Vec<&Vec<i64>> = reach.iter().filter(|v| l1(v) > 0 && l1(v) <= bound).collect();
    cands.sort_by(|a, b| l1(a).cmp(&l1(b)).then_with(|| a.cmp(b)));
    for u in cands {
        let ok = deps.iter().all(|d| {
            let r: Vec<i64> = u.iter().zip(d).map(|(a, b)| a - b).collect();
            r.iter().all(|&x| x == 0) || reach.contains(&r)
        });
        if ok {
            let witness = deps
                .iter()
                .map(|d| {
                    let r: Vec<i64> = u.iter().zip(d).map(|(a, b)| a - b).collect();
                    format!("{} - {} = {}", IntVec(u.clone()), IntVec(d.clone()), IntVec(r))
                })
                .collect();
            return UovResult {
                vector: IntVec(u.clone()),
                valid: true,
                witness,
            };
        }
    }
    fail(format!("no occupancy vector with L1 norm <= {bound}"))
}

/// Whether `v` is a non-negative integer combination of `deps` (zero
/// included), by depth-first subtraction. Independent of [`find_uov`].
pub fn is_reachable(v: &[i64], deps: &[IntVec], max_terms: usize) -> bool {
    fn go(v: &[i64], deps: &[IntVec], left: usize, memo: &mut HashMap<(Vec<i64>, usize), bool>) -> bool {
        if v.iter().all(|&x| x == 0) {
            return true;
        }
        if left == 0 || !lex_nonneg(v) {
            return false;
        }
        if let Some(&r) = memo.get(&(v.to_vec(), left)) {
            return r;
        }
        let r = deps.iter().any(|d| {
            let w: Vec<i64> = v.iter().zip(d.iter()).map(|(a, b)| a - b).collect();
            go(&w, deps, left - 1, memo)
        });
        memo.insert((v.to_vec(), left), r);
        r
    }
    go(v, deps, max_terms, &mut HashMap::new())
}

/// Checks the occupancy-vector definition directly.
pub fn check_uov(u: &IntVec, deps: &[IntVec], max_terms: usize) -> bool {
    u.iter().any(|&x| x != 0)
        && is_reachable(u, deps, max_terms)
        && deps.iter().all(|d| match u.checked_sub(d) {
            Ok(r) => is_reachable(&r, deps, max_terms),
            Err(_) => false,
        })
}

// ---------------------------------------------------------------------------
// Memory maps
// ---------------------------------------------------------------------------

/// Physical placement of one array: `cell(s) = (map(s) mod moduli)` over
/// logical subscripts `s`, row-major within `extents`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MemoryMap {
    pub array: String,
    pub map: IntAffineFn,
    /// 0 means no modulo on that coordinate.
    pub moduli: IntVec,
    pub extents: IntVec,
}

impl MemoryMap {
    pub fn identity(array: &str, extents: &[i64]) -> Self {
        MemoryMap {
            array: array.to_string(),
            map: IntAffineFn::identity(extents.len()),
            moduli: IntVec::zeros(extents.len()),
            extents: IntVec(extents.to_vec()),
        }
    }

    pub fn words(&self) -> u128 {
        self.extents.iter().map(|&e| e.max(0) as u128).product()
    }

    /// Cell coordinates of a logical subscript.
    pub fn cell(&self, s: &[i64]) -> Vec<i64> {
        (0..self.map.output_dim())
            .map(|k| {
                let row = &self.map.linear[k];
                let v = row.iter().zip(s).map(|(a, b)| a * b).sum::<i64>() + self.map.constant[k];
                let m = self.moduli[k];
                if m > 0 {
                    v.rem_euclid(m)
                } else {
                    v
                }
            })
            .collect()
    }

    /// Row-major cell index, or `None` outside the extents.
    pub fn linear_cell(&self, s: &[i64]) -> Option<u64> {
        let c = self.cell(s);
        let mut idx: u64 = 0;
        for (&x, &e) in c.iter().zip(self.extents.iter()) {
            if x < 0 || x >= e {
                return None;
            }
            idx = idx * e as u64 + x as u64;
        }
        Some(idx)
    }

    /// Human-readable form such as `(s0, s1) -> (s0 mod 2, s1)`.
    pub fn describe(&self) -> String {
        let n = self.map.input_dim();
        let names: Vec<String> = (0..n).map(|k| format!("s{k}")).collect();
        let outs: Vec<String> = (0..self.map.output_dim())
            .map(|k| {
                let mut row = self.map.linear[k].clone();
                row.push(self.map.constant[k]);
                let t = crate::expr::affine_to_text(&row, &names);
                if self.moduli[k] > 0 {
                    if row.iter().filter(|&&c| c != 0).count() > 1 {
                        format!("({t}) mod {}", self.moduli[k])
                    } else {
                        format!("{t} mod {}", self.moduli[k])
                    }
                } else {
                    t
                }
            })
            .collect();
        format!("({}) -> ({})", names.join(", "), outs.join(", "))
    }
}

pub fn footprint(maps: &[MemoryMap]) -> u128 {
    maps.iter().map(|m| m.words()).sum()
}

/// How a temp array's map was chosen.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AllocKind {
    /// Input or output: logical layout.
    Io,
    Uov(UovResult),
    /// Single assignment; the string says why.
    SingleAssignment(String),
    /// Copy-node array: dense over its bounding box after dropping
    /// coordinates that the written set determines.
    Copy { dropped: Vec<usize> },
}

#[derive(Debug, Clone)]
pub struct ArrayAlloc {
    pub map: MemoryMap,
    pub kind: AllocKind,
    pub deps: Vec<IntVec>,
    pub single_assignment_words: u128,
}

#[derive(Debug, Clone)]
pub struct Allocation {
    pub arrays: Vec<ArrayAlloc>,
}

impl Allocation {
    pub fn maps(&self) -> Vec<MemoryMap> {
        self.arrays.iter().map(|a| a.map.clone()).collect()
    }

    pub fn map(&self, array: &str) -> Option<&MemoryMap> {
        self.arrays.iter().find(|a| a.map.array == array).map(|a| &a.map)
    }

    /// Words of temporary storage (inputs and outputs excluded).
    pub fn footprint(&self) -> u128 {
        self.arrays.iter().filter(|a| a.kind != AllocKind::Io).map(|a| a.map.words()).sum()
    }

    /// Temporary words under full single assignment of the original arrays.
    pub fn single_assignment_footprint(&self) -> u128 {
        self.arrays
            .iter()
            .filter(|a| !matches!(a.kind, AllocKind::Io | AllocKind::Copy { .. }))
            .map(|a| a.single_assignment_words)
            .sum()
    }
}

/// Logical single-assignment maps for every array.
pub fn single_assignment(p: &Prdg, params: &[i64]) -> Vec<MemoryMap> {
    p.arrays.iter().map(|a| MemoryMap::identity(&a.name, &a.extents_at(params))).collect()
}

/// Read sites `(statement index, read ordinal)` whose array is `array`.
fn reads_of<'a>(p: &'a Prdg, array: &str) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for (si, s) in p.statements.iter().enumerate() {
        for r in s.body.reads() {
            if r.array == array {
                out.push((si, r.ordinal));
            }
        }
    }
    out
}

/// Constant data-space distance `write(z) - read(z)` if the index
/// coefficients cancel.
fn data_distance(s: &Statement, read_subs: &[Vec<i64>], params: &[i64]) -> Option<Vec<i64>> {
    let d = s.depth;
    let mut out = Vec::with_capacity(read_subs.len());
    for (w, r) in s.write.subs.iter().zip(read_subs) {
        if w[..d] != r[..d] {
            return None;
        }
        let zero = vec![0; d];
        out.push(eval_row(w, &zero, params) - eval_row(r, &zero, params));
    }
    Some(out)
}

/// Maps for every array of a split PRDG. Original temporaries get an
/// occupancy-vector projection when one exists and all outside readers are
/// safe; copy arrays are dense; inputs and outputs keep their layout.
pub fn allocate(split: &SplitResult, params: &[i64]) -> Result<Allocation> {
    let p = &split.prdg;
    let copy_ids: HashSet<&str> = split.copies.iter().map(|c| c.id.as_str()).collect();
    let copy_arrays: HashSet<&str> = split.copies.iter().map(|c| c.array.as_str()).collect();
    let mut arrays = Vec::new();
    for a in &p.arrays {
        let ext = a.extents_at(params);
        let sa_words = ext.iter().map(|&e| e.max(0) as u128).product();
        if a.role != ArrayRole::Temp {
            arrays.push(ArrayAlloc {
                map: MemoryMap::identity(&a.name, &ext),
                kind: AllocKind::Io,
                deps: Vec::new(),
                single_assignment_words: sa_words,
            });
            continue;
        }
        if copy_arrays.contains(a.name.as_str()) {
            let (map, dropped) = dense_copy_map(p, a, params)?;
            arrays.push(ArrayAlloc {
                map,
                kind: AllocKind::Copy { dropped },
                deps: Vec::new(),
                single_assignment_words: sa_words,
            });
            continue;
        }
        let (map, kind, deps) = uov_map(p, a, &copy_ids, params)?;
        arrays.push(ArrayAlloc {
            map,
            kind,
            deps,
            single_assignment_words: sa_words,
        });
    }
    Ok(Allocation { arrays })
}

fn writers<'a>(p: &'a Prdg, array: &str) -> Vec<&'a Statement> {
    p.statements.iter().filter(|s| s.write.array == array).collect()
}

fn uov_map(
    p: &Prdg,
    a: &ArrayDecl,
    copy_ids: &HashSet<&str>,
    params: &[i64],
) -> Result<(MemoryMap, AllocKind, Vec<IntVec>)> {
    let ext = a.extents_at(params);
    let sa = |why: &str, deps: Vec<IntVec>| (MemoryMap::identity(&a.name, &ext), AllocKind::SingleAssignment(why.into()), deps);
    let mut deps: Vec<IntVec> = Vec::new();
    let mut outside = Vec::new();
    for (si, ord) in reads_of(p, &a.name) {
        let s = &p.statements[si];
        if copy_ids.contains(s.id.as_str()) {
            continue;
        }
        let site = s.body.reads()[ord].clone();
        if s.write.array == a.name {
            match data_distance(s, site.subs, params) {
                Some(v) if v.iter().all(|&x| x == 0) => {}
                Some(v) => {
                    if !deps.contains(&IntVec(v.clone())) {
                        deps.push(IntVec(v));
                    }
                }
                None => return Ok(sa("a self read has a varying distance", deps)),
            }
        } else {
            outside.push((si, ord));
        }
    }
    if deps.is_empty() {
        return Ok(sa("no self dependences", deps));
    }
    deps.sort_by(|x, y| x.0.cmp(&y.0));
    let uov = find_uov(&deps);
    if !uov.valid {
        return Ok(sa("no occupancy vector within the search bound", deps));
    }
    let u = &uov.vector;
    let m = u.iter().position(|&x| x != 0).expect("uov is nonzero");
    let c = u[m].abs();
    if u.iter().any(|&x| x % c != 0) {
        return Ok(sa("occupancy vector is not a multiple of its leading entry", deps));
    }
    // outside readers must never see their cell reused: s + u is unwritten
    let written = written_bits(p, a, params)?;
    let ext = a.extents_at(params);
    for (si, ord) in outside {
        let s = &p.statements[si];
        let site = s.body.reads()[ord].clone();
        for z in s.enumerate(params)? {
            if !guards_hold(&site.guards, &z, params) {
                continue;
            }
            let cell: Vec<i64> = site.subs.iter().map(|r| eval_row(r, &z, params)).collect();
            let next: Vec<i64> = cell.iter().zip(u.iter()).map(|(a, b)| a + b).collect();
            if logical_index(&next, &ext).is_some_and(|k| written[k]) {
                return Ok(sa("an outside reader's cell is overwritten", deps));
            }
        }
    }
    // rows: s_m mod c, and s_k - (u_k / c) s_m elsewhere
    let rank = a.rank();
    let sign = u[m].signum();
    let mut linear = vec![vec![0; rank]; rank];
    for k in 0..rank {
        linear[k][k] = 1;
        if k != m {
            linear[k][m] = -(u[k] / c) * sign;
        }
    }
    let mut moduli = vec![0; rank];
    moduli[m] = c;
    let mut map = MemoryMap {
        array: a.name.clone(),
        map: IntAffineFn::new(linear, vec![0; rank], rank)?,
        moduli: IntVec(moduli),
        extents: IntVec(vec![0; rank]),
    };
    fit_extents(p, a, &mut map, params)?;
    Ok((map, AllocKind::Uov(uov), deps))
}

fn logical_index(s: &[i64], ext: &[i64]) -> Option<usize> {
    let mut idx = 0usize;
    for (&x, &e) in s.iter().zip(ext) {
        if x < 0 || x >= e {
            return None;
        }
        idx = idx * e as usize + x as usize;
    }
    Some(idx)
}

/// Calls `f` on every instance of `s` without collecting them.
fn for_each_instance(s: &Statement, params: &[i64], mut f: impl FnMut(&[i64])) -> Result<()> {
    let bb = match s.domain.bounding_box(params) {
        Ok(bb) => bb,
        Err(PolyError::Empty) => return Ok(()),
        Err(e) => return Err(e.into()),
    };
    for z in bb.points() {
        if s.contains(&z, params)? {
            f(&z);
        }
    }
    Ok(())
}

/// Written logical cells as a bitset over the declared extents.
fn written_bits(p: &Prdg, a: &ArrayDecl, params: &[i64]) -> Result<Vec<bool>> {
    let ext = a.extents_at(params);
    let mut bits = vec![false; ext.iter().product::<i64>().max(0) as usize];
    for s in writers(p, &a.name) {
        for_each_instance(s, params, |z| {
            if let Some(k) = logical_index(&s.write.eval(z, params), &ext) {
                bits[k] = true;
            }
        })?;
    }
    Ok(bits)
}

/// Logical subscripts written by any statement (small sizes only).
fn written_set(p: &Prdg, a: &ArrayDecl, params: &[i64]) -> Result<HashSet<Vec<i64>>> {
    let mut set = HashSet::new();
    for s in writers(p, &a.name) {
        for z in s.enumerate(params)? {
            set.insert(s.write.eval(&z, params));
        }
    }
    Ok(set)
}

/// Sets offsets and extents from the exact range of each map row over the
/// writers' domains.
fn fit_extents(p: &Prdg, a: &ArrayDecl, map: &mut MemoryMap, params: &[i64]) -> Result<()> {
    let rank = a.rank();
    let mut lo = vec![i64::MAX; rank];
    let mut hi = vec![i64::MIN; rank];
    for s in writers(p, &a.name) {
        let w = s.domain.width();
        for k in 0..rank {
            if map.moduli[k] > 0 {
                continue;
            }
            // row over (z, params, 1): sum_j A_kj * write_j
            let mut row = vec![0; w];
            for j in 0..rank {
                let a_kj = map.map.linear[k][j];
                for (slot, v) in row.iter_mut().zip(&s.write.subs[j]) {
                    *slot += a_kj * v;
                }
            }
            match s.domain.affine_range(&row, params) {
                Ok((l, h)) => {
                    lo[k] = lo[k].min(l);
                    hi[k] = hi[k].max(h);
                }
                Err(PolyError::Empty) => {}
                Err(e) => return Err(e.into()),
            }
        }
    }
    let mut constant = vec![0; rank];
    let mut extents = vec![0; rank];
    for k in 0..rank {
        if map.moduli[k] > 0 {
            extents[k] = map.moduli[k];
        } else if lo[k] <= hi[k] {
            constant[k] = -lo[k];
            extents[k] = hi[k] - lo[k] + 1;
        }
    }
    map.map = IntAffineFn::new(map.map.linear.clone(), constant, rank)?;
    map.extents = IntVec(extents);
    Ok(())
}

/// Dense map over the written subscripts of a copy array, dropping
/// coordinates (last first) whose removal keeps the map injective.
fn dense_copy_map(p: &Prdg, a: &ArrayDecl, params: &[i64]) -> Result<(MemoryMap, Vec<usize>)> {
    let written: Vec<Vec<i64>> = written_set(p, a, params)?.into_iter().collect();
    let rank = a.rank();
    let mut keep: Vec<usize> = (0..rank).collect();
    let mut dropped = Vec::new();
    for k in (0..rank).rev() {
        if keep.len() == 1 {
            break;
        }
        let trial: Vec<usize> = keep.iter().copied().filter(|&j| j != k).collect();
        let mut seen = HashSet::with_capacity(written.len());
        if written.iter().all(|s| seen.insert(trial.iter().map(|&j| s[j]).collect::<Vec<i64>>())) {
            keep = trial;
            dropped.push(k);
        }
    }
    dropped.reverse();
    let linear: Vec<Vec<i64>> = keep
        .iter()
        .map(|&j| {
            let mut r = vec![0; rank];
            r[j] = 1;
            r
        })
        .collect();
    let mut constant = Vec::with_capacity(keep.len());
    let mut extents = Vec::with_capacity(keep.len());
    for &j in &keep {
        let lo = written.iter().map(|s| s[j]).min().unwrap_or(0);
        let hi = written.iter().map(|s| s[j]).max().unwrap_or(-1);
        constant.push(-lo);
        extents.push((hi - lo + 1).max(0));
    }
    let n = keep.len();
    Ok((
        MemoryMap {
            array: a.name.clone(),
            map: IntAffineFn::new(linear, constant, rank)?,
            moduli: IntVec::zeros(n),
            extents: IntVec(extents),
        },
        dropped,
    ))
}
