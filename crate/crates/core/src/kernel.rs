//! Kernel representation: statements, the reduced dependence graph, the
//! JSON kernel format and the embedding of imperfect nests.

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::{self, Expr, ExprError};
use crate::poly::{Domain, IntAffineFn, IntVec, PolyError};

#[derive(Debug, Error)]
pub enum KernelError {
    #[error("kernel parse error at line {line}, column {col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },
    #[error("in {context}: {source}")]
    Expr {
        context: String,
        #[source]
        source: ExprError,
    },
    #[error("invalid kernel: {0}")]
    Validation(String),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

pub type Result<T> = std::result::Result<T, KernelError>;

fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(KernelError::Validation(msg.into()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ArrayRole {
    Input,
    #[default]
    Temp,
    Output,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArrayDecl {
    pub name: String,
    /// Logical extents as affine rows over `(params, 1)`.
    pub extents: Vec<Vec<i64>>,
    pub role: ArrayRole,
}

impl ArrayDecl {
    pub fn rank(&self) -> usize {
        self.extents.len()
    }

    pub fn extents_at(&self, params: &[i64]) -> Vec<i64> {
        self.extents
            .iter()
            .map(|r| r[..params.len()].iter().zip(params).map(|(a, b)| a * b).sum::<i64>() + r[params.len()])
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Access {
    pub array: String,
    /// Subscript rows over `(indices, params, 1)` of the statement.
    pub subs: Vec<Vec<i64>>,
}

impl Access {
    pub fn eval(&self, x: &[i64], p: &[i64]) -> Vec<i64> {
        self.subs.iter().map(|r| eval_row(r, x, p)).collect()
    }
}

pub(crate) fn eval_row(r: &[i64], x: &[i64], p: &[i64]) -> i64 {
    let n = x.len();
    let mut acc = r[r.len() - 1];
    for (a, v) in r[..n].iter().zip(x) {
        acc += a * v;
    }
    for (a, v) in r[n..n + p.len()].iter().zip(p) {
        acc += a * v;
    }
    acc
}

#[derive(Debug, Clone, PartialEq)]
pub struct Statement {
    pub id: String,
    /// Number of leading kernel indices this statement is nested in.
    pub depth: usize,
    pub domain: Domain,
    /// When non-empty, the statement runs only at domain points lying in at
    /// least one piece (a finite union, used by copy nodes).
    pub pieces: Vec<Domain>,
    pub write: Access,
    pub body: Expr,
}

impl Statement {
    /// Domain membership including the piece restriction.
    pub fn contains(&self, x: &[i64], p: &[i64]) -> Result<bool> {
        if !self.domain.contains(x, p)? {
            return Ok(false);
        }
        if self.pieces.is_empty() {
            return Ok(true);
        }
        for piece in &self.pieces {
            if piece.contains(x, p)? {
                return Ok(true);
            }
        }
        Ok(false)
    }

    pub fn enumerate(&self, p: &[i64]) -> Result<Vec<Vec<i64>>> {
        let mut out = Vec::new();
        for x in self.domain.enumerate(p)? {
            if self.contains(&x, p)? {
                out.push(x);
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum EdgeKind {
    #[default]
    Flow,
    Memory,
}

/// Dependence of consumer `src` on producer `dst`: for `z` in `context`,
/// `z` reads the value computed at `func(z, params)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PrdgEdge {
    pub src: String,
    pub dst: String,
    /// Pre-order ordinal of the read in the consumer body this edge explains.
    pub read: Option<usize>,
    pub context: Domain,
    pub func: IntAffineFn,
    pub kind: EdgeKind,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prdg {
    pub name: String,
    pub params: Vec<String>,
    pub defaults: BTreeMap<String, i64>,
    pub check_params: BTreeMap<String, i64>,
    pub indices: Vec<String>,
    pub arrays: Vec<ArrayDecl>,
    pub statements: Vec<Statement>,
    pub edges: Vec<PrdgEdge>,
    pub tilable_band: Vec<usize>,
}

impl Prdg {
    pub fn depth(&self) -> usize {
        self.indices.len()
    }

    pub fn statement(&self, id: &str) -> Option<&Statement> {
        self.statements.iter().find(|s| s.id == id)
    }

    pub fn statement_index(&self, id: &str) -> Option<usize> {
        self.statements.iter().position(|s| s.id == id)
    }

    pub fn array(&self, name: &str) -> Option<&ArrayDecl> {
        self.arrays.iter().find(|a| a.name == name)
    }

    pub fn array_index(&self, name: &str) -> Option<usize> {
        self.arrays.iter().position(|a| a.name == name)
    }

    pub fn is_perfect(&self) -> bool {
        self.statements.iter().all(|s| s.depth == self.depth())
    }

    /// Names visible in a statement of the given depth.
    pub fn names_at(&self, depth: usize) -> Vec<String> {
        self.indices[..depth].iter().chain(&self.params).cloned().collect()
    }

    /// Resolves parameter values from `overrides`, then the kernel defaults.
    pub fn param_values(&self, overrides: &BTreeMap<String, i64>) -> Result<Vec<i64>> {
        self.params
            .iter()
            .map(|p| {
                overrides
                    .get(p)
                    .or_else(|| self.defaults.get(p))
                    .copied()
                    .ok_or_else(|| KernelError::Validation(format!("no value for parameter `{p}`")))
            })
            .collect()
    }

    /// Lexicographically ordered instance count, by enumeration.
    pub fn instance_count(&self, params: &[i64]) -> Result<usize> {
        let mut n = 0;
        for s in &self.statements {
            n += s.enumerate(params)?.len();
        }
        Ok(n)
    }

    /// Full-depth dependence vector `consumer - producer` for `z`.
    pub fn dependence_vector(&self, e: &PrdgEdge, z: &[i64], params: &[i64]) -> Result<IntVec> {
        let mut zp = z.to_vec();
        zp.extend_from_slice(params);
        let prod = e.func.apply(&zp)?;
        let d = self.depth();
        let mut v = vec![0; d];
        for (k, slot) in v.iter_mut().enumerate() {
            let c = z.get(k).copied().unwrap_or(0);
            let p = prod.get(k).copied().unwrap_or(0);
            *slot = c - p;
        }
        Ok(IntVec(v))
    }

    /// Structural checks that need no parameter values.
    pub fn validate_structure(&self) -> Result<()> {
        let d = self.depth();
        let np = self.params.len();
        let mut seen = HashSet::new();
        for a in &self.arrays {
            if !seen.insert(a.name.as_str()) {
                return invalid(format!("duplicate array `{}`", a.name));
            }
        }
        let mut ids = HashSet::new();
        let mut writers: HashMap<&str, usize> = HashMap::new();
        for s in &self.statements {
            if !ids.insert(s.id.as_str()) {
                return invalid(format!("duplicate statement `{}`", s.id));
            }
            if s.depth > d || s.domain.index_dim != s.depth || s.domain.param_dim != np {
                return invalid(format!("statement `{}` has an inconsistent domain", s.id));
            }
            let Some(arr) = self.array(&s.write.array) else {
                return invalid(format!("statement `{}` writes unknown array `{}`", s.id, s.write.array));
            };
            if arr.role == ArrayRole::Input {
                return invalid(format!("statement `{}` writes input array `{}`", s.id, arr.name));
            }
            if arr.rank() != s.write.subs.len() {
                return invalid(format!("statement `{}` writes `{}` with wrong arity", s.id, arr.name));
            }
            *writers.entry(arr.name.as_str()).or_default() += 1;
            for r in s.body.reads() {
                let Some(ra) = self.array(r.array) else {
                    return invalid(format!("statement `{}` reads unknown array `{}`", s.id, r.array));
                };
                if ra.rank() != r.subs.len() {
                    return invalid(format!(
                        "statement `{}` reads `{}` with {} subscripts, rank is {}",
                        s.id,
                        ra.name,
                        r.subs.len(),
                        ra.rank()
                    ));
                }
            }
        }
        for e in &self.edges {
            let (Some(c), Some(p)) = (self.statement(&e.src), self.statement(&e.dst)) else {
                return invalid(format!("edge {} -> {} names an unknown statement", e.src, e.dst));
            };
            if e.context.index_dim != c.depth || e.func.input_dim() != c.depth + np || e.func.output_dim() != p.depth
            {
                return invalid(format!("edge {} -> {} has inconsistent dimensions", e.src, e.dst));
            }
            if let Some(k) = e.read {
                let reads = c.body.reads();
                let Some(site) = reads.get(k) else {
                    return invalid(format!("edge {} -> {} names read #{k} which does not exist", e.src, e.dst));
                };
                if site.array != p.write.array {
                    return invalid(format!(
                        "edge {} -> {}: read #{k} is of `{}`, producer writes `{}`",
                        e.src, e.dst, site.array, p.write.array
                    ));
                }
            }
        }
        if self.tilable_band.is_empty() {
            return invalid("tilable band is empty");
        }
        for w in self.tilable_band.windows(2) {
            if w[1] != w[0] + 1 {
                return invalid("tilable band must be a contiguous run of index positions");
            }
        }
        if *self.tilable_band.last().unwrap() >= d {
            return invalid("tilable band names a position beyond the nest depth");
        }
        Ok(())
    }

    /// Sampling-based checks at concrete parameters: edge functions land in
    /// the producer domain at the cell the read names, every read of a
    /// computed array is explained by an edge, and band dependence
    /// components are non-negative.
    pub fn validate_sampled(&self, params: &[i64]) -> Result<()> {
        let report = check_dependences_sampled(self, params)?;
        if let Some(bad) = report.edges.iter().find(|e| e.flagged) {
            return invalid(format!(
                "edge {} -> {} has a negative dependence component in the tilable band (min {})",
                bad.src, bad.dst, bad.min
            ));
        }
        for e in &self.edges {
            let c = self.statement(&e.src).unwrap();
            let p = self.statement(&e.dst).unwrap();
            let site_subs = e.read.map(|k| c.body.reads()[k].subs.to_vec());
            for z in e.context.enumerate(params)? {
                if !c.contains(&z, params)? {
                    return invalid(format!("edge {} -> {}: context point {:?} outside consumer", e.src, e.dst, z));
                }
                let mut zp = z.clone();
                zp.extend_from_slice(params);
                let y = e.func.apply(&zp)?;
                if !p.contains(&y, params)? {
                    return invalid(format!(
                        "edge {} -> {}: {:?} maps to {} outside the producer domain",
                        e.src, e.dst, z, y
                    ));
                }
                if let Some(subs) = &site_subs {
                    let read_cell: Vec<i64> = subs.iter().map(|r| eval_row(r, &z, params)).collect();
                    if read_cell != p.write.eval(&y, params) {
                        return invalid(format!(
                            "edge {} -> {}: at {:?} the read names {:?} but the producer writes {:?}",
                            e.src,
                            e.dst,
                            z,
                            read_cell,
                            p.write.eval(&y, params)
                        ));
                    }
                }
            }
        }
        // every evaluated read of a computed array is covered by an edge
        let computed: HashSet<&str> = self.statements.iter().map(|s| s.write.array.as_str()).collect();
        for s in &self.statements {
            let reads = s.body.reads();
            let points = s.enumerate(params)?;
            for site in reads.iter().filter(|r| computed.contains(r.array)) {
                let edges: Vec<&PrdgEdge> = self
                    .edges
                    .iter()
                    .filter(|e| e.src == s.id && e.read == Some(site.ordinal))
                    .collect();
                for z in &points {
                    if !guards_hold(&site.guards, z, params) {
                        continue;
                    }
                    let mut covered = false;
                    for e in &edges {
                        if e.context.contains(z, params)? {
                            covered = true;
                            break;
                        }
                    }
                    if !covered {
                        return invalid(format!(
                            "read #{} of `{}` in `{}` at {:?} is not explained by any edge",
                            site.ordinal, site.array, s.id, z
                        ));
                    }
                }
            }
        }
        Ok(())
    }
}

pub(crate) fn guards_hold(guards: &[(&[Vec<i64>], bool)], z: &[i64], p: &[i64]) -> bool {
    guards.iter().all(|(g, positive)| {
        let holds = g.iter().all(|r| eval_row(r, z, p) >= 0);
        holds == *positive
    })
}

/// Per-edge summary of enumerated dependence vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeDepSummary {
    pub src: String,
    pub dst: String,
    pub points: usize,
    pub min: IntVec,
    pub max: IntVec,
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DepReport {
    pub edges: Vec<EdgeDepSummary>,
}

impl DepReport {
    pub fn is_clean(&self) -> bool {
        self.edges.iter().all(|e| !e.flagged)
    }
}

/// Enumerates each edge's context and summarises the full-depth dependence
/// vectors; flags edges with a negative component inside the tilable band.
pub fn check_dependences_sampled(p: &Prdg, params: &[i64]) -> Result<DepReport> {
    let d = p.depth();
    let mut edges = Vec::with_capacity(p.edges.len());
    for e in &p.edges {
        let mut min = vec![i64::MAX; d];
        let mut max = vec![i64::MIN; d];
        let mut points = 0;
        for z in e.context.enumerate(params)? {
            let v = p.dependence_vector(e, &z, params)?;
            for k in 0..d {
                min[k] = min[k].min(v[k]);
                max[k] = max[k].max(v[k]);
            }
            points += 1;
        }
        if points == 0 {
            min = vec![0; d];
            max = vec![0; d];
        }
        let flagged = points > 0 && p.tilable_band.iter().any(|&k| min[k] < 0);
        edges.push(EdgeDepSummary {
            src: e.src.clone(),
            dst: e.dst.clone(),
            points,
            min: IntVec(min),
            max: IntVec(max),
            flagged,
        });
    }
    Ok(DepReport { edges })
}

/// Brings every statement to the full nest depth: missing trailing indices
/// become unit-extent dimensions pinned to 0 by guard rows. Instance sets
/// and dependences are unchanged up to that padding.
pub fn embed(p: &Prdg) -> Prdg {
    if p.is_perfect() {
        return p.clone();
    }
    let d = p.depth();
    let depth_of: HashMap<&str, usize> = p.statements.iter().map(|s| (s.id.as_str(), s.depth)).collect();
    let statements = p
        .statements
        .iter()
        .map(|s| {
            let extra = d - s.depth;
            if extra == 0 {
                return s.clone();
            }
            let lift = |r: &[i64]| -> Vec<i64> {
                let mut r = r.to_vec();
                r.splice(s.depth..s.depth, std::iter::repeat(0).take(extra));
                r
            };
            let mut domain = s.domain.insert_indices(s.depth, extra);
            for k in s.depth..d {
                let mut row = vec![0; domain.width()];
                row[k] = 1;
                domain.add_equality(row).expect("width matches");
            }
            let pieces = s
                .pieces
                .iter()
                .map(|piece| {
                    let mut q = piece.insert_indices(s.depth, extra);
                    for k in s.depth..d {
                        let mut row = vec![0; q.width()];
                        row[k] = 1;
                        q.add_equality(row).expect("width matches");
                    }
                    q
                })
                .collect();
            Statement {
                id: s.id.clone(),
                depth: d,
                domain,
                pieces,
                write: Access {
                    array: s.write.array.clone(),
                    subs: s.write.subs.iter().map(|r| lift(r)).collect(),
                },
                body: s.body.map_rows(&lift),
            }
        })
        .collect();
    let edges = p
        .edges
        .iter()
        .map(|e| {
            let cd = depth_of[e.src.as_str()];
            let pd = depth_of[e.dst.as_str()];
            let mut context = e.context.insert_indices(cd, d - cd);
            for k in cd..d {
                let mut row = vec![0; context.width()];
                row[k] = 1;
                context.add_equality(row).expect("width matches");
            }
            let func = e.func.insert_inputs(cd, d - cd).insert_outputs(pd, d - pd);
            PrdgEdge {
                src: e.src.clone(),
                dst: e.dst.clone(),
                read: e.read,
                context,
                func,
                kind: e.kind,
            }
        })
        .collect();
    Prdg {
        statements,
        edges,
        ..p.clone()
    }
}

// ---------------------------------------------------------------------------
// On-disk format
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RowSpec {
    Coeffs(Vec<i64>),
    Text(String),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FnSpec {
    Matrix {
        #[serde(rename = "A")]
        a: Vec<Vec<i64>>,
        b: Vec<i64>,
    },
    Text(Vec<String>),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArrayFile {
    pub name: String,
    pub rank: usize,
    pub extents: Vec<String>,
    #[serde(default)]
    pub role: ArrayRole,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WriteFile {
    pub array: String,
    pub subscripts: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StatementFile {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depth: Option<usize>,
    pub domain: Vec<RowSpec>,
    pub writes: WriteFile,
    pub body: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeFile {
    pub src: String,
    pub dst: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub read: Option<usize>,
    pub context: Vec<RowSpec>,
    #[serde(rename = "fn")]
    pub func: FnSpec,
    #[serde(default)]
    pub kind: EdgeKind,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelFile {
    pub name: String,
    pub params: Vec<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub defaults: BTreeMap<String, i64>,
    #[serde(default, rename = "validate_with", skip_serializing_if = "BTreeMap::is_empty")]
    pub check_params: BTreeMap<String, i64>,
    pub indices: Vec<String>,
    pub arrays: Vec<ArrayFile>,
    pub statements: Vec<StatementFile>,
    #[serde(default)]
    pub edges: Vec<EdgeFile>,
    pub tilable_band: Vec<usize>,
}

fn expr_ctx<T>(r: std::result::Result<T, ExprError>, ctx: impl FnOnce() -> String) -> Result<T> {
    r.map_err(|source| KernelError::Expr {
        context: ctx(),
        source,
    })
}

fn rows_from_specs(specs: &[RowSpec], names: &[String], what: &str) -> Result<Vec<Vec<i64>>> {
    let width = names.len() + 1;
    let mut rows = Vec::new();
    for (k, spec) in specs.iter().enumerate() {
        match spec {
            RowSpec::Coeffs(c) => {
                if c.len() != width {
                    return invalid(format!("{what}: row {k} has {} coefficients, expected {width}", c.len()));
                }
                rows.push(c.clone());
            }
            RowSpec::Text(t) => rows.extend(expr_ctx(expr::parse_guard(t, names), || format!("{what}, row {k}"))?),
        }
    }
    Ok(rows)
}

/// Parses and validates a kernel document.
pub fn parse_kernel(text: &str) -> Result<Prdg> {
    let file: KernelFile = serde_json::from_str(text).map_err(|e| KernelError::Parse {
        line: e.line(),
        col: e.column(),
        msg: e.to_string(),
    })?;
    let p = from_file(&file)?;
    p.validate_structure()?;
    let check = if !p.check_params.is_empty() {
        Some(&p.check_params)
    } else if !p.defaults.is_empty() {
        Some(&p.defaults)
    } else {
        None
    };
    if let Some(c) = check {
        if let Ok(vals) = p.param_values(c) {
            embed(&p).validate_sampled(&vals)?;
        }
    }
    Ok(p)
}

pub fn from_file(f: &KernelFile) -> Result<Prdg> {
    let np = f.params.len();
    let d = f.indices.len();
    let mut names_seen = HashSet::new();
    for n in f.indices.iter().chain(&f.params) {
        if !names_seen.insert(n) {
            return invalid(format!("name `{n}` declared twice"));
        }
    }
    let arrays = f
        .arrays
        .iter()
        .map(|a| {
            if a.extents.len() != a.rank {
                return invalid(format!("array `{}` declares rank {} but {} extents", a.name, a.rank, a.extents.len()));
            }
            let extents = a
                .extents
                .iter()
                .map(|e| expr_ctx(expr::parse_affine(e, &f.params), || format!("extent of `{}`", a.name)))
                .collect::<Result<Vec<_>>>()?;
            Ok(ArrayDecl {
                name: a.name.clone(),
                extents,
                role: a.role,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut statements = Vec::new();
    let mut depth_of = HashMap::new();
    for s in &f.statements {
        let depth = s.depth.unwrap_or(d);
        if depth > d {
            return invalid(format!("statement `{}` is deeper than the nest", s.id));
        }
        let names: Vec<String> = f.indices[..depth].iter().chain(&f.params).cloned().collect();
        let rows = rows_from_specs(&s.domain, &names, &format!("domain of `{}`", s.id))?;
        let domain = Domain::new(depth, np, rows)?;
        let subs = s
            .writes
            .subscripts
            .iter()
            .map(|t| expr_ctx(expr::parse_affine(t, &names), || format!("write subscript of `{}`", s.id)))
            .collect::<Result<Vec<_>>>()?;
        let body = expr_ctx(expr::parse_expr(&s.body, &names), || format!("body of `{}`", s.id))?;
        depth_of.insert(s.id.clone(), depth);
        statements.push(Statement {
            id: s.id.clone(),
            depth,
            domain,
            pieces: Vec::new(),
            write: Access {
                array: s.writes.array.clone(),
                subs,
            },
            body,
        });
    }
    let mut edges = Vec::new();
    for e in &f.edges {
        let (Some(&cd), Some(&pd)) = (depth_of.get(&e.src), depth_of.get(&e.dst)) else {
            return invalid(format!("edge {} -> {} names an unknown statement", e.src, e.dst));
        };
        let names: Vec<String> = f.indices[..cd].iter().chain(&f.params).cloned().collect();
        let what = format!("edge {} -> {}", e.src, e.dst);
        // contexts are stored intersected with the consumer domain
        let mut context = Domain::new(cd, np, rows_from_specs(&e.context, &names, &what)?)?;
        let consumer = statements.iter().find(|s| s.id == e.src).expect("depth_of has it");
        for r in &consumer.domain.rows {
            if !context.rows.contains(r) {
                context.rows.push(r.clone());
            }
        }
        let func = match &e.func {
            FnSpec::Matrix { a, b } => IntAffineFn::new(a.clone(), b.clone(), cd + np)?,
            FnSpec::Text(rows) => {
                let rows = rows
                    .iter()
                    .map(|t| expr_ctx(expr::parse_affine(t, &names), || what.clone()))
                    .collect::<Result<Vec<_>>>()?;
                IntAffineFn::from_rows(&rows, cd + np)?
            }
        };
        if func.output_dim() != pd {
            return invalid(format!("{what}: function has {} outputs, producer depth is {pd}", func.output_dim()));
        }
        edges.push(PrdgEdge {
            src: e.src.clone(),
            dst: e.dst.clone(),
            read: e.read,
            context,
            func,
            kind: e.kind,
        });
    }
    for (k, v) in f.defaults.iter().chain(&f.check_params) {
        if !f.params.contains(k) {
            return invalid(format!("value given for unknown parameter `{k}`"));
        }
        let _ = v;
    }
    Ok(Prdg {
        name: f.name.clone(),
        params: f.params.clone(),
        defaults: f.defaults.clone(),
        check_params: f.check_params.clone(),
        indices: f.indices.clone(),
        arrays,
        statements,
        edges,
        tilable_band: f.tilable_band.clone(),
    })
}

/// Canonical document for a PRDG: rows as integer coefficients, functions
/// as `{A, b}`, subscripts and bodies as infix text.
pub fn to_file(p: &Prdg) -> KernelFile {
    KernelFile {
        name: p.name.clone(),
        params: p.params.clone(),
        defaults: p.defaults.clone(),
        check_params: p.check_params.clone(),
        indices: p.indices.clone(),
        arrays: p
            .arrays
            .iter()
            .map(|a| ArrayFile {
                name: a.name.clone(),
                rank: a.rank(),
                extents: a.extents.iter().map(|r| expr::affine_to_text(r, &p.params)).collect(),
                role: a.role,
            })
            .collect(),
        statements: p
            .statements
            .iter()
            .map(|s| {
                let names = p.names_at(s.depth);
                StatementFile {
                    id: s.id.clone(),
                    depth: (s.depth != p.depth()).then_some(s.depth),
                    domain: s.domain.rows.iter().cloned().map(RowSpec::Coeffs).collect(),
                    writes: WriteFile {
                        array: s.write.array.clone(),
                        subscripts: s.write.subs.iter().map(|r| expr::affine_to_text(r, &names)).collect(),
                    },
                    body: s.body.to_text(&names),
                }
            })
            .collect(),
        edges: p
            .edges
            .iter()
            .map(|e| EdgeFile {
                src: e.src.clone(),
                dst: e.dst.clone(),
                read: e.read,
                context: e.context.rows.iter().cloned().map(RowSpec::Coeffs).collect(),
                func: FnSpec::Matrix {
                    a: e.func.linear.clone(),
                    b: e.func.constant.clone(),
                },
                kind: e.kind,
            })
            .collect(),
        tilable_band: p.tilable_band.clone(),
    }
}

pub fn print_kernel(p: &Prdg) -> String {
    let mut s = serde_json::to_string_pretty(&to_file(p)).expect("kernel document serializes");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;

    #[test]
    fn fig7_statements_load() {
        let p = corpus::load("heat1d-fig7").unwrap();
        let ids: Vec<&str> = p.statements.iter().map(|s| s.id.as_str()).collect();
        assert_eq!(ids, ["S0", "S1", "S2", "S3", "S4"]);
        assert_eq!(p.statement("S2").unwrap().depth, 1);
    }

    #[test]
    fn triangle_domain_is_the_lower_triangle() {
        let p = corpus::load("triangle").unwrap();
        let s = &p.statements[0];
        let pts = s.domain.enumerate(&[6]).unwrap();
        let mut brute = Vec::new();
        for i in 0..6 {
            for j in 0..=i {
                brute.push(vec![i, j]);
            }
        }
        assert_eq!(pts, brute);
    }

    #[test]
    fn negative_band_component_rejected() {
        let text = corpus::source("triangle").unwrap().replace("\"i - 1\", \"j\"", "\"i + 1\", \"j\"");
        assert!(matches!(parse_kernel(&text), Err(KernelError::Validation(_))));
    }

    #[test]
    fn malformed_documents_report_positions() {
        match parse_kernel("{\n  \"name\": 3\n}") {
            Err(KernelError::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        let text = corpus::source("triangle").unwrap().replace("X[i - 1, j]", "X[i - 1, j");
        assert!(matches!(parse_kernel(&text), Err(KernelError::Expr { .. })));
    }

    #[test]
    fn embed_fig7_pins_s2() {
        let p = corpus::load("heat1d-fig7").unwrap();
        let e = embed(&p);
        assert!(e.is_perfect());
        let s2 = e.statement("S2").unwrap();
        let n = 4;
        let pts = s2.domain.enumerate(&[n]).unwrap();
        let expect: Vec<Vec<i64>> = (1..=2 * n).map(|t| vec![t, 0]).collect();
        assert_eq!(pts, expect);
        assert_eq!(p.instance_count(&[n]).unwrap(), e.instance_count(&[n]).unwrap());
        // already perfect -> unchanged
        assert_eq!(embed(&e), e);
    }

    #[test]
    fn embed_two_depths_preserves_instances() {
        let text = r#"{
            "name": "mixed", "params": ["N"], "indices": ["t", "i"],
            "arrays": [{"name": "A", "rank": 1, "extents": ["N"], "role": "output"},
                       {"name": "B", "rank": 2, "extents": ["N", "N"], "role": "output"}],
            "statements": [
              {"id": "P", "depth": 1, "domain": ["t >= 0", "t <= N - 1"], "writes": {"array": "A", "subscripts": ["t"]}, "body": "1.0"},
              {"id": "Q", "domain": ["t >= 0", "t <= N - 1", "i >= 1", "i <= N - 1"], "writes": {"array": "B", "subscripts": ["t", "i"]}, "body": "2.0"}
            ],
            "tilable_band": [0, 1]
        }"#;
        let p = parse_kernel(text).unwrap();
        let e = embed(&p);
        for n in 1..6 {
            assert_eq!(p.instance_count(&[n]).unwrap(), e.instance_count(&[n]).unwrap());
            assert_eq!(e.statements[0].domain.enumerate(&[n]).unwrap().len(), n as usize);
        }
        assert!(e.statements.iter().all(|s| s.depth == 2));
    }

    #[test]
    fn dependence_report_examples() {
        let p = embed(&corpus::load("heat1d-fig7").unwrap());
        let rep = check_dependences_sampled(&p, &[4]).unwrap();
        assert!(rep.is_clean());
        for e in rep.edges.iter().filter(|e| e.points > 0) {
            assert_eq!((e.min[0], e.max[0]), (1, 1), "{} -> {}", e.src, e.dst);
        }
        // artificial (-1, 0) offset inside the band
        let mut bad = p.clone();
        let mut e = bad.edges[0].clone();
        e.func = IntAffineFn::from_rows(&[vec![1, 0, 0, 1], vec![0, 1, 0, 0]], 3).unwrap();
        e.read = None;
        bad.edges.push(e);
        assert!(!check_dependences_sampled(&bad, &[4]).unwrap().is_clean());
        // empty context is vacuously clean
        let mut empty = p.clone();
        let mut e = empty.edges[0].clone();
        e.context.add_row(vec![0, 0, 0, -1]).unwrap();
        empty.edges = vec![e];
        let rep = check_dependences_sampled(&empty, &[4]).unwrap();
        assert!(rep.is_clean());
        assert_eq!(rep.edges[0].points, 0);
    }

    #[test]
    fn print_parse_is_identity_on_corpus() {
        for name in corpus::NAMES {
            let p = corpus::load(name).unwrap();
            let again = parse_kernel(&print_kernel(&p)).unwrap();
            assert_eq!(p, again, "{name}");
        }
    }
}
