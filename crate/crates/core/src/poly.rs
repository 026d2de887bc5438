//! Exact integer linear algebra over small dimensions: vectors, affine
//! functions, inequality systems and Fourier-Motzkin projection.
//!
//! Every arithmetic step is checked; an overflow surfaces as
//! [`PolyError::Overflow`] instead of wrapping.

use std::fmt;
use std::ops::Deref;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolyError {
    #[error("integer overflow in polyhedral arithmetic")]
    Overflow,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimMismatch { expected: usize, got: usize },
    #[error("domain is unbounded along dimension {dim}")]
    Unbounded { dim: usize },
    #[error("domain has no rational point")]
    Empty,
    #[error("invalid position {pos} for a space of dimension {dim}")]
    BadPosition { pos: usize, dim: usize },
}

pub type Result<T> = std::result::Result<T, PolyError>;

pub(crate) fn add(a: i64, b: i64) -> Result<i64> {
    a.checked_add(b).ok_or(PolyError::Overflow)
}

pub(crate) fn mul(a: i64, b: i64) -> Result<i64> {
    a.checked_mul(b).ok_or(PolyError::Overflow)
}

pub(crate) fn gcd(mut a: i64, mut b: i64) -> i64 {
    a = a.abs();
    b = b.abs();
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

pub fn floor_div(a: i64, b: i64) -> i64 {
    let q = a / b;
    if (a % b != 0) && ((a < 0) != (b < 0)) {
        q - 1
    } else {
        q
    }
}

pub fn ceil_div(a: i64, b: i64) -> i64 {
    -floor_div(-a, b)
}

/// Dot product of `coeffs` with `vals`, with a trailing constant term when
/// `coeffs` is one longer than `vals`.
pub(crate) fn dot_affine(coeffs: &[i64], vals: &[i64]) -> Result<i64> {
    let mut acc = 0i64;
    for (c, v) in coeffs.iter().zip(vals) {
        acc = add(acc, mul(*c, *v)?)?;
    }
    if coeffs.len() == vals.len() + 1 {
        acc = add(acc, coeffs[vals.len()])?;
    }
    Ok(acc)
}

/// An integer vector.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, Default)]
#[serde(transparent)]
pub struct IntVec(pub Vec<i64>);

impl IntVec {
    pub fn new(elems: Vec<i64>) -> Self {
        IntVec(elems)
    }

    pub fn zeros(dim: usize) -> Self {
        IntVec(vec![0; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn checked_add(&self, other: &IntVec) -> Result<IntVec> {
        self.check_dim(other)?;
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| add(*a, *b))
            .collect::<Result<Vec<_>>>()
            .map(IntVec)
    }

    pub fn checked_sub(&self, other: &IntVec) -> Result<IntVec> {
        self.check_dim(other)?;
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| a.checked_sub(*b).ok_or(PolyError::Overflow))
            .collect::<Result<Vec<_>>>()
            .map(IntVec)
    }

    pub fn l1_norm(&self) -> i64 {
        self.0.iter().map(|x| x.abs()).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&x| x == 0)
    }

    /// Lexicographically positive: the first nonzero entry is positive.
    pub fn is_lex_positive(&self) -> bool {
        self.0.iter().find(|&&x| x != 0).is_some_and(|&x| x > 0)
    }

    fn check_dim(&self, other: &IntVec) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(PolyError::DimMismatch {
                expected: self.dim(),
                got: other.dim(),
            });
        }
        Ok(())
    }
}

impl Deref for IntVec {
    type Target = [i64];
    fn deref(&self) -> &[i64] {
        &self.0
    }
}

impl From<Vec<i64>> for IntVec {
    fn from(v: Vec<i64>) -> Self {
        IntVec(v)
    }
}

impl fmt::Display for IntVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (k, x) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, ")")
    }
}

/// `f(x) = A x + b` with `A` stored row-major (one row per output).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct IntAffineFn {
    pub linear: Vec<Vec<i64>>,
    pub constant: Vec<i64>,
    input_dim: usize,
}

impl IntAffineFn {
    pub fn new(linear: Vec<Vec<i64>>, constant: Vec<i64>, input_dim: usize) -> Result<Self> {
        if linear.len() != constant.len() {
            return Err(PolyError::DimMismatch {
                expected: linear.len(),
                got: constant.len(),
            });
        }
        for row in &linear {
            if row.len() != input_dim {
                return Err(PolyError::DimMismatch {
                    expected: input_dim,
                    got: row.len(),
                });
            }
        }
        Ok(IntAffineFn {
            linear,
            constant,
            input_dim,
        })
    }

    /// Builds a function from rows of the form `[a_0 .. a_{n-1}, b]`.
    pub fn from_rows(rows: &[Vec<i64>], input_dim: usize) -> Result<Self> {
        let mut linear = Vec::with_capacity(rows.len());
        let mut constant = Vec::with_capacity(rows.len());
        for r in rows {
            if r.len() != input_dim + 1 {
                return Err(PolyError::DimMismatch {
                    expected: input_dim + 1,
                    got: r.len(),
                });
            }
            linear.push(r[..input_dim].to_vec());
            constant.push(r[input_dim]);
        }
        Self::new(linear, constant, input_dim)
    }

    pub fn identity(n: usize) -> Self {
        let linear = (0..n)
            .map(|i| (0..n).map(|j| i64::from(i == j)).collect())
            .collect();
        IntAffineFn {
            linear,
            constant: vec![0; n],
            input_dim: n,
        }
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn output_dim(&self) -> usize {
        self.constant.len()
    }

    /// Row `k` as `[a_k, b_k]`.
    pub fn row(&self, k: usize) -> Vec<i64> {
        let mut r = self.linear[k].clone();
        r.push(self.constant[k]);
        r
    }

    pub fn rows(&self) -> Vec<Vec<i64>> {
        (0..self.output_dim()).map(|k| self.row(k)).collect()
    }

    pub fn apply(&self, x: &[i64]) -> Result<IntVec> {
        if x.len() != self.input_dim {
            return Err(PolyError::DimMismatch {
                expected: self.input_dim,
                got: x.len(),
            });
        }
        self.linear
            .iter()
            .zip(&self.constant)
            .map(|(row, b)| add(dot_affine(row, x)?, *b))
            .collect::<Result<Vec<_>>>()
            .map(IntVec)
    }

    /// True when the linear part is the identity.
    pub fn is_uniform(&self) -> bool {
        self.output_dim() == self.input_dim
            && self
                .linear
                .iter()
                .enumerate()
                .all(|(i, row)| row.iter().enumerate().all(|(j, &a)| a == i64::from(i == j)))
    }

    /// Inserts zero input columns at `pos`.
    pub fn insert_inputs(&self, pos: usize, count: usize) -> Self {
        let linear = self
            .linear
            .iter()
            .map(|r| {
                let mut r = r.clone();
                r.splice(pos..pos, std::iter::repeat(0).take(count));
                r
            })
            .collect();
        IntAffineFn {
            linear,
            constant: self.constant.clone(),
            input_dim: self.input_dim + count,
        }
    }

    /// Inserts constant-zero output rows at `pos`.
    pub fn insert_outputs(&self, pos: usize, count: usize) -> Self {
        let mut linear = self.linear.clone();
        let mut constant = self.constant.clone();
        for _ in 0..count {
            linear.insert(pos, vec![0; self.input_dim]);
            constant.insert(pos, 0);
        }
        IntAffineFn {
            linear,
            constant,
            input_dim: self.input_dim,
        }
    }

    /// Substitutes trailing inputs (parameters) by constants.
    pub fn bind_trailing(&self, values: &[i64]) -> Result<Self> {
        let keep = self.input_dim.checked_sub(values.len()).ok_or(PolyError::DimMismatch {
            expected: self.input_dim,
            got: values.len(),
        })?;
        let mut linear = Vec::with_capacity(self.output_dim());
        let mut constant = Vec::with_capacity(self.output_dim());
        for (row, b) in self.linear.iter().zip(&self.constant) {
            let extra = dot_affine(&row[keep..], values)?;
            linear.push(row[..keep].to_vec());
            constant.push(add(*b, extra)?);
        }
        Ok(IntAffineFn {
            linear,
            constant,
            input_dim: keep,
        })
    }
}

/// Conjunction of integer inequalities `row · (x, p, 1) >= 0` over loop
/// indices `x` and parameters `p`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Domain {
    pub index_dim: usize,
    pub param_dim: usize,
    pub rows: Vec<Vec<i64>>,
}

impl Domain {
    pub fn universe(index_dim: usize, param_dim: usize) -> Self {
        Domain {
            index_dim,
            param_dim,
            rows: Vec::new(),
        }
    }

    pub fn new(index_dim: usize, param_dim: usize, rows: Vec<Vec<i64>>) -> Result<Self> {
        let width = index_dim + param_dim + 1;
        for r in &rows {
            if r.len() != width {
                return Err(PolyError::DimMismatch {
                    expected: width,
                    got: r.len(),
                });
            }
        }
        Ok(Domain {
            index_dim,
            param_dim,
            rows,
        })
    }

    pub fn width(&self) -> usize {
        self.index_dim + self.param_dim + 1
    }

    pub fn add_row(&mut self, row: Vec<i64>) -> Result<()> {
        if row.len() != self.width() {
            return Err(PolyError::DimMismatch {
                expected: self.width(),
                got: row.len(),
            });
        }
        self.rows.push(row);
        Ok(())
    }

    /// Adds `row = 0` as two inequalities.
    pub fn add_equality(&mut self, row: Vec<i64>) -> Result<()> {
        let neg = row.iter().map(|x| -x).collect();
        self.add_row(row)?;
        self.add_row(neg)
    }

    pub fn intersect(&self, other: &Domain) -> Result<Domain> {
        if self.index_dim != other.index_dim || self.param_dim != other.param_dim {
            return Err(PolyError::DimMismatch {
                expected: self.width(),
                got: other.width(),
            });
        }
        let mut rows = self.rows.clone();
        rows.extend(other.rows.iter().cloned());
        Ok(Domain {
            index_dim: self.index_dim,
            param_dim: self.param_dim,
            rows,
        })
    }

    pub fn contains(&self, x: &[i64], p: &[i64]) -> Result<bool> {
        if x.len() != self.index_dim || p.len() != self.param_dim {
            return Err(PolyError::DimMismatch {
                expected: self.index_dim + self.param_dim,
                got: x.len() + p.len(),
            });
        }
        for r in &self.rows {
            let v = add(dot_affine(&r[..self.index_dim], x)?, dot_affine(&r[self.index_dim..], p)?)?;
            if v < 0 {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Replaces parameters by values, leaving a domain with no parameters.
    pub fn bind_params(&self, p: &[i64]) -> Result<Domain> {
        if p.len() != self.param_dim {
            return Err(PolyError::DimMismatch {
                expected: self.param_dim,
                got: p.len(),
            });
        }
        let n = self.index_dim;
        let rows = self
            .rows
            .iter()
            .map(|r| {
                let c = dot_affine(&r[n..], p)?;
                let mut out = r[..n].to_vec();
                out.push(c);
                Ok(out)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Domain {
            index_dim: n,
            param_dim: 0,
            rows,
        })
    }

    /// Inserts `count` unconstrained index dimensions at `pos`.
    pub fn insert_indices(&self, pos: usize, count: usize) -> Domain {
        let rows = self
            .rows
            .iter()
            .map(|r| {
                let mut r = r.clone();
                r.splice(pos..pos, std::iter::repeat(0).take(count));
                r
            })
            .collect();
        Domain {
            index_dim: self.index_dim + count,
            param_dim: self.param_dim,
            rows,
        }
    }

    /// Reinterprets the leading `count` parameters as trailing index
    /// dimensions (used to project symbolic box corners).
    pub fn with_params_as_indices(&self, count: usize) -> Domain {
        Domain {
            index_dim: self.index_dim + count,
            param_dim: self.param_dim - count,
            rows: self.rows.clone(),
        }
    }

    /// Rational projection onto the indices not listed in `eliminate`.
    pub fn fm_project(&self, eliminate: &[usize]) -> Result<Domain> {
        for &e in eliminate {
            if e >= self.index_dim {
                return Err(PolyError::BadPosition {
                    pos: e,
                    dim: self.index_dim,
                });
            }
        }
        let mut elim: Vec<usize> = eliminate.to_vec();
        elim.sort_unstable();
        elim.dedup();
        let mut rows = normalize_rows(&self.rows, self.index_dim + self.param_dim)?;
        for &v in &elim {
            rows = fm_eliminate(&rows, v, self.index_dim + self.param_dim)?;
        }
        // drop eliminated columns (all zero now)
        for &v in elim.iter().rev() {
            for r in rows.iter_mut() {
                r.remove(v);
            }
        }
        Ok(Domain {
            index_dim: self.index_dim - elim.len(),
            param_dim: self.param_dim,
            rows,
        })
    }

    /// True only when the domain, with parameters bound, has no rational
    /// point.
    pub fn is_empty_rational(&self, p: &[i64]) -> Result<bool> {
        let bound = self.bind_params(p)?;
        let all: Vec<usize> = (0..bound.index_dim).collect();
        let proj = bound.fm_project(&all)?;
        Ok(proj.rows.iter().any(|r| r[0] < 0))
    }

    /// Tightest integer box enclosing the domain once parameters are bound.
    pub fn bounding_box(&self, p: &[i64]) -> Result<OrthantBox> {
        let bound = self.bind_params(p)?;
        let n = bound.index_dim;
        let mut origin = Vec::with_capacity(n);
        let mut size = Vec::with_capacity(n);
        for d in 0..n {
            let (lo, hi) = bound.dim_range(d)?;
            if lo > hi {
                return Err(PolyError::Empty);
            }
            origin.push(lo);
            size.push(hi.checked_sub(lo).and_then(|x| x.checked_add(1)).ok_or(PolyError::Overflow)?);
        }
        Ok(OrthantBox::new(IntVec(origin), IntVec(size)))
    }

    /// Integer range `[lo, hi]` of index `d` in a parameter-free domain.
    fn dim_range(&self, d: usize) -> Result<(i64, i64)> {
        debug_assert_eq!(self.param_dim, 0);
        let others: Vec<usize> = (0..self.index_dim).filter(|&k| k != d).collect();
        let proj = self.fm_project(&others)?;
        let mut lo: Option<i64> = None;
        let mut hi: Option<i64> = None;
        for r in &proj.rows {
            let (c, c0) = (r[0], r[1]);
            if c > 0 {
                let b = ceil_div(-c0, c);
                lo = Some(lo.map_or(b, |l| l.max(b)));
            } else if c < 0 {
                let b = floor_div(c0, -c);
                hi = Some(hi.map_or(b, |h| h.min(b)));
            } else if c0 < 0 {
                return Err(PolyError::Empty);
            }
        }
        match (lo, hi) {
            (Some(l), Some(h)) => Ok((l, h)),
            _ => Err(PolyError::Unbounded { dim: d }),
        }
    }

    /// Integer range of the affine form `row · (x, p, 1)` over the domain.
    pub fn affine_range(&self, row: &[i64], p: &[i64]) -> Result<(i64, i64)> {
        if row.len() != self.width() {
            return Err(PolyError::DimMismatch {
                expected: self.width(),
                got: row.len(),
            });
        }
        // new index y at position 0 with y - row = 0
        let mut lifted = self.insert_indices(0, 1);
        let mut eq = vec![1];
        eq.extend(row.iter().map(|x| -x));
        lifted.add_equality(eq)?;
        let bound = lifted.bind_params(p)?;
        bound.dim_range(0)
    }

    /// Enumerates all integer points (parameters bound) in lexicographic
    /// order. Intended for small domains.
    pub fn enumerate(&self, p: &[i64]) -> Result<Vec<Vec<i64>>> {
        let bb = match self.bounding_box(p) {
            Ok(bb) => bb,
            Err(PolyError::Empty) => return Ok(Vec::new()),
            Err(e) => return Err(e),
        };
        let mut out = Vec::new();
        for x in bb.points() {
            if self.contains(&x, p)? {
                out.push(x);
            }
        }
        Ok(out)
    }

    /// Image `{ f(z) | z in self }` as a rational projection. `f` takes
    /// `(indices, params)` and produces `out_dim` coordinates.
    pub fn image(&self, f: &IntAffineFn) -> Result<Domain> {
        let n = self.index_dim;
        let m = f.output_dim();
        if f.input_dim() != n + self.param_dim {
            return Err(PolyError::DimMismatch {
                expected: n + self.param_dim,
                got: f.input_dim(),
            });
        }
        // space (y: m, z: n, p, 1)
        let mut lifted = self.insert_indices(0, m);
        for k in 0..m {
            let mut eq = vec![0; m + n + self.param_dim + 1];
            eq[k] = 1;
            for (j, a) in f.linear[k].iter().enumerate() {
                eq[m + j] = -a;
            }
            eq[m + n + self.param_dim] = -f.constant[k];
            lifted.add_equality(eq)?;
        }
        let elim: Vec<usize> = (m..m + n).collect();
        lifted.fm_project(&elim)
    }

    /// Index equalities implied by the domain at the given parameters:
    /// rows `r` of the domain for which `r >= 1` is infeasible.
    pub fn implicit_equalities(&self, p: &[i64]) -> Result<Vec<Vec<i64>>> {
        let mut eqs = Vec::new();
        for r in &self.rows {
            if r[..self.index_dim].iter().all(|&c| c == 0) {
                continue;
            }
            let mut strict = r.clone();
            let last = strict.len() - 1;
            strict[last] = add(strict[last], -1)?;
            let mut d = self.clone();
            d.rows.push(strict);
            if d.is_empty_rational(p)? {
                eqs.push(r.clone());
            }
        }
        Ok(eqs)
    }
}

/// Divides each row by the gcd of all its entries, drops tautologies and
/// duplicates, and collapses contradictions into a single `-1 >= 0` row.
/// `nvars` is the number of non-constant columns.
pub(crate) fn normalize_rows(rows: &[Vec<i64>], nvars: usize) -> Result<Vec<Vec<i64>>> {
    let mut out: Vec<Vec<i64>> = Vec::with_capacity(rows.len());
    for r in rows {
        if r[..nvars].iter().all(|&c| c == 0) {
            if r[nvars] < 0 {
                let mut bad = vec![0; nvars + 1];
                bad[nvars] = -1;
                return Ok(vec![bad]);
            }
            continue;
        }
        let g = r.iter().fold(0, |g, &x| gcd(g, x));
        let nr: Vec<i64> = if g > 1 { r.iter().map(|x| x / g).collect() } else { r.clone() };
        out.push(nr);
    }
    out.sort();
    out.dedup();
    // keep only the tightest constant for identical linear parts
    let mut pruned: Vec<Vec<i64>> = Vec::with_capacity(out.len());
    for r in out {
        if let Some(last) = pruned.last_mut() {
            if last[..nvars] == r[..nvars] {
                if r[nvars] < last[nvars] {
                    *last = r;
                }
                continue;
            }
        }
        pruned.push(r);
    }
    Ok(pruned)
}

fn fm_eliminate(rows: &[Vec<i64>], v: usize, nvars: usize) -> Result<Vec<Vec<i64>>> {
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    let mut out = Vec::new();
    for r in rows {
        match r[v].signum() {
            1 => pos.push(r),
            -1 => neg.push(r),
            _ => out.push(r.clone()),
        }
    }
    for p in &pos {
        for n in &neg {
            let a = p[v];
            let b = -n[v];
            let row = p
                .iter()
                .zip(n.iter())
                .map(|(x, y)| add(mul(*x, b)?, mul(*y, a)?))
                .collect::<Result<Vec<_>>>()?;
            out.push(row);
        }
    }
    normalize_rows(&out, nvars)
}

/// Hyper-rectangle `origin_i <= p_i < origin_i + size_i`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct OrthantBox {
    pub origin: IntVec,
    pub size: IntVec,
}

impl OrthantBox {
    pub fn new(origin: IntVec, size: IntVec) -> Self {
        assert_eq!(origin.dim(), size.dim(), "origin/size dimension mismatch");
        OrthantBox { origin, size }
    }

    pub fn dim(&self) -> usize {
        self.origin.dim()
    }

    pub fn contains(&self, p: &[i64]) -> bool {
        p.len() == self.dim()
            && p.iter()
                .zip(self.origin.iter().zip(self.size.iter()))
                .all(|(&x, (&o, &s))| o <= x && x < o + s)
    }

    pub fn volume(&self) -> u128 {
        self.size.iter().map(|&s| s.max(0) as u128).product()
    }

    pub fn is_zero(&self) -> bool {
        self.size.iter().any(|&s| s <= 0)
    }

    /// Inequality rows over `(x, p, 1)` describing the box.
    pub fn rows(&self, param_dim: usize) -> Vec<Vec<i64>> {
        let n = self.dim();
        let mut rows = Vec::with_capacity(2 * n);
        for k in 0..n {
            let mut lo = vec![0; n + param_dim + 1];
            lo[k] = 1;
            lo[n + param_dim] = -self.origin[k];
            rows.push(lo);
            let mut hi = vec![0; n + param_dim + 1];
            hi[k] = -1;
            hi[n + param_dim] = self.origin[k] + self.size[k] - 1;
            rows.push(hi);
        }
        rows
    }

    /// Lexicographic point iterator.
    pub fn points(&self) -> BoxPoints {
        BoxPoints {
            origin: self.origin.0.clone(),
            end: self
                .origin
                .iter()
                .zip(self.size.iter())
                .map(|(o, s)| o + s)
                .collect(),
            cur: if self.is_zero() { None } else { Some(self.origin.0.clone()) },
        }
    }
}

impl fmt::Display for OrthantBox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "origin={} size={}", self.origin, self.size)
    }
}

pub struct BoxPoints {
    origin: Vec<i64>,
    end: Vec<i64>,
    cur: Option<Vec<i64>>,
}

impl Iterator for BoxPoints {
    type Item = Vec<i64>;
    fn next(&mut self) -> Option<Vec<i64>> {
        let cur = self.cur.take()?;
        let mut nxt = cur.clone();
        let mut k = nxt.len();
        loop {
            if k == 0 {
                self.cur = None;
                break;
            }
            k -= 1;
            nxt[k] += 1;
            if nxt[k] < self.end[k] {
                self.cur = Some(nxt);
                break;
            }
            nxt[k] = self.origin[k];
        }
        Some(cur)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dom(n: usize, p: usize, rows: &[&[i64]]) -> Domain {
        Domain::new(n, p, rows.iter().map(|r| r.to_vec()).collect()).unwrap()
    }

    // triangle {0 <= j <= i <= N-1} over (i, j; N)
    fn triangle() -> Domain {
        dom(2, 1, &[&[0, 1, 0, 0], &[1, -1, 0, 0], &[-1, 0, 1, -1]])
    }

    #[test]
    fn apply_affine_examples() {
        let f = IntAffineFn::new(vec![vec![1, 0], vec![0, 1]], vec![-1, -2], 2).unwrap();
        assert_eq!(f.apply(&[5, 7]).unwrap(), IntVec(vec![4, 5]));
        let id = IntAffineFn::identity(3);
        assert_eq!(id.apply(&[3, -4, 9]).unwrap(), IntVec(vec![3, -4, 9]));
        assert!(id.is_uniform());
        let diag = IntAffineFn::new(vec![vec![1, 0], vec![1, 0]], vec![-1, -1], 2).unwrap();
        assert_eq!(diag.apply(&[3, 9]).unwrap(), IntVec(vec![2, 2]));
        assert!(!diag.is_uniform());
        assert!(matches!(f.apply(&[1]), Err(PolyError::DimMismatch { .. })));
    }

    #[test]
    fn overflow_is_loud() {
        let f = IntAffineFn::new(vec![vec![i64::MAX]], vec![1], 1).unwrap();
        assert_eq!(f.apply(&[1]), Err(PolyError::Overflow));
        assert_eq!(IntVec(vec![i64::MAX]).checked_add(&IntVec(vec![1])), Err(PolyError::Overflow));
    }

    #[test]
    fn fm_project_examples() {
        // {0<=i<=7, 0<=j<=i} eliminate j -> {0<=i<=7}
        let d = dom(2, 0, &[&[1, 0, 0], &[-1, 0, 7], &[0, 1, 0], &[1, -1, 0]]);
        let p = d.fm_project(&[1]).unwrap();
        assert_eq!(p.index_dim, 1);
        let pts: Vec<i64> = (-3..12).filter(|&i| p.contains(&[i], &[]).unwrap()).collect();
        assert_eq!(pts, (0..=7).collect::<Vec<_>>());

        // {i = j-1, 1<=i<=5} eliminate i -> {2 <= j <= 6}
        let d = dom(2, 0, &[&[1, -1, 1], &[-1, 1, -1], &[1, 0, -1], &[-1, 0, 5]]);
        let p = d.fm_project(&[0]).unwrap();
        let pts: Vec<i64> = (-3..12).filter(|&j| p.contains(&[j], &[]).unwrap()).collect();
        assert_eq!(pts, (2..=6).collect::<Vec<_>>());

        // triangle at N=8 eliminate i -> {0<=j<=7}, checked against enumeration
        let t = triangle();
        let p = t.fm_project(&[0]).unwrap();
        let mut js: Vec<i64> = t.enumerate(&[8]).unwrap().into_iter().map(|x| x[1]).collect();
        js.sort_unstable();
        js.dedup();
        let proj: Vec<i64> = (-5..15).filter(|&j| p.contains(&[j], &[8]).unwrap()).collect();
        assert_eq!(proj, js);
    }

    #[test]
    fn emptiness_examples() {
        assert!(dom(1, 0, &[&[1, 0], &[-1, -1]]).is_empty_rational(&[]).unwrap());
        assert!(!dom(1, 0, &[&[1, 0], &[-1, 7]]).is_empty_rational(&[]).unwrap());
        // rows 0..3, cols 4..7 against the triangle at N = 8
        let b = OrthantBox::new(IntVec(vec![0, 4]), IntVec(vec![4, 4]));
        let mut d = triangle();
        for r in b.rows(1) {
            d.add_row(r).unwrap();
        }
        assert!(d.enumerate(&[8]).unwrap().is_empty());
        assert!(d.is_empty_rational(&[8]).unwrap());
    }

    #[test]
    fn bounding_box_examples() {
        assert_eq!(
            triangle().bounding_box(&[8]).unwrap(),
            OrthantBox::new(IntVec(vec![0, 0]), IntVec(vec![8, 8]))
        );
        // {1<=t<=2N, 1<=i<=N-1}, N=10
        let r = dom(2, 1, &[&[1, 0, 0, -1], &[-1, 0, 2, 0], &[0, 1, 0, -1], &[0, -1, 1, -1]]);
        assert_eq!(
            r.bounding_box(&[10]).unwrap(),
            OrthantBox::new(IntVec(vec![1, 1]), IntVec(vec![20, 9]))
        );
        let band = dom(2, 0, &[&[1, -1, 1], &[-1, 1, -1], &[1, 0, -1], &[-1, 0, 5]]);
        assert_eq!(band.enumerate(&[]).unwrap().len(), 5);
        assert_eq!(
            band.bounding_box(&[]).unwrap(),
            OrthantBox::new(IntVec(vec![1, 2]), IntVec(vec![5, 5]))
        );
        let unb = dom(1, 0, &[&[1, 0]]);
        assert_eq!(unb.bounding_box(&[]), Err(PolyError::Unbounded { dim: 0 }));
    }

    #[test]
    fn affine_range_and_image() {
        let t = triangle();
        // i - j over the triangle at N = 8 spans [0, 7]
        assert_eq!(t.affine_range(&[1, -1, 0, 0], &[8]).unwrap(), (0, 7));
        // image of the triangle under (i, j) -> (i - j)
        let f = IntAffineFn::new(vec![vec![1, -1, 0]], vec![0], 3).unwrap();
        let img = t.image(&f).unwrap();
        assert_eq!(img.index_dim, 1);
        assert_eq!(img.bounding_box(&[8]).unwrap().size, IntVec(vec![8]));
    }

    #[test]
    fn box_points_are_lexicographic() {
        let b = OrthantBox::new(IntVec(vec![1, 0]), IntVec(vec![2, 2]));
        let pts: Vec<_> = b.points().collect();
        assert_eq!(pts, vec![vec![1, 0], vec![1, 1], vec![2, 0], vec![2, 1]]);
        assert_eq!(OrthantBox::new(IntVec(vec![0]), IntVec(vec![0])).points().count(), 0);
        assert_eq!(b.volume(), 4);
    }

    #[test]
    fn implicit_equalities_found() {
        let band = dom(2, 0, &[&[1, -1, 1], &[-1, 1, -1], &[1, 0, -1], &[-1, 0, 5]]);
        let eqs = band.implicit_equalities(&[]).unwrap();
        assert_eq!(eqs.len(), 2);
    }
}
