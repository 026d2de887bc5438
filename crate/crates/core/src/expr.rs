//! Statement bodies: a small infix expression language over array reads,
//! loop indices and parameters.
//!
//! Grammar (lowest precedence first):
//!
//! ```text
//! expr    := add [ cmp add { "&&" add cmp add } "?" expr ":" expr ]
//! add     := mul { ("+" | "-") mul }
//! mul     := unary { ("*" | "/") unary }
//! unary   := "-" unary | primary
//! primary := NUMBER | NAME | NAME "[" expr { "," expr } "]"
//!          | ("min" | "max") "(" expr "," expr ")" | "sqrt" "(" expr ")"
//!          | "(" expr ")"
//! cmp     := ">=" | "<=" | "==" | ">" | "<"
//! ```
//!
//! Subscripts and guard operands must be affine in the indices and
//! parameters. Integer literals and index/parameter names evaluate to their
//! value as a double.

use std::fmt::Write as _;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{msg} at column {col}")]
pub struct ExprError {
    pub col: usize,
    pub msg: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Min,
    Max,
}

/// Expression tree. Affine rows are over `(indices, params, 1)` of the
/// owning statement.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    /// Integer literal or a single index/parameter, used as a value.
    Affine(Vec<i64>),
    Read { array: String, subs: Vec<Vec<i64>> },
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    Sqrt(Box<Expr>),
    /// `guard ? then : otherwise`; the guard is a conjunction of `row >= 0`.
    Cond {
        guard: Vec<Vec<i64>>,
        then: Box<Expr>,
        otherwise: Box<Expr>,
    },
}

/// A located array read: ordinal in pre-order, plus the guards enclosing it.
#[derive(Debug, Clone, PartialEq)]
pub struct ReadSite<'a> {
    pub ordinal: usize,
    pub array: &'a str,
    pub subs: &'a [Vec<i64>],
    /// Each entry is a conjunction; the read is evaluated only where all
    /// hold, and for `negated` guards where the guard does not hold.
    pub guards: Vec<(&'a [Vec<i64>], bool)>,
}

impl Expr {
    /// Array reads in pre-order (left to right).
    pub fn reads(&self) -> Vec<ReadSite<'_>> {
        let mut out = Vec::new();
        let mut guards = Vec::new();
        self.collect_reads(&mut out, &mut guards);
        out
    }

    fn collect_reads<'a>(&'a self, out: &mut Vec<ReadSite<'a>>, guards: &mut Vec<(&'a [Vec<i64>], bool)>) {
        match self {
            Expr::Num(_) | Expr::Affine(_) => {}
            Expr::Read { array, subs } => out.push(ReadSite {
                ordinal: out.len(),
                array,
                subs,
                guards: guards.clone(),
            }),
            Expr::Bin(_, a, b) => {
                a.collect_reads(out, guards);
                b.collect_reads(out, guards);
            }
            Expr::Neg(a) | Expr::Sqrt(a) => a.collect_reads(out, guards),
            Expr::Cond {
                guard,
                then,
                otherwise,
            } => {
                guards.push((guard, true));
                then.collect_reads(out, guards);
                guards.pop();
                guards.push((guard, false));
                otherwise.collect_reads(out, guards);
                guards.pop();
            }
        }
    }

    /// Applies `f` to every affine row (subscripts, guards, affine atoms).
    pub fn map_rows(&self, f: &impl Fn(&[i64]) -> Vec<i64>) -> Expr {
        match self {
            Expr::Num(x) => Expr::Num(*x),
            Expr::Affine(r) => Expr::Affine(f(r)),
            Expr::Read { array, subs } => Expr::Read {
                array: array.clone(),
                subs: subs.iter().map(|r| f(r)).collect(),
            },
            Expr::Bin(op, a, b) => Expr::Bin(*op, Box::new(a.map_rows(f)), Box::new(b.map_rows(f))),
            Expr::Neg(a) => Expr::Neg(Box::new(a.map_rows(f))),
            Expr::Sqrt(a) => Expr::Sqrt(Box::new(a.map_rows(f))),
            Expr::Cond {
                guard,
                then,
                otherwise,
            } => Expr::Cond {
                guard: guard.iter().map(|r| f(r)).collect(),
                then: Box::new(then.map_rows(f)),
                otherwise: Box::new(otherwise.map_rows(f)),
            },
        }
    }

    /// Replaces the read with pre-order `ordinal` by `replacement`.
    pub fn replace_read(&self, ordinal: usize, replacement: &Expr) -> Expr {
        let mut counter = 0;
        self.replace_read_inner(ordinal, replacement, &mut counter)
    }

    fn replace_read_inner(&self, ordinal: usize, rep: &Expr, counter: &mut usize) -> Expr {
        match self {
            Expr::Read { .. } => {
                let k = *counter;
                *counter += 1;
                if k == ordinal {
                    rep.clone()
                } else {
                    self.clone()
                }
            }
            Expr::Num(_) | Expr::Affine(_) => self.clone(),
            Expr::Bin(op, a, b) => {
                let a = a.replace_read_inner(ordinal, rep, counter);
                let b = b.replace_read_inner(ordinal, rep, counter);
                Expr::Bin(*op, Box::new(a), Box::new(b))
            }
            Expr::Neg(a) => Expr::Neg(Box::new(a.replace_read_inner(ordinal, rep, counter))),
            Expr::Sqrt(a) => Expr::Sqrt(Box::new(a.replace_read_inner(ordinal, rep, counter))),
            Expr::Cond {
                guard,
                then,
                otherwise,
            } => {
                let t = then.replace_read_inner(ordinal, rep, counter);
                let o = otherwise.replace_read_inner(ordinal, rep, counter);
                Expr::Cond {
                    guard: guard.clone(),
                    then: Box::new(t),
                    otherwise: Box::new(o),
                }
            }
        }
    }

    /// Renders the expression in the infix grammar. `names` are the index
    /// names followed by the parameter names.
    pub fn to_text(&self, names: &[String]) -> String {
        let mut s = String::new();
        self.write_text(names, &mut s, true);
        s
    }

    fn write_text(&self, names: &[String], s: &mut String, top: bool) {
        match self {
            Expr::Num(x) => s.push_str(&format_float(*x)),
            Expr::Affine(r) => {
                let t = affine_to_text(r, names);
                if top || is_atomic_affine(r) {
                    s.push_str(&t);
                } else {
                    let _ = write!(s, "({t})");
                }
            }
            Expr::Read { array, subs } => {
                s.push_str(array);
                s.push('[');
                for (k, r) in subs.iter().enumerate() {
                    if k > 0 {
                        s.push_str(", ");
                    }
                    s.push_str(&affine_to_text(r, names));
                }
                s.push(']');
            }
            Expr::Bin(op @ (BinOp::Min | BinOp::Max), a, b) => {
                s.push_str(if *op == BinOp::Min { "min(" } else { "max(" });
                a.write_text(names, s, true);
                s.push_str(", ");
                b.write_text(names, s, true);
                s.push(')');
            }
            Expr::Bin(op, a, b) => {
                if !top {
                    s.push('(');
                }
                a.write_text(names, s, false);
                s.push_str(match op {
                    BinOp::Add => " + ",
                    BinOp::Sub => " - ",
                    BinOp::Mul => " * ",
                    _ => " / ",
                });
                b.write_text(names, s, false);
                if !top {
                    s.push(')');
                }
            }
            Expr::Neg(a) => {
                s.push('-');
                a.write_text(names, s, false);
            }
            Expr::Sqrt(a) => {
                s.push_str("sqrt(");
                a.write_text(names, s, true);
                s.push(')');
            }
            Expr::Cond {
                guard,
                then,
                otherwise,
            } => {
                if !top {
                    s.push('(');
                }
                s.push_str(&guard_to_text(guard, names));
                s.push_str(" ? ");
                then.write_text(names, s, true);
                s.push_str(" : ");
                otherwise.write_text(names, s, true);
                if !top {
                    s.push(')');
                }
            }
        }
    }
}

fn is_atomic_affine(r: &[i64]) -> bool {
    let nz = r.iter().filter(|&&c| c != 0).count();
    nz == 0 || (nz == 1 && r.iter().all(|&c| c >= 0) && r[..r.len() - 1].iter().all(|&c| c <= 1))
}

/// Shortest round-trip decimal with a guaranteed float marker.
pub fn format_float(x: f64) -> String {
    let s = format!("{x:?}");
    if s.contains('.') || s.contains('e') || s.contains("inf") || s.contains("NaN") {
        s
    } else {
        format!("{s}.0")
    }
}

/// Renders `row · (vars, 1)` as `2*i - N + 3`.
pub fn affine_to_text(row: &[i64], names: &[String]) -> String {
    let n = row.len() - 1;
    let mut s = String::new();
    for (k, &c) in row[..n].iter().enumerate() {
        if c == 0 {
            continue;
        }
        let name = &names[k];
        if s.is_empty() {
            match c {
                1 => s.push_str(name),
                -1 => {
                    let _ = write!(s, "-{name}");
                }
                _ => {
                    let _ = write!(s, "{c}*{name}");
                }
            }
        } else {
            let sign = if c < 0 { " - " } else { " + " };
            s.push_str(sign);
            if c.abs() == 1 {
                s.push_str(name);
            } else {
                let _ = write!(s, "{}*{name}", c.abs());
            }
        }
    }
    let c0 = row[n];
    if s.is_empty() {
        let _ = write!(s, "{c0}");
    } else if c0 > 0 {
        let _ = write!(s, " + {c0}");
    } else if c0 < 0 {
        let _ = write!(s, " - {}", -c0);
    }
    s
}

pub fn guard_to_text(guard: &[Vec<i64>], names: &[String]) -> String {
    guard
        .iter()
        .map(|r| format!("{} >= 0", affine_to_text(r, names)))
        .collect::<Vec<_>>()
        .join(" && ")
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Int(i64),
    Float(f64),
    Name(String),
    Sym(&'static str),
}

fn tokenize(src: &str) -> Result<Vec<(Tok, usize)>, ExprError> {
    const SYMS: [&str; 17] = [
        "&&", ">=", "<=", "==", ">", "<", "+", "-", "*", "/", "(", ")", "[", "]", ",", "?", ":",
    ];
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    'outer: while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let col = i + 1;
        if c.is_ascii_digit() || (c == '.' && bytes.get(i + 1).is_some_and(|b| b.is_ascii_digit())) {
            let start = i;
            let mut is_float = false;
            while i < bytes.len() {
                let d = bytes[i] as char;
                if d.is_ascii_digit() {
                    i += 1;
                } else if d == '.' {
                    is_float = true;
                    i += 1;
                } else if (d == 'e' || d == 'E')
                    && bytes.get(i + 1).is_some_and(|b| b.is_ascii_digit() || *b == b'-' || *b == b'+')
                {
                    is_float = true;
                    i += 2;
                } else {
                    break;
                }
            }
            let text = &src[start..i];
            let tok = if is_float {
                Tok::Float(text.parse().map_err(|_| ExprError {
                    col,
                    msg: format!("bad number `{text}`"),
                })?)
            } else {
                Tok::Int(text.parse().map_err(|_| ExprError {
                    col,
                    msg: format!("bad integer `{text}`"),
                })?)
            };
            out.push((tok, col));
            continue;
        }
        if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < bytes.len() && ((bytes[i] as char).is_alphanumeric() || bytes[i] == b'_' || bytes[i] == b'\'') {
                i += 1;
            }
            out.push((Tok::Name(src[start..i].to_string()), col));
            continue;
        }
        for s in SYMS {
            if src[i..].starts_with(s) {
                out.push((Tok::Sym(s), col));
                i += s.len();
                continue 'outer;
            }
        }
        return Err(ExprError {
            col,
            msg: format!("unexpected character `{c}`"),
        });
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    names: &'a [String],
    end_col: usize,
}

impl<'a> Parser<'a> {
    fn col(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end_col, |t| t.1)
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, ExprError> {
        Err(ExprError {
            col: self.col(),
            msg: msg.into(),
        })
    }

    fn peek_sym(&self) -> Option<&'static str> {
        match self.toks.get(self.pos) {
            Some((Tok::Sym(s), _)) => Some(s),
            _ => None,
        }
    }

    fn eat(&mut self, s: &str) -> bool {
        if self.peek_sym() == Some(s) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, s: &str) -> Result<(), ExprError> {
        if self.eat(s) {
            Ok(())
        } else {
            self.err(format!("expected `{s}`"))
        }
    }

    fn width(&self) -> usize {
        self.names.len() + 1
    }

    fn expr(&mut self) -> Result<Expr, ExprError> {
        let lhs = self.additive()?;
        if matches!(self.peek_sym(), Some(">=" | "<=" | "==" | ">" | "<")) {
            let mut guard = Vec::new();
            self.comparison(lhs, &mut guard)?;
            while self.eat("&&") {
                let l = self.additive()?;
                self.comparison(l, &mut guard)?;
            }
            self.expect("?")?;
            let then = self.expr()?;
            self.expect(":")?;
            let otherwise = self.expr()?;
            return Ok(Expr::Cond {
                guard,
                then: Box::new(then),
                otherwise: Box::new(otherwise),
            });
        }
        Ok(lhs)
    }

    fn comparison(&mut self, lhs: Expr, guard: &mut Vec<Vec<i64>>) -> Result<(), ExprError> {
        let col = self.col();
        let op = match self.peek_sym() {
            Some(op @ (">=" | "<=" | "==" | ">" | "<")) => op,
            _ => return self.err("expected comparison"),
        };
        self.pos += 1;
        let rhs = self.additive()?;
        let w = self.width();
        let l = to_affine(&lhs, w).map_err(|m| ExprError { col, msg: m })?;
        let r = to_affine(&rhs, w).map_err(|m| ExprError { col, msg: m })?;
        let diff: Vec<i64> = l.iter().zip(&r).map(|(a, b)| a - b).collect();
        let neg: Vec<i64> = diff.iter().map(|x| -x).collect();
        let minus_one = |mut v: Vec<i64>| {
            v[w - 1] -= 1;
            v
        };
        match op {
            ">=" => guard.push(diff),
            "<=" => guard.push(neg),
            ">" => guard.push(minus_one(diff)),
            "<" => guard.push(minus_one(neg)),
            _ => {
                guard.push(diff);
                guard.push(neg);
            }
        }
        Ok(())
    }

    fn additive(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.multiplicative()?;
        loop {
            let op = if self.eat("+") {
                BinOp::Add
            } else if self.eat("-") {
                BinOp::Sub
            } else {
                return Ok(lhs);
            };
            let rhs = self.multiplicative()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn multiplicative(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.unary()?;
        loop {
            let op = if self.eat("*") {
                BinOp::Mul
            } else if self.eat("/") {
                BinOp::Div
            } else {
                return Ok(lhs);
            };
            let rhs = self.unary()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<Expr, ExprError> {
        if self.eat("-") {
            let e = self.unary()?;
            return Ok(Expr::Neg(Box::new(e)));
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Expr, ExprError> {
        let w = self.width();
        let Some((tok, col)) = self.toks.get(self.pos).cloned() else {
            return self.err("unexpected end of expression");
        };
        match tok {
            Tok::Int(v) => {
                self.pos += 1;
                let mut r = vec![0; w];
                r[w - 1] = v;
                Ok(Expr::Affine(r))
            }
            Tok::Float(v) => {
                self.pos += 1;
                Ok(Expr::Num(v))
            }
            Tok::Sym("(") => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(")")?;
                Ok(e)
            }
            Tok::Name(name) => {
                self.pos += 1;
                if self.eat("[") {
                    let mut subs = Vec::new();
                    loop {
                        let c = self.col();
                        let e = self.expr()?;
                        subs.push(to_affine(&e, w).map_err(|m| ExprError { col: c, msg: m })?);
                        if self.eat("]") {
                            break;
                        }
                        self.expect(",")?;
                    }
                    return Ok(Expr::Read { array: name, subs });
                }
                if matches!(name.as_str(), "min" | "max" | "sqrt") && self.eat("(") {
                    let a = self.expr()?;
                    if name == "sqrt" {
                        self.expect(")")?;
                        return Ok(Expr::Sqrt(Box::new(a)));
                    }
                    self.expect(",")?;
                    let b = self.expr()?;
                    self.expect(")")?;
                    let op = if name == "min" { BinOp::Min } else { BinOp::Max };
                    return Ok(Expr::Bin(op, Box::new(a), Box::new(b)));
                }
                match self.names.iter().position(|n| *n == name) {
                    Some(k) => {
                        let mut r = vec![0; w];
                        r[k] = 1;
                        Ok(Expr::Affine(r))
                    }
                    None => Err(ExprError {
                        col,
                        msg: format!("unknown name `{name}`"),
                    }),
                }
            }
            Tok::Sym(s) => Err(ExprError {
                col,
                msg: format!("unexpected `{s}`"),
            }),
        }
    }
}

/// Converts an expression to an affine row, failing on non-affine forms.
pub fn to_affine(e: &Expr, width: usize) -> Result<Vec<i64>, String> {
    match e {
        Expr::Affine(r) => Ok(r.clone()),
        Expr::Bin(op @ (BinOp::Add | BinOp::Sub), a, b) => {
            let a = to_affine(a, width)?;
            let b = to_affine(b, width)?;
            a.iter()
                .zip(&b)
                .map(|(x, y)| if *op == BinOp::Add { x.checked_add(*y) } else { x.checked_sub(*y) })
                .collect::<Option<Vec<_>>>()
                .ok_or_else(|| "overflow in affine expression".to_string())
        }
        Expr::Bin(BinOp::Mul, a, b) => {
            let a = to_affine(a, width)?;
            let b = to_affine(b, width)?;
            let is_const = |r: &[i64]| r[..width - 1].iter().all(|&c| c == 0);
            let (k, v) = if is_const(&a) {
                (a[width - 1], b)
            } else if is_const(&b) {
                (b[width - 1], a)
            } else {
                return Err("product of two non-constant terms is not affine".into());
            };
            v.iter()
                .map(|x| x.checked_mul(k))
                .collect::<Option<Vec<_>>>()
                .ok_or_else(|| "overflow in affine expression".to_string())
        }
        Expr::Neg(a) => Ok(to_affine(a, width)?.iter().map(|x| -x).collect()),
        _ => Err("expression is not affine".into()),
    }
}

/// Parses a body expression. `names` are index names then parameter names.
pub fn parse_expr(src: &str, names: &[String]) -> Result<Expr, ExprError> {
    let toks = tokenize(src)?;
    let mut p = Parser {
        toks,
        pos: 0,
        names,
        end_col: src.len() + 1,
    };
    let e = p.expr()?;
    if p.pos != p.toks.len() {
        return p.err("trailing input");
    }
    Ok(e)
}

/// Parses an affine expression such as `2*N + 1`.
pub fn parse_affine(src: &str, names: &[String]) -> Result<Vec<i64>, ExprError> {
    let e = parse_expr(src, names)?;
    to_affine(&e, names.len() + 1).map_err(|msg| ExprError { col: 1, msg })
}

/// Parses a guard such as `t >= 1 && i == 0` into inequality rows.
pub fn parse_guard(src: &str, names: &[String]) -> Result<Vec<Vec<i64>>, ExprError> {
    let toks = tokenize(src)?;
    let mut p = Parser {
        toks,
        pos: 0,
        names,
        end_col: src.len() + 1,
    };
    let mut guard = Vec::new();
    loop {
        let l = p.additive()?;
        p.comparison(l, &mut guard)?;
        if !p.eat("&&") {
            break;
        }
    }
    if p.pos != p.toks.len() {
        return p.err("trailing input");
    }
    Ok(guard)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names() -> Vec<String> {
        ["t", "i", "N"].iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn parses_stencil_body() {
        let e = parse_expr("0.25 * (X[t-1, i-1] + X[t-1, i] + X[t-1, i+1]) + 0.25*X[t-1, 0]", &names()).unwrap();
        let reads = e.reads();
        assert_eq!(reads.len(), 4);
        assert_eq!(reads[0].subs, &[vec![1, 0, 0, -1], vec![0, 1, 0, -1]]);
        assert_eq!(reads[3].subs, &[vec![1, 0, 0, -1], vec![0, 0, 0, 0]]);
    }

    #[test]
    fn guards_and_conditionals() {
        let e = parse_expr("i >= 2 && i <= N - 3 ? A[t, i] : 0.0", &names()).unwrap();
        match &e {
            Expr::Cond { guard, .. } => {
                assert_eq!(guard, &vec![vec![0, 1, 0, -2], vec![0, -1, 1, -3]]);
            }
            _ => panic!("expected conditional"),
        }
        assert_eq!(e.reads()[0].guards.len(), 1);
        let g = parse_guard("i == 0", &names()).unwrap();
        assert_eq!(g, vec![vec![0, 1, 0, 0], vec![0, -1, 0, 0]]);
        let g = parse_guard("t < N", &names()).unwrap();
        assert_eq!(g, vec![vec![-1, 0, 1, -1]]);
    }

    #[test]
    fn affine_forms() {
        assert_eq!(parse_affine("2*N + 1", &names()).unwrap(), vec![0, 0, 2, 1]);
        assert_eq!(parse_affine("-(t - i)", &names()).unwrap(), vec![-1, 1, 0, 0]);
        assert!(parse_affine("t * i", &names()).is_err());
        assert!(parse_affine("0.5", &names()).is_err());
        assert_eq!(affine_to_text(&[2, -1, 0, -3], &names()), "2*t - i - 3");
        assert_eq!(affine_to_text(&[0, 0, 0, 0], &names()), "0");
    }

    #[test]
    fn errors_carry_columns() {
        let e = parse_expr("X[t, i] + $", &names()).unwrap_err();
        assert_eq!(e.col, 11);
        let e = parse_expr("Q + 1", &names()).unwrap_err();
        assert!(e.msg.contains("unknown name"));
        assert!(parse_expr("X[t, i", &names()).is_err());
    }

    #[test]
    fn print_parse_roundtrip() {
        let srcs = [
            "0.25 * (X[t-1, i-1] + X[t-1, i]) - -0.5",
            "min(A[t, i], B[i, 2*t - N]) / sqrt(2.0)",
            "i >= 1 ? (t == 0 ? A[i, 0] : 1.0e-3) : N * 2",
            "-X[t, i] + i",
        ];
        for src in srcs {
            let e = parse_expr(src, &names()).unwrap();
            let printed = e.to_text(&names());
            let again = parse_expr(&printed, &names()).unwrap();
            assert_eq!(e, again, "{src} -> {printed}");
        }
    }

    #[test]
    fn replace_read_by_ordinal() {
        let e = parse_expr("X[t, i] + X[t, 0]", &names()).unwrap();
        let rep = parse_expr("Y[t]", &names()).unwrap();
        let r = e.replace_read(1, &rep);
        assert_eq!(r.to_text(&names()), "X[t, i] + Y[t]");
    }
}
