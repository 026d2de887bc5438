//! C99 source emission: a starter, a recursive orthant function with zero
//! and emptiness exits, a base function with guarded point loops, and a
//! harness that prints an output checksum.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::Command;

use thiserror::Error;

use crate::expr::{BinOp, Expr};
use crate::kernel::{embed, ArrayRole, Prdg};
use crate::memalloc::MemoryMap;
use crate::poly::PolyError;
use crate::tiler::{union_bbox, EmptinessTest, TileError, TileSpec};

#[derive(Debug, Error)]
pub enum EmitError {
    #[error("unsupported construct: {0}")]
    Unsupported(String),
    #[error("`{0}` is not usable as a C identifier")]
    Name(String),
    #[error("default tile spec has {got} sizes, band has {expected}")]
    Tile { expected: usize, got: usize },
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Tiler(#[from] TileError),
}

pub type Result<T> = std::result::Result<T, EmitError>;

#[derive(Debug, Clone, Default)]
pub struct EmitOptions {
    /// Compiled-in tile sizes used when none are given on the command line.
    pub tile_defaults: Option<TileSpec>,
    /// Task pragmas at recursive call sites, taskwait between phases.
    pub tasks: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bundle {
    pub stem: String,
    pub header: String,
    pub source: String,
}

impl Bundle {
    pub fn header_name(&self) -> String {
        format!("{}.h", self.stem)
    }

    pub fn source_name(&self) -> String {
        format!("{}.c", self.stem)
    }

    /// Writes both files into `dir`, returning their paths.
    pub fn write_to(&self, dir: &Path) -> std::io::Result<Vec<PathBuf>> {
        let mut out = Vec::new();
        for (name, text) in [(self.header_name(), &self.header), (self.source_name(), &self.source)] {
            let path = dir.join(name);
            let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
            std::io::Write::write_all(&mut tmp, text.as_bytes())?;
            tmp.persist(&path).map_err(|e| e.error)?;
            out.push(path);
        }
        Ok(out)
    }
}

const C_KEYWORDS: [&str; 37] = [
    "auto", "break", "case", "char", "const", "continue", "default", "do", "double", "else", "enum", "extern", "float", "for",
    "goto", "if", "inline", "int", "long", "register", "restrict", "return", "short", "signed", "sizeof", "static", "struct",
    "switch", "typedef", "union", "unsigned", "void", "volatile", "while", "main", "b", "o",
];

fn check_ident(s: &str) -> Result<()> {
    let mut chars = s.chars();
    let ok = chars.next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
        && !C_KEYWORDS.contains(&s)
        && !s.starts_with("pcot_")
        && !s.starts_with("PCOT_");
    if ok {
        Ok(())
    } else {
        Err(EmitError::Name(s.to_string()))
    }
}

fn sanitize(s: &str) -> String {
    s.chars().map(|c| if c.is_ascii_alphanumeric() { c } else { '_' }).collect()
}

/// C99 hexadecimal floating literal with the exact value of `x`.
pub fn hex_float(x: f64) -> Result<String> {
    if !x.is_finite() {
        return Err(EmitError::Unsupported(format!("non-finite literal {x}")));
    }
    let bits = x.to_bits();
    let sign = if bits >> 63 == 1 { "-" } else { "" };
    let exp = ((bits >> 52) & 0x7ff) as i64;
    let mant = bits & ((1u64 << 52) - 1);
    if exp == 0 && mant == 0 {
        return Ok(format!("{sign}0x0p+0"));
    }
    let (lead, e) = if exp == 0 { (0, -1022) } else { (1, exp - 1023) };
    let mut digits = format!("{mant:013x}");
    while digits.ends_with('0') {
        digits.pop();
    }
    let frac = if digits.is_empty() { String::new() } else { format!(".{digits}") };
    Ok(format!("{sign}0x{lead}{frac}p{e:+}"))
}

/// Integer affine expression over `names` (with a trailing constant).
fn c_affine(row: &[i64], names: &[String]) -> String {
    let mut out = String::new();
    for (c, n) in row.iter().zip(names) {
        if *c == 0 {
            continue;
        }
        let mag = c.unsigned_abs();
        let term = if mag == 1 { n.clone() } else { format!("{mag}LL * {n}") };
        if out.is_empty() {
            out = if *c < 0 { format!("-{term}") } else { term };
        } else {
            let _ = write!(out, " {} {term}", if *c < 0 { '-' } else { '+' });
        }
    }
    let k = row[names.len()];
    if out.is_empty() {
        return format!("{k}LL");
    }
    if k != 0 {
        let _ = write!(out, " {} {}LL", if k < 0 { '-' } else { '+' }, k.unsigned_abs());
    }
    out
}

fn c_guard(rows: &[Vec<i64>], names: &[String]) -> String {
    if rows.is_empty() {
        return "1".into();
    }
    rows.iter().map(|r| format!("({}) >= 0", c_affine(r, names))).collect::<Vec<_>>().join(" && ")
}

struct Emitter {
    names: Vec<String>,
}

impl Emitter {
    fn expr(&self, e: &Expr) -> Result<String> {
        Ok(match e {
            Expr::Num(v) => {
                let h = hex_float(*v)?;
                if h.starts_with('-') {
                    format!("({h})")
                } else {
                    h
                }
            }
            Expr::Affine(r) => format!("((double)({}))", c_affine(r, &self.names)),
            Expr::Read { array, subs } => {
                let args: Vec<String> = subs.iter().map(|r| c_affine(r, &self.names)).collect();
                let a = sanitize(array);
                format!("A_{a}[idx_{a}({})]", args.join(", "))
            }
            Expr::Bin(op, l, r) => {
                let (l, r) = (self.expr(l)?, self.expr(r)?);
                match op {
                    BinOp::Add => format!("({l} + {r})"),
                    BinOp::Sub => format!("({l} - {r})"),
                    BinOp::Mul => format!("({l} * {r})"),
                    BinOp::Div => format!("({l} / {r})"),
                    BinOp::Min => format!("pcot_min({l}, {r})"),
                    BinOp::Max => format!("pcot_max({l}, {r})"),
                }
            }
            Expr::Neg(x) => format!("(-{})", self.expr(x)?),
            Expr::Sqrt(x) => format!("sqrt({})", self.expr(x)?),
            Expr::Cond { guard, then, otherwise } => {
                format!("(({}) ? {} : {})", c_guard(guard, &self.names), self.expr(then)?, self.expr(otherwise)?)
            }
        })
    }
}

/// Emits the bundle for `p` (embedded first) with the given maps; arrays
/// without a map use their logical layout. Parameters are fixed at
/// `params`; tile sizes are runtime arguments.
pub fn emit(p: &Prdg, params: &[i64], maps: &[MemoryMap], opts: &EmitOptions) -> Result<Bundle> {
    let p = &embed(p);
    for n in p.params.iter().chain(&p.indices) {
        check_ident(n)?;
    }
    for a in &p.arrays {
        let s = sanitize(&a.name);
        if s.is_empty() || s.starts_with(|c: char| c.is_ascii_digit()) {
            return Err(EmitError::Name(a.name.clone()));
        }
    }
    let d = p.depth();
    let band = p.tilable_band[0]..p.tilable_band[p.tilable_band.len() - 1] + 1;
    let nb = band.len();
    let defaults: Vec<i64> = match &opts.tile_defaults {
        Some(t) if t.dim() != nb => return Err(EmitError::Tile { expected: nb, got: t.dim() }),
        Some(t) => t.leaf.0.clone(),
        None => vec![16; nb],
    };
    let layout = crate::exec::Layout::new(p, params, maps).map_err(|e| EmitError::Unsupported(e.to_string()))?;
    let bbox = union_bbox(p, params)?;
    let empt = EmptinessTest::compile(p)?;
    let stem = sanitize(&p.name);
    let guard_macro = format!("PCOT_{}_H", stem.to_uppercase());
    let mut names: Vec<String> = p.indices.clone();
    names.extend(p.params.iter().cloned());
    let em = Emitter { names: names.clone() };

    // header
    let mut h = String::new();
    let _ = writeln!(h, "#ifndef {guard_macro}\n#define {guard_macro}\n");
    let _ = writeln!(h, "/* kernel {}, generated by pcot */\n", p.name);
    for (n, v) in p.params.iter().zip(params) {
        let _ = writeln!(h, "#define {n} {v}LL");
    }
    let _ = writeln!(h, "\n#define PCOT_DEPTH {d}\n#define PCOT_BAND_START {}\n#define PCOT_BAND {nb}", band.start);
    for k in 0..d {
        let _ = writeln!(h, "#define PCOT_LO{k} {}LL\n#define PCOT_HI{k} {}LL", bbox.origin[k], bbox.origin[k] + bbox.size[k]);
    }
    let _ = writeln!(h, "#define PCOT_ARENA_BYTES {}ULL\n", layout.total_bytes());
    let _ = writeln!(h, "extern long long pcot_calls;");
    let _ = writeln!(h, "void pcot_run(const long long *b);\n\n#endif");

    // source
    let mut c = String::new();
    let _ = writeln!(c, "#include <math.h>\n#include <stdint.h>\n#include <stdio.h>\n#include <stdlib.h>\n#include <string.h>\n");
    let _ = writeln!(c, "#include \"{stem}.h\"\n");
    let _ = writeln!(c, "long long pcot_calls;\n");
    for a in &p.arrays {
        let _ = writeln!(c, "static double *A_{};", sanitize(&a.name));
    }
    c.push_str(
        "\nstatic long long pcot_mod(long long a, long long m)\n{\n    long long r = a % m;\n    return r < 0 ? r + m : r;\n}\n\n\
         static double pcot_min(double a, double b) { return b < a ? b : a; }\n\
         static double pcot_max(double a, double b) { return b > a ? b : a; }\n\
         static long long pcot_lmin(long long a, long long b) { return b < a ? b : a; }\n\
         static long long pcot_lmax(long long a, long long b) { return b > a ? b : a; }\n\n",
    );
    // physical index functions
    for (ai, a) in p.arrays.iter().enumerate() {
        let m = &layout.maps[ai];
        let r = a.rank();
        let snames: Vec<String> = (0..r).map(|k| format!("s{k}")).collect();
        let params_list = snames.iter().map(|s| format!("long long {s}")).collect::<Vec<_>>().join(", ");
        let mut idx = String::new();
        for k in 0..m.map.output_dim() {
            let mut row = m.map.linear[k].clone();
            row.push(m.map.constant[k]);
            let mut coord = c_affine(&row, &snames);
            if m.moduli[k] > 0 {
                coord = format!("pcot_mod({coord}, {}LL)", m.moduli[k]);
            }
            idx = if k == 0 { format!("({coord})") } else { format!("({idx}) * {}LL + ({coord})", m.extents[k]) };
        }
        if idx.is_empty() {
            idx = "0".into();
        }
        let _ = writeln!(c, "static long long idx_{}({})\n{{\n    return {idx};\n}}\n", sanitize(&a.name), if params_list.is_empty() { "void".into() } else { params_list });
    }

    // emptiness test over (o, s)
    let mut onames: Vec<String> = (0..d).map(|k| format!("o[{k}]")).collect();
    onames.extend((0..d).map(|k| format!("s[{k}]")));
    onames.extend(p.params.iter().cloned());
    c.push_str("static int check_empty(const long long *o, const long long *s)\n{\n");
    for rows in &empt.rows {
        let _ = writeln!(c, "    if ({})\n        return 0;", c_guard(rows, &onames));
    }
    c.push_str("    return 1;\n}\n\n");

    // base function
    c.push_str("static void base(const long long *o, const long long *s)\n{\n");
    for (k, n) in p.indices.iter().enumerate() {
        let ind = "    ".repeat(k + 1);
        let _ = writeln!(
            c,
            "{ind}for (long long {n} = pcot_lmax(o[{k}], PCOT_LO{k}); {n} < pcot_lmin(o[{k}] + s[{k}], PCOT_HI{k}); {n}++) {{"
        );
    }
    let ind = "    ".repeat(d + 1);
    for st in &p.statements {
        let mut g = c_guard(&st.domain.rows, &names);
        if !st.pieces.is_empty() {
            let ps: Vec<String> = st.pieces.iter().map(|pc| format!("({})", c_guard(&pc.rows, &names))).collect();
            g = format!("{g} && ({})", ps.join(" || "));
        }
        let w = sanitize(&st.write.array);
        let wargs: Vec<String> = st.write.subs.iter().map(|r| c_affine(r, &names)).collect();
        let _ = writeln!(c, "{ind}/* {} */\n{ind}if ({g})\n{ind}    A_{w}[idx_{w}({})] = {};", st.id, wargs.join(", "), em.expr(&st.body)?);
    }
    for k in (0..d).rev() {
        let _ = writeln!(c, "{}}}", "    ".repeat(k + 1));
    }
    c.push_str("}\n\n");

    // recursive function over the band; `outer` fixes the leading dims
    c.push_str("static void rec(const long long *outer, const long long *bo, const long long *bs, const long long *b)\n{\n");
    c.push_str("    long long o[PCOT_DEPTH], s[PCOT_DEPTH];\n    long long h0[PCOT_BAND][2], h1[PCOT_BAND][2];\n    int k;\n\n");
    c.push_str("#ifdef PCOT_COUNT\n    pcot_calls++;\n#endif\n");
    c.push_str("    for (k = 0; k < PCOT_BAND; k++)\n        if (bs[k] == 0)\n            return;\n");
    c.push_str("    for (k = 0; k < PCOT_BAND_START; k++) {\n        o[k] = outer[k];\n        s[k] = 1;\n    }\n");
    c.push_str("    for (k = 0; k < PCOT_BAND; k++) {\n        o[PCOT_BAND_START + k] = bo[k];\n        s[PCOT_BAND_START + k] = bs[k];\n    }\n");
    for k in band.end..d {
        let _ = writeln!(c, "    o[{k}] = PCOT_LO{k};\n    s[{k}] = PCOT_HI{k} - PCOT_LO{k};");
    }
    c.push_str("    if (check_empty(o, s))\n        return;\n");
    let leaf_test: Vec<String> = (0..nb).map(|k| format!("bs[{k}] <= b[{k}]")).collect();
    let _ = writeln!(c, "    if ({}) {{\n        base(o, s);\n        return;\n    }}", leaf_test.join(" && "));
    c.push_str(
        "    for (k = 0; k < PCOT_BAND; k++) {\n        if (bs[k] > b[k]) {\n            long long first = bs[k] - bs[k] / 2;\n\
         \x20           h0[k][0] = bo[k];\n            h0[k][1] = first;\n            h1[k][0] = bo[k] + first;\n            h1[k][1] = bs[k] - first;\n\
         \x20       } else {\n            h0[k][0] = bo[k];\n            h0[k][1] = bs[k];\n            h1[k][0] = bo[k] + bs[k];\n            h1[k][1] = 0;\n        }\n    }\n",
    );
    let mut children: Vec<usize> = (0..1usize << nb).collect();
    if opts.tasks {
        children.sort_by_key(|b| (b.count_ones(), *b));
    }
    let mut prev_phase = None;
    for bits in children {
        let phase = bits.count_ones();
        if opts.tasks && prev_phase.is_some_and(|q| q != phase) {
            c.push_str("#pragma omp taskwait\n");
        }
        prev_phase = Some(phase);
        let pick = |k: usize| if (bits >> (nb - 1 - k)) & 1 == 1 { "h1" } else { "h0" };
        let co: Vec<String> = (0..nb).map(|k| format!("{}[{k}][0]", pick(k))).collect();
        let cs: Vec<String> = (0..nb).map(|k| format!("{}[{k}][1]", pick(k))).collect();
        let _ = writeln!(c, "    {{\n        const long long co[PCOT_BAND] = {{{}}};\n        const long long cs[PCOT_BAND] = {{{}}};", co.join(", "), cs.join(", "));
        if opts.tasks {
            c.push_str("#pragma omp task firstprivate(co, cs)\n");
        }
        c.push_str("        rec(outer, co, cs, b);\n    }\n");
    }
    if opts.tasks {
        c.push_str("#pragma omp taskwait\n");
    }
    c.push_str("}\n\n");

    // starter
    c.push_str("void pcot_run(const long long *b)\n{\n    long long outer[PCOT_DEPTH + 1], bo[PCOT_BAND], bs[PCOT_BAND];\n    int k;\n\n");
    c.push_str("    for (k = 0; k < PCOT_BAND; k++) {\n        long long n = 0, sz = b[k];\n");
    c.push_str("        switch (PCOT_BAND_START + k) {\n");
    for k in band.clone() {
        let _ = writeln!(c, "        case {k}: bo[k] = PCOT_LO{k}; n = PCOT_HI{k} - PCOT_LO{k}; break;");
    }
    c.push_str("        }\n        while (sz < n)\n            sz *= 2;\n        bs[k] = sz;\n    }\n");
    if opts.tasks {
        c.push_str("#pragma omp parallel\n#pragma omp single\n");
    }
    c.push_str("    {\n");
    for k in 0..band.start {
        let _ = writeln!(c, "{}for (outer[{k}] = PCOT_LO{k}; outer[{k}] < PCOT_HI{k}; outer[{k}]++)", "    ".repeat(k + 2));
    }
    let _ = writeln!(c, "{}rec(outer, bo, bs, b);\n    }}\n}}\n", "    ".repeat(band.start + 2));

    // harness
    c.push_str(
        "static uint64_t pcot_splitmix64(uint64_t x)\n{\n    x += 0x9e3779b97f4a7c15ULL;\n    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;\n\
         \x20   x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;\n    return x ^ (x >> 31);\n}\n\n\
         static uint64_t pcot_fnv(uint64_t h, double v)\n{\n    uint64_t bits;\n    int k;\n\n    memcpy(&bits, &v, sizeof bits);\n\
         \x20   for (k = 0; k < 8; k++) {\n        h ^= (bits >> (8 * k)) & 0xff;\n        h *= 0x100000001b3ULL;\n    }\n    return h;\n}\n\n",
    );
    c.push_str("int main(int argc, char **argv)\n{\n");
    let _ = writeln!(c, "    long long b[PCOT_BAND] = {{{}}};", defaults.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(", "));
    c.push_str("    int dump = 0, nb = 0, a;\n    unsigned char *raw, *arena;\n    uint64_t h = 0xcbf29ce484222325ULL;\n\n");
    c.push_str(
        "    for (a = 1; a < argc; a++) {\n        if (strcmp(argv[a], \"--dump\") == 0) {\n            dump = 1;\n        } else if (nb < PCOT_BAND && atoll(argv[a]) > 0) {\n\
         \x20           b[nb++] = atoll(argv[a]);\n        } else {\n            fprintf(stderr, \"usage: %s [--dump] [b0 ... b%d]\\n\", argv[0], PCOT_BAND - 1);\n            return 2;\n        }\n    }\n",
    );
    c.push_str("    raw = malloc(PCOT_ARENA_BYTES + 64);\n    if (!raw)\n        return 3;\n    arena = raw + (64 - (uintptr_t)raw % 64) % 64;\n    memset(arena, 0, PCOT_ARENA_BYTES);\n");
    for (ai, a) in p.arrays.iter().enumerate() {
        let _ = writeln!(c, "    A_{} = (double *)(arena + {});", sanitize(&a.name), layout.base[ai]);
    }
    // inputs and checksum walk logical cells in row-major order
    let walk = |c: &mut String, ai: usize, body: &str| {
        let ext = &layout.logical[ai];
        let r = ext.len();
        let _ = writeln!(c, "    {{\n        uint64_t li = 0;");
        for (k, e) in ext.iter().enumerate() {
            let _ = writeln!(c, "{}for (long long s{k} = 0; s{k} < {e}LL; s{k}++)", "    ".repeat(k + 2));
        }
        let args: Vec<String> = (0..r).map(|k| format!("s{k}")).collect();
        let target = format!("A_{}[idx_{}({})]", sanitize(&p.arrays[ai].name), sanitize(&p.arrays[ai].name), args.join(", "));
        let _ = writeln!(c, "{}{{\n{}", "    ".repeat(r + 2), body.replace("@", &target).replace("AI", &ai.to_string()).lines().map(|l| format!("{}{l}\n", "    ".repeat(r + 3))).collect::<String>());
        let _ = writeln!(c, "{}}}\n    }}", "    ".repeat(r + 2));
    };
    for (ai, a) in p.arrays.iter().enumerate() {
        if a.role == ArrayRole::Input {
            walk(&mut c, ai, "@ = (double)(pcot_splitmix64(((uint64_t)AI << 40) ^ li) >> 11) * (1.0 / 9007199254740992.0);\nli++;");
        }
    }
    c.push_str("    pcot_run(b);\n");
    for (ai, a) in p.arrays.iter().enumerate() {
        if a.role == ArrayRole::Output {
            walk(&mut c, ai, "h = pcot_fnv(h, @);\nli++;");
        }
    }
    c.push_str("    printf(\"CHECKSUM %016llx\\n\", (unsigned long long)h);\n#ifdef PCOT_COUNT\n    printf(\"CALLS %lld\\n\", pcot_calls);\n#endif\n");
    c.push_str("    if (dump) {\n");
    for (ai, a) in p.arrays.iter().enumerate() {
        if a.role == ArrayRole::Output {
            let _ = writeln!(c, "        printf(\"{}\");", a.name);
            c.push_str("    ");
            walk(
                &mut c,
                ai,
                "uint64_t bits;\ndouble v = @;\nmemcpy(&bits, &v, sizeof bits);\nprintf(\" %016llx\", (unsigned long long)bits);\nli++;",
            );
            c.push_str("        printf(\"\\n\");\n");
        }
    }
    c.push_str("    }\n    free(raw);\n    return 0;\n}\n");
    Ok(Bundle {
        stem,
        header: h,
        source: c,
    })
}

/// `$CC` if set, else the first of `cc`, `gcc`, `clang` that runs.
pub fn find_cc() -> Option<String> {
    let cands = std::env::var("CC").ok().into_iter().chain(["cc", "gcc", "clang"].map(String::from));
    cands.into_iter().find(|c| Command::new(c).arg("--version").output().is_ok_and(|o| o.status.success()))
}

pub const C_FLAGS: [&str; 3] = ["-std=c99", "-O2", "-ffp-contract=off"];

/// Writes and compiles the bundle in `dir`; returns the executable.
pub fn build(bundle: &Bundle, dir: &Path, cc: &str, extra: &[&str]) -> std::io::Result<PathBuf> {
    bundle.write_to(dir)?;
    let exe = dir.join(&bundle.stem);
    let out = Command::new(cc)
        .args(C_FLAGS)
        .args(extra)
        .arg("-o")
        .arg(&exe)
        .arg(dir.join(bundle.source_name()))
        .arg("-lm")
        .output()?;
    if !out.status.success() {
        return Err(std::io::Error::other(String::from_utf8_lossy(&out.stderr).into_owned()));
    }
    Ok(exe)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunOutput {
    pub checksum: u64,
    pub calls: Option<u64>,
    pub dump: Vec<(String, Vec<u64>)>,
}

/// Runs a built harness with the given tile sizes.
pub fn run_binary(exe: &Path, tiles: &[i64], dump: bool) -> std::io::Result<RunOutput> {
    let mut cmd = Command::new(exe);
    if dump {
        cmd.arg("--dump");
    }
    cmd.args(tiles.iter().map(|t| t.to_string()));
    let out = cmd.output()?;
    if !out.status.success() {
        return Err(std::io::Error::other(format!("harness exited with {}", out.status)));
    }
    let text = String::from_utf8_lossy(&out.stdout);
    let mut res = RunOutput {
        checksum: 0,
        calls: None,
        dump: Vec::new(),
    };
    let bad = |l: &str| std::io::Error::other(format!("unexpected harness line `{l}`"));
    for line in text.lines() {
        let mut parts = line.split_whitespace();
        match parts.next() {
            Some("CHECKSUM") => res.checksum = u64::from_str_radix(parts.next().unwrap_or(""), 16).map_err(|_| bad(line))?,
            Some("CALLS") => res.calls = Some(parts.next().unwrap_or("").parse().map_err(|_| bad(line))?),
            Some(name) => {
                let vals = parts.map(|v| u64::from_str_radix(v, 16).map_err(|_| bad(line))).collect::<std::io::Result<_>>()?;
                res.dump.push((name.to_string(), vals));
            }
            None => {}
        }
    }
    Ok(res)
}
