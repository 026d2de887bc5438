//! Command-line front end. `main` in the binary only forwards here.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use crate::cachesim::{self, CacheConfig, Storage};
use crate::corpus::{self, Located};
use crate::emitc::{self, EmitOptions};
use crate::exec::{self, BinaryTrace, ExecOptions, TraceEvent, TraceSink};
use crate::kernel::{parse_kernel, Prdg};
use crate::memalloc::{affine_split, allocate, AllocKind, MemoryMap};
use crate::tiler::{linearize_wavefront, Scheme, TileSpec, TilingContext};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_KERNEL: i32 = 4;

const EXIT_HELP: &str = "Exit codes:
  0  success
  1  oracle violation or coverage failure
  2  usage error
  3  I/O error (missing kernel, unwritable output)
  4  kernel parse, validation or pipeline error

Kernels are found by path, then in $PCOT_KERNEL_PATH, then among the builtins.
Defaults for unset flags are read from ./pcot.toml or --config.";

#[derive(Debug, Parser)]
#[command(name = "pcot", version, about = "Polyhedral cache-oblivious tiling toolkit", after_help = EXIT_HELP)]
pub struct Cli {
    /// Configuration file (default: ./pcot.toml when present).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub cmd: Cmd,
}

#[derive(Debug, Subcommand)]
pub enum Cmd {
    /// Execute a kernel under one order and simulate its cache behavior.
    Run(RunArgs),
    /// Simulate every (scheme, tile size) cell of a grid.
    Sweep(SweepArgs),
    /// Classify edges, split, and report memory maps and footprints.
    Alloc(AllocArgs),
    /// Write the C bundle for a kernel.
    Emit(EmitArgs),
}

#[derive(Debug, Args)]
pub struct KernelArgs {
    /// Kernel file or builtin name.
    pub kernel: String,
    /// Parameter values, e.g. `N=64,T=16`.
    #[arg(long, value_delimiter = ',')]
    pub params: Vec<String>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub k: KernelArgs,
    #[arg(long)]
    pub scheme: Option<String>,
    /// Leaf sizes over the tilable band, e.g. `8,32,32`.
    #[arg(long)]
    pub tile: Option<String>,
    /// Cache preset (desk, desk-llc, full, 2way) or spec like `32K:8,1M:16@64`.
    #[arg(long)]
    pub cache: Option<String>,
    /// Write the binary access trace here.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// Write a one-row CSV report here.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Run a wavefront linearization of the COT order with this seed.
    #[arg(long)]
    pub wavefront_seed: Option<u64>,
    /// allocated (default) or single-assignment.
    #[arg(long)]
    pub storage: Option<String>,
    /// Skip the dependence oracle and the coverage check.
    #[arg(long)]
    pub no_check: bool,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub k: KernelArgs,
    /// Per-dimension lists or ranges joined by `x`, e.g. `8,16,32x8:32:8`.
    #[arg(long)]
    pub tiles: Option<String>,
    /// Comma-separated schemes (default `slt,cot`).
    #[arg(long)]
    pub schemes: Option<String>,
    #[arg(long)]
    pub cache: Option<String>,
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Cells run concurrently (default: available cores).
    #[arg(long)]
    pub jobs: Option<usize>,
    #[arg(long)]
    pub storage: Option<String>,
}

#[derive(Debug, Args)]
pub struct AllocArgs {
    #[command(flatten)]
    pub k: KernelArgs,
    /// Also write one CSV row per array.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EmitArgs {
    #[command(flatten)]
    pub k: KernelArgs,
    /// Tile sizes compiled in as defaults.
    #[arg(long)]
    pub tile_defaults: Option<String>,
    /// Add task pragmas.
    #[arg(long)]
    pub tasks: bool,
    #[arg(short = 'o', long = "out", default_value = ".")]
    pub out: PathBuf,
    #[arg(long)]
    pub storage: Option<String>,
}

/// Keys accepted in `pcot.toml`.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub cache: Option<String>,
    pub scheme: Option<String>,
    pub tile: Option<String>,
    pub tiles: Option<String>,
    pub schemes: Option<String>,
    pub jobs: Option<usize>,
    pub storage: Option<String>,
    #[serde(default)]
    pub params: BTreeMap<String, i64>,
}

pub const DEFAULT_CACHE: &str = "desk";
pub const DEFAULT_CONFIG: &str = "pcot.toml";

struct Fail(i32, String);

type Res<T> = std::result::Result<T, Fail>;

fn usage(msg: impl std::fmt::Display) -> Fail {
    Fail(EXIT_USAGE, msg.to_string())
}

fn io(msg: impl std::fmt::Display) -> Fail {
    Fail(EXIT_IO, msg.to_string())
}

fn kernel_err(msg: impl std::fmt::Display) -> Fail {
    Fail(EXIT_KERNEL, msg.to_string())
}

fn load_config(path: Option<&Path>) -> Res<Config> {
    let (path, required) = match path {
        Some(p) => (p.to_path_buf(), true),
        None => (PathBuf::from(DEFAULT_CONFIG), false),
    };
    match std::fs::read_to_string(&path) {
        Ok(text) => toml::from_str(&text).map_err(|e| usage(format!("{}: {e}", path.display()))),
        Err(e) if !required && e.kind() == std::io::ErrorKind::NotFound => Ok(Config::default()),
        Err(e) => Err(io(format!("{}: {e}", path.display()))),
    }
}

fn load_kernel(spec: &str) -> Res<Prdg> {
    let text = match corpus::locate(spec).map_err(io)? {
        Located::File(path, text) => {
            return parse_kernel(&text).map_err(|e| kernel_err(format!("{}: {e}", path.display())));
        }
        Located::Builtin(text) => text,
    };
    parse_kernel(text).map_err(kernel_err)
}

fn resolve_params(p: &Prdg, flags: &[String], cfg: &Config) -> Res<Vec<i64>> {
    let mut over: BTreeMap<String, i64> = cfg.params.iter().filter(|(k, _)| p.params.contains(k)).map(|(k, v)| (k.clone(), *v)).collect();
    for f in flags {
        let (k, v) = f.split_once('=').ok_or_else(|| usage(format!("bad --params entry `{f}`, expected NAME=VALUE")))?;
        let v: i64 = v.trim().parse().map_err(|_| usage(format!("bad value in `{f}`")))?;
        if !p.params.iter().any(|q| q == k.trim()) {
            return Err(usage(format!("kernel {} has no parameter `{}`", p.name, k.trim())));
        }
        over.insert(k.trim().to_string(), v);
    }
    p.param_values(&over).map_err(usage)
}

fn parse_tile(s: &str) -> Res<TileSpec> {
    let v: Vec<i64> = s
        .split([',', 'x'])
        .map(|x| x.trim().parse::<i64>().map_err(|_| usage(format!("bad tile spec `{s}`"))))
        .collect::<Res<_>>()?;
    TileSpec::new(v).map_err(usage)
}

fn parse_storage(s: Option<&str>) -> Res<Storage> {
    match s.unwrap_or("allocated") {
        "allocated" => Ok(Storage::Allocated),
        "single-assignment" | "single" => Ok(Storage::SingleAssignment),
        other => Err(usage(format!("unknown storage `{other}`"))),
    }
}

fn prepared(p: &Prdg, params: &[i64], storage: Storage) -> Res<(Prdg, Vec<MemoryMap>)> {
    match storage {
        Storage::Allocated => {
            let split = affine_split(p, params).map_err(kernel_err)?;
            let maps = allocate(&split, params).map_err(kernel_err)?.maps();
            Ok((split.prdg, maps))
        }
        Storage::SingleAssignment => Ok((p.clone(), Vec::new())),
    }
}

fn params_text(p: &Prdg, params: &[i64]) -> String {
    p.params.iter().zip(params).map(|(n, v)| format!("{n}={v}")).collect::<Vec<_>>().join(",")
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Res<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(&dir).map_err(|e| io(format!("{}: {e}", dir.display())))?;
    tmp.write_all(bytes).map_err(|e| io(format!("{}: {e}", path.display())))?;
    tmp.persist(path).map_err(|e| io(format!("{}: {}", path.display(), e.error)))?;
    Ok(())
}

// Fans events out to the cache and an optional recorder.
struct Tee<'a> {
    cache: &'a mut cachesim::Cache,
    file: Option<&'a mut BinaryTrace<Vec<u8>>>,
}

impl TraceSink for Tee<'_> {
    fn event(&mut self, ev: TraceEvent) {
        self.cache.event(ev);
        if let Some(f) = self.file.as_mut() {
            f.event(ev);
        }
    }
}

fn cmd_run(a: &RunArgs, cfg: &Config, out: &mut dyn Write) -> Res<i32> {
    let p = load_kernel(&a.k.kernel)?;
    let params = resolve_params(&p, &a.k.params, cfg)?;
    let scheme: Scheme = a.scheme.as_deref().or(cfg.scheme.as_deref()).unwrap_or("cot").parse().map_err(usage)?;
    let tile = a.tile.as_deref().or(cfg.tile.as_deref()).map(parse_tile).transpose()?;
    if scheme != Scheme::Untiled && tile.is_none() {
        return Err(usage(format!("--tile is required for scheme {scheme}")));
    }
    let cache = CacheConfig::resolve(a.cache.as_deref().or(cfg.cache.as_deref()).unwrap_or(DEFAULT_CACHE)).map_err(usage)?;
    let storage = parse_storage(a.storage.as_deref().or(cfg.storage.as_deref()))?;
    let (prdg, maps) = prepared(&p, &params, storage)?;
    let ctx = TilingContext::new(&prdg, &params).map_err(kernel_err)?;
    let mut order = ctx.order(scheme, tile.as_ref()).map_err(usage)?;
    if let Some(seed) = a.wavefront_seed {
        if scheme != Scheme::Cot {
            return Err(usage("--wavefront-seed needs --scheme cot"));
        }
        order = linearize_wavefront(&order, seed);
    }
    let mut sim = cachesim::Cache::new(&cache);
    let mut file = a.trace.as_ref().map(|_| BinaryTrace::new(Vec::new()));
    let opts = ExecOptions {
        oracle: !a.no_check,
        record_points: false,
    };
    let res = {
        let mut tee = Tee {
            cache: &mut sim,
            file: file.as_mut(),
        };
        exec::run(&ctx.prdg, &params, &order, &maps, &opts, Some(&mut tee)).map_err(kernel_err)?
    };
    let stats = sim.into_stats();
    let mut status = EXIT_OK;
    let mut r = String::new();
    r += &format!("kernel {}\nparams {}\nscheme {}\n", p.name, params_text(&p, &params), scheme);
    if let Some(t) = &tile {
        r += &format!("tile {t}\n");
    }
    r += &format!("storage {}\nleaves {}\n", if storage == Storage::Allocated { "allocated" } else { "single-assignment" }, order.leaves.len());
    if scheme == Scheme::Cot {
        r += &format!("nodes {}\n", order.nodes);
    }
    r += &format!("points {}\n", res.points_executed);
    if !a.no_check {
        let mut missing = Vec::new();
        for (si, s) in ctx.prdg.statements.iter().enumerate() {
            let want = s.enumerate(&params).map_err(kernel_err)?.len() as u64;
            if want != res.per_statement[si] {
                missing.push(format!("{} executed {} of {want}", s.id, res.per_statement[si]));
            }
        }
        r += &format!("coverage {}\n", if missing.is_empty() { "ok".to_string() } else { missing.join("; ") });
        r += &format!("oracle_violations {}\n", res.violation_count);
        for v in res.oracle_violations.iter().take(5) {
            r += &format!("  {} at {:?} reads {}{:?}: {:?}\n", v.at.stmt, v.at.point, v.array, v.cell, v.kind);
        }
        if !missing.is_empty() || res.violation_count > 0 {
            status = EXIT_CHECK;
        }
    }
    r += &format!("CHECKSUM {:016x}\ncache {cache}\naccesses {}\n", res.checksum(), stats.accesses);
    for (k, m) in stats.misses.iter().enumerate() {
        r += &format!("l{}_misses {m}\n", k + 1);
    }
    r += &format!("oca {}\n", stats.oca);
    out.write_all(r.as_bytes()).map_err(io)?;
    if let (Some(path), Some(f)) = (&a.trace, file) {
        write_atomic(path, &f.out)?;
    }
    if let Some(path) = &a.csv {
        let table = cachesim::SweepTable {
            levels: cache.levels.len(),
            rows: vec![cachesim::SweepRow {
                scheme,
                tile: tile.clone().unwrap_or_else(|| TileSpec { leaf: ctx.band_box().size }),
                accesses: stats.accesses,
                misses: stats.misses.clone(),
                oca: stats.oca,
                error: None,
            }],
            summary: Vec::new(),
        };
        let csv = table.to_csv();
        let rows_only = csv.split("\n\n").next().unwrap_or("").to_string() + "\n";
        write_atomic(path, rows_only.as_bytes())?;
    }
    Ok(status)
}

fn cmd_sweep(a: &SweepArgs, cfg: &Config, out: &mut dyn Write) -> Res<i32> {
    let p = load_kernel(&a.k.kernel)?;
    let params = resolve_params(&p, &a.k.params, cfg)?;
    let grid = a.tiles.as_deref().or(cfg.tiles.as_deref()).ok_or_else(|| usage("--tiles is required"))?;
    let band = p.tilable_band.len();
    let tiles = cachesim::parse_grid(grid, band).map_err(usage)?;
    let schemes: Vec<Scheme> = a
        .schemes
        .as_deref()
        .or(cfg.schemes.as_deref())
        .unwrap_or("slt,cot")
        .split(',')
        .map(|s| s.trim().parse::<Scheme>().map_err(usage))
        .collect::<Res<_>>()?;
    let cache = CacheConfig::resolve(a.cache.as_deref().or(cfg.cache.as_deref()).unwrap_or(DEFAULT_CACHE)).map_err(usage)?;
    let storage = parse_storage(a.storage.as_deref().or(cfg.storage.as_deref()))?;
    let jobs = a.jobs.or(cfg.jobs).unwrap_or(0);
    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs).build().map_err(usage)?;
    let table = pool.install(|| cachesim::sweep(&p, &params, &tiles, &schemes, &cache, storage)).map_err(kernel_err)?;
    let csv = table.to_csv();
    match &a.csv {
        Some(path) => {
            write_atomic(path, csv.as_bytes())?;
            let summary = csv.split("\n\n").nth(1).unwrap_or("");
            write!(out, "wrote {} ({} rows)\n{summary}", path.display(), table.rows.len()).map_err(io)?;
        }
        None => out.write_all(csv.as_bytes()).map_err(io)?,
    }
    Ok(if table.rows.iter().any(|r| r.error.is_some()) { EXIT_KERNEL } else { EXIT_OK })
}

fn cmd_alloc(a: &AllocArgs, cfg: &Config, out: &mut dyn Write) -> Res<i32> {
    let p = load_kernel(&a.k.kernel)?;
    let params = resolve_params(&p, &a.k.params, cfg)?;
    let split = affine_split(&p, &params).map_err(kernel_err)?;
    let alloc = allocate(&split, &params).map_err(kernel_err)?;
    let mut r = format!("kernel {}\nparams {}\nedges\n", p.name, params_text(&p, &params));
    let embedded = crate::kernel::embed(&p);
    for (e, c) in embedded.edges.iter().zip(&split.classes) {
        let read = e.read.map(|k| format!(" read {k}")).unwrap_or_default();
        r += &format!("  {} -> {}{read}: {c}\n", e.src, e.dst);
    }
    if split.copies.is_empty() {
        r += "split: no split performed\n";
    } else {
        r += &format!("split: {} copy nodes\n", split.copies.len());
        for c in &split.copies {
            r += &format!("  {} copies {} into {} ({} edges diverted)\n", c.id, c.source, c.array, c.diverted);
        }
    }
    r += "maps\n";
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| io(e);
    w.write_record(["array", "kind", "map", "extents", "words", "single_assignment_words"]).map_err(csv_err)?;
    for arr in &alloc.arrays {
        let how = match &arr.kind {
            AllocKind::Io => "input/output".to_string(),
            AllocKind::Uov(u) => format!("uov {}", u.vector),
            AllocKind::SingleAssignment(why) => format!("single-assignment ({why})"),
            AllocKind::Copy { dropped } if dropped.is_empty() => "copy".to_string(),
            AllocKind::Copy { dropped } => format!("copy, dropped dims {dropped:?}"),
        };
        let ext: Vec<String> = arr.map.extents.iter().map(i64::to_string).collect();
        r += &format!("  {}: {} extents {} words {} [{how}]\n", arr.map.array, arr.map.describe(), ext.join("x"), arr.map.words());
        w.write_record([
            arr.map.array.clone(),
            how,
            arr.map.describe(),
            ext.join("x"),
            arr.map.words().to_string(),
            arr.single_assignment_words.to_string(),
        ])
        .map_err(csv_err)?;
    }
    let fp = alloc.footprint();
    let sa = alloc.single_assignment_footprint();
    r += &format!("footprint {fp} words\nsingle_assignment_footprint {sa} words\n");
    if fp > 0 {
        r += &format!("reduction {:.2}x\n", sa as f64 / fp as f64);
    }
    out.write_all(r.as_bytes()).map_err(io)?;
    if let Some(path) = &a.csv {
        let bytes = w.into_inner().map_err(|e| io(e.error()))?;
        write_atomic(path, &bytes)?;
    }
    Ok(EXIT_OK)
}

fn cmd_emit(a: &EmitArgs, cfg: &Config, out: &mut dyn Write) -> Res<i32> {
    let p = load_kernel(&a.k.kernel)?;
    let params = resolve_params(&p, &a.k.params, cfg)?;
    let defaults = a.tile_defaults.as_deref().or(cfg.tile.as_deref()).map(parse_tile).transpose()?;
    let storage = parse_storage(a.storage.as_deref().or(cfg.storage.as_deref()))?;
    let (prdg, maps) = prepared(&p, &params, storage)?;
    let opts = EmitOptions {
        tile_defaults: defaults,
        tasks: a.tasks,
    };
    let bundle = emitc::emit(&prdg, &params, &maps, &opts).map_err(|e| match e {
        emitc::EmitError::Tile { .. } => usage(e),
        _ => kernel_err(e),
    })?;
    if !a.out.is_dir() {
        return Err(io(format!("{} is not a directory", a.out.display())));
    }
    let files = bundle.write_to(&a.out).map_err(|e| io(format!("{}: {e}", a.out.display())))?;
    for f in files {
        writeln!(out, "{}", f.display()).map_err(io)?;
    }
    Ok(EXIT_OK)
}

/// Parses `args` (program name first) and runs the command. Returns the
/// process exit code.
pub fn run_cli<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            let _ = if code == 0 { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return if code == 0 { EXIT_OK } else { EXIT_USAGE };
        }
    };
    let res = load_config(cli.config.as_deref()).and_then(|cfg| match &cli.cmd {
        Cmd::Run(a) => cmd_run(a, &cfg, out),
        Cmd::Sweep(a) => cmd_sweep(a, &cfg, out),
        Cmd::Alloc(a) => cmd_alloc(a, &cfg, out),
        Cmd::Emit(a) => cmd_emit(a, &cfg, out),
    });
    match res {
        Ok(code) => code,
        Err(Fail(code, msg)) => {
            let _ = writeln!(err, "error: {msg}");
            code
        }
    }
}
