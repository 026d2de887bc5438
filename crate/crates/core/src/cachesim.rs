//! Trace-driven multi-level set-associative LRU cache model and tile-size
//! sweeps over it.

use std::collections::HashMap;
use std::fmt;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::exec::{self, ExecOptions, TraceEvent, TraceSink};
use crate::kernel::Prdg;
use crate::memalloc::{affine_split, allocate};
use crate::tiler::{Scheme, TileSpec, TilingContext};

pub const DEFAULT_LINE: u64 = 64;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ConfigError {
    #[error("no cache levels")]
    Empty,
    #[error("line size {0} is not a power of two")]
    Line(u64),
    #[error("level {level}: capacity {capacity} is not a multiple of ways x line ({ways} x {line})")]
    Shape { level: usize, capacity: u64, ways: u64, line: u64 },
    #[error("cannot parse cache spec `{0}`")]
    Syntax(String),
    #[error("unknown cache preset `{0}`")]
    Preset(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct LevelConfig {
    pub capacity: u64,
    /// 0 means fully associative.
    pub ways: u64,
}

impl LevelConfig {
    pub fn lines(&self, line: u64) -> u64 {
        self.capacity / line
    }

    pub fn effective_ways(&self, line: u64) -> u64 {
        if self.ways == 0 {
            self.lines(line)
        } else {
            self.ways
        }
    }

    pub fn sets(&self, line: u64) -> u64 {
        self.lines(line) / self.effective_ways(line)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CacheConfig {
    pub levels: Vec<LevelConfig>,
    pub line: u64,
    /// Evictions from a lower level invalidate the line above.
    pub inclusive: bool,
}

pub const PRESETS: [&str; 4] = ["desk", "desk-llc", "full", "2way"];

fn size_text(bytes: u64) -> String {
    if bytes % (1 << 20) == 0 {
        format!("{}M", bytes >> 20)
    } else if bytes % (1 << 10) == 0 {
        format!("{}K", bytes >> 10)
    } else {
        bytes.to_string()
    }
}

fn parse_size(s: &str) -> Option<u64> {
    let s = s.trim();
    let (num, mult) = match s.chars().last()? {
        'K' | 'k' => (&s[..s.len() - 1], 1 << 10),
        'M' | 'm' => (&s[..s.len() - 1], 1 << 20),
        'G' | 'g' => (&s[..s.len() - 1], 1 << 30),
        _ => (s, 1),
    };
    num.parse::<u64>().ok()?.checked_mul(mult)
}

impl CacheConfig {
    pub fn new(levels: Vec<LevelConfig>, line: u64) -> Result<Self, ConfigError> {
        let c = CacheConfig {
            levels,
            line,
            inclusive: false,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.levels.is_empty() {
            return Err(ConfigError::Empty);
        }
        if !self.line.is_power_of_two() {
            return Err(ConfigError::Line(self.line));
        }
        for (k, l) in self.levels.iter().enumerate() {
            let ways = l.ways.max(1);
            if l.capacity == 0 || l.capacity % (ways * self.line) != 0 {
                return Err(ConfigError::Shape {
                    level: k,
                    capacity: l.capacity,
                    ways: l.ways,
                    line: self.line,
                });
            }
        }
        Ok(())
    }

    pub fn preset(name: &str) -> Result<Self, ConfigError> {
        let lv = |capacity: u64, ways: u64| LevelConfig { capacity, ways };
        let levels = match name {
            "desk" => vec![lv(32 << 10, 8), lv(256 << 10, 8), lv(1 << 20, 16)],
            "desk-llc" => vec![lv(1 << 20, 16)],
            "full" => vec![lv(1 << 20, 0)],
            "2way" => vec![lv(1 << 20, 2)],
            _ => return Err(ConfigError::Preset(name.to_string())),
        };
        CacheConfig::new(levels, DEFAULT_LINE)
    }

    /// Parses `CAP:WAYS[,CAP:WAYS...][@LINE]`, e.g. `32K:8,1M:16@64`;
    /// `full` as ways means fully associative.
    pub fn parse_spec(spec: &str) -> Result<Self, ConfigError> {
        let bad = || ConfigError::Syntax(spec.to_string());
        let (levels, line) = match spec.split_once('@') {
            Some((l, n)) => (l, n.trim().parse::<u64>().map_err(|_| bad())?),
            None => (spec, DEFAULT_LINE),
        };
        let mut out = Vec::new();
        for part in levels.split(',') {
            let (cap, ways) = part.split_once(':').ok_or_else(bad)?;
            let capacity = parse_size(cap).ok_or_else(bad)?;
            let ways = match ways.trim() {
                "full" => 0,
                w => w.parse::<u64>().map_err(|_| bad())?,
            };
            out.push(LevelConfig { capacity, ways });
        }
        CacheConfig::new(out, line)
    }

    /// A preset name or a spec string.
    pub fn resolve(s: &str) -> Result<Self, ConfigError> {
        if PRESETS.contains(&s) {
            CacheConfig::preset(s)
        } else {
            CacheConfig::parse_spec(s)
        }
    }

    /// The same levels with the last level's associativity replaced.
    pub fn with_llc_ways(&self, ways: u64) -> Result<Self, ConfigError> {
        let mut c = self.clone();
        if let Some(l) = c.levels.last_mut() {
            l.ways = ways;
        }
        c.validate()?;
        Ok(c)
    }
}

impl fmt::Display for CacheConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .levels
            .iter()
            .map(|l| {
                let ways = if l.ways == 0 { "full".to_string() } else { l.ways.to_string() };
                format!("{}:{ways}", size_text(l.capacity))
            })
            .collect();
        write!(f, "{}@{}", parts.join(","), self.line)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct SimStats {
    pub hits: Vec<u64>,
    pub misses: Vec<u64>,
    pub accesses: u64,
    pub oca: u64,
}

// Small sets keep tags most-recent first; large sets use a stamp per line.
#[derive(Debug, Clone)]
enum Set {
    Small(Vec<u64>),
    Large { stamps: HashMap<u64, u64>, order: std::collections::BTreeMap<u64, u64> },
}

const SMALL_WAYS: u64 = 64;

#[derive(Debug, Clone)]
struct Level {
    sets: Vec<Set>,
    ways: usize,
    nsets: u64,
    clock: u64,
}

impl Level {
    fn new(cfg: &LevelConfig, line: u64) -> Self {
        let ways = cfg.effective_ways(line);
        let nsets = cfg.sets(line);
        let set = if ways <= SMALL_WAYS {
            Set::Small(Vec::with_capacity(ways as usize))
        } else {
            Set::Large {
                stamps: HashMap::new(),
                order: Default::default(),
            }
        };
        Level {
            sets: vec![set; nsets as usize],
            ways: ways as usize,
            nsets,
            clock: 0,
        }
    }

    /// Looks up `tag`, installing it on a miss. Returns (hit, evicted).
    fn access(&mut self, tag: u64) -> (bool, Option<u64>) {
        let ways = self.ways;
        self.clock += 1;
        let clock = self.clock;
        match &mut self.sets[(tag % self.nsets) as usize] {
            Set::Small(v) => {
                if let Some(pos) = v.iter().position(|&t| t == tag) {
                    v[..=pos].rotate_right(1);
                    return (true, None);
                }
                let evicted = if v.len() == ways { v.pop() } else { None };
                v.insert(0, tag);
                (false, evicted)
            }
            Set::Large { stamps, order } => {
                if let Some(old) = stamps.insert(tag, clock) {
                    order.remove(&old);
                    order.insert(clock, tag);
                    return (true, None);
                }
                order.insert(clock, tag);
                let mut evicted = None;
                if stamps.len() > ways {
                    let (&s, &t) = order.iter().next().expect("non-empty");
                    order.remove(&s);
                    stamps.remove(&t);
                    evicted = Some(t);
                }
                (false, evicted)
            }
        }
    }

    fn invalidate(&mut self, tag: u64) {
        match &mut self.sets[(tag % self.nsets) as usize] {
            Set::Small(v) => v.retain(|&t| t != tag),
            Set::Large { stamps, order } => {
                if let Some(s) = stamps.remove(&tag) {
                    order.remove(&s);
                }
            }
        }
    }
}

/// Cache hierarchy state; also a [`TraceSink`].
#[derive(Debug, Clone)]
pub struct Cache {
    cfg: CacheConfig,
    levels: Vec<Level>,
    stats: SimStats,
}

impl Cache {
    pub fn new(cfg: &CacheConfig) -> Self {
        Cache {
            levels: cfg.levels.iter().map(|l| Level::new(l, cfg.line)).collect(),
            stats: SimStats {
                hits: vec![0; cfg.levels.len()],
                misses: vec![0; cfg.levels.len()],
                accesses: 0,
                oca: 0,
            },
            cfg: cfg.clone(),
        }
    }

    /// One access; reads and writes both allocate.
    pub fn access(&mut self, addr: u64) {
        let tag = addr / self.cfg.line;
        self.stats.accesses += 1;
        let n = self.levels.len();
        for k in 0..n {
            let (hit, evicted) = self.levels[k].access(tag);
            if hit {
                self.stats.hits[k] += 1;
                return;
            }
            self.stats.misses[k] += 1;
            if let (true, Some(t)) = (self.cfg.inclusive, evicted) {
                for upper in &mut self.levels[..k] {
                    upper.invalidate(t);
                }
            }
        }
        self.stats.oca += 1;
    }

    pub fn stats(&self) -> &SimStats {
        &self.stats
    }

    pub fn into_stats(self) -> SimStats {
        self.stats
    }
}

impl TraceSink for Cache {
    fn event(&mut self, ev: TraceEvent) {
        self.access(ev.byte_addr);
    }
}

pub fn simulate(trace: impl IntoIterator<Item = u64>, cfg: &CacheConfig) -> SimStats {
    let mut c = Cache::new(cfg);
    for a in trace {
        c.access(a);
    }
    c.into_stats()
}

// ---------------------------------------------------------------------------
// Sweeps
// ---------------------------------------------------------------------------

/// Storage used while sweeping.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Storage {
    /// Maps from the allocator (the default; close to hand-written code).
    #[default]
    Allocated,
    SingleAssignment,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub scheme: Scheme,
    pub tile: TileSpec,
    pub accesses: u64,
    pub misses: Vec<u64>,
    pub oca: u64,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SchemeSummary {
    pub scheme: Scheme,
    pub cells: usize,
    pub mean: f64,
    pub stddev: f64,
    pub cov: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepTable {
    pub levels: usize,
    pub rows: Vec<SweepRow>,
    pub summary: Vec<SchemeSummary>,
}

/// Mean and population standard deviation.
pub fn mean_stddev(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (0.0, 0.0);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

impl SweepTable {
    pub fn summary_for(&self, scheme: Scheme) -> Option<&SchemeSummary> {
        self.summary.iter().find(|s| s.scheme == scheme)
    }

    /// CSV: one row per cell, a blank line, then the per-scheme summary.
    pub fn to_csv(&self) -> String {
        let mut w = csv::WriterBuilder::new().flexible(true).from_writer(Vec::new());
        let mut header = vec!["scheme".to_string(), "tile".to_string(), "accesses".to_string()];
        header.extend((1..=self.levels).map(|k| format!("l{k}_misses")));
        header.push("oca".into());
        header.push("error".into());
        w.write_record(&header).expect("in-memory write");
        for r in &self.rows {
            let mut rec = vec![r.scheme.to_string(), r.tile.to_string(), r.accesses.to_string()];
            rec.extend(r.misses.iter().map(u64::to_string));
            rec.extend(std::iter::repeat(String::new()).take(self.levels - r.misses.len()));
            rec.push(r.oca.to_string());
            rec.push(r.error.clone().unwrap_or_default());
            w.write_record(&rec).expect("in-memory write");
        }
        let mut out = String::from_utf8(w.into_inner().expect("flush")).expect("utf8");
        out.push('\n');
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["scheme", "cells", "mean_oca", "stddev_oca", "cov_oca"]).expect("in-memory write");
        for s in &self.summary {
            w.write_record([
                s.scheme.to_string(),
                s.cells.to_string(),
                format!("{:.3}", s.mean),
                format!("{:.3}", s.stddev),
                format!("{:.6}", s.cov),
            ])
            .expect("in-memory write");
        }
        out.push_str(&String::from_utf8(w.into_inner().expect("flush")).expect("utf8"));
        out
    }
}

/// Runs one (scheme, tile) cell: execute with tracing into the cache.
pub fn run_cell(
    ctx: &TilingContext,
    maps: &[crate::memalloc::MemoryMap],
    scheme: Scheme,
    tile: &TileSpec,
    cfg: &CacheConfig,
) -> Result<SimStats, String> {
    let order = ctx.order(scheme, Some(tile)).map_err(|e| e.to_string())?;
    let mut cache = Cache::new(cfg);
    exec::run(&ctx.prdg, &ctx.params, &order, maps, &ExecOptions::default(), Some(&mut cache)).map_err(|e| e.to_string())?;
    Ok(cache.into_stats())
}

/// Every (scheme, tile) cell, scheme-major. Cells run on the current rayon
/// pool; a failing cell is recorded and the sweep continues.
pub fn sweep(
    p: &Prdg,
    params: &[i64],
    tiles: &[TileSpec],
    schemes: &[Scheme],
    cfg: &CacheConfig,
    storage: Storage,
) -> Result<SweepTable, String> {
    let (prdg, maps) = match storage {
        Storage::Allocated => {
            let split = affine_split(p, params).map_err(|e| e.to_string())?;
            let maps = allocate(&split, params).map_err(|e| e.to_string())?.maps();
            (split.prdg, maps)
        }
        Storage::SingleAssignment => (p.clone(), Vec::new()),
    };
    let ctx = TilingContext::new(&prdg, params).map_err(|e| e.to_string())?;
    let cells: Vec<(Scheme, &TileSpec)> = schemes.iter().flat_map(|&s| tiles.iter().map(move |t| (s, t))).collect();
    let rows: Vec<SweepRow> = cells
        .par_iter()
        .map(|&(scheme, tile)| match run_cell(&ctx, &maps, scheme, tile, cfg) {
            Ok(st) => SweepRow {
                scheme,
                tile: tile.clone(),
                accesses: st.accesses,
                misses: st.misses,
                oca: st.oca,
                error: None,
            },
            Err(e) => SweepRow {
                scheme,
                tile: tile.clone(),
                accesses: 0,
                misses: Vec::new(),
                oca: 0,
                error: Some(e),
            },
        })
        .collect();
    let summary = schemes
        .iter()
        .map(|&scheme| {
            let xs: Vec<f64> = rows.iter().filter(|r| r.scheme == scheme && r.error.is_none()).map(|r| r.oca as f64).collect();
            let (mean, stddev) = mean_stddev(&xs);
            SchemeSummary {
                scheme,
                cells: xs.len(),
                mean,
                stddev,
                cov: if mean > 0.0 { stddev / mean } else { 0.0 },
            }
        })
        .collect();
    Ok(SweepTable {
        levels: cfg.levels.len(),
        rows,
        summary,
    })
}

/// Grid mini-language: per dimension a comma list or `a:b:c` range,
/// dimensions separated by `x`, e.g. `8,16,32x8:32:8`. A single dimension
/// spec is repeated `dim` times.
pub fn parse_grid(spec: &str, dim: usize) -> Result<Vec<TileSpec>, String> {
    let axes: Vec<Vec<i64>> = spec.split(['x', 'X']).map(parse_axis).collect::<Result<_, _>>()?;
    let axes = if axes.len() == 1 && dim > 1 { vec![axes[0].clone(); dim] } else { axes };
    if axes.len() != dim {
        return Err(format!("grid has {} dimensions, kernel band has {dim}", axes.len()));
    }
    let mut out: Vec<Vec<i64>> = vec![Vec::new()];
    for axis in &axes {
        out = out
            .iter()
            .flat_map(|prefix| {
                axis.iter().map(move |&v| {
                    let mut t = prefix.clone();
                    t.push(v);
                    t
                })
            })
            .collect();
    }
    out.into_iter().map(|t| TileSpec::new(t).map_err(|e| e.to_string())).collect()
}

fn parse_axis(s: &str) -> Result<Vec<i64>, String> {
    let s = s.trim();
    let bad = || format!("bad grid axis `{s}`");
    let vals: Vec<i64> = if s.contains(':') {
        let parts: Vec<i64> = s.split(':').map(|x| x.trim().parse::<i64>().map_err(|_| bad())).collect::<Result<_, _>>()?;
        let [a, b, c] = parts[..] else { return Err(bad()) };
        if c <= 0 {
            return Err(bad());
        }
        (a..=b).step_by(c as usize).collect()
    } else {
        s.split(',').filter(|x| !x.trim().is_empty()).map(|x| x.trim().parse::<i64>().map_err(|_| bad())).collect::<Result<_, _>>()?
    };
    if vals.is_empty() {
        return Err(format!("empty grid axis `{s}`"));
    }
    if vals.iter().any(|&v| v <= 0) {
        return Err(format!("grid axis `{s}` has a non-positive size"));
    }
    Ok(vals)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn one(capacity: u64, ways: u64, line: u64) -> CacheConfig {
        CacheConfig::new(vec![LevelConfig { capacity, ways }], line).unwrap()
    }

    // Per-set LRU stack distance, recomputed from the whole history.
    fn stack_distance_misses(trace: &[u64], capacity: u64, ways: u64, line: u64) -> u64 {
        let lines = capacity / line;
        let ways = if ways == 0 { lines } else { ways };
        let sets = lines / ways;
        let mut last: HashMap<u64, usize> = HashMap::new();
        let mut misses = 0;
        for (i, &a) in trace.iter().enumerate() {
            let tag = a / line;
            match last.get(&tag) {
                None => misses += 1,
                Some(&j) => {
                    let distinct: std::collections::HashSet<u64> =
                        trace[j + 1..i].iter().map(|x| x / line).filter(|t| t % sets == tag % sets && *t != tag).collect();
                    if distinct.len() as u64 >= ways {
                        misses += 1;
                    }
                }
            }
            last.insert(tag, i);
        }
        misses
    }

    #[test]
    fn sequential_scan_examples() {
        let trace: Vec<u64> = (0..1024).map(|k| k * 8).collect();
        let cfg = one(32 << 10, 8, 64);
        assert_eq!(simulate(trace.iter().copied(), &cfg).misses[0], 128);
        let twice = trace.iter().chain(&trace).copied();
        assert_eq!(simulate(twice, &cfg).misses[0], 128);
    }

    #[test]
    fn conflicting_pair_always_misses() {
        let cfg = one(128, 1, 64);
        let trace = (0..20).map(|k| if k % 2 == 0 { 0 } else { 128 });
        let st = simulate(trace, &cfg);
        assert_eq!(st.misses[0], 20);
        assert_eq!(st.hits[0], 0);
    }

    #[test]
    fn agrees_with_stack_distance_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for (cap, ways) in [(1024, 2), (1024, 0), (2048, 4), (512, 8)] {
            let trace: Vec<u64> = (0..3000).map(|_| rng.gen_range(0..8192u64)).collect();
            let st = simulate(trace.iter().copied(), &one(cap, ways, 64));
            assert_eq!(st.misses[0], stack_distance_misses(&trace, cap, ways, 64), "{cap}:{ways}");
        }
    }

    #[test]
    fn hits_plus_misses_add_up() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let trace: Vec<u64> = (0..5000).map(|_| rng.gen_range(0..1u64 << 20)).collect();
        let cfg = CacheConfig::preset("desk").unwrap();
        let st = simulate(trace.iter().copied(), &cfg);
        assert_eq!(st.hits[0] + st.misses[0], st.accesses);
        for k in 1..3 {
            assert_eq!(st.hits[k] + st.misses[k], st.misses[k - 1]);
        }
        assert_eq!(st.oca, st.misses[2]);
    }

    #[test]
    fn spec_strings_round_trip() {
        let c = CacheConfig::parse_spec("32K:8,1M:16@64").unwrap();
        assert_eq!(c.levels[1], LevelConfig { capacity: 1 << 20, ways: 16 });
        assert_eq!(c.to_string(), "32K:8,1M:16@64");
        assert_eq!(CacheConfig::resolve("full").unwrap().to_string(), "1M:full@64");
        assert!(matches!(CacheConfig::parse_spec("1M:3"), Err(ConfigError::Shape { .. })));
        assert!(matches!(CacheConfig::parse_spec("1M:8@48"), Err(ConfigError::Line(48))));
        assert!(CacheConfig::parse_spec("banana").is_err());
    }

    #[test]
    fn grids() {
        assert_eq!(parse_grid("8,16,32x8,16,32", 2).unwrap().len(), 9);
        assert_eq!(parse_grid("10:50:10", 1).unwrap().len(), 5);
        assert_eq!(parse_grid("8,16", 3).unwrap().len(), 8);
        assert!(parse_grid("", 1).is_err());
        assert!(parse_grid("0,8", 1).is_err());
        assert!(parse_grid("8x8", 3).is_err());
    }

    #[test]
    fn single_cell_sweep_has_zero_spread_and_is_deterministic() {
        let p = corpus::load("heat2d").unwrap();
        let tiles = vec![TileSpec::new(vec![2, 4, 4]).unwrap()];
        let cfg = CacheConfig::parse_spec("4K:4").unwrap();
        let a = sweep(&p, &[4, 16], &tiles, &[Scheme::Slt, Scheme::Cot], &cfg, Storage::Allocated).unwrap();
        let b = sweep(&p, &[4, 16], &tiles, &[Scheme::Slt, Scheme::Cot], &cfg, Storage::Allocated).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.rows.len(), 2);
        assert!(a.summary.iter().all(|s| s.stddev == 0.0 && s.cells == 1));
        assert_eq!(a.to_csv(), b.to_csv());
    }

    #[test]
    fn failing_cell_is_recorded() {
        let p = corpus::load("heat2d").unwrap();
        let tiles = vec![TileSpec::new(vec![2, 4]).unwrap(), TileSpec::new(vec![2, 4, 4]).unwrap()];
        let cfg = CacheConfig::preset("desk-llc").unwrap();
        let t = sweep(&p, &[2, 8], &tiles, &[Scheme::Cot], &cfg, Storage::SingleAssignment).unwrap();
        assert!(t.rows[0].error.is_some());
        assert!(t.rows[1].error.is_none());
        assert_eq!(t.summary[0].cells, 1);
    }

    #[test]
    fn mean_and_population_stddev() {
        let (m, s) = mean_stddev(&[2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0]);
        assert_eq!(m, 5.0);
        assert_eq!(s, 2.0);
    }
}
