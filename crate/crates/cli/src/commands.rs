use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use serde::Serialize;

use bayes_series::analysis::{run_convergence, run_limits, run_sweep, ConvergenceSetup};
use bayes_series::bernoulli::{series_terms, BernoulliSeries, TermMode};
use bayes_series::catalog::{parse_real, BoundKind, BoundSpec, Params, RefCache, SeriesId, SeriesSpec};
use bayes_series::limits::{BaseMeasure, LimitConfig, LimitMode, RhoPolicy, ThumbRule};
use bayes_series::mobius::{build_to_file, MobiusTable};
use bayes_series::par::Execution;
use bayes_series::posterior::PosteriorMode;
use bayes_series::summation::SumOptions;

use crate::config::Settings;
use crate::fail::CliError;

const CACHE_ENV: &str = "BAYES_SERIES_CACHE";

/// Plain decimal for ordinary magnitudes, scientific otherwise.
pub fn num(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || (1e-4..1e15).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

pub fn execution(threads: Option<usize>, sequential: bool) -> Execution {
    if sequential {
        Execution::Sequential
    } else {
        match threads {
            Some(t) => Execution::with_workers(t),
            None => Execution::default(),
        }
    }
}

fn sum_options(s: &Settings) -> Result<SumOptions, CliError> {
    let mut opts = SumOptions {
        exec: execution(s.threads, s.sequential.unwrap_or(false)),
        ..SumOptions::default()
    };
    if let Some(c) = s.chunk {
        if c == 0 {
            return Err(CliError::usage("--chunk must be positive"));
        }
        opts.chunk = c;
    }
    Ok(opts)
}

fn series_spec(s: &Settings) -> Result<SeriesSpec, CliError> {
    let name = s.series.as_deref().ok_or_else(|| CliError::usage("--series is required"))?;
    let id = SeriesId::from_str(name)?;
    let params = match &s.params {
        Some(text) => Params::parse_onto(id.default_params(), text)?,
        None => id.default_params(),
    };
    let spec = SeriesSpec::new(id, params)?;
    if id != SeriesId::MobiusDirichlet {
        return Ok(spec);
    }
    let path = s
        .mobius_table
        .as_deref()
        .ok_or_else(|| CliError::input("the Mobius series needs --mobius-table"))?;
    let table = MobiusTable::load(path)
        .map_err(|e| CliError::input(format!("cannot load Mobius table {}: {e}", path.display())))?;
    Ok(spec.with_mobius(Arc::new(table)))
}

fn positive(v: Option<u64>, flag: &str) -> Result<u64, CliError> {
    match v {
        Some(x) if x > 0 => Ok(x),
        Some(_) => Err(CliError::usage(format!("{flag} must be positive"))),
        None => Err(CliError::usage(format!("{flag} is required"))),
    }
}

fn setup(s: &Settings) -> Result<ConvergenceSetup, CliError> {
    let n = positive(s.n, "--n")?;
    let stages = positive(s.stages, "--stages")?;
    let series = series_spec(s)?;
    let id = series.id();
    let mut st = ConvergenceSetup::new(series, n, stages);
    if let Some(b) = &s.bound {
        st.bound = BoundSpec::new(BoundKind::from_str(b)?);
    }
    if let Some(e) = s.epsilon {
        st.bound = st.bound.with_epsilon(e);
    }
    if let Some(m) = &s.mode {
        st.mode = match m.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "recursive" => PosteriorMode::Recursive,
            "nonrecursive" => PosteriorMode::NonRecursive,
            other => return Err(CliError::usage(format!("unknown posterior mode '{other}'"))),
        };
    }
    if let Some(w) = s.window {
        st.classify.window = w;
    }
    if let Some(h) = s.mean_high {
        st.classify.mean_high = h;
    }
    if let Some(l) = s.mean_low {
        st.classify.mean_low = l;
    }
    if st.classify.mean_low.partial_cmp(&st.classify.mean_high) != Some(std::cmp::Ordering::Less) {
        return Err(CliError::usage("--mean-low must be below --mean-high"));
    }
    st.sum = sum_options(s)?;
    // Catch a short Mobius table before any output is produced.
    let last = id.start_index() + n * stages - 1;
    bayes_series::summation::TermSource::check_range(&st.series, last)?;
    Ok(st)
}

fn cache_for(out: Option<&Path>) -> Option<RefCache> {
    if let Some(dir) = std::env::var_os(CACHE_ENV) {
        return Some(RefCache::new(PathBuf::from(dir)));
    }
    let parent = out?.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    Some(RefCache::new(parent.join(".bayes-series-cache")))
}

fn open_out(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    match path {
        Some(p) => {
            let f = File::create(p).map_err(|e| CliError::output(format!("cannot create {}: {e}", p.display())))?;
            Ok(Box::new(BufWriter::new(f)))
        }
        None => Ok(Box::new(BufWriter::new(io::stdout().lock()))),
    }
}

fn write_err(e: io::Error) -> CliError {
    CliError::output(format!("write failed: {e}"))
}

fn print_json<T: Serialize>(value: &T) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::output(e.to_string()))?;
    let mut out = io::stdout().lock();
    writeln!(out, "{text}").map_err(write_err)
}

#[derive(Serialize)]
struct VerdictJson {
    label: String,
    final_mean: f64,
    tail_slope: f64,
}

pub fn analyze(s: &Settings) -> Result<(), CliError> {
    let st = setup(s)?;
    let cache = cache_for(s.out.as_deref());
    let reference = st.reference(cache.as_ref())?;
    let run = run_convergence(&st, reference.as_deref())?;

    let mut w = open_out(s.out.as_deref())?;
    writeln!(w, "stage,partial_sum,bound,y,post_mean,post_var").map_err(write_err)?;
    for r in &run.rows {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            r.stage,
            num(r.partial_sum),
            num(r.bound),
            r.y,
            num(r.post_mean),
            num(r.post_var)
        )
        .map_err(write_err)?;
    }
    w.flush().map_err(write_err)?;
    drop(w);

    print_json(&VerdictJson {
        label: run.verdict.label.to_string(),
        final_mean: run.verdict.final_mean,
        tail_slope: run.verdict.tail_slope,
    })
}

pub fn limits(s: &Settings) -> Result<(), CliError> {
    let stages = positive(s.stages, "--stages")?;
    let bins = s.bins.unwrap_or(10);
    let series = series_spec(s)?;
    let policy = RhoPolicy::from_str(s.rho.as_deref().unwrap_or("2"))?;
    let config = LimitConfig {
        bins,
        mode: LimitMode::from_str(s.limit_mode.as_deref().unwrap_or("dp"))?,
        base: BaseMeasure::from_str(s.base.as_deref().unwrap_or("uniform"))?,
        rho: policy.rho(&series.params())?,
    };
    config.validate()?;
    let mut rule = ThumbRule::default();
    if let Some(b) = s.burn_in {
        rule.burn_in = b;
    }
    if let Some(f) = s.mass_floor {
        rule.mass_floor = f;
    }
    let run = run_limits(&series, config, stages, &rule, true)?;

    let mut w = open_out(s.out.as_deref())?;
    let mut header = String::from("k,running_sum,bin");
    for m in 1..=bins {
        header.push_str(&format!(",mean_{m}"));
    }
    writeln!(w, "{header}").map_err(write_err)?;
    for (row, means) in run.rows.iter().zip(&run.means) {
        let mut line = format!("{},{},{}", row.k, num(row.running_sum), row.bin);
        for m in means {
            line.push(',');
            line.push_str(&num(*m));
        }
        writeln!(w, "{line}").map_err(write_err)?;
    }
    w.flush().map_err(write_err)?;
    drop(w);
    print_json(&run.report)
}

/// Parses `"a=0.3;a=2"` and `"a=0.5:1:0.25,b=1"` style grids. A range expands
/// to every value `start + i*step <= stop`; several ranges in one point form
/// a Cartesian product.
pub fn parse_grid(base: Params, names: &[&str], text: &str) -> Result<Vec<Params>, CliError> {
    let mut grid = Vec::new();
    for point in text.split(';').map(str::trim).filter(|p| !p.is_empty()) {
        let mut partial = vec![base];
        for pair in point.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (name, value) = pair
                .split_once('=')
                .ok_or_else(|| CliError::usage(format!("grid entry '{pair}' is not name=value")))?;
            let values = expand(value.trim())?;
            let name = name.trim();
            if !names.contains(&name) {
                return Err(CliError::usage(format!("series has no parameter '{name}'")));
            }
            let mut next = Vec::with_capacity(partial.len() * values.len());
            for p in &partial {
                for v in &values {
                    let mut q = *p;
                    if name == "a" {
                        q.a = *v;
                    } else {
                        q.b = *v;
                    }
                    next.push(q);
                }
            }
            partial = next;
        }
        grid.extend(partial);
    }
    if grid.is_empty() {
        return Err(CliError::usage("--grid is empty"));
    }
    Ok(grid)
}

fn expand(value: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = value.split(':').collect();
    match parts.as_slice() {
        [v] => Ok(vec![parse_real(v)?]),
        [start, stop, step] => {
            let (start, stop, step) = (parse_real(start)?, parse_real(stop)?, parse_real(step)?);
            if step.is_nan() || step <= 0.0 || stop < start {
                return Err(CliError::usage(format!("bad range '{value}'")));
            }
            let count = ((stop - start) / step + 1e-9).floor() as u64 + 1;
            if count > 1_000_000 {
                return Err(CliError::usage(format!("range '{value}' has too many points")));
            }
            Ok((0..count).map(|i| start + i as f64 * step).collect())
        }
        _ => Err(CliError::usage(format!("bad grid value '{value}'"))),
    }
}

#[derive(Serialize)]
struct SweepJson {
    grid_points: usize,
    smallest_convergent: Option<Params>,
    labels: BTreeMap<String, usize>,
}

pub fn sweep(s: &Settings) -> Result<(), CliError> {
    let text = s.grid.as_deref().ok_or_else(|| CliError::usage("--grid is required"))?;
    let st = setup(s)?;
    let grid = parse_grid(st.series.params(), st.series.id().param_names(), text)?;
    let cache = cache_for(s.out.as_deref());
    let reference = st.reference(cache.as_ref())?;
    let summary = run_sweep(&st, &grid, reference.as_deref())?;

    let names = st.series.id().param_names();
    let mut w = open_out(s.out.as_deref())?;
    let mut header: Vec<&str> = names.to_vec();
    header.extend(["label", "final_mean"]);
    writeln!(w, "{}", header.join("\t")).map_err(write_err)?;
    let mut labels = BTreeMap::new();
    for p in &summary.points {
        let mut cols: Vec<String> = names
            .iter()
            .map(|n| num(if *n == "a" { p.params.a } else { p.params.b }))
            .collect();
        cols.push(p.verdict.label.to_string());
        cols.push(num(p.verdict.final_mean));
        writeln!(w, "{}", cols.join("\t")).map_err(write_err)?;
        *labels.entry(p.verdict.label.to_string()).or_insert(0) += 1;
    }
    w.flush().map_err(write_err)?;
    drop(w);
    print_json(&SweepJson {
        grid_points: summary.points.len(),
        smallest_convergent: summary.smallest_convergent,
        labels,
    })
}

pub fn mobius_build(limit: u64, segment: usize, out: &Path, exec: Execution) -> Result<(), CliError> {
    if let Some(dir) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        if !dir.is_dir() {
            return Err(CliError::output(format!("directory {} does not exist", dir.display())));
        }
    }
    build_to_file(limit, segment, out, exec).map_err(|e| match e {
        bayes_series::Error::Io(io) => CliError::output(format!("cannot write {}: {io}", out.display())),
        other => other.into(),
    })
}

pub fn mobius_mertens(table: &Path, x: u64) -> Result<(), CliError> {
    let t = MobiusTable::load(table)?;
    let m = t.mertens(x).map_err(|e| CliError::input(e.to_string()))?;
    println!("{m}");
    Ok(())
}

#[derive(Serialize)]
struct BernoulliJson {
    series: String,
    mode: String,
    requested: u64,
    computed: u64,
    stopped: Option<String>,
}

pub fn bernoulli(series: &str, mode: &str, max_m: u64, out: Option<&Path>) -> Result<(), CliError> {
    let series = BernoulliSeries::from_str(series)?;
    let mode = TermMode::from_str(mode)?;
    if max_m == 0 {
        return Err(CliError::usage("--max-m must be positive"));
    }
    let mut rows = series_terms(series, max_m, mode).into_iter();
    let first = match rows.next() {
        Some(r) => r?,
        None => return Err(CliError::usage("--max-m must be positive")),
    };
    let mut w = open_out(out)?;
    writeln!(w, "m,log_abs_term,sign,mode").map_err(write_err)?;
    let mut computed = 0;
    let mut stopped = None;
    for r in std::iter::once(Ok(first)).chain(rows) {
        match r {
            Ok(row) => {
                writeln!(w, "{},{},{},{}", row.m, num(row.log_abs_term), row.sign, row.mode).map_err(write_err)?;
                computed = row.m;
            }
            Err(e) => {
                stopped = Some(e.to_string());
                break;
            }
        }
    }
    w.flush().map_err(write_err)?;
    drop(w);
    print_json(&BernoulliJson {
        series: series.to_string(),
        mode: mode.to_string(),
        requested: max_m,
        computed,
        stopped,
    })
}

pub fn catalog_list() -> Result<(), CliError> {
    let mut w = BufWriter::new(io::stdout().lock());
    writeln!(w, "series\tstart\tparams\tdefaults\tbound\tterm").map_err(write_err)?;
    for id in SeriesId::ALL {
        let d = id.default_params();
        let names = id.param_names();
        let defaults: Vec<String> = names
            .iter()
            .map(|n| format!("{n}={}", num(if *n == "a" { d.a } else { d.b })))
            .collect();
        writeln!(
            w,
            "{}\t{}\t{}\t{}\t{}\t{}",
            id.name(),
            id.start_index(),
            if names.is_empty() { "-".to_string() } else { names.join(",") },
            if defaults.is_empty() { "-".to_string() } else { defaults.join(",") },
            BoundKind::for_series(id).name(),
            id.formula()
        )
        .map_err(write_err)?;
    }
    w.flush().map_err(write_err)
}
