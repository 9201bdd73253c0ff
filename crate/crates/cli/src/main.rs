use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::PathBuf;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use plif::holder::HolderSpec;
use plif::interp::{BuildConfig, PiecewiseInterpolant};
use plif::kde::{load_samples_csv, rate_bandwidth, KdeModel, Kernel};
use plif::seed::stream_seed;
use plif_cli::bench::{run_bench, write_csv, BenchConfig};
use plif_cli::density::build_density;
use plif_cli::entropy_sweep;

/// Build, query, and benchmark piecewise polynomial density surrogates.
///
/// A build samples or ingests data, fits a kernel density estimate, and
/// compiles it into a file whose queries cost the same no matter how much
/// data sat behind the estimator.
#[derive(Parser)]
#[command(name = "plif", version, about)]
struct Cli {
    /// Worker threads for cell evaluation during builds (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Compile an estimator into a surrogate file.
    Build(BuildArgs),
    /// Evaluate a surrogate file at points.
    Query(QueryArgs),
    /// Full pipeline benchmark against a known synthetic density.
    Bench(BenchArgs),
    /// Covering-net sizes for a smoothness class across accuracies.
    Entropy(EntropyArgs),
}

#[derive(Args)]
struct BuildArgs {
    /// Synthetic density to sample from, e.g. "trig:a=0.5,k=1" or
    /// "arch:w=0.6@1+0.4@3" or "uniform". Mutually exclusive with --samples.
    #[arg(long, conflicts_with = "samples")]
    density: Option<String>,
    /// CSV of sample points, one point per row, d numeric columns.
    #[arg(long)]
    samples: Option<PathBuf>,
    /// Smoothness exponent of the assumed class.
    #[arg(long)]
    beta: f64,
    /// Smoothness scale of the assumed class.
    #[arg(long = "L")]
    l: f64,
    #[arg(long, default_value_t = 1)]
    dim: usize,
    /// Sample count: how many points to draw with --density, or a cap
    /// override with --samples.
    #[arg(long)]
    n: Option<u64>,
    /// With --samples, take the sample count from the file's row count.
    #[arg(long, conflicts_with = "n")]
    n_from_file: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Store values as fixed point with this many fraction bits (1..=44);
    /// omitted means full f64 payload.
    #[arg(long)]
    precision: Option<u32>,
    /// Output surrogate file.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct QueryArgs {
    /// Surrogate file produced by build.
    #[arg(long)]
    file: PathBuf,
    /// Inline query point, comma-separated coordinates. Repeatable.
    #[arg(long = "point")]
    points: Vec<String>,
    /// CSV of query points, one per row; streamed, so any row count works.
    #[arg(long = "points")]
    points_file: Option<PathBuf>,
    /// Write "coords...,value" CSV here instead of values to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, default_value = "trig:a=0.5,k=1")]
    density: String,
    #[arg(long)]
    beta: f64,
    #[arg(long = "L")]
    l: f64,
    #[arg(long, default_value_t = 1)]
    dim: usize,
    /// Sample counts, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    n: Vec<u64>,
    #[arg(long, default_value_t = 20)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Approximate evaluation grid size (exact size is in the report).
    #[arg(long, default_value_t = 10_000)]
    grid: usize,
    /// Measure on [h, 1-h]^d only, h the estimator bandwidth per n.
    #[arg(long)]
    interior_only: bool,
    #[arg(long)]
    precision: Option<u32>,
    /// Per-n rows as CSV.
    #[arg(long)]
    out_csv: Option<PathBuf>,
    /// Full report (config, rows, fitted slope) as JSON.
    #[arg(long)]
    out_json: Option<PathBuf>,
}

#[derive(Args)]
struct EntropyArgs {
    #[arg(long)]
    beta: f64,
    #[arg(long = "L")]
    l: f64,
    #[arg(long, default_value_t = 1)]
    dim: usize,
    /// Accuracy levels, comma separated, each in (0, 1].
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "0.125,0.0625,0.03125,0.015625,0.0078125,0.00390625"
    )]
    deltas: Vec<f64>,
    /// Write (delta, mesh_points, log_net_size) rows here as CSV.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    if cli.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global()
            .context("thread pool configuration")?;
    }
    match cli.cmd {
        Cmd::Build(args) => cmd_build(args),
        Cmd::Query(args) => cmd_query(args),
        Cmd::Bench(args) => cmd_bench(args),
        Cmd::Entropy(args) => cmd_entropy(args),
    }
}

fn cmd_build(args: BuildArgs) -> Result<()> {
    let spec = HolderSpec::new(args.beta, args.l, args.dim)?;
    let kernel = Kernel::for_order(spec.ell());

    let (samples, n, source) = if let Some(path) = &args.samples {
        let (samples, cols) =
            load_samples_csv(path, Some(args.dim)).with_context(|| format!("reading {path:?}"))?;
        let rows = samples.len() / cols;
        let n = if args.n_from_file {
            rows as u64
        } else {
            args.n
                .context("with --samples, pass --n or --n-from-file")?
        };
        (samples, n, format!("csv:{}", path.display()))
    } else if let Some(density) = &args.density {
        let n = args.n.context("with --density, pass --n")? as usize;
        let density = build_density(density, args.beta, args.l, args.dim)?;
        let samples = density.sample(n, stream_seed(args.seed, 0, 0));
        (samples, n as u64, format!("sampled:{}", density.name()))
    } else {
        bail!("pass --density or --samples");
    };

    let kde = KdeModel::new(samples, args.dim, kernel, rate_bandwidth(n as usize, args.beta, args.dim))?;
    let t0 = Instant::now();
    let mut fi = PiecewiseInterpolant::build(
        |y| kde.eval(y),
        n,
        spec,
        &BuildConfig {
            precision: args.precision,
            ..BuildConfig::default()
        },
    )?;
    let build_ms = t0.elapsed().as_secs_f64() * 1e3;
    fi.set_source(source);

    let mut w = BufWriter::new(File::create(&args.out).with_context(|| format!("{:?}", args.out))?);
    fi.serialize(&mut w)?;
    w.flush()?;

    println!(
        "{}",
        json!({
            "out": args.out,
            "n": n,
            "cells_per_axis": fi.geometry().cells_per_axis(),
            "nodes_per_cell": fi.geometry().lattice().len(),
            "oracle_calls": fi.value_count(),
            "bytes": fi.serialized_len(),
            "precision": fi.precision(),
            "build_ms": build_ms,
        })
    );
    Ok(())
}

fn parse_point(s: &str, dim: usize) -> Result<Vec<f64>> {
    let p: Vec<f64> = s
        .split(',')
        .map(|c| c.trim().parse().with_context(|| format!("coordinate {c:?}")))
        .collect::<Result<_>>()?;
    if p.len() != dim {
        bail!("point {s:?} has {} coordinates, surrogate has dimension {dim}", p.len());
    }
    Ok(p)
}

fn cmd_query(args: QueryArgs) -> Result<()> {
    let mut r = BufReader::new(File::open(&args.file).with_context(|| format!("{:?}", args.file))?);
    let fi = PiecewiseInterpolant::deserialize(&mut r)?;
    let dim = fi.geometry().dim();

    let stdout = std::io::stdout();
    let mut sink: Box<dyn Write> = match &args.out {
        Some(path) => Box::new(BufWriter::new(
            File::create(path).with_context(|| format!("{path:?}"))?,
        )),
        None => Box::new(BufWriter::new(stdout.lock())),
    };
    let csv_out = args.out.is_some();
    let mut emit = |point: &[f64], value: f64| -> Result<()> {
        if csv_out {
            for c in point {
                write!(sink, "{c},")?;
            }
            writeln!(sink, "{value}")?;
        } else {
            writeln!(sink, "{value}")?;
        }
        Ok(())
    };

    let mut total = 0usize;
    for s in &args.points {
        let p = parse_point(s, dim)?;
        let v = fi.query(&p)?;
        emit(&p, v)?;
        total += 1;
    }
    if let Some(path) = &args.points_file {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .from_path(path)
            .with_context(|| format!("{path:?}"))?;
        for (i, record) in reader.records().enumerate() {
            let record = record?;
            if record.iter().all(|f| f.is_empty()) {
                continue;
            }
            let p: Vec<f64> = record
                .iter()
                .map(|f| f.parse().with_context(|| format!("row {}: field {f:?}", i + 1)))
                .collect::<Result<_>>()?;
            if p.len() != dim {
                bail!("row {}: {} coordinates, expected {dim}", i + 1, p.len());
            }
            let v = fi.query(&p)?;
            emit(&p, v)?;
            total += 1;
        }
    }
    if total == 0 {
        bail!("no query points given; use --point or --points");
    }
    sink.flush()?;
    Ok(())
}

fn cmd_bench(args: BenchArgs) -> Result<()> {
    let cfg = BenchConfig {
        density: args.density,
        beta: args.beta,
        l: args.l,
        dim: args.dim,
        n_list: args.n,
        trials: args.trials,
        seed: args.seed,
        grid: args.grid,
        interior_only: args.interior_only,
        precision: args.precision,
    };
    let report = run_bench(&cfg)?;
    if let Some(path) = &args.out_csv {
        let f = File::create(path).with_context(|| format!("{path:?}"))?;
        write_csv(&report, BufWriter::new(f))?;
    }
    if let Some(path) = &args.out_json {
        let f = File::create(path).with_context(|| format!("{path:?}"))?;
        serde_json::to_writer_pretty(BufWriter::new(f), &report)?;
    }
    println!(
        "{}",
        json!({
            "fitted_slope": report.fitted_slope,
            "reference_slope": report.reference_slope,
            "measured_constant": report.measured_constant,
            "stability_constant": report.stability_constant,
            "grid_points": report.grid_points,
            "rows": report.rows.len(),
        })
    );
    Ok(())
}

fn cmd_entropy(args: EntropyArgs) -> Result<()> {
    let spec = HolderSpec::new(args.beta, args.l, args.dim)?;
    let report = entropy_sweep(spec, &args.deltas)?;
    if let Some(path) = &args.out {
        let f = File::create(path).with_context(|| format!("{path:?}"))?;
        let mut w = csv::Writer::from_writer(BufWriter::new(f));
        for row in &report.rows {
            w.serialize(row)?;
        }
        w.flush()?;
    } else {
        for row in &report.rows {
            println!("{},{},{}", row.delta, row.mesh_points, row.log_net_size);
        }
    }
    eprintln!(
        "{}",
        json!({
            "fitted_slope": report.fitted_slope,
            "reference_slope": report.reference_slope,
        })
    );
    Ok(())
}
