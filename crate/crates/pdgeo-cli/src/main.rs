//! Command-line front end: dataset ingestion, hull/center/extent queries,
//! grid inspection, and PD(2) plot-data export.
//!
//! Machine-readable JSON (or CSV for `plot2`) goes to stdout or `--output`;
//! human summaries go to stderr. Exit codes: 0 success, 2 input error,
//! 3 resource cap, 4 numerical failure.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};

use pdgeo::center::{approx_horo_center, CenterParams};
use pdgeo::grid::{build_grid, grid_resolution, Resolution, DEFAULT_GRID_CAP};
use pdgeo::horo::{horoextent_dir, Flat, Horofunction, Orientation};
use pdgeo::hull::{build_eps_ball_hull_with, HullParams, OriginPolicy};
use pdgeo::json::{
    CenterRecord, DatasetRecord, ExtentRecord, GridRecord, HullRecord,
};
use pdgeo::oracle::{random_direction, random_rotation};
use pdgeo::spd::{metric_dist, SpdPoint, SymMatrix};
use pdgeo::Error;

#[derive(Parser)]
#[command(name = "pdgeo", version, about = "Geometry tools for symmetric positive-definite matrices: horoball hulls, horoextents, and robust center points")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// RNG seed; falls back to the PDGEO_SEED environment variable, then 0.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Cap the worker threads used for per-flat parallelism.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Write the machine-readable result here instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Build an epsilon-ball hull of a dataset.
    Hull {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[arg(long, default_value_t = 0.1)]
        epsilon: f64,
        #[arg(long, default_value_t = DEFAULT_GRID_CAP)]
        grid_cap: usize,
        /// Use this input point as the origin instead of the auto 1-center.
        #[arg(long)]
        origin_index: Option<usize>,
        /// Skip the origin translation entirely.
        #[arg(long)]
        no_shift: bool,
    },
    /// Compute an epsilon-approximate horo-center point.
    Center {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[arg(long, default_value_t = 0.1)]
        epsilon: f64,
        #[arg(long, default_value_t = 1e-7)]
        tol: f64,
        #[arg(long, default_value_t = DEFAULT_GRID_CAP)]
        grid_cap: usize,
        /// Cap on the point count for constraint enumeration.
        #[arg(long)]
        subset_cap: Option<usize>,
        #[arg(long)]
        origin_index: Option<usize>,
        #[arg(long)]
        no_shift: bool,
    },
    /// Horoextents of the dataset along explicit or random directions.
    Extent {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        /// Flat rotation, row-major comma-separated values.
        #[arg(long)]
        flat_q: Option<String>,
        /// n = 2 shorthand: flat rotation angle in radians.
        #[arg(long)]
        flat_angle: Option<f64>,
        /// Direction inside the flat: comma-separated unit vector with
        /// strictly decreasing entries.
        #[arg(long)]
        dir_a: Option<String>,
        /// Evaluate this many random directions instead.
        #[arg(long)]
        random: Option<usize>,
        #[arg(long)]
        origin_index: Option<usize>,
        #[arg(long)]
        no_shift: bool,
    },
    /// Build and dump a direction grid.
    Grid {
        #[arg(long)]
        n: usize,
        /// Derive the step from epsilon and d_X.
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long)]
        d_x: Option<f64>,
        /// Or give the angular step directly.
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long, default_value_t = DEFAULT_GRID_CAP)]
        grid_cap: usize,
    },
    /// PD(2) plot data: log-det axis plus Poincare-disk coordinates.
    Plot2 {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        /// Hull JSON whose horospheres are traced into the plot data.
        #[arg(long)]
        hull: Option<PathBuf>,
        /// Sample count per horosphere trace.
        #[arg(long, default_value_t = 128)]
        traces: usize,
    },
    /// Load and validate a dataset, reporting its shape.
    Validate {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
}

fn exit_code(err: &Error) -> i32 {
    match err {
        Error::DimensionMismatch(_, _)
        | Error::BadDimension(_)
        | Error::NotRotation(_)
        | Error::InvalidDirection(_)
        | Error::InvalidParameter(_)
        | Error::EmptyInput => 2,
        Error::GridCap { .. } | Error::TooManyPoints { .. } => 3,
        Error::NotPositiveDefinite { .. }
        | Error::EigDidNotConverge { .. }
        | Error::Overflow(_)
        | Error::Numerical(_)
        | Error::Solver { .. } => 4,
    }
}

fn fail(err: Error) -> ! {
    eprintln!("error: {err}");
    if matches!(err, Error::InvalidDirection(_)) {
        eprintln!("hint: directions must be unit vectors with strictly decreasing entries; normalize and sort before passing them");
    }
    std::process::exit(exit_code(&err));
}

fn fail_io(context: &str, err: impl std::fmt::Display) -> ! {
    eprintln!("error: {context}: {err}");
    std::process::exit(2);
}

fn load_dataset(path: &Path, format: Format) -> Vec<SpdPoint<f64>> {
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => fail_io(&format!("reading {}", path.display()), e),
    };
    match format {
        Format::Json => {
            let record: DatasetRecord = match serde_json::from_str(&text) {
                Ok(r) => r,
                Err(e) => fail_io(
                    &format!("parsing {} (line {}, column {})", path.display(), e.line(), e.column()),
                    e,
                ),
            };
            match record.to_points() {
                Ok((points, asym)) => {
                    if asym > 1e-8 {
                        eprintln!(
                            "warning: symmetrized input with asymmetry up to {asym:e} (entries averaged)"
                        );
                    }
                    points
                }
                Err(e) => fail(e),
            }
        }
        Format::Csv => match parse_csv(&text) {
            Ok(points) => points,
            Err((line, msg)) => fail_io(&format!("parsing {} at line {line}", path.display()), msg),
        },
    }
}

/// CSV format: a header line `n=K`, then one point per line as the
/// `K(K+1)/2` row-major upper-triangle values. Blank lines and `#` comments
/// are skipped.
fn parse_csv(text: &str) -> Result<Vec<SpdPoint<f64>>, (usize, String)> {
    let mut n: Option<usize> = None;
    let mut points = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if n.is_none() {
            let rest = line
                .strip_prefix("n=")
                .or_else(|| line.strip_prefix("n ="))
                .ok_or((lineno + 1, "expected header `n=<dim>`".to_string()))?;
            let dim: usize = rest
                .trim()
                .parse()
                .map_err(|e| (lineno + 1, format!("bad dimension: {e}")))?;
            n = Some(dim);
            continue;
        }
        let dim = n.unwrap();
        let expected = dim * (dim + 1) / 2;
        let mut values = Vec::with_capacity(expected);
        for (k, field) in line.split(',').enumerate() {
            let v: f64 = field
                .trim()
                .parse()
                .map_err(|e| (lineno + 1, format!("value {}: {e}", k + 1)))?;
            values.push(v);
        }
        if values.len() != expected {
            return Err((
                lineno + 1,
                format!("expected {expected} values, got {}", values.len()),
            ));
        }
        let sym = SymMatrix::new(dim, values).map_err(|e| (lineno + 1, e.to_string()))?;
        let point = SpdPoint::new(sym).map_err(|e| {
            (
                lineno + 1,
                format!("point {} is not positive definite: {e}", points.len()),
            )
        })?;
        points.push(point);
    }
    if points.is_empty() {
        return Err((0, "no data rows".to_string()));
    }
    Ok(points)
}

fn emit(output: &Option<PathBuf>, payload: &str) {
    match output {
        Some(path) => {
            if let Err(e) = std::fs::write(path, payload) {
                fail_io(&format!("writing {}", path.display()), e);
            }
        }
        None => {
            let mut out = std::io::stdout().lock();
            if let Err(e) = out.write_all(payload.as_bytes()) {
                fail_io("writing stdout", e);
            }
        }
    }
}

fn to_pretty<S: serde::Serialize>(value: &S) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("serializable");
    text.push('\n');
    text
}

fn origin_policy(origin_index: Option<usize>, no_shift: bool) -> OriginPolicy {
    match (origin_index, no_shift) {
        (_, true) => OriginPolicy::None,
        (Some(i), false) => OriginPolicy::Index(i),
        (None, false) => OriginPolicy::Auto,
    }
}

fn parse_vector(text: &str) -> Vec<f64> {
    text.split(',')
        .map(|f| match f.trim().parse() {
            Ok(v) => v,
            Err(e) => fail_io(&format!("parsing number {f:?}"), e),
        })
        .collect()
}

fn main() {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads.max(1))
            .build_global()
            .ok();
    }
    let seed = cli
        .seed
        .or_else(|| std::env::var("PDGEO_SEED").ok().and_then(|s| s.parse().ok()))
        .unwrap_or(0);

    match cli.command {
        Command::Hull {
            input,
            format,
            epsilon,
            grid_cap,
            origin_index,
            no_shift,
        } => {
            let points = load_dataset(&input, format);
            let started = Instant::now();
            let params = HullParams {
                grid_cap,
                origin: origin_policy(origin_index, no_shift),
            };
            let hull = match build_eps_ball_hull_with(&points, epsilon, &params) {
                Ok(h) => h,
                Err(e) => fail(e),
            };
            let elapsed = started.elapsed();
            emit(&cli.output, &to_pretty(&HullRecord::from_hull(&hull)));
            eprintln!(
                "hull: {} points, grid {} flats, {} horoballs, d_X {:.6}, {:.3}s",
                points.len(),
                hull.grid_len,
                hull.balls.len(),
                hull.d_x,
                elapsed.as_secs_f64()
            );
        }
        Command::Center {
            input,
            format,
            epsilon,
            tol,
            grid_cap,
            subset_cap,
            origin_index,
            no_shift,
        } => {
            let points = load_dataset(&input, format);
            let started = Instant::now();
            let params = CenterParams {
                tol,
                grid_cap,
                subset_cap,
                origin: origin_policy(origin_index, no_shift),
                seed,
            };
            let run = match approx_horo_center(&points, epsilon, &params) {
                Ok(r) => r,
                Err(e) => fail(e),
            };
            let elapsed = started.elapsed();
            emit(&cli.output, &to_pretty(&CenterRecord::from_run(&run)));
            eprintln!(
                "center: {} constraints over {} flats, max violation {:.3e}, objective {:.6}, {:.3}s",
                run.constraints_count,
                run.grid_size,
                run.result.max_violation,
                run.result.objective,
                elapsed.as_secs_f64()
            );
        }
        Command::Extent {
            input,
            format,
            flat_q,
            flat_angle,
            dir_a,
            random,
            origin_index,
            no_shift,
        } => {
            let points = load_dataset(&input, format);
            let n = points[0].dim();
            // Honor the origin policy: translate, then evaluate rays through
            // the identity.
            let origin = match pdgeo::hull::origin_for(&points, origin_policy(origin_index, no_shift)) {
                Ok(o) => o,
                Err(e) => fail(e),
            };
            let shifted: Vec<SpdPoint<f64>> = points
                .iter()
                .map(|p| match pdgeo::spd::translate_to_identity(&origin, p) {
                    Ok(v) => v,
                    Err(e) => fail(e),
                })
                .collect();

            let mut directions: Vec<(Flat<f64>, Vec<f64>)> = Vec::new();
            if let Some(count) = random {
                let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(seed);
                for _ in 0..count {
                    let flat = match Flat::new(random_rotation(n, &mut rng)) {
                        Ok(f) => f,
                        Err(e) => fail(e),
                    };
                    directions.push((flat, random_direction(n, 1e-3, &mut rng)));
                }
            } else {
                let rotation = match (flat_q, flat_angle) {
                    (Some(q), _) => {
                        let vals = parse_vector(&q);
                        match pdgeo::mat::SqMatrix::from_row_major(n, vals) {
                            Ok(m) => m,
                            Err(e) => fail(e),
                        }
                    }
                    (None, Some(angle)) => {
                        if n != 2 {
                            fail(Error::InvalidParameter(
                                "--flat-angle only applies to 2x2 data".into(),
                            ));
                        }
                        pdgeo::grid::givens_rotation(2, 0, 1, angle)
                    }
                    (None, None) => pdgeo::mat::SqMatrix::identity(n),
                };
                let flat = match Flat::new(rotation) {
                    Ok(f) => f,
                    Err(e) => fail(e),
                };
                let a = match dir_a {
                    Some(text) => parse_vector(&text),
                    None => fail(Error::InvalidParameter(
                        "give --dir-a (with --flat-q/--flat-angle) or --random".into(),
                    )),
                };
                directions.push((flat, a));
            }

            let mut records = Vec::new();
            for (flat, a) in &directions {
                // Validate through the horofunction constructor so direction
                // mistakes surface as input errors.
                if let Err(e) =
                    Horofunction::new(flat.clone(), a.clone(), Orientation::Forward)
                {
                    fail(e);
                }
                let ext = match horoextent_dir(flat, a, &shifted) {
                    Ok(v) => v,
                    Err(e) => fail(e),
                };
                records.push(ExtentRecord {
                    q: flat.rotation().as_slice().to_vec(),
                    a: a.clone(),
                    ext,
                });
            }
            emit(&cli.output, &to_pretty(&records));
            eprintln!("extent: {} direction(s) evaluated", records.len());
        }
        Command::Grid {
            n,
            epsilon,
            d_x,
            delta,
            grid_cap,
        } => {
            let resolution = match (delta, epsilon, d_x) {
                (Some(d), _, _) => Resolution::Step(d),
                (None, Some(eps), Some(dx)) => match grid_resolution(eps, dx, n) {
                    Ok(r) => r,
                    Err(e) => fail(e),
                },
                _ => fail(Error::InvalidParameter(
                    "give --delta, or both --epsilon and --d-x".into(),
                )),
            };
            let grid = match build_grid(n, &resolution, grid_cap) {
                Ok(g) => g,
                Err(e) => fail(e),
            };
            emit(&cli.output, &to_pretty(&GridRecord::from_grid(&grid)));
            eprintln!("grid: {} flats", grid.len());
        }
        Command::Plot2 {
            input,
            format,
            hull,
            traces,
        } => {
            let points = load_dataset(&input, format);
            if points[0].dim() != 2 {
                fail(Error::InvalidParameter(format!(
                    "plot2 needs 2x2 data, got n = {}",
                    points[0].dim()
                )));
            }
            let mut csv = String::from("kind,logdet,disk_x,disk_y\n");
            for p in &points {
                let (logdet, x, y) = disk_coordinates(p);
                csv.push_str(&format!("point,{logdet},{x},{y}\n"));
            }
            if let Some(hull_path) = hull {
                let text = match std::fs::read_to_string(&hull_path) {
                    Ok(t) => t,
                    Err(e) => fail_io(&format!("reading {}", hull_path.display()), e),
                };
                let record: HullRecord = match serde_json::from_str(&text) {
                    Ok(r) => r,
                    Err(e) => fail_io("parsing hull JSON", e),
                };
                let ball_hull = match record.to_hull() {
                    Ok(h) => h,
                    Err(e) => fail(e),
                };
                let level = points
                    .iter()
                    .map(|p| p.log_det())
                    .sum::<f64>()
                    / points.len() as f64;
                for (idx, ball) in ball_hull.balls.iter().enumerate() {
                    for (logdet, x, y) in
                        horosphere_trace(&ball_hull, &ball.ball, level, traces)
                    {
                        csv.push_str(&format!("horoball_{idx},{logdet},{x},{y}\n"));
                    }
                }
            }
            emit(&cli.output, &csv);
            eprintln!("plot2: {} points", points.len());
        }
        Command::Validate { input, format } => {
            let points = load_dataset(&input, format);
            let n = points[0].dim();
            let mut diameter = 0.0f64;
            for i in 0..points.len() {
                for j in i + 1..points.len() {
                    match metric_dist(&points[i], &points[j]) {
                        Ok(d) => diameter = diameter.max(d),
                        Err(e) => fail(e),
                    }
                }
            }
            let summary = serde_json::json!({
                "n": n,
                "points": points.len(),
                "diameter": diameter,
                "valid": true,
            });
            emit(&cli.output, &to_pretty(&summary));
            eprintln!("validate: {} points of dimension {n}", points.len());
        }
    }
}

/// Cylinder chart of PD(2): log-det along the axis, det-normalized part
/// mapped to the Poincare disk through the hyperboloid coordinates
/// u = (x+y)/2, v = (x-y)/2, w = offdiagonal, disk = (v, w)/(1+u).
fn disk_coordinates(p: &SpdPoint<f64>) -> (f64, f64, f64) {
    let logdet = p.log_det();
    let scale = (-logdet / 2.0).exp();
    let x = p.get(0, 0) * scale;
    let y = p.get(1, 1) * scale;
    let w = p.get(0, 1) * scale;
    let u = (x + y) / 2.0;
    let v = (x - y) / 2.0;
    (logdet, v / (1.0 + u), w / (1.0 + u))
}

/// Points of the horosphere `b = level` inside the slice `logdet = slice`,
/// traced by the rotation angle about the scalar axis.
fn horosphere_trace(
    hull: &pdgeo::hull::BallHull<f64>,
    ball: &pdgeo::horo::Horoball<f64>,
    slice: f64,
    samples: usize,
) -> Vec<(f64, f64, f64)> {
    let mut out = Vec::new();
    let half = hull.origin_shift.power(0.5);
    for k in 0..samples {
        let psi = std::f64::consts::PI * k as f64 / samples as f64;
        // p(rho) = e^{slice/2} * Q_psi diag(e^{rho/sqrt2}, e^{-rho/sqrt2}) Q_psi^T
        let eval = |rho: f64| -> Option<f64> {
            let q = pdgeo::grid::givens_rotation(2, 0, 1, psi);
            let e = (slice / 2.0_f64).exp();
            let d = [
                e * (rho / std::f64::consts::SQRT_2).exp(),
                e * (-rho / std::f64::consts::SQRT_2).exp(),
            ];
            let full = q.congruence_diag(&d);
            let (sym, _) = SymMatrix::from_square_symmetrized(&full).ok()?;
            let p = SpdPoint::new(sym).ok()?;
            ball.horofunction.busemann(&p).ok().map(|b| b - ball.level)
        };
        // Bracket a crossing of b = level along rho in [-5, 5].
        let mut lo = -5.0f64;
        let mut hi = 5.0f64;
        let (Some(mut flo), Some(fhi)) = (eval(lo), eval(hi)) else {
            continue;
        };
        if flo * fhi > 0.0 {
            continue;
        }
        for _ in 0..60 {
            let mid = (lo + hi) / 2.0;
            let Some(fmid) = eval(mid) else { break };
            if flo * fmid <= 0.0 {
                hi = mid;
            } else {
                lo = mid;
                flo = fmid;
            }
        }
        let rho = (lo + hi) / 2.0;
        let q = pdgeo::grid::givens_rotation(2, 0, 1, psi);
        let e = (slice / 2.0_f64).exp();
        let d = [
            e * (rho / std::f64::consts::SQRT_2).exp(),
            e * (-rho / std::f64::consts::SQRT_2).exp(),
        ];
        let full = q.congruence_diag(&d);
        if let Ok((sym, _)) = SymMatrix::from_square_symmetrized(&full) {
            if let Ok(p_slice) = SpdPoint::new(sym) {
                // Undo the hull's origin shift so the trace lives in the
                // input frame.
                let raw = half.mul(&p_slice.matrix().to_square()).mul(&half);
                if let Ok((raw_sym, _)) = SymMatrix::from_square_symmetrized(&raw) {
                    if let Ok(p_raw) = SpdPoint::new(raw_sym) {
                        out.push(disk_coordinates(&p_raw));
                    }
                }
            }
        }
    }
    out
}
