//! Command-line front end. Every command writes one CSV table (header row,
//! comma separated, LF line endings, floats with 17 significant digits) and
//! prints a one-line summary.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::{Error, Result};
use crate::experiments::{
    compare_global_local, convergence_study, fill_limit_for_exponent, peaks, random_cloud, single_point_study,
    stability_fill_limit, upsample, RecoveryRow,
};
use crate::geometry::{grid_2d, read_point_file, PointCloud};
use crate::greedy::{point_count, StopRule, DEFAULT_PROGRESS_FLOOR};
use crate::kernel::SobolevKernelSpec;

#[derive(Debug, Clone, Parser)]
#[command(name = "greedy-recovery", version, about = "Local greedy kernel recovery of scattered data")]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Greedy selection trace at a single evaluation point
    Select(SelectArgs),
    /// Local recovery on a grid or an explicit evaluation set
    Upsample(BatchArgs),
    /// Local recovery next to global interpolation on all sites
    Compare(BatchArgs),
    /// Max Power Function against fill distance for nested random sets
    Converge(ConvergeArgs),
    /// Double-precision fill-distance limit 10^(-15/(2m-d))
    Stability(StabilityArgs),
}

#[derive(Debug, Clone, Args)]
pub struct KernelArgs {
    /// Sobolev smoothness order m (> d/2)
    #[arg(long, default_value_t = 3.0)]
    pub m: f64,
    /// Space dimension
    #[arg(long, default_value_t = 2)]
    pub d: usize,
    /// Kernel scale c
    #[arg(long, default_value_t = 1.0)]
    pub scale: f64,
    /// Maximal number of selected sites [default: Q]
    #[arg(long)]
    pub kmax: Option<usize>,
    /// Stop once P² falls to this value (0 disables)
    #[arg(long = "p2-threshold", default_value_t = 0.0)]
    pub p2_threshold: f64,
    /// Minimal admissible candidate score and residual diagonal
    #[arg(long = "progress-floor", default_value_t = DEFAULT_PROGRESS_FLOOR)]
    pub progress_floor: f64,
    /// Output CSV file [default: standard output]
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads [default: hardware parallelism]
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Args)]
#[group(required = false, multiple = false)]
pub struct DataSource {
    /// Data-site file (d coordinates, optional value column)
    #[arg(long, value_name = "FILE")]
    pub data: Option<PathBuf>,
    /// Number of uniform random sites in [-1,1]^d
    #[arg(long, value_name = "N")]
    pub random: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TargetFunction {
    Peaks,
    Column,
}

#[derive(Debug, Clone, Args)]
#[group(required = false, multiple = false)]
pub struct EvalSource {
    /// Regular grid: NX NY XMIN XMAX YMIN YMAX
    #[arg(long, num_args = 6, value_names = ["NX", "NY", "XMIN", "XMAX", "YMIN", "YMAX"], allow_negative_numbers = true)]
    pub grid: Option<Vec<f64>>,
    /// Evaluation-point file
    #[arg(long, value_name = "FILE")]
    pub eval: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SelectArgs {
    #[command(flatten)]
    pub kernel: KernelArgs,
    #[command(flatten)]
    pub source: DataSource,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Evaluation point coordinates [default: origin]
    #[arg(long, num_args = 1.., allow_negative_numbers = true)]
    pub z: Option<Vec<f64>>,
    /// Nearest sites offered to the selection [default: all sites]
    #[arg(long)]
    pub offer: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct BatchArgs {
    #[command(flatten)]
    pub kernel: KernelArgs,
    #[command(flatten)]
    pub source: DataSource,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[command(flatten)]
    pub eval: EvalSource,
    /// Data values: peaks of the site coordinates, or the file's value column
    #[arg(long, value_enum, default_value_t = TargetFunction::Peaks)]
    pub function: TargetFunction,
    /// Nearest sites offered per evaluation point [default: 5·Q]
    #[arg(long)]
    pub offer: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct ConvergeArgs {
    #[command(flatten)]
    pub kernel: KernelArgs,
    /// Nested data-set sizes, strictly increasing
    #[arg(long, value_delimiter = ',', default_values_t = [100usize, 400, 1600, 6400])]
    pub ns: Vec<usize>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Evaluation grid: NX NY XMIN XMAX YMIN YMAX [default: 21 21 -1 1 -1 1]
    #[arg(long, num_args = 6, value_names = ["NX", "NY", "XMIN", "XMAX", "YMIN", "YMAX"], allow_negative_numbers = true)]
    pub grid: Option<Vec<f64>>,
    /// Nearest sites offered per evaluation point [default: 5·Q]
    #[arg(long)]
    pub offer: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct StabilityArgs {
    #[arg(long, default_value_t = 3.0)]
    pub m: f64,
    #[arg(long, default_value_t = 2)]
    pub d: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// What a run reports on its summary line.
#[derive(Debug, Clone, Default)]
pub struct Summary {
    pub command: &'static str,
    pub rows: usize,
    pub max_p2: Option<f64>,
    pub final_p2: Option<f64>,
    pub max_p2_global: Option<f64>,
    pub max_lebesgue: Option<f64>,
    pub slope: Option<f64>,
    pub h_bar: Option<f64>,
    pub degenerate_rows: usize,
    pub wall_seconds: f64,
}

impl Summary {
    pub fn line(&self) -> String {
        let mut parts = vec![format!("{}: rows={}", self.command, self.rows)];
        let mut push = |name: &str, v: Option<f64>| {
            if let Some(v) = v {
                parts.push(format!("{name}={v:.6e}"));
            }
        };
        push("max_p2", self.max_p2);
        push("final_p2", self.final_p2);
        push("max_p2_global", self.max_p2_global);
        push("max_lebesgue", self.max_lebesgue);
        push("slope", self.slope);
        push("h_bar", self.h_bar);
        if self.degenerate_rows > 0 {
            parts.push(format!("degenerate_rows={}", self.degenerate_rows));
        }
        parts.push(format!("wall_time={:.3}s", self.wall_seconds));
        parts.join(" ")
    }
}

/// Output of a run before anything is written.
struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    fn write_to<W: Write>(&self, out: &mut W) -> io::Result<()> {
        writeln!(out, "{}", self.header.join(","))?;
        for r in &self.rows {
            writeln!(out, "{}", r.join(","))?;
        }
        out.flush()
    }
}

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn opt_num(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

fn coord_names(d: usize) -> Vec<String> {
    if d == 2 {
        vec!["x".into(), "y".into()]
    } else {
        (1..=d).map(|i| format!("x{i}")).collect()
    }
}

fn nan_max(it: impl Iterator<Item = f64>) -> Option<f64> {
    it.filter(|v| !v.is_nan()).fold(None, |acc, v| Some(acc.map_or(v, |a: f64| a.max(v))))
}

fn spec_of(k: &KernelArgs) -> Result<SobolevKernelSpec> {
    SobolevKernelSpec::new(k.m, k.d, k.scale).map_err(|e| Error::InvalidArgument(format!("--m/--d/--scale: {e}")))
}

fn stop_of(k: &KernelArgs, default_kmax: usize) -> Result<StopRule> {
    StopRule::new(k.kmax.unwrap_or(default_kmax), k.p2_threshold, k.progress_floor)
        .map_err(|e| Error::InvalidArgument(format!("--kmax/--p2-threshold/--progress-floor: {e}")))
}

fn parse_grid(g: &[f64]) -> Result<Vec<[f64; 2]>> {
    let count = |v: f64, name: &str| -> Result<usize> {
        if v >= 1.0 && v.fract() == 0.0 && v <= 1e7 {
            Ok(v as usize)
        } else {
            Err(Error::InvalidArgument(format!("--grid {name} must be a positive integer, got {v}")))
        }
    };
    grid_2d(count(g[0], "NX")?, count(g[1], "NY")?, (g[2], g[3]), (g[4], g[5]))
}

fn load_sites(src: &DataSource, d: usize, seed: u64) -> Result<(PointCloud, Option<Vec<f64>>)> {
    match (&src.data, src.random) {
        (Some(path), None) => {
            let data = read_point_file(path, d)?;
            Ok((data.cloud, data.values))
        }
        (None, Some(n)) => {
            if n == 0 {
                return Err(Error::InvalidArgument("--random must be >= 1".into()));
            }
            Ok((random_cloud(n, d, seed)?, None))
        }
        _ => Err(Error::InvalidArgument("exactly one of --data FILE or --random N is required".into())),
    }
}

fn site_values(cloud: &PointCloud, file_values: Option<Vec<f64>>, f: TargetFunction) -> Result<Vec<f64>> {
    match f {
        TargetFunction::Peaks => {
            if cloud.dim() != 2 {
                return Err(Error::InvalidArgument("--function peaks needs --d 2".into()));
            }
            Ok(cloud.iter().map(|p| peaks(p[0], p[1])).collect())
        }
        TargetFunction::Column => file_values
            .ok_or_else(|| Error::InvalidArgument("--function column needs a --data file with a value column".into())),
    }
}

fn eval_points(src: &EvalSource, d: usize) -> Result<Vec<Vec<f64>>> {
    match (&src.grid, &src.eval) {
        (Some(_), Some(_)) => Err(Error::InvalidArgument("--grid and --eval are mutually exclusive".into())),
        (None, Some(path)) => Ok(read_point_file(path, d)?.cloud.iter().map(<[f64]>::to_vec).collect()),
        (grid, None) => {
            if d != 2 {
                return Err(Error::InvalidArgument("--grid needs --d 2; use --eval for other dimensions".into()));
            }
            let g = match grid {
                Some(g) => parse_grid(g)?,
                None => grid_2d(51, 51, (-1.0, 1.0), (-1.0, 1.0))?,
            };
            Ok(g.iter().map(|p| p.to_vec()).collect())
        }
    }
}

fn run_select(a: &SelectArgs, summary: &mut Summary) -> Result<Table> {
    let spec = spec_of(&a.kernel)?;
    let (cloud, _) = load_sites(&a.source, spec.d(), a.seed)?;
    let z = a.z.clone().unwrap_or_else(|| vec![0.0; spec.d()]);
    if z.len() != spec.d() {
        return Err(Error::InvalidArgument(format!("--z needs {} coordinates, got {}", spec.d(), z.len())));
    }
    let offer = a.offer.unwrap_or(cloud.len());
    if offer == 0 || offer > cloud.len() {
        return Err(Error::InvalidArgument(format!("--offer must be in 1..={}", cloud.len())));
    }
    let near = cloud.knn(&z, offer)?;
    let offered = PointCloud::from_points(&near.iter().map(|&(i, _)| cloud.point(i)).collect::<Vec<_>>())?;
    let stop = stop_of(&a.kernel, offer)?;
    let study = single_point_study(&z, &offered, &spec, &stop)?;
    let reason = study.selection.stop_reason().as_str().to_string();

    let mut header: Vec<String> = ["step", "p2", "lebesgue"].iter().map(|s| s.to_string()).collect();
    header.extend(coord_names(spec.d()).into_iter().map(|c| format!("site_{c}")));
    header.push("stop_reason".into());
    let trace = study.selection.p2_trace();
    let mut rows = Vec::with_capacity(trace.len());
    for (step, p2) in trace.iter().enumerate() {
        let mut row = vec![step.to_string(), num(*p2)];
        if step == 0 {
            row.push(String::new());
            row.extend(std::iter::repeat_n(String::new(), spec.d()));
        } else {
            row.push(num(study.lebesgue[step - 1]));
            row.extend(study.sites[step - 1].iter().map(|v| num(*v)));
        }
        row.push(reason.clone());
        rows.push(row);
    }
    summary.rows = rows.len();
    summary.max_p2 = Some(trace[0]);
    summary.final_p2 = trace.last().copied();
    summary.max_lebesgue = nan_max(study.lebesgue.iter().copied());
    Ok(Table { header, rows })
}

fn run_batch(a: &BatchArgs, compare: bool, summary: &mut Summary) -> Result<Table> {
    let spec = spec_of(&a.kernel)?;
    let (cloud, file_values) = load_sites(&a.source, spec.d(), a.seed)?;
    let values = site_values(&cloud, file_values, a.function)?;
    let evals = eval_points(&a.eval, spec.d())?;
    let pc = point_count(spec.m(), spec.d())?;
    let offer = a.offer.unwrap_or(pc.default_offer()).min(cloud.len());
    if a.offer == Some(0) || a.offer.is_some_and(|o| o > cloud.len()) {
        return Err(Error::InvalidArgument(format!("--offer must be in 1..={}", cloud.len())));
    }
    let stop = stop_of(&a.kernel, pc.count)?;

    let mut header = coord_names(spec.d());
    header.extend(["value", "p2"].iter().map(|s| s.to_string()));
    if compare {
        header.push("p2_global".into());
    }
    header.extend(["lebesgue", "npoints", "stop_reason"].iter().map(|s| s.to_string()));

    let row_fields = |r: &RecoveryRow, global: Option<Option<f64>>| -> Vec<String> {
        let mut f: Vec<String> = r.z.iter().map(|v| num(*v)).collect();
        f.push(num(r.value));
        f.push(num(r.p2));
        if let Some(g) = global {
            f.push(opt_num(g));
        }
        f.push(num(r.lebesgue));
        f.push(r.npoints.to_string());
        f.push(r.stop_reason.as_str().to_string());
        f
    };

    let (rows, locals): (Vec<Vec<String>>, Vec<&RecoveryRow>);
    let cmp;
    let local_rows;
    if compare {
        cmp = compare_global_local(&cloud, &values, &evals, &spec, &stop, offer)?;
        rows = cmp.rows.iter().map(|r| row_fields(&r.local, Some(r.p2_global))).collect();
        locals = cmp.rows.iter().map(|r| &r.local).collect();
        summary.max_p2_global = nan_max(cmp.rows.iter().filter_map(|r| r.p2_global));
    } else {
        local_rows = upsample(&cloud, &values, &evals, &spec, &stop, offer)?;
        rows = local_rows.iter().map(|r| row_fields(r, None)).collect();
        locals = local_rows.iter().collect();
    }
    summary.rows = rows.len();
    summary.max_p2 = nan_max(locals.iter().map(|r| r.p2));
    summary.max_lebesgue = nan_max(locals.iter().map(|r| r.lebesgue));
    summary.degenerate_rows = locals.iter().filter(|r| r.npoints == 0).count();
    Ok(Table { header, rows })
}

fn run_converge(a: &ConvergeArgs, summary: &mut Summary) -> Result<Table> {
    let spec = spec_of(&a.kernel)?;
    if spec.d() != 2 {
        return Err(Error::InvalidArgument("converge runs on a planar grid; needs --d 2".into()));
    }
    let pc = point_count(spec.m(), spec.d())?;
    let offer = a.offer.unwrap_or(pc.default_offer());
    if offer == 0 {
        return Err(Error::InvalidArgument("--offer must be >= 1".into()));
    }
    let stop = stop_of(&a.kernel, pc.count)?;
    let grid = match &a.grid {
        Some(g) => parse_grid(g)?,
        None => grid_2d(21, 21, (-1.0, 1.0), (-1.0, 1.0))?,
    };
    let study = convergence_study(&spec, &a.ns, &grid, a.seed, &stop, offer)
        .map_err(|e| Error::InvalidArgument(format!("--ns: {e}")))?;
    let header = ["N", "h", "maxP"].iter().map(|s| s.to_string()).collect();
    let rows = study.points.iter().map(|p| vec![p.n.to_string(), num(p.h), num(p.max_p)]).collect::<Vec<_>>();
    summary.rows = rows.len();
    summary.max_p2 = nan_max(study.points.iter().map(|p| p.max_p * p.max_p));
    summary.slope = study.slope;
    Ok(Table { header, rows })
}

fn run_stability(a: &StabilityArgs, summary: &mut Summary) -> Result<Table> {
    let h = stability_fill_limit(a.m, a.d).map_err(|e| Error::InvalidArgument(format!("--m/--d: {e}")))?;
    let exponent = 2.0 * a.m - a.d as f64;
    debug_assert_eq!(h, fill_limit_for_exponent(exponent));
    summary.rows = 1;
    summary.h_bar = Some(h);
    Ok(Table {
        header: ["m", "d", "exponent", "h_bar"].iter().map(|s| s.to_string()).collect(),
        rows: vec![vec![num(a.m), a.d.to_string(), num(exponent), num(h)]],
    })
}

fn out_path(cfg: &RunConfig) -> Option<&PathBuf> {
    match &cfg.command {
        Command::Select(a) => a.kernel.out.as_ref(),
        Command::Upsample(a) | Command::Compare(a) => a.kernel.out.as_ref(),
        Command::Converge(a) => a.kernel.out.as_ref(),
        Command::Stability(a) => a.out.as_ref(),
    }
}

fn threads(cfg: &RunConfig) -> Option<usize> {
    match &cfg.command {
        Command::Select(a) => a.kernel.threads,
        Command::Upsample(a) | Command::Compare(a) => a.kernel.threads,
        Command::Converge(a) => a.kernel.threads,
        Command::Stability(_) => None,
    }
}

/// Runs one command and writes its CSV. Returns the summary; the caller
/// decides where to print it.
pub fn run(cfg: &RunConfig) -> Result<Summary> {
    let start = Instant::now();
    let mut summary = Summary::default();
    let compute = |summary: &mut Summary| -> Result<Table> {
        match &cfg.command {
            Command::Select(a) => {
                summary.command = "select";
                run_select(a, summary)
            }
            Command::Upsample(a) => {
                summary.command = "upsample";
                run_batch(a, false, summary)
            }
            Command::Compare(a) => {
                summary.command = "compare";
                run_batch(a, true, summary)
            }
            Command::Converge(a) => {
                summary.command = "converge";
                run_converge(a, summary)
            }
            Command::Stability(a) => {
                summary.command = "stability";
                run_stability(a, summary)
            }
        }
    };
    let table = match threads(cfg) {
        Some(0) => return Err(Error::InvalidArgument("--threads must be >= 1".into())),
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| Error::InvalidArgument(format!("--threads: {e}")))?
            .install(|| compute(&mut summary))?,
        None => compute(&mut summary)?,
    };

    match out_path(cfg) {
        Some(path) => {
            let io_err = |source| Error::Io { path: path.display().to_string(), source };
            let file = File::create(path).map_err(io_err)?;
            table.write_to(&mut BufWriter::new(file)).map_err(io_err)?;
        }
        None => {
            table.write_to(&mut io::stdout().lock()).map_err(|source| Error::Io { path: "<stdout>".into(), source })?
        }
    }
    summary.wall_seconds = start.elapsed().as_secs_f64();
    Ok(summary)
}

/// Whether the CSV went to standard output, in which case the summary line
/// belongs on standard error.
pub fn csv_on_stdout(cfg: &RunConfig) -> bool {
    out_path(cfg).is_none()
}
