//! Drivers for single-point studies, grid upsampling, global-versus-local
//! comparison, convergence sweeps, and the double-precision fill limit.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{check_dim, Error, Result};
use crate::geometry::{fill_distance, PointCloud};
use crate::greedy::{
    greedy_select, lagrange_coefficients, lebesgue_constant, recover, Selection, StopReason, StopRule,
};
use crate::kernel::SobolevKernelSpec;
use crate::oracle::DenseSystem;

/// MATLAB's `peaks` surface at raw coordinates.
pub fn peaks(x: f64, y: f64) -> f64 {
    3.0 * (1.0 - x).powi(2) * (-x * x - (y + 1.0).powi(2)).exp()
        - 10.0 * (x / 5.0 - x.powi(3) - y.powi(5)) * (-x * x - y * y).exp()
        - (-(x + 1.0).powi(2) - y * y).exp() / 3.0
}

/// `n` points drawn uniformly from [−1, 1]ᵈ with a seeded generator.
///
/// The stream is prefix-stable: the first `k` points of `random_cloud(n, ..)`
/// equal `random_cloud(k, ..)` for the same seed.
pub fn random_cloud(n: usize, d: usize, seed: u64) -> Result<PointCloud> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coords = (0..n * d).map(|_| rng.gen_range(-1.0..=1.0)).collect();
    PointCloud::from_flat(d, coords)
}

/// Per-evaluation-point recovery result.
#[derive(Debug, Clone, PartialEq)]
pub struct RecoveryRow {
    pub z: Vec<f64>,
    pub value: f64,
    pub p2: f64,
    pub lebesgue: f64,
    pub npoints: usize,
    pub stop_reason: StopReason,
}

impl RecoveryRow {
    fn degenerate(z: &[f64]) -> Self {
        Self {
            z: z.to_vec(),
            value: f64::NAN,
            p2: f64::NAN,
            lebesgue: f64::NAN,
            npoints: 0,
            stop_reason: StopReason::Degenerate,
        }
    }
}

/// Greedy trace at one point plus the Lebesgue constant after every step.
#[derive(Debug, Clone)]
pub struct SinglePointStudy {
    pub selection: Selection,
    /// `lebesgue[j]` belongs to the first j + 1 selected sites.
    pub lebesgue: Vec<f64>,
    /// Coordinates of the selected sites in selection order.
    pub sites: Vec<Vec<f64>>,
}

/// Runs the greedy selection at `z` over the whole cloud and records the
/// Lebesgue constants of every prefix of the selection.
pub fn single_point_study(
    z: &[f64],
    cloud: &PointCloud,
    spec: &SobolevKernelSpec,
    stop: &StopRule,
) -> Result<SinglePointStudy> {
    let candidates: Vec<&[f64]> = cloud.iter().collect();
    let selection = greedy_select(z, &candidates, spec, stop)?;
    let lebesgue = (1..=selection.len())
        .map(|j| lagrange_coefficients(&selection.prefix(j)).map(|l| lebesgue_constant(&l)))
        .collect::<Result<Vec<_>>>()?;
    let sites = selection.site_indices().iter().map(|&i| cloud.point(i).to_vec()).collect();
    Ok(SinglePointStudy { selection, lebesgue, sites })
}

fn check_offer(cloud: &PointCloud, offer: usize) -> Result<()> {
    if offer == 0 || offer > cloud.len() {
        return Err(Error::InvalidArgument(format!("offer {offer} outside 1..={} data sites", cloud.len())));
    }
    Ok(())
}

/// Local recovery at one point from its `offer` nearest sites.
fn recover_at(
    cloud: &PointCloud,
    values: &[f64],
    z: &[f64],
    spec: &SobolevKernelSpec,
    stop: &StopRule,
    offer: usize,
) -> Result<RecoveryRow> {
    let near = cloud.knn(z, offer)?;
    let candidates: Vec<&[f64]> = near.iter().map(|&(i, _)| cloud.point(i)).collect();
    let sel = match greedy_select(z, &candidates, spec, stop) {
        Ok(sel) => sel,
        Err(Error::Degenerate { .. }) => return Ok(RecoveryRow::degenerate(z)),
        Err(e) => return Err(e),
    };
    let weights = match lagrange_coefficients(&sel) {
        Ok(w) => w,
        Err(Error::Degenerate { .. }) => return Ok(RecoveryRow::degenerate(z)),
        Err(e) => return Err(e),
    };
    let f: Vec<f64> = sel.site_indices().iter().map(|&k| values[near[k].0]).collect();
    Ok(RecoveryRow {
        z: z.to_vec(),
        value: recover(&weights, &f)?,
        p2: sel.p2(),
        lebesgue: lebesgue_constant(&weights),
        npoints: sel.len(),
        stop_reason: sel.stop_reason(),
    })
}

/// Local greedy recovery at every evaluation point. Rows come back in the
/// order of `eval_points`; numerically failed rows carry
/// [`StopReason::Degenerate`] and NaN fields instead of aborting the batch.
pub fn upsample<P: AsRef<[f64]> + Sync>(
    cloud: &PointCloud,
    values: &[f64],
    eval_points: &[P],
    spec: &SobolevKernelSpec,
    stop: &StopRule,
    offer: usize,
) -> Result<Vec<RecoveryRow>> {
    if values.len() != cloud.len() {
        return Err(Error::InvalidArgument(format!("{} values for {} data sites", values.len(), cloud.len())));
    }
    check_dim(spec.d(), cloud.dim())?;
    check_offer(cloud, offer)?;
    eval_points.par_iter().map(|z| recover_at(cloud, values, z.as_ref(), spec, stop, offer)).collect()
}

#[derive(Debug, Clone)]
pub struct ComparisonRow {
    pub local: RecoveryRow,
    /// P² of interpolation on the whole cloud; `None` when unavailable.
    pub p2_global: Option<f64>,
    pub value_global: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct Comparison {
    pub rows: Vec<ComparisonRow>,
    /// False when the full Gram matrix could not be factored.
    pub global_available: bool,
}

/// Local recovery next to global interpolation on the full cloud.
pub fn compare_global_local<P: AsRef<[f64]> + Sync>(
    cloud: &PointCloud,
    values: &[f64],
    eval_points: &[P],
    spec: &SobolevKernelSpec,
    stop: &StopRule,
    offer: usize,
) -> Result<Comparison> {
    let local = upsample(cloud, values, eval_points, spec, stop, offer)?;
    let sites: Vec<&[f64]> = cloud.iter().collect();
    let global = match DenseSystem::new(&sites, spec) {
        Ok(sys) => Some(sys),
        Err(Error::Degenerate { .. }) => None,
        Err(e) => return Err(e),
    };
    let coef = global.as_ref().map(|g| g.solve(values)).transpose()?;
    let rows = local
        .into_par_iter()
        .map(|row| {
            let (p2_global, value_global) = match (&global, &coef) {
                (Some(sys), Some(coef)) => {
                    let p2 = sys.power_function(&row.z).ok();
                    let b: Vec<f64> = sites.iter().map(|x| spec.eval_unchecked(&row.z, x)).collect();
                    let v = coef.iter().zip(&b).map(|(c, k)| c * k).sum();
                    (p2, Some(v))
                }
                _ => (None, None),
            };
            ComparisonRow { local: row, p2_global, value_global }
        })
        .collect();
    Ok(Comparison { rows, global_available: global.is_some() })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergencePoint {
    pub n: usize,
    /// Fill distance measured on the evaluation grid.
    pub h: f64,
    /// Largest Power Function value (not squared) over the grid.
    pub max_p: f64,
}

#[derive(Debug, Clone)]
pub struct ConvergenceStudy {
    pub points: Vec<ConvergencePoint>,
    /// Least-squares slope of ln max_p against ln h; `None` below two sizes.
    pub slope: Option<f64>,
}

/// Max Power Function over `grid` for nested random clouds of the sizes in
/// `ns`, all prefixes of one seeded sequence in [−1, 1]ᵈ.
pub fn convergence_study<P: AsRef<[f64]> + Sync>(
    spec: &SobolevKernelSpec,
    ns: &[usize],
    grid: &[P],
    seed: u64,
    stop: &StopRule,
    offer: usize,
) -> Result<ConvergenceStudy> {
    if ns.is_empty() {
        return Err(Error::InvalidArgument("no data-set sizes given".into()));
    }
    if ns.windows(2).any(|w| w[0] >= w[1]) || ns[0] == 0 {
        return Err(Error::InvalidArgument("data-set sizes must be positive and strictly increasing".into()));
    }
    if grid.is_empty() {
        return Err(Error::InvalidArgument("evaluation grid is empty".into()));
    }
    let full = random_cloud(*ns.last().unwrap(), spec.d(), seed)?;
    let mut points = Vec::with_capacity(ns.len());
    for &n in ns {
        let cloud = full.prefix(n)?;
        let h = fill_distance(&cloud, grid)?;
        let zeros = vec![0.0; n];
        let rows = upsample(&cloud, &zeros, grid, spec, stop, offer.min(n))?;
        let max_p2 = rows.iter().map(|r| r.p2).fold(0.0f64, f64::max);
        points.push(ConvergencePoint { n, h, max_p: max_p2.sqrt() });
    }
    let slope = loglog_slope(&points);
    Ok(ConvergenceStudy { points, slope })
}

/// Ordinary least-squares slope of ln max_p over ln h.
pub fn loglog_slope(points: &[ConvergencePoint]) -> Option<f64> {
    let pts: Vec<(f64, f64)> =
        points.iter().filter(|p| p.h > 0.0 && p.max_p > 0.0).map(|p| (p.h.ln(), p.max_p.ln())).collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Fill distance below which P² ~ h^(2m−d) drops under double precision:
/// 10^(−15 / (2m − d)).
pub fn stability_fill_limit(m: f64, d: usize) -> Result<f64> {
    let exponent = 2.0 * m - d as f64;
    if !(exponent > 0.0) {
        return Err(Error::InvalidArgument(format!("need 2m > d, got m = {m}, d = {d}")));
    }
    Ok(fill_limit_for_exponent(exponent))
}

/// 10^(−15 / e) for a decay exponent e = 2m − d.
pub fn fill_limit_for_exponent(exponent: f64) -> f64 {
    10f64.powf(-15.0 / exponent)
}

/// True when `z` lies within `width` of the boundary of the box [lo, hi]ᵈ.
pub fn in_boundary_band(z: &[f64], lo: f64, hi: f64, width: f64) -> bool {
    z.iter().any(|&c| c - lo < width || hi - c < width)
}
