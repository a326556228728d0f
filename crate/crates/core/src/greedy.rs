//! Greedy per-point site selection by stepwise minimization of the squared
//! Power Function, carried out in the Newton basis.
//!
//! For an evaluation point z and candidates x_1..x_n the state after j − 1
//! selections consists of the residual kernel values K_j(z, x_k), the residual
//! diagonals K_j(x_k, x_k), and the Newton values N_i(x_k) of the selected
//! basis functions. The next site maximizes K_j(z, x_k)² / K_j(x_k, x_k),
//! which is exactly the one-step decrease of P²(z). Each step costs n kernel
//! evaluations and O(jn) arithmetic, so k steps cost O(k²n).

use std::fmt;
use std::str::FromStr;

use crate::error::{check_dim, check_finite, Error, Result};
use crate::kernel::SobolevKernelSpec;

/// Default floor for candidate scores and residual diagonals, relative to the
/// unit kernel peak.
pub const DEFAULT_PROGRESS_FLOOR: f64 = 1e-13;

/// Negative squared Power Function values down to this are treated as
/// rounding and clamped to zero.
pub const P2_NEGATIVE_TOLERANCE: f64 = 1e-12;

/// When to stop adding sites.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StopRule {
    pub k_max: usize,
    /// Stop once P² ≤ this value; 0 disables the test.
    pub p2_threshold: f64,
    /// Candidates with residual diagonal below this are dropped, and the
    /// selection ends when no remaining score reaches it.
    pub progress_floor: f64,
}

impl StopRule {
    pub fn new(k_max: usize, p2_threshold: f64, progress_floor: f64) -> Result<Self> {
        if k_max == 0 {
            return Err(Error::InvalidArgument("k_max must be >= 1".into()));
        }
        if !(p2_threshold >= 0.0 && p2_threshold.is_finite()) {
            return Err(Error::InvalidArgument(format!("p2_threshold must be >= 0, got {p2_threshold}")));
        }
        if !(progress_floor > 0.0 && progress_floor.is_finite()) {
            return Err(Error::InvalidArgument(format!("progress_floor must be > 0, got {progress_floor}")));
        }
        Ok(Self { k_max, p2_threshold, progress_floor })
    }

    /// Fixed point count, no threshold, default floor.
    pub fn fixed(k_max: usize) -> Result<Self> {
        Self::new(k_max, 0.0, DEFAULT_PROGRESS_FLOOR)
    }

    /// `Q` points for the kernel's smoothness, no threshold.
    pub fn for_kernel(spec: &SobolevKernelSpec) -> Result<Self> {
        Self::fixed(point_count(spec.m(), spec.d())?.count)
    }

    pub fn with_threshold(mut self, p2_threshold: f64) -> Result<Self> {
        self.p2_threshold = p2_threshold;
        Self::new(self.k_max, self.p2_threshold, self.progress_floor)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StopReason {
    KMax,
    Threshold,
    Exhausted,
    NoProgress,
    /// Only used for batch rows whose selection failed numerically.
    Degenerate,
}

impl StopReason {
    pub fn as_str(self) -> &'static str {
        match self {
            StopReason::KMax => "k_max",
            StopReason::Threshold => "threshold",
            StopReason::Exhausted => "exhausted",
            StopReason::NoProgress => "no_progress",
            StopReason::Degenerate => "degenerate",
        }
    }
}

impl fmt::Display for StopReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for StopReason {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "k_max" => StopReason::KMax,
            "threshold" => StopReason::Threshold,
            "exhausted" => StopReason::Exhausted,
            "no_progress" => StopReason::NoProgress,
            "degenerate" => StopReason::Degenerate,
            _ => return Err(Error::InvalidArgument(format!("unknown stop reason {s:?}"))),
        })
    }
}

/// Work counters of one selection run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OpCounts {
    pub kernel_evals: u64,
    /// Multiply-add operations in Newton column construction and updates.
    pub multiply_adds: u64,
}

/// Result of greedy selection at one evaluation point.
#[derive(Debug, Clone)]
pub struct Selection {
    site_indices: Vec<usize>,
    /// j×j row-major, entry (k, m) = N_m(x_k) for selected sites x_k.
    newton_on_sites: Vec<f64>,
    newton_at_z: Vec<f64>,
    p2_trace: Vec<f64>,
    stop_reason: StopReason,
    ops: OpCounts,
}

impl Selection {
    /// Indices into the candidate list, in selection order.
    pub fn site_indices(&self) -> &[usize] {
        &self.site_indices
    }

    pub fn len(&self) -> usize {
        self.site_indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.site_indices.is_empty()
    }

    /// N_m(x_k) with `k` the selection rank of the site and `m` the basis
    /// index, both zero-based. Entries with m > k are the computed values of
    /// basis functions at earlier sites, which vanish up to rounding.
    pub fn newton(&self, k: usize, m: usize) -> f64 {
        self.newton_on_sites[k * self.len() + m]
    }

    /// N_m(z) for m = 1..j.
    pub fn newton_at_z(&self) -> &[f64] {
        &self.newton_at_z
    }

    /// P² after 0, 1, …, j selected sites; the first entry is K(z, z).
    pub fn p2_trace(&self) -> &[f64] {
        &self.p2_trace
    }

    /// Final squared Power Function.
    pub fn p2(&self) -> f64 {
        *self.p2_trace.last().expect("trace starts with K(z,z)")
    }

    pub fn stop_reason(&self) -> StopReason {
        self.stop_reason
    }

    pub fn ops(&self) -> OpCounts {
        self.ops
    }

    /// The selection as it stood after its first `j` sites. Greedy choices
    /// do not depend on later steps, so this equals a run with `k_max = j`.
    pub fn prefix(&self, j: usize) -> Selection {
        let j = j.min(self.len());
        let n = self.len();
        let mut newton_on_sites = Vec::with_capacity(j * j);
        for k in 0..j {
            newton_on_sites.extend_from_slice(&self.newton_on_sites[k * n..k * n + j]);
        }
        Selection {
            site_indices: self.site_indices[..j].to_vec(),
            newton_on_sites,
            newton_at_z: self.newton_at_z[..j].to_vec(),
            p2_trace: self.p2_trace[..=j].to_vec(),
            stop_reason: if j < n { StopReason::KMax } else { self.stop_reason },
            ops: self.ops,
        }
    }
}

struct GreedyState {
    /// K_j(z, x_k)
    zvec: Vec<f64>,
    /// K_j(x_k, x_k)
    dvec: Vec<f64>,
    /// Newton columns: newton[i][k] = N_i(x_k)
    newton: Vec<Vec<f64>>,
    nz: Vec<f64>,
    p2: f64,
    selected: Vec<usize>,
    active: Vec<bool>,
}

impl GreedyState {
    /// Highest score zvec²/dvec among active candidates; ties keep the
    /// lowest index.
    fn best(&self) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        for (k, _) in self.active.iter().enumerate().filter(|(_, &a)| a) {
            let score = self.zvec[k] * self.zvec[k] / self.dvec[k];
            if best.is_none_or(|(_, s)| score > s) {
                best = Some((k, score));
            }
        }
        best
    }
}

/// Greedily selects sites from `candidates` to minimize P²(z).
pub fn greedy_select<P: AsRef<[f64]>>(
    z: &[f64],
    candidates: &[P],
    spec: &SobolevKernelSpec,
    stop: &StopRule,
) -> Result<Selection> {
    if candidates.is_empty() {
        return Err(Error::InvalidArgument("candidate list is empty".into()));
    }
    check_dim(spec.d(), z.len())?;
    check_finite(z, "evaluation point")?;
    for c in candidates {
        check_dim(spec.d(), c.as_ref().len())?;
        check_finite(c.as_ref(), "candidate")?;
    }
    StopRule::new(stop.k_max, stop.p2_threshold, stop.progress_floor)?;

    let n = candidates.len();
    let mut ops = OpCounts::default();
    let mut st = GreedyState {
        zvec: candidates.iter().map(|x| spec.eval_unchecked(z, x.as_ref())).collect(),
        dvec: candidates.iter().map(|x| spec.eval_unchecked(x.as_ref(), x.as_ref())).collect(),
        newton: Vec::new(),
        nz: Vec::new(),
        p2: spec.eval_unchecked(z, z),
        selected: Vec::new(),
        active: vec![true; n],
    };
    ops.kernel_evals += 2 * n as u64 + 1;
    for k in 0..n {
        if st.dvec[k] < stop.progress_floor {
            st.active[k] = false;
        }
    }
    let mut trace = vec![st.p2];

    let reason = loop {
        if st.selected.len() >= stop.k_max {
            break StopReason::KMax;
        }
        if stop.p2_threshold > 0.0 && st.p2 <= stop.p2_threshold {
            break StopReason::Threshold;
        }
        let Some((w, score)) = st.best() else {
            break StopReason::Exhausted;
        };
        if score < stop.progress_floor {
            break StopReason::NoProgress;
        }

        let diag = st.dvec[w].sqrt();
        let xw = candidates[w].as_ref();
        // N_j(x_k) N_j(x_w) = K(x_k, x_w) − Σ_{i<j} N_i(x_k) N_i(x_w)
        let mut col: Vec<f64> = candidates.iter().map(|x| spec.eval_unchecked(x.as_ref(), xw)).collect();
        ops.kernel_evals += n as u64;
        for prev in &st.newton {
            let at_w = prev[w];
            for (c, p) in col.iter_mut().zip(prev) {
                *c -= p * at_w;
            }
        }
        ops.multiply_adds += (st.newton.len() * n) as u64;
        for c in col.iter_mut() {
            *c /= diag;
        }
        col[w] = diag;

        // dividing by N_j(x_w) > 0 gives N_j(z) the sign of K_j(z, x_w)
        let nzj = st.zvec[w] / diag;
        for k in 0..n {
            st.zvec[k] -= nzj * col[k];
            st.dvec[k] -= col[k] * col[k];
        }
        ops.multiply_adds += 2 * n as u64;

        st.p2 -= nzj * nzj;
        if st.p2 < -P2_NEGATIVE_TOLERANCE {
            return Err(Error::Degenerate { index: st.selected.len(), value: st.p2 });
        }
        trace.push(st.p2.max(0.0));

        st.active[w] = false;
        st.selected.push(w);
        st.nz.push(nzj);
        st.newton.push(col);
        for k in 0..n {
            if st.active[k] && st.dvec[k] < stop.progress_floor {
                st.active[k] = false;
            }
        }
    };

    let j = st.selected.len();
    let mut newton_on_sites = vec![0.0; j * j];
    for (r, &site) in st.selected.iter().enumerate() {
        for (m, col) in st.newton.iter().enumerate() {
            newton_on_sites[r * j + m] = col[site];
        }
    }
    Ok(Selection {
        site_indices: st.selected,
        newton_on_sites,
        newton_at_z: st.nz,
        p2_trace: trace,
        stop_reason: reason,
        ops,
    })
}

/// Lagrange weights L(z) of the selected sites, solving
/// N_m(z) = Σ_k L_k N_m(x_k) for m = 1..j by back substitution.
pub fn lagrange_coefficients(sel: &Selection) -> Result<Vec<f64>> {
    let j = sel.len();
    if j == 0 {
        return Err(Error::InvalidArgument("selection holds no sites".into()));
    }
    let mut weights = vec![0.0; j];
    for m in (0..j).rev() {
        let diag = sel.newton(m, m);
        if !(diag > 0.0) {
            return Err(Error::Degenerate { index: m, value: diag });
        }
        // N_m vanishes on sites selected before x_m, so only k ≥ m contribute
        let tail: f64 = (m + 1..j).map(|k| weights[k] * sel.newton(k, m)).sum();
        weights[m] = (sel.newton_at_z()[m] - tail) / diag;
    }
    Ok(weights)
}

/// Σ |L_k|, the amplification bound of data perturbations at z.
pub fn lebesgue_constant(weights: &[f64]) -> f64 {
    weights.iter().map(|w| w.abs()).sum()
}

/// Σ L_k f(x_k).
pub fn recover(weights: &[f64], fvals: &[f64]) -> Result<f64> {
    if weights.len() != fvals.len() {
        return Err(Error::InvalidArgument(format!("{} weights but {} function values", weights.len(), fvals.len())));
    }
    Ok(weights.iter().zip(fvals).map(|(w, f)| w * f).sum())
}

/// Polynomial reproduction order and the matching point count for W₂ᵐ(ℝᵈ).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PointCount {
    /// q = ⌈m − d/2⌉
    pub order: u32,
    /// Q = C(q + d, d)
    pub count: usize,
}

impl PointCount {
    /// Nearest neighbors offered to the selection by default, 5·Q.
    pub fn default_offer(&self) -> usize {
        5 * self.count
    }
}

pub fn point_count(m: f64, d: usize) -> Result<PointCount> {
    let nu = m - d as f64 / 2.0;
    if d == 0 || !(nu > 0.0) || !nu.is_finite() {
        return Err(Error::InvalidArgument(format!("need m > d/2, got m = {m}, d = {d}")));
    }
    let order = nu.ceil() as u32;
    // C(q + d, d) built incrementally; every partial product is an integer
    let q = order as usize;
    let count = (1..=d).fold(1usize, |acc, i| acc * (q + i) / i);
    Ok(PointCount { order, count })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(m: f64) -> SobolevKernelSpec {
        SobolevKernelSpec::new(m, 2, 1.0).unwrap()
    }

    #[test]
    fn point_counts() {
        assert_eq!(point_count(3.0, 2).unwrap(), PointCount { order: 2, count: 6 });
        assert_eq!(point_count(1.5, 2).unwrap(), PointCount { order: 1, count: 3 });
        assert_eq!(point_count(6.0, 2).unwrap(), PointCount { order: 5, count: 21 });
        assert_eq!(point_count(3.0, 2).unwrap().default_offer(), 30);
        assert_eq!(point_count(2.0, 3).unwrap(), PointCount { order: 1, count: 4 });
        assert!(point_count(1.0, 2).is_err());
    }

    #[test]
    fn stop_rule_validation() {
        assert!(StopRule::new(0, 0.0, 1e-13).is_err());
        assert!(StopRule::new(3, -1.0, 1e-13).is_err());
        assert!(StopRule::new(3, 0.0, 0.0).is_err());
        assert_eq!(StopRule::for_kernel(&spec(3.0)).unwrap().k_max, 6);
    }

    #[test]
    fn selects_z_itself() {
        let z = [0.3, -0.2];
        let sel = greedy_select(&z, &[z], &spec(3.0), &StopRule::fixed(5).unwrap()).unwrap();
        assert_eq!(sel.site_indices(), &[0]);
        assert_eq!(sel.p2_trace(), &[1.0, 0.0]);
        assert_eq!(sel.stop_reason(), StopReason::Exhausted);
        assert_eq!(lagrange_coefficients(&sel).unwrap(), vec![1.0]);
    }

    #[test]
    fn single_candidate_at_unit_distance() {
        let sel = greedy_select(&[0.0, 0.0], &[[1.0, 0.0]], &spec(1.5), &StopRule::fixed(3).unwrap()).unwrap();
        let expected = 1.0 - (-2.0f64).exp();
        assert_eq!(sel.p2_trace().len(), 2);
        assert!((sel.p2() - expected).abs() < 1e-15);
        assert!((sel.p2() - 0.864_664_7).abs() < 1e-7);
        let l = lagrange_coefficients(&sel).unwrap();
        assert!((l[0] - (-1.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn z_on_a_site_wins_first_and_stops() {
        let cands = [[0.5, 0.5], [0.1, 0.2], [-0.4, 0.3]];
        let z = [0.1, 0.2];
        let sel = greedy_select(&z, &cands, &spec(3.0), &StopRule::fixed(3).unwrap()).unwrap();
        assert_eq!(sel.site_indices(), &[1]);
        assert_eq!(sel.p2(), 0.0);
        assert_eq!(sel.stop_reason(), StopReason::NoProgress);
        let with_thr = StopRule::fixed(3).unwrap().with_threshold(1e-10).unwrap();
        let sel = greedy_select(&z, &cands, &spec(3.0), &with_thr).unwrap();
        assert_eq!(sel.stop_reason(), StopReason::Threshold);
        let l = lagrange_coefficients(&sel).unwrap();
        assert_eq!(l, vec![1.0]);
    }

    #[test]
    fn k_max_respected() {
        let cands: Vec<[f64; 2]> = (0..10).map(|i| [i as f64 * 0.1, (i * i) as f64 * 0.01]).collect();
        let sel = greedy_select(&[0.25, 0.1], &cands, &spec(3.0), &StopRule::fixed(4).unwrap()).unwrap();
        assert_eq!(sel.len(), 4);
        assert_eq!(sel.stop_reason(), StopReason::KMax);
        assert_eq!(sel.p2_trace().len(), 5);
    }

    #[test]
    fn exact_duplicates_are_never_selected() {
        let cands = [[0.2, 0.0], [0.2, 0.0], [-0.3, 0.1], [-0.3, 0.1], [0.0, 0.4]];
        let sel = greedy_select(&[0.0, 0.0], &cands, &spec(3.0), &StopRule::fixed(5).unwrap()).unwrap();
        let idx = sel.site_indices();
        assert!(!(idx.contains(&0) && idx.contains(&1)));
        assert!(!(idx.contains(&2) && idx.contains(&3)));
        assert!(sel.len() <= 3);
        assert!(sel.p2_trace().iter().all(|v| v.is_finite()));
    }

    #[test]
    fn input_errors() {
        let s = spec(3.0);
        let rule = StopRule::fixed(2).unwrap();
        let empty: Vec<[f64; 2]> = vec![];
        assert!(greedy_select(&[0.0, 0.0], &empty, &s, &rule).is_err());
        assert!(matches!(
            greedy_select(&[0.0, 0.0], &[[0.0, 0.0, 0.0]], &s, &rule),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(greedy_select(&[0.0, f64::NAN], &[[0.0, 0.0]], &s, &rule), Err(Error::NonFinite(_))));
    }

    #[test]
    fn lebesgue_and_recover() {
        assert_eq!(lebesgue_constant(&[0.0, 1.0, 0.0]), 1.0);
        assert_eq!(lebesgue_constant(&[0.5, -0.5]), 1.0);
        assert_eq!(recover(&[0.0, 1.0, 0.0], &[3.0, -7.5, 2.0]).unwrap(), -7.5);
        assert!(recover(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn stop_reason_round_trip() {
        for r in [
            StopReason::KMax,
            StopReason::Threshold,
            StopReason::Exhausted,
            StopReason::NoProgress,
            StopReason::Degenerate,
        ] {
            assert_eq!(r.as_str().parse::<StopReason>().unwrap(), r);
        }
    }
}
