//! Local recovery of functions from scattered data with Sobolev-space
//! kernels.
//!
//! For every evaluation point `z` a small subset of nearby data sites is
//! chosen greedily so that each added site gives the largest decrease of the
//! squared Power Function P²(z), the sharp worst-case error factor of kernel
//! interpolation at `z`. The selection runs in the Newton basis, so picking
//! `k` of `n` offered sites costs O(k²n) and the recovery weights come from a
//! triangular solve.
//!
//! ```
//! use greedy_recovery::{greedy_select, lagrange_coefficients, recover, SobolevKernelSpec, StopRule};
//!
//! let spec = SobolevKernelSpec::new(3.0, 2, 1.0).unwrap();
//! let sites = [[0.1, 0.0], [-0.2, 0.1], [0.0, -0.3], [0.3, 0.3], [-0.1, -0.1], [0.2, -0.2], [0.5, 0.0]];
//! let values: Vec<f64> = sites.iter().map(|p| p[0] + 2.0 * p[1]).collect();
//!
//! let sel = greedy_select(&[0.0, 0.0], &sites, &spec, &StopRule::fixed(6).unwrap()).unwrap();
//! let weights = lagrange_coefficients(&sel).unwrap();
//! let f: Vec<f64> = sel.site_indices().iter().map(|&i| values[i]).collect();
//! let estimate = recover(&weights, &f).unwrap();
//! assert!(sel.p2() < 1e-2);
//! assert!(estimate.abs() < 0.1);
//! ```

pub mod cli;
pub mod error;
pub mod experiments;
pub mod geometry;
pub mod greedy;
pub mod kernel;
pub mod oracle;

pub use error::{Error, Result};
pub use geometry::{fill_distance, separation_distance, PointCloud};
pub use greedy::{
    greedy_select, lagrange_coefficients, lebesgue_constant, point_count, recover, PointCount, Selection, StopReason,
    StopRule,
};
pub use kernel::SobolevKernelSpec;
pub use oracle::{power_function_direct, DenseSystem};
