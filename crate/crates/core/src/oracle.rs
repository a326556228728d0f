//! Dense kernel interpolation on a full site set: Gram matrix, unpivoted
//! Cholesky factor, interpolant, direct Power Function, and a condition
//! estimate. Serves as the reference for the greedy path and as the global
//! method in comparisons.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{check_dim, check_finite, Error, Result};
use crate::greedy::P2_NEGATIVE_TOLERANCE;
use crate::kernel::SobolevKernelSpec;

const POWER_ITERATIONS: usize = 500;

/// Kernel system on a fixed site set with its Cholesky factor.
#[derive(Debug, Clone)]
pub struct DenseSystem {
    spec: SobolevKernelSpec,
    sites: Vec<f64>,
    n: usize,
    gram: Vec<f64>,
    /// lower-triangular, row-major
    factor: Vec<f64>,
}

impl DenseSystem {
    /// Assembles and factors the Gram matrix. A nonpositive pivot fails with
    /// [`Error::Degenerate`] carrying the pivot index; no jitter is added.
    pub fn new<P: AsRef<[f64]>>(sites: &[P], spec: &SobolevKernelSpec) -> Result<Self> {
        if sites.is_empty() {
            return Err(Error::InvalidArgument("dense system needs at least one site".into()));
        }
        let d = spec.d();
        let mut flat = Vec::with_capacity(sites.len() * d);
        for s in sites {
            check_dim(d, s.as_ref().len())?;
            check_finite(s.as_ref(), "site")?;
            flat.extend_from_slice(s.as_ref());
        }
        let n = sites.len();
        let mut gram = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let v = spec.eval_unchecked(&flat[i * d..(i + 1) * d], &flat[j * d..(j + 1) * d]);
                gram[i * n + j] = v;
                gram[j * n + i] = v;
            }
        }
        let factor = cholesky(&gram, n)?;
        Ok(Self { spec: *spec, sites: flat, n, gram, factor })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn gram(&self) -> &[f64] {
        &self.gram
    }

    fn site(&self, i: usize) -> &[f64] {
        let d = self.spec.d();
        &self.sites[i * d..(i + 1) * d]
    }

    fn kernel_column(&self, z: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.spec.d(), z.len())?;
        check_finite(z, "evaluation point")?;
        Ok((0..self.n).map(|j| self.spec.eval_unchecked(z, self.site(j))).collect())
    }

    fn forward(&self, rhs: &mut [f64]) {
        let n = self.n;
        for i in 0..n {
            let row = &self.factor[i * n..i * n + i];
            let s: f64 = row.iter().zip(&rhs[..i]).map(|(l, y)| l * y).sum();
            rhs[i] = (rhs[i] - s) / self.factor[i * n + i];
        }
    }

    fn backward(&self, rhs: &mut [f64]) {
        let n = self.n;
        for i in (0..n).rev() {
            let s: f64 = (i + 1..n).map(|k| self.factor[k * n + i] * rhs[k]).sum();
            rhs[i] = (rhs[i] - s) / self.factor[i * n + i];
        }
    }

    /// Solves Gram · u = rhs.
    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        if rhs.len() != self.n {
            return Err(Error::InvalidArgument(format!(
                "right-hand side has length {}, system has {} sites",
                rhs.len(),
                self.n
            )));
        }
        let mut u = rhs.to_vec();
        self.forward(&mut u);
        self.backward(&mut u);
        Ok(u)
    }

    /// Optimal recovery weights u(z) = Gram⁻¹ (K(z, x_j))_j.
    pub fn weights(&self, z: &[f64]) -> Result<Vec<f64>> {
        self.solve(&self.kernel_column(z)?)
    }

    /// Kernel interpolant of `fvals` on all sites, evaluated at `z`.
    pub fn interpolate(&self, fvals: &[f64], z: &[f64]) -> Result<f64> {
        let coef = self.solve(fvals)?;
        let b = self.kernel_column(z)?;
        Ok(coef.iter().zip(&b).map(|(c, k)| c * k).sum())
    }

    /// Squared Power Function at `z` for the full site set, evaluated as
    /// K(z,z) − bᵀ Gram⁻¹ b through the Cholesky factor.
    pub fn power_function(&self, z: &[f64]) -> Result<f64> {
        let mut w = self.kernel_column(z)?;
        self.forward(&mut w);
        let p2 = self.spec.eval_unchecked(z, z) - w.iter().map(|v| v * v).sum::<f64>();
        clamp_p2(p2)
    }

    /// 2-norm condition estimate λ_max / λ_min from power iteration on the
    /// Gram matrix and on its inverse through the factor. Both extreme
    /// eigenvalues are approached from inside, so this never overestimates.
    pub fn condition_estimate(&self) -> f64 {
        let n = self.n;
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        let start: Vec<f64> = (0..n).map(|_| rng.gen_range(0.5..1.5)).collect();

        let lambda_max = power_iteration(&start, |v| {
            (0..n).map(|i| self.gram[i * n..(i + 1) * n].iter().zip(v).map(|(g, x)| g * x).sum()).collect()
        });
        let inv_lambda_min = power_iteration(&start, |v| {
            let mut u = v.to_vec();
            self.forward(&mut u);
            self.backward(&mut u);
            u
        });
        lambda_max * inv_lambda_min
    }
}

fn power_iteration(start: &[f64], apply: impl Fn(&[f64]) -> Vec<f64>) -> f64 {
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let mut v: Vec<f64> = start.to_vec();
    let s = norm(&v);
    v.iter_mut().for_each(|x| *x /= s);
    let mut lambda = 0.0;
    for _ in 0..POWER_ITERATIONS {
        let w = apply(&v);
        // Rayleigh quotient with the normalized iterate
        let next: f64 = w.iter().zip(&v).map(|(a, b)| a * b).sum();
        let wn = norm(&w);
        if !(wn > 0.0) || !wn.is_finite() {
            break;
        }
        v = w.into_iter().map(|x| x / wn).collect();
        let done = (next - lambda).abs() <= 1e-12 * next.abs();
        lambda = next;
        if done {
            break;
        }
    }
    lambda
}

/// Unpivoted Cholesky of a symmetric n×n row-major matrix.
fn cholesky(a: &[f64], n: usize) -> Result<Vec<f64>> {
    let mut l = vec![0.0; n * n];
    for j in 0..n {
        let s: f64 = l[j * n..j * n + j].iter().map(|v| v * v).sum();
        let pivot = a[j * n + j] - s;
        if !(pivot > 0.0) {
            return Err(Error::Degenerate { index: j, value: pivot });
        }
        let diag = pivot.sqrt();
        l[j * n + j] = diag;
        for i in j + 1..n {
            let s: f64 = l[i * n..i * n + j].iter().zip(&l[j * n..j * n + j]).map(|(x, y)| x * y).sum();
            l[i * n + j] = (a[i * n + j] - s) / diag;
        }
    }
    Ok(l)
}

fn clamp_p2(p2: f64) -> Result<f64> {
    if p2 < -P2_NEGATIVE_TOLERANCE {
        return Err(Error::Degenerate { index: 0, value: p2 });
    }
    Ok(p2.max(0.0))
}

/// Squared Power Function of `sites` at `z`; with no sites this is K(z, z).
pub fn power_function_direct<P: AsRef<[f64]>>(sites: &[P], spec: &SobolevKernelSpec, z: &[f64]) -> Result<f64> {
    if sites.is_empty() {
        check_dim(spec.d(), z.len())?;
        return Ok(spec.eval_unchecked(z, z));
    }
    DenseSystem::new(sites, spec)?.power_function(z)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(m: f64, c: f64) -> SobolevKernelSpec {
        SobolevKernelSpec::new(m, 2, c).unwrap()
    }

    #[test]
    fn single_site_interpolation() {
        let s = spec(3.0, 1.0);
        let sys = DenseSystem::new(&[[0.2, 0.1]], &s).unwrap();
        assert!((sys.interpolate(&[5.0], &[0.2, 0.1]).unwrap() - 5.0).abs() < 1e-15);
        let z = [-0.3, 0.4];
        let expect = 5.0 * s.eval(&z, &[0.2, 0.1]).unwrap();
        assert!((sys.interpolate(&[5.0], &z).unwrap() - expect).abs() < 1e-15);
    }

    #[test]
    fn kernel_translate_is_reproduced() {
        let s = spec(3.0, 1.0);
        let sites = [[0.0, 0.0], [0.5, 0.1], [-0.4, 0.7], [0.9, -0.6]];
        let sys = DenseSystem::new(&sites, &s).unwrap();
        let z = [0.1, 0.2];
        let f: Vec<f64> = sites.iter().map(|x| s.eval(x, &sites[2]).unwrap()).collect();
        let v = sys.interpolate(&f, &z).unwrap();
        assert!((v - s.eval(&z, &sites[2]).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn power_function_examples() {
        let s = spec(1.5, 1.0);
        let none: Vec<[f64; 2]> = vec![];
        assert_eq!(power_function_direct(&none, &s, &[0.3, 0.3]).unwrap(), 1.0);
        assert_eq!(power_function_direct(&[[0.3, 0.3]], &s, &[0.3, 0.3]).unwrap(), 0.0);
        let p2 = power_function_direct(&[[1.0, 0.0]], &s, &[0.0, 0.0]).unwrap();
        assert!((p2 - (1.0 - (-2.0f64).exp())).abs() < 1e-15);
        assert!((p2 - 0.864_664_7).abs() < 1e-7);
    }

    #[test]
    fn duplicate_sites_fail_with_pivot_index() {
        let s = spec(3.0, 1.0);
        let err = DenseSystem::new(&[[0.0, 0.0], [1.0, 0.0], [0.0, 0.0]], &s).unwrap_err();
        assert!(matches!(err, Error::Degenerate { index: 2, .. }), "{err}");
    }

    #[test]
    fn condition_of_far_apart_sites() {
        let s = spec(1.5, 0.01);
        let sites = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]];
        let k = DenseSystem::new(&sites, &s).unwrap().condition_estimate();
        assert!((0.5..=2.0).contains(&k), "{k}");
    }

    #[test]
    fn condition_of_two_by_two() {
        // Φ(r) = e^{-r} for ν = 1/2, so the off-diagonal is e^{-dist}
        let a: f64 = 0.9;
        let s = spec(1.5, 1.0);
        let sys = DenseSystem::new(&[[0.0, 0.0], [-a.ln(), 0.0]], &s).unwrap();
        assert!((sys.gram()[1] - a).abs() < 1e-15);
        let k = sys.condition_estimate();
        assert!((k - 19.0).abs() < 1e-6, "{k}");
    }

    #[test]
    fn nested_sites_decrease_p2() {
        let s = spec(3.0, 1.0);
        let chain = [[0.5, 0.5], [-0.5, 0.2], [0.1, -0.7], [0.9, 0.9], [-0.8, -0.8], [0.2, 0.3]];
        let z = [0.05, 0.1];
        let mut last = 1.0;
        for k in 1..=chain.len() {
            let p2 = power_function_direct(&chain[..k], &s, &z).unwrap();
            assert!(p2 <= last + 1e-15);
            last = p2;
        }
    }

    #[test]
    fn solve_length_mismatch() {
        let sys = DenseSystem::new(&[[0.0, 0.0]], &spec(3.0, 1.0)).unwrap();
        assert!(sys.solve(&[1.0, 2.0]).is_err());
    }
}
