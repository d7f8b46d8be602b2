//! Gaussian mixture density fit by expectation-maximisation. Serves as the
//! sampling prior over top-layer latent codes and as a pixel-space baseline.

use std::fs;
use std::path::Path;

use nalgebra::DMatrix;
use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::config::CovarianceKind;
use crate::error::{NgcError, Result};
use crate::linalg::{cholesky_lower, project_spd};
use crate::tensor_io::{read_array, read_matrix, read_values, write_matrix, write_tensor};

const LN_2PI: f64 = 1.837_877_066_409_345_5;

pub const GMM_MANIFEST_FILE: &str = "gmm.manifest.json";

/// Mixture weights, means (one row per component) and covariances.
#[derive(Debug, Clone, PartialEq)]
pub struct GmmParams {
    pub weights: Array1<f64>,
    pub means: Array2<f64>,
    pub covs: Vec<Array2<f64>>,
    pub kind: CovarianceKind,
    pub var_floor: f64,
}

/// Precomputed per-component factors for density evaluation.
struct Factors {
    /// Inverse of the lower Cholesky factor of each covariance.
    inv_chol: Vec<Array2<f64>>,
    /// `log pi_k - 1/2 (d log 2pi + log |Sigma_k|)`.
    offsets: Array1<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmOptions {
    pub n_components: usize,
    pub max_iters: usize,
    pub tol: f64,
    pub kind: CovarianceKind,
    pub var_floor: f64,
    pub seed: u64,
}

impl EmOptions {
    pub fn new(n_components: usize, seed: u64) -> Self {
        Self {
            n_components,
            max_iters: 100,
            tol: 1e-4,
            kind: CovarianceKind::Full,
            var_floor: 1e-6,
            seed,
        }
    }
}

/// Training trace of one EM run.
#[derive(Debug, Clone, PartialEq)]
pub struct EmReport {
    /// Mean log-likelihood per record evaluated before each M-step, plus
    /// the value at the returned parameters.
    pub log_likelihoods: Vec<f64>,
    pub iterations: usize,
    /// Components re-seeded because they lost all responsibility.
    pub reseeded: usize,
}

fn logsumexp(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let max = values.clone().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + values.map(|v| (v - max).exp()).sum::<f64>().ln()
}

fn lower_triangular_inverse(l: &Array2<f64>) -> Array2<f64> {
    let n = l.nrows();
    let m = DMatrix::from_fn(n, n, |i, j| l[[i, j]]);
    let inv = m
        .solve_lower_triangular(&DMatrix::identity(n, n))
        .expect("cholesky factor has a positive diagonal");
    Array2::from_shape_fn((n, n), |(i, j)| inv[(i, j)])
}

impl GmmParams {
    pub fn n_components(&self) -> usize {
        self.weights.len()
    }

    pub fn dim(&self) -> usize {
        self.means.ncols()
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.n_components();
        let d = self.dim();
        if self.means.nrows() != k || self.covs.len() != k || self.covs.iter().any(|c| c.dim() != (d, d)) {
            return Err(NgcError::Shape("gmm tensors disagree on component count or dim".into()));
        }
        if self.weights.iter().any(|&w| !(w >= 0.0)) || (self.weights.sum() - 1.0).abs() > 1e-9 {
            return Err(NgcError::Data("gmm weights are not a probability vector".into()));
        }
        Ok(())
    }

    fn factors(&self) -> Result<Factors> {
        let d = self.dim() as f64;
        let mut inv_chol = Vec::with_capacity(self.n_components());
        let mut offsets = Array1::zeros(self.n_components());
        for (k, cov) in self.covs.iter().enumerate() {
            let l = cholesky_lower(cov.view())?;
            let log_det = 2.0 * l.diag().iter().map(|v| v.ln()).sum::<f64>();
            offsets[k] = self.weights[k].ln() - 0.5 * (d * LN_2PI + log_det);
            inv_chol.push(lower_triangular_inverse(&l));
        }
        Ok(Factors { inv_chol, offsets })
    }

    /// `log pi_k + log N(v_n; mu_k, Sigma_k)` as a `K x N` matrix.
    fn joint_log(&self, data: ArrayView2<'_, f64>, f: &Factors) -> Result<Array2<f64>> {
        if data.nrows() != self.dim() {
            return Err(NgcError::Shape(format!(
                "data has {} rows, mixture dim is {}",
                data.nrows(),
                self.dim()
            )));
        }
        let n = data.ncols();
        let mut out = Array2::zeros((self.n_components(), n));
        for k in 0..self.n_components() {
            let centred = &data - &self.means.row(k).insert_axis(Axis(1));
            let y = f.inv_chol[k].dot(&centred);
            let maha = y.mapv(|v| v * v).sum_axis(Axis(0));
            out.row_mut(k).assign(&(maha * -0.5 + f.offsets[k]));
        }
        Ok(out)
    }

    /// `log sum_k pi_k N(v; mu_k, Sigma_k)` for each column of `data`.
    pub fn log_density_batch(&self, data: ArrayView2<'_, f64>) -> Result<Array1<f64>> {
        let f = self.factors()?;
        let joint = self.joint_log(data, &f)?;
        Ok(joint.axis_iter(Axis(1)).map(|c| logsumexp(c.iter().copied())).collect())
    }

    pub fn log_density(&self, v: ArrayView1<'_, f64>) -> Result<f64> {
        let col = v.insert_axis(Axis(1));
        Ok(self.log_density_batch(col)?[0])
    }

    /// Posterior component probabilities, `K x N`.
    pub fn responsibilities_batch(&self, data: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        let f = self.factors()?;
        let mut joint = self.joint_log(data, &f)?;
        for mut col in joint.axis_iter_mut(Axis(1)) {
            let lse = logsumexp(col.iter().copied());
            col.mapv_inplace(|v| (v - lse).exp());
        }
        Ok(joint)
    }

    pub fn responsibilities(&self, v: ArrayView1<'_, f64>) -> Result<Array1<f64>> {
        let r = self.responsibilities_batch(v.insert_axis(Axis(1)))?;
        Ok(r.column(0).to_owned())
    }

    /// Draws `n` samples (one per column): a component from the weights,
    /// then a Gaussian draw from it.
    pub fn sample(&self, n: usize, seed: u64) -> Result<Array2<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let chols = self
            .covs
            .iter()
            .map(|c| cholesky_lower(c.view()))
            .collect::<Result<Vec<_>>>()?;
        let cumulative: Vec<f64> = self
            .weights
            .iter()
            .scan(0.0, |acc, &w| {
                *acc += w;
                Some(*acc)
            })
            .collect();
        let d = self.dim();
        let mut out = Array2::zeros((d, n));
        for mut col in out.axis_iter_mut(Axis(1)) {
            let u: f64 = rng.random::<f64>() * cumulative[cumulative.len() - 1];
            let k = cumulative.iter().position(|&c| u < c).unwrap_or(cumulative.len() - 1);
            let eps: Array1<f64> = (0..d).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
            col.assign(&(chols[k].dot(&eps) + self.means.row(k)));
        }
        Ok(out)
    }

    /// Samples clipped to `[0, 1]`, for use as Bernoulli means when the
    /// mixture models pixels directly.
    pub fn sample_clipped(&self, n: usize, seed: u64) -> Result<Array2<f64>> {
        Ok(self.sample(n, seed)?.mapv(|v| v.clamp(0.0, 1.0)))
    }

    pub fn save(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| NgcError::io(dir, e))?;
        write_tensor(&dir.join("gmm_weights.bin"), self.weights.iter().copied())?;
        write_matrix(&dir.join("gmm_means.bin"), &self.means)?;
        write_tensor(
            &dir.join("gmm_covs.bin"),
            self.covs.iter().flat_map(|c| c.iter().copied()).collect::<Vec<_>>(),
        )?;
        let manifest = GmmManifest {
            format_version: 1,
            n_components: self.n_components(),
            dim: self.dim(),
            covariance: self.kind,
            var_floor: self.var_floor,
            weights_file: "gmm_weights.bin".into(),
            means_file: "gmm_means.bin".into(),
            covs_file: "gmm_covs.bin".into(),
        };
        let path = dir.join(GMM_MANIFEST_FILE);
        fs::write(&path, serde_json::to_string_pretty(&manifest)?).map_err(|e| NgcError::io(&path, e))
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let path = dir.join(GMM_MANIFEST_FILE);
        if !path.exists() {
            return Err(NgcError::PriorNotFitted(dir.to_path_buf()));
        }
        let text = fs::read_to_string(&path).map_err(|e| NgcError::io(&path, e))?;
        let m: GmmManifest = serde_json::from_str(&text)?;
        let (k, d) = (m.n_components, m.dim);
        let weights = Array1::from(read_values(&dir.join(&m.weights_file), k)?);
        let means = read_matrix(&dir.join(&m.means_file), k, d)?;
        let covs = read_array(&dir.join(&m.covs_file), &[k, d, d])?
            .into_dimensionality::<ndarray::Ix3>()
            .expect("rank 3")
            .outer_iter()
            .map(|c| c.to_owned())
            .collect();
        let gmm = GmmParams {
            weights,
            means,
            covs,
            kind: m.covariance,
            var_floor: m.var_floor,
        };
        gmm.validate()?;
        Ok(gmm)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GmmManifest {
    format_version: u32,
    n_components: usize,
    dim: usize,
    covariance: CovarianceKind,
    var_floor: f64,
    weights_file: String,
    means_file: String,
    covs_file: String,
}

fn squared_distance(a: ArrayView1<'_, f64>, b: ArrayView1<'_, f64>) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// k-means++ seeding: the first centre uniformly, each further centre with
/// probability proportional to its squared distance from the chosen set.
fn kmeanspp(data: ArrayView2<'_, f64>, k: usize, rng: &mut ChaCha8Rng) -> Array2<f64> {
    let n = data.ncols();
    let mut centres = Array2::zeros((k, data.nrows()));
    let first = rng.random_range(0..n);
    centres.row_mut(0).assign(&data.column(first));
    let mut dist: Vec<f64> = (0..n)
        .map(|i| squared_distance(data.column(i), centres.row(0)))
        .collect();
    for c in 1..k {
        let total: f64 = dist.iter().sum();
        let pick = if total > 0.0 {
            let mut u = rng.random::<f64>() * total;
            let mut idx = n - 1;
            for (i, &d) in dist.iter().enumerate() {
                if u < d {
                    idx = i;
                    break;
                }
                u -= d;
            }
            idx
        } else {
            rng.random_range(0..n)
        };
        centres.row_mut(c).assign(&data.column(pick));
        for (i, d) in dist.iter_mut().enumerate() {
            *d = d.min(squared_distance(data.column(i), centres.row(c)));
        }
    }
    centres
}

fn floor_covariance(cov: Array2<f64>, kind: CovarianceKind, floor: f64) -> Array2<f64> {
    match kind {
        CovarianceKind::Diagonal => {
            let d = cov.diag().mapv(|v| v.max(floor));
            Array2::from_diag(&d)
        }
        CovarianceKind::Full => project_spd(&cov, floor),
    }
}

/// Weighted mean and (floored) covariance of the columns of `data`.
fn weighted_moments(
    data: ArrayView2<'_, f64>,
    resp: ArrayView1<'_, f64>,
    kind: CovarianceKind,
    floor: f64,
) -> (Array1<f64>, Array2<f64>) {
    let nk: f64 = resp.sum();
    let mean = data.dot(&resp) / nk;
    let centred = &data - &mean.view().insert_axis(Axis(1));
    let weighted = &centred * &resp.insert_axis(Axis(0));
    let cov = weighted.dot(&centred.t()) / nk;
    (mean, floor_covariance(cov, kind, floor))
}

/// Fits a mixture to the columns of `data` (`dim x N`).
///
/// Stops when the per-record log-likelihood improves by less than `tol` or
/// after `max_iters` M-steps. A component whose total responsibility falls
/// below `1e-10` is re-seeded at the worst-explained data point.
pub fn fit_em(data: ArrayView2<'_, f64>, opts: EmOptions) -> Result<(GmmParams, EmReport)> {
    let n = data.ncols();
    let k = opts.n_components;
    if k == 0 || n < k {
        return Err(NgcError::Data(format!("need at least {k} records for {k} components, got {n}")));
    }
    if data.iter().any(|v| !v.is_finite()) {
        return Err(NgcError::NonFinite("gmm training data".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let all = Array1::from_elem(n, 1.0);
    let (_, global_cov) = weighted_moments(data, all.view(), opts.kind, opts.var_floor);
    let mut gmm = GmmParams {
        weights: Array1::from_elem(k, 1.0 / k as f64),
        means: kmeanspp(data, k, &mut rng),
        covs: vec![global_cov; k],
        kind: opts.kind,
        var_floor: opts.var_floor,
    };
    let mut lls = Vec::new();
    let mut reseeded = 0;
    let mut iterations = 0;
    loop {
        let f = gmm.factors()?;
        let mut joint = gmm.joint_log(data, &f)?;
        let mut per_record = Array1::zeros(n);
        for (i, mut col) in joint.axis_iter_mut(Axis(1)).enumerate() {
            let lse = logsumexp(col.iter().copied());
            per_record[i] = lse;
            col.mapv_inplace(|v| (v - lse).exp());
        }
        let ll = per_record.sum() / n as f64;
        let converged = lls.last().is_some_and(|&prev: &f64| ll - prev < opts.tol);
        lls.push(ll);
        if converged || iterations >= opts.max_iters {
            break;
        }
        // M-step
        let resp = joint;
        let mut weights = Array1::zeros(k);
        for c in 0..k {
            let r = resp.row(c);
            let nk = r.sum();
            if nk < 1e-10 {
                let worst = per_record
                    .iter()
                    .enumerate()
                    .min_by(|a, b| a.1.total_cmp(b.1))
                    .map(|(i, _)| i)
                    .expect("non-empty data");
                gmm.means.row_mut(c).assign(&data.column(worst));
                weights[c] = 1.0 / n as f64;
                reseeded += 1;
                continue;
            }
            let (mean, cov) = weighted_moments(data, r, opts.kind, opts.var_floor);
            gmm.means.row_mut(c).assign(&mean);
            gmm.covs[c] = cov;
            weights[c] = nk / n as f64;
        }
        gmm.weights = &weights / weights.sum();
        iterations += 1;
    }
    Ok((
        gmm,
        EmReport {
            log_likelihoods: lls,
            iterations,
            reseeded,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn single(mean: f64, var: f64) -> GmmParams {
        GmmParams {
            weights: array![1.0],
            means: array![[mean]],
            covs: vec![array![[var]]],
            kind: CovarianceKind::Full,
            var_floor: 1e-6,
        }
    }

    #[test]
    fn standard_normal_at_zero() {
        let v = single(0.0, 1.0).log_density(array![0.0].view()).unwrap();
        assert!((v + 0.5 * (2.0 * std::f64::consts::PI).ln()).abs() < 1e-14);
        assert!((v + 0.918939).abs() < 1e-6);
    }

    #[test]
    fn splitting_a_component_preserves_density() {
        let g = single(0.3, 2.0);
        let split = GmmParams {
            weights: array![0.5, 0.5],
            means: array![[0.3], [0.3]],
            covs: vec![array![[2.0]], array![[2.0]]],
            ..g.clone()
        };
        for v in [-1.0, 0.0, 4.0] {
            let a = g.log_density(array![v].view()).unwrap();
            let b = split.log_density(array![v].view()).unwrap();
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn far_points_are_finite() {
        let v = single(0.0, 1.0).log_density(array![1e5].view()).unwrap();
        assert!(v.is_finite() && v < -1e9);
    }

    #[test]
    fn responsibilities_cases() {
        let r = single(0.0, 1.0).responsibilities(array![3.0].view()).unwrap();
        assert_eq!(r, array![1.0]);
        let two = GmmParams {
            weights: array![0.5, 0.5],
            means: array![[-2.0], [2.0]],
            covs: vec![array![[1.0]], array![[1.0]]],
            kind: CovarianceKind::Full,
            var_floor: 1e-6,
        };
        let mid = two.responsibilities(array![0.0].view()).unwrap();
        assert!((mid[0] - 0.5).abs() < 1e-15 && (mid[1] - 0.5).abs() < 1e-15);
        let at = two.responsibilities(array![-2.0].view()).unwrap();
        assert!(at[0] >= 0.99);
        assert!((at.sum() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn closed_form_single_component() {
        let data = array![[0.0, 2.0]];
        let (g, _) = fit_em(data.view(), EmOptions::new(1, 0)).unwrap();
        assert!((g.means[[0, 0]] - 1.0).abs() < 1e-12);
        assert!((g.covs[0][[0, 0]] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn infinite_tolerance_stops_after_one_iteration() {
        let data = array![[0.0, 1.0, 5.0, 6.0, 0.5, 5.5]];
        let mut opts = EmOptions::new(2, 3);
        opts.tol = f64::INFINITY;
        let (_, report) = fit_em(data.view(), opts).unwrap();
        assert_eq!(report.iterations, 1);
    }

    #[test]
    fn repeated_points_are_recovered() {
        let pts = [[0.0, 0.0], [5.0, 5.0], [-4.0, 6.0]];
        let mut cols = Vec::new();
        for p in &pts {
            for _ in 0..10 {
                cols.extend_from_slice(p);
            }
        }
        let data = Array2::from_shape_vec((30, 2), cols).unwrap().reversed_axes();
        let mut opts = EmOptions::new(3, 1);
        opts.kind = CovarianceKind::Diagonal;
        opts.max_iters = 200;
        opts.tol = 1e-12;
        let (g, _) = fit_em(data.view(), opts).unwrap();
        for p in &pts {
            let hit = (0..3).any(|k| (g.means[[k, 0]] - p[0]).abs() < 1e-9 && (g.means[[k, 1]] - p[1]).abs() < 1e-9);
            assert!(hit, "{p:?} not recovered: {:?}", g.means);
        }
        let r = g.responsibilities_batch(data.view()).unwrap();
        assert!(r.iter().all(|&v| v < 1e-9 || v > 1.0 - 1e-9));
    }

    #[test]
    fn too_few_records_rejected() {
        assert!(fit_em(array![[1.0, 2.0]].view(), EmOptions::new(3, 0)).is_err());
    }

    #[test]
    fn sampling_is_seeded_and_collapses_at_floor() {
        let g = GmmParams {
            weights: array![0.25, 0.75],
            means: array![[1.0, 2.0], [-3.0, 0.5]],
            covs: vec![Array2::eye(2) * 1e-12, Array2::eye(2) * 1e-12],
            kind: CovarianceKind::Full,
            var_floor: 1e-12,
        };
        let a = g.sample(50, 9).unwrap();
        assert_eq!(a, g.sample(50, 9).unwrap());
        for col in a.axis_iter(Axis(1)) {
            let near = (0..2).any(|k| squared_distance(col, g.means.row(k)) < 1e-8);
            assert!(near);
        }
    }

    #[test]
    fn save_load_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let data = array![[0.0, 1.0, 5.0, 6.0, 0.5, 5.5], [1.0, 0.0, 2.0, 2.5, 0.3, 3.0]];
        let (g, _) = fit_em(data.view(), EmOptions::new(2, 4)).unwrap();
        g.save(dir.path()).unwrap();
        assert_eq!(GmmParams::load(dir.path()).unwrap(), g);
        let empty = tempfile::tempdir().unwrap();
        assert!(matches!(GmmParams::load(empty.path()), Err(NgcError::PriorNotFitted(_))));
    }
}
