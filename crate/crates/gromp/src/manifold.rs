//! Task-manifold learning: lift expert object poses to the tangent space at
//! their geodesic mean, normalize rotational and translational blocks to
//! comparable magnitudes, extract a principal basis by SVD, and score each
//! candidate dimensionality `i in 0..=6` with a projection loss
//!
//! `L_i = sum_t ||xi_t - xi_t^i|| / sum_t ||xi_t|| + i/6`
//!
//! whose residual term trades retained degrees of freedom against the
//! tangent mass removed by the rank-`i` projection.

use nalgebra::{DMatrix, Matrix6, Vector6};
use thiserror::Error;

use crate::io::DemonstrationDataset;
use crate::liegroup::{geodesic_mean, LieError, Pose, Twist};
use crate::scalar::{real, Real};

/// Raw max-norms below this fall back to a unit scale, keeping stationary or
/// pure-translation datasets well-defined.
pub const SCALE_FALLBACK_TOL: f64 = 1e-12;

/// Orthonormality tolerance on the basis, `||P^T P - I||_F`, accepted when
/// constructing a descriptor (fitted bases land far below this).
pub const BASIS_TOL: f64 = 1e-9;

/// Warn when the Euclidean mean of the normalized twist rows drifts beyond
/// this norm; the tangent data is assumed centered by the geodesic mean.
const CENTERING_WARN_TOL: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ManifoldError {
    #[error("empty input")]
    EmptyInput,
    #[error("log map undefined for pose {pose_index}: rotation angle near pi")]
    AngleNearPi { pose_index: usize },
    #[error("singular value decomposition failed (non-finite input?)")]
    SvdFailure,
    #[error("projection dimensionality {dim} outside 0..=6")]
    DimOutOfRange { dim: usize },
    #[error("degenerate dataset: all twists zero")]
    DegenerateDataset,
    #[error("geodesic mean failed: {0}")]
    Mean(LieError),
    #[error("non-finite entries in twist matrix")]
    NonFinite,
}

/// Per-block normalization scales: `s_omega = max_t ||omega_t||` (radians)
/// and `s_v = max_t ||v_t||` (meters), each replaced by 1 when the raw
/// maximum is below [`SCALE_FALLBACK_TOL`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalizationScales<T: Real> {
    pub s_omega: T,
    pub s_v: T,
}

impl<T: Real> NormalizationScales<T> {
    pub fn unit() -> Self {
        Self {
            s_omega: T::one(),
            s_v: T::one(),
        }
    }

    /// Row of the normalized twist matrix: `[omega/s_omega; v/s_v]`.
    pub fn normalize(&self, twist: &Twist<T>) -> Vector6<T> {
        Twist::new(twist.omega / self.s_omega, twist.v / self.s_v).to_vector()
    }

    /// Inverse of [`Self::normalize`].
    pub fn denormalize(&self, row: &Vector6<T>) -> Twist<T> {
        let t = Twist::from_vector(row);
        Twist::new(t.omega * self.s_omega, t.v * self.s_v)
    }
}

/// Row-major stack of normalized twists, one row per pooled data point.
#[derive(Debug, Clone, PartialEq)]
pub struct TwistMatrix<T: Real> {
    rows: Vec<Vector6<T>>,
}

impl<T: Real> TwistMatrix<T> {
    pub fn from_rows(rows: Vec<Vector6<T>>) -> Result<Self, ManifoldError> {
        if rows.is_empty() {
            return Err(ManifoldError::EmptyInput);
        }
        if rows.iter().any(|r| !r.iter().all(|x| x.is_finite())) {
            return Err(ManifoldError::NonFinite);
        }
        Ok(Self { rows })
    }

    pub fn rows(&self) -> &[Vector6<T>] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

/// Learned task-manifold descriptor: geodesic mean, orthonormal principal
/// basis (columns `p1..p6`), singular values, normalization scales, and the
/// chosen dimensionality (unset until a caller or the bandit picks one).
#[derive(Debug, Clone, PartialEq)]
pub struct TaskManifold<T: Real> {
    mean: Pose<T>,
    basis: Matrix6<T>,
    singular_values: Vector6<T>,
    scales: NormalizationScales<T>,
    dim: Option<usize>,
}

impl<T: Real> TaskManifold<T> {
    pub fn new(
        mean: Pose<T>,
        basis: Matrix6<T>,
        singular_values: Vector6<T>,
        scales: NormalizationScales<T>,
        dim: Option<usize>,
    ) -> Result<Self, ManifoldError> {
        // Absolute bound at f64; widened to 100 ulp for coarser scalars.
        let tol = real::<T>(BASIS_TOL).max(T::default_epsilon() * real(100.0));
        let residual = (basis.transpose() * basis - Matrix6::identity()).norm();
        if !residual.is_finite() || residual > tol {
            return Err(ManifoldError::SvdFailure);
        }
        for i in 1..6 {
            if singular_values[i] > singular_values[i - 1] {
                return Err(ManifoldError::SvdFailure);
            }
        }
        if let Some(d) = dim {
            if d > 6 {
                return Err(ManifoldError::DimOutOfRange { dim: d });
            }
        }
        Ok(Self {
            mean,
            basis,
            singular_values,
            scales,
            dim,
        })
    }

    pub fn mean(&self) -> &Pose<T> {
        &self.mean
    }

    pub fn basis(&self) -> &Matrix6<T> {
        &self.basis
    }

    pub fn singular_values(&self) -> &Vector6<T> {
        &self.singular_values
    }

    pub fn scales(&self) -> &NormalizationScales<T> {
        &self.scales
    }

    pub fn dim(&self) -> Option<usize> {
        self.dim
    }

    /// Returns a copy with the projection dimensionality set.
    pub fn with_dim(&self, dim: usize) -> Result<Self, ManifoldError> {
        if dim > 6 {
            return Err(ManifoldError::DimOutOfRange { dim });
        }
        let mut m = self.clone();
        m.dim = Some(dim);
        Ok(m)
    }

    /// Orthogonal projector onto the span of the first `dim` basis columns,
    /// in normalized tangent coordinates.
    pub fn projector_matrix(&self, dim: usize) -> Matrix6<T> {
        projector_matrix(&self.basis, dim)
    }
}

fn projector_matrix<T: Real>(basis: &Matrix6<T>, dim: usize) -> Matrix6<T> {
    let mut p = Matrix6::zeros();
    for j in 0..dim.min(6) {
        let col = basis.column(j);
        p += col * col.transpose();
    }
    p
}

/// Lifts poses to the tangent space at `mean`: `xi_t = log(mean^{-1} A_t)`.
pub fn lift_to_tangent<T: Real>(
    poses: &[Pose<T>],
    mean: &Pose<T>,
) -> Result<Vec<Twist<T>>, ManifoldError> {
    let mean_inv = mean.inverse();
    poses
        .iter()
        .enumerate()
        .map(|(pose_index, pose)| {
            mean_inv
                .compose(pose)
                .log()
                .map_err(|_| ManifoldError::AngleNearPi { pose_index })
        })
        .collect()
}

/// Normalizes twists per block by the dataset max norms, returning the row
/// matrix and the scales used.
pub fn normalize_twists<T: Real>(
    twists: &[Twist<T>],
) -> Result<(TwistMatrix<T>, NormalizationScales<T>), ManifoldError> {
    if twists.is_empty() {
        return Err(ManifoldError::EmptyInput);
    }
    let mut max_omega = T::zero();
    let mut max_v = T::zero();
    for t in twists {
        max_omega = max_omega.max(t.omega.norm());
        max_v = max_v.max(t.v.norm());
    }
    let fallback = real::<T>(SCALE_FALLBACK_TOL);
    let scales = NormalizationScales {
        s_omega: if max_omega < fallback {
            T::one()
        } else {
            max_omega
        },
        s_v: if max_v < fallback { T::one() } else { max_v },
    };
    let rows = twists.iter().map(|t| scales.normalize(t)).collect();
    Ok((TwistMatrix::from_rows(rows)?, scales))
}

/// Principal basis of the normalized twist rows by singular value
/// decomposition. Columns are sorted by non-increasing singular value and
/// sign-canonicalized: the largest-magnitude entry of each column is made
/// positive, ties broken by lowest entry index.
pub fn pca_basis<T: Real>(xi: &TwistMatrix<T>) -> Result<(Matrix6<T>, Vector6<T>), ManifoldError> {
    let t = xi.len();

    let mean_row: Vector6<T> = xi.rows().iter().sum::<Vector6<T>>() / real::<T>(t as f64);
    if mean_row.norm() > real(CENTERING_WARN_TOL) {
        log::warn!(
            "normalized twist rows are not centered (mean norm {:?}); \
             the geodesic mean should place the tangent data near the origin",
            mean_row.norm().to_f64()
        );
    }

    // Pad with zero rows so the decomposition always yields a full 6x6
    // right-singular basis.
    let padded = t.max(6);
    let mut data = DMatrix::<T>::zeros(padded, 6);
    for (r, row) in xi.rows().iter().enumerate() {
        data.row_mut(r).copy_from(&row.transpose());
    }

    let svd = data
        .try_svd(false, true, T::default_epsilon() * real(10.0), 0)
        .ok_or(ManifoldError::SvdFailure)?;
    let v_t = svd.v_t.as_ref().expect("v_t requested");

    let mut cols: Vec<(T, Vector6<T>)> = (0..6)
        .map(|j| {
            let col: Vector6<T> = v_t.row(j).transpose().fixed_rows::<6>(0).into_owned();
            (svd.singular_values[j], col)
        })
        .collect();
    cols.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(std::cmp::Ordering::Equal));

    let mut basis = Matrix6::<T>::zeros();
    let mut singular_values = Vector6::<T>::zeros();
    for (j, (sigma, col)) in cols.into_iter().enumerate() {
        singular_values[j] = sigma;
        basis.set_column(j, &canonicalize_sign(&col));
    }
    Ok((basis, singular_values))
}

fn canonicalize_sign<T: Real>(col: &Vector6<T>) -> Vector6<T> {
    let mut idx = 0;
    let mut best = col[0].abs();
    for j in 1..6 {
        if col[j].abs() > best {
            best = col[j].abs();
            idx = j;
        }
    }
    if col[idx] < T::zero() {
        -*col
    } else {
        *col
    }
}

/// Projects every row onto the span of the first `i` basis columns:
/// `Xi^i = Xi P D_i P^T`. `i = 0` zeroes every row; `i = 6` is the identity.
pub fn project_twist_rows<T: Real>(
    xi: &TwistMatrix<T>,
    basis: &Matrix6<T>,
    i: usize,
) -> Result<TwistMatrix<T>, ManifoldError> {
    if i > 6 {
        return Err(ManifoldError::DimOutOfRange { dim: i });
    }
    let rows = match i {
        0 => vec![Vector6::zeros(); xi.len()],
        6 => xi.rows().to_vec(),
        _ => {
            let proj = projector_matrix(basis, i);
            xi.rows().iter().map(|row| proj * row).collect()
        }
    };
    TwistMatrix::from_rows(rows)
}

/// Projection loss for dimensionality `i`: removed tangent mass relative to
/// the total, plus `i/6`. Errors with [`ManifoldError::DegenerateDataset`]
/// when the total tangent mass vanishes.
pub fn projection_loss<T: Real>(
    xi: &TwistMatrix<T>,
    basis: &Matrix6<T>,
    i: usize,
) -> Result<T, ManifoldError> {
    if i > 6 {
        return Err(ManifoldError::DimOutOfRange { dim: i });
    }
    let denominator: T = xi
        .rows()
        .iter()
        .map(|r| r.norm())
        .fold(T::zero(), |a, b| a + b);
    if denominator == T::zero() {
        return Err(ManifoldError::DegenerateDataset);
    }
    let projected = project_twist_rows(xi, basis, i)?;
    let numerator: T = xi
        .rows()
        .iter()
        .zip(projected.rows())
        .map(|(r, p)| (r - p).norm())
        .fold(T::zero(), |a, b| a + b);
    Ok(numerator / denominator + real::<T>(i as f64) / real(6.0))
}

/// Fits the full descriptor from a demonstration dataset: pools every object
/// pose across all episodes, takes the geodesic mean, lifts, normalizes,
/// extracts the basis, and evaluates the loss for each `i in 0..=6`.
///
/// Stationary datasets (all raw twist norms below [`SCALE_FALLBACK_TOL`])
/// have no tangent signal to remove, so every residual term is zero and the
/// losses reduce to `i/6`.
pub fn fit_task_manifold<T: Real>(
    dataset: &DemonstrationDataset<T>,
) -> Result<(TaskManifold<T>, [T; 7]), ManifoldError> {
    let poses = dataset.pooled_object_poses();
    if poses.is_empty() {
        return Err(ManifoldError::EmptyInput);
    }
    let mean = geodesic_mean(&poses).map_err(ManifoldError::Mean)?;
    let twists = lift_to_tangent(&poses, &mean)?;

    let fallback = real::<T>(SCALE_FALLBACK_TOL);
    let degenerate = twists
        .iter()
        .all(|t| t.omega.norm() < fallback && t.v.norm() < fallback);

    let (rows, scales) = normalize_twists(&twists)?;
    let (basis, singular_values) = pca_basis(&rows)?;

    let mut losses = [T::zero(); 7];
    for (i, loss) in losses.iter_mut().enumerate() {
        *loss = if degenerate {
            real::<T>(i as f64) / real(6.0)
        } else {
            projection_loss(&rows, &basis, i)?
        };
    }

    let manifold = TaskManifold::new(mean, basis, singular_values, scales, None)?;
    Ok((manifold, losses))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::{DemoRecord, DemonstrationDataset, Episode};
    use crate::liegroup::hat;
    use nalgebra::Vector3;
    use proptest::prelude::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn random_pose(rng: &mut StdRng, max_omega: f64) -> Pose<f64> {
        let axis = Vector3::new(
            rng.random_range(-1.0..1.0_f64),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        )
        .normalize();
        Twist::new(
            axis * rng.random_range(0.0..max_omega),
            Vector3::new(
                rng.random_range(-0.3..0.3),
                rng.random_range(-0.3..0.3),
                rng.random_range(-0.3..0.3),
            ),
        )
        .exp()
    }

    fn random_rows(rng: &mut StdRng, n: usize) -> TwistMatrix<f64> {
        let rows = (0..n)
            .map(|_| Vector6::from_fn(|_, _| rng.random_range(-1.0..1.0)))
            .collect();
        TwistMatrix::from_rows(rows).unwrap()
    }

    fn dataset_from_object_poses(poses: &[Pose<f64>]) -> DemonstrationDataset<f64> {
        let records = poses
            .iter()
            .enumerate()
            .map(|(t, a_so)| DemoRecord::new(t, a_so.clone(), Pose::identity()))
            .collect();
        DemonstrationDataset {
            episodes: vec![Episode { records }],
        }
    }

    #[test]
    fn lift_of_mean_is_zero_twist() {
        let mut rng = StdRng::seed_from_u64(2);
        let mean = random_pose(&mut rng, 1.5);
        let twists = lift_to_tangent(std::slice::from_ref(&mean), &mean).unwrap();
        assert_eq!(twists.len(), 1);
        assert!(twists[0].norm() < 1e-12);
    }

    #[test]
    fn lift_of_translation_at_identity_mean() {
        let pose = Pose::from_translation(Vector3::new(0.0, 0.0, 0.02));
        let twists = lift_to_tangent(&[pose], &Pose::identity()).unwrap();
        assert_eq!(twists[0].omega, Vector3::zeros());
        assert!((twists[0].v - Vector3::new(0.0, 0.0, 0.02)).norm() < 1e-15);
    }

    #[test]
    fn lift_of_screw_trajectory_is_colinear() {
        let mut rng = StdRng::seed_from_u64(9);
        let mean = random_pose(&mut rng, 1.0);
        let xi0 = Twist::new(Vector3::new(0.0, 0.0, 0.4), Vector3::new(0.0, 0.0, -0.01));
        let params: Vec<f64> = (0..50).map(|k| (k as f64 - 25.0) / 25.0).collect();
        let poses: Vec<_> = params
            .iter()
            .map(|&s| mean.compose(&Twist::new(xi0.omega * s, xi0.v * s).exp()))
            .collect();
        let twists = lift_to_tangent(&poses, &mean).unwrap();
        for (s, twist) in params.iter().zip(&twists) {
            let expected = Twist::new(xi0.omega * *s, xi0.v * *s);
            assert!((twist.to_vector() - expected.to_vector()).abs().max() < 1e-8);
        }
    }

    #[test]
    fn lift_reports_failing_index() {
        let bad = Twist::new(
            Vector3::new(std::f64::consts::PI - 1e-8, 0.0, 0.0),
            Vector3::zeros(),
        )
        .exp();
        let err = lift_to_tangent(&[Pose::identity(), bad], &Pose::identity()).unwrap_err();
        assert_eq!(err, ManifoldError::AngleNearPi { pose_index: 1 });
    }

    #[test]
    fn normalize_all_zero_twists_falls_back_to_unit_scales() {
        let twists = vec![Twist::<f64>::zero(); 5];
        let (rows, scales) = normalize_twists(&twists).unwrap();
        assert_eq!(scales.s_omega, 1.0);
        assert_eq!(scales.s_v, 1.0);
        assert!(rows.rows().iter().all(|r| r.norm() == 0.0));
    }

    #[test]
    fn normalize_single_twist_example() {
        let twist = Twist::new(Vector3::new(0.0, 0.0, 0.2), Vector3::new(0.1, 0.0, 0.0));
        let (rows, scales) = normalize_twists(&[twist]).unwrap();
        assert_eq!(scales.s_omega, 0.2);
        assert_eq!(scales.s_v, 0.1);
        let expected = Vector6::new(0.0, 0.0, 1.0, 1.0, 0.0, 0.0);
        assert!((rows.rows()[0] - expected).abs().max() < 1e-15);
    }

    #[test]
    fn normalized_block_maxima_are_unit() {
        let mut rng = StdRng::seed_from_u64(19);
        let twists: Vec<_> = (0..30)
            .map(|_| {
                Twist::new(
                    Vector3::new(
                        rng.random_range(-0.8..0.8),
                        rng.random_range(-0.8..0.8),
                        rng.random_range(-0.8..0.8),
                    ),
                    Vector3::new(
                        rng.random_range(-0.1..0.1),
                        rng.random_range(-0.1..0.1),
                        rng.random_range(-0.1..0.1),
                    ),
                )
            })
            .collect();
        let (rows, _) = normalize_twists(&twists).unwrap();
        let max_omega = rows
            .rows()
            .iter()
            .map(|r| r.fixed_rows::<3>(0).norm())
            .fold(0.0f64, f64::max);
        let max_v = rows
            .rows()
            .iter()
            .map(|r| r.fixed_rows::<3>(3).norm())
            .fold(0.0f64, f64::max);
        assert!((max_omega - 1.0).abs() < 1e-12);
        assert!((max_v - 1.0).abs() < 1e-12);
    }

    #[test]
    fn normalize_rejects_empty_input() {
        assert_eq!(
            normalize_twists::<f64>(&[]).unwrap_err(),
            ManifoldError::EmptyInput
        );
    }

    proptest! {
        #[test]
        fn denormalize_inverts_normalize(
            wx in -2.0..2.0f64, wy in -2.0..2.0f64, wz in -2.0..2.0f64,
            vx in -0.5..0.5f64, vy in -0.5..0.5f64, vz in -0.5..0.5f64,
        ) {
            let twist = Twist::new(Vector3::new(wx, wy, wz), Vector3::new(vx, vy, vz));
            let other = Twist::new(Vector3::new(wy, wz, wx), Vector3::new(vz, vx, vy));
            let (_, scales) = normalize_twists(&[twist, other]).unwrap();
            let back = scales.denormalize(&scales.normalize(&twist));
            prop_assert!((back.to_vector() - twist.to_vector()).abs().max() < 1e-12);
        }
    }

    #[test]
    fn pca_recovers_planted_rank_one_direction() {
        let mut rng = StdRng::seed_from_u64(7);
        let mut dir = Vector6::from_fn(|_, _| rng.random_range(-1.0..1.0_f64));
        dir /= dir.norm();
        let rows: Vec<_> = (0..40).map(|_| dir * rng.random_range(-1.0..1.0)).collect();
        let xi = TwistMatrix::from_rows(rows).unwrap();
        let (basis, sigma) = pca_basis(&xi).unwrap();
        let p1 = basis.column(0);
        // Sign-canonicalized: compare against +-dir.
        let diff = (p1 - dir).abs().max().min((p1 + dir).abs().max());
        assert!(diff < 1e-10);
        let canon = super::canonicalize_sign(&dir);
        assert!((p1 - canon).abs().max() < 1e-10);
        for j in 1..6 {
            assert!(sigma[j] < 1e-10, "sigma[{j}] = {:e}", sigma[j]);
        }
    }

    #[test]
    fn pca_basis_is_orthonormal_and_energy_preserving() {
        let mut rng = StdRng::seed_from_u64(15);
        let xi = random_rows(&mut rng, 60);
        let (basis, sigma) = pca_basis(&xi).unwrap();
        let residual = (basis.transpose() * basis - Matrix6::identity()).norm();
        assert!(residual < 1e-10);
        let energy: f64 = xi.rows().iter().map(|r| r.norm_squared()).sum();
        let spectral: f64 = (0..6).map(|j| sigma[j] * sigma[j]).sum();
        assert!((energy - spectral).abs() < 1e-9);
        for j in 1..6 {
            assert!(sigma[j] <= sigma[j - 1]);
        }
    }

    #[test]
    fn pca_handles_fewer_rows_than_dimensions() {
        let rows = vec![Vector6::<f64>::new(1.0, 0.0, 0.0, 0.0, 0.0, 0.0)];
        let xi = TwistMatrix::from_rows(rows).unwrap();
        let (basis, sigma) = pca_basis(&xi).unwrap();
        assert!((basis.transpose() * basis - Matrix6::identity()).norm() < 1e-10);
        assert!((sigma[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn twist_matrix_rejects_non_finite() {
        let rows = vec![Vector6::new(f64::NAN, 0.0, 0.0, 0.0, 0.0, 0.0)];
        assert_eq!(
            TwistMatrix::from_rows(rows).unwrap_err(),
            ManifoldError::NonFinite
        );
    }

    #[test]
    fn projection_endpoints() {
        let mut rng = StdRng::seed_from_u64(23);
        let xi = random_rows(&mut rng, 30);
        let (basis, _) = pca_basis(&xi).unwrap();

        let zeroed = project_twist_rows(&xi, &basis, 0).unwrap();
        assert!(zeroed.rows().iter().all(|r| *r == Vector6::zeros()));

        let full = project_twist_rows(&xi, &basis, 6).unwrap();
        assert_eq!(full, xi);

        assert_eq!(
            project_twist_rows(&xi, &basis, 7).unwrap_err(),
            ManifoldError::DimOutOfRange { dim: 7 }
        );
    }

    #[test]
    fn planted_rank_two_rows_survive_rank_two_projection() {
        let mut rng = StdRng::seed_from_u64(29);
        let e1 = Vector6::new(1.0, 0.0, 0.0, 0.0, 0.0, 0.0);
        let e2 = Vector6::new(0.0, 0.0, 0.0, 1.0, 0.0, 0.0);
        let rows: Vec<_> = (0..50)
            .map(|_| e1 * rng.random_range(-1.0..1.0_f64) + e2 * rng.random_range(-1.0..1.0_f64))
            .collect();
        let xi = TwistMatrix::from_rows(rows).unwrap();
        let (basis, _) = pca_basis(&xi).unwrap();
        let projected = project_twist_rows(&xi, &basis, 2).unwrap();
        for (r, p) in xi.rows().iter().zip(projected.rows()) {
            assert!((r - p).abs().max() < 1e-9);
        }
        let loss = projection_loss(&xi, &basis, 2).unwrap();
        assert!((loss - 2.0 / 6.0).abs() < 1e-9);
    }

    #[test]
    fn projection_loss_endpoints_are_exactly_one() {
        let mut rng = StdRng::seed_from_u64(37);
        let xi = random_rows(&mut rng, 25);
        let (basis, _) = pca_basis(&xi).unwrap();
        assert_eq!(projection_loss(&xi, &basis, 0).unwrap(), 1.0);
        assert_eq!(projection_loss(&xi, &basis, 6).unwrap(), 1.0);
    }

    #[test]
    fn projection_loss_degenerate_when_all_rows_zero() {
        let xi = TwistMatrix::from_rows(vec![Vector6::<f64>::zeros(); 4]).unwrap();
        let basis = Matrix6::<f64>::identity();
        assert_eq!(
            projection_loss(&xi, &basis, 3).unwrap_err(),
            ManifoldError::DegenerateDataset
        );
    }

    #[test]
    fn projection_is_contractive_idempotent_and_nested() {
        let mut rng = StdRng::seed_from_u64(41);
        let xi = random_rows(&mut rng, 40);
        let (basis, _) = pca_basis(&xi).unwrap();
        for i in 0..=6 {
            let once = project_twist_rows(&xi, &basis, i).unwrap();
            for (r, p) in xi.rows().iter().zip(once.rows()) {
                assert!(p.norm() <= r.norm() + 1e-12);
            }
            let twice = project_twist_rows(&once, &basis, i).unwrap();
            for (a, b) in once.rows().iter().zip(twice.rows()) {
                assert!((a - b).abs().max() < 1e-12);
            }
            for j in i..=6 {
                let nested = project_twist_rows(&once, &basis, j).unwrap();
                for (a, b) in once.rows().iter().zip(nested.rows()) {
                    assert!((a - b).abs().max() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn residual_term_is_non_increasing_and_loss_stays_in_band() {
        let mut rng = StdRng::seed_from_u64(43);
        let xi = random_rows(&mut rng, 35);
        let (basis, _) = pca_basis(&xi).unwrap();
        let mut prev = f64::INFINITY;
        for i in 0..=6 {
            let loss = projection_loss(&xi, &basis, i).unwrap();
            let residual = loss - i as f64 / 6.0;
            assert!(residual <= prev + 1e-12);
            assert!((-1e-12..=1.0 + 1e-12).contains(&residual));
            assert!(loss >= i as f64 / 6.0 - 1e-12 && loss <= 1.0 + i as f64 / 6.0 + 1e-12);
            prev = residual;
        }
    }

    #[test]
    fn pipeline_runs_at_f32() {
        // The generic surface must stay usable at single precision.
        let mut rng = StdRng::seed_from_u64(61);
        let twists: Vec<Twist<f32>> = (0..40)
            .map(|_| {
                Twist::new(
                    Vector3::new(0.0, 0.0, rng.random_range(-0.5..0.5f32)),
                    Vector3::new(0.0, 0.0, rng.random_range(-0.05..0.05f32)),
                )
            })
            .collect();
        let (rows, scales) = normalize_twists(&twists).unwrap();
        assert!(scales.s_omega > 0.0 && scales.s_v > 0.0);
        let (basis, sigma) = pca_basis(&rows).unwrap();
        assert!((basis.transpose() * basis - Matrix6::identity()).norm() < 1e-5);
        for j in 2..6 {
            assert!(sigma[j] < 1e-3);
        }
        let loss = projection_loss(&rows, &basis, 2).unwrap();
        assert!((loss - 2.0 / 6.0).abs() < 1e-4);
        let projected = project_twist_rows(&rows, &basis, 2).unwrap();
        for (r, p) in rows.rows().iter().zip(projected.rows()) {
            assert!((r - p).abs().max() < 1e-4);
        }

        let manifold =
            TaskManifold::new(Pose::<f32>::identity(), basis, sigma, scales, Some(2)).unwrap();
        let pose = Twist::new(Vector3::new(0.0, 0.0, 0.2f32), Vector3::new(0.0, 0.0, 0.01)).exp();
        let projected = crate::projector::project_object_pose(&pose, &manifold).unwrap();
        let dr = (projected.rotation() - pose.rotation()).abs().max();
        let dt = (projected.translation() - pose.translation()).abs().max();
        assert!(dr.max(dt) < 1e-4);
    }

    #[test]
    fn fit_on_identical_poses_applies_degenerate_rule() {
        let mut rng = StdRng::seed_from_u64(47);
        let pose = random_pose(&mut rng, 1.0);
        let dataset = dataset_from_object_poses(&vec![pose.clone(); 12]);
        let (manifold, losses) = fit_task_manifold(&dataset).unwrap();
        assert_eq!(manifold.mean(), &pose);
        for (i, loss) in losses.iter().enumerate() {
            assert!((loss - i as f64 / 6.0).abs() < 1e-12);
        }
        // Degenerate convention: loss strictly increases with i.
        for i in 1..7 {
            assert!(losses[i] > losses[i - 1]);
        }
    }

    #[test]
    fn fit_recovers_planted_two_dim_manifold() {
        let mut rng = StdRng::seed_from_u64(53);
        let mean0 = random_pose(&mut rng, 0.8);
        // Commuting generators: rotation about z and translation along z.
        let xi1 = Twist::new(Vector3::new(0.0, 0.0, 1.0), Vector3::zeros());
        let xi2 = Twist::new(Vector3::zeros(), Vector3::new(0.0, 0.0, 1.0));
        let poses: Vec<_> = (0..200)
            .map(|_| {
                let a = rng.random_range(-0.5..0.5_f64);
                let b = rng.random_range(-0.05..0.05_f64);
                mean0.compose(&Twist::new(xi1.omega * a, xi2.v * b).exp())
            })
            .collect();
        let dataset = dataset_from_object_poses(&poses);
        let (manifold, losses) = fit_task_manifold(&dataset).unwrap();
        let argmin = losses
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap()
            .0;
        assert_eq!(argmin, 2);
        assert!((losses[0] - 1.0).abs() < 1e-9);
        assert!((losses[6] - 1.0).abs() < 1e-9);
        for j in 2..6 {
            assert!(manifold.singular_values()[j] < 1e-8);
        }
        let basis_residual =
            (manifold.basis().transpose() * manifold.basis() - Matrix6::identity()).norm();
        assert!(basis_residual < 1e-10);
    }

    #[test]
    fn fit_is_reproducible_under_row_permutation() {
        let mut rng = StdRng::seed_from_u64(59);
        let poses: Vec<_> = (0..60).map(|_| random_pose(&mut rng, 0.6)).collect();
        let mut shuffled = poses.clone();
        shuffled.reverse();
        shuffled.swap(3, 40);
        let (m1, _) = fit_task_manifold(&dataset_from_object_poses(&poses)).unwrap();
        let (m2, _) = fit_task_manifold(&dataset_from_object_poses(&shuffled)).unwrap();
        assert!((m1.basis() - m2.basis()).abs().max() < 1e-9);
    }

    #[test]
    fn hat_consistency_with_twist_vector_layout() {
        // Twist 6-vectors stack omega first; guard the layout.
        let t = Twist::new(Vector3::new(1.0, 2.0, 3.0), Vector3::new(4.0, 5.0, 6.0));
        assert_eq!(t.to_vector().as_slice(), &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        assert_eq!(hat(&t.omega)[(1, 0)], 3.0);
    }
}
