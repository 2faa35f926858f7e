//! Achievable BIA rates.
//!
//! A user decodes one resource block of `L` slots. Its `L-1` Block-1 measurements carry the
//! other `K-1` users' symbols, which it removes with the Block-2 measurements; each removal
//! adds a copy of the noise, so the effective noise covariance over the resource block is
//! `diag(K, .., K, 1) * (sigma^2 + sigma_ici^2)`. Each user owns `(L-1)^(K-1)` resource
//! blocks out of `T` slots, giving the pre-log factor `1 / (L + K - 1)`.

use nalgebra::{DMatrix, DVector};
use num_bigint::BigUint;

use crate::channel::{is_rank_deficient, los_gain, ChannelSet, EmitterModel};
use crate::error::{Error, Result};
use crate::geometry::{AccessPoint, UserTerminal};
use crate::supersymbol::{block_lengths, coherence_feasible};
use crate::topology::Topology;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    /// Receiver noise variance per slot.
    pub variance: f64,
    /// Inter-cluster interference power treated as extra noise.
    pub ici: f64,
}

impl NoiseModel {
    pub fn new(variance: f64) -> Self {
        NoiseModel { variance, ici: 0.0 }
    }

    pub fn with_ici(self, ici: f64) -> Self {
        NoiseModel { ici, ..self }
    }

    pub fn per_slot(&self) -> f64 {
        self.variance + self.ici
    }

    /// Diagonal of the effective covariance over one resource block of `num_aps` slots.
    pub fn resource_block_covariance(&self, num_aps: usize, num_users: usize) -> DVector<f64> {
        let s = self.per_slot();
        DVector::from_fn(num_aps, |i, _| if i + 1 < num_aps { num_users as f64 * s } else { s })
    }
}

/// `log2 det(I + p H H^T R^-1)` with diagonal `R`, via Cholesky of the symmetric form.
fn log2_det_gain(h: &DMatrix<f64>, p_str: f64, covariance: &DVector<f64>) -> f64 {
    let n = h.nrows();
    let scale = covariance.map(|r| 1.0 / r.sqrt());
    let whitened = DMatrix::from_fn(n, h.ncols(), |i, j| h[(i, j)] * scale[i]);
    let m = DMatrix::identity(n, n) + (&whitened * whitened.transpose()) * p_str;
    let ln_det = match m.clone().cholesky() {
        Some(chol) => 2.0 * chol.l().diagonal().iter().map(|d| d.ln()).sum::<f64>(),
        None => m.lu().determinant().ln(),
    };
    ln_det / std::f64::consts::LN_2
}

/// Per-slot achievable rate of one user in a BIA cluster with `num_aps` APs and
/// `num_users` users; `h` is its `L x L` mode-by-AP matrix.
pub fn bia_user_rate(
    h: &DMatrix<f64>,
    p_str: f64,
    noise: &NoiseModel,
    num_aps: usize,
    num_users: usize,
) -> Result<f64> {
    if h.nrows() != num_aps || h.ncols() != num_aps {
        return Err(Error::invalid("channel matrix", format!("expected {num_aps}x{num_aps}, got {:?}", h.shape())));
    }
    if h.iter().any(|&g| !(g >= 0.0)) {
        return Err(Error::invalid("channel matrix", "IM/DD gains must be non-negative"));
    }
    if !(p_str > 0.0) {
        return Err(Error::invalid("stream power", "must be positive"));
    }
    if !(noise.variance > 0.0 && noise.ici >= 0.0) {
        return Err(Error::invalid("noise model", "covariance must be positive definite"));
    }
    if num_users == 0 || (num_aps < 2 && num_users > 1) {
        return Err(Error::TooFewAps { aps: num_aps, users: num_users });
    }
    let cov = noise.resource_block_covariance(num_aps, num_users);
    let rate = log2_det_gain(h, p_str, &cov) / (num_aps + num_users - 1) as f64;
    Ok(rate.max(0.0))
}

/// Round-robin rate for a cluster that has a single AP.
pub fn tdma_user_rate(gain: f64, p_str: f64, noise: &NoiseModel, num_users: usize) -> f64 {
    (1.0 + p_str * gain * gain / noise.per_slot()).log2() / num_users as f64
}

/// Interference from `out_of_cluster` APs, worst case over the first `modes` preset modes.
pub fn ici_power(
    user: &UserTerminal,
    modes: usize,
    out_of_cluster: &[AccessPoint],
    emitter: &EmitterModel,
    p_str: f64,
) -> Result<f64> {
    let det = &user.detector;
    let mut worst: f64 = 0.0;
    for normal in det.orientations().iter().take(modes) {
        let mut total = 0.0;
        for ap in out_of_cluster {
            total += los_gain(ap, &user.position, normal, det, emitter)?.powi(2);
        }
        worst = worst.max(total);
    }
    Ok(worst * p_str)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateParams {
    pub p_str: f64,
    pub noise_variance: f64,
    pub slot_duration_s: f64,
    pub coherence_time_s: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClusterScheme {
    Bia,
    /// Single AP, users served in turn.
    Tdma,
    Idle,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UserRate {
    pub user: usize,
    pub cluster: usize,
    /// Bits per slot.
    pub rate: f64,
    pub dof_prefactor: f64,
    pub block_len: BigUint,
    pub feasible: bool,
    pub rank_deficient: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterSummary {
    pub cluster: usize,
    pub num_aps: usize,
    pub num_users: usize,
    pub scheme: ClusterScheme,
    pub block_len: BigUint,
    pub feasible: bool,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RateReport {
    /// Ordered by user id.
    pub users: Vec<UserRate>,
    pub clusters: Vec<ClusterSummary>,
    pub sum_rate: f64,
}

impl RateReport {
    pub fn mean_rate(&self) -> f64 {
        if self.users.is_empty() {
            0.0
        } else {
            self.sum_rate / self.users.len() as f64
        }
    }

    pub fn max_block_len(&self) -> BigUint {
        self.clusters.iter().map(|c| c.block_len.clone()).max().unwrap_or_default()
    }
}

/// Transmission block length of one cluster: BIA block, `K_c` round-robin slots for a
/// single-AP cluster, zero for an idle one.
pub fn cluster_block_len(num_aps: usize, num_users: usize) -> Result<BigUint> {
    match (num_aps, num_users) {
        (_, 0) => Ok(BigUint::default()),
        (1, k) => Ok(BigUint::from(k)),
        (l, k) => Ok(block_lengths(l, k)?.total),
    }
}

/// Runs BIA independently inside every cluster, treating other clusters' APs as noise.
pub fn evaluate_network(topology: &Topology, channels: &ChannelSet, params: &RateParams) -> Result<RateReport> {
    let base_noise = NoiseModel::new(params.noise_variance);
    let mut users = Vec::with_capacity(channels.num_users());
    let mut clusters = Vec::with_capacity(topology.clusters.len());
    let total_aps = if channels.num_users() > 0 { channels.matrix(0).ncols() } else { 0 };

    for cluster in &topology.clusters {
        let (l, k) = (cluster.ap_ids.len(), cluster.user_ids.len());
        let block_len = cluster_block_len(l, k)?;
        let feasible = coherence_feasible(&block_len, params.slot_duration_s, params.coherence_time_s)?;
        let scheme = match (l, k) {
            (_, 0) => ClusterScheme::Idle,
            (1, _) => ClusterScheme::Tdma,
            _ => ClusterScheme::Bia,
        };
        clusters.push(ClusterSummary {
            cluster: cluster.id,
            num_aps: l,
            num_users: k,
            scheme,
            block_len: block_len.clone(),
            feasible,
        });
        if k == 0 {
            continue;
        }
        let outside: Vec<usize> = (0..total_aps).filter(|a| !cluster.ap_ids.contains(a)).collect();
        for &u in &cluster.user_ids {
            let modes = channels.matrix(u).nrows();
            if modes < l {
                return Err(Error::NotEnoughModes { user: u, modes, aps: l });
            }
            let noise = base_noise.with_ici(channels.ici_power(u, l, &outside, params.p_str));
            let h = channels.restricted(u, &cluster.ap_ids);
            let (rate, prefactor) = match scheme {
                ClusterScheme::Tdma => (tdma_user_rate(h[(0, 0)], params.p_str, &noise, k), 1.0 / k as f64),
                _ => (bia_user_rate(&h, params.p_str, &noise, l, k)?, 1.0 / (l + k - 1) as f64),
            };
            users.push(UserRate {
                user: u,
                cluster: cluster.id,
                rate,
                dof_prefactor: prefactor,
                block_len: block_len.clone(),
                feasible,
                rank_deficient: is_rank_deficient(&h),
            });
        }
    }
    users.sort_by_key(|r| r.user);
    let sum_rate = users.iter().map(|r| r.rate).sum();
    Ok(RateReport { users, clusters, sum_rate })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_h(n: usize, seed: u64) -> DMatrix<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        DMatrix::from_fn(n, n, |_, _| rng.random::<f64>())
    }

    #[test]
    fn zero_channel_zero_rate() {
        let r = bia_user_rate(&DMatrix::zeros(3, 3), 10.0, &NoiseModel::new(1.0), 3, 2).unwrap();
        assert_eq!(r, 0.0);
    }

    #[test]
    fn identity_two_by_two() {
        let r = bia_user_rate(&DMatrix::identity(2, 2), 1.0, &NoiseModel::new(1.0), 2, 2).unwrap();
        // R_z = diag(2, 1): det(I + diag(1/2, 1)) = 3
        assert_relative_eq!(r, 3f64.log2() / 3.0, max_relative = 1e-14);
        assert_relative_eq!(r, 0.528, epsilon = 1e-3);
    }

    #[test]
    fn single_user_formula() {
        let h = random_h(3, 4);
        let r = bia_user_rate(&h, 5.0, &NoiseModel::new(0.5), 3, 1).unwrap();
        let m = DMatrix::identity(3, 3) + &h * h.transpose() * (5.0 / 0.5);
        assert_relative_eq!(r, m.determinant().log2() / 3.0, max_relative = 1e-12);
    }

    #[test]
    fn rejects_bad_inputs() {
        let h = DMatrix::from_row_slice(2, 2, &[1.0, -0.1, 0.0, 1.0]);
        assert!(bia_user_rate(&h, 1.0, &NoiseModel::new(1.0), 2, 2).is_err());
        assert!(bia_user_rate(&DMatrix::identity(2, 2), 1.0, &NoiseModel::new(0.0), 2, 2).is_err());
        assert!(bia_user_rate(&DMatrix::identity(2, 2), 1.0, &NoiseModel::new(1.0), 3, 2).is_err());
    }

    #[test]
    fn covariance_shape() {
        let c = NoiseModel::new(0.5).with_ici(0.25).resource_block_covariance(4, 3);
        assert_eq!(c.as_slice(), &[2.25, 2.25, 2.25, 0.75]);
    }

    #[test]
    fn high_snr_slope_two_by_two() {
        let h = random_h(2, 9);
        let n = NoiseModel::new(1.0);
        let lo = bia_user_rate(&h, 1e4, &n, 2, 2).unwrap();
        let hi = bia_user_rate(&h, 1e6, &n, 2, 2).unwrap();
        let slope = (hi - lo) / (1e6f64.log2() - 1e4f64.log2());
        assert_relative_eq!(slope, 2.0 / 3.0, max_relative = 0.05);
    }

    #[test]
    fn more_users_hurts() {
        let h = random_h(4, 1);
        let n = NoiseModel::new(1.0);
        let rates: Vec<f64> = (2..=6).map(|k| bia_user_rate(&h, 100.0, &n, 4, k).unwrap()).collect();
        assert!(rates.windows(2).all(|w| w[1] < w[0]), "{rates:?}");
    }

    #[test]
    fn tdma_rate() {
        let n = NoiseModel::new(1.0);
        assert_relative_eq!(tdma_user_rate(1.0, 3.0, &n, 2), 1.0, max_relative = 1e-14);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn matrix(n: usize) -> impl Strategy<Value = DMatrix<f64>> {
            proptest::collection::vec(0.0f64..1.0, n * n).prop_map(move |v| DMatrix::from_vec(n, n, v))
        }

        proptest! {
            #[test]
            fn nondecreasing_in_power(h in matrix(3), k in 1usize..5) {
                let n = NoiseModel::new(1.0);
                let mut prev = 0.0;
                for p in [0.1, 1.0, 10.0, 100.0, 1e3, 1e4] {
                    let r = bia_user_rate(&h, p, &n, 3, k).unwrap();
                    prop_assert!(r >= prev - 1e-12);
                    prev = r;
                }
            }

            #[test]
            fn permutation_invariant(h in matrix(4), seed in any::<u64>()) {
                // Permute the first L-1 modes (rows) and all APs (columns); the Block-2 mode
                // keeps its unequal noise entry.
                use rand::seq::SliceRandom;
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let mut rows: Vec<usize> = (0..3).collect();
                rows.shuffle(&mut rng);
                rows.push(3);
                let mut cols: Vec<usize> = (0..4).collect();
                cols.shuffle(&mut rng);
                let p = DMatrix::from_fn(4, 4, |i, j| h[(rows[i], cols[j])]);
                let n = NoiseModel::new(0.3).with_ici(0.1);
                let a = bia_user_rate(&h, 50.0, &n, 4, 3).unwrap();
                let b = bia_user_rate(&p, 50.0, &n, 4, 3).unwrap();
                prop_assert!((a - b).abs() <= 1e-9 * a.abs().max(1e-12));
            }

            #[test]
            fn ici_never_helps(h in matrix(3), ici in 0.0f64..10.0) {
                let n = NoiseModel::new(1.0);
                let a = bia_user_rate(&h, 100.0, &n, 3, 2).unwrap();
                let b = bia_user_rate(&h, 100.0, &n.with_ici(ici), 3, 2).unwrap();
                prop_assert!(b <= a + 1e-12);
            }
        }
    }
}
