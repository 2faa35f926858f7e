//! Line-of-sight optical channel gains.
//!
//! Gains are DC gains already multiplied by the photodiode responsivity, so a
//! [`ChannelSet`] entry is in A/W. Rate formulas take `P_str` as electrical power per
//! stream (optical power squared), which makes `P_str * h^2` a current variance in A².

use std::f64::consts::PI;

use nalgebra::{DMatrix, Point3, Unit, Vector3};

use crate::error::{Error, Result};
use crate::geometry::{AccessPoint, DetectorConfig, UserTerminal};

/// Relative singular-value floor below which a channel matrix counts as rank deficient.
pub const RANK_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BeamModel {
    /// Generalised Lambertian emitter, half-power semi-angle in radians.
    Lambertian { half_power_angle: f64 },
    /// Fundamental-mode Gaussian beam (VCSEL), waist and wavelength in metres.
    Gaussian { waist_m: f64, wavelength_m: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmitterModel {
    pub beam: BeamModel,
    /// Optical power per stream in W.
    pub optical_power_w: f64,
    /// Photodiode responsivity in A/W.
    pub responsivity: f64,
}

impl EmitterModel {
    pub fn new(beam: BeamModel, optical_power_w: f64, responsivity: f64) -> Result<Self> {
        match beam {
            BeamModel::Lambertian { half_power_angle } => {
                if !(half_power_angle > 0.0 && half_power_angle < PI / 2.0) {
                    return Err(Error::invalid("emitter", "half-power semi-angle must lie in (0, pi/2)"));
                }
            }
            BeamModel::Gaussian { waist_m, wavelength_m } => {
                if !(waist_m > 0.0 && wavelength_m > 0.0) {
                    return Err(Error::invalid("emitter", "beam waist and wavelength must be positive"));
                }
            }
        }
        if !(optical_power_w > 0.0) {
            return Err(Error::invalid("emitter", "optical power must be positive"));
        }
        if !(responsivity > 0.0) {
            return Err(Error::invalid("emitter", "responsivity must be positive"));
        }
        Ok(EmitterModel { beam, optical_power_w, responsivity })
    }

    /// Electrical power per stream, `P_opt^2`.
    pub fn stream_power(&self) -> f64 {
        self.optical_power_w * self.optical_power_w
    }
}

/// Lambertian order `n = -ln 2 / ln cos(half_power_angle)`.
pub fn lambertian_order(half_power_angle: f64) -> f64 {
    -std::f64::consts::LN_2 / half_power_angle.cos().ln()
}

/// Angle between the photodiode normal and the direction back to the AP.
pub fn incidence_angle(ap: &AccessPoint, user_position: &Point3<f64>, normal: &Unit<Vector3<f64>>) -> f64 {
    let to_ap = ap.position - user_position;
    let d = to_ap.norm();
    (to_ap.dot(normal) / d).clamp(-1.0, 1.0).acos()
}

/// LoS gain from `ap` to the photodiode with normal `mode_orientation` at `user_position`.
///
/// Exactly zero beyond the detector field of view or behind the emitter.
pub fn los_gain(
    ap: &AccessPoint,
    user_position: &Point3<f64>,
    mode_orientation: &Unit<Vector3<f64>>,
    detector: &DetectorConfig,
    emitter: &EmitterModel,
) -> Result<f64> {
    let ray = user_position - ap.position;
    let d = ray.norm();
    if d == 0.0 || !d.is_finite() {
        return Err(Error::DegenerateGeometry(format!("user coincides with AP {}", ap.id)));
    }
    if user_position.z >= ap.position.z {
        return Err(Error::DegenerateGeometry(format!("user is not below AP {}", ap.id)));
    }
    let cos_incidence = -ray.dot(mode_orientation) / d;
    if cos_incidence <= 0.0 || cos_incidence.clamp(-1.0, 1.0).acos() > detector.fov {
        return Ok(0.0);
    }
    let axial = ray.dot(&ap.orientation);
    if axial <= 0.0 {
        return Ok(0.0);
    }
    let collected = detector.area_m2 * detector.concentrator_gain * cos_incidence;
    let gain = match emitter.beam {
        BeamModel::Lambertian { half_power_angle } => {
            let n = lambertian_order(half_power_angle);
            let cos_tx = axial / d;
            (n + 1.0) / (2.0 * PI * d * d) * cos_tx.powf(n) * collected
        }
        BeamModel::Gaussian { waist_m, wavelength_m } => {
            let rayleigh = PI * waist_m * waist_m / wavelength_m;
            let w2 = waist_m * waist_m * (1.0 + (axial / rayleigh).powi(2));
            let r2 = (d * d - axial * axial).max(0.0);
            collected * 2.0 / (PI * w2) * (-2.0 * r2 / w2).exp()
        }
    };
    Ok(gain * emitter.responsivity)
}

/// Per-user channel matrices, rows indexed by preset mode and columns by AP id.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSet {
    gains: Vec<DMatrix<f64>>,
    incidence: Vec<DMatrix<f64>>,
    pub noise_variance: f64,
    rank_deficient: Vec<bool>,
}

impl ChannelSet {
    /// Wraps precomputed matrices; incidence angles are left at zero and rank flags are
    /// evaluated on the leading square block.
    pub fn from_matrices(gains: Vec<DMatrix<f64>>, noise_variance: f64) -> Self {
        let rank_deficient = gains
            .iter()
            .map(|h| {
                let n = h.nrows().min(h.ncols());
                is_rank_deficient(&h.view((0, 0), (n, n)).into_owned())
            })
            .collect();
        let incidence = gains.iter().map(|h| DMatrix::zeros(h.nrows(), h.ncols())).collect();
        ChannelSet { gains, incidence, noise_variance, rank_deficient }
    }

    pub fn num_users(&self) -> usize {
        self.gains.len()
    }

    /// Full `M x L` matrix for `user`.
    pub fn matrix(&self, user: usize) -> &DMatrix<f64> {
        &self.gains[user]
    }

    pub fn gain(&self, user: usize, mode: usize, ap: usize) -> f64 {
        self.gains[user][(mode, ap)]
    }

    pub fn incidence_angles(&self, user: usize) -> &DMatrix<f64> {
        &self.incidence[user]
    }

    /// First `ap_ids.len()` modes against the listed APs, in list order.
    pub fn restricted(&self, user: usize, ap_ids: &[usize]) -> DMatrix<f64> {
        let h = &self.gains[user];
        DMatrix::from_fn(ap_ids.len(), ap_ids.len(), |m, c| h[(m, ap_ids[c])])
    }

    /// Rank flag against the serving set used at construction time.
    pub fn rank_deficient(&self, user: usize) -> bool {
        self.rank_deficient[user]
    }

    /// `max_m sum_l h_l(m)^2 * p_str` over the first `modes` modes and the listed APs.
    pub fn ici_power(&self, user: usize, modes: usize, out_of_cluster: &[usize], p_str: f64) -> f64 {
        let h = &self.gains[user];
        (0..modes.min(h.nrows()))
            .map(|m| out_of_cluster.iter().map(|&l| h[(m, l)].powi(2)).sum::<f64>())
            .fold(0.0, f64::max)
            * p_str
    }
}

/// Evaluates every user against every AP.
///
/// `serving[k]` lists the APs serving user `k`; `None` means the whole network. Each user
/// needs at least as many preset modes as serving APs, and the leading square block
/// (first `|serving|` modes) is checked for numerical rank.
pub fn build_channel_set(
    aps: &[AccessPoint],
    users: &[UserTerminal],
    emitter: &EmitterModel,
    noise_variance: f64,
    serving: Option<&[Vec<usize>]>,
) -> Result<ChannelSet> {
    if !(noise_variance > 0.0) {
        return Err(Error::invalid("channel set", "noise variance must be positive"));
    }
    let all: Vec<usize> = (0..aps.len()).collect();
    let mut gains = Vec::with_capacity(users.len());
    let mut incidence = Vec::with_capacity(users.len());
    let mut rank_deficient = Vec::with_capacity(users.len());
    for (k, user) in users.iter().enumerate() {
        let det = &user.detector;
        let serving_aps = serving.map_or(all.as_slice(), |s| s[k].as_slice());
        if det.num_modes() < serving_aps.len() {
            return Err(Error::NotEnoughModes { user: k, modes: det.num_modes(), aps: serving_aps.len() });
        }
        let mut h = DMatrix::zeros(det.num_modes(), aps.len());
        let mut phi = DMatrix::zeros(det.num_modes(), aps.len());
        for (m, normal) in det.orientations().iter().enumerate() {
            for (l, ap) in aps.iter().enumerate() {
                h[(m, l)] = los_gain(ap, &user.position, normal, det, emitter)?;
                phi[(m, l)] = incidence_angle(ap, &user.position, normal);
            }
        }
        let n = serving_aps.len();
        let square = DMatrix::from_fn(n, n, |m, c| h[(m, serving_aps[c])]);
        rank_deficient.push(is_rank_deficient(&square));
        gains.push(h);
        incidence.push(phi);
    }
    Ok(ChannelSet { gains, incidence, noise_variance, rank_deficient })
}

fn singular_extremes(h: &DMatrix<f64>) -> (f64, f64) {
    if h.is_empty() {
        return (0.0, 0.0);
    }
    let sv = h.singular_values();
    let max = sv.iter().cloned().fold(0.0, f64::max);
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    (min, max)
}

pub fn is_rank_deficient(h: &DMatrix<f64>) -> bool {
    let (min, max) = singular_extremes(h);
    max == 0.0 || min / max < RANK_TOLERANCE
}

/// `sigma_max / sigma_min`, or `+inf` when the matrix is singular to working precision.
pub fn condition_number(h: &DMatrix<f64>) -> f64 {
    let (min, max) = singular_extremes(h);
    if max == 0.0 || min <= max * f64::EPSILON * h.nrows().max(h.ncols()) as f64 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Condition number of the square block formed by the first `L` modes against all `L` APs.
pub fn mode_condition_number(channel_set: &ChannelSet, user: usize) -> f64 {
    let h = channel_set.matrix(user);
    let n = h.nrows().min(h.ncols());
    condition_number(&h.view((0, 0), (n, n)).into_owned())
}
