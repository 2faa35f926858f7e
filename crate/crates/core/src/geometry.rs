//! Room, access point grid, user placement and reconfigurable detector layouts.
//!
//! Everything here is plain geometry. Channel physics lives in [`crate::channel`].

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::{Point3, Unit, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Desk-height receiving plane used when a configuration does not override it.
pub const DEFAULT_RECEIVE_HEIGHT_M: f64 = 0.85;

/// Rectangular room; the ceiling sits at `height_m` and the floor at zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Room {
    pub length_m: f64,
    pub width_m: f64,
    pub height_m: f64,
}

impl Room {
    pub fn new(length_m: f64, width_m: f64, height_m: f64) -> Result<Self> {
        for (name, v) in [("length", length_m), ("width", width_m), ("height", height_m)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid("room", format!("{name} must be positive, got {v}")));
            }
        }
        Ok(Room { length_m, width_m, height_m })
    }

    pub fn center(&self, z: f64) -> Point3<f64> {
        Point3::new(self.length_m / 2.0, self.width_m / 2.0, z)
    }

    pub fn contains_footprint(&self, p: &Point3<f64>) -> bool {
        (0.0..=self.length_m).contains(&p.x) && (0.0..=self.width_m).contains(&p.y)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AccessPoint {
    pub id: usize,
    pub position: Point3<f64>,
    /// Beam boresight; straight down for ceiling-mounted emitters.
    pub orientation: Unit<Vector3<f64>>,
}

impl AccessPoint {
    pub fn downward(id: usize, position: Point3<f64>) -> Self {
        AccessPoint { id, position, orientation: Unit::new_unchecked(-Vector3::z()) }
    }
}

/// Reconfigurable detector: several photodiodes behind one processing chain.
/// Selecting photodiode `m` is selecting preset mode `m`.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectorConfig {
    orientations: Vec<Unit<Vector3<f64>>>,
    /// Field-of-view half-angle in radians.
    pub fov: f64,
    /// Physical photodiode area in m².
    pub area_m2: f64,
    pub concentrator_gain: f64,
}

impl DetectorConfig {
    pub fn new(orientations: Vec<Unit<Vector3<f64>>>, fov: f64, area_m2: f64, concentrator_gain: f64) -> Result<Self> {
        if orientations.is_empty() {
            return Err(Error::invalid("detector", "needs at least one preset mode"));
        }
        if !(fov > 0.0 && fov <= FRAC_PI_2) {
            return Err(Error::invalid("detector", format!("field of view {fov} rad outside (0, pi/2]")));
        }
        if !(area_m2 >= 0.0 && area_m2.is_finite()) {
            return Err(Error::invalid("detector", format!("area {area_m2} must be non-negative")));
        }
        if !(concentrator_gain > 0.0 && concentrator_gain.is_finite()) {
            return Err(Error::invalid("detector", "concentrator gain must be positive"));
        }
        for (m, n) in orientations.iter().enumerate() {
            if n.z < -1e-12 {
                return Err(Error::invalid("detector", format!("mode {m} points below the horizon")));
            }
        }
        for i in 0..orientations.len() {
            for j in (i + 1)..orientations.len() {
                if orientations[i].dot(&orientations[j]) > 1.0 - 1e-12 {
                    return Err(Error::invalid("detector", format!("modes {i} and {j} share the same orientation")));
                }
            }
        }
        Ok(DetectorConfig { orientations, fov, area_m2, concentrator_gain })
    }

    /// Builds a detector from `(azimuth, elevation)` pairs in radians.
    pub fn from_angles(angles: &[(f64, f64)], fov: f64, area_m2: f64, concentrator_gain: f64) -> Result<Self> {
        let orientations = angles.iter().map(|&(az, el)| unit_from_angles(az, el)).collect();
        Self::new(orientations, fov, area_m2, concentrator_gain)
    }

    /// Skips the distinctness check. Only useful for exercising rank-deficient detectors.
    pub fn new_unchecked(
        orientations: Vec<Unit<Vector3<f64>>>,
        fov: f64,
        area_m2: f64,
        concentrator_gain: f64,
    ) -> Self {
        DetectorConfig { orientations, fov, area_m2, concentrator_gain }
    }

    pub fn num_modes(&self) -> usize {
        self.orientations.len()
    }

    pub fn orientations(&self) -> &[Unit<Vector3<f64>>] {
        &self.orientations
    }

    pub fn with_area(&self, area_m2: f64) -> Self {
        DetectorConfig { area_m2, ..self.clone() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UserTerminal {
    pub id: usize,
    pub position: Point3<f64>,
    pub detector: DetectorConfig,
}

pub fn unit_from_angles(azimuth: f64, elevation: f64) -> Unit<Vector3<f64>> {
    Unit::new_normalize(Vector3::new(elevation.cos() * azimuth.cos(), elevation.cos() * azimuth.sin(), elevation.sin()))
}

/// Cell-centred `rows x cols` grid on the ceiling. Row index runs along the room length,
/// ids are row-major.
pub fn place_aps_grid(room: &Room, rows: usize, cols: usize) -> Result<Vec<AccessPoint>> {
    if rows == 0 || cols == 0 {
        return Err(Error::invalid("AP grid", format!("{rows}x{cols} must have at least one cell")));
    }
    let mut aps = Vec::with_capacity(rows * cols);
    for i in 0..rows {
        for j in 0..cols {
            let x = (i as f64 + 0.5) * room.length_m / rows as f64;
            let y = (j as f64 + 0.5) * room.width_m / cols as f64;
            aps.push(AccessPoint::downward(i * cols + j, Point3::new(x, y, room.height_m)));
        }
    }
    Ok(aps)
}

/// Drops `k` users i.i.d. uniformly over the room footprint at `receive_height_m`.
pub fn place_users_uniform(
    room: &Room,
    k: usize,
    receive_height_m: f64,
    seed: u64,
    detector: &DetectorConfig,
) -> Result<Vec<UserTerminal>> {
    if k == 0 {
        return Err(Error::invalid("user placement", "need at least one user"));
    }
    if !(receive_height_m >= 0.0 && receive_height_m < room.height_m) {
        return Err(Error::invalid(
            "user placement",
            format!("receive height {receive_height_m} must lie in [0, {})", room.height_m),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..k)
        .map(|id| {
            let x = rng.random::<f64>() * room.length_m;
            let y = rng.random::<f64>() * room.width_m;
            UserTerminal { id, position: Point3::new(x, y, receive_height_m), detector: detector.clone() }
        })
        .collect())
}

/// Photodiode normals for an `num_modes`-mode detector.
///
/// Odd counts give one zenith photodiode followed by a ring of `num_modes - 1`; even counts
/// put every photodiode on the ring. Ring members sit `tilt` off zenith at azimuths
/// `2*pi*j/ring_len`.
pub fn pyramid_orientations(num_modes: usize, tilt: f64) -> Result<Vec<Unit<Vector3<f64>>>> {
    if num_modes == 0 {
        return Err(Error::invalid("detector layout", "num_modes must be at least 1"));
    }
    if !(0.0..FRAC_PI_2).contains(&tilt) {
        return Err(Error::invalid("detector layout", format!("tilt {tilt} rad outside [0, pi/2)")));
    }
    let mut out = Vec::with_capacity(num_modes);
    let ring_len = if num_modes % 2 == 1 {
        out.push(Unit::new_unchecked(Vector3::z()));
        num_modes - 1
    } else {
        num_modes
    };
    let elevation = FRAC_PI_2 - tilt;
    for j in 0..ring_len {
        let azimuth = 2.0 * PI * j as f64 / ring_len as f64;
        out.push(unit_from_angles(azimuth, elevation));
    }
    Ok(out)
}
