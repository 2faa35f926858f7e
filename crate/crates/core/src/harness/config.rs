//! Flat `key = value` scenario files.
//!
//! Lines starting with `#` are comments. Lengths are in metres, times in seconds, powers in
//! watts, angles in degrees (keys ending in `_deg`). Keys not present in a file fall back to
//! [`ScenarioConfig::default`], except for the keys in [`REQUIRED_KEYS`].

use std::collections::BTreeMap;
use std::str::FromStr;

use thiserror::Error;

use crate::channel::{los_gain, BeamModel, EmitterModel};
use crate::geometry::{
    place_aps_grid, pyramid_orientations, AccessPoint, DetectorConfig, Room, DEFAULT_RECEIVE_HEIGHT_M,
};
use crate::topology::TopologyKind;

pub const REQUIRED_KEYS: [&str; 6] = ["room_length", "room_width", "room_height", "ap_rows", "ap_cols", "users"];

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConfigError {
    #[error("missing required key `{0}`")]
    Missing(String),
    #[error("unknown key `{0}`")]
    Unknown(String),
    #[error("key `{0}` given more than once")]
    Duplicate(String),
    #[error("line {line}: expected `key = value`")]
    Syntax { line: usize },
    #[error("key `{key}`: {constraint}")]
    Invalid { key: String, constraint: String },
}

impl ConfigError {
    pub fn key(&self) -> Option<&str> {
        match self {
            ConfigError::Missing(k) | ConfigError::Unknown(k) | ConfigError::Duplicate(k) => Some(k),
            ConfigError::Invalid { key, .. } => Some(key),
            ConfigError::Syntax { .. } => None,
        }
    }
}

fn invalid(key: &str, constraint: impl Into<String>) -> ConfigError {
    ConfigError::Invalid { key: key.to_string(), constraint: constraint.into() }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmitterKind {
    Gaussian,
    Lambertian,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub scenario: String,
    pub room_length: f64,
    pub room_width: f64,
    pub room_height: f64,
    pub ap_rows: usize,
    pub ap_cols: usize,
    pub users: usize,
    pub receive_height: f64,
    pub detector_modes: usize,
    pub detector_tilt_deg: f64,
    pub detector_fov_deg: f64,
    pub detector_area: f64,
    pub concentrator_gain: f64,
    pub emitter: EmitterKind,
    pub beam_waist: f64,
    pub wavelength: f64,
    pub half_power_angle_deg: f64,
    pub optical_power: f64,
    pub responsivity: f64,
    /// Electrical SNR at the room centre (zenith photodiode, strongest AP) used to derive
    /// the noise variance when `noise_variance` is not given.
    pub snr_db: f64,
    pub noise_variance: Option<f64>,
    pub slot_duration: f64,
    pub coherence_time: f64,
    pub topology: TopologyKind,
    pub groups: usize,
    pub drops: usize,
    pub seed: u64,
    pub kmeans_max_iters: usize,
    pub fig5_groups_max: usize,
    pub fig6_users_max: usize,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            scenario: "default".to_string(),
            room_length: 5.0,
            room_width: 5.0,
            room_height: 3.0,
            ap_rows: 4,
            ap_cols: 4,
            users: 10,
            receive_height: DEFAULT_RECEIVE_HEIGHT_M,
            detector_modes: 17,
            detector_tilt_deg: 35.0,
            detector_fov_deg: 60.0,
            detector_area: 1e-4,
            concentrator_gain: 1.0,
            emitter: EmitterKind::Gaussian,
            beam_waist: 1e-6,
            wavelength: 830e-9,
            half_power_angle_deg: 60.0,
            optical_power: 1e-3,
            responsivity: 0.6,
            snr_db: 30.0,
            noise_variance: None,
            slot_duration: 1e-6,
            coherence_time: 10e-3,
            topology: TopologyKind::UserCentric,
            groups: 4,
            drops: 50,
            seed: 1,
            kmeans_max_iters: 100,
            fig5_groups_max: 9,
            fig6_users_max: 10,
        }
    }
}

fn parse_num<T: FromStr>(key: &str, raw: &str) -> Result<T, ConfigError> {
    raw.parse().map_err(|_| invalid(key, format!("cannot parse `{raw}` as a number")))
}

impl ScenarioConfig {
    /// Parses and validates a config file body.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut entries = BTreeMap::new();
        for (idx, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or(ConfigError::Syntax { line: idx + 1 })?;
            let (key, value) = (key.trim(), value.trim());
            if key.is_empty() {
                return Err(ConfigError::Syntax { line: idx + 1 });
            }
            if entries.insert(key.to_string(), value.to_string()).is_some() {
                return Err(ConfigError::Duplicate(key.to_string()));
            }
        }
        for key in REQUIRED_KEYS {
            if !entries.contains_key(key) {
                return Err(ConfigError::Missing(key.to_string()));
            }
        }
        let mut cfg = ScenarioConfig::default();
        for (key, raw) in &entries {
            cfg.set(key, raw)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Overrides one key with its textual value.
    pub fn set(&mut self, key: &str, raw: &str) -> Result<(), ConfigError> {
        match key {
            "scenario" => {
                if raw.is_empty() || raw.contains([',', '"', '\n']) {
                    return Err(invalid(key, "must be a non-empty name without commas or quotes"));
                }
                self.scenario = raw.to_string();
            }
            "room_length" => self.room_length = parse_num(key, raw)?,
            "room_width" => self.room_width = parse_num(key, raw)?,
            "room_height" => self.room_height = parse_num(key, raw)?,
            "ap_rows" => self.ap_rows = parse_num(key, raw)?,
            "ap_cols" => self.ap_cols = parse_num(key, raw)?,
            "users" => self.users = parse_num(key, raw)?,
            "receive_height" => self.receive_height = parse_num(key, raw)?,
            "detector_modes" => self.detector_modes = parse_num(key, raw)?,
            "detector_tilt_deg" => self.detector_tilt_deg = parse_num(key, raw)?,
            "detector_fov_deg" => self.detector_fov_deg = parse_num(key, raw)?,
            "detector_area" => self.detector_area = parse_num(key, raw)?,
            "concentrator_gain" => self.concentrator_gain = parse_num(key, raw)?,
            "emitter" => {
                self.emitter = match raw {
                    "gaussian" => EmitterKind::Gaussian,
                    "lambertian" => EmitterKind::Lambertian,
                    _ => return Err(invalid(key, "must be `gaussian` or `lambertian`")),
                }
            }
            "beam_waist" => self.beam_waist = parse_num(key, raw)?,
            "wavelength" => self.wavelength = parse_num(key, raw)?,
            "half_power_angle_deg" => self.half_power_angle_deg = parse_num(key, raw)?,
            "optical_power" => self.optical_power = parse_num(key, raw)?,
            "responsivity" => self.responsivity = parse_num(key, raw)?,
            "snr_db" => self.snr_db = parse_num(key, raw)?,
            "noise_variance" => self.noise_variance = Some(parse_num(key, raw)?),
            "slot_duration" => self.slot_duration = parse_num(key, raw)?,
            "coherence_time" => self.coherence_time = parse_num(key, raw)?,
            "topology" => {
                self.topology = match raw {
                    "standard" => TopologyKind::Standard,
                    "nc" => TopologyKind::NetworkCentric,
                    "uc" => TopologyKind::UserCentric,
                    _ => return Err(invalid(key, "must be `standard`, `nc` or `uc`")),
                }
            }
            "groups" => self.groups = parse_num(key, raw)?,
            "drops" => self.drops = parse_num(key, raw)?,
            "seed" => self.seed = parse_num(key, raw)?,
            "kmeans_max_iters" => self.kmeans_max_iters = parse_num(key, raw)?,
            "fig5_groups_max" => self.fig5_groups_max = parse_num(key, raw)?,
            "fig6_users_max" => self.fig6_users_max = parse_num(key, raw)?,
            _ => return Err(ConfigError::Unknown(key.to_string())),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let positive = [
            ("room_length", self.room_length),
            ("room_width", self.room_width),
            ("room_height", self.room_height),
            ("detector_area", self.detector_area),
            ("concentrator_gain", self.concentrator_gain),
            ("beam_waist", self.beam_waist),
            ("wavelength", self.wavelength),
            ("optical_power", self.optical_power),
            ("responsivity", self.responsivity),
            ("slot_duration", self.slot_duration),
            ("coherence_time", self.coherence_time),
        ];
        for (key, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(invalid(key, format!("must be a positive real, got {v}")));
            }
        }
        if let Some(v) = self.noise_variance {
            if !(v.is_finite() && v > 0.0) {
                return Err(invalid("noise_variance", "must be a positive real"));
            }
        }
        if !self.snr_db.is_finite() {
            return Err(invalid("snr_db", "must be finite"));
        }
        if !(self.receive_height >= 0.0 && self.receive_height < self.room_height) {
            return Err(invalid("receive_height", "must lie in [0, room_height)"));
        }
        for (key, v) in [("ap_rows", self.ap_rows), ("ap_cols", self.ap_cols), ("users", self.users)] {
            if v == 0 {
                return Err(invalid(key, "must be at least 1"));
            }
        }
        if self.kmeans_max_iters == 0 {
            return Err(invalid("kmeans_max_iters", "must be at least 1"));
        }
        if self.groups == 0 || self.groups > self.num_aps() {
            return Err(invalid("groups", format!("must lie in 1..={}", self.num_aps())));
        }
        if self.fig5_groups_max == 0 {
            return Err(invalid("fig5_groups_max", "must be at least 1"));
        }
        if self.fig6_users_max == 0 {
            return Err(invalid("fig6_users_max", "must be at least 1"));
        }
        if self.detector_modes < self.num_aps() {
            return Err(invalid(
                "detector_modes",
                format!(
                    "must be at least the number of APs ({}) so the whole network can serve one cluster",
                    self.num_aps()
                ),
            ));
        }
        if !(self.detector_tilt_deg >= 0.0 && self.detector_tilt_deg < 90.0) {
            return Err(invalid("detector_tilt_deg", "must lie in [0, 90)"));
        }
        if !(self.detector_fov_deg > 0.0 && self.detector_fov_deg <= 90.0) {
            return Err(invalid("detector_fov_deg", "must lie in (0, 90]"));
        }
        if !(self.half_power_angle_deg > 0.0 && self.half_power_angle_deg < 90.0) {
            return Err(invalid("half_power_angle_deg", "must lie in (0, 90)"));
        }
        self.detector().map_err(|e| invalid("detector_tilt_deg", e.to_string()))?;
        Ok(())
    }

    pub fn num_aps(&self) -> usize {
        self.ap_rows * self.ap_cols
    }

    pub fn room(&self) -> Room {
        Room::new(self.room_length, self.room_width, self.room_height).expect("validated")
    }

    pub fn aps(&self) -> Vec<AccessPoint> {
        place_aps_grid(&self.room(), self.ap_rows, self.ap_cols).expect("validated")
    }

    pub fn detector(&self) -> crate::Result<DetectorConfig> {
        let orientations = pyramid_orientations(self.detector_modes, self.detector_tilt_deg.to_radians())?;
        DetectorConfig::new(
            orientations,
            self.detector_fov_deg.to_radians(),
            self.detector_area,
            self.concentrator_gain,
        )
    }

    pub fn emitter(&self) -> crate::Result<EmitterModel> {
        let beam = match self.emitter {
            EmitterKind::Gaussian => BeamModel::Gaussian { waist_m: self.beam_waist, wavelength_m: self.wavelength },
            EmitterKind::Lambertian => {
                BeamModel::Lambertian { half_power_angle: self.half_power_angle_deg.to_radians() }
            }
        };
        EmitterModel::new(beam, self.optical_power, self.responsivity)
    }

    /// Configured noise variance, or the one that puts the strongest AP at `snr_db` for a
    /// zenith photodiode at the room centre.
    pub fn noise_variance(&self) -> crate::Result<f64> {
        if let Some(v) = self.noise_variance {
            return Ok(v);
        }
        let emitter = self.emitter()?;
        let det = self.detector()?;
        let zenith = nalgebra::Unit::new_unchecked(nalgebra::Vector3::z());
        let centre = self.room().center(self.receive_height);
        let mut best: f64 = 0.0;
        for ap in self.aps() {
            best = best.max(los_gain(&ap, &centre, &zenith, &det, &emitter)?);
        }
        if best == 0.0 {
            return Err(crate::Error::invalid("noise reference", "no AP reaches the room centre"));
        }
        Ok(emitter.stream_power() * best * best / 10f64.powf(self.snr_db / 10.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "room_length = 5\nroom_width = 5\nroom_height = 3\nap_rows = 4\nap_cols = 4\nusers = 10\n";

    #[test]
    fn minimal_file_gets_defaults() {
        let cfg = ScenarioConfig::parse(MINIMAL).unwrap();
        assert_eq!(cfg, ScenarioConfig::default());
    }

    #[test]
    fn missing_key_is_named() {
        let text = MINIMAL.replace("room_width = 5\n", "");
        let err = ScenarioConfig::parse(&text).unwrap_err();
        assert_eq!(err, ConfigError::Missing("room_width".into()));
        assert_eq!(err.key(), Some("room_width"));
    }

    #[test]
    fn bad_values_are_named() {
        let err = ScenarioConfig::parse(&format!("{MINIMAL}slot_duration = -1\n")).unwrap_err();
        assert_eq!(err.key(), Some("slot_duration"));
        let err = ScenarioConfig::parse(&format!("{MINIMAL}users = many\n")).unwrap_err();
        assert_eq!(err.key(), Some("users"));
        let err = ScenarioConfig::parse(&format!("{MINIMAL}detector_modes = 4\n")).unwrap_err();
        assert_eq!(err.key(), Some("detector_modes"));
        let err = ScenarioConfig::parse(&format!("{MINIMAL}colour = blue\n")).unwrap_err();
        assert_eq!(err, ConfigError::Unknown("colour".into()));
        let err = ScenarioConfig::parse(&format!("{MINIMAL}users = 3\n")).unwrap_err();
        assert_eq!(err, ConfigError::Duplicate("users".into()));
        assert!(matches!(ScenarioConfig::parse("nonsense"), Err(ConfigError::Syntax { line: 1 })));
    }

    #[test]
    fn comments_and_overrides() {
        let text = format!("# room\n{MINIMAL}\ntopology = nc\nemitter = lambertian\nnoise_variance = 1e-14\n");
        let cfg = ScenarioConfig::parse(&text).unwrap();
        assert_eq!(cfg.topology, TopologyKind::NetworkCentric);
        assert_eq!(cfg.emitter, EmitterKind::Lambertian);
        assert_eq!(cfg.noise_variance().unwrap(), 1e-14);
    }

    #[test]
    fn snr_reference() {
        let cfg = ScenarioConfig::default();
        let sigma2 = cfg.noise_variance().unwrap();
        assert!(sigma2 > 0.0);
        let louder = ScenarioConfig { snr_db: 40.0, ..cfg.clone() };
        let ratio = sigma2 / louder.noise_variance().unwrap();
        assert!((ratio - 10.0).abs() < 1e-9);
    }
}
