//! Experiment orchestration and CSV output.
//!
//! Every drop is an independent snapshot: users are placed with a seed derived from the
//! master seed and the drop index, channels are computed once, and each topology under test
//! is evaluated on that snapshot. Drops run in parallel and are merged in drop order, so the
//! output bytes depend only on the configuration.

pub mod config;

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use num_bigint::BigUint;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

pub use config::{ConfigError, EmitterKind, ScenarioConfig};

use crate::channel::{build_channel_set, ChannelSet};
use crate::geometry::{place_users_uniform, AccessPoint, UserTerminal};
use crate::rate::{cluster_block_len, evaluate_network, RateParams, RateReport};
use crate::supersymbol::coherence_feasible;
use crate::topology::{nc_partition, nearest_tiling, uc_topology, Topology, TopologyKind};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Model(#[from] crate::Error),
    #[error("{context}: {source}")]
    Io { context: String, source: io::Error },
}

impl HarnessError {
    /// Process exit status: 1 for invalid input, 2 for I/O failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) | HarnessError::Model(_) => 1,
            HarnessError::Io { .. } => 2,
        }
    }

    fn io(context: impl Into<String>) -> impl FnOnce(io::Error) -> Self {
        let context = context.into();
        move |source| HarnessError::Io { context, source }
    }
}

pub type HarnessResult<T> = std::result::Result<T, HarnessError>;

/// SplitMix64 finaliser; the per-drop seed is `master ^ splitmix64(drop)`.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn drop_seed(master: u64, drop: usize) -> u64 {
    master ^ splitmix64(drop as u64)
}

/// One user in one drop under one topology. Field order is the CSV column order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateRow {
    pub scenario: String,
    pub drop: usize,
    #[serde(rename = "G")]
    pub groups: usize,
    pub kind: TopologyKind,
    pub user: usize,
    pub cluster: usize,
    pub rate_bits_per_slot: f64,
    pub block_len: String,
    pub feasible: bool,
}

pub const RATE_CSV_HEADER: &str = "scenario,drop,G,kind,user,cluster,rate_bits_per_slot,block_len,feasible";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AggregateRow {
    #[serde(rename = "G")]
    pub groups: usize,
    pub kind: TopologyKind,
    pub drops: usize,
    pub mean_user_rate: f64,
    pub mean_sum_rate: f64,
}

impl Serialize for TopologyKind {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ExperimentResult {
    pub rows: Vec<RateRow>,
    pub aggregates: Vec<AggregateRow>,
    /// Human-readable remarks such as skipped points and NC tiling choices.
    pub notes: Vec<String>,
}

impl ExperimentResult {
    fn from_rows(rows: Vec<RateRow>, notes: Vec<String>) -> Self {
        let aggregates = aggregate(&rows);
        ExperimentResult { rows, aggregates, notes }
    }

    pub fn aggregate_for(&self, groups: usize, kind: TopologyKind) -> Option<&AggregateRow> {
        self.aggregates.iter().find(|a| a.groups == groups && a.kind == kind)
    }
}

/// Mean user rate and mean per-drop sum rate for every `(G, kind)`, in order of first
/// appearance.
pub fn aggregate(rows: &[RateRow]) -> Vec<AggregateRow> {
    let mut keys: Vec<(usize, TopologyKind)> = Vec::new();
    for r in rows {
        if !keys.contains(&(r.groups, r.kind)) {
            keys.push((r.groups, r.kind));
        }
    }
    keys.into_iter()
        .map(|(groups, kind)| {
            let selected: Vec<&RateRow> = rows.iter().filter(|r| r.groups == groups && r.kind == kind).collect();
            let total: f64 = selected.iter().map(|r| r.rate_bits_per_slot).sum();
            let mut drops: Vec<usize> = selected.iter().map(|r| r.drop).collect();
            drops.sort_unstable();
            drops.dedup();
            AggregateRow {
                groups,
                kind,
                drops: drops.len(),
                mean_user_rate: total / selected.len() as f64,
                mean_sum_rate: total / drops.len() as f64,
            }
        })
        .collect()
}

/// Everything a drop needs besides the topology.
struct Snapshot {
    aps: Vec<AccessPoint>,
    users: Vec<UserTerminal>,
    channels: ChannelSet,
    seed: u64,
}

fn snapshot(cfg: &ScenarioConfig, drop: usize, users: usize, noise_variance: f64) -> crate::Result<Snapshot> {
    let seed = drop_seed(cfg.seed, drop);
    let aps = cfg.aps();
    let users = place_users_uniform(&cfg.room(), users, cfg.receive_height, seed, &cfg.detector()?)?;
    let channels = build_channel_set(&aps, &users, &cfg.emitter()?, noise_variance, None)?;
    Ok(Snapshot { aps, users, channels, seed })
}

fn rate_params(cfg: &ScenarioConfig, noise_variance: f64) -> crate::Result<RateParams> {
    Ok(RateParams {
        p_str: cfg.emitter()?.stream_power(),
        noise_variance,
        slot_duration_s: cfg.slot_duration,
        coherence_time_s: cfg.coherence_time,
    })
}

/// Builds the topology of `kind` with (nominally) `groups` clusters, or `None` when the
/// snapshot cannot support it.
fn topology_for(
    cfg: &ScenarioConfig,
    snap: &Snapshot,
    kind: TopologyKind,
    groups: usize,
) -> crate::Result<Option<Topology>> {
    Ok(match kind {
        TopologyKind::Standard => Some(Topology::standard(&snap.aps, &snap.users)),
        TopologyKind::NetworkCentric => {
            let (gx, gy) = nearest_tiling(cfg.ap_rows, cfg.ap_cols, groups);
            Some(nc_partition(&snap.aps, cfg.ap_rows, cfg.ap_cols, gx, gy, &snap.users)?)
        }
        TopologyKind::UserCentric => {
            if groups > snap.users.len() || groups > snap.aps.len() {
                None
            } else {
                let seed = snap.seed ^ splitmix64(groups as u64).rotate_left(17);
                Some(uc_topology(&snap.aps, &snap.users, groups, seed, cfg.kmeans_max_iters)?)
            }
        }
    })
}

fn report_rows(
    cfg: &ScenarioConfig,
    drop: usize,
    groups: usize,
    kind: TopologyKind,
    report: &RateReport,
) -> Vec<RateRow> {
    report
        .users
        .iter()
        .map(|u| RateRow {
            scenario: cfg.scenario.clone(),
            drop,
            groups,
            kind,
            user: u.user,
            cluster: u.cluster,
            rate_bits_per_slot: u.rate,
            block_len: u.block_len.to_string(),
            feasible: u.feasible,
        })
        .collect()
}

fn run_drops<F>(cfg: &ScenarioConfig, per_drop: F) -> HarnessResult<Vec<RateRow>>
where
    F: Fn(&Snapshot, usize) -> crate::Result<Vec<RateRow>> + Sync,
{
    let noise_variance = cfg.noise_variance()?;
    let per_drop_rows = (0..cfg.drops)
        .into_par_iter()
        .map(|d| {
            let snap = snapshot(cfg, d, cfg.users, noise_variance)?;
            per_drop(&snap, d)
        })
        .collect::<crate::Result<Vec<_>>>()?;
    Ok(per_drop_rows.into_iter().flatten().collect())
}

/// User rate versus number of groups. `G = 1` is standard BIA; every other `G` is evaluated
/// with both a user-centric topology of exactly `G` clusters and the NC tiling whose cluster
/// count is nearest to `G`.
pub fn run_fig5(cfg: &ScenarioConfig, groups: impl IntoIterator<Item = usize>) -> HarnessResult<ExperimentResult> {
    cfg.validate()?;
    let groups: Vec<usize> = groups.into_iter().filter(|&g| g >= 1).collect();
    let mut notes = Vec::new();
    for &g in groups.iter().filter(|&&g| g > 1) {
        let (gx, gy) = nearest_tiling(cfg.ap_rows, cfg.ap_cols, g);
        if gx * gy != g {
            notes.push(format!("G={g}: NC uses the {gx}x{gy} tiling ({} clusters)", gx * gy));
        }
        if g > cfg.users || g > cfg.num_aps() {
            notes.push(format!("G={g}: UC skipped, needs at most {} users and {} APs", cfg.users, cfg.num_aps()));
        }
    }
    let params = rate_params(cfg, cfg.noise_variance()?)?;
    let rows = run_drops(cfg, |snap, d| {
        let mut rows = Vec::new();
        for &g in &groups {
            let kinds: &[TopologyKind] = if g == 1 {
                &[TopologyKind::Standard]
            } else {
                &[TopologyKind::NetworkCentric, TopologyKind::UserCentric]
            };
            for &kind in kinds {
                if let Some(topology) = topology_for(cfg, snap, kind, g)? {
                    let report = evaluate_network(&topology, &snap.channels, &params)?;
                    rows.extend(report_rows(cfg, d, g, kind, &report));
                }
            }
        }
        Ok(rows)
    })?;
    Ok(ExperimentResult::from_rows(rows, notes))
}

/// Single-topology evaluation of the configured `topology` and `groups`.
pub fn run_scenario(cfg: &ScenarioConfig) -> HarnessResult<ExperimentResult> {
    cfg.validate()?;
    let params = rate_params(cfg, cfg.noise_variance()?)?;
    let kind = cfg.topology;
    let groups = if kind == TopologyKind::Standard { 1 } else { cfg.groups };
    let mut notes = Vec::new();
    if kind == TopologyKind::UserCentric && groups > cfg.users {
        notes.push(format!("G={groups}: UC needs at least as many users; nothing evaluated"));
    }
    let rows = run_drops(cfg, |snap, d| {
        Ok(match topology_for(cfg, snap, kind, groups)? {
            Some(t) => report_rows(cfg, d, groups, kind, &evaluate_network(&t, &snap.channels, &params)?),
            None => Vec::new(),
        })
    })?;
    Ok(ExperimentResult::from_rows(rows, notes))
}

/// Longest cluster block of one topology for one user count.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlockLengthRow {
    #[serde(rename = "K")]
    pub users: usize,
    pub kind: TopologyKind,
    #[serde(rename = "G")]
    pub groups: usize,
    pub drop: usize,
    pub cluster_aps: usize,
    pub cluster_users: usize,
    pub block_len: String,
    pub feasible: bool,
}

pub const BLOCK_CSV_HEADER: &str = "K,kind,G,drop,cluster_aps,cluster_users,block_len,feasible";

#[derive(Debug, Clone, PartialEq, Default)]
pub struct BlockLengthResult {
    pub rows: Vec<BlockLengthRow>,
    pub notes: Vec<String>,
}

impl BlockLengthResult {
    /// Largest block length over drops for `(K, kind)`.
    pub fn max_block_len(&self, users: usize, kind: TopologyKind) -> Option<BigUint> {
        self.rows
            .iter()
            .filter(|r| r.users == users && r.kind == kind)
            .map(|r| r.block_len.parse::<BigUint>().expect("written from a BigUint"))
            .max()
    }
}

/// Transmission block length versus number of users: standard BIA over all APs, and the
/// longest cluster block of NC and UC topologies with the configured `groups`, per drop.
pub fn run_fig6(cfg: &ScenarioConfig, users: impl IntoIterator<Item = usize>) -> HarnessResult<BlockLengthResult> {
    cfg.validate()?;
    let noise_variance = cfg.noise_variance()?;
    let l = cfg.num_aps();
    let g = cfg.groups;
    let mut notes = Vec::new();
    let mut rows = Vec::new();
    for k in users.into_iter().filter(|&k| k >= 1) {
        let block = |aps: usize, users: usize| -> HarnessResult<(String, bool)> {
            let t = cluster_block_len(aps, users)?;
            let feasible = coherence_feasible(&t, cfg.slot_duration, cfg.coherence_time)?;
            Ok((t.to_string(), feasible))
        };
        let (block_len, feasible) = block(l, k)?;
        rows.push(BlockLengthRow {
            users: k,
            kind: TopologyKind::Standard,
            groups: 1,
            drop: 0,
            cluster_aps: l,
            cluster_users: k,
            block_len,
            feasible,
        });
        if g > k {
            notes.push(format!("K={k}: UC with G={g} skipped"));
        }
        let per_drop = (0..cfg.drops)
            .into_par_iter()
            .map(|d| -> crate::Result<Vec<(TopologyKind, usize, usize)>> {
                let snap = snapshot(cfg, d, k, noise_variance)?;
                let mut out = Vec::new();
                for kind in [TopologyKind::NetworkCentric, TopologyKind::UserCentric] {
                    if let Some(t) = topology_for(cfg, &snap, kind, g)? {
                        let mut worst = (BigUint::default(), 0, 0);
                        for c in &t.clusters {
                            let len = cluster_block_len(c.ap_ids.len(), c.user_ids.len())?;
                            if len > worst.0 {
                                worst = (len, c.ap_ids.len(), c.user_ids.len());
                            }
                        }
                        out.push((kind, worst.1, worst.2));
                    }
                }
                Ok(out)
            })
            .collect::<crate::Result<Vec<_>>>()?;
        for (d, entries) in per_drop.into_iter().enumerate() {
            for (kind, aps, users) in entries {
                let (block_len, feasible) = block(aps, users)?;
                rows.push(BlockLengthRow {
                    users: k,
                    kind,
                    groups: g,
                    drop: d,
                    cluster_aps: aps,
                    cluster_users: users,
                    block_len,
                    feasible,
                });
            }
        }
    }
    Ok(BlockLengthResult { rows, notes })
}

fn write_serialized<W: Write, T: Serialize>(out: W, header: &str, rows: &[T]) -> io::Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(header.split(','))?;
    for r in rows {
        w.serialize(r).map_err(io::Error::other)?;
    }
    w.flush()
}

pub fn write_rates_csv<W: Write>(out: W, rows: &[RateRow]) -> io::Result<()> {
    write_serialized(out, RATE_CSV_HEADER, rows)
}

pub fn write_aggregates_csv<W: Write>(out: W, rows: &[AggregateRow]) -> io::Result<()> {
    write_serialized(out, "G,kind,drops,mean_user_rate,mean_sum_rate", rows)
}

pub fn write_block_lengths_csv<W: Write>(out: W, rows: &[BlockLengthRow]) -> io::Result<()> {
    write_serialized(out, BLOCK_CSV_HEADER, rows)
}

fn create(path: &Path) -> HarnessResult<io::BufWriter<fs::File>> {
    fs::File::create(path)
        .map(io::BufWriter::new)
        .map_err(HarnessError::io(format!("cannot create {}", path.display())))
}

/// Writes `<name>.csv` (per-user rows) and `<name>_summary.csv` into `dir`.
pub fn write_experiment(dir: &Path, name: &str, result: &ExperimentResult) -> HarnessResult<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(HarnessError::io(format!("cannot create {}", dir.display())))?;
    let rows_path = dir.join(format!("{name}.csv"));
    let summary_path = dir.join(format!("{name}_summary.csv"));
    write_rates_csv(create(&rows_path)?, &result.rows)
        .map_err(HarnessError::io(format!("cannot write {}", rows_path.display())))?;
    write_aggregates_csv(create(&summary_path)?, &result.aggregates)
        .map_err(HarnessError::io(format!("cannot write {}", summary_path.display())))?;
    Ok(vec![rows_path, summary_path])
}

pub fn write_block_lengths(dir: &Path, name: &str, result: &BlockLengthResult) -> HarnessResult<PathBuf> {
    fs::create_dir_all(dir).map_err(HarnessError::io(format!("cannot create {}", dir.display())))?;
    let path = dir.join(format!("{name}.csv"));
    write_block_lengths_csv(create(&path)?, &result.rows)
        .map_err(HarnessError::io(format!("cannot write {}", path.display())))?;
    Ok(path)
}

/// Reads and validates a config file; I/O problems map to exit status 2.
pub fn load_config(path: &Path) -> HarnessResult<ScenarioConfig> {
    let text = fs::read_to_string(path).map_err(HarnessError::io(format!("cannot read {}", path.display())))?;
    Ok(ScenarioConfig::parse(&text)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::supersymbol::block_lengths;

    fn small() -> ScenarioConfig {
        ScenarioConfig { drops: 3, users: 6, ..ScenarioConfig::default() }
    }

    fn to_csv(rows: &[RateRow]) -> String {
        let mut buf = Vec::new();
        write_rates_csv(&mut buf, rows).unwrap();
        String::from_utf8(buf).unwrap()
    }

    #[test]
    fn splitmix_reference_values() {
        // Published SplitMix64 outputs for state 0 are splitmix64(0), splitmix64(golden), ...
        assert_eq!(splitmix64(0), 0xE220_A839_7B1D_CDAF);
        assert_eq!(drop_seed(5, 0), 5 ^ 0xE220_A839_7B1D_CDAF);
    }

    #[test]
    fn header_is_frozen() {
        let text = to_csv(&[]);
        assert_eq!(text, format!("{RATE_CSV_HEADER}\n"));
    }

    #[test]
    fn zero_drops_is_empty() {
        let cfg = ScenarioConfig { drops: 0, ..small() };
        let r = run_fig5(&cfg, 1..=4).unwrap();
        assert!(r.rows.is_empty());
        assert!(r.aggregates.is_empty());
    }

    #[test]
    fn scenario_is_deterministic() {
        let cfg = small();
        let a = to_csv(&run_scenario(&cfg).unwrap().rows);
        let b = to_csv(&run_scenario(&cfg).unwrap().rows);
        assert_eq!(a, b);
        let other = ScenarioConfig { seed: 2, ..cfg };
        assert_ne!(a, to_csv(&run_scenario(&other).unwrap().rows));
    }

    #[test]
    fn uc_with_one_group_matches_standard() {
        let uc = ScenarioConfig { topology: TopologyKind::UserCentric, groups: 1, ..small() };
        let st = ScenarioConfig { topology: TopologyKind::Standard, ..small() };
        let a: Vec<f64> = run_scenario(&uc).unwrap().rows.iter().map(|r| r.rate_bits_per_slot).collect();
        let b: Vec<f64> = run_scenario(&st).unwrap().rows.iter().map(|r| r.rate_bits_per_slot).collect();
        assert_eq!(a.len(), 3 * 6);
        assert_eq!(a, b);
    }

    #[test]
    fn aggregates_match_rows() {
        let r = run_fig5(&small(), 1..=4).unwrap();
        for agg in &r.aggregates {
            let sel: Vec<_> = r.rows.iter().filter(|x| x.groups == agg.groups && x.kind == agg.kind).collect();
            let mean = sel.iter().map(|x| x.rate_bits_per_slot).sum::<f64>() / sel.len() as f64;
            assert!((mean - agg.mean_user_rate).abs() <= 1e-12 * mean.abs().max(1.0));
            assert_eq!(agg.drops, 3);
            assert!((agg.mean_sum_rate - mean * 6.0).abs() <= 1e-9 * agg.mean_sum_rate.abs().max(1.0));
        }
        assert!(r.aggregate_for(1, TopologyKind::Standard).is_some());
        assert!(r.aggregate_for(3, TopologyKind::UserCentric).is_some());
    }

    #[test]
    fn fig6_matches_closed_form() {
        let cfg = ScenarioConfig { drops: 2, ..ScenarioConfig::default() };
        let r = run_fig6(&cfg, 1..=6).unwrap();
        for row in &r.rows {
            let expected = cluster_block_len(row.cluster_aps, row.cluster_users).unwrap();
            assert_eq!(row.block_len, expected.to_string());
        }
        let k1 = r.rows.iter().find(|x| x.users == 1 && x.kind == TopologyKind::Standard).unwrap();
        assert_eq!(k1.block_len, "16");
        let k6 = r.max_block_len(6, TopologyKind::Standard).unwrap();
        assert_eq!(k6, block_lengths(16, 6).unwrap().total);
    }

    #[test]
    fn experiment_files() {
        let dir = tempfile::tempdir().unwrap();
        let r = run_scenario(&small()).unwrap();
        let paths = write_experiment(dir.path(), "run", &r).unwrap();
        let text = fs::read_to_string(&paths[0]).unwrap();
        assert!(text.starts_with(RATE_CSV_HEADER));
        assert_eq!(text.lines().count(), 1 + r.rows.len());
        let summary = fs::read_to_string(&paths[1]).unwrap();
        assert!(summary.starts_with("G,kind,drops,mean_user_rate,mean_sum_rate\n"));
    }

    #[test]
    fn missing_config_file_is_io() {
        let err = load_config(Path::new("/nonexistent/bia.conf")).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }
}
