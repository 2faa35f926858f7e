//! Cluster formation: one big cell (standard BIA), static AP tiles (network-centric) and
//! user-driven clusters from K-means plus AP association (user-centric).

use std::fmt;
use std::io::{self, Write};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::{AccessPoint, UserTerminal};

pub type Point2 = [f64; 2];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TopologyKind {
    Standard,
    NetworkCentric,
    UserCentric,
}

impl TopologyKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            TopologyKind::Standard => "standard",
            TopologyKind::NetworkCentric => "nc",
            TopologyKind::UserCentric => "uc",
        }
    }
}

impl fmt::Display for TopologyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cluster {
    pub id: usize,
    pub ap_ids: Vec<usize>,
    pub user_ids: Vec<usize>,
    pub centroid: Point2,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Topology {
    pub kind: TopologyKind,
    pub clusters: Vec<Cluster>,
}

fn dist2(a: &Point2, b: &Point2) -> f64 {
    (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)
}

fn xy(p: &nalgebra::Point3<f64>) -> Point2 {
    [p.x, p.y]
}

fn mean(points: impl Iterator<Item = Point2>) -> Point2 {
    let (mut sx, mut sy, mut n) = (0.0, 0.0, 0usize);
    for p in points {
        sx += p[0];
        sy += p[1];
        n += 1;
    }
    [sx / n as f64, sy / n as f64]
}

/// Index of the nearest centre; ties go to the lowest index.
fn nearest(p: &Point2, centres: &[Point2]) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (i, c) in centres.iter().enumerate() {
        let d = dist2(p, c);
        if d < best_d {
            best = i;
            best_d = d;
        }
    }
    best
}

impl Topology {
    /// Every AP serves every user.
    pub fn standard(aps: &[AccessPoint], users: &[UserTerminal]) -> Self {
        Topology {
            kind: TopologyKind::Standard,
            clusters: vec![Cluster {
                id: 0,
                ap_ids: aps.iter().map(|a| a.id).collect(),
                user_ids: users.iter().map(|u| u.id).collect(),
                centroid: mean(aps.iter().map(|a| xy(&a.position))),
            }],
        }
    }

    /// Checks that clusters partition `0..num_aps` and `0..num_users` and own at least one AP.
    pub fn validate(&self, num_aps: usize, num_users: usize) -> Result<()> {
        let mut ap_seen = vec![false; num_aps];
        let mut user_seen = vec![false; num_users];
        for c in &self.clusters {
            if c.ap_ids.is_empty() {
                return Err(Error::invalid("topology", format!("cluster {} has no AP", c.id)));
            }
            for &a in &c.ap_ids {
                if a >= num_aps || std::mem::replace(&mut ap_seen[a], true) {
                    return Err(Error::invalid("topology", format!("AP {a} missing or assigned twice")));
                }
            }
            for &u in &c.user_ids {
                if u >= num_users || std::mem::replace(&mut user_seen[u], true) {
                    return Err(Error::invalid("topology", format!("user {u} missing or assigned twice")));
                }
            }
        }
        if let Some(a) = ap_seen.iter().position(|s| !s) {
            return Err(Error::invalid("topology", format!("AP {a} is not in any cluster")));
        }
        if let Some(u) = user_seen.iter().position(|s| !s) {
            return Err(Error::invalid("topology", format!("user {u} is not in any cluster")));
        }
        Ok(())
    }

    pub fn cluster_of_users(&self, num_users: usize) -> Vec<usize> {
        let mut out = vec![usize::MAX; num_users];
        for c in &self.clusters {
            for &u in &c.user_ids {
                out[u] = c.id;
            }
        }
        out
    }

    /// Serving AP set of every user, indexed by user id.
    pub fn serving_sets(&self, num_users: usize) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); num_users];
        for c in &self.clusters {
            for &u in &c.user_ids {
                out[u] = c.ap_ids.clone();
            }
        }
        out
    }

    /// `cluster,ap_ids,user_ids,centroid_x,centroid_y`, ids separated by `;`.
    pub fn write_csv<W: Write>(&self, out: W) -> io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["cluster", "ap_ids", "user_ids", "centroid_x", "centroid_y"])?;
        let join = |ids: &[usize]| ids.iter().map(usize::to_string).collect::<Vec<_>>().join(";");
        for c in &self.clusters {
            w.write_record([
                c.id.to_string(),
                join(&c.ap_ids),
                join(&c.user_ids),
                c.centroid[0].to_string(),
                c.centroid[1].to_string(),
            ])?;
        }
        w.flush()
    }
}

/// Tiles a `rows x cols` AP grid into `groups_x x groups_y` rectangular clusters and attaches
/// each user to the cluster with the nearest AP centroid.
pub fn nc_partition(
    aps: &[AccessPoint],
    rows: usize,
    cols: usize,
    groups_x: usize,
    groups_y: usize,
    users: &[UserTerminal],
) -> Result<Topology> {
    if rows * cols != aps.len() {
        return Err(Error::invalid("NC tiling", format!("{} APs do not form a {rows}x{cols} grid", aps.len())));
    }
    if groups_x == 0 || groups_y == 0 || !rows.is_multiple_of(groups_x) || !cols.is_multiple_of(groups_y) {
        return Err(Error::invalid(
            "NC tiling",
            format!("{groups_x}x{groups_y} tiles do not divide the {rows}x{cols} AP grid"),
        ));
    }
    let (tile_r, tile_c) = (rows / groups_x, cols / groups_y);
    let mut clusters: Vec<Cluster> = (0..groups_x * groups_y)
        .map(|id| Cluster { id, ap_ids: Vec::new(), user_ids: Vec::new(), centroid: [0.0; 2] })
        .collect();
    for ap in aps {
        let (i, j) = (ap.id / cols, ap.id % cols);
        clusters[(i / tile_r) * groups_y + j / tile_c].ap_ids.push(ap.id);
    }
    for c in clusters.iter_mut() {
        c.centroid = mean(c.ap_ids.iter().map(|&a| xy(&aps[a].position)));
    }
    let centres: Vec<Point2> = clusters.iter().map(|c| c.centroid).collect();
    for u in users {
        clusters[nearest(&xy(&u.position), &centres)].user_ids.push(u.id);
    }
    Ok(Topology { kind: TopologyKind::NetworkCentric, clusters })
}

/// Divisor-compatible tiling whose cluster count is closest to `target`.
///
/// Ties prefer fewer clusters, then the squarest tile layout, then fewer row groups.
pub fn nearest_tiling(rows: usize, cols: usize, target: usize) -> (usize, usize) {
    let mut best = (1, 1);
    let mut best_key = (usize::MAX, usize::MAX, usize::MAX, usize::MAX);
    for gx in (1..=rows).filter(|g| rows.is_multiple_of(*g)) {
        for gy in (1..=cols).filter(|g| cols.is_multiple_of(*g)) {
            let count = gx * gy;
            let key = (count.abs_diff(target), count, gx.abs_diff(gy), gx);
            if key < best_key {
                best_key = key;
                best = (gx, gy);
            }
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansResult {
    pub labels: Vec<usize>,
    pub centroids: Vec<Point2>,
    pub groups: Vec<Vec<usize>>,
    pub iterations: usize,
    pub converged: bool,
    /// Within-cluster sum of squares after each iteration.
    pub wcss_history: Vec<f64>,
}

impl KMeansResult {
    pub fn wcss(&self) -> f64 {
        self.wcss_history.last().copied().unwrap_or(0.0)
    }
}

pub fn within_cluster_ss(points: &[Point2], labels: &[usize], centroids: &[Point2]) -> f64 {
    points.iter().zip(labels).map(|(p, &l)| dist2(p, &centroids[l])).sum()
}

fn group_means(points: &[Point2], labels: &[usize], g: usize) -> Vec<Point2> {
    (0..g).map(|c| mean(points.iter().zip(labels).filter(|(_, &l)| l == c).map(|(p, _)| *p))).collect()
}

/// Independent Lloyd starts per call; the run with the lowest final WCSS is kept.
pub const KMEANS_RESTARTS: usize = 20;

/// Lloyd's algorithm seeded by `g` distinct users chosen at random, repeated from
/// [`KMEANS_RESTARTS`] seeded starts; the run with the lowest final WCSS wins (earliest on ties).
///
/// A group that comes out of an assignment step empty takes the user farthest from the
/// centroid of the currently largest group.
pub fn kmeans_users(points: &[Point2], g: usize, seed: u64, max_iters: usize) -> Result<KMeansResult> {
    let n = points.len();
    if g == 0 || g > n {
        return Err(Error::invalid("K-means", format!("cannot form {g} groups from {n} users")));
    }
    if max_iters == 0 {
        return Err(Error::invalid("K-means", "max_iters must be at least 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<KMeansResult> = None;
    for _ in 0..KMEANS_RESTARTS {
        let start: Vec<Point2> = rand::seq::index::sample(&mut rng, n, g).into_iter().map(|i| points[i]).collect();
        let run = lloyd(points, start, max_iters);
        if best.as_ref().is_none_or(|b| run.wcss() < b.wcss()) {
            best = Some(run);
        }
    }
    Ok(best.expect("at least one restart"))
}

/// One Lloyd run from the given initial centroids.
pub fn lloyd(points: &[Point2], mut centroids: Vec<Point2>, max_iters: usize) -> KMeansResult {
    let g = centroids.len();
    let n = points.len();
    let mut labels = vec![usize::MAX; n];
    let mut history = Vec::new();
    let mut converged = false;
    let mut iterations = 0;

    while iterations < max_iters {
        iterations += 1;
        let mut next: Vec<usize> = points.iter().map(|p| nearest(p, &centroids)).collect();
        repair_empty_groups(points, &mut next, g);
        let stable = next == labels;
        labels = next;
        centroids = group_means(points, &labels, g);
        history.push(within_cluster_ss(points, &labels, &centroids));
        if stable {
            converged = true;
            break;
        }
    }

    let mut groups = vec![Vec::new(); g];
    for (i, &l) in labels.iter().enumerate() {
        groups[l].push(i);
    }
    KMeansResult { labels, centroids, groups, iterations, converged, wcss_history: history }
}

fn repair_empty_groups(points: &[Point2], labels: &mut [usize], g: usize) {
    loop {
        let mut sizes = vec![0usize; g];
        for &l in labels.iter() {
            sizes[l] += 1;
        }
        let Some(empty) = sizes.iter().position(|&s| s == 0) else { return };
        let donor = (0..g).max_by_key(|&c| (sizes[c], std::cmp::Reverse(c))).expect("g >= 1");
        let donor_centre = group_means(points, labels, g)[donor];
        let mut far = None;
        let mut far_d = -1.0;
        for (i, p) in points.iter().enumerate().filter(|(i, _)| labels[*i] == donor) {
            let d = dist2(p, &donor_centre);
            if d > far_d {
                far = Some(i);
                far_d = d;
            }
        }
        labels[far.expect("donor is non-empty")] = empty;
    }
}

/// Gives each AP to the group with the nearest centroid, then hands an AP to every group left
/// without one: the donor is the group with most APs, and it gives up the AP closest to the
/// receiving group's centroid.
pub fn associate_aps(user_groups: &[Vec<usize>], centroids: &[Point2], aps: &[AccessPoint]) -> Result<Topology> {
    let g = centroids.len();
    if g == 0 || user_groups.len() != g {
        return Err(Error::invalid("AP association", "need one centroid per user group"));
    }
    if aps.len() < g {
        return Err(Error::invalid("AP association", format!("{} APs cannot cover {g} clusters", aps.len())));
    }
    let mut owner: Vec<usize> = aps.iter().map(|a| nearest(&xy(&a.position), centroids)).collect();
    loop {
        let mut sizes = vec![0usize; g];
        for &o in &owner {
            sizes[o] += 1;
        }
        let Some(empty) = sizes.iter().position(|&s| s == 0) else { break };
        let donor = (0..g).max_by_key(|&c| (sizes[c], std::cmp::Reverse(c))).expect("g >= 1");
        let mut pick = None;
        let mut pick_d = f64::INFINITY;
        for (i, ap) in aps.iter().enumerate().filter(|(i, _)| owner[*i] == donor) {
            let d = dist2(&xy(&ap.position), &centroids[empty]);
            if d < pick_d {
                pick = Some(i);
                pick_d = d;
            }
        }
        owner[pick.expect("donor owns at least two APs")] = empty;
    }
    let clusters = (0..g)
        .map(|c| Cluster {
            id: c,
            ap_ids: aps.iter().zip(&owner).filter(|(_, &o)| o == c).map(|(a, _)| a.id).collect(),
            user_ids: user_groups[c].clone(),
            centroid: centroids[c],
        })
        .collect();
    Ok(Topology { kind: TopologyKind::UserCentric, clusters })
}

/// K-means over user positions followed by AP association.
pub fn uc_topology(
    aps: &[AccessPoint],
    users: &[UserTerminal],
    g: usize,
    seed: u64,
    max_iters: usize,
) -> Result<Topology> {
    let points: Vec<Point2> = users.iter().map(|u| xy(&u.position)).collect();
    let km = kmeans_users(&points, g, seed, max_iters)?;
    let groups: Vec<Vec<usize>> = km.groups.iter().map(|grp| grp.iter().map(|&i| users[i].id).collect()).collect();
    associate_aps(&groups, &km.centroids, aps)
}
