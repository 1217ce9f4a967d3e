//! Random scenario generators for the multi-cluster and sparse multipath
//! experiments.

use std::f64::consts::PI;

use rand::seq::index::sample;
use rand::Rng;

use crate::angular::AngularSet;
use crate::channel::{ArrayGeometry, ClusterSpec, MpcSpec, UserProfile};
use crate::error::{Error, Result};

/// Azimuths stay this far inside the (-90, 90) degree sector.
const EDGE_MARGIN: f64 = PI / 180.0;

/// Cluster spreads are drawn uniformly from this range, in degrees.
pub const SPREAD_RANGE_DEG: (f64, f64) = (2.0, 8.0);

const MAX_ATTEMPTS: usize = 100_000;

/// `n` clusters whose spatial-frequency intervals are pairwise disjoint.
pub fn random_clusters<R: Rng + ?Sized>(
    rng: &mut R,
    geometry: &ArrayGeometry,
    n: usize,
) -> Result<Vec<ClusterSpec>> {
    let (lo, hi) = SPREAD_RANGE_DEG;
    let mut out: Vec<ClusterSpec> = Vec::with_capacity(n);
    let mut occupied = AngularSet::empty();
    let mut attempts = 0;
    while out.len() < n {
        attempts += 1;
        if attempts > MAX_ATTEMPTS {
            return Err(Error::Config(format!("could not place {n} disjoint clusters")));
        }
        let spread = rng.random_range(lo..hi).to_radians();
        let limit = PI / 2.0 - spread - EDGE_MARGIN;
        let c = ClusterSpec::new(rng.random_range(-limit..limit), spread);
        let iv = AngularSet::from_interval(c.interval(geometry)?);
        if occupied.intersect(&iv).is_empty() {
            occupied = occupied.union(&iv);
            out.push(c);
        }
    }
    Ok(out)
}

/// Number of eigenvalues a lone cluster contributes, from its support width.
pub fn cluster_dimensions(geometry: &ArrayGeometry, cluster: &ClusterSpec) -> Result<usize> {
    let w = cluster.interval(geometry)?.measure();
    Ok(((w * geometry.antennas() as f64).round() as usize).max(1))
}

/// User groups sharing a pool of `pool` clusters. Each group owns one
/// cluster outright; the remaining clusters are handed out at random, each
/// to one or more groups, with at most `max_per_group` clusters per group.
/// A group holds as many users as its own cluster has dimensions.
pub fn multicluster_groups<R: Rng + ?Sized>(
    rng: &mut R,
    geometry: &ArrayGeometry,
    groups: usize,
    pool: usize,
    max_per_group: usize,
) -> Result<Vec<UserProfile>> {
    if groups == 0 || groups > pool || max_per_group == 0 {
        return Err(Error::Config(format!(
            "need 1 <= groups ({groups}) <= pool ({pool}) and a positive cluster cap"
        )));
    }
    let clusters = random_clusters(rng, geometry, pool)?;
    let mut members: Vec<Vec<usize>> = (0..groups).map(|g| vec![g]).collect();
    for c in groups..pool {
        let open: Vec<usize> = (0..groups).filter(|&g| members[g].len() < max_per_group).collect();
        if open.is_empty() {
            break;
        }
        let count = rng.random_range(1..=open.len());
        for i in sample(rng, open.len(), count) {
            members[open[i]].push(c);
        }
    }
    members
        .into_iter()
        .enumerate()
        .map(|(g, mut idx)| {
            idx.sort_unstable();
            let users = cluster_dimensions(geometry, &clusters[g])?;
            let cs = idx.iter().map(|&i| clusters[i]).collect();
            Ok(UserProfile::clusters(format!("g{}", g + 1), cs).with_users(users))
        })
        .collect()
}

/// Single users, each taking between 1 and `max_per_user` distinct clusters
/// from a shared pool of `pool` random clusters.
pub fn multicluster_users<R: Rng + ?Sized>(
    rng: &mut R,
    geometry: &ArrayGeometry,
    users: usize,
    pool: usize,
    max_per_user: usize,
) -> Result<Vec<UserProfile>> {
    if pool == 0 || max_per_user == 0 {
        return Err(Error::Config("pool and cluster cap must be positive".into()));
    }
    let clusters = random_clusters(rng, geometry, pool)?;
    let cap = max_per_user.min(pool);
    Ok((0..users)
        .map(|k| {
            let n = rng.random_range(1..=cap);
            let mut idx = sample(rng, pool, n).into_vec();
            idx.sort_unstable();
            let cs = idx.iter().map(|&i| clusters[i]).collect();
            UserProfile::clusters(format!("u{}", k + 1), cs)
        })
        .collect())
}

/// Single users, each with between 1 and `max_per_user` disjoint clusters of
/// its own. Clusters of different users overlap only by chance.
pub fn independent_multicluster_users<R: Rng + ?Sized>(
    rng: &mut R,
    geometry: &ArrayGeometry,
    users: usize,
    max_per_user: usize,
) -> Result<Vec<UserProfile>> {
    if max_per_user == 0 {
        return Err(Error::Config("cluster cap must be positive".into()));
    }
    (0..users)
        .map(|k| {
            let n = rng.random_range(1..=max_per_user);
            let cs = random_clusters(rng, geometry, n)?;
            Ok(UserProfile::clusters(format!("u{}", k + 1), cs))
        })
        .collect()
}

/// Sparse multipath users. Each user has a line-of-sight path plus up to
/// `max_mpcs - 1` reflections off a shared set of `reflectors` departure
/// directions; reflected paths are 5 to 25 dB below the direct one.
pub fn sparse_mpc_users<R: Rng + ?Sized>(
    rng: &mut R,
    users: usize,
    max_mpcs: usize,
    reflectors: usize,
) -> Result<Vec<UserProfile>> {
    if max_mpcs == 0 {
        return Err(Error::Config("users need at least one path".into()));
    }
    let sector = PI / 3.0;
    let dirs: Vec<f64> = (0..reflectors).map(|_| rng.random_range(-sector..sector)).collect();
    Ok((0..users)
        .map(|k| {
            let mut mpcs = vec![path(1.0, rng.random_range(-sector..sector))];
            let extra = rng.random_range(0..max_mpcs).min(reflectors);
            for i in sample(rng, reflectors, extra) {
                let loss_db = rng.random_range(5.0..25.0);
                mpcs.push(path(10f64.powf(-loss_db / 10.0), dirs[i]));
            }
            let total: f64 = mpcs.iter().map(|m| m.power).sum();
            for m in &mut mpcs {
                m.power /= total;
            }
            UserProfile::mpcs(format!("u{}", k + 1), mpcs)
        })
        .collect())
}

fn path(power: f64, aod: f64) -> MpcSpec {
    MpcSpec {
        power,
        phase: None,
        delay: 0.0,
        aod,
        aoa: None,
    }
}
