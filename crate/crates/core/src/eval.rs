//! Monte Carlo evaluation of sum spectral efficiency.
//!
//! Selection and pre-beamformers depend only on second-order statistics, so
//! they are computed once per run. Each trial draws one channel per user,
//! builds the inner precoders at unit power and reduces every user to a pair
//! `(signal, interference)`; the SINR at total power `P` is then
//! `P s / (noise + P i)`, so one set of draws serves the whole grid.

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::channel::{
    covariance, effective_rank, realize_channel, ArrayGeometry, Covariance, RankPolicy,
    UserProfile,
};
use crate::error::{Error, Result};
use crate::grouping::{
    build_graph, exhaustive_search, greedy_algorithm_1, greedy_algorithm_2, ConflictGraph,
    SearchObjective, SelectionResult, SetFunction, EXHAUSTIVE_CAP,
};
use crate::linalg::{CMatrix, CVector};
use crate::precoding::{
    bd_projections, covariance_beamformer, full_eigen_beamformer, zero_forcing, BdProjection,
    GroupPrecoder, PreBeamformer, PrecoderSet,
};

/// Transmission scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Mode {
    /// Approximate BD across groups, ZF within each group, one resource.
    Multiplexing,
    /// One resource per group, full eigenmode beamforming, ZF within the group.
    Orthogonalization,
    /// One user per group on the dominant projected eigenvector, no CSIT.
    CovarianceBased,
    /// ZF on the full channel of every selected user.
    FullCsitZf,
}

impl Mode {
    pub const ALL: [Mode; 4] = [
        Mode::Multiplexing,
        Mode::Orthogonalization,
        Mode::CovarianceBased,
        Mode::FullCsitZf,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Mode::Multiplexing => "multiplexing",
            Mode::Orthogonalization => "orthogonalization",
            Mode::CovarianceBased => "covariance",
            Mode::FullCsitZf => "full-csit-zf",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Mode::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown mode `{s}`")))
    }
}

/// User selection rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Algorithm {
    /// Serve every profile.
    All,
    Greedy1,
    Greedy2,
    ExhaustiveQ1,
    ExhaustiveQ2,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] = [
        Algorithm::All,
        Algorithm::Greedy1,
        Algorithm::Greedy2,
        Algorithm::ExhaustiveQ1,
        Algorithm::ExhaustiveQ2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::All => "all",
            Algorithm::Greedy1 => "greedy1",
            Algorithm::Greedy2 => "greedy2",
            Algorithm::ExhaustiveQ1 => "exhaustive-q1",
            Algorithm::ExhaustiveQ2 => "exhaustive-q2",
        }
    }

    /// Run this rule on a conflict graph.
    pub fn select(self, graph: &ConflictGraph, f: SetFunction, eps: f64) -> Result<SelectionResult> {
        match self {
            Algorithm::All => {
                let x = vec![true; graph.len()];
                let q = graph.objective_q1(&x, f)?;
                Ok(graph.result(x, q))
            }
            Algorithm::Greedy1 => Ok(greedy_algorithm_1(graph, f)),
            Algorithm::Greedy2 => Ok(greedy_algorithm_2(graph, eps)),
            Algorithm::ExhaustiveQ1 => {
                exhaustive_search(graph, SearchObjective::Q1(f), EXHAUSTIVE_CAP)
            }
            Algorithm::ExhaustiveQ2 => {
                exhaustive_search(graph, SearchObjective::Q2 { eps }, EXHAUSTIVE_CAP)
            }
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown algorithm `{s}`")))
    }
}

/// Sweep axis. Values are in dB (SNR) or dBm (transmit power).
#[derive(Debug, Clone, PartialEq)]
pub enum Grid {
    SnrDb(Vec<f64>),
    TxPowerDbm(Vec<f64>),
}

impl Grid {
    pub fn values(&self) -> &[f64] {
        match self {
            Grid::SnrDb(v) | Grid::TxPowerDbm(v) => v,
        }
    }

    /// Total transmit power at grid value `x`, in the units of `noise`.
    /// SNR grids are relative to the noise; power grids are in mW.
    pub fn power(&self, x: f64, noise: f64) -> f64 {
        match self {
            Grid::SnrDb(_) => noise * db_to_linear(x),
            Grid::TxPowerDbm(_) => db_to_linear(x),
        }
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// How Orthogonalization slots are powered.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SlotPower {
    /// Every slot radiates the full power `P`.
    #[default]
    Full,
    /// Slots share `P` equally.
    Split,
}

/// Width of the Multiplexing and Orthogonalization pre-beamformers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BeamWidth {
    /// `min(K_g, r*)`: one dimension per served user.
    #[default]
    Users,
    /// `r*`: every dominant eigenmode, serving `min(K_g, r*)` users.
    Eigenmodes,
}

impl BeamWidth {
    fn width(self, users: usize, rank: usize) -> usize {
        match self {
            BeamWidth::Users => users.min(rank),
            BeamWidth::Eigenmodes => rank,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalConfig {
    pub grid: Grid,
    /// Linear noise power: 1 for SNR grids, mW for transmit-power grids.
    pub noise: f64,
    pub trials: usize,
    pub seed: u64,
    pub mode: Mode,
    pub algorithm: Algorithm,
    pub epsilon: f64,
    pub rank_policy: RankPolicy,
    pub set_function: SetFunction,
    pub slot_power: SlotPower,
    pub beam_width: BeamWidth,
}

impl EvalConfig {
    pub fn new(grid: Grid) -> Self {
        Self {
            grid,
            noise: 1.0,
            trials: 100,
            seed: 0,
            mode: Mode::Multiplexing,
            algorithm: Algorithm::Greedy1,
            epsilon: 0.0,
            rank_policy: RankPolicy::default(),
            set_function: SetFunction::Density,
            slot_power: SlotPower::Full,
            beam_width: BeamWidth::Users,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let g = self.grid.values();
        if g.is_empty() {
            return Err(Error::Config("grid is empty".into()));
        }
        if g.iter().any(|v| !v.is_finite()) || g.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("grid must be finite and strictly increasing".into()));
        }
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if !(self.noise > 0.0 && self.noise.is_finite()) {
            return Err(Error::Config("noise power must be positive".into()));
        }
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return Err(Error::Config("epsilon must be non-negative".into()));
        }
        self.rank_policy.validate()
    }
}

/// Geometry, user profiles and evaluation settings.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub geometry: ArrayGeometry,
    pub profiles: Vec<UserProfile>,
    pub config: EvalConfig,
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        if self.profiles.is_empty() {
            return Err(Error::Config("scenario has no user profiles".into()));
        }
        let mut ids: Vec<&str> = self.profiles.iter().map(|p| p.id.as_str()).collect();
        ids.sort_unstable();
        if let Some(w) = ids.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::Config(format!("duplicate profile id `{}`", w[0])));
        }
        for p in &self.profiles {
            p.validate(&self.geometry)?;
        }
        self.config.validate()
    }

    pub fn graph(&self) -> Result<ConflictGraph> {
        build_graph(&self.profiles, &self.geometry)
    }

    pub fn select(&self) -> Result<SelectionResult> {
        let c = &self.config;
        c.algorithm.select(&self.graph()?, c.set_function, c.epsilon)
    }

    /// Covariances of every profile, in profile order.
    pub fn covariances(&self) -> Result<Vec<Covariance>> {
        self.profiles
            .par_iter()
            .map(|p| covariance(&self.geometry, p))
            .collect()
    }
}

/// Statistics at one grid value.
#[derive(Debug, Clone, PartialEq)]
pub struct PointResult {
    pub grid_db: f64,
    pub mean: f64,
    /// Sample standard error of the mean.
    pub stderr: f64,
    /// Streams per time-frequency resource, averaged over trials.
    pub users_served_mean: f64,
    pub samples: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalResult {
    pub mode: Mode,
    pub algorithm: Algorithm,
    /// Selected profile indices.
    pub selected: Vec<usize>,
    pub points: Vec<PointResult>,
    /// Set when nothing could be served.
    pub note: Option<String>,
}

/// `|h_k^H v|^2` split into own-stream signal and everything else, per user
/// of each group, for precoders already scaled to their powers.
pub fn link_gains(channels: &[CMatrix], precoders: &PrecoderSet) -> Result<Vec<Vec<(f64, f64)>>> {
    if channels.len() != precoders.groups.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} channel blocks for {} precoder groups",
            channels.len(),
            precoders.groups.len()
        )));
    }
    let vs: Vec<CMatrix> = precoders
        .groups
        .iter()
        .map(|(b, p)| &b.matrix * &p.matrix)
        .collect();
    let mut out = Vec::with_capacity(channels.len());
    for (g, h) in channels.iter().enumerate() {
        if vs[g].ncols() != h.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "group {g}: {} users but {} streams",
                h.ncols(),
                vs[g].ncols()
            )));
        }
        let mut users = vec![(0.0, 0.0); h.ncols()];
        for (gp, v) in vs.iter().enumerate() {
            if v.nrows() != h.nrows() {
                return Err(Error::DimensionMismatch(format!(
                    "group {gp}: precoder has {} rows, channel has {}",
                    v.nrows(),
                    h.nrows()
                )));
            }
            let t = h.adjoint() * v;
            for (k, user) in users.iter_mut().enumerate() {
                for j in 0..t.ncols() {
                    let e = t[(k, j)].norm_sqr();
                    if gp == g && j == k {
                        user.0 += e;
                    } else {
                        user.1 += e;
                    }
                }
            }
        }
        out.push(users);
    }
    Ok(out)
}

/// Per-user SINR with unit-variance streams and interference treated as noise.
pub fn sinr_per_user(
    channels: &[CMatrix],
    precoders: &PrecoderSet,
    noise: f64,
) -> Result<Vec<Vec<f64>>> {
    Ok(link_gains(channels, precoders)?
        .into_iter()
        .map(|g| g.into_iter().map(|(s, i)| s / (noise + i)).collect())
        .collect())
}

/// `sum log2(1 + SINR)`. In Orthogonalization mode each group occupies a
/// fraction `1/G` of the resources and its sum is scaled accordingly.
pub fn sum_spectral_efficiency(sinrs: &[Vec<f64>], mode: Mode) -> f64 {
    let scale = match mode {
        Mode::Orthogonalization if !sinrs.is_empty() => 1.0 / sinrs.len() as f64,
        _ => 1.0,
    };
    sinrs
        .iter()
        .map(|g| g.iter().map(|s| (1.0 + s).log2()).sum::<f64>() * scale)
        .sum()
}

#[derive(Debug, Clone)]
enum Inner {
    ZeroForcing,
    /// Fixed scalar weight, one user on a single column.
    Fixed,
}

/// A statistically designed group: who is served, on which beamformer,
/// in which slot and with which share of the slot power.
#[derive(Debug, Clone)]
struct PlannedGroup {
    /// `(profile, users)` stacked into the group channel.
    members: Vec<(usize, usize)>,
    beamformer: PreBeamformer,
    share: f64,
    slot: usize,
    inner: Inner,
}

impl PlannedGroup {
    fn users(&self) -> usize {
        self.members.iter().map(|m| m.1).sum()
    }
}

/// Everything that does not depend on the channel draw.
#[derive(Debug, Clone)]
pub struct Plan {
    pub mode: Mode,
    pub selection: SelectionResult,
    groups: Vec<PlannedGroup>,
    slots: usize,
}

impl Plan {
    /// Profiles that end up carrying at least one stream.
    pub fn served_profiles(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self
            .groups
            .iter()
            .flat_map(|g| g.members.iter().map(|m| m.0))
            .collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    pub fn streams(&self) -> usize {
        self.groups.iter().map(|g| g.users()).sum()
    }

    /// Streams per time-frequency resource.
    pub fn streams_per_resource(&self) -> f64 {
        if self.slots == 0 {
            0.0
        } else {
            self.streams() as f64 / self.slots as f64
        }
    }

    pub fn beamformers(&self) -> Vec<&PreBeamformer> {
        self.groups.iter().map(|g| &g.beamformer).collect()
    }
}

/// Drop groups until every remaining group has a non-trivial projected
/// covariance; returns the surviving group indices and their projections.
fn surviving_projections(
    covs: &[Covariance],
    mut groups: Vec<usize>,
    policy: RankPolicy,
) -> Result<(Vec<usize>, Vec<BdProjection>)> {
    loop {
        let refs: Vec<&Covariance> = groups.iter().map(|&g| &covs[g]).collect();
        let projections = bd_projections(&refs, policy)?;
        let keep: Vec<bool> = projections
            .iter()
            .map(|p| effective_rank(&p.projected, policy) > 0)
            .collect();
        if keep.iter().all(|&k| k) {
            return Ok((groups, projections));
        }
        groups = groups
            .into_iter()
            .zip(keep)
            .filter_map(|(g, k)| k.then_some(g))
            .collect();
    }
}

/// Selection plus pre-beamformers and power shares for one mode.
pub fn plan(scenario: &Scenario, covs: &[Covariance], mode: Mode, selection: SelectionResult) -> Result<Plan> {
    let cfg = &scenario.config;
    let policy = cfg.rank_policy;
    let profiles = &scenario.profiles;
    let chosen = selection.selected();
    let mut groups = Vec::new();
    let mut slots = 1;
    match mode {
        Mode::Multiplexing => {
            let (kept, projections) = surviving_projections(covs, chosen, policy)?;
            for (g, proj) in kept.into_iter().zip(&projections) {
                let users = profiles[g].users;
                let b = cfg.beam_width.width(users, effective_rank(&proj.projected, policy));
                let inner = PreBeamformer {
                    group: g,
                    matrix: proj.projected.dominant(b),
                };
                groups.push(PlannedGroup {
                    members: vec![(g, users.min(b))],
                    beamformer: proj.lift(&inner),
                    share: 0.0,
                    slot: 0,
                    inner: Inner::ZeroForcing,
                });
            }
            let total: usize = groups.iter().map(|g| g.users()).sum();
            for g in &mut groups {
                g.share = g.users() as f64 / total as f64;
            }
        }
        Mode::Orthogonalization => {
            slots = chosen.len();
            let share = match cfg.slot_power {
                SlotPower::Full => 1.0,
                SlotPower::Split => 1.0 / slots.max(1) as f64,
            };
            for (slot, &g) in chosen.iter().enumerate() {
                let users = profiles[g].users;
                let b = cfg.beam_width.width(users, effective_rank(&covs[g], policy));
                let mut bf = full_eigen_beamformer(&covs[g], b)?;
                bf.group = g;
                groups.push(PlannedGroup {
                    members: vec![(g, users.min(b))],
                    beamformer: bf,
                    share,
                    slot,
                    inner: Inner::ZeroForcing,
                });
            }
        }
        Mode::CovarianceBased => {
            let (kept, projections) = surviving_projections(covs, chosen, policy)?;
            let share = 1.0 / kept.len().max(1) as f64;
            for (g, proj) in kept.into_iter().zip(&projections) {
                let mut inner = covariance_beamformer(&proj.projected)?;
                inner.group = g;
                groups.push(PlannedGroup {
                    members: vec![(g, 1)],
                    beamformer: proj.lift(&inner),
                    share,
                    slot: 0,
                    inner: Inner::Fixed,
                });
            }
        }
        Mode::FullCsitZf => {
            let members: Vec<(usize, usize)> =
                chosen.iter().map(|&g| (g, profiles[g].users)).collect();
            let m = scenario.geometry.antennas();
            let streams: usize = members.iter().map(|x| x.1).sum();
            if streams > m {
                return Err(Error::TooManyStreams {
                    group: 0,
                    streams,
                    width: m,
                });
            }
            if streams > 0 {
                groups.push(PlannedGroup {
                    members,
                    beamformer: PreBeamformer {
                        group: 0,
                        matrix: CMatrix::identity(m, m),
                    },
                    share: 1.0,
                    slot: 0,
                    inner: Inner::ZeroForcing,
                });
            }
        }
    }
    if groups.is_empty() {
        slots = 0;
    }
    Ok(Plan {
        mode,
        selection,
        groups,
        slots,
    })
}

/// Channels of every user of every profile for one trial, in profile order.
/// All modes and algorithms see the same draws for a given trial.
pub fn draw_channels(scenario: &Scenario, covs: &[Covariance], trial: u64) -> Vec<Vec<CVector>> {
    let mut rng = ChaCha8Rng::seed_from_u64(scenario.config.seed);
    rng.set_stream(trial);
    scenario
        .profiles
        .iter()
        .zip(covs)
        .map(|(p, c)| {
            (0..p.users)
                .map(|_| realize_channel(&scenario.geometry, p, c, &mut rng))
                .collect()
        })
        .collect()
}

fn group_channel(draws: &[Vec<CVector>], members: &[(usize, usize)], m: usize) -> CMatrix {
    let cols: Vec<&CVector> = members
        .iter()
        .flat_map(|&(p, n)| draws[p].iter().take(n))
        .collect();
    let mut h = CMatrix::zeros(m, cols.len());
    for (j, c) in cols.into_iter().enumerate() {
        h.set_column(j, c);
    }
    h
}

/// Unit-power link gains per slot, per group, per user.
fn trial_gains(plan: &Plan, draws: &[Vec<CVector>], m: usize) -> Result<Vec<Vec<Vec<(f64, f64)>>>> {
    (0..plan.slots)
        .map(|slot| {
            let in_slot: Vec<&PlannedGroup> =
                plan.groups.iter().filter(|g| g.slot == slot).collect();
            let channels: Vec<CMatrix> = in_slot
                .iter()
                .map(|g| group_channel(draws, &g.members, m))
                .collect();
            let set = PrecoderSet {
                groups: in_slot
                    .iter()
                    .zip(&channels)
                    .map(|(g, h)| {
                        let p = match g.inner {
                            Inner::ZeroForcing => {
                                let eff = g.beamformer.matrix.adjoint() * h;
                                zero_forcing(&eff, g.share, g.beamformer.group)?
                            }
                            Inner::Fixed => {
                                let w = g.share.sqrt();
                                GroupPrecoder {
                                    matrix: CMatrix::from_element(1, 1, w.into()),
                                    zeta_sq: w,
                                    power: g.share,
                                }
                            }
                        };
                        Ok((g.beamformer.clone(), p))
                    })
                    .collect::<Result<Vec<_>>>()?,
            };
            link_gains(&channels, &set)
        })
        .collect()
}

fn rate_at(gains: &[Vec<Vec<(f64, f64)>>], power: f64, noise: f64) -> f64 {
    let slots = gains.len();
    if slots == 0 {
        return 0.0;
    }
    let per_slot: f64 = gains
        .iter()
        .flatten()
        .flatten()
        .map(|&(s, i)| (1.0 + power * s / (noise + power * i)).log2())
        .sum();
    per_slot / slots as f64
}

fn mean_stderr(samples: &[f64]) -> (f64, f64) {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    if samples.len() < 2 {
        return (mean, 0.0);
    }
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Evaluate a prepared plan over the configured grid.
pub fn evaluate_plan(scenario: &Scenario, covs: &[Covariance], plan: &Plan, algorithm: Algorithm) -> Result<EvalResult> {
    let cfg = &scenario.config;
    let m = scenario.geometry.antennas();
    let grid = cfg.grid.values();
    let powers: Vec<f64> = grid.iter().map(|&x| cfg.grid.power(x, cfg.noise)).collect();
    let served = plan.streams_per_resource();
    let note = (plan.streams() == 0).then(|| "selection produced no servable users".to_string());

    // collected in trial order, so reductions below are bit-stable
    let per_trial: Vec<Vec<f64>> = (0..cfg.trials as u64)
        .into_par_iter()
        .map(|t| {
            if plan.streams() == 0 {
                return Ok(vec![0.0; powers.len()]);
            }
            let draws = draw_channels(scenario, covs, t);
            let gains = trial_gains(plan, &draws, m)?;
            Ok(powers.iter().map(|&p| rate_at(&gains, p, cfg.noise)).collect())
        })
        .collect::<Result<_>>()?;

    let points = grid
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let samples: Vec<f64> = per_trial.iter().map(|r| r[i]).collect();
            let (mean, stderr) = mean_stderr(&samples);
            PointResult {
                grid_db: x,
                mean,
                stderr,
                users_served_mean: served,
                samples,
            }
        })
        .collect();
    Ok(EvalResult {
        mode: plan.mode,
        algorithm,
        selected: plan.selection.selected(),
        points,
        note,
    })
}

/// Select, design and simulate with the scenario's own mode and algorithm.
pub fn run_sweep(scenario: &Scenario) -> Result<EvalResult> {
    scenario.validate()?;
    let covs = scenario.covariances()?;
    let cfg = &scenario.config;
    run_with(scenario, &covs, cfg.mode, cfg.algorithm)
}

fn run_with(scenario: &Scenario, covs: &[Covariance], mode: Mode, algorithm: Algorithm) -> Result<EvalResult> {
    let cfg = &scenario.config;
    let selection = algorithm.select(&scenario.graph()?, cfg.set_function, cfg.epsilon)?;
    let plan = plan(scenario, covs, mode, selection)?;
    evaluate_plan(scenario, covs, &plan, algorithm)
}

/// Algorithms worth comparing on a graph of `nodes` profiles.
pub fn default_algorithms(nodes: usize) -> Vec<Algorithm> {
    let mut v = vec![Algorithm::Greedy1, Algorithm::Greedy2];
    if nodes <= EXHAUSTIVE_CAP {
        v.extend([Algorithm::ExhaustiveQ1, Algorithm::ExhaustiveQ2]);
    }
    v
}

/// One result per `(mode, algorithm)` pair, all sharing the same channel
/// draws. Results are ordered by mode name, then algorithm name.
pub fn compare_modes(scenario: &Scenario, modes: &[Mode], algorithms: &[Algorithm]) -> Result<Vec<EvalResult>> {
    scenario.validate()?;
    let covs = scenario.covariances()?;
    let mut out = Vec::new();
    for &mode in modes {
        for &alg in algorithms {
            out.push(run_with(scenario, &covs, mode, alg)?);
        }
    }
    out.sort_by(|a, b| {
        (a.mode.name(), a.algorithm.name()).cmp(&(b.mode.name(), b.algorithm.name()))
    });
    Ok(out)
}
