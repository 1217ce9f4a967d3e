//! Channel covariances, eigenvalue spectra and random channel draws for a
//! uniform linear array.

use std::f64::consts::PI;

use nalgebra::{DMatrixView, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::angular::{self, AngularInterval, AngularSet};
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, CMatrix, CVector};
use crate::quadrature::{gauss_legendre, scaled_rule};

/// Eigenvalues below this fraction of the largest are treated as zero.
pub const RANK_CUTOFF: f64 = 1e-12;
/// Tolerated negative eigenvalue (relative) before a matrix is rejected.
pub const PSD_SLACK: f64 = 1e-10;

/// Uniform linear array: `antennas` elements spaced `spacing` wavelengths.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArrayGeometry {
    antennas: usize,
    spacing: f64,
}

impl ArrayGeometry {
    pub fn new(antennas: usize, spacing: f64) -> Result<Self> {
        if antennas == 0 {
            return Err(Error::Geometry("antenna count must be positive".into()));
        }
        if !(spacing > 0.0 && spacing <= 0.5) {
            return Err(Error::Geometry(format!(
                "antenna spacing {spacing} outside (0, 0.5]"
            )));
        }
        Ok(Self { antennas, spacing })
    }

    pub fn antennas(&self) -> usize {
        self.antennas
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// Spatial frequency `-D sin(theta)` seen by a plane wave at `theta`.
    pub fn spatial_frequency(&self, theta: f64) -> f64 {
        -self.spacing * theta.sin()
    }
}

/// Scattering cluster seen from the array, angles in radians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClusterSpec {
    pub azimuth: f64,
    /// Half-width of the angular spread.
    pub spread: f64,
    /// Relative power; normalised across the profile's clusters.
    pub weight: f64,
}

impl ClusterSpec {
    pub fn new(azimuth: f64, spread: f64) -> Self {
        Self {
            azimuth,
            spread,
            weight: 1.0,
        }
    }

    /// Spatial-frequency interval `(-D sin(theta + spread), -D sin(theta - spread))`.
    pub fn interval(&self, geometry: &ArrayGeometry) -> Result<AngularInterval> {
        let lo = geometry.spatial_frequency(self.azimuth + self.spread);
        let hi = geometry.spatial_frequency(self.azimuth - self.spread);
        AngularInterval::new(lo, hi)
    }
}

/// A discrete multipath component.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MpcSpec {
    /// Linear power `|rho|^2`.
    pub power: f64,
    /// Fixed phase in radians; drawn uniformly per realisation when absent.
    pub phase: Option<f64>,
    /// Delay in seconds. Carried as metadata; the covariance does not depend on it.
    pub delay: f64,
    /// Angle of departure at the array, radians.
    pub aod: f64,
    /// Angle of arrival at the user, radians. Metadata only.
    pub aoa: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ChannelModel {
    Clusters(Vec<ClusterSpec>),
    DiscreteMpcs(Vec<MpcSpec>),
}

/// A user, or a group of co-located users sharing one covariance.
#[derive(Debug, Clone, PartialEq)]
pub struct UserProfile {
    pub id: String,
    /// Number of statistically equivalent users behind this profile.
    pub users: usize,
    /// Large-scale power gain applied to every channel draw.
    pub gain: f64,
    pub model: ChannelModel,
}

impl UserProfile {
    pub fn clusters(id: impl Into<String>, clusters: Vec<ClusterSpec>) -> Self {
        Self {
            id: id.into(),
            users: 1,
            gain: 1.0,
            model: ChannelModel::Clusters(clusters),
        }
    }

    pub fn mpcs(id: impl Into<String>, mpcs: Vec<MpcSpec>) -> Self {
        Self {
            id: id.into(),
            users: 1,
            gain: 1.0,
            model: ChannelModel::DiscreteMpcs(mpcs),
        }
    }

    pub fn with_users(mut self, users: usize) -> Self {
        self.users = users;
        self
    }

    pub fn validate(&self, geometry: &ArrayGeometry) -> Result<()> {
        let bad = |reason: String| Error::Profile {
            profile: self.id.clone(),
            reason,
        };
        if self.users == 0 {
            return Err(bad("group must contain at least one user".into()));
        }
        if !(self.gain > 0.0 && self.gain.is_finite()) {
            return Err(bad(format!("gain {} must be positive", self.gain)));
        }
        let half_pi = PI / 2.0;
        match &self.model {
            ChannelModel::Clusters(cs) => {
                if cs.is_empty() {
                    return Err(bad("no clusters".into()));
                }
                let mut seen = AngularSet::empty();
                for (i, c) in cs.iter().enumerate() {
                    if !(c.spread > 0.0) {
                        return Err(bad(format!("cluster {i}: spread must be positive")));
                    }
                    if !(c.weight >= 0.0 && c.weight.is_finite()) {
                        return Err(bad(format!("cluster {i}: weight must be non-negative")));
                    }
                    if c.azimuth - c.spread <= -half_pi || c.azimuth + c.spread >= half_pi {
                        return Err(bad(format!(
                            "cluster {i}: azimuth +/- spread leaves (-90, 90) degrees"
                        )));
                    }
                    let iv = AngularSet::from_interval(c.interval(geometry)?);
                    if !seen.intersect(&iv).is_empty() {
                        return Err(bad(format!("cluster {i} overlaps an earlier cluster")));
                    }
                    seen = seen.union(&iv);
                }
                if cs.iter().map(|c| c.weight).sum::<f64>() <= 0.0 {
                    return Err(bad("cluster weights sum to zero".into()));
                }
            }
            ChannelModel::DiscreteMpcs(ms) => {
                if ms.is_empty() {
                    return Err(bad("no multipath components".into()));
                }
                for (i, m) in ms.iter().enumerate() {
                    if !(m.power >= 0.0 && m.power.is_finite()) {
                        return Err(bad(format!("mpc {i}: power must be non-negative")));
                    }
                    if m.aod <= -half_pi || m.aod >= half_pi {
                        return Err(bad(format!("mpc {i}: AoD outside (-90, 90) degrees")));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Hermitian PSD covariance with a cached, descending eigendecomposition.
#[derive(Debug, Clone)]
pub struct Covariance {
    matrix: CMatrix,
    eigenvalues: Vec<f64>,
    /// Full unitary eigenvector basis, columns ordered like `eigenvalues`.
    basis: CMatrix,
    rank: usize,
}

impl Covariance {
    /// Wrap a Hermitian PSD matrix. Small Hermitian asymmetry is averaged
    /// away; eigenvalues within `PSD_SLACK * lambda_max` below zero are
    /// clamped, anything more negative is rejected.
    pub fn from_matrix(matrix: CMatrix) -> Result<Self> {
        Self::checked(matrix, None)
    }

    /// Wrap `A^H R A` for a semi-unitary `A`. Round-off and the rank cutoff
    /// are judged against `R`, so a nearly annihilated projection has rank 0
    /// instead of failing the PSD check.
    pub fn from_projection(matrix: CMatrix, parent: &Covariance) -> Result<Self> {
        Self::checked(matrix, Some(parent))
    }

    fn checked(matrix: CMatrix, parent: Option<&Covariance>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::NotPsd(format!(
                "{}x{} matrix is not square",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let own = matrix.norm();
        let scale = parent.map_or(own, |p| p.matrix.norm().max(own)).max(f64::MIN_POSITIVE);
        let asym = (&matrix - matrix.adjoint()).norm();
        if asym > 1e-10 * scale {
            return Err(Error::NotPsd(format!("Hermitian residual {asym:.3e}")));
        }
        let matrix = crate::linalg::hermitize(&matrix);
        let (mut values, vectors) = hermitian_eigen(&matrix);
        let lmax = values.first().cloned().unwrap_or(0.0).max(0.0);
        let reference = parent.map_or(lmax, |p| p.eigenvalues.first().cloned().unwrap_or(0.0).max(lmax));
        if let Some(&lmin) = values.last() {
            if lmin < -PSD_SLACK * reference.max(f64::MIN_POSITIVE) {
                return Err(Error::NotPsd(format!("eigenvalue {lmin:.3e}")));
            }
        }
        for v in values.iter_mut() {
            if *v < 0.0 {
                *v = 0.0;
            }
        }
        let rank = values
            .iter()
            .filter(|&&v| reference > 0.0 && v > RANK_CUTOFF * reference)
            .count();
        Ok(Self {
            matrix,
            eigenvalues: values,
            basis: vectors,
            rank,
        })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    /// All eigenvalues, descending, negatives clamped to zero.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// `dim x rank` eigenvector matrix.
    pub fn eigenvectors(&self) -> DMatrixView<'_, Complex64> {
        self.basis.columns(0, self.rank)
    }

    /// All `dim` eigenvectors, including those of zero eigenvalues.
    pub fn basis(&self) -> &CMatrix {
        &self.basis
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    /// The `r` leading eigenvectors (`r` is capped at the rank).
    pub fn dominant(&self, r: usize) -> CMatrix {
        self.basis.columns(0, r.min(self.rank)).into_owned()
    }
}

/// Rule for counting dominant eigenmodes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RankPolicy {
    /// Smallest `r` whose leading eigenvalues carry at least this share of the trace.
    EnergyFraction(f64),
    /// Number of eigenvalues at or above this fraction of the largest.
    RelativeThreshold(f64),
}

impl Default for RankPolicy {
    fn default() -> Self {
        RankPolicy::EnergyFraction(0.95)
    }
}

impl RankPolicy {
    pub fn validate(&self) -> Result<()> {
        match *self {
            RankPolicy::EnergyFraction(eta) if !(eta > 0.0 && eta <= 1.0) => Err(Error::Config(
                format!("energy fraction {eta} outside (0, 1]"),
            )),
            RankPolicy::RelativeThreshold(g) if !(g > 0.0 && g < 1.0) => Err(Error::Config(
                format!("relative threshold {g} outside (0, 1)"),
            )),
            _ => Ok(()),
        }
    }
}

/// Steering vector with entries `exp(-j 2 pi D m sin(theta))`, `m = 0..M`.
pub fn array_response(geometry: &ArrayGeometry, theta: f64) -> CVector {
    let phase = -2.0 * PI * geometry.spacing * theta.sin();
    DVector::from_fn(geometry.antennas, |m, _| Complex64::from_polar(1.0, phase * m as f64))
}

/// Gauss–Legendre node count used for one cluster's covariance integral.
pub fn cluster_node_count(geometry: &ArrayGeometry, cluster: &ClusterSpec) -> usize {
    let span = (cluster.azimuth + cluster.spread).sin() - (cluster.azimuth - cluster.spread).sin();
    let cycles = (geometry.spacing * geometry.antennas as f64 * span * PI).ceil() as usize;
    (16 * cycles).max(128)
}

/// First column of the Toeplitz covariance of a cluster profile:
/// `r[l] = sum_c w_c / (2 spread_c) * int exp(-j 2 pi D l sin a) da`.
fn cluster_autocorrelation(geometry: &ArrayGeometry, clusters: &[ClusterSpec]) -> Vec<Complex64> {
    let m = geometry.antennas;
    let total: f64 = clusters.iter().map(|c| c.weight).sum();
    let mut r = vec![Complex64::new(0.0, 0.0); m];
    for c in clusters {
        let w = c.weight / total;
        if w == 0.0 {
            continue;
        }
        let (x, wq) = gauss_legendre(cluster_node_count(geometry, c));
        let (alpha, weights) = scaled_rule(&x, &wq, c.azimuth - c.spread, c.azimuth + c.spread);
        let norm = w / (2.0 * c.spread);
        let k = -2.0 * PI * geometry.spacing;
        let sines: Vec<f64> = alpha.iter().map(|a| a.sin()).collect();
        for (lag, slot) in r.iter_mut().enumerate() {
            let kl = k * lag as f64;
            let mut acc = Complex64::new(0.0, 0.0);
            for (s, wt) in sines.iter().zip(&weights) {
                acc += Complex64::from_polar(*wt, kl * s);
            }
            *slot += acc * norm;
        }
    }
    r
}

/// Covariance of a multi-cluster profile: Hermitian Toeplitz with unit diagonal.
pub fn covariance_from_clusters(
    geometry: &ArrayGeometry,
    clusters: &[ClusterSpec],
) -> Result<Covariance> {
    UserProfile::clusters("clusters", clusters.to_vec()).validate(geometry)?;
    let r = cluster_autocorrelation(geometry, clusters);
    let m = geometry.antennas;
    let mat = CMatrix::from_fn(m, m, |i, j| {
        if i >= j {
            r[i - j]
        } else {
            r[j - i].conj()
        }
    });
    Covariance::from_matrix(mat)
}

/// `R = sum_p |rho_p|^2 a(theta_p) a(theta_p)^H`.
pub fn covariance_from_mpcs(geometry: &ArrayGeometry, mpcs: &[MpcSpec]) -> Result<Covariance> {
    UserProfile::mpcs("mpcs", mpcs.to_vec()).validate(geometry)?;
    let m = geometry.antennas;
    let mut mat = CMatrix::zeros(m, m);
    for p in mpcs {
        let a = array_response(geometry, p.aod);
        mat += (&a * a.adjoint()).scale(p.power);
    }
    Covariance::from_matrix(mat)
}

pub fn covariance(geometry: &ArrayGeometry, profile: &UserProfile) -> Result<Covariance> {
    profile.validate(geometry)?;
    match &profile.model {
        ChannelModel::Clusters(cs) => covariance_from_clusters(geometry, cs),
        ChannelModel::DiscreteMpcs(ms) => covariance_from_mpcs(geometry, ms),
    }
}

/// Standard circularly-symmetric complex Gaussian sample.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// `h = U Lambda^{1/2} w` with `w ~ CN(0, I_rank)`.
pub fn sample_channel<R: Rng + ?Sized>(cov: &Covariance, rng: &mut R) -> CVector {
    let r = cov.rank();
    let w = DVector::from_fn(r, |i, _| complex_gaussian(rng) * cov.eigenvalues[i].sqrt());
    cov.eigenvectors() * w
}

/// One channel realisation for a profile. Cluster profiles are Gaussian
/// with covariance `cov`; discrete profiles sum their MPCs with phases drawn
/// uniformly on `[0, 2 pi)` unless fixed.
pub fn realize_channel<R: Rng + ?Sized>(
    geometry: &ArrayGeometry,
    profile: &UserProfile,
    cov: &Covariance,
    rng: &mut R,
) -> CVector {
    let h = match &profile.model {
        ChannelModel::Clusters(_) => sample_channel(cov, rng),
        ChannelModel::DiscreteMpcs(ms) => {
            let mut h = CVector::zeros(geometry.antennas);
            for p in ms {
                let phi = p.phase.unwrap_or_else(|| rng.random::<f64>() * 2.0 * PI);
                let coeff = Complex64::from_polar(p.power.sqrt(), phi);
                h += array_response(geometry, p.aod) * coeff;
            }
            h
        }
    };
    if profile.gain == 1.0 {
        h
    } else {
        h * Complex64::new(profile.gain.sqrt(), 0.0)
    }
}

/// Support `W_k` of the eigenvalue spectrum.
pub fn spectral_support(geometry: &ArrayGeometry, profile: &UserProfile) -> Result<AngularSet> {
    match &profile.model {
        ChannelModel::Clusters(cs) => {
            let ivs = cs
                .iter()
                .filter(|c| c.weight > 0.0)
                .map(|c| c.interval(geometry))
                .collect::<Result<Vec<_>>>()?;
            Ok(AngularSet::from_intervals(ivs))
        }
        ChannelModel::DiscreteMpcs(ms) => {
            let m = geometry.antennas;
            let bins = ms
                .iter()
                .filter(|p| p.power > 0.0)
                .map(|p| angular::bin(angular::bin_index(geometry.spatial_frequency(p.aod), m), m))
                .collect::<Result<Vec<_>>>()?;
            Ok(AngularSet::from_intervals(bins))
        }
    }
}

/// Eigenvalue spectrum of a profile, integrable over angular sets.
#[derive(Debug, Clone, PartialEq)]
pub enum SpectralDensity {
    /// Piecewise `scale / sqrt(D^2 - f^2)` over each cluster interval.
    Clusters {
        spacing: f64,
        parts: Vec<ClusterDensityPart>,
    },
    /// One atom per MPC at its bin centre.
    Mpcs { atoms: Vec<(f64, f64)> },
}

/// Density `scale / sqrt(D^2 - f^2)` restricted to one cluster interval.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterDensityPart {
    pub support: AngularSet,
    pub scale: f64,
}

impl SpectralDensity {
    pub fn from_profile(geometry: &ArrayGeometry, profile: &UserProfile) -> Result<Self> {
        match &profile.model {
            ChannelModel::Clusters(cs) => {
                let total: f64 = cs.iter().map(|c| c.weight).sum();
                let parts = cs
                    .iter()
                    .map(|c| {
                        Ok(ClusterDensityPart {
                            support: AngularSet::from_interval(c.interval(geometry)?),
                            scale: c.weight / total / (2.0 * c.spread),
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(SpectralDensity::Clusters {
                    spacing: geometry.spacing,
                    parts,
                })
            }
            ChannelModel::DiscreteMpcs(ms) => {
                let m = geometry.antennas;
                let atoms = ms
                    .iter()
                    .map(|p| {
                        let i = angular::bin_index(geometry.spatial_frequency(p.aod), m);
                        (angular::bin_centre(i, m), p.power)
                    })
                    .collect();
                Ok(SpectralDensity::Mpcs { atoms })
            }
        }
    }

    /// `f_k(X) = int_X xi_k(f) df`.
    pub fn integral(&self, x: &AngularSet) -> f64 {
        match self {
            SpectralDensity::Clusters { spacing, parts } => {
                let d = *spacing;
                parts
                    .iter()
                    .map(|p| {
                        let overlap = x.intersect(&p.support);
                        let s: f64 = overlap
                            .pieces()
                            .iter()
                            .map(|&(a, b)| {
                                let a = (a / d).clamp(-1.0, 1.0);
                                let b = (b / d).clamp(-1.0, 1.0);
                                b.asin() - a.asin()
                            })
                            .sum();
                        p.scale * s
                    })
                    .sum()
            }
            SpectralDensity::Mpcs { atoms } => atoms
                .iter()
                .filter(|(c, _)| x.contains(*c))
                .map(|(_, p)| p)
                .sum(),
        }
    }
}

/// `f_k(X)` for a profile.
pub fn spectral_density_integral(
    geometry: &ArrayGeometry,
    profile: &UserProfile,
    x: &AngularSet,
) -> Result<f64> {
    Ok(SpectralDensity::from_profile(geometry, profile)?.integral(x))
}

/// Number of dominant eigenmodes under `policy`.
pub fn effective_rank(cov: &Covariance, policy: RankPolicy) -> usize {
    let vals = &cov.eigenvalues()[..cov.rank()];
    if vals.is_empty() {
        return 0;
    }
    match policy {
        RankPolicy::EnergyFraction(eta) => {
            let total: f64 = vals.iter().sum();
            let target = eta * total;
            let mut acc = 0.0;
            for (i, v) in vals.iter().enumerate() {
                acc += v;
                // relative slack so eta = 1 is reachable despite rounding
                if acc >= target * (1.0 - 1e-12) {
                    return i + 1;
                }
            }
            vals.len()
        }
        RankPolicy::RelativeThreshold(gamma) => {
            let top = vals[0];
            vals.iter().filter(|&&v| v >= gamma * top).count()
        }
    }
}
