//! Two-stage JSDM precoders: a statistics-only pre-beamformer `B_g` per
//! group followed by an inner precoder `P_g` on the effective channel
//! `B_g^H H_g`.

use nalgebra::DVector;
use num_complex::Complex64;

use crate::channel::{effective_rank, Covariance, RankPolicy};
use crate::error::{DimensionShortfall, Error, Result};
use crate::linalg::{orthogonal_complement, singular_values, CMatrix};

/// Singular values of the interference stack below this fraction of the
/// largest are left in the orthogonal complement.
pub const COMPLEMENT_TOL: f64 = 1e-8;

/// Condition number above which an effective channel counts as rank deficient.
pub const MAX_CONDITION: f64 = 1e12;

/// Eigenvalues this close (relatively) to the largest count as tied.
const TIE_REL: f64 = 1e-10;

/// `M x b` pre-beamformer with orthonormal columns.
#[derive(Debug, Clone)]
pub struct PreBeamformer {
    pub group: usize,
    pub matrix: CMatrix,
}

impl PreBeamformer {
    pub fn width(&self) -> usize {
        self.matrix.ncols()
    }
}

/// Inner zero-forcing precoder `P_g = zeta^2 Hbar (Hbar^H Hbar)^{-1}`.
#[derive(Debug, Clone)]
pub struct GroupPrecoder {
    /// `b x K` matrix.
    pub matrix: CMatrix,
    pub zeta_sq: f64,
    pub power: f64,
}

impl GroupPrecoder {
    pub fn streams(&self) -> usize {
        self.matrix.ncols()
    }
}

/// Per-group `(B_g, P_g)` pairs making up `V = B P`.
#[derive(Debug, Clone)]
pub struct PrecoderSet {
    pub groups: Vec<(PreBeamformer, GroupPrecoder)>,
}

impl PrecoderSet {
    pub fn streams(&self) -> usize {
        self.groups.iter().map(|(_, p)| p.streams()).sum()
    }

    /// `trace(V^H V)`.
    pub fn radiated_power(&self) -> f64 {
        self.groups
            .iter()
            .map(|(b, p)| (&b.matrix * &p.matrix).norm_squared())
            .sum()
    }

    /// The overall `M x S` precoding matrix.
    pub fn overall(&self) -> CMatrix {
        let m = self.groups.first().map_or(0, |(b, _)| b.matrix.nrows());
        let mut v = CMatrix::zeros(m, self.streams());
        let mut col = 0;
        for (b, p) in &self.groups {
            let block = &b.matrix * &p.matrix;
            v.columns_mut(col, block.ncols()).copy_from(&block);
            col += block.ncols();
        }
        v
    }
}

/// Group `g` seen through the complement of the other groups' dominant
/// eigenspaces.
#[derive(Debug, Clone)]
pub struct BdProjection {
    pub group: usize,
    /// `E_g^(0)`: orthonormal basis of the complement, `M x c`.
    pub complement: CMatrix,
    /// `(E_g^(0))^H R_g E_g^(0)`.
    pub projected: Covariance,
}

impl BdProjection {
    /// Map a beamformer in projected coordinates back to the array.
    pub fn lift(&self, inner: &PreBeamformer) -> PreBeamformer {
        PreBeamformer {
            group: self.group,
            matrix: &self.complement * &inner.matrix,
        }
    }
}

/// Dominant eigenvectors of every group other than `g`, side by side (`Xi_g`).
pub fn interference_stack(covs: &[&Covariance], policy: RankPolicy, g: usize) -> CMatrix {
    let m = covs[g].dim();
    let blocks: Vec<CMatrix> = covs
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != g)
        .map(|(_, c)| c.dominant(effective_rank(c, policy)))
        .collect();
    let width: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut xi = CMatrix::zeros(m, width);
    let mut col = 0;
    for b in blocks {
        xi.columns_mut(col, b.ncols()).copy_from(&b);
        col += b.ncols();
    }
    xi
}

/// Complement bases and projected covariances for every group.
pub fn bd_projections(covs: &[&Covariance], policy: RankPolicy) -> Result<Vec<BdProjection>> {
    policy.validate()?;
    if covs.is_empty() {
        return Ok(Vec::new());
    }
    let m = covs[0].dim();
    if let Some(bad) = covs.iter().find(|c| c.dim() != m) {
        return Err(Error::DimensionMismatch(format!(
            "covariances of size {m} and {}",
            bad.dim()
        )));
    }
    (0..covs.len())
        .map(|g| {
            let xi = interference_stack(covs, policy, g);
            let e0 = orthogonal_complement(&xi, m, COMPLEMENT_TOL);
            let projected = Covariance::from_projection(e0.adjoint() * covs[g].matrix() * &e0, covs[g])?;
            Ok(BdProjection {
                group: g,
                complement: e0,
                projected,
            })
        })
        .collect()
}

/// Width requested for a group's pre-beamformer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Width {
    Fixed(usize),
    /// `min(streams, effective rank of the projected covariance)`.
    Auto { streams: usize },
}

/// Approximate block diagonalisation. For each group the pre-beamformer is
/// `E_g^(0)` times the top-`b_g` eigenvectors of the projected covariance, so
/// it is exactly orthogonal to the other groups' dominant eigenvectors.
pub fn approximate_bd(
    covs: &[&Covariance],
    policy: RankPolicy,
    widths: &[Width],
) -> Result<Vec<PreBeamformer>> {
    let projections = bd_projections(covs, policy)?;
    approximate_bd_from(&projections, policy, widths)
}

pub fn approximate_bd_from(
    projections: &[BdProjection],
    policy: RankPolicy,
    widths: &[Width],
) -> Result<Vec<PreBeamformer>> {
    if widths.len() != projections.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} widths for {} groups",
            widths.len(),
            projections.len()
        )));
    }
    let mut shortfalls = Vec::new();
    let mut out = Vec::with_capacity(projections.len());
    for (proj, width) in projections.iter().zip(widths) {
        let available = proj.complement.ncols();
        let b = match *width {
            Width::Fixed(b) => b,
            Width::Auto { streams } => streams.min(effective_rank(&proj.projected, policy)),
        };
        let requested = match *width {
            Width::Fixed(b) => b,
            Width::Auto { streams } => streams,
        };
        if b == 0 || b > available {
            shortfalls.push(DimensionShortfall {
                group: proj.group,
                available: if b == 0 { 0 } else { available },
                requested: requested.max(1),
            });
            continue;
        }
        let g1 = proj.projected.basis().columns(0, b);
        out.push(PreBeamformer {
            group: proj.group,
            matrix: &proj.complement * g1,
        });
    }
    if shortfalls.is_empty() {
        Ok(out)
    } else {
        Err(Error::InsufficientDimensions(shortfalls))
    }
}

/// Zero-forcing on a `b x K` effective channel, scaled so that
/// `trace(P^H P) = power`. The result satisfies `Hbar^H P = zeta^2 I`.
pub fn zero_forcing(effective: &CMatrix, power: f64, group: usize) -> Result<GroupPrecoder> {
    let (b, k) = effective.shape();
    if k == 0 {
        return Ok(GroupPrecoder {
            matrix: CMatrix::zeros(b, 0),
            zeta_sq: 0.0,
            power: 0.0,
        });
    }
    if k > b {
        return Err(Error::TooManyStreams {
            group,
            streams: k,
            width: b,
        });
    }
    let sv = singular_values(effective);
    let smin = *sv.last().unwrap_or(&0.0);
    let condition = if smin > 0.0 { sv[0] / smin } else { f64::INFINITY };
    if !(condition <= MAX_CONDITION) {
        return Err(Error::RankDeficient { group, condition });
    }
    // Hbar = Q R  =>  Hbar (Hbar^H Hbar)^{-1} = Q R^{-H}
    let qr = effective.clone().qr();
    let q = qr.q();
    let r = qr.r();
    let r_inv = r
        .solve_upper_triangular(&CMatrix::identity(k, k))
        .ok_or(Error::RankDeficient { group, condition })?;
    let unit = q * r_inv.adjoint();
    let norm_sq = unit.norm_squared();
    let zeta_sq = (power.max(0.0) / norm_sq).sqrt();
    Ok(GroupPrecoder {
        matrix: unit * Complex64::new(zeta_sq, 0.0),
        zeta_sq,
        power: power.max(0.0),
    })
}

/// Single-column beamformer along the dominant eigenvector. When the top
/// eigenvalue is repeated, the first canonical basis vector with a non-zero
/// projection onto the top eigenspace is projected and normalised.
pub fn covariance_beamformer(cov: &Covariance) -> Result<PreBeamformer> {
    if cov.rank() == 0 {
        return Err(Error::WidthExceedsRank {
            requested: 1,
            rank: 0,
        });
    }
    let vals = cov.eigenvalues();
    let tied = vals.iter().take_while(|&&v| v >= vals[0] * (1.0 - TIE_REL)).count();
    let basis = cov.basis();
    let n = cov.dim();
    let column = if tied == 1 {
        basis.column(0).into_owned()
    } else {
        let top = basis.columns(0, tied);
        (0..n)
            .map(|i| {
                // projection of e_i onto span(top) is top * conj(row i of top)
                let coeffs = DVector::from_fn(tied, |c, _| top[(i, c)].conj());
                top * coeffs
            })
            .find(|v| v.norm() > 1e-8)
            .map(|v| v.normalize())
            .unwrap_or_else(|| basis.column(0).into_owned())
    };
    Ok(PreBeamformer {
        group: 0,
        matrix: CMatrix::from_columns(&[column]),
    })
}

/// Top-`b` eigenvectors of the group's own covariance, no nulling.
pub fn full_eigen_beamformer(cov: &Covariance, b: usize) -> Result<PreBeamformer> {
    if b == 0 || b > cov.rank() {
        return Err(Error::WidthExceedsRank {
            requested: b,
            rank: cov.rank(),
        });
    }
    Ok(PreBeamformer {
        group: 0,
        matrix: cov.dominant(b),
    })
}

/// `|| (U_other)^H B ||_F`.
pub fn leakage(dominant_other: &CMatrix, beamformer: &PreBeamformer) -> f64 {
    (dominant_other.adjoint() * &beamformer.matrix).norm()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{array_response, covariance_from_mpcs, ArrayGeometry, MpcSpec};
    use crate::linalg::orthonormality_error;

    fn mpc(power: f64, aod: f64) -> MpcSpec {
        MpcSpec {
            power,
            phase: None,
            delay: 0.0,
            aod,
            aoa: None,
        }
    }

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn single_group_is_eigen_beamforming() {
        let g = ArrayGeometry::new(8, 0.5).unwrap();
        let cov = covariance_from_mpcs(&g, &[mpc(2.0, 0.0), mpc(1.0, (-0.25f64).asin())]).unwrap();
        let b = approximate_bd(&[&cov], RankPolicy::default(), &[Width::Fixed(1)]).unwrap();
        let top = cov.dominant(1);
        let overlap = (top.adjoint() * &b[0].matrix)[(0, 0)].norm();
        assert!((overlap - 1.0).abs() < 1e-10);
    }

    #[test]
    fn orthogonal_rank_one_groups() {
        let g = ArrayGeometry::new(8, 0.5).unwrap();
        let t2 = (-0.25f64).asin();
        let c1 = covariance_from_mpcs(&g, &[mpc(1.0, 0.0)]).unwrap();
        let c2 = covariance_from_mpcs(&g, &[mpc(1.0, t2)]).unwrap();
        let bs = approximate_bd(&[&c1, &c2], RankPolicy::default(), &[Width::Auto { streams: 3 }; 2])
            .unwrap();
        assert_eq!(bs[0].width(), 1);
        let a1 = array_response(&g, 0.0).normalize();
        let a2 = array_response(&g, t2).normalize();
        assert!((a1.dotc(&bs[0].matrix.column(0)).norm() - 1.0).abs() < 1e-10);
        assert!((a2.dotc(&bs[1].matrix.column(0)).norm() - 1.0).abs() < 1e-10);
        assert!(leakage(&c2.dominant(1), &bs[0]) < 1e-10);
    }

    #[test]
    fn insufficient_dimensions_reported_per_group() {
        let g = ArrayGeometry::new(4, 0.5).unwrap();
        let full = Covariance::from_matrix(CMatrix::identity(4, 4)).unwrap();
        let narrow = covariance_from_mpcs(&g, &[mpc(1.0, 0.0)]).unwrap();
        let err = approximate_bd(
            &[&full, &narrow],
            RankPolicy::EnergyFraction(1.0),
            &[Width::Fixed(1), Width::Fixed(1)],
        )
        .unwrap_err();
        match err {
            Error::InsufficientDimensions(v) => {
                assert_eq!(v.len(), 1);
                assert_eq!(v[0].group, 1);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn zf_single_user_is_matched_filter() {
        let h = CMatrix::from_column_slice(3, 1, &[c(1.0), Complex64::new(0.0, 2.0), c(-1.0)]);
        let p = zero_forcing(&h, 4.0, 0).unwrap();
        assert!((p.matrix.norm_squared() - 4.0).abs() < 1e-12);
        let mf = &h * c(1.0 / h.norm_squared());
        let ratio = p.matrix[(0, 0)] / mf[(0, 0)];
        assert!((&mf * ratio - &p.matrix).norm() < 1e-12);
        assert!((ratio.im).abs() < 1e-12 && ratio.re > 0.0);
    }

    #[test]
    fn zf_identity_channel() {
        let p = zero_forcing(&CMatrix::identity(4, 4), 8.0, 0).unwrap();
        let expected = CMatrix::identity(4, 4) * c((8.0f64 / 4.0).sqrt());
        assert!((p.matrix - expected).norm() < 1e-12);
    }

    #[test]
    fn zf_rejects_rank_deficient() {
        let h = CMatrix::from_fn(4, 2, |r, _| c(r as f64 + 1.0));
        assert!(matches!(zero_forcing(&h, 1.0, 3), Err(Error::RankDeficient { group: 3, .. })));
        let wide = CMatrix::identity(2, 3);
        assert!(matches!(zero_forcing(&wide, 1.0, 0), Err(Error::TooManyStreams { .. })));
    }

    #[test]
    fn covariance_beamformer_rules() {
        let g = ArrayGeometry::new(6, 0.5).unwrap();
        let cov = covariance_from_mpcs(&g, &[mpc(1.0 / 6.0, 0.4)]).unwrap();
        let b = covariance_beamformer(&cov).unwrap();
        let a = array_response(&g, 0.4).normalize();
        assert!((a.dotc(&b.matrix.column(0)).norm() - 1.0).abs() < 1e-10);

        let id = Covariance::from_matrix(CMatrix::identity(3, 3)).unwrap();
        let b = covariance_beamformer(&id).unwrap();
        let e0 = CMatrix::from_column_slice(3, 1, &[c(1.0), c(0.0), c(0.0)]);
        assert!((b.matrix - e0).norm() < 1e-12);
    }

    #[test]
    fn full_eigen_beamformer_widths() {
        let g = ArrayGeometry::new(8, 0.5).unwrap();
        let cov = covariance_from_mpcs(&g, &[mpc(2.0, 0.0), mpc(1.0, (-0.25f64).asin())]).unwrap();
        let b = full_eigen_beamformer(&cov, 2).unwrap();
        assert!(orthonormality_error(&b.matrix) < 1e-12);
        let captured = (b.matrix.adjoint() * cov.matrix() * &b.matrix).trace().re;
        assert!((captured - cov.trace()).abs() < 1e-9);
        let b1 = full_eigen_beamformer(&cov, 1).unwrap();
        let captured = (b1.matrix.adjoint() * cov.matrix() * &b1.matrix).trace().re;
        assert!((captured - 16.0).abs() < 1e-9);
        assert!(matches!(full_eigen_beamformer(&cov, 3), Err(Error::WidthExceedsRank { .. })));
    }

    #[test]
    fn covered_group_projects_to_rank_zero() {
        use crate::channel::{covariance_from_clusters, ClusterSpec};
        let g = ArrayGeometry::new(64, 0.5).unwrap();
        let inner = covariance_from_clusters(&g, &[ClusterSpec::new(0.1, 0.05)]).unwrap();
        let outer = covariance_from_clusters(&g, &[ClusterSpec::new(0.1, 0.4)]).unwrap();
        let p = bd_projections(&[&inner, &outer], RankPolicy::RelativeThreshold(1e-14)).unwrap();
        assert_eq!(effective_rank(&p[0].projected, RankPolicy::default()), 0);
        assert!(p[1].projected.rank() > 0);
    }
}
