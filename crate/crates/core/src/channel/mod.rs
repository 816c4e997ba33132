//! Stochastic link realizations: large-scale gain, small-scale fading and
//! the CSI-error model.

mod ensemble;
pub mod fading;
pub mod pathloss;
pub mod penetration;

use serde::{Deserialize, Serialize};

pub use ensemble::{realize_ensemble, LinkEnsemble, PathKind};
pub use fading::{sample_small_scale, sample_with_specular};
pub use pathloss::{los_probability, pathloss_db, Environment, PathlossKind};
pub use penetration::{o2i_penetration_db, sample_o2i_db, BuildingClass};

use crate::error::{Error, Result};
use crate::linalg::{CMat, CVec};
use crate::scenario::{LinkId, LinkState, Position};
use crate::Complex64;

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Channel section of the run configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChannelConfig {
    pub fc_ghz: f64,
    pub bandwidth_hz: f64,
    pub noise_dbm_per_hz: f64,
    pub bs_antennas: usize,
    pub shadow_los_db: f64,
    pub shadow_nlos_db: f64,
    pub rician_k_db: f64,
    /// Error power relative to the mean channel power of a link.
    pub error_ratio: f64,
    pub building: BuildingClass,
    /// BS-to-surface and surface-to-surface links are always LoS.
    pub infrastructure_los: bool,
    pub bs_spacing_wl: f64,
    pub ris_spacing_wl: f64,
    pub holo_spacing_wl: f64,
}

impl Default for ChannelConfig {
    fn default() -> Self {
        ChannelConfig {
            fc_ghz: 28.0,
            bandwidth_hz: 5e9,
            noise_dbm_per_hz: -174.0,
            bs_antennas: 4,
            shadow_los_db: 4.0,
            shadow_nlos_db: 7.0,
            rician_k_db: 10.0,
            error_ratio: 0.01,
            building: BuildingClass::Traditional,
            infrastructure_los: true,
            bs_spacing_wl: 0.5,
            ris_spacing_wl: 0.5,
            holo_spacing_wl: 0.25,
        }
    }
}

impl ChannelConfig {
    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / (self.fc_ghz * 1e9)
    }

    /// Thermal noise power in watts over the configured bandwidth.
    pub fn noise_power(&self) -> f64 {
        dbm_to_watts(self.noise_dbm_per_hz + 10.0 * self.bandwidth_hz.log10())
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("fc_ghz", self.fc_ghz),
            ("bandwidth_hz", self.bandwidth_hz),
            ("bs_spacing_wl", self.bs_spacing_wl),
            ("ris_spacing_wl", self.ris_spacing_wl),
            ("holo_spacing_wl", self.holo_spacing_wl),
        ];
        for (name, v) in positive {
            if !(v > 0.0) {
                return Err(Error::Config(format!("channel.{name} must be positive")));
            }
        }
        if self.bs_antennas == 0 {
            return Err(Error::Config("channel.bs_antennas must be >= 1".into()));
        }
        if self.shadow_los_db < 0.0 || self.shadow_nlos_db < 0.0 || self.error_ratio < 0.0 {
            return Err(Error::Config("shadowing and error ratio must be >= 0".into()));
        }
        Ok(())
    }
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Element counts of every array in the system.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArrayDims {
    pub bs: usize,
    pub uav: usize,
    pub star: usize,
    pub holo: usize,
}

/// One realized link. Matrices are propagation matrices (rx x tx); for a
/// single-antenna receiver the channel vector is `h` with `h^H` equal to
/// the propagation row, so that the received sample is `h^H x`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinkChannel {
    pub id: LinkId,
    pub state: LinkState,
    pub kind: PathlossKind,
    pub pathloss_db: f64,
    pub shadow_db: f64,
    /// Building entry and blockage losses.
    pub extra_db: f64,
    /// Linear large-scale gain.
    pub beta: f64,
    pub tx_center: Position,
    pub rx_center: Position,
    pub small_scale: CMat,
    pub channel: CMat,
    pub estimate: CMat,
    /// Covariance of the error on `h` (tx x tx); empty for matrix links.
    pub error_cov: CMat,
    pub error_power: f64,
}

impl LinkChannel {
    pub fn is_vector(&self) -> bool {
        self.channel.nrows() == 1
    }

    /// True channel vector `h`.
    pub fn h(&self) -> CVec {
        row_vector(&self.channel)
    }

    /// Estimated channel vector `h_hat = h - dh`.
    pub fn h_hat(&self) -> CVec {
        row_vector(&self.estimate)
    }

    pub fn tx_dim(&self) -> usize {
        self.channel.ncols()
    }
}

pub(crate) fn row_vector(m: &CMat) -> CVec {
    CVec::from_iterator(m.ncols(), m.row(0).iter().map(|z| z.conj()))
}

/// Isotropic error covariance `(error_power / N) I` on the link's channel
/// vector.
pub fn build_error_covariance(link: &LinkChannel, error_power: f64) -> Result<CMat> {
    isotropic_covariance(link.tx_dim(), error_power)
}

pub fn isotropic_covariance(n: usize, error_power: f64) -> Result<CMat> {
    if !(error_power >= 0.0) {
        return Err(Error::param(format!("error power must be >= 0, got {error_power}")));
    }
    if n == 0 {
        return Ok(CMat::zeros(0, 0));
    }
    Ok(CMat::identity(n, n) * Complex64::from(error_power / n as f64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{hermitian_eigenvalues, re_trace};

    #[test]
    fn zero_error_power_gives_zero_matrix() {
        let c = isotropic_covariance(3, 0.0).unwrap();
        assert!(c.iter().all(|z| *z == Complex64::new(0.0, 0.0)));
    }

    #[test]
    fn isotropic_split() {
        let c = isotropic_covariance(4, 0.04).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let expected = if i == j { 0.01 } else { 0.0 };
                assert!((c[(i, j)].re - expected).abs() < 1e-15 && c[(i, j)].im == 0.0);
            }
        }
        assert!(hermitian_eigenvalues(&c).iter().all(|&l| l >= -1e-10));
        assert!(re_trace(&c) <= 0.04 + 1e-15);
    }

    #[test]
    fn negative_error_power_rejected() {
        assert!(isotropic_covariance(2, -1.0).is_err());
    }

    #[test]
    fn noise_power_of_default_bandwidth() {
        let cfg = ChannelConfig::default();
        let dbm = 10.0 * (cfg.noise_power() * 1e3).log10();
        assert!((dbm - (-174.0 + 10.0 * 5e9f64.log10())).abs() < 1e-9);
    }
}
