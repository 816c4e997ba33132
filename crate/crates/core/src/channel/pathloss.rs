//! TR 38.901 pathloss (UMi street canyon, InH office) and LoS probability.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PathlossKind {
    UmiLos,
    UmiNlos,
    InhLos,
    InhNlos,
}

impl PathlossKind {
    pub const ALL: [PathlossKind; 4] =
        [PathlossKind::UmiLos, PathlossKind::UmiNlos, PathlossKind::InhLos, PathlossKind::InhNlos];

    pub fn name(self) -> &'static str {
        match self {
            PathlossKind::UmiLos => "umi-los",
            PathlossKind::UmiNlos => "umi-nlos",
            PathlossKind::InhLos => "inh-los",
            PathlossKind::InhNlos => "inh-nlos",
        }
    }

    pub fn environment(self) -> Environment {
        match self {
            PathlossKind::UmiLos | PathlossKind::UmiNlos => Environment::Umi,
            PathlossKind::InhLos | PathlossKind::InhNlos => Environment::Inh,
        }
    }

    pub fn is_los(self) -> bool {
        matches!(self, PathlossKind::UmiLos | PathlossKind::InhLos)
    }
}

impl fmt::Display for PathlossKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PathlossKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PathlossKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::param(format!("unknown pathloss kind {s:?}")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Environment {
    Umi,
    Inh,
}

impl Environment {
    pub fn kind(self, los: bool) -> PathlossKind {
        match (self, los) {
            (Environment::Umi, true) => PathlossKind::UmiLos,
            (Environment::Umi, false) => PathlossKind::UmiNlos,
            (Environment::Inh, true) => PathlossKind::InhLos,
            (Environment::Inh, false) => PathlossKind::InhNlos,
        }
    }
}

/// Terminal height used by the UMi-NLoS height correction.
pub const DEFAULT_UT_HEIGHT: f64 = 1.5;

/// Pathloss in dB. Distances below 1 m are clamped to 1 m.
pub fn pathloss_db(kind: PathlossKind, d3d: f64, fc_ghz: f64) -> Result<f64> {
    pathloss_db_with_height(kind, d3d, fc_ghz, DEFAULT_UT_HEIGHT)
}

pub fn pathloss_db_with_height(kind: PathlossKind, d3d: f64, fc_ghz: f64, h_ut: f64) -> Result<f64> {
    if !(fc_ghz > 0.0) {
        return Err(Error::param(format!("carrier frequency must be positive, got {fc_ghz}")));
    }
    if !d3d.is_finite() || d3d < 0.0 {
        return Err(Error::param(format!("distance must be finite and >= 0, got {d3d}")));
    }
    let ld = d3d.max(1.0).log10();
    let lf = fc_ghz.log10();
    let umi_los = 32.4 + 21.0 * ld + 20.0 * lf;
    let inh_los = 32.4 + 17.3 * ld + 20.0 * lf;
    Ok(match kind {
        PathlossKind::UmiLos => umi_los,
        PathlossKind::UmiNlos => umi_los.max(35.3 * ld + 22.4 + 21.3 * lf - 0.3 * (h_ut - 1.5)),
        PathlossKind::InhLos => inh_los,
        PathlossKind::InhNlos => inh_los.max(38.3 * ld + 17.30 + 24.9 * lf),
    })
}

/// LoS probability for UMi street canyon or InH mixed office.
pub fn los_probability(env: Environment, d2d: f64) -> f64 {
    let d = d2d.max(0.0);
    match env {
        Environment::Umi => {
            if d <= 18.0 {
                1.0
            } else {
                18.0 / d + (-d / 36.0).exp() * (1.0 - 18.0 / d)
            }
        }
        Environment::Inh => {
            if d <= 1.2 {
                1.0
            } else if d < 6.5 {
                (-(d - 1.2) / 4.7).exp()
            } else {
                (-(d - 6.5) / 32.6).exp() * 0.32
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn umi_los_unit_distance_unit_frequency() {
        assert!((pathloss_db(PathlossKind::UmiLos, 1.0, 1.0).unwrap() - 32.4).abs() < 1e-12);
    }

    #[test]
    fn sub_metre_distance_is_clamped() {
        let a = pathloss_db(PathlossKind::InhLos, 0.2, 28.0).unwrap();
        let b = pathloss_db(PathlossKind::InhLos, 1.0, 28.0).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn nlos_dominates_los_on_grid() {
        for i in 0..10 {
            let d = 10.0 + 50.0 * i as f64;
            let los = pathloss_db(PathlossKind::UmiLos, d, 28.0).unwrap();
            let nlos = pathloss_db(PathlossKind::UmiNlos, d, 28.0).unwrap();
            assert!(nlos >= los);
            let los = pathloss_db(PathlossKind::InhLos, d, 28.0).unwrap();
            let nlos = pathloss_db(PathlossKind::InhNlos, d, 28.0).unwrap();
            assert!(nlos >= los);
        }
    }

    #[test]
    fn unknown_kind_is_parameter_error() {
        assert!(matches!("rma-los".parse::<PathlossKind>(), Err(Error::Parameter(_))));
        assert_eq!("UMi-LoS".parse::<PathlossKind>().unwrap(), PathlossKind::UmiLos);
    }

    #[test]
    fn bad_frequency_rejected() {
        assert!(pathloss_db(PathlossKind::UmiLos, 10.0, 0.0).is_err());
    }

    #[test]
    fn umi_los_probability_points() {
        assert_eq!(los_probability(Environment::Umi, 10.0), 1.0);
        let expected = 0.5 * (1.0 - (-1.0f64).exp()) + (-1.0f64).exp();
        assert!((los_probability(Environment::Umi, 36.0) - expected).abs() < 1e-12);
        assert!((los_probability(Environment::Umi, 36.0) - 0.684).abs() < 1e-3);
        assert!(los_probability(Environment::Umi, 1e6) < 1e-4);
    }

    #[test]
    fn los_probability_is_monotone() {
        for env in [Environment::Umi, Environment::Inh] {
            let mut prev = 1.0;
            for i in 0..2000 {
                let p = los_probability(env, i as f64 * 0.25);
                assert!((0.0..=1.0).contains(&p));
                assert!(p <= prev + 1e-15, "{env:?} at {}", i as f64 * 0.25);
                prev = p;
            }
        }
    }
}
