use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Deserialize;

use super::EtlError;
use crate::enrichment::TransportRules;
use crate::trajectory::SegmentationParams;
use crate::warehouse::{Hemisphere, VelocityBands};

/// Speeds below this are classed as stationary in every profile.
const STATIONARY_BELOW_MPS: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DomainProfile {
    Tourism,
    Birds,
    Traffic,
    Custom,
}

impl DomainProfile {
    pub fn as_str(&self) -> &'static str {
        match self {
            DomainProfile::Tourism => "tourism",
            DomainProfile::Birds => "birds",
            DomainProfile::Traffic => "traffic",
            DomainProfile::Custom => "custom",
        }
    }

    pub fn default_object_type(&self) -> &'static str {
        match self {
            DomainProfile::Tourism => "Human Being",
            DomainProfile::Birds => "Animal",
            DomainProfile::Traffic => "Vehicle",
            DomainProfile::Custom => "UNKNOWN",
        }
    }

    pub fn default_model_name(&self) -> &'static str {
        match self {
            DomainProfile::Tourism => "Tourist",
            DomainProfile::Birds => "Bird",
            DomainProfile::Traffic => "Car",
            DomainProfile::Custom => "UNKNOWN",
        }
    }

    /// Upper bounds (m/s) of the slow and moderate velocity classes.
    pub fn default_velocity_bounds(&self) -> [f64; 2] {
        match self {
            DomainProfile::Tourism | DomainProfile::Custom => [1.8, 8.0],
            DomainProfile::Birds => [8.0, 15.0],
            DomainProfile::Traffic => [8.33, 22.2],
        }
    }
}

impl FromStr for DomainProfile {
    type Err = EtlError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "tourism" => Ok(DomainProfile::Tourism),
            "birds" => Ok(DomainProfile::Birds),
            "traffic" => Ok(DomainProfile::Traffic),
            "custom" => Ok(DomainProfile::Custom),
            _ => Err(EtlError::Config(format!("unknown domain_profile '{s}'"))),
        }
    }
}

impl fmt::Display for DomainProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// On-disk layout of the config file.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    points_file: PathBuf,
    poi_file: PathBuf,
    events_file: PathBuf,
    posts_file: PathBuf,
    goal_rules_file: PathBuf,
    eps_meters: Option<f64>,
    min_stop_duration_s: Option<f64>,
    hemisphere: String,
    domain_profile: String,
    object_type: Option<String>,
    model_name: Option<String>,
    model_feature: Option<String>,
    transport_rules: Option<String>,
    velocity_bounds_mps: Option<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EtlConfig {
    pub points_file: PathBuf,
    pub poi_file: PathBuf,
    pub events_file: PathBuf,
    pub posts_file: PathBuf,
    pub goal_rules_file: PathBuf,
    pub params: SegmentationParams,
    pub hemisphere: Hemisphere,
    pub domain_profile: DomainProfile,
    pub object_type: String,
    pub model_name: String,
    pub model_feature: String,
    pub transport: TransportRules,
    pub velocity_bands: VelocityBands,
}

impl EtlConfig {
    /// Reads a TOML config; relative paths resolve against its directory.
    pub fn from_file(path: &Path) -> Result<Self, EtlError> {
        let text = fs::read_to_string(path).map_err(|e| EtlError::io(path, e))?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        Self::from_toml(&text, base)
    }

    pub fn from_toml(text: &str, base: &Path) -> Result<Self, EtlError> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| EtlError::Config(e.to_string()))?;
        let defaults = SegmentationParams::default();
        let params = SegmentationParams::new(
            raw.eps_meters.unwrap_or(defaults.eps_meters()),
            raw.min_stop_duration_s
                .unwrap_or(defaults.min_stop_duration_s()),
        )
        .map_err(|e| EtlError::Config(e.to_string()))?;
        let hemisphere: Hemisphere = raw
            .hemisphere
            .parse()
            .map_err(|_| EtlError::Config(format!("unknown hemisphere '{}'", raw.hemisphere)))?;
        let profile: DomainProfile = raw.domain_profile.parse()?;
        let transport = match (&raw.transport_rules, profile) {
            (Some(text), _) => {
                TransportRules::parse(text).map_err(|e| EtlError::Config(e.to_string()))?
            }
            (None, DomainProfile::Tourism) => TransportRules::tourism(),
            (None, DomainProfile::Birds) => TransportRules::birds(),
            (None, DomainProfile::Traffic) => TransportRules::traffic(),
            (None, DomainProfile::Custom) => {
                return Err(EtlError::Config(
                    "domain_profile 'custom' requires transport_rules".into(),
                ))
            }
        };
        let [slow, moderate] = raw
            .velocity_bounds_mps
            .unwrap_or(profile.default_velocity_bounds());
        if !(STATIONARY_BELOW_MPS < slow && slow < moderate && moderate.is_finite()) {
            return Err(EtlError::Config(format!(
                "velocity_bounds_mps must be increasing and above {STATIONARY_BELOW_MPS}"
            )));
        }
        let resolve = |p: PathBuf| if p.is_absolute() { p } else { base.join(p) };
        Ok(EtlConfig {
            points_file: resolve(raw.points_file),
            poi_file: resolve(raw.poi_file),
            events_file: resolve(raw.events_file),
            posts_file: resolve(raw.posts_file),
            goal_rules_file: resolve(raw.goal_rules_file),
            params,
            hemisphere,
            domain_profile: profile,
            object_type: raw
                .object_type
                .unwrap_or_else(|| profile.default_object_type().to_string()),
            model_name: raw
                .model_name
                .unwrap_or_else(|| profile.default_model_name().to_string()),
            model_feature: raw.model_feature.unwrap_or_else(|| "UNKNOWN".to_string()),
            transport,
            velocity_bands: VelocityBands {
                stationary_below: STATIONARY_BELOW_MPS,
                slow_below: slow,
                moderate_below: moderate,
            },
        })
    }
}
