//! Compiler configuration.
//!
//! Settings arrive from a JSON file, command-line overrides, or both.
//! Unknown keys are rejected so typos fail loudly. The cluster caps
//! default to the hardware limits (16 loads, 4 compute ops); smaller
//! caps are always allowed for experiments, while raising the op cap
//! past the hardware limit requires `relax` and produces programs the
//! standard validator rejects. The load cap can never exceed 16: the
//! vector-enable length is architecturally capped there.

use serde::Deserialize;
use thiserror::Error;

use crate::isa::SdtKind;

/// Hardware cluster caps enforced by the standard validator.
pub const HW_LOAD_CAP: usize = 16;
pub const HW_OP_CAP: usize = 4;

/// Largest op cap reachable with `relax`. Groups beyond the hardware
/// cap still execute member by member; the raised cap only exists for
/// scheduling experiments.
pub const RELAXED_OP_CAP: usize = 8;

/// A rejected configuration value.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("bad config: {0}")]
    Parse(String),
    #[error("window must be between 1 and 64, got {0}")]
    Window(usize),
    #[error("load cap must be between 2 and {HW_LOAD_CAP}, got {0}")]
    LoadCap(usize),
    #[error("op cap must be between 2 and {HW_OP_CAP} (up to {RELAXED_OP_CAP} with relax), got {got}")]
    OpCap { got: usize, relax: bool },
    #[error("unroll factor must be between 1 and 64, got {0}")]
    Unroll(u32),
    #[error("the int lane cannot be disabled")]
    IntLaneDisabled,
}

/// Scheduling and emission settings.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompilerConfig {
    /// How far past the last accepted member the scheduler looks for the
    /// next cluster candidate.
    pub window: usize,
    /// Most loads co-issued in one load cluster.
    pub load_cap: usize,
    /// Most compute ops co-issued in one op cluster.
    pub op_cap: usize,
    /// Loop unroll factor applied when lowering source programs.
    pub unroll: u32,
    /// Emit strictly scalar code: no clusters, no vector or parallel
    /// control instructions.
    pub no_cluster: bool,
    /// Permit experimental op caps beyond the hardware limit and
    /// validate emitted programs against the raised caps.
    pub relax: bool,
    /// Lanes the scheduler may use. Ops whose lane is disabled are
    /// routed to the traditional lane instead. The int lane is always
    /// enabled.
    pub lane_enabled: [bool; 4],
}

impl Default for CompilerConfig {
    fn default() -> CompilerConfig {
        CompilerConfig {
            window: 8,
            load_cap: HW_LOAD_CAP,
            op_cap: HW_OP_CAP,
            unroll: 1,
            no_cluster: false,
            relax: false,
            lane_enabled: [true; 4],
        }
    }
}

/// JSON shape of a config file. Every field is optional; omitted ones
/// keep their defaults.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct ConfigFile {
    window: Option<usize>,
    load_cap: Option<usize>,
    op_cap: Option<usize>,
    unroll: Option<u32>,
    no_cluster: Option<bool>,
    relax: Option<bool>,
    lanes: Option<LaneFile>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct LaneFile {
    int: Option<bool>,
    float: Option<bool>,
    double: Option<bool>,
    char: Option<bool>,
}

impl CompilerConfig {
    /// Parse a JSON config file and validate the result.
    pub fn from_json(text: &str) -> Result<CompilerConfig, ConfigError> {
        let file: ConfigFile =
            serde_json::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        let mut config = CompilerConfig::default();
        if let Some(w) = file.window {
            config.window = w;
        }
        if let Some(n) = file.load_cap {
            config.load_cap = n;
        }
        if let Some(n) = file.op_cap {
            config.op_cap = n;
        }
        if let Some(n) = file.unroll {
            config.unroll = n;
        }
        if let Some(b) = file.no_cluster {
            config.no_cluster = b;
        }
        if let Some(b) = file.relax {
            config.relax = b;
        }
        if let Some(lanes) = file.lanes {
            for (kind, enabled) in [
                (SdtKind::Int, lanes.int),
                (SdtKind::Float, lanes.float),
                (SdtKind::Double, lanes.double),
                (SdtKind::Char, lanes.char),
            ] {
                if let Some(e) = enabled {
                    config.lane_enabled[kind.lane_index()] = e;
                }
            }
        }
        config.validate()?;
        Ok(config)
    }

    /// Check every setting against its allowed range.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(1..=64).contains(&self.window) {
            return Err(ConfigError::Window(self.window));
        }
        if !(2..=HW_LOAD_CAP).contains(&self.load_cap) {
            return Err(ConfigError::LoadCap(self.load_cap));
        }
        let op_max = if self.relax { RELAXED_OP_CAP } else { HW_OP_CAP };
        if !(2..=op_max).contains(&self.op_cap) {
            return Err(ConfigError::OpCap { got: self.op_cap, relax: self.relax });
        }
        if !(1..=64).contains(&self.unroll) {
            return Err(ConfigError::Unroll(self.unroll));
        }
        if !self.lane_enabled[SdtKind::Int.lane_index()] {
            return Err(ConfigError::IntLaneDisabled);
        }
        Ok(())
    }

    pub fn lane_on(&self, lane: SdtKind) -> bool {
        self.lane_enabled[lane.lane_index()]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_hardware_caps() {
        let c = CompilerConfig::default();
        assert_eq!(c.window, 8);
        assert_eq!(c.load_cap, 16);
        assert_eq!(c.op_cap, 4);
        assert_eq!(c.unroll, 1);
        assert!(!c.no_cluster);
        assert!(c.lane_enabled.iter().all(|&e| e));
        c.validate().expect("defaults are valid");
    }

    #[test]
    fn json_overrides_selected_fields() {
        let c = CompilerConfig::from_json(
            r#"{"window": 4, "op_cap": 3, "lanes": {"char": false}}"#,
        )
        .unwrap();
        assert_eq!(c.window, 4);
        assert_eq!(c.load_cap, 16);
        assert_eq!(c.op_cap, 3);
        assert!(!c.lane_on(SdtKind::Char));
        assert!(c.lane_on(SdtKind::Float));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = CompilerConfig::from_json(r#"{"windw": 4}"#).unwrap_err();
        assert!(matches!(err, ConfigError::Parse(_)));
        let err = CompilerConfig::from_json(r#"{"lanes": {"short": true}}"#).unwrap_err();
        assert!(matches!(err, ConfigError::Parse(_)));
    }

    #[test]
    fn load_cap_never_exceeds_hardware() {
        let err = CompilerConfig::from_json(r#"{"load_cap": 17, "relax": true}"#).unwrap_err();
        assert_eq!(err, ConfigError::LoadCap(17));
    }

    #[test]
    fn op_cap_above_hardware_needs_relax() {
        let err = CompilerConfig::from_json(r#"{"op_cap": 6}"#).unwrap_err();
        assert_eq!(err, ConfigError::OpCap { got: 6, relax: false });
        let c = CompilerConfig::from_json(r#"{"op_cap": 6, "relax": true}"#).unwrap();
        assert_eq!(c.op_cap, 6);
        let err =
            CompilerConfig::from_json(r#"{"op_cap": 9, "relax": true}"#).unwrap_err();
        assert_eq!(err, ConfigError::OpCap { got: 9, relax: true });
    }

    #[test]
    fn int_lane_cannot_be_disabled() {
        let err = CompilerConfig::from_json(r#"{"lanes": {"int": false}}"#).unwrap_err();
        assert_eq!(err, ConfigError::IntLaneDisabled);
    }

    #[test]
    fn sub_hardware_caps_are_fine_without_relax() {
        let c = CompilerConfig::from_json(r#"{"load_cap": 2, "op_cap": 2}"#).unwrap();
        assert_eq!((c.load_cap, c.op_cap), (2, 2));
    }
}
