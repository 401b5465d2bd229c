use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::compile::Protocol;
use crate::qnpu::EprMode;

/// Cycle costs for every simulated action. All fields are explicit; results
/// echo the model they ran under so no run depends on silent defaults.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatencyModel {
    pub single_qubit_gate: u64,
    pub two_qubit_gate: u64,
    pub measurement: u64,
    pub conditional_gate: u64,
    pub zone_move: u64,
    /// Inter-node classical message flight time.
    pub classical_link_hop: u64,
    /// Intra-node QPU<->QNPU signal (instruction hand-off, completion notify).
    pub qpu_qnpu_signal: u64,
    /// Protocol-instruction decode cost, charged once per instruction.
    pub decode: u64,
    /// Base occupancy of one classical-communication micro-op.
    pub uop_issue: u64,
    /// EPR resource table access cost.
    pub epr_reserve_lookup: u64,
}

impl Default for LatencyModel {
    fn default() -> Self {
        Self {
            single_qubit_gate: 1,
            two_qubit_gate: 2,
            measurement: 4,
            conditional_gate: 1,
            zone_move: 2,
            classical_link_hop: 4,
            qpu_qnpu_signal: 1,
            decode: 1,
            uop_issue: 1,
            epr_reserve_lookup: 1,
        }
    }
}

/// Architecture under simulation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ArchMode {
    /// One in-order scalar unit per node executes local gates and all
    /// communication micro-ops inline.
    Monolithic,
    /// Per node, a QPU for local gates plus a QNPU with `qnpu_width` decoder
    /// lanes for protocol instructions.
    Decoupled,
}

impl std::fmt::Display for ArchMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ArchMode::Monolithic => "monolithic",
            ArchMode::Decoupled => "decoupled",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArchConfig {
    pub mode: ArchMode,
    /// Decoder lanes per QNPU; 1 = scalar. Ignored... rejected in monolithic
    /// mode by validation.
    pub qnpu_width: usize,
    pub latency: LatencyModel,
    pub protocol: Protocol,
    pub epr_mode: EprMode,
    /// Collect the quantum-operation trace used by the oracle.
    pub collect_quantum_trace: bool,
    /// Collect a per-cycle textual event log.
    pub collect_event_log: bool,
}

impl ArchConfig {
    pub fn monolithic(latency: LatencyModel, protocol: Protocol) -> Self {
        Self {
            mode: ArchMode::Monolithic,
            qnpu_width: 1,
            latency,
            protocol,
            epr_mode: EprMode::PerfectPrefetch,
            collect_quantum_trace: false,
            collect_event_log: false,
        }
    }

    pub fn decoupled(width: usize, latency: LatencyModel, protocol: Protocol) -> Self {
        Self {
            mode: ArchMode::Decoupled,
            qnpu_width: width,
            latency,
            protocol,
            epr_mode: EprMode::PerfectPrefetch,
            collect_quantum_trace: false,
            collect_event_log: false,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.mode == ArchMode::Monolithic && self.qnpu_width != 1 {
            return Err(ConfigError::WidthInMonolithic { width: self.qnpu_width });
        }
        if self.qnpu_width == 0 {
            return Err(ConfigError::ZeroWidth);
        }
        Ok(())
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("qnpu width {width} is meaningless in monolithic mode")]
    WidthInMonolithic { width: usize },
    #[error("qnpu width must be at least 1")]
    ZeroWidth,
    #[error("config file error: {0}")]
    Io(String),
    #[error("config parse error: {0}")]
    Parse(String),
}

/// On-disk simulator configuration: the latency keys plus mode, width and
/// protocol. All latency keys are mandatory.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub mode: ArchMode,
    pub width: usize,
    pub protocol: Protocol,
    pub latency: LatencyModel,
}

impl ConfigFile {
    pub fn load(path: &std::path::Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io(e.to_string()))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))
    }

    pub fn to_arch_config(&self) -> Result<ArchConfig, ConfigError> {
        let cfg = ArchConfig {
            mode: self.mode,
            qnpu_width: self.width,
            latency: self.latency,
            protocol: self.protocol,
            epr_mode: EprMode::PerfectPrefetch,
            collect_quantum_trace: false,
            collect_event_log: false,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn render(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn monolithic_with_width_is_rejected() {
        let cfg = ArchConfig {
            qnpu_width: 4,
            ..ArchConfig::monolithic(LatencyModel::default(), Protocol::Cat)
        };
        assert_eq!(cfg.validate(), Err(ConfigError::WidthInMonolithic { width: 4 }));
    }

    #[test]
    fn config_file_requires_all_latency_keys() {
        let text = "mode = \"decoupled\"\nwidth = 4\nprotocol = \"cat\"\n[latency]\nsingle_qubit_gate = 1\n";
        assert!(ConfigFile::parse(text).is_err());
    }

    #[test]
    fn config_file_roundtrips() {
        let file = ConfigFile {
            mode: ArchMode::Decoupled,
            width: 4,
            protocol: Protocol::Cat,
            latency: LatencyModel::default(),
        };
        let parsed = ConfigFile::parse(&file.render()).unwrap();
        assert_eq!(parsed.width, 4);
        assert_eq!(parsed.latency, LatencyModel::default());
    }
}
