use std::path::Path;

use super::presets::{preset, ExperimentPreset, PresetId};
use super::HarnessError;
use crate::evolution::SolverConfig;

/// A config file holds either a full solver config or `{"preset": "<id>"}`.
#[derive(Debug, Clone, PartialEq)]
pub enum ParsedConfig {
    Solver(SolverConfig),
    Preset(ExperimentPreset),
}

pub fn parse_config_str(text: &str) -> Result<ParsedConfig, HarnessError> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| HarnessError::Schema {
        path: String::from("."),
        message: e.to_string(),
    })?;
    if let Some(obj) = value.as_object() {
        if let Some(id) = obj.get("preset") {
            if let Some(extra) = obj.keys().find(|k| k.as_str() != "preset") {
                return Err(HarnessError::Schema {
                    path: extra.clone(),
                    message: "unknown field next to \"preset\"".into(),
                });
            }
            let id = id.as_str().ok_or_else(|| HarnessError::Schema {
                path: "preset".into(),
                message: "expected a preset id string".into(),
            })?;
            return Ok(ParsedConfig::Preset(preset(id.parse::<PresetId>()?)));
        }
    }
    let config: SolverConfig = serde_path_to_error::deserialize(value).map_err(|e| HarnessError::Schema {
        path: e.path().to_string(),
        message: e.inner().to_string(),
    })?;
    config.validate()?;
    Ok(ParsedConfig::Solver(config))
}

pub fn parse_config(path: &Path) -> Result<ParsedConfig, HarnessError> {
    let text = std::fs::read_to_string(path).map_err(|e| HarnessError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    parse_config_str(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolution::{EvolutionError, Integrator};
    use crate::harness::PresetPlan;
    use crate::laws::LawKind;

    const MINIMAL: &str = r#"{"law": "sqg", "nu": 0.1, "kappa": 1, "gamma": 1, "n": 64, "d": 2, "dt": 1e-3, "t_end": 1}"#;

    #[test]
    fn minimal_config_gets_defaults() {
        let ParsedConfig::Solver(c) = parse_config_str(MINIMAL).unwrap() else {
            panic!()
        };
        assert_eq!(c.law, LawKind::Sqg);
        assert_eq!(c.integrator, Integrator::Rk4If);
        assert_eq!(c.checkpoint_every, 10);
        assert_eq!(c.sobolev_s, vec![1.0]);
    }

    #[test]
    fn gamma_out_of_range_is_named() {
        let text = MINIMAL.replace("\"gamma\": 1", "\"gamma\": 2.5");
        let err = parse_config_str(&text).unwrap_err();
        assert!(matches!(err, HarnessError::Physics(EvolutionError::GammaOutOfRange(g)) if g == 2.5));
        assert!(err.to_string().contains("(0,2]"));
    }

    #[test]
    fn negative_kappa_is_named() {
        let text = MINIMAL.replace("\"kappa\": 1", "\"kappa\": -1");
        assert!(matches!(
            parse_config_str(&text),
            Err(HarnessError::Physics(EvolutionError::NegativeKappa(_)))
        ));
    }

    #[test]
    fn unknown_keys_report_their_path() {
        let text = MINIMAL.replace("\"d\": 2", "\"d\": 2, \"viscosity\": 3");
        match parse_config_str(&text) {
            Err(HarnessError::Schema { message, .. }) => assert!(message.contains("viscosity")),
            other => panic!("{other:?}"),
        }
        let text = MINIMAL.replace(
            "\"t_end\": 1",
            "\"t_end\": 1, \"initial_data\": {\"kind\": \"power-law\", \"slop\": 1}",
        );
        match parse_config_str(&text) {
            Err(HarnessError::Schema { path, message }) => {
                assert!(path.starts_with("initial_data"), "{path}");
                assert!(message.contains("slop"));
            }
            other => panic!("{other:?}"),
        }
        let text = MINIMAL.replace("\"n\": 64", "\"n\": \"many\"");
        match parse_config_str(&text) {
            Err(HarnessError::Schema { path, .. }) => assert_eq!(path, "n"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn preset_reference_expands() {
        let ParsedConfig::Preset(p) = parse_config_str(r#"{"preset": "ipmb-nu-sweep"}"#).unwrap() else {
            panic!()
        };
        let PresetPlan::Sweep { values, .. } = p.plan else { panic!() };
        assert_eq!(values, vec![0.1, 0.05, 0.025, 0.0125, 0.0]);
        assert!(matches!(
            parse_config_str(r#"{"preset": "nope"}"#),
            Err(HarnessError::UnknownPreset(_))
        ));
    }

    #[test]
    fn malformed_json_is_a_schema_error() {
        assert!(matches!(parse_config_str("{"), Err(HarnessError::Schema { .. })));
    }
}
