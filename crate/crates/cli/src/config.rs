use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use bivekua::main_vekua::{b_from_f, Conductivity, ConductivityProfile};
use bivekua::verify::Settings;
use bivekua::{Bicomplex, Coefficients, Domain, DomainSpec, Grid};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::Failure;

/// Vekua coefficients: zero, constant a and b, or the main Vekua equation
/// for a catalogue conductivity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum CoefficientSpec {
    Zero,
    Constants { a: Bicomplex, b: Bicomplex },
    Conductivity { formula: String },
}

fn default_basis_order() -> usize {
    16
}

fn default_output() -> PathBuf {
    PathBuf::from("bivekua-out")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub domain: DomainSpec,
    #[serde(default = "default_coefficients")]
    pub coefficients: CoefficientSpec,
    #[serde(default = "default_basis_order")]
    pub basis_order: usize,
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    #[serde(default = "default_output")]
    pub output: PathBuf,
}

fn default_coefficients() -> CoefficientSpec {
    CoefficientSpec::Zero
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            domain: DomainSpec::new(Domain::unit_disk(), 64),
            coefficients: CoefficientSpec::Zero,
            basis_order: default_basis_order(),
            tolerances: BTreeMap::new(),
            output: default_output(),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))
    }

    /// Checks the invariants that serde cannot express.
    pub fn validate(&self) -> Result<(), Failure> {
        if self.domain.n < 8 {
            return Err(Failure::Config(format!("n must be at least 8, got {}", self.domain.n)));
        }
        if self.basis_order < 1 {
            return Err(Failure::Config("basis_order must be at least 1".into()));
        }
        self.domain.domain.validate().map_err(|e| Failure::Config(e.to_string()))?;
        if let CoefficientSpec::Conductivity { formula } = &self.coefficients {
            self.profile_of(formula)?;
        }
        let mut settings = Settings::default();
        for (k, v) in &self.tolerances {
            settings.set_tolerance(k, *v).map_err(|e| Failure::Config(e.to_string()))?;
        }
        Ok(())
    }

    fn profile_of(&self, formula: &str) -> Result<ConductivityProfile, Failure> {
        ConductivityProfile::from_id(formula).ok_or_else(|| {
            let known: Vec<&str> = ConductivityProfile::ALL.iter().map(|p| p.id()).collect();
            Failure::Config(format!("unknown conductivity {formula:?}; known: {}", known.join(", ")))
        })
    }

    /// The catalogue conductivity, if the coefficients name one.
    pub fn profile(&self) -> Result<Option<ConductivityProfile>, Failure> {
        match &self.coefficients {
            CoefficientSpec::Conductivity { formula } => self.profile_of(formula).map(Some),
            _ => Ok(None),
        }
    }

    /// SHA-256 of the canonical JSON form without the output directory;
    /// echoed by every report.
    pub fn hash(&self) -> String {
        let mut content = self.clone();
        content.output = PathBuf::new();
        let canonical = serde_json::to_vec(&content).expect("config serialises");
        hex::encode(Sha256::digest(&canonical))
    }

    pub fn grid(&self) -> Result<Arc<Grid>, Failure> {
        Grid::from_spec(self.domain.clone())
            .map(Arc::new)
            .map_err(|e| Failure::Config(e.to_string()))
    }

    pub fn coefficients(&self, grid: &Arc<Grid>) -> Result<Coefficients, Failure> {
        Ok(match &self.coefficients {
            CoefficientSpec::Zero => Coefficients::zero(grid),
            CoefficientSpec::Constants { a, b } => Coefficients::constant(grid, *a, *b),
            CoefficientSpec::Conductivity { formula } => {
                b_from_f(&Conductivity::from_profile(grid, self.profile_of(formula)?))?
            }
        })
    }

    /// Acceptance settings adapted to this configuration: every criterion
    /// runs on the configured domain and resolution.
    pub fn settings(&self) -> Settings {
        let n = self.domain.n;
        let mut s = Settings {
            domain: self.domain.domain.clone(),
            n,
            kernel_n: n,
            basis_order: self.basis_order,
            main_domain: self.domain.domain.clone(),
            main_n: n,
            main_order: self.basis_order.min(8),
            ..Settings::default()
        };
        if let Ok(Some(p)) = self.profile() {
            s.profile = p;
        }
        for (k, v) in &self.tolerances {
            s.set_tolerance(k, *v).expect("validated");
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn example_config_parses() {
        let text = r#"{
            "domain": {"kind":"disk","center":[0,0],"radius":1.0,"n":64},
            "coefficients": {"type":"conductivity","formula":"exp_x"},
            "basis_order": 8,
            "tolerances": {"kernel": 0.02}
        }"#;
        let c: RunConfig = serde_json::from_str(text).unwrap();
        c.validate().unwrap();
        assert_eq!(c.profile().unwrap(), Some(ConductivityProfile::ExpX));
        assert_eq!(c.output, PathBuf::from("bivekua-out"));
        assert_eq!(c.settings().tolerance("kernel"), 0.02);
    }

    #[test]
    fn constants_use_bicomplex_pairs() {
        let text = r#"{"domain":{"kind":"rectangle","x0":-1,"x1":1,"y0":-0.5,"y1":0.5,"n":16},
            "coefficients":{"type":"constants","a":{"sc":[0.1,0],"vec":[0,0]},"b":{"sc":[0,0],"vec":[0.2,0]}}}"#;
        let c: RunConfig = serde_json::from_str(text).unwrap();
        c.validate().unwrap();
        let g = c.grid().unwrap();
        assert!((c.coefficients(&g).unwrap().sup_b() - 0.2).abs() < 1e-15);
    }

    #[test]
    fn invalid_configs() {
        let mut c = RunConfig::default();
        c.domain.n = 4;
        assert!(c.validate().is_err());
        let mut c = RunConfig::default();
        c.coefficients = CoefficientSpec::Conductivity { formula: "sin".into() };
        assert!(c.validate().is_err());
        let mut c = RunConfig::default();
        c.tolerances.insert("bogus".into(), 1.0);
        assert!(c.validate().is_err());
    }

    #[test]
    fn hash_tracks_content() {
        let a = RunConfig::default();
        let mut b = RunConfig::default();
        assert_eq!(a.hash(), b.hash());
        b.output = PathBuf::from("elsewhere");
        assert_eq!(a.hash(), b.hash());
        b.basis_order = 4;
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
    }
}
