//! Experiment configuration: a structured key-value (TOML) file with full
//! defaults. The resolved configuration is echoed verbatim into every output
//! for provenance.

use crate::beltrami::SolverConfig;
use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::modulus::{ModulusKind, ModulusSpec, ThetaWeight};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridCfg {
    pub n: usize,
    pub half_width: f64,
}

impl Default for GridCfg {
    fn default() -> Self {
        GridCfg { n: 512, half_width: 4.0 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FamilyCfg {
    /// modulus kind of the generator profile
    pub kind: ModulusKind,
    /// modulus exponent (alpha for the log-power family)
    pub exponent: f64,
    pub amplitudes: Vec<f64>,
    pub center: [f64; 2],
    pub r_in: f64,
    pub r_out: f64,
    /// amplitude of the reference member for stability pairs (0 = identity)
    pub reference_amplitude: f64,
}

impl Default for FamilyCfg {
    fn default() -> Self {
        FamilyCfg {
            kind: ModulusKind::LogPower,
            exponent: 2.0,
            amplitudes: vec![0.4, 0.2, 0.1, 0.05, 0.025, 0.0125],
            center: [0.0, 0.0],
            r_in: 0.1,
            r_out: 0.5,
            reference_amplitude: 0.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WeightCfg {
    /// exponent of the comparison modulus driving the spectral weight
    pub beta: f64,
    pub tolerance: f64,
}

impl Default for WeightCfg {
    fn default() -> Self {
        WeightCfg { beta: 1.2, tolerance: 1e-8 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverCfg {
    pub tol: f64,
    pub n_max: usize,
    pub outer_tol: f64,
    pub outer_max: usize,
    /// split index for the leading-terms/tail decomposition diagnostics
    pub n0: usize,
    /// derivative floor for coefficient recovery
    pub floor: f64,
}

impl Default for SolverCfg {
    fn default() -> Self {
        SolverCfg { tol: 1e-10, n_max: 200, outer_tol: 1e-8, outer_max: 100, n0: 8, floor: 0.1 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepCfg {
    /// decay sweep frequencies k = 2^j
    pub k_exponents: Vec<u32>,
    /// probe frequency for the stability experiment
    pub probe_k: f64,
    /// low-frequency mass radius
    pub r0: f64,
}

impl Default for SweepCfg {
    fn default() -> Self {
        SweepCfg { k_exponents: vec![2, 3, 4, 5, 6], probe_k: 1.0, r0: 2.0 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DtnCfg {
    pub n_b: usize,
    pub mesh_r: usize,
    pub mesh_theta: usize,
}

impl Default for DtnCfg {
    fn default() -> Self {
        DtnCfg { n_b: 32, mesh_r: 256, mesh_theta: 512 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OracleCfg {
    pub s_max: f64,
    pub s_step: f64,
    /// base grid for the kernel-decay check (doubled for the stability pass)
    pub kernel_n: usize,
    pub betas: Vec<f64>,
    pub interpolation_trials: usize,
}

impl Default for OracleCfg {
    fn default() -> Self {
        OracleCfg {
            s_max: 50.0,
            s_step: 0.05,
            kernel_n: 256,
            betas: vec![1.2, 1.4],
            interpolation_trials: 100,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub grid: GridCfg,
    pub family: FamilyCfg,
    pub weight: WeightCfg,
    pub solver: SolverCfg,
    pub sweep: SweepCfg,
    pub dtn: DtnCfg,
    pub oracles: OracleCfg,
}

impl ExperimentConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let mut cfg = match path {
            None => ExperimentConfig::default(),
            Some(p) => {
                let text = std::fs::read_to_string(p)?;
                toml::from_str(&text).map_err(|e| Error::Config(e.to_string()))?
            }
        };
        if cfg.seed == 0 {
            cfg.seed = 7;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.grid_spec()?;
        self.modulus_spec()?;
        if self.family.r_in >= self.family.r_out {
            return Err(Error::Config("family taper needs r_in < r_out".into()));
        }
        if self.family.r_out >= 1.0 {
            return Err(Error::Config("family support must stay inside the unit disk".into()));
        }
        Ok(())
    }

    /// Serialized resolved configuration, embedded into every output.
    pub fn resolved_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn grid_spec(&self) -> Result<GridSpec> {
        GridSpec::new(self.grid.n, self.grid.half_width)
    }

    pub fn modulus_spec(&self) -> Result<ModulusSpec> {
        match self.family.kind {
            ModulusKind::LogPower => ModulusSpec::log_power(self.family.exponent),
            ModulusKind::IntegratedLogPower => {
                ModulusSpec::integrated_log_power(self.family.exponent)
            }
            ModulusKind::Holder => ModulusSpec::holder(self.family.exponent),
        }
    }

    pub fn theta_weight(&self) -> Result<ThetaWeight> {
        ThetaWeight::new(ModulusSpec::log_power(self.weight.beta)?, self.weight.tolerance)
    }

    pub fn solver_config(&self) -> SolverConfig {
        SolverConfig {
            n_max: self.solver.n_max,
            tol: self.solver.tol,
            kappa1: None,
            outer_max: self.solver.outer_max,
            outer_tol: self.solver.outer_tol,
            store_terms: self.solver.n0 + 4,
            damping: 1.0,
        }
    }

    pub fn sweep_ks(&self) -> Vec<Complex64> {
        self.sweep
            .k_exponents
            .iter()
            .map(|j| Complex64::new((1u64 << j) as f64, 0.0))
            .collect()
    }

    pub fn center(&self) -> Complex64 {
        Complex64::new(self.family.center[0], self.family.center[1])
    }
}
