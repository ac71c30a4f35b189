//! The versioned JSON model document.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use ipl_core::earlywarn::WarningTree;
use ipl_core::polycore::{CenterSet, CenterStrategy, KernelModel, MultiIndex, Scaling, SparsePolynomial};
use ipl_core::solver::LossKind;
use ipl_core::timeseries::LagSpec;
use ipl_core::FittedIpl;

use crate::config::DataConfig;
use crate::error::{CliError, CliResult};

pub const FORMAT: &str = "ipl-model";
pub const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermRecord {
    pub term: String,
    pub exponents: MultiIndex,
    pub coefficient: f64,
}

/// Fit diagnostics kept in the file. Wall time is left out so that
/// repeated fits produce identical documents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitRecord {
    pub solver: String,
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
    pub primal_residual: f64,
    pub dual_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub format: String,
    pub version: u32,
    /// Seconds since the Unix epoch (`SOURCE_DATE_EPOCH` when set).
    pub created_unix: u64,
    pub degree: u32,
    pub loss: LossKind,
    pub lag_spec: LagSpec,
    pub raw_feature_names: Vec<String>,
    pub target_name: String,
    /// Names of the embedded variables.
    pub feature_names: Vec<String>,
    pub data: DataConfig,
    pub scaling: Option<Scaling>,
    /// Includes the center seed for random strategies.
    pub center_strategy: CenterStrategy,
    pub centers: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
    pub threshold: f64,
    pub sparse_terms: Option<Vec<TermRecord>>,
    pub warning_tree: Option<WarningTree>,
    pub fit: FitRecord,
}

pub fn created_now() -> u64 {
    if let Some(v) = std::env::var("SOURCE_DATE_EPOCH").ok().and_then(|s| s.trim().parse().ok()) {
        return v;
    }
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map_or(0, |d| d.as_secs())
}

impl ModelFile {
    pub fn from_fit(fit: &FittedIpl, raw_feature_names: Vec<String>, target_name: String, data: DataConfig) -> Self {
        let m = &fit.model;
        ModelFile {
            format: FORMAT.into(),
            version: VERSION,
            created_unix: created_now(),
            degree: m.degree,
            loss: m.loss,
            lag_spec: m.lag_spec,
            raw_feature_names,
            target_name,
            feature_names: m.feature_names.clone(),
            data,
            scaling: m.scaling.clone(),
            center_strategy: m.centers.strategy(),
            centers: m.centers.rows(),
            weights: m.weights.iter().copied().collect(),
            threshold: fit.sparse.threshold(),
            sparse_terms: Some(
                fit.sparse
                    .terms()
                    .iter()
                    .map(|(a, c)| TermRecord {
                        term: a.name(&m.feature_names),
                        exponents: a.clone(),
                        coefficient: *c,
                    })
                    .collect(),
            ),
            warning_tree: None,
            fit: FitRecord {
                solver: fit.summary.solver.clone(),
                objective: fit.summary.objective,
                iterations: fit.summary.iterations,
                converged: fit.summary.converged,
                primal_residual: fit.summary.primal_residual,
                dual_residual: fit.summary.dual_residual,
            },
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).unwrap_or_default();
        s.push('\n');
        s
    }

    pub fn from_json(text: &str, source: &str) -> CliResult<Self> {
        let v: serde_json::Value =
            serde_json::from_str(text).map_err(|e| CliError::input(format!("{source}: not a model document: {e}")))?;
        if v.get("format").and_then(|f| f.as_str()) != Some(FORMAT) {
            return Err(CliError::input(format!("{source}: not an {FORMAT} document")));
        }
        match v.get("version").and_then(|f| f.as_u64()) {
            Some(x) if x == u64::from(VERSION) => {}
            Some(x) => return Err(CliError::input(format!("{source}: unsupported model version {x}"))),
            None => return Err(CliError::input(format!("{source}: missing model version"))),
        }
        let m: ModelFile =
            serde_json::from_value(v).map_err(|e| CliError::input(format!("{source}: malformed model: {e}")))?;
        m.kernel_model()?;
        m.sparse()?;
        Ok(m)
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::input(format!("cannot read model {}: {e}", path.display())))?;
        Self::from_json(&text, &path.display().to_string())
    }

    pub fn save(&self, path: &Path) -> CliResult<()> {
        std::fs::write(path, self.to_json())
            .map_err(|e| CliError::input(format!("cannot write model {}: {e}", path.display())))
    }

    pub fn kernel_model(&self) -> CliResult<KernelModel> {
        let n = self.centers.len();
        let d = self.feature_names.len();
        if self.centers.iter().any(|r| r.len() != d) {
            return Err(CliError::input("model centers do not match the feature count"));
        }
        let flat: Vec<f64> = self.centers.iter().flatten().copied().collect();
        let centers = CenterSet::new(DMatrix::from_row_slice(n, d, &flat), self.center_strategy)?;
        Ok(KernelModel::new(
            self.degree,
            centers,
            DVector::from_column_slice(&self.weights),
            self.scaling.clone(),
            self.lag_spec,
            self.loss,
            self.feature_names.clone(),
        )?)
    }

    pub fn sparse(&self) -> CliResult<Option<SparsePolynomial>> {
        let Some(terms) = &self.sparse_terms else {
            return Ok(None);
        };
        let terms = terms.iter().map(|t| (t.exponents.clone(), t.coefficient)).collect();
        Ok(Some(SparsePolynomial::new(
            terms,
            self.threshold,
            self.degree,
            self.feature_names.clone(),
        )?))
    }
}
