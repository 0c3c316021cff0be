//! Instance files: JSON with a `spaces` map and complex matrices as row-major
//! arrays of rows of `[re, im]` pairs. `rho` is on `[X, Z]`, `sigma` on
//! `[Z, Y]` and the optional `x` on `[X, Y]`.

use std::collections::BTreeMap;
use std::path::Path;

use choicert::certificate::ProblemInstance;
use choicert::linalg::{matrix_to_rows, rows_to_matrix, LabeledOperator, Space};
use choicert::superop::{choi_validate_with_tol, ChoiMatrix};
use serde::{Deserialize, Serialize};

use crate::CliError;

pub type Rows = Vec<Vec<[f64; 2]>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub spaces: BTreeMap<String, usize>,
    pub rho: Rows,
    pub sigma: Rows,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x: Option<Rows>,
}

/// Parsed and validated contents of an [`InstanceFile`].
#[derive(Debug, Clone)]
pub struct Loaded {
    pub instance: ProblemInstance,
    pub x: Option<ChoiMatrix>,
}

impl InstanceFile {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Input(format!("malformed instance: {e}")))
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serializes")
    }

    pub fn from_operators(
        rho: &LabeledOperator,
        sigma: &LabeledOperator,
        x: Option<&LabeledOperator>,
    ) -> Result<Self, CliError> {
        let mut spaces = BTreeMap::new();
        for s in rho.labels().iter().chain(sigma.labels()) {
            spaces.insert(s.name.clone(), s.dim);
        }
        let rows = |op: &LabeledOperator, order: [&str; 2]| -> Result<Rows, CliError> {
            Ok(matrix_to_rows(op.reorder(&order).map_err(input)?.matrix()))
        };
        Ok(Self {
            spaces,
            rho: rows(rho, ["X", "Z"])?,
            sigma: rows(sigma, ["Z", "Y"])?,
            x: x.map(|x| rows(x, ["X", "Y"])).transpose()?,
        })
    }

    fn space(&self, name: &str) -> Result<Space, CliError> {
        self.spaces
            .get(name)
            .map(|&d| Space::new(name, d))
            .ok_or_else(|| CliError::Input(format!("`spaces` must define `{name}`")))
    }

    fn operator(
        &self,
        rows: &Rows,
        first: &str,
        second: &str,
        what: &str,
    ) -> Result<LabeledOperator, CliError> {
        let labels = vec![self.space(first)?, self.space(second)?];
        let m = rows_to_matrix(rows).map_err(|e| CliError::Input(format!("{what}: {e}")))?;
        LabeledOperator::new(labels, m).map_err(|e| CliError::Input(format!("{what}: {e}")))
    }

    pub fn load(&self, tol: f64) -> Result<Loaded, CliError> {
        if let Some(extra) = self
            .spaces
            .keys()
            .find(|k| !["X", "Y", "Z"].contains(&k.as_str()))
        {
            return Err(CliError::Input(format!(
                "unexpected space `{extra}`; use X, Y and Z"
            )));
        }
        let rho = self.operator(&self.rho, "X", "Z", "rho")?;
        let sigma = self.operator(&self.sigma, "Z", "Y", "sigma")?;
        let instance = ProblemInstance::new(rho, sigma).map_err(input)?;
        let x = match &self.x {
            Some(rows) => {
                let op = self.operator(rows, "X", "Y", "x")?;
                Some(choi_validate_with_tol(&op, "Y", "X", tol).map_err(input)?)
            }
            None => None,
        };
        Ok(Loaded { instance, x })
    }
}

fn input(e: choicert::Error) -> CliError {
    CliError::Input(e.to_string())
}
