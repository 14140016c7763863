//! The problem document: variables, evidence families and a query.
//!
//! Each family is a dense table with axes `[X, Y, Z_S.., W?]`, row-major,
//! 0-based, with covariates listed in declaration order.

use serde::{Deserialize, Serialize};

use causebound::{
    BilinearOrientation, BnbOptions, EvidenceFamily, EvidenceKind, EvidenceSet, MediatorOptions, QuerySpec, Schema,
    VariableSpec,
};

use crate::failure::Failure;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemDocument {
    pub variables: Vec<VariableSpec>,
    pub families: Vec<FamilyDocument>,
    pub query: QuerySpec,
    #[serde(default)]
    pub options: SolveOptions,
    /// The true value when the document was generated from a known model.
    /// Reported next to the bounds, never used to compute them.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truth: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyDocument {
    pub name: String,
    pub kind: EvidenceKind,
    /// Covariate names, in declaration order.
    #[serde(default)]
    pub covariates: Vec<String>,
    /// The table has a trailing mediator axis.
    #[serde(default)]
    pub mediator: bool,
    pub table: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolveOptions {
    pub budget: usize,
    pub gap_tol: f64,
    pub include_implied: bool,
    pub mediator_consistency: bool,
    /// Pair the mediator products as literally printed rather than as
    /// independencies. For auditing only.
    pub literal_orientation: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        let bnb = BnbOptions::default();
        Self {
            budget: bnb.budget,
            gap_tol: bnb.gap_tol,
            include_implied: bnb.include_implied,
            mediator_consistency: MediatorOptions::default().mediator_consistency,
            literal_orientation: false,
        }
    }
}

impl SolveOptions {
    pub fn bnb(&self) -> BnbOptions {
        BnbOptions {
            budget: self.budget,
            gap_tol: self.gap_tol,
            include_implied: self.include_implied,
            ..Default::default()
        }
    }

    pub fn mediator(&self) -> MediatorOptions {
        MediatorOptions {
            mediator_consistency: self.mediator_consistency,
            orientation: if self.literal_orientation {
                BilinearOrientation::Literal
            } else {
                BilinearOrientation::Independence
            },
        }
    }
}

impl ProblemDocument {
    pub fn parse(text: &str) -> Result<Self, Failure> {
        serde_json::from_str(text).map_err(|e| Failure::Schema(format!("problem document: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("documents always serialize")
    }

    /// Builds the schema and evidence. Shape problems are schema failures;
    /// whether the numbers are consistent is left to validation.
    pub fn resolve(&self) -> Result<(Schema, EvidenceSet), Failure> {
        let schema = Schema::new(self.variables.clone()).map_err(|e| Failure::Schema(e.to_string()))?;
        self.query
            .validate(schema.nx(), schema.ny())
            .map_err(|e| Failure::Schema(e.to_string()))?;
        let mut evidence = EvidenceSet::default();
        for fam in &self.families {
            let mut covariates = Vec::with_capacity(fam.covariates.len());
            for name in &fam.covariates {
                let i = schema
                    .covariate_index(name)
                    .ok_or_else(|| Failure::Schema(format!("family {}: unknown covariate {name}", fam.name)))?;
                if covariates.last().is_some_and(|&prev| prev >= i) {
                    return Err(Failure::Schema(format!(
                        "family {}: covariates must be listed once each, in declaration order",
                        fam.name
                    )));
                }
                covariates.push(i);
            }
            let family = EvidenceFamily::dense(
                &schema,
                fam.name.clone(),
                fam.kind,
                &covariates,
                fam.mediator,
                fam.table.clone(),
            )
            .map_err(|e| Failure::Schema(e.to_string()))?;
            evidence.push(family);
        }
        Ok((schema, evidence))
    }

    /// The document describing `evidence` over `schema`.
    pub fn from_evidence(schema: &Schema, evidence: &EvidenceSet, query: QuerySpec) -> Self {
        let covariates = schema.covariates();
        Self {
            variables: schema.variables(),
            families: evidence
                .families()
                .iter()
                .map(|f| FamilyDocument {
                    name: f.name().to_string(),
                    kind: f.kind(),
                    covariates: f.covariates().iter().map(|&i| covariates[i].name.clone()).collect(),
                    mediator: f.with_mediator(),
                    table: f.table().to_vec(),
                })
                .collect(),
            query,
            options: SolveOptions::default(),
            truth: None,
        }
    }
}
