//! Serde front ends for the JSON wire formats.
//!
//! Every scalar travels as its canonical text form (`Display` /
//! [`FieldDescriptor::parse`]) rather than as a JSON number, so values over
//! `Q` round-trip exactly and files diff cleanly.  All structs serialize
//! their keys in declaration order and keep maps in [`BTreeMap`]s, which
//! makes output byte-deterministic.
//!
//! Formats:
//!
//! * graph — `{"field": {"type":"Fp","p":3} | {"type":"Q"}, "vertices": n,
//!   "edges": [{"u":i,"v":j,"weight":"w"}, ...]}` with `u < v` required;
//! * labeling — `{"labels": [["a1","b1"], ...]}`;
//! * defect certificate — `{"family":"4A"|"4B"|"4C"|"mA", "m":m,
//!   "vertices":[...], "edges":[...]}` (edges in pattern orientation, so
//!   `u > v` is legal there);
//! * decision — `{"status":..., "labeling":..., "certificate":...,
//!   "diagnostics":{...}}`;
//! * alternating structure — `{"field":..., "generators":n, "target_dim":m,
//!   "brackets":[{"i":i,"j":j,"value":["...", ...]}, ...]}` and element
//!   `{"value":[...]}`;
//! * group presentation — `{"p":p, "generators":m, "central_rank":k,
//!   "exponent_p":true, "commutators":[{"i":i,"j":j,"exponents":[...]}]}`
//!   and target `{"exponents":[...]}`;
//! * image / commutator decisions — `{"status":"yes"|"no"|"unknown", ...}`.

use crate::bridge::{
    AlternatingStructure, BridgeError, ClassTwoGroupPresentation, GroupDecision, ImageDecision,
    ImageStatus, Presentation,
};
use crate::defect::{CitedEdge, DefectCertificate, DefectError, DefectFamily};
use crate::engine::{Decision, DecisionStatus, Diagnostics};
use crate::field::{FieldDescriptor, FieldError, Scalar};
use crate::graph::{GraphError, Labeling, WeightedGraph};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(thiserror::Error, Debug)]
pub enum IoError {
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Defect(#[from] DefectError),
    #[error(transparent)]
    Bridge(#[from] BridgeError),
    #[error("{0}")]
    Invalid(String),
}

/// Parses any of the wire DTOs from JSON text.
pub fn from_json_str<T: DeserializeOwned>(text: &str) -> Result<T, IoError> {
    Ok(serde_json::from_str(text)?)
}

/// Compact canonical JSON (stable key order, canonical scalar text).
pub fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string(value).expect("wire DTOs serialize infallibly")
}

/// Pretty-printed canonical JSON; same key order as [`to_json`].
pub fn to_json_pretty<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("wire DTOs serialize infallibly")
}

// ---------------------------------------------------------------------------
// Fields and scalars
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize, Clone, Copy, PartialEq, Eq, Debug)]
#[serde(tag = "type", deny_unknown_fields)]
pub enum FieldDto {
    Fp { p: u64 },
    Q,
}

impl FieldDto {
    pub fn from_field(field: FieldDescriptor) -> Self {
        match field {
            FieldDescriptor::Prime { p } => FieldDto::Fp { p },
            FieldDescriptor::Rationals => FieldDto::Q,
        }
    }

    pub fn to_field(self) -> Result<FieldDescriptor, IoError> {
        match self {
            FieldDto::Fp { p } => Ok(FieldDescriptor::prime(p)?),
            FieldDto::Q => Ok(FieldDescriptor::rationals()),
        }
    }
}

fn scalars_to_text(values: &[Scalar]) -> Vec<String> {
    values.iter().map(|v| v.to_string()).collect()
}

fn parse_scalars(field: FieldDescriptor, texts: &[String]) -> Result<Vec<Scalar>, IoError> {
    texts.iter().map(|t| Ok(field.parse(t)?)).collect()
}

// ---------------------------------------------------------------------------
// Graphs and labelings
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize, Clone, PartialEq, Eq, Debug)]
#[serde(deny_unknown_fields)]
pub struct EdgeDto {
    pub u: usize,
    pub v: usize,
    pub weight: String,
}

#[derive(Serialize, Deserialize, Clone, PartialEq, Eq, Debug)]
#[serde(deny_unknown_fields)]
pub struct GraphDto {
    pub field: FieldDto,
    pub vertices: usize,
    pub edges: Vec<EdgeDto>,
}

impl GraphDto {
    pub fn from_graph(graph: &WeightedGraph) -> Self {
        GraphDto {
            field: FieldDto::from_field(graph.field()),
            vertices: graph.vertex_count(),
            edges: graph
                .edges()
                .map(|(u, v, w)| EdgeDto { u, v, weight: w.to_string() })
                .collect(),
        }
    }

    pub fn to_graph(&self) -> Result<WeightedGraph, IoError> {
        let field = self.field.to_field()?;
        let edges = self
            .edges
            .iter()
            .map(|e| Ok((e.u, e.v, field.parse(&e.weight)?)))
            .collect::<Result<Vec<_>, IoError>>()?;
        Ok(WeightedGraph::new(field, self.vertices, edges)?)
    }
}

#[derive(Serialize, Deserialize, Clone, PartialEq, Eq, Debug)]
#[serde(deny_unknown_fields)]
pub struct LabelingDto {
    pub labels: Vec<(String, String)>,
}

impl LabelingDto {
    pub fn from_labeling(labeling: &Labeling) -> Self {
        LabelingDto { labels: label_texts(labeling) }
    }

    pub fn to_labeling(&self, field: FieldDescriptor) -> Result<Labeling, IoError> {
        let pairs = self
            .labels
            .iter()
            .map(|(a, b)| Ok((field.parse(a)?, field.parse(b)?)))
            .collect::<Result<Vec<_>, IoError>>()?;
        Ok(Labeling::new(pairs))
    }
}

fn label_texts(labeling: &Labeling) -> Vec<(String, String)> {
    labeling.pairs().iter().map(|(a, b)| (a.to_string(), b.to_string())).collect()
}

// ---------------------------------------------------------------------------
// Defect certificates
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize, Clone, PartialEq, Eq, Debug)]
#[serde(deny_unknown_fields)]
pub struct CertificateDto {
    pub family: String,
    pub m: usize,
    pub vertices: Vec<usize>,
    pub edges: Vec<EdgeDto>,
}

impl CertificateDto {
    pub fn from_certificate(certificate: &DefectCertificate) -> Self {
        let family = match (certificate.family(), certificate.size()) {
            (DefectFamily::A, 4) => "4A",
            (DefectFamily::A, _) => "mA",
            (DefectFamily::B, _) => "4B",
            (DefectFamily::C, _) => "4C",
        };
        CertificateDto {
            family: family.to_owned(),
            m: certificate.size(),
            vertices: certificate.vertices().to_vec(),
            edges: certificate
                .edges()
                .iter()
                .map(|e| EdgeDto { u: e.u, v: e.v, weight: e.weight.to_string() })
                .collect(),
        }
    }

    pub fn to_certificate(&self, field: FieldDescriptor) -> Result<DefectCertificate, IoError> {
        let family = match self.family.as_str() {
            "4A" | "4B" | "4C" => {
                if self.m != 4 {
                    return Err(IoError::Invalid(format!(
                        "family {} requires m = 4, found {}",
                        self.family, self.m
                    )));
                }
                match self.family.as_str() {
                    "4A" => DefectFamily::A,
                    "4B" => DefectFamily::B,
                    _ => DefectFamily::C,
                }
            }
            "mA" => DefectFamily::A,
            other => {
                return Err(IoError::Invalid(format!(
                    "unknown defect family {other:?}; expected 4A, 4B, 4C or mA"
                )))
            }
        };
        if self.m != self.vertices.len() {
            return Err(IoError::Invalid(format!(
                "certificate lists {} vertices but claims m = {}",
                self.vertices.len(),
                self.m
            )));
        }
        let edges = self
            .edges
            .iter()
            .map(|e| Ok(CitedEdge { u: e.u, v: e.v, weight: field.parse(&e.weight)? }))
            .collect::<Result<Vec<_>, IoError>>()?;
        Ok(DefectCertificate::new(family, self.vertices.clone(), edges)?)
    }
}

// ---------------------------------------------------------------------------
// Decisions
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize, Clone, PartialEq, Eq, Debug, Default)]
#[serde(deny_unknown_fields)]
pub struct DiagnosticsDto {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub shape: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub case: Option<String>,
    pub parameters: BTreeMap<String, String>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub notes: Vec<String>,
}

impl DiagnosticsDto {
    pub fn from_diagnostics(diagnostics: &Diagnostics) -> Self {
        DiagnosticsDto {
            shape: diagnostics.shape.clone(),
            case: diagnostics.case.clone(),
            parameters: diagnostics.parameters.clone(),
            notes: diagnostics.notes.clone(),
        }
    }
}

#[derive(Serialize, Deserialize, Clone, PartialEq, Eq, Debug)]
#[serde(deny_unknown_fields)]
pub struct DecisionDto {
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub labeling: Option<Vec<(String, String)>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub certificate: Option<CertificateDto>,
    pub diagnostics: DiagnosticsDto,
}

pub fn decision_status_text(status: DecisionStatus) -> &'static str {
    match status {
        DecisionStatus::Labelable => "labelable",
        DecisionStatus::NotLabelable => "not_labelable",
        DecisionStatus::NotLabelableByOracle => "not_labelable_oracle",
        DecisionStatus::Unknown => "unknown",
    }
}

impl DecisionDto {
    pub fn from_decision(decision: &Decision) -> Self {
        DecisionDto {
            status: decision_status_text(decision.status).to_owned(),
            labeling: decision.labeling.as_ref().map(label_texts),
            certificate: decision.certificate.as_ref().map(CertificateDto::from_certificate),
            diagnostics: DiagnosticsDto::from_diagnostics(&decision.diagnostics),
        }
    }
}

// ---------------------------------------------------------------------------
// Alternating structures and elements
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize, Clone, PartialEq, Eq, Debug)]
#[serde(deny_unknown_fields)]
pub struct BracketDto {
    pub i: usize,
    pub j: usize,
    pub value: Vec<String>,
}

#[derive(Serialize, Deserialize, Clone, PartialEq, Eq, Debug)]
#[serde(deny_unknown_fields)]
pub struct StructureDto {
    pub field: FieldDto,
    pub generators: usize,
    pub target_dim: usize,
    pub brackets: Vec<BracketDto>,
}

impl StructureDto {
    pub fn from_structure(structure: &AlternatingStructure) -> Self {
        StructureDto {
            field: FieldDto::from_field(structure.field()),
            generators: structure.generators(),
            target_dim: structure.target_dim(),
            brackets: structure
                .bracket_entries()
                .map(|(i, j, value)| BracketDto { i, j, value: scalars_to_text(value) })
                .collect(),
        }
    }

    pub fn to_structure(&self) -> Result<AlternatingStructure, IoError> {
        let field = self.field.to_field()?;
        let brackets = self
            .brackets
            .iter()
            .map(|b| Ok((b.i, b.j, parse_scalars(field, &b.value)?)))
            .collect::<Result<Vec<_>, IoError>>()?;
        Ok(AlternatingStructure::new(field, self.generators, self.target_dim, brackets)?)
    }
}

#[derive(Serialize, Deserialize, Clone, PartialEq, Eq, Debug)]
#[serde(deny_unknown_fields)]
pub struct ElementDto {
    pub value: Vec<String>,
}

impl ElementDto {
    pub fn from_scalars(value: &[Scalar]) -> Self {
        ElementDto { value: scalars_to_text(value) }
    }

    pub fn to_scalars(&self, field: FieldDescriptor) -> Result<Vec<Scalar>, IoError> {
        parse_scalars(field, &self.value)
    }
}

// ---------------------------------------------------------------------------
// Group presentations and targets
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize, Clone, PartialEq, Eq, Debug)]
#[serde(deny_unknown_fields)]
pub struct CommutatorDto {
    pub i: usize,
    pub j: usize,
    pub exponents: Vec<u64>,
}

#[derive(Serialize, Deserialize, Clone, PartialEq, Eq, Debug)]
#[serde(deny_unknown_fields)]
pub struct GroupDto {
    pub p: u64,
    pub generators: usize,
    pub central_rank: usize,
    pub exponent_p: bool,
    pub commutators: Vec<CommutatorDto>,
}

impl GroupDto {
    pub fn from_group(group: &ClassTwoGroupPresentation) -> Self {
        GroupDto {
            p: group.p(),
            generators: group.generators(),
            central_rank: group.central_rank(),
            exponent_p: true,
            commutators: group
                .commutator_entries()
                .map(|(i, j, exponents)| CommutatorDto { i, j, exponents: exponents.clone() })
                .collect(),
        }
    }

    pub fn to_group(&self) -> Result<ClassTwoGroupPresentation, IoError> {
        Ok(ClassTwoGroupPresentation::new(
            self.p,
            self.generators,
            self.central_rank,
            self.exponent_p,
            self.commutators.iter().map(|c| (c.i, c.j, c.exponents.clone())),
        )?)
    }
}

#[derive(Serialize, Deserialize, Clone, PartialEq, Eq, Debug)]
#[serde(deny_unknown_fields)]
pub struct TargetDto {
    pub exponents: Vec<u64>,
}

// ---------------------------------------------------------------------------
// Image and commutator decisions
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize, Clone, PartialEq, Eq, Debug)]
#[serde(deny_unknown_fields)]
pub struct WitnessDto {
    pub a: Vec<String>,
    pub b: Vec<String>,
}

#[derive(Serialize, Deserialize, Clone, PartialEq, Eq, Debug)]
#[serde(deny_unknown_fields)]
pub struct GroupWitnessDto {
    pub alpha: Vec<u64>,
    pub beta: Vec<u64>,
}

/// One presentation of the target element: the support pairs `(i, j)` with
/// the weight `d_{i,j}` the balance system assigns to each.
#[derive(Serialize, Deserialize, Clone, PartialEq, Eq, Debug)]
#[serde(deny_unknown_fields)]
pub struct PresentationDto {
    pub edges: Vec<EdgeDto>,
}

impl PresentationDto {
    pub fn from_presentation(presentation: &Presentation) -> Self {
        PresentationDto {
            edges: presentation
                .support()
                .iter()
                .zip(presentation.weights())
                .map(|(&(i, j), w)| EdgeDto { u: i, v: j, weight: w.to_string() })
                .collect(),
        }
    }
}

#[derive(Serialize, Deserialize, Clone, PartialEq, Eq, Debug)]
#[serde(deny_unknown_fields)]
pub struct RefutationDto {
    pub presentation: PresentationDto,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub certificate: Option<CertificateDto>,
}

#[derive(Serialize, Deserialize, Clone, PartialEq, Eq, Debug)]
#[serde(deny_unknown_fields)]
pub struct ImageDecisionDto {
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub witness: Option<WitnessDto>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub refutations: Vec<RefutationDto>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub notes: Vec<String>,
}

pub fn image_status_text(status: ImageStatus) -> &'static str {
    match status {
        ImageStatus::Yes => "yes",
        ImageStatus::No => "no",
        ImageStatus::Unknown => "unknown",
    }
}

fn refutation_dtos(
    refutations: &[crate::bridge::PresentationRefutation],
) -> Vec<RefutationDto> {
    refutations
        .iter()
        .map(|r| RefutationDto {
            presentation: PresentationDto::from_presentation(&r.presentation),
            certificate: r.certificate.as_ref().map(CertificateDto::from_certificate),
        })
        .collect()
}

impl ImageDecisionDto {
    pub fn from_image_decision(decision: &ImageDecision) -> Self {
        ImageDecisionDto {
            status: image_status_text(decision.status).to_owned(),
            witness: decision.witness.as_ref().map(|(a, b)| WitnessDto {
                a: scalars_to_text(a),
                b: scalars_to_text(b),
            }),
            refutations: refutation_dtos(&decision.refutations),
            notes: decision.notes.clone(),
        }
    }
}

#[derive(Serialize, Deserialize, Clone, PartialEq, Eq, Debug)]
#[serde(deny_unknown_fields)]
pub struct GroupDecisionDto {
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub witness: Option<GroupWitnessDto>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub refutations: Vec<RefutationDto>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub notes: Vec<String>,
}

impl GroupDecisionDto {
    pub fn from_group_decision(decision: &GroupDecision) -> Self {
        GroupDecisionDto {
            status: image_status_text(decision.status).to_owned(),
            witness: decision.witness.as_ref().map(|(alpha, beta)| GroupWitnessDto {
                alpha: alpha.clone(),
                beta: beta.clone(),
            }),
            refutations: refutation_dtos(&decision.refutations),
            notes: decision.notes.clone(),
        }
    }
}
