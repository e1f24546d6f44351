//! `balance` — exact decisions for bilinear balance systems on weighted
//! graphs, with bridges to class-2 Lie algebras and exponent-`p` groups.
//!
//! Every command reads and writes JSON with canonical scalar text and a
//! stable key order, so identical inputs and flags produce byte-identical
//! output.  Exit codes are uniform across commands:
//!
//! * `0` — labelable / the element is a bracket or commutator / sweep agreed;
//! * `2` — not labelable / not a bracket or commutator / sweep disagreed;
//! * `3` — unknown;
//! * `1` — input error (malformed file, element outside the derived span,
//!   budget exceeded), with a diagnostic on standard error.

use balance_core::bridge::{decide_commutator, decide_in_image, BridgeError, ImageConfig};
use balance_core::defect::{detect_all, validate_certificate, DefectFamily, DEFAULT_CERTIFICATE_CAP};
use balance_core::engine::{decide, DecideConfig, DecisionStatus};
use balance_core::field::{FieldDescriptor, Scalar};
use balance_core::graph::WeightedGraph;
use balance_core::io::{
    self, CertificateDto, DecisionDto, DiagnosticsDto, ElementDto, GraphDto, GroupDecisionDto,
    GroupDto, ImageDecisionDto, LabelingDto, StructureDto, TargetDto, WitnessDto,
};
use balance_core::oracle::{oracle_image, oracle_label, GraphEnumerator};
use clap::{Parser, Subcommand, ValueEnum};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::Serialize;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "balance",
    version,
    about = "Exact solvers for bilinear balance systems on weighted graphs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide whether a weighted graph admits a consistent labeling.
    #[command(alias = "label-graph")]
    CheckGraph {
        /// Graph JSON file.
        #[arg(long)]
        input: PathBuf,
        /// Work cap for the exhaustive fallback on five or more vertices.
        #[arg(long, default_value_t = 100_000_000)]
        budget: u64,
        /// Largest cycle length searched for family-A defects (default 2n−2).
        #[arg(long)]
        max_m: Option<usize>,
        /// Randomize the free labeling parameters; never affects the decision.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// List the defect certificates of a graph (up to the detector cap).
    DetectDefects {
        /// Graph JSON file.
        #[arg(long)]
        input: PathBuf,
        /// Largest cycle length searched for family-A defects (default 2n−2).
        #[arg(long)]
        max_m: Option<usize>,
    },
    /// Decide whether an element of a class-2 Lie algebra is a single bracket.
    CheckLie {
        /// Alternating structure JSON file.
        #[arg(long)]
        structure: PathBuf,
        /// Element JSON file (coordinates in the bracket target space).
        #[arg(long)]
        element: PathBuf,
        /// Work cap shared by presentation search and oracle fallbacks.
        #[arg(long, default_value_t = 100_000_000)]
        budget: u64,
        /// Half-width of the rational parameter window scanned over Q.
        #[arg(long, default_value_t = 3)]
        range: i64,
    },
    /// Decide whether a central element of a class-2 exponent-p group is a
    /// single commutator.
    CheckGroup {
        /// Group presentation JSON file.
        #[arg(long)]
        group: PathBuf,
        /// Target element JSON file (exponent vector over the central basis).
        #[arg(long)]
        target: PathBuf,
        /// Work cap shared by presentation search and oracle fallbacks.
        #[arg(long, default_value_t = 100_000_000)]
        budget: u64,
        /// Half-width of the rational parameter window (unused over F_p,
        /// accepted for interface symmetry).
        #[arg(long, default_value_t = 3)]
        range: i64,
    },
    /// Brute-force reference decision for a graph over a prime field.
    OracleGraph {
        /// Graph JSON file.
        #[arg(long)]
        input: PathBuf,
        /// Cap on enumeration work p^(2n).
        #[arg(long, default_value_t = 100_000_000)]
        budget: u64,
    },
    /// Brute-force reference decision for bracket-image membership over a
    /// prime field.
    OracleImage {
        /// Alternating structure JSON file.
        #[arg(long)]
        structure: PathBuf,
        /// Element JSON file.
        #[arg(long)]
        element: PathBuf,
        /// Cap on enumeration work p^n · m·n².
        #[arg(long, default_value_t = 100_000_000)]
        budget: u64,
    },
    /// Run the decision engine against the brute-force oracle over many
    /// graphs and report agreement counts.
    VerifySweep {
        /// Number of vertices.
        #[arg(long)]
        n: usize,
        /// Field characteristic (prime).
        #[arg(long)]
        p: u64,
        /// Enumerate every graph, or sample uniformly with --samples.
        #[arg(long, value_enum, default_value_t = SweepMode::Exhaustive)]
        mode: SweepMode,
        /// Number of graphs drawn in sample mode.
        #[arg(long, default_value_t = 10_000)]
        samples: u64,
        /// Worker threads; the index range is split into contiguous chunks
        /// and counts merge in chunk order, so results do not depend on W.
        #[arg(long, default_value_t = 1)]
        workers: usize,
        /// Seed for sampling order and randomized labeling parameters;
        /// never affects any decision.
        #[arg(long)]
        seed: Option<u64>,
        /// Cap on total oracle work (graphs × p^(2n)) in exhaustive mode,
        /// and per-graph work in both modes.
        #[arg(long, default_value_t = 100_000_000)]
        budget: u64,
        /// Largest cycle length searched for family-A defects (default 2n−2).
        #[arg(long)]
        max_m: Option<usize>,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SweepMode {
    Exhaustive,
    Sample,
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<u8, String> {
    match cli.command {
        Command::CheckGraph { input, budget, max_m, seed } => {
            cmd_check_graph(&input, budget, max_m, seed)
        }
        Command::DetectDefects { input, max_m } => cmd_detect_defects(&input, max_m),
        Command::CheckLie { structure, element, budget, range } => {
            cmd_check_lie(&structure, &element, budget, range)
        }
        Command::CheckGroup { group, target, budget, range } => {
            cmd_check_group(&group, &target, budget, range)
        }
        Command::OracleGraph { input, budget } => cmd_oracle_graph(&input, budget),
        Command::OracleImage { structure, element, budget } => {
            cmd_oracle_image(&structure, &element, budget)
        }
        Command::VerifySweep { n, p, mode, samples, workers, seed, budget, max_m } => {
            cmd_verify_sweep(n, p, mode, samples, workers, seed, budget, max_m)
        }
    }
}

// ---------------------------------------------------------------------------
// Shared plumbing
// ---------------------------------------------------------------------------

fn read_text(path: &Path) -> Result<String, String> {
    std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))
}

fn parse_file<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, String> {
    io::from_json_str(&read_text(path)?).map_err(|e| format!("{}: {e}", path.display()))
}

fn load_graph(path: &Path) -> Result<WeightedGraph, String> {
    parse_file::<GraphDto>(path)?.to_graph().map_err(|e| format!("{}: {e}", path.display()))
}

fn load_structure(path: &Path) -> Result<balance_core::bridge::AlternatingStructure, String> {
    parse_file::<StructureDto>(path)?
        .to_structure()
        .map_err(|e| format!("{}: {e}", path.display()))
}

fn load_element(path: &Path, field: FieldDescriptor) -> Result<Vec<Scalar>, String> {
    parse_file::<ElementDto>(path)?
        .to_scalars(field)
        .map_err(|e| format!("{}: {e}", path.display()))
}

fn decision_exit(status: DecisionStatus) -> u8 {
    match status {
        DecisionStatus::Labelable => 0,
        DecisionStatus::NotLabelable | DecisionStatus::NotLabelableByOracle => 2,
        DecisionStatus::Unknown => 3,
    }
}

fn image_exit(status: balance_core::bridge::ImageStatus) -> u8 {
    match status {
        balance_core::bridge::ImageStatus::Yes => 0,
        balance_core::bridge::ImageStatus::No => 2,
        balance_core::bridge::ImageStatus::Unknown => 3,
    }
}

fn emit<T: Serialize>(value: &T) {
    println!("{}", io::to_json_pretty(value));
}

// ---------------------------------------------------------------------------
// Graph commands
// ---------------------------------------------------------------------------

fn cmd_check_graph(
    input: &Path,
    budget: u64,
    max_m: Option<usize>,
    seed: Option<u64>,
) -> Result<u8, String> {
    let graph = load_graph(input)?;
    let config = DecideConfig { budget, max_m, table_seed: seed };
    let decision = decide(&graph, &config);
    emit(&DecisionDto::from_decision(&decision));
    Ok(decision_exit(decision.status))
}

fn cmd_detect_defects(input: &Path, max_m: Option<usize>) -> Result<u8, String> {
    let graph = load_graph(input)?;
    let certificates = detect_all(&graph, max_m, DEFAULT_CERTIFICATE_CAP);
    let dtos: Vec<CertificateDto> =
        certificates.iter().map(CertificateDto::from_certificate).collect();
    emit(&dtos);
    Ok(0)
}

fn cmd_oracle_graph(input: &Path, budget: u64) -> Result<u8, String> {
    let graph = load_graph(input)?;
    let outcome = oracle_label(&graph, budget).map_err(|e| e.to_string())?;
    let mut diagnostics = DiagnosticsDto::default();
    diagnostics.notes.push("exhaustive label enumeration".to_owned());
    let (status, labeling) = match &outcome {
        Some(labeling) => {
            (DecisionStatus::Labelable, Some(LabelingDto::from_labeling(labeling).labels))
        }
        None => (DecisionStatus::NotLabelableByOracle, None),
    };
    emit(&DecisionDto {
        status: io::decision_status_text(status).to_owned(),
        labeling,
        certificate: None,
        diagnostics,
    });
    Ok(decision_exit(status))
}

// ---------------------------------------------------------------------------
// Bridge commands
// ---------------------------------------------------------------------------

const LIE_SPAN_MESSAGE: &str = "the element lies outside the span of the stored brackets \
(the derived subalgebra), so bracket-image membership does not apply to it; this is an \
input error, not a \"not a bracket\" decision";

const GROUP_SPAN_MESSAGE: &str = "the target lies outside the subgroup generated by the \
stored commutators (the derived subgroup), so the commutator question does not apply to \
it; this is an input error, not a \"not a commutator\" decision";

fn image_config(budget: u64, range: i64) -> ImageConfig {
    ImageConfig {
        budget,
        range,
        decide: DecideConfig { budget, ..DecideConfig::default() },
    }
}

fn cmd_check_lie(
    structure_path: &Path,
    element_path: &Path,
    budget: u64,
    range: i64,
) -> Result<u8, String> {
    let structure = load_structure(structure_path)?;
    let x = load_element(element_path, structure.field())?;
    match decide_in_image(&structure, &x, &image_config(budget, range)) {
        Ok(decision) => {
            emit(&ImageDecisionDto::from_image_decision(&decision));
            Ok(image_exit(decision.status))
        }
        Err(BridgeError::TargetOutsideSpan) => Err(LIE_SPAN_MESSAGE.to_owned()),
        Err(e) => Err(e.to_string()),
    }
}

fn cmd_check_group(
    group_path: &Path,
    target_path: &Path,
    budget: u64,
    range: i64,
) -> Result<u8, String> {
    let group =
        parse_file::<GroupDto>(group_path)?.to_group().map_err(|e| format!("{}: {e}", group_path.display()))?;
    let target: TargetDto = parse_file(target_path)?;
    match decide_commutator(&group, &target.exponents, &image_config(budget, range)) {
        Ok(decision) => {
            emit(&GroupDecisionDto::from_group_decision(&decision));
            Ok(image_exit(decision.status))
        }
        Err(BridgeError::TargetOutsideSpan) => Err(GROUP_SPAN_MESSAGE.to_owned()),
        Err(e) => Err(e.to_string()),
    }
}

fn cmd_oracle_image(
    structure_path: &Path,
    element_path: &Path,
    budget: u64,
) -> Result<u8, String> {
    let structure = load_structure(structure_path)?;
    let x = load_element(element_path, structure.field())?;
    let outcome = oracle_image(&structure, &x, budget).map_err(|e| e.to_string())?;
    let (status, witness) = match &outcome {
        Some((a, b)) => (
            balance_core::bridge::ImageStatus::Yes,
            Some(WitnessDto {
                a: ElementDto::from_scalars(a).value,
                b: ElementDto::from_scalars(b).value,
            }),
        ),
        None => (balance_core::bridge::ImageStatus::No, None),
    };
    emit(&ImageDecisionDto {
        status: io::image_status_text(status).to_owned(),
        witness,
        refutations: vec![],
        notes: vec!["exhaustive candidate enumeration".to_owned()],
    });
    Ok(image_exit(status))
}

// ---------------------------------------------------------------------------
// Verification sweep
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct SweepReport {
    n: usize,
    p: u64,
    mode: String,
    graphs: u64,
    agree: u64,
    disagree: u64,
    labelable: u64,
    defective_by_family: BTreeMap<String, u64>,
    oracle_refuted: u64,
    unknown: u64,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    disagreement_indices: Vec<String>,
}

#[derive(Default)]
struct Tally {
    graphs: u64,
    agree: u64,
    disagree: u64,
    labelable: u64,
    families: BTreeMap<String, u64>,
    oracle_refuted: u64,
    unknown: u64,
    disagreements: Vec<u128>,
}

impl Tally {
    fn merge(&mut self, other: Tally) {
        self.graphs += other.graphs;
        self.agree += other.agree;
        self.disagree += other.disagree;
        self.labelable += other.labelable;
        for (family, count) in other.families {
            *self.families.entry(family).or_insert(0) += count;
        }
        self.oracle_refuted += other.oracle_refuted;
        self.unknown += other.unknown;
        self.disagreements.extend(other.disagreements);
    }
}

fn family_key(certificate: &balance_core::defect::DefectCertificate) -> String {
    match certificate.family() {
        DefectFamily::A => format!("{}A", certificate.size()),
        DefectFamily::B => "4B".to_owned(),
        DefectFamily::C => "4C".to_owned(),
    }
}

/// Checks one graph: the engine's answer must match the oracle, labelings
/// must verify, and certificates must re-validate.  `Unknown` counts
/// separately — the engine claimed nothing, so there is nothing to compare.
fn sweep_graph(
    graph: &WeightedGraph,
    index: u128,
    config: &DecideConfig,
    oracle_budget: u64,
    tally: &mut Tally,
) -> Result<(), String> {
    let decision = decide(graph, config);
    let oracle = oracle_label(graph, oracle_budget)
        .map_err(|e| format!("oracle failed on graph {index}: {e}"))?;
    tally.graphs += 1;
    let mut sound = true;
    match decision.status {
        DecisionStatus::Labelable => {
            tally.labelable += 1;
            match &decision.labeling {
                Some(l) => match graph.verify_labeling(l) {
                    Ok(violations) if violations.is_empty() => {}
                    _ => sound = false,
                },
                None => sound = false,
            }
            if oracle.is_none() {
                sound = false;
            }
        }
        DecisionStatus::NotLabelable => {
            match &decision.certificate {
                Some(c) if validate_certificate(graph, c).is_ok() => {
                    *tally.families.entry(family_key(c)).or_insert(0) += 1;
                }
                _ => sound = false,
            }
            if oracle.is_some() {
                sound = false;
            }
        }
        DecisionStatus::NotLabelableByOracle => {
            tally.oracle_refuted += 1;
            if oracle.is_some() {
                sound = false;
            }
        }
        DecisionStatus::Unknown => {
            tally.unknown += 1;
            return Ok(());
        }
    }
    if sound {
        tally.agree += 1;
    } else {
        tally.disagree += 1;
        if tally.disagreements.len() < 10 {
            tally.disagreements.push(index);
        }
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_verify_sweep(
    n: usize,
    p: u64,
    mode: SweepMode,
    samples: u64,
    workers: usize,
    seed: Option<u64>,
    budget: u64,
    max_m: Option<usize>,
) -> Result<u8, String> {
    let enumerator = GraphEnumerator::new(n, p).map_err(|e| e.to_string())?;
    let per_graph = (p as u128).saturating_pow(2 * n as u32);
    let indices: Vec<u128> = match mode {
        SweepMode::Exhaustive => {
            let total = enumerator.count();
            let work = total.saturating_mul(per_graph);
            if work > budget as u128 {
                return Err(format!(
                    "exhaustive sweep over n={n}, p={p} needs {work} units of oracle work, \
                     above the budget {budget}; raise --budget or use --mode sample"
                ));
            }
            (0..total).collect()
        }
        SweepMode::Sample => {
            let mut rng = StdRng::seed_from_u64(seed.unwrap_or(0));
            (0..samples).map(|_| rng.gen_range(0..enumerator.count())).collect()
        }
    };
    let config = DecideConfig { budget, max_m, table_seed: seed };

    let workers = workers.max(1);
    let chunk_len = indices.len().div_ceil(workers).max(1);
    let chunks: Vec<&[u128]> = indices.chunks(chunk_len).collect();
    let results: Vec<Result<Tally, String>> = std::thread::scope(|scope| {
        let handles: Vec<_> = chunks
            .iter()
            .map(|part| {
                let enumerator = &enumerator;
                let config = &config;
                scope.spawn(move || {
                    let mut tally = Tally::default();
                    for &index in *part {
                        sweep_graph(&enumerator.graph_at(index), index, config, budget, &mut tally)?;
                    }
                    Ok(tally)
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("sweep worker panicked")).collect()
    });
    let mut total = Tally::default();
    for result in results {
        total.merge(result?);
    }

    let report = SweepReport {
        n,
        p,
        mode: match mode {
            SweepMode::Exhaustive => "exhaustive".to_owned(),
            SweepMode::Sample => "sample".to_owned(),
        },
        graphs: total.graphs,
        agree: total.agree,
        disagree: total.disagree,
        labelable: total.labelable,
        defective_by_family: total.families,
        oracle_refuted: total.oracle_refuted,
        unknown: total.unknown,
        disagreement_indices: total.disagreements.iter().map(|i| i.to_string()).collect(),
    };
    emit(&report);
    Ok(if total.disagree > 0 { 2 } else { 0 })
}
