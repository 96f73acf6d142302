//! Project-level metrics, documentation coverage, rank-sum tests and
//! report emission.

mod emit;
mod wilcoxon;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::classify::{partition_recoverability, Action, Strategy};
use crate::flow::{attribute_sources, EvidenceKind};
use crate::model::{MethodKind, Recoverability};
use crate::pipeline::Analysis;

pub use emit::{report_to_json, emit_report, read_report, write_csv_tables, Format, ReportError, CSV_TABLES};
pub use wilcoxon::{wilcoxon_rank_sum, StatError, StatMethod, StatResult, DEFAULT_EXACT_CUTOFF};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Specific,
    Subsumption,
    Propagated,
}

impl From<Strategy> for Outcome {
    fn from(s: Strategy) -> Self {
        match s {
            Strategy::Specific => Outcome::Specific,
            Strategy::Subsumption => Outcome::Subsumption,
        }
    }
}

impl Outcome {
    pub fn token(self) -> &'static str {
        match self {
            Outcome::Specific => "specific",
            Outcome::Subsumption => "subsumption",
            Outcome::Propagated => "propagated",
        }
    }
}

/// One distinct exception type among a try block's possible exceptions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExceptionRow {
    pub exception_type: String,
    pub outcome: Outcome,
    /// Catch clause handling the type, if any.
    pub catch_id: Option<String>,
    pub recoverability: Recoverability,
    pub distinct_methods: usize,
    pub evidence_kinds: Vec<EvidenceKind>,
    /// Number of (type, origin) facts merged into this row.
    pub facts: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HandlerRow {
    pub catch_id: String,
    pub caught_types: Vec<String>,
    pub actions: Vec<Action>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TryRow {
    pub try_id: String,
    pub file: String,
    pub line: u32,
    pub method: String,
    pub total: usize,
    pub propagated: usize,
    pub propagated_recoverable: usize,
    pub exceptions: Vec<ExceptionRow>,
    pub handlers: Vec<HandlerRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Totals {
    pub try_blocks: usize,
    pub catch_clauses: usize,
    pub methods: usize,
    pub distinct_exception_types: usize,
    pub call_sites: usize,
    pub unresolved_call_sites: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiversityBucket {
    pub bucket: String,
    pub types: usize,
    pub fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiversityRow {
    pub total_types: usize,
    pub buckets: Vec<DiversityBucket>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KindCount {
    pub kind: EvidenceKind,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KindOverlap {
    pub first: EvidenceKind,
    pub second: EvidenceKind,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Coverage {
    /// Possible exceptions counted once per (try block, type).
    pub possible: usize,
    pub per_kind: Vec<KindCount>,
    pub overlaps: Vec<KindOverlap>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectReport {
    pub project: String,
    pub totals: Totals,
    pub try_blocks: Vec<TryRow>,
    pub diversity: DiversityRow,
    pub coverage: Coverage,
}

pub const BUCKETS: [&str; 6] = ["1", "2", "3", "4", "5", ">5"];

pub fn aggregate_project(analysis: &Analysis, name: &str) -> ProjectReport {
    let model = &analysis.model;
    let mut rows = Vec::new();
    for a in &analysis.tries {
        let node = model.try_node(a.try_id);
        let sources = attribute_sources(a);
        let (recoverable, _) = partition_recoverability(&a.propagated, model);
        let recoverable: BTreeSet<_> = recoverable.iter().map(|f| f.ty).collect();
        let propagated = a.propagated_types();
        let mut exceptions: Vec<ExceptionRow> = sources
            .iter()
            .map(|(&ty, src)| {
                let handled = a.handled.iter().find(|h| h.fact.ty == ty);
                ExceptionRow {
                    exception_type: model.type_name(ty).to_string(),
                    outcome: handled.map_or(Outcome::Propagated, |h| h.strategy.into()),
                    catch_id: handled.map(|h| model.catch_node(h.catch).id.clone()),
                    recoverability: model.recoverability_of(ty).expect("possible types are exceptions"),
                    distinct_methods: src.distinct_methods,
                    evidence_kinds: src.evidence.iter().copied().collect(),
                    facts: a.possible.iter().filter(|f| f.ty == ty).count(),
                }
            })
            .collect();
        exceptions.sort_by(|x, y| x.exception_type.cmp(&y.exception_type));
        let handlers = node
            .catches
            .iter()
            .map(|&c| {
                let cn = model.catch_node(c);
                let actions = analysis
                    .handlers
                    .iter()
                    .find(|h| h.catch == c)
                    .map(|h| h.actions.iter().copied().collect())
                    .unwrap_or_default();
                HandlerRow {
                    catch_id: cn.id.clone(),
                    caught_types: cn.caught.iter().map(|&t| model.type_name(t).to_string()).collect(),
                    actions,
                }
            })
            .collect();
        rows.push((
            node.position.clone(),
            TryRow {
                try_id: node.id.clone(),
                file: node.position.file.clone(),
                line: node.position.line,
                method: model.method(node.method).to_string(),
                total: sources.len(),
                propagated: propagated.len(),
                propagated_recoverable: recoverable.len(),
                exceptions,
                handlers,
            },
        ));
    }
    rows.sort_by(|a, b| a.0.cmp(&b.0));
    let rows: Vec<TryRow> = rows.into_iter().map(|(_, r)| r).collect();

    let methods = model
        .method_ids()
        .filter(|&m| model.method(m).kind == MethodKind::Corpus)
        .count();
    let totals = Totals {
        try_blocks: rows.len(),
        catch_clauses: rows.iter().map(|r| r.handlers.len()).sum(),
        methods,
        distinct_exception_types: distinct_types(&rows).len(),
        call_sites: model.call_sites().len(),
        unresolved_call_sites: model.unresolved_count(),
    };
    let mut report = ProjectReport {
        project: name.to_string(),
        totals,
        diversity: diversity(&rows),
        coverage: Coverage {
            possible: 0,
            per_kind: Vec::new(),
            overlaps: Vec::new(),
        },
        try_blocks: rows,
    };
    report.coverage = documentation_coverage(&report);
    report
}

fn distinct_types(rows: &[TryRow]) -> BTreeMap<&str, usize> {
    let mut seen: BTreeMap<&str, usize> = BTreeMap::new();
    for r in rows {
        for e in &r.exceptions {
            *seen.entry(e.exception_type.as_str()).or_default() += 1;
        }
    }
    seen
}

/// Fraction of distinct types occurring in exactly 1..5 and more than 5
/// try blocks.
pub fn diversity(rows: &[TryRow]) -> DiversityRow {
    let per_type = distinct_types(rows);
    let total = per_type.len();
    let mut counts = [0usize; 6];
    for &n in per_type.values() {
        counts[n.min(6) - 1] += 1;
    }
    DiversityRow {
        total_types: total,
        buckets: BUCKETS
            .iter()
            .zip(counts)
            .map(|(b, c)| DiversityBucket {
                bucket: b.to_string(),
                types: c,
                fraction: if total == 0 { 0.0 } else { c as f64 / total as f64 },
            })
            .collect(),
    }
}

/// Per evidence kind, how many possible exceptions it attests, plus the
/// pairwise overlaps.
pub fn documentation_coverage(report: &ProjectReport) -> Coverage {
    let rows: Vec<&ExceptionRow> = report.try_blocks.iter().flat_map(|r| &r.exceptions).collect();
    let has = |e: &ExceptionRow, k: EvidenceKind| e.evidence_kinds.contains(&k);
    let per_kind = EvidenceKind::ALL
        .iter()
        .map(|&kind| KindCount {
            kind,
            count: rows.iter().filter(|e| has(e, kind)).count(),
        })
        .collect();
    let mut overlaps = Vec::new();
    for (i, &first) in EvidenceKind::ALL.iter().enumerate() {
        for &second in &EvidenceKind::ALL[i + 1..] {
            overlaps.push(KindOverlap {
                first,
                second,
                count: rows.iter().filter(|e| has(e, first) && has(e, second)).count(),
            });
        }
    }
    Coverage {
        possible: rows.len(),
        per_kind,
        overlaps,
    }
}
