//! Report formats: TOML documents and fixed-header CSV tables.

use std::fmt::Write as _;

use periodic_frames::certify::{Certificate, Condition, Record, DRIFT_MODEL};
use periodic_frames::construct::ProductRecord;
use periodic_frames::schedules::{ChainMargin, Inequality};
use periodic_frames::{Tolerances, Verdict};
use serde::Serialize;

/// Failing records listed inline in the TOML report; the CSV has all of them.
const LISTED_FAILURES: usize = 50;

#[derive(Debug, Serialize)]
pub struct CertificateReport {
    pub verdict: String,
    pub horizon: u32,
    pub drift_model: String,
    pub tolerances: ToleranceReport,
    pub conditions: Vec<ConditionSummary>,
    pub failures: Vec<RecordReport>,
}

#[derive(Debug, Serialize)]
pub struct ToleranceReport {
    pub equality: f64,
    pub transform: f64,
    pub convergence: f64,
    pub drift: f64,
    pub zero: f64,
}

impl From<&Tolerances> for ToleranceReport {
    fn from(t: &Tolerances) -> Self {
        Self {
            equality: t.equality,
            transform: t.transform,
            convergence: t.convergence,
            drift: t.drift,
            zero: t.zero,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct ConditionSummary {
    pub id: String,
    pub verdict: String,
    pub records: usize,
    pub pass: usize,
    pub fail: usize,
    pub inconclusive: usize,
    pub skipped: usize,
    pub max_residual: f64,
}

#[derive(Debug, Serialize)]
pub struct RecordReport {
    pub condition: String,
    pub j: u32,
    pub n: i64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<i64>,
    pub residual: f64,
    pub verdict: String,
}

impl From<&Record> for RecordReport {
    fn from(r: &Record) -> Self {
        Self {
            condition: r.condition.id().into(),
            j: r.j,
            n: r.n,
            k: r.k,
            residual: r.residual,
            verdict: r.verdict.as_str().into(),
        }
    }
}

impl CertificateReport {
    pub fn new(cert: &Certificate) -> Self {
        let mut ids: Vec<Condition> = Vec::new();
        for r in &cert.records {
            if !ids.contains(&r.condition) {
                ids.push(r.condition);
            }
        }
        let conditions = ids
            .into_iter()
            .map(|c| {
                let count = |v: Verdict| cert.of(c).filter(|r| r.verdict == v).count();
                ConditionSummary {
                    id: c.id().into(),
                    verdict: cert.verdict_of(c).as_str().into(),
                    records: cert.of(c).count(),
                    pass: count(Verdict::Pass),
                    fail: count(Verdict::Fail),
                    inconclusive: count(Verdict::Inconclusive),
                    skipped: count(Verdict::Skipped),
                    max_residual: cert.max_residual(c),
                }
            })
            .collect();
        Self {
            verdict: cert.verdict.as_str().into(),
            horizon: cert.horizon,
            drift_model: DRIFT_MODEL.into(),
            tolerances: (&cert.tolerances).into(),
            conditions,
            failures: cert
                .records
                .iter()
                .filter(|r| r.verdict == Verdict::Fail)
                .take(LISTED_FAILURES)
                .map(RecordReport::from)
                .collect(),
        }
    }
}

pub const MARGIN_HEADER: &str = "chain,m,k,terms,margin,tail,verdict";

pub fn margins_csv(margins: &[ChainMargin]) -> String {
    let mut out = String::from(MARGIN_HEADER);
    out.push('\n');
    for cm in margins {
        let (name, m, k) = match cm.chain {
            Inequality::RootChain { k } => ("root", 1, k),
            Inequality::NestedChain { m, k } => ("nested", m, k),
            _ => continue,
        };
        let _ = writeln!(
            out,
            "{name},{m},{k},{},{:.16e},{:.16e},{}",
            cm.terms, cm.margin, cm.tail, cm.verdict
        );
    }
    out
}

pub const PRODUCT_HEADER: &str = "n,j1,product,target,xi,verdict,note";

pub fn products_csv(records: &[ProductRecord]) -> String {
    let mut out = String::from(PRODUCT_HEADER);
    out.push('\n');
    for r in records {
        let j1 = r.j1.map(|j| j.to_string()).unwrap_or_default();
        let note = r.note.as_deref().unwrap_or("").replace(',', ";");
        let _ = writeln!(
            out,
            "{},{j1},{:.16e},{:.16e},{:.16e},{},{note}",
            r.n, r.product, r.target, r.xi, r.verdict
        );
    }
    out
}

pub const COEFFICIENT_HEADER: &str = "j,m,k,re,im";
