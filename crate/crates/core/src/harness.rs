//! Fixture reproduction and the property suites.
//!
//! Every worked case lives in `fixtures/cases.json` (overridable through
//! `LATKIT_FIXTURES`). A run rebuilds `K` for each case, compares it with the
//! recorded invariants and also checks evenness, the Hermite bound and the
//! index-determinant identity on everything it builds.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_traits::One;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::catalog;
use crate::error::{LatticeError, Result};
use crate::glue;
use crate::isometry::{self, Isometry, IsometrySpec};
use crate::json::JsonRational;
use crate::lattice::{count_cosets, exact_sqrt, Lattice};
use crate::linalg::{int_rat, rat, smith_normal_form, Rational, RationalMatrix};
use crate::pair_sum::{self, pair_sum, PairSumResult};

/// Environment variable naming an alternative fixture file.
pub const FIXTURES_ENV: &str = "LATKIT_FIXTURES";

/// Cases whose recorded values are known to contain a typo: the report shows
/// the recorded and recomputed invariants side by side and does not fail.
pub const TYPO_FLAG: &str = "typo-verify-by-recomputation";

const BUILTIN_FIXTURES: &str = include_str!("../fixtures/cases.json");

/// Groups accepted by [`select`], in fixture order.
pub const GROUPS: [&str; 6] = ["z2", "a2", "a3", "a4", "d4", "z5d5"];

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FixtureCase {
    pub id: String,
    pub group: String,
    /// Catalog name of `L`.
    pub base: String,
    pub spec: IsometrySpec,
    pub expect_det: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expect_smith: Option<Vec<u64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expect_identity: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expect_index_in_ambient: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub glue_facts: Option<GlueFacts>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub overlattices: Vec<OverlatticeFact>,
    #[serde(default, skip_serializing_if = "BTreeSet::is_empty")]
    pub flags: BTreeSet<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub printed: Option<Printed>,
}

impl FixtureCase {
    pub fn is_flagged(&self) -> bool {
        self.flags.contains(TYPO_FLAG)
    }
}

/// One orthogonal block of the glue sublattice `J`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "part", rename_all = "snake_case")]
pub enum GluePart {
    /// The diagonal copy `M = {(x, x)}`.
    M,
    /// Span of vectors given in coordinates of the basis of `L ⊥ L`.
    Span { vectors: Vec<Vec<i64>> },
    /// Everything in `K` orthogonal to the blocks listed before it.
    Annihilator,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GlueFacts {
    pub parts: Vec<GluePart>,
    pub index: u64,
    /// Glue vectors in `L ⊥ L` coordinates; derived from the Smith form when
    /// absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vectors: Option<Vec<Vec<i64>>>,
    /// Minimum of the annihilator block.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub annihilator_norm: Option<u64>,
    /// Catalog name `J` should be isometric to.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sublattice: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum OverlatticeOp {
    /// `K + 2Zu₁ + ... + 2Zu_count` for independent order-4 cosets.
    Double { count: usize },
    /// `K + 2K*`.
    TwiceDual,
    /// Integral overlattices of the given index; later steps continue from
    /// the first one found.
    Search { index: u64 },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OverlatticeFact {
    pub steps: Vec<OverlatticeOp>,
    pub expect_det: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expect_identity: Option<String>,
    /// `K` must be the even sublattice of the result.
    #[serde(default)]
    pub even_sublattice: bool,
    /// Check every overlattice the final search returns, not only the first.
    #[serde(default)]
    pub all_results: bool,
}

/// A printed Gram matrix and the basis it claims to use.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Printed {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gram: Option<Vec<Vec<i64>>>,
    /// Basis vectors in `L ⊥ L` coordinates.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basis: Option<Vec<Vec<i64>>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Flagged,
}

impl Status {
    fn label(self) -> &'static str {
        match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Flagged => "FLAGGED",
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Invariants {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rank: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub det: Option<JsonRational>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub smith: Option<Vec<JsonRational>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub identity: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub index_in_ambient: Option<JsonRational>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportEntry {
    pub id: String,
    pub group: String,
    pub status: Status,
    pub computed: Invariants,
    pub expected: Invariants,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Report {
    pub cases: Vec<ReportEntry>,
}

impl Report {
    /// Entries sorted by id.
    pub fn new(mut cases: Vec<ReportEntry>) -> Self {
        cases.sort_by(|a, b| a.id.cmp(&b.id));
        Self { cases }
    }

    pub fn merge(mut self, other: Report) -> Self {
        self.cases.extend(other.cases);
        Self::new(self.cases)
    }

    pub fn count(&self, status: Status) -> usize {
        self.cases.iter().filter(|c| c.status == status).count()
    }

    pub fn entry(&self, id: &str) -> Option<&ReportEntry> {
        self.cases.iter().find(|c| c.id == id)
    }

    /// 0 when nothing failed, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        i32::from(self.count(Status::Fail) > 0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Text,
    Json,
}

impl std::str::FromStr for Format {
    type Err = LatticeError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "text" => Ok(Format::Text),
            "json" => Ok(Format::Json),
            _ => Err(LatticeError::Parse(format!("unknown format {s:?}"))),
        }
    }
}

/// Parses and validates a fixture file.
pub fn parse_fixtures(text: &str) -> Result<Vec<FixtureCase>> {
    let cases: Vec<FixtureCase> =
        serde_json::from_str(text).map_err(|e| LatticeError::Parse(format!("fixtures: {e}")))?;
    let mut ids = BTreeSet::new();
    for c in &cases {
        if !ids.insert(c.id.as_str()) {
            return Err(LatticeError::Parse(format!("duplicate fixture id {}", c.id)));
        }
        if !GROUPS.contains(&c.group.as_str()) {
            return Err(LatticeError::Parse(format!("{}: unknown group {}", c.id, c.group)));
        }
        if let Some(s) = &c.expect_smith {
            let product: u128 = s.iter().map(|&d| u128::from(d)).product();
            if !c.is_flagged() && product != u128::from(c.expect_det) {
                return Err(LatticeError::Parse(format!(
                    "{}: Smith product {product} differs from det {}",
                    c.id, c.expect_det
                )));
            }
        }
    }
    Ok(cases)
}

/// The fixture file named by `LATKIT_FIXTURES`, else the built-in one.
pub fn load_fixtures() -> Result<Vec<FixtureCase>> {
    match std::env::var_os(FIXTURES_ENV) {
        Some(path) => {
            let text = std::fs::read_to_string(&path)
                .map_err(|e| LatticeError::Io(format!("{}: {e}", path.to_string_lossy())))?;
            parse_fixtures(&text)
        }
        None => parse_fixtures(BUILTIN_FIXTURES),
    }
}

/// Cases of one group, or all of them for `"all"`.
pub fn select(cases: &[FixtureCase], section: &str) -> Result<Vec<FixtureCase>> {
    if section == "all" {
        return Ok(cases.to_vec());
    }
    if !GROUPS.contains(&section) {
        return Err(LatticeError::Parse(format!("unknown section {section:?}")));
    }
    Ok(cases.iter().filter(|c| c.group == section).cloned().collect())
}

/// Whether two Smith sequences agree after dropping leading 1s.
pub fn smith_matches(computed: &[BigInt], expected: &[u64]) -> bool {
    let strip = |v: Vec<BigInt>| -> Vec<BigInt> { v.into_iter().skip_while(|d| d.is_one()).collect() };
    strip(computed.to_vec()) == strip(expected.iter().map(|&d| BigInt::from(d)).collect())
}

pub fn smith_invariants(l: &Lattice) -> Result<Vec<BigInt>> {
    Ok(smith_normal_form(l.gram())?.invariants)
}

fn big_list(v: &[BigInt]) -> Vec<JsonRational> {
    v.iter().map(|d| JsonRational(int_rat(d))).collect()
}

fn show(v: &[BigInt]) -> String {
    let parts: Vec<String> = v.iter().map(ToString::to_string).collect();
    format!("({})", parts.join(","))
}

/// Checks that depend on no recorded value.
fn structural_checks(k: &Lattice, saturation: &Lattice, failures: &mut Vec<String>) -> Result<()> {
    if !k.is_even() {
        failures.push("K is not even".into());
    }
    if !k.hermite_check()? {
        failures.push("Hermite inequality fails".into());
    }
    let idx = int_rat(&saturation.index_of(k)?);
    if k.determinant() != &idx * &idx * saturation.determinant() {
        failures.push("det(K) ≠ index²·det(overlattice)".into());
    }
    Ok(())
}

fn saturation(ps: &PairSumResult) -> Result<Lattice> {
    if ps.is_full_rank() {
        Ok(ps.ambient.clone())
    } else {
        ps.ambient.saturation_of(&ps.k)
    }
}

/// Confirms `l ≅ name` with a certificate re-checked Gram to Gram.
pub fn certify(l: &Lattice, name: &str) -> Result<bool> {
    Ok(match catalog::confirm(l, name)? {
        Some(id) => id.revalidate(l) && id.certificate.as_ref().is_some_and(catalog::certificate_is_unimodular),
        None => false,
    })
}

struct CaseRun {
    computed: Invariants,
    /// Disagreements with recorded values.
    mismatches: Vec<String>,
    /// Violations of properties that hold regardless of the records.
    failures: Vec<String>,
    notes: Vec<String>,
}

fn ambient_rows(ambient: &Lattice, coords: &[Vec<i64>]) -> Result<RationalMatrix> {
    let rows: Vec<Vec<Rational>> = coords
        .iter()
        .map(|c| {
            if c.len() != ambient.rank() {
                Err(LatticeError::Dimension(format!("vector of length {} in rank {}", c.len(), ambient.rank())))
            } else {
                Ok(ambient.vector_i64(c))
            }
        })
        .collect::<Result<_>>()?;
    RationalMatrix::from_rows(rows, ambient.ambient_dim())
}

fn check_glue(ps: &PairSumResult, facts: &GlueFacts, run: &mut CaseRun) -> Result<()> {
    let k = &ps.k;
    let form = ps.ambient.form();
    let mut pieces: Vec<Lattice> = Vec::new();
    for part in &facts.parts {
        let piece = match part {
            GluePart::M => ps.m.clone(),
            GluePart::Span { vectors } => Lattice::span_in_form(form, &ambient_rows(&ps.ambient, vectors)?)?,
            GluePart::Annihilator => {
                let s: Vec<Vec<Rational>> = pieces.iter().flat_map(|p| p.basis().row_vecs()).collect();
                let a = k.annihilator(&s)?;
                if let Some(want) = facts.annihilator_norm {
                    let got = a.minimal_vectors()?.norm;
                    if got != rat(want as i64) {
                        run.mismatches.push(format!("annihilator minimum {got}, expected {want}"));
                    }
                }
                a
            }
        };
        pieces.push(piece);
    }
    for (i, p) in pieces.iter().enumerate() {
        for q in &pieces[i + 1..] {
            let orthogonal = p
                .basis()
                .row_vecs()
                .iter()
                .all(|x| q.basis().row_vecs().iter().all(|y| ps.ambient.inner(x, y).numer().sign() == num_bigint::Sign::NoSign));
            if !orthogonal {
                run.mismatches.push("glue blocks are not orthogonal".into());
            }
        }
    }
    let rows: Vec<Vec<Rational>> = pieces.iter().flat_map(|p| p.basis().row_vecs()).collect();
    let j = Lattice::span_in_form(form, &RationalMatrix::from_rows(rows, ps.ambient.ambient_dim())?)?;
    if j.rank() != k.rank() {
        run.mismatches.push(format!("J has rank {}, K has rank {}", j.rank(), k.rank()));
        return Ok(());
    }
    if !k.contains_lattice(&j) {
        run.mismatches.push("J is not contained in K".into());
        return Ok(());
    }
    let index = k.index_of(&j)?;
    if index != BigInt::from(facts.index) {
        run.mismatches.push(format!("|K : J| = {index}, expected {}", facts.index));
    }
    let minimal = glue::glue_vectors_between(&j, k)?;
    let gs: Vec<Vec<Rational>> = match &facts.vectors {
        Some(v) => ambient_rows(&ps.ambient, v)?.row_vecs(),
        None => minimal.clone(),
    };
    let plan = glue::glue(&j, &gs)?;
    if !plan.result.same_as(k) {
        run.mismatches.push("glue vectors do not regenerate K".into());
    }
    if let Some(name) = &facts.sublattice {
        if !certify(&j, name)? {
            run.mismatches.push(format!("J is not isometric to {name}"));
        }
    }
    run.notes.push(format!(
        "J has det {} and index {index} in K; {} glue vectors given, {} needed",
        j.determinant(),
        gs.len(),
        minimal.len()
    ));
    Ok(())
}

fn describe(steps: &[OverlatticeOp]) -> String {
    let parts: Vec<String> = steps
        .iter()
        .map(|s| match s {
            OverlatticeOp::Double { count } => format!("double×{count}"),
            OverlatticeOp::TwiceDual => "K+2K*".to_string(),
            OverlatticeOp::Search { index } => format!("search({index})"),
        })
        .collect();
    parts.join(" → ")
}

/// Runs the steps of an overlattice fact; returns the final candidates.
pub fn run_overlattice_steps(k: &Lattice, steps: &[OverlatticeOp]) -> Result<Vec<Lattice>> {
    let mut current = vec![k.clone()];
    for op in steps {
        let Some(base) = current.first().cloned() else { break };
        current = match op {
            OverlatticeOp::Double { count } => {
                let us = glue::doubling_vectors(&base, *count)?;
                let steps = glue::integral_overlattice_by_doubling(&base, &us)?;
                vec![steps.last().map_or(base, |s| s.result.clone())]
            }
            OverlatticeOp::TwiceDual => {
                let step = glue::plus_twice_dual(&base)?;
                if !step.integral {
                    return Err(LatticeError::Consistency("K + 2K* is not integral".into()));
                }
                vec![step.result]
            }
            OverlatticeOp::Search { index } => glue::integral_overlattice_search(&base, *index)?
                .into_iter()
                .map(|p| p.result)
                .collect(),
        };
    }
    Ok(current)
}

fn check_overlattice(k: &Lattice, fact: &OverlatticeFact, run: &mut CaseRun) -> Result<()> {
    let label = describe(&fact.steps);
    let found = run_overlattice_steps(k, &fact.steps)?;
    if found.is_empty() {
        run.mismatches.push(format!("{label}: no integral overlattice"));
        return Ok(());
    }
    let checked = if fact.all_results { &found[..] } else { &found[..1] };
    for h in checked {
        if !h.is_integral() {
            run.failures.push(format!("{label}: result is not integral"));
        }
        if !h.hermite_check()? {
            run.failures.push(format!("{label}: Hermite inequality fails"));
        }
        let idx = int_rat(&h.index_of(k)?);
        if &idx * &idx * h.determinant() != k.determinant() {
            run.failures.push(format!("{label}: index² · det(H) ≠ det(K)"));
        }
        if h.determinant() != rat(fact.expect_det as i64) {
            run.mismatches.push(format!("{label}: det {}, expected {}", h.determinant(), fact.expect_det));
        }
        if let Some(name) = &fact.expect_identity {
            if !certify(h, name)? {
                run.mismatches.push(format!("{label}: result is not isometric to {name}"));
            }
        }
        if fact.even_sublattice && !h.even_sublattice()?.same_as(k) {
            run.mismatches.push(format!("{label}: K is not the even sublattice"));
        }
    }
    let h = &found[0];
    let verdict = match &fact.expect_identity {
        Some(name) => format!(", ≅ {name}"),
        None => String::new(),
    };
    let many = if found.len() > 1 { format!(" ({} found)", found.len()) } else { String::new() };
    run.notes.push(format!("{label}: det {}{verdict}{many}", h.determinant()));
    Ok(())
}

fn check_printed(ps: &PairSumResult, printed: &Printed, run: &mut CaseRun) -> Result<()> {
    let Some(gram) = &printed.gram else { return Ok(()) };
    let g = RationalMatrix::from_i64(gram);
    let mut asym = Vec::new();
    for i in 0..g.rows() {
        for j in i + 1..g.cols() {
            if g[(i, j)] != g[(j, i)] {
                asym.push(format!("({},{})", i + 1, j + 1));
            }
        }
    }
    if !asym.is_empty() {
        run.mismatches.push(format!("recorded Gram is not symmetric at {}", asym.join(" ")));
    }
    if let Some(basis) = &printed.basis {
        let rows = ambient_rows(&ps.ambient, basis)?;
        let recomputed = &(&rows * ps.ambient.form()) * &rows.transpose();
        let mut diffs = Vec::new();
        for i in 0..g.rows().min(recomputed.rows()) {
            for j in i..g.cols().min(recomputed.cols()) {
                if g[(i, j)] != recomputed[(i, j)] || g[(j, i)] != recomputed[(j, i)] {
                    diffs.push(format!(
                        "({},{}): recorded {}/{}, recomputed {}",
                        i + 1,
                        j + 1,
                        g[(i, j)],
                        g[(j, i)],
                        recomputed[(i, j)]
                    ));
                }
            }
        }
        if !diffs.is_empty() {
            run.mismatches.push(format!("recorded Gram differs: {}", diffs.join("; ")));
        }
        let spanned = Lattice::span_in_form(ps.ambient.form(), &rows)?;
        if !spanned.same_as(&ps.k) {
            run.mismatches.push("recorded basis does not span K".into());
        }
    }
    Ok(())
}

fn check_case(case: &FixtureCase, run: &mut CaseRun) -> Result<()> {
    let base = catalog::parse(&case.base)?;
    let h = Isometry::from_spec(&base, &case.spec)?;
    let ps = pair_sum(&base, &h)?;
    let k = &ps.k;
    let det = k.determinant();
    let smith = smith_invariants(k)?;
    run.computed = Invariants {
        rank: Some(k.rank()),
        det: Some(JsonRational(det.clone())),
        smith: Some(big_list(&smith)),
        identity: None,
        index_in_ambient: Some(JsonRational(int_rat(&ps.index_in_ambient))),
    };
    if det != rat(case.expect_det as i64) {
        run.mismatches.push(format!("det {det}, expected {}", case.expect_det));
    }
    if let Some(s) = &case.expect_smith {
        if !smith_matches(&smith, s) {
            let want: Vec<BigInt> = s.iter().map(|&d| BigInt::from(d)).collect();
            run.mismatches.push(format!("Smith {}, expected {}", show(&smith), show(&want)));
        }
    }
    if let Some(idx) = case.expect_index_in_ambient {
        if ps.index_in_ambient != BigInt::from(idx) {
            run.mismatches.push(format!("index in L⊥L {}, expected {idx}", ps.index_in_ambient));
        }
    }
    if let Some(name) = &case.expect_identity {
        if certify(k, name)? {
            run.computed.identity = Some(name.clone());
        } else {
            run.mismatches.push(format!("K is not isometric to {name}"));
        }
    }
    structural_checks(k, &saturation(&ps)?, &mut run.failures)?;
    if let Some(g) = &case.glue_facts {
        check_glue(&ps, g, run)?;
    }
    for o in &case.overlattices {
        check_overlattice(k, o, run)?;
    }
    if let Some(p) = &case.printed {
        check_printed(&ps, p, run)?;
    }
    Ok(())
}

fn expected_of(case: &FixtureCase) -> Invariants {
    Invariants {
        rank: None,
        det: Some(JsonRational(rat(case.expect_det as i64))),
        smith: case
            .expect_smith
            .as_ref()
            .map(|s| s.iter().map(|&d| JsonRational(rat(d as i64))).collect()),
        identity: case.expect_identity.clone(),
        index_in_ambient: case.expect_index_in_ambient.map(|i| JsonRational(rat(i as i64))),
    }
}

pub fn run_fixture(case: &FixtureCase) -> ReportEntry {
    let mut run = CaseRun {
        computed: Invariants::default(),
        mismatches: Vec::new(),
        failures: Vec::new(),
        notes: Vec::new(),
    };
    if let Err(e) = check_case(case, &mut run) {
        run.failures.push(format!("error: {e}"));
    }
    let status = if !run.failures.is_empty() {
        Status::Fail
    } else if case.is_flagged() {
        Status::Flagged
    } else if run.mismatches.is_empty() {
        Status::Pass
    } else {
        Status::Fail
    };
    let mut notes = run.failures;
    if case.is_flagged() {
        if run.mismatches.is_empty() {
            notes.push("recorded values agree with the recomputation".into());
        }
        notes.extend(run.mismatches.into_iter().map(|m| format!("recorded vs recomputed: {m}")));
    } else {
        notes.extend(run.mismatches);
    }
    notes.extend(run.notes);
    ReportEntry {
        id: case.id.clone(),
        group: case.group.clone(),
        status,
        computed: run.computed,
        expected: expected_of(case),
        notes,
    }
}

fn in_pool<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> T {
    match jobs {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build() {
            Ok(pool) => pool.install(f),
            Err(_) => f(),
        },
        None => f(),
    }
}

/// Runs the cases concurrently; the report is sorted by id.
pub fn run_fixtures(cases: &[FixtureCase], jobs: Option<usize>) -> Report {
    Report::new(in_pool(jobs, || cases.par_iter().map(run_fixture).collect()))
}

fn entry(id: String, ok: Result<Vec<String>>, computed: Invariants, expected: Invariants) -> ReportEntry {
    let (status, notes) = match ok {
        Ok(problems) if problems.is_empty() => (Status::Pass, Vec::new()),
        Ok(problems) => (Status::Fail, problems),
        Err(e) => (Status::Fail, vec![format!("error: {e}")]),
    };
    ReportEntry { id, group: "suite".into(), status, computed, expected, notes }
}

fn named(name: &str) -> Invariants {
    Invariants { identity: Some(name.to_string()), ..Invariants::default() }
}

fn ncycle_entry(n: usize) -> ReportEntry {
    let want = format!("A{}", 2 * n - 1);
    let mut computed = Invariants::default();
    let ok = pair_sum::theorem_ncycle_witness(n).and_then(|(ps, _)| {
        computed.det = Some(JsonRational(ps.k.determinant()));
        Ok(if certify(&ps.k, &want)? {
            computed.identity = Some(want.clone());
            Vec::new()
        } else {
            vec![format!("K is not isometric to {want}")]
        })
    });
    entry(format!("suite.ncycle.n{n}"), ok, computed, named(&want))
}

/// Index of the `Dₙ` pair-sum inside the `Zⁿ` one, by the determinant
/// formula and by counting cosets.
pub fn dn_index_both_ways(n: usize) -> Result<(BigInt, u64)> {
    let (big, small) = pair_sum::theorem_dn_index_witness(n)?;
    let ratio = small.k.determinant() / big.k.determinant();
    let by_det = exact_sqrt(&ratio)
        .ok_or_else(|| LatticeError::Consistency(format!("det ratio {ratio} is not a square")))?;
    let x = big.k.embed(&small.k)?;
    let counted = count_cosets(&x.to_int()?, big.k.rank())?;
    Ok((by_det, counted))
}

fn dn_index_entry(n: usize) -> ReportEntry {
    let want: u64 = if n.is_multiple_of(2) { 4 } else { 2 };
    let mut computed = Invariants::default();
    let ok = dn_index_both_ways(n).map(|(by_det, counted)| {
        computed.index_in_ambient = Some(JsonRational(int_rat(&by_det)));
        let mut problems = Vec::new();
        if by_det != BigInt::from(want) {
            problems.push(format!("index {by_det} from determinants, expected {want}"));
        }
        if counted != want {
            problems.push(format!("{counted} cosets, expected {want}"));
        }
        problems
    });
    let expected = Invariants { index_in_ambient: Some(JsonRational(rat(want as i64))), ..Invariants::default() };
    entry(format!("suite.dn_index.n{n}"), ok, computed, expected)
}

fn dn_negation_entry(n: usize, k: usize) -> ReportEntry {
    let want = format!("sqrt2*D{}", n + k);
    let mut computed = Invariants::default();
    let ok = pair_sum::theorem_dn_negation_witness(n, k).and_then(|(ps, _)| {
        computed.det = Some(JsonRational(ps.k.determinant()));
        Ok(if certify(&ps.k, &want)? {
            computed.identity = Some(want.clone());
            Vec::new()
        } else {
            vec![format!("K is not isometric to {want}")]
        })
    });
    entry(format!("suite.dn_negation.n{n}k{k}"), ok, computed, named(&want))
}

/// Whether the Gram of `K` in the basis `{(v,v)} ∪ {(hv,h²v)}` equals
/// `G_{A₂} ⊗ G_L` entry for entry.
pub fn kronecker_matches(l: &Lattice, spec: &IsometrySpec) -> Result<bool> {
    let h = Isometry::from_spec(l, spec)?;
    let g = pair_sum::cyclotomic_basis_gram(l, &h)?;
    Ok(g == catalog::root_a(2).gram().kron(l.gram()))
}

/// The two order-3 instances: a rotation of `A₂` and the element of `O(D₄)`
/// fixing no frame.
pub fn tensor_instances() -> Vec<(&'static str, IsometrySpec)> {
    let h = "1/2".parse::<JsonRational>().expect("literal");
    let m = "-1/2".parse::<JsonRational>().expect("literal");
    let rows = vec![
        vec![m.clone(), m.clone(), m.clone(), m.clone()],
        vec![h.clone(), m.clone(), h.clone(), m.clone()],
        vec![h.clone(), m.clone(), m.clone(), h.clone()],
        vec![h.clone(), h, m.clone(), m],
    ];
    vec![
        ("A2", IsometrySpec::perm(&[&[1, 2, 3]])),
        ("D4", IsometrySpec::Matrix { rows, action: isometry::MatrixAction::Ambient }),
    ]
}

fn tensor_entry(base: &str, spec: &IsometrySpec) -> ReportEntry {
    let ok = catalog::parse(base).and_then(|l| kronecker_matches(&l, spec)).map(|same| {
        if same {
            Vec::new()
        } else {
            vec!["Gram differs from the Kronecker form".to_string()]
        }
    });
    entry(format!("suite.a2_tensor.{base}"), ok, Invariants::default(), Invariants::default())
}

/// Shapes for `h = ±1`: `K = M ≅ √2·L`, and `K = M ⊥ N` with both `√2·L`.
fn trivial_entry(base: &str) -> ReportEntry {
    let ok = (|| -> Result<Vec<String>> {
        let l = catalog::parse(base)?;
        let n = l.rank();
        let twice = l.gram().scale(&rat(2));
        let mut problems = Vec::new();
        let plus = pair_sum(&l, &Isometry::identity(n))?;
        if !plus.k.same_as(&plus.m) || plus.m.gram() != &twice {
            problems.push("h = 1 does not give K = M ≅ √2·L".into());
        }
        let minus = pair_sum(&l, &Isometry::identity(n).negate())?;
        let orthogonal = plus.m.basis().row_vecs().iter().all(|x| {
            minus.n.basis().row_vecs().iter().all(|y| minus.ambient.inner(x, y) == rat(0))
        });
        let sum = minus.m.orthogonal_sum(&minus.n);
        if minus.k.rank() != 2 * n || !orthogonal || minus.n.gram() != &twice || minus.k.determinant() != sum.determinant() {
            problems.push("h = −1 does not give K = M ⊥ N".into());
        }
        for k in [&plus.k, &minus.k] {
            if !k.is_even() {
                problems.push("K is not even".into());
            }
        }
        Ok(problems)
    })();
    entry(format!("suite.trivial.{base}"), ok, Invariants::default(), Invariants::default())
}

/// det, Smith, minimum and kissing number of a pair-sum.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Fingerprint {
    pub det: Rational,
    pub smith: Vec<BigInt>,
    pub min_norm: Rational,
    pub min_count: usize,
}

pub fn fingerprint(k: &Lattice) -> Result<Fingerprint> {
    let mins = k.minimal_vectors()?;
    Ok(Fingerprint {
        det: k.determinant(),
        smith: smith_invariants(k)?,
        min_norm: mins.norm,
        min_count: mins.vectors.len(),
    })
}

/// Compares `K_h` with `K_{g⁻¹hg}` for a random automorphism `g`; also
/// checks evenness and the Hermite bound on the conjugate's `K`.
pub fn check_conjugation<R: Rng>(case: &FixtureCase, rng: &mut R) -> Result<Vec<String>> {
    let base = catalog::parse(&case.base)?;
    let h = Isometry::from_spec(&base, &case.spec)?;
    let original = fingerprint(&pair_sum(&base, &h)?.k)?;
    let steps = rng.gen_range(1..=6);
    let g = isometry::random_isometry(&base, steps, rng)?;
    let conj = pair_sum(&base, &h.conjugate_by(&g)?)?;
    let mut problems = Vec::new();
    if fingerprint(&conj.k)? != original {
        problems.push(format!("{}: conjugate gives different invariants", case.id));
    }
    structural_checks(&conj.k, &saturation(&conj)?, &mut problems)?;
    Ok(problems)
}

fn conjugation_entry(case: &FixtureCase, trials: usize, seed: u64) -> ReportEntry {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ok = (0..trials).try_fold(Vec::new(), |mut acc, _| {
        acc.extend(check_conjugation(case, &mut rng)?);
        Ok(acc)
    });
    entry(format!("suite.conjugation.{}", case.id), ok, Invariants::default(), Invariants::default())
}

/// Options for [`run_theorem_suites`].
#[derive(Clone, Copy, Debug)]
pub struct SuiteOptions {
    pub conjugations_per_case: usize,
    pub seed: u64,
    pub jobs: Option<usize>,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        Self { conjugations_per_case: 25, seed: 0x5eed, jobs: None }
    }
}

/// The theorem witnesses over their parameter ranges, the `h = ±1` shapes
/// and conjugacy invariance over `cases`.
pub fn run_theorem_suites(cases: &[FixtureCase], opts: SuiteOptions) -> Report {
    let mut tasks: Vec<Box<dyn Fn() -> ReportEntry + Send + Sync>> = Vec::new();
    for n in 2..=5 {
        tasks.push(Box::new(move || ncycle_entry(n)));
        tasks.push(Box::new(move || dn_index_entry(n)));
        for k in 1..n {
            tasks.push(Box::new(move || dn_negation_entry(n, k)));
        }
    }
    for (base, spec) in tensor_instances() {
        tasks.push(Box::new(move || tensor_entry(base, &spec)));
    }
    let bases: BTreeSet<String> = cases.iter().map(|c| c.base.clone()).collect();
    for b in bases {
        tasks.push(Box::new(move || trivial_entry(&b)));
    }
    if opts.conjugations_per_case > 0 {
        for (i, c) in cases.iter().enumerate() {
            let c = c.clone();
            let seed = opts.seed.wrapping_add(i as u64);
            tasks.push(Box::new(move || conjugation_entry(&c, opts.conjugations_per_case, seed)));
        }
    }
    Report::new(in_pool(opts.jobs, || tasks.par_iter().map(|t| t()).collect()))
}

fn show_invariants(v: &Invariants) -> String {
    let mut out = String::new();
    if let Some(d) = &v.det {
        let _ = write!(out, "det={d}");
    }
    if let Some(s) = &v.smith {
        let parts: Vec<String> = s.iter().map(ToString::to_string).collect();
        let _ = write!(out, " smith=({})", parts.join(","));
    }
    if let Some(i) = &v.index_in_ambient {
        let _ = write!(out, " index={i}");
    }
    if let Some(n) = &v.identity {
        let _ = write!(out, " ≅{n}");
    }
    out.trim_start().to_string()
}

/// Text (one line per entry plus indented notes) or pretty JSON.
pub fn emit_report(report: &Report, format: Format) -> Result<String> {
    match format {
        Format::Json => serde_json::to_string_pretty(report).map_err(|e| LatticeError::Io(e.to_string())),
        Format::Text => {
            let mut out = String::new();
            for c in &report.cases {
                let _ = writeln!(out, "{:<8} {:<48} {}", c.status.label(), c.id, show_invariants(&c.computed));
                if c.status != Status::Pass {
                    let _ = writeln!(out, "         expected {}", show_invariants(&c.expected));
                }
                for n in &c.notes {
                    let _ = writeln!(out, "         - {n}");
                }
            }
            let _ = writeln!(
                out,
                "{} passed, {} failed, {} flagged",
                report.count(Status::Pass),
                report.count(Status::Fail),
                report.count(Status::Flagged)
            );
            Ok(out)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_fixtures_parse() {
        let cases = parse_fixtures(BUILTIN_FIXTURES).unwrap();
        assert!(cases.len() > 100);
        assert!(cases.iter().any(|c| c.is_flagged()));
    }

    #[test]
    fn smith_padding() {
        let c: Vec<BigInt> = [1, 1, 4, 8].iter().map(|&d| BigInt::from(d)).collect();
        assert!(smith_matches(&c, &[4, 8]));
        assert!(smith_matches(&c, &[1, 1, 1, 4, 8]));
        assert!(!smith_matches(&c, &[2, 16]));
    }

    #[test]
    fn empty_report() {
        let r = Report::default();
        assert_eq!(r.exit_code(), 0);
        let text = emit_report(&r, Format::Json).unwrap();
        assert_eq!(serde_json::from_str::<Report>(&text).unwrap(), r);
    }

    #[test]
    fn duplicate_ids_rejected() {
        let one = r#"{"id":"x","group":"z2","base":"Z2","spec":{"kind":"identity"},"expect_det":4}"#;
        assert!(parse_fixtures(&format!("[{one},{one}]")).is_err());
        assert!(parse_fixtures(&format!("[{one}]")).is_ok());
    }

    #[test]
    fn rot90_case_passes() {
        let cases = parse_fixtures(BUILTIN_FIXTURES).unwrap();
        let case = cases.iter().find(|c| c.id == "Z2.rot90").unwrap();
        let e = run_fixture(case);
        assert_eq!(e.status, Status::Pass, "{:?}", e.notes);
    }
}
