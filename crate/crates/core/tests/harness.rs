use latkit::catalog;
use latkit::glue;
use latkit::harness::{self, Format, Report, Status};
use latkit::isometry::Isometry;
use latkit::linalg::rat;
use latkit::pair_sum;

fn fixtures() -> Vec<harness::FixtureCase> {
    harness::load_fixtures().unwrap()
}

#[test]
fn every_id_once_and_sorted() {
    let cases = fixtures();
    let report = harness::run_fixtures(&harness::select(&cases, "z2").unwrap(), Some(2));
    let ids: Vec<&str> = report.cases.iter().map(|c| c.id.as_str()).collect();
    let mut sorted = ids.clone();
    sorted.sort_unstable();
    sorted.dedup();
    assert_eq!(ids, sorted);
    assert_eq!(ids.len(), 5);
}

#[test]
fn reports_are_deterministic_and_round_trip() {
    let cases = harness::select(&fixtures(), "a2").unwrap();
    let a = harness::run_fixtures(&cases, Some(1));
    let b = harness::run_fixtures(&cases, Some(4));
    assert_eq!(a, b);
    let text = harness::emit_report(&a, Format::Json).unwrap();
    assert_eq!(serde_json::from_str::<Report>(&text).unwrap(), a);
}

#[test]
fn a3_section_has_ten_passing_entries() {
    let report = harness::run_fixtures(&harness::select(&fixtures(), "a3").unwrap(), None);
    assert_eq!(report.cases.len(), 10);
    for c in &report.cases {
        let expected = if c.id == "A3.neg_4cycle" { Status::Flagged } else { Status::Pass };
        assert_eq!(c.status, expected, "{}: {:?}", c.id, c.notes);
    }
    assert_eq!(report.exit_code(), 0);
}

#[test]
fn flagged_entry_carries_both_invariant_sets() {
    let report = harness::run_fixtures(&harness::select(&fixtures(), "a3").unwrap(), None);
    let e = report.entry("A3.neg_4cycle").unwrap();
    assert_eq!(e.status, Status::Flagged);
    assert_eq!(e.computed.det.as_ref().unwrap().0, rat(32));
    assert_eq!(e.expected.det.as_ref().unwrap().0, rat(32));
    assert!(e.notes.iter().any(|n| n.contains("not symmetric")));
    let text = harness::emit_report(&report, Format::Text).unwrap();
    assert!(text.contains("FLAGGED  A3.neg_4cycle"));
}

#[test]
fn recorded_mismatch_fails_unflagged_case() {
    let mut cases = harness::select(&fixtures(), "z2").unwrap();
    let rot = cases.iter_mut().find(|c| c.id == "Z2.rot90").unwrap();
    rot.expect_det = 8;
    let e = harness::run_fixture(rot);
    assert_eq!(e.status, Status::Fail);
    assert!(e.notes.iter().any(|n| n.contains("det 4, expected 8")));
    rot.flags.insert(harness::TYPO_FLAG.to_string());
    assert_eq!(harness::run_fixture(rot).status, Status::Flagged);
}

#[test]
fn construction_errors_are_failures() {
    let mut case = harness::select(&fixtures(), "z2").unwrap().remove(0);
    case.base = "Q9".into();
    let e = harness::run_fixture(&case);
    assert_eq!(e.status, Status::Fail);
    assert!(e.notes[0].starts_with("error:"));
}

#[test]
fn malformed_fixture_files_are_rejected() {
    let bad_group = r#"[{"id":"x","group":"e8","base":"Z2","spec":{"kind":"identity"},"expect_det":4}]"#;
    assert!(harness::parse_fixtures(bad_group).is_err());
    let bad_smith = r#"[{"id":"x","group":"z2","base":"Z2","spec":{"kind":"identity"},"expect_det":4,"expect_smith":[2,4]}]"#;
    assert!(harness::parse_fixtures(bad_smith).is_err());
}

#[test]
fn section_filter() {
    let cases = fixtures();
    assert_eq!(harness::select(&cases, "all").unwrap().len(), cases.len());
    assert!(harness::select(&cases, "e8").is_err());
    let total: usize = harness::GROUPS.iter().map(|g| harness::select(&cases, g).unwrap().len()).sum();
    assert_eq!(total, cases.len());
}

#[test]
fn theorem_suites_pass() {
    let cases = harness::select(&fixtures(), "z2").unwrap();
    let opts = harness::SuiteOptions { conjugations_per_case: 3, ..Default::default() };
    let report = harness::run_theorem_suites(&cases, opts);
    for c in &report.cases {
        assert_eq!(c.status, Status::Pass, "{}: {:?}", c.id, c.notes);
    }
    assert!(report.entry("suite.ncycle.n4").is_some());
    assert!(report.entry("suite.a2_tensor.D4").is_some());
}

/// An even `K` whose discriminant is an elementary 2-group of rank ≥ 2 with
/// no integer-norm coset has no integral overlattice of index 2.
#[test]
fn two_group_obstruction_on_small_fixtures() {
    let mut checked = 0;
    for c in fixtures() {
        if c.expect_det > 64 {
            continue;
        }
        let l = catalog::parse(&c.base).unwrap();
        let k = pair_sum(&l, &Isometry::from_spec(&l, &c.spec).unwrap()).unwrap().k;
        let d = k.discriminant_group().unwrap();
        if !k.is_even() || d.orders.len() < 2 || !glue::is_elementary_two_group(&k).unwrap() {
            continue;
        }
        let integer = glue::integer_norm_cosets(&k).unwrap();
        let found = glue::integral_overlattice_search(&k, 2).unwrap();
        if integer.is_empty() {
            assert!(found.is_empty(), "{}", c.id);
        }
        assert_eq!(found.len(), integer.len(), "{}", c.id);
        checked += 1;
    }
    assert!(checked > 0);
}
