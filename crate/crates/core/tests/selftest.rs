use moore_core::selftest::{run_all, SUITES};

#[test]
fn every_suite_passes_and_is_reproducible() {
    let first = run_all(7);
    assert_eq!(first.len(), SUITES.len());
    for o in &first {
        assert!(o.passed, "suite {} ({}): {}", o.id, o.name, o.detail);
    }
    let again: Vec<_> = run_all(7).into_iter().map(|o| o.detail).collect();
    let details: Vec<_> = first.into_iter().map(|o| o.detail).collect();
    assert_eq!(details, again);
}
