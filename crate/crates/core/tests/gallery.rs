use difflab::gallery::{run_gallery, Gallery};
use difflab::ProbeConfig;

#[test]
fn verdicts_are_reproducible() {
    let g = Gallery::builtin();
    let first = run_gallery(&g, &ProbeConfig::default()).unwrap();
    assert!(first.all_met);
    for _ in 0..3 {
        let again = run_gallery(&g, &ProbeConfig::default()).unwrap();
        assert_eq!(
            serde_json::to_string(&again).unwrap(),
            serde_json::to_string(&first).unwrap()
        );
    }
}

#[test]
fn verdicts_do_not_depend_on_the_seed() {
    let g = Gallery::builtin();
    let base: Vec<_> = run_gallery(&g, &ProbeConfig::default())
        .unwrap()
        .records
        .into_iter()
        .map(|r| r.observed.status)
        .collect();
    for seed in [0, 1, 7, 12345] {
        let cfg = ProbeConfig {
            seed,
            ..ProbeConfig::default()
        };
        let obs: Vec<_> = run_gallery(&g, &cfg)
            .unwrap()
            .records
            .into_iter()
            .map(|r| r.observed.status)
            .collect();
        assert_eq!(obs, base, "seed {seed}");
    }
}

#[test]
fn disputed_claims_carry_a_note() {
    for e in &Gallery::builtin().entries {
        for c in e.claims.iter().filter(|c| c.disputed) {
            assert!(!c.note.is_empty(), "{}/{}", e.name, c.id);
        }
    }
}
