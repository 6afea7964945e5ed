use hazardbench::data::{
    generate_synthetic, impute, load_csv, split, write_dataset_csv, GeneratorSpec, ImputeStrategy,
};
use hazardbench::rng;
use rand::Rng;

/// Random rectangular numeric CSV with blanks sprinkled in covariates.
fn random_csv(seed: u64) -> (String, usize) {
    let mut r = rng::seeded(seed);
    let (n, p) = (r.random_range(5..40), r.random_range(1..6));
    let mut s = String::from("time,event");
    for k in 0..p {
        s.push_str(&format!(",v{k}"));
    }
    s.push('\n');
    let mut complete_with_event = 0;
    for _ in 0..n {
        let event = r.random_bool(0.5);
        let mut complete = true;
        s.push_str(&format!("{},{}", r.random_range(0.5..100.0f64), u8::from(event)));
        for _ in 0..p {
            if r.random_bool(0.15) {
                s.push(',');
                complete = false;
            } else {
                s.push_str(&format!(",{}", r.random_range(-5.0..5.0f64)));
            }
        }
        s.push('\n');
        if complete && event {
            complete_with_event += 1;
        }
    }
    (s, complete_with_event)
}

#[test]
fn load_impute_validate_composes() {
    let mut exercised = 0;
    for seed in 0..200 {
        let (csv, usable_events) = random_csv(seed);
        let table = load_csv(csv.as_bytes(), "time", "event").unwrap();
        let result = impute(&table, ImputeStrategy::CaseDeletion).and_then(|t| t.to_dataset());
        if usable_events > 0 {
            let data = result.unwrap_or_else(|e| panic!("seed {seed}: {e}"));
            assert_eq!(data.n_events(), usable_events);
            exercised += 1;
        } else {
            assert!(result.is_err());
        }
    }
    assert!(exercised > 150);
}

#[test]
fn written_cohort_reloads_identically() {
    let cohort = generate_synthetic(&GeneratorSpec {
        n: 200,
        ..GeneratorSpec::readmission_cohort(8)
    })
    .unwrap();
    let mut buf = Vec::new();
    write_dataset_csv(&cohort.dataset, &mut buf, "days", "readmitted").unwrap();
    let back = load_csv(buf.as_slice(), "days", "readmitted").unwrap().to_dataset().unwrap();
    assert_eq!(back, cohort.dataset);
}

#[test]
fn generator_is_reproducible_and_split_preserves_events() {
    let spec = GeneratorSpec::readmission_cohort(21);
    let a = generate_synthetic(&spec).unwrap();
    let b = generate_synthetic(&spec).unwrap();
    assert_eq!(a, b);
    let (tr, va) = split(&a.dataset, 0.8, 21).unwrap();
    assert_eq!(tr.n_events() + va.n_events(), a.dataset.n_events());
    assert_eq!((tr.n_subjects(), va.n_subjects()), (1834, 459));
}
