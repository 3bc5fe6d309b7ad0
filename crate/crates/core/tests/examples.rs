//! Every example runs to completion, and the bundled fixture files are
//! exactly what the generator produces.

macro_rules! example {
    ($name:ident, $path:literal) => {
        #[allow(dead_code)]
        #[path = $path]
        mod $name;

        #[test]
        fn $name() {
            let dir = tempfile::tempdir().unwrap();
            $name::run_example(dir.path()).unwrap();
        }
    };
}

example!(make_fixture, "../examples/make_fixture.rs");
example!(synth_store, "../examples/synth_store.rs");
example!(word_probe, "../examples/word_probe.rs");
example!(sentence_probe, "../examples/sentence_probe.rs");
example!(control_task, "../examples/control_task.rs");
example!(complexity_sweep, "../examples/complexity_sweep.rs");
example!(metrics_and_svd, "../examples/metrics_and_svd.rs");
example!(report_export, "../examples/report_export.rs");

#[test]
fn bundled_fixture_matches_generator() {
    use altprobe::datasets::fixture::{table_one_corpus, FIXTURE_SEED};
    let (lava, fava) = table_one_corpus(FIXTURE_SEED);
    let data = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    assert_eq!(std::fs::read_to_string(data.join("lava_fixture.tsv")).unwrap(), lava.to_tsv());
    assert_eq!(std::fs::read_to_string(data.join("fava_fixture.tsv")).unwrap(), fava.to_tsv());
}
