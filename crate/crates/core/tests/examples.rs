macro_rules! example {
    ($name:ident, $file:literal) => {
        #[allow(dead_code)]
        mod $name {
            include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/", $file));
        }

        #[test]
        fn $name() {
            $name::run_example().expect(concat!($file, " should run"));
        }
    };
}

example!(threshold_check, "threshold_check.rs");
example!(mutation_prompt, "mutation_prompt.rs");
example!(compile_and_measure, "compile_and_measure.rs");
example!(strategy_checks, "strategy_checks.rs");
example!(coverage_filter, "coverage_filter.rs");
example!(bisect_and_group, "bisect_and_group.rs");
example!(stub_campaign, "stub_campaign.rs");
example!(verify_report, "verify_report.rs");
example!(release_screen, "release_screen.rs");
example!(regression_corpus, "regression_corpus.rs");
example!(remote_provider, "remote_provider.rs");
example!(config_layers, "config_layers.rs");
