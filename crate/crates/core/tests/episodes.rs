mod common;

use std::collections::BTreeMap;

use common::{campaign, fake, figure_one_pair};
use sizeprobe::model::{Channel, FilterKind, FilterStatus, Fraction, Strategy};
use sizeprobe::mutation::StubRule;
use sizeprobe::session::{run_campaign, EpisodeEnd};
use sizeprobe::Error;

#[test]
fn figure_one_multi_compiler_fires_at_step_five() {
    let work = tempfile::tempdir().unwrap();
    let mut cfg = campaign(Strategy::MultiCompiler, figure_one_pair(), work.path());
    cfg.filters.sanitizers = true;
    let res = run_campaign(&cfg, None).unwrap();
    let ep = &res.records[0];
    assert_eq!(ep.end, EpisodeEnd::Violation);
    assert_eq!(ep.steps, 5);
    let a: Vec<u64> = ep.records.iter().map(|r| r.sizes["cc-a -Oz"]).collect();
    let b: Vec<u64> = ep.records.iter().map(|r| r.sizes["cc-b -Oz"]).collect();
    assert_eq!(a, [9, 13, 17, 21, 25]);
    assert_eq!(b, [9, 13, 17, 21, 34]);
    assert!(ep.records[..4].iter().all(|r| r.candidate.is_none()));

    let (_, report) = &res.reports[0];
    assert_eq!(report.ratio, Fraction::new(34, 25));
    assert_eq!(report.offender.compiler_id, "cc-b");
    assert_eq!(report.baseline.size, 25);
    let status: BTreeMap<FilterKind, FilterStatus> = report.filter_evidence.iter().map(|r| (r.filter, r.status)).collect();
    assert_eq!(status[&FilterKind::MonotonicSize], FilterStatus::Pass);
    assert_ne!(status[&FilterKind::Sanitizer], FilterStatus::Reject);
    assert!(res.dir.join("reports/ep-000000.json").exists());
    assert!(res.dir.join("reports/ep-000000.repro.sh").exists());
    assert!(res.dir.join("ep-000000/step-5/cc-b/asm-Oz.s").exists());
}

#[test]
fn agreeing_compilers_exhaust_the_step_budget() {
    let work = tempfile::tempdir().unwrap();
    let pair = vec![fake("cc-a", "a", ""), fake("cc-b", "b", "")];
    let res = run_campaign(&campaign(Strategy::MultiCompiler, pair, work.path()), None).unwrap();
    assert_eq!(res.records[0].end, EpisodeEnd::ExhaustedSteps);
    assert_eq!(res.records[0].steps, 10);
    assert_eq!(res.records[0].lineage.len(), 10);
    assert!(res.reports.is_empty());
}

#[test]
fn invalid_code_at_step_three_is_a_compile_failure() {
    let work = tempfile::tempdir().unwrap();
    let mut cfg = campaign(Strategy::MultiCompiler, vec![fake("cc-a", "a", ""), fake("cc-b", "b", "")], work.path());
    for id in sizeprobe::catalog::default_catalog().into_iter().map(|i| i.id) {
        cfg.provider.stub_rules.insert(id, StubRule::Insert { line: "{arg} += {n};".into(), invalid_from: Some(3) });
    }
    let res = run_campaign(&cfg, None).unwrap();
    let ep = &res.records[0];
    assert_eq!(ep.end, EpisodeEnd::CompileFailure);
    assert_eq!(ep.steps, 3);
    assert!(ep.records[2].note.as_deref().unwrap().contains("error"));
    assert_eq!(res.summary.stats.compilable, 0);
    assert_eq!(res.summary.stats.total_programs, 1);
}

#[test]
fn single_compiler_gating() {
    let work = tempfile::tempdir().unwrap();
    let mut trunk = fake("cc-trunk", "cc", "");
    trunk.channel = Channel::Trunk;
    // A released version failing only skips the step.
    let released = fake("cc-13", "cc", "fail_after=3");
    let res = run_campaign(&campaign(Strategy::SingleCompiler, vec![released, trunk.clone()], work.path()), None).unwrap();
    let ep = &res.records[0];
    assert_eq!(ep.end, EpisodeEnd::ExhaustedSteps);
    assert!(ep.records[1].note.as_deref().unwrap().starts_with("step skipped"));

    // Trunk failing ends the episode.
    let work = tempfile::tempdir().unwrap();
    let mut bad_trunk = fake("cc-trunk", "cc", "fail_after=4");
    bad_trunk.channel = Channel::Trunk;
    let res = run_campaign(&campaign(Strategy::SingleCompiler, vec![fake("cc-13", "cc", ""), bad_trunk], work.path()), None).unwrap();
    assert_eq!(res.records[0].end, EpisodeEnd::CompileFailure);
    assert_eq!(res.records[0].steps, 3);
}

#[test]
fn trunk_regression_is_reported() {
    let work = tempfile::tempdir().unwrap();
    let mut trunk = fake("cc-trunk", "cc", "inflate_by=1 inflate_after=3");
    trunk.channel = Channel::Trunk;
    let res = run_campaign(&campaign(Strategy::SingleCompiler, vec![fake("cc-13", "cc", ""), fake("cc-12", "cc", ""), trunk], work.path()), None).unwrap();
    assert_eq!(res.records[0].end, EpisodeEnd::Violation);
    assert_eq!(res.records[0].steps, 2);
    assert_eq!(res.reports[0].1.offender.compiler_id, "cc-trunk");
    assert_eq!(res.reports[0].1.baseline.compiler_id, "cc-12");
}

#[test]
fn pipeline_flags_diverging() {
    let work = tempfile::tempdir().unwrap();
    let cc = fake("cc", "cc", "inflate_by=2 inflate_flag=-Oz inflate_after=4");
    let res = run_campaign(&campaign(Strategy::Pipeline, vec![cc], work.path()), None).unwrap();
    let ep = &res.records[0];
    assert_eq!(ep.end, EpisodeEnd::Violation);
    assert_eq!(ep.steps, 3);
    // 5 + 4*3 + 2 = 19 against 17: 19*20 > 17*21
    assert_eq!(res.reports[0].1.ratio, Fraction::new(19, 17));
}

#[test]
fn size_drop_is_rejected_and_the_episode_continues() {
    let work = tempfile::tempdir().unwrap();
    let pair = vec![fake("cc-a", "a", "base=20 per=1"), fake("cc-b", "b", "base=20 per=1 inflate_by=-15 inflate_after=3")];
    let res = run_campaign(&campaign(Strategy::MultiCompiler, pair, work.path()), None).unwrap();
    let ep = &res.records[0];
    assert_eq!(ep.end, EpisodeEnd::ExhaustedSteps);
    let rejected = ep.records.iter().filter(|r| {
        r.filter_evidence.iter().any(|f| f.filter == FilterKind::MonotonicSize && f.status == FilterStatus::Reject)
    });
    assert_eq!(rejected.count(), 9);
    assert_eq!(res.summary.filter_health.candidates, 9);
}

#[test]
fn dead_code_with_coverage_filter() {
    if sizeprobe::toolchain::resolve_program("gcov").is_none() {
        return;
    }
    // Every dead insertion grows the scripted output; gcov confirms the
    // inserted statements never run.
    let work = tempfile::tempdir().unwrap();
    let cc = fake("cc", "cc", "inflate_by=1 inflate_after=2");
    let res = run_campaign(&campaign(Strategy::DeadCode, vec![cc.clone()], work.path()), None).unwrap();
    let ep = &res.records[0];
    assert_eq!(ep.end, EpisodeEnd::Violation, "{:#?}", ep.records);
    assert_eq!(ep.steps, 1);
    let ev = &res.reports[0].1.filter_evidence;
    assert!(ev.iter().any(|f| f.filter == FilterKind::DeadCode && f.status == FilterStatus::Pass), "{ev:?}");

    // A "dead" loop that actually runs is caught.
    let work = tempfile::tempdir().unwrap();
    let mut cfg = campaign(Strategy::DeadCode, vec![cc], work.path());
    for id in sizeprobe::catalog::DEAD_INSTRUCTION_IDS {
        cfg.provider.stub_rules.insert(
            id.to_string(),
            StubRule::Insert { line: "for (int i{n} = 0; i{n} < 2; i{n}++) { {arg} += 1; {arg} -= 1; }".into(), invalid_from: None },
        );
    }
    cfg.max_steps = 3;
    let res = run_campaign(&cfg, None).unwrap();
    let ep = &res.records[0];
    assert_eq!(ep.end, EpisodeEnd::ExhaustedSteps);
    assert!(ep.records.iter().all(|r| r
        .filter_evidence
        .iter()
        .any(|f| f.filter == FilterKind::DeadCode && f.status == FilterStatus::Reject)));
}

#[test]
fn unreachable_provider_episodes_are_not_counted() {
    let work = tempfile::tempdir().unwrap();
    let port = std::net::TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port();
    let mut cfg = campaign(Strategy::MultiCompiler, figure_one_pair(), work.path());
    cfg.provider.kind = sizeprobe::mutation::ProviderKind::Remote;
    cfg.provider.endpoint = Some(format!("http://127.0.0.1:{port}/v1/chat/completions"));
    cfg.provider.model = Some("m".into());
    cfg.provider.backoff_ms = 1;
    cfg.episodes = Some(2);
    let res = run_campaign(&cfg, None).unwrap();
    assert!(res.records.iter().all(|r| r.end == EpisodeEnd::ProviderFailure && r.steps == 0));
    assert_eq!(res.summary.stats.total_programs, 0);
}

#[test]
fn seed_that_fails_to_compile_stops_the_campaign() {
    let work = tempfile::tempdir().unwrap();
    let pair = vec![fake("cc-a", "a", "fail_after=1"), fake("cc-b", "b", "")];
    let err = run_campaign(&campaign(Strategy::MultiCompiler, pair, work.path()), None).err().unwrap();
    assert!(matches!(err, Error::SeedDoesNotCompile { ref compiler_id, .. } if compiler_id == "cc-a"), "{err}");
}

#[test]
fn compile_timeout_ends_the_episode() {
    let work = tempfile::tempdir().unwrap();
    let mut cfg = campaign(Strategy::MultiCompiler, vec![fake("cc-a", "a", ""), fake("cc-b", "b", "")], work.path());
    // The seed compiles; from the first mutant on cc-b hangs.
    cfg.compilers[1].invocation = format!(
        "sh -c 'n=$(grep -c \";\" \"$1\"); [ \"$n\" -gt 1 ] && sleep 5; exec {} -- \"$2\" \"$1\" \"$3\"' _ {{input}} {{flags}} {{output}}",
        common::fixture("fakecc.sh")
    );
    cfg.toolchain.compile_timeout_secs = 1.0;
    let res = run_campaign(&cfg, None).unwrap();
    assert_eq!(res.records[0].end, EpisodeEnd::CompileFailure);
    assert_eq!(res.records[0].steps, 1);
    assert!(res.records[0].records[0].note.as_deref().unwrap().contains("timeout"));
}

#[test]
fn worker_count_does_not_change_results() {
    let run = |jobs| {
        let work = tempfile::tempdir().unwrap();
        let mut cfg = campaign(Strategy::MultiCompiler, figure_one_pair(), work.path());
        cfg.episodes = Some(6);
        cfg.jobs = jobs;
        let res = run_campaign(&cfg, None).unwrap();
        std::fs::read_to_string(res.dir.join("summary.json")).unwrap()
    };
    assert_eq!(run(1), run(3));
}
