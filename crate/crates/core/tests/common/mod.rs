#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::Path;

use sizeprobe::config::CampaignConfig;
use sizeprobe::model::{Channel, CompilerSpec, Strategy};
use sizeprobe::mutation::StubRule;

pub fn fixture(name: &str) -> String {
    format!("{}/fixtures/{name}", env!("CARGO_MANIFEST_DIR"))
}

/// A scripted compiler; `opts` are fakecc.sh `key=value` options.
pub fn fake(id: &str, family: &str, opts: &str) -> CompilerSpec {
    CompilerSpec {
        id: id.into(),
        family: family.into(),
        invocation: format!("{} {opts} -- {{flags}} {{input}} {{output}}", fixture("fakecc.sh")),
        version_label: String::new(),
        channel: Channel::Release,
        size_opt_flag: "-Oz".into(),
        perf_opt_flag: "-O3".into(),
        other_flags: vec![],
        languages: vec![],
        object_invocation: None,
    }
}

/// Rules under which every instruction adds exactly one statement line.
pub fn one_line_rules() -> BTreeMap<String, StubRule> {
    let mut r = BTreeMap::new();
    r.insert("cond-complicate".into(), StubRule::Insert { line: "{arg} += {n};".into(), invalid_from: None });
    r.insert("cond-dead-complicate".into(), StubRule::Insert { line: "if (0) { {arg} -= {n}; }".into(), invalid_from: None });
    r
}

pub fn campaign(strategy: Strategy, compilers: Vec<CompilerSpec>, workdir: &Path) -> CampaignConfig {
    let mut cfg = CampaignConfig {
        strategy: Some(strategy),
        compilers,
        seed: 42,
        episodes: Some(1),
        workdir: workdir.to_path_buf(),
        ..Default::default()
    };
    cfg.provider.stub_rules = one_line_rules();
    cfg.filters.sanitizers = false;
    cfg
}

/// Figure-1 shaped pair: equal until six statement lines, then B is 9 larger.
pub fn figure_one_pair() -> Vec<CompilerSpec> {
    vec![fake("cc-a", "a", "base=5 per=4"), fake("cc-b", "b", "base=5 per=4 inflate_by=9 inflate_after=6")]
}
