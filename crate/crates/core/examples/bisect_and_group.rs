// Bisect a revision range with a scripted oracle, then group signatures
// that describe the same underlying problem.

use sizeprobe::dedup::{bisect, group_duplicates};
use sizeprobe::model::ViolationSignature;

pub fn run_example() -> sizeprobe::Result<()> {
    let revisions: Vec<String> = (0..16).map(|i| format!("r{i:02}")).collect();
    let mut probed = Vec::new();
    let out = bisect(&revisions, |rev| {
        probed.push(rev.to_string());
        let n: usize = rev[1..].parse().expect("numeric revision");
        Ok(if n == 4 { None } else { Some(n >= 9) })
    })?;
    println!("first bad {} after {} probes: {}", out.culprit, out.total_probes(), probed.join(" "));

    let ids = |v: &[&str]| v.iter().map(|s| s.to_string()).collect::<Vec<_>>();
    let versions = ids(&["13", "14", "trunk"]);
    let mut sigs = vec![
        ViolationSignature::new(versions.clone(), vec![false, true, true]),
        ViolationSignature::new(versions.clone(), vec![false, true, true]),
        ViolationSignature::new(versions.clone(), vec![false, false, true]),
        ViolationSignature::new(versions, vec![false, false, true]),
    ];
    sigs[2].culprit_revision = Some("r09".into());
    sigs[0].culprit_revision = Some("r09".into());
    let groups = group_duplicates(&sigs);
    println!("groups {:?}, trunk only {:?}", groups.groups, groups.trunk_only);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
