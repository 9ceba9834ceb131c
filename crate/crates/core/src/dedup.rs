//! Fingerprinting violations across releases, finding the culprit revision,
//! and grouping violations that share a root cause.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{CompilerSpec, ViolationSignature};
use crate::toolchain::{run_shell, shell_quote};

/// Result of re-running a violation's check with one compiler swapped in.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Exhibit {
    Triggers,
    Clean,
    CompileFailed(String),
}

/// Re-checks a violation with `compiler` in place of its offender.
pub trait Recheck {
    fn recheck(&self, compiler: &CompilerSpec) -> Result<Exhibit>;
}

impl<F: Fn(&CompilerSpec) -> Result<Exhibit>> Recheck for F {
    fn recheck(&self, compiler: &CompilerSpec) -> Result<Exhibit> {
        self(compiler)
    }
}

/// Re-checks the violation against each release, oldest first.
pub fn release_screen(recheck: &dyn Recheck, matrix: &[CompilerSpec]) -> Result<ViolationSignature> {
    let mut exhibits = Vec::with_capacity(matrix.len());
    let mut annotations = BTreeMap::new();
    for spec in matrix {
        let exhibit = match recheck.recheck(spec) {
            Err(e @ (Error::ToolchainMissing { .. } | Error::CompileTimeout { .. })) => Exhibit::CompileFailed(e.to_string()),
            other => other?,
        };
        exhibits.push(match exhibit {
            Exhibit::Triggers => true,
            Exhibit::Clean => false,
            Exhibit::CompileFailed(msg) => {
                annotations.insert(spec.id.clone(), format!("compile failure: {}", msg.lines().next().unwrap_or("")));
                false
            }
        });
    }
    let mut sig = ViolationSignature::new(matrix.iter().map(|c| c.id.clone()).collect(), exhibits);
    sig.annotations = annotations;
    Ok(sig)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BisectOutcome {
    pub culprit: String,
    pub culprit_index: usize,
    /// Probes spent inside the range after the endpoints were confirmed.
    pub search_probes: usize,
    /// Probes spent confirming the range starts clean and ends triggering.
    pub endpoint_probes: usize,
    /// Revisions the provider could not supply.
    pub skipped: Vec<String>,
}

impl BisectOutcome {
    pub fn total_probes(&self) -> usize {
        self.search_probes + self.endpoint_probes
    }
}

/// Finds the first revision where `probe` reports the violation.
///
/// `probe` returns `None` when a revision is unavailable; such revisions are
/// skipped. The range must start clean and end triggering.
pub fn bisect<F>(revisions: &[String], mut probe: F) -> Result<BisectOutcome>
where
    F: FnMut(&str) -> Result<Option<bool>>,
{
    let mut skipped = Vec::new();
    let mut endpoint_probes = 0;
    let mut lo = None;
    for (i, r) in revisions.iter().enumerate() {
        endpoint_probes += 1;
        match probe(r)? {
            Some(false) => {
                lo = Some(i);
                break;
            }
            Some(true) => return Err(Error::NotBisectable(format!("violation already present at first revision {r}"))),
            None => skipped.push(r.clone()),
        }
    }
    let lo = lo.ok_or_else(|| Error::NotBisectable("no revision in range is available".into()))?;
    let mut hi = None;
    for (i, r) in revisions.iter().enumerate().rev().take_while(|(i, _)| *i > lo) {
        endpoint_probes += 1;
        match probe(r)? {
            Some(true) => {
                hi = Some(i);
                break;
            }
            Some(false) => return Err(Error::NotBisectable(format!("violation absent at last revision {r}"))),
            None => skipped.push(r.clone()),
        }
    }
    let mut hi = hi.ok_or_else(|| Error::NotBisectable("no triggering revision available after the start".into()))?;
    let mut lo = lo;
    let mut open: Vec<usize> = (lo + 1..hi).collect();
    let mut search_probes = 0;
    while !open.is_empty() {
        let mid = open[open.len() / 2];
        search_probes += 1;
        match probe(&revisions[mid])? {
            Some(true) => hi = mid,
            Some(false) => lo = mid,
            None => skipped.push(revisions[mid].clone()),
        }
        open.retain(|i| *i > lo && *i < hi && *i != mid);
    }
    Ok(BisectOutcome { culprit: revisions[hi].clone(), culprit_index: hi, search_probes, endpoint_probes, skipped })
}

/// Maps a revision id to a compiler installation by running
/// `<command> <revision>`, which prints the compiler path. A nonzero exit
/// means the revision is unavailable.
#[derive(Debug, Clone)]
pub struct CommandRevisionProvider {
    pub command: String,
    pub cwd: PathBuf,
    pub timeout: Duration,
}

impl CommandRevisionProvider {
    pub fn new(command: impl Into<String>) -> Self {
        CommandRevisionProvider {
            command: command.into(),
            cwd: PathBuf::from("."),
            timeout: Duration::from_secs(600),
        }
    }

    pub fn compiler_path(&self, revision: &str) -> Result<Option<String>> {
        let run = run_shell(&format!("{} {}", self.command, shell_quote(revision)), &self.cwd, self.timeout)?;
        let path = run.stdout.lines().map(str::trim).rfind(|l| !l.is_empty()).map(String::from);
        if !run.success() || path.is_none() {
            log::warn!("revision {revision} unavailable: {}", run.stderr.trim());
            return Ok(None);
        }
        Ok(path)
    }

    /// `base` with the program of its invocation replaced by the revision's
    /// compiler.
    pub fn compiler_at(&self, base: &CompilerSpec, revision: &str) -> Result<Option<CompilerSpec>> {
        let Some(path) = self.compiler_path(revision)? else { return Ok(None) };
        let rest = base.invocation.trim_start().split_once(char::is_whitespace).map_or("", |(_, r)| r);
        let mut spec = base.clone();
        spec.id = format!("{}@{revision}", base.family());
        spec.version_label = revision.to_string();
        spec.invocation = format!("{} {rest}", shell_quote(&path));
        Ok(Some(spec))
    }
}

/// Bisects `revisions` by substituting each revision's compiler into
/// `base` and re-checking; a compile failure counts as unavailable.
pub fn bisect_with_provider(
    revisions: &[String],
    provider: &CommandRevisionProvider,
    base: &CompilerSpec,
    recheck: &dyn Recheck,
) -> Result<BisectOutcome> {
    bisect(revisions, |rev| {
        let Some(spec) = provider.compiler_at(base, rev)? else { return Ok(None) };
        Ok(match recheck.recheck(&spec)? {
            Exhibit::Triggers => Some(true),
            Exhibit::Clean => Some(false),
            Exhibit::CompileFailed(msg) => {
                log::warn!("revision {rev} failed to compile the test case: {msg}");
                None
            }
        })
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DuplicateGroups {
    /// Indices into the input, each group sorted, groups ordered by first member.
    pub groups: Vec<Vec<usize>>,
    /// Groups whose members reproduce on no release.
    pub trunk_only: Vec<usize>,
    /// Pairs from different groups whose exhibit sets overlap without being equal.
    pub possibly_related: Vec<(usize, usize)>,
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// Groups signatures by equal exhibit vectors or equal culprit revision,
/// closed transitively.
pub fn group_duplicates(signatures: &[ViolationSignature]) -> DuplicateGroups {
    let n = signatures.len();
    let mut parent: Vec<usize> = (0..n).collect();
    for i in 0..n {
        for j in i + 1..n {
            if signatures[i].is_duplicate_of(&signatures[j]) {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut by_root: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..n {
        let r = find(&mut parent, i);
        by_root.entry(r).or_default().push(i);
    }
    let groups: Vec<Vec<usize>> = by_root.into_values().collect();
    let group_of: Vec<usize> = {
        let mut g = vec![0; n];
        for (k, members) in groups.iter().enumerate() {
            for m in members {
                g[*m] = k;
            }
        }
        g
    };
    let trunk_only =
        (0..groups.len()).filter(|k| groups[*k].iter().all(|m| signatures[*m].is_trunk_only())).collect();
    let mut possibly_related = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if group_of[i] != group_of[j] && signatures[i].overlaps(&signatures[j]) {
                possibly_related.push((i, j));
            }
        }
    }
    DuplicateGroups { groups, trunk_only, possibly_related }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn revs(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("r{i}")).collect()
    }

    fn idx(r: &str) -> usize {
        r[1..].parse().unwrap()
    }

    #[test]
    fn bisect_sixteen_flipping_at_nine() {
        let r = revs(16);
        let out = bisect(&r, |rev| Ok(Some(idx(rev) >= 9))).unwrap();
        assert_eq!(out.culprit, "r9");
        assert!(out.search_probes <= 5, "{out:?}");
        assert_eq!(out.endpoint_probes, 2);
    }

    #[test]
    fn bisect_boundaries_and_preconditions() {
        let r = revs(8);
        assert_eq!(bisect(&r, |rev| Ok(Some(idx(rev) >= 1))).unwrap().culprit, "r1");
        assert_eq!(bisect(&r, |rev| Ok(Some(idx(rev) >= 7))).unwrap().culprit, "r7");
        assert!(matches!(bisect(&r, |_| Ok(Some(false))), Err(Error::NotBisectable(_))));
        assert!(matches!(bisect(&r, |_| Ok(Some(true))), Err(Error::NotBisectable(_))));
    }

    #[test]
    fn bisect_skips_unavailable_revisions() {
        let r = revs(20);
        let out = bisect(&r, |rev| Ok(if idx(rev) % 3 == 1 { None } else { Some(idx(rev) >= 11) })).unwrap();
        assert_eq!(out.culprit, "r11");
        let out = bisect(&r, |rev| Ok(if idx(rev) == 10 { None } else { Some(idx(rev) >= 10) })).unwrap();
        assert_eq!(out.culprit, "r11");
        assert!(out.skipped.contains(&"r10".to_string()));
    }

    #[test]
    fn screen_records_compile_failures() {
        let spec = |id: &str| CompilerSpec {
            id: id.into(),
            family: "gcc".into(),
            invocation: "gcc {input} -o {output}".into(),
            version_label: id.into(),
            channel: Default::default(),
            size_opt_flag: "-Os".into(),
            perf_opt_flag: "-O3".into(),
            other_flags: vec![],
            languages: vec![],
            object_invocation: None,
        };
        let matrix = [spec("12"), spec("13"), spec("14"), spec("trunk")];
        let check = |c: &CompilerSpec| {
            Ok(match c.id.as_str() {
                "12" => Exhibit::CompileFailed("error: old".into()),
                "13" => Exhibit::Clean,
                _ => Exhibit::Triggers,
            })
        };
        let sig = release_screen(&check, &matrix).unwrap();
        assert_eq!(sig.exhibits, vec![false, false, true, true]);
        assert!(sig.annotations["12"].contains("compile failure"));
    }

    #[test]
    fn grouping() {
        let ids = || vec!["12".to_string(), "13".into(), "14".into()];
        let a = ViolationSignature::new(ids(), vec![false, true, true]);
        let b = ViolationSignature::new(ids(), vec![false, true, true]);
        let c = ViolationSignature::new(ids(), vec![true, true, true]);
        let mut d = ViolationSignature::new(ids(), vec![false, false, false]);
        let mut e = ViolationSignature::new(ids(), vec![true, false, false]);
        d.culprit_revision = Some("abc".into());
        e.culprit_revision = Some("abc".into());
        let g = group_duplicates(&[a, b, c, d, e]);
        assert_eq!(g.groups, vec![vec![0, 1], vec![2], vec![3, 4]]);
        assert!(g.trunk_only.is_empty());
        assert!(g.possibly_related.contains(&(0, 2)));
    }
}
