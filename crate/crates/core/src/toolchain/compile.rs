use std::path::Path;

use super::process::{expand, resolve_program, run_shell, shell_quote};
use super::size::{measure_size, parse_text_bytes};
use super::ToolchainSettings;
use crate::error::{Error, IoContext, Result};
use crate::language::LanguageProfile;
use crate::model::{CompileOutcome, CompilerSpec, SizeMeasurement, SizeMetric, SourceProgram};

/// File-name-safe rendering of a flag string: `-Oz` becomes `Oz`.
pub fn flag_slug(flag: &str) -> String {
    let slug: String = flag
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() { c } else { '_' })
        .collect::<String>()
        .trim_matches('_')
        .to_string();
    if slug.is_empty() {
        "default".into()
    } else {
        slug
    }
}

/// Writes `code` to `<dir>/<stem>.<ext>` and returns the file name.
pub fn write_source(dir: &Path, stem: &str, ext: &str, code: &str) -> Result<String> {
    std::fs::create_dir_all(dir).at(dir)?;
    let name = format!("{stem}.{ext}");
    let path = dir.join(&name);
    std::fs::write(&path, code).at(&path)?;
    Ok(name)
}

fn command_for(template: &str, input: &str, output: &str, flag: &str) -> String {
    let flags = if flag.is_empty() { String::new() } else { shell_quote(flag) };
    let mut cmd = expand(template, &[("input", &shell_quote(input)), ("output", &shell_quote(output)), ("flags", &flags)]);
    if !template.contains("{flags}") && !flags.is_empty() {
        cmd.push(' ');
        cmd.push_str(&flags);
    }
    cmd
}

/// Compiles `program` with `spec` at `opt_flag` inside `dir`, capturing the
/// assembly and measuring its size.
///
/// A nonzero compiler exit is an unsuccessful outcome, not an error; a
/// missing compiler or a timeout is an error.
pub fn compile_to_asm(
    spec: &CompilerSpec,
    opt_flag: &str,
    program: &SourceProgram,
    profile: &LanguageProfile,
    dir: &Path,
    settings: &ToolchainSettings,
) -> Result<CompileOutcome> {
    let program_name = resolve_program(&spec.invocation)
        .ok_or_else(|| Error::ToolchainMissing { program: first_word(&spec.invocation) })?;
    log::trace!("compiling with {}", program_name.display());
    let input = write_source(dir, "mutant", &profile.extension, &program.code)?;
    let slug = flag_slug(opt_flag);
    let asm_name = format!("asm-{slug}.s");
    let asm_path = dir.join(&asm_name);
    let _ = std::fs::remove_file(&asm_path);
    let timeout = settings.compile_timeout();
    let run = run_shell(&command_for(&spec.invocation, &input, &asm_name, opt_flag), dir, timeout)?;
    let wall = run.wall_time.as_secs_f64();
    if run.timed_out {
        return Err(Error::CompileTimeout {
            compiler_id: spec.id.clone(),
            opt_flag: opt_flag.to_string(),
            secs: timeout.as_secs_f64(),
        });
    }
    if !run.success() {
        let diag = if run.stderr.trim().is_empty() { run.stdout } else { run.stderr };
        let diag = if diag.trim().is_empty() { format!("exit status {:?}", run.exit_code) } else { diag };
        return Ok(CompileOutcome::failed(&spec.id, opt_flag, diag, wall));
    }
    let assembly = match std::fs::read_to_string(&asm_path) {
        Ok(a) => a,
        Err(e) => return Ok(CompileOutcome::failed(&spec.id, opt_flag, format!("no assembly written: {e}"), wall)),
    };
    let size = match settings.metric {
        SizeMetric::InstructionCount => measure_size(&assembly),
        SizeMetric::TextSectionBytes => {
            match text_bytes(spec, opt_flag, &input, &slug, dir, settings)? {
                Ok(value) => SizeMeasurement { metric: SizeMetric::TextSectionBytes, value },
                Err(msg) => return Ok(CompileOutcome::failed(&spec.id, opt_flag, msg, wall)),
            }
        }
    };
    Ok(CompileOutcome {
        compiler_id: spec.id.clone(),
        opt_flag: opt_flag.to_string(),
        success: true,
        assembly,
        diagnostics: run.stderr,
        size: Some(size),
        wall_time: wall,
    })
}

fn text_bytes(
    spec: &CompilerSpec,
    opt_flag: &str,
    input: &str,
    slug: &str,
    dir: &Path,
    settings: &ToolchainSettings,
) -> Result<std::result::Result<u64, String>> {
    let template = spec.object_invocation.as_deref().ok_or_else(|| {
        Error::config(format!("compilers.{}.object_invocation", spec.id), "required by the text_section_bytes metric")
    })?;
    let obj = format!("obj-{slug}.o");
    let run = run_shell(&command_for(template, input, &obj, opt_flag), dir, settings.compile_timeout())?;
    if run.timed_out {
        return Err(Error::CompileTimeout {
            compiler_id: spec.id.clone(),
            opt_flag: opt_flag.to_string(),
            secs: settings.compile_timeout_secs,
        });
    }
    if !run.success() {
        return Ok(Err(run.stderr));
    }
    let size_cmd = expand(&settings.size_tool, &[("object", &shell_quote(&obj))]);
    let out = run_shell(&size_cmd, dir, settings.compile_timeout())?;
    Ok(parse_text_bytes(&out.stdout).ok_or_else(|| format!("could not read .text size from `{size_cmd}`")))
}

fn first_word(command: &str) -> String {
    command.split_whitespace().next().unwrap_or("").to_string()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::language::builtin_profile;

    fn spec(invocation: &str) -> CompilerSpec {
        CompilerSpec {
            id: "fake".into(),
            family: String::new(),
            invocation: invocation.into(),
            version_label: String::new(),
            channel: Default::default(),
            size_opt_flag: "-Oz".into(),
            perf_opt_flag: "-O3".into(),
            other_flags: Vec::new(),
            languages: Vec::new(),
            object_invocation: None,
        }
    }

    #[test]
    fn slugs() {
        assert_eq!(flag_slug("-Oz"), "Oz");
        assert_eq!(flag_slug("-O3 -march=native"), "O3__march_native");
        assert_eq!(flag_slug(""), "default");
    }

    #[test]
    fn scripted_compiler_success_and_failure() {
        let dir = tempfile::tempdir().unwrap();
        let c = builtin_profile("c").unwrap();
        let ok = spec("printf 'f:\\n  nop\\n  ret\\n' > {output}; true {input} {flags}");
        let seed = SourceProgram::seed("c", c.seed_code.clone());
        let out = compile_to_asm(&ok, "-Oz", &seed, &c, dir.path(), &Default::default()).unwrap();
        assert!(out.success);
        assert_eq!(out.size_value(), Some(2));
        assert!(dir.path().join("mutant.c").exists());

        let bad = spec("echo 'error: nope' >&2; exit 1; {input} {output}");
        let out = compile_to_asm(&bad, "-Oz", &seed, &c, dir.path(), &Default::default()).unwrap();
        assert!(!out.success);
        assert!(out.diagnostics.contains("nope"));
        assert_eq!(out.size_value(), None);
    }

    #[test]
    fn timeout_and_missing_binary_are_errors() {
        let dir = tempfile::tempdir().unwrap();
        let c = builtin_profile("c").unwrap();
        let seed = SourceProgram::seed("c", c.seed_code.clone());
        let settings = ToolchainSettings { compile_timeout_secs: 0.3, ..Default::default() };
        let slow = spec("sleep 10; : {input} {output}");
        assert!(matches!(
            compile_to_asm(&slow, "-Oz", &seed, &c, dir.path(), &settings),
            Err(Error::CompileTimeout { .. })
        ));
        let missing = spec("no-such-cc-9000 {input} -o {output}");
        assert!(matches!(
            compile_to_asm(&missing, "-Oz", &seed, &c, dir.path(), &settings),
            Err(Error::ToolchainMissing { .. })
        ));
    }
}
