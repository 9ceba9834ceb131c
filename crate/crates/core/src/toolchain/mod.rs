//! Compiler invocation, size measurement and the dynamic checks (sanitizer
//! and coverage runs) the filters rely on.

mod compile;
mod coverage;
mod driver;
mod process;
mod sanitize;
mod size;
pub mod source;

use std::time::Duration;

use serde::{Deserialize, Serialize};

pub use compile::{compile_to_asm, flag_slug, write_source};
pub use coverage::{line_coverage, parse_gcov, CoverageOutcome, CoverageReport};
pub use driver::synthesize_driver;
pub use process::{expand, resolve_program, run_shell, shell_quote, CommandRun};
pub use sanitize::{run_sanitized, SanitizerVerdict};
pub use size::{instruction_count, measure_size, parse_text_bytes, DEFAULT_COMMENT_LEADERS};

use crate::model::SizeMetric;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ToolchainSettings {
    pub metric: SizeMetric,
    /// Prints section sizes of `{object}`; used by the text-section metric.
    pub size_tool: String,
    pub compile_timeout_secs: f64,
    pub run_timeout_secs: f64,
    pub driver_inputs: Vec<i64>,
}

impl Default for ToolchainSettings {
    fn default() -> Self {
        ToolchainSettings {
            metric: SizeMetric::InstructionCount,
            size_tool: "size -A {object}".into(),
            compile_timeout_secs: 30.0,
            run_timeout_secs: 5.0,
            driver_inputs: vec![-1, 0, 1, 10],
        }
    }
}

impl ToolchainSettings {
    pub fn compile_timeout(&self) -> Duration {
        Duration::from_secs_f64(self.compile_timeout_secs)
    }

    pub fn run_timeout(&self) -> Duration {
        Duration::from_secs_f64(self.run_timeout_secs)
    }
}
