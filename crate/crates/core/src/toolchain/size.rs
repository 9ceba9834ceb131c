use crate::model::{SizeMeasurement, SizeMetric};

/// Comment leaders recognised at the start of an assembly line.
pub const DEFAULT_COMMENT_LEADERS: [&str; 3] = ["#", "//", ";"];

/// Counts instruction lines: non-empty, not a label, not a directive, not a
/// comment. Trailing comments are ignored, so `f:  # @f` is a label.
pub fn instruction_count(assembly: &str, comment_leaders: &[&str]) -> u64 {
    let code = |l: &str| {
        let cut = comment_leaders.iter().filter_map(|c| l.find(c)).min().unwrap_or(l.len());
        l[..cut].trim().to_string()
    };
    assembly
        .lines()
        .map(code)
        .filter(|l| !l.is_empty())
        .filter(|l| !l.starts_with('.'))
        .filter(|l| !l.ends_with(':'))
        .count() as u64
}

/// Size of `assembly` under the instruction-count metric.
pub fn measure_size(assembly: &str) -> SizeMeasurement {
    SizeMeasurement { metric: SizeMetric::InstructionCount, value: instruction_count(assembly, &DEFAULT_COMMENT_LEADERS) }
}

/// Sums `.text*` sections from `size -A` output, falling back to the first
/// column of Berkeley-format output.
pub fn parse_text_bytes(size_output: &str) -> Option<u64> {
    let mut total = None;
    for line in size_output.lines() {
        let mut cols = line.split_whitespace();
        let (Some(name), Some(bytes)) = (cols.next(), cols.next()) else { continue };
        if name == ".text" || name.starts_with(".text.") {
            *total.get_or_insert(0) += bytes.parse::<u64>().ok()?;
        }
    }
    if total.is_some() {
        return total;
    }
    let mut lines = size_output.lines();
    let header = lines.next()?;
    if header.split_whitespace().next()? == "text" {
        return lines.next()?.split_whitespace().next()?.parse().ok();
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn examples() {
        assert_eq!(measure_size("f:\n  mov w0, #0\n  ret\n").value, 2);
        assert_eq!(measure_size(".text\n.globl f\nf:\nret\n").value, 1);
        assert_eq!(measure_size("").value, 0);
        assert_eq!(measure_size("# comment\n// other\n\tnop\n").value, 1);
        assert_eq!(measure_size("f:                 # @f\n# %bb.0:\n\txorl %eax, %eax # zero\n\tretq\n").value, 2);
    }

    #[test]
    fn gcc_style_listing() {
        let asm = "\t.file\t\"m.c\"\n\t.text\n\t.globl\tf\n\t.type\tf, @function\nf:\n.LFB0:\n\t.cfi_startproc\n\txorl\t%eax, %eax\n\tret\n\t.cfi_endproc\n.LFE0:\n";
        assert_eq!(measure_size(asm).value, 2);
    }

    #[test]
    fn text_section_parsing() {
        let sysv = "m.o  :\nsection   size   addr\n.text       11      0\n.text.f      5      0\n.data        0      0\nTotal       16\n";
        assert_eq!(parse_text_bytes(sysv), Some(16));
        let berkeley = "   text\t   data\t    bss\t    dec\t    hex\tfilename\n     42\t      0\t      0\t     42\t     2a\tm.o\n";
        assert_eq!(parse_text_bytes(berkeley), Some(42));
        assert_eq!(parse_text_bytes("garbage"), None);
    }

    proptest! {
        #[test]
        fn blank_lines_and_trailing_space_do_not_matter(
            lines in proptest::collection::vec("[a-z.#:]{0,3}[a-z ]{0,6}", 0..30),
            pad in proptest::collection::vec(0usize..3, 30),
        ) {
            let plain = lines.join("\n");
            let noisy: String = lines
                .iter()
                .zip(&pad)
                .map(|(l, p)| format!("{l}{}\n{}", " ".repeat(*p), "\n".repeat(*p)))
                .collect();
            prop_assert_eq!(measure_size(&plain), measure_size(&noisy));
        }
    }
}
