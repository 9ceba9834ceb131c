//! Lightweight lexical view of C-family source: enough to diff two programs
//! token by token and to lay statements out one per line for coverage.

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokenKind {
    Word,
    Number,
    Punct,
    Str,
    Directive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub start: usize,
    pub end: usize,
}

impl Token {
    pub fn text<'s>(&self, src: &'s str) -> &'s str {
        &src[self.start..self.end]
    }
}

fn at_line_start(src: &str, i: usize) -> bool {
    src[..i].bytes().rev().take_while(|b| *b != b'\n').all(|b| b == b' ' || b == b'\t')
}

/// Splits `src` into tokens; comments and whitespace are dropped, `#` lines
/// (preprocessor directives, Rust attributes) become single tokens.
pub fn tokenize(src: &str) -> Vec<Token> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let b = bytes[i];
        let start = i;
        if b.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        if src[i..].starts_with("//") {
            i = src[i..].find('\n').map_or(bytes.len(), |n| i + n);
            continue;
        }
        if src[i..].starts_with("/*") {
            i = src[i + 2..].find("*/").map_or(bytes.len(), |n| i + 2 + n + 2);
            continue;
        }
        let kind = if b == b'#' && at_line_start(src, i) {
            loop {
                match src[i..].find('\n') {
                    Some(n) if src[..i + n].trim_end_matches('\r').ends_with('\\') => i += n + 1,
                    Some(n) => {
                        i += n;
                        break;
                    }
                    None => {
                        i = bytes.len();
                        break;
                    }
                }
            }
            TokenKind::Directive
        } else if b == b'"' {
            i += 1;
            while i < bytes.len() && bytes[i] != b'"' {
                i += if bytes[i] == b'\\' { 2 } else { 1 };
            }
            i = (i + 1).min(bytes.len());
            TokenKind::Str
        } else if b == b'\'' && is_char_literal(bytes, i) {
            i += 1;
            while i < bytes.len() && bytes[i] != b'\'' {
                i += if bytes[i] == b'\\' { 2 } else { 1 };
            }
            i = (i + 1).min(bytes.len());
            TokenKind::Str
        } else if b.is_ascii_alphabetic() || b == b'_' || b == b'$' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_' || bytes[i] == b'$') {
                i += 1;
            }
            TokenKind::Word
        } else if b.is_ascii_digit() {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_' || bytes[i] == b'.') {
                i += 1;
            }
            TokenKind::Number
        } else {
            i += src[i..].chars().next().map_or(1, char::len_utf8);
            TokenKind::Punct
        };
        out.push(Token { kind, start, end: i.min(bytes.len()) });
    }
    out
}

fn is_char_literal(bytes: &[u8], i: usize) -> bool {
    match bytes.get(i + 1) {
        Some(b'\\') => true,
        Some(_) => bytes.get(i + 2) == Some(&b'\''),
        None => false,
    }
}

/// For each token of `new`, whether it falls outside the longest common
/// token subsequence shared with `old`.
pub fn inserted_tokens(old: &str, new: &str) -> Vec<bool> {
    let a: Vec<&str> = tokenize(old).iter().map(|t| t.text(old)).collect();
    let b: Vec<&str> = tokenize(new).iter().map(|t| t.text(new)).collect();
    let prefix = a.iter().zip(&b).take_while(|(x, y)| x == y).count();
    let suffix = a[prefix..].iter().rev().zip(b[prefix..].iter().rev()).take_while(|(x, y)| x == y).count();
    let a_mid = &a[prefix..a.len() - suffix];
    let b_mid = &b[prefix..b.len() - suffix];
    let (n, m) = (a_mid.len(), b_mid.len());
    let mut table = vec![0u32; (n + 1) * (m + 1)];
    let idx = |i: usize, j: usize| i * (m + 1) + j;
    for i in (0..n).rev() {
        for j in (0..m).rev() {
            table[idx(i, j)] = if a_mid[i] == b_mid[j] {
                table[idx(i + 1, j + 1)] + 1
            } else {
                table[idx(i + 1, j)].max(table[idx(i, j + 1)])
            };
        }
    }
    let mut inserted = vec![false; b.len()];
    let (mut i, mut j) = (0, 0);
    while j < m {
        if i < n && a_mid[i] == b_mid[j] {
            i += 1;
            j += 1;
        } else if i < n && table[idx(i + 1, j)] >= table[idx(i, j + 1)] {
            i += 1;
        } else {
            inserted[prefix + j] = true;
            j += 1;
        }
    }
    inserted
}

/// Source re-laid out so statements, braces and control headers each start
/// a new line.
#[derive(Debug, Clone)]
pub struct NormalizedSource {
    pub text: String,
    /// 1-based output line of every token of the input.
    pub token_lines: Vec<usize>,
}

const HEADER_KEYWORDS: [&str; 4] = ["if", "while", "for", "switch"];

/// Inserts line breaks after `{`, `}` and top-level `;`. When `paren_headers`
/// is set, a parenthesised `if`/`while`/`for` header not followed by `{` also
/// ends its line, as does a bare `else`.
pub fn split_statements(src: &str, paren_headers: bool) -> NormalizedSource {
    let tokens = tokenize(src);
    let mut text = String::with_capacity(src.len() + src.len() / 4);
    let mut token_lines = Vec::with_capacity(tokens.len());
    let mut line = 1usize;
    let mut cursor = 0usize;
    let mut paren_depth = 0usize;
    let mut header_stack: Vec<usize> = Vec::new();
    let mut pending_header = false;
    for (k, tok) in tokens.iter().enumerate() {
        let gap = &src[cursor..tok.start];
        line += gap.matches('\n').count();
        text.push_str(gap);
        token_lines.push(line);
        let t = tok.text(src);
        text.push_str(t);
        line += t.matches('\n').count();
        cursor = tok.end;

        let next = tokens.get(k + 1).map(|n| n.text(src));
        let mut break_after = false;
        match t {
            "(" => {
                paren_depth += 1;
                if pending_header {
                    header_stack.push(paren_depth);
                }
            }
            ")" => {
                if header_stack.last() == Some(&paren_depth) {
                    header_stack.pop();
                    break_after = paren_headers && !matches!(next, Some("{") | Some(";") | None);
                }
                paren_depth = paren_depth.saturating_sub(1);
            }
            "{" | "}" => break_after = paren_depth == 0,
            ";" => break_after = paren_depth == 0,
            "else" => break_after = paren_headers && !matches!(next, Some("{") | Some("if") | None),
            _ => {}
        }
        pending_header = paren_headers && tok.kind == TokenKind::Word && HEADER_KEYWORDS.contains(&t);
        if break_after && next.is_some() {
            let next_gap = &src[cursor..tokens[k + 1].start];
            if !next_gap.contains('\n') {
                text.push('\n');
                line += 1;
            }
        }
    }
    text.push_str(&src[cursor..]);
    NormalizedSource { text, token_lines }
}

const CONTROL_WORDS: [&str; 11] =
    ["if", "else", "while", "for", "switch", "do", "case", "default", "loop", "guard", "repeat"];

/// Lines of `mutated` (after normalisation) that hold inserted statements.
///
/// Control headers and brace-only lines are excluded: a dead block's guard
/// is legitimately evaluated even though its body never runs.
pub fn inserted_statement_lines(previous: &str, mutated: &str, paren_headers: bool) -> (NormalizedSource, Vec<usize>) {
    let inserted = inserted_tokens(previous, mutated);
    let norm = split_statements(mutated, paren_headers);
    let tokens = tokenize(mutated);
    let mut per_line: std::collections::BTreeMap<usize, Vec<usize>> = std::collections::BTreeMap::new();
    for (i, l) in norm.token_lines.iter().enumerate() {
        per_line.entry(*l).or_default().push(i);
    }
    let mut lines = Vec::new();
    for (line, idxs) in per_line {
        if !idxs.iter().any(|i| inserted[*i]) {
            continue;
        }
        let texts: Vec<&str> = idxs.iter().map(|i| tokens[*i].text(mutated)).collect();
        let first_word = texts.iter().find(|t| !matches!(**t, "{" | "}" | ";"));
        let brace_only = first_word.is_none();
        let control = first_word.is_some_and(|w| CONTROL_WORDS.contains(w));
        let directive = idxs.iter().all(|i| tokens[*i].kind == TokenKind::Directive);
        if !(brace_only || control || directive) {
            lines.push(line);
        }
    }
    (norm, lines)
}
