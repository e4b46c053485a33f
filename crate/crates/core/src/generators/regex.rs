//! Regular-expression patterns from a small grammar:
//!
//! ```text
//! pattern := '^'? alt '$'?
//! alt     := concat ('|' concat)?
//! concat  := piece{1,3}
//! piece   := atom quantifier?
//! atom    := literal | escape | class | '.' | '(' alt ')' | '(?:' alt ')'
//! ```
//!
//! Counted repetitions are only emitted while the product of enclosing
//! repetition bounds stays small, so every pattern compiles well within the
//! regex engine's size limits.

use super::{Chooser, Generator};

const LITERALS: &[u8] = b"abcdefghijklmnopqrstuvwxyz0123456789-_ ,@=";
const ESCAPES: [&str; 14] = [
    r"\.", r"\*", r"\+", r"\?", r"\(", r"\)", r"\[", r"\]", r"\{", r"\}", r"\|", r"\^", r"\$",
    r"\\",
];
const CLASSES: [&str; 10] = [
    "[a-z]",
    "[A-Z]",
    "[0-9]",
    "[abc]",
    "[^xyz]",
    "[a-f0-9]",
    "[[:alpha:]]",
    r"\d",
    r"[\-+]",
    "[^ ]",
];
const MAX_REPEAT_PRODUCT: usize = 64;

#[derive(Debug, Clone)]
pub struct RegexGenerator {
    max_depth: usize,
}

impl RegexGenerator {
    /// `max_depth` bounds the nesting of groups.
    pub fn new(max_depth: usize) -> Self {
        RegexGenerator { max_depth }
    }

    fn alt(&self, c: &mut dyn Chooser, depth: usize, repeat: usize, out: &mut String) {
        let branches = c.choose("regex.branches", 2) + 1;
        for i in 0..branches {
            if i > 0 {
                out.push('|');
            }
            self.concat(c, depth, repeat, out);
        }
    }

    fn concat(&self, c: &mut dyn Chooser, depth: usize, repeat: usize, out: &mut String) {
        let pieces = c.choose("regex.pieces", 3) + 1;
        for _ in 0..pieces {
            self.piece(c, depth, repeat, out);
        }
    }

    fn piece(&self, c: &mut dyn Chooser, depth: usize, repeat: usize, out: &mut String) {
        // Decide the quantifier first so a counted repetition can cap what
        // is nested inside it.
        let counted_ok = repeat * 4 <= MAX_REPEAT_PRODUCT;
        let quantifiers = if counted_ok { 7 } else { 4 };
        let quantifier = c.choose("regex.quantifier", quantifiers);
        let (suffix, bound) = match quantifier {
            0 => (String::new(), 1),
            1 => ("*".to_owned(), 1),
            2 => ("+".to_owned(), 1),
            3 => ("?".to_owned(), 1),
            4 => {
                let n = c.choose("regex.count", 4) + 1;
                (format!("{{{n}}}"), n)
            }
            5 => {
                let n = c.choose("regex.count", 4);
                (format!("{{{n},}}"), n.max(1))
            }
            _ => {
                let lo = c.choose("regex.count", 3);
                let hi = lo + c.choose("regex.count_span", 2) + 1;
                (format!("{{{lo},{hi}}}"), hi)
            }
        };
        let lazy = quantifier > 0 && c.choose("regex.lazy", 4) == 0;

        // Literals take half the weight; groups one in eight, which keeps
        // the expected number of groups per alternation below one.
        let groups_ok = depth < self.max_depth;
        let atoms = if groups_ok { 8 } else { 7 };
        match c.choose("regex.atom", atoms) {
            0..=3 => out.push(LITERALS[c.choose("regex.literal", LITERALS.len())] as char),
            4 => out.push_str(ESCAPES[c.choose("regex.escape", ESCAPES.len())]),
            5 => out.push_str(CLASSES[c.choose("regex.class", CLASSES.len())]),
            6 => out.push('.'),
            _ => {
                let capturing = c.choose("regex.group", 2) == 0;
                out.push_str(if capturing { "(" } else { "(?:" });
                self.alt(c, depth + 1, repeat * bound, out);
                out.push(')');
            }
        }
        out.push_str(&suffix);
        if lazy {
            out.push('?');
        }
    }
}

impl Generator for RegexGenerator {
    fn name(&self) -> &'static str {
        "regex"
    }

    fn generate(&self, c: &mut dyn Chooser) -> String {
        let mut out = String::new();
        if c.choose("regex.anchor_start", 4) == 0 {
            out.push('^');
        }
        self.alt(c, 0, 1, &mut out);
        if c.choose("regex.anchor_end", 4) == 0 {
            out.push('$');
        }
        out
    }
}

/// Deepest group nesting in a pattern produced by [`RegexGenerator`].
pub fn group_depth(pattern: &str) -> usize {
    let (mut depth, mut max, mut escaped, mut in_class) = (0usize, 0usize, false, false);
    for ch in pattern.chars() {
        if escaped {
            escaped = false;
            continue;
        }
        match ch {
            '\\' => escaped = true,
            '[' if !in_class => in_class = true,
            ']' if in_class => in_class = false,
            '(' if !in_class => {
                depth += 1;
                max = max.max(depth);
            }
            ')' if !in_class => depth = depth.saturating_sub(1),
            _ => {}
        }
    }
    max
}
