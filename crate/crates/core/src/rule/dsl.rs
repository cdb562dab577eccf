//! Text form of succession rules.
//!
//! ```text
//! # comments run to end of line
//! axiom (3)
//! (3) -> (5) (3)^2          # jump-1 sons
//! (3) =3=> (~3)             # jump-3 son, marked
//! (3:1) -> (6) (3)^2        # tagged label (3)_1
//! ```
//!
//! Lines for the same parent are merged into one production.

use indexmap::IndexMap;

use super::{Branch, Label, Production, SuccessionRule};
use crate::error::{Error, Result};

pub fn print_rule(rule: &SuccessionRule) -> String {
    let mut out = format!("axiom {}\n", rule.axiom);
    for p in rule.productions.values() {
        if p.branches.is_empty() {
            out.push_str(&format!("{} ->\n", p.parent));
            continue;
        }
        let mut jumps: Vec<u32> = p.branches.iter().map(|b| b.jump).collect();
        jumps.dedup();
        for jump in jumps {
            let arrow = if jump == 1 { "->".to_string() } else { format!("={jump}=>") };
            out.push_str(&format!("{} {arrow}", p.parent));
            for b in p.branches.iter().filter(|b| b.jump == jump) {
                out.push(' ');
                out.push_str(&b.successor.to_string());
                if b.multiplicity != 1 {
                    out.push_str(&format!("^{}", b.multiplicity));
                }
            }
            out.push('\n');
        }
    }
    out
}

pub fn parse_rule(text: &str) -> Result<SuccessionRule> {
    let mut axiom: Option<Label> = None;
    let mut table: IndexMap<Label, Vec<Branch>> = IndexMap::new();
    let mut first_use: IndexMap<Label, (usize, usize)> = IndexMap::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let content = raw.split('#').next().unwrap_or("");
        let mut cur = Cursor::new(content, line_no);
        cur.skip_ws();
        if cur.at_end() {
            continue;
        }
        if cur.eat_keyword("axiom") {
            cur.skip_ws();
            let (label, _) = cur.label()?;
            cur.skip_ws();
            cur.expect_end()?;
            if axiom.replace(label).is_some() {
                return Err(cur.error("axiom given twice"));
            }
            continue;
        }

        let (parent, _) = cur.label()?;
        if parent.marked {
            return Err(cur.error("production parent cannot be marked"));
        }
        cur.skip_ws();
        let jump = cur.arrow()?;
        let entry = table.entry(parent).or_default();
        loop {
            cur.skip_ws();
            if cur.at_end() {
                break;
            }
            let (successor, pos) = cur.label()?;
            first_use.entry(successor.unmarked()).or_insert(pos);
            let multiplicity = if cur.eat('^') { cur.exponent()? } else { 1 };
            if multiplicity == 0 {
                return Err(cur.error("exponent must be nonzero"));
            }
            entry.push(Branch::new(jump, successor, multiplicity));
        }
    }

    let axiom = axiom.ok_or(Error::Syntax {
        line: text.lines().count().max(1),
        column: 1,
        message: "missing axiom line".into(),
    })?;
    for (label, (line, column)) in &first_use {
        if !label.is_sink() && !table.contains_key(label) {
            return Err(Error::Syntax {
                line: *line,
                column: *column,
                message: format!("label {label} has no production"),
            });
        }
    }
    let productions = table
        .into_iter()
        .map(|(parent, branches)| Production::new(parent, branches))
        .collect::<Result<Vec<_>>>()?;
    SuccessionRule::new(axiom, productions)
}

struct Cursor {
    chars: Vec<char>,
    pos: usize,
    line: usize,
}

impl Cursor {
    fn new(src: &str, line: usize) -> Self {
        Self { chars: src.chars().collect(), pos: 0, line }
    }

    fn error(&self, message: impl Into<String>) -> Error {
        Error::Syntax { line: self.line, column: self.pos + 1, message: message.into() }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn at_end(&self) -> bool {
        self.pos >= self.chars.len()
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(char::is_whitespace) {
            self.pos += 1;
        }
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.error(format!("expected '{c}'")))
        }
    }

    fn expect_end(&self) -> Result<()> {
        if self.at_end() {
            Ok(())
        } else {
            Err(self.error("unexpected trailing input"))
        }
    }

    fn eat_keyword(&mut self, kw: &str) -> bool {
        let n = kw.chars().count();
        let matches = self.chars.len() >= self.pos + n
            && self.chars[self.pos..self.pos + n].iter().copied().eq(kw.chars())
            && self.chars.get(self.pos + n).is_none_or(|c| c.is_whitespace());
        if matches {
            self.pos += n;
        }
        matches
    }

    fn integer(&mut self) -> Result<i64> {
        let start = self.pos;
        if self.peek() == Some('-') || self.peek() == Some('+') {
            self.pos += 1;
        }
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        let s: String = self.chars[start..self.pos].iter().collect();
        s.parse().map_err(|_| {
            self.pos = start;
            self.error("expected an integer")
        })
    }

    /// `(` `~`? int (`:` tag)? `)`; also returns the 1-based position.
    fn label(&mut self) -> Result<(Label, (usize, usize))> {
        let pos = (self.line, self.pos + 1);
        self.expect('(')?;
        self.skip_ws();
        let marked = self.eat('~');
        let value = self.integer()?;
        let tag = if self.eat(':') {
            let t = self.integer()?;
            u32::try_from(t).map_err(|_| self.error("tag must be a nonnegative integer"))?
        } else {
            0
        };
        self.skip_ws();
        self.expect(')')?;
        let label = Label::tagged(value, tag);
        Ok((if marked { label.mark() } else { label }, pos))
    }

    fn exponent(&mut self) -> Result<i64> {
        if self.eat('{') {
            self.skip_ws();
            let v = self.integer()?;
            self.skip_ws();
            self.expect('}')?;
            Ok(v)
        } else {
            self.integer()
        }
    }

    /// `->` or `=J=>`.
    fn arrow(&mut self) -> Result<u32> {
        if self.eat('-') {
            self.expect('>')?;
            return Ok(1);
        }
        if self.eat('=') {
            let j = self.integer()?;
            self.expect('=')?;
            self.expect('>')?;
            return u32::try_from(j)
                .ok()
                .filter(|&j| j >= 1)
                .ok_or_else(|| self.error("jump must be a positive integer"));
        }
        Err(self.error("expected '->' or '=J=>'"))
    }
}
