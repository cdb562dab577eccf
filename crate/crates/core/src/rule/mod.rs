//! Succession rules: labels, productions with jumps and marks, and the rule
//! table itself.
//!
//! Productions are keyed by unmarked labels. A marked node `(~v)` uses the
//! production of `(v)` with every son's mark flipped.

mod dsl;

use std::fmt;

use indexmap::IndexMap;
use serde::Serialize;

use crate::error::{Error, Result};

pub use dsl::{parse_rule, print_rule};

/// A node label. Identity is the triple `(value, marked, tag)`; the tag
/// separates same-valued labels that carry different productions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Label {
    pub value: i64,
    pub tag: u32,
    pub marked: bool,
}

impl Label {
    pub const SINK: Label = Label { value: 0, tag: 0, marked: false };

    pub const fn new(value: i64) -> Self {
        Self { value, tag: 0, marked: false }
    }

    pub const fn tagged(value: i64, tag: u32) -> Self {
        Self { value, tag, marked: false }
    }

    /// Marking is an involution: marking a marked label unmarks it.
    pub const fn mark(self) -> Self {
        Self { marked: !self.marked, ..self }
    }

    pub const fn unmarked(self) -> Self {
        Self { marked: false, ..self }
    }

    /// The untagged, unmarked `(0)`, which has no sons unless a production
    /// says otherwise.
    pub fn is_sink(&self) -> bool {
        self.unmarked() == Self::SINK
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        if self.marked {
            f.write_str("~")?;
        }
        write!(f, "{}", self.value)?;
        if self.tag != 0 {
            write!(f, ":{}", self.tag)?;
        }
        f.write_str(")")
    }
}

/// `multiplicity` copies of `successor`, placed `jump` levels below the parent.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Branch {
    pub jump: u32,
    pub successor: Label,
    pub multiplicity: i64,
}

impl Branch {
    pub fn new(jump: u32, successor: Label, multiplicity: i64) -> Self {
        Self { jump, successor, multiplicity }
    }

    /// `successor` counted with sign: marked sons count negatively.
    pub fn signed_multiplicity(&self) -> i64 {
        if self.successor.marked {
            -self.multiplicity
        } else {
            self.multiplicity
        }
    }
}

/// The sons of one label. Branches are kept normalized: no zero
/// multiplicities, negative multiplicities turned into marked sons, grouped
/// by jump, and repeated `(jump, successor)` pairs merged.
#[derive(Clone, Debug, Eq, Serialize)]
pub struct Production {
    parent: Label,
    branches: Vec<Branch>,
}

impl Production {
    pub fn new(parent: Label, branches: impl IntoIterator<Item = Branch>) -> Result<Self> {
        if parent.marked {
            return Err(Error::InvalidRule(format!("production parent {parent} is marked")));
        }
        let mut raw = Vec::new();
        for b in branches {
            if b.jump == 0 {
                return Err(Error::InvalidRule(format!("jump 0 in production of {parent}")));
            }
            raw.push(b);
        }
        Ok(Self { parent, branches: normalize(raw) })
    }

    pub fn parent(&self) -> Label {
        self.parent
    }

    pub fn branches(&self) -> &[Branch] {
        &self.branches
    }

    pub fn max_jump(&self) -> u32 {
        self.branches.iter().map(|b| b.jump).max().unwrap_or(1)
    }

    /// Number of sons counted without sign.
    pub fn son_count(&self) -> i64 {
        self.branches.iter().map(|b| b.multiplicity).sum()
    }

    /// Branches with the same order-insensitive key, for comparisons.
    fn sorted(&self) -> Vec<Branch> {
        let mut v = self.branches.clone();
        v.sort();
        v
    }
}

impl PartialEq for Production {
    fn eq(&self, other: &Self) -> bool {
        self.parent == other.parent && self.sorted() == other.sorted()
    }
}

fn normalize(raw: Vec<Branch>) -> Vec<Branch> {
    let mut out: Vec<Branch> = Vec::with_capacity(raw.len());
    for mut b in raw {
        if b.multiplicity < 0 {
            b.multiplicity = -b.multiplicity;
            b.successor = b.successor.mark();
        }
        if let Some(prev) = out.iter_mut().find(|p| p.jump == b.jump && p.successor == b.successor) {
            prev.multiplicity += b.multiplicity;
        } else {
            out.push(b);
        }
    }
    out.retain(|b| b.multiplicity != 0);
    // stable: construction order survives within each jump
    out.sort_by_key(|b| b.jump);
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum RuleKind {
    Ordinary,
    Jumping,
    Marked,
    JumpingMarked,
}

impl fmt::Display for RuleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RuleKind::Ordinary => "ordinary",
            RuleKind::Jumping => "jumping",
            RuleKind::Marked => "marked",
            RuleKind::JumpingMarked => "jumping+marked",
        })
    }
}

/// An axiom and a finite production table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SuccessionRule {
    axiom: Label,
    productions: IndexMap<Label, Production>,
}

impl SuccessionRule {
    /// Builds a rule, checking that every label reachable as a son (and the
    /// axiom) has a production, the sink `(0)` excepted.
    pub fn new(axiom: Label, productions: impl IntoIterator<Item = Production>) -> Result<Self> {
        let mut table = IndexMap::new();
        for p in productions {
            if table.insert(p.parent, p.clone()).is_some() {
                return Err(Error::InvalidRule(format!("duplicate production for {}", p.parent)));
            }
        }
        let rule = Self { axiom, productions: table };
        rule.check_closed()?;
        Ok(rule)
    }

    fn check_closed(&self) -> Result<()> {
        let resolvable = |l: Label| l.is_sink() || self.productions.contains_key(&l.unmarked());
        if !resolvable(self.axiom) {
            return Err(Error::MissingProduction(self.axiom.unmarked()));
        }
        for p in self.productions.values() {
            for b in &p.branches {
                if !resolvable(b.successor) {
                    return Err(Error::MissingProduction(b.successor.unmarked()));
                }
            }
        }
        Ok(())
    }

    pub fn axiom(&self) -> Label {
        self.axiom
    }

    pub fn production(&self, label: Label) -> Option<&Production> {
        self.productions.get(&label.unmarked())
    }

    pub fn productions(&self) -> impl Iterator<Item = &Production> {
        self.productions.values()
    }

    /// Every label that occurs in the rule, unmarked, in first-seen order.
    pub fn labels(&self) -> Vec<Label> {
        let mut seen = indexmap::IndexSet::new();
        seen.insert(self.axiom.unmarked());
        for p in self.productions.values() {
            seen.insert(p.parent);
            for b in &p.branches {
                seen.insert(b.successor.unmarked());
            }
        }
        seen.into_iter().collect()
    }

    pub fn max_jump(&self) -> u32 {
        self.productions.values().map(Production::max_jump).max().unwrap_or(1)
    }

    pub fn has_marks(&self) -> bool {
        self.axiom.marked
            || self.productions.values().flat_map(|p| &p.branches).any(|b| b.successor.marked)
    }

    pub fn classify(&self) -> RuleKind {
        match (self.max_jump() > 1, self.has_marks()) {
            (false, false) => RuleKind::Ordinary,
            (true, false) => RuleKind::Jumping,
            (false, true) => RuleKind::Marked,
            (true, true) => RuleKind::JumpingMarked,
        }
    }

    /// Checks that each label `(v)` has exactly `v` sons over all its jumps.
    pub fn is_consistent(&self) -> ConsistencyReport {
        let mut violations = Vec::new();
        for label in self.labels() {
            let sons = self.production(label).map_or(0, Production::son_count);
            let expected = label.value;
            if label.is_sink() && self.production(label).is_none() {
                continue;
            }
            if expected < 0 || sons != expected {
                violations.push(Violation { label, sons, expected });
            }
        }
        ConsistencyReport { violations }
    }
}

impl fmt::Display for SuccessionRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print_rule(self))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub label: Label,
    pub sons: i64,
    pub expected: i64,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ConsistencyReport {
    pub violations: Vec<Violation>,
}

impl ConsistencyReport {
    pub fn is_consistent(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Hands out labels for a given value, bumping the tag when `(value, tag)`
/// is already taken. The untagged sink `(0)` is never handed out.
#[derive(Debug, Default, Clone)]
pub(crate) struct LabelAllocator {
    taken: std::collections::HashSet<Label>,
}

impl LabelAllocator {
    pub(crate) fn reserve(&mut self, label: Label) {
        self.taken.insert(label.unmarked());
    }

    pub(crate) fn fresh(&mut self, value: i64) -> Label {
        let mut tag = 0;
        loop {
            let l = Label::tagged(value, tag);
            if !l.is_sink() && self.taken.insert(l) {
                return l;
            }
            tag += 1;
        }
    }
}
