//! Level-by-level enumeration of generating trees.
//!
//! Nodes are never materialized for counting. Productions depend only on the
//! label, so the nodes of one level are summarized by a signed count per
//! label, marked nodes contributing negatively. A marked node and an
//! unmarked node with the same label at the same level cancel together with
//! their (isomorphic) subtrees, which is exactly what signed addition does.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rule::{Label, RuleKind, SuccessionRule};

/// Signed multiset of labels at one level. Keys are unmarked labels; a
/// negative count means marked nodes outnumber unmarked ones.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LevelProfile {
    pub level: usize,
    pub signed_counts: BTreeMap<Label, BigInt>,
    pub total: BigInt,
}

impl LevelProfile {
    pub(crate) fn from_counts(level: usize, counts: BTreeMap<Label, BigInt>) -> Self {
        let signed_counts: BTreeMap<Label, BigInt> =
            counts.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        let total = signed_counts.values().sum();
        Self { level, signed_counts, total }
    }

    pub fn count(&self, label: Label) -> BigInt {
        let c = self.signed_counts.get(&label.unmarked()).cloned().unwrap_or_default();
        if label.marked {
            -c
        } else {
            c
        }
    }

    pub fn has_negative(&self) -> bool {
        self.signed_counts.values().any(Signed::is_negative)
    }
}

/// Profiles of levels `0..=depth`.
pub fn expand(rule: &SuccessionRule, depth: usize) -> Vec<LevelProfile> {
    let mut levels: Vec<BTreeMap<Label, BigInt>> = vec![BTreeMap::new(); depth + 1];
    let axiom = rule.axiom();
    let root_sign = if axiom.marked { -BigInt::one() } else { BigInt::one() };
    levels[0].insert(axiom.unmarked(), root_sign);

    for n in 0..=depth {
        let current = std::mem::take(&mut levels[n]);
        for (label, count) in &current {
            if count.is_zero() {
                continue;
            }
            let Some(prod) = rule.production(*label) else { continue };
            for b in prod.branches() {
                let target = n + b.jump as usize;
                if target > depth {
                    continue;
                }
                *levels[target].entry(b.successor.unmarked()).or_default() +=
                    count * b.signed_multiplicity();
            }
        }
        levels[n] = current;
    }

    levels
        .into_iter()
        .enumerate()
        .map(|(n, counts)| LevelProfile::from_counts(n, counts))
        .collect()
}

/// Level totals of [`expand`].
pub fn level_totals(rule: &SuccessionRule, depth: usize) -> Vec<BigInt> {
    expand(rule, depth).into_iter().map(|p| p.total).collect()
}

/// Signed successor multiplicities of a jump-free rule:
/// `matrix[i][j]` counts label `j` among the sons of label `i`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ProductionMatrix {
    pub label_index: Vec<Label>,
    pub matrix: Vec<Vec<i64>>,
}

pub fn production_matrix(rule: &SuccessionRule) -> Result<ProductionMatrix> {
    if matches!(rule.classify(), RuleKind::Jumping | RuleKind::JumpingMarked) {
        let offender = rule
            .productions()
            .find(|p| p.max_jump() > 1)
            .map(|p| p.parent())
            .unwrap_or(rule.axiom());
        return Err(Error::JumpsPresent(offender));
    }
    let label_index = rule.labels();
    let pos: BTreeMap<Label, usize> = label_index.iter().enumerate().map(|(i, l)| (*l, i)).collect();
    let n = label_index.len();
    let mut matrix = vec![vec![0i64; n]; n];
    for (i, label) in label_index.iter().enumerate() {
        if let Some(p) = rule.production(*label) {
            for b in p.branches() {
                matrix[i][pos[&b.successor.unmarked()]] += b.signed_multiplicity();
            }
        }
    }
    Ok(ProductionMatrix { label_index, matrix })
}

impl ProductionMatrix {
    /// `u * M^n * 1` for `n = 0..=depth`, where `u` is the (signed) axiom
    /// indicator.
    pub fn level_totals(&self, axiom: Label, depth: usize) -> Vec<BigInt> {
        let n = self.label_index.len();
        let mut row = vec![BigInt::zero(); n];
        if let Some(i) = self.label_index.iter().position(|l| *l == axiom.unmarked()) {
            row[i] = if axiom.marked { -BigInt::one() } else { BigInt::one() };
        }
        let mut out = Vec::with_capacity(depth + 1);
        for step in 0..=depth {
            out.push(row.iter().sum());
            if step == depth {
                break;
            }
            let mut next = vec![BigInt::zero(); n];
            for (i, c) in row.iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                for (j, m) in self.matrix[i].iter().enumerate() {
                    if *m != 0 {
                        next[j] += c * *m;
                    }
                }
            }
            row = next;
        }
        out
    }
}

pub const DEFAULT_NODE_CAP: usize = 5000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DotOptions {
    /// One node per (level, label) with the signed count as exponent.
    pub compact: bool,
    pub node_cap: usize,
}

impl Default for DotOptions {
    fn default() -> Self {
        Self { compact: false, node_cap: DEFAULT_NODE_CAP }
    }
}

struct DotNode {
    level: usize,
    label: Label,
    parent: Option<usize>,
    killed: bool,
}

/// Graphviz rendering of the first `depth` levels.
///
/// Explicit mode draws every node. Marked nodes are dashed; at each level a
/// marked node and an unmarked node with the same label are paired off and
/// both drawn grey, and neither is expanded further.
pub fn export_dot(rule: &SuccessionRule, depth: usize, opts: DotOptions) -> Result<String> {
    if opts.compact {
        export_compact(rule, depth, opts.node_cap)
    } else {
        export_explicit(rule, depth, opts.node_cap)
    }
}

fn export_explicit(rule: &SuccessionRule, depth: usize, cap: usize) -> Result<String> {
    let mut nodes: Vec<DotNode> =
        vec![DotNode { level: 0, label: rule.axiom(), parent: None, killed: false }];
    let mut by_level: Vec<Vec<usize>> = vec![Vec::new(); depth + 1];
    by_level[0].push(0);

    for n in 0..=depth {
        // annihilation: pair marked with unmarked of the same label
        let mut open: BTreeMap<Label, Vec<usize>> = BTreeMap::new();
        for &id in &by_level[n] {
            let node = &nodes[id];
            let opposite = node.label.mark();
            if let Some(ids) = open.get_mut(&opposite).filter(|v| !v.is_empty()) {
                let other = ids.pop().unwrap();
                nodes[other].killed = true;
                nodes[id].killed = true;
            } else {
                open.entry(node.label).or_default().push(id);
            }
        }
        let live: Vec<usize> = by_level[n].iter().copied().filter(|&id| !nodes[id].killed).collect();
        for id in live {
            let label = nodes[id].label;
            let Some(prod) = rule.production(label) else { continue };
            for b in prod.branches() {
                let target = n + b.jump as usize;
                if target > depth {
                    continue;
                }
                let son = if label.marked { b.successor.mark() } else { b.successor };
                for _ in 0..b.multiplicity {
                    if nodes.len() >= cap {
                        return Err(Error::NodeBudgetExceeded(cap));
                    }
                    nodes.push(DotNode { level: target, label: son, parent: Some(id), killed: false });
                    by_level[target].push(nodes.len() - 1);
                }
            }
        }
    }

    let mut out = String::from("digraph generating_tree {\n  node [shape=plaintext];\n");
    for (n, ids) in by_level.iter().enumerate() {
        let _ = write!(out, "  {{ rank=same;");
        for id in ids {
            let _ = write!(out, " n{id};");
        }
        let _ = writeln!(out, " }} // level {n}");
    }
    for (id, node) in nodes.iter().enumerate() {
        let mut attrs = format!("label=\"{}\"", node.label);
        if node.label.marked {
            attrs.push_str(", style=dashed, shape=ellipse");
        }
        if node.killed {
            attrs.push_str(", fontcolor=gray");
        }
        let _ = writeln!(out, "  n{id} [{attrs}];");
    }
    for (id, node) in nodes.iter().enumerate() {
        if let Some(p) = node.parent {
            let style = if node.level - nodes[p].level > 1 { " [style=dotted]" } else { "" };
            let _ = writeln!(out, "  n{p} -> n{id}{style};");
        }
    }
    out.push_str("}\n");
    Ok(out)
}

fn export_compact(rule: &SuccessionRule, depth: usize, cap: usize) -> Result<String> {
    let profiles = expand(rule, depth);
    let mut ids: BTreeMap<(usize, Label), usize> = BTreeMap::new();
    let mut out = String::from("digraph generating_tree {\n  node [shape=plaintext];\n");
    for p in &profiles {
        let _ = write!(out, "  {{ rank=same;");
        for label in p.signed_counts.keys() {
            let id = ids.len();
            if id >= cap {
                return Err(Error::NodeBudgetExceeded(cap));
            }
            ids.insert((p.level, *label), id);
            let _ = write!(out, " n{id};");
        }
        let _ = writeln!(out, " }} // level {} total {}", p.level, p.total);
    }
    for p in &profiles {
        for (label, count) in &p.signed_counts {
            let shown = if count.is_negative() { label.mark() } else { *label };
            let exp = count.abs();
            let text = if exp.is_one() { shown.to_string() } else { format!("{shown}^{exp}") };
            let style = if count.is_negative() { ", style=dashed, shape=ellipse" } else { "" };
            let _ = writeln!(out, "  n{} [label=\"{text}\"{style}];", ids[&(p.level, *label)]);
        }
    }
    for p in &profiles {
        for label in p.signed_counts.keys() {
            let Some(prod) = rule.production(*label) else { continue };
            let from = ids[&(p.level, *label)];
            let mut seen = std::collections::BTreeSet::new();
            for b in prod.branches() {
                let target = p.level + b.jump as usize;
                if let Some(to) = ids.get(&(target, b.successor.unmarked())) {
                    if seen.insert(*to) {
                        let _ = writeln!(out, "  n{from} -> n{to};");
                    }
                }
            }
        }
    }
    out.push_str("}\n");
    Ok(out)
}

/// Number of node statements in a DOT document produced by [`export_dot`].
pub fn dot_node_count(dot: &str) -> usize {
    dot.lines().filter(|l| l.trim_start().starts_with('n') && l.contains("[label=")).count()
}

/// Exponents shown on the nodes of each level in compact DOT output, summed
/// with sign. Useful to read level totals back out of a rendering.
pub fn compact_level_sums(dot: &str) -> Vec<i64> {
    let mut level_of: BTreeMap<String, usize> = BTreeMap::new();
    let mut max_level = 0;
    for line in dot.lines() {
        let line = line.trim();
        if let Some(rest) = line.strip_prefix("{ rank=same;") {
            let (ids, comment) = rest.split_once('}').unwrap_or((rest, ""));
            let level: usize = comment
                .split_whitespace()
                .nth(2)
                .and_then(|s| s.parse().ok())
                .unwrap_or(0);
            max_level = max_level.max(level);
            for id in ids.split(';').map(str::trim).filter(|s| !s.is_empty()) {
                level_of.insert(id.to_string(), level);
            }
        }
    }
    let mut sums = vec![0i64; max_level + 1];
    for line in dot.lines() {
        let line = line.trim();
        let Some((id, rest)) = line.split_once(" [label=\"") else { continue };
        let text = rest.split('"').next().unwrap_or("");
        let sign = if text.starts_with("(~") { -1 } else { 1 };
        let exp = text.rsplit_once('^').and_then(|(_, e)| e.parse::<i64>().ok()).unwrap_or(1);
        if let Some(&level) = level_of.get(id) {
            sums[level] += sign * exp;
        }
    }
    sums
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rule::parse_rule;

    fn ints(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    const EXTENDED_A: &str = "axiom (3)\n(3) -> (3)^3\n(3) =2=> (3)^2\n(3) =3=> (~3)";
    const JUMP_FREE_A: &str = "axiom (3)\n(3) -> (5) (3)^2\n(5) -> (4) (3)^4\n(4) -> (4) (3)^3";
    const JUMP_FREE_B: &str = "axiom (5)\n(5) -> (-1) (5)^4\n(-1) -> (1) (~5)^2\n(1) -> (1)";
    const EXTENDED_INITS: &str = "axiom (2)\n(2) -> (3)^2\n(2) =2=> (~3)^3\n(2) =3=> (~3)\n\
                        (3) -> (3)^3\n(3) =2=> (3)^2\n(3) =3=> (~3)";
    const TWO: &str = "axiom (2)\n(2) -> (2) (2)";

    #[test]
    fn expands_golden_rules() {
        let expected = ints(&[1, 3, 11, 38, 133, 464, 1620, 5655]);
        assert_eq!(level_totals(&parse_rule(JUMP_FREE_A).unwrap(), 7), expected);
        assert_eq!(level_totals(&parse_rule(EXTENDED_A).unwrap(), 7), expected);
        assert_eq!(
            level_totals(&parse_rule(EXTENDED_INITS).unwrap(), 7),
            ints(&[1, 2, 3, 12, 40, 141, 491, 1715])
        );
        assert_eq!(level_totals(&parse_rule(JUMP_FREE_B).unwrap(), 6), ints(&[1, 5, 19, 67, 231, 791, 2703]));
    }

    #[test]
    fn profile_counts_are_signed() {
        let profiles = expand(&parse_rule(JUMP_FREE_B).unwrap(), 2);
        let l2 = &profiles[2];
        assert_eq!(l2.count(Label::new(5)), BigInt::from(16 - 2));
        assert_eq!(l2.count(Label::new(5).mark()), BigInt::from(-14));
        assert_eq!(l2.count(Label::new(-1)), BigInt::from(4));
        assert_eq!(l2.total, BigInt::from(19));
        assert!(!l2.has_negative());
    }

    #[test]
    fn depth_zero_is_the_root() {
        let profiles = expand(&parse_rule(EXTENDED_A).unwrap(), 0);
        assert_eq!(profiles.len(), 1);
        assert_eq!(profiles[0].total, BigInt::one());
    }

    #[test]
    fn matrix_of_doubling_rule() {
        let rule = parse_rule(TWO).unwrap();
        let m = production_matrix(&rule).unwrap();
        assert_eq!(m.matrix, vec![vec![2]]);
        assert_eq!(m.level_totals(rule.axiom(), 5), ints(&[1, 2, 4, 8, 16, 32]));
    }

    #[test]
    fn matrix_agrees_with_expand() {
        let rule = parse_rule(JUMP_FREE_A).unwrap();
        let m = production_matrix(&rule).unwrap();
        assert_eq!(m.label_index, vec![Label::new(3), Label::new(5), Label::new(4)]);
        assert_eq!(m.matrix, vec![vec![2, 1, 0], vec![4, 0, 1], vec![3, 0, 1]]);
        assert_eq!(m.level_totals(rule.axiom(), 10), level_totals(&rule, 10));
    }

    #[test]
    fn matrix_rejects_jumps() {
        let rule = parse_rule("axiom (1)\n(1) -> (2)\n(1) =2=> (1)\n(2) -> (1) (3)\n(2) =2=> (2)\n(3) -> (1)").unwrap();
        assert!(matches!(production_matrix(&rule), Err(Error::JumpsPresent(_))));
    }

    #[test]
    fn dot_binary_tree() {
        let dot = export_dot(&parse_rule(TWO).unwrap(), 2, DotOptions::default()).unwrap();
        assert_eq!(dot_node_count(&dot), 7);
        assert_eq!(dot.matches(" -> ").count(), 6);
    }

    #[test]
    fn dot_node_counts_follow_totals() {
        let dot = export_dot(&parse_rule(JUMP_FREE_A).unwrap(), 3, DotOptions::default()).unwrap();
        assert_eq!(dot_node_count(&dot), 1 + 3 + 11 + 38);
    }

    #[test]
    fn dot_budget() {
        let opts = DotOptions { compact: false, node_cap: 10 };
        assert_eq!(
            export_dot(&parse_rule(JUMP_FREE_A).unwrap(), 3, opts),
            Err(Error::NodeBudgetExceeded(10))
        );
    }

    #[test]
    fn dot_marks_and_kills() {
        let dot = export_dot(&parse_rule(EXTENDED_A).unwrap(), 3, DotOptions::default()).unwrap();
        assert!(dot.contains("label=\"(~3)\", style=dashed"));
        assert!(dot.contains("fontcolor=gray"));
    }

    #[test]
    fn compact_dot_exponent_sums() {
        let opts = DotOptions { compact: true, ..DotOptions::default() };
        let dot = export_dot(&parse_rule(JUMP_FREE_B).unwrap(), 3, opts).unwrap();
        assert_eq!(compact_level_sums(&dot), vec![1, 5, 19, 67]);
        assert!(dot.contains("label=\"(5)^14\""));
    }
}
