//! Rules with infinitely many labels.
//!
//! Productions are schemas in the parent value `k`: successor labels and
//! multiplicities are affine expressions in `k`, and a successor may be a
//! range `(a..b)` standing for `(a)(a+1)...(b)`.
//!
//! ```text
//! axiom (2)
//! (k) -> (2..k) (k+1) (k)
//! (k) -> (~k)
//! ```
//!
//! Concrete parents such as `(3) -> (4)` are schemas guarded by `k == 3`.
//! A `level-indexed` line asks expansion to check that every label sits on
//! the level equal to its value.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::Ratio;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::rule::{Branch, Label, Production, SuccessionRule};
use crate::tree::LevelProfile;

/// `coeff * k + constant`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Affine {
    pub coeff: i64,
    pub constant: i64,
}

impl Affine {
    pub const fn new(coeff: i64, constant: i64) -> Self {
        Self { coeff, constant }
    }

    pub const fn constant(c: i64) -> Self {
        Self { coeff: 0, constant: c }
    }

    pub const K: Affine = Affine::new(1, 0);

    pub fn eval(&self, k: i64) -> Result<i64> {
        self.coeff
            .checked_mul(k)
            .and_then(|v| v.checked_add(self.constant))
            .ok_or_else(|| Error::Overflow(format!("{self} at k = {k}")))
    }
}

impl fmt::Display for Affine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.coeff {
            0 => return write!(f, "{}", self.constant),
            1 => f.write_str("k")?,
            -1 => f.write_str("-k")?,
            c => write!(f, "{c}*k")?,
        }
        match self.constant {
            0 => Ok(()),
            c if c > 0 => write!(f, "+{c}"),
            c => write!(f, "{c}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Relation {
    Ge,
    Gt,
    Le,
    Lt,
    Eq,
    Ne,
}

impl Relation {
    fn symbol(self) -> &'static str {
        match self {
            Relation::Ge => ">=",
            Relation::Gt => ">",
            Relation::Le => "<=",
            Relation::Lt => "<",
            Relation::Eq => "==",
            Relation::Ne => "!=",
        }
    }

    fn holds(self, lhs: i128, rhs: i128) -> bool {
        match self {
            Relation::Ge => lhs >= rhs,
            Relation::Gt => lhs > rhs,
            Relation::Le => lhs <= rhs,
            Relation::Lt => lhs < rhs,
            Relation::Eq => lhs == rhs,
            Relation::Ne => lhs != rhs,
        }
    }
}

/// `coeff * k <relation> bound`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Guard {
    pub coeff: i64,
    pub relation: Relation,
    pub bound: i64,
}

impl Guard {
    pub fn new(lhs: Affine, relation: Relation, rhs: Affine) -> Self {
        Guard {
            coeff: lhs.coeff - rhs.coeff,
            relation,
            bound: rhs.constant - lhs.constant,
        }
    }

    pub fn value_is(n: i64) -> Self {
        Guard { coeff: 1, relation: Relation::Eq, bound: n }
    }

    pub fn admits(&self, k: i64) -> bool {
        self.relation.holds(self.coeff as i128 * k as i128, self.bound as i128)
    }

    fn as_value(&self) -> Option<i64> {
        (self.coeff == 1 && self.relation == Relation::Eq).then_some(self.bound)
    }
}

impl fmt::Display for Guard {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}{}", Affine::new(self.coeff, 0), self.relation.symbol(), self.bound)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SuccessorLabel {
    Single(Affine),
    /// Inclusive; empty when `hi < lo`.
    Range(Affine, Affine),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SuccessorSpec {
    pub label: SuccessorLabel,
    pub marked: bool,
    pub multiplicity: Affine,
}

impl SuccessorSpec {
    pub fn single(label: Affine, multiplicity: Affine) -> Self {
        Self { label: SuccessorLabel::Single(label), marked: false, multiplicity }
    }

    pub fn range(lo: Affine, hi: Affine) -> Self {
        Self { label: SuccessorLabel::Range(lo, hi), marked: false, multiplicity: Affine::constant(1) }
    }

    pub fn marked(mut self) -> Self {
        self.marked = !self.marked;
        self
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Schema {
    pub jump: u32,
    pub guard: Option<Guard>,
    pub successors: Vec<SuccessorSpec>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParametricRule {
    pub axiom: i64,
    pub schemas: Vec<Schema>,
    pub level_indexed: bool,
}

/// One evaluated son group: `count` copies of `value` at relative level
/// `jump`, negative for marked sons.
struct Son {
    jump: u32,
    value: i64,
    count: i64,
}

impl ParametricRule {
    /// Sons of a node labelled `k`, in schema order.
    fn sons(&self, k: i64) -> Result<Vec<Son>> {
        let mut out = Vec::new();
        for (index, schema) in self.schemas.iter().enumerate() {
            if !schema.guard.is_none_or(|g| g.admits(k)) {
                continue;
            }
            for spec in &schema.successors {
                let m = spec.multiplicity.eval(k)?;
                if m < 0 {
                    return Err(Error::NegativeMultiplicity { label: k, schema: index, multiplicity: m });
                }
                if m == 0 {
                    continue;
                }
                let count = if spec.marked { -m } else { m };
                let (lo, hi) = match spec.label {
                    SuccessorLabel::Single(e) => {
                        let v = e.eval(k)?;
                        (v, v)
                    }
                    SuccessorLabel::Range(a, b) => (a.eval(k)?, b.eval(k)?),
                };
                for value in lo..=hi {
                    out.push(Son { jump: schema.jump, value, count });
                }
            }
        }
        Ok(out)
    }

    /// Finite rule with the same first `depth + 1` levels: every label
    /// reached above level `depth` gets its evaluated production; labels
    /// first seen deeper get none.
    pub fn unfold(&self, depth: usize) -> Result<SuccessionRule> {
        let mut order: Vec<i64> = Vec::new();
        let mut productions: BTreeMap<i64, Vec<Branch>> = BTreeMap::new();
        let mut frontier: Vec<Vec<i64>> = vec![Vec::new(); depth + 1];
        frontier[0].push(self.axiom);
        let mut leaves: Vec<i64> = Vec::new();
        for n in 0..=depth {
            let level = std::mem::take(&mut frontier[n]);
            for k in level {
                if productions.contains_key(&k) {
                    continue;
                }
                order.push(k);
                let sons = self.sons(k)?;
                let branches = sons
                    .iter()
                    .map(|s| Branch::new(s.jump, Label::new(s.value), s.count))
                    .collect();
                productions.insert(k, branches);
                for s in sons {
                    let target = n + s.jump as usize;
                    if target <= depth {
                        frontier[target].push(s.value);
                    } else {
                        leaves.push(s.value);
                    }
                }
            }
        }
        for v in leaves {
            if v != 0 && !productions.contains_key(&v) {
                order.push(v);
                productions.insert(v, Vec::new());
            }
        }
        let prods = order
            .into_iter()
            .map(|v| Production::new(Label::new(v), productions.remove(&v).unwrap_or_default()))
            .collect::<Result<Vec<_>>>()?;
        SuccessionRule::new(Label::new(self.axiom), prods)
    }
}

/// Signed level profiles of levels `0..=depth`.
pub fn expand_parametric(rule: &ParametricRule, depth: usize) -> Result<Vec<LevelProfile>> {
    let mut levels: Vec<BTreeMap<i64, BigInt>> = vec![BTreeMap::new(); depth + 1];
    levels[0].insert(rule.axiom, BigInt::one());
    for n in 0..=depth {
        let current = std::mem::take(&mut levels[n]);
        for (&k, count) in &current {
            if count.is_zero() {
                continue;
            }
            if rule.level_indexed && usize::try_from(k).ok() != Some(n) {
                return Err(Error::LevelMismatch { label: k, level: n });
            }
            for son in rule.sons(k)? {
                let target = n + son.jump as usize;
                if target <= depth {
                    *levels[target].entry(son.value).or_default() += count * son.count;
                }
            }
        }
        levels[n] = current;
    }
    Ok(levels
        .into_iter()
        .enumerate()
        .map(|(n, counts)| {
            let counts = counts.into_iter().map(|(v, c)| (Label::new(v), c)).collect();
            LevelProfile::from_counts(n, counts)
        })
        .collect())
}

pub fn parametric_totals(rule: &ParametricRule, depth: usize) -> Result<Vec<BigInt>> {
    Ok(expand_parametric(rule, depth)?.into_iter().map(|p| p.total).collect())
}

/// Polynomial in `n`, lowest degree first.
pub type Poly = Vec<Ratio<i64>>;

/// Level-indexed rule for `f_n = p_1(n) f_{n-1} + ... + p_m(n) f_{n-m}`
/// with `f_0 = 1`: axiom `(0)` and `(k) =j=> (k+j)^{p_j(k+j)}`.
///
/// Each `p_j` must be affine and integer-valued on the integers. A negative
/// constant `p_j` becomes a marked successor.
pub fn holonomic_to_level_indexed(polys: &[Poly]) -> Result<ParametricRule> {
    let mut schemas = Vec::new();
    for (i, p) in polys.iter().enumerate() {
        let j = i + 1;
        let mut p: Vec<Ratio<i64>> = p.clone();
        while p.last().is_some_and(Zero::is_zero) {
            p.pop();
        }
        if p.len() > 2 {
            return Err(Error::NonAffineCoefficient(j));
        }
        let c0 = p.first().copied().unwrap_or_default();
        let c1 = p.get(1).copied().unwrap_or_default();
        // p_j(k + j) = c1 k + (c0 + c1 j)
        let constant = c0 + c1 * Ratio::from_integer(j as i64);
        if !c1.is_integer() || !constant.is_integer() {
            return Err(Error::NonIntegerEvaluation {
                index: j,
                detail: format!("p_{j}(k+{j}) = ({c1})k + ({constant})"),
            });
        }
        let mult = Affine::new(c1.to_integer(), constant.to_integer());
        if mult == Affine::constant(0) {
            continue;
        }
        let target = Affine::new(1, j as i64);
        let spec = if mult.coeff == 0 && mult.constant < 0 {
            SuccessorSpec::single(target, Affine::constant(-mult.constant)).marked()
        } else {
            SuccessorSpec::single(target, mult)
        };
        schemas.push(Schema { jump: j as u32, guard: None, successors: vec![spec] });
    }
    Ok(ParametricRule { axiom: 0, schemas, level_indexed: true })
}

pub fn print_parametric(rule: &ParametricRule) -> String {
    let mut out = format!("axiom ({})\n", rule.axiom);
    if rule.level_indexed {
        out.push_str("level-indexed\n");
    }
    for schema in &rule.schemas {
        let (parent, guard) = match schema.guard {
            Some(g) => match g.as_value() {
                Some(v) => (v.to_string(), None),
                None => ("k".to_string(), Some(g)),
            },
            None => ("k".to_string(), None),
        };
        let arrow = if schema.jump == 1 { "->".to_string() } else { format!("={}=>", schema.jump) };
        out.push_str(&format!("({parent}) {arrow}"));
        for s in &schema.successors {
            out.push_str(" (");
            if s.marked {
                out.push('~');
            }
            match s.label {
                SuccessorLabel::Single(e) => out.push_str(&e.to_string()),
                SuccessorLabel::Range(a, b) => out.push_str(&format!("{a}..{b}")),
            }
            out.push(')');
            let m = s.multiplicity;
            if m.coeff == 0 && m.constant != 1 {
                out.push_str(&format!("^{}", m.constant));
            } else if m.coeff != 0 {
                out.push_str(&format!("^{{{m}}}"));
            }
        }
        if let Some(g) = guard {
            out.push_str(&format!(" when {g}"));
        }
        out.push('\n');
    }
    out
}

/// Heuristic used by the CLI to pick between the two rule languages.
pub fn looks_parametric(text: &str) -> bool {
    text.lines().map(|l| l.split('#').next().unwrap_or("")).any(|l| {
        let t = l.trim();
        t == "level-indexed" || t.contains('k') || t.contains("..")
    })
}

pub fn parse_parametric(text: &str) -> Result<ParametricRule> {
    let mut axiom = None;
    let mut level_indexed = false;
    let mut schemas = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let content = raw.split('#').next().unwrap_or("");
        let mut cur = Cursor::new(content, idx + 1);
        cur.skip_ws();
        if cur.at_end() {
            continue;
        }
        if cur.eat_word("axiom") {
            cur.skip_ws();
            cur.expect('(')?;
            cur.skip_ws();
            let v = cur.integer()?;
            cur.skip_ws();
            cur.expect(')')?;
            cur.skip_ws();
            cur.expect_end()?;
            if axiom.replace(v).is_some() {
                return Err(cur.error("axiom given twice"));
            }
            continue;
        }
        if cur.eat_word("level-indexed") {
            cur.skip_ws();
            cur.expect_end()?;
            level_indexed = true;
            continue;
        }
        schemas.push(cur.schema()?);
    }
    let axiom = axiom.ok_or(Error::Syntax {
        line: text.lines().count().max(1),
        column: 1,
        message: "missing axiom line".into(),
    })?;
    Ok(ParametricRule { axiom, schemas, level_indexed })
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

    fn peek_at(&self, offset: usize) -> Option<char> {
        self.chars.get(self.pos + offset).copied()
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

    fn eat_str(&mut self, s: &str) -> bool {
        let n = s.chars().count();
        let ok = self.chars.len() >= self.pos + n && self.chars[self.pos..self.pos + n].iter().copied().eq(s.chars());
        if ok {
            self.pos += n;
        }
        ok
    }

    fn eat_word(&mut self, w: &str) -> bool {
        let start = self.pos;
        if self.eat_str(w) && self.peek().is_none_or(char::is_whitespace) {
            return true;
        }
        self.pos = start;
        false
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

    fn unsigned(&mut self) -> Option<i64> {
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        if start == self.pos {
            return None;
        }
        self.chars[start..self.pos].iter().collect::<String>().parse().ok()
    }

    fn integer(&mut self) -> Result<i64> {
        let start = self.pos;
        let neg = self.eat('-');
        if !neg {
            self.eat('+');
        }
        match self.unsigned() {
            Some(v) => Ok(if neg { -v } else { v }),
            None => {
                self.pos = start;
                Err(self.error("expected an integer"))
            }
        }
    }

    /// Sum of terms `c`, `k`, `ck`, `c*k`, each with an optional sign.
    fn affine(&mut self) -> Result<Affine> {
        let mut acc = Affine::constant(0);
        let mut first = true;
        loop {
            self.skip_ws();
            let sign = if self.eat('-') {
                -1
            } else if self.eat('+') || first {
                1
            } else {
                break;
            };
            self.skip_ws();
            let start = self.pos;
            let c = self.unsigned();
            self.skip_ws();
            if c.is_some() {
                self.eat('*');
                self.skip_ws();
            }
            let has_k = self.eat('k');
            let (coeff, constant) = match (c, has_k) {
                (None, false) => {
                    self.pos = start;
                    return Err(self.error("expected an integer or 'k'"));
                }
                (c, true) => (c.unwrap_or(1), 0),
                (Some(c), false) => (0, c),
            };
            acc.coeff = acc
                .coeff
                .checked_add(sign * coeff)
                .ok_or_else(|| self.error("coefficient out of range"))?;
            acc.constant = acc
                .constant
                .checked_add(sign * constant)
                .ok_or_else(|| self.error("constant out of range"))?;
            first = false;
        }
        Ok(acc)
    }

    fn relation(&mut self) -> Result<Relation> {
        for (s, r) in [
            (">=", Relation::Ge),
            ("<=", Relation::Le),
            ("==", Relation::Eq),
            ("!=", Relation::Ne),
            (">", Relation::Gt),
            ("<", Relation::Lt),
        ] {
            if self.eat_str(s) {
                return Ok(r);
            }
        }
        Err(self.error("expected a comparison"))
    }

    fn arrow(&mut self) -> Result<u32> {
        if self.eat_str("->") {
            return Ok(1);
        }
        if self.eat('=') {
            let j = self.integer()?;
            if !self.eat_str("=>") {
                return Err(self.error("expected '=>'"));
            }
            return u32::try_from(j)
                .ok()
                .filter(|&j| j >= 1)
                .ok_or_else(|| self.error("jump must be a positive integer"));
        }
        Err(self.error("expected '->' or '=J=>'"))
    }

    fn schema(&mut self) -> Result<Schema> {
        self.expect('(')?;
        self.skip_ws();
        let mut guard = if self.eat('k') {
            None
        } else {
            Some(Guard::value_is(self.integer()?))
        };
        self.skip_ws();
        self.expect(')')?;
        self.skip_ws();
        let jump = self.arrow()?;
        let mut successors = Vec::new();
        loop {
            self.skip_ws();
            if self.at_end() {
                break;
            }
            if self.eat_word("when") {
                if guard.is_some() {
                    return Err(self.error("a concrete parent cannot also have a guard"));
                }
                let lhs = self.affine()?;
                self.skip_ws();
                let rel = self.relation()?;
                let rhs = self.affine()?;
                self.skip_ws();
                self.expect_end()?;
                guard = Some(Guard::new(lhs, rel, rhs));
                break;
            }
            successors.push(self.successor()?);
        }
        Ok(Schema { jump, guard, successors })
    }

    fn successor(&mut self) -> Result<SuccessorSpec> {
        self.expect('(')?;
        self.skip_ws();
        let marked = self.eat('~');
        let lo = self.affine()?;
        self.skip_ws();
        let label = if self.peek() == Some('.') && self.peek_at(1) == Some('.') {
            self.pos += 2;
            let hi = self.affine()?;
            SuccessorLabel::Range(lo, hi)
        } else {
            SuccessorLabel::Single(lo)
        };
        self.skip_ws();
        self.expect(')')?;
        let multiplicity = if self.eat('^') {
            if self.eat('{') {
                let m = self.affine()?;
                self.skip_ws();
                self.expect('}')?;
                m
            } else if self.eat('k') {
                Affine::K
            } else {
                Affine::constant(self.integer()?)
            }
        } else {
            Affine::constant(1)
        };
        Ok(SuccessorSpec { label, marked, multiplicity })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ints(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    fn r(n: i64) -> Ratio<i64> {
        Ratio::from_integer(n)
    }

    const INVOLUTIONS_LEVELS: &str = "axiom (0)\nlevel-indexed\n(k) -> (k+1)\n(k) =2=> (k+2)^{k+1}\n";
    const INVOLUTIONS: &str = "axiom (1)\n(k) -> (k-1)^{k-1} (k+1)\n";

    #[test]
    fn affine_parse_and_print() {
        let mut c = Cursor::new("2*k - 3", 1);
        assert_eq!(c.affine().unwrap(), Affine::new(2, -3));
        let mut c = Cursor::new("-k+1", 1);
        assert_eq!(c.affine().unwrap(), Affine::new(-1, 1));
        let mut c = Cursor::new("3k", 1);
        assert_eq!(c.affine().unwrap(), Affine::new(3, 0));
        assert_eq!(Affine::new(2, -3).to_string(), "2*k-3");
        assert_eq!(Affine::new(-1, 0).to_string(), "-k");
        assert_eq!(Affine::constant(-4).to_string(), "-4");
    }

    #[test]
    fn involutions() {
        let level_rule = parse_parametric(INVOLUTIONS_LEVELS).unwrap();
        let ordinary_rule = parse_parametric(INVOLUTIONS).unwrap();
        let want = ints(&[1, 1, 2, 4, 10, 26, 76, 232]);
        assert_eq!(parametric_totals(&level_rule, 7).unwrap(), want);
        assert_eq!(parametric_totals(&ordinary_rule, 7).unwrap(), want);
    }

    #[test]
    fn holonomic_reproduces_level_indexed_rule() {
        let rule = holonomic_to_level_indexed(&[vec![r(1)], vec![r(-1), r(1)]]).unwrap();
        assert_eq!(rule, parse_parametric(INVOLUTIONS_LEVELS).unwrap());
        assert_eq!(print_parametric(&rule), INVOLUTIONS_LEVELS);
    }

    #[test]
    fn holonomic_constant_and_marked() {
        let rule = holonomic_to_level_indexed(&[vec![r(3)]]).unwrap();
        assert_eq!(parametric_totals(&rule, 5).unwrap(), ints(&[1, 3, 9, 27, 81, 243]));
        // f_n = 2 f_{n-1} - f_{n-2} gives n + 1
        let rule = holonomic_to_level_indexed(&[vec![r(2)], vec![r(-1)]]).unwrap();
        assert!(rule.schemas[1].successors[0].marked);
        assert_eq!(parametric_totals(&rule, 5).unwrap(), ints(&[1, 2, 3, 4, 5, 6]));
    }

    #[test]
    fn holonomic_errors() {
        assert_eq!(
            holonomic_to_level_indexed(&[vec![r(0), r(0), r(1)]]),
            Err(Error::NonAffineCoefficient(1))
        );
        assert!(matches!(
            holonomic_to_level_indexed(&[vec![r(0), Ratio::new(1, 2)]]),
            Err(Error::NonIntegerEvaluation { index: 1, .. })
        ));
        // (n - 1)/2 at n = k + 1 is k/2: not integral
        assert!(holonomic_to_level_indexed(&[vec![Ratio::new(-1, 2), Ratio::new(1, 2)]]).is_err());
        // trailing zero coefficients are fine
        assert!(holonomic_to_level_indexed(&[vec![r(1), r(0), r(0)]]).is_ok());
    }

    #[test]
    fn powers_of_two() {
        let rule = parse_parametric("axiom (2)\n(k) -> (1)^{k-1} (k+1)").unwrap();
        assert_eq!(parametric_totals(&rule, 5).unwrap(), ints(&[1, 2, 4, 8, 16, 32]));
    }

    #[test]
    fn catalan_with_marks() {
        let rule = parse_parametric("axiom (2)\n(k) -> (2..k) (k+1) (k)\n(k) -> (~k)").unwrap();
        assert_eq!(parametric_totals(&rule, 4).unwrap(), ints(&[1, 2, 5, 14, 42]));
    }

    #[test]
    fn guards_and_concrete_parents() {
        let rule = parse_parametric("axiom (1)\n(k) -> (k+1) when k<3\n(3) -> (3)^2").unwrap();
        assert_eq!(rule.schemas[0].guard, Some(Guard { coeff: 1, relation: Relation::Lt, bound: 3 }));
        assert_eq!(rule.schemas[1].guard, Some(Guard::value_is(3)));
        assert_eq!(parametric_totals(&rule, 4).unwrap(), ints(&[1, 1, 1, 2, 4]));
        assert_eq!(parse_parametric(&print_parametric(&rule)).unwrap(), rule);
        let g = Guard::new(Affine::new(2, 1), Relation::Ge, Affine::new(1, 4));
        assert_eq!(g, Guard { coeff: 1, relation: Relation::Ge, bound: 3 });
    }

    #[test]
    fn negative_multiplicity_is_reported() {
        let rule = parse_parametric("axiom (1)\n(k) -> (k+1) (k)^{k-2}").unwrap();
        assert_eq!(
            expand_parametric(&rule, 3),
            Err(Error::NegativeMultiplicity { label: 1, schema: 0, multiplicity: -1 })
        );
    }

    #[test]
    fn level_index_is_checked() {
        let rule = parse_parametric("axiom (0)\nlevel-indexed\n(k) -> (k+2)").unwrap();
        assert_eq!(expand_parametric(&rule, 2), Err(Error::LevelMismatch { label: 2, level: 1 }));
    }

    #[test]
    fn unfold_matches_expansion() {
        for text in [INVOLUTIONS_LEVELS, INVOLUTIONS, "axiom (2)\n(k) -> (2..k) (k+1) (k)\n(k) -> (~k)"] {
            let rule = parse_parametric(text).unwrap();
            let finite = rule.unfold(6).unwrap();
            assert_eq!(crate::tree::level_totals(&finite, 6), parametric_totals(&rule, 6).unwrap());
        }
    }

    #[test]
    fn syntax_errors() {
        assert!(matches!(parse_parametric("(k) -> (k)"), Err(Error::Syntax { .. })));
        assert!(matches!(parse_parametric("axiom (1)\n(k) -> (k+)"), Err(Error::Syntax { line: 2, .. })));
        assert!(matches!(parse_parametric("axiom (1)\n(3) -> (k) when k>1"), Err(Error::Syntax { .. })));
        assert!(matches!(parse_parametric("axiom (1)\n(k) =0=> (k)"), Err(Error::Syntax { .. })));
    }

    #[test]
    fn detects_language() {
        assert!(looks_parametric(INVOLUTIONS));
        assert!(!looks_parametric("axiom (3)\n(3) -> (3)^3 # k here is a comment"));
    }
}
