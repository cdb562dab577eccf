//! Recurrence to succession rule compilation.
//!
//! The pipeline has three stages for default initial conditions:
//!
//! 1. [`to_extended_rule`]: a single label `(a_1)` with one jump-`i` branch
//!    of exponent `a_i` per coefficient. Negative exponents are marks.
//! 2. [`eliminate_jumps`]: a chain of labels valued by the partial sums
//!    `S_i = a_1 + ... + a_i`; jump-free, possibly marked.
//! 3. [`to_ordinary_rule`]: for `a_1 >= 1`, the `(q_i, r_i)` form. With a
//!    [`PositivityWitness`] every exponent is nonnegative and the rule is
//!    ordinary.
//!
//! Explicit initial conditions go through [`compile_generic`], which builds
//! a short chain of prefix labels in front of the stage-3 rule.
//!
//! Internally, a node of any of these trees can be described by its
//! *pending vector* `P = (P_1, .., P_k)`: the number of sons it is
//! responsible for at relative levels `1..=k`, counting each son as a plain
//! `(a_1)` node. The sons of a node with pending vector `P` have pending
//! vectors summing to `P_1 * A + shift(P)`, where `A = (a_1, .., a_k)` and
//! `shift` drops the first entry. Two nodes at the same level may trade
//! pending vectors without changing any level count.

use std::collections::HashMap;
use std::fmt;

use num_bigint::BigInt;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numseq::{eval_sequence, Recurrence};
use crate::rule::{Branch, Label, LabelAllocator, Production, SuccessionRule};
use crate::tree::level_totals;

fn checked_label(v: i128) -> Result<i64> {
    i64::try_from(v).map_err(|_| Error::Overflow(format!("label value {v} out of range")))
}

fn partial_sums(coeffs: &[i64]) -> Vec<i128> {
    coeffs
        .iter()
        .scan(0i128, |acc, &a| {
            *acc += a as i128;
            Some(*acc)
        })
        .collect()
}

/// Jump-`i` branches `(a_1)^{a_i}` for every nonzero `a_i`.
fn extended_branches(a1: Label, coeffs: &[i64]) -> Vec<Branch> {
    coeffs
        .iter()
        .enumerate()
        .map(|(i, &a)| Branch::new(i as u32 + 1, a1, a))
        .collect()
}

/// Recurrence rewritten as a rule with jumps and marks.
///
/// With explicit initial conditions the axiom gets its own production:
/// jump 1 gives `(a_1)^{h_1}`, jump `i < k` gives
/// `(a_1)^{h_i - sum_{j<i} h_j a_{i-j}}`, jump `k` gives `(a_1)^{a_k}`.
pub fn to_extended_rule(rec: &Recurrence) -> Result<SuccessionRule> {
    let coeffs = rec.small_coeffs()?;
    let mut alloc = LabelAllocator::default();
    let a1 = Label::new(coeffs[0]);
    alloc.reserve(a1);
    let core = Production::new(a1, extended_branches(a1, &coeffs))?;

    match rec.small_inits()? {
        None => SuccessionRule::new(a1, [core]),
        Some(h) if h.is_empty() => SuccessionRule::new(a1, [core]),
        Some(h) => {
            let root = root_pending(&coeffs, &h)?;
            let axiom = alloc.fresh(h[0]);
            let branches = root
                .iter()
                .enumerate()
                .map(|(i, &e)| Ok(Branch::new(i as u32 + 1, a1, checked_label(e)?)))
                .collect::<Result<Vec<_>>>()?;
            SuccessionRule::new(axiom, [Production::new(axiom, branches)?, core])
        }
    }
}

/// Pending vector of the root for explicit initial conditions.
fn root_pending(coeffs: &[i64], h: &[i64]) -> Result<Vec<i128>> {
    let k = coeffs.len();
    let mut e = Vec::with_capacity(k);
    e.push(h[0] as i128);
    for i in 2..k {
        let mut v = h[i - 1] as i128;
        for j in 1..i {
            v -= h[j - 1] as i128 * coeffs[i - j - 1] as i128;
        }
        e.push(v);
    }
    e.push(coeffs[k - 1] as i128);
    Ok(e)
}

/// Jump-free rule over the partial sums:
/// `(S_i) -> (S_{i+1}) (a_1)^{S_i - 1}` for `i < k` and
/// `(S_k) -> (S_k) (a_1)^{S_k - 1}`.
///
/// Labels with equal values (or a zero partial sum, which would collide with
/// the sink) are told apart by tags.
pub fn eliminate_jumps(rec: &Recurrence) -> Result<SuccessionRule> {
    if !rec.inits().is_default() {
        return Err(Error::DefaultInitsRequired);
    }
    let coeffs = rec.small_coeffs()?;
    let sums = partial_sums(&coeffs);
    let mut alloc = LabelAllocator::default();
    let labels = sums
        .iter()
        .map(|&s| Ok(alloc.fresh(checked_label(s)?)))
        .collect::<Result<Vec<_>>>()?;
    let a1 = labels[0];
    let k = labels.len();
    let productions = (0..k)
        .map(|i| {
            let next = labels[(i + 1).min(k - 1)];
            let rest = checked_label(sums[i] - 1)?;
            Production::new(labels[i], [Branch::new(1, next, 1), Branch::new(1, a1, rest)])
        })
        .collect::<Result<Vec<_>>>()?;
    SuccessionRule::new(a1, productions)
}

/// `(q_i, r_i)` for `i = 2..=k`, stored from index 0.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct QrDecomposition {
    pub q: Vec<i64>,
    pub r: Vec<i64>,
}

impl QrDecomposition {
    pub fn q_at(&self, i: usize) -> i64 {
        self.q[i - 2]
    }

    pub fn r_at(&self, i: usize) -> i64 {
        self.r[i - 2]
    }
}

fn min_q(sum: i128, a1: i128) -> i128 {
    if sum > 0 {
        0
    } else {
        (-sum) / a1 + 1
    }
}

/// Decomposition `|S_i| = q_i a_1 - r_i` with `q_i, r_i >= 1` when
/// `S_i <= 0`, else `q_i = 0, r_i = S_i`. Without `q_choice` the smallest
/// valid `q_i` is used.
pub fn qr_for(coeffs: &[i64], q_choice: Option<&[i64]>) -> Result<QrDecomposition> {
    let a1 = coeffs[0];
    if a1 < 1 {
        return Err(Error::A1NotPositive(a1));
    }
    let sums = partial_sums(coeffs);
    let k = coeffs.len();
    if let Some(q) = q_choice {
        if q.len() != k - 1 {
            return Err(Error::InvalidQ(format!("expected {} values, got {}", k - 1, q.len())));
        }
    }
    let mut qr = QrDecomposition { q: Vec::new(), r: Vec::new() };
    for i in 2..=k {
        let s = sums[i - 1];
        let q = match q_choice {
            None => min_q(s, a1 as i128),
            Some(choice) => {
                let q = choice[i - 2] as i128;
                if s > 0 && q != 0 {
                    return Err(Error::InvalidQ(format!("q_{i} must be 0 since S_{i} = {s} > 0")));
                }
                if s <= 0 && q < min_q(s, a1 as i128) {
                    return Err(Error::InvalidQ(format!(
                        "q_{i} = {q} leaves r_{i} = {} < 1 (S_{i} = {s})",
                        s + q * a1 as i128
                    )));
                }
                q
            }
        };
        qr.q.push(checked_label(q)?);
        qr.r.push(checked_label(s + q * a1 as i128)?);
    }
    Ok(qr)
}

/// Left-hand sides of the positivity inequalities for a given `q`:
/// `a_1 - (q_2 + 1)`, then `r_i - (q_i (q_2 + 1) + q_{i+1} + 1)` for
/// `2 <= i < k`, and `r_k - (q_k (q_2 + 1) + q_k + 1)`.
///
/// These are also the exponents of `(a_1)` in the ordinary rule.
pub fn slack(coeffs: &[i64], qr: &QrDecomposition) -> Vec<i64> {
    let k = coeffs.len();
    let a1 = coeffs[0] as i128;
    if k == 1 {
        return vec![(a1 - 1) as i64];
    }
    let q = |i: usize| qr.q_at(i) as i128;
    let r = |i: usize| qr.r_at(i) as i128;
    let mut out = vec![(a1 - (q(2) + 1)) as i64];
    for i in 2..=k {
        let next = if i < k { q(i + 1) } else { q(k) };
        out.push((r(i) - (q(i) * (q(2) + 1) + next + 1)) as i64);
    }
    out
}

/// Output of [`to_ordinary_rule`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrdinaryRule {
    pub rule: SuccessionRule,
    pub qr: QrDecomposition,
    /// Exponent of `(a_1)` in the production of `(a_1)`, `(r_2)`, .., `(r_k)`.
    pub exponents: Vec<i64>,
    /// False when some exponent is negative, i.e. the rule still has marks.
    pub is_ordinary: bool,
}

/// Labels of the `(q, r)` rule in production order: `(a_1)`, `(r_2)`, ...
fn qr_labels(a1: i64, qr: &QrDecomposition, alloc: &mut LabelAllocator) -> Vec<Label> {
    let mut labels = vec![alloc.fresh(a1)];
    labels.extend(qr.r.iter().map(|&r| alloc.fresh(r)));
    labels
}

/// Mark-free rule for `a_1 >= 1`:
///
/// ```text
/// (a_1) -> (0)^{q_2} (r_2) (a_1)^{e_1}
/// (r_i) -> ((0)^{q_2} (r_2))^{q_i} (0)^{q_{i+1}} (r_{i+1}) (a_1)^{e_i}   2 <= i < k
/// (r_k) -> ((0)^{q_2} (r_2))^{q_k} (0)^{q_k} (r_k) (a_1)^{e_k}
/// ```
///
/// where the `e_i` are [`slack`]. `(0)` has no sons.
pub fn to_ordinary_rule(rec: &Recurrence, qr: &QrDecomposition) -> Result<OrdinaryRule> {
    if !rec.inits().is_default() {
        return Err(Error::DefaultInitsRequired);
    }
    let coeffs = rec.small_coeffs()?;
    // revalidate: the caller may have built qr by hand
    let qr = qr_for(&coeffs, Some(&qr.q))?;
    let mut alloc = LabelAllocator::default();
    let labels = qr_labels(coeffs[0], &qr, &mut alloc);
    let rule = build_qr_rule(&coeffs, &qr, &labels)?;
    let exponents = slack(&coeffs, &qr);
    let is_ordinary = exponents.iter().all(|&e| e >= 0);
    Ok(OrdinaryRule { rule, qr, exponents, is_ordinary })
}

fn qr_productions(coeffs: &[i64], qr: &QrDecomposition, labels: &[Label]) -> Result<Vec<Production>> {
    let k = coeffs.len();
    let a1 = labels[0];
    let exps = slack(coeffs, qr);
    let zero = Label::SINK;
    if k == 1 {
        return Ok(vec![Production::new(a1, [Branch::new(1, a1, 1), Branch::new(1, a1, exps[0])])?]);
    }
    let q = |i: usize| qr.q_at(i);
    let r_label = |i: usize| labels[i - 1];
    let mut prods = vec![Production::new(
        a1,
        [Branch::new(1, zero, q(2)), Branch::new(1, r_label(2), 1), Branch::new(1, a1, exps[0])],
    )?];
    for i in 2..=k {
        let (next_q, next) = if i < k { (q(i + 1), r_label(i + 1)) } else { (q(k), r_label(k)) };
        prods.push(Production::new(
            r_label(i),
            [
                Branch::new(1, zero, q(i) * q(2)),
                Branch::new(1, r_label(2), q(i)),
                Branch::new(1, zero, next_q),
                Branch::new(1, next, 1),
                Branch::new(1, a1, exps[i - 1]),
            ],
        )?);
    }
    Ok(prods)
}

fn build_qr_rule(coeffs: &[i64], qr: &QrDecomposition, labels: &[Label]) -> Result<SuccessionRule> {
    SuccessionRule::new(labels[0], qr_productions(coeffs, qr, labels)?)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PositivityWitness {
    pub qr: QrDecomposition,
    pub slack: Vec<i64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum UnknownReason {
    A1NotPositive,
    ExplicitInits,
    NoAssignment,
    SearchBudgetExhausted,
}

impl fmt::Display for UnknownReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            UnknownReason::A1NotPositive => "a_1 < 1, marks cannot be removed",
            UnknownReason::ExplicitInits => "test applies to default initial conditions only",
            UnknownReason::NoAssignment => "no q assignment satisfies the inequalities",
            UnknownReason::SearchBudgetExhausted => "search budget exhausted",
        })
    }
}

/// Result of the sufficient positivity test. `Unknown` never means the
/// sequence has a nonpositive term.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum Positivity {
    Witness(PositivityWitness),
    Unknown { reason: UnknownReason },
}

impl Positivity {
    pub fn witness(&self) -> Option<&PositivityWitness> {
        match self {
            Positivity::Witness(w) => Some(w),
            Positivity::Unknown { .. } => None,
        }
    }
}

pub const DEFAULT_SEARCH_BUDGET: u64 = 5_000_000;

pub fn positivity_check(rec: &Recurrence) -> Positivity {
    positivity_check_with_budget(rec, DEFAULT_SEARCH_BUDGET)
}

/// Depth-first search over `q_2, .., q_k` in lexicographic order. `q_i` is
/// 0 when `S_i > 0`; otherwise it starts at the least value giving
/// `r_i >= 1` and runs up to the bound implied by the previous inequality
/// (`a_1 - 1` for `q_2`). The first assignment satisfying every inequality
/// is returned.
pub fn positivity_check_with_budget(rec: &Recurrence, budget: u64) -> Positivity {
    if !rec.inits().is_default() {
        return Positivity::Unknown { reason: UnknownReason::ExplicitInits };
    }
    let Ok(coeffs) = rec.small_coeffs() else {
        return Positivity::Unknown { reason: UnknownReason::SearchBudgetExhausted };
    };
    if coeffs[0] < 1 {
        return Positivity::Unknown { reason: UnknownReason::A1NotPositive };
    }
    let mut search = Search {
        a1: coeffs[0] as i128,
        sums: partial_sums(&coeffs),
        q: Vec::with_capacity(coeffs.len()),
        visited: 0,
        budget,
    };
    match search.descend() {
        Ok(true) => {
            let q: Vec<i64> = search.q.iter().map(|&v| v as i64).collect();
            match qr_for(&coeffs, Some(&q)) {
                Ok(qr) => {
                    let slack = slack(&coeffs, &qr);
                    Positivity::Witness(PositivityWitness { qr, slack })
                }
                Err(_) => Positivity::Unknown { reason: UnknownReason::SearchBudgetExhausted },
            }
        }
        Ok(false) => Positivity::Unknown { reason: UnknownReason::NoAssignment },
        Err(()) => Positivity::Unknown { reason: UnknownReason::SearchBudgetExhausted },
    }
}

struct Search {
    a1: i128,
    sums: Vec<i128>,
    /// q_2, q_3, ... chosen so far
    q: Vec<i128>,
    visited: u64,
    budget: u64,
}

impl Search {
    fn k(&self) -> usize {
        self.sums.len()
    }

    fn s(&self, i: usize) -> i128 {
        self.sums[i - 1]
    }

    fn q(&self, i: usize) -> i128 {
        self.q[i - 2]
    }

    /// Inequality `i` once `q_{i+1}` (or `q_k` for `i = k`) is known.
    fn lhs(&self, i: usize) -> i128 {
        if i == 1 {
            return self.a1 - (self.q(2) + 1);
        }
        let next = if i < self.k() { self.q(i + 1) } else { self.q(i) };
        self.s(i) + self.q(i) * self.a1 - (self.q(i) * (self.q(2) + 1) + next + 1)
    }

    fn descend(&mut self) -> Result<bool, ()> {
        let k = self.k();
        if k == 1 {
            return Ok(self.a1 >= 1);
        }
        let i = self.q.len() + 2;
        if i > k {
            return Ok(self.lhs(k) >= 0);
        }
        self.visited += 1;
        if self.visited > self.budget {
            return Err(());
        }
        let s = self.s(i);
        let (lo, hi) = if s > 0 {
            (0, 0)
        } else if i == 2 {
            (min_q(s, self.a1), self.a1 - 1)
        } else {
            let prev = self.q(i - 1);
            let bound = self.s(i - 1) + prev * self.a1 - prev * (self.q(2) + 1) - 1;
            (min_q(s, self.a1), bound)
        };
        let mut v = lo;
        while v <= hi {
            self.q.push(v);
            // inequality i-1 is now fully determined
            if self.lhs(i - 1) >= 0 && self.descend()? {
                return Ok(true);
            }
            self.q.pop();
            v += 1;
        }
        Ok(false)
    }
}

/// Pending vectors of the `(q, r)` rule labels, in [`qr_labels`] order.
fn qr_states(coeffs: &[i64], qr: &QrDecomposition) -> Vec<Vec<i128>> {
    let a: Vec<i128> = coeffs.iter().map(|&c| c as i128).collect();
    let k = a.len();
    let mut states = vec![a.clone()];
    if k == 1 {
        return states;
    }
    let q = |i: usize| qr.q_at(i) as i128;
    // (r_2): q_2 + 1 plain nodes merged, one of them carrying shift(A)
    let mut cur = axpy(&scale(&a, q(2) + 1), &shift(&a), 1);
    states.push(cur.clone());
    for i in 2..k {
        cur = axpy(&axpy(&scale(&a, q(i + 1) + 1), &shift(&cur), 1), &shift(&a), -q(i));
        states.push(cur.clone());
    }
    states
}

fn scale(v: &[i128], c: i128) -> Vec<i128> {
    v.iter().map(|x| x * c).collect()
}

fn axpy(x: &[i128], y: &[i128], c: i128) -> Vec<i128> {
    x.iter().zip(y).map(|(a, b)| a + c * b).collect()
}

fn shift(v: &[i128]) -> Vec<i128> {
    let mut s: Vec<i128> = v[1..].to_vec();
    s.push(0);
    s
}

/// Upper bound on the number of prefix labels built by [`compile_generic`].
fn prefix_step_cap(k: usize) -> usize {
    4 * k + 16
}

/// Ordinary rule for explicit initial conditions.
///
/// The axiom starts with the pending vector of the extended rule's root.
/// Each prefix label has sons `(0)^{z + w q_2} (r_2)^w (a_1)^c` plus one
/// *carrier* label which takes the remaining pending vector
/// `(z + 1) A + shift(P) - w shift(A)`. `w` and `z` follow the `(q, r)`
/// rule being joined; `z` is raised when the carrier would otherwise have
/// no sons. The chain stops once the carrier's pending vector equals that
/// of a label of the ordinary rule for the default-condition core, or
/// repeats an earlier prefix label.
pub fn compile_generic(rec: &Recurrence) -> Result<SuccessionRule> {
    let coeffs = rec.small_coeffs()?;
    let Some(h) = rec.small_inits()? else {
        return Err(Error::ExplicitInitsRequired);
    };
    if coeffs[0] < 1 {
        return Err(Error::A1NotPositive(coeffs[0]));
    }
    let core_rec = rec.core();
    let witness = match positivity_check(&core_rec) {
        Positivity::Witness(w) => w,
        Positivity::Unknown { .. } => return Err(Error::CoreNotPositive),
    };
    if h.is_empty() {
        return Ok(to_ordinary_rule(&core_rec, &witness.qr)?.rule);
    }

    let qr = witness.qr;
    let k = coeffs.len();
    let a: Vec<i128> = coeffs.iter().map(|&c| c as i128).collect();
    let a1 = a[0];
    let a2 = a[1];
    let q = |i: usize| qr.q_at(i) as i128;

    let mut alloc = LabelAllocator::default();
    let core_labels = qr_labels(coeffs[0], &qr, &mut alloc);
    let core_states = qr_states(&coeffs, &qr);
    let mut productions = qr_productions(&coeffs, &qr, &core_labels)?;
    let core_of: HashMap<Vec<i128>, Label> =
        core_states.iter().cloned().zip(core_labels.iter().copied()).rev().collect();

    let axiom = alloc.fresh(h[0]);
    let mut prefix: Vec<Production> = Vec::new();
    let mut seen: HashMap<(Vec<i128>, usize), Label> = HashMap::new();
    let mut label = axiom;
    let mut state = root_pending(&coeffs, &h)?;
    // index of the (q, r) label whose production this prefix label imitates
    let mut target = 1usize;

    for _ in 0..prefix_step_cap(k) {
        let value = state[0];
        if value < 1 {
            return Err(Error::PrefixNotEliminable(format!(
                "label {label} would need {value} sons to carry its pending terms"
            )));
        }
        let z_core = if target < k { q(target + 1) } else { q(k) };
        let w_core = if target >= 2 { q(target) } else { 0 };
        let mut candidates = vec![w_core];
        candidates.extend((0..=value.min(64)).filter(|&w| w != w_core));

        let mut choice = None;
        for w in candidates {
            let base = a1 + state.get(1).copied().unwrap_or(0) - w * a2;
            let z_needed = if base >= 1 { 0 } else { (1 - base + a1 - 1) / a1 };
            let z = z_core.max(z_needed);
            let plain = value - 1 - z - w * (q(2) + 1);
            if plain < 0 {
                continue;
            }
            let carrier = axpy(&axpy(&scale(&a, z + 1), &shift(&state), 1), &shift(&a), -w);
            choice = Some((z, w, plain, carrier));
            break;
        }
        let Some((z, w, plain, carrier)) = choice else {
            return Err(Error::PrefixNotEliminable(format!(
                "no admissible split of the {value} sons of {label}"
            )));
        };

        let next_target = (target + 1).min(k);
        let (next, done) = if let Some(&core) = core_of.get(&carrier) {
            (core, true)
        } else if let Some(&again) = seen.get(&(carrier.clone(), next_target)) {
            (again, true)
        } else {
            (alloc.fresh(checked_label(carrier[0])?), false)
        };

        prefix.push(Production::new(
            label,
            [
                Branch::new(1, Label::SINK, checked_label(z + w * q(2))?),
                Branch::new(1, core_labels[1], checked_label(w)?),
                Branch::new(1, next, 1),
                Branch::new(1, core_labels[0], checked_label(plain)?),
            ],
        )?);
        if done {
            prefix.append(&mut productions);
            return SuccessionRule::new(axiom, prefix);
        }
        seen.insert((carrier.clone(), next_target), next);
        label = next;
        state = carrier;
        target = next_target;
    }
    Err(Error::PrefixNotEliminable(format!(
        "prefix did not join the core within {} labels",
        prefix_step_cap(k)
    )))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Extended,
    JumpFree,
    Ordinary,
    Generic,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Extended => "extended",
            Stage::JumpFree => "jumpfree",
            Stage::Ordinary => "ordinary",
            Stage::Generic => "generic",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Compiled {
    pub stage: Stage,
    pub rule: SuccessionRule,
    /// Set for the ordinary stage.
    pub qr: Option<QrDecomposition>,
    pub is_ordinary: bool,
}

/// One pipeline stage. `Ordinary` on a recurrence with explicit initial
/// conditions means [`compile_generic`]; without `q_override` it uses the
/// positivity witness, falling back to the minimal `q` when there is none.
pub fn compile(rec: &Recurrence, stage: Stage, q_override: Option<&[i64]>) -> Result<Compiled> {
    let plain = |stage, rule: SuccessionRule| {
        let is_ordinary = rule.classify() == crate::rule::RuleKind::Ordinary;
        Ok(Compiled { stage, rule, qr: None, is_ordinary })
    };
    match stage {
        Stage::Extended => plain(stage, to_extended_rule(rec)?),
        Stage::JumpFree => plain(stage, eliminate_jumps(rec)?),
        Stage::Generic => plain(stage, compile_generic(rec)?),
        Stage::Ordinary if !rec.inits().is_default() => plain(Stage::Generic, compile_generic(rec)?),
        Stage::Ordinary => {
            let coeffs = rec.small_coeffs()?;
            let qr = match q_override {
                Some(q) => qr_for(&coeffs, Some(q))?,
                None => match positivity_check(rec) {
                    Positivity::Witness(w) => w.qr,
                    Positivity::Unknown { .. } => qr_for(&coeffs, None)?,
                },
            };
            let out = to_ordinary_rule(rec, &qr)?;
            Ok(Compiled { stage, rule: out.rule, qr: Some(out.qr), is_ordinary: out.is_ordinary })
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum StageStatus {
    Matched,
    Diverged {
        level: usize,
        #[serde(serialize_with = "crate::serde_big::one")]
        expected: BigInt,
        #[serde(serialize_with = "crate::serde_big::one")]
        actual: BigInt,
    },
    Skipped { reason: String },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StageReport {
    pub stage: Stage,
    #[serde(flatten)]
    pub status: StageStatus,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VerifyReport {
    pub depth: usize,
    #[serde(serialize_with = "crate::serde_big::many")]
    pub expected: Vec<BigInt>,
    pub stages: Vec<StageReport>,
}

impl VerifyReport {
    pub fn all_match(&self) -> bool {
        !self.stages.iter().any(|s| matches!(s.status, StageStatus::Diverged { .. }))
    }

    pub fn status(&self, stage: Stage) -> Option<&StageStatus> {
        self.stages.iter().find(|s| s.stage == stage).map(|s| &s.status)
    }
}

/// Compiles every applicable stage and compares its level totals with the
/// recurrence up to `depth`.
pub fn verify(rec: &Recurrence, depth: usize) -> VerifyReport {
    let expected = eval_sequence(rec, depth);
    let stages: &[Stage] = if rec.inits().is_default() {
        &[Stage::Extended, Stage::JumpFree, Stage::Ordinary]
    } else {
        &[Stage::Extended, Stage::Generic]
    };
    let reports = stages
        .iter()
        .map(|&stage| {
            let compiled = match stage {
                Stage::Ordinary => match positivity_check(rec) {
                    Positivity::Witness(w) => to_ordinary_rule(rec, &w.qr).map(|o| o.rule),
                    Positivity::Unknown { reason } => {
                        return StageReport {
                            stage,
                            status: StageStatus::Skipped { reason: reason.to_string() },
                        }
                    }
                },
                _ => compile(rec, stage, None).map(|c| c.rule),
            };
            let status = match compiled {
                Err(e) => StageStatus::Skipped { reason: e.to_string() },
                Ok(rule) => compare(&expected, &level_totals(&rule, depth)),
            };
            StageReport { stage, status }
        })
        .collect();
    VerifyReport { depth, expected, stages: reports }
}

fn compare(expected: &[BigInt], actual: &[BigInt]) -> StageStatus {
    match expected.iter().zip(actual).position(|(e, a)| e != a) {
        None => StageStatus::Matched,
        Some(level) => StageStatus::Diverged {
            level,
            expected: expected[level].clone(),
            actual: actual[level].clone(),
        },
    }
}
