//! Reference implementations that share no code with the library.
#![allow(dead_code)]

use std::collections::BTreeMap;

use num_bigint::BigInt;

use ecorules::{Label, SuccessionRule};

pub fn big(v: &[i64]) -> Vec<BigInt> {
    v.iter().map(|&x| BigInt::from(x)).collect()
}

/// `f_n = sum a_i f_{n-i}` with `f_0 = 1`, `f_1..f_{k-1} = h`, and
/// `f_m = 0` for `m < 0` when `h` is `None`.
pub fn recurrence_terms(a: &[i64], h: Option<&[i64]>, n: usize) -> Vec<BigInt> {
    let mut f: Vec<BigInt> = vec![BigInt::from(1)];
    if let Some(h) = h {
        f.extend(h.iter().map(|&x| BigInt::from(x)));
    }
    while f.len() <= n {
        let m = f.len();
        let mut t = BigInt::from(0);
        for (i, &ai) in a.iter().enumerate() {
            if m > i {
                t += &f[m - i - 1] * ai;
            }
        }
        f.push(t);
    }
    f.truncate(n + 1);
    f
}

/// `f_n = sum_j p_j(n) f_{n-j}`, `f_0 = 1`; `p[j-1]` lists the
/// coefficients of `p_j` lowest degree first.
pub fn holonomic_terms(p: &[Vec<i64>], n: usize) -> Vec<BigInt> {
    let mut f: Vec<BigInt> = vec![BigInt::from(1)];
    for m in 1..=n {
        let mut t = BigInt::from(0);
        for (j, poly) in p.iter().enumerate() {
            let j = j + 1;
            if m < j {
                continue;
            }
            let mut pv = BigInt::from(0);
            for c in poly.iter().rev() {
                pv = pv * m as i64 + c;
            }
            t += pv * &f[m - j];
        }
        f.push(t);
    }
    f
}

/// Dyck paths of semilength `m`, by enumerating every up/down word.
pub fn dyck_brute_force(m: usize) -> u64 {
    let len = 2 * m;
    let mut count = 0;
    for word in 0u64..(1u64 << len) {
        if word.count_ones() as usize != m {
            continue;
        }
        let mut h: i64 = 0;
        let mut ok = true;
        for i in 0..len {
            h += if word >> i & 1 == 1 { 1 } else { -1 };
            if h < 0 {
                ok = false;
                break;
            }
        }
        if ok && h == 0 {
            count += 1;
        }
    }
    count
}

/// Paths of length `n` from height 0 to height 0 staying at or above 0,
/// with steps up (1,1), down (1,-1), level (1,0) and long level (2,0).
pub fn motzkin_long_level(n: usize) -> u64 {
    // ways[x][y]
    let mut ways = vec![vec![0u64; n + 2]; n + 1];
    ways[0][0] = 1;
    for x in 0..n {
        for y in 0..=n {
            let w = ways[x][y];
            if w == 0 {
                continue;
            }
            if y < n {
                ways[x + 1][y + 1] += w;
            }
            if y >= 1 {
                ways[x + 1][y - 1] += w;
            }
            ways[x + 1][y] += w;
            if x + 2 <= n {
                ways[x + 2][y] += w;
            }
        }
    }
    ways[n][0]
}

/// Level counts of the tree built node by node. At every level each marked
/// node is paired with an unmarked node of the same label; both are removed
/// together with everything below them. Remaining nodes count +1 if
/// unmarked and -1 if marked. Returns `None` past `node_cap` nodes.
pub fn explicit_tree_counts(rule: &SuccessionRule, depth: usize, node_cap: usize) -> Option<Vec<i64>> {
    // per level: (label, marked)
    let mut levels: Vec<Vec<(Label, bool)>> = vec![Vec::new(); depth + 1];
    levels[0].push((rule.axiom().unmarked(), rule.axiom().marked));
    let mut created = 1usize;
    let mut totals = Vec::new();
    for n in 0..=depth {
        let nodes = std::mem::take(&mut levels[n]);
        let mut plus: BTreeMap<Label, usize> = BTreeMap::new();
        let mut minus: BTreeMap<Label, usize> = BTreeMap::new();
        for (l, m) in &nodes {
            *(if *m { &mut minus } else { &mut plus }).entry(*l).or_default() += 1;
        }
        let mut survivors: Vec<(Label, bool)> = Vec::new();
        let mut total = 0i64;
        let labels: std::collections::BTreeSet<Label> = plus.keys().chain(minus.keys()).copied().collect();
        for l in labels {
            let p = plus.get(&l).copied().unwrap_or(0);
            let q = minus.get(&l).copied().unwrap_or(0);
            let (marked, left) = if p >= q { (false, p - q) } else { (true, q - p) };
            total += if marked { -(left as i64) } else { left as i64 };
            survivors.extend(std::iter::repeat_n((l, marked), left));
        }
        totals.push(total);
        for (l, marked) in survivors {
            let Some(prod) = rule.production(l) else { continue };
            for b in prod.branches() {
                let target = n + b.jump as usize;
                if target > depth {
                    continue;
                }
                let son_marked = marked ^ b.successor.marked;
                for _ in 0..b.multiplicity {
                    levels[target].push((b.successor.unmarked(), son_marked));
                }
                created += b.multiplicity as usize;
                if created > node_cap {
                    return None;
                }
            }
        }
    }
    Some(totals)
}
