//! Arch configurations: non-crossing pairings of `n` boundary points with
//! `n − 2m` unpaired lines running to infinity, their enumeration, the
//! Dyck-path bijection, and classification of simulated collision sequences.
//!
//! Indices are 1-based, ordered left to right along the real line. The number
//! of configurations with `m` pairs is `d_{n,m} = C(n,m) − C(n,m−1)`.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fmt;

/// A non-crossing pairing of `{1..n}` with unpaired indices going to infinity.
///
/// Invariants (checked by [`ArchConfiguration::validate`]):
/// * pairs are disjoint, each stored as `(i, j)` with `i < j`, sorted;
/// * no two pairs cross: never `i < k < j < l` for pairs `(i,j)`, `(k,l)`;
/// * no infinity line is enclosed by a pair;
/// * pairs and infinity lines together partition `{1..n}`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ArchConfiguration {
    n: usize,
    pairs: Vec<(usize, usize)>,
    infinity: Vec<usize>,
}

impl ArchConfiguration {
    pub fn new(n: usize, mut pairs: Vec<(usize, usize)>, mut infinity: Vec<usize>) -> Result<Self> {
        for p in &mut pairs {
            if p.0 > p.1 {
                *p = (p.1, p.0);
            }
        }
        pairs.sort_unstable();
        infinity.sort_unstable();
        let cfg = ArchConfiguration { n, pairs, infinity };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of pairs `m`; `n − 2m` lines reach infinity.
    pub fn m(&self) -> usize {
        self.pairs.len()
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn infinity_lines(&self) -> &[usize] {
        &self.infinity
    }

    pub fn validate(&self) -> Result<()> {
        let mut seen = vec![false; self.n + 1];
        let mut mark = |i: usize| -> Result<()> {
            if i == 0 || i > self.n {
                return Err(Error::domain(format!("index {i} outside 1..={}", self.n)));
            }
            if seen[i] {
                return Err(Error::domain(format!("index {i} used twice")));
            }
            seen[i] = true;
            Ok(())
        };
        for &(i, j) in &self.pairs {
            if i >= j {
                return Err(Error::domain(format!("pair ({i},{j}) not ordered")));
            }
            mark(i)?;
            mark(j)?;
        }
        for &k in &self.infinity {
            mark(k)?;
        }
        if seen[1..].iter().any(|s| !s) {
            return Err(Error::domain("pairs and infinity lines must cover 1..=n"));
        }
        for (a, &(i, j)) in self.pairs.iter().enumerate() {
            for &(k, l) in &self.pairs[a + 1..] {
                let crossing = (i < k && k < j && j < l) || (k < i && i < l && l < j);
                if crossing {
                    return Err(Error::domain(format!("pairs ({i},{j}) and ({k},{l}) cross")));
                }
            }
            for &u in &self.infinity {
                if i < u && u < j {
                    return Err(Error::domain(format!(
                        "infinity line {u} enclosed by pair ({i},{j})"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Compact canonical key, e.g. `"(1,2)(3,4)"` or `"(2,3);inf=1"`.
    pub fn key(&self) -> String {
        let mut s = String::new();
        for &(i, j) in &self.pairs {
            s.push_str(&format!("({i},{j})"));
        }
        if !self.infinity.is_empty() {
            if !s.is_empty() {
                s.push(';');
            }
            s.push_str("inf=");
            let parts: Vec<String> = self.infinity.iter().map(|k| k.to_string()).collect();
            s.push_str(&parts.join(","));
        }
        s
    }
}

impl fmt::Display for ArchConfiguration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.key())
    }
}

#[derive(Serialize, Deserialize)]
struct ArchWire {
    n: usize,
    m: usize,
    pairs: Vec<(usize, usize)>,
    infinity: Vec<usize>,
}

impl Serialize for ArchConfiguration {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ArchWire {
            n: self.n,
            m: self.m(),
            pairs: self.pairs.clone(),
            infinity: self.infinity.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for ArchConfiguration {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let w = ArchWire::deserialize(d)?;
        if w.m != w.pairs.len() {
            return Err(serde::de::Error::custom("field m does not match pair count"));
        }
        ArchConfiguration::new(w.n, w.pairs, w.infinity).map_err(serde::de::Error::custom)
    }
}

/// A ±1 path of length `n` with nonnegative partial sums; the final sum is
/// `n − 2m`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DyckPath {
    steps: Vec<i8>,
}

impl DyckPath {
    pub fn new(steps: Vec<i8>) -> Result<Self> {
        let mut sum = 0i64;
        for (k, &s) in steps.iter().enumerate() {
            if s != 1 && s != -1 {
                return Err(Error::domain(format!("step {k} is {s}, expected ±1")));
            }
            sum += s as i64;
            if sum < 0 {
                return Err(Error::domain(format!("negative partial sum at step {}", k + 1)));
            }
        }
        Ok(DyckPath { steps })
    }

    pub fn steps(&self) -> &[i8] {
        &self.steps
    }

    pub fn final_sum(&self) -> usize {
        self.steps.iter().map(|&s| s as i64).sum::<i64>() as usize
    }
}

fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

fn check_sector(n: usize, m: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::domain("n must be positive"));
    }
    if 2 * m > n {
        return Err(Error::domain(format!("m={m} out of range 0..={} for n={n}", n / 2)));
    }
    Ok(())
}

/// `d_{n,m} = C(n,m) − C(n,m−1) = (n+1−2m)·n!/(m!(n−m+1)!)`.
pub fn dimension(n: usize, m: usize) -> Result<u64> {
    check_sector(n, m)?;
    let d = binomial(n as u64, m as u64) - if m == 0 { 0 } else { binomial(n as u64, m as u64 - 1) };
    u64::try_from(d).map_err(|_| Error::numerical(format!("d_{{{n},{m}}} overflows u64")))
}

/// All non-crossing perfect matchings of `slice` (slice length must be even).
fn perfect_matchings(slice: &[usize]) -> Vec<Vec<(usize, usize)>> {
    if slice.is_empty() {
        return vec![Vec::new()];
    }
    let first = slice[0];
    let mut out = Vec::new();
    // partner leaves an even interior; pairs cannot cross the new pair,
    // so interior and tail complete independently
    for k in (1..slice.len()).step_by(2) {
        let partner = slice[k];
        for inner in perfect_matchings(&slice[1..k]) {
            for tail in perfect_matchings(&slice[k + 1..]) {
                let mut pairs = vec![(first, partner)];
                pairs.extend(inner.iter().copied());
                pairs.extend(tail.iter().copied());
                out.push(pairs);
            }
        }
    }
    out
}

/// All arch configurations with `n` points and `m` pairs, sorted
/// lexicographically on the pair list.
pub fn enumerate_arches(n: usize, m: usize) -> Result<Vec<ArchConfiguration>> {
    check_sector(n, m)?;
    let positions: Vec<usize> = (1..=n).collect();
    let mut raw = Vec::new();
    gen_top(&positions, m, &mut Vec::new(), &mut Vec::new(), &mut raw);
    let mut cfgs: Vec<ArchConfiguration> = raw
        .into_iter()
        .map(|(p, i)| ArchConfiguration::new(n, p, i).expect("generator emits valid configs"))
        .collect();
    cfgs.sort();
    Ok(cfgs)
}

/// Top-level generator: the first remaining position is either an infinity
/// line or opens a pair whose interior pairs up completely.
fn gen_top(
    rest: &[usize],
    pairs_left: usize,
    pairs: &mut Vec<(usize, usize)>,
    infinity: &mut Vec<usize>,
    out: &mut Vec<(Vec<(usize, usize)>, Vec<usize>)>,
) {
    if rest.is_empty() {
        if pairs_left == 0 {
            out.push((pairs.clone(), infinity.clone()));
        }
        return;
    }
    if rest.len() < 2 * pairs_left {
        return;
    }
    let first = rest[0];
    if rest.len() - 1 >= 2 * pairs_left {
        infinity.push(first);
        gen_top(&rest[1..], pairs_left, pairs, infinity, out);
        infinity.pop();
    }
    for k in (1..rest.len()).step_by(2) {
        let inner_pairs = (k - 1) / 2;
        if inner_pairs + 1 > pairs_left {
            break;
        }
        let partner = rest[k];
        for inner in perfect_matchings(&rest[1..k]) {
            pairs.push((first, partner));
            pairs.extend(inner.iter().copied());
            gen_top(&rest[k + 1..], pairs_left - 1 - inner_pairs, pairs, infinity, out);
            pairs.truncate(pairs.len() - 1 - inner.len());
        }
    }
}

/// Opening index of a pair and every infinity line map to `+1`, closing
/// indices to `−1`.
pub fn arch_to_dyck(cfg: &ArchConfiguration) -> DyckPath {
    let mut steps = vec![1i8; cfg.n()];
    for &(_, j) in cfg.pairs() {
        steps[j - 1] = -1;
    }
    DyckPath::new(steps).expect("valid configurations yield valid paths")
}

/// Inverse of [`arch_to_dyck`]: match each `−1` with the latest open `+1`;
/// unmatched openers become infinity lines.
pub fn dyck_to_arch(path: &DyckPath) -> Result<ArchConfiguration> {
    let n = path.steps().len();
    let mut stack: Vec<usize> = Vec::new();
    let mut pairs = Vec::new();
    for (idx0, &s) in path.steps().iter().enumerate() {
        let idx = idx0 + 1;
        if s == 1 {
            stack.push(idx);
        } else {
            let open = stack
                .pop()
                .ok_or_else(|| Error::domain("closing step without matching opener"))?;
            pairs.push((open, idx));
        }
    }
    ArchConfiguration::new(n, pairs, stack)
}

/// Assemble the arch configuration produced by an ordered list of collisions.
/// Each collision must pair two indices that are adjacent among the
/// still-alive ones; surviving indices become infinity lines.
pub fn classify_outcome(n: usize, collisions: &[(usize, usize)]) -> Result<ArchConfiguration> {
    if n == 0 {
        return Err(Error::domain("n must be positive"));
    }
    let mut alive: Vec<usize> = (1..=n).collect();
    let mut pairs = Vec::new();
    for &(a, b) in collisions {
        let (i, j) = if a < b { (a, b) } else { (b, a) };
        let pos_i = alive.iter().position(|&k| k == i).ok_or_else(|| {
            Error::Inconsistency(format!("collision ({i},{j}): index {i} not alive"))
        })?;
        let pos_j = alive.iter().position(|&k| k == j).ok_or_else(|| {
            Error::Inconsistency(format!("collision ({i},{j}): index {j} not alive"))
        })?;
        if pos_j != pos_i + 1 {
            return Err(Error::Inconsistency(format!(
                "collision ({i},{j}) pairs non-adjacent alive indices"
            )));
        }
        alive.remove(pos_j);
        alive.remove(pos_i);
        pairs.push((i, j));
    }
    ArchConfiguration::new(n, pairs, alive)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn dimension_examples() {
        assert_eq!(dimension(4, 2).unwrap(), 2);
        for n in 1..=10 {
            assert_eq!(dimension(n, 0).unwrap(), 1);
        }
        assert_eq!(dimension(6, 3).unwrap(), 5);
        assert_eq!(dimension(3, 1).unwrap(), 2);
        assert_eq!(dimension(8, 4).unwrap(), 14); // Catalan number C_4
        assert!(dimension(4, 3).is_err());
        assert!(dimension(0, 0).is_err());
    }

    #[test]
    fn enumerate_small_cases() {
        let two = enumerate_arches(2, 1).unwrap();
        assert_eq!(two.len(), 1);
        assert_eq!(two[0].pairs(), &[(1, 2)]);

        let four = enumerate_arches(4, 2).unwrap();
        assert_eq!(four.len(), 2);
        assert_eq!(four[0].pairs(), &[(1, 2), (3, 4)]);
        assert_eq!(four[1].pairs(), &[(1, 4), (2, 3)]);
        // the crossing pairing {(1,3),(2,4)} is rejected by the type
        assert!(ArchConfiguration::new(4, vec![(1, 3), (2, 4)], vec![]).is_err());

        let three = enumerate_arches(3, 1).unwrap();
        assert_eq!(three.len(), 2);
        for cfg in &three {
            assert_eq!(cfg.m(), 1);
            assert_eq!(cfg.infinity_lines().len(), 1);
        }
        // infinity line enclosed by (1,3) must not appear
        assert!(three.iter().all(|c| c.pairs() != [(1, 3)]));
    }

    #[test]
    fn enumeration_matches_dimension() {
        for n in 1..=8 {
            for m in 0..=n / 2 {
                let cfgs = enumerate_arches(n, m).unwrap();
                assert_eq!(cfgs.len() as u64, dimension(n, m).unwrap(), "n={n} m={m}");
                for c in &cfgs {
                    c.validate().unwrap();
                }
                // all distinct
                let mut keys: Vec<String> = cfgs.iter().map(|c| c.key()).collect();
                keys.dedup();
                assert_eq!(keys.len(), cfgs.len());
            }
        }
    }

    /// Count ±1 paths from 0 to `n−2m` staying nonnegative by brute force.
    fn count_paths(n: usize, target: i64) -> u64 {
        let mut count = 0;
        for mask in 0u32..(1 << n) {
            let mut sum = 0i64;
            let mut ok = true;
            for k in 0..n {
                sum += if mask & (1 << k) != 0 { 1 } else { -1 };
                if sum < 0 {
                    ok = false;
                    break;
                }
            }
            if ok && sum == target {
                count += 1;
            }
        }
        count
    }

    #[test]
    fn dimension_equals_path_count() {
        for n in 1..=8 {
            for m in 0..=n / 2 {
                let target = (n - 2 * m) as i64;
                assert_eq!(dimension(n, m).unwrap(), count_paths(n, target), "n={n} m={m}");
            }
        }
    }

    #[test]
    fn dyck_bijection_examples() {
        let a = ArchConfiguration::new(4, vec![(1, 2), (3, 4)], vec![]).unwrap();
        assert_eq!(arch_to_dyck(&a).steps(), &[1, -1, 1, -1]);
        let b = ArchConfiguration::new(4, vec![(1, 4), (2, 3)], vec![]).unwrap();
        assert_eq!(arch_to_dyck(&b).steps(), &[1, 1, -1, -1]);
        assert!(DyckPath::new(vec![-1, 1]).is_err());
    }

    #[test]
    fn dyck_round_trip_all_small() {
        for n in 1..=8 {
            for m in 0..=n / 2 {
                for cfg in enumerate_arches(n, m).unwrap() {
                    let path = arch_to_dyck(&cfg);
                    assert_eq!(path.final_sum(), n - 2 * m);
                    let back = dyck_to_arch(&path).unwrap();
                    assert_eq!(back, cfg);
                }
            }
        }
    }

    #[test]
    fn classify_examples() {
        let c = classify_outcome(4, &[(2, 3), (1, 4)]).unwrap();
        assert_eq!(c.pairs(), &[(1, 4), (2, 3)]);
        let c = classify_outcome(2, &[(1, 2)]).unwrap();
        assert_eq!(c.pairs(), &[(1, 2)]);
        // partial sequence: cap reached after one collision
        let c = classify_outcome(4, &[(1, 2)]).unwrap();
        assert_eq!(c.pairs(), &[(1, 2)]);
        assert_eq!(c.infinity_lines(), &[3, 4]);
        // non-adjacent among alive
        assert!(classify_outcome(4, &[(1, 3)]).is_err());
        // (1,4) adjacent only after (2,3) died
        assert!(classify_outcome(4, &[(1, 4)]).is_err());
        // double use
        assert!(classify_outcome(4, &[(1, 2), (1, 2)]).is_err());
    }

    #[test]
    fn serde_round_trip() {
        let cfg = ArchConfiguration::new(4, vec![(1, 2), (3, 4)], vec![]).unwrap();
        let js = serde_json::to_string(&cfg).unwrap();
        assert_eq!(js, r#"{"n":4,"m":2,"pairs":[[1,2],[3,4]],"infinity":[]}"#);
        let back: ArchConfiguration = serde_json::from_str(&js).unwrap();
        assert_eq!(back, cfg);
    }

    proptest! {
        /// Any ±1 sequence that forms a valid path maps to a valid
        /// configuration and round-trips.
        #[test]
        fn prop_dyck_round_trip(bits in proptest::collection::vec(any::<bool>(), 1..12)) {
            let steps: Vec<i8> = bits.iter().map(|&b| if b { 1 } else { -1 }).collect();
            if let Ok(path) = DyckPath::new(steps) {
                let cfg = dyck_to_arch(&path).unwrap();
                cfg.validate().unwrap();
                let back = arch_to_dyck(&cfg);
                prop_assert_eq!(back.steps(), path.steps());
            }
        }
    }
}
