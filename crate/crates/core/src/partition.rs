//! Partitions of the cyclic group `Z_n`, the admissibility conditions on
//! monodromy partitions, and their exhaustive enumeration.

use std::f64::consts::TAU;
use std::fmt;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::Cplx;

const CHARACTER_TOL: f64 = 1e-9;

/// A partition of `{0, .., n-1}` in canonical form: every block sorted,
/// blocks ordered by their smallest element.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Partition {
    n: usize,
    blocks: Vec<Vec<usize>>,
}

/// Serialized as the bare list of blocks.
impl Serialize for Partition {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.blocks.serialize(s)
    }
}

impl Partition {
    pub fn new(n: usize, blocks: Vec<Vec<usize>>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidPartition("n must be positive".into()));
        }
        let mut seen = vec![false; n];
        for block in &blocks {
            if block.is_empty() {
                return Err(Error::InvalidPartition("empty block".into()));
            }
            for &x in block {
                if x >= n {
                    return Err(Error::InvalidPartition(format!("element {x} outside Z_{n}")));
                }
                if std::mem::replace(&mut seen[x], true) {
                    return Err(Error::InvalidPartition(format!("element {x} repeated")));
                }
            }
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidPartition(format!("element {missing} missing")));
        }
        Ok(Self::canonical(n, blocks))
    }

    fn canonical(n: usize, mut blocks: Vec<Vec<usize>>) -> Self {
        for block in blocks.iter_mut() {
            block.sort_unstable();
        }
        blocks.sort_by_key(|b| b[0]);
        Self { n, blocks }
    }

    pub fn singletons(n: usize) -> Self {
        Self::canonical(n, (0..n).map(|i| vec![i]).collect())
    }

    /// Blocks from a label per element.
    pub fn from_labels(labels: &[usize]) -> Self {
        let mut blocks: Vec<Vec<usize>> = Vec::new();
        let mut index: Vec<Option<usize>> = vec![None; labels.iter().max().map_or(0, |m| m + 1)];
        for (x, &l) in labels.iter().enumerate() {
            match index[l] {
                Some(b) => blocks[b].push(x),
                None => {
                    index[l] = Some(blocks.len());
                    blocks.push(vec![x]);
                }
            }
        }
        Self::canonical(labels.len(), blocks)
    }

    /// Orbits of the group generated by `generators`, each a permutation image list.
    pub fn orbits(n: usize, generators: &[Vec<usize>]) -> Self {
        let mut uf = UnionFind::new(n);
        for g in generators {
            for (i, &j) in g.iter().enumerate() {
                uf.union(i, j);
            }
        }
        let labels: Vec<usize> = (0..n).map(|i| uf.find(i)).collect();
        Self::from_labels(&labels)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn q(&self) -> usize {
        self.blocks.len()
    }

    pub fn block_of(&self, x: usize) -> usize {
        self.blocks.iter().position(|b| b.contains(&x)).expect("element of Z_n")
    }

    fn labels(&self) -> Vec<usize> {
        let mut labels = vec![0; self.n];
        for (b, block) in self.blocks.iter().enumerate() {
            for &x in block {
                labels[x] = b;
            }
        }
        labels
    }

    /// Index of the block `{(n - x) mod n : x in G_i}` for each block, if every such set is a block.
    pub fn inverse_blocks(&self) -> Option<Vec<usize>> {
        self.blocks
            .iter()
            .map(|block| {
                let mut inverse: Vec<usize> = block.iter().map(|&x| (self.n - x) % self.n).collect();
                inverse.sort_unstable();
                self.blocks.iter().position(|b| *b == inverse)
            })
            .collect()
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let blocks: Vec<String> = self
            .blocks
            .iter()
            .map(|b| format!("{{{}}}", b.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")))
            .collect();
        write!(f, "{{{}}}", blocks.join(","))
    }
}

pub(crate) struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub(crate) fn new(n: usize) -> Self {
        Self { parent: (0..n).collect() }
    }

    pub(crate) fn find(&mut self, mut i: usize) -> usize {
        while self.parent[i] != i {
            self.parent[i] = self.parent[self.parent[i]];
            i = self.parent[i];
        }
        i
    }

    pub(crate) fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}

fn character_sums(p: &Partition, j: usize) -> Vec<Cplx> {
    let n = p.n as f64;
    p.blocks
        .iter()
        .map(|block| block.iter().map(|&i| Cplx::from_polar(1.0, TAU * ((i * j) % p.n) as f64 / n)).sum())
        .collect()
}

/// Residues `j` grouped by equality of all block character sums `sum_{i in G_k} w^(ij)`.
pub fn dual_partition(p: &Partition) -> Partition {
    let sums: Vec<Vec<Cplx>> = (0..p.n).map(|j| character_sums(p, j)).collect();
    let mut labels = vec![usize::MAX; p.n];
    for j in 0..p.n {
        if labels[j] != usize::MAX {
            continue;
        }
        labels[j] = j;
        for k in j + 1..p.n {
            if labels[k] == usize::MAX && sums[j].iter().zip(&sums[k]).all(|(a, b)| (a - b).norm() < CHARACTER_TOL) {
                labels[k] = j;
            }
        }
    }
    Partition::from_labels(&labels)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Conditions {
    pub a1: bool,
    pub a2: bool,
    pub a3: bool,
    pub a4: bool,
}

impl Conditions {
    pub fn all(&self) -> bool {
        self.a1 && self.a2 && self.a3 && self.a4
    }
}

fn has_zero_singleton(p: &Partition) -> bool {
    p.blocks.iter().any(|b| b == &[0])
}

/// Every sumset multiset `G_j + G_k` is a union of whole blocks, i.e. the
/// count of each residue is constant on every block.
fn sumsets_are_block_unions(p: &Partition) -> bool {
    let mut counts = vec![0usize; p.n];
    for gj in &p.blocks {
        for gk in &p.blocks {
            counts.iter_mut().for_each(|c| *c = 0);
            for &x in gj {
                for &y in gk {
                    counts[(x + y) % p.n] += 1;
                }
            }
            for block in &p.blocks {
                let c = counts[block[0]];
                if block.iter().any(|&x| counts[x] != c) {
                    return false;
                }
            }
        }
    }
    true
}

pub fn check_conditions(p: &Partition) -> Conditions {
    let a2 = p.inverse_blocks().is_some();
    Conditions { a1: has_zero_singleton(p), a2, a3: sumsets_are_block_unions(p), a4: dual_partition(p).q() == p.q() }
}

/// Nontrivial proper subgroups of `Z_n` that are unions of blocks, smallest first.
pub fn subgroup_unions(p: &Partition) -> Vec<Vec<usize>> {
    let n = p.n;
    let labels = p.labels();
    let mut out = Vec::new();
    for order in 2..n {
        if !n.is_multiple_of(order) {
            continue;
        }
        let step = n / order;
        let subgroup: Vec<usize> = (0..order).map(|k| k * step).collect();
        let closed = subgroup.iter().all(|&x| p.blocks[labels[x]].iter().all(|y| y % step == 0));
        if closed {
            out.push(subgroup);
        }
    }
    out
}

/// Order-6 exclusion: the partition `{{0},{1,5},{2,4},{3}}` satisfies the
/// four conditions but cannot arise from any product of order six.
pub fn double_decomposition_6(p: &Partition) -> bool {
    p.n == 6 && p.blocks == [vec![0], vec![1, 5], vec![2, 4], vec![3]]
}

/// All partitions of `Z_n` satisfying the four conditions, optionally with
/// the order-6 exclusion applied. Ordered by decreasing block count, then
/// lexicographically.
pub fn enumerate_admissible(n: usize, apply_double_decomposition_filter: bool) -> Result<Vec<Partition>> {
    if !(2..=12).contains(&n) {
        return Err(Error::InvalidPartition(format!("enumeration supports 2 <= n <= 12, got {n}")));
    }
    let mut found = Vec::new();
    let mut assignment = vec![usize::MAX; n];
    assignment[0] = 0;
    let mut inverse: Vec<Option<usize>> = vec![Some(0)];
    extend(n, 1, 1, &mut assignment, &mut inverse, &mut found);
    let mut out: Vec<Partition> = found
        .into_iter()
        .filter(|p| check_conditions(p).all())
        .filter(|p| !(apply_double_decomposition_filter && double_decomposition_6(p)))
        .collect();
    out.sort_by(|a, b| b.q().cmp(&a.q()).then_with(|| a.blocks.cmp(&b.blocks)));
    Ok(out)
}

/// Restricted-growth enumeration over `1..n` with `{0}` fixed as a block,
/// keeping the negation map `x -> n - x` a well-defined involution on blocks.
fn extend(
    n: usize,
    x: usize,
    block_count: usize,
    assignment: &mut Vec<usize>,
    inverse: &mut Vec<Option<usize>>,
    found: &mut Vec<Partition>,
) {
    if x == n {
        if inverse.iter().all(Option::is_some) {
            found.push(Partition::from_labels(assignment));
        }
        return;
    }
    let y = n - x;
    for b in 1..=block_count {
        let fresh = b == block_count;
        if fresh {
            inverse.push(None);
        }
        let saved = inverse.clone();
        let ok = if y < x {
            let by = assignment[y];
            match inverse[by] {
                Some(target) => target == b,
                None => {
                    if inverse[b].is_none() || inverse[b] == Some(by) {
                        inverse[by] = Some(b);
                        inverse[b] = Some(by);
                        true
                    } else {
                        false
                    }
                }
            }
        } else if y == x {
            match inverse[b] {
                Some(target) => target == b,
                None => {
                    inverse[b] = Some(b);
                    true
                }
            }
        } else {
            true
        };
        if ok {
            assignment[x] = b;
            extend(n, x + 1, block_count + usize::from(fresh), assignment, inverse, found);
            assignment[x] = usize::MAX;
        }
        *inverse = saved;
        if fresh {
            inverse.pop();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn part(n: usize, blocks: &[&[usize]]) -> Partition {
        Partition::new(n, blocks.iter().map(|b| b.to_vec()).collect()).unwrap()
    }

    #[test]
    fn validation() {
        assert!(Partition::new(3, vec![vec![0], vec![1]]).is_err());
        assert!(Partition::new(3, vec![vec![0, 1], vec![1, 2]]).is_err());
        assert!(Partition::new(3, vec![vec![0], vec![], vec![1, 2]]).is_err());
        let p = Partition::new(4, vec![vec![3, 1], vec![2], vec![0]]).unwrap();
        assert_eq!(p.blocks(), &[vec![0], vec![1, 3], vec![2]]);
        assert_eq!(p.to_string(), "{{0},{1,3},{2}}");
    }

    #[test]
    fn orbits_of_generators() {
        let p = Partition::orbits(5, &[vec![0, 2, 1, 3, 4], vec![0, 1, 2, 4, 3]]);
        assert_eq!(p, part(5, &[&[0], &[1, 2], &[3, 4]]));
        assert_eq!(Partition::orbits(3, &[]), Partition::singletons(3));
    }

    #[test]
    fn dual_examples() {
        assert_eq!(dual_partition(&Partition::singletons(7)), Partition::singletons(7));
        for n in 3..9 {
            let p = Partition::new(n, vec![vec![0], (1..n).collect()]).unwrap();
            assert_eq!(dual_partition(&p), p);
        }
        let p = part(5, &[&[0], &[1, 4], &[2, 3]]);
        assert_eq!(dual_partition(&p), p);
    }

    #[test]
    fn condition_examples() {
        let c = check_conditions(&part(5, &[&[0], &[1, 2], &[3, 4]]));
        assert!(!c.a3);
        assert!(check_conditions(&part(5, &[&[0], &[1, 4], &[2, 3]])).all());
        assert!(check_conditions(&part(7, &[&[0], &[1, 6], &[2, 5], &[3, 4]])).all());
        for n in 1..=12 {
            assert!(check_conditions(&Partition::singletons(n)).all());
        }
    }

    #[test]
    fn subgroup_examples() {
        assert_eq!(subgroup_unions(&part(6, &[&[0], &[1, 3, 5], &[2], &[4]])), vec![vec![0, 2, 4]]);
        assert_eq!(subgroup_unions(&Partition::singletons(6)), vec![vec![0, 3], vec![0, 2, 4]]);
        assert!(subgroup_unions(&part(6, &[&[0], &[1, 2, 3, 4, 5]])).is_empty());
    }

    #[test]
    fn enumeration_counts() {
        let five = enumerate_admissible(5, false).unwrap();
        assert_eq!(
            five,
            vec![Partition::singletons(5), part(5, &[&[0], &[1, 4], &[2, 3]]), part(5, &[&[0], &[1, 2, 3, 4]])]
        );
        assert_eq!(enumerate_admissible(7, false).unwrap().len(), 4);
        let six = enumerate_admissible(6, true).unwrap();
        assert_eq!(six.len(), 6);
        assert!(six.contains(&part(6, &[&[0], &[1, 3, 5], &[2], &[4]])));
        assert!(!six.contains(&part(6, &[&[0], &[1, 5], &[2, 4], &[3]])));
        assert_eq!(enumerate_admissible(6, false).unwrap().len(), 7);
        assert!(enumerate_admissible(13, false).is_err());
    }

    #[test]
    fn enumeration_is_deterministic() {
        assert_eq!(enumerate_admissible(8, false).unwrap(), enumerate_admissible(8, false).unwrap());
    }

    /// Greedy removal of whole blocks from a residue multiset.
    fn brute_force_block_union(p: &Partition, mut counts: Vec<i64>) -> bool {
        loop {
            let Some(x) = counts.iter().position(|&c| c > 0) else {
                return counts.iter().all(|&c| c == 0);
            };
            for &y in &p.blocks()[p.block_of(x)] {
                counts[y] -= 1;
                if counts[y] < 0 {
                    return false;
                }
            }
        }
    }

    fn arbitrary_partition() -> impl Strategy<Value = Partition> {
        (2usize..=9).prop_flat_map(|n| {
            proptest::collection::vec(0usize..n, n).prop_map(|labels| Partition::from_labels(&labels))
        })
    }

    proptest! {
        #[test]
        fn sumset_check_agrees_with_brute_force(p in arbitrary_partition()) {
            let mut expected = true;
            for gj in p.blocks() {
                for gk in p.blocks() {
                    let mut counts = vec![0i64; p.n()];
                    for &x in gj {
                        for &y in gk {
                            counts[(x + y) % p.n()] += 1;
                        }
                    }
                    expected &= brute_force_block_union(&p, counts);
                }
            }
            prop_assert_eq!(check_conditions(&p).a3, expected);
        }

        #[test]
        fn dual_of_admissible_keeps_block_count(n in 2usize..=9) {
            for p in enumerate_admissible(n, false).unwrap() {
                let d = dual_partition(&p);
                prop_assert_eq!(d.q(), p.q());
                prop_assert_eq!(dual_partition(&d).q(), p.q());
            }
        }
    }
}
