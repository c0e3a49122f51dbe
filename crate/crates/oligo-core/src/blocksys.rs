//! Set partitions and block systems: validation, the meet/join lattice
//! operations, minimal block systems through pairs of points and the
//! complete lattice of block systems of a finite group.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::perm::FiniteGroup;

/// A partition of `{0..degree-1}` in canonical form: every block sorted,
/// blocks ordered by their least element.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct SetPartition {
    degree: usize,
    blocks: Vec<Vec<usize>>,
}

impl SetPartition {
    /// Builds a partition, checking that the blocks are disjoint, nonempty
    /// and cover the domain, and canonicalising their order.
    pub fn new(degree: usize, blocks: Vec<Vec<usize>>) -> Result<Self> {
        let mut seen = vec![false; degree];
        let mut canon: Vec<Vec<usize>> = Vec::with_capacity(blocks.len());
        for mut b in blocks {
            if b.is_empty() {
                return Err(Error::Precondition("empty block in partition".to_string()));
            }
            b.sort_unstable();
            b.dedup();
            for &p in &b {
                if p >= degree {
                    return Err(Error::Precondition(format!(
                        "point {p} out of range for degree {degree}"
                    )));
                }
                if seen[p] {
                    return Err(Error::Precondition(format!(
                        "point {p} appears in two blocks"
                    )));
                }
                seen[p] = true;
            }
            canon.push(b);
        }
        if seen.iter().any(|&s| !s) {
            return Err(Error::Precondition(
                "partition does not cover the domain".to_string(),
            ));
        }
        canon.sort_unstable();
        Ok(SetPartition {
            degree,
            blocks: canon,
        })
    }

    pub fn singletons(degree: usize) -> Self {
        SetPartition {
            degree,
            blocks: (0..degree).map(|p| vec![p]).collect(),
        }
    }

    pub fn one_block(degree: usize) -> Self {
        SetPartition {
            degree,
            blocks: vec![(0..degree).collect()],
        }
    }

    /// From a class index per point.
    pub fn from_class_ids(ids: &[usize]) -> Self {
        let mut blocks: Vec<Vec<usize>> = Vec::new();
        let mut slot: Vec<Option<usize>> = Vec::new();
        for (p, &c) in ids.iter().enumerate() {
            if c >= slot.len() {
                slot.resize(c + 1, None);
            }
            match slot[c] {
                Some(i) => blocks[i].push(p),
                None => {
                    slot[c] = Some(blocks.len());
                    blocks.push(vec![p]);
                }
            }
        }
        blocks.sort_unstable();
        SetPartition {
            degree: ids.len(),
            blocks,
        }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    /// Index of the block containing each point.
    pub fn class_of(&self) -> Vec<usize> {
        let mut out = vec![0usize; self.degree];
        for (i, b) in self.blocks.iter().enumerate() {
            for &p in b {
                out[p] = i;
            }
        }
        out
    }

    /// True iff every block of `self` is contained in a block of `coarser`.
    pub fn refines(&self, coarser: &SetPartition) -> bool {
        if self.degree != coarser.degree {
            return false;
        }
        let cls = coarser.class_of();
        self.blocks
            .iter()
            .all(|b| b.iter().all(|&p| cls[p] == cls[b[0]]))
    }

    /// Finest common coarsening.
    pub fn join(&self, other: &SetPartition) -> Result<SetPartition> {
        if self.degree != other.degree {
            return Err(Error::DomainMismatch {
                expected: self.degree,
                got: other.degree,
            });
        }
        let mut uf = UnionFind::new(self.degree);
        for b in self.blocks.iter().chain(other.blocks.iter()) {
            for w in b.windows(2) {
                uf.union(w[0], w[1]);
            }
        }
        Ok(uf.to_partition())
    }

    /// Coarsest common refinement.
    pub fn meet(&self, other: &SetPartition) -> Result<SetPartition> {
        if self.degree != other.degree {
            return Err(Error::DomainMismatch {
                expected: self.degree,
                got: other.degree,
            });
        }
        let a = self.class_of();
        let b = other.class_of();
        let mut blocks: alloc::collections::BTreeMap<(usize, usize), Vec<usize>> =
            alloc::collections::BTreeMap::new();
        for p in 0..self.degree {
            blocks.entry((a[p], b[p])).or_default().push(p);
        }
        SetPartition::new(self.degree, blocks.into_values().collect())
    }

    /// Parses `{{0,2},{1,3}}` (spaces allowed after commas and braces).
    pub fn parse(text: &str, degree: usize) -> Result<Self> {
        let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        let inner = s
            .strip_prefix('{')
            .and_then(|t| t.strip_suffix('}'))
            .ok_or_else(|| {
                Error::Precondition(format!("partition {text:?} must be wrapped in {{}}"))
            })?;
        let mut blocks = Vec::new();
        let mut rest = inner;
        while !rest.is_empty() {
            let rest2 = rest.strip_prefix(',').unwrap_or(rest);
            let body_start = rest2.strip_prefix('{').ok_or_else(|| {
                Error::Precondition(format!("expected '{{' in partition {text:?}"))
            })?;
            let end = body_start.find('}').ok_or_else(|| {
                Error::Precondition(format!("unclosed block in partition {text:?}"))
            })?;
            let body = &body_start[..end];
            let mut block = Vec::new();
            for tok in body.split(',').filter(|t| !t.is_empty()) {
                let p: usize = tok.parse().map_err(|_| {
                    Error::Precondition(format!("bad point {tok:?} in partition {text:?}"))
                })?;
                block.push(p);
            }
            blocks.push(block);
            rest = &body_start[end + 1..];
        }
        SetPartition::new(degree, blocks)
    }

    /// Prints `{{0,2},{1,3}}`.
    pub fn to_text(&self) -> String {
        let mut out = String::from("{");
        for (i, b) in self.blocks.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            out.push('{');
            for (j, p) in b.iter().enumerate() {
                if j > 0 {
                    out.push(',');
                }
                out.push_str(&p.to_string());
            }
            out.push('}');
        }
        out.push('}');
        out
    }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.parent[r] != r {
            r = self.parent[r];
        }
        let mut c = x;
        while self.parent[c] != r {
            let next = self.parent[c];
            self.parent[c] = r;
            c = next;
        }
        r
    }

    /// Returns true if the two classes were distinct.
    fn union(&mut self, a: usize, b: usize) -> bool {
        let ra = self.find(a);
        let rb = self.find(b);
        if ra == rb {
            return false;
        }
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        self.parent[hi] = lo;
        true
    }

    fn to_partition(&mut self) -> SetPartition {
        let n = self.parent.len();
        let ids: Vec<usize> = (0..n).map(|p| self.find(p)).collect();
        SetPartition::from_class_ids(&ids)
    }
}

/// True iff the partition is stable under the group, i.e. every generator
/// maps blocks onto blocks.
pub fn is_block_system(group: &FiniteGroup, partition: &SetPartition) -> bool {
    if group.degree() != partition.degree() {
        return false;
    }
    let cls = partition.class_of();
    for g in group.generators() {
        for b in partition.blocks() {
            let target = cls[g.apply(b[0])];
            if b.iter().any(|&p| cls[g.apply(p)] != target) {
                return false;
            }
        }
    }
    true
}

/// Finest stable partition whose classes contain each given pair, computed
/// by closing the pair identifications under the generators. Works for
/// intransitive groups as well; pairs across orbits simply produce classes
/// meeting both orbits.
pub fn minimal_stable_partition(
    group: &FiniteGroup,
    pairs: &[(usize, usize)],
) -> SetPartition {
    let n = group.degree();
    let mut uf = UnionFind::new(n);
    let mut work: Vec<(usize, usize)> = Vec::new();
    for &(p, q) in pairs {
        if uf.union(p, q) {
            work.push((p, q));
        }
    }
    while let Some((p, q)) = work.pop() {
        for g in group.generators() {
            let (gp, gq) = (g.apply(p), g.apply(q));
            if uf.union(gp, gq) {
                work.push((gp, gq));
            }
        }
    }
    uf.to_partition()
}

/// The smallest block of a stable partition containing both `p` and `q`
/// (for points in one orbit of a transitive group this is the classical
/// minimal-block construction; in general it is the class of the closure
/// of the single identification `p ~ q`).
pub fn minimal_block(group: &FiniteGroup, p: usize, q: usize) -> Result<Vec<usize>> {
    if p >= group.degree() || q >= group.degree() {
        return Err(Error::Precondition(format!(
            "points {p},{q} out of range for degree {}",
            group.degree()
        )));
    }
    let partition = minimal_stable_partition(group, &[(p, q)]);
    let cls = partition.class_of();
    Ok(partition.blocks()[cls[p]].clone())
}

/// All stable partitions of the group ("block systems", including the two
/// trivial ones; the group need not be transitive). Every stable partition
/// is the join of the pair-minimal ones it coarsens, so the lattice is the
/// join closure of the pair atoms.
///
/// Output order: by block count descending, ties broken by the canonical
/// partition order.
pub fn all_block_systems(group: &FiniteGroup) -> Result<Vec<SetPartition>> {
    let n = group.degree();
    if n == 0 {
        return Ok(Vec::new());
    }
    const DEGREE_CAP: usize = 16;
    if n > DEGREE_CAP {
        return Err(Error::SizeLimit(format!(
            "block-system enumeration capped at degree {DEGREE_CAP}"
        )));
    }
    let mut atoms: BTreeSet<SetPartition> = BTreeSet::new();
    for p in 0..n {
        for q in p + 1..n {
            atoms.insert(minimal_stable_partition(group, &[(p, q)]));
        }
    }
    let mut lattice: BTreeSet<SetPartition> = BTreeSet::new();
    lattice.insert(SetPartition::singletons(n));
    for atom in &atoms {
        let mut added: Vec<SetPartition> = Vec::new();
        for existing in lattice.iter() {
            let j = existing.join(atom)?;
            if !lattice.contains(&j) {
                added.push(j);
            }
        }
        lattice.insert(atom.clone());
        for j in added {
            // joining a new element may cascade; close fully
            let mut frontier = vec![j];
            while let Some(x) = frontier.pop() {
                if lattice.insert(x.clone()) {
                    for a in &atoms {
                        let y = x.join(a)?;
                        if !lattice.contains(&y) {
                            frontier.push(y);
                        }
                    }
                }
            }
        }
    }
    // close the whole set under pairwise joins for safety (cheap at this
    // scale, and makes the result independent of insertion order)
    loop {
        let items: Vec<SetPartition> = lattice.iter().cloned().collect();
        let mut grew = false;
        for i in 0..items.len() {
            for j in i + 1..items.len() {
                let x = items[i].join(&items[j])?;
                if lattice.insert(x) {
                    grew = true;
                }
            }
        }
        if !grew {
            break;
        }
    }
    let mut out: Vec<SetPartition> = lattice.into_iter().collect();
    out.sort_by(|a, b| {
        b.block_count()
            .cmp(&a.block_count())
            .then_with(|| a.cmp(b))
    });
    debug_assert!(out.iter().all(|p| is_block_system(group, p)));
    Ok(out)
}
