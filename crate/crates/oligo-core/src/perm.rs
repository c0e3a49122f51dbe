//! Finite permutation groups: elements, orbits, stabilizers, ages,
//! normality, induced actions and subdirect products.
//!
//! Groups are given by generator lists. Small groups expose their full
//! element set (breadth-first closure, deterministic order); larger groups
//! are handled through a stabilizer chain, so that orders, membership
//! tests and pointwise stabilizers stay available far beyond the element
//! cap.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::cell::OnceCell;
use core::fmt;
use core::sync::atomic::{AtomicU64, Ordering};

use crate::error::{Error, Result};

/// Default cap on explicit element enumeration.
pub const DEFAULT_ELEMENT_CAP: u64 = 10_000_000;

static ELEMENT_CAP: AtomicU64 = AtomicU64::new(DEFAULT_ELEMENT_CAP);

/// Overrides the element-enumeration cap process-wide.
pub fn set_element_cap(cap: u64) {
    ELEMENT_CAP.store(cap, Ordering::Relaxed);
}

/// Current element-enumeration cap.
pub fn element_cap() -> u64 {
    ELEMENT_CAP.load(Ordering::Relaxed)
}

/// A bijection of `{0..degree-1}`, stored as the image array.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Permutation {
    images: Vec<u16>,
}

impl Permutation {
    pub fn identity(degree: usize) -> Self {
        Permutation {
            images: (0..degree as u16).collect(),
        }
    }

    /// Builds a permutation from its image array, checking bijectivity.
    pub fn from_images(images: &[usize]) -> Result<Self> {
        let n = images.len();
        let mut seen = vec![false; n];
        for &x in images {
            if x >= n || seen[x] {
                return Err(Error::Precondition(format!(
                    "image array {images:?} is not a bijection of 0..{n}"
                )));
            }
            seen[x] = true;
        }
        Ok(Permutation {
            images: images.iter().map(|&x| x as u16).collect(),
        })
    }

    pub fn degree(&self) -> usize {
        self.images.len()
    }

    #[inline]
    pub fn apply(&self, point: usize) -> usize {
        self.images[point] as usize
    }

    pub fn images(&self) -> Vec<usize> {
        self.images.iter().map(|&x| x as usize).collect()
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, &x)| i == x as usize)
    }

    /// Composition acting left to right on points: `(a.compose(b))(x) = b(a(x))`.
    pub fn then(&self, next: &Permutation) -> Permutation {
        debug_assert_eq!(self.degree(), next.degree());
        Permutation {
            images: self.images.iter().map(|&x| next.images[x as usize]).collect(),
        }
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0u16; self.images.len()];
        for (i, &x) in self.images.iter().enumerate() {
            inv[x as usize] = i as u16;
        }
        Permutation { images: inv }
    }

    /// Conjugate `self` by `g`: returns `g^{-1} self g` in left-to-right
    /// composition, i.e. the permutation mapping `g(x)` to `g(self(x))`.
    pub fn conjugate_by(&self, g: &Permutation) -> Permutation {
        let mut images = vec![0u16; self.images.len()];
        for x in 0..self.images.len() {
            images[g.images[x] as usize] = g.images[self.images[x] as usize];
        }
        Permutation { images }
    }

    /// The cycles of length >= 2, each starting at its least point,
    /// ordered by least point.
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let n = self.degree();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut cyc = vec![start];
            seen[start] = true;
            let mut p = self.apply(start);
            while p != start {
                seen[p] = true;
                cyc.push(p);
                p = self.apply(p);
            }
            if cyc.len() > 1 {
                out.push(cyc);
            }
        }
        out
    }

    /// Multiset of cycle lengths including fixed points.
    pub fn cycle_lengths(&self) -> Vec<usize> {
        let n = self.degree();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut len = 1;
            seen[start] = true;
            let mut p = self.apply(start);
            while p != start {
                seen[p] = true;
                len += 1;
                p = self.apply(p);
            }
            out.push(len);
        }
        out
    }

    /// Parses disjoint-cycle notation with 0-based points, e.g. `(0 1)(2 3)`.
    /// The identity is written `()`. Points may be separated by spaces or
    /// commas. `degree` must cover every point mentioned.
    pub fn parse_cycles(text: &str, degree: usize) -> Result<Self> {
        let mut images: Vec<usize> = (0..degree).collect();
        let mut moved = vec![false; degree];
        let s = text.trim();
        if s.is_empty() {
            return Err(Error::Precondition("empty permutation string".to_string()));
        }
        let mut chars = s.char_indices().peekable();
        while let Some(&(i, c)) = chars.peek() {
            if c.is_whitespace() {
                chars.next();
                continue;
            }
            if c != '(' {
                return Err(Error::Precondition(format!(
                    "expected '(' at byte {i} in {text:?}"
                )));
            }
            chars.next();
            let mut cyc: Vec<usize> = Vec::new();
            let mut num = String::new();
            loop {
                match chars.next() {
                    Some((_, d)) if d.is_ascii_digit() => num.push(d),
                    Some((j, d)) if d == ' ' || d == ',' => {
                        if !num.is_empty() {
                            cyc.push(parse_point(&num, degree, j)?);
                            num.clear();
                        }
                    }
                    Some((j, ')')) => {
                        if !num.is_empty() {
                            cyc.push(parse_point(&num, degree, j)?);
                        }
                        break;
                    }
                    Some((j, d)) => {
                        return Err(Error::Precondition(format!(
                            "unexpected character {d:?} at byte {j} in {text:?}"
                        )))
                    }
                    None => {
                        return Err(Error::Precondition(format!(
                            "unclosed cycle in {text:?}"
                        )))
                    }
                }
            }
            for w in 0..cyc.len() {
                let from = cyc[w];
                let to = cyc[(w + 1) % cyc.len()];
                if cyc.len() > 1 {
                    if moved[from] {
                        return Err(Error::Precondition(format!(
                            "point {from} repeated in {text:?}"
                        )));
                    }
                    moved[from] = true;
                    images[from] = to;
                }
            }
        }
        Permutation::from_images(&images)
    }

    /// Prints disjoint-cycle notation; the identity prints as `()`.
    pub fn to_cycle_string(&self) -> String {
        let cycles = self.cycles();
        if cycles.is_empty() {
            return "()".to_string();
        }
        let mut out = String::new();
        for cyc in cycles {
            out.push('(');
            for (i, p) in cyc.iter().enumerate() {
                if i > 0 {
                    out.push(' ');
                }
                out.push_str(&p.to_string());
            }
            out.push(')');
        }
        out
    }
}

fn parse_point(num: &str, degree: usize, at: usize) -> Result<usize> {
    let p: usize = num
        .parse()
        .map_err(|_| Error::Precondition(format!("bad number {num:?} at byte {at}")))?;
    if p >= degree {
        return Err(Error::Precondition(format!(
            "point {p} out of range for degree {degree}"
        )));
    }
    Ok(p)
}

impl fmt::Debug for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_cycle_string())
    }
}

/// A finite permutation group given by generators.
///
/// The element set and the stabilizer chain are computed on demand and
/// cached. All mutation is idempotent; the group is immutable as a value.
#[derive(Clone)]
pub struct FiniteGroup {
    degree: usize,
    generators: Vec<Permutation>,
    elements: OnceCell<Vec<Permutation>>,
    chain: OnceCell<StabChain>,
}

impl fmt::Debug for FiniteGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FiniteGroup(degree={}, gens=[", self.degree)?;
        for (i, g) in self.generators.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}", g.to_cycle_string())?;
        }
        write!(f, "])")
    }
}

impl FiniteGroup {
    pub fn new(degree: usize, generators: Vec<Permutation>) -> Result<Self> {
        for g in &generators {
            if g.degree() != degree {
                return Err(Error::DomainMismatch {
                    expected: degree,
                    got: g.degree(),
                });
            }
        }
        let generators: Vec<Permutation> =
            generators.into_iter().filter(|g| !g.is_identity()).collect();
        Ok(FiniteGroup {
            degree,
            generators,
            elements: OnceCell::new(),
            chain: OnceCell::new(),
        })
    }

    pub fn identity_group(degree: usize) -> Self {
        FiniteGroup::new(degree, Vec::new()).expect("identity group")
    }

    pub fn symmetric(degree: usize) -> Self {
        let mut gens = Vec::new();
        if degree >= 2 {
            let mut tr: Vec<usize> = (0..degree).collect();
            tr.swap(0, 1);
            gens.push(Permutation::from_images(&tr).unwrap());
        }
        if degree >= 3 {
            let cyc: Vec<usize> = (0..degree).map(|i| (i + 1) % degree).collect();
            gens.push(Permutation::from_images(&cyc).unwrap());
        }
        FiniteGroup::new(degree, gens).unwrap()
    }

    pub fn cyclic(degree: usize) -> Self {
        let mut gens = Vec::new();
        if degree >= 2 {
            let cyc: Vec<usize> = (0..degree).map(|i| (i + 1) % degree).collect();
            gens.push(Permutation::from_images(&cyc).unwrap());
        }
        FiniteGroup::new(degree, gens).unwrap()
    }

    /// Dihedral group of order 2n acting on n points (n >= 3); for n <= 2
    /// this degenerates to the symmetric group of that degree.
    pub fn dihedral(degree: usize) -> Self {
        if degree <= 2 {
            return FiniteGroup::symmetric(degree);
        }
        let cyc: Vec<usize> = (0..degree).map(|i| (i + 1) % degree).collect();
        let refl: Vec<usize> = (0..degree).map(|i| (degree - i) % degree).collect();
        FiniteGroup::new(
            degree,
            vec![
                Permutation::from_images(&cyc).unwrap(),
                Permutation::from_images(&refl).unwrap(),
            ],
        )
        .unwrap()
    }

    pub fn from_cycle_strings(degree: usize, gens: &[&str]) -> Result<Self> {
        let gens = gens
            .iter()
            .map(|s| Permutation::parse_cycles(s, degree))
            .collect::<Result<Vec<_>>>()?;
        FiniteGroup::new(degree, gens)
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn generators(&self) -> &[Permutation] {
        &self.generators
    }

    /// The wreath product `H wr S_k` in its imprimitive action on
    /// `k * deg(H)` points: `H` acts independently in each of the `k`
    /// copies, `S_k` permutes the copies.
    pub fn wreath_on_copies(inner: &FiniteGroup, copies: usize) -> Self {
        let m = inner.degree();
        let n = m * copies;
        let mut gens = Vec::new();
        for g in inner.generators() {
            let mut im: Vec<usize> = (0..n).collect();
            for r in 0..m {
                im[r] = g.apply(r);
            }
            gens.push(Permutation::from_images(&im).unwrap());
        }
        if copies >= 2 {
            let mut cyc: Vec<usize> = (0..n).collect();
            for i in 0..copies {
                for r in 0..m {
                    cyc[i * m + r] = ((i + 1) % copies) * m + r;
                }
            }
            gens.push(Permutation::from_images(&cyc).unwrap());
            if copies >= 3 {
                let mut tr: Vec<usize> = (0..n).collect();
                for r in 0..m {
                    tr[r] = m + r;
                    tr[m + r] = r;
                }
                gens.push(Permutation::from_images(&tr).unwrap());
            }
        }
        FiniteGroup::new(n, gens).unwrap()
    }

    /// The direct product on blocks `H [] S_k`: `H` acts diagonally in all
    /// `k` copies at once, `S_k` permutes the copies.
    pub fn diagonal_on_copies(inner: &FiniteGroup, copies: usize) -> Self {
        let m = inner.degree();
        let n = m * copies;
        let mut gens = Vec::new();
        for g in inner.generators() {
            let mut im: Vec<usize> = (0..n).collect();
            for i in 0..copies {
                for r in 0..m {
                    im[i * m + r] = i * m + g.apply(r);
                }
            }
            gens.push(Permutation::from_images(&im).unwrap());
        }
        if copies >= 2 {
            let mut cyc: Vec<usize> = (0..n).collect();
            for i in 0..copies {
                for r in 0..m {
                    cyc[i * m + r] = ((i + 1) % copies) * m + r;
                }
            }
            gens.push(Permutation::from_images(&cyc).unwrap());
            if copies >= 3 {
                let mut tr: Vec<usize> = (0..n).collect();
                for r in 0..m {
                    tr[r] = m + r;
                    tr[m + r] = r;
                }
                gens.push(Permutation::from_images(&tr).unwrap());
            }
        }
        FiniteGroup::new(n, gens).unwrap()
    }

    /// Direct product acting on the disjoint union of the two domains.
    pub fn direct_product_groups(a: &FiniteGroup, b: &FiniteGroup) -> Self {
        let n = a.degree() + b.degree();
        let mut gens = Vec::new();
        for g in a.generators() {
            let mut im: Vec<usize> = (0..n).collect();
            for p in 0..a.degree() {
                im[p] = g.apply(p);
            }
            gens.push(Permutation::from_images(&im).unwrap());
        }
        for g in b.generators() {
            let mut im: Vec<usize> = (0..n).collect();
            for p in 0..b.degree() {
                im[a.degree() + p] = a.degree() + g.apply(p);
            }
            gens.push(Permutation::from_images(&im).unwrap());
        }
        FiniteGroup::new(n, gens).unwrap()
    }

    /// Full element set in deterministic breadth-first order.
    pub fn elements(&self) -> Result<&[Permutation]> {
        if let Some(e) = self.elements.get() {
            return Ok(e);
        }
        let cap = element_cap();
        let mut order: Vec<Permutation> = vec![Permutation::identity(self.degree)];
        let mut seen: BTreeSet<Permutation> = order.iter().cloned().collect();
        let mut frontier = 0usize;
        while frontier < order.len() {
            let cur = order[frontier].clone();
            frontier += 1;
            for g in &self.generators {
                let next = cur.then(g);
                if seen.insert(next.clone()) {
                    if order.len() as u64 >= cap {
                        return Err(Error::SizeLimit(format!(
                            "element enumeration exceeded cap {cap}"
                        )));
                    }
                    order.push(next);
                }
            }
        }
        let _ = self.elements.set(order);
        Ok(self.elements.get().unwrap())
    }

    pub fn stab_chain(&self) -> &StabChain {
        self.chain
            .get_or_init(|| StabChain::build(self.degree, &self.generators, &[]))
    }

    /// Group order, via the stabilizer chain.
    pub fn order(&self) -> u128 {
        self.stab_chain().order()
    }

    pub fn contains(&self, p: &Permutation) -> bool {
        if p.degree() != self.degree {
            return false;
        }
        self.stab_chain().contains(p)
    }

    /// True iff every element of `other` belongs to `self`.
    pub fn contains_group(&self, other: &FiniteGroup) -> bool {
        other.generators.iter().all(|g| self.contains(g))
    }

    pub fn same_group(&self, other: &FiniteGroup) -> bool {
        self.degree == other.degree
            && self.contains_group(other)
            && other.contains_group(self)
    }

    /// Orbit partition of the domain; blocks ordered by least element.
    pub fn orbits_points(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.degree];
        let mut out = Vec::new();
        for start in 0..self.degree {
            if seen[start] {
                continue;
            }
            let mut orbit = vec![start];
            seen[start] = true;
            let mut i = 0;
            while i < orbit.len() {
                let p = orbit[i];
                i += 1;
                for g in &self.generators {
                    let q = g.apply(p);
                    if !seen[q] {
                        seen[q] = true;
                        orbit.push(q);
                    }
                }
            }
            orbit.sort_unstable();
            out.push(orbit);
        }
        out
    }

    /// Orbit of one point together with a transversal: for each orbit point
    /// `q`, a group element mapping `point` to `q`.
    pub fn orbit_transversal(&self, point: usize) -> BTreeMap<usize, Permutation> {
        let mut map = BTreeMap::new();
        map.insert(point, Permutation::identity(self.degree));
        let mut queue = vec![point];
        let mut i = 0;
        while i < queue.len() {
            let p = queue[i];
            i += 1;
            let t = map[&p].clone();
            for g in &self.generators {
                let q = g.apply(p);
                if !map.contains_key(&q) {
                    map.insert(q, t.then(g));
                    queue.push(q);
                }
            }
        }
        map
    }

    /// Generators of the pointwise stabilizer of `points`, via a stabilizer
    /// chain with those points as base prefix. Works at any group order.
    pub fn pointwise_stabilizer(&self, points: &[usize]) -> FiniteGroup {
        let chain = StabChain::build(self.degree, &self.generators, points);
        let gens = chain.stabilizer_generators(points.len());
        FiniteGroup::new(self.degree, gens).unwrap()
    }

    /// Setwise stabilizer by element filtering (desk scale: requires
    /// element enumeration within the cap).
    pub fn setwise_stabilizer(&self, set: &[usize]) -> Result<FiniteGroup> {
        let want: BTreeSet<usize> = set.iter().copied().collect();
        let mut gens = Vec::new();
        for e in self.elements()? {
            let image: BTreeSet<usize> = want.iter().map(|&p| e.apply(p)).collect();
            if image == want {
                gens.push(e.clone());
            }
        }
        FiniteGroup::new(self.degree, gens)
    }

    /// Restriction to a stable subset, relabelled by the sorted order of `set`.
    pub fn restriction(&self, set: &[usize]) -> Result<FiniteGroup> {
        let mut sorted: Vec<usize> = set.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        let mut position = BTreeMap::new();
        for (i, &p) in sorted.iter().enumerate() {
            position.insert(p, i);
        }
        let mut gens = Vec::new();
        for g in &self.generators {
            let mut im = vec![0usize; sorted.len()];
            for (i, &p) in sorted.iter().enumerate() {
                let q = g.apply(p);
                match position.get(&q) {
                    Some(&j) => im[i] = j,
                    None => {
                        return Err(Error::NotStable(format!(
                            "generator {} maps {p} outside {sorted:?}",
                            g.to_cycle_string()
                        )))
                    }
                }
            }
            gens.push(Permutation::from_images(&im)?);
        }
        FiniteGroup::new(sorted.len(), gens)
    }

    /// True iff `sub` is a normal subgroup of `self`. Checks containment
    /// first and conjugates `sub`'s generators by `self`'s generators.
    pub fn is_normal(&self, sub: &FiniteGroup) -> Result<bool> {
        if sub.degree != self.degree {
            return Err(Error::DomainMismatch {
                expected: self.degree,
                got: sub.degree,
            });
        }
        if !self.contains_group(sub) {
            return Err(Error::NotSubgroup(format!(
                "candidate subgroup {sub:?} is not contained in the group"
            )));
        }
        for g in &self.generators {
            for h in &sub.generators {
                if !sub.contains(&h.conjugate_by(g)) {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// Age of the group up to degree `nmax`: for each `1 <= n <= nmax`, the
    /// subset-orbit summaries with lexicographically minimal representatives.
    pub fn age(&self, nmax: usize) -> Result<Vec<Vec<SubsetOrbitSummary>>> {
        if nmax > self.degree {
            return Err(Error::Precondition(format!(
                "age degree {nmax} exceeds domain size {}",
                self.degree
            )));
        }
        let mut per_degree = Vec::new();
        for n in 1..=nmax {
            let mut summaries = Vec::new();
            let mut visited: BTreeSet<Vec<usize>> = BTreeSet::new();
            let mut comb: Vec<usize> = (0..n).collect();
            loop {
                if !visited.contains(&comb) {
                    // first hit in lex order is the lex-min representative
                    let mut orbit: BTreeSet<Vec<usize>> = BTreeSet::new();
                    orbit.insert(comb.clone());
                    let mut queue = vec![comb.clone()];
                    let mut i = 0;
                    while i < queue.len() {
                        let cur = queue[i].clone();
                        i += 1;
                        for g in &self.generators {
                            let mut img: Vec<usize> =
                                cur.iter().map(|&p| g.apply(p)).collect();
                            img.sort_unstable();
                            if orbit.insert(img.clone()) {
                                queue.push(img);
                            }
                        }
                    }
                    summaries.push(SubsetOrbitSummary {
                        degree: n,
                        representative: comb.clone(),
                        orbit_size: orbit.len(),
                    });
                    visited.extend(orbit);
                }
                if !next_combination(&mut comb, self.degree) {
                    break;
                }
            }
            per_degree.push(summaries);
        }
        Ok(per_degree)
    }

    /// Orbit counts of n-subsets, 1 <= n <= nmax.
    pub fn age_counts(&self, nmax: usize) -> Result<Vec<usize>> {
        Ok(self.age(nmax)?.iter().map(|v| v.len()).collect())
    }

    /// Number of orbits of nonempty subsets (the size of the positive age).
    pub fn age_positive_size(&self) -> Result<usize> {
        Ok(self.age_counts(self.degree)?.iter().sum())
    }
}

/// One orbit of n-subsets: its degree, lexicographically minimal
/// representative and orbit size.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubsetOrbitSummary {
    pub degree: usize,
    pub representative: Vec<usize>,
    pub orbit_size: usize,
}

/// Advances `comb` to the next n-combination of `0..n_points` in
/// lexicographic order; returns false after the last one.
fn next_combination(comb: &mut [usize], n_points: usize) -> bool {
    let k = comb.len();
    if k == 0 {
        return false;
    }
    let mut i = k;
    while i > 0 {
        i -= 1;
        if comb[i] < n_points - (k - i) {
            comb[i] += 1;
            for j in i + 1..k {
                comb[j] = comb[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Induced action of `G` on the blocks of a partition that is stable under
/// the generators; returns the image group on block indices and the
/// per-generator block images.
pub fn induced_action(
    group: &FiniteGroup,
    blocks: &[Vec<usize>],
) -> Result<(FiniteGroup, Vec<Vec<usize>>)> {
    let mut block_of = vec![usize::MAX; group.degree()];
    for (bi, b) in blocks.iter().enumerate() {
        for &p in b {
            if p >= group.degree() || block_of[p] != usize::MAX {
                return Err(Error::NotBlockSystem(format!(
                    "partition does not cover the domain disjointly at point {p}"
                )));
            }
            block_of[p] = bi;
        }
    }
    if block_of.iter().any(|&b| b == usize::MAX) {
        return Err(Error::NotBlockSystem("partition does not cover the domain".into()));
    }
    let mut images = Vec::new();
    let mut gens = Vec::new();
    for g in group.generators() {
        let mut img = vec![usize::MAX; blocks.len()];
        for (bi, b) in blocks.iter().enumerate() {
            let target = block_of[g.apply(b[0])];
            for &p in b {
                if block_of[g.apply(p)] != target {
                    return Err(Error::NotBlockSystem(format!(
                        "generator {} splits block {bi}",
                        g.to_cycle_string()
                    )));
                }
            }
            img[bi] = target;
        }
        gens.push(Permutation::from_images(&img)?);
        images.push(img);
    }
    Ok((FiniteGroup::new(blocks.len(), gens)?, images))
}

/// Subdirect product of `g1` and `g2` with respect to normal subgroups
/// `n1`, `n2` and an explicit coset correspondence: `matching[i]` pairs a
/// coset representative of `n1` in `g1` with its image representative in
/// `g2`. The result acts on the disjoint union of the two domains.
pub fn subdirect(
    g1: &FiniteGroup,
    g2: &FiniteGroup,
    n1: &FiniteGroup,
    n2: &FiniteGroup,
    matching: &[(Permutation, Permutation)],
) -> Result<FiniteGroup> {
    if !g1.is_normal(n1)? {
        return Err(Error::NotNormal("first subgroup is not normal".into()));
    }
    if !g2.is_normal(n2)? {
        return Err(Error::NotNormal("second subgroup is not normal".into()));
    }
    let e1 = g1.elements()?;
    let e2 = g2.elements()?;
    let n1els: BTreeSet<&Permutation> = n1.elements()?.iter().collect();
    let n2els: BTreeSet<&Permutation> = n2.elements()?.iter().collect();

    // canonical coset labels: minimum element of the coset
    let coset_min = |els: &[Permutation], nels: &BTreeSet<&Permutation>, x: &Permutation| {
        let _ = els;
        let mut best: Option<Permutation> = None;
        for n in nels.iter() {
            let y = (*n).then(x);
            if best.as_ref().map_or(true, |b| y < *b) {
                best = Some(y);
            }
        }
        best.unwrap()
    };

    let index1 = e1.len() / n1els.len();
    let index2 = e2.len() / n2els.len();
    if index1 != index2 || matching.len() != index1 {
        return Err(Error::BadCorrespondence(format!(
            "expected {index1} coset pairs, got {} (other side has {index2})",
            matching.len()
        )));
    }

    let mut map: BTreeMap<Permutation, Permutation> = BTreeMap::new();
    for (a, b) in matching {
        if !g1.contains(a) || !g2.contains(b) {
            return Err(Error::BadCorrespondence(
                "representative outside its group".into(),
            ));
        }
        let ka = coset_min(e1, &n1els, a);
        let kb = coset_min(e2, &n2els, b);
        if map.insert(ka, kb).is_some() {
            return Err(Error::BadCorrespondence("duplicate coset on the left".into()));
        }
    }
    let distinct: BTreeSet<&Permutation> = map.values().collect();
    if distinct.len() != map.len() {
        return Err(Error::BadCorrespondence("correspondence is not injective".into()));
    }
    // homomorphism check on generators of the quotient: use all pairs
    for (a1, b1) in matching {
        for (a2, b2) in matching {
            let ka = coset_min(e1, &n1els, &a1.then(a2));
            let kb = coset_min(e2, &n2els, &b1.then(b2));
            if map.get(&ka) != Some(&kb) {
                return Err(Error::BadCorrespondence(
                    "correspondence is not a homomorphism of quotients".into(),
                ));
            }
        }
    }

    let d1 = g1.degree();
    let n = d1 + g2.degree();
    let pair = |a: &Permutation, b: &Permutation| {
        let mut im: Vec<usize> = (0..n).collect();
        for p in 0..d1 {
            im[p] = a.apply(p);
        }
        for p in 0..g2.degree() {
            im[d1 + p] = d1 + b.apply(p);
        }
        Permutation::from_images(&im).unwrap()
    };

    let mut gens = Vec::new();
    for h in n1.generators() {
        gens.push(pair(h, &Permutation::identity(g2.degree())));
    }
    for h in n2.generators() {
        gens.push(pair(&Permutation::identity(d1), h));
    }
    for (a, b) in matching {
        gens.push(pair(a, b));
    }
    let result = FiniteGroup::new(n, gens)?;
    let expect = (e1.len() as u128) * (n2els.len() as u128);
    if result.order() != expect {
        return Err(Error::BadCorrespondence(format!(
            "subdirect order {} differs from |G1||N2| = {expect}",
            result.order()
        )));
    }
    Ok(result)
}

// ---------------------------------------------------------------------------
// Stabilizer chains (deterministic Schreier-Sims)
// ---------------------------------------------------------------------------

/// A stabilizer chain with an optional prescribed base prefix.
///
/// Level `i` stores a base point, the generators of the stabilizer of the
/// first `i` base points, and a transversal of the orbit of the base point
/// under those generators.
#[derive(Clone, Debug)]
pub struct StabChain {
    degree: usize,
    levels: Vec<Level>,
}

#[derive(Clone, Debug)]
struct Level {
    beta: usize,
    gens: Vec<Permutation>,
    /// transversal[p] maps beta to p for p in the orbit
    transversal: Vec<Option<Permutation>>,
    orbit: Vec<usize>,
}

impl Level {
    fn new(degree: usize, beta: usize) -> Self {
        let mut transversal = vec![None; degree];
        transversal[beta] = Some(Permutation::identity(degree));
        Level {
            beta,
            gens: Vec::new(),
            transversal,
            orbit: vec![beta],
        }
    }

    fn recompute_orbit(&mut self, degree: usize) {
        self.transversal = vec![None; degree];
        self.transversal[self.beta] = Some(Permutation::identity(degree));
        self.orbit = vec![self.beta];
        let mut i = 0;
        while i < self.orbit.len() {
            let p = self.orbit[i];
            i += 1;
            let t = self.transversal[p].clone().unwrap();
            for g in &self.gens {
                let q = g.apply(p);
                if self.transversal[q].is_none() {
                    self.transversal[q] = Some(t.then(g));
                    self.orbit.push(q);
                }
            }
        }
    }
}

impl StabChain {
    /// Builds a chain for the group generated by `gens`, with `base_prefix`
    /// installed (in order) as the first base points.
    pub fn build(degree: usize, gens: &[Permutation], base_prefix: &[usize]) -> Self {
        let mut chain = StabChain {
            degree,
            levels: base_prefix
                .iter()
                .map(|&b| Level::new(degree, b))
                .collect(),
        };
        for g in gens {
            if !g.is_identity() {
                chain.add_generator_from(0, g.clone());
            }
        }
        chain.schreier_sims();
        chain
    }

    fn ensure_level_for(&mut self, perm: &Permutation) {
        // append a base point moved by perm if it fixes the whole base
        let moved = self
            .levels
            .iter()
            .any(|l| perm.apply(l.beta) != l.beta);
        if !moved {
            let beta = (0..self.degree)
                .find(|&p| perm.apply(p) != p)
                .expect("non-identity permutation moves a point");
            self.levels.push(Level::new(self.degree, beta));
        }
    }

    /// Adds `g` as a generator at every level `>= from` whose preceding
    /// base points it fixes.
    fn add_generator_from(&mut self, from: usize, g: Permutation) {
        self.ensure_level_for(&g);
        let mut l = from;
        loop {
            if l >= self.levels.len() {
                break;
            }
            self.levels[l].gens.push(g.clone());
            if g.apply(self.levels[l].beta) != self.levels[l].beta {
                break;
            }
            l += 1;
        }
    }

    fn strip(&self, perm: &Permutation, from: usize) -> (Permutation, usize) {
        let mut g = perm.clone();
        for l in from..self.levels.len() {
            let p = g.apply(self.levels[l].beta);
            match &self.levels[l].transversal[p] {
                Some(t) => {
                    g = g.then(&t.inverse());
                }
                None => return (g, l),
            }
        }
        (g, self.levels.len())
    }

    fn schreier_sims(&mut self) {
        for l in 0..self.levels.len() {
            self.levels[l].recompute_orbit(self.degree);
        }
        if self.levels.is_empty() {
            return;
        }
        let mut i = self.levels.len() as isize - 1;
        while i >= 0 {
            let iu = i as usize;
            self.levels[iu].recompute_orbit(self.degree);
            let mut clean = true;
            'level: for oi in 0..self.levels[iu].orbit.len() {
                let p = self.levels[iu].orbit[oi];
                let t_p = self.levels[iu].transversal[p].clone().unwrap();
                for gi in 0..self.levels[iu].gens.len() {
                    let s = self.levels[iu].gens[gi].clone();
                    let q = s.apply(p);
                    let t_q = self.levels[iu].transversal[q].clone().unwrap();
                    let schreier = t_p.then(&s).then(&t_q.inverse());
                    if schreier.is_identity() {
                        continue;
                    }
                    let (residue, j) = self.strip(&schreier, iu + 1);
                    if !residue.is_identity() {
                        self.ensure_level_for(&residue);
                        let upto = j.min(self.levels.len() - 1);
                        for l in iu + 1..=upto {
                            self.levels[l].gens.push(residue.clone());
                            self.levels[l].recompute_orbit(self.degree);
                        }
                        i = upto as isize;
                        clean = false;
                        break 'level;
                    }
                }
            }
            if clean {
                i -= 1;
            }
        }
    }

    pub fn order(&self) -> u128 {
        self.levels
            .iter()
            .map(|l| l.orbit.len() as u128)
            .product()
    }

    pub fn contains(&self, p: &Permutation) -> bool {
        let (residue, l) = self.strip(p, 0);
        l == self.levels.len() && residue.is_identity()
    }

    /// Generators of the stabilizer of the first `prefix_len` base points.
    /// Valid when the chain was built with at least that base prefix.
    pub fn stabilizer_generators(&self, prefix_len: usize) -> Vec<Permutation> {
        if prefix_len >= self.levels.len() {
            return Vec::new();
        }
        let mut out: Vec<Permutation> = Vec::new();
        let mut seen = BTreeSet::new();
        for g in &self.levels[prefix_len].gens {
            if seen.insert(g.clone()) {
                out.push(g.clone());
            }
        }
        out
    }

    pub fn base(&self) -> Vec<usize> {
        self.levels.iter().map(|l| l.beta).collect()
    }
}

/// Kernel of the action of `group` on a stable partition: the subgroup
/// stabilizing every block setwise, computed through a stabilizer chain on
/// the domain extended by one point per block.
pub fn blockwise_stabilizer(group: &FiniteGroup, blocks: &[Vec<usize>]) -> Result<FiniteGroup> {
    let n = group.degree();
    let b = blocks.len();
    let mut block_of = vec![usize::MAX; n];
    for (bi, blk) in blocks.iter().enumerate() {
        for &p in blk {
            block_of[p] = bi;
        }
    }
    let mut ext_gens = Vec::new();
    for g in group.generators() {
        let mut im: Vec<usize> = (0..n + b).collect();
        for p in 0..n {
            im[p] = g.apply(p);
        }
        for (bi, blk) in blocks.iter().enumerate() {
            let target = block_of[g.apply(blk[0])];
            for &p in blk {
                if block_of[g.apply(p)] != target {
                    return Err(Error::NotBlockSystem(format!(
                        "generator {} splits block {bi}",
                        g.to_cycle_string()
                    )));
                }
            }
            im[n + bi] = n + target;
        }
        ext_gens.push(Permutation::from_images(&im)?);
    }
    let base: Vec<usize> = (n..n + b).collect();
    let chain = StabChain::build(n + b, &ext_gens, &base);
    let gens = chain
        .stabilizer_generators(b)
        .into_iter()
        .map(|g| {
            let im: Vec<usize> = (0..n).map(|p| g.apply(p)).collect();
            Permutation::from_images(&im).unwrap()
        })
        .collect();
    FiniteGroup::new(n, gens)
}

/// Subgroup of `group` stabilizing setwise each member of `family` listed
/// in `which`, given that the generators permute `family` among
/// themselves (e.g. the blocks of a stable partition); works at any group
/// order via a chain on the domain extended by one point per family
/// member, with the chosen members' points as base prefix.
pub fn family_stabilizer(
    group: &FiniteGroup,
    family: &[Vec<usize>],
    which: &[usize],
) -> Result<FiniteGroup> {
    let n = group.degree();
    let b = family.len();
    let mut set_of = vec![usize::MAX; n];
    for (si, s) in family.iter().enumerate() {
        for &p in s {
            set_of[p] = si;
        }
    }
    let mut ext_gens = Vec::new();
    for g in group.generators() {
        let mut im: Vec<usize> = (0..n + b).collect();
        for p in 0..n {
            im[p] = g.apply(p);
        }
        for (si, s) in family.iter().enumerate() {
            let target = set_of[g.apply(s[0])];
            if target == usize::MAX {
                return Err(Error::NotStable(format!(
                    "generator {} maps family member {si} outside the family",
                    g.to_cycle_string()
                )));
            }
            for &p in s {
                if set_of[g.apply(p)] != target {
                    return Err(Error::NotStable(format!(
                        "generator {} splits family member {si}",
                        g.to_cycle_string()
                    )));
                }
            }
            im[n + si] = n + target;
        }
        ext_gens.push(Permutation::from_images(&im)?);
    }
    let base: Vec<usize> = which.iter().map(|&i| n + i).collect();
    let chain = StabChain::build(n + b, &ext_gens, &base);
    let gens = chain
        .stabilizer_generators(which.len())
        .into_iter()
        .map(|g| {
            let im: Vec<usize> = (0..n).map(|p| g.apply(p)).collect();
            Permutation::from_images(&im).unwrap()
        })
        .collect();
    FiniteGroup::new(n, gens)
}
