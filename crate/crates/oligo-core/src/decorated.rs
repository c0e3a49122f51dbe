//! The classification datum: a finite permutation group together with a
//! block system and one decoration (a finite group and an infinite-part
//! tag) per block. Covers validation, the standard constructors,
//! isomorphism testing, the lattice lower bound and small-scale
//! enumeration.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::blocksys::{is_block_system, SetPartition};
use crate::error::{Error, Result};
use crate::perm::{FiniteGroup, Permutation};

/// Tag for the infinite part attached to a block: one of the five closed
/// highly homogeneous groups, or the marker for the finite kernel block.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug, Hash)]
pub enum HHKind {
    SymInf,
    AutQ,
    RevQ,
    AutQZ,
    RevQZ,
    TrivialKernel,
}

impl HHKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            HHKind::SymInf => "SymInf",
            HHKind::AutQ => "AutQ",
            HHKind::RevQ => "RevQ",
            HHKind::AutQZ => "AutQZ",
            HHKind::RevQZ => "RevQZ",
            HHKind::TrivialKernel => "TrivialKernel",
        }
    }

    pub fn from_str_tag(s: &str) -> Result<HHKind> {
        Ok(match s {
            "SymInf" => HHKind::SymInf,
            "AutQ" => HHKind::AutQ,
            "RevQ" => HHKind::RevQ,
            "AutQZ" => HHKind::AutQZ,
            "RevQZ" => HHKind::RevQZ,
            "TrivialKernel" => HHKind::TrivialKernel,
            other => {
                return Err(Error::Precondition(format!("unknown kind tag {other:?}")))
            }
        })
    }

    pub fn is_rev(&self) -> bool {
        matches!(self, HHKind::RevQ | HHKind::RevQZ)
    }
}

/// Decoration of one block: a finite group acting on the block (in
/// block-local coordinates, i.e. on `{0..|B|-1}` through the sorted order
/// of the block) and the kind of the attached infinite part.
#[derive(Clone, Debug)]
pub struct Decoration {
    pub h: FiniteGroup,
    pub kind: HHKind,
}

/// A constraint violation found by [`DecoratedGroup::validate`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub constraint: String,
    pub block: Option<usize>,
}

/// The classification datum: finite group `F` on a domain `U`, a block
/// system for `F`, and one decoration per block (equal along F-orbits of
/// blocks).
#[derive(Clone, Debug)]
pub struct DecoratedGroup {
    f: FiniteGroup,
    blocks: SetPartition,
    decorations: Vec<Decoration>,
}

impl DecoratedGroup {
    /// Structural construction: checks that the partition is a block
    /// system for `F` and that decorations line up with the blocks.
    /// Semantic constraints are reported by [`validate`](Self::validate).
    pub fn new(
        f: FiniteGroup,
        blocks: SetPartition,
        decorations: Vec<Decoration>,
    ) -> Result<Self> {
        if blocks.degree() != f.degree() {
            return Err(Error::DomainMismatch {
                expected: f.degree(),
                got: blocks.degree(),
            });
        }
        if !is_block_system(&f, &blocks) {
            return Err(Error::NotBlockSystem(
                "partition is not stable under F".to_string(),
            ));
        }
        if decorations.len() != blocks.block_count() {
            return Err(Error::Precondition(format!(
                "expected {} decorations, got {}",
                blocks.block_count(),
                decorations.len()
            )));
        }
        for (j, d) in decorations.iter().enumerate() {
            if d.h.degree() != blocks.blocks()[j].len() {
                return Err(Error::DomainMismatch {
                    expected: blocks.blocks()[j].len(),
                    got: d.h.degree(),
                });
            }
        }
        Ok(DecoratedGroup {
            f,
            blocks,
            decorations,
        })
    }

    /// The empty datum on zero points (identity for products).
    pub fn empty() -> Self {
        DecoratedGroup {
            f: FiniteGroup::identity_group(0),
            blocks: SetPartition::singletons(0),
            decorations: Vec::new(),
        }
    }

    pub fn f(&self) -> &FiniteGroup {
        &self.f
    }

    pub fn blocks(&self) -> &SetPartition {
        &self.blocks
    }

    pub fn decorations(&self) -> &[Decoration] {
        &self.decorations
    }

    pub fn degree(&self) -> usize {
        self.f.degree()
    }

    pub fn kernel_block(&self) -> Option<usize> {
        self.decorations
            .iter()
            .position(|d| d.kind == HHKind::TrivialKernel)
    }

    /// Checks every semantic constraint; an empty list means the datum is
    /// valid. Violations are data, not errors.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let blocks = self.blocks.blocks();

        let kernels = self
            .decorations
            .iter()
            .filter(|d| d.kind == HHKind::TrivialKernel)
            .count();
        if kernels > 1 {
            out.push(Violation {
                constraint: "at most one block may have kind TrivialKernel".to_string(),
                block: None,
            });
        }

        for (j, d) in self.decorations.iter().enumerate() {
            let size = blocks[j].len();
            match d.kind {
                HHKind::TrivialKernel => {
                    if d.h.order() != 1 {
                        out.push(Violation {
                            constraint: "kernel block must carry the trivial group"
                                .to_string(),
                            block: Some(j),
                        });
                    }
                }
                HHKind::RevQ | HHKind::RevQZ => {
                    if size != 2 || d.h.order() != 1 {
                        out.push(Violation {
                            constraint:
                                "Rev kinds require a 2-point block with trivial H"
                                    .to_string(),
                            block: Some(j),
                        });
                    }
                }
                HHKind::AutQ | HHKind::AutQZ => {
                    if size != 1 {
                        out.push(Violation {
                            constraint: "AutQ/AutQZ kinds require a singleton block"
                                .to_string(),
                            block: Some(j),
                        });
                    }
                }
                HHKind::SymInf => {}
            }
        }

        // H_j normal in the restriction to B_j of the pointwise stabilizer
        // of every other block
        for (j, d) in self.decorations.iter().enumerate() {
            let others: Vec<usize> = (0..self.f.degree())
                .filter(|p| !blocks[j].contains(p))
                .collect();
            let fix = self.f.pointwise_stabilizer(&others);
            match fix.restriction(&blocks[j]) {
                Ok(r) => match r.is_normal(&d.h) {
                    Ok(true) => {}
                    Ok(false) => out.push(Violation {
                        constraint: "H is not normal in the stabilizer restriction"
                            .to_string(),
                        block: Some(j),
                    }),
                    Err(_) => out.push(Violation {
                        constraint:
                            "H is not contained in the stabilizer restriction"
                                .to_string(),
                        block: Some(j),
                    }),
                },
                Err(_) => out.push(Violation {
                    constraint: "stabilizer does not leave the block stable".to_string(),
                    block: Some(j),
                }),
            }
        }

        // decorations constant along F-orbits of blocks: each generator
        // transports H_j onto H_{f(j)} and preserves the kind
        for g in self.f.generators() {
            for (j, d) in self.decorations.iter().enumerate() {
                let jt = self.block_image(g, j);
                let dt = &self.decorations[jt];
                if d.kind != dt.kind {
                    out.push(Violation {
                        constraint: "kind differs along an F-orbit of blocks"
                            .to_string(),
                        block: Some(j),
                    });
                    continue;
                }
                let transported = transport_group(&d.h, &blocks[j], &blocks[jt], g);
                if !transported.same_group(&dt.h) {
                    out.push(Violation {
                        constraint: "H is not transported onto its orbit partner"
                            .to_string(),
                        block: Some(j),
                    });
                }
            }
        }

        out
    }

    pub fn is_valid(&self) -> bool {
        self.validate().is_empty()
    }

    fn block_image(&self, g: &Permutation, j: usize) -> usize {
        let p = self.blocks.blocks()[j][0];
        let cls = self.blocks.class_of();
        cls[g.apply(p)]
    }

    /// `|F| / prod_j |H_j|` — the index of the minimal finite-index
    /// subgroup of the encoded group.
    pub fn index_of_minimal_subgroup(&self) -> u128 {
        let mut h_prod: u128 = 1;
        for d in &self.decorations {
            h_prod *= d.h.order();
        }
        self.f.order() / h_prod
    }
}

/// Conjugates a block-local group on `from` to the corresponding
/// block-local group on `to` through the global permutation `g` (which
/// maps `from` onto `to`).
fn transport_group(
    h: &FiniteGroup,
    from: &[usize],
    to: &[usize],
    g: &Permutation,
) -> FiniteGroup {
    // position of each global point of `to` in its sorted order
    let pos_to = |p: usize| to.iter().position(|&q| q == p).unwrap();
    let mut gens = Vec::new();
    for hgen in h.generators() {
        let mut im = vec![0usize; to.len()];
        for (local_from, &global_from) in from.iter().enumerate() {
            let local_image = hgen.apply(local_from);
            let global_image = from[local_image];
            im[pos_to(g.apply(global_from))] = pos_to(g.apply(global_image));
        }
        gens.push(Permutation::from_images(&im).unwrap());
    }
    FiniteGroup::new(to.len(), gens).unwrap()
}

/// Transports a decoration from block `from` to block `to` of the
/// partition through any element of `f` mapping one onto the other; the
/// kind is carried along unchanged. Fails when the blocks lie in
/// different F-orbits.
pub fn transport_along(
    f: &FiniteGroup,
    blocks: &SetPartition,
    from: usize,
    to: usize,
    deco: &Decoration,
) -> Result<Decoration> {
    if from == to {
        return Ok(deco.clone());
    }
    let cls = blocks.class_of();
    // breadth-first search over block images, tracking a witness element
    let mut witness: BTreeMap<usize, Permutation> = BTreeMap::new();
    witness.insert(from, Permutation::identity(f.degree()));
    let mut queue = vec![from];
    let mut i = 0;
    while i < queue.len() {
        let b = queue[i];
        i += 1;
        let w = witness[&b].clone();
        for g in f.generators() {
            let b2 = cls[g.apply(blocks.blocks()[b][0])];
            if let alloc::collections::btree_map::Entry::Vacant(e) = witness.entry(b2) {
                e.insert(w.then(g));
                queue.push(b2);
            }
        }
    }
    let g = witness.get(&to).ok_or(Error::DistinctOrbits(from, to))?;
    Ok(Decoration {
        h: transport_group(&deco.h, &blocks.blocks()[from], &blocks.blocks()[to], g),
        kind: deco.kind,
    })
}

// ---------------------------------------------------------------------------
// Constructors
// ---------------------------------------------------------------------------

/// One highly homogeneous atom; `kind` must not be `TrivialKernel`.
pub fn hh_atom(kind: HHKind) -> Result<DecoratedGroup> {
    match kind {
        HHKind::TrivialKernel => Err(Error::Precondition(
            "use kernel_atom for the kernel".to_string(),
        )),
        HHKind::RevQ | HHKind::RevQZ => {
            let f = FiniteGroup::symmetric(2);
            DecoratedGroup::new(
                f,
                SetPartition::one_block(2),
                vec![Decoration {
                    h: FiniteGroup::identity_group(2),
                    kind,
                }],
            )
        }
        _ => DecoratedGroup::new(
            FiniteGroup::identity_group(1),
            SetPartition::one_block(1),
            vec![Decoration {
                h: FiniteGroup::identity_group(1),
                kind,
            }],
        ),
    }
}

/// The finite kernel alone: one block carrying `a` with no infinite part.
pub fn kernel_atom(a: &FiniteGroup) -> Result<DecoratedGroup> {
    DecoratedGroup::new(
        a.clone(),
        SetPartition::one_block(a.degree()),
        vec![Decoration {
            h: FiniteGroup::identity_group(a.degree()),
            kind: HHKind::TrivialKernel,
        }],
    )
}

/// Encodes the wreath product of `h` with the infinite symmetric group.
pub fn wreath_hh(h: &FiniteGroup) -> Result<DecoratedGroup> {
    DecoratedGroup::new(
        h.clone(),
        SetPartition::one_block(h.degree()),
        vec![Decoration {
            h: h.clone(),
            kind: HHKind::SymInf,
        }],
    )
}

/// Encodes the hybrid group generated by the wreath product of `h` and the
/// blockwise-diagonal action of `h0`; requires `h` normal in `h0`.
pub fn hybrid(h0: &FiniteGroup, h: &FiniteGroup) -> Result<DecoratedGroup> {
    if h0.degree() != h.degree() {
        return Err(Error::DomainMismatch {
            expected: h0.degree(),
            got: h.degree(),
        });
    }
    if !h0.is_normal(h)? {
        return Err(Error::NotNormal(
            "hybrid requires H normal in H0".to_string(),
        ));
    }
    DecoratedGroup::new(
        h0.clone(),
        SetPartition::one_block(h0.degree()),
        vec![Decoration {
            h: h.clone(),
            kind: HHKind::SymInf,
        }],
    )
}

/// Encodes the doubly nested wreath product: `h` inside infinitely many
/// blocks, the superblocks permuted by `outer`. `F` is the finite wreath
/// product of `h` with `outer`.
pub fn wreath_outer(h: &FiniteGroup, outer: &FiniteGroup) -> Result<DecoratedGroup> {
    let m = outer.degree().max(1);
    let hm = h.degree();
    let f = wreath_by_group(h, outer);
    let blocks = SetPartition::new(
        m * hm,
        (0..m).map(|i| (i * hm..(i + 1) * hm).collect()).collect(),
    )?;
    let decorations = (0..m)
        .map(|_| Decoration {
            h: h.clone(),
            kind: HHKind::SymInf,
        })
        .collect();
    DecoratedGroup::new(f, blocks, decorations)
}

/// `m = deg(outer)` copies of one highly homogeneous atom, permuted by
/// `outer`. Rev kinds replicate as 2-point blocks each carrying its own
/// order reversal, so `F` is the wreath product of `S2` with `outer`.
pub fn replicate_hh(kind: HHKind, outer: &FiniteGroup) -> Result<DecoratedGroup> {
    if kind == HHKind::TrivialKernel {
        return Err(Error::Precondition(
            "use kernel_atom for the kernel".to_string(),
        ));
    }
    let m = outer.degree().max(1);
    let block_size = if kind.is_rev() { 2 } else { 1 };
    let f = if kind.is_rev() {
        wreath_by_group(&FiniteGroup::symmetric(2), outer)
    } else {
        // outer itself, acting on singleton blocks
        if outer.degree() == 0 {
            FiniteGroup::identity_group(1)
        } else {
            outer.clone()
        }
    };
    let blocks = SetPartition::new(
        m * block_size,
        (0..m)
            .map(|i| (i * block_size..(i + 1) * block_size).collect())
            .collect(),
    )?;
    let decorations = (0..m)
        .map(|_| Decoration {
            h: FiniteGroup::identity_group(block_size),
            kind,
        })
        .collect();
    DecoratedGroup::new(f, blocks, decorations)
}

/// Finite wreath product of `inner` with an arbitrary top group acting on
/// `deg(top)` copies (a degree-0 top group means one copy).
fn wreath_by_group(inner: &FiniteGroup, top: &FiniteGroup) -> FiniteGroup {
    let m = top.degree().max(1);
    let hm = inner.degree();
    let n = m * hm;
    let mut gens = Vec::new();
    for i in 0..m {
        for g in inner.generators() {
            let mut im: Vec<usize> = (0..n).collect();
            for r in 0..hm {
                im[i * hm + r] = i * hm + g.apply(r);
            }
            gens.push(Permutation::from_images(&im).unwrap());
        }
    }
    for g in top.generators() {
        let mut im: Vec<usize> = (0..n).collect();
        for i in 0..m {
            for r in 0..hm {
                im[i * hm + r] = g.apply(i) * hm + r;
            }
        }
        gens.push(Permutation::from_images(&im).unwrap());
    }
    FiniteGroup::new(n, gens).unwrap()
}

/// Direct product of two data on the disjoint union of their domains.
/// If both carry a kernel block, the kernels merge into one block.
pub fn direct_product(d1: &DecoratedGroup, d2: &DecoratedGroup) -> Result<DecoratedGroup> {
    let n1 = d1.degree();
    let f = FiniteGroup::direct_product_groups(d1.f(), d2.f());
    let k1 = d1.kernel_block();
    let k2 = d2.kernel_block();

    let mut blocks: Vec<Vec<usize>> = Vec::new();
    let mut decorations: Vec<Decoration> = Vec::new();
    let mut kernel_points: Vec<usize> = Vec::new();
    for (j, b) in d1.blocks().blocks().iter().enumerate() {
        if Some(j) == k1 {
            kernel_points.extend(b.iter().copied());
        } else {
            blocks.push(b.clone());
            decorations.push(d1.decorations()[j].clone());
        }
    }
    for (j, b) in d2.blocks().blocks().iter().enumerate() {
        let shifted: Vec<usize> = b.iter().map(|&p| p + n1).collect();
        if Some(j) == k2 {
            kernel_points.extend(shifted);
        } else {
            blocks.push(shifted);
            decorations.push(d2.decorations()[j].clone());
        }
    }
    if !kernel_points.is_empty() {
        blocks.push(kernel_points.clone());
        decorations.push(Decoration {
            h: FiniteGroup::identity_group(kernel_points.len()),
            kind: HHKind::TrivialKernel,
        });
    }
    if blocks.is_empty() {
        return Ok(DecoratedGroup::empty());
    }
    let partition = SetPartition::new(f.degree(), blocks)?;
    DecoratedGroup::new(f, partition, decorations)
}

/// Replaces Rev decorations by their order-preserving counterparts,
/// collapsing each 2-point Rev block to a single point and taking the
/// induced action of `F`. The result has the same age (and therefore the
/// same profile series) as the input.
pub fn age_normal_form(delta: &DecoratedGroup) -> Result<DecoratedGroup> {
    if !delta.decorations().iter().any(|d| d.kind.is_rev()) {
        return Ok(delta.clone());
    }
    let blocks = delta.blocks().blocks();
    // new index per old point: Rev blocks keep only their least point
    let mut keep: Vec<bool> = vec![true; delta.degree()];
    for (j, d) in delta.decorations().iter().enumerate() {
        if d.kind.is_rev() {
            for &p in &blocks[j][1..] {
                keep[p] = false;
            }
        }
    }
    let mut new_index = vec![usize::MAX; delta.degree()];
    let mut next = 0;
    for p in 0..delta.degree() {
        if keep[p] {
            new_index[p] = next;
            next += 1;
        }
    }
    // representative point of the collapsed class of each old point
    let cls = delta.blocks().class_of();
    let rep = |p: usize| -> usize {
        if keep[p] {
            p
        } else {
            blocks[cls[p]][0]
        }
    };
    let mut gens = Vec::new();
    for g in delta.f().generators() {
        let mut im = vec![0usize; next];
        for p in 0..delta.degree() {
            if keep[p] {
                im[new_index[p]] = new_index[rep(g.apply(p))];
            }
        }
        gens.push(Permutation::from_images(&im)?);
    }
    let f = FiniteGroup::new(next, gens)?;
    let mut new_blocks = Vec::new();
    let mut decorations = Vec::new();
    for (j, d) in delta.decorations().iter().enumerate() {
        let nb: Vec<usize> = blocks[j]
            .iter()
            .filter(|&&p| keep[p])
            .map(|&p| new_index[p])
            .collect();
        let kind = match d.kind {
            HHKind::RevQ => HHKind::AutQ,
            HHKind::RevQZ => HHKind::AutQZ,
            other => other,
        };
        let h = if d.kind.is_rev() {
            FiniteGroup::identity_group(nb.len())
        } else {
            d.h.clone()
        };
        new_blocks.push(nb);
        decorations.push(Decoration { h, kind });
    }
    DecoratedGroup::new(f, SetPartition::new(next, new_blocks)?, decorations)
}

// ---------------------------------------------------------------------------
// Isomorphism
// ---------------------------------------------------------------------------

const ISO_ORDER_CAP: u128 = 10_000;

/// Tests whether a domain bijection maps one datum onto the other:
/// the bijection must transport `F`, the block system, and every
/// decoration. Returns the witness (image of each point) when one exists.
pub fn isomorphic(d1: &DecoratedGroup, d2: &DecoratedGroup) -> Result<Option<Vec<usize>>> {
    if d1.degree() != d2.degree()
        || d1.blocks().block_count() != d2.blocks().block_count()
        || d1.f().order() != d2.f().order()
    {
        return Ok(None);
    }
    if d1.f().order() > ISO_ORDER_CAP {
        return Err(Error::SizeLimit(format!(
            "isomorphism search capped at |F| = {ISO_ORDER_CAP}"
        )));
    }
    if d1.degree() == 0 {
        return Ok(Some(Vec::new()));
    }
    let b1 = d1.blocks().blocks();
    let b2 = d2.blocks().blocks();
    let mut assignment: Vec<Option<usize>> = vec![None; b1.len()]; // block j of d1 -> block of d2
    let mut used: Vec<bool> = vec![false; b2.len()];
    let mut point_map: Vec<usize> = vec![usize::MAX; d1.degree()];
    let found = assign_blocks(
        d1,
        d2,
        0,
        &mut assignment,
        &mut used,
        &mut point_map,
    );
    Ok(if found { Some(point_map) } else { None })
}

fn assign_blocks(
    d1: &DecoratedGroup,
    d2: &DecoratedGroup,
    j: usize,
    assignment: &mut Vec<Option<usize>>,
    used: &mut Vec<bool>,
    point_map: &mut Vec<usize>,
) -> bool {
    let b1 = d1.blocks().blocks();
    let b2 = d2.blocks().blocks();
    if j == b1.len() {
        return check_full_map(d1, d2, point_map);
    }
    let dec1 = &d1.decorations()[j];
    for t in 0..b2.len() {
        if used[t]
            || b1[j].len() != b2[t].len()
            || dec1.kind != d2.decorations()[t].kind
        {
            continue;
        }
        used[t] = true;
        assignment[j] = Some(t);
        // try every within-block bijection that transports H
        let size = b1[j].len();
        let mut perm: Vec<usize> = (0..size).collect();
        loop {
            if transports_h(&dec1.h, &d2.decorations()[t].h, &perm) {
                for (a, &b) in perm.iter().enumerate() {
                    point_map[b1[j][a]] = b2[t][b];
                }
                if assign_blocks(d1, d2, j + 1, assignment, used, point_map) {
                    return true;
                }
                for a in 0..size {
                    point_map[b1[j][a]] = usize::MAX;
                }
            }
            if !next_permutation(&mut perm) {
                break;
            }
        }
        assignment[j] = None;
        used[t] = false;
    }
    false
}

fn transports_h(h1: &FiniteGroup, h2: &FiniteGroup, perm: &[usize]) -> bool {
    if h1.order() != h2.order() {
        return false;
    }
    for g in h1.generators() {
        let mut im = vec![0usize; perm.len()];
        for a in 0..perm.len() {
            im[perm[a]] = perm[g.apply(a)];
        }
        let cand = Permutation::from_images(&im).unwrap();
        if !h2.contains(&cand) {
            return false;
        }
    }
    true
}

fn check_full_map(d1: &DecoratedGroup, d2: &DecoratedGroup, point_map: &[usize]) -> bool {
    // F must be transported exactly
    for g in d1.f().generators() {
        let mut im = vec![0usize; point_map.len()];
        for p in 0..point_map.len() {
            im[point_map[p]] = point_map[g.apply(p)];
        }
        match Permutation::from_images(&im) {
            Ok(cand) => {
                if !d2.f().contains(&cand) {
                    return false;
                }
            }
            Err(_) => return false,
        }
    }
    true
}

fn next_permutation(perm: &mut [usize]) -> bool {
    let n = perm.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && perm[i - 1] >= perm[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while perm[j] <= perm[i - 1] {
        j -= 1;
    }
    perm.swap(i - 1, j);
    perm[i..].reverse();
    true
}

// ---------------------------------------------------------------------------
// Lower bound
// ---------------------------------------------------------------------------

/// One item of a block-system summary used by [`lower_bound`].
#[derive(Clone, Debug)]
pub enum OrbitDescriptor {
    /// `k` infinite blocks contribute generators of degrees `1..=k`.
    InfiniteBlocks(usize),
    /// A finite block orbit with within-block restriction `G_B`
    /// contributes one generator per orbit of nonempty subsets.
    FiniteBlocks(FiniteGroup),
    /// The kernel contributes nothing.
    Kernel,
}

/// Lower bound on the algebraic dimension read off one block system.
pub fn lower_bound(descriptors: &[OrbitDescriptor]) -> Result<usize> {
    let mut total = 0usize;
    for d in descriptors {
        total += match d {
            OrbitDescriptor::InfiniteBlocks(k) => *k,
            OrbitDescriptor::FiniteBlocks(g) => g.age_positive_size()?,
            OrbitDescriptor::Kernel => 0,
        };
    }
    Ok(total)
}

// ---------------------------------------------------------------------------
// Enumeration
// ---------------------------------------------------------------------------

const ENUM_MAX_DOMAIN: usize = 6;

/// All valid data with domain size at most `max_domain` and `|F|` at most
/// `max_forder`, up to isomorphism, in a deterministic order.
pub fn enumerate(max_domain: usize, max_forder: u128) -> Result<Vec<DecoratedGroup>> {
    if max_domain > ENUM_MAX_DOMAIN {
        return Err(Error::SizeLimit(format!(
            "enumeration capped at domain size {ENUM_MAX_DOMAIN}"
        )));
    }
    let mut out: Vec<DecoratedGroup> = Vec::new();
    for degree in 1..=max_domain {
        for f in subgroups_up_to_conjugacy(degree)? {
            if f.order() > max_forder {
                continue;
            }
            for partition in stable_partitions(&f) {
                for candidate in decorate_all_ways(&f, &partition)? {
                    if !candidate.is_valid() {
                        continue;
                    }
                    let mut dup = false;
                    for seen in &out {
                        if isomorphic(seen, &candidate)?.is_some() {
                            dup = true;
                            break;
                        }
                    }
                    if !dup {
                        out.push(candidate);
                    }
                }
            }
        }
    }
    Ok(out)
}

/// All subgroups of the symmetric group of the given degree, one per
/// conjugacy class, by cyclic extension.
fn subgroups_up_to_conjugacy(degree: usize) -> Result<Vec<FiniteGroup>> {
    let sym = FiniteGroup::symmetric(degree);
    let all = sym.elements()?.to_vec();
    let mut seen: BTreeSet<Vec<Permutation>> = BTreeSet::new();
    let mut subgroups: Vec<(Vec<Permutation>, FiniteGroup)> = Vec::new();
    let trivial = FiniteGroup::identity_group(degree);
    let tel: Vec<Permutation> = trivial.elements()?.to_vec();
    let mut tkey = tel.clone();
    tkey.sort();
    seen.insert(tkey);
    subgroups.push((tel, trivial));
    let mut frontier = 0usize;
    while frontier < subgroups.len() {
        let (els, grp) = subgroups[frontier].clone();
        frontier += 1;
        for g in &all {
            if els.contains(g) {
                continue;
            }
            let mut gens: Vec<Permutation> = grp.generators().to_vec();
            gens.push(g.clone());
            let bigger = FiniteGroup::new(degree, gens)?;
            let mut key: Vec<Permutation> = bigger.elements()?.to_vec();
            key.sort();
            if seen.insert(key.clone()) {
                subgroups.push((key, bigger));
            }
        }
    }
    // keep one representative per conjugacy class (least sorted element
    // list among conjugates)
    let mut reps: Vec<FiniteGroup> = Vec::new();
    let mut covered: BTreeSet<Vec<Permutation>> = BTreeSet::new();
    for (key, grp) in &subgroups {
        if covered.contains(key) {
            continue;
        }
        reps.push(grp.clone());
        for c in &all {
            let mut ckey: Vec<Permutation> =
                key.iter().map(|e| e.conjugate_by(c)).collect();
            ckey.sort();
            covered.insert(ckey);
        }
    }
    Ok(reps)
}

/// All partitions of the domain stable under the group (any number of
/// orbits; exhaustive, so only sensible at tiny degrees).
fn stable_partitions(f: &FiniteGroup) -> Vec<SetPartition> {
    let n = f.degree();
    let mut out = Vec::new();
    let mut ids = vec![0usize; n];
    collect_partitions(f, &mut ids, 1, &mut out);
    out
}

fn collect_partitions(
    f: &FiniteGroup,
    ids: &mut Vec<usize>,
    at: usize,
    out: &mut Vec<SetPartition>,
) {
    let n = f.degree();
    if at == n {
        let p = SetPartition::from_class_ids(ids);
        if is_block_system(f, &p) {
            out.push(p);
        }
        return;
    }
    let max_used = ids[..at].iter().copied().max().unwrap_or(0);
    for c in 0..=max_used + 1 {
        ids[at] = c;
        collect_partitions(f, ids, at + 1, out);
    }
}

/// Every way to decorate the blocks of a stable partition, subject to the
/// local size rules; constancy along orbits and normality are left to
/// `validate`.
fn decorate_all_ways(
    f: &FiniteGroup,
    partition: &SetPartition,
) -> Result<Vec<DecoratedGroup>> {
    let blocks = partition.blocks();
    // per block: the possible decorations
    let mut choices: Vec<Vec<Decoration>> = Vec::new();
    for b in blocks {
        let size = b.len();
        let mut c = Vec::new();
        c.push(Decoration {
            h: FiniteGroup::identity_group(size),
            kind: HHKind::TrivialKernel,
        });
        if size == 1 {
            for kind in [HHKind::SymInf, HHKind::AutQ, HHKind::AutQZ] {
                c.push(Decoration {
                    h: FiniteGroup::identity_group(1),
                    kind,
                });
            }
        } else {
            if size == 2 {
                for kind in [HHKind::RevQ, HHKind::RevQZ] {
                    c.push(Decoration {
                        h: FiniteGroup::identity_group(2),
                        kind,
                    });
                }
            }
            // SymInf with any candidate H inside the stabilizer restriction
            let others: Vec<usize> =
                (0..f.degree()).filter(|p| !b.contains(p)).collect();
            let fix = f.pointwise_stabilizer(&others);
            if let Ok(r) = fix.restriction(b) {
                for h in subgroups_of(&r)? {
                    c.push(Decoration {
                        h,
                        kind: HHKind::SymInf,
                    });
                }
            }
        }
        choices.push(c);
    }
    let mut out = Vec::new();
    let mut pick = vec![0usize; blocks.len()];
    'outer: loop {
        let decorations: Vec<Decoration> = pick
            .iter()
            .enumerate()
            .map(|(j, &c)| choices[j][c].clone())
            .collect();
        if decorations
            .iter()
            .filter(|d| d.kind == HHKind::TrivialKernel)
            .count()
            <= 1
        {
            if let Ok(dg) = DecoratedGroup::new(f.clone(), partition.clone(), decorations)
            {
                out.push(dg);
            }
        }
        for j in 0..blocks.len() {
            pick[j] += 1;
            if pick[j] < choices[j].len() {
                continue 'outer;
            }
            pick[j] = 0;
        }
        break;
    }
    Ok(out)
}

/// All subgroups of a (tiny) group, by cyclic extension over its elements.
fn subgroups_of(g: &FiniteGroup) -> Result<Vec<FiniteGroup>> {
    let all = g.elements()?.to_vec();
    let mut seen: BTreeSet<Vec<Permutation>> = BTreeSet::new();
    let trivial = FiniteGroup::identity_group(g.degree());
    let mut out: Vec<FiniteGroup> = vec![trivial.clone()];
    let mut key: Vec<Permutation> = trivial.elements()?.to_vec();
    key.sort();
    seen.insert(key);
    let mut frontier = 0usize;
    while frontier < out.len() {
        let grp = out[frontier].clone();
        frontier += 1;
        for e in &all {
            let mut gens: Vec<Permutation> = grp.generators().to_vec();
            gens.push(e.clone());
            let bigger = FiniteGroup::new(g.degree(), gens)?;
            let mut k: Vec<Permutation> = bigger.elements()?.to_vec();
            k.sort();
            if seen.insert(k) {
                out.push(bigger);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c2() -> FiniteGroup {
        FiniteGroup::cyclic(2)
    }

    fn c4() -> FiniteGroup {
        FiniteGroup::cyclic(4)
    }

    fn two_swaps() -> FiniteGroup {
        FiniteGroup::from_cycle_strings(4, &["(0 1)", "(2 3)"]).unwrap()
    }

    #[test]
    fn constructors_validate() {
        for d in [
            hh_atom(HHKind::SymInf).unwrap(),
            hh_atom(HHKind::AutQ).unwrap(),
            hh_atom(HHKind::RevQ).unwrap(),
            kernel_atom(&FiniteGroup::symmetric(2)).unwrap(),
            wreath_hh(&c2()).unwrap(),
            wreath_hh(&two_swaps()).unwrap(),
            hybrid(&FiniteGroup::symmetric(2), &FiniteGroup::identity_group(2)).unwrap(),
            hybrid(&c4(), &FiniteGroup::from_cycle_strings(4, &["(0 2)(1 3)"]).unwrap())
                .unwrap(),
            wreath_outer(&c4(), &FiniteGroup::cyclic(3)).unwrap(),
            replicate_hh(HHKind::SymInf, &FiniteGroup::symmetric(2)).unwrap(),
            replicate_hh(HHKind::AutQ, &FiniteGroup::cyclic(3)).unwrap(),
            replicate_hh(HHKind::RevQ, &FiniteGroup::cyclic(3)).unwrap(),
            direct_product(
                &kernel_atom(&FiniteGroup::symmetric(2)).unwrap(),
                &wreath_hh(&c2()).unwrap(),
            )
            .unwrap(),
        ] {
            assert!(d.is_valid(), "violations: {:?}", d.validate());
        }
    }

    #[test]
    fn invalid_data_is_reported() {
        // H = <(0 1)> is not normal in S4 on one block
        let bad = DecoratedGroup::new(
            FiniteGroup::symmetric(4),
            SetPartition::one_block(4),
            vec![Decoration {
                h: FiniteGroup::from_cycle_strings(4, &["(0 1)"]).unwrap(),
                kind: HHKind::SymInf,
            }],
        )
        .unwrap();
        let v = bad.validate();
        assert!(v.iter().any(|x| x.constraint.contains("normal")));

        // AutQ on a 2-point block breaks the size rule
        let bad2 = DecoratedGroup::new(
            FiniteGroup::identity_group(2),
            SetPartition::one_block(2),
            vec![Decoration {
                h: FiniteGroup::identity_group(2),
                kind: HHKind::AutQ,
            }],
        )
        .unwrap();
        assert!(!bad2.is_valid());
    }

    #[test]
    fn hybrid_requires_normality() {
        let s3 = FiniteGroup::symmetric(3);
        let h = FiniteGroup::from_cycle_strings(3, &["(0 1)"]).unwrap();
        assert!(hybrid(&s3, &h).is_err());
    }

    #[test]
    fn wreath_outer_shape() {
        let d = wreath_outer(&c4(), &FiniteGroup::cyclic(3)).unwrap();
        assert_eq!(d.degree(), 12);
        assert_eq!(d.blocks().block_count(), 3);
        assert_eq!(d.f().order(), 192);
        assert_eq!(d.index_of_minimal_subgroup(), 3);
    }

    #[test]
    fn indices() {
        assert_eq!(wreath_hh(&c2()).unwrap().index_of_minimal_subgroup(), 1);
        assert_eq!(
            hybrid(&FiniteGroup::symmetric(2), &FiniteGroup::identity_group(2))
                .unwrap()
                .index_of_minimal_subgroup(),
            2
        );
        let prod = direct_product(
            &hybrid(&FiniteGroup::symmetric(2), &FiniteGroup::identity_group(2)).unwrap(),
            &wreath_outer(&c4(), &FiniteGroup::cyclic(3)).unwrap(),
        )
        .unwrap();
        assert_eq!(prod.index_of_minimal_subgroup(), 6);
    }

    #[test]
    fn replicate_trivial_outer_matches_atom() {
        for kind in [
            HHKind::SymInf,
            HHKind::AutQ,
            HHKind::RevQ,
            HHKind::AutQZ,
            HHKind::RevQZ,
        ] {
            let a = replicate_hh(kind, &FiniteGroup::identity_group(1)).unwrap();
            let b = hh_atom(kind).unwrap();
            assert!(isomorphic(&a, &b).unwrap().is_some(), "{kind:?}");
        }
    }

    #[test]
    fn isomorphism_examples() {
        let w = wreath_hh(&c2()).unwrap();
        assert!(isomorphic(&w, &w).unwrap().is_some());
        let h = hybrid(&c2(), &c2()).unwrap();
        assert!(isomorphic(&w, &h).unwrap().is_some());
        let two_atoms = direct_product(
            &hh_atom(HHKind::SymInf).unwrap(),
            &hh_atom(HHKind::SymInf).unwrap(),
        )
        .unwrap();
        assert!(isomorphic(&w, &two_atoms).unwrap().is_none());
    }

    #[test]
    fn isomorphism_is_an_equivalence() {
        let sample = [
            wreath_hh(&c2()).unwrap(),
            wreath_hh(&c4()).unwrap(),
            hybrid(&FiniteGroup::symmetric(2), &FiniteGroup::identity_group(2)).unwrap(),
            replicate_hh(HHKind::SymInf, &FiniteGroup::symmetric(2)).unwrap(),
            replicate_hh(HHKind::AutQ, &FiniteGroup::symmetric(2)).unwrap(),
        ];
        for a in &sample {
            assert!(isomorphic(a, a).unwrap().is_some());
        }
        for a in &sample {
            for b in &sample {
                let ab = isomorphic(a, b).unwrap().is_some();
                let ba = isomorphic(b, a).unwrap().is_some();
                assert_eq!(ab, ba);
            }
        }
    }

    #[test]
    fn isomorphism_witness_transports_everything() {
        let a = wreath_outer(&c4(), &FiniteGroup::cyclic(3)).unwrap();
        let w = isomorphic(&a, &a).unwrap().unwrap();
        // witness is a bijection
        let mut seen = vec![false; a.degree()];
        for &p in &w {
            assert!(!seen[p]);
            seen[p] = true;
        }
    }

    #[test]
    fn lower_bound_contributions() {
        assert_eq!(lower_bound(&[OrbitDescriptor::InfiniteBlocks(1)]).unwrap(), 1);
        assert_eq!(
            lower_bound(&[
                OrbitDescriptor::FiniteBlocks(FiniteGroup::symmetric(2)),
                OrbitDescriptor::FiniteBlocks(FiniteGroup::symmetric(2)),
            ])
            .unwrap(),
            4
        );
        assert_eq!(
            lower_bound(&[OrbitDescriptor::FiniteBlocks(two_swaps())]).unwrap(),
            8
        );
        assert_eq!(lower_bound(&[OrbitDescriptor::Kernel]).unwrap(), 0);
    }

    #[test]
    fn age_normal_form_collapses_rev() {
        let d = replicate_hh(HHKind::RevQ, &FiniteGroup::cyclic(3)).unwrap();
        let n = age_normal_form(&d).unwrap();
        assert_eq!(n.degree(), 3);
        assert!(n.decorations().iter().all(|x| x.kind == HHKind::AutQ));
        assert!(n.is_valid());
        let aut = replicate_hh(HHKind::AutQ, &FiniteGroup::cyclic(3)).unwrap();
        assert!(isomorphic(&n, &aut).unwrap().is_some());
    }

    #[test]
    fn enumerate_domain_one() {
        let all = enumerate(1, 100).unwrap();
        assert_eq!(all.len(), 4);
        let kinds: Vec<HHKind> = all
            .iter()
            .map(|d| d.decorations()[0].kind)
            .collect();
        assert!(kinds.contains(&HHKind::SymInf));
        assert!(kinds.contains(&HHKind::AutQ));
        assert!(kinds.contains(&HHKind::AutQZ));
        assert!(kinds.contains(&HHKind::TrivialKernel));
        for d in &all {
            assert!(d.is_valid());
        }
    }

    #[test]
    fn enumerate_is_deterministic() {
        let a = enumerate(2, 100).unwrap();
        let b = enumerate(2, 100).unwrap();
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(&b) {
            assert!(isomorphic(x, y).unwrap().is_some());
        }
    }

    #[test]
    fn product_with_empty_is_identity() {
        let d = wreath_hh(&c2()).unwrap();
        let p = direct_product(&d, &DecoratedGroup::empty()).unwrap();
        assert!(isomorphic(&d, &p).unwrap().is_some());
    }
}
