//! Ground truth by brute force.
//!
//! A decorated datum encodes an infinite permutation group; replacing every
//! infinite symmetric part by the symmetric group on `k` copies yields a
//! finite *truncation* whose subset-orbit counts agree with the encoded
//! profile in degrees `<= k`. This module builds truncations, counts
//! subset orbits directly (no generating-series machinery), extracts block
//! towers, replays the subdirect-product reconstruction of blockwise
//! stabilizers, and recognizes a decorated datum from a truncation.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::sync::atomic::{AtomicUsize, Ordering};

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::blocksys::{minimal_stable_partition, SetPartition};
use crate::decorated::{age_normal_form, DecoratedGroup, Decoration, HHKind};
use crate::error::{Error, Result};
use crate::perm::{blockwise_stabilizer, induced_action, subdirect, FiniteGroup, Permutation};
use crate::series;

/// Default bound on the degree of a truncation.
pub const DEFAULT_DEGREE_CAP: usize = 64;

static DEGREE_CAP: AtomicUsize = AtomicUsize::new(DEFAULT_DEGREE_CAP);

/// Overrides the truncation degree cap (process-wide).
pub fn set_degree_cap(cap: usize) {
    DEGREE_CAP.store(cap, Ordering::Relaxed);
}

/// Current truncation degree cap.
pub fn degree_cap() -> usize {
    DEGREE_CAP.load(Ordering::Relaxed)
}

/// A finite truncation of the group encoded by a decorated datum: every
/// non-kernel block is replicated `k` times, the within-block groups act
/// independently in each copy, the copies of each block are permuted by
/// the full symmetric group, and the finite group acts diagonally.
#[derive(Clone, Debug)]
pub struct Truncation {
    /// The truncation as a finite permutation group.
    pub group: FiniteGroup,
    /// The replication parameter.
    pub k: usize,
    /// `copies[j][i]` is the point set of copy `i` of non-kernel block `j`
    /// (blocks indexed in partition order of the order-preserving normal
    /// form, kernel block skipped).
    pub copies: Vec<Vec<Vec<usize>>>,
    /// The kernel point set (placed after all copies).
    pub kernel: Vec<usize>,
}

struct TruncLayout {
    nf: DecoratedGroup,
    degree: usize,
    /// Non-kernel block indices of `nf` in partition order.
    nonkernel: Vec<usize>,
    /// Per non-kernel block (same order as `nonkernel`): point sets of its
    /// `k` copies.
    copies: Vec<Vec<Vec<usize>>>,
    kernel: Vec<usize>,
    /// Original point -> (position in `nonkernel`, local index) for
    /// non-kernel points.
    locate: BTreeMap<usize, (usize, usize)>,
    /// Original kernel point -> truncation point.
    kernel_map: BTreeMap<usize, usize>,
}

fn layout(delta: &DecoratedGroup, k: usize) -> Result<TruncLayout> {
    if k == 0 {
        return Err(Error::Precondition("replication parameter must be >= 1".into()));
    }
    if !delta.is_valid() {
        return Err(Error::Precondition(
            "truncation requires a valid decorated datum".into(),
        ));
    }
    let nf = age_normal_form(delta)?;
    let kernel_block = nf.kernel_block();
    let mut nonkernel = Vec::new();
    let mut nonkernel_size = 0usize;
    for (j, b) in nf.blocks().blocks().iter().enumerate() {
        if Some(j) != kernel_block {
            nonkernel.push(j);
            nonkernel_size += b.len();
        }
    }
    let kernel_size = kernel_block.map_or(0, |j| nf.blocks().blocks()[j].len());
    let degree = k * nonkernel_size + kernel_size;
    if degree > degree_cap() {
        return Err(Error::SizeLimit(format!(
            "truncation degree {degree} exceeds cap {}",
            degree_cap()
        )));
    }
    let mut copies = Vec::new();
    let mut locate = BTreeMap::new();
    let mut offset = 0usize;
    for (pos, &j) in nonkernel.iter().enumerate() {
        let b = &nf.blocks().blocks()[j];
        let mut block_copies = Vec::new();
        for i in 0..k {
            let start = offset + i * b.len();
            block_copies.push((start..start + b.len()).collect::<Vec<usize>>());
        }
        for (r, &p) in b.iter().enumerate() {
            locate.insert(p, (pos, r));
        }
        copies.push(block_copies);
        offset += k * b.len();
    }
    let mut kernel = Vec::new();
    let mut kernel_map = BTreeMap::new();
    if let Some(j) = kernel_block {
        for (r, &p) in nf.blocks().blocks()[j].iter().enumerate() {
            kernel.push(offset + r);
            kernel_map.insert(p, offset + r);
        }
    }
    Ok(TruncLayout {
        nf,
        degree,
        nonkernel,
        copies,
        kernel,
        locate,
        kernel_map,
    })
}

/// Generators of the replicated within-block parts: each block's group in
/// copy 0, a `k`-cycle of the copies and (for `k >= 3`) a transposition of
/// the first two copies.
fn replication_generators(lay: &TruncLayout, k: usize) -> Vec<Permutation> {
    let mut gens = Vec::new();
    for (pos, &j) in lay.nonkernel.iter().enumerate() {
        let copies = &lay.copies[pos];
        let b = copies[0].len();
        for h in lay.nf.decorations()[j].h.generators() {
            let mut im: Vec<usize> = (0..lay.degree).collect();
            for r in 0..b {
                im[copies[0][r]] = copies[0][h.apply(r)];
            }
            gens.push(Permutation::from_images(&im).unwrap());
        }
        if k >= 2 {
            let mut im: Vec<usize> = (0..lay.degree).collect();
            for i in 0..k {
                for r in 0..b {
                    im[copies[i][r]] = copies[(i + 1) % k][r];
                }
            }
            gens.push(Permutation::from_images(&im).unwrap());
        }
        if k >= 3 {
            let mut im: Vec<usize> = (0..lay.degree).collect();
            for r in 0..b {
                im[copies[0][r]] = copies[1][r];
                im[copies[1][r]] = copies[0][r];
            }
            gens.push(Permutation::from_images(&im).unwrap());
        }
    }
    gens
}

/// Diagonal images of the finite group's generators: every copy of a block
/// follows the block image, copy indices are preserved, and kernel points
/// move as in the original action.
fn diagonal_generators(lay: &TruncLayout, k: usize) -> Result<Vec<Permutation>> {
    let mut gens = Vec::new();
    for f in lay.nf.f().generators() {
        let mut im: Vec<usize> = (0..lay.degree).collect();
        for (pos, &j) in lay.nonkernel.iter().enumerate() {
            let b = &lay.nf.blocks().blocks()[j];
            for (r, &p) in b.iter().enumerate() {
                let q = f.apply(p);
                let (pos2, r2) = *lay.locate.get(&q).ok_or_else(|| {
                    Error::NotBlockSystem(format!(
                        "finite part maps non-kernel point {p} into the kernel"
                    ))
                })?;
                for i in 0..k {
                    im[lay.copies[pos][i][r]] = lay.copies[pos2][i][r2];
                }
            }
        }
        for (&p, &tp) in &lay.kernel_map {
            let q = f.apply(p);
            im[tp] = *lay.kernel_map.get(&q).ok_or_else(|| {
                Error::NotBlockSystem(format!(
                    "finite part maps kernel point {p} out of the kernel"
                ))
            })?;
        }
        gens.push(Permutation::from_images(&im)?);
    }
    Ok(gens)
}

/// Truncation of the full encoded group (replicated within-block parts
/// together with the diagonal finite part).
pub fn truncate(delta: &DecoratedGroup, k: usize) -> Result<Truncation> {
    let lay = layout(delta, k)?;
    let mut gens = replication_generators(&lay, k);
    gens.extend(diagonal_generators(&lay, k)?);
    Ok(Truncation {
        group: FiniteGroup::new(lay.degree, gens)?,
        k,
        copies: lay.copies,
        kernel: lay.kernel,
    })
}

/// Truncation of the minimal finite-index subgroup alone (the replicated
/// within-block parts, acting trivially on the kernel).
pub fn truncate_minimal(delta: &DecoratedGroup, k: usize) -> Result<Truncation> {
    let lay = layout(delta, k)?;
    let gens = replication_generators(&lay, k);
    Ok(Truncation {
        group: FiniteGroup::new(lay.degree, gens)?,
        k,
        copies: lay.copies,
        kernel: lay.kernel,
    })
}

// ---------------------------------------------------------------------------
// Brute-force profile
// ---------------------------------------------------------------------------

/// Largest group order for which the element-averaging backend is used.
const BURNSIDE_MAX_ORDER: u128 = 1_000_000;
/// Largest number of n-subsets the direct backend will enumerate.
const MAX_SUBSETS: u64 = 1 << 31;

/// Orbit counts of n-subsets for `n = 0..=nmax`. Uses Burnside averaging
/// of per-element invariant-subset polynomials when the element list is
/// affordable, and direct subset-orbit enumeration otherwise.
pub fn brute_profile(group: &FiniteGroup, nmax: usize) -> Result<Vec<BigInt>> {
    if group.order() <= BURNSIDE_MAX_ORDER && group.order() <= crate::perm::element_cap() as u128
    {
        brute_profile_burnside(group, nmax)
    } else {
        brute_profile_orbits(group, nmax)
    }
}

/// Burnside backend: averages the truncated cycle polynomials
/// `prod_cycles (1 + z^len)` over all elements.
pub fn brute_profile_burnside(group: &FiniteGroup, nmax: usize) -> Result<Vec<BigInt>> {
    let mut acc = vec![BigInt::zero(); nmax + 1];
    for e in group.elements()? {
        let mut poly = vec![BigInt::zero(); nmax + 1];
        poly[0] = BigInt::one();
        for len in e.cycle_lengths() {
            if len > nmax {
                continue;
            }
            for i in (0..=nmax - len).rev() {
                let add = poly[i].clone();
                poly[i + len] += add;
            }
        }
        for i in 0..=nmax {
            acc[i] += core::mem::take(&mut poly[i]);
        }
    }
    let order = BigInt::from(group.order());
    let mut out = Vec::with_capacity(nmax + 1);
    for v in acc {
        let (q, r) = num_integer::Integer::div_rem(&v, &order);
        if !r.is_zero() {
            return Err(Error::FalsifiedProperty(
                "Burnside sum not divisible by the group order".into(),
            ));
        }
        out.push(q);
    }
    Ok(out)
}

// Binomial table; saturating, values beyond MAX_SUBSETS are rejected later.
fn binomials(d: usize, nmax: usize) -> Vec<Vec<u64>> {
    let mut c = vec![vec![0u64; nmax + 1]; d + 1];
    for row in c.iter_mut() {
        row[0] = 1;
    }
    for i in 1..=d {
        for n in 1..=nmax {
            c[i][n] = c[i - 1][n].saturating_add(c[i - 1][n - 1]);
        }
    }
    c
}

/// Direct backend: enumerates orbits of n-subsets with a visited bitmap
/// indexed by the combinatorial number system; needs no element list.
pub fn brute_profile_orbits(group: &FiniteGroup, nmax: usize) -> Result<Vec<BigInt>> {
    let d = group.degree();
    let n_top = nmax.min(d);
    if n_top > 8 {
        return Err(Error::SizeLimit(format!(
            "direct subset-orbit backend supports degree n <= 8, got {n_top}"
        )));
    }
    if d > 250 {
        return Err(Error::SizeLimit(format!(
            "direct subset-orbit backend supports domains <= 250 points, got {d}"
        )));
    }
    let binom = binomials(d, n_top.max(1));
    let tables: Vec<Vec<u8>> = group
        .generators()
        .iter()
        .map(|g| (0..d).map(|p| g.apply(p) as u8).collect())
        .collect();

    let mut out = vec![BigInt::one()];
    for n in 1..=nmax {
        if n > d {
            out.push(BigInt::zero());
            continue;
        }
        let total = binom[d][n];
        if total > MAX_SUBSETS {
            return Err(Error::SizeLimit(format!(
                "{total} subsets of size {n} exceed the enumeration cap"
            )));
        }
        let total = total as usize;
        let mut visited = vec![0u64; total.div_ceil(64)];
        let mut count: u64 = 0;
        let mut stack: Vec<u64> = Vec::new();
        let mut pts = [0u8; 8];
        let mut img = [0u8; 8];

        // lex-first seed for rank 0 is 0..n; afterwards seeds are unranked
        for seed in 0..total {
            if visited[seed / 64] >> (seed % 64) & 1 == 1 {
                continue;
            }
            count += 1;
            visited[seed / 64] |= 1 << (seed % 64);
            // unrank `seed` in the colex order
            {
                let mut rem = seed as u64;
                let mut c = d;
                for i in (1..=n).rev() {
                    let mut v = c - 1;
                    while binom[v][i] > rem {
                        v -= 1;
                    }
                    pts[i - 1] = v as u8;
                    rem -= binom[v][i];
                    c = v;
                }
            }
            stack.push(pack(&pts, n));
            while let Some(packed) = stack.pop() {
                unpack(packed, n, &mut pts);
                for tbl in &tables {
                    for i in 0..n {
                        img[i] = tbl[pts[i] as usize];
                    }
                    img[..n].sort_unstable();
                    let mut rank: u64 = 0;
                    for (i, &p) in img[..n].iter().enumerate() {
                        rank += binom[p as usize][i + 1];
                    }
                    let (w, b) = (rank as usize / 64, rank % 64);
                    if visited[w] >> b & 1 == 0 {
                        visited[w] |= 1 << b;
                        stack.push(pack(&img, n));
                    }
                }
            }
        }
        out.push(BigInt::from(count));
    }
    Ok(out)
}

#[inline]
fn pack(pts: &[u8; 8], n: usize) -> u64 {
    let mut v = 0u64;
    for i in 0..n {
        v |= (pts[i] as u64) << (8 * i);
    }
    v
}

#[inline]
fn unpack(v: u64, n: usize, pts: &mut [u8; 8]) {
    for i in 0..n {
        pts[i] = (v >> (8 * i)) as u8;
    }
}

// ---------------------------------------------------------------------------
// End-to-end verification
// ---------------------------------------------------------------------------

/// Outcome of comparing the exact series coefficients with brute-force
/// orbit counts on a truncation.
#[derive(Clone, Debug)]
pub struct VerificationReport {
    pub k: usize,
    pub n: usize,
    pub series_prefix: Vec<BigInt>,
    pub oracle_prefix: Vec<BigInt>,
    pub matched: bool,
    /// Wall-clock milliseconds; filled in by callers with a clock (this
    /// library computes with none).
    pub millis: u64,
}

/// Compares the exact profile values of `delta` with the brute-force
/// subset-orbit counts of its `k`-fold truncation, for degrees `0..=nmax`.
/// Requires `k >= nmax`: below that the truncation has not yet frozen the
/// coefficients.
pub fn verify_profile(delta: &DecoratedGroup, k: usize, nmax: usize) -> Result<VerificationReport> {
    if k < nmax {
        return Err(Error::Precondition(format!(
            "verification needs k >= n, got k = {k}, n = {nmax}"
        )));
    }
    let series_prefix = series::profile_values(delta, nmax)?;
    let trunc = truncate(delta, k)?;
    let oracle_prefix = brute_profile(&trunc.group, nmax)?;
    let matched = series_prefix == oracle_prefix;
    Ok(VerificationReport {
        k,
        n: nmax,
        series_prefix,
        oracle_prefix,
        matched,
        millis: 0,
    })
}

// ---------------------------------------------------------------------------
// Towers and subdirect reconstruction
// ---------------------------------------------------------------------------

fn factorial(n: usize) -> Result<u128> {
    let mut f: u128 = 1;
    for i in 2..=n as u128 {
        f = f
            .checked_mul(i)
            .ok_or_else(|| Error::SizeLimit("factorial overflow".into()))?;
    }
    Ok(f)
}

fn require_fully_symmetric_on_blocks(
    group: &FiniteGroup,
    blocks: &SetPartition,
) -> Result<FiniteGroup> {
    let (img, _) = induced_action(group, blocks.blocks())?;
    if img.order() != factorial(blocks.block_count())? {
        return Err(Error::Precondition(
            "the action on the blocks is not the full symmetric group".into(),
        ));
    }
    blockwise_stabilizer(group, blocks.blocks())
}

/// The tower of within-block groups: `H_i` is the restriction to block
/// `i+1` of the pointwise stabilizer, inside the blockwise stabilizer, of
/// the first `i` blocks. Returns `H_0, ..., H_t`, each on the local
/// coordinates of its reference block.
pub fn tower(group: &FiniteGroup, blocks: &SetPartition, t: usize) -> Result<Vec<FiniteGroup>> {
    if t + 1 > blocks.block_count() {
        return Err(Error::Precondition(format!(
            "tower length {} exceeds block count {}",
            t + 1,
            blocks.block_count()
        )));
    }
    let stab = require_fully_symmetric_on_blocks(group, blocks)?;
    let mut out = Vec::with_capacity(t + 1);
    let mut fixed: Vec<usize> = Vec::new();
    for i in 0..=t {
        let level = if i == 0 {
            stab.clone()
        } else {
            stab.pointwise_stabilizer(&fixed)
        };
        out.push(level.restriction(&blocks.blocks()[i])?);
        fixed.extend(blocks.blocks()[i].iter().copied());
    }
    Ok(out)
}

/// Replays the subdirect-product reconstruction of the blockwise
/// stabilizer: restricts it to two disjoint ranges of `l1` and `l2`
/// blocks, recomputes the factor groups and fixator normal subgroups
/// directly, and checks that the subdirect product they generate equals
/// the restricted stabilizer.
pub fn verify_subdirect_decomposition(
    group: &FiniteGroup,
    blocks: &SetPartition,
    l1: usize,
    l2: usize,
) -> Result<bool> {
    if l1 == 0 || l2 == 0 || l1 + l2 > blocks.block_count() {
        return Err(Error::Precondition(format!(
            "need 1 <= l1, l2 with l1 + l2 <= {}, got {l1}, {l2}",
            blocks.block_count()
        )));
    }
    let stab = require_fully_symmetric_on_blocks(group, blocks)?;
    let mut e1: Vec<usize> = Vec::new();
    for b in &blocks.blocks()[..l1] {
        e1.extend(b.iter().copied());
    }
    let mut e2: Vec<usize> = Vec::new();
    for b in &blocks.blocks()[l1..l1 + l2] {
        e2.extend(b.iter().copied());
    }
    e1.sort_unstable();
    e2.sort_unstable();
    let mut e12: Vec<usize> = e1.iter().chain(e2.iter()).copied().collect();
    e12.sort_unstable();

    let restricted = stab.restriction(&e12)?;
    let g1 = stab.restriction(&e1)?;
    let g2 = stab.restriction(&e2)?;
    let n1 = stab.pointwise_stabilizer(&e2).restriction(&e1)?;
    let n2 = stab.pointwise_stabilizer(&e1).restriction(&e2)?;

    // positions of the two ranges inside the sorted union
    let pos = |set: &[usize]| -> Vec<usize> {
        set.iter()
            .map(|p| e12.binary_search(p).unwrap())
            .collect()
    };
    let idx1 = pos(&e1);
    let idx2 = pos(&e2);
    let split = |w: &Permutation| -> (Permutation, Permutation) {
        let in1: Vec<usize> = idx1
            .iter()
            .map(|&i| idx1.binary_search(&w.apply(i)).unwrap())
            .collect();
        let in2: Vec<usize> = idx2
            .iter()
            .map(|&i| idx2.binary_search(&w.apply(i)).unwrap())
            .collect();
        (
            Permutation::from_images(&in1).unwrap(),
            Permutation::from_images(&in2).unwrap(),
        )
    };

    // one pair per coset of N1 in G1, keyed by the minimal coset element
    let n1_elements: Vec<Permutation> = n1.elements()?.to_vec();
    let mut per_coset: BTreeMap<Permutation, (Permutation, Permutation)> = BTreeMap::new();
    for w in restricted.elements()? {
        let (a, b) = split(w);
        let key = n1_elements
            .iter()
            .map(|n| n.then(&a))
            .min()
            .expect("nonempty normal subgroup");
        let entry = per_coset.entry(key).or_insert_with(|| (a.clone(), b.clone()));
        if (a.clone(), b.clone()) < entry.clone() {
            *entry = (a, b);
        }
    }
    let matching: Vec<(Permutation, Permutation)> = per_coset.into_values().collect();
    let product = subdirect(&g1, &g2, &n1, &n2, &matching)?;

    // relabel the subdirect result (first range then second) back into the
    // sorted-union coordinates of the restricted stabilizer
    let to_union: Vec<usize> = idx1.iter().chain(idx2.iter()).copied().collect();
    let mut back = vec![0usize; e12.len()];
    for (i, &u) in to_union.iter().enumerate() {
        back[i] = u;
    }
    let mut gens = Vec::new();
    for g in product.generators() {
        let mut im = vec![0usize; e12.len()];
        for p in 0..e12.len() {
            im[back[p]] = back[g.apply(p)];
        }
        gens.push(Permutation::from_images(&im)?);
    }
    let relabelled = FiniteGroup::new(e12.len(), gens)?;
    Ok(relabelled.same_group(&restricted))
}

// ---------------------------------------------------------------------------
// Recognition
// ---------------------------------------------------------------------------

fn recognition_error(stage: &str, detail: String) -> Error {
    Error::Recognition(format!("{stage}: {detail}"))
}

/// Recovers a decorated datum from a group promised to be a `k`-fold
/// truncation (with infinite-symmetric parts only outside the kernel).
///
/// Stages: kernel and finite-block detection from stable-partition atoms,
/// superblock detection at the block level, within-block group extraction,
/// a ladder search for block-swapping involutions that fixes a coherent
/// labelling of the copies, and extraction of the diagonal finite part.
pub fn recognize(group: &FiniteGroup, k: usize) -> Result<DecoratedGroup> {
    if k < 4 {
        return Err(Error::Precondition(format!(
            "recognition needs k >= 4, got {k}"
        )));
    }
    let degree = group.degree();
    let orbits = group.orbits_points();

    // Stage 1: kernel orbits are those replication cannot have produced.
    let mut is_kernel_point = vec![false; degree];
    for o in &orbits {
        if o.len() < k || o.len() % k != 0 {
            for &p in o {
                is_kernel_point[p] = true;
            }
        }
    }
    let kernel: Vec<usize> = (0..degree).filter(|&p| is_kernel_point[p]).collect();
    let nonkernel: Vec<usize> = (0..degree).filter(|&p| !is_kernel_point[p]).collect();

    if nonkernel.is_empty() {
        return if kernel.is_empty() {
            Err(recognition_error("kernel", "empty domain".to_string()))
        } else {
            crate::decorated::kernel_atom(group)
        };
    }

    // Finite blocks: join of the pair-closure partitions whose classes are
    // small enough to sit inside single copies.
    let orbit_of = {
        let mut v = vec![0usize; degree];
        for (oi, o) in orbits.iter().enumerate() {
            for &p in o {
                v[p] = oi;
            }
        }
        v
    };
    let admissible = |partition: &SetPartition| -> bool {
        for class in partition.blocks() {
            if class.len() == 1 {
                continue;
            }
            let mut per_orbit: BTreeMap<usize, usize> = BTreeMap::new();
            for &p in class {
                if is_kernel_point[p] {
                    return false;
                }
                *per_orbit.entry(orbit_of[p]).or_insert(0) += 1;
            }
            for (&oi, &cnt) in &per_orbit {
                if cnt * k > orbits[oi].len() {
                    return false;
                }
            }
        }
        true
    };
    let mut union = crate::blocksys::SetPartition::singletons(degree);
    for (a_idx, &p) in nonkernel.iter().enumerate() {
        for &q in &nonkernel[a_idx + 1..] {
            let atom = minimal_stable_partition(group, &[(p, q)]);
            if admissible(&atom) {
                union = union.join(&atom)?;
            }
        }
    }
    let fine_blocks: Vec<Vec<usize>> = union
        .blocks()
        .iter()
        .filter(|b| !is_kernel_point[b[0]])
        .cloned()
        .collect();

    // Stage 2: group the blocks into superblocks — two blocks lie in the
    // same superblock exactly when merging them closes into a class of k
    // blocks (one full set of copies).
    let mut all_blocks: Vec<Vec<usize>> = fine_blocks.clone();
    for &p in &kernel {
        all_blocks.push(vec![p]);
    }
    let (block_action, _) = induced_action(group, &all_blocks)
        .map_err(|e| recognition_error("finite blocks", e.to_string()))?;
    let nb = fine_blocks.len();
    let mut sb_uf: Vec<usize> = (0..nb).collect();
    fn find(uf: &mut Vec<usize>, mut x: usize) -> usize {
        while uf[x] != x {
            uf[x] = uf[uf[x]];
            x = uf[x];
        }
        x
    }
    for b1 in 0..nb {
        for b2 in b1 + 1..nb {
            if find(&mut sb_uf, b1) == find(&mut sb_uf, b2) {
                continue;
            }
            let m = minimal_stable_partition(&block_action, &[(b1, b2)]);
            let cls = m.class_of();
            if m.blocks()[cls[b1]].len() == k {
                let (r1, r2) = (find(&mut sb_uf, b1), find(&mut sb_uf, b2));
                sb_uf[r1.max(r2)] = r1.min(r2);
            }
        }
    }
    let mut superblocks: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for b in 0..nb {
        let r = find(&mut sb_uf, b);
        superblocks.entry(r).or_default().push(b);
    }
    let superblocks: Vec<Vec<usize>> = superblocks.into_values().collect();
    for sb in &superblocks {
        if sb.len() != k {
            return Err(recognition_error(
                "superblocks",
                format!("expected {k} copies per superblock, found {}", sb.len()),
            ));
        }
    }

    // Stage 3: within-block group on the reference block of each
    // superblock (the elements supported on that block alone).
    let complement = |keep: &BTreeSet<usize>| -> Vec<usize> {
        (0..degree).filter(|p| !keep.contains(p)).collect()
    };
    let mut sb_ref_stabs: Vec<FiniteGroup> = Vec::new();
    for sb in &superblocks {
        let b0 = &fine_blocks[sb[0]];
        let keep: BTreeSet<usize> = b0.iter().copied().collect();
        sb_ref_stabs.push(group.pointwise_stabilizer(&complement(&keep)));
    }

    // Stage 4: ladder — for every non-reference copy, the lexicographically
    // least involution supported on the two blocks that swaps them; its
    // restriction labels the copy coherently.
    let mut phis: Vec<Vec<BTreeMap<usize, usize>>> = Vec::new();
    let mut swap_gens: Vec<Permutation> = Vec::new();
    for sb in &superblocks {
        let b0 = &fine_blocks[sb[0]];
        let mut sb_phis = Vec::new();
        sb_phis.push(b0.iter().map(|&p| (p, p)).collect::<BTreeMap<_, _>>());
        for &bi in &sb[1..] {
            let b_other = &fine_blocks[bi];
            let mut keep: BTreeSet<usize> = b0.iter().copied().collect();
            keep.extend(b_other.iter().copied());
            let support: Vec<usize> = keep.iter().copied().collect();
            let local = group
                .pointwise_stabilizer(&complement(&keep))
                .restriction(&support)
                .map_err(|e| recognition_error("ladder", e.to_string()))?;
            let in_first: Vec<bool> = support.iter().map(|p| b0.contains(p)).collect();
            let mut best: Option<Permutation> = None;
            for w in local
                .elements()
                .map_err(|e| recognition_error("ladder", e.to_string()))?
            {
                if !w.then(w).is_identity() {
                    continue;
                }
                let swaps = (0..support.len())
                    .all(|i| in_first[i] != in_first[w.apply(i)]);
                if swaps && best.as_ref().map_or(true, |b| w < b) {
                    best = Some(w.clone());
                }
            }
            let w = best.ok_or_else(|| {
                recognition_error(
                    "ladder",
                    format!("no straightforward swap onto block {bi}"),
                )
            })?;
            let mut phi = BTreeMap::new();
            let mut im: Vec<usize> = (0..degree).collect();
            for (i, &p) in support.iter().enumerate() {
                im[p] = support[w.apply(i)];
                if in_first[i] {
                    phi.insert(p, support[w.apply(i)]);
                }
            }
            swap_gens.push(Permutation::from_images(&im).unwrap());
            sb_phis.push(phi);
        }
        phis.push(sb_phis);
    }

    // The replicated part generated by the within-block groups and swaps.
    let mut k_gens: Vec<Permutation> = swap_gens;
    for stab in &sb_ref_stabs {
        k_gens.extend(stab.generators().iter().cloned());
    }
    let k_group = FiniteGroup::new(degree, k_gens)?;

    // Stage 5: correct each generator into a diagonal (copy-preserving)
    // element modulo the replicated part.
    let sb_of_block = {
        let mut v = vec![usize::MAX; nb];
        for (si, sb) in superblocks.iter().enumerate() {
            for &b in sb {
                v[b] = si;
            }
        }
        v
    };
    let block_of_point = {
        let mut v = vec![usize::MAX; degree];
        for (bi, b) in fine_blocks.iter().enumerate() {
            for &p in b {
                v[p] = bi;
            }
        }
        v
    };
    let copy_index = |si: usize, bi: usize| -> usize {
        superblocks[si].iter().position(|&b| b == bi).unwrap()
    };
    let inv_phi = |si: usize, c: usize| -> BTreeMap<usize, usize> {
        phis[si][c].iter().map(|(&a, &b)| (b, a)).collect()
    };

    let mut f_gens: Vec<Permutation> = Vec::new();
    for g in group.generators() {
        let mut im: Vec<usize> = (0..degree).collect();
        for &p in &kernel {
            let q = g.apply(p);
            if !is_kernel_point[q] {
                return Err(recognition_error(
                    "kernel",
                    format!("generator moves kernel point {p} out of the kernel"),
                ));
            }
            im[p] = q;
        }
        for (si, sb) in superblocks.iter().enumerate() {
            let b0 = &fine_blocks[sb[0]];
            let target_block = block_of_point[g.apply(b0[0])];
            let si2 = sb_of_block[target_block];
            let c2 = copy_index(si2, target_block);
            let back = inv_phi(si2, c2);
            // reference action: follow g from the reference copy, then pull
            // the image back to the target's reference copy
            let psi: BTreeMap<usize, usize> = b0
                .iter()
                .map(|&p| (p, *back.get(&g.apply(p)).unwrap()))
                .collect();
            for c in 0..k {
                for &p in b0 {
                    im[phis[si][c][&p]] = phis[si2][c][&psi[&p]];
                }
            }
        }
        let f = Permutation::from_images(&im)?;
        let u = f.inverse().then(g);
        if !k_group.contains(&u) {
            return Err(recognition_error(
                "diagonal correction",
                "generator is not diagonal modulo the replicated part".to_string(),
            ));
        }
        f_gens.push(f);
    }
    // the within-block groups belong to the finite part as well
    for stab in &sb_ref_stabs {
        f_gens.extend(stab.generators().iter().cloned());
    }

    // Restrict the finite part to one reference block per superblock plus
    // the kernel, and assemble the datum.
    let mut dom: Vec<usize> = kernel.clone();
    for sb in &superblocks {
        dom.extend(fine_blocks[sb[0]].iter().copied());
    }
    dom.sort_unstable();
    let f_all = FiniteGroup::new(degree, f_gens)?;
    let f_restricted = f_all
        .restriction(&dom)
        .map_err(|e| recognition_error("finite part", e.to_string()))?;

    let local = |p: usize| dom.binary_search(&p).unwrap();
    let mut blocks_local: Vec<Vec<usize>> = Vec::new();
    let mut decorations: Vec<Decoration> = Vec::new();
    for (si, sb) in superblocks.iter().enumerate() {
        let b0 = &fine_blocks[sb[0]];
        blocks_local.push(b0.iter().map(|&p| local(p)).collect());
        decorations.push(Decoration {
            h: sb_ref_stabs[si]
                .restriction(b0)
                .map_err(|e| recognition_error("within-block group", e.to_string()))?,
            kind: HHKind::SymInf,
        });
    }
    if !kernel.is_empty() {
        blocks_local.push(kernel.iter().map(|&p| local(p)).collect());
        decorations.push(Decoration {
            h: FiniteGroup::identity_group(kernel.len()),
            kind: HHKind::TrivialKernel,
        });
    }
    // partition order sorts blocks by least element; decorations must follow
    let mut order: Vec<usize> = (0..blocks_local.len()).collect();
    order.sort_by_key(|&i| blocks_local[i][0]);
    let blocks_sorted: Vec<Vec<usize>> = order.iter().map(|&i| blocks_local[i].clone()).collect();
    let decos_sorted: Vec<Decoration> = order.iter().map(|&i| decorations[i].clone()).collect();
    let partition = SetPartition::new(dom.len(), blocks_sorted)
        .map_err(|e| recognition_error("finite blocks", e.to_string()))?;
    let delta = DecoratedGroup::new(f_restricted, partition, decos_sorted)
        .map_err(|e| recognition_error("assembly", e.to_string()))?;
    let violations = delta.validate();
    if !violations.is_empty() {
        return Err(recognition_error(
            "assembly",
            format!("recovered datum is invalid: {}", violations[0].constraint),
        ));
    }

    // Final safety net: the recovered datum must rebuild the input group.
    let rebuilt = truncate(&delta, k)?;
    if rebuilt.group.degree() != degree || rebuilt.group.order() != group.order() {
        return Err(recognition_error(
            "round-trip",
            format!(
                "rebuilt truncation has order {}, input has order {}",
                rebuilt.group.order(),
                group.order()
            ),
        ));
    }
    Ok(delta)
}
