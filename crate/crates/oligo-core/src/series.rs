//! The orbit-variable table of a decorated group, the exact Hilbert /
//! profile generating series by a degree-weighted Molien average over the
//! induced finite action, and the nonnegative-numerator normal form.

use alloc::collections::BTreeMap;
use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_traits::{One, Signed};

use crate::decorated::{age_normal_form, DecoratedGroup, HHKind};
use crate::error::{Error, Result};
use crate::perm::Permutation;
use crate::poly::{IntPoly, RationalFunction};

/// One generator of the orbit algebra: an orbit of nonempty subsets of one
/// block (free for blocks with an infinite part, nilpotent for the kernel).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Variable {
    pub block: usize,
    /// lexicographically least subset of the orbit, in block-local points
    pub representative: Vec<usize>,
    pub degree: usize,
    pub nilpotent: bool,
}

/// All variables of a decorated group, plus the induced action of `F` on
/// them (the finite group `G0` averaged over in the Molien sum).
#[derive(Clone, Debug)]
pub struct VariableTable {
    pub variables: Vec<Variable>,
    /// images of variable indices under each generator of `F`
    pub g0_generators: Vec<Permutation>,
}

impl VariableTable {
    pub fn free_count(&self) -> usize {
        self.variables.iter().filter(|v| !v.nilpotent).count()
    }
}

/// Builds the variable table. Rev decorations are first replaced by their
/// order-preserving counterparts, which leaves the age unchanged.
pub fn variables(delta: &DecoratedGroup) -> Result<VariableTable> {
    let delta = age_normal_form(delta)?;
    let blocks = delta.blocks().blocks();

    // per block: map (local sorted subset) -> orbit id within the block,
    // plus the orbit's lex-min representative and degree
    let mut variables: Vec<Variable> = Vec::new();
    let mut lookup: BTreeMap<(usize, Vec<usize>), usize> = BTreeMap::new();
    for (j, dec) in delta.decorations().iter().enumerate() {
        let size = blocks[j].len();
        let nilpotent = dec.kind == HHKind::TrivialKernel;
        let summaries = if nilpotent {
            // one variable per kernel point: a cycle of length l among
            // them contributes the factor 1 + z^l, so the average over F
            // counts each kernel subset exactly once (subset variables
            // would double-count their disjoint unions)
            vec![(0..size)
                .map(|p| crate::perm::SubsetOrbitSummary {
                    degree: 1,
                    representative: vec![p],
                    orbit_size: 1,
                })
                .collect()]
        } else {
            dec.h.age(size)?
        };
        for per_degree in &summaries {
            for s in per_degree {
                let idx = variables.len();
                variables.push(Variable {
                    block: j,
                    representative: s.representative.clone(),
                    degree: s.degree,
                    nilpotent,
                });
                // register the whole orbit in the lookup
                let mut orbit: BTreeSet<Vec<usize>> = BTreeSet::new();
                orbit.insert(s.representative.clone());
                let mut queue = vec![s.representative.clone()];
                let mut i = 0;
                while i < queue.len() {
                    let cur = queue[i].clone();
                    i += 1;
                    for g in dec.h.generators() {
                        let mut img: Vec<usize> =
                            cur.iter().map(|&p| g.apply(p)).collect();
                        img.sort_unstable();
                        if orbit.insert(img.clone()) {
                            queue.push(img);
                        }
                    }
                }
                for member in orbit {
                    lookup.insert((j, member), idx);
                }
            }
        }
    }

    // induced action of F's generators on the variables
    let cls = delta.blocks().class_of();
    let mut g0_generators = Vec::new();
    for f in delta.f().generators() {
        let mut im = vec![usize::MAX; variables.len()];
        for (idx, v) in variables.iter().enumerate() {
            let global: Vec<usize> = v.representative.iter().map(|&a| blocks[v.block][a]).collect();
            let mapped: Vec<usize> = global.iter().map(|&p| f.apply(p)).collect();
            let jt = cls[mapped[0]];
            let mut local: Vec<usize> = mapped
                .iter()
                .map(|&p| blocks[jt].iter().position(|&q| q == p).unwrap())
                .collect();
            local.sort_unstable();
            im[idx] = *lookup.get(&(jt, local)).ok_or_else(|| {
                Error::FalsifiedProperty(format!(
                    "image of variable {idx} is not a variable"
                ))
            })?;
        }
        g0_generators.push(Permutation::from_images(&im)?);
    }

    Ok(VariableTable {
        variables,
        g0_generators,
    })
}

/// Exact profile generating series: the average over the induced group G0
/// of one factor per cycle on the variables — a geometric factor for free
/// variables, `1 + z^(cycle weight)` for nilpotent ones.
pub fn hilbert_series(delta: &DecoratedGroup) -> Result<RationalFunction> {
    let table = variables(delta)?;
    let g0 = crate::perm::FiniteGroup::new(
        table.variables.len(),
        table.g0_generators.clone(),
    )?;
    let elements = g0.elements()?;
    let mut sum = RationalFunction::zero();
    for g in elements {
        let mut num = IntPoly::one();
        let mut den = IntPoly::one();
        for cycle in cycles_with_fixed(g) {
            let weight: usize = cycle.iter().map(|&v| table.variables[v].degree).sum();
            if table.variables[cycle[0]].nilpotent {
                num = num.mul(&IntPoly::one_plus_power(weight));
            } else {
                den = den.mul(&IntPoly::one_minus_power(weight));
            }
        }
        sum = sum.add(&RationalFunction::new(num, den)?);
    }
    let order = BigInt::from(elements.len());
    let averaged = sum.scale_div(&order)?;
    // the averaging factor must clear: integer coefficients, unit constant
    let den = averaged.denominator();
    if den.coeff(0) != BigInt::one() || !den.content().is_one() {
        return Err(Error::FalsifiedProperty(format!(
            "Molien average did not clear the group order: {averaged:?}"
        )));
    }
    Ok(averaged)
}

/// All cycles of `g`, including fixed points as 1-cycles.
fn cycles_with_fixed(g: &Permutation) -> Vec<Vec<usize>> {
    let n = g.degree();
    let mut seen = vec![false; n];
    let mut out = Vec::new();
    for start in 0..n {
        if seen[start] {
            continue;
        }
        let mut cyc = vec![start];
        seen[start] = true;
        let mut p = g.apply(start);
        while p != start {
            seen[p] = true;
            cyc.push(p);
            p = g.apply(p);
        }
        out.push(cyc);
    }
    out
}

/// First `n + 1` profile values.
pub fn profile_values(delta: &DecoratedGroup, n: usize) -> Result<Vec<BigInt>> {
    let series = hilbert_series(delta)?;
    let values = series.series_prefix(n)?;
    if values.iter().any(|c| c.is_negative()) {
        return Err(Error::FalsifiedProperty(
            "negative profile coefficient".to_string(),
        ));
    }
    Ok(values)
}

/// Number of free variables (the Krull dimension of the orbit algebra).
pub fn algebraic_dimension(delta: &DecoratedGroup) -> Result<usize> {
    Ok(variables(delta)?.free_count())
}

/// Degree of polynomial growth of the profile: order of the pole of the
/// series at z = 1, minus one. A polynomial series (kernel-only datum)
/// answers -1.
pub fn growth_rate(delta: &DecoratedGroup) -> Result<i64> {
    let series = hilbert_series(delta)?;
    Ok(series.pole_order_at_one() as i64 - 1)
}

/// The series written over a denominator of cyclotomic-product shape with
/// a nonnegative numerator.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HilbertForm {
    /// numerator coefficients, all nonnegative
    pub numerator: Vec<BigInt>,
    /// the degrees `d` of the factors `1 - z^d`, ascending
    pub denominator_degrees: Vec<usize>,
}

/// Writes the series as `P(z) / prod (1 - z^d)` where the degrees come
/// from the G0-orbits of free variables: an orbit of size m in common
/// degree d contributes d, 2d, ..., md. The numerator is checked to be a
/// polynomial with nonnegative coefficients.
pub fn hilbert_form(delta: &DecoratedGroup) -> Result<HilbertForm> {
    let table = variables(delta)?;
    let series = hilbert_series(delta)?;

    // orbits of free variables under the induced action
    let nvars = table.variables.len();
    let mut seen = vec![false; nvars];
    let mut degrees: Vec<usize> = Vec::new();
    for start in 0..nvars {
        if seen[start] || table.variables[start].nilpotent {
            continue;
        }
        let mut orbit = vec![start];
        seen[start] = true;
        let mut i = 0;
        while i < orbit.len() {
            let v = orbit[i];
            i += 1;
            for g in &table.g0_generators {
                let w = g.apply(v);
                if !seen[w] {
                    seen[w] = true;
                    orbit.push(w);
                }
            }
        }
        let d = table.variables[start].degree;
        debug_assert!(orbit.iter().all(|&v| table.variables[v].degree == d));
        for multiple in 1..=orbit.len() {
            degrees.push(d * multiple);
        }
    }
    degrees.sort_unstable();

    let mut den = IntPoly::one();
    for &d in &degrees {
        den = den.mul(&IntPoly::one_minus_power(d));
    }
    // numerator = series * den, which must be a polynomial
    let numerator = series
        .numerator()
        .mul(&den)
        .exact_div(series.denominator())
        .map_err(|_| {
            Error::FalsifiedProperty(
                "series numerator over the orbit degrees is not a polynomial"
                    .to_string(),
            )
        })?;
    for (k, c) in numerator.coeffs().iter().enumerate() {
        if c.is_negative() {
            return Err(Error::FalsifiedProperty(format!(
                "numerator coefficient {c} of z^{k} is negative"
            )));
        }
    }
    Ok(HilbertForm {
        numerator: numerator.coeffs().to_vec(),
        denominator_degrees: degrees,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decorated::{
        direct_product, hh_atom, hybrid, kernel_atom, replicate_hh, wreath_hh,
        wreath_outer,
    };
    use crate::perm::FiniteGroup;

    fn ints(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&c| BigInt::from(c)).collect()
    }

    #[test]
    fn variable_tables() {
        let t = variables(&wreath_hh(&FiniteGroup::cyclic(2)).unwrap()).unwrap();
        assert_eq!(t.variables.len(), 2);
        assert!(t.variables.iter().all(|v| !v.nilpotent));
        let degrees: Vec<usize> = t.variables.iter().map(|v| v.degree).collect();
        assert_eq!(degrees, vec![1, 2]);

        let t3 = variables(
            &replicate_hh(crate::decorated::HHKind::SymInf, &FiniteGroup::cyclic(3))
                .unwrap(),
        )
        .unwrap();
        assert_eq!(t3.free_count(), 3);
        assert!(t3.variables.iter().all(|v| v.degree == 1));
        let g0 = crate::perm::FiniteGroup::new(3, t3.g0_generators.clone()).unwrap();
        assert_eq!(g0.order(), 3);

        let k = variables(&kernel_atom(&FiniteGroup::identity_group(1)).unwrap()).unwrap();
        assert_eq!(k.variables.len(), 1);
        assert!(k.variables[0].nilpotent);
    }

    #[test]
    fn free_series() {
        // wr(C2): 1/((1-z)(1-z^2))
        let s = hilbert_series(&wreath_hh(&FiniteGroup::cyclic(2)).unwrap()).unwrap();
        assert_eq!(s.numerator(), &crate::poly::IntPoly::one());
        let den = crate::poly::IntPoly::one_minus_power(1)
            .mul(&crate::poly::IntPoly::one_minus_power(2));
        assert_eq!(s.denominator(), &den);
    }

    #[test]
    fn partition_series() {
        // rep(Sinf, S3): 1/((1-z)(1-z^2)(1-z^3))
        let d = replicate_hh(
            crate::decorated::HHKind::SymInf,
            &FiniteGroup::symmetric(3),
        )
        .unwrap();
        let s = hilbert_series(&d).unwrap();
        let den = crate::poly::IntPoly::one_minus_power(1)
            .mul(&crate::poly::IntPoly::one_minus_power(2))
            .mul(&crate::poly::IntPoly::one_minus_power(3));
        assert_eq!(s.numerator(), &crate::poly::IntPoly::one());
        assert_eq!(s.denominator(), &den);
    }

    #[test]
    fn kernel_plus_atom_series() {
        let d = direct_product(
            &kernel_atom(&FiniteGroup::identity_group(1)).unwrap(),
            &hh_atom(crate::decorated::HHKind::SymInf).unwrap(),
        )
        .unwrap();
        let s = hilbert_series(&d).unwrap();
        assert_eq!(s.numerator(), &crate::poly::IntPoly::one_plus_power(1));
        assert_eq!(s.denominator(), &crate::poly::IntPoly::one_minus_power(1));
        assert_eq!(profile_values(&d, 6).unwrap(), ints(&[1, 2, 2, 2, 2, 2, 2]));
    }

    #[test]
    fn profiles() {
        let d = replicate_hh(
            crate::decorated::HHKind::SymInf,
            &FiniteGroup::symmetric(2),
        )
        .unwrap();
        assert_eq!(profile_values(&d, 5).unwrap(), ints(&[1, 1, 2, 2, 3, 3]));

        let h = hybrid(&FiniteGroup::symmetric(2), &FiniteGroup::identity_group(2))
            .unwrap();
        assert_eq!(profile_values(&h, 4).unwrap(), ints(&[1, 1, 3, 3, 6]));

        let a = hh_atom(crate::decorated::HHKind::AutQ).unwrap();
        assert_eq!(profile_values(&a, 3).unwrap(), ints(&[1, 1, 1, 1]));
    }

    #[test]
    fn rev_matches_aut() {
        for (r, a) in [
            (crate::decorated::HHKind::RevQ, crate::decorated::HHKind::AutQ),
            (crate::decorated::HHKind::RevQZ, crate::decorated::HHKind::AutQZ),
        ] {
            let dr = replicate_hh(r, &FiniteGroup::cyclic(3)).unwrap();
            let da = replicate_hh(a, &FiniteGroup::cyclic(3)).unwrap();
            assert_eq!(
                hilbert_series(&dr).unwrap(),
                hilbert_series(&da).unwrap()
            );
        }
    }

    #[test]
    fn dimensions_and_growth() {
        for k in 1..=5 {
            let d = replicate_hh(
                crate::decorated::HHKind::SymInf,
                &FiniteGroup::symmetric(k),
            )
            .unwrap();
            assert_eq!(algebraic_dimension(&d).unwrap(), k);
            assert_eq!(growth_rate(&d).unwrap(), k as i64 - 1);
        }
        let w = wreath_hh(
            &FiniteGroup::from_cycle_strings(4, &["(0 1)", "(2 3)"]).unwrap(),
        )
        .unwrap();
        assert_eq!(algebraic_dimension(&w).unwrap(), 8);
        assert_eq!(growth_rate(&w).unwrap(), 7);
        let k = kernel_atom(&FiniteGroup::symmetric(2)).unwrap();
        assert_eq!(algebraic_dimension(&k).unwrap(), 0);
        assert_eq!(growth_rate(&k).unwrap(), -1);
    }

    #[test]
    fn hilbert_forms() {
        let d = replicate_hh(
            crate::decorated::HHKind::SymInf,
            &FiniteGroup::symmetric(3),
        )
        .unwrap();
        let f = hilbert_form(&d).unwrap();
        assert_eq!(f.denominator_degrees, vec![1, 2, 3]);
        assert_eq!(f.numerator, ints(&[1]));

        let w = hilbert_form(&wreath_hh(&FiniteGroup::cyclic(2)).unwrap()).unwrap();
        assert_eq!(w.denominator_degrees, vec![1, 2]);
        assert_eq!(w.numerator, ints(&[1]));

        let c = hilbert_form(
            &replicate_hh(crate::decorated::HHKind::SymInf, &FiniteGroup::cyclic(3))
                .unwrap(),
        )
        .unwrap();
        assert_eq!(c.denominator_degrees, vec![1, 2, 3]);
        assert_eq!(c.numerator, ints(&[1, 0, 0, 1]));
    }

    #[test]
    fn product_multiplies_series() {
        let a = wreath_hh(&FiniteGroup::cyclic(2)).unwrap();
        let b = replicate_hh(
            crate::decorated::HHKind::SymInf,
            &FiniteGroup::symmetric(2),
        )
        .unwrap();
        let p = direct_product(&a, &b).unwrap();
        let sp = hilbert_series(&p).unwrap();
        let prod = hilbert_series(&a).unwrap().mul(&hilbert_series(&b).unwrap());
        assert_eq!(sp, prod);
    }

    #[test]
    fn two_atoms_series() {
        let d = direct_product(
            &hh_atom(crate::decorated::HHKind::SymInf).unwrap(),
            &hh_atom(crate::decorated::HHKind::SymInf).unwrap(),
        )
        .unwrap();
        let s = hilbert_series(&d).unwrap();
        assert_eq!(s.numerator(), &crate::poly::IntPoly::one());
        assert_eq!(
            s.denominator(),
            &crate::poly::IntPoly::one_minus_power(1).pow(2)
        );
    }

    #[test]
    fn nested_wreath_series_is_consistent() {
        let d = wreath_outer(&FiniteGroup::cyclic(4), &FiniteGroup::cyclic(3)).unwrap();
        assert_eq!(algebraic_dimension(&d).unwrap(), 15);
        let form = hilbert_form(&d).unwrap();
        assert!(form.numerator.iter().all(|c| !c.is_negative()));
        let vals = profile_values(&d, 8).unwrap();
        assert!(vals.iter().all(|c| !c.is_negative()));
        // prefix must match the form's own expansion
        let mut den = crate::poly::IntPoly::one();
        for &deg in &form.denominator_degrees {
            den = den.mul(&crate::poly::IntPoly::one_minus_power(deg));
        }
        let r = crate::poly::RationalFunction::new(
            crate::poly::IntPoly::from_coeffs(form.numerator.clone()),
            den,
        )
        .unwrap();
        assert_eq!(r.series_prefix(8).unwrap(), vals);
    }
}
