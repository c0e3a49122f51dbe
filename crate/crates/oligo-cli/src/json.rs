//! JSON encodings: decorated groups, finite groups, series presentations
//! and verification reports.
//!
//! Decorated-group schema (exact keys):
//! `{"degree": int, "F_generators": [[int...]...], "blocks": [[int...]...],
//!   "decorations": [{"block": int, "H_generators": [[int...]...],
//!   "kind": "SymInf"|"AutQ"|"RevQ"|"AutQZ"|"RevQZ"|"TrivialKernel"}...]}`.
//! Decorations are listed for one representative block per F-orbit;
//! readers replicate them across the orbit.

use num_bigint::BigInt;
use serde_json::{json, Map, Value};

use oligo_core::blocksys::SetPartition;
use oligo_core::decorated::{DecoratedGroup, Decoration, HHKind};
use oligo_core::oracle::VerificationReport;
use oligo_core::perm::{induced_action, FiniteGroup, Permutation};
use oligo_core::series::HilbertForm;

fn perm_to_json(p: &Permutation) -> Value {
    Value::Array(p.images().into_iter().map(|v| json!(v)).collect())
}

fn group_gens_json(g: &FiniteGroup) -> Value {
    Value::Array(g.generators().iter().map(perm_to_json).collect())
}

/// `{"degree": int, "generators": [[int...]...]}` — the schema of the
/// `recognize` command's input file.
pub fn group_to_json(g: &FiniteGroup) -> Value {
    json!({"degree": g.degree(), "generators": group_gens_json(g)})
}

pub fn group_from_json(v: &Value) -> Result<FiniteGroup, String> {
    let degree = v
        .get("degree")
        .and_then(Value::as_u64)
        .ok_or("missing integer key \"degree\"")? as usize;
    let gens_v = v
        .get("generators")
        .and_then(Value::as_array)
        .ok_or("missing array key \"generators\"")?;
    let mut gens = Vec::new();
    for gv in gens_v {
        gens.push(perm_from_json(gv, degree)?);
    }
    FiniteGroup::new(degree, gens).map_err(|e| e.to_string())
}

fn perm_from_json(v: &Value, degree: usize) -> Result<Permutation, String> {
    let arr = v.as_array().ok_or("generator is not an array")?;
    if arr.len() != degree {
        return Err(format!(
            "generator has {} images, expected {degree}",
            arr.len()
        ));
    }
    let images: Vec<usize> = arr
        .iter()
        .map(|x| x.as_u64().map(|u| u as usize).ok_or("non-integer image"))
        .collect::<Result<_, _>>()?;
    Permutation::from_images(&images).map_err(|e| e.to_string())
}

/// F-orbit representatives among the blocks: the least block index of
/// each orbit of the induced action.
fn orbit_representatives(delta: &DecoratedGroup) -> Vec<usize> {
    let (action, _) = induced_action(delta.f(), delta.blocks().blocks())
        .expect("a valid datum has a stable block partition");
    let mut reps: Vec<usize> = action
        .orbits_points()
        .into_iter()
        .map(|o| o.into_iter().min().unwrap())
        .collect();
    reps.sort_unstable();
    reps
}

pub fn delta_to_json(delta: &DecoratedGroup) -> Value {
    let blocks: Vec<Value> = delta
        .blocks()
        .blocks()
        .iter()
        .map(|b| Value::Array(b.iter().map(|&p| json!(p)).collect()))
        .collect();
    let decorations: Vec<Value> = orbit_representatives(delta)
        .into_iter()
        .map(|j| {
            let d = &delta.decorations()[j];
            json!({
                "block": j,
                "H_generators": group_gens_json(&d.h),
                "kind": d.kind.as_str(),
            })
        })
        .collect();
    json!({
        "degree": delta.degree(),
        "F_generators": group_gens_json(delta.f()),
        "blocks": blocks,
        "decorations": decorations,
    })
}

#[cfg_attr(not(test), allow(dead_code))] // the binary only writes this schema; tests read it back
pub fn delta_from_json(v: &Value) -> Result<DecoratedGroup, String> {
    let degree = v
        .get("degree")
        .and_then(Value::as_u64)
        .ok_or("missing integer key \"degree\"")? as usize;
    let f_gens = v
        .get("F_generators")
        .and_then(Value::as_array)
        .ok_or("missing array key \"F_generators\"")?;
    let mut gens = Vec::new();
    for gv in f_gens {
        gens.push(perm_from_json(gv, degree)?);
    }
    let f = FiniteGroup::new(degree, gens).map_err(|e| e.to_string())?;

    let blocks_v = v
        .get("blocks")
        .and_then(Value::as_array)
        .ok_or("missing array key \"blocks\"")?;
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    for bv in blocks_v {
        let b = bv.as_array().ok_or("block is not an array")?;
        blocks.push(
            b.iter()
                .map(|x| x.as_u64().map(|u| u as usize).ok_or("non-integer point"))
                .collect::<Result<_, _>>()?,
        );
    }
    let partition = SetPartition::new(degree, blocks).map_err(|e| e.to_string())?;

    let decos_v = v
        .get("decorations")
        .and_then(Value::as_array)
        .ok_or("missing array key \"decorations\"")?;
    let mut listed: Vec<(usize, Decoration)> = Vec::new();
    for dv in decos_v {
        let j = dv
            .get("block")
            .and_then(Value::as_u64)
            .ok_or("decoration missing integer key \"block\"")? as usize;
        if j >= partition.block_count() {
            return Err(format!("decoration names nonexistent block {j}"));
        }
        let size = partition.blocks()[j].len();
        let h_gens = dv
            .get("H_generators")
            .and_then(Value::as_array)
            .ok_or("decoration missing array key \"H_generators\"")?;
        let mut gens = Vec::new();
        for gv in h_gens {
            gens.push(perm_from_json(gv, size)?);
        }
        let h = FiniteGroup::new(size, gens).map_err(|e| e.to_string())?;
        let kind_s = dv
            .get("kind")
            .and_then(Value::as_str)
            .ok_or("decoration missing string key \"kind\"")?;
        let kind = HHKind::from_str_tag(kind_s).map_err(|e| e.to_string())?;
        listed.push((j, Decoration { h, kind }));
    }

    // replicate the listed decorations across their F-orbits
    let (action, _) =
        induced_action(&f, partition.blocks()).map_err(|e| e.to_string())?;
    let mut decorations: Vec<Option<Decoration>> = vec![None; partition.block_count()];
    for (j, deco) in listed {
        let orbit = action
            .orbits_points()
            .into_iter()
            .find(|o| o.contains(&j))
            .expect("every block lies in an orbit");
        for b in orbit {
            let transported = oligo_core::decorated::transport_along(&f, &partition, j, b, &deco)
                .map_err(|e| e.to_string())?;
            decorations[b] = Some(transported);
        }
    }
    let decorations: Vec<Decoration> = decorations
        .into_iter()
        .enumerate()
        .map(|(j, d)| d.ok_or(format!("no decoration covers block {j}")))
        .collect::<Result<_, _>>()?;
    DecoratedGroup::new(f, partition, decorations).map_err(|e| e.to_string())
}

fn bigint_json(v: &BigInt) -> Value {
    if let Ok(i) = i64::try_from(v.clone()) {
        json!(i)
    } else {
        json!(v.to_string())
    }
}

pub fn bigints_json(vs: &[BigInt]) -> Value {
    Value::Array(vs.iter().map(bigint_json).collect())
}

/// `{"numerator": [...], "denominator_degrees": [...], "reduced":
/// {"numerator": [...], "denominator": [...]}}`.
pub fn series_json(form: &HilbertForm, reduced_num: &[BigInt], reduced_den: &[BigInt]) -> Value {
    json!({
        "numerator": bigints_json(&form.numerator),
        "denominator_degrees": form.denominator_degrees,
        "reduced": {
            "numerator": bigints_json(reduced_num),
            "denominator": bigints_json(reduced_den),
        },
    })
}

/// Keys `"k"`, `"n"`, `"series_prefix"`, `"oracle_prefix"`, `"match"`,
/// `"millis"`.
pub fn report_json(r: &VerificationReport) -> Value {
    let mut m = Map::new();
    m.insert("k".into(), json!(r.k));
    m.insert("n".into(), json!(r.n));
    m.insert("series_prefix".into(), bigints_json(&r.series_prefix));
    m.insert("oracle_prefix".into(), bigints_json(&r.oracle_prefix));
    m.insert("match".into(), json!(r.matched));
    m.insert("millis".into(), json!(r.millis));
    Value::Object(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use oligo_core::decorated;

    #[test]
    fn delta_round_trip() {
        let entries = [
            decorated::wreath_outer(&FiniteGroup::cyclic(4), &FiniteGroup::cyclic(3)).unwrap(),
            decorated::replicate_hh(HHKind::AutQ, &FiniteGroup::cyclic(3)).unwrap(),
            decorated::direct_product(
                &decorated::kernel_atom(&FiniteGroup::symmetric(2)).unwrap(),
                &decorated::wreath_hh(&FiniteGroup::cyclic(2)).unwrap(),
            )
            .unwrap(),
        ];
        for delta in &entries {
            let v = delta_to_json(delta);
            let back = delta_from_json(&v).unwrap();
            assert!(decorated::isomorphic(&back, delta).unwrap().is_some());
            // encoding is stable through a round trip
            assert_eq!(delta_to_json(&back), v);
        }
    }

    #[test]
    fn group_round_trip() {
        let g = FiniteGroup::from_cycle_strings(6, &["(0 1 2 3 4 5)", "(0 1)"]).unwrap();
        let v = group_to_json(&g);
        let back = group_from_json(&v).unwrap();
        assert!(back.same_group(&g));
    }
}
