//! The largest catalog computations: the doubly nested wreath product
//! C4 wr (Sinf wr C3) truncates at k = 6 to a 72-point group of order
//! about 7.5e19; its profile check and recognition exercise every
//! large-scale code path (stabilizer chains with long prescribed bases,
//! subset-orbit enumeration without an element list).

use oligo_core::decorated::{self, HHKind};
use oligo_core::oracle;
use oligo_core::perm::FiniteGroup;

fn nested() -> decorated::DecoratedGroup {
    decorated::wreath_outer(&FiniteGroup::cyclic(4), &FiniteGroup::cyclic(3)).unwrap()
}

#[test]
fn nested_profile_matches_oracle_at_k6() {
    oracle::set_degree_cap(128);
    let report = oracle::verify_profile(&nested(), 6, 6).unwrap();
    assert!(
        report.matched,
        "series {:?} vs oracle {:?}",
        report.series_prefix, report.oracle_prefix
    );
}

#[test]
fn nested_recognition_round_trip() {
    oracle::set_degree_cap(128);
    let delta = nested();
    let t = oracle::truncate(&delta, 6).unwrap();
    let rec = oracle::recognize(&t.group, 6).unwrap();
    assert!(decorated::isomorphic(&rec, &delta).unwrap().is_some());
}

#[test]
fn replicated_linear_order_recognizes_as_symmetric() {
    oracle::set_degree_cap(128);
    let delta = decorated::replicate_hh(HHKind::AutQ, &FiniteGroup::cyclic(3)).unwrap();
    let t = oracle::truncate(&delta, 6).unwrap();
    let rec = oracle::recognize(&t.group, 6).unwrap();
    // truncations cannot tell AutQ from SymInf; ages agree
    let expect = decorated::replicate_hh(HHKind::SymInf, &FiniteGroup::cyclic(3)).unwrap();
    assert!(decorated::isomorphic(&rec, &expect).unwrap().is_some());
}
