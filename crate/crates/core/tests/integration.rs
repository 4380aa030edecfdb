use bsgeom::bsgroup::{ball, eval_word, growth, AffElem, GroupWord, DEFAULT_BALL_BUDGET};
use bsgeom::dynamics::{cocompact_witness, in_standard_block, pd_census, CompactBlock, TripleRRQ};
use bsgeom::fibercomplex::{barycenter_pi_exact, dist_bounds, FiberPoint};
use bsgeom::nadic::{CloneBall, NAdic, Radius};
use bsgeom::quasisim::{classify, conjugate_to_translation, verify_rubber_band, PLHomeo, DEFAULT_SEGMENT_CAP};
use bsgeom::rigidity::{enumerate_gamma, torsionfree_classify, GammaCase};
use bsgeom::Error;
use num_rational::BigRational as Q;

fn q(p: i64, d: i64) -> Q {
    Q::new(p.into(), d.into())
}

#[test]
fn dyadic_distances() {
    let one = NAdic::from_int(1, 2).unwrap();
    let three = NAdic::from_int(3, 2).unwrap();
    let five = NAdic::from_int(5, 2).unwrap();
    assert_eq!(one.dist(&three), Radius::pow(2, 0));
    assert_eq!(one.dist(&five), Radius::pow(2, -1));
    assert!(one.dist(&one).is_zero());
}

#[test]
fn nadic_text_round_trip() {
    let x = NAdic::new(3, q(-7, 12)).unwrap();
    let back: NAdic = x.to_string().parse().unwrap();
    assert_eq!(back, x);
    assert!("2:0:12|0".parse::<NAdic>().is_err());
    assert!(matches!(NAdic::from_int(1, 1), Err(Error::InvalidBase(_))));
}

#[test]
fn clone_and_element_json_round_trip() {
    let c = CloneBall::containing(&NAdic::new(2, q(5, 3)).unwrap(), 4);
    let js = serde_json::to_string(&c.to_json()).unwrap();
    assert_eq!(CloneBall::from_json(&serde_json::from_str(&js).unwrap()).unwrap(), c);
    let g = AffElem::from_parts(3, -2, 7, 1).unwrap();
    let js = serde_json::to_string(&g.to_json()).unwrap();
    assert_eq!(AffElem::from_json(&serde_json::from_str(&js).unwrap()).unwrap(), g);
}

#[test]
fn words_parse_and_evaluate() {
    let w: GroupWord = "baB".parse().unwrap();
    let g = eval_word(&w, 2).unwrap();
    assert_eq!(g, AffElem::a(2).unwrap().pow(2));
    assert_eq!(growth(2, 3, DEFAULT_BALL_BUDGET).unwrap(), vec![1, 5, 17, 43]);
    assert_eq!(ball(3, 2, DEFAULT_BALL_BUDGET).unwrap().len(), 17);
}

#[test]
fn budgets_are_enforced() {
    assert!(matches!(ball(2, 20, 1000), Err(Error::BudgetExceeded { .. })));
}

#[test]
fn fiber_distance_on_a_common_leaf() {
    let z = NAdic::from_int(0, 2).unwrap();
    let p = FiberPoint::on_leaf(&z, 0.0, 1.0).unwrap();
    let r = FiberPoint::on_leaf(&z, 0.0, 4.0).unwrap();
    let b = dist_bounds(&p, &r).unwrap();
    assert!((b.lo - 4f64.ln()).abs() < 1e-9 && (b.hi - 4f64.ln()).abs() < 1e-9);
}

#[test]
fn barycenter_is_equivariant_under_generators() {
    let z = NAdic::new(2, q(1, 3)).unwrap();
    let pi = barycenter_pi_exact(&q(0, 1), &q(3, 1), &z).unwrap();
    for g in [AffElem::a(2).unwrap(), AffElem::b(2).unwrap().inv()] {
        let lhs = barycenter_pi_exact(&g.act_r(&q(0, 1)), &g.act_r(&q(3, 1)), &g.act_qn(&z)).unwrap();
        assert_eq!(lhs, pi.act(&g));
    }
}

#[test]
fn translation_conjugacy_satisfies_the_rubber_band_check() {
    let psi = PLHomeo::from_points(&[(q(0, 1), q(0, 1)), (q(1, 1), q(2, 1))], q(1, 1), q(1, 2)).unwrap();
    let f = psi.compose(&PLHomeo::translation(q(1, 1))).compose(&psi.inverse());
    let c = conjugate_to_translation(&f, &q(0, 1), &q(50, 1), DEFAULT_SEGMENT_CAP).unwrap();
    assert!(verify_rubber_band(&c.phi, &c.cover, &q(4, 1)).unwrap());
    let rep = classify(&f, 16, 10_000).unwrap();
    assert!(!rep.squared);
}

#[test]
fn witness_normalizes_into_the_standard_block() {
    let t = TripleRRQ::new(q(5, 2), q(40, 1), NAdic::new(2, q(7, 3)).unwrap()).unwrap();
    let w = cocompact_witness(&t);
    assert!(in_standard_block(&w.normalized));
    assert!(w.word_length <= w.length_bound());
}

#[test]
fn census_of_the_standard_block_is_finite() {
    let c = pd_census(&CompactBlock::standard(3).unwrap(), 3, 6, DEFAULT_BALL_BUDGET).unwrap();
    assert!(c.stable_from(4));
}

#[test]
fn gamma_presentations() {
    let p = enumerate_gamma(GammaCase::Case3ii, 5).unwrap();
    assert_eq!(p.k, Some(2));
    assert!(enumerate_gamma(GammaCase::Case3ii, 4).is_err());
    assert_eq!(torsionfree_classify(-3).unwrap().commensurable_to, 9);
    assert!(torsionfree_classify(1).is_err());
}
