use std::collections::HashSet;

use bsgeom::bsgroup::{eval_word, Gen, GroupWord};
use bsgeom::fibercomplex::{dist_bounds, FiberPoint};
use bsgeom::nadic::{CloneBall, CloneRelation, NAdic};
use bsgeom::quasisim::PLHomeo;
use bsgeom::rigidity::{commensurable, dihedral_endo, DihedralElem, EndoMode};
use bsgeom::treespace::{tree_dist, TreePoint};
use num_rational::BigRational as Q;
use proptest::prelude::*;

fn rational() -> impl Strategy<Value = Q> {
    (-100_000i64..100_000, 1i64..200, -6i64..6)
        .prop_map(|(p, d, e)| Q::new(p.into(), d.into()) * bsgeom::nadic::pow_n(2, e))
}

fn nadic(n: u32) -> impl Strategy<Value = NAdic> {
    rational().prop_map(move |r| NAdic::new(n, r).unwrap())
}

fn base() -> impl Strategy<Value = u32> {
    prop::sample::select(vec![2u32, 3, 5, 10])
}

fn word(max: usize) -> impl Strategy<Value = GroupWord> {
    prop::collection::vec(prop::sample::select(Gen::ALL.to_vec()), 0..max).prop_map(GroupWord)
}

fn pl_map() -> impl Strategy<Value = PLHomeo<Q>> {
    (prop::collection::btree_set(-40i64..40, 1..6), prop::collection::vec(1i64..12, 7))
        .prop_map(|(xs, sl)| {
            let xs: Vec<i64> = xs.into_iter().collect();
            let s = |i: usize| Q::new(sl[i].into(), 4.into());
            let mut pts = vec![(Q::from_integer(xs[0].into()), Q::from_integer(0.into()))];
            for (i, w) in xs.windows(2).enumerate() {
                let (x0, v0) = pts.last().unwrap().clone();
                let x1 = Q::from_integer(w[1].into());
                let v1 = v0 + s(i + 2) * (&x1 - &x0);
                pts.push((x1, v1));
            }
            PLHomeo::from_points(&pts, s(0), s(1)).unwrap()
        })
}

proptest! {
    #[test]
    fn ultrametric(n in base(), a in rational(), b in rational(), c in rational()) {
        let (x, y, z) = (NAdic::new(n, a).unwrap(), NAdic::new(n, b).unwrap(), NAdic::new(n, c).unwrap());
        prop_assert!(x.dist(&z) <= x.dist(&y).max(y.dist(&z)));
        prop_assert_eq!(x.dist(&y), y.dist(&x));
        prop_assert_eq!(x.dist(&y).is_zero(), x == y);
    }

    #[test]
    fn ring_laws(x in nadic(3), y in nadic(3), z in nadic(3)) {
        prop_assert_eq!(&(&x + &y) + &z, &x + &(&y + &z));
        prop_assert_eq!(&x * &(&y + &z), &(&x * &y) + &(&x * &z));
        prop_assert_eq!(&x * &y, &y * &x);
        prop_assert!((&x - &x).is_zero());
        prop_assert_eq!(&x + &(-&y), &x - &y);
    }

    #[test]
    fn translation_is_isometry(x in nadic(2), y in nadic(2), t in nadic(2)) {
        prop_assert_eq!((&x + &t).dist(&(&y + &t)), x.dist(&y));
    }

    #[test]
    fn clones_nest_or_are_disjoint(x in nadic(2), y in nadic(2), j in -6i64..6, k in -6i64..6) {
        let (a, b) = (CloneBall::containing(&x, j), CloneBall::containing(&y, k));
        let shared = a.contains(&y) && b.contains(&y) || a.contains(&x) && b.contains(&x);
        match a.relation(&b) {
            CloneRelation::Disjoint => prop_assert!(!shared),
            CloneRelation::Equal => prop_assert!(a == b),
            CloneRelation::ProperSub => prop_assert!(b.contains_clone(&a) && !a.contains_clone(&b)),
            CloneRelation::ProperSuper => prop_assert!(a.contains_clone(&b) && !b.contains_clone(&a)),
        }
    }

    #[test]
    fn relator_insertion_is_invisible(n in 2u32..5, w in word(20), at in any::<prop::sample::Index>(), inv in any::<bool>()) {
        let rel = if inv { GroupWord::relator(n).inverse() } else { GroupWord::relator(n) };
        let i = at.index(w.len() + 1);
        let mut v = w.0[..i].to_vec();
        v.extend(rel.0.iter().copied());
        v.extend(w.0[i..].iter().copied());
        prop_assert_eq!(eval_word(&GroupWord(v), n).unwrap(), eval_word(&w, n).unwrap());
    }

    #[test]
    fn word_times_inverse_is_trivial(n in 2u32..5, w in word(30)) {
        prop_assert!(eval_word(&w.concat(&w.inverse()), n).unwrap().is_identity());
    }

    #[test]
    fn four_point_condition(zs in prop::collection::vec((nadic(2), -8.0f64..8.0), 4)) {
        let p: Vec<TreePoint> = zs.iter().map(|(z, h)| TreePoint::on_line(z, *h)).collect();
        let d = |i: usize, j: usize| tree_dist(&p[i], &p[j]);
        let mut s = [d(0, 1) + d(2, 3), d(0, 2) + d(1, 3), d(0, 3) + d(1, 2)];
        s.sort_by(f64::total_cmp);
        prop_assert!(s[2] - s[1] <= 1e-9 * s[2].max(1.0));
    }

    #[test]
    fn distance_bounds_are_ordered(
        z1 in nadic(2), z2 in nadic(2),
        x1 in -30.0f64..30.0, x2 in -30.0f64..30.0,
        h1 in -4.0f64..4.0, h2 in -4.0f64..4.0,
    ) {
        let p1 = FiberPoint::on_leaf(&z1, x1, 2f64.powf(h1)).unwrap();
        let p2 = FiberPoint::on_leaf(&z2, x2, 2f64.powf(h2)).unwrap();
        let b = dist_bounds(&p1, &p2).unwrap();
        prop_assert!(b.lo <= b.hi);
        prop_assert!(b.lo >= 0.0);
    }

    #[test]
    fn stretch_of_composite_is_contained_in_product(f in pl_map(), g in pl_map()) {
        let fg = f.compose(&g);
        let prod = f.stretch_interval().mul(&g.stretch_interval());
        prop_assert!(prod.contains(&fg.stretch_interval()));
        prop_assert!(f.compose(&f.inverse()).is_identity());
    }

    #[test]
    fn composition_agrees_pointwise(f in pl_map(), g in pl_map(), x in rational()) {
        prop_assert_eq!(f.compose(&g).eval(&x), f.eval(&g.eval(&x)));
    }

    #[test]
    fn commensurability_is_an_equivalence(a in 2u64..300, b in 2u64..300, c in 2u64..300) {
        prop_assert!(commensurable(a, a).unwrap());
        prop_assert_eq!(commensurable(a, b).unwrap(), commensurable(b, a).unwrap());
        if commensurable(a, b).unwrap() && commensurable(b, c).unwrap() {
            prop_assert!(commensurable(a, c).unwrap());
        }
    }

    #[test]
    fn realization_intertwines(k in 1i64..30, fix in any::<bool>(), w in "[aAr]{0,16}", p in -500i64..500, d in 1i64..50) {
        let mode = if fix { EndoMode::FixReflection } else { EndoMode::NoFixedReflection };
        let phi = dihedral_endo(2 * k + 1, mode).unwrap();
        let g = DihedralElem::eval_word(&w).unwrap();
        let x = Q::new(p.into(), d.into());
        prop_assert_eq!(phi.realize(&g.apply(&x)), phi.apply(&g).apply(&phi.realize(&x)));
    }
}

fn dihedral_ball(radius: usize) -> HashSet<DihedralElem> {
    let mut seen = HashSet::from([DihedralElem::IDENTITY]);
    let mut frontier = vec![DihedralElem::IDENTITY];
    let gens = [DihedralElem::a(), DihedralElem::a().inv(), DihedralElem::r()];
    for _ in 0..radius {
        let mut next = Vec::new();
        for e in &frontier {
            for s in &gens {
                let f = e.mul(s);
                if seen.insert(f) {
                    next.push(f);
                }
            }
        }
        frontier = next;
    }
    seen
}

#[test]
fn dihedral_endomorphisms_are_injective_and_not_onto() {
    let ball = dihedral_ball(12);
    for k in 1..=6 {
        for mode in [EndoMode::FixReflection, EndoMode::NoFixedReflection] {
            let phi = dihedral_endo(2 * k + 1, mode).unwrap();
            let images: HashSet<DihedralElem> = ball.iter().map(|g| phi.apply(g)).collect();
            assert_eq!(images.len(), ball.len());
            assert!(!images.contains(&DihedralElem::a()));
            assert!(phi.preimage(&DihedralElem::a()).is_none());
        }
    }
}
