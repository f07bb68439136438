//! Golden values for the moment curves `(t, t²)` and `(t, t², t³)`.

use num_traits::Signed;
use torsion_core::geometry::{build_word_table, nilpotency_step, Nilpotency, PolyMap, PolyVectorField, Word, WordTable};
use torsion_core::parse::parse_poly;
use torsion_core::polytope::{lambda_table, newton_polytope, polytope_via_j, weight_spec, PolytopeQuery, DEFAULT_TUPLE_CAP};
use torsion_core::torsion::{fields_of, TorsionContext};
use torsion_core::{rat, ratio, Rat};

fn moment(d: usize, cap: usize) -> WordTable {
    let mut v: Vec<String> = (1..=d).map(|i| format!("x{i}")).collect();
    v.push("t".into());
    let v: Vec<&str> = v.iter().map(String::as_str).collect();
    let q = |s: &str| parse_poly(s, &v).unwrap();
    let pi1 = PolyMap::new((1..=d).map(|i| q(&format!("x{i}"))).collect()).unwrap();
    let pi2 = PolyMap::new((1..=d).map(|i| q(&format!("x{i} - t^{i}"))).collect()).unwrap();
    let (x1, x2) = fields_of(&pi1, &pi2);
    build_word_table(&x1, &x2, cap).unwrap()
}

#[test]
fn parabola_fields_and_step() {
    let t = moment(2, 4);
    let v = ["x1", "x2", "t"];
    let f = |c: [&str; 3]| PolyVectorField::new(c.iter().map(|s| parse_poly(s, &v).unwrap()).collect()).unwrap();
    assert_eq!(t.letter_field(1), &f(["0", "0", "1"]));
    assert_eq!(t.letter_field(2), &f(["1", "2*t", "1"]));
    assert_eq!(t.field(&"(1,2)".parse::<Word>().unwrap()), f(["0", "2", "0"]));
    assert_eq!(nilpotency_step(&t).unwrap(), Nilpotency::Step(2));
}

#[test]
fn parabola_lambda_and_polytope() {
    let t = moment(2, 4);
    let lam = lambda_table(&t, DEFAULT_TUPLE_CAP).unwrap();
    assert!(lam.iter().all(|e| e.deg == (2, 2) && e.poly.constant_value().unwrap().abs() == rat(2)));
    let p = newton_polytope(&lam, PolytopeQuery::Union).unwrap();
    assert_eq!(p.generators(), [(rat(2), rat(2))]);
    let w = weight_spec(&lam, (2, 2));
    assert_eq!((w.p.clone(), w.exponent.clone()), ((ratio(3, 2), ratio(3, 2)), ratio(1, 3)));
    assert!((w.eval_f64(&[0.3, -1.0, 2.0]) - 2f64.powf(1.0 / 3.0)).abs() < 1e-12);
}

#[test]
fn parabola_torsion() {
    let ctx = TorsionContext::new(moment(2, 4));
    let p = ctx.profile(&[0, 1, 0], false).unwrap();
    assert_eq!(p.b, (2, 2));
    assert_eq!(p.j_beta.constant_value().unwrap().abs(), rat(2));
    let psi = ctx.psi().unwrap();
    // d/dt₂ of the Jacobian of Ψ at the origin of time.
    let dj = psi.jacobian_derivative(&[0, 1, 0]).unwrap();
    assert_eq!(dj.constant_value().unwrap().abs(), rat(2));
}

#[test]
fn twisted_cubic_polytope_and_weight() {
    let t = moment(3, 6);
    assert_eq!(nilpotency_step(&t).unwrap(), Nilpotency::Step(3));
    let lam = lambda_table(&t, DEFAULT_TUPLE_CAP).unwrap();
    let u = newton_polytope(&lam, PolytopeQuery::Union).unwrap();
    let mut v: Vec<(Rat, Rat)> = u.vertices().to_vec();
    v.sort();
    assert_eq!(v, vec![(rat(3), rat(4)), (rat(4), rat(3))]);
    let w = weight_spec(&lam, (3, 4));
    assert_eq!(w.p, (rat(2), ratio(3, 2)));
    assert_eq!(w.sum_abs_at(&[rat(1), ratio(-2, 3), rat(5), ratio(1, 7)]).unwrap(), rat(12));
    assert!((w.eval_f64(&[0.0; 4]) - 12f64.powf(1.0 / 6.0)).abs() < 1e-12);
}

#[test]
fn twisted_cubic_polytope_from_torsion() {
    let t = moment(3, 6);
    let lam = lambda_table(&t, DEFAULT_TUPLE_CAP).unwrap();
    let ctx = TorsionContext::new(t);
    let profs = ctx.all_profiles(ctx.default_budget().unwrap()).unwrap();
    for x in [vec![rat(0); 4], vec![ratio(1, 3), rat(2), rat(-1), ratio(5, 7)]] {
        let a = polytope_via_j(&profs, &x).unwrap();
        let b = newton_polytope(&lam, PolytopeQuery::AtPoint(&x)).unwrap();
        assert!(a.same_set(&b), "{:?} vs {:?}", a.vertices(), b.vertices());
    }
}
