use fs_kernel::canon::type_eq;
use fs_kernel::neq::{check_neq, check_subproof, eq_proof, from_neq, invert, sz, to_neq, transform, SubProof, Tag};
use fs_kernel::parse::{parse_skeleton, parse_term, parse_type};
use fs_kernel::reduce::{cbv_step, cbv_trace, preserve, preserve_trace};
use fs_kernel::syntax::{Term, Type};
use fs_kernel::systemf::{check_system_f, erase_evars, one_step_instance};
use fs_kernel::typing::check_skeleton;

fn ty(s: &str) -> Type {
    parse_type(s).unwrap()
}

const ID: &str = "all a. (a -> a)";

fn applied_self() -> fs_kernel::syntax::Skeleton {
    parse_skeleton(&format!("(\\x. (x<x: {ID}> |> ({ID}) -> {ID}) @ x<x: {ID}>) @ all a. (\\y. y<y: a>)")).unwrap()
}

#[test]
fn call_by_value() {
    let m = parse_term("(\\x. x @ x) @ (\\y. y)").unwrap();
    let n = cbv_step(&m).unwrap();
    assert_eq!(n.to_string(), "(\\y. y) @ (\\y. y)");
    assert_eq!(cbv_trace(&m, 10).len(), 3);
    // no reduction under a binder, and an application of a variable is stuck
    assert!(cbv_step(&parse_term("\\z. (\\y. y) @ z").unwrap()).is_none());
    assert!(cbv_step(&parse_term("u @ (\\y. y)").unwrap()).is_none());
    // the argument is evaluated first when it is not a value
    let m = parse_term("(\\x. x) @ ((\\y. y) @ (\\z. z))").unwrap();
    assert_eq!(cbv_step(&m).unwrap().to_string(), "(\\x. x) @ (\\z. z)");
}

#[test]
fn variables_are_values() {
    let m = parse_term("(\\x. \\y. x) @ y").unwrap();
    let n = cbv_step(&m).unwrap();
    // the bound y is renamed so the free one is not captured
    match &n {
        Term::Abs(b, body) => {
            assert_ne!(b, "y");
            assert_eq!(**body, Term::Var("y".into()));
        }
        other => panic!("{other}"),
    }
}

#[test]
fn subproofs() {
    let p = SubProof::Inst(ty(ID), ty("b"));
    let (l, r, tag) = check_subproof(&p).unwrap();
    assert_eq!((l.to_string(), r.to_string(), tag), (ID.to_string(), "b -> b".to_string(), Tag::Leq));
    assert!(invert(&p).is_none());
    let e = eq_proof(&ty("all a. all b. (a -> b)"), &ty("all b. all c. all a. (a -> b)")).unwrap();
    let (l, r, tag) = check_subproof(&e).unwrap();
    assert_eq!(tag, Tag::Eq);
    assert!(type_eq(&l, &r));
    let back = invert(&e).unwrap();
    assert_eq!(check_subproof(&back).unwrap().1, l);
    assert!(check_subproof(&SubProof::DummyIn(ty("a"), "a".into())).is_err());
}

#[test]
fn neq_round_trip_and_size() {
    let q = applied_self();
    let n = to_neq(&q).unwrap();
    let j = check_neq(&n).unwrap();
    let plain = check_skeleton(&q).unwrap();
    assert!(type_eq(&j.rtype, &plain.rtype));
    let back = from_neq(&n).unwrap();
    assert!(type_eq(&check_skeleton(&back).unwrap().rtype, &plain.rtype));
    let t = transform(&n);
    assert!(sz(&t) <= sz(&n));
    assert!(check_neq(&t).is_ok());
    let abs = to_neq(&parse_skeleton("\\y. y<y: a>").unwrap()).unwrap();
    assert_eq!(sz(&abs), 1);
}

#[test]
fn preservation_along_a_trace() {
    let q = applied_self();
    let steps = preserve_trace(&q, 10).unwrap();
    assert!(steps.len() >= 2);
    let first = check_skeleton(&q).unwrap();
    for s in &steps {
        let j = check_skeleton(s).unwrap();
        assert!(type_eq(&j.rtype, &first.rtype), "{}", j.rtype);
    }
    let last = steps.last().unwrap();
    assert!(cbv_step(&last.term()).is_none());
}

#[test]
fn discarded_argument_keeps_its_forbidden_set() {
    let q = parse_skeleton("(\\x. s^{a,b} y<x: a -> a, y: b>) @ \\z. z<z: a, y: b>").unwrap();
    let m2 = parse_term("y").unwrap();
    let r = preserve(&q, &m2).unwrap();
    assert_eq!(r.to_string(), "s^{a,b} y<y: b>");
    assert!(preserve(&q, &parse_term("z").unwrap()).is_err());
}

#[test]
fn system_f_forward() {
    let q = applied_self();
    let (env, t) = check_system_f(&erase_evars(&q)).unwrap();
    assert!(env.is_empty());
    assert!(type_eq(&t, &ty(ID)));
    assert!(one_step_instance(&ty(ID), &ty("b -> b")));
    assert!(!one_step_instance(&ty("b -> b"), &ty(ID)));
    let unsolved = parse_skeleton("x<x: b -> b> |> c -> c").unwrap();
    assert!(check_system_f(&unsolved).is_err());
}

#[test]
fn variable_argument_is_substituted() {
    let q = parse_skeleton(&format!("(\\x. (x<x: {ID}, y: {ID}> |> ({ID}) -> {ID}) @ y<x: {ID}, y: {ID}>) @ y<y: {ID}>")).unwrap();
    let steps = preserve_trace(&q, 5).unwrap();
    assert_eq!(steps.len(), 2);
    assert_eq!(steps[1].term().to_string(), "y @ y");
    assert!(type_eq(&check_skeleton(&steps[1]).unwrap().rtype, &ty(ID)));
}
