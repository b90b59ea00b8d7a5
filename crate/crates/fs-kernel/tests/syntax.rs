use fs_kernel::canon::{alpha_eq, canonical_type, type_eq};
use fs_kernel::parse::{parse_constraint, parse_expansion, parse_skeleton, parse_subst, parse_term, parse_type};
use fs_kernel::syntax::{arrow, evar_ty, forall, set, tv, Ftv, Type};

fn ty(s: &str) -> Type {
    parse_type(s).unwrap()
}

#[test]
fn arrow_is_right_associative() {
    assert_eq!(ty("a -> b -> c"), arrow(tv("a"), arrow(tv("b"), tv("c"))));
    assert_eq!(ty("(a -> b) -> c"), arrow(arrow(tv("a"), tv("b")), tv("c")));
}

#[test]
fn quantifier_binds_tighter_than_arrow() {
    assert_eq!(ty("all a. a -> a"), arrow(forall("a", tv("a")), tv("a")));
    assert_eq!(ty("all a. (a -> a)"), forall("a", arrow(tv("a"), tv("a"))));
}

#[test]
fn evar_binds_tightest() {
    assert_eq!(ty("s^{a} a -> b"), arrow(evar_ty("s", &["a"], tv("a")), tv("b")));
    assert_eq!(ty("s^{a,b}(a -> b)"), evar_ty("s", &["a", "b"], arrow(tv("a"), tv("b"))));
}

#[test]
fn types_round_trip() {
    for s in [
        "a",
        "a -> b -> c",
        "(a -> b) -> c",
        "all a. (a -> a)",
        "(all a. a) -> b",
        "s^{a}((a -> b) -> b)",
        "s^{} all b. (a -> b)",
        "all a. all b. (s^{a} b -> a)",
    ] {
        let t = ty(s);
        assert_eq!(t.to_string(), s);
        assert_eq!(ty(&t.to_string()), t);
    }
}

#[test]
fn other_categories_round_trip() {
    let m = parse_term("\\x. x @ x").unwrap();
    assert_eq!(parse_term(&m.to_string()).unwrap(), m);

    let q = parse_skeleton("s3^{}(\\x. s2^{a0}((s0^{a0} x<x: a0> |> (s1^{a0} a0 -> a1)) @ s1^{a0} x<x: a0>))").unwrap();
    assert_eq!(parse_skeleton(&q.to_string()).unwrap(), q);

    let e = parse_expansion("s^{a}(all b. id |> (b -> b))").unwrap();
    assert_eq!(parse_expansion(&e.to_string()).unwrap(), e);

    let phi = parse_subst("[a := a1 -> a2, s := all b. id]").unwrap();
    assert_eq!(parse_subst(&phi.to_string()).unwrap(), phi);

    let c = parse_constraint("ex b. (s^{a; a} omega & a <= b -> b)").unwrap();
    assert_eq!(parse_constraint(&c.to_string()).unwrap(), c);
}

#[test]
fn parse_errors_carry_a_position() {
    let e = parse_type("a -> ").unwrap_err();
    assert_eq!(e.line, 1);
    assert!(parse_type("all . a").is_err());
    assert!(parse_term("\\x x").is_err());
}

#[test]
fn ftv_counts_forbidden_sets() {
    assert_eq!(ty("s^{a}((a -> b) -> b)").ftv(), set(&["a", "b"]));
    assert!(ty("all a. a").ftv().is_empty());
    assert_eq!(parse_expansion("all a. id").unwrap().ftv(), set(&["a"]));
}

#[test]
fn dummy_quantifiers_and_reordering() {
    assert!(type_eq(&ty("all a. b"), &ty("b")));
    assert!(type_eq(&ty("all a. all b. (a -> b)"), &ty("all b. all a. (a -> b)")));
    assert!(!type_eq(&ty("all a. (a -> a)"), &ty("all a. (a -> b)")));
    assert!(alpha_eq(&ty("all a. (a -> a)"), &ty("all c. (c -> c)")));
    assert!(!alpha_eq(&ty("all a. b"), &ty("b")));
    assert_eq!(canonical_type(&ty("all c. all a. b")), ty("b"));
}
