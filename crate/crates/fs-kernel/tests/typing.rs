use fs_kernel::canon::{constraint_eq, type_eq};
use fs_kernel::parse::{parse_constraint, parse_skeleton, parse_type};
use fs_kernel::typing::{check_skeleton, relevant, rtype, tenv, TypeError};

fn check(s: &str) -> Result<fs_kernel::syntax::Judgement, TypeError> {
    check_skeleton(&parse_skeleton(s).unwrap())
}

#[test]
fn self_application() {
    let j = check("\\x. (x<x: all a. a> |> (all a. a) -> b) @ x<x: all a. a>").unwrap();
    assert!(j.env.is_empty());
    assert!(type_eq(&j.rtype, &parse_type("(all a. a) -> b").unwrap()));
    let c = parse_constraint("all a. a <= (all a. a) -> b").unwrap();
    assert!(constraint_eq(&j.constraint, &c));
    assert_eq!(j.term.to_string(), "\\x. x @ x");
}

#[test]
fn evar_node_wraps_type_and_constraint() {
    let j = check("s^{a} y<y: a>").unwrap();
    assert_eq!(j.rtype.to_string(), "s^{a} a");
    assert_eq!(j.constraint.to_string(), "s^{a; a} omega");
}

#[test]
fn forbidden_set_must_cover_environment() {
    match check("s^{} y<y: a>") {
        Err(TypeError::ForbiddenSetTooSmall { missing, .. }) => assert_eq!(missing, "a"),
        other => panic!("{other:?}"),
    }
}

#[test]
fn forall_binder_must_not_escape() {
    assert!(matches!(check("all a. y<y: a>"), Err(TypeError::EscapingVariable { .. })));
    let j = check("all a. (\\y. y<y: a>)").unwrap();
    assert_eq!(j.rtype.to_string(), "all a. (a -> a)");
    assert_eq!(j.constraint.to_string(), "ex a. omega");
}

#[test]
fn application_errors() {
    assert!(matches!(check("x<x: a> @ x<x: a>"), Err(TypeError::NotAnArrow { .. })));
    assert!(matches!(
        check("x<x: a -> a, y: b> @ y<x: a -> a, y: b>"),
        Err(TypeError::DomainMismatch { .. })
    ));
    assert!(matches!(check("x<x: a -> a> @ y<y: a>"), Err(TypeError::EnvMismatch { .. })));
}

#[test]
fn environment_errors() {
    assert!(matches!(check("x<y: a>"), Err(TypeError::UnboundVariable { .. })));
    assert!(matches!(check("x<x: a, x: b>"), Err(TypeError::MalformedEnv { .. })));
    assert!(matches!(check("x<x: a> + {x: b}"), Err(TypeError::SupportOverlap { .. })));
    let j = check("x<x: a> + {y: b}").unwrap();
    assert_eq!(j.env.to_string(), "{x: a, y: b}");
}

#[test]
fn subtyping_adds_an_atom() {
    let j = check("x<x: all a. (a -> a)> |> b -> b").unwrap();
    assert_eq!(j.rtype.to_string(), "b -> b");
    assert_eq!(j.constraint.to_string(), "omega & all a. (a -> a) <= b -> b");
}

#[test]
fn accessors_and_relevance() {
    let q = parse_skeleton("\\x. x<x: a, y: b>").unwrap();
    assert_eq!(rtype(&q).unwrap().to_string(), "a -> a");
    assert_eq!(tenv(&q).unwrap().to_string(), "{y: b}");
    assert!(!relevant(&q).unwrap());
    assert!(relevant(&parse_skeleton("\\x. x<x: a>").unwrap()).unwrap());
}
