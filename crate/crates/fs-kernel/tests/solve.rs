use fs_kernel::parse::{parse_constraint, parse_type};
use fs_kernel::solve::{leq_f, leq_f_witness, relation, solved, Witness, EQ, F};

fn leq(a: &str, b: &str) -> bool {
    leq_f(&parse_type(a).unwrap(), &parse_type(b).unwrap())
}

#[test]
fn one_step_elimination() {
    assert!(leq("all a. (a -> a)", "b -> b"));
    assert!(leq("all a. (a -> a)", "(all c. c) -> all c. c"));
    assert!(leq("all a. all b. (a -> b)", "all b. (c -> b)"));
    // two eliminations at once are not one step
    assert!(!leq("all a. all b. (a -> b)", "c -> d"));
    assert!(!leq("a -> a", "all a. (a -> a)"));
    assert!(!leq("all a. (a -> a)", "b -> c"));
}

#[test]
fn dummy_quantifiers_are_equal() {
    assert!(leq("b", "all a. b"));
    assert!(leq("all a. b", "b"));
    assert_eq!(leq_f_witness(&parse_type("a -> a").unwrap(), &parse_type("a -> a").unwrap()), Some(Witness::Eq));
}

#[test]
fn capture_is_rejected() {
    // instantiating with a type mentioning the remaining binder is capture
    assert!(!leq("all a. all b. (a -> b)", "all b. (b -> b)"));
}

#[test]
fn witness_reports_the_argument() {
    match leq_f_witness(&parse_type("all a. (a -> a)").unwrap(), &parse_type("c -> c").unwrap()) {
        Some(Witness::Inst { arg, .. }) => assert_eq!(arg.to_string(), "c"),
        other => panic!("{other:?}"),
    }
}

#[test]
fn solvedness_ignores_guards_and_binders() {
    let c = parse_constraint("ex b. s^{a; a}(omega & all a. (a -> a) <= b -> b)").unwrap();
    assert!(solved(&c, F));
    assert!(!solved(&c, EQ));
    let c = parse_constraint("a <= all c. a").unwrap();
    assert!(solved(&c, EQ));
    assert_eq!(relation("EQ").unwrap().name, "EQ");
    assert!(relation("G").is_none());
}
