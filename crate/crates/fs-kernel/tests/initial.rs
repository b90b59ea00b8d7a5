use fs_kernel::expand::subst_skel;
use fs_kernel::initial::{allvar, derive_substitution, initial_skeleton, reflexive, rename_equiv, DeriveError};
use fs_kernel::parse::{parse_constraint, parse_skeleton, parse_subst, parse_term};
use fs_kernel::syntax::FreshSupply;
use fs_kernel::typing::{check_skeleton, relevant};

#[test]
fn self_application_numbering() {
    let m = parse_term("\\x. x @ x").unwrap();
    let (q, env, _) = initial_skeleton(&m, FreshSupply::new());
    assert!(env.is_empty());
    assert_eq!(
        q.to_string(),
        "s3^{}(\\x. s2^{a0}((s0^{a0} x<x: a0> |> (s1^{a0} a0 -> a1)) @ s1^{a0} x<x: a0>))"
    );
    assert!(relevant(&q).unwrap());
}

#[test]
fn free_variables_get_environment_entries() {
    let m = parse_term("\\x. x @ y").unwrap();
    let (q, env, _) = initial_skeleton(&m, FreshSupply::new());
    assert_eq!(env.support().len(), 1);
    let j = check_skeleton(&q).unwrap();
    assert_eq!(j.env.len(), 1);
    assert!(allvar(&q).len() > 3);
}

#[test]
fn renamings_both_ways() {
    let m = parse_term("(\\z. u) @ (\\x. \\y. x @ u @ u)").unwrap();
    let (q1, _, _) = initial_skeleton(&m, FreshSupply::new());
    let other = FreshSupply { next_tvar: 7, next_evar: 3, ..FreshSupply::with_prefixes("b", "e") };
    let (q2, _, _) = initial_skeleton(&m, other);
    let f = rename_equiv(&q1, &q2).expect("q2 renames to q1");
    assert_eq!(subst_skel(&f, &q2), q1);
    let g = rename_equiv(&q2, &q1).expect("q1 renames to q2");
    assert_eq!(subst_skel(&g, &q1), q2);
}

#[test]
fn different_terms_are_not_renamings() {
    let (q1, _, _) = initial_skeleton(&parse_term("\\x. x").unwrap(), FreshSupply::new());
    let (q2, _, _) = initial_skeleton(&parse_term("\\y. y").unwrap(), FreshSupply::new());
    assert!(rename_equiv(&q1, &q2).is_none());
}

#[test]
fn reflexive_atoms() {
    assert!(reflexive(&parse_constraint("a -> b <= a -> b").unwrap()));
    assert!(reflexive(&parse_constraint("ex c. (omega & all d. a <= a)").unwrap()));
    assert!(!reflexive(&parse_constraint("all a. a <= b").unwrap()));
}

#[test]
fn derive_from_example_substitution() {
    let m = parse_term("\\x. x @ x").unwrap();
    let (init, _, _) = initial_skeleton(&m, FreshSupply::new());
    let t = "all a. (a -> a)";
    let sigma = parse_subst(&format!(
        "[a0 := {t}, a1 := {t}, s0 := id, s1 := id, s2 := id |> (b -> b), s3 := all b. id]"
    ))
    .unwrap();
    let target = subst_skel(&sigma, &init);
    let (phi, extra) = derive_substitution(&init, &target).unwrap();
    assert!(extra.is_empty());
    let got = check_skeleton(&subst_skel(&phi, &init)).unwrap();
    let want = check_skeleton(&target).unwrap();
    assert!(fs_kernel::canon::type_eq(&got.rtype, &want.rtype));
}

#[test]
fn derive_rejects_foreign_targets() {
    let (init, _, _) = initial_skeleton(&parse_term("\\x. x").unwrap(), FreshSupply::new());
    let other = parse_skeleton("\\y. y<y: a>").unwrap();
    assert!(matches!(derive_substitution(&init, &other), Err(DeriveError::TermMismatch(..))));
}
