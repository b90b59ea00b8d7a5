use std::io::Write;
use std::process::{Command, Stdio};

use fs_kernel::parse::{parse_constraint, parse_env, parse_skeleton, parse_term, parse_type};
use fs_kernel::typing::check_skeleton;

struct Out {
    code: i32,
    stdout: String,
    stderr: String,
}

fn fsys(args: &[&str], stdin: &str) -> Out {
    let mut child = Command::new(env!("CARGO_BIN_EXE_fsys"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(stdin.as_bytes()).unwrap();
    let o = child.wait_with_output().unwrap();
    Out {
        code: o.status.code().unwrap(),
        stdout: String::from_utf8(o.stdout).unwrap(),
        stderr: String::from_utf8(o.stderr).unwrap(),
    }
}

fn field<'a>(out: &'a str, key: &str) -> &'a str {
    let prefix = format!("{key}: ");
    out.lines().find_map(|l| l.strip_prefix(prefix.as_str())).unwrap_or_else(|| panic!("no {key} in\n{out}"))
}

const SELF_APP: &str = "\\x. (x<x: all a. a> |> (all a. a) -> b) @ x<x: all a. a>";
const EXAMPLE1: &str = "s^{a}(\\x. (x<x: a -> b, y: a> |> a -> b) @ y<x: a -> b, y: a>)";

#[test]
fn check_prints_the_judgement() {
    let o = fsys(&["check", "-"], SELF_APP);
    assert_eq!(o.code, 0);
    assert_eq!(
        o.stdout,
        "term: \\x. x @ x\nenv: {}\ntype: (all a. a) -> b\nconstraint: all a. a <= (all a. a) -> b\n"
    );
}

#[test]
fn check_solved_exit_codes() {
    let o = fsys(&["check", "--solved", "-"], SELF_APP);
    assert_eq!(o.code, 0);
    assert!(o.stdout.ends_with("solved (F): yes\n"));
    let o = fsys(&["check", "--solved", "--rel", "EQ", "-"], SELF_APP);
    assert_eq!(o.code, 3);
    assert!(o.stdout.ends_with("solved (EQ): no\n"));
    let o = fsys(&["check", "--solved", "-"], "x<x: a>");
    assert_eq!((o.code, field(&o.stdout, "constraint")), (0, "omega"));
}

#[test]
fn invalid_input_exits_2() {
    let o = fsys(&["check", "-"], "x<x: a, x: b>");
    assert_eq!(o.code, 2);
    assert!(o.stderr.contains("twice"), "{}", o.stderr);
    let o = fsys(&["check", "-"], "x<x: a");
    assert_eq!(o.code, 2);
    assert!(o.stderr.contains("-:1:"), "{}", o.stderr);
}

#[test]
fn initial_numbering_is_fixed() {
    let o = fsys(&["initial", "--format", "raw", "-"], "\\x. x @ x");
    assert_eq!(o.code, 0);
    assert_eq!(
        field(&o.stdout, "skeleton"),
        "s3^{}(\\x. s2^{a0}((s0^{a0} x<x: a0> |> (s1^{a0} a0 -> a1)) @ s1^{a0} x<x: a0>))"
    );
    assert_eq!(
        field(&o.stdout, "constraint"),
        "s3^{; a0 -> s2^{a0} a1} s2^{a0; a1}(s0^{a0; a0} omega & s0^{a0} a0 <= s1^{a0} a0 -> a1 & s1^{a0; a0} omega)"
    );
    let o = fsys(&["initial", "-"], "\\x. y");
    let q = parse_skeleton(field(&o.stdout, "skeleton")).unwrap();
    let j = check_skeleton(&q).unwrap();
    assert_eq!(j.env.len(), 1);
    assert_eq!(field(&o.stdout, "term"), "\\x. y");
}

#[test]
fn subst_and_expand() {
    let o = fsys(&["subst", "-", "[a := a1 -> a2]"], EXAMPLE1);
    assert_eq!(o.code, 0);
    assert_eq!(field(&o.stdout, "env"), "{y: a1 -> a2}");
    assert_eq!(field(&o.stdout, "type"), "s^{a1,a2}(((a1 -> a2) -> b) -> b)");

    let same = fsys(&["check", "-"], EXAMPLE1);
    let o = fsys(&["expand", "-", "id", "{a}"], EXAMPLE1);
    assert_eq!(o.code, 0);
    assert!(o.stdout.ends_with(&same.stdout));

    let o = fsys(&["expand", "-", "all b. id", "{}"], EXAMPLE1);
    assert_eq!(o.code, 2);
}

#[test]
fn solve_reads_a_constraint() {
    let o = fsys(&["solve", "-"], "all a. (a -> a) <= b -> b & omega");
    assert_eq!(o.code, 0);
    let o = fsys(&["solve", "-"], "all a. (a -> a) <= b -> c");
    assert_eq!(o.code, 3);
}

#[test]
fn reduce_discarded_argument() {
    let o = fsys(&["reduce", "-"], "(\\x. s^{a,b} y<x: a -> a, y: b>) @ \\z. z<z: a, y: b>");
    assert_eq!(o.code, 0, "{}", o.stderr);
    let last = o.stdout.split("step ").last().unwrap();
    assert!(last.contains("term: y\n"));
    assert_eq!(o.stdout.matches("solved (F): yes").count(), 2);
    let o = fsys(&["reduce", "-"], "(\\x. (x<x: b -> b> |> c -> c) @ x<x: b -> b>) @ \\y. y<y: b>");
    assert_ne!(o.code, 0);
}

#[test]
fn erase_and_tree() {
    let o = fsys(&["erase-f", "-"], "s^{}(\\y. y<y: a>)");
    assert_eq!(o.code, 0);
    assert_eq!(field(&o.stdout, "type"), "a -> a");
    let o = fsys(&["erase-f", "-"], "x<x: b -> b> |> c -> c");
    assert_eq!(o.code, 2);

    let o = fsys(&["tree", "-"], SELF_APP);
    let lines: Vec<&str> = o.stdout.lines().collect();
    assert_eq!(lines.len(), 5);
    assert!(lines[0].starts_with("[abs] {} |- \\x. x @ x"));
    assert!(lines[2].starts_with("    [sub]"));
    let o = fsys(&["tree", "--dot", "-"], SELF_APP);
    assert!(o.stdout.starts_with("digraph derivation {"));
    assert_eq!(o.stdout.matches(" -> n").count(), 4);
}

#[test]
fn output_reparses_and_is_deterministic() {
    for args in [&["check", "-"][..], &["subst", "-", "[s := all b. id]"], &["expand", "-", "r^{} all b. id", "{a}"]] {
        let o = fsys(args, EXAMPLE1);
        assert_eq!(o.code, 0);
        assert_eq!(o.stdout, fsys(args, EXAMPLE1).stdout);
        parse_term(field(&o.stdout, "term")).unwrap();
        parse_env(field(&o.stdout, "env")).unwrap();
        parse_type(field(&o.stdout, "type")).unwrap();
        parse_constraint(field(&o.stdout, "constraint")).unwrap();
        if let Some(q) = o.stdout.lines().find_map(|l| l.strip_prefix("skeleton: ")) {
            let again = fsys(&["check", "-"], q);
            assert_eq!(again.code, 0);
            assert_eq!(field(&again.stdout, "type"), field(&o.stdout, "type"));
        }
    }
}
