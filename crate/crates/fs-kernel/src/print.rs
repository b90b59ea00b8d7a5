//! ASCII surface syntax. Everything printed here parses back with `parse`.

use std::fmt::{self, Display, Formatter, Write};

use crate::syntax::{Binding, Constraint, Expansion, Skeleton, Substitution, Term, Type, TypeEnv, VarSet};

fn set(out: &mut String, s: &VarSet) {
    out.push('{');
    for (i, a) in s.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push_str(a);
    }
    out.push('}');
}

// Prefix forms take their body at prefix level. A parenthesised body is
// glued to the prefix, anything else gets a space.
fn glue(out: &mut String, body: String) {
    if !body.starts_with('(') {
        out.push(' ');
    }
    out.push_str(&body);
}

fn paren(s: String, yes: bool) -> String {
    if yes {
        format!("({s})")
    } else {
        s
    }
}

// ------------------------------------------------------------------- terms

fn term(t: &Term, ctx: u8) -> String {
    match t {
        Term::Var(x) => x.clone(),
        Term::Abs(x, b) => paren(format!("\\{x}. {}", term(b, 0)), ctx > 0),
        Term::App(f, a) => paren(format!("{} @ {}", term(f, 1), term(a, 2)), ctx > 1),
    }
}

// ------------------------------------------------------------------- types

// 0: arrow level, 1: prefix level (arrow domain, quantifier body).
fn typ(t: &Type, ctx: u8) -> String {
    match t {
        Type::Var(a) => a.clone(),
        Type::Arrow(d, c) => {
            let dom = match **d {
                Type::Forall(..) => format!("({})", typ(d, 0)),
                _ => typ(d, 1),
            };
            paren(format!("{dom} -> {}", typ(c, 0)), ctx > 0)
        }
        Type::Forall(a, b) => format!("all {a}. {}", typ(b, 1)),
        Type::EVar(s, delta, b) => {
            let mut out = format!("{s}^");
            set(&mut out, delta);
            glue(&mut out, typ(b, 1));
            out
        }
    }
}

/// A type in a position followed by more syntax (after `|>`, in guards).
fn typ_closed(t: &Type) -> String {
    typ(t, 1)
}

// -------------------------------------------------------------- expansions

fn expansion(i: &Expansion, ctx: u8) -> String {
    match i {
        Expansion::Id => "id".to_string(),
        Expansion::Forall(a, r) => format!("all {a}. {}", expansion(r, 1)),
        Expansion::EVar(s, delta, r) => {
            let mut out = format!("{s}^");
            set(&mut out, delta);
            glue(&mut out, expansion(r, 1));
            out
        }
        Expansion::Sub(r, t) => paren(format!("{} |> {}", expansion(r, 0), typ_closed(t)), ctx > 0),
    }
}

// ------------------------------------------------------------- constraints

fn constraint(c: &Constraint, ctx: u8) -> String {
    match c {
        Constraint::Omega => "omega".to_string(),
        Constraint::Atom(t1, t2) => format!("{} <= {}", typ(t1, 0), typ(t2, 0)),
        Constraint::And(c1, c2) => paren(format!("{} & {}", constraint(c1, 0), constraint(c2, 1)), ctx > 0),
        Constraint::Exists(a, b) => format!("ex {a}. {}", constraint(b, 1)),
        Constraint::Guard(s, delta, t, b) => {
            let mut out = format!("{s}^{{");
            for (i, a) in delta.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(a);
            }
            let _ = write!(out, "; {}}}", typ(t, 0));
            glue(&mut out, constraint(b, 1));
            out
        }
    }
}

fn env_body(env: &TypeEnv) -> String {
    env.iter()
        .map(|(x, t)| format!("{x}: {}", typ(t, 0)))
        .collect::<Vec<_>>()
        .join(", ")
}

// --------------------------------------------------------------- skeletons

// 0: abstraction, 1: application, 2: postfix, 3: prefix.
fn skel(q: &Skeleton, ctx: u8) -> String {
    match q {
        Skeleton::Var(x, env) => format!("{x}<{}>", env_body(env)),
        Skeleton::Abs(x, b) => paren(format!("\\{x}. {}", skel(b, 0)), ctx > 0),
        Skeleton::App(f, a) => {
            let fun = match **f {
                Skeleton::Sub(..) | Skeleton::Weak(..) => format!("({})", skel(f, 0)),
                _ => skel(f, 1),
            };
            paren(format!("{fun} @ {}", skel(a, 3)), ctx > 1)
        }
        Skeleton::Forall(a, b) => format!("all {a}. {}", skel(b, 3)),
        Skeleton::EVar(s, delta, b) => {
            let mut out = format!("{s}^");
            set(&mut out, delta);
            glue(&mut out, skel(b, 3));
            out
        }
        Skeleton::Sub(b, t) => paren(format!("{} |> {}", skel(b, 2), typ_closed(t)), ctx > 2),
        Skeleton::Weak(b, env) => paren(format!("{} + {{{}}}", skel(b, 2), env_body(env)), ctx > 2),
    }
}

impl Display for Term {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        f.write_str(&term(self, 0))
    }
}

impl Display for Type {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        f.write_str(&typ(self, 0))
    }
}

impl Display for Expansion {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        f.write_str(&expansion(self, 0))
    }
}

impl Display for Constraint {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        f.write_str(&constraint(self, 0))
    }
}

impl Display for TypeEnv {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", env_body(self))
    }
}

impl Display for Skeleton {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        f.write_str(&skel(self, 0))
    }
}

impl Display for Substitution {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        let items: Vec<String> = self
            .0
            .iter()
            .map(|b| match b {
                Binding::Type(a, t) => format!("{a} := {}", typ(t, 0)),
                Binding::Exp(s, i) => format!("{s} := {}", expansion(i, 0)),
            })
            .collect();
        write!(f, "[{}]", items.join(", "))
    }
}

pub fn print_set(s: &VarSet) -> String {
    let mut out = String::new();
    set(&mut out, s);
    out
}
