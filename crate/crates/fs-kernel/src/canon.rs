//! Normal forms for the equality theories on types and constraints.
//!
//! Types are equal up to α-conversion, reordering of adjacent quantifiers and
//! removal of dummy quantifiers. The canonical form drops dummies, orders each
//! quantifier block by occurrence position in the (already canonical) body and
//! names binders `_0, _1, ...` by nesting level, skipping names that occur
//! free in the input.

use std::collections::BTreeSet;

use crate::syntax::{Constraint, Ftv, Name, Type, VarSet};

// ------------------------------------------------------------------- types

/// Rename free occurrences of `from` to `to`. `to` must not be bound inside
/// `t`, which holds for every fresh name used in this crate.
pub fn rename_free(t: &Type, from: &str, to: &str) -> Type {
    match t {
        Type::Var(a) if a == from => Type::Var(to.to_string()),
        Type::Var(_) => t.clone(),
        Type::Arrow(d, c) => Type::Arrow(
            Box::new(rename_free(d, from, to)),
            Box::new(rename_free(c, from, to)),
        ),
        Type::Forall(a, _) if a == from => t.clone(),
        Type::Forall(a, b) => Type::Forall(a.clone(), Box::new(rename_free(b, from, to))),
        Type::EVar(s, delta, b) => Type::EVar(
            s.clone(),
            rename_set(delta, from, to),
            Box::new(rename_free(b, from, to)),
        ),
    }
}

pub fn rename_set(delta: &VarSet, from: &str, to: &str) -> VarSet {
    delta
        .iter()
        .map(|a| if a == from { to.to_string() } else { a.clone() })
        .collect()
}

/// Give every binder a distinct internal name, numbered in traversal order.
fn uniquify(t: &Type, ctr: &mut usize) -> Type {
    match t {
        Type::Var(_) => t.clone(),
        Type::Arrow(d, c) => {
            let d = uniquify(d, ctr);
            Type::Arrow(Box::new(d), Box::new(uniquify(c, ctr)))
        }
        Type::Forall(a, b) => {
            let n = format!("%{}", *ctr);
            *ctr += 1;
            let b = rename_free(b, a, &n);
            Type::Forall(n, Box::new(uniquify(&b, ctr)))
        }
        Type::EVar(s, delta, b) => Type::EVar(s.clone(), delta.clone(), Box::new(uniquify(b, ctr))),
    }
}

/// Leading quantifier block and the body under it.
pub fn peel_foralls(t: &Type) -> (Vec<Name>, &Type) {
    let mut binders = Vec::new();
    let mut cur = t;
    while let Type::Forall(a, b) = cur {
        binders.push(a.clone());
        cur = b;
    }
    (binders, cur)
}

pub fn wrap_foralls(binders: &[Name], body: Type) -> Type {
    binders
        .iter()
        .rev()
        .fold(body, |acc, a| Type::Forall(a.clone(), Box::new(acc)))
}

struct LevelNames {
    names: Vec<Name>,
    next: usize,
    avoid: VarSet,
}

impl LevelNames {
    fn new(avoid: VarSet) -> LevelNames {
        LevelNames { names: Vec::new(), next: 0, avoid }
    }

    fn get(&mut self, level: usize) -> Name {
        while self.names.len() <= level {
            let n = format!("_{}", self.next);
            self.next += 1;
            if !self.avoid.contains(&n) {
                self.names.push(n);
            }
        }
        self.names[level].clone()
    }
}

fn occurrence_paths(t: &Type, var: &str, path: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
    match t {
        Type::Var(a) => {
            if a == var {
                out.push(path.clone());
            }
        }
        Type::Arrow(d, c) => {
            path.push(0);
            occurrence_paths(d, var, path, out);
            path.pop();
            path.push(1);
            occurrence_paths(c, var, path, out);
            path.pop();
        }
        Type::Forall(a, b) => {
            if a != var {
                path.push(0);
                occurrence_paths(b, var, path, out);
                path.pop();
            }
        }
        Type::EVar(_, delta, b) => {
            if delta.contains(var) {
                path.push(0);
                out.push(path.clone());
                path.pop();
            }
            path.push(1);
            occurrence_paths(b, var, path, out);
            path.pop();
        }
    }
}

/// Order the binders of a block by where they occur in `body`. Binders with
/// identical occurrence sets only appear inside forbidden sets and are
/// interchangeable, so any tie-break gives the same result.
pub fn block_order(binders: &[Name], body: &Type) -> Vec<Name> {
    let mut keyed: Vec<(Vec<Vec<u8>>, Name)> = binders
        .iter()
        .map(|b| {
            let mut out = Vec::new();
            occurrence_paths(body, b, &mut Vec::new(), &mut out);
            (out, b.clone())
        })
        .collect();
    keyed.sort_by(|x, y| x.0.cmp(&y.0));
    keyed.into_iter().map(|(_, b)| b).collect()
}

fn canon(t: &Type, level: usize, names: &mut LevelNames) -> Type {
    match t {
        Type::Var(_) => t.clone(),
        Type::Arrow(d, c) => Type::Arrow(
            Box::new(canon(d, level, names)),
            Box::new(canon(c, level, names)),
        ),
        Type::EVar(s, delta, b) => Type::EVar(s.clone(), delta.clone(), Box::new(canon(b, level, names))),
        Type::Forall(..) => {
            let (binders, body) = peel_foralls(t);
            let free = body.ftv();
            let kept: Vec<Name> = binders.into_iter().filter(|b| free.contains(b)).collect();
            let cbody = canon(body, level + kept.len(), names);
            let order = block_order(&kept, &cbody);
            let mut out = cbody;
            let mut fresh = Vec::with_capacity(order.len());
            for (i, b) in order.iter().enumerate() {
                let n = names.get(level + i);
                out = rename_free(&out, b, &n);
                fresh.push(n);
            }
            wrap_foralls(&fresh, out)
        }
    }
}

pub fn canonical_type(t: &Type) -> Type {
    let mut names = LevelNames::new(t.ftv());
    let u = uniquify(t, &mut 0);
    canon(&u, 0, &mut names)
}

pub fn type_eq(t1: &Type, t2: &Type) -> bool {
    t1 == t2 || canonical_type(t1) == canonical_type(t2)
}

/// Plain α-equivalence, without the quantifier equalities.
pub fn alpha_eq(t1: &Type, t2: &Type) -> bool {
    fn lookup<'a>(env: &[(&'a str, &'a str)], x: &'a str, left: bool) -> Result<usize, &'a str> {
        for (i, (a, b)) in env.iter().enumerate().rev() {
            let hit = if left { *a == x } else { *b == x };
            if hit {
                return Ok(i);
            }
        }
        Err(x)
    }
    fn set_image<'a>(env: &[(&'a str, &'a str)], s: &'a VarSet, left: bool) -> BTreeSet<Result<usize, &'a str>> {
        s.iter().map(|x| lookup(env, x, left)).collect()
    }
    fn go<'a>(t1: &'a Type, t2: &'a Type, env: &mut Vec<(&'a str, &'a str)>) -> bool {
        match (t1, t2) {
            (Type::Var(a), Type::Var(b)) => lookup(env, a, true) == lookup(env, b, false),
            (Type::Arrow(d1, c1), Type::Arrow(d2, c2)) => go(d1, d2, env) && go(c1, c2, env),
            (Type::Forall(a, b1), Type::Forall(b, b2)) => {
                env.push((a, b));
                let r = go(b1, b2, env);
                env.pop();
                r
            }
            (Type::EVar(s1, d1, b1), Type::EVar(s2, d2, b2)) => {
                s1 == s2 && set_image(env, d1, true) == set_image(env, d2, false) && go(b1, b2, env)
            }
            _ => false,
        }
    }
    t1 == t2 || go(t1, t2, &mut Vec::new())
}

// ------------------------------------------------------------- constraints

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Prefix {
    Ex(Name),
    Guard(Name, VarSet, Type),
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
struct PAtom {
    prefix: Vec<Prefix>,
    body: Option<(Type, Type)>,
}

fn flatten(c: &Constraint, prefix: &mut Vec<Prefix>, out: &mut Vec<PAtom>) {
    match c {
        Constraint::Omega => out.push(PAtom { prefix: prefix.clone(), body: None }),
        Constraint::Atom(t1, t2) => out.push(PAtom {
            prefix: prefix.clone(),
            body: Some((t1.clone(), t2.clone())),
        }),
        Constraint::And(c1, c2) => {
            flatten(c1, prefix, out);
            flatten(c2, prefix, out);
        }
        Constraint::Exists(a, b) => {
            prefix.push(Prefix::Ex(a.clone()));
            flatten(b, prefix, out);
            prefix.pop();
        }
        Constraint::Guard(s, delta, t, b) => {
            prefix.push(Prefix::Guard(s.clone(), delta.clone(), t.clone()));
            flatten(b, prefix, out);
            prefix.pop();
        }
    }
}

/// Free type variables of `prefix[from..]` applied to the atom body.
fn suffix_ftv(prefix: &[Prefix], body: &Option<(Type, Type)>) -> VarSet {
    let mut fv = VarSet::new();
    if let Some((t1, t2)) = body {
        t1.ftv_into(&mut fv);
        t2.ftv_into(&mut fv);
    }
    for p in prefix.iter().rev() {
        match p {
            Prefix::Ex(a) => {
                fv.remove(a);
            }
            Prefix::Guard(_, delta, t) => {
                fv.extend(delta.iter().cloned());
                t.ftv_into(&mut fv);
            }
        }
    }
    fv
}

fn drop_dummies(atom: &mut PAtom) {
    let mut i = atom.prefix.len();
    while i > 0 {
        i -= 1;
        if let Prefix::Ex(a) = &atom.prefix[i] {
            let fv = suffix_ftv(&atom.prefix[i + 1..], &atom.body);
            if !fv.contains(a) {
                atom.prefix.remove(i);
            }
        }
    }
}

fn rename_suffix(prefix: &mut [Prefix], body: &mut Option<(Type, Type)>, from: &str, to: &str) {
    for p in prefix.iter_mut() {
        match p {
            Prefix::Ex(a) if a == from => return,
            Prefix::Ex(_) => {}
            Prefix::Guard(_, delta, t) => {
                *delta = rename_set(delta, from, to);
                *t = rename_free(t, from, to);
            }
        }
    }
    if let Some((t1, t2)) = body {
        *t1 = rename_free(t1, from, to);
        *t2 = rename_free(t2, from, to);
    }
}

fn normalize_atom(mut atom: PAtom, avoid: &VarSet) -> PAtom {
    drop_dummies(&mut atom);
    // Existential binders get positional names. Binders of the types inside
    // use the `_k` family, so the two cannot clash.
    let mut k = 0usize;
    let mut next_name = || loop {
        let n = format!("_e{k}");
        k += 1;
        if !avoid.contains(&n) {
            return n;
        }
    };
    for i in 0..atom.prefix.len() {
        if let Prefix::Ex(a) = atom.prefix[i].clone() {
            let n = next_name();
            let (head, tail) = atom.prefix.split_at_mut(i + 1);
            rename_suffix(tail, &mut atom.body, &a, &format!("#{n}"));
            head[i] = Prefix::Ex(format!("#{n}"));
        }
    }
    // Strip the temporary marker used to keep the renaming capture-free.
    for p in atom.prefix.iter_mut() {
        match p {
            Prefix::Ex(a) => *a = a.trim_start_matches('#').to_string(),
            Prefix::Guard(_, delta, t) => {
                *delta = delta.iter().map(|x| x.trim_start_matches('#').to_string()).collect();
                *t = canonical_type(&unmark(t));
            }
        }
    }
    if let Some((t1, t2)) = &mut atom.body {
        *t1 = canonical_type(&unmark(t1));
        *t2 = canonical_type(&unmark(t2));
    }
    atom
}

fn unmark(t: &Type) -> Type {
    match t {
        Type::Var(a) => Type::Var(a.trim_start_matches('#').to_string()),
        Type::Arrow(d, c) => Type::Arrow(Box::new(unmark(d)), Box::new(unmark(c))),
        Type::Forall(a, b) => Type::Forall(a.clone(), Box::new(unmark(b))),
        Type::EVar(s, delta, b) => Type::EVar(
            s.clone(),
            delta.iter().map(|x| x.trim_start_matches('#').to_string()).collect(),
            Box::new(unmark(b)),
        ),
    }
}

fn rebuild(atom: &PAtom) -> Constraint {
    let mut c = match &atom.body {
        None => Constraint::Omega,
        Some((t1, t2)) => Constraint::Atom(t1.clone(), t2.clone()),
    };
    for p in atom.prefix.iter().rev() {
        c = match p {
            Prefix::Ex(a) => Constraint::Exists(a.clone(), Box::new(c)),
            Prefix::Guard(s, delta, t) => Constraint::Guard(s.clone(), delta.clone(), t.clone(), Box::new(c)),
        };
    }
    c
}

fn normalized_atoms(c: &Constraint) -> Vec<PAtom> {
    let avoid = c.ftv();
    let mut raw = Vec::new();
    flatten(c, &mut Vec::new(), &mut raw);
    let mut atoms: Vec<PAtom> = raw.into_iter().map(|a| normalize_atom(a, &avoid)).collect();
    atoms.retain(|a| !(a.prefix.is_empty() && a.body.is_none()));
    atoms.sort();
    atoms.dedup();
    // A guarded ω is absorbed by any other atom living under the same prefix,
    // since P(C) = P(C ∧ ω) = P(C) ∧ P(ω).
    let absorbed: Vec<bool> = atoms
        .iter()
        .enumerate()
        .map(|(i, a)| {
            a.body.is_none()
                && atoms.iter().enumerate().any(|(j, b)| {
                    if i == j || b.prefix.len() < a.prefix.len() {
                        return false;
                    }
                    (0..=b.prefix.len()).any(|l| {
                        if l == b.prefix.len() && b.body.is_none() && b.prefix.len() == a.prefix.len() {
                            return false;
                        }
                        let cut = normalize_atom(PAtom { prefix: b.prefix[..l].to_vec(), body: None }, &avoid);
                        cut.prefix == a.prefix
                    })
                })
        })
        .collect();
    atoms
        .into_iter()
        .zip(absorbed)
        .filter(|(_, gone)| !gone)
        .map(|(a, _)| a)
        .collect()
}

/// The prefixed atoms of the canonical form, each as a constraint.
pub fn canonical_atoms(c: &Constraint) -> Vec<Constraint> {
    normalized_atoms(c).iter().map(rebuild).collect()
}

pub fn canonical_constraint(c: &Constraint) -> Constraint {
    let atoms = canonical_atoms(c);
    let mut it = atoms.into_iter();
    match it.next() {
        None => Constraint::Omega,
        Some(first) => it.fold(first, Constraint::and),
    }
}

pub fn constraint_eq(c1: &Constraint, c2: &Constraint) -> bool {
    c1 == c2 || canonical_constraint(c1) == canonical_constraint(c2)
}
