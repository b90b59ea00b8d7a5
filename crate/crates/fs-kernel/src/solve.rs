//! Subtyping relations and the solved predicate.

use crate::canon::{canonical_type, peel_foralls, type_eq, wrap_foralls};
use crate::expand::subst_type;
use crate::syntax::{Constraint, Ftv, Name, Substitution, Type, VarSet};

/// How an atom `t1 ⋖ t2` holds under `≤F`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Witness {
    /// The two sides are equal (elimination of a dummy quantifier).
    Eq,
    /// `source = ∀a.τ1` equals the left side and `τ1[a := arg]` the right.
    Inst { source: Type, arg: Type },
}

#[derive(Default)]
struct Match {
    hole: Option<Type>,
    // Forbidden sets where the hole variable occurs: (target set, set of the
    // other members translated to target names).
    sets: Vec<(VarSet, VarSet)>,
}

fn lookup<'a>(env: &'a [(Name, Name)], x: &str, left: bool) -> Option<&'a (Name, Name)> {
    env.iter().rev().find(|(a, b)| if left { a == x } else { b == x })
}

fn mentions_bound(t: &Type, env: &[(Name, Name)]) -> bool {
    t.ftv().iter().any(|x| lookup(env, x, false).is_some())
}

fn match_body(p: &Type, t: &Type, hole: &str, env: &mut Vec<(Name, Name)>, m: &mut Match) -> bool {
    match (p, t) {
        (Type::Var(x), _) if x == hole && lookup(env, x, true).is_none() => {
            if mentions_bound(t, env) {
                return false;
            }
            match &m.hole {
                Some(h) => type_eq(h, t),
                None => {
                    m.hole = Some(t.clone());
                    true
                }
            }
        }
        (Type::Var(x), Type::Var(y)) => match (lookup(env, x, true), lookup(env, y, false)) {
            (Some((_, b)), Some((a, _))) => b == y && a == x,
            (None, None) => x == y,
            _ => false,
        },
        (Type::Arrow(d1, c1), Type::Arrow(d2, c2)) => {
            match_body(d1, d2, hole, env, m) && match_body(c1, c2, hole, env, m)
        }
        (Type::Forall(a, b1), Type::Forall(b, b2)) => {
            env.push((a.clone(), b.clone()));
            let r = match_body(b1, b2, hole, env, m);
            env.pop();
            r
        }
        (Type::EVar(s1, d1, b1), Type::EVar(s2, d2, b2)) => {
            if s1 != s2 {
                return false;
            }
            let mut image = VarSet::new();
            for x in d1 {
                if x == hole && lookup(env, x, true).is_none() {
                    continue;
                }
                match lookup(env, x, true) {
                    Some((_, b)) => image.insert(b.clone()),
                    None => image.insert(x.clone()),
                };
            }
            if d1.contains(hole) && lookup(env, hole, true).is_none() {
                m.sets.push((d2.clone(), image));
            } else if &image != d2 {
                return false;
            }
            match_body(b1, b2, hole, env, m)
        }
        _ => false,
    }
}

/// A type whose free variables are exactly `xs`.
pub fn with_free_vars(xs: &VarSet) -> Type {
    let mut it = xs.iter().rev();
    match it.next() {
        None => Type::Forall("a".into(), Box::new(Type::Var("a".into()))),
        Some(last) => it.fold(Type::Var(last.clone()), |acc, x| {
            Type::Arrow(Box::new(Type::Var(x.clone())), Box::new(acc))
        }),
    }
}

fn candidate(body: &Type, hole: &str, rest: &[Name], c2: &Type) -> Option<Type> {
    if let Type::Var(x) = body {
        if x == hole {
            return Some(c2.clone());
        }
    }
    let (top, tbody) = peel_foralls(c2);
    if top.len() != rest.len() {
        return None;
    }
    let mut env: Vec<(Name, Name)> = rest.iter().cloned().zip(top.iter().cloned()).collect();
    let mut m = Match::default();
    if !match_body(body, tbody, hole, &mut env, &mut m) {
        return None;
    }
    match m.hole {
        Some(h) => Some(h),
        None => {
            let mut need = VarSet::new();
            for (target, image) in &m.sets {
                need.extend(target.difference(image).cloned());
            }
            let bound: VarSet = top.iter().cloned().collect();
            if need.iter().any(|x| bound.contains(x)) {
                return None;
            }
            Some(with_free_vars(&need))
        }
    }
}

pub fn leq_f_witness(t1: &Type, t2: &Type) -> Option<Witness> {
    let c1 = canonical_type(t1);
    let c2 = canonical_type(t2);
    if c1 == c2 {
        return Some(Witness::Eq);
    }
    let (block, body) = peel_foralls(&c1);
    for (i, bi) in block.iter().enumerate() {
        let rest: Vec<Name> = block.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, b)| b.clone()).collect();
        let Some(arg) = candidate(body, bi, &rest, &c2) else {
            continue;
        };
        let inner = wrap_foralls(&rest, body.clone());
        let result = subst_type(&Substitution::single_type(bi, arg.clone()), &inner);
        if type_eq(&result, &c2) {
            return Some(Witness::Inst { source: Type::Forall(bi.clone(), Box::new(inner)), arg });
        }
    }
    None
}

/// One-step quantifier elimination, reflexive through dummy quantifiers.
pub fn leq_f(t1: &Type, t2: &Type) -> bool {
    leq_f_witness(t1, t2).is_some()
}

/// Equality subtyping; its rules generate exactly the type equalities.
pub fn leq_eq(t1: &Type, t2: &Type) -> bool {
    type_eq(t1, t2)
}

#[derive(Clone, Copy)]
pub struct Relation {
    pub name: &'static str,
    pub decide: fn(&Type, &Type) -> bool,
}

impl std::fmt::Debug for Relation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name)
    }
}

pub const F: Relation = Relation { name: "F", decide: leq_f };
pub const EQ: Relation = Relation { name: "EQ", decide: leq_eq };

/// Look a relation up by its command-line name. Other relations plug in by
/// building a `Relation` value directly.
pub fn relation(name: &str) -> Option<Relation> {
    match name {
        "F" | "f" => Some(F),
        "EQ" | "eq" => Some(EQ),
        _ => None,
    }
}

pub fn solved(c: &Constraint, rel: Relation) -> bool {
    match c {
        Constraint::Omega => true,
        Constraint::Atom(t1, t2) => (rel.decide)(t1, t2),
        Constraint::And(c1, c2) => solved(c1, rel) && solved(c2, rel),
        Constraint::Exists(_, b) | Constraint::Guard(_, _, _, b) => solved(b, rel),
    }
}
