//! Initial skeletons and the substitutions that specialise them.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::canon::{canonical_atoms, constraint_eq, type_eq};
use crate::expand::{rename_skel, skel_names, subst_evar, subst_set, subst_skel};
use crate::syntax::{
    evars_of_type, fresh_name, Constraint, Expansion, FreshSupply, Ftv, Name, Skeleton, Substitution, Term, Type,
    TypeEnv, VarSet,
};
use crate::typing::{as_arrow, check_skeleton, TypeError};

/// Free type variables and every E-variable of a skeleton.
pub fn allvar(q: &Skeleton) -> VarSet {
    fn evars(q: &Skeleton, out: &mut VarSet) {
        let env_evars = |env: &TypeEnv, out: &mut VarSet| {
            for (_, t) in env.iter() {
                evars_of_type(t, out);
            }
        };
        match q {
            Skeleton::Var(_, env) => env_evars(env, out),
            Skeleton::Abs(_, b) | Skeleton::Forall(_, b) => evars(b, out),
            Skeleton::App(f, a) => {
                evars(f, out);
                evars(a, out);
            }
            Skeleton::EVar(s, _, b) => {
                out.insert(s.clone());
                evars(b, out);
            }
            Skeleton::Sub(b, t) => {
                evars_of_type(t, out);
                evars(b, out);
            }
            Skeleton::Weak(b, env) => {
                env_evars(env, out);
                evars(b, out);
            }
        }
    }
    let mut out = q.ftv();
    evars(q, &mut out);
    out
}

fn rename_term_var(m: &Term, from: &str, to: &str) -> Term {
    match m {
        Term::Var(x) if x == from => Term::Var(to.to_string()),
        Term::Var(_) => m.clone(),
        Term::Abs(x, _) if x == from => m.clone(),
        Term::Abs(x, b) => Term::Abs(x.clone(), Box::new(rename_term_var(b, from, to))),
        Term::App(f, a) => Term::App(Box::new(rename_term_var(f, from, to)), Box::new(rename_term_var(a, from, to))),
    }
}

/// α-rename so that no binder shadows another binder or a free variable.
pub fn distinct_binders(m: &Term) -> Term {
    fn go(m: &Term, used: &mut VarSet) -> Term {
        match m {
            Term::Var(_) => m.clone(),
            Term::Abs(x, b) => {
                if used.insert(x.clone()) {
                    Term::Abs(x.clone(), Box::new(go(b, used)))
                } else {
                    let x2 = fresh_name(x, used);
                    used.insert(x2.clone());
                    let b = rename_term_var(b, x, &x2);
                    Term::Abs(x2, Box::new(go(&b, used)))
                }
            }
            Term::App(f, a) => {
                let f = go(f, used);
                Term::App(Box::new(f), Box::new(go(a, used)))
            }
        }
    }
    go(m, &mut m.fv())
}

// The numbering walk allocates a type variable at each binder, at the first
// occurrence of each free variable and after both sides of an application.
fn number_free(m: &Term, bound: &mut Vec<Name>, supply: &mut FreshSupply, out: &mut Vec<(Name, Name)>) {
    match m {
        Term::Var(x) => {
            if !bound.contains(x) && !out.iter().any(|(y, _)| y == x) {
                out.push((x.clone(), supply.tvar()));
            }
        }
        Term::Abs(x, b) => {
            supply.tvar();
            bound.push(x.clone());
            number_free(b, bound, supply, out);
            bound.pop();
        }
        Term::App(f, a) => {
            number_free(f, bound, supply, out);
            number_free(a, bound, supply, out);
            supply.tvar();
        }
    }
}

fn build(m: &Term, theta: &TypeEnv, supply: &mut FreshSupply) -> (Skeleton, Type) {
    let delta = theta.ftv();
    match m {
        Term::Var(x) => {
            let s = supply.evar();
            let t = theta.get(x).cloned().expect("variable environment covers the term");
            (
                Skeleton::EVar(s.clone(), delta.clone(), Box::new(Skeleton::Var(x.clone(), theta.clone()))),
                Type::EVar(s, delta, Box::new(t)),
            )
        }
        Term::Abs(x, b) => {
            let a = supply.tvar();
            let inner = theta.extended(x, Type::Var(a.clone()));
            let (qb, tb) = build(b, &inner, supply);
            let s = supply.evar();
            (
                Skeleton::EVar(s.clone(), delta.clone(), Box::new(Skeleton::Abs(x.clone(), Box::new(qb)))),
                Type::EVar(s, delta, Box::new(Type::Arrow(Box::new(Type::Var(a)), Box::new(tb)))),
            )
        }
        Term::App(f, arg) => {
            let (q1, _) = build(f, theta, supply);
            let (q2, t2) = build(arg, theta, supply);
            let a = supply.tvar();
            let s = supply.evar();
            let target = Type::Arrow(Box::new(t2), Box::new(Type::Var(a.clone())));
            let core = Skeleton::App(Box::new(Skeleton::Sub(Box::new(q1), target)), Box::new(q2));
            (
                Skeleton::EVar(s.clone(), delta.clone(), Box::new(core)),
                Type::EVar(s, delta, Box::new(Type::Var(a))),
            )
        }
    }
}

/// The initial skeleton of `m`, its variable environment and the supply
/// after allocation. Shadowing binders are renamed apart first.
pub fn initial_skeleton(m: &Term, supply: FreshSupply) -> (Skeleton, TypeEnv, FreshSupply) {
    let m = distinct_binders(m);
    let mut free = Vec::new();
    number_free(&m, &mut Vec::new(), &mut supply.clone(), &mut free);
    let mut supply = supply;
    supply.avoid.extend(free.iter().map(|(_, a)| a.clone()));
    let theta = TypeEnv(free.into_iter().map(|(x, a)| (x, Type::Var(a))).collect());
    let (q, _) = build(&m, &theta, &mut supply);
    (q, theta, supply)
}

// ------------------------------------------------------- rename equivalence

#[derive(Default)]
struct Renaming {
    tvars: BTreeMap<Name, Name>,
    evars: BTreeMap<Name, (Name, VarSet, VarSet)>,
}

impl Renaming {
    fn tvar(&mut self, from: &str, to: &str) -> bool {
        match self.tvars.get(from) {
            Some(t) => t == to,
            None => {
                self.tvars.insert(from.to_string(), to.to_string());
                true
            }
        }
    }

    fn evar(&mut self, from: &str, to: &str, d_from: &VarSet, d_to: &VarSet) -> bool {
        match self.evars.get(from) {
            Some((t, _, _)) => t == to,
            None => {
                self.evars.insert(from.to_string(), (to.to_string(), d_from.clone(), d_to.clone()));
                true
            }
        }
    }

    fn set(&mut self, from: &VarSet, to: &VarSet) -> bool {
        if from.len() != to.len() {
            return false;
        }
        let mut left: VarSet = to.clone();
        let mut pending = Vec::new();
        for a in from {
            match self.tvars.get(a) {
                Some(t) if left.remove(t) => {}
                Some(_) => return false,
                None => pending.push(a),
            }
        }
        // unmapped members are paired off with what remains; the final
        // substitution check rejects a bad guess
        for (a, b) in pending.into_iter().zip(left) {
            self.tvars.insert(a.clone(), b);
        }
        true
    }

    fn types(&mut self, from: &Type, to: &Type) -> bool {
        match (from, to) {
            (Type::Var(a), Type::Var(b)) => self.tvar(a, b),
            (Type::Arrow(d1, c1), Type::Arrow(d2, c2)) => self.types(d1, d2) && self.types(c1, c2),
            (Type::EVar(s1, d1, b1), Type::EVar(s2, d2, b2)) => {
                self.evar(s1, s2, d1, d2) && self.set(d1, d2) && self.types(b1, b2)
            }
            _ => false,
        }
    }

    fn envs(&mut self, from: &TypeEnv, to: &TypeEnv) -> bool {
        from.len() == to.len()
            && from.iter().zip(to.iter()).all(|((x, t), (y, u))| x == y && self.types(t, u))
    }

    fn skels(&mut self, from: &Skeleton, to: &Skeleton) -> bool {
        match (from, to) {
            (Skeleton::Var(x, g1), Skeleton::Var(y, g2)) => x == y && self.envs(g1, g2),
            (Skeleton::Abs(x, b1), Skeleton::Abs(y, b2)) => x == y && self.skels(b1, b2),
            (Skeleton::App(f1, a1), Skeleton::App(f2, a2)) => self.skels(f1, f2) && self.skels(a1, a2),
            (Skeleton::EVar(s1, d1, b1), Skeleton::EVar(s2, d2, b2)) => {
                self.skels(b1, b2) && self.evar(s1, s2, d1, d2) && self.set(d1, d2)
            }
            (Skeleton::Sub(b1, t1), Skeleton::Sub(b2, t2)) => self.skels(b1, b2) && self.types(t1, t2),
            _ => false,
        }
    }
}

/// A substitution mapping type variables to type variables and E-variables
/// to E-expansions with `q1 = φ(q2)`, if one exists.
pub fn rename_equiv(q1: &Skeleton, q2: &Skeleton) -> Option<Substitution> {
    let mut r = Renaming::default();
    if !r.skels(q2, q1) {
        return None;
    }
    let mut phi = Substitution::identity();
    for (a, b) in &r.tvars {
        phi.push_type(a, Type::Var(b.clone()));
    }
    let tmap = phi.clone();
    for (s2, (s1, d2, d1)) in &r.evars {
        let image = subst_set(&tmap, d2);
        let rest: VarSet = d1.difference(&image).cloned().collect();
        phi.push_exp(s2, Expansion::EVar(s1.clone(), rest, Box::new(Expansion::Id)));
    }
    (subst_skel(&phi, q2) == *q1).then_some(phi)
}

// --------------------------------------------------------------- reflexive

pub fn reflexive(c: &Constraint) -> bool {
    match c {
        Constraint::Omega => true,
        Constraint::Atom(t1, t2) => type_eq(t1, t2),
        Constraint::And(c1, c2) => reflexive(c1) && reflexive(c2),
        Constraint::Exists(_, b) | Constraint::Guard(_, _, _, b) => reflexive(b),
    }
}

// ----------------------------------------------------- derived substitution

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DeriveError {
    #[error("skeletons type different terms: {0} vs {1}")]
    TermMismatch(Term, Term),
    #[error("target is not a valid skeleton: {0}")]
    Invalid(TypeError),
    #[error("target environment does not match the free variables of the term")]
    NotRelevant,
    #[error("weakening below the root is not supported")]
    InnerWeakening,
    #[error("initial skeleton has an unexpected shape")]
    NotInitial,
}

fn freshen_foralls(q: &Skeleton, avoid: &mut VarSet) -> Skeleton {
    match q {
        Skeleton::Var(..) => q.clone(),
        Skeleton::Abs(x, b) => Skeleton::Abs(x.clone(), Box::new(freshen_foralls(b, avoid))),
        Skeleton::App(f, a) => {
            let f = freshen_foralls(f, avoid);
            Skeleton::app(f, freshen_foralls(a, avoid))
        }
        Skeleton::Forall(a, b) => {
            let a2 = fresh_name(a, avoid);
            avoid.insert(a2.clone());
            let b = rename_skel(b, a, &a2);
            Skeleton::Forall(a2, Box::new(freshen_foralls(&b, avoid)))
        }
        Skeleton::EVar(s, d, b) => Skeleton::EVar(s.clone(), d.clone(), Box::new(freshen_foralls(b, avoid))),
        Skeleton::Sub(b, t) => Skeleton::Sub(Box::new(freshen_foralls(b, avoid)), t.clone()),
        Skeleton::Weak(b, g) => Skeleton::Weak(Box::new(freshen_foralls(b, avoid)), g.clone()),
    }
}

fn derive(init: &Skeleton, target: &Skeleton, phi: &mut Substitution) -> Result<(), DeriveError> {
    let Skeleton::EVar(s, delta, core) = init else {
        return Err(DeriveError::NotInitial);
    };
    match target {
        Skeleton::Var(x, gamma) => {
            let Skeleton::Var(y, theta) = &**core else {
                return Err(DeriveError::NotInitial);
            };
            if x != y || gamma.support() != theta.support() {
                return Err(DeriveError::NotRelevant);
            }
            for (z, a) in theta.iter() {
                let Type::Var(a) = a else {
                    return Err(DeriveError::NotInitial);
                };
                if phi.lookup_type(a).is_none() {
                    phi.push_type(a, gamma.get(z).cloned().expect("same support"));
                }
            }
            phi.set_exp(s, Expansion::Id);
        }
        Skeleton::Abs(x, body) => {
            let Skeleton::Abs(y, qb) = &**core else {
                return Err(DeriveError::NotInitial);
            };
            if x != y {
                return Err(DeriveError::NotInitial);
            }
            derive(qb, body, phi)?;
            phi.set_exp(s, Expansion::Id);
        }
        Skeleton::App(f, a) => {
            let Skeleton::App(sub, q2) = &**core else {
                return Err(DeriveError::NotInitial);
            };
            let Skeleton::Sub(q1, target_ty) = &**sub else {
                return Err(DeriveError::NotInitial);
            };
            let Some((_, Type::Var(res))) = target_ty.arrow_parts().map(|(d, c)| (d.clone(), c.clone())) else {
                return Err(DeriveError::NotInitial);
            };
            derive(q1, f, phi)?;
            derive(q2, a, phi)?;
            phi.set_exp(s, Expansion::Id);
            let ft = check_skeleton(f).map_err(DeriveError::Invalid)?.rtype;
            let (_, cod) = as_arrow(&ft).ok_or(DeriveError::NotInitial)?;
            phi.push_type(&res, cod);
        }
        Skeleton::Forall(a, body) => {
            derive(init, body, phi)?;
            let i = subst_evar(phi, s);
            phi.set_exp(s, Expansion::Forall(a.clone(), Box::new(i)));
        }
        Skeleton::Sub(body, t) => {
            derive(init, body, phi)?;
            let i = subst_evar(phi, s);
            phi.set_exp(s, Expansion::Sub(Box::new(i), t.clone()));
        }
        Skeleton::EVar(s1, d1, body) => {
            derive(init, body, phi)?;
            let i = subst_evar(phi, s);
            let rest: VarSet = d1.difference(&subst_set(phi, delta)).cloned().collect();
            phi.set_exp(s, Expansion::EVar(s1.clone(), rest, Box::new(i)));
        }
        Skeleton::Weak(..) => return Err(DeriveError::InnerWeakening),
    }
    Ok(())
}

/// The substitution and extra environment reproducing `target` from the
/// initial skeleton `init`, up to a reflexive remainder.
pub fn derive_substitution(init: &Skeleton, target: &Skeleton) -> Result<(Substitution, TypeEnv), DeriveError> {
    let ti = init.term();
    let tt = target.term();
    if ti != tt {
        return Err(DeriveError::TermMismatch(ti, tt));
    }
    check_skeleton(target).map_err(DeriveError::Invalid)?;
    let mut extra = TypeEnv::new();
    let mut cur = target;
    while let Skeleton::Weak(b, g) = cur {
        extra = g.concat(&extra);
        cur = b;
    }
    let mut avoid = allvar(init);
    skel_names(cur, &mut avoid);
    let core = freshen_foralls(cur, &mut avoid);
    let mut phi = Substitution::identity();
    derive(init, &core, &mut phi)?;
    Ok((phi.dedup(), extra))
}

/// Does `derived` equal `target` conjoined with a reflexive remainder?
pub fn matches_with_reflexive_remainder(derived: &Constraint, target: &Constraint) -> bool {
    let wanted = canonical_atoms(target);
    let extra: Vec<Constraint> = canonical_atoms(derived).into_iter().filter(|a| !wanted.contains(a)).collect();
    if !extra.iter().all(reflexive) {
        return false;
    }
    let with_rest = extra.into_iter().fold(target.clone(), Constraint::and);
    constraint_eq(derived, &with_rest)
}
