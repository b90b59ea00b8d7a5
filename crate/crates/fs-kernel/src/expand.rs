//! Expansion application and substitution application.

use thiserror::Error;

use crate::canon::{rename_free, rename_set};
use crate::syntax::{
    all_tvar_names, fresh_name, Constraint, Expansion, Ftv, Judgement, Name, Skeleton, Substitution, Type, TypeEnv,
    VarSet,
};
use crate::typing::{check_skeleton, judgement_eq, TypeError};

// ---------------------------------------------------------------- expansion
//
// The E-variable case recurses with the outer forbidden set; the enlarged set
// would keep quantifiers from forming that the environment allows.

pub fn inst_type(i: &Expansion, delta: &VarSet, t: &Type) -> Type {
    match i {
        Expansion::Id => t.clone(),
        Expansion::EVar(s, d2, rest) => {
            Type::EVar(s.clone(), delta.union(d2).cloned().collect(), Box::new(inst_type(rest, delta, t)))
        }
        Expansion::Forall(a, rest) => {
            let body = inst_type(rest, delta, t);
            if delta.contains(a) {
                body
            } else {
                Type::Forall(a.clone(), Box::new(body))
            }
        }
        Expansion::Sub(_, t2) => t2.clone(),
    }
}

pub fn inst_skel(i: &Expansion, delta: &VarSet, q: &Skeleton) -> Skeleton {
    match i {
        Expansion::Id => q.clone(),
        Expansion::EVar(s, d2, rest) => {
            Skeleton::EVar(s.clone(), delta.union(d2).cloned().collect(), Box::new(inst_skel(rest, delta, q)))
        }
        Expansion::Forall(a, rest) => {
            let body = inst_skel(rest, delta, q);
            if delta.contains(a) {
                body
            } else {
                Skeleton::Forall(a.clone(), Box::new(body))
            }
        }
        Expansion::Sub(rest, t2) => Skeleton::Sub(Box::new(inst_skel(rest, delta, q)), t2.clone()),
    }
}

pub fn inst_cons(i: &Expansion, delta: &VarSet, t: &Type, c: &Constraint) -> Constraint {
    match i {
        Expansion::Id => c.clone(),
        Expansion::EVar(s, d2, rest) => Constraint::Guard(
            s.clone(),
            delta.union(d2).cloned().collect(),
            inst_type(rest, delta, t),
            Box::new(inst_cons(rest, delta, t, c)),
        ),
        Expansion::Forall(a, rest) => {
            let body = inst_cons(rest, delta, t, c);
            if delta.contains(a) {
                body
            } else {
                Constraint::Exists(a.clone(), Box::new(body))
            }
        }
        Expansion::Sub(rest, t2) => Constraint::and(
            inst_cons(rest, delta, t, c),
            Constraint::Atom(inst_type(rest, delta, t), t2.clone()),
        ),
    }
}

// ------------------------------------------------------------ substitution

pub fn subst_tvar(phi: &Substitution, a: &str) -> Type {
    phi.lookup_type(a).cloned().unwrap_or_else(|| Type::Var(a.to_string()))
}

pub fn subst_evar(phi: &Substitution, s: &str) -> Expansion {
    phi.lookup_exp(s)
        .cloned()
        .unwrap_or_else(|| Expansion::EVar(s.to_string(), VarSet::new(), Box::new(Expansion::Id)))
}

/// ftv(φ(Δ)).
pub fn subst_set(phi: &Substitution, delta: &VarSet) -> VarSet {
    let mut out = VarSet::new();
    for a in delta {
        subst_tvar(phi, a).ftv_into(&mut out);
    }
    out
}

fn binder_clash(phi: &Substitution, a: &str) -> bool {
    phi.ftv().contains(a)
}

fn fresh_binder(phi: &Substitution, a: &str, names: VarSet) -> Name {
    let mut avoid = phi.ftv();
    avoid.extend(names);
    avoid.insert(a.to_string());
    fresh_name(a, &avoid)
}

pub fn subst_type(phi: &Substitution, t: &Type) -> Type {
    if phi.is_identity() {
        return t.clone();
    }
    match t {
        Type::Var(a) => subst_tvar(phi, a),
        Type::Arrow(d, c) => Type::Arrow(Box::new(subst_type(phi, d)), Box::new(subst_type(phi, c))),
        Type::Forall(a, b) => {
            if binder_clash(phi, a) {
                let mut names = VarSet::new();
                all_tvar_names(b, &mut names);
                let a2 = fresh_binder(phi, a, names);
                Type::Forall(a2.clone(), Box::new(subst_type(phi, &rename_free(b, a, &a2))))
            } else {
                Type::Forall(a.clone(), Box::new(subst_type(phi, b)))
            }
        }
        Type::EVar(s, delta, b) => inst_type(&subst_evar(phi, s), &subst_set(phi, delta), &subst_type(phi, b)),
    }
}

pub fn subst_env(phi: &Substitution, env: &TypeEnv) -> TypeEnv {
    TypeEnv(env.iter().map(|(x, t)| (x.clone(), subst_type(phi, t))).collect())
}

fn cons_names(c: &Constraint, out: &mut VarSet) {
    match c {
        Constraint::Omega => {}
        Constraint::Atom(t1, t2) => {
            all_tvar_names(t1, out);
            all_tvar_names(t2, out);
        }
        Constraint::And(c1, c2) => {
            cons_names(c1, out);
            cons_names(c2, out);
        }
        Constraint::Exists(a, b) => {
            out.insert(a.clone());
            cons_names(b, out);
        }
        Constraint::Guard(_, delta, t, b) => {
            out.extend(delta.iter().cloned());
            all_tvar_names(t, out);
            cons_names(b, out);
        }
    }
}

/// Rename free `from` to `to` in a constraint; `to` must occur nowhere in it.
pub fn rename_cons(c: &Constraint, from: &str, to: &str) -> Constraint {
    match c {
        Constraint::Omega => Constraint::Omega,
        Constraint::Atom(t1, t2) => Constraint::Atom(rename_free(t1, from, to), rename_free(t2, from, to)),
        Constraint::And(c1, c2) => Constraint::and(rename_cons(c1, from, to), rename_cons(c2, from, to)),
        Constraint::Exists(a, _) if a == from => c.clone(),
        Constraint::Exists(a, b) => Constraint::Exists(a.clone(), Box::new(rename_cons(b, from, to))),
        Constraint::Guard(s, delta, t, b) => Constraint::Guard(
            s.clone(),
            rename_set(delta, from, to),
            rename_free(t, from, to),
            Box::new(rename_cons(b, from, to)),
        ),
    }
}

pub fn subst_cons(phi: &Substitution, c: &Constraint) -> Constraint {
    if phi.is_identity() {
        return c.clone();
    }
    match c {
        Constraint::Omega => Constraint::Omega,
        Constraint::Atom(t1, t2) => Constraint::Atom(subst_type(phi, t1), subst_type(phi, t2)),
        Constraint::And(c1, c2) => Constraint::and(subst_cons(phi, c1), subst_cons(phi, c2)),
        Constraint::Exists(a, b) => {
            if binder_clash(phi, a) {
                let mut names = VarSet::new();
                cons_names(b, &mut names);
                let a2 = fresh_binder(phi, a, names);
                Constraint::Exists(a2.clone(), Box::new(subst_cons(phi, &rename_cons(b, a, &a2))))
            } else {
                Constraint::Exists(a.clone(), Box::new(subst_cons(phi, b)))
            }
        }
        Constraint::Guard(s, delta, t, b) => inst_cons(
            &subst_evar(phi, s),
            &subst_set(phi, delta),
            &subst_type(phi, t),
            &subst_cons(phi, b),
        ),
    }
}

/// Every type-variable name in a skeleton, bound or free.
pub fn skel_names(q: &Skeleton, out: &mut VarSet) {
    let env_names = |env: &TypeEnv, out: &mut VarSet| {
        for (_, t) in env.iter() {
            all_tvar_names(t, out);
        }
    };
    match q {
        Skeleton::Var(_, env) => env_names(env, out),
        Skeleton::Abs(_, b) => skel_names(b, out),
        Skeleton::App(f, a) => {
            skel_names(f, out);
            skel_names(a, out);
        }
        Skeleton::Forall(a, b) => {
            out.insert(a.clone());
            skel_names(b, out);
        }
        Skeleton::EVar(_, delta, b) => {
            out.extend(delta.iter().cloned());
            skel_names(b, out);
        }
        Skeleton::Sub(b, t) => {
            all_tvar_names(t, out);
            skel_names(b, out);
        }
        Skeleton::Weak(b, env) => {
            env_names(env, out);
            skel_names(b, out);
        }
    }
}

pub fn rename_env(env: &TypeEnv, from: &str, to: &str) -> TypeEnv {
    TypeEnv(env.iter().map(|(x, t)| (x.clone(), rename_free(t, from, to))).collect())
}

/// Rename free `from` to `to` in a skeleton; `to` must occur nowhere in it.
pub fn rename_skel(q: &Skeleton, from: &str, to: &str) -> Skeleton {
    match q {
        Skeleton::Var(x, env) => Skeleton::Var(x.clone(), rename_env(env, from, to)),
        Skeleton::Abs(x, b) => Skeleton::Abs(x.clone(), Box::new(rename_skel(b, from, to))),
        Skeleton::App(f, a) => Skeleton::app(rename_skel(f, from, to), rename_skel(a, from, to)),
        Skeleton::Forall(a, _) if a == from => q.clone(),
        Skeleton::Forall(a, b) => Skeleton::Forall(a.clone(), Box::new(rename_skel(b, from, to))),
        Skeleton::EVar(s, delta, b) => {
            Skeleton::EVar(s.clone(), rename_set(delta, from, to), Box::new(rename_skel(b, from, to)))
        }
        Skeleton::Sub(b, t) => Skeleton::Sub(Box::new(rename_skel(b, from, to)), rename_free(t, from, to)),
        Skeleton::Weak(b, env) => Skeleton::Weak(Box::new(rename_skel(b, from, to)), rename_env(env, from, to)),
    }
}

pub fn subst_skel(phi: &Substitution, q: &Skeleton) -> Skeleton {
    if phi.is_identity() {
        return q.clone();
    }
    match q {
        Skeleton::Var(x, env) => Skeleton::Var(x.clone(), subst_env(phi, env)),
        Skeleton::Abs(x, b) => Skeleton::Abs(x.clone(), Box::new(subst_skel(phi, b))),
        Skeleton::App(f, a) => Skeleton::app(subst_skel(phi, f), subst_skel(phi, a)),
        Skeleton::Forall(a, b) => {
            if binder_clash(phi, a) {
                let mut names = VarSet::new();
                skel_names(b, &mut names);
                let a2 = fresh_binder(phi, a, names);
                Skeleton::Forall(a2.clone(), Box::new(subst_skel(phi, &rename_skel(b, a, &a2))))
            } else {
                Skeleton::Forall(a.clone(), Box::new(subst_skel(phi, b)))
            }
        }
        Skeleton::EVar(s, delta, b) => inst_skel(&subst_evar(phi, s), &subst_set(phi, delta), &subst_skel(phi, b)),
        Skeleton::Sub(b, t) => Skeleton::Sub(Box::new(subst_skel(phi, b)), subst_type(phi, t)),
        Skeleton::Weak(b, env) => Skeleton::Weak(Box::new(subst_skel(phi, b)), subst_env(phi, env)),
    }
}

pub fn subst_judgement(phi: &Substitution, j: &Judgement) -> Judgement {
    Judgement {
        term: j.term.clone(),
        env: subst_env(phi, &j.env),
        rtype: subst_type(phi, &j.rtype),
        constraint: subst_cons(phi, &j.constraint),
    }
}

// -------------------------------------------------------------- soundness

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PropertyError {
    #[error("skeleton is not valid: {0}")]
    Invalid(TypeError),
    #[error("environment variables {0:?} are not forbidden")]
    ForbiddenTooSmall(VarSet),
}

/// Expansion soundness for one instance.
pub fn property_expansion_sound(q: &Skeleton, i: &Expansion, delta: &VarSet) -> Result<bool, PropertyError> {
    let j = check_skeleton(q).map_err(PropertyError::Invalid)?;
    let missing: VarSet = j.env.ftv().difference(delta).cloned().collect();
    if !missing.is_empty() {
        return Err(PropertyError::ForbiddenTooSmall(missing));
    }
    let expected = Judgement {
        term: j.term.clone(),
        env: j.env.clone(),
        rtype: inst_type(i, delta, &j.rtype),
        constraint: inst_cons(i, delta, &j.rtype, &j.constraint),
    };
    Ok(match check_skeleton(&inst_skel(i, delta, q)) {
        Ok(got) => judgement_eq(&got, &expected),
        Err(_) => false,
    })
}

/// Substitution soundness for one instance.
pub fn property_subst_sound(q: &Skeleton, phi: &Substitution) -> Result<bool, PropertyError> {
    let j = check_skeleton(q).map_err(PropertyError::Invalid)?;
    let expected = subst_judgement(phi, &j);
    Ok(match check_skeleton(&subst_skel(phi, q)) {
        Ok(got) => judgement_eq(&got, &expected),
        Err(_) => false,
    })
}
