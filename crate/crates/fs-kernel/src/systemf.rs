//! Plain System F derivations, checked independently of the Fs rules.
//!
//! The subtyping node admits equality or a single quantifier elimination;
//! the instantiating type is searched for among the subterms of the target.

use thiserror::Error;

use crate::canon::{canonical_type, peel_foralls, type_eq, wrap_foralls};
use crate::syntax::{all_tvar_names, fresh_name, Ftv, Name, Skeleton, Type, TypeEnv, VarSet};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{msg} at `{node}`")]
pub struct SystemFError {
    pub node: String,
    pub msg: String,
}

pub fn erase_type(t: &Type) -> Type {
    match t {
        Type::Var(_) => t.clone(),
        Type::Arrow(d, c) => Type::Arrow(Box::new(erase_type(d)), Box::new(erase_type(c))),
        Type::Forall(a, b) => Type::Forall(a.clone(), Box::new(erase_type(b))),
        Type::EVar(_, _, b) => erase_type(b),
    }
}

fn erase_env(env: &TypeEnv) -> TypeEnv {
    TypeEnv(env.iter().map(|(x, t)| (x.clone(), erase_type(t))).collect())
}

pub fn erase_evars(q: &Skeleton) -> Skeleton {
    match q {
        Skeleton::Var(x, env) => Skeleton::Var(x.clone(), erase_env(env)),
        Skeleton::Abs(x, b) => Skeleton::Abs(x.clone(), Box::new(erase_evars(b))),
        Skeleton::App(f, a) => Skeleton::App(Box::new(erase_evars(f)), Box::new(erase_evars(a))),
        Skeleton::Forall(a, b) => Skeleton::Forall(a.clone(), Box::new(erase_evars(b))),
        Skeleton::EVar(_, _, b) => erase_evars(b),
        Skeleton::Sub(b, t) => Skeleton::Sub(Box::new(erase_evars(b)), erase_type(t)),
        Skeleton::Weak(b, env) => Skeleton::Weak(Box::new(erase_evars(b)), erase_env(env)),
    }
}

// Capture-avoiding substitution on E-variable-free types.
fn inst(t: &Type, a: &str, u: &Type, fu: &VarSet) -> Type {
    match t {
        Type::Var(b) if b == a => u.clone(),
        Type::Var(_) => t.clone(),
        Type::Arrow(d, c) => Type::Arrow(Box::new(inst(d, a, u, fu)), Box::new(inst(c, a, u, fu))),
        Type::Forall(b, _) if b == a => t.clone(),
        Type::Forall(b, body) if fu.contains(b) => {
            let mut avoid = fu.clone();
            all_tvar_names(body, &mut avoid);
            avoid.insert(a.to_string());
            let b2 = fresh_name(b, &avoid);
            let renamed = inst(body, b, &Type::Var(b2.clone()), &VarSet::from([b2.clone()]));
            Type::Forall(b2, Box::new(inst(&renamed, a, u, fu)))
        }
        Type::Forall(b, body) => Type::Forall(b.clone(), Box::new(inst(body, a, u, fu))),
        Type::EVar(..) => unreachable!("erased"),
    }
}

fn subterms(t: &Type, out: &mut Vec<Type>) {
    out.push(t.clone());
    match t {
        Type::Var(_) => {}
        Type::Arrow(d, c) => {
            subterms(d, out);
            subterms(c, out);
        }
        Type::Forall(_, b) | Type::EVar(_, _, b) => subterms(b, out),
    }
}

/// `t1 = t2`, or `t1 = ∀a.τ` and `t2 = τ[a := u]` for some `u`.
pub fn one_step_instance(t1: &Type, t2: &Type) -> bool {
    if type_eq(t1, t2) {
        return true;
    }
    let c1 = canonical_type(t1);
    let (block, body) = peel_foralls(&c1);
    let mut cands = Vec::new();
    subterms(t2, &mut cands);
    subterms(&canonical_type(t2), &mut cands);
    cands.extend(t2.ftv().into_iter().map(Type::Var));
    block.iter().enumerate().any(|(i, bi)| {
        let rest: Vec<Name> = block.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, b)| b.clone()).collect();
        let inner = wrap_foralls(&rest, body.clone());
        cands.iter().any(|u| type_eq(&inst(&inner, bi, u, &u.ftv()), t2))
    })
}

fn fail<T>(q: &Skeleton, msg: impl Into<String>) -> Result<T, SystemFError> {
    let mut node = q.to_string();
    if node.len() > 80 {
        node = node.chars().take(77).collect::<String>() + "...";
    }
    Err(SystemFError { node, msg: msg.into() })
}

fn same_env(g1: &TypeEnv, g2: &TypeEnv) -> bool {
    g1.len() == g2.len() && g1.iter().all(|(x, t)| g2.get(x).is_some_and(|u| type_eq(t, u)))
}

/// Check a System F derivation; returns its environment and type.
pub fn check_system_f(q: &Skeleton) -> Result<(TypeEnv, Type), SystemFError> {
    match q {
        Skeleton::Var(x, env) => {
            if !env.is_well_formed() {
                return fail(q, "duplicate variable in environment");
            }
            match env.get(x) {
                Some(t) => Ok((env.clone(), t.clone())),
                None => fail(q, format!("`{x}` is unbound")),
            }
        }
        Skeleton::Abs(x, b) => {
            let (env, t) = check_system_f(b)?;
            match env.get(x) {
                Some(tx) => Ok((env.without(x), Type::Arrow(Box::new(tx.clone()), Box::new(t)))),
                None => fail(q, format!("`{x}` is unbound")),
            }
        }
        Skeleton::App(f, a) => {
            let (e1, tf) = check_system_f(f)?;
            let (e2, ta) = check_system_f(a)?;
            if !same_env(&e1, &e2) {
                return fail(q, "environments differ");
            }
            match canonical_type(&tf) {
                Type::Arrow(d, c) if type_eq(&d, &ta) => Ok((e1, *c)),
                Type::Arrow(..) => fail(q, "argument type mismatch"),
                _ => fail(q, "function type is not an arrow"),
            }
        }
        Skeleton::Forall(a, b) => {
            let (env, t) = check_system_f(b)?;
            if env.ftv().contains(a) {
                return fail(q, format!("`{a}` is free in the environment"));
            }
            Ok((env, Type::Forall(a.clone(), Box::new(t))))
        }
        Skeleton::EVar(..) => fail(q, "E-variable node in a System F derivation"),
        Skeleton::Sub(b, t2) => {
            let (env, t1) = check_system_f(b)?;
            if one_step_instance(&t1, t2) {
                Ok((env, t2.clone()))
            } else {
                fail(q, format!("`{t1}` does not instantiate to `{t2}`"))
            }
        }
        Skeleton::Weak(b, extra) => {
            let (env, t) = check_system_f(b)?;
            if !extra.is_well_formed() || extra.iter().any(|(x, _)| env.contains(x)) {
                return fail(q, "weakening overlaps the environment");
            }
            Ok((env.concat(extra), t))
        }
    }
}
