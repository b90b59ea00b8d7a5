//! Skeleton checking: each valid skeleton encodes exactly one judgement.

use thiserror::Error;

use crate::canon::{canonical_type, type_eq};
use crate::syntax::{Constraint, Ftv, Judgement, Name, Skeleton, Term, Type, TypeEnv, VarSet};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TypeError {
    #[error("unbound variable `{var}` at `{node}`")]
    UnboundVariable { var: Name, node: String },
    #[error("environment mentions `{var}` twice at `{node}`")]
    MalformedEnv { var: Name, node: String },
    #[error("`{ty}` is not an arrow type at `{node}`")]
    NotAnArrow { ty: Type, node: String },
    #[error("argument type `{found}` does not match domain `{expected}` at `{node}`")]
    DomainMismatch { expected: Type, found: Type, node: String },
    #[error("function and argument environments differ at `{node}`: {left} vs {right}")]
    EnvMismatch { left: TypeEnv, right: TypeEnv, node: String },
    #[error("quantified variable `{var}` is free in the environment at `{node}`")]
    EscapingVariable { var: Name, node: String },
    #[error("forbidden set misses `{missing}` from the environment at `{node}`")]
    ForbiddenSetTooSmall { missing: Name, node: String },
    #[error("weakening reuses `{var}` at `{node}`")]
    SupportOverlap { var: Name, node: String },
}

fn node(q: &Skeleton) -> String {
    let s = q.to_string();
    if s.chars().count() > 80 {
        let head: String = s.chars().take(77).collect();
        format!("{head}...")
    } else {
        s
    }
}

/// The arrow a type denotes, looking through dummy quantifiers.
pub fn as_arrow(t: &Type) -> Option<(Type, Type)> {
    match t {
        Type::Arrow(d, c) => Some(((**d).clone(), (**c).clone())),
        Type::Forall(..) => match canonical_type(t) {
            Type::Arrow(d, c) => Some((*d, *c)),
            _ => None,
        },
        _ => None,
    }
}

/// Environments as finite maps, with types compared up to equality.
pub fn env_eq(g1: &TypeEnv, g2: &TypeEnv) -> bool {
    g1.len() == g2.len()
        && g1.support() == g2.support()
        && g1.iter().all(|(x, t)| g2.get(x).is_some_and(|u| type_eq(t, u)))
}

fn check_env(env: &TypeEnv, q: &Skeleton) -> Result<(), TypeError> {
    match env.duplicate() {
        Some(x) => Err(TypeError::MalformedEnv { var: x.to_string(), node: node(q) }),
        None => Ok(()),
    }
}

pub fn check_skeleton(q: &Skeleton) -> Result<Judgement, TypeError> {
    match q {
        Skeleton::Var(x, env) => {
            check_env(env, q)?;
            let t = env
                .get(x)
                .ok_or_else(|| TypeError::UnboundVariable { var: x.clone(), node: node(q) })?;
            Ok(Judgement {
                term: Term::Var(x.clone()),
                env: env.clone(),
                rtype: t.clone(),
                constraint: Constraint::Omega,
            })
        }
        Skeleton::Abs(x, body) => {
            let j = check_skeleton(body)?;
            let t1 = j
                .env
                .get(x)
                .cloned()
                .ok_or_else(|| TypeError::UnboundVariable { var: x.clone(), node: node(q) })?;
            Ok(Judgement {
                term: Term::Abs(x.clone(), Box::new(j.term)),
                env: j.env.without(x),
                rtype: Type::Arrow(Box::new(t1), Box::new(j.rtype)),
                constraint: j.constraint,
            })
        }
        Skeleton::App(f, a) => {
            let jf = check_skeleton(f)?;
            let ja = check_skeleton(a)?;
            if !env_eq(&jf.env, &ja.env) {
                return Err(TypeError::EnvMismatch { left: jf.env, right: ja.env, node: node(q) });
            }
            let (dom, cod) =
                as_arrow(&jf.rtype).ok_or_else(|| TypeError::NotAnArrow { ty: jf.rtype.clone(), node: node(q) })?;
            if !type_eq(&dom, &ja.rtype) {
                return Err(TypeError::DomainMismatch { expected: dom, found: ja.rtype, node: node(q) });
            }
            Ok(Judgement {
                term: Term::App(Box::new(jf.term), Box::new(ja.term)),
                env: jf.env,
                rtype: cod,
                constraint: Constraint::and(jf.constraint, ja.constraint),
            })
        }
        Skeleton::Forall(a, body) => {
            let j = check_skeleton(body)?;
            // Renaming the binder cannot help: it binds the environment's
            // occurrences too, so a free occurrence there stays free.
            if j.env.ftv().contains(a) {
                return Err(TypeError::EscapingVariable { var: a.clone(), node: node(q) });
            }
            Ok(Judgement {
                term: j.term,
                env: j.env,
                rtype: Type::Forall(a.clone(), Box::new(j.rtype)),
                constraint: Constraint::Exists(a.clone(), Box::new(j.constraint)),
            })
        }
        Skeleton::EVar(s, delta, body) => {
            let j = check_skeleton(body)?;
            if let Some(missing) = j.env.ftv().difference(delta).next() {
                return Err(TypeError::ForbiddenSetTooSmall { missing: missing.clone(), node: node(q) });
            }
            Ok(Judgement {
                term: j.term,
                env: j.env,
                rtype: Type::EVar(s.clone(), delta.clone(), Box::new(j.rtype.clone())),
                constraint: Constraint::Guard(s.clone(), delta.clone(), j.rtype, Box::new(j.constraint)),
            })
        }
        Skeleton::Sub(body, t2) => {
            let j = check_skeleton(body)?;
            Ok(Judgement {
                term: j.term,
                env: j.env,
                rtype: t2.clone(),
                constraint: Constraint::and(j.constraint, Constraint::Atom(j.rtype, t2.clone())),
            })
        }
        Skeleton::Weak(body, extra) => {
            check_env(extra, q)?;
            let j = check_skeleton(body)?;
            if let Some((x, _)) = extra.iter().find(|(x, _)| j.env.contains(x)) {
                return Err(TypeError::SupportOverlap { var: x.clone(), node: node(q) });
            }
            Ok(Judgement { env: j.env.concat(extra), ..j })
        }
    }
}

pub fn rtype(q: &Skeleton) -> Result<Type, TypeError> {
    check_skeleton(q).map(|j| j.rtype)
}

pub fn tenv(q: &Skeleton) -> Result<TypeEnv, TypeError> {
    check_skeleton(q).map(|j| j.env)
}

pub fn relevant(q: &Skeleton) -> Result<bool, TypeError> {
    let j = check_skeleton(q)?;
    Ok(j.term.fv() == j.env.support())
}

/// Judgements equal up to the equality theories.
pub fn judgement_eq(j1: &Judgement, j2: &Judgement) -> bool {
    j1.term.alpha_eq(&j2.term)
        && env_eq(&j1.env, &j2.env)
        && type_eq(&j1.rtype, &j2.rtype)
        && crate::canon::constraint_eq(&j1.constraint, &j2.constraint)
}

/// Re-run the sintro side condition at every E-variable node.
pub fn forbidden_sets_cover(q: &Skeleton) -> bool {
    fn go(q: &Skeleton) -> Option<VarSet> {
        match q {
            Skeleton::EVar(_, delta, body) => {
                let fv = go(body)?;
                fv.is_subset(delta).then_some(fv)
            }
            Skeleton::Abs(_, b) | Skeleton::Forall(_, b) | Skeleton::Sub(b, _) | Skeleton::Weak(b, _) => {
                go(b)?;
                Some(tenv(q).ok()?.ftv())
            }
            Skeleton::App(f, a) => {
                go(f)?;
                go(a)?;
                Some(tenv(q).ok()?.ftv())
            }
            Skeleton::Var(_, env) => Some(env.ftv()),
        }
    }
    go(q).is_some()
}
