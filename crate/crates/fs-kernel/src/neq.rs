//! The variant of the system where type equalities are explicit proof
//! steps, together with the translations to and from ordinary skeletons.
//! Types here are compared up to α-conversion only.

use std::fmt::{self, Display, Formatter};

use thiserror::Error;

use crate::canon::{alpha_eq, block_order, peel_foralls, rename_free, type_eq, wrap_foralls};
use crate::expand::subst_type;
use crate::print::print_set;
use crate::solve::{leq_f_witness, Witness};
use crate::syntax::{all_tvar_names, fresh_name, Ftv, Name, Skeleton, Substitution, Term, Type, TypeEnv, VarSet};
use crate::typing::{as_arrow, check_skeleton, env_eq, TypeError};

/// A derivation of `τ1 ≤ τ2` or `τ1 ≤= τ2`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SubProof {
    /// `∀a.τ1 ≤ τ1[a := τ2]`; holds the source and the argument.
    Inst(Type, Type),
    /// `∀a1.∀a2.τ ≤= ∀a2.∀a1.τ`; holds the source.
    QuantComm(Type),
    /// `τ ≤= ∀a.τ` for `a ∉ ftv(τ)`.
    DummyIn(Type, Name),
    /// `∀a.τ ≤= τ` for `a ∉ ftv(τ)`; holds the source.
    DummyElim(Type),
    /// From `τ2 ≤= τ1` and `τ3 ≤= τ4`, `τ1 → τ3 ≤= τ2 → τ4`.
    FunCong(Box<SubProof>, Box<SubProof>),
    EVarCong(Name, VarSet, Box<SubProof>),
    QuantCong(Name, Box<SubProof>),
    Refl(Type),
    /// Composition of two equalities.
    Trans(Box<SubProof>, Box<SubProof>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Tag {
    Leq,
    Eq,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NeqSkeleton {
    Var(Name, TypeEnv),
    Abs(Name, Box<NeqSkeleton>),
    App(Box<NeqSkeleton>, Box<NeqSkeleton>),
    Forall(Name, Box<NeqSkeleton>),
    EVar(Name, VarSet, Box<NeqSkeleton>),
    Sub(Box<NeqSkeleton>, SubProof),
    /// Replace the type of `y` in the environment: the proof shows
    /// `τ2 ≤= τ1` where `τ1` is the type below.
    EnvSub(Box<NeqSkeleton>, Name, SubProof),
    Weak(Box<NeqSkeleton>, TypeEnv),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NeqJudgement {
    pub term: Term,
    pub env: TypeEnv,
    pub rtype: Type,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NeqError {
    #[error("bad subtyping proof `{proof}`: {msg}")]
    BadProof { proof: String, msg: String },
    #[error("{msg} at `{node}`")]
    Rule { node: String, msg: String },
    #[error("atom `{0}` is not solved under F")]
    NotSolved(String),
    #[error(transparent)]
    Fs(#[from] TypeError),
    #[error("cannot reduce: {0}")]
    Stuck(String),
    #[error("`{0}` is not the reduct of the subject")]
    NotAStep(String),
}

fn shorten(s: String) -> String {
    if s.chars().count() > 80 {
        s.chars().take(77).collect::<String>() + "..."
    } else {
        s
    }
}

fn bad(p: &SubProof, msg: impl Into<String>) -> NeqError {
    NeqError::BadProof { proof: shorten(p.to_string()), msg: msg.into() }
}

fn rule(q: &NeqSkeleton, msg: impl Into<String>) -> NeqError {
    NeqError::Rule { node: shorten(q.to_string()), msg: msg.into() }
}

// ------------------------------------------------------------- proofs

/// The two sides of a proof and whether it is an equality.
pub fn check_subproof(p: &SubProof) -> Result<(Type, Type, Tag), NeqError> {
    match p {
        SubProof::Inst(src, arg) => match src {
            Type::Forall(a, body) => {
                Ok((src.clone(), subst_type(&Substitution::single_type(a, arg.clone()), body), Tag::Leq))
            }
            _ => Err(bad(p, "source is not quantified")),
        },
        SubProof::QuantComm(src) => match src {
            Type::Forall(a1, inner) => match &**inner {
                Type::Forall(a2, body) => Ok((
                    src.clone(),
                    Type::Forall(a2.clone(), Box::new(Type::Forall(a1.clone(), body.clone()))),
                    Tag::Eq,
                )),
                _ => Err(bad(p, "needs two quantifiers")),
            },
            _ => Err(bad(p, "needs two quantifiers")),
        },
        SubProof::DummyIn(t, a) => {
            if t.ftv().contains(a) {
                return Err(bad(p, format!("`{a}` is free")));
            }
            Ok((t.clone(), Type::Forall(a.clone(), Box::new(t.clone())), Tag::Eq))
        }
        SubProof::DummyElim(src) => match src {
            Type::Forall(a, body) if !body.ftv().contains(a) => Ok((src.clone(), (**body).clone(), Tag::Eq)),
            _ => Err(bad(p, "not a dummy quantifier")),
        },
        SubProof::FunCong(p1, p2) => {
            let (dom_r, dom_l, t1) = check_subproof(p1)?;
            let (cod_l, cod_r, t2) = check_subproof(p2)?;
            if t1 != Tag::Eq || t2 != Tag::Eq {
                return Err(bad(p, "premises must be equalities"));
            }
            Ok((
                Type::Arrow(Box::new(dom_l), Box::new(cod_l)),
                Type::Arrow(Box::new(dom_r), Box::new(cod_r)),
                Tag::Eq,
            ))
        }
        SubProof::EVarCong(s, delta, q) => {
            let (l, r, t) = check_subproof(q)?;
            if t != Tag::Eq {
                return Err(bad(p, "premise must be an equality"));
            }
            let wrap = |u| Type::EVar(s.clone(), delta.clone(), Box::new(u));
            Ok((wrap(l), wrap(r), Tag::Eq))
        }
        SubProof::QuantCong(a, q) => {
            let (l, r, t) = check_subproof(q)?;
            Ok((Type::Forall(a.clone(), Box::new(l)), Type::Forall(a.clone(), Box::new(r)), t))
        }
        SubProof::Refl(t) => Ok((t.clone(), t.clone(), Tag::Eq)),
        SubProof::Trans(p1, p2) => {
            let (l1, r1, t1) = check_subproof(p1)?;
            let (l2, r2, t2) = check_subproof(p2)?;
            if t1 != Tag::Eq || t2 != Tag::Eq {
                return Err(bad(p, "premises must be equalities"));
            }
            if !alpha_eq(&r1, &l2) {
                return Err(bad(p, format!("`{r1}` and `{l2}` do not meet")));
            }
            Ok((l1, r2, Tag::Eq))
        }
    }
}

/// Symmetry of the equality rules. Fails on instantiation.
pub fn invert(p: &SubProof) -> Option<SubProof> {
    Some(match p {
        SubProof::Inst(..) => return None,
        SubProof::QuantComm(src) => match src {
            Type::Forall(a1, inner) => match &**inner {
                Type::Forall(a2, body) => SubProof::QuantComm(Type::Forall(
                    a2.clone(),
                    Box::new(Type::Forall(a1.clone(), body.clone())),
                )),
                _ => return None,
            },
            _ => return None,
        },
        SubProof::DummyIn(t, a) => SubProof::DummyElim(Type::Forall(a.clone(), Box::new(t.clone()))),
        SubProof::DummyElim(src) => match src {
            Type::Forall(a, body) => SubProof::DummyIn((**body).clone(), a.clone()),
            _ => return None,
        },
        SubProof::FunCong(p1, p2) => SubProof::FunCong(Box::new(invert(p1)?), Box::new(invert(p2)?)),
        SubProof::EVarCong(s, d, q) => SubProof::EVarCong(s.clone(), d.clone(), Box::new(invert(q)?)),
        SubProof::QuantCong(a, q) => SubProof::QuantCong(a.clone(), Box::new(invert(q)?)),
        SubProof::Refl(t) => SubProof::Refl(t.clone()),
        SubProof::Trans(p1, p2) => SubProof::Trans(Box::new(invert(p2)?), Box::new(invert(p1)?)),
    })
}

fn is_refl(p: &SubProof) -> bool {
    matches!(p, SubProof::Refl(_))
}

fn under(prefix: &[Name], p: SubProof) -> SubProof {
    prefix.iter().rev().fold(p, |acc, a| SubProof::QuantCong(a.clone(), Box::new(acc)))
}

fn chain(steps: Vec<SubProof>, start: &Type) -> SubProof {
    steps
        .into_iter()
        .reduce(|acc, p| SubProof::Trans(Box::new(acc), Box::new(p)))
        .unwrap_or_else(|| SubProof::Refl(start.clone()))
}

// Rename binders so that none shadows another or a free variable.
fn apart(t: &Type, used: &mut VarSet) -> Type {
    match t {
        Type::Var(_) => t.clone(),
        Type::Arrow(d, c) => {
            let d = apart(d, used);
            Type::Arrow(Box::new(d), Box::new(apart(c, used)))
        }
        Type::Forall(a, b) => {
            if used.insert(a.clone()) {
                Type::Forall(a.clone(), Box::new(apart(b, used)))
            } else {
                let a2 = fresh_name(a, used);
                used.insert(a2.clone());
                let b = rename_free(b, a, &a2);
                Type::Forall(a2, Box::new(apart(&b, used)))
            }
        }
        Type::EVar(s, d, b) => Type::EVar(s.clone(), d.clone(), Box::new(apart(b, used))),
    }
}

fn type_names(t: &Type) -> VarSet {
    let mut out = VarSet::new();
    all_tvar_names(t, &mut out);
    out
}

// A proof of `t ≤= t'` with `t'` α-equal to the canonical form of `t`.
// Binders of `t` must be pairwise distinct and distinct from its free
// variables.
fn to_canon(t: &Type) -> (SubProof, Type) {
    match t {
        Type::Var(_) => (SubProof::Refl(t.clone()), t.clone()),
        Type::Arrow(d, c) => {
            let (pd, d2) = to_canon(d);
            let (pc, c2) = to_canon(c);
            let out = Type::Arrow(Box::new(d2), Box::new(c2));
            if is_refl(&pd) && is_refl(&pc) {
                return (SubProof::Refl(t.clone()), t.clone());
            }
            (SubProof::FunCong(Box::new(invert(&pd).expect("equality")), Box::new(pc)), out)
        }
        Type::EVar(s, delta, b) => {
            let (pb, b2) = to_canon(b);
            if is_refl(&pb) {
                return (SubProof::Refl(t.clone()), t.clone());
            }
            (
                SubProof::EVarCong(s.clone(), delta.clone(), Box::new(pb)),
                Type::EVar(s.clone(), delta.clone(), Box::new(b2)),
            )
        }
        Type::Forall(..) => {
            let (binders, body) = peel_foralls(t);
            let (pb, body2) = to_canon(body);
            let mut steps = Vec::new();
            if !is_refl(&pb) {
                steps.push(under(&binders, pb));
            }
            let mut list = binders;
            let free = body2.ftv();
            let swap = |list: &mut Vec<Name>, j: usize, steps: &mut Vec<SubProof>| {
                let src = wrap_foralls(&list[j..], body2.clone());
                steps.push(under(&list[..j], SubProof::QuantComm(src)));
                list.swap(j, j + 1);
            };
            while let Some(i) = list.iter().position(|b| !free.contains(b)) {
                for j in i..list.len() - 1 {
                    swap(&mut list, j, &mut steps);
                }
                let last = list.len() - 1;
                let src = wrap_foralls(&list[last..], body2.clone());
                steps.push(under(&list[..last], SubProof::DummyElim(src)));
                list.pop();
            }
            let order = block_order(&list, &body2);
            let rank = |b: &Name| order.iter().position(|o| o == b).expect("binder");
            // Bubble sort keeps ties in place, as a stable sort would.
            let n = list.len();
            for pass in 0..n {
                for j in 0..n.saturating_sub(pass + 1) {
                    if rank(&list[j]) > rank(&list[j + 1]) {
                        swap(&mut list, j, &mut steps);
                    }
                }
            }
            let out = wrap_foralls(&list, body2.clone());
            (chain(steps, t), out)
        }
    }
}

/// A proof of `t1 ≤= t2` for types equal up to the quantifier theory.
pub fn eq_proof(t1: &Type, t2: &Type) -> Option<SubProof> {
    if alpha_eq(t1, t2) {
        return Some(SubProof::Refl(t1.clone()));
    }
    if !type_eq(t1, t2) {
        return None;
    }
    let mut used1 = t1.ftv();
    let (p1, c1) = to_canon(&apart(t1, &mut used1));
    let mut used2 = t2.ftv();
    let (p2, c2) = to_canon(&apart(t2, &mut used2));
    if !alpha_eq(&c1, &c2) {
        return None;
    }
    Some(SubProof::Trans(Box::new(p1), Box::new(invert(&p2)?)))
}

// ------------------------------------------------------------ skeletons

impl NeqSkeleton {
    pub fn term(&self) -> Term {
        match self {
            NeqSkeleton::Var(x, _) => Term::Var(x.clone()),
            NeqSkeleton::Abs(x, b) => Term::Abs(x.clone(), Box::new(b.term())),
            NeqSkeleton::App(f, a) => Term::App(Box::new(f.term()), Box::new(a.term())),
            NeqSkeleton::Forall(_, b)
            | NeqSkeleton::EVar(_, _, b)
            | NeqSkeleton::Sub(b, _)
            | NeqSkeleton::EnvSub(b, _, _)
            | NeqSkeleton::Weak(b, _) => b.term(),
        }
    }
}

fn same_env(g1: &TypeEnv, g2: &TypeEnv) -> bool {
    g1.len() == g2.len()
        && g1.support() == g2.support()
        && g1.iter().all(|(x, t)| g2.get(x).is_some_and(|u| alpha_eq(t, u)))
}

pub fn check_neq(q: &NeqSkeleton) -> Result<NeqJudgement, NeqError> {
    match q {
        NeqSkeleton::Var(x, env) => {
            if let Some(d) = env.duplicate() {
                return Err(rule(q, format!("`{d}` bound twice")));
            }
            let t = env.get(x).ok_or_else(|| rule(q, format!("`{x}` is unbound")))?;
            Ok(NeqJudgement { term: Term::Var(x.clone()), env: env.clone(), rtype: t.clone() })
        }
        NeqSkeleton::Abs(x, b) => {
            let j = check_neq(b)?;
            let tx = j.env.get(x).cloned().ok_or_else(|| rule(q, format!("`{x}` is unbound")))?;
            Ok(NeqJudgement {
                term: Term::Abs(x.clone(), Box::new(j.term)),
                env: j.env.without(x),
                rtype: Type::Arrow(Box::new(tx), Box::new(j.rtype)),
            })
        }
        NeqSkeleton::App(f, a) => {
            let jf = check_neq(f)?;
            let ja = check_neq(a)?;
            if !same_env(&jf.env, &ja.env) {
                return Err(rule(q, format!("environments differ: {} vs {}", jf.env, ja.env)));
            }
            let Type::Arrow(d, c) = &jf.rtype else {
                return Err(rule(q, format!("`{}` is not an arrow", jf.rtype)));
            };
            if !alpha_eq(d, &ja.rtype) {
                return Err(rule(q, format!("argument `{}` does not match `{d}`", ja.rtype)));
            }
            Ok(NeqJudgement {
                term: Term::App(Box::new(jf.term), Box::new(ja.term)),
                env: jf.env,
                rtype: (**c).clone(),
            })
        }
        NeqSkeleton::Forall(a, b) => {
            let j = check_neq(b)?;
            if j.env.ftv().contains(a) {
                return Err(rule(q, format!("`{a}` is free in the environment")));
            }
            Ok(NeqJudgement { rtype: Type::Forall(a.clone(), Box::new(j.rtype)), ..j })
        }
        NeqSkeleton::EVar(s, delta, b) => {
            let j = check_neq(b)?;
            if let Some(m) = j.env.ftv().difference(delta).next() {
                return Err(rule(q, format!("forbidden set misses `{m}`")));
            }
            Ok(NeqJudgement { rtype: Type::EVar(s.clone(), delta.clone(), Box::new(j.rtype)), ..j })
        }
        NeqSkeleton::Sub(b, p) => {
            let j = check_neq(b)?;
            let (l, r, _) = check_subproof(p)?;
            if !alpha_eq(&l, &j.rtype) {
                return Err(rule(q, format!("proof starts at `{l}`, not `{}`", j.rtype)));
            }
            Ok(NeqJudgement { rtype: r, ..j })
        }
        NeqSkeleton::EnvSub(b, y, p) => {
            let j = check_neq(b)?;
            let (l, r, tag) = check_subproof(p)?;
            if tag != Tag::Eq {
                return Err(rule(q, "environment rewriting needs an equality"));
            }
            let ty = j.env.get(y).ok_or_else(|| rule(q, format!("`{y}` is unbound")))?;
            if !alpha_eq(&r, ty) {
                return Err(rule(q, format!("proof ends at `{r}`, not `{ty}`")));
            }
            Ok(NeqJudgement { env: j.env.replaced(y, l), ..j })
        }
        NeqSkeleton::Weak(b, extra) => {
            let j = check_neq(b)?;
            if !extra.is_well_formed() || extra.iter().any(|(x, _)| j.env.contains(x)) {
                return Err(rule(q, "weakening overlaps the environment"));
            }
            Ok(NeqJudgement { env: j.env.concat(extra), ..j })
        }
    }
}

// ------------------------------------------------------- translations

// Returns the skeleton with its environment and type.
fn to_neq_rec(q: &Skeleton) -> Result<(NeqSkeleton, TypeEnv, Type), NeqError> {
    let eq = |t1: &Type, t2: &Type| {
        eq_proof(t1, t2).ok_or_else(|| NeqError::NotSolved(format!("{t1} <= {t2}")))
    };
    match q {
        Skeleton::Var(x, env) => {
            let t = env
                .get(x)
                .cloned()
                .ok_or_else(|| TypeError::UnboundVariable { var: x.clone(), node: q.to_string() })?;
            Ok((NeqSkeleton::Var(x.clone(), env.clone()), env.clone(), t))
        }
        Skeleton::Abs(x, b) => {
            let (n, env, t) = to_neq_rec(b)?;
            let tx = env
                .get(x)
                .cloned()
                .ok_or_else(|| TypeError::UnboundVariable { var: x.clone(), node: q.to_string() })?;
            Ok((NeqSkeleton::Abs(x.clone(), Box::new(n)), env.without(x), Type::Arrow(Box::new(tx), Box::new(t))))
        }
        Skeleton::App(f, a) => {
            let (mut nf, ef, tf) = to_neq_rec(f)?;
            let (mut na, ea, ta) = to_neq_rec(a)?;
            if !env_eq(&ef, &ea) {
                return Err(TypeError::EnvMismatch { left: ef, right: ea, node: q.to_string() }.into());
            }
            for (y, ty) in ef.iter() {
                let ty_a = ea.get(y).expect("same support");
                if !alpha_eq(ty, ty_a) {
                    na = NeqSkeleton::EnvSub(Box::new(na), y.clone(), eq(ty, ty_a)?);
                }
            }
            let (_, cod) = as_arrow(&tf).ok_or_else(|| TypeError::NotAnArrow { ty: tf.clone(), node: q.to_string() })?;
            let want = Type::Arrow(Box::new(ta.clone()), Box::new(cod.clone()));
            if !alpha_eq(&tf, &want) {
                nf = NeqSkeleton::Sub(Box::new(nf), eq(&tf, &want)?);
            }
            Ok((NeqSkeleton::App(Box::new(nf), Box::new(na)), ef, cod))
        }
        Skeleton::Forall(a, b) => {
            let (n, env, t) = to_neq_rec(b)?;
            Ok((NeqSkeleton::Forall(a.clone(), Box::new(n)), env, Type::Forall(a.clone(), Box::new(t))))
        }
        Skeleton::EVar(s, delta, b) => {
            let (n, env, t) = to_neq_rec(b)?;
            Ok((
                NeqSkeleton::EVar(s.clone(), delta.clone(), Box::new(n)),
                env,
                Type::EVar(s.clone(), delta.clone(), Box::new(t)),
            ))
        }
        Skeleton::Sub(b, t2) => {
            let (mut n, env, t1) = to_neq_rec(b)?;
            match leq_f_witness(&t1, t2) {
                None => return Err(NeqError::NotSolved(format!("{t1} <= {t2}"))),
                Some(Witness::Eq) => n = NeqSkeleton::Sub(Box::new(n), eq(&t1, t2)?),
                Some(Witness::Inst { source, arg }) => {
                    if !alpha_eq(&t1, &source) {
                        n = NeqSkeleton::Sub(Box::new(n), eq(&t1, &source)?);
                    }
                    let p = SubProof::Inst(source, arg);
                    let (_, r, _) = check_subproof(&p)?;
                    n = NeqSkeleton::Sub(Box::new(n), p);
                    if !alpha_eq(&r, t2) {
                        n = NeqSkeleton::Sub(Box::new(n), eq(&r, t2)?);
                    }
                }
            }
            Ok((n, env, t2.clone()))
        }
        Skeleton::Weak(b, extra) => {
            let (n, env, t) = to_neq_rec(b)?;
            Ok((NeqSkeleton::Weak(Box::new(n), extra.clone()), env.concat(extra), t))
        }
    }
}

/// Translate a valid skeleton whose constraint is solved under `≤F`.
pub fn to_neq(q: &Skeleton) -> Result<NeqSkeleton, NeqError> {
    check_skeleton(q)?;
    Ok(to_neq_rec(q)?.0)
}

fn retype_var(q: &Skeleton, y: &str, t: &Type) -> Skeleton {
    let env_fix = |env: &TypeEnv| if env.contains(y) { env.replaced(y, t.clone()) } else { env.clone() };
    match q {
        Skeleton::Var(x, env) => Skeleton::Var(x.clone(), env_fix(env)),
        Skeleton::Abs(x, _) if x == y => q.clone(),
        Skeleton::Abs(x, b) => Skeleton::Abs(x.clone(), Box::new(retype_var(b, y, t))),
        Skeleton::App(f, a) => Skeleton::App(Box::new(retype_var(f, y, t)), Box::new(retype_var(a, y, t))),
        Skeleton::Forall(a, b) => Skeleton::Forall(a.clone(), Box::new(retype_var(b, y, t))),
        Skeleton::EVar(s, d, b) => Skeleton::EVar(s.clone(), d.clone(), Box::new(retype_var(b, y, t))),
        Skeleton::Sub(b, u) => Skeleton::Sub(Box::new(retype_var(b, y, t)), u.clone()),
        Skeleton::Weak(b, extra) => Skeleton::Weak(Box::new(retype_var(b, y, t)), env_fix(extra)),
    }
}

/// Back to an ordinary skeleton. Equality steps become plain subtyping
/// nodes and environment rewrites are folded into the leaves.
pub fn from_neq(q: &NeqSkeleton) -> Result<Skeleton, NeqError> {
    Ok(match q {
        NeqSkeleton::Var(x, env) => Skeleton::Var(x.clone(), env.clone()),
        NeqSkeleton::Abs(x, b) => Skeleton::Abs(x.clone(), Box::new(from_neq(b)?)),
        NeqSkeleton::App(f, a) => Skeleton::App(Box::new(from_neq(f)?), Box::new(from_neq(a)?)),
        NeqSkeleton::Forall(a, b) => Skeleton::Forall(a.clone(), Box::new(from_neq(b)?)),
        NeqSkeleton::EVar(s, d, b) => Skeleton::EVar(s.clone(), d.clone(), Box::new(from_neq(b)?)),
        NeqSkeleton::Sub(b, p) => {
            let (_, r, _) = check_subproof(p)?;
            Skeleton::Sub(Box::new(from_neq(b)?), r)
        }
        NeqSkeleton::EnvSub(b, y, p) => {
            let (l, _, _) = check_subproof(p)?;
            retype_var(&from_neq(b)?, y, &l)
        }
        NeqSkeleton::Weak(b, extra) => Skeleton::Weak(Box::new(from_neq(b)?), extra.clone()),
    })
}

// ----------------------------------------------------------------- size

pub fn sz(q: &NeqSkeleton) -> usize {
    match q {
        NeqSkeleton::Var(..) => 2,
        NeqSkeleton::Abs(..) => 1,
        NeqSkeleton::App(f, a) => 1 + sz(f) + sz(a),
        NeqSkeleton::Forall(_, b)
        | NeqSkeleton::EVar(_, _, b)
        | NeqSkeleton::EnvSub(b, _, _)
        | NeqSkeleton::Weak(b, _) => 1 + sz(b),
        NeqSkeleton::Sub(b, p) => sz_sub(b, p),
    }
}

fn sz_sub(b: &NeqSkeleton, p: &SubProof) -> usize {
    match p {
        SubProof::Inst(..)
        | SubProof::QuantComm(_)
        | SubProof::DummyElim(_)
        | SubProof::FunCong(..)
        | SubProof::Refl(_) => 1 + sz(b),
        SubProof::DummyIn(..) => 2 + sz(b),
        SubProof::QuantCong(_, p) => 1 + sz_sub(b, p),
        SubProof::EVarCong(_, _, p) => 2 + sz_sub(b, p),
        SubProof::Trans(p1, p2) => 1 + sz_sub(&NeqSkeleton::Sub(Box::new(b.clone()), (**p1).clone()), p2),
    }
}

// ------------------------------------------------------- substitution

fn proof_names(p: &SubProof, out: &mut VarSet) {
    match p {
        SubProof::Inst(t, u) => {
            all_tvar_names(t, out);
            all_tvar_names(u, out);
        }
        SubProof::QuantComm(t) | SubProof::DummyElim(t) | SubProof::Refl(t) => all_tvar_names(t, out),
        SubProof::DummyIn(t, a) => {
            all_tvar_names(t, out);
            out.insert(a.clone());
        }
        SubProof::FunCong(p1, p2) | SubProof::Trans(p1, p2) => {
            proof_names(p1, out);
            proof_names(p2, out);
        }
        SubProof::EVarCong(_, d, q) => {
            out.extend(d.iter().cloned());
            proof_names(q, out);
        }
        SubProof::QuantCong(a, q) => {
            out.insert(a.clone());
            proof_names(q, out);
        }
    }
}

fn env_names(env: &TypeEnv, out: &mut VarSet) {
    for (_, t) in env.iter() {
        all_tvar_names(t, out);
    }
}

fn neq_names(q: &NeqSkeleton, out: &mut VarSet) {
    match q {
        NeqSkeleton::Var(_, env) => env_names(env, out),
        NeqSkeleton::Abs(_, b) => neq_names(b, out),
        NeqSkeleton::App(f, a) => {
            neq_names(f, out);
            neq_names(a, out);
        }
        NeqSkeleton::Forall(a, b) => {
            out.insert(a.clone());
            neq_names(b, out);
        }
        NeqSkeleton::EVar(_, d, b) => {
            out.extend(d.iter().cloned());
            neq_names(b, out);
        }
        NeqSkeleton::Sub(b, p) | NeqSkeleton::EnvSub(b, _, p) => {
            neq_names(b, out);
            proof_names(p, out);
        }
        NeqSkeleton::Weak(b, env) => {
            neq_names(b, out);
            env_names(env, out);
        }
    }
}

fn clash(phi: &Substitution, a: &str) -> bool {
    phi.ftv().contains(a)
}

fn fresh_for(phi: &Substitution, a: &str, names: VarSet) -> Name {
    let mut avoid = phi.ftv();
    avoid.extend(names);
    avoid.insert(a.to_string());
    fresh_name(a, &avoid)
}

/// Apply a type-variable substitution to a proof.
pub fn subst_proof(phi: &Substitution, p: &SubProof) -> SubProof {
    let st = |t: &Type| subst_type(phi, t);
    match p {
        SubProof::Inst(t, u) => SubProof::Inst(st(t), st(u)),
        SubProof::QuantComm(t) => SubProof::QuantComm(st(t)),
        SubProof::DummyElim(t) => SubProof::DummyElim(st(t)),
        SubProof::Refl(t) => SubProof::Refl(st(t)),
        SubProof::DummyIn(t, a) => {
            let t2 = st(t);
            if t2.ftv().contains(a) {
                let a2 = fresh_name(a, &type_names(&t2));
                SubProof::DummyIn(t2, a2)
            } else {
                SubProof::DummyIn(t2, a.clone())
            }
        }
        SubProof::FunCong(p1, p2) => SubProof::FunCong(Box::new(subst_proof(phi, p1)), Box::new(subst_proof(phi, p2))),
        SubProof::Trans(p1, p2) => SubProof::Trans(Box::new(subst_proof(phi, p1)), Box::new(subst_proof(phi, p2))),
        SubProof::EVarCong(s, d, q) => SubProof::EVarCong(
            s.clone(),
            crate::expand::subst_set(phi, d),
            Box::new(subst_proof(phi, q)),
        ),
        SubProof::QuantCong(a, q) => {
            if clash(phi, a) {
                let mut names = VarSet::new();
                proof_names(q, &mut names);
                let a2 = fresh_for(phi, a, names);
                let q2 = subst_proof(&Substitution::single_type(a, Type::Var(a2.clone())), q);
                SubProof::QuantCong(a2, Box::new(subst_proof(phi, &q2)))
            } else {
                SubProof::QuantCong(a.clone(), Box::new(subst_proof(phi, q)))
            }
        }
    }
}

/// Apply a type-variable substitution to a skeleton.
pub fn subst_neq(phi: &Substitution, q: &NeqSkeleton) -> NeqSkeleton {
    let se = |env: &TypeEnv| crate::expand::subst_env(phi, env);
    match q {
        NeqSkeleton::Var(x, env) => NeqSkeleton::Var(x.clone(), se(env)),
        NeqSkeleton::Abs(x, b) => NeqSkeleton::Abs(x.clone(), Box::new(subst_neq(phi, b))),
        NeqSkeleton::App(f, a) => NeqSkeleton::App(Box::new(subst_neq(phi, f)), Box::new(subst_neq(phi, a))),
        NeqSkeleton::Forall(a, b) => {
            if clash(phi, a) {
                let mut names = VarSet::new();
                neq_names(b, &mut names);
                let a2 = fresh_for(phi, a, names);
                let b2 = subst_neq(&Substitution::single_type(a, Type::Var(a2.clone())), b);
                NeqSkeleton::Forall(a2, Box::new(subst_neq(phi, &b2)))
            } else {
                NeqSkeleton::Forall(a.clone(), Box::new(subst_neq(phi, b)))
            }
        }
        NeqSkeleton::EVar(s, d, b) => {
            NeqSkeleton::EVar(s.clone(), crate::expand::subst_set(phi, d), Box::new(subst_neq(phi, b)))
        }
        NeqSkeleton::Sub(b, p) => NeqSkeleton::Sub(Box::new(subst_neq(phi, b)), subst_proof(phi, p)),
        NeqSkeleton::EnvSub(b, y, p) => {
            NeqSkeleton::EnvSub(Box::new(subst_neq(phi, b)), y.clone(), subst_proof(phi, p))
        }
        NeqSkeleton::Weak(b, env) => NeqSkeleton::Weak(Box::new(subst_neq(phi, b)), se(env)),
    }
}

fn rename_tvar_neq(q: &NeqSkeleton, from: &str, to: &str) -> NeqSkeleton {
    subst_neq(&Substitution::single_type(from, Type::Var(to.to_string())), q)
}

fn rename_tvar_proof(p: &SubProof, from: &str, to: &str) -> SubProof {
    subst_proof(&Substitution::single_type(from, Type::Var(to.to_string())), p)
}

/// Term variables mentioned anywhere in a skeleton.
pub fn neq_term_names(q: &NeqSkeleton, out: &mut VarSet) {
    let env_keys = |env: &TypeEnv, out: &mut VarSet| out.extend(env.iter().map(|(x, _)| x.clone()));
    match q {
        NeqSkeleton::Var(x, env) => {
            out.insert(x.clone());
            env_keys(env, out);
        }
        NeqSkeleton::Abs(x, b) => {
            out.insert(x.clone());
            neq_term_names(b, out);
        }
        NeqSkeleton::App(f, a) => {
            neq_term_names(f, out);
            neq_term_names(a, out);
        }
        NeqSkeleton::Forall(_, b) | NeqSkeleton::EVar(_, _, b) | NeqSkeleton::Sub(b, _) => neq_term_names(b, out),
        NeqSkeleton::EnvSub(b, y, _) => {
            out.insert(y.clone());
            neq_term_names(b, out);
        }
        NeqSkeleton::Weak(b, env) => {
            env_keys(env, out);
            neq_term_names(b, out);
        }
    }
}

/// Rename the term variable `from` to `to` where it is free. `to` must be
/// unused in `q`.
pub fn rename_term_var(q: &NeqSkeleton, from: &str, to: &str) -> NeqSkeleton {
    let re = |env: &TypeEnv| {
        TypeEnv(env.iter().map(|(x, t)| (if x == from { to.to_string() } else { x.clone() }, t.clone())).collect())
    };
    let rn = |x: &Name| if x == from { to.to_string() } else { x.clone() };
    match q {
        NeqSkeleton::Var(x, env) => NeqSkeleton::Var(rn(x), re(env)),
        NeqSkeleton::Abs(x, _) if x == from => q.clone(),
        NeqSkeleton::Abs(x, b) => NeqSkeleton::Abs(x.clone(), Box::new(rename_term_var(b, from, to))),
        NeqSkeleton::App(f, a) => {
            NeqSkeleton::App(Box::new(rename_term_var(f, from, to)), Box::new(rename_term_var(a, from, to)))
        }
        NeqSkeleton::Forall(a, b) => NeqSkeleton::Forall(a.clone(), Box::new(rename_term_var(b, from, to))),
        NeqSkeleton::EVar(s, d, b) => NeqSkeleton::EVar(s.clone(), d.clone(), Box::new(rename_term_var(b, from, to))),
        NeqSkeleton::Sub(b, p) => NeqSkeleton::Sub(Box::new(rename_term_var(b, from, to)), p.clone()),
        NeqSkeleton::EnvSub(b, y, p) => NeqSkeleton::EnvSub(Box::new(rename_term_var(b, from, to)), rn(y), p.clone()),
        NeqSkeleton::Weak(b, env) => NeqSkeleton::Weak(Box::new(rename_term_var(b, from, to)), re(env)),
    }
}

// ------------------------------------------------------------ transform

fn boxed(q: NeqSkeleton) -> Box<NeqSkeleton> {
    Box::new(q)
}

// Bring a `∀a.Q` to use the binder name `want`.
fn rebind(a: &str, body: NeqSkeleton, want: &str) -> NeqSkeleton {
    if a == want {
        body
    } else {
        rename_tvar_neq(&body, a, want)
    }
}

/// Pushes subtyping steps towards the leaves until a typing of an
/// abstraction ends in an abstraction node, a typing at a quantified type in
/// a quantifier node, and so on. Never increases `sz`.
pub fn transform(q: &NeqSkeleton) -> NeqSkeleton {
    match q {
        NeqSkeleton::Var(..) | NeqSkeleton::App(..) | NeqSkeleton::Abs(..) | NeqSkeleton::EVar(..) => q.clone(),
        NeqSkeleton::Forall(a, b) => NeqSkeleton::Forall(a.clone(), boxed(transform(b))),
        NeqSkeleton::EnvSub(b, y, p) => match transform(b) {
            NeqSkeleton::Abs(x, inner) => NeqSkeleton::Abs(x, boxed(NeqSkeleton::EnvSub(inner, y.clone(), p.clone()))),
            NeqSkeleton::EVar(s, d, inner) => {
                NeqSkeleton::EVar(s, d, boxed(NeqSkeleton::EnvSub(inner, y.clone(), p.clone())))
            }
            NeqSkeleton::Forall(a, inner) => {
                // The proof mentions only variables free in the
                // environment, but its inner binders may clash.
                let mut names = VarSet::new();
                proof_names(p, &mut names);
                if names.contains(&a) {
                    let mut avoid = names;
                    neq_names(&inner, &mut avoid);
                    let a2 = fresh_name(&a, &avoid);
                    let inner = rename_tvar_neq(&inner, &a, &a2);
                    NeqSkeleton::Forall(a2, boxed(NeqSkeleton::EnvSub(boxed(inner), y.clone(), p.clone())))
                } else {
                    NeqSkeleton::Forall(a, boxed(NeqSkeleton::EnvSub(inner, y.clone(), p.clone())))
                }
            }
            other => NeqSkeleton::EnvSub(boxed(other), y.clone(), p.clone()),
        },
        NeqSkeleton::Weak(b, extra) => match transform(b) {
            NeqSkeleton::Abs(x, inner) => {
                if extra.contains(&x) {
                    let mut used = VarSet::new();
                    neq_term_names(&inner, &mut used);
                    used.extend(extra.support());
                    let x2 = fresh_name(&x, &used);
                    let inner = rename_term_var(&inner, &x, &x2);
                    NeqSkeleton::Abs(x2, boxed(NeqSkeleton::Weak(boxed(inner), extra.clone())))
                } else {
                    NeqSkeleton::Abs(x, boxed(NeqSkeleton::Weak(inner, extra.clone())))
                }
            }
            NeqSkeleton::Forall(a, inner) => {
                if extra.ftv().contains(&a) {
                    let mut avoid = extra.ftv();
                    neq_names(&inner, &mut avoid);
                    let a2 = fresh_name(&a, &avoid);
                    let inner = rename_tvar_neq(&inner, &a, &a2);
                    NeqSkeleton::Forall(a2, boxed(NeqSkeleton::Weak(boxed(inner), extra.clone())))
                } else {
                    NeqSkeleton::Forall(a, boxed(NeqSkeleton::Weak(inner, extra.clone())))
                }
            }
            NeqSkeleton::EVar(s, d, inner) if extra.ftv().is_subset(&d) => {
                NeqSkeleton::EVar(s, d, boxed(NeqSkeleton::Weak(inner, extra.clone())))
            }
            other => NeqSkeleton::Weak(boxed(other), extra.clone()),
        },
        NeqSkeleton::Sub(b, p) => transform_sub(b, p),
    }
}

fn transform_sub(b: &NeqSkeleton, p: &SubProof) -> NeqSkeleton {
    let fallback = |t: NeqSkeleton| NeqSkeleton::Sub(boxed(t), p.clone());
    match p {
        SubProof::Refl(_) => transform(b),
        SubProof::Trans(p1, p2) => {
            transform(&NeqSkeleton::Sub(boxed(NeqSkeleton::Sub(boxed(b.clone()), (**p1).clone())), (**p2).clone()))
        }
        SubProof::DummyIn(..) => {
            let mut avoid = VarSet::new();
            neq_names(b, &mut avoid);
            proof_names(p, &mut avoid);
            let a = fresh_name("a", &avoid);
            NeqSkeleton::Forall(a, boxed(b.clone()))
        }
        SubProof::Inst(_, arg) => match transform(b) {
            NeqSkeleton::Forall(a, inner) => transform(&subst_neq(&Substitution::single_type(&a, arg.clone()), &inner)),
            other => fallback(other),
        },
        SubProof::DummyElim(_) => match transform(b) {
            NeqSkeleton::Forall(_, inner) => transform(&inner),
            other => fallback(other),
        },
        SubProof::QuantComm(_) => match transform(b) {
            NeqSkeleton::Forall(a1, q1) => match transform(&q1) {
                NeqSkeleton::Forall(a2, q2) => NeqSkeleton::Forall(a2, boxed(NeqSkeleton::Forall(a1, q2))),
                other => fallback(NeqSkeleton::Forall(a1, boxed(other))),
            },
            other => fallback(other),
        },
        SubProof::QuantCong(a, inner_p) => match transform(b) {
            NeqSkeleton::Forall(a2, q1) => {
                let (name, q1, inner_p) = if &a2 == a {
                    (a2, *q1, (**inner_p).clone())
                } else {
                    let mut avoid = VarSet::new();
                    neq_names(&q1, &mut avoid);
                    proof_names(inner_p, &mut avoid);
                    avoid.insert(a.clone());
                    avoid.insert(a2.clone());
                    let f = fresh_name(a, &avoid);
                    (f.clone(), rebind(&a2, *q1, &f), rename_tvar_proof(inner_p, a, &f))
                };
                NeqSkeleton::Forall(name, boxed(transform(&NeqSkeleton::Sub(boxed(q1), inner_p))))
            }
            other => fallback(other),
        },
        SubProof::EVarCong(_, _, inner_p) => match transform(b) {
            NeqSkeleton::EVar(s, d, q1) => NeqSkeleton::EVar(s, d, boxed(NeqSkeleton::Sub(q1, (**inner_p).clone()))),
            other => fallback(other),
        },
        SubProof::FunCong(p1, p2) => match transform(b) {
            NeqSkeleton::Abs(x, q1) => NeqSkeleton::Abs(
                x.clone(),
                boxed(NeqSkeleton::EnvSub(boxed(NeqSkeleton::Sub(q1, (**p2).clone())), x, (**p1).clone())),
            ),
            other => fallback(other),
        },
    }
}

// ------------------------------------------------------------- printing

impl Display for SubProof {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            SubProof::Inst(t, u) => write!(f, "inst({t}; {u})"),
            SubProof::QuantComm(t) => write!(f, "comm({t})"),
            SubProof::DummyIn(t, a) => write!(f, "intro({t}; {a})"),
            SubProof::DummyElim(t) => write!(f, "elim({t})"),
            SubProof::FunCong(p1, p2) => write!(f, "fun({p1}, {p2})"),
            SubProof::EVarCong(s, d, p) => write!(f, "{s}^{}({p})", print_set(d)),
            SubProof::QuantCong(a, p) => write!(f, "all {a}.({p})"),
            SubProof::Refl(t) => write!(f, "refl({t})"),
            SubProof::Trans(p1, p2) => write!(f, "({p1}; {p2})"),
        }
    }
}

impl Display for NeqSkeleton {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            NeqSkeleton::Var(x, env) => {
                let e = env.to_string();
                write!(f, "{x}<{}>", &e[1..e.len() - 1])
            }
            NeqSkeleton::Abs(x, b) => write!(f, "(\\{x}. {b})"),
            NeqSkeleton::App(a, b) => write!(f, "({a} @ {b})"),
            NeqSkeleton::Forall(a, b) => write!(f, "all {a}. {b}"),
            NeqSkeleton::EVar(s, d, b) => write!(f, "{s}^{}({b})", print_set(d)),
            NeqSkeleton::Sub(b, p) => write!(f, "({b} |> {p})"),
            NeqSkeleton::EnvSub(b, y, p) => write!(f, "({b} [{y}: {p}])"),
            NeqSkeleton::Weak(b, env) => write!(f, "({b} + {env})"),
        }
    }
}
