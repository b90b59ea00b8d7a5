//! Call-by-value reduction, on terms and on typing derivations.

use crate::canon::type_eq;
use crate::neq::{
    check_neq, check_subproof, from_neq, invert, neq_term_names, rename_term_var as rename_neq_var, to_neq,
    transform, NeqError, NeqSkeleton,
};
use crate::solve::{solved, F};
use crate::syntax::{fresh_name, Skeleton, Term, TypeEnv, VarSet};
use crate::typing::{check_skeleton, env_eq};

fn term_names(m: &Term, out: &mut VarSet) {
    match m {
        Term::Var(x) => {
            out.insert(x.clone());
        }
        Term::Abs(x, b) => {
            out.insert(x.clone());
            term_names(b, out);
        }
        Term::App(f, a) => {
            term_names(f, out);
            term_names(a, out);
        }
    }
}

fn rename_free_var(m: &Term, from: &str, to: &str) -> Term {
    match m {
        Term::Var(x) if x == from => Term::Var(to.to_string()),
        Term::Var(_) => m.clone(),
        Term::Abs(x, _) if x == from => m.clone(),
        Term::Abs(x, b) => Term::Abs(x.clone(), Box::new(rename_free_var(b, from, to))),
        Term::App(f, a) => Term::App(Box::new(rename_free_var(f, from, to)), Box::new(rename_free_var(a, from, to))),
    }
}

/// Capture-avoiding `m[x := v]`.
pub fn subst_term(m: &Term, x: &str, v: &Term) -> Term {
    match m {
        Term::Var(y) if y == x => v.clone(),
        Term::Var(_) => m.clone(),
        Term::Abs(y, _) if y == x => m.clone(),
        Term::Abs(y, b) => {
            let fv = v.fv();
            if fv.contains(y) {
                let mut avoid = fv;
                term_names(b, &mut avoid);
                avoid.insert(x.to_string());
                let y2 = fresh_name(y, &avoid);
                let b2 = rename_free_var(b, y, &y2);
                Term::Abs(y2, Box::new(subst_term(&b2, x, v)))
            } else {
                Term::Abs(y.clone(), Box::new(subst_term(b, x, v)))
            }
        }
        Term::App(f, a) => Term::App(Box::new(subst_term(f, x, v)), Box::new(subst_term(a, x, v))),
    }
}

/// One leftmost call-by-value step, if the term is not a value or stuck.
pub fn cbv_step(m: &Term) -> Option<Term> {
    match m {
        Term::App(f, a) => {
            if !f.is_value() {
                return cbv_step(f).map(|f2| Term::App(Box::new(f2), a.clone()));
            }
            if !a.is_value() {
                return cbv_step(a).map(|a2| Term::App(f.clone(), Box::new(a2)));
            }
            match &**f {
                Term::Abs(x, b) => Some(subst_term(b, x, a)),
                _ => None,
            }
        }
        _ => None,
    }
}

/// Reduction steps from `m`, at most `limit` of them.
pub fn cbv_trace(m: &Term, limit: usize) -> Vec<Term> {
    let mut out = vec![m.clone()];
    while out.len() <= limit {
        match cbv_step(out.last().expect("nonempty")) {
            Some(n) => out.push(n),
            None => break,
        }
    }
    out
}

// ---------------------------------------------------------- derivations

fn stuck(msg: impl Into<String>) -> NeqError {
    NeqError::Stuck(msg.into())
}

// Remove `n` from a derivation whose term does not mention it.
fn strengthen(q: &NeqSkeleton, n: &str) -> NeqSkeleton {
    let b = |q: &NeqSkeleton| Box::new(strengthen(q, n));
    match q {
        NeqSkeleton::Var(x, env) => NeqSkeleton::Var(x.clone(), env.without(n)),
        NeqSkeleton::Abs(x, _) if x == n => q.clone(),
        NeqSkeleton::Abs(x, body) => NeqSkeleton::Abs(x.clone(), b(body)),
        NeqSkeleton::App(f, a) => NeqSkeleton::App(b(f), b(a)),
        NeqSkeleton::Forall(a, body) => NeqSkeleton::Forall(a.clone(), b(body)),
        NeqSkeleton::EVar(s, d, body) => NeqSkeleton::EVar(s.clone(), d.clone(), b(body)),
        NeqSkeleton::Sub(body, p) => NeqSkeleton::Sub(b(body), p.clone()),
        NeqSkeleton::EnvSub(body, y, _) if y == n => strengthen(body, n),
        NeqSkeleton::EnvSub(body, y, p) => NeqSkeleton::EnvSub(b(body), y.clone(), p.clone()),
        NeqSkeleton::Weak(body, extra) => {
            if extra.contains(n) {
                let rest = extra.without(n);
                if rest.is_empty() {
                    (**body).clone()
                } else {
                    NeqSkeleton::Weak(body.clone(), rest)
                }
            } else {
                NeqSkeleton::Weak(b(body), extra.clone())
            }
        }
    }
}

struct Value<'a> {
    skel: NeqSkeleton,
    env: TypeEnv,
    fv: &'a VarSet,
}

// Fit the value to the environment of a leaf it replaces.
fn fit(v: &Value, target: &TypeEnv) -> Result<NeqSkeleton, NeqError> {
    let mut q = v.skel.clone();
    for (n, _) in v.env.iter() {
        if !target.contains(n) {
            if v.fv.contains(n) {
                return Err(stuck(format!("value needs `{n}`, which is out of scope")));
            }
            q = strengthen(&q, n);
        }
    }
    let extra = TypeEnv(target.iter().filter(|(n, _)| !v.env.contains(n)).cloned().collect());
    if extra.is_empty() {
        Ok(q)
    } else {
        Ok(NeqSkeleton::Weak(Box::new(q), extra))
    }
}

// Substitute a value derivation for `x` in a derivation of the body.
fn subst_value(q: &NeqSkeleton, x: &str, v: &Value) -> Result<NeqSkeleton, NeqError> {
    let rec = |q: &NeqSkeleton| subst_value(q, x, v).map(Box::new);
    Ok(match q {
        NeqSkeleton::Var(y, env) if y == x => fit(v, &env.without(x))?,
        NeqSkeleton::Var(y, env) => NeqSkeleton::Var(y.clone(), env.without(x)),
        NeqSkeleton::Abs(y, _) if y == x => q.clone(),
        NeqSkeleton::Abs(y, body) => {
            if v.env.contains(y) || v.fv.contains(y) {
                let mut used = VarSet::new();
                neq_term_names(body, &mut used);
                neq_term_names(&v.skel, &mut used);
                used.insert(x.to_string());
                let y2 = fresh_name(y, &used);
                let body = rename_neq_var(body, y, &y2);
                NeqSkeleton::Abs(y2, Box::new(subst_value(&body, x, v)?))
            } else {
                NeqSkeleton::Abs(y.clone(), rec(body)?)
            }
        }
        NeqSkeleton::App(f, a) => NeqSkeleton::App(rec(f)?, rec(a)?),
        NeqSkeleton::Forall(a, body) => NeqSkeleton::Forall(a.clone(), rec(body)?),
        NeqSkeleton::EVar(s, d, body) => NeqSkeleton::EVar(s.clone(), d.clone(), rec(body)?),
        NeqSkeleton::Sub(body, p) => NeqSkeleton::Sub(rec(body)?, p.clone()),
        NeqSkeleton::EnvSub(body, y, p) if y == x => {
            let v2 = Value { skel: NeqSkeleton::Sub(Box::new(v.skel.clone()), p.clone()), env: v.env.clone(), fv: v.fv };
            subst_value(body, x, &v2)?
        }
        NeqSkeleton::EnvSub(body, y, p) => {
            if v.env.contains(y) {
                let back = invert(p).ok_or_else(|| stuck("environment rewrite is not an equality"))?;
                let (_, r, _) = check_subproof(p)?;
                let v2 = Value {
                    skel: NeqSkeleton::EnvSub(Box::new(v.skel.clone()), y.clone(), back),
                    env: v.env.replaced(y, r),
                    fv: v.fv,
                };
                NeqSkeleton::EnvSub(Box::new(subst_value(body, x, &v2)?), y.clone(), p.clone())
            } else {
                NeqSkeleton::EnvSub(rec(body)?, y.clone(), p.clone())
            }
        }
        NeqSkeleton::Weak(body, extra) => {
            if extra.contains(x) {
                let rest = extra.without(x);
                if rest.is_empty() {
                    (**body).clone()
                } else {
                    NeqSkeleton::Weak(body.clone(), rest)
                }
            } else {
                if let Some((n, _)) = extra.iter().find(|(n, _)| v.fv.contains(n)) {
                    return Err(stuck(format!("value needs `{n}`, which is weakened away")));
                }
                NeqSkeleton::Weak(rec(body)?, extra.clone())
            }
        }
    })
}

fn beta(f: &NeqSkeleton, a: &NeqSkeleton) -> Result<NeqSkeleton, NeqError> {
    match transform(f) {
        NeqSkeleton::Abs(x, body) => {
            let ja = check_neq(a)?;
            let fv = ja.term.fv();
            let v = Value { skel: a.clone(), env: ja.env, fv: &fv };
            subst_value(&body, &x, &v)
        }
        other => Err(stuck(format!("function derivation does not end in an abstraction: {other}"))),
    }
}

/// The derivation for the call-by-value reduct.
pub fn step_neq(q: &NeqSkeleton) -> Result<NeqSkeleton, NeqError> {
    let wrap = |b: &NeqSkeleton| step_neq(b).map(Box::new);
    Ok(match q {
        NeqSkeleton::Var(..) | NeqSkeleton::Abs(..) => return Err(stuck("the subject is a value")),
        NeqSkeleton::Forall(a, b) => NeqSkeleton::Forall(a.clone(), wrap(b)?),
        NeqSkeleton::EVar(s, d, b) => NeqSkeleton::EVar(s.clone(), d.clone(), wrap(b)?),
        NeqSkeleton::Sub(b, p) => NeqSkeleton::Sub(wrap(b)?, p.clone()),
        NeqSkeleton::EnvSub(b, y, p) => NeqSkeleton::EnvSub(wrap(b)?, y.clone(), p.clone()),
        NeqSkeleton::Weak(b, e) => NeqSkeleton::Weak(wrap(b)?, e.clone()),
        NeqSkeleton::App(f, a) => {
            if !f.term().is_value() {
                NeqSkeleton::App(wrap(f)?, a.clone())
            } else if !a.term().is_value() {
                NeqSkeleton::App(f.clone(), wrap(a)?)
            } else {
                beta(f, a)?
            }
        }
    })
}

/// Given a derivation for `m` with a constraint solved under `≤F` and the
/// reduct `m2`, build a derivation for `m2` with the same environment and
/// type whose constraint is again solved.
pub fn preserve(q: &Skeleton, m2: &Term) -> Result<Skeleton, NeqError> {
    let j = check_skeleton(q)?;
    let expected = cbv_step(&j.term).ok_or_else(|| stuck(format!("`{}` does not reduce", j.term)))?;
    if !expected.alpha_eq(m2) {
        return Err(NeqError::NotAStep(m2.to_string()));
    }
    let n = to_neq(q)?;
    check_neq(&n)?;
    let n2 = step_neq(&n)?;
    check_neq(&n2)?;
    let q2 = from_neq(&n2)?;
    let j2 = check_skeleton(&q2)?;
    if !j2.term.alpha_eq(m2) {
        return Err(stuck(format!("derivation is for `{}`", j2.term)));
    }
    if !env_eq(&j.env, &j2.env) {
        return Err(stuck(format!("environment changed from {} to {}", j.env, j2.env)));
    }
    if !type_eq(&j.rtype, &j2.rtype) {
        return Err(stuck(format!("type changed from {} to {}", j.rtype, j2.rtype)));
    }
    if !solved(&j2.constraint, F) {
        return Err(NeqError::NotSolved(j2.constraint.to_string()));
    }
    Ok(q2)
}

/// Reduce with `preserve` until a value, a stuck term or `limit` steps.
pub fn preserve_trace(q: &Skeleton, limit: usize) -> Result<Vec<Skeleton>, NeqError> {
    let mut out = vec![q.clone()];
    for _ in 0..limit {
        let cur = out.last().expect("nonempty");
        let Some(next) = cbv_step(&cur.term()) else { break };
        let q2 = preserve(cur, &next)?;
        out.push(q2);
    }
    Ok(out)
}
