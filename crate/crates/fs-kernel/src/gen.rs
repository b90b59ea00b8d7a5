//! Random and exhaustive generators for the property suites and benches.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::canon::alpha_eq;
use crate::initial::initial_skeleton;
use crate::neq::{check_neq, eq_proof, to_neq, NeqSkeleton, SubProof};
use crate::reduce::cbv_step;
use crate::solve::{leq_f, solved, F};
use crate::syntax::{
    all_tvar_names, fresh_name, Expansion, FreshSupply, Ftv, Name, Skeleton, Substitution, Term, Type, TypeEnv,
    VarSet,
};
use crate::typing::check_skeleton;

pub const TVARS: [&str; 3] = ["a", "b", "c"];
pub const EVARS: [&str; 2] = ["s", "r"];
const TERM_VARS: [&str; 5] = ["x", "y", "z", "f", "g"];

fn pick<R: Rng>(rng: &mut R, xs: &[&str]) -> Name {
    xs.choose(rng).expect("nonempty").to_string()
}

fn subset<R: Rng>(rng: &mut R, xs: &[&str]) -> VarSet {
    xs.iter().filter(|_| rng.gen_bool(0.5)).map(|x| x.to_string()).collect()
}

// ------------------------------------------------------------------ types

/// All types of each exact size up to `max`, over the given variables. A
/// single E-variable `s` is used with every forbidden set over `tvars`.
pub fn enumerate_types(max: usize, tvars: &[&str], evar: Option<&str>) -> Vec<Vec<Type>> {
    let sets: Vec<VarSet> = (0..1usize << tvars.len())
        .map(|m| tvars.iter().enumerate().filter(|(i, _)| m >> i & 1 == 1).map(|(_, a)| a.to_string()).collect())
        .collect();
    let mut by_size: Vec<Vec<Type>> = vec![Vec::new(); max + 1];
    if max == 0 {
        return by_size;
    }
    by_size[1] = tvars.iter().map(|a| Type::Var(a.to_string())).collect();
    for n in 2..=max {
        let mut out = Vec::new();
        for b in &by_size[n - 1] {
            for a in tvars {
                out.push(Type::Forall(a.to_string(), Box::new(b.clone())));
            }
            if let Some(s) = evar {
                for d in &sets {
                    out.push(Type::EVar(s.to_string(), d.clone(), Box::new(b.clone())));
                }
            }
        }
        for i in 1..n - 1 {
            for d in &by_size[i] {
                for c in &by_size[n - 1 - i] {
                    out.push(Type::Arrow(Box::new(d.clone()), Box::new(c.clone())));
                }
            }
        }
        by_size[n] = out;
    }
    by_size
}

pub fn random_type<R: Rng>(rng: &mut R, depth: u32, tvars: &[&str], evars: &[&str]) -> Type {
    if depth == 0 || rng.gen_bool(0.3) {
        return Type::Var(pick(rng, tvars));
    }
    match rng.gen_range(0..10) {
        0..=4 => Type::Arrow(
            Box::new(random_type(rng, depth - 1, tvars, evars)),
            Box::new(random_type(rng, depth - 1, tvars, evars)),
        ),
        5..=7 => Type::Forall(pick(rng, tvars), Box::new(random_type(rng, depth - 1, tvars, evars))),
        _ if !evars.is_empty() => {
            Type::EVar(pick(rng, evars), subset(rng, tvars), Box::new(random_type(rng, depth - 1, tvars, evars)))
        }
        _ => Type::Forall(pick(rng, tvars), Box::new(random_type(rng, depth - 1, tvars, evars))),
    }
}

pub fn random_expansion<R: Rng>(rng: &mut R, depth: u32) -> Expansion {
    if depth == 0 || rng.gen_bool(0.25) {
        return Expansion::Id;
    }
    let rest = Box::new(random_expansion(rng, depth - 1));
    match rng.gen_range(0..3) {
        0 => Expansion::Forall(pick(rng, &TVARS), rest),
        1 => Expansion::EVar(pick(rng, &EVARS), subset(rng, &TVARS), rest),
        _ => Expansion::Sub(rest, random_type(rng, 2, &TVARS, &EVARS)),
    }
}

/// Random bindings for some of the given type and E-variables.
pub fn random_subst<R: Rng>(rng: &mut R, tvars: &VarSet, evars: &VarSet) -> Substitution {
    let mut phi = Substitution::identity();
    for a in tvars {
        if rng.gen_bool(0.5) {
            phi.push_type(a, random_type(rng, 2, &TVARS, &EVARS));
        }
    }
    for s in evars {
        if rng.gen_bool(0.7) {
            phi.push_exp(s, random_expansion(rng, 3));
        }
    }
    phi
}

// ------------------------------------------------------------------ terms

pub fn random_term<R: Rng>(rng: &mut R, size: usize, free: &[&str]) -> Term {
    fn go<R: Rng>(rng: &mut R, size: usize, scope: &mut Vec<Name>, free: &[&str]) -> Term {
        let avail: Vec<Name> = scope.iter().cloned().chain(free.iter().map(|x| x.to_string())).collect();
        if size <= 1 {
            if let Some(x) = avail.choose(rng) {
                return Term::Var(x.clone());
            }
        }
        if size <= 2 || avail.is_empty() || rng.gen_bool(0.4) {
            let x = pick(rng, &TERM_VARS);
            scope.push(x.clone());
            let b = go(rng, size.saturating_sub(1).max(1), scope, free);
            scope.pop();
            Term::Abs(x, Box::new(b))
        } else {
            let left = rng.gen_range(1..size - 1);
            let f = go(rng, left, scope, free);
            let a = go(rng, size - 1 - left, scope, free);
            Term::App(Box::new(f), Box::new(a))
        }
    }
    go(rng, size.max(1), &mut Vec::new(), free)
}

// -------------------------------------------------------------- skeletons

/// Wrap random nodes of a valid skeleton in quantifier, E-variable and
/// subtyping nodes. Below the root each wrapper is closed by a subtyping
/// node back to the original type, so parents stay valid. The constraint
/// is usually not solved.
pub fn decorate<R: Rng>(rng: &mut R, q: &Skeleton, p: f64) -> Skeleton {
    decorate_at(rng, q, p, true)
}

fn decorate_at<R: Rng>(rng: &mut R, q: &Skeleton, p: f64, root: bool) -> Skeleton {
    let d = |rng: &mut R, q: &Skeleton| Box::new(decorate_at(rng, q, p, false));
    let inner = match q {
        Skeleton::Var(..) => q.clone(),
        Skeleton::Abs(x, b) => Skeleton::Abs(x.clone(), d(rng, b)),
        Skeleton::App(f, a) => {
            let f = d(rng, f);
            Skeleton::App(f, d(rng, a))
        }
        Skeleton::Forall(a, b) => Skeleton::Forall(a.clone(), d(rng, b)),
        Skeleton::EVar(s, delta, b) => Skeleton::EVar(s.clone(), delta.clone(), d(rng, b)),
        Skeleton::Sub(b, t) => Skeleton::Sub(d(rng, b), t.clone()),
        Skeleton::Weak(b, g) => Skeleton::Weak(d(rng, b), g.clone()),
    };
    if !rng.gen_bool(p) {
        return inner;
    }
    let j = check_skeleton(&inner).expect("decorating a valid skeleton");
    let env_ftv = j.env.ftv();
    let wrapped = match rng.gen_range(0..3) {
        0 => {
            let free: Vec<&str> = TVARS.iter().copied().filter(|a| !env_ftv.contains(*a)).collect();
            match free.choose(rng) {
                Some(a) => Skeleton::Forall(a.to_string(), Box::new(inner)),
                None => return inner,
            }
        }
        1 => {
            let mut delta = env_ftv;
            delta.extend(subset(rng, &TVARS));
            Skeleton::EVar(pick(rng, &EVARS), delta, Box::new(inner))
        }
        _ => Skeleton::Sub(Box::new(inner), random_type(rng, 2, &TVARS, &EVARS)),
    };
    if root {
        wrapped
    } else {
        Skeleton::Sub(Box::new(wrapped), j.rtype)
    }
}

/// A random valid skeleton: an initial skeleton put through a random
/// substitution, then decorated.
pub fn random_skeleton<R: Rng>(rng: &mut R, size: usize) -> Skeleton {
    let free: Vec<&str> = TERM_VARS.iter().copied().filter(|_| rng.gen_bool(0.2)).collect();
    let m = random_term(rng, size, &free);
    let (q, _, _) = initial_skeleton(&m, FreshSupply::new());
    let tvars = q.ftv();
    let evars: VarSet = crate::initial::allvar(&q).difference(&tvars).cloned().collect();
    let phi = random_subst(rng, &tvars, &evars);
    let q = crate::expand::subst_skel(&phi, &q);
    decorate(rng, &q, 0.2)
}

/// A forbidden set covering the environment, with random extras.
pub fn random_forbidden<R: Rng>(rng: &mut R, q: &Skeleton) -> VarSet {
    let mut d = check_skeleton(q).expect("valid skeleton").env.ftv();
    d.extend(subset(rng, &TVARS));
    d
}

// ----------------------------------------------------- solved derivations

/// Builds derivations at a requested type, so that every subtyping node is a
/// single instantiation or an equality and the constraint is solved.
pub struct TypedGen<'r, R: Rng> {
    rng: &'r mut R,
    next_var: usize,
    next_tvar: usize,
}

impl<'r, R: Rng> TypedGen<'r, R> {
    pub fn new(rng: &'r mut R) -> Self {
        TypedGen { rng, next_var: 0, next_tvar: 0 }
    }

    fn var(&mut self) -> Name {
        self.next_var += 1;
        format!("x{}", self.next_var - 1)
    }

    fn tvar(&mut self, avoid: &VarSet) -> Name {
        loop {
            let n = format!("t{}", self.next_tvar);
            self.next_tvar += 1;
            if !avoid.contains(&n) {
                return n;
            }
        }
    }

    fn small_type(&mut self) -> Type {
        let pool = [
            "b",
            "c",
            "b -> b",
            "all a. (a -> a)",
            "(all a. (a -> a)) -> b -> b",
            "all a. (a -> b -> a)",
            "s^{b,c} b",
            "all a. (s^{a,b,c} a -> a)",
        ];
        crate::parse::parse_type(pool.choose(self.rng).expect("nonempty")).expect("pool parses")
    }

    /// A derivation with environment `env` whose type is α-equal to `t`.
    pub fn of_type(&mut self, env: &TypeEnv, t: &Type, fuel: u32) -> Option<Skeleton> {
        let mut order = [0u8, 1, 2, 3, 4];
        order.shuffle(self.rng);
        if fuel == 0 {
            order = [0, 1, 5, 5, 5];
        }
        for choice in order {
            let got = match choice {
                0 => self.leaf(env, t),
                1 => self.structural(env, t, fuel),
                2 => self.application(env, t, fuel),
                3 => self.instance(env, t, fuel),
                4 => self.equal(env, t, fuel),
                _ => None,
            };
            if got.is_some() {
                return got;
            }
        }
        None
    }

    fn leaf(&mut self, env: &TypeEnv, t: &Type) -> Option<Skeleton> {
        let mut exact = Vec::new();
        let mut inst = Vec::new();
        for (x, u) in env.iter() {
            if alpha_eq(u, t) {
                exact.push(x.clone());
            } else if matches!(u, Type::Forall(..)) && leq_f(u, t) {
                inst.push(x.clone());
            }
        }
        if let Some(x) = exact.choose(self.rng) {
            return Some(Skeleton::Var(x.clone(), env.clone()));
        }
        inst.choose(self.rng)
            .map(|x| Skeleton::Sub(Box::new(Skeleton::Var(x.clone(), env.clone())), t.clone()))
    }

    fn structural(&mut self, env: &TypeEnv, t: &Type, fuel: u32) -> Option<Skeleton> {
        match t {
            Type::Var(_) => None,
            Type::Arrow(d, c) => {
                let x = self.var();
                let body = self.of_type(&env.extended(&x, (**d).clone()), c, fuel.saturating_sub(1))?;
                Some(Skeleton::Abs(x, Box::new(body)))
            }
            Type::Forall(a, b) => {
                let fe = env.ftv();
                if fe.contains(a) {
                    let mut avoid = fe;
                    all_tvar_names(b, &mut avoid);
                    let a2 = self.tvar(&avoid);
                    let b2 = crate::canon::rename_free(b, a, &a2);
                    let body = self.of_type(env, &b2, fuel)?;
                    Some(Skeleton::Forall(a2, Box::new(body)))
                } else {
                    let body = self.of_type(env, b, fuel)?;
                    Some(Skeleton::Forall(a.clone(), Box::new(body)))
                }
            }
            Type::EVar(s, d, b) => {
                if !env.ftv().is_subset(d) {
                    return None;
                }
                let body = self.of_type(env, b, fuel)?;
                Some(Skeleton::EVar(s.clone(), d.clone(), Box::new(body)))
            }
        }
    }

    fn application(&mut self, env: &TypeEnv, t: &Type, fuel: u32) -> Option<Skeleton> {
        if fuel == 0 {
            return None;
        }
        let dom = self.small_type();
        let fun_t = Type::Arrow(Box::new(dom.clone()), Box::new(t.clone()));
        let f = self.of_type(env, &fun_t, fuel - 1)?;
        let a = self.of_type(env, &dom, fuel - 1)?;
        Some(Skeleton::App(Box::new(f), Box::new(a)))
    }

    fn generalize(&mut self, t: &Type, target: &Type, a: &str) -> Type {
        if alpha_eq(t, target) && self.rng.gen_bool(0.7) {
            return Type::Var(a.to_string());
        }
        match t {
            Type::Var(_) => t.clone(),
            Type::Arrow(d, c) => {
                let d = self.generalize(d, target, a);
                Type::Arrow(Box::new(d), Box::new(self.generalize(c, target, a)))
            }
            Type::Forall(b, body) if !target.ftv().contains(b) => {
                Type::Forall(b.clone(), Box::new(self.generalize(body, target, a)))
            }
            Type::Forall(..) => t.clone(),
            Type::EVar(s, d, body) => Type::EVar(s.clone(), d.clone(), Box::new(self.generalize(body, target, a))),
        }
    }

    fn instance(&mut self, env: &TypeEnv, t: &Type, fuel: u32) -> Option<Skeleton> {
        if fuel == 0 {
            return None;
        }
        let mut subs = Vec::new();
        collect_subterms(t, &mut subs);
        let target = subs.choose(self.rng)?.clone();
        let mut avoid = env.ftv();
        all_tvar_names(t, &mut avoid);
        let a = self.tvar(&avoid);
        let body = self.generalize(t, &target, &a);
        if !body.ftv().contains(&a) && self.rng.gen_bool(0.5) {
            return None;
        }
        let src = Type::Forall(a, Box::new(body));
        if !leq_f(&src, t) {
            return None;
        }
        let q = self.of_type(env, &src, fuel - 1)?;
        Some(Skeleton::Sub(Box::new(q), t.clone()))
    }

    fn equal(&mut self, env: &TypeEnv, t: &Type, fuel: u32) -> Option<Skeleton> {
        if fuel == 0 {
            return None;
        }
        let u = variant(self.rng, t);
        let q = self.of_type(env, &u, fuel - 1)?;
        Some(Skeleton::Sub(Box::new(q), t.clone()))
    }
}

fn collect_subterms(t: &Type, out: &mut Vec<Type>) {
    out.push(t.clone());
    match t {
        Type::Var(_) => {}
        Type::Arrow(d, c) => {
            collect_subterms(d, out);
            collect_subterms(c, out);
        }
        Type::Forall(_, b) | Type::EVar(_, _, b) => collect_subterms(b, out),
    }
}

/// A type equal to `t` up to dummy or reordered quantifiers.
pub fn variant<R: Rng>(rng: &mut R, t: &Type) -> Type {
    let mut names = VarSet::new();
    all_tvar_names(t, &mut names);
    let d = fresh_name("d", &names);
    fn go<R: Rng>(rng: &mut R, t: &Type, d: &str) -> Type {
        match t {
            Type::Forall(a, inner) if rng.gen_bool(0.4) => match &**inner {
                Type::Forall(b, body) if a != b => {
                    Type::Forall(b.clone(), Box::new(Type::Forall(a.clone(), body.clone())))
                }
                _ => Type::Forall(d.to_string(), Box::new(t.clone())),
            },
            _ if rng.gen_bool(0.3) => Type::Forall(d.to_string(), Box::new(t.clone())),
            Type::Arrow(dom, c) => {
                if rng.gen_bool(0.5) {
                    Type::Arrow(Box::new(go(rng, dom, d)), c.clone())
                } else {
                    Type::Arrow(dom.clone(), Box::new(go(rng, c, d)))
                }
            }
            Type::Forall(a, b) => Type::Forall(a.clone(), Box::new(go(rng, b, d))),
            Type::EVar(s, delta, b) => Type::EVar(s.clone(), delta.clone(), Box::new(go(rng, b, d))),
            Type::Var(_) => Type::Forall(d.to_string(), Box::new(t.clone())),
        }
    }
    go(rng, t, &d)
}

/// A closed term with a derivation whose constraint is solved under `≤F`
/// and which takes at least one reduction step.
pub fn solved_redex<R: Rng>(rng: &mut R, fuel: u32) -> Skeleton {
    loop {
        let mut g = TypedGen::new(rng);
        let t = g.small_type();
        let Some(q) = g.application(&TypeEnv::new(), &t, fuel) else { continue };
        let Ok(j) = check_skeleton(&q) else { continue };
        if solved(&j.constraint, F) && cbv_step(&j.term).is_some() {
            return q;
        }
    }
}

// ------------------------------------------------------ explicit proofs

/// Wrap random nodes of a valid explicit-proof skeleton in equality steps.
pub fn decorate_neq<R: Rng>(rng: &mut R, q: &NeqSkeleton, p: f64) -> NeqSkeleton {
    let b = |rng: &mut R, q: &NeqSkeleton| Box::new(decorate_neq(rng, q, p));
    let inner = match q {
        NeqSkeleton::Var(..) => q.clone(),
        NeqSkeleton::Abs(x, body) => NeqSkeleton::Abs(x.clone(), b(rng, body)),
        NeqSkeleton::App(f, a) => {
            let f = b(rng, f);
            NeqSkeleton::App(f, b(rng, a))
        }
        NeqSkeleton::Forall(a, body) => NeqSkeleton::Forall(a.clone(), b(rng, body)),
        NeqSkeleton::EVar(s, d, body) => NeqSkeleton::EVar(s.clone(), d.clone(), b(rng, body)),
        NeqSkeleton::Sub(body, pr) => NeqSkeleton::Sub(b(rng, body), pr.clone()),
        NeqSkeleton::EnvSub(body, y, pr) => NeqSkeleton::EnvSub(b(rng, body), y.clone(), pr.clone()),
        NeqSkeleton::Weak(body, g) => NeqSkeleton::Weak(b(rng, body), g.clone()),
    };
    if !rng.gen_bool(p) {
        return inner;
    }
    let Ok(j) = check_neq(&inner) else { return inner };
    // An equality detour out and back keeps the type, so the node can sit
    // anywhere, including the function side of an application.
    let u = variant(rng, &j.rtype);
    let there = eq_proof(&j.rtype, &u).expect("variant is equal");
    let back = eq_proof(&u, &j.rtype).expect("variant is equal");
    let detour = NeqSkeleton::Sub(Box::new(NeqSkeleton::Sub(Box::new(inner.clone()), there)), back);
    match rng.gen_range(0..3) {
        0 => detour,
        1 => NeqSkeleton::Sub(
            Box::new(detour),
            SubProof::Trans(Box::new(SubProof::Refl(j.rtype.clone())), Box::new(SubProof::Refl(j.rtype))),
        ),
        _ => {
            let mut names = VarSet::new();
            all_tvar_names(&j.rtype, &mut names);
            names.extend(j.env.ftv());
            let a = fresh_name("d", &names);
            let dummy = NeqSkeleton::Sub(Box::new(inner), SubProof::DummyIn(j.rtype.clone(), a.clone()));
            NeqSkeleton::Sub(Box::new(dummy), SubProof::DummyElim(Type::Forall(a, Box::new(j.rtype))))
        }
    }
}

/// A random valid explicit-proof skeleton.
pub fn random_neq<R: Rng>(rng: &mut R, fuel: u32) -> NeqSkeleton {
    let q = solved_redex(rng, fuel);
    let n = to_neq(&q).expect("solved derivations translate");
    decorate_neq(rng, &n, 0.25)
}
