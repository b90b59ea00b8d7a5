//! Abstract syntax: terms, types, expansions, substitutions, constraints,
//! environments and skeletons, plus free-variable functions.

use std::collections::BTreeSet;

pub type Name = String;
pub type VarSet = BTreeSet<Name>;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(Name),
    Abs(Name, Box<Term>),
    App(Box<Term>, Box<Term>),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Type {
    Var(Name),
    Arrow(Box<Type>, Box<Type>),
    Forall(Name, Box<Type>),
    /// `s^Δ τ`
    EVar(Name, VarSet, Box<Type>),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Expansion {
    Id,
    /// `∀a I`; `a` is not a binder here.
    Forall(Name, Box<Expansion>),
    /// `s^Δ I`
    EVar(Name, VarSet, Box<Expansion>),
    /// `I |> τ`
    Sub(Box<Expansion>, Type),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Binding {
    Type(Name, Type),
    Exp(Name, Expansion),
}

/// Ordered list of assignments; the first assignment for a variable wins.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Substitution(pub Vec<Binding>);

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Constraint {
    Omega,
    Atom(Type, Type),
    And(Box<Constraint>, Box<Constraint>),
    Exists(Name, Box<Constraint>),
    /// `s^{Δ;τ} C`
    Guard(Name, VarSet, Type, Box<Constraint>),
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TypeEnv(pub Vec<(Name, Type)>);

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Skeleton {
    Var(Name, TypeEnv),
    Abs(Name, Box<Skeleton>),
    App(Box<Skeleton>, Box<Skeleton>),
    Forall(Name, Box<Skeleton>),
    EVar(Name, VarSet, Box<Skeleton>),
    Sub(Box<Skeleton>, Type),
    /// Weakening: the body's environment extended with `extra`.
    Weak(Box<Skeleton>, TypeEnv),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Judgement {
    pub term: Term,
    pub env: TypeEnv,
    pub rtype: Type,
    pub constraint: Constraint,
}

// ---------------------------------------------------------------- builders

pub fn var(x: &str) -> Term {
    Term::Var(x.to_string())
}
pub fn lam(x: &str, body: Term) -> Term {
    Term::Abs(x.to_string(), Box::new(body))
}
pub fn app(f: Term, a: Term) -> Term {
    Term::App(Box::new(f), Box::new(a))
}

pub fn tv(a: &str) -> Type {
    Type::Var(a.to_string())
}
pub fn arrow(d: Type, c: Type) -> Type {
    Type::Arrow(Box::new(d), Box::new(c))
}
pub fn forall(a: &str, body: Type) -> Type {
    Type::Forall(a.to_string(), Box::new(body))
}
pub fn evar_ty(s: &str, delta: &[&str], body: Type) -> Type {
    Type::EVar(s.to_string(), set(delta), Box::new(body))
}

pub fn set(names: &[&str]) -> VarSet {
    names.iter().map(|n| n.to_string()).collect()
}

impl Type {
    pub fn arrow_parts(&self) -> Option<(&Type, &Type)> {
        match self {
            Type::Arrow(d, c) => Some((d, c)),
            _ => None,
        }
    }
}

impl Constraint {
    pub fn and(c1: Constraint, c2: Constraint) -> Constraint {
        Constraint::And(Box::new(c1), Box::new(c2))
    }
    pub fn atom(t1: Type, t2: Type) -> Constraint {
        Constraint::Atom(t1, t2)
    }
}

impl Skeleton {
    pub fn var(x: &str, env: TypeEnv) -> Skeleton {
        Skeleton::Var(x.to_string(), env)
    }
    pub fn abs(x: &str, body: Skeleton) -> Skeleton {
        Skeleton::Abs(x.to_string(), Box::new(body))
    }
    pub fn app(f: Skeleton, a: Skeleton) -> Skeleton {
        Skeleton::App(Box::new(f), Box::new(a))
    }
    pub fn forall(a: &str, body: Skeleton) -> Skeleton {
        Skeleton::Forall(a.to_string(), Box::new(body))
    }
    pub fn evar(s: &str, delta: VarSet, body: Skeleton) -> Skeleton {
        Skeleton::EVar(s.to_string(), delta, Box::new(body))
    }
    pub fn sub(body: Skeleton, t: Type) -> Skeleton {
        Skeleton::Sub(Box::new(body), t)
    }
    pub fn weak(body: Skeleton, extra: TypeEnv) -> Skeleton {
        Skeleton::Weak(Box::new(body), extra)
    }

    /// The term this skeleton types.
    pub fn term(&self) -> Term {
        match self {
            Skeleton::Var(x, _) => Term::Var(x.clone()),
            Skeleton::Abs(x, q) => Term::Abs(x.clone(), Box::new(q.term())),
            Skeleton::App(q1, q2) => Term::App(Box::new(q1.term()), Box::new(q2.term())),
            Skeleton::Forall(_, q)
            | Skeleton::EVar(_, _, q)
            | Skeleton::Sub(q, _)
            | Skeleton::Weak(q, _) => q.term(),
        }
    }
}

impl Expansion {
    pub fn forall(a: &str, rest: Expansion) -> Expansion {
        Expansion::Forall(a.to_string(), Box::new(rest))
    }
    pub fn evar(s: &str, delta: VarSet, rest: Expansion) -> Expansion {
        Expansion::EVar(s.to_string(), delta, Box::new(rest))
    }
    pub fn sub(rest: Expansion, t: Type) -> Expansion {
        Expansion::Sub(Box::new(rest), t)
    }
}

impl TypeEnv {
    pub fn new() -> TypeEnv {
        TypeEnv(Vec::new())
    }

    pub fn from_pairs(pairs: &[(&str, Type)]) -> TypeEnv {
        TypeEnv(pairs.iter().map(|(x, t)| (x.to_string(), t.clone())).collect())
    }

    pub fn get(&self, x: &str) -> Option<&Type> {
        self.0.iter().find(|(y, _)| y == x).map(|(_, t)| t)
    }

    pub fn contains(&self, x: &str) -> bool {
        self.0.iter().any(|(y, _)| y == x)
    }

    pub fn support(&self) -> BTreeSet<Name> {
        self.0.iter().map(|(x, _)| x.clone()).collect()
    }

    pub fn is_well_formed(&self) -> bool {
        let mut seen = BTreeSet::new();
        self.0.iter().all(|(x, _)| seen.insert(x.as_str()))
    }

    /// First duplicated variable, if any.
    pub fn duplicate(&self) -> Option<&str> {
        let mut seen = BTreeSet::new();
        self.0
            .iter()
            .find(|(x, _)| !seen.insert(x.as_str()))
            .map(|(x, _)| x.as_str())
    }

    pub fn without(&self, x: &str) -> TypeEnv {
        TypeEnv(self.0.iter().filter(|(y, _)| y != x).cloned().collect())
    }

    pub fn push(&mut self, x: &str, t: Type) {
        self.0.push((x.to_string(), t));
    }

    pub fn extended(&self, x: &str, t: Type) -> TypeEnv {
        let mut e = self.clone();
        e.push(x, t);
        e
    }

    /// Replace the type of `x` in place, keeping the order.
    pub fn replaced(&self, x: &str, t: Type) -> TypeEnv {
        TypeEnv(
            self.0
                .iter()
                .map(|(y, u)| if y == x { (y.clone(), t.clone()) } else { (y.clone(), u.clone()) })
                .collect(),
        )
    }

    pub fn concat(&self, other: &TypeEnv) -> TypeEnv {
        let mut v = self.0.clone();
        v.extend(other.0.iter().cloned());
        TypeEnv(v)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = &(Name, Type)> {
        self.0.iter()
    }
}

impl Substitution {
    pub fn identity() -> Substitution {
        Substitution(Vec::new())
    }

    pub fn single_type(a: &str, t: Type) -> Substitution {
        Substitution(vec![Binding::Type(a.to_string(), t)])
    }

    pub fn lookup_type(&self, a: &str) -> Option<&Type> {
        self.0.iter().find_map(|b| match b {
            Binding::Type(x, t) if x == a => Some(t),
            _ => None,
        })
    }

    pub fn lookup_exp(&self, s: &str) -> Option<&Expansion> {
        self.0.iter().find_map(|b| match b {
            Binding::Exp(x, i) if x == s => Some(i),
            _ => None,
        })
    }

    pub fn push_type(&mut self, a: &str, t: Type) {
        self.0.push(Binding::Type(a.to_string(), t));
    }

    pub fn push_exp(&mut self, s: &str, i: Expansion) {
        self.0.push(Binding::Exp(s.to_string(), i));
    }

    /// Rebind `s` at the position of its first assignment, or append.
    pub fn set_exp(&mut self, s: &str, i: Expansion) {
        for b in self.0.iter_mut() {
            if let Binding::Exp(x, old) = b {
                if x == s {
                    *old = i;
                    return;
                }
            }
        }
        self.push_exp(s, i);
    }

    pub fn then(mut self, other: &Substitution) -> Substitution {
        self.0.extend(other.0.iter().cloned());
        self
    }

    pub fn is_identity(&self) -> bool {
        self.0.is_empty()
    }

    /// Drop inert duplicates (later bindings that are already shadowed).
    pub fn dedup(&self) -> Substitution {
        let mut seen_t = BTreeSet::new();
        let mut seen_e = BTreeSet::new();
        let mut out = Vec::new();
        for b in &self.0 {
            let fresh = match b {
                Binding::Type(a, _) => seen_t.insert(a.clone()),
                Binding::Exp(s, _) => seen_e.insert(s.clone()),
            };
            if fresh {
                out.push(b.clone());
            }
        }
        Substitution(out)
    }
}

// --------------------------------------------------------- free variables

pub trait Ftv {
    fn ftv_into(&self, out: &mut VarSet);

    fn ftv(&self) -> VarSet {
        let mut out = VarSet::new();
        self.ftv_into(&mut out);
        out
    }
}

impl Ftv for Type {
    fn ftv_into(&self, out: &mut VarSet) {
        match self {
            Type::Var(a) => {
                out.insert(a.clone());
            }
            Type::Arrow(d, c) => {
                d.ftv_into(out);
                c.ftv_into(out);
            }
            Type::Forall(a, body) => {
                let mut inner = body.ftv();
                inner.remove(a);
                out.extend(inner);
            }
            Type::EVar(_, delta, body) => {
                out.extend(delta.iter().cloned());
                body.ftv_into(out);
            }
        }
    }
}

impl Ftv for Expansion {
    fn ftv_into(&self, out: &mut VarSet) {
        match self {
            Expansion::Id => {}
            Expansion::Forall(a, rest) => {
                out.insert(a.clone());
                rest.ftv_into(out);
            }
            Expansion::EVar(_, delta, rest) => {
                out.extend(delta.iter().cloned());
                rest.ftv_into(out);
            }
            Expansion::Sub(rest, t) => {
                rest.ftv_into(out);
                t.ftv_into(out);
            }
        }
    }
}

impl Ftv for Substitution {
    fn ftv_into(&self, out: &mut VarSet) {
        for b in &self.0 {
            match b {
                Binding::Type(a, t) => {
                    out.insert(a.clone());
                    t.ftv_into(out);
                }
                Binding::Exp(_, i) => i.ftv_into(out),
            }
        }
    }
}

impl Ftv for Constraint {
    fn ftv_into(&self, out: &mut VarSet) {
        match self {
            Constraint::Omega => {}
            Constraint::Atom(t1, t2) => {
                t1.ftv_into(out);
                t2.ftv_into(out);
            }
            Constraint::And(c1, c2) => {
                c1.ftv_into(out);
                c2.ftv_into(out);
            }
            Constraint::Exists(a, body) => {
                let mut inner = body.ftv();
                inner.remove(a);
                out.extend(inner);
            }
            Constraint::Guard(_, delta, t, body) => {
                out.extend(delta.iter().cloned());
                t.ftv_into(out);
                body.ftv_into(out);
            }
        }
    }
}

impl Ftv for TypeEnv {
    fn ftv_into(&self, out: &mut VarSet) {
        for (_, t) in &self.0 {
            t.ftv_into(out);
        }
    }
}

impl Ftv for [Type] {
    fn ftv_into(&self, out: &mut VarSet) {
        for t in self {
            t.ftv_into(out);
        }
    }
}

/// Free type variables of every type occurring in a skeleton, with `∀a Q`
/// binding `a`.
impl Ftv for Skeleton {
    fn ftv_into(&self, out: &mut VarSet) {
        match self {
            Skeleton::Var(_, env) => env.ftv_into(out),
            Skeleton::Abs(_, q) => q.ftv_into(out),
            Skeleton::App(q1, q2) => {
                q1.ftv_into(out);
                q2.ftv_into(out);
            }
            Skeleton::Forall(a, q) => {
                let mut inner = q.ftv();
                inner.remove(a);
                out.extend(inner);
            }
            Skeleton::EVar(_, delta, q) => {
                out.extend(delta.iter().cloned());
                q.ftv_into(out);
            }
            Skeleton::Sub(q, t) => {
                q.ftv_into(out);
                t.ftv_into(out);
            }
            Skeleton::Weak(q, env) => {
                q.ftv_into(out);
                env.ftv_into(out);
            }
        }
    }
}

/// Every type-variable name occurring anywhere, bound or free.
pub fn all_tvar_names(t: &Type, out: &mut VarSet) {
    match t {
        Type::Var(a) => {
            out.insert(a.clone());
        }
        Type::Arrow(d, c) => {
            all_tvar_names(d, out);
            all_tvar_names(c, out);
        }
        Type::Forall(a, body) => {
            out.insert(a.clone());
            all_tvar_names(body, out);
        }
        Type::EVar(_, delta, body) => {
            out.extend(delta.iter().cloned());
            all_tvar_names(body, out);
        }
    }
}

pub fn evars_of_type(t: &Type, out: &mut VarSet) {
    match t {
        Type::Var(_) => {}
        Type::Arrow(d, c) => {
            evars_of_type(d, out);
            evars_of_type(c, out);
        }
        Type::Forall(_, body) => evars_of_type(body, out),
        Type::EVar(s, _, body) => {
            out.insert(s.clone());
            evars_of_type(body, out);
        }
    }
}

// ------------------------------------------------------------ term helpers

impl Term {
    pub fn fv(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        self.fv_into(&mut BTreeSet::new(), &mut out);
        out
    }

    fn fv_into(&self, bound: &mut BTreeSet<Name>, out: &mut BTreeSet<Name>) {
        match self {
            Term::Var(x) => {
                if !bound.contains(x) {
                    out.insert(x.clone());
                }
            }
            Term::Abs(x, body) => {
                let fresh = bound.insert(x.clone());
                body.fv_into(bound, out);
                if fresh {
                    bound.remove(x);
                }
            }
            Term::App(f, a) => {
                f.fv_into(bound, out);
                a.fv_into(bound, out);
            }
        }
    }

    /// Free variables in order of first occurrence, left to right.
    pub fn fv_ordered(&self) -> Vec<Name> {
        fn go(t: &Term, bound: &mut Vec<Name>, out: &mut Vec<Name>) {
            match t {
                Term::Var(x) => {
                    if !bound.contains(x) && !out.contains(x) {
                        out.push(x.clone());
                    }
                }
                Term::Abs(x, body) => {
                    bound.push(x.clone());
                    go(body, bound, out);
                    bound.pop();
                }
                Term::App(f, a) => {
                    go(f, bound, out);
                    go(a, bound, out);
                }
            }
        }
        let mut out = Vec::new();
        go(self, &mut Vec::new(), &mut out);
        out
    }

    pub fn is_value(&self) -> bool {
        matches!(self, Term::Var(_) | Term::Abs(..))
    }

    pub fn size(&self) -> usize {
        match self {
            Term::Var(_) => 1,
            Term::Abs(_, b) => 1 + b.size(),
            Term::App(f, a) => 1 + f.size() + a.size(),
        }
    }

    /// α-equivalence of terms.
    pub fn alpha_eq(&self, other: &Term) -> bool {
        fn go<'a>(t1: &'a Term, t2: &'a Term, env: &mut Vec<(&'a str, &'a str)>) -> bool {
            match (t1, t2) {
                (Term::Var(x), Term::Var(y)) => {
                    for (a, b) in env.iter().rev() {
                        if *a == x || *b == y {
                            return *a == x && *b == y;
                        }
                    }
                    x == y
                }
                (Term::Abs(x, b1), Term::Abs(y, b2)) => {
                    env.push((x, y));
                    let r = go(b1, b2, env);
                    env.pop();
                    r
                }
                (Term::App(f1, a1), Term::App(f2, a2)) => go(f1, f2, env) && go(a1, a2, env),
                _ => false,
            }
        }
        go(self, other, &mut Vec::new())
    }
}

impl Type {
    pub fn size(&self) -> usize {
        match self {
            Type::Var(_) => 1,
            Type::Arrow(d, c) => 1 + d.size() + c.size(),
            Type::Forall(_, b) => 1 + b.size(),
            Type::EVar(_, _, b) => 1 + b.size(),
        }
    }
}

// ------------------------------------------------------------ fresh names

/// `base` followed by the smallest index that avoids `avoid`.
pub fn fresh_name(base: &str, avoid: &VarSet) -> Name {
    let stem = base.trim_end_matches(|c: char| c.is_ascii_digit() || c == '\'');
    let stem = if stem.is_empty() { "a" } else { stem };
    (0..)
        .map(|i| format!("{stem}{i}"))
        .find(|n| !avoid.contains(n))
        .expect("unbounded")
}

/// Counters for the concrete variable families; names handed out never
/// collide with the avoid set.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FreshSupply {
    pub next_tvar: usize,
    pub next_evar: usize,
    pub tvar_prefix: String,
    pub evar_prefix: String,
    pub avoid: VarSet,
}

impl FreshSupply {
    pub fn new() -> FreshSupply {
        FreshSupply {
            next_tvar: 0,
            next_evar: 0,
            tvar_prefix: "a".into(),
            evar_prefix: "s".into(),
            avoid: VarSet::new(),
        }
    }

    pub fn starting_at(tvar: usize, evar: usize) -> FreshSupply {
        FreshSupply { next_tvar: tvar, next_evar: evar, ..FreshSupply::new() }
    }

    pub fn with_prefixes(tvar: &str, evar: &str) -> FreshSupply {
        FreshSupply { tvar_prefix: tvar.into(), evar_prefix: evar.into(), ..FreshSupply::new() }
    }

    pub fn tvar(&mut self) -> Name {
        loop {
            let n = format!("{}{}", self.tvar_prefix, self.next_tvar);
            self.next_tvar += 1;
            if self.avoid.insert(n.clone()) {
                return n;
            }
        }
    }

    pub fn evar(&mut self) -> Name {
        loop {
            let n = format!("{}{}", self.evar_prefix, self.next_evar);
            self.next_evar += 1;
            if self.avoid.insert(n.clone()) {
                return n;
            }
        }
    }
}
