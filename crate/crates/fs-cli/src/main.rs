use std::io::Read;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use fs_kernel::canon::{canonical_constraint, canonical_type, rename_free};
use fs_kernel::expand::{inst_skel, rename_cons, subst_skel};
use fs_kernel::initial::initial_skeleton;
use fs_kernel::parse::{parse_constraint, parse_expansion, parse_set, parse_skeleton, parse_subst, parse_term};
use fs_kernel::reduce::preserve_trace;
use fs_kernel::solve::{relation, solved, Relation};
use fs_kernel::syntax::{all_tvar_names, Constraint, FreshSupply, Ftv, Judgement, Name, Skeleton, Type, TypeEnv, VarSet};
use fs_kernel::systemf::{check_system_f, erase_evars};
use fs_kernel::typing::check_skeleton;

const INVALID: u8 = 2;
const UNSOLVED: u8 = 3;

#[derive(Parser)]
#[command(name = "fsys", version, about = "System F with expansion variables")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    /// How judgements are printed.
    #[arg(long, value_enum, default_value_t = Format::Canonical, global = true)]
    format: Format,
    /// Subtyping relation used to decide constraints (F or EQ).
    #[arg(long, default_value = "F", global = true)]
    rel: String,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Canonical,
    Raw,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check a skeleton and print its judgement.
    Check {
        /// Skeleton file, or `-` for standard input.
        input: String,
        /// Also decide the constraint; exit 3 when it is not solved.
        #[arg(long)]
        solved: bool,
    },
    /// Print the initial skeleton of a term.
    Initial { input: String },
    /// Apply a substitution to a skeleton.
    Subst { input: String, subst: String },
    /// Apply an expansion under a forbidden set to a skeleton.
    Expand { input: String, expansion: String, forbidden: String },
    /// Decide a constraint.
    Solve { input: String },
    /// Reduce the term of a solved skeleton, rebuilding the skeleton at each step.
    Reduce {
        input: String,
        #[arg(long, default_value_t = 20)]
        steps: usize,
    },
    /// Erase E-variables and check the result as a System F derivation.
    EraseF { input: String },
    /// Print the derivation tree of a skeleton.
    Tree {
        input: String,
        /// Emit Graphviz DOT instead of text.
        #[arg(long)]
        dot: bool,
    },
}

struct Failure {
    code: u8,
    msg: String,
}

fn invalid(msg: impl ToString) -> Failure {
    Failure { code: INVALID, msg: msg.to_string() }
}

fn read(input: &str) -> Result<String, Failure> {
    let mut s = String::new();
    if input == "-" {
        std::io::stdin().read_to_string(&mut s).map_err(|e| Failure { code: 1, msg: e.to_string() })?;
    } else {
        s = std::fs::read_to_string(input).map_err(|e| Failure { code: 1, msg: format!("{input}: {e}") })?;
    }
    Ok(s)
}

fn skeleton(input: &str) -> Result<Skeleton, Failure> {
    let src = read(input)?;
    parse_skeleton(src.trim()).map_err(|e| invalid(format!("{input}:{e}")))
}

fn judge(q: &Skeleton) -> Result<Judgement, Failure> {
    check_skeleton(q).map_err(invalid)
}

struct Printer {
    format: Format,
}

// Canonical forms name their binders `_0`, `_1`, ...; for display these are
// renamed to the first letters not used elsewhere in the entity.
fn letters(used: &VarSet) -> impl Iterator<Item = Name> + '_ {
    (0..).map(|k: usize| {
        let base = ((b'a' + (k % 26) as u8) as char).to_string();
        if k < 26 { base } else { format!("{base}{}", k / 26) }
    })
    .filter(move |n| !used.contains(n))
}

fn readable_type(t: &Type, fresh: &mut dyn Iterator<Item = Name>) -> Type {
    match t {
        Type::Var(_) => t.clone(),
        Type::Arrow(d, c) => Type::Arrow(Box::new(readable_type(d, fresh)), Box::new(readable_type(c, fresh))),
        Type::Forall(a, b) => {
            let n = fresh.next().expect("unbounded");
            Type::Forall(n.clone(), Box::new(readable_type(&rename_free(b, a, &n), fresh)))
        }
        Type::EVar(s, d, b) => Type::EVar(s.clone(), d.clone(), Box::new(readable_type(b, fresh))),
    }
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
        Constraint::Guard(_, d, t, b) => {
            out.extend(d.iter().cloned());
            all_tvar_names(t, out);
            cons_names(b, out);
        }
    }
}

// Each type restarts from `a`; existential binders stay distinct from
// everything in scope.
fn readable_cons(c: &Constraint, used: &VarSet) -> Constraint {
    let ty = |t: &Type| readable_type(t, &mut letters(used));
    match c {
        Constraint::Omega => Constraint::Omega,
        Constraint::Atom(t1, t2) => Constraint::Atom(ty(t1), ty(t2)),
        Constraint::And(c1, c2) => Constraint::and(readable_cons(c1, used), readable_cons(c2, used)),
        Constraint::Exists(a, b) => {
            let n = letters(used).next().expect("unbounded");
            let mut inner = used.clone();
            inner.insert(n.clone());
            Constraint::Exists(n.clone(), Box::new(readable_cons(&rename_cons(b, a, &n), &inner)))
        }
        Constraint::Guard(s, d, t, b) => Constraint::Guard(s.clone(), d.clone(), ty(t), Box::new(readable_cons(b, used))),
    }
}

impl Printer {
    fn ty(&self, t: &Type) -> String {
        match self.format {
            Format::Canonical => {
                let c = canonical_type(t);
                let mut used = VarSet::new();
                all_tvar_names(&c, &mut used);
                let mut fresh = letters(&used);
                let r = readable_type(&c, &mut fresh);
                r.to_string()
            }
            Format::Raw => t.to_string(),
        }
    }

    fn env(&self, env: &TypeEnv) -> String {
        match self.format {
            Format::Canonical => {
                let items: Vec<String> = env.iter().map(|(x, t)| format!("{x}: {}", self.ty(t))).collect();
                format!("{{{}}}", items.join(", "))
            }
            Format::Raw => env.to_string(),
        }
    }

    fn cons(&self, c: &Constraint) -> String {
        match self.format {
            Format::Canonical => {
                let c = canonical_constraint(c);
                let mut used = VarSet::new();
                cons_names(&c, &mut used);
                readable_cons(&c, &used).to_string()
            }
            Format::Raw => c.to_string(),
        }
    }

    fn judgement(&self, j: &Judgement) -> String {
        format!(
            "term: {}\nenv: {}\ntype: {}\nconstraint: {}\n",
            j.term,
            self.env(&j.env),
            self.ty(&j.rtype),
            self.cons(&j.constraint)
        )
    }
}

fn verdict(c: &Constraint, rel: Relation) -> (String, bool) {
    let ok = solved(c, rel);
    (format!("solved ({}): {}\n", rel.name, if ok { "yes" } else { "no" }), ok)
}

// --------------------------------------------------------------- tree

fn rule(q: &Skeleton) -> &'static str {
    match q {
        Skeleton::Var(..) => "var",
        Skeleton::Abs(..) => "abs",
        Skeleton::App(..) => "app",
        Skeleton::Forall(..) => "forall",
        Skeleton::EVar(..) => "evar",
        Skeleton::Sub(..) => "sub",
        Skeleton::Weak(..) => "weak",
    }
}

fn children(q: &Skeleton) -> Vec<&Skeleton> {
    match q {
        Skeleton::Var(..) => vec![],
        Skeleton::App(f, a) => vec![f, a],
        Skeleton::Abs(_, b) | Skeleton::Forall(_, b) | Skeleton::EVar(_, _, b) | Skeleton::Sub(b, _) | Skeleton::Weak(b, _) => {
            vec![b]
        }
    }
}

fn label(p: &Printer, q: &Skeleton) -> Result<String, Failure> {
    let j = judge(q)?;
    let extra = match q {
        Skeleton::EVar(s, d, _) => format!(" {s}^{}", fs_kernel::print::print_set(d)),
        Skeleton::Forall(a, _) => format!(" {a}"),
        _ => String::new(),
    };
    Ok(format!("[{}{extra}] {} |- {} : {}", rule(q), p.env(&j.env), j.term, p.ty(&j.rtype)))
}

fn text_tree(p: &Printer, q: &Skeleton, depth: usize, out: &mut String) -> Result<(), Failure> {
    out.push_str(&"  ".repeat(depth));
    out.push_str(&label(p, q)?);
    out.push('\n');
    for c in children(q) {
        text_tree(p, c, depth + 1, out)?;
    }
    Ok(())
}

fn dot_tree(p: &Printer, q: &Skeleton, next: &mut usize, out: &mut String) -> Result<usize, Failure> {
    let id = *next;
    *next += 1;
    let l = label(p, q)?.replace('\\', "\\\\").replace('"', "\\\"");
    out.push_str(&format!("  n{id} [label=\"{l}\"];\n"));
    for c in children(q) {
        let k = dot_tree(p, c, next, out)?;
        out.push_str(&format!("  n{id} -> n{k};\n"));
    }
    Ok(id)
}

// ----------------------------------------------------------- commands

fn run(cli: &Cli) -> Result<(String, u8), Failure> {
    let p = Printer { format: cli.format };
    let rel = relation(&cli.rel).ok_or_else(|| Failure { code: 1, msg: format!("unknown relation `{}`", cli.rel) })?;
    let mut out = String::new();
    let mut code = 0;
    match &cli.cmd {
        Cmd::Check { input, solved } => {
            let j = judge(&skeleton(input)?)?;
            out += &p.judgement(&j);
            if *solved {
                let (line, ok) = verdict(&j.constraint, rel);
                out += &line;
                if !ok {
                    code = UNSOLVED;
                }
            }
        }
        Cmd::Initial { input } => {
            let src = read(input)?;
            let m = parse_term(src.trim()).map_err(|e| invalid(format!("{input}:{e}")))?;
            let (q, _, _) = initial_skeleton(&m, FreshSupply::new());
            out += &format!("skeleton: {q}\n");
            out += &p.judgement(&judge(&q)?);
        }
        Cmd::Subst { input, subst } => {
            let q = skeleton(input)?;
            judge(&q)?;
            let phi = parse_subst(subst).map_err(|e| invalid(format!("substitution:{e}")))?;
            let q2 = subst_skel(&phi, &q);
            out += &format!("skeleton: {q2}\n");
            out += &p.judgement(&judge(&q2)?);
        }
        Cmd::Expand { input, expansion, forbidden } => {
            let q = skeleton(input)?;
            let j = judge(&q)?;
            let i = parse_expansion(expansion).map_err(|e| invalid(format!("expansion:{e}")))?;
            let d = parse_set(forbidden).map_err(|e| invalid(format!("forbidden set:{e}")))?;
            let missing: Vec<String> = j.env.ftv().difference(&d).cloned().collect();
            if !missing.is_empty() {
                return Err(invalid(format!("forbidden set misses {} from the environment", missing.join(", "))));
            }
            let q2 = inst_skel(&i, &d, &q);
            let j2 = judge(&q2)?;
            out += &format!("skeleton: {q2}\n");
            out += &p.judgement(&j2);
        }
        Cmd::Solve { input } => {
            let src = read(input)?;
            let c = parse_constraint(src.trim()).map_err(|e| invalid(format!("{input}:{e}")))?;
            out += &format!("constraint: {}\n", p.cons(&c));
            let (line, ok) = verdict(&c, rel);
            out += &line;
            if !ok {
                code = UNSOLVED;
            }
        }
        Cmd::Reduce { input, steps } => {
            let q = skeleton(input)?;
            let j = judge(&q)?;
            let (line, ok) = verdict(&j.constraint, fs_kernel::solve::F);
            if !ok {
                return Err(Failure { code: UNSOLVED, msg: format!("skeleton is not solved under F\n{}", p.judgement(&j)) });
            }
            let trace = preserve_trace(&q, *steps).map_err(|e| Failure { code: 1, msg: e.to_string() })?;
            for (k, s) in trace.iter().enumerate() {
                out += &format!("step {k}\nskeleton: {s}\n");
                out += &p.judgement(&judge(s)?);
                out += &line;
            }
        }
        Cmd::EraseF { input } => {
            let q = erase_evars(&skeleton(input)?);
            let (env, t) = check_system_f(&q).map_err(invalid)?;
            out += &format!("skeleton: {q}\nenv: {}\ntype: {}\n", p.env(&env), p.ty(&t));
        }
        Cmd::Tree { input, dot } => {
            let q = skeleton(input)?;
            if *dot {
                out += "digraph derivation {\n  node [shape=box, fontname=monospace];\n";
                dot_tree(&p, &q, &mut 0, &mut out)?;
                out += "}\n";
            } else {
                text_tree(&p, &q, 0, &mut out)?;
            }
        }
    }
    Ok((out, code))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok((out, code)) => {
            print!("{out}");
            ExitCode::from(code)
        }
        Err(f) => {
            eprintln!("error: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}
