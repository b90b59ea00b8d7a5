use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use fs_kernel::expand::property_subst_sound;
use fs_kernel::gen::{enumerate_types, random_skeleton, random_subst, TVARS};
use fs_kernel::initial::allvar;
use fs_kernel::par;
use fs_kernel::solve::leq_f;
use fs_kernel::syntax::{Ftv, Skeleton, Substitution, Type, VarSet};

fn subst_pairs(n: usize) -> Vec<(Skeleton, Substitution)> {
    (0..n)
        .map(|i| {
            let mut r = StdRng::seed_from_u64(i as u64);
            let size = r.gen_range(1..9);
            let q = random_skeleton(&mut r, size);
            let tv = q.ftv();
            let ev: VarSet = allvar(&q).difference(&tv).cloned().collect();
            let phi = random_subst(&mut r, &tv, &ev);
            (q, phi)
        })
        .collect()
}

fn type_pairs() -> Vec<(Type, Type)> {
    let by_size = enumerate_types(4, &TVARS, None);
    let all: Vec<&Type> = by_size.iter().flatten().collect();
    let mut out = Vec::new();
    for t1 in &all {
        for t2 in &all {
            out.push(((*t1).clone(), (*t2).clone()));
        }
    }
    out
}

fn bench(c: &mut Criterion) {
    let pairs = subst_pairs(500);
    let mut g = c.benchmark_group("subst_soundness");
    g.sample_size(10);
    g.bench_function(BenchmarkId::new("parallel", pairs.len()), |b| {
        b.iter(|| par::map(&pairs, |(q, phi)| property_subst_sound(q, phi)))
    });
    g.bench_function(BenchmarkId::new("sequential", pairs.len()), |b| {
        b.iter(|| par::sequential_map(&pairs, |(q, phi)| property_subst_sound(q, phi)))
    });
    g.finish();

    let types = type_pairs();
    let mut g = c.benchmark_group("leq_f");
    g.sample_size(10);
    g.bench_function(BenchmarkId::new("parallel", types.len()), |b| {
        b.iter(|| par::map(&types, |(t1, t2)| leq_f(t1, t2)))
    });
    g.bench_function(BenchmarkId::new("sequential", types.len()), |b| {
        b.iter(|| par::sequential_map(&types, |(t1, t2)| leq_f(t1, t2)))
    });
    g.finish();
}

criterion_group!(benches, bench);
criterion_main!(benches);
