use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion, Throughput};
use nml_core::softfloat::{sf_add, sf_div, sf_exp, sf_lt, sf_mul, F32Bits};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const N: usize = 4096;

fn operands() -> Vec<(F32Bits, F32Bits)> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    (0..N).map(|_| (F32Bits::from(rng.gen_range(-1e3f32..1e3)), F32Bits::from(rng.gen_range(-1e3f32..1e3)))).collect()
}

fn routines(c: &mut Criterion) {
    let pairs = operands();
    let mut group = c.benchmark_group("softfloat");
    group.throughput(Throughput::Elements(N as u64));
    let binary: [(&str, fn(F32Bits, F32Bits) -> F32Bits); 3] = [("add", sf_add), ("mul", sf_mul), ("div", sf_div)];
    for (name, f) in binary {
        group.bench_function(name, |b| {
            b.iter(|| pairs.iter().map(|&(x, y)| f(black_box(x), y).0).fold(0, u32::wrapping_add))
        });
    }
    group.bench_function("lt", |b| b.iter(|| pairs.iter().filter(|&&(x, y)| sf_lt(black_box(x), y)).count()));
    // Masking the exponent keeps arguments below 16 in magnitude.
    group.bench_function("exp", |b| {
        b.iter(|| {
            pairs.iter().map(|&(x, _)| sf_exp(black_box(F32Bits(x.0 & 0xC1FF_FFFF))).0).fold(0, u32::wrapping_add)
        })
    });
    group.bench_function("native_add", |b| {
        b.iter(|| pairs.iter().map(|&(x, y)| f32::from(black_box(x)) + f32::from(y)).sum::<f32>())
    });
    group.finish();
}

criterion_group!(benches, routines);
criterion_main!(benches);
