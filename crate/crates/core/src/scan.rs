//! Parallel enumeration of `(Z/m)^n` with deterministic merging.

use rayon::prelude::*;

/// Folds `f` over every vector in `{0..m}^n` (first coordinate fastest), merging per-chunk
/// accumulators with `merge`. The result does not depend on the number of threads as long
/// as `merge` is commutative and associative.
pub fn par_fold_points<T, I, F, M>(m: u64, n: usize, init: I, fold: F, merge: M) -> T
where
    T: Send,
    I: Fn() -> T + Sync + Send,
    F: Fn(&mut T, &[u64]) + Sync + Send,
    M: Fn(T, T) -> T + Sync + Send,
{
    if n == 0 {
        let mut acc = init();
        fold(&mut acc, &[]);
        return acc;
    }
    // Split on enough leading coordinates to give the pool something to balance.
    let mut outer = 0usize;
    let mut chunks = 1u64;
    while outer < n && chunks < 4096 && n - outer > 2 {
        outer += 1;
        chunks *= m;
    }
    let inner = n - outer;
    (0..chunks)
        .into_par_iter()
        .map(|hi| {
            let mut acc = init();
            let mut v = vec![0u64; n];
            let mut h = hi;
            for slot in v[inner..].iter_mut() {
                *slot = h % m;
                h /= m;
            }
            loop {
                fold(&mut acc, &v);
                let mut k = 0;
                while k < inner {
                    v[k] += 1;
                    if v[k] < m {
                        break;
                    }
                    v[k] = 0;
                    k += 1;
                }
                if k == inner {
                    break;
                }
            }
            acc
        })
        .reduce(&init, &merge)
}

/// Folds `f` over one representative of every line through the origin in `F_m^n`: the
/// vectors whose last nonzero coordinate is 1. There are `(m^n - 1)/(m - 1)` of them.
pub fn par_fold_projective<T, I, F, M>(m: u64, n: usize, init: I, fold: F, merge: M) -> T
where
    T: Send,
    I: Fn() -> T + Sync + Send,
    F: Fn(&mut T, &[u64]) + Sync + Send,
    M: Fn(T, T) -> T + Sync + Send,
{
    let mut acc = init();
    for lead in 0..n {
        let part = par_fold_points(
            m,
            lead,
            &init,
            |a: &mut T, head: &[u64]| {
                let mut v = vec![0u64; n];
                v[..lead].copy_from_slice(head);
                v[lead] = 1;
                fold(a, &v);
            },
            &merge,
        );
        acc = merge(acc, part);
    }
    acc
}

/// `m^n` as `u128`.
pub fn point_count(m: u64, n: usize) -> u128 {
    (m as u128).pow(n as u32)
}
