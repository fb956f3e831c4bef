//! Compensated and pairwise summation with a fixed reduction tree.
//!
//! The parallel reducer splits the input into fixed-size leaves and combines
//! them in a fixed binary tree, so the result does not depend on the number
//! of worker threads.

use crate::scalar::Real;
use num_complex::Complex;

/// Neumaier (improved Kahan) accumulator.
#[derive(Debug, Clone, Copy)]
pub struct Neumaier<T> {
    sum: T,
    comp: T,
}

impl<T: Real> Default for Neumaier<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: Real> Neumaier<T> {
    pub fn new() -> Self {
        Self { sum: T::zero(), comp: T::zero() }
    }

    pub fn add(&mut self, x: T) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp = self.comp + ((self.sum - t) + x);
        } else {
            self.comp = self.comp + ((x - t) + self.sum);
        }
        self.sum = t;
    }

    pub fn value(&self) -> T {
        self.sum + self.comp
    }
}

/// Complex Neumaier accumulator (componentwise).
#[derive(Debug, Clone, Copy)]
pub struct ComplexNeumaier<T> {
    re: Neumaier<T>,
    im: Neumaier<T>,
}

impl<T: Real> Default for ComplexNeumaier<T> {
    fn default() -> Self {
        Self { re: Neumaier::new(), im: Neumaier::new() }
    }
}

impl<T: Real> ComplexNeumaier<T> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, z: Complex<T>) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    pub fn value(&self) -> Complex<T> {
        Complex::new(self.re.value(), self.im.value())
    }
}

pub fn neumaier_sum<T: Real>(xs: &[T]) -> T {
    let mut acc = Neumaier::new();
    for &x in xs {
        acc.add(x);
    }
    acc.value()
}

const LEAF: usize = 256;

/// Pairwise sum with compensated leaves.
pub fn pairwise_sum<T: Real>(xs: &[T]) -> T {
    if xs.len() <= LEAF {
        return neumaier_sum(xs);
    }
    let mid = split_point(xs.len());
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

// Leaf-aligned split so the tree shape only depends on the length.
fn split_point(n: usize) -> usize {
    let leaves = n.div_ceil(LEAF);
    (leaves / 2) * LEAF
}

/// Number of worker threads, capped by `SAL_THREADS` when set.
pub fn thread_budget() -> usize {
    let hw = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
    match std::env::var("SAL_THREADS").ok().and_then(|v| v.trim().parse::<usize>().ok()) {
        Some(n) if n >= 1 => n.min(hw.max(1)),
        _ => hw,
    }
}

/// Pairwise sum evaluated with up to `threads` workers. Bit-identical to
/// [`pairwise_sum`] for every thread count.
pub fn par_pairwise_sum<T: Real>(xs: &[T], threads: usize) -> T {
    par_rec(xs, threads.max(1))
}

fn par_rec<T: Real>(xs: &[T], threads: usize) -> T {
    if threads <= 1 || xs.len() <= 8 * LEAF {
        return pairwise_sum(xs);
    }
    let mid = split_point(xs.len());
    let (a, b) = xs.split_at(mid);
    let (ta, tb) = (threads / 2, threads - threads / 2);
    std::thread::scope(|s| {
        let h = s.spawn(move || par_rec(a, ta));
        let right = par_rec(b, tb);
        h.join().expect("summation worker") + right
    })
}

/// Sum `f(i)` for `i in 0..n` using the fixed pairwise tree.
pub fn par_map_sum<T: Real, F>(n: usize, f: F) -> T
where
    F: Fn(usize) -> T + Sync,
{
    let threads = thread_budget();
    let vals: Vec<T> = if threads <= 1 || n < 4 * LEAF {
        (0..n).map(&f).collect()
    } else {
        let chunk = n.div_ceil(threads);
        let mut out = vec![T::zero(); n];
        std::thread::scope(|s| {
            for (c, slot) in out.chunks_mut(chunk).enumerate() {
                let f = &f;
                s.spawn(move || {
                    for (j, v) in slot.iter_mut().enumerate() {
                        *v = f(c * chunk + j);
                    }
                });
            }
        });
        out
    };
    par_pairwise_sum(&vals, threads)
}
