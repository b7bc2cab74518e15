//! Data-parallel execution with a sequential fallback.
//!
//! Every bulk loop in the engine goes through [`Exec`]. With the `parallel`
//! feature (on by default) the work is spread over the rayon pool; without it,
//! or with [`Exec::Sequential`], the same closures run on the calling thread.
//!
//! Reductions are always split into fixed-size chunks and merged in chunk
//! order, so floating-point sums come out bit-identical in both modes.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Chunk length used by order-sensitive reductions.
pub const REDUCE_CHUNK: usize = 1 << 15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Exec {
    #[cfg_attr(not(feature = "parallel"), default)]
    Sequential,
    #[cfg(feature = "parallel")]
    #[default]
    Parallel,
}

impl Exec {
    /// All modes compiled into this build.
    pub fn available() -> &'static [Exec] {
        #[cfg(feature = "parallel")]
        {
            &[Exec::Sequential, Exec::Parallel]
        }
        #[cfg(not(feature = "parallel"))]
        {
            &[Exec::Sequential]
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Exec::Sequential => "sequential",
            #[cfg(feature = "parallel")]
            Exec::Parallel => "parallel",
        }
    }

    /// Order-preserving map.
    pub fn map<T, R, F>(self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        match self {
            Exec::Sequential => items.iter().map(f).collect(),
            #[cfg(feature = "parallel")]
            Exec::Parallel => items.par_iter().map(f).collect(),
        }
    }

    /// Order-preserving filter.
    pub fn filter<T, F>(self, items: &[T], keep: F) -> Vec<T>
    where
        T: Copy + Send + Sync,
        F: Fn(&T) -> bool + Sync + Send,
    {
        match self {
            Exec::Sequential => items.iter().copied().filter(|x| keep(x)).collect(),
            #[cfg(feature = "parallel")]
            Exec::Parallel => items.par_iter().copied().filter(|x| keep(x)).collect(),
        }
    }

    /// Maps each `chunk`-sized slice to a partial result; partials are
    /// returned in slice order.
    pub fn map_chunks<T, R, F>(self, items: &[T], chunk: usize, f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&[T]) -> R + Sync + Send,
    {
        let chunk = chunk.max(1);
        match self {
            Exec::Sequential => items.chunks(chunk).map(f).collect(),
            #[cfg(feature = "parallel")]
            Exec::Parallel => items.par_chunks(chunk).map(f).collect(),
        }
    }

    /// Chunked fold followed by an in-order merge of the partials.
    pub fn fold_chunks<T, A, F, M>(self, items: &[T], init: A, fold: F, merge: M) -> A
    where
        T: Sync,
        A: Send,
        F: Fn(&[T]) -> A + Sync + Send,
        M: Fn(A, A) -> A,
    {
        self.map_chunks(items, REDUCE_CHUNK, fold)
            .into_iter()
            .fold(init, merge)
    }

    /// Unstable sort; only safe for keys without ties or where tie order
    /// does not matter.
    pub fn sort_unstable<T: Ord + Send>(self, items: &mut [T]) {
        match self {
            Exec::Sequential => items.sort_unstable(),
            #[cfg(feature = "parallel")]
            Exec::Parallel => items.par_sort_unstable(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modes_agree_on_float_reduction() {
        let xs: Vec<f64> = (0..200_000).map(|i| (i as f64).sqrt() * 1e-3).collect();
        let sums: Vec<f64> = Exec::available()
            .iter()
            .map(|m| m.fold_chunks(&xs, 0.0, |c| c.iter().sum::<f64>(), |a, b| a + b))
            .collect();
        assert!(sums.windows(2).all(|w| w[0].to_bits() == w[1].to_bits()));
    }

    #[test]
    fn map_and_filter_preserve_order() {
        let xs: Vec<u32> = (0..100_000).collect();
        for m in Exec::available() {
            let ys = m.map(&xs, |x| x * 2);
            assert!(ys.windows(2).all(|w| w[0] < w[1]));
            let odd = m.filter(&xs, |x| x % 2 == 1);
            assert_eq!(odd.len(), 50_000);
            assert!(odd.windows(2).all(|w| w[0] < w[1]));
        }
    }
}
