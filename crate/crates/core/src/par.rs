//! Data-parallel helpers. With the `parallel` feature (default) the closures
//! run on the rayon pool; without it the same entry points run sequentially.
//!
//! Results are always assembled in index order and reductions happen
//! sequentially afterwards, so outputs are bit-identical across thread
//! counts and across the two build modes.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Map `0..count` through `f`, collecting results in index order.
pub fn map_indexed<U, F>(count: usize, f: F) -> Vec<U>
where
    U: Send,
    F: Fn(usize) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..count).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..count).map(f).collect()
    }
}

/// Sequential twin of [`map_indexed`]; exists so benchmarks can compare the
/// two paths inside one build.
pub fn map_indexed_seq<U, F>(count: usize, f: F) -> Vec<U>
where
    F: Fn(usize) -> U,
{
    (0..count).map(f).collect()
}

/// Apply `f` to consecutive equal-size chunks of `data`, in parallel when
/// enabled. `f` receives the chunk index and the chunk.
pub fn for_each_chunk_mut<T, F>(data: &mut [T], chunk: usize, f: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        data.par_chunks_mut(chunk).enumerate().for_each(|(i, c)| f(i, c));
    }
    #[cfg(not(feature = "parallel"))]
    {
        data.chunks_mut(chunk).enumerate().for_each(|(i, c)| f(i, c));
    }
}

/// Run `f` on a single-thread pool, giving an in-process sequential baseline
/// for benchmarks. Without the `parallel` feature this is a plain call.
pub fn run_single_threaded<R: Send>(f: impl FnOnce() -> R + Send) -> R {
    #[cfg(feature = "parallel")]
    {
        rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .expect("single-thread pool")
            .install(f)
    }
    #[cfg(not(feature = "parallel"))]
    {
        f()
    }
}
