//! Node-parallel map helpers.
//!
//! With the `parallel` feature each helper runs on rayon; without it the
//! same loops run sequentially. Every map writes an output element from its
//! index (and fixed read-only inputs) alone, so the result is bit-identical
//! for any thread count. Reductions never go through these helpers: they are
//! summed sequentially in index order by the callers.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// `out[i] = f(i)` for all i.
#[inline]
pub fn fill_indexed<F>(out: &mut [f64], f: F)
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        out.par_iter_mut().enumerate().for_each(|(i, o)| *o = f(i));
    }
    #[cfg(not(feature = "parallel"))]
    {
        for (i, o) in out.iter_mut().enumerate() {
            *o = f(i);
        }
    }
}

/// `out[i] = f(i, out[i])` for all i.
#[inline]
pub fn update_indexed<F>(out: &mut [f64], f: F)
where
    F: Fn(usize, f64) -> f64 + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        out.par_iter_mut()
            .enumerate()
            .for_each(|(i, o)| *o = f(i, *o));
    }
    #[cfg(not(feature = "parallel"))]
    {
        for (i, o) in out.iter_mut().enumerate() {
            *o = f(i, *o);
        }
    }
}

/// Splits `out` into consecutive chunks of `chunk` elements and calls
/// `f(chunk_index, chunk)` for each. Used for per-node component tuples and
/// per-voxel theta slices.
#[inline]
pub fn for_each_chunk<F>(out: &mut [f64], chunk: usize, f: F)
where
    F: Fn(usize, &mut [f64]) + Sync + Send,
{
    debug_assert_eq!(out.len() % chunk, 0);
    #[cfg(feature = "parallel")]
    {
        out.par_chunks_mut(chunk)
            .enumerate()
            .for_each(|(i, c)| f(i, c));
    }
    #[cfg(not(feature = "parallel"))]
    {
        for (i, c) in out.chunks_mut(chunk).enumerate() {
            f(i, c);
        }
    }
}
