//! Data-parallel helpers that fall back to sequential loops without the
//! `parallel` feature.
//!
//! Reductions are chunked and summed in chunk order, so results do not
//! depend on the number of worker threads.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

const CHUNK: usize = 1024;

pub fn for_each_mut<T: Send, F>(data: &mut [T], f: F)
where
    F: Fn(usize, &mut T) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    data.par_chunks_mut(CHUNK).enumerate().for_each(|(c, chunk)| {
        for (i, v) in chunk.iter_mut().enumerate() {
            f(c * CHUNK + i, v);
        }
    });
    #[cfg(not(feature = "parallel"))]
    for (i, v) in data.iter_mut().enumerate() {
        f(i, v);
    }
}

pub fn map<T: Sync, U: Send, F>(data: &[T], f: F) -> Vec<U>
where
    F: Fn(usize, &T) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        data.par_iter().enumerate().map(|(i, v)| f(i, v)).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        data.iter().enumerate().map(|(i, v)| f(i, v)).collect()
    }
}

pub fn map_range<U: Send, F>(n: usize, f: F) -> Vec<U>
where
    F: Fn(usize) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}

/// Deterministic sum of `f(i, x_i)`.
pub fn sum<T: Sync, F>(data: &[T], f: F) -> f64
where
    F: Fn(usize, &T) -> f64 + Sync + Send,
{
    let partial: Vec<f64> = {
        #[cfg(feature = "parallel")]
        {
            data.par_chunks(CHUNK)
                .enumerate()
                .map(|(c, chunk)| chunk_sum(c, chunk, &f))
                .collect()
        }
        #[cfg(not(feature = "parallel"))]
        {
            data.chunks(CHUNK)
                .enumerate()
                .map(|(c, chunk)| chunk_sum(c, chunk, &f))
                .collect()
        }
    };
    partial.iter().sum()
}

/// Deterministic maximum of `f(i, x_i)`; `0.0` for empty input.
pub fn max<T: Sync, F>(data: &[T], f: F) -> f64
where
    F: Fn(usize, &T) -> f64 + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        data.par_iter()
            .enumerate()
            .map(|(i, v)| f(i, v))
            .reduce(|| 0.0, f64::max)
    }
    #[cfg(not(feature = "parallel"))]
    {
        data.iter()
            .enumerate()
            .map(|(i, v)| f(i, v))
            .fold(0.0, f64::max)
    }
}

fn chunk_sum<T, F>(c: usize, chunk: &[T], f: &F) -> f64
where
    F: Fn(usize, &T) -> f64,
{
    chunk
        .iter()
        .enumerate()
        .map(|(i, v)| f(c * CHUNK + i, v))
        .sum()
}
