//! Concurrent sweep execution with an order-independent merge.

/// Worker count from `LAB_THREADS`; `None` when unset or invalid.
pub fn thread_cap() -> Option<usize> {
    std::env::var("LAB_THREADS").ok()?.trim().parse().ok().filter(|&n| n > 0)
}

/// Evaluates `f` on every point and returns results in input order.
#[cfg(feature = "parallel")]
pub fn run<P, R, F>(points: &[P], f: F) -> Vec<R>
where
    P: Sync,
    R: Send,
    F: Fn(&P) -> R + Sync + Send,
{
    use rayon::prelude::*;
    let work = || points.par_iter().map(&f).collect();
    match thread_cap() {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(work),
            Err(_) => work(),
        },
        None => work(),
    }
}

#[cfg(not(feature = "parallel"))]
pub fn run<P, R, F>(points: &[P], f: F) -> Vec<R>
where
    F: Fn(&P) -> R,
{
    points.iter().map(f).collect()
}

/// Sorts `(key, row)` pairs by key so permuted inputs give the same table.
pub fn merge_sorted<R>(mut rows: Vec<(f64, R)>) -> Vec<R> {
    rows.sort_by(|a, b| a.0.total_cmp(&b.0));
    rows.into_iter().map(|(_, r)| r).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn keeps_input_order() {
        let pts: Vec<u32> = (0..50).collect();
        assert_eq!(run(&pts, |p| p * 2), pts.iter().map(|p| p * 2).collect::<Vec<_>>());
    }

    #[test]
    fn merge_is_permutation_invariant() {
        let a = merge_sorted(vec![(0.3, "c"), (0.1, "a"), (0.2, "b")]);
        let b = merge_sorted(vec![(0.2, "b"), (0.3, "c"), (0.1, "a")]);
        assert_eq!(a, b);
    }
}
