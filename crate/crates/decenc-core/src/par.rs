//! Data-parallel sweep execution.
//!
//! Individual simulator runs are sequential and deterministic, but parameter
//! sweeps are embarrassingly parallel: [`par_map`] fans independent items out
//! over rayon when the `parallel` feature is enabled (the default) and falls
//! back to a plain sequential loop otherwise. Results keep input order either
//! way, so output is identical across both paths.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Maps `f` over the items, in parallel when built with the `parallel`
/// feature.
pub fn par_map<T, U, F>(items: Vec<T>, f: F) -> Vec<U>
where
    T: Send,
    U: Send,
    F: Fn(T) -> U + Send + Sync,
{
    #[cfg(feature = "parallel")]
    {
        items.into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.into_iter().map(f).collect()
    }
}

/// Always-sequential map, kept as the baseline for benchmarks comparing the
/// two execution modes.
pub fn serial_map<T, U, F>(items: Vec<T>, f: F) -> Vec<U>
where
    F: Fn(T) -> U,
{
    items.into_iter().map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn par_and_serial_agree_and_keep_order() {
        let items: Vec<u64> = (0..100).collect();
        let a = par_map(items.clone(), |x| x * x);
        let b = serial_map(items, |x| x * x);
        assert_eq!(a, b);
        assert_eq!(a[7], 49);
    }
}
