//! Batch-evaluation helpers with a sequential fallback.
//!
//! All hot loops in the crate (frequency-grid sweeps, design-candidate
//! scoring, attack-trial batches) funnel through [`map_collect`]. With the
//! `parallel` feature enabled it is an order-preserving rayon map; without it,
//! a plain iterator map. Reductions always happen sequentially on the
//! collected output, so results are bit-identical across both builds and any
//! thread count.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Map `f` over `items`, preserving input order in the output.
#[cfg(feature = "parallel")]
pub fn map_collect<I, O, F>(items: &[I], f: F) -> Vec<O>
where
    I: Sync,
    O: Send,
    F: Fn(&I) -> O + Sync + Send,
{
    items.par_iter().map(f).collect()
}

/// Map `f` over `items`, preserving input order in the output.
#[cfg(not(feature = "parallel"))]
pub fn map_collect<I, O, F>(items: &[I], f: F) -> Vec<O>
where
    F: Fn(&I) -> O,
{
    items.iter().map(f).collect()
}

/// Always-sequential map, kept for benchmark comparison against
/// [`map_collect`] and for callers that must avoid the thread pool.
pub fn seq_map_collect<I, O, F>(items: &[I], f: F) -> Vec<O>
where
    F: Fn(&I) -> O,
{
    items.iter().map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parallel_and_sequential_agree_bitwise() {
        let xs: Vec<f64> = (0..10_000).map(|i| i as f64 * 0.1).collect();
        let f = |x: &f64| (x.sin() * x.exp_m1()).to_bits();
        assert_eq!(map_collect(&xs, f), seq_map_collect(&xs, f));
    }

    #[test]
    fn preserves_order() {
        let xs: Vec<usize> = (0..1000).collect();
        let ys = map_collect(&xs, |&x| x * 2);
        assert!(ys.windows(2).all(|w| w[0] < w[1]));
    }
}
