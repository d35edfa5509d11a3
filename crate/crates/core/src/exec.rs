//! Data-parallel execution with a sequential fallback.
//!
//! Independent simulations (sweep cells, calibration probes) go through
//! [`map`], which preserves input order whichever backend runs them.

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exec {
    Sequential,
    /// Run on the rayon pool; `threads` sizes a dedicated pool when set.
    /// Without the `parallel` feature this runs sequentially.
    Parallel {
        threads: Option<usize>,
    },
}

impl Default for Exec {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Exec::Parallel { threads: None }
        } else {
            Exec::Sequential
        }
    }
}

impl Exec {
    /// Backend for a `--jobs`-style request: 1 means sequential.
    pub fn with_jobs(jobs: Option<usize>) -> Self {
        match jobs {
            Some(1) => Exec::Sequential,
            Some(n) => Exec::Parallel { threads: Some(n.max(1)) },
            None => Exec::default(),
        }
    }
}

/// Applies `f` to every item, returning results in input order.
pub fn map<T, R, F>(exec: Exec, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    match exec {
        Exec::Sequential => items.iter().map(f).collect(),
        Exec::Parallel { threads } => parallel_map(threads, items, f),
    }
}

#[cfg(feature = "parallel")]
fn parallel_map<T, R, F>(threads: Option<usize>, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    use rayon::prelude::*;
    match threads {
        None => items.par_iter().map(f).collect(),
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| items.par_iter().map(&f).collect()),
            Err(e) => {
                log::warn!("could not build a {n}-thread pool ({e}); using the global pool");
                items.par_iter().map(f).collect()
            }
        },
    }
}

#[cfg(not(feature = "parallel"))]
fn parallel_map<T, R, F>(_threads: Option<usize>, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    items.iter().map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_preserved() {
        let items: Vec<u64> = (0..1000).collect();
        let f = |x: &u64| x * x + 1;
        let seq = map(Exec::Sequential, &items, f);
        assert_eq!(seq, map(Exec::Parallel { threads: None }, &items, f));
        assert_eq!(seq, map(Exec::Parallel { threads: Some(3) }, &items, f));
    }

    #[test]
    fn jobs_mapping() {
        assert_eq!(Exec::with_jobs(Some(1)), Exec::Sequential);
        assert_eq!(Exec::with_jobs(Some(4)), Exec::Parallel { threads: Some(4) });
    }
}
