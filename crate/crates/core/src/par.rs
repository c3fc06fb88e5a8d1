//! Order-preserving map over independent work items.
//!
//! With the `parallel` feature the map fans out on the rayon pool; without
//! it, or with [`Execution::Sequential`], it is a plain loop. Both return
//! results in input order, so downstream output is identical either way.

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    /// Whether `Parallel` actually runs in parallel in this build.
    pub fn parallel_available() -> bool {
        cfg!(feature = "parallel")
    }
}

pub fn ordered_map<T, R, F>(items: &[T], exec: Execution, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(usize, &T) -> R + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            items.par_iter().enumerate().map(|(i, t)| f(i, t)).collect()
        }
        _ => items.iter().enumerate().map(|(i, t)| f(i, t)).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_preserved() {
        let xs: Vec<u64> = (0..1000).collect();
        let a = ordered_map(&xs, Execution::Parallel, |i, x| (i as u64) * x);
        let b = ordered_map(&xs, Execution::Sequential, |i, x| (i as u64) * x);
        assert_eq!(a, b);
    }
}
