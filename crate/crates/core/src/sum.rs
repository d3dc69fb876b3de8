//! Compensated summation and order-stable parallel reductions.
//!
//! Every reduction in the crate goes through [`block_sum`], which splits the
//! index range into blocks of a fixed size, sums each block with Neumaier's
//! compensated algorithm and merges the partial sums in block order. The
//! block layout does not depend on the number of worker threads, so results
//! are bit-identical between serial and parallel runs.

use rayon::prelude::*;

/// Rows per reduction block.
pub const BLOCK: usize = 32;

/// Neumaier's variant of Kahan summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.compensation += (self.sum - t) + value;
        } else {
            self.compensation += (value - t) + self.sum;
        }
        self.sum = t;
    }

    /// Folds another partial sum (both its value and its carried error) into this one.
    #[inline]
    pub fn merge(&mut self, other: &CompensatedSum) {
        self.add(other.sum);
        self.add(other.compensation);
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::new();
        for v in iter {
            acc.add(v);
        }
        acc
    }
}

/// Sums `f(i)` over `0..n` with a thread-count independent result.
///
/// `f` receives a row index and an accumulator; it may add any number of
/// terms. Errors short-circuit; the first failing block in index order wins.
pub fn block_sum<E, F>(n: usize, f: F) -> Result<f64, E>
where
    E: Send,
    F: Fn(usize, &mut CompensatedSum) -> Result<(), E> + Sync,
{
    let blocks: Vec<Result<CompensatedSum, E>> = (0..n.div_ceil(BLOCK))
        .into_par_iter()
        .map(|b| {
            let mut acc = CompensatedSum::new();
            for i in b * BLOCK..((b + 1) * BLOCK).min(n) {
                f(i, &mut acc)?;
            }
            Ok(acc)
        })
        .collect();
    let mut total = CompensatedSum::new();
    for block in blocks {
        total.merge(&block?);
    }
    Ok(total.value())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_cancelled_terms() {
        let terms = [1e16, 1.0, -1e16, 1.0];
        let s: CompensatedSum = terms.iter().copied().collect();
        assert_eq!(s.value(), 2.0);
        assert_eq!(terms.iter().sum::<f64>(), 1.0);
    }

    #[test]
    fn block_sum_matches_serial_compensated() {
        let n = 1000;
        let f = |i: usize| ((i as f64) * 0.37).sin() * 1e-3 + 1.0 / (1.0 + i as f64);
        let par = block_sum::<(), _>(n, |i, acc| {
            acc.add(f(i));
            Ok(())
        })
        .unwrap();
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let ser = one
            .install(|| {
                block_sum::<(), _>(n, |i, acc| {
                    acc.add(f(i));
                    Ok(())
                })
            })
            .unwrap();
        assert_eq!(par.to_bits(), ser.to_bits());
    }

    #[test]
    fn block_sum_propagates_first_error() {
        let r = block_sum(100, |i, _acc| if i >= 40 { Err(i) } else { Ok(()) });
        assert_eq!(r, Err(40));
    }
}
