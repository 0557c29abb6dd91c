//! Robust joint typicality: every cell's empirical frequency within `±δ` of its
//! model probability, and no occurrences at all of zero-probability cells.

#[derive(Debug, Clone)]
pub struct TypicalityTest {
    probs: Vec<f64>,
    delta: f64,
}

impl TypicalityTest {
    /// `probs` is the flattened model law of the tuple being tested.
    pub fn new(probs: Vec<f64>, delta: f64) -> Self {
        Self { probs, delta }
    }

    pub fn cells(&self) -> usize {
        self.probs.len()
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    #[inline]
    pub fn is_forbidden(&self, cell: usize) -> bool {
        self.probs[cell] == 0.0
    }

    /// Frequency check on a complete count vector over `n` positions.
    pub fn accepts_counts(&self, counts: &[u32], n: usize) -> bool {
        let n = n as f64;
        counts.iter().zip(&self.probs).all(|(&c, &p)| {
            if p == 0.0 {
                c == 0
            } else {
                (c as f64 / n - p).abs() <= self.delta
            }
        })
    }

    /// Tests a sequence given as one cell index per position.
    pub fn is_typical(&self, cells: &[usize]) -> bool {
        let mut counts = vec![0u32; self.probs.len()];
        for &c in cells {
            if self.is_forbidden(c) {
                return false;
            }
            counts[c] += 1;
        }
        self.accepts_counts(&counts, cells.len())
    }
}

/// Reusable count buffer for scanning many candidate sequences.
pub(crate) struct Scanner<'a> {
    test: &'a TypicalityTest,
    counts: Vec<u32>,
}

impl<'a> Scanner<'a> {
    pub fn new(test: &'a TypicalityTest) -> Self {
        Self {
            test,
            counts: vec![0; test.cells()],
        }
    }

    /// Same verdict as [`TypicalityTest::is_typical`], rejecting early on forbidden cells.
    pub fn check(&mut self, cells: impl Iterator<Item = usize>) -> bool {
        self.counts.iter_mut().for_each(|c| *c = 0);
        let mut n = 0;
        for c in cells {
            if self.test.is_forbidden(c) {
                return false;
            }
            self.counts[c] += 1;
            n += 1;
        }
        self.test.accepts_counts(&self.counts, n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_cells_are_forbidden() {
        let t = TypicalityTest::new(vec![0.5, 0.5, 0.0], 1.0);
        assert!(t.is_typical(&[0, 1, 0, 1]));
        assert!(!t.is_typical(&[0, 1, 2, 1]));
    }

    #[test]
    fn frequency_slack() {
        let t = TypicalityTest::new(vec![0.5, 0.5], 0.1);
        assert!(t.is_typical(&[0, 1, 0, 1]));
        assert!(!t.is_typical(&[0, 0, 0, 1]));
        let loose = TypicalityTest::new(vec![0.5, 0.5], 0.25);
        assert!(loose.is_typical(&[0, 0, 0, 1]));
    }

    #[test]
    fn scanner_matches_direct_test() {
        let t = TypicalityTest::new(vec![0.25, 0.25, 0.5, 0.0], 0.2);
        let mut s = Scanner::new(&t);
        let seqs: [&[usize]; 4] = [&[0, 1, 2, 2], &[0, 0, 0, 2], &[3, 1, 2, 2], &[2, 2, 1, 0]];
        for q in seqs {
            assert_eq!(s.check(q.iter().copied()), t.is_typical(q), "{q:?}");
        }
    }
}
