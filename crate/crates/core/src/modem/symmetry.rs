//! Shift-dependent conjugate time-reversal structure of Alamouti frames
//! with expansion factor 2.
//!
//! Split the antenna sequences, advanced by `tau` samples, into blocks of
//! `N + cp`. For the shifts below, block `i` of antenna 0 equals the
//! conjugate time reversal of block `i + 1` of antenna 1 on the listed sample
//! ranges, and only there:
//!
//! | tau          | i      | n                                        |
//! |--------------|--------|------------------------------------------|
//! | 0            | even   | `0..N+cp`                                |
//! | N/4          | even   | `0..=cp`, `N/4+cp+1..3N/4+cp`            |
//! | N/2          | even   | `0..=cp`                                 |
//! | N/2 + cp     | odd    | `N/2..=N/2+2cp`                          |
//! | 3N/4         | even   | `0..=cp`                                 |
//! | 3N/4 + cp    | odd    | `N/4..=3N/4+2cp`                         |

use std::ops::Range;

/// Parity of the first block index `i` of the pair `(i, i + 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockParity {
    Even,
    Odd,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymmetryCase {
    pub tau: usize,
    pub parity: BlockParity,
    /// Sample ranges (within a block) where the identity holds.
    pub ranges: Vec<Range<usize>>,
}

impl SymmetryCase {
    pub fn contains(&self, n: usize) -> bool {
        self.ranges.iter().any(|r| r.contains(&n))
    }

    pub fn count(&self) -> usize {
        self.ranges.iter().map(|r| r.len()).sum()
    }
}

/// The six shifts at which the identity holds, for `N` divisible by 4 and
/// `cp < N/4` (larger prefixes push the last range past the block).
#[allow(clippy::single_range_in_vec_init)]
pub fn alamouti_symmetry_cases(n: usize, cp: usize) -> Vec<SymmetryCase> {
    assert!(n.is_multiple_of(4) && cp < n / 4, "need N divisible by 4 and cp < N/4");
    let q = n / 4;
    let even = BlockParity::Even;
    let odd = BlockParity::Odd;
    vec![
        SymmetryCase {
            tau: 0,
            parity: even,
            ranges: vec![0..n + cp],
        },
        SymmetryCase {
            tau: q,
            parity: even,
            ranges: vec![0..cp + 1, q + cp + 1..3 * q + cp],
        },
        SymmetryCase {
            tau: 2 * q,
            parity: even,
            ranges: vec![0..cp + 1],
        },
        SymmetryCase {
            tau: 2 * q + cp,
            parity: odd,
            ranges: vec![2 * q..2 * q + 2 * cp + 1],
        },
        SymmetryCase {
            tau: 3 * q,
            parity: even,
            ranges: vec![0..cp + 1],
        },
        SymmetryCase {
            tau: 3 * q + cp,
            parity: odd,
            ranges: vec![q..3 * q + 2 * cp + 1],
        },
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_match_peak_factors() {
        // Holding-sample counts are the peak amplitude factors of the
        // transmitted-signal statistic.
        let (n, cp) = (512, 64);
        let counts: Vec<usize> = alamouti_symmetry_cases(n, cp).iter().map(|c| c.count()).collect();
        assert_eq!(
            counts,
            vec![n + cp, n / 2 + cp, cp + 1, 2 * cp + 1, cp + 1, n / 2 + 2 * cp + 1]
        );
    }
}
