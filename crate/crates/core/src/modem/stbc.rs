use super::{FreqBlock, StbcScheme};
use crate::error::{Error, Result};

/// Output of the space-time encoder: `slots[u][f]` is the block sent from
/// antenna `f` in slot `u`.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodedSlots {
    pub slots: Vec<[FreqBlock; 2]>,
}

/// Encodes the pair `(D_2b, D_2b+1)`.
///
/// Alamouti: antenna 0 sends `(D_2b, -D*_2b+1)`, antenna 1 sends
/// `(D_2b+1, D*_2b)` over two slots. Spatial multiplexing sends `D_2b` and
/// `D_2b+1` from antennas 0 and 1 in a single slot.
pub fn stbc_encode(scheme: StbcScheme, even: &FreqBlock, odd: &FreqBlock) -> Result<EncodedSlots> {
    if even.len() != odd.len() {
        return Err(Error::invalid(format!(
            "block length mismatch: {} vs {}",
            even.len(),
            odd.len()
        )));
    }
    let slots = match scheme {
        StbcScheme::Alamouti => vec![[even.clone(), odd.clone()], [odd.neg_conj(), even.conj()]],
        StbcScheme::SpatialMultiplexing => vec![[even.clone(), odd.clone()]],
    };
    Ok(EncodedSlots { slots })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn blk(v: &[(f64, f64)]) -> FreqBlock {
        FreqBlock(v.iter().map(|&(r, i)| Complex64::new(r, i)).collect())
    }

    #[test]
    fn alamouti_example() {
        let e = stbc_encode(StbcScheme::Alamouti, &blk(&[(2.0, 0.0)]), &blk(&[(0.0, 1.0)])).unwrap();
        assert_eq!(e.slots.len(), 2);
        // antenna 0: (2, j); antenna 1: (j, 2)
        assert_eq!(e.slots[0][0], blk(&[(2.0, 0.0)]));
        assert_eq!(e.slots[1][0], blk(&[(-0.0, 1.0)]));
        assert_eq!(e.slots[0][1], blk(&[(0.0, 1.0)]));
        assert_eq!(e.slots[1][1], blk(&[(2.0, -0.0)]));
    }

    #[test]
    fn alamouti_unit_blocks() {
        let one = blk(&[(1.0, 0.0)]);
        let e = stbc_encode(StbcScheme::Alamouti, &one, &one).unwrap();
        assert_eq!(e.slots[0][0], one);
        assert_eq!(e.slots[1][0], blk(&[(-1.0, 0.0)]));
        assert_eq!(e.slots[0][1], one);
        assert_eq!(e.slots[1][1], one);
    }

    #[test]
    fn spatial_multiplexing_passthrough() {
        let e = stbc_encode(StbcScheme::SpatialMultiplexing, &blk(&[(2.0, 0.0)]), &blk(&[(0.0, 1.0)])).unwrap();
        assert_eq!(e.slots.len(), 1);
        assert_eq!(e.slots[0][0], blk(&[(2.0, 0.0)]));
        assert_eq!(e.slots[0][1], blk(&[(0.0, 1.0)]));
    }

    #[test]
    fn length_mismatch() {
        assert!(stbc_encode(StbcScheme::Alamouti, &blk(&[(1.0, 0.0)]), &blk(&[])).is_err());
    }
}
