//! Random per-block bit interleaver.

use rand::Rng;

/// A seeded permutation of coded-bit indices, applied per codeword block.
#[derive(Debug, Clone)]
pub struct InterleaverMap {
    /// `perm[i]` is the output index of input bit `i`.
    perm: Vec<usize>,
    /// `inverse[p]` is the input index landing at output `p`.
    inverse: Vec<usize>,
}

impl InterleaverMap {
    pub fn new<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Self {
        let mut perm: Vec<usize> = (0..len).collect();
        // Fisher-Yates.
        for i in (1..len).rev() {
            let j = rng.gen_range(0..=i);
            perm.swap(i, j);
        }
        let mut inverse = vec![0usize; len];
        for (i, &p) in perm.iter().enumerate() {
            inverse[p] = i;
        }
        Self { perm, inverse }
    }

    pub fn len(&self) -> usize {
        self.perm.len()
    }

    pub fn is_empty(&self) -> bool {
        self.perm.is_empty()
    }

    pub fn interleave<T: Copy>(&self, input: &[T]) -> Vec<T> {
        assert_eq!(input.len(), self.perm.len(), "interleaver length mismatch");
        self.inverse.iter().map(|&i| input[i]).collect()
    }

    pub fn deinterleave<T: Copy>(&self, input: &[T]) -> Vec<T> {
        assert_eq!(input.len(), self.perm.len(), "interleaver length mismatch");
        self.perm.iter().map(|&p| input[p]).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::{derive_rng, Stream};
    use proptest::prelude::*;

    #[test]
    fn deterministic_per_seed() {
        let mut a = derive_rng(9, Stream::Interleaver, 0, 0);
        let mut b = derive_rng(9, Stream::Interleaver, 0, 0);
        assert_eq!(
            InterleaverMap::new(64, &mut a).perm,
            InterleaverMap::new(64, &mut b).perm
        );
    }

    proptest! {
        #[test]
        fn round_trip_is_identity(len in 1usize..200, seed in 0u64..1000) {
            let mut rng = derive_rng(seed, Stream::Interleaver, 0, 0);
            let map = InterleaverMap::new(len, &mut rng);
            let data: Vec<u32> = (0..len as u32).collect();
            prop_assert_eq!(map.deinterleave(&map.interleave(&data)), data);
        }

        #[test]
        fn permutation_is_bijective(len in 1usize..200, seed in 0u64..1000) {
            let mut rng = derive_rng(seed, Stream::Interleaver, 0, 0);
            let map = InterleaverMap::new(len, &mut rng);
            let mut seen = vec![false; len];
            for &p in &map.perm {
                prop_assert!(!seen[p]);
                seen[p] = true;
            }
        }
    }
}
