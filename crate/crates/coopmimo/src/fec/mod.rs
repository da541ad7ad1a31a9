//! Outer transmission chain: convolutional code, random interleaver, QAM
//! mapping, soft demapping and soft remapping for the iterative receiver.

pub mod conv;
pub mod interleave;
pub mod qam;

use num_complex::Complex;

pub use conv::{
    conv_encode, depuncture, encode_mother, puncture, puncture_select, siso_decode, CodeConfig,
    CodeRate, DecodeOutput, TAIL_BITS,
};
pub use interleave::InterleaverMap;
pub use qam::{clamp_llr, qam_map, soft_demap, soft_map, Constellation, LLR_CLAMP};

use crate::error::{Result, SimError};
use crate::scalar::Scalar;

/// Per-symbol detector output handed to the demapper: the phase-combined
/// estimate plus the scalar Gaussian model it lives in.
#[derive(Debug, Clone, Copy)]
pub struct SymbolEstimate<T> {
    pub value: Complex<T>,
    pub gain: T,
    pub noise_var: T,
}

/// Bit-level framing of one space-time codeword block.
#[derive(Debug, Clone, Copy)]
pub struct FecChain {
    pub code: CodeConfig,
    pub constellation: Constellation,
    /// Transmitted coded bits per block (= Q * bits per symbol).
    pub coded_bits: usize,
    /// Information bits per block, tail excluded.
    pub info_bits: usize,
}

impl FecChain {
    /// Validates that `q_symbols` QAM symbols carry a whole terminated
    /// codeword at the configured rate.
    pub fn new(
        code: CodeConfig,
        constellation: Constellation,
        q_symbols: usize,
    ) -> Result<Self> {
        let coded_bits = q_symbols * constellation.bits_per_symbol();
        let info_bits = code.info_len(coded_bits)?;
        Ok(Self {
            code,
            constellation,
            coded_bits,
            info_bits,
        })
    }

    pub fn mother_len(&self) -> usize {
        2 * (self.info_bits + TAIL_BITS)
    }

    /// Encode, interleave and map one block of information bits.
    pub fn transmit<T: Scalar>(
        &self,
        info: &[u8],
        interleaver: &InterleaverMap,
    ) -> Result<Vec<Complex<T>>> {
        if info.len() != self.info_bits {
            return Err(SimError::Framing(format!(
                "expected {} information bits, got {}",
                self.info_bits,
                info.len()
            )));
        }
        let coded = conv_encode(info, &self.code);
        debug_assert_eq!(coded.len(), self.coded_bits);
        qam_map(&interleaver.interleave(&coded), self.constellation)
    }

    /// Demap, deinterleave and decode one block.
    pub fn receive_iteration<T: Scalar>(
        &self,
        estimates: &[SymbolEstimate<T>],
        interleaver: &InterleaverMap,
    ) -> Result<DecodeOutput<T>> {
        let mut llrs = Vec::with_capacity(self.coded_bits);
        for e in estimates {
            llrs.extend(soft_demap(e.value, e.gain, e.noise_var, self.constellation)?);
        }
        if llrs.len() != self.coded_bits {
            return Err(SimError::Framing(format!(
                "demapped {} LLRs for a {}-bit block",
                llrs.len(),
                self.coded_bits
            )));
        }
        siso_decode(&interleaver.deinterleave(&llrs), &self.code)
    }

    /// Soft-mapped feedback symbols from the decoder's coded-bit APPs.
    pub fn feedback_symbols<T: Scalar>(
        &self,
        coded_app: &[T],
        interleaver: &InterleaverMap,
    ) -> Vec<Complex<T>> {
        let transmitted = puncture_select(coded_app, self.code.rate);
        let ordered = interleaver.interleave(&transmitted);
        ordered
            .chunks_exact(self.constellation.bits_per_symbol())
            .map(|chunk| soft_map(chunk, self.constellation))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::{derive_rng, Stream};
    use rand::Rng;

    fn chains() -> Vec<(FecChain, usize)> {
        // The three efficiency-4 configurations: (rate, constellation, Q).
        vec![
            (
                FecChain::new(CodeConfig::new(CodeRate::TwoThirds), Constellation::Qam64, 2)
                    .unwrap(),
                2,
            ),
            (
                FecChain::new(CodeConfig::new(CodeRate::Half), Constellation::Qam16, 4).unwrap(),
                4,
            ),
            (
                FecChain::new(CodeConfig::new(CodeRate::Half), Constellation::Qam16, 8).unwrap(),
                8,
            ),
        ]
    }

    #[test]
    fn framing_of_the_three_configurations() {
        let c = chains();
        assert_eq!(c[0].0.info_bits, 2);
        assert_eq!(c[1].0.info_bits, 2);
        assert_eq!(c[2].0.info_bits, 10);
        for (chain, q) in c {
            assert_eq!(chain.coded_bits, q * chain.constellation.bits_per_symbol());
        }
    }

    #[test]
    fn identity_channel_round_trip_all_configs() {
        let mut rng = derive_rng(31, Stream::Frame, 0, 0);
        for (chain, q) in chains() {
            for _ in 0..50 {
                let info: Vec<u8> = (0..chain.info_bits).map(|_| rng.gen_range(0..2u8)).collect();
                let il = InterleaverMap::new(chain.coded_bits, &mut rng);
                let symbols = chain.transmit::<f64>(&info, &il).unwrap();
                assert_eq!(symbols.len(), q);
                let estimates: Vec<SymbolEstimate<f64>> = symbols
                    .iter()
                    .map(|&s| SymbolEstimate {
                        value: s,
                        gain: 1.0,
                        noise_var: 1e-9,
                    })
                    .collect();
                let out = chain.receive_iteration(&estimates, &il).unwrap();
                assert_eq!(out.info_bits, info);
            }
        }
    }

    #[test]
    fn feedback_symbols_reproduce_transmission_under_saturated_apps() {
        let mut rng = derive_rng(32, Stream::Frame, 0, 0);
        for (chain, _) in chains() {
            let info: Vec<u8> = (0..chain.info_bits).map(|_| rng.gen_range(0..2u8)).collect();
            let il = InterleaverMap::new(chain.coded_bits, &mut rng);
            let symbols = chain.transmit::<f64>(&info, &il).unwrap();
            let mother = encode_mother(&info);
            let apps: Vec<f64> = mother
                .iter()
                .map(|&b| if b == 0 { LLR_CLAMP } else { -LLR_CLAMP })
                .collect();
            let fed = chain.feedback_symbols(&apps, &il);
            for (a, b) in fed.iter().zip(&symbols) {
                assert!((a - b).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn transmit_rejects_wrong_info_length() {
        let (chain, _) = &chains()[0];
        let mut rng = derive_rng(33, Stream::Frame, 0, 0);
        let il = InterleaverMap::new(chain.coded_bits, &mut rng);
        assert!(chain.transmit::<f64>(&[0u8; 5], &il).is_err());
    }
}
