//! Rate-1/2 (133,171) convolutional code with optional puncturing to 2/3,
//! plus a soft-input max-log-MAP decoder over the 64-state trellis.

use crate::error::{Result, SimError};
use crate::scalar::Scalar;

/// Generator polynomials, octal 133 and 171, constraint length 7. Bit 6 of
/// each tap mask applies to the current input bit, bit 0 to the oldest.
const G0: u8 = 0o133;
const G1: u8 = 0o171;
const CONSTRAINT_LEN: usize = 7;
const MEMORY: usize = CONSTRAINT_LEN - 1;
const NUM_STATES: usize = 1 << MEMORY;
/// Tail bits appended to drive the trellis back to the zero state.
pub const TAIL_BITS: usize = MEMORY;

const NEG_INF: f64 = -1.0e300;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CodeRate {
    Half,
    TwoThirds,
}

impl CodeRate {
    /// (numerator, denominator) of the information rate.
    pub fn as_fraction(self) -> (u32, u32) {
        match self {
            CodeRate::Half => (1, 2),
            CodeRate::TwoThirds => (2, 3),
        }
    }
}

/// Outer code configuration. The mother code is fixed; only the puncturing
/// (and with it the rate) varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CodeConfig {
    pub rate: CodeRate,
}

impl CodeConfig {
    pub fn new(rate: CodeRate) -> Self {
        Self { rate }
    }

    /// Transmitted coded bits for `info` information bits (tail included).
    pub fn coded_len(&self, info: usize) -> usize {
        let steps = info + TAIL_BITS;
        match self.rate {
            CodeRate::Half => 2 * steps,
            CodeRate::TwoThirds => 3 * steps / 2,
        }
    }

    /// Information bits that fit a transmitted block of `coded` bits, or an
    /// error when the framing does not divide evenly.
    pub fn info_len(&self, coded: usize) -> Result<usize> {
        let steps = match self.rate {
            CodeRate::Half => {
                if coded % 2 != 0 {
                    return Err(SimError::Framing(format!(
                        "rate-1/2 block of {coded} bits is not an even number"
                    )));
                }
                coded / 2
            }
            CodeRate::TwoThirds => {
                if coded % 3 != 0 || (2 * coded / 3) % 2 != 0 {
                    return Err(SimError::Framing(format!(
                        "rate-2/3 block of {coded} bits does not fit the puncturing period"
                    )));
                }
                2 * coded / 3
            }
        };
        if steps <= TAIL_BITS {
            return Err(SimError::Framing(format!(
                "coded block of {coded} bits leaves no information bits after the tail"
            )));
        }
        Ok(steps - TAIL_BITS)
    }
}

#[inline]
fn parity(x: u8) -> u8 {
    (x.count_ones() & 1) as u8
}

/// Mother-code output pair for (state, input bit).
#[inline]
fn step_outputs(state: u8, bit: u8) -> (u8, u8) {
    let full = (bit << MEMORY) | state;
    (parity(full & G0), parity(full & G1))
}

#[inline]
fn next_state(state: u8, bit: u8) -> u8 {
    ((bit << MEMORY) | state) >> 1
}

/// Encodes `info` bits, appends the zero tail, and punctures to the
/// configured rate. Bits are `0`/`1` values.
pub fn conv_encode(info: &[u8], config: &CodeConfig) -> Vec<u8> {
    let mother = encode_mother(info);
    puncture(&mother, config.rate)
}

/// Unpunctured rate-1/2 output including the termination tail.
pub fn encode_mother(info: &[u8]) -> Vec<u8> {
    let mut state = 0u8;
    let mut out = Vec::with_capacity(2 * (info.len() + TAIL_BITS));
    for &b in info.iter().chain(std::iter::repeat(&0).take(TAIL_BITS)) {
        debug_assert!(b <= 1);
        let (c0, c1) = step_outputs(state, b);
        out.push(c0);
        out.push(c1);
        state = next_state(state, b);
    }
    debug_assert_eq!(state, 0, "trellis not terminated");
    out
}

/// Keeps `[c0 c1]` on even steps and `[c0]` on odd steps (pattern 1 1 / 1 0).
pub fn puncture(mother: &[u8], rate: CodeRate) -> Vec<u8> {
    match rate {
        CodeRate::Half => mother.to_vec(),
        CodeRate::TwoThirds => mother
            .iter()
            .enumerate()
            .filter(|(i, _)| !is_punctured(*i))
            .map(|(_, &b)| b)
            .collect(),
    }
}

/// Re-inserts zero LLRs at punctured positions so the decoder always sees
/// the mother-code geometry.
pub fn depuncture<T: Scalar>(llrs: &[T], rate: CodeRate, mother_len: usize) -> Vec<T> {
    match rate {
        CodeRate::Half => llrs.to_vec(),
        CodeRate::TwoThirds => {
            let mut out = vec![T::zero(); mother_len];
            let mut src = llrs.iter();
            for (i, slot) in out.iter_mut().enumerate() {
                if !is_punctured(i) {
                    *slot = *src.next().expect("punctured length mismatch");
                }
            }
            debug_assert!(src.next().is_none());
            out
        }
    }
}

/// Selects the transmitted subset of a mother-length sequence (used to carry
/// decoder soft outputs back to the transmitted-bit positions).
pub fn puncture_select<T: Copy>(mother: &[T], rate: CodeRate) -> Vec<T> {
    match rate {
        CodeRate::Half => mother.to_vec(),
        CodeRate::TwoThirds => mother
            .iter()
            .enumerate()
            .filter(|(i, _)| !is_punctured(*i))
            .map(|(_, &v)| v)
            .collect(),
    }
}

/// Mother-stream index `i` belongs to step `i/2`, output `i%2`; the second
/// output of every odd step is dropped.
#[inline]
fn is_punctured(i: usize) -> bool {
    (i / 2) % 2 == 1 && i % 2 == 1
}

/// Soft decoder output.
#[derive(Debug, Clone)]
pub struct DecodeOutput<T> {
    /// Hard information-bit decisions, tail excluded.
    pub info_bits: Vec<u8>,
    /// A-posteriori LLRs of all mother-code bits (log P(0)/P(1)).
    pub coded_app: Vec<T>,
    /// A-posteriori LLRs of the information bits.
    pub info_app: Vec<T>,
}

/// Max-log-MAP (BCJR) decode of one terminated block.
///
/// `llrs` covers the transmitted (punctured) bits in order, convention
/// `log P(b=0)/P(b=1)`. Ties decide toward bit 0.
pub fn siso_decode<T: Scalar>(llrs: &[T], config: &CodeConfig) -> Result<DecodeOutput<T>> {
    let info_len = config.info_len(llrs.len())?;
    let steps = info_len + TAIL_BITS;
    let mother_len = 2 * steps;
    let lam: Vec<f64> = depuncture(llrs, config.rate, mother_len)
        .iter()
        .map(|v| v.to_f64_lossy())
        .collect();

    // Branch metric: sum over the two outputs of +lambda/2 for bit 0 and
    // -lambda/2 for bit 1.
    let gamma = |t: usize, state: u8, bit: u8| -> f64 {
        let (c0, c1) = step_outputs(state, bit);
        let l0 = lam[2 * t];
        let l1 = lam[2 * t + 1];
        0.5 * (if c0 == 0 { l0 } else { -l0 } + if c1 == 0 { l1 } else { -l1 })
    };

    // Forward recursion.
    let mut alpha = vec![[NEG_INF; NUM_STATES]; steps + 1];
    alpha[0][0] = 0.0;
    for t in 0..steps {
        let max_input = if t < info_len { 1 } else { 0 }; // tail forces zeros
        for s in 0..NUM_STATES {
            let a = alpha[t][s];
            if a <= NEG_INF {
                continue;
            }
            for bit in 0..=max_input {
                let ns = next_state(s as u8, bit) as usize;
                let m = a + gamma(t, s as u8, bit);
                if m > alpha[t + 1][ns] {
                    alpha[t + 1][ns] = m;
                }
            }
        }
        // Renormalize to keep metrics bounded on long blocks.
        let peak = alpha[t + 1].iter().cloned().fold(NEG_INF, f64::max);
        if peak.is_finite() {
            for v in alpha[t + 1].iter_mut() {
                if *v > NEG_INF {
                    *v -= peak;
                }
            }
        }
    }

    // Backward recursion from the terminated zero state.
    let mut beta = vec![[NEG_INF; NUM_STATES]; steps + 1];
    beta[steps][0] = 0.0;
    for t in (0..steps).rev() {
        let max_input = if t < info_len { 1 } else { 0 };
        for s in 0..NUM_STATES {
            let mut best = NEG_INF;
            for bit in 0..=max_input {
                let ns = next_state(s as u8, bit) as usize;
                let b = beta[t + 1][ns];
                if b <= NEG_INF {
                    continue;
                }
                let m = b + gamma(t, s as u8, bit);
                if m > best {
                    best = m;
                }
            }
            beta[t][s] = best;
        }
        let peak = beta[t].iter().cloned().fold(NEG_INF, f64::max);
        if peak.is_finite() {
            for v in beta[t].iter_mut() {
                if *v > NEG_INF {
                    *v -= peak;
                }
            }
        }
    }

    // Per-bit a-posteriori values.
    let mut info_app = Vec::with_capacity(info_len);
    let mut coded_app = vec![T::zero(); mother_len];
    for t in 0..steps {
        let max_input = if t < info_len { 1 } else { 0 };
        let mut best_in = [NEG_INF; 2];
        let mut best_out = [[NEG_INF; 2]; 2]; // [output index][bit value]
        for s in 0..NUM_STATES {
            let a = alpha[t][s];
            if a <= NEG_INF {
                continue;
            }
            for bit in 0..=max_input {
                let ns = next_state(s as u8, bit) as usize;
                let b = beta[t + 1][ns];
                if b <= NEG_INF {
                    continue;
                }
                let m = a + gamma(t, s as u8, bit) + b;
                let (c0, c1) = step_outputs(s as u8, bit);
                if m > best_in[bit as usize] {
                    best_in[bit as usize] = m;
                }
                if m > best_out[0][c0 as usize] {
                    best_out[0][c0 as usize] = m;
                }
                if m > best_out[1][c1 as usize] {
                    best_out[1][c1 as usize] = m;
                }
            }
        }
        if t < info_len {
            info_app.push(T::lit(app_diff(best_in[0], best_in[1])));
        }
        coded_app[2 * t] = T::lit(app_diff(best_out[0][0], best_out[0][1]));
        coded_app[2 * t + 1] = T::lit(app_diff(best_out[1][0], best_out[1][1]));
    }

    let info_bits = info_app
        .iter()
        .map(|l| if *l >= T::zero() { 0 } else { 1 })
        .collect();
    Ok(DecodeOutput {
        info_bits,
        coded_app,
        info_app,
    })
}

/// LLR from the two max-metrics, with one-sided saturation when a bit value
/// is unreachable (e.g. tail steps).
fn app_diff(metric0: f64, metric1: f64) -> f64 {
    const SAT: f64 = 1.0e9;
    match (metric0 > NEG_INF, metric1 > NEG_INF) {
        (true, true) => metric0 - metric1,
        (true, false) => SAT,
        (false, true) => -SAT,
        (false, false) => 0.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    use crate::seed::{derive_rng, Stream};

    const HALF: CodeConfig = CodeConfig { rate: CodeRate::Half };
    const TWO_THIRDS: CodeConfig = CodeConfig {
        rate: CodeRate::TwoThirds,
    };

    #[test]
    fn all_zero_input_gives_all_zero_output() {
        let out = conv_encode(&[0; 20], &HALF);
        assert_eq!(out.len(), 2 * 26);
        assert!(out.iter().all(|&b| b == 0));
    }

    #[test]
    fn impulse_response_matches_generator_taps() {
        // A single 1 followed by zeros reads the tap masks out, MSB first.
        let out = encode_mother(&[1, 0, 0, 0, 0, 0, 0]);
        let g0_taps: Vec<u8> = (0..7).map(|i| ((G0 >> (6 - i)) & 1) as u8).collect();
        let g1_taps: Vec<u8> = (0..7).map(|i| ((G1 >> (6 - i)) & 1) as u8).collect();
        for t in 0..7 {
            assert_eq!(out[2 * t], g0_taps[t], "c0 at step {t}");
            assert_eq!(out[2 * t + 1], g1_taps[t], "c1 at step {t}");
        }
    }

    #[test]
    fn encoder_is_linear() {
        let mut rng = derive_rng(4, Stream::Frame, 0, 0);
        for _ in 0..20 {
            let a: Vec<u8> = (0..16).map(|_| rng.gen_range(0..2u8)).collect();
            let b: Vec<u8> = (0..16).map(|_| rng.gen_range(0..2u8)).collect();
            let sum: Vec<u8> = a.iter().zip(&b).map(|(x, y)| x ^ y).collect();
            let ca = encode_mother(&a);
            let cb = encode_mother(&b);
            let cs = encode_mother(&sum);
            for i in 0..cs.len() {
                assert_eq!(cs[i], ca[i] ^ cb[i]);
            }
        }
    }

    #[test]
    fn punctured_rate_arithmetic() {
        // 3 coded bits out per 2 info bits, plus the terminated tail.
        let info = 10;
        let out = conv_encode(&vec![0u8; info], &TWO_THIRDS);
        assert_eq!(out.len(), 3 * (info + TAIL_BITS) / 2);
        assert_eq!(out.len(), TWO_THIRDS.coded_len(info));
        assert_eq!(TWO_THIRDS.info_len(out.len()).unwrap(), info);
    }

    #[test]
    fn depuncture_preserves_surviving_positions() {
        let mother: Vec<i32> = (0..24).collect();
        let kept = puncture_select(&mother, CodeRate::TwoThirds);
        let restored = depuncture(
            &kept.iter().map(|&v| v as f64).collect::<Vec<_>>(),
            CodeRate::TwoThirds,
            24,
        );
        for (i, &v) in restored.iter().enumerate() {
            if is_punctured(i) {
                assert_eq!(v, 0.0);
            } else {
                assert_eq!(v, i as f64);
            }
        }
    }

    fn to_llrs(bits: &[u8]) -> Vec<f64> {
        bits.iter().map(|&b| if b == 0 { 30.0 } else { -30.0 }).collect()
    }

    #[test]
    fn noiseless_decode_recovers_info_and_coded_signs() {
        let mut rng = derive_rng(5, Stream::Frame, 0, 0);
        for &config in &[HALF, TWO_THIRDS] {
            let info: Vec<u8> = (0..24).map(|_| rng.gen_range(0..2u8)).collect();
            let coded = conv_encode(&info, &config);
            let out = siso_decode(&to_llrs(&coded), &config).unwrap();
            assert_eq!(out.info_bits, info);
            let mother = encode_mother(&info);
            for (i, &b) in mother.iter().enumerate() {
                let app = out.coded_app[i];
                if b == 0 {
                    assert!(app >= 0.0, "coded bit {i} sign");
                } else {
                    assert!(app < 0.0, "coded bit {i} sign");
                }
            }
        }
    }

    #[test]
    fn all_zero_llrs_decide_all_zero() {
        let out = siso_decode(&vec![0.0f64; 2 * (12 + TAIL_BITS)], &HALF).unwrap();
        assert!(out.info_bits.iter().all(|&b| b == 0));
    }

    /// Exhaustive maximum-likelihood oracle over every information word.
    fn ml_decode(llrs: &[f64], config: &CodeConfig, k: usize) -> Vec<u8> {
        let mother_len = 2 * (k + TAIL_BITS);
        let lam = depuncture(llrs, config.rate, mother_len);
        let mut best = (f64::NEG_INFINITY, 0usize);
        for word in 0..(1usize << k) {
            let info: Vec<u8> = (0..k).map(|i| ((word >> i) & 1) as u8).collect();
            let mother = encode_mother(&info);
            let metric: f64 = mother
                .iter()
                .zip(&lam)
                .map(|(&c, &l)| if c == 0 { l } else { -l } * 0.5)
                .sum();
            if metric > best.0 {
                best = (metric, word);
            }
        }
        (0..k).map(|i| ((best.1 >> i) & 1) as u8).collect()
    }

    #[test]
    fn matches_exhaustive_ml_on_noisy_blocks() {
        let mut rng = derive_rng(6, Stream::Frame, 0, 0);
        for &config in &[HALF, TWO_THIRDS] {
            let k = 8usize;
            for _ in 0..10 {
                let info: Vec<u8> = (0..k).map(|_| rng.gen_range(0..2u8)).collect();
                let coded = conv_encode(&info, &config);
                // BPSK over AWGN at a noise level that produces real errors.
                let llrs: Vec<f64> = coded
                    .iter()
                    .map(|&b| {
                        let x = if b == 0 { 1.0 } else { -1.0 };
                        let y = x + 0.9 * rng.gen::<f64>().mul_add(2.0, -1.0)
                            + 0.9 * rng.gen::<f64>().mul_add(2.0, -1.0);
                        2.0 * y
                    })
                    .collect();
                let bcjr = siso_decode(&llrs, &config).unwrap();
                let ml = ml_decode(&llrs, &config, k);
                assert_eq!(bcjr.info_bits, ml);
            }
        }
    }
}
