//! Gray-labeled QAM: mapping, max-log soft demapping and soft (expectation)
//! mapping for the feedback path.
//!
//! Labels are separable per axis with the MSB as the sign bit (0 = positive).
//! Per-axis level tables, amplitudes before normalization:
//!
//! | order  | axis bits | label -> level                                 |
//! |--------|-----------|------------------------------------------------|
//! | QPSK   | 1         | 0 -> +1, 1 -> -1                               |
//! | 16-QAM | 2         | 00 -> +1, 01 -> +3, 10 -> -1, 11 -> -3         |
//! | 64-QAM | 3         | 010 -> +1, 011 -> +3, 001 -> +5, 000 -> +7,    |
//! |        |           | 110 -> -1, 111 -> -3, 101 -> -5, 100 -> -7     |
//!
//! The first half of a symbol's bits drives the in-phase axis, the second
//! half the quadrature axis. Normalization makes E|X|^2 = 1 exactly.

use num_complex::Complex;

use crate::error::{Result, SimError};
use crate::scalar::Scalar;

/// LLR magnitudes are clamped here to keep the exponential-domain soft
/// mapper finite.
pub const LLR_CLAMP: f64 = 30.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Constellation {
    Qpsk,
    Qam16,
    Qam64,
}

impl Constellation {
    pub fn parse(name: &str) -> Result<Self> {
        match name.to_ascii_lowercase().as_str() {
            "qpsk" | "4qam" | "qam4" => Ok(Constellation::Qpsk),
            "16qam" | "qam16" | "16-qam" => Ok(Constellation::Qam16),
            "64qam" | "qam64" | "64-qam" => Ok(Constellation::Qam64),
            other => Err(SimError::Config(format!("unknown constellation '{other}'"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Constellation::Qpsk => "qpsk",
            Constellation::Qam16 => "16qam",
            Constellation::Qam64 => "64qam",
        }
    }

    pub fn bits_per_symbol(&self) -> usize {
        match self {
            Constellation::Qpsk => 2,
            Constellation::Qam16 => 4,
            Constellation::Qam64 => 6,
        }
    }

    pub fn bits_per_axis(&self) -> usize {
        self.bits_per_symbol() / 2
    }

    pub fn order(&self) -> usize {
        1 << self.bits_per_symbol()
    }

    /// Per-axis amplitude normalization so that E|X|^2 = 1.
    fn axis_scale<T: Scalar>(&self) -> T {
        match self {
            Constellation::Qpsk => T::lit(1.0 / 2.0f64.sqrt()),
            Constellation::Qam16 => T::lit(1.0 / 10.0f64.sqrt()),
            Constellation::Qam64 => T::lit(1.0 / 42.0f64.sqrt()),
        }
    }

    /// Gray label (as axis-bit integer, MSB first) -> unnormalized level.
    fn axis_level(&self, label: usize) -> i32 {
        match self {
            Constellation::Qpsk => [1, -1][label],
            Constellation::Qam16 => [1, 3, -1, -3][label],
            Constellation::Qam64 => [7, 5, 1, 3, -7, -5, -1, -3][label],
        }
    }

    /// All axis levels in label order, normalized.
    fn axis_table<T: Scalar>(&self) -> Vec<T> {
        let s = self.axis_scale::<T>();
        (0..1usize << self.bits_per_axis())
            .map(|l| T::lit(self.axis_level(l) as f64) * s)
            .collect()
    }

    /// Full constellation as (point, symbol label) pairs; the label packs
    /// the bits MSB-first, I-axis bits before Q-axis bits.
    pub fn points<T: Scalar>(&self) -> Vec<(Complex<T>, usize)> {
        let axis = self.axis_table::<T>();
        let per_axis = axis.len();
        let mut out = Vec::with_capacity(per_axis * per_axis);
        for (li, &re) in axis.iter().enumerate() {
            for (lq, &im) in axis.iter().enumerate() {
                out.push((Complex::new(re, im), li * per_axis + lq));
            }
        }
        out
    }
}

/// Maps coded bits to symbols. The bit count must fill whole symbols.
pub fn qam_map<T: Scalar>(bits: &[u8], constellation: Constellation) -> Result<Vec<Complex<T>>> {
    let bps = constellation.bits_per_symbol();
    if bits.len() % bps != 0 {
        return Err(SimError::Framing(format!(
            "{} bits do not fill whole {}-bit symbols",
            bits.len(),
            bps
        )));
    }
    let axis = constellation.axis_table::<T>();
    let half = constellation.bits_per_axis();
    Ok(bits
        .chunks_exact(bps)
        .map(|chunk| {
            let li = pack_bits(&chunk[..half]);
            let lq = pack_bits(&chunk[half..]);
            Complex::new(axis[li], axis[lq])
        })
        .collect())
}

#[inline]
fn pack_bits(bits: &[u8]) -> usize {
    bits.iter().fold(0usize, |acc, &b| (acc << 1) | b as usize)
}

/// Max-log LLRs for the bits of one symbol, from the scalar Gaussian model
/// `y = gain * X + n` with complex noise variance `noise_var`.
///
/// Convention: `LLR = log P(b=0)/P(b=1)`, clamped to +/-30. Gray labels are
/// axis-separable, so each axis is demapped against its level table; this is
/// exactly the max-log LLR over the full constellation.
pub fn soft_demap<T: Scalar>(
    estimate: Complex<T>,
    gain: T,
    noise_var: T,
    constellation: Constellation,
) -> Result<Vec<T>> {
    if noise_var <= T::zero() {
        return Err(SimError::Domain(format!(
            "effective noise variance must be positive, got {noise_var}"
        )));
    }
    let axis = constellation.axis_table::<T>();
    let half = constellation.bits_per_axis();
    let mut llrs = Vec::with_capacity(2 * half);
    for (obs, _) in [(estimate.re, 0), (estimate.im, 1)] {
        for bit in 0..half {
            let shift = half - 1 - bit;
            let mut best = [T::infinity(); 2];
            for (label, &level) in axis.iter().enumerate() {
                let d = obs - gain * level;
                let metric = d * d;
                let value = (label >> shift) & 1;
                if metric < best[value] {
                    best[value] = metric;
                }
            }
            let llr = (best[1] - best[0]) / noise_var;
            llrs.push(clamp_llr(llr));
        }
    }
    Ok(llrs)
}

#[inline]
pub fn clamp_llr<T: Scalar>(llr: T) -> T {
    let c = T::lit(LLR_CLAMP);
    llr.min(c).max(-c)
}

/// Expected symbol under the per-bit posteriors of `llrs` (one symbol's
/// worth of LLRs, same order as `qam_map` consumes bits).
pub fn soft_map<T: Scalar>(llrs: &[T], constellation: Constellation) -> Complex<T> {
    assert_eq!(
        llrs.len(),
        constellation.bits_per_symbol(),
        "one symbol of LLRs expected"
    );
    let half = constellation.bits_per_axis();
    let axis = constellation.axis_table::<T>();
    let re = axis_expectation(&llrs[..half], &axis);
    let im = axis_expectation(&llrs[half..], &axis);
    Complex::new(re, im)
}

fn axis_expectation<T: Scalar>(llrs: &[T], axis: &[T]) -> T {
    // P(b=0) = 1 / (1 + exp(-llr)).
    let p0: Vec<T> = llrs
        .iter()
        .map(|&l| T::one() / (T::one() + (-clamp_llr(l)).exp()))
        .collect();
    let mut num = T::zero();
    let mut den = T::zero();
    for (label, &level) in axis.iter().enumerate() {
        let mut p = T::one();
        for (bit, &pb0) in p0.iter().enumerate() {
            let shift = llrs.len() - 1 - bit;
            let b = (label >> shift) & 1;
            p = p * if b == 0 { pb0 } else { T::one() - pb0 };
        }
        num += level * p;
        den += p;
    }
    num / den
}
