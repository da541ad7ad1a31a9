//! Destination-side detection: maximum-ratio combining of the phase-1
//! broadcast, MMSE filtering of the stacked phase-2 system on the first
//! iteration, parallel interference cancellation afterwards, SNR-weighted
//! fusion of the two phases, and the loop around the channel decoder.

use num_complex::Complex;

use crate::error::{Result, SimError};
use crate::fec::{FecChain, InterleaverMap, SymbolEstimate};
use crate::linalg::{dot, Mat};
use crate::scalar::Scalar;
use crate::stbc::{stack_complex, EquivalentChannel};

/// Relative ridge added to the MMSE Gram matrix (scaled by its mean
/// diagonal) so the zero-noise limit stays solvable.
const MMSE_EPSILON: f64 = 1e-12;
/// Floor used when converting error variances and noise levels into SNR
/// weights in the noiseless limit.
const VAR_FLOOR: f64 = 1e-30;

/// Estimated SNR of the two cooperation phases, the weights of Eq.-style
/// symbol fusion.
#[derive(Debug, Clone, Copy)]
pub struct PhaseSnr<T> {
    pub rho1: T,
    pub rho2: T,
}

/// Maximum-ratio combining of the direct-link observations.
///
/// `received[j][q]` is antenna `j`'s observation of symbol `q`. Returns the
/// per-symbol estimates and the post-combining SNR `rho1`; an all-zero
/// channel yields `rho1 = 0`, flagging the phase as unusable.
pub fn phase1_detect<T: Scalar>(
    received: &[Vec<Complex<T>>],
    h_source_dest: &[Complex<T>],
    p_d_linear: T,
    sigma2: T,
) -> (Vec<Complex<T>>, T) {
    let n_symbols = received.first().map_or(0, Vec::len);
    let h_energy: T = h_source_dest.iter().map(|h| h.norm_sqr()).sum();
    if h_energy == T::zero() {
        return (vec![Complex::new(T::zero(), T::zero()); n_symbols], T::zero());
    }
    let scale = T::one() / (p_d_linear.sqrt() * h_energy);
    let estimates = (0..n_symbols)
        .map(|q| {
            let mut acc = Complex::new(T::zero(), T::zero());
            for (j, h) in h_source_dest.iter().enumerate() {
                acc += h.conj() * received[j][q];
            }
            acc * scale
        })
        .collect();
    let rho1 = p_d_linear * h_energy / sigma2.max(T::lit(VAR_FLOOR));
    (estimates, rho1)
}

/// First-iteration linear detection output.
#[derive(Debug, Clone)]
pub struct MmseOutput<T> {
    /// Raw (biased) filter outputs `g_p' (G G' + s I)^-1 y`, one per real
    /// component.
    pub raw: Vec<T>,
    /// Bias factor `mu_p` of each component; dividing by it unbiases the
    /// estimate.
    pub gain: Vec<T>,
    /// Post-detection SINR per real component.
    pub sinr: Vec<T>,
}

impl<T: Scalar> MmseOutput<T> {
    /// Unbiased per-component estimates.
    pub fn unbiased(&self) -> Vec<T> {
        self.raw
            .iter()
            .zip(&self.gain)
            .map(|(&r, &g)| if g > T::zero() { r / g } else { T::zero() })
            .collect()
    }

    /// Error variance of the unbiased estimate per real component.
    pub fn error_var(&self) -> Vec<T> {
        self.sinr
            .iter()
            .map(|&s| T::lit(0.5) / s.max(T::lit(VAR_FLOOR)))
            .collect()
    }
}

/// MMSE detection of the stacked system (first receiver iteration).
///
/// The Gram matrix is ridge-regularized by `1e-12` relative to its mean
/// diagonal, which keeps the zero-noise limit solvable at any absolute
/// power scale.
pub fn mmse_detect<T: Scalar>(
    y_d: &[T],
    geq: &Mat<T>,
    noise_var_eff: T,
) -> Result<MmseOutput<T>> {
    if noise_var_eff < T::zero() {
        return Err(SimError::Domain(format!(
            "effective noise variance must be non-negative, got {noise_var_eff}"
        )));
    }
    let n_obs = geq.rows();
    let n_comp = geq.cols();
    if y_d.len() != n_obs {
        return Err(SimError::Dimension(format!(
            "observation length {} vs Geq rows {n_obs}",
            y_d.len()
        )));
    }
    let mut gram = geq.gram_t();
    let mean_diag = (0..n_obs).map(|i| gram[(i, i)]).sum::<T>() / T::lit(n_obs as f64);
    if mean_diag <= T::zero() {
        // No phase-2 signal at all; report dead components.
        return Ok(MmseOutput {
            raw: vec![T::zero(); n_comp],
            gain: vec![T::zero(); n_comp],
            sinr: vec![T::zero(); n_comp],
        });
    }
    gram.add_diag(noise_var_eff + mean_diag * T::lit(MMSE_EPSILON));
    let filters = gram
        .solve(geq)
        .ok_or_else(|| SimError::Dimension("singular MMSE system".into()))?;

    let mut raw = Vec::with_capacity(n_comp);
    let mut gain = Vec::with_capacity(n_comp);
    let mut sinr = Vec::with_capacity(n_comp);
    for p in 0..n_comp {
        let w_p = filters.col(p);
        let g_p = geq.col(p);
        let mu = dot(&g_p, &w_p);
        raw.push(dot(&w_p, y_d));
        let mu_c = mu.min(T::one() - T::lit(1e-15)).max(T::zero());
        gain.push(mu);
        sinr.push(if mu_c > T::zero() {
            mu_c / (T::one() - mu_c)
        } else {
            T::zero()
        });
    }
    Ok(MmseOutput { raw, gain, sinr })
}

/// Interference-cancelled projection output (iterations two and up).
#[derive(Debug, Clone)]
pub struct PicOutput<T> {
    /// Per-component estimates after cancellation, already unbiased.
    pub estimates: Vec<T>,
    /// Column energies `g_p' g_p`; a zero marks a skipped component whose
    /// feedback value was retained.
    pub column_energy: Vec<T>,
}

/// Parallel interference cancellation against soft-mapper feedback:
/// subtract every other component's reconstruction, then project on the
/// component's own column.
pub fn pic_detect<T: Scalar>(y_d: &[T], geq: &Mat<T>, feedback: &[T]) -> Result<PicOutput<T>> {
    let n_comp = geq.cols();
    if feedback.len() != n_comp || y_d.len() != geq.rows() {
        return Err(SimError::Dimension(format!(
            "pic shapes: y {} fb {} vs Geq {}x{}",
            y_d.len(),
            feedback.len(),
            geq.rows(),
            n_comp
        )));
    }
    // Residual with all feedback removed; each component adds its own back.
    let reconstructed = geq.matvec(feedback);
    let residual: Vec<T> = y_d.iter().zip(&reconstructed).map(|(&y, &r)| y - r).collect();

    let mut estimates = Vec::with_capacity(n_comp);
    let mut column_energy = Vec::with_capacity(n_comp);
    for p in 0..n_comp {
        let g_p = geq.col(p);
        let gg = dot(&g_p, &g_p);
        if gg <= T::zero() {
            estimates.push(feedback[p]);
            column_energy.push(T::zero());
            continue;
        }
        let num = dot(&g_p, &residual) + gg * feedback[p];
        estimates.push(num / gg);
        column_energy.push(gg);
    }
    Ok(PicOutput {
        estimates,
        column_energy,
    })
}

/// SNR-weighted fusion of the per-phase symbol estimates.
pub fn combine_phases<T: Scalar>(
    x1: Complex<T>,
    x2: Complex<T>,
    snr: PhaseSnr<T>,
) -> Result<Complex<T>> {
    let total = snr.rho1 + snr.rho2;
    if total <= T::zero() {
        return Err(SimError::NoSignal(
            "both cooperation phases report zero SNR".into(),
        ));
    }
    Ok((x1 * snr.rho1 + x2 * snr.rho2) / total)
}

/// Inputs of one codeword's detection.
pub struct CodewordObservation<'a, T> {
    /// Stacked phase-2 observation, length `2MT`.
    pub y_d: &'a [T],
    pub equivalent: &'a EquivalentChannel<T>,
    /// Phase-1 observations, `[antenna][symbol]`.
    pub phase1: &'a [Vec<Complex<T>>],
    pub h_source_dest: &'a [Complex<T>],
    /// Linear received power of the direct link.
    pub p_d_linear: T,
    /// Channel noise variance per complex dimension.
    pub sigma2: T,
}

/// Full iterative detection and decoding of one codeword block.
///
/// Iteration 1 runs MMSE, fuses with the phase-1 estimate, demaps and
/// decodes. Later iterations soft-map the decoder output, cancel
/// interference, re-fuse and decode again. Returns the final hard
/// information bits.
pub fn iterative_receive<T: Scalar>(
    obs: &CodewordObservation<'_, T>,
    chain: &FecChain,
    interleaver: &InterleaverMap,
    n_iterations: usize,
) -> Result<Vec<u8>> {
    if n_iterations == 0 {
        return Err(SimError::Config("at least one receiver iteration".into()));
    }
    let geq = &obs.equivalent.geq;
    let n_comp = geq.cols();
    let n_symbols = n_comp / 2;
    let sigma2_eff = obs.sigma2 * obs.equivalent.noise_inflation();

    let (x1, rho1) = phase1_detect(obs.phase1, obs.h_source_dest, obs.p_d_linear, obs.sigma2);
    if x1.len() != n_symbols {
        return Err(SimError::Dimension(format!(
            "phase-1 carries {} symbols, phase-2 system {}",
            x1.len(),
            n_symbols
        )));
    }

    // Iteration 1: MMSE.
    let mmse = mmse_detect(obs.y_d, geq, sigma2_eff)?;
    let mut estimates =
        fuse_phases(&x1, rho1, &mmse.unbiased(), &mmse.error_var(), n_symbols)?;
    let mut decoded = chain.receive_iteration(&estimates, interleaver)?;

    // Iterations 2..n: soft map, cancel, re-fuse, decode.
    for _ in 1..n_iterations {
        let feedback = chain.feedback_symbols(&decoded.coded_app, interleaver);
        let fb_stacked = stack_complex(&feedback);
        let pic = pic_detect(obs.y_d, geq, &fb_stacked)?;
        let err_var: Vec<T> = pic
            .column_energy
            .iter()
            .map(|&gg| {
                if gg > T::zero() {
                    (sigma2_eff * T::lit(0.5) / gg).max(T::lit(VAR_FLOOR))
                } else {
                    T::infinity()
                }
            })
            .collect();
        estimates = fuse_phases(&x1, rho1, &pic.estimates, &err_var, n_symbols)?;
        decoded = chain.receive_iteration(&estimates, interleaver)?;
    }
    Ok(decoded.info_bits)
}

/// Combines phase-1 and phase-2 per-symbol estimates into demapper inputs.
///
/// Component error variances are turned into a per-symbol phase-2 SNR
/// `rho2 = 1 / (v_re + v_im)`; the fused estimate has unit gain and noise
/// variance `1 / (rho1 + rho2)`.
fn fuse_phases<T: Scalar>(
    x1: &[Complex<T>],
    rho1: T,
    phase2_components: &[T],
    phase2_var: &[T],
    n_symbols: usize,
) -> Result<Vec<SymbolEstimate<T>>> {
    let mut out = Vec::with_capacity(n_symbols);
    for q in 0..n_symbols {
        let x2 = Complex::new(phase2_components[2 * q], phase2_components[2 * q + 1]);
        let v = phase2_var[2 * q] + phase2_var[2 * q + 1];
        let rho2 = if v.is_finite() && v > T::zero() {
            T::one() / v
        } else if v == T::zero() {
            T::one() / T::lit(VAR_FLOOR)
        } else {
            T::zero()
        };
        let fused = combine_phases(x1[q], x2, PhaseSnr { rho1, rho2 })?;
        let noise_var = (T::one() / (rho1 + rho2)).max(T::lit(VAR_FLOOR));
        out.push(SymbolEstimate {
            value: fused,
            gain: T::one(),
            noise_var,
        });
    }
    Ok(out)
}
