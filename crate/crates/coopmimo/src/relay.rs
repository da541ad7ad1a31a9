//! Amplify-and-forward relay stage: power normalization of the received
//! signal and selection of the codeword row each relay transmits.

use num_complex::Complex;

use crate::error::{Result, SimError};
use crate::scalar::Scalar;
use crate::stbc::ComplexMatrix;

/// Gains of one relay's normalization `Y = h_eq X + h_nor V`:
/// `h_eq = sqrt(P) H / sqrt(P |H|^2 + sigma^2)` and
/// `h_nor = 1 / sqrt(P |H|^2 + sigma^2)`.
#[derive(Debug, Clone, Copy)]
pub struct AfGain<T> {
    pub h_eq: Complex<T>,
    pub h_nor: T,
}

/// Normalizes one received symbol to unit average power and records the
/// equivalent signal/noise gains for the destination-side model.
pub fn af_normalize<T: Scalar>(
    received: Complex<T>,
    p_linear: T,
    h: Complex<T>,
    sigma2: T,
) -> Result<(Complex<T>, AfGain<T>)> {
    let denom_sq = p_linear * h.norm_sqr() + sigma2;
    if denom_sq <= T::zero() {
        return Err(SimError::DegenerateLink(format!(
            "relay normalizer P|H|^2 + sigma^2 = {denom_sq}"
        )));
    }
    let h_nor = T::one() / denom_sq.sqrt();
    let h_eq = h * (p_linear.sqrt() * h_nor);
    Ok((received * h_nor, AfGain { h_eq, h_nor }))
}

/// Row `relay_index` of this relay's codeword: the vector it actually
/// transmits. The destination-side composite collates row `r` from relay
/// `r`'s own (independently noisy) codeword.
pub fn relay_transmit_row<T: Scalar>(
    codeword: &ComplexMatrix<T>,
    relay_index: usize,
) -> Result<Vec<Complex<T>>> {
    if relay_index >= codeword.n_rows() {
        return Err(SimError::Dimension(format!(
            "relay index {relay_index} out of range for an {}-row codeword",
            codeword.n_rows()
        )));
    }
    Ok(codeword.row(relay_index).to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::complex_gaussian;
    use crate::seed::{derive_rng, Stream};
    use crate::stbc::{SchemeKind, StbcScheme};
    use num_complex::Complex;
    use rand::Rng;

    type C = Complex<f64>;

    fn cx(re: f64, im: f64) -> C {
        Complex::new(re, im)
    }

    #[test]
    fn identity_link_passes_through() {
        let (out, gain) = af_normalize(cx(0.3, -0.4), 1.0, cx(1.0, 0.0), 0.0).unwrap();
        assert!((out - cx(0.3, -0.4)).norm() < 1e-15);
        assert!((gain.h_eq - cx(1.0, 0.0)).norm() < 1e-15);
        assert!((gain.h_nor - 1.0).abs() < 1e-15);
    }

    #[test]
    fn pure_power_scaling_cancels() {
        // P = 4, |h| = 1: the received amplitude doubles, the normalizer
        // halves it back, and the end-to-end gain stays 1.
        let x = cx(0.5, 0.2);
        let rx = x * 2.0;
        let (out, gain) = af_normalize(rx, 4.0, cx(1.0, 0.0), 0.0).unwrap();
        assert!((out - x).norm() < 1e-15);
        assert!((gain.h_eq - cx(1.0, 0.0)).norm() < 1e-15);
        assert!((gain.h_nor - 0.5).abs() < 1e-15);
    }

    #[test]
    fn unit_output_power_over_noisy_trials() {
        let mut rng = derive_rng(61, Stream::Frame, 0, 0);
        let p: f64 = 2.3;
        let sigma2 = 0.7;
        let trials = 100_000;
        let mut acc = 0.0;
        for _ in 0..trials {
            let h = complex_gaussian::<f64, _>(&mut rng, 1.0);
            let x = if rng.gen::<bool>() { cx(1.0, 0.0) } else { cx(-1.0, 0.0) };
            let v = complex_gaussian::<f64, _>(&mut rng, sigma2);
            let rx = h * x * p.sqrt() + v;
            let (out, _) = af_normalize(rx, p, h, sigma2).unwrap();
            acc += out.norm_sqr();
        }
        let mean = acc / trials as f64;
        assert!((mean - 1.0).abs() < 0.01, "E|Y|^2 = {mean}");
    }

    #[test]
    fn degenerate_link_is_an_error() {
        assert!(af_normalize(cx(1.0, 0.0), 1.0, cx(0.0, 0.0), 0.0).is_err());
    }

    #[test]
    fn gain_decomposition_reconstructs_normalization() {
        let mut rng = derive_rng(62, Stream::Frame, 0, 0);
        for _ in 0..200 {
            let h = complex_gaussian::<f64, _>(&mut rng, 1.0);
            let x = complex_gaussian::<f64, _>(&mut rng, 1.0);
            let v = complex_gaussian::<f64, _>(&mut rng, 0.4);
            let p: f64 = 0.5 + rng.gen::<f64>();
            let rx = h * x * p.sqrt() + v;
            let (out, gain) = af_normalize(rx, p, h, 0.4).unwrap();
            let reconstructed = gain.h_eq * x + v * gain.h_nor;
            assert!((out - reconstructed).norm() < 1e-12);
        }
    }

    #[test]
    fn alamouti_second_relay_row() {
        let scheme = StbcScheme::<f64>::new(SchemeKind::Alamouti);
        let s = vec![cx(0.7, 0.1), cx(-0.3, 0.9)];
        let w = scheme.encode_block(&s).unwrap();
        let row = relay_transmit_row(&w, 1).unwrap();
        let k = scheme.power_scale;
        assert!((row[0] - s[1] * k).norm() < 1e-15);
        assert!((row[1] - s[0].conj() * k).norm() < 1e-15);
    }

    #[test]
    fn row_index_out_of_range() {
        let scheme = StbcScheme::<f64>::new(SchemeKind::Alamouti);
        let w = scheme.encode_block(&[cx(1.0, 0.0), cx(0.0, 1.0)]).unwrap();
        assert!(relay_transmit_row(&w, 2).is_err());
    }

    #[test]
    fn identical_noiseless_inputs_reproduce_single_encoder() {
        // Degenerate distributed case: every relay encodes the same clean
        // input, so collating row r from relay r equals one encoder's output.
        let mut rng = derive_rng(63, Stream::Frame, 0, 0);
        for kind in [SchemeKind::Alamouti, SchemeKind::Golden, SchemeKind::Dlst] {
            let scheme = StbcScheme::<f64>::new(kind);
            let s: Vec<C> = (0..scheme.symbols)
                .map(|_| complex_gaussian(&mut rng, 1.0))
                .collect();
            let reference = scheme.encode_block(&s).unwrap();
            for r in 0..scheme.relays {
                let w_r = scheme.encode_block(&s).unwrap();
                let row = relay_transmit_row(&w_r, r).unwrap();
                for (t, v) in row.iter().enumerate() {
                    assert!((v - reference.at(r, t)).norm() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn composite_is_affine_in_relay_noise() {
        // Subtracting the noiseless composite leaves terms linear in the
        // per-relay noises: scaling every noise by c scales the residual by c.
        let mut rng = derive_rng(64, Stream::Frame, 0, 0);
        let scheme = StbcScheme::<f64>::new(SchemeKind::Golden);
        let p: f64 = 1.7;
        let sigma2 = 0.3;
        let x: Vec<C> = (0..scheme.symbols)
            .map(|_| complex_gaussian(&mut rng, 1.0))
            .collect();
        let h: Vec<C> = (0..scheme.relays)
            .map(|_| complex_gaussian(&mut rng, 1.0))
            .collect();
        let noise: Vec<Vec<C>> = (0..scheme.relays)
            .map(|_| (0..scheme.symbols).map(|_| complex_gaussian(&mut rng, sigma2)).collect())
            .collect();

        let composite = |noise_scale: f64| -> Vec<Vec<C>> {
            (0..scheme.relays)
                .map(|r| {
                    let y_r: Vec<C> = x
                        .iter()
                        .zip(&noise[r])
                        .map(|(&xq, &vq)| {
                            let rx = h[r] * xq * p.sqrt() + vq * noise_scale;
                            af_normalize(rx, p, h[r], sigma2).unwrap().0
                        })
                        .collect();
                    let w_r = scheme.encode_block(&y_r).unwrap();
                    relay_transmit_row(&w_r, r).unwrap()
                })
                .collect()
        };

        let clean = composite(0.0);
        let one = composite(1.0);
        let two = composite(2.0);
        for r in 0..scheme.relays {
            for t in 0..scheme.periods {
                let d1 = one[r][t] - clean[r][t];
                let d2 = two[r][t] - clean[r][t];
                assert!((d2 - d1 * 2.0).norm() < 1e-12);
            }
        }
    }
}
