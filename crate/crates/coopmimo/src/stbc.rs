//! Linear-dispersion space-time block codes and the real-valued stacked
//! system around them.
//!
//! Three schemes are provided: orthogonal Alamouti (2 relays, rate 1), the
//! Golden code (2 relays, rate 2) and a double-layer code (4 relays, rate 2)
//! that nests Golden-style layers inside an Alamouti-style outer structure.
//!
//! Every codeword is expressible two ways: a closed-form matrix and the
//! dispersion expansion `W = sum_q Re(Y_q) U_q + Im(Y_q) V_q`. Both are
//! implemented independently and cross-checked in tests; the dispersion form
//! is what the stacked matrices `F`, `G` and `Geq` are built from.

use num_complex::Complex;

use crate::error::{Result, SimError};
use crate::linalg::Mat;
use crate::relay::AfGain;
use crate::scalar::Scalar;

/// Small dense complex matrix (codewords, dispersion matrices, received
/// blocks). Row index is the relay/antenna, column index the symbol period.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix<T> {
    pub rows: Vec<Vec<Complex<T>>>,
}

impl<T: Scalar> ComplexMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows: vec![vec![Complex::new(T::zero(), T::zero()); cols]; rows],
        }
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.rows.first().map_or(0, Vec::len)
    }

    pub fn row(&self, r: usize) -> &[Complex<T>] {
        &self.rows[r]
    }

    pub fn at(&self, r: usize, c: usize) -> Complex<T> {
        self.rows[r][c]
    }

    pub fn scale(&mut self, s: T) {
        for row in &mut self.rows {
            for v in row {
                *v = Complex::new(v.re * s, v.im * s);
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchemeKind {
    Alamouti,
    Golden,
    Dlst,
}

impl SchemeKind {
    pub fn parse(name: &str) -> Result<Self> {
        match name.to_ascii_lowercase().as_str() {
            "alamouti" => Ok(SchemeKind::Alamouti),
            "golden" => Ok(SchemeKind::Golden),
            "dlst" => Ok(SchemeKind::Dlst),
            other => Err(SimError::Config(format!("unknown scheme '{other}'"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            SchemeKind::Alamouti => "alamouti",
            SchemeKind::Golden => "golden",
            SchemeKind::Dlst => "dlst",
        }
    }
}

/// Golden-ratio constants shared by the Golden and double-layer codes:
/// `theta = (1+sqrt 5)/2`, `theta_bar = 1 - theta`,
/// `alpha = 1 + j(1 - theta)`, `alpha_bar = 1 + j(1 - theta_bar)`.
pub fn golden_constants<T: Scalar>() -> (T, T, Complex<T>, Complex<T>) {
    let theta = (T::one() + T::lit(5.0).sqrt()) * T::lit(0.5);
    let theta_bar = T::one() - theta;
    let alpha = Complex::new(T::one(), T::one() - theta);
    let alpha_bar = Complex::new(T::one(), T::one() - theta_bar);
    (theta, theta_bar, alpha, alpha_bar)
}

/// One codeword entry of the form `kappa * (s_a + tau * s_b)`, optionally on
/// conjugated symbols. Expanding these descriptors yields the dispersion
/// matrices independently of the closed-form encoder.
struct EntrySpec<T> {
    row: usize,
    col: usize,
    kappa: Complex<T>,
    sym_a: usize,
    tau: T,
    sym_b: usize,
    conjugated: bool,
}

/// A linear-dispersion scheme: dimensions, dispersion matrices and the
/// amplitude scale that makes the average transmit power per channel use 1.
#[derive(Debug, Clone)]
pub struct StbcScheme<T> {
    pub kind: SchemeKind,
    /// R: cooperating relays (= rows of the codeword).
    pub relays: usize,
    /// T: symbol periods per codeword.
    pub periods: usize,
    /// Q: complex symbols per codeword.
    pub symbols: usize,
    /// Amplitude normalization applied to every codeword entry.
    pub power_scale: T,
    dispersion_u: Vec<ComplexMatrix<T>>,
    dispersion_v: Vec<ComplexMatrix<T>>,
}

impl<T: Scalar> StbcScheme<T> {
    pub fn new(kind: SchemeKind) -> Self {
        let (relays, periods, symbols) = match kind {
            SchemeKind::Alamouti => (2, 2, 2),
            SchemeKind::Golden => (2, 2, 4),
            SchemeKind::Dlst => (4, 4, 8),
        };
        // Unit average power per channel use: 1/sqrt(2) for the two-relay
        // codes (unit-power entries over two rows); the double-layer matrix
        // carries row powers {2-theta, 1, 1, 1+theta} summing to 5.
        let power_scale = match kind {
            SchemeKind::Alamouti | SchemeKind::Golden => T::lit(1.0 / 2.0f64.sqrt()),
            SchemeKind::Dlst => T::lit(1.0 / 5.0f64.sqrt()),
        };
        let mut scheme = Self {
            kind,
            relays,
            periods,
            symbols,
            power_scale,
            dispersion_u: Vec::new(),
            dispersion_v: Vec::new(),
        };
        scheme.build_dispersion();
        scheme
    }

    pub fn from_name(name: &str) -> Result<Self> {
        Ok(Self::new(SchemeKind::parse(name)?))
    }

    /// Space-time rate L = Q/T (1 for Alamouti, 2 for Golden and DLST).
    pub fn rate_l(&self) -> u32 {
        (self.symbols / self.periods) as u32
    }

    pub fn dispersion_u(&self) -> &[ComplexMatrix<T>] {
        &self.dispersion_u
    }

    pub fn dispersion_v(&self) -> &[ComplexMatrix<T>] {
        &self.dispersion_v
    }

    /// Closed-form encoding of `Q` input symbols into the `(R, T)` codeword.
    pub fn encode_block(&self, inputs: &[Complex<T>]) -> Result<ComplexMatrix<T>> {
        if inputs.len() != self.symbols {
            return Err(SimError::Framing(format!(
                "{} expects {} input symbols, got {}",
                self.kind.name(),
                self.symbols,
                inputs.len()
            )));
        }
        let mut w = match self.kind {
            SchemeKind::Alamouti => encode_alamouti(inputs),
            SchemeKind::Golden => encode_golden(inputs),
            SchemeKind::Dlst => encode_dlst(inputs),
        };
        w.scale(self.power_scale);
        Ok(w)
    }

    /// Dispersion-expansion encoding: `W = sum_q Re(Y_q) U_q + Im(Y_q) V_q`.
    /// Independent route from [`Self::encode_block`]; used by tests and by
    /// the stacked-matrix construction.
    pub fn encode_dispersion(&self, inputs: &[Complex<T>]) -> Result<ComplexMatrix<T>> {
        if inputs.len() != self.symbols {
            return Err(SimError::Framing(format!(
                "{} expects {} input symbols, got {}",
                self.kind.name(),
                self.symbols,
                inputs.len()
            )));
        }
        let mut w = ComplexMatrix::zeros(self.relays, self.periods);
        for q in 0..self.symbols {
            let re = inputs[q].re;
            let im = inputs[q].im;
            for r in 0..self.relays {
                for t in 0..self.periods {
                    let u = self.dispersion_u[q].at(r, t);
                    let v = self.dispersion_v[q].at(r, t);
                    w.rows[r][t] += u * re + v * im;
                }
            }
        }
        Ok(w)
    }

    fn build_dispersion(&mut self) {
        let specs = match self.kind {
            SchemeKind::Alamouti => alamouti_entries(),
            SchemeKind::Golden => golden_entries(),
            SchemeKind::Dlst => dlst_entries(),
        };
        let zero = ComplexMatrix::zeros(self.relays, self.periods);
        let mut u = vec![zero.clone(); self.symbols];
        let mut v = vec![zero; self.symbols];
        let j = Complex::new(T::zero(), T::one());
        for e in specs {
            // kappa * s_a: Re-part coefficient kappa, Im-part +/- j*kappa.
            let jk = if e.conjugated { -(j * e.kappa) } else { j * e.kappa };
            u[e.sym_a].rows[e.row][e.col] += e.kappa;
            v[e.sym_a].rows[e.row][e.col] += jk;
            // kappa * tau * s_b (tau real).
            u[e.sym_b].rows[e.row][e.col] += e.kappa * e.tau;
            v[e.sym_b].rows[e.row][e.col] += jk * e.tau;
        }
        for m in u.iter_mut().chain(v.iter_mut()) {
            m.scale(self.power_scale);
        }
        self.dispersion_u = u;
        self.dispersion_v = v;
    }
}

fn encode_alamouti<T: Scalar>(s: &[Complex<T>]) -> ComplexMatrix<T> {
    ComplexMatrix {
        rows: vec![
            vec![s[0], -s[1].conj()],
            vec![s[1], s[0].conj()],
        ],
    }
}

fn encode_golden<T: Scalar>(s: &[Complex<T>]) -> ComplexMatrix<T> {
    let (theta, theta_bar, alpha, alpha_bar) = golden_constants::<T>();
    let f = T::lit(1.0 / 5.0f64.sqrt());
    let j = Complex::new(T::zero(), T::one());
    let p = |a: usize, tau: T| s[a] + s[a + 1] * tau;
    ComplexMatrix {
        rows: vec![
            vec![alpha * p(0, theta) * f, alpha * p(2, theta) * f],
            vec![
                j * alpha_bar * p(2, theta_bar) * f,
                alpha_bar * p(0, theta_bar) * f,
            ],
        ],
    }
}

fn encode_dlst<T: Scalar>(s: &[Complex<T>]) -> ComplexMatrix<T> {
    let (theta, theta_bar, alpha, alpha_bar) = golden_constants::<T>();
    let f = T::lit(1.0 / 5.0f64.sqrt());
    let j = Complex::new(T::zero(), T::one());
    let ac = alpha.conj();
    let abc = alpha_bar.conj();
    // Layer pairs (s_a + tau s_{a+1}); the conjugated rows carry
    // (s_a^* + theta s_{a+1}^*) = conj(s_a + theta s_{a+1}).
    let p = |a: usize| s[a] + s[a + 1] * theta_bar;
    let pc = |a: usize| (s[a] + s[a + 1] * theta).conj();
    ComplexMatrix {
        rows: vec![
            vec![
                alpha * p(0) * f,
                alpha * p(2) * f,
                alpha * p(4) * f,
                alpha * p(6) * f,
            ],
            vec![
                j * alpha_bar * p(2) * f,
                alpha_bar * p(0) * f,
                j * alpha_bar * p(6) * f,
                alpha_bar * p(4) * f,
            ],
            vec![
                -(ac * pc(4)) * f,
                -(ac * pc(6)) * f,
                ac * pc(0) * f,
                ac * pc(2) * f,
            ],
            vec![
                j * abc * pc(6) * f,
                -(abc * pc(4)) * f,
                -(j * abc * pc(0)) * f,
                abc * pc(2) * f,
            ],
        ],
    }
}

fn alamouti_entries<T: Scalar>() -> Vec<EntrySpec<T>> {
    let one = Complex::new(T::one(), T::zero());
    let spec = |row, col, kappa, sym, conj| EntrySpec {
        row,
        col,
        kappa,
        sym_a: sym,
        tau: T::zero(),
        sym_b: sym,
        conjugated: conj,
    };
    vec![
        spec(0, 0, one, 0, false),
        spec(0, 1, -one, 1, true),
        spec(1, 0, one, 1, false),
        spec(1, 1, one, 0, true),
    ]
}

fn golden_entries<T: Scalar>() -> Vec<EntrySpec<T>> {
    let (theta, theta_bar, alpha, alpha_bar) = golden_constants::<T>();
    let f = T::lit(1.0 / 5.0f64.sqrt());
    let j = Complex::new(T::zero(), T::one());
    let spec = |row, col, kappa: Complex<T>, a, tau, b| EntrySpec {
        row,
        col,
        kappa: kappa * f,
        sym_a: a,
        tau,
        sym_b: b,
        conjugated: false,
    };
    vec![
        spec(0, 0, alpha, 0, theta, 1),
        spec(0, 1, alpha, 2, theta, 3),
        spec(1, 0, j * alpha_bar, 2, theta_bar, 3),
        spec(1, 1, alpha_bar, 0, theta_bar, 1),
    ]
}

fn dlst_entries<T: Scalar>() -> Vec<EntrySpec<T>> {
    let (theta, theta_bar, alpha, alpha_bar) = golden_constants::<T>();
    let f = T::lit(1.0 / 5.0f64.sqrt());
    let j = Complex::new(T::zero(), T::one());
    let ac = alpha.conj();
    let abc = alpha_bar.conj();
    let plain = |row, col, kappa: Complex<T>, a| EntrySpec {
        row,
        col,
        kappa: kappa * f,
        sym_a: a,
        tau: theta_bar,
        sym_b: a + 1,
        conjugated: false,
    };
    let conj = |row, col, kappa: Complex<T>, a| EntrySpec {
        row,
        col,
        kappa: kappa * f,
        sym_a: a,
        tau: theta,
        sym_b: a + 1,
        conjugated: true,
    };
    vec![
        plain(0, 0, alpha, 0),
        plain(0, 1, alpha, 2),
        plain(0, 2, alpha, 4),
        plain(0, 3, alpha, 6),
        plain(1, 0, j * alpha_bar, 2),
        plain(1, 1, alpha_bar, 0),
        plain(1, 2, j * alpha_bar, 6),
        plain(1, 3, alpha_bar, 4),
        conj(2, 0, -ac, 4),
        conj(2, 1, -ac, 6),
        conj(2, 2, ac, 0),
        conj(2, 3, ac, 2),
        conj(3, 0, j * abc, 6),
        conj(3, 1, -abc, 4),
        conj(3, 2, -(j * abc), 0),
        conj(3, 3, abc, 2),
    ]
}

// ---------------------------------------------------------------------------
// Real/imaginary stacking (interleaved ordering).
// ---------------------------------------------------------------------------

/// `[Re z1, Im z1, Re z2, Im z2, ...]`.
pub fn stack_complex<T: Scalar>(v: &[Complex<T>]) -> Vec<T> {
    let mut out = Vec::with_capacity(2 * v.len());
    for z in v {
        out.push(z.re);
        out.push(z.im);
    }
    out
}

pub fn unstack_complex<T: Scalar>(v: &[T]) -> Vec<Complex<T>> {
    assert!(v.len() % 2 == 0, "odd stacked length");
    v.chunks_exact(2).map(|c| Complex::new(c[0], c[1])).collect()
}

/// Stacks a complex matrix row-wise: `[row 0 interleaved, row 1, ...]`.
/// Used both for codewords (rows = relays) and received blocks (rows =
/// antennas).
pub fn stack_rows<T: Scalar>(m: &ComplexMatrix<T>) -> Vec<T> {
    let mut out = Vec::with_capacity(2 * m.n_rows() * m.n_cols());
    for row in &m.rows {
        for z in row {
            out.push(z.re);
            out.push(z.im);
        }
    }
    out
}

/// `2x2` real rotation block of a complex coefficient:
/// `[[Re, -Im], [Im, Re]]`.
#[inline]
fn rot2<T: Scalar>(h: Complex<T>) -> [[T; 2]; 2] {
    [[h.re, -h.im], [h.im, h.re]]
}

// ---------------------------------------------------------------------------
// Stacked system matrices.
// ---------------------------------------------------------------------------

/// `F` of the stacked system: `(2RT, 2RQ)`, block-diagonal over relays. The
/// relay-`r` block maps that relay's stacked encoder input to the stacked
/// `r`-th codeword row it transmits.
pub fn build_f<T: Scalar>(scheme: &StbcScheme<T>) -> Mat<T> {
    let (r_n, t_n, q_n) = (scheme.relays, scheme.periods, scheme.symbols);
    let mut f = Mat::zeros(2 * r_n * t_n, 2 * r_n * q_n);
    for r in 0..r_n {
        for t in 0..t_n {
            for q in 0..q_n {
                let u = scheme.dispersion_u[q].at(r, t);
                let v = scheme.dispersion_v[q].at(r, t);
                let row0 = 2 * (r * t_n + t);
                let col0 = 2 * (r * q_n + q);
                f[(row0, col0)] = u.re;
                f[(row0 + 1, col0)] = u.im;
                f[(row0, col0 + 1)] = v.re;
                f[(row0 + 1, col0 + 1)] = v.im;
            }
        }
    }
    f
}

/// `G` of the stacked system: `(2MT, 2RT)`, blocks `G_{j,r} = I_T (x) rot2(h_{j,r})`
/// with the relay->destination coefficient constant over the block's periods.
pub fn build_g<T: Scalar>(h_relay_dest: &[Vec<Complex<T>>], periods: usize) -> Mat<T> {
    let m_n = h_relay_dest.len();
    let r_n = h_relay_dest.first().map_or(0, Vec::len);
    let mut g = Mat::zeros(2 * m_n * periods, 2 * r_n * periods);
    for (j, row) in h_relay_dest.iter().enumerate() {
        assert_eq!(row.len(), r_n, "ragged channel matrix");
        for (r, &h) in row.iter().enumerate() {
            let b = rot2(h);
            for t in 0..periods {
                let r0 = 2 * (j * periods + t);
                let c0 = 2 * (r * periods + t);
                g[(r0, c0)] = b[0][0];
                g[(r0, c0 + 1)] = b[0][1];
                g[(r0 + 1, c0)] = b[1][0];
                g[(r0 + 1, c0 + 1)] = b[1][1];
            }
        }
    }
    g
}

/// The assembled stacked system for one channel realization.
#[derive(Debug, Clone)]
pub struct EquivalentChannel<T> {
    /// `Geq = G B F H_eq`, `(2MT, 2Q)`: source symbols to stacked phase-2
    /// observations.
    pub geq: Mat<T>,
    /// `G F H_nor`, `(2MT, 2RQ)`: shaping of the forwarded relay noise.
    pub noise_shape: Mat<T>,
}

impl<T: Scalar> EquivalentChannel<T> {
    /// Scalar effective-noise inflation: `1 + mean diag(S S^T)` where `S`
    /// shapes the forwarded relay noise. Multiplying the channel noise
    /// variance by this folds the colored relay-noise term into the white
    /// model the detector assumes.
    pub fn noise_inflation(&self) -> T {
        let s = &self.noise_shape;
        let mut acc = T::zero();
        for i in 0..s.rows() {
            acc += crate::linalg::dot(s.row(i), s.row(i));
        }
        T::one() + acc / T::lit(s.rows() as f64)
    }
}

/// Builds `Geq = G B F H_eq` together with the relay-noise shaping factor
/// `G F H_nor`.
///
/// `b_amplitude[r]` is the amplitude (root power) received from relay `r`;
/// `af_gains[r]` carries that relay's normalization gains.
pub fn build_geq<T: Scalar>(
    g: &Mat<T>,
    b_amplitude: &[T],
    f: &Mat<T>,
    af_gains: &[AfGain<T>],
    scheme: &StbcScheme<T>,
) -> Result<EquivalentChannel<T>> {
    let (r_n, t_n, q_n) = (scheme.relays, scheme.periods, scheme.symbols);
    if g.cols() != 2 * r_n * t_n
        || f.rows() != 2 * r_n * t_n
        || f.cols() != 2 * r_n * q_n
        || b_amplitude.len() != r_n
        || af_gains.len() != r_n
    {
        return Err(SimError::Dimension(format!(
            "geq factors disagree with scheme {} (R={r_n}, T={t_n}, Q={q_n})",
            scheme.kind.name()
        )));
    }

    // G B: scale G's relay column blocks by the received amplitudes.
    let mut gb = g.clone();
    let mut gb_t = gb.transpose(); // scale contiguous rows instead of columns
    let mut col_scale = Vec::with_capacity(2 * r_n * t_n);
    for &a in b_amplitude {
        col_scale.extend(std::iter::repeat(a).take(2 * t_n));
    }
    gb_t.scale_rows(&col_scale);
    gb = gb_t.transpose();

    // (G B) F and G F.
    let gbf = gb.matmul(f);
    let gf = g.matmul(f);

    // H_eq: vertical stack over relays of I_Q (x) rot2(h_eq_r).
    let mut h_eq = Mat::zeros(2 * r_n * q_n, 2 * q_n);
    for (r, gain) in af_gains.iter().enumerate() {
        let b = rot2(gain.h_eq);
        for q in 0..q_n {
            let r0 = 2 * (r * q_n + q);
            let c0 = 2 * q;
            h_eq[(r0, c0)] = b[0][0];
            h_eq[(r0, c0 + 1)] = b[0][1];
            h_eq[(r0 + 1, c0)] = b[1][0];
            h_eq[(r0 + 1, c0 + 1)] = b[1][1];
        }
    }
    let geq = gbf.matmul(&h_eq);

    // H_nor is diagonal per relay block, so scale G F's column blocks.
    let mut gf_t = gf.transpose();
    let mut nor_scale = Vec::with_capacity(2 * r_n * q_n);
    for gain in af_gains {
        nor_scale.extend(std::iter::repeat(gain.h_nor).take(2 * q_n));
    }
    gf_t.scale_rows(&nor_scale);
    let noise_shape = gf_t.transpose();

    Ok(EquivalentChannel { geq, noise_shape })
}
