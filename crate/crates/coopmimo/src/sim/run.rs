//! Monte-Carlo measurement: one BER point per configuration, sweeps over
//! relay count or transmit power.

use num_complex::Complex;
use rayon::prelude::*;

use crate::channel::{awgn, ChannelRealization, LinkGeometry};
use crate::error::{Result, SimError};
use crate::fec::{CodeConfig, FecChain, InterleaverMap};
use crate::geometry::{
    distance_relay_to_mt, sample_trajectory, select_relays_pi, select_relays_random, Position,
    RelaySet, SelectionResult,
};
use crate::linalg::Mat;
use crate::receiver::{iterative_receive, CodewordObservation};
use crate::relay::af_normalize;
use crate::seed::{derive_rng, mix, Stream};
use crate::sim::config::{ScenarioConfig, Strategy};
use crate::stbc::{build_f, build_g, build_geq, StbcScheme};

type C64 = Complex<f64>;

/// One measured BER point.
#[derive(Debug, Clone, PartialEq)]
pub struct BerRecord {
    pub scheme: String,
    pub strategy: String,
    pub n_relays: usize,
    pub ps_db: f64,
    pub frames: u64,
    pub info_bits: u64,
    pub bit_errors: u64,
    pub ber: f64,
    pub seed: u64,
}

/// Sweep variable of a Figure-style measurement series.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepVariable {
    NRelays,
    PsDb,
}

impl SweepVariable {
    pub fn parse(name: &str) -> Result<Self> {
        match name.to_ascii_lowercase().as_str() {
            "n" | "n_relays" | "n-relays" | "relays" => Ok(SweepVariable::NRelays),
            "ps" | "ps_db" | "ps-db" | "power" => Ok(SweepVariable::PsDb),
            other => Err(SimError::Config(format!("unknown sweep variable '{other}'"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            SweepVariable::NRelays => "n_relays",
            SweepVariable::PsDb => "ps_db",
        }
    }
}

#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub variable: SweepVariable,
    pub values: Vec<f64>,
    pub base: ScenarioConfig,
    pub schemes: Vec<crate::stbc::SchemeKind>,
    pub strategies: Vec<Strategy>,
}

/// Static per-position context shared by all of that position's frames.
struct PositionContext {
    index: usize,
    frames: usize,
    frame_offset: usize,
    geometry: LinkGeometry<f64>,
}

/// Runs one measurement point: the terminal traverses the trajectory, the
/// selection updates at every step, and each position simulates its share of
/// codeword frames end to end.
pub fn run_point(config: &ScenarioConfig) -> Result<BerRecord> {
    config.validate()?;
    let scheme = StbcScheme::<f64>::new(config.scheme);
    let chain = FecChain::new(
        CodeConfig::new(config.code_rate),
        config.constellation,
        scheme.symbols,
    )?;
    let f_matrix = build_f(&scheme);

    let layout = config.layout();
    let bs = layout.bs_position();
    let (relays, trajectory) = sample_trajectory(&layout, config.seed)?;

    let n_pos = trajectory.samples.len();
    let base_frames = config.frames / n_pos;
    let remainder = config.frames % n_pos;

    let mut contexts = Vec::with_capacity(n_pos);
    let mut frame_offset = 0usize;
    for (i, &mt) in trajectory.samples.iter().enumerate() {
        let frames_here = base_frames + usize::from(i < remainder);
        let selection = match config.strategy {
            Strategy::Pi => select_relays_pi(&relays, bs, mt, scheme.relays)?,
            Strategy::Random => select_relays_random(
                &relays,
                bs,
                mt,
                scheme.relays,
                mix(config.seed, i as u64),
            )?,
        };
        let geometry = link_geometry(&relays, &selection, bs, mt, &trajectory);
        contexts.push(PositionContext {
            index: i,
            frames: frames_here,
            frame_offset,
            geometry,
        });
        frame_offset += frames_here;
    }
    debug_assert_eq!(frame_offset, config.frames);

    // Every frame owns a derived RNG stream, so the error count is a plain
    // commutative sum and worker count cannot change the result.
    let bit_errors: u64 = contexts
        .par_iter()
        .flat_map_iter(|ctx| (0..ctx.frames).map(move |k| (ctx, k)))
        .map(|(ctx, k)| {
            simulate_frame(config, &scheme, &chain, &f_matrix, ctx, k)
                .map(|errors| errors as u64)
        })
        .try_reduce(|| 0u64, |a, b| Ok(a + b))?;

    let info_bits = (config.frames * chain.info_bits) as u64;
    Ok(BerRecord {
        scheme: config.scheme.name().to_string(),
        strategy: config.strategy.name().to_string(),
        n_relays: config.n_relays,
        ps_db: config.ps_db,
        frames: config.frames as u64,
        info_bits,
        bit_errors,
        ber: bit_errors as f64 / info_bits as f64,
        seed: config.seed,
    })
}

fn link_geometry(
    relays: &RelaySet<f64>,
    selection: &SelectionResult<f64>,
    bs: Position<f64>,
    mt: Position<f64>,
    trajectory: &crate::geometry::Trajectory<f64>,
) -> LinkGeometry<f64> {
    let d_bs_relay = selection
        .relay_ids
        .iter()
        .map(|&id| {
            let pos = relays.position(id).expect("selected relay exists");
            bs.distance_to(&pos)
        })
        .collect();
    let d_relay_mt = selection
        .relay_ids
        .iter()
        .map(|&id| {
            let pos = relays.position(id).expect("selected relay exists");
            distance_relay_to_mt(bs, pos, mt)
        })
        .collect();
    LinkGeometry {
        d_bs_mt: bs.distance_to(&mt),
        d_bs_relay,
        d_relay_mt,
        mt_tunnel_depth: trajectory.tunnel_depth(mt.x),
    }
}

/// One codeword block end to end. Returns the information-bit error count.
///
/// Draw order inside the frame stream is fixed (information bits, channel
/// coefficients, phase-1 noise, relay noise, destination noise) so a record
/// is reproducible from its seed alone.
fn simulate_frame(
    config: &ScenarioConfig,
    scheme: &StbcScheme<f64>,
    chain: &FecChain,
    f_matrix: &Mat<f64>,
    ctx: &PositionContext,
    frame_in_position: usize,
) -> Result<usize> {
    let frame_index = (ctx.frame_offset + frame_in_position) as u64;
    let mut rng = derive_rng(config.seed, Stream::Frame, ctx.index as u64, frame_index);
    let mut il_rng = derive_rng(
        config.seed,
        Stream::Interleaver,
        ctx.index as u64,
        frame_index,
    );

    let info: Vec<u8> = (0..chain.info_bits)
        .map(|_| (rand::Rng::gen::<bool>(&mut rng)) as u8)
        .collect();
    let interleaver = InterleaverMap::new(chain.coded_bits, &mut il_rng);
    let x = chain.transmit::<f64>(&info, &interleaver)?;

    let budget = crate::channel::link_budget(
        config.ps_db,
        config.alpha,
        &ctx.geometry,
        config.tunnel_model,
    )?;
    let chan = ChannelRealization::draw(budget, config.n_antennas, &mut rng);
    let sigma2 = config.sigma2;

    // Phase 1: direct broadcast to the destination antennas.
    let sqrt_pd = chan.powers.p_source_dest.amplitude();
    let mut phase1 = Vec::with_capacity(config.n_antennas);
    for j in 0..config.n_antennas {
        let noise = awgn(x.len(), sigma2, &mut rng)?;
        let row: Vec<C64> = x
            .iter()
            .zip(&noise)
            .map(|(&xq, &v)| chan.h_source_dest[j] * xq * sqrt_pd + v)
            .collect();
        phase1.push(row);
    }

    // Phase 2: each relay normalizes its own noisy copy, encodes, and
    // transmits its row of the codeword.
    let r_n = scheme.relays;
    let mut af_gains = Vec::with_capacity(r_n);
    let mut rows: Vec<Vec<C64>> = Vec::with_capacity(r_n);
    for r in 0..r_n {
        let p_sr = chan.powers.p_source_relay[r].linear;
        let h_sr = chan.h_source_relay[r];
        let noise = awgn(x.len(), sigma2, &mut rng)?;
        let mut y_r = Vec::with_capacity(x.len());
        let mut gain = None;
        for (q, &xq) in x.iter().enumerate() {
            let rx = h_sr * xq * p_sr.sqrt() + noise[q];
            let (normalized, g) = af_normalize(rx, p_sr, h_sr, sigma2)?;
            y_r.push(normalized);
            gain = Some(g);
        }
        af_gains.push(gain.expect("at least one symbol"));
        let w_r = scheme.encode_block(&y_r)?;
        rows.push(w_r.row(r).to_vec());
    }

    let b_amp: Vec<f64> = chan
        .powers
        .p_relay_dest
        .iter()
        .map(|p| p.amplitude())
        .collect();
    let mut y_d = Vec::with_capacity(2 * config.n_antennas * scheme.periods);
    for j in 0..config.n_antennas {
        let noise = awgn(scheme.periods, sigma2, &mut rng)?;
        for t in 0..scheme.periods {
            let mut acc = noise[t];
            for r in 0..r_n {
                acc += chan.h_relay_dest[j][r] * rows[r][t] * b_amp[r];
            }
            y_d.push(acc.re);
            y_d.push(acc.im);
        }
    }

    let equivalent = build_geq(
        &build_g(&chan.h_relay_dest, scheme.periods),
        &b_amp,
        f_matrix,
        &af_gains,
        scheme,
    )?;
    let obs = CodewordObservation {
        y_d: &y_d,
        equivalent: &equivalent,
        phase1: &phase1,
        h_source_dest: &chan.h_source_dest,
        p_d_linear: chan.powers.p_source_dest.linear,
        sigma2,
    };
    let decoded = iterative_receive(&obs, chain, &interleaver, config.n_iterations)?;
    Ok(info.iter().zip(&decoded).filter(|(a, b)| a != b).count())
}

/// Runs a sweep: one record per value x scheme x strategy, in that order.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<BerRecord>> {
    if spec.values.is_empty() {
        return Err(SimError::Config("sweep needs at least one value".into()));
    }
    if spec.schemes.is_empty() || spec.strategies.is_empty() {
        return Err(SimError::Config(
            "sweep needs at least one scheme and one strategy".into(),
        ));
    }
    let mut records = Vec::new();
    for &value in &spec.values {
        for &kind in &spec.schemes {
            for &strategy in &spec.strategies {
                let mut config = spec.base.clone();
                config.apply_scheme(kind);
                config.strategy = strategy;
                match spec.variable {
                    SweepVariable::NRelays => {
                        if value <= 0.0 || value.fract() != 0.0 {
                            return Err(SimError::Config(format!(
                                "relay count sweep value {value} is not a positive integer"
                            )));
                        }
                        config.n_relays = value as usize;
                    }
                    SweepVariable::PsDb => config.ps_db = value,
                }
                records.push(run_point(&config)?);
            }
        }
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stbc::SchemeKind;

    fn small_config(kind: SchemeKind) -> ScenarioConfig {
        let mut c = ScenarioConfig::for_scheme(kind);
        c.n_relays = 20;
        c.frames = 80;
        c.trajectory_step = 100.0; // 11 positions, keeps the test quick
        c.seed = 7;
        c
    }

    #[test]
    fn noiseless_point_has_zero_errors() {
        for kind in [SchemeKind::Alamouti, SchemeKind::Golden, SchemeKind::Dlst] {
            for strategy in [Strategy::Pi, Strategy::Random] {
                let mut c = small_config(kind);
                c.sigma2 = 0.0;
                c.strategy = strategy;
                c.frames = 30;
                let rec = run_point(&c).unwrap();
                assert_eq!(rec.bit_errors, 0, "{} {}", kind.name(), strategy.name());
                assert_eq!(rec.ber, 0.0);
            }
        }
    }

    #[test]
    fn identical_seeds_reproduce_records() {
        let mut c = small_config(SchemeKind::Golden);
        c.sigma2 = 3e-11;
        let a = run_point(&c).unwrap();
        let b = run_point(&c).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn frame_accounting_is_exact() {
        let mut c = small_config(SchemeKind::Dlst);
        c.frames = 97; // deliberately not divisible by the position count
        c.sigma2 = 0.0;
        let rec = run_point(&c).unwrap();
        assert_eq!(rec.frames, 97);
        assert_eq!(rec.info_bits, 97 * 10); // 10 info bits per DLST block
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let mut c = small_config(SchemeKind::Golden);
        c.sigma2 = 5e-11;
        c.frames = 60;
        let pool1 = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let pool4 = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let a = pool1.install(|| run_point(&c)).unwrap();
        let b = pool4.install(|| run_point(&c)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn sweep_emits_deterministic_grid() {
        let mut base = small_config(SchemeKind::Golden);
        base.frames = 20;
        base.sigma2 = 0.0;
        let spec = SweepSpec {
            variable: SweepVariable::NRelays,
            values: vec![10.0, 20.0],
            base,
            schemes: vec![SchemeKind::Alamouti, SchemeKind::Golden],
            strategies: vec![Strategy::Pi, Strategy::Random],
        };
        let records = run_sweep(&spec).unwrap();
        assert_eq!(records.len(), 8);
        assert_eq!(records[0].n_relays, 10);
        assert_eq!(records[0].scheme, "alamouti");
        assert_eq!(records[0].strategy, "pi");
        assert_eq!(records[7].n_relays, 20);
        assert_eq!(records[7].scheme, "golden");
        assert_eq!(records[7].strategy, "random");
    }

    #[test]
    fn sweep_rejects_fractional_relay_counts() {
        let spec = SweepSpec {
            variable: SweepVariable::NRelays,
            values: vec![10.5],
            base: small_config(SchemeKind::Golden),
            schemes: vec![SchemeKind::Golden],
            strategies: vec![Strategy::Pi],
        };
        assert!(run_sweep(&spec).is_err());
    }
}
