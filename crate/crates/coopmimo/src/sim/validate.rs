//! Built-in invariant suite behind the `validate` CLI subcommand: quick
//! self-checks of the geometry, the stacked algebra and the full chain.

use num_complex::Complex;
use rand::Rng;

use crate::geometry::{sample_trajectory, select_relays_pi, CellLayout, Position};
use crate::linalg::dot;
use crate::relay::af_normalize;
use crate::scalar::complex_gaussian;
use crate::seed::{derive_rng, Stream};
use crate::sim::config::{ScenarioConfig, Strategy};
use crate::sim::run::run_point;
use crate::stbc::{
    build_f, build_g, build_geq, stack_complex, unstack_complex, SchemeKind, StbcScheme,
};

type C64 = Complex<f64>;
type CheckResult = Result<(), String>;

pub struct Check {
    pub name: &'static str,
    run: fn() -> CheckResult,
}

pub fn all_checks() -> Vec<Check> {
    vec![
        Check { name: "geometry: selection distance equals euclidean", run: check_distance },
        Check { name: "geometry: nearest-relay selection matches brute force", run: check_selection },
        Check { name: "stacking: real/imag round trip", run: check_stacking },
        Check { name: "stbc: dispersion matches closed form", run: check_dispersion },
        Check { name: "stbc: equivalent channel matches zero-noise chain", run: check_geq },
        Check { name: "stbc: orthogonal scheme gram is diagonal", run: check_orthogonality },
        Check { name: "receiver: perfect-feedback cancellation is exact", run: check_pic },
        Check { name: "harness: noiseless loopback has zero errors", run: check_loopback },
        Check { name: "harness: records reproduce bit-exactly", run: check_determinism },
    ]
}

/// Runs every check, printing one line per check. Returns the failure count.
pub fn run_all(mut sink: impl std::io::Write) -> std::io::Result<usize> {
    let mut failures = 0;
    for check in all_checks() {
        match (check.run)() {
            Ok(()) => writeln!(sink, "ok   {}", check.name)?,
            Err(msg) => {
                failures += 1;
                writeln!(sink, "FAIL {}: {msg}", check.name)?;
            }
        }
    }
    Ok(failures)
}

fn check_distance() -> CheckResult {
    let mut rng = derive_rng(1001, Stream::Frame, 0, 0);
    for _ in 0..500 {
        let mut p = || Position::new(rng.gen::<f64>() * 1000.0, rng.gen::<f64>() * 1000.0 - 500.0);
        let (bs, relay, mt) = (p(), p(), p());
        let by_angle = crate::geometry::distance_relay_to_mt(bs, relay, mt);
        let direct = relay.distance_to(&mt);
        if (by_angle - direct).abs() > 1e-9 * direct.max(1.0) {
            return Err(format!("{by_angle} vs {direct}"));
        }
    }
    Ok(())
}

fn check_selection() -> CheckResult {
    let layout = CellLayout {
        n_relays: 150,
        cell_diameter: 1000.0,
        trajectory_length: 1000.0,
        step: 10.0,
        tunnel_start: 600.0,
        tunnel_length: 200.0,
    };
    let (relays, trajectory) = sample_trajectory(&layout, 77).map_err(|e| e.to_string())?;
    let bs = layout.bs_position();
    for &mt in trajectory.samples.iter().step_by(7) {
        let sel = select_relays_pi(&relays, bs, mt, 4).map_err(|e| e.to_string())?;
        let mut all: Vec<(f64, u32)> = relays
            .iter()
            .map(|&(id, p)| (p.distance_to(&mt), id))
            .collect();
        all.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
        let expect: Vec<u32> = all[..4].iter().map(|&(_, id)| id).collect();
        if sel.relay_ids != expect {
            return Err(format!("at x={}: {:?} vs {expect:?}", mt.x, sel.relay_ids));
        }
        let worst_selected = sel.distances_to_mt.last().copied().unwrap_or(0.0);
        if all[4..].iter().any(|&(d, _)| d < worst_selected - 1e-12) {
            return Err("non-selected relay closer than a selected one".into());
        }
    }
    Ok(())
}

fn check_stacking() -> CheckResult {
    let mut rng = derive_rng(1002, Stream::Frame, 0, 0);
    let v: Vec<C64> = (0..17).map(|_| complex_gaussian(&mut rng, 1.0)).collect();
    if unstack_complex(&stack_complex(&v)) != v {
        return Err("round trip mismatch".into());
    }
    Ok(())
}

fn check_dispersion() -> CheckResult {
    let mut rng = derive_rng(1003, Stream::Frame, 0, 0);
    for kind in [SchemeKind::Alamouti, SchemeKind::Golden, SchemeKind::Dlst] {
        let scheme = StbcScheme::<f64>::new(kind);
        for _ in 0..50 {
            let s: Vec<C64> = (0..scheme.symbols).map(|_| complex_gaussian(&mut rng, 1.0)).collect();
            let a = scheme.encode_block(&s).map_err(|e| e.to_string())?;
            let b = scheme.encode_dispersion(&s).map_err(|e| e.to_string())?;
            for r in 0..scheme.relays {
                for t in 0..scheme.periods {
                    if (a.at(r, t) - b.at(r, t)).norm() > 1e-12 {
                        return Err(format!("{} entry ({r},{t})", kind.name()));
                    }
                }
            }
        }
    }
    Ok(())
}

fn check_geq() -> CheckResult {
    let mut rng = derive_rng(1004, Stream::Frame, 0, 0);
    for kind in [SchemeKind::Alamouti, SchemeKind::Golden, SchemeKind::Dlst] {
        let scheme = StbcScheme::<f64>::new(kind);
        let f = build_f(&scheme);
        for _ in 0..20 {
            let x: Vec<C64> = (0..scheme.symbols).map(|_| complex_gaussian(&mut rng, 1.0)).collect();
            let h_sr: Vec<C64> =
                (0..scheme.relays).map(|_| complex_gaussian(&mut rng, 1.0)).collect();
            let h_rd: Vec<Vec<C64>> = (0..2)
                .map(|_| (0..scheme.relays).map(|_| complex_gaussian(&mut rng, 1.0)).collect())
                .collect();
            let b: Vec<f64> = (0..scheme.relays).map(|_| 0.2 + rng.gen::<f64>()).collect();
            let mut gains = Vec::new();
            let mut rows = Vec::new();
            for r in 0..scheme.relays {
                let mut y_r = Vec::new();
                let mut gain = None;
                for &xq in &x {
                    let rx = h_sr[r] * xq;
                    let (n, g) = af_normalize(rx, 1.0, h_sr[r], 0.0).map_err(|e| e.to_string())?;
                    y_r.push(n);
                    gain = Some(g);
                }
                gains.push(gain.unwrap());
                let w = scheme.encode_block(&y_r).map_err(|e| e.to_string())?;
                rows.push(w.row(r).to_vec());
            }
            let mut y_d = Vec::new();
            for j in 0..2 {
                for t in 0..scheme.periods {
                    let mut acc = Complex::new(0.0, 0.0);
                    for r in 0..scheme.relays {
                        acc += h_rd[j][r] * rows[r][t] * b[r];
                    }
                    y_d.push(acc.re);
                    y_d.push(acc.im);
                }
            }
            let eq = build_geq(&build_g(&h_rd, scheme.periods), &b, &f, &gains, &scheme)
                .map_err(|e| e.to_string())?;
            let predicted = eq.geq.matvec(&stack_complex(&x));
            for (a, b) in predicted.iter().zip(&y_d) {
                if (a - b).abs() > 1e-10 {
                    return Err(format!("{}: {a} vs {b}", kind.name()));
                }
            }
        }
    }
    Ok(())
}

fn check_orthogonality() -> CheckResult {
    let mut rng = derive_rng(1005, Stream::Frame, 0, 0);
    let scheme = StbcScheme::<f64>::new(SchemeKind::Alamouti);
    let f = build_f(&scheme);
    for _ in 0..50 {
        let h_sr: Vec<C64> = (0..2).map(|_| complex_gaussian(&mut rng, 1.0)).collect();
        let h_rd: Vec<Vec<C64>> = (0..2)
            .map(|_| (0..2).map(|_| complex_gaussian(&mut rng, 1.0)).collect())
            .collect();
        let gains: Vec<_> = h_sr
            .iter()
            .map(|&h| af_normalize(h, 1.0, h, 0.3).map(|x| x.1))
            .collect::<Result<_, _>>()
            .map_err(|e| e.to_string())?;
        let eq = build_geq(&build_g(&h_rd, 2), &[1.0, 0.7], &f, &gains, &scheme)
            .map_err(|e| e.to_string())?;
        let gram = eq.geq.transpose().matmul(&eq.geq);
        let d = gram[(0, 0)];
        for i in 0..gram.rows() {
            for j in 0..gram.cols() {
                let expect = if i == j { d } else { 0.0 };
                if (gram[(i, j)] - expect).abs() > 1e-10 * d.max(1.0) {
                    return Err(format!("gram({i},{j}) = {}", gram[(i, j)]));
                }
            }
        }
    }
    Ok(())
}

fn check_pic() -> CheckResult {
    let mut rng = derive_rng(1006, Stream::Frame, 0, 0);
    for kind in [SchemeKind::Alamouti, SchemeKind::Golden, SchemeKind::Dlst] {
        let scheme = StbcScheme::<f64>::new(kind);
        let f = build_f(&scheme);
        let h_sr: Vec<C64> = (0..scheme.relays).map(|_| complex_gaussian(&mut rng, 1.0)).collect();
        let h_rd: Vec<Vec<C64>> = (0..2)
            .map(|_| (0..scheme.relays).map(|_| complex_gaussian(&mut rng, 1.0)).collect())
            .collect();
        let gains: Vec<_> = h_sr
            .iter()
            .map(|&h| af_normalize(h, 1.0, h, 0.0).map(|x| x.1))
            .collect::<Result<_, _>>()
            .map_err(|e| e.to_string())?;
        let b = vec![1.0; scheme.relays];
        let eq = build_geq(&build_g(&h_rd, scheme.periods), &b, &f, &gains, &scheme)
            .map_err(|e| e.to_string())?;
        let x: Vec<f64> = (0..2 * scheme.symbols).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect();
        let y = eq.geq.matvec(&x);
        let out = crate::receiver::pic_detect(&y, &eq.geq, &x).map_err(|e| e.to_string())?;
        for (p, (e, &xv)) in out.estimates.iter().zip(&x).enumerate() {
            if (e - xv).abs() > 1e-10 {
                return Err(format!("{} component {p}: {e} vs {xv}", kind.name()));
            }
        }
        // Consistency of the projection inner products.
        for p in 0..eq.geq.cols() {
            let g = eq.geq.col(p);
            if (out.column_energy[p] - dot(&g, &g)).abs() > 1e-12 {
                return Err("column energy mismatch".into());
            }
        }
    }
    Ok(())
}

fn check_loopback() -> CheckResult {
    for kind in [SchemeKind::Alamouti, SchemeKind::Golden, SchemeKind::Dlst] {
        for strategy in [Strategy::Pi, Strategy::Random] {
            let mut c = ScenarioConfig::for_scheme(kind);
            c.strategy = strategy;
            c.n_relays = 20;
            c.frames = 25;
            c.trajectory_step = 100.0;
            c.sigma2 = 0.0;
            c.seed = 5;
            let rec = run_point(&c).map_err(|e| e.to_string())?;
            if rec.bit_errors != 0 {
                return Err(format!(
                    "{} / {}: {} errors",
                    kind.name(),
                    strategy.name(),
                    rec.bit_errors
                ));
            }
        }
    }
    Ok(())
}

fn check_determinism() -> CheckResult {
    let mut c = ScenarioConfig::for_scheme(SchemeKind::Golden);
    c.n_relays = 15;
    c.frames = 40;
    c.trajectory_step = 125.0;
    c.sigma2 = 4e-11;
    c.seed = 11;
    let a = run_point(&c).map_err(|e| e.to_string())?;
    let b = run_point(&c).map_err(|e| e.to_string())?;
    if a != b {
        return Err(format!("{a:?} vs {b:?}"));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_builtin_check_passes() {
        let mut out = Vec::new();
        let failures = run_all(&mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert_eq!(failures, 0, "{text}");
        assert_eq!(text.lines().count(), all_checks().len());
    }
}
