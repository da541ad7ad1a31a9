//! Cell geometry: relay placement, terminal trajectory and relay selection.
//!
//! The base station sits at the cell center. `N` fixed relays are dropped
//! uniformly over the cell disc, the mobile terminal moves along the x-axis
//! in constant steps, and at every update position the selection picks the
//! `R` cooperating relays either from positioning information (nearest to
//! the terminal) or uniformly at random.

use rand::Rng;

use crate::error::{Result, SimError};
use crate::scalar::Scalar;
use crate::seed::{derive_rng, Stream};

/// Relays are rejected from a strip of this half-width around the tunnel
/// bore; a relay placed inside the tunnel could not serve as coverage for it.
const TUNNEL_HALF_WIDTH_M: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Position<T> {
    pub x: T,
    pub y: T,
}

impl<T: Scalar> Position<T> {
    pub fn new(x: T, y: T) -> Self {
        Self { x, y }
    }

    pub fn distance_to(&self, other: &Self) -> T {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        (dx * dx + dy * dy).sqrt()
    }
}

/// The fixed relay population of one scenario draw.
#[derive(Debug, Clone)]
pub struct RelaySet<T> {
    relays: Vec<(u32, Position<T>)>,
}

impl<T: Scalar> RelaySet<T> {
    pub fn new(relays: Vec<(u32, Position<T>)>) -> Self {
        debug_assert!({
            let mut ids: Vec<u32> = relays.iter().map(|r| r.0).collect();
            ids.sort_unstable();
            ids.windows(2).all(|w| w[0] != w[1])
        });
        Self { relays }
    }

    pub fn len(&self) -> usize {
        self.relays.len()
    }

    pub fn is_empty(&self) -> bool {
        self.relays.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &(u32, Position<T>)> {
        self.relays.iter()
    }

    pub fn position(&self, id: u32) -> Option<Position<T>> {
        self.relays.iter().find(|(i, _)| *i == id).map(|(_, p)| *p)
    }
}

/// Terminal path: `x = 0, m, 2m, ...` up to the trajectory length, with a
/// tunnel occupying `[tunnel_start, tunnel_start + tunnel_length]`.
#[derive(Debug, Clone)]
pub struct Trajectory<T> {
    pub length: T,
    pub step: T,
    pub tunnel_start: T,
    pub tunnel_length: T,
    pub samples: Vec<Position<T>>,
}

impl<T: Scalar> Trajectory<T> {
    /// Distance travelled into the tunnel, if the coordinate is inside it.
    pub fn tunnel_depth(&self, x: T) -> Option<T> {
        let end = self.tunnel_start + self.tunnel_length;
        if x > self.tunnel_start && x <= end {
            Some(x - self.tunnel_start)
        } else {
            None
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectionResult<T> {
    pub relay_ids: Vec<u32>,
    pub distances_to_mt: Vec<T>,
}

/// Geometric layout parameters of one scenario.
#[derive(Debug, Clone, Copy)]
pub struct CellLayout<T> {
    pub n_relays: usize,
    pub cell_diameter: T,
    pub trajectory_length: T,
    pub step: T,
    pub tunnel_start: T,
    pub tunnel_length: T,
}

impl<T: Scalar> CellLayout<T> {
    /// Base station position: cell center, on the trajectory axis.
    pub fn bs_position(&self) -> Position<T> {
        Position::new(self.trajectory_length * T::lit(0.5), T::zero())
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.trajectory_length > T::zero()
            && self.step > T::zero()
            && self.cell_diameter > T::zero()
            && self.tunnel_start >= T::zero()
            && self.tunnel_length >= T::zero()
            && self.tunnel_start + self.tunnel_length <= self.trajectory_length;
        if ok {
            Ok(())
        } else {
            Err(SimError::Config(format!(
                "invalid layout: K={} m={} D={} tunnel=[{}, {}]",
                self.trajectory_length,
                self.step,
                self.cell_diameter,
                self.tunnel_start,
                self.tunnel_start + self.tunnel_length
            )))
        }
    }
}

/// Distance between a relay and the terminal, computed from the base-station
/// view: the two radial distances and the angle between the rays. Equals the
/// direct Euclidean distance.
pub fn distance_relay_to_mt<T: Scalar>(
    bs: Position<T>,
    relay: Position<T>,
    mt: Position<T>,
) -> T {
    let d_bs_r = bs.distance_to(&relay);
    let d_bs_mt = bs.distance_to(&mt);
    if d_bs_r == T::zero() || d_bs_mt == T::zero() {
        // One ray is degenerate and the angle is undefined; the law of
        // cosines collapses to the remaining radial distance.
        return d_bs_r.max(d_bs_mt);
    }
    let dot = (relay.x - bs.x) * (mt.x - bs.x) + (relay.y - bs.y) * (mt.y - bs.y);
    let cos_theta = dot / (d_bs_r * d_bs_mt);
    let sq = d_bs_r * d_bs_r + d_bs_mt * d_bs_mt
        - T::lit(2.0) * d_bs_mt * d_bs_r * cos_theta;
    sq.max(T::zero()).sqrt()
}

/// Positioning-information selection: the `r` relays nearest to the terminal,
/// distances ascending, ties broken by lowest relay id.
pub fn select_relays_pi<T: Scalar>(
    relays: &RelaySet<T>,
    bs: Position<T>,
    mt: Position<T>,
    r: usize,
) -> Result<SelectionResult<T>> {
    if r > relays.len() {
        return Err(SimError::Config(format!(
            "requested {r} relays from a set of {}",
            relays.len()
        )));
    }
    let mut ranked: Vec<(T, u32)> = relays
        .iter()
        .map(|&(id, pos)| (distance_relay_to_mt(bs, pos, mt), id))
        .collect();
    ranked.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
    ranked.truncate(r);
    Ok(SelectionResult {
        relay_ids: ranked.iter().map(|&(_, id)| id).collect(),
        distances_to_mt: ranked.iter().map(|&(d, _)| d).collect(),
    })
}

/// Random selection baseline: `r` distinct relays drawn uniformly without
/// replacement, deterministic for a given seed.
pub fn select_relays_random<T: Scalar>(
    relays: &RelaySet<T>,
    bs: Position<T>,
    mt: Position<T>,
    r: usize,
    rng_seed: u64,
) -> Result<SelectionResult<T>> {
    if r > relays.len() {
        return Err(SimError::Config(format!(
            "requested {r} relays from a set of {}",
            relays.len()
        )));
    }
    let mut rng = derive_rng(rng_seed, Stream::Selection, 0, 0);
    let mut indices: Vec<usize> = (0..relays.len()).collect();
    // Partial Fisher-Yates: the first r slots end up uniform w/o replacement.
    for i in 0..r {
        let j = rng.gen_range(i..indices.len());
        indices.swap(i, j);
    }
    let picked: Vec<(u32, Position<T>)> = indices[..r]
        .iter()
        .map(|&i| *relays.relays.get(i).expect("index in range"))
        .collect();
    Ok(SelectionResult {
        relay_ids: picked.iter().map(|&(id, _)| id).collect(),
        distances_to_mt: picked
            .iter()
            .map(|&(_, pos)| distance_relay_to_mt(bs, pos, mt))
            .collect(),
    })
}

/// Draws the relay population and the terminal trajectory for one scenario.
///
/// Relays are uniform over the cell disc (rejection sampling), re-drawn if
/// they land inside the tunnel bore. Trajectory samples run along the x-axis
/// every `step` meters, endpoints inclusive.
pub fn sample_trajectory<T: Scalar>(
    layout: &CellLayout<T>,
    rng_seed: u64,
) -> Result<(RelaySet<T>, Trajectory<T>)> {
    layout.validate()?;
    let mut rng = derive_rng(rng_seed, Stream::Placement, 0, 0);
    let center = layout.bs_position();
    let radius = layout.cell_diameter * T::lit(0.5);
    let tunnel_end = layout.tunnel_start + layout.tunnel_length;
    let half_width = T::lit(TUNNEL_HALF_WIDTH_M);

    let mut relays = Vec::with_capacity(layout.n_relays);
    for id in 0..layout.n_relays {
        let pos = loop {
            let x = (T::lit(2.0) * T::unit_uniform(&mut rng) - T::one()) * radius;
            let y = (T::lit(2.0) * T::unit_uniform(&mut rng) - T::one()) * radius;
            if x * x + y * y > radius * radius {
                continue;
            }
            let p = Position::new(center.x + x, center.y + y);
            let in_bore = p.x >= layout.tunnel_start
                && p.x <= tunnel_end
                && p.y.abs() <= half_width;
            if !in_bore {
                break p;
            }
        };
        relays.push((id as u32, pos));
    }

    let n_steps = (layout.trajectory_length / layout.step)
        .floor()
        .to_f64_lossy() as usize;
    let samples = (0..=n_steps)
        .map(|i| Position::new(layout.step * T::lit(i as f64), T::zero()))
        .collect();

    Ok((
        RelaySet::new(relays),
        Trajectory {
            length: layout.trajectory_length,
            step: layout.step,
            tunnel_start: layout.tunnel_start,
            tunnel_length: layout.tunnel_length,
            samples,
        },
    ))
}
