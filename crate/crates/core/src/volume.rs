//! Volume estimates: fibers, coordinate projections, the sums `V_j`, and
//! projections onto sampled rotated subspaces.
//!
//! Everything is computed on a [`View`], the set `{y : M y in Z_T}` for an
//! invertible rational `M`, inside a box `|y_i| <= r_i`. Points are addressed
//! by integer numerators `u` with `y_i = r_i u_i / 2^20`, so membership is
//! decided exactly; floating point interval bounds only prune.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::interval::{linear_image, Interval, Tri};
use crate::matrix::Matrix;
use crate::rat::{common_denominator, from_f64, to_f64, Rat};
use crate::semialg::{Bound, FamilySpec, Fiber, LineRestriction};

const FINE_BITS: u32 = 20;
const FINE: i64 = 1 << FINE_BITS;
/// Monte Carlo samples drawn from one random substream.
const BLOCK: u64 = 4096;
/// Bits kept when rounding view box half-widths and frame entries.
const HALF_BITS: u32 = 16;
pub const FRAME_BITS: u32 = 20;

/// Volume `B_j` of the unit ball in `R^j`, via `B_j = 2 pi B_{j-2} / j`.
pub fn unit_ball_volume(j: usize) -> f64 {
    let (mut even, mut odd) = (1.0f64, 2.0f64);
    for k in 2..=j {
        let b = 2.0 * std::f64::consts::PI / k as f64;
        if k % 2 == 0 {
            even *= b;
        } else {
            odd *= b;
        }
    }
    if j.is_multiple_of(2) {
        even
    } else {
        odd
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Grid,
    MonteCarlo,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Grid => "grid",
            Method::MonteCarlo => "mc",
        })
    }
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "grid" => Ok(Method::Grid),
            "mc" | "montecarlo" => Ok(Method::MonteCarlo),
            _ => Err(Error::InvalidInput(format!("unknown method '{s}' (grid or mc)"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct VolumeOptions {
    pub method: Method,
    /// Monte Carlo sample count.
    pub samples: u64,
    /// Grid cells per axis are `2^resolution`, lowered if needed to respect
    /// `max_evaluations`.
    pub resolution: u32,
    /// Grid depth for the existential search over complement coordinates.
    pub inner_resolution: u32,
    /// Cap on grid cells or samples per estimate.
    pub max_evaluations: u64,
    pub seed: u64,
}

impl Default for VolumeOptions {
    fn default() -> Self {
        Self {
            method: Method::Grid,
            samples: 1_000_000,
            resolution: 10,
            inner_resolution: 8,
            max_evaluations: 1 << 24,
            seed: 0,
        }
    }
}

/// A value with a symmetric error bar.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

impl Estimate {
    pub fn exact(value: f64) -> Self {
        Self { value, error: 0.0 }
    }

    pub fn lower(&self) -> f64 {
        (self.value - self.error).max(0.0)
    }

    pub fn upper(&self) -> f64 {
        self.value + self.error
    }

    pub fn scale(self, c: f64) -> Self {
        Self {
            value: self.value * c,
            error: self.error * c.abs(),
        }
    }
}

impl std::ops::Add for Estimate {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self {
            value: self.value + o.value,
            error: self.error + o.error,
        }
    }
}

/// A full-dimensional volume estimate; grid estimates also carry the
/// certified inner and outer cell masses.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VolumeEstimate {
    pub estimate: Estimate,
    pub inner: Option<f64>,
    pub outer: Option<f64>,
}

/// The set `{y : M y in Z_T}` in the box `|y_i| <= r_i`.
#[derive(Clone, Debug)]
pub struct View {
    exact: Fiber,
    reduced: Fiber,
    n: usize,
    half: Vec<Rat>,
    half_f64: Vec<f64>,
    /// `x = s u / 2^20`.
    s: Vec<Vec<Rat>>,
    s_f64: Vec<Vec<f64>>,
    s_int: Vec<Vec<BigInt>>,
    s_small: Option<Vec<Vec<i128>>>,
    s_den: BigInt,
}

fn dyadic_ceil(x: &Rat, bits: u32) -> Rat {
    let scale = Rat::from_integer(BigInt::from(1u64 << bits));
    Rat::new((x * &scale).ceil().to_integer(), BigInt::from(1u64 << bits))
}

impl View {
    /// The fiber itself in its declared box.
    pub fn of_fiber(fiber: Fiber) -> Self {
        let n = fiber.dim();
        let half = vec![fiber.radius().clone(); n];
        Self::build(fiber, &Matrix::identity(n), half)
    }

    /// `{y : m y in Z_T}`.
    pub fn linear(fiber: Fiber, m: &Matrix) -> Result<Self> {
        let n = fiber.dim();
        Error::check_dim(n, m.rows())?;
        let minv = m
            .inverse()
            .ok_or_else(|| Error::InvalidInput("view transform is singular".into()))?;
        let r = fiber.radius().clone();
        let half = (0..n)
            .map(|i| {
                let row: Rat = minv.row(i).iter().map(|v| v.abs()).sum();
                dyadic_ceil(&(row * &r), HALF_BITS)
            })
            .collect();
        Ok(Self::build(fiber, m, half))
    }

    fn build(fiber: Fiber, m: &Matrix, half: Vec<Rat>) -> Self {
        let n = fiber.dim();
        let fine = Rat::from_integer(BigInt::from(FINE));
        let s: Vec<Vec<Rat>> = (0..n)
            .map(|i| (0..n).map(|k| &m[(i, k)] * &half[k] / &fine).collect())
            .collect();
        let s_den = common_denominator(s.iter().flatten());
        let den_r = Rat::from_integer(s_den.clone());
        let s_int: Vec<Vec<BigInt>> = s
            .iter()
            .map(|row| row.iter().map(|v| (v * &den_r).to_integer()).collect())
            .collect();
        let s_small = s_int
            .iter()
            .map(|row| row.iter().map(|v| v.to_i128().filter(|x| x.abs() < 1 << 90)).collect())
            .collect();
        Self {
            reduced: fiber.without_equalities(),
            exact: fiber,
            n,
            half_f64: half.iter().map(to_f64).collect(),
            half,
            s_f64: s.iter().map(|row| row.iter().map(to_f64).collect()).collect(),
            s,
            s_int,
            s_small,
            s_den,
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn half_widths(&self) -> &[Rat] {
        &self.half
    }

    /// Volume of the box projected to the coordinates `idx`.
    pub fn box_volume(&self, idx: &[usize]) -> f64 {
        idx.iter().map(|&i| 2.0 * self.half_f64[i]).product()
    }

    fn fiber(&self, reduced: bool) -> &Fiber {
        if reduced {
            &self.reduced
        } else {
            &self.exact
        }
    }

    /// Interval truth over a box given in numerator units.
    fn tri(&self, reduced: bool, ubox: &[Interval]) -> Tri {
        let xs = linear_image(&self.s_f64, ubox);
        self.fiber(reduced).tri_on_box(&xs)
    }

    /// Exact membership of the point with numerators `u`.
    pub fn contains(&self, reduced: bool, u: &[i64]) -> bool {
        let pts: Vec<Interval> = u.iter().map(|&v| Interval::point(v as f64)).collect();
        match self.tri(reduced, &pts) {
            Tri::True => return true,
            Tri::False => return false,
            Tri::Unknown => {}
        }
        let fiber = self.fiber(reduced);
        if let Some(small) = &self.s_small {
            let nums: Option<Vec<i64>> = small
                .iter()
                .map(|row| {
                    row.iter()
                        .zip(u)
                        .try_fold(0i128, |acc, (&a, &b)| acc.checked_add(a.checked_mul(b as i128)?))
                        .and_then(|v| i64::try_from(v).ok())
                })
                .collect();
            if let (Some(nums), Some(den)) = (nums, self.s_den.to_i64()) {
                return fiber.contains_scaled(&nums, den);
            }
        }
        let nums: Vec<BigInt> = self
            .s_int
            .iter()
            .map(|row| row.iter().zip(u).map(|(a, &b)| a * BigInt::from(b)).sum())
            .collect();
        fiber.contains_scaled_big(&nums, &self.s_den)
    }

    /// Restriction to the line through `u` along coordinate `axis`, with
    /// the line parameter in numerator units.
    fn line(&self, u: &[i64], axis: usize) -> LineRestriction {
        let a: Vec<Rat> = self
            .s
            .iter()
            .map(|row| {
                row.iter()
                    .zip(u)
                    .enumerate()
                    .filter(|(k, _)| *k != axis)
                    .map(|(_, (c, &v))| c * Rat::from_integer(BigInt::from(v)))
                    .sum()
            })
            .collect();
        let d: Vec<Rat> = self.s.iter().map(|row| row[axis].clone()).collect();
        self.exact.restrict_to_line(&a, &d)
    }
}

fn point_box(u: &[i64]) -> Vec<Interval> {
    u.iter().map(|&v| Interval::point(v as f64)).collect()
}

fn full() -> Interval {
    Interval::new(-(FINE as f64), FINE as f64)
}

/// Decides `exists z : (y, z) in S` for points `y` on a coordinate subspace.
struct Searcher<'a> {
    view: &'a View,
    comp: Vec<usize>,
    inner_bits: u32,
    witness: Option<Vec<i64>>,
}

impl<'a> Searcher<'a> {
    fn new(view: &'a View, inside: &[usize], inner_bits: u32) -> Self {
        let comp = (0..view.n).filter(|i| !inside.contains(i)).collect();
        Self {
            view,
            comp,
            inner_bits: inner_bits.min(FINE_BITS - 2),
            witness: None,
        }
    }

    /// `u` holds the subspace coordinates; complement entries are scratch.
    fn exists(&mut self, u: &mut [i64]) -> bool {
        let mut b = point_box(u);
        for &c in &self.comp {
            b[c] = full();
        }
        match self.view.tri(false, &b) {
            Tri::False => return false,
            Tri::True => return true,
            Tri::Unknown => {}
        }
        if let Some(w) = self.witness.clone() {
            for &c in &self.comp {
                u[c] = w[c];
            }
            if self.view.contains(false, u) {
                return true;
            }
        }
        for &c in &self.comp {
            u[c] = 0;
        }
        if self.view.contains(false, u) {
            self.witness = Some(u.to_vec());
            return true;
        }
        if self.comp.len() == 1 {
            return self.line_test(u);
        }
        let k = self.comp.len() - 1;
        let lo = vec![-FINE; k];
        let hi = vec![FINE; k];
        self.search(u, &lo, &hi, self.inner_bits) || self.search(u, &lo, &hi, self.inner_bits + 1)
    }

    /// Depth-first search over the grid complement coordinates; the last
    /// complement coordinate is handled exactly along lines through grid
    /// vertices.
    fn search(&mut self, u: &mut [i64], lo: &[i64], hi: &[i64], depth: u32) -> bool {
        let k = lo.len();
        let mut b = point_box(u);
        for i in 0..k {
            b[self.comp[i]] = Interval::new(lo[i] as f64, hi[i] as f64);
        }
        b[self.comp[k]] = full();
        match self.view.tri(false, &b) {
            Tri::False => return false,
            Tri::True => {
                for i in 0..k {
                    u[self.comp[i]] = (lo[i] + hi[i]) / 2;
                }
                u[self.comp[k]] = 0;
                if self.view.contains(false, u) {
                    self.witness = Some(u.to_vec());
                }
                return true;
            }
            Tri::Unknown => {}
        }
        if depth == 0 {
            for corner in 0..1u32 << k {
                for i in 0..k {
                    u[self.comp[i]] = if corner & (1 << i) != 0 { hi[i] } else { lo[i] };
                }
                if self.line_test(u) {
                    return true;
                }
            }
            return false;
        }
        for child in 0..1u32 << k {
            let mut clo = lo.to_vec();
            let mut chi = hi.to_vec();
            for i in 0..k {
                let mid = (lo[i] + hi[i]) / 2;
                if child & (1 << i) != 0 {
                    clo[i] = mid;
                } else {
                    chi[i] = mid;
                }
            }
            if self.search(u, &clo, &chi, depth - 1) {
                return true;
            }
        }
        false
    }

    /// Bisection of the last complement coordinate with interval bounds;
    /// `None` when some piece stays undecided at the finest level.
    fn interval_line_search(&mut self, u: &mut [i64], axis: usize) -> Option<bool> {
        const DEPTH: u32 = 12;
        let mut b = point_box(u);
        let mut stack = vec![(-FINE, FINE, 0u32)];
        let mut undecided = false;
        while let Some((lo, hi, depth)) = stack.pop() {
            b[axis] = Interval::new(lo as f64, hi as f64);
            match self.view.tri(false, &b) {
                Tri::False => {}
                Tri::True => {
                    u[axis] = (lo + hi) / 2;
                    if self.view.contains(false, u) {
                        self.witness = Some(u.to_vec());
                    }
                    return Some(true);
                }
                Tri::Unknown if depth < DEPTH => {
                    let mid = (lo + hi) / 2;
                    stack.push((mid, hi, depth + 1));
                    stack.push((lo, mid, depth + 1));
                }
                Tri::Unknown => undecided = true,
            }
        }
        if undecided {
            None
        } else {
            Some(false)
        }
    }

    /// Exact test along the last complement coordinate.
    fn line_test(&mut self, u: &mut [i64]) -> bool {
        let axis = *self.comp.last().expect("nonempty complement");
        if let Some(found) = self.interval_line_search(u, axis) {
            return found;
        }
        let restriction = self.view.line(u, axis);
        let mut truth = restriction.truth_set();
        let (a, b) = (Rat::from_integer((-FINE).into()), Rat::from_integer(FINE.into()));
        if !truth.intersects(&a, &b) {
            return false;
        }
        // Remember a nearby grid point of the set to speed up later queries.
        let approx = |bound: Bound, default: f64| match bound {
            Bound::Infinite => default,
            Bound::Root { index, .. } => truth.roots()[index].approx(),
        };
        for (l, r) in truth.runs() {
            let lo = approx(l, f64::NEG_INFINITY).max(-(FINE as f64));
            let hi = approx(r, f64::INFINITY).min(FINE as f64);
            if lo > hi {
                continue;
            }
            u[axis] = (0.5 * (lo + hi)).round() as i64;
            if self.view.contains(false, u) {
                self.witness = Some(u.to_vec());
                break;
            }
        }
        true
    }
}

/// Grid over the coordinates `inside`: returns the in/out state of every
/// cell, indexed with the first coordinate varying slowest.
fn grid_states(view: &View, inside: &[usize], bits: u32, inner_bits: u32) -> Vec<bool> {
    let j = inside.len();
    let n_cells = 1usize << bits;
    // Split the top of the hierarchy into independent blocks.
    let split_bits = bits.min(if j == 1 { 6 } else { 3 });
    let blocks_per_axis = 1usize << split_bits;
    let block_size = n_cells >> split_bits;
    let total_blocks = blocks_per_axis.pow(j as u32);
    let results: Vec<Vec<bool>> = (0..total_blocks)
        .into_par_iter()
        .map(|b| {
            let mut lo = vec![0usize; j];
            let mut rem = b;
            for axis in (0..j).rev() {
                lo[axis] = (rem % blocks_per_axis) * block_size;
                rem /= blocks_per_axis;
            }
            let mut local = vec![false; block_size.pow(j as u32)];
            let mut searcher = Searcher::new(view, inside, inner_bits);
            let mut u = vec![0i64; view.n];
            grid_block(view, inside, bits, &lo, block_size, &lo, block_size, &mut local, &mut searcher, &mut u);
            local
        })
        .collect();
    let mut states = vec![false; n_cells.pow(j as u32)];
    for (b, local) in results.into_iter().enumerate() {
        let mut origin = vec![0usize; j];
        let mut rem = b;
        for axis in (0..j).rev() {
            origin[axis] = (rem % blocks_per_axis) * block_size;
            rem /= blocks_per_axis;
        }
        for (li, &v) in local.iter().enumerate() {
            if !v {
                continue;
            }
            let mut rem = li;
            let mut gi = 0usize;
            let mut idx = vec![0usize; j];
            for axis in (0..j).rev() {
                idx[axis] = rem % block_size;
                rem /= block_size;
            }
            for axis in 0..j {
                gi = gi * n_cells + origin[axis] + idx[axis];
            }
            states[gi] = true;
        }
    }
    states
}

fn cell_lo(k: usize, bits: u32) -> i64 {
    -FINE + ((k as i64) << (FINE_BITS + 1 - bits))
}

#[allow(clippy::too_many_arguments)]
fn grid_block(
    view: &View,
    inside: &[usize],
    bits: u32,
    lo: &[usize],
    size: usize,
    origin: &[usize],
    block_size: usize,
    local: &mut [bool],
    searcher: &mut Searcher,
    u: &mut [i64],
) {
    let j = inside.len();
    let mut b = vec![full(); view.n];
    for (a, &i) in inside.iter().enumerate() {
        b[i] = Interval::new(cell_lo(lo[a], bits) as f64, cell_lo(lo[a] + size, bits) as f64);
    }
    let fill = |local: &mut [bool], value: bool| {
        for_each_cell(j, size, |off| {
            let mut li = 0usize;
            for a in 0..j {
                li = li * block_size + (lo[a] - origin[a]) + off[a];
            }
            local[li] = value;
        });
    };
    match view.tri(false, &b) {
        Tri::False => return,
        Tri::True => {
            fill(local, true);
            return;
        }
        Tri::Unknown => {}
    }
    if size == 1 {
        for (a, &i) in inside.iter().enumerate() {
            u[i] = cell_lo(lo[a], bits) + (1 << (FINE_BITS - bits));
        }
        if searcher.exists(u) {
            fill(local, true);
        }
        return;
    }
    let half = size / 2;
    for child in 0..1usize << j {
        let clo: Vec<usize> = (0..j)
            .map(|a| lo[a] + if child & (1 << (j - 1 - a)) != 0 { half } else { 0 })
            .collect();
        grid_block(view, inside, bits, &clo, half, origin, block_size, local, searcher, u);
    }
}

fn for_each_cell(j: usize, size: usize, mut f: impl FnMut(&[usize])) {
    let mut off = vec![0usize; j];
    loop {
        f(&off);
        let mut a = j;
        loop {
            if a == 0 {
                return;
            }
            a -= 1;
            off[a] += 1;
            if off[a] < size {
                break;
            }
            off[a] = 0;
        }
    }
}

/// Cells that are in with an out neighbour or on the border, plus out cells
/// with an in neighbour.
fn boundary_cells(states: &[bool], j: usize, n_cells: usize) -> u64 {
    let mut count = 0u64;
    let mut strides = vec![1usize; j];
    for a in (0..j.saturating_sub(1)).rev() {
        strides[a] = strides[a + 1] * n_cells;
    }
    for (i, &s) in states.iter().enumerate() {
        let mut boundary = false;
        for a in 0..j {
            let coord = (i / strides[a]) % n_cells;
            for (ok, ni) in [
                (coord > 0, i.wrapping_sub(strides[a])),
                (coord + 1 < n_cells, i + strides[a]),
            ] {
                if ok {
                    boundary |= states[ni] != s;
                } else {
                    boundary |= s;
                }
            }
        }
        if boundary {
            count += 1;
        }
    }
    count
}

fn grid_bits(opts: &VolumeOptions, dims: usize) -> Result<u32> {
    let cap_bits = 63 - opts.max_evaluations.max(1).leading_zeros();
    let bits = opts.resolution.min(cap_bits / dims as u32).min(16);
    if bits == 0 {
        return Err(Error::BudgetExceeded {
            candidates: 1u128 << (opts.resolution.min(64) as u128 * dims as u128).min(127),
            cap: opts.max_evaluations as u128,
        });
    }
    Ok(bits)
}

fn check_samples(opts: &VolumeOptions) -> Result<()> {
    if opts.samples > opts.max_evaluations {
        return Err(Error::BudgetExceeded {
            candidates: opts.samples as u128,
            cap: opts.max_evaluations as u128,
        });
    }
    if opts.samples == 0 {
        return Err(Error::InvalidInput("sample count must be positive".into()));
    }
    Ok(())
}

fn mc_hits(opts: &VolumeOptions, hit: impl Fn(&mut ChaCha8Rng) -> bool + Sync) -> u64 {
    let blocks = opts.samples.div_ceil(BLOCK);
    (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            rng.set_stream(b);
            let count = BLOCK.min(opts.samples - b * BLOCK);
            (0..count).filter(|_| hit(&mut rng)).count() as u64
        })
        .sum()
}

fn random_numerator(rng: &mut ChaCha8Rng) -> i64 {
    2 * rng.random_range(0..FINE) + 1 - FINE
}

fn mc_estimate(hits: u64, samples: u64, box_volume: f64) -> Estimate {
    let p = hits as f64 / samples as f64;
    Estimate {
        value: p * box_volume,
        error: 3.0 * (p * (1.0 - p) / samples as f64).sqrt() * box_volume,
    }
}

/// Volume of the whole view.
pub fn view_volume(view: &View, opts: &VolumeOptions) -> Result<VolumeEstimate> {
    let n = view.n;
    let all: Vec<usize> = (0..n).collect();
    let box_volume = view.box_volume(&all);
    match opts.method {
        Method::MonteCarlo => {
            check_samples(opts)?;
            let hits = mc_hits(opts, |rng| {
                let u: Vec<i64> = (0..n).map(|_| random_numerator(rng)).collect();
                view.contains(true, &u)
            });
            Ok(VolumeEstimate {
                estimate: mc_estimate(hits, opts.samples, box_volume),
                inner: None,
                outer: None,
            })
        }
        Method::Grid => {
            let bits = grid_bits(opts, n)?;
            let (inner, center, outer) = grid_volume_counts(view, bits);
            let cell = box_volume / (1u64 << (bits as usize * n)) as f64;
            let value = center as f64 * cell;
            let error = ((center - inner).max(outer - center)) as f64 * cell;
            Ok(VolumeEstimate {
                estimate: Estimate { value, error },
                inner: Some(inner as f64 * cell),
                outer: Some(outer as f64 * cell),
            })
        }
    }
}

/// `(inner, center, outer)` cell counts over the full grid.
fn grid_volume_counts(view: &View, bits: u32) -> (u64, u64, u64) {
    let n = view.n;
    let split_bits = bits.min(if n == 1 { 6 } else { 3 });
    let blocks_per_axis = 1usize << split_bits;
    let block_size = (1usize << bits) >> split_bits;
    (0..blocks_per_axis.pow(n as u32))
        .into_par_iter()
        .map(|b| {
            let mut lo = vec![0usize; n];
            let mut rem = b;
            for axis in (0..n).rev() {
                lo[axis] = (rem % blocks_per_axis) * block_size;
                rem /= blocks_per_axis;
            }
            let mut u = vec![0i64; n];
            volume_block(view, bits, &lo, block_size, &mut u)
        })
        .reduce(|| (0, 0, 0), |a, b| (a.0 + b.0, a.1 + b.1, a.2 + b.2))
}

fn volume_block(view: &View, bits: u32, lo: &[usize], size: usize, u: &mut [i64]) -> (u64, u64, u64) {
    let n = view.n;
    let b: Vec<Interval> = (0..n)
        .map(|a| Interval::new(cell_lo(lo[a], bits) as f64, cell_lo(lo[a] + size, bits) as f64))
        .collect();
    let cells = (size as u64).pow(n as u32);
    match view.tri(true, &b) {
        Tri::False => return (0, 0, 0),
        Tri::True => return (cells, cells, cells),
        Tri::Unknown => {}
    }
    if size == 1 {
        for a in 0..n {
            u[a] = cell_lo(lo[a], bits) + (1 << (FINE_BITS - bits));
        }
        let c = view.contains(true, u) as u64;
        return (0, c, 1);
    }
    let half = size / 2;
    let mut acc = (0, 0, 0);
    for child in 0..1usize << n {
        let clo: Vec<usize> = (0..n)
            .map(|a| lo[a] + if child & (1 << (n - 1 - a)) != 0 { half } else { 0 })
            .collect();
        let r = volume_block(view, bits, &clo, half, u);
        acc = (acc.0 + r.0, acc.1 + r.1, acc.2 + r.2);
    }
    acc
}

/// Volume of the projection of the view to the coordinates `inside`
/// (zero-based, increasing), in the view's own coordinates.
pub fn view_projection(view: &View, inside: &[usize], opts: &VolumeOptions) -> Result<Estimate> {
    let n = view.n;
    let j = inside.len();
    if j == 0 || j >= n || inside.iter().any(|&i| i >= n) || inside.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidInput(format!(
            "projection index set must be a proper nonempty increasing subset of 0..{n}"
        )));
    }
    let box_volume = view.box_volume(inside);
    match opts.method {
        Method::MonteCarlo => {
            check_samples(opts)?;
            let hits = mc_hits(opts, |rng| {
                let mut searcher = Searcher::new(view, inside, opts.inner_resolution);
                let mut u = vec![0i64; n];
                for &i in inside {
                    u[i] = random_numerator(rng);
                }
                searcher.exists(&mut u)
            });
            Ok(mc_estimate(hits, opts.samples, box_volume))
        }
        Method::Grid => {
            let bits = grid_bits(opts, j)?;
            let n_cells = 1usize << bits;
            let states = grid_states(view, inside, bits, opts.inner_resolution);
            let inside_count = states.iter().filter(|&&s| s).count() as f64;
            let cell = box_volume / (n_cells as f64).powi(j as i32);
            let boundary = boundary_cells(&states, j, n_cells) as f64;
            Ok(Estimate {
                value: inside_count * cell,
                error: boundary * cell,
            })
        }
    }
}

/// Membership of the projection to `inside` at the `2^bits` cell centres of
/// the line along `axis` through `u` (numerators of the other coordinates of
/// `inside`; complement entries are ignored).
pub(crate) fn projection_line_states(
    view: &View,
    inside: &[usize],
    axis: usize,
    u: &[i64],
    bits: u32,
    inner_bits: u32,
) -> Vec<bool> {
    let mut searcher = Searcher::new(view, inside, inner_bits);
    let mut u = u.to_vec();
    (0..1usize << bits)
        .map(|k| {
            u[axis] = cell_lo(k, bits) + (1 << (FINE_BITS - bits));
            if inside.len() == view.n {
                view.contains(false, &u)
            } else {
                searcher.exists(&mut u)
            }
        })
        .collect()
}

/// Numerator of the unit coordinate `x` (in `[-1, 1]`), rounded.
pub(crate) fn numerator(x: f64) -> i64 {
    (x.clamp(-1.0, 1.0) * FINE as f64).round() as i64
}

/// `Vol(Z_T)`.
pub fn fiber_volume(f: &FamilySpec, t: &[Rat], opts: &VolumeOptions) -> Result<VolumeEstimate> {
    f.fiber_box(t)?;
    view_volume(&View::of_fiber(f.fiber(t)?), opts)
}

/// `Vol_j` of the projection of `Z_T` to the coordinate subspace spanned by
/// `e_i`, `i in inside` (zero-based).
pub fn projection_volume(f: &FamilySpec, t: &[Rat], inside: &[usize], opts: &VolumeOptions) -> Result<Estimate> {
    f.fiber_box(t)?;
    view_projection(&View::of_fiber(f.fiber(t)?), inside, opts)
}

/// All `j`-element subsets of `0..n` in lexicographic order.
pub fn index_sets(n: usize, j: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, j: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == j {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, j, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, j, &mut Vec::new(), &mut out);
    out
}

/// `V_j(Z_T)`: 1 for `j = 0`, otherwise the sum over all coordinate
/// projections of dimension `j`.
pub fn vj_sum(f: &FamilySpec, t: &[Rat], j: usize, opts: &VolumeOptions) -> Result<Estimate> {
    let n = f.num_vars();
    if j >= n {
        return Err(Error::InvalidInput(format!("V_j needs 0 <= j < n = {n}")));
    }
    if j == 0 {
        return Ok(Estimate::exact(1.0));
    }
    f.fiber_box(t)?;
    let view = View::of_fiber(f.fiber(t)?);
    let mut acc = Estimate::exact(0.0);
    for set in index_sets(n, j) {
        acc = acc + view_projection(&view, &set, opts)?;
    }
    Ok(acc)
}

#[derive(Clone, Debug, PartialEq)]
pub struct VolumeReport {
    pub total: VolumeEstimate,
    /// Projection volumes keyed by zero-based index sets.
    pub projections: BTreeMap<Vec<usize>, Estimate>,
    /// `V_0 .. V_{n-1}`.
    pub vj: Vec<Estimate>,
    pub method: Method,
    pub samples: u64,
    pub resolution: u32,
    pub seed: u64,
}

pub fn volume_report(f: &FamilySpec, t: &[Rat], opts: &VolumeOptions) -> Result<VolumeReport> {
    f.fiber_box(t)?;
    let view = View::of_fiber(f.fiber(t)?);
    let n = view.n;
    let total = view_volume(&view, opts)?;
    let mut projections = BTreeMap::new();
    let mut vj = vec![Estimate::exact(1.0)];
    for j in 1..n {
        let mut acc = Estimate::exact(0.0);
        for set in index_sets(n, j) {
            let e = view_projection(&view, &set, opts)?;
            acc = acc + e;
            projections.insert(set, e);
        }
        vj.push(acc);
    }
    Ok(VolumeReport {
        total,
        projections,
        vj,
        method: opts.method,
        samples: opts.samples,
        resolution: opts.resolution,
        seed: opts.seed,
    })
}

/// A random rotation: Gram-Schmidt on a Gaussian matrix, entries rounded
/// to multiples of `2^-FRAME_BITS`. Columns are the frame vectors.
pub fn random_frame(n: usize, seed: u64, index: u64) -> Matrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6672_616d_6573);
    rng.set_stream(index);
    let mut cols: Vec<Vec<f64>> = Vec::with_capacity(n);
    while cols.len() < n {
        let mut v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        for c in &cols {
            let d: f64 = v.iter().zip(c).map(|(a, b)| a * b).sum();
            for (x, y) in v.iter_mut().zip(c) {
                *x -= d * y;
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-6 {
            cols.push(v.into_iter().map(|x| x / norm).collect());
        }
    }
    let scale = (1u64 << FRAME_BITS) as f64;
    let rat_cols: Vec<Vec<Rat>> = cols
        .iter()
        .map(|c| {
            c.iter()
                .map(|&x| Rat::new(BigInt::from((x * scale).round() as i64), BigInt::from(1u64 << FRAME_BITS)))
                .collect()
        })
        .collect();
    Matrix::from_cols(&rat_cols)
}

/// `sqrt(det Gram)` of the first `j` columns.
pub fn gram_volume(m: &Matrix, cols: &[usize]) -> f64 {
    let vs: Vec<Vec<Rat>> = cols.iter().map(|&c| m.col(c)).collect();
    let g: Vec<Vec<Rat>> = vs
        .iter()
        .map(|a| vs.iter().map(|b| crate::matrix::dot(a, b)).collect())
        .collect();
    let det = Matrix::from_rows(g).det();
    to_f64(&det).max(0.0).sqrt()
}

#[derive(Clone, Debug, PartialEq)]
pub struct FrameSample {
    /// Projected `j`-volume in each sampled frame.
    pub values: Vec<Estimate>,
    /// The largest value, a lower estimate of `V'_j`.
    pub max: f64,
    pub seed: u64,
}

/// Largest projected `j`-volume over `rotations` random frames. The
/// rotation enters through the membership queries, not the polynomials.
pub fn vj_prime_sampled(
    f: &FamilySpec,
    t: &[Rat],
    j: usize,
    rotations: usize,
    opts: &VolumeOptions,
) -> Result<FrameSample> {
    let n = f.num_vars();
    if j == 0 || j >= n {
        return Err(Error::InvalidInput(format!("V'_j needs 1 <= j < n = {n}")));
    }
    f.fiber_box(t)?;
    let fiber = f.fiber(t)?;
    let inside: Vec<usize> = (0..j).collect();
    let values = (0..rotations as u64)
        .map(|k| {
            let q = random_frame(n, opts.seed, k);
            let view = View::linear(fiber.clone(), &q)?;
            Ok(view_projection(&view, &inside, opts)?.scale(gram_volume(&q, &inside)))
        })
        .collect::<Result<Vec<_>>>()?;
    let max = values.iter().map(|e| e.value).fold(0.0, f64::max);
    Ok(FrameSample {
        values,
        max,
        seed: opts.seed,
    })
}

/// Rational approximation used when a sample point must be exact.
pub fn exact_point(x: &[f64]) -> Vec<Rat> {
    x.iter().map(|&v| from_f64(v)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::rat::int;
    use crate::semialg::parse_family;
    use std::f64::consts::PI;

    fn opts(method: Method) -> VolumeOptions {
        VolumeOptions {
            method,
            samples: 200_000,
            ..Default::default()
        }
    }

    #[test]
    fn unit_ball_values() {
        assert_eq!(unit_ball_volume(0), 1.0);
        assert_eq!(unit_ball_volume(1), 2.0);
        assert!((unit_ball_volume(2) - PI).abs() < 1e-15);
        assert!((unit_ball_volume(3) - 4.0 * PI / 3.0).abs() < 1e-14);
        assert!((unit_ball_volume(4) - PI * PI / 2.0).abs() < 1e-14);
    }

    #[test]
    fn disk_area_grid_brackets_truth() {
        let f = catalog::ball(2);
        let v = fiber_volume(&f, &[int(2)], &opts(Method::Grid)).unwrap();
        let exact = 4.0 * PI;
        assert!(v.inner.unwrap() <= exact && exact <= v.outer.unwrap());
        assert!((v.estimate.value - exact).abs() <= v.estimate.error);
    }

    #[test]
    fn disk_area_monte_carlo() {
        let f = catalog::ball(2);
        let v = fiber_volume(&f, &[int(2)], &opts(Method::MonteCarlo)).unwrap();
        assert!((v.estimate.value - 4.0 * PI).abs() <= v.estimate.error);
    }

    #[test]
    fn empty_family_has_zero_volume() {
        let f = parse_family("params m=1\nvars n=2\nbound R = T1\nformula 1 <= 0\n").unwrap();
        for m in [Method::Grid, Method::MonteCarlo] {
            let v = fiber_volume(&f, &[int(2)], &opts(m)).unwrap();
            assert_eq!(v.estimate, Estimate::exact(0.0));
        }
    }

    #[test]
    fn disk_projections() {
        let f = catalog::ball(2);
        let p = projection_volume(&f, &[int(2)], &[0], &opts(Method::Grid)).unwrap();
        assert!((p.value - 4.0).abs() <= p.error + 1e-12, "{p:?}");
        let v1 = vj_sum(&f, &[int(2)], 1, &opts(Method::Grid)).unwrap();
        assert!((v1.value - 8.0).abs() <= v1.error + 1e-12);
        assert_eq!(vj_sum(&f, &[int(2)], 0, &opts(Method::Grid)).unwrap().value, 1.0);
    }

    #[test]
    fn sharpness_projection_and_null_volume() {
        let f = catalog::sharpness(&[int(1), int(1)]).unwrap();
        let p = projection_volume(&f, &[int(3)], &[0], &opts(Method::Grid)).unwrap();
        assert!((p.value - 3.0).abs() <= p.error + 1e-12, "{p:?}");
        let v = fiber_volume(&f, &[int(3)], &opts(Method::Grid)).unwrap();
        assert_eq!(v.estimate.value, 0.0);
        assert_eq!(v.outer, Some(0.0));
    }

    #[test]
    fn frames_are_nearly_orthogonal() {
        let q = random_frame(3, 5, 2);
        let qt = q.transpose().mul(&q).to_f64();
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((qt[i][j] - want).abs() < 1e-5);
            }
        }
    }

    #[test]
    fn rotated_disk_projection_is_its_diameter() {
        let f = catalog::ball(2);
        let s = vj_prime_sampled(&f, &[int(2)], 1, 8, &opts(Method::Grid)).unwrap();
        for e in &s.values {
            assert!((e.value - 4.0).abs() <= e.error + 1e-3, "{e:?}");
        }
    }
}
