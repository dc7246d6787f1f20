//! Davenport interval counts: exact on axis-parallel lines of the fiber,
//! sampled on coordinate projections and on rotated lines.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::Result;
use crate::rat::Rat;
use crate::semialg::{FamilySpec, Fiber, LineRestriction};
use crate::volume::{self, index_sets, projection_line_states, random_frame, View};

/// Dyadic lines per axis always examined, independent of the seed.
pub const GRID_LINES: usize = 32;
const OFFSET_BITS: u32 = 16;

/// Exact number of maximal intervals on which the restricted formula holds.
pub fn intervals_on_line(r: &LineRestriction) -> Result<usize> {
    r.intervals_on_line()
}

#[derive(Clone, Debug, PartialEq)]
pub struct DavenportOptions {
    /// Random rational lines per axis on the fiber, on top of the grid.
    pub lines_per_axis: usize,
    /// Random lines per (projection, axis) pair.
    pub projection_lines: usize,
    /// Cells per projection line are `2^line_resolution`, refined once.
    pub line_resolution: u32,
    pub inner_resolution: u32,
    pub seed: u64,
}

impl Default for DavenportOptions {
    fn default() -> Self {
        Self {
            lines_per_axis: 256,
            projection_lines: 16,
            line_resolution: 8,
            inner_resolution: 8,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DavenportEstimate {
    /// Largest exact interval count on the sampled fiber lines.
    pub h_full: usize,
    /// Largest sampled count per (zero-based index set, axis); approximate.
    pub h_proj: BTreeMap<(Vec<usize>, usize), usize>,
    pub h_overall: usize,
    pub lines_sampled: usize,
    pub seed: u64,
}

/// Offsets in `[-1, 1]` as numerators over `2^OFFSET_BITS`: the dyadic grid
/// first, then `random` seeded draws.
fn offsets(dims: usize, random: usize, seed: u64, stream: u64) -> Vec<Vec<i64>> {
    let one = 1i64 << OFFSET_BITS;
    let mut out: Vec<Vec<i64>> = (0..GRID_LINES as i64)
        .map(|k| {
            (0..dims as i64)
                .map(|i| {
                    let idx = (k * (2 * i + 1) + i) % GRID_LINES as i64;
                    (2 * idx + 1 - GRID_LINES as i64) * one / GRID_LINES as i64
                })
                .collect()
        })
        .collect();
    if dims == 0 {
        out.truncate(1);
        return out;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    out.extend((0..random).map(|_| (0..dims).map(|_| rng.random_range(-one..=one)).collect()));
    out
}

/// Exact counts on axis-parallel lines of one fiber.
pub fn fiber_line_counts(fiber: &Fiber, lines_per_axis: usize, seed: u64) -> Result<(usize, usize)> {
    let n = fiber.dim();
    let r = fiber.radius().clone();
    let den = Rat::from_integer(BigInt::from(1i64 << OFFSET_BITS));
    let mut best = 0;
    let mut lines = 0;
    for axis in 0..n {
        let offs = offsets(n - 1, lines_per_axis, seed, axis as u64);
        lines += offs.len();
        let counts = offs
            .par_iter()
            .map(|o| {
                let fixed: Vec<Rat> = o.iter().map(|&v| Rat::from_integer(v.into()) / &den * &r).collect();
                intervals_on_line(&fiber.restrict_to_axis_line(axis, &fixed))
            })
            .collect::<Result<Vec<_>>>()?;
        best = best.max(counts.into_iter().max().unwrap_or(0));
    }
    Ok((best, lines))
}

fn runs(states: &[bool]) -> usize {
    let mut count = 0;
    let mut prev = false;
    for &s in states {
        if s && !prev {
            count += 1;
        }
        prev = s;
    }
    count
}

/// Sampled run count on lines of the projection to `inside` along `axis`.
fn projection_count(view: &View, inside: &[usize], axis: usize, opts: &DavenportOptions, stream: u64) -> usize {
    let others: Vec<usize> = inside.iter().copied().filter(|&i| i != axis).collect();
    let offs = offsets(others.len(), opts.projection_lines, opts.seed, stream);
    let scale = (1i64 << OFFSET_BITS) as f64;
    offs.par_iter()
        .map(|o| {
            let mut u = vec![0i64; view.dim()];
            for (&i, &v) in others.iter().zip(o) {
                u[i] = volume::numerator(v as f64 / scale);
            }
            let fine = projection_line_states(
                view,
                inside,
                axis,
                &u,
                opts.line_resolution + 1,
                opts.inner_resolution,
            );
            runs(&fine)
        })
        .max()
        .unwrap_or(0)
}

/// Sampled Davenport constant of `Z_T`: exact on fiber lines, approximate on
/// projections.
pub fn estimate_h(f: &FamilySpec, t: &[Rat], opts: &DavenportOptions) -> Result<DavenportEstimate> {
    f.fiber_box(t)?;
    let fiber = f.fiber(t)?;
    let n = fiber.dim();
    let (h_full, mut lines_sampled) = fiber_line_counts(&fiber, opts.lines_per_axis, opts.seed)?;
    let view = View::of_fiber(fiber);
    let mut h_proj = BTreeMap::new();
    let mut stream = n as u64;
    for j in 1..n {
        for set in index_sets(n, j) {
            for &axis in &set {
                let c = projection_count(&view, &set, axis, opts, stream);
                lines_sampled += if j == 1 { 1 } else { GRID_LINES + opts.projection_lines };
                stream += 1;
                h_proj.insert((set.clone(), axis), c);
            }
        }
    }
    let h_overall = h_proj.values().copied().fold(h_full, usize::max);
    Ok(DavenportEstimate {
        h_full,
        h_proj,
        h_overall,
        lines_sampled,
        seed: opts.seed,
    })
}

/// Largest exact interval count on lines parallel to the axes of
/// `rotations` random frames (`lines` random lines per frame axis).
pub fn rotated_line_count(f: &FamilySpec, t: &[Rat], rotations: usize, lines: usize, seed: u64) -> Result<usize> {
    let fiber = f.fiber(t)?;
    let n = fiber.dim();
    let r = fiber.radius().clone();
    let den = Rat::from_integer(BigInt::from(1i64 << OFFSET_BITS));
    // A rotated line through the box meets it within sqrt(n) R of the origin.
    let reach = &r * Rat::from_integer(BigInt::from(((n as f64).sqrt().ceil()) as i64));
    let counts = (0..rotations as u64)
        .into_par_iter()
        .map(|k| {
            let q = random_frame(n, seed, k);
            let mut best = 0;
            for axis in 0..n {
                let offs = offsets(n - 1, lines, seed ^ 0x726f_7461_7465, k * n as u64 + axis as u64);
                for o in offs.iter().skip(GRID_LINES) {
                    let mut y = Vec::with_capacity(n);
                    let mut it = o.iter();
                    for i in 0..n {
                        y.push(if i == axis {
                            Rat::from_integer(0.into())
                        } else {
                            Rat::from_integer((*it.next().expect("offset")).into()) / &den * &reach
                        });
                    }
                    let a = q.mul_vec(&y);
                    let d = q.col(axis);
                    best = best.max(intervals_on_line(&fiber.restrict_to_line(&a, &d))?);
                }
            }
            Ok(best)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(counts.into_iter().max().unwrap_or(0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::rat::{int, rat};
    use crate::semialg::parse_family;

    fn small() -> DavenportOptions {
        DavenportOptions {
            lines_per_axis: 32,
            projection_lines: 4,
            ..Default::default()
        }
    }

    #[test]
    fn disk_is_one() {
        let e = estimate_h(&catalog::ball(2), &[int(3)], &small()).unwrap();
        assert_eq!((e.h_full, e.h_overall), (1, 1));
        assert_eq!(e.h_proj.len(), 2);
    }

    #[test]
    fn annulus_lines_through_the_hole() {
        let f = catalog::lookup("annulus2d").unwrap().family;
        let e = estimate_h(&f, &[int(4)], &small()).unwrap();
        assert_eq!(e.h_full, 2);
        assert_eq!(e.h_overall, 2);
    }

    #[test]
    fn weil_height_is_one() {
        let e = estimate_h(&catalog::weil_height(2), &[int(4)], &small()).unwrap();
        assert_eq!(e.h_overall, 1);
    }

    #[test]
    fn line_counts_by_hand() {
        let f = parse_family("params m=1\nvars n=2\nbound R = 3\nformula (x1^2-1)*(x1^2-4) <= 0\n").unwrap();
        let r = f.restrict_to_axis_line(&[int(0)], 0, &[int(0)]).unwrap();
        assert_eq!(intervals_on_line(&r).unwrap(), 2);
        let w = catalog::weil_height(2);
        let r = w.restrict_to_axis_line(&[int(2)], 0, &[rat(1, 2)]).unwrap();
        assert_eq!(intervals_on_line(&r).unwrap(), 1);
    }

    #[test]
    fn rotated_lines_on_convex_sets() {
        assert_eq!(rotated_line_count(&catalog::ball(2), &[int(2)], 4, 8, 1).unwrap(), 1);
        let f = catalog::lookup("annulus2d").unwrap().family;
        assert!(rotated_line_count(&f, &[int(2)], 4, 16, 1).unwrap() <= 2);
    }
}
