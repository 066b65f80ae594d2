//! Deterministic quasi-Monte Carlo sampling of catalog domains.
//!
//! Proposals come from a digit-scrambled Halton sequence (bases 2, 3, 5, 7,
//! one per real coordinate) mapped into the bounding box, and are kept when
//! they pass the membership test. The seed only selects the digit
//! permutations, so a given `(domain, count, seed)` always produces the same
//! cloud regardless of how many threads do the work.

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domain::{ComplexPoint, DomainSpec};
use crate::error::{Error, Result};
use crate::linalg::C64;

const BASES: [u64; 4] = [2, 3, 5, 7];
const CHUNK: usize = 1 << 14;
/// Minimum number of proposals accepted by [`sample`].
pub const MIN_SAMPLES: usize = 1000;
/// Number of probe points used by the verification reports.
pub const PROBE_COUNT: usize = 16;

/// Halton radical inverse with an independent digit permutation per position.
#[derive(Debug, Clone)]
pub struct ScrambledHalton {
    base: u64,
    perms: Vec<Vec<u64>>,
}

impl ScrambledHalton {
    pub fn new(base: u64, rng: &mut ChaCha8Rng) -> Self {
        // enough digits to resolve below f64 precision
        let digits = (53.0 * std::f64::consts::LN_2 / (base as f64).ln()).ceil() as usize;
        let perms = (0..digits)
            .map(|_| {
                let mut p: Vec<u64> = (0..base).collect();
                p.shuffle(rng);
                p
            })
            .collect();
        ScrambledHalton { base, perms }
    }

    /// Unscrambled radical inverse (identity permutations).
    pub fn plain(base: u64) -> Self {
        let digits = (53.0 * std::f64::consts::LN_2 / (base as f64).ln()).ceil() as usize;
        ScrambledHalton { base, perms: vec![(0..base).collect(); digits] }
    }

    pub fn at(&self, mut index: u64) -> f64 {
        let inv = 1.0 / self.base as f64;
        let mut scale = inv;
        let mut x = 0.0;
        for perm in &self.perms {
            let digit = index % self.base;
            index /= self.base;
            x += perm[digit as usize] as f64 * scale;
            scale *= inv;
        }
        x
    }
}

/// Accepted sample points of a domain, stored flat.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleCloud {
    pub dimension: usize,
    coords: Vec<C64>,
    pub volume_estimate: f64,
    pub seed: u64,
    pub requested: usize,
    pub accepted: usize,
}

impl SampleCloud {
    pub fn len(&self) -> usize {
        self.accepted
    }

    pub fn is_empty(&self) -> bool {
        self.accepted == 0
    }

    pub fn point(&self, i: usize) -> &[C64] {
        &self.coords[i * self.dimension..(i + 1) * self.dimension]
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = &[C64]> + '_ {
        self.coords.chunks_exact(self.dimension)
    }

    /// The first `n` accepted points (all of them if there are fewer). The
    /// volume estimate and counts of the full run are kept.
    pub fn head(&self, n: usize) -> SampleCloud {
        let n = n.min(self.accepted);
        SampleCloud { coords: self.coords[..n * self.dimension].to_vec(), accepted: n, ..self.clone() }
    }

    /// Contiguous chunks of points, `chunk` points each (last may be short).
    pub(crate) fn point_chunks(&self, chunk: usize) -> impl IndexedParallelIterator<Item = &[C64]> + '_ {
        self.coords.par_chunks(chunk * self.dimension)
    }

    /// CSV with one row per point and columns `re_z1,im_z1,…`.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let header: Vec<String> = (1..=self.dimension)
            .flat_map(|j| [format!("re_z{j}"), format!("im_z{j}")])
            .collect();
        out.push_str(&header.join(","));
        out.push('\n');
        for p in self.points() {
            let row: Vec<String> = p.iter().flat_map(|z| [z.re.to_string(), z.im.to_string()]).collect();
            let _ = writeln!(out, "{}", row.join(","));
        }
        out
    }
}

fn generators(real_dims: usize, seed: u64) -> Vec<ScrambledHalton> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    BASES[..real_dims].iter().map(|&b| ScrambledHalton::new(b, &mut rng)).collect()
}

/// Draws `count` Halton proposals in the bounding box and keeps the members.
pub fn sample(spec: &DomainSpec, count: usize, seed: u64) -> Result<SampleCloud> {
    if count < MIN_SAMPLES {
        return Err(Error::TooFewSamples(count));
    }
    let n = spec.dimension();
    let gens = generators(2 * n, seed);
    let bbox = &spec.bounding_box;

    let chunks: Vec<Vec<C64>> = (0..count.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let start = c * CHUNK;
            let end = (start + CHUNK).min(count);
            let mut kept = Vec::new();
            let mut z = vec![C64::new(0.0, 0.0); n];
            for i in start..end {
                for (j, zj) in z.iter_mut().enumerate() {
                    let x = |d: usize| {
                        let (lo, hi) = bbox[d];
                        lo + gens[d].at(i as u64) * (hi - lo)
                    };
                    *zj = C64::new(x(2 * j), x(2 * j + 1));
                }
                if spec.contains(&z) {
                    kept.extend_from_slice(&z);
                }
            }
            kept
        })
        .collect();

    let coords: Vec<C64> = chunks.concat();
    let accepted = coords.len() / n;
    if accepted == 0 {
        return Err(Error::DegenerateSample { id: spec.id().to_string(), requested: count });
    }
    Ok(SampleCloud {
        dimension: n,
        coords,
        volume_estimate: spec.box_volume() * accepted as f64 / count as f64,
        seed,
        requested: count,
        accepted,
    })
}

/// Deterministic probe points: the first accepted samples of a small cloud,
/// pulled halfway towards the origin. A candidate is kept only when the
/// radial segment between the probe and the sample stays inside the domain.
pub fn probes(spec: &DomainSpec, seed: u64) -> Result<Vec<ComplexPoint>> {
    let cloud = sample(spec, 4096, seed)?;
    let mut out = Vec::with_capacity(PROBE_COUNT);
    for p in cloud.points() {
        let probe: ComplexPoint = p.iter().map(|z| z * 0.5).collect();
        let segment_inside = (16..=32).all(|s| {
            let t = s as f64 / 32.0;
            let q: Vec<C64> = p.iter().map(|z| z * t).collect();
            spec.contains(&q)
        });
        if segment_inside {
            out.push(probe);
        }
        if out.len() == PROBE_COUNT {
            break;
        }
    }
    Ok(out)
}
