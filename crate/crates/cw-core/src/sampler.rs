//! Exact seeded sampling of voting configurations, full or restricted to the
//! observed `K`-subset.
//!
//! Each observation is drawn in two stages: the margin `S` by inverse CDF
//! over the magnetization sectors, then (for subsets) the observed yes-count
//! `H` from the hypergeometric law conditioned on `S`, and finally the `+1`
//! entries are placed uniformly among the observed positions. Exchangeability
//! of the voters makes the two-stage draw exact; the remaining `N - K` spins
//! are never materialized.
//!
//! RNG contract: ChaCha12 (`rand_chacha` 0.10, pure Rust, platform
//! independent). Every `(seed, stream_id, group)` triple keys its own cipher
//! instance, so substreams are independent by construction rather than by
//! arithmetic on a shared seed.

use crate::model::{GroupSpec, ModelSpec};
use crate::partition::MagnetizationDistribution;
use crate::math::{self, KahanSum, LnFactorials};
use alloc::boxed::Box;
use alloc::vec::Vec;
use core::fmt;
use core::ops::Range;
use rand_chacha::ChaCha12Rng;
use rand_core::{Rng, SeedableRng};

/// Hypergeometric draws use explicit urn simulation up to this `K`; beyond
/// it, inverse CDF over a cached per-sector table.
const URN_LIMIT: u32 = 64;

/// Domain-separation tag baked into every sampler key.
const KEY_TAG: u64 = u64::from_le_bytes(*b"cwspin01");

/// Seed and substream selector. Identical `(seed, stream_id, model, n_obs)`
/// reproduce identical samples bit for bit.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SamplerConfig {
    pub seed: u64,
    pub stream_id: u64,
}

impl SamplerConfig {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        Self { seed, stream_id }
    }
}

fn keyed_rng(cfg: &SamplerConfig, group_index: u64) -> ChaCha12Rng {
    let mut key = [0u8; 32];
    key[0..8].copy_from_slice(&cfg.seed.to_le_bytes());
    key[8..16].copy_from_slice(&cfg.stream_id.to_le_bytes());
    key[16..24].copy_from_slice(&group_index.to_le_bytes());
    key[24..32].copy_from_slice(&KEY_TAG.to_le_bytes());
    ChaCha12Rng::from_seed(key)
}

#[inline]
fn uniform_f64(rng: &mut ChaCha12Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Unbiased uniform draw from `0..n` by rejection.
#[inline]
fn below(rng: &mut ChaCha12Rng, n: u64) -> u64 {
    debug_assert!(n > 0);
    let zone = u64::MAX - (u64::MAX % n);
    loop {
        let x = rng.next_u64();
        if x < zone {
            return x % n;
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SampleError {
    /// An entry was not -1 or +1.
    BadEntry { group: usize, row: usize, col: usize },
    /// Block length does not equal `n_obs * k_obs`.
    BadShape { group: usize },
}

impl fmt::Display for SampleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SampleError::BadEntry { group, row, col } => {
                write!(f, "entry at group {group}, row {row}, col {col} is not +/-1")
            }
            SampleError::BadShape { group } => write!(f, "group {group} block has wrong shape"),
        }
    }
}

impl core::error::Error for SampleError {}

#[derive(Clone, Debug, PartialEq, Eq)]
struct GroupBlock {
    k_obs: usize,
    /// Row-major `n_obs x k_obs`, entries +/-1.
    data: Vec<i8>,
}

/// Observed votes: `n_obs` observations of the per-group column blocks.
/// Immutable once built; the only input the statistics ever see.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SampleMatrix {
    n_obs: usize,
    blocks: Vec<GroupBlock>,
}

impl SampleMatrix {
    /// Build from per-group row-major blocks, validating shape and entries.
    pub fn from_blocks(n_obs: usize, blocks: Vec<(usize, Vec<i8>)>) -> Result<Self, SampleError> {
        let mut out = Vec::with_capacity(blocks.len());
        for (g, (k_obs, data)) in blocks.into_iter().enumerate() {
            if data.len() != n_obs * k_obs {
                return Err(SampleError::BadShape { group: g });
            }
            if let Some(pos) = data.iter().position(|&e| e != 1 && e != -1) {
                return Err(SampleError::BadEntry {
                    group: g,
                    row: pos / k_obs,
                    col: pos % k_obs,
                });
            }
            out.push(GroupBlock { k_obs, data });
        }
        Ok(Self { n_obs, blocks: out })
    }

    fn from_blocks_unchecked(n_obs: usize, blocks: Vec<GroupBlock>) -> Self {
        Self { n_obs, blocks }
    }

    #[inline]
    pub fn n_obs(&self) -> usize {
        self.n_obs
    }

    #[inline]
    pub fn group_count(&self) -> usize {
        self.blocks.len()
    }

    #[inline]
    pub fn k_obs(&self, group: usize) -> usize {
        self.blocks[group].k_obs
    }

    /// Row `t` of group `group`'s column block.
    #[inline]
    pub fn row(&self, group: usize, t: usize) -> &[i8] {
        let k = self.blocks[group].k_obs;
        &self.blocks[group].data[t * k..(t + 1) * k]
    }

    /// Iterator over the rows of one group block.
    pub fn rows(&self, group: usize) -> impl Iterator<Item = &[i8]> {
        self.blocks[group].data.chunks_exact(self.blocks[group].k_obs)
    }

    /// Column range of `group` in the concatenated layout.
    pub fn column_range(&self, group: usize) -> Range<usize> {
        let start: usize = self.blocks[..group].iter().map(|b| b.k_obs).sum();
        start..start + self.blocks[group].k_obs
    }

    #[inline]
    pub fn total_columns(&self) -> usize {
        self.blocks.iter().map(|b| b.k_obs).sum()
    }
}

/// Hypergeometric inverse-CDF table over the support of one sector.
struct HgTable {
    h_lo: usize,
    cdf: Box<[f64]>,
}

/// Per-group sampler owning the sector tables, the hypergeometric caches,
/// and its substream RNG.
pub struct GroupSampler {
    n_pop: u32,
    columns: u32,
    dist: MagnetizationDistribution,
    lnfact: LnFactorials,
    hg_tables: Vec<Option<HgTable>>,
    rng: ChaCha12Rng,
    scratch: Vec<u32>,
}

impl GroupSampler {
    /// Sampler over the full configuration: `N` columns per observation.
    pub fn full(spec: &GroupSpec, group_index: u64, cfg: &SamplerConfig) -> Self {
        Self::with_columns(spec, spec.n_pop, group_index, cfg)
    }

    /// Sampler over the observed subset: `k_obs` columns per observation.
    pub fn subset(spec: &GroupSpec, group_index: u64, cfg: &SamplerConfig) -> Self {
        Self::with_columns(spec, spec.k_obs, group_index, cfg)
    }

    fn with_columns(spec: &GroupSpec, columns: u32, group_index: u64, cfg: &SamplerConfig) -> Self {
        let n = spec.n_pop as usize;
        Self {
            n_pop: spec.n_pop,
            columns,
            dist: MagnetizationDistribution::new(spec.n_pop, spec.beta),
            lnfact: LnFactorials::up_to(n),
            hg_tables: (0..=n).map(|_| None).collect(),
            rng: keyed_rng(cfg, group_index),
            scratch: Vec::new(),
        }
    }

    fn hg_table(&mut self, sector: usize) -> &HgTable {
        if self.hg_tables[sector].is_none() {
            let n = self.n_pop as usize;
            let k = self.columns as usize;
            let n_plus = sector;
            let h_lo = k.saturating_sub(n - n_plus);
            let h_hi = k.min(n_plus);
            let ln_choose_nk = self.lnfact.ln_binomial(n, k);
            let mut cdf = Vec::with_capacity(h_hi - h_lo + 1);
            let mut acc = KahanSum::new();
            for h in h_lo..=h_hi {
                acc.add(math::exp(
                    self.lnfact.ln_binomial(n_plus, h)
                        + self.lnfact.ln_binomial(n - n_plus, k - h)
                        - ln_choose_nk,
                ));
                cdf.push(acc.value());
            }
            let last = cdf.len() - 1;
            cdf[last] = 1.0;
            self.hg_tables[sector] = Some(HgTable {
                h_lo,
                cdf: cdf.into_boxed_slice(),
            });
        }
        self.hg_tables[sector].as_ref().unwrap()
    }

    /// Observed yes-count for a draw with `n_plus` yes-votes in the whole
    /// group.
    fn draw_h(&mut self, sector: usize) -> usize {
        let n = self.n_pop as usize;
        let k = self.columns as usize;
        let n_plus = sector;
        if k == n {
            return n_plus;
        }
        if self.columns <= URN_LIMIT {
            // Urn without replacement.
            let mut h = 0usize;
            let mut remaining_plus = n_plus as u64;
            let mut remaining = n as u64;
            for _ in 0..k {
                if below(&mut self.rng, remaining) < remaining_plus {
                    h += 1;
                    remaining_plus -= 1;
                }
                remaining -= 1;
            }
            h
        } else {
            let u = uniform_f64(&mut self.rng);
            let table = self.hg_table(sector);
            table.h_lo + table.cdf.partition_point(|&c| c < u)
        }
    }

    /// Fill `row` (length = column count) with `h` yes-votes placed uniformly.
    fn place(&mut self, row: &mut [i8], h: usize) {
        let k = row.len();
        row.fill(-1);
        self.scratch.clear();
        self.scratch.extend(0..k as u32);
        for i in 0..h {
            let j = i + below(&mut self.rng, (k - i) as u64) as usize;
            self.scratch.swap(i, j);
            row[self.scratch[i] as usize] = 1;
        }
    }

    /// Draw `n_obs` i.i.d. observations as one row-major block.
    pub fn sample_block(&mut self, n_obs: usize) -> Vec<i8> {
        let k = self.columns as usize;
        let mut data = alloc::vec![0i8; n_obs * k];
        for row in data.chunks_exact_mut(k) {
            let u = uniform_f64(&mut self.rng);
            let sector = self.dist.sector_for(u);
            let h = self.draw_h(sector);
            self.place(row, h);
        }
        data
    }

    #[inline]
    pub fn columns(&self) -> u32 {
        self.columns
    }
}

/// Sample full configurations of one group (`n_pop` columns per row).
pub fn sample_full(spec: &GroupSpec, n_obs: usize, cfg: &SamplerConfig) -> SampleMatrix {
    let mut s = GroupSampler::full(spec, 0, cfg);
    let data = s.sample_block(n_obs);
    SampleMatrix::from_blocks_unchecked(
        n_obs,
        alloc::vec![GroupBlock {
            k_obs: spec.n_pop as usize,
            data,
        }],
    )
}

/// Sample only the observed `k_obs`-subset of one group.
pub fn sample_subset(spec: &GroupSpec, n_obs: usize, cfg: &SamplerConfig) -> SampleMatrix {
    let mut s = GroupSampler::subset(spec, 0, cfg);
    let data = s.sample_block(n_obs);
    SampleMatrix::from_blocks_unchecked(
        n_obs,
        alloc::vec![GroupBlock {
            k_obs: spec.k_obs as usize,
            data,
        }],
    )
}

/// Sample every group of the model independently on disjoint substreams and
/// concatenate the column blocks.
pub fn sample_multigroup(spec: &ModelSpec, n_obs: usize, cfg: &SamplerConfig) -> SampleMatrix {
    let blocks = spec
        .groups()
        .iter()
        .enumerate()
        .map(|(idx, g)| {
            let mut s = GroupSampler::subset(g, idx as u64, cfg);
            GroupBlock {
                k_obs: g.k_obs as usize,
                data: s.sample_block(n_obs),
            }
        })
        .collect();
    SampleMatrix::from_blocks_unchecked(n_obs, blocks)
}
