//! Monte Carlo coverage geometry.
//!
//! Every node owns a fixed, seeded pool of sample points drawn uniformly from
//! its monitoring disk. For each geometric neighbor we precompute the bitset
//! of pool points that fall inside the neighbor's disk. Overlap degrees and
//! fusion rates are popcounts over unions of those bitsets.
//!
//! Union areas of a node set use lowest-id ownership: a pool point of node
//! `k` counts towards the union iff no lower-id member of the set covers it.
//! The estimate is therefore a function of the member set only, so fused
//! packet sizes are exactly independent of fusion order.

use std::f64::consts::PI;
use std::sync::OnceLock;

use rand::Rng;

use crate::geometry::{disk_area, Point};
use crate::rng::{indexed_stream, Stream};

/// Owned-count tables are memoized when a node has at most this many lower-id neighbors.
const MAX_CACHED_LOWER: usize = 16;

#[derive(Debug, Clone)]
pub(crate) struct Bitset(Box<[u64]>);

impl Bitset {
    fn zeros(words: usize) -> Self {
        Self(vec![0; words].into_boxed_slice())
    }

    fn set(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }

    fn or_assign(&mut self, other: &Bitset) {
        for (a, b) in self.0.iter_mut().zip(other.0.iter()) {
            *a |= *b;
        }
    }

    fn count_ones(&self) -> u32 {
        self.0.iter().map(|w| w.count_ones()).sum()
    }
}

/// Node positions plus the precomputed coverage structure for a fixed radius.
#[derive(Debug)]
pub struct CoverageField {
    positions: Vec<Point>,
    radius: f64,
    samples: usize,
    words: usize,
    seed: u64,
    distances: Vec<f64>,
    /// Geometric neighbors (d < 2r) in ascending id order.
    neighbors: Vec<Vec<usize>>,
    /// Number of neighbors with a smaller id; they form a prefix of `neighbors[k]`.
    lower_len: Vec<usize>,
    /// `cover[k][b]`: pool points of `k` inside the disk of `neighbors[k][b]`.
    cover: Vec<Vec<Bitset>>,
    /// For node `j`: its higher-id neighbors.
    upper_slots: Vec<Vec<usize>>,
    owned_cache: Vec<Option<Box<[OnceLock<u32>]>>>,
}

impl CoverageField {
    pub fn new(positions: Vec<Point>, radius: f64, samples: usize, seed: u64) -> Self {
        let n = positions.len();
        let words = samples.div_ceil(64);
        let reach_sq = 4.0 * radius * radius;
        let r_sq = radius * radius;

        let mut distances = vec![0.0; n * n];
        let mut neighbors = vec![Vec::new(); n];
        for i in 0..n {
            for j in (i + 1)..n {
                let d_sq = positions[i].distance_sq(&positions[j]);
                let d = d_sq.sqrt();
                distances[i * n + j] = d;
                distances[j * n + i] = d;
                if d_sq < reach_sq {
                    neighbors[i].push(j);
                    neighbors[j].push(i);
                }
            }
        }
        for list in &mut neighbors {
            list.sort_unstable();
        }

        let mut cover = Vec::with_capacity(n);
        let mut lower_len = Vec::with_capacity(n);
        for k in 0..n {
            let nbrs = &neighbors[k];
            lower_len.push(nbrs.partition_point(|&m| m < k));
            let mut sets: Vec<Bitset> = nbrs.iter().map(|_| Bitset::zeros(words)).collect();
            if !nbrs.is_empty() {
                let center = positions[k];
                let mut rng = indexed_stream(seed, Stream::CoveragePool, k as u64);
                for s in 0..samples {
                    let p = sample_in_disk(&mut rng, center, radius);
                    for (b, &m) in nbrs.iter().enumerate() {
                        if p.distance_sq(&positions[m]) < r_sq {
                            sets[b].set(s);
                        }
                    }
                }
            }
            cover.push(sets);
        }

        let upper_slots = (0..n).map(|j| neighbors[j][lower_len[j]..].to_vec()).collect();

        let owned_cache = lower_len
            .iter()
            .map(|&l| {
                (l > 0 && l <= MAX_CACHED_LOWER).then(|| {
                    (0..(1usize << l))
                        .map(|_| OnceLock::new())
                        .collect::<Vec<_>>()
                        .into_boxed_slice()
                })
            })
            .collect();

        Self {
            positions,
            radius,
            samples,
            words,
            seed,
            distances,
            neighbors,
            lower_len,
            cover,
            upper_slots,
            owned_cache,
        }
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn samples(&self) -> usize {
        self.samples
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn positions(&self) -> &[Point] {
        &self.positions
    }

    pub fn position(&self, id: usize) -> Point {
        self.positions[id]
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        self.distances[i * self.positions.len() + j]
    }

    /// Geometric neighbors of `id` regardless of liveness.
    pub fn geometric_neighbors(&self, id: usize) -> &[usize] {
        &self.neighbors[id]
    }

    /// Regenerates the sample pool of `id`; the pool is not stored.
    pub fn pool_points(&self, id: usize) -> Vec<Point> {
        let mut rng = indexed_stream(self.seed, Stream::CoveragePool, id as u64);
        let center = self.positions[id];
        (0..self.samples)
            .map(|_| sample_in_disk(&mut rng, center, self.radius))
            .collect()
    }

    /// Fraction of `id`'s disk covered by the union of neighbor disks accepted by `include`.
    pub fn overlap_degree(&self, id: usize, include: impl Fn(usize) -> bool) -> f64 {
        let mut acc = Bitset::zeros(self.words);
        let mut any = false;
        for (b, &m) in self.neighbors[id].iter().enumerate() {
            if include(m) {
                acc.or_assign(&self.cover[id][b]);
                any = true;
            }
        }
        if !any {
            return 0.0;
        }
        acc.count_ones() as f64 / self.samples as f64
    }

    /// Pool points of `k` not covered by the lower-id neighbors selected in `mask`.
    fn owned(&self, k: usize, mask: u64) -> u32 {
        if mask == 0 {
            return self.samples as u32;
        }
        let compute = || {
            let mut acc = Bitset::zeros(self.words);
            let mut bits = mask;
            while bits != 0 {
                let b = bits.trailing_zeros() as usize;
                acc.or_assign(&self.cover[k][b]);
                bits &= bits - 1;
            }
            self.samples as u32 - acc.count_ones()
        };
        match &self.owned_cache[k] {
            Some(table) => *table[mask as usize].get_or_init(compute),
            None => compute(),
        }
    }

    fn lower_mask(&self, k: usize, members: &MemberSet) -> u64 {
        let lower = &self.neighbors[k][..self.lower_len[k]];
        let mut mask = 0u64;
        for (b, &m) in lower.iter().enumerate() {
            if members.contains(m) {
                mask |= 1 << b;
            }
        }
        mask
    }

    /// Uncached owned count for nodes with more than 64 lower-id neighbors.
    fn owned_wide(&self, k: usize, members: &MemberSet, extra: Option<usize>) -> u32 {
        let mut acc = Bitset::zeros(self.words);
        for (b, &m) in self.neighbors[k][..self.lower_len[k]].iter().enumerate() {
            if members.contains(m) || extra == Some(m) {
                acc.or_assign(&self.cover[k][b]);
            }
        }
        self.samples as u32 - acc.count_ones()
    }

    fn owned_in(&self, k: usize, members: &MemberSet, extra: Option<usize>) -> u32 {
        if self.lower_len[k] > 64 {
            return self.owned_wide(k, members, extra);
        }
        let mut mask = self.lower_mask(k, members);
        if let Some(j) = extra {
            let b = self.neighbors[k][..self.lower_len[k]].partition_point(|&m| m < j);
            mask |= 1 << b;
        }
        self.owned(k, mask)
    }

    /// Change of the owned-point total when `incoming` joins `members`.
    fn owned_delta(&self, members: &MemberSet, incoming: usize) -> i64 {
        let mut delta = self.owned_in(incoming, members, None) as i64;
        for &k in &self.upper_slots[incoming] {
            if members.contains(k) {
                let before = self.owned_in(k, members, None) as i64;
                let after = self.owned_in(k, members, Some(incoming)) as i64;
                delta += after - before;
            }
        }
        delta
    }

    /// Estimated union area of the member set in m^2.
    pub fn union_area(&self, packet: &FusedPacket) -> f64 {
        packet.owned as f64 / self.samples as f64 * disk_area(self.radius)
    }
}

fn sample_in_disk(rng: &mut impl Rng, center: Point, radius: f64) -> Point {
    let rho = radius * rng.gen::<f64>().sqrt();
    let angle = 2.0 * PI * rng.gen::<f64>();
    Point::new(center.x + rho * angle.cos(), center.y + rho * angle.sin())
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct MemberSet {
    words: Vec<u64>,
    len: usize,
}

impl MemberSet {
    fn new(n: usize) -> Self {
        Self {
            words: vec![0; n.div_ceil(64).max(1)],
            len: 0,
        }
    }

    fn contains(&self, id: usize) -> bool {
        self.words[id / 64] & (1 << (id % 64)) != 0
    }

    fn insert(&mut self, id: usize) -> bool {
        let fresh = !self.contains(id);
        if fresh {
            self.words[id / 64] |= 1 << (id % 64);
            self.len += 1;
        }
        fresh
    }

    fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(w, &word)| {
            let mut bits = word;
            std::iter::from_fn(move || {
                (bits != 0).then(|| {
                    let b = bits.trailing_zeros() as usize;
                    bits &= bits - 1;
                    w * 64 + b
                })
            })
        })
    }
}

/// A fused data packet: the set of nodes whose readings it carries.
///
/// Its size in bits is `L * union_area / disk_area`, estimated from the
/// shared sample pools.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FusedPacket {
    members: MemberSet,
    owned: i64,
    samples: usize,
}

impl FusedPacket {
    pub fn empty(field: &CoverageField) -> Self {
        Self {
            members: MemberSet::new(field.len()),
            owned: 0,
            samples: field.samples,
        }
    }

    pub fn single(field: &CoverageField, id: usize) -> Self {
        let mut packet = Self::empty(field);
        packet.absorb(field, id);
        packet
    }

    pub fn contains(&self, id: usize) -> bool {
        self.members.contains(id)
    }

    pub fn member_count(&self) -> usize {
        self.members.len
    }

    pub fn is_empty(&self) -> bool {
        self.members.len == 0
    }

    pub fn members(&self) -> impl Iterator<Item = usize> + '_ {
        self.members.iter()
    }

    /// Size in bits given the per-disk packet length `l_bits`.
    pub fn bits(&self, l_bits: f64) -> f64 {
        l_bits * self.owned as f64 / self.samples as f64
    }

    /// Fuses one node's reading into the packet and returns its fusion rate.
    pub fn absorb(&mut self, field: &CoverageField, id: usize) -> f64 {
        if self.members.contains(id) {
            return 1.0;
        }
        let delta = field.owned_delta(&self.members, id);
        self.members.insert(id);
        self.owned += delta;
        rate_from_delta(delta, self.samples)
    }

    /// Fuses another packet into this one (member by member in id order).
    pub fn merge(&mut self, field: &CoverageField, other: &FusedPacket) {
        for id in other.members() {
            self.absorb(field, id);
        }
    }
}

fn rate_from_delta(delta: i64, samples: usize) -> f64 {
    (1.0 - delta as f64 / samples as f64).clamp(0.0, 1.0)
}

/// Fraction of `incoming`'s disk already covered by the nodes fused in `fused`.
pub fn fusion_rate(field: &CoverageField, fused: &FusedPacket, incoming: usize) -> f64 {
    if fused.contains(incoming) {
        return 1.0;
    }
    if fused.is_empty() {
        return 0.0;
    }
    rate_from_delta(field.owned_delta(&fused.members, incoming), field.samples)
}

/// Packet size after fusing one node whose reading is a fraction `alpha` redundant.
pub fn fused_size_update(current_bits: f64, alpha: f64, l_bits: f64) -> f64 {
    current_bits + (1.0 - alpha) * l_bits
}
