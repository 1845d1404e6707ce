//! Classification of level-`m` grid points by how `u_m` behaves there.
//!
//! Every level-`(m-1)` cell holds `pq` level-`m` segments; inside a cell the
//! local index `r` decides the class:
//!
//! * `S0`: `r = kq` for `k = 1..p-1`, the interior sub-piece endpoints kept
//!   from the refinement;
//! * `S1`: the translates `y + d ℓ_m`, `d ∈ {-(q-1), -(q-3), .., q-1}`, of the
//!   level-`(m-1)` nodes;
//! * `S2`: everything else. These points come in pairs `(y, y + (q+1) ℓ_m)`
//!   with `y = kq + 2a + 1` (`k = 0..p-2`, `a = 0..(q-3)/2`) on which `u_m`
//!   takes the same value with mirrored slopes.
//!
//! The pair starts are grouped into `q` families `A_0 .. A_{q-1}` (the last
//! one empty) such that the intervals `[y, y + (q+1) ℓ_m]` within a family are
//! pairwise disjoint. The classification never materializes per-point data:
//! classes and families follow from index arithmetic.

use serde::Serialize;

use super::{FlowParams, PiecewiseLinearFlow};
use crate::error::{Error, Result};
use crate::par;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum PointClass {
    S0,
    S1,
    S2,
}

/// Read access to the scaled node values `p^m u_m(y_j)` of some level.
pub trait NodeValues: Sync {
    fn params(&self) -> FlowParams;
    fn level(&self) -> u32;
    fn len(&self) -> usize;
    /// Scaled value at `i`, wrapping around the torus.
    fn scaled(&self, i: usize) -> i64;
}

impl NodeValues for PiecewiseLinearFlow {
    fn params(&self) -> FlowParams {
        *self.params()
    }
    fn level(&self) -> u32 {
        self.level()
    }
    fn len(&self) -> usize {
        self.n_nodes()
    }
    fn scaled(&self, i: usize) -> i64 {
        self.scaled_at(i) as i64
    }
}

/// The level-`(m+1)` flow seen through its level-`m` parent, computed on
/// demand. Lets structural checks run on grids too large to store.
#[derive(Debug, Clone, Copy)]
pub struct Refined<'a> {
    coarse: &'a PiecewiseLinearFlow,
}

impl<'a> Refined<'a> {
    pub fn new(coarse: &'a PiecewiseLinearFlow) -> Self {
        Self { coarse }
    }
}

impl NodeValues for Refined<'_> {
    fn params(&self) -> FlowParams {
        *self.coarse.params()
    }
    fn level(&self) -> u32 {
        self.coarse.level() + 1
    }
    fn len(&self) -> usize {
        let fp = self.coarse.params();
        self.coarse.n_nodes() * (fp.p() * fp.q()) as usize
    }
    fn scaled(&self, i: usize) -> i64 {
        let fp = self.coarse.params();
        let (p, q) = (fp.p() as usize, fp.q() as usize);
        let i = i % self.len();
        let j = i / (p * q);
        let r = i % (p * q);
        let (k, a) = (r / q, r % q);
        let base = self.coarse.scaled_at(j) as i64;
        let step = self.coarse.slope_sign(j) as i64;
        base * p as i64 + (k as i64 + (a % 2) as i64) * step
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridClassification {
    params: FlowParams,
    level: u32,
    n: usize,
}

/// Validates that `fine` refines `coarse` and returns the level-`m`
/// classification.
pub fn classify(fine: &PiecewiseLinearFlow, coarse: &PiecewiseLinearFlow) -> Result<GridClassification> {
    if fine.params() != coarse.params() {
        return Err(Error::LevelMismatch(format!(
            "flows built from different parameters {:?} and {:?}",
            fine.params(),
            coarse.params()
        )));
    }
    if fine.level() != coarse.level() + 1 {
        return Err(Error::LevelMismatch(format!(
            "expected consecutive levels, got {} and {}",
            fine.level(),
            coarse.level()
        )));
    }
    let pq = (fine.params().p() * fine.params().q()) as usize;
    let p = fine.params().p();
    for j in 0..coarse.n_nodes() {
        if fine.scaled_at(j * pq) != coarse.scaled_at(j) * p {
            return Err(Error::LevelMismatch(format!(
                "level {} differs from level {} at coarse node {j}",
                fine.level(),
                coarse.level()
            )));
        }
    }
    Ok(GridClassification::for_level(*fine.params(), fine.level()))
}

impl GridClassification {
    /// Classification of the level-`m` grid (`m >= 1`).
    pub fn for_level(params: FlowParams, level: u32) -> Self {
        assert!(level >= 1, "classification needs level >= 1");
        Self {
            params,
            level,
            n: params.n_nodes(level) as usize,
        }
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn n_points(&self) -> usize {
        self.n
    }

    fn pq(&self) -> usize {
        (self.params.p() * self.params.q()) as usize
    }

    /// The translation offsets `D = {-(q-1), -(q-3), .., q-1}` in grid units.
    pub fn offsets(&self) -> Vec<i64> {
        let q = self.params.q() as i64;
        (0..q).map(|i| -(q - 1) + 2 * i).collect()
    }

    pub fn class_of(&self, i: usize) -> PointClass {
        let q = self.params.q() as usize;
        let pq = self.pq();
        let r = i % pq;
        if r.is_multiple_of(q) && r != 0 {
            PointClass::S0
        } else if (r < q && r.is_multiple_of(2)) || (pq - r < q && (pq - r).is_multiple_of(2)) {
            PointClass::S1
        } else {
            PointClass::S2
        }
    }

    /// Family index `k` when `i` starts a pair in `A_k`.
    pub fn family_of(&self, i: usize) -> Option<usize> {
        let p = self.params.p() as usize;
        let q = self.params.q() as usize;
        let r = i % self.pq();
        let (block, a) = (r / q, r % q);
        if block + 1 < p && a % 2 == 1 {
            Some((a - 1) / 2 + (q - 1) / 2 * (block % 2))
        } else {
            None
        }
    }

    /// The partner `y + (q+1) ℓ_m` of a pair start, as a torus index.
    pub fn partner(&self, i: usize) -> usize {
        (i + self.params.q() as usize + 1) % self.n
    }

    pub fn indices(&self, class: PointClass) -> impl Iterator<Item = usize> + '_ {
        (0..self.n).filter(move |&i| self.class_of(i) == class)
    }

    pub fn family(&self, k: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.n).filter(move |&i| self.family_of(i) == Some(k))
    }

    pub fn n_families(&self) -> usize {
        self.params.q() as usize
    }

    /// Class sizes `(#S0, #S1, #S2)` predicted by the cell structure.
    pub fn expected_counts(&self) -> [usize; 3] {
        let cells = self.n / self.pq();
        let p = self.params.p() as usize;
        let q = self.params.q() as usize;
        [(p - 1) * cells, q * cells, (p * q + 1 - p - q) * cells]
    }

    /// Checks every structural property against actual node values.
    pub fn verify<V: NodeValues + ?Sized>(&self, values: &V) -> Result<StructureReport> {
        if values.params() != self.params || values.level() != self.level || values.len() != self.n {
            return Err(Error::LevelMismatch(format!(
                "classification of level {} applied to level {} values",
                self.level,
                values.level()
            )));
        }
        let n = self.n;
        let q = self.params.q() as usize;
        let pq = self.pq();
        let span = q + 1;
        let n_fam = self.n_families();

        let chunks = par::map_chunks(n, par::DEFAULT_CHUNK, |range| {
            let mut acc = ChunkTally::new(n_fam);
            for i in range {
                let class = self.class_of(i);
                acc.counts[class as usize] += 1;
                if let Some(k) = self.family_of(i) {
                    if class != PointClass::S2 || self.class_of(self.partner(i)) != PointClass::S2 {
                        acc.decomposition_ok = false;
                    }
                    acc.starts += 1;
                    let j = self.partner(i);
                    if values.scaled(i) != values.scaled(j) {
                        acc.values_ok = false;
                    }
                    let right = |x: usize| values.scaled(x + 1) - values.scaled(x);
                    let left = |x: usize| values.scaled(x) - values.scaled((x + n - 1) % n);
                    if right(i) != -right(j) || left(i) != -left(j) {
                        acc.slopes_ok = false;
                    }
                    let fam = &mut acc.families[k];
                    if let Some(prev) = fam.last {
                        if i - prev <= span {
                            acc.disjoint_ok = false;
                        }
                    } else {
                        fam.first = Some(i);
                    }
                    fam.last = Some(i);
                    fam.count += 1;
                }
                // Partners are exactly the S2 points that are not pair starts.
                if class == PointClass::S2 && self.family_of(i).is_none() {
                    let start = (i + n - span) % n;
                    if self.family_of(start).is_none() {
                        acc.decomposition_ok = false;
                    }
                    acc.partners += 1;
                }
            }
            acc
        });

        let mut total = ChunkTally::new(n_fam);
        for c in chunks {
            total.absorb(c, n, span);
        }
        for fam in &total.families {
            if let (Some(first), Some(last)) = (fam.first, fam.last) {
                if fam.count > 1 && first + n - last <= span {
                    total.disjoint_ok = false;
                }
            }
        }

        // S1 is the union of the translates of the coarse nodes.
        let offsets = self.offsets();
        let mut translates_ok = 2 * (q - 1) < pq;
        for j in 0..n / pq {
            for &d in &offsets {
                let i = (j as i64 * pq as i64 + d).rem_euclid(n as i64) as usize;
                if self.class_of(i) != PointClass::S1 {
                    translates_ok = false;
                }
            }
        }
        let coarse_points = n / pq;
        let p1_ok = translates_ok && total.counts[1] == q * coarse_points;

        let family_sizes: Vec<usize> = total.families.iter().map(|f| f.count).collect();
        Ok(StructureReport {
            level: self.level,
            n_points: n,
            counts: total.counts,
            family_sizes,
            partition: total.counts.iter().sum::<usize>() == n && total.counts == self.expected_counts(),
            p1_count: p1_ok,
            family_disjoint: total.disjoint_ok,
            pair_values_equal: total.values_ok,
            slope_antisymmetry: total.slopes_ok,
            s2_decomposition: total.decomposition_ok && 2 * total.starts == total.counts[2] && total.partners == total.starts,
        })
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct FamilyTrack {
    first: Option<usize>,
    last: Option<usize>,
    count: usize,
}

struct ChunkTally {
    counts: [usize; 3],
    families: Vec<FamilyTrack>,
    starts: usize,
    partners: usize,
    values_ok: bool,
    slopes_ok: bool,
    disjoint_ok: bool,
    decomposition_ok: bool,
}

impl ChunkTally {
    fn new(n_fam: usize) -> Self {
        Self {
            counts: [0; 3],
            families: vec![FamilyTrack::default(); n_fam],
            starts: 0,
            partners: 0,
            values_ok: true,
            slopes_ok: true,
            disjoint_ok: true,
            decomposition_ok: true,
        }
    }

    /// Merges a later chunk, checking disjointness across the chunk seam.
    fn absorb(&mut self, other: ChunkTally, _n: usize, span: usize) {
        for c in 0..3 {
            self.counts[c] += other.counts[c];
        }
        for (mine, theirs) in self.families.iter_mut().zip(other.families) {
            if let (Some(last), Some(first)) = (mine.last, theirs.first) {
                if first - last <= span {
                    self.disjoint_ok = false;
                }
            }
            if mine.first.is_none() {
                mine.first = theirs.first;
            }
            if theirs.last.is_some() {
                mine.last = theirs.last;
            }
            mine.count += theirs.count;
        }
        self.starts += other.starts;
        self.partners += other.partners;
        self.values_ok &= other.values_ok;
        self.slopes_ok &= other.slopes_ok;
        self.disjoint_ok &= other.disjoint_ok;
        self.decomposition_ok &= other.decomposition_ok;
    }
}

/// Outcome of [`GridClassification::verify`]; every flag must be `true`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StructureReport {
    pub level: u32,
    pub n_points: usize,
    /// `(#S0, #S1, #S2)`.
    pub counts: [usize; 3],
    pub family_sizes: Vec<usize>,
    pub partition: bool,
    pub p1_count: bool,
    pub family_disjoint: bool,
    pub pair_values_equal: bool,
    pub slope_antisymmetry: bool,
    pub s2_decomposition: bool,
}

impl StructureReport {
    pub fn all_pass(&self) -> bool {
        self.partition
            && self.p1_count
            && self.family_disjoint
            && self.pair_values_equal
            && self.slope_antisymmetry
            && self.s2_decomposition
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::build;

    #[test]
    fn hand_enumerated_first_level() {
        let fp = FlowParams::new(3, 3).unwrap();
        let u0 = build(fp, 0).unwrap();
        let u1 = build(fp, 1).unwrap();
        let c = classify(&u1, &u0).unwrap();
        let s2: Vec<usize> = c.indices(PointClass::S2).collect();
        assert_eq!(s2, vec![1, 4, 5, 8, 10, 13, 14, 17]);
        let s0: Vec<usize> = c.indices(PointClass::S0).collect();
        assert_eq!(s0, vec![3, 6, 12, 15]);
        assert_eq!(c.family(0).collect::<Vec<_>>(), vec![1, 10]);
        assert_eq!(c.family(1).collect::<Vec<_>>(), vec![4, 13]);
        assert_eq!(c.family(2).count(), 0);
        assert_eq!(c.partner(1), 5);
        assert_eq!(c.offsets(), vec![-2, 0, 2]);
        let report = c.verify(&u1).unwrap();
        assert!(report.all_pass(), "{report:?}");
        assert_eq!(report.counts.iter().sum::<usize>(), 18);
    }

    #[test]
    fn p1_count_for_three_five() {
        let fp = FlowParams::new(3, 5).unwrap();
        let u1 = build(fp, 1).unwrap();
        let u2 = build(fp, 2).unwrap();
        let c = classify(&u2, &u1).unwrap();
        let report = c.verify(&u2).unwrap();
        assert!(report.all_pass(), "{report:?}");
        assert_eq!(report.counts[1], 5 * u1.n_nodes());
    }

    #[test]
    fn refined_view_matches_built_flow() {
        let fp = FlowParams::new(5, 3).unwrap();
        let u2 = build(fp, 2).unwrap();
        let u3 = build(fp, 3).unwrap();
        let view = Refined::new(&u2);
        assert_eq!(view.len(), u3.n_nodes());
        for i in 0..u3.n_nodes() {
            assert_eq!(view.scaled(i), u3.scaled_at(i) as i64);
        }
    }

    #[test]
    fn mismatched_levels_are_rejected() {
        let fp = FlowParams::new(3, 3).unwrap();
        let u1 = build(fp, 1).unwrap();
        let u3 = build(fp, 3).unwrap();
        assert!(matches!(classify(&u3, &u1), Err(Error::LevelMismatch(_))));
        let other = build(FlowParams::new(3, 5).unwrap(), 2).unwrap();
        assert!(classify(&other, &u1).is_err());
    }

    struct Bumped<'a> {
        base: &'a PiecewiseLinearFlow,
        at: usize,
    }

    impl NodeValues for Bumped<'_> {
        fn params(&self) -> FlowParams {
            *self.base.params()
        }
        fn level(&self) -> u32 {
            self.base.level()
        }
        fn len(&self) -> usize {
            self.base.n_nodes()
        }
        fn scaled(&self, i: usize) -> i64 {
            let i = i % self.len();
            self.base.scaled_at(i) as i64 + if i == self.at { 2 } else { 0 }
        }
    }

    #[test]
    fn verify_detects_a_perturbed_flow() {
        let fp = FlowParams::new(3, 3).unwrap();
        let u2 = build(fp, 2).unwrap();
        let c = GridClassification::for_level(fp, 2);
        assert!(c.verify(&u2).unwrap().all_pass());
        let bumped = Bumped { base: &u2, at: 5 };
        let report = c.verify(&bumped).unwrap();
        assert!(!report.pair_values_equal);
        assert!(!report.all_pass());
        assert!(c.verify(&build(fp, 3).unwrap()).is_err());
    }
}
