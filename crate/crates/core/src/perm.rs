//! Column-permutation families for minting additional samples.
//!
//! A family is a list of sets `P(1), ..., P(I)`, each holding `M` per-column
//! permutations of `{1..K}`. A valid family guarantees that every additional
//! sample is built from sub-samples of `M` distinct rows (within-set
//! distinctness) and shares at most one sub-sample with any other sample
//! (cross-set condition); at most `K - 1` such sets exist. The generator
//! implements the cyclic construction `pi_s(k) = ((s + k - 2) mod K) + 1`,
//! `pi^(i)_j = pi_[i(j-1) mod K] + 1`, skipping inadmissible `i` with
//! `K / gcd(i, K) < M`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A permutation of `{1..K}`, stored 0-based internally.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Permutation {
    mapping: Vec<usize>,
    /// Shift parameter `s` when the permutation is cyclic.
    shift_tag: Option<usize>,
}

impl Permutation {
    /// Builds from a 0-based image vector, validating bijectivity.
    pub fn from_mapping(mapping: Vec<usize>) -> Result<Self> {
        let k = mapping.len();
        let mut seen = vec![false; k];
        for &v in &mapping {
            if v >= k || seen[v] {
                return Err(Error::InvalidPermutation(format!(
                    "mapping is not a bijection on 0..{k}"
                )));
            }
            seen[v] = true;
        }
        Ok(Self {
            mapping,
            shift_tag: None,
        })
    }

    pub fn identity(k: usize) -> Self {
        Self {
            mapping: (0..k).collect(),
            shift_tag: Some(1),
        }
    }

    /// Image of 0-based index `k`.
    #[inline]
    pub fn apply(&self, k: usize) -> usize {
        self.mapping[k]
    }

    pub fn len(&self) -> usize {
        self.mapping.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mapping.is_empty()
    }

    pub fn shift_tag(&self) -> Option<usize> {
        self.shift_tag
    }

    /// Inverse permutation (0-based).
    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.mapping.len()];
        for (i, &v) in self.mapping.iter().enumerate() {
            inv[v] = i;
        }
        Self {
            mapping: inv,
            shift_tag: None,
        }
    }
}

/// Cyclic permutation `pi_s(k) = ((s + k - 2) mod K) + 1` with 1-based `s`.
pub fn cyclic_permutation(s: usize, k: usize) -> Result<Permutation> {
    if s < 1 || s > k {
        return Err(Error::ShiftOutOfRange { s, k });
    }
    let mapping = (0..k).map(|k0| (s - 1 + k0) % k).collect();
    Ok(Permutation {
        mapping,
        shift_tag: Some(s),
    })
}

/// One set of `M` per-column permutations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PermutationSet {
    columns: Vec<Permutation>,
}

impl PermutationSet {
    pub fn new(columns: Vec<Permutation>) -> Result<Self> {
        if columns.is_empty() {
            return Err(Error::InvalidPermutation("empty permutation set".into()));
        }
        let k = columns[0].len();
        if columns.iter().any(|p| p.len() != k) {
            return Err(Error::InvalidPermutation(
                "permutations in a set must share the same length".into(),
            ));
        }
        Ok(Self { columns })
    }

    pub fn m(&self) -> usize {
        self.columns.len()
    }

    pub fn k(&self) -> usize {
        self.columns[0].len()
    }

    pub fn column(&self, j: usize) -> &Permutation {
        &self.columns[j]
    }

    pub fn columns(&self) -> &[Permutation] {
        &self.columns
    }
}

/// Validated collection of permutation sets for fixed `(K, M)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PermutationFamily {
    sets: Vec<PermutationSet>,
    k: usize,
    m: usize,
    /// True when fewer admissible sets exist than were requested.
    shortfall: bool,
}

impl PermutationFamily {
    pub fn from_sets(k: usize, m: usize, sets: Vec<PermutationSet>) -> Result<Self> {
        for set in &sets {
            if set.k() != k || set.m() != m {
                return Err(Error::InvalidPermutation(format!(
                    "set shape ({}, {}) does not match family ({k}, {m})",
                    set.k(),
                    set.m()
                )));
            }
        }
        Ok(Self {
            sets,
            k,
            m,
            shortfall: false,
        })
    }

    pub fn sets(&self) -> &[PermutationSet] {
        &self.sets
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn shortfall(&self) -> bool {
        self.shortfall
    }

    /// Serialized form: one row of 1-based shift tags per set.
    ///
    /// Only families whose permutations are all cyclic can be serialized
    /// this way; arbitrary families are in-memory objects only.
    pub fn to_shift_tags(&self) -> Result<Vec<Vec<usize>>> {
        self.sets
            .iter()
            .map(|set| {
                set.columns()
                    .iter()
                    .map(|p| {
                        p.shift_tag().ok_or_else(|| {
                            Error::InvalidPermutation(
                                "family contains a non-cyclic permutation".into(),
                            )
                        })
                    })
                    .collect()
            })
            .collect()
    }

    /// Rebuilds a family from serialized shift tags.
    pub fn from_shift_tags(k: usize, tags: &[Vec<usize>]) -> Result<Self> {
        let mut sets = Vec::with_capacity(tags.len());
        let m = tags.first().map_or(0, Vec::len);
        for row in tags {
            if row.len() != m {
                return Err(Error::InvalidPermutation(
                    "ragged shift-tag rows in family serialization".into(),
                ));
            }
            let columns = row
                .iter()
                .map(|&s| cyclic_permutation(s, k))
                .collect::<Result<Vec<_>>>()?;
            sets.push(PermutationSet::new(columns)?);
        }
        Self::from_sets(k, m, sets)
    }
}

impl Serialize for PermutationFamily {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Wire {
            k: usize,
            m: usize,
            sets: Vec<Vec<usize>>,
        }
        let sets = self.to_shift_tags().map_err(serde::ser::Error::custom)?;
        Wire {
            k: self.k,
            m: self.m,
            sets,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for PermutationFamily {
    fn deserialize<D: serde::Deserializer<'de>>(
        deserializer: D,
    ) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Wire {
            k: usize,
            #[allow(dead_code)]
            m: usize,
            sets: Vec<Vec<usize>>,
        }
        let wire = Wire::deserialize(deserializer)?;
        PermutationFamily::from_shift_tags(wire.k, &wire.sets).map_err(serde::de::Error::custom)
    }
}

fn gcd(mut a: usize, mut b: usize) -> usize {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Number of admissible cyclic sets: `|{i in 1..K-1 : K/gcd(i,K) >= M}|`.
pub fn max_admissible_sets(k: usize, m: usize) -> Result<usize> {
    check_k_m(k, m)?;
    Ok((1..k).filter(|&i| k / gcd(i, k) >= m).count())
}

fn check_k_m(k: usize, m: usize) -> Result<()> {
    if m < 2 || m > k {
        return Err(Error::InvalidParameter(format!(
            "need 2 <= M <= K, got M = {m}, K = {k}"
        )));
    }
    Ok(())
}

/// Builds the cyclic family for `(K, M)` truncated to `i_requested` sets.
///
/// Inadmissible `i` are skipped; if fewer admissible sets exist than were
/// requested the full admissible family is returned with its shortfall flag
/// set.
pub fn build_family(k: usize, m: usize, i_requested: usize) -> Result<PermutationFamily> {
    check_k_m(k, m)?;
    if i_requested == 0 {
        return Err(Error::InvalidParameter("requested zero sets".into()));
    }
    let mut sets = Vec::new();
    for i in 1..k {
        if sets.len() == i_requested {
            break;
        }
        if k / gcd(i, k) < m {
            continue;
        }
        let columns = (1..=m)
            .map(|j| cyclic_permutation((i * (j - 1)) % k + 1, k))
            .collect::<Result<Vec<_>>>()?;
        sets.push(PermutationSet::new(columns)?);
    }
    let shortfall = sets.len() < i_requested;
    let mut family = PermutationFamily::from_sets(k, m, sets)?;
    family.shortfall = shortfall;
    Ok(family)
}

/// A row of one set reuses the same source row twice: `pi_j(k) = pi_r(k)`.
/// All indices are reported 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WithinSetViolation {
    pub set: usize,
    pub k: usize,
    pub col_j: usize,
    pub col_r: usize,
}

/// Two samples share more than one sub-sample: `pi^(i)_j(k) = pi^(l)_j(h)`
/// for two or more columns `j`. `set_l = 0` denotes the original samples
/// (identity permutations). All indices are reported 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CollisionViolation {
    pub set_i: usize,
    pub set_l: usize,
    pub k: usize,
    pub h: usize,
    pub collisions: usize,
}

/// Diagnostic output of [`validate_family`].
#[derive(Debug, Clone, Default, Serialize)]
pub struct ValidationReport {
    pub within_set: Vec<WithinSetViolation>,
    pub cross_set: Vec<CollisionViolation>,
    /// Cross checks of each set against the original (identity) samples.
    pub vs_original: Vec<CollisionViolation>,
    /// Pairs of identical sets (1-based indices).
    pub duplicate_sets: Vec<(usize, usize)>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.within_set.is_empty()
            && self.cross_set.is_empty()
            && self.vs_original.is_empty()
            && self.duplicate_sets.is_empty()
    }

    pub fn violation_count(&self) -> usize {
        self.within_set.len()
            + self.cross_set.len()
            + self.vs_original.len()
            + self.duplicate_sets.len()
    }
}

/// Checks every family condition by enumeration and reports all violations.
pub fn validate_family(family: &PermutationFamily) -> ValidationReport {
    let mut report = ValidationReport::default();
    let k = family.k();
    let sets = family.sets();

    // Within-set distinctness.
    for (i, set) in sets.iter().enumerate() {
        for k0 in 0..k {
            for j in 0..set.m() {
                for r in (j + 1)..set.m() {
                    if set.column(j).apply(k0) == set.column(r).apply(k0) {
                        report.within_set.push(WithinSetViolation {
                            set: i + 1,
                            k: k0 + 1,
                            col_j: j + 1,
                            col_r: r + 1,
                        });
                    }
                }
            }
        }
    }

    // Cross-set collisions: for rows k of set i and h of set l, count the
    // columns j with pi^(i)_j(k) = pi^(l)_j(h); more than one is a violation.
    let inverses: Vec<Vec<Permutation>> = sets
        .iter()
        .map(|set| set.columns().iter().map(Permutation::inverse).collect())
        .collect();
    for i in 0..sets.len() {
        for l in (i + 1)..sets.len() {
            collision_scan(sets, &inverses, i, l, k, &mut report.cross_set);
            if sets[i] == sets[l] {
                report.duplicate_sets.push((i + 1, l + 1));
            }
        }
    }

    // Each additional sample shares at most one sub-sample with each
    // original sample: pi^(i)_j(k) = h for at most one column j.
    for (i, set) in sets.iter().enumerate() {
        for k0 in 0..k {
            let mut hits = vec![0usize; k];
            for j in 0..set.m() {
                hits[set.column(j).apply(k0)] += 1;
            }
            for (h0, &count) in hits.iter().enumerate() {
                if count > 1 {
                    report.vs_original.push(CollisionViolation {
                        set_i: i + 1,
                        set_l: 0,
                        k: k0 + 1,
                        h: h0 + 1,
                        collisions: count,
                    });
                }
            }
        }
    }

    report
}

fn collision_scan(
    sets: &[PermutationSet],
    inverses: &[Vec<Permutation>],
    i: usize,
    l: usize,
    k: usize,
    out: &mut Vec<CollisionViolation>,
) {
    let m = sets[i].m();
    for k0 in 0..k {
        // h(j) solves pi^(l)_j(h) = pi^(i)_j(k0); count multiplicities.
        let mut hits = vec![0usize; k];
        for j in 0..m {
            let target = sets[i].column(j).apply(k0);
            hits[inverses[l][j].apply(target)] += 1;
        }
        for (h0, &count) in hits.iter().enumerate() {
            if count > 1 {
                out.push(CollisionViolation {
                    set_i: i + 1,
                    set_l: l + 1,
                    k: k0 + 1,
                    h: h0 + 1,
                    collisions: count,
                });
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tags(family: &PermutationFamily) -> Vec<Vec<usize>> {
        family.to_shift_tags().unwrap()
    }

    #[test]
    fn cyclic_shift_one_is_identity() {
        let p = cyclic_permutation(1, 5).unwrap();
        assert_eq!(p, Permutation::identity(5));
        let one_based: Vec<usize> = (0..5).map(|k| p.apply(k) + 1).collect();
        assert_eq!(one_based, vec![1, 2, 3, 4, 5]);
    }

    #[test]
    fn cyclic_formula_cases() {
        let p = cyclic_permutation(2, 3).unwrap();
        let img: Vec<usize> = (0..3).map(|k| p.apply(k) + 1).collect();
        assert_eq!(img, vec![2, 3, 1]);

        let p = cyclic_permutation(4, 4).unwrap();
        let img: Vec<usize> = (0..4).map(|k| p.apply(k) + 1).collect();
        assert_eq!(img, vec![4, 1, 2, 3]);

        assert!(cyclic_permutation(0, 4).is_err());
        assert!(cyclic_permutation(5, 4).is_err());
    }

    #[test]
    fn family_k8_m4_matches_known_shift_table() {
        let family = build_family(8, 4, 7).unwrap();
        assert_eq!(family.len(), 6);
        assert!(family.shortfall());
        assert_eq!(
            tags(&family),
            vec![
                vec![1, 2, 3, 4],
                vec![1, 3, 5, 7],
                vec![1, 4, 7, 2],
                vec![1, 6, 3, 8],
                vec![1, 7, 5, 3],
                vec![1, 8, 7, 6],
            ]
        );
        assert!(validate_family(&family).is_valid());
    }

    #[test]
    fn prime_k_gives_k_minus_one_sets() {
        let family = build_family(7, 4, 6).unwrap();
        assert_eq!(family.len(), 6);
        assert!(!family.shortfall());
        assert!(validate_family(&family).is_valid());
    }

    #[test]
    fn smallest_family() {
        let family = build_family(4, 2, 1).unwrap();
        assert_eq!(tags(&family), vec![vec![1, 2]]);
    }

    #[test]
    fn max_admissible_counts() {
        assert_eq!(max_admissible_sets(8, 4).unwrap(), 6);
        assert_eq!(max_admissible_sets(7, 4).unwrap(), 6);
        assert_eq!(max_admissible_sets(6, 6).unwrap(), 2);
        assert!(max_admissible_sets(4, 1).is_err());
        assert!(max_admissible_sets(4, 5).is_err());
    }

    #[test]
    fn duplicate_identity_sets_flagged_everywhere() {
        let k = 3;
        let ident = PermutationSet::new(vec![Permutation::identity(k); 2]).unwrap();
        let family = PermutationFamily::from_sets(k, 2, vec![ident.clone(), ident]).unwrap();
        let report = validate_family(&family);
        assert!(!report.is_valid());
        // All M columns of the identity set collide row-wise.
        assert!(!report.within_set.is_empty());
        let diag: Vec<(usize, usize)> = report
            .cross_set
            .iter()
            .map(|v| (v.k, v.h))
            .collect();
        for k0 in 1..=k {
            assert!(diag.contains(&(k0, k0)), "missing collision at ({k0}, {k0})");
        }
        assert_eq!(report.duplicate_sets, vec![(1, 2)]);
        assert!(!report.vs_original.is_empty());
    }

    #[test]
    fn repeated_valid_set_flagged_duplicate() {
        let set = || {
            PermutationSet::new(vec![
                cyclic_permutation(1, 3).unwrap(),
                cyclic_permutation(2, 3).unwrap(),
            ])
            .unwrap()
        };
        let family = PermutationFamily::from_sets(3, 2, vec![set(), set()]).unwrap();
        let report = validate_family(&family);
        assert_eq!(report.duplicate_sets, vec![(1, 2)]);
        assert!(!report.cross_set.is_empty());
        // Each set alone is fine.
        assert!(report.within_set.is_empty());
        assert!(report.vs_original.is_empty());
    }

    #[test]
    fn build_family_is_pure() {
        let a = build_family(12, 4, 8).unwrap();
        let b = build_family(12, 4, 8).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn shift_tag_round_trip() {
        let family = build_family(8, 4, 6).unwrap();
        let json = serde_json::to_string(&family).unwrap();
        let back: PermutationFamily = serde_json::from_str(&json).unwrap();
        assert_eq!(family, back);
    }
}
