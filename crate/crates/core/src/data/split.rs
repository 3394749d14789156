use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{ClassCounts, DataError, Manifest, Provenance};
use crate::label::ClassLabel;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitSizes {
    pub train: usize,
    pub val: usize,
    pub test: usize,
}

impl SplitSizes {
    pub fn new(train: usize, val: usize, test: usize) -> Self {
        SplitSizes { train, val, test }
    }

    pub fn total(&self) -> usize {
        self.train + self.val + self.test
    }
}

/// Train/val/test partition of video ids. Ids within each split are sorted.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitSet {
    pub name: String,
    pub train: Vec<String>,
    pub val: Vec<String>,
    pub test: Vec<String>,
    pub seed: u64,
    pub balanced: bool,
}

impl SplitSet {
    pub fn splits(&self) -> [(&'static str, &[String]); 3] {
        [("train", &self.train), ("val", &self.val), ("test", &self.test)]
    }

    /// Pairwise overlaps between the three splits; empty when disjoint.
    pub fn overlaps(&self) -> Vec<(&'static str, &'static str, Vec<String>)> {
        let s = self.splits();
        let mut out = Vec::new();
        for i in 0..3 {
            for j in (i + 1)..3 {
                let common = check_disjoint(s[i].1, s[j].1);
                if !common.is_empty() {
                    out.push((s[i].0, s[j].0, common));
                }
            }
        }
        out
    }

    pub fn class_counts(&self, manifest: &Manifest) -> BTreeMap<&'static str, ClassCounts> {
        self.splits()
            .into_iter()
            .map(|(name, ids)| {
                let mut counts = ClassCounts::default();
                for gt in ids.iter().filter_map(|id| manifest.get(id)?.ground_truth()) {
                    counts.add(gt.label);
                }
                (name, counts)
            })
            .collect()
    }

    pub fn all_ids(&self) -> impl Iterator<Item = &String> {
        self.train.iter().chain(&self.val).chain(&self.test)
    }
}

/// Intersection of two id collections, sorted.
pub fn check_disjoint<A, B>(a: A, b: B) -> Vec<String>
where
    A: IntoIterator,
    A::Item: AsRef<str>,
    B: IntoIterator,
    B::Item: AsRef<str>,
{
    let left: BTreeSet<String> = a.into_iter().map(|s| s.as_ref().to_string()).collect();
    let right: BTreeSet<String> = b.into_iter().map(|s| s.as_ref().to_string()).collect();
    left.intersection(&right).cloned().collect()
}

/// Ids of `universe` not present in any of `remove`, in `universe` order.
pub fn set_difference<S: AsRef<str>>(universe: &[S], remove: &[&[S]]) -> Vec<String> {
    let drop: BTreeSet<&str> = remove.iter().flat_map(|r| r.iter().map(AsRef::as_ref)).collect();
    universe
        .iter()
        .map(AsRef::as_ref)
        .filter(|id| !drop.contains(id))
        .map(str::to_string)
        .collect()
}

struct Pools {
    manual: [Vec<String>; 2],
    pseudo: [Vec<String>; 2],
}

impl Pools {
    fn collect(manifest: &Manifest) -> Self {
        let mut pools = Pools { manual: Default::default(), pseudo: Default::default() };
        for entry in manifest.entries() {
            if let Some(gt) = entry.ground_truth() {
                let bucket = match entry.provenance {
                    Provenance::Manual => &mut pools.manual,
                    Provenance::Pseudo => &mut pools.pseudo,
                };
                bucket[gt.label.index()].push(gt.video_id);
            }
        }
        pools
    }

    fn manual_len(&self) -> usize {
        self.manual.iter().map(Vec::len).sum()
    }

    fn pseudo_len(&self) -> usize {
        self.pseudo.iter().map(Vec::len).sum()
    }
}

/// Draws disjoint train/val/test splits from the valid, timestamped videos of
/// `manifest`. Mislabeled videos are never eligible, and pseudo-labelled
/// videos only ever land in train. With `balanced`, each split gets
/// `ceil(n/2)` of one class and `floor(n/2)` of the other, the larger share
/// going to a seeded coin flip.
pub fn make_splits(
    manifest: &Manifest,
    name: impl Into<String>,
    sizes: SplitSizes,
    balanced: bool,
    seed: u64,
) -> Result<SplitSet, DataError> {
    let mut pools = Pools::collect(manifest);
    let available = pools.manual_len() + pools.pseudo_len();
    if sizes.total() > available {
        return Err(DataError::InsufficientSamples { requested: sizes.total(), available });
    }
    if sizes.val + sizes.test > pools.manual_len() {
        return Err(DataError::InsufficientSamples {
            requested: sizes.val + sizes.test,
            available: pools.manual_len(),
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for pool in pools.manual.iter_mut().chain(pools.pseudo.iter_mut()) {
        pool.shuffle(&mut rng);
    }

    let (test, val, train) = if balanced {
        let test = draw_balanced(&mut pools.manual, None, sizes.test, "test", &mut rng)?;
        let val = draw_balanced(&mut pools.manual, None, sizes.val, "val", &mut rng)?;
        let train = draw_balanced(&mut pools.manual, Some(&mut pools.pseudo), sizes.train, "train", &mut rng)?;
        (test, val, train)
    } else {
        let mut manual: Vec<String> = pools.manual.into_iter().flatten().collect();
        manual.shuffle(&mut rng);
        let test: Vec<String> = manual.drain(..sizes.test).collect();
        let val: Vec<String> = manual.drain(..sizes.val).collect();
        let mut rest: Vec<String> = manual.into_iter().chain(pools.pseudo.into_iter().flatten()).collect();
        rest.shuffle(&mut rng);
        rest.truncate(sizes.train);
        (test, val, rest)
    };

    let sorted = |mut v: Vec<String>| {
        v.sort();
        v
    };
    Ok(SplitSet {
        name: name.into(),
        train: sorted(train),
        val: sorted(val),
        test: sorted(test),
        seed,
        balanced,
    })
}

fn draw_balanced(
    manual: &mut [Vec<String>; 2],
    mut pseudo: Option<&mut [Vec<String>; 2]>,
    size: usize,
    split: &'static str,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<String>, DataError> {
    let (hi, lo) = (size.div_ceil(2), size / 2);
    let quotas = if rng.random_bool(0.5) { [hi, lo] } else { [lo, hi] };
    let mut out = Vec::with_capacity(size);
    for (class, &quota) in ClassLabel::ACTIONS.iter().zip(&quotas) {
        let c = class.index();
        let extra = pseudo.as_ref().map_or(0, |p| p[c].len());
        let available = manual[c].len() + extra;
        if quota > available {
            return Err(DataError::InsufficientClass { split, class: *class, requested: quota, available });
        }
        let from_manual = quota.min(manual[c].len());
        out.extend(manual[c].drain(..from_manual));
        if let Some(p) = pseudo.as_deref_mut() {
            out.extend(p[c].drain(..quota - from_manual));
        }
    }
    Ok(out)
}
