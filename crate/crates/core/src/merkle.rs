//! Fixed-depth, append-only sha256 Merkle tree of note commitments.
//!
//! Only the filled prefix of each level is stored; every node to the right of
//! it equals the empty-subtree digest of its height, so roots and paths are
//! identical to those of the fully materialized tree.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::crypto::{hash_parts, Digest256};

pub const MAX_DEPTH: usize = 32;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MerkleError {
    #[error("tree depth {0} outside 1..={MAX_DEPTH}")]
    DepthOutOfRange(usize),
    #[error("tree is full ({0} leaves)")]
    TreeFull(u64),
    #[error("leaf address {0} has not been filled")]
    AddressUnused(u64),
    #[error("leaf count {count} exceeds capacity of a depth-{depth} tree")]
    TooManyLeaves { depth: usize, count: usize },
}

/// Internal node: `hash(left || right)`.
pub fn hash_pair(left: &Digest256, right: &Digest256) -> Digest256 {
    hash_parts([&left.0[..], &right.0[..]])
}

/// `Z_0 = 0^32`, `Z_{i+1} = hash(Z_i || Z_i)` for `i < depth`.
pub fn empty_roots(depth: usize) -> Vec<Digest256> {
    let mut zeros = Vec::with_capacity(depth + 1);
    zeros.push(Digest256::default());
    for i in 0..depth {
        let z = hash_pair(&zeros[i], &zeros[i]);
        zeros.push(z);
    }
    zeros
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct MerklePath {
    pub leaf_address: u64,
    /// Ordered leaf to root.
    pub siblings: Vec<Digest256>,
    /// `true` where the running node is the right child, leaf to root.
    pub directions: Vec<bool>,
}

impl MerklePath {
    pub fn depth(&self) -> usize {
        self.siblings.len()
    }

    /// A well-formed path that authenticates nothing in particular; used by
    /// zero-valued dummy inputs.
    pub fn dummy(depth: usize) -> Self {
        Self { leaf_address: 0, siblings: vec![Digest256::default(); depth], directions: vec![false; depth] }
    }

    /// Root obtained by folding `leaf` upward.
    pub fn root_for(&self, leaf: &Digest256) -> Digest256 {
        self.siblings.iter().zip(&self.directions).fold(*leaf, |node, (sibling, &is_right)| {
            if is_right {
                hash_pair(sibling, &node)
            } else {
                hash_pair(&node, sibling)
            }
        })
    }

    /// Direction bits must spell out `leaf_address`.
    fn directions_match_address(&self) -> bool {
        let depth = self.depth();
        if depth < 64 && self.leaf_address >> depth != 0 {
            return false;
        }
        self.directions.iter().enumerate().all(|(level, &bit)| ((self.leaf_address >> level) & 1 == 1) == bit)
    }
}

/// True iff the path is well-formed for its own address and folds `leaf` to `root`.
pub fn verify_path(leaf: &Digest256, path: &MerklePath, root: &Digest256) -> bool {
    path.siblings.len() == path.directions.len() && path.directions_match_address() && path.root_for(leaf) == *root
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct MerkleTree {
    depth: usize,
    /// `levels[0]` are the leaves; `levels[depth]` holds at most the root.
    levels: Vec<Vec<Digest256>>,
    zeros: Vec<Digest256>,
}

impl MerkleTree {
    pub fn new(depth: usize) -> Result<Self, MerkleError> {
        if !(1..=MAX_DEPTH).contains(&depth) {
            return Err(MerkleError::DepthOutOfRange(depth));
        }
        Ok(Self { depth, levels: vec![Vec::new(); depth + 1], zeros: empty_roots(depth) })
    }

    /// Builds a tree by appending `leaves` in order.
    pub fn from_leaves(depth: usize, leaves: &[Digest256]) -> Result<Self, MerkleError> {
        let mut tree = Self::new(depth)?;
        if leaves.len() as u64 > tree.capacity() {
            return Err(MerkleError::TooManyLeaves { depth, count: leaves.len() });
        }
        for leaf in leaves {
            tree.append(*leaf)?;
        }
        Ok(tree)
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn capacity(&self) -> u64 {
        1u64 << self.depth
    }

    pub fn len(&self) -> u64 {
        self.levels[0].len() as u64
    }

    pub fn is_empty(&self) -> bool {
        self.levels[0].is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.len() == self.capacity()
    }

    pub fn leaves(&self) -> &[Digest256] {
        &self.levels[0]
    }

    pub fn leaf(&self, address: u64) -> Option<Digest256> {
        self.levels[0].get(address as usize).copied()
    }

    pub fn root(&self) -> Digest256 {
        self.levels[self.depth].first().copied().unwrap_or(self.zeros[self.depth])
    }

    fn node(&self, level: usize, index: usize) -> Digest256 {
        self.levels[level].get(index).copied().unwrap_or(self.zeros[level])
    }

    /// Places `cm` at the next free address and returns that address.
    pub fn append(&mut self, cm: Digest256) -> Result<u64, MerkleError> {
        if self.is_full() {
            return Err(MerkleError::TreeFull(self.capacity()));
        }
        let address = self.len();
        self.levels[0].push(cm);
        let mut index = address as usize;
        for level in 0..self.depth {
            let parent = index / 2;
            let left = self.node(level, parent * 2);
            let right = self.node(level, parent * 2 + 1);
            let digest = hash_pair(&left, &right);
            let row = &mut self.levels[level + 1];
            if parent < row.len() {
                row[parent] = digest;
            } else {
                row.push(digest);
            }
            index = parent;
        }
        Ok(address)
    }

    /// Authentication path of a filled leaf against the current root.
    pub fn path(&self, leaf_address: u64) -> Result<MerklePath, MerkleError> {
        if leaf_address >= self.len() {
            return Err(MerkleError::AddressUnused(leaf_address));
        }
        let mut siblings = Vec::with_capacity(self.depth);
        let mut directions = Vec::with_capacity(self.depth);
        let mut index = leaf_address as usize;
        for level in 0..self.depth {
            siblings.push(self.node(level, index ^ 1));
            directions.push(index & 1 == 1);
            index /= 2;
        }
        Ok(MerklePath { leaf_address, siblings, directions })
    }

    /// Address of the first leaf equal to `cm`.
    pub fn position(&self, cm: &Digest256) -> Option<u64> {
        self.levels[0].iter().position(|l| l == cm).map(|p| p as u64)
    }
}

/// On-disk form: depth, leaf count and hex leaves.
#[derive(Serialize, Deserialize)]
struct MerkleTreeFile {
    depth: usize,
    leaf_count: u64,
    leaves: Vec<Digest256>,
}

impl Serialize for MerkleTree {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        MerkleTreeFile { depth: self.depth, leaf_count: self.len(), leaves: self.levels[0].clone() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for MerkleTree {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let file = MerkleTreeFile::deserialize(d)?;
        if file.leaf_count != file.leaves.len() as u64 {
            return Err(D::Error::custom(format!(
                "leaf_count {} does not match {} leaves",
                file.leaf_count,
                file.leaves.len()
            )));
        }
        MerkleTree::from_leaves(file.depth, &file.leaves).map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crypto::hash;
    use proptest::prelude::*;
    use sha2::{Digest, Sha256};

    /// Independent oracle: materialize all 2^depth leaves and hash level by level.
    fn brute_force_root(depth: usize, leaves: &[Digest256]) -> Digest256 {
        let mut level: Vec<[u8; 32]> =
            (0..1usize << depth).map(|i| leaves.get(i).map(|d| d.0).unwrap_or([0u8; 32])).collect();
        while level.len() > 1 {
            level = level
                .chunks(2)
                .map(|pair| {
                    let mut h = Sha256::new();
                    h.update(pair[0]);
                    h.update(pair[1]);
                    h.finalize().into()
                })
                .collect();
        }
        Digest256(level[0])
    }

    fn leaf(i: u64) -> Digest256 {
        hash(&i.to_be_bytes())
    }

    #[test]
    fn empty_roots_match_vectors() {
        let t1 = MerkleTree::new(1).unwrap();
        assert_eq!(t1.root().to_hex(), "f5a5fd42d16a20302798ef6ed309979b43003d2320d9f0e8ea9831a92759fb4b");
        let t2 = MerkleTree::new(2).unwrap();
        assert_eq!(t2.root().to_hex(), "db56114e00fdd4c1f85c892bf35ac9a89289aaecb1ebd0a96cde606a748b5d71");
    }

    #[test]
    fn depth_bounds() {
        assert_eq!(MerkleTree::new(0), Err(MerkleError::DepthOutOfRange(0)));
        assert_eq!(MerkleTree::new(33), Err(MerkleError::DepthOutOfRange(33)));
        assert!(MerkleTree::new(32).is_ok());
    }

    #[test]
    fn append_until_full() {
        let mut t = MerkleTree::new(2).unwrap();
        for i in 0..4 {
            assert_eq!(t.append(leaf(i)).unwrap(), i);
        }
        assert_eq!(t.append(leaf(4)), Err(MerkleError::TreeFull(4)));
        assert_eq!(t.root(), brute_force_root(2, &(0..4).map(leaf).collect::<Vec<_>>()));
    }

    #[test]
    fn incremental_matches_brute_force() {
        for depth in 1..=4 {
            let mut t = MerkleTree::new(depth).unwrap();
            let mut leaves = Vec::new();
            assert_eq!(t.root(), brute_force_root(depth, &leaves));
            for i in 0..(1u64 << depth) {
                leaves.push(leaf(i));
                t.append(leaf(i)).unwrap();
                assert_eq!(t.root(), brute_force_root(depth, &leaves));
            }
        }
    }

    #[test]
    fn single_leaf_path_uses_empty_subtrees() {
        let mut t = MerkleTree::new(3).unwrap();
        t.append(leaf(0)).unwrap();
        let p = t.path(0).unwrap();
        assert_eq!(p.siblings, empty_roots(3)[..3].to_vec());
        assert!(verify_path(&leaf(0), &p, &t.root()));
    }

    #[test]
    fn path_errors_and_mutations() {
        let mut t = MerkleTree::new(3).unwrap();
        assert_eq!(t.path(0), Err(MerkleError::AddressUnused(0)));
        for i in 0..5 {
            t.append(leaf(i)).unwrap();
        }
        let root = t.root();
        let p = t.path(3).unwrap();
        assert!(verify_path(&leaf(3), &p, &root));
        assert!(!verify_path(&leaf(2), &p, &root));
        for level in 0..3 {
            let mut flipped = p.clone();
            flipped.directions[level] = !flipped.directions[level];
            assert!(!verify_path(&leaf(3), &flipped, &root));
            let mut bad_sibling = p.clone();
            bad_sibling.siblings[level].0[0] ^= 1;
            assert!(!verify_path(&leaf(3), &bad_sibling, &root));
        }
        let mut moved = p.clone();
        moved.leaf_address = 2;
        assert!(!verify_path(&leaf(3), &moved, &root));
    }

    #[test]
    fn stale_root_after_appends() {
        let mut t = MerkleTree::new(3).unwrap();
        t.append(leaf(0)).unwrap();
        let old_root = t.root();
        let old_path = t.path(0).unwrap();
        t.append(leaf(1)).unwrap();
        let new_path = t.path(0).unwrap();
        assert!(verify_path(&leaf(0), &old_path, &old_root));
        assert!(!verify_path(&leaf(0), &new_path, &old_root));
        assert!(verify_path(&leaf(0), &new_path, &t.root()));
    }

    #[test]
    fn json_round_trip_and_validation() {
        let t = MerkleTree::from_leaves(4, &(0..7).map(leaf).collect::<Vec<_>>()).unwrap();
        let json = serde_json::to_value(&t).unwrap();
        assert_eq!(json["depth"], 4);
        assert_eq!(json["leaf_count"], 7);
        let back: MerkleTree = serde_json::from_value(json.clone()).unwrap();
        assert_eq!(back, t);
        let mut bad = json;
        bad["leaf_count"] = 6.into();
        assert!(serde_json::from_value::<MerkleTree>(bad).is_err());
    }

    proptest! {
        #[test]
        fn every_filled_leaf_authenticates(depth in 1usize..=5, n in 1u64..=32, probe in 0u64..32) {
            let n = n.min(1 << depth);
            let t = MerkleTree::from_leaves(depth, &(0..n).map(leaf).collect::<Vec<_>>()).unwrap();
            for a in 0..n {
                prop_assert!(verify_path(&leaf(a), &t.path(a).unwrap(), &t.root()));
            }
            let a = probe % n;
            let other = leaf(a + 1000);
            prop_assert!(!verify_path(&other, &t.path(a).unwrap(), &t.root()));
        }
    }
}
