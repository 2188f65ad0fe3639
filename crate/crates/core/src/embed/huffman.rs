use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::{Error, Result};

/// Huffman codes over a vocabulary, as used by the hierarchical softmax.
///
/// For word `w`, `code(w)[j]` is the branch bit taken at inner node
/// `path(w)[j]`, listed from the root down. Inner nodes are numbered in
/// creation order, so the root is `n_inner() - 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HuffmanTree {
    codes: Vec<Vec<u8>>,
    paths: Vec<Vec<u32>>,
}

impl HuffmanTree {
    /// Standard Huffman construction. On equal counts leaves win over merged
    /// nodes, lower word indices over higher ones and earlier merges over
    /// later ones. The first node popped gets bit 0, the second bit 1.
    pub fn build(counts: &[u64]) -> Result<Self> {
        let n = counts.len();
        if n < 2 {
            return Err(Error::invalid(format!(
                "Huffman tree needs at least 2 words, got {n}"
            )));
        }
        // Node ids: leaves 0..n, merged nodes n..2n-1 in creation order. The
        // id doubles as the tie-break key.
        let mut heap: BinaryHeap<Reverse<(u64, usize)>> =
            counts.iter().enumerate().map(|(i, &c)| Reverse((c, i))).collect();
        let mut parent = vec![0usize; 2 * n - 1];
        let mut bit = vec![0u8; 2 * n - 1];
        for inner in 0..n - 1 {
            let Reverse((c0, a)) = heap.pop().expect("heap holds at least two nodes");
            let Reverse((c1, b)) = heap.pop().expect("heap holds at least two nodes");
            let id = n + inner;
            parent[a] = id;
            parent[b] = id;
            bit[b] = 1;
            heap.push(Reverse((c0 + c1, id)));
        }
        let root = 2 * n - 2;
        let mut codes = Vec::with_capacity(n);
        let mut paths = Vec::with_capacity(n);
        for leaf in 0..n {
            let mut code = Vec::new();
            let mut path = Vec::new();
            let mut node = leaf;
            while node != root {
                code.push(bit[node]);
                node = parent[node];
                path.push((node - n) as u32);
            }
            code.reverse();
            path.reverse();
            codes.push(code);
            paths.push(path);
        }
        Ok(HuffmanTree { codes, paths })
    }

    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }

    pub fn n_inner(&self) -> usize {
        self.codes.len() - 1
    }

    pub fn code(&self, word: usize) -> &[u8] {
        &self.codes[word]
    }

    pub fn path(&self, word: usize) -> &[u32] {
        &self.paths[word]
    }

    /// Σ count(w) · len(code(w)).
    pub fn weighted_length(&self, counts: &[u64]) -> u64 {
        counts
            .iter()
            .zip(&self.codes)
            .map(|(&c, code)| c * code.len() as u64)
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lengths(counts: &[u64]) -> Vec<usize> {
        let t = HuffmanTree::build(counts).unwrap();
        (0..counts.len()).map(|w| t.code(w).len()).collect()
    }

    // Optimal cost by trying every merge order: every full binary tree arises
    // from some sequence of pairwise merges, whose cost is the sum of merged
    // weights.
    fn brute_force_cost(weights: &[u64]) -> u64 {
        if weights.len() <= 1 {
            return 0;
        }
        let mut best = u64::MAX;
        for i in 0..weights.len() {
            for j in i + 1..weights.len() {
                let mut rest: Vec<u64> = weights
                    .iter()
                    .enumerate()
                    .filter(|&(k, _)| k != i && k != j)
                    .map(|(_, &w)| w)
                    .collect();
                let merged = weights[i] + weights[j];
                rest.push(merged);
                best = best.min(merged + brute_force_cost(&rest));
            }
        }
        best
    }

    fn is_prefix_free(t: &HuffmanTree) -> bool {
        for a in 0..t.len() {
            for b in 0..t.len() {
                if a != b && t.code(b).starts_with(t.code(a)) {
                    return false;
                }
            }
        }
        true
    }

    #[test]
    fn two_words() {
        let t = HuffmanTree::build(&[7, 3]).unwrap();
        let mut codes = vec![t.code(0).to_vec(), t.code(1).to_vec()];
        codes.sort();
        assert_eq!(codes, vec![vec![0], vec![1]]);
        assert_eq!(t.path(0), &[0]);
        assert_eq!(t.path(1), &[0]);
    }

    #[test]
    fn hand_computed_lengths() {
        assert_eq!(lengths(&[4, 2, 1, 1]), vec![1, 2, 3, 3]);
    }

    #[test]
    fn too_small() {
        assert!(HuffmanTree::build(&[5]).is_err());
        assert!(HuffmanTree::build(&[]).is_err());
    }

    #[test]
    fn root_is_last_inner_node() {
        let t = HuffmanTree::build(&[9, 5, 3, 3, 2, 1]).unwrap();
        for w in 0..t.len() {
            assert_eq!(t.path(w)[0] as usize, t.n_inner() - 1);
            assert_eq!(t.path(w).len(), t.code(w).len());
        }
    }

    #[test]
    fn optimal_kraft_and_prefix_free() {
        let cases: [&[u64]; 6] = [
            &[1, 1],
            &[5, 1, 1],
            &[3, 3, 3, 3],
            &[10, 6, 2, 2, 1],
            &[8, 7, 5, 3, 2, 1],
            &[1, 2, 4, 8, 16, 32],
        ];
        for counts in cases {
            let t = HuffmanTree::build(counts).unwrap();
            assert_eq!(t.weighted_length(counts), brute_force_cost(counts), "{counts:?}");
            let kraft: f64 = (0..t.len()).map(|w| 0.5f64.powi(t.code(w).len() as i32)).sum();
            assert!((kraft - 1.0).abs() < 1e-15);
            assert!(is_prefix_free(&t));
        }
    }
}
