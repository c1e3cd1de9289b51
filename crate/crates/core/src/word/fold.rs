//! Stallings folding of a wedge of labelled loops.

use std::collections::{BTreeSet, HashMap};

use crate::word::{FreeWord, Sign};
use crate::{Error, Result};

/// Folded graph: vertices `0..vertices`, base vertex 0, directed edges labelled by generator index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldedGraph {
    pub vertices: usize,
    pub edges: Vec<(usize, usize, usize)>,
}

impl FoldedGraph {
    /// First Betti number `|E| - |V| + 1`.
    pub fn rank(&self) -> usize {
        self.edges.len() + 1 - self.vertices
    }

    /// Builds the wedge of loops spelling each word at the base vertex and folds it.
    pub fn fold(words: &[FreeWord]) -> Result<FoldedGraph> {
        if words.is_empty() {
            return Err(Error::invalid("need at least one word"));
        }
        let mut vertices = 1;
        let mut edges: Vec<(usize, usize, usize)> = Vec::new();
        for w in words {
            if w.is_empty() {
                return Err(Error::invalid("generators must be nontrivial"));
            }
            let mut at = 0;
            for (k, v) in w.letters().iter().enumerate() {
                let next = if k + 1 == w.len() {
                    0
                } else {
                    vertices += 1;
                    vertices - 1
                };
                match v.sign {
                    Sign::Pos => edges.push((at, v.index, next)),
                    Sign::Neg => edges.push((next, v.index, at)),
                }
                at = next;
            }
        }

        let mut uf = UnionFind::new(vertices);
        loop {
            let mut merged = false;
            let mut out: HashMap<(usize, usize), usize> = HashMap::new();
            let mut inc: HashMap<(usize, usize), usize> = HashMap::new();
            for &(s, label, t) in &edges {
                let (s, t) = (uf.find(s), uf.find(t));
                if let Some(&t2) = out.get(&(s, label)) {
                    merged |= uf.union(t, t2);
                } else {
                    out.insert((s, label), t);
                }
                let t = uf.find(t);
                let s = uf.find(s);
                if let Some(&s2) = inc.get(&(t, label)) {
                    merged |= uf.union(s, s2);
                } else {
                    inc.insert((t, label), s);
                }
            }
            if !merged {
                break;
            }
        }

        let mut roots: Vec<usize> = (0..vertices).map(|v| uf.find(v)).collect();
        let base = roots[0];
        let mut ids: HashMap<usize, usize> = HashMap::from([(base, 0)]);
        for r in roots.iter_mut() {
            let next = ids.len();
            *r = *ids.entry(*r).or_insert(next);
        }
        let folded: BTreeSet<(usize, usize, usize)> = edges
            .iter()
            .map(|&(s, l, t)| (roots[s], l, roots[t]))
            .collect();
        Ok(FoldedGraph {
            vertices: ids.len(),
            edges: folded.into_iter().collect(),
        })
    }
}

/// Rank of the subgroup of `F_r` generated by `words`.
pub fn stallings_rank(words: &[FreeWord]) -> Result<usize> {
    Ok(FoldedGraph::fold(words)?.rank())
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (a, b) = (self.find(a), self.find(b));
        if a == b {
            return false;
        }
        self.parent[a.max(b)] = a.min(b);
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn words(texts: &[&str], r: usize) -> Vec<FreeWord> {
        texts
            .iter()
            .map(|t| FreeWord::parse(t, r).unwrap())
            .collect()
    }

    #[test]
    fn ranks() {
        assert_eq!(stallings_rank(&words(&["x1", "x2"], 2)).unwrap(), 2);
        assert_eq!(stallings_rank(&words(&["x1", "x1^2"], 2)).unwrap(), 1);
        assert_eq!(
            stallings_rank(&words(&["x1^2", "x2^2", "x1 x2"], 2)).unwrap(),
            3
        );
        assert_eq!(
            stallings_rank(&words(&["x1 x2", "x2 x1", "x1"], 2)).unwrap(),
            2
        );
        assert_eq!(stallings_rank(&words(&["x1^2 x2 x1^-2"], 2)).unwrap(), 1);
    }

    #[test]
    fn folded_graph_is_deterministic() {
        let g = FoldedGraph::fold(&words(&["x1^2", "x2^2", "x1 x2"], 2)).unwrap();
        assert_eq!(g.vertices, 2);
        assert_eq!(g.edges.len(), 4);
        assert!(g.edges.iter().all(|&(_, l, _)| l == 1 || l == 2));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(stallings_rank(&[]).is_err());
        assert!(stallings_rank(&[FreeWord::identity(2)]).is_err());
    }
}
