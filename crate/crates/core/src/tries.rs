//! Prefix trees over canonical term encodings.
//!
//! The engine keeps two kinds: one call trie mapping call variants to tables,
//! and one answer trie per table for duplicate detection and enumeration.
//! Answers are stored as full canonical token paths (no substitution
//! factoring).

use indexmap::IndexMap;
use rustc_hash::FxBuildHasher;

use crate::terms::{FrozenTerm, Token, VariantKey};

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct LeafId(u32);

#[derive(Debug, Clone)]
struct Node<P> {
    // Insertion-ordered so that enumeration is deterministic.
    children: IndexMap<Token, u32, FxBuildHasher>,
    value: Option<P>,
}

impl<P> Node<P> {
    fn new() -> Self {
        Node { children: IndexMap::default(), value: None }
    }
}

#[derive(Debug, Clone)]
pub struct Trie<P> {
    nodes: Vec<Node<P>>,
    leaves: usize,
}

impl<P> Default for Trie<P> {
    fn default() -> Self {
        Self::new()
    }
}

impl<P> Trie<P> {
    pub fn new() -> Self {
        Trie { nodes: vec![Node::new()], leaves: 0 }
    }

    pub fn len(&self) -> usize {
        self.leaves
    }

    pub fn is_empty(&self) -> bool {
        self.leaves == 0
    }

    /// Inserts `key`, creating the leaf payload with `make` only if the key
    /// is new. Returns the leaf and whether it was created.
    pub fn insert_with(&mut self, key: &VariantKey, make: impl FnOnce() -> P) -> (LeafId, bool) {
        let mut node = 0u32;
        for token in key.tokens() {
            node = match self.nodes[node as usize].children.get(token) {
                Some(&child) => child,
                None => {
                    let child = self.nodes.len() as u32;
                    self.nodes.push(Node::new());
                    self.nodes[node as usize].children.insert(token.clone(), child);
                    child
                }
            };
        }
        let slot = &mut self.nodes[node as usize].value;
        if slot.is_some() {
            return (LeafId(node), false);
        }
        *slot = Some(make());
        self.leaves += 1;
        (LeafId(node), true)
    }

    pub fn lookup(&self, key: &VariantKey) -> Option<LeafId> {
        let mut node = 0u32;
        for token in key.tokens() {
            node = *self.nodes[node as usize].children.get(token)?;
        }
        self.nodes[node as usize].value.as_ref().map(|_| LeafId(node))
    }

    pub fn payload(&self, leaf: LeafId) -> &P {
        self.nodes[leaf.0 as usize].value.as_ref().expect("leaf handle")
    }

    pub fn payload_mut(&mut self, leaf: LeafId) -> &mut P {
        self.nodes[leaf.0 as usize].value.as_mut().expect("leaf handle")
    }

    /// Every leaf as its canonical term, in depth-first insertion order.
    pub fn iter(&self) -> TrieIter<'_, P> {
        TrieIter { trie: self, stack: vec![(0, 0)], path: Vec::new(), root_pending: true }
    }

    pub fn terms(&self) -> Vec<FrozenTerm> {
        self.iter().map(|(t, _)| t).collect()
    }
}

impl<P: Default> Trie<P> {
    pub fn insert(&mut self, key: &VariantKey) -> (LeafId, bool) {
        self.insert_with(key, P::default)
    }
}

pub struct TrieIter<'t, P> {
    trie: &'t Trie<P>,
    // (node, next child position); `path` holds the tokens leading to the top node.
    stack: Vec<(u32, usize)>,
    path: Vec<Token>,
    root_pending: bool,
}

impl<'t, P> Iterator for TrieIter<'t, P> {
    type Item = (FrozenTerm, &'t P);

    fn next(&mut self) -> Option<Self::Item> {
        if self.root_pending {
            self.root_pending = false;
            // Only the empty key ends at the root; never produced by terms.
            if let Some(v) = &self.trie.nodes[0].value {
                return Some((FrozenTerm::from_tokens(&[]), v));
            }
        }
        while let Some((node, pos)) = self.stack.last_mut() {
            let children = &self.trie.nodes[*node as usize].children;
            if *pos >= children.len() {
                self.stack.pop();
                self.path.pop();
                continue;
            }
            let (token, &child) = children.get_index(*pos).unwrap();
            *pos += 1;
            self.path.push(token.clone());
            self.stack.push((child, 0));
            if let Some(v) = &self.trie.nodes[child as usize].value {
                return Some((FrozenTerm::from_tokens(&self.path), v));
            }
        }
        None
    }
}
