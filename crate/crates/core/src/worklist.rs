//! Completion worklists.
//!
//! A [`LocalWorklist`] is a dequeue of homogeneous batches whose order
//! encodes which (answer, dependency) pairs are still to be combined: an
//! answer sits left of a dependency iff the two have not been combined yet.
//! New answers enter on the left, new dependencies on the right, and
//! [`LocalWorklist::get_work`] swaps the leftmost adjacent
//! (answers, dependencies) pair of batches and hands out both item lists.
//!
//! The [`GlobalWorklist`] is a FIFO of tables that may have such pairs.

use std::collections::VecDeque;
use std::hash::Hash;

use rustc_hash::FxHashSet;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Batch<A, D> {
    Answers(Vec<A>),
    Dependencies(Vec<D>),
}

impl<A, D> Batch<A, D> {
    pub fn is_answers(&self) -> bool {
        matches!(self, Batch::Answers(_))
    }

    pub fn len(&self) -> usize {
        match self {
            Batch::Answers(a) => a.len(),
            Batch::Dependencies(d) => d.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Clone, Debug)]
pub struct LocalWorklist<A, D> {
    batches: VecDeque<Batch<A, D>>,
    // An end batch may grow only until a swap touches that end.
    left_open: bool,
    right_open: bool,
    // No adjacent (answers, dependencies) pair starts before this index.
    scan_from: usize,
}

impl<A, D> Default for LocalWorklist<A, D> {
    fn default() -> Self {
        LocalWorklist { batches: VecDeque::new(), left_open: false, right_open: false, scan_from: 0 }
    }
}

impl<A: Clone, D: Clone> LocalWorklist<A, D> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_answer(&mut self, answer: A) {
        if self.left_open {
            if let Some(Batch::Answers(items)) = self.batches.front_mut() {
                items.push(answer);
                return;
            }
        }
        self.batches.push_front(Batch::Answers(vec![answer]));
        self.left_open = true;
        if self.batches.len() == 1 {
            self.right_open = true;
        }
        self.scan_from = 0;
    }

    pub fn add_dependency(&mut self, dep: D) {
        if self.right_open {
            if let Some(Batch::Dependencies(items)) = self.batches.back_mut() {
                items.push(dep);
                return;
            }
        }
        self.batches.push_back(Batch::Dependencies(vec![dep]));
        self.right_open = true;
        if self.batches.len() == 1 {
            self.left_open = true;
        }
        self.scan_from = self.scan_from.min(self.batches.len().saturating_sub(2));
    }

    /// Swaps the leftmost answers batch that directly precedes a dependencies
    /// batch and returns both item lists; the caller combines their
    /// Cartesian product. `None` once every dependency is left of every
    /// answer.
    pub fn get_work(&mut self) -> Option<(Vec<A>, Vec<D>)> {
        let len = self.batches.len();
        let mut i = self.scan_from;
        while i + 1 < len {
            if self.batches[i].is_answers() && !self.batches[i + 1].is_answers() {
                break;
            }
            i += 1;
        }
        if i + 1 >= len {
            self.scan_from = len.saturating_sub(1);
            return None;
        }
        self.batches.swap(i, i + 1);
        if i == 0 {
            self.left_open = false;
        }
        if i + 2 == len {
            self.right_open = false;
        }
        self.scan_from = i.saturating_sub(1);
        let (Batch::Dependencies(deps), Batch::Answers(answers)) = (&self.batches[i], &self.batches[i + 1]) else {
            unreachable!("swapped pair has the wrong kinds")
        };
        Some((answers.clone(), deps.clone()))
    }
}

impl<A, D> LocalWorklist<A, D> {
    pub fn batches(&self) -> impl Iterator<Item = &Batch<A, D>> {
        self.batches.iter()
    }

    pub fn batch_count(&self) -> usize {
        self.batches.len()
    }

    pub fn is_empty(&self) -> bool {
        self.batches.is_empty()
    }

    pub fn dependency_count(&self) -> usize {
        self.batches.iter().filter(|b| !b.is_answers()).map(Batch::len).sum()
    }

    pub fn answer_count(&self) -> usize {
        self.batches.iter().filter(|b| b.is_answers()).map(Batch::len).sum()
    }

    /// True iff all dependency batches precede all answer batches.
    pub fn is_fully_combined(&self) -> bool {
        let first_answer = self.batches.iter().position(Batch::is_answers).unwrap_or(self.batches.len());
        self.batches.iter().skip(first_answer).all(Batch::is_answers)
    }

    pub fn clear(&mut self) {
        self.batches.clear();
        self.left_open = false;
        self.right_open = false;
        self.scan_from = 0;
    }
}

/// FIFO of items with at-most-once membership.
#[derive(Clone, Debug)]
pub struct GlobalWorklist<T> {
    queue: VecDeque<T>,
    queued: FxHashSet<T>,
}

impl<T> Default for GlobalWorklist<T> {
    fn default() -> Self {
        GlobalWorklist { queue: VecDeque::new(), queued: FxHashSet::default() }
    }
}

impl<T: Copy + Eq + Hash> GlobalWorklist<T> {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns false if `item` was already queued.
    pub fn push(&mut self, item: T) -> bool {
        if self.queued.insert(item) {
            self.queue.push_back(item);
            true
        } else {
            false
        }
    }

    pub fn pop(&mut self) -> Option<T> {
        let item = self.queue.pop_front()?;
        self.queued.remove(&item);
        Some(item)
    }

    pub fn is_empty(&self) -> bool {
        self.queue.is_empty()
    }

    pub fn len(&self) -> usize {
        self.queue.len()
    }

    pub fn contains(&self, item: &T) -> bool {
        self.queued.contains(item)
    }

    pub fn clear(&mut self) {
        self.queue.clear();
        self.queued.clear();
    }
}
