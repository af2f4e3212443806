//! Tabling state: the call trie, tables, and the scheduling component.
//!
//! The control flow (leader/follower dispatch, activation, delimited answer
//! collection, completion) is driven by the engine, which calls the
//! operations here at the corresponding points. Everything in this module
//! survives backtracking: answers and dependencies are stored frozen.

use std::fmt;
use std::sync::Arc;

use crate::terms::{Atom, BindingStore, FrozenTerm, Term, VariantKey};
use crate::tries::{LeafId, Trie};
use crate::worklist::{GlobalWorklist, LocalWorklist};

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct TableId(pub(crate) u32);

impl TableId {
    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub(crate) fn to_term(self) -> Term {
        Term::int(self.0)
    }

    pub(crate) fn from_term(term: &Term) -> Option<TableId> {
        u32::try_from(term.as_int()?).ok().map(TableId)
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum TableStatus {
    Fresh,
    Active,
    Complete,
}

impl fmt::Display for TableStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TableStatus::Fresh => "fresh",
            TableStatus::Active => "active",
            TableStatus::Complete => "complete",
        })
    }
}

/// A suspended consumer of a source call's answers.
///
/// Kept as one frozen `dependency(call_info(Source,S), '$cont$'(Goals),
/// call_info(Target,T))` term so that the source wrapper, the continuation
/// and the target wrapper keep sharing their variables.
#[derive(Clone, Debug)]
pub struct Dependency {
    template: FrozenTerm,
    source: TableId,
    target: TableId,
}

impl Dependency {
    /// Freezes the dependency built from live terms.
    pub(crate) fn capture(
        source_wrapper: &Term,
        source: TableId,
        goals: Term,
        target_wrapper: &Term,
        target: TableId,
        store: &BindingStore,
    ) -> Dependency {
        let info = |w: &Term, t: TableId| Term::compound(Atom::CALL_INFO, vec![w.clone(), t.to_term()]);
        let dep = Term::compound(
            Atom::DEPENDENCY,
            vec![
                info(source_wrapper, source),
                Term::compound(Atom::CONT, vec![goals]),
                info(target_wrapper, target),
            ],
        );
        Dependency { template: FrozenTerm::freeze(&dep, store), source, target }
    }

    pub fn source(&self) -> TableId {
        self.source
    }

    pub fn target(&self) -> TableId {
        self.target
    }

    pub fn template(&self) -> &FrozenTerm {
        &self.template
    }

    /// A fresh copy as (source wrapper, continuation goal list, target wrapper).
    pub(crate) fn instantiate(&self, store: &mut BindingStore) -> (Term, Term, Term) {
        let dep = self.template.instantiate(store);
        let [source, cont, target] = dep.args() else { unreachable!("dependency/3") };
        (source.args()[0].clone(), cont.args()[0].clone(), target.args()[0].clone())
    }
}

#[derive(Debug)]
pub struct Table {
    key: VariantKey,
    leaf: LeafId,
    status: TableStatus,
    answers: Trie<()>,
    worklist: LocalWorklist<FrozenTerm, Dependency>,
    // Filled in once at completion.
    complete_answers: Option<Arc<[FrozenTerm]>>,
    in_component: bool,
}

impl Table {
    fn new(key: VariantKey, leaf: LeafId) -> Table {
        Table {
            key,
            leaf,
            status: TableStatus::Fresh,
            answers: Trie::new(),
            worklist: LocalWorklist::new(),
            complete_answers: None,
            in_component: false,
        }
    }

    pub fn key(&self) -> &VariantKey {
        &self.key
    }

    pub fn call(&self) -> FrozenTerm {
        self.key.to_term()
    }

    pub fn status(&self) -> TableStatus {
        self.status
    }

    pub fn answer_count(&self) -> usize {
        self.answers.len()
    }

    pub fn answers(&self) -> Vec<FrozenTerm> {
        self.answers.terms()
    }

    pub fn answer_trie(&self) -> &Trie<()> {
        &self.answers
    }

    pub fn worklist(&self) -> &LocalWorklist<FrozenTerm, Dependency> {
        &self.worklist
    }

    pub fn dependency_count(&self) -> usize {
        self.worklist.dependency_count()
    }
}

/// Counters over the lifetime of an engine.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Stats {
    pub tables_created: u64,
    /// New (non-duplicate) answers.
    pub answers_stored: u64,
    pub dependencies_stored: u64,
    /// Activations, i.e. worker executions.
    pub worker_invocations: u64,
    /// Continuations captured by `shift/1`.
    pub suspensions: u64,
    /// Continuations resumed by completion or explicitly.
    pub resumptions: u64,
    /// Clause head unifications.
    pub resolutions: u64,
}

impl Stats {
    /// Componentwise `self - earlier`.
    pub fn since(&self, earlier: &Stats) -> Stats {
        Stats {
            tables_created: self.tables_created - earlier.tables_created,
            answers_stored: self.answers_stored - earlier.answers_stored,
            dependencies_stored: self.dependencies_stored - earlier.dependencies_stored,
            worker_invocations: self.worker_invocations - earlier.worker_invocations,
            suspensions: self.suspensions - earlier.suspensions,
            resumptions: self.resumptions - earlier.resumptions,
            resolutions: self.resolutions - earlier.resolutions,
        }
    }
}

/// One status change of one table, in the order it happened.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Transition {
    pub table: TableId,
    pub from: TableStatus,
    pub to: TableStatus,
}

#[derive(Debug, Default)]
pub struct SchedulingState {
    leader: bool,
    component: Vec<TableId>,
    global: GlobalWorklist<TableId>,
}

impl SchedulingState {
    pub fn leader_active(&self) -> bool {
        self.leader
    }

    pub fn component(&self) -> &[TableId] {
        &self.component
    }

    pub fn worklist(&self) -> &GlobalWorklist<TableId> {
        &self.global
    }
}

/// All tables of one engine plus the current scheduling component.
#[derive(Debug, Default)]
pub struct TableSpace {
    calls: Trie<TableId>,
    // Indexed by TableId; abandoned tables stay allocated but unreachable.
    tables: Vec<Table>,
    scheduling: SchedulingState,
    transitions: Vec<Transition>,
    pub(crate) stats: Stats,
}

impl TableSpace {
    pub fn new() -> Self {
        Self::default()
    }

    /// Existing table for the variant, or a freshly allocated one.
    pub fn get_table_for_variant(&mut self, key: VariantKey) -> (TableId, bool) {
        let next = TableId(self.tables.len() as u32);
        let (leaf, created) = self.calls.insert_with(&key, || next);
        if !created {
            return (*self.calls.payload(leaf), false);
        }
        self.tables.push(Table::new(key, leaf));
        self.stats.tables_created += 1;
        (next, true)
    }

    pub fn lookup(&self, key: &VariantKey) -> Option<TableId> {
        self.calls.lookup(key).map(|leaf| *self.calls.payload(leaf))
    }

    pub fn table(&self, id: TableId) -> &Table {
        &self.tables[id.index()]
    }

    /// Reachable tables in creation order.
    pub fn tables(&self) -> impl Iterator<Item = (TableId, &Table)> {
        self.calls.iter().map(|(_, id)| *id).collect::<Vec<_>>().into_iter().map(|id| (id, self.table(id)))
    }

    pub fn table_count(&self) -> usize {
        self.calls.len()
    }

    pub fn scheduling(&self) -> &SchedulingState {
        &self.scheduling
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    pub fn stats(&self) -> Stats {
        self.stats
    }

    fn set_status(&mut self, id: TableId, to: TableStatus) {
        let table = &mut self.tables[id.index()];
        self.transitions.push(Transition { table: id, from: table.status, to });
        table.status = to;
    }

    pub fn create_scheduling_component(&mut self) {
        debug_assert!(!self.scheduling.leader && self.scheduling.component.is_empty());
        self.scheduling.leader = true;
    }

    /// Marks a fresh table active and registers it with the component.
    pub fn activate(&mut self, id: TableId) {
        debug_assert_eq!(self.table(id).status, TableStatus::Fresh);
        self.set_status(id, TableStatus::Active);
        self.tables[id.index()].in_component = true;
        self.scheduling.component.push(id);
        self.stats.worker_invocations += 1;
    }

    /// Returns whether the answer was new.
    pub fn store_answer(&mut self, id: TableId, answer: FrozenTerm) -> bool {
        let table = &mut self.tables[id.index()];
        if !table.answers.insert(&answer.variant_key()).1 {
            return false;
        }
        table.worklist.add_answer(answer);
        self.scheduling.global.push(id);
        self.stats.answers_stored += 1;
        true
    }

    pub fn store_dependency(&mut self, dep: Dependency) {
        let source = dep.source;
        self.tables[source.index()].worklist.add_dependency(dep);
        self.scheduling.global.push(source);
        self.stats.dependencies_stored += 1;
    }

    pub fn pop_worklist(&mut self) -> Option<TableId> {
        self.scheduling.global.pop()
    }

    pub fn get_work(&mut self, id: TableId) -> Option<(Vec<FrozenTerm>, Vec<Dependency>)> {
        self.tables[id.index()].worklist.get_work()
    }

    /// Marks every component table complete, erases their dependencies and
    /// dissolves the component.
    pub fn set_all_complete(&mut self) {
        let component = std::mem::take(&mut self.scheduling.component);
        for &id in &component {
            self.set_status(id, TableStatus::Complete);
            let table = &mut self.tables[id.index()];
            table.worklist.clear();
            table.in_component = false;
            table.complete_answers = Some(table.answers.terms().into());
        }
        self.scheduling.global.clear();
        self.scheduling.leader = false;
    }

    /// Drops a half-built component: every participating table becomes
    /// unreachable and its variant maps to a new fresh table.
    pub fn abandon_component(&mut self) {
        let component = std::mem::take(&mut self.scheduling.component);
        for id in component {
            let leaf = self.tables[id.index()].leaf;
            let key = self.tables[id.index()].key.clone();
            let old = &mut self.tables[id.index()];
            old.answers = Trie::new();
            old.worklist.clear();
            old.in_component = false;
            let fresh = TableId(self.tables.len() as u32);
            self.tables.push(Table::new(key, leaf));
            *self.calls.payload_mut(leaf) = fresh;
        }
        self.scheduling.global.clear();
        self.scheduling.leader = false;
    }

    pub(crate) fn complete_answers(&self, id: TableId) -> Arc<[FrozenTerm]> {
        self.tables[id.index()].complete_answers.clone().expect("complete table")
    }

    pub fn abolish_all_tables(&mut self) {
        debug_assert!(!self.scheduling.leader);
        self.calls = Trie::new();
        self.tables.clear();
        self.scheduling = SchedulingState::default();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_term;

    fn frozen(text: &str) -> FrozenTerm {
        parse_term(text).unwrap()
    }

    fn key(text: &str) -> VariantKey {
        frozen(text).variant_key()
    }

    #[test]
    fn variants_share_a_table() {
        let mut space = TableSpace::new();
        let (first, created) = space.get_table_for_variant(key("p(X,Y)"));
        assert!(created);
        assert_eq!(space.table(first).status(), TableStatus::Fresh);
        assert_eq!(space.get_table_for_variant(key("p(A,B)")), (first, false));
        let (other, created) = space.get_table_for_variant(key("p(a,Y)"));
        assert!(created && other != first);
    }

    #[test]
    fn duplicate_answers_are_ignored() {
        let mut space = TableSpace::new();
        let (t, _) = space.get_table_for_variant(key("p(X,Y)"));
        space.create_scheduling_component();
        space.activate(t);
        assert!(space.store_answer(t, frozen("p(a,b)")));
        assert!(!space.store_answer(t, frozen("p(a,b)")));
        assert_eq!(space.table(t).answer_count(), 1);
        assert_eq!(space.table(t).worklist().answer_count(), 1);
        assert_eq!(space.pop_worklist(), Some(t));
        assert_eq!(space.pop_worklist(), None);
    }

    #[test]
    fn non_ground_answers_are_canonical() {
        let mut space = TableSpace::new();
        let (t, _) = space.get_table_for_variant(key("p(X,Y)"));
        assert!(space.store_answer(t, frozen("p(a,Z)")));
        assert!(!space.store_answer(t, frozen("p(a,W)")));
        assert_eq!(space.table(t).answers()[0].to_string(), "p(a,_0)");
    }

    #[test]
    fn dependency_into_empty_table_gives_no_work() {
        let mut space = TableSpace::new();
        let (t, _) = space.get_table_for_variant(key("r(c,Y)"));
        let mut store = BindingStore::new();
        let w = frozen("r(c,Y)").instantiate(&mut store);
        for _ in 0..3 {
            space.store_dependency(Dependency::capture(&w, t, Term::Atom(Atom::NIL), &w, t, &store));
        }
        assert_eq!(space.pop_worklist(), Some(t));
        assert!(space.get_work(t).is_none());
        assert_eq!(space.table(t).dependency_count(), 3);
        assert_eq!(space.table(t).worklist().batch_count(), 1);
    }

    #[test]
    fn completion_clears_dependencies_and_logs_transitions() {
        let mut space = TableSpace::new();
        let (t, _) = space.get_table_for_variant(key("p(X)"));
        space.create_scheduling_component();
        space.activate(t);
        let mut store = BindingStore::new();
        let w = frozen("p(X)").instantiate(&mut store);
        space.store_dependency(Dependency::capture(&w, t, Term::Atom(Atom::NIL), &w, t, &store));
        space.store_answer(t, frozen("p(1)"));
        space.set_all_complete();
        assert_eq!(space.table(t).status(), TableStatus::Complete);
        assert_eq!(space.table(t).dependency_count(), 0);
        assert!(!space.scheduling().leader_active());
        let log: Vec<_> = space.transitions().iter().map(|tr| (tr.from, tr.to)).collect();
        assert_eq!(log, [(TableStatus::Fresh, TableStatus::Active), (TableStatus::Active, TableStatus::Complete)]);
        assert_eq!(space.complete_answers(t).len(), 1);
    }

    #[test]
    fn abandoned_tables_are_replaced() {
        let mut space = TableSpace::new();
        let (t, _) = space.get_table_for_variant(key("p(X)"));
        space.create_scheduling_component();
        space.activate(t);
        space.store_answer(t, frozen("p(1)"));
        space.abandon_component();
        let (again, created) = space.get_table_for_variant(key("p(Y)"));
        assert!(!created);
        assert_ne!(again, t);
        assert_eq!(space.table(again).status(), TableStatus::Fresh);
        assert_eq!(space.table(again).answer_count(), 0);
        assert!(!space.scheduling().leader_active());
    }

    #[test]
    fn dependency_copies_keep_sharing() {
        let mut store = BindingStore::new();
        let src = frozen("p(X,Z)").instantiate(&mut store);
        let z = src.args()[1].clone();
        let y = store.fresh_var();
        let goals = Term::list(vec![Term::app("e", vec![z, y.clone()])], Term::Atom(Atom::NIL));
        let target = Term::app("p", vec![src.args()[0].clone(), y]);
        let dep = Dependency::capture(&src, TableId(0), goals, &target, TableId(0), &store);
        let (s, g, t) = dep.instantiate(&mut store);
        let answer = frozen("p(a,b)").instantiate(&mut store);
        assert!(store.unify(&s, &answer));
        let shown = FrozenTerm::freeze(&Term::app("f", vec![g, t]), &store).to_string();
        assert_eq!(shown, "f([e(b,_0)],p(a,_0))");
    }
}
