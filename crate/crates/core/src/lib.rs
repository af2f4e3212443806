//! A tabled logic programming engine.
//!
//! Tabling is built on delimited control: the engine provides `reset/3` and
//! `shift/1`, and a call to a tabled predicate either leads the evaluation of
//! a scheduling component or suspends as a follower, capturing its
//! continuation as a dependency to be resumed with each answer of the call it
//! waits on.

pub mod bench;
pub mod engine;
pub mod error;
pub mod parser;
pub mod program;
pub mod tabling;
pub mod terms;
pub mod tries;
pub mod worklist;

pub use engine::{Bindings, DelimOutcome, DelimRun, Engine, Solutions, Suspension};
pub use error::{EngineError, Error, ParseError};
pub use parser::{parse_program, parse_query, parse_term, Query};
pub use program::{Clause, PredKey, Program};
pub use tabling::{Stats, TableId, TableStatus};
pub use terms::{Atom, FrozenTerm, Term};
