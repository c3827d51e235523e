//! Types, shapes and expressions for synchronous systems; elaboration of
//! closed-loop systems into automata; and the decision procedure for
//! whether a controlled plant performs every computation a specification
//! requires.

pub mod automaton;
pub mod comb;
pub mod dsl;
pub mod epsilon;
pub mod extension;
pub mod gen;
pub mod interp;
pub mod oracle;
pub mod shapes;
pub mod similarity;
pub mod system;
pub mod types;
pub mod value;
pub mod verify;
