//! Logical options: co-safe LTL tasks compiled to automata, one learned
//! option per subgoal, and meta-policies planned over the product of the
//! task automaton and a gridworld.

pub mod automata;
pub mod baselines;
pub mod gridworld;
pub mod harness;
pub mod ltl;
pub mod options;
pub mod planner;
pub mod runtime;
