//! The generalized Choquet game engine.

pub mod payoff;
pub mod play;

pub use payoff::{
    classify_property, down_sets, evaluate, seq_equiv, seq_leq, Classification, Descending, LimitPredicate, Payoff,
    Verdict, Winner,
};
pub use play::{
    explain_empty_move, legal_empty_move, legal_reply, open_trace, run_play, EmptyStrategy, Move, Play, Round,
    Scripted, Strategy, Trace,
};
