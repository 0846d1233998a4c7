pub mod contact;
pub mod dimension;
pub mod expand;
pub mod graph;
pub mod inertia;
pub mod cli;
pub mod rational;
pub mod glue;
