pub mod apps;
pub mod axmodel;
pub mod behav;
pub mod dse;
pub mod fixtures;
pub mod netlist;
pub mod opgen;
pub mod ppa;
pub mod surrogate;
pub mod verilog;
