pub mod auxnet;
pub mod facloc;
pub mod metrics;
pub mod milp;
pub mod netmodel;
pub mod pathfind;
