pub mod dbm;
pub mod ensembles;
pub mod linalg;
pub mod locallaw;
pub mod moments;
pub mod runner;
pub mod seed;
pub mod semicircle;
pub mod stats;
