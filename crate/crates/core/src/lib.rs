pub mod exactnum;
pub mod metrics;
pub mod par;
pub mod perm;
pub mod polytope;
pub mod tightspan;
pub mod arrangement;
pub mod krw;
pub mod classes;
pub mod reproduce;
