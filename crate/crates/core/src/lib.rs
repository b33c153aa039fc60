#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod balance;
pub mod dmp;
pub mod kick;
pub mod motor;
pub mod par;
