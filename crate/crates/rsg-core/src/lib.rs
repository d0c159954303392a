#![no_std]

extern crate alloc;

pub mod ast;
pub mod codegen;
pub mod diag;
pub mod runtime;
pub mod sem;
pub mod units;
