//! A staged embedded-DSL compiler: a typed graph IR built by running
//! generator code, optimized by scheduling, fusion and record
//! elimination, emitted as a small imperative program plus a kernel
//! graph, and executed by a chunked parallel runtime.

pub mod codegen;
pub mod demos;
pub mod driver;
pub mod error;
pub mod fusion;
pub mod ir;
pub mod opt;
pub mod records;
pub mod runtime;
pub mod staging;
pub mod vectordsl;

pub use error::CompileError;
