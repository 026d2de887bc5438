pub mod cachesim;
pub mod cli;
pub mod corpus;
pub mod emitc;
pub mod exec;
pub mod expr;
pub mod kernel;
pub mod memalloc;
pub mod poly;
pub mod tiler;
