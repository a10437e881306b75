pub mod analysis;
pub mod cli;
pub mod dynamics;
pub mod error;
pub mod graph;
pub mod init;
pub mod space;
pub mod union_find;
