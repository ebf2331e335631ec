pub mod classification;
pub mod code;
pub mod generation;
pub mod graph;
pub mod ingest;
pub mod io;
pub mod moves;
pub mod summary;
pub mod topology;
