//! IO, file formats, and command implementations behind the `hotkit`
//! binary. The numerical kernels live in `hotkit-core`; this crate adds the
//! HTF tensor container, the dataset directory layout, CSV reports, the
//! gradient-check harness, and the benchmark harness.

pub mod bench;
pub mod commands;
pub mod dataset;
pub mod gradcheck;
pub mod report;
pub mod tensorio;
