//! `hotkit bench`: wall-time statistics for the dense kernels.

use crate::bench::{print_report, run_bench};
use crate::commands::CmdResult;

pub struct BenchArgs {
    pub size: (usize, usize),
    pub iters: usize,
}

pub fn run(args: &BenchArgs) -> CmdResult {
    let report = run_bench(args.size.0, args.size.1, args.iters)?;
    print_report(&report);
    Ok(())
}
