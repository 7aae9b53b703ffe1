//! `hotkit gradcheck`: finite-difference verification of every analytic
//! gradient; exit code 1 when any check exceeds the tolerance.

use crate::commands::{CmdError, CmdResult};
use crate::gradcheck::{print_report, run_gradcheck};

pub struct GradcheckArgs {
    pub seed: u64,
    pub trials: usize,
    pub eps: f64,
    pub tol: f64,
}

pub fn run(args: &GradcheckArgs) -> CmdResult {
    let report = run_gradcheck(args.seed, args.trials, args.eps, args.tol)?;
    print_report(&report);
    if report.passed() {
        Ok(())
    } else {
        let worst = report
            .checks
            .iter()
            .max_by(|a, b| a.max_rel_err.total_cmp(&b.max_rel_err))
            .expect("at least one check");
        Err(CmdError::Check(format!(
            "{} exceeded tolerance {:.1e} (max_rel_err {:.3e}, scene seed {})",
            worst.name, report.tol, worst.max_rel_err, worst.worst_seed
        )))
    }
}
