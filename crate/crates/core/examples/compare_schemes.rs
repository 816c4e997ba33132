//! Every scheme on the same drops, with common Monte-Carlo trials.

use ris_secrecy::harness::{sweep, RunConfig, Scheme, SweepKind};

fn main() {
    let mut cfg = RunConfig::default();
    cfg.experiment.kind = SweepKind::Power;
    cfg.experiment.grid = vec![30.0];
    cfg.experiment.drops = 4;
    cfg.experiment.trials = 2000;
    cfg.experiment.baselines = Scheme::ALL[1..].to_vec();
    let res = sweep(&cfg);
    println!("{:<14} {:>10} {:>8} {:>11} {:>10}", "scheme", "outage", "stderr", "iterations", "certified");
    for p in &res.points {
        let e = p.estimate.as_ref().expect("all drops solved");
        println!("{:<14} {:>10.4} {:>8.4} {:>11.1} {:>10.2}", p.scheme.name(), e.weighted, e.weighted_stderr, p.iterations, p.certified);
    }
}
