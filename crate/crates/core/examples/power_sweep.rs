use std::fs::File;

use ris_secrecy::harness::io::write_sweep;
use ris_secrecy::harness::{sweep, RunConfig, Scheme, SweepKind};

/// Outage against transmit power, written as `power_sweep.csv` in the
/// current directory.
fn main() -> ris_secrecy::Result<()> {
    let mut cfg = RunConfig::default();
    cfg.experiment.kind = SweepKind::Power;
    cfg.experiment.grid = vec![0.0, 10.0, 20.0, 30.0, 40.0];
    cfg.experiment.drops = 5;
    cfg.experiment.trials = 1000;
    cfg.experiment.baselines = vec![Scheme::RandomPhase];
    let res = sweep(&cfg);
    for g in &cfg.experiment.grid {
        let row: Vec<String> = res
            .points
            .iter()
            .filter(|p| p.grid == *g)
            .map(|p| format!("{} {:.3}", p.scheme.name(), p.estimate.as_ref().map_or(f64::NAN, |e| e.weighted)))
            .collect();
        println!("{g:>5} dBm  {}", row.join("   "));
    }
    write_sweep(File::create("power_sweep.csv")?, &res.points)?;
    Ok(())
}
