//! Lets indoor users walk and links block for a few seconds after the design
//! was computed, and tracks the outage of the frozen design.

use ris_secrecy::channel::realize_ensemble;
use ris_secrecy::harness::{estimate_outage, realize_drop, run_baseline, RunConfig, Scheme};
use ris_secrecy::rng::{label, substream};

fn main() -> ris_secrecy::Result<()> {
    let cfg = RunConfig::default();
    let drop = realize_drop(&cfg, 1, 0)?;
    let problem = cfg.problem(drop.ensemble.user_count());
    let design = run_baseline(Scheme::Proposed, &drop.ensemble, &cfg, drop.seed)?.design;

    let mut rng = substream(drop.seed, &[label("evolve")]);
    let mut scenario = drop.scenario.clone();
    let dt = cfg.scenario.step_s;
    println!("{:>6} {:>9} {:>10} {:>10}", "t [s]", "blocked", "indoor 0", "outage");
    for step in 0..=30 {
        if step % 5 == 0 {
            // Same small-scale seed, so only geometry and blockage change.
            let ens = realize_ensemble(&scenario, &cfg.channel, &cfg.dims(), drop.seed)?;
            let est = estimate_outage(&design, &ens, &problem.params, 1000, drop.seed)?;
            let p = scenario.nodes.indoor_users[0];
            println!(
                "{:>6.1} {:>9.2} ({:>4.1},{:>4.1}) {:>10.3}",
                step as f64 * dt,
                scenario.blockage.blocked_fraction(),
                p.x,
                p.y,
                est.weighted
            );
        }
        scenario = scenario.step(dt, &mut rng)?;
    }
    Ok(())
}
