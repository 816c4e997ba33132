//! Optimizes the proposed scheme on one drop of the default scenario,
//! checks how far each block would still move and estimates the outage.

use ris_secrecy::harness::{estimate_outage, realize_drop, run_baseline, RunConfig, Scheme};
use ris_secrecy::optimizer::{resume_sca_ao, stationarity};

fn main() -> ris_secrecy::Result<()> {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(1);
    let cfg = RunConfig::default();
    let drop = realize_drop(&cfg, seed, 0)?;
    let problem = cfg.problem(drop.ensemble.user_count());

    let report = run_baseline(Scheme::Proposed, &drop.ensemble, &cfg, drop.seed)?.report.expect("proposed scheme reports");
    println!("{:>4} {:>10} {:>12} {:>12} {:>12} {:>12}", "it", "cost", "bf", "ris", "uav", "uav step");
    for r in &report.history {
        println!("{:>4} {:>10.5} {:>12} {:>12} {:>12} {:>10.2} m", r.iteration, r.cost, r.bf.name(), r.ris.name(), r.uav.name(), r.step_uav);
    }
    let u = report.design.uav_position;
    println!("UAV at ({:.1}, {:.1}, {:.1}), power {:.3} W of {:.3} W", u.x, u.y, u.z, report.design.total_power(), problem.params.p_max);

    let st = stationarity(&report, &drop.ensemble, &problem, &cfg.optimizer)?;
    println!("block moves at the result: bf {:.2e}, ris {:.2e} (projected {:.2e}), uav {:.2} m", st.bf, st.ris_relaxed, st.ris_projected, st.uav);
    let again = resume_sca_ao(&report, &drop.ensemble, &problem, &cfg.optimizer)?;
    println!("warm restart: {} iteration(s), cost {:.6} -> {:.6}", again.iterations, again.initial_cost, again.final_cost);

    let est = estimate_outage(&report.design, &drop.ensemble, &problem.params, 5000, drop.seed)?;
    for k in 0..est.p_out.len() {
        let indoor = drop.ensemble.indoor[k];
        println!(
            "user {k} ({}): certified {:<5} secrecy outage {:.3}, qos outage {:.3}",
            if indoor { "indoor" } else { "outdoor" },
            report.certified[k],
            est.secrecy[k],
            est.qos[k]
        );
    }
    println!("weighted outage {:.4} +- {:.4}", est.weighted, est.weighted_stderr);
    Ok(())
}
