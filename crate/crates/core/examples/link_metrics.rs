//! SINRs, rates and outage flags of one realization under a random-phase
//! design, including the colluding eavesdropper aggregate.

use ris_secrecy::harness::{random_phase_design, realize_drop, RunConfig};
use ris_secrecy::link::{evaluate_metrics, outage_indicator};

fn main() -> ris_secrecy::Result<()> {
    let cfg = RunConfig::default();
    let drop = realize_drop(&cfg, 2, 0)?;
    let design = random_phase_design(&drop.ensemble, &cfg, drop.seed)?;
    let t = &cfg.thresholds;
    for (k, m) in evaluate_metrics(&drop.ensemble, &design, &cfg.impairments.params())?.iter().enumerate() {
        let f = outage_indicator(m, t.r_sec_min, t.r_qos);
        println!(
            "user {k}: SINR {:>7.2} dB, per-eve {:?} dB, colluding {:>7.2} dB, secrecy {:.2} b/s/Hz, outage secrecy={} qos={}",
            10.0 * m.gamma_l.log10(),
            m.gamma_ke.iter().map(|g| (10.0 * g.log10() * 100.0).round() / 100.0).collect::<Vec<_>>(),
            10.0 * m.gamma_e.log10(),
            m.secrecy_rate,
            f.secrecy,
            f.qos
        );
    }
    Ok(())
}
