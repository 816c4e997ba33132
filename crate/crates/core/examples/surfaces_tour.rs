//! Projections of raw coefficients onto the three surface types, phase
//! quantization, and the share of each surface in a user's effective gain.

use ris_secrecy::harness::{realize_drop, run_baseline, RunConfig, Scheme};
use ris_secrecy::link::{effective_channel, Design};
use ris_secrecy::linalg::CVec;
use ris_secrecy::rng::{complex_normal, substream};
use ris_secrecy::scenario::Node;
use ris_secrecy::surfaces::{project_holo, project_star, project_uav, SurfaceSet};

fn main() -> ris_secrecy::Result<()> {
    let mut rng = substream(3, &[]);
    let raw = CVec::from_fn(4, |_, _| complex_normal(&mut rng, 1.0));
    let other = CVec::from_fn(4, |_, _| complex_normal(&mut rng, 1.0));
    let uav = project_uav(&raw);
    println!("uav phases      {:.3?}", uav.phases);
    println!("3-bit quantized {:.3?}", uav.quantized(3).phases);
    let star = project_star(&raw, &other);
    println!("star split rho  {:.3?} (energy error {:.1e})", star.rho, star.energy_error());
    let holo = project_holo(&raw, 1.0);
    println!("holo amplitudes {:.3?}", holo.alpha);

    let cfg = RunConfig::default();
    let drop = realize_drop(&cfg, 1, 0)?;
    let design = run_baseline(Scheme::Proposed, &drop.ensemble, &cfg, drop.seed)?.design;
    let w = &design.beamformers;
    let only = |s: SurfaceSet| Design { surfaces: s, ..design.clone() };
    let none = SurfaceSet { uav: false, star: false, holo: false };
    let variants = [
        ("direct", only(none)),
        ("+uav", only(SurfaceSet { uav: true, ..none })),
        ("+star", only(SurfaceSet { star: true, ..none })),
        // The holographic surface is fed through STAR transmission.
        ("+star+holo", only(SurfaceSet { star: true, holo: true, ..none })),
        ("all", design.clone()),
    ];
    println!("\nown-beam power via the direct path [dBm] and each cascade relative to it [dB]");
    for k in 0..drop.ensemble.user_count() {
        let direct = effective_channel(&drop.ensemble, &variants[0].1, Node::User(k))?;
        let p0 = direct.dotc(&w[k]).norm_sqr();
        let mut line = format!("user {k}: {:>7.1}", 10.0 * (p0 * 1e3).log10());
        for (name, d) in &variants[1..] {
            let cascade = effective_channel(&drop.ensemble, d, Node::User(k))? - &direct;
            line += &format!("  {name} {:>6.1}", 10.0 * (cascade.dotc(&w[k]).norm_sqr() / p0).log10());
        }
        println!("{line}");
    }
    Ok(())
}
