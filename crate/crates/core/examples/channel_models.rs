//! Pathloss, LoS probability and building entry loss at the default carrier.

use ris_secrecy::channel::{los_probability, o2i_penetration_db, pathloss_db, BuildingClass, Environment, PathlossKind};

fn main() -> ris_secrecy::Result<()> {
    let fc = 28.0;
    println!("{:>8} {:>10} {:>10} {:>10} {:>10} {:>8}", "d [m]", "UMi-LoS", "UMi-NLoS", "InH-LoS", "InH-NLoS", "P(LoS)");
    for d in [5.0, 10.0, 20.0, 50.0, 100.0, 200.0] {
        println!(
            "{d:>8} {:>10.2} {:>10.2} {:>10.2} {:>10.2} {:>8.3}",
            pathloss_db(PathlossKind::UmiLos, d, fc)?,
            pathloss_db(PathlossKind::UmiNlos, d, fc)?,
            pathloss_db(PathlossKind::InhLos, d, fc)?,
            pathloss_db(PathlossKind::InhNlos, d, fc)?,
            los_probability(Environment::Umi, d),
        );
    }

    println!("\nbuilding entry loss at {fc} GHz, horizontal incidence");
    for class in [BuildingClass::Traditional, BuildingClass::ThermallyEfficient] {
        let p: Vec<String> = [0.1, 0.5, 0.9]
            .iter()
            .map(|&q| o2i_penetration_db(fc, class, q, 0.0).map(|l| format!("{:.1}", l)))
            .collect::<Result<_, _>>()?;
        println!("  {:<20} 10% {}  50% {}  90% {} dB", class.name(), p[0], p[1], p[2]);
    }
    Ok(())
}
