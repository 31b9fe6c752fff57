//! Two counter-rotating momentum blobs of a planar rotor: fringe decay in the
//! Wigner function and relaxation of the momentum marginal.

use rotorbath::planar::{fig3_experiment, Fig3Config};

fn main() -> rotorbath::Result<()> {
    let config = Fig3Config::default();
    let r = fig3_experiment(&config)?;
    for s in &r.snapshots {
        println!(
            "t = {:7.3}  fringe {:.3e}  blobs ({:.3}, {:.3})  boundary mass {:.1e}",
            s.time, s.fringe, s.blob_weights.0, s.blob_weights.1, s.boundary_mass
        );
    }
    println!("marginal distance to the stationary state: {:.3e}", r.final_distance);

    let last = r.snapshots.last().expect("at least one snapshot");
    let m_max = config.m_max as i64;
    println!("  m   p_m(t)    p_m(stationary)");
    let stationary = r.stationary.populations();
    for m in (-6..=6).step_by(2) {
        let k = (m + m_max) as usize;
        println!("{m:>3}  {:.5}   {:.5}", last.marginal[k], stationary[k]);
    }
    for w in &r.warnings {
        eprintln!("warning: {w}");
    }
    Ok(())
}
