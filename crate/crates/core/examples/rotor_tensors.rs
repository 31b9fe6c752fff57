//! Inertia, diffusion and Lindblad weights of small particle clusters, and the
//! complete-positivity check on the weights.

use nalgebra::Vector3;
use rotorbath::tensors::{lindblad_weights, tensors_from_geometry, Particle, RotorGeometry};

fn report(name: &str, geom: &RotorGeometry, kt: f64) -> rotorbath::Result<()> {
    let t = tensors_from_geometry(geom, kt)?;
    println!("{name}");
    println!("  inertia eigenvalues   {:.4?}", t.inertia.as_slice());
    println!("  diffusion eigenvalues {:.4?}", t.diffusion.as_slice());
    println!("  Lindblad weights      {:.4?}", t.weights.weights.as_slice());
    println!("  completely positive   {}", t.weights.is_completely_positive());
    Ok(())
}

fn main() -> rotorbath::Result<()> {
    let kt = 1.0;
    let s = 3f64.sqrt() / 2.0;
    let triangle = RotorGeometry::centered(vec![
        Particle::new(1.0, 0.5, Vector3::new(1.0, 0.0, 0.0)),
        Particle::new(1.0, 0.5, Vector3::new(-0.5, s, 0.0)),
        Particle::new(1.0, 0.5, Vector3::new(-0.5, -s, 0.0)),
    ])?;
    report("planar triangle, isotropic damping", &triangle, kt)?;

    // Damping along a single direction per particle can break the inequality
    // D_i + D_j >= D_k.
    let directed = RotorGeometry::centered(vec![
        Particle::new(1.0, 2.0, Vector3::new(1.0, 0.0, 0.0)).directed(Vector3::y()),
        Particle::new(1.0, 2.0, Vector3::new(-1.0, 0.0, 0.0)).directed(Vector3::y()),
        Particle::new(1.0, 0.1, Vector3::new(0.0, 0.0, 1.0)),
        Particle::new(1.0, 0.1, Vector3::new(0.0, 0.0, -1.0)),
    ])?;
    report("dumbbell with directed damping", &directed, kt)?;

    let w = lindblad_weights(1.0, 1.0, 3.0)?;
    println!("weights for D = (1, 1, 3): {:?}, violation {:?}", w.weights.as_slice(), w.violation);
    Ok(())
}
