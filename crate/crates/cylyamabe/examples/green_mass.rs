//! Dirichlet Green's function of the conformal Laplacian on a ball and the
//! growth of its constant term as the pole nears the boundary tip.
use cylyamabe::cone::ChartMetricField;
use cylyamabe::green::{
    extract_mass, mass_divergence_sweep, solve_dirichlet_green, BoundaryDatum, GreenProblem, MassOptions,
};

fn main() -> cylyamabe::Result<()> {
    let delta = 1.0;
    let g = solve_dirichlet_green(&GreenProblem::new(ChartMetricField::Flat, [0.0; 4], delta))?;
    let m = extract_mass(
        &g,
        &MassOptions {
            eps0: Some(0.05),
            ..Default::default()
        },
    )?;
    println!("flat ball, centered pole: A = {:.9} (exact {})", m.a_q, -1.0 / (delta * delta));

    let rows = mass_divergence_sweep(&ChartMetricField::Flat, &[0.1, 0.05, 0.025], delta, BoundaryDatum::Zero, 64)?;
    println!("{:>8} {:>14} {:>10}", "t", "A_q", "4t^2 A_q");
    for r in rows {
        println!("{:>8} {:>14.6} {:>10.6}", r.t, r.a_q, r.product);
    }
    Ok(())
}
