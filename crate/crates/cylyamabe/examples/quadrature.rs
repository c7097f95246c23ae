//! The adaptive rules on a few integrals with known values.
use cylyamabe::quadrature::*;
use std::f64::consts::PI;

fn main() {
    let spec = QuadratureSpec::with_tol(1e-12, 0.0);

    let r = integrate_axis(|x| (-x * x).exp(), &Axis::finite(-6.0, 6.0), &spec);
    println!("gaussian       {:.15} (err {:.1e}, {} evals)", r.value, r.error_estimate, r.evaluations);
    println!("  exact        {:.15}", PI.sqrt());

    let r = integrate_radial(|r| r.powi(3) / (1.0 + r * r).powi(4), RadialInterval::Infinite, &spec);
    println!("bubble radial  {:.15} vs {:.15}", r.value, 1.0 / 12.0);

    // volume of the unit 4-ball
    let r = integrate_ball4(|_| 1.0, 1.0, &spec);
    println!("ball volume    {:.15} vs {:.15}", r.value, PI * PI / 2.0);

    let r = integrate_sphere3(|p| p[0] * p[0], 1.0, &[0.0; 4], &spec);
    println!("sphere x0^2    {:.15} vs {:.15}", r.value, PI * PI / 2.0);
}
