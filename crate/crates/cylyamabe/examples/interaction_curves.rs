//! Energy of two equal bubbles as their separation grows, and the
//! far-field slope of the quotient curve.
use cylyamabe::constants::sobolev_constants;
use cylyamabe::interaction::{asymptotic_slope, curves, default_spec, SlopeTarget};
use cylyamabe::reports::log_grid;

fn main() -> cylyamabe::Result<()> {
    let spec = default_spec();
    let k = sobolev_constants();
    let grid = log_grid(0.1, 100.0, 7);
    let c = curves(1.0, &grid, &spec)?;
    println!("{:>10} {:>12} {:>12} {:>14}", "t", "f", "c", "f - 6 S4");
    for i in 0..c.len() {
        let p = c.point(i);
        println!("{:>10.4} {:>12.6} {:>12.3e} {:>14.6}", p.t, p.f, p.c, p.f - 6.0 * k.s4);
    }
    println!("limits: 6 S4 = {:.6}, 6 sqrt2 S4 = {:.6}", 6.0 * k.s4, 6.0 * 2f64.sqrt() * k.s4);

    let fit = asymptotic_slope(SlopeTarget::FCurve, 1.0, &[20.0, 40.0, 80.0, 160.0], &spec)?;
    println!("f ~ limit + c (eps/t)^2 with c = {:.4} (predicted {:.4})", fit.coeff, fit.predicted);
    Ok(())
}
