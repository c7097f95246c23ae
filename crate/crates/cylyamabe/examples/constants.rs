//! Closed-form bubble constants next to their quadrature values.
use cylyamabe::constants::{constants_by_quadrature, energy_level, sobolev_constants};
use cylyamabe::quadrature::QuadratureSpec;

fn main() -> cylyamabe::Result<()> {
    let k = sobolev_constants();
    let n = constants_by_quadrature(&QuadratureSpec::with_tol(1e-14, 0.0))?;
    println!("{:>5} {:>22} {:>22}", "", "closed form", "quadrature");
    for (name, a, b) in [
        ("c4", k.c4, n.c4),
        ("S4", k.s4, n.s4),
        ("Y4", k.y4, n.y4),
        ("A", k.a, n.a),
        ("B", k.b, n.b),
    ] {
        println!("{name:>5} {a:>22.15} {b:>22.15}");
    }
    println!("B/S4 = {}", n.b_over_s4);
    // j singular and l regular bubbles
    for (j, l) in [(1, 0), (0, 1), (2, 0), (1, 1)] {
        println!("level({j}, {l}) = {:.10}", energy_level(j, l)?);
    }
    Ok(())
}
