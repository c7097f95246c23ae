//! Yamabe quotients of single test functions on the football: a bubble at
//! a conical point, the symmetric pair, and a glued regular bubble.
use cylyamabe::cone::football::Pole;
use cylyamabe::constants::sobolev_constants;
use cylyamabe::path::{evaluate_quotient, football_mass, path_spec, TestFunctionDescriptor};

fn main() -> cylyamabe::Result<()> {
    let spec = path_spec();
    let y = sobolev_constants();
    let eps = 1e-4;
    let delta = 0.03;

    let single = TestFunctionDescriptor::single(eps, 0.5, Pole::North)?;
    let q = evaluate_quotient(&single, &spec)?;
    println!("single   Q = {:.8}  Ys = {:.8}", q.q, y.ys);

    let t = eps.powf(0.6);
    let double = TestFunctionDescriptor::double(eps, t, delta, Pole::North)?;
    let q = evaluate_quotient(&double, &spec)?;
    println!("double   Q = {:.8}  Y4 - Q = {:.3e}", q.q, y.y4 - q.q);

    let t = 1.0;
    let glued = TestFunctionDescriptor::glued(eps, t, 1e-2, delta, Pole::North)?;
    let q = evaluate_quotient(&glued, &spec)?;
    let model = 4.0 * y.a * football_mass(t) * eps * eps;
    println!("glued    Q = {:.8}  deficit {:.4e}, model {:.4e}", q.q, y.y4 - q.q, model);
    Ok(())
}
