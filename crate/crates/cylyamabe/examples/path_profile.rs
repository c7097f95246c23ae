//! The five-leg path between the conical points on a coarse grid. The
//! maximum stays below Y4.
use cylyamabe::constants::sobolev_constants;
use cylyamabe::path::{build_path, path_spec, Exponents, PathOptions};

fn main() -> cylyamabe::Result<()> {
    let eps: f64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(1e-4);
    let opts = PathOptions {
        grid: 11,
        spec: path_spec(),
        continuity: false,
    };
    let p = build_path(eps, &Exponents::default(), 0.03, &opts)?;
    let y4 = sobolev_constants().y4;
    for s in &p.samples {
        println!("mu {:>4.2}  {:<7} Q = {:.9}  Y4 - Q = {:.3e}", s.mu, s.variant().name(), s.value.q, y4 - s.value.q);
    }
    println!("max at mu = {}, margin {:.3e} ({:.0} error bars)", p.argmax_mu, p.margin, p.worst_margin_ratio());
    Ok(())
}
