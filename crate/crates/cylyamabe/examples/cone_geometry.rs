//! Conformal normal coordinates on the round chart and the gauge that
//! kills the first-order variation of the link metric.
use cylyamabe::cone::cnc::verify_cnc_along;
use cylyamabe::cone::link::verify_first_order_identity;
use cylyamabe::cone::{ChartMetricField, LinkFamily};
use cylyamabe::reports::gauge_link_function;

fn main() -> cylyamabe::Result<()> {
    let field = ChartMetricField::RoundNormal;
    let p = [0.1, -0.05, 0.07, 0.02];
    for h in [4e-3, 2e-3, 1e-3] {
        let r = verify_cnc_along(&field, &p, None, h)?;
        println!("h = {h:.0e}: |R| {:.2e}  |dR| {:.2e}  |Ric| {:.2e}", r.r, r.dr, r.ric);
    }

    let f = gauge_link_function();
    for h in [1e-2, 5e-3] {
        let g = verify_first_order_identity(&f, &LinkFamily::OnePlusSquare, h)?;
        println!("link flow h = {h:.0e}: residual {:.3e}", g.residual);
    }
    let g = verify_first_order_identity(&f, &LinkFamily::Gauge(f.clone()), 1e-2)?;
    println!("after gauge: |h'(0)| = {:.3e}", g.derivative_norm);
    Ok(())
}
