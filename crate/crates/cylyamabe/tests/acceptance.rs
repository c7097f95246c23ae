use cylyamabe::accept::{run_criterion, AcceptOptions};

fn main() {
    let options = AcceptOptions::default();
    let mut failed = Vec::new();
    for i in 1..=12 {
        let o = run_criterion(i, &options);
        println!("{}", o.line());
        if !o.passed {
            failed.push(i);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all 12 criteria PASS");
    } else {
        println!("acceptance: FAIL {failed:?}");
        std::process::exit(1);
    }
}
