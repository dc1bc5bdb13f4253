//! Runs every acceptance criterion; exits nonzero if any fails.

use std::time::Instant;

use biharmonic_validation::CRITERIA;

fn main() {
    let mut failed = Vec::new();
    for (i, (name, check)) in CRITERIA.iter().enumerate() {
        let t = Instant::now();
        let r = check();
        let secs = t.elapsed().as_secs_f64();
        let (tag, detail) = match &r {
            Ok(d) => ("PASS", d),
            Err(d) => ("FAIL", d),
        };
        println!("{tag} {:>2} {name} ({secs:.1}s): {detail}", i + 1);
        if r.is_err() {
            failed.push(i + 1);
        }
    }
    println!("{}/{} criteria pass", CRITERIA.len() - failed.len(), CRITERIA.len());
    if !failed.is_empty() {
        println!("failed: {failed:?}");
        std::process::exit(1);
    }
}
