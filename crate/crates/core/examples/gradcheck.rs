//! Check adjoint circuit gradients against finite differences and the
//! parameter-shift rule.
//!
//! ```bash
//! cargo run --release --example gradcheck
//! ```

use hybrid_oc::expkit::gradcheck::run_all;

fn main() -> hybrid_oc::Result<()> {
    for r in run_all(0)? {
        let verdict = if r.passed() { "ok" } else { "FAILED" };
        println!("{:<38} {:>4} instances  max error {:.2e}  (tol {:.0e})  {verdict}", r.name, r.instances, r.max_error, r.tolerance);
    }
    Ok(())
}
