//! Checks analytic gradients against central differences.

use msan::autodiff::gradcheck::primitive_suite;
use msan::autodiff::Tape;
use msan::policy::gradcheck::surrogate_loss_check;
use msan::policy::PolicyConfig;

fn main() -> msan::Result<()> {
    // y = sum(tanh(W x)); dy/dW = (1 - tanh^2) x^T
    let mut tape = Tape::new();
    let w = tape.leaf((2, 2), vec![0.5, -0.3, 0.8, 0.1])?;
    let x = tape.column(vec![1.0, 2.0]);
    let h = tape.matmul(w, x)?;
    let a = tape.tanh(h);
    let y = tape.sum(a);
    tape.backward(y)?;
    println!("y = {:.6}, dy/dW = {:?}", tape.scalar(y), tape.grad(w));

    let mut reports = primitive_suite();
    reports.push(surrogate_loss_check(PolicyConfig::desk(32), 0, Some(300))?);
    for r in reports {
        println!("{:<28} {:>4} coords  max rel err {:.2e}", r.name, r.coords, r.max_rel_err);
    }
    Ok(())
}
