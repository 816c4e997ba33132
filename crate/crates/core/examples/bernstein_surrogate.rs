//! The Bernstein-type condition for a Gaussian quadratic form, checked by
//! Monte Carlo on a definite and an indefinite block.

use ris_secrecy::linalg::{CMat, CVec};
use ris_secrecy::robust::{bernstein_block, bernstein_kappa, scalar_boundary, validate_block_mc, QuadraticForm};

fn scalar(a: f64, eps: f64) -> QuadraticForm {
    QuadraticForm { a: CMat::from_element(1, 1, a.into()), b: CVec::zeros(1), c: 0.0, cov: CMat::identity(1, 1), epsilon: eps }
}

fn main() -> ris_secrecy::Result<()> {
    for eps in [0.01, 0.05, 0.1] {
        println!("eps = {eps}: kappa = {:.4}, scalar boundary c >= {:.4}, exact c >= {:.4}", bernstein_kappa(eps), scalar_boundary(eps), (1.0 - eps).ln());
    }

    // Place c exactly on the boundary and measure the violation rate.
    for a in [1.0, -1.0] {
        let eps = 0.01;
        let mut q = scalar(a, eps);
        let blk = bernstein_block(&q)?;
        q.c = blk.tau * blk.kappa() - blk.trace_term;
        let v = validate_block_mc(&q, 200_000, 5)?;
        println!("A = {a:+}: c = {:.4}, empirical P(Z < 0) = {v:.4} (target {eps})", q.c);
    }
    Ok(())
}
