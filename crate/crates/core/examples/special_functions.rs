//! The special functions behind the closed-form intervals.

use laplace_ci::specfun::{
    f_quantile, ln_choose, ln_gamma, normal_cdf, normal_quantile, reg_inc_beta, reg_inc_beta_inv,
};

fn main() -> laplace_ci::Result<()> {
    println!("ln Gamma(0.5)           = {:.15}", ln_gamma(0.5)?);
    println!("ln C(1000, 500)         = {:.10}", ln_choose(1000, 500)?);
    println!("Phi(1.96)               = {:.15}", normal_cdf(1.96));
    println!("z(0.975)                = {:.15}", normal_quantile(0.975)?);
    println!("z(0.995)                = {:.15}", normal_quantile(0.995)?);
    println!(
        "I_0.3(3, 4)             = {:.15}",
        reg_inc_beta(3.0, 4.0, 0.3)?
    );
    println!(
        "Beta(3, 4) 97.5% point  = {:.15}",
        reg_inc_beta_inv(3.0, 4.0, 0.975)?
    );
    println!(
        "F(10, 2) 97.5% point    = {:.10}",
        f_quantile(0.975, 10.0, 2.0)?
    );
    Ok(())
}
