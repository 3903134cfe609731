//! Where flip-angle errors erase the benefit of dynamically corrected gates.

use anticoherent::experiments::{control_error_grid, ControlErrorConfig, ControlErrorType};
use anticoherent::Result;

fn main() -> Result<()> {
    for error_type in [
        ControlErrorType::Dd,
        ControlErrorType::BpType2,
        ControlErrorType::BpType1,
    ] {
        let cfg = ControlErrorConfig {
            error_type,
            h_points: 5,
            eps_points: 16,
            instances: 4,
            ..Default::default()
        };
        let g = control_error_grid(&cfg)?;
        println!("{}:", error_type.as_str());
        for b in &g.boundary {
            match b.eps_star {
                Some(e) => println!("  h = {:.1e}: DCG wins while eps < {e:.2e}", b.h),
                None => println!("  h = {:.1e}: no crossing on the grid", b.h),
            }
        }
        if let Some(f) = g.boundary_fit {
            println!("  eps* ~ 10^{:.2} h^{:.2}", f.intercept, f.slope);
        }
        if let Some(f) = g.limit_fit {
            println!(
                "  distance doubles at eps ~ 10^{:.2} h^{:.2}",
                f.intercept, f.slope
            );
        }
    }
    Ok(())
}
