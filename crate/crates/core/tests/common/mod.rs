#![allow(dead_code)]

use mestim::PopulationParams;
use proptest::prelude::*;

/// Parameter sets satisfying every `PopulationParams` invariant, with `mu_y`
/// bounded away from zero so the exponential ratio MSE is defined.
pub fn params_strategy() -> impl Strategy<Value = PopulationParams> {
    (
        (5.0f64..500.0, any::<bool>()),
        1.0f64..500.0,
        1.0f64..5000.0,
        1.0f64..5000.0,
        -0.99f64..0.99,
        prop_oneof![Just(0.0), 0.0f64..1000.0],
        prop_oneof![Just(0.0), 0.0f64..1000.0],
        2u64..500,
    )
        .prop_map(|((my, neg), mu_x, sigma2_y, sigma2_x, rho, sigma2_u, sigma2_v, n)| PopulationParams {
            mu_y: if neg { -my } else { my },
            mu_x,
            sigma2_y,
            sigma2_x,
            rho,
            sigma2_u,
            sigma2_v,
            n,
        })
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        ((a - b) / b).abs()
    }
}

pub fn table51() -> PopulationParams {
    PopulationParams::consumption_income()
}
