//! Upper-tail F critical values at α = 0.05.
//!
//! Frozen from an external numerical inverse-CDF evaluation and rounded to
//! four decimals. Rows are `v1 = 1..=6`; columns are `v2 = 1..=30` followed
//! by the `v2 = ∞` limit (the χ² quantile divided by `v1`).

use super::StatsError;

/// Denominator degrees of freedom standing for ∞.
pub const DF_INFINITE: usize = usize::MAX;

/// Significance level of the embedded table.
pub const ALPHA: f64 = 0.05;

const MAX_V1: usize = 6;
const MAX_V2: usize = 30;

#[rustfmt::skip]
const F_095: [[f64; MAX_V2 + 1]; MAX_V1] = [
    // v1 = 1
    [161.4476, 18.5128, 10.1280, 7.7086, 6.6079, 5.9874, 5.5914, 5.3177, 5.1174, 4.9646, 4.8443, 4.7472, 4.6672, 4.6001, 4.5431, 4.4940, 4.4513, 4.4139, 4.3807, 4.3512, 4.3248, 4.3009, 4.2793, 4.2597, 4.2417, 4.2252, 4.2100, 4.1960, 4.1830, 4.1709, 3.8415],
    // v1 = 2
    [199.5000, 19.0000, 9.5521, 6.9443, 5.7861, 5.1433, 4.7374, 4.4590, 4.2565, 4.1028, 3.9823, 3.8853, 3.8056, 3.7389, 3.6823, 3.6337, 3.5915, 3.5546, 3.5219, 3.4928, 3.4668, 3.4434, 3.4221, 3.4028, 3.3852, 3.3690, 3.3541, 3.3404, 3.3277, 3.3158, 2.9957],
    // v1 = 3
    [215.7073, 19.1643, 9.2766, 6.5914, 5.4095, 4.7571, 4.3468, 4.0662, 3.8625, 3.7083, 3.5874, 3.4903, 3.4105, 3.3439, 3.2874, 3.2389, 3.1968, 3.1599, 3.1274, 3.0984, 3.0725, 3.0491, 3.0280, 3.0088, 2.9912, 2.9752, 2.9604, 2.9467, 2.9340, 2.9223, 2.6049],
    // v1 = 4
    [224.5832, 19.2468, 9.1172, 6.3882, 5.1922, 4.5337, 4.1203, 3.8379, 3.6331, 3.4780, 3.3567, 3.2592, 3.1791, 3.1122, 3.0556, 3.0069, 2.9647, 2.9277, 2.8951, 2.8661, 2.8401, 2.8167, 2.7955, 2.7763, 2.7587, 2.7426, 2.7278, 2.7141, 2.7014, 2.6896, 2.3719],
    // v1 = 5
    [230.1619, 19.2964, 9.0135, 6.2561, 5.0503, 4.3874, 3.9715, 3.6875, 3.4817, 3.3258, 3.2039, 3.1059, 3.0254, 2.9582, 2.9013, 2.8524, 2.8100, 2.7729, 2.7401, 2.7109, 2.6848, 2.6613, 2.6400, 2.6207, 2.6030, 2.5868, 2.5719, 2.5581, 2.5454, 2.5336, 2.2141],
    // v1 = 6
    [233.9860, 19.3295, 8.9406, 6.1631, 4.9503, 4.2839, 3.8660, 3.5806, 3.3738, 3.2172, 3.0946, 2.9961, 2.9153, 2.8477, 2.7905, 2.7413, 2.6987, 2.6613, 2.6283, 2.5990, 2.5727, 2.5491, 2.5277, 2.5082, 2.4904, 2.4741, 2.4591, 2.4453, 2.4324, 2.4205, 2.0986],
];

/// Exact table lookup. `v2 = DF_INFINITE` selects the limiting column.
pub fn f_critical(v1: usize, v2: usize, alpha: f64) -> Result<f64, StatsError> {
    let missing = || StatsError::Lookup { v1, v2, alpha };
    if alpha != ALPHA || !(1..=MAX_V1).contains(&v1) {
        return Err(missing());
    }
    let col = match v2 {
        DF_INFINITE => MAX_V2,
        1..=MAX_V2 => v2 - 1,
        _ => return Err(missing()),
    };
    Ok(F_095[v1 - 1][col])
}

/// Critical value used for verdicts. Between the last finite column and ∞
/// the `v2 = 30` entry stands in; it overstates the true value, so the
/// verdict can only err towards "not significant".
pub fn f_critical_conservative(v1: usize, v2: usize) -> Result<f64, StatsError> {
    let v2 = if v2 > MAX_V2 && v2 != DF_INFINITE { MAX_V2 } else { v2 };
    f_critical(v1, v2, ALPHA)
}
