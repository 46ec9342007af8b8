//! Closed-form performance models.
//!
//! Two families: the operand-length model (shrinking operands accelerates
//! only the payload portion of the running time, so the achievable speedup
//! stays below the length ratio), and the parallel-efficiency surface
//! `E(n, alpha) = 1 / (alpha + (1 - alpha) * n)` over processor count and
//! payload fraction.

use crate::error::{Error, Result};

/// Operand-length model: payload-time fraction `f`, operand-length ratio `r`
/// and the speedup they produce together.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PrecisionModel {
    pub f: f64,
    pub r: f64,
    pub speedup: f64,
}

/// One evaluation of the efficiency surface.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EfficiencyPoint {
    pub n: u64,
    pub alpha: f64,
    /// The non-payload portion as given, kept exact for export.
    pub one_minus_alpha: f64,
    pub e: f64,
}

fn check_fraction(name: &str, value: f64) -> Result<()> {
    if !(value.is_finite() && (0.0..=1.0).contains(&value)) {
        return Err(Error::Domain(format!(
            "{name} must lie in [0, 1], got {value}"
        )));
    }
    Ok(())
}

/// Speedup from shortening operands by factor `r` when only the payload
/// fraction `f` of the time scales with operand length:
/// `1 / ((1 - f) + f / r)`.
pub fn speedup_for_operand_ratio(f: f64, r: f64) -> Result<f64> {
    check_fraction("payload fraction", f)?;
    if !(r.is_finite() && r > 0.0) {
        return Err(Error::Domain(format!(
            "operand-length ratio must be positive, got {r}"
        )));
    }
    Ok(1.0 / ((1.0 - f) + f / r))
}

/// Payload-time fraction implied by an observed speedup at operand-length
/// ratio `r`: `f = (1 - 1/speedup) / (1 - 1/r)`. Exact inverse of
/// [`speedup_for_operand_ratio`].
pub fn infer_payload_fraction(speedup: f64, r: f64) -> Result<f64> {
    if !(r.is_finite() && r > 0.0) || r == 1.0 {
        return Err(Error::Domain(format!(
            "operand-length ratio must be positive and not 1, got {r}"
        )));
    }
    let (low, high) = if r > 1.0 { (1.0, r) } else { (r, 1.0) };
    if !(speedup.is_finite() && speedup >= low && speedup <= high) {
        return Err(Error::Domain(format!(
            "speedup {speedup} outside the model range [{low}, {high}] for ratio {r}"
        )));
    }
    Ok((1.0 - 1.0 / speedup) / (1.0 - 1.0 / r))
}

/// Parallel efficiency of `n` processors at payload fraction `alpha`:
/// `1 / (alpha + (1 - alpha) * n)`.
pub fn efficiency(n: u64, alpha: f64) -> Result<f64> {
    if n < 1 {
        return Err(Error::Domain("processor count must be at least 1".into()));
    }
    check_fraction("alpha", alpha)?;
    // one processor, or a fully-payload workload, is exactly efficient
    if n == 1 || alpha == 1.0 {
        return Ok(1.0);
    }
    Ok(1.0 / (alpha + (1.0 - alpha) * n as f64))
}

/// Cartesian-product evaluation of [`efficiency`], row-major with `n` as the
/// row index: for each `n`, every `1 - alpha` value in order.
pub fn efficiency_surface(
    n_values: &[u64],
    one_minus_alpha_values: &[f64],
) -> Result<Vec<EfficiencyPoint>> {
    if n_values.is_empty() || one_minus_alpha_values.is_empty() {
        return Err(Error::Domain("surface axes must not be empty".into()));
    }
    let mut grid = Vec::with_capacity(n_values.len() * one_minus_alpha_values.len());
    for &n in n_values {
        for &one_minus_alpha in one_minus_alpha_values {
            check_fraction("1 - alpha", one_minus_alpha)?;
            let alpha = 1.0 - one_minus_alpha;
            grid.push(EfficiencyPoint {
                n,
                alpha,
                one_minus_alpha,
                e: efficiency(n, alpha)?,
            });
        }
    }
    Ok(grid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn speedup_limits() {
        assert_eq!(speedup_for_operand_ratio(1.0, 4.0).unwrap(), 4.0);
        assert_eq!(speedup_for_operand_ratio(0.0, 4.0).unwrap(), 1.0);
        // the payload fraction behind the reported 3.01x at quarter-length
        assert_abs_diff_eq!(
            speedup_for_operand_ratio(0.890366, 4.0).unwrap(),
            3.01,
            epsilon = 1e-4
        );
        assert!(speedup_for_operand_ratio(1.5, 4.0).is_err());
        assert!(speedup_for_operand_ratio(-0.1, 4.0).is_err());
    }

    #[test]
    fn inferred_fractions_for_reported_speedups() {
        assert_abs_diff_eq!(
            infer_payload_fraction(3.01, 4.0).unwrap(),
            0.890366,
            epsilon = 1e-5
        );
        assert_abs_diff_eq!(
            infer_payload_fraction(3.42, 4.0).unwrap(),
            0.943469,
            epsilon = 1e-5
        );
        assert_eq!(infer_payload_fraction(4.0, 4.0).unwrap(), 1.0);
        assert!(infer_payload_fraction(4.5, 4.0).is_err());
        assert!(infer_payload_fraction(0.9, 4.0).is_err());
    }

    #[test]
    fn efficiency_values() {
        assert_eq!(efficiency(1, 0.123).unwrap(), 1.0);
        assert_eq!(efficiency(77, 1.0).unwrap(), 1.0);
        assert_abs_diff_eq!(
            efficiency(1_000_000, 1.0 - 1e-7).unwrap(),
            0.909091,
            epsilon = 1e-6
        );
    }

    #[test]
    fn surface_rows() {
        let grid = efficiency_surface(&[1], &[0.0]).unwrap();
        assert_eq!(grid.len(), 1);
        assert_eq!(grid[0].e, 1.0);

        let grid = efficiency_surface(&[10, 100], &[0.01]).unwrap();
        assert_abs_diff_eq!(grid[0].e, 0.9174, epsilon = 1e-4);
        assert_abs_diff_eq!(grid[1].e, 0.5025, epsilon = 1e-4);

        assert!(efficiency_surface(&[], &[0.01]).is_err());
        assert!(efficiency_surface(&[1], &[]).is_err());
    }

    #[test]
    fn surface_monotone_in_n_for_fixed_alpha() {
        let ns = [1u64, 10, 100, 1000, 10000];
        let omas = [1e-7, 1e-4, 1e-2];
        let grid = efficiency_surface(&ns, &omas).unwrap();
        for (col, _) in omas.iter().enumerate() {
            let column: Vec<f64> = (0..ns.len()).map(|row| grid[row * omas.len() + col].e).collect();
            assert!(column.windows(2).all(|w| w[1] <= w[0]));
        }
    }

    #[test]
    fn short_operands_hardly_matter_without_payload() {
        // the workload dominates: at f = 0.05 even a 4x operand shrink buys
        // less than 0.04 in speedup
        let gain = speedup_for_operand_ratio(0.05, 4.0).unwrap()
            - speedup_for_operand_ratio(0.05, 1.0).unwrap();
        assert!(gain < 0.04, "gain was {gain}");
    }

    proptest! {
        #[test]
        fn speedup_and_inference_are_inverses(f in 0.01f64..1.0, r in 1.5f64..16.0) {
            let s = speedup_for_operand_ratio(f, r).unwrap();
            let back = infer_payload_fraction(s, r).unwrap();
            prop_assert!((back - f).abs() <= 1e-12 * f.max(1.0));
        }

        #[test]
        fn speedup_never_exceeds_ratio(f in 0.0f64..=1.0, r in 1.0f64..16.0) {
            let s = speedup_for_operand_ratio(f, r).unwrap();
            prop_assert!(s <= r + 1e-12);
            prop_assert!(s >= 1.0 - 1e-12);
        }

        #[test]
        fn efficiency_monotone(n in 1u64..100_000, alpha in 0.0f64..1.0) {
            let e = efficiency(n, alpha).unwrap();
            prop_assert!(efficiency(n + 1, alpha).unwrap() <= e);
            if n > 1 {
                let richer = efficiency(n, (alpha + 1.0) / 2.0).unwrap();
                prop_assert!(richer >= e);
            }
        }
    }
}
