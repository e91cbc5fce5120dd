use num_traits::{AsPrimitive, Float};

use crate::error::{check_len, NnError, Result};

/// `target ← (1−τ)·target + τ·online`, evaluated as `target + τ·(online − target)`
/// in `f64`. `τ = 1` is an exact copy.
pub fn polyak_update<T>(target: &mut [T], online: &[T], tau: f64) -> Result<()>
where
    T: Float + AsPrimitive<f64>,
    f64: AsPrimitive<T>,
{
    if !(tau > 0.0 && tau <= 1.0) {
        return Err(NnError::InvalidTau(tau));
    }
    check_len("polyak parameters", target.len(), online.len())?;
    if tau == 1.0 {
        target.copy_from_slice(online);
        return Ok(());
    }
    for (t, &o) in target.iter_mut().zip(online) {
        let tv: f64 = t.as_();
        let ov: f64 = o.as_();
        *t = (tv + tau * (ov - tv)).as_();
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn soft_update_examples() {
        let mut t = [0.0f64];
        polyak_update(&mut t, &[1.0], 0.005).unwrap();
        assert_eq!(t[0], 0.005);

        let mut t = [0.25f32, -3.0];
        polyak_update(&mut t, &[7.5, 1e-3], 1.0).unwrap();
        assert_eq!(t, [7.5, 1e-3]);

        let mut t = [0.123f32, 9.0];
        polyak_update(&mut t, &[0.123, 9.0], 0.3).unwrap();
        assert_eq!(t, [0.123, 9.0]);
    }

    #[test]
    fn rejects_tau_outside_unit_interval() {
        let mut t = [0.0f32];
        for tau in [0.0, -0.1, 1.5, f64::NAN] {
            assert!(matches!(polyak_update(&mut t, &[1.0], tau), Err(NnError::InvalidTau(_))));
        }
        assert!(polyak_update(&mut t, &[1.0, 2.0], 0.5).is_err());
    }

    proptest! {
        #[test]
        fn update_contracts_towards_online(
            pairs in prop::collection::vec((-100.0f64..100.0, -100.0f64..100.0), 1..20),
            tau in 0.001f64..1.0,
        ) {
            let mut target: Vec<f64> = pairs.iter().map(|p| p.0).collect();
            let online: Vec<f64> = pairs.iter().map(|p| p.1).collect();
            let before: Vec<f64> = target.iter().zip(&online).map(|(t, o)| (t - o).abs()).collect();
            polyak_update(&mut target, &online, tau).unwrap();
            for ((t, o), b) in target.iter().zip(&online).zip(&before) {
                prop_assert!(((t - o).abs() - (1.0 - tau) * b).abs() <= 1e-12 * (1.0 + b));
            }
        }
    }
}
