use super::PerfError;

/// Amdahl's law: speedup on `cores` workers when a fraction `p` of the
/// sequential work parallelizes perfectly.
pub fn amdahl(p: f64, cores: u32) -> Result<f64, PerfError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(PerfError::BadFraction(p));
    }
    if cores == 0 {
        return Err(PerfError::BadCores);
    }
    Ok(1.0 / ((1.0 - p) + p / f64::from(cores)))
}

/// Parallel fraction that yields `speedup` on `cores` workers (inverse of
/// [`amdahl`]). Requires `cores >= 2` and `1 <= speedup <= cores`.
pub fn amdahl_fraction(speedup: f64, cores: u32) -> Result<f64, PerfError> {
    if cores < 2 {
        return Err(PerfError::BadCores);
    }
    let n = f64::from(cores);
    if !(1.0..=n).contains(&speedup) {
        return Err(PerfError::BadFraction(speedup));
    }
    Ok((1.0 - 1.0 / speedup) / (1.0 - 1.0 / n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn endpoints() {
        assert_eq!(amdahl(1.0, 8).unwrap(), 8.0);
        assert_eq!(amdahl(0.0, 8).unwrap(), 1.0);
        assert!((amdahl(0.99690, 8).unwrap() - 7.83).abs() <= 0.01);
    }

    #[test]
    fn rejects_bad_input() {
        assert_eq!(amdahl(1.5, 8), Err(PerfError::BadFraction(1.5)));
        assert_eq!(amdahl(-0.1, 8), Err(PerfError::BadFraction(-0.1)));
        assert!(amdahl(f64::NAN, 8).is_err());
        assert_eq!(amdahl(0.5, 0), Err(PerfError::BadCores));
        assert!(amdahl_fraction(9.0, 8).is_err());
    }

    proptest! {
        #[test]
        fn monotone_in_fraction_and_cores(p in 0.0f64..=1.0, q in 0.0f64..=1.0, n in 1u32..64) {
            let (lo, hi) = if p <= q { (p, q) } else { (q, p) };
            prop_assert!(amdahl(lo, n).unwrap() <= amdahl(hi, n).unwrap());
            prop_assert!(amdahl(p, n).unwrap() <= amdahl(p, n + 1).unwrap());
            prop_assert!((amdahl(p, 1).unwrap() - 1.0).abs() < 1e-15);
        }

        #[test]
        fn inverse_round_trips(s in 1.0f64..8.0) {
            let p = amdahl_fraction(s, 8).unwrap();
            prop_assert!((amdahl(p, 8).unwrap() - s).abs() < 1e-9);
        }
    }
}
