//! Number formatting shared by the JSON and CSV writers.

use std::time::Instant;

/// 17 significant digits, the shortest width that round-trips every double.
pub fn sig17(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        format!("{v}")
    }
}

/// A JSON number, or `null` for NaN and infinities.
pub fn json_number(v: f64) -> String {
    if v.is_finite() {
        sig17(v)
    } else {
        "null".into()
    }
}

/// Shortest round-trip representation, used for parameter columns.
pub fn short(v: f64) -> String {
    format!("{v:?}")
}

/// Median wall-clock seconds of `repeats` runs of `f`, with the last result.
pub fn timed<T, E>(repeats: usize, mut f: impl FnMut() -> Result<T, E>) -> Result<(T, f64), E> {
    let mut times = Vec::with_capacity(repeats.max(1));
    let mut last = None;
    for _ in 0..repeats.max(1) {
        let t = Instant::now();
        let r = f()?;
        times.push(t.elapsed().as_secs_f64());
        last = Some(r);
    }
    times.sort_by(f64::total_cmp);
    let n = times.len();
    let median = if n % 2 == 1 {
        times[n / 2]
    } else {
        0.5 * (times[n / 2 - 1] + times[n / 2])
    };
    Ok((last.expect("at least one run"), median))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits_round_trip() {
        for v in [1.0, 0.1, -2.5e-300, std::f64::consts::PI, 1e22] {
            let s = sig17(v);
            assert_eq!(s.parse::<f64>().unwrap(), v);
            let mantissa = s.split('e').next().unwrap().replace(['-', '.'], "");
            assert_eq!(mantissa.len(), 17);
        }
        assert_eq!(json_number(f64::NAN), "null");
    }

    #[test]
    fn median_of_repeats() {
        let mut n = 0;
        let (v, _) = timed(3, || -> Result<i32, ()> {
            n += 1;
            Ok(n)
        })
        .unwrap();
        assert_eq!(v, 3);
    }
}
