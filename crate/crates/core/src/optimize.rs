//! Deterministic one-dimensional search helpers.

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Inclusive grid `lo, lo + step, …` up to `hi` (within rounding).
pub fn grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    assert!(step > 0.0 && hi >= lo, "bad grid [{lo}, {hi}] step {step}");
    let n = ((hi - lo) / step + 1e-9).floor() as usize;
    (0..=n).map(|k| lo + step * k as f64).collect()
}

/// Index of the largest value; ties go to the lowest index and NaN never wins.
pub fn argmax(values: &[f64]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, &v) in values.iter().enumerate() {
        match best {
            _ if v.is_nan() => {}
            None => best = Some(i),
            Some(b) if v > values[b] => best = Some(i),
            _ => {}
        }
    }
    best
}

/// Golden-section maximization of a unimodal `f` on `[lo, hi]` until the
/// bracket is shorter than `tol`. Returns the best point seen.
pub fn golden_max(f: impl Fn(f64) -> f64, lo: f64, hi: f64, tol: f64) -> (f64, f64) {
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    let mut best = if fd > fc { (d, fd) } else { (c, fc) };
    while b - a > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
            if fc >= best.1 {
                best = (c, fc);
            }
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
            if fd > best.1 {
                best = (d, fd);
            }
        }
    }
    best
}

/// Grid scan followed by golden refinement in the cells around the best node.
pub fn grid_then_golden(f: impl Fn(f64) -> f64, lo: f64, hi: f64, step: f64, tol: f64) -> (f64, f64) {
    let xs = grid(lo, hi, step);
    let vals: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
    refine_around(&f, &xs, &vals, lo, hi, step, tol)
}

/// Golden refinement of a precomputed grid scan. Grid nodes take part in the
/// final comparison so the result never falls below the grid maximum.
pub fn refine_around(
    f: impl Fn(f64) -> f64,
    xs: &[f64],
    vals: &[f64],
    lo: f64,
    hi: f64,
    step: f64,
    tol: f64,
) -> (f64, f64) {
    let k = argmax(vals).expect("empty or all-NaN scan");
    let (x0, f0) = (xs[k], vals[k]);
    let (gx, gf) = golden_max(&f, (x0 - step).max(lo), (x0 + step).min(hi), tol);
    if gf > f0 {
        (gx, gf)
    } else {
        (x0, f0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_is_inclusive() {
        let g = grid(0.3, 1.5, 0.02);
        assert_eq!(g.len(), 61);
        assert!((g[60] - 1.5).abs() < 1e-12);
    }

    #[test]
    fn argmax_prefers_first_of_ties() {
        assert_eq!(argmax(&[1.0, 3.0, 3.0, f64::NAN]), Some(1));
        assert_eq!(argmax(&[f64::NAN, 0.5]), Some(1));
    }

    #[test]
    fn golden_finds_parabola_peak() {
        let (x, fx) = golden_max(|x| -(x - 0.37).powi(2), 0.0, 1.0, 1e-8);
        assert!((x - 0.37).abs() < 1e-7);
        assert!(fx <= 0.0 && fx > -1e-13);
        let (x, _) = grid_then_golden(|x| (-(x - 2.123).powi(2)).exp(), 0.0, 4.0, 0.05, 1e-6);
        assert!((x - 2.123).abs() < 1e-5);
    }
}
