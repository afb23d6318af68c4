//! Composite Simpson quadrature on uniform grids.

/// Composite Simpson rule with `n` (even) intervals.
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let n = n.max(2) + n % 2;
    let h = (b - a) / n as f64;
    let mut sum = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * f(a + i as f64 * h);
    }
    sum * h / 3.0
}

/// Simpson's rule, doubling the interval count until successive estimates
/// differ by less than `tol` (absolute). Returns the last estimate and the
/// interval count used.
pub fn simpson_refined<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> (f64, usize) {
    let mut n = 64;
    let mut prev = simpson(&f, a, b, n);
    loop {
        n *= 2;
        let next = simpson(&f, a, b, n);
        if (next - prev).abs() < tol || n >= 1 << 22 {
            return (next, n);
        }
        prev = next;
    }
}
