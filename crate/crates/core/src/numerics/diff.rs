#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Derivative {
    pub value: f64,
    /// Difference between the step-`h` and step-`h/2` central estimates,
    /// scaled as the Richardson error bound.
    pub error: f64,
}

/// Central difference at `x` with one step-halving Richardson refinement.
pub fn differentiate_central<F>(mut f: F, x: f64, step: f64) -> Derivative
where
    F: FnMut(f64) -> f64,
{
    let coarse = (f(x + step) - f(x - step)) / (2.0 * step);
    let h = 0.5 * step;
    let fine = (f(x + h) - f(x - h)) / (2.0 * h);
    Derivative {
        value: (4.0 * fine - coarse) / 3.0,
        error: (fine - coarse).abs() / 3.0,
    }
}
