//! Fixed-order Gauss–Legendre quadrature and exact integrals of
//! piecewise-linear interpolants.

const GL10_NODES: [f64; 5] = [
    0.148_874_338_981_631_2,
    0.433_395_394_129_247_2,
    0.679_409_568_299_024_4,
    0.865_063_366_688_984_5,
    0.973_906_528_517_171_7,
];
const GL10_WEIGHTS: [f64; 5] = [
    0.295_524_224_714_752_9,
    0.269_266_719_309_996_3,
    0.219_086_362_515_982,
    0.149_451_349_150_580_6,
    0.066_671_344_308_688_1,
];

/// 10-point Gauss–Legendre rule on `[a, b]`.
pub fn gauss_legendre<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut s = 0.0;
    for (x, w) in GL10_NODES.iter().zip(GL10_WEIGHTS) {
        s += w * (f(c - h * x) + f(c + h * x));
    }
    s * h
}

/// Composite rule over consecutive knots.
pub fn integrate_over<F: Fn(f64) -> f64>(f: &F, knots: &[f64]) -> f64 {
    knots.windows(2).map(|w| gauss_legendre(f, w[0], w[1])).sum()
}

/// `∫ x^k · ℓ(x) dx` over one segment where `ℓ` is linear from `(x0, y0)`
/// to `(x1, y1)`, for `k` in `0..=2`.
pub fn linear_moment(x0: f64, y0: f64, x1: f64, y1: f64, k: u32) -> f64 {
    // Simpson is exact for polynomials of degree <= 3.
    let xm = 0.5 * (x0 + x1);
    let ym = 0.5 * (y0 + y1);
    let p = |x: f64| x.powi(k as i32);
    (x1 - x0) / 6.0 * (p(x0) * y0 + 4.0 * p(xm) * ym + p(x1) * y1)
}

/// `∫ φ(ℓ(x)) dx` over one segment with `ℓ` linear from `y0` to `y1`,
/// given an antiderivative `Φ` of `φ`.
pub fn linear_compose<P: Fn(f64) -> f64, F: Fn(f64) -> f64>(
    dx: f64,
    y0: f64,
    y1: f64,
    phi: &F,
    antiderivative: &P,
) -> f64 {
    let dy = y1 - y0;
    if dy.abs() <= 1e-9 * y0.abs().max(y1.abs()).max(1e-300) {
        return dx * phi(0.5 * (y0 + y1));
    }
    dx * (antiderivative(y1) - antiderivative(y0)) / dy
}
