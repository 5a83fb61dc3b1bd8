use num_complex::Complex64;

use super::{CompensatedSum, SpectralError, SpectralField};

/// Clear the zero mode; every other coefficient is untouched.
pub fn project_zero_mean(f: &SpectralField) -> SpectralField {
    let mut out = f.clone();
    out.coeffs_mut()[0] = Complex64::new(0.0, 0.0);
    out
}

/// Apply `Λ^γ`, i.e. multiply `coeff(k)` by `|k|^γ`, for `γ ∈ (0, 2]`.
///
/// Nyquist modes are zeroed along with the mean.
pub fn fractional_laplacian(f: &SpectralField, gamma: f64) -> Result<SpectralField, SpectralError> {
    if !(gamma > 0.0 && gamma <= 2.0) {
        return Err(SpectralError::GammaOutOfRange(gamma));
    }
    let grid = f.grid().clone();
    let mut out = f.clone();
    for (idx, c) in out.coeffs_mut().iter_mut().enumerate() {
        if idx == 0 || grid.is_nyquist(idx) {
            *c = Complex64::new(0.0, 0.0);
        } else {
            *c *= symbol_power(grid.ksq(idx), gamma);
        }
    }
    Ok(out)
}

/// `|k|^γ` from the exact integer `|k|^2`.
#[inline]
pub fn symbol_power(ksq: i64, gamma: f64) -> f64 {
    if gamma == 2.0 {
        ksq as f64
    } else if gamma == 1.0 {
        (ksq as f64).sqrt()
    } else {
        (ksq as f64).powf(0.5 * gamma)
    }
}

/// 2/3 rule: zero every mode with some `|k_j| > n/3`.
pub fn dealias(f: &SpectralField) -> SpectralField {
    let mut out = f.clone();
    dealias_in_place(&mut out);
    out
}

pub fn dealias_in_place(f: &mut SpectralField) {
    let grid = f.grid().clone();
    for (idx, c) in f.coeffs_mut().iter_mut().enumerate() {
        if !grid.is_retained(idx) {
            *c = Complex64::new(0.0, 0.0);
        }
    }
}

/// `∂_j f`, with Nyquist modes zeroed.
pub fn derivative(f: &SpectralField, axis: usize) -> SpectralField {
    let grid = f.grid().clone();
    let mut out = f.clone();
    for (idx, c) in out.coeffs_mut().iter_mut().enumerate() {
        if grid.is_nyquist(idx) {
            *c = Complex64::new(0.0, 0.0);
        } else {
            let kj = grid.wavevector(idx)[axis] as f64;
            *c = Complex64::new(-kj * c.im, kj * c.re);
        }
    }
    out
}

/// `( Σ_{k≠0} |k|^{2s} |f̂(k)|² )^{1/2}`; `s = 0` is the L² norm of the
/// zero-mean part under the normalized measure.
pub fn sobolev_norm(f: &SpectralField, s: f64) -> f64 {
    let grid = f.grid();
    let mut acc = CompensatedSum::new();
    for (idx, c) in f.coeffs().iter().enumerate().skip(1) {
        let a = c.norm_sqr();
        if a == 0.0 {
            continue;
        }
        let w = if s == 0.0 {
            1.0
        } else {
            (grid.ksq(idx) as f64).powf(s)
        };
        acc.add(w * a);
    }
    acc.value().sqrt()
}

/// Squared `H^s` norm allowing negative `s`.
pub fn sobolev_norm_sq(f: &SpectralField, s: f64) -> f64 {
    let grid = f.grid();
    f.coeffs()
        .iter()
        .enumerate()
        .skip(1)
        .map(|(idx, c)| (grid.ksq(idx) as f64).powf(s) * c.norm_sqr())
        .collect::<CompensatedSum>()
        .value()
}

/// `( Σ_{k≠0} |k|^{2r} e^{2τ|k|^{1/s}} |f̂(k)|² )^{1/2}`.
///
/// Terms are formed in log space; any term or partial sum past `f64::MAX`
/// yields [`SpectralError::Overflow`].
pub fn gevrey_norm(f: &SpectralField, tau: f64, s: f64, r: f64) -> Result<f64, SpectralError> {
    if tau < 0.0 || !tau.is_finite() {
        return Err(SpectralError::InvalidParameter(format!("tau = {tau}")));
    }
    if s < 1.0 || !s.is_finite() {
        return Err(SpectralError::InvalidParameter(format!("gevrey index s = {s}")));
    }
    if tau == 0.0 {
        return Ok(sobolev_norm(f, r));
    }
    let grid = f.grid();
    let log_max = f64::MAX.ln();
    let mut acc = CompensatedSum::new();
    for (idx, c) in f.coeffs().iter().enumerate().skip(1) {
        let a = c.norm_sqr();
        if a == 0.0 {
            continue;
        }
        let ksq = grid.ksq(idx) as f64;
        let log_term = a.ln() + r * ksq.ln() + 2.0 * tau * ksq.powf(0.5 / s);
        if log_term >= log_max {
            return Err(SpectralError::Overflow);
        }
        acc.add(log_term.exp());
    }
    let total = acc.value();
    if !total.is_finite() {
        return Err(SpectralError::Overflow);
    }
    Ok(total.sqrt())
}

/// Real inner product `⟨f, g⟩ = Σ_k f̂(k) conj(ĝ(k))` under the normalized measure.
pub fn inner_product(f: &SpectralField, g: &SpectralField) -> f64 {
    f.coeffs()
        .iter()
        .zip(g.coeffs())
        .map(|(a, b)| a.re * b.re + a.im * b.im)
        .collect::<CompensatedSum>()
        .value()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{forward, inverse, make_grid, Grid};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn single(grid: &Grid, k: &[i64]) -> SpectralField {
        let mut f = SpectralField::zeros(grid);
        f.set_mode(k, Complex64::new(1.0, 0.0)).unwrap();
        f
    }

    fn random_field(grid: &Grid, seed: u64) -> SpectralField {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x: Vec<f64> = (0..grid.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        project_zero_mean(&forward(grid, &x).unwrap())
    }

    #[test]
    fn zero_mean_projection() {
        let g = make_grid(2, 8).unwrap();
        let f = forward(&g, &vec![3.0; g.len()]).unwrap();
        assert!((f.coeffs()[0].re - 3.0).abs() < 1e-15);
        let p = project_zero_mean(&f);
        assert!(p.coeffs().iter().all(|c| c.norm() < 1e-15));

        let r = random_field(&g, 1);
        assert_eq!(project_zero_mean(&r), r);
    }

    #[test]
    fn forcing_with_mean_is_projected() {
        let g = make_grid(2, 16).unwrap();
        let s: Vec<f64> = (0..g.len()).map(|i| 2.0 + g.point(i)[1].sin()).collect();
        let f = project_zero_mean(&forward(&g, &s).unwrap());
        let back = inverse(&f);
        let mean: f64 = back.iter().sum::<f64>() / back.len() as f64;
        assert!(mean.abs() < 1e-15);
    }

    #[test]
    fn fractional_laplacian_examples() {
        let g2 = make_grid(2, 16).unwrap();
        let f = fractional_laplacian(&single(&g2, &[3, 4]), 1.0).unwrap();
        assert_eq!(f.coeff(&[3, 4]).unwrap().re, 5.0);
        let f = fractional_laplacian(&single(&g2, &[1, 0]), 0.5).unwrap();
        assert_eq!(f.coeff(&[1, 0]).unwrap().re, 1.0);
        let g3 = make_grid(3, 8).unwrap();
        let f = fractional_laplacian(&single(&g3, &[1, 1, 0]), 2.0).unwrap();
        assert_eq!(f.coeff(&[1, 1, 0]).unwrap().re, 2.0);
        assert!(matches!(
            fractional_laplacian(&f, 2.5),
            Err(SpectralError::GammaOutOfRange(_))
        ));
        assert!(fractional_laplacian(&f, 0.0).is_err());
    }

    #[test]
    fn sobolev_examples() {
        let g = make_grid(2, 16).unwrap();
        assert!((sobolev_norm(&single(&g, &[1, 0]), 1.0) - 2f64.sqrt()).abs() < 1e-15);
        assert!((sobolev_norm(&single(&g, &[2, 0]), 2.0) - 32f64.sqrt()).abs() < 1e-14);
        assert_eq!(sobolev_norm(&SpectralField::zeros(&g), 3.0), 0.0);
    }

    #[test]
    fn gevrey_examples() {
        let g = make_grid(2, 16).unwrap();
        let f = single(&g, &[1, 0]);
        let v = gevrey_norm(&f, 0.5, 1.0, 0.0).unwrap();
        assert!((v - (2.0 * 1f64.exp()).sqrt()).abs() < 1e-14);
        let r = random_field(&g, 3);
        assert_eq!(gevrey_norm(&r, 0.0, 1.0, 1.5).unwrap(), sobolev_norm(&r, 1.5));
        let hi = single(&g, &[8, 0]);
        assert!(matches!(gevrey_norm(&hi, 1e3, 1.0, 0.0), Err(SpectralError::Overflow)));
    }

    #[test]
    fn dealias_examples() {
        let g = make_grid(2, 12).unwrap();
        let f = single(&g, &[5, 0]);
        assert!(dealias(&f).coeffs().iter().all(|c| c.norm() == 0.0));
        let f = single(&g, &[4, 0]);
        assert_eq!(dealias(&f), f);
        let r = random_field(&g, 4);
        assert_eq!(dealias(&dealias(&r)), dealias(&r));
    }

    #[test]
    fn parseval_holds() {
        for seed in 0..20 {
            let g = make_grid(2, 32).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let x: Vec<f64> = (0..g.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let f = forward(&g, &x).unwrap();
            let phys: f64 = x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64;
            let spec: f64 = f.coeffs().iter().map(|c| c.norm_sqr()).sum();
            assert!((phys - spec).abs() / phys < 1e-12);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn sobolev_monotone_in_s(seed in 0u64..1000, s in 0.0f64..3.0, ds in 0.0f64..2.0) {
            let g = make_grid(2, 16).unwrap();
            let f = random_field(&g, seed);
            prop_assert!(sobolev_norm(&f, s) <= sobolev_norm(&f, s + ds) * (1.0 + 1e-14));
        }

        #[test]
        fn gevrey_monotone_in_tau(seed in 0u64..1000, tau in 0.0f64..1.0, dt in 0.0f64..1.0) {
            let g = make_grid(2, 16).unwrap();
            let f = random_field(&g, seed);
            let a = gevrey_norm(&f, tau, 1.0, 0.5).unwrap();
            let b = gevrey_norm(&f, tau + dt, 1.0, 0.5).unwrap();
            prop_assert!(a <= b * (1.0 + 1e-14));
        }

        #[test]
        fn laplacian_powers_compose(seed in 0u64..1000, g1 in 0.05f64..1.0, g2 in 0.05f64..1.0) {
            let g = make_grid(2, 16).unwrap();
            let f = random_field(&g, seed);
            let two = fractional_laplacian(&fractional_laplacian(&f, g1).unwrap(), g2).unwrap();
            let one = fractional_laplacian(&f, g1 + g2).unwrap();
            let scale = one.coeffs().iter().fold(0.0f64, |m, c| m.max(c.norm()));
            prop_assert!(two.max_abs_diff(&one) <= 1e-12 * scale);
        }

        #[test]
        fn projection_and_dealias_commute(seed in 0u64..1000) {
            let g = make_grid(2, 12).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let x: Vec<f64> = (0..g.len()).map(|_| rng.gen_range(-1.0..1.0) + 0.5).collect();
            let f = forward(&g, &x).unwrap();
            let a = dealias(&project_zero_mean(&f));
            let b = project_zero_mean(&dealias(&f));
            prop_assert_eq!(&a, &b);
            prop_assert_eq!(project_zero_mean(&a), a.clone());
        }
    }
}
