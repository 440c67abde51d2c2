use num_complex::Complex64;
use rand::Rng;

use rmt_core::ensembles::{catalog_distribution, sample_matrix, wigner_profile, SymmetryClass};
use rmt_core::linalg::{eigh, eigvalsh, resolvent, stieltjes, HermitianMatrix, LuFactors};
use rmt_core::locallaw::{diagnostics, verify_perturbation_identities, DiagnosticsOptions, MinorRoute};
use rmt_core::seed::rng_from;
use rmt_core::semicircle::{classical_locations, msc, nsc, rho_sc};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn random_hermitian(n: usize, seed: u64) -> HermitianMatrix {
    let mut rng = rng_from(seed);
    HermitianMatrix::from_upper(n, false, |i, j| {
        let re: f64 = rng.random_range(-1.0..1.0);
        if i == j {
            c(re, 0.0)
        } else {
            c(re, rng.random_range(-1.0..1.0))
        }
    })
}

/// Coefficients c_0..c_n of det(xI − A) by Faddeev–LeVerrier.
fn char_poly(a: &HermitianMatrix) -> Vec<f64> {
    let n = a.dim();
    let mul = |x: &Vec<Complex64>, y: &Vec<Complex64>| {
        let mut out = vec![Complex64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for k in 0..n {
                for j in 0..n {
                    out[i * n + j] += x[i * n + k] * y[k * n + j];
                }
            }
        }
        out
    };
    let am: Vec<Complex64> = (0..n * n).map(|k| a.get(k / n, k % n)).collect();
    let mut coef = vec![0.0; n + 1];
    coef[n] = 1.0;
    let mut m = vec![Complex64::new(0.0, 0.0); n * n];
    for k in 1..=n {
        let mut next = mul(&am, &m);
        for i in 0..n {
            next[i * n + i] += coef[n - k + 1];
        }
        m = next;
        let am_m = mul(&am, &m);
        let tr: Complex64 = (0..n).map(|i| am_m[i * n + i]).sum();
        coef[n - k] = -tr.re / k as f64;
    }
    coef
}

fn poly_roots_by_bisection(coef: &[f64], lo: f64, hi: f64) -> Vec<f64> {
    let p = |x: f64| coef.iter().rev().fold(0.0, |acc, &c| acc * x + c);
    let steps = 200_000;
    let h = (hi - lo) / steps as f64;
    let mut roots = Vec::new();
    for k in 0..steps {
        let (mut a, mut b) = (lo + k as f64 * h, lo + (k + 1) as f64 * h);
        let (mut fa, fb) = (p(a), p(b));
        if fa == 0.0 {
            roots.push(a);
            continue;
        }
        if fa * fb > 0.0 {
            continue;
        }
        for _ in 0..200 {
            let mid = 0.5 * (a + b);
            let fm = p(mid);
            if fm == 0.0 || mid == a || mid == b {
                a = mid;
                b = mid;
                break;
            }
            if fa * fm < 0.0 {
                b = mid;
            } else {
                a = mid;
                fa = fm;
            }
        }
        roots.push(0.5 * (a + b));
    }
    roots
}

#[test]
fn six_by_six_eigenvalues_match_characteristic_polynomial() {
    for seed in 0..10 {
        let h = random_hermitian(6, 1000 + seed);
        let coef = char_poly(&h);
        let bound = h.frobenius_sq().sqrt() + 1.0;
        let roots = poly_roots_by_bisection(&coef, -bound, bound);
        assert_eq!(roots.len(), 6, "seed {seed}: {roots:?}");
        let ev = eigvalsh(&h).unwrap();
        for (r, e) in roots.iter().zip(&ev) {
            assert!((r - e).abs() < 1e-8, "seed {seed}: {r} vs {e}");
        }
    }
}

#[test]
fn lu_resolvent_matches_spectral_decomposition() {
    let zs = [c(0.0, 1.0), c(0.3, 0.01), c(-1.7, 0.2), c(2.5, 0.05), c(-0.4, 1e-3)];
    for seed in 0..100u64 {
        let n = 4 + (seed as usize % 29);
        let h = random_hermitian(n, seed);
        let spec = eigh(&h, true).unwrap();
        let z = zs[seed as usize % zs.len()];
        let g_spec = spec.resolvent(z).unwrap();
        let g_lu = LuFactors::factor(&h.shifted(z)).unwrap().inverse();
        let tol = 1e-8 * (1.0 / z.im).max(1.0);
        for i in 0..n {
            for j in 0..n {
                let d = (g_spec.get(i, j) - g_lu.get(i, j)).norm();
                assert!(d < tol, "seed {seed} ({i},{j}): {d}");
            }
        }
    }
}

#[test]
fn ward_identity_and_positivity() {
    let p = wigner_profile(60).unwrap();
    let d = catalog_distribution("gaussian").unwrap();
    let h = sample_matrix(&p, &d, SymmetryClass::Complex, 3).unwrap().entries;
    for &z in &[c(0.0, 0.05), c(1.2, 0.3), c(-2.3, 0.01)] {
        let g = resolvent(&h, z, &[]).unwrap();
        for i in 0..60 {
            let gii = g.get(i, i).unwrap();
            assert!(gii.im > 0.0);
            let row: f64 = (0..60).map(|j| g.get(i, j).unwrap().norm_sqr()).sum();
            assert!((row - gii.im / z.im).abs() < 1e-9 * row, "{row} vs {}", gii.im / z.im);
        }
    }
}

#[test]
fn eta_times_im_stieltjes_is_nondecreasing() {
    let p = wigner_profile(200).unwrap();
    let d = catalog_distribution("bernoulli").unwrap();
    let ev = eigvalsh(&sample_matrix(&p, &d, SymmetryClass::Complex, 9).unwrap().entries).unwrap();
    for &e in &[-2.5, -1.0, 0.0, 0.7, 1.99] {
        let mut prev = 0.0;
        for k in 0..200 {
            let eta = 1e-4 * 1.05f64.powi(k);
            let v = eta * stieltjes(&ev, c(e, eta)).im;
            assert!(v >= prev - 1e-15, "E={e}, eta={eta}");
            prev = v;
            let ms = eta * msc(c(e, eta)).im;
            assert!(ms > 0.0 && ms <= 1.0);
        }
    }
}

/// ∫_{-2}^{E} ρ_sc after x = 2 sin θ: ∫ (2/π) cos²θ dθ, adaptive Simpson.
fn nsc_quadrature(e: f64) -> f64 {
    if e <= -2.0 {
        return 0.0;
    }
    if e >= 2.0 {
        return 1.0;
    }
    let f = |t: f64| 2.0 / std::f64::consts::PI * t.cos().powi(2);
    fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
        (b - a) / 6.0 * (f(a) + 4.0 * f(0.5 * (a + b)) + f(b))
    }
    fn adapt(f: &dyn Fn(f64) -> f64, a: f64, b: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (l, r) = (simpson(f, a, m), simpson(f, m, b));
        if depth == 0 || (l + r - whole).abs() < 15.0 * tol {
            return l + r + (l + r - whole) / 15.0;
        }
        adapt(f, a, m, l, tol / 2.0, depth - 1) + adapt(f, m, b, r, tol / 2.0, depth - 1)
    }
    let (a, b) = (-std::f64::consts::FRAC_PI_2, (e / 2.0).asin());
    adapt(&f, a, b, simpson(&f, a, b), 1e-14, 40)
}

#[test]
fn nsc_matches_quadrature_at_random_energies() {
    let mut rng = rng_from(77);
    for _ in 0..1000 {
        let e: f64 = rng.random_range(-2.5..2.5);
        let q = nsc_quadrature(e);
        assert!((nsc(e) - q).abs() < 1e-10, "E={e}: {} vs {q}", nsc(e));
    }
    assert!((nsc_quadrature(1.0) - 0.80450).abs() < 1e-5);
}

#[test]
fn rho_is_derivative_of_nsc() {
    for k in 1..40 {
        let e = -1.95 + 0.1 * k as f64;
        let h = 1e-5;
        let fd = (nsc(e + h) - nsc(e - h)) / (2.0 * h);
        assert!((fd - rho_sc(e)).abs() < 1e-8);
    }
}

#[test]
fn classical_locations_hit_quadrature_quantiles() {
    let n = 1000;
    let g = classical_locations(n);
    for (j, &x) in g.iter().enumerate().take(n - 1) {
        assert!((nsc_quadrature(x) - (j + 1) as f64 / n as f64).abs() < 1e-9, "j={j}");
    }
    assert_eq!(g[n - 1], 2.0);
}

#[test]
fn resolvent_identities_on_random_matrices() {
    let zs = [c(0.0, 0.5), c(1.1, 0.05), c(-1.9, 0.2), c(0.4, 2.0), c(3.0, 0.1)];
    for seed in 0..20u64 {
        let n = 4 + (seed as usize * 7) % 29;
        let p = wigner_profile(n).unwrap();
        let d = catalog_distribution("uniform").unwrap();
        let beta = if seed % 2 == 0 { SymmetryClass::Complex } else { SymmetryClass::Real };
        let h = sample_matrix(&p, &d, beta, seed).unwrap().entries;
        for &z in &zs {
            let r = verify_perturbation_identities(&h, z, 0, 1, n - 1).unwrap();
            assert!(r < 1e-8, "seed {seed}, z={z}: {r}");
            for route in [MinorRoute::Schur, MinorRoute::Direct] {
                let opts = DiagnosticsOptions { route, ..DiagnosticsOptions::default() };
                let dg = diagnostics(&h, &p, z, opts).unwrap();
                assert!(dg.mainseeq_residual < 1e-8);
            }
        }
    }
}
