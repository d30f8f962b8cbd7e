use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use ptchain::chebyshev::cheb_u_poly;
use ptchain::ep::*;
use ptchain::inclusion::{bracket_real_eigenvalues, broken_phase_certificate};
use ptchain::lattice::{DefectConfig, HamiltonianSpec, SshChain};
use ptchain::poly::ComplexPolynomial;
use ptchain::spectra::{gcd, spectrum, SpectrumOptions};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn c(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn end_defect_spec(n: usize, delta: f64, gamma: f64) -> HamiltonianSpec {
    HamiltonianSpec::uniform(n, 1.0)
        .unwrap()
        .with_defect(DefectConfig::new(1, delta, gamma))
        .unwrap()
}

#[test]
fn resultant_shared_root() {
    let p = ComplexPolynomial::from_real(&[-1.0, 0.0, 1.0]);
    let q = ComplexPolynomial::from_real(&[-1.0, 1.0]);
    assert!(resultant(&p, &q).unwrap().norm() < 1e-14);
    let zero = ComplexPolynomial::from_real(&[0.0]);
    assert!(resultant(&p, &zero).is_err());
}

#[test]
fn chebyshev_resultants() {
    for n in 1..=8i64 {
        for m in 1..=8i64 {
            let r = resultant(&cheb_u_poly(n), &cheb_u_poly(m)).unwrap().norm();
            if gcd((n + 1) as usize, (m + 1) as usize) == 1 {
                assert!(r > 1e-6, "U{n}, U{m}: {r}");
            } else {
                assert!(r < 1e-8, "U{n}, U{m}: {r}");
            }
        }
    }
}

#[test]
fn planted_common_root() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..20 {
        let shared = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let mut a = vec![shared];
        let mut b = vec![shared];
        for _ in 0..rng.gen_range(1..5) {
            a.push(C64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)));
        }
        for _ in 0..rng.gen_range(1..5) {
            b.push(C64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)));
        }
        let p = ComplexPolynomial::from_roots(&a);
        let q = ComplexPolynomial::from_roots(&b);
        let scale = p.max_abs_coeff().powi(q.degree() as i32) * q.max_abs_coeff().powi(p.degree() as i32);
        assert!(resultant(&p, &q).unwrap().norm() < 1e-8 * scale);
    }
}

#[test]
fn cubic_discriminant_cases() {
    assert_eq!(cubic_discriminant(c(0.0), c(0.0), c(0.0), c(1.0)), c(0.0));
    assert_eq!(cubic_discriminant(c(-1.0), c(0.0), c(0.0), c(1.0)), c(-27.0));
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..20 {
        let d = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let e = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let k = C64::new(rng.gen_range(0.5..2.0), rng.gen_range(-1.0..1.0));
        let p = &ComplexPolynomial::from_roots(&[d, d, e]) * k;
        let q = p.coeffs();
        let scale = q.iter().map(|x| x.norm()).fold(0.0, f64::max).powi(4);
        assert!(cubic_discriminant(q[0], q[1], q[2], q[3]).norm() < 1e-9 * scale);
    }
}

#[test]
fn zero_detuning_orders() {
    // odd n: triple zero mode; even n: double
    let g5 = (6.0f64 / 4.0).sqrt();
    let o = ep_order(&end_defect_spec(5, 0.0, g5), c(0.0), EP_ORDER_WINDOW).unwrap();
    assert_eq!(o.multiplicity, 3);
    assert!(o.is_ep && o.geometric == 1);
    let cont = ep_contour(6, &[PI / 2.0], 1e-14).unwrap();
    let pt = &cont.points[0];
    assert!((pt.gamma - 1.0).abs() < 1e-9);
    let o = ep_order(&end_defect_spec(6, 0.0, pt.gamma), pt.eigenvalue, EP_ORDER_WINDOW).unwrap();
    assert_eq!(o.multiplicity, 2);
    assert!(o.is_ep);
}

#[test]
fn contour_points_are_defective() {
    let grid: Vec<f64> = (1..8).map(|k| k as f64 * PI / 8.0).collect();
    let cont = ep_contour(5, &grid, 1e-14).unwrap();
    for pt in &cont.points {
        let spec = end_defect_spec(5, pt.delta, pt.gamma);
        let o = ep_order(&spec, pt.eigenvalue, EP_ORDER_WINDOW).unwrap();
        assert!(o.multiplicity >= 2 && o.is_ep, "{pt:?} {o:?}");
        assert_eq!(o.geometric, 1);
        assert_eq!(pt.crossings, 1, "{pt:?}");
    }
    let theta: Vec<f64> = vec![0.4, PI - 0.4, -0.4, -(PI - 0.4)];
    let cont = ep_contour(7, &theta, 1e-14).unwrap();
    let r0 = cont.points[0].r;
    assert!(cont.points.iter().all(|p| (p.r - r0).abs() < 1e-12));
}

#[test]
fn near_axis_ray_matches_large_detuning() {
    let rc = ray_crossing(4, 0.01, 1e-15).unwrap();
    let delta = rc.r * 0.01f64.cos();
    let gamma = rc.r * 0.01f64.sin();
    assert!(rc.r.is_finite() && delta > 3.0);
    let f = feshbach_threshold(4, delta, 1.0).unwrap();
    assert!((f.gamma - gamma).abs() < 1e-6 * gamma, "{} vs {gamma}", f.gamma);
    assert!((asymptotic_threshold(4, delta) / gamma - 1.0).abs() < 0.15);
    assert_eq!(asymptotic_threshold(2, 7.0), 1.0);
    let n4 = asymptotic_threshold(4, 10.0);
    assert!((n4 - 1e-2).abs() < 1e-15);
}

#[test]
fn boundary_points_lie_on_contour() {
    let s = (6.0f64).sqrt() * 2.0 / 10.0;
    for re in [-1.6, 1.6] {
        let z = C64::new(re, s);
        let rc = ray_crossing(3, z.arg(), 1e-14).unwrap();
        assert!((rc.r - z.norm()).abs() < 1e-8, "{} vs {}", rc.r, z.norm());
        let p = critical_charpoly(3, z).unwrap();
        let x = c(re.signum());
        assert!(p.eval(x).norm() < 1e-12 && p.derivative().eval(x).norm() < 1e-12);
    }
}

#[test]
fn off_cusp_and_cusp_exponents() {
    let census = cusp_census(6, 200).unwrap();
    let cu = &census.cusps[0];
    let fit = puiseux_fit(6, cu.delta, cu.gamma, c(cu.eigenvalue / 2.0), Direction::Normal, &default_h_grid()).unwrap();
    assert!((fit.exponent - 1.0 / 3.0).abs() < 0.03, "{fit:?}");
    assert_eq!(fit.order, Some(3));
    let (_, grads) = cubic_coefficients(6, cu.delta, cu.gamma, cu.eigenvalue / 2.0).unwrap();
    let g: [Vec<C64>; 3] = grads.map(|v| vec![c(v[0]), c(v[1])]);
    let u = [c(0.3), c(0.8)];
    assert_eq!(branch_order(&g, &u, 1e-9).unwrap(), BranchOrder::Third);
    let mid = 0.5 * (census.cusps[0].theta + census.cusps[1].theta);
    let fit = puiseux_tau(6, mid, &default_h_grid(), Direction::Radial).unwrap();
    assert!((fit.exponent - 0.5).abs() < 0.02, "{fit:?}");
}

#[test]
fn surface_below_is_certified_real() {
    // nodes where interval certificates prove an all-real spectrum lie below the EP surface,
    // and nodes certified broken lie above it
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let n = 8;
    let mut below = 0;
    for _ in 0..40 {
        let t1 = rng.gen_range(0.4..1.6);
        let delta = rng.gen_range(-1.5..1.5);
        let Some((g_ep, _)) = ssh_gamma_ep(n, t1, delta, 40.0).unwrap() else { continue };
        for frac in [0.3, 0.9, 1.5] {
            let gamma = g_ep * frac;
            let chain = SshChain::with_end_defects(n, t1, 1.0, delta, gamma);
            if let Ok(certs) = bracket_real_eigenvalues(&chain) {
                let proven: usize = certs.iter().filter(|c| c.exact).map(|c| c.guaranteed_count).sum();
                if proven == n {
                    assert!(gamma < g_ep, "t1={t1} delta={delta} gamma={gamma} g_ep={g_ep}");
                    below += 1;
                }
            }
            if broken_phase_certificate(&chain) {
                let rep = spectrum(&chain.to_spec().unwrap(), &SpectrumOptions::default()).unwrap();
                assert!(rep.real_count < n);
                assert!(gamma > g_ep * (1.0 - 1e-9));
            }
        }
    }
    assert!(below > 0);
}

#[test]
fn unbounded_nodes_reported() {
    // critical slice at zero detuning breaks at gamma = 1; nothing below the scan limit 0.5
    assert_eq!(ssh_gamma_ep(8, 1.0, 0.0, 0.5).unwrap(), None);
    let (g, _) = ssh_gamma_ep(8, 1.0, 0.0, 5.0).unwrap().unwrap();
    assert!((g - 1.0).abs() < 1e-9);
    let s = ep_surface_ssh(6, &[1.0], &[0.0, 0.5]).unwrap();
    assert_eq!(s.samples.len(), 2);
    assert!(ep_surface_ssh(5, &[1.0], &[0.0]).is_err());
}
