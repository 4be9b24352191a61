use bslab_core::bound_states::{solve_atomic, solve_nystrom};
use bslab_core::kernels::{build_kernel, build_kernel_with, build_toy_matrix, Discretization, KernelSpec};
use bslab_core::lieb_thirring::{
    check_basic_equality, check_domination, classical_constant, conjectured_constant, domination_energy_cap,
    sharp_half_report, Source,
};
use bslab_core::monotonicity::{perron_gap, random_kappa_pair, run_trial, toy_scan, KappaPair};
use bslab_core::numerics::{build_grid, eigh_desc, eigvalsh_desc, partial_sum, Interval, SymMatrix};
use bslab_core::potentials::{AtomicMeasure, DensityBump, KappaMeasure, Potential};
use proptest::prelude::*;

fn potential() -> impl Strategy<Value = Potential> {
    prop_oneof![
        (0.5..4.0f64, 0.5..3.0f64, -1.0..1.0f64).prop_map(|(d, w, c)| Potential::gaussian(d, w, c).unwrap()),
        (0.3..3.0f64, -1.0..1.0f64).prop_map(|(l, c)| Potential::sech2(l, c).unwrap()),
        (0.5..3.0f64, 1.0..5.0f64).prop_map(|(d, w)| Potential::square_well(d, w, 0.0).unwrap()),
    ]
}

fn kappa() -> impl Strategy<Value = KappaMeasure> {
    (
        0.0..2.0f64,
        prop::collection::vec((-5.0..5.0f64, 0.0..2.0f64), 0..5),
        prop::option::of((-3.0..0.0f64, 0.1..3.0f64, 0.0..2.0f64)),
    )
        .prop_map(|(mu, mut atoms, bump)| {
            atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
            atoms.dedup_by(|a, b| a.0 == b.0);
            let bumps = bump.map(|(lo, w, v)| vec![DensityBump { lo, hi: lo + w, value: v }]).unwrap_or_default();
            KappaMeasure::new(mu, bumps, AtomicMeasure::new(atoms).unwrap()).unwrap()
        })
}

fn symmetric(n: usize) -> impl Strategy<Value = SymMatrix> {
    prop::collection::vec(-1.0..1.0f64, n * n).prop_map(move |v| SymMatrix::from_upper(n, |i, j| v[i * n + j]))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn grid_weights_sum_to_length(lo in -30.0..0.0f64, len in 0.1..60.0f64, panels in 1usize..30, npp in 2usize..24) {
        let g = build_grid(Interval::new(lo, lo + len), panels, npp).unwrap();
        let total: f64 = g.weights().iter().sum();
        prop_assert!((total - len).abs() <= 1e-12 * len.max(1.0));
        prop_assert!(g.nodes().windows(2).all(|w| w[0] < w[1]));
        prop_assert!(g.weights().iter().all(|&w| w > 0.0));
    }

    #[test]
    fn eigh_reconstructs(m in (2usize..40).prop_flat_map(symmetric)) {
        let e = eigh_desc(&m).unwrap();
        let n = m.order();
        let norm = m.frobenius_norm();
        prop_assert!(e.values.windows(2).all(|w| w[0] >= w[1]));
        prop_assert!((e.values.iter().sum::<f64>() - m.trace()).abs() <= 1e-10 * norm);
        let mut resid = 0.0;
        for i in 0..n {
            for j in 0..n {
                let r: f64 = (0..n).map(|k| e.vector(k)[i] * e.values[k] * e.vector(k)[j]).sum();
                resid += (m.get(i, j) - r).powi(2);
                let q: f64 = (0..n).map(|k| e.vector(i)[k] * e.vector(j)[k]).sum();
                let delta = if i == j { 1.0 } else { 0.0 };
                prop_assert!((q - delta).abs() <= 1e-10);
            }
        }
        prop_assert!(resid.sqrt() <= 1e-10 * norm);
    }

    #[test]
    fn partial_sums_clamp(v in prop::collection::vec(-5.0..5.0f64, 1..20), n in 1usize..40) {
        let mut v = v;
        v.sort_by(|a, b| b.total_cmp(a));
        let want: f64 = v.iter().take(n).sum();
        prop_assert_eq!(partial_sum(&v, n).unwrap(), want);
    }

    #[test]
    fn family_mass_matches_quadrature(u in potential()) {
        let hint = u.mass_hint().unwrap();
        prop_assert!((u.integral_of_power(1.0) - hint).abs() <= 1e-10 * hint);
    }

    #[test]
    fn j_increments_add(k in kappa(), a in -6.0..6.0f64, b in -6.0..6.0f64, c in -6.0..6.0f64) {
        let mut p = [a, b, c];
        p.sort_by(f64::total_cmp);
        let whole = k.increment(p[0], p[2]);
        let parts = k.increment(p[0], p[1]) + k.increment(p[1], p[2]);
        prop_assert!((whole - parts).abs() <= 1e-12 * whole.max(1.0));
        prop_assert!((k.j_eval(p[2]) - k.j_eval(p[0]) - whole).abs() <= 1e-12 * whole.max(1.0));
    }

    #[test]
    fn kernels_are_psd(u in potential(), k in kappa(), e in 0.01..5.0f64, mu in 0.0..3.0f64) {
        let g = build_grid(u.support(), 10, 10).unwrap();
        let specs = [KernelSpec::BirmanSchwinger { energy: e }, KernelSpec::Exponential { mu }, KernelSpec::Kappa(k)];
        for spec in &specs {
            for disc in [Discretization::Pointwise, Discretization::PanelCorrected] {
                if matches!(spec, KernelSpec::Kappa(_)) && disc == Discretization::PanelCorrected {
                    continue;
                }
                let ev = eigvalsh_desc(&build_kernel_with(&u, &g, spec, disc).unwrap()).unwrap();
                prop_assert!(*ev.last().unwrap() >= -1e-10 * ev[0]);
            }
        }
    }

    #[test]
    fn kernel_entries_shrink_as_kappa_grows(u in potential(), k in kappa(), d in kappa()) {
        let g = build_grid(u.support(), 6, 8).unwrap();
        let p = KappaPair::new(k, d);
        let a = build_kernel(&u, &g, &KernelSpec::Kappa(p.base.clone())).unwrap();
        let b = build_kernel(&u, &g, &KernelSpec::Kappa(p.dominating.clone())).unwrap();
        for i in 0..g.len() {
            prop_assert_eq!(a.get(i, i), b.get(i, i));
            for j in i + 1..g.len() {
                prop_assert!(b.get(i, j) <= a.get(i, j));
            }
        }
    }

    #[test]
    fn hilbert_schmidt_bound(u in potential(), e in 0.01..5.0f64) {
        let g = build_grid(u.support(), 10, 10).unwrap();
        let m = build_kernel(&u, &g, &KernelSpec::BirmanSchwinger { energy: e }).unwrap();
        let mass = g.integrate(|x| u.eval(x));
        prop_assert!(m.frobenius_norm() <= mass / (2.0 * e.sqrt()) * (1.0 + 1e-12));
    }

    #[test]
    fn toy_scans_are_monotone_and_convex(fixed in prop::collection::vec(0.0..=1.0f64, 2), k in 1usize..=3) {
        let grid: Vec<f64> = (0..=32).map(|i| i as f64 / 32.0).collect();
        let s = toy_scan(3, k, &fixed, &grid, None).unwrap();
        prop_assert!(s.all_pass());
    }

    #[test]
    fn toy_matrix_trace_is_order(a in prop::collection::vec(0.0..=1.0f64, 0..8)) {
        let m = build_toy_matrix(&a, None).unwrap();
        prop_assert_eq!(m.trace(), (a.len() + 1) as f64);
    }

    #[test]
    fn conjectured_forms_agree(gamma in 0.6..1.4f64) {
        let (a, b) = conjectured_constant(gamma).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * a);
    }

    #[test]
    fn conjectured_at_most_twice_classical(gamma in 0.5001..6.0f64) {
        let (a, _) = conjectured_constant(gamma).unwrap();
        prop_assert!(a <= 2.0 * classical_constant(gamma).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10))]

    #[test]
    fn bs_eigenvalues_fall_with_energy(u in potential()) {
        let g = build_grid(u.support(), 10, 10).unwrap();
        let energies: Vec<f64> = (0..20).map(|i| 5.0 * 0.7f64.powi(i)).collect();
        let mut prev: Option<Vec<f64>> = None;
        // energies decrease, so every λ_n must be non-decreasing along the sweep
        for e in energies {
            let ev = eigvalsh_desc(&build_kernel(&u, &g, &KernelSpec::BirmanSchwinger { energy: e }).unwrap()).unwrap();
            if let Some(p) = &prev {
                for (a, b) in p.iter().zip(&ev).take(5) {
                    prop_assert!(*b >= *a - 1e-12 * ev[0]);
                }
            }
            prev = Some(ev);
        }
    }

    #[test]
    fn nystrom_spectra_are_simple_and_sharp(u in potential()) {
        let g = build_grid(u.support(), 16, 12).unwrap();
        let s = solve_nystrom(&u, &g, 1e-11).unwrap();
        prop_assert!(s.is_simple(1e-11));
        prop_assert!(sharp_half_report(Source::Potential(&u), &s).strict);
        let scale = s.energies.first().map(|e| e.sqrt()).unwrap_or(1.0);
        for r in check_basic_equality(&u, &g, &s).unwrap() {
            prop_assert!(r <= 1e-9 * scale);
        }
    }

    #[test]
    fn domination_on_provable_range(u in potential(), t in 0.0..=1.0f64, pick in 0usize..8) {
        let g = build_grid(u.support(), 12, 10).unwrap();
        let s = solve_nystrom(&u, &g, 1e-11).unwrap();
        prop_assume!(!s.is_empty());
        let n = 1 + pick % s.len();
        let e = t * domination_energy_cap(&s, n);
        let d = check_domination(&u, &g, &s, n, e).unwrap();
        prop_assert!(d.pass, "n = {}, E = {}, slack = {}", n, e, d.slack);
    }

    #[test]
    fn atomic_sharp_bound(atoms in prop::collection::vec((-4.0..4.0f64, 0.1..2.0f64), 1..5)) {
        let mut atoms = atoms;
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        atoms.dedup_by(|a, b| (a.0 - b.0).abs() < 1e-3);
        let nu = AtomicMeasure::new(atoms).unwrap();
        let s = solve_atomic(&nu, 1e-13).unwrap();
        let r = sharp_half_report(Source::Measure(&nu), &s);
        prop_assert!(r.pass, "{:?}", r);
        prop_assert_eq!(r.equality, nu.len() == 1);
    }

    #[test]
    fn seeded_trials_pass(seed in any::<u64>()) {
        let t = run_trial(seed).unwrap();
        prop_assert!(t.pass, "{:?}", t);
    }

    #[test]
    fn perron_on_sech2_kappa(seed in any::<u64>(), m in 1usize..6) {
        let u = Potential::sech2(2.0, 0.0).unwrap();
        let g = build_grid(u.support(), 12, 10).unwrap();
        let p = random_kappa_pair(seed, m, 0.5).unwrap();
        let r = perron_gap(&build_kernel(&u, &g, &KernelSpec::Kappa(p.dominating)).unwrap()).unwrap();
        prop_assert!(r.gap > 1e-12 * r.lambda1);
        prop_assert!(r.eigvec_min > 0.0);
    }
}
