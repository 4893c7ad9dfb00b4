use germfold::{corpus, solve_arc, GermSystem, Trivializer};
use proptest::prelude::*;

fn germ(name: &str) -> GermSystem {
    corpus::get(name).unwrap().build().unwrap()
}

fn direction(theta: f64) -> Vec<f64> {
    vec![theta.cos(), theta.sin()]
}

fn weighted(gs: &GermSystem, s: &[f64], t: f64) -> Vec<f64> {
    s.iter().zip(gs.ws().omega()).map(|(v, &w)| v * t.powi(w as i32)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn unperturbed_arc_is_the_orbit(theta in 0.0..std::f64::consts::TAU) {
        let gs = germ("cusp-d4");
        let s = direction(theta);
        let arc = solve_arc(&gs, &s, 0.0, 6).unwrap();
        for (i, g) in arc.gamma.iter().enumerate() {
            let w = gs.ws().omega()[i] as usize;
            for (m, &c) in g.coeffs().iter().enumerate() {
                prop_assert_eq!(c, if m == w { s[i] } else { 0.0 });
            }
        }
    }

    #[test]
    fn psi_inverts(theta in 0.0..std::f64::consts::TAU, t in 0.005..0.08f64, eps in -1.0..1.0f64) {
        let gs = germ("cusp-d4");
        let tr = Trivializer::new(&gs, eps, 8);
        let x = weighted(&gs, &direction(theta), t);
        let y = tr.psi(&x).unwrap();
        let back = tr.psi_inverse(&y, 1e-14).unwrap();
        for (a, b) in x.iter().zip(&back) {
            prop_assert!((a - b).abs() <= 1e-9 * a.abs().max(t.powi(3)), "{:?} vs {:?}", x, back);
        }
    }

    #[test]
    fn psi_keeps_the_sign_of_the_germ(theta in 0.0..std::f64::consts::TAU, t in 0.005..0.05f64, eps in -1.0..1.0f64) {
        let gs = germ("cusp-d4");
        let x = weighted(&gs, &direction(theta), t);
        let fp = gs.eval_f_p(&x)[0];
        prop_assume!(fp.abs() >= 1e-3 * t.powi(6));
        let tr = Trivializer::new(&gs, eps, 8);
        let fe = gs.eval_family(eps, &tr.psi(&x).unwrap())[0];
        prop_assert!(fe * fp > 0.0);
        prop_assert!((fe / fp - 1.0).abs() < 0.5);
    }

    #[test]
    fn quadric_arc_solves_on_every_branch(branch in 0usize..4, eps in -1.0..1.0f64) {
        let gs = germ("quadric");
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let s = [[r, r], [r, -r], [-r, r], [-r, -r]][branch];
        let arc = solve_arc(&gs, &s, eps, 8).unwrap();
        prop_assert!(!arc.near_obstruction);
        prop_assert!(arc.residual_ord.unwrap() >= 2 + 1 + 8 + 1);
        // z₀ = -s_y³ / ‖∇f(s)‖², and ‖∇f‖² = 4 on the unit circle
        let z0 = arc.z[0].coeff(0);
        prop_assert!((z0 + s[1].powi(3) / 4.0).abs() < 1e-12, "{}", z0);
    }
}
