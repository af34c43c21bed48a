//! Fast numerical self-check at n ≤ 4: one PASS/FAIL line per property.

use std::f64::consts::PI;

use anyhow::Result;
use bp_core::circuit::{circuit_unitary, estimate_variance, CircuitSpec, InputState};
use bp_core::combinatorics::{binomial, subsets};
use bp_core::dense::{c, CMatrix};
use bp_core::dla::{commutator_graph, lie_closure, matchgate_q_basis, GeneratorSet, QBasisFlavor};
use bp_core::fermion::{contraction_matrices, g_purity_via_entropy, linear_entropy};
use bp_core::majorana::{hermitian_basis_element, parity_operator};
use bp_core::modules::{kappa_purity, module_component, purity_spectrum};
use bp_core::variance::{closed_form, variance_exact, variance_parity_basis, weingarten_oracle, ClosedForm};
use bp_core::{states, MajoranaMonomial, PauliSumOperator};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;

fn verdict(ok: bool, detail: String) -> Check {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn random_matrix(n: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    let d = 1 << n;
    CMatrix::from_fn(d, d, |_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
}

fn random_density(n: usize, rng: &mut ChaCha8Rng) -> PauliSumOperator {
    let g = random_matrix(n, rng);
    let m = &g * g.adjoint();
    let tr = m.trace();
    PauliSumOperator::from_dense(&(m / tr)).expect("dense within limit")
}

fn random_hermitian(n: usize, rng: &mut ChaCha8Rng) -> PauliSumOperator {
    let g = random_matrix(n, rng);
    PauliSumOperator::from_dense(&((&g + g.adjoint()) * c(0.5, 0.0))).expect("dense within limit")
}

fn fermionic(m: &PauliSumOperator) -> PauliSumOperator {
    let p = PauliSumOperator::from_term(&parity_operator(m.n()).expect("valid n"), c(1.0, 0.0));
    (m + &(&(&p * m) * &p)).scale(c(0.5, 0.0))
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn mc_within(n: usize, layers: usize, psi: Vec<num_complex::Complex64>, o: &PauliSumOperator, target: f64) -> Result<bool, String> {
    let spec = CircuitSpec::new(n, Some(layers), 17).map_err(err)?;
    let est = estimate_variance(&InputState::pure(psi).map_err(err)?, o, &spec, 10_000, 0).map_err(err)?;
    Ok((est.var_hat - target).abs() <= 5.0 * est.stderr_var + 1e-12)
}

fn oracle() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    for n in 2..=3 {
        for _ in 0..5 {
            let (rho, o) = (random_density(n, &mut rng), random_hermitian(n, &mut rng));
            let a = variance_exact(&rho, &o).map_err(err)?;
            let b = weingarten_oracle(&rho, &o, QBasisFlavor::Standard).map_err(err)?;
            worst = worst.max((a.variance - b.variance).abs()).max((a.mean - b.mean).abs());
        }
    }
    verdict(worst <= 1e-9, format!("max deviation {worst:.1e}"))
}

fn families() -> Check {
    let n = 4;
    let mut worst: f64 = 0.0;
    let mut mc_ok = true;
    let zero = states::computational_zero(n).map_err(err)?;
    for m in 1..=n {
        let o = states::z_string(n, m).map_err(err)?;
        let want = closed_form(ClosedForm::Gaussian { n, m }).map_err(err)?;
        let got = variance_exact(&PauliSumOperator::from_state(&zero).map_err(err)?, &o).map_err(err)?.variance;
        worst = worst.max((got - want).abs());
        if m == 1 {
            mc_ok &= mc_within(n, n * n, zero.clone(), &o, want)?;
        }
    }
    for tau in [0.0, PI / 2.0, PI] {
        let psi = states::magic_state(n, tau).map_err(err)?;
        let o = states::z(n, 1).map_err(err)?;
        let want = closed_form(ClosedForm::Magic { n, tau }).map_err(err)?;
        let got = variance_exact(&PauliSumOperator::from_state(&psi).map_err(err)?, &o).map_err(err)?.variance;
        worst = worst.max((got - want).abs());
        if tau == PI / 2.0 {
            mc_ok &= mc_within(n, n * n, psi, &o, want)?;
        }
    }
    let s = 0.5f64.sqrt();
    let psi = states::superposition(n, c(s, 0.0), c(s, 0.0)).map_err(err)?;
    for j in 1..=n {
        let o = states::x(n, j).map_err(err)?;
        let want = closed_form(ClosedForm::NonFermionic { n, j, alpha: s, beta: s }).map_err(err)?;
        let got = variance_exact(&PauliSumOperator::from_state(&psi).map_err(err)?, &o).map_err(err)?.variance;
        worst = worst.max((got - want).abs());
        if j == 2 {
            mc_ok &= mc_within(n, 2 * n * n, psi.clone(), &o, want)?;
        }
    }
    verdict(worst <= 1e-10 && mc_ok, format!("max |exact − closed| {worst:.1e}, Monte Carlo within 5 SE: {mc_ok}"))
}

fn graphs() -> Check {
    let mut ok = true;
    for n in 2..=4 {
        let g = GeneratorSet::matchgate(n).map_err(err)?;
        let mut sizes = commutator_graph(&g).map_err(err)?.sizes();
        sizes.sort_unstable();
        let mut want: Vec<usize> = (0..=2 * n).map(|k| binomial(2 * n as u64, k as u64) as usize).collect();
        want.sort_unstable();
        ok &= sizes == want && lie_closure(&g, 1000).map_err(err)?.len() == n * (2 * n - 1);
    }
    verdict(ok, "component sizes C(2n,κ), dla dimension n(2n−1) for n = 2..4".into())
}

fn commutant() -> Check {
    let mut worst: f64 = 0.0;
    for n in 1..=2 {
        let g = GeneratorSet::matchgate(n).map_err(err)?;
        for flavor in [QBasisFlavor::Standard, QBasisFlavor::Parity] {
            let basis = matchgate_q_basis(n, flavor).map_err(err)?;
            for (a, qa) in basis.iter().enumerate() {
                for (b, qb) in basis.iter().enumerate() {
                    let want = if a == b { 1.0 } else { 0.0 };
                    worst = worst.max((qa.inner(qb) - c(want, 0.0)).norm());
                }
                for h in g.generators() {
                    worst = worst.max(qa.commutator_defect(h));
                }
            }
        }
    }
    verdict(worst <= 1e-10, format!("Gram and commutation defect {worst:.1e}"))
}

fn bridge() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst: f64 = 0.0;
    for n in 2..=4 {
        for _ in 0..5 {
            let rho = fermionic(&random_density(n, &mut rng));
            worst = worst.max((kappa_purity(&rho, 2).map_err(err)? - g_purity_via_entropy(&rho).map_err(err)?).abs());
        }
    }
    for tau in [0.0, PI / 3.0, PI] {
        let rho = PauliSumOperator::from_state(&states::magic_state(4, tau).map_err(err)?).map_err(err)?;
        let s2 = linear_entropy(&contraction_matrices(&rho).map_err(err)?.d).map_err(err)?;
        worst = worst.max((s2 - 4.0 * (tau / 2.0).sin().powi(2)).abs());
    }
    verdict(worst <= 1e-10, format!("max deviation {worst:.1e}"))
}

fn parity() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst: f64 = 0.0;
    for case in 0..10 {
        let n = 1 + case % 4;
        let rho = fermionic(&random_density(n, &mut rng));
        let o = random_hermitian(n, &mut rng);
        let a = variance_exact(&rho, &o).map_err(err)?.variance;
        let b = variance_parity_basis(&rho, &o).map_err(err)?.variance;
        worst = worst.max((a - b).abs());
    }
    verdict(worst <= 1e-10, format!("max deviation {worst:.1e}"))
}

fn invariance() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst: f64 = 0.0;
    for n in 1..=3 {
        let spec = CircuitSpec::new(n, None, 9).map_err(err)?;
        let u = circuit_unitary(&spec, &spec.draw_angles(0)).map_err(err)?;
        for kappa in 0..=2 * n {
            let mut b = PauliSumOperator::zero(n);
            for s in subsets(2 * n, kappa) {
                let m = MajoranaMonomial::new(n, &s).map_err(err)?;
                b = &b + &hermitian_basis_element(&m).scale(c(rng.random_range(-1.0..1.0), 0.0));
            }
            let evolved = PauliSumOperator::from_dense(&(&u * b.to_dense().map_err(err)? * u.adjoint())).map_err(err)?;
            let leak = (&evolved - &module_component(&evolved, kappa).map_err(err)?).norm_sqr().sqrt();
            worst = worst.max((leak / b.norm_sqr().sqrt()).abs());
        }
    }
    verdict(worst <= 1e-9, format!("max relative leak {worst:.1e}"))
}

fn completeness() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst: f64 = 0.0;
    for n in 2..=4 {
        for _ in 0..5 {
            let m = PauliSumOperator::from_dense(&random_matrix(n, &mut rng)).map_err(err)?;
            worst = worst.max((purity_spectrum(&m).total() - m.norm_sqr()).abs() / m.norm_sqr().max(1.0));
        }
    }
    verdict(worst <= 1e-10, format!("max relative deviation {worst:.1e}"))
}

fn reproducibility() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let n = 3;
    let rho = random_density(n, &mut rng);
    let o = random_hermitian(n, &mut rng);
    let input = InputState::from_density(&rho).map_err(err)?;
    let spec = CircuitSpec::new(n, None, 123).map_err(err)?;
    let mut bits = Vec::new();
    for workers in [1, 2, 8] {
        let est = estimate_variance(&input, &o, &spec, 500, workers).map_err(err)?;
        bits.push((est.mean_hat.to_bits(), est.var_hat.to_bits(), est.stderr_var.to_bits()));
    }
    verdict(bits.iter().all(|b| *b == bits[0]), "bitwise-identical estimates with 1, 2 and 8 workers".into())
}

/// Runs every check, printing one line each; returns the number of failures.
pub fn run() -> usize {
    let checks: [(&str, fn() -> Check); 10] = [
        ("oracle equivalence", oracle),
        ("benchmark families", families),
        ("commutator graphs", graphs),
        ("commutant bases", commutant),
        ("fermionic bridge", bridge),
        ("parity-basis variance", parity),
        ("module invariance", invariance),
        ("completeness", completeness),
        ("reproducibility", reproducibility),
        ("closed-form sanity", closed_sanity),
    ];
    let mut failures = 0;
    for (name, check) in checks {
        match check() {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(detail) => {
                failures += 1;
                println!("FAIL {name}: {detail}");
            }
        }
    }
    failures
}

fn closed_sanity() -> Check {
    let gauss = closed_form(ClosedForm::Gaussian { n: 4, m: 1 }).map_err(err)?;
    let magic = closed_form(ClosedForm::Magic { n: 8, tau: 0.0 }).map_err(err)?;
    let extent = closed_form(ClosedForm::Extent { n: 8, tau: PI }).map_err(err)?;
    verdict(
        (gauss - 1.0 / 7.0).abs() < 1e-15 && (magic - 1.0 / 15.0).abs() < 1e-15 && (extent - 4.0).abs() < 1e-12,
        format!("gaussian(4,1) = {gauss:.6}, magic(8,0) = {magic:.6}, extent(8,π) = {extent:.3}"),
    )
}
