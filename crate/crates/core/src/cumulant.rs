// Copyright 2026 The depol Authors
// SPDX-License-Identifier: Apache-2.0

//! Perturbative generator of the projected master equation.
//!
//! With depolarizing free dynamics every projected moment collapses onto
//! `𝔓(ℒ_I^m) = μ_m Π`, `μ_m = tr(ℒ_I^m)/(n²−1)`, `Π = 𝓘 − (I/n) Tr(·)`, and the
//! order-`k` cumulant generator becomes a sum over compositions
//! `(k₀, …, k_q)` of `k`:
//!
//! ```text
//! 𝔎_k(t) = (t−t₀)^{k−1} Σ (−1)^q / ((k₀−1)! k₁! ⋯ k_q!) · 𝔓(ℒ_I^{k₀}) 𝔓(ℒ_I^{k₁}) ⋯ 𝔓(ℒ_I^{k_q})
//! ```
//!
//! The full generator is `𝔎(t) = ℒ₀ + Σ_k λ^k 𝔎_k(t) = −γ̃_λ(t) Π`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::gksl::{analytic_traces, build_free_liouvillian, build_interaction_liouvillian, GkslSpec};
use crate::linalg::{sop_trace, Superoperator, C64};
use crate::twirl::{project, project_generator_with_scalar};

/// Largest supported perturbative order.
pub const MAX_ORDER: usize = 12;

fn check_order(k: usize) -> Result<()> {
    if (1..=MAX_ORDER).contains(&k) {
        Ok(())
    } else {
        Err(Error::OrderOutOfRange {
            order: k,
            max: MAX_ORDER,
        })
    }
}

/// An ordered tuple of positive integers.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Composition {
    pub parts: Vec<usize>,
}

impl Composition {
    pub fn total(&self) -> usize {
        self.parts.iter().sum()
    }
}

/// All `2^{k−1}` compositions of `k`, in lexicographic order of the parts,
/// e.g. `k = 3` gives `(1,1,1), (1,2), (2,1), (3)`.
pub fn compositions(k: usize) -> Result<Vec<Composition>> {
    check_order(k)?;
    fn extend(rest: usize, prefix: &mut Vec<usize>, out: &mut Vec<Composition>) {
        if rest == 0 {
            out.push(Composition {
                parts: prefix.clone(),
            });
            return;
        }
        for first in 1..=rest {
            prefix.push(first);
            extend(rest - first, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::with_capacity(1 << (k - 1));
    extend(k, &mut Vec::with_capacity(k), &mut out);
    Ok(out)
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// One term of the order-`k` cumulant generator.
#[derive(Clone, Debug, PartialEq)]
pub struct CumulantTerm {
    pub order: usize,
    /// `(−1)^q` where `q + 1` is the number of parts.
    pub sign: i8,
    /// `1/((k₀−1)! k₁! ⋯ k_q!)`.
    pub coefficient: f64,
    /// `(k₀, …, k_q)`: the term is `𝔓(ℒ_I^{k₀}) ⋯ 𝔓(ℒ_I^{k_q})`.
    pub factor_powers: Vec<usize>,
}

/// Terms of `𝔎_k` in composition order.
pub fn cumulant_terms(k: usize) -> Result<Vec<CumulantTerm>> {
    Ok(compositions(k)?
        .into_iter()
        .map(|comp| {
            let q = comp.parts.len() - 1;
            let denom = factorial(comp.parts[0] - 1)
                * comp.parts[1..].iter().map(|&p| factorial(p)).product::<f64>();
            CumulantTerm {
                order: k,
                sign: if q % 2 == 0 { 1 } else { -1 },
                coefficient: 1.0 / denom,
                factor_powers: comp.parts,
            }
        })
        .collect())
}

/// Kahan–Babuška compensated complex sum.
#[derive(Clone, Copy, Debug, Default)]
struct CompensatedSum {
    sum: Complex64,
    carry: Complex64,
}

impl CompensatedSum {
    fn add(&mut self, x: Complex64) {
        self.sum.re = neumaier(self.sum.re, x.re, &mut self.carry.re);
        self.sum.im = neumaier(self.sum.im, x.im, &mut self.carry.im);
    }

    fn value(&self) -> Complex64 {
        self.sum + self.carry
    }
}

fn neumaier(sum: f64, x: f64, carry: &mut f64) -> f64 {
    let t = sum + x;
    if sum.abs() >= x.abs() {
        *carry += (sum - t) + x;
    } else {
        *carry += (x - t) + sum;
    }
    t
}

/// The scalars `μ_m = tr(ℒ_I^m)/(n²−1)` for `m = 1..=max_power`, from cached
/// powers of a trace-annihilating `ℒ_I`.
#[derive(Clone, Debug)]
pub struct ProjectedPowers {
    dim: usize,
    mu: Vec<C64>,
}

impl ProjectedPowers {
    pub fn new(li: &Superoperator, max_power: usize) -> Result<Self> {
        check_order(max_power)?;
        let (mu1, _) = project_generator_with_scalar(li)?;
        let n = li.dim() as f64;
        let mut mu = vec![C64::new(1.0, 0.0), mu1];
        let mut power = li.clone();
        for _ in 2..=max_power {
            power = &power * li;
            mu.push(sop_trace(&power) / (n * n - 1.0));
        }
        Ok(Self { dim: li.dim(), mu })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn max_power(&self) -> usize {
        self.mu.len() - 1
    }

    /// `μ_m`, with `μ_0 = 1`.
    pub fn mu(&self, m: usize) -> C64 {
        self.mu[m]
    }

    /// Coefficient `c_k` of `Π` in `𝔎_k` at unit elapsed time, so that
    /// `𝔎_k(t) = c_k (t−t₀)^{k−1} Π`.
    pub fn cumulant_coefficient(&self, k: usize) -> Result<C64> {
        check_order(k)?;
        if k > self.max_power() {
            return Err(Error::OrderOutOfRange {
                order: k,
                max: self.max_power(),
            });
        }
        let mut acc = CompensatedSum::default();
        for term in cumulant_terms(k)? {
            let product: C64 = term.factor_powers.iter().map(|&m| self.mu[m]).product();
            acc.add(product * (term.sign as f64 * term.coefficient));
        }
        Ok(acc.value())
    }
}

/// `𝔎_k(t)` as a scalar multiple of `Π`.
#[derive(Clone, Debug)]
pub struct CumulantGenerator {
    pub order: usize,
    /// Coefficient of `Π`, including the factor `(t−t₀)^{k−1}`.
    pub scalar: C64,
    pub generator: Superoperator,
}

/// Order-`k` cumulant generator `𝔎_k(t)` for a trace-annihilating `ℒ_I`.
/// Carries no power of `λ`.
pub fn cumulant_generator_k(li: &Superoperator, k: usize, t: f64, t0: f64) -> Result<CumulantGenerator> {
    check_order(k)?;
    let powers = ProjectedPowers::new(li, k)?;
    cumulant_generator_from(&powers, k, t - t0)
}

fn cumulant_generator_from(powers: &ProjectedPowers, k: usize, elapsed: f64) -> Result<CumulantGenerator> {
    let scalar = powers.cumulant_coefficient(k)? * elapsed.powi(k as i32 - 1);
    Ok(CumulantGenerator {
        order: k,
        scalar,
        generator: &Superoperator::traceless_projector(powers.dim()) * scalar,
    })
}

/// λ²-coefficient of the second-order generator by composite Simpson
/// quadrature over `t₁ ∈ [t₀, t]` of
///
/// ```text
/// 𝔓(ℒ_I e^{ℒ₀ s} ℒ_I e^{−ℒ₀ s}) − 𝔓(ℒ_I) 𝔓(e^{ℒ₀ s} ℒ_I e^{−ℒ₀ s}),   s = t − t₁.
/// ```
///
/// `steps` is the number of Simpson panels (each panel uses its midpoint).
/// `e^{−ℒ₀ s}` is the matrix inverse of `e^{ℒ₀ s}`.
pub fn second_order_generator_quadrature(
    l0: &Superoperator,
    li: &Superoperator,
    t: f64,
    t0: f64,
    steps: usize,
) -> Result<Superoperator> {
    if l0.dim() != li.dim() {
        return Err(Error::DimensionMismatch {
            expected: l0.dim(),
            found: li.dim(),
        });
    }
    if steps == 0 {
        return Err(Error::InvalidParameter("quadrature needs at least one panel".into()));
    }
    let n = li.dim();
    if t == t0 {
        return Ok(Superoperator::zeros(n));
    }
    let p_li = project(li);
    let integrand = |t1: f64| -> Result<Superoperator> {
        let forward = l0.exp(t - t1)?;
        let backward = forward.try_inverse()?;
        let moved = &(&forward * li) * &backward;
        Ok(&project(&(li * &moved)) - &(&p_li * &project(&moved)))
    };
    let h = (t - t0) / steps as f64;
    let mut acc = &integrand(t0)? * (h / 6.0);
    for i in 0..steps {
        let a = t0 + i as f64 * h;
        let end_weight = if i + 1 == steps { 1.0 } else { 2.0 };
        acc = &acc + &(&integrand(a + 0.5 * h)? * (4.0 * h / 6.0));
        acc = &acc + &(&integrand(a + h)? * (end_weight * h / 6.0));
    }
    Ok(acc)
}

/// The λ⁰, λ¹ and λ² contributions to `γ̃_λ(t)` (powers of λ included).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RateContributions {
    pub order0: f64,
    pub order1: f64,
    pub order2: f64,
}

impl RateContributions {
    pub fn total(&self) -> f64 {
        self.order0 + self.order1 + self.order2
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.order0, self.order1, self.order2]
    }

    /// The first non-zero correction beyond `λ⁰`, if any.
    pub fn first_correction(&self) -> Option<f64> {
        [self.order1, self.order2].into_iter().find(|&x| x != 0.0)
    }
}

/// Depolarization rate through second order from chaotic-state averages:
///
/// ```text
/// γ̃_λ(t) = γ(1−p) + λ n²/(n²−1) ⟨G⟩
///        + λ²(t−t₀) [ n²/(n²−1) (2(⟨H²⟩−⟨H⟩²) − Σ|⟨L_jL_k⟩|² − ½⟨G²⟩ − ½⟨G⟩²)
///                   + n⁴/(n²−1)² ⟨G⟩² ]
/// ```
pub fn depolarization_rate(spec: &GkslSpec, t: f64, t0: f64) -> Result<RateContributions> {
    let traces = analytic_traces(spec)?;
    let nn = (spec.dim() * spec.dim()) as f64;
    let ratio = nn / (nn - 1.0);
    let lambda = spec.lambda();
    let order2_coefficient = ratio
        * (2.0 * traces.variance_h
            - traces.sum_abs_ljlk
            - 0.5 * traces.mean_g2
            - 0.5 * traces.mean_g * traces.mean_g)
        + ratio * ratio * traces.mean_g * traces.mean_g;
    Ok(RateContributions {
        order0: spec.free_rate(),
        order1: lambda * ratio * traces.mean_g,
        order2: lambda * lambda * (t - t0) * order2_coefficient,
    })
}

/// Rates along a time grid: perturbative contributions, the exact rate from
/// the propagator oracle and their difference.
#[derive(Clone, Debug, PartialEq)]
pub struct RateReport {
    pub time_grid: Vec<f64>,
    pub gamma_tilde_orders: Vec<RateContributions>,
    /// `None` where the exact rate could not be resolved.
    pub gamma_exact: Vec<Option<f64>>,
    pub residual: Vec<Option<f64>>,
}

/// Projected generator `𝔎(t)` and its rate `γ̃` with `𝔎 = −γ̃ Π`.
#[derive(Clone, Debug)]
pub struct ProjectedGenerator {
    pub max_order: usize,
    pub rate: C64,
    pub generator: Superoperator,
}

/// Assembles `𝔎(t)` truncated at `λ^{max_order}` from superoperator products.
///
/// Orders up to two use `ℒ₀ + λ𝔓(ℒ_I) + λ²(t−t₀)(𝔓(ℒ_I²) − 𝔓(ℒ_I)²)`;
/// higher orders sum the composition series of [`cumulant_generator_k`].
pub fn assemble_projected_generator(
    spec: &GkslSpec,
    t: f64,
    t0: f64,
    max_order: usize,
) -> Result<ProjectedGenerator> {
    if max_order > MAX_ORDER {
        return Err(Error::OrderOutOfRange {
            order: max_order,
            max: MAX_ORDER,
        });
    }
    let n = spec.dim();
    let lambda = spec.lambda();
    let l0 = build_free_liouvillian(spec);
    let mut k = l0.clone();
    if max_order >= 1 {
        let li = build_interaction_liouvillian(spec);
        if max_order <= 2 {
            let (_, p1) = project_generator_with_scalar(&li)?;
            k = &k + &(&p1 * lambda);
            if max_order == 2 {
                let (_, p2) = project_generator_with_scalar(&(&li * &li))?;
                let second = &p2 - &(&p1 * &p1);
                k = &k + &(&second * (lambda * lambda * (t - t0)));
            }
        } else {
            let powers = ProjectedPowers::new(&li, max_order)?;
            for order in 1..=max_order {
                let term = cumulant_generator_from(&powers, order, t - t0)?;
                k = &k + &(&term.generator * lambda.powi(order as i32));
            }
        }
    }
    let nn = (n * n) as f64;
    let rate = -sop_trace(&k) / (nn - 1.0);
    Ok(ProjectedGenerator {
        max_order,
        rate,
        generator: k,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gksl::gauge_normalize;
    use crate::linalg::Operator;
    use crate::random::{random_gksl_spec, random_trace_annihilating, RandomSpecOptions};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn composition_examples() {
        let one = compositions(1).unwrap();
        assert_eq!(one, vec![Composition { parts: vec![1] }]);
        let three: Vec<Vec<usize>> = compositions(3).unwrap().into_iter().map(|c| c.parts).collect();
        assert_eq!(three, vec![vec![1, 1, 1], vec![1, 2], vec![2, 1], vec![3]]);
        assert_eq!(compositions(5).unwrap().len(), 16);
        assert!(matches!(compositions(0), Err(Error::OrderOutOfRange { .. })));
        assert!(matches!(compositions(13), Err(Error::OrderOutOfRange { .. })));
    }

    #[test]
    fn compositions_counts_sorted_unique() {
        for k in 1..=MAX_ORDER {
            let comps = compositions(k).unwrap();
            assert_eq!(comps.len(), 1 << (k - 1));
            assert!(comps.windows(2).all(|w| w[0] < w[1]));
            assert!(comps.iter().all(|c| c.total() == k && c.parts.iter().all(|&p| p >= 1)));
        }
    }

    #[test]
    fn second_order_terms() {
        let terms = cumulant_terms(2).unwrap();
        assert_eq!(terms.len(), 2);
        assert_eq!(terms[0].factor_powers, vec![1, 1]);
        assert_eq!((terms[0].sign, terms[0].coefficient), (-1, 1.0));
        assert_eq!(terms[1].factor_powers, vec![2]);
        assert_eq!((terms[1].sign, terms[1].coefficient), (1, 1.0));
    }

    #[test]
    fn cumulant_matches_explicit_low_orders() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let li = random_trace_annihilating(3, &mut rng);
        let (t, t0) = (0.8, 0.1);
        let (m1, p1) = project_generator_with_scalar(&li).unwrap();
        let k1 = cumulant_generator_k(&li, 1, t, t0).unwrap();
        assert!((k1.scalar - m1).norm() < 1e-13);
        assert!(k1.generator.distance(&p1) < 1e-12);

        let (_, p2) = project_generator_with_scalar(&(&li * &li)).unwrap();
        let explicit = &(&p2 - &(&p1 * &p1)) * (t - t0);
        let k2 = cumulant_generator_k(&li, 2, t, t0).unwrap();
        assert!(k2.generator.distance(&explicit) < 1e-12);
    }

    /// The scalar shortcut agrees with summing the actual superoperator
    /// products of projections.
    #[test]
    fn cumulant_scalar_matches_matrix_products() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let li = random_trace_annihilating(2, &mut rng);
        let elapsed: f64 = 0.6;
        let mut projected = vec![Superoperator::identity(2)];
        let mut power = Superoperator::identity(2);
        for _ in 1..=5 {
            power = &power * &li;
            projected.push(project(&power));
        }
        for k in 1..=5 {
            let mut sum = Superoperator::zeros(2);
            for term in cumulant_terms(k).unwrap() {
                let product = term
                    .factor_powers
                    .iter()
                    .fold(Superoperator::identity(2), |acc, &m| &acc * &projected[m]);
                sum = &sum + &(&product * (term.sign as f64 * term.coefficient));
            }
            sum = &sum * elapsed.powi(k as i32 - 1);
            let k_gen = cumulant_generator_k(&li, k, 1.0 + elapsed, 1.0).unwrap();
            let scale = 1.0 + sum.frobenius_norm();
            assert!(k_gen.generator.distance(&sum) < 1e-12 * scale, "k = {k}");
        }
    }

    /// `c_k = κ_k/(k−1)!` where `κ_k` are the cumulants of the moment
    /// sequence `μ_m`; checked against the moment–cumulant recursion.
    #[test]
    fn coefficients_are_cumulants() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let li = &random_trace_annihilating(2, &mut rng) * 0.5;
        let powers = ProjectedPowers::new(&li, 8).unwrap();
        let mu: Vec<C64> = (0..=8).map(|m| powers.mu(m)).collect();
        // κ_k = μ_k − Σ_{j=1}^{k−1} C(k−1, j−1) κ_j μ_{k−j}
        let mut kappa = vec![C64::new(0.0, 0.0); 9];
        for k in 1..=8 {
            let mut v = mu[k];
            for j in 1..k {
                v -= binom(k - 1, j - 1) * kappa[j] * mu[k - j];
            }
            kappa[k] = v;
        }
        for k in 1..=8 {
            let expected = kappa[k] / factorial(k - 1);
            let got = powers.cumulant_coefficient(k).unwrap();
            assert!((got - expected).norm() < 1e-12 * (1.0 + expected.norm()), "k = {k}");
        }
    }

    fn binom(n: usize, k: usize) -> f64 {
        factorial(n) / (factorial(k) * factorial(n - k))
    }

    #[test]
    fn generator_rejects_non_trace_annihilating() {
        let id = Superoperator::identity(2);
        assert!(matches!(
            cumulant_generator_k(&id, 2, 1.0, 0.0),
            Err(Error::NotTraceAnnihilating { .. })
        ));
        let li = Superoperator::zeros(2);
        assert!(cumulant_generator_k(&li, 13, 1.0, 0.0).is_err());
    }

    #[test]
    fn quadrature_trivial_cases() {
        let spec = GkslSpec::new(Operator::zeros(2), vec![], 0.1, 1.0, 0.0).unwrap();
        let l0 = build_free_liouvillian(&spec);
        let zero = Superoperator::zeros(2);
        let q = second_order_generator_quadrature(&l0, &zero, 1.0, 0.0, 8).unwrap();
        assert_eq!(q.frobenius_norm(), 0.0);
        assert!(second_order_generator_quadrature(&l0, &zero, 1.0, 0.0, 0).is_err());
    }

    #[test]
    fn quadrature_self_convergence_is_fourth_order() {
        // A non-depolarizing free generator makes the integrand time dependent.
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let opts = RandomSpecOptions::default();
        let a = gauge_normalize(&random_gksl_spec(2, &opts, &mut rng).unwrap()).unwrap();
        let b = gauge_normalize(&random_gksl_spec(2, &opts, &mut rng).unwrap()).unwrap();
        let l0 = build_interaction_liouvillian(&a);
        let li = build_interaction_liouvillian(&b);
        let q = |steps| second_order_generator_quadrature(&l0, &li, 1.0, 0.0, steps).unwrap();
        let (q4, q8, q16) = (q(4), q(8), q(16));
        let ratio = q4.distance(&q8) / q8.distance(&q16);
        assert!((ratio - 16.0).abs() < 1.5, "ratio {ratio}");
    }

    #[test]
    fn rate_without_perturbation() {
        let spec = GkslSpec::new(Operator::zeros(2), vec![], 0.0, 2.0, 0.25).unwrap();
        let r = depolarization_rate(&spec, 3.0, 0.0).unwrap();
        assert_eq!(r.as_array(), [1.5, 0.0, 0.0]);
        assert_eq!(r.first_correction(), None);
    }

    #[test]
    fn assembled_order_zero_is_free_generator() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let spec = gauge_normalize(&random_gksl_spec(3, &RandomSpecOptions::default(), &mut rng).unwrap())
            .unwrap();
        let g = assemble_projected_generator(&spec, 0.5, 0.0, 0).unwrap();
        assert!(g.generator.distance(&build_free_liouvillian(&spec)) < 1e-15);
        assert!((g.rate.re - spec.free_rate()).abs() < 1e-14);
        assert!(assemble_projected_generator(&spec, 0.5, 0.0, 13).is_err());
    }

    #[test]
    fn series_and_explicit_second_order_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let spec = gauge_normalize(&random_gksl_spec(2, &RandomSpecOptions::default(), &mut rng).unwrap())
            .unwrap();
        let explicit = assemble_projected_generator(&spec, 0.7, 0.2, 2).unwrap();
        // Order 3 minus its λ³ term equals order 2.
        let li = build_interaction_liouvillian(&spec);
        let k3 = cumulant_generator_k(&li, 3, 0.7, 0.2).unwrap();
        let series = assemble_projected_generator(&spec, 0.7, 0.2, 3).unwrap();
        let trimmed = &series.generator - &(&k3.generator * spec.lambda().powi(3));
        assert!(trimmed.distance(&explicit.generator) < 1e-13);
    }
}
